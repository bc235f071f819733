//! Explicit coefficient bounds and the truncation planner.
//!
//! For real `sigma > 0`:
//!
//! * `b^-sigma < c*_m(sigma)` (lower bound);
//! * `c*_m(sigma) <= prod_{j=1..m} F_j(sigma)` with
//!   `F_j = (b^(sigma+j) - b + g_(sigma+j)) / (b^(sigma+j) - b)` and
//!   `g_x = sum_{0<a<b} a^x`; the product increases to `P_b(sigma)`;
//! * for complex `s`, `|c*_m(s)| <= |(s+1)_m| / (sigma+1)_m * c*_m(sigma)`.
//!
//! The planner turns these into a computable geometric majorant of the
//! series tail and picks the smallest admissible number of terms.

use rug::ops::Pow;
use rug::Float;

use crate::coefficients::{check_base, check_half_plane, PochhammerRatio};
use crate::error::{Error, Result};
use crate::numerics::{real_pow, round_up, CComplex, CReal, PrecisionContext};

/// `(2^sigma - 2^-m) / (2^sigma - 1)`: the product bound in closed form for `b = 2`.
pub fn cstar_sigma_bound_b2(sigma: &CReal, m: u32) -> CReal {
    let prec = sigma.prec();
    let two_sigma = Float::with_val(prec, Float::with_val(prec, 2).pow(sigma));
    let tail = Float::with_val(prec, 1) >> m;
    Float::with_val(prec, &two_sigma - &tail) / Float::with_val(prec, &two_sigma - 1u32)
}

/// Excess over one of the product factor, written in the scaled form
/// `F_j - 1 = sum_{0<a<b} (a/b)^(sigma+j) / (1 - b^(1-sigma-j))`.
fn factor_excess(base: u32, sigma: &CReal, j: usize, ctx: &PrecisionContext) -> CReal {
    let prec = ctx.mantissa_bits();
    let x = Float::with_val(prec, sigma + j as u32);
    let mut num = Float::new(prec);
    let bf = Float::with_val(prec, base);
    for a in 1..base {
        let ratio = Float::with_val(prec, a) / &bf;
        num += real_pow(&ratio, &x, ctx);
    }
    let one_minus_x = Float::with_val(prec, 1u32 - Float::with_val(prec, &x));
    let den = Float::with_val(prec, 1u32 - real_pow(&bf, &one_minus_x, ctx));
    num / den
}

/// Factor `F_j(sigma)` of the finite product bound.
pub fn product_bound_factor(base: u32, sigma: &CReal, j: usize, ctx: &PrecisionContext) -> CReal {
    factor_excess(base, sigma, j, ctx) + 1u32
}

/// Running product bound `[1, F_1, F_1 F_2, ...]` through index `m`.
pub fn product_bound_profile(base: u32, sigma: &CReal, m: usize, ctx: &PrecisionContext) -> Vec<CReal> {
    let prec = ctx.mantissa_bits();
    let mut out = Vec::with_capacity(m + 1);
    let mut acc = Float::with_val(prec, 1);
    out.push(acc.clone());
    for j in 1..=m {
        acc *= product_bound_factor(base, sigma, j, ctx);
        out.push(acc.clone());
    }
    out
}

/// `prod_{j=1..m} F_j(sigma)`, an upper bound for `c*_m(sigma)`.
pub fn cstar_sigma_bound_product(base: u32, sigma: &CReal, m: usize, ctx: &PrecisionContext) -> Result<CReal> {
    check_base(base)?;
    check_sigma(sigma)?;
    Ok(product_bound_profile(base, sigma, m, ctx).pop().unwrap())
}

fn check_sigma(sigma: &CReal) -> Result<()> {
    if sigma.is_sign_negative() || sigma.is_zero() || sigma.is_nan() {
        return Err(Error::NonPositiveRealPart);
    }
    Ok(())
}

/// `P_b(sigma)`, the limit of the product bound, returned as an upper
/// estimate at the context precision.
///
/// Factors are multiplied until their excess drops below
/// `2^-(mantissa_bits+8)`. The excesses decay at least like `((b-1)/b)^j`,
/// so the neglected part of the log-product is at most `(b-1)` times the last
/// excess; that and the rounding of the running product (each factor is off
/// by at most three units in the last place) are folded in upward.
pub fn p_bound(base: u32, sigma: &CReal, ctx: &PrecisionContext) -> Result<CReal> {
    check_base(base)?;
    check_sigma(sigma)?;
    let prec = ctx.mantissa_bits();
    let wide = ctx.with_extra_bits(32);
    let wp = wide.mantissa_bits();
    let sigma_w = Float::with_val(wp, sigma);
    let threshold = Float::with_val(wp, 1) >> (prec + 8);
    let mut acc = Float::with_val(wp, 1);
    let mut j = 0usize;
    let last_excess = loop {
        j += 1;
        let e = factor_excess(base, &sigma_w, j, &wide);
        acc *= Float::with_val(wp, &e + 1u32);
        if e < threshold {
            break e;
        }
    };
    let tail = Float::with_val(wp, &last_excess * (2 * (base - 1)));
    let rounding = Float::with_val(wp, 4 * j as u64 + 16) >> prec;
    let inflate = Float::with_val(wp, 1u32 + tail) * Float::with_val(wp, 1u32 + rounding);
    Ok(round_up(&Float::with_val(wp, &acc * &inflate), prec))
}

/// Bounds on `c*_m(sigma)` for one `(b, sigma)`.
#[derive(Clone, Debug)]
pub struct BoundProfile {
    base: u32,
    sigma: CReal,
    ctx: PrecisionContext,
    upper_sigma: Vec<CReal>,
    lower: CReal,
    p_bound: CReal,
    unit_cap: bool,
}

impl BoundProfile {
    pub fn new(base: u32, sigma: &CReal, upto: usize, ctx: &PrecisionContext) -> Result<Self> {
        check_base(base)?;
        check_sigma(sigma)?;
        let prec = ctx.mantissa_bits();
        let sigma = Float::with_val(prec, sigma);
        let neg = Float::with_val(prec, -&sigma);
        let lower = real_pow(&Float::with_val(prec, base), &neg, ctx);
        Ok(Self {
            base,
            upper_sigma: product_bound_profile(base, &sigma, upto, ctx),
            p_bound: p_bound(base, &sigma, ctx)?,
            sigma,
            ctx: *ctx,
            lower,
            unit_cap: false,
        })
    }

    /// Use `c*_m(sigma) <= 1` for `sigma > 1` in place of the product bound.
    /// This inequality is imported, not derived here.
    pub fn with_unit_cap(mut self) -> Self {
        self.unit_cap = self.sigma > 1;
        self
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn sigma(&self) -> &CReal {
        &self.sigma
    }

    pub fn len(&self) -> usize {
        self.upper_sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.upper_sigma.is_empty()
    }

    pub fn extend(&mut self, upto: usize) {
        let mut acc = self.upper_sigma.last().unwrap().clone();
        for j in self.upper_sigma.len()..=upto {
            acc *= product_bound_factor(self.base, &self.sigma, j, &self.ctx);
            self.upper_sigma.push(acc.clone());
        }
    }

    /// Upper bound for `c*_m(sigma)`.
    pub fn upper(&self, m: usize) -> CReal {
        let u = &self.upper_sigma[m];
        if self.unit_cap && *u > 1 {
            Float::with_val(u.prec(), 1)
        } else {
            u.clone()
        }
    }

    pub fn upper_sigma(&self) -> &[CReal] {
        &self.upper_sigma
    }

    /// `b^-sigma`.
    pub fn lower(&self) -> &CReal {
        &self.lower
    }

    pub fn p_bound(&self) -> &CReal {
        &self.p_bound
    }
}

/// Upper bound for `|c*_m(s)|`: the Pochhammer ratio at `m` times the
/// bound on `c*_m(sigma)`.
pub fn cstar_abs_bound(m: usize, profile: &BoundProfile, poch: &PochhammerRatio) -> CReal {
    let u = profile.upper(m);
    Float::with_val(u.prec(), poch.value_at(m) * &u)
}

/// Majorant `C(m) <= C(M) q^(m-M)` used for every coefficient beyond `M`.
#[derive(Clone, Debug)]
pub struct TermMajorant {
    /// Bound on `|c*_M(s)|`.
    pub anchor: CReal,
    /// Growth factor `q`, the product of the Pochhammer and product-bound
    /// factors at index `M+1`.
    pub growth: CReal,
}

#[derive(Clone, Debug)]
pub struct TruncationPlan {
    /// Index of the last kept term; the series is summed for `m = 0..=terms`.
    pub terms: usize,
    pub remainder_bound: CReal,
    /// Effective geometric ratio of the tail majorant.
    pub ratio: CReal,
    pub majorant: TermMajorant,
    /// Largest per-term majorant among the kept terms.
    pub max_term_bound: CReal,
    pub ell: u32,
    pub base: u32,
}

/// One index of the planner scan.
#[derive(Clone, Debug)]
pub struct PlanStep {
    pub m: usize,
    /// Bound on `|c*_m(s)|`.
    pub coefficient_bound: CReal,
    /// Bound on the modulus of the `m`-th series term.
    pub term_bound: CReal,
    pub growth: CReal,
    pub ratio: CReal,
    /// Geometric majorant of `sum_{k>m} |term_k|`; `None` while `ratio >= 1`.
    pub tail_bound: Option<CReal>,
}

/// Walks `m = 0, 1, 2, ...` producing the quantities of the tail majorant.
///
/// For `m > M` the `m`-th term is bounded by
/// `|s|/(sigma+m) * C(m) * (b-1) * b^((ell-1)(1-sigma-m))`, where the last two
/// factors bound the block power sum and `C(m)` bounds `|c*_m(s)|`. Both
/// factor sequences making up `C` decrease, so `C(m) <= C(M) q^(m-M)`, and
/// the tail is a geometric series of ratio `q b^-(ell-1)`.
pub struct TailScan {
    base: u32,
    ell: u32,
    ctx: PrecisionContext,
    s_abs: CReal,
    sigma: CReal,
    poch: PochhammerRatio,
    product: CReal,
    next_factor: CReal,
    m: usize,
}

impl TailScan {
    pub fn new(s: &CComplex, base: u32, ell: u32, ctx: &PrecisionContext) -> Result<Self> {
        check_base(base)?;
        check_half_plane(s)?;
        if ell < 2 {
            return Err(Error::InvalidEll(ell));
        }
        let prec = ctx.mantissa_bits();
        let s = s.with_prec(prec);
        let poch = PochhammerRatio::new(&s, ctx)?;
        let next_factor = product_bound_factor(base, &s.re, 1, ctx);
        Ok(Self {
            base,
            ell,
            ctx: *ctx,
            s_abs: s.abs(),
            sigma: s.re.clone(),
            poch,
            product: Float::with_val(prec, 1),
            next_factor,
            m: 0,
        })
    }
}

impl Iterator for TailScan {
    type Item = PlanStep;

    fn next(&mut self) -> Option<PlanStep> {
        let prec = self.ctx.mantissa_bits();
        let m = self.m;
        let b = Float::with_val(prec, self.base);
        let block_exp = Float::with_val(prec, 1u32 - Float::with_val(prec, &self.sigma + m as u32)) * (self.ell - 1);
        let block = real_pow(&b, &block_exp, &self.ctx) * (self.base - 1);
        let coefficient_bound = Float::with_val(prec, self.poch.value() * &self.product);

        let weight = |shift: usize| Float::with_val(prec, &self.s_abs / Float::with_val(prec, &self.sigma + shift as u32));
        let term_bound = Float::with_val(prec, &coefficient_bound * &block) * weight(m);

        let growth = Float::with_val(prec, self.poch.factor(m + 1) * &self.next_factor);
        let shrink = real_pow(&b, &Float::with_val(prec, -i64::from(self.ell - 1)), &self.ctx);
        let ratio = Float::with_val(prec, &growth * &shrink);
        let tail_bound = (ratio < 1).then(|| {
            let geom = Float::with_val(prec, &ratio / Float::with_val(prec, 1u32 - &ratio));
            Float::with_val(prec, &coefficient_bound * &block) * weight(m + 1) * geom
        });

        // advance to m + 1
        self.poch.extend(m + 1);
        self.product *= &self.next_factor;
        self.next_factor = product_bound_factor(self.base, &self.sigma, m + 2, &self.ctx);
        self.m += 1;

        Some(PlanStep { m, coefficient_bound, term_bound, growth, ratio, tail_bound })
    }
}

/// Smallest `M` whose certified tail is at most `tol`.
pub fn plan_truncation(
    s: &CComplex,
    base: u32,
    ell: u32,
    tol: &CReal,
    max_terms: usize,
    ctx: &PrecisionContext,
) -> Result<TruncationPlan> {
    if tol.is_sign_negative() || tol.is_zero() {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let mut max_term = Float::new(ctx.mantissa_bits());
    let mut converging = false;
    for step in TailScan::new(s, base, ell, ctx)?.take(max_terms + 1) {
        if step.term_bound > max_term {
            max_term = step.term_bound.clone();
        }
        if let Some(tail) = step.tail_bound {
            converging = true;
            if tail <= *tol {
                return Ok(TruncationPlan {
                    terms: step.m,
                    remainder_bound: tail,
                    ratio: step.ratio,
                    majorant: TermMajorant { anchor: step.coefficient_bound, growth: step.growth },
                    max_term_bound: max_term,
                    ell,
                    base,
                });
            }
        }
    }
    if converging {
        Err(Error::MaxTermsExceeded { max_terms })
    } else {
        Err(Error::PlanFailure { ell, max_terms })
    }
}

/// Largest block (number of integers `n` with `b^(ell-1) <= n < b^ell`)
/// the automatic choice of `ell` will accept.
pub const MAX_AUTO_BLOCK: u64 = 4096;

/// Target effective ratio for the automatic choice of `ell`.
pub const AUTO_RATIO: f64 = 0.125;

/// Number of integers in the block `[b^(ell-1), b^ell)`.
pub fn block_len(base: u32, ell: u32) -> u64 {
    u64::from(base - 1).saturating_mul(u64::from(base).saturating_pow(ell - 1))
}

/// Plan with the smallest `ell` whose effective ratio is at most 1/8, among
/// those with a block of at most [`MAX_AUTO_BLOCK`] integers (`ell = 2` is
/// always a candidate). Falls back to the successful candidate with the
/// smallest ratio.
pub fn plan_auto(
    s: &CComplex,
    base: u32,
    tol: &CReal,
    max_terms: usize,
    ctx: &PrecisionContext,
) -> Result<TruncationPlan> {
    check_base(base)?;
    let mut best: Option<TruncationPlan> = None;
    let mut last_err = None;
    let mut ell = 2;
    loop {
        match plan_truncation(s, base, ell, tol, max_terms, ctx) {
            Ok(plan) => {
                if plan.ratio <= AUTO_RATIO {
                    return Ok(plan);
                }
                if best.as_ref().map_or(true, |b| plan.ratio < b.ratio) {
                    best = Some(plan);
                }
            }
            Err(e) => last_err = Some(e),
        }
        ell += 1;
        if block_len(base, ell) > MAX_AUTO_BLOCK {
            break;
        }
    }
    best.ok_or_else(|| last_err.expect("at least one candidate was tried"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::CoefficientTable;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(30).unwrap()
    }

    fn rel_close(a: &CReal, b: &CReal, ulps: u32, ctx: &PrecisionContext) -> bool {
        let d = Float::with_val(a.prec(), a - b).abs();
        d <= Float::with_val(a.prec(), b.abs_ref()) * ctx.unit_roundoff() * ulps
    }

    #[test]
    fn b2_closed_form_values() {
        let c = ctx();
        let big = cstar_sigma_bound_b2(&c.real(1), 200);
        assert!((big.to_f64() - 2.0).abs() < 1e-50);
        let v = cstar_sigma_bound_b2(&c.real(2), 1);
        assert!(rel_close(&v, &(c.real(3.5) / 3u32), 4, &c));
        assert!(v.to_f64() > 0.5);
    }

    #[test]
    fn product_matches_b2_closed_form() {
        let c = ctx();
        for sigma in [0.3, 1.0, 2.5] {
            let sig = c.real(sigma);
            let prof = product_bound_profile(2, &sig, 100, &c);
            for (m, p) in prof.iter().enumerate() {
                assert!(rel_close(p, &cstar_sigma_bound_b2(&sig, m as u32), 4 * (m as u32 + 2), &c));
            }
        }
    }

    #[test]
    fn product_small_cases() {
        let c = ctx();
        assert_eq!(cstar_sigma_bound_product(3, &c.real(1.5), 0, &c).unwrap(), 1);
        let v = cstar_sigma_bound_product(3, &c.real(1), 1, &c).unwrap();
        assert!(rel_close(&v, &(c.real(11) / 6u32), 8, &c));
    }

    #[test]
    fn p_bound_properties() {
        let c = ctx();
        let p1 = p_bound(2, &c.real(1), &c).unwrap();
        let p2 = p_bound(2, &c.real(2), &c).unwrap();
        let p4 = p_bound(2, &c.real(4), &c).unwrap();
        assert!(p1 > p2 && p2 > p4 && p4 > 1);
        assert!((p1.to_f64() - 2.0).abs() < 1e-30);
        for b in [3u32, 5, 10] {
            let p = p_bound(b, &c.real(0.5), &c).unwrap();
            let prof = product_bound_profile(b, &c.real(0.5), 300, &c);
            assert!(prof.iter().all(|x| *x <= p), "b={b}");
        }
    }

    #[test]
    fn profile_sandwich_small() {
        let c = ctx();
        for b in [2u32, 3, 5] {
            let sigma = c.real(0.7);
            let prof = BoundProfile::new(b, &sigma, 40, &c).unwrap();
            let mut t = CoefficientTable::new(b, &CComplex::from_real(sigma.clone()), &c).unwrap();
            t.cstar_extend(40);
            for m in 0..=40 {
                let cs = &t.cstar(m).re;
                assert!(prof.lower() < cs);
                assert!(*cs <= prof.upper(m));
                assert!(prof.upper(m) <= *prof.p_bound());
            }
        }
    }

    #[test]
    fn abs_bound_real_axis_is_product() {
        let c = ctx();
        let s = c.complex(1.3, 0);
        let prof = BoundProfile::new(3, &s.re, 20, &c).unwrap();
        let mut poch = PochhammerRatio::new(&s, &c).unwrap();
        poch.extend(20);
        for m in 0..=20 {
            assert_eq!(cstar_abs_bound(m, &prof, &poch), prof.upper(m));
        }
    }

    #[test]
    fn unit_cap_only_above_one() {
        let c = ctx();
        let p = BoundProfile::new(2, &c.real(2), 10, &c).unwrap().with_unit_cap();
        assert!((0..=10).all(|m| p.upper(m) <= 1));
        let q = BoundProfile::new(2, &c.real(0.5), 10, &c).unwrap().with_unit_cap();
        assert!(q.upper(10) > 1);
    }

    #[test]
    fn plan_huge_tolerance_keeps_one_term() {
        let c = ctx();
        let plan = plan_truncation(&c.complex(2, 0), 2, 8, &c.real(1e6), 100, &c).unwrap();
        assert_eq!(plan.terms, 0);
        assert!(plan.remainder_bound <= 1e6);
    }

    #[test]
    fn plan_reports_failure_when_ratio_stays_large() {
        let c = ctx();
        let err = plan_truncation(&c.complex(0.5, 40), 2, 2, &c.real(1e-10), 5, &c).unwrap_err();
        assert_eq!(err, Error::PlanFailure { ell: 2, max_terms: 5 });
        let err = plan_truncation(&c.complex(2, 0), 2, 2, &c.real(1e-30), 5, &c).unwrap_err();
        assert_eq!(err, Error::MaxTermsExceeded { max_terms: 5 });
    }

    #[test]
    fn tail_bound_nonincreasing_once_convergent() {
        let c = ctx();
        let s = c.complex(0.5, 14.134725);
        let tails: Vec<CReal> = TailScan::new(&s, 2, 3, &c).unwrap().take(200).filter_map(|st| st.tail_bound).collect();
        assert!(tails.len() > 100);
        assert!(tails.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn auto_ell_respects_block_cap() {
        let c = ctx();
        let tol = c.tolerance();
        for b in [2u32, 3, 5, 10] {
            let plan = plan_auto(&c.complex(2, 0), b, &tol, 10_000, &c).unwrap();
            assert!(block_len(b, plan.ell) <= MAX_AUTO_BLOCK || plan.ell == 2);
            assert!(plan.ratio <= AUTO_RATIO);
        }
    }
}
