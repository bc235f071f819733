//! Independent verification paths.
//!
//! Nothing here touches the coefficient recurrence of
//! [`crate::coefficients`]: the Bernoulli closed form, the minorant `w_m`
//! and the accelerated alternating-series evaluator are separate routes to
//! the same quantities. All of them run at twice the mantissa width of the
//! context they are given.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::coefficients::{check_base, check_half_plane, pochhammer_over_factorial};
use crate::error::{Error, Result};
use crate::numerics::{digits_to_bits, int_pow_complex, CComplex, CReal, PrecisionContext};

/// Exact rational numbers.
pub type RationalQ = Rational;

/// Bernoulli numbers `B_0, B_1 = -1/2, B_2 = 1/6, ...` from
/// `sum_{k=0..n} C(n+1, k) B_k = 0`.
#[derive(Clone, Debug)]
pub struct BernoulliCache {
    values: Vec<RationalQ>,
}

impl Default for BernoulliCache {
    fn default() -> Self {
        Self { values: vec![Rational::from(1)] }
    }
}

impl BernoulliCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn extend(&mut self, upto: usize) {
        for n in self.values.len()..=upto {
            let mut acc = Rational::new();
            for (k, bk) in self.values.iter().enumerate() {
                if bk.cmp0().is_eq() {
                    continue;
                }
                let binom = Integer::from(Integer::binomial_u(n as u32 + 1, k as u32));
                acc += Rational::from(bk * &binom);
            }
            acc /= -(n as i64 + 1);
            self.values.push(acc);
        }
    }

    pub fn get(&mut self, n: usize) -> &RationalQ {
        self.extend(n);
        &self.values[n]
    }

    pub fn values(&self) -> &[RationalQ] {
        &self.values
    }
}

/// `B_n`, exact.
pub fn bernoulli(n: usize) -> RationalQ {
    let mut cache = BernoulliCache::new();
    cache.get(n).clone()
}

/// `b^(s+shift) / (b^(s+shift) - b)`, refusing denominators smaller than
/// `2^-(bits/4)`.
fn pole_ratio(base_pow_s: &CComplex, base: u32, shift: u32, threshold: &CReal) -> Result<CComplex> {
    let prec = base_pow_s.prec();
    let scale = Float::with_val(prec, Float::u_pow_u(base, shift));
    let num = base_pow_s.mul_real(&scale);
    let mut den = num.clone();
    den.re -= base;
    if den.abs() < *threshold {
        return Err(Error::NearPole { shift });
    }
    Ok(&num / &den)
}

/// `u_m(s)` from its closed form in Bernoulli numbers:
///
/// ```text
/// u_0 = b^s/(b^s - b)
/// u_m = 1/(m+1) b^s/(b^s - b) - b^(s+1)/(2(b^(s+1) - b))
///     + sum_{1<=k<=m/2} m!/(m-2k+1)! B_2k/(2k)! b^(s+2k)/(b^(s+2k) - b)
/// ```
///
/// Computed at twice the context width. `NearPole` when one of the
/// denominators is below `2^-(mantissa_bits/4)`.
pub fn u_m_closed(s: &CComplex, m: usize, base: u32, ctx: &PrecisionContext) -> Result<CComplex> {
    let mut cache = BernoulliCache::new();
    u_m_closed_cached(s, m, base, ctx, &mut cache)
}

fn u_m_closed_cached(
    s: &CComplex,
    m: usize,
    base: u32,
    ctx: &PrecisionContext,
    cache: &mut BernoulliCache,
) -> Result<CComplex> {
    check_base(base)?;
    let wide = ctx.doubled();
    let prec = wide.mantissa_bits();
    let threshold = Float::with_val(prec, 1) >> (ctx.mantissa_bits() / 4);
    let s = s.with_prec(prec);
    let bs = int_pow_complex(base, &s, &wide);

    let lead = pole_ratio(&bs, base, 0, &threshold)?;
    if m == 0 {
        return Ok(lead);
    }
    let mut acc = lead.mul_real(&Float::with_val(prec, m + 1).recip());
    let half = pole_ratio(&bs, base, 1, &threshold)?;
    acc -= &half.mul_real(&Float::with_val(prec, 0.5));

    cache.extend(m);
    let mut fall = Integer::from(m); // m!/(m-2k+1)! for k = 1 is m
    let mut fact = Integer::from(2); // (2k)!
    for k in 1..=m / 2 {
        if k > 1 {
            let top = (m - 2 * k + 3) as u32;
            fall *= top;
            fall *= top - 1;
            fact *= (2 * k - 1) as u32;
            fact *= (2 * k) as u32;
        }
        let coeff = Rational::from(&cache.values()[2 * k] * &fall) / &fact;
        let ratio = pole_ratio(&bs, base, 2 * k as u32, &threshold)?;
        acc += &ratio.mul_real(&Float::with_val(prec, &coeff));
    }
    Ok(acc)
}

/// `c*_m(s) = (s+1)_m/m! * (1 - b^(1-s)) * u_m(s)` via the Bernoulli closed
/// form. Subject to heavy cancellation as `m` grows; meant for `m <= 40`.
pub fn cstar_via_bernoulli(s: &CComplex, m: usize, base: u32, ctx: &PrecisionContext) -> Result<CComplex> {
    let mut cache = BernoulliCache::new();
    cstar_via_bernoulli_cached(s, m, base, ctx, &mut cache)
}

fn cstar_via_bernoulli_cached(
    s: &CComplex,
    m: usize,
    base: u32,
    ctx: &PrecisionContext,
    cache: &mut BernoulliCache,
) -> Result<CComplex> {
    check_half_plane(s)?;
    let u = u_m_closed_cached(s, m, base, ctx, cache)?;
    let wide = ctx.doubled();
    let prec = wide.mantissa_bits();
    let s = s.with_prec(prec);
    let one = CComplex::one(prec);
    let factor = &one - &int_pow_complex(base, &(&one - &s), &wide);
    let poch = pochhammer_over_factorial(&s, m, &wide);
    Ok(&(&poch * &factor) * &u)
}

/// `c*_0..=c*_last` via the Bernoulli closed form, sharing one cache.
pub fn cstar_via_bernoulli_sequence(
    s: &CComplex,
    last: usize,
    base: u32,
    ctx: &PrecisionContext,
) -> Result<Vec<CComplex>> {
    let mut cache = BernoulliCache::new();
    (0..=last).map(|m| cstar_via_bernoulli_cached(s, m, base, ctx, &mut cache)).collect()
}

/// `w_m = (1 - b^-sigma) sum_{k>=0} b^(-sigma k) (1 - b^-k)^m`, at twice the
/// context width. The sum stops once `b^(-sigma k) / (1 - b^-sigma)`, which
/// bounds everything left, is below `2^-(bits+8)`.
pub fn w_closed(sigma: &CReal, base: u32, m: usize, ctx: &PrecisionContext) -> Result<CReal> {
    check_base(base)?;
    if sigma.is_sign_negative() || sigma.is_zero() {
        return Err(Error::NonPositiveRealPart);
    }
    let wide = ctx.doubled();
    let prec = wide.mantissa_bits();
    let sigma = Float::with_val(prec, sigma);
    let b = Float::with_val(prec, base);
    let step = Float::with_val(prec, (&b).pow(Float::with_val(prec, -&sigma)));
    let norm = Float::with_val(prec, 1u32 - &step);
    let threshold = Float::with_val(prec, 1) >> (prec + 8);
    let inv_b = Float::with_val(prec, &b).recip();

    let mut sum = Float::new(prec);
    let mut weight = Float::with_val(prec, 1); // b^(-sigma k)
    let mut inv_bk = Float::with_val(prec, 1); // b^-k
    let mut k = 0u32;
    loop {
        let base_term = Float::with_val(prec, 1u32 - &inv_bk);
        let term = Float::with_val(prec, base_term.pow(m as u32)) * &weight;
        sum += &term;
        if Float::with_val(prec, &weight / &norm) < threshold && k > 0 {
            break;
        }
        weight *= &step;
        inv_bk *= &inv_b;
        k += 1;
    }
    Ok(sum * norm)
}

/// Both sides of `(b^(m+sigma) - 1) w_m = sum_{j=1..m} C(m,j) (b-1)^j w_(m-j)`,
/// evaluated from the closed form of `w`.
pub fn w_recurrence_sides(
    sigma: &CReal,
    base: u32,
    m: usize,
    ctx: &PrecisionContext,
) -> Result<(CReal, CReal)> {
    let prec = ctx.doubled().mantissa_bits();
    let ws: Vec<CReal> = (0..=m).map(|k| w_closed(sigma, base, k, ctx)).collect::<Result<_>>()?;
    let b = Float::with_val(prec, base);
    let exp = Float::with_val(prec, sigma + m as u32);
    let lhs = Float::with_val(prec, b.pow(&exp) - 1u32) * &ws[m];
    let mut rhs = Float::new(prec);
    for j in 1..=m {
        let coeff = Integer::from(Integer::binomial_u(m as u32, j as u32)) * Integer::from(Integer::u_pow_u(base - 1, j as u32));
        rhs += Float::with_val(prec, &coeff) * &ws[m - j];
    }
    Ok((lhs, rhs))
}

/// `m! / (sigma+1)_m`, the integral the minorant `b^sigma w_m` dominates.
pub fn beta_integral(sigma: &CReal, m: usize, ctx: &PrecisionContext) -> CReal {
    let prec = ctx.doubled().mantissa_bits();
    let mut acc = Float::with_val(prec, 1);
    for j in 1..=m {
        acc *= j as u32;
        acc /= Float::with_val(prec, sigma + j as u32);
    }
    acc
}

/// Classical accelerated evaluation of `eta(s)` (Chebyshev-weighted partial
/// sums of the alternating series), independent of everything else in the
/// crate except the arithmetic kernel.
///
/// With `d_k = n sum_{i=0..k} (n+i-1)! 4^i / ((n-i)! (2i)!)`,
/// `eta(s) = -1/d_n sum_{k<n} (-1)^k (d_k - d_n)/(k+1)^s + e_n` where
/// `|e_n| <= 3 (1 + 2|t|) e^(pi |t|/2) / (3 + sqrt 8)^n`. `n` is chosen so that
/// bound is below `10^-(digits+10)`.
pub fn eta_reference(s: &CComplex, digits: u32) -> Result<CComplex> {
    check_half_plane(s)?;
    let t = s.im.to_f64().abs();
    let target = f64::from(digits + 10) * std::f64::consts::LN_10;
    let growth = (3.0 * (1.0 + 2.0 * t)).ln() + std::f64::consts::FRAC_PI_2 * t;
    let rate = (3.0 + 8f64.sqrt()).ln();
    let n = ((target + growth) / rate).ceil() as usize + 1;

    let prec = digits_to_bits(digits + 10) + (n as f64).log2().ceil() as u32 + 64;
    let ctx = PrecisionContext::with_guard_bits(digits + 10, prec - digits_to_bits(digits + 10))?;
    let s = s.with_prec(prec);
    let neg_s = -&s;

    let nn = n as u64;
    let mut term = Float::with_val(prec, 1) / nn; // (n-1)!/n! for i = 0
    let mut d = Vec::with_capacity(n + 1);
    let mut partial = Float::with_val(prec, &term);
    d.push(Float::with_val(prec, &partial * nn));
    for i in 1..=nn {
        term *= 4 * (nn + i - 1) * (nn - i + 1);
        term /= (2 * i) * (2 * i - 1);
        partial += &term;
        d.push(Float::with_val(prec, &partial * nn));
    }
    let dn = d[n].clone();
    let mut acc = CComplex::zero(prec);
    for (k, dk) in d.iter().take(n).enumerate() {
        let w = Float::with_val(prec, dk - &dn);
        let mut z = int_pow_complex(k as u32 + 1, &neg_s, &ctx).mul_real(&w);
        if k % 2 == 1 {
            z = -z;
        }
        acc += &z;
    }
    let scale = Float::with_val(prec, -dn.recip());
    Ok(acc.mul_real(&scale))
}

/// `zeta(s)` from [`eta_reference`]; `s` must keep `1 - 2^(1-s)` away from 0.
pub fn zeta_reference(s: &CComplex, digits: u32) -> Result<CComplex> {
    let e = eta_reference(s, digits)?;
    let prec = e.prec();
    let ctx = PrecisionContext::with_guard_bits(digits + 10, prec - digits_to_bits(digits + 10))?;
    let one = CComplex::one(prec);
    let factor = &one - &int_pow_complex(2, &(&one - &s.with_prec(prec)), &ctx);
    if factor.abs() < Float::with_val(prec, 1) >> (prec / 4) {
        return Err(Error::NearPole { shift: 0 });
    }
    Ok(&e / &factor)
}

/// `eta_b(s) = (1 - b^(1-s)) / (1 - 2^(1-s)) * eta(s)` from [`eta_reference`].
pub fn eta_b_reference(s: &CComplex, base: u32, digits: u32) -> Result<CComplex> {
    check_base(base)?;
    if base == 2 {
        return eta_reference(s, digits);
    }
    let z = zeta_reference(s, digits)?;
    let prec = z.prec();
    let ctx = PrecisionContext::with_guard_bits(digits + 10, prec - digits_to_bits(digits + 10))?;
    let one = CComplex::one(prec);
    let factor = &one - &int_pow_complex(base, &(&one - &s.with_prec(prec)), &ctx);
    Ok(&z * &factor)
}

/// `pi` at `prec` bits.
pub fn pi(prec: u32) -> CReal {
    Float::with_val(prec, Constant::Pi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(30).unwrap()
    }

    #[test]
    fn bernoulli_small_values() {
        assert_eq!(bernoulli(0), 1);
        assert_eq!(bernoulli(1), Rational::from((-1, 2)));
        assert_eq!(bernoulli(2), Rational::from((1, 6)));
        assert_eq!(bernoulli(12), Rational::from((-691, 2730)));
        let mut cache = BernoulliCache::new();
        cache.extend(40);
        for n in (3..=40).step_by(2) {
            assert_eq!(cache.values()[n], 0, "B_{n}");
        }
    }

    #[test]
    fn bernoulli_defining_identity() {
        let mut cache = BernoulliCache::new();
        cache.extend(60);
        for n in 1..=60usize {
            let mut acc = Rational::new();
            for k in 0..=n {
                let binom = Integer::from(Integer::binomial_u(n as u32 + 1, k as u32));
                acc += Rational::from(&cache.values()[k] * &binom);
            }
            assert_eq!(acc, 0, "n={n}");
        }
    }

    #[test]
    fn u0_and_c0() {
        let c = ctx();
        let u0 = u_m_closed(&c.complex(2, 0), 0, 2, &c).unwrap();
        assert!((u0.re.to_f64() - 2.0).abs() < 1e-60);
        let c0 = cstar_via_bernoulli(&c.complex(2, 0), 0, 2, &c).unwrap();
        assert!((c0.re.to_f64() - 1.0).abs() < 1e-60);
        let u1 = u_m_closed(&c.complex(2, 0), 1, 2, &c).unwrap();
        assert!((u1.re.to_f64() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_pole_neighbourhood() {
        let c = ctx();
        let s = c.complex(1, 0);
        assert_eq!(u_m_closed(&s, 3, 2, &c).unwrap_err(), Error::NearPole { shift: 0 });
        let near = CComplex::new(c.real(1) + (c.real(1) >> 200u32), c.real(0));
        assert!(matches!(cstar_via_bernoulli(&near, 2, 3, &c), Err(Error::NearPole { .. })));
    }

    #[test]
    fn w_values_and_recurrence() {
        let c = ctx();
        let w0 = w_closed(&c.real(0.3), 2, 0, &c).unwrap();
        assert!((w0.to_f64() - 1.0).abs() < 1e-60);
        for b in [2u32, 3, 5] {
            for m in [1usize, 4, 12] {
                let (l, r) = w_recurrence_sides(&c.real(1), b, m, &c).unwrap();
                let rel = Float::with_val(l.prec(), &l - &r).abs() / &r;
                assert!(rel < c.unit_roundoff(), "b={b} m={m}");
            }
        }
    }

    #[test]
    fn w_dominates_beta_integral() {
        let c = ctx();
        for sigma in [0.3, 1.0, 2.5] {
            let sig = c.real(sigma);
            let bs = Float::with_val(200, Float::with_val(200, 2).pow(&sig));
            for m in 0..=30 {
                let w = w_closed(&sig, 2, m, &c).unwrap();
                assert!(Float::with_val(w.prec(), &bs * &w) > beta_integral(&sig, m, &c));
            }
        }
    }

    #[test]
    fn reference_known_values() {
        let ln2 = Float::with_val(300, Float::ln_u(2));
        let e1 = eta_reference(&CComplex::from_real(Float::with_val(200, 1)), 50).unwrap();
        assert!(Float::with_val(300, &e1.re - &ln2).abs() < 1e-55);

        let pi2_12 = Float::with_val(300, pi(300).square()) / 12u32;
        let e2 = eta_reference(&CComplex::from_real(Float::with_val(200, 2)), 50).unwrap();
        assert!(Float::with_val(300, &e2.re - &pi2_12).abs() < 1e-55);

        let z = zeta_reference(&CComplex::from_real(Float::with_val(200, 2)), 40).unwrap();
        let pi2_6 = Float::with_val(300, pi(300).square()) / 6u32;
        assert!(Float::with_val(300, &z.re - &pi2_6).abs() < 1e-45);
    }
}
