//! Evaluation of `eta_b(s)`, `eta(s)` and `zeta(s)` by the block expansion
//!
//! ```text
//! eta_b(s) = (1 - b^(1-s)) sum_{0<n<b^(ell-1)} n^-s
//!          + sum_{m>=0} (-1)^m s/(s+m) c*_m(s) sum_{b^(ell-1)<=n<b^ell} n^-(s+m)
//! ```
//!
//! valid for every integer `ell >= 2` with the same coefficients.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rug::Float;

use crate::bounds::{block_len, plan_auto, plan_truncation, TruncationPlan};
use crate::coefficients::{check_base, check_half_plane, CoefficientTable};
use crate::error::{Error, Result};
use crate::numerics::{int_pow_complex, log2_abs, CComplex, CReal, CompensatedSum, PrecisionContext};

/// Deliberate faults for exercising the verification suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mutation {
    #[default]
    None,
    /// Sum the series without the `(-1)^m` sign.
    DropAlternatingSign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Function {
    Eta,
    EtaB,
    Zeta,
}

impl Function {
    pub fn name(self) -> &'static str {
        match self {
            Function::Eta => "eta",
            Function::EtaB => "eta_b",
            Function::Zeta => "zeta",
        }
    }
}

pub const DEFAULT_MAX_TERMS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeriesConfig {
    pub base: u32,
    /// Block parameter; `None` picks it automatically.
    pub ell: Option<u32>,
    pub ctx: PrecisionContext,
    pub max_terms: usize,
    pub mutation: Mutation,
}

impl SeriesConfig {
    pub fn new(base: u32, ctx: PrecisionContext) -> Result<Self> {
        check_base(base)?;
        Ok(Self { base, ell: None, ctx, max_terms: DEFAULT_MAX_TERMS, mutation: Mutation::None })
    }

    pub fn with_ell(mut self, ell: u32) -> Result<Self> {
        if ell < 2 {
            return Err(Error::InvalidEll(ell));
        }
        self.ell = Some(ell);
        Ok(self)
    }

    pub fn with_max_terms(mut self, max_terms: usize) -> Self {
        self.max_terms = max_terms;
        self
    }

    pub fn with_base(mut self, base: u32) -> Result<Self> {
        check_base(base)?;
        self.base = base;
        Ok(self)
    }

    pub fn with_mutation(mut self, mutation: Mutation) -> Self {
        self.mutation = mutation;
        self
    }
}

#[derive(Debug, Clone)]
pub struct EvaluationResult {
    pub value: CComplex,
    pub head: CComplex,
    /// Index of the last series term kept.
    pub terms_used: usize,
    /// Certified bound on the truncation error of `value`.
    pub remainder_bound: CReal,
    pub base: u32,
    pub ell: u32,
    pub ratio: CReal,
    pub working_bits: u32,
    pub elapsed: Duration,
}

/// `n^-(s+m)` for the `n` of one block, advanced in place from `m` to `m+1`.
#[derive(Clone, Debug)]
pub struct BlockState {
    values: Vec<CComplex>,
    inv: Vec<CReal>,
    m: usize,
}

impl BlockState {
    pub fn new(base: u32, ell: u32, s: &CComplex, ctx: &PrecisionContext) -> Self {
        let prec = ctx.mantissa_bits();
        let lo = base.pow(ell - 1);
        let hi = lo * base;
        let neg_s = -&s.with_prec(prec);
        let values = (lo..hi).map(|n| int_pow_complex(n, &neg_s, ctx)).collect();
        let inv = (lo..hi).map(|n| Float::with_val(prec, n).recip()).collect();
        Self { values, inv, m: 0 }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn shift(&self) -> usize {
        self.m
    }

    pub fn sum(&self) -> CComplex {
        let mut acc = CompensatedSum::new(self.values[0].prec());
        for v in &self.values {
            acc.add(v);
        }
        acc.value()
    }

    /// `n^-(s+m+1) = n^-(s+m) * (1/n)`.
    pub fn step(&mut self) {
        for (v, inv) in self.values.iter_mut().zip(&self.inv) {
            v.scale_mut(inv);
        }
        self.m += 1;
    }
}

/// `(1 - b^(1-s)) sum_{0<n<b^(ell-1)} n^-s`.
pub fn head_sum(s: &CComplex, base: u32, ell: u32, ctx: &PrecisionContext) -> CComplex {
    let prec = ctx.mantissa_bits();
    let s = s.with_prec(prec);
    let neg_s = -&s;
    let mut acc = CompensatedSum::new(prec);
    for n in 1..base.pow(ell - 1) {
        acc.add(&int_pow_complex(n, &neg_s, ctx));
    }
    let one_minus_s = &CComplex::one(prec) - &s;
    let factor = &CComplex::one(prec) - &int_pow_complex(base, &one_minus_s, ctx);
    &factor * &acc.value()
}

/// The terms `(-1)^m s/(s+m) c*_m(s) B_m` for `m = 0..=last`.
fn series_terms(
    s: &CComplex,
    ell: u32,
    last: usize,
    table: &mut CoefficientTable,
    mutation: Mutation,
) -> Vec<CComplex> {
    let ctx = *table.context();
    let prec = ctx.mantissa_bits();
    let s = s.with_prec(prec);
    table.cstar_extend(last);
    let mut block = BlockState::new(table.base(), ell, &s, &ctx);
    let mut out = Vec::with_capacity(last + 1);
    for m in 0..=last {
        let weight = &s / &s.add_real(&Float::with_val(prec, m));
        let mut term = &(&weight * table.cstar(m)) * &block.sum();
        if m % 2 == 1 && mutation != Mutation::DropAlternatingSign {
            term = -term;
        }
        out.push(term);
        block.step();
    }
    out
}

/// Head sum plus series terms `0..=last`, with no truncation planning.
pub fn partial_sum(
    s: &CComplex,
    base: u32,
    ell: u32,
    last: usize,
    ctx: &PrecisionContext,
) -> Result<CComplex> {
    if ell < 2 {
        return Err(Error::InvalidEll(ell));
    }
    let mut table = CoefficientTable::new(base, s, ctx)?;
    let terms = series_terms(s, ell, last, &mut table, Mutation::None);
    Ok(assemble(&head_sum(s, base, ell, ctx), &terms))
}

/// Individual series terms, exposed for inspection.
pub fn terms(s: &CComplex, base: u32, ell: u32, last: usize, ctx: &PrecisionContext) -> Result<Vec<CComplex>> {
    if ell < 2 {
        return Err(Error::InvalidEll(ell));
    }
    let mut table = CoefficientTable::new(base, s, ctx)?;
    Ok(series_terms(s, ell, last, &mut table, Mutation::None))
}

fn assemble(head: &CComplex, terms: &[CComplex]) -> CComplex {
    let mut acc = CompensatedSum::new(head.prec());
    acc.add(head);
    for t in terms {
        acc.add(t);
    }
    acc.value()
}

/// Working precision for an evaluation: enough that rounding in the largest
/// kept term, accumulated over the terms and the block, stays `guard_bits`
/// below the tolerance. Rounded up to a multiple of 64 so nearby requests
/// share coefficient tables.
fn working_context(plan: &TruncationPlan, head_bound: f64, tol: &CReal, ctx: &PrecisionContext) -> PrecisionContext {
    let magnitude = log2_abs(&plan.max_term_bound).max(head_bound).max(0.0);
    let spread = ((plan.terms + 2) as f64).log2() + ((block_len(plan.base, plan.ell) + 1) as f64).log2();
    let needed = f64::from(ctx.guard_bits()) + magnitude + spread - log2_abs(tol) + 8.0;
    let needed = needed.ceil().max(0.0) as u32;
    let bits = needed.max(ctx.mantissa_bits()).div_ceil(64) * 64;
    ctx.with_extra_bits(bits - ctx.mantissa_bits())
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct TableKey {
    base: u32,
    bits: u32,
    re: String,
    im: String,
}

/// Evaluates the functions, caching coefficient tables per `(b, s, bits)` so
/// repeated calls (other `ell`, tighter tolerances) reuse the coefficients.
#[derive(Default)]
pub struct Evaluator {
    tables: HashMap<TableKey, CoefficientTable>,
}

impl Evaluator {
    pub fn new() -> Self {
        Self::default()
    }

    fn table(&mut self, base: u32, s: &CComplex, ctx: &PrecisionContext) -> Result<&mut CoefficientTable> {
        let s = s.with_prec(ctx.mantissa_bits());
        let key = TableKey {
            base,
            bits: ctx.mantissa_bits(),
            re: s.re.to_string_radix(16, None),
            im: s.im.to_string_radix(16, None),
        };
        if !self.tables.contains_key(&key) {
            let t = CoefficientTable::new(base, &s, ctx)?;
            self.tables.insert(key.clone(), t);
        }
        Ok(self.tables.get_mut(&key).unwrap())
    }

    pub fn plan(&self, s: &CComplex, cfg: &SeriesConfig, tol: &CReal) -> Result<TruncationPlan> {
        check_half_plane(s)?;
        match cfg.ell {
            Some(ell) => plan_truncation(s, cfg.base, ell, tol, cfg.max_terms, &cfg.ctx),
            None => plan_auto(s, cfg.base, tol, cfg.max_terms, &cfg.ctx),
        }
    }

    /// `eta_b(s)` with absolute truncation error at most `tol`.
    pub fn eta_b(&mut self, s: &CComplex, cfg: &SeriesConfig, tol: &CReal) -> Result<EvaluationResult> {
        let start = Instant::now();
        let plan = self.plan(s, cfg, tol)?;
        let head_bound = f64::from(plan.ell - 1) * f64::from(cfg.base).log2() + 1.0;
        let wctx = working_context(&plan, head_bound, tol, &cfg.ctx);
        let s_w = s.with_prec(wctx.mantissa_bits());
        let head = head_sum(&s_w, cfg.base, plan.ell, &wctx);
        let table = self.table(cfg.base, &s_w, &wctx)?;
        let terms = series_terms(&s_w, plan.ell, plan.terms, table, cfg.mutation);
        let value = assemble(&head, &terms);
        Ok(EvaluationResult {
            value,
            head,
            terms_used: plan.terms,
            remainder_bound: plan.remainder_bound,
            base: cfg.base,
            ell: plan.ell,
            ratio: plan.ratio,
            working_bits: wctx.mantissa_bits(),
            elapsed: start.elapsed(),
        })
    }

    /// `eta(s)`, the base-2 case.
    pub fn eta(&mut self, s: &CComplex, cfg: &SeriesConfig, tol: &CReal) -> Result<EvaluationResult> {
        let cfg = cfg.with_base(2)?;
        self.eta_b(s, &cfg, tol)
    }

    /// `zeta(s) = eta_b(s) / (1 - b^(1-s))`, switching to another base when
    /// the requested one puts `s` near a zero of `1 - b^(1-s)`.
    pub fn zeta(&mut self, s: &CComplex, cfg: &SeriesConfig, tol: &CReal) -> Result<EvaluationResult> {
        check_half_plane(s)?;
        if s.re == 1 && s.im.is_zero() {
            return Err(Error::PoleAtOne);
        }
        let start = Instant::now();
        let ctx = &cfg.ctx;
        let prec = ctx.mantissa_bits();
        let threshold = Float::with_val(prec, 1) >> (prec / 4);
        for base in zeta_bases(cfg.base) {
            let one_minus_s = &CComplex::one(prec) - &s.with_prec(prec);
            let factor = &CComplex::one(prec) - &int_pow_complex(base, &one_minus_s, ctx);
            let factor_abs = factor.abs();
            if factor_abs < threshold {
                continue;
            }
            let eta_tol = Float::with_val(prec, tol * &factor_abs) / 2u32;
            let cfg_b = cfg.with_base(base)?;
            let mut res = self.eta_b(s, &cfg_b, &eta_tol)?;
            let factor = factor.with_prec(res.working_bits);
            res.value = &res.value / &factor;
            res.remainder_bound = Float::with_val(prec, &res.remainder_bound / &factor_abs);
            res.elapsed = start.elapsed();
            return Ok(res);
        }
        Err(Error::BaseExhausted)
    }

    pub fn evaluate(&mut self, f: Function, s: &CComplex, cfg: &SeriesConfig, tol: &CReal) -> Result<EvaluationResult> {
        match f {
            Function::Eta => self.eta(s, cfg, tol),
            Function::EtaB => self.eta_b(s, cfg, tol),
            Function::Zeta => self.zeta(s, cfg, tol),
        }
    }
}

/// Requested base first, then the first ten primes.
fn zeta_bases(requested: u32) -> impl Iterator<Item = u32> {
    const PRIMES: [u32; 10] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29];
    std::iter::once(requested).chain(PRIMES.into_iter().filter(move |&p| p != requested))
}

pub fn eta_b(s: &CComplex, cfg: &SeriesConfig, tol: &CReal) -> Result<EvaluationResult> {
    Evaluator::new().eta_b(s, cfg, tol)
}

pub fn eta(s: &CComplex, cfg: &SeriesConfig, tol: &CReal) -> Result<EvaluationResult> {
    Evaluator::new().eta(s, cfg, tol)
}

pub fn zeta(s: &CComplex, cfg: &SeriesConfig, tol: &CReal) -> Result<EvaluationResult> {
    Evaluator::new().zeta(s, cfg, tol)
}
