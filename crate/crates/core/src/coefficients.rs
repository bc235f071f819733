//! Coefficient sequences of the block expansion.
//!
//! For a base `b` and a point `s` with `Re s > 0`, `c*_m(s)` is defined by
//! `c*_0 = 1` and, for `m >= 1`,
//!
//! ```text
//! c*_m = (b^(s+m) - b)^-1 * sum_{j=1..m} [(s+m)(s+m-1)...(s+m-j+1) / j!] * g_j * c*_(m-j)
//! ```
//!
//! with `g_j = 1^j + 2^j + ... + (b-1)^j`. The rescaled sequence
//! `c_m = m! / (s+1)_m * c*_m` satisfies the binomial recurrence
//! `c_m = (b^(s+m) - b)^-1 * sum_{j=1..m} C(m, j) g_j c_(m-j)` and is periodic
//! in `s` with period `2 pi i / ln b`.

use rug::{Float, Integer};

use crate::error::{Error, Result};
use crate::numerics::{int_pow_complex, CComplex, CReal, PrecisionContext};

pub(crate) fn check_base(base: u32) -> Result<()> {
    if base < 2 {
        return Err(Error::InvalidBase(base));
    }
    Ok(())
}

pub(crate) fn check_half_plane(s: &CComplex) -> Result<()> {
    if s.re.is_sign_negative() || s.re.is_zero() || s.re.is_nan() {
        return Err(Error::NonPositiveRealPart);
    }
    Ok(())
}

/// Integer power sums `g_j = sum_{0<a<b} a^j`, `j = 1..=len`.
#[derive(Clone, Debug)]
pub struct GammaTable {
    base: u32,
    prec: u32,
    values: Vec<CReal>,
}

impl GammaTable {
    pub fn new(base: u32, upto: usize, ctx: &PrecisionContext) -> Result<Self> {
        check_base(base)?;
        if upto < 1 {
            return Err(Error::InvalidArgument("gamma table needs at least one entry".into()));
        }
        let mut table = Self { base, prec: ctx.mantissa_bits(), values: Vec::new() };
        table.extend(upto);
        Ok(table)
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    /// Highest index `j` available.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn extend(&mut self, upto: usize) {
        for j in self.values.len() + 1..=upto {
            let j = u32::try_from(j).expect("power index fits in u32");
            let mut sum = Integer::new();
            for a in 1..self.base {
                sum += Integer::from(Integer::u_pow_u(a, j));
            }
            self.values.push(Float::with_val(self.prec, &sum));
        }
    }

    /// `g_j`, for `1 <= j <= len()`.
    pub fn get(&self, j: usize) -> &CReal {
        assert!(j >= 1, "power sums start at j = 1");
        &self.values[j - 1]
    }
}

/// Lazily extended table of `c*_m(s)` and, on request, `c_m(s)` for one
/// `(b, s, precision)`.
#[derive(Clone, Debug)]
pub struct CoefficientTable {
    base: u32,
    s: CComplex,
    ctx: PrecisionContext,
    gammas: GammaTable,
    base_pow_s: CComplex,
    cstar: Vec<CComplex>,
    c: Option<Vec<CComplex>>,
}

impl CoefficientTable {
    /// Fresh table holding `c*_0 = 1`. `s` is rounded to the context precision.
    pub fn new(base: u32, s: &CComplex, ctx: &PrecisionContext) -> Result<Self> {
        check_base(base)?;
        check_half_plane(s)?;
        let prec = ctx.mantissa_bits();
        let s = s.with_prec(prec);
        let base_pow_s = int_pow_complex(base, &s, ctx);
        Ok(Self {
            base,
            s,
            ctx: *ctx,
            gammas: GammaTable::new(base, 1, ctx)?,
            base_pow_s,
            cstar: vec![CComplex::one(prec)],
            c: None,
        })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn s(&self) -> &CComplex {
        &self.s
    }

    pub fn context(&self) -> &PrecisionContext {
        &self.ctx
    }

    /// Highest index of `c*` computed so far.
    pub fn highest_index(&self) -> usize {
        self.cstar.len() - 1
    }

    pub fn cstar(&self, m: usize) -> &CComplex {
        &self.cstar[m]
    }

    pub fn cstar_values(&self) -> &[CComplex] {
        &self.cstar
    }

    pub fn c_values(&self) -> Option<&[CComplex]> {
        self.c.as_deref()
    }

    /// `b^(s+m) - b`. Never zero when `Re s > 0` and `m >= 1`.
    fn denominator(&self, m: usize) -> CComplex {
        let prec = self.ctx.mantissa_bits();
        let bm = Float::with_val(prec, Float::u_pow_u(self.base, m as u32));
        let mut d = self.base_pow_s.mul_real(&bm);
        d.re -= self.base;
        d
    }

    /// Extend `c*` through index `upto` with the falling-factorial recurrence.
    pub fn cstar_extend(&mut self, upto: usize) -> &mut Self {
        if upto <= self.highest_index() {
            return self;
        }
        self.gammas.extend(upto);
        let prec = self.ctx.mantissa_bits();
        for m in self.cstar.len()..=upto {
            // s + m - j + 1 for j = 1 is s + m
            let mut shifted = self.s.add_real(&Float::with_val(prec, m));
            let mut weight = CComplex::one(prec);
            let mut acc = CComplex::zero(prec);
            for j in 1..=m {
                weight = &weight * &shifted;
                weight.re /= j as u32;
                weight.im /= j as u32;
                shifted.re -= 1u32;
                let term = (&weight * &self.cstar[m - j]).mul_real(self.gammas.get(j));
                acc += &term;
            }
            let next = &acc / &self.denominator(m);
            self.cstar.push(next);
        }
        self
    }

    /// Extend the rescaled sequence `c` through index `upto` with the
    /// binomial recurrence (exact integer binomials).
    pub fn c_extend(&mut self, upto: usize) -> &mut Self {
        let prec = self.ctx.mantissa_bits();
        self.gammas.extend(upto.max(1));
        let mut c = self.c.take().unwrap_or_else(|| vec![CComplex::one(prec)]);
        for m in c.len()..=upto {
            let mut acc = CComplex::zero(prec);
            for j in 1..=m {
                let binom = Integer::from(Integer::binomial_u(m as u32, j as u32));
                let w = Float::with_val(prec, &binom * self.gammas.get(j));
                acc += &c[m - j].mul_real(&w);
            }
            let next = &acc / &self.denominator(m);
            c.push(next);
        }
        self.c = Some(c);
        self
    }
}

/// Convenience: `c*_0..=c*_upto` for one `(b, s)`.
pub fn cstar_sequence(
    base: u32,
    s: &CComplex,
    upto: usize,
    ctx: &PrecisionContext,
) -> Result<Vec<CComplex>> {
    let mut t = CoefficientTable::new(base, s, ctx)?;
    t.cstar_extend(upto);
    Ok(t.cstar)
}

/// `(s+1)_m / m!` computed by an incremental product.
pub fn pochhammer_over_factorial(s: &CComplex, m: usize, ctx: &PrecisionContext) -> CComplex {
    let prec = ctx.mantissa_bits();
    let s = s.with_prec(prec);
    let mut acc = CComplex::one(prec);
    for j in 1..=m {
        let f = s.add_real(&Float::with_val(prec, j));
        acc = &acc * &f;
        acc.re /= j as u32;
        acc.im /= j as u32;
    }
    acc
}

/// `|(s+1)_m| / (sigma+1)_m` with `sigma = Re s`, kept for every index up to
/// the current one. Non-decreasing in `m` since each factor
/// `|s+j| / (sigma+j)` is at least one.
#[derive(Clone, Debug)]
pub struct PochhammerRatio {
    s: CComplex,
    values: Vec<CReal>,
}

impl PochhammerRatio {
    pub fn new(s: &CComplex, ctx: &PrecisionContext) -> Result<Self> {
        check_half_plane(s)?;
        let prec = ctx.mantissa_bits();
        Ok(Self { s: s.with_prec(prec), values: vec![Float::with_val(prec, 1)] })
    }

    pub fn sigma(&self) -> &CReal {
        &self.s.re
    }

    pub fn index(&self) -> usize {
        self.values.len() - 1
    }

    /// `|s+j| / (sigma+j)`.
    pub fn factor(&self, j: usize) -> CReal {
        let prec = self.s.prec();
        if self.s.im.is_zero() {
            return Float::with_val(prec, 1);
        }
        let shifted = Float::with_val(prec, &self.s.re + j as u32);
        Float::with_val(prec, shifted.hypot_ref(&self.s.im)) / &shifted
    }

    pub fn extend(&mut self, upto: usize) -> &mut Self {
        for j in self.values.len()..=upto {
            let next = Float::with_val(self.s.prec(), self.values.last().unwrap() * self.factor(j));
            self.values.push(next);
        }
        self
    }

    pub fn value(&self) -> &CReal {
        self.values.last().unwrap()
    }

    pub fn value_at(&self, m: usize) -> &CReal {
        &self.values[m]
    }
}
