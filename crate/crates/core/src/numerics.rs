//! Precision-parameterized real and complex arithmetic.
//!
//! Reals are MPFR floats ([`rug::Float`]) rounded to nearest at the
//! mantissa width of a [`PrecisionContext`]. [`CComplex`] is a plain
//! rectangular pair built on top of them; every operation rounds each
//! component independently, so conjugating the inputs conjugates the output
//! bit for bit.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::float::Round;
use rug::ops::Pow;
use rug::{Assign, Float};

use crate::error::{Error, Result};

/// Real number at a fixed binary precision, rounded to nearest.
pub type CReal = Float;

/// Default number of working bits kept beyond the requested decimal digits.
pub const DEFAULT_GUARD_BITS: u32 = 32;

/// Working precision shared by every computation of one evaluation.
///
/// The mantissa width is always `ceil(target_digits * log2 10) + guard_bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrecisionContext {
    mantissa_bits: u32,
    target_digits: u32,
    guard_bits: u32,
}

impl PrecisionContext {
    pub fn new(target_digits: u32) -> Result<Self> {
        Self::with_guard_bits(target_digits, DEFAULT_GUARD_BITS)
    }

    pub fn with_guard_bits(target_digits: u32, guard_bits: u32) -> Result<Self> {
        if target_digits == 0 {
            return Err(Error::InvalidArgument("target digits must be at least 1".into()));
        }
        if guard_bits < DEFAULT_GUARD_BITS {
            return Err(Error::InvalidArgument(format!(
                "guard bits must be at least {DEFAULT_GUARD_BITS} (got {guard_bits})"
            )));
        }
        Ok(Self {
            mantissa_bits: digits_to_bits(target_digits) + guard_bits,
            target_digits,
            guard_bits,
        })
    }

    pub fn mantissa_bits(&self) -> u32 {
        self.mantissa_bits
    }

    pub fn target_digits(&self) -> u32 {
        self.target_digits
    }

    pub fn guard_bits(&self) -> u32 {
        self.guard_bits
    }

    /// Same target, twice the mantissa width. Used for verification runs.
    pub fn doubled(&self) -> Self {
        self.with_extra_bits(self.mantissa_bits)
    }

    /// Same target with `extra` additional guard bits.
    pub fn with_extra_bits(&self, extra: u32) -> Self {
        Self {
            mantissa_bits: self.mantissa_bits + extra,
            target_digits: self.target_digits,
            guard_bits: self.guard_bits + extra,
        }
    }

    /// A float at this context's precision.
    pub fn real<T>(&self, value: T) -> CReal
    where
        Float: Assign<T>,
    {
        Float::with_val(self.mantissa_bits, value)
    }

    pub fn complex<R, I>(&self, re: R, im: I) -> CComplex
    where
        Float: Assign<R> + Assign<I>,
    {
        CComplex::new(self.real(re), self.real(im))
    }

    /// `10^-target_digits`, the absolute fixed-point tolerance for this target.
    pub fn tolerance(&self) -> CReal {
        self.real(Float::u_pow_u(10, self.target_digits)).recip()
    }

    /// `2^-mantissa_bits`: one unit in the last place relative to 1.
    pub fn unit_roundoff(&self) -> CReal {
        self.real(1) >> self.mantissa_bits
    }
}

/// Bits needed to hold `digits` decimal digits.
pub fn digits_to_bits(digits: u32) -> u32 {
    (f64::from(digits) * std::f64::consts::LOG2_10).ceil() as u32
}

/// Complex number with independently rounded real and imaginary parts.
#[derive(Clone, PartialEq)]
pub struct CComplex {
    pub re: CReal,
    pub im: CReal,
}

impl fmt::Debug for CComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {:+}i)", self.re.to_f64(), self.im.to_f64())
    }
}

impl CComplex {
    pub fn new(re: CReal, im: CReal) -> Self {
        let prec = re.prec().max(im.prec());
        let mut out = Self { re, im };
        out.re.set_prec(prec);
        out.im.set_prec(prec);
        out
    }

    pub fn from_real(re: CReal) -> Self {
        let im = Float::new(re.prec());
        Self { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        Self { re: Float::new(prec), im: Float::new(prec) }
    }

    pub fn one(prec: u32) -> Self {
        Self { re: Float::with_val(prec, 1), im: Float::new(prec) }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    /// Copy rounded (to nearest) to `prec` bits.
    pub fn with_prec(&self, prec: u32) -> Self {
        Self { re: Float::with_val(prec, &self.re), im: Float::with_val(prec, &self.im) }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: Float::with_val(self.im.prec(), -&self.im) }
    }

    pub fn norm_sqr(&self) -> CReal {
        Float::with_val(self.prec(), &self.re * &self.re + &self.im * &self.im)
    }

    pub fn abs(&self) -> CReal {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    pub fn mul_real(&self, x: &CReal) -> Self {
        let p = self.prec().max(x.prec());
        Self { re: Float::with_val(p, &self.re * x), im: Float::with_val(p, &self.im * x) }
    }

    /// In-place multiplication by a real, keeping the current precision.
    pub fn scale_mut(&mut self, x: &CReal) {
        self.re *= x;
        self.im *= x;
    }

    pub fn add_real(&self, x: &CReal) -> Self {
        let p = self.prec().max(x.prec());
        Self { re: Float::with_val(p, &self.re + x), im: Float::with_val(p, &self.im) }
    }

    pub fn recip(&self) -> Self {
        let p = self.prec();
        let n = self.norm_sqr();
        Self {
            re: Float::with_val(p, &self.re / &n),
            im: Float::with_val(p, -Float::with_val(p, &self.im / &n)),
        }
    }

    /// `exp(self)`, rounded to the precision of `self`.
    pub fn exp(&self) -> Self {
        let p = self.prec();
        let mag = Float::with_val(p, self.re.exp_ref());
        let (sin, cos) = Float::with_val(p, &self.im).sin_cos(Float::new(p));
        Self { re: Float::with_val(p, &mag * &cos), im: Float::with_val(p, &mag * &sin) }
    }
}

impl<'a> Add<&'a CComplex> for &'a CComplex {
    type Output = CComplex;
    fn add(self, rhs: &'a CComplex) -> CComplex {
        let p = self.prec().max(rhs.prec());
        CComplex { re: Float::with_val(p, &self.re + &rhs.re), im: Float::with_val(p, &self.im + &rhs.im) }
    }
}

impl<'a> Sub<&'a CComplex> for &'a CComplex {
    type Output = CComplex;
    fn sub(self, rhs: &'a CComplex) -> CComplex {
        let p = self.prec().max(rhs.prec());
        CComplex { re: Float::with_val(p, &self.re - &rhs.re), im: Float::with_val(p, &self.im - &rhs.im) }
    }
}

impl<'a> Mul<&'a CComplex> for &'a CComplex {
    type Output = CComplex;
    fn mul(self, rhs: &'a CComplex) -> CComplex {
        let p = self.prec().max(rhs.prec());
        CComplex {
            re: Float::with_val(p, &self.re * &rhs.re - &self.im * &rhs.im),
            im: Float::with_val(p, &self.re * &rhs.im + &self.im * &rhs.re),
        }
    }
}

impl<'a> Div<&'a CComplex> for &'a CComplex {
    type Output = CComplex;
    fn div(self, rhs: &'a CComplex) -> CComplex {
        let p = self.prec().max(rhs.prec());
        let n = Float::with_val(p, &rhs.re * &rhs.re + &rhs.im * &rhs.im);
        let re = Float::with_val(p, &self.re * &rhs.re + &self.im * &rhs.im);
        let im = Float::with_val(p, &self.im * &rhs.re - &self.re * &rhs.im);
        CComplex { re: re / &n, im: im / &n }
    }
}

impl Neg for &CComplex {
    type Output = CComplex;
    fn neg(self) -> CComplex {
        CComplex { re: Float::with_val(self.re.prec(), -&self.re), im: Float::with_val(self.im.prec(), -&self.im) }
    }
}

impl Neg for CComplex {
    type Output = CComplex;
    fn neg(self) -> CComplex {
        CComplex { re: -self.re, im: -self.im }
    }
}

impl AddAssign<&CComplex> for CComplex {
    fn add_assign(&mut self, rhs: &CComplex) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&CComplex> for CComplex {
    fn sub_assign(&mut self, rhs: &CComplex) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl MulAssign<&CComplex> for CComplex {
    fn mul_assign(&mut self, rhs: &CComplex) {
        *self = &*self * rhs;
    }
}

/// Running complex sum with Neumaier compensation on each component.
#[derive(Clone, Debug)]
pub struct CompensatedSum {
    re: KahanReal,
    im: KahanReal,
}

#[derive(Clone, Debug)]
struct KahanReal {
    sum: Float,
    comp: Float,
}

impl KahanReal {
    fn new(prec: u32) -> Self {
        Self { sum: Float::new(prec), comp: Float::new(prec) }
    }

    fn add(&mut self, x: &Float) {
        let prec = self.sum.prec();
        let t = Float::with_val(prec, &self.sum + x);
        if self.sum.cmp_abs(x).map_or(true, |o| o.is_ge()) {
            // (sum - t) + x
            self.comp += Float::with_val(prec, &self.sum - &t) + x;
        } else {
            self.comp += Float::with_val(prec, x - &t) + &self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> Float {
        Float::with_val(self.sum.prec(), &self.sum + &self.comp)
    }
}

impl CompensatedSum {
    pub fn new(prec: u32) -> Self {
        Self { re: KahanReal::new(prec), im: KahanReal::new(prec) }
    }

    pub fn add(&mut self, z: &CComplex) {
        self.re.add(&z.re);
        self.im.add(&z.im);
    }

    pub fn value(&self) -> CComplex {
        CComplex { re: self.re.value(), im: self.im.value() }
    }
}

/// Extra bits carried internally by the transcendental kernels so the
/// final rounding dominates their error.
const KERNEL_GUARD_BITS: u32 = 64;

/// `n^e = exp(e ln n)` rounded to `ctx`; exactly 1 when `n == 1`.
pub fn int_pow_complex(n: u32, e: &CComplex, ctx: &PrecisionContext) -> CComplex {
    let prec = ctx.mantissa_bits();
    assert!(n >= 1, "int_pow_complex needs n >= 1");
    if n == 1 {
        return CComplex::one(prec);
    }
    // The angle im(e) ln n loses log2|angle| bits to argument reduction.
    let angle_bits = e.im.get_exp().map_or(0, |x| x.max(0) as u32) + 8;
    let wp = prec + KERNEL_GUARD_BITS + angle_bits;
    let ln_n = Float::with_val(wp, Float::ln_u(n));
    let mag = Float::with_val(wp, Float::with_val(wp, &e.re * &ln_n).exp_ref());
    let angle = Float::with_val(wp, &e.im * &ln_n);
    let (sin, cos) = angle.sin_cos(Float::new(wp));
    CComplex { re: Float::with_val(prec, &mag * &cos), im: Float::with_val(prec, &mag * &sin) }
}

/// `a^x` for `a > 0`, correctly rounded to `ctx`.
pub fn real_pow(a: &CReal, x: &CReal, ctx: &PrecisionContext) -> CReal {
    assert!(a.is_sign_positive() && !a.is_zero(), "real_pow needs a > 0");
    let prec = ctx.mantissa_bits();
    Float::with_val(prec, a.pow(x))
}

/// Round `x` toward +infinity at `prec` bits.
pub(crate) fn round_up(x: &CReal, prec: u32) -> CReal {
    Float::with_val_round(prec, x, Round::Up).0
}

/// Base-2 logarithm of `|x|` as an `f64`; `-inf` for zero.
pub fn log2_abs(x: &CReal) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let (m, e) = x.to_f64_exp();
    m.abs().log2() + f64::from(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(30).unwrap()
    }

    #[test]
    fn context_bits_cover_digits_and_guard() {
        let c = ctx();
        assert_eq!(c.mantissa_bits(), 100 + 32);
        assert!(c.mantissa_bits() >= digits_to_bits(c.target_digits()) + c.guard_bits());
        let d = c.doubled();
        assert_eq!(d.mantissa_bits(), 2 * c.mantissa_bits());
        assert_eq!(d.target_digits(), 30);
        assert!(PrecisionContext::new(0).is_err());
        assert!(PrecisionContext::with_guard_bits(10, 8).is_err());
    }

    #[test]
    fn int_pow_identity_and_small_cases() {
        let c = ctx();
        let e = c.complex(3.25, -7.5);
        let one = int_pow_complex(1, &e, &c);
        assert_eq!(one.re, 1);
        assert!(one.im.is_zero());

        let half = int_pow_complex(2, &c.complex(-1, 0), &c);
        assert_eq!(half.re, 0.5);
        assert!(half.im.is_zero());

        let half = int_pow_complex(4, &c.complex(-0.5, 0), &c);
        assert_eq!(half.re, 0.5);
    }

    #[test]
    fn real_pow_values() {
        let c = ctx();
        assert_eq!(real_pow(&c.real(1), &c.real(17.5), &c), 1);
        assert_eq!(real_pow(&c.real(2), &c.real(3), &c), 8);
        let sqrt2 = real_pow(&c.real(2), &c.real(0.5), &c);
        let expected = c.real(2).sqrt();
        assert_eq!(sqrt2, expected);
    }

    #[test]
    fn complex_field_operations() {
        let c = ctx();
        let a = c.complex(1.5, -2);
        let b = c.complex(-0.25, 4);
        let q = &(&a * &b) / &b;
        assert!((&q - &a).abs() < c.unit_roundoff() * 8u32);
        let r = &b.recip() * &b;
        assert!((&r - &CComplex::one(c.mantissa_bits())).abs() < c.unit_roundoff() * 8u32);
        assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
        assert_eq!((&a / &b).conj(), &a.conj() / &b.conj());
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let prec = 64;
        let mut s = CompensatedSum::new(prec);
        let big = CComplex::from_real(Float::with_val(prec, 1));
        let tiny = CComplex::from_real(Float::with_val(prec, 1) >> 70u32);
        s.add(&big);
        for _ in 0..1024 {
            s.add(&tiny);
        }
        let expected = Float::with_val(prec, 1) + (Float::with_val(prec, 1) >> 60u32);
        assert_eq!(s.value().re, expected);
    }

    #[test]
    fn exp_matches_int_pow() {
        let c = ctx();
        let e = c.complex(-0.75, 12.5);
        let ln3 = c.real(Float::ln_u(3));
        let direct = e.mul_real(&ln3).exp();
        let viapow = int_pow_complex(3, &e, &c);
        assert!((&direct - &viapow).abs() < c.unit_roundoff() * 64u32);
    }
}
