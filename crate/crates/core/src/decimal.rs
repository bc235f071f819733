//! Fixed-point decimal printing and complex literal parsing.

use rug::{Float, Integer};

use crate::error::{Error, Result};
use crate::numerics::{digits_to_bits, CComplex, CReal};

/// `x` rounded to nearest at `digits` fractional digits, e.g. `-0.500`.
pub fn format_fixed(x: &CReal, digits: u32) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    // Wide enough that x * 10^digits is exact before the final rounding.
    let prec = x.prec() + digits_to_bits(digits) + 8;
    let scaled = Float::with_val(prec, x * Integer::from(Integer::u_pow_u(10, digits)));
    let n = scaled.to_integer().expect("finite");
    let negative = n < 0;
    let mut body = n.abs().to_string();
    let d = digits as usize;
    if body.len() <= d {
        body = format!("{}{body}", "0".repeat(d + 1 - body.len()));
    }
    let (int, frac) = body.split_at(body.len() - d);
    let sign = if negative { "-" } else { "" };
    if d == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

/// `x` in scientific notation with `sig` significant digits, rounded up in
/// magnitude. Used for error bounds, where rounding down would overstate
/// accuracy.
pub fn format_bound(x: &CReal, sig: usize) -> String {
    if x.is_zero() {
        return "0".into();
    }
    let rounded = Float::with_val(x.prec(), x);
    let (neg, digits, exp) = rounded.to_sign_string_exp_round(10, Some(sig), rug::float::Round::Up);
    let exp = exp.unwrap_or(0) - 1;
    let sign = if neg { "-" } else { "" };
    let (lead, rest) = digits.split_at(1);
    if rest.is_empty() {
        format!("{sign}{lead}e{exp}")
    } else {
        format!("{sign}{lead}.{rest}e{exp}")
    }
}

fn parse_real(text: &str, prec: u32, input: &str) -> Result<CReal> {
    let t = text.trim();
    let ok = !t.is_empty()
        && t.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-'))
        && t.chars().any(|c| c.is_ascii_digit());
    if !ok {
        return Err(Error::Parse { input: input.into(), reason: format!("not a decimal literal: {t:?}") });
    }
    Float::parse(t)
        .map(|p| Float::with_val(prec, p))
        .map_err(|e| Error::Parse { input: input.into(), reason: e.to_string() })
}

/// Parses `RE`, `RE+IMi`, `RE-IMi` or `IMi` with decimal literals.
pub fn parse_complex(input: &str, prec: u32) -> Result<CComplex> {
    let text: String = input.chars().filter(|c| !c.is_whitespace()).collect();
    if text.is_empty() {
        return Err(Error::Parse { input: input.into(), reason: "empty".into() });
    }
    let Some(body) = text.strip_suffix('i') else {
        return Ok(CComplex::new(parse_real(&text, prec, input)?, Float::new(prec)));
    };
    // The split point is the last sign that does not belong to an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (parse_real(&body[..k], prec, input)?, &body[k..]),
        None => (Float::new(prec), body),
    };
    let im = match im {
        "" | "+" => Float::with_val(prec, 1),
        "-" => Float::with_val(prec, -1),
        other => parse_real(other, prec, input)?,
    };
    Ok(CComplex::new(re, im))
}

/// Inverse of [`format_fixed`] up to the printed digits.
pub fn parse_real_literal(input: &str, prec: u32) -> Result<CReal> {
    parse_real(input, prec, input)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_rounds_to_nearest() {
        let f = |v: f64, d| format_fixed(&Float::with_val(64, v), d);
        assert_eq!(f(0.125, 2), "0.12");
        assert_eq!(f(0.375, 2), "0.38");
        assert_eq!(f(-1.5, 3), "-1.500");
        assert_eq!(f(2.0, 0), "2");
        assert_eq!(f(0.0004, 3), "0.000");
        assert_eq!(f(0.0006, 3), "0.001");
        assert_eq!(f(123.456, 1), "123.5");
    }

    #[test]
    fn log2_to_thirty_digits() {
        let l = Float::with_val(200, Float::ln_u(2));
        assert_eq!(format_fixed(&l, 30), "0.693147180559945309417232121458");
    }

    #[test]
    fn bounds_round_up() {
        assert_eq!(format_bound(&Float::with_val(64, 1.234e-20), 3), "1.24e-20");
        assert_eq!(format_bound(&Float::with_val(64, 0.0), 3), "0");
    }

    #[test]
    fn complex_forms() {
        let p = |s: &str| parse_complex(s, 64).map(|z| (z.re.to_f64(), z.im.to_f64()));
        assert_eq!(p("2").unwrap(), (2.0, 0.0));
        assert_eq!(p("0.5+14.134725i").unwrap(), (0.5, 14.134725));
        assert_eq!(p("0.5-3i").unwrap(), (0.5, -3.0));
        assert_eq!(p("1e-2+2E+1i").unwrap(), (0.01, 20.0));
        assert_eq!(p("-1.5-1e-3i").unwrap(), (-1.5, -0.001));
        assert_eq!(p("3i").unwrap(), (0.0, 3.0));
        assert_eq!(p(" 1 + 2i ").unwrap(), (1.0, 2.0));
        for bad in ["", "abc", "1+", "1+2j", "1+2i+3i", "pi", "1..2"] {
            assert!(matches!(parse_complex(bad, 64), Err(Error::Parse { .. })), "{bad}");
        }
    }
}
