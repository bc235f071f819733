//! End-to-end acceptance run: one PASS/FAIL line per criterion.

use std::time::{Duration, Instant};

use etaseries::bounds::product_bound_profile;
use etaseries::oracle::{eta_reference, zeta_reference};
use etaseries::rug::ops::Pow;
use etaseries::rug::Float;
use etaseries::scaling::scaling_report;
use etaseries::series::{Evaluator, SeriesConfig};
use etaseries::verify::{self, CheckOutcome, Sample};
use etaseries::{CComplex, CReal, PrecisionContext};

const DIGITS: u32 = 30;
const SEED: u64 = 0x5eed;

struct Line {
    id: u32,
    passed: bool,
    soft: bool,
    detail: String,
}

fn ten_pow(prec: u32, e: i32) -> CReal {
    Float::with_val(prec, 10).pow(e)
}

fn from_check(id: u32, outs: &[CheckOutcome]) -> Line {
    Line {
        id,
        passed: outs.iter().all(|o| o.passed),
        soft: false,
        detail: outs.iter().map(|o| format!("{}: {}", o.name, o.detail)).collect::<Vec<_>>().join(" | "),
    }
}

fn dist(a: &CComplex, b: &CComplex) -> CReal {
    let p = a.prec().max(b.prec());
    (&a.with_prec(p) - &b.with_prec(p)).abs()
}

fn criterion_1() -> Line {
    let ctx = PrecisionContext::new(50).unwrap();
    let cfg = SeriesConfig::new(2, ctx).unwrap();
    let start = Instant::now();
    let r = Evaluator::new().eta(&ctx.complex(1, 0), &cfg, &ctx.tolerance()).unwrap();
    let elapsed = start.elapsed();
    let log2 = Float::with_val(400, Float::ln_u(2));
    let err = dist(&r.value, &CComplex::from_real(log2));
    let passed = err <= ten_pow(64, -50) && elapsed < Duration::from_secs(5);
    Line {
        id: 1,
        passed,
        soft: false,
        detail: format!("|err| {:.3e}, M {}, ell {}, {:?}", err.to_f64(), r.terms_used, r.ell, elapsed),
    }
}

fn criterion_2() -> Line {
    let ctx = PrecisionContext::new(40).unwrap();
    let cfg = SeriesConfig::new(2, ctx).unwrap();
    let tol = ctx.tolerance();
    let slack = ten_pow(256, -45);
    let mut ev = Evaluator::new();
    let mut passed = true;
    let mut parts = Vec::new();

    let pi = Float::with_val(400, etaseries::rug::float::Constant::Pi);
    let pi2_6 = CComplex::from_real(Float::with_val(400, &pi * &pi) / 6u32);
    // Known to 17 significant digits.
    let zeta_half = Float::with_val(400, Float::parse("-1.4603545088095868").unwrap());

    for (label, s) in [("zeta(2)", ctx.complex(2, 0)), ("zeta(1/2)", ctx.complex(0.5, 0))] {
        let r = ev.zeta(&s, &cfg, &tol).unwrap();
        let reference = zeta_reference(&s, 60).unwrap();
        let err = dist(&r.value, &reference);
        let allow = Float::with_val(256, &r.remainder_bound + &slack);
        passed &= err <= allow;
        parts.push(format!("{label}: |err| {:.3e} allow {:.3e}", err.to_f64(), allow.to_f64()));
    }
    // The reference path itself against the closed forms.
    let e2 = dist(&zeta_reference(&ctx.complex(2, 0), 60).unwrap(), &pi2_6);
    let eh = dist(&zeta_reference(&ctx.complex(0.5, 0), 60).unwrap(), &CComplex::from_real(zeta_half));
    passed &= e2 <= ten_pow(64, -55) && eh <= ten_pow(64, -16);
    parts.push(format!("oracle vs pi^2/6 {:.1e}, vs -1.4603545088095868 {:.1e}", e2.to_f64(), eh.to_f64()));
    Line { id: 2, passed, soft: false, detail: parts.join("; ") }
}

fn criterion_3() -> Line {
    let ctx = PrecisionContext::new(25).unwrap();
    let s = CComplex::new(ctx.real(0.5), ctx.real(14.134725));
    let tol = ten_pow(ctx.mantissa_bits(), -25);
    let slack = ten_pow(ctx.mantissa_bits(), -28);
    from_check(3, &[verify::check_ell_invariance(&s, 2, &[2, 3, 5, 8], &tol, &slack, &ctx)])
}

fn samples(ctx: &PrecisionContext) -> Vec<Sample> {
    verify::random_samples(50, SEED, (0.2, 3.0), 50.0, &[2, 3, 5], 2..=8, ctx.mantissa_bits())
}

fn criterion_4() -> Line {
    let ctx = PrecisionContext::new(DIGITS).unwrap();
    from_check(4, &[verify::check_base_invariance(&samples(&ctx), &ctx.tolerance(), &ctx)])
}

fn criterion_5() -> Line {
    let ctx = PrecisionContext::new(DIGITS).unwrap();
    from_check(5, &[verify::check_truncation_certificate(&samples(&ctx), &ctx.tolerance(), &ctx)])
}

fn criterion_6() -> Line {
    let ctx = PrecisionContext::new(DIGITS).unwrap();
    let tol = ten_pow(ctx.mantissa_bits(), -(DIGITS as i32 - 2));
    from_check(6, &[verify::check_unit_identities(&[2, 3, 5], 200, &tol, &ctx)])
}

fn criterion_7() -> Line {
    let ctx = PrecisionContext::new(DIGITS).unwrap();
    let oracle = verify::check_oracle_agreement(&ctx.complex(2, 0), 2, 40, &ctx);

    // (2^sigma - 2^-m)/(2^sigma - 1), evaluated here at 4x precision.
    let wide = ctx.mantissa_bits() * 4;
    let mut worst = Float::new(64);
    for sigma in [0.3, 1.0, 2.5] {
        let sig = ctx.real(sigma);
        let two_s = Float::with_val(wide, 2).pow(&sig);
        for (m, p) in product_bound_profile(2, &sig, 100, &ctx).iter().enumerate() {
            let closed = Float::with_val(wide, &two_s - (Float::with_val(wide, 1) >> m as u32))
                / Float::with_val(wide, &two_s - 1u32);
            let d = Float::with_val(wide, p - &closed).abs();
            if d > worst {
                worst = Float::with_val(64, &d);
            }
        }
    }
    let closed_ok = worst <= ten_pow(64, -30);
    let mut line = from_check(7, &[oracle]);
    line.passed &= closed_ok;
    line.detail.push_str(&format!(" | b=2 product vs closed form, m<=100: max |diff| {:.3e}", worst.to_f64()));
    line
}

fn criterion_8() -> Line {
    let ctx = PrecisionContext::new(DIGITS).unwrap();
    from_check(8, &[verify::check_bound_sandwich(&[0.3, 1.0, 2.5], &[2, 3, 5], 200, &ctx)])
}

fn criterion_9() -> Line {
    let ctx = PrecisionContext::new(DIGITS).unwrap();
    let tol = ten_pow(ctx.mantissa_bits(), -(DIGITS as i32 - 4));
    from_check(9, &[verify::check_equality_case(0.7, &[1, 2], 50, &tol, &ctx)])
}

fn criterion_10() -> Line {
    let ctx = PrecisionContext::new(DIGITS).unwrap();
    let tol = ten_pow(ctx.mantissa_bits(), -(DIGITS as i32 - 4));
    let outs: Vec<_> = [ctx.complex(0.7, 3.0), ctx.complex(2.0, -11.5), ctx.complex(0.25, 0)]
        .iter()
        .map(|s| verify::check_periodicity(s, &[2, 3], 50, &tol, &ctx))
        .collect();
    from_check(10, &outs)
}

fn criterion_11() -> Line {
    let ctx = PrecisionContext::new(DIGITS).unwrap();
    from_check(11, &[verify::check_w_identities(&[0.3, 1.0, 2.5], &[2, 3, 5], 30, &ctx)])
}

fn criterion_12() -> Line {
    let report = scaling_report(None, 3).unwrap();
    // Only the t in {10, 20, 40} ratios and the digits timing ratio are in scope.
    let relevant: Vec<_> = report
        .checks
        .iter()
        .filter(|c| c.name != "M(t=80)/M(t=40)" && !c.name.starts_with("M(digits"))
        .collect();
    let rows: Vec<String> = report.rows().map(|r| format!("t={} d={} M={}", r.t, r.digits, r.terms)).collect();
    Line {
        id: 12,
        passed: relevant.iter().all(|c| c.passed()),
        soft: true,
        detail: format!(
            "{} [{}]",
            relevant.iter().map(|c| format!("{} = {:.3}", c.name, c.value)).collect::<Vec<_>>().join(", "),
            rows.join(" ")
        ),
    }
}

#[test]
fn acceptance() {
    // The oracle itself must be sound before anything is compared to it.
    let ctx = PrecisionContext::new(40).unwrap();
    let log2 = Float::with_val(300, Float::ln_u(2));
    assert!(dist(&eta_reference(&ctx.complex(1, 0), 60).unwrap(), &CComplex::from_real(log2)) < ten_pow(64, -60));

    let criteria: Vec<fn() -> Line> = vec![
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
        criterion_11,
        criterion_12,
    ];
    let mut hard_failures = Vec::new();
    for c in criteria {
        let line = c();
        let tag = match (line.passed, line.soft) {
            (true, _) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "FAIL (soft, not asserted)",
        };
        println!("criterion {:>2}: {tag}  {}", line.id, line.detail);
        if !line.passed && !line.soft {
            hard_failures.push(line.id);
        }
    }
    assert!(hard_failures.is_empty(), "failed criteria: {hard_failures:?}");
}
