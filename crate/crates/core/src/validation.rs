//! Self-check of the engine's structural invariants, run by `tontine validate`.

use serde::Serialize;

use crate::binomial::{expected_log_ratio, expected_reciprocal, PoolSpec};
use crate::error::Result;
use crate::mortality::MortalityBasis;
use crate::pool_outcomes::{dividend_fan, DEFAULT_LEVELS};
use crate::products::{euler_lagrange_residual, flat_tontine, natural_tontine, optimal_tontine, PayoutCurve};
use crate::quadrature::EconomicBasis;
use crate::welfare::{certainty_equivalent_ratio, indifference_loading, loading_bound, utility_annuity, utility_optimal_tontine};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn() -> Result<(bool, String)>;

const CHECKS: [(&str, Check); 9] = [
    ("budget-constraint", budget_constraint),
    ("euler-lagrange", euler_lagrange),
    ("beta-bounds", beta_bounds),
    ("reciprocal-and-log-moments", moments),
    ("optimal-tontine-below-annuity", tontine_below_annuity),
    ("loading-bound", loading_bound_check),
    ("ce-ratio-at-least-one", ce_ratio),
    ("depletion-ordering", depletion_ordering),
    ("fan-ordering", fan_ordering),
];

/// Runs every check; an evaluation error counts as a failure.
pub fn invariant_suite() -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .map(|(name, check)| match check() {
            Ok((passed, detail)) => CheckOutcome { name, passed, detail },
            Err(e) => CheckOutcome {
                name,
                passed: false,
                detail: e.to_string(),
            },
        })
        .collect()
}

fn table1() -> (MortalityBasis, EconomicBasis) {
    (
        MortalityBasis::new(65.0, 88.72, 10.0).expect("valid basis"),
        EconomicBasis::infinite(0.04).expect("valid basis"),
    )
}

fn table2() -> (MortalityBasis, EconomicBasis) {
    (
        MortalityBasis::new(60.0, 87.25, 9.5).expect("valid basis"),
        EconomicBasis::infinite(0.03).expect("valid basis"),
    )
}

fn budget_constraint() -> Result<(bool, String)> {
    let (m, inf) = table1();
    let capped = EconomicBasis::capped(0.04, 35.0)?;
    let mut worst = 0.0f64;
    for e in [inf, capped] {
        let mut curves: Vec<PayoutCurve> = vec![flat_tontine(&m, &e)?, natural_tontine(&m, &e)?];
        for gamma in [0.5, 2.0, 9.0] {
            curves.push(optimal_tontine(&m, &e, &PoolSpec::new(25, gamma)?)?);
        }
        for c in &curves {
            worst = worst.max((c.depletion(f64::INFINITY)? - 1.0).abs());
        }
    }
    Ok((worst <= 1e-8, format!("max |budget - 1| = {worst:.3e}")))
}

fn euler_lagrange() -> Result<(bool, String)> {
    let (m, e) = table1();
    let mut worst = 0.0f64;
    for (n, gamma) in [(25, 0.5), (25, 2.0), (400, 4.0), (10, 9.0)] {
        let pool = PoolSpec::new(n, gamma)?;
        worst = worst.max(euler_lagrange_residual(&optimal_tontine(&m, &e, &pool)?, &pool)?);
    }
    Ok((worst <= 1e-8, format!("max residual = {worst:.3e}")))
}

fn beta_bounds() -> Result<(bool, String)> {
    let mut ok = true;
    for n in [2, 10, 100] {
        for gamma in [0.5, 2.0, 5.0] {
            let pool = PoolSpec::new(n, gamma)?;
            ok &= pool.beta(0.0)? == 0.0 && (pool.beta(1.0)? - 1.0).abs() < 1e-14;
            let mut prev = 0.0;
            for i in 1..20 {
                let p = i as f64 / 20.0;
                let b = pool.beta(p)?;
                ok &= b > prev;
                ok &= if gamma < 1.0 { b < p.powf(gamma) } else { b > p.powf(gamma) };
                prev = b;
            }
        }
    }
    Ok((ok, "monotone, pinned at 0 and 1, and on the correct side of p^gamma".into()))
}

fn moments() -> Result<(bool, String)> {
    let mut ok = true;
    // (1-p)^n must stay above machine epsilon for the strict inequality to be visible
    for n in [2, 25, 100] {
        for i in 1..10 {
            let p = i as f64 / 10.0;
            if (1.0 - p).powi(n as i32) > 1e-12 {
                ok &= expected_reciprocal(n, p)? < 1.0 / p;
            }
            ok &= expected_log_ratio(n, p)? > p.ln();
        }
    }
    Ok((ok, "E[n/N] < 1/p and E[log N] > log(np)".into()))
}

fn tontine_below_annuity() -> Result<(bool, String)> {
    let (m, e) = table2();
    let mut ok = true;
    for gamma in [0.5, 1.0, 2.0, 9.0] {
        let ua = utility_annuity(&m, &e, gamma, 0.0)?;
        for n in [1, 20, 1000] {
            ok &= utility_optimal_tontine(&m, &e, &PoolSpec::new(n, gamma)?)? < ua;
        }
    }
    Ok((ok, "12 (n, gamma) pairs".into()))
}

fn loading_bound_check() -> Result<(bool, String)> {
    let (m, e) = table2();
    let mut ok = true;
    for gamma in [1.5, 2.0] {
        for n in [20, 100, 500] {
            let pool = PoolSpec::new(n, gamma)?;
            ok &= indifference_loading(&m, &e, &pool)? < loading_bound(&m, &e, &pool)?;
        }
    }
    Ok((ok, "1 < gamma <= 2".into()))
}

fn ce_ratio() -> Result<(bool, String)> {
    let (m, e) = table2();
    let mut ok = certainty_equivalent_ratio(&m, &e, &PoolSpec::new(100, 1.0)?)? == 1.0;
    for gamma in [0.5, 1.5, 2.0] {
        ok &= certainty_equivalent_ratio(&m, &e, &PoolSpec::new(100, gamma)?)? >= 1.0;
    }
    Ok((ok, "gamma in {0.5, 1, 1.5, 2}".into()))
}

fn depletion_ordering() -> Result<(bool, String)> {
    let (m, e) = table2();
    let high = optimal_tontine(&m, &e, &PoolSpec::new(100, 2.0)?)?;
    let low = optimal_tontine(&m, &e, &PoolSpec::new(100, 1.0)?)?;
    let mut ok = true;
    for t in (5..60).step_by(5) {
        ok &= high.depletion(t as f64)? < low.depletion(t as f64)?;
    }
    Ok((ok, "gamma 2 depletes slower than gamma 1 (n = 100)".into()))
}

fn fan_ordering() -> Result<(bool, String)> {
    let m = MortalityBasis::new(65.0, 88.721, 10.0)?;
    let e = EconomicBasis::infinite(0.04)?;
    let times: Vec<f64> = (0..=35).map(f64::from).collect();
    let fan = dividend_fan(&flat_tontine(&m, &e)?, 400, &DEFAULT_LEVELS, &times)?;
    let ok = (0..times.len()).all(|i| {
        let q = &fan.quantiles[i];
        q[0] <= fan.central[i] && fan.central[i] <= q[2]
    });
    Ok((ok, "10% <= mean <= 90% for the 4% flat tontine".into()))
}
