//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`). The process exits non-zero on
//! any FAIL only when `TONTINE_ACCEPTANCE_STRICT` is set.

use std::time::Instant;

use tontine_core::binomial::{expected_log_ratio, expected_reciprocal, survivor_expectation};
use tontine_core::pool_outcomes::{dividend_fan, simulate_cohort, DEFAULT_LEVELS};
use tontine_core::products::{
    euler_lagrange_residual, flat_tontine, individual_dividend, natural_tontine, optimal_tontine, PayoutCurve,
};
use tontine_core::welfare::{
    asymptotic_loading_scale, certainty_equivalent_ratio, indifference_loading, loading_bound, utility_annuity,
    utility_optimal_tontine,
};
use tontine_core::{EconomicBasis, MortalityBasis, PoolSpec, SurvivalModel};

struct Report {
    failures: Vec<u32>,
}

impl Report {
    fn line(&mut self, id: u32, title: &str, passed: bool, detail: String) {
        let verdict = if passed { "PASS" } else { "FAIL" };
        println!("{verdict} [{id:>2}] {title}: {detail}");
        if !passed {
            self.failures.push(id);
        }
    }
}

fn info(text: String) {
    println!("     info: {text}");
}

fn basis(age: f64, m: f64, b: f64, r: f64) -> (MortalityBasis, EconomicBasis) {
    (MortalityBasis::new(age, m, b).unwrap(), EconomicBasis::infinite(r).unwrap())
}

fn table1() -> (MortalityBasis, EconomicBasis) {
    basis(65.0, 88.72, 10.0, 0.04)
}

fn table2() -> (MortalityBasis, EconomicBasis) {
    basis(60.0, 87.25, 9.5, 0.03)
}

const TABLE1_GAMMAS: [f64; 6] = [0.5, 1.0, 1.5, 2.0, 4.0, 9.0];
const TABLE1: [[f64; 3]; 6] = [
    [7.565, 5.446, 1.200],
    [7.520, 5.435, 1.268],
    [7.482, 5.428, 1.323],
    [7.447, 5.423, 1.373],
    [7.324, 5.410, 1.541],
    [7.081, 5.394, 1.847],
];

const TABLE2_N: [u64; 5] = [20, 100, 500, 1000, 5000];
const TABLE2_GAMMAS: [f64; 6] = [0.5, 1.0, 1.5, 2.0, 3.0, 9.0];
const TABLE2: [[f64; 5]; 6] = [
    [72.6, 14.5, 2.97, 1.50, 0.30],
    [129.8, 27.4, 5.74, 2.92, 0.60],
    [182.4, 39.8, 8.45, 4.31, 0.89],
    [231.7, 51.8, 11.1, 5.68, 1.18],
    [323.1, 75.1, 16.3, 8.38, 1.75],
    [753.6, 199.8, 45.9, 23.8, 5.09],
];

const TABLE3_AGES: [f64; 6] = [30.0, 40.0, 50.0, 60.0, 70.0, 80.0];
const TABLE3: [[f64; 2]; 6] = [
    [1.000018, 1.000215],
    [1.000026, 1.000753],
    [1.000041, 1.001674],
    [1.000067, 1.003388],
    [1.000118, 1.003451],
    [1.000225, 1.009877],
];

fn criterion_1(report: &mut Report) {
    let (m, e) = table1();
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (gamma, printed) in TABLE1_GAMMAS.iter().zip(TABLE1) {
        let curve = optimal_tontine(&m, &e, &PoolSpec::new(25, *gamma).unwrap()).unwrap();
        for (age, value) in [65.0, 80.0, 95.0].iter().zip(printed) {
            worst = worst.max((100.0 * curve.rate(age - 65.0) - value).abs());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report.line(
        1,
        "payout-rate table",
        worst <= 0.005 && elapsed < 1.0,
        format!("max |err| = {worst:.5} pp (tol 0.005), {elapsed:.3} s (limit 1 s)"),
    );
}

fn criterion_2(report: &mut Report) {
    let (m, _) = table1();
    let p15 = 100.0 * m.survival(15.0);
    let p30 = 100.0 * m.survival(30.0);
    let e15 = (p15 - 72.2).abs();
    let e30 = (p30 - 16.8).abs();
    report.line(
        2,
        "survival footer",
        e15 <= 0.05 && e30 <= 0.05,
        format!("15p65 = {p15:.4}% vs 72.2, 30p65 = {p30:.4}% vs 16.8 (tol 0.05 points)"),
    );
    info(format!(
        "computed values truncate to the printed digits: {} and {}",
        (p15 * 10.0).trunc() / 10.0,
        (p30 * 10.0).trunc() / 10.0
    ));
}

fn criterion_3(report: &mut Report) {
    let (m, e) = table2();
    let start = Instant::now();
    let mut misses = Vec::new();
    let mut worst = 0.0f64;
    for (gamma, printed) in TABLE2_GAMMAS.iter().zip(TABLE2) {
        for (n, value) in TABLE2_N.iter().zip(printed) {
            let bp = 1e4 * indifference_loading(&m, &e, &PoolSpec::new(*n, *gamma).unwrap()).unwrap();
            let tol = (0.005 * value).max(0.05);
            let err = (bp - value).abs();
            worst = worst.max(err / tol);
            if err > tol {
                misses.push(format!("gamma {gamma}, n {n}: {bp:.4} vs {value}"));
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report.line(
        3,
        "indifference-loading table",
        misses.is_empty() && elapsed < 10.0,
        format!(
            "{} of 30 cells outside max(0.5%, 0.05 bp), worst err/tol = {worst:.3}, {elapsed:.3} s (limit 10 s)",
            misses.len()
        ),
    );
    for miss in misses {
        info(miss);
    }
}

fn criterion_4(report: &mut Report) {
    let mut worst = 0.0f64;
    let mut log_worst = 0.0f64;
    let mut continuous = Vec::new();
    for (age, printed) in TABLE3_AGES.iter().zip(TABLE3) {
        let m = MortalityBasis::new(*age, 87.25, 9.5).unwrap();
        let terms = if *age < 65.0 { 81 } else { 51 };
        let annual = EconomicBasis::infinite(0.03).unwrap().with_annual_grid(terms).unwrap();
        for (gamma, value) in [0.5, 2.0].iter().zip(printed) {
            let g = certainty_equivalent_ratio(&m, &annual, &PoolSpec::new(100, *gamma).unwrap()).unwrap();
            worst = worst.max((g - value).abs());
        }
        let g1 = certainty_equivalent_ratio(&m, &annual, &PoolSpec::new(100, 1.0).unwrap()).unwrap();
        log_worst = log_worst.max((g1 - 1.0).abs());
        let cont = EconomicBasis::infinite(0.03).unwrap();
        let g2 = certainty_equivalent_ratio(&m, &cont, &PoolSpec::new(100, 2.0).unwrap()).unwrap();
        continuous.push(format!("{age}: {g2:.6}"));
    }
    report.line(
        4,
        "certainty-equivalent table",
        worst <= 5e-6 && log_worst <= 1e-12,
        format!("annual payments, max |err| = {worst:.2e} (tol 5e-6), gamma 1 max |G - 1| = {log_worst:.1e}"),
    );
    info(format!("continuous-time gamma 2 column: {}", continuous.join(", ")));
}

fn criterion_5(report: &mut Report) {
    let m = MortalityBasis::new(50.0, 87.25, 9.5).unwrap();
    let e = EconomicBasis::infinite(0.03).unwrap();
    let n_loading = |e: &EconomicBasis, n: u64| n as f64 * indifference_loading(&m, e, &PoolSpec::new(n, 2.0).unwrap()).unwrap();
    let mut checks: Vec<(String, f64, f64)> = Vec::new();
    checks.push(("limit".into(), asymptotic_loading_scale(&m, &e, 2.0).unwrap(), 0.6593));
    for (n, value) in [(10, 0.2858), (100, 0.3377), (1000, 0.3671)] {
        checks.push((format!("n {n}"), n_loading(&e, n), value));
    }
    for (cap, n, value, limit) in [(100.0, 100, 0.2855, 0.2897), (110.0, 1000, 0.3642, 0.3850), (120.0, 100_000, 0.4012, 0.4301)] {
        let capped = EconomicBasis::capped(0.03, cap - 50.0).unwrap();
        checks.push((format!("cap {cap} n {n}"), n_loading(&capped, n), value));
        checks.push((format!("cap {cap} limit"), asymptotic_loading_scale(&m, &capped, 2.0).unwrap(), limit));
    }
    let misses: Vec<String> = checks
        .iter()
        .filter(|(_, got, want)| (got - want).abs() > 0.0005)
        .map(|(name, got, want)| format!("{name}: {got:.5} vs {want}"))
        .collect();
    report.line(
        5,
        "loading asymptotics",
        misses.is_empty(),
        format!("{} of {} values outside 0.0005", misses.len(), checks.len()),
    );
    for (name, got, want) in &checks {
        info(format!("{name}: {got:.5} (printed {want})"));
    }
}

fn criterion_6(report: &mut Report) {
    let m = MortalityBasis::new(60.0, 87.25, 9.5).unwrap();
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for (cap, gamma, n, value) in [(100.0, 4.0, 50, 1.0032), (100.0, 10.0, 300, 1.0037), (110.0, 4.0, 1400, 1.0032)] {
        let e = EconomicBasis::capped(0.03, cap - 60.0).unwrap();
        let g = certainty_equivalent_ratio(&m, &e, &PoolSpec::new(n, gamma).unwrap()).unwrap();
        worst = worst.max((g - value).abs());
        detail.push(format!("{g:.7}"));
    }
    report.line(
        6,
        "capped certainty equivalents",
        worst <= 5e-5,
        format!("{} , max |err| = {worst:.2e} (tol 5e-5)", detail.join(", ")),
    );
}

fn criterion_7(report: &mut Report) {
    let (m, e) = table2();
    let mut points = 0;
    let mut violations = Vec::new();
    for n in [2, 20, 100, 1000, 5000] {
        for gamma in TABLE1_GAMMAS {
            let ua = utility_annuity(&m, &e, gamma, 0.0).unwrap();
            let uot = utility_optimal_tontine(&m, &e, &PoolSpec::new(n, gamma).unwrap()).unwrap();
            points += 1;
            if uot >= ua {
                violations.push(format!("n {n}, gamma {gamma}"));
            }
        }
    }
    report.line(
        7,
        "tontine utility below annuity",
        violations.is_empty() && points == 30,
        format!("{points} grid points, {} violations", violations.len()),
    );
    let ua = utility_annuity(&m, &e, 2.0, 0.0).unwrap();
    let u1 = utility_optimal_tontine(&m, &e, &PoolSpec::new(1, 2.0).unwrap()).unwrap();
    info(format!("n = 1, gamma 2 (excluded): U^OT = {u1:.6}, U^A = {ua:.6}"));
}

fn criterion_8(report: &mut Report) {
    let (m, e) = table2();
    let mut worst = f64::NEG_INFINITY;
    for gamma in [1.5, 2.0] {
        for n in TABLE2_N {
            let pool = PoolSpec::new(n, gamma).unwrap();
            let ratio = indifference_loading(&m, &e, &pool).unwrap() / loading_bound(&m, &e, &pool).unwrap();
            worst = worst.max(ratio);
        }
    }
    report.line(
        8,
        "loading below (c0/r - 1)/n",
        worst < 1.0,
        format!("max loading/bound = {worst:.4} over 10 points"),
    );
}

fn lemma_checks() -> Vec<(&'static str, bool)> {
    let ps: Vec<f64> = (1..40).map(|i| i as f64 / 40.0).collect();
    let sizes = [2u64, 3, 10, 50, 400];
    let gammas = [0.3, 0.5, 0.9, 1.5, 2.0, 3.0, 5.0];

    let mut increasing = true;
    let mut endpoints = true;
    let mut closed = true;
    let mut limits = true;
    let mut side = true;
    for &n in &sizes {
        let nf = n as f64;
        for &g in &gammas {
            let pool = PoolSpec::new(n, g).unwrap();
            endpoints &= pool.beta(0.0).unwrap() == 0.0 && (pool.beta(1.0).unwrap() - 1.0).abs() < 1e-14;
            let mut prev = 0.0;
            for &p in &ps {
                let b = pool.beta(p).unwrap();
                increasing &= b > prev;
                side &= if g < 1.0 { b < p.powf(g) } else { b > p.powf(g) };
                prev = b;
            }
        }
        for &p in &ps {
            let b1 = PoolSpec::new(n, 1.0).unwrap().beta(p).unwrap();
            let b2 = PoolSpec::new(n, 2.0).unwrap().beta(p).unwrap();
            let b3 = PoolSpec::new(n, 3.0).unwrap().beta(p).unwrap();
            let c2 = p / nf * (1.0 + (nf - 1.0) * p);
            let c3 = p / (nf * nf) * (1.0 + 3.0 * (nf - 1.0) * p + (nf - 1.0) * (nf - 2.0) * p * p);
            closed &= (b1 - p).abs() <= 1e-14 && (b2 / c2 - 1.0).abs() <= 1e-12 && (b3 / c3 - 1.0).abs() <= 1e-12;
            if n <= 10 {
                let big = PoolSpec::new(n, 400.0).unwrap().beta(p).unwrap();
                limits &= (big - p.powi(n as i32)).abs() <= 1e-9 * p.powi(n as i32) + 1e-60;
            }
            let small = PoolSpec::new(n, 1e-9).unwrap().beta(p).unwrap();
            limits &= (small - (1.0 - (1.0 - p).powi(n as i32))).abs() <= 1e-7;
        }
    }

    let mut derivative = true;
    for &n in &sizes {
        for &g in &gammas {
            let f = |k: u64| (n as f64 / k as f64).powf(1.0 - g);
            for &p in &[0.1, 0.35, 0.6, 0.85] {
                let h = 1e-5;
                let fd = (survivor_expectation(n, p + h, f).unwrap() - survivor_expectation(n, p - h, f).unwrap()) / (2.0 * h);
                let identity =
                    survivor_expectation(n, p, |k| (k - 1) as f64 * (f(k) - if k > 1 { f(k - 1) } else { 0.0 })).unwrap() / p;
                derivative &= (fd - identity).abs() <= 1e-6 * identity.abs().max(1e-12);
            }
        }
    }

    let mut reciprocal = true;
    for n in 1..=20u64 {
        for &p in &ps {
            let mut enumerated = 0.0;
            let mut coeff = 1.0;
            for k in 0..n {
                if k > 0 {
                    coeff *= (n - k) as f64 / k as f64;
                }
                enumerated += coeff * p.powi(k as i32) * (1.0 - p).powi((n - 1 - k) as i32) * n as f64 / (k + 1) as f64;
            }
            let closed_form = (1.0 - (1.0 - p).powi(n as i32)) / p;
            let engine = expected_reciprocal(n, p).unwrap();
            reciprocal &= (enumerated - closed_form).abs() <= 1e-12 * closed_form
                && (engine - closed_form).abs() <= 1e-12 * closed_form;
            // the gap (1-p)^n / p is only representable above machine precision
            if (1.0 - p).powi(n as i32) > 1e-12 {
                reciprocal &= closed_form < 1.0 / p;
            }
        }
    }

    let mut r_monotone = true;
    for &n in &sizes {
        let r = |g: f64, p: f64| PoolSpec::new(n, g).unwrap().beta_root(p).unwrap() / p;
        for &p in &ps {
            let mut prev = 0.0;
            for &g in &gammas {
                let v = r(g, p);
                r_monotone &= v > prev;
                prev = v;
            }
        }
        for &g in &gammas {
            for w in ps.windows(2) {
                let (a, b) = (r(g, w[0]), r(g, w[1]));
                r_monotone &= if g < 1.0 { b > a } else { b < a };
            }
        }
    }

    let mut log_bound = true;
    for &n in &sizes {
        for &p in &ps {
            log_bound &= expected_log_ratio(n, p).unwrap() > p.ln();
        }
    }

    vec![
        ("beta increasing", increasing),
        ("beta endpoints", endpoints),
        ("beta closed forms", closed),
        ("beta limits", limits),
        ("beta vs p^gamma", side),
        ("derivative identity", derivative),
        ("E[n/N] closed form", reciprocal),
        ("R_gamma monotonicity", r_monotone),
        ("E[log N] > log(np)", log_bound),
    ]
}

fn criterion_9(report: &mut Report) {
    let checks = lemma_checks();
    let failed: Vec<&str> = checks.iter().filter(|(_, ok)| !ok).map(|(name, _)| *name).collect();
    report.line(
        9,
        "lemma suite",
        failed.is_empty(),
        if failed.is_empty() {
            format!("{} grid checks hold (randomised versions in the properties target)", checks.len())
        } else {
            format!("failed: {}", failed.join(", "))
        },
    );
}

/// Maximises the discretised lifetime utility subject to the discretised
/// budget, without using the closed form.
fn brute_force_curve(n: u64, gamma: f64, r: f64, times: &[f64], survival: &[f64]) -> Vec<f64> {
    let h = times[1] - times[0];
    let nodes = times.len();
    let weight: Vec<f64> = (0..nodes)
        .map(|i| if i == 0 || i == nodes - 1 { h / 2.0 } else { h })
        .collect();
    let discount: Vec<f64> = times.iter().map(|t| (-r * t).exp()).collect();
    // E[(N/n)^(gamma-1)] by direct enumeration of the binomial law
    let moment = |p: f64| {
        let mut total = 0.0;
        let mut coeff = 1.0;
        for k in 0..n {
            if k > 0 {
                coeff *= (n - k) as f64 / k as f64;
            }
            let mass = coeff * p.powi(k as i32) * (1.0 - p).powi((n - 1 - k) as i32);
            total += mass * ((k + 1) as f64 / n as f64).powf(gamma - 1.0);
        }
        total
    };
    let marginal: Vec<f64> = survival.iter().map(|&p| p * moment(p)).collect();
    let budget = |d: &[f64]| (0..nodes).map(|i| weight[i] * discount[i] * d[i]).sum::<f64>();

    let mut d = vec![1.0; nodes];
    let scale = budget(&d);
    d.iter_mut().for_each(|x| *x /= scale);
    for _ in 0..20_000 {
        // marginal utility of sum w e^{-rt} beta d^{1-gamma}/(1-gamma) per unit of budget
        let ratio: Vec<f64> = (0..nodes).map(|i| marginal[i] * d[i].powf(-gamma)).collect();
        let lambda = (0..nodes).map(|i| weight[i] * discount[i] * d[i] * ratio[i]).sum::<f64>();
        let mut change = 0.0f64;
        for i in 0..nodes {
            let step = 0.25 * (ratio[i] / lambda - 1.0) / gamma;
            let next = d[i] * (1.0 + step).max(0.5);
            change = change.max((next / d[i] - 1.0).abs());
            d[i] = next;
        }
        let scale = budget(&d);
        d.iter_mut().for_each(|x| *x /= scale);
        if change < 1e-14 {
            break;
        }
    }
    d
}

fn criterion_10(report: &mut Report) {
    let m = MortalityBasis::new(65.0, 88.72, 10.0).unwrap();
    let e = EconomicBasis::capped(0.04, 40.0).unwrap();
    let pool = PoolSpec::new(10, 2.0).unwrap();
    let curve = optimal_tontine(&m, &e, &pool).unwrap();
    let times: Vec<f64> = (0..200).map(|i| 40.0 * i as f64 / 199.0).collect();
    let survival: Vec<f64> = times
        .iter()
        .map(|t| (-(-65.0f64 + 88.72).mul_add(-0.1, 0.0).exp() * ((t / 10.0).exp() - 1.0)).exp())
        .collect();
    let oracle = brute_force_curve(10, 2.0, 0.04, &times, &survival);
    let worst = times
        .iter()
        .zip(&oracle)
        .map(|(&t, &d)| (curve.rate(t.min(40.0 - 1e-12)) / d - 1.0).abs())
        .fold(0.0f64, f64::max);

    let mut residual = 0.0f64;
    for (basis, gammas) in [(table1(), [0.5, 2.0, 9.0]), (table2(), [1.5, 3.0, 4.0])] {
        let (m, e) = basis;
        for g in gammas {
            for n in [10, 25, 1000] {
                let pool = PoolSpec::new(n, g).unwrap();
                residual = residual.max(euler_lagrange_residual(&optimal_tontine(&m, &e, &pool).unwrap(), &pool).unwrap());
            }
        }
    }
    report.line(
        10,
        "Euler-Lagrange oracle",
        worst <= 1e-4 && residual <= 1e-8,
        format!("brute force vs closed form max rel err = {worst:.2e} (tol 1e-4), max residual = {residual:.2e} (tol 1e-8)"),
    );
}

fn criterion_11(report: &mut Report) {
    let mut worst = 0.0f64;
    let mut count = 0;
    for (m, inf) in [table1(), table2()] {
        let capped = EconomicBasis::capped(inf.rate(), 40.0).unwrap();
        for e in [inf, capped] {
            let mut curves: Vec<PayoutCurve> = vec![flat_tontine(&m, &e).unwrap(), natural_tontine(&m, &e).unwrap()];
            for g in [0.5, 1.0, 2.0, 4.0, 9.0] {
                for n in [1, 25, 5000] {
                    curves.push(optimal_tontine(&m, &e, &PoolSpec::new(n, g).unwrap()).unwrap());
                }
            }
            for c in &curves {
                worst = worst.max((c.depletion(f64::INFINITY).unwrap() - 1.0).abs());
                count += 1;
            }
        }
    }
    report.line(
        11,
        "budget constraint",
        worst <= 1e-8,
        format!("{count} curves, max |budget - 1| = {worst:.2e} (tol 1e-8)"),
    );
}

fn criterion_12(report: &mut Report) {
    let (m, e) = table2();
    let high = optimal_tontine(&m, &e, &PoolSpec::new(100, 2.0).unwrap()).unwrap();
    let low = optimal_tontine(&m, &e, &PoolSpec::new(100, 1.0).unwrap()).unwrap();
    let first = (1..=59).all(|t| high.depletion(t as f64).unwrap() < low.depletion(t as f64).unwrap());

    let capped = EconomicBasis::capped(0.03, 40.0).unwrap();
    let high = optimal_tontine(&m, &capped, &PoolSpec::new(10_000, 2.0).unwrap()).unwrap();
    let low = optimal_tontine(&m, &capped, &PoolSpec::new(10_000, 1.5).unwrap()).unwrap();
    let grid: Vec<f64> = (0..=144).map(|i| 2.0 + 0.25 * i as f64).collect();
    let second = grid.iter().all(|&t| high.depletion(t).unwrap() < low.depletion(t).unwrap());
    report.line(
        12,
        "depletion ordering",
        first && second,
        format!("n 100 (2 vs 1) on t = 1..59: {first}; capped n 1e4 (2 vs 1.5) on [2, 38]: {second}"),
    );
}

fn criterion_13(report: &mut Report) {
    let m = MortalityBasis::new(65.0, 88.721, 10.0).unwrap();
    let e = EconomicBasis::infinite(0.04).unwrap();
    let curve = natural_tontine(&m, &e).unwrap();
    let n = 400;
    let times: Vec<f64> = (1..=35).map(f64::from).collect();
    let start = Instant::now();
    let exact = dividend_fan(&curve, n, &DEFAULT_LEVELS, &times).unwrap();
    let sim = simulate_cohort(&curve, n, 100_000, 2013, &DEFAULT_LEVELS, &times).unwrap();
    let elapsed = start.elapsed().as_secs_f64();

    let mut misses = Vec::new();
    let mut worst_other = 0.0f64;
    for i in 0..times.len() {
        for j in 0..DEFAULT_LEVELS.len() {
            let rel = (sim.quantiles[i][j] / exact.quantiles[i][j] - 1.0).abs();
            if rel > 0.02 {
                misses.push((i, j, rel));
            } else {
                worst_other = worst_other.max(rel);
            }
        }
    }
    let example = individual_dividend(0.03, 1000, 800).unwrap();
    let example_ok = (example - 0.0375).abs() <= 1e-15;
    report.line(
        13,
        "fan consistency",
        misses.is_empty() && example_ok,
        format!(
            "{} of {} cells outside 2%, other cells within {:.2}%; worked example {example} ({elapsed:.2} s)",
            misses.len(),
            times.len() * DEFAULT_LEVELS.len(),
            100.0 * worst_other
        ),
    );
    for (i, j, rel) in misses {
        let t = times[i];
        let q = DEFAULT_LEVELS[j];
        let p = m.survival(t);
        let pot = n as f64 * curve.rate(t);
        let cdf = |k: u64| survivor_expectation(n, p, |s| if s <= k { 1.0 } else { 0.0 }).unwrap();
        // the exact quantile has k survivors, so P(N <= k) is the first CDF value above 1 - q
        let k = (pot / exact.quantiles[i][j]).round() as u64;
        let below = cdf(k);
        let sd = (below * (1.0 - below) / sim.paths as f64).sqrt();
        info(format!(
            "age {}, level {q}: simulated {:.6} vs exact {:.6} ({:.2}%); P(N <= {}) = {below:.5} vs threshold {:.1}, {:.1} sd from the boundary",
            65.0 + t,
            sim.quantiles[i][j],
            exact.quantiles[i][j],
            100.0 * rel,
            k,
            1.0 - q,
            ((below - (1.0 - q)) / sd).abs()
        ));
    }
}

fn main() {
    let mut report = Report { failures: Vec::new() };
    criterion_1(&mut report);
    criterion_2(&mut report);
    criterion_3(&mut report);
    criterion_4(&mut report);
    criterion_5(&mut report);
    criterion_6(&mut report);
    criterion_7(&mut report);
    criterion_8(&mut report);
    criterion_9(&mut report);
    criterion_10(&mut report);
    criterion_11(&mut report);
    criterion_12(&mut report);
    criterion_13(&mut report);
    println!("acceptance: {} of 13 criteria pass", 13 - report.failures.len());
    if !report.failures.is_empty() && std::env::var_os("TONTINE_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
