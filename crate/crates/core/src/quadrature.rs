//! Discounted mortality-weighted integrals `∫ e^{-rt} f(tpx) dt`.
//!
//! Integrands are supplied as functions of the survival probability `p`; the
//! time variable only enters through discounting and the survival curve, both
//! handled here.

use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TontineError};
use crate::mortality::SurvivalModel;

pub const ABS_TOLERANCE: f64 = 1e-12;
pub const REL_TOLERANCE: f64 = 1e-10;
const MAX_PANELS: usize = 20_000;
const INITIAL_PANELS: usize = 16;

/// Survival level below which the integrand is replaced by its `p -> 0` limit.
pub const NEGLIGIBLE_SURVIVAL: f64 = 1e-16;
/// Extra years integrated past the negligible-survival point.
pub const GUARD_YEARS: f64 = 10.0;
/// Oldest age the infinite-horizon quadrature ever reaches.
pub const TERMINAL_AGE: f64 = 150.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    Infinite,
    /// Payments stop `T` years after issue.
    Capped(f64),
}

/// How "integrals" over time are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Valuation {
    /// Continuous payments, adaptive quadrature.
    #[default]
    Continuous,
    /// Annual payments in advance: `Σ_{k<terms} e^{-rk} f(kpx)`.
    AnnualGrid { terms: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EconomicBasis {
    rate: f64,
    horizon: Horizon,
    #[serde(default)]
    valuation: Valuation,
}

impl EconomicBasis {
    pub fn new(rate: f64, horizon: Horizon) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(TontineError::invalid("r", format!("{rate} must be finite and > 0")));
        }
        if let Horizon::Capped(t) = horizon {
            if !(t.is_finite() && t > 0.0) {
                return Err(TontineError::invalid(
                    "horizon",
                    format!("capped horizon {t} must be finite and > 0"),
                ));
            }
        }
        Ok(EconomicBasis {
            rate,
            horizon,
            valuation: Valuation::Continuous,
        })
    }

    pub fn infinite(rate: f64) -> Result<Self> {
        EconomicBasis::new(rate, Horizon::Infinite)
    }

    pub fn capped(rate: f64, years: f64) -> Result<Self> {
        EconomicBasis::new(rate, Horizon::Capped(years))
    }

    /// Switches to annual-in-advance valuation over `terms` payment dates.
    pub fn with_annual_grid(mut self, terms: u32) -> Result<Self> {
        if terms == 0 {
            return Err(TontineError::invalid("terms", "annual grid needs at least one term"));
        }
        if self.horizon != Horizon::Infinite {
            return Err(TontineError::invalid(
                "terms",
                "annual grid and capped horizon are mutually exclusive",
            ));
        }
        self.valuation = Valuation::AnnualGrid { terms };
        Ok(self)
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    pub fn valuation(&self) -> Valuation {
        self.valuation
    }

    pub fn is_infinite(&self) -> bool {
        self.horizon == Horizon::Infinite && self.valuation == Valuation::Continuous
    }

    /// Value of one unit paid continuously (or annually) over the horizon.
    pub fn certain_annuity(&self) -> f64 {
        let r = self.rate;
        match (self.valuation, self.horizon) {
            (Valuation::AnnualGrid { terms }, _) => {
                -(-r * terms as f64).exp_m1() / -(-r).exp_m1()
            }
            (Valuation::Continuous, Horizon::Infinite) => 1.0 / r,
            (Valuation::Continuous, Horizon::Capped(t)) => -(-r * t).exp_m1() / r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

// 15-point Kronrod extension of the 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = g(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = g(center - dx) + g(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature of `g` over `[a, b]`.
pub fn adaptive_integrate<G>(g: G, a: f64, b: f64) -> Result<Integral>
where
    G: Fn(f64) -> f64,
{
    adaptive_integrate_with(g, a, b, ABS_TOLERANCE, REL_TOLERANCE)
}

pub fn adaptive_integrate_with<G>(g: G, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Integral>
where
    G: Fn(f64) -> f64,
{
    if b <= a {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
        });
    }
    let width = (b - a) / INITIAL_PANELS as f64;
    let mut heap: BinaryHeap<Panel> = (0..INITIAL_PANELS)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == INITIAL_PANELS { b } else { lo + width };
            kronrod15(&g, lo, hi)
        })
        .collect();

    let totals = |heap: &BinaryHeap<Panel>| {
        heap.iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error))
    };
    let (mut value, mut error) = totals(&heap);
    loop {
        if !value.is_finite() || !error.is_finite() {
            return Err(TontineError::Accuracy { estimate: value, error });
        }
        if error <= abs_tol.max(rel_tol * value.abs()) {
            // re-sum to shed drift from the running updates
            let (v, e) = totals(&heap);
            if e <= abs_tol.max(rel_tol * v.abs()) {
                return Ok(Integral { value: v, error: e });
            }
            value = v;
            error = e;
        }
        if heap.len() >= MAX_PANELS {
            return Err(TontineError::Accuracy { estimate: value, error });
        }
        let worst = heap.pop().expect("heap holds the initial panels");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // panel cannot be split further in floating point
            return Err(TontineError::Accuracy { estimate: value, error });
        }
        let left = kronrod15(&g, worst.a, mid);
        let right = kronrod15(&g, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
}

/// End of the numerically relevant range for an infinite horizon, in years.
pub fn truncation_time(mortality: &dyn SurvivalModel) -> f64 {
    let cap = (TERMINAL_AGE - mortality.age()).max(GUARD_YEARS);
    match mortality.time_for_survival(NEGLIGIBLE_SURVIVAL) {
        Ok(t) => (t + GUARD_YEARS).min(cap),
        Err(_) => cap,
    }
}

/// Upper limit of integration for the basis: `T`, or the truncation time.
pub fn effective_horizon(economic: &EconomicBasis, mortality: &dyn SurvivalModel) -> f64 {
    match (economic.valuation, economic.horizon) {
        (Valuation::AnnualGrid { terms }, _) => terms as f64,
        (Valuation::Continuous, Horizon::Capped(t)) => t,
        (Valuation::Continuous, Horizon::Infinite) => truncation_time(mortality),
    }
}

/// `∫_0^H e^{-rt} f(tpx) dt` over the basis horizon.
pub fn discounted_integral<F>(
    economic: &EconomicBasis,
    mortality: &dyn SurvivalModel,
    f: F,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    discounted_integral_to(economic, mortality, f64::INFINITY, f)
}

/// `∫_0^min(upper, H) e^{-rt} f(tpx) dt`.
///
/// On an infinite horizon the part beyond the truncation time is closed
/// analytically with `f` frozen at its value at the truncation time (for any
/// genuine mortality law that is the `p -> 0` limit).
pub fn discounted_integral_to<F>(
    economic: &EconomicBasis,
    mortality: &dyn SurvivalModel,
    upper: f64,
    f: F,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if upper.is_nan() || upper < 0.0 {
        return Err(TontineError::Domain(format!("integration limit {upper} must be >= 0")));
    }
    let r = economic.rate;
    if let Valuation::AnnualGrid { terms } = economic.valuation {
        return Ok(annual_sum(r, mortality, terms, upper, &f));
    }
    let horizon = effective_horizon(economic, mortality);
    let end = upper.min(horizon);
    let integrand = |t: f64| (-r * t).exp() * f(mortality.log_survival(t).exp());
    let body = adaptive_integrate(integrand, 0.0, end)?.value;
    if economic.horizon == Horizon::Infinite && upper > horizon {
        let limit = f(mortality.log_survival(horizon).exp());
        if limit != 0.0 {
            let tail = if upper.is_infinite() {
                limit * (-r * horizon).exp() / r
            } else {
                limit * ((-r * horizon).exp() - (-r * upper).exp()) / r
            };
            return Ok(body + tail);
        }
    }
    Ok(body)
}

/// `Σ_{k < terms, k < upper} e^{-rk} f(kpx)`.
fn annual_sum<F: Fn(f64) -> f64>(
    rate: f64,
    mortality: &dyn SurvivalModel,
    terms: u32,
    upper: f64,
    f: &F,
) -> f64 {
    let mut total = crate::binomial::CompensatedSum::default();
    for k in 0..terms {
        let t = k as f64;
        if t >= upper {
            break;
        }
        total.add((-rate * t).exp() * f(mortality.log_survival(t).exp()));
    }
    total.value()
}
