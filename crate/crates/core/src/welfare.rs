//! Discounted lifetime utility of annuities and tontines.
//!
//! Utilities keep their sign: negative for `γ > 1`, positive for `γ < 1`.
//! Comparisons are always made on the values themselves.

use serde::Serialize;

use crate::binomial::{expected_log_ratio, weighted_mean, PoolSpec, MIN_PROBABILITY};
use crate::error::{Result, TontineError};
use crate::mortality::{MortalityBasis, SurvivalModel};
use crate::products::{check_loading, fair_annuity, natural_tontine, optimal_factor, CurveKind, PayoutCurve};
use crate::quadrature::{discounted_integral, EconomicBasis};

/// CRRA felicity `u(c) = c^{1-γ}/(1-γ)`, or `log c` at `γ = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crra {
    gamma: f64,
    logarithmic: bool,
}

impl Crra {
    pub fn new(gamma: f64) -> Result<Self> {
        let pool = PoolSpec::new(1, gamma)?;
        Ok(Crra::from_pool(&pool))
    }

    pub fn from_pool(pool: &PoolSpec) -> Self {
        Crra {
            gamma: pool.gamma(),
            logarithmic: pool.is_logarithmic(),
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn utility(&self, c: f64) -> f64 {
        if self.logarithmic {
            c.ln()
        } else {
            c.powf(1.0 - self.gamma) / (1.0 - self.gamma)
        }
    }
}

/// Utility of a life annuity bought with a proportional loading `δ`.
pub fn utility_annuity(
    mortality: &dyn SurvivalModel,
    economic: &EconomicBasis,
    gamma: f64,
    loading: f64,
) -> Result<f64> {
    check_loading(loading)?;
    let pool = PoolSpec::new(1, gamma)?;
    let c0 = fair_annuity(mortality, economic)?.c0;
    if pool.is_logarithmic() {
        return Ok((c0.ln() + (-loading).ln_1p()) / c0);
    }
    Ok(c0.powf(-gamma) * (1.0 - loading).powf(1.0 - gamma) / (1.0 - gamma))
}

/// Utility of the optimal tontine.
pub fn utility_optimal_tontine(
    mortality: &dyn SurvivalModel,
    economic: &EconomicBasis,
    pool: &PoolSpec,
) -> Result<f64> {
    if pool.is_logarithmic() {
        let c0 = fair_annuity(mortality, economic)?.c0;
        let log_c0 = c0.ln();
        let n = pool.n();
        return discounted_integral(economic, mortality, |p| {
            if p < MIN_PROBABILITY {
                return 0.0;
            }
            let log_ratio = expected_log_ratio(n, p).unwrap_or(0.0);
            p * (log_c0 + p.ln() - log_ratio)
        });
    }
    let gamma = pool.gamma();
    let factor = optimal_factor(mortality, economic, pool)?;
    Ok(factor.powf(gamma) / (1.0 - gamma))
}

/// Utility of an arbitrary payout curve to a member of `pool`, by summing
/// `u(n d / N)` over the survivor distribution at every quadrature node.
pub fn utility_curve(curve: &PayoutCurve, pool: &PoolSpec) -> Result<f64> {
    let economic = curve.economic();
    if curve.kind() == CurveKind::Natural && pool.gamma() > 2.0 && economic.is_infinite() {
        return Err(TontineError::Divergence(format!(
            "natural tontine utility is infinite for gamma {} > 2 on an infinite horizon",
            pool.gamma()
        )));
    }
    let felicity = Crra::from_pool(pool);
    let n = pool.n();
    let nf = n as f64;
    let value = discounted_integral(economic, curve.mortality(), |p| {
        if p < MIN_PROBABILITY {
            return 0.0;
        }
        let d = curve.rate_at_survival(p);
        p * weighted_mean(n - 1, p, |k| felicity.utility(nf * d / (k as f64 + 1.0)))
    })?;
    if !value.is_finite() {
        return Err(TontineError::Divergence(format!("curve utility evaluated to {value}")));
    }
    Ok(value)
}

/// Loading `δ` at which the loaded annuity and the optimal tontine give the
/// same utility.
pub fn indifference_loading(
    mortality: &dyn SurvivalModel,
    economic: &EconomicBasis,
    pool: &PoolSpec,
) -> Result<f64> {
    let c0 = fair_annuity(mortality, economic)?.c0;
    if pool.is_logarithmic() {
        // log(1 - δ) = c0 (U^OT - U^A)
        let n = pool.n();
        let gap = discounted_integral(economic, mortality, |p| {
            if p < MIN_PROBABILITY {
                return 0.0;
            }
            p * (p.ln() - expected_log_ratio(n, p).unwrap_or(0.0))
        })?;
        return Ok(-(c0 * gap).exp_m1());
    }
    let gamma = pool.gamma();
    let factor = optimal_factor(mortality, economic, pool)?;
    Ok(-((gamma / (1.0 - gamma)) * (c0 * factor).ln()).exp_m1())
}

/// `(1/n)(c0 A - 1)` with `A` the certain annuity over the horizon; on an
/// infinite continuous basis this is `(1/n)(c0/r - 1)`.
pub fn loading_bound(mortality: &dyn SurvivalModel, economic: &EconomicBasis, pool: &PoolSpec) -> Result<f64> {
    let c0 = fair_annuity(mortality, economic)?.c0;
    Ok((c0 * economic.certain_annuity() - 1.0) / pool.n() as f64)
}

/// Large-pool limit of `n δ`: `(γ/2)(c0 A - 1)`.
pub fn asymptotic_loading_scale(mortality: &dyn SurvivalModel, economic: &EconomicBasis, gamma: f64) -> Result<f64> {
    PoolSpec::new(1, gamma)?;
    let c0 = fair_annuity(mortality, economic)?.c0;
    Ok(0.5 * gamma * (c0 * economic.certain_annuity() - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub n: u64,
    pub loading: f64,
    pub n_loading: f64,
}

/// `n δ` for each pool size in `sizes`.
pub fn loading_scaling(
    mortality: &dyn SurvivalModel,
    economic: &EconomicBasis,
    gamma: f64,
    sizes: &[u64],
) -> Result<Vec<ScalingPoint>> {
    if sizes.is_empty() {
        return Err(TontineError::invalid("n", "pool size list is empty"));
    }
    sizes
        .iter()
        .map(|&n| {
            let pool = PoolSpec::new(n, gamma)?;
            let loading = indifference_loading(mortality, economic, &pool)?;
            Ok(ScalingPoint {
                n,
                loading,
                n_loading: n as f64 * loading,
            })
        })
        .collect()
}

/// `Γ = [U^OT / U^N]^{1/(1-γ)}`, the ratio of certainty equivalents of the
/// optimal and natural tontines.
///
/// Evaluated as `A B^{γ/(1-γ)} / C^{1/(1-γ)}` with `A = ∫e^{-rt}p`,
/// `B = ∫e^{-rt}β^{1/γ}` and `C = ∫e^{-rt}p^{2-γ}θ`.
pub fn certainty_equivalent_ratio(
    mortality: &dyn SurvivalModel,
    economic: &EconomicBasis,
    pool: &PoolSpec,
) -> Result<f64> {
    if pool.is_logarithmic() {
        return Ok(1.0);
    }
    let gamma = pool.gamma();
    if gamma > 2.0 && economic.is_infinite() {
        return Err(TontineError::Divergence(format!(
            "natural tontine utility is infinite for gamma {gamma} > 2 on an infinite horizon"
        )));
    }
    let a = discounted_integral(economic, mortality, |p| p)?;
    let b = optimal_factor(mortality, economic, pool)?;
    let c = discounted_integral(economic, mortality, |p| {
        if p < MIN_PROBABILITY {
            return if gamma == 2.0 { pool.theta(0.0).unwrap_or(0.0) } else { 0.0 };
        }
        (p.ln() * (2.0 - gamma) + pool.log_theta(p)).exp()
    })?;
    let log_gamma = a.ln() + gamma / (1.0 - gamma) * b.ln() - c.ln() / (1.0 - gamma);
    Ok(log_gamma.exp())
}

/// Rounds `x` to `decimals` places, ties to even.
pub fn round_half_even(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    let scaled = x * scale;
    let floor = scaled.floor();
    let diff = scaled - floor;
    let rounded = if (diff - 0.5).abs() < 1e-9 {
        if floor % 2.0 == 0.0 {
            floor
        } else {
            floor + 1.0
        }
    } else {
        scaled.round()
    };
    rounded / scale
}

/// Welfare comparison for one pool, flattened for export.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WelfareReport {
    pub age: f64,
    pub m: f64,
    pub b: f64,
    pub r: f64,
    pub horizon_years: Option<f64>,
    pub n: u64,
    pub gamma: f64,
    pub c0: f64,
    pub annuity_loading: f64,
    pub u_annuity: f64,
    pub u_loaded_annuity: f64,
    pub u_optimal_tontine: f64,
    /// Utility of the natural tontine; absent when it diverges.
    pub u_curve: Option<f64>,
    pub indifference_loading: f64,
    pub indifference_loading_bp: f64,
    pub loading_bound: f64,
    /// Whether the loading-bound theorem applies (`1 < γ <= 2`).
    pub bound_applies: bool,
    pub ce_ratio: Option<f64>,
    /// Why an optional field is missing.
    pub notes: Vec<String>,
}

impl WelfareReport {
    pub fn new(
        mortality: &MortalityBasis,
        economic: &EconomicBasis,
        pool: &PoolSpec,
        annuity_loading: f64,
    ) -> Result<WelfareReport> {
        let gamma = pool.gamma();
        let c0 = fair_annuity(mortality, economic)?.c0;
        let mut notes = Vec::new();
        let u_curve = match natural_tontine(mortality, economic).and_then(|c| utility_curve(&c, pool)) {
            Ok(u) => Some(u),
            Err(e) => {
                notes.push(format!("u_curve: {e}"));
                None
            }
        };
        let ce_ratio = match certainty_equivalent_ratio(mortality, economic, pool) {
            Ok(g) => Some(g),
            Err(e) => {
                notes.push(format!("ce_ratio: {e}"));
                None
            }
        };
        let delta = indifference_loading(mortality, economic, pool)?;
        Ok(WelfareReport {
            age: mortality.age(),
            m: mortality.modal(),
            b: mortality.dispersion(),
            r: economic.rate(),
            horizon_years: match economic.horizon() {
                crate::quadrature::Horizon::Capped(t) => Some(t),
                crate::quadrature::Horizon::Infinite => None,
            },
            n: pool.n(),
            gamma,
            c0,
            annuity_loading,
            u_annuity: utility_annuity(mortality, economic, gamma, 0.0)?,
            u_loaded_annuity: utility_annuity(mortality, economic, gamma, annuity_loading)?,
            u_optimal_tontine: utility_optimal_tontine(mortality, economic, pool)?,
            u_curve,
            indifference_loading: delta,
            indifference_loading_bp: round_half_even(1e4 * delta, 2),
            loading_bound: loading_bound(mortality, economic, pool)?,
            bound_applies: gamma > 1.0 && gamma <= 2.0,
            ce_ratio,
            notes,
        })
    }
}
