//! Life annuity quotes and tontine payout curves.
//!
//! A payout curve `d(t)` is the rate paid to the whole pool per initial
//! dollar. Every curve built here satisfies the budget constraint
//! `∫ e^{-rt} d(t) dt = 1` over its horizon; the residual is measured at
//! construction and kept on the curve.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::binomial::{PoolSpec, MIN_PROBABILITY};
use crate::error::{Result, TontineError};
use crate::mortality::SurvivalModel;
use crate::quadrature::{discounted_integral, discounted_integral_to, effective_horizon, EconomicBasis, Horizon};

/// Construction fails when the budget residual exceeds this.
pub const BUDGET_HARD_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnuityQuote {
    /// Fair payout rate per dollar per year.
    pub c0: f64,
    /// Fraction of the deposit withheld up front.
    pub loading: f64,
    /// `(1 - loading) * c0`.
    pub c_loaded: f64,
}

impl AnnuityQuote {
    pub fn with_loading(&self, loading: f64) -> Result<AnnuityQuote> {
        check_loading(loading)?;
        Ok(AnnuityQuote {
            c0: self.c0,
            loading,
            c_loaded: (1.0 - loading) * self.c0,
        })
    }
}

pub(crate) fn check_loading(loading: f64) -> Result<()> {
    if !(0.0..1.0).contains(&loading) {
        return Err(TontineError::Domain(format!("loading {loading} is outside [0, 1)")));
    }
    Ok(())
}

/// `c0 = [∫ e^{-rt} tpx dt]^{-1}` over the basis horizon.
pub fn fair_annuity(mortality: &dyn SurvivalModel, economic: &EconomicBasis) -> Result<AnnuityQuote> {
    let factor = discounted_integral(economic, mortality, |p| p)?;
    let c0 = 1.0 / factor;
    Ok(AnnuityQuote {
        c0,
        loading: 0.0,
        c_loaded: c0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveKind {
    Flat,
    Natural,
    Optimal,
    /// The `γ -> ∞` limit of the optimal curve, which is the flat curve.
    PerpetuityLimit,
}

impl CurveKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CurveKind::Flat => "flat",
            CurveKind::Natural => "natural",
            CurveKind::Optimal => "optimal",
            CurveKind::PerpetuityLimit => "perpetuity-limit",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PayoutCurve {
    kind: CurveKind,
    scale: f64,
    pool: Option<PoolSpec>,
    mortality: Arc<dyn SurvivalModel>,
    economic: EconomicBasis,
    budget_residual: f64,
}

/// One line of a tabulated curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveRow {
    pub t: f64,
    pub age: f64,
    pub survival: f64,
    pub rate: f64,
    pub depletion: f64,
}

impl PayoutCurve {
    fn build(
        kind: CurveKind,
        scale: f64,
        pool: Option<PoolSpec>,
        mortality: Arc<dyn SurvivalModel>,
        economic: EconomicBasis,
    ) -> Result<PayoutCurve> {
        let mut curve = PayoutCurve {
            kind,
            scale,
            pool,
            mortality,
            economic,
            budget_residual: f64::NAN,
        };
        let spent = curve.depletion(f64::INFINITY)?;
        curve.budget_residual = (spent - 1.0).abs();
        if curve.budget_residual.is_nan() || curve.budget_residual > BUDGET_HARD_LIMIT {
            return Err(TontineError::Budget {
                residual: curve.budget_residual,
            });
        }
        Ok(curve)
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    /// `d(0)`: `c0` for the natural curve, `D(1)` for the optimal one.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn pool(&self) -> Option<PoolSpec> {
        self.pool
    }

    pub fn economic(&self) -> &EconomicBasis {
        &self.economic
    }

    pub fn mortality(&self) -> &dyn SurvivalModel {
        self.mortality.as_ref()
    }

    pub fn budget_residual(&self) -> f64 {
        self.budget_residual
    }

    /// Payout rate as a function of the survival probability, `D(p)`.
    pub fn rate_at_survival(&self, p: f64) -> f64 {
        let shape = match self.kind {
            CurveKind::Flat | CurveKind::PerpetuityLimit => 1.0,
            CurveKind::Natural => p,
            CurveKind::Optimal => self
                .pool
                .expect("optimal curves carry their pool")
                .beta_root_unchecked(p),
        };
        self.scale * shape
    }

    pub fn survival(&self, t: f64) -> f64 {
        self.mortality.survival(t)
    }

    /// `d(t)`; zero after a capped horizon.
    pub fn rate(&self, t: f64) -> f64 {
        if let Horizon::Capped(cap) = self.economic.horizon() {
            if t > cap {
                return 0.0;
            }
        }
        self.rate_at_survival(self.survival(t))
    }

    /// `Δ(t) = ∫_0^t e^{-rs} d(s) ds`, the share of the initial capital spent
    /// by time `t`.
    pub fn depletion(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(TontineError::Domain(format!("time {t} must be >= 0")));
        }
        discounted_integral_to(&self.economic, self.mortality.as_ref(), t, |p| {
            self.rate_at_survival(p)
        })
    }

    /// Tabulates the curve every `step` years up to `until` years.
    pub fn table(&self, step: f64, until: f64) -> Result<Vec<CurveRow>> {
        if !(step.is_finite() && step > 0.0) {
            return Err(TontineError::invalid("step", format!("{step} must be > 0")));
        }
        if !(until.is_finite() && until >= 0.0) {
            return Err(TontineError::invalid("until", format!("{until} must be >= 0")));
        }
        let count = (until / step + 1e-9).floor() as usize;
        (0..=count)
            .map(|i| {
                let t = step * i as f64;
                Ok(CurveRow {
                    t,
                    age: self.mortality.age() + t,
                    survival: self.survival(t),
                    rate: self.rate(t),
                    depletion: self.depletion(t)?,
                })
            })
            .collect()
    }
}

/// Constant aggregate payout `d0`: `r` on an infinite horizon,
/// `r / (1 - e^{-rT})` when capped.
pub fn flat_tontine<M>(mortality: &M, economic: &EconomicBasis) -> Result<PayoutCurve>
where
    M: SurvivalModel + Clone + 'static,
{
    let d0 = 1.0 / economic.certain_annuity();
    PayoutCurve::build(CurveKind::Flat, d0, None, Arc::new(mortality.clone()), *economic)
}

/// The flat curve, labelled as the infinite-risk-aversion optimum.
pub fn perpetuity_limit<M>(mortality: &M, economic: &EconomicBasis) -> Result<PayoutCurve>
where
    M: SurvivalModel + Clone + 'static,
{
    let d0 = 1.0 / economic.certain_annuity();
    PayoutCurve::build(
        CurveKind::PerpetuityLimit,
        d0,
        None,
        Arc::new(mortality.clone()),
        *economic,
    )
}

/// `d(t) = c0 tpx`.
pub fn natural_tontine<M>(mortality: &M, economic: &EconomicBasis) -> Result<PayoutCurve>
where
    M: SurvivalModel + Clone + 'static,
{
    let quote = fair_annuity(mortality, economic)?;
    PayoutCurve::build(
        CurveKind::Natural,
        quote.c0,
        None,
        Arc::new(mortality.clone()),
        *economic,
    )
}

/// `d(t) = D(1) β(tpx)^{1/γ}` with `D(1) = [∫ e^{-rt} β(tpx)^{1/γ} dt]^{-1}`.
///
/// Logarithmic utility dispatches to the natural curve.
pub fn optimal_tontine<M>(mortality: &M, economic: &EconomicBasis, pool: &PoolSpec) -> Result<PayoutCurve>
where
    M: SurvivalModel + Clone + 'static,
{
    if pool.is_logarithmic() {
        let mut curve = natural_tontine(mortality, economic)?;
        curve.pool = Some(*pool);
        return Ok(curve);
    }
    let factor = optimal_factor(mortality, economic, pool)?;
    PayoutCurve::build(
        CurveKind::Optimal,
        1.0 / factor,
        Some(*pool),
        Arc::new(mortality.clone()),
        *economic,
    )
}

/// `∫ e^{-rt} β(tpx)^{1/γ} dt`, i.e. `1 / D(1)`.
pub fn optimal_factor(mortality: &dyn SurvivalModel, economic: &EconomicBasis, pool: &PoolSpec) -> Result<f64> {
    discounted_integral(economic, mortality, |p| pool.beta_root_unchecked(p))
}

/// `n d / N`: what each of `survivors` members receives.
pub fn individual_dividend(pool_rate: f64, n: u64, survivors: u64) -> Result<f64> {
    if survivors == 0 || survivors > n {
        return Err(TontineError::Domain(format!(
            "{survivors} survivors is outside 1..={n}"
        )));
    }
    Ok(n as f64 * pool_rate / survivors as f64)
}

/// Largest relative violation of the CRRA first-order condition
/// `d(p)^{-γ} p θ(p) = λ` with `λ = d(1)^{-γ}`, over survival levels
/// reached within the curve's horizon.
pub fn euler_lagrange_residual(curve: &PayoutCurve, pool: &PoolSpec) -> Result<f64> {
    const NODES: usize = 400;
    let gamma = pool.gamma();
    let log_lambda = -gamma * curve.rate_at_survival(1.0).ln();
    let horizon = effective_horizon(curve.economic(), curve.mortality());
    let mut worst = 0.0f64;
    for i in 0..=NODES {
        let t = horizon * i as f64 / NODES as f64;
        let p = curve.survival(t);
        if p < MIN_PROBABILITY {
            continue;
        }
        let d = curve.rate_at_survival(p);
        if d.is_nan() || d <= 0.0 {
            continue;
        }
        let lhs = -gamma * d.ln() + p.ln() + pool.log_theta(p);
        worst = worst.max((lhs - log_lambda).exp_m1().abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mortality::MortalityBasis;
    use approx::assert_relative_eq;

    #[derive(Debug, Clone)]
    struct Immortal;

    impl SurvivalModel for Immortal {
        fn age(&self) -> f64 {
            0.0
        }
        fn hazard_rate(&self, _t: f64) -> Result<f64> {
            Ok(0.0)
        }
        fn log_survival(&self, _t: f64) -> f64 {
            0.0
        }
    }

    fn table1() -> (MortalityBasis, EconomicBasis) {
        (
            MortalityBasis::new(65.0, 88.72, 10.0).unwrap(),
            EconomicBasis::infinite(0.04).unwrap(),
        )
    }

    #[test]
    fn fair_annuity_on_table_one_basis() {
        let (m, e) = table1();
        let q = fair_annuity(&m, &e).unwrap();
        assert!((q.c0 - 0.0752).abs() < 5e-5, "{}", q.c0);
        assert!((q.c0 - 0.075).abs() < 5e-4);
        assert!(q.c0 > e.rate());
    }

    #[test]
    fn immortal_annuity_is_perpetuity() {
        let e = EconomicBasis::infinite(0.05).unwrap();
        let q = fair_annuity(&Immortal, &e).unwrap();
        assert_relative_eq!(q.c0, 0.05, max_relative = 1e-9);
    }

    #[test]
    fn loading_scales_payout() {
        let (m, e) = table1();
        let q = fair_annuity(&m, &e).unwrap().with_loading(0.1).unwrap();
        assert_eq!(q.c_loaded, 0.9 * q.c0);
        assert!(fair_annuity(&m, &e).unwrap().with_loading(1.0).is_err());
    }

    #[test]
    fn flat_curve_rates() {
        let (m, e) = table1();
        let flat = flat_tontine(&m, &e).unwrap();
        assert_relative_eq!(flat.rate(0.0), 0.04, max_relative = 1e-15);
        assert_relative_eq!(flat.rate(33.0), 0.04, max_relative = 1e-15);
        assert!(flat.budget_residual() < 1e-10);
        let capped = flat_tontine(&m, &EconomicBasis::capped(0.04, 30.0).unwrap()).unwrap();
        assert_relative_eq!(capped.rate(1.0), 0.04 / (1.0 - (-1.2f64).exp()), max_relative = 1e-14);
        assert_eq!(capped.rate(31.0), 0.0);
        let far = flat_tontine(&m, &EconomicBasis::capped(0.03, 2000.0).unwrap()).unwrap();
        assert_relative_eq!(far.scale(), 0.03, max_relative = 1e-12);
    }

    #[test]
    fn flat_depletion_closed_form() {
        let (m, e) = table1();
        let flat = flat_tontine(&m, &e).unwrap();
        assert_eq!(flat.depletion(0.0).unwrap(), 0.0);
        assert_relative_eq!(flat.depletion(10.0).unwrap(), 1.0 - (-0.4f64).exp(), max_relative = 1e-12);
        assert!((flat.depletion(f64::INFINITY).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn natural_curve_starts_at_annuity_rate() {
        let (m, e) = table1();
        let nat = natural_tontine(&m, &e).unwrap();
        let c0 = fair_annuity(&m, &e).unwrap().c0;
        assert_eq!(nat.rate(0.0), c0);
        assert_relative_eq!(nat.rate(15.0), c0 * m.survival(15.0), max_relative = 1e-15);
        assert!((nat.rate(15.0) - 0.0752 * 0.722).abs() < 1e-4);
    }

    #[test]
    fn optimal_log_utility_is_natural() {
        let (m, e) = table1();
        let nat = natural_tontine(&m, &e).unwrap();
        for n in [1, 25, 1000] {
            let opt = optimal_tontine(&m, &e, &PoolSpec::new(n, 1.0).unwrap()).unwrap();
            for t in [0.0, 7.5, 30.0, 50.0] {
                assert!((opt.rate(t) - nat.rate(t)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn optimal_curve_table_one_rows() {
        let (m, e) = table1();
        let cases = [(0.5, [7.565, 5.446, 1.200]), (9.0, [7.081, 5.394, 1.847])];
        for (gamma, row) in cases {
            let curve = optimal_tontine(&m, &e, &PoolSpec::new(25, gamma).unwrap()).unwrap();
            for (t, printed) in [0.0, 15.0, 30.0].into_iter().zip(row) {
                let pct = 100.0 * curve.rate(t);
                assert!((pct - printed).abs() <= 0.005, "gamma {gamma} t {t}: {pct}");
            }
        }
    }

    #[test]
    fn euler_lagrange_identity() {
        let (m, e) = table1();
        let pool = PoolSpec::new(25, 2.0).unwrap();
        let opt = optimal_tontine(&m, &e, &pool).unwrap();
        assert!(euler_lagrange_residual(&opt, &pool).unwrap() <= 1e-8);
        let nat = natural_tontine(&m, &e).unwrap();
        assert!(euler_lagrange_residual(&nat, &pool).unwrap() > 1e-3);
        let flat = flat_tontine(&m, &e).unwrap();
        let log_pool = PoolSpec::new(25, 1.0).unwrap();
        assert!(euler_lagrange_residual(&flat, &log_pool).unwrap() > 1e-3);
    }

    #[test]
    fn individual_dividend_worked_example() {
        // a 3% flat tontine, 1000 subscribers, 800 still alive
        assert_relative_eq!(individual_dividend(0.03, 1000, 800).unwrap(), 0.0375, max_relative = 1e-15);
        assert!(individual_dividend(0.03, 1000, 0).is_err());
        assert!(individual_dividend(0.03, 10, 11).is_err());
    }

    #[test]
    fn table_rows_track_depletion() {
        let (m, e) = table1();
        let curve = optimal_tontine(&m, &e, &PoolSpec::new(100, 2.0).unwrap()).unwrap();
        let rows = curve.table(5.0, 35.0).unwrap();
        assert_eq!(rows.len(), 8);
        assert_eq!(rows[0].depletion, 0.0);
        assert!(rows.windows(2).all(|w| w[1].depletion > w[0].depletion && w[1].rate < w[0].rate));
        assert_eq!(rows[7].age, 100.0);
    }
}
