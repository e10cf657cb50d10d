//! Survival models.
//!
//! Everything downstream consumes `log_survival` and exponentiates as late as
//! possible: Gompertz survival decays super-exponentially, and the pool
//! moments are evaluated at survival probabilities far below `1e-16`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TontineError};
use crate::roots::brent;

/// Tolerance (in years) for inverting the survival curve.
pub const INVERSE_TOLERANCE: f64 = 1e-12;

/// Any law supplying survival probabilities and a hazard rate for a single
/// cohort of age `age()`.
pub trait SurvivalModel: Send + Sync + std::fmt::Debug {
    /// Age of the cohort at time zero, in years.
    fn age(&self) -> f64;

    /// Force of mortality `t` years from now.
    fn hazard_rate(&self, t: f64) -> Result<f64>;

    /// `log P(alive at t)`; finite for every finite `t >= 0`.
    fn log_survival(&self, t: f64) -> f64;

    fn survival(&self, t: f64) -> f64 {
        self.log_survival(t).exp()
    }

    /// Time at which the survival probability first equals `p`.
    ///
    /// Bracketed root search on `log_survival(t) - log p`.
    fn time_for_survival(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(TontineError::Domain(format!(
                "survival probability {p} is outside (0, 1]"
            )));
        }
        if p == 1.0 {
            return Ok(0.0);
        }
        let target = p.ln();
        let mut hi = 1.0;
        while self.log_survival(hi) > target {
            hi *= 2.0;
            if hi > 1e6 {
                return Err(TontineError::Root(format!(
                    "survival never drops to {p} within {hi} years"
                )));
            }
        }
        brent(
            |t| self.log_survival(t) - target,
            0.0,
            hi,
            INVERSE_TOLERANCE,
            200,
        )
    }
}

/// Gompertz law with modal age `m` and dispersion `b`, viewed from age `x`.
///
/// Hazard `(1/b) exp((x + t - m)/b)`, hence
/// `log tpx = exp((x - m)/b) (1 - exp(t/b))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGompertz", into = "RawGompertz")]
pub struct MortalityBasis {
    age: f64,
    modal: f64,
    dispersion: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGompertz {
    age: f64,
    m: f64,
    b: f64,
}

impl TryFrom<RawGompertz> for MortalityBasis {
    type Error = TontineError;

    fn try_from(raw: RawGompertz) -> Result<Self> {
        MortalityBasis::new(raw.age, raw.m, raw.b)
    }
}

impl From<MortalityBasis> for RawGompertz {
    fn from(basis: MortalityBasis) -> Self {
        RawGompertz {
            age: basis.age,
            m: basis.modal,
            b: basis.dispersion,
        }
    }
}

impl MortalityBasis {
    pub fn new(age: f64, modal: f64, dispersion: f64) -> Result<Self> {
        if !(age.is_finite() && age >= 0.0) {
            return Err(TontineError::invalid("age", format!("{age} must be finite and >= 0")));
        }
        if !modal.is_finite() {
            return Err(TontineError::invalid("m", format!("{modal} must be finite")));
        }
        if !(dispersion.is_finite() && dispersion > 0.0) {
            return Err(TontineError::invalid("b", format!("{dispersion} must be finite and > 0")));
        }
        Ok(MortalityBasis {
            age,
            modal,
            dispersion,
        })
    }

    pub fn modal(&self) -> f64 {
        self.modal
    }

    pub fn dispersion(&self) -> f64 {
        self.dispersion
    }

    /// Same law seen from a different starting age.
    pub fn at_age(&self, age: f64) -> Result<Self> {
        MortalityBasis::new(age, self.modal, self.dispersion)
    }

    /// Closed-form inverse of the survival curve.
    ///
    /// Not used by the engine (which follows the trait's bracketed search) but
    /// handy for simulation-heavy callers and as an oracle.
    pub fn time_for_survival_closed_form(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(TontineError::Domain(format!(
                "survival probability {p} is outside (0, 1]"
            )));
        }
        let scale = ((self.modal - self.age) / self.dispersion).exp();
        Ok(self.dispersion * (-p.ln() * scale).ln_1p())
    }
}

impl SurvivalModel for MortalityBasis {
    fn age(&self) -> f64 {
        self.age
    }

    fn hazard_rate(&self, t: f64) -> Result<f64> {
        if !t.is_finite() {
            return Err(TontineError::invalid("t", format!("{t} is not finite")));
        }
        Ok(((self.age + t - self.modal) / self.dispersion).exp() / self.dispersion)
    }

    fn log_survival(&self, t: f64) -> f64 {
        let b = self.dispersion;
        -((self.age - self.modal) / b).exp() * (t / b).exp_m1()
    }
}
