//! Survivor-count moments for a pool of `n` equal subscribers.
//!
//! Conditional on a given member being alive, the number of live members is
//! `N(p) = 1 + K` with `K ~ Bin(n - 1, p)`. Every tontine formula reduces to
//! expectations of simple functions of `N(p)/n`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TontineError};

/// Above this pool size moments are accumulated in log space.
pub const LOG_SPACE_THRESHOLD: u64 = 10_000;

/// Risk aversions this close to one use the logarithmic-utility branch.
pub const LOG_UTILITY_TOLERANCE: f64 = 1e-8;

/// Survival probabilities below this are treated as zero.
pub const MIN_PROBABILITY: f64 = 1e-300;

/// Relative size at which a binomial tail term stops contributing.
const TAIL_EPS: f64 = 1e-18;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPool", into = "RawPool")]
pub struct PoolSpec {
    n: u64,
    gamma: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPool {
    n: u64,
    gamma: f64,
}

impl TryFrom<RawPool> for PoolSpec {
    type Error = TontineError;

    fn try_from(raw: RawPool) -> Result<Self> {
        PoolSpec::new(raw.n, raw.gamma)
    }
}

impl From<PoolSpec> for RawPool {
    fn from(pool: PoolSpec) -> Self {
        RawPool {
            n: pool.n,
            gamma: pool.gamma,
        }
    }
}

impl PoolSpec {
    pub fn new(n: u64, gamma: f64) -> Result<Self> {
        if n == 0 {
            return Err(TontineError::invalid("n", "pool size must be at least 1"));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(TontineError::invalid(
                "gamma",
                format!("{gamma} must be finite and > 0"),
            ));
        }
        Ok(PoolSpec { n, gamma })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn is_logarithmic(&self) -> bool {
        (self.gamma - 1.0).abs() < LOG_UTILITY_TOLERANCE
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        PoolSpec::new(self.n, gamma)
    }

    /// `θ(p) = E[(n/N(p))^(1-γ)]`.
    pub fn theta(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        if self.is_logarithmic() {
            return Ok(1.0);
        }
        if self.n > LOG_SPACE_THRESHOLD {
            return Ok(self.log_theta_unchecked(p).exp());
        }
        let direct = self.theta_direct(p);
        if direct > 1e-290 {
            Ok(direct)
        } else {
            Ok(self.log_theta_unchecked(p).exp())
        }
    }

    /// `β(p) = p θ(p)`.
    pub fn beta(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        if p < MIN_PROBABILITY {
            return Ok(0.0);
        }
        Ok(p * self.theta(p)?)
    }

    /// `β(p)^(1/γ)`, evaluated as `exp(log β / γ)`.
    pub fn beta_root(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        Ok(self.beta_root_unchecked(p))
    }

    /// `β'(p) = n^(1-γ) E[N^γ - (N-1)^γ]`.
    pub fn beta_derivative(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        if self.is_logarithmic() {
            return Ok(1.0);
        }
        let n = self.n as f64;
        let g = self.gamma;
        let mean = weighted_mean(self.n - 1, p, |k| {
            let k = k as f64;
            ((k + 1.0) / n).powf(g) - (k / n).powf(g)
        });
        Ok(n * mean)
    }

    pub(crate) fn beta_root_unchecked(&self, p: f64) -> f64 {
        if p < MIN_PROBABILITY {
            return 0.0;
        }
        if self.is_logarithmic() {
            return p;
        }
        let log_beta = p.ln() + self.log_theta(p);
        (log_beta / self.gamma).exp()
    }

    /// `log θ(p)`, robust against underflow for very large `γ`.
    pub(crate) fn log_theta(&self, p: f64) -> f64 {
        if self.is_logarithmic() {
            return 0.0;
        }
        if self.n <= LOG_SPACE_THRESHOLD {
            let direct = self.theta_direct(p);
            if direct > 1e-290 {
                return direct.ln();
            }
        }
        self.log_theta_unchecked(p)
    }

    pub(crate) fn theta_direct(&self, p: f64) -> f64 {
        let n = self.n as f64;
        let e = self.gamma - 1.0;
        weighted_mean(self.n - 1, p, |k| ((k as f64 + 1.0) / n).powf(e))
    }

    pub(crate) fn log_theta_unchecked(&self, p: f64) -> f64 {
        let n = self.n as f64;
        let e = self.gamma - 1.0;
        log_weighted_mean(self.n - 1, p, |k| e * ((k as f64 + 1.0) / n).ln())
    }
}

/// `E[f(N(p))]` for `N(p) = 1 + Bin(n - 1, p)`.
pub fn survivor_expectation<F>(n: u64, p: f64, f: F) -> Result<f64>
where
    F: Fn(u64) -> f64,
{
    check_pool(n)?;
    check_probability(p)?;
    Ok(weighted_mean(n - 1, p, |k| f(k + 1)))
}

/// `E[n / N(p)] = (1 - (1-p)^n) / p`.
pub fn expected_reciprocal(n: u64, p: f64) -> Result<f64> {
    check_positive_probability(p)?;
    check_pool(n)?;
    // 1 - (1-p)^n without cancellation
    let mass = -((n as f64) * (-p).ln_1p()).exp_m1();
    Ok(mass / p)
}

/// As [`expected_reciprocal`], but returns the `p -> 0` limit `n` at zero.
pub fn expected_reciprocal_with_limit(n: u64, p: f64) -> Result<f64> {
    if p == 0.0 {
        check_pool(n)?;
        return Ok(n as f64);
    }
    expected_reciprocal(n, p)
}

/// `E[log(N(p)/n)]` by exact summation over the binomial pmf.
pub fn expected_log_ratio(n: u64, p: f64) -> Result<f64> {
    check_positive_probability(p)?;
    check_pool(n)?;
    let nf = n as f64;
    Ok(weighted_mean(n - 1, p, |k| ((k as f64 + 1.0) / nf).ln()))
}

/// `R(p) = β_γ1(p)^(1/γ1) / β_γ2(p)^(1/γ2)`.
pub fn r_ratio(n: u64, gamma1: f64, gamma2: f64, p: f64) -> Result<f64> {
    check_positive_probability(p)?;
    let a = PoolSpec::new(n, gamma1)?;
    let b = PoolSpec::new(n, gamma2)?;
    if a.gamma == b.gamma {
        return Ok(1.0);
    }
    let log_a = a.log_theta(p) / a.gamma + p.ln() / a.gamma;
    let log_b = b.log_theta(p) / b.gamma + p.ln() / b.gamma;
    Ok((log_a - log_b).exp())
}

fn check_pool(n: u64) -> Result<()> {
    if n == 0 {
        return Err(TontineError::invalid("n", "pool size must be at least 1"));
    }
    Ok(())
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(TontineError::Domain(format!("probability {p} is outside [0, 1]")));
    }
    Ok(())
}

fn check_positive_probability(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(TontineError::Domain(format!("probability {p} is outside (0, 1]")));
    }
    Ok(())
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn mode(trials: u64, p: f64) -> u64 {
    (((trials + 1) as f64 * p).floor() as u64).min(trials)
}

/// `E[w(K)]` for `K ~ Bin(trials, p)`.
///
/// Terms are generated by the multiplicative recurrence outward from the mode
/// (whose unnormalised weight is 1) and normalised at the end, so no binomial
/// coefficient or `p^k` is ever formed explicitly.
pub(crate) fn weighted_mean<W>(trials: u64, p: f64, weight: W) -> f64
where
    W: Fn(u64) -> f64,
{
    if trials == 0 || p <= 0.0 {
        return weight(0);
    }
    if p >= 1.0 {
        return weight(trials);
    }
    let odds = p / (1.0 - p);
    let m = mode(trials, p);

    let mut mass = CompensatedSum::default();
    let mut total = CompensatedSum::default();
    let w0 = weight(m);
    mass.add(1.0);
    total.add(w0);

    // upward
    let (mut u, mut prev) = (1.0f64, w0.abs());
    let mut k = m;
    while k < trials {
        u *= (trials - k) as f64 / (k + 1) as f64 * odds;
        k += 1;
        let term = u * weight(k);
        mass.add(u);
        total.add(term);
        if negligible(u, term, prev, &mass, &total) {
            break;
        }
        prev = term.abs();
    }

    // downward
    let (mut u, mut prev) = (1.0f64, w0.abs());
    let mut k = m;
    while k > 0 {
        u *= k as f64 / ((trials - k + 1) as f64 * odds);
        k -= 1;
        let term = u * weight(k);
        mass.add(u);
        total.add(term);
        if negligible(u, term, prev, &mass, &total) {
            break;
        }
        prev = term.abs();
    }

    total.value() / mass.value()
}

fn negligible(u: f64, term: f64, prev: f64, mass: &CompensatedSum, total: &CompensatedSum) -> bool {
    let term = term.abs();
    (u <= TAIL_EPS * mass.value() && term <= TAIL_EPS * total.value().abs() && term <= prev)
        || (u == 0.0 && term == 0.0)
}

/// Streaming `log Σ exp(x_i)`.
#[derive(Debug, Clone, Copy)]
struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl LogSumExp {
    fn new(x: f64) -> Self {
        LogSumExp { max: x, scaled: 1.0 }
    }

    fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.scaled += (x - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    fn value(&self) -> f64 {
        self.max + self.scaled.ln()
    }
}

/// `log E[exp(lw(K))]` for `K ~ Bin(trials, p)`, entirely in log space.
pub(crate) fn log_weighted_mean<W>(trials: u64, p: f64, log_weight: W) -> f64
where
    W: Fn(u64) -> f64,
{
    if trials == 0 || p <= 0.0 {
        return log_weight(0);
    }
    if p >= 1.0 {
        return log_weight(trials);
    }
    let log_odds = p.ln() - (-p).ln_1p();
    let m = mode(trials, p);
    let cutoff = TAIL_EPS.ln();

    let lw0 = log_weight(m);
    let mut mass = LogSumExp::new(0.0);
    let mut total = LogSumExp::new(lw0);

    let (mut lu, mut prev) = (0.0f64, lw0);
    let mut k = m;
    while k < trials {
        lu += ((trials - k) as f64 / (k + 1) as f64).ln() + log_odds;
        k += 1;
        let lt = lu + log_weight(k);
        mass.add(lu);
        total.add(lt);
        if lu - mass.value() <= cutoff && lt - total.value() <= cutoff && lt <= prev {
            break;
        }
        prev = lt;
    }

    let (mut lu, mut prev) = (0.0f64, lw0);
    let mut k = m;
    while k > 0 {
        lu += (k as f64 / (trials - k + 1) as f64).ln() - log_odds;
        k -= 1;
        let lt = lu + log_weight(k);
        mass.add(lu);
        total.add(lt);
        if lu - mass.value() <= cutoff && lt - total.value() <= cutoff && lt <= prev {
            break;
        }
        prev = lt;
    }

    total.value() - mass.value()
}

/// Cumulative distribution of `Bin(trials, p)` on its full support.
pub(crate) fn binomial_cdf(trials: u64, p: f64) -> Vec<f64> {
    let len = trials as usize + 1;
    if p <= 0.0 {
        return vec![1.0; len];
    }
    if p >= 1.0 {
        let mut cdf = vec![0.0; len];
        cdf[len - 1] = 1.0;
        return cdf;
    }
    let odds = p / (1.0 - p);
    let m = mode(trials, p);
    let mut u = vec![0.0; len];
    u[m as usize] = 1.0;
    let mut k = m;
    while k < trials {
        let next = u[k as usize] * (trials - k) as f64 / (k + 1) as f64 * odds;
        k += 1;
        u[k as usize] = next;
        if next == 0.0 {
            break;
        }
    }
    let mut k = m;
    while k > 0 {
        let next = u[k as usize] * k as f64 / ((trials - k + 1) as f64 * odds);
        k -= 1;
        u[k as usize] = next;
        if next == 0.0 {
            break;
        }
    }
    let mut total = CompensatedSum::default();
    for &x in &u {
        total.add(x);
    }
    let norm = total.value();
    let mut running = CompensatedSum::default();
    u.iter()
        .map(|&x| {
            running.add(x);
            (running.value() / norm).min(1.0)
        })
        .collect()
}
