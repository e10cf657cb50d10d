//! What a surviving member actually receives: percentile fans of the
//! individual dividend `n d(t) / N(t)` and a Monte Carlo cross-check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::binomial::{binomial_cdf, expected_reciprocal_with_limit, CompensatedSum};
use crate::error::{Result, TontineError};
use crate::products::PayoutCurve;

/// Percentile levels used when none are requested.
pub const DEFAULT_LEVELS: [f64; 3] = [0.1, 0.5, 0.9];

/// Paths simulated per independent random stream.
const CHUNK: usize = 2048;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PayoutFan {
    pub n: u64,
    pub age: f64,
    pub times: Vec<f64>,
    pub levels: Vec<f64>,
    /// `quantiles[i][j]`: level `levels[j]` of the dividend at `times[i]`.
    pub quantiles: Vec<Vec<f64>>,
    /// Expected dividend given the member is alive.
    pub central: Vec<f64>,
}

/// One long-format line of a fan; `level` is empty for the central value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FanRecord {
    pub t: f64,
    pub age: f64,
    pub level: Option<f64>,
    pub dividend: f64,
}

impl PayoutFan {
    pub fn records(&self) -> Vec<FanRecord> {
        let mut out = Vec::with_capacity(self.times.len() * (self.levels.len() + 1));
        for (i, &t) in self.times.iter().enumerate() {
            for (j, &level) in self.levels.iter().enumerate() {
                out.push(FanRecord {
                    t,
                    age: self.age + t,
                    level: Some(level),
                    dividend: self.quantiles[i][j],
                });
            }
            out.push(FanRecord {
                t,
                age: self.age + t,
                level: None,
                dividend: self.central[i],
            });
        }
        out
    }
}

fn check_inputs(n: u64, levels: &[f64], times: &[f64]) -> Result<()> {
    if n == 0 {
        return Err(TontineError::invalid("n", "pool size must be at least 1"));
    }
    if times.is_empty() {
        return Err(TontineError::Domain("time grid is empty".into()));
    }
    if levels.is_empty() {
        return Err(TontineError::Domain("no percentile levels requested".into()));
    }
    if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(TontineError::Domain(format!("time {t} must be finite and >= 0")));
    }
    if let Some(q) = levels.iter().find(|q| !(**q > 0.0 && **q < 1.0)) {
        return Err(TontineError::Domain(format!("level {q} is outside (0, 1)")));
    }
    Ok(())
}

/// Exact percentile fan from the survivor distribution `N - 1 ~ Bin(n - 1, tpx)`.
///
/// The dividend falls as `N` rises, so its `q` quantile sits at the `1 - q`
/// quantile of `N`.
pub fn dividend_fan(curve: &PayoutCurve, n: u64, levels: &[f64], times: &[f64]) -> Result<PayoutFan> {
    check_inputs(n, levels, times)?;
    let nf = n as f64;
    let mut quantiles = Vec::with_capacity(times.len());
    let mut central = Vec::with_capacity(times.len());
    for &t in times {
        let p = curve.survival(t);
        let pot = nf * curve.rate(t);
        let cdf = binomial_cdf(n - 1, p);
        let row = levels
            .iter()
            .map(|&q| {
                // smallest dividend v with P(D <= v) >= q
                let k = cdf[..cdf.len() - 1].iter().take_while(|&&f| f <= 1.0 - q).count();
                pot / (k as f64 + 1.0)
            })
            .collect();
        quantiles.push(row);
        central.push(curve.rate(t) * expected_reciprocal_with_limit(n, p)?);
    }
    Ok(PayoutFan {
        n,
        age: curve.mortality().age(),
        times: times.to_vec(),
        levels: levels.to_vec(),
        quantiles,
        central,
    })
}

/// Empirical dividend statistics from simulated cohorts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulatedFan {
    pub n: u64,
    pub age: f64,
    pub paths: usize,
    pub seed: u64,
    pub times: Vec<f64>,
    pub levels: Vec<f64>,
    pub quantiles: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
}

/// Simulates `paths` cohorts of `n` members in which one designated member
/// is alive throughout; the other `n - 1` lifetimes are drawn independently
/// from the curve's survival law.
///
/// Paths are split into fixed-size chunks, each with its own ChaCha stream
/// derived from `seed`, so results do not depend on the thread count.
pub fn simulate_cohort(
    curve: &PayoutCurve,
    n: u64,
    paths: usize,
    seed: u64,
    levels: &[f64],
    times: &[f64],
) -> Result<SimulatedFan> {
    check_inputs(n, levels, times)?;
    if paths == 0 {
        return Err(TontineError::invalid("paths", "need at least one path"));
    }
    let survival: Vec<f64> = times.iter().map(|&t| curve.survival(t)).collect();
    let pots: Vec<f64> = times.iter().map(|&t| n as f64 * curve.rate(t)).collect();
    let others = (n - 1) as usize;
    let chunks = paths.div_ceil(CHUNK);

    // survivors[path * times + i]
    let survivors: Vec<u32> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(paths - c * CHUNK);
            let mut uniforms = vec![0.0f64; others];
            let mut out = Vec::with_capacity(count * times.len());
            for _ in 0..count {
                // member j is alive at t iff U_j < tpx
                for u in uniforms.iter_mut() {
                    *u = rng.random::<f64>();
                }
                uniforms.sort_unstable_by(f64::total_cmp);
                for &p in &survival {
                    out.push(1 + uniforms.partition_point(|&u| u < p) as u32);
                }
            }
            out
        })
        .flatten_iter()
        .collect();

    let width = times.len();
    let mut quantiles = Vec::with_capacity(width);
    let mut mean = Vec::with_capacity(width);
    let mut sample = vec![0.0f64; paths];
    for i in 0..width {
        let mut total = CompensatedSum::default();
        for (path, slot) in sample.iter_mut().enumerate() {
            *slot = pots[i] / survivors[path * width + i] as f64;
            total.add(*slot);
        }
        mean.push(total.value() / paths as f64);
        sample.sort_unstable_by(f64::total_cmp);
        quantiles.push(levels.iter().map(|&q| empirical_quantile(&sample, q)).collect());
    }
    Ok(SimulatedFan {
        n,
        age: curve.mortality().age(),
        paths,
        seed,
        times: times.to_vec(),
        levels: levels.to_vec(),
        quantiles,
        mean,
    })
}

/// Smallest sample value whose empirical CDF reaches `q`.
fn empirical_quantile(sorted: &[f64], q: f64) -> f64 {
    let m = sorted.len();
    let rank = ((q * m as f64).ceil() as usize).clamp(1, m);
    sorted[rank - 1]
}
