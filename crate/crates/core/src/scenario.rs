//! Declarative scenarios: one TOML document per table or figure basis, and
//! the CSV/JSON artifacts a run produces.
//!
//! ```toml
//! name = "table1"
//! products = ["optimal", "natural"]
//!
//! [mortality]
//! age = 65
//! m = 88.72
//! b = 10
//!
//! [economic]
//! r = 0.04
//! # cap_age = 100
//!
//! [pool_grid]
//! n = [25]
//! gamma = [0.5, 1, 1.5, 2, 4, 9]
//!
//! [outputs.payout_table]
//! ages = [65, 80, 95]
//! ```

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binomial::PoolSpec;
use crate::error::{Result, TontineError};
use crate::mortality::{MortalityBasis, SurvivalModel};
use crate::pool_outcomes::{dividend_fan, simulate_cohort, DEFAULT_LEVELS};
use crate::products::{fair_annuity, flat_tontine, natural_tontine, optimal_tontine, AnnuityQuote, PayoutCurve};
use crate::quadrature::{EconomicBasis, Horizon};
use crate::welfare::WelfareReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Product {
    Flat,
    Natural,
    Optimal,
    Annuity,
}

impl Product {
    pub fn as_str(&self) -> &'static str {
        match self {
            Product::Flat => "flat",
            Product::Natural => "natural",
            Product::Optimal => "optimal",
            Product::Annuity => "annuity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconomicSection {
    pub r: f64,
    /// Last age at which payments are made.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap_age: Option<f64>,
    /// Same cap expressed in years from issue.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon_years: Option<f64>,
    /// Annual-in-advance valuation over this many payment dates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annual_terms: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoolGrid {
    pub n: Vec<u64>,
    pub gamma: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoutTableSpec {
    pub ages: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FanSpec {
    pub ages: Vec<f64>,
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
    /// Monte Carlo paths; zero skips the simulation.
    #[serde(default)]
    pub paths: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_levels() -> Vec<f64> {
    DEFAULT_LEVELS.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WelfareSpec {
    /// Loading applied to the annuity in `u_loaded_annuity`.
    #[serde(default)]
    pub annuity_loading: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepletionSpec {
    #[serde(default = "default_step")]
    pub step: f64,
    pub until_age: f64,
}

fn default_step() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payout_table: Option<PayoutTableSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fan: Option<FanSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub welfare: Option<WelfareSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depletion: Option<DepletionSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    mortality: MortalityBasis,
    economic: EconomicSection,
    #[serde(default)]
    pools: Vec<PoolSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pool_grid: Option<PoolGrid>,
    products: Vec<Product>,
    #[serde(default)]
    outputs: Outputs,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    scenario: Vec<RawScenario>,
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub mortality: MortalityBasis,
    pub economic: EconomicBasis,
    pub pools: Vec<PoolSpec>,
    pub products: Vec<Product>,
    pub outputs: Outputs,
}

impl Scenario {
    /// Canonical TOML form; parsing it gives back the same scenario.
    pub fn to_toml(&self) -> Result<String> {
        let horizon_years = match self.economic.horizon() {
            Horizon::Capped(t) => Some(t),
            Horizon::Infinite => None,
        };
        let annual_terms = match self.economic.valuation() {
            crate::quadrature::Valuation::AnnualGrid { terms } => Some(terms),
            crate::quadrature::Valuation::Continuous => None,
        };
        let raw = RawScenario {
            name: self.name.clone(),
            mortality: self.mortality,
            economic: EconomicSection {
                r: self.economic.rate(),
                cap_age: None,
                horizon_years,
                annual_terms,
            },
            pools: self.pools.clone(),
            pool_grid: None,
            products: self.products.clone(),
            outputs: self.outputs.clone(),
        };
        toml::to_string(&raw).map_err(|e| TontineError::config("", e.to_string()))
    }
}

fn deserialize<'de, T: Deserialize<'de>>(text: &'de str) -> Result<T> {
    let de = toml::Deserializer::parse(text).map_err(|e| TontineError::config("", e.to_string()))?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let message = e.into_inner().to_string();
        TontineError::config(path, message.trim().to_string())
    })
}

/// Parses a single-scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    validate(deserialize::<RawScenario>(text)?, "")
}

/// Parses either a single scenario or a `[[scenario]]` list; names must be
/// unique.
pub fn parse_run(text: &str) -> Result<Vec<Scenario>> {
    let table: toml::Table = toml::from_str(text).map_err(|e| TontineError::config("", e.to_string()))?;
    let scenarios = if table.contains_key("scenario") {
        let raw: RawRun = deserialize(text)?;
        raw.scenario
            .into_iter()
            .enumerate()
            .map(|(i, s)| validate(s, &format!("scenario[{i}].")))
            .collect::<Result<Vec<_>>>()?
    } else {
        vec![parse_scenario(text)?]
    };
    let mut seen = BTreeSet::new();
    for (i, s) in scenarios.iter().enumerate() {
        if !seen.insert(s.name.as_str()) {
            return Err(TontineError::config(
                format!("scenario[{i}].name"),
                format!("duplicate scenario name `{}`", s.name),
            ));
        }
    }
    Ok(scenarios)
}

fn validate(raw: RawScenario, prefix: &str) -> Result<Scenario> {
    let at = |field: &str| format!("{prefix}{field}");
    if raw.name.trim().is_empty() {
        return Err(TontineError::config(at("name"), "name is empty"));
    }
    let e = &raw.economic;
    if e.cap_age.is_some() && e.horizon_years.is_some() {
        return Err(TontineError::config(
            at("economic"),
            "give at most one of cap_age and horizon_years",
        ));
    }
    let horizon = match (e.cap_age, e.horizon_years) {
        (Some(cap), _) => Horizon::Capped(cap - raw.mortality.age()),
        (_, Some(t)) => Horizon::Capped(t),
        _ => Horizon::Infinite,
    };
    let mut economic =
        EconomicBasis::new(e.r, horizon).map_err(|err| TontineError::config(at("economic"), err.to_string()))?;
    if let Some(terms) = e.annual_terms {
        economic = economic
            .with_annual_grid(terms)
            .map_err(|err| TontineError::config(at("economic.annual_terms"), err.to_string()))?;
    }

    let mut pools = raw.pools;
    if let Some(grid) = raw.pool_grid {
        for &gamma in &grid.gamma {
            for &n in &grid.n {
                pools.push(PoolSpec::new(n, gamma).map_err(|err| TontineError::config(at("pool_grid"), err.to_string()))?);
            }
        }
    }
    if pools.is_empty() {
        return Err(TontineError::config(at("pools"), "at least one pool is required"));
    }
    if raw.products.is_empty() {
        return Err(TontineError::config(at("products"), "at least one product is required"));
    }
    let distinct: BTreeSet<_> = raw.products.iter().collect();
    if distinct.len() != raw.products.len() {
        return Err(TontineError::config(at("products"), "products are listed twice"));
    }

    let age = raw.mortality.age();
    let o = &raw.outputs;
    if let Some(t) = &o.payout_table {
        check_ages(&t.ages, age, &at("outputs.payout_table.ages"))?;
    }
    if let Some(f) = &o.fan {
        check_ages(&f.ages, age, &at("outputs.fan.ages"))?;
        if f.levels.is_empty() || f.levels.iter().any(|q| !(*q > 0.0 && *q < 1.0)) {
            return Err(TontineError::config(at("outputs.fan.levels"), "levels must lie in (0, 1)"));
        }
    }
    if let Some(w) = &o.welfare {
        if !(0.0..1.0).contains(&w.annuity_loading) {
            return Err(TontineError::config(
                at("outputs.welfare.annuity_loading"),
                "loading must lie in [0, 1)",
            ));
        }
    }
    if let Some(d) = &o.depletion {
        if !(d.step.is_finite() && d.step > 0.0) {
            return Err(TontineError::config(at("outputs.depletion.step"), "step must be > 0"));
        }
        if !(d.until_age.is_finite() && d.until_age >= age) {
            return Err(TontineError::config(
                at("outputs.depletion.until_age"),
                "until_age must not precede the issue age",
            ));
        }
    }

    Ok(Scenario {
        name: raw.name,
        mortality: raw.mortality,
        economic,
        pools,
        products: raw.products,
        outputs: raw.outputs,
    })
}

fn check_ages(ages: &[f64], issue: f64, path: &str) -> Result<()> {
    if ages.is_empty() {
        return Err(TontineError::config(path, "age list is empty"));
    }
    if let Some(a) = ages.iter().find(|a| !(a.is_finite() && **a >= issue)) {
        return Err(TontineError::config(path, format!("age {a} precedes the issue age {issue}")));
    }
    Ok(())
}

/// Basis echo carried on every output record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Echo {
    pub scenario: String,
    pub issue_age: f64,
    pub m: f64,
    pub b: f64,
    pub r: f64,
    pub horizon_years: Option<f64>,
    pub annual_terms: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRecord {
    #[serde(flatten)]
    pub echo: Echo,
    pub product: &'static str,
    pub n: Option<u64>,
    pub gamma: Option<f64>,
    pub age: f64,
    pub t: f64,
    pub survival: f64,
    pub rate: f64,
    pub depletion: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FanRow {
    #[serde(flatten)]
    pub echo: Echo,
    pub product: &'static str,
    pub n: u64,
    pub gamma: Option<f64>,
    pub method: &'static str,
    pub age: f64,
    pub t: f64,
    /// Empty for the mean.
    pub level: Option<f64>,
    pub dividend: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputError {
    pub output: &'static str,
    pub product: Option<&'static str>,
    pub n: Option<u64>,
    pub gamma: Option<f64>,
    pub kind: &'static str,
    pub message: String,
}

/// Everything a scenario run produced, with the scenario echoed back.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub scenario: Scenario,
    pub annuity: AnnuityQuote,
    pub payout_table: Vec<CurveRecord>,
    pub depletion: Vec<CurveRecord>,
    pub fan: Vec<FanRow>,
    pub welfare: Vec<WelfareReport>,
    pub errors: Vec<OutputError>,
}

struct Built {
    product: Product,
    pool: Option<PoolSpec>,
    curve: PayoutCurve,
}

/// Runs every requested output. A failure in one output (e.g. a divergent
/// utility) is recorded and does not stop the others.
pub fn run_scenario(s: &Scenario) -> Result<ScenarioResult> {
    let echo = Echo {
        scenario: s.name.clone(),
        issue_age: s.mortality.age(),
        m: s.mortality.modal(),
        b: s.mortality.dispersion(),
        r: s.economic.rate(),
        horizon_years: match s.economic.horizon() {
            Horizon::Capped(t) => Some(t),
            Horizon::Infinite => None,
        },
        annual_terms: match s.economic.valuation() {
            crate::quadrature::Valuation::AnnualGrid { terms } => Some(terms),
            crate::quadrature::Valuation::Continuous => None,
        },
    };
    let annuity = fair_annuity(&s.mortality, &s.economic)?;
    let mut errors = Vec::new();

    let mut curves = Vec::new();
    for &product in &s.products {
        let built: Vec<(Option<PoolSpec>, Result<PayoutCurve>)> = match product {
            Product::Flat => vec![(None, flat_tontine(&s.mortality, &s.economic))],
            Product::Natural => vec![(None, natural_tontine(&s.mortality, &s.economic))],
            Product::Optimal => s
                .pools
                .par_iter()
                .map(|pool| (Some(*pool), optimal_tontine(&s.mortality, &s.economic, pool)))
                .collect(),
            Product::Annuity => Vec::new(),
        };
        for (pool, curve) in built {
            match curve {
                Ok(curve) => curves.push(Built { product, pool, curve }),
                Err(e) => errors.push(error_record("curve", Some(product), pool, &e)),
            }
        }
    }

    let record = |b: &Built, t: f64, rate: f64, depletion: Option<f64>| CurveRecord {
        echo: echo.clone(),
        product: b.product.as_str(),
        n: b.pool.map(|p| p.n()),
        gamma: b.pool.map(|p| p.gamma()),
        age: s.mortality.age() + t,
        t,
        survival: s.mortality.survival(t),
        rate,
        depletion,
    };
    let annuity_rate = |t: f64| match s.economic.horizon() {
        Horizon::Capped(cap) if t > cap => 0.0,
        _ => annuity.c0,
    };
    let wants_annuity = s.products.contains(&Product::Annuity);

    let mut payout_table = Vec::new();
    if let Some(spec) = &s.outputs.payout_table {
        for b in &curves {
            for &age in &spec.ages {
                let t = age - s.mortality.age();
                payout_table.push(record(b, t, b.curve.rate(t), None));
            }
        }
        if wants_annuity {
            for &age in &spec.ages {
                let t = age - s.mortality.age();
                payout_table.push(annuity_record(&echo, &s.mortality, t, annuity_rate(t)));
            }
        }
    }

    let mut depletion = Vec::new();
    if let Some(spec) = &s.outputs.depletion {
        let until = spec.until_age - s.mortality.age();
        for b in &curves {
            match b.curve.table(spec.step, until) {
                Ok(rows) => depletion.extend(rows.iter().map(|r| record(b, r.t, r.rate, Some(r.depletion)))),
                Err(e) => errors.push(error_record("depletion", Some(b.product), b.pool, &e)),
            }
        }
    }

    let mut fan = Vec::new();
    if let Some(spec) = &s.outputs.fan {
        let times: Vec<f64> = spec.ages.iter().map(|a| a - s.mortality.age()).collect();
        for b in &curves {
            let sizes: Vec<PoolSpec> = match b.pool {
                Some(p) => vec![p],
                None => s.pools.clone(),
            };
            let mut seen = BTreeSet::new();
            for pool in sizes {
                if b.pool.is_none() && !seen.insert(pool.n()) {
                    continue;
                }
                let row = |method, t: f64, level, dividend| FanRow {
                    echo: echo.clone(),
                    product: b.product.as_str(),
                    n: pool.n(),
                    gamma: b.pool.map(|p| p.gamma()),
                    method,
                    age: s.mortality.age() + t,
                    t,
                    level,
                    dividend,
                };
                match dividend_fan(&b.curve, pool.n(), &spec.levels, &times) {
                    Ok(exact) => fan.extend(
                        exact
                            .records()
                            .into_iter()
                            .map(|r| row("exact", r.t, r.level, r.dividend)),
                    ),
                    Err(e) => errors.push(error_record("fan", Some(b.product), Some(pool), &e)),
                }
                if spec.paths > 0 {
                    match simulate_cohort(&b.curve, pool.n(), spec.paths, spec.seed, &spec.levels, &times) {
                        Ok(sim) => {
                            for (i, &t) in sim.times.iter().enumerate() {
                                for (j, &q) in sim.levels.iter().enumerate() {
                                    fan.push(row("simulated", t, Some(q), sim.quantiles[i][j]));
                                }
                                fan.push(row("simulated", t, None, sim.mean[i]));
                            }
                        }
                        Err(e) => errors.push(error_record("fan", Some(b.product), Some(pool), &e)),
                    }
                }
            }
        }
    }

    let mut welfare = Vec::new();
    if let Some(spec) = &s.outputs.welfare {
        let reports: Vec<(PoolSpec, Result<WelfareReport>)> = s
            .pools
            .par_iter()
            .map(|pool| (*pool, WelfareReport::new(&s.mortality, &s.economic, pool, spec.annuity_loading)))
            .collect();
        for (pool, report) in reports {
            match report {
                Ok(r) => welfare.push(r),
                Err(e) => errors.push(error_record("welfare", None, Some(pool), &e)),
            }
        }
    }

    Ok(ScenarioResult {
        scenario: s.clone(),
        annuity,
        payout_table,
        depletion,
        fan,
        welfare,
        errors,
    })
}

fn annuity_record(echo: &Echo, mortality: &MortalityBasis, t: f64, rate: f64) -> CurveRecord {
    CurveRecord {
        echo: echo.clone(),
        product: Product::Annuity.as_str(),
        n: None,
        gamma: None,
        age: mortality.age() + t,
        t,
        survival: mortality.survival(t),
        rate,
        depletion: None,
    }
}

fn error_record(output: &'static str, product: Option<Product>, pool: Option<PoolSpec>, e: &TontineError) -> OutputError {
    OutputError {
        output,
        product: product.map(|p| p.as_str()),
        n: pool.map(|p| p.n()),
        gamma: pool.map(|p| p.gamma()),
        kind: e.kind(),
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct WelfareRow<'a> {
    scenario: &'a str,
    #[serde(flatten)]
    report: &'a WelfareReport,
}

/// Writes the result's CSV tables and JSON summary into `dir` and returns
/// the files written.
pub fn write_result(result: &ScenarioResult, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let name = &result.scenario.name;
    let mut written = Vec::new();
    if result.scenario.outputs.payout_table.is_some() {
        written.push(write_csv(dir.join(format!("{name}_payout.csv")), &result.payout_table)?);
    }
    if result.scenario.outputs.depletion.is_some() {
        written.push(write_csv(dir.join(format!("{name}_depletion.csv")), &result.depletion)?);
    }
    if result.scenario.outputs.fan.is_some() {
        written.push(write_csv(dir.join(format!("{name}_fan.csv")), &result.fan)?);
    }
    if result.scenario.outputs.welfare.is_some() {
        let rows: Vec<WelfareRow> = result
            .welfare
            .iter()
            .map(|report| WelfareRow { scenario: name, report })
            .collect();
        written.push(write_csv(dir.join(format!("{name}_welfare.csv")), &rows)?);
    }
    let summary = dir.join(format!("{name}_summary.json"));
    fs::write(&summary, summary_json(result)? + "\n")?;
    written.push(summary);
    Ok(written)
}

/// JSON summary: scenario echo, annuity quote, welfare reports and errors.
pub fn summary_json(result: &ScenarioResult) -> Result<String> {
    #[derive(Serialize)]
    struct Summary<'a> {
        scenario: &'a Scenario,
        annuity: &'a AnnuityQuote,
        welfare: &'a [WelfareReport],
        errors: &'a [OutputError],
    }
    serde_json::to_string_pretty(&Summary {
        scenario: &result.scenario,
        annuity: &result.annuity,
        welfare: &result.welfare,
        errors: &result.errors,
    })
    .map_err(|e| TontineError::Io(e.to_string()))
}

fn write_csv<T: Serialize>(path: PathBuf, rows: &[T]) -> Result<PathBuf> {
    let io = |e: serde_json::Error| TontineError::Io(e.to_string());
    let mut w = csv::Writer::from_path(&path)?;
    let mut header: Option<Vec<String>> = None;
    for row in rows {
        let serde_json::Value::Object(map) = serde_json::to_value(row).map_err(io)? else {
            return Err(TontineError::Io("CSV rows must be records".into()));
        };
        if header.is_none() {
            let keys: Vec<String> = map.keys().cloned().collect();
            w.write_record(&keys)?;
            header = Some(keys);
        }
        w.write_record(map.values().map(csv_cell))?;
    }
    w.flush()?;
    Ok(path)
}

fn csv_cell(value: &serde_json::Value) -> String {
    use serde_json::Value;
    match value {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(csv_cell).collect::<Vec<_>>().join("; "),
        other => other.to_string(),
    }
}
