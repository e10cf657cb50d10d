use std::path::PathBuf;

use tontine_core::pool_outcomes::{dividend_fan, simulate_cohort};
use tontine_core::products::{flat_tontine, natural_tontine, optimal_tontine, PayoutCurve};
use tontine_core::scenario::{parse_run, run_scenario, write_result};
use tontine_core::validation::invariant_suite;
use tontine_core::welfare::{certainty_equivalent_ratio, indifference_loading, loading_bound, round_half_even, WelfareReport};
use tontine_core::{EconomicBasis, MortalityBasis, PoolSpec, SurvivalModel};

use crate::output::{default_dir, emit, pretty, Cell, Format, Table};
use crate::{
    BasisArgs, CeTableArgs, Command, CurveChoice, DepletionArgs, Failure, FanArgs, LoadingTableArgs, PayoutTableArgs,
    Preset, RunArgs, ValidateArgs, Valuation, WelfareArgs,
};

type Outcome = Result<(), Failure>;

pub fn dispatch(command: Command) -> Outcome {
    match command {
        Command::PayoutTable(a) => payout_table(a),
        Command::LoadingTable(a) => loading_table(a),
        Command::CeTable(a) => ce_table(a),
        Command::Fan(a) => fan(a),
        Command::Depletion(a) => depletion(a),
        Command::Welfare(a) => welfare(a),
        Command::Validate(a) => validate(a),
        Command::Run(a) => run(a),
    }
}

struct Basis {
    age: f64,
    r: f64,
    m: f64,
    b: f64,
    cap_age: Option<f64>,
}

impl Basis {
    fn resolve(args: &BasisArgs, default: Preset) -> Basis {
        let (age, r, m, b) = match args.basis.unwrap_or(default) {
            Preset::Table1 => (65.0, 0.04, 88.72, 10.0),
            Preset::Table2 | Preset::Table3 => (60.0, 0.03, 87.25, 9.5),
            Preset::Figure1 => (65.0, 0.04, 88.721, 10.0),
        };
        Basis {
            age: args.age.unwrap_or(age),
            r: args.r.unwrap_or(r),
            m: args.m.unwrap_or(m),
            b: args.b.unwrap_or(b),
            cap_age: args.cap_age,
        }
    }

    fn mortality_at(&self, age: f64) -> Result<MortalityBasis, Failure> {
        Ok(MortalityBasis::new(age, self.m, self.b)?)
    }

    fn mortality(&self) -> Result<MortalityBasis, Failure> {
        self.mortality_at(self.age)
    }

    fn economic_at(&self, age: f64) -> Result<EconomicBasis, Failure> {
        match self.cap_age {
            Some(cap) if cap <= age => Err(Failure::Usage(format!(
                "--cap-age {cap} must exceed the issue age {age}"
            ))),
            Some(cap) => Ok(EconomicBasis::capped(self.r, cap - age)?),
            None => Ok(EconomicBasis::infinite(self.r)?),
        }
    }

    fn economic(&self) -> Result<EconomicBasis, Failure> {
        self.economic_at(self.age)
    }
}

fn label(x: f64) -> String {
    x.to_string()
}

fn times_from_ages(ages: &[f64], issue: f64) -> Result<Vec<f64>, Failure> {
    ages.iter()
        .map(|&a| {
            if a.is_finite() && a >= issue {
                Ok(a - issue)
            } else {
                Err(Failure::Usage(format!("age {a} precedes the issue age {issue}")))
            }
        })
        .collect()
}

fn payout_table(a: PayoutTableArgs) -> Outcome {
    let basis = Basis::resolve(&a.basis, Preset::Table1);
    let mortality = basis.mortality()?;
    let economic = basis.economic()?;
    let times = times_from_ages(&a.ages, basis.age)?;

    let mut header = vec!["gamma".to_string()];
    header.extend(a.ages.iter().map(|x| format!("age{}_pct", label(*x))));
    header.extend(a.ages.iter().map(|x| format!("age{}_rate", label(*x))));
    let mut table = Table::new(header);
    for &gamma in &a.gamma {
        let curve = optimal_tontine(&mortality, &economic, &PoolSpec::new(a.n, gamma)?)?;
        let rates: Vec<f64> = times.iter().map(|&t| curve.rate(t)).collect();
        let mut row = vec![Cell::Text(label(gamma))];
        row.extend(rates.iter().map(|d| Cell::Fixed(100.0 * d, 3)));
        row.extend(rates.iter().map(|d| Cell::Number(*d)));
        table.push(row);
    }
    let survival: Vec<f64> = times.iter().map(|&t| mortality.survival(t)).collect();
    let mut footer = vec![Cell::Text("survival".into())];
    footer.extend(survival.iter().map(|p| Cell::Fixed(100.0 * p, 1)));
    footer.extend(survival.iter().map(|p| Cell::Number(*p)));
    table.push(footer);
    emit(&table.render(a.output.format)?, a.output.out.as_deref())?;
    Ok(())
}

fn loading_table(a: LoadingTableArgs) -> Outcome {
    let basis = Basis::resolve(&a.basis, Preset::Table2);
    let mortality = basis.mortality()?;
    let economic = basis.economic()?;

    let mut header = vec!["gamma".to_string()];
    header.extend(a.n.iter().map(|n| format!("n{n}_bp")));
    header.extend(a.n.iter().map(|n| format!("n{n}_loading")));
    if a.report_bound {
        header.extend(a.n.iter().map(|n| format!("n{n}_bound_bp")));
        header.extend(a.n.iter().map(|n| format!("n{n}_bound")));
    }
    let mut table = Table::new(header);
    for &gamma in &a.gamma {
        let mut loadings = Vec::new();
        let mut bounds = Vec::new();
        for &n in &a.n {
            let pool = PoolSpec::new(n, gamma)?;
            loadings.push(indifference_loading(&mortality, &economic, &pool)?);
            bounds.push(loading_bound(&mortality, &economic, &pool)?);
        }
        let mut row = vec![Cell::Text(label(gamma))];
        row.extend(loadings.iter().map(|d| Cell::Fixed(round_half_even(1e4 * d, 2), 2)));
        row.extend(loadings.iter().map(|d| Cell::Number(*d)));
        if a.report_bound {
            row.extend(bounds.iter().map(|d| Cell::Fixed(round_half_even(1e4 * d, 2), 2)));
            row.extend(bounds.iter().map(|d| Cell::Number(*d)));
        }
        table.push(row);
    }
    emit(&table.render(a.output.format)?, a.output.out.as_deref())?;
    Ok(())
}

/// Payment dates that reproduce the printed certainty-equivalent table.
fn printed_terms(age: f64) -> u32 {
    if age < 65.0 {
        81
    } else {
        51
    }
}

fn ce_table(a: CeTableArgs) -> Outcome {
    let basis = Basis::resolve(&a.basis, Preset::Table3);
    let ages = match (&a.ages, a.basis.age) {
        (Some(ages), _) => ages.clone(),
        (None, Some(age)) => vec![age],
        (None, None) => vec![30.0, 40.0, 50.0, 60.0, 70.0, 80.0],
    };
    let valuation = match (basis.cap_age, a.valuation, a.annual_terms) {
        (Some(_), Some(Valuation::Annual), _) | (Some(_), _, Some(_)) => {
            return Err(Failure::Usage("--cap-age cannot be combined with annual valuation".into()))
        }
        (_, Some(Valuation::Continuous), Some(_)) => {
            return Err(Failure::Usage("--annual-terms requires annual valuation".into()))
        }
        (Some(_), _, None) => Valuation::Continuous,
        (None, Some(v), _) => v,
        (None, None, _) => Valuation::Annual,
    };

    let mut header = vec!["age".to_string()];
    header.extend(a.gamma.iter().map(|g| format!("gamma{}", label(*g))));
    header.extend(a.gamma.iter().map(|g| format!("gamma{}_raw", label(*g))));
    let mut table = Table::new(header);
    for &age in &ages {
        let mortality = basis.mortality_at(age)?;
        let mut economic = basis.economic_at(age)?;
        if valuation == Valuation::Annual {
            economic = economic.with_annual_grid(a.annual_terms.unwrap_or_else(|| printed_terms(age)))?;
        }
        let mut ratios = Vec::new();
        for &gamma in &a.gamma {
            ratios.push(certainty_equivalent_ratio(&mortality, &economic, &PoolSpec::new(a.n, gamma)?)?);
        }
        let mut row = vec![Cell::Text(label(age))];
        row.extend(ratios.iter().map(|g| Cell::Fixed(*g, 6)));
        row.extend(ratios.iter().map(|g| Cell::Number(*g)));
        table.push(row);
    }
    emit(&table.render(a.output.format)?, a.output.out.as_deref())?;
    Ok(())
}

fn build_curve(
    choice: CurveChoice,
    gamma: Option<f64>,
    n: u64,
    mortality: &MortalityBasis,
    economic: &EconomicBasis,
) -> Result<PayoutCurve, Failure> {
    match (choice, gamma) {
        (CurveChoice::Optimal, Some(g)) => Ok(optimal_tontine(mortality, economic, &PoolSpec::new(n, g)?)?),
        (CurveChoice::Optimal, None) => Err(Failure::Usage("--product optimal needs --gamma".into())),
        (_, Some(_)) => Err(Failure::Usage("--gamma only applies to --product optimal".into())),
        (CurveChoice::Flat, None) => Ok(flat_tontine(mortality, economic)?),
        (CurveChoice::Natural, None) => Ok(natural_tontine(mortality, economic)?),
    }
}

fn fan(a: FanArgs) -> Outcome {
    let basis = Basis::resolve(&a.basis, Preset::Figure1);
    let mortality = basis.mortality()?;
    let economic = basis.economic()?;
    let curve = build_curve(a.product, a.gamma, a.n, &mortality, &economic)?;
    let ages = a.ages.clone().unwrap_or_else(|| {
        let first = basis.age.ceil() as i64;
        (first..=100.max(first)).map(|x| x as f64).collect()
    });
    let times = times_from_ages(&ages, basis.age)?;

    let mut table = Table::new(["t", "age", "method", "level", "dividend"]);
    let exact = dividend_fan(&curve, a.n, &a.levels, &times)?;
    for r in exact.records() {
        table.push(vec![
            Cell::Number(r.t),
            Cell::Number(r.age),
            Cell::Text("exact".into()),
            r.level.map_or(Cell::Text("mean".into()), Cell::Number),
            Cell::Number(r.dividend),
        ]);
    }
    if a.paths > 0 {
        let sim = simulate_cohort(&curve, a.n, a.paths, a.seed, &a.levels, &times)?;
        for (i, &t) in sim.times.iter().enumerate() {
            for (j, &q) in sim.levels.iter().enumerate() {
                table.push(vec![
                    Cell::Number(t),
                    Cell::Number(basis.age + t),
                    Cell::Text("simulated".into()),
                    Cell::Number(q),
                    Cell::Number(sim.quantiles[i][j]),
                ]);
            }
            table.push(vec![
                Cell::Number(t),
                Cell::Number(basis.age + t),
                Cell::Text("simulated".into()),
                Cell::Text("mean".into()),
                Cell::Number(sim.mean[i]),
            ]);
        }
    }
    emit(&table.render(a.output.format)?, a.output.out.as_deref())?;
    Ok(())
}

fn depletion(a: DepletionArgs) -> Outcome {
    let basis = Basis::resolve(&a.basis, Preset::Table2);
    let mortality = basis.mortality()?;
    let economic = basis.economic()?;
    let until_age = a.until_age.unwrap_or(basis.age + 60.0);
    if until_age < basis.age {
        return Err(Failure::Usage(format!("--until-age {until_age} precedes the issue age")));
    }
    let mut curves = Vec::new();
    for &gamma in &a.gamma {
        let curve = optimal_tontine(&mortality, &economic, &PoolSpec::new(a.n, gamma)?)?;
        curves.push(curve.table(a.step, until_age - basis.age)?);
    }
    let mut header = vec!["t".to_string(), "age".into(), "survival".into()];
    for g in &a.gamma {
        header.push(format!("gamma{}_rate", label(*g)));
        header.push(format!("gamma{}_depletion", label(*g)));
    }
    let mut table = Table::new(header);
    for i in 0..curves[0].len() {
        let first = &curves[0][i];
        let mut row = vec![Cell::Number(first.t), Cell::Number(first.age), Cell::Number(first.survival)];
        for rows in &curves {
            row.push(Cell::Number(rows[i].rate));
            row.push(Cell::Number(rows[i].depletion));
        }
        table.push(row);
    }
    emit(&table.render(a.output.format)?, a.output.out.as_deref())?;
    Ok(())
}

fn welfare(a: WelfareArgs) -> Outcome {
    let basis = Basis::resolve(&a.basis, Preset::Table2);
    let mortality = basis.mortality()?;
    let economic = basis.economic()?;
    let mut reports = Vec::new();
    for &gamma in &a.gamma {
        for &n in &a.n {
            reports.push(WelfareReport::new(&mortality, &economic, &PoolSpec::new(n, gamma)?, a.loading)?);
        }
    }
    let text = match a.format {
        Format::Json => pretty(&serde_json::to_value(&reports).map_err(|e| tontine_core::TontineError::Io(e.to_string()))?)?,
        Format::Csv => {
            let mut table = Table::new([
                "age",
                "m",
                "b",
                "r",
                "horizon_years",
                "n",
                "gamma",
                "c0",
                "annuity_loading",
                "u_annuity",
                "u_loaded_annuity",
                "u_optimal_tontine",
                "u_curve",
                "indifference_loading",
                "indifference_loading_bp",
                "loading_bound",
                "bound_applies",
                "ce_ratio",
                "notes",
            ]);
            let opt = |x: Option<f64>| x.map_or(Cell::Empty, Cell::Number);
            for r in &reports {
                table.push(vec![
                    Cell::Number(r.age),
                    Cell::Number(r.m),
                    Cell::Number(r.b),
                    Cell::Number(r.r),
                    opt(r.horizon_years),
                    Cell::Text(r.n.to_string()),
                    Cell::Number(r.gamma),
                    Cell::Number(r.c0),
                    Cell::Number(r.annuity_loading),
                    Cell::Number(r.u_annuity),
                    Cell::Number(r.u_loaded_annuity),
                    Cell::Number(r.u_optimal_tontine),
                    opt(r.u_curve),
                    Cell::Number(r.indifference_loading),
                    Cell::Fixed(r.indifference_loading_bp, 2),
                    Cell::Number(r.loading_bound),
                    Cell::Text(r.bound_applies.to_string()),
                    opt(r.ce_ratio),
                    Cell::Text(r.notes.join("; ")),
                ]);
            }
            table.render(Format::Csv)?
        }
    };
    emit(&text, a.out.as_deref())?;
    Ok(())
}

fn validate(a: ValidateArgs) -> Outcome {
    let outcomes = invariant_suite();
    let mut table = Table::new(["check", "passed", "detail"]);
    for o in &outcomes {
        table.push(vec![
            Cell::Text(o.name.into()),
            Cell::Text(o.passed.to_string()),
            Cell::Text(o.detail.clone()),
        ]);
    }
    emit(&table.render(a.format)?, None)?;
    match outcomes.iter().filter(|o| !o.passed).count() {
        0 => Ok(()),
        k => Err(Failure::Violations(k)),
    }
}

fn run(a: RunArgs) -> Outcome {
    let text = std::fs::read_to_string(&a.scenario)
        .map_err(|e| tontine_core::TontineError::Io(format!("{}: {e}", a.scenario.display())))?;
    let scenarios = parse_run(&text)?;
    let dir = a.out.or_else(default_dir).unwrap_or_else(|| PathBuf::from("."));
    let mut summary = Vec::new();
    for s in &scenarios {
        let result = run_scenario(s)?;
        let files = write_result(&result, &dir)?;
        summary.push(serde_json::json!({
            "scenario": s.name,
            "files": files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
            "errors": result.errors.len(),
        }));
    }
    emit(&pretty(&serde_json::Value::Array(summary))?, None)?;
    Ok(())
}
