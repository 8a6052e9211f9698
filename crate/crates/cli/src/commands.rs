//! One function per subcommand, each producing a sorted [`Table`].

use homogenizer::analysis::{
    assess_possibility_with_limits, compare_engines_with_limits, entropy_surface_with_limits, lifetime_with_cap,
    resource_curve_with_limits,
};
use homogenizer::exactsim::exact_metrics_with_limits;
use homogenizer::metrics::metrics_surface_with_limits;
use homogenizer::{Coupling, Error, MetricsRecord, ReservoirSearch, TaskDirection};
use rayon::prelude::*;

use crate::config::{Command, EngineArg, RunConfig};
use crate::output::{Cell, Table};

type Result<T> = std::result::Result<T, Error>;

/// Sort key `(direction, eta, N, n, engine)`.
#[derive(Debug, Clone, Copy)]
struct Key(Option<TaskDirection>, f64, usize, usize, u8);

impl Key {
    fn cmp(&self, other: &Key) -> std::cmp::Ordering {
        self.0
            .cmp(&other.0)
            .then(self.1.total_cmp(&other.1))
            .then(self.2.cmp(&other.2))
            .then(self.3.cmp(&other.3))
            .then(self.4.cmp(&other.4))
    }
}

fn sorted(columns: &[&'static str], mut rows: Vec<(Key, Vec<Cell>)>) -> Table {
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    let mut table = Table::new(columns);
    for (_, row) in rows {
        table.push(row);
    }
    table
}

fn coupling(eta: f64) -> Result<Coupling> {
    Coupling::new(eta)
}

fn grid(config: &RunConfig) -> Vec<(TaskDirection, f64)> {
    config
        .directions
        .iter()
        .flat_map(|&d| config.etas.iter().map(move |&e| (d, e)))
        .collect()
}

const METRIC_COLUMNS: [&str; 8] = ["engine", "direction", "eta", "N", "n", "epsilon", "log_delta", "R"];

fn metric_row(r: &MetricsRecord) -> Result<(Key, Vec<Cell>)> {
    r.validate()?;
    Ok((
        Key(Some(r.direction), r.eta, r.reservoir_size, r.iterations, r.engine as u8),
        vec![
            r.engine.label().into(),
            r.direction.label().into(),
            r.eta.into(),
            r.reservoir_size.into(),
            r.iterations.into(),
            r.epsilon.into(),
            r.log_delta.into(),
            r.relative_deterioration.into(),
        ],
    ))
}

fn approx_records(config: &RunConfig) -> Result<Vec<MetricsRecord>> {
    let (big, small) = (config.reservoir.expect("checked"), config.iterations.expect("checked"));
    let limits = config.limits();
    let per_curve = grid(config)
        .into_par_iter()
        .map(|(dir, eta)| metrics_surface_with_limits(dir, coupling(eta)?, big.hi, small.hi, &limits))
        .collect::<Result<Vec<_>>>()?;
    Ok(per_curve
        .into_iter()
        .flatten()
        .filter(|r| r.reservoir_size >= big.lo && r.iterations >= small.lo)
        .collect())
}

fn exact_records(config: &RunConfig) -> Result<Vec<MetricsRecord>> {
    let (big, small) = (config.reservoir.expect("checked"), config.iterations.expect("checked"));
    let limits = config.limits();
    let jobs: Vec<(TaskDirection, f64, usize)> = grid(config)
        .into_iter()
        .flat_map(|(d, e)| big.iter().map(move |n_res| (d, e, n_res)))
        .collect();
    let per_machine = jobs
        .into_par_iter()
        .map(|(dir, eta, n_res)| exact_metrics_with_limits(dir, n_res, small.hi, coupling(eta)?, &limits))
        .collect::<Result<Vec<_>>>()?;
    Ok(per_machine
        .into_iter()
        .flatten()
        .filter(|r| r.iterations >= small.lo)
        .collect())
}

pub fn surface(config: &RunConfig) -> Result<Table> {
    let mut records = Vec::new();
    if matches!(config.engine, EngineArg::Exact | EngineArg::Both) {
        // Cheap rejection before any recurrence work.
        config.limits().check_exact(config.reservoir.expect("checked").hi)?;
        records.extend(exact_records(config)?);
    }
    if matches!(config.engine, EngineArg::Approx | EngineArg::Both) {
        records.extend(approx_records(config)?);
    }
    let rows = records.iter().map(metric_row).collect::<Result<Vec<_>>>()?;
    Ok(sorted(&METRIC_COLUMNS, rows))
}

pub fn compare(config: &RunConfig) -> Result<Table> {
    let k = config.k.expect("checked");
    let limits = config.limits();
    let per_curve = grid(config)
        .into_par_iter()
        .map(|(dir, eta)| compare_engines_with_limits(dir, coupling(eta)?, k, &limits))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for cmp in per_curve.into_iter().flatten() {
        let (a, e) = (&cmp.approx, &cmp.exact);
        a.validate()?;
        e.validate()?;
        rows.push((
            Key(Some(a.direction), a.eta, cmp.k, cmp.k, 0),
            vec![
                "both".into(),
                a.direction.label().into(),
                a.eta.into(),
                cmp.k.into(),
                cmp.k.into(),
                a.epsilon.into(),
                a.log_delta.into(),
                a.relative_deterioration.into(),
                e.epsilon.into(),
                e.log_delta.into(),
                e.relative_deterioration.into(),
                cmp.relative_gap().into(),
            ],
        ));
    }
    Ok(sorted(
        &[
            "engine",
            "direction",
            "eta",
            "N",
            "n",
            "epsilon_approx",
            "log_delta_approx",
            "R_approx",
            "epsilon_exact",
            "log_delta_exact",
            "R_exact",
            "rel_gap",
        ],
        rows,
    ))
}

pub fn entropy(config: &RunConfig) -> Result<Table> {
    let (big, small) = (config.reservoir.expect("checked"), config.iterations.expect("checked"));
    let limits = config.limits();
    let surfaces = config
        .etas
        .par_iter()
        .map(|&eta| entropy_surface_with_limits(coupling(eta)?, big.hi, small.hi, &limits))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for s in &surfaces {
        for n_res in big.iter() {
            for n in small.iter() {
                let value = s.s_tot(n_res, n);
                if !value.is_finite() || value < 0.0 {
                    return Err(Error::Invariant(format!("S_tot({n_res}, {n}) = {value}")));
                }
                rows.push((
                    Key(None, s.eta, n_res, n, 0),
                    vec!["approx".into(), "both".into(), s.eta.into(), n_res.into(), n.into(), value.into()],
                ));
            }
        }
    }
    Ok(sorted(&["engine", "direction", "eta", "N", "n", "S_tot"], rows))
}

pub fn resources(config: &RunConfig) -> Result<Table> {
    let small = config.iterations.expect("checked");
    let eps = config.epsilon_star.expect("checked");
    let limits = config.limits();
    let curves = grid(config)
        .into_par_iter()
        .map(|(dir, eta)| resource_curve_with_limits(dir, coupling(eta)?, eps, small.hi, &limits))
        .collect::<Result<Vec<_>>>()?;
    let lookup = |dir: TaskDirection, eta: f64, n: usize| -> Cell {
        curves
            .iter()
            .find(|c| c.direction == dir && c.eta == eta)
            .and_then(|c| match c.points[n - 1].1 {
                ReservoirSearch::Found(v) => Some(v),
                ReservoirSearch::Unsatisfiable { .. } => None,
            })
            .into()
    };
    let mut rows = Vec::new();
    for &eta in &config.etas {
        for n in small.iter() {
            rows.push((
                Key(None, eta, 0, n, 0),
                vec![
                    "approx".into(),
                    eta.into(),
                    eps.into(),
                    n.into(),
                    lookup(TaskDirection::PureToMixed, eta, n),
                    lookup(TaskDirection::MixedToPure, eta, n),
                ],
            ));
        }
    }
    Ok(sorted(&["engine", "eta", "epsilon_star", "n", "N_min_p2m", "N_min_m2p"], rows))
}

pub fn lifetime(config: &RunConfig) -> Result<Table> {
    let big = config.reservoir.expect("checked");
    let eps = config.epsilon_star.expect("checked");
    let jobs: Vec<(f64, usize)> = config
        .etas
        .iter()
        .flat_map(|&e| big.iter().map(move |n_res| (e, n_res)))
        .collect();
    let rows = jobs
        .into_par_iter()
        .map(|(eta, n_res)| {
            let cap = config.grid_cap / n_res;
            let mut cells = vec!["approx".into(), eta.into(), eps.into(), n_res.into()];
            for dir in TaskDirection::BOTH {
                if config.directions.contains(&dir) {
                    let life = lifetime_with_cap(dir, coupling(eta)?, eps, n_res, cap)?;
                    // A capped run only bounds the lifetime from below.
                    cells.push((!life.capped).then_some(life.iterations).into());
                } else {
                    cells.push(Cell::Missing);
                }
            }
            Ok((Key(None, eta, n_res, 0, 0), cells))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(sorted(&["engine", "eta", "epsilon_star", "N", "n_max_p2m", "n_max_m2p"], rows))
}

pub fn classify(config: &RunConfig) -> Result<Table> {
    let k = config.k.expect("checked");
    let limits = config.limits();
    let verdicts = grid(config)
        .into_par_iter()
        .map(|(dir, eta)| assess_possibility_with_limits(dir, coupling(eta)?, k, &limits))
        .collect::<Result<Vec<_>>>()?;
    let rows = verdicts
        .iter()
        .map(|v| {
            let (argmin, min_log_r) = v.minimum();
            (
                Key(Some(v.direction), v.eta, k, k, 0),
                vec![
                    "approx".into(),
                    v.direction.label().into(),
                    v.eta.into(),
                    k.into(),
                    v.verdict.label().into(),
                    argmin.into(),
                    min_log_r.into(),
                ],
            )
        })
        .collect();
    Ok(sorted(
        &["engine", "direction", "eta", "k_max", "verdict", "argmin_k", "min_log_R"],
        rows,
    ))
}

pub fn run(config: &RunConfig) -> Result<Table> {
    match config.command {
        Command::Surface | Command::Exact => surface(config),
        Command::Compare => compare(config),
        Command::Entropy => entropy(config),
        Command::Resources => resources(config),
        Command::Lifetime => lifetime(config),
        Command::Classify => classify(config),
        Command::Selftest => unreachable!("selftest does not produce a table"),
    }
}
