//! Figure sweeps and the phase Monte-Carlo run. Grid points are evaluated in
//! parallel and collected in grid order.

use holosim::estimator::{
    classical_uncertainty, correlation_pipeline, interferometer_state, uncertainty_env_approx,
    uncertainty_env_closed_form, uncertainty_env_full, uncertainty_modccr_analytic,
    uncertainty_modccr_fock, Backend, PhaseNoiseModel,
};
use holosim::fock::PhaseConfig;
use holosim::modccr::DeformationParams;
use holosim::{Complex64, FockCutoff};
use rayon::prelude::*;

use crate::config::{EnvCouplingConfig, EnvSqueezingConfig, ModccrConfig, PhaseMcConfig};
use crate::error::CliResult;
use crate::output::{Cell, Table};

fn product(outer: &[f64], inner: &[f64]) -> Vec<(f64, f64)> {
    outer.iter().flat_map(|&o| inner.iter().map(move |&i| (o, i))).collect()
}

fn ratio_cells(r: f64, m: f64, lt: f64, mu: f64) -> CliResult<[Cell; 6]> {
    let full = uncertainty_env_full(r, m, lt, Complex64::new(mu, 0.0))?;
    let closed = uncertainty_env_closed_form(r, m, lt)?;
    let approx = uncertainty_env_approx(r, m, lt)?;
    let quotient = (approx.ratio > 0.0).then(|| full.ratio / approx.ratio);
    Ok([
        full.ratio.into(),
        full.backend.as_str().into(),
        closed.ratio.into(),
        approx.ratio.into(),
        approx.backend.as_str().into(),
        quotient.into(),
    ])
}

const RATIO_COLUMNS: [&str; 6] =
    ["ratio_full", "backend_full", "ratio_closed_form", "ratio_approx", "backend_approx", "full_over_approx"];

/// One row per `(M, λτ)` at fixed `r`.
pub fn run_sweep_env_coupling(cfg: &EnvCouplingConfig) -> CliResult<Table> {
    let mut lts = if cfg.include_zero { vec![0.0] } else { Vec::new() };
    lts.extend(cfg.lambda_tau.values());
    let points = product(&cfg.m, &lts);
    let rows: CliResult<Vec<Vec<Cell>>> = points
        .par_iter()
        .map(|&(m, lt)| {
            let mut row = vec![Cell::Num(lt), Cell::Num(m), Cell::Num(cfg.r)];
            row.extend(ratio_cells(cfg.r, m, lt, cfg.mu)?);
            Ok(row)
        })
        .collect();
    let mut columns = vec!["lambda_tau", "M", "r"];
    columns.extend(RATIO_COLUMNS);
    let mut table = Table { rows: rows?, ..Table::new(columns) };
    let weak: Vec<f64> = (0..table.rows.len())
        .filter(|&i| table.num(i, "lambda_tau").is_some_and(|lt| lt > 0.0 && lt <= 1e-4))
        .filter_map(|i| table.num(i, "full_over_approx"))
        .collect();
    let within = weak.iter().all(|q| (0.9..=1.1).contains(q));
    let (lo, hi) = weak.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &q| (lo.min(q), hi.max(q)));
    table.meta.push(("backend".into(), format!("{},{}", Backend::GaussianFull, Backend::GaussianApprox)));
    table.meta.push(("weak_coupling_full_over_approx_range".into(), format!("{lo}..{hi}")));
    table.meta.push(("weak_coupling_within_10pct".into(), within.to_string()));
    Ok(table)
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

/// One row per `(M, r)` at fixed `λτ`; flags the decrease in `r` for `r ≥ 0.5`.
pub fn run_sweep_env_squeezing(cfg: &EnvSqueezingConfig) -> CliResult<Table> {
    let rs = cfg.r.values();
    let points = product(&cfg.m, &rs);
    let rows: CliResult<Vec<Vec<Cell>>> = points
        .par_iter()
        .map(|&(m, r)| {
            let mut row = vec![Cell::Num(r), Cell::Num(m), Cell::Num(cfg.lambda_tau)];
            row.extend(ratio_cells(r, m, cfg.lambda_tau, cfg.mu)?);
            Ok(row)
        })
        .collect();
    let mut columns = vec!["r", "M", "lambda_tau"];
    columns.extend(RATIO_COLUMNS);
    columns.push("decreasing");
    let mut table = Table { rows: rows?, ..Table::new(columns) };

    let n = rs.len();
    let mut monotone = true;
    for (k, _) in cfg.m.iter().enumerate() {
        for j in 0..n {
            let i = k * n + j;
            let flag = if rs[j] >= 0.5 && j > 0 && rs[j - 1] >= 0.5 {
                let dec = table.num(i, "ratio_full") < table.num(i - 1, "ratio_full");
                monotone &= dec;
                Cell::Int(dec as u64)
            } else {
                Cell::Empty
            };
            table.rows[i].push(flag);
        }
        let tail: Vec<f64> = (0..n).filter(|&j| rs[j] >= 0.5).filter_map(|j| table.num(k * n + j, "ratio_full")).collect();
        monotone &= strictly_decreasing(&tail);
    }
    let mut ordered = true;
    let mut order: Vec<usize> = (0..cfg.m.len()).collect();
    order.sort_by(|&a, &b| cfg.m[a].total_cmp(&cfg.m[b]));
    for pair in order.windows(2) {
        for j in 0..n {
            let lo = table.num(pair[0] * n + j, "ratio_full");
            let hi = table.num(pair[1] * n + j, "ratio_full");
            ordered &= cfg.m[pair[0]] == cfg.m[pair[1]] || hi > lo;
        }
    }
    table.meta.push(("backend".into(), format!("{},{}", Backend::GaussianFull, Backend::GaussianApprox)));
    table.meta.push(("monotone_decreasing_r_ge_0.5".into(), monotone.to_string()));
    table.meta.push(("m_ordering".into(), ordered.to_string()));
    Ok(table)
}

/// One row per `(ε, r)`: the first-order closed form and, for `r` within the
/// oracle range, the Fock-basis evaluation.
pub fn run_sweep_modccr(cfg: &ModccrConfig, cutoff: Option<usize>) -> CliResult<Table> {
    let rs = cfg.r.values();
    let points = product(&cfg.epsilon, &rs);
    let rows: CliResult<Vec<Vec<Cell>>> = points
        .par_iter()
        .map(|&(eps, r)| {
            let analytic = uncertainty_modccr_analytic(r, eps)?;
            let mut row = vec![Cell::Num(r), Cell::Num(eps), analytic.ratio.into(), analytic.backend.as_str().into()];
            if cfg.oracle && r <= cfg.oracle_r_max {
                let cut = match cutoff {
                    Some(n) => FockCutoff::new(n)?,
                    None => FockCutoff::for_twb(r, cfg.oracle_tail)?,
                };
                let fock = uncertainty_modccr_fock(DeformationParams::new(eps, r)?, cut)?;
                let rel = (analytic.ratio > 0.0).then(|| (fock.ratio / analytic.ratio - 1.0).abs());
                let within = rel.map_or(Cell::Empty, |d| Cell::Int((d <= 5.0 * eps.abs()) as u64));
                row.extend([
                    fock.ratio.into(),
                    fock.backend.as_str().into(),
                    rel.into(),
                    within,
                    Cell::Int(cut.n_max() as u64),
                ]);
            } else {
                row.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]);
            }
            Ok(row)
        })
        .collect();
    let columns = vec![
        "r", "epsilon", "ratio_analytic", "backend_analytic", "ratio_fock", "backend_fock", "rel_dev", "within_5eps",
        "n_max",
    ];
    let mut table = Table { rows: rows?, ..Table::new(columns) };
    table.meta.push(("backend".into(), format!("{},{}", Backend::AnalyticModccr, Backend::FockOracle)));
    Ok(table)
}

/// Single-row table: the phase-averaged expectations in both
/// configurations, the recovered correlation, and `ΔE` against shot noise.
pub fn run_phase_mc(cfg: &PhaseMcConfig, seed: u64, cutoff: Option<usize>) -> CliResult<Table> {
    let cut = match cutoff {
        Some(n) => FockCutoff::new(n)?,
        None => FockCutoff::four_mode_default(),
    };
    let mu = Complex64::new(cfg.mu, 0.0);
    let state = interferometer_state(cfg.r, mu, cut)?;
    let center = PhaseConfig::centered(cfg.phi1_0, cfg.phi2_0);
    let noise = PhaseNoiseModel::parallel(cfg.sigma1, cfg.sigma2, cfg.rho)?;
    let res = correlation_pipeline(&state, &center, &noise, cfg.samples, seed, cfg.h)?;
    let classical = classical_uncertainty(mu)?;
    let columns = vec![
        "r", "mu", "sigma1", "sigma2", "rho", "samples", "seed", "e_parallel", "se_parallel", "e_orthogonal",
        "se_orthogonal", "se_difference", "denominator", "recovered", "recovered_se", "injected", "delta_e",
        "delta_e_cl", "delta_e_ratio", "backend",
    ];
    let row = vec![
        cfg.r.into(),
        cfg.mu.into(),
        cfg.sigma1.into(),
        cfg.sigma2.into(),
        cfg.rho.into(),
        Cell::Int(cfg.samples as u64),
        Cell::Int(seed),
        res.e_parallel.mean.into(),
        res.e_parallel.std_error.into(),
        res.e_orthogonal.mean.into(),
        res.e_orthogonal.std_error.into(),
        res.difference_std_error.into(),
        res.denominator.into(),
        res.recovered.into(),
        res.recovered_std_error.into(),
        res.injected.into(),
        res.delta_e.into(),
        classical.into(),
        (res.delta_e / classical).into(),
        Backend::FockOracle.as_str().into(),
    ];
    let mut table = Table { rows: vec![row], ..Table::new(columns) };
    table.meta.push(("backend".into(), Backend::FockOracle.to_string()));
    table.meta.push(("n_max".into(), cut.n_max().to_string()));
    Ok(table)
}
