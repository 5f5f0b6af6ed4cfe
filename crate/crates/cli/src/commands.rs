use nvlab::asymptotics::optimality_check;
use nvlab::dbar::reconstruct_v_auto;
use nvlab::linearized::{decay_fit, default_u_grid, integral_i, sup_scan, DecayFit};
use nvlab::phase::{default_tol, stationary_points_tol};
use rayon::prelude::*;
use serde_json::json;

use crate::config::Config;
use crate::output::{Row, Table};
use crate::CliError;

pub fn run(command: &str, cfg: &Config) -> Result<Table, CliError> {
    match command {
        "classify" => classify(cfg),
        "linsolve" => linsolve(cfg),
        "supscan" => supscan(cfg),
        "decayfit" => decayfit(cfg),
        "reconstruct" => reconstruct(cfg),
        "optimality" => optimality(cfg),
        other => Err(CliError::Config(format!("unknown command '{other}'"))),
    }
}

fn classify(cfg: &Config) -> Result<Table, CliError> {
    let mut cols = vec!["u_re".to_string(), "u_im".into(), "case".into(), "tol".into()];
    for i in 0..3 {
        cols.push(format!("xi{i}_re"));
        cols.push(format!("xi{i}_im"));
    }
    for i in 0..6 {
        cols.push(format!("zeta{i}_re"));
        cols.push(format!("zeta{i}_im"));
    }
    cols.push("omega".into());
    cols.push("phi".into());
    let mut table = Table { columns: cols, ..Table::default() };
    for u in cfg.u_values() {
        let a = stationary_points_tol(u, cfg.tol.unwrap_or_else(|| default_tol(u)))?;
        let mut row = Row::new().c(u).text(a.case.as_str()).num(a.tol);
        for x in a.xi_roots {
            row = row.c(x);
        }
        for z in a.zeta_points {
            row = row.c(z);
        }
        table.push(row.opt(a.omega).opt(a.phi));
    }
    Ok(table)
}

fn linsolve(cfg: &Config) -> Result<Table, CliError> {
    let data = cfg.data()?;
    let opts = cfg.linear_options()?;
    let jobs: Vec<_> = cfg.t_list.as_deref().unwrap_or(&[]).iter().flat_map(|t| cfg.u_values().into_iter().map(move |u| (*t, u))).collect();
    let values = jobs.par_iter().map(|&(t, u)| integral_i(&data, t, u, &opts)).collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&["t", "u_re", "u_im", "I_re", "I_im", "abs_I"]);
    for (&(t, u), v) in jobs.iter().zip(values) {
        table.push(Row::new().num(t).c(u).c(v).num(v.norm()));
    }
    Ok(table)
}

fn supscan(cfg: &Config) -> Result<Table, CliError> {
    let data = cfg.data()?;
    let opts = cfg.linear_options()?;
    let u_grid = match &cfg.u_list {
        Some(_) => cfg.u_values(),
        None => default_u_grid(),
    };
    let mut table = Table::new(&["t", "u_re", "u_im", "I_re", "I_im", "abs_I"]);
    let mut series = Vec::new();
    for &t in cfg.t_list.as_deref().unwrap_or(&[]) {
        let scan = sup_scan(&data, t, &u_grid, &opts)?;
        let value = scan.values.iter().find(|(u, _)| *u == scan.u_star).map(|p| p.1).unwrap_or_default();
        table.push(Row::new().num(t).c(scan.u_star).c(value).num(scan.sup));
        series.push((t, scan.sup));
    }
    // fits need five points with a nonzero sup
    if series.len() >= 5 && series.iter().all(|s| s.0 >= 1.0 && s.1 > 0.0) {
        let fits = [decay_fit(&series, false)?, decay_fit(&series, true)?];
        table.extra.insert("fits".into(), json!(fits));
    }
    Ok(table)
}

fn read_series(cfg: &Config) -> Result<Vec<(f64, f64)>, CliError> {
    let path = cfg.input.as_deref().expect("resolved");
    let column = cfg.column.as_deref().unwrap_or("abs_I");
    let bad = |msg: String| CliError::Config(format!("{}: {msg}", path.display()));
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_path(path).map_err(|e| bad(e.to_string()))?;
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name).ok_or_else(|| bad(format!("no column '{name}'")));
    let (it, iv) = (find("t")?, find(column)?);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let get = |k: usize| rec.get(k).and_then(|s| s.parse::<f64>().ok()).ok_or_else(|| bad(format!("row {}: not numeric", i + 1)));
        out.push((get(it)?, get(iv)?));
    }
    Ok(out)
}

fn fit_row(f: &DecayFit) -> Row {
    Row::new()
        .flag(f.with_log_correction)
        .num(f.exponent)
        .num(f.intercept)
        .num(f.max_residual)
        .num(f.t_range.0)
        .num(f.t_range.1)
        .int(f.n_points)
}

fn decayfit(cfg: &Config) -> Result<Table, CliError> {
    let series = read_series(cfg)?;
    let mut table = Table::new(&["with_log_correction", "exponent", "intercept", "max_residual", "t_min", "t_max", "n_points"]);
    for log in [false, true] {
        table.push(fit_row(&decay_fit(&series, log)?));
    }
    Ok(table)
}

fn reconstruct(cfg: &Config) -> Result<Table, CliError> {
    let data = cfg.data()?;
    let opts = cfg.dbar_options()?;
    let mut table = Table::new(&[
        "z_re",
        "z_im",
        "t",
        "v_re",
        "v_im",
        "beta1_re",
        "beta1_im",
        "alpha1_re",
        "alpha1_im",
        "q_re",
        "q_im",
        "mu_minus1_re",
        "mu_minus1_im",
        "depth",
        "series_tail_estimate",
        "nodes",
    ]);
    // sequential: each solve already runs in parallel and the grids are large
    for &t in cfg.t_list.as_deref().unwrap_or(&[]) {
        for z in cfg.z_values() {
            let r = reconstruct_v_auto(&data, z, t, &opts)?;
            table.push(
                Row::new()
                    .c(r.z)
                    .num(r.t)
                    .c(r.v)
                    .c(r.beta1)
                    .c(r.alpha1)
                    .c(r.remainder_q)
                    .c(r.mu_minus1)
                    .int(r.depth)
                    .num(r.series_tail_estimate)
                    .int(r.nodes),
            );
        }
    }
    Ok(table)
}

fn optimality(cfg: &Config) -> Result<Table, CliError> {
    let data = cfg.data()?;
    let rows = optimality_check(&data, cfg.t_list.as_deref().unwrap_or(&[]), &cfg.linear_options()?)?;
    let mut table = Table::new(&["t", "scaled_re", "scaled_im", "C_re", "C_im", "gap"]);
    for r in rows {
        table.push(Row::new().num(r.t).c(r.scaled).c(r.c).num(r.gap));
    }
    Ok(table)
}
