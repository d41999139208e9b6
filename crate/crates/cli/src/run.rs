//! Command implementations.

use osp_thermo::hte::{pade, run_hte, HteResult, Pade};
use osp_thermo::lattice::{finite_l_free_energy, largest_eigenvalue, qtm_matrix, ModelParams, QtmCaps};
use osp_thermo::nlie::{
    evaluate_t, free_energy, log_grid, solve_fixed_point, thermo_point, thermo_sweep, unnormalised_eigenvalue,
    NlieParams,
};
use osp_thermo::Complex64;

use crate::config::{Command, RunConfig};
use crate::error::CliError;
use crate::output::{Document, HteDocument, Record, Table};
use crate::verify;

/// Result of one command; `failed` marks a verification failure whose
/// report should still be written.
pub struct Outcome {
    pub document: Document,
    pub failed: bool,
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let document = match cfg.command {
        Command::Solve => solve(cfg)?,
        Command::Sweep => curve(cfg, true)?,
        Command::SpecificHeat => curve(cfg, false)?,
        Command::Hte => hte(cfg)?,
        Command::FiniteN => finite_n(cfg)?,
        Command::Verify => {
            let checks = verify::run(cfg.suite, cfg.solver)?;
            let failed = checks.iter().any(|c| !c.pass);
            return Ok(Outcome {
                document: Document::Verify(checks),
                failed,
            });
        }
    };
    Ok(Outcome {
        document,
        failed: false,
    })
}

fn temperature(cfg: &RunConfig) -> f64 {
    cfg.temperature.expect("validated")
}

fn solve(cfg: &RunConfig) -> Result<Document, CliError> {
    let t = temperature(cfg);
    let p = thermo_point(cfg.s, cfg.coupling, t, cfg.solver)
        .map_err(|e| CliError::core("nlie-core", "thermodynamic point", e))?;
    let mut r = Record::default();
    r.text("command", "solve")
        .int("s", cfg.s as i64)
        .float("J", cfg.coupling)
        .float("T", t)
        .float("f", p.free_energy)
        .float("S", p.entropy)
        .float("C", p.specific_heat)
        .int("iterations", p.iterations as i64)
        .float("residual", p.last_change);
    if let Some(l) = cfg.sites {
        let fl = finite_l_free_energy(cfg.s, l, cfg.coupling, t)
            .map_err(|e| CliError::core("lattice-model", "exact diagonalisation", e))?;
        r.int("L", l as i64).float("f_L", fl);
    }
    Ok(Document::Record(r))
}

struct SeriesColumns {
    hte: HteResult,
    pade: Pade,
}

fn series_columns(cfg: &RunConfig) -> Result<Option<SeriesColumns>, CliError> {
    if cfg.s != 1 {
        return Ok(None);
    }
    let hte = run_hte(cfg.order).map_err(|e| CliError::core("hte-series", "series", e))?;
    let pade = pade(&hte.specific_heat_series(), cfg.pade_m, cfg.pade_n)
        .map_err(|e| CliError::core("hte-series", "Pade approximant", e))?;
    Ok(Some(SeriesColumns { hte, pade }))
}

fn curve(cfg: &RunConfig, full: bool) -> Result<Document, CliError> {
    let grid = log_grid(cfg.t_min, cfg.t_max, cfg.points);
    let points =
        thermo_sweep(cfg.s, cfg.coupling, &grid, cfg.solver).map_err(|e| CliError::core("nlie-core", "sweep", e))?;
    let series = series_columns(cfg)?;
    let mut columns: Vec<String> = vec!["T".into()];
    if full {
        columns.extend(["f".into(), "S".into()]);
    }
    if series.is_some() {
        columns.extend(["C_series".into(), "C_pade".into()]);
    }
    columns.push("C_nlie".into());
    let rows = points
        .iter()
        .map(|p| {
            let t = p.temperature;
            let mut row = vec![t];
            if full {
                row.extend([p.free_energy, p.entropy]);
            }
            if let Some(sc) = &series {
                row.push(sc.hte.specific_heat_at(cfg.coupling, t));
                row.push(sc.pade.eval(cfg.coupling / t));
            }
            row.push(p.specific_heat);
            row
        })
        .collect();
    let mut meta = Record::default();
    meta.text("command", cfg.command.name())
        .int("s", cfg.s as i64)
        .float("J", cfg.coupling);
    if series.is_some() {
        meta.int("order", cfg.order as i64)
            .text("pade", &format!("[{}/{}]", cfg.pade_m, cfg.pade_n));
    }
    Ok(Document::Table(Table { meta, columns, rows }))
}

fn hte(cfg: &RunConfig) -> Result<Document, CliError> {
    let res = run_hte(cfg.order).map_err(|e| CliError::core("hte-series", "series", e))?;
    let p = pade(&res.specific_heat_series(), cfg.pade_m, cfg.pade_n)
        .map_err(|e| CliError::core("hte-series", "Pade approximant", e))?;
    Ok(Document::Hte(HteDocument {
        order: cfg.order,
        free_energy: res.free_energy,
        specific_heat: res.specific_heat,
        ansatz: res.ansatz_coefficients,
        pade: Some(p),
    }))
}

fn finite_n(cfg: &RunConfig) -> Result<Document, CliError> {
    let t = temperature(cfg);
    let n = cfg.trotter.expect("validated");
    let params = NlieParams::finite_n(cfg.s, cfg.coupling, t, n);
    let st = solve_fixed_point(params, cfg.solver, None)
        .map_err(|e| CliError::core("nlie-core", "finite-N fixed point", e))?;
    st.require_converged()
        .map_err(|e| CliError::core("nlie-core", "finite-N fixed point", e))?;
    let zero = Complex64::new(0.0, 0.0);
    let quantity = |e| CliError::core("nlie-core", "finite-N eigenvalue", e);
    let t_tilde = evaluate_t(1, zero, &st).map_err(quantity)?;
    let lambda = unnormalised_eigenvalue(&st).map_err(quantity)?;
    let f = free_energy(&st).map_err(quantity)?;
    let mut r = Record::default();
    r.text("command", "finite-n")
        .int("s", cfg.s as i64)
        .float("J", cfg.coupling)
        .float("T", t)
        .int("N", n as i64)
        .float("u", params.u())
        .float("t_tilde", t_tilde.re)
        .float("eigenvalue", lambda.re)
        .float("f", f)
        .int("iterations", st.iterations as i64)
        .float("residual", st.last_change);
    let mp = ModelParams::with_discretisation(cfg.s, cfg.coupling, t, n, 2)
        .map_err(|e| CliError::core("lattice-model", "QTM", e))?;
    match qtm_matrix(zero, &mp, QtmCaps::default()) {
        Ok(m) => {
            let dense =
                largest_eigenvalue(&m).map_err(|e| CliError::core("lattice-model", "QTM largest eigenvalue", e))?;
            r.float("qtm_eigenvalue", dense.re)
                .float("qtm_deviation", (dense - lambda).norm());
        }
        Err(osp_thermo::Error::DimensionCap { .. }) => {}
        Err(e) => return Err(CliError::core("lattice-model", "QTM", e)),
    }
    Ok(Document::Record(r))
}
