//! Oracle suites behind `verify --suite`.

use osp_thermo::bethe::{bae_residual, dvf_t, pole_cancellation_check, solve_two_string, VacuumData};
use osp_thermo::hte::run_hte;
use osp_thermo::lattice::{
    dense_eigenvalues, finite_l_free_energy, hamiltonian, largest_eigenvalue, qtm_matrix, row_transfer, ModelParams,
    QtmCaps,
};
use osp_thermo::nlie::{evaluate_t, free_energy, solve_fixed_point, NlieParams, SolverConfig};
use osp_thermo::qsystem::{q_check_recursion, q_closed_form};
use osp_thermo::rational::{binomial, to_f64, Rational};
use osp_thermo::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::config::Suite;
use crate::error::CliError;
use crate::output::Check;

const SEED: u64 = 0x05f1_2024;

fn check(suite: Suite, name: &str, value: f64, threshold: f64) -> Check {
    Check {
        suite: suite.name().to_string(),
        name: name.to_string(),
        value,
        threshold,
        pass: value < threshold,
    }
}

/// Exact checks report `0` on success and `1` on failure against threshold `0.5`.
fn exact(suite: Suite, name: &str, ok: bool) -> Check {
    check(suite, name, if ok { 0.0 } else { 1.0 }, 0.5)
}

pub fn run(suite: Suite, solver: SolverConfig) -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    for s in suite.expand() {
        out.extend(match s {
            Suite::Qsystem => qsystem(),
            Suite::YbeCommutation => ybe_commutation()?,
            Suite::Bae => bae()?,
            Suite::NlieVsEd => nlie_vs_ed(solver)?,
            Suite::NlieVsHte => nlie_vs_hte(solver)?,
            Suite::Trotter => trotter(solver)?,
            Suite::All => unreachable!("expanded"),
        });
    }
    Ok(out)
}

fn qsystem() -> Vec<Check> {
    let mut out = Vec::new();
    for s in 1..=4 {
        let rec = q_check_recursion(s, 20);
        out.push(exact(Suite::Qsystem, &format!("recursion s={s} m<=20"), rec.holds));
        let ok =
            (1..=s).all(|a| q_closed_form(a, 1, s) == Rational::from_integer(binomial(2 * s as u64 + 1, a as u64)));
        out.push(exact(Suite::Qsystem, &format!("Q1 binomial s={s}"), ok));
    }
    out
}

fn random_point(rng: &mut StdRng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn core<'a>(module: &'a str, quantity: &'a str) -> impl Fn(osp_thermo::Error) -> CliError + 'a {
    move |e| CliError::core(module, quantity, e)
}

fn ybe_commutation() -> Result<Vec<Check>, CliError> {
    let mut rng = StdRng::seed_from_u64(SEED);
    let mut out = Vec::new();
    let err = core("lattice-model", "transfer matrix");
    for s in [1, 2] {
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let a = row_transfer(random_point(&mut rng), s, 3).map_err(&err)?;
            let b = row_transfer(random_point(&mut rng), s, 3).map_err(&err)?;
            worst = worst.max(a.commutator(&b).norm());
        }
        out.push(check(
            Suite::YbeCommutation,
            &format!("row transfer s={s} L=3"),
            worst,
            1e-10,
        ));
    }
    for n in [2, 4] {
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let t = rng.gen_range(0.5..5.0);
            let p = ModelParams::with_discretisation(1, -1.0, t, n, 2).map_err(&err)?;
            let a = qtm_matrix(random_point(&mut rng), &p, QtmCaps::default()).map_err(&err)?;
            let b = qtm_matrix(random_point(&mut rng), &p, QtmCaps::default()).map_err(&err)?;
            worst = worst.max(a.commutator(&b).norm());
        }
        out.push(check(Suite::YbeCommutation, &format!("QTM s=1 N={n}"), worst, 1e-10));
    }
    let h = hamiltonian(1, 4, 1.0, true).map_err(&err)?;
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let t = row_transfer(random_point(&mut rng), 1, 4).map_err(&err)?;
        worst = worst.max(h.commutator(&t).norm());
    }
    out.push(check(Suite::YbeCommutation, "[H,t(v)] s=1 L=4", worst, 1e-9));
    Ok(out)
}

fn bae() -> Result<Vec<Check>, CliError> {
    let err = core("bethe-dvf", "two-string solution");
    let (coupling, temperature) = (1.0, 50.0);
    let params = ModelParams::with_discretisation(1, coupling, temperature, 2, 2).map_err(&err)?;
    let u = params.u();
    let roots = solve_two_string(1, 2, u).map_err(&err)?;
    let vac = VacuumData::new(u, 2).map_err(&err)?;
    let residual = bae_residual(&roots, &vac)
        .map_err(&err)?
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for v in [
        Complex64::new(0.0, 0.0),
        Complex64::new(0.1, 0.0),
        Complex64::new(-0.3, 0.0),
        Complex64::new(0.2, 0.1),
        Complex64::new(0.05, -0.15),
    ] {
        let dvf = dvf_t(1, v, &roots, &vac).map_err(&err)?;
        let t = qtm_matrix(v, &params, QtmCaps::default()).map_err(&err)?;
        let near = dense_eigenvalues(t.matrix())
            .map_err(&err)?
            .iter()
            .map(|e| (e - dvf).norm())
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(near);
    }
    let poles = pole_cancellation_check(&roots, &vac, 1, 1).map_err(&err)?;
    Ok(vec![
        check(Suite::Bae, "BAE residual s=1 N=2", residual, 1e-10),
        check(Suite::Bae, "DVF vs dense QTM at 5 points", worst, 1e-8),
        check(Suite::Bae, "spurious pole residues", poles, 1e-8),
    ])
}

fn trotter_f(coupling: f64, temperature: f64, solver: SolverConfig) -> Result<f64, CliError> {
    let st = solve_fixed_point(NlieParams::trotter(1, coupling, temperature), solver, None)
        .and_then(|st| st.require_converged().cloned())
        .map_err(core("nlie-core", "Trotter-limit fixed point"))?;
    free_energy(&st).map_err(core("nlie-core", "free energy"))
}

fn nlie_vs_ed(solver: SolverConfig) -> Result<Vec<Check>, CliError> {
    let f = trotter_f(-1.0, 5.0, solver)?;
    let mut gaps = Vec::new();
    for l in [4, 6, 8] {
        let fl = finite_l_free_energy(1, l, -1.0, 5.0).map_err(core("lattice-model", "exact diagonalisation"))?;
        gaps.push((fl - f).abs());
    }
    let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
    Ok(vec![
        check(Suite::NlieVsEd, "|f_NLIE - f_L=8| s=1 T=5", gaps[2], 1e-3),
        exact(Suite::NlieVsEd, "L=4,6,8 approach monotonically", monotone),
    ])
}

fn nlie_vs_hte(solver: SolverConfig) -> Result<Vec<Check>, CliError> {
    let hte = run_hte(13).map_err(core("hte-series", "series"))?;
    let series = |t: f64| {
        let beta = -1.0 / t;
        let sum: f64 = hte.free_energy[..12]
            .iter()
            .enumerate()
            .map(|(k, c)| to_f64(c) * beta.powi(k as i32 + 1))
            .sum();
        t * (sum - 3f64.ln())
    };
    let omitted = |t: f64| (t * to_f64(&hte.free_energy[12]) * (1.0 / t).powi(13)).abs();
    let mut out = vec![check(
        Suite::NlieVsHte,
        "|f_NLIE - f_series| T=10",
        (trotter_f(-1.0, 10.0, solver)? - series(10.0)).abs(),
        1e-8,
    )];
    for t in [8.0, 15.0] {
        let gap = (trotter_f(-1.0, t, solver)? - series(t)).abs();
        out.push(check(
            Suite::NlieVsHte,
            &format!("|f_NLIE - f_series| / omitted term T={t}"),
            gap / omitted(t),
            3.0,
        ));
    }
    Ok(out)
}

fn trotter(solver: SolverConfig) -> Result<Vec<Check>, CliError> {
    let err = core("nlie-core", "finite-N fixed point");
    let (coupling, temperature) = (-1.0, 2.0);
    let finite = |n: usize| -> Result<f64, CliError> {
        let st = solve_fixed_point(NlieParams::finite_n(1, coupling, temperature, n), solver, None)
            .and_then(|st| st.require_converged().cloned())
            .map_err(&err)?;
        free_energy(&st).map_err(&err)
    };
    let st = solve_fixed_point(NlieParams::finite_n(1, coupling, temperature, 2), solver, None)
        .and_then(|st| st.require_converged().cloned())
        .map_err(&err)?;
    let t_nlie = evaluate_t(1, Complex64::new(0.0, 0.0), &st).map_err(&err)?;
    let params =
        ModelParams::with_discretisation(1, coupling, temperature, 2, 2).map_err(core("lattice-model", "QTM"))?;
    let qtm = qtm_matrix(Complex64::new(0.0, 0.0), &params, QtmCaps::default())
        .and_then(|t| largest_eigenvalue(&t))
        .map_err(core("lattice-model", "QTM largest eigenvalue"))?;
    let normalised = qtm / (1.0 - params.u()).powi(2);
    let limit = trotter_f(coupling, temperature, solver)?;
    let f: Vec<f64> = [8, 16, 32].iter().map(|&n| finite(n)).collect::<Result<_, _>>()?;
    let monotone = f.windows(2).all(|w| (w[1] - limit).abs() < (w[0] - limit).abs());
    // leading 1/N and 1/N² corrections removed
    let extrapolated = (8.0 * f[2] - 6.0 * f[1] + f[0]) / 3.0;
    Ok(vec![
        check(
            Suite::Trotter,
            "finite-N NLIE vs dense QTM N=2 T=2",
            (t_nlie - normalised).norm(),
            1e-6,
        ),
        exact(Suite::Trotter, "N=8,16,32 approach the limit monotonically", monotone),
        check(
            Suite::Trotter,
            "extrapolated Trotter gap",
            (extrapolated - limit).abs(),
            1e-5,
        ),
    ])
}
