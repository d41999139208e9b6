//! The closed `m = 1` system of nonlinear integral equations for
//! `𝒯^(a)_1`, `a = 1..s`, solved by fixed-point iteration on circles.
//!
//! Every contour integral has the form `∮_{|y|=r} F(y) / (w - y) dy/2πi` with
//! `F` analytic in the punctured disc. Its value for `|w| > r` is the principal
//! part of `F` at the origin, `Σ_{n≥1} f_{-n} w^{-n}`, and the coefficients
//! `f_{-n}` are node averages of `F(y_j) y_j^n` (trapezoidal rule). The
//! finite-`N` kernel keeps the first `N/2` terms of the same series.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qsystem::q1;
use crate::I;

/// Which version of the equations to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Trotter limit `N → ∞`.
    Trotter,
    /// Finite even Trotter number `N`.
    FiniteN(usize),
}

/// One thermodynamic point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlieParams {
    pub s: usize,
    pub coupling: f64,
    pub temperature: f64,
    pub mode: Mode,
}

impl NlieParams {
    pub fn trotter(s: usize, coupling: f64, temperature: f64) -> Self {
        Self {
            s,
            coupling,
            temperature,
            mode: Mode::Trotter,
        }
    }

    pub fn finite_n(s: usize, coupling: f64, temperature: f64, trotter: usize) -> Self {
        Self {
            s,
            coupling,
            temperature,
            mode: Mode::FiniteN(trotter),
        }
    }

    pub fn g(&self) -> usize {
        2 * self.s + 1
    }

    /// `u = -J/(TN)`; zero in the Trotter limit.
    pub fn u(&self) -> f64 {
        match self.mode {
            Mode::Trotter => 0.0,
            Mode::FiniteN(n) => -self.coupling / (self.temperature * n as f64),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.s == 0 {
            return Err(Error::InvalidParams("rank s must be at least 1".into()));
        }
        if !(self.temperature > 0.0) || !self.temperature.is_finite() {
            return Err(Error::InvalidParams(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        if !self.coupling.is_finite() {
            return Err(Error::InvalidParams("coupling must be finite".into()));
        }
        if let Mode::FiniteN(n) = self.mode {
            if n == 0 || n % 2 != 0 {
                return Err(Error::InvalidParams(format!(
                    "Trotter number must be even and positive, got {n}"
                )));
            }
        }
        Ok(())
    }
}

/// Largest accepted node count per circle.
pub const MAX_NODES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub radius: f64,
    pub nodes: usize,
    /// Accepted per-circle relative sup-norm change between iterations.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub omega: f64,
    /// Switch to `ω = 0.5` after the change grows twice in a row.
    pub auto_relax: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            radius: 0.2,
            nodes: 64,
            tolerance: 1e-12,
            max_iterations: 500,
            omega: 1.0,
            auto_relax: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius < 0.25) {
            return Err(Error::InvalidParams(format!(
                "contour radius must lie in (0, 1/4), got {}",
                self.radius
            )));
        }
        if self.nodes < 32 || self.nodes > MAX_NODES || !self.nodes.is_power_of_two() {
            return Err(Error::InvalidParams(format!(
                "node count must be a power of two in [32, {MAX_NODES}], got {}",
                self.nodes
            )));
        }
        if !(self.tolerance > 1e-15) {
            return Err(Error::InvalidParams(format!(
                "tolerance must exceed 1e-15, got {}",
                self.tolerance
            )));
        }
        if !(self.omega > 0.0 && self.omega <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "relaxation must lie in (0, 1], got {}",
                self.omega
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParams("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

/// A sampled circle `center + radius · e^{2πij/M}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub center: Complex64,
    pub radius: f64,
    nodes: Vec<Complex64>,
}

impl Contour {
    /// Fails if any point of `excluded` lies within `radius` of the centre.
    pub fn new(center: Complex64, radius: f64, count: usize, excluded: &[Complex64]) -> Result<Self> {
        if count < 32 || !count.is_power_of_two() {
            return Err(Error::InvalidParams(format!(
                "node count must be a power of two >= 32, got {count}"
            )));
        }
        for &x in excluded {
            if (x - center).norm() <= radius {
                return Err(Error::InvalidParams(format!(
                    "singularity {x} inside the circle of radius {radius} around {center}"
                )));
            }
        }
        let nodes = (0..count)
            .map(|j| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * j as f64 / count as f64))
            .collect();
        Ok(Self { center, radius, nodes })
    }

    /// Offsets `y_j` of the nodes from the centre.
    pub fn offsets(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.nodes.iter().map(move |y| self.center + y)
    }
}

/// Pole positions of the kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaPoints {
    pub s: usize,
    pub u: f64,
}

impl BetaPoints {
    /// Trotter-limit points `β^(a)_{1,1} = (1+a)i/2`, `β^(a)_{1,2} = (g+1-a)i/2`.
    pub fn beta(&self, a: usize, k: usize) -> Complex64 {
        let g = (2 * self.s + 1) as f64;
        match k {
            1 => I * (1.0 + a as f64) / 2.0,
            2 => I * (g + 1.0 - a as f64) / 2.0,
            _ => panic!("k must be 1 or 2"),
        }
    }

    /// Finite-`N` points `β̃ = β - iu`.
    pub fn beta_tilde(&self, a: usize, k: usize) -> Complex64 {
        self.beta(a, k) - I * self.u
    }
}

/// `𝒯^(0)_m(v) = exp(-mJ / ((v² + m²/4) T))`.
pub fn t0_known(m: usize, v: Complex64, coupling: f64, temperature: f64) -> Result<Complex64> {
    let mf = m as f64;
    let den = (v * v + mf * mf / 4.0) * temperature;
    if den.norm() < 1e-300 {
        return Err(Error::Pole {
            what: "known function T^(0)",
            at: v,
        });
    }
    Ok((-mf * coupling / den).exp())
}

fn t0_finite(v: Complex64, u: f64, trotter: usize) -> Result<Complex64> {
    let h = (trotter / 2) as i32;
    let pm = |x: Complex64| (x - I * u).powi(h);
    let pp = |x: Complex64| (x + I * u).powi(h);
    let num = pm(v - I / 2.0) * pp(v + I / 2.0);
    let den = pm(v + I / 2.0) * pp(v - I / 2.0);
    let r = num / den;
    if !r.is_finite() {
        return Err(Error::Pole {
            what: "boundary function",
            at: v,
        });
    }
    Ok(r)
}

/// One contour term of the equation for `𝒯^(a)_1`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Term {
    a: usize,
    sigma: f64,
    /// Kernel pole `σβ`.
    pole: Complex64,
    /// Centre of the numerator factors `σ(β - i/2)`.
    num_center: Complex64,
    /// Centre of the denominator factor `σ(β - i)`.
    den_center: Complex64,
}

/// Converged (or best) samples of `𝒯^(a)_1` on all circles the right-hand
/// sides need, with solver diagnostics.
#[derive(Debug, Clone)]
pub struct ContourSolution {
    params: NlieParams,
    config: SolverConfig,
    terms: Vec<Term>,
    /// `(label, centre)` per stored circle, labels in `1..=s`.
    circles: Vec<(usize, Complex64)>,
    offsets: Vec<Complex64>,
    values: Vec<Vec<Complex64>>,
    /// Principal-part coefficients `f_{-1}, f_{-2}, …` per term.
    coefficients: Vec<Vec<Complex64>>,
    pub iterations: usize,
    pub last_change: f64,
    pub converged: bool,
    pub relaxed: bool,
}

impl ContourSolution {
    fn skeleton(params: NlieParams, config: SolverConfig) -> Result<Self> {
        params.validate()?;
        config.validate()?;
        let s = params.s;
        let beta = BetaPoints { s, u: params.u() };
        let mut terms = Vec::new();
        for a in 1..=s {
            for k in 1..=2 {
                let b = match params.mode {
                    Mode::Trotter => beta.beta(a, k),
                    Mode::FiniteN(_) => beta.beta_tilde(a, k),
                };
                for sigma in [1.0, -1.0] {
                    terms.push(Term {
                        a,
                        sigma,
                        pole: sigma * b,
                        num_center: sigma * (b - I / 2.0),
                        den_center: sigma * (b - I),
                    });
                }
            }
        }
        let mut circles: Vec<(usize, Complex64)> = Vec::new();
        let mut add = |label: usize, center: Complex64| {
            if label == 0 {
                return;
            }
            let label = label.min(s);
            if !circles.iter().any(|&(b, c)| b == label && (c - center).norm() < 1e-12) {
                circles.push((label, center));
            }
        };
        for t in &terms {
            add(t.a - 1, t.num_center);
            add(t.a + 1, t.num_center);
            add(t.a, t.den_center);
        }
        let contour = Contour::new(Complex64::new(0.0, 0.0), config.radius, config.nodes, &[])?;
        let offsets = contour.offsets().to_vec();
        let values = circles
            .iter()
            .map(|&(b, _)| vec![Complex64::new(q1(b, s), 0.0); config.nodes])
            .collect();
        let mut out = Self {
            params,
            config,
            terms,
            circles,
            offsets,
            values,
            coefficients: Vec::new(),
            iterations: 0,
            last_change: f64::INFINITY,
            converged: false,
            relaxed: false,
        };
        out.update_coefficients()?;
        Ok(out)
    }

    pub fn params(&self) -> &NlieParams {
        &self.params
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Labels and centres of the stored circles.
    pub fn circles(&self) -> &[(usize, Complex64)] {
        &self.circles
    }

    /// Stored samples on circle `index`, in node order.
    pub fn samples(&self, index: usize) -> &[Complex64] {
        &self.values[index]
    }

    /// Errors if the iteration stopped before reaching the tolerance.
    pub fn require_converged(&self) -> Result<&Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                what: "NLIE fixed point",
                iterations: self.iterations,
                last_change: self.last_change,
            })
        }
    }

    fn series_length(&self) -> usize {
        let half = self.config.nodes / 2;
        match self.params.mode {
            Mode::Trotter => half,
            Mode::FiniteN(n) => half.min(n / 2),
        }
    }

    fn known(&self, v: Complex64) -> Result<Complex64> {
        match self.params.mode {
            Mode::Trotter => t0_known(1, v, self.params.coupling, self.params.temperature),
            Mode::FiniteN(n) => t0_finite(v, self.params.u(), n),
        }
    }

    /// Node values of `𝒯^(label)` on the circle around `center` (label 0 is
    /// the known function).
    fn samples_at(&self, label: usize, center: Complex64) -> Result<Vec<Complex64>> {
        if label == 0 {
            return self.offsets.iter().map(|y| self.known(center + y)).collect();
        }
        let label = label.min(self.params.s);
        let idx = self
            .circles
            .iter()
            .position(|&(b, c)| b == label && (c - center).norm() < 1e-12)
            .expect("circle registered at construction");
        Ok(self.values[idx].clone())
    }

    fn update_coefficients(&mut self) -> Result<()> {
        let n_terms = self.series_length();
        let m = self.offsets.len() as f64;
        let mut all = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let left = self.samples_at(t.a - 1, t.num_center)?;
            let right = self.samples_at(t.a + 1, t.num_center)?;
            let den = self.samples_at(t.a, t.den_center)?;
            let mut integrand = Vec::with_capacity(den.len());
            for j in 0..den.len() {
                if den[j].norm() < 1e-12 {
                    return Err(Error::DivisionBlowup {
                        label: t.a,
                        magnitude: den[j].norm(),
                    });
                }
                integrand.push(left[j] * right[j] / den[j]);
            }
            let mut coeffs = Vec::with_capacity(n_terms);
            let mut pow: Vec<Complex64> = self.offsets.clone();
            for _ in 0..n_terms {
                let f: Complex64 = integrand.iter().zip(&pow).map(|(a, b)| a * b).sum();
                coeffs.push(f / m);
                for (p, y) in pow.iter_mut().zip(&self.offsets) {
                    *p *= y;
                }
            }
            all.push(coeffs);
        }
        self.coefficients = all;
        Ok(())
    }

    /// Right-hand side of the equation for `𝒯^(a)_1` at `v` using the current
    /// coefficients.
    pub fn rhs(&self, a: usize, v: Complex64) -> Result<Complex64> {
        let s = self.params.s;
        if a == 0 || a > s {
            return Err(Error::InvalidParams(format!("label {a} outside 1..={s}")));
        }
        let mut total = Complex64::new(q1(a, s), 0.0);
        for (term_index, (t, coeffs)) in self.terms.iter().zip(&self.coefficients).enumerate() {
            if t.a != a {
                continue;
            }
            let w = v - t.pole;
            if w.norm() <= self.config.radius / 2.0 {
                return Err(Error::KernelCollision {
                    at: v,
                    term: term_index,
                    distance: w.norm(),
                });
            }
            let z = w.inv();
            let mut acc = Complex64::new(0.0, 0.0);
            for c in coeffs.iter().rev() {
                acc = (acc + c) * z;
            }
            total += acc;
        }
        Ok(total)
    }

    /// Applies the right-hand side on every node; returns the new samples.
    fn sweep(&self) -> Result<Vec<Vec<Complex64>>> {
        self.circles
            .par_iter()
            .map(|&(b, c)| self.offsets.iter().map(|y| self.rhs(b, c + y)).collect())
            .collect()
    }
}

/// Iterates the equations from `Q^(a)_1` (or from `initial`) until the
/// per-circle relative sup-norm change drops below the tolerance.
///
/// Reaching `max_iterations` is not an error: the last iterate comes back
/// with `converged == false`. A vanishing denominator aborts with
/// [`Error::DivisionBlowup`].
pub fn solve_fixed_point(
    params: NlieParams,
    config: SolverConfig,
    initial: Option<&ContourSolution>,
) -> Result<ContourSolution> {
    let mut state = ContourSolution::skeleton(params, config)?;
    if let Some(init) = initial {
        if init.circles.len() == state.circles.len() && init.offsets.len() == state.offsets.len() {
            state.values = init.values.clone();
            state.update_coefficients()?;
        }
    }
    let mut omega = config.omega;
    let mut prev_change = f64::INFINITY;
    let mut growth = 0;
    for it in 1..=config.max_iterations {
        let new = state.sweep()?;
        let mut change: f64 = 0.0;
        for (old, new) in state.values.iter_mut().zip(new) {
            let scale = new.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let mut diff: f64 = 0.0;
            for (o, n) in old.iter_mut().zip(new) {
                let next = *o + omega * (n - *o);
                diff = diff.max((n - *o).norm());
                *o = next;
            }
            change = change.max(if scale > 0.0 { diff / scale } else { diff });
        }
        if !change.is_finite() {
            return Err(Error::NonConvergence {
                what: "NLIE fixed point (non-finite iterate)",
                iterations: it,
                last_change: change,
            });
        }
        state.update_coefficients()?;
        state.iterations = it;
        state.last_change = change;
        if change < config.tolerance {
            state.converged = true;
            return Ok(state);
        }
        if change > prev_change {
            growth += 1;
        } else {
            growth = 0;
        }
        if config.auto_relax && growth >= 2 && omega > 0.5 {
            omega = 0.5;
            state.relaxed = true;
            growth = 0;
        }
        prev_change = change;
    }
    Ok(state)
}

/// Unconverged state holding `scale · Q^(a)_1` on every circle; pass it as
/// `initial` to [`solve_fixed_point`] to start away from the default.
pub fn constant_start(params: NlieParams, config: SolverConfig, scale: f64) -> Result<ContourSolution> {
    let mut st = ContourSolution::skeleton(params, config)?;
    for v in st.values.iter_mut() {
        for z in v.iter_mut() {
            *z *= scale;
        }
    }
    st.update_coefficients()?;
    Ok(st)
}

/// Measured deviations from evenness and from reality on the real axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryReport {
    /// `max |𝒯(-v) - 𝒯(v)|`.
    pub evenness: f64,
    /// `max |Im 𝒯(v)|`.
    pub reality: f64,
}

/// Scans `𝒯^(a)_1`, `a = 1..s`, at `points` equally spaced real `v` in
/// `[-half_width, half_width]`.
pub fn symmetry_report(state: &ContourSolution, half_width: f64, points: usize) -> Result<SymmetryReport> {
    let mut rep = SymmetryReport {
        evenness: 0.0,
        reality: 0.0,
    };
    for a in 1..=state.params.s {
        for k in 0..points {
            let x = if points > 1 {
                -half_width + 2.0 * half_width * k as f64 / (points - 1) as f64
            } else {
                0.0
            };
            let t = evaluate_t(a, Complex64::new(x, 0.0), state)?;
            let m = evaluate_t(a, Complex64::new(-x, 0.0), state)?;
            rep.evenness = rep.evenness.max((t - m).norm());
            rep.reality = rep.reality.max(t.im.abs());
        }
    }
    Ok(rep)
}

/// `𝒯^(a)_1(v)` from the converged right-hand side; `a = 0` is the known
/// function and `a = s+1` maps to `s`.
pub fn evaluate_t(a: usize, v: Complex64, state: &ContourSolution) -> Result<Complex64> {
    if a == 0 {
        return state.known(v);
    }
    state.rhs(a.min(state.params.s), v)
}

/// Free energy per site. Trotter limit: `f = -J - T log 𝒯^(1)_1(0)`. Finite
/// `N`: `-T log Λ` with `Λ = 𝒯^(1)_1(0) (1-u)^N` the unnormalised largest
/// eigenvalue.
pub fn free_energy(state: &ContourSolution) -> Result<f64> {
    let t = evaluate_t(1, Complex64::new(0.0, 0.0), state)?;
    if !(t.re > 0.0) || t.im.abs() > 1e-8 * t.re {
        return Err(Error::NonPositiveLog(t));
    }
    let p = state.params;
    Ok(match p.mode {
        Mode::Trotter => -p.coupling - p.temperature * t.re.ln(),
        Mode::FiniteN(n) => -p.temperature * (t.re.ln() + n as f64 * (1.0 - p.u()).ln()),
    })
}

/// Normalised largest eigenvalue `𝒯^(1)_1(0)` times `(1-u)^N`; finite-`N`
/// mode only.
pub fn unnormalised_eigenvalue(state: &ContourSolution) -> Result<Complex64> {
    match state.params.mode {
        Mode::FiniteN(n) => {
            let t = evaluate_t(1, Complex64::new(0.0, 0.0), state)?;
            Ok(t * (1.0 - state.params.u()).powi(n as i32))
        }
        Mode::Trotter => Err(Error::InvalidParams("no finite eigenvalue in the Trotter limit".into())),
    }
}

/// `𝒯^(a)_2(v) = 𝒯^(a)_1(v+i/2) 𝒯^(a)_1(v-i/2) - 𝒯^(a-1)_1(v) 𝒯^(a+1)_1(v)`.
pub fn t2_from_tsystem(a: usize, v: Complex64, state: &ContourSolution) -> Result<Complex64> {
    let s = state.params.s;
    if a == 0 || a > s {
        return Err(Error::InvalidParams(format!("label {a} outside 1..={s}")));
    }
    let up = evaluate_t(a, v + I / 2.0, state)?;
    let down = evaluate_t(a, v - I / 2.0, state)?;
    Ok(up * down - evaluate_t(a - 1, v, state)? * evaluate_t(a + 1, v, state)?)
}

/// `Y^(a)_1 = 𝒯^(a)_2 / (𝒯^(a-1)_1 𝒯^(a+1)_1)` with `𝒯^(s+1)_1 = 𝒯^(s)_1`.
pub fn y_function(a: usize, v: Complex64, state: &ContourSolution) -> Result<Complex64> {
    let t2 = t2_from_tsystem(a, v, state)?;
    let den = evaluate_t(a - 1, v, state)? * evaluate_t(a + 1, v, state)?;
    if den.norm() < 1e-300 {
        return Err(Error::DivisionBlowup {
            label: a,
            magnitude: den.norm(),
        });
    }
    Ok(t2 / den)
}

/// One row of a thermodynamic table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoPoint {
    pub temperature: f64,
    pub free_energy: f64,
    pub entropy: f64,
    pub specific_heat: f64,
    pub iterations: usize,
    pub last_change: f64,
}

/// Free energy, entropy and specific heat at one temperature. Derivatives use
/// the five-point stencils (Richardson-refined central differences) with
/// step `h = 1e-3 T`.
pub fn thermo_point(s: usize, coupling: f64, temperature: f64, config: SolverConfig) -> Result<ThermoPoint> {
    let centre = solve_fixed_point(NlieParams::trotter(s, coupling, temperature), config, None)?;
    centre.require_converged()?;
    let h = 1e-3 * temperature;
    let mut f = [0.0; 5];
    for (slot, k) in f.iter_mut().zip([-2.0, -1.0, 0.0, 1.0, 2.0]) {
        if k == 0.0 {
            *slot = free_energy(&centre)?;
            continue;
        }
        let p = NlieParams::trotter(s, coupling, temperature + k * h);
        let st = solve_fixed_point(p, config, Some(&centre))?;
        st.require_converged()?;
        *slot = free_energy(&st)?;
    }
    let d1 = (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * h);
    let d2 = (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * h * h);
    Ok(ThermoPoint {
        temperature,
        free_energy: f[2],
        entropy: -d1,
        specific_heat: -temperature * d2,
        iterations: centre.iterations,
        last_change: centre.last_change,
    })
}

/// `n` log-spaced temperatures from `t_min` to `t_max` inclusive.
pub fn log_grid(t_min: f64, t_max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![t_min],
        _ => {
            let (a, b) = (t_min.ln(), t_max.ln());
            let mut grid: Vec<f64> = (0..n)
                .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
                .collect();
            grid[0] = t_min;
            grid[n - 1] = t_max;
            grid
        }
    }
}

/// Thermodynamic table over `temperatures`, computed in parallel and
/// returned in input order. The first non-converged point aborts the sweep.
pub fn thermo_sweep(s: usize, coupling: f64, temperatures: &[f64], config: SolverConfig) -> Result<Vec<ThermoPoint>> {
    temperatures
        .par_iter()
        .map(|&t| {
            thermo_point(s, coupling, t, config).map_err(|e| match e {
                Error::NonConvergence {
                    iterations,
                    last_change,
                    ..
                } => Error::NonConvergence {
                    what: "thermodynamic sweep point",
                    iterations,
                    last_change: if last_change.is_finite() { last_change } else { t },
                },
                other => other,
            })
        })
        .collect()
}
