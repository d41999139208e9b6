//! Dressed vacuum form of the QTM eigenvalues, Bethe ansatz equations and the
//! two-string root configuration.
//!
//! Labels are the indices of [`GradedIndexSet`](crate::lattice::GradedIndexSet):
//! `0..s` are `1..s`, `s` is `0`, `s+1..2s` are `s̄..1̄`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::I;

fn ratio(num: Complex64, den: Complex64, what: &'static str, at: Complex64) -> Result<Complex64> {
    let q = num / den;
    if den == Complex64::new(0.0, 0.0) || !q.is_finite() {
        return Err(Error::Pole { what, at });
    }
    Ok(q)
}

/// Vacuum data of the quantum transfer matrix: `φ±(v) = (v ± iu)^{N/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VacuumData {
    pub u: f64,
    pub trotter: usize,
}

impl VacuumData {
    pub fn new(u: f64, trotter: usize) -> Result<Self> {
        if trotter == 0 || trotter % 2 != 0 {
            return Err(Error::InvalidParams(format!(
                "Trotter number must be even and positive, got {trotter}"
            )));
        }
        Ok(Self { u, trotter })
    }

    pub fn phi_plus(&self, v: Complex64) -> Complex64 {
        (v + I * self.u).powi((self.trotter / 2) as i32)
    }

    pub fn phi_minus(&self, v: Complex64) -> Complex64 {
        (v - I * self.u).powi((self.trotter / 2) as i32)
    }
}

/// Bethe roots per colour `a = 1..s` with the phase factors `ε_a` (per colour)
/// and `ζ_d` (per label index).
#[derive(Debug, Clone, PartialEq)]
pub struct BetheRoots {
    s: usize,
    roots: Vec<Vec<Complex64>>,
    epsilon: Vec<Complex64>,
    zeta: Vec<Complex64>,
}

impl BetheRoots {
    pub fn new(s: usize, roots: Vec<Vec<Complex64>>, epsilon: Vec<Complex64>, zeta: Vec<Complex64>) -> Result<Self> {
        if s == 0 || roots.len() != s || epsilon.len() != s || zeta.len() != 2 * s + 1 {
            return Err(Error::InvalidParams(format!(
                "need {s} root sets, {s} phases ε and {} phases ζ",
                2 * s + 1
            )));
        }
        Ok(Self {
            s,
            roots,
            epsilon,
            zeta,
        })
    }

    /// Roots with all phase factors equal to one.
    pub fn with_unit_phases(s: usize, roots: Vec<Vec<Complex64>>) -> Result<Self> {
        let one = Complex64::new(1.0, 0.0);
        Self::new(s, roots, vec![one; s], vec![one; 2 * s + 1])
    }

    pub fn empty(s: usize) -> Self {
        Self::with_unit_phases(s, vec![Vec::new(); s]).expect("valid shape")
    }

    pub fn rank(&self) -> usize {
        self.s
    }

    /// Roots of colour `a` (1-based).
    pub fn colour(&self, a: usize) -> &[Complex64] {
        &self.roots[a - 1]
    }

    pub fn sector_sizes(&self) -> Vec<usize> {
        self.roots.iter().map(Vec::len).collect()
    }

    pub fn epsilon(&self, a: usize) -> Complex64 {
        self.epsilon[a - 1]
    }

    pub fn zeta(&self, label: usize) -> Complex64 {
        self.zeta[label]
    }

    /// `Q_a(v) = ∏_k (v - v_k^(a))`, with `Q_0 = 1` and `Q_{s+1} = Q_s`.
    pub fn q(&self, a: usize, v: Complex64) -> Complex64 {
        if a == 0 {
            return Complex64::new(1.0, 0.0);
        }
        self.roots[a.min(self.s) - 1].iter().map(|r| v - r).product()
    }

    fn flat(&self) -> Vec<Complex64> {
        self.roots.iter().flatten().copied().collect()
    }

    fn with_flat(&self, flat: &[Complex64]) -> Self {
        let mut out = self.clone();
        let mut k = 0;
        for colour in &mut out.roots {
            for r in colour.iter_mut() {
                *r = flat[k];
                k += 1;
            }
        }
        out
    }
}

/// Vacuum part `ψ_d(v)` of label `d`, without the phase `ζ_d`.
pub fn vacuum_psi(label: usize, s: usize, v: Complex64, vac: &VacuumData) -> Result<Complex64> {
    let g = (2 * s + 1) as f64;
    let h = (2 * s) as f64 - 1.0;
    if label == 0 {
        let num = vac.phi_plus(v) * vac.phi_minus(v + I) * vac.phi_plus(v - I * h / 2.0);
        ratio(num, vac.phi_plus(v - I * g / 2.0), "vacuum part", v)
    } else if label == 2 * s {
        let num = vac.phi_minus(v) * vac.phi_plus(v - I) * vac.phi_minus(v + I * h / 2.0);
        ratio(num, vac.phi_minus(v + I * g / 2.0), "vacuum part", v)
    } else {
        Ok(vac.phi_plus(v) * vac.phi_minus(v))
    }
}

/// `z(d; v)`: vacuum part times the ratio of Q-functions attached to label `d`.
pub fn z_function(label: usize, v: Complex64, roots: &BetheRoots, vac: &VacuumData) -> Result<Complex64> {
    let s = roots.rank();
    let q = |a: usize, shift: f64| roots.q(a, v + I * shift / 2.0);
    let psi = roots.zeta(label) * vacuum_psi(label, s, v, vac)?;
    let (num, den) = if label < s {
        let a = label + 1;
        let af = a as f64;
        (q(a - 1, af + 1.0) * q(a, af - 2.0), q(a - 1, af - 1.0) * q(a, af))
    } else if label == s {
        let sf = s as f64;
        (q(s, sf - 1.0) * q(s, sf + 2.0), q(s, sf + 1.0) * q(s, sf))
    } else {
        let a = 2 * s + 1 - label;
        let (af, s2) = (a as f64, (2 * s) as f64);
        (
            q(a - 1, -(af - s2)) * q(a, -(af - s2 - 3.0)),
            q(a - 1, -(af - s2 - 2.0)) * q(a, -(af - s2 - 1.0)),
        )
    };
    Ok(psi * ratio(num, den, "z-function", v)?)
}

/// Tableaux of shape `m × a` over `2s+1` labels: strictly increasing along
/// each row of length `a`, weakly increasing down each of the `a` columns.
/// Entries are stored row-major.
pub fn tableaux(s: usize, a: usize, m: usize) -> Vec<Vec<usize>> {
    let g = 2 * s + 1;
    let mut out = Vec::new();
    let mut cur = vec![0usize; a * m];
    fn fill(pos: usize, a: usize, g: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        let (j, k) = (pos / a, pos % a);
        let mut lo = 0;
        if k > 0 {
            lo = lo.max(cur[pos - 1] + 1);
        }
        if j > 0 {
            lo = lo.max(cur[pos - a]);
        }
        for d in lo..g {
            cur[pos] = d;
            fill(pos + 1, a, g, cur, out);
        }
    }
    if a > 0 && m > 0 {
        fill(0, a, g, &mut cur, &mut out);
    }
    out
}

/// Dressed vacuum form `T^(a)_m(v)` summed over [`tableaux`]:
/// `∏_{j,k} z(d_{jk}; v - (i/2)(m - a - 2j + 2k))`.
pub fn dvf_t_fused(a: usize, m: usize, v: Complex64, roots: &BetheRoots, vac: &VacuumData) -> Result<Complex64> {
    let s = roots.rank();
    if a == 0 || a > s {
        return Err(Error::InvalidParams(format!("column height {a} outside 1..={s}")));
    }
    let mut total = Complex64::new(0.0, 0.0);
    let mut cache = std::collections::HashMap::new();
    for tab in tableaux(s, a, m) {
        let mut term = Complex64::new(1.0, 0.0);
        for j in 1..=m {
            for k in 1..=a {
                let d = tab[(j - 1) * a + (k - 1)];
                let shift = m as i64 - a as i64 - 2 * j as i64 + 2 * k as i64;
                let z = match cache.get(&(d, shift)) {
                    Some(z) => *z,
                    None => {
                        let z = z_function(d, v - I * shift as f64 / 2.0, roots, vac)?;
                        cache.insert((d, shift), z);
                        z
                    }
                };
                term *= z;
            }
        }
        total += term;
    }
    Ok(total)
}

/// `T^(a)_1(v)`.
pub fn dvf_t(a: usize, v: Complex64, roots: &BetheRoots, vac: &VacuumData) -> Result<Complex64> {
    dvf_t_fused(a, 1, v, roots, vac)
}

/// Normalisation `Ñ^(a)_m(v)`.
pub fn normalization(a: usize, m: usize, v: Complex64, vac: &VacuumData) -> Result<Complex64> {
    let (af, mf) = (a as f64, m as f64);
    let num = vac.phi_minus(v + I * (mf + af) / 2.0) * vac.phi_plus(v - I * (mf + af) / 2.0);
    let den = vac.phi_minus(v - I * (mf - af) / 2.0) * vac.phi_plus(v + I * (mf - af) / 2.0);
    let mut out = ratio(num, den, "normalisation", v)?;
    for j in 1..=m {
        for k in 1..=a {
            let x = v - I * (mf - af - 2.0 * j as f64 + 2.0 * k as f64) / 2.0;
            out *= vac.phi_minus(x) * vac.phi_plus(x);
        }
    }
    Ok(out)
}

/// Boundary value `T̃^(0)_m(v)`.
pub fn boundary_t0(m: usize, v: Complex64, vac: &VacuumData) -> Result<Complex64> {
    let h = m as f64 / 2.0;
    let num = vac.phi_minus(v - I * h) * vac.phi_plus(v + I * h);
    let den = vac.phi_minus(v + I * h) * vac.phi_plus(v - I * h);
    ratio(num, den, "boundary function", v)
}

/// Normalised `T̃^(a)_m(v)` with `T̃^(a)_0 = 1`, the boundary value at
/// `a = 0` and `T̃^(s+1)_m = T̃^(s)_m`.
pub fn t_tilde(a: usize, m: usize, v: Complex64, roots: &BetheRoots, vac: &VacuumData) -> Result<Complex64> {
    if m == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if a == 0 {
        return boundary_t0(m, v, vac);
    }
    let a = a.min(roots.rank());
    Ok(dvf_t_fused(a, m, v, roots, vac)? / normalization(a, m, v, vac)?)
}

fn bae_sides(roots: &BetheRoots, vac: &VacuumData, a: usize, vk: Complex64) -> Result<(Complex64, Complex64)> {
    let s = roots.rank();
    let g = (2 * s + 1) as f64;
    let lhs = if a == 1 {
        let num = vac.phi_minus(vk + I / 2.0) * vac.phi_plus(vk + I / 2.0 - I * g / 2.0);
        let den = vac.phi_minus(vk - I / 2.0) * vac.phi_plus(vk - I / 2.0 - I * g / 2.0);
        ratio(num, den, "Bethe equation", vk)?
    } else {
        Complex64::new(1.0, 0.0)
    };
    let mut rhs = Complex64::new(1.0, 0.0);
    for d in 1..=s + 1 {
        let b = 2 * i64::from(a == d) - i64::from(a == d + 1) - i64::from(a + 1 == d);
        if b == 0 {
            continue;
        }
        let shift = I * b as f64 / 2.0;
        rhs *= ratio(roots.q(d, vk + shift), roots.q(d, vk - shift), "Bethe equation", vk)?;
    }
    Ok((lhs, roots.epsilon(a) * rhs))
}

/// `LHS^{δ_{a1}} + ε_a ∏_d Q_d(v_k + iB_{ad}/2) / Q_d(v_k - iB_{ad}/2)` for
/// every root, colour by colour.
pub fn bae_residual(roots: &BetheRoots, vac: &VacuumData) -> Result<Vec<Complex64>> {
    let mut out = Vec::new();
    for a in 1..=roots.rank() {
        for &vk in roots.colour(a) {
            let (lhs, rhs) = bae_sides(roots, vac, a, vk)?;
            out.push(lhs + rhs);
        }
    }
    Ok(out)
}

/// Logarithmic form `log(-LHS / (ε RHS))`, zero on solutions.
fn bae_log(roots: &BetheRoots, vac: &VacuumData) -> Result<Vec<Complex64>> {
    let mut out = Vec::new();
    for a in 1..=roots.rank() {
        for &vk in roots.colour(a) {
            let (lhs, rhs) = bae_sides(roots, vac, a, vk)?;
            let r = (-lhs / rhs).ln();
            if !r.is_finite() {
                return Err(Error::Pole {
                    what: "Bethe equation",
                    at: vk,
                });
            }
            out.push(r);
        }
    }
    Ok(out)
}

fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Newton iteration on the logarithmic Bethe equations with a central
/// finite-difference Jacobian and backtracking.
pub fn newton_bae(start: &BetheRoots, vac: &VacuumData, max_iterations: usize) -> Result<BetheRoots> {
    let mut flat = start.flat();
    let n = flat.len();
    let mut current = start.clone();
    let mut res = bae_log(&current, vac)?;
    let mut norm = max_norm(&res);
    for _ in 0..max_iterations {
        if norm < 1e-13 {
            break;
        }
        let h = 1e-7;
        let mut jac = DMatrix::<Complex64>::zeros(n, n);
        for j in 0..n {
            let mut plus = flat.clone();
            let mut minus = flat.clone();
            plus[j] += h;
            minus[j] -= h;
            let fp = bae_log(&start.with_flat(&plus), vac)?;
            let fm = bae_log(&start.with_flat(&minus), vac)?;
            for i in 0..n {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        let rhs = -DVector::from_vec(res.clone());
        let step = jac.lu().solve(&rhs).ok_or(Error::NonConvergence {
            what: "Bethe Newton (singular Jacobian)",
            iterations: 0,
            last_change: norm,
        })?;
        let mut lambda = 1.0;
        loop {
            let trial: Vec<Complex64> = flat.iter().zip(step.iter()).map(|(x, d)| x + lambda * d).collect();
            let cand = start.with_flat(&trial);
            if let Ok(r) = bae_log(&cand, vac) {
                let nn = max_norm(&r);
                if nn < norm || lambda < 1e-4 {
                    flat = trial;
                    current = cand;
                    res = r;
                    norm = nn;
                    break;
                }
            }
            lambda /= 2.0;
            if lambda < 1e-5 {
                return Err(Error::NonConvergence {
                    what: "Bethe Newton line search",
                    iterations: 0,
                    last_change: norm,
                });
            }
        }
    }
    if !(norm < 1e-11) {
        return Err(Error::NonConvergence {
            what: "Bethe Newton",
            iterations: max_iterations,
            last_change: norm,
        });
    }
    Ok(current)
}

fn two_string_seed(s: usize, trotter: usize, u: f64) -> BetheRoots {
    let g = (2 * s + 1) as f64;
    let offsets: &[f64] = if trotter == 2 { &[0.0] } else { &[1e-3, -1e-3] };
    let roots = (1..=s)
        .map(|a| {
            let c = (s + 1 - a) as f64 / (s + 1) as f64;
            let af = a as f64;
            offsets
                .iter()
                .flat_map(|&x| {
                    [
                        Complex64::new(x, af / 2.0 + c * u),
                        Complex64::new(x, (g - af) / 2.0 - c * u),
                    ]
                })
                .collect()
        })
        .collect();
    BetheRoots::with_unit_phases(s, roots).expect("valid shape")
}

/// Two-string solution in the sector `M_1 = ⋯ = M_s = N`, `ε = ζ = 1`.
///
/// Each colour `a` carries `N/2` pairs of roots near `a i/2` and
/// `(g-a) i/2`. The solve starts at `|u| ≤ 0.005` and follows the solution to
/// the requested `u` by continuation.
pub fn solve_two_string(s: usize, trotter: usize, u: f64) -> Result<BetheRoots> {
    if s == 0 {
        return Err(Error::InvalidParams("rank s must be at least 1".into()));
    }
    if trotter != 2 && trotter != 4 {
        return Err(Error::InvalidParams(format!(
            "two-string solver supports N = 2 or 4, got {trotter}"
        )));
    }
    if u == 0.0 || !u.is_finite() {
        return Err(Error::InvalidParams("two-string solver needs u != 0".into()));
    }
    let u0 = u.signum() * u.abs().min(0.005);
    let steps = ((u - u0).abs() / 0.005).ceil() as usize;
    let mut roots = two_string_seed(s, trotter, u0);
    for k in 0..=steps {
        let uk = if steps == 0 {
            u
        } else {
            u0 + (u - u0) * k as f64 / steps as f64
        };
        roots = newton_bae(&roots, &VacuumData::new(uk, trotter)?, 80)?;
    }
    let vac = VacuumData::new(u, trotter)?;
    let worst = max_norm(&bae_residual(&roots, &vac)?);
    if !(worst < 1e-10) {
        return Err(Error::NonConvergence {
            what: "two-string Bethe roots",
            iterations: steps + 1,
            last_change: worst,
        });
    }
    Ok(roots)
}

/// Largest residue of `T̃^(a)_m` over small circles (radius `1e-3`, 32 nodes)
/// around every point where a Q-factor of the dressed part can vanish. Points
/// within `2e-3` of the genuine poles `±β̃^(a)_{m,k}` are skipped.
pub fn pole_cancellation_check(roots: &BetheRoots, vac: &VacuumData, a: usize, m: usize) -> Result<f64> {
    const RADIUS: f64 = 1e-3;
    const NODES: usize = 32;
    let s = roots.rank();
    let g = 2 * s + 1;
    let span = (g + m + a + 2) as i64;
    let (af, mf, gf) = (a as f64, m as f64, g as f64);
    let genuine = [I * ((mf + af) / 2.0 - vac.u), I * ((gf + mf - af) / 2.0 - vac.u)];
    let mut worst: f64 = 0.0;
    for colour in 1..=s {
        for &r in roots.colour(colour) {
            for h in -span..=span {
                let p = r + I * h as f64 / 2.0;
                if genuine
                    .iter()
                    .any(|b| (p - b).norm() < 2.0 * RADIUS || (p + b).norm() < 2.0 * RADIUS)
                {
                    continue;
                }
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..NODES {
                    let e = Complex64::from_polar(RADIUS, 2.0 * std::f64::consts::PI * j as f64 / NODES as f64);
                    acc += t_tilde(a, m, p + e, roots, vac)? * e;
                }
                worst = worst.max((acc / NODES as f64).norm());
            }
        }
    }
    Ok(worst)
}
