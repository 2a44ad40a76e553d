//! Coherent states of the dressed ladders.
//!
//! For a chain with energies ε_1..ε_k the lowering operator steps with
//! m_n = √(n ∏_i (n-ε_i-½)(n-ε_i+½)), so its eigenstate with label z has
//! coefficients c_n = z c_{n-1} / m_n on the transformed tower. The
//! normalization sum is a generalized hypergeometric series with lower
//! parameters {½-ε_i, 3/2-ε_i} and the linearized ladder (step √(n+w))
//! gives a Kummer function instead. Everything here works in coefficient
//! space; the grid route only enters through the eigen-residual check.
//!
//! On the oscillator-limit chains (ε_i = ½ - i) the transformed tower is
//! the Fock tower shifted by k, which is what makes closed-form position
//! and momentum widths possible: the x-matrix elements stay the familiar
//! tridiagonal √n ones, only re-indexed.

use num_complex::Complex64;

use crate::algebra::LadderMode;
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::schrodinger::oscillator_eigenstate;
use crate::specfun::{gamma_real, pfq};
use crate::susy_chain::{apply_bk_dagger, SusyChain};

const PI: f64 = std::f64::consts::PI;
const TOWER_CAP: usize = 2000;

#[derive(Debug, Clone)]
pub struct CoherentSpec {
    pub epsilons: Vec<f64>,
    pub mode: LadderMode,
    pub z: Complex64,
}

#[derive(Debug, Clone)]
pub struct CoherentState {
    pub epsilons: Vec<f64>,
    pub mode: LadderMode,
    pub z: Complex64,
    /// c_n on the transformed tower, index = level above the inserted ε's.
    pub coeffs: Vec<Complex64>,
}

impl CoherentState {
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// m_n for the step n → n-1; n ≥ 1.
pub fn step_coefficient(mode: LadderMode, epsilons: &[f64], n: usize) -> Result<f64> {
    let radicand = match mode {
        LadderMode::Natural => {
            let m = n as f64;
            let mut r = m;
            for &eps in epsilons {
                r *= (m - eps - 0.5) * (m - eps + 0.5);
            }
            r
        }
        LadderMode::Linearized { w } => n as f64 + w,
    };
    if radicand < 0.0 {
        return Err(Error::NegativeRadicand { n });
    }
    Ok(radicand.sqrt())
}

/// Lower parameters of the normalization series for the natural ladder.
fn natural_b_list(epsilons: &[f64]) -> Vec<f64> {
    let mut b = Vec::with_capacity(2 * epsilons.len());
    for &eps in epsilons {
        b.push(0.5 - eps);
        b.push(1.5 - eps);
    }
    b
}

/// (first populated level, its coefficient magnitude). The tower starts
/// at 1 only for the linearized ladder at w = -1, whose n = 0 step closes.
fn tower_head(mode: LadderMode, epsilons: &[f64], r2: f64) -> Result<(usize, f64)> {
    match mode {
        LadderMode::Natural => {
            let b = natural_b_list(epsilons);
            let f = pfq(&[], &b, r2)?.value;
            Ok((0, 1.0 / f.sqrt()))
        }
        LadderMode::Linearized { w } => {
            if w < -1.0 {
                // the first step radicand 1 + w is already negative
                return Err(Error::NegativeRadicand { n: 1 });
            }
            if (w + 1.0).abs() < 1e-12 {
                // Σ_{n≥1} r^{2(n-1)}/(n-1)! = e^{r²}
                return Ok((1, (-r2 / 2.0).exp()));
            }
            let f = pfq(&[1.0], &[w + 1.0], r2)?.value;
            Ok((0, 1.0 / f.sqrt()))
        }
    }
}

pub fn coherent_state(spec: &CoherentSpec) -> Result<CoherentState> {
    let r2 = spec.z.norm_sqr();
    let (start, head) = tower_head(spec.mode, &spec.epsilons, r2)?;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); start];
    coeffs.push(Complex64::new(head, 0.0));
    let mut norm_acc = head * head;
    let mut prev_mag = head;
    for n in start + 1..TOWER_CAP {
        let m = step_coefficient(spec.mode, &spec.epsilons, n)?;
        if m == 0.0 {
            return Err(Error::ValidationError {
                field: "epsilons".into(),
                msg: format!("ladder step closes at n = {n}, tower cannot continue"),
            });
        }
        let c = spec.z * coeffs[n - 1] / m;
        let mag = c.norm();
        coeffs.push(c);
        norm_acc += mag * mag;
        if mag * mag < 1e-16 * norm_acc && mag <= prev_mag {
            return Ok(CoherentState {
                epsilons: spec.epsilons.clone(),
                mode: spec.mode,
                z: spec.z,
                coeffs,
            });
        }
        prev_mag = mag;
    }
    Err(Error::ValidationError {
        field: "truncation".into(),
        msg: format!("tower did not converge within {TOWER_CAP} levels"),
    })
}

/// ⟨left|right⟩ = Σ c̄_n c'_n.
pub fn kernel(left: &CoherentState, right: &CoherentState) -> Complex64 {
    left.coeffs
        .iter()
        .zip(&right.coeffs)
        .map(|(a, b)| a.conj() * b)
        .sum()
}

/// The w = 0 overlap in closed form: exp(-|z|²/2 + z̄z' - |z'|²/2).
pub fn canonical_kernel(z1: Complex64, z2: Complex64) -> Complex64 {
    (z1.conj() * z2 - Complex64::new((z1.norm_sqr() + z2.norm_sqr()) / 2.0, 0.0)).exp()
}

/// Radial density ρ with ∫₀^∞ r^{2n+1} ρ(r) dr = n!/π, the k = 0 target.
pub fn canonical_measure_density(r: f64) -> f64 {
    2.0 / PI * (-r * r).exp()
}

/// ∫ r^{2n} dμ the reproducing measure must hit:
/// Γ(n+1) ∏_i Γ(n-ε_i+½)Γ(n-ε_i+3/2) / (π ∏_i Γ(-ε_i+½)Γ(-ε_i+3/2)).
pub fn measure_moment_rhs(epsilons: &[f64], n: usize) -> Result<f64> {
    let nf = n as f64;
    let mut out = gamma_real(nf + 1.0)? / PI;
    for &eps in epsilons {
        out *= gamma_real(nf - eps + 0.5)? / gamma_real(-eps + 0.5)?;
        out *= gamma_real(nf - eps + 1.5)? / gamma_real(-eps + 1.5)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
pub struct Moments {
    pub a_mean: Complex64,
    pub a2_mean: Complex64,
    pub n_mean: f64,
}

/// Oscillator-quadrature moments of the state. Valid on chains whose
/// transformed tower is the Fock tower shifted by k, so the matrix
/// elements of a are √(n + k) one step down.
pub fn fock_moments(cs: &CoherentState) -> Moments {
    let k = cs.epsilons.len() as f64;
    let c = &cs.coeffs;
    let mut a_mean = Complex64::new(0.0, 0.0);
    let mut a2_mean = Complex64::new(0.0, 0.0);
    let mut n_mean = 0.0;
    for n in 0..c.len() {
        let nf = n as f64;
        n_mean += c[n].norm_sqr() * (nf + k);
        if n >= 1 {
            a_mean += c[n - 1].conj() * c[n] * (nf + k).sqrt();
        }
        if n >= 2 {
            a2_mean += c[n - 2].conj() * c[n] * ((nf + k) * (nf + k - 1.0)).sqrt();
        }
    }
    Moments { a_mean, a2_mean, n_mean }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyPair {
    pub dx2: f64,
    pub dp2: f64,
}

/// Widths from the moment sums, x = (a + a†)/√2 and p = (a - a†)/(i√2).
pub fn uncertainty_fock(cs: &CoherentState) -> UncertaintyPair {
    let m = fock_moments(cs);
    let base = 0.5 + m.n_mean;
    UncertaintyPair {
        dx2: base + m.a2_mean.re - 2.0 * m.a_mean.re * m.a_mean.re,
        dp2: base - m.a2_mean.re - 2.0 * m.a_mean.im * m.a_mean.im,
    }
}

fn is_oscillator_limit(epsilons: &[f64]) -> bool {
    epsilons
        .iter()
        .enumerate()
        .all(|(i, &e)| (e - (0.5 - (i as f64 + 1.0))).abs() < 1e-12)
}

/// Closed-form widths. Only the shifted-Fock chains admit them: the
/// natural ladder needs k ≤ 2 on ε = {-½} or {-½, -3/2}, the linearized
/// one needs w equal to the chain depth.
pub fn uncertainty_closed(spec: &CoherentSpec) -> Result<UncertaintyPair> {
    let r2 = spec.z.norm_sqr();
    let re2 = spec.z.re * spec.z.re;
    let im2 = spec.z.im * spec.z.im;
    if !is_oscillator_limit(&spec.epsilons) {
        return Err(Error::NotOscillatorLimit(format!(
            "energies {:?} are not 1/2 - i",
            spec.epsilons
        )));
    }
    match spec.mode {
        LadderMode::Natural => match spec.epsilons.len() {
            1 => {
                let f0 = pfq(&[], &[1.0, 2.0], r2)?.value;
                let q1 = pfq(&[], &[2.0, 2.0], r2)?.value / f0;
                let q2 = pfq(&[], &[2.0, 3.0], r2)?.value / f0;
                let rho = 2.0 * q1 * q1 - q2;
                Ok(UncertaintyPair {
                    dx2: 1.5 - re2 * rho,
                    dp2: 1.5 - im2 * rho,
                })
            }
            2 => {
                let f0 = pfq(&[], &[1.0, 2.0, 2.0, 3.0], r2)?.value;
                let q1 = pfq(&[], &[2.0, 2.0, 3.0, 3.0], r2)?.value / f0;
                let q2 = pfq(&[], &[2.0, 3.0, 3.0, 4.0], r2)?.value / f0;
                let rho = (3.0 * q1 * q1 - q2) / 6.0;
                Ok(UncertaintyPair {
                    dx2: 2.5 - re2 * rho,
                    dp2: 2.5 - im2 * rho,
                })
            }
            k => Err(Error::NotOscillatorLimit(format!(
                "no closed widths for a depth-{k} natural ladder"
            ))),
        },
        LadderMode::Linearized { w } => {
            if (w - spec.epsilons.len() as f64).abs() > 1e-12 {
                return Err(Error::NotOscillatorLimit(format!(
                    "closed widths need w = chain depth, got w = {w} on depth {}",
                    spec.epsilons.len()
                )));
            }
            let f = pfq(&[1.0], &[w + 1.0], r2)?.value;
            let width = 0.5 + w / f;
            Ok(UncertaintyPair { dx2: width, dp2: width })
        }
    }
}

/// c_n ↦ e^{-int} c_n: evolution under the tower Hamiltonian with the
/// global e^{-it/2} phase dropped. Equals the state labeled z e^{-it}.
pub fn evolve_phase(cs: &CoherentState, t: f64) -> CoherentState {
    let coeffs = cs
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, c)| c * Complex64::new(0.0, -(n as f64) * t).exp())
        .collect();
    CoherentState {
        epsilons: cs.epsilons.clone(),
        mode: cs.mode,
        z: cs.z * Complex64::new(0.0, -t).exp(),
        coeffs,
    }
}

/// Smallest eigenvalue of the overlap matrix of the given states,
/// through the real symmetric embedding [[Re, -Im], [Im, Re]].
pub fn gram_min_eigenvalue(states: &[CoherentState]) -> f64 {
    let m = states.len();
    let mut emb = vec![vec![0.0; 2 * m]; 2 * m];
    for i in 0..m {
        for j in 0..m {
            let g = kernel(&states[i], &states[j]);
            emb[i][j] = g.re;
            emb[m + i][m + j] = g.re;
            emb[i][m + j] = -g.im;
            emb[m + i][j] = g.im;
        }
    }
    crate::verify::symmetric_eigenvalues(emb)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// ‖(L - z)|z⟩‖ on the grid, with |z⟩ assembled from the transformed
/// eigenstates and L applied level by level through the operator
/// cascade. Honest cross-check of the coefficient recursion.
pub fn eigen_residual_grid(chain: &SusyChain, cs: &CoherentState) -> Result<f64> {
    use crate::algebra::{ladder_apply, Direction, LadderSpec};
    let grid = chain.grid;
    let npts = grid.n();
    let spec = LadderSpec { chain, mode: cs.mode };
    let mut state = vec![Complex64::new(0.0, 0.0); npts];
    let mut image = vec![Complex64::new(0.0, 0.0); npts];
    for (n, &c) in cs.coeffs.iter().enumerate() {
        if c.norm() < 1e-13 {
            continue;
        }
        let psi0 = oscillator_eigenstate(n, grid)?;
        let mut basis = apply_bk_dagger(chain, &psi0)?;
        basis.normalize();
        let lowered = ladder_apply(&spec, Direction::Down, &basis)?;
        for i in 0..npts {
            state[i] += c * basis.psi.values[i];
            image[i] += c * lowered.psi.values[i];
        }
    }
    let diff: Vec<f64> = (0..npts).map(|i| (image[i] - cs.z * state[i]).norm()).collect();
    let norm: Vec<f64> = (0..npts).map(|i| state[i].norm()).collect();
    let d = GridFunction::new(grid, diff)?.norm();
    let s = GridFunction::new(grid, norm)?.norm();
    Ok(d / s)
}
