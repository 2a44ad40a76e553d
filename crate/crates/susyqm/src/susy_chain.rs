//! Iterated first-order factorizations of the oscillator.
//!
//! Each step factorizes H_{i-1} - ε_i = A_i† A_i through the
//! superpotential α_i = u'/u of a nodeless solution at ε_i and produces
//! the partner V_i = V_{i-1} - α_i'. The α functions for the remaining
//! energies are carried along algebraically,
//!
//!   α_{i+1}(x, ε_j) = -α_i(x, ε_i) - 2(ε_i - ε_j) / (α_i(x, ε_i) - α_i(x, ε_j)),
//!
//! which needs no further integrations. Auxiliary poles of off-diagonal
//! α's pass through this formula as IEEE infinities and cancel; only the
//! diagonal α_i(ε_i) must stay finite. A factorization energy above the
//! ground level would force nodes on u, so chains insist on strictly
//! decreasing energies starting at or below 1/2. The same step is also
//! run as wavefunction propagation u ↦ α u - u' and the two routes are
//! required to agree before a step is accepted.

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::schrodinger::{count_nodes, oscillator_potential, SeedSolution, WaveFunction};

const SQRT2_INV: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// One factorization level: energy, superpotential and its derivative.
#[derive(Debug, Clone)]
pub struct SusyStep {
    pub epsilon: f64,
    pub alpha: GridFunction<f64>,
    pub dalpha: GridFunction<f64>,
}

/// A completed chain: k steps and the k+1 potentials V_0 .. V_k.
#[derive(Debug, Clone)]
pub struct SusyChain {
    pub steps: Vec<SusyStep>,
    pub potentials: Vec<GridFunction<f64>>,
    pub grid: Grid,
}

impl SusyChain {
    pub fn k(&self) -> usize {
        self.steps.len()
    }
    pub fn v0(&self) -> &GridFunction<f64> {
        &self.potentials[0]
    }
    pub fn vk(&self) -> &GridFunction<f64> {
        &self.potentials[self.potentials.len() - 1]
    }
}

fn pointwise(a: &GridFunction<f64>, b: &GridFunction<f64>, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    a.values.iter().zip(&b.values).map(|(&x, &y)| f(x, y)).collect()
}

/// Build the chain from seeds ordered by strictly decreasing energy,
/// the first at or below the ground level 1/2.
pub fn build_chain(seeds: &[SeedSolution<f64>], grid: Grid) -> Result<SusyChain> {
    let k = seeds.len();
    let n = grid.n();
    let h = grid.h();
    let mut potentials = vec![oscillator_potential(grid)];
    let mut steps = Vec::with_capacity(k);
    if k == 0 {
        return Ok(SusyChain { steps, potentials, grid });
    }

    for s in seeds {
        if s.u.grid != grid {
            return Err(Error::ValidationError {
                field: "seeds".into(),
                msg: "seed grid does not match the chain grid".into(),
            });
        }
    }
    let eps: Vec<f64> = seeds.iter().map(|s| s.epsilon.re).collect();
    if eps[0] > 0.5 + 1e-12 {
        return Err(Error::OrderingError(format!(
            "first factorization energy {} is above the ground level 1/2",
            eps[0]
        )));
    }
    if let Some(w) = eps.windows(2).find(|w| w[1] >= w[0] - 1e-12) {
        return Err(Error::OrderingError(format!(
            "factorization energies must strictly decrease, got {} then {}",
            w[0], w[1]
        )));
    }
    if count_nodes(&seeds[0].u) > 0 {
        let i = seeds[0]
            .u
            .values
            .windows(2)
            .position(|w| w[0] * w[1] < 0.0)
            .unwrap_or(0);
        return Err(Error::SingularTransform { x: grid.x(i) });
    }

    // level-1 log derivatives; off-diagonal entries may hit IEEE inf at
    // nodes of their seeds, which is expected and handled by the recursion
    let mut alphas: Vec<Vec<f64>> = seeds
        .iter()
        .map(|s| pointwise(&s.du, &s.u, |d, u| d / u))
        .collect();
    // propagated copies of the remaining seeds for the cross-check route
    let mut us: Vec<Vec<f64>> = seeds.iter().map(|s| s.u.values.clone()).collect();
    let mut dus: Vec<Vec<f64>> = seeds.iter().map(|s| s.du.values.clone()).collect();

    for level in 0..k {
        let diag = alphas[level].clone();
        if let Some(i) = diag.iter().position(|a| !a.is_finite() || a.abs() > 0.5 / h) {
            return Err(Error::SingularTransform { x: grid.x(i) });
        }
        let alpha = GridFunction::new(grid, diag)?;
        let dalpha = alpha.fd_derivative();
        let v_here = potentials[level].clone();

        // the superpotential must satisfy its own first-order equation;
        // a spike here means a pole slipped between grid points
        let scale = (0..n)
            .map(|i| 2.0 * (v_here.values[i] - eps[level]).abs())
            .fold(0.0, f64::max);
        for i in 2..n - 2 {
            let r = dalpha.values[i] + alpha.values[i] * alpha.values[i]
                - 2.0 * (v_here.values[i] - eps[level]);
            if r.abs() > 1e-4 * scale {
                return Err(Error::SingularTransform { x: grid.x(i) });
            }
        }

        let v_next = GridFunction::new(grid, pointwise(&v_here, &dalpha, |v, d| v - d))?;

        for j in level + 1..k {
            let de = eps[level] - eps[j];
            let next: Vec<f64> = (0..n)
                .map(|i| -diag_at(&alpha, i) - 2.0 * de / (diag_at(&alpha, i) - alphas[j][i]))
                .collect();

            // same step on the wavefunctions themselves
            let mut u_new = vec![0.0; n];
            let mut du_new = vec![0.0; n];
            for i in 0..n {
                let a = alpha.values[i];
                let da = dalpha.values[i];
                let upp = 2.0 * (v_here.values[i] - eps[j]) * us[j][i];
                u_new[i] = a * us[j][i] - dus[j][i];
                du_new[i] = da * us[j][i] + a * dus[j][i] - upp;
            }
            let u_max = u_new.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
            for i in 2..n - 2 {
                if u_new[i].abs() < 1e-9 * u_max || !next[i].is_finite() || next[i].abs() > 0.5 / h
                {
                    continue;
                }
                let prop = du_new[i] / u_new[i];
                if (prop - next[i]).abs() > 1e-6 * next[i].abs().max(1.0) {
                    return Err(Error::SingularTransform { x: grid.x(i) });
                }
            }
            alphas[j] = next;
            us[j] = u_new;
            dus[j] = du_new;
        }

        steps.push(SusyStep { epsilon: eps[level], alpha, dalpha });
        potentials.push(v_next);
    }
    Ok(SusyChain { steps, potentials, grid })
}

fn diag_at(alpha: &GridFunction<f64>, i: usize) -> f64 {
    alpha.values[i]
}

/// The eigenstate of H_k at ε_i that the intertwiners cannot reach:
/// exp(-∫α_i) at level i, then raised through the remaining steps.
pub fn chain_missing_state(chain: &SusyChain, i: usize) -> Result<WaveFunction> {
    assert!(i >= 1 && i <= chain.k(), "level index out of range");
    let step = &chain.steps[i - 1];
    let grid = chain.grid;
    let anchor = grid.index_of(0.0);
    let integral = step.alpha.cumulative_simpson(anchor);
    let psi = integral.map(|v| (-v).exp());
    let dpsi = GridFunction::new(
        grid,
        pointwise(&step.alpha, &psi, |a, p| -a * p),
    )?;
    let mut state = WaveFunction { energy: step.epsilon, psi, dpsi, normalized: false };
    for j in i + 1..=chain.k() {
        state = raise_once(chain, j, &state)?;
    }
    let frac = state.psi.values[0]
        .abs()
        .max(state.psi.values[grid.n() - 1].abs())
        / state.psi.max_abs();
    if frac > 1e-6 {
        return Err(Error::NotNormalizable(format!(
            "missing-state candidate at ε = {} keeps {:.2e} of its peak on the boundary",
            step.epsilon, frac
        )));
    }
    state.normalize();
    state.fix_sign();
    Ok(state)
}

/// One raising step ψ ↦ A_j† ψ = (-ψ' + α_j ψ)/√2 from level j-1 to j,
/// carrying the derivative through ψ'' = 2(V_{j-1} - E)ψ.
fn raise_once(chain: &SusyChain, j: usize, state: &WaveFunction) -> Result<WaveFunction> {
    let step = &chain.steps[j - 1];
    let v = &chain.potentials[j - 1];
    let n = chain.grid.n();
    let mut psi = vec![0.0; n];
    let mut dpsi = vec![0.0; n];
    for i in 0..n {
        let p = state.psi.values[i];
        let dp = state.dpsi.values[i];
        let pp = 2.0 * (v.values[i] - state.energy) * p;
        psi[i] = SQRT2_INV * (-dp + step.alpha.values[i] * p);
        dpsi[i] = SQRT2_INV * (-pp + step.dalpha.values[i] * p + step.alpha.values[i] * dp);
    }
    Ok(WaveFunction {
        energy: state.energy,
        psi: GridFunction::new(chain.grid, psi)?,
        dpsi: GridFunction::new(chain.grid, dpsi)?,
        normalized: false,
    })
}

/// ψ ↦ B_k† ψ, the full raising product from level 0 to level k.
/// The image of a normalized eigenstate at E has squared norm
/// ∏_i (E - ε_i), so the energies themselves are excluded.
pub fn apply_bk_dagger(chain: &SusyChain, psi: &WaveFunction) -> Result<WaveFunction> {
    for step in &chain.steps {
        if (psi.energy - step.epsilon).abs() < 1e-12 {
            return Err(Error::EnergyCollision(psi.energy));
        }
    }
    let mut state = psi.clone();
    state.normalized = false;
    for j in 1..=chain.k() {
        state = raise_once(chain, j, &state)?;
    }
    Ok(state)
}

/// Predicted ||B_k† ψ||² for a normalized eigenstate at the given energy.
pub fn bk_dagger_norm_sq_prediction(chain: &SusyChain, energy: f64) -> f64 {
    chain.steps.iter().map(|s| energy - s.epsilon).product()
}

/// One lowering step ψ ↦ A_j ψ = (ψ' + α_j ψ)/√2 from level j to j-1.
pub fn apply_aj(chain: &SusyChain, j: usize, state: &WaveFunction) -> Result<WaveFunction> {
    assert!(j >= 1 && j <= chain.k(), "level index out of range");
    let step = &chain.steps[j - 1];
    let v = &chain.potentials[j];
    let n = chain.grid.n();
    let mut psi = vec![0.0; n];
    let mut dpsi = vec![0.0; n];
    for i in 0..n {
        let p = state.psi.values[i];
        let dp = state.dpsi.values[i];
        let pp = 2.0 * (v.values[i] - state.energy) * p;
        psi[i] = SQRT2_INV * (dp + step.alpha.values[i] * p);
        dpsi[i] = SQRT2_INV * (pp + step.dalpha.values[i] * p + step.alpha.values[i] * dp);
    }
    Ok(WaveFunction {
        energy: state.energy,
        psi: GridFunction::new(chain.grid, psi)?,
        dpsi: GridFunction::new(chain.grid, dpsi)?,
        normalized: false,
    })
}

/// Relative defect of H_k (B_k† ψ) = E (B_k† ψ) for an eigenstate ψ of
/// H_0, with the kinetic term taken as a fourth-order difference of the
/// carried derivative.
pub fn intertwining_residual(chain: &SusyChain, psi: &WaveFunction) -> Result<f64> {
    let image = apply_bk_dagger(chain, psi)?;
    let d2 = image.dpsi.fd_derivative();
    let vk = chain.vk();
    let n = chain.grid.n();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        let hpsi = -0.5 * d2.values[i] + vk.values[i] * image.psi.values[i];
        let r = hpsi - psi.energy * image.psi.values[i];
        num += r * r;
        den += image.psi.values[i] * image.psi.values[i];
    }
    Ok((num / den).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schrodinger::{
        general_solution_real, oscillator_eigenstate, NuParam,
    };
    use approx::assert_relative_eq;

    fn grid_default() -> Grid {
        Grid::new(-8.0, 8.0, 3201).unwrap()
    }

    #[test]
    fn first_order_at_minus_half_shifts_the_oscillator() {
        let g = grid_default();
        let seed = general_solution_real(-0.5, NuParam::real(0.0), g).unwrap();
        let chain = build_chain(&[seed], g).unwrap();
        for i in 0..g.n() {
            let x = g.x(i);
            assert_relative_eq!(chain.steps[0].alpha.values[i], x, epsilon = 1e-10);
        }
        for i in 2..g.n() - 2 {
            let x = g.x(i);
            assert_relative_eq!(chain.vk().values[i], 0.5 * x * x - 1.0, epsilon = 1e-9);
        }
        let missing = chain_missing_state(&chain, 1).unwrap();
        let psi0 = oscillator_eigenstate(0, g).unwrap();
        for i in 0..g.n() {
            assert_relative_eq!(missing.psi.values[i], psi0.psi.values[i], epsilon = 1e-9);
        }
    }

    #[test]
    fn first_order_alpha_picks_up_the_erf_tail() {
        let g = grid_default();
        let nu = 0.2;
        let seed = general_solution_real(-0.5, NuParam::real(nu), g).unwrap();
        let chain = build_chain(&[seed], g).unwrap();
        for i in 0..g.n() {
            let x = g.x(i);
            let tail = nu * 2.0 / std::f64::consts::PI.sqrt() * (-x * x).exp()
                / (1.0 + nu * crate::specfun::erf(x));
            assert_relative_eq!(chain.steps[0].alpha.values[i], x + tail, max_relative = 1e-8);
        }
    }

    #[test]
    fn oscillator_limit_two_step_chain_heals_the_auxiliary_pole() {
        let g = grid_default();
        let s1 = general_solution_real(-0.5, NuParam::real(0.0), g).unwrap();
        let s2 = general_solution_real(-1.5, NuParam::Infinite, g).unwrap();
        let chain = build_chain(&[s1, s2], g).unwrap();
        // the second superpotential collapses to x although its input
        // blows up at the origin
        for i in 0..g.n() {
            assert_relative_eq!(chain.steps[1].alpha.values[i], g.x(i), epsilon = 1e-9);
        }
        for i in 2..g.n() - 2 {
            let x = g.x(i);
            assert_relative_eq!(chain.vk().values[i], 0.5 * x * x - 2.0, epsilon = 1e-8);
        }
        let m2 = chain_missing_state(&chain, 2).unwrap();
        let psi0 = oscillator_eigenstate(0, g).unwrap();
        let m1 = chain_missing_state(&chain, 1).unwrap();
        let psi1 = oscillator_eigenstate(1, g).unwrap();
        for i in 0..g.n() {
            assert_relative_eq!(m2.psi.values[i], psi0.psi.values[i], epsilon = 1e-8);
            assert_relative_eq!(m1.psi.values[i], psi1.psi.values[i], epsilon = 1e-8);
        }
        assert_relative_eq!(m2.energy, -1.5);
        assert_relative_eq!(m1.energy, -0.5);
    }

    #[test]
    fn two_step_potential_matches_its_closed_form() {
        let g = grid_default();
        let s1 = general_solution_real(-1.0, NuParam::real(0.9), g).unwrap();
        let s2 = general_solution_real(-1.2, NuParam::real(1.1), g).unwrap();
        let a1: Vec<f64> = (0..g.n())
            .map(|i| s1.du.values[i] / s1.u.values[i])
            .collect();
        let a2: Vec<f64> = (0..g.n())
            .map(|i| s2.du.values[i] / s2.u.values[i])
            .collect();
        let quotient = GridFunction::new(
            g,
            (0..g.n())
                .map(|i| 2.0 * (-1.0 - (-1.2)) / (a1[i] - a2[i]))
                .collect(),
        )
        .unwrap();
        let closed = quotient.fd_derivative();
        let chain = build_chain(&[s1, s2], g).unwrap();
        let lo = g.n() / 20;
        for i in lo..g.n() - lo {
            let x = g.x(i);
            let want = 0.5 * x * x + closed.values[i];
            assert!(
                (chain.vk().values[i] - want).abs() < 1e-8,
                "x = {x}: {} vs {}",
                chain.vk().values[i],
                want
            );
        }
    }

    #[test]
    fn generic_two_step_missing_states_interlace() {
        let g = grid_default();
        let s1 = general_solution_real(-1.0, NuParam::real(0.9), g).unwrap();
        let s2 = general_solution_real(-1.2, NuParam::real(1.1), g).unwrap();
        let chain = build_chain(&[s1, s2], g).unwrap();
        let lower = chain_missing_state(&chain, 2).unwrap();
        let upper = chain_missing_state(&chain, 1).unwrap();
        assert_eq!(count_nodes(&lower.psi), 0);
        assert_eq!(count_nodes(&upper.psi), 1);
        assert_relative_eq!(lower.energy, -1.2);
        assert_relative_eq!(upper.energy, -1.0);
        assert_relative_eq!(lower.psi.norm(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn raised_eigenstates_have_the_predicted_norm() {
        let g = grid_default();
        let s1 = general_solution_real(-1.0, NuParam::real(0.9), g).unwrap();
        let s2 = general_solution_real(-1.2, NuParam::real(1.1), g).unwrap();
        let chain = build_chain(&[s1, s2], g).unwrap();
        for n in 0..4 {
            let psi = oscillator_eigenstate(n, g).unwrap();
            let image = apply_bk_dagger(&chain, &psi).unwrap();
            let predicted = bk_dagger_norm_sq_prediction(&chain, psi.energy);
            assert_relative_eq!(image.psi.norm_sq(), predicted, max_relative = 1e-5);
        }
    }

    #[test]
    fn raising_commutes_with_the_hamiltonians() {
        let g = grid_default();
        let s1 = general_solution_real(-1.0, NuParam::real(0.9), g).unwrap();
        let s2 = general_solution_real(-1.2, NuParam::real(1.1), g).unwrap();
        let chain = build_chain(&[s1, s2], g).unwrap();
        for n in 0..5 {
            let psi = oscillator_eigenstate(n, g).unwrap();
            let r = intertwining_residual(&chain, &psi).unwrap();
            assert!(r < 1e-5, "intertwining residual {r:.2e} at n = {n}");
        }
    }

    #[test]
    fn lowering_after_raising_is_the_shifted_hamiltonian() {
        // A_1 A_1† = H_0 - ε_1 on eigenstates: recovers (E - ε_1) ψ
        let g = grid_default();
        let s1 = general_solution_real(-1.0, NuParam::real(0.9), g).unwrap();
        let chain = build_chain(&[s1], g).unwrap();
        let psi = oscillator_eigenstate(0, g).unwrap();
        let up = apply_bk_dagger(&chain, &psi).unwrap();
        let back = apply_aj(&chain, 1, &up).unwrap();
        let factor = psi.energy - chain.steps[0].epsilon;
        for i in 0..g.n() {
            assert_relative_eq!(
                back.psi.values[i],
                factor * psi.psi.values[i],
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn ordering_violations_are_rejected() {
        let g = grid_default();
        let s1 = general_solution_real(-1.2, NuParam::real(1.1), g).unwrap();
        let s2 = general_solution_real(-1.0, NuParam::real(0.9), g).unwrap();
        match build_chain(&[s1, s2], g) {
            Err(Error::OrderingError(_)) => {}
            other => panic!("increasing energies must be rejected, got {other:?}"),
        }
        let high = general_solution_real(1.0, NuParam::real(0.3), g).unwrap();
        match build_chain(&[high], g) {
            Err(Error::OrderingError(_)) => {}
            other => panic!("energy above 1/2 must be rejected, got {other:?}"),
        }
    }

    #[test]
    fn seed_with_a_node_is_singular() {
        let g = grid_default();
        let seed = general_solution_real(-0.5, NuParam::real(-1.5), g).unwrap();
        match build_chain(&[seed], g) {
            Err(Error::SingularTransform { .. }) => {}
            other => panic!("nodeful seed must be singular, got {other:?}"),
        }
    }

    #[test]
    fn empty_chain_is_the_oscillator_itself() {
        let g = grid_default();
        let chain = build_chain(&[], g).unwrap();
        assert_eq!(chain.k(), 0);
        for i in 0..g.n() {
            let x = g.x(i);
            assert_relative_eq!(chain.vk().values[i], 0.5 * x * x);
        }
    }
}
