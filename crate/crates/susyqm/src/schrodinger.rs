//! Oscillator Schrödinger solutions at arbitrary energy.
//!
//! Units ħ = m = ω = 1 throughout, so the potential is x²/2 and the
//! eigenvalues are n + 1/2. The general solution at energy ε splits into
//! even and odd Kummer branches,
//!
//!   u(x) = e^{-x²/2} [ M(a, 1/2; x²) + 2ν R x M(a + 1/2, 3/2; x²) ],
//!
//! with a = (1 - 2ε)/4 and R = Γ(a + 1/2)/Γ(a). The branch mix ν selects
//! the solution; ν = 0 is the pure even branch and ν → ∞ the pure odd
//! one. Both Kummer sums grow like e^{x²} while u itself can decay, so
//! the bracket is accumulated in double-double and the surviving digits
//! are tracked per point.

use crate::dd::{Cdd, Dd};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, Scalar};
use crate::specfun::{gamma, hermite, kummer_series_dd, MAX_DIGITS_LOST};
use num_complex::Complex64;

/// V(x) = x²/2 sampled on the grid.
pub fn oscillator_potential(grid: Grid) -> GridFunction<f64> {
    GridFunction::from_fn(grid, |x| 0.5 * x * x).expect("potential is finite")
}

/// Branch-mixing parameter. `Infinite` selects the pure odd branch,
/// which a finite ν cannot reach.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NuParam {
    Finite(Complex64),
    Infinite,
}

impl NuParam {
    pub fn real(v: f64) -> NuParam {
        NuParam::Finite(Complex64::new(v, 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedKind {
    GeneralKummer,
    PhysicalEigenstate,
}

/// A solution of -u''/2 + (x²/2)u = εu carried as the pair (u, u').
/// `digits_lost` is the worst estimated cancellation in the Kummer
/// bracket anywhere on the grid.
#[derive(Debug, Clone)]
pub struct SeedSolution<T: Scalar> {
    pub epsilon: Complex64,
    pub nu: NuParam,
    pub u: GridFunction<T>,
    pub du: GridFunction<T>,
    pub kind: SeedKind,
    pub digits_lost: f64,
}

fn is_nonpos_int(z: Complex64) -> bool {
    z.im.abs() < 1e-12 && z.re < 0.5 && (z.re - z.re.round()).abs() < 1e-12 && z.re.round() <= 0.0
}

/// General solution at (possibly complex) energy ε with branch mix ν.
///
/// At ε = 2m + 1/2 the Γ(a) pole kills the odd admixture for every
/// finite ν and the even eigenstate emerges. At ε = 2m + 3/2 the ratio R
/// itself blows up, so a finite nonzero ν is rejected as an energy
/// collision; ν = 0 and ν = ∞ stay well defined there.
pub fn general_solution(
    epsilon: Complex64,
    nu: NuParam,
    grid: Grid,
) -> Result<SeedSolution<Complex64>> {
    let a = (Complex64::new(1.0, 0.0) - epsilon * 2.0) * 0.25;
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let (ce, co) = match nu {
        NuParam::Finite(v) if v == zero => (one, zero),
        NuParam::Infinite => (zero, one),
        NuParam::Finite(v) => {
            if is_nonpos_int(a) {
                (one, zero)
            } else if is_nonpos_int(a + 0.5) {
                return Err(Error::EnergyCollision(epsilon.re));
            } else {
                let ratio = gamma(a + 0.5)? / gamma(a)?;
                (one, v * 2.0 * ratio)
            }
        }
    };
    let (u, du, lost) = evaluate_branches(a, ce, co, grid)?;
    if lost > MAX_DIGITS_LOST {
        return Err(Error::PrecisionLoss { digits_lost: lost });
    }
    Ok(SeedSolution {
        epsilon,
        nu,
        u,
        du,
        kind: SeedKind::GeneralKummer,
        digits_lost: lost,
    })
}

/// Real-energy wrapper; with real inputs every intermediate is exactly
/// real, so taking the real part loses nothing.
pub fn general_solution_real(epsilon: f64, nu: NuParam, grid: Grid) -> Result<SeedSolution<f64>> {
    if let NuParam::Finite(v) = nu {
        if v.im != 0.0 {
            return Err(Error::ValidationError {
                field: "nu".into(),
                msg: "real seed requested with complex nu".into(),
            });
        }
    }
    let seed = general_solution(Complex64::new(epsilon, 0.0), nu, grid)?;
    let take_re = |f: &GridFunction<Complex64>| {
        let vals = f
            .values
            .iter()
            .map(|v| {
                debug_assert_eq!(v.im, 0.0, "real inputs must stay on the real line");
                v.re
            })
            .collect();
        GridFunction::new(grid, vals)
    };
    Ok(SeedSolution {
        epsilon: seed.epsilon,
        nu: seed.nu,
        u: take_re(&seed.u)?,
        du: take_re(&seed.du)?,
        kind: seed.kind,
        digits_lost: seed.digits_lost,
    })
}

/// Evaluates u = e^{-x²/2} B and u' = e^{-x²/2} (C - xB) where
/// B = ce F1 + co x F2 and C = dB/dx, using the contiguous Kummer
/// derivative relations
///   d/dx M(a, 1/2; x²)      = 4a x M(a+1, 3/2; x²),
///   d/dx [x M(a+1/2, 3/2; x²)] = M(a+1/2, 3/2; x²) + (4/3)(a+1/2) x² M(a+3/2, 5/2; x²).
/// Cancellation is judged against a 3-point magnitude envelope so an
/// honest node of u does not masquerade as precision loss.
fn evaluate_branches(
    a: Complex64,
    ce: Complex64,
    co: Complex64,
    grid: Grid,
) -> Result<(GridFunction<Complex64>, GridFunction<Complex64>, f64)> {
    let n = grid.n();
    let zero = Complex64::new(0.0, 0.0);
    let need_even = ce != zero;
    let need_odd = co != zero;
    let a_dd = Cdd::from_f64(a.re, a.im);
    let ce_dd = Cdd::from_f64(ce.re, ce.im);
    let co_dd = Cdd::from_f64(co.re, co.im);
    let b12 = Cdd::from_f64(0.5, 0.0);
    let b32 = Cdd::from_f64(1.5, 0.0);
    let b52 = Cdd::from_f64(2.5, 0.0);
    let a_p1 = a_dd.add(Cdd::ONE);
    let a_p12 = a_dd.add(b12);
    let a_p32 = a_dd.add(b32);

    let mut u_vals = Vec::with_capacity(n);
    let mut du_vals = Vec::with_capacity(n);
    let mut mag_b = Vec::with_capacity(n);
    let mut mag_d = Vec::with_capacity(n);
    let mut peak_b = Vec::with_capacity(n);
    let mut peak_d = Vec::with_capacity(n);

    for x in grid.points() {
        let y_dd = Dd::from_f64(x).sqr();
        let y = Cdd { re: y_dd, im: Dd::ZERO };
        let mut b = Cdd::ZERO;
        let mut c = Cdd::ZERO;
        let mut pb = 0.0f64;
        let mut pc = 0.0f64;
        if need_even {
            let (f1, _, l1) = kummer_series_dd(a_dd, b12, y)?;
            let (f1p, _, l1p) = kummer_series_dd(a_p1, b32, y)?;
            let tb = ce_dd.mul(f1);
            b = b.add(tb);
            pb = pb.max(tb.mag() * 10f64.powf(l1));
            let tc = ce_dd.mul(a_dd).mul(f1p).mul_f64(4.0 * x);
            c = c.add(tc);
            pc = pc.max(tc.mag() * 10f64.powf(l1p));
        }
        if need_odd {
            let (f2, _, l2) = kummer_series_dd(a_p12, b32, y)?;
            let (f2p, _, l2p) = kummer_series_dd(a_p32, b52, y)?;
            let tb = co_dd.mul(f2).mul_f64(x);
            b = b.add(tb);
            pb = pb.max(tb.mag() * 10f64.powf(l2));
            let tc1 = co_dd.mul(f2);
            let tc2 = co_dd.mul(a_p12).mul(f2p).mul_f64(4.0 / 3.0 * x * x);
            c = c.add(tc1).add(tc2);
            pc = pc.max(tc1.mag() * 10f64.powf(l2)).max(tc2.mag() * 10f64.powf(l2p));
        }
        let d = c.sub(b.mul_f64(x));
        let g = (-0.5 * y_dd.to_f64()).exp();
        u_vals.push(Complex64::new(b.re.to_f64() * g, b.im.to_f64() * g));
        du_vals.push(Complex64::new(d.re.to_f64() * g, d.im.to_f64() * g));
        mag_b.push(b.mag());
        mag_d.push(d.mag());
        peak_b.push(pb);
        peak_d.push(pc.max(pb * x.abs()));
    }

    let mut lost = 0.0f64;
    let envelope = |m: &[f64], i: usize| -> f64 {
        let lo = i.saturating_sub(1);
        let hi = (i + 1).min(n - 1);
        m[lo..=hi].iter().fold(0.0, |a, &b| a.max(b))
    };
    for i in 0..n {
        for (mag, peak) in [(&mag_b, &peak_b), (&mag_d, &peak_d)] {
            let env = envelope(mag, i);
            if env > 0.0 && peak[i] > env {
                lost = lost.max((peak[i] / env).log10());
            }
        }
    }

    Ok((
        GridFunction::new(grid, u_vals)?,
        GridFunction::new(grid, du_vals)?,
        lost,
    ))
}

/// A normalizable state: energy, ψ and ψ' on the grid.
#[derive(Debug, Clone)]
pub struct WaveFunction {
    pub energy: f64,
    pub psi: GridFunction<f64>,
    pub dpsi: GridFunction<f64>,
    pub normalized: bool,
}

impl WaveFunction {
    pub fn normalize(&mut self) {
        let s = 1.0 / self.psi.norm();
        self.psi = self.psi.map(|v| v * s);
        self.dpsi = self.dpsi.map(|v| v * s);
        self.normalized = true;
    }

    /// Sign convention: positive value at the largest-|ψ| grid point.
    /// Symmetric states have twin peaks equal only to rounding, so any
    /// point within 1e-9 of the max counts as a tie and the rightmost
    /// wins.
    pub fn fix_sign(&mut self) {
        let max = self.psi.max_abs();
        let mut idx = 0;
        for (i, v) in self.psi.values.iter().enumerate() {
            if v.abs() >= max * (1.0 - 1e-9) {
                idx = i;
            }
        }
        if self.psi.values[idx] < 0.0 {
            self.psi = self.psi.map(|v| -v);
            self.dpsi = self.dpsi.map(|v| -v);
        }
    }
}

/// Normalized oscillator eigenstate ψ_n with its analytic derivative
/// ψ_n' = N_n (2n H_{n-1} - x H_n) e^{-x²/2}.
pub fn oscillator_eigenstate(n: usize, grid: Grid) -> Result<WaveFunction> {
    if n > 100 {
        return Err(Error::ValidationError {
            field: "n".into(),
            msg: format!("eigenstate index {n} above the supported 100"),
        });
    }
    let mut norm = std::f64::consts::PI.powf(-0.25);
    for k in 1..=n {
        norm /= (2.0 * k as f64).sqrt();
    }
    let psi = GridFunction::from_fn(grid, |x| norm * hermite(n, x) * (-0.5 * x * x).exp())?;
    let dpsi = GridFunction::from_fn(grid, |x| {
        let hprev = if n == 0 { 0.0 } else { 2.0 * n as f64 * hermite(n - 1, x) };
        norm * (hprev - x * hermite(n, x)) * (-0.5 * x * x).exp()
    })?;
    // guard against gross truncation only: a boundary tail below 1% of
    // the peak costs under 1e-6 of the norm, which downstream identity
    // checks at 1e-5 can absorb
    let peak = psi.max_abs();
    for &edge in &[0, grid.n() - 1] {
        if psi.values[edge].abs() > 1e-2 * peak {
            return Err(Error::DomainTooNarrow(format!(
                "psi_{n} keeps {:.3e} of its peak at x = {}, grid truncates the state",
                psi.values[edge].abs() / peak,
                grid.x(edge)
            )));
        }
    }
    let mut wf = WaveFunction { energy: n as f64 + 0.5, psi, dpsi, normalized: true };
    wf.fix_sign();
    Ok(wf)
}

/// Physical eigenstate packaged as a seed (for transformations that
/// delete or reshuffle existing levels).
pub fn eigenstate_seed(n: usize, grid: Grid) -> Result<SeedSolution<f64>> {
    let wf = oscillator_eigenstate(n, grid)?;
    let nu = if n % 2 == 0 { NuParam::real(0.0) } else { NuParam::Infinite };
    Ok(SeedSolution {
        epsilon: Complex64::new(wf.energy, 0.0),
        nu,
        u: wf.psi,
        du: wf.dpsi,
        kind: SeedKind::PhysicalEigenstate,
        digits_lost: 0.0,
    })
}

/// Sign changes of f along the grid. Samples below atol = 1e-12 max|f|
/// inherit the sign of the nearest non-tiny neighbor, so grazing a zero
/// does not count and crossing one counts once.
pub fn count_nodes(f: &GridFunction<f64>) -> usize {
    let atol = 1e-12 * f.max_abs();
    let mut count = 0;
    let mut last: Option<f64> = None;
    for &v in &f.values {
        if v.abs() <= atol {
            continue;
        }
        if let Some(p) = last {
            if p * v < 0.0 {
                count += 1;
            }
        }
        last = Some(v);
    }
    count
}

/// Independent check that u solves the equation: centered second
/// difference of u against (x² - 2ε)u, max over the interior (outer 5%
/// per side excluded), scaled by the largest |(x² - 2ε)u| on the grid.
pub fn ode_residual_fd2<T: Scalar>(u: &GridFunction<T>, epsilon: Complex64) -> f64 {
    let n = u.grid.n();
    let h = u.grid.h();
    let trim = (n / 20).max(1);
    let lift = |v: T| Complex64::new(v.re_s(), v.im_s());
    let rhs = |i: usize| {
        let x = u.grid.x(i);
        (Complex64::new(x * x, 0.0) - epsilon * 2.0) * lift(u.values[i])
    };
    let scale = (0..n).map(|i| rhs(i).norm()).fold(0.0, f64::max);
    let mut worst = 0.0f64;
    for i in trim..n - trim {
        let d2 = (lift(u.values[i + 1]) - lift(u.values[i]) * 2.0 + lift(u.values[i - 1]))
            / (h * h);
        worst = worst.max((d2 - rhs(i)).norm());
    }
    worst / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid_default() -> Grid {
        Grid::new(-8.0, 8.0, 3201).unwrap()
    }

    #[test]
    fn even_branch_at_half_is_the_ground_state() {
        let g = grid_default();
        let seed = general_solution_real(0.5, NuParam::real(0.0), g).unwrap();
        let psi0 = oscillator_eigenstate(0, g).unwrap();
        let s = 1.0 / seed.u.norm();
        for i in 0..g.n() {
            assert_relative_eq!(seed.u.values[i] * s, psi0.psi.values[i], epsilon = 1e-12);
            assert_relative_eq!(seed.du.values[i] * s, psi0.dpsi.values[i], epsilon = 1e-12);
        }
        assert!(seed.digits_lost < 1.0);
    }

    #[test]
    fn odd_branch_at_three_halves_is_the_first_excited_state() {
        let g = grid_default();
        let seed = general_solution_real(1.5, NuParam::Infinite, g).unwrap();
        let psi1 = oscillator_eigenstate(1, g).unwrap();
        let s = 1.0 / seed.u.norm();
        let flip = if seed.u.values[g.n() - 1] * psi1.psi.values[g.n() - 1] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..g.n() {
            assert_relative_eq!(flip * seed.u.values[i] * s, psi1.psi.values[i], epsilon = 1e-10);
            assert_relative_eq!(flip * seed.du.values[i] * s, psi1.dpsi.values[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn minus_half_energy_matches_erf_closed_form() {
        let g = grid_default();
        let nu = 0.3;
        let seed = general_solution_real(-0.5, NuParam::real(nu), g).unwrap();
        for i in 0..g.n() {
            let x = g.x(i);
            let want = (0.5 * x * x).exp() * (1.0 + nu * crate::specfun::erf(x));
            assert_relative_eq!(seed.u.values[i], want, max_relative = 1e-10);
        }
    }

    #[test]
    fn even_eigenvalue_with_finite_nu_collapses_to_eigenstate() {
        let g = grid_default();
        let seed = general_solution_real(2.5, NuParam::real(0.7), g).unwrap();
        let psi2 = oscillator_eigenstate(2, g).unwrap();
        assert_eq!(count_nodes(&seed.u), 2);
        let s = 1.0 / seed.u.norm();
        let flip = if seed.u.values[g.n() - 1] * psi2.psi.values[g.n() - 1] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..g.n() {
            assert_relative_eq!(flip * seed.u.values[i] * s, psi2.psi.values[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn odd_eigenvalue_with_finite_nu_is_a_collision() {
        let g = grid_default();
        match general_solution_real(1.5, NuParam::real(0.7), g) {
            Err(Error::EnergyCollision(e)) => assert_relative_eq!(e, 1.5),
            other => panic!("expected energy collision, got {other:?}"),
        }
    }

    #[test]
    fn seed_below_ground_state_is_nodeless() {
        let g = grid_default();
        let seed = general_solution_real(-1.0, NuParam::real(0.9), g).unwrap();
        assert_eq!(count_nodes(&seed.u), 0);
    }

    #[test]
    fn seed_between_levels_has_the_expected_nodes() {
        let g = Grid::new(-6.0, 6.0, 12001).unwrap();
        let seed = general_solution_real(3.0, NuParam::real(0.9), g).unwrap();
        assert_eq!(count_nodes(&seed.u), 4);
    }

    #[test]
    fn seeds_satisfy_the_equation_by_second_differences() {
        let g = grid_default();
        for (eps, nu) in [(-1.2, 1.1), (3.2, 1.1)] {
            let seed = general_solution_real(eps, NuParam::real(nu), g).unwrap();
            let r = ode_residual_fd2(&seed.u, Complex64::new(eps, 0.0));
            assert!(r < 1e-4, "fd2 residual {r:.3e} at eps = {eps}");
        }
    }

    #[test]
    fn riccati_form_of_the_equation_holds() {
        let g = grid_default();
        let seed = general_solution_real(-1.0, NuParam::real(0.9), g).unwrap();
        let thresh = 1e-8 * seed.u.max_abs();
        let h = g.h();
        for i in 1..g.n() - 1 {
            if seed.u.values[i - 1].abs() <= thresh
                || seed.u.values[i].abs() <= thresh
                || seed.u.values[i + 1].abs() <= thresh
            {
                continue;
            }
            let alpha = |j: usize| seed.du.values[j] / seed.u.values[j];
            let dalpha = (alpha(i + 1) - alpha(i - 1)) / (2.0 * h);
            let x = g.x(i);
            let lhs = dalpha + alpha(i) * alpha(i);
            let rhs = x * x + 2.0;
            assert_relative_eq!(lhs, rhs, max_relative = 1e-5);
        }
    }

    #[test]
    fn wronskian_of_equal_energy_seeds_is_constant() {
        let g = Grid::new(-4.0, 4.0, 801).unwrap();
        let s1 = general_solution_real(0.3, NuParam::real(0.4), g).unwrap();
        let s2 = general_solution_real(0.3, NuParam::real(-0.7), g).unwrap();
        let w = |i: usize| s1.u.values[i] * s2.du.values[i] - s2.u.values[i] * s1.du.values[i];
        let mid = w(g.n() / 2);
        assert!(mid.abs() > 1e-3, "independent solutions have nonzero wronskian");
        for i in 0..g.n() {
            assert_relative_eq!(w(i), mid, max_relative = 1e-6);
        }
    }

    #[test]
    fn complex_energy_seed_is_finite_and_solves_the_equation() {
        let g = Grid::new(-6.5, 6.5, 2601).unwrap();
        let eps = Complex64::new(5.4, 0.05);
        let seed = general_solution(eps, NuParam::Finite(Complex64::new(-1.0, 0.0)), g).unwrap();
        assert!(seed.digits_lost < MAX_DIGITS_LOST, "lost {:.1}", seed.digits_lost);
        let r = ode_residual_fd2(&seed.u, eps);
        assert!(r < 1e-4, "fd2 residual {r:.3e}");
    }

    #[test]
    fn eigenstates_are_normalized_with_consistent_derivative() {
        let g = Grid::new(-10.0, 10.0, 4001).unwrap();
        let wf = oscillator_eigenstate(2, g).unwrap();
        assert_relative_eq!(wf.psi.norm(), 1.0, epsilon = 1e-8);
        let fd = wf.psi.fd_derivative();
        let scale = wf.dpsi.max_abs();
        for i in 2..g.n() - 2 {
            assert!((fd.values[i] - wf.dpsi.values[i]).abs() < 1e-8 * scale);
        }
        assert_eq!(count_nodes(&wf.psi), 2);
    }

    #[test]
    fn narrow_grid_truncating_an_eigenstate_is_rejected() {
        let g = Grid::new(-4.0, 4.0, 801).unwrap();
        match oscillator_eigenstate(3, g) {
            Err(Error::DomainTooNarrow(_)) => {}
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn eigenstate_seed_keeps_parity_labels() {
        let g = grid_default();
        let s0 = eigenstate_seed(0, g).unwrap();
        let s1 = eigenstate_seed(1, g).unwrap();
        assert_eq!(s0.nu, NuParam::real(0.0));
        assert_eq!(s1.nu, NuParam::Infinite);
        assert_eq!(s0.kind, SeedKind::PhysicalEigenstate);
        assert_relative_eq!(s1.epsilon.re, 1.5);
    }

    #[test]
    fn node_counting_ignores_grazing_zeros() {
        let g = Grid::new(-2.0, 2.0, 401).unwrap();
        let touch = GridFunction::from_fn(g, |x| x * x).unwrap();
        assert_eq!(count_nodes(&touch), 0);
        let cross = GridFunction::from_fn(g, |x| x).unwrap();
        assert_eq!(count_nodes(&cross), 1);
    }
}
