//! Independent spectral verification.
//!
//! Potentials constructed elsewhere in the crate are re-checked here by
//! brute force: finite-difference discretization with Dirichlet walls,
//! Sturm-sequence bisection for the low eigenvalues, inverse iteration
//! for eigenvectors. Nothing in this module reuses the factorization
//! machinery under test, which is the point.

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

/// Symmetric tridiagonal matrix: `diag` has n entries, `off` the n-1
/// subdiagonal couplings.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

/// -ψ''/2 + Vψ on the grid with ψ = 0 outside: diagonal 1/h² + V_i,
/// off-diagonal -1/(2h²), over all n interior-treated points.
pub fn discretize(v: &GridFunction<f64>) -> Tridiagonal {
    let n = v.grid.n();
    let h = v.grid.h();
    let inv_h2 = 1.0 / (h * h);
    Tridiagonal {
        diag: v.values.iter().map(|&vi| inv_h2 + vi).collect(),
        off: vec![-0.5 * inv_h2; n - 1],
    }
}

/// Number of eigenvalues strictly below lambda: negative pivots of the
/// LDLT factorization of T - lambda I. A vanishing pivot is nudged to
/// -1e-300, which counts the exact hit as "below" and keeps the sweep
/// monotone.
pub fn sturm_count(t: &Tridiagonal, lambda: f64) -> usize {
    let mut count = 0;
    let mut d = t.diag[0] - lambda;
    if d.abs() < 1e-300 {
        d = -1e-300;
    }
    if d < 0.0 {
        count += 1;
    }
    for i in 1..t.diag.len() {
        d = t.diag[i] - lambda - t.off[i - 1] * t.off[i - 1] / d;
        if d.abs() < 1e-300 {
            d = -1e-300;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// The m lowest eigenvalues by Sturm bisection, each to 1e-10 absolute.
pub fn lowest_eigenvalues(t: &Tridiagonal, m: usize) -> Vec<f64> {
    let n = t.diag.len();
    let radius = |i: usize| {
        let left = if i > 0 { t.off[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { t.off[i].abs() } else { 0.0 };
        left + right
    };
    let mut lo_all = f64::INFINITY;
    let mut hi_all = f64::NEG_INFINITY;
    for i in 0..n {
        lo_all = lo_all.min(t.diag[i] - radius(i));
        hi_all = hi_all.max(t.diag[i] + radius(i));
    }
    (1..=m.min(n))
        .map(|k| {
            let mut lo = lo_all;
            let mut hi = hi_all;
            while hi - lo > 1e-10 {
                let mid = 0.5 * (lo + hi);
                if sturm_count(t, mid) >= k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

fn pivot(p: f64) -> f64 {
    if p.abs() < 1e-300 {
        1e-300
    } else {
        p
    }
}

/// Solve (T - lambda I) x = b with partial pivoting; the fill-in second
/// superdiagonal is what row swaps cost on a tridiagonal.
fn shifted_solve(t: &Tridiagonal, lambda: f64, b: &[f64]) -> Vec<f64> {
    let n = t.diag.len();
    let mut main: Vec<f64> = t.diag.iter().map(|&d| d - lambda).collect();
    let mut upper = vec![0.0; n];
    upper[..n - 1].copy_from_slice(&t.off);
    let mut upper2 = vec![0.0; n];
    let lower = &t.off;
    let mut rhs = b.to_vec();
    for i in 0..n - 1 {
        if lower[i].abs() > main[i].abs() {
            // swap rows i and i+1, then eliminate column i
            rhs.swap(i, i + 1);
            let displaced = (main[i], upper[i]);
            main[i] = lower[i];
            upper[i] = main[i + 1];
            upper2[i] = if i + 1 < n - 1 { upper[i + 1] } else { 0.0 };
            let f = displaced.0 / pivot(main[i]);
            main[i + 1] = displaced.1 - f * upper[i];
            if i + 1 < n - 1 {
                upper[i + 1] = -f * upper2[i];
            }
            rhs[i + 1] -= f * rhs[i];
        } else {
            let f = lower[i] / pivot(main[i]);
            main[i + 1] -= f * upper[i];
            rhs[i + 1] -= f * rhs[i];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        if i + 1 < n {
            s -= upper[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= upper2[i] * x[i + 2];
        }
        x[i] = s / pivot(main[i]);
    }
    x
}

/// Eigenvector for an isolated eigenvalue by inverse iteration.
pub fn inverse_iteration(t: &Tridiagonal, lambda: f64) -> Vec<f64> {
    let n = t.diag.len();
    // deterministic start with no accidental symmetry
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.3 * (2.7 * i as f64).sin()).collect();
    for _ in 0..4 {
        let w = shifted_solve(t, lambda + 1e-12, &v);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        v = w.into_iter().map(|x| x / norm).collect();
    }
    v
}

/// Fraction of the eigenvector mass sitting on the boundary points.
/// Above ~1e-6 the Dirichlet wall is biting and the eigenvalue is not
/// trustworthy at oracle precision.
pub fn boundary_fraction(v: &[f64]) -> f64 {
    let max = v.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    v[0].abs().max(v[v.len() - 1].abs()) / max
}

/// Copy a potential onto a wider grid with identical spacing, extending
/// each side by x²/2 plus the offset measured at that construction edge.
/// No interpolation: the grids must align exactly.
pub fn extend_potential(v: &GridFunction<f64>, target: Grid) -> Result<GridFunction<f64>> {
    let src = v.grid;
    let h = src.h();
    let misaligned = (target.h() - h).abs() > 1e-12 * h
        || target.xmin() > src.xmin() + 1e-12
        || target.xmax() < src.xmax() - 1e-12;
    let shift = (src.xmin() - target.xmin()) / h;
    if misaligned || (shift - shift.round()).abs() > 1e-6 {
        return Err(Error::ValidationError {
            field: "grid".into(),
            msg: format!(
                "target [{}, {}] h={} does not align with source [{}, {}] h={}",
                target.xmin(),
                target.xmax(),
                target.h(),
                src.xmin(),
                src.xmax(),
                h
            ),
        });
    }
    let i0 = shift.round() as usize;
    let off_left = v.values[0] - 0.5 * src.xmin() * src.xmin();
    let off_right = v.values[src.n() - 1] - 0.5 * src.xmax() * src.xmax();
    let mut vals = Vec::with_capacity(target.n());
    for i in 0..target.n() {
        let x = target.x(i);
        vals.push(if i < i0 {
            0.5 * x * x + off_left
        } else if i < i0 + src.n() {
            v.values[i - i0]
        } else {
            0.5 * x * x + off_right
        });
    }
    GridFunction::new(target, vals)
}

/// Positional comparison of the lowest computed levels against the
/// expected list; two extra computed levels are kept for context.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub computed: Vec<f64>,
    pub expected: Vec<f64>,
    pub abs_errors: Vec<f64>,
    pub tol: f64,
    pub passed: bool,
}

pub fn check_spectrum(v: &GridFunction<f64>, expected: &[f64], tol: f64) -> SpectrumReport {
    let t = discretize(v);
    let computed = lowest_eigenvalues(&t, expected.len() + 2);
    let abs_errors: Vec<f64> = expected
        .iter()
        .zip(&computed)
        .map(|(e, c)| (e - c).abs())
        .collect();
    let passed = abs_errors.iter().all(|&e| e <= tol);
    SpectrumReport { computed, expected: expected.to_vec(), abs_errors, tol, passed }
}

impl SpectrumReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,expected,computed,abs_error\n");
        for i in 0..self.computed.len() {
            let (e, err) = if i < self.expected.len() {
                (format!("{}", self.expected[i]), format!("{}", self.abs_errors[i]))
            } else {
                (String::new(), String::new())
            };
            out.push_str(&format!("{},{},{},{}\n", i, e, self.computed[i], err));
        }
        out
    }
}

impl std::fmt::Display for SpectrumReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{:>5} {:>14} {:>14} {:>10}", "index", "expected", "computed", "error")?;
        for i in 0..self.computed.len() {
            if i < self.expected.len() {
                writeln!(
                    f,
                    "{:>5} {:>14.8} {:>14.8} {:>10.2e}",
                    i, self.expected[i], self.computed[i], self.abs_errors[i]
                )?;
            } else {
                writeln!(f, "{:>5} {:>14} {:>14.8} {:>10}", i, "", self.computed[i], "")?;
            }
        }
        write!(f, "tolerance {:.1e}: {}", self.tol, if self.passed { "pass" } else { "FAIL" })
    }
}

/// Eigenvalues of a small dense symmetric matrix by cyclic Jacobi,
/// ascending. Used for Gram-matrix positivity checks.
pub fn symmetric_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eig
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_by_two_eigenvalues_are_exact() {
        let t = Tridiagonal { diag: vec![2.0, 2.0], off: vec![1.0] };
        let eig = lowest_eigenvalues(&t, 2);
        assert_relative_eq!(eig[0], 1.0, epsilon = 1e-9);
        assert_relative_eq!(eig[1], 3.0, epsilon = 1e-9);
    }

    #[test]
    fn sturm_counts_are_monotone_for_the_oscillator() {
        let g = Grid::new(-10.0, 10.0, 2001).unwrap();
        let v = crate::schrodinger::oscillator_potential(g);
        let t = discretize(&v);
        assert_eq!(sturm_count(&t, 0.0), 0);
        assert_eq!(sturm_count(&t, 1.0), 1);
        assert_eq!(sturm_count(&t, 2.0), 2);
        assert_eq!(sturm_count(&t, 3.0), 3);
    }

    #[test]
    fn particle_in_a_box_levels() {
        // free tridiagonal: eigenvalues (1 - cos(k pi/(n+1)))/h^2 exactly,
        // which is the box with Dirichlet walls one cell outside the grid
        let g = Grid::new(0.0, std::f64::consts::PI, 2001).unwrap();
        let v = GridFunction::from_fn(g, |_| 0.0).unwrap();
        let n = g.n();
        let h = g.h();
        let eig = lowest_eigenvalues(&discretize(&v), 3);
        for (k, &e) in eig.iter().enumerate() {
            let theta = (k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64;
            let exact = (1.0 - theta.cos()) / (h * h);
            assert_relative_eq!(e, exact, epsilon = 1e-8);
            // and the continuum level to discretization accuracy
            let kf = (k + 1) as f64;
            assert_relative_eq!(e, 0.5 * kf * kf, max_relative = 3e-3);
        }
    }

    #[test]
    fn oscillator_levels_to_discretization_accuracy() {
        let g = Grid::new(-12.0, 12.0, 4801).unwrap();
        let v = crate::schrodinger::oscillator_potential(g);
        let eig = lowest_eigenvalues(&discretize(&v), 6);
        for (n, &e) in eig.iter().enumerate() {
            assert!(
                (e - (n as f64 + 0.5)).abs() < 5e-5,
                "level {n}: {e} vs {}",
                n as f64 + 0.5
            );
        }
    }

    #[test]
    fn eigenvalue_error_shrinks_fourfold_with_half_step() {
        let coarse = Grid::new(-8.0, 8.0, 1601).unwrap();
        let fine = Grid::new(-8.0, 8.0, 3201).unwrap();
        let e_c = lowest_eigenvalues(&discretize(&crate::schrodinger::oscillator_potential(coarse)), 1)[0];
        let e_f = lowest_eigenvalues(&discretize(&crate::schrodinger::oscillator_potential(fine)), 1)[0];
        let ratio = (e_c - 0.5).abs() / (e_f - 0.5).abs();
        assert!(ratio > 3.5, "second-order convergence expected, ratio {ratio}");
    }

    #[test]
    fn inverse_iteration_recovers_the_gaussian_ground_state() {
        let g = Grid::new(-10.0, 10.0, 2001).unwrap();
        let v = crate::schrodinger::oscillator_potential(g);
        let t = discretize(&v);
        let e0 = lowest_eigenvalues(&t, 1)[0];
        let vec = inverse_iteration(&t, e0);
        let psi0 = crate::schrodinger::oscillator_eigenstate(0, g).unwrap();
        let dot: f64 = vec.iter().zip(&psi0.psi.values).map(|(a, b)| a * b).sum();
        let vnorm: f64 = vec.iter().map(|x| x * x).sum::<f64>().sqrt();
        let pnorm: f64 = psi0.psi.values.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(dot.abs() / (vnorm * pnorm) > 1.0 - 1e-8);
        assert!(boundary_fraction(&vec) < 1e-6);
    }

    #[test]
    fn extended_potential_keeps_offsets() {
        let src_grid = Grid::new(-4.0, 4.0, 801).unwrap();
        let src = GridFunction::from_fn(src_grid, |x| 0.5 * x * x + 1.0).unwrap();
        let target = Grid::new(-8.0, 8.0, 1601).unwrap();
        let ext = extend_potential(&src, target).unwrap();
        assert_relative_eq!(ext.values[0], 0.5 * 64.0 + 1.0, epsilon = 1e-10);
        let i_src = target.index_of(-4.0);
        assert_eq!(ext.values[i_src], src.values[0]);
        assert_relative_eq!(ext.values[target.index_of(2.0)], 3.0, epsilon = 1e-10);
    }

    #[test]
    fn misaligned_extension_is_rejected() {
        let src_grid = Grid::new(-4.0, 4.0, 801).unwrap();
        let src = GridFunction::from_fn(src_grid, |x| 0.5 * x * x).unwrap();
        // same spacing but offset by half a cell
        assert!(extend_potential(&src, Grid::new(-8.005, 7.995, 1601).unwrap()).is_err());
        // different spacing
        assert!(extend_potential(&src, Grid::new(-8.0, 8.0, 1201).unwrap()).is_err());
    }

    #[test]
    fn jacobi_matches_known_spectrum() {
        // eigenvalues of [[2,1,0],[1,3,1],[0,1,4]] from its characteristic
        // polynomial l^3 - 9l^2 + 24l - 18, checked by direct evaluation
        let a = vec![vec![2.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 4.0]];
        let eig = symmetric_eigenvalues(a);
        for &l in &eig {
            let p = l * l * l - 9.0 * l * l + 24.0 * l - 18.0;
            assert!(p.abs() < 1e-9, "char poly at {l} is {p}");
        }
        assert_relative_eq!(eig.iter().sum::<f64>(), 9.0, epsilon = 1e-10);
    }

    #[test]
    fn spectrum_report_formats_and_judges() {
        let g = Grid::new(-10.0, 10.0, 2001).unwrap();
        let v = crate::schrodinger::oscillator_potential(g);
        let report = check_spectrum(&v, &[0.5, 1.5, 2.5], 5e-3);
        assert!(report.passed);
        assert_eq!(report.computed.len(), 5);
        let csv = report.to_csv();
        assert!(csv.starts_with("index,expected,computed,abs_error\n"));
        assert_eq!(csv.lines().count(), 6);
        assert!(format!("{report}").contains("pass"));
    }
}
