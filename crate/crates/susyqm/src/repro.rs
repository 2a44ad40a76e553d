//! Named reproduction cases and the pipelines behind the CLI commands.
//!
//! Each case builds its transform from scratch, measures the agreed
//! quantities, and returns a list of pass/fail checks plus deterministic
//! CSV artifacts. A check passes when its measured value is at or below
//! its bound, so every tolerance is pinned right where the measurement
//! is made.

use std::path::Path;

use num_complex::Complex64;

use crate::algebra::{
    algebra_report, bk_annihilation_residual, commutator_residual, g_function, ladder_apply,
    number_op_eigenvalue, report_to_csv, Direction, LadderMode, LadderSpec,
};
use crate::coherent::{
    canonical_kernel, canonical_measure_density, coherent_state, eigen_residual_grid,
    gram_min_eigenvalue, kernel, measure_moment_rhs, uncertainty_closed, uncertainty_fock,
    CoherentSpec,
};
use crate::config::{Command, Method, RunConfig};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::schrodinger::{
    eigenstate_seed, general_solution, general_solution_real, oscillator_eigenstate, NuParam,
    SeedSolution, WaveFunction,
};
use crate::susy2::{
    apply_b2_dagger, complex_case, confluent_case, intertwining_residual2, real_case,
    SecondOrderTransform,
};
use crate::susy_chain::{apply_bk_dagger, build_chain, chain_missing_state, SusyChain};
use crate::verify::{boundary_fraction, check_spectrum, extend_potential};

pub const DEFAULT_GRID: (f64, f64, usize) = (-8.0, 8.0, 3201);
/// Narrower box for the complex design: its seed loses too many digits
/// farther out, and the potential is quadratic well before the edge.
pub const COMPLEX_GRID: (f64, f64, usize) = (-6.5, 6.5, 2601);
/// Calibrated for the chain-vs-direct comparison: wide enough to hold
/// the interior, fine enough that fourth-order truncation sits a factor
/// of ~2.6 under the 1e-8 bound without amplifying rounding noise.
pub const EQUIV_GRID: (f64, f64, usize) = (-6.0, 6.0, 6001);
/// Sturm oracle box, h = 0.005.
pub const ORACLE_GRID: (f64, f64, usize) = (-12.0, 12.0, 4801);

pub const SPECTRUM_TOL: f64 = 5e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseId {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Equiv,
    Am,
    Intertwining,
    LadderK1,
    LadderK2,
    Cs,
    Uncertainty,
    All,
}

impl CaseId {
    pub const NAMED: [CaseId; 12] = [
        CaseId::Fig1,
        CaseId::Fig2,
        CaseId::Fig3,
        CaseId::Fig4,
        CaseId::Fig5,
        CaseId::Equiv,
        CaseId::Am,
        CaseId::Intertwining,
        CaseId::LadderK1,
        CaseId::LadderK2,
        CaseId::Cs,
        CaseId::Uncertainty,
    ];

    pub fn parse(s: &str) -> Result<CaseId> {
        match s {
            "fig1" => Ok(CaseId::Fig1),
            "fig2" => Ok(CaseId::Fig2),
            "fig3" => Ok(CaseId::Fig3),
            "fig4" => Ok(CaseId::Fig4),
            "fig5" => Ok(CaseId::Fig5),
            "equiv" => Ok(CaseId::Equiv),
            "am" => Ok(CaseId::Am),
            "intertwining" => Ok(CaseId::Intertwining),
            "ladder_k1" => Ok(CaseId::LadderK1),
            "ladder_k2" => Ok(CaseId::LadderK2),
            "cs" => Ok(CaseId::Cs),
            "uncertainty" => Ok(CaseId::Uncertainty),
            "all" => Ok(CaseId::All),
            other => Err(Error::UnknownCase(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CaseId::Fig1 => "fig1",
            CaseId::Fig2 => "fig2",
            CaseId::Fig3 => "fig3",
            CaseId::Fig4 => "fig4",
            CaseId::Fig5 => "fig5",
            CaseId::Equiv => "equiv",
            CaseId::Am => "am",
            CaseId::Intertwining => "intertwining",
            CaseId::LadderK1 => "ladder_k1",
            CaseId::LadderK2 => "ladder_k2",
            CaseId::Cs => "cs",
            CaseId::Uncertainty => "uncertainty",
            CaseId::All => "all",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub label: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    pub fn of(label: impl Into<String>, value: f64, tol: f64) -> Check {
        Check { label: label.into(), value, tol, pass: value <= tol }
    }
}

#[derive(Debug, Clone, Default)]
pub struct CaseOutcome {
    pub case: String,
    pub checks: Vec<Check>,
    /// (file name, content) pairs, written next to report.txt
    pub files: Vec<(String, String)>,
}

impl CaseOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn report(&self) -> String {
        let mut out = format!("case {}\n", self.case);
        for c in &self.checks {
            let verdict = if c.pass { "PASS" } else { "FAIL" };
            out.push_str(&format!(
                "{verdict} {label}: {value:.3e} (bound {tol:.1e})\n",
                label = c.label,
                value = c.value,
                tol = c.tol
            ));
        }
        out.push_str(if self.passed() { "result: PASS\n" } else { "result: FAIL\n" });
        out
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOverrides {
    pub tol: Option<f64>,
    pub grid: Option<(f64, f64, usize)>,
}

fn make_grid(spec: (f64, f64, usize)) -> Result<Grid> {
    Grid::new(spec.0, spec.1, spec.2)
}

fn potential_csv(t: &SecondOrderTransform) -> String {
    let mut out = String::from("x,v0,v2,eta\n");
    for i in 0..t.grid.n() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            t.grid.x(i),
            t.v0.values[i],
            t.v2.values[i],
            t.eta.values[i]
        ));
    }
    out
}

fn chain_potential_csv(chain: &SusyChain) -> String {
    let mut out = String::from("x,v0,vk\n");
    let g = chain.grid;
    for i in 0..g.n() {
        out.push_str(&format!(
            "{},{},{}\n",
            g.x(i),
            chain.v0().values[i],
            chain.vk().values[i]
        ));
    }
    out
}

fn spectrum_check(
    label: &str,
    v: &GridFunction<f64>,
    expected: &[f64],
    tol: f64,
) -> Result<(Check, String)> {
    let wide = extend_potential(v, make_grid(ORACLE_GRID)?)?;
    let rep = check_spectrum(&wide, expected, tol);
    let worst = rep.abs_errors.iter().fold(0.0f64, |a, &b| a.max(b));
    Ok((Check::of(label, worst, tol), rep.to_csv()))
}

fn fig1_transform(grid: Grid) -> Result<SecondOrderTransform> {
    let u1 = general_solution_real(-1.0, NuParam::real(0.9), grid)?;
    let u2 = general_solution_real(-1.2, NuParam::real(1.1), grid)?;
    real_case(&u1, &u2)
}

fn fig2_transform(grid: Grid) -> Result<SecondOrderTransform> {
    let u1 = general_solution_real(3.2, NuParam::real(1.1), grid)?;
    let u2 = general_solution_real(3.0, NuParam::real(0.9), grid)?;
    real_case(&u1, &u2)
}

fn fig3_transform(grid: Grid) -> Result<SecondOrderTransform> {
    let u = general_solution_real(4.0, NuParam::real(1.0), grid)?;
    confluent_case(&u, 5.0, 0.0)
}

fn fig4_transform(grid: Grid) -> Result<SecondOrderTransform> {
    let u = eigenstate_seed(1, grid)?;
    confluent_case(&u, 1.0, 0.0)
}

fn fig5_transform(grid: Grid) -> Result<SecondOrderTransform> {
    let u = general_solution(Complex64::new(5.4, 0.05), NuParam::real(-1.0), grid)?;
    complex_case(&u)
}

fn figure_case(
    id: CaseId,
    ov: &RunOverrides,
) -> Result<CaseOutcome> {
    let name = id.name();
    let (default_grid, expected): ((f64, f64, usize), Vec<f64>) = match id {
        CaseId::Fig1 => (DEFAULT_GRID, vec![-1.2, -1.0, 0.5, 1.5, 2.5]),
        CaseId::Fig2 => (DEFAULT_GRID, vec![0.5, 1.5, 2.5, 3.0, 3.2, 3.5]),
        CaseId::Fig3 => (DEFAULT_GRID, vec![0.5, 1.5, 2.5, 3.5, 4.0, 4.5]),
        CaseId::Fig4 => (DEFAULT_GRID, vec![0.5, 1.5, 2.5, 3.5, 4.5, 5.5]),
        CaseId::Fig5 => (COMPLEX_GRID, vec![0.5, 1.5, 2.5, 3.5, 4.5, 5.5]),
        _ => unreachable!("not a figure case"),
    };
    let grid = make_grid(ov.grid.unwrap_or(default_grid))?;
    let t = match id {
        CaseId::Fig1 => fig1_transform(grid)?,
        CaseId::Fig2 => fig2_transform(grid)?,
        CaseId::Fig3 => fig3_transform(grid)?,
        CaseId::Fig4 => fig4_transform(grid)?,
        CaseId::Fig5 => fig5_transform(grid)?,
        _ => unreachable!(),
    };
    let tol = ov.tol.unwrap_or(SPECTRUM_TOL);
    let mut checks = Vec::new();
    let mut files = Vec::new();
    if id == CaseId::Fig5 {
        checks.push(Check::of("imaginary part of V2", t.im_v2_max, 1e-10));
    }
    let (check, csv) = spectrum_check("spectrum deviation", &t.v2, &expected, tol)?;
    checks.push(check);
    files.push((format!("{name}_potential.csv"), potential_csv(&t)));
    files.push((format!("{name}_spectrum.csv"), csv));
    Ok(CaseOutcome { case: name.to_string(), checks, files })
}

fn equiv_case(ov: &RunOverrides) -> Result<CaseOutcome> {
    let grid = make_grid(ov.grid.unwrap_or(EQUIV_GRID))?;
    let s1 = general_solution_real(-1.0, NuParam::real(0.9), grid)?;
    let s2 = general_solution_real(-1.2, NuParam::real(1.1), grid)?;
    let chain = build_chain(&[s1.clone(), s2.clone()], grid)?;
    let direct = real_case(&s1, &s2)?;
    let n = grid.n();
    let lo = n / 20;
    let hi = n - n / 20;
    let mut worst = 0.0f64;
    let mut csv = String::from("x,v2_direct,v2_chain,diff\n");
    for i in 0..n {
        let d = (direct.v2.values[i] - chain.vk().values[i]).abs();
        if i >= lo && i < hi {
            worst = worst.max(d);
        }
        csv.push_str(&format!(
            "{},{},{},{}\n",
            grid.x(i),
            direct.v2.values[i],
            chain.vk().values[i],
            d
        ));
    }
    let tol = ov.tol.unwrap_or(1e-8);
    Ok(CaseOutcome {
        case: "equiv".into(),
        checks: vec![Check::of("chain vs direct potential, interior 90%", worst, tol)],
        files: vec![("equiv_potentials.csv".into(), csv)],
    })
}

fn am_case(ov: &RunOverrides) -> Result<CaseOutcome> {
    let grid = make_grid(ov.grid.unwrap_or(DEFAULT_GRID))?;
    let nu = 0.2;
    let seed = general_solution_real(-0.5, NuParam::real(nu), grid)?;
    let chain = build_chain(&[seed], grid)?;
    let ground = eigenstate_seed(0, grid)?;
    let conf = confluent_case(&ground, 1.0 / (2.0 * nu), 0.0)?;
    let n = grid.n();
    let lo = n / 20;
    let hi = n - n / 20;
    let mut offset_acc = 0.0;
    for i in lo..hi {
        offset_acc += conf.v2.values[i] - chain.vk().values[i];
    }
    let offset = offset_acc / (hi - lo) as f64;
    let mut worst = 0.0f64;
    let mut csv = String::from("x,v_first_order,v_confluent,diff_minus_offset\n");
    for i in 0..n {
        let d = conf.v2.values[i] - chain.vk().values[i] - offset;
        if i >= lo && i < hi {
            worst = worst.max(d.abs());
        }
        csv.push_str(&format!(
            "{},{},{},{}\n",
            grid.x(i),
            chain.vk().values[i],
            conf.v2.values[i],
            d
        ));
    }
    let tol = ov.tol.unwrap_or(1e-8);
    Ok(CaseOutcome {
        case: "am".into(),
        checks: vec![
            Check::of("offset sits at one", (offset - 1.0).abs(), tol),
            Check::of("aligned potentials, interior 90%", worst, tol),
        ],
        files: vec![("am_potentials.csv".into(), csv)],
    })
}

fn intertwining_case(ov: &RunOverrides) -> Result<CaseOutcome> {
    let tol = ov.tol.unwrap_or(1e-5);
    let mut checks = Vec::new();
    let mut csv = String::from("design,n,residual\n");
    // The complex design runs on [-6.3, 6.3]: its decaying tail is a
    // difference of two e^{x²/2}-growing series, so past |x| ~ 6.3 the
    // extended-precision budget is spent and the seed carries rough
    // point-to-point noise. The FD kinetic term amplifies roughness by
    // ~1/h, which would swamp the defect being measured (9e-6 on the
    // wider grid vs 3e-6 here, of which the genuine floor is ~1e-7).
    // psi_10 still clears the truncation guard at 6.3.
    let builders: [(&str, (f64, f64, usize), fn(Grid) -> Result<SecondOrderTransform>); 5] = [
        ("fig1", DEFAULT_GRID, fig1_transform),
        ("fig2", DEFAULT_GRID, fig2_transform),
        ("fig3", DEFAULT_GRID, fig3_transform),
        ("fig4", DEFAULT_GRID, fig4_transform),
        ("fig5", (-6.3, 6.3, 2521), fig5_transform),
    ];
    for (name, gspec, build) in builders {
        let grid = make_grid(ov.grid.unwrap_or(gspec))?;
        let t = build(grid)?;
        let mut worst = 0.0f64;
        for n in 0..=10 {
            let psi = oscillator_eigenstate(n, grid)?;
            // A level equal to a factorization energy is annihilated by the
            // raising map, so the relative defect is 0/0 there; the identity
            // then says exactly that the image vanishes, which is what gets
            // measured instead.
            let collided = t
                .new_states
                .iter()
                .any(|s| (s.state.energy - psi.energy).abs() < 1e-9);
            let r = if collided {
                apply_b2_dagger(&t, &psi)?.psi.norm() / psi.psi.norm()
            } else {
                intertwining_residual2(&t, &psi)?
            };
            worst = worst.max(r);
            csv.push_str(&format!("{name},{n},{r}\n"));
        }
        checks.push(Check::of(format!("{name} raising map residual, n <= 10"), worst, tol));
    }
    Ok(CaseOutcome {
        case: "intertwining".into(),
        checks,
        files: vec![("intertwining_residuals.csv".into(), csv)],
    })
}

fn oscillator_limit_chain(k: usize, grid: Grid) -> Result<SusyChain> {
    let mut seeds = Vec::new();
    if k >= 1 {
        seeds.push(general_solution_real(-0.5, NuParam::real(0.0), grid)?);
    }
    if k >= 2 {
        seeds.push(general_solution_real(-1.5, NuParam::Infinite, grid)?);
    }
    build_chain(&seeds, grid)
}

fn transformed_eigenstate(chain: &SusyChain, n: usize) -> Result<WaveFunction> {
    let psi = oscillator_eigenstate(n, chain.grid)?;
    let mut img = apply_bk_dagger(chain, &psi)?;
    img.normalize();
    Ok(img)
}

/// The shared checks behind the ladder cases and the algebra command.
fn ladder_suite(chain: &SusyChain, w_lin: f64, tol: f64) -> Result<(Vec<Check>, Vec<(String, String)>)> {
    let epsilons: Vec<f64> = chain.steps.iter().map(|s| s.epsilon).collect();
    let natural = LadderSpec { chain, mode: LadderMode::Natural };
    let linear = LadderSpec { chain, mode: LadderMode::Linearized { w: w_lin } };
    let mut checks = Vec::new();

    let mut worst_kernel = 0.0f64;
    for i in 1..=chain.k() {
        let miss = chain_missing_state(chain, i)?;
        worst_kernel = worst_kernel.max(bk_annihilation_residual(chain, &miss)?);
    }
    checks.push(Check::of("cascade annihilates the missing states", worst_kernel, tol));

    let mut worst_comm = 0.0f64;
    let mut worst_num = 0.0f64;
    for n in 1..=6 {
        let state = transformed_eigenstate(chain, n)?;
        worst_comm = worst_comm.max(commutator_residual(&natural, Direction::Down, &state)?);
        let down = ladder_apply(&natural, Direction::Down, &state)?;
        let want = number_op_eigenvalue(&epsilons, state.energy);
        worst_num = worst_num.max((down.psi.norm_sq() - want).abs() / want.abs());
    }
    checks.push(Check::of("commutator [H,L] = -L, n <= 6", worst_comm, tol));
    checks.push(Check::of("number operator diagonal, n <= 6", worst_num, tol));

    let mut worst_inc = 0.0f64;
    for n in 0..=10 {
        let (g0, _) = g_function(w_lin, n, &epsilons)?;
        let (g1, _) = g_function(w_lin, n + 1, &epsilons)?;
        worst_inc = worst_inc.max((g1 - g0 - 1.0).abs());
    }
    checks.push(Check::of("linearized increments are exactly one", worst_inc, 0.0));

    let mut worst_diag = 0.0f64;
    for n in 0..=5 {
        let state = transformed_eigenstate(chain, n)?;
        let up = ladder_apply(&linear, Direction::Up, &state)?;
        let down = ladder_apply(&linear, Direction::Down, &state)?;
        let measured = up.psi.norm_sq() - down.psi.norm_sq();
        let want = if n == 0 { 1.0 + w_lin } else { 1.0 };
        worst_diag = worst_diag.max((measured - want).abs());
    }
    checks.push(Check::of("linearized commutator diagonal", worst_diag, tol));

    let rows = algebra_report(&natural, 6)?;
    let files = vec![("algebra_report.csv".to_string(), report_to_csv(&rows))];
    Ok((checks, files))
}

fn ladder_case(k: usize, ov: &RunOverrides) -> Result<CaseOutcome> {
    let grid = make_grid(ov.grid.unwrap_or(DEFAULT_GRID))?;
    let chain = oscillator_limit_chain(k, grid)?;
    let tol = ov.tol.unwrap_or(1e-4);
    let (checks, mut files) = ladder_suite(&chain, k as f64, tol)?;
    let name = if k == 1 { "ladder_k1" } else { "ladder_k2" };
    for f in &mut files {
        f.0 = format!("{name}_{}", f.0);
    }
    Ok(CaseOutcome { case: name.into(), checks, files })
}

fn z_grid() -> Vec<Complex64> {
    let pts = [-2.1, -1.05, 0.0, 1.05, 2.1];
    let mut zs = Vec::with_capacity(25);
    for &re in &pts {
        for &im in &pts {
            zs.push(Complex64::new(re, im));
        }
    }
    zs
}

fn cs_case(ov: &RunOverrides) -> Result<CaseOutcome> {
    let mut checks = Vec::new();
    let mut files = Vec::new();

    // unit norm from the closed-form head, both ladder modes
    let mut worst_norm = 0.0f64;
    let mut csv = String::from("z_re,z_im,norm_natural,norm_linearized\n");
    for z in z_grid() {
        let nat = coherent_state(&CoherentSpec {
            epsilons: vec![-0.5],
            mode: LadderMode::Natural,
            z,
        })?;
        let lin = coherent_state(&CoherentSpec {
            epsilons: vec![-0.5],
            mode: LadderMode::Linearized { w: 1.0 },
            z,
        })?;
        worst_norm = worst_norm.max((nat.norm_sq() - 1.0).abs());
        worst_norm = worst_norm.max((lin.norm_sq() - 1.0).abs());
        csv.push_str(&format!("{},{},{},{}\n", z.re, z.im, nat.norm_sq(), lin.norm_sq()));
    }
    checks.push(Check::of("unit norm on the z grid, both modes", worst_norm, ov.tol.unwrap_or(1e-10)));
    files.push(("cs_norms.csv".into(), csv));

    // the label is an eigenvalue on the grid
    let grid = make_grid(ov.grid.unwrap_or(DEFAULT_GRID))?;
    let chain = oscillator_limit_chain(1, grid)?;
    let cs = coherent_state(&CoherentSpec {
        epsilons: vec![-0.5],
        mode: LadderMode::Natural,
        z: Complex64::new(1.2, -0.5),
    })?;
    let resid = eigen_residual_grid(&chain, &cs)?;
    checks.push(Check::of("ladder eigenvector residual on the grid", resid, 1e-8));

    // flat-tower overlap against the Gaussian closed form
    let zs = [
        Complex64::new(0.5, 0.0),
        Complex64::new(-1.0, 0.8),
        Complex64::new(0.0, 2.0),
        Complex64::new(1.5, -1.5),
    ];
    let mut worst_kernel = 0.0f64;
    for &z1 in &zs {
        for &z2 in &zs {
            let a = coherent_state(&CoherentSpec {
                epsilons: vec![],
                mode: LadderMode::Linearized { w: 0.0 },
                z: z1,
            })?;
            let b = coherent_state(&CoherentSpec {
                epsilons: vec![],
                mode: LadderMode::Linearized { w: 0.0 },
                z: z2,
            })?;
            worst_kernel = worst_kernel.max((kernel(&a, &b) - canonical_kernel(z1, z2)).norm());
        }
    }
    checks.push(Check::of("flat-tower kernel vs closed form", worst_kernel, 1e-10));

    // overlap matrix of nearby labels stays positive
    let states: Vec<_> = [
        Complex64::new(0.4, 0.0),
        Complex64::new(-0.4, 0.3),
        Complex64::new(0.9, -0.2),
        Complex64::new(0.0, 1.1),
    ]
    .iter()
    .map(|&z| {
        coherent_state(&CoherentSpec { epsilons: vec![-0.5], mode: LadderMode::Natural, z })
    })
    .collect::<Result<_>>()?;
    let min_eig = gram_min_eigenvalue(&states);
    checks.push(Check::of("overlap matrix lowest eigenvalue", (-min_eig).max(0.0), 1e-10));

    // flat-measure moments by quadrature
    let rg = Grid::new(0.0, 10.0, 8001)?;
    let mut worst_mom = 0.0f64;
    for n in 0..=10 {
        let vals: Vec<f64> = (0..rg.n())
            .map(|i| {
                let r = rg.x(i);
                r.powi(2 * n as i32 + 1) * canonical_measure_density(r)
            })
            .collect();
        let f = GridFunction::new(rg, vals)?;
        let got = *f.cumulative_simpson(0).values.last().unwrap();
        let want = measure_moment_rhs(&[], n)?;
        worst_mom = worst_mom.max((got - want).abs() / want);
    }
    checks.push(Check::of("flat-measure moments vs factorials, n <= 10", worst_mom, 1e-8));

    Ok(CaseOutcome { case: "cs".into(), checks, files })
}

fn uncertainty_case(ov: &RunOverrides) -> Result<CaseOutcome> {
    let configs: [(&str, CoherentSpec); 4] = [
        (
            "natural_k1",
            CoherentSpec { epsilons: vec![-0.5], mode: LadderMode::Natural, z: Complex64::new(0.0, 0.0) },
        ),
        (
            "natural_k2",
            CoherentSpec {
                epsilons: vec![-0.5, -1.5],
                mode: LadderMode::Natural,
                z: Complex64::new(0.0, 0.0),
            },
        ),
        (
            "linearized_w1",
            CoherentSpec {
                epsilons: vec![-0.5],
                mode: LadderMode::Linearized { w: 1.0 },
                z: Complex64::new(0.0, 0.0),
            },
        ),
        (
            "linearized_w2",
            CoherentSpec {
                epsilons: vec![-0.5, -1.5],
                mode: LadderMode::Linearized { w: 2.0 },
                z: Complex64::new(0.0, 0.0),
            },
        ),
    ];
    let vacuum = [1.5, 2.5, 1.5, 2.5];
    let tol = ov.tol.unwrap_or(1e-6);
    let mut checks = Vec::new();
    let mut csv =
        String::from("config,z_re,z_im,dx2_closed,dx2_fock,dp2_closed,dp2_fock\n");
    let mut worst_vacuum = 0.0f64;
    for ((name, base), want0) in configs.iter().zip(vacuum) {
        let mut worst = 0.0f64;
        for z in z_grid() {
            let spec = CoherentSpec { z, ..base.clone() };
            let closed = uncertainty_closed(&spec)?;
            let fock = uncertainty_fock(&coherent_state(&spec)?);
            worst = worst.max((closed.dx2 - fock.dx2).abs());
            worst = worst.max((closed.dp2 - fock.dp2).abs());
            csv.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                name, z.re, z.im, closed.dx2, fock.dx2, closed.dp2, fock.dp2
            ));
        }
        checks.push(Check::of(format!("{name} closed vs moment widths"), worst, tol));
        let at0 = uncertainty_closed(base)?;
        worst_vacuum = worst_vacuum.max((at0.dx2 - want0).abs().max((at0.dp2 - want0).abs()));
    }
    checks.push(Check::of("vacuum-label widths", worst_vacuum, 1e-12));
    Ok(CaseOutcome {
        case: "uncertainty".into(),
        checks,
        files: vec![("uncertainty.csv".into(), csv)],
    })
}

pub fn run_case(id: CaseId, ov: &RunOverrides) -> Result<CaseOutcome> {
    match id {
        CaseId::Fig1 | CaseId::Fig2 | CaseId::Fig3 | CaseId::Fig4 | CaseId::Fig5 => {
            figure_case(id, ov)
        }
        CaseId::Equiv => equiv_case(ov),
        CaseId::Am => am_case(ov),
        CaseId::Intertwining => intertwining_case(ov),
        CaseId::LadderK1 => ladder_case(1, ov),
        CaseId::LadderK2 => ladder_case(2, ov),
        CaseId::Cs => cs_case(ov),
        CaseId::Uncertainty => uncertainty_case(ov),
        CaseId::All => {
            let mut total = CaseOutcome { case: "all".into(), ..Default::default() };
            for sub in CaseId::NAMED {
                let mut o = run_case(sub, ov)?;
                for c in &mut o.checks {
                    c.label = format!("{}: {}", o.case, c.label);
                }
                total.checks.extend(o.checks);
                total.files.extend(o.files);
            }
            Ok(total)
        }
    }
}

pub fn write_outcome(outcome: &CaseOutcome, dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.txt"), outcome.report())?;
    for (name, content) in &outcome.files {
        std::fs::write(dir.join(name), content)?;
    }
    Ok(())
}

/// Seed construction for config-driven runs; real methods refuse
/// complex parameters instead of silently truncating them.
fn real_seed(spec: &crate::config::SeedSpec, grid: Grid) -> Result<SeedSolution<f64>> {
    if spec.eps.im != 0.0 {
        return Err(Error::ValidationError {
            field: "seed".into(),
            msg: format!("method needs a real energy, got {}", spec.eps),
        });
    }
    if let NuParam::Finite(nu) = spec.nu {
        if nu.im != 0.0 {
            return Err(Error::ValidationError {
                field: "seed".into(),
                msg: format!("method needs a real nu, got {nu}"),
            });
        }
    }
    general_solution_real(spec.eps.re, spec.nu, grid)
}

enum Design {
    Second(SecondOrderTransform),
    Chain(SusyChain),
}

fn build_design(cfg: &RunConfig, grid: Grid) -> Result<Design> {
    match cfg.method.expect("validated by parse_config") {
        Method::Real2 => {
            let a = real_seed(&cfg.seeds[0], grid)?;
            let b = real_seed(&cfg.seeds[1], grid)?;
            // the transform wants the higher factorization energy first
            let (u1, u2) = if a.epsilon.re >= b.epsilon.re { (a, b) } else { (b, a) };
            Ok(Design::Second(real_case(&u1, &u2)?))
        }
        Method::Confluent => {
            // an eigenstate seed must come in normalized, otherwise the
            // w0 windows are scaled by the arbitrary series prefactor
            let u = if is_eigenstate_seed(&cfg.seeds[0]) {
                eigenstate_seed((cfg.seeds[0].eps.re - 0.5).round() as usize, grid)?
            } else {
                real_seed(&cfg.seeds[0], grid)?
            };
            Ok(Design::Second(confluent_case(
                &u,
                cfg.w0.expect("validated by parse_config"),
                cfg.x0,
            )?))
        }
        Method::Complex2 => {
            let s = &cfg.seeds[0];
            let u = general_solution(s.eps, s.nu, grid)?;
            Ok(Design::Second(complex_case(&u)?))
        }
        Method::Iterative => {
            let seeds: Vec<SeedSolution<f64>> = cfg
                .seeds
                .iter()
                .map(|s| real_seed(s, grid))
                .collect::<Result<_>>()?;
            Ok(Design::Chain(build_chain(&seeds, grid)?))
        }
    }
}

pub fn run_design(cfg: &RunConfig) -> Result<CaseOutcome> {
    let grid = make_grid(cfg.grid)?;
    let design = build_design(cfg, grid)?;
    let mut checks = Vec::new();
    let mut files = vec![("manifest.txt".to_string(), cfg.manifest())];
    match &design {
        Design::Second(t) => {
            if t.im_v2_max > 0.0 {
                checks.push(Check::of("imaginary part of V2", t.im_v2_max, 1e-10));
            }
            files.push(("potential.csv".into(), potential_csv(t)));
        }
        Design::Chain(c) => files.push(("potential.csv".into(), chain_potential_csv(c))),
    }
    Ok(CaseOutcome { case: "design".into(), checks, files })
}

/// Levels the design promises: inserted factorization energies that
/// carry normalizable states plus the surviving oscillator levels,
/// drop any level a physical-eigenstate seed deleted.
fn predicted_levels(cfg: &RunConfig, design: &Design) -> Vec<f64> {
    let mut inserts = Vec::new();
    let mut deleted = Vec::new();
    match design {
        Design::Second(t) => {
            for ns in &t.new_states {
                if ns.normalizable {
                    inserts.push(ns.state.energy);
                }
            }
            for s in &cfg.seeds {
                if is_eigenstate_seed(s) {
                    deleted.push(s.eps.re);
                }
            }
        }
        Design::Chain(c) => {
            for i in 1..=c.k() {
                if let Ok(miss) = chain_missing_state(c, i) {
                    if boundary_fraction(&miss.psi.values) < 1e-4 {
                        inserts.push(c.steps[i - 1].epsilon);
                    }
                }
            }
        }
    }
    let mut levels = inserts;
    let mut n = 0;
    while levels.len() < 6 && n < 12 {
        let e = n as f64 + 0.5;
        if !deleted.iter().any(|&d| (d - e).abs() < 1e-9) {
            levels.push(e);
        }
        n += 1;
    }
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    levels.truncate(6);
    levels
}

fn is_eigenstate_seed(s: &crate::config::SeedSpec) -> bool {
    // ψ_n sits at n + ½; the even ones have nu = 0, the odd ones nu = inf
    let e = s.eps.re;
    if s.eps.im != 0.0 || e < 0.0 {
        return false;
    }
    let n = (e - 0.5).round();
    if (e - 0.5 - n).abs() > 1e-9 || n < 0.0 {
        return false;
    }
    match s.nu {
        NuParam::Infinite => n as usize % 2 == 1,
        NuParam::Finite(v) => v == Complex64::new(0.0, 0.0) && n as usize % 2 == 0,
    }
}

pub fn run_verify(cfg: &RunConfig) -> Result<CaseOutcome> {
    let grid = make_grid(cfg.grid)?;
    let design = build_design(cfg, grid)?;
    let v = match &design {
        Design::Second(t) => t.v2.clone(),
        Design::Chain(c) => c.vk().clone(),
    };
    let expected = predicted_levels(cfg, &design);
    let tol = cfg.tol.unwrap_or(SPECTRUM_TOL);
    let (check, csv) = spectrum_check("spectrum deviation", &v, &expected, tol)?;
    let mut out = run_design(cfg)?;
    out.case = "verify".into();
    out.checks.push(check);
    out.files.push(("spectrum.csv".into(), csv));
    Ok(out)
}

pub fn run_algebra(cfg: &RunConfig) -> Result<CaseOutcome> {
    let grid = make_grid(cfg.grid)?;
    let chain = if cfg.seeds.is_empty() {
        oscillator_limit_chain(1, grid)?
    } else {
        let seeds: Vec<SeedSolution<f64>> = cfg
            .seeds
            .iter()
            .map(|s| real_seed(s, grid))
            .collect::<Result<_>>()?;
        build_chain(&seeds, grid)?
    };
    let w = cfg.w.unwrap_or(chain.k() as f64);
    let (checks, mut files) = ladder_suite(&chain, w, cfg.tol.unwrap_or(1e-4))?;
    files.push(("manifest.txt".into(), cfg.manifest()));
    Ok(CaseOutcome { case: "algebra".into(), checks, files })
}

pub fn run_coherent(cfg: &RunConfig) -> Result<CaseOutcome> {
    let epsilons: Vec<f64> = if cfg.seeds.is_empty() {
        vec![-0.5]
    } else {
        cfg.seeds.iter().map(|s| s.eps.re).collect()
    };
    let mode = match cfg.mode.as_deref() {
        Some("linearized") => LadderMode::Linearized { w: cfg.w.unwrap_or(epsilons.len() as f64) },
        _ => LadderMode::Natural,
    };
    let mut worst_norm = 0.0f64;
    let mut csv = String::from("z_re,z_im,norm\n");
    for z in z_grid() {
        let cs = coherent_state(&CoherentSpec { epsilons: epsilons.clone(), mode, z })?;
        worst_norm = worst_norm.max((cs.norm_sq() - 1.0).abs());
        csv.push_str(&format!("{},{},{}\n", z.re, z.im, cs.norm_sq()));
    }
    let mut checks = vec![Check::of("unit norm on the z grid", worst_norm, cfg.tol.unwrap_or(1e-10))];
    let spec0 = CoherentSpec { epsilons: epsilons.clone(), mode, z: Complex64::new(0.0, 0.0) };
    if let Ok(u0) = uncertainty_closed(&spec0) {
        let mut worst = 0.0f64;
        for z in z_grid() {
            let spec = CoherentSpec { z, ..spec0.clone() };
            let closed = uncertainty_closed(&spec)?;
            let fock = uncertainty_fock(&coherent_state(&spec)?);
            worst = worst.max((closed.dx2 - fock.dx2).abs().max((closed.dp2 - fock.dp2).abs()));
        }
        checks.push(Check::of("closed vs moment widths", worst, 1e-6));
        checks.push(Check::of(
            "vacuum width is finite",
            if u0.dx2.is_finite() { 0.0 } else { 1.0 },
            0.0,
        ));
    }
    Ok(CaseOutcome {
        case: "coherent".into(),
        checks,
        files: vec![("cs_norms.csv".into(), csv), ("manifest.txt".into(), cfg.manifest())],
    })
}

pub fn run_command(cfg: &RunConfig) -> Result<CaseOutcome> {
    match cfg.command {
        Command::Design => run_design(cfg),
        Command::Verify => run_verify(cfg),
        Command::Algebra => run_algebra(cfg),
        Command::Coherent => run_coherent(cfg),
        Command::Repro => {
            let case = cfg.case.as_deref().ok_or_else(|| Error::ValidationError {
                field: "case".into(),
                msg: "repro needs a case name".into(),
            })?;
            let ov = RunOverrides { tol: cfg.tol, grid: None };
            run_case(CaseId::parse(case)?, &ov)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn unknown_case_names_are_rejected() {
        match CaseId::parse("bogus") {
            Err(Error::UnknownCase(name)) => assert_eq!(name, "bogus"),
            other => panic!("expected unknown case, got {other:?}"),
        }
    }

    #[test]
    fn single_level_reproduction_passes() {
        let o = run_case(CaseId::Fig1, &RunOverrides::default()).unwrap();
        assert!(o.passed(), "{}", o.report());
        assert!(o.files.iter().any(|f| f.0 == "fig1_potential.csv"));
        assert!(o.report().contains("PASS"));
    }

    #[test]
    fn repro_outputs_are_byte_stable() {
        let a = run_case(CaseId::Uncertainty, &RunOverrides::default()).unwrap();
        let b = run_case(CaseId::Uncertainty, &RunOverrides::default()).unwrap();
        assert_eq!(a.files, b.files);
        assert_eq!(a.report(), b.report());
    }

    #[test]
    fn tolerance_override_can_fail_a_case() {
        let strict = RunOverrides { tol: Some(1e-18), grid: None };
        let o = run_case(CaseId::Equiv, &strict).unwrap();
        assert!(!o.passed());
    }

    #[test]
    fn design_pipeline_emits_manifest_and_potential() {
        let cfg = parse_config(
            "command=design\nmethod=confluent\nseed=4,1\nw0=5.00\nx0=0\ngrid=-6.5,6.5,1301",
        )
        .unwrap();
        let o = run_design(&cfg).unwrap();
        assert!(o.passed());
        let manifest = &o.files.iter().find(|f| f.0 == "manifest.txt").unwrap().1;
        assert!(manifest.contains("w0 = 5.00"));
        assert!(o.files.iter().any(|f| f.0 == "potential.csv"));
    }

    #[test]
    fn verify_pipeline_predicts_the_two_level_design() {
        let cfg = parse_config(
            "command=verify\nmethod=real2\nseed=-1.2,1.1\nseed=-1,0.9\ngrid=-8,8,3201",
        )
        .unwrap();
        let o = run_verify(&cfg).unwrap();
        assert!(o.passed(), "{}", o.report());
        let csv = &o.files.iter().find(|f| f.0 == "spectrum.csv").unwrap().1;
        assert!(csv.starts_with("index,expected,computed"));
        assert!(csv.contains("-1.2"));
    }

    #[test]
    fn eigenstate_seeds_are_recognized() {
        let cfg = parse_config("command=design\nmethod=iterative\nseed=2.5,0\nseed=1.5,inf")
            .unwrap();
        assert!(is_eigenstate_seed(&cfg.seeds[0]));
        assert!(is_eigenstate_seed(&cfg.seeds[1]));
        let cfg2 = parse_config("command=design\nmethod=iterative\nseed=2.5,0.3").unwrap();
        assert!(!is_eigenstate_seed(&cfg2.seeds[0]));
    }
}
