//! Bound states of the contact-coupled particle–oscillator pair.
//!
//! The negative spectrum of the model Hamiltonian is characterized by
//! secular equations in charge space: on the line, a binding depth `E > 0`
//! is an eigenvalue precisely when `1 + α·μ_b(E) = 0` for some eigenvalue
//! branch `μ_b` of the charge-space operator assembled by
//! [`crate::operators::discretize_k_1d`]; in two and three dimensions the
//! condition is `γ_b(E) + α = 0` for a branch of the regularized sector
//! operators from [`crate::operators::assemble_gamma_sector`].  Every branch
//! is monotone in `E` (μ decreasing, γ non-decreasing), so each carries at
//! most one root, isolated here by guarded false-position iterations that
//! never leave a sign-definite bracket.
//!
//! The module solves those equations, assembles the corresponding
//! eigenfunctions and charges, applies the resolvent to product-grid data,
//! reduces ground states to one-body density matrices, and provides the
//! frozen-oscillator point-interaction problem on the line as the stiff
//! comparison limit.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::kernels::{self, ModelSpec, MAX_SERIES_LEVEL};
use crate::operators::{
    adaptive_radial_sector, assemble_gamma_sector, assemble_norm_moment_sector, discretize_k_1d,
    grid_1d, norm_moment_1d, sym_eigen, Eigen, Grid1D, RadialSector, MAX_SECTOR, PANEL_NODES,
};
use crate::quadrature;
use crate::{check_dimension, require_finite, require_positive, Error, Result};

// ---------------------------------------------------------------------------
// Budgets and tolerances
// ---------------------------------------------------------------------------

/// Default highest angular sector scanned when counting bound states.
pub const DEFAULT_MAX_SECTOR: u32 = 12;

/// Relative width `|ΔE|/E` at which a secular root is considered converged.
pub const SECULAR_REL_TOL: f64 = 1e-8;

/// Iteration cap of the bracketed secular root solve.
pub const SECULAR_MAX_ITER: usize = 200;

/// Lower end of the line-model search windows, as a fraction of `ω`:
/// branches whose secular value is still non-negative at `E = 1e-6·ω` are
/// declared rootless.
pub const E_FLOOR_FACTOR: f64 = 1e-6;

/// Lower end of the radial (2D/3D) search windows, as a fraction of `ω`.
/// The planar ground branch diverges only logarithmically as the shift
/// vanishes, so weak-binding levels sit exponentially close to the
/// threshold and the solver floor must reach many decades further down
/// than on the line; the sector grids remain well-conditioned there.
pub const E_FLOOR_FACTOR_RADIAL: f64 = 1e-14;

/// Shift at which the radial branch values are read off for counting, as a
/// fraction of `ω`.  A count is the number of branch values below `−α` at
/// this floor; levels shallower than the floor are not seen.  The value is
/// deep enough for every level the existence checks probe while keeping
/// the count grids (one eigensolve per sector) moderate.
pub const COUNT_FLOOR_FACTOR_RADIAL: f64 = 1e-8;

/// Hard cap on eigenvalue branches examined per sector.
const MAX_BRANCHES: usize = 64;

/// Angular quadrature order attached to solver-built radial sectors.
const SECTOR_ANGULAR_ORDER: usize = 64;

/// Relative tolerance of the coarse first solving phase (per-energy
/// adaptive grids); the second phase re-solves on a frozen grid to
/// [`SECULAR_REL_TOL`].
const COARSE_REL_TOL: f64 = 1e-3;

/// Node cap of the line charge grids.
const MAX_LINE_NODES: usize = 1408;

/// Boundary-condition residual above which a bound state is rejected as
/// unconverged.
const RESIDUAL_CAP: f64 = 1e-4;

// ---------------------------------------------------------------------------
// Secular branches
// ---------------------------------------------------------------------------

/// One sampled eigenvalue branch of a charge-space operator family,
/// together with the bracket its secular equation admits on the samples.
///
/// On the line the curve is `E ↦ μ_branch(E)` (decreasing); in two and
/// three dimensions it is `E ↦ γ_branch(E)` (non-decreasing).  Monotonicity
/// is enforced at construction within a `1e-9` relative slack.
#[derive(Debug, Clone)]
pub struct SecularBranch {
    /// Branch index: the curve follows the `k`-th eigenvalue in the fixed
    /// ordering (descending for μ, ascending for γ) at every energy.
    pub branch: usize,
    /// Angular sector (always 0 on the line).
    pub sector: u32,
    /// Samples `(E, value)` in increasing `E`.
    pub samples: Vec<(f64, f64)>,
    /// Consecutive sample pair across which the secular function changes
    /// sign, when one exists.
    pub bracket: Option<(f64, f64)>,
}

impl SecularBranch {
    fn assemble(
        branch: usize,
        sector: u32,
        samples: Vec<(f64, f64)>,
        secular: impl Fn(f64) -> f64,
        decreasing: bool,
    ) -> Result<Self> {
        for pair in samples.windows(2) {
            let (e0, v0) = pair[0];
            let (e1, v1) = pair[1];
            let slack = 1e-9 * (1.0 + v0.abs().max(v1.abs()));
            let fine = if decreasing {
                v1 <= v0 + slack
            } else {
                v1 >= v0 - slack
            };
            if !fine {
                return Err(Error::NoConvergence(format!(
                    "branch {branch} of sector {sector} is not monotone on the samples: \
                     value moves from {v0:.12e} at E = {e0:.6e} to {v1:.12e} at E = {e1:.6e}"
                )));
            }
        }
        let bracket = samples.windows(2).find_map(|pair| {
            let (e0, v0) = pair[0];
            let (e1, v1) = pair[1];
            (secular(v0).signum() != secular(v1).signum()).then_some((e0, e1))
        });
        Ok(SecularBranch {
            branch,
            sector,
            samples,
            bracket,
        })
    }
}

fn check_energy_samples(energies: &[f64]) -> Result<()> {
    if energies.is_empty() {
        return Err(Error::invalid("at least one sample energy is required"));
    }
    for &e in energies {
        require_positive("sample energy", e)?;
    }
    if energies.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("sample energies must be strictly increasing"));
    }
    Ok(())
}

/// Samples the line branch `E ↦ μ_branch(E)` on one fixed charge grid and
/// locates the bracket of `1 + α·μ_branch(E) = 0` on the samples.
///
/// # Errors
/// Propagates assembly failures; rejects empty or non-increasing sample
/// sets and non-monotone sampled curves.
pub fn trace_mu_branch(
    omega: f64,
    alpha: f64,
    branch: usize,
    energies: &[f64],
) -> Result<SecularBranch> {
    require_positive("omega", omega)?;
    require_finite("alpha", alpha)?;
    check_energy_samples(energies)?;
    let hint = energies[energies.len() - 1];
    let eval = LineBranch::new(omega, branch, hint)?;
    let mut samples = Vec::with_capacity(energies.len());
    for &e in energies {
        samples.push((e, eval.mu(e)?));
    }
    SecularBranch::assemble(branch, 0, samples, |mu| 1.0 + alpha * mu, true)
}

/// Samples the sector branch `E ↦ γ_branch(E)` on one fixed radial grid
/// (adapted to the geometric mean of the sampled range) and locates the
/// bracket of `γ_branch(E) + α = 0` on the samples.
///
/// # Errors
/// Propagates assembly failures; rejects dimensions other than 2 and 3,
/// empty or non-increasing sample sets, and non-monotone sampled curves.
pub fn trace_gamma_branch(
    d: u32,
    omega: f64,
    alpha: f64,
    sector: u32,
    branch: usize,
    energies: &[f64],
) -> Result<SecularBranch> {
    check_radial_dimension(d)?;
    require_positive("omega", omega)?;
    require_finite("alpha", alpha)?;
    check_energy_samples(energies)?;
    let e_ref = (energies[0] * energies[energies.len() - 1]).sqrt();
    let grid = sector_grid(d, sector, omega, e_ref)?;
    let mut samples = Vec::with_capacity(energies.len());
    for &e in energies {
        let eig = gamma_eigen(omega, e, &grid)?;
        samples.push((e, branch_value(&eig, branch)?));
    }
    SecularBranch::assemble(branch, sector, samples, |g| g + alpha, false)
}

/// Top `n_modes` eigenvalues (descending) of the line charge-space operator
/// at shift `λ`, discretized on `grid`.
///
/// # Errors
/// Rejects `n_modes = 0` or `n_modes` exceeding the grid size, and
/// propagates assembly failures.
pub fn mu_spectrum(omega: f64, lambda: f64, n_modes: usize, grid: &Grid1D) -> Result<Vec<f64>> {
    require_positive("omega", omega)?;
    require_positive("lambda", lambda)?;
    if n_modes == 0 {
        return Err(Error::invalid("n_modes must be at least 1"));
    }
    if n_modes > grid.len() {
        return Err(Error::invalid(format!(
            "n_modes = {n_modes} exceeds the grid size {}",
            grid.len()
        )));
    }
    let spec = ModelSpec::new(1, omega, 0.0, lambda)?;
    let op = discretize_k_1d(&spec, grid)?;
    let eig = sym_eigen(op.matrix(), op.n())?;
    Ok(eig.values.iter().rev().take(n_modes).copied().collect())
}

/// One merged level of the sector operators: an eigenvalue `γ` with its
/// sector, branch index within the sector, and angular multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaLevel {
    /// Eigenvalue of the sector operator.
    pub value: f64,
    /// Angular sector (planar wave number or orbital index).
    pub sector: u32,
    /// Index of the eigenvalue within its sector, ascending.
    pub branch: usize,
    /// Angular multiplicity of the sector.
    pub multiplicity: usize,
}

/// Lowest `per_sector` eigenvalues of every sector operator up to
/// `max_sector` at shift `λ`, merged ascending.
///
/// Each sector is discretized on its own radial grid adapted to `λ` as the
/// reference scale.  Multiplicities record the angular degeneracy; levels
/// are listed once each.
///
/// # Errors
/// Rejects dimensions other than 2 and 3, `per_sector = 0`, and sector
/// budgets beyond [`MAX_SECTOR`]; propagates assembly failures.
pub fn gamma_spectrum(
    d: u32,
    omega: f64,
    lambda: f64,
    max_sector: u32,
    per_sector: usize,
) -> Result<Vec<GammaLevel>> {
    check_radial_dimension(d)?;
    require_positive("omega", omega)?;
    require_positive("lambda", lambda)?;
    if per_sector == 0 {
        return Err(Error::invalid("per_sector must be at least 1"));
    }
    if max_sector > MAX_SECTOR {
        return Err(Error::invalid(format!(
            "sector budget {max_sector} exceeds the supported maximum {MAX_SECTOR}"
        )));
    }
    let sectors: Vec<u32> = (0..=max_sector).collect();
    let per: Vec<Vec<GammaLevel>> = sectors
        .par_iter()
        .map(|&m| -> Result<Vec<GammaLevel>> {
            let grid = sector_grid(d, m, omega, lambda)?;
            let eig = gamma_eigen(omega, lambda, &grid)?;
            let take = per_sector.min(eig.values.len());
            Ok((0..take)
                .map(|j| GammaLevel {
                    value: eig.values[j],
                    sector: m,
                    branch: j,
                    multiplicity: grid.degeneracy() as usize,
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut merged: Vec<GammaLevel> = per.into_iter().flatten().collect();
    merged.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(merged)
}

// ---------------------------------------------------------------------------
// Branch evaluation plumbing
// ---------------------------------------------------------------------------

fn check_radial_dimension(d: u32) -> Result<u32> {
    check_dimension(d)?;
    if d == 1 {
        return Err(Error::invalid(
            "sector operators exist in dimensions 2 and 3; use the line operations for d = 1",
        ));
    }
    Ok(d)
}

fn sector_grid(d: u32, sector: u32, omega: f64, e_ref: f64) -> Result<RadialSector> {
    adaptive_radial_sector(d, sector, omega, e_ref, SECTOR_ANGULAR_ORDER)
}

fn gamma_eigen(omega: f64, lambda: f64, grid: &RadialSector) -> Result<Eigen> {
    let spec = ModelSpec::new(grid.dimension(), omega, 0.0, lambda)?;
    let op = assemble_gamma_sector(&spec, grid)?;
    sym_eigen(op.matrix(), op.n())
}

fn branch_value(eig: &Eigen, branch: usize) -> Result<f64> {
    eig.values.get(branch).copied().ok_or_else(|| {
        Error::invalid(format!(
            "branch {branch} exceeds the {} eigenvalues the discretization resolves",
            eig.values.len()
        ))
    })
}

/// Line charge grid adapted to a binding-depth scale `e_hint` and a branch
/// index: the half-width covers both the base oscillator extent and the
/// classical turning point of the excited content, and the node density
/// resolves both the oscillator scale and the decay rate `κ = √(2·e_hint)`.
///
/// The construction commutes exactly with the model's scaling map
/// `(ω, E) ↦ (1, E/ω)` (lengths contract by `√ω`, node counts match), so
/// solving at scaled couplings reproduces scaled energies to solver
/// precision.
fn line_grid_for(omega: f64, e_hint: f64, branch: usize) -> Result<Grid1D> {
    let sq = omega.sqrt();
    let kappa = (2.0 * e_hint).sqrt().max(1e-6 * sq);
    let content = (kappa / omega).max(((2 * branch + 3) as f64 / omega).sqrt());
    let half = (10.0 / sq).max(1.6 * content + 8.0 / sq);
    let per_unit = (15.2 * sq).max(6.0 * kappa);
    let nodes = ((2.0 * half * per_unit).ceil() as usize).clamp(160, MAX_LINE_NODES);
    grid_1d(half, nodes)
}

/// One line eigenvalue branch pinned to a fixed charge grid.
struct LineBranch {
    omega: f64,
    branch: usize,
    grid: Grid1D,
}

impl LineBranch {
    fn new(omega: f64, branch: usize, e_hint: f64) -> Result<Self> {
        if branch >= MAX_BRANCHES {
            return Err(Error::invalid(format!(
                "branch {branch} exceeds the per-sector budget {MAX_BRANCHES}"
            )));
        }
        Ok(LineBranch {
            omega,
            branch,
            grid: line_grid_for(omega, e_hint, branch)?,
        })
    }

    fn eigen(&self, energy: f64) -> Result<Eigen> {
        let spec = ModelSpec::new(1, self.omega, 0.0, energy)?;
        let op = discretize_k_1d(&spec, &self.grid)?;
        sym_eigen(op.matrix(), op.n())
    }

    /// `μ_branch(E)`: the `(branch+1)`-th largest eigenvalue.
    fn mu(&self, energy: f64) -> Result<f64> {
        let eig = self.eigen(energy)?;
        let n = eig.values.len();
        if self.branch >= n {
            return Err(Error::invalid(format!(
                "branch {} exceeds the {n} eigenvalues the grid resolves",
                self.branch
            )));
        }
        Ok(eig.values[n - 1 - self.branch])
    }

    fn secular(&self, alpha: f64, energy: f64) -> Result<f64> {
        Ok(1.0 + alpha * self.mu(energy)?)
    }

    fn describe(&self) -> String {
        format!(
            "line grid: half-width {:.4}, {} nodes",
            self.grid.half_width(),
            self.grid.len()
        )
    }
}

// ---------------------------------------------------------------------------
// Root isolation
// ---------------------------------------------------------------------------

/// Outcome of one bracketed root solve.
#[derive(Debug, Clone, Copy)]
struct RootDiag {
    energy: f64,
    iterations: usize,
    evaluations: usize,
    bracket: (f64, f64),
}

/// Guarded false-position iteration in `ln E` on a sign-definite bracket.
///
/// The secant step is taken in logarithmic coordinates (roots of the
/// secular functions spread over many decades); whenever it falls outside
/// the central 98% of the bracket the step falls back to the midpoint, and
/// a retained endpoint has its stored value halved (Illinois rule), so the
/// bracket provably contracts.  Terminates when `hi/lo - 1 ≤ rel_tol`.
fn bracketed_root_log(
    f: &mut dyn FnMut(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    flo: f64,
    fhi: f64,
    rel_tol: f64,
    max_iter: usize,
) -> Result<RootDiag> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::invalid(format!(
            "invalid bracket [{lo:.6e}, {hi:.6e}]"
        )));
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::invalid(format!(
            "bracket [{lo:.6e}, {hi:.6e}] carries no sign change: f = {flo:.6e} and {fhi:.6e}"
        )));
    }
    let (mut slo, mut shi) = (lo.ln(), hi.ln());
    let (mut flo, mut fhi) = (flo, fhi);
    let mut side = 0i8;
    let mut evals = 0usize;
    for it in 1..=max_iter {
        let width = shi - slo;
        let mut s = (slo * fhi - shi * flo) / (fhi - flo);
        let margin = 0.01 * width;
        if !(s > slo + margin && s < shi - margin) {
            s = 0.5 * (slo + shi);
        }
        if width <= rel_tol {
            return Ok(RootDiag {
                energy: s.exp(),
                iterations: it,
                evaluations: evals,
                bracket: (slo.exp(), shi.exp()),
            });
        }
        let e = s.exp();
        let fv = f(e)?;
        evals += 1;
        if fv == 0.0 {
            return Ok(RootDiag {
                energy: e,
                iterations: it,
                evaluations: evals,
                bracket: (slo.exp(), shi.exp()),
            });
        }
        if (fv > 0.0) == (fhi > 0.0) {
            shi = s;
            fhi = fv;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        } else {
            slo = s;
            flo = fv;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        }
    }
    Err(Error::NoConvergence(format!(
        "secular root not localized to relative width {rel_tol:.1e} within {max_iter} \
         iterations; final bracket [{:.9e}, {:.9e}]",
        slo.exp(),
        shi.exp()
    )))
}

fn curve_note(trail: &[(f64, f64)]) -> String {
    let mut s = String::from("sampled curve:");
    for (e, v) in trail {
        let _ = write!(s, " ({e:.4e}, {v:+.4e})");
    }
    s
}

/// Grows `hi` by decades until the secular value turns non-negative.
fn march_up(
    f: &mut dyn FnMut(f64) -> Result<f64>,
    mut hi: f64,
    mut fhi: f64,
    cap: f64,
    trail: &mut Vec<(f64, f64)>,
    evals: &mut usize,
) -> Result<(f64, f64)> {
    while fhi < 0.0 {
        if hi >= cap {
            return Err(Error::BudgetExceeded(format!(
                "secular function still negative at the search cap E = {cap:.3e}; {}",
                curve_note(trail)
            )));
        }
        hi = (hi * 10.0).min(cap);
        fhi = f(hi)?;
        *evals += 1;
        trail.push((hi, fhi));
    }
    Ok((hi, fhi))
}

// ---------------------------------------------------------------------------
// Secular roots
// ---------------------------------------------------------------------------

/// Grid a converged charge lives on.
#[derive(Debug, Clone)]
enum ChargeGrid {
    Line(Grid1D),
    Radial(RadialSector),
}

/// Solver bookkeeping attached to every converged root.
#[derive(Debug, Clone)]
pub struct SolveDiagnostics {
    /// False-position iterations of the final solving phase.
    pub iterations: usize,
    /// Total secular-function evaluations across all phases.
    pub evaluations: usize,
    /// Final sign-definite bracket.
    pub bracket: (f64, f64),
    /// `|secular value|` at the reported root on the final grid.
    pub secular_defect: f64,
    /// Human-readable description of the final grid.
    pub grid: String,
}

/// One converged root of a secular branch: the binding depth, the charge
/// eigenvector, and the discretization it was produced on.
///
/// The stored charge is the unit eigenvector in the weight-symmetrized
/// solver basis; [`SecularRoot::charge`] converts to physical values.
/// [`build_eigenfunction`] turns the root into a normalized [`BoundState`].
#[derive(Debug, Clone)]
pub struct SecularRoot {
    /// Binding depth `E > 0`; the Hamiltonian eigenvalue is `−E`.
    pub energy: f64,
    /// Ambient dimension.
    pub dimension: u32,
    /// Coupling the equation was solved at.
    pub alpha: f64,
    /// Oscillator frequency.
    pub omega: f64,
    /// Angular sector (0 on the line).
    pub sector: u32,
    /// Branch index within the sector.
    pub branch: usize,
    /// Angular multiplicity of the level.
    pub multiplicity: usize,
    /// Solver bookkeeping.
    pub diagnostics: SolveDiagnostics,
    charge_grid: ChargeGrid,
    weighted_charge: Vec<f64>,
}

impl SecularRoot {
    /// Nodes the charge is sampled on (line positions or radii).
    pub fn charge_nodes(&self) -> &[f64] {
        match &self.charge_grid {
            ChargeGrid::Line(g) => g.nodes(),
            ChargeGrid::Radial(s) => s.nodes(),
        }
    }

    /// Physical charge values at [`Self::charge_nodes`], scaled to a unit
    /// weighted 2-norm and signed so the largest-magnitude component is
    /// positive.
    pub fn charge(&self) -> Vec<f64> {
        physical_charge(&self.charge_grid, &self.weighted_charge)
    }
}

fn charge_scaling(grid: &ChargeGrid) -> &[f64] {
    match grid {
        ChargeGrid::Line(g) => g.weights(),
        ChargeGrid::Radial(s) => s.measures(),
    }
}

fn physical_charge(grid: &ChargeGrid, weighted: &[f64]) -> Vec<f64> {
    charge_scaling(grid)
        .iter()
        .zip(weighted)
        .map(|(w, v)| v / w.sqrt())
        .collect()
}

/// Flips `weighted` in place so the largest-magnitude *physical* component
/// comes out positive.
fn fix_charge_sign(grid: &ChargeGrid, weighted: &mut [f64]) {
    let q = physical_charge(grid, weighted);
    let mut imax = 0usize;
    for (i, v) in q.iter().enumerate() {
        if v.abs() > q[imax].abs() {
            imax = i;
        }
    }
    if q[imax] < 0.0 {
        for v in weighted.iter_mut() {
            *v = -*v;
        }
    }
}

/// Root of the line secular equation `1 + α·μ_branch(E) = 0`.
///
/// Returns `Ok(None)` when the branch is rootless: for `α ≥ 0` (the
/// operator is positive, so the equation has no solution), and for
/// attractive couplings too weak to bind on this branch
/// (`|α|·μ_branch(E_floor) ≤ 1` at the search floor `E_floor = 1e-6·ω`).
///
/// The root is isolated by the guarded false-position iteration on the
/// monotone branch to `|ΔE|/E ≤ 1e-8`; when the grid adapted to the located
/// root differs from the starting grid, the solve is repeated there.
///
/// # Errors
/// Propagates assembly failures; reports bracket failures together with the
/// sampled curve; rejects non-finite couplings and branch indices beyond
/// the budget.
pub fn solve_secular_1d(alpha: f64, omega: f64, branch: usize) -> Result<Option<SecularRoot>> {
    require_finite("alpha", alpha)?;
    require_positive("omega", omega)?;
    if alpha >= 0.0 {
        return Ok(None);
    }
    solve_line_branch(alpha, omega, branch, None)
}

fn solve_line_branch(
    alpha: f64,
    omega: f64,
    branch: usize,
    window_hi: Option<f64>,
) -> Result<Option<SecularRoot>> {
    let e_floor = E_FLOOR_FACTOR * omega;
    let hint0 = window_hi.unwrap_or_else(|| (0.5 * alpha * alpha).max(0.5 * omega));
    let mut lb = LineBranch::new(omega, branch, hint0)?;
    let mut evals = 0usize;

    let f_floor = lb.secular(alpha, e_floor)?;
    evals += 1;
    if f_floor >= 0.0 {
        return Ok(None);
    }

    let mut hi = window_hi.unwrap_or_else(|| hint0.max(1e4 * e_floor));
    let mut fhi = lb.secular(alpha, hi)?;
    evals += 1;
    let mut trail = vec![(e_floor, f_floor), (hi, fhi)];
    let cap = 1e12 * omega.max(alpha * alpha);
    (hi, fhi) = march_up(
        &mut |e| lb.secular(alpha, e),
        hi,
        fhi,
        cap,
        &mut trail,
        &mut evals,
    )?;

    let mut diag = bracketed_root_log(
        &mut |e| lb.secular(alpha, e),
        e_floor,
        hi,
        f_floor,
        fhi,
        SECULAR_REL_TOL,
        SECULAR_MAX_ITER,
    )?;
    diag.evaluations += evals;

    // Re-solve on the grid adapted to the located root when it differs.
    let regrid = line_grid_for(omega, diag.energy, branch)?;
    if regrid.len() != lb.grid.len()
        || (regrid.half_width() - lb.grid.half_width()).abs() > 1e-12 * lb.grid.half_width()
    {
        lb.grid = regrid;
        let pre = diag.evaluations;
        diag = rebracket_and_solve(&mut |e| lb.secular(alpha, e), diag.energy, e_floor)?;
        diag.evaluations += pre;
    }

    // Final decomposition at the root for the charge.
    let eig = lb.eigen(diag.energy)?;
    let n = eig.values.len();
    let idx = n - 1 - branch;
    let mu = eig.values[idx];
    let mut v = eig.vector(idx).to_vec();
    let grid = ChargeGrid::Line(lb.grid.clone());
    fix_charge_sign(&grid, &mut v);
    Ok(Some(SecularRoot {
        energy: diag.energy,
        dimension: 1,
        alpha,
        omega,
        sector: 0,
        branch,
        multiplicity: 1,
        diagnostics: SolveDiagnostics {
            iterations: diag.iterations,
            evaluations: diag.evaluations + 1,
            bracket: diag.bracket,
            secular_defect: (1.0 + alpha * mu).abs(),
            grid: lb.describe(),
        },
        charge_grid: grid,
        weighted_charge: v,
    }))
}

/// Brackets around a previously located root and re-solves to full
/// tolerance (used after swapping to a refined or frozen grid, where the
/// curve moves slightly).
fn rebracket_and_solve(
    f: &mut dyn FnMut(f64) -> Result<f64>,
    center: f64,
    e_floor: f64,
) -> Result<RootDiag> {
    let mut lo = (center / 1.35).max(e_floor);
    let mut hi = center * 1.35;
    let mut flo = f(lo)?;
    let mut fhi = f(hi)?;
    let mut evals = 2usize;
    for _ in 0..4 {
        if flo.signum() != fhi.signum() {
            break;
        }
        if flo > 0.0 {
            lo = (lo / 4.0).max(e_floor * 0.5);
            flo = f(lo)?;
        } else {
            hi *= 4.0;
            fhi = f(hi)?;
        }
        evals += 1;
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoConvergence(format!(
            "sign change near E = {center:.6e} lost after regridding: \
             f({lo:.6e}) = {flo:.3e}, f({hi:.6e}) = {fhi:.3e}"
        )));
    }
    let mut diag = bracketed_root_log(f, lo, hi, flo, fhi, SECULAR_REL_TOL, SECULAR_MAX_ITER)?;
    diag.evaluations += evals;
    Ok(diag)
}

/// Root of the sector secular equation `γ_branch(E) + α = 0` in dimension
/// 2 or 3.
///
/// Returns `Ok(None)` when the branch is rootless above the search floor,
/// i.e. when `γ_branch(E_floor) + α ≥ 0` at
/// `E_floor = `[`E_FLOOR_FACTOR_RADIAL`]`·ω` (the branch is non-decreasing,
/// so no sign change can occur above the floor).
///
/// Roots are isolated in two phases: a coarse pass on per-energy adaptive
/// radial grids down to relative width `1e-3`, then a full-tolerance pass
/// on a single grid frozen at the coarse root, to `|ΔE|/E ≤ 1e-8`.
///
/// # Errors
/// Reports window exhaustion with the sampled curve; propagates assembly
/// failures; rejects invalid dimensions, sectors, and branch budgets.
pub fn solve_secular_hd(
    d: u32,
    alpha: f64,
    omega: f64,
    sector: u32,
    branch: usize,
) -> Result<Option<SecularRoot>> {
    check_radial_dimension(d)?;
    require_finite("alpha", alpha)?;
    require_positive("omega", omega)?;
    if branch >= MAX_BRANCHES {
        return Err(Error::invalid(format!(
            "branch {branch} exceeds the per-sector budget {MAX_BRANCHES}"
        )));
    }
    solve_radial_branch(d, alpha, omega, sector, branch, None, None)
}

fn solve_radial_branch(
    d: u32,
    alpha: f64,
    omega: f64,
    sector: u32,
    branch: usize,
    floor_gamma: Option<f64>,
    window_hi: Option<f64>,
) -> Result<Option<SecularRoot>> {
    let e_floor = E_FLOOR_FACTOR_RADIAL * omega;
    let mut evals = 0usize;
    let g_floor = match floor_gamma {
        Some(g) => g,
        None => {
            let grid = sector_grid(d, sector, omega, e_floor)?;
            let eig = gamma_eigen(omega, e_floor, &grid)?;
            evals += 1;
            branch_value(&eig, branch)?
        }
    };
    if g_floor + alpha >= 0.0 {
        return Ok(None);
    }

    // Phase 1: coarse localization on per-energy adaptive grids.
    let mut f_adaptive = |e: f64| -> Result<f64> {
        let grid = sector_grid(d, sector, omega, e)?;
        let eig = gamma_eigen(omega, e, &grid)?;
        Ok(branch_value(&eig, branch)? + alpha)
    };
    let mut hi = window_hi.unwrap_or_else(|| omega.max(1e4 * e_floor));
    let mut fhi = f_adaptive(hi)?;
    evals += 1;
    let mut trail = vec![(e_floor, g_floor + alpha), (hi, fhi)];
    (hi, fhi) = march_up(&mut f_adaptive, hi, fhi, 1e30, &mut trail, &mut evals)?;
    let coarse = bracketed_root_log(
        &mut f_adaptive,
        e_floor,
        hi,
        g_floor + alpha,
        fhi,
        COARSE_REL_TOL,
        60,
    )?;
    evals += coarse.evaluations;

    // Phase 2: full tolerance on the grid frozen at the coarse root.
    let grid = sector_grid(d, sector, omega, coarse.energy)?;
    let mut f_frozen = |e: f64| -> Result<f64> {
        let eig = gamma_eigen(omega, e, &grid)?;
        Ok(branch_value(&eig, branch)? + alpha)
    };
    let mut diag = rebracket_and_solve(&mut f_frozen, coarse.energy, e_floor)?;
    diag.evaluations += evals;

    let eig = gamma_eigen(omega, diag.energy, &grid)?;
    let gamma = branch_value(&eig, branch)?;
    let mut v = eig.vector(branch).to_vec();
    let multiplicity = grid.degeneracy() as usize;
    let describe = format!(
        "adaptive radial sector grid: d = {d}, sector {sector}, radius {:.4}, {} nodes",
        grid.radius(),
        grid.len()
    );
    let cg = ChargeGrid::Radial(grid);
    fix_charge_sign(&cg, &mut v);
    Ok(Some(SecularRoot {
        energy: diag.energy,
        dimension: d,
        alpha,
        omega,
        sector,
        branch,
        multiplicity,
        diagnostics: SolveDiagnostics {
            iterations: diag.iterations,
            evaluations: diag.evaluations + 1,
            bracket: diag.bracket,
            secular_defect: (gamma + alpha).abs(),
            grid: describe,
        },
        charge_grid: cg,
        weighted_charge: v,
    }))
}

// ---------------------------------------------------------------------------
// Bound states and spectrum reports
// ---------------------------------------------------------------------------

/// Budgets of a full spectrum solve.
#[derive(Debug, Clone)]
pub struct SolveBudget {
    /// Highest angular sector scanned (ignored on the line).
    pub max_sector: u32,
    /// Branch cap per sector.
    pub max_branches: usize,
    /// Whether to synthesize product-grid eigenfunction samples for line
    /// states (radial states never carry samples).
    pub with_samples: bool,
}

impl Default for SolveBudget {
    fn default() -> Self {
        SolveBudget {
            max_sector: DEFAULT_MAX_SECTOR,
            max_branches: MAX_BRANCHES,
            with_samples: true,
        }
    }
}

/// One normalized bound state.
#[derive(Debug, Clone)]
pub struct BoundState {
    /// Binding depth `E > 0`; the Hamiltonian eigenvalue is `−E`.
    pub energy: f64,
    /// Angular sector (0 on the line).
    pub sector: u32,
    /// Branch index within the sector.
    pub branch: usize,
    /// Angular multiplicity of the level.
    pub multiplicity: usize,
    /// Nodes the charge is sampled on.
    pub charge_nodes: Vec<f64>,
    /// Physical charge values, scaled so the eigenfunction has unit norm
    /// and signed so the largest-magnitude component is positive.
    pub charge: Vec<f64>,
    /// Product-grid eigenfunction samples (line states only).
    pub samples: Option<EigenfunctionSamples>,
    /// Boundary-condition residual: on the line,
    /// `‖q + α·(u restricted to the contact set)‖ / ‖q‖` evaluated through
    /// an independent pointwise-kernel quadrature; in dimensions 2 and 3,
    /// `‖(α + Γ)q‖ / ‖q‖` on the solver grid.
    pub residual: f64,
    /// Disagreement between the two available normalization routes:
    /// on the line, `|‖u‖ − 1|` of the product-grid norm after the
    /// quadratic-form normalization; in dimensions 2 and 3, the relative
    /// mismatch between the form norm and the energy-derivative of the
    /// secular branch.
    pub norm_defect: f64,
    /// Solver bookkeeping inherited from the root.
    pub diagnostics: SolveDiagnostics,
}

/// Full negative-spectrum report at one coupling.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// Ambient dimension.
    pub dimension: u32,
    /// Coupling.
    pub alpha: f64,
    /// Oscillator frequency.
    pub omega: f64,
    /// Bound states sorted by decreasing binding depth (deepest first);
    /// degenerate levels are listed once with their multiplicity.
    pub states: Vec<BoundState>,
    /// Total number of negative eigenvalues including multiplicity.
    pub count: usize,
    /// Multiplicity-weighted count per sector.
    pub sector_counts: Vec<(u32, usize)>,
    /// Whether every examined branch either converged or was proven
    /// rootless.
    pub complete: bool,
    /// Failures encountered on abandoned branches.
    pub failures: Vec<String>,
}

/// Bound-state count from the search-floor values of the secular branches.
#[derive(Debug, Clone)]
pub struct CountReport {
    /// Ambient dimension.
    pub dimension: u32,
    /// Coupling.
    pub alpha: f64,
    /// Oscillator frequency.
    pub omega: f64,
    /// Total count including angular multiplicity.
    pub total: usize,
    /// Multiplicity-weighted count per sector.
    pub per_sector: Vec<(u32, usize)>,
    /// Search floor the branch values were taken at.
    pub floor_energy: f64,
}

/// Solves every branch of the secular equations within the budget and
/// reports the full negative spectrum, deepest level first.
///
/// Branches are examined in increasing order within each sector and
/// abandoned at the first rootless one (branch curves are ordered, so
/// deeper branches of the same sector cannot re-acquire roots); sectors are
/// solved independently in parallel.  Every reported state passes through
/// [`build_eigenfunction`], so the normalization and residual invariants
/// hold for each.  A branch failure marks the report incomplete and is
/// recorded verbatim in `failures` — states are never silently dropped.
///
/// # Errors
/// Rejects invalid model parameters; per-branch failures are captured in
/// the report rather than propagated.
pub fn bound_states(d: u32, alpha: f64, omega: f64, budget: &SolveBudget) -> Result<SpectrumReport> {
    check_dimension(d)?;
    require_finite("alpha", alpha)?;
    require_positive("omega", omega)?;
    let mut failures: Vec<String> = Vec::new();
    let mut states: Vec<BoundState> = Vec::new();

    if d == 1 {
        let mut window: Option<f64> = None;
        for branch in 0..budget.max_branches.min(MAX_BRANCHES) {
            if alpha >= 0.0 {
                break;
            }
            match solve_line_branch(alpha, omega, branch, window) {
                Ok(None) => break,
                Ok(Some(root)) => {
                    window = Some(root.energy * 1.000001);
                    match build_state(&root, budget.with_samples) {
                        Ok(st) => states.push(st),
                        Err(err) => {
                            failures.push(format!("line branch {branch}: {err}"));
                            break;
                        }
                    }
                }
                Err(err) => {
                    failures.push(format!("line branch {branch}: {err}"));
                    break;
                }
            }
        }
    } else {
        let e_floor = E_FLOOR_FACTOR_RADIAL * omega;
        let sectors: Vec<u32> = (0..=budget.max_sector.min(MAX_SECTOR)).collect();
        let per_sector: Vec<(Vec<BoundState>, Vec<String>)> = sectors
            .par_iter()
            .map(|&m| sector_states(d, alpha, omega, m, e_floor, budget))
            .collect();
        for (mut sts, mut fails) in per_sector {
            states.append(&mut sts);
            failures.append(&mut fails);
        }
    }

    states.sort_by(|a, b| {
        b.energy
            .total_cmp(&a.energy)
            .then(a.sector.cmp(&b.sector))
            .then(a.branch.cmp(&b.branch))
    });
    let count = states.iter().map(|s| s.multiplicity).sum();
    let mut sector_counts: Vec<(u32, usize)> = Vec::new();
    for s in &states {
        match sector_counts.iter_mut().find(|(m, _)| *m == s.sector) {
            Some((_, c)) => *c += s.multiplicity,
            None => sector_counts.push((s.sector, s.multiplicity)),
        }
    }
    sector_counts.sort_by_key(|&(m, _)| m);
    Ok(SpectrumReport {
        dimension: d,
        alpha,
        omega,
        complete: failures.is_empty(),
        failures,
        count,
        sector_counts,
        states,
    })
}

/// Solves the branch ladder of one sector (used by [`bound_states`]).
fn sector_states(
    d: u32,
    alpha: f64,
    omega: f64,
    sector: u32,
    e_floor: f64,
    budget: &SolveBudget,
) -> (Vec<BoundState>, Vec<String>) {
    let mut states = Vec::new();
    let mut failures = Vec::new();
    let floor_values = match sector_grid(d, sector, omega, e_floor)
        .and_then(|g| gamma_eigen(omega, e_floor, &g))
    {
        Ok(eig) => eig.values,
        Err(err) => {
            failures.push(format!("sector {sector} floor scan: {err}"));
            return (states, failures);
        }
    };
    let roots = floor_values
        .iter()
        .take(budget.max_branches.min(MAX_BRANCHES))
        .take_while(|&&g| g + alpha < 0.0)
        .count();
    let mut window: Option<f64> = None;
    for branch in 0..roots {
        match solve_radial_branch(
            d,
            alpha,
            omega,
            sector,
            branch,
            Some(floor_values[branch]),
            window,
        ) {
            Ok(None) => break,
            Ok(Some(root)) => {
                window = Some(root.energy * 1.000001);
                match build_state(&root, budget.with_samples) {
                    Ok(st) => states.push(st),
                    Err(err) => {
                        failures.push(format!("sector {sector} branch {branch}: {err}"));
                        break;
                    }
                }
            }
            Err(err) => {
                failures.push(format!("sector {sector} branch {branch}: {err}"));
                break;
            }
        }
    }
    (states, failures)
}

/// Counts the negative eigenvalues from the floor values of the secular
/// branches, without solving for any root.
///
/// A branch contributes exactly when its secular value is still negative
/// at the counting floor ([`E_FLOOR_FACTOR`]`·ω` on the line,
/// [`COUNT_FLOOR_FACTOR_RADIAL`]`·ω` in dimensions 2 and 3): branches are
/// monotone, so this is precisely the root-existence criterion of the
/// solvers for roots deeper than the floor.  The count is exact for the
/// discretized curves and much cheaper than [`bound_states`] (one
/// decomposition per sector), but levels shallower than the floor — on the
/// line at extremely weak attraction, in the plane at strong repulsive
/// coupling — are not seen; the floor used is reported alongside the
/// count.
///
/// # Errors
/// Rejects invalid model parameters and propagates assembly failures.
pub fn count_bound_states(d: u32, alpha: f64, omega: f64, max_sector: u32) -> Result<CountReport> {
    check_dimension(d)?;
    require_finite("alpha", alpha)?;
    require_positive("omega", omega)?;
    let e_floor = if d == 1 {
        E_FLOOR_FACTOR * omega
    } else {
        COUNT_FLOOR_FACTOR_RADIAL * omega
    };
    let mut per_sector: Vec<(u32, usize)> = Vec::new();
    if d == 1 {
        let mut total = 0usize;
        if alpha < 0.0 {
            // Size the grid for the highest branch the coupling could bind:
            // the envelope of the branch values at the floor decays like
            // 1/√(2bω), so b stays below α²/(2ω) plus a safety margin.
            let b_guess = ((alpha * alpha / (2.0 * omega)).ceil() as usize + 6).min(MAX_BRANCHES);
            let sq = omega.sqrt();
            let content = ((2 * b_guess + 3) as f64 / omega).sqrt();
            let half = (10.0 / sq).max(1.6 * content + 8.0 / sq);
            let per_unit = (15.2 * sq).max(5.0 * ((2 * b_guess + 3) as f64 * omega).sqrt());
            let nodes = ((2.0 * half * per_unit).ceil() as usize).clamp(160, MAX_LINE_NODES);
            let grid = grid_1d(half, nodes)?;
            let spec = ModelSpec::new(1, omega, 0.0, e_floor)?;
            let op = discretize_k_1d(&spec, &grid)?;
            let eig = sym_eigen(op.matrix(), op.n())?;
            total = eig
                .values
                .iter()
                .rev()
                .take(MAX_BRANCHES)
                .take_while(|&&mu| 1.0 + alpha * mu < 0.0)
                .count();
        }
        if total > 0 {
            per_sector.push((0, total));
        }
        return Ok(CountReport {
            dimension: 1,
            alpha,
            omega,
            total,
            per_sector,
            floor_energy: e_floor,
        });
    }
    let sectors: Vec<u32> = (0..=max_sector.min(MAX_SECTOR)).collect();
    let counted: Vec<(u32, usize)> = sectors
        .par_iter()
        .map(|&m| -> Result<(u32, usize)> {
            let grid = sector_grid(d, m, omega, e_floor)?;
            let eig = gamma_eigen(omega, e_floor, &grid)?;
            let roots = eig
                .values
                .iter()
                .take(MAX_BRANCHES)
                .take_while(|&&g| g + alpha < 0.0)
                .count();
            Ok((m, roots * grid.degeneracy() as usize))
        })
        .collect::<Result<_>>()?;
    let total = counted.iter().map(|&(_, c)| c).sum();
    per_sector = counted.into_iter().filter(|&(_, c)| c > 0).collect();
    Ok(CountReport {
        dimension: d,
        alpha,
        omega,
        total,
        per_sector,
        floor_energy: e_floor,
    })
}

// ---------------------------------------------------------------------------
// Product grids and eigenfunction samples
// ---------------------------------------------------------------------------

/// Tensor quadrature grid for pair functions `u(x, y)` of the line model:
/// a composite Gauss–Legendre axis for the particle coordinate `x` and a
/// symmetric line charge grid for the oscillator coordinate `y`.
#[derive(Debug, Clone)]
pub struct ProductGrid {
    line: Grid1D,
    x: Vec<f64>,
    x_weights: Vec<f64>,
}

impl ProductGrid {
    /// Builds the product grid from explicit particle-axis panel edges.
    ///
    /// # Errors
    /// Rejects fewer than two edges or non-increasing edges.
    pub fn new(line: Grid1D, x_edges: &[f64]) -> Result<Self> {
        let rule = quadrature::composite_gauss_legendre(x_edges, PANEL_NODES)?;
        Ok(ProductGrid {
            line,
            x: rule.nodes().to_vec(),
            x_weights: rule.weights().to_vec(),
        })
    }

    /// Particle-axis nodes.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Particle-axis quadrature weights.
    pub fn x_weights(&self) -> &[f64] {
        &self.x_weights
    }

    /// Oscillator-axis nodes.
    pub fn y(&self) -> &[f64] {
        self.line.nodes()
    }

    /// Oscillator-axis quadrature weights.
    pub fn y_weights(&self) -> &[f64] {
        self.line.weights()
    }

    /// Underlying oscillator-axis grid.
    pub fn line(&self) -> &Grid1D {
        &self.line
    }

    fn shape(&self) -> (usize, usize) {
        (self.x.len(), self.line.len())
    }
}

/// Samples of a pair function on a [`ProductGrid`], stored row-major:
/// `values[i * ny + j] = u(x_i, y_j)`.
#[derive(Debug, Clone)]
pub struct EigenfunctionSamples {
    grid: ProductGrid,
    values: Vec<f64>,
}

impl EigenfunctionSamples {
    /// Wraps values sampled on `grid`.
    ///
    /// # Errors
    /// Rejects a length mismatch or non-finite entries.
    pub fn new(grid: ProductGrid, values: Vec<f64>) -> Result<Self> {
        let (nx, ny) = grid.shape();
        if values.len() != nx * ny {
            return Err(Error::invalid(format!(
                "sample storage mismatch: {} values for a {nx} x {ny} grid",
                values.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("eigenfunction samples".into()));
        }
        Ok(EigenfunctionSamples { grid, values })
    }

    /// Grid the samples live on.
    pub fn grid(&self) -> &ProductGrid {
        &self.grid
    }

    /// Row-major sample storage.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Sample `u(x_i, y_j)`.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.line.len() + j]
    }

    /// Product-grid `L²` norm.
    pub fn norm(&self) -> f64 {
        self.weighted_inner(self).sqrt()
    }

    /// Product-grid `L²` inner product with samples on a grid of the same
    /// shape.
    pub fn weighted_inner(&self, other: &EigenfunctionSamples) -> f64 {
        let (nx, ny) = self.grid.shape();
        let wy = self.grid.y_weights();
        let mut acc = 0.0;
        for i in 0..nx {
            let row = &self.values[i * ny..(i + 1) * ny];
            let orow = &other.values[i * ny..(i + 1) * ny];
            let mut inner = 0.0;
            for j in 0..ny {
                inner += wy[j] * row[j] * orow[j];
            }
            acc += self.grid.x_weights[i] * inner;
        }
        acc
    }
}

/// Particle-axis panel edges for sampling a bound state: uniform panels
/// across the charge support, then geometrically growing panels out to the
/// decay range of the slowest mode `e^{-κ₀|x|}`.
fn sample_x_edges(half_charge: f64, kappa0: f64, omega: f64) -> Vec<f64> {
    let inner = (1.0 / omega.sqrt()).min(2.0 / kappa0);
    let cap = (3.0 / kappa0).max(inner);
    let x_max = half_charge + 9.0 / kappa0;
    let mut right = vec![0.0f64];
    let mut r = 0.0f64;
    while r < half_charge - 1e-12 * half_charge {
        r = (r + inner).min(half_charge);
        right.push(r);
    }
    let mut width = inner;
    while r < x_max {
        width = (width * 1.4).min(cap);
        r += width;
        if x_max - r < 0.3 * width {
            r = x_max;
        }
        right.push(r.min(x_max));
    }
    let mut edges: Vec<f64> = right.iter().skip(1).map(|&v| -v).rev().collect();
    edges.extend(right);
    edges
}

/// Sums `Σ_j g_j e^{-κ|t - y_j|}` at every sorted target `t`, in a single
/// forward and a single backward sweep with only decaying exponentials, so
/// the evaluation is overflow-free for arbitrarily large `κ`.
fn exp_convolve(kappa: f64, ys: &[f64], g: &[f64], targets: &[f64]) -> Vec<f64> {
    let m = targets.len();
    let mut out = vec![0.0f64; m];
    // Forward sweep: contributions from y_j <= t.
    let mut acc = 0.0f64;
    let mut pos = f64::NEG_INFINITY;
    let mut j = 0usize;
    for (k, &t) in targets.iter().enumerate() {
        while j < ys.len() && ys[j] <= t {
            if acc != 0.0 {
                acc *= (-kappa * (ys[j] - pos)).exp();
            }
            acc += g[j];
            pos = ys[j];
            j += 1;
        }
        if acc != 0.0 {
            out[k] = acc * (-kappa * (t - pos)).exp();
        }
    }
    // Backward sweep: contributions from y_j > t.
    let mut acc = 0.0f64;
    let mut pos = f64::INFINITY;
    let mut j = ys.len();
    for (k, &t) in targets.iter().enumerate().rev() {
        while j > 0 && ys[j - 1] > t {
            if acc != 0.0 {
                acc *= (-kappa * (pos - ys[j - 1])).exp();
            }
            acc += g[j - 1];
            pos = ys[j - 1];
            j -= 1;
        }
        if acc != 0.0 {
            out[k] += acc * (-kappa * (pos - t)).exp();
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Eigenfunction assembly
// ---------------------------------------------------------------------------

/// Oscillator-mode content of a line charge: coefficients
/// `a_n = ∫ Ψ_n(y) q(y) dy` with an adaptive truncation level.
struct ModeContent {
    /// `psi[i]` holds `Ψ_0(y_i), …, Ψ_{n_cap}(y_i)`.
    psi: Vec<Vec<f64>>,
    /// Projection coefficients up to `n_cap`.
    coeff: Vec<f64>,
    kappa: Vec<f64>,
}

impl ModeContent {
    /// Projects the weighted charge vector on the oscillator modes and
    /// truncates where the mode amplitudes `|a_n|/κ_n` fall twelve decades
    /// below the largest one.
    fn project(grid: &Grid1D, weighted: &[f64], omega: f64, energy: f64, extra: usize) -> Result<Self> {
        let n_hi = ((3.0 * energy / omega) as usize + 80 + 2 * extra).clamp(48, MAX_SERIES_LEVEL);
        let mut psi: Vec<Vec<f64>> = Vec::with_capacity(grid.len());
        for &y in grid.nodes() {
            psi.push(kernels::hermite_psi_row(n_hi, omega, y)?);
        }
        let sqw: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
        let kappa: Vec<f64> = (0..=n_hi)
            .map(|n| (2.0 * (omega * n as f64 + energy)).sqrt())
            .collect();
        let mut coeff = vec![0.0f64; n_hi + 1];
        for n in 0..=n_hi {
            let mut a = 0.0;
            for i in 0..grid.len() {
                a += sqw[i] * psi[i][n] * weighted[i];
            }
            coeff[n] = a;
        }
        let amp_max = coeff
            .iter()
            .zip(&kappa)
            .fold(0.0f64, |m, (a, k)| m.max(a.abs() / k));
        let mut n_cap = n_hi;
        while n_cap > 8 {
            let window_max = (n_cap.saturating_sub(8)..=n_cap)
                .map(|n| coeff[n].abs() / kappa[n])
                .fold(0.0f64, f64::max);
            if window_max > 1e-12 * amp_max {
                break;
            }
            n_cap -= 1;
        }
        coeff.truncate(n_cap + 1);
        Ok(ModeContent {
            psi,
            coeff,
            kappa,
        })
    }

    fn n_cap(&self) -> usize {
        self.coeff.len() - 1
    }

    /// Evaluates the charge `q(y) = Σ_n a_n Ψ_n(y)` anywhere.
    fn charge_at(&self, omega: f64, y: f64) -> Result<f64> {
        let row = kernels::hermite_psi_row(self.n_cap(), omega, y)?;
        Ok(self
            .coeff
            .iter()
            .zip(&row)
            .map(|(a, p)| a * p)
            .sum())
    }
}

/// Completes a converged secular root into a normalized bound state.
///
/// On the line the eigenfunction is synthesized as the oscillator-mode
/// series `u(x, y) = Σ_n Ψ_n(y) c_n(x)/κ_n` with
/// `c_n(x) = ∫ Ψ_n(y') e^{-κ_n|x-y'|} q(y') dy'` and `κ_n = √(2(ωn+E))`,
/// sampled on a product grid sized to both the charge support and the
/// decay range `1/κ₀`; the state is normalized to a unit product-grid norm
/// and the disagreement with the quadratic-form norm is recorded as
/// `norm_defect`.  The boundary-condition residual is evaluated through an
/// independent route: the charge is re-expanded in oscillator modes and
/// integrated against the pointwise kernel with singularity-graded panels.
///
/// In dimensions 2 and 3 the charge is normalized through the quadratic
/// form of the shift-derivative operator (which equals the squared
/// eigenfunction norm), the residual is the secular defect
/// `‖(α + Γ)q‖/‖q‖` on the solver grid, and `norm_defect` compares the
/// form norm against a centered difference of the secular branch.
///
/// # Errors
/// Fails with [`Error::NoConvergence`] when the residual exceeds `1e-4`
/// (the state is unconverged); propagates assembly failures.
pub fn build_eigenfunction(root: &SecularRoot) -> Result<BoundState> {
    build_state(root, true)
}

fn build_state(root: &SecularRoot, with_samples: bool) -> Result<BoundState> {
    match &root.charge_grid {
        ChargeGrid::Line(_) => build_line_state(root, with_samples),
        ChargeGrid::Radial(_) => build_radial_state(root),
    }
}

fn build_line_state(root: &SecularRoot, with_samples: bool) -> Result<BoundState> {
    let ChargeGrid::Line(grid) = &root.charge_grid else {
        return Err(Error::invalid("line build invoked on a radial root"));
    };
    let (omega, energy) = (root.omega, root.energy);
    let spec = ModelSpec::new(1, omega, root.alpha, energy)?;

    // Quadratic-form normalization: ⟨q, T q⟩ is the squared norm of the
    // eigenfunction the charge generates.
    let t_op = norm_moment_1d(&spec, grid)?;
    let nt = t_op.quadratic_form(&root.weighted_charge)?;
    if !(nt > 0.0) {
        return Err(Error::NonFinite(format!(
            "non-positive squared norm {nt:.6e} from the shift-derivative form"
        )));
    }
    let mut v: Vec<f64> = root
        .weighted_charge
        .iter()
        .map(|c| c / nt.sqrt())
        .collect();

    let modes = ModeContent::project(grid, &v, omega, energy, root.branch)?;

    let mut samples = None;
    let mut norm_defect = 0.0;
    if with_samples {
        let kappa0 = (2.0 * energy).sqrt();
        let edges = sample_x_edges(grid.half_width(), kappa0, omega);
        let pg = ProductGrid::new(grid.clone(), &edges)?;
        let mut values = synthesize_series(&pg, grid, &modes, &v);
        let g = product_norm(&pg, &values);
        if !(g.is_finite() && g > 0.0) {
            return Err(Error::NonFinite(format!("product-grid norm {g}")));
        }
        for val in &mut values {
            *val /= g;
        }
        for c in &mut v {
            *c /= g;
        }
        norm_defect = (g - 1.0).abs();
        samples = Some(EigenfunctionSamples::new(pg, values)?);
    }

    let residual = line_residual(&spec, root.alpha, grid, &modes, &v)?;
    if residual > RESIDUAL_CAP {
        return Err(Error::NoConvergence(format!(
            "boundary-condition residual {residual:.3e} exceeds {RESIDUAL_CAP:.0e} \
             at E = {energy:.9e}"
        )));
    }

    let cg = ChargeGrid::Line(grid.clone());
    Ok(BoundState {
        energy,
        sector: root.sector,
        branch: root.branch,
        multiplicity: root.multiplicity,
        charge_nodes: grid.nodes().to_vec(),
        charge: physical_charge(&cg, &v),
        samples,
        residual,
        norm_defect,
        diagnostics: root.diagnostics.clone(),
    })
}

/// Product-grid `L²` norm of row-major values (helper used before the
/// samples object exists).
fn product_norm(pg: &ProductGrid, values: &[f64]) -> f64 {
    let (nx, ny) = pg.shape();
    let wy = pg.y_weights();
    let mut acc = 0.0;
    for i in 0..nx {
        let row = &values[i * ny..(i + 1) * ny];
        let mut inner = 0.0;
        for j in 0..ny {
            inner += wy[j] * row[j] * row[j];
        }
        acc += pg.x_weights()[i] * inner;
    }
    acc.sqrt()
}

/// Evaluates the mode series on the product grid.
fn synthesize_series(
    pg: &ProductGrid,
    grid: &Grid1D,
    modes: &ModeContent,
    weighted: &[f64],
) -> Vec<f64> {
    let (nx, ny) = pg.shape();
    let sqw: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    let mut values = vec![0.0f64; nx * ny];
    let rows: Vec<Vec<f64>> = (0..=modes.n_cap())
        .into_par_iter()
        .map(|n| {
            let g: Vec<f64> = (0..ny).map(|j| sqw[j] * modes.psi[j][n] * weighted[j]).collect();
            exp_convolve(modes.kappa[n], grid.nodes(), &g, pg.x())
        })
        .collect();
    for n in 0..=modes.n_cap() {
        let cn = &rows[n];
        let inv_kappa = 1.0 / modes.kappa[n];
        for i in 0..nx {
            let amp = cn[i] * inv_kappa;
            if amp == 0.0 {
                continue;
            }
            let row = &mut values[i * ny..(i + 1) * ny];
            for j in 0..ny {
                row[j] += amp * modes.psi[j][n];
            }
        }
    }
    values
}

/// Boundary-condition residual of a line charge through an independent
/// route: `r(y) = q(y) + α ∫ K(y, y') q(y') dy'` with the charge evaluated
/// from its oscillator-mode expansion and the kernel integrated with
/// panels graded into the logarithmic singularity at `y' = y`.
fn line_residual(
    spec: &ModelSpec,
    alpha: f64,
    grid: &Grid1D,
    modes: &ModeContent,
    weighted: &[f64],
) -> Result<f64> {
    let nodes = grid.nodes();
    let n = nodes.len();
    // Probe subset: every stride-th node inside the region carrying charge.
    let q_phys: Vec<f64> = weighted
        .iter()
        .zip(grid.weights())
        .map(|(v, w)| v / w.sqrt())
        .collect();
    let q_max = q_phys.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let live: Vec<usize> = (0..n).filter(|&i| q_phys[i].abs() > 1e-8 * q_max).collect();
    if live.is_empty() {
        return Err(Error::NonFinite("charge vanishes on the grid".into()));
    }
    let stride = (live.len() / 48).max(1);
    let probes: Vec<usize> = live.iter().step_by(stride).copied().collect();

    let half = grid.half_width();
    let pad = 2.0 / spec.omega.sqrt();
    let lo = -half - pad;
    let hi = half + pad;
    let results: Vec<(f64, f64)> = probes
        .par_iter()
        .map(|&p| -> Result<(f64, f64)> {
            let yp = nodes[p];
            let mut edges: Vec<f64> = Vec::new();
            // Panels graded geometrically into the singularity from both
            // sides; the innermost sliver of half-width `1e-10 * span`
            // around the probe is dropped (its integrand is integrable and
            // contributes below the residual resolution).
            let span = hi - lo;
            let mut offs = vec![1e-10 * span];
            while *offs.last().unwrap() < span {
                let next = offs.last().unwrap() * 3.0;
                offs.push(next);
            }
            for &o in offs.iter().rev() {
                let e = yp - o;
                if e > lo {
                    edges.push(e);
                }
            }
            edges.insert(0, lo);
            for &o in offs.iter() {
                let e = yp + o;
                if e < hi {
                    edges.push(e);
                }
            }
            edges.push(hi);
            let rule = quadrature::composite_gauss_legendre(&edges, PANEL_NODES)?;
            let mut acc = 0.0;
            for (&yq, &wq) in rule.nodes().iter().zip(rule.weights()) {
                if yq == yp {
                    continue;
                }
                let k = kernels::k_kernel(spec, &[yp], &[yq])?;
                acc += wq * k * modes.charge_at(spec.omega, yq)?;
            }
            let qp = modes.charge_at(spec.omega, yp)?;
            Ok((qp + alpha * acc, qp))
        })
        .collect::<Result<_>>()?;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &p) in probes.iter().enumerate() {
        let w = grid.weights()[p];
        num += w * results[i].0 * results[i].0;
        den += w * results[i].1 * results[i].1;
    }
    if !(den > 0.0) {
        return Err(Error::NonFinite("charge norm vanished on the probe set".into()));
    }
    Ok((num / den).sqrt())
}

fn build_radial_state(root: &SecularRoot) -> Result<BoundState> {
    let ChargeGrid::Radial(sector) = &root.charge_grid else {
        return Err(Error::invalid("radial build invoked on a line root"));
    };
    let spec = ModelSpec::new(root.dimension, root.omega, root.alpha, root.energy)?;
    let t_op = assemble_norm_moment_sector(&spec, sector)?;
    let nt = t_op.quadratic_form(&root.weighted_charge)?;
    if !(nt > 0.0) {
        return Err(Error::NonFinite(format!(
            "non-positive squared norm {nt:.6e} from the shift-derivative form"
        )));
    }
    let v: Vec<f64> = root
        .weighted_charge
        .iter()
        .map(|c| c / nt.sqrt())
        .collect();

    // Cross-check the form norm against the energy derivative of the
    // secular branch (they agree exactly in the continuum).
    let h = 1e-4 * root.energy;
    let g_plus = gamma_eigen(root.omega, root.energy + h, sector)?;
    let g_minus = gamma_eigen(root.omega, root.energy - h, sector)?;
    let slope = (branch_value(&g_plus, root.branch)? - branch_value(&g_minus, root.branch)?)
        / (2.0 * h);
    let norm_defect = (slope - nt).abs() / nt;

    let residual = root.diagnostics.secular_defect;
    if residual > RESIDUAL_CAP {
        return Err(Error::NoConvergence(format!(
            "boundary-condition residual {residual:.3e} exceeds {RESIDUAL_CAP:.0e} \
             at E = {:.9e}",
            root.energy
        )));
    }
    let cg = root.charge_grid.clone();
    Ok(BoundState {
        energy: root.energy,
        sector: root.sector,
        branch: root.branch,
        multiplicity: root.multiplicity,
        charge_nodes: sector.nodes().to_vec(),
        charge: physical_charge(&cg, &v),
        samples: None,
        residual,
        norm_defect,
        diagnostics: root.diagnostics.clone(),
    })
}

// ---------------------------------------------------------------------------
// Resolvent application
// ---------------------------------------------------------------------------

/// Applies the resolvent of the line Hamiltonian at spectral point `−λ` to
/// product-grid samples: `u = G f + 𝒢 q_f` with the charge solved from the
/// linear system `(1 + α K^λ) q_f = −α (G f)|contact`.
///
/// All three pieces are evaluated in the oscillator-mode representation
/// with overflow-free exponential sweeps; the charge system is solved
/// spectrally through the decomposition of the discretized kernel.
///
/// # Errors
/// Rejects shifts at or below the solvability threshold (`1 + α·μ₀(λ) ≤ 0`
/// for attractive couplings) and near-singular charge systems, reporting
/// the offending eigenvalue; propagates assembly failures.
pub fn apply_resolvent(
    alpha: f64,
    omega: f64,
    lambda: f64,
    source: &EigenfunctionSamples,
) -> Result<EigenfunctionSamples> {
    require_finite("alpha", alpha)?;
    require_positive("omega", omega)?;
    require_positive("lambda", lambda)?;
    let pg = source.grid();
    let grid = pg.line();
    let (nx, ny) = pg.shape();

    // Oscillator-mode content of the source.
    let n_hi = ((3.0 * lambda / omega) as usize + 160).clamp(160, MAX_SERIES_LEVEL);
    let mut psi: Vec<Vec<f64>> = Vec::with_capacity(ny);
    for &y in grid.nodes() {
        psi.push(kernels::hermite_psi_row(n_hi, omega, y)?);
    }
    // f_n(x_i) = ∫ Ψ_n(y) f(x_i, y) dy
    let wy = grid.weights();
    let fmodes: Vec<Vec<f64>> = (0..=n_hi)
        .into_par_iter()
        .map(|n| {
            (0..nx)
                .map(|i| {
                    let row = &source.values()[i * ny..(i + 1) * ny];
                    (0..ny).map(|j| wy[j] * psi[j][n] * row[j]).sum()
                })
                .collect()
        })
        .collect();
    let kappa: Vec<f64> = (0..=n_hi)
        .map(|n| (2.0 * (omega * n as f64 + lambda)).sqrt())
        .collect();
    // Adaptive truncation on the source content.
    let amp = |n: usize| -> f64 {
        fmodes[n].iter().fold(0.0f64, |m, v| m.max(v.abs())) / kappa[n]
    };
    let amp_max = (0..=n_hi).map(amp).fold(0.0f64, f64::max);
    let mut n_cap = n_hi;
    while n_cap > 8 {
        let recent = (n_cap.saturating_sub(8)..=n_cap).map(amp).fold(0.0f64, f64::max);
        if recent > 1e-13 * amp_max {
            break;
        }
        n_cap -= 1;
    }

    // Free part: h_n at both particle-axis and contact-set targets.
    let gx: Vec<Vec<f64>> = (0..=n_cap)
        .into_par_iter()
        .map(|n| {
            let g: Vec<f64> = (0..nx).map(|i| pg.x_weights()[i] * fmodes[n][i]).collect();
            exp_convolve(kappa[n], pg.x(), &g, pg.x())
        })
        .collect();
    let gy: Vec<Vec<f64>> = (0..=n_cap)
        .into_par_iter()
        .map(|n| {
            let g: Vec<f64> = (0..nx).map(|i| pg.x_weights()[i] * fmodes[n][i]).collect();
            exp_convolve(kappa[n], pg.x(), &g, grid.nodes())
        })
        .collect();

    // Contact trace of the free part and the charge linear system.
    let spec = ModelSpec::new(1, omega, alpha, lambda)?;
    let op = discretize_k_1d(&spec, grid)?;
    let eig = sym_eigen(op.matrix(), op.n())?;
    let mu_top = eig.values[eig.values.len() - 1];
    if alpha < 0.0 && 1.0 + alpha * mu_top <= 0.0 {
        return Err(Error::invalid(format!(
            "shift λ = {lambda:.6e} lies at or below the solvability threshold: \
             1 + α·μ₀ = {:.6e} with μ₀ = {mu_top:.9e}",
            1.0 + alpha * mu_top
        )));
    }
    let mut diag = vec![0.0f64; ny];
    for n in 0..=n_cap {
        let inv_kappa = 1.0 / kappa[n];
        for j in 0..ny {
            diag[j] += gy[n][j] * inv_kappa * psi[j][n];
        }
    }
    let rhs: Vec<f64> = (0..ny)
        .map(|j| -alpha * wy[j].sqrt() * diag[j])
        .collect();
    let mut vq = vec![0.0f64; ny];
    let scale = 1.0 + alpha.abs() * mu_top.abs();
    for k in 0..eig.values.len() {
        let denom = 1.0 + alpha * eig.values[k];
        let ek = eig.vector(k);
        let proj: f64 = ek.iter().zip(&rhs).map(|(a, b)| a * b).sum();
        if proj == 0.0 {
            continue;
        }
        if denom.abs() < 1e-12 * scale {
            return Err(Error::NoConvergence(format!(
                "charge system singular: 1 + α·μ = {denom:.3e} at eigenvalue μ = {:.9e}",
                eig.values[k]
            )));
        }
        let c = proj / denom;
        for (vj, e) in vq.iter_mut().zip(ek) {
            *vj += c * e;
        }
    }

    // Charge correction in mode form.
    let sqw: Vec<f64> = wy.iter().map(|w| w.sqrt()).collect();
    let qx: Vec<Vec<f64>> = (0..=n_cap)
        .into_par_iter()
        .map(|n| {
            let g: Vec<f64> = (0..ny).map(|j| sqw[j] * psi[j][n] * vq[j]).collect();
            exp_convolve(kappa[n], grid.nodes(), &g, pg.x())
        })
        .collect();

    let mut values = vec![0.0f64; nx * ny];
    for n in 0..=n_cap {
        let inv_kappa = 1.0 / kappa[n];
        for i in 0..nx {
            let amp = (gx[n][i] + qx[n][i]) * inv_kappa;
            if amp == 0.0 {
                continue;
            }
            let row = &mut values[i * ny..(i + 1) * ny];
            for j in 0..ny {
                row[j] += amp * psi[j][n];
            }
        }
    }
    EigenfunctionSamples::new(pg.clone(), values)
}

/// Charge response of the sector resolvent in dimensions 2 and 3: solves
/// `(α + Γ^λ) q = −s` for a radial contact source `s` sampled on `grid`
/// and reports the `L²` norm of the induced correction `𝒢 q`.
#[derive(Debug, Clone)]
pub struct RadialResolventCharge {
    /// Physical charge values at the grid nodes.
    pub charge: Vec<f64>,
    /// `L²` norm of the correction the charge generates.
    pub correction_norm: f64,
    /// Distance of the charge system from singularity: `min_k |α + γ_k|`.
    pub margin: f64,
}

/// Solves the radial charge system of the sector resolvent at shift `λ`.
///
/// The source is the restriction of the free part to the contact set,
/// sampled at the nodes of `grid`; the returned charge solves
/// `(α + Γ^λ) q = −source` in the sector discretization, and
/// `correction_norm` is the exact `L²` norm of the correction term the
/// charge generates (through the quadratic form of the shift-derivative
/// operator).
///
/// # Errors
/// Rejects shifts at or below the solvability threshold (`α + γ₀(λ) ≤ 0`)
/// reporting the offending eigenvalue; propagates assembly failures.
pub fn resolvent_charge_radial(
    alpha: f64,
    omega: f64,
    lambda: f64,
    grid: &RadialSector,
    source: &[f64],
) -> Result<RadialResolventCharge> {
    require_finite("alpha", alpha)?;
    require_positive("omega", omega)?;
    require_positive("lambda", lambda)?;
    if source.len() != grid.len() {
        return Err(Error::invalid(format!(
            "source length {} does not match the {}-node grid",
            source.len(),
            grid.len()
        )));
    }
    let spec = ModelSpec::new(grid.dimension(), omega, alpha, lambda)?;
    let op = assemble_gamma_sector(&spec, grid)?;
    let eig = sym_eigen(op.matrix(), op.n())?;
    if alpha + eig.values[0] <= 0.0 {
        return Err(Error::invalid(format!(
            "shift λ = {lambda:.6e} lies at or below the solvability threshold: \
             α + γ₀ = {:.6e} with γ₀ = {:.9e}",
            alpha + eig.values[0],
            eig.values[0]
        )));
    }
    let rhs: Vec<f64> = grid
        .measures()
        .iter()
        .zip(source)
        .map(|(m, s)| -m.sqrt() * s)
        .collect();
    let mut v = vec![0.0f64; grid.len()];
    let mut margin = f64::INFINITY;
    for k in 0..eig.values.len() {
        let denom = alpha + eig.values[k];
        margin = margin.min(denom.abs());
        let ek = eig.vector(k);
        let proj: f64 = ek.iter().zip(&rhs).map(|(a, b)| a * b).sum();
        let c = proj / denom;
        for (vj, e) in v.iter_mut().zip(ek) {
            *vj += c * e;
        }
    }
    let t_op = assemble_norm_moment_sector(&spec, grid)?;
    let correction_norm = t_op.quadratic_form(&v)?.max(0.0).sqrt();
    let charge = grid
        .measures()
        .iter()
        .zip(&v)
        .map(|(m, c)| c / m.sqrt())
        .collect();
    Ok(RadialResolventCharge {
        charge,
        correction_norm,
        margin,
    })
}

// ---------------------------------------------------------------------------
// Reduced density matrices
// ---------------------------------------------------------------------------

/// One-body reduced density matrix `ρ(x, x') = ∫ u(x, y) u(x', y) dy` of a
/// normalized pair state.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    /// Particle-axis nodes.
    pub x: Vec<f64>,
    /// Particle-axis quadrature weights.
    pub x_weights: Vec<f64>,
    /// Kernel values, row-major.
    pub matrix: Vec<f64>,
    /// Quadrature trace `∫ ρ(x, x) dx`.
    pub trace: f64,
    /// Lowest eigenvalue of the weighted kernel (negative values measure
    /// the departure from positivity).
    pub eig_low: f64,
    /// Largest eigenvalue (the leading occupation number).
    pub eig_high: f64,
}

/// Contracts the oscillator coordinate of normalized product-grid samples
/// into the one-body reduced density matrix.
///
/// The kernel is a quadrature Gram matrix, hence symmetric and positive
/// semidefinite by construction; its trace reproduces the squared sample
/// norm.
///
/// # Errors
/// Flags grid inadequacy when the trace deviates from 1 by more than
/// `1e-4`; propagates eigensolver failures.
pub fn reduced_density(samples: &EigenfunctionSamples) -> Result<DensityMatrix> {
    let pg = samples.grid();
    let (nx, ny) = pg.shape();
    let wy = pg.y_weights();
    let matrix: Vec<f64> = (0..nx)
        .into_par_iter()
        .flat_map_iter(|k| {
            let rk = &samples.values()[k * ny..(k + 1) * ny];
            let vals = samples.values();
            (0..nx).map(move |l| {
                let rl = &vals[l * ny..(l + 1) * ny];
                let mut acc = 0.0;
                for j in 0..ny {
                    acc += wy[j] * rk[j] * rl[j];
                }
                acc
            })
        })
        .collect();
    let wx = pg.x_weights();
    let trace: f64 = (0..nx).map(|k| wx[k] * matrix[k * nx + k]).sum();
    if (trace - 1.0).abs() > 1e-4 {
        return Err(Error::NoConvergence(format!(
            "density-matrix trace {trace:.8} deviates from 1 beyond 1e-4: \
             the sampling grid is inadequate"
        )));
    }
    let weighted = weighted_kernel(&matrix, wx, nx);
    let eig = sym_eigen(&weighted, nx)?;
    Ok(DensityMatrix {
        x: pg.x().to_vec(),
        x_weights: wx.to_vec(),
        matrix,
        trace,
        eig_low: eig.values[0],
        eig_high: eig.values[nx - 1],
    })
}

fn weighted_kernel(matrix: &[f64], w: &[f64], n: usize) -> Vec<f64> {
    let sq: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let mut out = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = sq[i] * matrix[i * n + j] * sq[j];
        }
    }
    out
}

/// Trace distance `½‖ρ − |ψ⟩⟨ψ|‖₁` between a reduced density matrix and
/// the projector on a pure state sampled at the same particle-axis nodes.
///
/// Both operators are symmetrized with the quadrature weights; the pure
/// state is normalized in the discrete metric before projecting.
///
/// # Errors
/// Rejects length mismatches and a vanishing pure state.
pub fn trace_distance(density: &DensityMatrix, pure: &[f64]) -> Result<f64> {
    let n = density.x.len();
    if pure.len() != n {
        return Err(Error::invalid(format!(
            "pure-state samples have length {} but the density matrix has {n} nodes",
            pure.len()
        )));
    }
    let sq: Vec<f64> = density.x_weights.iter().map(|v| v.sqrt()).collect();
    let mut psi: Vec<f64> = sq.iter().zip(pure).map(|(s, p)| s * p).collect();
    let norm: f64 = psi.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::invalid("pure state vanishes on the grid"));
    }
    for v in &mut psi {
        *v /= norm;
    }
    let mut m = weighted_kernel(&density.matrix, &density.x_weights, n);
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] -= psi[i] * psi[j];
        }
    }
    // The difference of two symmetric operators is symmetric; near purity it
    // is also nearly zero, so round-off asymmetry must be folded out before
    // the eigensolver's relative symmetry gate.
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[i * n + j] + m[j * n + i]);
            m[i * n + j] = avg;
            m[j * n + i] = avg;
        }
    }
    let eig = sym_eigen(&m, n)?;
    Ok(0.5 * eig.values.iter().map(|v| v.abs()).sum::<f64>())
}

// ---------------------------------------------------------------------------
// Frozen-oscillator reference problem
// ---------------------------------------------------------------------------

/// The point-interaction comparison problem on the line: for coupling
/// `α < 0` the operator `−½∂² + α δ` has the single negative eigenvalue
/// `−α²/2` with normalized eigenfunction `ξ(x) = √|α| e^{−|α||x|}`.
///
/// Returns the eigenvalue and the eigenfunction sampled on `grid`.
///
/// # Errors
/// Rejects `α ≥ 0` (the reference problem has no bound state there).
pub fn fixed_center_reference(alpha: f64, grid: &Grid1D) -> Result<(f64, Vec<f64>)> {
    require_finite("alpha", alpha)?;
    if alpha >= 0.0 {
        return Err(Error::invalid(format!(
            "the point-interaction reference binds only for negative couplings, got α = {alpha}"
        )));
    }
    let a = alpha.abs();
    let samples = grid
        .nodes()
        .iter()
        .map(|&x| a.sqrt() * (-a * x.abs()).exp())
        .collect();
    Ok((-0.5 * alpha * alpha, samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ln_root_fn(root: f64) -> impl FnMut(f64) -> Result<f64> {
        move |e: f64| Ok((e / root).ln())
    }

    #[test]
    fn log_bisection_finds_known_root() {
        let root = 5.0;
        let mut f = ln_root_fn(root);
        let flo = f(1.0).unwrap();
        let fhi = f(100.0).unwrap();
        let diag = bracketed_root_log(&mut f, 1.0, 100.0, flo, fhi, 1e-12, 200).unwrap();
        assert!((diag.energy / root - 1.0).abs() < 1e-11);
        assert!(diag.bracket.0 <= root && root <= diag.bracket.1);
        // One evaluation per pass, except a final pass that exits on the
        // bracket-width test alone.
        assert!(diag.iterations >= diag.evaluations);
        assert!(diag.iterations <= diag.evaluations + 1);
    }

    #[test]
    fn log_bisection_rejects_bad_brackets() {
        let mut f = ln_root_fn(5.0);
        // Non-positive or inverted interval.
        assert!(bracketed_root_log(&mut f, 0.0, 10.0, -1.0, 1.0, 1e-8, 100).is_err());
        assert!(bracketed_root_log(&mut f, 10.0, 1.0, 1.0, -1.0, 1e-8, 100).is_err());
        // Sign-indefinite endpoints.
        assert!(bracketed_root_log(&mut f, 1.0, 2.0, -1.0, -0.5, 1e-8, 100).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig {
            cases: 64,
            rng_algorithm: prop::test_runner::RngAlgorithm::ChaCha,
            ..ProptestConfig::default()
        })]

        /// The guarded false-position solver recovers roots spread over
        /// twelve decades from wide sign-definite brackets.
        #[test]
        fn log_bisection_recovers_roots_across_decades(
            exp in -6.0f64..6.0,
            stretch in 1.5f64..50.0,
            curve in 0.2f64..3.0,
        ) {
            let root = 10f64.powf(exp);
            let lo = root / stretch;
            let hi = root * stretch;
            // Monotone with adjustable curvature around the root.
            let mut f = move |e: f64| -> Result<f64> { Ok(((e / root).ln()).powi(3).mul_add(curve, (e / root).ln())) };
            let flo = f(lo).unwrap();
            let fhi = f(hi).unwrap();
            let diag = bracketed_root_log(&mut f, lo, hi, flo, fhi, 1e-10, 200).unwrap();
            prop_assert!((diag.energy / root - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn solve_budget_default_examines_standard_window() {
        let budget = SolveBudget::default();
        assert_eq!(budget.max_sector, 12);
        assert_eq!(budget.max_branches, 64);
        assert!(budget.with_samples);
    }

    #[test]
    fn point_reference_matches_closed_form() {
        let grid = grid_1d(8.0, 64).unwrap();
        let (energy, samples) = fixed_center_reference(-1.5, &grid).unwrap();
        assert!((energy + 1.125).abs() < 1e-15);
        // Unit L2 norm of sqrt(a) e^{-a|x|} up to grid truncation.
        let norm2: f64 = grid
            .nodes()
            .iter()
            .zip(grid.weights())
            .zip(&samples)
            .map(|((_, &w), &s)| w * s * s)
            .sum();
        assert!((norm2 - 1.0).abs() < 1e-10);
        assert!(fixed_center_reference(0.0, &grid).is_err());
        assert!(fixed_center_reference(1.0, &grid).is_err());
    }

    fn gaussian_product_samples() -> (ProductGrid, EigenfunctionSamples) {
        let line = grid_1d(7.0, 112).unwrap();
        let x_edges: Vec<f64> = (0..=14).map(|i| -7.0 + i as f64).collect();
        let pg = ProductGrid::new(line, &x_edges).unwrap();
        let mut values = Vec::with_capacity(pg.x().len() * pg.y().len());
        let norm = std::f64::consts::PI.sqrt().recip().sqrt();
        for &x in pg.x() {
            for &y in pg.y() {
                values.push((-0.5 * (x * x + y * y)).exp() / std::f64::consts::PI.sqrt());
            }
        }
        let _ = norm;
        let samples = EigenfunctionSamples::new(pg.clone(), values).unwrap();
        (pg, samples)
    }

    #[test]
    fn product_samples_norm_matches_analytic_value() {
        let (_, samples) = gaussian_product_samples();
        // ∫∫ e^{-(x²+y²)} / π dx dy = 1.
        assert!((samples.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_samples_reject_bad_values() {
        let line = grid_1d(4.0, 32).unwrap();
        let pg = ProductGrid::new(line, &[-4.0, 0.0, 4.0]).unwrap();
        let expected = pg.x().len() * pg.y().len();
        assert!(EigenfunctionSamples::new(pg.clone(), vec![0.0; expected + 1]).is_err());
        let mut bad = vec![0.0; expected];
        bad[3] = f64::NAN;
        assert!(EigenfunctionSamples::new(pg, bad).is_err());
    }

    #[test]
    fn reduced_density_of_product_state_is_pure() {
        let (pg, samples) = gaussian_product_samples();
        let density = reduced_density(&samples).unwrap();
        assert!((density.trace - 1.0).abs() < 1e-10);
        assert!((density.eig_high - 1.0).abs() < 1e-9);
        assert!(density.eig_low > -1e-12);

        // Trace distance vanishes against the state's own particle factor
        // and reaches 1 against an orthogonal (odd) pure state.
        let quarter = std::f64::consts::PI.powf(-0.25);
        let own: Vec<f64> = pg
            .x()
            .iter()
            .map(|&x| quarter * (-0.5 * x * x).exp())
            .collect();
        assert!(trace_distance(&density, &own).unwrap() < 1e-9);

        let mut odd: Vec<f64> = pg.x().iter().map(|&x| x * (-0.5 * x * x).exp()).collect();
        let norm2: f64 = pg
            .x_weights()
            .iter()
            .zip(&odd)
            .map(|(&w, &v)| w * v * v)
            .sum();
        for v in &mut odd {
            *v /= norm2.sqrt();
        }
        let dist = trace_distance(&density, &odd).unwrap();
        assert!((dist - 1.0).abs() < 1e-9);
    }

    #[test]
    fn resolvent_rejects_invalid_shifts() {
        let (_, samples) = gaussian_product_samples();
        assert!(apply_resolvent(-1.0, 1.0, 0.0, &samples).is_err());
        assert!(apply_resolvent(-1.0, 1.0, -2.0, &samples).is_err());
        assert!(apply_resolvent(-1.0, 0.0, 1.0, &samples).is_err());
    }

    #[test]
    fn line_counts_vanish_for_repulsive_couplings() {
        let report = count_bound_states(1, 0.7, 1.0, 0).unwrap();
        assert_eq!(report.total, 0);
        assert!(report.per_sector.iter().all(|&(_, n)| n == 0));
        assert!(report.floor_energy > 0.0);
    }

    #[test]
    fn argument_validation_covers_solvers() {
        assert!(solve_secular_1d(f64::NAN, 1.0, 0).is_err());
        assert!(solve_secular_1d(-1.0, -1.0, 0).is_err());
        assert!(solve_secular_hd(4, -1.0, 1.0, 0, 0).is_err());
        assert!(solve_secular_hd(1, -1.0, 1.0, 0, 0).is_err());
        assert!(count_bound_states(0, -1.0, 1.0, 0).is_err());
        assert!(bound_states(2, f64::INFINITY, 1.0, &SolveBudget::default()).is_err());
    }

    #[test]
    fn repulsive_line_solve_returns_no_root() {
        assert!(solve_secular_1d(0.0, 1.0, 0).unwrap().is_none());
        assert!(solve_secular_1d(2.0, 1.0, 0).unwrap().is_none());
    }
}
