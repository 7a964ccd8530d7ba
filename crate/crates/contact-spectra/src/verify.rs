//! Self-check routines producing machine-readable verification reports.
//!
//! Every check computes a quantity with the crate's numerical machinery and
//! compares it against an *independent* reference: a closed-form value, an
//! analytic bound, an exact covariance law, or a second computational route
//! that shares no code with the first.  The outcome is a
//! [`VerificationReport`] that records the inputs, the measured values, the
//! reference with its provenance, the tolerance, and the wall time.
//!
//! Reports enforce two invariants by construction:
//!
//! * the pass flag is always `deviation ≤ tolerance`, never set directly;
//! * the reference provenance is a non-empty description, so a report with
//!   an unexplained reference cannot be built.
//!
//! Checks that assert a *trend* (monotone counts, bounded ratios, partial-sum
//! stabilization) carry no single reference number; their reference records
//! the law being tested and the deviation is a scalar violation measure, zero
//! when the trend holds exactly.  Constants the underlying theory leaves
//! unspecified are never invented: such checks assert trends and report the
//! fitted constants as measurements.
//!
//! Every check is deterministic: the one check that samples random points
//! ([`cross_validate`]) uses a fixed, recorded seed.  [`run_all`] executes
//! the whole suite and never panics: a check that aborts with a numerical
//! error is converted into a failed report carrying the error text.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::kernels::{self, ModelSpec};
use crate::operators::{
    adaptive_radial_sector, assemble_gamma_fourier, assemble_gamma_sector,
    assemble_norm_moment_sector, default_fourier_sector, default_radial_sector, grid_1d,
    sym_eigen,
};
use crate::quadrature::composite_gauss_legendre;
use crate::spectra::{
    apply_resolvent, bound_states, count_bound_states, mu_spectrum, solve_secular_1d,
    solve_secular_hd, EigenfunctionSamples, ProductGrid, SolveBudget, COUNT_FLOOR_FACTOR_RADIAL,
    E_FLOOR_FACTOR_RADIAL,
};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Report types
// ---------------------------------------------------------------------------

/// Uniform envelope-distance bound of the line mode curves: the distance
/// between the `n`-th mode curve and `1/√(2(n+λ))` never exceeds this
/// constant, `(3/5)·√(2/π)`.
pub const ENVELOPE_BOUND: f64 = 0.478_731_198_986_495_3;

/// Documented discretization headroom added to [`ENVELOPE_BOUND`] by
/// [`check_mode_envelope`]: the envelope bound is an operator statement, and
/// the discretized curves may exceed it by the grid truncation error.
pub const ENVELOPE_SLACK: f64 = 5e-3;

/// Deviation stored when a check could not produce a finite comparison
/// (missing roots, aborted fits).  Finite so reports serialize to valid
/// JSON; any tolerance rejects it.
const DEVIATION_UNBOUNDED: f64 = f64::MAX;

/// Reference a computed quantity is compared against, together with its
/// provenance.
///
/// A reference is either a number with a documented origin or a documented
/// trend (monotonicity, boundedness, stabilization) with no single number
/// attached.  The provenance text is mandatory and non-empty in both cases,
/// so a report whose reference cannot be explained cannot exist.
#[derive(Debug, Clone, Serialize)]
pub struct Reference {
    value: Option<f64>,
    source: String,
}

impl Reference {
    /// Numeric reference with non-empty provenance.
    ///
    /// # Errors
    /// Rejects a non-finite value or an empty/whitespace source.
    pub fn numeric(value: f64, source: &str) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::invalid("reference value must be finite"));
        }
        Self::describe(Some(value), source)
    }

    /// Trend reference (no single number) with non-empty provenance.
    ///
    /// # Errors
    /// Rejects an empty/whitespace source.
    pub fn trend(source: &str) -> Result<Self> {
        Self::describe(None, source)
    }

    fn describe(value: Option<f64>, source: &str) -> Result<Self> {
        let trimmed = source.trim();
        if trimmed.is_empty() {
            return Err(Error::invalid(
                "a reference needs a provenance description; empty source rejected",
            ));
        }
        Ok(Reference {
            value,
            source: trimmed.to_string(),
        })
    }

    /// Reference number, when the check asserts a specific value.
    pub fn value(&self) -> Option<f64> {
        self.value
    }

    /// Provenance description (never empty).
    pub fn source(&self) -> &str {
        &self.source
    }
}

/// One labelled computed value inside a report.
#[derive(Debug, Clone, Serialize)]
pub struct Measurement {
    /// What was measured.
    pub label: String,
    /// Measured value (always finite; non-finite results are clamped and
    /// flagged in the label).
    pub value: f64,
}

fn m(label: impl Into<String>, value: f64) -> Measurement {
    let mut label = label.into();
    let value = if value.is_finite() {
        value
    } else {
        label.push_str(" [non-finite, clamped]");
        DEVIATION_UNBOUNDED
    };
    Measurement { label, value }
}

/// Outcome of one verification check.
///
/// Construction is private to the module: the pass flag always equals
/// `deviation ≤ tolerance`, and the reference always carries provenance.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    check: String,
    inputs: Vec<(String, String)>,
    measurements: Vec<Measurement>,
    reference: Reference,
    tolerance: f64,
    deviation: f64,
    pass: bool,
    seconds: f64,
}

impl VerificationReport {
    fn build(
        check: &str,
        inputs: Vec<(String, String)>,
        measurements: Vec<Measurement>,
        reference: Reference,
        tolerance: f64,
        deviation: f64,
        started: Instant,
    ) -> Result<Self> {
        if check.trim().is_empty() {
            return Err(Error::invalid("report check name must be non-empty"));
        }
        if !(tolerance.is_finite() && tolerance >= 0.0) {
            return Err(Error::invalid("report tolerance must be finite and ≥ 0"));
        }
        let deviation = if deviation.is_nan() {
            DEVIATION_UNBOUNDED
        } else {
            deviation.min(DEVIATION_UNBOUNDED)
        };
        let pass = deviation <= tolerance;
        Ok(VerificationReport {
            check: check.to_string(),
            inputs,
            measurements,
            reference,
            tolerance,
            deviation,
            pass,
            seconds: started.elapsed().as_secs_f64(),
        })
    }

    /// Check name.
    pub fn check(&self) -> &str {
        &self.check
    }

    /// Labelled inputs the check ran with (parameter sets, grids, seeds).
    pub fn inputs(&self) -> &[(String, String)] {
        &self.inputs
    }

    /// Computed values.
    pub fn measurements(&self) -> &[Measurement] {
        &self.measurements
    }

    /// Reference compared against, with provenance.
    pub fn reference(&self) -> &Reference {
        &self.reference
    }

    /// Acceptance threshold on the deviation.
    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Scalar deviation measure; each check documents its metric.
    pub fn deviation(&self) -> f64 {
        self.deviation
    }

    /// Whether the check passed; always `deviation ≤ tolerance`.
    pub fn pass(&self) -> bool {
        self.pass
    }

    /// Wall time of the check in seconds.
    pub fn seconds(&self) -> f64 {
        self.seconds
    }

    /// One-line human-readable summary.
    pub fn summary_line(&self) -> String {
        format!(
            "{}  {:<24} deviation {:.3e}  tolerance {:.3e}  ({:.1}s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.check,
            self.deviation,
            self.tolerance,
            self.seconds
        )
    }
}

/// Failed report wrapping an error raised before a comparison was possible.
fn abort_report(check: &str, err: &Error) -> VerificationReport {
    let started = Instant::now();
    let reference = Reference::trend(
        "check aborted by a numerical error before producing a comparison; \
         the error text is recorded in the inputs",
    )
    .expect("static provenance text is non-empty");
    VerificationReport::build(
        check,
        vec![("error".into(), err.to_string())],
        Vec::new(),
        reference,
        0.0,
        DEVIATION_UNBOUNDED,
        started,
    )
    .expect("abort report parameters are statically valid")
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

struct LineFit {
    slope: f64,
    intercept: f64,
    r_squared: f64,
    span: f64,
}

/// Least-squares line through `(xs, ys)` with fit-quality diagnostics.
fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::invalid(
            "line fit needs at least two points with matching abscissae",
        ));
    }
    if !(xs.iter().all(|x| x.is_finite()) && ys.iter().all(|y| y.is_finite())) {
        return Err(Error::NonFinite("line-fit input".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let span = xs.iter().fold(f64::MIN, |a, &x| a.max(x))
        - xs.iter().fold(f64::MAX, |a, &x| a.min(x));
    if !(sxx > 0.0) {
        return Err(Error::invalid("degenerate line fit: zero abscissa spread"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
        span,
    })
}

fn fmt_set(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v}")).collect();
    format!("[{}]", parts.join(", "))
}

fn require_each_finite(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::invalid(format!("{name} must be non-empty")));
    }
    if !values.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite(name.into()));
    }
    Ok(())
}

/// Ground-state depth in dimension 2 or 3 at coupling `α`, `ω = 1`, or
/// `None` when the deepest branch stays rootless above the solver floor.
fn radial_ground(d: u32, alpha: f64) -> Result<Option<f64>> {
    Ok(solve_secular_hd(d, alpha, 1.0, 0, 0)?.map(|root| root.energy))
}

// ---------------------------------------------------------------------------
// Mode-envelope check (line model)
// ---------------------------------------------------------------------------

/// Checks the uniform envelope bound of the line mode curves: every computed
/// `μ_n(λ)` at `ω = 1` stays within [`ENVELOPE_BOUND`] of the envelope
/// `1/√(2(n+λ))`, with [`ENVELOPE_SLACK`] of documented discretization
/// headroom.
///
/// The curves are computed on the standard grid (half-width 10, 304 nodes)
/// and re-computed on a refined guard grid (half-width 12, 448 nodes).  If
/// the two grids disagree by more than half the slack the check aborts with
/// [`Error::NoConvergence`] — a discretization failure, deliberately
/// distinguished from a bound violation, which would show up as a failed
/// report instead.
///
/// Deviation metric: the largest `|μ_n(λ) − 1/√(2(n+λ))|` over the requested
/// shifts and mode indices `n ≤ n_max`, from the standard grid.
///
/// # Errors
/// Rejects an empty or non-positive shift set and `n_max > 64` (modes above
/// that are not resolved by the standard grid); propagates assembly errors;
/// fails with [`Error::NoConvergence`] when the two grids disagree.
pub fn check_mode_envelope(lambdas: &[f64], n_max: usize) -> Result<VerificationReport> {
    let started = Instant::now();
    require_each_finite("lambdas", lambdas)?;
    if lambdas.iter().any(|&l| l <= 0.0) {
        return Err(Error::invalid("every shift must be positive"));
    }
    if n_max > 64 {
        return Err(Error::invalid(
            "n_max above 64 exceeds the resolution of the standard envelope grid",
        ));
    }
    let omega = 1.0;
    let standard = grid_1d(10.0, 300)?;
    let guard = grid_1d(12.0, 448)?;

    let mut measurements = Vec::new();
    let mut worst = 0.0f64;
    let mut grid_gap = 0.0f64;
    for &lambda in lambdas {
        let mu_s = mu_spectrum(omega, lambda, n_max + 1, &standard)?;
        let mu_g = mu_spectrum(omega, lambda, n_max + 1, &guard)?;
        let mut dev_l = 0.0f64;
        for (n, (&ms, &mg)) in mu_s.iter().zip(&mu_g).enumerate() {
            grid_gap = grid_gap.max((ms - mg).abs());
            let envelope = 1.0 / (2.0 * (n as f64 + lambda)).sqrt();
            dev_l = dev_l.max((ms - envelope).abs());
        }
        worst = worst.max(dev_l);
        measurements.push(m(
            format!("max |mu_n - envelope| at shift {lambda}"),
            dev_l,
        ));
    }
    if grid_gap > 0.5 * ENVELOPE_SLACK {
        return Err(Error::NoConvergence(format!(
            "mode curves are not grid-converged: standard and guard grids disagree by \
             {grid_gap:.3e}, more than half the documented slack {ENVELOPE_SLACK:.1e}; \
             this is a discretization failure, not a bound violation"
        )));
    }
    measurements.push(m("inter-grid convergence gap", grid_gap));

    let reference = Reference::numeric(
        ENVELOPE_BOUND,
        "uniform analytic bound (3/5)·sqrt(2/pi) on the distance between every line mode \
         curve and its envelope 1/sqrt(2(n+lambda)); the tolerance adds the documented \
         discretization slack",
    )?;
    VerificationReport::build(
        "mode_envelope",
        vec![
            ("lambdas".into(), fmt_set(lambdas)),
            ("n_max".into(), n_max.to_string()),
            ("omega".into(), "1".into()),
            (
                "grids".into(),
                format!(
                    "standard half-width 10 with {} nodes, guard half-width 12 with {} nodes",
                    standard.len(),
                    guard.len()
                ),
            ),
        ],
        measurements,
        reference,
        ENVELOPE_BOUND + ENVELOPE_SLACK,
        worst,
        started,
    )
}

// ---------------------------------------------------------------------------
// Scaling covariance
// ---------------------------------------------------------------------------

/// Checks the exact covariance of the spectrum under frequency rescaling.
///
/// For every requested `(α, ω)` the spectrum is solved directly and compared
/// against the rescaled reference spectrum at `ω = 1`:
/// `E_n(α, ω) = ω·E_n(α/√ω, 1)` on the line and in space, and
/// `E_n(α, ω) = ω·E_n(α, 1)` in the plane, where the coupling does not
/// rescale.
///
/// Deviation metric: the largest relative mismatch
/// `|E_n(α,ω) / (ω·E_n(α', 1)) − 1|` over all compared levels.  On the line
/// all found branches are compared; in dimensions 2 and 3 the ground level
/// is compared (deeper sectors scale identically, and the ground level is
/// the expensive, quadrature-sensitive one).  A level-count mismatch between
/// the two routes is itself a failure (unbounded deviation).
///
/// # Errors
/// Rejects invalid dimensions and empty/non-finite parameter sets;
/// propagates solver failures.
pub fn check_scaling(d: u32, alphas: &[f64], omegas: &[f64]) -> Result<VerificationReport> {
    let started = Instant::now();
    if !(1..=3).contains(&d) {
        return Err(Error::invalid("dimension must be 1, 2, or 3"));
    }
    require_each_finite("alphas", alphas)?;
    require_each_finite("omegas", omegas)?;
    if omegas.iter().any(|&w| w <= 0.0) {
        return Err(Error::invalid("every frequency must be positive"));
    }
    let budget = if d == 1 {
        SolveBudget {
            max_sector: 0,
            max_branches: 64,
            with_samples: false,
        }
    } else {
        SolveBudget {
            max_sector: 0,
            max_branches: 1,
            with_samples: false,
        }
    };

    let mut measurements = Vec::new();
    let mut worst = 0.0f64;
    for &alpha in alphas {
        for &omega in omegas {
            let direct = bound_states(d, alpha, omega, &budget)?;
            let alpha_ref = if d == 2 { alpha } else { alpha / omega.sqrt() };
            let reference_spectrum = bound_states(d, alpha_ref, 1.0, &budget)?;
            let n_direct = direct.states.len();
            let n_ref = reference_spectrum.states.len();
            if n_direct != n_ref || n_direct == 0 {
                measurements.push(m(
                    format!(
                        "level-count mismatch at alpha={alpha}, omega={omega}: \
                         {n_direct} direct vs {n_ref} rescaled"
                    ),
                    DEVIATION_UNBOUNDED,
                ));
                worst = DEVIATION_UNBOUNDED;
                continue;
            }
            let mut dev = 0.0f64;
            for (a, b) in direct.states.iter().zip(&reference_spectrum.states) {
                dev = dev.max((a.energy / (omega * b.energy) - 1.0).abs());
            }
            worst = worst.max(dev);
            measurements.push(m(
                format!(
                    "max relative covariance defect at alpha={alpha}, omega={omega} \
                     ({n_direct} levels)"
                ),
                dev,
            ));
        }
    }

    let reference = Reference::numeric(
        1.0,
        "exact covariance of the model under simultaneous frequency and coupling \
         rescaling: the energy ratio between the direct and the rescaled spectrum is 1",
    )?;
    VerificationReport::build(
        "scaling_covariance",
        vec![
            ("dimension".into(), d.to_string()),
            ("alphas".into(), fmt_set(alphas)),
            ("omegas".into(), fmt_set(omegas)),
            (
                "coupling map".into(),
                if d == 2 {
                    "alpha' = alpha (planar coupling does not rescale)".into()
                } else {
                    "alpha' = alpha / sqrt(omega)".into()
                },
            ),
        ],
        measurements,
        reference,
        if d == 1 { 1e-4 } else { 1e-3 },
        worst,
        started,
    )
}

// ---------------------------------------------------------------------------
// Asymptotic regimes
// ---------------------------------------------------------------------------

/// Asymptotic law probed by [`check_asymptotics`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsymptoticRegime {
    /// Line, weak coupling: the shallow level approaches `α²/2`.
    LineSmallCoupling,
    /// Line, stiff oscillator: the scaled gap `|E₀ − 1/2|·ω` stays bounded
    /// as `ω` grows.
    LineStiffOscillator,
    /// Plane, strongly attractive coupling: log-depth linear in `|α|`.
    PlaneStrongBinding,
    /// Plane, strongly repulsive coupling: stated inverse-first-power depth
    /// law (log–log slope −1).
    PlaneWeakBinding,
    /// Space, strongly attractive coupling: depth quadratic in `|α|`.
    SpaceStrongBinding,
    /// Space, strongly repulsive coupling: stated inverse-first-power depth
    /// law (log–log slope −1).
    SpaceWeakBinding,
}

impl AsymptoticRegime {
    fn check_name(self) -> &'static str {
        match self {
            AsymptoticRegime::LineSmallCoupling => "asymptotics_line_small_coupling",
            AsymptoticRegime::LineStiffOscillator => "asymptotics_line_stiff_oscillator",
            AsymptoticRegime::PlaneStrongBinding => "asymptotics_plane_strong_binding",
            AsymptoticRegime::PlaneWeakBinding => "asymptotics_plane_weak_binding",
            AsymptoticRegime::SpaceStrongBinding => "asymptotics_space_strong_binding",
            AsymptoticRegime::SpaceWeakBinding => "asymptotics_space_weak_binding",
        }
    }
}

/// Measures one asymptotic law of the ground level and compares the fitted
/// behaviour against the stated target.
///
/// Each regime declares its coupling/frequency window in the report inputs;
/// slope fits report the fit conditioning (abscissa span and R²) among the
/// measurements.  Windows sit where the law is expected to hold *and* the
/// levels are resolvable above the solver floor; a regime whose levels
/// cannot be found reports an unbounded deviation rather than inventing
/// data.
///
/// Deviation metrics by regime:
///
/// * [`AsymptoticRegime::LineSmallCoupling`] — `|2E₀/α² − 1|` at `α = −0.05`
///   against 0, tolerance 0.05.
/// * [`AsymptoticRegime::LineStiffOscillator`] — growth slope of
///   `ln(|E₀ − 1/2|·ω)` vs `ln ω` over `ω ∈ {10, 20, 40, 80}`, clamped at 0
///   from below; tolerance 0.1 (bounded sequence ⇒ no positive trend).
/// * [`AsymptoticRegime::PlaneStrongBinding`] — `1 − R²` of the linear fit
///   `ln E₀` vs `|α|` over `α ∈ {−1, −2, −3, −4}`, tolerance 0.05.
/// * [`AsymptoticRegime::PlaneWeakBinding`] — `|slope + 1|` of `ln E₀` vs
///   `ln α` over `α ∈ {0.5, 1, 2, 4}` (the resolvable window above the
///   solver floor), tolerance 0.2.
/// * [`AsymptoticRegime::SpaceStrongBinding`] — `|slope − 2|` of `ln E₀` vs
///   `ln |α|` over `α ∈ {−4, −8, −16}`, tolerance 0.15.
/// * [`AsymptoticRegime::SpaceWeakBinding`] — `|slope + 1|` of `ln E₀` vs
///   `ln α` over `α ∈ {4, 8, 16, 32}`, tolerance 0.15.
///
/// # Errors
/// Propagates solver failures.  Missing levels are reported, not errors.
pub fn check_asymptotics(regime: AsymptoticRegime) -> Result<VerificationReport> {
    let started = Instant::now();
    match regime {
        AsymptoticRegime::LineSmallCoupling => {
            let alpha = -0.05f64;
            let root = solve_secular_1d(alpha, 1.0, 0)?;
            let reference = Reference::numeric(
                1.0,
                "leading-order shallow-level law on the line: the depth approaches half \
                 the squared coupling, so 2E0/alpha^2 tends to 1",
            )?;
            let inputs = vec![
                ("alpha".into(), alpha.to_string()),
                ("omega".into(), "1".into()),
            ];
            let (measurements, deviation) = match root {
                Some(r) => {
                    let ratio = 2.0 * r.energy / (alpha * alpha);
                    (
                        vec![
                            m("ground depth E0", r.energy),
                            m("2*E0/alpha^2", ratio),
                        ],
                        (ratio - 1.0).abs(),
                    )
                }
                None => (
                    vec![m("ground level not found above the floor", 0.0)],
                    DEVIATION_UNBOUNDED,
                ),
            };
            VerificationReport::build(
                regime.check_name(),
                inputs,
                measurements,
                reference,
                0.05,
                deviation,
                started,
            )
        }
        AsymptoticRegime::LineStiffOscillator => {
            let alpha = -1.0f64;
            let omegas = [10.0f64, 20.0, 40.0, 80.0];
            let mut scaled = Vec::new();
            let mut measurements = Vec::new();
            for &omega in &omegas {
                let root = solve_secular_1d(alpha, omega, 0)?.ok_or_else(|| {
                    Error::NoConvergence(format!(
                        "line ground level vanished at omega = {omega}"
                    ))
                })?;
                let gap = (root.energy - 0.5).abs() * omega;
                measurements.push(m(
                    format!("|E0 - 1/2|*omega at omega={omega}"),
                    gap,
                ));
                scaled.push(gap);
            }
            let xs: Vec<f64> = omegas.iter().map(|w| w.ln()).collect();
            let ys: Vec<f64> = scaled.iter().map(|v| v.ln()).collect();
            let fit = fit_line(&xs, &ys)?;
            measurements.push(m("log-log growth slope", fit.slope));
            measurements.push(m("fit R^2", fit.r_squared));
            measurements.push(m("fit abscissa span", fit.span));
            let reference = Reference::numeric(
                0.0,
                "stiff-oscillator expansion of the line ground level: the scaled gap \
                 |E0 - 1/2|*omega must stay bounded, i.e. show no positive growth trend",
            )?;
            VerificationReport::build(
                regime.check_name(),
                vec![
                    ("alpha".into(), alpha.to_string()),
                    ("omegas".into(), fmt_set(&omegas)),
                    (
                        "trend metric".into(),
                        "log-log slope of the scaled gap, clamped below at 0".into(),
                    ),
                ],
                measurements,
                reference,
                0.1,
                fit.slope.max(0.0),
                started,
            )
        }
        AsymptoticRegime::PlaneStrongBinding => {
            let alphas = [-1.0f64, -2.0, -3.0, -4.0];
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            let mut measurements = Vec::new();
            for &alpha in &alphas {
                match radial_ground(2, alpha)? {
                    Some(e) => {
                        measurements.push(m(format!("ln E0 at alpha={alpha}"), e.ln()));
                        xs.push(-alpha);
                        ys.push(e.ln());
                    }
                    None => measurements.push(m(
                        format!("no level found at alpha={alpha}"),
                        DEVIATION_UNBOUNDED,
                    )),
                }
            }
            let reference = Reference::trend(
                "strong-binding law in the plane: the depth grows exponentially with the \
                 coupling strength, so ln E0 is linear in |alpha|; the slope and intercept \
                 are reported, only linearity (R^2) is asserted",
            )?;
            let (deviation, mut fit_meas) = if xs.len() >= 2 {
                let fit = fit_line(&xs, &ys)?;
                (
                    (1.0 - fit.r_squared).max(0.0),
                    vec![
                        m("fitted slope d(ln E0)/d|alpha|", fit.slope),
                        m("fitted intercept", fit.intercept),
                        m("fit R^2", fit.r_squared),
                        m("fit abscissa span", fit.span),
                    ],
                )
            } else {
                (DEVIATION_UNBOUNDED, Vec::new())
            };
            measurements.append(&mut fit_meas);
            VerificationReport::build(
                regime.check_name(),
                vec![
                    ("alphas".into(), fmt_set(&alphas)),
                    ("omega".into(), "1".into()),
                    ("deviation metric".into(), "1 - R^2 of the linear fit".into()),
                ],
                measurements,
                reference,
                0.05,
                deviation,
                started,
            )
        }
        AsymptoticRegime::PlaneWeakBinding => slope_regime(
            regime,
            2,
            &[0.5, 1.0, 2.0, 4.0],
            -1.0,
            0.2,
            "stated weak-binding law in the plane: depth inversely proportional to the \
             coupling, i.e. log-log slope -1; the window sits inside the numerically \
             resolvable depths above the solver floor",
            started,
        ),
        AsymptoticRegime::SpaceStrongBinding => slope_regime(
            regime,
            3,
            &[-4.0, -8.0, -16.0],
            2.0,
            0.15,
            "strong-binding law in space: the depth grows like the square of the \
             coupling, i.e. log-log slope 2",
            started,
        ),
        AsymptoticRegime::SpaceWeakBinding => slope_regime(
            regime,
            3,
            &[4.0, 8.0, 16.0, 32.0],
            -1.0,
            0.15,
            "stated weak-binding law in space: depth inversely proportional to the \
             coupling, i.e. log-log slope -1",
            started,
        ),
    }
}

/// Shared log–log slope fit for the power-law regimes.
#[allow(clippy::too_many_arguments)]
fn slope_regime(
    regime: AsymptoticRegime,
    d: u32,
    alphas: &[f64],
    target_slope: f64,
    tolerance: f64,
    provenance: &str,
    started: Instant,
) -> Result<VerificationReport> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut measurements = Vec::new();
    for &alpha in alphas {
        match radial_ground(d, alpha)? {
            Some(e) => {
                measurements.push(m(format!("ln E0 at alpha={alpha}"), e.ln()));
                xs.push(alpha.abs().ln());
                ys.push(e.ln());
            }
            None => measurements.push(m(
                format!("no level found above the solver floor at alpha={alpha}"),
                DEVIATION_UNBOUNDED,
            )),
        }
    }
    let reference = Reference::numeric(target_slope, provenance)?;
    let deviation = if xs.len() >= 2 {
        let fit = fit_line(&xs, &ys)?;
        measurements.push(m("fitted log-log slope", fit.slope));
        measurements.push(m("fit R^2", fit.r_squared));
        measurements.push(m("fit abscissa span", fit.span));
        (fit.slope - target_slope).abs()
    } else {
        measurements.push(m(
            "fewer than two resolvable depths: slope fit impossible",
            DEVIATION_UNBOUNDED,
        ));
        DEVIATION_UNBOUNDED
    };
    VerificationReport::build(
        regime.check_name(),
        vec![
            ("dimension".into(), d.to_string()),
            ("alphas".into(), fmt_set(alphas)),
            ("omega".into(), "1".into()),
            (
                "solver floor".into(),
                format!("{E_FLOOR_FACTOR_RADIAL:e} * omega"),
            ),
        ],
        measurements,
        reference,
        tolerance,
        deviation,
        started,
    )
}

// ---------------------------------------------------------------------------
// Existence and counts
// ---------------------------------------------------------------------------

/// Checks the claimed existence of at least one bound level at every
/// requested coupling in dimensions 2 and 3, with the line as a contrast:
/// at `α = +1` the line model must have no bound state.
///
/// Counts are taken at the counting floor
/// ([`COUNT_FLOOR_FACTOR_RADIAL`]`·ω`), sectors 0–2; the ground level always
/// lives in sector 0, so the sector budget does not affect the N ≥ 1
/// questions.
///
/// Deviation metric: the number of cases violating their expectation (zero
/// when all hold).
///
/// # Errors
/// Rejects empty/non-finite couplings and non-positive `ω`; propagates
/// assembly failures.
pub fn check_existence_2d3d(alphas: &[f64], omega: f64) -> Result<VerificationReport> {
    let started = Instant::now();
    require_each_finite("alphas", alphas)?;
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::invalid("omega must be positive"));
    }
    let mut measurements = Vec::new();
    let mut violations = 0usize;
    for d in [2u32, 3] {
        for &alpha in alphas {
            let count = count_bound_states(d, alpha, omega, 2)?;
            if count.total == 0 {
                violations += 1;
            }
            measurements.push(m(
                format!("count d={d} alpha={alpha} (expected >= 1)"),
                count.total as f64,
            ));
        }
    }
    let contrast = count_bound_states(1, 1.0, omega, 0)?;
    if contrast.total != 0 {
        violations += 1;
    }
    measurements.push(m(
        "count d=1 alpha=1 (contrast, expected 0)",
        contrast.total as f64,
    ));

    let reference = Reference::trend(
        "claimed existence of at least one bound level at every coupling in dimensions \
         two and three; on the line a repulsive coupling binds nothing",
    )?;
    VerificationReport::build(
        "existence_2d3d",
        vec![
            ("alphas".into(), fmt_set(alphas)),
            ("omega".into(), omega.to_string()),
            (
                "counting floor".into(),
                format!("{COUNT_FLOOR_FACTOR_RADIAL:e} * omega (dimensions 2 and 3)"),
            ),
            ("sector budget".into(), "0..=2".into()),
        ],
        measurements,
        reference,
        0.0,
        violations as f64,
        started,
    )
}

/// Checks that bound-state counts grow monotonically as the coupling
/// deepens, and reports (without asserting) the fitted growth law.
///
/// `alphas` must be strictly decreasing (deepest coupling last).  The counts
/// use a fixed floor and sector budget across the sequence, so monotonicity
/// of the discretized counts is exactly the operator-monotonicity statement
/// at the floor.  Growth-law fits — `ln N` vs `|α|` in the plane, `ln N` vs
/// `ln |α|` in space and on the line — are reported as measurements only:
/// their constants are not pinned by the theory.
///
/// Deviation metric: the largest count *drop* along the sequence (zero when
/// monotone).
///
/// # Errors
/// Rejects sequences that are not strictly decreasing or have fewer than
/// two entries; propagates assembly failures.
pub fn check_count_trends(d: u32, alphas: &[f64]) -> Result<VerificationReport> {
    let started = Instant::now();
    if !(1..=3).contains(&d) {
        return Err(Error::invalid("dimension must be 1, 2, or 3"));
    }
    require_each_finite("alphas", alphas)?;
    if alphas.len() < 2 {
        return Err(Error::invalid("need at least two couplings for a trend"));
    }
    if !alphas.windows(2).all(|w| w[0] > w[1]) {
        return Err(Error::invalid(
            "pass the couplings strictly decreasing (deepest last)",
        ));
    }
    let max_sector = if d == 1 { 0 } else { 4 };
    let mut counts = Vec::new();
    let mut measurements = Vec::new();
    for &alpha in alphas {
        let report = count_bound_states(d, alpha, 1.0, max_sector)?;
        measurements.push(m(format!("count at alpha={alpha}"), report.total as f64));
        counts.push(report.total);
    }
    let mut worst_drop = 0i64;
    for w in counts.windows(2) {
        worst_drop = worst_drop.max(w[0] as i64 - w[1] as i64);
    }

    // Reported (not asserted) growth fits over the entries with N ≥ 1.
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&alpha, &n) in alphas.iter().zip(&counts) {
        if n >= 1 {
            xs.push(if d == 2 { alpha.abs() } else { alpha.abs().ln() });
            ys.push((n as f64).ln());
        }
    }
    if xs.len() >= 2 && xs.windows(2).all(|w| w[1] > w[0]) {
        if let Ok(fit) = fit_line(&xs, &ys) {
            measurements.push(m(
                if d == 2 {
                    "reported growth fit: d(ln N)/d|alpha|"
                } else {
                    "reported growth fit: d(ln N)/d(ln |alpha|)"
                },
                fit.slope,
            ));
            measurements.push(m("growth fit R^2", fit.r_squared));
        }
    }

    let reference = Reference::trend(
        "bound-state counts at a fixed floor and sector budget cannot decrease as the \
         coupling deepens; growth-rate constants are unspecified, so fits are reported \
         without assertion",
    )?;
    VerificationReport::build(
        "count_trends",
        vec![
            ("dimension".into(), d.to_string()),
            ("alphas".into(), fmt_set(alphas)),
            ("omega".into(), "1".into()),
            ("sector budget".into(), format!("0..={max_sector}")),
        ],
        measurements,
        reference,
        0.0,
        worst_drop as f64,
        started,
    )
}

// ---------------------------------------------------------------------------
// Schatten-class trends
// ---------------------------------------------------------------------------

/// Checks the compactness estimates behind the charge-operator
/// constructions: the factor-kernel trace and norm must scale like the
/// first power of the heat-parameter defect `1 − ν` with bounded constants,
/// and the singular values of the discretized charge embedding must decay
/// fast enough that their fifth-power sum stabilizes (the embedding lies in
/// every Schatten class above the fourth).
///
/// Three sub-checks, each normalized by its own threshold; the report
/// deviation is the worst normalized value (pass when every sub-check is
/// within its threshold, i.e. deviation ≤ 1):
///
/// 1. **Diagonal identity** (any `d`): the discretized trace of the line
///    factor kernel against the closed form `√(π(1+ν)/(1−ν))`, threshold
///    `1e-9` relative.
/// 2. **Norm trend** (`d = 2`): the closed-form top eigenvalue of the
///    planar factor kernel — a product of two Gaussian-kernel factors whose
///    spectra are known exactly — must satisfy `‖t_ν‖/(1−ν) ≤ 3.3` (the
///    ratio approaches π as ν → 1); for `ν ≤ 0.95` the closed form is
///    cross-checked against a direct discretized eigensolve, threshold
///    `1e-6` relative.
/// 3. **Power-sum stabilization** (`d = 2`): multiplicity-weighted singular
///    values of the charge embedding at shift 2, sectors 0–12; the sum
///    `Σ σ^5` over the largest three quarters must already contain all but
///    `1e-3` of the total.
///
/// # Errors
/// Rejects `ν` outside `(0, 1)` and dimensions other than 1 and 2
/// (the interpolation exponents are stated for the planar embedding);
/// propagates assembly failures.
pub fn check_schatten(nus: &[f64], d: u32) -> Result<VerificationReport> {
    let started = Instant::now();
    require_each_finite("nus", nus)?;
    if nus.iter().any(|&v| !(0.0 < v && v < 1.0)) {
        return Err(Error::invalid("every nu must lie strictly inside (0, 1)"));
    }
    if d != 1 && d != 2 {
        return Err(Error::Unsupported(
            "Schatten trends are implemented for d = 1 (diagonal identity) and d = 2 \
             (full planar trends)"
                .into(),
        ));
    }
    let mut measurements = Vec::new();
    let mut worst_normalized = 0.0f64;

    // 1. Diagonal closed form.
    let trace_threshold = 1e-9;
    for &nu in nus {
        let a_diag = (1.0 - nu) / (1.0 + nu);
        let closed = (std::f64::consts::PI * (1.0 + nu) / (1.0 - nu)).sqrt();
        let half_width = 7.0 / a_diag.sqrt();
        let edges: Vec<f64> = (0..=24)
            .map(|i| -half_width + 2.0 * half_width * i as f64 / 24.0)
            .collect();
        let rule = composite_gauss_legendre(&edges, 16)?;
        let numeric: f64 = rule
            .nodes()
            .iter()
            .zip(rule.weights())
            .map(|(&x, &w)| w * (-a_diag * x * x).exp())
            .sum();
        let rel = (numeric / closed - 1.0).abs();
        measurements.push(m(
            format!("diagonal trace relative defect at nu={nu}"),
            rel,
        ));
        worst_normalized = worst_normalized.max(rel / trace_threshold);
    }

    if d == 2 {
        // 2. Norm trend via the exact Gaussian-kernel spectrum.
        let ratio_cap = 3.3;
        let agreement_threshold = 1e-6;
        for &nu in nus {
            let a = 0.5 * (1.0 - nu) / (1.0 + nu);
            let b = 0.5 / (1.0 / nu).ln() + nu / (1.0 - nu * nu);
            let top_factor =
                (std::f64::consts::PI / (a + b + (a * (a + 2.0 * b)).sqrt())).sqrt();
            let planar_norm = top_factor * top_factor;
            let ratio = planar_norm / (1.0 - nu);
            measurements.push(m(format!("planar norm / (1-nu) at nu={nu}"), ratio));
            worst_normalized = worst_normalized.max(ratio / ratio_cap);

            if nu <= 0.95 {
                let x_max = (20.0 / a).sqrt();
                let panels = ((2.0 * x_max * (b.sqrt() / 4.0).max(0.5)).ceil() as usize)
                    .clamp(24, 60);
                let edges: Vec<f64> = (0..=panels)
                    .map(|i| -x_max + 2.0 * x_max * i as f64 / panels as f64)
                    .collect();
                let rule = composite_gauss_legendre(&edges, 16)?;
                let n = rule.nodes().len();
                let mut matrix = vec![0.0f64; n * n];
                for i in 0..n {
                    let xi = rule.nodes()[i];
                    let wi = rule.weights()[i];
                    for j in 0..=i {
                        let xj = rule.nodes()[j];
                        let wj = rule.weights()[j];
                        let kernel =
                            (-a * (xi * xi + xj * xj) - b * (xi - xj) * (xi - xj)).exp();
                        let v = wi.sqrt() * kernel * wj.sqrt();
                        matrix[i * n + j] = v;
                        matrix[j * n + i] = v;
                    }
                }
                let eig = sym_eigen(&matrix, n)?;
                let top_numeric = eig.values[n - 1];
                let rel = (top_numeric / top_factor - 1.0).abs();
                measurements.push(m(
                    format!("factor-norm route agreement at nu={nu}"),
                    rel,
                ));
                worst_normalized = worst_normalized.max(rel / agreement_threshold);
            }
        }

        // 3. Singular-value power-sum stabilization.
        let stabilization_threshold = 1e-3;
        let spec = ModelSpec::new(2, 1.0, 0.0, 2.0)?;
        let mut singular: Vec<f64> = Vec::new();
        for sector in 0..=12u32 {
            let grid = default_radial_sector(&spec, sector)?;
            let op = assemble_norm_moment_sector(&spec, &grid)?;
            let eig = sym_eigen(op.matrix(), op.n())?;
            let weight = grid.degeneracy() as usize;
            for &v in &eig.values {
                let sv = v.max(0.0).sqrt();
                for _ in 0..weight {
                    singular.push(sv);
                }
            }
        }
        singular.sort_by(|x, y| y.total_cmp(x));
        let powers: Vec<f64> = singular.iter().map(|s| s.powi(5)).collect();
        let total: f64 = powers.iter().sum();
        let head: f64 = powers[..(3 * powers.len()).div_euclid(4)].iter().sum();
        let tail_fraction = if total > 0.0 {
            ((total - head) / total).max(0.0)
        } else {
            1.0
        };
        measurements.push(m("largest singular value", singular[0]));
        measurements.push(m("sum of fifth powers", total));
        measurements.push(m(
            "fifth-power tail fraction beyond three quarters of the values",
            tail_fraction,
        ));
        worst_normalized = worst_normalized.max(tail_fraction / stabilization_threshold);
    }

    let reference = Reference::trend(
        "compactness estimates for the charge constructions: factor-kernel trace given \
         by a closed Gaussian integral, factor-kernel norm bounded by a constant times \
         (1-nu) with the constant approaching pi, and charge-embedding singular values \
         summable in the fifth power; unspecified constants enter only through the \
         documented caps",
    )?;
    VerificationReport::build(
        "schatten_trends",
        vec![
            ("nus".into(), fmt_set(nus)),
            ("dimension".into(), d.to_string()),
            (
                "sub-check thresholds".into(),
                "diagonal 1e-9 rel; norm ratio cap 3.3; route agreement 1e-6 rel; \
                 power-sum tail 1e-3"
                    .into(),
            ),
            ("embedding shift".into(), "lambda = 2, sectors 0..=12".into()),
        ],
        measurements,
        reference,
        1.0,
        worst_normalized,
        started,
    )
}

// ---------------------------------------------------------------------------
// Dual-route cross-validation
// ---------------------------------------------------------------------------

/// Validates the crate against itself through three independent-route
/// comparisons, each normalized by its own tolerance (the report passes when
/// every route agrees, i.e. deviation ≤ 1):
///
/// 1. **Line Green kernel, quadrature vs series** — 100 seeded random point
///    pairs, relative agreement `1e-8`.  The series route sums oscillator
///    modes; the quadrature route integrates the heat-kernel
///    representation.  Points keep a minimum separation along the free
///    axis so the truncated series is converged far below the tolerance.
/// 2. **Planar sector operator, position vs momentum** — lowest eigenvalue
///    of the sector-0 block assembled in position space against the
///    momentum-space assembly, relative agreement `1e-3`.
/// 3. **Resolvent identity** — `R(λ) − R(λ′) = (λ′ − λ)·R(λ)R(λ′)` applied
///    to a smooth pair function on a product grid, relative residual
///    `1e-5`.
///
/// The sampling seed is fixed and recorded in the report inputs.
///
/// # Errors
/// Propagates kernel/assembly/resolvent failures.
pub fn cross_validate() -> Result<VerificationReport> {
    let started = Instant::now();
    let mut measurements = Vec::new();
    let mut worst_normalized = 0.0f64;

    // 1. Line Green kernel through two routes.
    let seed = 42u64;
    let green_tol = 1e-8;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec1 = ModelSpec::new(1, 1.0, 0.0, 0.9)?;
    let mut worst_green = 0.0f64;
    for _ in 0..100 {
        let y = rng.gen_range(-2.0..2.0);
        let yp = rng.gen_range(-2.0..2.0);
        let x: f64 = rng.gen_range(-3.0..3.0);
        let sep = rng.gen_range(1.0..3.0);
        let xp = if rng.gen::<bool>() { x + sep } else { x - sep };
        let quad = kernels::green(&spec1, &[x], &[y], &[xp], &[yp])?;
        let series = kernels::green_series_1d(1.0, 0.9, 200, x, y, xp, yp)?;
        let denom = quad.abs().max(f64::MIN_POSITIVE);
        worst_green = worst_green.max((quad - series).abs() / denom);
    }
    measurements.push(m(
        "line Green kernel: worst relative route disagreement (100 points)",
        worst_green,
    ));
    worst_normalized = worst_normalized.max(worst_green / green_tol);

    // 2. Planar sector-0 block in position vs momentum space.
    let sector_tol = 1e-3;
    let spec2 = ModelSpec::new(2, 1.0, 0.0, 1.0)?;
    let position_grid = adaptive_radial_sector(2, 0, 1.0, 1.0, 64)?;
    let position = assemble_gamma_sector(&spec2, &position_grid)?;
    let pos_eig = sym_eigen(position.matrix(), position.n())?;
    let momentum_grid = default_fourier_sector(&spec2)?;
    let momentum = assemble_gamma_fourier(&spec2, &momentum_grid)?;
    let mom_eig = sym_eigen(momentum.matrix(), momentum.n())?;
    let gamma_pos = pos_eig.values[0];
    let gamma_mom = mom_eig.values[0];
    let sector_dev = (gamma_pos - gamma_mom).abs() / gamma_pos.abs().max(f64::MIN_POSITIVE);
    measurements.push(m("planar sector-0 bottom, position route", gamma_pos));
    measurements.push(m("planar sector-0 bottom, momentum route", gamma_mom));
    measurements.push(m("sector-0 relative route disagreement", sector_dev));
    worst_normalized = worst_normalized.max(sector_dev / sector_tol);

    // 3. First resolvent identity on the line model.
    let resolvent_tol = 1e-5;
    let (alpha, omega) = (-1.0f64, 1.0f64);
    let (shift_a, shift_b) = (0.8f64, 1.3f64);
    let line = grid_1d(8.0, 224)?;
    let x_edges: Vec<f64> = (0..=16).map(|i| -8.0 + i as f64).collect();
    let pg = ProductGrid::new(line, &x_edges)?;
    let xs: Vec<f64> = pg.x().to_vec();
    let ys: Vec<f64> = pg.y().to_vec();
    let mut values = Vec::with_capacity(xs.len() * ys.len());
    for &x in &xs {
        for &y in &ys {
            values.push((-0.5 * (x * x + y * y)).exp() * (1.0 + 0.5 * x) * (1.0 - 0.3 * y));
        }
    }
    let source = EigenfunctionSamples::new(pg.clone(), values)?;
    let u_a = apply_resolvent(alpha, omega, shift_a, &source)?;
    let u_b = apply_resolvent(alpha, omega, shift_b, &source)?;
    let w = apply_resolvent(alpha, omega, shift_a, &u_b)?;
    let factor = shift_b - shift_a;
    let n_vals = u_a.values().len();
    let mut residual_values = Vec::with_capacity(n_vals);
    let mut difference_values = Vec::with_capacity(n_vals);
    for i in 0..n_vals {
        let diff = u_a.values()[i] - u_b.values()[i];
        difference_values.push(diff);
        residual_values.push(diff - factor * w.values()[i]);
    }
    let residual = EigenfunctionSamples::new(pg.clone(), residual_values)?;
    let difference = EigenfunctionSamples::new(pg, difference_values)?;
    let resolvent_dev = residual.norm() / difference.norm().max(f64::MIN_POSITIVE);
    measurements.push(m("resolvent identity relative residual", resolvent_dev));
    worst_normalized = worst_normalized.max(resolvent_dev / resolvent_tol);

    let reference = Reference::trend(
        "independent computational routes must agree: oscillator-mode series vs \
         heat-kernel quadrature for the line Green kernel; position-space vs \
         momentum-space assembly of the planar sector operator; the first resolvent \
         identity for the line resolvent",
    )?;
    VerificationReport::build(
        "cross_validate",
        vec![
            ("seed".into(), seed.to_string()),
            ("green kernel".into(), "d=1, omega=1, shift 0.9, 100 points".into()),
            (
                "point law".into(),
                "y, y' uniform in [-2, 2]; x uniform in [-3, 3]; |x - x'| uniform in [1, 3]"
                    .into(),
            ),
            (
                "sector block".into(),
                "d=2, omega=1, shift 1; position grid order 64; default momentum grid".into(),
            ),
            (
                "resolvent".into(),
                format!("alpha={alpha}, omega={omega}, shifts {shift_a} and {shift_b}"),
            ),
            (
                "route tolerances".into(),
                format!("{green_tol:e}; {sector_tol:e}; {resolvent_tol:e}"),
            ),
        ],
        measurements,
        reference,
        1.0,
        worst_normalized,
        started,
    )
}

// ---------------------------------------------------------------------------
// Suite runner
// ---------------------------------------------------------------------------

/// Runs the full verification suite with its standard parameter sets and
/// returns one report per check, in a fixed order.
///
/// Checks run concurrently on the global thread pool.  A check that aborts
/// with an error is converted into a failed report wrapping the error text,
/// so the suite always returns the full list.
pub fn run_all() -> Vec<VerificationReport> {
    type Job = Box<dyn Fn() -> Result<VerificationReport> + Send + Sync>;
    let jobs: Vec<(&'static str, Job)> = vec![
        (
            "mode_envelope",
            Box::new(|| check_mode_envelope(&[0.1, 0.5, 1.0, 2.0, 5.0, 10.0], 15)),
        ),
        (
            "scaling_covariance (line)",
            Box::new(|| check_scaling(1, &[-1.0], &[0.5, 2.0, 4.0])),
        ),
        (
            "scaling_covariance (plane)",
            Box::new(|| check_scaling(2, &[-1.0], &[0.5, 2.0])),
        ),
        (
            "scaling_covariance (space)",
            Box::new(|| check_scaling(3, &[-1.0], &[4.0])),
        ),
        (
            "asymptotics_line_small_coupling",
            Box::new(|| check_asymptotics(AsymptoticRegime::LineSmallCoupling)),
        ),
        (
            "asymptotics_line_stiff_oscillator",
            Box::new(|| check_asymptotics(AsymptoticRegime::LineStiffOscillator)),
        ),
        (
            "asymptotics_plane_strong_binding",
            Box::new(|| check_asymptotics(AsymptoticRegime::PlaneStrongBinding)),
        ),
        (
            "asymptotics_plane_weak_binding",
            Box::new(|| check_asymptotics(AsymptoticRegime::PlaneWeakBinding)),
        ),
        (
            "asymptotics_space_strong_binding",
            Box::new(|| check_asymptotics(AsymptoticRegime::SpaceStrongBinding)),
        ),
        (
            "asymptotics_space_weak_binding",
            Box::new(|| check_asymptotics(AsymptoticRegime::SpaceWeakBinding)),
        ),
        (
            "existence_2d3d",
            Box::new(|| check_existence_2d3d(&[-2.0, 0.0, 2.0], 1.0)),
        ),
        (
            "count_trends (line)",
            Box::new(|| check_count_trends(1, &[-1.0, -2.0, -4.0, -8.0])),
        ),
        (
            "count_trends (plane)",
            Box::new(|| check_count_trends(2, &[-1.0, -2.0, -4.0])),
        ),
        (
            "count_trends (space)",
            Box::new(|| check_count_trends(3, &[-1.0, -2.0, -4.0])),
        ),
        (
            "schatten_trends",
            Box::new(|| check_schatten(&[0.5, 0.9, 0.99], 2)),
        ),
        ("cross_validate", Box::new(cross_validate)),
    ];
    jobs.into_par_iter()
        .map(|(name, job)| job().unwrap_or_else(|err| abort_report(name, &err)))
        .collect()
}

// ---------------------------------------------------------------------------
// Unit tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_rejects_empty_source() {
        assert!(Reference::numeric(1.0, "").is_err());
        assert!(Reference::numeric(1.0, "   ").is_err());
        assert!(Reference::trend("").is_err());
        assert!(Reference::numeric(f64::NAN, "finite check").is_err());
        let r = Reference::numeric(2.0, " documented origin ").unwrap();
        assert_eq!(r.source(), "documented origin");
        assert_eq!(r.value(), Some(2.0));
    }

    #[test]
    fn report_pass_flag_matches_deviation() {
        let reference = Reference::numeric(1.0, "unit test").unwrap();
        let ok = VerificationReport::build(
            "demo",
            Vec::new(),
            Vec::new(),
            reference.clone(),
            1e-3,
            5e-4,
            Instant::now(),
        )
        .unwrap();
        assert!(ok.pass());
        let bad = VerificationReport::build(
            "demo",
            Vec::new(),
            Vec::new(),
            reference.clone(),
            1e-3,
            2e-3,
            Instant::now(),
        )
        .unwrap();
        assert!(!bad.pass());
        let nan = VerificationReport::build(
            "demo",
            Vec::new(),
            Vec::new(),
            reference,
            1e-3,
            f64::NAN,
            Instant::now(),
        )
        .unwrap();
        assert!(!nan.pass());
        assert!(nan.deviation().is_finite());
    }

    #[test]
    fn report_rejects_bad_names_and_tolerances() {
        let reference = Reference::numeric(1.0, "unit test").unwrap();
        assert!(VerificationReport::build(
            "",
            Vec::new(),
            Vec::new(),
            reference.clone(),
            1e-3,
            0.0,
            Instant::now(),
        )
        .is_err());
        assert!(VerificationReport::build(
            "demo",
            Vec::new(),
            Vec::new(),
            reference,
            f64::NAN,
            0.0,
            Instant::now(),
        )
        .is_err());
    }

    #[test]
    fn abort_report_is_failed_and_carries_error() {
        let report = abort_report("broken", &Error::invalid("synthetic"));
        assert!(!report.pass());
        assert!(report.inputs()[0].1.contains("synthetic"));
    }

    #[test]
    fn line_fit_recovers_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 2.0).collect();
        let fit = fit_line(&xs, &ys).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-12);
        assert!((fit.intercept + 2.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!((fit.span - 3.0).abs() < 1e-12);
        assert!(fit_line(&[1.0], &[2.0]).is_err());
        assert!(fit_line(&[1.0, 1.0], &[2.0, 3.0]).is_err());
    }

    #[test]
    fn measurement_clamps_non_finite() {
        let meas = m("demo", f64::INFINITY);
        assert!(meas.value.is_finite());
        assert!(meas.label.contains("clamped"));
    }

    #[test]
    fn schatten_rejects_bad_inputs() {
        assert!(check_schatten(&[], 2).is_err());
        assert!(check_schatten(&[0.5, 1.0], 2).is_err());
        assert!(check_schatten(&[0.5], 3).is_err());
    }

    #[test]
    fn count_trends_rejects_unsorted_sequences() {
        assert!(check_count_trends(1, &[-2.0, -1.0]).is_err());
        assert!(check_count_trends(1, &[-1.0]).is_err());
        assert!(check_count_trends(4, &[-1.0, -2.0]).is_err());
    }

    #[test]
    fn reports_serialize_to_json() {
        let reference = Reference::numeric(1.0, "unit test").unwrap();
        let report = VerificationReport::build(
            "demo",
            vec![("k".into(), "v".into())],
            vec![m("value", 0.5)],
            reference,
            1e-3,
            5e-4,
            Instant::now(),
        )
        .unwrap();
        let text = serde_json::to_string(&report).unwrap();
        assert!(text.contains("\"check\":\"demo\""));
        assert!(text.contains("\"pass\":true"));
        assert!(text.contains("unit test"));
    }
}
