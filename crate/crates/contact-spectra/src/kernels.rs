//! Closed-form kernels and scalar coefficient functions.
//!
//! Everything in this module is a pointwise evaluation: the oscillator
//! semigroup kernel ([`mehler`]), the resolvent kernel of the unperturbed
//! pair Hamiltonian ([`green`]) together with its oscillator-series form in
//! one dimension ([`green_series_1d`]), the restriction of the resolvent to
//! the coincidence hyperplane ([`k_kernel`]), the renormalized diagonal
//! coefficients in two and three dimensions ([`a_lambda`]) with their
//! momentum-space counterparts ([`a_tilde`], [`g_tilde`]), and the
//! renormalization constant [`constant_c`].
//!
//! All integral representations are one-dimensional integrals over the
//! scaled time `t = ln(1/ν) ∈ (0, ∞)`; the module never integrates in the
//! `ν` variable directly because `ν = e^{-t}` collapses to `1.0` in double
//! precision long before the integrable endpoint structure is resolved.
//! Grids and budgets come from [`crate::quadrature`].

use std::sync::OnceLock;

use crate::quadrature::{self, EndpointClass, NuProfile};
use crate::{check_dimension, require_finite, require_positive, Error, Result};

use std::f64::consts::PI;

/// Highest oscillator level accepted by [`hermite_psi`].
pub const MAX_HERMITE_LEVEL: usize = 200;

/// Highest truncation level accepted by [`green_series_1d`] and the other
/// series-based routines (the three-term recurrence stays well-conditioned
/// far beyond this, the cap just bounds work).
pub const MAX_SERIES_LEVEL: usize = 1024;

/// Cramér's uniform bound: `|Ψ_n^{(ω)}(x)| ≤ K ω^{1/4} π^{-1/4}` for all
/// `n` and `x`, with `K ≈ 1.086435`. Stored squared since tail estimates
/// always use products of two eigenfunctions.
const CRAMER_SQ: f64 = 1.180_341;

/// Relative size at which a truncated oscillator series is accepted as
/// converged; the certified tail bound must not exceed this fraction of the
/// partial sum.
const SERIES_TAIL_TOL: f64 = 1e-8;

/// Problem parameters shared by every kernel evaluation.
///
/// `d` is the space dimension of *each* of the two particles (the pair lives
/// on `ℝ^d × ℝ^d`), `omega` the oscillator frequency in natural units
/// `ħ = m = 1`, `alpha` the strength of the contact coupling, and `lambda`
/// the positive spectral shift at which resolvent-type quantities are
/// evaluated.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelSpec {
    /// Space dimension, 1, 2 or 3.
    pub d: u32,
    /// Oscillator frequency, strictly positive.
    pub omega: f64,
    /// Contact-coupling strength (any finite real, sign included).
    pub alpha: f64,
    /// Spectral shift, strictly positive.
    pub lambda: f64,
}

impl ModelSpec {
    /// Builds a spec, rejecting out-of-domain parameters.
    pub fn new(d: u32, omega: f64, alpha: f64, lambda: f64) -> Result<Self> {
        let spec = ModelSpec { d, omega, alpha, lambda };
        spec.validate()?;
        Ok(spec)
    }

    /// Re-checks the invariants (`d ∈ {1,2,3}`, `ω > 0`, `λ > 0`, finite `α`).
    pub fn validate(&self) -> Result<()> {
        check_dimension(self.d)?;
        require_positive("omega", self.omega)?;
        require_finite("alpha", self.alpha)?;
        require_positive("lambda", self.lambda)?;
        Ok(())
    }

    /// Dimensionless shift `p = λ/ω`; every scaled-time integrand carries
    /// its shift dependence through this ratio alone.
    pub fn shift_ratio(&self) -> f64 {
        self.lambda / self.omega
    }

    /// Same spec at a different shift.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        ModelSpec::new(self.d, self.omega, self.alpha, lambda)
    }
}

fn check_point(name: &str, point: &[f64], d: u32) -> Result<()> {
    if point.len() != d as usize {
        return Err(Error::invalid(format!(
            "{name} must have {d} component(s), got {}",
            point.len()
        )));
    }
    for (i, &c) in point.iter().enumerate() {
        if !c.is_finite() {
            return Err(Error::invalid(format!("{name}[{i}] must be finite, got {c}")));
        }
    }
    Ok(())
}

fn sq_norm(a: &[f64]) -> f64 {
    a.iter().map(|&c| c * c).sum()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

/// Coefficient of `-(|y|² + |y'|²)` in the scaled-time integrand:
/// `A(t) = (ω/2) tanh(t/2)`.
///
/// Monotone increasing from `ωt/4` at small `t` to the ground-state value
/// `ω/2`; it is what confines every kernel to a bounded region regardless of
/// how long the integration runs.
pub fn envelope_coeff(omega: f64, t: f64) -> f64 {
    0.5 * omega * (0.5 * t).tanh()
}

/// Coefficient of `-|x - x'|²` on the coincidence hyperplane:
/// `B(t) = ω (1/(2t) + 1/(2 sinh t))`.
///
/// Behaves like `ω/t` for small `t` (the short-time spike responsible for
/// the diagonal divergence) and like `ω/(2t)` for large `t`.
pub fn spike_coeff(omega: f64, t: f64) -> f64 {
    // sinh overflows to +∞ past t ≈ 710 and the reciprocal correctly
    // flushes to zero, leaving the free-motion part.
    omega * (0.5 / t + 0.5 / t.sinh())
}

/// Scaled-time prefactor of the resolvent representation,
/// `ω^{d-1} / (2^{d/2} π^d) · (1 - e^{-2t})^{-d/2} t^{-d/2}`,
/// *without* the `e^{-pt}` mass factor (that lives in the quadrature
/// weights, see [`quadrature::NuRule::mass_weights`]).
pub fn resolvent_prefactor(d: u32, omega: f64, t: f64) -> f64 {
    let half_d = 0.5 * d as f64;
    let base = omega.powi(d as i32 - 1) / (2f64.powf(half_d) * PI.powi(d as i32));
    let one_m2 = -(-2.0 * t).exp_m1();
    base * (one_m2 * t).powf(-half_d)
}

/// Normalized oscillator eigenfunction `Ψ_n^{(ω)}(x)`.
///
/// Evaluated by the normalized three-term recurrence
/// `Ψ_{n+1} = √(2ω/(n+1)) x Ψ_n − √(n/(n+1)) Ψ_{n-1}`,
/// which keeps every intermediate on the scale of the final value.
///
/// # Errors
/// Rejects `n > `[`MAX_HERMITE_LEVEL`], non-positive `ω`, non-finite `x`.
pub fn hermite_psi(n: usize, omega: f64, x: f64) -> Result<f64> {
    if n > MAX_HERMITE_LEVEL {
        return Err(Error::invalid(format!(
            "oscillator level {n} exceeds the supported maximum {MAX_HERMITE_LEVEL}"
        )));
    }
    let row = hermite_psi_row(n, omega, x)?;
    Ok(row[n])
}

/// All levels `Ψ_0^{(ω)}(x), …, Ψ_{n_max}^{(ω)}(x)` in one recurrence pass.
///
/// This is the workhorse behind series summation; it accepts levels up to
/// [`MAX_SERIES_LEVEL`].
pub fn hermite_psi_row(n_max: usize, omega: f64, x: f64) -> Result<Vec<f64>> {
    if n_max > MAX_SERIES_LEVEL {
        return Err(Error::invalid(format!(
            "oscillator level {n_max} exceeds the series cap {MAX_SERIES_LEVEL}"
        )));
    }
    require_positive("omega", omega)?;
    require_finite("x", x)?;
    let mut row = Vec::with_capacity(n_max + 1);
    let psi0 = (omega / PI).powf(0.25) * (-0.5 * omega * x * x).exp();
    row.push(psi0);
    if n_max >= 1 {
        row.push((2.0 * omega).sqrt() * x * psi0);
    }
    for n in 1..n_max {
        let np1 = (n + 1) as f64;
        let next = (2.0 * omega / np1).sqrt() * x * row[n]
            - (n as f64 / np1).sqrt() * row[n - 1];
        row.push(next);
    }
    Ok(row)
}

/// Oscillator semigroup kernel on `ℝ^d`: the integral kernel of
/// `exp(−t(−½Δ + ½ω²|x|²))`, ground-state decay `e^{-ωdt/2}` included.
///
/// Written in the overflow-free form
/// `(ω/(π(1-e^{-2ωt})))^{d/2} e^{-ωdt/2}
///  · exp{ -(ω/2)tanh(ωt/2)(|x|²+|x'|²) - ω|x-x'|²/(2 sinh ωt) }`.
///
/// # Errors
/// Rejects `t ≤ 0` and dimension mismatches.
pub fn mehler(spec: &ModelSpec, t: f64, x: &[f64], xp: &[f64]) -> Result<f64> {
    spec.validate()?;
    require_positive("t", t)?;
    check_point("x", x, spec.d)?;
    check_point("x'", xp, spec.d)?;
    let tau = spec.omega * t;
    let half_d = 0.5 * spec.d as f64;
    let one_m2 = -(-2.0 * tau).exp_m1();
    let pref = (spec.omega / (PI * one_m2)).powf(half_d) * (-half_d * tau).exp();
    let a = envelope_coeff(spec.omega, tau);
    let b = 0.5 * spec.omega / tau.sinh();
    let r2 = sq_norm(x) + sq_norm(xp);
    let d2 = sq_dist(x, xp);
    Ok(pref * (-a * r2 - b * d2).exp())
}

/// Resolvent kernel `G^λ_ω(x, y; x', y')` of the unperturbed pair
/// Hamiltonian at spectral point `−λ`, by scaled-time quadrature.
///
/// The representation integrates the free heat kernel in the `x`
/// coordinates against the oscillator semigroup in the `y` coordinates:
/// prefactor [`resolvent_prefactor`], envelope on `|y|²+|y'|²`, Gaussian
/// spikes `ω/(2t)` on `|x-x'|²` and `ω/(2 sinh t)` on `|y-y'|²`.
///
/// # Errors
/// Rejects coincident arguments `(x,y) = (x',y')`, where the kernel
/// diverges (logarithmically in the weakest case `d = 1`).
pub fn green(spec: &ModelSpec, x: &[f64], y: &[f64], xp: &[f64], yp: &[f64]) -> Result<f64> {
    spec.validate()?;
    check_point("x", x, spec.d)?;
    check_point("y", y, spec.d)?;
    check_point("x'", xp, spec.d)?;
    check_point("y'", yp, spec.d)?;
    let dx2 = sq_dist(x, xp);
    let dy2 = sq_dist(y, yp);
    if dx2 == 0.0 && dy2 == 0.0 {
        return Err(Error::invalid(
            "resolvent kernel diverges at coincident arguments (x,y) = (x',y')",
        ));
    }
    let r2 = sq_norm(y) + sq_norm(yp);
    let (d, om) = (spec.d, spec.omega);
    let rule = resolvent_rule(spec)?;
    rule.integrate_log(|t| {
        resolvent_prefactor(d, om, t)
            * (-envelope_coeff(om, t) * r2 - 0.5 * om / t * dx2 - 0.5 * om / t.sinh() * dy2)
                .exp()
    })
}

fn resolvent_rule(spec: &ModelSpec) -> Result<quadrature::NuRule> {
    let class = match spec.d {
        1 => EndpointClass::Kernel1d,
        2 => EndpointClass::Green2d,
        _ => EndpointClass::Green3d,
    };
    quadrature::nu_rule(&NuProfile { p: spec.shift_ratio(), class, rtol: 1e-10 })
}

/// One-dimensional resolvent kernel as a sum over oscillator levels:
/// `Σ_n Ψ_n^{(ω)}(y) Ψ_n^{(ω)}(y') e^{-κ_n|x-x'|} / κ_n` with
/// `κ_n = √(2(ωn+λ))`.
///
/// The truncation at `n_max` is certified: using Cramér's uniform bound on
/// the eigenfunctions, the dropped tail is at most
/// `K² √(ω/π) e^{-κ_{n_max}|x-x'|} / (ω|x-x'|)`, and the sum is only
/// returned when that bound stays below `1e-8` of the partial sum.
///
/// # Errors
/// `NoConvergence` when the tail cannot be certified within `n_max`
/// (in particular always at `x = x'`, where the series loses its
/// exponential cutoff).
pub fn green_series_1d(
    omega: f64,
    lambda: f64,
    n_max: usize,
    x: f64,
    y: f64,
    xp: f64,
    yp: f64,
) -> Result<f64> {
    require_positive("omega", omega)?;
    require_positive("lambda", lambda)?;
    for (name, v) in [("x", x), ("y", y), ("x'", xp), ("y'", yp)] {
        require_finite(name, v)?;
    }
    let psi_y = hermite_psi_row(n_max, omega, y)?;
    let psi_yp = hermite_psi_row(n_max, omega, yp)?;
    let delta = (x - xp).abs();
    let mut sum = 0.0f64;
    for n in 0..=n_max {
        let kappa = (2.0 * (omega * n as f64 + lambda)).sqrt();
        sum += psi_y[n] * psi_yp[n] * (-kappa * delta).exp() / kappa;
    }
    let kappa_last = (2.0 * (omega * n_max as f64 + lambda)).sqrt();
    let tail = if delta > 0.0 {
        CRAMER_SQ * (omega / PI).sqrt() * (-kappa_last * delta).exp() / (omega * delta)
    } else {
        f64::INFINITY
    };
    if !(tail <= SERIES_TAIL_TOL * sum.abs()) {
        return Err(Error::NoConvergence(format!(
            "series tail bound {tail:.3e} not below {SERIES_TAIL_TOL:.0e} of the partial \
             sum at separation |x-x'| = {delta:.3e} with n_max = {n_max}"
        )));
    }
    Ok(sum)
}

/// Charge-space kernel: the resolvent restricted to the coincidence
/// hyperplane, `K^λ_ω(x, x') = G^λ_ω(x, x; x', x')` for `x, x' ∈ ℝ^d`.
///
/// Assembled in the regrouped envelope/spike form
/// `∫ dt e^{-pt} P_d(t) exp{ -A(t)(|x|²+|x'|²) - B(t)|x-x'|² }`
/// with [`envelope_coeff`] `A`, [`spike_coeff`] `B` and
/// [`resolvent_prefactor`] `P_d` — the same decomposition the operator
/// assembly uses row by row.
///
/// # Errors
/// Rejects `x = x'` in every dimension: the diagonal diverges
/// logarithmically for `d = 1` and like `|x-x'|^{2-2d}` otherwise.
pub fn k_kernel(spec: &ModelSpec, x: &[f64], xp: &[f64]) -> Result<f64> {
    spec.validate()?;
    check_point("x", x, spec.d)?;
    check_point("x'", xp, spec.d)?;
    let d2 = sq_dist(x, xp);
    if d2 == 0.0 {
        return Err(Error::invalid(
            "charge-space kernel diverges on the diagonal x = x'",
        ));
    }
    let r2 = sq_norm(x) + sq_norm(xp);
    let (d, om) = (spec.d, spec.omega);
    let rule = resolvent_rule(spec)?;
    rule.integrate_log(|t| {
        resolvent_prefactor(d, om, t)
            * (-envelope_coeff(om, t) * r2 - spike_coeff(om, t) * d2).exp()
    })
}

// ---------------------------------------------------------------------------
// Renormalized diagonal coefficients
// ---------------------------------------------------------------------------

/// Which Gaussian width multiplies the squared radius in the regularized
/// diagonal integrand: the position-space coefficient uses the full
/// numerator `(1-ν²)t + 2(1-ν)²`, the momentum-space one drops the
/// `2(1-ν)²` piece.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum DiagKind {
    Position,
    Fourier,
}

/// Relative deviation `σ(t) = 4(1-ν)/N₁(t) − 1` of the normalized weight
/// from unity, with `N₁ = (1+ν²)t + (1-ν²)`, `ν = e^{-t}`.
///
/// Direct evaluation loses all significance as `t → 0` (both terms of the
/// numerator approach `4t`), so below `t = 10⁻³` the Taylor expansion
/// `σ = t/2 − t²/6 − t³/8 + 7t⁴/180 + O(t⁵)` takes over; at the seam the
/// two branches agree to ~10⁻¹³.
fn weight_deviation(t: f64, nu: f64, one_m: f64, n1: f64) -> f64 {
    if t < 1e-3 {
        t * (0.5 + t * (-1.0 / 6.0 + t * (-0.125 + t * (7.0 / 180.0))))
    } else {
        (one_m * (3.0 - nu) - (1.0 + nu * nu) * t) / n1
    }
}

/// Stable value of `e^{-t} [1 − ν^{p-1} R_d(t) e^{-g(t) s}]`, the full
/// integrand numerator of the regularized diagonal integrals (`s ≥ 0` is
/// the squared radius in oscillator units).
///
/// Everything is folded into a single exponent
/// `Y = (1-p)t − g s + c_d ln(1+σ)` so that the bracket is `−expm1(Y)`
/// when `Y` is small — the regime where naive subtraction would cancel —
/// while large positive `Y` (small shift ratio at large `t`) is handled as
/// `e^{-t} − e^{Y-t}` whose second exponent `−pt − gs + c_d ln(1+σ)` never
/// overflows.
fn diag_numerator(p: f64, s: f64, kind: DiagKind, half_count: f64, t: f64) -> f64 {
    let nu = (-t).exp();
    let one_m = -(-t).exp_m1();
    let one_m2 = -(-2.0 * t).exp_m1();
    let n1 = (1.0 + nu * nu) * t + one_m2;
    let g = match kind {
        DiagKind::Position => (one_m2 * t + 2.0 * one_m * one_m) / (2.0 * n1),
        DiagKind::Fourier => one_m2 * t / (2.0 * n1),
    };
    let sigma = weight_deviation(t, nu, one_m, n1);
    // ln(4(1-ν)/N₁): through the deviation σ while it is small, through the
    // product form once σ nears -1 (large t), where ln_1p would amplify the
    // rounding of σ by 1/(1+σ).
    let log_weight = if sigma > -0.5 {
        sigma.ln_1p()
    } else {
        (4.0 * one_m / n1).ln()
    };
    // Y − t; bounded above by ln(1+σ) ≤ ~0.24, so exp never overflows.
    let y_minus_t = -p * t - g * s + half_count * log_weight;
    let y = y_minus_t + t;
    if y < 0.5 {
        -(-t).exp() * y.exp_m1()
    } else {
        (-t).exp() - y_minus_t.exp()
    }
}

/// The regularized diagonal integral
/// `∫₀¹ dν (1-ν)^{-d/2} [1 − ν^{p-1} R_d e^{-g s}]` in scaled time.
///
/// For `d = 2` the integrand is analytic at `t = 0` and a doubling panel
/// family in `t` suffices; for `d = 3` the endpoint behaves like
/// `t^{-1/2}`, which the substitution `t = τ²` turns analytic again.
fn diag_coeff_integral(p: f64, s: f64, kind: DiagKind, d: u32, per_panel: usize) -> Result<f64> {
    // Scale of the exponent's initial decay; sets the first panel width.
    let slope = 1.0 + (1.0 - p).abs() + 0.5 * s;
    let t_max = 50f64.max(40.0 / p);
    match d {
        2 => {
            let edges = doubling_edges(0.25 / slope, t_max, 2.0);
            let rule = quadrature::composite_gauss_legendre(&edges, per_panel)?;
            quadrature::integrate(&rule, |t| {
                diag_numerator(p, s, kind, 1.0, t) / -(-t).exp_m1()
            })
        }
        3 => {
            let edges = doubling_edges(0.5 / slope.sqrt(), t_max.sqrt(), std::f64::consts::SQRT_2);
            let rule = quadrature::composite_gauss_legendre(&edges, per_panel)?;
            quadrature::integrate(&rule, |tau| {
                let t = tau * tau;
                let one_m = -(-t).exp_m1();
                2.0 * tau * diag_numerator(p, s, kind, 1.5, t) / (one_m * one_m.sqrt())
            })
        }
        _ => Err(Error::invalid(format!(
            "diagonal coefficient only exists in d = 2 or 3, got d = {d}"
        ))),
    }
}

/// Panel edges `0, w, w(1+r), w(1+r+r²), …` growing geometrically until
/// `limit` is passed; the last edge is clamped to `limit` exactly.
fn doubling_edges(first_width: f64, limit: f64, ratio: f64) -> Vec<f64> {
    let mut edges = vec![0.0];
    let mut width = first_width.min(limit);
    let mut t = 0.0;
    while t < limit {
        t = (t + width).min(limit);
        edges.push(t);
        width *= ratio;
    }
    edges
}

/// Renormalized diagonal coefficient `a^λ_ω` at radius `r ≥ 0`
/// (`d ∈ {2, 3}` only).
///
/// In two dimensions
/// `a = (C + I₂(p, ωr²)) / 4π` with the constant [`constant_c`]; in three
/// `a = √ω (1/2 + I₃(p, ωr²)) / (4π)^{3/2}`. Both integrals run over the
/// stable scaled-time form described at [`diag_numerator`].
///
/// # Errors
/// Rejects `d = 1` (no renormalized coefficient exists there) and negative
/// or non-finite radii.
pub fn a_lambda(spec: &ModelSpec, r: f64) -> Result<f64> {
    spec.validate()?;
    require_finite("r", r)?;
    if r < 0.0 {
        return Err(Error::invalid(format!("radius must be ≥ 0, got {r}")));
    }
    let p = spec.shift_ratio();
    let s = spec.omega * r * r;
    match spec.d {
        2 => {
            let integral = diag_coeff_integral(p, s, DiagKind::Position, 2, 16)?;
            Ok((constant_c() + integral) / (4.0 * PI))
        }
        3 => {
            let integral = diag_coeff_integral(p, s, DiagKind::Position, 3, 16)?;
            Ok(spec.omega.sqrt() / (4.0 * PI).powf(1.5) * (0.5 + integral))
        }
        _ => Err(Error::invalid(
            "the renormalized diagonal coefficient exists only for d = 2 or 3",
        )),
    }
}

/// Momentum-space diagonal coefficient `ã^λ(k)` for the planar problem,
/// evaluated in oscillator units: `k` is measured in units of `√ω` and the
/// value equals the unit-frequency coefficient at shift ratio `p = λ/ω`.
///
/// # Errors
/// Rejects `d ≠ 2`, negative or non-finite `k`.
pub fn a_tilde(spec: &ModelSpec, k: f64) -> Result<f64> {
    spec.validate()?;
    if spec.d != 2 {
        return Err(Error::invalid(format!(
            "momentum-space coefficient is only defined for d = 2, got d = {}",
            spec.d
        )));
    }
    require_finite("k", k)?;
    if k < 0.0 {
        return Err(Error::invalid(format!("momentum must be ≥ 0, got {k}")));
    }
    let integral = diag_coeff_integral(spec.shift_ratio(), k * k, DiagKind::Fourier, 2, 16)?;
    Ok((constant_c() + integral) / (4.0 * PI))
}

/// Momentum-space pair kernel `G̃^λ(k, k'; θ)` for the planar problem,
/// where `θ` is the angle between the two momenta (oscillator units, same
/// convention as [`a_tilde`]).
///
/// # Errors
/// Rejects `d ≠ 2` and the antipodal coincidence `|k⃗ + k⃗'| = 0` (including
/// `k = k' = 0`), where the kernel diverges like `|k⃗ + k⃗'|^{-2}`.
pub fn g_tilde(spec: &ModelSpec, k: f64, kp: f64, angle: f64) -> Result<f64> {
    spec.validate()?;
    if spec.d != 2 {
        return Err(Error::invalid(format!(
            "momentum-space kernel is only defined for d = 2, got d = {}",
            spec.d
        )));
    }
    for (name, v) in [("k", k), ("k'", kp), ("angle", angle)] {
        require_finite(name, v)?;
    }
    if k < 0.0 || kp < 0.0 {
        return Err(Error::invalid("momentum magnitudes must be ≥ 0"));
    }
    let cos_th = angle.cos();
    let plus_sq = k * k + kp * kp + 2.0 * k * kp * cos_th;
    if plus_sq <= 0.0 {
        return Err(Error::invalid(
            "momentum-space kernel diverges at antipodal momenta k⃗' = -k⃗",
        ));
    }
    let rule = quadrature::nu_rule(&NuProfile {
        p: spec.shift_ratio(),
        class: EndpointClass::Green2d,
        rtol: 1e-10,
    })?;
    let sum_sq = k * k + kp * kp;
    let dot = k * kp * cos_th;
    let value = rule.integrate_log(|t| {
        let nu = (-t).exp();
        let one_m = -(-t).exp_m1();
        let one_m2 = -(-2.0 * t).exp_m1();
        let n1 = (1.0 + nu * nu) * t + one_m2;
        let n2 = one_m2 + 2.0 * nu * t;
        let dg = one_m2 * t + 2.0 * one_m * one_m;
        (-(n1 * sum_sq * 0.5 + n2 * dot) / dg).exp() / dg
    })?;
    Ok(value / (2.0 * PI * PI))
}

/// Renormalization constant of the planar diagonal coefficient,
/// `C = −(∫₀¹ e^{-1/ν}/ν dν + ∫₁^∞ e^{-1/ν} ν^{-2} ln(1/ν) dν)`,
/// evaluated once by composite quadrature and cached.
///
/// Numerically `C` equals the Euler–Mascheroni constant γ (the two defining
/// integrals reduce to `−E₁(1) − ∫₀¹ e^{-u} ln u du`, a classical
/// representation of γ); the quadrature result is good to better than
/// 10⁻¹² and the tests pin it against [`crate::special::EULER_GAMMA`].
pub fn constant_c() -> f64 {
    static CONSTANT_C: OnceLock<f64> = OnceLock::new();
    *CONSTANT_C.get_or_init(|| compute_constant_c(16))
}

fn compute_constant_c(per_panel: usize) -> f64 {
    // Lower integral: e^{-1/ν}/ν on (0, 1]; below ν = 10⁻³ the integrand is
    // under e^{-1000}, so panels start there and double toward 1.
    let mut lower_edges: Vec<f64> = vec![1e-3];
    while *lower_edges.last().unwrap() < 1.0 {
        let next = (lower_edges.last().unwrap() * 2.0).min(1.0);
        lower_edges.push(next);
    }
    let lower_rule = quadrature::composite_gauss_legendre(&lower_edges, per_panel)
        .expect("static edge list is valid");
    let lower = quadrature::integrate(&lower_rule, |nu| (-1.0 / nu).exp() / nu)
        .expect("integrand is finite on (0,1]");

    // Upper integral: e^{-1/ν} ν^{-2} ln(1/ν) on [1, ∞); truncated at 2^60
    // where the remainder is below (1 + ln ν)/ν ≈ 4·10⁻¹⁷.
    let upper_edges: Vec<f64> = (0..=60).map(|k| (k as f64).exp2()).collect();
    let upper_rule = quadrature::composite_gauss_legendre(&upper_edges, per_panel)
        .expect("static edge list is valid");
    let upper = quadrature::integrate(&upper_rule, |nu| {
        (-1.0 / nu).exp() / (nu * nu) * -nu.ln()
    })
    .expect("integrand is finite on [1,2^60]");

    -(lower + upper)
}
