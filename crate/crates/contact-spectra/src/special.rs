//! Special functions needed by the kernel and operator assemblies.
//!
//! The 2D/3D angular reductions of the Green kernels produce modified Bessel
//! functions of integer order (2D) and modified spherical Bessel functions
//! (3D) with arguments ranging over ~13 orders of magnitude, always in the
//! combination `e^(-z) I_m(z)`.  Everything here works with those *scaled*
//! functions so that no intermediate `e^z` can overflow.
//!
//! Near-diagonal kernel differences additionally need `Ĩ₀(z) - Ĩ_m(z)` to
//! full relative accuracy even when the two terms agree to many digits
//! (`Ĩ₀ - Ĩ_m ≈ m²/(2z) · Ĩ₀` for large `z`), so dedicated difference
//! evaluators are provided instead of subtracting rounded values.

use crate::{require_finite, Error, Result};

/// Largest order accepted by the Bessel evaluators.  Angular cutoffs in this
/// crate stay ≤ 32; the cap just keeps the internal buffers small.
pub const MAX_ORDER: usize = 64;

/// Euler–Mascheroni constant γ, to full double precision.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn check_order_arg(name: &str, m_max: usize, z: f64) -> Result<()> {
    require_finite("z", z)?;
    if z < 0.0 {
        return Err(Error::invalid(format!("{name}: need z ≥ 0, got {z}")));
    }
    if m_max > MAX_ORDER {
        return Err(Error::invalid(format!(
            "{name}: order {m_max} exceeds supported maximum {MAX_ORDER}"
        )));
    }
    Ok(())
}

/// Scaled modified Bessel functions `e^(-z) I_m(z)` for `m = 0..=m_max`.
///
/// Strategy: power series for small `z`, Miller's downward recurrence with
/// the sum normalization `Ĩ₀ + 2 Σ Ĩ_k = 1` for moderate `z`, and the large
/// argument asymptotic series for `Ĩ₀`, `Ĩ₁` followed by the (exact) upward
/// recurrence `Ĩ_{m+1} = Ĩ_{m-1} - (2m/z) Ĩ_m` for large `z`.
pub fn bessel_i_scaled(m_max: usize, z: f64) -> Result<Vec<f64>> {
    check_order_arg("bessel_i_scaled", m_max, z)?;
    if z == 0.0 {
        let mut out = vec![0.0; m_max + 1];
        out[0] = 1.0;
        return Ok(out);
    }
    if z < 2.0 {
        return Ok(bessel_series(m_max, z));
    }
    if z < 35.0 {
        return Ok(bessel_miller(m_max, z));
    }
    let mut out = vec![0.0; m_max + 1];
    out[0] = bessel_asymptotic(0, z);
    if m_max >= 1 {
        out[1] = bessel_asymptotic(1, z);
        for m in 1..m_max {
            out[m + 1] = out[m - 1] - (2.0 * m as f64 / z) * out[m];
            // Scaled values are positive and decreasing in m; clamp the tiny
            // negative residue the upward recurrence can leave behind once
            // the true value falls below its error floor.
            if out[m + 1] < 0.0 {
                out[m + 1] = 0.0;
            }
        }
    }
    Ok(out)
}

/// `Ĩ_m(z)` by the defining power series, for `0 ≤ z < 2`.
fn bessel_series(m_max: usize, z: f64) -> Vec<f64> {
    let damp = (-z).exp();
    let half = 0.5 * z;
    let mut out = vec![0.0; m_max + 1];
    let mut lead = 1.0f64; // (z/2)^m / m!
    for (m, slot) in out.iter_mut().enumerate() {
        let mut term = lead;
        let mut sum = term;
        let mut j = 0usize;
        while term > 1e-19 * sum {
            j += 1;
            term *= half * half / (j as f64 * (j + m) as f64);
            sum += term;
        }
        *slot = damp * sum;
        lead *= half / (m as f64 + 1.0);
    }
    out
}

/// `Ĩ_m(z)` by Miller's algorithm for moderate arguments.
fn bessel_miller(m_max: usize, z: f64) -> Vec<f64> {
    // Start high enough that the minimal solution dominates by ~1e-20 when
    // the recurrence reaches m_max.
    let start = m_max + 20 + (1.5 * z) as usize;
    let mut u_next = 0.0f64;
    let mut u_curr = 1e-280f64;
    let mut norm = 0.0f64; // accumulates u_0 + 2 Σ_{k≥1} u_k
    let mut out = vec![0.0; m_max + 1];
    for k in (0..=start).rev() {
        let u_prev = u_next + (2.0 * (k + 1) as f64 / z) * u_curr;
        u_next = u_curr;
        u_curr = u_prev;
        if k <= m_max {
            out[k] = u_curr;
        }
        norm += if k == 0 { u_curr } else { 2.0 * u_curr };
        if u_curr > 1e260 {
            // Rescale to avoid overflow; relative values are all that matter.
            u_curr *= 1e-260;
            u_next *= 1e-260;
            norm *= 1e-260;
            for v in out.iter_mut() {
                *v *= 1e-260;
            }
        }
    }
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// Large-argument asymptotic series for `Ĩ_ν(z)`, `ν ∈ {0, 1}`, `z ≥ 35`.
fn bessel_asymptotic(nu: usize, z: f64) -> f64 {
    let pref = 1.0 / (2.0 * std::f64::consts::PI * z).sqrt();
    let four_nu2 = 4.0 * (nu * nu) as f64;
    let mut term = 1.0f64;
    let mut sum = term;
    for k in 0..30u32 {
        let odd = (2 * k + 1) as f64;
        let next = term * (odd * odd - four_nu2) / (8.0 * z * (k as f64 + 1.0));
        if next.abs() >= term.abs() {
            break; // asymptotic tail started to diverge; stop at best term
        }
        term = next;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    pref * sum
}

/// Differences `Ĩ₀(z) - Ĩ_m(z)` for `m = 0..=m_max`, computed to full
/// relative accuracy for every `z ≥ 0`.
///
/// For large `z` the two functions agree to `O(m²/z)` and naive subtraction
/// loses digits, so the `m = 1` difference is evaluated by a term-by-term
/// differenced asymptotic series, and higher orders follow from the exact
/// recurrence `D_{m+1} = D_{m-1} + (2m/z) Ĩ_m` whose terms are all positive.
pub fn bessel_i0_minus_scaled(m_max: usize, z: f64) -> Result<Vec<f64>> {
    check_order_arg("bessel_i0_minus_scaled", m_max, z)?;
    if z < 35.0 {
        // Direct subtraction is fine: the relative cancellation is at worst
        // ~ m²/(2z) ≥ 1/70 for m ≥ 1, costing under two digits.
        let base = bessel_i_scaled(m_max, z)?;
        return Ok(base.iter().map(|&v| base[0] - v).collect());
    }
    let scaled = bessel_i_scaled(m_max, z)?;
    let mut out = vec![0.0; m_max + 1];
    if m_max >= 1 {
        out[1] = bessel_diff01_asymptotic(z);
        for m in 1..m_max {
            out[m + 1] = out[m - 1] + (2.0 * m as f64 / z) * scaled[m];
        }
    }
    Ok(out)
}

/// `Ĩ₀(z) - Ĩ₁(z)` via the differenced asymptotic series (`z ≥ 35`).
fn bessel_diff01_asymptotic(z: f64) -> f64 {
    let pref = 1.0 / (2.0 * std::f64::consts::PI * z).sqrt();
    let mut term0 = 1.0f64;
    let mut term1 = 1.0f64;
    let mut diff = 0.0f64;
    for k in 0..30u32 {
        let odd = (2 * k + 1) as f64;
        let denom = 8.0 * z * (k as f64 + 1.0);
        let next0 = term0 * (odd * odd) / denom;
        let next1 = term1 * (odd * odd - 4.0) / denom;
        if next0.abs() >= term0.abs() && k > 0 {
            break;
        }
        term0 = next0;
        term1 = next1;
        let d = term0 - term1;
        diff += d;
        if d.abs() < 1e-18 * diff.abs().max(1e-300) {
            break;
        }
    }
    pref * diff
}

/// Scaled modified spherical Bessel functions `e^(-z) i_ℓ(z)`,
/// `ℓ = 0..=l_max`, where `∫₋₁¹ P_ℓ(u) e^(zu) du = 2 i_ℓ(z)`.
///
/// `i₀` and `i₁` are elementary, which pins the normalization of the
/// downward recurrence exactly.
pub fn sph_bessel_i_scaled(l_max: usize, z: f64) -> Result<Vec<f64>> {
    check_order_arg("sph_bessel_i_scaled", l_max, z)?;
    if z == 0.0 {
        let mut out = vec![0.0; l_max + 1];
        out[0] = 1.0;
        return Ok(out);
    }
    let i0 = -(-2.0 * z).exp_m1() / (2.0 * z); // (1 - e^(-2z)) / (2z)
    if l_max == 0 {
        return Ok(vec![i0]);
    }
    if z < 0.5 {
        // Power series: i_ℓ(z) = z^ℓ/(2ℓ+1)!! Σ_j (z²/2)^j / (j! (2ℓ+3)(2ℓ+5)…(2ℓ+2j+1)).
        let damp = (-z).exp();
        let mut out = vec![0.0; l_max + 1];
        let mut lead = 1.0f64; // z^ℓ / (2ℓ+1)!!
        for (l, slot) in out.iter_mut().enumerate() {
            let mut term = 1.0f64;
            let mut sum = term;
            let mut j = 0usize;
            while term > 1e-19 * sum {
                j += 1;
                term *= 0.5 * z * z / (j as f64 * (2 * l + 2 * j + 1) as f64);
                sum += term;
            }
            *slot = damp * lead * sum;
            lead *= z / (2 * l + 3) as f64;
        }
        return Ok(out);
    }
    if z < 30.0 {
        // Downward recurrence u_{ℓ-1} = u_{ℓ+1} + (2ℓ+1)/z u_ℓ, normalized
        // by the exact i₀.
        let start = l_max + 25 + (1.5 * z.sqrt()) as usize;
        let mut u_next = 0.0f64;
        let mut u_curr = 1e-280f64;
        let mut out = vec![0.0; l_max + 1];
        for l in (0..=start).rev() {
            let u_prev = u_next + ((2 * l + 3) as f64 / z) * u_curr;
            u_next = u_curr;
            u_curr = u_prev;
            if l <= l_max {
                out[l] = u_curr;
            }
            if u_curr > 1e260 {
                u_curr *= 1e-260;
                u_next *= 1e-260;
                for v in out.iter_mut() {
                    *v *= 1e-260;
                }
            }
        }
        let scale = i0 / out[0];
        for v in out.iter_mut() {
            *v *= scale;
        }
        return Ok(out);
    }
    // Large z: elementary seeds + upward recurrence.
    let e2 = (-2.0 * z).exp();
    let i1 = ((z - 1.0) + (z + 1.0) * e2) / (2.0 * z * z);
    let mut out = vec![0.0; l_max + 1];
    out[0] = i0;
    out[1] = i1;
    for l in 1..l_max {
        out[l + 1] = out[l - 1] - ((2 * l + 1) as f64 / z) * out[l];
        if out[l + 1] < 0.0 {
            out[l + 1] = 0.0;
        }
    }
    Ok(out)
}

/// Differences `ĩ₀(z) - ĩ_ℓ(z)` for `ℓ = 0..=l_max`, stable for all `z ≥ 0`.
///
/// The `ℓ = 1` seed has the closed form `(1 - (2z+1) e^(-2z)) / (2z²)`; the
/// rest follows from `D_{ℓ+1} = D_{ℓ-1} + (2ℓ+1)/z · ĩ_ℓ` with positive
/// increments.
pub fn sph_bessel_i0_minus_scaled(l_max: usize, z: f64) -> Result<Vec<f64>> {
    check_order_arg("sph_bessel_i0_minus_scaled", l_max, z)?;
    if z < 30.0 {
        let base = sph_bessel_i_scaled(l_max, z)?;
        return Ok(base.iter().map(|&v| base[0] - v).collect());
    }
    let scaled = sph_bessel_i_scaled(l_max, z)?;
    let mut out = vec![0.0; l_max + 1];
    if l_max >= 1 {
        let e2 = (-2.0 * z).exp();
        out[1] = (1.0 - (2.0 * z + 1.0) * e2) / (2.0 * z * z);
        for l in 1..l_max {
            out[l + 1] = out[l - 1] + ((2 * l + 1) as f64 / z) * scaled[l];
        }
    }
    Ok(out)
}

/// Legendre polynomials `P_ℓ(x)` for `ℓ = 0..=l_max` at a single point.
pub fn legendre_p_all(l_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; l_max + 1];
    out[0] = 1.0;
    if l_max >= 1 {
        out[1] = x;
        for l in 1..l_max {
            let lf = l as f64;
            out[l + 1] = ((2.0 * lf + 1.0) * x * out[l] - lf * out[l - 1]) / (lf + 1.0);
        }
    }
    out
}

/// Exponential integral `E₁(x) = ∫ₓ^∞ e^(-u)/u du` for `x > 0`.
///
/// Series around 0 for `x ≤ 1`, modified Lentz continued fraction beyond.
/// Used by self-checks (the renormalization constant obeys an `E₁(1)`
/// identity).
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::invalid(format!("exp_integral_e1 needs x > 0, got {x}")));
    }
    if x <= 1.0 {
        // E₁(x) = -γ - ln x + Σ_{k≥1} (-1)^(k+1) x^k / (k · k!)
        let mut sum = 0.0f64;
        let mut term = 1.0f64; // x^k / k!
        for k in 1..=40u32 {
            term *= x / k as f64;
            let contrib = if k % 2 == 1 { term } else { -term } / k as f64;
            sum += contrib;
            if term / (k as f64) < 1e-18 {
                break;
            }
        }
        return Ok(-EULER_GAMMA - x.ln() + sum);
    }
    // Continued fraction e^(-x) / (x + 1 - 1/(x + 3 - 4/(x + 5 - 9/(…))))
    // evaluated with the modified Lentz algorithm.
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for k in 1..200u32 {
        let a = -((k * k) as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            return Ok(h * (-x).exp());
        }
    }
    Err(Error::NoConvergence(format!(
        "exponential integral continued fraction stalled at x = {x}"
    )))
}
