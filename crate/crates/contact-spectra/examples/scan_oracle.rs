//! Temporary scan oracle: pins secular roots by dense scans plus log-space
//! bisection, measures small-spectral-parameter behaviour of the sector-zero
//! branch in d = 2, 3, and cross-checks the discretized operators against
//! independent scalar quadratures.  Not part of the shipped surface; deleted
//! once the frozen values are recorded.

use std::f64::consts::PI;
use std::time::Instant;

use contact_spectra::kernels::ModelSpec;
use contact_spectra::operators::{
    adaptive_radial_sector, assemble_gamma_fourier, assemble_gamma_sector, default_fourier_sector,
    discretize_k_1d, grid_1d, sym_eigen, Grid1D,
};
use contact_spectra::spectra::{bound_states, count_bound_states, gamma_spectrum, SolveBudget};

// ---------------------------------------------------------------------------
// shared helpers
// ---------------------------------------------------------------------------

fn mu_level(omega: f64, e: f64, grid: &Grid1D, level: usize) -> f64 {
    let sp = ModelSpec::new(1, omega, 0.0, e).unwrap();
    let op = discretize_k_1d(&sp, grid).unwrap();
    let eig = sym_eigen(op.matrix(), op.n()).unwrap();
    eig.values[eig.n() - 1 - level]
}

fn mu0(omega: f64, e: f64, grid: &Grid1D) -> f64 {
    mu_level(omega, e, grid, 0)
}

/// Lowest few eigenvalues of the sector radial block at spectral point `e`.
fn gamma_levels(d: u32, sector: u32, e: f64, order: usize, take: usize) -> (Vec<f64>, usize) {
    let sp = ModelSpec::new(d, 1.0, 0.0, e).unwrap();
    let sec = adaptive_radial_sector(d, sector, 1.0, e, order).unwrap();
    let op = assemble_gamma_sector(&sp, &sec).unwrap();
    let eig = sym_eigen(op.matrix(), op.n()).unwrap();
    (eig.values.iter().take(take).copied().collect(), op.n())
}

fn gamma0(d: u32, e: f64) -> f64 {
    gamma_levels(d, 0, e, 64, 1).0[0]
}

/// Log-space bisection of a sign change; `flo` is `f(lo)`.
fn bisect_log(
    mut lo: f64,
    mut hi: f64,
    mut flo: f64,
    f: &mut dyn FnMut(f64) -> f64,
    rel: f64,
) -> f64 {
    for _ in 0..260 {
        let mid = (lo * hi).sqrt();
        if (hi - lo) <= rel * mid {
            return mid;
        }
        let fm = f(mid);
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    (lo * hi).sqrt()
}

/// 16-node Gauss-Legendre nodes/weights on [-1, 1].
const GL_X: [f64; 8] = [
    0.09501250983763744,
    0.2816035507792589,
    0.45801677765722739,
    0.61787624440264375,
    0.75540440835500303,
    0.86563120238783174,
    0.94457502307323258,
    0.98940093499164993,
];
const GL_W: [f64; 8] = [
    0.18945061045506850,
    0.18260341504492359,
    0.16915651939500254,
    0.14959598881657673,
    0.12462897125553387,
    0.09515851168249278,
    0.06225352393864789,
    0.02715245941175409,
];

fn gl_panel(a: f64, b: f64, f: &mut dyn FnMut(f64) -> f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for k in 0..8 {
        s += GL_W[k] * (f(c - h * GL_X[k]) + f(c + h * GL_X[k]));
    }
    s * h
}

/// Composite quadrature: graded square-root panel on [0, 1] (integrand may
/// carry a t^{-1/2} endpoint factor), then log-spaced panels on [1, t_hi].
fn graded_plus_log(t_hi: f64, per_decade: usize, f: &mut dyn FnMut(f64) -> f64) -> f64 {
    // t = s^2 on [0, 1]: ds-integrand is smooth.
    let mut head = |s: f64| 2.0 * s * f(s * s);
    let mut total = 0.0;
    let mut a = 0.0;
    for k in 1..=8 {
        let b = (k as f64) / 8.0;
        total += gl_panel(a, b, &mut head);
        a = b;
    }
    // log panels on [1, t_hi].
    let decades = t_hi.log10().max(0.0);
    let panels = ((decades * per_decade as f64).ceil() as usize).max(1);
    let step = decades / panels as f64;
    let mut lo = 1.0_f64;
    for k in 1..=panels {
        let hi = 10.0_f64.powf(step * k as f64);
        total += gl_panel(lo, hi, f);
        lo = hi;
    }
    total
}

/// Diagonal-coefficient integrand denominator D(t) = (1+e^{-2t}) t + 1 - e^{-2t}.
fn cap_d(t: f64) -> f64 {
    if t < 1e-8 {
        // series: 4t - 4t^2 + O(t^3)
        return 4.0 * t * (1.0 - t);
    }
    let e2 = (-2.0 * t).exp();
    (1.0 + e2) * t + 1.0 - e2
}

/// Planar diagonal coefficient at the origin, additive constant dropped:
/// (1/4pi) * Int_0^inf [ e^{-t}/(1-e^{-t}) - 4 e^{-lambda t}/D(t) ] dt.
fn a0_2d(lambda: f64, t_hi: f64) -> f64 {
    let mut f = |t: f64| {
        if t < 1e-12 {
            return 1.5 - lambda; // limit of the combined integrand at t -> 0
        }
        let et = (-t).exp();
        et / (1.0 - et) - 4.0 * (-lambda * t).exp() / cap_d(t)
    };
    graded_plus_log(t_hi, 6, &mut f) / (4.0 * PI)
}

/// Spatial diagonal coefficient at the origin, full constant kept:
/// (4pi)^{-3/2} * { 1/2 + Int_0^inf [ e^{-t}/(1-e^{-t})^{3/2} - 8 e^{-lambda t}/D(t)^{3/2} ] dt }.
fn a0_3d(lambda: f64, t_hi: f64) -> f64 {
    let mut f = |t: f64| {
        let et = (-t).exp();
        if t < 1e-12 {
            return 0.0; // combined integrand ~ (7/4 - lambda) t^{-1/2}: head panel handles it
        }
        et / (1.0 - et).powf(1.5) - 8.0 * (-lambda * t).exp() / cap_d(t).powf(1.5)
    };
    let integral = graded_plus_log(t_hi, 6, &mut f);
    (0.5 + integral) / (4.0 * PI).powf(1.5)
}

/// Tail remainder bound for the spatial coefficient: Int_T^inf 8 t^{-3/2} dt.
fn a0_3d_tail(t_hi: f64) -> f64 {
    16.0 / t_hi.sqrt() / (4.0 * PI).powf(1.5)
}

/// Independent Rayleigh quotient of the line charge kernel on the oscillator
/// ground state, via the nu-integral closed form:
///   <psi0|K^lambda|psi0> = Int_0^1 dnu m(nu) sqrt(pi)/sqrt((1/2+a)(1/2+a+2b)),
///   m(nu) = nu^{lambda-1} / (sqrt2 pi sqrt(1-nu^2) sqrt(ln(1/nu))),
///   a = (1-nu)/(2(1+nu)), b = 1/(2 ln(1/nu)) + nu/(1-nu^2).
fn rayleigh_nu(lambda: f64) -> f64 {
    // nu in (0, 1/e]: substitute nu = e^{-t}, t in [1, T]; integrand decays e^{-lambda t}/sqrt(t).
    let mut f_t = |t: f64| {
        let nu = (-t).exp();
        let one_m_nu2 = 1.0 - nu * nu;
        let a = (1.0 - nu) / (2.0 * (1.0 + nu));
        let b = 1.0 / (2.0 * t) + nu / one_m_nu2;
        let m = (-lambda * t).exp() / (std::f64::consts::SQRT_2 * PI * one_m_nu2.sqrt() * t.sqrt());
        m * PI.sqrt() / ((0.5 + a) * (0.5 + a + 2.0 * b)).sqrt()
    };
    let t_hi = (200.0 / lambda).max(1e4);
    let decades = t_hi.log10();
    let panels = (decades * 6.0).ceil() as usize;
    let step = decades / panels as f64;
    let mut total = 0.0;
    let mut lo = 1.0_f64;
    for k in 1..=panels {
        let hi = 10.0_f64.powf(step * k as f64);
        total += gl_panel(lo, hi, &mut f_t);
        lo = hi;
    }
    // nu in [1/e, 1): substitute nu = 1 - s^2; sqrt-kink at nu = 1 smoothed.
    let mut f_s = |s: f64| {
        let nu = 1.0 - s * s;
        let t = -nu.ln();
        let one_m_nu2 = 1.0 - nu * nu;
        let a = (1.0 - nu) / (2.0 * (1.0 + nu));
        let b = 1.0 / (2.0 * t) + nu / one_m_nu2;
        let m = nu.powf(lambda - 1.0) / (std::f64::consts::SQRT_2 * PI * one_m_nu2.sqrt() * t.sqrt());
        2.0 * s * m * PI.sqrt() / ((0.5 + a) * (0.5 + a + 2.0 * b)).sqrt()
    };
    let s_max = (1.0 - (-1.0_f64).exp()).sqrt();
    let mut a = 1e-8_f64; // integrand ~ const near s = 0 after the 2s factor
    for k in 1..=12 {
        let b = s_max * (k as f64) / 12.0;
        total += gl_panel(a, b, &mut f_s);
        a = b;
    }
    total
}

/// Rayleigh quotient of the discretized kernel on the sampled ground state.
fn rayleigh_matrix(lambda: f64, grid: &Grid1D) -> f64 {
    let sp = ModelSpec::new(1, 1.0, 0.0, lambda).unwrap();
    let op = discretize_k_1d(&sp, grid).unwrap();
    let n = op.n();
    let nodes = grid.nodes();
    let weights = grid.weights();
    // psi0(y) = pi^{-1/4} e^{-y^2/2}, sampled with sqrt-weight normalization.
    let mut v: Vec<f64> = (0..n)
        .map(|i| weights[i].sqrt() * (PI.powf(-0.25) * (-0.5 * nodes[i] * nodes[i]).exp()))
        .collect();
    let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= norm;
    }
    op.quadratic_form(&v).unwrap()
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let sections: String = if args.len() > 1 {
        args[1].clone()
    } else {
        "abcdefghi".into()
    };
    let run = |s: char| sections.contains(s);

    // =======================================================================
    if run('a') {
        println!("== A. 2D sector-0 bottom vs small lambda (log-law check) ==");
        let mut prev: Option<(f64, f64)> = None;
        let lams = [
            1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 1e-5, 1e-6, 1e-8, 1e-10, 1e-12, 1e-14,
        ];
        for &lam in &lams {
            let t0 = Instant::now();
            let (vals, n) = gamma_levels(2, 0, lam, 64, 1);
            let g = vals[0];
            let slope = prev.map(|(pl, pg)| (g - pg) / ((lam as f64).ln() - pl.ln()));
            println!(
                "  lambda = {lam:9.3e}  gamma0 = {g:+.9}  n = {n:4}  slope = {}  lambda*g = {:+.6e}  ({:.1?})",
                slope.map_or("      --".into(), |s| format!("{s:8.5}")),
                lam * g,
                t0.elapsed()
            );
            prev = Some((lam, g));
        }
        println!("  -- resolution / route stability --");
        for &lam in &[1e-6_f64, 1e-10] {
            let (v64, n64) = gamma_levels(2, 0, lam, 64, 1);
            let (v96, n96) = gamma_levels(2, 0, lam, 96, 1);
            println!(
                "  lambda = {lam:9.3e}  order64: {:+.9} (n={n64})  order96: {:+.9} (n={n96})",
                v64[0], v96[0]
            );
        }
        for &lam in &[1e-2_f64, 1e-4, 1e-6] {
            let sp = ModelSpec::new(2, 1.0, 0.0, lam).unwrap();
            match default_fourier_sector(&sp).and_then(|sec| {
                let op = assemble_gamma_fourier(&sp, &sec)?;
                let eig = sym_eigen(op.matrix(), op.n())?;
                Ok((eig.values[0], op.n()))
            }) {
                Ok((g, n)) => println!(
                    "  lambda = {lam:9.3e}  fourier route: {g:+.9} (n={n})  position: {:+.9}",
                    gamma0(2, lam)
                ),
                Err(e) => println!("  lambda = {lam:9.3e}  fourier route FAILED: {e}"),
            }
        }
    }

    // =======================================================================
    if run('b') {
        println!("== B. 2D second level of the full operator vs lambda ==");
        for &lam in &[1.0_f64, 1e-1, 1e-2, 1e-3] {
            let (s0, n0) = gamma_levels(2, 0, lam, 64, 2);
            let (s1, n1) = gamma_levels(2, 1, lam, 64, 1);
            let g1 = s0[1].min(s1[0]);
            println!(
                "  lambda = {lam:9.3e}  s0b1 = {:+.9} (n={n0})  s1b0 = {:+.9} (n={n1})  gamma1 = {g1:+.9}",
                s0[1], s1[0]
            );
        }
    }

    // =======================================================================
    if run('c') {
        println!("== C. 2D positive-coupling roots: gamma0(E) = -alpha ==");
        for &alpha in &[0.5_f64, 1.0, 2.0, 3.0, 4.0] {
            let t0 = Instant::now();
            let mut f = |e: f64| gamma0(2, e) + alpha;
            // march down by decades until the bottom branch dives under -alpha
            let mut hi = 1e-1_f64;
            let mut fhi = f(hi);
            if fhi < 0.0 {
                println!("  alpha = {alpha:5.2}: gamma0(0.1)+alpha < 0 already; widen upward");
                continue;
            }
            let mut lo = hi;
            let mut flo = fhi;
            let mut found = false;
            while lo > 1e-15 {
                lo /= 10.0;
                flo = f(lo);
                if flo < 0.0 {
                    found = true;
                    break;
                }
                hi = lo;
                fhi = flo;
            }
            let _ = fhi;
            if !found {
                println!(
                    "  alpha = {alpha:5.2}: no sign change above 1e-15 (f stays {flo:+.4e}); root below grid reach"
                );
                continue;
            }
            let root = bisect_log(lo, hi, flo, &mut f, 1e-7);
            println!(
                "  alpha = {alpha:5.2}:  E0 = {root:.7e}  ln E0 = {:+.5}  ({:.1?})",
                root.ln(),
                t0.elapsed()
            );
        }
    }

    // =======================================================================
    if run('d') {
        println!("== D. 3D sector-0 bottom vs small spectral point ==");
        let mut prev: Option<(f64, f64)> = None;
        for &lam in &[1e-1_f64, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-8] {
            let t0 = Instant::now();
            let (vals, n) = gamma_levels(3, 0, lam, 64, 1);
            let g = vals[0];
            let slope = prev.map(|(pl, pg)| (g - pg) / ((lam as f64).ln() - pl.ln()));
            println!(
                "  lambda = {lam:9.3e}  gamma0 = {g:+.9}  n = {n:4}  slope = {}  ({:.1?})",
                slope.map_or("      --".into(), |s| format!("{s:8.5}")),
                t0.elapsed()
            );
            prev = Some((lam, g));
        }
        println!("  -- spatial diagonal coefficient at the origin (scalar quadrature) --");
        for &lam in &[1e-2_f64, 1e-4, 1e-6, 1e-8, 1e-12] {
            let t_hi = (400.0 / lam).min(1e12);
            let v = a0_3d(lam, t_hi);
            println!(
                "  lambda = {lam:9.3e}  a(0) = {v:+.7}  (tail bound {:.1e})",
                a0_3d_tail(t_hi)
            );
        }
        println!("  -- planar diagonal coefficient at the origin, constant dropped --");
        let mut prev2: Option<(f64, f64)> = None;
        for &lam in &[1e-2_f64, 1e-4, 1e-6, 1e-8, 1e-10] {
            let v = a0_2d(lam, (400.0 / lam).min(1e14));
            let slope = prev2.map(|(pl, pv)| (v - pv) / ((lam as f64).ln() - pl.ln()));
            println!(
                "  lambda = {lam:9.3e}  a(0)+const = {v:+.7}  slope = {}   [1/pi = {:.5}]",
                slope.map_or("      --".into(), |s| format!("{s:8.5}")),
                1.0 / PI,
            );
            prev2 = Some((lam, v));
        }
        println!("  -- 3D second level boundedness --");
        for &lam in &[1e-4_f64, 1e-2, 1.0] {
            let (s0, _) = gamma_levels(3, 0, lam, 64, 2);
            let (s1, _) = gamma_levels(3, 1, lam, 64, 1);
            println!(
                "  lambda = {lam:9.3e}  s0b1 = {:+.9}  s1b0 = {:+.9}  gamma1 = {:+.9}",
                s0[1],
                s1[0],
                s0[1].min(s1[0])
            );
        }
    }

    // =======================================================================
    if run('e') {
        println!("== E. negative-coupling ladders (freeze roots) ==");
        println!("  -- 2D: gamma0(E) = |alpha| --");
        for &target in &[1.0_f64, 2.0, 3.0, 4.0] {
            let t0 = Instant::now();
            let mut f = |e: f64| gamma0(2, e) - target;
            let mut lo = 1.0_f64;
            let mut flo = f(lo);
            let mut hi = lo;
            let mut fhi = flo;
            while fhi < 0.0 && hi < 1e28 {
                lo = hi;
                flo = fhi;
                hi *= 100.0;
                fhi = f(hi);
            }
            let root = bisect_log(lo, hi, flo, &mut f, 1e-9);
            println!(
                "  |alpha| = {target}:  E0 = {root:.9e}  ln E0 = {:.6}  ({:.1?})",
                root.ln(),
                t0.elapsed()
            );
        }
        println!("  -- 3D: gamma0(E) = |alpha| --");
        let mut prev: Option<(f64, f64)> = None;
        for &target in &[0.5_f64, 1.0, 2.0, 4.0, 8.0, 16.0] {
            let t0 = Instant::now();
            let mut f = |e: f64| gamma0(3, e) - target;
            let mut lo = 0.5_f64;
            let mut flo = f(lo);
            let mut hi = lo;
            let mut fhi = flo;
            while fhi < 0.0 && hi < 1e12 {
                lo = hi;
                flo = fhi;
                hi *= 10.0;
                fhi = f(hi);
            }
            let root = bisect_log(lo, hi, flo, &mut f, 1e-9);
            let slope = prev.map(|(pt, pr)| (root.ln() - pr) / ((target as f64).ln() - pt.ln()));
            println!(
                "  |alpha| = {target:5.1}:  E0 = {root:.9e}  ln-slope = {}  ({:.1?})",
                slope.map_or("      --".into(), |s| format!("{s:7.4}")),
                t0.elapsed()
            );
            prev = Some((target, root.ln()));
        }
    }

    // =======================================================================
    if run('f') {
        println!("== F. line-model items ==");
        let g10 = grid_1d(10.0, 304).unwrap();
        let g12 = grid_1d(12.0, 448).unwrap();
        println!("  -- weak coupling: E0 and 2E0/alpha^2 --");
        for &alpha in &[-0.1_f64, -0.05, -0.025] {
            let mut f = |e: f64| 1.0 + alpha * mu0(1.0, e, &g12);
            let mut lo = 1e-6_f64;
            let mut flo = f(lo);
            let mut hi = lo;
            let mut fhi = flo;
            while fhi.signum() == flo.signum() && hi < 10.0 {
                lo = hi;
                flo = fhi;
                hi *= 1.3;
                fhi = f(hi);
            }
            let root = bisect_log(lo, hi, flo, &mut f, 1e-11);
            let ratio = 2.0 * root / (alpha * alpha);
            println!(
                "  alpha = {alpha:7.3}:  E0 = {root:.11e}  2E/a^2 = {ratio:.7}  deficit/(|a|) = {:.5}",
                (1.0 - ratio) / alpha.abs()
            );
        }
        println!("  -- oscillator-dominated limit: |E0 - 1/2| * omega --");
        for &omega in &[10.0_f64, 20.0, 40.0, 80.0] {
            let ap = -1.0 / omega.sqrt();
            let mut f = |e: f64| 1.0 + ap * mu0(1.0, e, &g10);
            let mut lo = 1e-7_f64;
            let mut flo = f(lo);
            let mut hi = lo;
            let mut fhi = flo;
            while fhi.signum() == flo.signum() && hi < 10.0 {
                lo = hi;
                flo = fhi;
                hi *= 1.3;
                fhi = f(hi);
            }
            let root_scaled = bisect_log(lo, hi, flo, &mut f, 1e-11);
            let e0 = omega * root_scaled;
            println!(
                "  omega = {omega:5.1}:  E0 = {e0:.9}  |E0-0.5|*omega = {:9.5}  |E0-0.5|*sqrt(omega) = {:.6}",
                (e0 - 0.5).abs() * omega,
                (e0 - 0.5).abs() * omega.sqrt()
            );
        }
        println!("  -- second line branch at the origin: transition coupling --");
        for &lam in &[1e-6_f64, 1e-8] {
            let m1 = mu_level(1.0, lam, &g12, 1);
            println!(
                "  lambda = {lam:.1e}:  mu1 = {m1:.9}  alpha_transition = 1/mu1 = {:.9}",
                1.0 / m1
            );
        }
        println!("  -- ground-state Rayleigh quotient: nu-integral vs matrix --");
        for &lam in &[1.0_f64, 0.1, 1e-2, 1e-3] {
            let vi = rayleigh_nu(lam);
            let vm = rayleigh_matrix(lam, &g12);
            let m0 = mu0(1.0, lam, &g12);
            let env = 1.0 / (2.0 * lam).sqrt();
            println!(
                "  lambda = {lam:8.4}:  nu-integral = {vi:.9}  matrix = {vm:.9}  (ratio {:.7})  mu0 = {m0:.9}  1/sqrt(2l) = {env:.9}  mu0-env = {:+.5}",
                vi / vm,
                m0 - env
            );
        }
    }

    // =======================================================================
    if run('g') {
        println!("== G. counting scans ==");
        for &alpha in &[-1.0_f64, -2.0, -4.0, -8.0] {
            let t0 = Instant::now();
            match count_bound_states(1, alpha, 1.0, 12) {
                Ok(rep) => println!(
                    "  d=1 alpha={alpha:5.1}: N = {}   [a^2/2 = {:.1}]  ({:.1?})",
                    rep.total,
                    alpha * alpha / 2.0,
                    t0.elapsed()
                ),
                Err(e) => println!("  d=1 alpha={alpha:5.1}: FAILED {e}"),
            }
        }
        for d in [2_u32, 3] {
            let t0 = Instant::now();
            match count_bound_states(d, -2.0, 1.0, 12) {
                Ok(rep) => println!(
                    "  d={d} alpha=-2: N = {} per-sector {:?}  floor = {:.1e}  ({:.1?})",
                    rep.total,
                    rep.per_sector,
                    rep.floor_energy,
                    t0.elapsed()
                ),
                Err(e) => println!("  d={d} alpha=-2: FAILED {e}"),
            }
        }
    }

    // =======================================================================
    if run('h') {
        println!("== H. level tables at unit spectral point ==");
        for d in [2_u32, 3] {
            let t0 = Instant::now();
            match gamma_spectrum(d, 1.0, 1.0, 3, 3) {
                Ok(levels) => {
                    println!("  d = {d}  ({:.1?})", t0.elapsed());
                    for lv in levels.iter().take(8) {
                        println!(
                            "    value = {:+.9}  sector = {}  branch = {}  mult = {}",
                            lv.value, lv.sector, lv.branch, lv.multiplicity
                        );
                    }
                }
                Err(e) => println!("  d = {d}: FAILED {e}"),
            }
        }
    }

    // =======================================================================
    if run('i') {
        println!("== I. production-path timings ==");
        let budget = SolveBudget {
            max_sector: 2,
            max_branches: 4,
            with_samples: false,
        };
        for (d, alpha) in [(2_u32, -1.0_f64), (2, -4.0), (3, -1.0), (3, -16.0)] {
            let t0 = Instant::now();
            match bound_states(d, alpha, 1.0, &budget) {
                Ok(rep) => {
                    let tops: Vec<String> = rep
                        .states
                        .iter()
                        .take(3)
                        .map(|s| format!("E={:.6e} (s{} b{})", s.energy, s.sector, s.branch))
                        .collect();
                    println!(
                        "  d={d} alpha={alpha:5.1}: N = {}  complete = {}  [{}]  ({:.1?})",
                        rep.count,
                        rep.complete,
                        tops.join(", "),
                        t0.elapsed()
                    );
                    for fail in rep.failures.iter().take(4) {
                        println!("    failure: {fail}");
                    }
                }
                Err(e) => println!("  d={d} alpha={alpha:5.1}: FAILED {e}"),
            }
        }
        let t0 = Instant::now();
        match bound_states(1, -3.0, 1.0, &SolveBudget::default()) {
            Ok(rep) => println!(
                "  d=1 alpha=-3.0: N = {}  complete = {}  E0 = {:.9}  ({:.1?})",
                rep.count,
                rep.complete,
                rep.states.first().map_or(f64::NAN, |s| s.energy),
                t0.elapsed()
            ),
            Err(e) => println!("  d=1 alpha=-3.0: FAILED {e}"),
        }
    }

    println!("== oracle complete ==");
}
