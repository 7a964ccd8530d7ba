//! Smoke-drive of the public kernel API: evaluates each kernel family at a
//! representative point and prints the values.  Exists so the library's
//! surface can be exercised end-to-end outside the test harness.

use contact_spectra::kernels::{
    a_lambda, a_tilde, constant_c, g_tilde, green, green_series_1d, hermite_psi, k_kernel,
    mehler, ModelSpec,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let line = ModelSpec::new(1, 1.0, -1.0, 1.0)?;
    let plane = ModelSpec::new(2, 1.5, -2.0, 2.0)?;
    let space = ModelSpec::new(3, 0.8, -2.0, 1.2)?;

    println!("constant_c           = {:.16e}", constant_c());
    println!(
        "hermite_psi(0,1,0)   = {:.16e}",
        hermite_psi(0, 1.0, 0.0)?
    );
    println!(
        "mehler d=1           = {:.16e}",
        mehler(&line, 0.7, &[0.5], &[-0.3])?
    );
    println!(
        "green d=1            = {:.16e}",
        green(&line, &[0.3], &[-0.2], &[-0.5], &[0.7])?
    );
    println!(
        "green_series_1d      = {:.16e}",
        green_series_1d(1.0, 1.0, 400, 0.3, -0.2, -0.5, 0.7)?
    );
    println!(
        "green d=2            = {:.16e}",
        green(&plane, &[0.3, -0.1], &[0.2, 0.4], &[-0.2, 0.5], &[-0.3, 0.1])?
    );
    println!(
        "k_kernel d=3         = {:.16e}",
        k_kernel(&space, &[0.4, -0.2, 0.1], &[-0.1, 0.3, -0.2])?
    );
    println!(
        "a_lambda d=2 (r=1)   = {:.16e}",
        a_lambda(&ModelSpec::new(2, 1.0, 0.0, 1.0)?, 1.0)?
    );
    println!(
        "a_lambda d=3 (r=1)   = {:.16e}",
        a_lambda(&ModelSpec::new(3, 1.0, 0.0, 1.0)?, 1.0)?
    );
    println!(
        "a_tilde  d=2 (k=1)   = {:.16e}",
        a_tilde(&ModelSpec::new(2, 1.0, 0.0, 1.0)?, 1.0)?
    );
    println!(
        "g_tilde  d=2         = {:.16e}",
        g_tilde(&ModelSpec::new(2, 1.0, 0.0, 1.0)?, 0.7, 1.3, 1.0)?
    );

    // A deliberate domain error must surface as Err, not a crash.
    let diag = k_kernel(&plane, &[0.2, 0.2], &[0.2, 0.2]);
    println!("k_kernel on diagonal -> {}", diag.unwrap_err());
    Ok(())
}
