//! Prints the growth rate `Re ρ₊(k²)` as CSV, with the admissible Neumann
//! modes marked. `cargo run --example dispersion_curve -- [D] [l]`.

use motility::model::ModelParams;
use motility::stability::{admissible_modes, dispersion_at, instability_band, mode_k_sq, DEFAULT_N_MAX};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let dcoef = args.first().copied().unwrap_or(0.1);
    let length = args.get(1).copied().unwrap_or(20.0);
    let params = ModelParams::fig1(dcoef)?;
    let u_c = 4.0;

    let band = instability_band(&params, u_c)?;
    let k_hi = band.map_or(10.0, |b| 1.25 * b);
    println!("k_sq,re_rho_plus,im_rho_plus,rho_w,mode");
    for i in 0..=200 {
        let k_sq = k_hi * i as f64 / 200.0;
        let p = dispersion_at(k_sq, &params, u_c)?;
        println!("{k_sq:.6},{:.8},{:.8},{:.8},", p.rho_plus.re, p.rho_plus.im, p.rho_w);
    }
    for n in admissible_modes(band, length, DEFAULT_N_MAX) {
        let k_sq = mode_k_sq(n, length);
        let p = dispersion_at(k_sq, &params, u_c)?;
        println!("{k_sq:.6},{:.8},{:.8},{:.8},{n}", p.rho_plus.re, p.rho_plus.im, p.rho_w);
    }
    Ok(())
}
