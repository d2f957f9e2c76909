//! Linear stability of the constant state `(4, 4, 0)` on `(0, 20)` for a
//! range of signal diffusivities.

use motility::model::ModelParams;
use motility::stability::{instability_band, stability_report, DEFAULT_N_MAX};

fn main() -> Result<(), motility::Error> {
    let u_star = 4.0;
    let length = 20.0;
    println!("{:>8} {:>10} {:>12} {:>8} {:>8} {:>12} {:>6} {:>6}", "D", "S", "k_max^2", "modes", "fastest", "growth", "con1", "con2");
    for dcoef in [0.001, 0.01, 0.1, 0.5, 1.0, 10.0, 100.0] {
        let params = ModelParams::fig1(dcoef)?;
        let r = stability_report(&params, u_star, length, DEFAULT_N_MAX)?;
        let band = instability_band(&params, u_star)?.map_or("-".to_string(), |k| format!("{k:.4}"));
        let fastest = r.fastest_mode.map_or("-".to_string(), |n| n.to_string());
        let growth = r.fastest_growth.map_or("-".to_string(), |g| format!("{g:.6}"));
        let (c1, c2) = r.conditions.as_ref().map_or(("-", "-"), |c| (yes(c.con1_ok), yes(c.con2_ok)));
        println!("{dcoef:>8} {:>10.5} {band:>12} {:>8} {fastest:>8} {growth:>12} {c1:>6} {c2:>6}", r.s_value, r.modes.len());
    }

    println!();
    print!("{}", stability_report(&ModelParams::fig1(0.1)?, u_star, length, DEFAULT_N_MAX)?.to_text());
    Ok(())
}

fn yes(b: bool) -> &'static str {
    if b { "yes" } else { "no" }
}
