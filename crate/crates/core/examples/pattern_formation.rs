//! Pattern formation from a perturbed constant state.
//!
//! ```text
//! cargo run --release --example pattern_formation -- [D] [t_end] [cells]
//! ```
//! Defaults: `D = 0.1`, `t_end = 50`, 512 cells. Writes artifacts under
//! `out/pattern_d{D}`.

use motility::diagnostics::pattern_metrics;
use motility::runner::{execute, fig1_config, write_artifacts, DEFAULT_SEED};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let dcoef = args.first().copied().unwrap_or(0.1);
    let mut cfg = fig1_config(dcoef, DEFAULT_SEED)?;
    cfg.scheme.t_end = args.get(1).copied().unwrap_or(50.0);
    cfg.cells = args.get(2).map_or(512, |&n| n as usize);
    cfg.out_dir = format!("out/pattern_d{dcoef}").into();

    let exe = execute(&cfg, None)?;
    println!("{:>8} {:>12} {:>6} {:>6}", "t", "amplitude_u", "mode", "peaks");
    for snap in &exe.snapshots {
        let m = pattern_metrics(snap.u.values(), &exe.grid);
        let mode = m.dominant_mode.map_or("-".to_string(), |n| n.to_string());
        println!("{:>8.1} {:>12.6} {:>6} {:>6}", snap.t, m.amplitude, mode, m.peak_count);
    }
    if let Ok(report) = &exe.stability {
        println!("predicted fastest mode: {:?}", report.fastest_mode);
    }
    print!("{}", exe.asymptotics.to_text());
    write_artifacts(&exe, &cfg.out_dir)?;
    println!("artifacts in {}", cfg.out_dir.display());
    Ok(())
}
