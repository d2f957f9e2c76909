//! With fast signal diffusion the perturbation dies out and the solution
//! approaches `(u*, u*, 0)` with `u*` fixed by the initial masses.
//! `cargo run --release --example convergence_large_d -- [D] [t_end]`.

use motility::runner::{execute, fig1_config, DEFAULT_SEED};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let dcoef = args.first().copied().unwrap_or(100.0);
    let mut cfg = fig1_config(dcoef, DEFAULT_SEED)?;
    cfg.cells = 256;
    cfg.scheme.t_end = args.get(1).copied().unwrap_or(100.0);
    cfg.cadence = 5.0;

    let exe = execute(&cfg, None)?;
    let u_star = exe.u_star();
    println!("u* = {u_star:.12}");
    println!("{:>7} {:>14} {:>14}", "t", "sup_u - u*", "amplitude_u");
    for row in &exe.series {
        println!("{:>7.1} {:>14.6e} {:>14.6e}", row.t, row.sup_u - u_star, row.amplitude_u);
    }
    print!("{}", exe.asymptotics.to_text());
    Ok(())
}
