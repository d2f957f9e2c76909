//! With `θ > 0` the cells die out and the nutrient settles at
//! `w* = (∫w₀ − ∫∫uF(w))/|Ω|`.

use motility::config::parse_config;
use motility::runner::execute;

const CONFIG: &str = "
[model]
alpha = 1
theta = 0.5
dcoef = 0.1
motility = exponential
gamma0 = 10
gamma1 = 0.1
lambda = 1
response = hill

[grid]
length = 20
cells = 128

[scheme]
dt = 0.01
t_end = 200

[init]
kind = constant_perturbed
base = 0.5, 0.5, 2
amplitude = 0.05
seed = 3
perturb_w = true

[output]
cadence = 1
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = parse_config(CONFIG)?;
    let exe = execute(&cfg, None)?;
    println!("{:>6} {:>12} {:>12} {:>12}", "t", "sup_u", "mass_w", "sup_w");
    for row in exe.series.iter().step_by(20) {
        println!("{:>6.0} {:>12.4e} {:>12.8} {:>12.8}", row.t, row.sup_u, row.mass_w, row.sup_w);
    }
    let a = &exe.asymptotics;
    println!("regime: {}", a.regime);
    println!("predicted w*: {:.10}", a.w_star_pred.unwrap_or(f64::NAN));
    println!("sup |w - w*|: {:.3e}", a.dist_w);
    print!("{}", exe.checks.to_text());
    Ok(())
}
