//! Prints the relaxation-time sweep table for the water channel.

use nlac::asymptotics::{default_tau_values, run_sweep, water_channel, SweepConfig, SweepParameter};

fn main() -> nlac::Result<()> {
    let base = water_channel(251, 800)?;
    let cfg = SweepConfig::new(SweepParameter::Tau, default_tau_values(), base);
    let start = std::time::Instant::now();
    let report = run_sweep(&cfg)?;
    for r in &report.rows {
        println!(
            "tau = {:.4e}  C(H1) {:.4e}  XbarW {:.4e}",
            r.value,
            r.rel_err_c_h1.unwrap_or(f64::NAN),
            r.rel_err_xbar_w.unwrap_or(f64::NAN)
        );
    }
    println!("monotone: {}  elapsed {:.2?}", report.c_h1_monotone, start.elapsed());
    Ok(())
}
