//! Compares time-domain and cascade second harmonics at the sensor.

use nlac::harmonics::{time_domain_spectrum, ExcitationConfig};
use nlac::multiharmonic::cascade_solve;
use nlac::timedomain::StepperConfig;
use nlac::{Formulation, Medium};

fn main() -> nlac::Result<()> {
    let medium = Medium::water(Formulation::PressureWestervelt);
    for amp in [2.5e16, 5e16, 1e17, 2e17] {
        let cfg = ExcitationConfig { amplitude: amp, ..Default::default() };
        let td = time_domain_spectrum(&cfg, &medium, &StepperConfig::default())?;
        let lin = time_domain_spectrum(&cfg, &medium.with_kappa(0.0), &StepperConfig::default())?;
        let stack = cascade_solve(&cfg.harmonic_problem(&medium)?)?;
        let n = td.sensor_node;
        println!(
            "amp {amp:e}: td |u1| {:.5e} |u2| {:.5e} lin |u2| {:.3e}  cascade |u1| {:.5e} |u2| {:.5e}  ratio {:.4}",
            td.amplitudes[0].norm(),
            td.amplitudes[1].norm(),
            lin.amplitudes[1].norm(),
            stack.harmonic(1)[n].norm(),
            stack.harmonic(2)[n].norm(),
            td.amplitudes[1].norm() / stack.harmonic(2)[n].norm()
        );
    }
    Ok(())
}
