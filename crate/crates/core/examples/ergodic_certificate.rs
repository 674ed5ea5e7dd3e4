//! Ergodicity certificates for every reference fixture, with the convex
//! split produced when a map is not extreme.

use ucp_ergodic::ergodic::certify;
use ucp_ergodic::fixtures::all;
use ucp_ergodic::symmetry::CovariantSystem;

fn main() -> ucp_ergodic::Result<()> {
    for f in all() {
        let sys = CovariantSystem::build(&f.phi, &f.action, 1e-9)?;
        let cert = certify(&sys, 1e-9)?;
        print!("{:<32} {:<12} dim C = {}", f.name, cert.verdict.as_str(), cert.commutant_dim);
        if let Some(s) = &cert.split {
            print!("  split t = {} with separation {:.3}", s.t, s.separation);
        }
        println!();
    }
    Ok(())
}
