//! The affine order isomorphism T ↦ φ_T between [0, 1] ⊂ ρ(A)' and maps
//! below φ, and its covariant version.

use ucp_ergodic::cpmap::minimal_stinespring;
use ucp_ergodic::fixtures::{e3_component, e3_map, e3_swap};
use ucp_ergodic::linalg::max_abs;
use ucp_ergodic::radon::{phi_t, random_unit_interval_element, rn_derivative, rn_g, RnSolver};
use ucp_ergodic::random::rng;
use ucp_ergodic::symmetry::CovariantSystem;

fn main() -> ucp_ergodic::Result<()> {
    let phi = e3_map();
    let dil = minimal_stinespring(&phi)?;
    let solver = RnSolver::new(&dil)?;
    let mut r = rng(5);
    for _ in 0..3 {
        let t = random_unit_interval_element(&solver.commutant, &mut r, 0.0, 1.0);
        let psi = phi_t(&dil, &t, 1e-9)?;
        let back = solver.rn_derivative(&psi, 1e-9)?;
        println!("roundtrip |T - rn(φ_T)| = {:.2e}", max_abs(&(&back.t - &t)));
    }

    // ψ = ½ (a ⊕ b ↦ a) is below φ; its derivative is a projection.
    let half_a = e3_component(0).scale(0.5);
    let op = rn_derivative(&dil, &half_a, 1e-9)?;
    println!("rn(½ a) in ρ(A)': {}, 0 ≤ T ≤ 1: {}", op.in_commutant.holds, op.in_unit_interval.holds);

    let sys = CovariantSystem::build(&phi, &e3_swap(), 1e-9)?;
    let cov = rn_g(&sys, &half_a, 1e-9)?;
    println!("under the swap: ψ invariant {}, T covariant {}", cov.psi_invariant.holds, cov.covariant());
    Ok(())
}
