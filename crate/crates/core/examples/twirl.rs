//! Group twirls on M_2: the Pauli twirl is the completely depolarizing map
//! and the {1, Z} twirl is the diagonal pinching.

use ucp_ergodic::algebra::Representation;
use ucp_ergodic::cpmap::UcpMap;
use ucp_ergodic::fixtures::pauli_z;
use ucp_ergodic::linalg::{c, identity, unit, zeros};
use ucp_ergodic::symmetry::{conjugation_action, is_g_invariant, pauli_unitaries, twirl, FiniteGroup};

fn main() -> ucp_ergodic::Result<()> {
    let rep = Representation::identity(2);
    let m2 = rep.algebra().clone();

    let pauli = twirl(&rep, &pauli_unitaries(), &FiniteGroup::klein())?;
    let trace = UcpMap::from_fn(&m2, 2, |u| if u.i == u.j { identity(2) * c(0.5, 0.0) } else { zeros(2, 2) })?;
    println!("Pauli twirl vs tr(a)/2·1: {:.2e}", pauli.distance(&trace));

    let us = vec![identity(2), pauli_z()];
    let z2 = FiniteGroup::cyclic(2);
    let pinch = twirl(&rep, &us, &z2)?;
    let diag = UcpMap::from_fn(&m2, 2, |u| if u.i == u.j { unit(2, 2, u.i, u.j) } else { zeros(2, 2) })?;
    println!("{{1, Z}} twirl vs pinching: {:.2e}", pinch.distance(&diag));

    let act = conjugation_action(&rep, &us, &z2)?;
    println!("pinching is Z2-invariant: {}", is_g_invariant(&pinch, &act, 1e-12));
    Ok(())
}
