//! Lifting ω = (½, ½) on C ⊕ C to M_2(C ⊕ C), with and without the swap.

use ucp_ergodic::algebra::{FiniteCStarAlgebra, State};
use ucp_ergodic::ergodic::is_g_ergodic;
use ucp_ergodic::lift::{classical_decompose, lift, lift_measure, state_commutant, LiftKind};
use ucp_ergodic::symmetry::AlgebraAction;

fn main() -> ucp_ergodic::Result<()> {
    let omega = State::from_weights(&[0.5, 0.5])?;
    let c2 = FiniteCStarAlgebra::diagonal(2);
    let swap = AlgebraAction::block_swap(&c2, 0, 1)?;
    for (name, act) in [("trivial", AlgebraAction::trivial(&c2)), ("swap", swap)] {
        for kind in [LiftKind::Full, LiftKind::Diagonal] {
            let sys = lift(&omega, 2, &act, kind, 1e-9)?;
            let b = state_commutant(&sys)?;
            let states = classical_decompose(&omega, &sys.u_omega, &b, 1e-9)?;
            let lifted = lift_measure(&sys, &states, 1e-9)?;
            let verdict = is_g_ergodic(&sys.canonical, 1e-9)?.verdict;
            println!(
                "{name:<8} {:<5} dim K = {}  points = {}  orthogonal = {}  block residual = {:.1e}  {}",
                kind.as_str(),
                sys.canonical.dim(),
                lifted.measure.len(),
                lifted.orthogonal,
                lifted.block_diagonal_residual,
                verdict.as_str()
            );
        }
    }
    Ok(())
}
