//! Small reference systems with known answers, shared by tests, examples
//! and the acceptance suite.

use crate::algebra::{FiniteCStarAlgebra, Representation, State};
use crate::cpmap::UcpMap;
use crate::ergodic::Verdict;
use crate::linalg::{c, identity, unit, zeros, ComplexMatrix};
use crate::symmetry::{conjugation_action, pauli_unitaries, twirl, AlgebraAction, FiniteGroup};

/// A G-invariant UCP map, its action and the expected ergodicity verdict.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub phi: UcpMap,
    pub action: AlgebraAction,
    pub expected: Verdict,
}

/// `M_2 ⊕ M_2`.
pub fn e3_algebra() -> FiniteCStarAlgebra {
    FiniteCStarAlgebra::new(vec![2, 2]).expect("blocks")
}

/// `a ⊕ b ↦ (a + b)/2` on `M_2 ⊕ M_2`.
pub fn e3_map() -> UcpMap {
    UcpMap::from_fn(&e3_algebra(), 2, |u| unit(2, 2, u.i, u.j) * c(0.5, 0.0)).expect("shapes")
}

/// `a ⊕ b ↦ a` (`k = 0`) or `a ⊕ b ↦ b` (`k = 1`).
pub fn e3_component(k: usize) -> UcpMap {
    UcpMap::from_fn(&e3_algebra(), 2, |u| if u.block == k { unit(2, 2, u.i, u.j) } else { zeros(2, 2) }).expect("shapes")
}

/// `Z_2` exchanging the two summands.
pub fn e3_swap() -> AlgebraAction {
    AlgebraAction::block_swap(&e3_algebra(), 0, 1).expect("two blocks")
}

/// The uniform state on `C^3`.
pub fn e2_state() -> State {
    State::from_weights(&[1.0 / 3.0; 3]).expect("weights")
}

/// `Z_3` cyclically permuting the three points of `C^3`.
pub fn e2_rotation() -> AlgebraAction {
    let alg = FiniteCStarAlgebra::diagonal(3);
    let perms = (0..3).map(|g| (0..3).map(|q| (q + g) % 3).collect()).collect();
    let ones = vec![vec![identity(1); 3]; 3];
    AlgebraAction::new(&FiniteGroup::cyclic(3), &alg, perms, ones).expect("rotation")
}

/// The Pauli twirl `a ↦ tr(a)/2 · 1` with the Klein group acting by
/// conjugation with `{1, X, Y, Z}`.
pub fn e4() -> (UcpMap, AlgebraAction) {
    let rep = Representation::identity(2);
    let g = FiniteGroup::klein();
    let phi = twirl(&rep, &pauli_unitaries(), &g).expect("unitaries");
    let act = conjugation_action(&rep, &pauli_unitaries(), &g).expect("inner action");
    (phi, act)
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]))
}

/// The diagonal pinching on `M_2` (twirl over `{1, Z}`) with `Z_2` acting
/// by conjugation with `Z`.
pub fn e5() -> (UcpMap, AlgebraAction) {
    let rep = Representation::identity(2);
    let g = FiniteGroup::cyclic(2);
    let us = vec![identity(2), pauli_z()];
    let phi = twirl(&rep, &us, &g).expect("unitaries");
    let act = conjugation_action(&rep, &us, &g).expect("inner action");
    (phi, act)
}

/// E1 through E5 with every group setting that has a known verdict.
pub fn all() -> Vec<Fixture> {
    let m2 = FiniteCStarAlgebra::full(2);
    let (e4_phi, e4_act) = e4();
    let (e5_phi, e5_act) = e5();
    let e2 = UcpMap::from_state(&e2_state());
    vec![
        Fixture { name: "E1 identity on M2", phi: UcpMap::identity(2), action: AlgebraAction::trivial(&m2), expected: Verdict::Ergodic },
        Fixture { name: "E2 uniform state, trivial G", phi: e2.clone(), action: AlgebraAction::trivial(e2.algebra()), expected: Verdict::NotErgodic },
        Fixture { name: "E2 uniform state, Z3", phi: e2, action: e2_rotation(), expected: Verdict::Ergodic },
        Fixture { name: "E3 trivial G", phi: e3_map(), action: AlgebraAction::trivial(&e3_algebra()), expected: Verdict::NotErgodic },
        Fixture { name: "E3 block swap", phi: e3_map(), action: e3_swap(), expected: Verdict::Ergodic },
        Fixture { name: "E4 Pauli twirl, Klein group", phi: e4_phi, action: e4_act, expected: Verdict::Ergodic },
        Fixture { name: "E5 pinching, trivial G", phi: e5_phi.clone(), action: AlgebraAction::trivial(&m2), expected: Verdict::NotErgodic },
        Fixture { name: "E5 pinching, Z2", phi: e5_phi, action: e5_act, expected: Verdict::Ergodic },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ergodic::certify;
    use crate::symmetry::{is_g_invariant, CovariantSystem};

    #[test]
    fn fixtures_are_invariant_and_certified() {
        for f in all() {
            assert!(f.phi.is_ucp(1e-12), "{}", f.name);
            assert!(f.action.validate(1e-12).valid, "{}", f.name);
            assert!(is_g_invariant(&f.phi, &f.action, 1e-12), "{}", f.name);
            let sys = CovariantSystem::build(&f.phi, &f.action, 1e-9).unwrap();
            let cert = certify(&sys, 1e-9).unwrap();
            assert_eq!(cert.verdict, f.expected, "{}", f.name);
            assert_eq!(cert.criterion4, Some(f.expected == Verdict::Ergodic), "{}", f.name);
        }
    }
}
