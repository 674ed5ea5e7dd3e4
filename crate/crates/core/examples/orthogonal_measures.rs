//! Orthogonal measures and abelian subalgebras of the commutant, in both
//! directions, on E3 and a random mixture.

use ucp_ergodic::commutant::center;
use ucp_ergodic::fixtures::{e3_algebra, e3_map, e3_swap};
use ucp_ergodic::measures::{covariant_commutant, decompose, decompose_covariant, ergodic_decompose, k_mu, table_is_orthogonal};
use ucp_ergodic::random::{random_block_mixture, rng};
use ucp_ergodic::symmetry::{AlgebraAction, CovariantSystem};

fn main() -> ucp_ergodic::Result<()> {
    let sys = CovariantSystem::build(&e3_map(), &AlgebraAction::trivial(&e3_algebra()), 1e-9)?;
    let b = center(&covariant_commutant(&sys)?)?;
    let dec = decompose(&sys.dilation, &b, 1e-9)?;
    println!("E3 along the center: {} leaves, weights {:?}", dec.measure.len(), dec.weights);
    let table = k_mu(&sys.dilation, &dec.measure, 1e-9)?;
    println!("k_mu is a *-homomorphism: {}", table_is_orthogonal(&table, 1e-9)?);
    println!("B_mu recovers B: {}", table.subalgebra()?.same_span(&b, 1e-8));

    let swapped = CovariantSystem::build(&e3_map(), &e3_swap(), 1e-9)?;
    let inv = decompose_covariant(&swapped, &center(&covariant_commutant(&swapped)?)?, 1e-9)?;
    println!("E3 with swap: {} leaf, G-invariant measure {:?}", inv.measure.len(), inv.g_invariant);

    let mut r = rng(2);
    let alg = ucp_ergodic::algebra::FiniteCStarAlgebra::new(vec![1, 2, 2])?;
    let phi = random_block_mixture(&mut r, &alg, 2, 2);
    let sys = CovariantSystem::build(&phi, &AlgebraAction::trivial(&alg), 1e-9)?;
    let full = ergodic_decompose(&sys, 1e-9, 0)?;
    println!("random mixture: {} leaves, complete {}", full.leaves.len(), full.complete);
    for leaf in &full.leaves {
        println!("  weight {:.4} verdict {}", leaf.weight, leaf.verdict.as_str());
    }
    Ok(())
}
