//! Commutants of dilations, their centers and maximal abelian subalgebras.

use ucp_ergodic::commutant::{center, commutant, minimal_projections, random_masa};
use ucp_ergodic::fixtures::{e3_algebra, e3_map, e3_swap};
use ucp_ergodic::linalg::identity;
use ucp_ergodic::measures::covariant_commutant;
use ucp_ergodic::symmetry::{AlgebraAction, CovariantSystem};

fn main() -> ucp_ergodic::Result<()> {
    let plain = CovariantSystem::build(&e3_map(), &AlgebraAction::trivial(&e3_algebra()), 1e-9)?;
    let rho = commutant(plain.dim(), &plain.rep().generators())?;
    println!("E3: dim K = {}, dim ρ(A)' = {}, center dim = {}", plain.dim(), rho.dim(), center(&rho)?.dim());
    for p in minimal_projections(&rho, 1e-9)? {
        println!("  minimal projection of rank {:.0}", p.trace().re);
    }

    let swapped = CovariantSystem::build(&e3_map(), &e3_swap(), 1e-9)?;
    let cov = covariant_commutant(&swapped)?;
    println!("E3 with swap: dim {{ρ(A) ∪ U(G)}}' = {}", cov.dim());

    // The commutant of the scalars is all of M_4, whose MASAs have dim 4.
    let full = commutant(4, &[identity(4)])?;
    let masa = random_masa(&full, 3)?;
    println!("MASA of M_4: dim {}, abelian {}", masa.dim(), masa.is_abelian(1e-9));
    Ok(())
}
