//! Minimal Stinespring dilation of a random UCP map, checked against the
//! Kraus construction and linked to it by the uniqueness unitary.

use ucp_ergodic::cpmap::{kraus_dilation, minimal_stinespring, stinespring_equivalence};
use ucp_ergodic::linalg::max_abs;
use ucp_ergodic::random::{random_algebra, random_ucp, rng};

fn main() -> ucp_ergodic::Result<()> {
    let mut r = rng(11);
    let alg = random_algebra(&mut r, 3, 3, 14);
    let phi = random_ucp(&mut r, &alg, 3, 2);
    println!("A = ⊕ M_n for n in {:?}, d = {}", alg.blocks(), phi.target_dim());

    let gram = minimal_stinespring(&phi)?;
    let kraus = kraus_dilation(&phi)?;
    println!("dim K = {} (Kraus rank {})", gram.dim(), kraus.dim());
    println!("max |V*ρ(e)V - φ(e)| = {:.2e}", gram.reconstruction_residual());
    println!("|V*V - 1| = {:.2e}", gram.isometry_residual());

    let u = stinespring_equivalence(&gram, &kraus, 1e-8)?;
    let uv = max_abs(&(&u * &gram.v - &kraus.v));
    println!("unitary U: K_gram -> K_kraus with |UV_1 - V_2| = {uv:.2e}");
    Ok(())
}
