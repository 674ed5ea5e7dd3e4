//! Seeded samplers for matrices, maps and covariant systems. Everything is
//! driven by a `ChaCha8Rng`, so a seed fixes the output on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{AlgebraElement, FiniteCStarAlgebra, State};
use crate::cpmap::UcpMap;
use crate::linalg::{self, c, identity, zeros, ComplexMatrix};
use crate::symmetry::{pauli_unitaries, AlgebraAction, FiniteGroup};

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries with independent standard normal real and imaginary parts.
pub fn gaussian_matrix(r: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| c(r.sample(StandardNormal), r.sample(StandardNormal)))
}

pub fn random_hermitian(r: &mut impl Rng, n: usize) -> ComplexMatrix {
    linalg::hermitian_part(&gaussian_matrix(r, n, n))
}

/// Haar-distributed unitary (QR of a Gaussian matrix with phase correction).
pub fn random_unitary(r: &mut impl Rng, n: usize) -> ComplexMatrix {
    let qr = gaussian_matrix(r, n, n).qr();
    let mut q = qr.q();
    let rr = qr.r();
    for j in 0..n {
        let d = rr[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// A random block algebra with `dim A <= max_dim`.
pub fn random_algebra(r: &mut impl Rng, max_blocks: usize, max_block: usize, max_dim: usize) -> FiniteCStarAlgebra {
    loop {
        let m = r.random_range(1..=max_blocks.max(1));
        let blocks: Vec<usize> = (0..m).map(|_| r.random_range(1..=max_block.max(1))).collect();
        if blocks.iter().map(|n| n * n).sum::<usize>() <= max_dim {
            return FiniteCStarAlgebra::new(blocks).expect("positive blocks");
        }
    }
}

/// Gaussian blocks.
pub fn random_element(r: &mut impl Rng, algebra: &FiniteCStarAlgebra) -> AlgebraElement {
    let blocks = algebra.blocks().iter().map(|&n| gaussian_matrix(r, n, n)).collect();
    AlgebraElement::new(algebra, blocks).expect("block shapes")
}

/// Density blocks `G G*` of random rank, normalized; often not faithful.
pub fn random_state(r: &mut impl Rng, algebra: &FiniteCStarAlgebra) -> State {
    let mut density: Vec<ComplexMatrix> = algebra
        .blocks()
        .iter()
        .map(|&n| {
            let rank = r.random_range(1..=n);
            let g = gaussian_matrix(r, n, rank);
            &g * g.adjoint()
        })
        .collect();
    let total: f64 = density.iter().map(|d| d.trace().re).sum();
    for d in &mut density {
        *d *= c(1.0 / total, 0.0);
    }
    State::from_density(algebra, density).expect("positive and normalized")
}

/// A CP map with `1..=max_kraus` Gaussian Kraus operators per block.
pub fn random_cp(r: &mut impl Rng, algebra: &FiniteCStarAlgebra, d: usize, max_kraus: usize) -> UcpMap {
    let mut phi = UcpMap::zero(algebra, d);
    for k in 0..algebra.num_blocks() {
        let count = r.random_range(1..=max_kraus.max(1));
        let ops: Vec<ComplexMatrix> = (0..count).map(|_| gaussian_matrix(r, algebra.block_size(k), d)).collect();
        phi = phi.add(&UcpMap::from_kraus(algebra, d, k, &ops).expect("shapes")).expect("same shape");
    }
    phi
}

/// Normalizes a CP map with invertible `φ(1)` to `φ(1)^{-1/2} φ(·) φ(1)^{-1/2}`.
pub fn normalize_unital(phi: &UcpMap) -> UcpMap {
    let s = linalg::inv_sqrt_pd(&phi.apply(&phi.algebra().unit()));
    UcpMap::new(phi.algebra(), phi.target_dim(), phi.images().iter().map(|m| &s * m * &s).collect()).expect("shapes")
}

/// Resamples until `φ(1)` is well conditioned, then normalizes.
pub fn random_ucp(r: &mut impl Rng, algebra: &FiniteCStarAlgebra, d: usize, max_kraus: usize) -> UcpMap {
    let mut extra = 0;
    loop {
        let phi = random_cp(r, algebra, d, max_kraus + extra / 4);
        let (vals, _) = linalg::eigh(&phi.apply(&algebra.unit()));
        if vals[0] > 1e-3 * vals[vals.len() - 1] {
            return normalize_unital(&phi);
        }
        extra += 1;
    }
}

/// `a ↦ Σ_k t_k ψ_k(a_k)` with random UCP `ψ_k` on single blocks and random
/// weights; such maps always split orthogonally along the blocks.
pub fn random_block_mixture(r: &mut impl Rng, algebra: &FiniteCStarAlgebra, d: usize, max_kraus: usize) -> UcpMap {
    let raw: Vec<f64> = (0..algebra.num_blocks()).map(|_| r.random_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut phi = UcpMap::zero(algebra, d);
    for (k, w) in raw.iter().enumerate() {
        let n = algebra.block_size(k);
        let least = d.div_ceil(n);
        let count = r.random_range(least..=max_kraus.max(least));
        let ops: Vec<ComplexMatrix> = (0..count).map(|_| gaussian_matrix(r, n, d)).collect();
        let psi = normalize_unital(&UcpMap::from_kraus(algebra, d, k, &ops).expect("shapes"));
        phi = phi.add(&psi.scale(w / total)).expect("same shape");
    }
    phi
}

/// Group average `(1/|G|) Σ_g φ ∘ τ_g`, which is G-invariant.
pub fn average_over_group(phi: &UcpMap, act: &AlgebraAction) -> UcpMap {
    let order = act.group().order();
    UcpMap::from_fn(phi.algebra(), phi.target_dim(), |u| {
        (0..order).fold(zeros(phi.target_dim(), phi.target_dim()), |acc, g| acc + phi.apply(&act.apply_unit(g, u)))
            * c(1.0 / order as f64, 0.0)
    })
    .expect("shapes")
}

/// Inner `Z_m` action: block `k` is conjugated by `W_k^g` with `W_k^m = 1`.
pub fn random_cyclic_action(r: &mut impl Rng, algebra: &FiniteCStarAlgebra, m: usize) -> AlgebraAction {
    let gens: Vec<ComplexMatrix> = algebra
        .blocks()
        .iter()
        .map(|&n| {
            let u = random_unitary(r, n);
            let phases = nalgebra::DVector::from_iterator(
                n,
                (0..n).map(|_| c(0.0, 2.0 * std::f64::consts::PI * r.random_range(0..m) as f64 / m as f64).exp()),
            );
            &u * ComplexMatrix::from_diagonal(&phases) * u.adjoint()
        })
        .collect();
    let unitaries = (0..m)
        .map(|g| gens.iter().map(|w| (0..g).fold(identity(w.nrows()), |acc, _| acc * w)).collect())
        .collect();
    AlgebraAction::inner(&FiniteGroup::cyclic(m), algebra, unitaries).expect("shapes")
}

/// `Z_2` exchanging the first two blocks (which must have equal size) and
/// twisting them by `W` and `W*`.
pub fn random_swap_action(r: &mut impl Rng, algebra: &FiniteCStarAlgebra) -> Option<AlgebraAction> {
    if algebra.num_blocks() < 2 || algebra.block_size(0) != algebra.block_size(1) {
        return None;
    }
    let n = algebra.block_size(0);
    let w = random_unitary(r, n);
    let m = algebra.num_blocks();
    let ids: Vec<ComplexMatrix> = algebra.blocks().iter().map(|&k| identity(k)).collect();
    let mut twisted = ids.clone();
    twisted[0] = w.clone();
    twisted[1] = w.adjoint();
    let mut perm: Vec<usize> = (0..m).collect();
    perm.swap(0, 1);
    AlgebraAction::new(&FiniteGroup::cyclic(2), algebra, vec![(0..m).collect(), perm], vec![ids, twisted]).ok()
}

/// The Pauli (Klein-group) action on every `M_2` block of an algebra made of
/// `M_2` blocks.
pub fn pauli_action(algebra: &FiniteCStarAlgebra) -> Option<AlgebraAction> {
    if algebra.blocks().iter().any(|&n| n != 2) {
        return None;
    }
    let paulis = pauli_unitaries();
    let unitaries = paulis.iter().map(|p| vec![p.clone(); algebra.num_blocks()]).collect();
    AlgebraAction::inner(&FiniteGroup::klein(), algebra, unitaries).ok()
}

/// A random G-invariant UCP map together with its action, with minimal
/// dilation dimension at most `max_k`. Cycles through trivial, cyclic, swap
/// and Pauli symmetry according to `kind`.
pub fn random_invariant_pair(r: &mut impl Rng, kind: usize, max_k: usize) -> (UcpMap, AlgebraAction) {
    loop {
        let (alg, act) = match kind % 4 {
            0 => {
                let alg = random_algebra(r, 2, 3, 9);
                let act = AlgebraAction::trivial(&alg);
                (alg, act)
            }
            1 => {
                let alg = random_algebra(r, 2, 2, 8);
                let m = r.random_range(2..=3);
                let act = random_cyclic_action(r, &alg, m);
                (alg, act)
            }
            2 => {
                let n = r.random_range(1..=2);
                let extra = r.random_range(0..=1);
                let mut blocks = vec![n, n];
                if extra == 1 {
                    blocks.push(1);
                }
                let alg = FiniteCStarAlgebra::new(blocks).expect("positive");
                let act = random_swap_action(r, &alg).expect("equal leading blocks");
                (alg, act)
            }
            _ => {
                let alg = FiniteCStarAlgebra::new(vec![2; r.random_range(1..=2)]).expect("positive");
                let act = pauli_action(&alg).expect("M_2 blocks");
                (alg, act)
            }
        };
        let d = r.random_range(1..=2);
        let base = if r.random_bool(0.5) { random_block_mixture(r, &alg, d, 2) } else { random_ucp(r, &alg, d, 2) };
        let phi = average_over_group(&base, &act);
        let dim_k: usize = phi
            .choi_blocks()
            .iter()
            .enumerate()
            .map(|(k, b)| alg.block_size(k) * linalg::rank(b))
            .sum();
        if dim_k <= max_k {
            return (phi, act);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetry::is_g_invariant;

    #[test]
    fn unitary_is_unitary() {
        let mut r = rng(3);
        let u = random_unitary(&mut r, 4);
        assert!(linalg::max_abs(&(u.adjoint() * &u - identity(4))) < 1e-12);
    }

    #[test]
    fn random_ucp_is_ucp() {
        let mut r = rng(5);
        let alg = random_algebra(&mut r, 3, 3, 20);
        let phi = random_ucp(&mut r, &alg, 3, 3);
        assert!(phi.is_ucp(1e-10));
    }

    #[test]
    fn invariant_pairs_are_invariant() {
        let mut r = rng(11);
        for kind in 0..8 {
            let (phi, act) = random_invariant_pair(&mut r, kind, 12);
            assert!(act.validate(1e-10).valid, "kind {kind}");
            assert!(phi.is_ucp(1e-9));
            assert!(is_g_invariant(&phi, &act, 1e-10));
        }
    }
}
