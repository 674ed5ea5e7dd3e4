//! Finite groups acting on `A` by *-automorphisms, G-invariance of maps, the
//! covariance unitaries `U_φ(g)` on a minimal dilation, and the twirl.

use crate::algebra::{AlgebraElement, FiniteCStarAlgebra, MatrixUnit, Representation, ValidationReport};
use crate::cpmap::{minimal_stinespring, StinespringDilation, UcpMap};
use crate::error::{consistency, domain, shape, Result};
use crate::linalg::{self, c, identity, max_abs, ComplexMatrix};

/// A finite group given by its Cayley table, `cayley[g][h] = g h`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    cayley: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<usize>,
}

impl FiniteGroup {
    /// Validates the table: closure, identity, inverses and associativity.
    pub fn new(cayley: Vec<Vec<usize>>) -> Result<Self> {
        let order = cayley.len();
        if order == 0 {
            return Err(shape("a group needs at least one element"));
        }
        if cayley.iter().any(|row| row.len() != order) {
            return Err(shape("Cayley table is not square"));
        }
        if cayley.iter().flatten().any(|&x| x >= order) {
            return Err(domain("Cayley table entry out of range"));
        }
        let identity = (0..order)
            .find(|&e| (0..order).all(|g| cayley[e][g] == g && cayley[g][e] == g))
            .ok_or_else(|| domain("Cayley table has no identity"))?;
        let mut inverses = Vec::with_capacity(order);
        for (g, row) in cayley.iter().enumerate() {
            let inv = (0..order)
                .find(|&h| row[h] == identity && cayley[h][g] == identity)
                .ok_or_else(|| domain(format!("element {g} has no inverse")))?;
            inverses.push(inv);
        }
        for a in 0..order {
            for b in 0..order {
                for d in 0..order {
                    if cayley[cayley[a][b]][d] != cayley[a][cayley[b][d]] {
                        return Err(domain(format!("Cayley table is not associative at ({a}, {b}, {d})")));
                    }
                }
            }
        }
        Ok(Self { order, cayley, identity, inverses })
    }

    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    pub fn cyclic(m: usize) -> Self {
        let m = m.max(1);
        Self::new((0..m).map(|g| (0..m).map(|h| (g + h) % m).collect()).collect()).expect("cyclic table")
    }

    /// `G × H` with element `(g, h)` at index `g |H| + h`.
    pub fn product(a: &Self, b: &Self) -> Self {
        let n = b.order;
        let order = a.order * n;
        let cayley =
            (0..order).map(|x| (0..order).map(|y| a.mul(x / n, y / n) * n + b.mul(x % n, y % n)).collect()).collect();
        Self::new(cayley).expect("product of groups")
    }

    /// `Z_2 × Z_2`.
    pub fn klein() -> Self {
        Self::product(&Self::cyclic(2), &Self::cyclic(2))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn cayley(&self) -> &[Vec<usize>] {
        &self.cayley
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.inverses[g]
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.cayley[g][h]
    }
}

/// `τ_g(a)_k = W_g^{(k)} a_{π_g^{-1}(k)} W_g^{(k)*}`.
///
/// `perms[g][q]` is the block that block `q` moves to; `unitaries[g][k]` is
/// the unitary applied in the destination block `k`.
#[derive(Clone, Debug)]
pub struct AlgebraAction {
    group: FiniteGroup,
    algebra: FiniteCStarAlgebra,
    perms: Vec<Vec<usize>>,
    unitaries: Vec<Vec<ComplexMatrix>>,
}

impl AlgebraAction {
    /// Checks shapes only; use [`AlgebraAction::validate`] for the algebraic laws.
    pub fn new(
        group: &FiniteGroup,
        algebra: &FiniteCStarAlgebra,
        perms: Vec<Vec<usize>>,
        unitaries: Vec<Vec<ComplexMatrix>>,
    ) -> Result<Self> {
        let m = algebra.num_blocks();
        if perms.len() != group.order() || unitaries.len() != group.order() {
            return Err(shape(format!("action needs one entry per group element ({})", group.order())));
        }
        for (g, (p, ws)) in perms.iter().zip(&unitaries).enumerate() {
            if p.len() != m || ws.len() != m {
                return Err(shape(format!("element {g}: expected {m} permutation entries and unitaries")));
            }
            let mut seen = vec![false; m];
            for (q, &k) in p.iter().enumerate() {
                if k >= m || seen[k] {
                    return Err(shape(format!("element {g}: block map is not a permutation")));
                }
                seen[k] = true;
                if algebra.block_size(k) != algebra.block_size(q) {
                    return Err(shape(format!("element {g}: block {q} moved to a block of different size")));
                }
            }
            for (k, w) in ws.iter().enumerate() {
                let n = algebra.block_size(k);
                if w.shape() != (n, n) {
                    return Err(shape(format!("element {g}: unitary for block {k} must be {n}x{n}")));
                }
            }
        }
        Ok(Self { group: group.clone(), algebra: algebra.clone(), perms, unitaries })
    }

    pub fn trivial(algebra: &FiniteCStarAlgebra) -> Self {
        Self::inner(&FiniteGroup::trivial(), algebra, vec![algebra.blocks().iter().map(|&n| identity(n)).collect()])
            .expect("identity action")
    }

    /// An action fixing every block, conjugating block `k` by `unitaries[g][k]`.
    pub fn inner(group: &FiniteGroup, algebra: &FiniteCStarAlgebra, unitaries: Vec<Vec<ComplexMatrix>>) -> Result<Self> {
        let perms = vec![(0..algebra.num_blocks()).collect(); group.order()];
        Self::new(group, algebra, perms, unitaries)
    }

    /// `Z_2` exchanging blocks `k1` and `k2` (identity unitaries).
    pub fn block_swap(algebra: &FiniteCStarAlgebra, k1: usize, k2: usize) -> Result<Self> {
        let m = algebra.num_blocks();
        if k1 >= m || k2 >= m {
            return Err(shape("block index out of range"));
        }
        let mut swap: Vec<usize> = (0..m).collect();
        swap.swap(k1, k2);
        let ids: Vec<ComplexMatrix> = algebra.blocks().iter().map(|&n| identity(n)).collect();
        Self::new(&FiniteGroup::cyclic(2), algebra, vec![(0..m).collect(), swap], vec![ids.clone(), ids])
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn algebra(&self) -> &FiniteCStarAlgebra {
        &self.algebra
    }

    pub fn perm(&self, g: usize) -> &[usize] {
        &self.perms[g]
    }

    pub fn unitaries(&self, g: usize) -> &[ComplexMatrix] {
        &self.unitaries[g]
    }

    /// `τ_g(e_ij^{(q)}) = W e_ij W*` placed in block `π_g(q)`.
    pub fn apply_unit(&self, g: usize, u: MatrixUnit) -> AlgebraElement {
        let k = self.perms[g][u.block];
        let n = self.algebra.block_size(k);
        let w = &self.unitaries[g][k];
        let mut blocks: Vec<ComplexMatrix> = self.algebra.blocks().iter().map(|&m| linalg::zeros(m, m)).collect();
        blocks[k] = w * linalg::unit(n, n, u.i, u.j) * w.adjoint();
        AlgebraElement::new(&self.algebra, blocks).expect("consistent shapes")
    }

    pub fn apply(&self, g: usize, a: &AlgebraElement) -> AlgebraElement {
        let mut blocks: Vec<ComplexMatrix> = self.algebra.blocks().iter().map(|&m| linalg::zeros(m, m)).collect();
        for (q, b) in a.blocks().iter().enumerate() {
            let k = self.perms[g][q];
            let w = &self.unitaries[g][k];
            blocks[k] = w * b * w.adjoint();
        }
        AlgebraElement::new(&self.algebra, blocks).expect("consistent shapes")
    }

    /// Each `τ_g` is unital, multiplicative and *-preserving, and
    /// `τ_g ∘ τ_h = τ_{gh}` on matrix units. Unitaries are never compared,
    /// so projective families are accepted.
    pub fn validate(&self, tol: f64) -> ValidationReport {
        let units = self.algebra.matrix_units();
        let one = self.algebra.unit();
        let (mut unital, mut mult, mut star, mut comp) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
        for g in 0..self.group.order() {
            unital = unital.max(self.apply(g, &one).max_distance(&one));
            let images: Vec<AlgebraElement> = units.iter().map(|&u| self.apply_unit(g, u)).collect();
            for (x, &u) in units.iter().enumerate() {
                star = star.max(images[x].adjoint().max_distance(&images[self.algebra.index_of(u.adjoint())]));
                for (y, &v) in units.iter().enumerate() {
                    let prod = images[x].mul(&images[y]).expect("same algebra");
                    let expect = match u.times(v) {
                        Some(w) => images[self.algebra.index_of(w)].clone(),
                        None => self.algebra.zero(),
                    };
                    mult = mult.max(prod.max_distance(&expect));
                }
            }
            for h in 0..self.group.order() {
                let gh = self.group.mul(g, h);
                for &u in &units {
                    let lhs = self.apply(g, &self.apply_unit(h, u));
                    comp = comp.max(lhs.max_distance(&self.apply_unit(gh, u)));
                }
            }
        }
        ValidationReport::from_checks(
            tol,
            vec![
                ("unitality".into(), unital),
                ("multiplicativity".into(), mult),
                ("adjoint".into(), star),
                ("composition".into(), comp),
            ],
        )
    }
}

/// `max_g max_e ‖φ(τ_g(e)) - φ(e)‖`.
pub fn g_invariance_defect(phi: &UcpMap, act: &AlgebraAction) -> f64 {
    let mut worst = 0.0_f64;
    for g in 0..act.group().order() {
        for u in phi.algebra().matrix_units() {
            worst = worst.max(max_abs(&(phi.apply(&act.apply_unit(g, u)) - phi.image(u))));
        }
    }
    worst
}

pub fn is_g_invariant(phi: &UcpMap, act: &AlgebraAction, tol: f64) -> bool {
    g_invariance_defect(phi, act) <= tol
}

/// A G-invariant map with its minimal dilation and covariance unitaries.
#[derive(Clone, Debug)]
pub struct CovariantSystem {
    pub phi: UcpMap,
    pub dilation: StinespringDilation,
    pub action: AlgebraAction,
    pub u: Vec<ComplexMatrix>,
}

/// Residuals of the defining relations of a [`CovariantSystem`].
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceResiduals {
    pub fixes_v: f64,
    pub covariance: f64,
    pub homomorphism: f64,
    pub identity: f64,
    pub unitarity: f64,
}

impl CovarianceResiduals {
    pub fn max(&self) -> f64 {
        [self.fixes_v, self.covariance, self.homomorphism, self.identity, self.unitarity].into_iter().fold(0.0, f64::max)
    }
}

impl CovariantSystem {
    /// Minimal dilation plus covariance unitaries.
    pub fn build(phi: &UcpMap, action: &AlgebraAction, tol: f64) -> Result<Self> {
        let dilation = minimal_stinespring(phi)?;
        covariance_unitaries(phi, &dilation, action, tol)
    }

    pub fn dim(&self) -> usize {
        self.dilation.dim()
    }

    pub fn group(&self) -> &FiniteGroup {
        self.action.group()
    }

    pub fn rep(&self) -> &Representation {
        &self.dilation.rep
    }

    pub fn v(&self) -> &ComplexMatrix {
        &self.dilation.v
    }

    /// Generators of `{ρ(A) ∪ U(G)}`.
    pub fn generators(&self) -> Vec<ComplexMatrix> {
        let mut gens = self.dilation.rep.generators();
        gens.extend(self.u.iter().cloned());
        gens
    }

    pub fn residuals(&self) -> CovarianceResiduals {
        let k = self.dim();
        let g = self.group();
        let mut r = CovarianceResiduals { fixes_v: 0.0, covariance: 0.0, homomorphism: 0.0, identity: 0.0, unitarity: 0.0 };
        for (x, ux) in self.u.iter().enumerate() {
            r.fixes_v = r.fixes_v.max(max_abs(&(ux * self.v() - self.v())));
            r.unitarity = r.unitarity.max(max_abs(&(ux.adjoint() * ux - identity(k))));
            for e in self.phi.algebra().matrix_units() {
                let lhs = ux * self.rep().image(e) * ux.adjoint();
                let rhs = self.rep().apply(&self.action.apply_unit(x, e));
                r.covariance = r.covariance.max(max_abs(&(lhs - rhs)));
            }
            for (y, uy) in self.u.iter().enumerate() {
                r.homomorphism = r.homomorphism.max(max_abs(&(ux * uy - &self.u[g.mul(x, y)])));
            }
        }
        r.identity = max_abs(&(&self.u[g.identity()] - identity(k)));
        r
    }
}

/// `U_g` on the spanning set: `ρ(e)V f_p ↦ ρ(τ_g(e))V f_p`, extended linearly
/// and verified afterwards.
pub fn covariance_unitaries(
    phi: &UcpMap,
    dilation: &StinespringDilation,
    action: &AlgebraAction,
    tol: f64,
) -> Result<CovariantSystem> {
    if action.algebra() != phi.algebra() {
        return Err(shape("action and map live on different algebras"));
    }
    let defect = g_invariance_defect(phi, action);
    if defect > tol {
        return Err(domain(format!("map is not G-invariant (defect {defect:.3e})")));
    }
    let src = dilation.spanning_matrix();
    if linalg::rank(&src) != dilation.dim() {
        return Err(domain("dilation is not minimal"));
    }
    let d = phi.target_dim();
    let units = phi.algebra().matrix_units();
    let mut u = Vec::with_capacity(action.group().order());
    for g in 0..action.group().order() {
        let mut dst = linalg::zeros(dilation.dim(), units.len() * d);
        for (col, &e) in units.iter().enumerate() {
            let img = dilation.rep.apply(&action.apply_unit(g, e)) * &dilation.v;
            dst.view_mut((0, col * d), (dilation.dim(), d)).copy_from(&img);
        }
        u.push(linalg::linear_extension(&src, &dst));
    }
    let system = CovariantSystem { phi: phi.clone(), dilation: dilation.clone(), action: action.clone(), u };
    let r = system.residuals();
    if r.max() > tol {
        return Err(consistency(format!("covariance unitaries fail verification: {r:?}")));
    }
    Ok(system)
}

/// The inner action `τ_g(a) = w_g a w_g*` where `π(w_g) = U_g`, recovering
/// `w_g ∈ A` by least squares from the representation `π: A -> M_H`.
pub fn conjugation_action(rep: &Representation, unitaries: &[ComplexMatrix], group: &FiniteGroup) -> Result<AlgebraAction> {
    check_unitaries(rep.target_dim(), unitaries, group)?;
    let algebra = rep.algebra();
    let units = algebra.matrix_units();
    let n = rep.target_dim();
    let mut design = linalg::zeros(n * n, units.len());
    for (col, &e) in units.iter().enumerate() {
        let img = rep.image(e);
        for (row, z) in img.iter().enumerate() {
            design[(row, col)] = *z;
        }
    }
    let mut per_g = Vec::with_capacity(unitaries.len());
    for (g, ug) in unitaries.iter().enumerate() {
        let target = ComplexMatrix::from_column_slice(n * n, 1, ug.as_slice());
        let coef = design.clone().svd(true, true).solve(&target, linalg::RANK_TOL).map_err(|e| domain(e.to_string()))?;
        let mut blocks: Vec<ComplexMatrix> = algebra.blocks().iter().map(|&m| linalg::zeros(m, m)).collect();
        for (col, &e) in units.iter().enumerate() {
            blocks[e.block][(e.i, e.j)] = coef[(col, 0)];
        }
        let w = AlgebraElement::new(algebra, blocks)?;
        if max_abs(&(rep.apply(&w) - ug)) > 1e-9 {
            return Err(domain(format!("unitary {g} does not lie in the image of the algebra")));
        }
        per_g.push(w.blocks().to_vec());
    }
    AlgebraAction::inner(group, algebra, per_g)
}

fn check_unitaries(n: usize, unitaries: &[ComplexMatrix], group: &FiniteGroup) -> Result<()> {
    if unitaries.len() != group.order() {
        return Err(shape(format!("expected {} unitaries, got {}", group.order(), unitaries.len())));
    }
    for (g, u) in unitaries.iter().enumerate() {
        if u.shape() != (n, n) {
            return Err(shape(format!("unitary {g} must be {n}x{n}")));
        }
        if max_abs(&(u.adjoint() * u - identity(n))) > 1e-9 {
            return Err(domain(format!("operator {g} is not unitary")));
        }
    }
    Ok(())
}

/// `φ_G(a) = (1/|G|) Σ_g U_g* π(a) U_g`.
pub fn twirl(rep: &Representation, unitaries: &[ComplexMatrix], group: &FiniteGroup) -> Result<UcpMap> {
    check_unitaries(rep.target_dim(), unitaries, group)?;
    let w = c(1.0 / group.order() as f64, 0.0);
    UcpMap::from_fn(rep.algebra(), rep.target_dim(), |e| {
        unitaries.iter().fold(linalg::zeros(rep.target_dim(), rep.target_dim()), |acc, u| acc + u.adjoint() * rep.image(e) * u) * w
    })
}

/// The Pauli matrices `{1, X, Y, Z}` in Klein-group order.
pub fn pauli_unitaries() -> Vec<ComplexMatrix> {
    let z0 = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    vec![
        identity(2),
        ComplexMatrix::from_row_slice(2, 2, &[z0, one, one, z0]),
        ComplexMatrix::from_row_slice(2, 2, &[z0, -i, i, z0]),
        ComplexMatrix::from_row_slice(2, 2, &[one, z0, z0, -one]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::zeros;

    fn m2m2() -> FiniteCStarAlgebra {
        FiniteCStarAlgebra::new(vec![2, 2]).unwrap()
    }

    fn e3() -> UcpMap {
        UcpMap::from_fn(&m2m2(), 2, |u| linalg::unit(2, 2, u.i, u.j) * c(0.5, 0.0)).unwrap()
    }

    #[test]
    fn group_tables() {
        assert!(FiniteGroup::new(vec![vec![0, 1], vec![0, 1]]).is_err());
        let k = FiniteGroup::klein();
        assert_eq!(k.order(), 4);
        assert!((0..4).all(|g| k.mul(g, g) == k.identity()));
        let z3 = FiniteGroup::cyclic(3);
        assert_eq!(z3.inverse(1), 2);
    }

    #[test]
    fn action_validation_examples() {
        assert!(AlgebraAction::trivial(&m2m2()).validate(1e-12).valid);
        assert!(AlgebraAction::block_swap(&m2m2(), 0, 1).unwrap().validate(1e-12).valid);
        let alg = FiniteCStarAlgebra::full(2);
        let bad = ComplexMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let act = AlgebraAction::inner(&FiniteGroup::cyclic(2), &alg, vec![vec![identity(2)], vec![bad]]).unwrap();
        assert!(!act.validate(1e-9).valid);
    }

    #[test]
    fn projective_pauli_action_is_valid() {
        let alg = FiniteCStarAlgebra::full(2);
        let act = conjugation_action(&Representation::identity(2), &pauli_unitaries(), &FiniteGroup::klein()).unwrap();
        assert_eq!(act.algebra(), &alg);
        assert!(act.validate(1e-12).valid);
    }

    #[test]
    fn invariance_examples() {
        let swap = AlgebraAction::block_swap(&m2m2(), 0, 1).unwrap();
        assert!(is_g_invariant(&e3(), &AlgebraAction::trivial(&m2m2()), 1e-12));
        assert!(is_g_invariant(&e3(), &swap, 1e-12));
        let first = UcpMap::from_fn(&m2m2(), 2, |u| if u.block == 0 { linalg::unit(2, 2, u.i, u.j) } else { zeros(2, 2) }).unwrap();
        assert!(!is_g_invariant(&first, &swap, 1e-9));
    }

    #[test]
    fn trivial_group_gives_identity_unitary() {
        let sys = CovariantSystem::build(&e3(), &AlgebraAction::trivial(&m2m2()), 1e-9).unwrap();
        assert_eq!(sys.u.len(), 1);
        assert!(max_abs(&(&sys.u[0] - identity(4))) < 1e-10);
    }

    #[test]
    fn e3_swap_unitary_exchanges_summands() {
        let swap = AlgebraAction::block_swap(&m2m2(), 0, 1).unwrap();
        let sys = CovariantSystem::build(&e3(), &swap, 1e-9).unwrap();
        assert!(sys.residuals().max() < 1e-10);
        // In the frame where ρ = id ⊕ id, the swap is (x, y) ↦ (y, x): an
        // involution whose ±1 eigenspaces both have dimension 2.
        let u = &sys.u[1];
        assert!(max_abs(&(u * u - identity(4))) < 1e-10);
        assert!(u.trace().norm() < 1e-10);
        let p0 = sys.rep().image(MatrixUnit { block: 0, i: 0, j: 0 }) + sys.rep().image(MatrixUnit { block: 0, i: 1, j: 1 });
        let p1 = sys.rep().image(MatrixUnit { block: 1, i: 0, j: 0 }) + sys.rep().image(MatrixUnit { block: 1, i: 1, j: 1 });
        assert!(max_abs(&(u * p0 * u.adjoint() - p1)) < 1e-10);
    }

    #[test]
    fn pauli_twirl_system_has_four_unitaries_on_eight_dimensions() {
        let rep = Representation::identity(2);
        let g = FiniteGroup::klein();
        let phi = twirl(&rep, &pauli_unitaries(), &g).unwrap();
        let act = conjugation_action(&rep, &pauli_unitaries(), &g).unwrap();
        let sys = CovariantSystem::build(&phi, &act, 1e-9).unwrap();
        assert_eq!(sys.u.len(), 4);
        assert_eq!(sys.dim(), 8);
        assert!(sys.residuals().homomorphism < 1e-9);
    }

    #[test]
    fn non_invariant_map_is_rejected() {
        let swap = AlgebraAction::block_swap(&m2m2(), 0, 1).unwrap();
        let first = UcpMap::from_fn(&m2m2(), 2, |u| if u.block == 0 { linalg::unit(2, 2, u.i, u.j) } else { zeros(2, 2) }).unwrap();
        assert!(matches!(CovariantSystem::build(&first, &swap, 1e-9), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn twirl_examples() {
        let rep = Representation::identity(2);
        let trivial = twirl(&rep, &[identity(2)], &FiniteGroup::trivial()).unwrap();
        assert!(trivial.distance(&UcpMap::identity(2)) < 1e-15);

        let pauli = twirl(&rep, &pauli_unitaries(), &FiniteGroup::klein()).unwrap();
        let depol = UcpMap::from_fn(rep.algebra(), 2, |u| if u.i == u.j { identity(2) * c(0.5, 0.0) } else { zeros(2, 2) }).unwrap();
        assert!(pauli.distance(&depol) < 1e-12);

        let zs = vec![identity(2), pauli_unitaries()[3].clone()];
        let pinch = twirl(&rep, &zs, &FiniteGroup::cyclic(2)).unwrap();
        let diag = UcpMap::from_fn(rep.algebra(), 2, |u| if u.i == u.j { linalg::unit(2, 2, u.i, u.i) } else { zeros(2, 2) }).unwrap();
        assert!(pinch.distance(&diag) < 1e-12);
        let act = conjugation_action(&rep, &zs, &FiniteGroup::cyclic(2)).unwrap();
        assert!(is_g_invariant(&pinch, &act, 1e-12));
    }

    #[test]
    fn twirl_rejects_non_unitary() {
        let rep = Representation::identity(2);
        let bad = vec![identity(2), identity(2) * c(2.0, 0.0)];
        assert!(matches!(twirl(&rep, &bad, &FiniteGroup::cyclic(2)), Err(crate::Error::Domain(_))));
    }
}
