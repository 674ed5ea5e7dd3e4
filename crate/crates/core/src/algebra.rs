//! Finite-dimensional C*-algebras `A = M_{n_1} ⊕ ... ⊕ M_{n_m}`, their
//! elements, *-representations, states and the GNS construction.
//!
//! Everything is expressed through matrix units `e_ij^{(k)}`: a linear map
//! out of `A` is a table of images of matrix units, and the relations
//! `e_ij^{(k)} e_lm^{(q)} = δ_kq δ_jl e_im^{(k)}` are what the validators check.

use crate::error::{domain, shape, Result};
use crate::linalg::{self, c, identity, max_abs, zeros, ComplexMatrix, GramQuotient, RANK_TOL};
use crate::symmetry::AlgebraAction;

/// `A = ⊕_k M_{n_k}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteCStarAlgebra {
    blocks: Vec<usize>,
}

/// The matrix unit `e_ij^{(block)}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MatrixUnit {
    pub block: usize,
    pub i: usize,
    pub j: usize,
}

impl MatrixUnit {
    pub fn adjoint(self) -> Self {
        Self { block: self.block, i: self.j, j: self.i }
    }

    /// `self * other`, or `None` when the product vanishes.
    pub fn times(self, other: Self) -> Option<Self> {
        (self.block == other.block && self.j == other.i).then_some(Self { block: self.block, i: self.i, j: other.j })
    }
}

impl FiniteCStarAlgebra {
    pub fn new(blocks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(shape("an algebra needs at least one block"));
        }
        if blocks.contains(&0) {
            return Err(shape("block sizes must be positive"));
        }
        Ok(Self { blocks })
    }

    /// The full matrix algebra `M_n`.
    pub fn full(n: usize) -> Self {
        Self::new(vec![n]).expect("positive size")
    }

    /// The commutative algebra `C^m`.
    pub fn diagonal(m: usize) -> Self {
        Self::new(vec![1; m]).expect("positive size")
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_size(&self, k: usize) -> usize {
        self.blocks[k]
    }

    /// `dim A = Σ n_k²`.
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|n| n * n).sum()
    }

    /// Offset of block `k` in the flat matrix-unit ordering.
    pub fn block_offset(&self, k: usize) -> usize {
        self.blocks[..k].iter().map(|n| n * n).sum()
    }

    /// Flat index of a matrix unit: blocks in order, row-major within a block.
    pub fn index_of(&self, u: MatrixUnit) -> usize {
        self.block_offset(u.block) + u.i * self.blocks[u.block] + u.j
    }

    pub fn matrix_units(&self) -> Vec<MatrixUnit> {
        let mut out = Vec::with_capacity(self.dim());
        for (block, &n) in self.blocks.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    out.push(MatrixUnit { block, i, j });
                }
            }
        }
        out
    }

    /// A small set of matrix units generating `A` as a *-algebra:
    /// `e_11^{(k)}` and `e_{i,i+1}^{(k)}` for every block.
    pub fn generating_units(&self) -> Vec<MatrixUnit> {
        let mut out = Vec::new();
        for (block, &n) in self.blocks.iter().enumerate() {
            out.push(MatrixUnit { block, i: 0, j: 0 });
            for i in 0..n.saturating_sub(1) {
                out.push(MatrixUnit { block, i, j: i + 1 });
            }
        }
        out
    }

    pub fn unit(&self) -> AlgebraElement {
        AlgebraElement { algebra: self.clone(), blocks: self.blocks.iter().map(|&n| identity(n)).collect() }
    }

    pub fn zero(&self) -> AlgebraElement {
        AlgebraElement { algebra: self.clone(), blocks: self.blocks.iter().map(|&n| zeros(n, n)).collect() }
    }

    pub fn element_of_unit(&self, u: MatrixUnit) -> AlgebraElement {
        let mut e = self.zero();
        e.blocks[u.block][(u.i, u.j)] = c(1.0, 0.0);
        e
    }
}

/// An element of `A`, stored as one dense matrix per block.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    algebra: FiniteCStarAlgebra,
    blocks: Vec<ComplexMatrix>,
}

impl AlgebraElement {
    pub fn new(algebra: &FiniteCStarAlgebra, blocks: Vec<ComplexMatrix>) -> Result<Self> {
        if blocks.len() != algebra.num_blocks() {
            return Err(shape(format!("expected {} blocks, got {}", algebra.num_blocks(), blocks.len())));
        }
        for (k, (b, &n)) in blocks.iter().zip(algebra.blocks()).enumerate() {
            if b.shape() != (n, n) {
                return Err(shape(format!("block {k} has shape {:?}, expected {n}x{n}", b.shape())));
            }
        }
        Ok(Self { algebra: algebra.clone(), blocks })
    }

    pub fn algebra(&self) -> &FiniteCStarAlgebra {
        &self.algebra
    }

    pub fn blocks(&self) -> &[ComplexMatrix] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &ComplexMatrix {
        &self.blocks[k]
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.algebra != other.algebra {
            return Err(shape("elements belong to different algebras"));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a + b).collect();
        Ok(Self { algebra: self.algebra.clone(), blocks })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a * b).collect();
        Ok(Self { algebra: self.algebra.clone(), blocks })
    }

    pub fn scale(&self, z: linalg::C64) -> Self {
        Self { algebra: self.algebra.clone(), blocks: self.blocks.iter().map(|b| b * z).collect() }
    }

    pub fn adjoint(&self) -> Self {
        Self { algebra: self.algebra.clone(), blocks: self.blocks.iter().map(|b| b.adjoint()).collect() }
    }

    /// C*-norm: the largest singular value over all blocks.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(linalg::op_norm).fold(0.0, f64::max)
    }

    /// Coefficient of the matrix unit `u`.
    pub fn coefficient(&self, u: MatrixUnit) -> linalg::C64 {
        self.blocks[u.block][(u.i, u.j)]
    }

    pub fn max_distance(&self, other: &Self) -> f64 {
        self.blocks.iter().zip(&other.blocks).map(|(a, b)| max_abs(&(a - b))).fold(0.0, f64::max)
    }
}

/// A linear map `A -> M_N` given on matrix units; a *-representation when it
/// passes [`Representation::validate`].
#[derive(Clone, Debug)]
pub struct Representation {
    algebra: FiniteCStarAlgebra,
    target_dim: usize,
    images: Vec<ComplexMatrix>,
}

/// Outcome of a structural check, carrying the worst residual seen.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub valid: bool,
    pub max_violation: f64,
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub(crate) fn from_checks(tol: f64, checks: Vec<(String, f64)>) -> Self {
        let max_violation = checks.iter().map(|c| c.1).fold(0.0, f64::max);
        let violations: Vec<String> =
            checks.into_iter().filter(|(_, r)| *r > tol || r.is_nan()).map(|(name, r)| format!("{name}: {r:.3e}")).collect();
        Self { valid: violations.is_empty(), max_violation, violations }
    }
}

impl Representation {
    /// `images` lists the image of every matrix unit in the flat order of
    /// [`FiniteCStarAlgebra::matrix_units`].
    pub fn new(algebra: &FiniteCStarAlgebra, target_dim: usize, images: Vec<ComplexMatrix>) -> Result<Self> {
        if images.len() != algebra.dim() {
            return Err(shape(format!("expected {} matrix-unit images, got {}", algebra.dim(), images.len())));
        }
        if let Some(m) = images.iter().find(|m| m.shape() != (target_dim, target_dim)) {
            return Err(shape(format!("image of shape {:?}, expected {target_dim}x{target_dim}", m.shape())));
        }
        Ok(Self { algebra: algebra.clone(), target_dim, images })
    }

    /// The defining representation of `M_n` on `C^n`.
    pub fn identity(n: usize) -> Self {
        let algebra = FiniteCStarAlgebra::full(n);
        let images = algebra.matrix_units().iter().map(|u| linalg::unit(n, n, u.i, u.j)).collect();
        Self { algebra, target_dim: n, images }
    }

    /// Builds the map from a closure over matrix units.
    pub fn from_fn(algebra: &FiniteCStarAlgebra, target_dim: usize, f: impl Fn(MatrixUnit) -> ComplexMatrix) -> Result<Self> {
        let images = algebra.matrix_units().into_iter().map(f).collect();
        Self::new(algebra, target_dim, images)
    }

    pub fn algebra(&self) -> &FiniteCStarAlgebra {
        &self.algebra
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn images(&self) -> &[ComplexMatrix] {
        &self.images
    }

    pub fn image(&self, u: MatrixUnit) -> &ComplexMatrix {
        &self.images[self.algebra.index_of(u)]
    }

    pub fn apply(&self, a: &AlgebraElement) -> ComplexMatrix {
        let mut out = zeros(self.target_dim, self.target_dim);
        for u in self.algebra.matrix_units() {
            let z = a.coefficient(u);
            if z != c(0.0, 0.0) {
                out += self.image(u) * z;
            }
        }
        out
    }

    /// Images of [`FiniteCStarAlgebra::generating_units`]; their commutant
    /// (with adjoints) is the commutant of the whole image.
    pub fn generators(&self) -> Vec<ComplexMatrix> {
        self.algebra.generating_units().into_iter().map(|u| self.image(u).clone()).collect()
    }

    /// Conjugates every image by a unitary: `u ρ(·) u*`.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Self {
        let images = self.images.iter().map(|m| u * m * u.adjoint()).collect();
        Self { algebra: self.algebra.clone(), target_dim: u.nrows(), images }
    }

    /// Compresses to the range of an isometry `w`: `w* ρ(·) w`.
    pub fn compress(&self, w: &ComplexMatrix) -> Self {
        let images = self.images.iter().map(|m| w.adjoint() * m * w).collect();
        Self { algebra: self.algebra.clone(), target_dim: w.ncols(), images }
    }

    /// Checks multiplicativity on all matrix-unit pairs, *-preservation and
    /// unitality.
    pub fn validate(&self, tol: f64) -> ValidationReport {
        let units = self.algebra.matrix_units();
        let mut mult = 0.0_f64;
        for &u in &units {
            for &v in &units {
                let lhs = self.image(u) * self.image(v);
                let r = match u.times(v) {
                    Some(w) => max_abs(&(lhs - self.image(w))),
                    None => max_abs(&lhs),
                };
                mult = mult.max(r);
            }
        }
        let star = units.iter().map(|&u| max_abs(&(self.image(u).adjoint() - self.image(u.adjoint())))).fold(0.0, f64::max);
        let mut sum = zeros(self.target_dim, self.target_dim);
        for (k, &n) in self.algebra.blocks().iter().enumerate() {
            for i in 0..n {
                sum += self.image(MatrixUnit { block: k, i, j: i });
            }
        }
        let unital = max_abs(&(sum - identity(self.target_dim)));
        ValidationReport::from_checks(
            tol,
            vec![("multiplicativity".into(), mult), ("adjoint".into(), star), ("unitality".into(), unital)],
        )
    }
}

/// A state on `A`, kept both as its values on matrix units and as density
/// blocks `D_k` with `ω(a) = Σ_k tr(D_k a_k)`.
#[derive(Clone, Debug)]
pub struct State {
    algebra: FiniteCStarAlgebra,
    density: Vec<ComplexMatrix>,
}

impl State {
    /// Validates positivity and normalization of the density blocks.
    pub fn from_density(algebra: &FiniteCStarAlgebra, density: Vec<ComplexMatrix>) -> Result<Self> {
        if density.len() != algebra.num_blocks() {
            return Err(shape("density block count does not match the algebra"));
        }
        let mut total = 0.0;
        for (k, (d, &n)) in density.iter().zip(algebra.blocks()).enumerate() {
            if d.shape() != (n, n) {
                return Err(shape(format!("density block {k} has wrong shape")));
            }
            if max_abs(&(d - d.adjoint())) > 1e-9 {
                return Err(domain(format!("density block {k} is not Hermitian")));
            }
            let lo = linalg::min_eigenvalue(d);
            if lo < -1e-9 * (d.trace().re.abs() + 1.0) {
                return Err(domain(format!("density block {k} has negative eigenvalue {lo:.3e}")));
            }
            total += d.trace().re;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(domain(format!("state is not normalized: ω(1) = {total}")));
        }
        Ok(Self { algebra: algebra.clone(), density })
    }

    /// Builds a state from `ω(e_ij^{(k)})` given per block as `values[k][(i, j)]`.
    pub fn from_values(algebra: &FiniteCStarAlgebra, values: Vec<ComplexMatrix>) -> Result<Self> {
        Self::from_density(algebra, values.into_iter().map(|v| v.transpose()).collect())
    }

    /// The state on `C^m` with the given weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let algebra = FiniteCStarAlgebra::diagonal(weights.len());
        Self::from_density(&algebra, weights.iter().map(|&w| ComplexMatrix::from_element(1, 1, c(w, 0.0))).collect())
    }

    /// Normalized trace on `A` weighted by block sizes.
    pub fn tracial(algebra: &FiniteCStarAlgebra) -> Self {
        let total: usize = algebra.blocks().iter().sum();
        let density = algebra.blocks().iter().map(|&n| identity(n) * c(1.0 / total as f64, 0.0)).collect();
        Self { algebra: algebra.clone(), density }
    }

    pub fn algebra(&self) -> &FiniteCStarAlgebra {
        &self.algebra
    }

    pub fn density(&self) -> &[ComplexMatrix] {
        &self.density
    }

    /// `ω(e_ij^{(k)}) = (D_k)_{ji}`.
    pub fn value(&self, u: MatrixUnit) -> linalg::C64 {
        self.density[u.block][(u.j, u.i)]
    }

    pub fn apply(&self, a: &AlgebraElement) -> linalg::C64 {
        self.density.iter().zip(a.blocks()).map(|(d, b)| (d * b).trace()).sum()
    }

    pub fn max_distance(&self, other: &State) -> f64 {
        self.density.iter().zip(&other.density).map(|(a, b)| max_abs(&(a - b))).fold(0.0, f64::max)
    }
}

/// `(π_ω, H_ω, Ω_ω)`.
#[derive(Clone, Debug)]
pub struct GnsTriple {
    pub rep: Representation,
    pub dim: usize,
    pub cyclic_vector: ComplexMatrix,
}

impl GnsTriple {
    /// Largest deviation of `<π(e)Ω, Ω>` from `ω(e)` over matrix units.
    pub fn reproduction_residual(&self, state: &State) -> f64 {
        let omega = &self.cyclic_vector;
        state
            .algebra()
            .matrix_units()
            .into_iter()
            .map(|u| ((omega.adjoint() * self.rep.image(u) * omega)[(0, 0)] - state.value(u)).norm())
            .fold(0.0, f64::max)
    }

    /// Rank of `{π(e)Ω}`, which equals `dim` for a cyclic vector.
    pub fn span_rank(&self) -> usize {
        let cols: Vec<ComplexMatrix> = self.rep.images().iter().map(|m| m * &self.cyclic_vector).collect();
        let mut stacked = zeros(self.dim, cols.len());
        for (j, v) in cols.iter().enumerate() {
            stacked.set_column(j, &v.column(0));
        }
        linalg::rank(&stacked)
    }
}

/// GNS construction: `A` with `<a, b> = ω(b* a)`, quotiented by null vectors.
pub fn gns(state: &State) -> Result<GnsTriple> {
    let algebra = state.algebra();
    let units = algebra.matrix_units();
    let n = units.len();
    let gram = ComplexMatrix::from_fn(n, n, |row, col| {
        match units[row].adjoint().times(units[col]) {
            Some(w) => state.value(w),
            None => c(0.0, 0.0),
        }
    });
    let (vals, _) = linalg::eigh(&gram);
    let top = vals.last().copied().unwrap_or(0.0);
    let bottom = vals.first().copied().unwrap_or(0.0);
    if bottom < -1e-9 * (top.abs() + 1.0) {
        return Err(domain(format!("functional is not positive (Gram eigenvalue {bottom:.3e})")));
    }
    let q = GramQuotient::new(&gram, RANK_TOL * top.max(0.0));
    let dim = q.dim();
    let rep = Representation::from_fn(algebra, dim, |u| {
        let left = ComplexMatrix::from_fn(n, n, |row, col| match u.times(units[col]) {
            Some(w) if algebra.index_of(w) == row => c(1.0, 0.0),
            _ => c(0.0, 0.0),
        });
        q.transport(&left)
    })?;
    let mut one = zeros(n, 1);
    for (k, &m) in algebra.blocks().iter().enumerate() {
        for i in 0..m {
            one[(algebra.index_of(MatrixUnit { block: k, i, j: i }), 0)] = c(1.0, 0.0);
        }
    }
    let cyclic_vector = &q.embed * one;
    Ok(GnsTriple { rep, dim, cyclic_vector })
}

/// True iff `|ω(e) - ω(τ_g(e))| <= tol` for every group element and matrix unit.
pub fn is_g_invariant_state(state: &State, action: &AlgebraAction, tol: f64) -> bool {
    g_invariance_defect_state(state, action) <= tol
}

pub fn g_invariance_defect_state(state: &State, action: &AlgebraAction) -> f64 {
    let mut worst = 0.0_f64;
    for g in 0..action.group().order() {
        for u in state.algebra().matrix_units() {
            let moved = action.apply_unit(g, u);
            worst = worst.max((state.apply(&moved) - state.value(u)).norm());
        }
    }
    worst
}
