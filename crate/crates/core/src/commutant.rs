//! Commutants of operator sets, abelian subalgebras and their minimal
//! projections, and randomized maximal abelian subalgebras.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{consistency, domain, shape, Result};
use crate::linalg::{self, c, identity, max_abs, zeros, ComplexMatrix, RealMatrix};
use crate::random::rng;

/// Singular values of commutator constraints at or below this (with unit
/// Frobenius generators) count as zero.
pub const COMMUTANT_CUTOFF: f64 = 1e-9;

/// A *-closed subspace of `M_N` with a Hermitian basis that is orthonormal for
/// the trace inner product, so self-adjoint elements have real coordinates.
#[derive(Clone, Debug)]
pub struct MatrixStarAlgebra {
    ambient_dim: usize,
    basis: Vec<ComplexMatrix>,
    pub adjoint_closed: bool,
    pub product_closed: bool,
}

impl MatrixStarAlgebra {
    /// The real-linear span of the Hermitian and anti-Hermitian parts of
    /// `mats`, orthonormalized. Closure flags are left unverified.
    pub fn from_spanning(ambient_dim: usize, mats: &[ComplexMatrix]) -> Result<Self> {
        if let Some(m) = mats.iter().find(|m| m.shape() != (ambient_dim, ambient_dim)) {
            return Err(shape(format!("matrix of shape {:?} in M_{ambient_dim}", m.shape())));
        }
        let n = ambient_dim;
        let mut cols = Vec::with_capacity(2 * mats.len());
        for m in mats {
            cols.push(linalg::hermitian_to_real(&linalg::hermitian_part(m)));
            cols.push(linalg::hermitian_to_real(&linalg::hermitian_part(&(m * c(0.0, -1.0)))));
        }
        let basis = orthonormal_real_span(n * n, &cols).into_iter().map(|v| linalg::real_to_hermitian(v.as_slice(), n)).collect();
        Ok(Self { ambient_dim, basis, adjoint_closed: true, product_closed: false })
    }

    pub fn scalars(n: usize) -> Self {
        let mut s = Self::from_spanning(n, &[identity(n)]).expect("shape");
        s.product_closed = true;
        s
    }

    pub fn full(n: usize) -> Self {
        let units: Vec<ComplexMatrix> =
            (0..n).flat_map(|i| (0..n).map(move |j| linalg::unit(n, n, i, j))).collect();
        let mut s = Self::from_spanning(n, &units).expect("shape");
        s.product_closed = true;
        s
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    /// `Σ x_i B_i` for real coefficients: a self-adjoint element.
    pub fn element(&self, coeffs: &[f64]) -> ComplexMatrix {
        self.basis.iter().zip(coeffs).fold(zeros(self.ambient_dim, self.ambient_dim), |acc, (b, &x)| acc + b * c(x, 0.0))
    }

    /// Complex coordinates `tr(B_i x)`.
    pub fn coordinates(&self, x: &ComplexMatrix) -> Vec<linalg::C64> {
        self.basis.iter().map(|b| (b * x).trace()).collect()
    }

    /// Orthogonal projection of `x` onto the span.
    pub fn project(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.basis
            .iter()
            .zip(self.coordinates(x))
            .fold(zeros(self.ambient_dim, self.ambient_dim), |acc, (b, z)| acc + b * z)
    }

    /// Distance from `x` to the span (largest entry of the difference).
    pub fn membership_residual(&self, x: &ComplexMatrix) -> f64 {
        max_abs(&(x - self.project(x)))
    }

    pub fn contains(&self, x: &ComplexMatrix, tol: f64) -> bool {
        x.shape() == (self.ambient_dim, self.ambient_dim) && self.membership_residual(x) <= tol
    }

    /// Every basis element of `other` lies in `self`.
    pub fn contains_algebra(&self, other: &Self, tol: f64) -> bool {
        other.basis.iter().all(|b| self.contains(b, tol))
    }

    /// Same span, tested by mutual containment.
    pub fn same_span(&self, other: &Self, tol: f64) -> bool {
        self.dim() == other.dim() && self.contains_algebra(other, tol) && other.contains_algebra(self, tol)
    }

    /// Largest pairwise commutator of basis elements.
    pub fn abelian_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (i, a) in self.basis.iter().enumerate() {
            for b in &self.basis[i + 1..] {
                worst = worst.max(max_abs(&linalg::commutator(a, b)));
            }
        }
        worst
    }

    pub fn is_abelian(&self, tol: f64) -> bool {
        self.abelian_residual() <= tol
    }

    /// Products of random elements stay in the span (fixed seed).
    pub fn product_closure_residual(&self) -> f64 {
        let mut r = rng(0x5eed);
        let mut worst = 0.0_f64;
        for _ in 0..3 {
            let x = self.element(&gaussian_vec(&mut r, self.dim()));
            let y = self.element(&gaussian_vec(&mut r, self.dim()));
            worst = worst.max(self.membership_residual(&(&x * &y)));
        }
        worst
    }

    /// The algebra generated by adjoining `1_N`.
    pub fn with_unit(&self) -> Self {
        let mut mats = self.basis.clone();
        mats.push(identity(self.ambient_dim));
        let mut s = Self::from_spanning(self.ambient_dim, &mats).expect("shape");
        s.product_closed = self.product_closed;
        s
    }

    /// Conjugates by an isometry `w`: `w* B w`.
    pub fn compress(&self, w: &ComplexMatrix) -> Result<Self> {
        let mats: Vec<ComplexMatrix> = self.basis.iter().map(|b| w.adjoint() * b * w).collect();
        Self::from_spanning(w.ncols(), &mats)
    }
}

pub(crate) fn gaussian_vec(r: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.sample(StandardNormal)).collect()
}

/// Orthonormal basis of the span of real vectors, rank decided relative to
/// the largest singular value.
fn orthonormal_real_span(len: usize, cols: &[DVector<f64>]) -> Vec<DVector<f64>> {
    if cols.is_empty() || len == 0 {
        return Vec::new();
    }
    let span = linalg::column_span_real(&RealMatrix::from_columns(cols));
    span.column_iter().map(|c| c.into_owned()).collect()
}

/// `{X : [X, S] = [X, S*] = 0 for all generators S}` inside `M_n`; the empty
/// set gives all of `M_n`.
///
/// The search starts from the block-diagonal pattern of a generic Hermitian
/// combination of the generators (everything commuting with the generators
/// commutes with it), then imposes each generator's constraints in turn
/// through singular-value null spaces.
pub fn commutant(n: usize, generators: &[ComplexMatrix]) -> Result<MatrixStarAlgebra> {
    if let Some(g) = generators.iter().find(|g| g.shape() != (n, n)) {
        return Err(shape(format!("generator of shape {:?}, expected {n}x{n}", g.shape())));
    }
    let gens: Vec<ComplexMatrix> = generators
        .iter()
        .filter_map(|g| {
            let f = linalg::frobenius(g);
            (f > 0.0).then(|| g / c(f, 0.0))
        })
        .collect();
    if gens.is_empty() {
        return Ok(MatrixStarAlgebra::full(n));
    }

    let mut r = rng(0xc0_11a7);
    let mut h = zeros(n, n);
    for g in &gens {
        let x: f64 = r.sample(StandardNormal);
        let y: f64 = r.sample(StandardNormal);
        h += linalg::hermitian_part(g) * c(x, 0.0) + linalg::hermitian_part(&(g * c(0.0, -1.0))) * c(y, 0.0);
    }
    let (vals, q) = linalg::eigh(&h);
    let scale = vals.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for k in 0..n {
        match clusters.last_mut() {
            Some(cl) if vals[k] - vals[*cl.last().unwrap()] <= 1e-7 * scale => cl.push(k),
            _ => clusters.push(vec![k]),
        }
    }
    // Coefficient space: entries (a, b) of Y = Q* X Q inside each cluster.
    let pattern: Vec<(usize, usize)> =
        clusters.iter().flat_map(|cl| cl.iter().flat_map(move |&a| cl.iter().map(move |&b| (a, b)))).collect();
    let dim = pattern.len();
    let rotated: Vec<ComplexMatrix> = gens.iter().map(|g| q.adjoint() * g * &q).collect();

    let mut basis = identity(dim);
    for s in &rotated {
        if basis.ncols() == 0 {
            break;
        }
        let s_adj = s.adjoint();
        let mut constraint = zeros(2 * n * n, basis.ncols());
        for j in 0..basis.ncols() {
            let y = pattern_matrix(n, &pattern, &basis.column(j).into_owned());
            let c1 = linalg::commutator(&y, s);
            let c2 = linalg::commutator(&y, &s_adj);
            for (idx, z) in c1.iter().chain(c2.iter()).enumerate() {
                constraint[(idx, j)] = *z;
            }
        }
        let ns = linalg::null_space(&constraint, COMMUTANT_CUTOFF);
        basis = &basis * ns;
    }

    let mats: Vec<ComplexMatrix> =
        (0..basis.ncols()).map(|j| &q * pattern_matrix(n, &pattern, &basis.column(j).into_owned()) * q.adjoint()).collect();
    let mut alg = MatrixStarAlgebra::from_spanning(n, &mats)?;
    if alg.dim() != basis.ncols() {
        return Err(consistency(format!(
            "commutant is not *-closed: complex dimension {} but Hermitian dimension {}",
            basis.ncols(),
            alg.dim()
        )));
    }
    alg.product_closed = alg.product_closure_residual() <= 1e-8;
    if !alg.product_closed {
        return Err(consistency("commutant failed the product-closure check"));
    }
    Ok(alg)
}

fn pattern_matrix(n: usize, pattern: &[(usize, usize)], coef: &DVector<linalg::C64>) -> ComplexMatrix {
    let mut y = zeros(n, n);
    for (&(a, b), z) in pattern.iter().zip(coef.iter()) {
        y[(a, b)] = *z;
    }
    y
}

/// `{X ∈ space : [X, S] = [X, S*] = 0 for all S}` for a *-closed `space`.
pub fn commutant_within(space: &MatrixStarAlgebra, generators: &[ComplexMatrix]) -> Result<MatrixStarAlgebra> {
    let n = space.ambient_dim();
    if let Some(g) = generators.iter().find(|g| g.shape() != (n, n)) {
        return Err(shape(format!("generator of shape {:?}, expected {n}x{n}", g.shape())));
    }
    let mut basis = identity(space.dim());
    for g in generators {
        let f = linalg::frobenius(g);
        if f == 0.0 || basis.ncols() == 0 {
            continue;
        }
        let s = g / c(f, 0.0);
        let s_adj = s.adjoint();
        let mut constraint = zeros(2 * n * n, basis.ncols());
        for j in 0..basis.ncols() {
            let x = space.basis().iter().zip(basis.column(j).iter()).fold(zeros(n, n), |acc, (b, z)| acc + b * *z);
            let c1 = linalg::commutator(&x, &s);
            let c2 = linalg::commutator(&x, &s_adj);
            for (idx, z) in c1.iter().chain(c2.iter()).enumerate() {
                constraint[(idx, j)] = *z;
            }
        }
        basis = &basis * linalg::null_space(&constraint, COMMUTANT_CUTOFF);
    }
    let mats: Vec<ComplexMatrix> = (0..basis.ncols())
        .map(|j| space.basis().iter().zip(basis.column(j).iter()).fold(zeros(n, n), |acc, (b, z)| acc + b * *z))
        .collect();
    let mut alg = MatrixStarAlgebra::from_spanning(n, &mats)?;
    alg.product_closed = space.product_closed && alg.product_closure_residual() <= 1e-8;
    Ok(alg)
}

/// `Z(M) = M ∩ M′`.
pub fn center(m: &MatrixStarAlgebra) -> Result<MatrixStarAlgebra> {
    commutant_within(m, m.basis())
}

pub fn is_irreducible(n: usize, generators: &[ComplexMatrix]) -> Result<bool> {
    Ok(commutant(n, generators)?.dim() == 1)
}

/// Minimal projections of an abelian algebra (with the unit adjoined), from
/// the spectral decomposition of a generic self-adjoint element.
pub fn minimal_projections(b: &MatrixStarAlgebra, tol: f64) -> Result<Vec<ComplexMatrix>> {
    let res = b.abelian_residual();
    if res > tol {
        return Err(domain(format!("algebra is not abelian (commutator {res:.3e})")));
    }
    let unital = b.with_unit();
    let target = unital.dim();
    let mut r = rng(0x9a0);
    for _ in 0..2 {
        let x = unital.element(&gaussian_vec(&mut r, target));
        let scale = linalg::op_norm(&x).max(1e-300);
        let (groups, _) = linalg::spectral_projections(&x, 1e-8 * scale);
        if groups.len() == target {
            return Ok(groups.into_iter().map(|(_, p)| p).collect());
        }
    }
    Err(consistency(format!("could not separate the {target} minimal projections of an abelian algebra")))
}

/// The abelian algebra spanned by the spectral projections of a random
/// self-adjoint element of `m`; each projection is checked to be minimal in `m`.
pub fn random_masa(m: &MatrixStarAlgebra, seed: u64) -> Result<MatrixStarAlgebra> {
    let mut r = rng(seed);
    let n = m.ambient_dim();
    for _ in 0..2 {
        let x = m.element(&gaussian_vec(&mut r, m.dim()));
        let scale = linalg::op_norm(&x).max(1e-300);
        let (groups, _) = linalg::spectral_projections(&x, 1e-8 * scale);
        let projections: Vec<ComplexMatrix> = groups.into_iter().map(|(_, p)| p).collect();
        let minimal = projections.iter().all(|p| {
            let cut: Vec<ComplexMatrix> = m.basis().iter().map(|b| p * b * p).collect();
            MatrixStarAlgebra::from_spanning(n, &cut).map(|s| s.dim() == 1).unwrap_or(false)
        });
        if !minimal {
            continue;
        }
        let mut masa = MatrixStarAlgebra::from_spanning(n, &projections)?;
        masa.product_closed = true;
        if !masa.is_abelian(1e-8) || !m.contains_algebra(&masa, 1e-8) {
            return Err(consistency("sampled abelian subalgebra fails verification"));
        }
        return Ok(masa);
    }
    Err(consistency("random element has colliding eigenvalues twice; no MASA produced"))
}

/// Dimension check used by tests and reports: `Σ P_i = 1`, `P_i P_j = δ_ij P_i`.
pub fn projection_system_residual(ps: &[ComplexMatrix]) -> f64 {
    let Some(first) = ps.first() else { return 0.0 };
    let n = first.nrows();
    let mut worst = max_abs(&(ps.iter().fold(zeros(n, n), |acc, p| acc + p) - identity(n)));
    for (i, p) in ps.iter().enumerate() {
        worst = worst.max(linalg::projection_residual(p));
        for q in &ps[i + 1..] {
            worst = worst.max(max_abs(&(p * q)));
        }
    }
    worst
}
