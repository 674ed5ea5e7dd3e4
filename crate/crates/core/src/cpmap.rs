//! Completely positive maps `A -> M_d`, their Choi blocks, the CP order and
//! minimal Stinespring dilations.
//!
//! Two independent dilation builders live here. [`minimal_stinespring`] works
//! on `A ⊗ C^d` with the form `<a ⊗ h, b ⊗ h'> = <φ(b*a)h, h'>`;
//! [`kraus_dilation`] reads Kraus operators off the Choi eigenvectors. They are
//! linked by [`stinespring_equivalence`].

use crate::algebra::{AlgebraElement, FiniteCStarAlgebra, MatrixUnit, Representation, State, ValidationReport};
use crate::error::{consistency, domain, shape, Result};
use crate::linalg::{self, c, identity, kron, max_abs, zeros, ComplexMatrix, GramQuotient, RANK_TOL};

/// A linear map `A -> M_d` stored by the images of matrix units. Used both for
/// general CP maps and for UCP maps; unitality is checked, not assumed.
#[derive(Clone, Debug)]
pub struct UcpMap {
    algebra: FiniteCStarAlgebra,
    target_dim: usize,
    images: Vec<ComplexMatrix>,
}

impl UcpMap {
    pub fn new(algebra: &FiniteCStarAlgebra, target_dim: usize, images: Vec<ComplexMatrix>) -> Result<Self> {
        if images.len() != algebra.dim() {
            return Err(shape(format!("expected {} matrix-unit images, got {}", algebra.dim(), images.len())));
        }
        if let Some(m) = images.iter().find(|m| m.shape() != (target_dim, target_dim)) {
            return Err(shape(format!("image of shape {:?}, expected {target_dim}x{target_dim}", m.shape())));
        }
        Ok(Self { algebra: algebra.clone(), target_dim, images })
    }

    pub fn from_fn(algebra: &FiniteCStarAlgebra, target_dim: usize, f: impl Fn(MatrixUnit) -> ComplexMatrix) -> Result<Self> {
        Self::new(algebra, target_dim, algebra.matrix_units().into_iter().map(f).collect())
    }

    pub fn zero(algebra: &FiniteCStarAlgebra, target_dim: usize) -> Self {
        Self { algebra: algebra.clone(), target_dim, images: vec![zeros(target_dim, target_dim); algebra.dim()] }
    }

    /// The identity map on `M_n`.
    pub fn identity(n: usize) -> Self {
        let algebra = FiniteCStarAlgebra::full(n);
        Self::from_fn(&algebra, n, |u| linalg::unit(n, n, u.i, u.j)).expect("consistent shapes")
    }

    /// A state viewed as a map into `M_1`.
    pub fn from_state(state: &State) -> Self {
        Self::from_fn(state.algebra(), 1, |u| ComplexMatrix::from_element(1, 1, state.value(u))).expect("consistent shapes")
    }

    /// Rebuilds the map from Choi blocks `C_k = Σ φ(e_ij) ⊗ e_ij`.
    pub fn from_choi(algebra: &FiniteCStarAlgebra, target_dim: usize, blocks: &[ComplexMatrix]) -> Result<Self> {
        if blocks.len() != algebra.num_blocks() {
            return Err(shape("Choi block count does not match the algebra"));
        }
        for (k, b) in blocks.iter().enumerate() {
            let s = target_dim * algebra.block_size(k);
            if b.shape() != (s, s) {
                return Err(shape(format!("Choi block {k} has shape {:?}, expected {s}x{s}", b.shape())));
            }
        }
        Self::from_fn(algebra, target_dim, |u| {
            let n = algebra.block_size(u.block);
            ComplexMatrix::from_fn(target_dim, target_dim, |a, b| blocks[u.block][(a * n + u.i, b * n + u.j)])
        })
    }

    /// `x ↦ Σ_r K_r* x_k K_r` on block `k`, zero on the other blocks; each
    /// `K_r` is `n_k x d`.
    pub fn from_kraus(algebra: &FiniteCStarAlgebra, target_dim: usize, block: usize, operators: &[ComplexMatrix]) -> Result<Self> {
        if block >= algebra.num_blocks() {
            return Err(shape(format!("block index {block} out of range")));
        }
        let n = algebra.block_size(block);
        if let Some(k) = operators.iter().find(|k| k.shape() != (n, target_dim)) {
            return Err(shape(format!("Kraus operator of shape {:?}, expected {n}x{target_dim}", k.shape())));
        }
        Self::from_fn(algebra, target_dim, |u| {
            if u.block != block {
                return zeros(target_dim, target_dim);
            }
            operators.iter().fold(zeros(target_dim, target_dim), |acc, k| acc + k.adjoint() * linalg::unit(n, n, u.i, u.j) * k)
        })
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

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.algebra != other.algebra || self.target_dim != other.target_dim {
            return Err(shape("maps have different domains or target dimensions"));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let images = self.images.iter().zip(&other.images).map(|(a, b)| a + b).collect();
        Ok(Self { images, ..self.clone() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let images = self.images.iter().zip(&other.images).map(|(a, b)| a - b).collect();
        Ok(Self { images, ..self.clone() })
    }

    pub fn scale(&self, t: f64) -> Self {
        Self { images: self.images.iter().map(|m| m * c(t, 0.0)).collect(), ..self.clone() }
    }

    /// Largest entry distance over all matrix-unit images.
    pub fn distance(&self, other: &Self) -> f64 {
        if self.check_compatible(other).is_err() {
            return f64::INFINITY;
        }
        self.images.iter().zip(&other.images).map(|(a, b)| max_abs(&(a - b))).fold(0.0, f64::max)
    }

    /// Block `k` is the `d n_k x d n_k` matrix `Σ_ij φ(e_ij) ⊗ e_ij`.
    pub fn choi_blocks(&self) -> Vec<ComplexMatrix> {
        (0..self.algebra.num_blocks())
            .map(|k| {
                let n = self.algebra.block_size(k);
                let d = self.target_dim;
                let mut out = zeros(d * n, d * n);
                for i in 0..n {
                    for j in 0..n {
                        out += kron(self.image(MatrixUnit { block: k, i, j }), &linalg::unit(n, n, i, j));
                    }
                }
                out
            })
            .collect()
    }

    /// `max ‖φ(e*) - φ(e)*‖` over matrix units.
    pub fn hermiticity_residual(&self) -> f64 {
        self.algebra
            .matrix_units()
            .into_iter()
            .map(|u| max_abs(&(self.image(u.adjoint()) - self.image(u).adjoint())))
            .fold(0.0, f64::max)
    }

    /// Worst Choi eigenvalue deficit, measured against `1e-9 (tr C_k + 1)`.
    /// Non-positive means CP.
    pub fn cp_defect(&self) -> f64 {
        self.choi_blocks()
            .iter()
            .map(|b| {
                let lo = linalg::min_eigenvalue(b);
                -lo - 1e-9 * (b.trace().re.abs() + 1.0)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_cp(&self) -> bool {
        self.hermiticity_residual() <= 1e-9 && self.cp_defect() <= 0.0
    }

    /// `‖φ(1) - 1_d‖`.
    pub fn unitality_residual(&self) -> f64 {
        max_abs(&(self.apply(&self.algebra.unit()) - identity(self.target_dim)))
    }

    pub fn is_ucp(&self, tol: f64) -> bool {
        self.is_cp() && self.unitality_residual() <= tol
    }

    pub fn validate_ucp(&self, tol: f64) -> ValidationReport {
        ValidationReport::from_checks(
            tol,
            vec![
                ("hermiticity".into(), self.hermiticity_residual()),
                ("complete positivity".into(), self.cp_defect().max(0.0)),
                ("unitality".into(), self.unitality_residual()),
            ],
        )
    }
}

/// `ψ ≤ φ` in the CP order: every Choi block of `φ - ψ` has minimum
/// eigenvalue at least `-tol`.
pub fn cp_leq(psi: &UcpMap, phi: &UcpMap, tol: f64) -> Result<bool> {
    let diff = phi.sub(psi)?;
    Ok(diff.choi_blocks().iter().all(|b| linalg::min_eigenvalue(b) >= -tol))
}

/// Kraus operators `K_r` (`n_k x d`) per block, with `φ(x) = Σ_k Σ_r K_r* x_k K_r`
/// and `r` running over the rank of the Choi block.
pub fn kraus_operators(phi: &UcpMap) -> Result<Vec<Vec<ComplexMatrix>>> {
    if !phi.is_cp() {
        return Err(domain("map is not completely positive"));
    }
    let blocks = phi.choi_blocks();
    let eig: Vec<(Vec<f64>, ComplexMatrix)> = blocks.iter().map(linalg::eigh).collect();
    let top = eig.iter().filter_map(|(v, _)| v.last().copied()).fold(0.0, f64::max);
    let d = phi.target_dim();
    Ok(eig
        .iter()
        .enumerate()
        .map(|(k, (vals, vecs))| {
            let n = phi.algebra().block_size(k);
            vals.iter()
                .enumerate()
                .filter(|(_, &l)| l > RANK_TOL * top)
                .map(|(r, &l)| ComplexMatrix::from_fn(n, d, |i, a| (vecs[(a * n + i, r)] * l.sqrt()).conj()))
                .collect()
        })
        .collect())
}

/// `(ρ, V, K)` with `φ(a) = V* ρ(a) V`.
#[derive(Clone, Debug)]
pub struct StinespringDilation {
    pub phi: UcpMap,
    pub rep: Representation,
    pub v: ComplexMatrix,
    pub minimal: bool,
}

impl StinespringDilation {
    pub fn dim(&self) -> usize {
        self.rep.target_dim()
    }

    /// Columns `ρ(e) V f_p` over matrix units `e` and basis vectors `f_p`.
    pub fn spanning_matrix(&self) -> ComplexMatrix {
        let d = self.phi.target_dim();
        let units = self.phi.algebra().matrix_units();
        let mut out = zeros(self.dim(), units.len() * d);
        for (col, u) in units.iter().enumerate() {
            let block = self.rep.image(*u) * &self.v;
            out.view_mut((0, col * d), (self.dim(), d)).copy_from(&block);
        }
        out
    }

    pub fn spanning_rank(&self) -> usize {
        linalg::rank(&self.spanning_matrix())
    }

    /// `max ‖V*ρ(e)V - φ(e)‖` over matrix units.
    pub fn reconstruction_residual(&self) -> f64 {
        self.phi
            .algebra()
            .matrix_units()
            .into_iter()
            .map(|u| max_abs(&(self.v.adjoint() * self.rep.image(u) * &self.v - self.phi.image(u))))
            .fold(0.0, f64::max)
    }

    pub fn isometry_residual(&self) -> f64 {
        max_abs(&(self.v.adjoint() * &self.v - identity(self.phi.target_dim())))
    }

    /// `(W ρ W*, W V)` for a unitary `W`.
    pub fn conjugate(&self, w: &ComplexMatrix) -> Self {
        Self { phi: self.phi.clone(), rep: self.rep.conjugate(w), v: w * &self.v, minimal: self.minimal }
    }

    /// The map `V* X ρ(·) V` for an operator `X` on `K`.
    pub fn compress(&self, x: &ComplexMatrix) -> UcpMap {
        let vx = self.v.adjoint() * x;
        UcpMap::from_fn(self.phi.algebra(), self.phi.target_dim(), |u| &vx * self.rep.image(u) * &self.v).expect("consistent shapes")
    }
}

/// Minimal dilation through the Gram form on `A ⊗ C^d`, built block by block.
pub fn minimal_stinespring(phi: &UcpMap) -> Result<StinespringDilation> {
    if !phi.is_cp() {
        return Err(domain("map is not completely positive (Choi block not PSD)"));
    }
    let algebra = phi.algebra();
    let d = phi.target_dim();
    let grams: Vec<ComplexMatrix> = (0..algebra.num_blocks()).map(|k| block_gram(phi, k)).collect();
    let eigs: Vec<(Vec<f64>, ComplexMatrix)> = grams.iter().map(linalg::eigh).collect();
    let top = eigs.iter().filter_map(|(v, _)| v.last().copied()).fold(0.0, f64::max);
    for (vals, _) in &eigs {
        if let Some(&lo) = vals.first() {
            if lo < -1e-9 * (top + 1.0) {
                return Err(domain(format!("Gram matrix has negative eigenvalue {lo:.3e}")));
            }
        }
    }
    let quotients: Vec<GramQuotient> = grams.iter().map(|g| GramQuotient::new(g, RANK_TOL * top)).collect();
    let dims: Vec<usize> = quotients.iter().map(GramQuotient::dim).collect();
    let total: usize = dims.iter().sum();
    let offsets: Vec<usize> = dims.iter().scan(0, |acc, &x| {
        let o = *acc;
        *acc += x;
        Some(o)
    }).collect();

    let mut images = Vec::with_capacity(algebra.dim());
    for u in algebra.matrix_units() {
        let n = algebra.block_size(u.block);
        let mut img = zeros(total, total);
        let left = left_multiplication(n, d, u.i, u.j);
        let q = &quotients[u.block];
        img.view_mut((offsets[u.block], offsets[u.block]), (dims[u.block], dims[u.block])).copy_from(&q.transport(&left));
        images.push(img);
    }
    let rep = Representation::new(algebra, total, images)?;

    let mut v = zeros(total, d);
    for (k, q) in quotients.iter().enumerate() {
        let n = algebra.block_size(k);
        let mut one = zeros(n * n * d, d);
        for i in 0..n {
            for p in 0..d {
                one[((i * n + i) * d + p, p)] = c(1.0, 0.0);
            }
        }
        v.view_mut((offsets[k], 0), (dims[k], d)).copy_from(&(&q.embed * one));
    }
    Ok(StinespringDilation { phi: phi.clone(), rep, v, minimal: true })
}

/// Gram matrix of block `k` on coefficients `(e_ij, p)` at index `(i n + j) d + p`:
/// `G[(e', q), (e, p)] = φ(e'* e)_{qp}`.
fn block_gram(phi: &UcpMap, k: usize) -> ComplexMatrix {
    let n = phi.algebra().block_size(k);
    let d = phi.target_dim();
    let mut g = zeros(n * n * d, n * n * d);
    for l in 0..n {
        for m in 0..n {
            for j in 0..n {
                // e_lm* e_lj = e_mj
                let img = phi.image(MatrixUnit { block: k, i: m, j });
                for q in 0..d {
                    for p in 0..d {
                        g[((l * n + m) * d + q, (l * n + j) * d + p)] = img[(q, p)];
                    }
                }
            }
        }
    }
    g
}

/// Left multiplication by `e_rs` on coefficients `(e_ij, p)` of one block.
fn left_multiplication(n: usize, d: usize, r: usize, s: usize) -> ComplexMatrix {
    let mut l = zeros(n * n * d, n * n * d);
    for j in 0..n {
        for p in 0..d {
            l[((r * n + j) * d + p, (s * n + j) * d + p)] = c(1.0, 0.0);
        }
    }
    l
}

/// Dilation from Kraus operators: `K = ⊕_k C^{n_k} ⊗ C^{r_k}`, `ρ_k(x) = x ⊗ 1`,
/// `V h = ⊕_k Σ_r K_r h ⊗ f_r`.
pub fn kraus_dilation(phi: &UcpMap) -> Result<StinespringDilation> {
    let kraus = kraus_operators(phi)?;
    let algebra = phi.algebra();
    let d = phi.target_dim();
    let dims: Vec<usize> = kraus.iter().enumerate().map(|(k, ops)| algebra.block_size(k) * ops.len()).collect();
    let total: usize = dims.iter().sum();
    let mut offsets = Vec::with_capacity(dims.len());
    let mut acc = 0;
    for &x in &dims {
        offsets.push(acc);
        acc += x;
    }
    let rep = Representation::from_fn(algebra, total, |u| {
        let r = kraus[u.block].len();
        let n = algebra.block_size(u.block);
        let mut img = zeros(total, total);
        img.view_mut((offsets[u.block], offsets[u.block]), (dims[u.block], dims[u.block]))
            .copy_from(&kron(&linalg::unit(n, n, u.i, u.j), &identity(r)));
        img
    })?;
    let mut v = zeros(total, d);
    for (k, ops) in kraus.iter().enumerate() {
        let r = ops.len();
        for (s, op) in ops.iter().enumerate() {
            for i in 0..op.nrows() {
                for b in 0..d {
                    v[(offsets[k] + i * r + s, b)] = op[(i, b)];
                }
            }
        }
    }
    Ok(StinespringDilation { phi: phi.clone(), rep, v, minimal: true })
}

/// The unitary `U: K_1 -> K_2` with `U V_1 = V_2` and `U ρ_1 U* = ρ_2`, built
/// on the spanning vectors `ρ_1(e)V_1 f_p ↦ ρ_2(e)V_2 f_p` and then verified.
pub fn stinespring_equivalence(d1: &StinespringDilation, d2: &StinespringDilation, tol: f64) -> Result<ComplexMatrix> {
    if d1.phi.algebra() != d2.phi.algebra() || d1.phi.target_dim() != d2.phi.target_dim() {
        return Err(domain("dilations of maps with different shapes"));
    }
    if d1.dim() != d2.dim() {
        return Err(domain(format!("dilation dimensions differ: {} vs {}", d1.dim(), d2.dim())));
    }
    let s1 = d1.spanning_matrix();
    let s2 = d2.spanning_matrix();
    if linalg::rank(&s1) != d1.dim() || linalg::rank(&s2) != d2.dim() {
        return Err(domain("dilation is not minimal"));
    }
    let u = linalg::linear_extension(&s1, &s2);
    let unitary = max_abs(&(u.adjoint() * &u - identity(d1.dim())));
    let intertwines_v = max_abs(&(&u * &d1.v - &d2.v));
    let covariance = d1
        .phi
        .algebra()
        .matrix_units()
        .into_iter()
        .map(|e| max_abs(&(&u * d1.rep.image(e) * u.adjoint() - d2.rep.image(e))))
        .fold(0.0, f64::max);
    let worst = unitary.max(intertwines_v).max(covariance);
    if worst > tol {
        return Err(consistency(format!(
            "equivalence check failed: unitarity {unitary:.3e}, UV {intertwines_v:.3e}, covariance {covariance:.3e}"
        )));
    }
    Ok(u)
}
