//! Dense complex linear algebra shared by every module.
//!
//! All operators are `nalgebra` dynamic matrices over `Complex64`. The helpers
//! here add the few spectral routines the rest of the crate leans on: sorted
//! Hermitian eigendecompositions, null spaces with an explicit cutoff, Gram
//! quotients, and the isometric real coordinates of Hermitian matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type RealMatrix = DMatrix<f64>;

/// Singular or eigenvalues below `RANK_TOL * largest` are treated as zero.
pub const RANK_TOL: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(rows, cols)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// Matrix unit `E_ij` of size `rows x cols`.
pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = zeros(rows, cols);
    m[(i, j)] = c(1.0, 0.0);
    m
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Largest absolute entry; 0 for empty matrices.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Operator (spectral) norm.
pub fn op_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    svd(m).1.first().copied().unwrap_or(0.0)
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

/// Eigendecomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn eigh(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    eigh(m).0.first().copied().unwrap_or(0.0)
}

pub fn max_eigenvalue(m: &ComplexMatrix) -> f64 {
    eigh(m).0.last().copied().unwrap_or(0.0)
}

/// Positive square root of a positive semidefinite matrix (negative noise clipped).
pub fn sqrt_psd(m: &ComplexMatrix) -> ComplexMatrix {
    let (vals, vecs) = eigh(m);
    let d = ComplexMatrix::from_diagonal(&DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&v| c(v.max(0.0).sqrt(), 0.0)),
    ));
    &vecs * d * vecs.adjoint()
}

/// Inverse square root of a positive definite matrix.
pub fn inv_sqrt_pd(m: &ComplexMatrix) -> ComplexMatrix {
    let (vals, vecs) = eigh(m);
    let d = ComplexMatrix::from_diagonal(&DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&v| c(1.0 / v.max(f64::MIN_POSITIVE).sqrt(), 0.0)),
    ));
    &vecs * d * vecs.adjoint()
}

/// Full singular value decomposition `m = U diag(s) V*` with `U` square of
/// size `rows`, `V` square of size `cols` and `min(rows, cols)` singular
/// values in descending order.
pub fn svd(m: &ComplexMatrix) -> (ComplexMatrix, Vec<f64>, ComplexMatrix) {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return (identity(rows), Vec::new(), identity(cols));
    }
    let f = faer::Mat::<faer::c64>::from_fn(rows, cols, |i, j| faer::c64::new(m[(i, j)].re, m[(i, j)].im));
    let dec = f.svd().expect("SVD did not converge");
    let (fu, fs, fv) = (dec.U(), dec.S(), dec.V());
    let mut order: Vec<usize> = (0..rows.min(cols)).collect();
    order.sort_by(|&a, &b| fs[b].re.total_cmp(&fs[a].re));
    let values = order.iter().map(|&k| fs[k].re).collect();
    let perm = |n: usize, k: usize| if k < order.len() { order[k] } else { k.min(n - 1) };
    let u = ComplexMatrix::from_fn(rows, rows, |i, k| {
        let z = fu[(i, perm(rows, k))];
        c(z.re, z.im)
    });
    let v = ComplexMatrix::from_fn(cols, cols, |i, k| {
        let z = fv[(i, perm(cols, k))];
        c(z.re, z.im)
    });
    (u, values, v)
}

/// Real counterpart of [`svd`].
pub fn svd_real(m: &RealMatrix) -> (RealMatrix, Vec<f64>, RealMatrix) {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return (RealMatrix::identity(rows, rows), Vec::new(), RealMatrix::identity(cols, cols));
    }
    let f = faer::Mat::<f64>::from_fn(rows, cols, |i, j| m[(i, j)]);
    let dec = f.svd().expect("SVD did not converge");
    let (fu, fs, fv) = (dec.U(), dec.S(), dec.V());
    let mut order: Vec<usize> = (0..rows.min(cols)).collect();
    order.sort_by(|&a, &b| fs[b].total_cmp(&fs[a]));
    let values = order.iter().map(|&k| fs[k]).collect();
    let perm = |k: usize| if k < order.len() { order[k] } else { k };
    let u = RealMatrix::from_fn(rows, rows, |i, k| fu[(i, perm(k))]);
    let v = RealMatrix::from_fn(cols, cols, |i, k| fv[(i, perm(k))]);
    (u, values, v)
}

/// Singular values (descending, padded with zeros to one per column) and the
/// matching right singular vectors as columns.
pub fn svd_right(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let (_, mut values, v) = svd(m);
    values.resize(m.ncols(), 0.0);
    (values, v)
}

/// Real-matrix counterpart of [`svd_right`].
pub fn svd_right_real(m: &RealMatrix) -> (Vec<f64>, RealMatrix) {
    let (_, mut values, v) = svd_real(m);
    values.resize(m.ncols(), 0.0);
    (values, v)
}

/// Orthonormal basis (columns) of the null space: right singular vectors whose
/// singular value is at most `cutoff`.
pub fn null_space(m: &ComplexMatrix, cutoff: f64) -> ComplexMatrix {
    let (values, v) = svd_right(m);
    let keep: Vec<usize> = (0..values.len()).filter(|&k| values[k] <= cutoff).collect();
    ComplexMatrix::from_fn(v.nrows(), keep.len(), |i, j| v[(i, keep[j])])
}

pub fn null_space_real(m: &RealMatrix, cutoff: f64) -> RealMatrix {
    let (values, v) = svd_right_real(m);
    let keep: Vec<usize> = (0..values.len()).filter(|&k| values[k] <= cutoff).collect();
    RealMatrix::from_fn(v.nrows(), keep.len(), |i, j| v[(i, keep[j])])
}

/// Orthonormal basis (columns) of the column span, rank decided by
/// `RANK_TOL` relative to the largest singular value.
pub fn column_span(m: &ComplexMatrix) -> ComplexMatrix {
    let (u, values, _) = svd(m);
    let smax = values.first().copied().unwrap_or(0.0);
    let keep = values.iter().filter(|&&s| smax > 0.0 && s > RANK_TOL * smax).count();
    ComplexMatrix::from_fn(m.nrows(), keep, |i, j| u[(i, j)])
}

/// Real counterpart of [`column_span`].
pub fn column_span_real(m: &RealMatrix) -> RealMatrix {
    let (u, values, _) = svd_real(m);
    let smax = values.first().copied().unwrap_or(0.0);
    let keep = values.iter().filter(|&&s| smax > 0.0 && s > RANK_TOL * smax).count();
    RealMatrix::from_fn(m.nrows(), keep, |i, j| u[(i, j)])
}

pub fn rank(m: &ComplexMatrix) -> usize {
    column_span(m).ncols()
}

/// Moore–Penrose pseudo-inverse with singular values below `RANK_TOL`
/// relative to the largest dropped.
pub fn pinv(m: &ComplexMatrix) -> ComplexMatrix {
    let (u, values, v) = svd(m);
    let smax = values.first().copied().unwrap_or(0.0);
    let mut out = zeros(m.ncols(), m.nrows());
    for (k, &s) in values.iter().enumerate() {
        if s > RANK_TOL * smax {
            out += (v.column(k) * u.column(k).adjoint()) * c(1.0 / s, 0.0);
        }
    }
    out
}

/// Real counterpart of [`pinv`].
pub fn pinv_real(m: &RealMatrix) -> RealMatrix {
    let (u, values, v) = svd_real(m);
    let smax = values.first().copied().unwrap_or(0.0);
    let mut out = RealMatrix::zeros(m.ncols(), m.nrows());
    for (k, &s) in values.iter().enumerate() {
        if s > RANK_TOL * smax {
            out += (v.column(k) * u.column(k).transpose()) / s;
        }
    }
    out
}

/// Solves `x * src = dst` in the least-squares sense, i.e. the linear map that
/// sends each column of `src` to the matching column of `dst`, defined on the
/// span of `src` and zero on its orthogonal complement.
pub fn linear_extension(src: &ComplexMatrix, dst: &ComplexMatrix) -> ComplexMatrix {
    dst * pinv(src)
}

/// Quotient of a coefficient space by the null space of a positive
/// semidefinite Gram matrix `G` (with `<x, y> = y^* G x`).
///
/// `embed` maps coefficients to orthonormal coordinates of the quotient,
/// `lift` is a right inverse of `embed`.
#[derive(Clone, Debug)]
pub struct GramQuotient {
    pub embed: ComplexMatrix,
    pub lift: ComplexMatrix,
    pub eigenvalues: Vec<f64>,
}

impl GramQuotient {
    /// Builds the quotient keeping eigenvalues above `cutoff`.
    pub fn new(gram: &ComplexMatrix, cutoff: f64) -> Self {
        let (vals, vecs) = eigh(gram);
        let keep: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > cutoff).collect();
        let n = gram.nrows();
        let r = keep.len();
        let embed = ComplexMatrix::from_fn(r, n, |i, j| vecs[(j, keep[i])].conj() * vals[keep[i]].sqrt());
        let lift = ComplexMatrix::from_fn(n, r, |i, j| vecs[(i, keep[j])] / vals[keep[j]].sqrt());
        Self { embed, lift, eigenvalues: vals }
    }

    pub fn dim(&self) -> usize {
        self.embed.nrows()
    }

    /// Transports a coefficient-space operator that preserves the null space.
    pub fn transport(&self, op: &ComplexMatrix) -> ComplexMatrix {
        &self.embed * op * &self.lift
    }
}

/// Coordinates of a Hermitian matrix in an isometric real basis: the
/// diagonal, then `sqrt(2) Re` and `sqrt(2) Im` of the strict upper triangle.
pub fn hermitian_to_real(m: &ComplexMatrix) -> DVector<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        out.push(m[(i, i)].re);
    }
    let s = std::f64::consts::SQRT_2;
    for i in 0..n {
        for j in (i + 1)..n {
            let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            out.push(s * z.re);
            out.push(s * z.im);
        }
    }
    DVector::from_vec(out)
}

/// Inverse of [`hermitian_to_real`].
pub fn real_to_hermitian(v: &[f64], n: usize) -> ComplexMatrix {
    let mut m = zeros(n, n);
    for i in 0..n {
        m[(i, i)] = c(v[i], 0.0);
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut k = n;
    for i in 0..n {
        for j in (i + 1)..n {
            let z = c(s * v[k], s * v[k + 1]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    m
}

/// All real and imaginary parts of the entries, row-major: an isometric
/// embedding of `M_n` into `R^{2 n^2}` for the real part of the trace form.
pub fn complex_to_real(m: &ComplexMatrix) -> DVector<f64> {
    let mut out = Vec::with_capacity(2 * m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)].re);
            out.push(m[(i, j)].im);
        }
    }
    DVector::from_vec(out)
}

/// Trace inner product `tr(b^* a)`.
pub fn trace_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
}

/// Returns true when `m` is a projection up to `tol` (idempotent and self-adjoint).
pub fn is_projection(m: &ComplexMatrix, tol: f64) -> bool {
    projection_residual(m) <= tol
}

pub fn projection_residual(m: &ComplexMatrix) -> f64 {
    max_abs(&(m * m - m)).max(max_abs(&(m - m.adjoint())))
}

/// Spectral projections of a Hermitian matrix, grouping eigenvalues whose
/// consecutive gaps are at most `tol`. Returns `(value, projection)` pairs
/// with ascending values, and the smallest gap between distinct groups.
pub fn spectral_projections(m: &ComplexMatrix, tol: f64) -> (Vec<(f64, ComplexMatrix)>, f64) {
    let (vals, vecs) = eigh(m);
    let n = vals.len();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut min_gap = f64::INFINITY;
    for k in 0..n {
        match groups.last_mut() {
            Some(g) if vals[k] - vals[*g.last().unwrap()] <= tol => g.push(k),
            Some(g) => {
                min_gap = min_gap.min(vals[k] - vals[*g.last().unwrap()]);
                groups.push(vec![k]);
            }
            None => groups.push(vec![k]),
        }
    }
    let out = groups
        .into_iter()
        .map(|g| {
            let cols = ComplexMatrix::from_fn(n, g.len(), |i, j| vecs[(i, g[j])]);
            let value = g.iter().map(|&k| vals[k]).sum::<f64>() / g.len() as f64;
            (value, &cols * cols.adjoint())
        })
        .collect();
    (out, min_gap)
}

/// Orthonormal basis (columns) of the range of a projection.
pub fn range_isometry(p: &ComplexMatrix) -> ComplexMatrix {
    let (vals, vecs) = eigh(p);
    let keep: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > 0.5).collect();
    ComplexMatrix::from_fn(p.nrows(), keep.len(), |i, j| vecs[(i, keep[j])])
}
