//! Hilbert C*-module dilations over `B = M_d`.
//!
//! The carrier is the quotient of `A ⊗ M_d` by the kernel of
//! `⟨a ⊗ b, c ⊗ b'⟩ = b'* φ(c* a) b`. Carrier vectors are columns in
//! coordinates that are orthonormal for the scalar form `tr ⟨x, y⟩`, so the
//! scalar adjoint is the conjugate transpose. In finite dimensions the module
//! is self-dual, which [`verify_self_dual`] checks rather than assumes.

use crate::algebra::{gns, AlgebraElement, MatrixUnit, State, ValidationReport};
use crate::commutant::{commutant, MatrixStarAlgebra, COMMUTANT_CUTOFF};
use crate::cpmap::{cp_leq, UcpMap};
use crate::error::{consistency, domain, Error, Result};
use crate::linalg::{self, c, identity, max_abs, zeros, ComplexMatrix, GramQuotient, RealMatrix};
use crate::radon::{commutator_residual, Flag};
use crate::random::{gaussian_matrix, rng};
use crate::symmetry::{g_invariance_defect, AlgebraAction};

use nalgebra::DVector;

/// A right `M_d`-module with an `M_d`-valued inner product.
#[derive(Clone, Debug)]
pub struct HilbertModule {
    base_dim: usize,
    /// `R(E_pq)` at index `p * d + q`: right multiplication by `E_pq`.
    right: Vec<ComplexMatrix>,
}

impl HilbertModule {
    pub fn new(base_dim: usize, right: Vec<ComplexMatrix>) -> Self {
        Self { base_dim, right }
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn carrier_dim(&self) -> usize {
        self.right.first().map_or(0, |r| r.nrows())
    }

    pub fn right_action(&self, p: usize, q: usize) -> &ComplexMatrix {
        &self.right[p * self.base_dim + q]
    }

    /// `x · b`.
    pub fn act(&self, x: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
        self.right_operator(b) * x
    }

    /// `R(b) = Σ b_pq R(E_pq)`.
    pub fn right_operator(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let n = self.carrier_dim();
        self.right.iter().enumerate().fold(zeros(n, n), |acc, (k, r)| acc + r * b[(k / self.base_dim, k % self.base_dim)])
    }

    /// `⟨x, y⟩_pq = y* R(E_qp) x`.
    pub fn inner(&self, x: &ComplexMatrix, y: &ComplexMatrix) -> ComplexMatrix {
        let d = self.base_dim;
        ComplexMatrix::from_fn(d, d, |p, q| (y.adjoint() * self.right_action(q, p) * x)[(0, 0)])
    }

    /// Largest violation of the module axioms on `samples` random vectors:
    /// positivity, definiteness, Hermitian symmetry, `⟨x·b, y⟩ = ⟨x, y⟩ b`,
    /// and that `R` is a unital anti-homomorphism with `R(b)* = R(b*)`.
    pub fn axioms_residual(&self, samples: usize, seed: u64) -> f64 {
        let n = self.carrier_dim();
        let d = self.base_dim;
        let mut worst = 0.0_f64;
        for p in 0..d {
            for q in 0..d {
                let r = self.right_action(p, q);
                worst = worst.max(max_abs(&(r.adjoint() - self.right_action(q, p))));
                for s in 0..d {
                    // x·E_pq·E_qs = x·E_ps, i.e. R(E_qs) R(E_pq) = R(E_ps).
                    let prod = self.right_action(q, s) * r;
                    worst = worst.max(max_abs(&(prod - self.right_action(p, s))));
                }
            }
        }
        let unit = (0..d).fold(zeros(n, n), |acc, p| acc + self.right_action(p, p));
        worst = worst.max(max_abs(&(unit - identity(n))));

        let mut g = rng(seed);
        for _ in 0..samples {
            let x = gaussian_matrix(&mut g, n, 1);
            let y = gaussian_matrix(&mut g, n, 1);
            let b = gaussian_matrix(&mut g, d, d);
            let xx = self.inner(&x, &x);
            let scale = linalg::frobenius(&x).powi(2).max(1.0);
            worst = worst.max((-linalg::min_eigenvalue(&xx)).max(0.0) / scale);
            worst = worst.max(max_abs(&(&xx - xx.adjoint())) / scale);
            // The scalar form is the trace of the B-valued one, and is definite.
            worst = worst.max((xx.trace().re - linalg::frobenius(&x).powi(2)).abs() / scale);
            let xy = self.inner(&x, &y);
            let yx = self.inner(&y, &x);
            let s2 = (linalg::frobenius(&x) * linalg::frobenius(&y)).max(1.0);
            worst = worst.max(max_abs(&(&xy - yx.adjoint())) / s2);
            let lhs = self.inner(&self.act(&x, &b), &y);
            worst = worst.max(max_abs(&(lhs - &xy * &b)) / (s2 * linalg::frobenius(&b)));
        }
        worst
    }
}

/// `(X, σ, e)` with `φ(a) = ⟨σ(a)e, e⟩`, plus `W_g` for covariant systems.
#[derive(Clone, Debug)]
pub struct PaschkeDilation {
    pub phi: UcpMap,
    pub module: HilbertModule,
    /// `σ(e_u)` in matrix-unit order.
    pub sigma: Vec<ComplexMatrix>,
    pub e: ComplexMatrix,
    pub action: Option<AlgebraAction>,
    pub w: Vec<ComplexMatrix>,
}

fn pre_index(phi: &UcpMap, u: MatrixUnit, p: usize, q: usize) -> usize {
    let d = phi.target_dim();
    (phi.algebra().index_of(u) * d + p) * d + q
}

/// Builds the module from `A ⊗ M_d`; rejects maps that are not CP.
pub fn paschke_dilation(phi: &UcpMap) -> Result<PaschkeDilation> {
    if !phi.is_cp() {
        return Err(domain(format!("map is not completely positive (Choi defect {:.3e})", phi.cp_defect())));
    }
    let alg = phi.algebra().clone();
    let d = phi.target_dim();
    let units = alg.matrix_units();
    let big = alg.dim() * d * d;

    // G[y, x] = tr ⟨x, y⟩ for x = e_ij ⊗ E_pq, y = e_lm ⊗ E_rs, which is
    // δ_li δ_qs φ(e_mj)_rp.
    let mut gram = zeros(big, big);
    for &x in &units {
        for &y in &units {
            if x.block != y.block || x.i != y.i {
                continue;
            }
            let img = phi.image(MatrixUnit { block: x.block, i: y.j, j: x.j });
            for p in 0..d {
                for q in 0..d {
                    for r in 0..d {
                        gram[(pre_index(phi, y, r, q), pre_index(phi, x, p, q))] = img[(r, p)];
                    }
                }
            }
        }
    }
    let quotient = GramQuotient::new(&gram, linalg::RANK_TOL * gram.norm().max(1.0));

    let mut right = Vec::with_capacity(d * d);
    for r in 0..d {
        for s in 0..d {
            // (e_ij ⊗ E_pq) · E_rs = δ_qr e_ij ⊗ E_ps.
            let mut op = zeros(big, big);
            for &u in &units {
                for p in 0..d {
                    op[(pre_index(phi, u, p, s), pre_index(phi, u, p, r))] = c(1.0, 0.0);
                }
            }
            right.push(quotient.transport(&op));
        }
    }
    let sigma = units
        .iter()
        .map(|&a| {
            let mut op = zeros(big, big);
            for &u in &units {
                if let Some(prod) = a.times(u) {
                    for p in 0..d {
                        for q in 0..d {
                            op[(pre_index(phi, prod, p, q), pre_index(phi, u, p, q))] = c(1.0, 0.0);
                        }
                    }
                }
            }
            quotient.transport(&op)
        })
        .collect();
    let mut one = zeros(big, 1);
    for k in 0..alg.num_blocks() {
        for i in 0..alg.block_size(k) {
            for p in 0..d {
                one[(pre_index(phi, MatrixUnit { block: k, i, j: i }, p, p), 0)] = c(1.0, 0.0);
            }
        }
    }
    let e = &quotient.embed * one;
    Ok(PaschkeDilation { phi: phi.clone(), module: HilbertModule::new(d, right), sigma, e, action: None, w: Vec::new() })
}

/// The `d = 1` module of a state: its GNS space with `e = Ω`.
pub fn from_gns(state: &State) -> Result<PaschkeDilation> {
    let triple = gns(state)?;
    let phi = UcpMap::from_state(state);
    Ok(PaschkeDilation {
        phi,
        module: HilbertModule::new(1, vec![identity(triple.dim)]),
        sigma: triple.rep.images().to_vec(),
        e: triple.cyclic_vector.clone(),
        action: None,
        w: Vec::new(),
    })
}

impl PaschkeDilation {
    pub fn carrier_dim(&self) -> usize {
        self.module.carrier_dim()
    }

    pub fn base_dim(&self) -> usize {
        self.module.base_dim()
    }

    /// `σ(a) = Σ a_u σ(e_u)`.
    pub fn sigma_of(&self, a: &AlgebraElement) -> ComplexMatrix {
        let n = self.carrier_dim();
        self.phi.algebra().matrix_units().iter().zip(&self.sigma).fold(zeros(n, n), |acc, (&u, s)| acc + s * a.coefficient(u))
    }

    /// Columns `σ(e_u)(e · E_pq)`, which span the carrier.
    pub fn spanning_matrix(&self) -> ComplexMatrix {
        self.spanning_of(&self.sigma)
    }

    /// Columns `S_u (e · E_pq)` for operators `S_u` listed per matrix unit.
    fn spanning_of(&self, ops: &[ComplexMatrix]) -> ComplexMatrix {
        let d = self.base_dim();
        let n = self.carrier_dim();
        let mut cols = zeros(n, ops.len() * d * d);
        let mut k = 0;
        for s in ops {
            for p in 0..d {
                for q in 0..d {
                    cols.set_column(k, &(s * self.module.right_action(p, q) * &self.e).column(0));
                    k += 1;
                }
            }
        }
        cols
    }

    /// `⟨T σ(e_u) e, e⟩` for every matrix unit.
    pub fn compress(&self, t: &ComplexMatrix) -> UcpMap {
        let images = self.sigma.iter().map(|s| self.module.inner(&(t * s * &self.e), &self.e)).collect();
        UcpMap::new(self.phi.algebra(), self.base_dim(), images).expect("shapes")
    }

    /// Adjointable operators commuting with `σ(A)` (and the `W_g` if present).
    pub fn covariant_generators(&self, with_w: bool) -> Vec<ComplexMatrix> {
        let mut gens: Vec<ComplexMatrix> = self.sigma.clone();
        gens.extend(self.module.right.iter().cloned());
        if with_w {
            gens.extend(self.w.iter().cloned());
        }
        gens
    }

    /// Every structural invariant, with residuals.
    pub fn validate(&self, tol: f64) -> ValidationReport {
        let alg = self.phi.algebra();
        let units = alg.matrix_units();
        let n = self.carrier_dim();
        let mut checks = Vec::new();
        checks.push(("reproduces φ".to_string(), self.compress(&identity(n)).distance(&self.phi)));
        let span = linalg::rank(&self.spanning_matrix());
        checks.push(("σ(A)(e·B) spans the carrier".to_string(), (n - span) as f64));
        let mut hom = 0.0_f64;
        let mut adj = 0.0_f64;
        for (a, &ua) in units.iter().enumerate() {
            adj = adj.max(max_abs(&(self.sigma[a].adjoint() - &self.sigma[alg.index_of(ua.adjoint())])));
            for (b, &ub) in units.iter().enumerate() {
                let prod = &self.sigma[a] * &self.sigma[b];
                let expect = ua.times(ub).map_or_else(|| zeros(n, n), |u| self.sigma[alg.index_of(u)].clone());
                hom = hom.max(max_abs(&(prod - expect)));
            }
        }
        checks.push(("σ multiplicative".to_string(), hom));
        checks.push(("σ *-preserving".to_string(), adj));
        let unit = self.sigma_of(&alg.unit());
        checks.push(("σ unital".to_string(), max_abs(&(unit - identity(n)))));
        checks.push(("σ adjointable (module maps)".to_string(), commutator_residual_all(&self.sigma, &self.module.right)));
        checks.push(("module axioms".to_string(), self.module.axioms_residual(4, 0xa1)));
        if let Some(act) = &self.action {
            let mut cov = 0.0_f64;
            for (g, w) in self.w.iter().enumerate() {
                cov = cov.max(max_abs(&(w * &self.e - &self.e)));
                cov = cov.max(max_abs(&(w.adjoint() * w - identity(n))));
                cov = cov.max(commutator_residual(w, &self.module.right));
                for (a, &u) in units.iter().enumerate() {
                    let lhs = w * &self.sigma[a] * w.adjoint();
                    cov = cov.max(max_abs(&(lhs - self.sigma_of(&act.apply_unit(g, u)))));
                }
            }
            checks.push(("W covariance".to_string(), cov));
        }
        ValidationReport::from_checks(tol, checks)
    }

    /// The Paschke dilation of a G-invariant map with its module
    /// isomorphisms `W_g : σ(a)(e·b) ↦ σ(τ_g(a))(e·b)`.
    pub fn covariant(phi: &UcpMap, action: &AlgebraAction, tol: f64) -> Result<Self> {
        let defect = g_invariance_defect(phi, action);
        if defect > tol {
            return Err(domain(format!("map is not G-invariant (defect {defect:.3e})")));
        }
        let mut p = paschke_dilation(phi)?;
        let src = p.spanning_matrix();
        let units = phi.algebra().matrix_units();
        let n = p.carrier_dim();
        let mut w = Vec::with_capacity(action.group().order());
        for g in 0..action.group().order() {
            let moved: Vec<ComplexMatrix> = units.iter().map(|&u| p.sigma_of(&action.apply_unit(g, u))).collect();
            let dst = p.spanning_of(&moved);
            let wg = linalg::linear_extension(&src, &dst);
            let res = max_abs(&(wg.adjoint() * &wg - identity(n)));
            if res > tol.max(1e-8) {
                return Err(consistency(format!("W_{g} is not unitary ({res:.3e})")));
            }
            w.push(wg);
        }
        p.w = w;
        p.action = Some(action.clone());
        let report = p.validate(tol.max(1e-8));
        if !report.valid {
            return Err(consistency(format!("covariant module dilation failed: {}", report.violations.join("; "))));
        }
        Ok(p)
    }
}

fn commutator_residual_all(a: &[ComplexMatrix], b: &[ComplexMatrix]) -> f64 {
    a.iter().map(|x| commutator_residual(x, b)).fold(0.0, f64::max)
}

/// Bounded module maps `τ : X → B` as rows `t_pq` with `τ(x)_pq = t_pq x`.
#[derive(Clone, Debug)]
pub struct ModuleMap {
    pub rows: Vec<ComplexMatrix>,
}

impl ModuleMap {
    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let d = (self.rows.len() as f64).sqrt().round() as usize;
        ComplexMatrix::from_fn(d, d, |p, q| (&self.rows[p * d + q] * x)[(0, 0)])
    }

    /// `x ↦ ⟨x, y⟩`.
    pub fn inner_with(module: &HilbertModule, y: &ComplexMatrix) -> Self {
        let d = module.base_dim();
        let rows = (0..d * d).map(|k| y.adjoint() * module.right_action(k % d, k / d)).collect();
        Self { rows }
    }
}

/// A basis of all module maps `X → B`, from `t_pq R(E_rs) = δ_sq t_pr`.
pub fn module_maps(module: &HilbertModule) -> Vec<ModuleMap> {
    let d = module.base_dim();
    let n = module.carrier_dim();
    let unknowns = d * d * n;
    let mut eqs: Vec<DVector<linalg::C64>> = Vec::new();
    for p in 0..d {
        for q in 0..d {
            for r in 0..d {
                for s in 0..d {
                    let rs = module.right_action(r, s);
                    for col in 0..n {
                        let mut row = DVector::zeros(unknowns);
                        for k in 0..n {
                            row[(p * d + q) * n + k] += rs[(k, col)];
                        }
                        if s == q {
                            row[(p * d + r) * n + col] -= c(1.0, 0.0);
                        }
                        eqs.push(row);
                    }
                }
            }
        }
    }
    let system = ComplexMatrix::from_fn(eqs.len(), unknowns, |i, j| eqs[i][j]);
    let ns = linalg::null_space(&system, COMMUTANT_CUTOFF);
    (0..ns.ncols())
        .map(|j| ModuleMap { rows: (0..d * d).map(|k| ComplexMatrix::from_fn(1, n, |_, col| ns[(k * n + col, j)])).collect() })
        .collect()
}

/// `x_τ` with `τ = ⟨·, x_τ⟩` by least squares from `R(E_pq) x = t_pq*`, and
/// the residual of the representation.
pub fn inner_representer(module: &HilbertModule, tau: &ModuleMap) -> (ComplexMatrix, f64) {
    let d = module.base_dim();
    let n = module.carrier_dim();
    let mut a = zeros(d * d * n, n);
    let mut rhs = zeros(d * d * n, 1);
    for p in 0..d {
        for q in 0..d {
            let k = p * d + q;
            a.view_mut((k * n, 0), (n, n)).copy_from(module.right_action(p, q));
            rhs.view_mut((k * n, 0), (n, 1)).copy_from(&tau.rows[k].adjoint());
        }
    }
    let x = linalg::pinv(&a) * rhs;
    let rebuilt = ModuleMap::inner_with(module, &x);
    let residual = tau.rows.iter().zip(&rebuilt.rows).map(|(s, t)| max_abs(&(s - t))).fold(0.0, f64::max);
    (x, residual)
}

#[derive(Clone, Debug)]
pub struct SelfDuality {
    pub maps_checked: usize,
    pub max_residual: f64,
}

/// Every module map in a spanning set is inner. A non-inner map would
/// contradict finite-dimensional self-duality and is reported as a
/// consistency error.
pub fn verify_self_dual(module: &HilbertModule, tol: f64) -> Result<SelfDuality> {
    let maps = module_maps(module);
    let expected = module.carrier_dim();
    if maps.len() != expected {
        return Err(consistency(format!("found {} module maps, expected {expected}", maps.len())));
    }
    let mut worst = 0.0_f64;
    for tau in &maps {
        let (_, res) = inner_representer(module, tau);
        worst = worst.max(res);
    }
    if worst > tol {
        return Err(consistency(format!("module map is not inner (residual {worst:.3e})")));
    }
    Ok(SelfDuality { maps_checked: maps.len(), max_residual: worst })
}

/// The module isomorphism `W : σ_1(a)(e_1 b) ↦ σ_2(a)(e_2 b)`, verified.
pub fn paschke_uniqueness(p1: &PaschkeDilation, p2: &PaschkeDilation, tol: f64) -> Result<ComplexMatrix> {
    if p1.carrier_dim() != p2.carrier_dim() || p1.base_dim() != p2.base_dim() {
        return Err(domain(format!("carrier dimensions differ: {} vs {}", p1.carrier_dim(), p2.carrier_dim())));
    }
    let gap = p1.phi.distance(&p2.phi);
    if gap > tol {
        return Err(domain(format!("dilations of different maps ({gap:.3e})")));
    }
    let w = linalg::linear_extension(&p1.spanning_matrix(), &p2.spanning_matrix());
    let n = p1.carrier_dim();
    let mut res = max_abs(&(w.adjoint() * &w - identity(n)));
    res = res.max(max_abs(&(&w * &p1.e - &p2.e)));
    for (r1, r2) in p1.module.right.iter().zip(&p2.module.right) {
        res = res.max(max_abs(&(&w * r1 - r2 * &w)));
    }
    for (s1, s2) in p1.sigma.iter().zip(&p2.sigma) {
        res = res.max(max_abs(&(&w * s1 * w.adjoint() - s2)));
    }
    if res > tol {
        return Err(consistency(format!("module isomorphism fails verification ({res:.3e})")));
    }
    Ok(w)
}

/// Module Radon–Nikodym derivative: `T` adjointable, commuting with `σ(A)`,
/// with `⟨T σ(a) e, e⟩ = ψ(a)`.
#[derive(Clone, Debug)]
pub struct ModuleRn {
    pub t: ComplexMatrix,
    pub in_unit_interval: Flag,
    /// Commutation with the `W_g`, when requested.
    pub commutes_with_w: Option<Flag>,
    pub residual: f64,
}

pub fn module_rn(p: &PaschkeDilation, psi: &UcpMap, covariant: bool, tol: f64) -> Result<ModuleRn> {
    if !cp_leq(psi, &p.phi, tol)? {
        return Err(Error::OrderViolation("φ - ψ is not completely positive".into()));
    }
    if covariant && p.action.is_none() {
        return Err(domain("covariant solve needs a covariant dilation"));
    }
    let n = p.carrier_dim();
    let d = p.base_dim();
    let m = commutant(n, &p.covariant_generators(false))?;
    let mut design = zeros(p.sigma.len() * d * d, m.dim());
    for (j, b) in m.basis().iter().enumerate() {
        let img = p.compress(b);
        for (u, x) in img.images().iter().enumerate() {
            for (k, z) in x.iter().enumerate() {
                design[(u * d * d + k, j)] = *z;
            }
        }
    }
    let mut rhs = zeros(design.nrows(), 1);
    for (u, x) in psi.images().iter().enumerate() {
        for (k, z) in x.iter().enumerate() {
            rhs[(u * d * d + k, 0)] = *z;
        }
    }
    let coef = linalg::pinv(&design) * rhs;
    let t = m.basis().iter().zip(coef.iter()).fold(zeros(n, n), |acc, (b, z)| acc + b * *z);
    let residual = p.compress(&t).distance(psi);
    if residual > tol.max(1e-8) {
        return Err(consistency(format!("module Radon–Nikodym solve leaves residual {residual:.3e}")));
    }
    let herm = max_abs(&(&t - t.adjoint()));
    let (vals, _) = linalg::eigh(&t);
    let outside = vals.iter().map(|&v| (-v).max(v - 1.0).max(0.0)).fold(herm, f64::max);
    let commutes_with_w = covariant.then(|| Flag::new(commutator_residual(&t, &p.w), tol.max(1e-8)));
    if let (Some(flag), Some(act)) = (commutes_with_w, &p.action) {
        let invariant = g_invariance_defect(psi, act) <= tol.max(1e-8);
        if flag.holds != invariant {
            return Err(consistency("W-commutation of the module derivative disagrees with G-invariance of ψ"));
        }
    }
    Ok(ModuleRn { t, in_unit_interval: Flag::new(outside, tol.max(1e-8)), commutes_with_w, residual })
}

/// Criterion (4): injectivity of `T ↦ ⟨T e, e⟩` on `(σ(A) ∪ W(G))′`.
#[derive(Clone, Debug)]
pub struct Criterion4 {
    pub holds: bool,
    pub inconclusive: bool,
    pub sigma_min: f64,
    pub commutant_dim: usize,
    pub witness: Option<ComplexMatrix>,
}

pub fn criterion4(p: &PaschkeDilation, tol: f64) -> Result<Criterion4> {
    let n = p.carrier_dim();
    let m: MatrixStarAlgebra = commutant(n, &p.covariant_generators(true))?;
    let cols: Vec<DVector<f64>> = m.basis().iter().map(|b| linalg::hermitian_to_real(&p.module.inner(&(b * &p.e), &p.e))).collect();
    let (vals, right) = linalg::svd_right_real(&RealMatrix::from_columns(&cols));
    let sigma_min = vals.last().copied().unwrap_or(f64::INFINITY);
    let holds = sigma_min > tol;
    let inconclusive = holds && sigma_min <= 10.0 * tol;
    let witness = (sigma_min <= 10.0 * tol).then(|| {
        let x: Vec<f64> = right.column(right.ncols() - 1).iter().copied().collect();
        let t = m.element(&x);
        let norm = linalg::op_norm(&t);
        t / c(norm, 0.0)
    });
    Ok(Criterion4 { holds, inconclusive, sigma_min, commutant_dim: m.dim(), witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::FiniteCStarAlgebra;
    use crate::cpmap::minimal_stinespring;
    use crate::radon::{phi_t, rn_derivative};
    use crate::symmetry::{conjugation_action, pauli_unitaries, twirl, FiniteGroup};
    use crate::algebra::Representation;

    fn alg() -> FiniteCStarAlgebra {
        FiniteCStarAlgebra::new(vec![2, 2]).unwrap()
    }

    fn e3() -> UcpMap {
        UcpMap::from_fn(&alg(), 2, |u| linalg::unit(2, 2, u.i, u.j) * c(0.5, 0.0)).unwrap()
    }

    fn first_half() -> UcpMap {
        UcpMap::from_fn(&alg(), 2, |u| if u.block == 0 { linalg::unit(2, 2, u.i, u.j) * c(0.5, 0.0) } else { zeros(2, 2) }).unwrap()
    }

    #[test]
    fn dilation_examples() {
        let p = paschke_dilation(&UcpMap::identity(2)).unwrap();
        assert_eq!(p.carrier_dim(), 4);
        assert!(p.validate(1e-9).valid);
        let p = paschke_dilation(&e3()).unwrap();
        assert_eq!(p.carrier_dim(), 8);
        assert!(p.validate(1e-9).valid);
        let transpose = UcpMap::from_fn(&FiniteCStarAlgebra::full(2), 2, |u| linalg::unit(2, 2, u.j, u.i)).unwrap();
        assert!(matches!(paschke_dilation(&transpose), Err(Error::Domain(_))));
    }

    #[test]
    fn gns_module_for_states() {
        let w = State::from_weights(&[0.25, 0.75]).unwrap();
        let direct = paschke_dilation(&UcpMap::from_state(&w)).unwrap();
        let g = from_gns(&w).unwrap();
        assert!(g.validate(1e-9).valid);
        let u = paschke_uniqueness(&direct, &g, 1e-9).unwrap();
        assert!(max_abs(&(&u * &direct.e - &g.e)) < 1e-9);
    }

    #[test]
    fn self_duality_examples() {
        let p = paschke_dilation(&e3()).unwrap();
        let s = verify_self_dual(&p.module, 1e-9).unwrap();
        assert_eq!(s.maps_checked, 8);
        let zero = ModuleMap { rows: vec![zeros(1, 8); 4] };
        assert!(inner_representer(&p.module, &zero).0.norm() < 1e-12);
        let tau = ModuleMap::inner_with(&p.module, &p.e);
        let (x, res) = inner_representer(&p.module, &tau);
        assert!(res < 1e-12 && max_abs(&(x - &p.e)) < 1e-9);
    }

    #[test]
    fn uniqueness_recovers_automorphism() {
        let p = paschke_dilation(&e3()).unwrap();
        assert!(max_abs(&(paschke_uniqueness(&p, &p, 1e-9).unwrap() - identity(8))) < 1e-9);
        // A unitary commuting with the right action: a random unitary on the
        // "A side" of X ≅ C^4 ⊗ C^2 (with R acting on the second factor).
        let m = commutant(8, &p.module.right).unwrap();
        let mut r = rng(9);
        let h = m.element(&crate::commutant::gaussian_vec(&mut r, m.dim()));
        let (vals, vecs) = linalg::eigh(&h);
        let phases = nalgebra::DVector::from_iterator(8, vals.iter().map(|&v| c(0.0, v).exp()));
        let u = &vecs * ComplexMatrix::from_diagonal(&phases) * vecs.adjoint();
        let mut q = p.clone();
        q.sigma = p.sigma.iter().map(|s| &u * s * u.adjoint()).collect();
        q.e = &u * &p.e;
        let w = paschke_uniqueness(&p, &q, 1e-8).unwrap();
        assert!(max_abs(&(w - u)) < 1e-8);
    }

    #[test]
    fn module_rn_examples() {
        let p = paschke_dilation(&e3()).unwrap();
        let t = module_rn(&p, &e3(), false, 1e-9).unwrap();
        assert!(max_abs(&(t.t - identity(8))) < 1e-8);
        let t = module_rn(&p, &e3().scale(0.5), false, 1e-9).unwrap();
        assert!(max_abs(&(t.t - identity(8) * c(0.5, 0.0))) < 1e-8);
        let t = module_rn(&p, &first_half(), false, 1e-9).unwrap();
        assert!(linalg::projection_residual(&t.t) < 1e-8 && (t.t.trace().re - 4.0).abs() < 1e-8);

        let cov = PaschkeDilation::covariant(&e3(), &AlgebraAction::block_swap(&alg(), 0, 1).unwrap(), 1e-9).unwrap();
        let t = module_rn(&cov, &first_half(), true, 1e-9).unwrap();
        assert!(!t.commutes_with_w.unwrap().holds);
    }

    #[test]
    fn module_and_stinespring_rn_agree() {
        let phi = e3();
        let d = minimal_stinespring(&phi).unwrap();
        let p = paschke_dilation(&phi).unwrap();
        let m = commutant(4, &d.rep.generators()).unwrap();
        let mut r = rng(4);
        for _ in 0..5 {
            let t = crate::radon::random_unit_interval_element(&m, &mut r, 0.0, 1.0);
            let psi = phi_t(&d, &t, 1e-9).unwrap();
            let tm = module_rn(&p, &psi, false, 1e-9).unwrap();
            assert!(p.compress(&tm.t).distance(&psi) < 1e-8);
            assert!(tm.in_unit_interval.holds);
            let back = rn_derivative(&d, &psi, 1e-9).unwrap();
            assert!(max_abs(&(back.t - t)) < 1e-8);
        }
    }

    #[test]
    fn criterion4_examples() {
        let id = PaschkeDilation::covariant(&UcpMap::identity(2), &AlgebraAction::trivial(&FiniteCStarAlgebra::full(2)), 1e-9).unwrap();
        assert!(criterion4(&id, 1e-9).unwrap().holds);
        let plain = PaschkeDilation::covariant(&e3(), &AlgebraAction::trivial(&alg()), 1e-9).unwrap();
        let c4 = criterion4(&plain, 1e-9).unwrap();
        assert!(!c4.holds);
        let w = c4.witness.unwrap();
        // The witness is ±(P_a - P_b) on the two module summands.
        assert!(max_abs(&(&w * &w - identity(8))) < 1e-8 && w.trace().norm() < 1e-8);
        let swap = PaschkeDilation::covariant(&e3(), &AlgebraAction::block_swap(&alg(), 0, 1).unwrap(), 1e-9).unwrap();
        assert!(criterion4(&swap, 1e-9).unwrap().holds);

        let rep = Representation::identity(2);
        let g = FiniteGroup::klein();
        let dep = twirl(&rep, &pauli_unitaries(), &g).unwrap();
        let act = conjugation_action(&rep, &pauli_unitaries(), &g).unwrap();
        let p = PaschkeDilation::covariant(&dep, &act, 1e-9).unwrap();
        assert_eq!(p.carrier_dim(), 16);
        assert!(criterion4(&p, 1e-9).unwrap().holds);
        assert!(verify_self_dual(&p.module, 1e-9).is_ok());
    }
}
