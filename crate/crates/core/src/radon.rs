//! The Radon–Nikodym correspondence `T ↦ φ_T = V* T ρ(·) V` between
//! `{T ∈ ρ(A)′ : 0 ≤ T ≤ 1}` and `[0, φ]`, forward and inverse, with the
//! covariant variant for `T ∈ {ρ(A) ∪ U(G)}′`.

use crate::commutant::{commutant, MatrixStarAlgebra};
use crate::cpmap::{cp_leq, StinespringDilation, UcpMap};
use crate::error::{consistency, domain, shape, Error, Result};
use crate::linalg::{self, c, identity, max_abs, zeros, ComplexMatrix};
use crate::symmetry::{g_invariance_defect, CovariantSystem};

/// A verified property together with the residual it was decided on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Flag {
    pub holds: bool,
    pub residual: f64,
}

impl Flag {
    pub fn new(residual: f64, tol: f64) -> Self {
        Self { holds: residual <= tol, residual }
    }
}

/// An operator on the dilation space with its verified properties.
#[derive(Clone, Debug)]
pub struct RnOperator {
    pub t: ComplexMatrix,
    pub in_commutant: Flag,
    pub in_covariant_commutant: Option<Flag>,
    pub in_unit_interval: Flag,
}

impl RnOperator {
    /// Checks membership in `ρ(A)′` and `0 <= T <= 1` (and in `U(G)′` when
    /// unitaries are supplied).
    pub fn inspect(dilation: &StinespringDilation, t: ComplexMatrix, unitaries: Option<&[ComplexMatrix]>, tol: f64) -> Self {
        let in_commutant = Flag::new(commutator_residual(&t, &dilation.rep.generators()), tol);
        let in_covariant_commutant = unitaries.map(|us| Flag::new(commutator_residual(&t, us), tol));
        let herm = max_abs(&(&t - t.adjoint()));
        let (vals, _) = linalg::eigh(&t);
        let lo = vals.first().copied().unwrap_or(0.0);
        let hi = vals.last().copied().unwrap_or(0.0);
        let interval = herm.max(-lo).max(hi - 1.0).max(0.0);
        Self { t, in_commutant, in_covariant_commutant, in_unit_interval: Flag::new(interval, tol) }
    }
}

/// `max ‖[T, S]‖` over the given operators.
pub fn commutator_residual(t: &ComplexMatrix, ops: &[ComplexMatrix]) -> f64 {
    ops.iter().map(|s| max_abs(&linalg::commutator(t, s))).fold(0.0, f64::max)
}

/// `e ↦ V* T ρ(e) V` for `T ∈ ρ(A)′`.
pub fn phi_t(dilation: &StinespringDilation, t: &ComplexMatrix, tol: f64) -> Result<UcpMap> {
    if t.shape() != (dilation.dim(), dilation.dim()) {
        return Err(shape(format!("operator must be {0}x{0}", dilation.dim())));
    }
    let res = commutator_residual(t, &dilation.rep.generators());
    if res > tol {
        return Err(domain(format!("operator is not in the commutant of ρ(A) (residual {res:.3e})")));
    }
    Ok(dilation.compress(t))
}

/// Solves `V* T ρ(e) V = ψ(e)` over a basis of `ρ(A)′`. The commutant and
/// the design matrix are computed once and reused across solves.
#[derive(Clone, Debug)]
pub struct RnSolver {
    pub dilation: StinespringDilation,
    pub commutant: MatrixStarAlgebra,
    design: ComplexMatrix,
}

impl RnSolver {
    pub fn new(dilation: &StinespringDilation) -> Result<Self> {
        let m = commutant(dilation.dim(), &dilation.rep.generators())?;
        Ok(Self::with_commutant(dilation, m))
    }

    pub fn with_commutant(dilation: &StinespringDilation, m: MatrixStarAlgebra) -> Self {
        let units = dilation.phi.algebra().matrix_units();
        let d = dilation.phi.target_dim();
        let mut design = zeros(units.len() * d * d, m.dim());
        for (col, b) in m.basis().iter().enumerate() {
            let vb = dilation.v.adjoint() * b;
            for (row_block, &u) in units.iter().enumerate() {
                let img = &vb * dilation.rep.image(u) * &dilation.v;
                for (k, z) in img.iter().enumerate() {
                    design[(row_block * d * d + k, col)] = *z;
                }
            }
        }
        Self { dilation: dilation.clone(), commutant: m, design }
    }

    /// Least-squares solution and its residual, with no order checks.
    pub fn solve_raw(&self, psi: &UcpMap) -> Result<(ComplexMatrix, f64)> {
        let phi = &self.dilation.phi;
        if psi.algebra() != phi.algebra() || psi.target_dim() != phi.target_dim() {
            return Err(shape("ψ and φ have different shapes"));
        }
        let k = self.dilation.dim();
        if self.commutant.dim() == 0 {
            return Ok((zeros(k, k), psi.images().iter().map(max_abs).fold(0.0, f64::max)));
        }
        let d = phi.target_dim();
        let mut rhs = zeros(self.design.nrows(), 1);
        for (row_block, img) in psi.images().iter().enumerate() {
            for (j, z) in img.iter().enumerate() {
                rhs[(row_block * d * d + j, 0)] = *z;
            }
        }
        let x = linalg::pinv(&self.design) * rhs;
        let t = self.commutant.basis().iter().zip(x.iter()).fold(zeros(k, k), |acc, (b, z)| acc + b * *z);
        let residual = self.dilation.compress(&t).distance(psi);
        Ok((t, residual))
    }

    /// The unique `T ∈ ρ(A)′` with `φ_T = ψ`, for `ψ ≤ φ`.
    pub fn rn_derivative(&self, psi: &UcpMap, tol: f64) -> Result<RnOperator> {
        if !cp_leq(psi, &self.dilation.phi, tol)? {
            return Err(Error::OrderViolation("ψ is not dominated by φ in the CP order".into()));
        }
        let (t, residual) = self.solve_raw(psi)?;
        if residual > tol {
            return Err(consistency(format!("Radon–Nikodym solve leaves residual {residual:.3e}")));
        }
        let op = RnOperator::inspect(&self.dilation, t, None, tol);
        if !op.in_unit_interval.holds {
            return Err(consistency(format!("derivative leaves [0, 1] by {:.3e}", op.in_unit_interval.residual)));
        }
        Ok(op)
    }
}

pub fn rn_derivative(dilation: &StinespringDilation, psi: &UcpMap, tol: f64) -> Result<RnOperator> {
    RnSolver::new(dilation)?.rn_derivative(psi, tol)
}

/// Outcome of the covariant Radon–Nikodym solve.
#[derive(Clone, Debug)]
pub struct CovariantRn {
    pub operator: RnOperator,
    pub psi_invariant: Flag,
}

impl CovariantRn {
    /// `T ∈ U(G)′`.
    pub fn covariant(&self) -> bool {
        self.operator.in_covariant_commutant.map(|f| f.holds).unwrap_or(false)
    }
}

/// [`rn_derivative`] plus the verified flag `T ∈ U(G)′`. The flag must agree
/// with G-invariance of `ψ`; a disagreement is a consistency error.
pub fn rn_g(system: &CovariantSystem, psi: &UcpMap, tol: f64) -> Result<CovariantRn> {
    let base = rn_derivative(&system.dilation, psi, tol)?;
    let operator = RnOperator::inspect(&system.dilation, base.t, Some(&system.u), tol);
    let psi_invariant = Flag::new(g_invariance_defect(psi, &system.action), tol);
    let out = CovariantRn { operator, psi_invariant };
    if out.covariant() != psi_invariant.holds {
        return Err(consistency(format!(
            "covariant commutant membership ({:.3e}) disagrees with G-invariance of ψ ({:.3e})",
            out.operator.in_covariant_commutant.map(|f| f.residual).unwrap_or(f64::NAN),
            psi_invariant.residual
        )));
    }
    Ok(out)
}

/// Random `T ∈ m` with `0 <= T <= 1`, by affinely rescaling the spectrum of
/// a Gaussian self-adjoint element into `[lo, hi]` (requires `1 ∈ m`).
pub fn random_unit_interval_element(m: &MatrixStarAlgebra, r: &mut impl rand::Rng, lo: f64, hi: f64) -> ComplexMatrix {
    let x = m.element(&crate::commutant::gaussian_vec(r, m.dim()));
    let (vals, _) = linalg::eigh(&x);
    let (a, b) = (vals[0], vals[vals.len() - 1]);
    let n = m.ambient_dim();
    if b - a <= 1e-9 * a.abs().max(b.abs()).max(1e-300) {
        return identity(n) * c(0.5 * (lo + hi), 0.0);
    }
    let s = (hi - lo) / (b - a);
    (x - identity(n) * c(a, 0.0)) * c(s, 0.0) + identity(n) * c(lo, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{FiniteCStarAlgebra, MatrixUnit};
    use crate::cpmap::minimal_stinespring;
    use crate::symmetry::AlgebraAction;

    fn e3() -> UcpMap {
        let alg = FiniteCStarAlgebra::new(vec![2, 2]).unwrap();
        UcpMap::from_fn(&alg, 2, |u| linalg::unit(2, 2, u.i, u.j) * c(0.5, 0.0)).unwrap()
    }

    fn half_a() -> UcpMap {
        let alg = FiniteCStarAlgebra::new(vec![2, 2]).unwrap();
        UcpMap::from_fn(&alg, 2, |u| if u.block == 0 { linalg::unit(2, 2, u.i, u.j) * c(0.5, 0.0) } else { zeros(2, 2) }).unwrap()
    }

    fn block_projection(d: &StinespringDilation, k: usize) -> ComplexMatrix {
        d.rep.image(MatrixUnit { block: k, i: 0, j: 0 }) + d.rep.image(MatrixUnit { block: k, i: 1, j: 1 })
    }

    #[test]
    fn forward_examples() {
        let d = minimal_stinespring(&e3()).unwrap();
        assert!(phi_t(&d, &identity(4), 1e-10).unwrap().distance(&e3()) < 1e-12);
        assert!(phi_t(&d, &zeros(4, 4), 1e-10).unwrap().distance(&UcpMap::zero(e3().algebra(), 2)) < 1e-15);
        let p1 = block_projection(&d, 0);
        assert!(phi_t(&d, &p1, 1e-10).unwrap().distance(&half_a()) < 1e-12);
        let outside = d.rep.image(MatrixUnit { block: 0, i: 0, j: 1 }).clone();
        assert!(matches!(phi_t(&d, &outside, 1e-10), Err(Error::Domain(_))));
    }

    #[test]
    fn inverse_examples() {
        let d = minimal_stinespring(&e3()).unwrap();
        let t = rn_derivative(&d, &e3(), 1e-9).unwrap();
        assert!(max_abs(&(t.t - identity(4))) < 1e-9);
        let t = rn_derivative(&d, &e3().scale(0.5), 1e-9).unwrap();
        assert!(max_abs(&(t.t - identity(4) * c(0.5, 0.0))) < 1e-9);
        let t = rn_derivative(&d, &half_a(), 1e-9).unwrap();
        assert!(max_abs(&(&t.t - block_projection(&d, 0))) < 1e-9);
        assert!(t.in_commutant.holds && t.in_unit_interval.holds);
    }

    #[test]
    fn undominated_map_is_an_order_violation() {
        let d = minimal_stinespring(&e3()).unwrap();
        assert!(matches!(rn_derivative(&d, &e3().scale(1.5), 1e-9), Err(Error::OrderViolation(_))));
    }

    #[test]
    fn covariant_examples() {
        let alg = e3().algebra().clone();
        let swap = CovariantSystem::build(&e3(), &AlgebraAction::block_swap(&alg, 0, 1).unwrap(), 1e-9).unwrap();
        let r = rn_g(&swap, &e3().scale(0.3), 1e-9).unwrap();
        assert!(max_abs(&(&r.operator.t - identity(4) * c(0.3, 0.0))) < 1e-9);
        assert!(r.covariant());
        let r = rn_g(&swap, &half_a(), 1e-9).unwrap();
        assert!(!r.covariant() && !r.psi_invariant.holds);
        assert!(max_abs(&(&r.operator.t - block_projection(&swap.dilation, 0))) < 1e-9);
        let r = rn_g(&swap, &e3().scale(0.5), 1e-9).unwrap();
        assert!(r.covariant());
    }

    #[test]
    fn depolarizing_roundtrip() {
        let alg = FiniteCStarAlgebra::full(2);
        let phi = UcpMap::from_fn(&alg, 2, |u| if u.i == u.j { identity(2) * c(0.5, 0.0) } else { zeros(2, 2) }).unwrap();
        let d = minimal_stinespring(&phi).unwrap();
        let solver = RnSolver::new(&d).unwrap();
        assert_eq!(solver.commutant.dim(), 16);
        let mut r = crate::random::rng(4);
        let t = random_unit_interval_element(&solver.commutant, &mut r, 0.0, 1.0);
        let psi = phi_t(&d, &t, 1e-9).unwrap();
        let back = solver.rn_derivative(&psi, 1e-8).unwrap();
        assert!(max_abs(&(back.t - t)) < 1e-8);
    }
}
