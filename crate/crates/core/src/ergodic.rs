//! Extreme-point certification for G-invariant UCP maps.
//!
//! The main test is whether `[VH]` is a faithful subspace for
//! `M = {ρ(A) ∪ U(G)}′`, i.e. whether `T ↦ V*TV` is injective on `M`. A kernel
//! element is turned into an explicit convex split of `φ`.

use nalgebra::DVector;

use crate::commutant::{commutant, MatrixStarAlgebra, COMMUTANT_CUTOFF};
use crate::cpmap::{kraus_dilation, StinespringDilation, UcpMap};
use crate::error::{consistency, Result};
use crate::linalg::{self, c, identity, max_abs, zeros, ComplexMatrix, RealMatrix};
use crate::measures::covariant_commutant;
use crate::random::rng;
use crate::symmetry::{covariance_unitaries, g_invariance_defect, AlgebraAction, CovariantSystem};

/// Minimum image distance for the two halves of a split to count as distinct.
pub const SPLIT_SEPARATION: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Ergodic,
    NotErgodic,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Ergodic => "ergodic",
            Verdict::NotErgodic => "not_ergodic",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Injectivity of `T ↦ V*TV` on a *-algebra `M`.
#[derive(Clone, Debug)]
pub struct FaithfulSubspace {
    pub faithful: bool,
    pub inconclusive: bool,
    pub sigma_min: f64,
    /// Self-adjoint `T ∈ M` with `‖T‖ = 1` and `V*TV ≈ 0`.
    pub witness: Option<ComplexMatrix>,
}

/// Least singular value of the compression map in Hermitian coordinates; a
/// witness is returned whenever it is at most `10 tol`.
pub fn is_faithful_subspace(m: &MatrixStarAlgebra, v: &ComplexMatrix, tol: f64) -> FaithfulSubspace {
    let cols: Vec<DVector<f64>> = m.basis().iter().map(|b| linalg::hermitian_to_real(&(v.adjoint() * b * v))).collect();
    if cols.is_empty() {
        return FaithfulSubspace { faithful: true, inconclusive: false, sigma_min: f64::INFINITY, witness: None };
    }
    let (vals, right) = linalg::svd_right_real(&RealMatrix::from_columns(&cols));
    let sigma_min = vals.last().copied().unwrap_or(0.0);
    let faithful = sigma_min > tol;
    let inconclusive = faithful && sigma_min <= 10.0 * tol;
    let witness = (sigma_min <= 10.0 * tol).then(|| {
        let x: Vec<f64> = right.column(right.ncols() - 1).iter().copied().collect();
        normalize_witness(m.element(&x))
    });
    FaithfulSubspace { faithful, inconclusive, sigma_min, witness }
}

/// Scales to operator norm 1 and fixes the sign so that the diagonal entry
/// of largest modulus is positive.
fn normalize_witness(t: ComplexMatrix) -> ComplexMatrix {
    let t = linalg::hermitian_part(&t);
    let norm = linalg::op_norm(&t);
    let mut t = t / c(norm, 0.0);
    let mut best = 0.0_f64;
    let mut sign = 1.0;
    for i in 0..t.nrows() {
        let x = t[(i, i)].re;
        if x.abs() > best + 1e-12 {
            best = x.abs();
            sign = x.signum();
        }
    }
    t *= c(sign, 0.0);
    t
}

/// `φ = t φ_1 + (1 - t) φ_2` with both parts UCP and G-invariant.
#[derive(Clone, Debug)]
pub struct ConvexSplit {
    pub phi1: UcpMap,
    pub phi2: UcpMap,
    pub t: f64,
    pub reassembly_residual: f64,
    pub separation: f64,
}

/// Converts a kernel witness (`V*TV = 0`) into `S = ½ + T/(4‖T‖)`, so that
/// `¼ ≤ S ≤ ¾` and `V*SV = ½`, and the split `φ_1 = 2 V*SρV`,
/// `φ_2 = 2 V*(1-S)ρV` with `t = ½`, validating both halves.
pub fn split_from_witness(
    dilation: &StinespringDilation,
    action: &AlgebraAction,
    witness: &ComplexMatrix,
    tol: f64,
) -> Option<ConvexSplit> {
    let k = dilation.dim();
    let norm = linalg::op_norm(witness);
    if norm == 0.0 {
        return None;
    }
    let s = identity(k) * c(0.5, 0.0) + witness * c(0.25 / norm, 0.0);
    let t = 0.5;
    let phi1 = dilation.compress(&s).scale(1.0 / t);
    let phi2 = dilation.compress(&(identity(k) - &s)).scale(1.0 / (1.0 - t));
    let phi = &dilation.phi;
    let reassembly_residual = phi1.scale(t).add(&phi2.scale(1.0 - t)).ok()?.distance(phi);
    let separation = phi1.distance(phi);
    let valid = phi1.is_ucp(tol)
        && phi2.is_ucp(tol)
        && g_invariance_defect(&phi1, action) <= tol
        && g_invariance_defect(&phi2, action) <= tol
        && reassembly_residual <= tol
        && separation > SPLIT_SEPARATION;
    valid.then_some(ConvexSplit { phi1, phi2, t, reassembly_residual, separation })
}

/// Spot test of "φ_0 ∈ [0, φ] with φ_0(1) = t·1 forces φ_0 = tφ".
#[derive(Clone, Debug, PartialEq)]
pub struct Criterion2 {
    pub holds: bool,
    pub samples: usize,
    pub max_deviation: f64,
}

/// Self-adjoint `T ∈ M` with `V*TV` a multiple of the identity, as a
/// Hermitian basis (always contains the identity direction).
pub fn scalar_compression_subspace(m: &MatrixStarAlgebra, v: &ComplexMatrix) -> Vec<ComplexMatrix> {
    let d = v.ncols();
    let unit = linalg::hermitian_to_real(&identity(d)) / (d as f64).sqrt();
    let cols: Vec<DVector<f64>> = m
        .basis()
        .iter()
        .map(|b| {
            let x = linalg::hermitian_to_real(&(v.adjoint() * b * v));
            let along = x.dot(&unit);
            x - &unit * along
        })
        .collect();
    if cols.is_empty() {
        return Vec::new();
    }
    let ns = linalg::null_space_real(&RealMatrix::from_columns(&cols), COMMUTANT_CUTOFF);
    (0..ns.ncols()).map(|j| m.element(ns.column(j).as_slice())).collect()
}

fn criterion2(dilation: &StinespringDilation, m: &MatrixStarAlgebra, split: Option<&ConvexSplit>, seed: u64, tol: f64) -> Criterion2 {
    let mut worst = 0.0_f64;
    let mut samples = 0;
    let phi = &dilation.phi;
    if let Some(s) = split {
        // φ_0 = t φ_1 lies in [0, φ] with φ_0(1) = t·1.
        worst = worst.max(s.phi1.scale(s.t).distance(&phi.scale(s.t)));
        samples += 1;
    }
    let ms = scalar_compression_subspace(m, &dilation.v);
    let mut r = rng(seed);
    let k = dilation.dim();
    for _ in 0..3 {
        if ms.is_empty() {
            break;
        }
        let coeffs = crate::commutant::gaussian_vec(&mut r, ms.len());
        let x = ms.iter().zip(&coeffs).fold(zeros(k, k), |acc, (b, &w)| acc + b * c(w, 0.0));
        let (vals, _) = linalg::eigh(&x);
        let (lo, hi) = (vals[0], vals[vals.len() - 1]);
        // A spread at rounding level means x is a multiple of the identity.
        let s = if hi - lo <= 1e-9 * lo.abs().max(hi.abs()).max(1e-300) {
            identity(k) * c(0.5, 0.0)
        } else {
            (x - identity(k) * c(lo, 0.0)) * c(1.0 / (hi - lo), 0.0)
        };
        let phi0 = dilation.compress(&s);
        let t = phi0.apply(&phi0.algebra().unit()).trace().re / phi0.target_dim() as f64;
        worst = worst.max(phi0.distance(&phi.scale(t)));
        samples += 1;
    }
    Criterion2 { holds: worst <= tol, samples, max_deviation: worst }
}

/// Per-criterion outcome of the extreme-point theorem.
#[derive(Clone, Debug)]
pub struct ErgodicityCertificate {
    pub verdict: Verdict,
    pub commutant_dim: usize,
    pub criterion2: Criterion2,
    pub criterion3: FaithfulSubspace,
    /// Filled in by [`certify`], which also runs the module criterion.
    pub criterion4: Option<bool>,
    pub shortcut: Option<Shortcut>,
    pub split: Option<ConvexSplit>,
}

impl ErgodicityCertificate {
    pub fn witness(&self) -> Option<&ComplexMatrix> {
        self.criterion3.witness.as_ref()
    }
}

/// Criterion (3) on `{ρ(A) ∪ U(G)}′`, with a convex split when it fails and
/// a criterion (2) spot test either way.
pub fn is_g_ergodic(system: &CovariantSystem, tol: f64) -> Result<ErgodicityCertificate> {
    let m = covariant_commutant(system)?;
    certificate_from_commutant(system, &m, tol)
}

pub(crate) fn certificate_from_commutant(system: &CovariantSystem, m: &MatrixStarAlgebra, tol: f64) -> Result<ErgodicityCertificate> {
    let c3 = is_faithful_subspace(m, system.v(), tol);
    let verdict = if c3.inconclusive {
        Verdict::Inconclusive
    } else if c3.faithful {
        Verdict::Ergodic
    } else {
        Verdict::NotErgodic
    };
    let split = match (&c3.witness, verdict) {
        (Some(w), Verdict::NotErgodic) => {
            let s = split_from_witness(&system.dilation, &system.action, w, tol.max(1e-8));
            if s.is_none() {
                return Err(consistency("kernel witness did not produce a valid convex split"));
            }
            s
        }
        _ => None,
    };
    let c2 = criterion2(&system.dilation, m, split.as_ref(), 0xc2, tol.max(1e-8));
    let expect_c2 = verdict != Verdict::NotErgodic;
    if verdict != Verdict::Inconclusive && c2.holds != expect_c2 {
        return Err(consistency(format!(
            "criterion (2) spot test ({:.3e}) disagrees with the faithful-subspace verdict",
            c2.max_deviation
        )));
    }
    let shortcut = shortcuts(system)?;
    if shortcut.is_some() && verdict == Verdict::NotErgodic {
        return Err(consistency("an irreducibility shortcut fired on a non-ergodic map"));
    }
    Ok(ErgodicityCertificate { verdict, commutant_dim: m.dim(), criterion2: c2, criterion3: c3, criterion4: None, shortcut, split })
}

/// [`is_g_ergodic`] plus the module criterion (4); a disagreement between
/// the two routes is a consistency error.
pub fn certify(system: &CovariantSystem, tol: f64) -> Result<ErgodicityCertificate> {
    let mut cert = is_g_ergodic(system, tol)?;
    let module = crate::paschke::PaschkeDilation::covariant(&system.phi, &system.action, tol.max(1e-8))?;
    let c4 = crate::paschke::criterion4(&module, tol)?;
    if !c4.inconclusive && cert.verdict != Verdict::Inconclusive && c4.holds != (cert.verdict == Verdict::Ergodic) {
        return Err(consistency("module criterion (4) disagrees with the faithful-subspace criterion (3)"));
    }
    cert.criterion4 = Some(c4.holds);
    Ok(cert)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shortcut {
    RhoIrreducible,
    UIrreducible,
}

impl Shortcut {
    pub fn as_str(self) -> &'static str {
        match self {
            Shortcut::RhoIrreducible => "rho_irreducible",
            Shortcut::UIrreducible => "u_irreducible",
        }
    }
}

/// Ergodic without further work when `ρ` is irreducible (which is also the
/// purity test on the minimal dilation) or when `U(G)` is irreducible.
pub fn shortcuts(system: &CovariantSystem) -> Result<Option<Shortcut>> {
    let k = system.dim();
    if commutant(k, &system.rep().generators())?.dim() == 1 {
        return Ok(Some(Shortcut::RhoIrreducible));
    }
    if commutant(k, &system.u)?.dim() == 1 {
        return Ok(Some(Shortcut::UIrreducible));
    }
    Ok(None)
}

/// `φ` is pure in the CP cone iff its minimal dilation has irreducible `ρ`.
pub fn is_pure(dilation: &StinespringDilation) -> Result<bool> {
    Ok(commutant(dilation.dim(), &dilation.rep.generators())?.dim() == 1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparatingReport {
    pub faithful: bool,
    pub separating: bool,
    pub nondegenerate: bool,
    pub invariant_range: bool,
}

/// Faithful, separating for `M` and non-degenerate for `M″`, with the
/// implications between them asserted.
pub fn separating_checks(system: &CovariantSystem, tol: f64) -> Result<SeparatingReport> {
    let m = covariant_commutant(system)?;
    let v = system.v();
    let k = system.dim();
    let faithful = is_faithful_subspace(&m, v, tol).faithful;

    let cols: Vec<DVector<f64>> = m.basis().iter().map(|b| linalg::complex_to_real(&(b * v))).collect();
    let separating = if cols.is_empty() {
        true
    } else {
        let (vals, _) = linalg::svd_right_real(&RealMatrix::from_columns(&cols));
        vals.last().copied().unwrap_or(0.0) > tol
    };

    let bicommutant = commutant(k, m.basis())?;
    let d = v.ncols();
    let mut span = zeros(k, bicommutant.dim() * d);
    for (j, b) in bicommutant.basis().iter().enumerate() {
        span.view_mut((0, j * d), (k, d)).copy_from(&(b * v));
    }
    let nondegenerate = linalg::rank(&span) == k;

    let p = v * v.adjoint();
    let invariant_range = m.basis().iter().all(|b| max_abs(&linalg::commutator(b, &p)) <= tol);

    if faithful && !separating {
        return Err(consistency("faithful subspace that is not separating"));
    }
    if separating != nondegenerate {
        return Err(consistency("separating and non-degenerate-for-M″ disagree"));
    }
    if invariant_range && faithful != nondegenerate {
        return Err(consistency("invariant range: faithful and non-degenerate disagree"));
    }
    Ok(SeparatingReport { faithful, separating, nondegenerate, invariant_range })
}

/// One-sided oracle: searches for a split using the Kraus-built dilation and
/// a plain dense commutant solve. `false` is certified, `true` presumptive.
pub fn brute_force_extreme(phi: &UcpMap, action: &AlgebraAction, trials: usize, seed: u64, tol: f64) -> Result<bool> {
    let dilation = kraus_dilation(phi)?;
    let system = covariance_unitaries(phi, &dilation, action, tol.max(1e-8))?;
    let k = dilation.dim();
    let mut gens = dilation.rep.generators();
    gens.extend(system.u.iter().cloned());
    let basis = dense_commutant(k, &gens);
    if basis.is_empty() {
        return Ok(true);
    }
    // Real-linear map x ↦ V* T(x) V in Hermitian coordinates.
    let v = &dilation.v;
    let l = RealMatrix::from_columns(&basis.iter().map(|b| linalg::hermitian_to_real(&(v.adjoint() * b * v))).collect::<Vec<_>>());
    let gram = &l * l.transpose();
    let gram_pinv = linalg::pinv_real(&gram);
    let projector = RealMatrix::identity(basis.len(), basis.len()) - l.transpose() * gram_pinv * &l;
    let mut r = rng(seed);
    for _ in 0..trials {
        let x = DVector::from_vec(crate::commutant::gaussian_vec(&mut r, basis.len()));
        let y = &projector * x;
        let t = basis.iter().zip(y.iter()).fold(zeros(k, k), |acc, (b, &w)| acc + b * c(w, 0.0));
        let norm = linalg::op_norm(&t);
        if norm < 1e-6 || max_abs(&(v.adjoint() * &t * v)) > 1e-8 * norm {
            continue;
        }
        if split_from_witness(&dilation, action, &(t / c(norm, 0.0)), tol.max(1e-8)).is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Hermitian basis of the commutant from the null space of the stacked
/// `N² x N²` commutator operators (no prefiltering).
fn dense_commutant(n: usize, gens: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    let eye = identity(n);
    let mut rows: Vec<ComplexMatrix> = Vec::new();
    for g in gens {
        let f = linalg::frobenius(g);
        if f == 0.0 {
            continue;
        }
        for s in [g / c(f, 0.0), g.adjoint() / c(f, 0.0)] {
            // vec(XS - SX) = (Sᵀ ⊗ 1 - 1 ⊗ S) vec(X), column-major vec.
            rows.push(linalg::kron(&s.transpose(), &eye) - linalg::kron(&eye, &s));
        }
    }
    let mut stacked = zeros(rows.len() * n * n, n * n);
    for (i, r) in rows.iter().enumerate() {
        stacked.view_mut((i * n * n, 0), (n * n, n * n)).copy_from(r);
    }
    let ns = linalg::null_space(&stacked, COMMUTANT_CUTOFF);
    let mats: Vec<ComplexMatrix> =
        (0..ns.ncols()).map(|j| ComplexMatrix::from_column_slice(n, n, ns.column(j).as_slice())).collect();
    MatrixStarAlgebra::from_spanning(n, &mats).map(|m| m.basis().to_vec()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{FiniteCStarAlgebra, Representation};
    use crate::cpmap::minimal_stinespring;
    use crate::symmetry::{conjugation_action, pauli_unitaries, twirl, FiniteGroup};

    fn alg() -> FiniteCStarAlgebra {
        FiniteCStarAlgebra::new(vec![2, 2]).unwrap()
    }

    fn e3() -> UcpMap {
        UcpMap::from_fn(&alg(), 2, |u| linalg::unit(2, 2, u.i, u.j) * c(0.5, 0.0)).unwrap()
    }

    fn pick(k: usize) -> UcpMap {
        UcpMap::from_fn(&alg(), 2, |u| if u.block == k { linalg::unit(2, 2, u.i, u.j) } else { zeros(2, 2) }).unwrap()
    }

    fn system(swap: bool) -> CovariantSystem {
        let act = if swap { AlgebraAction::block_swap(&alg(), 0, 1).unwrap() } else { AlgebraAction::trivial(&alg()) };
        CovariantSystem::build(&e3(), &act, 1e-9).unwrap()
    }

    #[test]
    fn faithful_subspace_examples() {
        let d = minimal_stinespring(&e3()).unwrap();
        assert!(is_faithful_subspace(&MatrixStarAlgebra::scalars(4), &d.v, 1e-9).faithful);
        let m = commutant(4, &d.rep.generators()).unwrap();
        let f = is_faithful_subspace(&m, &d.v, 1e-9);
        assert!(!f.faithful);
        let w = f.witness.unwrap();
        let p0 = d.compress(&identity(4));
        assert!(p0.distance(&e3()) < 1e-12);
        // Witness is ±(P_1 - P_2): squares to the identity and is traceless.
        assert!(max_abs(&(&w * &w - identity(4))) < 1e-9);
        assert!(w.trace().norm() < 1e-9);
        let s = covariant_commutant(&system(true)).unwrap();
        assert!(is_faithful_subspace(&s, &d.v, 1e-9).faithful);
    }

    #[test]
    fn ergodicity_examples() {
        let id = CovariantSystem::build(&UcpMap::identity(2), &AlgebraAction::trivial(&FiniteCStarAlgebra::full(2)), 1e-9).unwrap();
        let cert = is_g_ergodic(&id, 1e-9).unwrap();
        assert_eq!(cert.verdict, Verdict::Ergodic);
        assert_eq!(cert.shortcut, Some(Shortcut::RhoIrreducible));

        assert_eq!(is_g_ergodic(&system(true), 1e-9).unwrap().verdict, Verdict::Ergodic);
        let cert = is_g_ergodic(&system(false), 1e-9).unwrap();
        assert_eq!(cert.verdict, Verdict::NotErgodic);
        let split = cert.split.unwrap();
        assert!((split.t - 0.5).abs() < 1e-15);
        let mix = |x: f64| pick(0).scale(x).add(&pick(1).scale(1.0 - x)).unwrap();
        let a_then_b = split.phi1.distance(&mix(0.75)) < 1e-8 && split.phi2.distance(&mix(0.25)) < 1e-8;
        let b_then_a = split.phi1.distance(&mix(0.25)) < 1e-8 && split.phi2.distance(&mix(0.75)) < 1e-8;
        assert!(a_then_b || b_then_a);
        assert!(!cert.criterion2.holds);
    }

    #[test]
    fn shortcut_examples() {
        assert_eq!(shortcuts(&system(true)).unwrap(), None);
        let rep = Representation::identity(2);
        let g = FiniteGroup::klein();
        let phi = twirl(&rep, &pauli_unitaries(), &g).unwrap();
        let act = conjugation_action(&rep, &pauli_unitaries(), &g).unwrap();
        let sys = CovariantSystem::build(&phi, &act, 1e-9).unwrap();
        let fired = shortcuts(&sys).unwrap().is_some();
        assert_eq!(fired, commutant(8, &sys.u).unwrap().dim() == 1);
        assert_eq!(is_g_ergodic(&sys, 1e-9).unwrap().verdict, Verdict::Ergodic);
    }

    #[test]
    fn separating_examples() {
        let r = separating_checks(&system(true), 1e-9).unwrap();
        assert!(r.faithful && r.separating && r.nondegenerate);
        let r = separating_checks(&system(false), 1e-9).unwrap();
        assert!(!r.faithful && r.separating && r.nondegenerate);
    }

    #[test]
    fn brute_force_examples() {
        let id = UcpMap::identity(2);
        assert!(brute_force_extreme(&id, &AlgebraAction::trivial(id.algebra()), 100, 1, 1e-9).unwrap());
        assert!(!brute_force_extreme(&e3(), &AlgebraAction::trivial(&alg()), 1, 1, 1e-9).unwrap());
        assert!(brute_force_extreme(&e3(), &AlgebraAction::block_swap(&alg(), 0, 1).unwrap(), 50, 1, 1e-9).unwrap());
    }
}
