//! Lifting G-invariant states to UCP maps, `φ^n_ω([a_ij]) = [ω(a_ij)]` on
//! `M_n(A)` and `φ_{n,ω}(a) = ω(a) 1_n` on `A`, and pushing classical
//! decompositions of the state forward to decompositions of the lift.
//!
//! `M_n(A)` for `A = ⊕ M_{n_k}` is the block algebra `⊕ M_{n n_k}`, where
//! `[a_ij]` sits in block `k` at row `i n_k + r`, column `j n_k + s`.

use crate::algebra::{gns, is_g_invariant_state, FiniteCStarAlgebra, GnsTriple, MatrixUnit, Representation, State};
use crate::commutant::MatrixStarAlgebra;
use crate::cpmap::{stinespring_equivalence, minimal_stinespring, StinespringDilation, UcpMap};
use crate::error::{consistency, domain, Result};
use crate::linalg::{self, identity, kron, max_abs, ComplexMatrix};
use crate::measures::{decompose, g_invariance_condition, is_orthogonal_measure, k_mu, DiscreteMeasure, GInvarianceCondition};
use crate::symmetry::{covariance_unitaries, is_g_invariant, AlgebraAction, CovariantSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LiftKind {
    /// `φ^n_ω` on `M_n(A)`.
    Full,
    /// `φ_{n,ω}` on `A`.
    Diagonal,
}

impl LiftKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LiftKind::Full => "full",
            LiftKind::Diagonal => "diag",
        }
    }
}

/// `M_n(A)` as a block algebra.
pub fn matrix_algebra(a: &FiniteCStarAlgebra, n: usize) -> FiniteCStarAlgebra {
    FiniteCStarAlgebra::new(a.blocks().iter().map(|&m| n * m).collect()).expect("positive sizes")
}

/// The unit `E_ij ⊗ e_rs^(k)` of `M_n(A)`.
pub fn lifted_unit(a: &FiniteCStarAlgebra, i: usize, j: usize, u: MatrixUnit) -> MatrixUnit {
    let m = a.block_size(u.block);
    MatrixUnit { block: u.block, i: i * m + u.i, j: j * m + u.j }
}

/// Inverse of [`lifted_unit`]: `(i, j, e_rs^(k))`.
pub fn split_unit(a: &FiniteCStarAlgebra, u: MatrixUnit) -> (usize, usize, MatrixUnit) {
    let m = a.block_size(u.block);
    (u.i / m, u.j / m, MatrixUnit { block: u.block, i: u.i % m, j: u.j % m })
}

/// Entrywise action on `M_n(A)`: same block permutation, unitaries `1_n ⊗ W`.
pub fn lifted_action(act: &AlgebraAction, n: usize) -> Result<AlgebraAction> {
    let big = matrix_algebra(act.algebra(), n);
    let order = act.group().order();
    let perms = (0..order).map(|g| act.perm(g).to_vec()).collect();
    let unitaries = (0..order).map(|g| act.unitaries(g).iter().map(|w| kron(&identity(n), w)).collect()).collect();
    AlgebraAction::new(act.group(), &big, perms, unitaries)
}

/// The GNS triple of `ω` as a dilation of the state viewed as a UCP map.
pub fn gns_dilation(state: &State) -> Result<(GnsTriple, StinespringDilation)> {
    let triple = gns(state)?;
    let dilation = StinespringDilation {
        phi: UcpMap::from_state(state),
        rep: triple.rep.clone(),
        v: triple.cyclic_vector.clone(),
        minimal: true,
    };
    Ok((triple, dilation))
}

/// A lifted state with its GNS data and both dilations of the lift.
#[derive(Clone, Debug)]
pub struct LiftedSystem {
    pub base_state: State,
    pub n: usize,
    pub kind: LiftKind,
    pub lifted: UcpMap,
    pub gns: GnsTriple,
    /// `U_ω(g)` on `H_ω`.
    pub u_omega: Vec<ComplexMatrix>,
    pub base_action: AlgebraAction,
    pub action: AlgebraAction,
    /// `ρ = [π_ω(a_ij)]` (or `1_n ⊗ π_ω`), `V = 1_n ⊗ Ω`, `U = 1_n ⊗ U_ω`.
    pub canonical: CovariantSystem,
    /// Residual of the verified unitary linking the minimal dilation of the
    /// lift with the canonical one.
    pub identification_residual: f64,
}

pub fn lift_full(state: &State, n: usize, act: &AlgebraAction, tol: f64) -> Result<LiftedSystem> {
    lift(state, n, act, LiftKind::Full, tol)
}

pub fn lift_diag(state: &State, n: usize, act: &AlgebraAction, tol: f64) -> Result<LiftedSystem> {
    lift(state, n, act, LiftKind::Diagonal, tol)
}

pub fn lift(state: &State, n: usize, act: &AlgebraAction, kind: LiftKind, tol: f64) -> Result<LiftedSystem> {
    if n == 0 {
        return Err(domain("lift size n must be positive"));
    }
    if act.algebra() != state.algebra() {
        return Err(domain("action and state live on different algebras"));
    }
    if !is_g_invariant_state(state, act, tol) {
        return Err(domain("state is not G-invariant"));
    }
    let a = state.algebra();
    let (triple, base) = gns_dilation(state)?;
    let base_system = covariance_unitaries(&base.phi, &base, act, tol.max(1e-9))?;
    let u_omega = base_system.u.clone();
    let h = triple.dim;
    let one = identity(n);

    let (lifted, action, rep) = match kind {
        LiftKind::Full => {
            let big = matrix_algebra(a, n);
            let lifted = UcpMap::from_fn(&big, n, |u| {
                let (i, j, e) = split_unit(a, u);
                linalg::unit(n, n, i, j) * state.value(e)
            })?;
            let rep = Representation::from_fn(&big, n * h, |u| {
                let (i, j, e) = split_unit(a, u);
                kron(&linalg::unit(n, n, i, j), triple.rep.image(e))
            })?;
            (lifted, lifted_action(act, n)?, rep)
        }
        LiftKind::Diagonal => {
            let lifted = UcpMap::from_fn(a, n, |u| &one * state.value(u))?;
            let rep = Representation::from_fn(a, n * h, |u| kron(&one, triple.rep.image(u)))?;
            (lifted, act.clone(), rep)
        }
    };
    if !lifted.is_ucp(tol.max(1e-9)) {
        return Err(consistency("lifted map is not UCP"));
    }
    if !is_g_invariant(&lifted, &action, tol.max(1e-9)) {
        return Err(consistency("lifted map is not invariant under the lifted action"));
    }
    let dilation = StinespringDilation { phi: lifted.clone(), rep, v: kron(&one, &triple.cyclic_vector), minimal: true };
    let canonical = CovariantSystem {
        phi: lifted.clone(),
        dilation,
        action: action.clone(),
        u: u_omega.iter().map(|x| kron(&one, x)).collect(),
    };
    let res = canonical.residuals().max().max(canonical.dilation.reconstruction_residual());
    if res > tol.max(1e-9) {
        return Err(consistency(format!("canonical dilation of the lift fails verification ({res:.3e})")));
    }
    let minimal = minimal_stinespring(&lifted)?;
    let w = stinespring_equivalence(&minimal, &canonical.dilation, tol.max(1e-8))?;
    let identification_residual = max_abs(&(&w * &minimal.v - &canonical.dilation.v));
    Ok(LiftedSystem {
        base_state: state.clone(),
        n,
        kind,
        lifted,
        gns: triple,
        u_omega,
        base_action: act.clone(),
        action,
        canonical,
        identification_residual,
    })
}

impl LiftedSystem {
    /// The lift of another state on the same algebra, with the same `n` and kind.
    pub fn lift_state(&self, state: &State) -> Result<UcpMap> {
        let a = state.algebra();
        let n = self.n;
        Ok(match self.kind {
            LiftKind::Full => UcpMap::from_fn(self.lifted.algebra(), n, |u| {
                let (i, j, e) = split_unit(a, u);
                linalg::unit(n, n, i, j) * state.value(e)
            })?,
            LiftKind::Diagonal => UcpMap::from_fn(a, n, |u| identity(n) * state.value(u))?,
        })
    }
}

/// A finitely supported measure on states.
#[derive(Clone, Debug)]
pub struct StateMeasure {
    pub states: Vec<State>,
    pub weights: Vec<f64>,
}

impl StateMeasure {
    pub fn as_maps(&self) -> Result<DiscreteMeasure> {
        DiscreteMeasure::new(self.states.iter().map(UcpMap::from_state).collect(), self.weights.clone())
    }

    pub fn barycenter(&self) -> Result<State> {
        let a = self.states[0].algebra();
        let values = a
            .blocks()
            .iter()
            .enumerate()
            .map(|(k, &m)| {
                ComplexMatrix::from_fn(m, m, |i, j| {
                    self.states.iter().zip(&self.weights).map(|(s, &w)| s.value(MatrixUnit { block: k, i, j }) * w).sum()
                })
            })
            .collect();
        State::from_values(a, values)
    }
}

/// `ω_j(a) = ⟨π(a) Q_j Ω, Q_j Ω⟩ / ‖Q_j Ω‖²` with weights `‖Q_j Ω‖²` for the
/// minimal projections `Q_j` of an abelian `B ⊆ {π_ω(A) ∪ U_ω(G)}′`.
pub fn classical_decompose(state: &State, u_omega: &[ComplexMatrix], b: &MatrixStarAlgebra, tol: f64) -> Result<StateMeasure> {
    let (_, dilation) = gns_dilation(state)?;
    let outside = b
        .basis()
        .iter()
        .map(|x| crate::radon::commutator_residual(x, u_omega))
        .fold(0.0, f64::max);
    if outside > tol {
        return Err(domain(format!("subalgebra does not commute with U_ω ({outside:.3e})")));
    }
    let dec = decompose(&dilation, b, tol)?;
    let a = state.algebra();
    let mut states = Vec::with_capacity(dec.measure.len());
    for m in dec.measure.support() {
        let values = a
            .blocks()
            .iter()
            .enumerate()
            .map(|(k, &sz)| ComplexMatrix::from_fn(sz, sz, |i, j| m.image(MatrixUnit { block: k, i, j })[(0, 0)]))
            .collect();
        states.push(State::from_values(a, values)?);
    }
    Ok(StateMeasure { states, weights: dec.measure.weights().to_vec() })
}

/// The pushforward of a state measure to the lift, with the checks that tie
/// the two together.
#[derive(Clone, Debug)]
pub struct LiftedMeasure {
    pub measure: DiscreteMeasure,
    pub orthogonal: bool,
    pub base_orthogonal: bool,
    /// `max_j ‖k_μ̃(1_j) - 1_n ⊗ k_μ(1_j)‖` on the canonical dilations.
    pub block_diagonal_residual: f64,
    pub invariance: GInvarianceCondition,
    pub base_supports_invariant: bool,
}

pub fn lift_measure(sys: &LiftedSystem, states: &StateMeasure, tol: f64) -> Result<LiftedMeasure> {
    let bary = states.barycenter()?;
    let gap = bary.max_distance(&sys.base_state);
    if gap > tol {
        return Err(domain(format!("state measure does not decompose the base state ({gap:.3e})")));
    }
    let lifted_support = states.states.iter().map(|s| sys.lift_state(s)).collect::<Result<Vec<_>>>()?;
    let measure = DiscreteMeasure::new(lifted_support, states.weights.clone())?;
    let gap = measure.barycenter().distance(&sys.lifted);
    if gap > tol {
        return Err(domain(format!("lifted measure has the wrong barycenter ({gap:.3e})")));
    }
    let base_measure = states.as_maps()?;
    if base_measure.len() != measure.len() {
        return Err(consistency("lifting merged distinct support points"));
    }
    let (_, base_dilation) = gns_dilation(&sys.base_state)?;
    let base_table = k_mu(&base_dilation, &base_measure, tol)?;
    let table = k_mu(&sys.canonical.dilation, &measure, tol)?;
    let one = identity(sys.n);
    let mut block_diagonal_residual = 0.0_f64;
    for (lm, kt) in measure.support().iter().zip(&table.values) {
        // Supports are matched through the lift, since DiscreteMeasure may reorder.
        let j = states
            .states
            .iter()
            .position(|s| sys.lift_state(s).map(|x| x.distance(lm) <= 1e-12).unwrap_or(false))
            .ok_or_else(|| consistency("lifted support point without a preimage"))?;
        let base_j = base_measure
            .support()
            .iter()
            .position(|m| m.distance(&UcpMap::from_state(&states.states[j])) <= 1e-12)
            .ok_or_else(|| consistency("base support point missing"))?;
        let expect = kron(&one, &base_table.values[base_j]);
        block_diagonal_residual = block_diagonal_residual.max(max_abs(&(kt - expect)));
    }
    let orthogonal = is_orthogonal_measure(&sys.canonical.dilation, &measure, tol)?;
    let base_orthogonal = is_orthogonal_measure(&base_dilation, &base_measure, tol)?;
    if orthogonal != base_orthogonal {
        return Err(consistency("lifted and base measures disagree on orthogonality"));
    }
    let invariance = if orthogonal {
        g_invariance_condition(&sys.canonical, &measure, tol)?
    } else {
        let defect = measure.support().iter().map(|m| crate::symmetry::g_invariance_defect(m, &sys.action)).fold(0.0, f64::max);
        GInvarianceCondition { holds: defect <= tol, support_defect: defect, subalgebra_defect: f64::NAN }
    };
    let base_supports_invariant = states.states.iter().all(|s| is_g_invariant_state(s, &sys.base_action, tol));
    if invariance.holds != base_supports_invariant {
        return Err(consistency("lifted invariance disagrees with invariance of the base states"));
    }
    Ok(LiftedMeasure { measure, orthogonal, base_orthogonal, block_diagonal_residual, invariance, base_supports_invariant })
}

/// `{π_ω(A) ∪ U_ω(G)}′` on `H_ω`.
pub fn state_commutant(sys: &LiftedSystem) -> Result<MatrixStarAlgebra> {
    let mut gens = sys.gns.rep.generators();
    gens.extend(sys.u_omega.iter().cloned());
    crate::commutant::commutant(sys.gns.dim, &gens)
}

/// Weight-`1` scalar check used by reports: `Σ_j w_j ω_j = ω`.
pub fn barycenter_gap(states: &StateMeasure, state: &State) -> Result<f64> {
    Ok(states.barycenter()?.max_distance(state))
}
