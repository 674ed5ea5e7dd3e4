//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs with `cargo test --test acceptance`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

use ucp_ergodic::algebra::{FiniteCStarAlgebra, Representation, State};
use ucp_ergodic::commutant::center;
use ucp_ergodic::cpmap::{cp_leq, kraus_dilation, minimal_stinespring, stinespring_equivalence, UcpMap};
use ucp_ergodic::ergodic::{brute_force_extreme, certify, is_g_ergodic, Verdict};
use ucp_ergodic::fixtures::{self, e3_component, e3_map, e3_swap, pauli_z};
use ucp_ergodic::lift::{classical_decompose, lift, lift_measure, state_commutant, LiftKind};
use ucp_ergodic::linalg::{c, eigh, identity, max_abs, rank, unit, zeros, ComplexMatrix};
use ucp_ergodic::measures::{
    covariant_commutant, decompose, ergodic_decompose, g_invariance_condition, is_orthogonal_abelian, k_mu, DiscreteMeasure,
};
use ucp_ergodic::paschke::{criterion4, verify_self_dual, PaschkeDilation};
use ucp_ergodic::radon::{phi_t, random_unit_interval_element, RnOperator, RnSolver};
use ucp_ergodic::random::{random_algebra, random_cp, random_invariant_pair, random_ucp, random_unitary, rng};
use ucp_ergodic::symmetry::{conjugation_action, g_invariance_defect, is_g_invariant, pauli_unitaries, twirl, AlgebraAction, CovariantSystem, FiniteGroup};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: ucp_ergodic::Result<T>, what: &str) -> Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

fn min_eig(m: &ComplexMatrix) -> f64 {
    eigh(&((m + m.adjoint()) * c(0.5, 0.0))).0[0]
}

/// `Σ_k n_k · rank C^(k)`, with ranks by SVD.
fn kraus_rank_dim(phi: &UcpMap) -> usize {
    phi.choi_blocks().iter().zip(phi.algebra().blocks()).map(|(c, &n)| n * rank(c)).sum()
}

fn reconstruction_per_unit(d: &ucp_ergodic::cpmap::StinespringDilation, phi: &UcpMap) -> f64 {
    phi.algebra()
        .matrix_units()
        .into_iter()
        .map(|e| max_abs(&(d.v.adjoint() * d.rep.image(e) * &d.v - phi.image(e))))
        .fold(0.0, f64::max)
}

fn c1_dilation() -> Outcome {
    let mut r = rng(101);
    let mut worst = 0.0_f64;
    for i in 0..100 {
        let alg = random_algebra(&mut r, 3, 3, 20);
        let d = 1 + i % 4;
        let phi = random_cp(&mut r, &alg, d, 3);
        let dil = lib(minimal_stinespring(&phi), "dilation")?;
        worst = worst.max(reconstruction_per_unit(&dil, &phi));
        let oracle = kraus_rank_dim(&phi);
        let kraus = lib(kraus_dilation(&phi), "Kraus dilation")?.dim();
        ensure(dil.dim() == oracle && kraus == oracle, || format!("map {i}: dim K {} vs Kraus-rank oracle {oracle} vs Kraus {kraus}", dil.dim()))?;
    }
    ensure(worst <= 1e-9, || format!("reconstruction residual {worst:.3e}"))?;
    Ok(format!("100 maps, max residual {worst:.1e}"))
}

fn c2_uniqueness() -> Outcome {
    let mut r = rng(202);
    let mut worst = 0.0_f64;
    for i in 0..25 {
        let alg = random_algebra(&mut r, 3, 3, 14);
        let phi = random_ucp(&mut r, &alg, 1 + i % 3, 3);
        let d1 = lib(minimal_stinespring(&phi), "gram dilation")?;
        let d2 = lib(kraus_dilation(&phi), "Kraus dilation")?;
        let u = lib(stinespring_equivalence(&d1, &d2, 1e-8), "equivalence")?;
        let k = d1.dim();
        let mut res = max_abs(&(u.adjoint() * &u - identity(k))).max(max_abs(&(&u * &d1.v - &d2.v)));
        for e in alg.matrix_units() {
            res = res.max(max_abs(&(&u * d1.rep.image(e) - d2.rep.image(e) * &u)));
        }
        worst = worst.max(res);
    }
    ensure(worst <= 1e-8, || format!("relation residual {worst:.3e}"))?;
    Ok(format!("25 maps, max relation residual {worst:.1e}"))
}

fn c3_rn() -> Outcome {
    let mut r = rng(303);
    let mut worst = 0.0_f64;
    let (mut comparable, mut incomparable) = (0, 0);
    for i in 0..100 {
        let alg = random_algebra(&mut r, 3, 3, 14);
        let phi = random_ucp(&mut r, &alg, 1 + i % 3, 3);
        let dil = lib(minimal_stinespring(&phi), "dilation")?;
        let solver = lib(RnSolver::new(&dil), "solver")?;
        let t = random_unit_interval_element(&solver.commutant, &mut r, 0.0, 1.0);
        let psi = lib(phi_t(&dil, &t, 1e-9), "phi_T")?;
        let back = lib(solver.rn_derivative(&psi, 1e-9), "rn")?;
        worst = worst.max(max_abs(&(&back.t - &t)));

        if i % 4 == 0 {
            let lo = random_unit_interval_element(&solver.commutant, &mut r, 0.05, 0.6);
            let bump = random_unit_interval_element(&solver.commutant, &mut r, 0.1, 1.0) * c(0.3, 0.0);
            let other = random_unit_interval_element(&solver.commutant, &mut r, 0.05, 0.95);
            let hi = &lo + bump;
            for (x, y) in [(&lo, &hi), (&hi, &lo), (&lo, &other), (&other, &lo)] {
                let gap = min_eig(&(y - x));
                if gap.abs() < 1e-6 {
                    continue;
                }
                let px = lib(phi_t(&dil, x, 1e-9), "phi_T")?;
                let py = lib(phi_t(&dil, y, 1e-9), "phi_T")?;
                let by_map = lib(cp_leq(&px, &py, 1e-9), "cp order")?;
                ensure(by_map == (gap > 0.0), || format!("order mismatch at pair {i}: T gap {gap:.3e}, cp order {by_map}"))?;
                if gap > 0.0 {
                    comparable += 1;
                } else {
                    incomparable += 1;
                }
            }
        }
    }
    ensure(worst <= 1e-8, || format!("roundtrip residual {worst:.3e}"))?;
    ensure(comparable > 0 && incomparable > 0, || "order sample missed a case".into())?;
    Ok(format!("100 pairs, max roundtrip {worst:.1e}; order agrees on {comparable} ordered and {incomparable} unordered pairs"))
}

fn c4_covariant_rn() -> Outcome {
    let mut r = rng(404);
    let mut cases = 0;
    let mut positives = 0;
    for i in 0..25 {
        let (phi, act) = random_invariant_pair(&mut r, i, 12);
        let sys = lib(CovariantSystem::build(&phi, &act, 1e-9), "system")?;
        let cov = lib(covariant_commutant(&sys), "covariant commutant")?;
        let solver = lib(RnSolver::new(&sys.dilation), "solver")?;
        let ts = [
            random_unit_interval_element(&cov, &mut r, 0.0, 1.0),
            random_unit_interval_element(&solver.commutant, &mut r, 0.0, 1.0),
        ];
        for t in ts {
            let op = RnOperator::inspect(&sys.dilation, t.clone(), Some(&sys.u), 1e-8);
            let member = op.in_covariant_commutant.expect("unitaries given").holds;
            let psi = lib(phi_t(&sys.dilation, &t, 1e-9), "phi_T")?;
            let invariant = g_invariance_defect(&psi, &act) <= 1e-8;
            ensure(member == invariant, || format!("system {i}: T covariant {member} but φ_T invariant {invariant}"))?;
            cases += 1;
            positives += member as usize;
        }
    }
    ensure(positives < cases, || "no non-covariant T was sampled".into())?;
    Ok(format!("{cases} operators on 25 systems, {positives} covariant, zero counterexamples"))
}

fn measures_roundtrip(sys: &CovariantSystem, mu: &DiscreteMeasure) -> Result<(), String> {
    let table = lib(k_mu(&sys.dilation, mu, 1e-8), "k_mu")?;
    let b = lib(table.subalgebra(), "B_mu")?;
    let again = lib(decompose(&sys.dilation, &b, 1e-8), "decompose")?;
    ensure(again.measure.same_as(mu, 1e-8), || "decompose(k_mu(μ)) differs from μ".into())?;
    let b2 = lib(lib(k_mu(&sys.dilation, &again.measure, 1e-8), "k_mu")?.subalgebra(), "B_mu")?;
    ensure(b2.same_span(&b, 1e-8), || "k_mu(decompose(B)) differs from B".into())?;
    Ok(())
}

fn subalgebra_roundtrip(sys: &CovariantSystem) -> Result<bool, String> {
    let z = lib(center(&lib(covariant_commutant(sys), "commutant")?), "center")?;
    if !lib(is_orthogonal_abelian(&sys.dilation, &z, 1e-8), "orthogonality")?.holds {
        return Ok(false);
    }
    let dec = lib(decompose(&sys.dilation, &z, 1e-8), "decompose")?;
    let b = lib(lib(k_mu(&sys.dilation, &dec.measure, 1e-8), "k_mu")?.subalgebra(), "B_mu")?;
    ensure(b.same_span(&z, 1e-8), || "B_mu of the center decomposition differs from the center".into())?;
    Ok(true)
}

fn c5_correspondence() -> Outcome {
    let mut systems = vec![
        lib(CovariantSystem::build(&e3_map(), &AlgebraAction::trivial(&fixtures::e3_algebra()), 1e-9), "E3")?,
        lib(CovariantSystem::build(&e3_map(), &e3_swap(), 1e-9), "E3 swap")?,
    ];
    let mut r = rng(505);
    for i in 0..10 {
        let (phi, act) = random_invariant_pair(&mut r, i, 12);
        systems.push(lib(CovariantSystem::build(&phi, &act, 1e-9), "random system")?);
    }
    let mut centers = 0;
    let mut points = 0;
    for (i, sys) in systems.iter().enumerate() {
        let dec = lib(ergodic_decompose(sys, 1e-9, i as u64), "ergodic decomposition")?;
        points += dec.measure.len();
        measures_roundtrip(sys, &dec.measure).map_err(|e| format!("system {i}: {e}"))?;
        centers += subalgebra_roundtrip(sys).map_err(|e| format!("system {i}: {e}"))? as usize;
    }
    ensure(systems[0].dilation.dim() == 4, || "E3 dilation".into())?;
    Ok(format!("12 systems ({points} support points), {centers} center roundtrips"))
}

fn c6_invariance() -> Outcome {
    let mut r = rng(606);
    let (mut yes, mut no) = (0, 0);
    let mut instances: Vec<(UcpMap, AlgebraAction)> = fixtures::all().into_iter().map(|f| (f.phi, f.action)).collect();
    for i in 0..20 {
        instances.push(random_invariant_pair(&mut r, i, 12));
    }
    for (i, (phi, act)) in instances.iter().enumerate() {
        let sys = lib(CovariantSystem::build(phi, act, 1e-9), "system")?;
        let plain = lib(CovariantSystem::build(phi, &AlgebraAction::trivial(phi.algebra()), 1e-9), "plain system")?;
        for source in [&plain, &sys] {
            let dec = lib(ergodic_decompose(source, 1e-9, i as u64), "decomposition")?;
            let cond = lib(g_invariance_condition(&sys, &dec.measure, 1e-8), &format!("instance {i}"))?;
            if cond.holds {
                yes += 1;
            } else {
                no += 1;
            }
        }
    }
    ensure(no > 0, || "no non-invariant measure was tested".into())?;
    Ok(format!("{} measures: {yes} invariant, {no} not, no disagreement", yes + no))
}

fn c7_criteria() -> Outcome {
    let mut cases: Vec<(String, UcpMap, AlgebraAction, Option<Verdict>)> =
        fixtures::all().into_iter().map(|f| (f.name.to_string(), f.phi, f.action, Some(f.expected))).collect();
    let mut r = rng(707);
    for i in 0..25 {
        let (phi, act) = random_invariant_pair(&mut r, i, 12);
        cases.push((format!("random {i}"), phi, act, None));
    }
    let (mut ergodic, mut split) = (0, 0);
    for (i, (name, phi, act, expected)) in cases.iter().enumerate() {
        let sys = lib(CovariantSystem::build(phi, act, 1e-9), name)?;
        ensure(sys.dim() <= 12, || format!("{name}: dim K {}", sys.dim()))?;
        let cert = lib(certify(&sys, 1e-9), name)?;
        let is_ergodic = cert.verdict == Verdict::Ergodic;
        ensure(cert.verdict != Verdict::Inconclusive, || format!("{name}: inconclusive"))?;
        ensure(cert.criterion2.holds == is_ergodic, || format!("{name}: criterion (2) disagrees"))?;
        ensure(cert.criterion4 == Some(is_ergodic), || format!("{name}: criterion (4) disagrees"))?;
        let brute = lib(brute_force_extreme(phi, act, 200, i as u64, 1e-8), name)?;
        ensure(brute == is_ergodic, || format!("{name}: brute force says extreme = {brute}"))?;
        if let Some(v) = expected {
            ensure(*v == cert.verdict, || format!("{name}: expected {}", v.as_str()))?;
        }
        if is_ergodic {
            ergodic += 1;
        } else {
            split += 1;
        }
    }
    Ok(format!("{} systems agree ({ergodic} ergodic, {split} split)", cases.len()))
}

fn c8_e3() -> Outcome {
    let trivial = lib(CovariantSystem::build(&e3_map(), &AlgebraAction::trivial(&fixtures::e3_algebra()), 1e-9), "E3")?;
    let cert = lib(certify(&trivial, 1e-8), "certify")?;
    ensure(cert.verdict == Verdict::NotErgodic, || format!("trivial G verdict {}", cert.verdict.as_str()))?;
    let dec = lib(ergodic_decompose(&trivial, 1e-8, 0), "decompose")?;
    ensure(dec.complete && dec.leaves.len() == 2, || format!("{} leaves", dec.leaves.len()))?;
    let (a, b) = (e3_component(0), e3_component(1));
    for leaf in &dec.leaves {
        ensure((leaf.weight - 0.5).abs() <= 1e-8, || format!("weight {}", leaf.weight))?;
        let dist = leaf.phi.distance(&a).min(leaf.phi.distance(&b));
        ensure(dist <= 1e-8, || format!("leaf is {dist:.3e} from both components"))?;
        let leaf_sys = lib(CovariantSystem::build(&leaf.phi, &AlgebraAction::trivial(&fixtures::e3_algebra()), 1e-9), "leaf")?;
        ensure(lib(certify(&leaf_sys, 1e-8), "leaf certificate")?.verdict == Verdict::Ergodic, || "leaf not extreme".into())?;
    }
    ensure(dec.leaves[0].phi.distance(&dec.leaves[1].phi) > 0.5, || "leaves coincide".into())?;
    let swapped = lib(CovariantSystem::build(&e3_map(), &e3_swap(), 1e-9), "E3 swap")?;
    let cert = lib(certify(&swapped, 1e-8), "certify swap")?;
    ensure(cert.verdict == Verdict::Ergodic, || format!("swap verdict {}", cert.verdict.as_str()))?;
    Ok("trivial G splits ½ a + ½ b into extreme leaves; Z2 swap is G-ergodic".into())
}

fn c9_twirl() -> Outcome {
    let rep = Representation::identity(2);
    let m2 = FiniteCStarAlgebra::full(2);
    let pauli = lib(twirl(&rep, &pauli_unitaries(), &FiniteGroup::klein()), "Pauli twirl")?;
    let trace = lib(UcpMap::from_fn(&m2, 2, |u| if u.i == u.j { identity(2) * c(0.5, 0.0) } else { zeros(2, 2) }), "trace map")?;
    let e1 = pauli.distance(&trace);
    let us = vec![identity(2), pauli_z()];
    let z2 = FiniteGroup::cyclic(2);
    let pinch = lib(twirl(&rep, &us, &z2), "Z twirl")?;
    let diag = lib(UcpMap::from_fn(&m2, 2, |u| if u.i == u.j { unit(2, 2, u.i, u.j) } else { zeros(2, 2) }), "pinching")?;
    let e2 = pinch.distance(&diag);
    ensure(e1 <= 1e-12 && e2 <= 1e-12, || format!("twirl errors {e1:.3e}, {e2:.3e}"))?;
    let mut outputs = vec![
        (pauli, lib(conjugation_action(&rep, &pauli_unitaries(), &FiniteGroup::klein()), "Pauli action")?),
        (pinch, lib(conjugation_action(&rep, &us, &z2), "Z action")?),
    ];
    // Cyclic groups generated by W diag(ζ^k) W* on M_n.
    let mut r = rng(909);
    for n in 2..=4 {
        for m in 2..=4 {
            let w = random_unitary(&mut r, n);
            let zeta = |k: usize| c(0.0, 2.0 * std::f64::consts::PI * k as f64 / m as f64).exp();
            let gens: Vec<ComplexMatrix> = (0..m)
                .map(|g| &w * ComplexMatrix::from_fn(n, n, |i, j| if i == j { zeta((g * (i + 1)) % m) } else { c(0.0, 0.0) }) * w.adjoint())
                .collect();
            let rep = Representation::identity(n);
            let group = FiniteGroup::cyclic(m);
            let phi = lib(twirl(&rep, &gens, &group), "random twirl")?;
            outputs.push((phi, lib(conjugation_action(&rep, &gens, &group), "random action")?));
        }
    }
    for (phi, act) in &outputs {
        ensure(is_g_invariant(phi, act, 1e-12) && phi.is_ucp(1e-12), || "twirl output not invariant".into())?;
    }
    Ok(format!("errors {e1:.1e} and {e2:.1e}; {} twirls invariant", outputs.len()))
}

fn c10_lifts() -> Outcome {
    let omega = lib(State::from_weights(&[0.5, 0.5]), "state")?;
    let c2 = FiniteCStarAlgebra::diagonal(2);
    let swap = lib(AlgebraAction::block_swap(&c2, 0, 1), "swap")?;
    let mut worst = 0.0_f64;
    for kind in [LiftKind::Full, LiftKind::Diagonal] {
        for n in 1..=3 {
            let sys = lib(lift(&omega, n, &AlgebraAction::trivial(&c2), kind, 1e-9), "lift")?;
            let b = lib(state_commutant(&sys), "commutant")?;
            let states = lib(classical_decompose(&omega, &sys.u_omega, &b, 1e-9), "classical decomposition")?;
            let lifted = lib(lift_measure(&sys, &states, 1e-9), "lifted measure")?;
            ensure(lifted.measure.len() == 2 && lifted.orthogonal, || format!("{} n={n}: not an orthogonal two-point measure", kind.as_str()))?;
            ensure(lifted.measure.weights().iter().all(|w| (w - 0.5).abs() <= 1e-8), || "weights".into())?;
            worst = worst.max(lifted.block_diagonal_residual);

            let g = lib(lift(&omega, n, &swap, kind, 1e-9), "swap lift")?;
            let cert = lib(certify(&g.canonical, 1e-8), "lift certificate")?;
            ensure(cert.verdict == Verdict::Ergodic, || format!("{} n={n}: swap lift not ergodic", kind.as_str()))?;
            let b = lib(state_commutant(&g), "commutant")?;
            let states = lib(classical_decompose(&omega, &g.u_omega, &b, 1e-9), "classical decomposition")?;
            let lifted = lib(lift_measure(&g, &states, 1e-9), "lifted measure")?;
            ensure(lifted.measure.len() == 1, || "swap lift is not a point mass".into())?;
        }
    }
    ensure(worst <= 1e-8, || format!("block-diagonal residual {worst:.3e}"))?;
    Ok(format!("full and diag lifts, n = 1..3, block residual {worst:.1e}"))
}

fn c11_paschke() -> Outcome {
    let mut worst = 0.0_f64;
    let mut cases: Vec<(String, UcpMap, AlgebraAction)> = fixtures::all().into_iter().map(|f| (f.name.to_string(), f.phi, f.action)).collect();
    let mut r = rng(1111);
    for i in 0..12 {
        let (phi, act) = random_invariant_pair(&mut r, i, 12);
        cases.push((format!("random {i}"), phi, act));
    }
    for (name, phi, act) in &cases {
        let p = lib(PaschkeDilation::covariant(phi, act, 1e-9), name)?;
        let report = p.validate(1e-9);
        let axioms = p.module.axioms_residual(16, 0);
        let dual = lib(verify_self_dual(&p.module, 1e-9), name)?;
        worst = worst.max(report.max_violation).max(axioms).max(dual.max_residual);
        ensure(report.valid, || format!("{name}: {}", report.violations.join("; ")))?;
        let sys = lib(CovariantSystem::build(phi, act, 1e-9), name)?;
        let c3 = lib(is_g_ergodic(&sys, 1e-9), name)?;
        let c4 = lib(criterion4(&p, 1e-9), name)?;
        ensure(!c4.inconclusive && c4.holds == (c3.verdict == Verdict::Ergodic), || format!("{name}: criterion (4) disagrees"))?;
    }
    ensure(worst <= 1e-9, || format!("residual {worst:.3e}"))?;
    Ok(format!("{} systems, max residual {worst:.1e}, criterion (4) agrees", cases.len()))
}

type Criterion = fn() -> Outcome;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 11] = [
        ("dilation reconstruction", c1_dilation),
        ("Stinespring uniqueness", c2_uniqueness),
        ("RN roundtrip and order", c3_rn),
        ("covariant RN", c4_covariant_rn),
        ("orthogonal-measure correspondence", c5_correspondence),
        ("invariance theorem", c6_invariance),
        ("ergodicity criteria equivalence", c7_criteria),
        ("worked contrast E3", c8_e3),
        ("twirl", c9_twirl),
        ("state lifts", c10_lifts),
        ("Paschke module", c11_paschke),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panic: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
