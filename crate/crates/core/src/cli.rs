//! The `ucp` command-line front end.
//!
//! Every command loads a problem file, runs one library operation and
//! returns a [`Report`] plus an exit code: 0 ok, 1 negative verdict,
//! 2 input error, 3 numerical consistency error.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::commutant::{center, commutant, random_masa, MatrixStarAlgebra};
use crate::cpmap::{kraus_dilation, minimal_stinespring, UcpMap};
use crate::ergodic::{certify, is_g_ergodic, ErgodicityCertificate, Verdict};
use crate::io::{self, defining_representation, map_json, matrix_json, real_json, Doc, InputError, Problem};
use crate::lift::{classical_decompose, lift, lift_measure, state_commutant, LiftKind};
use crate::measures::{covariant_commutant, decompose_covariant, ergodic_decompose, is_orthogonal_abelian, table_is_orthogonal};
use crate::paschke::{criterion4, module_rn, verify_self_dual, PaschkeDilation};
use crate::radon::{phi_t, random_unit_interval_element, rn_derivative, rn_g, RnOperator};
use crate::symmetry::{conjugation_action, g_invariance_defect, twirl, AlgebraAction, CovariantSystem};
use crate::Error;

pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Parser, Debug)]
#[command(name = "ucp", version, about = "Decompositions of group-invariant UCP maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Numerical tolerance [default: 1e-8, or options.tol from the problem file]
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for randomized steps [default: 0, or options.seed from the problem file]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Plain,
    GInvariant,
    Ergodic,
}

impl Mode {
    fn as_str(self) -> &'static str {
        match self {
            Mode::Plain => "plain",
            Mode::GInvariant => "g-invariant",
            Mode::Ergodic => "ergodic",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        <Self as ValueEnum>::from_str(s, false).ok()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Full,
    Diag,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a problem file and check UCP, action and invariance
    Validate { problem: PathBuf },
    /// Minimal Stinespring dilation (and covariance unitaries if an action is given)
    Dilate { problem: PathBuf },
    /// G-invariance of the map under the action
    Invariance { problem: PathBuf },
    /// Group average a ↦ (1/|G|) Σ U_g* a U_g from action_conjugation
    Twirl { problem: PathBuf },
    /// Commutant of ρ(A), or of ρ(A) ∪ U(G) when an action is given
    Commutant {
        problem: PathBuf,
        /// Ignore the action
        #[arg(long)]
        no_group: bool,
    },
    /// Radon-Nikodym correspondence T ↔ φ_T
    Rn {
        problem: PathBuf,
        /// File with {"operator": T} in dilation coordinates
        #[arg(long, conflicts_with = "inverse", required_unless_present = "inverse")]
        forward: Option<PathBuf>,
        /// File with {"map": ψ} on the same algebra
        #[arg(long)]
        inverse: Option<PathBuf>,
        /// Also test covariance against the action
        #[arg(long)]
        covariant: bool,
    },
    /// Orthogonal decomposition into leaves
    Decompose {
        problem: PathBuf,
        /// [default: plain, or options.mode from the problem file]
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Ergodicity certificate with criteria (2), (3) and (4)
    Certify { problem: PathBuf },
    /// Paschke dilation cross-checked against Stinespring
    PaschkeCrosscheck { problem: PathBuf },
    /// Lift a state on A to a UCP map on M_n(A)
    Lift {
        problem: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        n: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Dilate { .. } => "dilate",
            Command::Invariance { .. } => "invariance",
            Command::Twirl { .. } => "twirl",
            Command::Commutant { .. } => "commutant",
            Command::Rn { .. } => "rn",
            Command::Decompose { .. } => "decompose",
            Command::Certify { .. } => "certify",
            Command::PaschkeCrosscheck { .. } => "paschke-crosscheck",
            Command::Lift { .. } => "lift",
        }
    }

    pub fn problem(&self) -> &Path {
        match self {
            Command::Validate { problem }
            | Command::Dilate { problem }
            | Command::Invariance { problem }
            | Command::Twirl { problem }
            | Command::Commutant { problem, .. }
            | Command::Rn { problem, .. }
            | Command::Decompose { problem, .. }
            | Command::Certify { problem }
            | Command::PaschkeCrosscheck { problem }
            | Command::Lift { problem, .. } => problem,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Input(InputError),
    Library(Error),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Library(e)
    }
}

type Run<T> = std::result::Result<T, Failure>;

/// A finished command: the serialized report and the process exit code.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub exit_code: i32,
    pub body: Value,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.body).expect("json values serialize");
                s.push('\n');
                s
            }
            Format::Text => io::render_text(&self.body),
        }
    }

    pub fn status(&self) -> &str {
        self.body.get("status").and_then(Value::as_str).unwrap_or("")
    }
}

struct Settings {
    tol: f64,
    seed: u64,
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Report {
    let mut head = Map::new();
    head.insert("command".into(), json!(cli.command.name()));
    head.insert("problem".into(), json!(cli.command.problem().display().to_string()));
    let outcome = load(cli.command.problem()).and_then(|problem| {
        let settings = Settings {
            tol: cli.tol.or(problem.options.tol).unwrap_or(DEFAULT_TOL),
            seed: cli.seed.or(problem.options.seed).unwrap_or(0),
        };
        head.insert("tol".into(), json!(settings.tol));
        head.insert("seed".into(), json!(settings.seed));
        dispatch(&cli.command, &problem, &settings)
    });
    let (exit_code, status) = match &outcome {
        Ok((true, _)) => (0, "ok"),
        Ok((false, _)) => (1, "negative"),
        Err(Failure::Input(_)) => (2, "input_error"),
        Err(Failure::Library(Error::NumericalConsistency(_))) => (3, "consistency_error"),
        Err(Failure::Library(_)) => (2, "input_error"),
    };
    head.insert("status".into(), json!(status));
    head.insert("exit_code".into(), json!(exit_code));
    match outcome {
        Ok((_, result)) => {
            head.insert("result".into(), result);
        }
        Err(Failure::Input(e)) => {
            head.insert("error".into(), json!({ "kind": "input", "pointer": e.pointer, "message": e.message }));
        }
        Err(Failure::Library(e)) => {
            let kind = match e {
                Error::Shape(_) => "shape",
                Error::Domain(_) => "domain",
                Error::OrderViolation(_) => "order_violation",
                Error::NumericalConsistency(_) => "numerical_consistency",
            };
            head.insert("error".into(), json!({ "kind": kind, "message": e.to_string() }));
        }
    }
    Report { exit_code, body: Value::Object(head) }
}

/// Parses `args` (including the program name) and runs the command.
/// Usage errors come back as clap errors.
pub fn run_args<I, T>(args: I) -> std::result::Result<(Cli, Report), clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    let report = run(&cli);
    Ok((cli, report))
}

fn read(path: &Path) -> Run<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(InputError { pointer: String::new(), message: format!("cannot read {}: {e}", path.display()) }))
}

fn load(path: &Path) -> Run<Problem> {
    Ok(io::parse_problem(&read(path)?)?)
}

fn dispatch(cmd: &Command, p: &Problem, s: &Settings) -> Run<(bool, Value)> {
    match cmd {
        Command::Validate { .. } => validate(p, s),
        Command::Dilate { .. } => dilate(p, s),
        Command::Invariance { .. } => invariance(p, s),
        Command::Twirl { .. } => twirl_cmd(p, s),
        Command::Commutant { no_group, .. } => commutant_cmd(p, s, *no_group),
        Command::Rn { forward, inverse, covariant, .. } => rn_cmd(p, s, forward.as_deref(), inverse.as_deref(), *covariant),
        Command::Decompose { mode, .. } => {
            let mode = match (mode, &p.options.mode) {
                (Some(m), _) => *m,
                (None, Some(text)) => Mode::parse(text).ok_or_else(|| InputError {
                    pointer: "/options/mode".into(),
                    message: format!("unknown mode {text:?} (plain, g-invariant, ergodic)"),
                })?,
                (None, None) => Mode::Plain,
            };
            decompose_cmd(p, s, mode)
        }
        Command::Certify { .. } => certify_cmd(p, s),
        Command::PaschkeCrosscheck { .. } => paschke_cmd(p, s),
        Command::Lift { kind, n, .. } => lift_cmd(p, s, *kind, *n),
    }
}

fn need<'a, T>(x: Option<&'a T>, pointer: &str, what: &str) -> Run<&'a T> {
    x.ok_or_else(|| Failure::Input(InputError { pointer: pointer.into(), message: format!("this command needs {what}") }))
}

/// The map, checked to be UCP.
fn ucp_map<'a>(p: &'a Problem, s: &Settings) -> Run<&'a UcpMap> {
    let phi = need(p.map.as_ref(), "/map", "a map")?;
    let report = phi.validate_ucp(s.tol);
    if !report.valid {
        return Err(InputError { pointer: "/map".into(), message: format!("not UCP: {}", report.violations.join("; ")) }.into());
    }
    Ok(phi)
}

fn system(p: &Problem, s: &Settings, with_group: bool) -> Run<CovariantSystem> {
    let phi = ucp_map(p, s)?;
    let act = if with_group { p.action_or_trivial() } else { AlgebraAction::trivial(&p.algebra) };
    Ok(CovariantSystem::build(phi, &act, s.tol)?)
}

fn validation_json(r: &crate::algebra::ValidationReport) -> Value {
    json!({ "valid": r.valid, "max_violation": real_json(r.max_violation), "violations": r.violations })
}

fn validate(p: &Problem, s: &Settings) -> Run<(bool, Value)> {
    let mut out = Map::new();
    let mut ok = true;
    out.insert("algebra".into(), io::algebra_json(&p.algebra));
    if let Some(phi) = &p.map {
        let r = phi.validate_ucp(s.tol);
        ok &= r.valid;
        out.insert("map".into(), validation_json(&r));
    }
    if let Some(act) = &p.action {
        let r = act.validate(s.tol);
        ok &= r.valid;
        out.insert("group_order".into(), json!(act.group().order()));
        out.insert("action".into(), validation_json(&r));
        if let Some(phi) = &p.map {
            let defect = g_invariance_defect(phi, act);
            ok &= defect <= s.tol;
            out.insert("g_invariant".into(), json!(defect <= s.tol));
            out.insert("invariance_defect".into(), real_json(defect));
        }
    }
    if let Some(st) = &p.state {
        out.insert("state".into(), json!({ "valid": true }));
        if let Some(act) = &p.action {
            let defect = crate::algebra::g_invariance_defect_state(st, act);
            ok &= defect <= s.tol;
            out.insert("state_invariance_defect".into(), real_json(defect));
        }
    }
    out.insert("valid".into(), json!(ok));
    Ok((ok, Value::Object(out)))
}

fn dilate(p: &Problem, s: &Settings) -> Run<(bool, Value)> {
    let phi = ucp_map(p, s)?;
    let dil = minimal_stinespring(phi)?;
    let oracle = kraus_dilation(phi)?;
    if oracle.dim() != dil.dim() {
        return Err(Error::NumericalConsistency(format!("dilation dimension {} differs from Kraus rank {}", dil.dim(), oracle.dim())).into());
    }
    let mut out = Map::new();
    out.insert("dim_k".into(), json!(dil.dim()));
    out.insert("kraus_rank".into(), json!(oracle.dim()));
    out.insert("v".into(), matrix_json(&dil.v));
    out.insert("rho".into(), Value::Array(dil.rep.images().iter().map(matrix_json).collect()));
    out.insert("reconstruction_residual".into(), real_json(dil.reconstruction_residual()));
    out.insert("isometry_residual".into(), real_json(dil.isometry_residual()));
    if let Some(act) = &p.action {
        let sys = CovariantSystem::build(phi, act, s.tol)?;
        let r = sys.residuals();
        out.insert("covariance_unitaries".into(), Value::Array(sys.u.iter().map(matrix_json).collect()));
        out.insert("covariance_residual".into(), real_json(r.max()));
    }
    Ok((true, Value::Object(out)))
}

fn invariance(p: &Problem, s: &Settings) -> Run<(bool, Value)> {
    let phi = ucp_map(p, s)?;
    let act = need(p.action.as_ref(), "/action", "an action")?;
    let defect = g_invariance_defect(phi, act);
    let holds = defect <= s.tol;
    let mut out = Map::new();
    out.insert("g_invariant".into(), json!(holds));
    out.insert("defect".into(), real_json(defect));
    if holds {
        let sys = CovariantSystem::build(phi, act, s.tol)?;
        out.insert("covariance_residual".into(), real_json(sys.residuals().max()));
    }
    Ok((holds, Value::Object(out)))
}

fn twirl_cmd(p: &Problem, s: &Settings) -> Run<(bool, Value)> {
    let us = need(p.conjugation.as_ref(), "/action_conjugation", "\"action_conjugation\"")?;
    let group = p.group.clone().unwrap_or_else(crate::symmetry::FiniteGroup::trivial);
    let rep = defining_representation(&p.algebra);
    let phi = twirl(&rep, us, &group)?;
    let act = conjugation_action(&rep, us, &group)?;
    let defect = g_invariance_defect(&phi, &act);
    if defect > s.tol {
        return Err(Error::NumericalConsistency(format!("twirl is not G-invariant ({defect:.3e})")).into());
    }
    let mut out = Map::new();
    out.insert("map".into(), map_json(&phi));
    out.insert("target_dim".into(), json!(phi.target_dim()));
    out.insert("invariance_defect".into(), real_json(defect));
    if let Some(given) = &p.map {
        out.insert("distance_to_map".into(), real_json(given.distance(&phi)));
    }
    Ok((true, Value::Object(out)))
}

fn commutant_cmd(p: &Problem, s: &Settings, no_group: bool) -> Run<(bool, Value)> {
    let sys = system(p, s, !no_group)?;
    let m = if no_group { commutant(sys.dim(), &sys.rep().generators())? } else { covariant_commutant(&sys)? };
    let z = center(&m)?;
    let mut out = Map::new();
    out.insert("dim_k".into(), json!(sys.dim()));
    out.insert("includes_group".into(), json!(!no_group && p.action.is_some()));
    out.insert("dim".into(), json!(m.dim()));
    out.insert("basis".into(), Value::Array(m.basis().iter().map(matrix_json).collect()));
    out.insert("abelian".into(), json!(m.is_abelian(s.tol)));
    out.insert("center_dim".into(), json!(z.dim()));
    Ok((true, Value::Object(out)))
}

fn rn_json(op: &RnOperator) -> Value {
    let mut m = Map::new();
    m.insert("operator".into(), matrix_json(&op.t));
    m.insert("in_commutant".into(), json!(op.in_commutant.holds));
    m.insert("commutant_residual".into(), real_json(op.in_commutant.residual));
    m.insert("in_unit_interval".into(), json!(op.in_unit_interval.holds));
    if let Some(f) = op.in_covariant_commutant {
        m.insert("in_covariant_commutant".into(), json!(f.holds));
        m.insert("covariant_residual".into(), real_json(f.residual));
    }
    Value::Object(m)
}

fn rn_cmd(p: &Problem, s: &Settings, forward: Option<&Path>, inverse: Option<&Path>, covariant: bool) -> Run<(bool, Value)> {
    let sys = system(p, s, covariant)?;
    let k = sys.dim();
    let mut out = Map::new();
    out.insert("dim_k".into(), json!(k));
    out.insert("covariant".into(), json!(covariant));
    let mut positive = true;
    if let Some(path) = forward {
        let text = read(path)?;
        let doc = Doc::parse(&text)?;
        let t = doc.root().with_key("operator", |n| n.matrix(Some(k), Some(k)))?;
        let psi = phi_t(&sys.dilation, &t, s.tol)?;
        out.insert("direction".into(), json!("forward"));
        out.insert("map".into(), map_json(&psi));
        let op = RnOperator::inspect(&sys.dilation, t, covariant.then_some(sys.u.as_slice()), s.tol);
        if covariant {
            let defect = g_invariance_defect(&psi, &sys.action);
            let invariant = defect <= s.tol;
            let in_cov = op.in_covariant_commutant.map(|f| f.holds).unwrap_or(false);
            if invariant != in_cov {
                return Err(Error::NumericalConsistency("covariant commutant membership disagrees with G-invariance of φ_T".into()).into());
            }
            out.insert("g_invariant".into(), json!(invariant));
            positive = invariant;
        }
        out.insert("rn".into(), rn_json(&op));
    }
    if let Some(path) = inverse {
        let text = read(path)?;
        let doc = Doc::parse(&text)?;
        let d = sys.phi.target_dim();
        let psi = doc.root().with_key("map", |n| io::parse_map(n, &p.algebra, d))?;
        out.insert("direction".into(), json!("inverse"));
        if covariant {
            let r = rn_g(&sys, &psi, s.tol)?;
            out.insert("g_invariant".into(), json!(r.psi_invariant.holds));
            positive = r.covariant();
            out.insert("rn".into(), rn_json(&r.operator));
        } else {
            let op = rn_derivative(&sys.dilation, &psi, s.tol)?;
            out.insert("rn".into(), rn_json(&op));
        }
    }
    Ok((positive, Value::Object(out)))
}

fn cert_json(c: &ErgodicityCertificate) -> Value {
    let mut m = Map::new();
    m.insert("verdict".into(), json!(c.verdict.as_str()));
    m.insert("commutant_dim".into(), json!(c.commutant_dim));
    m.insert(
        "criterion2".into(),
        json!({ "holds": c.criterion2.holds, "samples": c.criterion2.samples, "max_deviation": real_json(c.criterion2.max_deviation) }),
    );
    m.insert(
        "criterion3".into(),
        json!({ "faithful": c.criterion3.faithful, "inconclusive": c.criterion3.inconclusive, "sigma_min": real_json(c.criterion3.sigma_min) }),
    );
    m.insert("criterion4".into(), c.criterion4.map_or(Value::Null, Value::Bool));
    m.insert("shortcut".into(), c.shortcut.map_or(Value::Null, |x| json!(x.as_str())));
    m.insert("witness".into(), c.witness().map_or(Value::Null, matrix_json));
    m.insert(
        "split".into(),
        c.split.as_ref().map_or(Value::Null, |sp| {
            json!({
                "t": sp.t,
                "phi1": map_json(&sp.phi1),
                "phi2": map_json(&sp.phi2),
                "reassembly_residual": real_json(sp.reassembly_residual),
                "separation": real_json(sp.separation),
            })
        }),
    );
    Value::Object(m)
}

fn leaf_json(weight: f64, phi: &UcpMap, certificate: Value) -> Value {
    json!({ "weight": real_json(weight), "map": map_json(phi), "certificate": certificate })
}

fn decompose_cmd(p: &Problem, s: &Settings, mode: Mode) -> Run<(bool, Value)> {
    let mut out = Map::new();
    out.insert("mode".into(), json!(mode.as_str()));
    match mode {
        Mode::Plain | Mode::Ergodic => {
            let sys = system(p, s, mode == Mode::Ergodic)?;
            let dec = ergodic_decompose(&sys, s.tol, s.seed)?;
            let leaves = dec
                .leaves
                .iter()
                .map(|l| leaf_json(l.weight, &l.phi, json!({ "verdict": l.verdict.as_str(), "witness": l.witness.as_ref().map_or(Value::Null, matrix_json) })))
                .collect();
            out.insert("leaves".into(), Value::Array(leaves));
            out.insert("projections".into(), Value::Array(dec.table.values.iter().map(matrix_json).collect()));
            out.insert("subalgebra_dim".into(), json!(dec.table.values.len()));
            out.insert("orthogonal".into(), json!(table_is_orthogonal(&dec.table, s.tol)?));
            out.insert("complete".into(), json!(dec.complete));
        }
        Mode::GInvariant => {
            let sys = system(p, s, true)?;
            let z = center(&covariant_commutant(&sys)?)?;
            let check = is_orthogonal_abelian(&sys.dilation, &z, s.tol)?;
            let (b, which) = if check.holds { (z, "center") } else { (MatrixStarAlgebra::scalars(sys.dim()), "scalars") };
            let dec = decompose_covariant(&sys, &b, s.tol)?;
            let mut leaves = Vec::with_capacity(dec.measure.len());
            for (phi, &w) in dec.measure.support().iter().zip(dec.measure.weights()) {
                let leaf = CovariantSystem::build(phi, &sys.action, s.tol)?;
                leaves.push(leaf_json(w, phi, cert_json(&is_g_ergodic(&leaf, s.tol)?)));
            }
            out.insert("leaves".into(), Value::Array(leaves));
            out.insert("projections".into(), Value::Array(dec.projections.iter().map(matrix_json).collect()));
            out.insert("subalgebra_dim".into(), json!(dec.projections.len()));
            out.insert("subalgebra".into(), json!(which));
            out.insert("g_invariant".into(), dec.g_invariant.map_or(Value::Null, Value::Bool));
        }
    }
    Ok((true, Value::Object(out)))
}

fn certify_cmd(p: &Problem, s: &Settings) -> Run<(bool, Value)> {
    let sys = system(p, s, true)?;
    let cert = certify(&sys, s.tol)?;
    let mut out = match cert_json(&cert) {
        Value::Object(m) => m,
        _ => unreachable!(),
    };
    out.insert("group_order".into(), json!(sys.group().order()));
    out.insert("dim_k".into(), json!(sys.dim()));
    Ok((cert.verdict == Verdict::Ergodic, Value::Object(out)))
}

/// Covariant Paschke dilation with the RN mirror and criterion (4) checked
/// against the Stinespring side.
fn paschke_cmd(p: &Problem, s: &Settings) -> Run<(bool, Value)> {
    let sys = system(p, s, true)?;
    let module = PaschkeDilation::covariant(&sys.phi, &sys.action, s.tol)?;
    let report = module.validate(s.tol);
    let axioms = module.module.axioms_residual(8, s.seed);
    let dual = verify_self_dual(&module.module, s.tol)?;
    if !report.valid || axioms > s.tol {
        return Err(Error::NumericalConsistency(format!(
            "Paschke dilation fails verification (max violation {:.3e}, axioms {axioms:.3e})",
            report.max_violation
        ))
        .into());
    }
    let m = covariant_commutant(&sys)?;
    let mut r = crate::random::rng(s.seed);
    let mut worst_stinespring = 0.0_f64;
    let mut worst_module = 0.0_f64;
    const SAMPLES: usize = 4;
    for _ in 0..SAMPLES {
        let t = random_unit_interval_element(&m, &mut r, 0.1, 0.9);
        let psi = phi_t(&sys.dilation, &t, s.tol)?;
        let back = rn_derivative(&sys.dilation, &psi, s.tol)?;
        worst_stinespring = worst_stinespring.max(crate::linalg::max_abs(&(&back.t - &t)));
        let mirrored = module_rn(&module, &psi, true, s.tol)?;
        if !mirrored.in_unit_interval.holds || mirrored.commutes_with_w.is_some_and(|f| !f.holds) {
            return Err(Error::NumericalConsistency("module RN derivative of a covariant ψ left the covariant interval".into()).into());
        }
        worst_module = worst_module.max(mirrored.residual);
    }
    if worst_stinespring > s.tol || worst_module > s.tol {
        return Err(Error::NumericalConsistency(format!(
            "RN mirror residuals {worst_stinespring:.3e} (Stinespring) and {worst_module:.3e} (module)"
        ))
        .into());
    }
    let c3 = is_g_ergodic(&sys, s.tol)?;
    let c4 = criterion4(&module, s.tol)?;
    let agree = c4.inconclusive || c3.verdict == Verdict::Inconclusive || c4.holds == (c3.verdict == Verdict::Ergodic);
    if !agree {
        return Err(Error::NumericalConsistency("criterion (4) disagrees with criterion (3)".into()).into());
    }
    let mut out = Map::new();
    out.insert("carrier_dim".into(), json!(module.carrier_dim()));
    out.insert("dim_k".into(), json!(sys.dim()));
    out.insert("max_violation".into(), real_json(report.max_violation));
    out.insert("axioms_residual".into(), real_json(axioms));
    out.insert("self_dual".into(), json!({ "maps_checked": dual.maps_checked, "max_residual": real_json(dual.max_residual) }));
    out.insert(
        "rn_mirror".into(),
        json!({ "samples": SAMPLES, "stinespring_residual": real_json(worst_stinespring), "module_residual": real_json(worst_module) }),
    );
    out.insert("criterion3".into(), json!(c3.verdict.as_str()));
    out.insert("criterion4".into(), json!({ "holds": c4.holds, "inconclusive": c4.inconclusive, "sigma_min": real_json(c4.sigma_min), "commutant_dim": c4.commutant_dim }));
    out.insert("agree".into(), json!(agree));
    Ok((true, Value::Object(out)))
}

fn lift_cmd(p: &Problem, s: &Settings, kind: Kind, n: usize) -> Run<(bool, Value)> {
    let state = need(p.state.as_ref(), "/state", "a state")?;
    if n == 0 {
        return Err(InputError { pointer: String::new(), message: "--n must be at least 1".into() }.into());
    }
    let act = p.action_or_trivial();
    let kind = match kind {
        Kind::Full => LiftKind::Full,
        Kind::Diag => LiftKind::Diagonal,
    };
    let sys = lift(state, n, &act, kind, s.tol)?;
    let comm = state_commutant(&sys)?;
    let b = if comm.is_abelian(s.tol) { comm } else { random_masa(&comm, s.seed)? };
    let states = classical_decompose(state, &sys.u_omega, &b, s.tol)?;
    let lifted = lift_measure(&sys, &states, s.tol)?;
    let cert = is_g_ergodic(&sys.canonical, s.tol)?;
    let mut out = Map::new();
    out.insert("kind".into(), json!(kind.as_str()));
    out.insert("n".into(), json!(n));
    out.insert("algebra".into(), io::algebra_json(sys.lifted.algebra()));
    out.insert("target_dim".into(), json!(sys.lifted.target_dim()));
    out.insert("map".into(), map_json(&sys.lifted));
    out.insert("dim_k".into(), json!(sys.canonical.dim()));
    out.insert("identification_residual".into(), real_json(sys.identification_residual));
    out.insert("verdict".into(), json!(cert.verdict.as_str()));
    out.insert(
        "base_decomposition".into(),
        Value::Array(
            states
                .states
                .iter()
                .zip(&states.weights)
                .map(|(st, &w)| json!({ "weight": real_json(w), "state": io::state_json(st) }))
                .collect(),
        ),
    );
    out.insert(
        "leaves".into(),
        Value::Array(lifted.measure.support().iter().zip(lifted.measure.weights()).map(|(m, &w)| json!({ "weight": real_json(w), "map": map_json(m) })).collect()),
    );
    out.insert("orthogonal".into(), json!(lifted.orthogonal));
    out.insert("base_orthogonal".into(), json!(lifted.base_orthogonal));
    out.insert("block_diagonal_residual".into(), real_json(lifted.block_diagonal_residual));
    out.insert("g_invariant_measure".into(), json!(lifted.invariance.holds));
    Ok((true, Value::Object(out)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use std::io::Write;

    fn problem(v: &Value) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "{v}").unwrap();
        f
    }

    fn go(args: &[&str]) -> Report {
        let mut all = vec!["ucp"];
        all.extend_from_slice(args);
        run_args(all).unwrap().1
    }

    #[test]
    fn e3_examples() {
        let trivial = problem(&io::problem_json(&fixtures::e3_map(), None));
        let swap = problem(&io::problem_json(&fixtures::e3_map(), Some(&fixtures::e3_swap())));
        let r = go(&["certify", swap.path().to_str().unwrap()]);
        assert_eq!((r.exit_code, r.body["result"]["verdict"].as_str()), (0, Some("ergodic")));
        let r = go(&["certify", trivial.path().to_str().unwrap()]);
        assert_eq!((r.exit_code, r.body["result"]["verdict"].as_str()), (1, Some("not_ergodic")));
        let r = go(&["decompose", "--mode", "plain", trivial.path().to_str().unwrap()]);
        assert_eq!(r.exit_code, 0);
        let leaves = r.body["result"]["leaves"].as_array().unwrap();
        assert_eq!(leaves.len(), 2);
        assert!(leaves.iter().all(|l| (l["weight"].as_f64().unwrap() - 0.5).abs() < 1e-8));
    }

    #[test]
    fn malformed_input() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "{{\"algebra\": {{\"blocks\": [2]}}, \"target_dim\": 2, \"map\": {{\"form\": \"nope\"}}}}").unwrap();
        let r = go(&["validate", f.path().to_str().unwrap()]);
        assert_eq!(r.exit_code, 2);
        assert_eq!(r.body["error"]["pointer"], "/map/form");
        assert!(Cli::try_parse_from(["ucp", "frobnicate", "x"]).is_err());
    }

    #[test]
    fn deterministic_reports() {
        let f = problem(&io::problem_json(&fixtures::e3_map(), None));
        let a = go(&["decompose", "--seed", "7", "--format", "json", f.path().to_str().unwrap()]);
        let b = go(&["decompose", "--seed", "7", "--format", "json", f.path().to_str().unwrap()]);
        assert_eq!(a.render(Format::Json), b.render(Format::Json));
        assert_eq!(a.render(Format::Text), b.render(Format::Text));
    }
}
