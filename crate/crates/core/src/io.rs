//! JSON problem files and report serialization.
//!
//! Complex numbers are `[re, im]` (a bare number is accepted as real),
//! matrices are row-major nested lists. Parse failures carry the JSON
//! pointer of the offending value.

use serde_json::{json, Map, Value};

use crate::algebra::{AlgebraElement, FiniteCStarAlgebra, MatrixUnit, Representation, State};
use crate::cpmap::UcpMap;
use crate::linalg::{c, ComplexMatrix, C64};
use crate::symmetry::{conjugation_action, AlgebraAction, FiniteGroup};

/// A located input problem.
#[derive(Clone, Debug, PartialEq)]
pub struct InputError {
    pub pointer: String,
    pub message: String,
}

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let at = if self.pointer.is_empty() { "/" } else { &self.pointer };
        write!(f, "{at}: {}", self.message)
    }
}

impl std::error::Error for InputError {}

pub type InputResult<T> = std::result::Result<T, InputError>;

fn escape(key: &str) -> String {
    key.replace('~', "~0").replace('/', "~1")
}

/// A JSON value together with its pointer.
#[derive(Clone, Copy)]
pub struct Node<'a> {
    value: &'a Value,
    path: &'a str,
}

/// Owned pointer storage so that child nodes can borrow their paths.
pub struct Doc {
    value: Value,
}

impl Doc {
    pub fn parse(text: &str) -> InputResult<Self> {
        serde_json::from_str(text)
            .map(|value| Self { value })
            .map_err(|e| InputError { pointer: String::new(), message: format!("malformed JSON: {e}") })
    }

    pub fn root(&self) -> Node<'_> {
        Node { value: &self.value, path: "" }
    }
}

impl<'a> Node<'a> {
    pub fn pointer(&self) -> String {
        self.path.to_string()
    }

    pub fn error<T>(&self, message: impl Into<String>) -> InputResult<T> {
        Err(InputError { pointer: self.pointer(), message: message.into() })
    }

    pub fn value(&self) -> &'a Value {
        self.value
    }

    /// Runs `f` on a child, extending the pointer.
    pub fn with_key<T>(&self, key: &str, f: impl FnOnce(Node<'_>) -> InputResult<T>) -> InputResult<T> {
        let path = format!("{}/{}", self.path, escape(key));
        match self.value.get(key) {
            Some(v) if self.value.is_object() => f(Node { value: v, path: &path }),
            _ => Err(InputError { pointer: path, message: "missing required field".into() }),
        }
    }

    pub fn with_opt_key<T>(&self, key: &str, f: impl FnOnce(Node<'_>) -> InputResult<T>) -> InputResult<Option<T>> {
        if self.value.get(key).is_none() {
            return Ok(None);
        }
        self.with_key(key, f).map(Some)
    }

    pub fn has(&self, key: &str) -> bool {
        self.value.get(key).is_some()
    }

    /// Rejects keys outside `allowed`, pointing at the first stray one.
    pub fn known_keys(&self, allowed: &[&str]) -> InputResult<()> {
        let Some(obj) = self.value.as_object() else {
            return self.error("expected an object");
        };
        match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(InputError {
                pointer: format!("{}/{}", self.path, escape(k)),
                message: format!("unknown key {k:?} (expected one of {})", allowed.join(", ")),
            }),
            None => Ok(()),
        }
    }

    pub fn map_array<T>(&self, mut f: impl FnMut(usize, Node<'_>) -> InputResult<T>) -> InputResult<Vec<T>> {
        let Some(items) = self.value.as_array() else {
            return self.error("expected an array");
        };
        items
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let path = format!("{}/{i}", self.path);
                f(i, Node { value: v, path: &path })
            })
            .collect()
    }

    pub fn usize(&self) -> InputResult<usize> {
        match self.value.as_u64() {
            Some(x) => Ok(x as usize),
            None => self.error("expected a non-negative integer"),
        }
    }

    pub fn f64(&self) -> InputResult<f64> {
        match self.value.as_f64() {
            Some(x) => Ok(x),
            None => self.error("expected a number"),
        }
    }

    pub fn str(&self) -> InputResult<&'a str> {
        match self.value.as_str() {
            Some(s) => Ok(s),
            None => self.error("expected a string"),
        }
    }

    pub fn complex(&self) -> InputResult<C64> {
        if let Some(x) = self.value.as_f64() {
            return Ok(c(x, 0.0));
        }
        match self.value.as_array().map(|a| a.as_slice()) {
            Some([re, im]) => match (re.as_f64(), im.as_f64()) {
                (Some(re), Some(im)) => Ok(c(re, im)),
                _ => self.error("expected [re, im] with numeric entries"),
            },
            _ => self.error("expected a complex number [re, im]"),
        }
    }

    /// A `rows x cols` matrix (either dimension may be left free).
    pub fn matrix(&self, rows: Option<usize>, cols: Option<usize>) -> InputResult<ComplexMatrix> {
        let entries = self.map_array(|_, row| row.map_array(|_, z| z.complex()))?;
        let r = entries.len();
        let width = entries.first().map_or(0, |row| row.len());
        if let Some(i) = entries.iter().position(|row| row.len() != width) {
            return Err(InputError { pointer: format!("{}/{i}", self.path), message: format!("row length differs from {width}") });
        }
        if rows.is_some_and(|x| x != r) || cols.is_some_and(|x| x != width) {
            let want = format!("{}x{}", rows.map_or("?".into(), |x| x.to_string()), cols.map_or("?".into(), |x| x.to_string()));
            return self.error(format!("expected a {want} matrix, found {r}x{width}"));
        }
        Ok(ComplexMatrix::from_fn(r, width, |i, j| entries[i][j]))
    }
}

/// Overrides that a problem file may carry; command-line flags win.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Options {
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub mode: Option<String>,
}

/// Everything a command may need from a problem file.
#[derive(Clone, Debug)]
pub struct Problem {
    pub algebra: FiniteCStarAlgebra,
    pub target_dim: Option<usize>,
    pub map: Option<UcpMap>,
    pub group: Option<FiniteGroup>,
    pub action: Option<AlgebraAction>,
    /// `U_g` on `H = C^{Σ n_k}` for conjugation actions and twirls.
    pub conjugation: Option<Vec<ComplexMatrix>>,
    pub state: Option<State>,
    pub options: Options,
}

impl Problem {
    /// The action, defaulting to the trivial one.
    pub fn action_or_trivial(&self) -> AlgebraAction {
        self.action.clone().unwrap_or_else(|| AlgebraAction::trivial(&self.algebra))
    }
}

pub fn parse_problem(text: &str) -> InputResult<Problem> {
    let doc = Doc::parse(text)?;
    let root = doc.root();
    if !root.value().is_object() {
        return root.error("expected a JSON object");
    }
    root.known_keys(&["algebra", "target_dim", "map", "group", "action", "action_conjugation", "state", "options"])?;
    let algebra = root.with_key("algebra", parse_algebra)?;
    let target_dim = root.with_opt_key("target_dim", |n| n.usize())?;
    let map = root.with_opt_key("map", |n| {
        let Some(d) = target_dim else {
            return n.error("a map needs \"target_dim\"");
        };
        parse_map(n, &algebra, d)
    })?;
    let group = root.with_opt_key("group", parse_group)?;
    let conjugation = root.with_opt_key("action_conjugation", |n| {
        let h: usize = algebra.blocks().iter().sum();
        n.known_keys(&["unitaries_on_H"])?;
        n.with_key("unitaries_on_H", |us| us.map_array(|_, u| u.matrix(Some(h), Some(h))))
    })?;
    let action = if root.has("action") {
        Some(root.with_key("action", |n| parse_action(n, &algebra, group.as_ref()))?)
    } else if let Some(us) = &conjugation {
        let g = match &group {
            Some(g) => g.clone(),
            None if us.len() == 1 => FiniteGroup::trivial(),
            None => return root.error("\"action_conjugation\" with several unitaries needs \"group\""),
        };
        if g.order() != us.len() {
            return root.with_key("action_conjugation", |n| n.error(format!("expected {} unitaries, one per group element", g.order())));
        }
        let rep = defining_representation(&algebra);
        let act = conjugation_action(&rep, us, &g)
            .map_err(|e| InputError { pointer: "/action_conjugation/unitaries_on_H".into(), message: e.to_string() })?;
        Some(act)
    } else {
        None
    };
    let state = root.with_opt_key("state", |n| parse_state(n, &algebra))?;
    let options = root
        .with_opt_key("options", |n| {
            n.known_keys(&["tol", "seed", "mode"])?;
            Ok(Options {
                tol: n.with_opt_key("tol", |x| x.f64())?,
                seed: n.with_opt_key("seed", |x| x.usize().map(|s| s as u64))?,
                mode: n.with_opt_key("mode", |x| x.str().map(str::to_string))?,
            })
        })?
        .unwrap_or_default();
    Ok(Problem { algebra, target_dim, map, group, action, conjugation, state, options })
}

pub fn parse_algebra(n: Node<'_>) -> InputResult<FiniteCStarAlgebra> {
    n.known_keys(&["blocks"])?;
    let blocks = n.with_key("blocks", |b| b.map_array(|_, x| x.usize()))?;
    FiniteCStarAlgebra::new(blocks).map_err(|e| InputError { pointer: format!("{}/blocks", n.pointer()), message: e.to_string() })
}

/// One map form, or an array of forms that are summed.
pub fn parse_map(n: Node<'_>, algebra: &FiniteCStarAlgebra, d: usize) -> InputResult<UcpMap> {
    if n.value().is_array() {
        let parts = n.map_array(|_, m| parse_map_form(m, algebra, d))?;
        if parts.is_empty() {
            return n.error("empty list of map terms");
        }
        let mut total = UcpMap::zero(algebra, d);
        for p in parts {
            total = total.add(&p).expect("same shapes");
        }
        return Ok(total);
    }
    parse_map_form(n, algebra, d)
}

fn parse_map_form(n: Node<'_>, algebra: &FiniteCStarAlgebra, d: usize) -> InputResult<UcpMap> {
    let form = n.with_key("form", |f| f.str().map(str::to_string))?;
    let wrap = |pointer: String| move |e: crate::Error| InputError { pointer: pointer.clone(), message: e.to_string() };
    match form.as_str() {
        "matrix_units" => {
            n.known_keys(&["form", "images"])?;
            let images = n.with_key("images", |imgs| {
                let v = imgs.map_array(|_, m| m.matrix(Some(d), Some(d)))?;
                if v.len() != algebra.dim() {
                    return imgs.error(format!("expected {} images (one per matrix unit), found {}", algebra.dim(), v.len()));
                }
                Ok(v)
            })?;
            UcpMap::new(algebra, d, images).map_err(wrap(format!("{}/images", n.pointer())))
        }
        "choi" => {
            n.known_keys(&["form", "blocks"])?;
            let blocks = n.with_key("blocks", |bs| {
                let v = bs.map_array(|k, m| {
                    let size = algebra.blocks().get(k).map(|&nk| nk * d);
                    m.matrix(size, size)
                })?;
                if v.len() != algebra.num_blocks() {
                    return bs.error(format!("expected {} Choi blocks, found {}", algebra.num_blocks(), v.len()));
                }
                Ok(v)
            })?;
            UcpMap::from_choi(algebra, d, &blocks).map_err(wrap(format!("{}/blocks", n.pointer())))
        }
        "kraus" => {
            n.known_keys(&["form", "block", "operators"])?;
            let block = n.with_opt_key("block", |b| b.usize())?.unwrap_or(0);
            if block >= algebra.num_blocks() {
                return n.with_key("block", |b| b.error(format!("block index {block} out of range")));
            }
            let nk = algebra.block_size(block);
            let ops = n.with_key("operators", |os| os.map_array(|_, m| m.matrix(Some(nk), Some(d))))?;
            UcpMap::from_kraus(algebra, d, block, &ops).map_err(wrap(format!("{}/operators", n.pointer())))
        }
        other => n.with_key("form", |f| f.error(format!("unknown map form {other:?} (matrix_units, choi, kraus)"))),
    }
}

pub fn parse_group(n: Node<'_>) -> InputResult<FiniteGroup> {
    n.known_keys(&["order", "cayley"])?;
    let order = n.with_key("order", |o| o.usize())?;
    let cayley = n.with_key("cayley", |t| t.map_array(|_, row| row.map_array(|_, x| x.usize())))?;
    if cayley.len() != order {
        return n.with_key("cayley", |t| t.error(format!("expected {order} rows")));
    }
    FiniteGroup::new(cayley).map_err(|e| InputError { pointer: format!("{}/cayley", n.pointer()), message: e.to_string() })
}

pub fn parse_action(n: Node<'_>, algebra: &FiniteCStarAlgebra, group: Option<&FiniteGroup>) -> InputResult<AlgebraAction> {
    let entries = n.map_array(|_, g| {
        g.known_keys(&["perm", "unitaries"])?;
        let perm = g.with_opt_key("perm", |p| p.map_array(|_, x| x.usize()))?.unwrap_or_else(|| (0..algebra.num_blocks()).collect());
        if perm.len() != algebra.num_blocks() {
            return g.with_key("perm", |p| p.error(format!("expected {} entries", algebra.num_blocks())));
        }
        let us = g.with_key("unitaries", |us| {
            let v = us.map_array(|k, u| {
                let size = perm.get(k).map(|&dst| algebra.block_size(dst.min(algebra.num_blocks() - 1)));
                u.matrix(size, size)
            })?;
            if v.len() != algebra.num_blocks() {
                return us.error(format!("expected {} unitaries, one per block", algebra.num_blocks()));
            }
            Ok(v)
        })?;
        Ok((perm, us))
    })?;
    let group = match group {
        Some(g) => g.clone(),
        None if entries.len() == 1 => FiniteGroup::trivial(),
        None => return n.error("an action with several elements needs \"group\""),
    };
    if entries.len() != group.order() {
        return n.error(format!("expected {} entries, one per group element", group.order()));
    }
    let (perms, unitaries): (Vec<_>, Vec<_>) = entries.into_iter().unzip();
    let act = AlgebraAction::new(&group, algebra, perms, unitaries).map_err(|e| InputError { pointer: n.pointer(), message: e.to_string() })?;
    let report = act.validate(1e-8);
    if !report.valid {
        return n.error(format!("not a group action: {}", report.violations.join("; ")));
    }
    Ok(act)
}

pub fn parse_state(n: Node<'_>, algebra: &FiniteCStarAlgebra) -> InputResult<State> {
    let wrap = |p: String| move |e: crate::Error| InputError { pointer: p.clone(), message: e.to_string() };
    if n.has("weights") {
        n.known_keys(&["weights"])?;
        let w = n.with_key("weights", |w| w.map_array(|_, x| x.f64()))?;
        if algebra.blocks().iter().any(|&b| b != 1) || w.len() != algebra.num_blocks() {
            return n.with_key("weights", |x| x.error("weights need an abelian algebra with one weight per block"));
        }
        return State::from_weights(&w).map_err(wrap(format!("{}/weights", n.pointer())));
    }
    n.known_keys(&["density"])?;
    let density = n.with_key("density", |ds| {
        let v = ds.map_array(|k, m| {
            let size = algebra.blocks().get(k).copied();
            m.matrix(size, size)
        })?;
        if v.len() != algebra.num_blocks() {
            return ds.error(format!("expected {} density blocks", algebra.num_blocks()));
        }
        Ok(v)
    })?;
    State::from_density(algebra, density).map_err(wrap(format!("{}/density", n.pointer())))
}

/// `A = ⊕ M_{n_k}` acting block-diagonally on `C^{Σ n_k}`.
pub fn defining_representation(algebra: &FiniteCStarAlgebra) -> Representation {
    let h: usize = algebra.blocks().iter().sum();
    let offsets: Vec<usize> = algebra.blocks().iter().scan(0, |acc, &n| {
        let o = *acc;
        *acc += n;
        Some(o)
    }).collect();
    Representation::from_fn(algebra, h, |u: MatrixUnit| crate::linalg::unit(h, h, offsets[u.block] + u.i, offsets[u.block] + u.j))
        .expect("block-diagonal embedding")
}

/// Entries below this magnitude are written as exact zeros.
pub const PRINT_FLOOR: f64 = 1e-13;

fn clean(x: f64) -> f64 {
    if x.abs() < PRINT_FLOOR {
        0.0
    } else {
        x
    }
}

pub fn complex_json(z: C64) -> Value {
    json!([clean(z.re), clean(z.im)])
}

pub fn matrix_json(m: &ComplexMatrix) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| complex_json(m[(i, j)])).collect())).collect())
}

pub fn real_json(x: f64) -> Value {
    if x.is_finite() {
        json!(clean(x))
    } else {
        Value::Null
    }
}

pub fn algebra_json(a: &FiniteCStarAlgebra) -> Value {
    json!({ "blocks": a.blocks() })
}

/// A map in `matrix_units` form, readable back by [`parse_map`].
pub fn map_json(phi: &UcpMap) -> Value {
    json!({ "form": "matrix_units", "images": phi.images().iter().map(matrix_json).collect::<Vec<_>>() })
}

pub fn element_json(a: &AlgebraElement) -> Value {
    Value::Array(a.blocks().iter().map(matrix_json).collect())
}

pub fn state_json(s: &State) -> Value {
    json!({ "density": s.density().iter().map(matrix_json).collect::<Vec<_>>() })
}

pub fn group_json(g: &FiniteGroup) -> Value {
    json!({ "order": g.order(), "cayley": g.cayley() })
}

pub fn action_json(a: &AlgebraAction) -> Value {
    Value::Array(
        (0..a.group().order())
            .map(|g| json!({ "perm": a.perm(g), "unitaries": a.unitaries(g).iter().map(matrix_json).collect::<Vec<_>>() }))
            .collect(),
    )
}

/// A complete problem file for a map and action.
pub fn problem_json(phi: &UcpMap, action: Option<&AlgebraAction>) -> Value {
    let mut m = Map::new();
    m.insert("algebra".into(), algebra_json(phi.algebra()));
    m.insert("target_dim".into(), json!(phi.target_dim()));
    m.insert("map".into(), map_json(phi));
    if let Some(a) = action {
        m.insert("group".into(), group_json(a.group()));
        m.insert("action".into(), action_json(a));
    }
    Value::Object(m)
}

/// Plain-text rendering of a report: nested keys indented, matrices as rows.
pub fn render_text(v: &Value) -> String {
    let mut out = String::new();
    render(v, 0, &mut out);
    out
}

fn is_complex(v: &Value) -> bool {
    matches!(v.as_array().map(|a| a.as_slice()), Some([a, b]) if a.is_number() && b.is_number())
}

fn is_matrix(v: &Value) -> bool {
    v.as_array().is_some_and(|rows| !rows.is_empty() && rows.iter().all(|r| r.as_array().is_some_and(|e| !e.is_empty() && e.iter().all(is_complex))))
}

fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.fract() == 0.0 && x.abs() < 1e9 {
        format!("{x:.0}")
    } else if (1e-4..1e6).contains(&x.abs()) {
        let s = format!("{x:.6}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{x:.3e}")
    }
}

fn fmt_complex(v: &Value) -> String {
    let a = v.as_array().expect("complex");
    let (re, im) = (a[0].as_f64().unwrap_or(0.0), a[1].as_f64().unwrap_or(0.0));
    if im == 0.0 {
        fmt_num(re)
    } else if re == 0.0 {
        format!("{}i", fmt_num(im))
    } else {
        format!("{}{}{}i", fmt_num(re), if im < 0.0 { "-" } else { "+" }, fmt_num(im.abs()))
    }
}

fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(fmt_num(n.as_f64().unwrap_or(0.0))),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.is_empty() => Some("[]".into()),
        Value::Array(a) if a.iter().all(|x| !x.is_array() && !x.is_object()) => {
            Some(format!("[{}]", a.iter().map(|x| scalar_text(x).unwrap_or_default()).collect::<Vec<_>>().join(", ")))
        }
        _ if is_complex(v) => Some(fmt_complex(v)),
        _ => None,
    }
}

fn render(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                if let Some(s) = scalar_text(x) {
                    out.push_str(&format!("{pad}{k}: {s}\n"));
                } else {
                    out.push_str(&format!("{pad}{k}:\n"));
                    render(x, indent + 1, out);
                }
            }
        }
        _ if is_matrix(v) => {
            let rows: Vec<Vec<String>> = v.as_array().unwrap().iter().map(|r| r.as_array().unwrap().iter().map(fmt_complex).collect()).collect();
            let width = rows.iter().flatten().map(|s| s.len()).max().unwrap_or(1);
            for r in rows {
                let cells: Vec<String> = r.iter().map(|s| format!("{s:>width$}")).collect();
                out.push_str(&format!("{pad}[ {} ]\n", cells.join("  ")));
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                if let Some(s) = scalar_text(x) {
                    out.push_str(&format!("{pad}- [{i}] {s}\n"));
                } else {
                    out.push_str(&format!("{pad}- [{i}]\n"));
                    render(x, indent + 1, out);
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar_text(other).unwrap_or_default())),
    }
}
