//! The model file format: a versioned JSON document with exactly one
//! top-level model block (`slh`, `stratonovich`, `fermi`, `network`, or
//! `linear_passive`) and an optional `rho0` initial state.
//!
//! Complex numbers are `[re, im]` pairs; a matrix is an array of rows of
//! pairs; an operator matrix (`S`, `E`) is an n×n array of matrices.
//! Ports and channels are 0-based. Parse failures name the first
//! malformed field by its JSON path.

use std::fs;

use serde_json::{json, Value};

use slh_core::fermi::{FermiSLH, ParityContext};
use slh_core::linalg::CMatrix;
use slh_core::network::{Edge, NetworkSpec, Port};
use slh_core::wire::LinearPassive;
use slh_core::{Operator, SLHTriple, StratonovichCoefficients, C64};

use crate::error::{CliError, CliResult};

pub enum ModelKind {
    Slh(SLHTriple),
    Stratonovich(StratonovichCoefficients),
    Fermi(FermiSLH),
    Network(NetworkSpec),
    LinearPassive(LinearPassive),
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Slh(_) => "slh",
            ModelKind::Stratonovich(_) => "stratonovich",
            ModelKind::Fermi(_) => "fermi",
            ModelKind::Network(_) => "network",
            ModelKind::LinearPassive(_) => "linear_passive",
        }
    }
}

pub struct ModelFile {
    pub kind: ModelKind,
    pub rho0: Option<Operator>,
}

pub fn parse_model_file(path: &str, tol: f64) -> CliResult<ModelFile> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::io(format!("cannot read {path}: {e}")))?;
    parse_model_text(&text, tol)
}

pub fn parse_model_text(text: &str, tol: f64) -> CliResult<ModelFile> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| CliError::parse(format!("line {} column {}: {}", e.line(), e.column(), e)))?;
    let root = value
        .as_object()
        .ok_or_else(|| CliError::shape("top level: expected an object".to_string()))?;

    match root.get("version") {
        Some(v) if v.as_u64() == Some(1) => {}
        Some(v) => return Err(CliError::shape(format!("version: expected 1, got {v}"))),
        None => return Err(CliError::shape("version: missing".to_string())),
    }

    let kinds = ["slh", "stratonovich", "fermi", "network", "linear_passive"];
    let present: Vec<&str> = kinds
        .iter()
        .copied()
        .filter(|k| root.contains_key(*k))
        .collect();
    if present.len() != 1 {
        return Err(CliError::invariant(format!(
            "expected exactly one model block of {kinds:?}, found {present:?}"
        )));
    }

    for key in root.keys() {
        if key != "version" && key != "rho0" && !kinds.contains(&key.as_str()) {
            return Err(CliError::shape(format!("{key}: unknown top-level field")));
        }
    }

    let kind = match present[0] {
        "slh" => ModelKind::Slh(parse_slh_block(&root["slh"], "slh", tol)?),
        "stratonovich" => {
            ModelKind::Stratonovich(parse_stratonovich_block(&root["stratonovich"], tol)?)
        }
        "fermi" => ModelKind::Fermi(parse_fermi_block(&root["fermi"], tol)?),
        "network" => ModelKind::Network(parse_network_block(&root["network"], tol)?),
        "linear_passive" => {
            ModelKind::LinearPassive(parse_linear_passive_block(&root["linear_passive"], tol)?)
        }
        _ => unreachable!(),
    };

    let rho0 = match root.get("rho0") {
        Some(v) => Some(square_matrix(v, "rho0")?),
        None => None,
    };

    Ok(ModelFile { kind, rho0 })
}

fn field<'v>(v: &'v Value, name: &str, path: &str) -> CliResult<&'v Value> {
    v.as_object()
        .ok_or_else(|| CliError::shape(format!("{path}: expected an object")))?
        .get(name)
        .ok_or_else(|| CliError::shape(format!("{path}.{name}: missing")))
}

fn count(v: &Value, name: &str, path: &str) -> CliResult<usize> {
    let raw = field(v, name, path)?;
    raw.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| CliError::shape(format!("{path}.{name}: expected a nonnegative integer")))
}

fn complex(v: &Value, path: &str) -> CliResult<C64> {
    let pair = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| CliError::shape(format!("{path}: expected a [re, im] pair")))?;
    let part = |k: usize, tag: &str| -> CliResult<f64> {
        pair[k]
            .as_f64()
            .ok_or_else(|| CliError::shape(format!("{path}[{k}]: expected a {tag} number")))
    };
    Ok(C64::new(part(0, "real")?, part(1, "imaginary")?))
}

/// Rectangular complex matrix from an array of rows of pairs.
fn rect_matrix(v: &Value, path: &str) -> CliResult<CMatrix> {
    let rows = v
        .as_array()
        .ok_or_else(|| CliError::shape(format!("{path}: expected an array of rows")))?;
    if rows.is_empty() {
        return Err(CliError::shape(format!("{path}: matrix has no rows")));
    }
    let mut parsed: Vec<Vec<C64>> = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let cells = row
            .as_array()
            .ok_or_else(|| CliError::shape(format!("{path}[{i}]: expected an array of pairs")))?;
        let mut out = Vec::with_capacity(cells.len());
        for (j, cell) in cells.iter().enumerate() {
            out.push(complex(cell, &format!("{path}[{i}][{j}]"))?);
        }
        parsed.push(out);
    }
    let cols = parsed[0].len();
    if cols == 0 || parsed.iter().any(|r| r.len() != cols) {
        return Err(CliError::shape(format!(
            "{path}: rows must be non-empty and of equal length"
        )));
    }
    CMatrix::from_rows(&parsed).ok_or_else(|| CliError::shape(format!("{path}: malformed matrix")))
}

fn square_matrix(v: &Value, path: &str) -> CliResult<Operator> {
    let m = rect_matrix(v, path)?;
    if m.rows() != m.cols() {
        return Err(CliError::shape(format!(
            "{path}: expected a square matrix, got {}×{}",
            m.rows(),
            m.cols()
        )));
    }
    let entries: Vec<C64> = m.data().to_vec();
    Operator::new(m.rows(), entries).map_err(|e| CliError::shape(format!("{path}: {e}")))
}

fn sized_matrix(v: &Value, path: &str, dim: usize) -> CliResult<Operator> {
    let op = square_matrix(v, path)?;
    if op.dim() != dim {
        return Err(CliError::shape(format!(
            "{path}: expected dimension {dim}, got {}",
            op.dim()
        )));
    }
    Ok(op)
}

/// n×n grid of dim×dim matrices.
fn operator_grid(v: &Value, path: &str, n: usize, dim: usize) -> CliResult<Vec<Vec<Operator>>> {
    let rows = v
        .as_array()
        .filter(|a| a.len() == n)
        .ok_or_else(|| CliError::shape(format!("{path}: expected {n} rows of operator blocks")))?;
    let mut out = Vec::with_capacity(n);
    for (i, row) in rows.iter().enumerate() {
        let cells = row
            .as_array()
            .filter(|a| a.len() == n)
            .ok_or_else(|| CliError::shape(format!("{path}[{i}]: expected {n} operator blocks")))?;
        let mut parsed = Vec::with_capacity(n);
        for (j, cell) in cells.iter().enumerate() {
            parsed.push(sized_matrix(cell, &format!("{path}[{i}][{j}]"), dim)?);
        }
        out.push(parsed);
    }
    Ok(out)
}

fn operator_list(v: &Value, path: &str, n: usize, dim: usize) -> CliResult<Vec<Operator>> {
    let cells = v
        .as_array()
        .filter(|a| a.len() == n)
        .ok_or_else(|| CliError::shape(format!("{path}: expected {n} operator blocks")))?;
    cells
        .iter()
        .enumerate()
        .map(|(i, cell)| sized_matrix(cell, &format!("{path}[{i}]"), dim))
        .collect()
}

fn parse_slh_block(v: &Value, path: &str, tol: f64) -> CliResult<SLHTriple> {
    let n = count(v, "n", path)?;
    let dim = count(v, "dim", path)?;
    if dim == 0 {
        return Err(CliError::shape(format!("{path}.dim: must be positive")));
    }
    let scattering = operator_grid(field(v, "S", path)?, &format!("{path}.S"), n, dim)?;
    let coupling = operator_list(field(v, "L", path)?, &format!("{path}.L"), n, dim)?;
    let hamiltonian = sized_matrix(field(v, "H", path)?, &format!("{path}.H"), dim)?;
    let triple = SLHTriple::new(scattering, coupling, hamiltonian)
        .map_err(|e| CliError::shape(format!("{path}: {e}")))?;
    triple
        .validate(tol)
        .map_err(|e| CliError::invariant(format!("{path}.S: {e}")))?;
    Ok(triple)
}

fn parse_stratonovich_block(v: &Value, tol: f64) -> CliResult<StratonovichCoefficients> {
    let path = "stratonovich";
    let n = count(v, "n", path)?;
    let dim = count(v, "dim", path)?;
    let quadratic = operator_grid(field(v, "E", path)?, "stratonovich.E", n, dim)?;
    let linear = operator_list(field(v, "Evec", path)?, "stratonovich.Evec", n, dim)?;
    let constant = sized_matrix(field(v, "E00", path)?, "stratonovich.E00", dim)?;
    let coeffs = StratonovichCoefficients::new(quadratic, linear, constant)
        .map_err(|e| CliError::shape(format!("{path}: {e}")))?;
    coeffs
        .validate(tol)
        .map_err(|e| CliError::invariant(format!("{path}.E: {e}")))?;
    Ok(coeffs)
}

fn parse_fermi_block(v: &Value, tol: f64) -> CliResult<FermiSLH> {
    let triple = parse_slh_block(v, "fermi", tol)?;
    let eta = sized_matrix(field(v, "eta", "fermi")?, "fermi.eta", triple.dim())?;
    let context =
        ParityContext::new(eta, tol).map_err(|e| CliError::invariant(format!("fermi.eta: {e}")))?;
    FermiSLH::new(triple, context).map_err(CliError::from)
}

fn port(v: &Value, path: &str, expect_dir: Option<&str>) -> CliResult<Port> {
    let triplet = v
        .as_array()
        .ok_or_else(|| CliError::shape(format!("{path}: expected a port triple or pair")))?;
    match (triplet.len(), expect_dir) {
        (3, Some(dir)) => {
            let name = triplet[0]
                .as_str()
                .ok_or_else(|| CliError::shape(format!("{path}[0]: expected a component name")))?;
            let got_dir = triplet[1]
                .as_str()
                .ok_or_else(|| CliError::shape(format!("{path}[1]: expected \"in\" or \"out\"")))?;
            if got_dir != dir {
                return Err(CliError::shape(format!(
                    "{path}[1]: expected \"{dir}\", got \"{got_dir}\""
                )));
            }
            let idx = triplet[2]
                .as_u64()
                .ok_or_else(|| CliError::shape(format!("{path}[2]: expected a port index")))?;
            Ok(Port::new(name, idx as usize))
        }
        (2, None) => {
            let name = triplet[0]
                .as_str()
                .ok_or_else(|| CliError::shape(format!("{path}[0]: expected a component name")))?;
            let idx = triplet[1]
                .as_u64()
                .ok_or_else(|| CliError::shape(format!("{path}[1]: expected a port index")))?;
            Ok(Port::new(name, idx as usize))
        }
        _ => Err(CliError::shape(format!(
            "{path}: expected {} entries",
            if expect_dir.is_some() { 3 } else { 2 }
        ))),
    }
}

fn parse_network_block(v: &Value, tol: f64) -> CliResult<NetworkSpec> {
    let path = "network";
    let comp_list = field(v, "components", path)?
        .as_array()
        .ok_or_else(|| CliError::shape("network.components: expected an array".to_string()))?;
    let mut components = Vec::with_capacity(comp_list.len());
    for (i, comp) in comp_list.iter().enumerate() {
        let cpath = format!("network.components[{i}]");
        let name = field(comp, "name", &cpath)?
            .as_str()
            .ok_or_else(|| CliError::shape(format!("{cpath}.name: expected a string")))?
            .to_string();
        let triple = parse_slh_block(comp, &cpath, tol)?;
        components.push((name, triple));
    }

    let edge_list = field(v, "edges", path)?
        .as_array()
        .ok_or_else(|| CliError::shape("network.edges: expected an array".to_string()))?;
    let mut edges = Vec::with_capacity(edge_list.len());
    for (i, edge) in edge_list.iter().enumerate() {
        let epath = format!("network.edges[{i}]");
        let pair = edge
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| CliError::shape(format!("{epath}: expected [source, target]")))?;
        edges.push(Edge {
            from: port(&pair[0], &format!("{epath}[0]"), Some("out"))?,
            to: port(&pair[1], &format!("{epath}[1]"), Some("in"))?,
        });
    }

    let external = |key: &str| -> CliResult<Option<Vec<Port>>> {
        match v.get(key) {
            None => Ok(None),
            Some(list) => {
                let items = list
                    .as_array()
                    .ok_or_else(|| CliError::shape(format!("network.{key}: expected an array")))?;
                let mut out = Vec::with_capacity(items.len());
                for (i, item) in items.iter().enumerate() {
                    out.push(port(item, &format!("network.{key}[{i}]"), None)?);
                }
                Ok(Some(out))
            }
        }
    };

    let spec = match (external("external_inputs")?, external("external_outputs")?) {
        (None, None) => NetworkSpec::with_default_external(components, edges),
        (inputs, outputs) => {
            // fill either missing list with the canonical default
            let defaults = NetworkSpec::with_default_external(components.clone(), edges.clone())
                .map_err(CliError::from)?;
            NetworkSpec::new(
                components,
                edges,
                inputs.unwrap_or_else(|| defaults.external_inputs().to_vec()),
                outputs.unwrap_or_else(|| defaults.external_outputs().to_vec()),
            )
        }
    };
    spec.map_err(CliError::from)
}

fn parse_linear_passive_block(v: &Value, tol: f64) -> CliResult<LinearPassive> {
    let path = "linear_passive";
    let n = count(v, "n", path)?;
    let modes = count(v, "modes", path)?;
    let scattering = rect_matrix(field(v, "S", path)?, "linear_passive.S")?;
    if scattering.rows() != n || scattering.cols() != n {
        return Err(CliError::shape(format!(
            "linear_passive.S: expected {n}×{n}, got {}×{}",
            scattering.rows(),
            scattering.cols()
        )));
    }
    let (coupling, mode_h) = if modes == 0 {
        (CMatrix::zeros(n, 0), CMatrix::zeros(0, 0))
    } else {
        let coupling = rect_matrix(field(v, "C", path)?, "linear_passive.C")?;
        if coupling.rows() != n || coupling.cols() != modes {
            return Err(CliError::shape(format!(
                "linear_passive.C: expected {n}×{modes}, got {}×{}",
                coupling.rows(),
                coupling.cols()
            )));
        }
        let mode_h = rect_matrix(field(v, "Omega", path)?, "linear_passive.Omega")?;
        if mode_h.rows() != modes || mode_h.cols() != modes {
            return Err(CliError::shape(format!(
                "linear_passive.Omega: expected {modes}×{modes}, got {}×{}",
                mode_h.rows(),
                mode_h.cols()
            )));
        }
        (coupling, mode_h)
    };
    LinearPassive::new(scattering, coupling, mode_h, tol)
        .map_err(|e| CliError::invariant(format!("{path}: {e}")))
}

// ---------------------------------------------------------------- emission

/// JSON number with negative zero normalized away (for byte-determinism
/// across algebraically equivalent code paths).
fn num(x: f64) -> Value {
    let x = if x == 0.0 { 0.0 } else { x };
    Value::Number(serde_json::Number::from_f64(x).expect("finite model entries"))
}

fn complex_json(z: C64) -> Value {
    Value::Array(vec![num(z.re), num(z.im)])
}

pub fn matrix_json(op: &Operator) -> Value {
    let d = op.dim();
    Value::Array(
        (0..d)
            .map(|i| Value::Array((0..d).map(|j| complex_json(op.get(i, j))).collect()))
            .collect(),
    )
}

pub fn slh_to_json(triple: &SLHTriple) -> Value {
    let n = triple.channels();
    let s = Value::Array(
        (0..n)
            .map(|i| Value::Array((0..n).map(|j| matrix_json(triple.s(i, j))).collect()))
            .collect(),
    );
    let l = Value::Array((0..n).map(|i| matrix_json(triple.l(i))).collect());
    json!({
        "version": 1,
        "slh": {
            "n": n,
            "dim": triple.dim(),
            "S": s,
            "L": l,
            "H": matrix_json(triple.h()),
        }
    })
}

pub fn stratonovich_to_json(coeffs: &StratonovichCoefficients) -> Value {
    let n = coeffs.channels();
    let e = Value::Array(
        (0..n)
            .map(|i| {
                Value::Array(
                    (0..n)
                        .map(|j| matrix_json(coeffs.quadratic(i, j)))
                        .collect(),
                )
            })
            .collect(),
    );
    let evec = Value::Array((0..n).map(|i| matrix_json(coeffs.linear(i))).collect());
    json!({
        "version": 1,
        "stratonovich": {
            "n": n,
            "dim": coeffs.dim(),
            "E": e,
            "Evec": evec,
            "E00": matrix_json(coeffs.constant()),
        }
    })
}

pub fn render_json(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable value");
    text.push('\n');
    text
}

/// Observables file: an ordered JSON array of `[name, matrix]` pairs.
pub fn parse_observables(path: &str) -> CliResult<Vec<(String, Operator)>> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::io(format!("cannot read {path}: {e}")))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::parse(format!("line {} column {}: {}", e.line(), e.column(), e)))?;
    let list = value.as_array().ok_or_else(|| {
        CliError::shape("observables: expected an array of [name, matrix] pairs".to_string())
    })?;
    let mut out = Vec::with_capacity(list.len());
    for (i, item) in list.iter().enumerate() {
        let pair = item
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| CliError::shape(format!("observables[{i}]: expected [name, matrix]")))?;
        let name = pair[0]
            .as_str()
            .ok_or_else(|| CliError::shape(format!("observables[{i}][0]: expected a name")))?;
        let op = square_matrix(&pair[1], &format!("observables[{i}][1]"))?;
        out.push((name.to_string(), op));
    }
    Ok(out)
}
