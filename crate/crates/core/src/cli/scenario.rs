//! Scenario files: the model plus named maps, symbols and densities, weight
//! triples, sampling parameters and tolerance overrides.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diffeo::{corpus, Diffeo, DiffeoSpec};
use crate::error::{FinjetError, Result};
use crate::fields::{DensityField, ScalarField, SymbolField, SymbolSpec};
use crate::finsler::{FinslerModel, ModelSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub model: ModelSpec,
    #[serde(default)]
    pub diffeos: BTreeMap<String, DiffeoEntry>,
    #[serde(default)]
    pub symbols: BTreeMap<String, SymbolSpec>,
    #[serde(default)]
    pub densities: BTreeMap<String, DensitySpec>,
    #[serde(default)]
    pub weights: Vec<WeightTriple>,
    #[serde(default)]
    pub samples: SampleSpec,
    /// Suite name to tolerance.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub params: SuiteParams,
}

/// A map given by expressions, by a corpus generator, or as a composition of
/// other named maps (applied right to left).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DiffeoEntry {
    Corpus(CorpusSpec),
    Compose { compose: Vec<String> },
    Explicit(DiffeoSpec),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    /// identity, translation, rotation, dilation, inversion, inversion_about, cubic
    pub corpus: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plane: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    pub expr: String,
    #[serde(default)]
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightTriple {
    pub lambda: f64,
    pub mu: f64,
    /// Defaults to `mu - lambda`; anything else is rejected.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Expected descent verdict, `descends` or `obstructed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<String>,
}

impl WeightTriple {
    pub fn delta(&self) -> f64 {
        self.delta.unwrap_or(self.mu - self.lambda)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_count")]
    pub count: usize,
    /// Per-coordinate range of `x`; `[-0.5, 0.5]` in every coordinate if empty.
    #[serde(default, rename = "box")]
    pub bounds: Vec<[f64; 2]>,
    #[serde(default = "default_shell")]
    pub y_shell: [f64; 2],
}

fn default_count() -> usize {
    8
}

fn default_shell() -> [f64; 2] {
    [0.5, 2.0]
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec { seed: 0, count: default_count(), bounds: Vec::new(), y_shell: default_shell() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteParams {
    /// `(f, h)` pairs for the cocycle suite. Defaults to the first two maps.
    #[serde(default)]
    pub cocycle_pairs: Vec<[String; 2]>,
    /// ψ for the rescaling suite.
    #[serde(default = "default_psi")]
    pub rescale_psi: String,
    /// Map used by the rescaling suite; the first map if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rescaling_map: Option<String>,
    /// σ for the quantization-rescaling suite.
    #[serde(default = "default_sigma")]
    pub conformal_sigma: String,
    /// Fiber directions per base point in the descent suite.
    #[serde(default = "default_fibers")]
    pub fiber_samples: usize,
}

fn default_psi() -> String {
    "exp(sin(x1))".into()
}

fn default_sigma() -> String {
    "0.3*sin(x1)".into()
}

fn default_fibers() -> usize {
    4
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams {
            cocycle_pairs: Vec::new(),
            rescale_psi: default_psi(),
            rescaling_map: None,
            conformal_sigma: default_sigma(),
            fiber_samples: default_fibers(),
        }
    }
}

/// A scenario with every name resolved.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub scenario: Scenario,
    pub digest: String,
    pub model: Arc<FinslerModel>,
    pub diffeos: BTreeMap<String, Arc<Diffeo>>,
    pub symbols: BTreeMap<String, SymbolField>,
    pub densities: BTreeMap<String, DensityField>,
    pub bounds: Vec<[f64; 2]>,
}

impl Loaded {
    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn diffeo(&self, name: &str) -> Result<&Arc<Diffeo>> {
        self.diffeos.get(name).ok_or_else(|| FinjetError::Config(format!("unknown map `{name}`")))
    }

    pub fn psi(&self) -> Result<ScalarField> {
        ScalarField::parse(&self.scenario.params.rescale_psi, self.dim(), false)
    }

    pub fn sigma(&self) -> Result<ScalarField> {
        ScalarField::parse(&self.scenario.params.conformal_sigma, self.dim(), false)
    }
}

fn config<E: std::fmt::Display>(e: E) -> FinjetError {
    FinjetError::Config(e.to_string())
}

/// sha256 of the canonical JSON text (keys sorted, no whitespace).
pub fn digest_of(value: &serde_json::Value) -> String {
    let canonical = serde_json::to_string(value).expect("json values always serialize");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

pub fn load_str(text: &str) -> Result<Loaded> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(config)?;
    let digest = digest_of(&value);
    let scenario: Scenario = serde_json::from_value(value).map_err(config)?;
    resolve(scenario, digest)
}

pub fn load_path(path: &std::path::Path) -> Result<Loaded> {
    let text = std::fs::read_to_string(path).map_err(|e| FinjetError::Config(format!("{}: {e}", path.display())))?;
    load_str(&text)
}

fn corpus_map(n: usize, spec: &CorpusSpec) -> Result<Arc<Diffeo>> {
    let need = |what: &str| FinjetError::Config(format!("corpus map `{}` needs `{what}`", spec.corpus));
    let point = |c: &Option<Vec<f64>>| -> Result<Vec<f64>> {
        let c = c.clone().ok_or_else(|| need("c"))?;
        if c.len() != n {
            return Err(FinjetError::Dimension(format!("`c` needs {n} entries")));
        }
        Ok(c)
    };
    Ok(match spec.corpus.as_str() {
        "identity" => Arc::new(Diffeo::identity(n)),
        "translation" => corpus::translation(&point(&spec.c)?),
        "rotation" => {
            let [p, q] = spec.plane.unwrap_or([1, 2]);
            if p == 0 || q == 0 || p > n || q > n || p == q {
                return Err(FinjetError::Config(format!("rotation plane {p}, {q} invalid in dimension {n}")));
            }
            corpus::rotation(n, p - 1, q - 1, spec.angle.ok_or_else(|| need("angle"))?)
        }
        "dilation" => {
            let f = spec.factor.ok_or_else(|| need("factor"))?;
            if f == 0.0 {
                return Err(FinjetError::Config("dilation factor must be nonzero".into()));
            }
            corpus::dilation(n, f)
        }
        "inversion" => corpus::inversion(n),
        "inversion_about" => corpus::inversion_about(&point(&spec.c)?),
        "cubic" => {
            let eps = spec.eps.ok_or_else(|| need("eps"))?;
            if eps.abs() > 0.05 {
                return Err(FinjetError::Config(format!("cubic eps {eps} exceeds 0.05")));
            }
            corpus::cubic_perturbation(n, eps, spec.seed.unwrap_or(0))
        }
        other => return Err(FinjetError::Config(format!("unknown corpus map `{other}`"))),
    })
}

fn resolve_map(
    name: &str,
    entries: &BTreeMap<String, DiffeoEntry>,
    n: usize,
    done: &mut BTreeMap<String, Arc<Diffeo>>,
    stack: &mut Vec<String>,
) -> Result<Arc<Diffeo>> {
    if let Some(d) = done.get(name) {
        return Ok(d.clone());
    }
    if stack.iter().any(|s| s == name) {
        return Err(FinjetError::Config(format!("map `{name}` is defined in terms of itself")));
    }
    let entry = entries.get(name).ok_or_else(|| FinjetError::Config(format!("unknown map `{name}`")))?;
    stack.push(name.to_string());
    let map = match entry {
        DiffeoEntry::Corpus(spec) => corpus_map(n, spec)?,
        DiffeoEntry::Explicit(spec) => {
            let d = Diffeo::from_spec(spec)?;
            if d.dim() != n {
                return Err(FinjetError::Dimension(format!("map `{name}` has dimension {}, model {n}", d.dim())));
            }
            Arc::new(d)
        }
        DiffeoEntry::Compose { compose } => {
            let mut parts = compose.iter().rev();
            let first = parts.next().ok_or_else(|| FinjetError::Config(format!("map `{name}` composes nothing")))?;
            let mut acc = resolve_map(first, entries, n, done, stack)?;
            for outer in parts {
                let o = resolve_map(outer, entries, n, done, stack)?;
                acc = Arc::new(o.compose(&acc));
            }
            acc
        }
    };
    stack.pop();
    done.insert(name.to_string(), map.clone());
    Ok(map)
}

fn resolve(scenario: Scenario, digest: String) -> Result<Loaded> {
    let model = Arc::new(FinslerModel::from_spec(&scenario.model)?);
    let n = model.dim();
    let mut diffeos = BTreeMap::new();
    for name in scenario.diffeos.keys() {
        resolve_map(name, &scenario.diffeos, n, &mut diffeos, &mut Vec::new())?;
    }
    let symbols = scenario
        .symbols
        .iter()
        .map(|(k, s)| Ok((k.clone(), SymbolField::from_spec(n, s)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    let densities = scenario
        .densities
        .iter()
        .map(|(k, d)| Ok((k.clone(), DensityField::parse(n, &d.expr, d.weight)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    for w in &scenario.weights {
        if (w.delta() - (w.mu - w.lambda)).abs() > 1e-12 {
            return Err(FinjetError::Config(format!("weight triple has delta {} but mu - lambda = {}", w.delta(), w.mu - w.lambda)));
        }
        if let Some(e) = &w.expect {
            if e != "descends" && e != "obstructed" {
                return Err(FinjetError::Config(format!("unknown descent expectation `{e}`")));
            }
        }
    }
    for pair in &scenario.params.cocycle_pairs {
        for name in pair {
            if !diffeos.contains_key(name) {
                return Err(FinjetError::Config(format!("cocycle pair names unknown map `{name}`")));
            }
        }
    }
    if let Some(m) = &scenario.params.rescaling_map {
        if !diffeos.contains_key(m) {
            return Err(FinjetError::Config(format!("rescaling map `{m}` is not defined")));
        }
    }
    let bounds = if scenario.samples.bounds.is_empty() {
        vec![[-0.5, 0.5]; n]
    } else if scenario.samples.bounds.len() != n {
        return Err(FinjetError::Dimension(format!("sample box has {} ranges, model dimension {n}", scenario.samples.bounds.len())));
    } else {
        scenario.samples.bounds.clone()
    };
    if bounds.iter().any(|b| !(b[0] <= b[1])) {
        return Err(FinjetError::Config("sample box ranges must be ordered".into()));
    }
    for (name, expr) in [("rescale_psi", &scenario.params.rescale_psi), ("conformal_sigma", &scenario.params.conformal_sigma)] {
        ScalarField::parse(expr, n, false).map_err(|e| FinjetError::Config(format!("{name}: {e}")))?;
    }
    Ok(Loaded { scenario, digest, model, diffeos, symbols, densities, bounds })
}

#[cfg(test)]
mod tests {
    use super::*;

    const RANDERS: &str = r#"{
        "model": {"kind": "randers", "dim": 2, "metric": [["1","0"],["0","1"]], "oneform": ["0.5","0"]},
        "diffeos": {
            "f": {"corpus": "cubic", "eps": 0.04, "seed": 3},
            "t": {"corpus": "translation", "c": [0.1, 0.0]},
            "ft": {"compose": ["f", "t"]},
            "shear": {"forward": ["x1 + 0.1*x2^2", "x2"], "inverse": ["x1 - 0.1*x2^2", "x2"]}
        },
        "symbols": {"p": {"components": [["1","0"],["0","2"]], "weight": 0.3}},
        "weights": [{"lambda": 0, "mu": 1}]
    }"#;

    #[test]
    fn names_resolve() {
        let l = load_str(RANDERS).unwrap();
        assert_eq!(l.diffeos.len(), 4);
        let ft = l.diffeo("ft").unwrap().apply(&[0.2, 0.3]).unwrap();
        let f = l.diffeo("f").unwrap().apply(&[0.3, 0.3]).unwrap();
        assert!(ft.iter().zip(&f).all(|(a, b)| (a - b).abs() < 1e-15));
        assert_eq!(l.bounds, vec![[-0.5, 0.5]; 2]);
        assert_eq!(l.scenario.weights[0].delta(), 1.0);
    }

    #[test]
    fn digest_ignores_key_order_and_whitespace() {
        let a = load_str(r#"{"model": {"kind": "riemannian", "dim": 1, "metric": [["1"]]}, "samples": {"seed": 1}}"#).unwrap();
        let b = load_str(r#"{"samples":{"seed":1},"model":{"metric":[["1"]],"dim":1,"kind":"riemannian"}}"#).unwrap();
        assert_eq!(a.digest, b.digest);
        assert_eq!(a.digest.len(), 64);
    }

    #[test]
    fn bad_references_are_config_errors() {
        let base = r#"{"model": {"kind": "riemannian", "dim": 2, "metric": [["1","0"],["0","1"]]}"#;
        for extra in [
            r#", "diffeos": {"a": {"compose": ["b"]}}}"#,
            r#", "diffeos": {"a": {"compose": ["a"]}}}"#,
            r#", "params": {"cocycle_pairs": [["a", "b"]]}}"#,
            r#", "weights": [{"lambda": 0, "mu": 1, "delta": 0.5}]}"#,
            r#", "diffeos": {"a": {"corpus": "cubic", "eps": 0.5}}}"#,
            r#", "bogus": 1}"#,
        ] {
            let err = load_str(&format!("{base}{extra}")).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{extra}: {err}");
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let text = r#"{"model": {"kind": "riemannian", "dim": 2, "metric": [["1","0"],["0","1"]]},
                       "symbols": {"p": {"components": [["1"]]}}}"#;
        assert!(load_str(text).is_err());
        let text = r#"{"model": {"kind": "riemannian", "dim": 2, "metric": [["1","0"],["0","1"]]},
                       "diffeos": {"a": {"forward": ["x1"]}}}"#;
        assert!(matches!(load_str(text), Err(FinjetError::Dimension(_)) | Err(FinjetError::VariableOutOfRange { .. })));
    }
}
