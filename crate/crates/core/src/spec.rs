//! System-spec files: a structure block, a model block and options, as JSON.
//!
//! ```json
//! {
//!   "structure": {"formula": "x1*x4 | x2*x5 | x1*x3*x5 | x2*x3*x4", "n": 5},
//!   "model": {"model": "order_distribution", "probs": {"12345": "1/2", "54321": "1/2"}},
//!   "options": {"method": "exact", "tol": 1e-10, "samples": 100000, "seed": 0}
//! }
//! ```
//!
//! Structures may also be given as `{"truth_table_hex": "...", "n": N}` or
//! `{"standard": "k_out_of_n", "k": 2, "n": 3}`. Probabilities may be JSON
//! numbers or rational strings and are parsed exactly.

use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::lifetimes::{
    parse_permutation_key, EvalOptions, IndependentMarginals, JointLifetimeModel, MarginalDistribution,
    Method, OrderDistribution,
};
use crate::scalar::parse_rational;
use crate::structure::{StandardKind, StructureFunction};

#[derive(Debug, Clone, PartialEq)]
pub enum StructureSpec {
    Formula { formula: String, n: usize },
    TruthTable { hex: String, n: usize },
    Standard { kind: StandardKind, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MarginalSpec {
    Exponential { rate: f64 },
    Weibull { lambda: f64, alpha: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Exchangeable,
    Weibull { lambda: Vec<f64>, alpha: f64 },
    /// Permutation keys and probability texts as written.
    OrderDistribution { probs: Vec<(String, String)> },
    Independent { marginals: Vec<MarginalSpec> },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpecOptions {
    pub method: Option<Method>,
    pub tol: Option<f64>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub structure: StructureSpec,
    pub model: ModelSpec,
    pub options: SpecOptions,
}

fn spec_error(field: &str, message: impl Into<String>) -> Error {
    Error::Spec {
        field: field.to_string(),
        message: message.into(),
    }
}

struct Obj<'a> {
    path: &'a str,
    map: &'a Map<String, Value>,
}

impl<'a> Obj<'a> {
    fn new(path: &'a str, value: &'a Value) -> Result<Self> {
        match value {
            Value::Object(map) => Ok(Obj { path, map }),
            _ => Err(spec_error(path, "expected an object")),
        }
    }

    fn field(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn allow_only(&self, keys: &[&str]) -> Result<()> {
        match self.map.keys().find(|k| !keys.contains(&k.as_str())) {
            Some(k) => Err(spec_error(&self.field(k), "unknown field")),
            None => Ok(()),
        }
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.map.get(key)
    }

    fn require(&self, key: &str) -> Result<&'a Value> {
        self.get(key).ok_or_else(|| spec_error(&self.field(key), "missing field"))
    }

    fn str(&self, key: &str) -> Result<&'a str> {
        self.require(key)?
            .as_str()
            .ok_or_else(|| spec_error(&self.field(key), "expected a string"))
    }

    fn f64_at(&self, key: &str, value: &Value) -> Result<f64> {
        value
            .as_f64()
            .ok_or_else(|| spec_error(&self.field(key), "expected a number"))
    }

    fn f64(&self, key: &str) -> Result<f64> {
        self.f64_at(key, self.require(key)?)
    }

    fn opt_u64(&self, key: &str) -> Result<Option<u64>> {
        self.get(key)
            .map(|v| {
                v.as_u64()
                    .ok_or_else(|| spec_error(&self.field(key), "expected a nonnegative integer"))
            })
            .transpose()
    }

    fn usize(&self, key: &str) -> Result<usize> {
        self.opt_u64(key)?
            .map(|v| v as usize)
            .ok_or_else(|| spec_error(&self.field(key), "missing field"))
    }
}

fn standard_name(kind: StandardKind) -> &'static str {
    match kind {
        StandardKind::Series => "series",
        StandardKind::Parallel => "parallel",
        StandardKind::KOutOfN(_) => "k_out_of_n",
        StandardKind::Bridge => "bridge",
    }
}

fn parse_structure(value: &Value) -> Result<StructureSpec> {
    let o = Obj::new("structure", value)?;
    let n = o.usize("n")?;
    if o.get("formula").is_some() {
        o.allow_only(&["formula", "n"])?;
        Ok(StructureSpec::Formula {
            formula: o.str("formula")?.to_string(),
            n,
        })
    } else if o.get("truth_table_hex").is_some() {
        o.allow_only(&["truth_table_hex", "n"])?;
        Ok(StructureSpec::TruthTable {
            hex: o.str("truth_table_hex")?.to_string(),
            n,
        })
    } else if o.get("standard").is_some() {
        o.allow_only(&["standard", "k", "n"])?;
        let name = o.str("standard")?;
        let kind = if name == "k_out_of_n" {
            StandardKind::KOutOfN(o.usize("k")?)
        } else {
            name.parse()
                .map_err(|e: Error| spec_error(&o.field("standard"), e.to_string()))?
        };
        Ok(StructureSpec::Standard { kind, n })
    } else {
        Err(spec_error(
            "structure",
            "expected one of `formula`, `truth_table_hex` or `standard`",
        ))
    }
}

fn probability_text(field: &str, value: &Value) -> Result<String> {
    let text = match value {
        Value::String(s) => s.clone(),
        Value::Number(num) => num.to_string(),
        _ => return Err(spec_error(field, "expected a number or rational string")),
    };
    parse_rational(&text).map_err(|e| spec_error(field, e.to_string()))?;
    Ok(text)
}

fn parse_marginal(path: &str, value: &Value) -> Result<MarginalSpec> {
    let o = Obj::new(path, value)?;
    match o.str("dist")? {
        "exponential" => {
            o.allow_only(&["dist", "rate"])?;
            Ok(MarginalSpec::Exponential { rate: o.f64("rate")? })
        }
        "weibull" => {
            o.allow_only(&["dist", "lambda", "alpha"])?;
            Ok(MarginalSpec::Weibull {
                lambda: o.f64("lambda")?,
                alpha: o.f64("alpha")?,
            })
        }
        other => Err(spec_error(&o.field("dist"), format!("unknown distribution `{other}`"))),
    }
}

fn parse_model(value: &Value) -> Result<ModelSpec> {
    let o = Obj::new("model", value)?;
    match o.str("model")? {
        "exchangeable" => {
            o.allow_only(&["model"])?;
            Ok(ModelSpec::Exchangeable)
        }
        "weibull" => {
            o.allow_only(&["model", "lambda", "alpha"])?;
            let lambda = o
                .require("lambda")?
                .as_array()
                .ok_or_else(|| spec_error(&o.field("lambda"), "expected an array"))?
                .iter()
                .enumerate()
                .map(|(i, v)| o.f64_at(&format!("lambda[{i}]"), v))
                .collect::<Result<_>>()?;
            Ok(ModelSpec::Weibull {
                lambda,
                alpha: o.f64("alpha")?,
            })
        }
        "order_distribution" => {
            o.allow_only(&["model", "probs"])?;
            let probs = Obj::new("model.probs", o.require("probs")?)?;
            let entries = probs
                .map
                .iter()
                .map(|(k, v)| Ok((k.clone(), probability_text(&probs.field(k), v)?)))
                .collect::<Result<_>>()?;
            Ok(ModelSpec::OrderDistribution { probs: entries })
        }
        "independent" => {
            o.allow_only(&["model", "marginals"])?;
            let marginals = o
                .require("marginals")?
                .as_array()
                .ok_or_else(|| spec_error(&o.field("marginals"), "expected an array"))?
                .iter()
                .enumerate()
                .map(|(i, v)| parse_marginal(&format!("model.marginals[{i}]"), v))
                .collect::<Result<_>>()?;
            Ok(ModelSpec::Independent { marginals })
        }
        other => Err(spec_error(&o.field("model"), format!("unknown model `{other}`"))),
    }
}

/// Builds a model from a standalone model block such as
/// `{"model": "weibull", "lambda": [1, 2], "alpha": 1.5}`.
pub fn model_from_json(text: &str, n: usize) -> Result<JointLifetimeModel> {
    let value: Value = serde_json::from_str(text).map_err(|e| {
        spec_error(
            "<document>",
            format!("invalid JSON at line {} column {}: {e}", e.line(), e.column()),
        )
    })?;
    let spec = SystemSpec {
        structure: StructureSpec::Standard {
            kind: StandardKind::Series,
            n,
        },
        model: parse_model(&value)?,
        options: SpecOptions::default(),
    };
    spec.check_component_counts()?;
    spec.build_model()
}

fn parse_options(value: Option<&Value>) -> Result<SpecOptions> {
    let Some(value) = value else {
        return Ok(SpecOptions::default());
    };
    let o = Obj::new("options", value)?;
    o.allow_only(&["method", "tol", "samples", "seed"])?;
    let method = o
        .get("method")
        .map(|_| {
            o.str("method")?
                .parse::<Method>()
                .map_err(|e| spec_error(&o.field("method"), e.to_string()))
        })
        .transpose()?;
    let tol = o.get("tol").map(|v| o.f64_at("tol", v)).transpose()?;
    Ok(SpecOptions {
        method,
        tol,
        samples: o.opt_u64("samples")?,
        seed: o.opt_u64("seed")?,
    })
}

impl SystemSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| {
            spec_error(
                "<document>",
                format!("invalid JSON at line {} column {}: {e}", e.line(), e.column()),
            )
        })?;
        let o = Obj::new("", &value)?;
        o.allow_only(&["structure", "model", "options"])?;
        let spec = SystemSpec {
            structure: parse_structure(o.require("structure")?)?,
            model: parse_model(o.require("model")?)?,
            options: parse_options(o.get("options"))?,
        };
        spec.check_component_counts()?;
        Ok(spec)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| spec_error("<document>", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn n(&self) -> usize {
        match self.structure {
            StructureSpec::Formula { n, .. }
            | StructureSpec::TruthTable { n, .. }
            | StructureSpec::Standard { n, .. } => n,
        }
    }

    fn check_component_counts(&self) -> Result<()> {
        let n = self.n();
        let (field, model_n) = match &self.model {
            ModelSpec::Exchangeable => return Ok(()),
            ModelSpec::Weibull { lambda, .. } => ("model.lambda", lambda.len()),
            ModelSpec::Independent { marginals } => ("model.marginals", marginals.len()),
            ModelSpec::OrderDistribution { probs } => {
                for (key, _) in probs {
                    let field = format!("model.probs.{key}");
                    let perm = parse_permutation_key(key).map_err(|e| spec_error(&field, e.to_string()))?;
                    if perm.len() != n {
                        return Err(spec_error(
                            &field,
                            format!("ordering has {} components, structure has {n}", perm.len()),
                        ));
                    }
                }
                return Ok(());
            }
        };
        if model_n != n {
            return Err(spec_error(
                field,
                format!("{model_n} components given, structure has {n}"),
            ));
        }
        Ok(())
    }

    pub fn build_structure(&self) -> Result<StructureFunction> {
        match &self.structure {
            StructureSpec::Formula { formula, n } => StructureFunction::parse_formula(formula, *n),
            StructureSpec::TruthTable { hex, n } => StructureFunction::from_hex(*n, hex),
            StructureSpec::Standard { kind, n } => StructureFunction::make_standard(*kind, *n),
        }
    }

    pub fn build_model(&self) -> Result<JointLifetimeModel> {
        let n = self.n();
        match &self.model {
            ModelSpec::Exchangeable => JointLifetimeModel::exchangeable(n),
            ModelSpec::Weibull { lambda, alpha } => JointLifetimeModel::weibull(lambda.clone(), *alpha),
            ModelSpec::OrderDistribution { probs } => {
                let entries = probs
                    .iter()
                    .map(|(k, p)| Ok((parse_permutation_key(k)?, parse_rational(p)?)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(JointLifetimeModel::OrderDistribution(OrderDistribution::new(n, entries)?))
            }
            ModelSpec::Independent { marginals } => {
                let marginals = marginals
                    .iter()
                    .map(|m| match *m {
                        MarginalSpec::Exponential { rate } => MarginalDistribution::Exponential { rate },
                        MarginalSpec::Weibull { lambda, alpha } => MarginalDistribution::Weibull { lambda, alpha },
                    })
                    .collect();
                Ok(JointLifetimeModel::IndependentMarginals(IndependentMarginals::new(marginals)?))
            }
        }
    }

    /// Options from the file with defaults filled in.
    pub fn eval_options(&self) -> EvalOptions {
        let defaults = EvalOptions::default();
        EvalOptions {
            method: self.options.method.unwrap_or(defaults.method),
            tol: self.options.tol.unwrap_or(defaults.tol),
            samples: self.options.samples.unwrap_or(defaults.samples),
            seed: self.options.seed.unwrap_or(defaults.seed),
            ..defaults
        }
    }

    pub fn to_value(&self) -> Value {
        let structure = match &self.structure {
            StructureSpec::Formula { formula, n } => json!({"formula": formula, "n": n}),
            StructureSpec::TruthTable { hex, n } => json!({"truth_table_hex": hex, "n": n}),
            StructureSpec::Standard { kind, n } => match kind {
                StandardKind::KOutOfN(k) => json!({"standard": "k_out_of_n", "k": k, "n": n}),
                other => json!({"standard": standard_name(*other), "n": n}),
            },
        };
        let model = match &self.model {
            ModelSpec::Exchangeable => json!({"model": "exchangeable"}),
            ModelSpec::Weibull { lambda, alpha } => json!({"model": "weibull", "lambda": lambda, "alpha": alpha}),
            ModelSpec::OrderDistribution { probs } => {
                let probs: Map<String, Value> = probs
                    .iter()
                    .map(|(k, p)| (k.clone(), Value::String(p.clone())))
                    .collect();
                json!({"model": "order_distribution", "probs": probs})
            }
            ModelSpec::Independent { marginals } => {
                let marginals: Vec<Value> = marginals
                    .iter()
                    .map(|m| match *m {
                        MarginalSpec::Exponential { rate } => json!({"dist": "exponential", "rate": rate}),
                        MarginalSpec::Weibull { lambda, alpha } => {
                            json!({"dist": "weibull", "lambda": lambda, "alpha": alpha})
                        }
                    })
                    .collect();
                json!({"model": "independent", "marginals": marginals})
            }
        };
        let mut options = Map::new();
        if let Some(m) = self.options.method {
            options.insert("method".into(), Value::String(m.as_str().into()));
        }
        if let Some(t) = self.options.tol {
            options.insert("tol".into(), json!(t));
        }
        if let Some(s) = self.options.samples {
            options.insert("samples".into(), json!(s));
        }
        if let Some(s) = self.options.seed {
            options.insert("seed".into(), json!(s));
        }
        let mut root = Map::new();
        root.insert("structure".into(), structure);
        root.insert("model".into(), model);
        if !options.is_empty() {
            root.insert("options".into(), Value::Object(options));
        }
        Value::Object(root)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("spec values serialize")
    }
}
