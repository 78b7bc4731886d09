//! One-shot analysis of a system and its JSON / text rendering.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;
use crate::indices::{self, IndexValues, IndexVector};
use crate::lifetimes::{ordering_probabilities, EvalOptions, JointLifetimeModel, Method};
use crate::structure::StructureFunction;

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub n: usize,
    pub bp: IndexVector,
    pub b: IndexVector,
    pub p: IndexVector,
    pub s: IndexVector,
    pub tail: IndexVector,
    pub symmetry_bp: f64,
    pub symmetry_p: f64,
    pub method: Method,
    pub exact: bool,
}

/// Computes every index from a single set of ordering tables and validates
/// each vector.
pub fn analyze(phi: &StructureFunction, model: &JointLifetimeModel, opts: &EvalOptions) -> Result<Analysis> {
    if phi.n() != model.n() {
        return Err(crate::Error::ComponentMismatch {
            structure: phi.n(),
            model: model.n(),
        });
    }
    let probs = ordering_probabilities(model, opts)?;
    let bp = indices::bp_from_ordering(phi, &probs)?;
    let p = indices::signature_from_ordering(phi, &probs)?;
    let tail = indices::tail_from_ordering(phi, &probs)?;
    let b = indices::structural_b(phi);
    let s = indices::structural_signature(phi);
    for v in [&bp, &b, &p, &s, &tail] {
        v.validate()?;
    }
    Ok(Analysis {
        n: phi.n(),
        symmetry_bp: symmetry(&bp)?,
        symmetry_p: symmetry(&p)?,
        bp,
        b,
        p,
        s,
        tail,
        method: probs.method,
        exact: probs.is_exact(),
    })
}

/// A one-component system has a single possible outcome; its index is 0.
fn symmetry(v: &IndexVector) -> Result<f64> {
    if v.len() < 2 {
        Ok(0.0)
    } else {
        indices::symmetry_index(v)
    }
}

fn json_values(v: &IndexVector) -> Value {
    match &v.values {
        IndexValues::Exact(_) => Value::Array(v.render().into_iter().map(Value::String).collect()),
        IndexValues::Float(f) => Value::Array(f.iter().map(|&x| serde_json::json!(x)).collect()),
    }
}

/// Machine-readable report; key order is fixed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub bp: Value,
    pub b: Value,
    pub p: Value,
    pub s: Value,
    pub tail: Value,
    pub symmetry_bp: f64,
    pub symmetry_p: f64,
    pub exact: bool,
    pub method: String,
}

impl Analysis {
    pub fn report(&self) -> Report {
        Report {
            bp: json_values(&self.bp),
            b: json_values(&self.b),
            p: json_values(&self.p),
            s: json_values(&self.s),
            tail: json_values(&self.tail),
            symmetry_bp: self.symmetry_bp,
            symmetry_p: self.symmetry_p,
            exact: self.exact,
            method: self.method.as_str().to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.report()).expect("report serializes") + "\n"
    }

    /// Aligned text tables for humans.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "method: {}  exact: {}", self.method, self.exact);
        let rows: Vec<[String; 3]> = (0..self.n)
            .map(|j| {
                [
                    format!("{}", j + 1),
                    self.bp.render()[j].clone(),
                    self.b.render()[j].clone(),
                ]
            })
            .collect();
        write_table(&mut out, ["j", "I_BP", "b"], &rows);
        let _ = writeln!(out);
        let tail = self.tail.render();
        let rows: Vec<[String; 4]> = (0..=self.n)
            .map(|k| {
                let (p, s) = if k == 0 {
                    (String::new(), String::new())
                } else {
                    (self.p.render()[k - 1].clone(), self.s.render()[k - 1].clone())
                };
                [k.to_string(), p, s, tail[k].clone()]
            })
            .collect();
        write_table(&mut out, ["k", "p", "s", "Pr(T>X_k:n)"], &rows);
        let _ = writeln!(out);
        let _ = writeln!(out, "H(I_BP) = {:.6}", self.symmetry_bp);
        let _ = writeln!(out, "H(p)    = {:.6}", self.symmetry_p);
        out
    }
}

pub(crate) fn write_table<const C: usize>(out: &mut String, header: [&str; C], rows: &[[String; C]]) {
    let mut widths: [usize; C] = header.map(|h| h.chars().count());
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    let _ = writeln!(out, "{}", line(header.to_vec()));
    for row in rows {
        let _ = writeln!(out, "{}", line(row.iter().map(String::as_str).collect()));
    }
}
