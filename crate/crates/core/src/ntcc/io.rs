//! JSON-lines input scripts and traces.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::engine::{EngineError, UnitReport};
use crate::store::Relop;
use crate::term::{Constraint, Expr, Term, VarRef, VarType};
use crate::vars::VariableRegistry;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InputOp {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "in")]
    In,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputValue {
    Int(i64),
    Range([i64; 2]),
}

/// One environment tell, e.g. `{"var": "pitch", "op": "=", "value": 60}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputTell {
    pub var: String,
    pub op: InputOp,
    pub value: InputValue,
}

impl InputTell {
    pub fn eq(var: &str, value: i64) -> InputTell {
        InputTell {
            var: var.to_string(),
            op: InputOp::Eq,
            value: InputValue::Int(value),
        }
    }

    /// Store constraints for this tell. `in` with a range bounds an integer
    /// variable; `in` with an integer adds a member to a set variable.
    pub fn to_constraints(&self, reg: &VariableRegistry) -> Result<Vec<Constraint>, String> {
        let r = parse_var_ref(&self.var)?;
        let decl = reg
            .get(&r.name)
            .ok_or_else(|| format!("unknown variable `{}`", r.name))?;
        let is_set = matches!(decl.ty, VarType::Set { .. });
        let x = Term::Var(r.clone());
        Ok(match (self.op, self.value, is_set) {
            (InputOp::Eq, InputValue::Int(v), false) => {
                vec![Constraint::Rel(x, Relop::Eq, v.into())]
            }
            (InputOp::Ge, InputValue::Int(v), false) => {
                vec![Constraint::Rel(x, Relop::Ge, v.into())]
            }
            (InputOp::In, InputValue::Range([lo, hi]), false) => vec![
                Constraint::Rel(x.clone(), Relop::Ge, lo.into()),
                Constraint::Rel(x, Relop::Le, hi.into()),
            ],
            (InputOp::In, InputValue::Int(v), true) => vec![Constraint::In(v.into(), r)],
            _ => {
                return Err(format!(
                    "unsupported input tell {:?} {:?} on `{}`",
                    self.op, self.value, self.var
                ))
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputLine {
    pub tu: u32,
    #[serde(default)]
    pub tell: Vec<InputTell>,
}

/// Parses `name` or `name[i][j]…` with integer indices.
pub fn parse_var_ref(s: &str) -> Result<VarRef, String> {
    let bad = || format!("malformed variable name `{s}`");
    let (name, mut rest) = match s.find('[') {
        Some(i) => (&s[..i], &s[i..]),
        None => (s, ""),
    };
    if name.is_empty() {
        return Err(bad());
    }
    let mut indices = Vec::new();
    while !rest.is_empty() {
        let close = rest.find(']').ok_or_else(bad)?;
        if !rest.starts_with('[') {
            return Err(bad());
        }
        let ix: i64 = rest[1..close].trim().parse().map_err(|_| bad())?;
        indices.push(Expr::Int(ix));
        rest = &rest[close + 1..];
    }
    Ok(VarRef::indexed(name, indices))
}

/// Reads a JSON-lines input script. Blank lines are skipped; several lines
/// for one unit are merged.
pub fn parse_input_script(text: &str) -> Result<BTreeMap<u32, Vec<InputTell>>, String> {
    let mut out: BTreeMap<u32, Vec<InputTell>> = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let l: InputLine =
            serde_json::from_str(line).map_err(|e| format!("input line {}: {e}", n + 1))?;
        out.entry(l.tu).or_default().extend(l.tell);
    }
    Ok(out)
}

pub fn trace_value(r: &UnitReport) -> Value {
    let mut vars = Map::new();
    for (n, v) in &r.vars {
        vars.insert(n.clone(), serde_json::to_value(v).expect("plain data"));
    }
    json!({
        "tu": r.tu,
        "vars": vars,
        "fired_asks": r.fired_asks,
        "scheduled": r.scheduled,
        "elapsed_us": r.elapsed_us,
    })
}

/// One trace line, without the trailing newline.
pub fn trace_line(r: &UnitReport) -> String {
    trace_value(r).to_string()
}

pub fn header_line(seed: u64, units: u32) -> String {
    json!({"header": {"seed": seed, "units": units}}).to_string()
}

pub fn error_line(e: &EngineError) -> String {
    match e {
        EngineError::InconsistentUnit { tu, .. } => json!({"error": "inconsistent", "tu": tu}),
        other => json!({"error": other.to_string(), "tu": other.unit()}),
    }
    .to_string()
}
