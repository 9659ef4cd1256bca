//! Generic constrained quadratic model: binary and bounded real variables,
//! constraints of the form `expr (<=|==|>=) 0`, and a quadratic objective.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::instance::Axis;
use super::orientation::OrientationId;

/// Absolute slack allowed when evaluating constraints.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Structured identity of every variable the bin packing model uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKey {
    /// `v_j`
    BinUsed { bin: usize },
    /// `u_{i,j}`
    Assign { item: usize, bin: usize },
    /// `r_{i,k}`
    Orient {
        item: usize,
        orientation: OrientationId,
    },
    /// `b_{i,k,q}` with `first < second`
    Relative { first: usize, second: usize, q: u8 },
    /// `x_i`, `y_i`, `z_i`
    Position { axis: Axis, item: usize },
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            VarKey::BinUsed { bin } => write!(f, "v_{bin}"),
            VarKey::Assign { item, bin } => write!(f, "u_{item}_{bin}"),
            VarKey::Orient { item, orientation } => write!(f, "r_{item}_{orientation}"),
            VarKey::Relative { first, second, q } => write!(f, "b_{first}_{second}_{q}"),
            VarKey::Position { axis, item } => write!(f, "{axis}_{item}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid variable name `{0}`")]
pub struct VarNameError(pub String);

impl FromStr for VarKey {
    type Err = VarNameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || VarNameError(s.to_string());
        let mut parts = s.split('_');
        let head = parts.next().ok_or_else(bad)?;
        let nums = parts
            .map(|p| p.parse::<usize>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?;
        let key = match (head, nums.as_slice()) {
            ("v", &[bin]) => VarKey::BinUsed { bin },
            ("u", &[item, bin]) => VarKey::Assign { item, bin },
            ("r", &[item, k]) => VarKey::Orient {
                item,
                orientation: u8::try_from(k).map_err(|_| bad())?,
            },
            ("b", &[first, second, q]) => VarKey::Relative {
                first,
                second,
                q: u8::try_from(q).map_err(|_| bad())?,
            },
            ("x", &[item]) => VarKey::Position {
                axis: Axis::X,
                item,
            },
            ("y", &[item]) => VarKey::Position {
                axis: Axis::Y,
                item,
            },
            ("z", &[item]) => VarKey::Position {
                axis: Axis::Z,
                item,
            },
            _ => return Err(bad()),
        };
        Ok(key)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarKind {
    Binary,
    Real { lower: f64, upper: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub key: VarKey,
    pub kind: VarKind,
}

/// `Σ c·v + Σ c·a·b + constant`
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuadExpr {
    pub linear: Vec<(VarId, f64)>,
    pub quadratic: Vec<(VarId, VarId, f64)>,
    pub constant: f64,
}

impl QuadExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            ..Self::default()
        }
    }

    pub fn linear(&mut self, var: VarId, coeff: f64) -> &mut Self {
        self.linear.push((var, coeff));
        self
    }

    pub fn quadratic(&mut self, a: VarId, b: VarId, coeff: f64) -> &mut Self {
        self.quadratic.push((a, b, coeff));
        self
    }

    pub fn add_constant(&mut self, c: f64) -> &mut Self {
        self.constant += c;
        self
    }

    /// `self += scale * other`
    pub fn add_scaled(&mut self, other: &QuadExpr, scale: f64) -> &mut Self {
        self.linear
            .extend(other.linear.iter().map(|&(v, c)| (v, c * scale)));
        self.quadratic
            .extend(other.quadratic.iter().map(|&(a, b, c)| (a, b, c * scale)));
        self.constant += other.constant * scale;
        self
    }

    pub fn is_constant(&self) -> bool {
        self.linear.is_empty() && self.quadratic.is_empty()
    }

    pub fn evaluate(&self, values: &[f64]) -> f64 {
        let lin: f64 = self
            .linear
            .iter()
            .map(|&(v, c)| c * values[v.index()])
            .sum();
        let quad: f64 = self
            .quadratic
            .iter()
            .map(|&(a, b, c)| c * values[a.index()] * values[b.index()])
            .sum();
        lin + quad + self.constant
    }

    /// Square of an affine expression, expanded into quadratic terms.
    ///
    /// Panics if `self` already has quadratic terms.
    pub fn square(&self) -> QuadExpr {
        assert!(
            self.quadratic.is_empty(),
            "only affine expressions can be squared"
        );
        let lin = merge_linear(&self.linear);
        let mut out = QuadExpr::constant(self.constant * self.constant);
        for (k, &(a, ca)) in lin.iter().enumerate() {
            out.linear(a, 2.0 * self.constant * ca);
            out.quadratic(a, a, ca * ca);
            for &(b, cb) in &lin[k + 1..] {
                out.quadratic(a, b, 2.0 * ca * cb);
            }
        }
        out
    }

    /// Replaces fixed binaries by their values and merges duplicate terms.
    pub fn substitute(&self, fixed: &BTreeMap<VarId, bool>) -> QuadExpr {
        let val = |v: VarId| fixed.get(&v).map(|&b| if b { 1.0 } else { 0.0 });
        let mut out = QuadExpr::constant(self.constant);
        let mut linear = Vec::with_capacity(self.linear.len());
        for &(v, c) in &self.linear {
            match val(v) {
                Some(x) => out.constant += c * x,
                None => linear.push((v, c)),
            }
        }
        let mut quadratic = Vec::with_capacity(self.quadratic.len());
        for &(a, b, c) in &self.quadratic {
            match (val(a), val(b)) {
                (Some(x), Some(y)) => out.constant += c * x * y,
                (Some(x), None) => linear.push((b, c * x)),
                (None, Some(y)) => linear.push((a, c * y)),
                (None, None) => quadratic.push((a, b, c)),
            }
        }
        out.linear = merge_linear(&linear);
        out.quadratic = quadratic.into_iter().filter(|t| t.2 != 0.0).collect();
        out
    }

    pub fn variables(&self) -> impl Iterator<Item = VarId> + '_ {
        self.linear
            .iter()
            .map(|t| t.0)
            .chain(self.quadratic.iter().flat_map(|t| [t.0, t.1]))
    }
}

// Sums coefficients of repeated variables, keeping first-occurrence order.
fn merge_linear(terms: &[(VarId, f64)]) -> Vec<(VarId, f64)> {
    let mut slot: HashMap<VarId, usize> = HashMap::with_capacity(terms.len());
    let mut out: Vec<(VarId, f64)> = Vec::with_capacity(terms.len());
    for &(v, c) in terms {
        match slot.get(&v) {
            Some(&k) => out[k].1 += c,
            None => {
                slot.insert(v, out.len());
                out.push((v, c));
            }
        }
    }
    out.retain(|t| t.1 != 0.0);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl Sense {
    /// Amount by which `value sense 0` is violated (0 when satisfied).
    pub fn excess(self, value: f64) -> f64 {
        match self {
            Sense::Le => value.max(0.0),
            Sense::Ge => (-value).max(0.0),
            Sense::Eq => value.abs(),
        }
    }
}

/// `expr sense 0`
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub label: String,
    pub sense: Sense,
    pub expr: QuadExpr,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("variable {var} fixed to both {first} and {second}")]
    ConflictingFix {
        var: String,
        first: bool,
        second: bool,
    },
    #[error("constraint {label} cannot be satisfied once fixed variables are substituted")]
    TriviallyInfeasible { label: String },
    #[error("{0} is not a binary variable")]
    NotBinary(String),
}

#[derive(Debug, Clone, Default)]
pub struct QuadraticModel {
    variables: Vec<Variable>,
    index: HashMap<VarKey, VarId>,
    constraints: Vec<Constraint>,
    objective: QuadExpr,
    fixed: BTreeMap<VarId, bool>,
}

impl QuadraticModel {
    pub fn new() -> Self {
        Self::default()
    }

    fn register(&mut self, key: VarKey, kind: VarKind) -> VarId {
        assert!(
            !self.index.contains_key(&key),
            "variable {key} registered twice"
        );
        let id = VarId(self.variables.len() as u32);
        self.variables.push(Variable { key, kind });
        self.index.insert(key, id);
        id
    }

    pub fn add_binary(&mut self, key: VarKey) -> VarId {
        self.register(key, VarKind::Binary)
    }

    pub fn add_real(&mut self, key: VarKey, lower: f64, upper: f64) -> VarId {
        self.register(key, VarKind::Real { lower, upper })
    }

    pub fn var(&self, key: VarKey) -> Option<VarId> {
        self.index.get(&key).copied()
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id.index()]
    }

    pub fn variables(&self) -> impl Iterator<Item = (VarId, &Variable)> {
        self.variables
            .iter()
            .enumerate()
            .map(|(k, v)| (VarId(k as u32), v))
    }

    pub fn variable_count(&self) -> usize {
        self.variables.len()
    }

    pub fn binary_count(&self) -> usize {
        self.variables
            .iter()
            .filter(|v| v.kind == VarKind::Binary)
            .count()
    }

    pub fn real_count(&self) -> usize {
        self.variable_count() - self.binary_count()
    }

    pub fn add_constraint(&mut self, label: impl Into<String>, sense: Sense, expr: QuadExpr) {
        self.constraints.push(Constraint {
            label: label.into(),
            sense,
            expr,
        });
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &QuadExpr {
        &self.objective
    }

    pub fn set_objective(&mut self, objective: QuadExpr) {
        self.objective = objective;
    }

    /// Records a fixed binary value. Re-fixing to the same value is a no-op.
    pub fn fix(&mut self, var: VarId, value: bool) -> Result<bool, ModelError> {
        let v = self.variable(var);
        if v.kind != VarKind::Binary {
            return Err(ModelError::NotBinary(v.key.to_string()));
        }
        match self.fixed.get(&var) {
            Some(&prev) if prev != value => Err(ModelError::ConflictingFix {
                var: v.key.to_string(),
                first: prev,
                second: value,
            }),
            Some(_) => Ok(false),
            None => {
                self.fixed.insert(var, value);
                Ok(true)
            }
        }
    }

    pub fn fixed(&self) -> &BTreeMap<VarId, bool> {
        &self.fixed
    }

    pub fn is_fixed(&self, var: VarId) -> bool {
        self.fixed.contains_key(&var)
    }

    /// Variables still left to the solver.
    pub fn free_variables(&self) -> impl Iterator<Item = (VarId, &Variable)> {
        self.variables()
            .filter(|(id, _)| !self.fixed.contains_key(id))
    }

    pub fn free_count(&self) -> usize {
        self.variables.len() - self.fixed.len()
    }

    /// Eliminates fixed variables from every constraint and the objective.
    /// Constraints left without variables are dropped when they hold and
    /// reported when they cannot. Returns the number of dropped constraints.
    pub fn substitute_fixed(&mut self) -> Result<usize, ModelError> {
        let mut kept = Vec::with_capacity(self.constraints.len());
        let mut dropped = 0;
        for c in self.constraints.drain(..) {
            let expr = c.expr.substitute(&self.fixed);
            if expr.is_constant() {
                if c.sense.excess(expr.constant) > FEASIBILITY_TOLERANCE {
                    return Err(ModelError::TriviallyInfeasible { label: c.label });
                }
                dropped += 1;
            } else {
                kept.push(Constraint { expr, ..c });
            }
        }
        self.constraints = kept;
        self.objective = self.objective.substitute(&self.fixed);
        Ok(dropped)
    }

    /// Evaluates an assignment against fixings, domains, constraints and objective.
    pub fn evaluate(&self, assignment: &Assignment) -> ModelEvaluation {
        let values = &assignment.values;
        assert_eq!(
            values.len(),
            self.variables.len(),
            "assignment size mismatch"
        );
        let mut violated = Vec::new();
        for (id, var) in self.variables() {
            let x = values[id.index()];
            match var.kind {
                VarKind::Binary => {
                    if x != 0.0 && x != 1.0 {
                        violated.push(format!("domain:{}", var.key));
                    }
                }
                VarKind::Real { lower, upper } => {
                    if x < lower - FEASIBILITY_TOLERANCE || x > upper + FEASIBILITY_TOLERANCE {
                        violated.push(format!("bound:{}", var.key));
                    }
                }
            }
            if let Some(&f) = self.fixed.get(&id) {
                if (x == 1.0) != f {
                    violated.push(format!("fixed:{}", var.key));
                }
            }
        }
        for c in &self.constraints {
            if c.sense.excess(c.expr.evaluate(values)) > FEASIBILITY_TOLERANCE {
                violated.push(c.label.clone());
            }
        }
        ModelEvaluation {
            objective: self.objective.evaluate(values),
            violated,
        }
    }
}

/// Dense variable values indexed by [`VarId`].
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    values: Vec<f64>,
}

impl Assignment {
    /// All zeros, with fixed binaries set to their values.
    pub fn new(model: &QuadraticModel) -> Self {
        let mut values = vec![0.0; model.variable_count()];
        for (&id, &v) in model.fixed() {
            values[id.index()] = if v { 1.0 } else { 0.0 };
        }
        Self { values }
    }

    pub fn set(&mut self, var: VarId, value: f64) {
        self.values[var.index()] = value;
    }

    pub fn get(&self, var: VarId) -> f64 {
        self.values[var.index()]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelEvaluation {
    pub objective: f64,
    /// Labels of violated constraints, plus `domain:`, `bound:` and `fixed:` entries.
    pub violated: Vec<String>,
}

impl ModelEvaluation {
    pub fn is_satisfied(&self) -> bool {
        self.violated.is_empty()
    }
}
