use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::instance::Violation;
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarKind {
    Continuous,
    Binary,
    Integer,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    /// `None` is minus infinity.
    pub lower: Option<Rational>,
    /// `None` is plus infinity.
    pub upper: Option<Rational>,
    pub kind: VarKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

impl RowSense {
    pub fn symbol(self) -> &'static str {
        match self {
            RowSense::Le => "<=",
            RowSense::Eq => "=",
            RowSense::Ge => ">=",
        }
    }

    fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            RowSense::Le => lhs <= rhs,
            RowSense::Eq => lhs == rhs,
            RowSense::Ge => lhs >= rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub name: String,
    /// Sparse row over variable indices; no zero coefficients.
    pub terms: Vec<(usize, Rational)>,
    pub sense: RowSense,
    pub rhs: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Formulation {
    Ip,
    IpZ,
    Qdp,
    Qsn,
    QsnZ,
}

impl Formulation {
    pub fn tag(self) -> &'static str {
        match self {
            Formulation::Ip => "ip",
            Formulation::IpZ => "ipz",
            Formulation::Qdp => "qdp",
            Formulation::Qsn => "qsn",
            Formulation::QsnZ => "qsnz",
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Formulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ip" => Formulation::Ip,
            "ipz" => Formulation::IpZ,
            "qdp" => Formulation::Qdp,
            "qsn" => Formulation::Qsn,
            "qsnz" => Formulation::QsnZ,
            other => {
                return Err(Error::Parse { location: "formulation".into(), message: format!("unknown tag `{other}`") })
            }
        })
    }
}

/// Linear expression giving an original-space coordinate in terms of the
/// model's variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectionRow {
    pub target: String,
    pub terms: Vec<(usize, Rational)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Metadata {
    pub formulation: Option<Formulation>,
    pub fingerprint: String,
    pub projections: Vec<ProjectionRow>,
}

/// A minimisation problem over named variables.
#[derive(Clone, Debug, Default)]
pub struct Model {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Vec<(usize, Rational)>,
    pub metadata: Metadata,
    index: HashMap<String, usize>,
}

impl PartialEq for Model {
    fn eq(&self, other: &Self) -> bool {
        self.variables == other.variables
            && self.constraints == other.constraints
            && self.objective == other.objective
            && self.metadata == other.metadata
    }
}

impl Model {
    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[(usize, Rational)] {
        &self.objective
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.var_index(name).map(|i| &self.variables[i])
    }

    pub fn constraint(&self, name: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.name == name)
    }

    pub fn count_kind(&self, kind: VarKind) -> usize {
        self.variables.iter().filter(|v| v.kind == kind).count()
    }

    /// Variables whose name starts with `prefix`.
    pub fn count_prefix(&self, prefix: &str) -> usize {
        self.variables.iter().filter(|v| v.name.starts_with(prefix)).count()
    }

    /// Variables, rows, objective and formulation tag agree; projection
    /// metadata is ignored since the text formats do not carry it.
    pub fn same_program(&self, other: &Model) -> bool {
        self.variables == other.variables
            && self.constraints == other.constraints
            && self.objective == other.objective
            && self.metadata.formulation == other.metadata.formulation
            && self.metadata.fingerprint == other.metadata.fingerprint
    }

    fn dense(&self, pt: &Assignment) -> Result<Vec<Rational>> {
        let mut values = vec![Rational::zero(); self.variables.len()];
        for (name, value) in &pt.values {
            let idx = self.var_index(name).ok_or_else(|| Error::UnknownVariable(name.clone()))?;
            values[idx] = value.clone();
        }
        Ok(values)
    }

    pub fn objective_value(&self, pt: &Assignment) -> Result<Rational> {
        let values = self.dense(pt)?;
        Ok(eval(&self.objective, &values))
    }

    /// Evaluates the projection rows recorded in the metadata.
    pub fn project(&self, pt: &Assignment) -> Result<BTreeMap<String, Rational>> {
        let values = self.dense(pt)?;
        Ok(self.metadata.projections.iter().map(|row| (row.target.clone(), eval(&row.terms, &values))).collect())
    }
}

fn eval(terms: &[(usize, Rational)], values: &[Rational]) -> Rational {
    terms.iter().fold(
        Rational::zero(),
        |acc, (idx, coef)| {
            if values[*idx].is_zero() {
                acc
            } else {
                acc + coef * &values[*idx]
            }
        },
    )
}

/// Incremental construction with unique names and merged coefficients.
#[derive(Debug, Default)]
pub struct ModelBuilder {
    model: Model,
}

impl ModelBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        lower: Option<Rational>,
        upper: Option<Rational>,
        kind: VarKind,
    ) -> Result<usize> {
        let name = name.into();
        if self.model.index.contains_key(&name) {
            return Err(Error::DuplicateVariable(name));
        }
        let idx = self.model.variables.len();
        self.model.index.insert(name.clone(), idx);
        self.model.variables.push(Variable { name, lower, upper, kind });
        Ok(idx)
    }

    pub fn var(&self, name: &str) -> Result<usize> {
        self.model.var_index(name).ok_or_else(|| Error::UnknownVariable(name.to_owned()))
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (usize, Rational)>,
        sense: RowSense,
        rhs: Rational,
    ) {
        let terms = merge(terms);
        self.model.constraints.push(Constraint { name: name.into(), terms, sense, rhs });
    }

    pub fn set_objective(&mut self, terms: impl IntoIterator<Item = (usize, Rational)>) {
        self.model.objective = merge(terms);
    }

    pub fn add_projection(&mut self, target: impl Into<String>, terms: impl IntoIterator<Item = (usize, Rational)>) {
        let terms = merge(terms);
        self.model.metadata.projections.push(ProjectionRow { target: target.into(), terms });
    }

    pub fn set_formulation(&mut self, formulation: Option<Formulation>, fingerprint: impl Into<String>) {
        self.model.metadata.formulation = formulation;
        self.model.metadata.fingerprint = fingerprint.into();
    }

    pub fn finish(self) -> Model {
        self.model
    }
}

/// Sums repeated indices, keeps first-seen order, drops zeros.
fn merge(terms: impl IntoIterator<Item = (usize, Rational)>) -> Vec<(usize, Rational)> {
    let mut out: Vec<(usize, Rational)> = Vec::new();
    let mut pos: HashMap<usize, usize> = HashMap::new();
    for (idx, coef) in terms {
        match pos.get(&idx) {
            Some(&p) => out[p].1 += coef,
            None => {
                pos.insert(idx, out.len());
                out.push((idx, coef));
            }
        }
    }
    out.retain(|(_, c)| !c.is_zero());
    out
}

/// Sparse point; unlisted variables are zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    pub values: BTreeMap<String, Rational>,
    /// When set, integrality of binary and integer variables is checked too.
    pub claims_integrality: bool,
}

impl Assignment {
    pub fn new(claims_integrality: bool) -> Self {
        Assignment { values: BTreeMap::new(), claims_integrality }
    }

    pub fn set(&mut self, name: impl Into<String>, value: Rational) {
        self.values.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Rational {
        self.values.get(name).cloned().unwrap_or_else(Rational::zero)
    }

    /// Merges `other` into `self`, overwriting shared names.
    pub fn extend(&mut self, other: &Assignment) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
        self.claims_integrality &= other.claims_integrality;
    }
}

/// Exact evaluation of every bound and row of `model` at `pt`.
pub fn check_point(model: &Model, pt: &Assignment) -> Result<Vec<Violation>> {
    let values = model.dense(pt)?;
    let mut out = Vec::new();
    for (var, value) in model.variables.iter().zip(&values) {
        if let Some(lo) = &var.lower {
            if value < lo {
                out.push(Violation {
                    constraint: format!("{}>=lower", var.name),
                    lhs: value.clone(),
                    bound: lo.clone(),
                });
            }
        }
        if let Some(hi) = &var.upper {
            if value > hi {
                out.push(Violation {
                    constraint: format!("{}<=upper", var.name),
                    lhs: value.clone(),
                    bound: hi.clone(),
                });
            }
        }
        if pt.claims_integrality && var.kind != VarKind::Continuous && !value.is_integer() {
            out.push(Violation {
                constraint: format!("{}:integer", var.name),
                lhs: value.clone(),
                bound: value.round(),
            });
        }
    }
    for row in &model.constraints {
        let lhs = eval(&row.terms, &values);
        if !row.sense.holds(&lhs, &row.rhs) {
            out.push(Violation { constraint: row.name.clone(), lhs, bound: row.rhs.clone() });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn tiny() -> Model {
        let mut b = ModelBuilder::new();
        let x = b.add_var("x", Some(int(0)), Some(int(2)), VarKind::Continuous).unwrap();
        let y = b.add_var("y", Some(int(0)), Some(int(1)), VarKind::Binary).unwrap();
        b.add_row("link", [(x, int(1)), (y, int(-2))], RowSense::Le, int(0));
        b.set_objective([(x, int(1)), (y, int(3)), (x, int(-1))]);
        b.finish()
    }

    #[test]
    fn builder_merges_and_rejects_duplicates() {
        let m = tiny();
        assert_eq!(m.objective(), &[(1, int(3))]);
        let mut b = ModelBuilder::new();
        b.add_var("x", None, None, VarKind::Continuous).unwrap();
        assert_eq!(b.add_var("x", None, None, VarKind::Continuous), Err(Error::DuplicateVariable("x".into())));
    }

    #[test]
    fn check_point_reports_rows_bounds_and_integrality() {
        let m = tiny();
        let mut pt = Assignment::new(false);
        pt.set("x", int(1));
        pt.set("y", ratio(1, 2));
        assert!(check_point(&m, &pt).unwrap().is_empty());
        pt.claims_integrality = true;
        assert_eq!(check_point(&m, &pt).unwrap()[0].constraint, "y:integer");

        let mut bad = Assignment::new(false);
        bad.set("x", int(3));
        let v = check_point(&m, &bad).unwrap();
        let names: Vec<&str> = v.iter().map(|v| v.constraint.as_str()).collect();
        assert_eq!(names, ["x<=upper", "link"]);

        let mut unknown = Assignment::new(false);
        unknown.set("w", int(0));
        assert_eq!(check_point(&m, &unknown), Err(Error::UnknownVariable("w".into())));
    }
}
