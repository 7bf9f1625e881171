//! Exact rational linear programs with certifying solutions.
//!
//! A [`LinearProgram`] is a list of named free variables, a sparse objective,
//! and labeled sparse constraints. [`solve`] runs an exact two-phase simplex
//! and always returns a certificate: optimal solutions carry matching duals
//! (strong duality holds as an identity of rationals), infeasible models
//! carry a ray combining constraints into `0 >= positive`, and unbounded
//! models carry an improving feasible direction. [`verify_optimality`]
//! re-checks a solution from scratch against the model.
//!
//! The module also provides a round-trippable plain-text serialization; see
//! [`LinearProgram::export_text`] for the exact grammar.

mod simplex;

use std::collections::{BTreeMap, HashMap};

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::Rational;

pub use simplex::{solve, solve_with, PivotRule, SolveRoute, SolverOptions};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("variable `{0}` is already declared")]
    DuplicateVariable(String),
    #[error("constraint label `{0}` is already used")]
    DuplicateLabel(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable index {0} is out of range")]
    BadVariableIndex(usize),
    #[error("`{0}` is not a valid name (must be nonempty, without whitespace or `:`)")]
    InvalidName(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpParseError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: {source}")]
    Model { line: usize, source: LpError },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl std::fmt::Display for Relation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

/// One labeled row: `sum coeffs . x  relation  rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    label: String,
    coeffs: Vec<(usize, Rational)>,
    relation: Relation,
    rhs: Rational,
}

impl Constraint {
    pub fn label(&self) -> &str {
        &self.label
    }

    /// Sparse coefficients sorted by variable index, zeros omitted.
    pub fn coeffs(&self) -> &[(usize, Rational)] {
        &self.coeffs
    }

    pub fn relation(&self) -> Relation {
        self.relation
    }

    pub fn rhs(&self) -> &Rational {
        &self.rhs
    }

    pub fn activity(&self, point: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .map(|(j, c)| c * &point[*j])
            .sum()
    }

    pub fn satisfied_by(&self, point: &[Rational]) -> bool {
        let activity = self.activity(point);
        match self.relation {
            Relation::Le => activity <= self.rhs,
            Relation::Eq => activity == self.rhs,
            Relation::Ge => activity >= self.rhs,
        }
    }
}

/// An exact-rational LP over named free variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearProgram {
    sense: Sense,
    variables: Vec<String>,
    objective: Vec<(usize, Rational)>,
    constraints: Vec<Constraint>,
}

fn canonical_sparse(entries: Vec<(usize, Rational)>, nvars: usize) -> Result<Vec<(usize, Rational)>, LpError> {
    let mut dense: BTreeMap<usize, Rational> = BTreeMap::new();
    for (j, c) in entries {
        if j >= nvars {
            return Err(LpError::BadVariableIndex(j));
        }
        let slot = dense.entry(j).or_insert_with(Rational::zero);
        *slot += c;
    }
    Ok(dense.into_iter().filter(|(_, c)| !c.is_zero()).collect())
}

fn valid_name(name: &str) -> bool {
    !name.is_empty() && !name.contains(char::is_whitespace) && !name.contains(':')
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        LinearProgram {
            sense,
            variables: Vec::new(),
            objective: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn add_variable(&mut self, name: &str) -> Result<usize, LpError> {
        if !valid_name(name) {
            return Err(LpError::InvalidName(name.to_string()));
        }
        if self.variables.iter().any(|v| v == name) {
            return Err(LpError::DuplicateVariable(name.to_string()));
        }
        self.variables.push(name.to_string());
        Ok(self.variables.len() - 1)
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    pub fn variable_name(&self, index: usize) -> &str {
        &self.variables[index]
    }

    /// Replace the objective with the given sparse entries (summed, zeros dropped).
    pub fn set_objective(&mut self, entries: Vec<(usize, Rational)>) -> Result<(), LpError> {
        self.objective = canonical_sparse(entries, self.variables.len())?;
        Ok(())
    }

    pub fn objective(&self) -> &[(usize, Rational)] {
        &self.objective
    }

    pub fn objective_coeff(&self, var: usize) -> Rational {
        self.objective
            .iter()
            .find(|(j, _)| *j == var)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Rational::zero)
    }

    pub fn add_constraint(
        &mut self,
        label: &str,
        coeffs: Vec<(usize, Rational)>,
        relation: Relation,
        rhs: Rational,
    ) -> Result<(), LpError> {
        if !valid_name(label) {
            return Err(LpError::InvalidName(label.to_string()));
        }
        if self.constraints.iter().any(|c| c.label == label) {
            return Err(LpError::DuplicateLabel(label.to_string()));
        }
        let coeffs = canonical_sparse(coeffs, self.variables.len())?;
        self.constraints.push(Constraint {
            label: label.to_string(),
            coeffs,
            relation,
            rhs,
        });
        Ok(())
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn constraint(&self, label: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.label == label)
    }

    /// Same feasible region with a different sense and objective.
    pub fn with_objective(&self, sense: Sense, entries: Vec<(usize, Rational)>) -> Result<Self, LpError> {
        let mut lp = self.clone();
        lp.sense = sense;
        lp.set_objective(entries)?;
        Ok(lp)
    }

    pub fn objective_value(&self, point: &[Rational]) -> Rational {
        self.objective.iter().map(|(j, c)| c * &point[*j]).sum()
    }

    /// Labels of the constraints violated by the named point (absent
    /// variables are zero). Empty iff the point is exactly feasible.
    pub fn check_feasible(
        &self,
        point: &BTreeMap<String, Rational>,
    ) -> Result<Vec<String>, LpError> {
        let mut dense = vec![Rational::zero(); self.variables.len()];
        let index: HashMap<&str, usize> = self
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i))
            .collect();
        for (name, value) in point {
            let &j = index
                .get(name.as_str())
                .ok_or_else(|| LpError::UnknownVariable(name.clone()))?;
            dense[j] = value.clone();
        }
        Ok(self.check_feasible_dense(&dense))
    }

    /// Dense-indexed variant of [`check_feasible`](Self::check_feasible).
    pub fn check_feasible_dense(&self, point: &[Rational]) -> Vec<String> {
        assert_eq!(point.len(), self.variables.len(), "point must assign all variables");
        self.constraints
            .iter()
            .filter(|c| !c.satisfied_by(point))
            .map(|c| c.label.clone())
            .collect()
    }

    /// Canonical plain-text form.
    ///
    /// Grammar, one record per line, in declaration order:
    ///
    /// ```text
    /// lp v1
    /// sense max|min
    /// var <name>
    /// obj <name>:<p>/<q> ...
    /// con <label> : <name>:<p>/<q> ... <rel> <p>/<q>
    /// ```
    ///
    /// with `<rel>` one of `<=`, `=`, `>=`. Rationals are always printed
    /// reduced as `p/q` with positive `q`. `parse_text` inverts this exactly.
    pub fn export_text(&self) -> String {
        let mut out = String::from("lp v1\n");
        out.push_str(match self.sense {
            Sense::Maximize => "sense max\n",
            Sense::Minimize => "sense min\n",
        });
        for v in &self.variables {
            out.push_str("var ");
            out.push_str(v);
            out.push('\n');
        }
        out.push_str("obj");
        for (j, c) in &self.objective {
            out.push_str(&format!(" {}:{}", self.variables[*j], fmt_rational(c)));
        }
        out.push('\n');
        for c in &self.constraints {
            out.push_str(&format!("con {} :", c.label));
            for (j, coeff) in &c.coeffs {
                out.push_str(&format!(" {}:{}", self.variables[*j], fmt_rational(coeff)));
            }
            out.push_str(&format!(" {} {}\n", c.relation, fmt_rational(&c.rhs)));
        }
        out
    }

    /// Parse the text format produced by [`export_text`](Self::export_text).
    pub fn parse_text(text: &str) -> Result<LinearProgram, LpParseError> {
        let malformed = |line: usize, message: &str| LpParseError::Malformed {
            line,
            message: message.to_string(),
        };
        let mut lines = text.lines().enumerate();

        let (ln, header) = lines
            .next()
            .ok_or_else(|| malformed(0, "empty document"))?;
        if header.trim() != "lp v1" {
            return Err(malformed(ln + 1, "expected header `lp v1`"));
        }
        let (ln, sense_line) = lines
            .next()
            .ok_or_else(|| malformed(1, "missing `sense` line"))?;
        let sense = match sense_line.trim() {
            "sense max" => Sense::Maximize,
            "sense min" => Sense::Minimize,
            _ => return Err(malformed(ln + 1, "expected `sense max` or `sense min`")),
        };

        let mut lp = LinearProgram::new(sense);
        let mut saw_obj = false;
        for (idx, raw) in lines {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("var") => {
                    if saw_obj {
                        return Err(malformed(line_no, "`var` after `obj`"));
                    }
                    let name = parts
                        .next()
                        .ok_or_else(|| malformed(line_no, "missing variable name"))?;
                    if parts.next().is_some() {
                        return Err(malformed(line_no, "trailing tokens after variable name"));
                    }
                    lp.add_variable(name)
                        .map_err(|source| LpParseError::Model { line: line_no, source })?;
                }
                Some("obj") => {
                    if saw_obj {
                        return Err(malformed(line_no, "duplicate `obj` line"));
                    }
                    saw_obj = true;
                    let mut entries = Vec::new();
                    for tok in parts {
                        entries.push(parse_term(&lp, tok, line_no)?);
                    }
                    lp.set_objective(entries)
                        .map_err(|source| LpParseError::Model { line: line_no, source })?;
                }
                Some("con") => {
                    if !saw_obj {
                        return Err(malformed(line_no, "`con` before `obj`"));
                    }
                    let label = parts
                        .next()
                        .ok_or_else(|| malformed(line_no, "missing constraint label"))?;
                    if parts.next() != Some(":") {
                        return Err(malformed(line_no, "expected `:` after label"));
                    }
                    let rest: Vec<&str> = parts.collect();
                    if rest.len() < 2 {
                        return Err(malformed(line_no, "constraint needs `<rel> <rhs>`"));
                    }
                    let relation = match rest[rest.len() - 2] {
                        "<=" => Relation::Le,
                        "=" => Relation::Eq,
                        ">=" => Relation::Ge,
                        other => {
                            return Err(malformed(line_no, &format!("bad relation `{other}`")))
                        }
                    };
                    let rhs = parse_rational(rest[rest.len() - 1], line_no)?;
                    let mut coeffs = Vec::new();
                    for tok in &rest[..rest.len() - 2] {
                        coeffs.push(parse_term(&lp, tok, line_no)?);
                    }
                    lp.add_constraint(label, coeffs, relation, rhs)
                        .map_err(|source| LpParseError::Model { line: line_no, source })?;
                }
                Some(other) => {
                    return Err(malformed(line_no, &format!("unknown record `{other}`")))
                }
                None => unreachable!("empty lines are skipped"),
            }
        }
        if !saw_obj {
            return Err(malformed(0, "missing `obj` line"));
        }
        Ok(lp)
    }
}

fn parse_term(lp: &LinearProgram, token: &str, line: usize) -> Result<(usize, Rational), LpParseError> {
    let (name, value) = token.split_once(':').ok_or_else(|| LpParseError::Malformed {
        line,
        message: format!("expected `<name>:<p>/<q>`, got `{token}`"),
    })?;
    let j = lp
        .variable_index(name)
        .ok_or_else(|| LpParseError::Model {
            line,
            source: LpError::UnknownVariable(name.to_string()),
        })?;
    Ok((j, parse_rational(value, line)?))
}

fn parse_rational(token: &str, line: usize) -> Result<Rational, LpParseError> {
    token.parse::<Rational>().map_err(|_| LpParseError::Malformed {
        line,
        message: format!("bad rational `{token}`"),
    })
}

/// `p/q` with the denominator always written and positive.
pub fn fmt_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertificateKind {
    Optimality,
    InfeasibilityRay,
    UnboundedRay,
}

/// Outcome of a solve, always carrying a certificate.
///
/// - `Optimal`: `primal` is a feasible point, `dual` its multiplier vector;
///   the pair satisfies stationarity, sign conditions and complementary
///   slackness exactly, hence primal and dual objectives coincide.
/// - `Infeasible`: `dual` is a ray; combining the constraints with these
///   multipliers (nonnegative on `>=` rows, nonpositive on `<=` rows) yields
///   the contradiction `0 >= positive`. `primal` is empty of meaning.
/// - `Unbounded`: `primal` is an improving direction `d` (objective strictly
///   better along `d` from any feasible point, and feasibility was
///   established during the solve); `objective_value` is the rate `c . d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpSolution {
    pub status: Status,
    pub certificate_kind: CertificateKind,
    primal: Vec<Rational>,
    dual: Vec<Rational>,
    pub objective_value: Rational,
    /// Heuristic flag: a zero reduced cost off the optimal basis (or a
    /// degenerate basic variable on the dual route) was observed, so other
    /// optimal vertices may exist. Never asserted by verification.
    pub alternate_optima_possible: bool,
}

impl LpSolution {
    pub(crate) fn new(
        status: Status,
        certificate_kind: CertificateKind,
        primal: Vec<Rational>,
        dual: Vec<Rational>,
        objective_value: Rational,
        alternate_optima_possible: bool,
    ) -> Self {
        LpSolution {
            status,
            certificate_kind,
            primal,
            dual,
            objective_value,
            alternate_optima_possible,
        }
    }

    /// Primal values indexed like the model's variables.
    pub fn primal(&self) -> &[Rational] {
        &self.primal
    }

    /// Dual values (or the infeasibility ray) indexed like the constraints.
    pub fn dual(&self) -> &[Rational] {
        &self.dual
    }

    pub fn primal_value(&self, lp: &LinearProgram, name: &str) -> Option<Rational> {
        lp.variable_index(name).map(|j| self.primal[j].clone())
    }

    pub fn dual_value(&self, lp: &LinearProgram, label: &str) -> Option<Rational> {
        lp.constraints
            .iter()
            .position(|c| c.label == label)
            .map(|i| self.dual[i].clone())
    }

    pub fn primal_map(&self, lp: &LinearProgram) -> BTreeMap<String, Rational> {
        lp.variables
            .iter()
            .cloned()
            .zip(self.primal.iter().cloned())
            .collect()
    }

    pub fn dual_map(&self, lp: &LinearProgram) -> BTreeMap<String, Rational> {
        lp.constraints
            .iter()
            .map(|c| c.label.clone())
            .zip(self.dual.iter().cloned())
            .collect()
    }
}

/// Exact optimality check: primal feasibility, dual sign conditions,
/// stationarity, complementary slackness, and equality of primal objective,
/// dual objective and the reported value. Returns false on any failure.
pub fn verify_optimality(lp: &LinearProgram, sol: &LpSolution) -> bool {
    if sol.status != Status::Optimal {
        return false;
    }
    if sol.primal.len() != lp.variables.len() || sol.dual.len() != lp.constraints.len() {
        return false;
    }
    if !lp.check_feasible_dense(&sol.primal).is_empty() {
        return false;
    }
    // Dual sign conditions, sense-aware.
    for (c, y) in lp.constraints.iter().zip(&sol.dual) {
        let ok = match (lp.sense, c.relation) {
            (_, Relation::Eq) => true,
            (Sense::Maximize, Relation::Le) | (Sense::Minimize, Relation::Ge) => !y.is_negative(),
            (Sense::Maximize, Relation::Ge) | (Sense::Minimize, Relation::Le) => !y.is_positive(),
        };
        if !ok {
            return false;
        }
    }
    // Stationarity: A^T y = c, since every variable is free.
    let mut lhs = vec![Rational::zero(); lp.variables.len()];
    for (c, y) in lp.constraints.iter().zip(&sol.dual) {
        if y.is_zero() {
            continue;
        }
        for (j, coeff) in &c.coeffs {
            lhs[*j] += coeff * y;
        }
    }
    let mut cvec = vec![Rational::zero(); lp.variables.len()];
    for (j, coeff) in &lp.objective {
        cvec[*j] = coeff.clone();
    }
    if lhs != cvec {
        return false;
    }
    // Complementary slackness on rows.
    for (c, y) in lp.constraints.iter().zip(&sol.dual) {
        if !y.is_zero() && c.activity(&sol.primal) != c.rhs {
            return false;
        }
    }
    let primal_obj = lp.objective_value(&sol.primal);
    let dual_obj: Rational = lp
        .constraints
        .iter()
        .zip(&sol.dual)
        .map(|(c, y)| &c.rhs * y)
        .sum();
    primal_obj == dual_obj && primal_obj == sol.objective_value
}

/// Exact check of an infeasibility ray: multipliers nonnegative on `>=`
/// rows, nonpositive on `<=` rows, vanishing combination of the left-hand
/// sides, and a strictly positive combined right-hand side.
pub fn verify_infeasibility_ray(lp: &LinearProgram, ray: &[Rational]) -> bool {
    if ray.len() != lp.constraints.len() {
        return false;
    }
    for (c, r) in lp.constraints.iter().zip(ray) {
        let ok = match c.relation {
            Relation::Eq => true,
            Relation::Ge => !r.is_negative(),
            Relation::Le => !r.is_positive(),
        };
        if !ok {
            return false;
        }
    }
    let mut lhs = vec![Rational::zero(); lp.variables.len()];
    let mut value = Rational::zero();
    for (c, r) in lp.constraints.iter().zip(ray) {
        if r.is_zero() {
            continue;
        }
        for (j, coeff) in &c.coeffs {
            lhs[*j] += coeff * r;
        }
        value += &c.rhs * r;
    }
    lhs.iter().all(Rational::is_zero) && value.is_positive()
}

/// Exact check of an unbounded direction: moving along `d` keeps every
/// constraint satisfied and strictly improves the objective.
pub fn verify_unbounded_ray(lp: &LinearProgram, ray: &[Rational]) -> bool {
    if ray.len() != lp.variables.len() {
        return false;
    }
    for c in &lp.constraints {
        let delta = c.activity(ray);
        let ok = match c.relation {
            Relation::Le => !delta.is_positive(),
            Relation::Eq => delta.is_zero(),
            Relation::Ge => !delta.is_negative(),
        };
        if !ok {
            return false;
        }
    }
    let rate = lp.objective_value(ray);
    match lp.sense {
        Sense::Maximize => rate.is_positive(),
        Sense::Minimize => rate.is_negative(),
    }
}
