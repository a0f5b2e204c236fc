//! Mixed-integer linear models over binary and continuous variables, with an
//! embedded exact solver.
//!
//! Solving goes through three stages:
//!
//! 1. [`presolve`] substitutes out free continuous variables that are defined
//!    by equality rows (the temperature states of the control models), which
//!    leaves a much smaller LP over the binaries and the epigraph variables.
//! 2. [`lp`] solves the reduced relaxation with a dense bounded-variable
//!    simplex, adding inequality rows lazily as they are found violated.
//! 3. [`bnb`] runs best-first branch-and-bound over the binaries.
//!
//! Tolerances: feasibility [`FEAS_TOL`], integrality [`INT_TOL`], default
//! relative gap [`DEFAULT_GAP_TOL`].

mod bnb;
mod lp;
pub mod lp_format;
mod presolve;
mod simplex;

use std::time::Duration;

use crate::error::{Error, Result};

pub use bnb::{solve_lp_relaxation, solve_milp, solve_milp_with_start};

/// Constraint feasibility tolerance of reported incumbents.
pub const FEAS_TOL: f64 = 1e-7;
/// Distance to 0/1 under which a relaxed binary counts as integral.
pub const INT_TOL: f64 = 1e-6;
pub const DEFAULT_GAP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// A minimization problem `min c·x + c0` over linear rows and variable bounds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpModel {
    pub variables: Vec<Variable>,
    pub objective: Vec<(VarId, f64)>,
    pub objective_constant: f64,
    pub constraints: Vec<Constraint>,
}

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        self.push_var(name.into(), VarKind::Continuous, lower, upper)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> VarId {
        self.push_var(name.into(), VarKind::Binary, 0.0, 1.0)
    }

    fn push_var(&mut self, name: String, kind: VarKind, lower: f64, upper: f64) -> VarId {
        self.variables.push(Variable {
            name,
            kind,
            lower,
            upper,
        });
        VarId(self.variables.len() - 1)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        relation: Relation,
        rhs: f64,
    ) {
        self.constraints.push(Constraint {
            name: name.into(),
            terms,
            relation,
            rhs,
        });
    }

    pub fn set_objective(&mut self, terms: Vec<(VarId, f64)>, constant: f64) {
        self.objective = terms;
        self.objective_constant = constant;
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_binaries(&self) -> usize {
        self.variables
            .iter()
            .filter(|v| v.kind == VarKind::Binary)
            .count()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.variables.len();
        for (j, v) in self.variables.iter().enumerate() {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(Error::validation(
                    format!("variable {} ({})", j, v.name),
                    format!("invalid bounds [{}, {}]", v.lower, v.upper),
                ));
            }
            if v.kind == VarKind::Binary && (v.lower < 0.0 || v.upper > 1.0) {
                return Err(Error::validation(
                    format!("variable {} ({})", j, v.name),
                    "binary bounds must lie within [0, 1]",
                ));
            }
        }
        let check_terms = |what: &str, terms: &[(VarId, f64)]| -> Result<()> {
            for &(VarId(j), c) in terms {
                if j >= n {
                    return Err(Error::validation(what, format!("references undeclared variable {j}")));
                }
                if !c.is_finite() {
                    return Err(Error::validation(what, format!("non-finite coefficient {c}")));
                }
            }
            Ok(())
        };
        check_terms("objective", &self.objective)?;
        if !self.objective_constant.is_finite() {
            return Err(Error::validation("objective", "non-finite constant"));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            let what = format!("constraint {} ({})", i, c.name);
            check_terms(&what, &c.terms)?;
            if !c.rhs.is_finite() {
                return Err(Error::validation(what, format!("non-finite rhs {}", c.rhs)));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective_constant
            + self
                .objective
                .iter()
                .map(|&(VarId(j), c)| c * x[j])
                .sum::<f64>()
    }

    /// Largest violation of any row, bound, or integrality restriction.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, &xv) in self.variables.iter().zip(x) {
            worst = worst.max(v.lower - xv).max(xv - v.upper);
            if v.kind == VarKind::Binary {
                worst = worst.max(xv.min(1.0 - xv).max(0.0));
            }
        }
        for c in &self.constraints {
            let a: f64 = c.terms.iter().map(|&(VarId(j), v)| v * x[j]).sum();
            let viol = match c.relation {
                Relation::Le => a - c.rhs,
                Relation::Ge => c.rhs - a,
                Relation::Eq => (a - c.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    pub fn is_feasible(&self, x: &[f64]) -> bool {
        x.len() == self.variables.len() && self.max_violation(x) <= FEAS_TOL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// A limit stopped the search; the incumbent is feasible and the bound valid.
    FeasibleTimeLimit,
    /// A limit stopped the search before any feasible point was found.
    TimeLimitNoIncumbent,
    Infeasible,
    Unbounded,
}

impl SolveStatus {
    pub fn has_incumbent(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::FeasibleTimeLimit)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub status: SolveStatus,
    /// Incumbent assignment, one value per model variable (empty without one).
    pub values: Vec<f64>,
    pub objective: f64,
    pub best_bound: f64,
    /// `(objective - best_bound) / max(1, |objective|)`.
    pub gap: f64,
    pub nodes: usize,
}

impl MilpSolution {
    pub fn value(&self, v: VarId) -> f64 {
        self.values[v.0]
    }
}

pub fn relative_gap(incumbent: f64, bound: f64) -> f64 {
    ((incumbent - bound) / incumbent.abs().max(1.0)).max(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub gap_tol: f64,
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            gap_tol: DEFAULT_GAP_TOL,
            time_limit: None,
            node_limit: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_catches_bad_models() {
        let mut m = MilpModel::new();
        let x = m.add_binary("x");
        m.add_constraint("r", vec![(x, 1.0), (VarId(7), 1.0)], Relation::Le, 1.0);
        assert!(m.validate().is_err());

        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, 1.0);
        m.add_constraint("r", vec![(x, f64::NAN)], Relation::Le, 1.0);
        assert!(m.validate().is_err());

        let mut m = MilpModel::new();
        m.push_var("b".into(), VarKind::Binary, 0.0, 2.0);
        assert!(m.validate().is_err());

        let mut m = MilpModel::new();
        m.add_continuous("y", f64::NEG_INFINITY, f64::INFINITY);
        assert!(m.validate().is_ok());
    }

    #[test]
    fn violation_measure() {
        let mut m = MilpModel::new();
        let x = m.add_binary("x");
        let y = m.add_continuous("y", 0.0, 10.0);
        m.add_constraint("r", vec![(x, 1.0), (y, 1.0)], Relation::Le, 2.0);
        assert_eq!(m.max_violation(&[1.0, 1.0]), 0.0);
        assert!((m.max_violation(&[1.0, 3.0]) - 2.0).abs() < 1e-15);
        assert!((m.max_violation(&[0.4, 0.0]) - 0.4).abs() < 1e-15);
        assert!(!m.is_feasible(&[0.4, 0.0]));
    }

    #[test]
    fn gap_convention() {
        assert_eq!(relative_gap(10.0, 9.0), 0.1);
        assert_eq!(relative_gap(0.5, 0.25), 0.25);
        assert_eq!(relative_gap(1.0, 1.0), 0.0);
    }
}
