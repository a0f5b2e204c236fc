//! Aggregation of free continuous variables through equality rows.
//!
//! An equality row containing a free continuous variable `v` pins `v` to an
//! affine function of the other variables. Substituting that function
//! everywhere removes both the row and the column. Rows are visited in
//! declaration order, so a chain `θ₀ = θ⁰`, `θ₁ = a θ₀ + …`, … collapses into
//! explicit affine expressions of the binaries. Values of eliminated variables
//! are recovered by back-substitution in reverse elimination order.

use std::collections::{BTreeMap, BTreeSet};

use super::simplex::LpRow;
use super::{MilpModel, Relation, VarKind};

/// Minimum |pivot| relative to the largest coefficient in the row.
const PIVOT_REL: f64 = 1e-3;
/// Rows whose remaining coefficients are all this small are treated as empty.
const EMPTY_ROW_FEAS: f64 = 1e-9;

#[derive(Debug, Clone)]
struct Substitution {
    var: usize,
    constant: f64,
    terms: Vec<(usize, f64)>,
}

/// The reduced problem in its own (dense) variable numbering.
#[derive(Debug, Clone)]
pub(crate) struct Reduced {
    pub n_orig: usize,
    /// reduced index -> original variable
    pub orig_of: Vec<usize>,
    pub cost: Vec<f64>,
    pub obj_constant: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub is_binary: Vec<bool>,
    pub rows: Vec<LpRow>,
    substitutions: Vec<Substitution>,
}

impl Reduced {
    pub fn n(&self) -> usize {
        self.orig_of.len()
    }

    /// Full assignment of the original model from a reduced assignment.
    pub fn expand(&self, xr: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n_orig];
        for (r, &o) in self.orig_of.iter().enumerate() {
            x[o] = xr[r];
        }
        for s in self.substitutions.iter().rev() {
            x[s.var] = s.constant + s.terms.iter().map(|&(j, c)| c * x[j]).sum::<f64>();
        }
        x
    }
}

/// Returns `None` when a row reduces to an unsatisfiable constant.
pub(crate) fn reduce(model: &MilpModel) -> Option<Reduced> {
    let n = model.num_vars();
    let mut rows: Vec<BTreeMap<usize, f64>> = Vec::with_capacity(model.constraints.len());
    let mut rhs: Vec<f64> = Vec::with_capacity(model.constraints.len());
    let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (i, c) in model.constraints.iter().enumerate() {
        let mut row = BTreeMap::new();
        for &(v, a) in &c.terms {
            *row.entry(v.0).or_insert(0.0) += a;
        }
        row.retain(|_, a| *a != 0.0);
        for &j in row.keys() {
            col_rows[j].insert(i);
        }
        rows.push(row);
        rhs.push(c.rhs);
    }
    let mut cost = vec![0.0; n];
    for &(v, c) in &model.objective {
        cost[v.0] += c;
    }
    let mut obj_constant = model.objective_constant;

    let is_free = |j: usize| {
        let v = &model.variables[j];
        v.kind == VarKind::Continuous && v.lower == f64::NEG_INFINITY && v.upper == f64::INFINITY
    };
    let mut eliminated = vec![false; n];
    let mut used_row = vec![false; rows.len()];
    let mut substitutions = Vec::new();

    for i in 0..rows.len() {
        if model.constraints[i].relation != Relation::Eq {
            continue;
        }
        let max_abs = rows[i].values().fold(0.0f64, |m, a| m.max(a.abs()));
        let mut pick: Option<(usize, f64)> = None;
        for (&j, &a) in &rows[i] {
            if is_free(j) && !eliminated[j] && a.abs() >= PIVOT_REL * max_abs {
                // largest pivot, later-declared variable on ties
                if pick.map_or(true, |(_, pa)| a.abs() >= pa.abs()) {
                    pick = Some((j, a));
                }
            }
        }
        let Some((v, a_v)) = pick else { continue };

        // v = (rhs - Σ_{j≠v} a_j x_j) / a_v
        let constant = rhs[i] / a_v;
        let terms: Vec<(usize, f64)> = rows[i]
            .iter()
            .filter(|(&j, _)| j != v)
            .map(|(&j, &a)| (j, -a / a_v))
            .collect();

        used_row[i] = true;
        eliminated[v] = true;
        let touched: Vec<usize> = col_rows[v].iter().copied().filter(|&r| r != i).collect();
        for r in touched {
            let a_rv = rows[r].remove(&v).unwrap_or(0.0);
            if a_rv == 0.0 {
                continue;
            }
            rhs[r] -= a_rv * constant;
            for &(j, c) in &terms {
                let add = a_rv * c;
                let entry = rows[r].entry(j).or_insert(0.0);
                let old = *entry;
                let new = old + add;
                if new == 0.0 || new.abs() <= 1e-15 * (old.abs() + add.abs()) {
                    rows[r].remove(&j);
                    col_rows[j].remove(&r);
                } else {
                    *entry = new;
                    col_rows[j].insert(r);
                }
            }
        }
        for &(j, _) in &terms {
            col_rows[j].remove(&i);
        }
        col_rows[v].clear();
        if cost[v] != 0.0 {
            let c_v = cost[v];
            obj_constant += c_v * constant;
            for &(j, c) in &terms {
                cost[j] += c_v * c;
            }
            cost[v] = 0.0;
        }
        substitutions.push(Substitution {
            var: v,
            constant,
            terms,
        });
    }

    let mut red_of = vec![usize::MAX; n];
    let mut orig_of = Vec::new();
    for j in 0..n {
        if !eliminated[j] {
            red_of[j] = orig_of.len();
            orig_of.push(j);
        }
    }
    let mut lp_rows = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if used_row[i] {
            continue;
        }
        let rel = model.constraints[i].relation;
        if row.is_empty() {
            let ok = match rel {
                Relation::Le => 0.0 <= rhs[i] + EMPTY_ROW_FEAS,
                Relation::Ge => 0.0 >= rhs[i] - EMPTY_ROW_FEAS,
                Relation::Eq => rhs[i].abs() <= EMPTY_ROW_FEAS,
            };
            if !ok {
                return None;
            }
            continue;
        }
        lp_rows.push(LpRow {
            idx: row.keys().map(|&j| red_of[j]).collect(),
            val: row.values().copied().collect(),
            rel,
            rhs: rhs[i],
        });
    }
    Some(Reduced {
        n_orig: n,
        cost: orig_of.iter().map(|&j| cost[j]).collect(),
        obj_constant,
        lower: orig_of.iter().map(|&j| model.variables[j].lower).collect(),
        upper: orig_of.iter().map(|&j| model.variables[j].upper).collect(),
        is_binary: orig_of
            .iter()
            .map(|&j| model.variables[j].kind == VarKind::Binary)
            .collect(),
        orig_of,
        rows: lp_rows,
        substitutions,
    })
}
