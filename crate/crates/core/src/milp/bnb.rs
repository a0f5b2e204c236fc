//! Best-first branch-and-bound over the binaries.
//!
//! Branching picks the most fractional binary (lowest index on ties); the
//! open node with the smallest bound is expanded next (earliest inserted on
//! ties). Child relaxations are solved when the node is created, so every
//! open node carries its own LP bound. Incumbents come from integral node
//! relaxations, from a rounding heuristic (nearest, then floor) that fixes
//! every binary and re-solves for the continuous variables, and from dives
//! that fix the nearly integral binaries a batch at a time. A caller may also
//! seed the search with a start solution. Node LPs continue from the root
//! tableau; dives continue from their own previous step.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use log::debug;

use super::lp::{solve_relaxation, LpOutcome, LpState, RowPool};
use super::presolve::{reduce, Reduced};
use super::simplex::LpStatus;
use super::{relative_gap, MilpModel, MilpSolution, SolveOptions, SolveStatus, INT_TOL};
use crate::error::Result;

/// Run the rounding heuristic on every this-many evaluated nodes.
const HEURISTIC_EVERY: usize = 16;
/// Dive from every this-many evaluated nodes.
const DIVE_EVERY: usize = 64;
/// A dive fixes all binaries within this many LP solves.
const DIVE_STEPS: usize = 16;

struct Node {
    bound: f64,
    seq: usize,
    fixes: Vec<(usize, f64)>,
    branch_var: usize,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // BinaryHeap is a max-heap: the "greatest" node is the smallest bound,
    // then the earliest sequence number.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(other.seq.cmp(&self.seq))
    }
}

struct Search<'a> {
    model: &'a MilpModel,
    prob: Reduced,
    binaries: Vec<usize>,
    pool: RowPool,
    deadline: Option<Instant>,
    incumbent: Option<(f64, Vec<f64>)>,
    gap_tol: f64,
    nodes: usize,
    root: Option<LpState>,
}

enum Frac {
    Integral,
    Branch(usize),
}

impl<'a> Search<'a> {
    fn relax_from(
        &mut self,
        fixes: &[(usize, f64)],
        warm: Option<LpState>,
    ) -> Result<(LpOutcome, Option<LpState>)> {
        let mut lower = self.prob.lower.clone();
        let mut upper = self.prob.upper.clone();
        for &(j, v) in fixes {
            lower[j] = v;
            upper[j] = v;
        }
        for &j in &self.binaries {
            lower[j] = lower[j].max(0.0);
            upper[j] = upper[j].min(1.0);
        }
        solve_relaxation(&self.prob, &lower, &upper, &mut self.pool, self.deadline, warm)
    }

    fn fractionality(&self, x: &[f64]) -> Frac {
        let mut best: Option<(usize, f64)> = None;
        for &j in &self.binaries {
            let dist = (x[j] - x[j].floor()).min(x[j].ceil() - x[j]);
            if dist > INT_TOL && best.map_or(true, |(_, bd)| dist > bd) {
                best = Some((j, dist));
            }
        }
        match best {
            Some((j, _)) => Frac::Branch(j),
            None => Frac::Integral,
        }
    }

    fn prunable(&self, bound: f64) -> bool {
        self.incumbent
            .as_ref()
            .is_some_and(|(inc, _)| relative_gap(*inc, bound) <= self.gap_tol)
    }

    /// Fixes every binary to `round(x)` and keeps the result if it improves
    /// the incumbent.
    fn try_rounding(&mut self, x: &[f64], round: fn(f64) -> f64) -> Result<()> {
        let fixes: Vec<(usize, f64)> = self
            .binaries
            .iter()
            .map(|&j| (j, round(x[j]).clamp(0.0, 1.0)))
            .collect();
        self.try_fixes(fixes)
    }

    /// Re-solves for the continuous variables with the binaries fixed.
    fn try_fixes(&mut self, fixes: Vec<(usize, f64)>) -> Result<()> {
        let warm = self.root.clone();
        self.try_fixes_from(fixes, warm)
    }

    fn try_fixes_from(&mut self, fixes: Vec<(usize, f64)>, warm: Option<LpState>) -> Result<()> {
        let out = self.relax_from(&fixes, warm)?.0;
        if out.status != LpStatus::Optimal {
            return Ok(());
        }
        let mut xr = out.x;
        for &(j, v) in &fixes {
            xr[j] = v;
        }
        let full = self.prob.expand(&xr);
        if !self.model.is_feasible(&full) {
            debug!(
                "rounded point rejected, max violation {:e}",
                self.model.max_violation(&full)
            );
            return Ok(());
        }
        self.offer(full);
        Ok(())
    }

    fn offer(&mut self, full: Vec<f64>) {
        let obj = self.model.objective_value(&full);
        if self.incumbent.as_ref().map_or(true, |(inc, _)| obj < *inc) {
            debug!("incumbent {obj} after {} nodes", self.nodes);
            self.incumbent = Some((obj, full));
        }
    }

    /// A complete feasible assignment is taken as is; otherwise only its
    /// binaries are kept and the rest is re-solved.
    fn try_start(&mut self, start: &[f64]) -> Result<()> {
        if start.len() != self.model.num_vars() {
            debug!("start ignored: {} values for {} variables", start.len(), self.model.num_vars());
            return Ok(());
        }
        if self.model.is_feasible(start) {
            self.offer(start.to_vec());
            return Ok(());
        }
        let fixes = self
            .binaries
            .iter()
            .map(|&j| (j, start[self.prob.orig_of[j]].round().clamp(0.0, 1.0)))
            .collect();
        self.try_fixes(fixes)
    }

    /// Repeatedly fixes every integral binary plus a share of the least
    /// fractional ones, until all are fixed or the LP becomes infeasible or
    /// no better than the incumbent.
    fn dive(&mut self, x: &[f64], state: Option<LpState>) -> Result<()> {
        let mut x = x.to_vec();
        let mut state = state;
        let mut fixed = vec![false; self.prob.n()];
        let mut fixes: Vec<(usize, f64)> = Vec::new();
        for step in 0..DIVE_STEPS {
            let mut frac: Vec<(f64, usize)> = Vec::new();
            for &j in &self.binaries {
                if fixed[j] {
                    continue;
                }
                let dist = (x[j] - x[j].round()).abs();
                if dist <= INT_TOL {
                    fixed[j] = true;
                    fixes.push((j, x[j].round().clamp(0.0, 1.0)));
                } else {
                    frac.push((dist, j));
                }
            }
            if frac.is_empty() {
                break;
            }
            frac.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let take = frac.len().div_ceil(DIVE_STEPS - step);
            for &(_, j) in &frac[..take] {
                fixed[j] = true;
                fixes.push((j, x[j].round().clamp(0.0, 1.0)));
            }
            let (out, next) = self.relax_from(&fixes, state.take())?;
            if out.status != LpStatus::Optimal || self.prunable(out.objective) {
                return Ok(());
            }
            x = out.x;
            state = next;
        }
        let mut all = fixes;
        for &j in &self.binaries {
            if !fixed[j] {
                all.push((j, x[j].round().clamp(0.0, 1.0)));
            }
        }
        self.try_fixes_from(all, state)
    }

    fn heuristics(&mut self, x: &[f64]) -> Result<()> {
        self.try_rounding(x, f64::round)?;
        self.try_rounding(x, f64::floor)
    }
}

fn no_solution(status: SolveStatus, bound: f64, nodes: usize) -> MilpSolution {
    MilpSolution {
        status,
        values: Vec::new(),
        objective: f64::NAN,
        best_bound: bound,
        gap: f64::INFINITY,
        nodes,
    }
}

/// Solves the relaxation with every binary allowed anywhere in `[0, 1]`.
pub fn solve_lp_relaxation(model: &MilpModel) -> Result<MilpSolution> {
    model.validate()?;
    let Some(prob) = reduce(model) else {
        return Ok(no_solution(SolveStatus::Infeasible, f64::INFINITY, 1));
    };
    let mut lower = prob.lower.clone();
    let mut upper = prob.upper.clone();
    for j in 0..prob.n() {
        if prob.is_binary[j] {
            lower[j] = lower[j].max(0.0);
            upper[j] = upper[j].min(1.0);
        }
    }
    let mut pool = RowPool::new(&prob.rows);
    let (out, _) = solve_relaxation(&prob, &lower, &upper, &mut pool, None, None)?;
    Ok(match out.status {
        LpStatus::Optimal => {
            let values = prob.expand(&out.x);
            let objective = model.objective_value(&values);
            MilpSolution {
                status: SolveStatus::Optimal,
                values,
                objective,
                best_bound: objective,
                gap: 0.0,
                nodes: 1,
            }
        }
        LpStatus::Infeasible => no_solution(SolveStatus::Infeasible, f64::INFINITY, 1),
        LpStatus::Unbounded => no_solution(SolveStatus::Unbounded, f64::NEG_INFINITY, 1),
        LpStatus::TimeLimit => no_solution(SolveStatus::TimeLimitNoIncumbent, f64::NEG_INFINITY, 1),
    })
}

/// Exact best-first branch-and-bound with optional time and node limits.
pub fn solve_milp(model: &MilpModel, opts: &SolveOptions) -> Result<MilpSolution> {
    solve_milp_with_start(model, opts, None)
}

/// As [`solve_milp`], seeded with a candidate solution (one value per model
/// variable). An infeasible or malformed start is ignored.
pub fn solve_milp_with_start(
    model: &MilpModel,
    opts: &SolveOptions,
    start: Option<&[f64]>,
) -> Result<MilpSolution> {
    model.validate()?;
    let deadline = opts.time_limit.map(|d| Instant::now() + d);
    let Some(prob) = reduce(model) else {
        return Ok(no_solution(SolveStatus::Infeasible, f64::INFINITY, 0));
    };
    let binaries: Vec<usize> = (0..prob.n()).filter(|&j| prob.is_binary[j]).collect();
    let pool = RowPool::new(&prob.rows);
    let mut s = Search {
        model,
        prob,
        binaries,
        pool,
        deadline,
        incumbent: None,
        gap_tol: opts.gap_tol.max(0.0),
        nodes: 0,
        root: None,
    };

    if let Some(start) = start {
        s.try_start(start)?;
    }
    let (root, root_state) = s.relax_from(&[], None)?;
    s.root = root_state;
    s.nodes = 1;
    match root.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Ok(no_solution(SolveStatus::Infeasible, f64::INFINITY, 1)),
        LpStatus::Unbounded => {
            return Ok(no_solution(SolveStatus::Unbounded, f64::NEG_INFINITY, 1))
        }
        LpStatus::TimeLimit => {
            return Ok(match s.incumbent.take() {
                Some((objective, values)) => MilpSolution {
                    status: SolveStatus::FeasibleTimeLimit,
                    values,
                    objective,
                    best_bound: f64::NEG_INFINITY,
                    gap: f64::INFINITY,
                    nodes: 1,
                },
                None => no_solution(SolveStatus::TimeLimitNoIncumbent, f64::NEG_INFINITY, 1),
            })
        }
    }
    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    match s.fractionality(&root.x) {
        Frac::Integral => s.try_rounding(&root.x, f64::round)?,
        Frac::Branch(j) => {
            s.heuristics(&root.x)?;
            let warm = s.root.clone();
            s.dive(&root.x, warm)?;
            heap.push(Node {
                bound: root.objective,
                seq,
                fixes: Vec::new(),
                branch_var: j,
            });
            seq += 1;
        }
    }

    let limit_hit = |s: &Search| {
        opts.node_limit.is_some_and(|l| s.nodes >= l)
            || s.deadline.is_some_and(|d| Instant::now() >= d)
    };
    let mut stopped_early = false;
    loop {
        let open_min = heap.peek().map(|n| n.bound);
        let inc = s.incumbent.as_ref().map(|(o, _)| *o);
        match (inc, open_min) {
            (None, None) => {
                return Ok(no_solution(SolveStatus::Infeasible, f64::INFINITY, s.nodes));
            }
            (Some(_), None) => break,
            (Some(o), Some(b)) if relative_gap(o, b.min(o)) <= s.gap_tol => break,
            _ => {}
        }
        if limit_hit(&s) {
            stopped_early = true;
            break;
        }
        let node = heap.pop().expect("heap is non-empty");
        if s.prunable(node.bound) {
            continue;
        }
        let mut aborted = false;
        for val in [0.0, 1.0] {
            let mut fixes = node.fixes.clone();
            fixes.push((node.branch_var, val));
            let warm = s.root.clone();
            let (out, state) = s.relax_from(&fixes, warm)?;
            s.nodes += 1;
            match out.status {
                LpStatus::Infeasible => continue,
                LpStatus::TimeLimit => {
                    aborted = true;
                    break;
                }
                LpStatus::Unbounded => {
                    // a bounded parent cannot have an unbounded child
                    continue;
                }
                LpStatus::Optimal => {}
            }
            let bound = out.objective.max(node.bound);
            if s.prunable(bound) {
                continue;
            }
            match s.fractionality(&out.x) {
                Frac::Integral => s.try_rounding(&out.x, f64::round)?,
                Frac::Branch(j) => {
                    if s.nodes % HEURISTIC_EVERY == 0 {
                        s.try_rounding(&out.x, f64::round)?;
                    }
                    if s.nodes % DIVE_EVERY == 0 {
                        s.dive(&out.x, state)?;
                    }
                    heap.push(Node {
                        bound,
                        seq,
                        fixes,
                        branch_var: j,
                    });
                    seq += 1;
                }
            }
        }
        if aborted {
            // the parent's bound still covers its unexplored subtree
            heap.push(node);
            stopped_early = true;
            break;
        }
    }

    let Some((objective, values)) = s.incumbent.take() else {
        let bound = heap.peek().map_or(f64::NEG_INFINITY, |n| n.bound);
        return Ok(no_solution(SolveStatus::TimeLimitNoIncumbent, bound, s.nodes));
    };
    let best_bound = heap.iter().map(|n| n.bound).fold(objective, f64::min);
    let gap = relative_gap(objective, best_bound);
    let status = if stopped_early && gap > s.gap_tol {
        SolveStatus::FeasibleTimeLimit
    } else {
        SolveStatus::Optimal
    };
    debug!(
        "branch-and-bound: {:?} objective {objective} bound {best_bound} after {} nodes",
        status, s.nodes
    );
    Ok(MilpSolution {
        status,
        values,
        objective,
        best_bound,
        gap,
        nodes: s.nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{Relation, VarKind};
    use super::*;

    #[test]
    fn single_binary_below_half() {
        let mut m = MilpModel::new();
        let x = m.add_binary("x");
        m.add_constraint("cap", vec![(x, 1.0)], Relation::Le, 0.5);
        m.set_objective(vec![(x, -1.0)], 0.0);
        let sol = solve_milp(&m, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_eq!(sol.values, vec![0.0]);
        assert_eq!(sol.objective, 0.0);
    }

    #[test]
    fn relaxation_examples() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, 1.0);
        m.set_objective(vec![(x, 1.0)], 0.0);
        assert_eq!(solve_lp_relaxation(&m).unwrap().objective, 0.0);

        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, 1.0);
        let y = m.add_continuous("y", 0.0, 1.0);
        m.add_constraint("r", vec![(x, 1.0), (y, 1.0)], Relation::Le, 1.0);
        m.set_objective(vec![(x, -1.0), (y, -1.0)], 0.0);
        assert!((solve_lp_relaxation(&m).unwrap().objective + 1.0).abs() < 1e-12);

        let mut m = MilpModel::new();
        let x = m.add_continuous("x", f64::NEG_INFINITY, f64::INFINITY);
        m.add_constraint("lo", vec![(x, 1.0)], Relation::Ge, 1.0);
        m.add_constraint("hi", vec![(x, 1.0)], Relation::Le, 0.0);
        assert_eq!(solve_lp_relaxation(&m).unwrap().status, SolveStatus::Infeasible);
    }

    #[test]
    fn knapsack_matches_enumeration() {
        // max 5a + 4b + 3c  s.t. 2a + 3b + c <= 5 (binaries) -> 9 with a = c = 1... check all
        let w = [2.0, 3.0, 1.0];
        let v = [5.0, 4.0, 3.0];
        let mut m = MilpModel::new();
        let xs: Vec<_> = (0..3).map(|i| m.add_binary(format!("x{i}"))).collect();
        m.add_constraint(
            "cap",
            xs.iter().zip(w).map(|(&x, w)| (x, w)).collect(),
            Relation::Le,
            5.0,
        );
        m.set_objective(xs.iter().zip(v).map(|(&x, v)| (x, -v)).collect(), 0.0);
        let sol = solve_milp(&m, &SolveOptions::default()).unwrap();
        let mut best = f64::INFINITY;
        for mask in 0..8u32 {
            let bits: Vec<f64> = (0..3).map(|i| ((mask >> i) & 1) as f64).collect();
            let wt: f64 = bits.iter().zip(w).map(|(b, w)| b * w).sum();
            if wt <= 5.0 {
                best = best.min(-bits.iter().zip(v).map(|(b, v)| b * v).sum::<f64>());
            }
        }
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - best).abs() < 1e-9);
        assert!(m.is_feasible(&sol.values));
        assert!(m
            .variables
            .iter()
            .zip(&sol.values)
            .all(|(var, &x)| var.kind != VarKind::Binary || x == 0.0 || x == 1.0));
    }

    #[test]
    fn infeasible_binary_model() {
        let mut m = MilpModel::new();
        let x = m.add_binary("x");
        m.add_constraint("lo", vec![(x, 1.0)], Relation::Ge, 0.3);
        m.add_constraint("hi", vec![(x, 1.0)], Relation::Le, 0.7);
        let sol = solve_milp(&m, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }

    #[test]
    fn node_limit_reports_valid_bound() {
        let mut m = MilpModel::new();
        let n = 14;
        let xs: Vec<_> = (0..n).map(|i| m.add_binary(format!("x{i}"))).collect();
        let w: Vec<f64> = (0..n).map(|i| 3.0 + ((i * 7) % 5) as f64 + 0.1 * i as f64).collect();
        m.add_constraint(
            "cap",
            xs.iter().zip(&w).map(|(&x, &w)| (x, w)).collect(),
            Relation::Le,
            17.5,
        );
        m.set_objective(xs.iter().zip(&w).map(|(&x, &w)| (x, -(w + 0.5))).collect(), 0.0);
        let exact = solve_milp(&m, &SolveOptions::default()).unwrap();
        let limited = solve_milp(
            &m,
            &SolveOptions {
                node_limit: Some(3),
                ..SolveOptions::default()
            },
        )
        .unwrap();
        assert!(limited.status.has_incumbent());
        assert!(m.is_feasible(&limited.values));
        assert!(limited.best_bound <= exact.objective + 1e-9);
        assert!(limited.best_bound <= limited.objective + 1e-9);
    }
}
