//! Dense bounded-variable primal simplex.
//!
//! Every row `a·x (≤|=|≥) b` gets a slack `s` with `a·x + s = b`; rows whose
//! starting residual does not fit the slack bounds get an artificial column
//! that phase one drives to zero. Variables carry explicit bounds so binaries
//! relaxed to `[0, 1]` never need extra rows. Pricing is Dantzig with a Harris
//! ratio test, switching to Bland's rule while the method stalls on degenerate
//! pivots. Rows added to a solved LP, and changed variable bounds, are handled
//! by a dual simplex from the previous basis.

use std::time::Instant;

use super::Relation;
use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-14;
const STALL_LIMIT: usize = 64;
/// Dual pivots allowed after adding rows before falling back to a cold start.
const DUAL_BUDGET_BASE: usize = 500;
const DUAL_BUDGET_PER_ROW: usize = 4;

/// A sparse row of the LP.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LpRow {
    pub idx: Vec<usize>,
    pub val: Vec<f64>,
    pub rel: Relation,
    pub rhs: f64,
}

impl LpRow {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.idx.iter().zip(&self.val).map(|(&j, &v)| v * x[j]).sum()
    }

    /// Amount by which `x` violates the row (zero when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let a = self.activity(x);
        match self.rel {
            Relation::Le => (a - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - a).max(0.0),
            Relation::Eq => (a - self.rhs).abs(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.val.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    TimeLimit,
}

#[derive(Debug, Clone)]
pub(crate) struct LpResult {
    pub status: LpStatus,
    /// Structural values (meaningful for `Optimal`).
    pub x: Vec<f64>,
    /// `cost · x` without any constant offset.
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Pos {
    Basic,
    Lower,
    Upper,
    /// Free nonbasic variable parked at zero.
    Zero,
}

#[derive(Clone)]
struct Tableau {
    m: usize,
    nc: usize,
    n_struct: usize,
    first_art: usize,
    t: Vec<f64>,
    basis: Vec<usize>,
    pos: Vec<Pos>,
    x: Vec<f64>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    cost: Vec<f64>,
    d: Vec<f64>,
    iterations: usize,
    max_iterations: usize,
    deadline: Option<Instant>,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
    TimeLimit,
}

enum DualEnd {
    Optimal,
    Infeasible,
    TimeLimit,
    /// Pivot budget exhausted.
    GaveUp,
}

impl Tableau {
    fn build(
        n: usize,
        lower: &[f64],
        upper: &[f64],
        rows: &[&LpRow],
        deadline: Option<Instant>,
    ) -> Self {
        let m = rows.len();
        let mut lb: Vec<f64> = lower.to_vec();
        let mut ub: Vec<f64> = upper.to_vec();
        let mut pos = Vec::with_capacity(n + 2 * m);
        let mut x = Vec::with_capacity(n + 2 * m);
        for j in 0..n {
            let (p, v) = if lb[j].is_finite() {
                (Pos::Lower, lb[j])
            } else if ub[j].is_finite() {
                (Pos::Upper, ub[j])
            } else {
                (Pos::Zero, 0.0)
            };
            pos.push(p);
            x.push(v);
        }
        // slacks
        for r in rows {
            let (l, u, p) = match r.rel {
                Relation::Le => (0.0, f64::INFINITY, Pos::Lower),
                Relation::Ge => (f64::NEG_INFINITY, 0.0, Pos::Upper),
                Relation::Eq => (0.0, 0.0, Pos::Lower),
            };
            lb.push(l);
            ub.push(u);
            pos.push(p);
            x.push(0.0);
        }
        let residual: Vec<f64> = rows.iter().map(|r| r.rhs - r.activity(&x[..n])).collect();
        let needs_art: Vec<bool> = rows
            .iter()
            .zip(&residual)
            .map(|(r, &res)| match r.rel {
                Relation::Le => res < -FEAS_TOL,
                Relation::Ge => res > FEAS_TOL,
                Relation::Eq => res.abs() > FEAS_TOL,
            })
            .collect();
        let first_art = n + m;
        let n_art = needs_art.iter().filter(|&&b| b).count();
        let nc = first_art + n_art;
        for _ in 0..n_art {
            lb.push(0.0);
            ub.push(f64::INFINITY);
            pos.push(Pos::Basic);
            x.push(0.0);
        }

        let mut t = vec![0.0; m * nc];
        let mut basis = Vec::with_capacity(m);
        let mut art = first_art;
        for (i, r) in rows.iter().enumerate() {
            let row = &mut t[i * nc..(i + 1) * nc];
            let sign = if needs_art[i] { residual[i].signum() } else { 1.0 };
            for (&j, &v) in r.idx.iter().zip(&r.val) {
                row[j] += sign * v;
            }
            row[n + i] = sign;
            if needs_art[i] {
                row[art] = 1.0;
                basis.push(art);
                x[art] = residual[i].abs();
                art += 1;
            } else {
                basis.push(n + i);
                pos[n + i] = Pos::Basic;
                x[n + i] = residual[i];
            }
        }
        let max_iterations = 50_000 + 50 * (m + nc);
        Self {
            m,
            nc,
            n_struct: n,
            first_art,
            t,
            basis,
            pos,
            x,
            lb,
            ub,
            cost: vec![0.0; nc],
            d: vec![0.0; nc],
            iterations: 0,
            max_iterations,
            deadline,
        }
    }

    fn set_cost(&mut self, cost: Vec<f64>) {
        self.cost = cost;
        self.d.copy_from_slice(&self.cost);
        for i in 0..self.m {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * self.nc..(i + 1) * self.nc];
                for (dj, &tij) in self.d.iter_mut().zip(row) {
                    *dj -= cb * tij;
                }
            }
        }
        for &b in &self.basis {
            self.d[b] = 0.0;
        }
    }

    fn objective(&self) -> f64 {
        self.cost.iter().zip(&self.x).map(|(c, x)| c * x).sum()
    }

    fn choose_entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.nc {
            let dj = self.d[j];
            let dir = match self.pos[j] {
                Pos::Basic => continue,
                _ if self.lb[j] == self.ub[j] => continue,
                Pos::Lower if dj < -OPT_TOL => 1.0,
                Pos::Upper if dj > OPT_TOL => -1.0,
                Pos::Zero if dj.abs() > OPT_TOL => -dj.signum(),
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if dj.abs() > best_score {
                best_score = dj.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    /// Returns `(row, step)` of the blocking basic variable, if any.
    fn ratio_test(&self, q: usize, dir: f64, bland: bool) -> Option<(usize, f64)> {
        let nc = self.nc;
        let limit = |i: usize, slack: f64| -> Option<(f64, f64)> {
            let a = dir * self.t[i * nc + q];
            if a.abs() <= PIVOT_TOL {
                return None;
            }
            let b = self.basis[i];
            if a > 0.0 {
                let l = self.lb[b];
                l.is_finite().then(|| (((self.x[b] - l) + slack).max(0.0) / a, a))
            } else {
                let u = self.ub[b];
                u.is_finite().then(|| (((u - self.x[b]) + slack).max(0.0) / -a, a))
            }
        };
        if bland {
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.m {
                if let Some((r, _)) = limit(i, 0.0) {
                    match best {
                        None => best = Some((i, r)),
                        Some((bi, br)) => {
                            if r < br - 1e-12 || (r <= br + 1e-12 && self.basis[i] < self.basis[bi])
                            {
                                best = Some((i, r));
                            }
                        }
                    }
                }
            }
            return best;
        }
        // Harris: widest step under relaxed bounds, then the largest pivot
        // among rows blocking within it.
        let mut max_step = f64::INFINITY;
        for i in 0..self.m {
            if let Some((r, _)) = limit(i, FEAS_TOL) {
                max_step = max_step.min(r);
            }
        }
        if !max_step.is_finite() {
            return None;
        }
        let mut best: Option<(usize, f64, f64)> = None;
        for i in 0..self.m {
            if let Some((r, a)) = limit(i, 0.0) {
                if r <= max_step && best.map_or(true, |(_, _, ba)| a.abs() > ba) {
                    best = Some((i, r, a.abs()));
                }
            }
        }
        best.map(|(i, r, _)| (i, r))
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nc = self.nc;
        let piv = self.t[r * nc + q];
        {
            let row = &mut self.t[r * nc..(r + 1) * nc];
            for v in row.iter_mut() {
                *v /= piv;
            }
            row[q] = 1.0;
        }
        let nz: Vec<usize> = (0..nc)
            .filter(|&j| self.t[r * nc + j] != 0.0)
            .collect();
        let (before, rest) = self.t.split_at_mut(r * nc);
        let (prow, after) = rest.split_at_mut(nc);
        let eliminate = |row: &mut [f64]| {
            let f = row[q];
            if f != 0.0 {
                for &j in &nz {
                    let v = row[j] - f * prow[j];
                    row[j] = if v.abs() < DROP_TOL { 0.0 } else { v };
                }
                row[q] = 0.0;
            }
        };
        before.chunks_mut(nc).for_each(eliminate);
        after.chunks_mut(nc).for_each(eliminate);
        let f = self.d[q];
        if f != 0.0 {
            for &j in &nz {
                self.d[j] -= f * prow[j];
            }
        }
        self.d[q] = 0.0;
        self.basis[r] = q;
        self.pos[q] = Pos::Basic;
    }

    fn run_phase(&mut self) -> Result<PhaseEnd> {
        let mut stall = 0usize;
        loop {
            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(Error::Solver(format!(
                    "simplex iteration limit {} reached ({} rows, {} columns)",
                    self.max_iterations, self.m, self.nc
                )));
            }
            if self.iterations % 32 == 0 {
                if let Some(dl) = self.deadline {
                    if Instant::now() >= dl {
                        return Ok(PhaseEnd::TimeLimit);
                    }
                }
            }
            let bland = stall >= STALL_LIMIT;
            let Some((q, dir)) = self.choose_entering(bland) else {
                return Ok(PhaseEnd::Optimal);
            };
            let flip = if self.lb[q].is_finite() && self.ub[q].is_finite() {
                self.ub[q] - self.lb[q]
            } else {
                f64::INFINITY
            };
            let blocking = self.ratio_test(q, dir, bland);
            let (step, leave_row) = match blocking {
                Some((r, s)) if s < flip => (s, Some(r)),
                _ if flip.is_finite() => (flip, None),
                _ => return Ok(PhaseEnd::Unbounded),
            };
            if step > 1e-12 {
                stall = 0;
            } else {
                stall += 1;
            }
            // move the basic variables along the edge
            if step != 0.0 {
                let nc = self.nc;
                for i in 0..self.m {
                    let a = self.t[i * nc + q];
                    if a != 0.0 {
                        self.x[self.basis[i]] -= dir * step * a;
                    }
                }
                self.x[q] += dir * step;
            }
            match leave_row {
                None => {
                    // bound flip
                    if dir > 0.0 {
                        self.pos[q] = Pos::Upper;
                        self.x[q] = self.ub[q];
                    } else {
                        self.pos[q] = Pos::Lower;
                        self.x[q] = self.lb[q];
                    }
                }
                Some(r) => {
                    let b = self.basis[r];
                    let a = dir * self.t[r * self.nc + q];
                    if a > 0.0 {
                        self.pos[b] = Pos::Lower;
                        self.x[b] = self.lb[b];
                    } else {
                        self.pos[b] = Pos::Upper;
                        self.x[b] = self.ub[b];
                    }
                    self.pivot(r, q);
                }
            }
        }
    }

    /// Moves a nonbasic variable onto its new bounds and shifts the basic
    /// values to match; a basic variable out of its new bounds is left for
    /// the dual simplex.
    fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.lb[j] = lo;
        self.ub[j] = hi;
        if self.pos[j] == Pos::Basic {
            return;
        }
        let (p, v) = if lo == hi || (self.pos[j] == Pos::Lower && lo.is_finite()) {
            (Pos::Lower, lo)
        } else if self.pos[j] == Pos::Upper && hi.is_finite() {
            (Pos::Upper, hi)
        } else if lo.is_finite() {
            (Pos::Lower, lo)
        } else if hi.is_finite() {
            (Pos::Upper, hi)
        } else {
            (Pos::Zero, 0.0)
        };
        let delta = v - self.x[j];
        if delta != 0.0 {
            for i in 0..self.m {
                let a = self.t[i * self.nc + j];
                if a != 0.0 {
                    self.x[self.basis[i]] -= a * delta;
                }
            }
        }
        self.x[j] = v;
        self.pos[j] = p;
    }

    /// Appends rows to an optimal tableau. Their slacks enter the basis, so
    /// the basis stays dual feasible and only the new rows can be primal
    /// infeasible. Returns false (leaving `self` untouched) while an
    /// artificial is still basic.
    fn add_rows(&mut self, rows: &[&LpRow]) -> bool {
        if self.basis.iter().any(|&b| b >= self.first_art) {
            return false;
        }
        let (n, m, k) = (self.n_struct, self.m, rows.len());
        let nc = n + m + k;
        let mut t = vec![0.0; (m + k) * nc];
        for i in 0..m {
            t[i * nc..i * nc + n + m].copy_from_slice(&self.t[i * self.nc..i * self.nc + n + m]);
        }
        self.lb.truncate(n + m);
        self.ub.truncate(n + m);
        self.pos.truncate(n + m);
        self.x.truncate(n + m);
        self.cost.truncate(n + m);
        self.d.truncate(n + m);
        for (r, row) in rows.iter().enumerate() {
            let i = m + r;
            let (l, u) = match row.rel {
                Relation::Le => (0.0, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (0.0, 0.0),
            };
            self.lb.push(l);
            self.ub.push(u);
            self.pos.push(Pos::Basic);
            self.x.push(row.rhs - row.activity(&self.x[..n]));
            self.cost.push(0.0);
            self.d.push(0.0);
            let (old, new) = t.split_at_mut(i * nc);
            let new = &mut new[..nc];
            for (&j, &v) in row.idx.iter().zip(&row.val) {
                new[j] += v;
            }
            new[n + i] = 1.0;
            for (l, &b) in self.basis.iter().enumerate() {
                let f = new[b];
                if f != 0.0 {
                    let src = &old[l * nc..(l + 1) * nc];
                    for (v, &s) in new.iter_mut().zip(src) {
                        if s != 0.0 {
                            *v -= f * s;
                        }
                    }
                    new[b] = 0.0;
                }
            }
            for v in new.iter_mut() {
                if v.abs() < DROP_TOL {
                    *v = 0.0;
                }
            }
        }
        self.basis.extend(n + m..n + m + k);
        self.t = t;
        self.m = m + k;
        self.nc = nc;
        self.first_art = nc;
        self.max_iterations = self.iterations + 50_000 + 50 * (self.m + nc);
        true
    }

    /// Bounded dual simplex from a dual-feasible basis, giving up after
    /// `budget` pivots.
    fn run_dual(&mut self, budget: usize) -> Result<DualEnd> {
        let mut stall = 0usize;
        let nc = self.nc;
        let stop = self.iterations + budget;
        loop {
            self.iterations += 1;
            if self.iterations > stop {
                return Ok(DualEnd::GaveUp);
            }
            if self.iterations > self.max_iterations {
                return Err(Error::Solver(format!(
                    "dual simplex iteration limit {} reached ({} rows, {} columns)",
                    self.max_iterations, self.m, self.nc
                )));
            }
            if self.iterations % 32 == 0 {
                if let Some(dl) = self.deadline {
                    if Instant::now() >= dl {
                        return Ok(DualEnd::TimeLimit);
                    }
                }
            }
            let bland = stall >= STALL_LIMIT;
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let b = self.basis[i];
                let v = self.x[b];
                let infeas = (self.lb[b] - v).max(v - self.ub[b]);
                if infeas > FEAS_TOL {
                    if bland {
                        if leave.map_or(true, |(li, _)| b < self.basis[li]) {
                            leave = Some((i, infeas));
                        }
                    } else if leave.map_or(true, |(_, li)| infeas > li) {
                        leave = Some((i, infeas));
                    }
                }
            }
            let Some((r, _)) = leave else {
                return Ok(DualEnd::Optimal);
            };
            let b = self.basis[r];
            let below = self.x[b] < self.lb[b];
            let target = if below { self.lb[b] } else { self.ub[b] };
            // x_b = const - Σ t_rj x_j; `sgn` is the sign t_rj must have for
            // an increase of x_j to move x_b toward its bound.
            let sgn = if below { -1.0 } else { 1.0 };
            let row = &self.t[r * nc..(r + 1) * nc];
            let eligible = |j: usize| -> Option<f64> {
                let a = row[j];
                if a.abs() <= PIVOT_TOL || self.lb[j] == self.ub[j] {
                    return None;
                }
                let ok = match self.pos[j] {
                    Pos::Basic => false,
                    Pos::Lower => a * sgn > 0.0,
                    Pos::Upper => a * sgn < 0.0,
                    Pos::Zero => true,
                };
                ok.then_some(a)
            };
            let mut max_step = f64::INFINITY;
            for j in 0..nc {
                if let Some(a) = eligible(j) {
                    max_step = max_step.min((self.d[j].abs() + OPT_TOL) / a.abs());
                }
            }
            if !max_step.is_finite() {
                return Ok(DualEnd::Infeasible);
            }
            let mut best: Option<(usize, f64, f64)> = None;
            for j in 0..nc {
                if let Some(a) = eligible(j) {
                    let ratio = self.d[j].abs() / a.abs();
                    if ratio > max_step {
                        continue;
                    }
                    let better = match best {
                        None => true,
                        Some((bj, br, ba)) => {
                            if bland {
                                ratio < br - 1e-12 || (ratio <= br + 1e-12 && j < bj)
                            } else {
                                a.abs() > ba
                            }
                        }
                    };
                    if better {
                        best = Some((j, ratio, a.abs()));
                    }
                }
            }
            let (q, _, _) = best.expect("an eligible column exists");
            if self.d[q].abs() > 1e-12 {
                stall = 0;
            } else {
                stall += 1;
            }
            let step = (self.x[b] - target) / row[q];
            if step != 0.0 {
                for i in 0..self.m {
                    let a = self.t[i * nc + q];
                    if a != 0.0 {
                        self.x[self.basis[i]] -= a * step;
                    }
                }
                self.x[q] += step;
            }
            self.x[b] = target;
            self.pos[b] = if below { Pos::Lower } else { Pos::Upper };
            self.pivot(r, q);
        }
    }

    /// Pivots basic artificials out where possible and fixes all
    /// artificials at zero.
    fn retire_artificials(&mut self) {
        for i in 0..self.m {
            if self.basis[i] < self.first_art {
                continue;
            }
            let row = &self.t[i * self.nc..(i + 1) * self.nc];
            let mut best: Option<(usize, f64)> = None;
            for (j, &v) in row[..self.first_art].iter().enumerate() {
                if self.pos[j] != Pos::Basic
                    && v.abs() > 1e-7
                    && best.map_or(true, |(_, bv)| v.abs() > bv)
                {
                    best = Some((j, v.abs()));
                }
            }
            if let Some((q, _)) = best {
                let art = self.basis[i];
                self.pivot(i, q);
                self.pos[art] = Pos::Lower;
                self.x[art] = 0.0;
            }
        }
        for j in self.first_art..self.nc {
            self.lb[j] = 0.0;
            self.ub[j] = 0.0;
            if self.pos[j] != Pos::Basic {
                self.x[j] = 0.0;
            }
        }
    }
}

fn result(tab: &Tableau, status: LpStatus) -> LpResult {
    LpResult {
        status,
        x: tab.x[..tab.n_struct].to_vec(),
        objective: tab.cost[..tab.n_struct]
            .iter()
            .zip(&tab.x)
            .map(|(c, x)| c * x)
            .sum(),
        iterations: tab.iterations,
    }
}

fn infeasible_bounds() -> LpResult {
    LpResult {
        status: LpStatus::Infeasible,
        x: Vec::new(),
        objective: f64::NAN,
        iterations: 0,
    }
}

/// An LP kept in memory so rows can be added or bounds changed and the
/// optimum recovered from the previous basis.
#[derive(Clone)]
pub(crate) struct Session {
    tab: Tableau,
}

impl Session {
    /// Cold solve. The session is returned only for an optimal LP.
    pub fn start(
        cost: &[f64],
        lower: &[f64],
        upper: &[f64],
        rows: &[&LpRow],
        deadline: Option<Instant>,
    ) -> Result<(LpResult, Option<Session>)> {
        let n = cost.len();
        if (0..n).any(|j| lower[j] > upper[j] + FEAS_TOL) {
            return Ok((infeasible_bounds(), None));
        }
        let mut tab = Tableau::build(n, lower, upper, rows, deadline);
        if tab.first_art < tab.nc {
            let mut c1 = vec![0.0; tab.nc];
            c1[tab.first_art..].iter_mut().for_each(|c| *c = 1.0);
            tab.set_cost(c1);
            match tab.run_phase()? {
                PhaseEnd::TimeLimit => return Ok((result(&tab, LpStatus::TimeLimit), None)),
                PhaseEnd::Unbounded => {
                    return Err(Error::Solver("phase one reported an unbounded ray".into()))
                }
                PhaseEnd::Optimal => {}
            }
            let scale = 1.0 + rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
            if tab.objective() > FEAS_TOL * scale * 10.0 {
                return Ok((result(&tab, LpStatus::Infeasible), None));
            }
            tab.retire_artificials();
        }
        let mut c2 = vec![0.0; tab.nc];
        c2[..n].copy_from_slice(cost);
        tab.set_cost(c2);
        let status = match tab.run_phase()? {
            PhaseEnd::Optimal => LpStatus::Optimal,
            PhaseEnd::Unbounded => LpStatus::Unbounded,
            PhaseEnd::TimeLimit => LpStatus::TimeLimit,
        };
        let res = result(&tab, status);
        let session = (status == LpStatus::Optimal).then_some(Session { tab });
        Ok((res, session))
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.tab.lb[j], self.tab.ub[j])
    }

    /// Adds rows, changes structural bounds, and re-optimizes with the dual
    /// simplex. `None` means a cold start is needed: rows cannot be added
    /// while an artificial is basic, or the dual simplex stalled.
    pub fn update(
        mut self,
        rows: &[&LpRow],
        bounds: &[(usize, f64, f64)],
    ) -> Result<Option<(LpResult, Option<Session>)>> {
        if !rows.is_empty() && !self.tab.add_rows(rows) {
            return Ok(None);
        }
        for &(j, lo, hi) in bounds {
            if lo > hi + FEAS_TOL {
                return Ok(Some((infeasible_bounds(), None)));
            }
            self.tab.set_bounds(j, lo, hi);
        }
        let budget = DUAL_BUDGET_BASE + DUAL_BUDGET_PER_ROW * (rows.len() + bounds.len());
        let status = match self.tab.run_dual(budget)? {
            DualEnd::GaveUp => return Ok(None),
            DualEnd::Infeasible => LpStatus::Infeasible,
            DualEnd::TimeLimit => LpStatus::TimeLimit,
            // clean up reduced costs that drifted past the tolerance, or
            // that a bound change left with the wrong sign
            DualEnd::Optimal => match self.tab.run_phase()? {
                PhaseEnd::Optimal => LpStatus::Optimal,
                PhaseEnd::Unbounded => LpStatus::Unbounded,
                PhaseEnd::TimeLimit => LpStatus::TimeLimit,
            },
        };
        let res = result(&self.tab, status);
        let session = (status == LpStatus::Optimal).then_some(self);
        Ok(Some((res, session)))
    }
}

/// Minimizes `cost · x` subject to `rows` and `lower ≤ x ≤ upper`.
#[cfg(test)]
pub(crate) fn solve(
    cost: &[f64],
    lower: &[f64],
    upper: &[f64],
    rows: &[&LpRow],
    deadline: Option<Instant>,
) -> Result<LpResult> {
    Session::start(cost, lower, upper, rows, deadline).map(|(r, _)| r)
}
