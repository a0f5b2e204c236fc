//! LP relaxation of the reduced problem with lazily activated rows.
//!
//! Equality rows are always in the working set. Inequality rows join it the
//! first time an LP optimum violates them; once active they stay active for
//! every later solve (including other branch-and-bound nodes), so the pool
//! only grows and the loop terminates. A solve may continue from an earlier
//! optimal tableau: missing rows and changed bounds are applied to it instead
//! of starting over.

use std::time::Instant;

use super::presolve::Reduced;
use super::simplex::{LpRow, LpStatus, Session};
use super::Relation;
use crate::error::Result;

/// Rows violated by less than this are considered satisfied.
const ROW_TOL: f64 = 1e-9;
/// Maximum number of rows activated per round.
const ROWS_PER_ROUND: usize = 200;

#[derive(Debug, Clone)]
pub(crate) struct RowPool {
    active: Vec<bool>,
}

impl RowPool {
    pub fn new(rows: &[LpRow]) -> Self {
        Self {
            active: rows
                .iter()
                .map(|r| r.rel == Relation::Eq || r.idx.len() <= 2)
                .collect(),
        }
    }

    pub fn activate_all(&mut self) {
        self.active.iter_mut().for_each(|a| *a = true);
    }

    fn all_active(&self) -> bool {
        self.active.iter().all(|&a| a)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct LpOutcome {
    pub status: LpStatus,
    pub x: Vec<f64>,
    /// Includes the reduced objective constant.
    pub objective: f64,
}

/// A solved LP that a later solve can continue from.
#[derive(Clone)]
pub(crate) struct LpState {
    session: Session,
    /// Pool rows present in the tableau.
    rows: Vec<bool>,
}

/// Solves the relaxation under `lower..upper`, continuing from `warm` when
/// given. The returned state is present when the LP is optimal.
pub(crate) fn solve_relaxation(
    prob: &Reduced,
    lower: &[f64],
    upper: &[f64],
    pool: &mut RowPool,
    deadline: Option<Instant>,
    warm: Option<LpState>,
) -> Result<(LpOutcome, Option<LpState>)> {
    let mut state = warm;
    let mut bound_changes: Vec<(usize, f64, f64)> = Vec::new();
    if let Some(st) = &state {
        for j in 0..prob.n() {
            if st.session.bounds(j) != (lower[j], upper[j]) {
                bound_changes.push((j, lower[j], upper[j]));
            }
        }
    }
    loop {
        let warm = match state.take() {
            Some(mut st) => {
                let idx: Vec<usize> = (0..prob.rows.len())
                    .filter(|&i| pool.active[i] && !st.rows[i])
                    .collect();
                let rows: Vec<&LpRow> = idx.iter().map(|&i| &prob.rows[i]).collect();
                idx.iter().for_each(|&i| st.rows[i] = true);
                let changes = std::mem::take(&mut bound_changes);
                st.session
                    .update(&rows, &changes)?
                    .map(|(res, sess)| (res, sess.map(|session| LpState { session, rows: st.rows })))
            }
            None => None,
        };
        let (res, next) = match warm {
            Some(r) => r,
            None => {
                let rows: Vec<&LpRow> = prob
                    .rows
                    .iter()
                    .zip(&pool.active)
                    .filter_map(|(r, &a)| a.then_some(r))
                    .collect();
                let (res, sess) = Session::start(&prob.cost, lower, upper, &rows, deadline)?;
                let st = sess.map(|session| LpState {
                    session,
                    rows: pool.active.clone(),
                });
                (res, st)
            }
        };
        log::trace!("lp: {} pivots, {:?}", res.iterations, res.status);
        match res.status {
            LpStatus::Optimal => {}
            LpStatus::Unbounded if !pool.all_active() => {
                pool.activate_all();
                continue;
            }
            status => {
                return Ok((
                    LpOutcome {
                        status,
                        x: res.x,
                        objective: f64::NAN,
                    },
                    None,
                ))
            }
        }
        let mut violated: Vec<(f64, usize)> = prob
            .rows
            .iter()
            .enumerate()
            .filter(|(i, _)| !pool.active[*i])
            .filter_map(|(i, r)| {
                let v = r.violation(&res.x);
                (v > ROW_TOL).then(|| (v / r.norm().max(1e-12), i))
            })
            .collect();
        if violated.is_empty() {
            return Ok((
                LpOutcome {
                    status: LpStatus::Optimal,
                    objective: res.objective + prob.obj_constant,
                    x: res.x,
                },
                next,
            ));
        }
        violated.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for &(_, i) in violated.iter().take(ROWS_PER_ROUND) {
            pool.active[i] = true;
        }
        state = next;
    }
}
