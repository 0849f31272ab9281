//! HiGHS backend (C++ solver linked via highs-sys).

use std::ops::Bound;
use std::time::Instant;

use highs::{HighsModelStatus, HighsSolutionStatus, RowProblem};

use super::{
    AbstractModel, BackendId, MilpBackend, RowSense, Sense, SolveLimits, SolveOutcome, SolveStatus,
    SolverError, Tolerances, VarKind,
};

pub struct HighsBackend;

const TOLERANCES: Tolerances = Tolerances {
    feasibility: 1e-7,
    integrality: 1e-6,
};

impl MilpBackend for HighsBackend {
    fn id(&self) -> BackendId {
        BackendId::Highs
    }

    fn solve(
        &self,
        model: &AbstractModel,
        limits: &SolveLimits,
    ) -> Result<SolveOutcome, SolverError> {
        model.check()?;
        let start = Instant::now();

        let mut pb = RowProblem::default();
        let cols: Vec<highs::Col> = model
            .vars()
            .iter()
            .map(|v| {
                let bounds = (Bound::Included(v.lb), Bound::Included(v.ub));
                match v.kind {
                    VarKind::Continuous => pb.add_column(v.obj, bounds),
                    VarKind::Binary => pb.add_integer_column(v.obj, 0..=1),
                }
            })
            .collect();

        for row in model.rows() {
            let coeffs: Vec<(highs::Col, f64)> =
                row.coeffs.iter().map(|&(v, c)| (cols[v.0], c)).collect();
            match row.sense {
                RowSense::Le => pb.add_row(..=row.rhs, coeffs),
                RowSense::Ge => pb.add_row(row.rhs.., coeffs),
                RowSense::Eq => pb.add_row(row.rhs..=row.rhs, coeffs),
            };
        }

        let sense = match model.sense {
            Sense::Minimize => highs::Sense::Minimise,
            Sense::Maximize => highs::Sense::Maximise,
        };
        let mut m = pb.optimise(sense);
        m.set_option("output_flag", false);
        // single-threaded with a pinned seed so repeated runs return the
        // same vertex among ties
        m.set_option("threads", 1);
        m.set_option("random_seed", 0);
        m.set_option("primal_feasibility_tolerance", TOLERANCES.feasibility);
        m.set_option("dual_feasibility_tolerance", TOLERANCES.feasibility);
        m.set_option("mip_feasibility_tolerance", TOLERANCES.integrality);
        if let Some(t) = limits.time {
            m.set_option("time_limit", t.as_secs_f64());
        }

        let solved = m.try_solve().map_err(|s| SolverError::BackendFailure {
            backend: BackendId::Highs,
            message: format!("{s:?}"),
        })?;

        let has_integers = model.has_integers();
        let fetch = |solved: &highs::SolvedModel| {
            let sol = solved.get_solution();
            let values = sol.columns().to_vec();
            let duals = if has_integers {
                None
            } else {
                Some(sol.dual_rows().to_vec())
            };
            (values, duals)
        };

        let outcome = |status, objective, values, dual_rows| SolveOutcome {
            status,
            objective,
            values,
            dual_rows,
            wall: start.elapsed(),
            tolerances: TOLERANCES,
            backend: BackendId::Highs,
        };

        match solved.status() {
            HighsModelStatus::Optimal => {
                let obj = solved.objective_value();
                let (values, duals) = fetch(&solved);
                Ok(outcome(
                    SolveStatus::Optimal,
                    Some(obj),
                    Some(values),
                    duals,
                ))
            }
            HighsModelStatus::Infeasible => Ok(outcome(SolveStatus::Infeasible, None, None, None)),
            HighsModelStatus::Unbounded | HighsModelStatus::UnboundedOrInfeasible => {
                Ok(outcome(SolveStatus::Unbounded, None, None, None))
            }
            HighsModelStatus::ReachedTimeLimit
            | HighsModelStatus::ReachedIterationLimit
            | HighsModelStatus::ReachedSolutionLimit
            | HighsModelStatus::ReachedInterrupt => {
                if solved.primal_solution_status() == HighsSolutionStatus::Feasible {
                    let obj = solved.objective_value();
                    let (values, duals) = fetch(&solved);
                    Ok(outcome(SolveStatus::Limit, Some(obj), Some(values), duals))
                } else {
                    Ok(outcome(SolveStatus::Limit, None, None, None))
                }
            }
            other => Err(SolverError::BackendFailure {
                backend: BackendId::Highs,
                message: format!("unexpected model status {other:?}"),
            }),
        }
    }
}
