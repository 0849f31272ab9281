//! Pure-Rust backend based on the microlp simplex + branch-and-bound crate.

use std::time::Instant;

use super::{
    AbstractModel, BackendId, MilpBackend, RowSense, Sense, SolveLimits, SolveOutcome, SolveStatus,
    SolverError, Tolerances, VarKind,
};

pub struct MicrolpBackend;

// microlp does not expose its tolerances; these are the values documented in
// its solver internals, echoed so results files can state what was run.
const TOLERANCES: Tolerances = Tolerances {
    feasibility: 1e-8,
    integrality: 1e-5,
};

impl MilpBackend for MicrolpBackend {
    fn id(&self) -> BackendId {
        BackendId::Microlp
    }

    fn solve(
        &self,
        model: &AbstractModel,
        limits: &SolveLimits,
    ) -> Result<SolveOutcome, SolverError> {
        model.check()?;
        let start = Instant::now();

        let direction = match model.sense {
            Sense::Minimize => microlp::OptimizationDirection::Minimize,
            Sense::Maximize => microlp::OptimizationDirection::Maximize,
        };
        let mut problem = microlp::Problem::new(direction);
        if let Some(t) = limits.time {
            problem.set_time_limit(t);
        }

        let vars: Vec<microlp::Variable> = model
            .vars()
            .iter()
            .map(|v| match v.kind {
                VarKind::Continuous => problem.add_var(v.obj, (v.lb, v.ub)),
                VarKind::Binary => problem.add_integer_var(v.obj, (0, 1)),
            })
            .collect();

        for row in model.rows() {
            let op = match row.sense {
                RowSense::Le => microlp::ComparisonOp::Le,
                RowSense::Ge => microlp::ComparisonOp::Ge,
                RowSense::Eq => microlp::ComparisonOp::Eq,
            };
            let expr: Vec<(microlp::Variable, f64)> =
                row.coeffs.iter().map(|&(v, c)| (vars[v.0], c)).collect();
            problem.add_constraint(expr, op, row.rhs);
        }

        let outcome = |status, objective, values| SolveOutcome {
            status,
            objective,
            values,
            dual_rows: None,
            wall: start.elapsed(),
            tolerances: TOLERANCES,
            backend: BackendId::Microlp,
        };

        match problem.solve() {
            Ok(result) => {
                let status = if result.is_optimal() {
                    SolveStatus::Optimal
                } else {
                    SolveStatus::Limit
                };
                match result.into_solution() {
                    Ok(sol) => {
                        let values: Vec<f64> = vars.iter().map(|&v| sol[v]).collect();
                        Ok(outcome(status, Some(sol.objective()), Some(values)))
                    }
                    Err(_) => Ok(outcome(SolveStatus::Limit, None, None)),
                }
            }
            Err(microlp::Error::Infeasible) => Ok(outcome(SolveStatus::Infeasible, None, None)),
            Err(microlp::Error::Unbounded) => Ok(outcome(SolveStatus::Unbounded, None, None)),
            Err(other) => Err(SolverError::BackendFailure {
                backend: BackendId::Microlp,
                message: other.to_string(),
            }),
        }
    }
}
