//! Column-and-constraint generation over the tri-level game.
//!
//! Iterates between the master problem (best defense against the attack
//! pool, a lower bound) and the subproblem (worst attack against that
//! defense, an upper bound when it beats the incumbent), growing the pool
//! until the bounds meet or the subproblem repeats itself. Attacks are
//! binary vectors over a finite set, so termination is finite.

use std::time::Instant;

use crate::error::{DadError, Result};
use crate::master::build_master;
use crate::model::{
    AttackPlan, AuditSummary, BoundsEntry, BoundsTrace, DadSolution, DefensePlan, NetworkInstance,
    ScenarioConfig, StopReason,
};
use crate::operator::solve_operator;
use crate::solver::{MilpBackend, SolveLimits};
use crate::subproblem::{build_subproblem, solve_subproblem, AttackCoupling};

/// Relative slack accepted between the subproblem value and the re-solved
/// primal before the run is declared unsound (big-M too small or backend
/// trouble).
const AUDIT_REL_TOL: f64 = 1e-5;

fn remaining(deadline: Option<Instant>) -> Result<SolveLimits> {
    match deadline {
        None => Ok(SolveLimits::default()),
        Some(d) => {
            let left = d.saturating_duration_since(Instant::now());
            if left.is_zero() {
                Err(DadError::LimitExceeded("ccg time limit".into()))
            } else {
                Ok(SolveLimits { time: Some(left) })
            }
        }
    }
}

/// Solves the full defender-attacker-defender game for one scenario.
pub fn ccg_solve(
    inst: &NetworkInstance,
    scen: &ScenarioConfig,
    backend: &dyn MilpBackend,
) -> Result<DadSolution> {
    let report = scen.validate(inst);
    if !report.is_pass() {
        return Err(DadError::Validation(report));
    }
    let started = Instant::now();
    let deadline = scen.time_limit.map(|t| started + t);

    let mut attacks = vec![AttackPlan::none(scen)];
    let mut master = build_master(inst, scen, &attacks)?;

    let mut trace = BoundsTrace::default();
    let mut best_ub = f64::INFINITY;
    let mut best_defense = DefensePlan::none(scen);
    let mut worst_attack = AttackPlan::none(scen);
    let mut lower = f64::NEG_INFINITY;
    let mut audit_checks = 0usize;
    let mut audit_max_rel: f64 = 0.0;
    let mut audit_max_util: f64 = 0.0;
    let mut stop = StopReason::IterationCap;
    let mut iterations = 0usize;

    for iter in 1..=scen.max_iterations {
        iterations = iter;
        let limits = match remaining(deadline) {
            Ok(l) => l,
            Err(_) => {
                stop = StopReason::TimeLimit;
                iterations = iter - 1;
                break;
            }
        };
        let (defense, lb) = master.solve(scen, backend, &limits)?;
        lower = lb;

        let limits = match remaining(deadline) {
            Ok(l) => l,
            Err(_) => {
                stop = StopReason::TimeLimit;
                break;
            }
        };
        let sp = build_subproblem(inst, scen, &defense, &AttackCoupling::Binary)?;
        let out = solve_subproblem(&sp, scen, backend, &limits)?;

        if scen.audit_strong_duality {
            let primal = solve_operator(inst, scen, &defense, &out.attack, backend, &limits)?;
            let rel = (out.value - primal.objective).abs() / primal.objective.abs().max(1.0);
            audit_checks += 1;
            audit_max_rel = audit_max_rel.max(rel);
            audit_max_util = audit_max_util.max(out.max_m_utilization);
            if rel > AUDIT_REL_TOL {
                return Err(DadError::Model(format!(
                    "strong-duality audit failed at iteration {iter}: subproblem {} vs \
                     operator {} (relative {rel:.2e}); the big-M policy is likely too \
                     small for this cost structure - set a scenario override",
                    out.value, primal.objective
                )));
            }
            if out.max_m_utilization > 0.99 {
                return Err(DadError::Model(format!(
                    "interdiction dual reached {:.1}% of its big-M at iteration {iter}; \
                     raise the scenario big-M override",
                    out.max_m_utilization * 100.0
                )));
            }
        }

        if out.value < best_ub {
            best_ub = out.value;
            best_defense = defense.clone();
            worst_attack = out.attack.clone();
        }
        trace.entries.push(BoundsEntry {
            iteration: iter,
            lower: lb,
            sp_value: out.value,
            best_upper: best_ub,
        });

        let gap = best_ub - lb;
        if gap <= scen.epsilon_gap * best_ub.abs().max(1.0) {
            stop = StopReason::Converged;
            break;
        }
        if attacks.contains(&out.attack) {
            // a repeated attack cannot tighten the master: the bounds have met
            stop = StopReason::RepeatAttack;
            break;
        }
        attacks.push(out.attack.clone());
        master.append_attack(inst, scen, &out.attack)?;
    }

    let gap = best_ub - lower;
    let certified = gap <= scen.epsilon_gap * best_ub.abs().max(1.0)
        || matches!(stop, StopReason::Converged | StopReason::RepeatAttack);
    Ok(DadSolution {
        defense: best_defense,
        attacks,
        worst_attack,
        objective: best_ub,
        lower_bound: lower,
        gap,
        certified,
        stop,
        iterations,
        trace,
        wall: started.elapsed(),
        audit: scen.audit_strong_duality.then_some(AuditSummary {
            max_rel_gap: audit_max_rel,
            max_m_utilization: audit_max_util,
            checks: audit_checks,
        }),
    })
}

/// Number of distinct budget-feasible attack vectors (the hard ceiling on
/// CCG iterations).
pub fn count_feasible_attacks(scen: &ScenarioConfig) -> u128 {
    fn choose(n: u128, k: u128) -> u128 {
        if k > n {
            return 0;
        }
        let mut acc: u128 = 1;
        for i in 0..k {
            acc = acc * (n - i) / (i + 1);
        }
        acc
    }
    scen.cells
        .values()
        .map(|cell| {
            let n = cell.attackable.len() as u128;
            (0..=cell.n_attack.min(cell.attackable.len() as u32) as u128)
                .map(|k| choose(n, k))
                .sum::<u128>()
        })
        .product()
}
