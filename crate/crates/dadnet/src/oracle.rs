//! Exhaustive minimax oracle: enumerate every budget-feasible defense and
//! attack, solve the operator LP per cell, and take min over defenses of
//! the max over attacks. Exponential in the designated sets, it exists to
//! certify `ccg_solve` on small instances and to power the `oracle` CLI
//! command.

use std::collections::HashMap;

use crate::error::{DadError, Result};
use crate::model::{
    AttackPlan, CellKey, DefensePlan, NetworkInstance, PlanBits, PlanSet, ScenarioConfig,
};
use crate::operator::solve_operator;
use crate::solver::{MilpBackend, SolveLimits};

#[derive(Debug, Clone)]
pub struct OracleOutcome {
    /// Exact game value.
    pub value: f64,
    pub defense: DefensePlan,
    /// Maximizing attack against the optimal defense.
    pub worst_attack: AttackPlan,
    /// Number of (defense, attack) cells visited.
    pub cells: usize,
    /// Distinct operator LPs actually solved (interdiction-equivalent cells
    /// are cached).
    pub lp_solves: usize,
}

/// All bit vectors of length `n` with at most `k` ones.
fn subsets_up_to(n: usize, k: usize) -> Vec<Vec<bool>> {
    let mut out = Vec::new();
    let mut current = vec![false; n];
    fn rec(i: usize, left: usize, current: &mut Vec<bool>, out: &mut Vec<Vec<bool>>) {
        if i == current.len() {
            out.push(current.clone());
            return;
        }
        current[i] = false;
        rec(i + 1, left, current, out);
        if left > 0 {
            current[i] = true;
            rec(i + 1, left - 1, current, out);
            current[i] = false;
        }
    }
    rec(0, k, &mut current, &mut out);
    out
}

/// Cartesian product of per-cell bit choices into full plan vectors.
fn plans_over_cells(cells: &[(CellKey, Vec<Vec<bool>>)], template: &PlanBits) -> Vec<PlanBits> {
    let mut out = vec![template.clone()];
    for (key, choices) in cells {
        let mut next = Vec::with_capacity(out.len() * choices.len());
        for base in &out {
            for choice in choices {
                let mut plan = base.clone();
                plan.bits.insert(*key, choice.clone());
                next.push(plan);
            }
        }
        out = next;
    }
    out
}

fn enumerate_defenses(scen: &ScenarioConfig) -> Vec<DefensePlan> {
    let d_cells: Vec<(CellKey, Vec<Vec<bool>>)> = scen
        .cells
        .iter()
        .map(|(k, c)| (*k, subsets_up_to(c.attackable.len(), c.n_defend as usize)))
        .collect();
    let o_cells: Vec<(CellKey, Vec<Vec<bool>>)> = scen
        .cells
        .iter()
        .map(|(k, c)| (*k, subsets_up_to(c.reserves.len(), c.n_open as usize)))
        .collect();
    let template = DefensePlan::none(scen);
    let defends = plans_over_cells(&d_cells, &template.defend);
    let opens = plans_over_cells(&o_cells, &template.open);
    let mut out = Vec::with_capacity(defends.len() * opens.len());
    for d in &defends {
        for o in &opens {
            out.push(DefensePlan {
                defend: d.clone(),
                open: o.clone(),
            });
        }
    }
    out
}

fn enumerate_attacks(scen: &ScenarioConfig) -> Vec<AttackPlan> {
    let cells: Vec<(CellKey, Vec<Vec<bool>>)> = scen
        .cells
        .iter()
        .map(|(k, c)| (*k, subsets_up_to(c.attackable.len(), c.n_attack as usize)))
        .collect();
    plans_over_cells(&cells, &AttackPlan::none(scen).attack)
        .into_iter()
        .map(|attack| AttackPlan { attack })
        .collect()
}

/// Key for the LP cache: only the effective outcome matters, i.e. which S
/// nodes are knocked out (attacked and undefended) and which reserves are
/// open.
fn effective_key(scen: &ScenarioConfig, defense: &DefensePlan, attack: &AttackPlan) -> Vec<u8> {
    let mut key = Vec::new();
    for (cell, c) in &scen.cells {
        for idx in 0..c.attackable.len() {
            let killed = attack.attack.get(*cell, idx) && !defense.defend.get(*cell, idx);
            key.push(killed as u8);
        }
        for idx in 0..c.reserves.len() {
            key.push(defense.open.get(*cell, idx) as u8);
        }
    }
    key
}

/// Exact game value by enumeration. `cap` bounds the number of
/// (defense, attack) cells; exceeding it is an error rather than a stall.
pub fn enumerate_minimax(
    inst: &NetworkInstance,
    scen: &ScenarioConfig,
    backend: &dyn MilpBackend,
    cap: usize,
) -> Result<OracleOutcome> {
    let report = scen.validate(inst);
    if !report.is_pass() {
        return Err(DadError::Validation(report));
    }
    let defenses = enumerate_defenses(scen);
    let attacks = enumerate_attacks(scen);
    let cells = defenses.len() * attacks.len();
    if cells > cap {
        return Err(DadError::LimitExceeded(format!(
            "oracle would visit {cells} cells (cap {cap})"
        )));
    }

    let mut cache: HashMap<Vec<u8>, f64> = HashMap::new();
    let mut lp_solves = 0usize;
    let mut best: Option<(f64, DefensePlan, AttackPlan)> = None;

    for defense in &defenses {
        let mut worst: Option<(f64, AttackPlan)> = None;
        for attack in &attacks {
            let key = effective_key(scen, defense, attack);
            let value = match cache.get(&key) {
                Some(&v) => v,
                None => {
                    let sol = solve_operator(
                        inst,
                        scen,
                        defense,
                        attack,
                        backend,
                        &SolveLimits::default(),
                    )?;
                    lp_solves += 1;
                    cache.insert(key, sol.objective);
                    sol.objective
                }
            };
            if worst.as_ref().is_none_or(|(w, _)| value > *w) {
                worst = Some((value, attack.clone()));
            }
        }
        let (value, attack) = worst.expect("at least the zero attack");
        if best.as_ref().is_none_or(|(b, ..)| value < *b) {
            best = Some((value, defense.clone(), attack));
        }
    }
    let (value, defense, worst_attack) = best.expect("at least the zero defense");
    let _ = PlanSet::Attackable;
    Ok(OracleOutcome {
        value,
        defense,
        worst_attack,
        cells,
        lp_solves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::NetworkInstance;
    use crate::solver::select_backend;

    #[test]
    fn subset_counts() {
        assert_eq!(subsets_up_to(4, 0).len(), 1);
        assert_eq!(subsets_up_to(4, 1).len(), 5);
        assert_eq!(subsets_up_to(4, 2).len(), 11);
        assert_eq!(subsets_up_to(0, 3).len(), 1);
    }

    #[test]
    fn zero_budgets_single_lp() {
        let inst = NetworkInstance::build(&fixtures::two_depot_spec()).unwrap();
        let scen = fixtures::two_depot_scenario(&inst, (0, 0, 0));
        let backend = select_backend(None).unwrap();
        let out = enumerate_minimax(&inst, &scen, backend.as_ref(), 100).unwrap();
        assert_eq!(out.cells, 1);
        assert_eq!(out.lp_solves, 1);
        assert!((out.value - 28.0).abs() < 1e-5);
    }

    #[test]
    fn defended_everything_recovers_no_attack_value() {
        let inst = NetworkInstance::build(&fixtures::two_depot_spec()).unwrap();
        let scen = fixtures::two_depot_scenario(&inst, (2, 0, 2));
        let backend = select_backend(None).unwrap();
        let out = enumerate_minimax(&inst, &scen, backend.as_ref(), 1_000).unwrap();
        assert!((out.value - 28.0).abs() < 1e-5, "{}", out.value);
        assert_eq!(out.defense.defend.count(), 2);
    }

    #[test]
    fn cap_enforced() {
        let inst = NetworkInstance::build(&fixtures::sweep_spec()).unwrap();
        let scen = fixtures::sweep_scenario(&inst, (2, 2, 2));
        let backend = select_backend(None).unwrap();
        let err = enumerate_minimax(&inst, &scen, backend.as_ref(), 10).unwrap_err();
        assert!(matches!(err, DadError::LimitExceeded(_)));
    }

    #[test]
    fn cache_collapses_equivalent_cells() {
        let inst = NetworkInstance::build(&fixtures::two_depot_spec()).unwrap();
        let scen = fixtures::two_depot_scenario(&inst, (1, 0, 1));
        let backend = select_backend(None).unwrap();
        let out = enumerate_minimax(&inst, &scen, backend.as_ref(), 10_000).unwrap();
        // effective outcomes: {} (incl. defended hits), {d1}, {d2}
        assert_eq!(
            out.lp_solves, 3,
            "cells {} solves {}",
            out.cells, out.lp_solves
        );
        assert!((out.value - 212.0).abs() < 1e-4);
    }
}
