//! The CCG master problem MP(I): choose a defense (hardening + reserve
//! openings) minimizing an epigraph variable that dominates the operator
//! cost under every attack generated so far. One full operator block is
//! embedded per attack; all blocks share the defender binaries.

use std::collections::BTreeMap;

use crate::error::{DadError, Result};
use crate::model::{AttackPlan, CellKey, DefensePlan, NetworkInstance, PlanSet, ScenarioConfig};
use crate::operator::{append_operator_block, DefenseCoupling, OperatorVars};
use crate::solver::{AbstractModel, MilpBackend, RowSense, Sense, SolveLimits, VarId};

#[derive(Debug)]
pub struct MasterModel {
    pub model: AbstractModel,
    pub eta: VarId,
    pub defend: BTreeMap<(CellKey, usize), VarId>,
    pub open: BTreeMap<(CellKey, usize), VarId>,
    pub blocks: Vec<(AttackPlan, OperatorVars)>,
}

/// Builds MP(I) for a distinct set of attacks (the CCG loop seeds it with
/// the zero attack so the epigraph is bounded from iteration one).
pub fn build_master(
    inst: &NetworkInstance,
    scen: &ScenarioConfig,
    attacks: &[AttackPlan],
) -> Result<MasterModel> {
    let mut model = AbstractModel::new(format!("master[{}]", inst.name), Sense::Minimize);

    let mut defend = BTreeMap::new();
    let mut open = BTreeMap::new();
    for (key, cell) in &scen.cells {
        for idx in 0..cell.attackable.len() {
            defend.insert(
                (*key, idx),
                model.add_binary(format!("d.m{}.p{}.i{idx}", key.mode.0, key.phase), 0.0),
            );
        }
        for idx in 0..cell.reserves.len() {
            open.insert(
                (*key, idx),
                model.add_binary(format!("o.m{}.p{}.i{idx}", key.mode.0, key.phase), 0.0),
            );
        }
        model.add_row(
            format!("dbudget.m{}.p{}", key.mode.0, key.phase),
            (0..cell.attackable.len())
                .map(|i| (defend[&(*key, i)], 1.0))
                .collect(),
            RowSense::Le,
            cell.n_defend as f64,
        );
        model.add_row(
            format!("obudget.m{}.p{}", key.mode.0, key.phase),
            (0..cell.reserves.len())
                .map(|i| (open[&(*key, i)], 1.0))
                .collect(),
            RowSense::Le,
            cell.n_open as f64,
        );
    }
    // operator costs are nonnegative, so the epigraph may start at zero
    let eta = model.add_var("eta", 0.0, f64::INFINITY, 1.0);

    let mut master = MasterModel {
        model,
        eta,
        defend,
        open,
        blocks: Vec::new(),
    };
    for attack in attacks {
        master.append_attack(inst, scen, attack)?;
    }
    Ok(master)
}

impl MasterModel {
    /// Appends one operator copy parameterized by `attack` and links it to
    /// the epigraph. Rejects attacks already in the pool: the loop's
    /// termination argument rests on pool growth.
    pub fn append_attack(
        &mut self,
        inst: &NetworkInstance,
        scen: &ScenarioConfig,
        attack: &AttackPlan,
    ) -> Result<()> {
        if !attack.within_budgets(scen) {
            return Err(DadError::InvalidInput(
                "attack exceeds scenario budgets".into(),
            ));
        }
        if self.blocks.iter().any(|(a, _)| a == attack) {
            return Err(DadError::InvalidInput(
                "attack already present in master pool".into(),
            ));
        }
        let idx = self.blocks.len();
        let coupling = DefenseCoupling::Vars {
            defend: &self.defend,
            open: &self.open,
        };
        let vars = append_operator_block(
            &mut self.model,
            inst,
            scen,
            attack,
            &coupling,
            &format!("b{idx}."),
        );
        let mut link: Vec<(VarId, f64)> = vec![(self.eta, 1.0)];
        for &(var, c) in &vars.objective {
            link.push((var, -c));
        }
        self.model
            .add_row(format!("eta.b{idx}"), link, RowSense::Ge, 0.0);
        self.blocks.push((attack.clone(), vars));
        Ok(())
    }

    /// Solves MP(I): the optimal eta is a lower bound for the game value and
    /// the selected plan is the most robust defense against the pool.
    pub fn solve(
        &self,
        scen: &ScenarioConfig,
        backend: &dyn MilpBackend,
        limits: &SolveLimits,
    ) -> Result<(DefensePlan, f64)> {
        let outcome = backend.solve(&self.model, limits)?;
        let (lb, values) = outcome.expect_optimal()?;
        let mut plan = DefensePlan::none(scen);
        for (&(key, idx), &var) in &self.defend {
            plan.defend.set(key, idx, values[var.index()] > 0.5);
        }
        for (&(key, idx), &var) in &self.open {
            plan.open.set(key, idx, values[var.index()] > 0.5);
        }
        let _ = PlanSet::Attackable;
        Ok((plan, lb))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::NetworkInstance;
    use crate::solver::select_backend;

    #[test]
    fn zero_seed_reduces_to_no_attack_optimum() {
        let inst = NetworkInstance::build(&fixtures::two_depot_spec()).unwrap();
        let scen = fixtures::two_depot_scenario(&inst, (1, 0, 1));
        let master = build_master(&inst, &scen, &[AttackPlan::none(&scen)]).unwrap();
        let backend = select_backend(None).unwrap();
        let (plan, lb) = master
            .solve(&scen, backend.as_ref(), &SolveLimits::default())
            .unwrap();
        assert!((lb - 28.0).abs() < 1e-5, "{lb}");
        assert!(plan.within_budgets(&scen));
    }

    #[test]
    fn two_attacks_drive_defense_to_critical_depot() {
        let inst = NetworkInstance::build(&fixtures::two_depot_spec()).unwrap();
        let scen = fixtures::two_depot_scenario(&inst, (1, 0, 1));
        let key = *scen.cells.keys().next().unwrap();
        let d1_pos = scen.cells[&key]
            .attackable
            .iter()
            .position(|&n| n == inst.node_id("d1").unwrap())
            .unwrap();
        let mut a1 = AttackPlan::none(&scen);
        a1.attack.set(key, d1_pos, true);
        let mut a2 = AttackPlan::none(&scen);
        a2.attack.set(key, 1 - d1_pos, true);
        let master = build_master(&inst, &scen, &[AttackPlan::none(&scen), a1, a2]).unwrap();
        let backend = select_backend(None).unwrap();
        let (plan, lb) = master
            .solve(&scen, backend.as_ref(), &SolveLimits::default())
            .unwrap();
        // defending d1 leaves the d2 attack: payoff table min over d of
        // max(none 28, d1 out 224*(1-d_d1) else 28, d2 out 212*(1-d_d2) else 28)
        assert!(plan.defend.get(key, d1_pos), "defense should cover d1");
        assert!((lb - 212.0).abs() < 1e-4, "{lb}");
    }

    #[test]
    fn zero_defense_budget_keeps_all_attacks_live() {
        let inst = NetworkInstance::build(&fixtures::two_depot_spec()).unwrap();
        let scen = fixtures::two_depot_scenario(&inst, (0, 0, 1));
        let key = *scen.cells.keys().next().unwrap();
        let d1_pos = scen.cells[&key]
            .attackable
            .iter()
            .position(|&n| n == inst.node_id("d1").unwrap())
            .unwrap();
        let mut a1 = AttackPlan::none(&scen);
        a1.attack.set(key, d1_pos, true);
        let master = build_master(&inst, &scen, &[AttackPlan::none(&scen), a1]).unwrap();
        let backend = select_backend(None).unwrap();
        let (plan, lb) = master
            .solve(&scen, backend.as_ref(), &SolveLimits::default())
            .unwrap();
        assert!(plan.defend.is_zero());
        assert!((lb - 224.0).abs() < 1e-4, "{lb}");
    }

    #[test]
    fn duplicate_attack_rejected() {
        let inst = NetworkInstance::build(&fixtures::two_depot_spec()).unwrap();
        let scen = fixtures::two_depot_scenario(&inst, (1, 0, 1));
        let zero = AttackPlan::none(&scen);
        let err = build_master(&inst, &scen, &[zero.clone(), zero]).unwrap_err();
        assert!(matches!(err, DadError::InvalidInput(_)));
    }

    #[test]
    fn reserves_open_when_they_pay_off() {
        let inst = NetworkInstance::build(&fixtures::sweep_spec()).unwrap();
        let scen = fixtures::sweep_scenario(&inst, (0, 1, 0));
        let master = build_master(&inst, &scen, &[AttackPlan::none(&scen)]).unwrap();
        let backend = select_backend(None).unwrap();
        let (plan, lb) = master
            .solve(&scen, backend.as_ref(), &SolveLimits::default())
            .unwrap();
        // opening r1 (cost 1.5) beats the d3 path (cost 3):
        // 4*1 + 4*1.5 + 2*2 = 14 instead of 18
        assert!((lb - 14.0).abs() < 1e-5, "{lb}");
        let key = *scen.cells.keys().next().unwrap();
        let r1_pos = scen.cells[&key]
            .reserves
            .iter()
            .position(|&n| n == inst.node_id("r1").unwrap())
            .unwrap();
        assert!(plan.open.get(key, r1_pos));
    }
}
