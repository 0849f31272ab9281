//! The attacker's subproblem SP(w): the LP dual of the operator problem
//! with the attack vector as binaries, the defense folded in as constants,
//! and the bilinear interdiction term linearized with big-M rows.
//!
//! The dual carries one variable per operator constraint family and one
//! constraint per operator variable. Both sides are generated from the same
//! index sets as `operator::append_operator_block`, so the pairing is exact
//! by construction and strong duality can be audited by re-solving the
//! primal at the returned attack.

use std::collections::BTreeMap;

use crate::error::{DadError, Result};
use crate::model::{
    AttackPlan, Carrier, CarrierIdx, CellKey, DefensePlan, DualSolution, ModeId, NetworkInstance,
    NodeId, Phase, ScenarioConfig,
};
use crate::operator::ArcKey;
use crate::solver::{AbstractModel, MilpBackend, RowSense, Sense, SolveLimits, VarId};

/// Whether the attack enters as binaries (the real subproblem) or as a
/// constant plan (the pure dual LP used for duality audits).
pub enum AttackCoupling<'a> {
    Binary,
    Fixed(&'a AttackPlan),
}

#[derive(Debug, Clone, Default)]
pub struct SubproblemVars {
    pub phi: BTreeMap<(ModeId, Phase, CarrierIdx, NodeId), VarId>,
    pub kappa_c: BTreeMap<(ModeId, Phase, CarrierIdx, ArcKey), VarId>,
    pub beta_c: BTreeMap<(ModeId, Phase, CarrierIdx, NodeId), VarId>,
    pub mu_c: BTreeMap<(ModeId, Phase, CarrierIdx, ArcKey), VarId>,
    pub sigma_mp: BTreeMap<(ModeId, Phase, NodeId), VarId>,
    pub delta: BTreeMap<(ModeId, Phase, NodeId), VarId>,
    pub delta_bar: BTreeMap<(ModeId, Phase, NodeId), VarId>,
    pub omega: BTreeMap<(ModeId, Phase, NodeId), VarId>,
    pub beta_mp: BTreeMap<(ModeId, Phase, NodeId), VarId>,
    pub sigma_p: BTreeMap<(Phase, NodeId), VarId>,
    pub beta_p: BTreeMap<(Phase, NodeId), VarId>,
    pub kappa_m: BTreeMap<(ModeId, ArcKey), VarId>,
    pub mu_m: BTreeMap<(ModeId, ArcKey), VarId>,
    pub tau: BTreeMap<(ModeId, ArcKey, usize), VarId>,
    pub upsilon: BTreeMap<(Phase, NodeId), VarId>,
    pub pump: BTreeMap<(Phase, NodeId), VarId>,
    pub theta: BTreeMap<(ModeId, CarrierIdx), VarId>,
    /// Attack binaries, present only under `AttackCoupling::Binary`.
    pub attack: BTreeMap<(CellKey, usize), VarId>,
}

pub struct SubproblemModel {
    pub model: AbstractModel,
    pub vars: SubproblemVars,
    /// Big-M per (cell, index), mirroring the attack variable layout.
    pub big_m: BTreeMap<(CellKey, usize), f64>,
    /// Defense bits the model was built against (for the post-solve audit).
    pub defended: BTreeMap<(CellKey, usize), bool>,
}

/// Builds SP(w) (or its fixed-attack dual LP variant).
pub fn build_subproblem(
    inst: &NetworkInstance,
    scen: &ScenarioConfig,
    defense: &DefensePlan,
    coupling: &AttackCoupling,
) -> Result<SubproblemModel> {
    if !defense.within_budgets(scen) {
        return Err(DadError::InvalidInput(
            "defense exceeds scenario budgets".into(),
        ));
    }
    if let AttackCoupling::Fixed(attack) = coupling {
        if !attack.within_budgets(scen) {
            return Err(DadError::InvalidInput(
                "attack exceeds scenario budgets".into(),
            ));
        }
    }

    let np = inst.n_phases;
    // Finite box for every dual variable. The dual polytope has recession
    // directions with zero objective (potentials phi, closed-reserve omega,
    // aggregation sigmas); they never change the optimum but derail simplex
    // ray detection. Optimal duals are shadow prices bounded by chained
    // penalties and costs, far inside this box; the strong-duality audit
    // re-checks every solve against the primal.
    let inf = {
        let pen_total: f64 = (1..=np)
            .map(|p| {
                (0..inst.nodes.len())
                    .map(|i| scen.penalty(inst, NodeId(i), p))
                    .fold(0.0_f64, f64::max)
            })
            .sum();
        let cost_max = inst
            .arcs
            .iter()
            .flat_map(|a| a.flow_cost_p.iter().copied())
            .fold(0.0_f64, f64::max);
        let congest_max = inst
            .arcs
            .iter()
            .map(|a| a.time_cost * (1.0 + a.bpr.slopes.last().copied().unwrap_or(0.0)))
            .fold(0.0_f64, f64::max);
        let gamma_max = (0..inst.modes.len())
            .flat_map(|m| (1..=np).map(move |p| inst.gamma(ModeId(m), p)))
            .fold(0.0_f64, f64::max);
        1e4 * (1.0 + 2.0 * pen_total + cost_max + congest_max)
            * (1.0 + gamma_max)
            * inst.nodes.len().max(1) as f64
    };
    let mut model = AbstractModel::new(format!("subproblem[{}]", inst.name), Sense::Maximize);
    let mut v = SubproblemVars::default();
    let mut big_m: BTreeMap<(CellKey, usize), f64> = BTreeMap::new();

    // --- dual variables (objective coefficients set as we go) -------------
    for (mi, mode) in inst.modes.iter().enumerate() {
        let m = ModeId(mi);
        for p in 1..=np {
            let carriers = inst.carriers(m, p);
            for (ci, carrier) in carriers.iter().enumerate() {
                for n in 0..inst.nodes.len() {
                    if !mode.member_mask[n] {
                        continue;
                    }
                    v.phi.insert(
                        (m, p, ci, NodeId(n)),
                        model.add_var(format!("phi.m{mi}.p{p}.c{ci}.n{n}"), -inf, inf, 0.0),
                    );
                }
                for &arc in &mode.arcs {
                    let a = arc.0;
                    v.kappa_c.insert(
                        (m, p, ci, a),
                        model.add_var(format!("kapc.m{mi}.p{p}.c{ci}.a{a}"), -inf, inf, 0.0),
                    );
                    // -2u mu in the objective
                    v.mu_c.insert(
                        (m, p, ci, a),
                        model.add_var(
                            format!("muc.m{mi}.p{p}.c{ci}.a{a}"),
                            0.0,
                            inf,
                            -2.0 * inst.arcs[a].capacity_vph,
                        ),
                    );
                }
                for n in 0..inst.nodes.len() {
                    let node = NodeId(n);
                    let b = inst.b_carrier(node, m, p, carrier);
                    if b != 0.0 {
                        v.beta_c.insert(
                            (m, p, ci, node),
                            model.add_var(
                                format!("betc.m{mi}.p{p}.c{ci}.n{n}"),
                                0.0,
                                inf,
                                -b.abs(),
                            ),
                        );
                    }
                }
            }
            let cell_key = CellKey { mode: m, phase: p };
            let cell = scen.cells.get(&cell_key);
            for n in 0..inst.nodes.len() {
                let node = NodeId(n);
                let b = inst.b_mp(node, m, p);
                if b == 0.0 {
                    continue;
                }
                v.sigma_mp.insert(
                    (m, p, node),
                    model.add_var(format!("sig.m{mi}.p{p}.n{n}"), -inf, inf, 0.0),
                );
                let in_s = cell.and_then(|c| c.attackable.iter().position(|&x| x == node));
                let in_r = cell.and_then(|c| c.reserves.iter().position(|&x| x == node));
                if let Some(idx) = in_s {
                    v.delta.insert(
                        (m, p, node),
                        model.add_var(format!("del.m{mi}.p{p}.n{n}"), 0.0, inf, 0.0),
                    );
                    v.delta_bar.insert(
                        (m, p, node),
                        model.add_var(format!("delb.m{mi}.p{p}.n{n}"), 0.0, inf, -b.abs()),
                    );
                    big_m.insert((cell_key, idx), scen.big_m(inst, node, p));
                }
                if let Some(idx) = in_r {
                    let open = defense.open.get(cell_key, idx);
                    let coeff = if open { b.abs() } else { 0.0 };
                    v.omega.insert(
                        (m, p, node),
                        model.add_var(format!("omg.m{mi}.p{p}.n{n}"), -inf, inf, coeff),
                    );
                } else {
                    v.beta_mp.insert(
                        (m, p, node),
                        model.add_var(format!("betm.m{mi}.p{p}.n{n}"), -inf, inf, b.abs()),
                    );
                }
            }
        }
        for &arc in &mode.arcs {
            let a = arc.0;
            v.kappa_m.insert(
                (m, a),
                model.add_var(format!("kapm.m{mi}.a{a}"), -inf, inf, 0.0),
            );
            v.mu_m.insert(
                (m, a),
                model.add_var(
                    format!("mum.m{mi}.a{a}"),
                    0.0,
                    inf,
                    -2.0 * inst.arcs[a].capacity_vph,
                ),
            );
            let pieces = &inst.arcs[a].bpr;
            for r in 0..pieces.n_pieces() {
                v.tau.insert(
                    (m, a, r),
                    model.add_var(
                        format!("tau.m{mi}.a{a}.r{}", r + 1),
                        0.0,
                        inf,
                        pieces.intercepts[r],
                    ),
                );
            }
        }
    }
    for p in 1..=np {
        for n in 0..inst.nodes.len() {
            let node = NodeId(n);
            let any_mode = (0..inst.modes.len()).any(|mi| inst.b_mp(node, ModeId(mi), p) != 0.0);
            if !(any_mode || inst.nodes[n].b_p[p - 1] != 0.0) {
                continue;
            }
            v.sigma_p.insert(
                (p, node),
                model.add_var(format!("sigp.p{p}.n{n}"), -inf, inf, 0.0),
            );
            v.beta_p.insert(
                (p, node),
                model.add_var(
                    format!("betp.p{p}.n{n}"),
                    0.0,
                    inf,
                    -inst.nodes[n].b_p[p - 1].abs(),
                ),
            );
            if scen.station_throughput_cap {
                if let Some(pump) = &inst.nodes[n].pumps_p[p - 1] {
                    v.pump.insert(
                        (p, node),
                        model.add_var(
                            format!("pmp.p{p}.n{n}"),
                            0.0,
                            inf,
                            -(pump.count as f64 * pump.rate_bbl_per_h),
                        ),
                    );
                }
            }
        }
    }
    for p in 1..np {
        for n in 0..inst.nodes.len() {
            let node = NodeId(n);
            if inst.nodes[n].b_p[p - 1] < 0.0
                && v.sigma_p.contains_key(&(p, node))
                && v.sigma_p.contains_key(&(p + 1, node))
            {
                v.upsilon.insert(
                    (p, node),
                    model.add_var(format!("ups.p{p}.n{n}"), 0.0, inf, 0.0),
                );
            }
        }
    }
    // round-trip duals for final-phase carriers with partners
    let mut trip_partner: BTreeMap<(ModeId, CarrierIdx), (CarrierIdx, NodeId, NodeId)> =
        BTreeMap::new();
    if np >= 3 {
        for (mi, _) in inst.modes.iter().enumerate() {
            let m = ModeId(mi);
            let prev: BTreeMap<(NodeId, NodeId), usize> = inst
                .carriers(m, np - 1)
                .iter()
                .enumerate()
                .filter_map(|(i, c)| match c {
                    Carrier::OdPair { demand, supply } => Some(((*demand, *supply), i)),
                    Carrier::Fleet => None,
                })
                .collect();
            for (ci, carrier) in inst.carriers(m, np).iter().enumerate() {
                let Carrier::OdPair { demand, supply } = carrier else {
                    continue;
                };
                if let Some(&pi) = prev.get(&(*supply, *demand)) {
                    v.theta.insert(
                        (m, ci),
                        model.add_var(format!("the.m{mi}.c{ci}"), -inf, inf, 0.0),
                    );
                    trip_partner.insert((m, ci), (pi, *demand, *supply));
                }
            }
        }
    }
    // attack binaries
    if matches!(coupling, AttackCoupling::Binary) {
        for (key, cell) in &scen.cells {
            for idx in 0..cell.attackable.len() {
                v.attack.insert(
                    (*key, idx),
                    model.add_binary(format!("a.m{}.p{}.i{idx}", key.mode.0, key.phase), 0.0),
                );
            }
            model.add_row(
                format!("abudget.m{}.p{}", key.mode.0, key.phase),
                (0..cell.attackable.len())
                    .map(|i| (v.attack[&(*key, i)], 1.0))
                    .collect(),
                RowSense::Le,
                cell.n_attack as f64,
            );
        }
    }

    // --- dual feasibility rows (one per operator variable) ----------------
    // reverse index: is phase-(np-1) carrier pi the partner of some final
    // carrier? maps (m, pi) -> (final ci, coupled node)
    let mut prev_side: BTreeMap<(ModeId, CarrierIdx), (CarrierIdx, NodeId)> = BTreeMap::new();
    for (&(m, ci), &(pi, _demand, supply)) in &trip_partner {
        prev_side.insert((m, pi), (ci, supply));
    }

    for (mi, mode) in inst.modes.iter().enumerate() {
        let m = ModeId(mi);
        for p in 1..=np {
            let carriers = inst.carriers(m, p);
            let gamma = inst.gamma(m, p);
            for (ci, carrier) in carriers.iter().enumerate() {
                // columns f-hat: phi_tail - phi_head - gamma kappa_c <= 0
                for &arc in &mode.arcs {
                    let a = arc.0;
                    let tail = inst.arcs[a].tail;
                    let head = inst.arcs[a].head;
                    model.add_row(
                        format!("dfhat.m{mi}.p{p}.c{ci}.a{a}"),
                        vec![
                            (v.phi[&(m, p, ci, tail)], 1.0),
                            (v.phi[&(m, p, ci, head)], -1.0),
                            (v.kappa_c[&(m, p, ci, a)], -gamma),
                        ],
                        RowSense::Le,
                        0.0,
                    );
                    // columns f: kappa_c - kappa_m - mu_c <= c
                    model.add_row(
                        format!("df.m{mi}.p{p}.c{ci}.a{a}"),
                        vec![
                            (v.kappa_c[&(m, p, ci, a)], 1.0),
                            (v.kappa_m[&(m, a)], -1.0),
                            (v.mu_c[&(m, p, ci, a)], -1.0),
                        ],
                        RowSense::Le,
                        inst.arcs[a].flow_cost_p[p - 1],
                    );
                }
                // columns x_c
                for n in 0..inst.nodes.len() {
                    let node = NodeId(n);
                    let b = inst.b_carrier(node, m, p, carrier);
                    if b == 0.0 {
                        continue;
                    }
                    let mut coeffs = vec![
                        (v.phi[&(m, p, ci, node)], -b.signum()),
                        (v.beta_c[&(m, p, ci, node)], -1.0),
                        (v.sigma_mp[&(m, p, node)], -1.0),
                    ];
                    if p == np {
                        if let Some(&(_pi, demand, _supply)) = trip_partner.get(&(m, ci)) {
                            if node == demand {
                                coeffs.push((v.theta[&(m, ci)], 1.0));
                            }
                        }
                    }
                    if np >= 3 && p == np - 1 {
                        if let Some(&(final_ci, coupled)) = prev_side.get(&(m, ci)) {
                            if node == coupled {
                                coeffs.push((v.theta[&(m, final_ci)], -1.0));
                            }
                        }
                    }
                    model.add_row(
                        format!("dxc.m{mi}.p{p}.c{ci}.n{n}"),
                        coeffs,
                        RowSense::Le,
                        0.0,
                    );
                }
            }

            // columns x_mp and s
            let cell_key = CellKey { mode: m, phase: p };
            let cell = scen.cells.get(&cell_key);
            for n in 0..inst.nodes.len() {
                let node = NodeId(n);
                if inst.b_mp(node, m, p) == 0.0 {
                    continue;
                }
                let in_s = cell.and_then(|c| c.attackable.iter().position(|&x| x == node));
                let in_r = cell.and_then(|c| c.reserves.iter().position(|&x| x == node));
                let mut coeffs = vec![
                    (v.sigma_mp[&(m, p, node)], 1.0),
                    (v.sigma_p[&(p, node)], -1.0),
                ];
                let mut s_coeffs: Vec<(VarId, f64)> = Vec::new();
                if in_s.is_some() {
                    coeffs.push((v.delta[&(m, p, node)], -1.0));
                }
                if in_r.is_some() {
                    coeffs.push((v.omega[&(m, p, node)], 1.0));
                    s_coeffs.push((v.omega[&(m, p, node)], 1.0));
                } else {
                    coeffs.push((v.beta_mp[&(m, p, node)], 1.0));
                    s_coeffs.push((v.beta_mp[&(m, p, node)], 1.0));
                }
                model.add_row(format!("dxmp.m{mi}.p{p}.n{n}"), coeffs, RowSense::Le, 0.0);
                model.add_row(
                    format!("ds.m{mi}.p{p}.n{n}"),
                    s_coeffs,
                    RowSense::Le,
                    scen.penalty(inst, node, p),
                );
            }
        }
        // columns f_m and g
        for &arc in &mode.arcs {
            let a = arc.0;
            let pieces = &inst.arcs[a].bpr;
            let mut coeffs = vec![(v.kappa_m[&(m, a)], 1.0), (v.mu_m[&(m, a)], -1.0)];
            for r in 0..pieces.n_pieces() {
                coeffs.push((v.tau[&(m, a, r)], -pieces.slopes[r]));
            }
            model.add_row(format!("dfm.m{mi}.a{a}"), coeffs, RowSense::Le, 0.0);
            model.add_row(
                format!("dg.m{mi}.a{a}"),
                (0..pieces.n_pieces())
                    .map(|r| (v.tau[&(m, a, r)], 1.0))
                    .collect(),
                RowSense::Le,
                inst.arcs[a].time_cost,
            );
        }
    }
    // columns x_p
    for (&(p, node), &sigma_p) in &v.sigma_p {
        let mut coeffs = vec![(sigma_p, 1.0), (v.beta_p[&(p, node)], -1.0)];
        if let Some(&ups) = v.upsilon.get(&(p, node)) {
            coeffs.push((ups, 1.0));
        }
        if p > 1 {
            if let Some(&ups_prev) = v.upsilon.get(&(p - 1, node)) {
                coeffs.push((ups_prev, -1.0));
            }
        }
        if let Some(&pump) = v.pump.get(&(p, node)) {
            coeffs.push((pump, -1.0));
        }
        model.add_row(format!("dxp.p{p}.n{}", node.0), coeffs, RowSense::Le, 0.0);
    }

    // --- big-M linearization of delta_bar = (1 - (1-d)a) delta -------------
    for (key, cell) in &scen.cells {
        for (idx, &node) in cell.attackable.iter().enumerate() {
            let (m, p) = (key.mode, key.phase);
            let delta = v.delta[&(m, p, node)];
            let delta_bar = v.delta_bar[&(m, p, node)];
            let d_i = defense.defend.get(*key, idx);
            let m_val = big_m[&(*key, idx)];
            let tag = format!("m{}.p{}.n{}", m.0, p, node.0);
            match coupling {
                AttackCoupling::Binary => {
                    let a_var = v.attack[&(*key, idx)];
                    if d_i {
                        // (1-d) a == 0: rows collapse to delta_bar = delta
                        model.add_row(
                            format!("lin1.{tag}"),
                            vec![(delta_bar, 1.0)],
                            RowSense::Le,
                            m_val,
                        );
                        model.add_row(
                            format!("lin2.{tag}"),
                            vec![(delta, 1.0), (delta_bar, -1.0)],
                            RowSense::Ge,
                            0.0,
                        );
                        model.add_row(
                            format!("lin3.{tag}"),
                            vec![(delta, 1.0), (delta_bar, -1.0)],
                            RowSense::Le,
                            0.0,
                        );
                    } else {
                        // delta_bar <= M (1 - a)
                        model.add_row(
                            format!("lin1.{tag}"),
                            vec![(delta_bar, 1.0), (a_var, m_val)],
                            RowSense::Le,
                            m_val,
                        );
                        model.add_row(
                            format!("lin2.{tag}"),
                            vec![(delta, 1.0), (delta_bar, -1.0)],
                            RowSense::Ge,
                            0.0,
                        );
                        // delta - delta_bar <= M a
                        model.add_row(
                            format!("lin3.{tag}"),
                            vec![(delta, 1.0), (delta_bar, -1.0), (a_var, -m_val)],
                            RowSense::Le,
                            0.0,
                        );
                    }
                }
                AttackCoupling::Fixed(attack) => {
                    // same four rows with a as a constant; they still cap
                    // delta at M, which keeps the dual polytope bounded
                    let nullified = attack.attack.get(*key, idx) && !d_i;
                    let (bar_cap, diff_cap) = if nullified {
                        (0.0, m_val)
                    } else {
                        (m_val, 0.0)
                    };
                    model.add_row(
                        format!("lin1.{tag}"),
                        vec![(delta_bar, 1.0)],
                        RowSense::Le,
                        bar_cap,
                    );
                    model.add_row(
                        format!("lin2.{tag}"),
                        vec![(delta, 1.0), (delta_bar, -1.0)],
                        RowSense::Ge,
                        0.0,
                    );
                    model.add_row(
                        format!("lin3.{tag}"),
                        vec![(delta, 1.0), (delta_bar, -1.0)],
                        RowSense::Le,
                        diff_cap,
                    );
                }
            }
        }
    }

    let defended = scen
        .cells
        .iter()
        .flat_map(|(key, cell)| {
            (0..cell.attackable.len()).map(|idx| ((*key, idx), defense.defend.get(*key, idx)))
        })
        .collect();
    Ok(SubproblemModel {
        model,
        vars: v,
        big_m,
        defended,
    })
}

/// Outcome of one subproblem solve.
pub struct SpOutcome {
    pub attack: AttackPlan,
    /// SP optimum: the worst-case operator value against the given defense.
    pub value: f64,
    pub duals: DualSolution,
    /// max delta / M over attackable nodes; above 0.99 the big-M bound is
    /// suspect and the certified value cannot be trusted.
    pub max_m_utilization: f64,
}

pub fn solve_subproblem(
    sp: &SubproblemModel,
    scen: &ScenarioConfig,
    backend: &dyn MilpBackend,
    limits: &SolveLimits,
) -> Result<SpOutcome> {
    let outcome = backend.solve(&sp.model, limits)?;
    let (value, values) = outcome.expect_optimal()?;

    let mut attack = AttackPlan::none(scen);
    for (&(key, idx), &var) in &sp.vars.attack {
        attack.attack.set(key, idx, values[var.index()] > 0.5);
    }

    // where the interdiction is nullified (attacked and undefended) the
    // dual rides freely below M with zero objective weight, so only active
    // interdictions say anything about the adequacy of M
    let mut max_util: f64 = 0.0;
    for (&(key, idx), &m_val) in &sp.big_m {
        if attack.attack.get(key, idx) && !sp.defended[&(key, idx)] {
            continue;
        }
        let node = scen.cells[&key].attackable[idx];
        let delta = values[sp.vars.delta[&(key.mode, key.phase, node)].index()];
        if m_val > 0.0 {
            max_util = max_util.max(delta / m_val);
        } else if delta > 1e-9 {
            max_util = f64::INFINITY;
        }
    }

    Ok(SpOutcome {
        attack,
        value,
        duals: extract_duals(&sp.vars, values),
        max_m_utilization: max_util,
    })
}

fn extract_duals(v: &SubproblemVars, values: &[f64]) -> DualSolution {
    use crate::model::ArcId;
    fn grab<K: Ord + Copy>(src: &BTreeMap<K, VarId>, values: &[f64]) -> BTreeMap<K, f64> {
        src.iter()
            .map(|(&k, &id)| (k, values[id.index()]))
            .collect()
    }
    fn grab_arc4(
        src: &BTreeMap<(ModeId, Phase, CarrierIdx, ArcKey), VarId>,
        values: &[f64],
    ) -> BTreeMap<(ModeId, Phase, CarrierIdx, ArcId), f64> {
        src.iter()
            .map(|(&(m, p, c, a), &id)| ((m, p, c, ArcId(a)), values[id.index()]))
            .collect()
    }
    DualSolution {
        phi: grab(&v.phi, values),
        kappa_c: grab_arc4(&v.kappa_c, values),
        beta_c: grab(&v.beta_c, values),
        mu_c: grab_arc4(&v.mu_c, values),
        sigma_mp: grab(&v.sigma_mp, values),
        delta: grab(&v.delta, values),
        delta_bar: grab(&v.delta_bar, values),
        omega: grab(&v.omega, values),
        beta_mp: grab(&v.beta_mp, values),
        sigma_p: grab(&v.sigma_p, values),
        beta_p: grab(&v.beta_p, values),
        kappa_m: v
            .kappa_m
            .iter()
            .map(|(&(m, a), &id)| ((m, ArcId(a)), values[id.index()]))
            .collect(),
        mu_m: v
            .mu_m
            .iter()
            .map(|(&(m, a), &id)| ((m, ArcId(a)), values[id.index()]))
            .collect(),
        tau: v
            .tau
            .iter()
            .map(|(&(m, a, r), &id)| ((m, ArcId(a), r), values[id.index()]))
            .collect(),
        upsilon: grab(&v.upsilon, values),
        theta: grab(&v.theta, values),
    }
}

/// Solves the dual LP for a *fixed* attack; with strong duality this equals
/// the primal operator optimum, which the acceptance suite checks pairwise.
pub fn dual_lp_value(
    inst: &NetworkInstance,
    scen: &ScenarioConfig,
    defense: &DefensePlan,
    attack: &AttackPlan,
    backend: &dyn MilpBackend,
    limits: &SolveLimits,
) -> Result<f64> {
    let sp = build_subproblem(inst, scen, defense, &AttackCoupling::Fixed(attack))?;
    let outcome = backend.solve(&sp.model, limits)?;
    Ok(outcome.expect_optimal()?.0)
}

/// Evaluates the four printed linearization rows at a candidate point.
/// Used to check that for binary (d, a) and 0 <= delta <= M the feasible
/// set pins delta_bar to exactly (1 - (1-d)a) delta.
pub fn linearization_feasible(d: bool, a: bool, delta: f64, delta_bar: f64, m: f64) -> bool {
    let da = if !d && a { 1.0 } else { 0.0 };
    delta_bar >= 0.0
        && delta_bar <= m * (1.0 - da) + 1e-12
        && delta - delta_bar >= -1e-12
        && delta - delta_bar <= m * da + 1e-12
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::NetworkInstance;
    use crate::operator::solve_operator;
    use crate::solver::select_backend;

    fn sp_value(inst: &NetworkInstance, scen: &ScenarioConfig, defense: &DefensePlan) -> SpOutcome {
        let backend = select_backend(None).unwrap();
        let sp = build_subproblem(inst, scen, defense, &AttackCoupling::Binary).unwrap();
        solve_subproblem(&sp, scen, backend.as_ref(), &SolveLimits::default()).unwrap()
    }

    #[test]
    fn zero_attack_budget_matches_operator() {
        let inst = NetworkInstance::build(&fixtures::two_depot_spec()).unwrap();
        let scen = fixtures::two_depot_scenario(&inst, (0, 0, 0));
        let defense = DefensePlan::none(&scen);
        let out = sp_value(&inst, &scen, &defense);
        assert!(out.attack.attack.is_zero());
        let backend = select_backend(None).unwrap();
        let primal = solve_operator(
            &inst,
            &scen,
            &defense,
            &AttackPlan::none(&scen),
            backend.as_ref(),
            &SolveLimits::default(),
        )
        .unwrap();
        assert!(
            (out.value - primal.objective).abs() <= 1e-6 * primal.objective.max(1.0),
            "sp {} vs primal {}",
            out.value,
            primal.objective
        );
        assert!((out.value - 28.0).abs() < 1e-5, "{}", out.value);
    }

    #[test]
    fn attack_picks_costlier_depot() {
        let inst = NetworkInstance::build(&fixtures::two_depot_spec()).unwrap();
        let scen = fixtures::two_depot_scenario(&inst, (1, 0, 1));
        let out = sp_value(&inst, &scen, &DefensePlan::none(&scen));
        // losing d1 costs 224, losing d2 costs 212
        assert!((out.value - 224.0).abs() < 1e-5, "{}", out.value);
        let key = *scen.cells.keys().next().unwrap();
        let d1_pos = scen.cells[&key]
            .attackable
            .iter()
            .position(|&n| n == inst.node_id("d1").unwrap())
            .unwrap();
        assert!(out.attack.attack.get(key, d1_pos));
        assert_eq!(out.attack.attack.count(), 1);
    }

    #[test]
    fn defended_depot_shifts_attack() {
        let inst = NetworkInstance::build(&fixtures::two_depot_spec()).unwrap();
        let scen = fixtures::two_depot_scenario(&inst, (1, 0, 1));
        let key = *scen.cells.keys().next().unwrap();
        let d1_pos = scen.cells[&key]
            .attackable
            .iter()
            .position(|&n| n == inst.node_id("d1").unwrap())
            .unwrap();
        let d2_pos = 1 - d1_pos;
        let mut defense = DefensePlan::none(&scen);
        defense.defend.set(key, d1_pos, true);
        let out = sp_value(&inst, &scen, &defense);
        assert!((out.value - 212.0).abs() < 1e-5, "{}", out.value);
        assert!(out.attack.attack.get(key, d2_pos));
    }

    #[test]
    fn strong_duality_audit_on_returned_attack() {
        let inst = NetworkInstance::build(&fixtures::two_depot_spec()).unwrap();
        let scen = fixtures::two_depot_scenario(&inst, (1, 0, 1));
        let defense = DefensePlan::none(&scen);
        let out = sp_value(&inst, &scen, &defense);
        let backend = select_backend(None).unwrap();
        let primal = solve_operator(
            &inst,
            &scen,
            &defense,
            &out.attack,
            backend.as_ref(),
            &SolveLimits::default(),
        )
        .unwrap();
        assert!((out.value - primal.objective).abs() <= 1e-6 * primal.objective.abs().max(1.0));
        assert!(out.max_m_utilization <= 0.99, "{}", out.max_m_utilization);
    }

    #[test]
    fn dual_lp_equals_primal_for_fixed_attacks() {
        let inst = NetworkInstance::build(&fixtures::two_depot_spec()).unwrap();
        let scen = fixtures::two_depot_scenario(&inst, (1, 0, 1));
        let backend = select_backend(None).unwrap();
        let key = *scen.cells.keys().next().unwrap();
        for bits in [(false, false), (true, false), (false, true)] {
            let mut attack = AttackPlan::none(&scen);
            attack.attack.set(key, 0, bits.0);
            attack.attack.set(key, 1, bits.1);
            for d_bits in [(false, false), (true, false)] {
                let mut defense = DefensePlan::none(&scen);
                defense.defend.set(key, 0, d_bits.0);
                defense.defend.set(key, 1, d_bits.1);
                let dual = dual_lp_value(
                    &inst,
                    &scen,
                    &defense,
                    &attack,
                    backend.as_ref(),
                    &SolveLimits::default(),
                )
                .unwrap();
                let primal = solve_operator(
                    &inst,
                    &scen,
                    &defense,
                    &attack,
                    backend.as_ref(),
                    &SolveLimits::default(),
                )
                .unwrap()
                .objective;
                assert!(
                    (dual - primal).abs() <= 1e-6 * primal.abs().max(1.0),
                    "dual {dual} vs primal {primal} at {bits:?}/{d_bits:?}"
                );
            }
        }
    }

    #[test]
    fn sp_value_monotone_in_attack_budget() {
        let inst = NetworkInstance::build(&fixtures::two_depot_spec()).unwrap();
        let mut last = f64::NEG_INFINITY;
        for n_attack in 0..=2 {
            let scen = fixtures::two_depot_scenario(&inst, (1, 0, n_attack));
            let out = sp_value(&inst, &scen, &DefensePlan::none(&scen));
            assert!(out.value >= last - 1e-7, "budget {n_attack}");
            last = out.value;
        }
        // both depots out: all 10 bbl/h slack at 50
        assert!((last - 500.0).abs() < 1e-5);
    }

    #[test]
    fn full_defense_neutralizes_attacks() {
        let inst = NetworkInstance::build(&fixtures::two_depot_spec()).unwrap();
        let scen = fixtures::two_depot_scenario(&inst, (2, 0, 2));
        let key = *scen.cells.keys().next().unwrap();
        let mut defense = DefensePlan::none(&scen);
        defense.defend.set(key, 0, true);
        defense.defend.set(key, 1, true);
        let out = sp_value(&inst, &scen, &defense);
        assert!((out.value - 28.0).abs() < 1e-5, "{}", out.value);
    }

    #[test]
    fn linearization_truth_table() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let m = 10.0;
        for (d, a) in [(false, false), (false, true), (true, false), (true, true)] {
            for _ in 0..100 {
                let delta = rng.gen_range(0.0..=m);
                let want = if !d && a { 0.0 } else { delta };
                assert!(linearization_feasible(d, a, delta, want, m));
                // anything else violates a row
                let off = want + if want < m / 2.0 { 0.5 } else { -0.5 };
                if (off - want).abs() > 1e-9 {
                    assert!(
                        !linearization_feasible(d, a, delta, off, m),
                        "(d={d}, a={a}, delta={delta}, off={off})"
                    );
                }
            }
        }
    }

    #[test]
    fn reserve_terms_enter_dual_objective() {
        // open reserve raises the achievable dual value exactly like the
        // primal: sweep fixture, no attacks, open r1
        let inst = NetworkInstance::build(&fixtures::sweep_spec()).unwrap();
        let scen = fixtures::sweep_scenario(&inst, (0, 1, 0));
        let backend = select_backend(None).unwrap();
        let key = *scen.cells.keys().next().unwrap();
        let r1_pos = scen.cells[&key]
            .reserves
            .iter()
            .position(|&n| n == inst.node_id("r1").unwrap())
            .unwrap();
        let mut defense = DefensePlan::none(&scen);
        defense.open.set(key, r1_pos, true);
        let out = {
            let sp = build_subproblem(&inst, &scen, &defense, &AttackCoupling::Binary).unwrap();
            solve_subproblem(&sp, &scen, backend.as_ref(), &SolveLimits::default()).unwrap()
        };
        let primal = solve_operator(
            &inst,
            &scen,
            &defense,
            &AttackPlan::none(&scen),
            backend.as_ref(),
            &SolveLimits::default(),
        )
        .unwrap();
        assert!(
            (out.value - primal.objective).abs() <= 1e-6 * primal.objective.abs().max(1.0),
            "sp {} vs primal {}",
            out.value,
            primal.objective
        );
    }
}
