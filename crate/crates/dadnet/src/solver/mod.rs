//! Backend-agnostic MILP layer.
//!
//! Everything upstream (operator LP, subproblem, master) builds an
//! [`AbstractModel`]; this module is the only place that talks to an actual
//! solver. Two backends are supported: HiGHS (default, behind the `highs`
//! feature) and microlp (pure Rust, always compiled in). Backend selection
//! order: explicit argument, then the `DADNET_BACKEND` environment variable,
//! then HiGHS if compiled in, then microlp.

use std::fmt;
use std::time::Duration;

use thiserror::Error;

#[cfg(feature = "highs")]
mod backend_highs;
mod backend_microlp;
pub mod lp_text;

/// Handle to a variable in an [`AbstractModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub(crate) usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Handle to a linear constraint in an [`AbstractModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RowId(pub(crate) usize);

impl RowId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for RowSense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowSense::Le => write!(f, "<="),
            RowSense::Ge => write!(f, ">="),
            RowSense::Eq => write!(f, "="),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lb: f64,
    pub ub: f64,
    pub obj: f64,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub name: String,
    pub coeffs: Vec<(VarId, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

/// A mixed-integer linear program with a fixed, deterministic variable and
/// row ordering (insertion order). Serializing the same build twice yields
/// byte-identical text.
#[derive(Debug, Clone)]
pub struct AbstractModel {
    pub name: String,
    pub sense: Sense,
    vars: Vec<Variable>,
    rows: Vec<Row>,
}

impl AbstractModel {
    pub fn new(name: impl Into<String>, sense: Sense) -> Self {
        Self {
            name: name.into(),
            sense,
            vars: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, lb: f64, ub: f64, obj: f64) -> VarId {
        let id = VarId(self.vars.len());
        self.vars.push(Variable {
            name: name.into(),
            kind: VarKind::Continuous,
            lb,
            ub,
            obj,
        });
        id
    }

    pub fn add_binary(&mut self, name: impl Into<String>, obj: f64) -> VarId {
        let id = VarId(self.vars.len());
        self.vars.push(Variable {
            name: name.into(),
            kind: VarKind::Binary,
            lb: 0.0,
            ub: 1.0,
            obj,
        });
        id
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(VarId, f64)>,
        sense: RowSense,
        rhs: f64,
    ) -> RowId {
        let id = RowId(self.rows.len());
        self.rows.push(Row {
            name: name.into(),
            coeffs,
            sense,
            rhs,
        });
        id
    }

    /// Adds `delta` to the objective coefficient of `var`.
    pub fn add_obj(&mut self, var: VarId, delta: f64) {
        self.vars[var.0].obj += delta;
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.vars[id.0]
    }

    /// Checks structural soundness: finite coefficients and bounds
    /// (infinities allowed for bounds only), binaries bounded by {0, 1},
    /// in-range variable references.
    pub fn check(&self) -> Result<(), SolverError> {
        for v in &self.vars {
            if v.obj.is_nan() || v.lb.is_nan() || v.ub.is_nan() || !v.obj.is_finite() {
                return Err(SolverError::BadModel(format!(
                    "non-finite data on variable {}",
                    v.name
                )));
            }
            if v.lb > v.ub {
                return Err(SolverError::BadModel(format!(
                    "empty bound interval on variable {}",
                    v.name
                )));
            }
            if v.kind == VarKind::Binary && (v.lb != 0.0 || v.ub != 1.0) {
                return Err(SolverError::BadModel(format!(
                    "binary {} must have bounds {{0,1}}",
                    v.name
                )));
            }
        }
        for r in &self.rows {
            if !r.rhs.is_finite() {
                return Err(SolverError::BadModel(format!(
                    "non-finite rhs on {}",
                    r.name
                )));
            }
            for &(v, c) in &r.coeffs {
                if v.0 >= self.vars.len() {
                    return Err(SolverError::BadModel(format!(
                        "row {} references unknown variable",
                        r.name
                    )));
                }
                if !c.is_finite() {
                    return Err(SolverError::BadModel(format!(
                        "non-finite coefficient on {}",
                        r.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn has_integers(&self) -> bool {
        self.vars.iter().any(|v| v.kind == VarKind::Binary)
    }

    /// Evaluates the objective at a given assignment.
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.vars.iter().zip(values).map(|(v, x)| v.obj * x).sum()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveLimits {
    pub time: Option<Duration>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// A time or iteration limit was hit. Values are present only if an
    /// incumbent was found.
    Limit,
}

/// Numeric tolerances the backend was run with, echoed for reproducibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub feasibility: f64,
    pub integrality: f64,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub objective: Option<f64>,
    pub values: Option<Vec<f64>>,
    /// Row duals, reported for pure LPs when the backend exposes them.
    pub dual_rows: Option<Vec<f64>>,
    pub wall: Duration,
    pub tolerances: Tolerances,
    pub backend: BackendId,
}

impl SolveOutcome {
    /// Objective and values of an optimal solve; errors otherwise.
    pub fn expect_optimal(&self) -> Result<(f64, &[f64]), SolverError> {
        match (self.status, self.objective, &self.values) {
            (SolveStatus::Optimal, Some(obj), Some(vals)) => Ok((obj, vals)),
            (status, ..) => Err(SolverError::NotOptimal {
                backend: self.backend,
                status,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BackendId {
    Microlp,
    #[cfg(feature = "highs")]
    Highs,
}

impl BackendId {
    pub fn as_str(&self) -> &'static str {
        match self {
            BackendId::Microlp => "microlp",
            #[cfg(feature = "highs")]
            BackendId::Highs => "highs",
        }
    }
}

impl fmt::Display for BackendId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BackendId {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "microlp" => Ok(BackendId::Microlp),
            #[cfg(feature = "highs")]
            "highs" => Ok(BackendId::Highs),
            other => Err(SolverError::UnknownBackend(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Error)]
pub enum SolverError {
    #[error("malformed model: {0}")]
    BadModel(String),
    #[error("unknown or unavailable backend `{0}`")]
    UnknownBackend(String),
    #[error("{backend} returned {status:?} where an optimal solution was required")]
    NotOptimal {
        backend: BackendId,
        status: SolveStatus,
    },
    #[error("{backend} failed: {message}")]
    BackendFailure { backend: BackendId, message: String },
}

pub trait MilpBackend: Send + Sync {
    fn id(&self) -> BackendId;
    fn solve(
        &self,
        model: &AbstractModel,
        limits: &SolveLimits,
    ) -> Result<SolveOutcome, SolverError>;
}

/// Environment variable consulted when no backend is requested explicitly.
pub const BACKEND_ENV_VAR: &str = "DADNET_BACKEND";

fn default_backend_id() -> BackendId {
    #[cfg(feature = "highs")]
    {
        BackendId::Highs
    }
    #[cfg(not(feature = "highs"))]
    {
        BackendId::Microlp
    }
}

/// Instantiates a backend: `requested` wins, then `DADNET_BACKEND`, then the
/// compiled-in default.
pub fn select_backend(requested: Option<BackendId>) -> Result<Box<dyn MilpBackend>, SolverError> {
    let id = match requested {
        Some(id) => id,
        None => match std::env::var(BACKEND_ENV_VAR) {
            Ok(name) if !name.is_empty() => name.parse()?,
            _ => default_backend_id(),
        },
    };
    Ok(instantiate(id))
}

fn instantiate(id: BackendId) -> Box<dyn MilpBackend> {
    match id {
        BackendId::Microlp => Box::new(backend_microlp::MicrolpBackend),
        #[cfg(feature = "highs")]
        BackendId::Highs => Box::new(backend_highs::HighsBackend),
    }
}

#[derive(Debug, Clone)]
pub struct BackendDiagnostic {
    pub id: BackendId,
    pub default: bool,
}

/// Reports which backends are linked into this build and which one is the
/// default. There is always at least the pure-Rust microlp backend, so the
/// toolkit never needs a license to run.
pub fn available_backends() -> Vec<BackendDiagnostic> {
    let default = default_backend_id();
    #[allow(unused_mut)]
    let mut out = vec![BackendDiagnostic {
        id: BackendId::Microlp,
        default: default == BackendId::Microlp,
    }];
    #[cfg(feature = "highs")]
    out.insert(
        0,
        BackendDiagnostic {
            id: BackendId::Highs,
            default: default == BackendId::Highs,
        },
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn backends() -> Vec<Box<dyn MilpBackend>> {
        available_backends()
            .into_iter()
            .map(|d| instantiate(d.id))
            .collect()
    }

    #[test]
    fn min_with_lower_bound() {
        for b in backends() {
            let mut m = AbstractModel::new("t", Sense::Minimize);
            let x = m.add_var("x", f64::NEG_INFINITY, f64::INFINITY, 1.0);
            m.add_row("lb", vec![(x, 1.0)], RowSense::Ge, 3.0);
            let out = b.solve(&m, &SolveLimits::default()).unwrap();
            let (obj, vals) = out.expect_optimal().unwrap();
            assert!((obj - 3.0).abs() < 1e-9, "{}: {obj}", b.id());
            assert!((vals[0] - 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn infeasible_pair() {
        for b in backends() {
            let mut m = AbstractModel::new("t", Sense::Minimize);
            let x = m.add_var("x", 0.0, f64::INFINITY, 1.0);
            m.add_row("le", vec![(x, 1.0)], RowSense::Le, 0.0);
            m.add_row("ge", vec![(x, 1.0)], RowSense::Ge, 1.0);
            let out = b.solve(&m, &SolveLimits::default()).unwrap();
            assert_eq!(out.status, SolveStatus::Infeasible, "{}", b.id());
        }
    }

    #[test]
    fn unbounded_detected() {
        for b in backends() {
            let mut m = AbstractModel::new("t", Sense::Maximize);
            let x = m.add_var("x", 0.0, f64::INFINITY, 1.0);
            m.add_row("ge", vec![(x, 1.0)], RowSense::Ge, 1.0);
            let out = b.solve(&m, &SolveLimits::default()).unwrap();
            assert_eq!(out.status, SolveStatus::Unbounded, "{}", b.id());
        }
    }

    #[test]
    fn small_mip() {
        // max x + 2y, x + y <= 4, 2x + y >= 2, x in {0..}, y <= 3, both integer-ish
        // via binaries: use y split into 3 binaries to keep the model pure-binary.
        for b in backends() {
            let mut m = AbstractModel::new("t", Sense::Maximize);
            let x = m.add_var("x", 0.0, 10.0, 1.0);
            let y1 = m.add_binary("y1", 2.0);
            let y2 = m.add_binary("y2", 2.0);
            let y3 = m.add_binary("y3", 2.0);
            m.add_row(
                "cap",
                vec![(x, 1.0), (y1, 1.0), (y2, 1.0), (y3, 1.0)],
                RowSense::Le,
                4.0,
            );
            let out = b.solve(&m, &SolveLimits::default()).unwrap();
            let (obj, _) = out.expect_optimal().unwrap();
            // best: all three binaries on (6) plus x = 1 -> 7
            assert!((obj - 7.0).abs() < 1e-6, "{}: {obj}", b.id());
        }
    }

    #[test]
    fn binary_bounds_checked() {
        let mut m = AbstractModel::new("t", Sense::Minimize);
        let v = m.add_binary("b", 0.0);
        m.vars[v.0].ub = 2.0;
        assert!(m.check().is_err());
    }

    #[test]
    fn availability_lists_default_first() {
        let diags = available_backends();
        assert!(!diags.is_empty());
        assert_eq!(diags.iter().filter(|d| d.default).count(), 1);
        // microlp is always present
        assert!(diags.iter().any(|d| d.id == BackendId::Microlp));
    }

    /// Random boxed LPs: solve the primal, build the textbook dual by hand,
    /// solve it too, and compare objectives.
    #[test]
    fn lp_duality_roundtrip_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for b in backends() {
            for _ in 0..20 {
                let n = rng.gen_range(2..6);
                let k = rng.gen_range(1..5);
                // primal: min c'x  s.t.  A x >= rhs,  0 <= x <= u
                let c: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..5.0)).collect();
                let u: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..4.0)).collect();
                let a: Vec<Vec<f64>> = (0..k)
                    .map(|_| (0..n).map(|_| rng.gen_range(0.0..2.0)).collect())
                    .collect();
                // rhs kept below sum(a_i * u_i) so the box keeps it feasible
                let rhs: Vec<f64> = a
                    .iter()
                    .map(|row| {
                        let max: f64 = row.iter().zip(&u).map(|(aij, ui)| aij * ui).sum();
                        rng.gen_range(0.0..max.max(0.1) * 0.8)
                    })
                    .collect();

                let mut p = AbstractModel::new("primal", Sense::Minimize);
                let xs: Vec<VarId> = (0..n)
                    .map(|j| p.add_var(format!("x{j}"), 0.0, u[j], c[j]))
                    .collect();
                for i in 0..k {
                    let coeffs = (0..n).map(|j| (xs[j], a[i][j])).collect();
                    p.add_row(format!("r{i}"), coeffs, RowSense::Ge, rhs[i]);
                }
                let pv = b
                    .solve(&p, &SolveLimits::default())
                    .unwrap()
                    .expect_optimal()
                    .unwrap()
                    .0;

                // dual: max rhs'y - u'w  s.t.  A'y - w <= c,  y, w >= 0
                let mut d = AbstractModel::new("dual", Sense::Maximize);
                let ys: Vec<VarId> = (0..k)
                    .map(|i| d.add_var(format!("y{i}"), 0.0, f64::INFINITY, rhs[i]))
                    .collect();
                let ws: Vec<VarId> = (0..n)
                    .map(|j| d.add_var(format!("w{j}"), 0.0, f64::INFINITY, -u[j]))
                    .collect();
                for j in 0..n {
                    let mut coeffs: Vec<(VarId, f64)> = (0..k).map(|i| (ys[i], a[i][j])).collect();
                    coeffs.push((ws[j], -1.0));
                    d.add_row(format!("d{j}"), coeffs, RowSense::Le, c[j]);
                }
                let dv = b
                    .solve(&d, &SolveLimits::default())
                    .unwrap()
                    .expect_optimal()
                    .unwrap()
                    .0;

                assert!(
                    (pv - dv).abs() <= 1e-7 * pv.abs().max(1.0),
                    "{}: primal {pv} vs dual {dv}",
                    b.id()
                );
            }
        }
    }
}
