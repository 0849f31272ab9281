//! Tri-level defender-attacker-defender (DAD) optimization over
//! interdependent fuel-distribution and road-traffic networks.
//!
//! The toolkit models an operator routing fuel through multi-mode,
//! multi-phase road networks, an attacker interdicting supply nodes, and a
//! defender hardening nodes or opening reserves. The game is solved exactly
//! by column-and-constraint generation: a master MIP over defenses with one
//! embedded operator copy per known attack, alternating with a subproblem
//! that maximizes the dualized operator LP over attack vectors.
//!
//! Entry points:
//! * [`model`] — instances, scenarios, plans, validation
//! * [`operator`] — the inner operator LP
//! * [`subproblem`] — the dualized attack MIP
//! * [`ccg`] — the full tri-level solve
//! * [`oracle`] — brute-force minimax for verification
//! * [`netgen`] — synthetic road-network generators
//! * [`metrics`] — summary network statistics
//! * [`io`] — file formats and plot exports

pub mod bench;
pub mod bpr;
pub mod ccg;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod master;
pub mod metrics;
pub mod model;
pub mod netgen;
pub mod operator;
pub mod oracle;
pub mod solver;
pub mod subproblem;

pub use error::{DadError, Result};
