//! File formats and persistence. Everything is human-diffable JSON with
//! unit-annotated field names; writes go through atomic replace.

mod instance_file;
mod plot_export;
mod results_file;
mod scenario_file;
mod tntp;

pub use instance_file::{load_instance, load_instance_spec, save_instance, InstanceFile};
pub use plot_export::{to_dot, to_geojson, PlanTags};
pub use results_file::{
    assemble_results, load_results, save_results, BackendMeta, DisjointReport, InstanceMeta,
    ResultsFile, SolutionSummary,
};
pub use scenario_file::{
    load_scenario, resolve_scenario, save_scenario, scenario_echo, CellFile, PenaltyOverrideFile,
    ScenarioFile,
};
pub use tntp::{load_tntp_like, parse_tntp_links, TntpOptions};

use crate::error::Result;
use std::io::Write;
use std::path::Path;

/// Writes via a sibling temp file and rename, so readers never observe a
/// half-written document.
pub(crate) fn atomic_write(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    if !dir.as_os_str().is_empty() {
        std::fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp~");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}
