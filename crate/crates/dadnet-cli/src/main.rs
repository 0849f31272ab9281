//! Command-line surface: solve tri-level scenarios, generate synthetic
//! instances, print network statistics, brute-force small games, and run
//! size sweeps.
//!
//! Exit codes: 0 success, 2 validation/input error, 3 solver failure,
//! 4 bound gap not closed within limits (incumbent results still written).

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use dadnet::bench::{run_bench, BenchConfig, BenchFamily};
use dadnet::ccg::ccg_solve;
use dadnet::error::DadError;
use dadnet::io::{
    assemble_results, load_instance, load_scenario, resolve_scenario, save_instance, save_results,
    save_scenario, scenario_echo, to_dot, to_geojson, BackendMeta, PlanTags,
};
use dadnet::metrics::compute_all;
use dadnet::model::{NetworkInstance, ScenarioConfig};
use dadnet::netgen::{generate, GeneratorFamily, GeneratorSpec, NetgenDefaults, RoleConfig};
use dadnet::oracle::enumerate_minimax;
use dadnet::solver::{available_backends, select_backend, BackendId, MilpBackend};

#[derive(Parser)]
#[command(
    name = "dadnet",
    version,
    about = "Tri-level fuel/transport resilience solver"
)]
struct Cli {
    /// Solver backend (also via DADNET_BACKEND).
    #[arg(long, global = true)]
    backend: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario end to end and write results, bound trace, and plots.
    Solve(SolveArgs),
    /// Generate a synthetic instance from a generator spec.
    Generate(GenerateArgs),
    /// Print summary statistics per mode graph.
    Stats(StatsArgs),
    /// Exhaustive minimax on a small instance (verification).
    Oracle(OracleArgs),
    /// Runtime sweep over instance sizes with a power-law fit.
    Bench(BenchArgs),
    /// List compiled solver backends.
    Backends,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory for results, trace, and plots.
    #[arg(long)]
    out: PathBuf,
    /// Overall time limit in seconds (overrides the scenario).
    #[arg(long)]
    time_limit: Option<f64>,
    /// Convergence gap (overrides the scenario).
    #[arg(long)]
    gap: Option<f64>,
    /// Budget sweep over defenses, e.g. `1-2` (applies to every cell).
    #[arg(long)]
    sweep_defense: Option<String>,
    #[arg(long)]
    sweep_reserve: Option<String>,
    #[arg(long)]
    sweep_attack: Option<String>,
    /// Parallel workers for sweeps.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Replace node ids with v1, v2, ... in plot exports.
    #[arg(long)]
    anonymize: bool,
}

#[derive(Args)]
struct GenerateArgs {
    /// Scenario file carrying a `generator` block.
    #[arg(long, conflicts_with_all = ["family"])]
    scenario: Option<PathBuf>,
    /// Inline family: grerec | power-law | exponential.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    depots: Option<usize>,
    #[arg(long)]
    stations: Option<usize>,
    #[arg(long)]
    customers: Option<usize>,
    #[arg(long)]
    fuel_fraction: Option<f64>,
    /// Alternate generator defaults file.
    #[arg(long)]
    defaults: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Also write a ready-to-solve scenario (budgets 1/1/1 over the
    /// generated depots and stations).
    #[arg(long)]
    scenario_out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    scenario: PathBuf,
    /// Cap on enumerated (defense, attack) cells.
    #[arg(long, default_value_t = 200_000)]
    cap: usize,
}

#[derive(Args)]
struct BenchArgs {
    /// grerec | power-law | exponential
    #[arg(long, default_value = "grerec")]
    family: String,
    /// Comma-separated node counts.
    #[arg(long, default_value = "49,100,169,225")]
    sizes: String,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    /// 2 adds an overlay mode sharing ~5% of nodes.
    #[arg(long, default_value_t = 1)]
    modes: usize,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code_for(err: &DadError) -> u8 {
    match err {
        DadError::Validation(_) | DadError::InvalidInput(_) | DadError::Parse { .. } => 2,
        DadError::LimitExceeded(_) => 2,
        DadError::Solver(_) | DadError::Model(_) => 3,
        DadError::Io(_) | DadError::Unsupported(_) => 1,
    }
}

fn backend_from(cli_backend: &Option<String>) -> Result<Box<dyn MilpBackend>, DadError> {
    let requested = match cli_backend {
        Some(name) => Some(name.parse::<BackendId>()?),
        None => None,
    };
    Ok(select_backend(requested)?)
}

fn parse_range(text: &str) -> Result<Vec<u32>, DadError> {
    let bad = || DadError::InvalidInput(format!("bad budget range `{text}` (use `a` or `a-b`)"));
    if let Some((a, b)) = text.split_once('-') {
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        Ok((a..=b).collect())
    } else {
        Ok(vec![text.trim().parse().map_err(|_| bad())?])
    }
}

fn cmd_solve(cli_backend: &Option<String>, args: &SolveArgs) -> Result<u8, DadError> {
    let inst = load_instance(&args.instance)?;
    let file = load_scenario(&args.scenario)?;
    let mut base = resolve_scenario(&file, &inst)?;
    if let Some(gap) = args.gap {
        base.epsilon_gap = gap;
    }
    if let Some(t) = args.time_limit {
        base.time_limit = Some(Duration::from_secs_f64(t));
    }
    let report = base.validate(&inst);
    if !report.is_pass() {
        return Err(DadError::Validation(report));
    }

    let sweeps: Vec<(u32, u32, u32)> =
        match (&args.sweep_defense, &args.sweep_reserve, &args.sweep_attack) {
            (None, None, None) => Vec::new(),
            (d, o, a) => {
                let ds = parse_range(d.as_deref().unwrap_or("1"))?;
                let os = parse_range(o.as_deref().unwrap_or("1"))?;
                let attacks = parse_range(a.as_deref().unwrap_or("1"))?;
                let mut combos = Vec::new();
                for &d in &ds {
                    for &o in &os {
                        for &a in &attacks {
                            combos.push((d, o, a));
                        }
                    }
                }
                combos
            }
        };

    let cases: Vec<(String, ScenarioConfig)> = if sweeps.is_empty() {
        vec![(base.name.clone(), base)]
    } else {
        sweeps
            .into_iter()
            .map(|(d, o, a)| {
                let name = format!("{}_d{d}o{o}a{a}", base.name);
                let mut scen = base.clone().with_budgets(d, o, a);
                scen.name = name.clone();
                (name, scen)
            })
            .collect()
    };

    std::fs::create_dir_all(&args.out)?;
    let jobs = args.jobs.max(1);
    let mut worst: u8 = 0;
    let chunks: Vec<Vec<(String, ScenarioConfig)>> = {
        let width = jobs.min(cases.len()).max(1);
        let mut cs: Vec<Vec<(String, ScenarioConfig)>> = vec![Vec::new(); width];
        for (i, case) in cases.into_iter().enumerate() {
            cs[i % width].push(case);
        }
        cs
    };
    let results: Vec<Result<u8, DadError>> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for chunk in &chunks {
            let inst = &inst;
            let args_ref = &args;
            let cli_backend = cli_backend.clone();
            handles.push(scope.spawn(move || -> Result<u8, DadError> {
                let backend = backend_from(&cli_backend)?;
                let mut code = 0u8;
                for (name, scen) in chunk {
                    code = code.max(solve_one(inst, scen, name, args_ref, backend.as_ref())?);
                }
                Ok(code)
            }));
        }
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    for r in results {
        worst = worst.max(r?);
    }
    Ok(worst)
}

fn solve_one(
    inst: &NetworkInstance,
    scen: &ScenarioConfig,
    name: &str,
    args: &SolveArgs,
    backend: &dyn MilpBackend,
) -> Result<u8, DadError> {
    let sol = ccg_solve(inst, scen, backend)?;
    let id = backend.id();
    let meta = BackendMeta {
        id: id.to_string(),
        feasibility_tolerance: if id.as_str() == "microlp" { 1e-8 } else { 1e-7 },
        integrality_tolerance: if id.as_str() == "microlp" { 1e-5 } else { 1e-6 },
    };
    let results = assemble_results(inst, &args.instance.display().to_string(), scen, &sol, meta);
    let out = &args.out;
    save_results(&out.join(format!("results_{name}.json")), &results)?;
    let tags = PlanTags {
        scenario: scen,
        defense: &sol.defense,
        attack: &sol.worst_attack,
    };
    std::fs::write(
        out.join(format!("{name}.dot")),
        to_dot(inst, Some(&tags), args.anonymize),
    )?;
    if let Some(geo) = to_geojson(inst, Some(&tags), args.anonymize) {
        std::fs::write(out.join(format!("{name}.geojson")), geo)?;
    }
    println!(
        "{name}: objective {:.6} gap {:.3e} iterations {} certified {} ({} ms)",
        sol.objective,
        sol.gap,
        sol.iterations,
        sol.certified,
        sol.wall.as_millis()
    );
    Ok(if sol.certified { 0 } else { 4 })
}

fn cmd_generate(args: &GenerateArgs) -> Result<u8, DadError> {
    let defaults = match &args.defaults {
        Some(p) => NetgenDefaults::from_path(p)?,
        None => NetgenDefaults::builtin(),
    };
    let spec = if let Some(path) = &args.scenario {
        let file = load_scenario(path)?;
        let mut gen = file.generator.ok_or_else(|| {
            DadError::InvalidInput("scenario file carries no generator block".into())
        })?;
        gen.seed = args.seed;
        gen
    } else {
        let family = match args.family.as_deref() {
            Some("grerec") => GeneratorFamily::Grerec {
                m: args.m.unwrap_or(15),
                n: args.n.unwrap_or(15),
                p: args.p.unwrap_or(0.7),
                q: args.q.unwrap_or(0.2),
            },
            Some("power-law") => GeneratorFamily::PowerLaw {
                n: args.nodes.unwrap_or(350),
                gamma: args.gamma.unwrap_or(3.0),
            },
            Some("exponential") => GeneratorFamily::Exponential {
                n: args.nodes.unwrap_or(199),
                law: None,
            },
            other => {
                return Err(DadError::InvalidInput(format!(
                    "unknown or missing family {other:?} (grerec | power-law | exponential)"
                )))
            }
        };
        GeneratorSpec {
            family,
            seed: args.seed,
            roles: RoleConfig {
                fuel_fraction: args.fuel_fraction,
                depot_count: args.depots,
                station_count: args.stations,
                customer_count: args.customers,
            },
        }
    };
    let raw = generate(&spec, &defaults)?;
    let built = NetworkInstance::build(&raw)?;
    save_instance(&args.out, built.spec())?;
    if let Some(scen_path) = &args.scenario_out {
        let mut scen = dadnet::netgen::default_scenario(&built, (1, 1, 1));
        scen.name = built.name.clone();
        let mut echo = scenario_echo(&scen, &built);
        echo.generator = Some(spec.clone());
        save_scenario(scen_path, &echo)?;
        println!("wrote {}", scen_path.display());
    }
    for (mode, stats) in compute_all(&built) {
        println!(
            "{}: {} nodes, {} arcs, avg degree {:.3}",
            mode, stats.nodes, stats.arcs, stats.avg_degree
        );
    }
    println!("wrote {}", args.out.display());
    Ok(0)
}

fn cmd_stats(args: &StatsArgs) -> Result<u8, DadError> {
    let inst = load_instance(&args.instance)?;
    let all = compute_all(&inst);
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&all).map_err(|e| DadError::Model(e.to_string()))?
        );
    } else {
        println!(
            "{:<10} {:>6} {:>6} {:>6} {:>9} {:>9} {:>8} {:>8} {:>10}",
            "mode",
            "nodes",
            "arcs",
            "edges",
            "density",
            "avg.deg",
            "deg.het",
            "max.deg",
            "avg.betw"
        );
        for (mode, s) in all {
            println!(
                "{:<10} {:>6} {:>6} {:>6} {:>9.4} {:>9.3} {:>8.3} {:>8} {:>10.4}",
                mode,
                s.nodes,
                s.arcs,
                s.edges,
                s.density,
                s.avg_degree,
                s.degree_heterogeneity,
                s.max_degree,
                s.avg_betweenness
            );
        }
    }
    Ok(0)
}

fn cmd_oracle(cli_backend: &Option<String>, args: &OracleArgs) -> Result<u8, DadError> {
    let inst = load_instance(&args.instance)?;
    let file = load_scenario(&args.scenario)?;
    let scen = resolve_scenario(&file, &inst)?;
    let backend = backend_from(cli_backend)?;
    let out = enumerate_minimax(&inst, &scen, backend.as_ref(), args.cap)?;
    let doc = serde_json::json!({
        "value": out.value,
        "cells": out.cells,
        "lp_solves": out.lp_solves,
        "defense": out.defense.defend.selected(&scen, dadnet::model::PlanSet::Attackable)
            .map(|(k, n)| format!("{}:{}:{}", inst.mode_name(k.mode), k.phase, inst.node_name(n)))
            .collect::<Vec<_>>(),
        "reserves_open": out.defense.open.selected(&scen, dadnet::model::PlanSet::Reserves)
            .map(|(k, n)| format!("{}:{}:{}", inst.mode_name(k.mode), k.phase, inst.node_name(n)))
            .collect::<Vec<_>>(),
        "worst_attack": out.worst_attack.attack.selected(&scen, dadnet::model::PlanSet::Attackable)
            .map(|(k, n)| format!("{}:{}:{}", inst.mode_name(k.mode), k.phase, inst.node_name(n)))
            .collect::<Vec<_>>(),
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&doc).map_err(|e| DadError::Model(e.to_string()))?
    );
    Ok(0)
}

fn cmd_bench(cli_backend: &Option<String>, args: &BenchArgs) -> Result<u8, DadError> {
    let family = match args.family.as_str() {
        "grerec" => BenchFamily::Grerec,
        "power-law" => BenchFamily::PowerLaw,
        "exponential" => BenchFamily::Exponential,
        other => {
            return Err(DadError::InvalidInput(format!(
                "unknown bench family `{other}`"
            )))
        }
    };
    let sizes: Vec<usize> = args
        .sizes
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| DadError::InvalidInput(format!("bad size `{s}`")))
        })
        .collect::<Result<_, _>>()?;
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(DadError::InvalidInput("sizes must be ascending".into()));
    }
    let mut cfg = BenchConfig::new(family, sizes);
    cfg.seed = args.seed;
    cfg.repeats = args.repeats;
    cfg.modes = args.modes;
    let backend = backend_from(cli_backend)?;
    let report = run_bench(&cfg, &NetgenDefaults::builtin(), backend.as_ref())?;
    println!(
        "{:>7} {:>7} {:>7} {:>12} {:>6} {:>10}",
        "size", "nodes", "arcs", "median_ms", "iters", "certified"
    );
    for row in &report.rows {
        println!(
            "{:>7} {:>7} {:>7} {:>12.1} {:>6} {:>10}",
            row.size, row.nodes, row.arcs, row.median_ms, row.iterations, row.certified
        );
    }
    match (report.exponent, report.r_squared) {
        (Some(e), Some(r2)) => println!(
            "fitted runtime exponent: {e:.2} (r^2 {r2:.3}); prior reported range {:?}",
            report.reference_exponents
        ),
        _ => println!("single size: no exponent fit"),
    }
    if let Some(out) = &args.out {
        let text =
            serde_json::to_string_pretty(&report).map_err(|e| DadError::Model(e.to_string()))?;
        std::fs::write(out, text)?;
    }
    Ok(0)
}

fn cmd_backends() -> Result<u8, DadError> {
    for diag in available_backends() {
        println!(
            "{}{}",
            diag.id,
            if diag.default { " (default)" } else { "" }
        );
    }
    Ok(0)
}

fn run() -> Result<u8, DadError> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Solve(args) => cmd_solve(&cli.backend, args),
        Command::Generate(args) => cmd_generate(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Oracle(args) => cmd_oracle(&cli.backend, args),
        Command::Bench(args) => cmd_bench(&cli.backend, args),
        Command::Backends => cmd_backends(),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
