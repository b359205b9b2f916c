//! `ptc`: evaluate, ablate and sweep photonic tensor core design points.
//!
//! Exit codes: 0 success (feasible), 1 usage or configuration error,
//! 2 evaluated design point is infeasible.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ptc_core::analog::{simulate_tinycnn, SignedMode, SimulationReport, TinyCnnOptions};
use ptc_core::report::{
    ablate, ablation_table, evaluation_table, link_budget_table, standard_sweep_cores, sweep, sweep_table,
    to_canonical_json, with_header, Header, SweepConfig, Table,
};
use ptc_core::{
    critical_path_il, evaluate, load_workload, ArchitectureVariant, CoreGeometry, DeviceCatalog, Error,
    FrequencyProfile, LaserMode, MappingMode, OutputFormat, Result, Scenario,
};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "ptc", version, about = "Photonic tensor core link, power, area and workload models")]
struct Cli {
    /// Device catalog JSON (defaults to the shipped catalog).
    #[arg(long, global = true, env = "PTC_CATALOG")]
    catalog: Option<PathBuf>,

    /// json, csv or table.
    #[arg(long, global = true)]
    format: Option<OutputFormat>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Critical-path insertion loss and optical feasibility.
    Linkbudget(Design),
    /// Link budget, power, area and optional workload performance.
    Evaluate(Design),
    /// Power breakdown for a list of architecture variants.
    Ablate(AblateArgs),
    /// Workload performance across core sizes.
    Sweep(SweepArgs),
    /// Noisy functional simulation of a small CNN.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug, Default)]
struct Design {
    /// Scenario JSON; flags given on the command line override its fields.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Core size as HxW, e.g. 144x256.
    #[arg(long)]
    core: Option<CoreGeometry>,
    /// NAME[:k=v,...], e.g. soa:fanout=64.
    #[arg(long)]
    variant: Option<ArchitectureVariant>,
    /// default, pareto or custom:HZ.
    #[arg(long)]
    profile: Option<FrequencyProfile>,
    #[arg(long)]
    allow_overclock: bool,
    /// calibrated or wallplug.
    #[arg(long)]
    laser_mode: Option<LaserMode>,
    /// Bundled workload name or JSON path.
    #[arg(long)]
    workload: Option<String>,
    /// packed or one_tap.
    #[arg(long)]
    mapping: Option<MappingMode>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct AblateArgs {
    #[command(flatten)]
    design: Design,
    /// Variants separated by `;` (default: baseline and every ablation).
    #[arg(long, value_delimiter = ';')]
    variants: Option<Vec<String>>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    design: Design,
    /// Core sizes separated by `,` (default 9x8 up to 144x256).
    #[arg(long, value_delimiter = ',')]
    cores: Option<Vec<String>>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, default_value = "tinycnn")]
    model: String,
    #[arg(long)]
    sigma_in: Option<f64>,
    #[arg(long)]
    sigma_w: Option<f64>,
    #[arg(long)]
    sigma_out: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Images per class.
    #[arg(long, default_value_t = 16)]
    samples: usize,
    /// differential or nonnegative.
    #[arg(long, default_value = "differential")]
    signed_mode: String,
}

struct Output {
    text: String,
    exit: u8,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{}", out.text);
            if !out.text.ends_with('\n') {
                println!();
            }
            ExitCode::from(out.exit)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::from(1)
        }
    }
}

fn scenario(d: &Design, default_profile: FrequencyProfile) -> Result<Scenario> {
    let mut s = match &d.scenario {
        Some(p) => Scenario::load(p)?,
        None => Scenario {
            profile: default_profile,
            ..Scenario::default()
        },
    };
    if let Some(c) = d.core {
        s.core = c;
    }
    if let Some(v) = &d.variant {
        s.variant = *v;
    }
    if let Some(p) = d.profile {
        s.profile = p;
    }
    s.allow_overclock |= d.allow_overclock;
    if let Some(m) = d.laser_mode {
        s.laser_mode = m;
    }
    if let Some(w) = &d.workload {
        s.workload = Some(w.clone());
    }
    if let Some(m) = d.mapping {
        s.mapping = m;
    }
    if let Some(seed) = d.seed {
        s.noise.seed = seed;
    }
    s.validate()?;
    Ok(s)
}

fn catalog(cli_path: &Option<PathBuf>, s: &Scenario) -> Result<DeviceCatalog> {
    match cli_path {
        Some(p) => DeviceCatalog::load(p),
        None => s.catalog(),
    }
}

fn render(format: OutputFormat, json: impl FnOnce() -> Result<String>, table: impl FnOnce() -> Table) -> Result<String> {
    match format {
        OutputFormat::Json => json(),
        OutputFormat::Csv => table().to_csv(),
        OutputFormat::Table => Ok(table().to_text()),
    }
}

fn run(cli: Cli) -> Result<Output> {
    match &cli.command {
        Command::Linkbudget(d) => {
            let s = scenario(d, FrequencyProfile::Default)?;
            let cat = catalog(&cli.catalog, &s)?;
            let report = critical_path_il(&s.core, &cat, &s.variant)?;
            let verdict = ptc_core::variant_feasibility(&report, &cat.laser, &cat.pd);
            let header = Header::new(&cat);
            let text = render(
                cli.format.unwrap_or(s.format),
                || to_canonical_json(&with_header(&header, &json!({ "link_budget": report, "feasibility": verdict }))?),
                || link_budget_table(&report),
            )?;
            Ok(Output {
                text,
                exit: if verdict.is_feasible() { 0 } else { 2 },
            })
        }
        Command::Evaluate(d) => {
            let s = scenario(d, FrequencyProfile::Default)?;
            let cat = catalog(&cli.catalog, &s)?;
            let e = evaluate(&s, &cat)?;
            let text = render(cli.format.unwrap_or(s.format), || to_canonical_json(&e), || evaluation_table(&e))?;
            Ok(Output {
                text,
                exit: if e.is_feasible() { 0 } else { 2 },
            })
        }
        Command::Ablate(a) => {
            let s = scenario(&a.design, FrequencyProfile::Pareto)?;
            let cat = catalog(&cli.catalog, &s)?;
            let variants = match &a.variants {
                Some(list) => list
                    .iter()
                    .map(|v| v.parse::<ArchitectureVariant>())
                    .collect::<Result<Vec<_>>>()?,
                None => ArchitectureVariant::ablation_set(),
            };
            let clock = s.profile.resolve(&cat, s.allow_overclock)?;
            let rows = ablate(&variants, &s.core, &cat, &s.precision, clock.hz, s.laser_mode)?;
            let header = Header::new(&cat);
            let text = render(
                cli.format.unwrap_or(OutputFormat::Csv),
                || to_canonical_json(&with_header(&header, &rows)?),
                || ablation_table(&rows),
            )?;
            Ok(Output { text, exit: 0 })
        }
        Command::Sweep(a) => {
            let s = scenario(&a.design, FrequencyProfile::Pareto)?;
            let cat = catalog(&cli.catalog, &s)?;
            let cores = match &a.cores {
                Some(list) => list
                    .iter()
                    .map(|c| c.parse::<CoreGeometry>())
                    .collect::<Result<Vec<_>>>()?,
                None => standard_sweep_cores(),
            };
            let layers = load_workload(s.workload.as_deref().unwrap_or("resnet50"))?;
            let clock = s.profile.resolve(&cat, s.allow_overclock)?;
            let cfg = SweepConfig {
                workload: &layers,
                variant: s.variant,
                precision: s.precision,
                clock_hz: clock.hz,
                laser_mode: s.laser_mode,
                mapping: s.mapping,
            };
            let rows = sweep(&cores, &cfg, &cat)?;
            let header = Header::new(&cat);
            let text = render(
                cli.format.unwrap_or(OutputFormat::Csv),
                || to_canonical_json(&with_header(&header, &rows)?),
                || sweep_table(&rows),
            )?;
            Ok(Output { text, exit: 0 })
        }
        Command::Simulate(a) => simulate(&cli, a),
    }
}

fn simulate(cli: &Cli, a: &SimulateArgs) -> Result<Output> {
    if a.model != "tinycnn" {
        return Err(Error::Usage(format!("unknown model `{}` (tinycnn)", a.model)));
    }
    let signed_mode = match a.signed_mode.to_ascii_lowercase().as_str() {
        "differential" | "differential_pair" => SignedMode::DifferentialPair,
        "nonnegative" | "non_negative" | "offset" => SignedMode::NonNegative,
        other => return Err(Error::Usage(format!("unknown signed mode `{other}` (differential, nonnegative)"))),
    };
    let mut noise = ptc_core::analog::NoiseSpec::default().with_seed(a.seed);
    if let Some(v) = a.sigma_in {
        noise.sigma_in = v;
    }
    if let Some(v) = a.sigma_w {
        noise.sigma_w = v;
    }
    if let Some(v) = a.sigma_out {
        noise.sigma_out = v;
    }
    let cat = match &cli.catalog {
        Some(p) => DeviceCatalog::load(p)?,
        None => DeviceCatalog::shipped(),
    };
    let opts = TinyCnnOptions {
        per_class: a.samples,
        signed_mode,
        ..TinyCnnOptions::default()
    };
    let report = simulate_tinycnn(&noise, &opts)?;
    let header = Header::new(&cat);
    let text = render(
        cli.format.unwrap_or(OutputFormat::Json),
        || to_canonical_json(&with_header(&header, &report)?),
        || simulation_table(&report),
    )?;
    Ok(Output { text, exit: 0 })
}

fn simulation_table(r: &SimulationReport) -> Table {
    let mut t = Table::new(&["layer", "mean", "std", "min", "max"]);
    for l in &r.layers {
        t.push(vec![
            l.name.clone(),
            format!("{:.6}", l.mean),
            format!("{:.6}", l.std),
            format!("{:.6}", l.min),
            format!("{:.6}", l.max),
        ]);
    }
    t.push(vec![
        "accuracy".into(),
        format!("{:.4}", r.accuracy),
        String::new(),
        String::new(),
        format!("{} samples", r.samples),
    ]);
    t
}
