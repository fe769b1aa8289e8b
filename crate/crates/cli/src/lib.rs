//! Experiment runner behind the `crn-sense` binary.
//!
//! Every command writes CSV (or, for `bisect`, `key=value` text) with
//! shortest round-trip float formatting, and a `<output>.manifest` file
//! next to each file it writes.

pub mod args;
pub mod commands;
mod error;
pub mod fixtures;
pub mod manifest;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use crn_sense::{BisectionConfig, RngSeed, ThresholdPair, TrialConfig};

pub use args::Cli;
use args::{BisectArgs, CollisionArgs, Command, MonteCarloArgs, RocArgs, SensingArgs, TablesArgs};
pub use error::CliError;
use fixtures::Table;
use manifest::RunManifest;

pub fn run(cli: Cli) -> Result<(), CliError> {
    let started = Instant::now();
    let (mut manifest, written) = match cli.command {
        Command::Tables(a) => tables(a)?,
        Command::Roc(a) => roc(a)?,
        Command::Collision(a) => collision(a)?,
        Command::Bisect(a) => bisect(a)?,
    };
    if let Some(first) = written.first() {
        manifest.outputs = written.clone();
        manifest.duration = started.elapsed();
        let path = manifest.write_next_to(first)?;
        log::info!(
            "wrote {} output(s), manifest {}",
            written.len(),
            path.display()
        );
    }
    Ok(())
}

fn emit(out: Option<&Path>, body: &str) -> Result<Vec<PathBuf>, CliError> {
    match out {
        Some(path) => {
            fs::write(path, body).map_err(|e| CliError::io(path, e))?;
            Ok(vec![path.to_path_buf()])
        }
        None => {
            io::stdout()
                .write_all(body.as_bytes())
                .map_err(|e| CliError::io("<stdout>", e))?;
            Ok(Vec::new())
        }
    }
}

fn record_sensing(m: &mut RunManifest, s: &SensingArgs) {
    m.param("snr_db", s.snr_db)
        .param("u", s.u)
        .param("samples", s.samples)
        .param("noise_var", s.noise_var);
}

fn record_mc(m: &mut RunManifest, mc: &MonteCarloArgs) {
    m.seed = Some(mc.seed);
    m.param("trials", mc.trials)
        .param("chunks", mc.chunks)
        .param("model", mc.model)
        .param("mode", mc.mode);
}

fn trial_config(s: &SensingArgs, mc: &MonteCarloArgs) -> Result<TrialConfig, CliError> {
    let mut config = TrialConfig::new(mc.trials, RngSeed(mc.seed), s.params()?, mc.model);
    config.mode = mc.mode;
    config.parallel_chunks = mc.chunks;
    config.validate()?;
    Ok(config)
}

fn bisection(max_iter: u32) -> Result<BisectionConfig, CliError> {
    let cfg = BisectionConfig::with_max_iter(max_iter);
    cfg.validate()?;
    Ok(cfg)
}

type Outcome = (RunManifest, Vec<PathBuf>);

fn tables(a: TablesArgs) -> Result<Outcome, CliError> {
    let table = Table::try_from(a.which)?;
    let body = commands::tables_csv(table, &a.sensing.params()?, &bisection(a.max_iter)?)?;
    let mut m = RunManifest::new("tables");
    m.param("which", a.which).param("max_iter", a.max_iter);
    record_sensing(&mut m, &a.sensing);
    m.param("fixture_version", fixtures::FIXTURE_VERSION);
    Ok((m, emit(a.out.as_deref(), &body)?))
}

/// `dir/name.csv` → `dir/name_<suffix>.csv`.
fn variant_path(base: &Path, suffix: &str) -> PathBuf {
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match base.extension() {
        Some(ext) => format!("{stem}_{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{suffix}"),
    };
    base.with_file_name(name)
}

fn roc(a: RocArgs) -> Result<Outcome, CliError> {
    let config = trial_config(&a.sensing, &a.mc)?;
    let grid = a.grid.unwrap_or_else(|| commands::default_grid(a.mc.model));
    let width = a
        .fuzzy_width
        .unwrap_or_else(|| commands::default_fuzzy_width(a.mc.model));
    let outputs = commands::roc_csvs(&grid.points(), width, &config, &bisection(a.max_iter)?)?;

    let mut m = RunManifest::new("roc");
    record_sensing(&mut m, &a.sensing);
    record_mc(&mut m, &a.mc);
    m.param("grid", grid)
        .param("fuzzy_width", width)
        .param("max_iter", a.max_iter)
        .param("analytic_form", commands::form_for(a.mc.model));
    let mut written = Vec::new();
    for (suffix, body) in [
        ("single", &outputs.single),
        ("double", &outputs.double),
        ("optimum", &outputs.optimum),
    ] {
        written.extend(emit(Some(&variant_path(&a.out, suffix)), body)?);
    }
    Ok((m, written))
}

fn collision(a: CollisionArgs) -> Result<Outcome, CliError> {
    let (pairs, energies) = if a.paper_table5 {
        let pairs = commands::TABLE5_PAIRS
            .iter()
            .map(|&(l, h)| ThresholdPair::new(l, h))
            .collect::<Result<Vec<_>, _>>()?;
        (pairs, vec![commands::TABLE5_ENERGY])
    } else {
        let pairs = a
            .pairs
            .iter()
            .map(|p| ThresholdPair::new(p.low, p.high))
            .collect::<Result<Vec<_>, _>>()?;
        let energies = if a.energies.is_empty() {
            vec![commands::TABLE5_ENERGY]
        } else {
            a.energies.clone()
        };
        (pairs, energies)
    };
    let config = trial_config(&a.sensing, &a.mc)?;
    let body = commands::collision_csv(&pairs, &energies, &config, &bisection(a.max_iter)?)?;

    let mut m = RunManifest::new("collision");
    record_sensing(&mut m, &a.sensing);
    record_mc(&mut m, &a.mc);
    let pair_list: Vec<String> = pairs
        .iter()
        .map(|p| format!("{}:{}", p.low(), p.high()))
        .collect();
    let energy_list: Vec<String> = energies.iter().map(f64::to_string).collect();
    m.param("pairs", pair_list.join(" "))
        .param("energies", energy_list.join(" "))
        .param("max_iter", a.max_iter)
        .param("analytic_form", commands::form_for(a.mc.model));
    Ok((m, emit(a.out.as_deref(), &body)?))
}

fn bisect(a: BisectArgs) -> Result<Outcome, CliError> {
    let pair = ThresholdPair::new(a.lambda_low, a.lambda_high)?;
    let text = commands::bisect_text(pair, a.energy, &bisection(a.max_iter)?)?;
    let mut written = emit(None, &text)?;
    if let Some(path) = a.out.as_deref() {
        written = emit(Some(path), &text)?;
    }
    let mut m = RunManifest::new("bisect");
    m.param("lambda_low", a.lambda_low)
        .param("lambda_high", a.lambda_high)
        .param("energy", a.energy)
        .param("max_iter", a.max_iter);
    Ok((m, written))
}
