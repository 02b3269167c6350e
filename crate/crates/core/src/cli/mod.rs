//! Command-line front end.
//!
//! Every subcommand computes its results in memory first and only then
//! writes artifacts, each through an atomic rename, next to an echo of the
//! effective configuration.

pub mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::connectivity::{hexagonal_connect, random_surface_points, square_connect, verify_path};
use crate::error::{Error, Result};
use crate::io::{write_csv, write_json};
use crate::lattice::{builtin_lattice, BuiltinLattice};
use crate::momentum::{
    exclusion_set_t1, fermi_slice, spectrum, thresholds, Symbol, SINGULAR_CUTOFF,
};
use crate::pipeline::{rellich_demo, RellichConfig};
use crate::ucp::{
    boundary_graph_from_box, check_a5, dirichlet_neumann_nullity, kagome_hexagon_rings,
    two_points_condition_with, SearchMode, UcpReport, Verdict,
};

pub use config::RunConfig;

#[derive(Debug, Parser)]
#[command(
    name = "lattice-spectral",
    version,
    about = "Spectral computations on periodic lattices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Print a summary of the lattice.
    Info,
    /// Band spectrum as a union of intervals.
    Spectrum,
    /// Threshold energies.
    Thresholds,
    /// Sample the real Fermi surface at --lambda.
    Fermi,
    /// Unique continuation audit on a finite box.
    Ucp,
    /// Truncated eigenvector decay pipeline.
    RellichDemo,
    /// Join a complex Fermi-surface point to the real torus.
    Connect,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Info => "info",
            Command::Spectrum => "spectrum",
            Command::Thresholds => "thresholds",
            Command::Fermi => "fermi",
            Command::Ucp => "ucp",
            Command::RellichDemo => "rellich-demo",
            Command::Connect => "connect",
        }
    }
}

/// Overrides applied on top of the configuration document.
#[derive(Debug, Default, Clone, Args)]
pub struct Flags {
    #[arg(long, global = true)]
    pub lattice: Option<String>,
    #[arg(long, global = true)]
    pub d: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long = "R", global = true)]
    pub radius: Option<f64>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long = "C", global = true)]
    pub amplitude: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub mode: Option<String>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON configuration document; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

impl Flags {
    /// Loads the configuration document (or defaults), applies the flags
    /// and validates the result.
    pub fn effective_config(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.lattice {
            c.lattice = v.clone();
        }
        if let Some(v) = self.d {
            c.d = v;
        }
        if self.lambda.is_some() {
            c.lambda = self.lambda;
        }
        if self.grid.is_some() {
            c.grid = self.grid;
        }
        if self.radius.is_some() {
            c.radius = self.radius;
        }
        if let Some(v) = self.alpha {
            c.alpha = v;
        }
        if let Some(v) = self.amplitude {
            c.amplitude = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = &self.mode {
            c.mode = v.clone();
        }
        if let Some(v) = &self.out {
            c.out = v.clone();
        }
        c.validate()?;
        Ok(c)
    }
}

/// Result of one subcommand.
#[derive(Debug, Clone)]
pub struct Outcome {
    /// False when a report or invariant check failed.
    pub ok: bool,
    pub artifacts: Vec<PathBuf>,
    pub summary: Value,
    pub failures: Vec<String>,
}

enum Artifact {
    Json(&'static str, Value),
    Csv(&'static str, Vec<String>, Vec<Vec<f64>>),
}

/// Exit status for an error: 2 for bad input, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::UnknownLattice(_)
        | Error::DimensionTooSmall { .. }
        | Error::InvalidSpec(_)
        | Error::InvalidCell { .. }
        | Error::DimensionMismatch { .. }
        | Error::BoxCapExceeded { .. }
        | Error::ExhaustiveCapExceeded { .. }
        | Error::NoHeightFunction(_)
        | Error::HexagonNotContained { .. }
        | Error::ExcludedEnergy(_)
        | Error::InvalidParameter(_)
        | Error::Json(_) => 2,
        _ => 1,
    }
}

fn default_grid(dim: usize, large: usize, small: usize) -> usize {
    match dim {
        0..=2 => large,
        3 => small,
        _ => 16,
    }
}

fn symbol(cfg: &RunConfig) -> Result<(BuiltinLattice, Symbol)> {
    let kind = cfg.kind()?;
    let spec = builtin_lattice(kind, cfg.d)?;
    Ok((kind, Symbol::from_lattice(&spec)))
}

/// Runs `cmd` and writes its artifacts under `cfg.out`.
pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let (summary, artifacts, failures) = match cmd {
        Command::Info => (info(cfg)?, Vec::new(), Vec::new()),
        Command::Spectrum => run_spectrum(cfg)?,
        Command::Thresholds => run_thresholds(cfg)?,
        Command::Fermi => run_fermi(cfg)?,
        Command::Ucp => run_ucp(cfg)?,
        Command::RellichDemo => run_rellich(cfg)?,
        Command::Connect => run_connect(cfg)?,
    };
    let mut written = Vec::new();
    if !artifacts.is_empty() {
        let cfg_path = cfg.out.join("config.json");
        write_json(&cfg_path, cfg)?;
        written.push(cfg_path);
    }
    for a in artifacts {
        let path = match a {
            Artifact::Json(name, v) => {
                let p = cfg.out.join(name);
                write_json(&p, &v)?;
                p
            }
            Artifact::Csv(name, header, rows) => {
                let p = cfg.out.join(name);
                write_csv(&p, &header, &rows)?;
                p
            }
        };
        written.push(path);
    }
    Ok(Outcome {
        ok: failures.is_empty(),
        artifacts: written,
        summary,
        failures,
    })
}

type Produced = (Value, Vec<Artifact>, Vec<String>);

fn info(cfg: &RunConfig) -> Result<Value> {
    let kind = cfg.kind()?;
    let spec = builtin_lattice(kind, cfg.d)?;
    let degrees: Vec<usize> = (0..spec.num_cells()).map(|j| spec.degree(j)).collect();
    Ok(json!({
        "lattice": spec.name(),
        "d": spec.dim(),
        "cells": spec.num_cells(),
        "degrees": degrees,
        "generators": spec.generators().len(),
        "edge_lengths": spec.edge_lengths(),
        "exclusion_set": exclusion_set_t1(kind, cfg.d),
    }))
}

fn run_spectrum(cfg: &RunConfig) -> Result<Produced> {
    let (_, sym) = symbol(cfg)?;
    let grid = cfg.grid.unwrap_or(default_grid(sym.dim(), 201, 101));
    let intervals = spectrum(&sym, grid)?;
    let v = json!({
        "lattice": cfg.lattice,
        "d": sym.dim(),
        "grid": grid,
        "intervals": intervals,
    });
    Ok((
        v.clone(),
        vec![Artifact::Json("spectrum.json", v)],
        Vec::new(),
    ))
}

fn run_thresholds(cfg: &RunConfig) -> Result<Produced> {
    let (kind, sym) = symbol(cfg)?;
    let grid = cfg.grid.unwrap_or(default_grid(sym.dim(), 64, 32));
    let report = thresholds(&sym, grid, cfg.refine_tol)?;
    let v = json!({
        "lattice": cfg.lattice,
        "d": sym.dim(),
        "grid": grid,
        "refine_tol": cfg.refine_tol,
        "thresholds": report,
        "exclusion_set": exclusion_set_t1(kind, cfg.d),
    });
    let summary = json!({
        "values": report.values,
        "unconverged": report.unconverged.len(),
    });
    Ok((
        summary,
        vec![Artifact::Json("thresholds.json", v)],
        Vec::new(),
    ))
}

fn run_fermi(cfg: &RunConfig) -> Result<Produced> {
    let lambda = cfg.lambda_required()?;
    let (_, sym) = symbol(cfg)?;
    let d = sym.dim();
    let grid = cfg.grid.unwrap_or(default_grid(d, 64, 32));
    let sample = fermi_slice(&sym, lambda, grid, cfg.tol)?;
    let mask = sample.singular_mask(SINGULAR_CUTOFF);
    let mut header: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
    header.extend(["abs_p", "grad_norm", "singular"].map(String::from));
    let rows: Vec<Vec<f64>> = (0..sample.len())
        .map(|i| {
            let mut r = sample.points[i].clone();
            r.push(sample.abs_p[i]);
            r.push(sample.gradient_norms[i]);
            r.push(if mask[i] { 1.0 } else { 0.0 });
            r
        })
        .collect();
    let summary = json!({
        "lambda": lambda,
        "grid": grid,
        "points": sample.len(),
        "singular": sample.singular_count(),
    });
    Ok((
        summary,
        vec![Artifact::Csv("fermi.csv", header, rows)],
        Vec::new(),
    ))
}

fn run_ucp(cfg: &RunConfig) -> Result<Produced> {
    let kind = cfg.kind()?;
    let spec = builtin_lattice(kind, cfg.d)?;
    let r = cfg.radius.unwrap_or(2.0);
    let lambda = cfg.lambda.unwrap_or(0.5);
    let g = boundary_graph_from_box(&spec, r)?;
    let graph_id = format!("{}-d{}-R{}", spec.name(), spec.dim(), r);
    let mode = match cfg.mode.as_str() {
        "random" => SearchMode::Random {
            samples: cfg.samples,
            seed: cfg.seed,
        },
        _ => SearchMode::Exhaustive,
    };
    let candidates = if kind == BuiltinLattice::Kagome {
        kagome_hexagon_rings(&spec, &g)?
    } else {
        Vec::new()
    };
    let tp = two_points_condition_with(&g, &mode, &candidates)?;
    let a5 = check_a5(&g);
    let n = g.interior_len();
    let zero = dirichlet_neumann_nullity(&g, &vec![0.0; n], lambda)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let random_v: Vec<f64> = (0..n)
        .map(|_| cfg.amplitude * rng.random_range(-1.0..=1.0))
        .collect();
    let random = dirichlet_neumann_nullity(&g, &random_v, lambda)?;

    let mut failures = Vec::new();
    if tp.verdict == Verdict::Holds && a5.passed() && zero.max(random) > 0 {
        failures.push(format!(
            "two-points and triangle conditions hold but the Dirichlet-Neumann problem has nullity {}",
            zero.max(random)
        ));
    }
    let reports = vec![
        UcpReport::two_points(&graph_id, &g, &tp),
        UcpReport::a5(&graph_id, &g, &a5),
        UcpReport::nullity(&format!("{graph_id}-V0"), zero),
        UcpReport::nullity(&format!("{graph_id}-Vrandom"), random),
    ];
    let v = json!({
        "graph_id": graph_id,
        "lattice": spec.name(),
        "R": r,
        "lambda": lambda,
        "interior": n,
        "boundary": g.boundary_len(),
        "reports": reports,
        "two_points": tp,
        "a5": a5,
        "nullity": { "zero_potential": zero, "random_potential": random, "random_amplitude": cfg.amplitude },
        "graph": g.document(),
    });
    let summary = json!({ "graph_id": graph_id, "reports": reports });
    Ok((summary, vec![Artifact::Json("ucp.json", v)], failures))
}

fn run_rellich(cfg: &RunConfig) -> Result<Produced> {
    let defaults = RellichConfig::default();
    let radii = match cfg.radius {
        Some(r) => vec![r / 3.0, 2.0 * r / 3.0, r],
        None => defaults.radii.clone(),
    };
    let rc = RellichConfig {
        lattice: cfg.kind()?,
        d: cfg.d,
        lambda: cfg.lambda.unwrap_or(defaults.lambda),
        amplitude: cfg.amplitude,
        alpha: cfg.alpha,
        seed: cfg.seed,
        radii,
        growth_depth: cfg.growth_depth,
        decay_terms: cfg.decay_terms,
    };
    let report = rellich_demo(&rc)?;
    let mut failures = Vec::new();
    if !report.invariants_hold {
        failures.push("growth or decay invariants failed".into());
    }
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| {
            json!({
                "radius": r.radius,
                "tail_fraction": r.tail_fraction,
                "source_tail_fraction": r.source_tail_fraction,
                "control_tail_fraction": r.control_tail_fraction,
                "growth_violations": r.growth_violations,
                "consistent": r.consistent,
            })
        })
        .collect();
    let summary = json!({
        "rows": rows,
        "invariants_hold": report.invariants_hold,
        "tail_target_met": report.tail_target_met,
        "tail_trend_decreasing": report.tail_trend_decreasing,
    });
    let v = serde_json::to_value(&report)?;
    Ok((summary, vec![Artifact::Json("rellich.json", v)], failures))
}

fn run_connect(cfg: &RunConfig) -> Result<Produced> {
    let lambda = cfg.lambda_required()?;
    let (kind, sym) = symbol(cfg)?;
    if !matches!(kind, BuiltinLattice::Square | BuiltinLattice::Hexagonal) {
        return Err(Error::InvalidParameter(format!(
            "explicit paths exist for the square and hexagonal lattices, not `{kind}`"
        )));
    }
    if exclusion_set_t1(kind, cfg.d).contains(lambda, 1e-12) == Some(true) || lambda.abs() >= 1.0 {
        return Err(Error::ExcludedEnergy(lambda));
    }
    let z0 = random_surface_points(&sym, lambda, cfg.strip, 1, cfg.seed)?.remove(0);
    let path = match kind {
        BuiltinLattice::Square => square_connect(&z0, lambda, cfg.strip, cfg.steps)?,
        _ => hexagonal_connect(&z0, lambda, cfg.strip, cfg.steps)?,
    };
    let report = verify_path(&path, &sym, cfg.tol);
    let summary = json!({
        "lambda": lambda,
        "start": z0.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
        "samples": path.len(),
        "notes": path.notes,
        "report": report,
    });
    let failures = report.failures.clone();
    Ok((
        summary,
        vec![Artifact::Csv(
            "path.csv",
            path.csv_header(),
            path.csv_rows(),
        )],
        failures,
    ))
}

/// Parses `args`, runs the subcommand and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let cfg = match cli.flags.effective_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match run(cli.command, &cfg) {
        Ok(out) => {
            let doc = json!({
                "command": cli.command.as_str(),
                "ok": out.ok,
                "summary": out.summary,
                "failures": out.failures,
                "artifacts": out.artifacts,
            });
            match crate::io::to_json_string(&doc) {
                Ok(s) => print!("{s}"),
                Err(e) => {
                    eprintln!("error: {e}");
                    return 1;
                }
            }
            for f in &out.failures {
                eprintln!("check failed: {f}");
            }
            if out.ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
