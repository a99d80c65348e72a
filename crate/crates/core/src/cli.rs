//! Command-line front end: `spectrum`, `bounds`, `simulate`, `report`.
//!
//! Exit codes: 0 success, 2 configuration/input error, 3 numeric or domain
//! error. Flags override values from an optional TOML config file. All
//! emitted files embed the code specification, the tool version, and (where
//! there are file inputs) their SHA-256 hashes; re-running a command with
//! identical inputs produces byte-identical output.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::bounds::{self, fmt_prob, BoundsRow};
use crate::codec::{GeneratorSpec, Trellis, Validation};
use crate::error::{Error, Result};
use crate::simulator::{
    read_sim_csv, run_campaign, BerBasis, CampaignParams, ChannelConfig, SimReport, SimRow,
    SIM_CSV_HEADER,
};
use crate::spectrum::{active_distance_profile, compute_spectrum, summarize, ActiveSpectrum};

#[derive(Parser)]
#[command(
    name = "convbounds",
    version,
    about = "Active-distance spectra and BER bounds for convolutional codes on the BSC"
)]
pub struct Cli {
    /// TOML config file; explicit flags take precedence over its values
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Compute the active-distance spectrum and write it as JSON
    Spectrum(SpectrumArgs),
    /// Evaluate BER bounds from a spectrum file into a CSV
    Bounds(BoundsArgs),
    /// Monte-Carlo BER/FER measurement over a grid of crossover probabilities
    Simulate(SimulateArgs),
    /// Join bounds and simulation CSVs into figure-ready data with a
    /// sandwich check per grid point
    Report(ReportArgs),
}

#[derive(Args)]
pub struct SpectrumArgs {
    /// Code specification in octal, e.g. "(13,17)"
    #[arg(long, value_name = "SPEC")]
    pub code: Option<String>,
    /// Largest burst length in tuples [default: 40]
    #[arg(long, value_name = "J")]
    pub jmax: Option<u32>,
    /// Weight cap: an integer or "auto" (= w_min + 10) [default: auto]
    #[arg(long, value_name = "W|auto")]
    pub wmax: Option<String>,
    /// Accept polynomial sets that are not coprime or of unequal degree
    #[arg(long)]
    pub allow_noncoprime: bool,
    /// Output JSON path [default: spectrum.json]
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct BoundsArgs {
    /// Spectrum JSON produced by `spectrum` [default: spectrum.json]
    #[arg(long, value_name = "FILE")]
    pub spectrum: Option<PathBuf>,
    /// Optional code specification to cross-check against the file
    #[arg(long, value_name = "SPEC")]
    pub code: Option<String>,
    /// Grid: comma list "0.01,0.02" or log-spaced "start:stop:count"
    /// [default: 0.005:0.1:15]
    #[arg(long, value_name = "GRID")]
    pub pgrid: Option<String>,
    /// Extra ber_up columns truncated at these lengths, e.g. "10,20,30,40"
    #[arg(long, value_name = "J,J,...")]
    pub per_j: Option<String>,
    /// Output CSV path [default: bounds.csv]
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Code specification in octal, e.g. "(13,17)"
    #[arg(long, value_name = "SPEC")]
    pub code: Option<String>,
    /// Grid: comma list "0.01,0.02" or log-spaced "start:stop:count"
    /// [default: 0.01,0.02,0.05]
    #[arg(long, value_name = "GRID")]
    pub pgrid: Option<String>,
    /// Frames per grid point [default: 200000]
    #[arg(long, value_name = "N")]
    pub frames: Option<u64>,
    /// Transmitted frame length in tuples, termination included
    /// [default: 1000]
    #[arg(long, value_name = "TUPLES")]
    pub frame_len: Option<u32>,
    /// Master seed [default: 1]
    #[arg(long, value_name = "SEED")]
    pub seed: Option<u64>,
    /// BER basis: codeword_bits or info_bits [default: codeword_bits]
    #[arg(long, value_name = "BASIS")]
    pub basis: Option<String>,
    /// Accept polynomial sets that are not coprime or of unequal degree
    #[arg(long)]
    pub allow_noncoprime: bool,
    /// Output path; ".json" extension selects the full-report JSON variant
    /// [default: sim.csv]
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ReportArgs {
    /// Bounds CSV from `bounds`
    pub bounds_csv: PathBuf,
    /// Simulation CSV from `simulate`
    pub sim_csv: PathBuf,
    /// Output CSV path [default: report.csv]
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

/// Defaults shared between the CLI flags and the optional config file.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub code: Option<String>,
    pub jmax: Option<u32>,
    pub wmax: Option<String>,
    pub pgrid: Option<String>,
    pub frames: Option<u64>,
    pub frame_len: Option<u32>,
    pub seed: Option<u64>,
    pub basis: Option<String>,
    pub out: Option<String>,
    pub per_j: Option<String>,
    pub allow_noncoprime: Option<bool>,
}

/// Parse argv, execute, and return the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let config = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Spectrum(args) => cmd_spectrum(&args, &config),
        Command::Bounds(args) => cmd_bounds(&args, &config),
        Command::Simulate(args) => cmd_simulate(&args, &config),
        Command::Report(args) => cmd_report(&args, &config),
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p)?;
            toml::from_str(&text)
                .map_err(|e| Error::Config(format!("bad config file {}: {e}", p.display())))
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Parse a probability grid: either a comma list or "start:stop:count" for
/// an inclusive log-spaced range. All values must lie in [0, 1/2).
pub fn parse_pgrid(text: &str) -> Result<Vec<f64>> {
    let bad = |reason: String| Error::Config(format!("bad pgrid {text:?}: {reason}"));
    let grid: Vec<f64> = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:count".into()));
        }
        let start: f64 = parts[0].parse().map_err(|_| bad("bad start".into()))?;
        let stop: f64 = parts[1].parse().map_err(|_| bad("bad stop".into()))?;
        let count: usize = parts[2].parse().map_err(|_| bad("bad count".into()))?;
        if start <= 0.0 || stop < start {
            return Err(bad("need 0 < start <= stop".into()));
        }
        if count == 0 {
            return Err(bad("count must be positive".into()));
        }
        if count == 1 {
            vec![start]
        } else {
            (0..count)
                .map(|i| start * (stop / start).powf(i as f64 / (count - 1) as f64))
                .collect()
        }
    } else {
        text.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad(format!("bad value {s:?}"))))
            .collect::<Result<Vec<f64>>>()?
    };
    if grid.is_empty() {
        return Err(bad("empty grid".into()));
    }
    for &p in &grid {
        if !(0.0..0.5).contains(&p) {
            return Err(Error::Config(format!(
                "grid value p={p} outside [0, 1/2)"
            )));
        }
    }
    Ok(grid)
}

enum WeightCap {
    Auto,
    Fixed(u32),
}

fn parse_wmax(text: &str) -> Result<WeightCap> {
    if text.eq_ignore_ascii_case("auto") {
        Ok(WeightCap::Auto)
    } else {
        text.parse::<u32>()
            .map(WeightCap::Fixed)
            .map_err(|_| Error::Config(format!("bad wmax {text:?}: expected integer or \"auto\"")))
    }
}

fn parse_cutoffs(text: &str) -> Result<Vec<u32>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<u32>()
                .map_err(|_| Error::Config(format!("bad per-j cutoff {s:?}")))
        })
        .collect()
}

fn validation(allow: bool) -> Validation {
    if allow {
        Validation::Relaxed
    } else {
        Validation::Strict
    }
}

fn cmd_spectrum(args: &SpectrumArgs, cfg: &RunConfig) -> Result<()> {
    let code = args
        .code
        .clone()
        .or_else(|| cfg.code.clone())
        .ok_or_else(|| Error::Config("--code is required".into()))?;
    let jmax = args.jmax.or(cfg.jmax).unwrap_or(40);
    let wmax_text = args
        .wmax
        .clone()
        .or_else(|| cfg.wmax.clone())
        .unwrap_or_else(|| "auto".into());
    let allow = args.allow_noncoprime || cfg.allow_noncoprime.unwrap_or(false);
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("spectrum.json"));

    let spec = GeneratorSpec::parse(&code, validation(allow))?;
    let trellis = Trellis::new(&spec);
    let m = spec.memory();
    println!(
        "code {}: n={}, m={}, {} states",
        spec.spec_string(),
        spec.n(),
        m,
        trellis.num_states()
    );

    let wmax = match parse_wmax(&wmax_text)? {
        WeightCap::Fixed(w) => w,
        WeightCap::Auto => {
            let profile = active_distance_profile(&trellis, jmax);
            let w_min = profile.values().min().copied().ok_or_else(|| {
                Error::Domain(format!("no branch merges back within J_max={jmax}"))
            })?;
            w_min + 10
        }
    };

    let spectrum = compute_spectrum(&trellis, &spec.spec_string(), jmax, wmax)?;
    fs::write(&out, spectrum.to_json_string())?;
    println!("J_max={} W_max={}", spectrum.j_max, spectrum.w_max);
    println!("{:>5} {:>8} {:>16}", "j", "a_j", "N(a_j)");
    for j in (m as u32 + 1)..=jmax.min(m as u32 + 10) {
        match spectrum.entries(j) {
            Some(entries) => {
                println!("{:>5} {:>8} {:>16}", j, entries[0].0, entries[0].1.to_string())
            }
            None => println!("{:>5} {:>8} {:>16}", j, "-", "-"),
        }
    }
    match summarize(&spectrum) {
        Ok(s) => println!("w_min={}  N_wmin={}  j_wmin={}", s.w_min, s.n_wmin, s.j_wmin),
        Err(_) => eprintln!(
            "warning: spectrum is empty; W_max={} truncated every path (see truncated flags)",
            spectrum.w_max
        ),
    }
    if spectrum.any_truncated() {
        eprintln!(
            "note: weights above W_max={} are not enumerated at some lengths",
            spectrum.w_max
        );
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_bounds(args: &BoundsArgs, cfg: &RunConfig) -> Result<()> {
    let spectrum_path = args
        .spectrum
        .clone()
        .unwrap_or_else(|| PathBuf::from("spectrum.json"));
    let pgrid_text = args
        .pgrid
        .clone()
        .or_else(|| cfg.pgrid.clone())
        .unwrap_or_else(|| "0.005:0.1:15".into());
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("bounds.csv"));

    let bytes = fs::read(&spectrum_path)?;
    let spectrum_id = sha256_hex(&bytes);
    let spectrum = ActiveSpectrum::from_json_str(&String::from_utf8_lossy(&bytes))?;

    let requested = args.code.clone().or_else(|| cfg.code.clone());
    if let Some(code) = requested {
        let canonical = GeneratorSpec::parse(&code, Validation::Relaxed)?.spec_string();
        if canonical != spectrum.code {
            return Err(Error::CodeMismatch {
                expected: canonical,
                found: spectrum.code.clone(),
            });
        }
    }

    let grid = parse_pgrid(&pgrid_text)?;
    let cutoffs = match args.per_j.clone().or_else(|| cfg.per_j.clone()) {
        Some(text) => parse_cutoffs(&text)?,
        None => Vec::new(),
    };
    let curve = bounds::curve(&spectrum, &grid, &spectrum_id, &cutoffs)?;
    fs::write(&out, curve.to_csv_string())?;
    println!(
        "wrote {} ({} grid points, j_used={}, w_min={}, N_wmin={})",
        out.display(),
        grid.len(),
        curve.j_used,
        curve.w_min,
        curve.n_wmin
    );
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs, cfg: &RunConfig) -> Result<()> {
    let code = args
        .code
        .clone()
        .or_else(|| cfg.code.clone())
        .ok_or_else(|| Error::Config("--code is required".into()))?;
    let pgrid_text = args
        .pgrid
        .clone()
        .or_else(|| cfg.pgrid.clone())
        .unwrap_or_else(|| "0.01,0.02,0.05".into());
    let frames = args.frames.or(cfg.frames).unwrap_or(200_000);
    let frame_len = args.frame_len.or(cfg.frame_len).unwrap_or(1000);
    let seed = args.seed.or(cfg.seed).unwrap_or(1);
    let basis: BerBasis = args
        .basis
        .clone()
        .or_else(|| cfg.basis.clone())
        .unwrap_or_else(|| "codeword_bits".into())
        .parse()?;
    let allow = args.allow_noncoprime || cfg.allow_noncoprime.unwrap_or(false);
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("sim.csv"));

    let spec = GeneratorSpec::parse(&code, validation(allow))?;
    let grid = parse_pgrid(&pgrid_text)?;
    let params = CampaignParams {
        frames,
        frame_len_tuples: frame_len,
        ber_basis: basis,
    };
    let mut reports: Vec<SimReport> = Vec::with_capacity(grid.len());
    for &p in &grid {
        let report = run_campaign(&spec, &ChannelConfig { p, seed }, &params)?;
        println!(
            "p={} ber={} fer={} ({} frames)",
            fmt_prob(p),
            fmt_prob(report.ber),
            fmt_prob(report.fer),
            report.frames
        );
        reports.push(report);
    }

    let json_variant = out.extension().is_some_and(|e| e == "json");
    if json_variant {
        let mut text = serde_json::to_string_pretty(&reports)?;
        text.push('\n');
        fs::write(&out, text)?;
    } else {
        let mut text = String::new();
        text.push_str(&format!("# convbounds {}\n", crate::VERSION));
        text.push_str(&format!("# code={}\n", spec.spec_string()));
        text.push_str(&format!("# rng={}\n", crate::simulator::RNG_ID));
        text.push_str(SIM_CSV_HEADER);
        text.push('\n');
        for report in &reports {
            text.push_str(&report.to_csv_row());
            text.push('\n');
        }
        fs::write(&out, text)?;
    }
    println!("wrote {}", out.display());
    Ok(())
}

/// One joined row of the report CSV.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub p: f64,
    pub ber_low: f64,
    pub ber_sim: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub ber_up: f64,
    pub sandwich: bool,
}

/// Join simulation rows against bounds rows on exact grid values. Every
/// simulated point must have a bounds row; otherwise the unmatched p values
/// are reported as a grid mismatch.
pub fn join_report(bounds_rows: &[BoundsRow], sim_rows: &[SimRow]) -> Result<Vec<ReportRow>> {
    let bounds_ps: BTreeSet<u64> = bounds_rows.iter().map(|r| r.p.to_bits()).collect();
    let unmatched: Vec<String> = sim_rows
        .iter()
        .filter(|r| !bounds_ps.contains(&r.p.to_bits()))
        .map(|r| fmt_prob(r.p))
        .collect();
    if !unmatched.is_empty() {
        return Err(Error::GridMismatch(unmatched));
    }
    let rows = sim_rows
        .iter()
        .map(|sim| {
            let b = bounds_rows
                .iter()
                .find(|b| b.p.to_bits() == sim.p.to_bits())
                .unwrap();
            ReportRow {
                p: sim.p,
                ber_low: b.ber_low,
                ber_sim: sim.ber,
                ci_low: sim.ci_low,
                ci_high: sim.ci_high,
                ber_up: b.ber_up,
                sandwich: sim.ci_low >= b.ber_low && sim.ci_high <= b.ber_up,
            }
        })
        .collect();
    Ok(rows)
}

fn cmd_report(args: &ReportArgs, cfg: &RunConfig) -> Result<()> {
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("report.csv"));

    let bounds_bytes = fs::read(&args.bounds_csv)?;
    let sim_bytes = fs::read(&args.sim_csv)?;
    let bounds_text = String::from_utf8_lossy(&bounds_bytes);
    let sim_text = String::from_utf8_lossy(&sim_bytes);
    let (bounds_meta, bounds_rows) =
        bounds::read_bounds_csv(&bounds_text, &args.bounds_csv.display().to_string())?;
    let (sim_meta, sim_rows) = read_sim_csv(&sim_text, &args.sim_csv.display().to_string())?;

    let bounds_code = bounds_meta.code.ok_or_else(|| Error::MalformedFile {
        path: args.bounds_csv.display().to_string(),
        reason: "missing \"# code=\" preamble".into(),
    })?;
    let sim_code = sim_meta.code.ok_or_else(|| Error::MalformedFile {
        path: args.sim_csv.display().to_string(),
        reason: "missing \"# code=\" preamble".into(),
    })?;
    if bounds_code != sim_code {
        return Err(Error::CodeMismatch {
            expected: bounds_code,
            found: sim_code,
        });
    }

    let rows = join_report(&bounds_rows, &sim_rows)?;

    let mut text = String::new();
    text.push_str(&format!("# convbounds {}\n", crate::VERSION));
    text.push_str(&format!("# code={bounds_code}\n"));
    text.push_str(&format!("# bounds_sha256={}\n", sha256_hex(&bounds_bytes)));
    text.push_str(&format!("# sim_sha256={}\n", sha256_hex(&sim_bytes)));
    text.push_str("p,ber_low,ber_sim,ci_low,ci_high,ber_up,sandwich\n");
    for r in &rows {
        text.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_prob(r.p),
            fmt_prob(r.ber_low),
            fmt_prob(r.ber_sim),
            fmt_prob(r.ci_low),
            fmt_prob(r.ci_high),
            fmt_prob(r.ber_up),
            if r.sandwich { "pass" } else { "fail" }
        ));
    }
    fs::write(&out, text)?;
    let passes = rows.iter().filter(|r| r.sandwich).count();
    println!(
        "wrote {} ({} points, {passes} sandwich passes)",
        out.display(),
        rows.len()
    );
    Ok(())
}
