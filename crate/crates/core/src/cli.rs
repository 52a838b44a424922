//! Command-line front end.
//!
//! `simulate` options may also come from a flat `key = value` file passed
//! with `--config`; keys are the long flag names without dashes in front
//! (`code`, `method`, `M`, `iters`, `nl`, `sigma2-ned`, `ebn0`, `seed`,
//! `target-errors`, `max-trials`, `out`, `no-early-stop`, `random-messages`,
//! `h-variant`). Flags given on the command line take precedence over the
//! file. Configuration problems exit with status 2.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automorphisms::{self, Permutation};
use crate::bp::TannerGraph;
use crate::codes::{self, load_code, CodeBundle, HVariant, Structure};
use crate::ensemble::{EnsembleSpec, Method, AED_QC_DELETED_ROWS};
use crate::error::{Error, Result};
use crate::gf2;
use crate::sim::{self, SimOptions, StopRule, SweepResult};

#[derive(Debug, Parser)]
#[command(name = "ensldpc", version, about = "Ensemble BP decoding of short LDPC codes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte-Carlo BLER / UER / recovery-probability sweep.
    Simulate(SimulateArgs),
    /// Parameters of a built-in code.
    CodeInfo { code: String },
    /// Validate the automorphism groups of a built-in code.
    CheckAutomorphisms { code: String },
    /// Undetected error rate of plain flooding BP at several iteration counts.
    Uer(UerArgs),
}

#[derive(Debug, Args, Default)]
pub struct SimulateArgs {
    #[arg(long)]
    pub code: Option<String>,
    /// bp, lbp, mbbp, aed, sed, ned, sbp or ml-oracle.
    #[arg(long)]
    pub method: Option<String>,
    /// Ensemble size.
    #[arg(long = "M")]
    pub m: Option<usize>,
    /// BP iterations per constituent decoder.
    #[arg(long)]
    pub iters: Option<usize>,
    /// Checks per layer for layered decoders.
    #[arg(long)]
    pub nl: Option<usize>,
    #[arg(long = "sigma2-ned")]
    pub sigma2_ned: Option<f64>,
    /// Eb/N0 grid in dB as `start:step:end`, or a single value.
    #[arg(long)]
    pub ebn0: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "target-errors")]
    pub target_errors: Option<u64>,
    #[arg(long = "max-trials")]
    pub max_trials: Option<u64>,
    /// CSV destination; without it the CSV goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long = "no-early-stop")]
    pub no_early_stop: bool,
    /// Transmit random codewords instead of the all-zero word.
    #[arg(long = "random-messages")]
    pub random_messages: bool,
    /// default, systematic or random-minweight.
    #[arg(long = "h-variant")]
    pub h_variant: Option<String>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct UerArgs {
    #[arg(long)]
    pub code: String,
    /// Comma-separated iteration counts.
    #[arg(long, default_value = "8,32")]
    pub iters: String,
    #[arg(long)]
    pub ebn0: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Undetected errors to collect at the smallest iteration count.
    #[arg(long = "target-errors", default_value_t = 100)]
    pub target_errors: u64,
    #[arg(long = "max-trials", default_value_t = 10_000_000)]
    pub max_trials: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long = "h-variant", default_value = "default")]
    pub h_variant: String,
}

/// Fully resolved `simulate` settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub code: String,
    pub spec: EnsembleSpec,
    pub ebn0_db: Vec<f64>,
    pub stop: StopRule,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub random_messages: bool,
}

/// Parses `start:step:end` (endpoints included within 1e-9) or one value.
pub fn parse_ebn0_grid(s: &str) -> Result<Vec<f64>> {
    let bad = |m: &str| Error::config("ebn0", format!("`{s}`: {m}"));
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let nums = parts
        .iter()
        .map(|p| p.parse::<f64>().map_err(|_| bad("not a number")))
        .collect::<Result<Vec<_>>>()?;
    if nums.iter().any(|x| !x.is_finite()) {
        return Err(bad("values must be finite"));
    }
    match nums[..] {
        [single] => Ok(vec![single]),
        [start, step, end] => {
            if step <= 0.0 {
                return Err(bad("step must be positive"));
            }
            if end < start - 1e-9 {
                return Err(bad("end lies below start"));
            }
            let count = ((end - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| start + i as f64 * step).collect())
        }
        _ => Err(bad("expected start:step:end")),
    }
}

fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::config("config", format!("line {}: expected key = value", i + 1)))?;
        map.insert(k.trim().trim_start_matches("--").to_string(), v.trim().to_string());
    }
    Ok(map)
}

const CONFIG_KEYS: [&str; 14] = [
    "code",
    "method",
    "M",
    "iters",
    "nl",
    "sigma2-ned",
    "ebn0",
    "seed",
    "target-errors",
    "max-trials",
    "out",
    "no-early-stop",
    "random-messages",
    "h-variant",
];

fn parse_field<T: std::str::FromStr>(field: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::config(field, format!("cannot parse `{v}`")))
}

fn parse_bool(field: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::config(field, format!("`{v}` is not a boolean"))),
    }
}

/// Merges the optional config file with the flags (flags win) and checks
/// that every method-specific field fits the method.
pub fn resolve_simulate(args: &SimulateArgs) -> Result<ExperimentConfig> {
    let file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::config("config", format!("{}: {e}", path.display())))?;
            parse_config_file(&text)?
        }
        None => BTreeMap::new(),
    };
    if let Some(unknown) = file.keys().find(|k| !CONFIG_KEYS.contains(&k.as_str())) {
        return Err(Error::config(unknown.clone(), "unknown configuration key"));
    }
    let from_file = |key: &str| file.get(key).map(String::as_str);

    fn pick<T: std::str::FromStr>(flag: Option<T>, key: &str, file: Option<&str>) -> Result<Option<T>> {
        match (flag, file) {
            (Some(v), _) => Ok(Some(v)),
            (None, Some(s)) => parse_field(key, s).map(Some),
            (None, None) => Ok(None),
        }
    }

    let code = pick(args.code.clone(), "code", from_file("code"))?
        .ok_or_else(|| Error::config("code", "missing; one of simplex63, pg273, 5g132"))?;
    let method: Method = match pick(args.method.clone(), "method", from_file("method"))? {
        Some(s) => s.parse::<Method>()?,
        None => return Err(Error::config("method", "missing")),
    };
    let m = pick(args.m, "M", from_file("M"))?;
    let iters = pick(args.iters, "iters", from_file("iters"))?;
    let nl = pick(args.nl, "nl", from_file("nl"))?;
    let sigma2 = pick(args.sigma2_ned, "sigma2-ned", from_file("sigma2-ned"))?;
    let grid = pick(args.ebn0.clone(), "ebn0", from_file("ebn0"))?
        .ok_or_else(|| Error::config("ebn0", "missing; expected start:step:end"))?;
    let seed = pick(args.seed, "seed", from_file("seed"))?.unwrap_or(1);
    let target = pick(args.target_errors, "target-errors", from_file("target-errors"))?;
    let max_trials = pick(args.max_trials, "max-trials", from_file("max-trials"))?;
    let out = pick(args.out.clone(), "out", from_file("out"))?;
    let no_early_stop = args.no_early_stop
        || from_file("no-early-stop")
            .map(|v| parse_bool("no-early-stop", v))
            .transpose()?
            .unwrap_or(false);
    let random_messages = args.random_messages
        || from_file("random-messages")
            .map(|v| parse_bool("random-messages", v))
            .transpose()?
            .unwrap_or(false);
    let h_variant = match pick(args.h_variant.clone(), "h-variant", from_file("h-variant"))? {
        Some(s) => Some(s.parse::<HVariant>()?),
        None => None,
    };

    if method.is_ensemble() {
        if m == Some(0) {
            return Err(Error::config("M", "ensemble size must be positive"));
        }
    } else if m.is_some_and(|m| m != 1) {
        return Err(Error::config("M", format!("method {method} runs a single decoder")));
    }
    if sigma2.is_some() && method != Method::Ned {
        return Err(Error::config("sigma2-ned", format!("only used by ned, not {method}")));
    }
    if let Some(s) = sigma2 {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::config("sigma2-ned", "variance must be non-negative"));
        }
    }
    if nl.is_some() && !method.is_layered() {
        return Err(Error::config(
            "nl",
            format!("only used by layered methods, not {method}"),
        ));
    }
    if nl == Some(0) {
        return Err(Error::config("nl", "layer size must be positive"));
    }
    if method == Method::MlOracle && (iters.is_some() || h_variant.is_some()) {
        return Err(Error::config(
            if iters.is_some() { "iters" } else { "h-variant" },
            "not used by ml-oracle",
        ));
    }

    let default_iters = if method.is_layered() { 4 } else { 8 };
    let mut spec = EnsembleSpec::new(
        method,
        if method.is_ensemble() { m.unwrap_or(8) } else { 1 },
        iters.unwrap_or(default_iters),
    );
    spec.n_l = nl;
    spec.sigma2_ned = sigma2;
    spec.h_variant = h_variant;
    spec.early_stop = !no_early_stop;

    let defaults = StopRule::default();
    Ok(ExperimentConfig {
        code,
        spec,
        ebn0_db: parse_ebn0_grid(&grid)?,
        stop: StopRule::new(
            target.unwrap_or(defaults.target_errors),
            max_trials.unwrap_or(defaults.max_trials),
        ),
        seed,
        out,
        random_messages,
    })
}

fn summary_table(s: &SweepResult) -> String {
    let label = match (s.m, s.iters) {
        (1, 0) => s.decoder.clone(),
        (1, it) => format!("{}-{it}", s.decoder),
        (m, it) => format!("{}-{m} {}-{it}", s.method.to_uppercase(), s.decoder),
    };
    let mut t = format!(
        "{} {label}\n{:>8} {:>10} {:>7} {:>10} {:>10} {:>10}\n",
        s.code, "Eb/N0", "trials", "errors", "BLER", "UER", "rho"
    );
    for p in &s.points {
        let rho = p
            .rho_direct()
            .filter(|_| s.m > 1)
            .map(|r| format!("{r:.3}"))
            .unwrap_or_else(|| "-".into());
        t.push_str(&format!(
            "{:>8.2} {:>10} {:>7} {:>10.3e} {:>10.3e} {:>10}\n",
            p.ebn0_db,
            p.trials(),
            p.counts.block_errors,
            p.bler(),
            p.uer(),
            rho
        ));
    }
    t
}

fn emit_csv(csv: &str, summary: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, csv)?;
            print!("{summary}");
            println!("wrote {}", path.display());
        }
        None => {
            eprint!("{summary}");
            print!("{csv}");
        }
    }
    std::io::stdout().flush()?;
    Ok(())
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let cfg = resolve_simulate(args)?;
    let bundle = load_code(&cfg.code)?;
    if cfg.spec.method == Method::MlOracle && bundle.code.k > sim::ML_MAX_K {
        return Err(Error::config(
            "method",
            format!(
                "ml-oracle needs K <= {}, {} has K = {}",
                sim::ML_MAX_K,
                cfg.code,
                bundle.code.k
            ),
        ));
    }
    let options = SimOptions {
        random_messages: cfg.random_messages,
        ..SimOptions::default()
    };
    let sweep = sim::run_sweep(&bundle, &cfg.spec, &cfg.ebn0_db, &cfg.stop, cfg.seed, &options)?;
    emit_csv(&sweep.to_csv(), &summary_table(&sweep), cfg.out.as_deref())
}

/// Two significant digits.
fn two_sig(x: f64) -> String {
    let decimals = (1 - x.abs().log10().floor() as i32).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn code_info_report(bundle: &CodeBundle) -> Result<String> {
    let c = &bundle.code;
    let structure = match c.structure {
        Structure::Cyclic => "cyclic".to_string(),
        Structure::QuasiCyclic { z } => format!("quasi-cyclic Z={z}"),
        Structure::Unstructured => "unstructured".to_string(),
    };
    let mut r = format!("N={} K={} R={} {}\n", c.n, c.k, two_sig(c.rate()), structure);
    r.push_str(&format!(
        "h_default: {}x{} rank {} with {} ones\n",
        c.h_default.rows(),
        c.n,
        gf2::rank(&c.h_default),
        c.h_default.count_ones()
    ));
    match &bundle.pool {
        Some(p) => r.push_str(&format!("check pool: {} checks of weight {}\n", p.len(), p.min_weight)),
        None => r.push_str("check pool: none\n"),
    }
    let groups = match c.structure {
        Structure::Cyclic => format!("S0 (order {}), S1 (order {})", c.n, automorphisms::s1_order(c.n)?),
        Structure::QuasiCyclic { z } => format!("QC shifts (order {z})"),
        Structure::Unstructured => "none".to_string(),
    };
    r.push_str(&format!("automorphism groups: {groups}\n"));
    Ok(r)
}

pub fn cmd_code_info(code: &str) -> Result<()> {
    print!("{}", code_info_report(&load_code(code)?)?);
    Ok(())
}

fn count_passing(group: &[Permutation], bundle: &CodeBundle) -> usize {
    group
        .iter()
        .filter(|p| automorphisms::is_automorphism(p, &bundle.code))
        .count()
}

const PROBE_INPUTS: usize = 200;
const PROBE_ITERS: usize = 8;

fn random_llrs(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..4.0)).collect()
}

pub fn check_automorphisms_report(bundle: &CodeBundle, seed: u64) -> Result<String> {
    let c = &bundle.code;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = String::new();
    match c.structure {
        Structure::Cyclic => {
            let s0 = automorphisms::s0_group(c.n);
            r.push_str(&format!("S0: {}/{} pass\n", count_passing(&s0, bundle), s0.len()));
            let s1 = automorphisms::s1_group(c.n)?;
            r.push_str(&format!("S1: {}/{} pass\n", count_passing(&s1, bundle), s1.len()));

            if let Some(pool) = &bundle.pool {
                let circ = automorphisms::cyclic_orbit(&pool.checks[0])?;
                let graph = TannerGraph::from_matrix(&circ);
                let mut commuting = 0;
                for _ in 0..PROBE_INPUTS {
                    let l = random_llrs(c.n, &mut rng);
                    let p = &s0[rng.random_range(1..c.n)];
                    commuting += usize::from(automorphisms::bp_commutes(&graph, p, &l, PROBE_ITERS)?);
                }
                r.push_str(&format!(
                    "S0 equivariance of BP on the {}-row circulant matrix: {commuting}/{PROBE_INPUTS} inputs\n",
                    circ.rows()
                ));
            }
        }
        Structure::QuasiCyclic { z } => {
            let qc = automorphisms::qc_group(c.n, z)?;
            r.push_str(&format!("QC: {}/{} pass\n", count_passing(&qc, bundle), qc.len()));

            let full = TannerGraph::from_matrix(&c.h_default);
            let deleted = TannerGraph::from_matrix(&codes::break_qc_symmetry(&c.h_default, &AED_QC_DELETED_ROWS)?);
            let mut commuting = 0;
            let mut witness = None;
            for i in 0..PROBE_INPUTS {
                let l = random_llrs(c.n, &mut rng);
                let d = rng.random_range(1..z);
                commuting += usize::from(automorphisms::bp_commutes(&full, &qc[d], &l, PROBE_ITERS)?);
                if witness.is_none() && !automorphisms::bp_commutes(&deleted, &qc[d], &l, PROBE_ITERS)? {
                    witness = Some((i, d));
                }
            }
            r.push_str(&format!(
                "QC equivariance of BP on the full matrix: {commuting}/{PROBE_INPUTS} inputs\n"
            ));
            match witness {
                Some((i, d)) => r.push_str(&format!(
                    "non-equivariance witness after deleting {} rows: input {i}, shift {d}\n",
                    AED_QC_DELETED_ROWS.len()
                )),
                None => r.push_str("no non-equivariance witness found after row deletion\n"),
            }
        }
        Structure::Unstructured => r.push_str("no structural automorphisms\n"),
    }
    Ok(r)
}

pub fn cmd_check_automorphisms(code: &str) -> Result<()> {
    print!("{}", check_automorphisms_report(&load_code(code)?, 1)?);
    Ok(())
}

pub fn cmd_uer(args: &UerArgs) -> Result<()> {
    let bundle = load_code(&args.code)?;
    let iters = args
        .iters
        .split(',')
        .map(|s| parse_field::<usize>("iters", s.trim()))
        .collect::<Result<Vec<_>>>()?;
    let grid = parse_ebn0_grid(&args.ebn0)?;
    let variant: HVariant = args.h_variant.parse()?;
    let stop = StopRule::new(args.target_errors, args.max_trials);
    let sweeps = sim::measure_uer(
        &bundle,
        variant,
        &grid,
        &iters,
        &stop,
        args.seed,
        &SimOptions::default(),
    )?;
    let summary: String = sweeps.iter().map(summary_table).collect();
    emit_csv(&sim::write_csv(&sweeps), &summary, args.out.as_deref())
}

/// Runs the parsed command and maps errors to exit codes: 2 for
/// configuration problems, 1 for everything else.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::CodeInfo { code } => cmd_code_info(code),
        Command::CheckAutomorphisms { code } => cmd_check_automorphisms(code),
        Command::Uer(a) => cmd_uer(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::Config { .. }) {
                2
            } else {
                1
            }
        }
    }
}
