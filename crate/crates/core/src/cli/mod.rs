//! Command line front end.
//!
//! Exit codes: 0 Certified / all rows match, 1 Falsified / mismatch,
//! 2 Inconclusive, 3 usage, schema or runtime error.

pub mod config;
pub mod plot;

use crate::cones::ConeKind;
use crate::error::{Error, Result};
use crate::extremality::SequenceSpec;
use crate::geometry::SetExpr;
use crate::norms::NormSpec;
use crate::registry::{self, get_example, run_example, RunBudgets};
use crate::separation::{dual_infimum, search_certificate, verify_certificate, SeparationCertificate, SeparationSearchParams};
use crate::Outcome;
use clap::{Parser, Subcommand, ValueEnum};
use config::{RunConfig, SCHEMA_VERSION};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const RMAX_ENV: &str = "VEXT_RMAX";

#[derive(Debug, Parser)]
#[command(name = "vext", version, about = "Sequential extremality, stationarity and separation checks")]
pub struct Cli {
    /// Print a machine-readable JSON report on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for every randomized stage.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the tabular part of the report as CSV.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SeparationMode {
    Search,
    Verify,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the built-in examples.
    ListExamples,
    /// Run every registered fact of an example through its checker.
    RunExample { id: String },
    /// Check the property named in a config file.
    Check { config: PathBuf },
    /// Search or verify separation certificates.
    Separation {
        config: PathBuf,
        #[arg(long, value_enum)]
        mode: SeparationMode,
        /// Certificate file (written by search, read by verify).
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Render a planar example or config as SVG.
    Plot {
        /// Registry id or config path.
        target: String,
        /// Output path (alternatively `--out`).
        #[arg(value_name = "OUT", conflicts_with = "out", required_unless_present = "out")]
        out_path: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Config of the `separation` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparationConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub example: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence_label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sets: Option<Vec<SetExpr>>,
    /// Single sequence `{x^k}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<SequenceSpec>,
    pub eps: Vec<f64>,
    #[serde(default)]
    pub cone_kind: ConeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<NormSpec>,
    #[serde(default)]
    pub separation: SeparationSearchParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl SeparationConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut c: SeparationConfig =
            serde_json::from_str(&src).map_err(|e| Error::Config(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        if c.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!("field `schema_version`: expected {SCHEMA_VERSION}, found {}", c.schema_version)));
        }
        if c.eps.is_empty() || c.eps.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::Config("field `eps`: expected positive values".into()));
        }
        if let Some(id) = c.example.take() {
            let e = get_example(&id)?;
            let sets = e.sets().ok_or_else(|| Error::Config(format!("{id} is a problem fixture; give `sets` directly")))?;
            c.sets.get_or_insert_with(|| sets.to_vec());
            if c.sequence.is_none() {
                let label = c.sequence_label.take();
                let ns = match &label {
                    Some(l) => e.sequences.iter().find(|s| &s.label == l),
                    None => e.sequences.iter().find(|s| s.seq.is_single()),
                }
                .ok_or_else(|| Error::Config(format!("{id}: no single sequence {}", label.unwrap_or_default())))?;
                c.sequence = Some(ns.seq.clone());
            }
        }
        if c.sets.is_none() {
            return Err(Error::Config("missing field `sets`".into()));
        }
        if c.sequence.is_none() {
            return Err(Error::Config("missing field `sequence`".into()));
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateFile {
    pub schema_version: u32,
    pub certificates: Vec<SeparationCertificate>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub outcome: Option<Outcome>,
    pub exit_code: i32,
    pub result: Value,
    pub config: Value,
    pub wall_time_ms: f64,
}

struct Ctx {
    json: bool,
    seed: Option<u64>,
    csv: Option<PathBuf>,
    started: Instant,
}

impl Ctx {
    fn emit(&self, command: &str, outcome: Option<Outcome>, exit_code: i32, result: Value, config: Value, text: &str) -> Result<i32> {
        let mut out = std::io::stdout().lock();
        if self.json {
            let r = Report {
                command: command.into(),
                version: env!("CARGO_PKG_VERSION").into(),
                seed: self.seed,
                outcome,
                exit_code,
                result,
                config,
                wall_time_ms: self.started.elapsed().as_secs_f64() * 1e3,
            };
            writeln!(out, "{}", serde_json::to_string_pretty(&r)?)?;
        } else {
            write!(out, "{text}")?;
        }
        Ok(exit_code)
    }

    fn write_csv(&self, csv: &str) -> Result<()> {
        if let Some(p) = &self.csv {
            std::fs::write(p, csv).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
        }
        Ok(())
    }
}

fn rmax() -> Result<Option<f64>> {
    match std::env::var(RMAX_ENV) {
        Ok(v) => v.trim().parse::<f64>().map(Some).map_err(|_| Error::Config(format!("{RMAX_ENV} is not a number: {v}"))),
        Err(_) => Ok(None),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            return code;
        }
    };
    let json = cli.json;
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            if json {
                let _ = writeln!(std::io::stdout(), "{}", json!({"error": e.to_string(), "exit_code": 3}));
            }
            let _ = writeln!(std::io::stderr(), "error: {e}");
            3
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    let ctx = Ctx { json: cli.json, seed: cli.seed, csv: cli.csv, started: Instant::now() };
    match cli.command {
        Command::ListExamples => list_examples(&ctx),
        Command::RunExample { id } => cmd_run_example(&ctx, &id),
        Command::Check { config } => cmd_check(&ctx, &config),
        Command::Separation { config, mode, cert } => cmd_separation(&ctx, &config, mode, cert),
        Command::Plot { target, out_path, out } => {
            let out = out.or(out_path).expect("clap requires an output path");
            cmd_plot(&ctx, &target, &out)
        }
    }
}

fn list_examples(ctx: &Ctx) -> Result<i32> {
    let mut text = String::new();
    for (id, d) in registry::list() {
        text.push_str(&format!("{id:<8} {d}\n"));
    }
    if ctx.json {
        let mut out = std::io::stdout().lock();
        writeln!(out, "{}", serde_json::to_string_pretty(&registry::all())?)?;
        return Ok(0);
    }
    ctx.emit("list-examples", None, 0, Value::Null, Value::Null, &text)
}

fn cmd_run_example(ctx: &Ctx, id: &str) -> Result<i32> {
    let mut budgets = RunBudgets::default();
    if let Some(s) = ctx.seed {
        budgets.check.shift_search.seed = s;
        budgets.check.search.seed = s;
        budgets.separation.seed = s;
    }
    if let Some(r) = rmax()? {
        budgets.check.search.radius_cap = r;
        budgets.opt.global_cap = r;
    }
    let report = run_example(id, &budgets)?;
    ctx.write_csv(&report.to_csv())?;
    let code = report.exit_code();
    let mut text = String::new();
    for r in &report.rows {
        text.push_str(&format!("{:<12} {} [{}]: expected {}, observed {}\n", format!("{:?}", r.status), r.fact, r.location, r.expected, r.observed));
    }
    text.push_str(&format!("{id}: {} rows, exit {code}\n", report.rows.len()));
    let outcome = match code {
        0 => Outcome::Certified,
        1 => Outcome::Falsified,
        _ => Outcome::Inconclusive,
    };
    ctx.emit("run-example", Some(outcome), code, serde_json::to_value(&report)?, json!({"id": id, "budgets": budgets}), &text)
}

fn cmd_check(ctx: &Ctx, path: &Path) -> Result<i32> {
    let cfg = RunConfig::load(path)?.resolve(ctx.seed, rmax()?)?;
    let checked = config::execute(&cfg)?;
    ctx.write_csv(&checked.csv)?;
    let code = checked.outcome.exit_code();
    let text = format!("{:?}: {}\n", cfg.property, checked.outcome);
    ctx.emit("check", Some(checked.outcome), code, checked.result, serde_json::to_value(&cfg)?, &text)
}

fn cmd_separation(ctx: &Ctx, path: &Path, mode: SeparationMode, cert: Option<PathBuf>) -> Result<i32> {
    let mut cfg = SeparationConfig::load(path)?;
    if let Some(s) = ctx.seed.or(cfg.seed) {
        cfg.seed = Some(s);
        cfg.separation.seed = s;
    }
    if let Some(n) = &cfg.norm {
        cfg.separation.norm = n.clone();
    }
    let sets = cfg.sets.clone().expect("checked on load");
    let seq = cfg.sequence.clone().expect("checked on load");
    let echo = serde_json::to_value(&cfg)?;
    match mode {
        SeparationMode::Search => {
            let cert_path = cert.unwrap_or_else(|| path.with_extension("cert.json"));
            let mut certificates = Vec::new();
            let mut rows = Vec::new();
            let mut falsified = false;
            let mut csv = String::from("eps,found,k,dual_sum\n");
            for &eps in &cfg.eps {
                match search_certificate(&sets, &seq, eps, cfg.cone_kind, &cfg.separation)? {
                    Some(c) => {
                        let chk = verify_certificate(&c, &sets, &seq)?;
                        csv.push_str(&format!("{eps},true,{},{}\n", c.k, chk.dual_sum));
                        rows.push(json!({"eps": eps, "found": true, "k": c.k, "dual_sum": chk.dual_sum}));
                        certificates.push(c);
                    }
                    None => {
                        let inf = dual_infimum(&sets, &seq, eps, cfg.cone_kind, &cfg.separation)?;
                        falsified |= inf.infimum >= eps;
                        csv.push_str(&format!("{eps},false,,{}\n", inf.infimum));
                        rows.push(json!({"eps": eps, "found": false, "infimum": inf.infimum}));
                    }
                }
            }
            let outcome = if certificates.len() == cfg.eps.len() {
                Outcome::Certified
            } else if falsified {
                Outcome::Falsified
            } else {
                Outcome::Inconclusive
            };
            if !certificates.is_empty() {
                let file = CertificateFile { schema_version: SCHEMA_VERSION, certificates };
                std::fs::write(&cert_path, serde_json::to_string_pretty(&file)?).map_err(|e| Error::Io(format!("{}: {e}", cert_path.display())))?;
            }
            ctx.write_csv(&csv)?;
            let text = format!("separation search: {outcome} ({} of {} eps), certificates in {}\n", rows.iter().filter(|r| r["found"] == true).count(), cfg.eps.len(), cert_path.display());
            let result = json!({"rows": rows, "certificate_file": cert_path});
            ctx.emit("separation", Some(outcome), outcome.exit_code(), result, echo, &text)
        }
        SeparationMode::Verify => {
            let cert_path = cert.ok_or_else(|| Error::Config("verify mode needs --cert <path>".into()))?;
            let src = std::fs::read_to_string(&cert_path).map_err(|e| Error::Io(format!("{}: {e}", cert_path.display())))?;
            let file: CertificateFile = serde_json::from_str(&src).map_err(|e| Error::Config(format!("certificate file: {e}")))?;
            let mut checks = Vec::new();
            let mut text = String::new();
            let mut valid = !file.certificates.is_empty();
            for c in &file.certificates {
                let chk = verify_certificate(c, &sets, &seq)?;
                valid &= chk.valid;
                text.push_str(&format!("eps {}: {}\n", c.eps, if chk.valid { "valid".to_string() } else { chk.violations.join("; ") }));
                checks.push(chk);
            }
            let outcome = if valid { Outcome::Certified } else { Outcome::Falsified };
            text.push_str(&format!("separation verify: {outcome}\n"));
            ctx.emit("separation", Some(outcome), outcome.exit_code(), serde_json::to_value(&checks)?, echo, &text)
        }
    }
}

fn cmd_plot(ctx: &Ctx, target: &str, out: &Path) -> Result<i32> {
    let scene = if registry::IDS.contains(&target) {
        plot::Scene::from_entry(&get_example(target)?)?
    } else {
        let cfg = RunConfig::load(Path::new(target))?.resolve(ctx.seed, None)?;
        plot::Scene::from_parts(target, cfg.sets.as_deref(), cfg.problem.as_ref(), cfg.sequence.as_ref())?
    };
    let svg = scene.render()?;
    std::fs::write(out, &svg).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
    let text = format!("wrote {}\n", out.display());
    ctx.emit("plot", None, 0, json!({"out": out, "bytes": svg.len()}), json!({"target": target}), &text)
}
