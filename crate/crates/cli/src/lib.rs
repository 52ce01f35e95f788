//! `haar-orbit` command-line driver: verification suites, figure datasets and
//! closed-form estimates for a user-supplied state.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use orbit_core::figures::{figure_entropy, figure_fidelity, page_table};
use orbit_core::montecarlo as mc;
use orbit_core::verify::{self, Report};
use orbit_core::{BipartiteDims, Complex64, ComplexMatrix, DensityMatrix, MCConfig};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "haar-orbit", version, about = "Entropy and correlation statistics over global unitary orbits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Weingarten values, twirl identities and sixth-moment MC gates.
    VerifyWeingarten {
        /// Comma-separated dimensions, each at least 3.
        #[arg(long, value_delimiter = ',', default_value = "3,4")]
        dim: Vec<usize>,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Orbit closed forms against MC on random states.
    VerifyOrbit {
        #[command(flatten)]
        dims: DimArgs,
        /// Number of random states to test.
        #[arg(long, default_value_t = 3)]
        states: usize,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Average output purity of quantum channels against MC.
    VerifyChannel {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Fidelity bounds over uniform two-qubit spectra.
    FigureFidelity {
        #[arg(long, default_value_t = 10_000)]
        points: usize,
        #[arg(long, env = "HAAR_ORBIT_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sum-entropy bounds and their gap over uniform two-qubit spectra.
    FigureEntropy {
        /// Total rows, including the two corner spectra.
        #[arg(long, default_value_t = 5_000)]
        points: usize,
        #[arg(long, env = "HAAR_ORBIT_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Page, diagonal and coherence averages for m <= n <= bound.
    PageTable {
        #[arg(long, default_value_t = 8)]
        bound: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Every closed form for a state read from a JSON file.
    Estimate {
        #[arg(long)]
        state: PathBuf,
        /// Also run the Monte Carlo estimators.
        #[arg(long)]
        mc: bool,
        #[command(flatten)]
        mc_args: McArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, Args)]
pub struct DimArgs {
    #[arg(long, default_value_t = 2)]
    pub da: usize,
    #[arg(long, default_value_t = 2)]
    pub db: usize,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct McArgs {
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Decimal 64-bit seed.
    #[arg(long, env = "HAAR_ORBIT_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Width of scalar gates in standard errors.
    #[arg(long, default_value_t = 3.0)]
    pub sigma: f64,
}

impl McArgs {
    pub fn config(&self) -> anyhow::Result<MCConfig> {
        Ok(MCConfig::new(self.samples, self.seed)?.with_sigma(self.sigma)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Defaults to json for reports and csv for datasets.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl OutputArgs {
    fn writer(&self) -> anyhow::Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(
                File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout())),
        })
    }
}

/// Runs a parsed command and returns the process exit status.
pub fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::VerifyWeingarten { dim, mc, output } => {
            emit_report(&verify::verify_weingarten(&dim, &mc.config()?)?, &output)
        }
        Command::VerifyOrbit { dims, states, mc, output } => {
            let dims = BipartiteDims::new(dims.da, dims.db)?;
            emit_report(&verify::verify_orbit(dims, states, &mc.config()?)?, &output)
        }
        Command::VerifyChannel { dim, mc, output } => emit_report(&verify::verify_channel(dim, &mc.config()?)?, &output),
        Command::FigureFidelity { points, seed, output } => {
            let fig = figure_fidelity(points, seed)?;
            let mut w = output.writer()?;
            match output.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut csv = csv::Writer::from_writer(&mut w);
                    csv.write_record(["kind", "purity", "lower_bound", "upper_bound"])?;
                    for r in &fig.rows {
                        csv.write_record(["point", &fmt(r.purity), &fmt(r.lower_bound), &fmt(r.upper_bound)])?;
                    }
                    csv.write_record(["summary", "", &fmt(fig.max_lower), &fmt(fig.min_upper)])?;
                    csv.flush()?;
                }
                Format::Json => serde_json::to_writer_pretty(
                    &mut w,
                    &json!({
                        "points": fig.rows,
                        "summary": { "max_lower": fig.max_lower, "min_upper": fig.min_upper,
                                     "separated": fig.bounds_separated() },
                    }),
                )?,
            }
            writeln!(w)?;
            w.flush()?;
            Ok(0)
        }
        Command::FigureEntropy { points, seed, output } => {
            let rows = figure_entropy(points, seed)?;
            write_rows(&output, &["purity", "lower_term", "upper_entropy", "gap_f"], &rows, |r| {
                vec![fmt(r.purity), fmt(r.lower_term), fmt(r.upper_entropy), fmt(r.gap)]
            })?;
            Ok(0)
        }
        Command::PageTable { bound, output } => {
            let rows = page_table(bound)?;
            write_rows(&output, &["m", "n", "page", "diagonal", "coherence"], &rows, |r| {
                vec![r.m.to_string(), r.n.to_string(), fmt(r.page), fmt(r.diagonal), fmt(r.coherence)]
            })?;
            Ok(0)
        }
        Command::Estimate { state, mc, mc_args, output } => {
            let (rho, dims) = load_state(&state)?;
            let mut summary = verify::closed_form_summary(&rho, dims)?;
            if mc {
                let extra = mc_summary(&rho, dims, &mc_args.config()?)?;
                summary["monte_carlo"] = extra;
            }
            let mut w = output.writer()?;
            match output.format.unwrap_or(Format::Json) {
                Format::Json => {
                    serde_json::to_writer_pretty(&mut w, &summary)?;
                    writeln!(w)?;
                }
                Format::Csv => {
                    let mut csv = csv::Writer::from_writer(&mut w);
                    csv.write_record(["quantity", "value"])?;
                    for (k, v) in flatten(&summary) {
                        csv.write_record([k, v])?;
                    }
                    csv.flush()?;
                }
            }
            w.flush()?;
            Ok(0)
        }
    }
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn write_rows<T: serde::Serialize>(
    output: &OutputArgs,
    header: &[&str],
    rows: &[T],
    record: impl Fn(&T) -> Vec<String>,
) -> anyhow::Result<()> {
    let mut w = output.writer()?;
    match output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(&mut w);
            csv.write_record(header)?;
            for r in rows {
                csv.write_record(record(r))?;
            }
            csv.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, rows)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn emit_report(report: &Report, output: &OutputArgs) -> anyhow::Result<i32> {
    let mut w = output.writer()?;
    match output.format.unwrap_or(Format::Json) {
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, report)?;
            writeln!(w)?;
        }
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(&mut w);
            csv.write_record(["gate", "kind", "analytic", "mc_mean", "se", "deviation", "threshold", "pass"])?;
            let opt = |x: Option<f64>| x.map(fmt).unwrap_or_default();
            for g in &report.gates {
                let kind = serde_json::to_value(g.kind)?.as_str().unwrap_or_default().to_owned();
                csv.write_record([
                    g.name.clone(),
                    kind,
                    fmt(g.analytic),
                    opt(g.mc_mean),
                    opt(g.se),
                    fmt(g.deviation),
                    fmt(g.threshold),
                    g.pass.to_string(),
                ])?;
            }
            csv.flush()?;
        }
    }
    w.flush()?;
    for g in report.failures() {
        eprintln!(
            "gate failed: {} (analytic {}, mc mean {}, se {}, deviation {} > {})",
            g.name,
            g.analytic,
            g.mc_mean.map_or("-".into(), fmt),
            g.se.map_or("-".into(), fmt),
            g.deviation,
            g.threshold
        );
    }
    Ok(if report.passed { 0 } else { 1 })
}

fn mc_summary(rho: &DensityMatrix, dims: BipartiteDims, cfg: &MCConfig) -> anyhow::Result<Value> {
    let mut out = json!({
        "samples": cfg.samples,
        "seed": cfg.seed,
        "entropy_a": mc::mc_average_entropy_a(rho, dims, cfg)?,
        "linear_entropy_a": mc::mc_average_linear_entropy_a(rho, dims, cfg)?,
        "linear_entropy_b": mc::mc_average_linear_entropy_b(rho, dims, cfg)?,
        "entropy_sum": mc::mc_average_entropy_sum(rho, dims, cfg)?,
        "qmi": mc::mc_average_qmi(rho, dims, cfg)?,
        "fidelity": mc::mc_average_fidelity(rho, dims, cfg)?,
        "a1": mc::mc_an(rho, dims, 1, cfg)?,
        "subsystem_symmetry": mc::mc_subsystem_symmetry(rho, dims, cfg)?,
    });
    if dims.d() >= 3 {
        out["a2"] = serde_json::to_value(mc::mc_an(rho, dims, 2, cfg)?)?;
    }
    Ok(out)
}

/// Flattens nested JSON objects into dotted keys for CSV output.
fn flatten(value: &Value) -> Vec<(String, String)> {
    fn walk(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        match v {
            Value::Object(map) => {
                for (k, v) in map {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, v, out);
                }
            }
            Value::Null => out.push((prefix.to_owned(), String::new())),
            Value::String(s) => out.push((prefix.to_owned(), s.clone())),
            other => out.push((prefix.to_owned(), other.to_string())),
        }
    }
    let mut out = Vec::new();
    walk("", value, &mut out);
    out
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    dims: DimsField,
    entries: Vec<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DimsField {
    da: usize,
    db: usize,
}

/// Parses a state file: `{"dims": {"da": .., "db": ..}, "entries": [[re, im], ...]}`
/// with entries in row-major order.
pub fn parse_state(text: &str) -> anyhow::Result<(DensityMatrix, BipartiteDims)> {
    let file: StateFile = serde_json::from_str(text)
        .map_err(|e| anyhow::anyhow!("line {}, column {}: {e}", e.line(), e.column()))?;
    let dims = BipartiteDims::new(file.dims.da, file.dims.db)?;
    let d = dims.d();
    if file.entries.len() != d * d {
        bail!("expected {} entries for a {d}x{d} matrix, found {}", d * d, file.entries.len());
    }
    let mat = ComplexMatrix::from_row_iterator(d, d, file.entries.iter().map(|[re, im]| Complex64::new(*re, *im)));
    let rho = DensityMatrix::new(mat).context("state is not a valid density matrix")?;
    Ok((rho, dims))
}

pub fn load_state(path: &Path) -> anyhow::Result<(DensityMatrix, BipartiteDims)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_state(&text).with_context(|| format!("invalid state file {}", path.display()))
}
