//! Command-line front end. The `privest` binary forwards to [`run`].
//!
//! Exit codes: 0 success, 2 input error, 3 a criterion is infinite,
//! 4 the optimizer failed to converge.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bayes::privacy_report;
use crate::crowds::{crowds_report, CrowdsConfig};
use crate::error::{Error, Result};
use crate::info::{
    entropy_ordering_check, kl_divergence, kl_divergence_nats, pinsker_bound, renyi_entropy,
    total_variation, Order,
};
use crate::json::{inf_f64, parse, JointJson, LossJson, PmfJson, RolesJson, ScenarioJson};
use crate::lbs::{lbs_privacy, LbsGrid, LbsGridJson};
use crate::optimize::{frontier, CurveEntry, FailureKind, TradeoffCurve};
use crate::prob::Pmf;
use crate::sdc::{sdc_report, MicrodataTable, SdcReport};
use crate::typical::{
    jointly_typical_fraction_with_cap, typical_set_with_cap, DEFAULT_ENUMERATION_CAP,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INFINITE: i32 = 3;
pub const EXIT_NO_CONVERGENCE: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "privest",
    version,
    about = "Privacy metrics as Bayes estimation error"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format (csv is available for `tradeoff`).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed for simulations.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Extra diagnostics on standard error.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entropies of a pmf, and divergences against a second one.
    Metrics {
        pmf: PathBuf,
        second: Option<PathBuf>,
        /// Additional Rényi orders (number or `inf`).
        #[arg(long = "alpha")]
        alphas: Vec<String>,
    },
    /// Conditional, worst-case and average privacy of a scenario.
    Privacy { scenario: PathBuf },
    /// SDC criteria of a microdata CSV.
    Sdc {
        csv: PathBuf,
        roles: PathBuf,
        /// Confidential column to evaluate (default: every confidential column).
        #[arg(long)]
        confidential: Option<String>,
    },
    /// Privacy–utility frontier as CSV rows `D,achieved_D,I_bits,slope,status`.
    Tradeoff {
        prior: PathBuf,
        loss: PathBuf,
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_hyphen_values = true
        )]
        budgets: Vec<f64>,
        /// Also dump the optimal channel of every point as JSON.
        #[arg(long)]
        dump_channels: Option<PathBuf>,
    },
    /// Crowds-like forwarding: analytic privacy and Monte Carlo check.
    Crowds {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
    },
    /// Squared-error privacy of a grid location scenario.
    Lbs {
        #[arg(long)]
        grid: PathBuf,
    },
    /// Typical set of an i.i.d. source, or jointly typical mass of a joint.
    Typical {
        /// Pmf file (alternative to --probs).
        pmf: Option<PathBuf>,
        /// Inline probabilities, e.g. `0.8,0.2`.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        probs: Option<Vec<f64>>,
        /// Joint pmf file for the jointly typical fraction.
        #[arg(long, conflicts_with_all = ["pmf", "probs"])]
        joint: Option<PathBuf>,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: u64,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load_pmf(path: &Path) -> Result<Pmf> {
    parse::<PmfJson>(&read(path)?)?.to_pmf()
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct RenyiValue {
    order: String,
    #[serde(with = "inf_f64")]
    bits: f64,
}

#[derive(Serialize)]
struct Comparison {
    #[serde(with = "inf_f64")]
    kl: f64,
    #[serde(with = "inf_f64")]
    kl_nats: f64,
    tv: f64,
    #[serde(with = "inf_f64")]
    pinsker_bound: f64,
    #[serde(with = "inf_f64")]
    epsilon: f64,
}

#[derive(Serialize)]
struct MetricsReport {
    alphabet: Vec<String>,
    h0: f64,
    h1: f64,
    hinf: f64,
    renyi: Vec<RenyiValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<Comparison>,
}

#[derive(Serialize)]
struct TradeoffRow {
    budget: f64,
    achieved_distortion: Option<f64>,
    mutual_info_bits: Option<f64>,
    slope: Option<f64>,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
}

/// Output text plus exit code.
struct Outcome {
    text: String,
    code: i32,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self {
            text,
            code: EXIT_OK,
        }
    }
}

fn require_json(format: Option<Format>, what: &str) -> Result<()> {
    match format {
        Some(Format::Csv) => Err(Error::InvalidArgument(format!(
            "{what} only supports json output"
        ))),
        _ => Ok(()),
    }
}

fn cmd_metrics(pmf: &Path, second: Option<&Path>, alphas: &[String]) -> Result<Outcome> {
    let p = load_pmf(pmf)?;
    let t = entropy_ordering_check(&p);
    let renyi = alphas
        .iter()
        .map(|a| {
            let order = Order::parse(a)?;
            Ok(RenyiValue {
                order: order.to_string(),
                bits: renyi_entropy(&p, order)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let comparison = match second {
        Some(path) => {
            let q = load_pmf(path)?;
            Some(Comparison {
                kl: kl_divergence(&p, &q)?,
                kl_nats: kl_divergence_nats(&p, &q)?,
                tv: total_variation(&p, &q)?,
                pinsker_bound: pinsker_bound(&p, &q)?.bound,
                epsilon: crate::sdc::epsilon_max_log_ratio(&p, &q)?,
            })
        }
        None => None,
    };
    Ok(Outcome::ok(to_json(&MetricsReport {
        alphabet: p.alphabet().symbols().to_vec(),
        h0: t.h_0,
        h1: t.h_1,
        hinf: t.h_inf,
        renyi,
        comparison,
    })))
}

fn cmd_privacy(path: &Path, verbose: u8, err: &mut dyn Write) -> Result<Outcome> {
    let scenario = parse::<ScenarioJson>(&read(path)?)?.to_scenario()?;
    let report = privacy_report(&scenario)?;
    if verbose > 0 || !report.unobservable.is_empty() {
        for y in &report.unobservable {
            let _ = writeln!(
                err,
                "note: observation {y:?} has zero probability and is omitted"
            );
        }
    }
    Ok(Outcome::ok(to_json(&report)))
}

fn cmd_sdc(csv: &Path, roles: &Path, confidential: Option<&str>) -> Result<Outcome> {
    let roles = parse::<RolesJson>(&read(roles)?)?;
    let file = fs::File::open(csv).map_err(|e| Error::Parse(format!("{}: {e}", csv.display())))?;
    let table = MicrodataTable::from_csv(file, &roles.roles)?;
    let columns: Vec<String> = match confidential {
        Some(c) => vec![c.to_owned()],
        None => table
            .confidential_columns()
            .into_iter()
            .map(str::to_owned)
            .collect(),
    };
    if columns.is_empty() {
        return Err(Error::InvalidArgument(
            "no column has the confidential role".into(),
        ));
    }
    let reports = columns
        .iter()
        .map(|c| sdc_report(&table, c))
        .collect::<Result<Vec<SdcReport>>>()?;
    let code = if reports.iter().any(SdcReport::has_infinite_criterion) {
        EXIT_INFINITE
    } else {
        EXIT_OK
    };
    let text = if reports.len() == 1 {
        to_json(&reports[0])
    } else {
        to_json(&reports)
    };
    Ok(Outcome { text, code })
}

/// Flattens a curve into output rows; the exit code reflects the worst failure.
fn tradeoff_rows(curve: &TradeoffCurve) -> (Vec<TradeoffRow>, i32) {
    let mut code = EXIT_OK;
    let rows: Vec<TradeoffRow> = curve
        .entries
        .iter()
        .map(|e| match e {
            CurveEntry::Point(p) => TradeoffRow {
                budget: p.distortion_budget,
                achieved_distortion: Some(p.achieved_distortion),
                mutual_info_bits: Some(p.mutual_info),
                slope: Some(p.slope),
                status: "ok",
                message: None,
            },
            CurveEntry::Failed(f) => {
                let status = match f.kind {
                    FailureKind::Infeasible => {
                        code = code.max(EXIT_INPUT);
                        "infeasible"
                    }
                    FailureKind::NoConvergence => {
                        code = code.max(EXIT_NO_CONVERGENCE);
                        "no_convergence"
                    }
                };
                TradeoffRow {
                    budget: f.budget,
                    achieved_distortion: None,
                    mutual_info_bits: None,
                    slope: None,
                    status,
                    message: Some(f.message.clone()),
                }
            }
        })
        .collect();
    (rows, code)
}

fn cmd_tradeoff(
    prior: &Path,
    loss: &Path,
    budgets: &[f64],
    dump: Option<&Path>,
    format: Option<Format>,
) -> Result<Outcome> {
    let prior = load_pmf(prior)?;
    let loss = parse::<LossJson>(&read(loss)?)?.to_loss(prior.alphabet(), prior.alphabet())?;
    let curve = frontier(&prior, &loss, budgets)?;
    let (rows, code) = tradeoff_rows(&curve);
    if let Some(path) = dump {
        let channels: Vec<_> = curve
            .points()
            .map(|p| {
                serde_json::json!({
                    "budget": p.distortion_budget,
                    "channel": crate::json::ChannelJson::from(&p.channel),
                })
            })
            .collect();
        fs::write(path, to_json(&channels))?;
    }
    let text = match format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            let mut s = String::from("D,achieved_D,I_bits,slope,status\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.budget,
                    fmt(r.achieved_distortion),
                    fmt(r.mutual_info_bits),
                    fmt(r.slope),
                    r.status
                ));
            }
            s
        }
    };
    Ok(Outcome { text, code })
}

#[derive(Serialize)]
struct JointTypical {
    k: usize,
    epsilon: f64,
    jointly_typical_fraction: f64,
}

fn cmd_typical(
    pmf: Option<&Path>,
    probs: Option<&[f64]>,
    joint: Option<&Path>,
    k: usize,
    epsilon: f64,
    cap: u64,
) -> Result<Outcome> {
    if let Some(j) = joint {
        let joint = parse::<JointJson>(&read(j)?)?.to_joint()?;
        let f = jointly_typical_fraction_with_cap(&joint, k, epsilon, cap)?;
        return Ok(Outcome::ok(to_json(&JointTypical {
            k,
            epsilon,
            jointly_typical_fraction: f,
        })));
    }
    let p = match (pmf, probs) {
        (Some(path), None) => load_pmf(path)?,
        (None, Some(v)) => Pmf::from_probs(v.to_vec())?,
        _ => {
            return Err(Error::InvalidArgument(
                "give exactly one of a pmf file, --probs or --joint".into(),
            ))
        }
    };
    Ok(Outcome::ok(to_json(&typical_set_with_cap(
        &p, k, epsilon, cap,
    )?)))
}

fn execute(cli: &Cli, err: &mut dyn Write) -> Result<Outcome> {
    let g = &cli.global;
    match &cli.command {
        Command::Metrics {
            pmf,
            second,
            alphas,
        } => {
            require_json(g.format, "metrics")?;
            cmd_metrics(pmf, second.as_deref(), alphas)
        }
        Command::Privacy { scenario } => {
            require_json(g.format, "privacy")?;
            cmd_privacy(scenario, g.verbose, err)
        }
        Command::Sdc {
            csv,
            roles,
            confidential,
        } => {
            require_json(g.format, "sdc")?;
            cmd_sdc(csv, roles, confidential.as_deref())
        }
        Command::Tradeoff {
            prior,
            loss,
            budgets,
            dump_channels,
        } => cmd_tradeoff(prior, loss, budgets, dump_channels.as_deref(), g.format),
        Command::Crowds { n, p, trials } => {
            require_json(g.format, "crowds")?;
            let cfg = CrowdsConfig {
                n: *n,
                p: *p,
                trials: *trials,
                seed: g.seed,
            };
            Ok(Outcome::ok(to_json(&crowds_report(&cfg)?)))
        }
        Command::Lbs { grid } => {
            require_json(g.format, "lbs")?;
            let cfg = parse::<LbsGridJson>(&read(grid)?)?;
            Ok(Outcome::ok(to_json(&lbs_privacy(&LbsGrid::from_json(
                &cfg,
            )?)?)))
        }
        Command::Typical {
            pmf,
            probs,
            joint,
            k,
            epsilon,
            cap,
        } => {
            require_json(g.format, "typical")?;
            cmd_typical(
                pmf.as_deref(),
                probs.as_deref(),
                joint.as_deref(),
                *k,
                *epsilon,
                *cap,
            )
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::ConvergenceFailure { .. } => EXIT_NO_CONVERGENCE,
        _ => EXIT_INPUT,
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    if let Some(t) = cli.global.threads {
        // a second initialization (e.g. repeated calls in one process) is harmless
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
    let outcome = match execute(&cli, err) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit_code(&e);
        }
    };
    let written = match &cli.global.out {
        Some(path) => fs::write(path, &outcome.text),
        None => out.write_all(outcome.text.as_bytes()),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: cannot write output: {e}");
        return EXIT_INPUT;
    }
    outcome.code
}
