use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nnfalsify_core::io::load_network;
use nnfalsify_core::io::report::{format_vector, parse_vector, RunReport};
use nnfalsify_core::racos::{DEFAULT_K, DEFAULT_RHO_MULTIPLIER, DEFAULT_THETA};
use nnfalsify_core::{
    analyze_spec, falsify, verify_counterexample, Error, FalsificationOutcome, FalsifierConfig,
    Network, OptimizerParams, SafetyProperty,
};

mod batch;

const EXIT_FALSIFIED: u8 = 0;
const EXIT_UNKNOWN: u8 = 1;
const EXIT_ERROR: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "nnfalsify",
    version,
    about = "Search for inputs that violate a safety property of a feed-forward network"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Falsify one property on one network.
    ///
    /// Exit status: 0 falsified, 1 unknown, 2 error.
    Run(RunArgs),
    /// Run every network/property pair of a manifest several times and
    /// write a CSV of per-run rows followed by per-pair aggregates.
    Batch(BatchArgs),
    /// Re-check a counterexample against a network and property.
    ///
    /// Exit status: 0 the input violates the property, 1 it does not, 2 error.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Args)]
struct SearchOpts {
    /// Wall-clock budget per run, in seconds.
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
    /// Box width below which a search restarts.
    #[arg(long, default_value_t = DEFAULT_THETA)]
    theta: f64,
    /// Samples per iteration, as a multiple of the input dimension.
    #[arg(long = "rho-mult", default_value_t = DEFAULT_RHO_MULTIPLIER)]
    rho_mult: usize,
    /// Positive samples kept per iteration.
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    /// Stop with unknown once the box converges instead of restarting.
    #[arg(long = "theta-terminates")]
    theta_terminates: bool,
    /// Give up after this many restarts even if time remains.
    #[arg(long = "max-restarts")]
    max_restarts: Option<usize>,
}

impl SearchOpts {
    fn config(&self, net: &Network, seed: u64) -> Result<FalsifierConfig, Error> {
        if !(self.timeout.is_finite() && self.timeout > 0.0) {
            return Err(Error::Config(format!(
                "timeout must be a positive number of seconds, got {}",
                self.timeout
            )));
        }
        if !(self.theta.is_finite() && self.theta > 0.0) {
            return Err(Error::Config(format!(
                "theta must be positive, got {}",
                self.theta
            )));
        }
        let mut params = OptimizerParams::with_multiplier(net.input_dim(), self.rho_mult);
        params.k = self.k;
        params.theta = self.theta;
        let cfg = FalsifierConfig {
            timeout: Duration::from_secs_f64(self.timeout),
            params,
            base_seed: seed,
            max_restarts: self.max_restarts,
            theta_terminates: self.theta_terminates,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Network file (.nnet, or .json in the native format).
    #[arg(long)]
    network: PathBuf,
    /// Property file.
    #[arg(long)]
    property: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    search: SearchOpts,
}

#[derive(Debug, Args)]
struct BatchArgs {
    /// One "network_path, property_path" pair per line; paths are relative
    /// to the manifest.
    #[arg(long)]
    manifest: PathBuf,
    /// Runs per pair; run i uses seed `seed + i`.
    #[arg(long, default_value_t = 100)]
    runs: usize,
    /// Concurrent runs.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Leave the time columns empty so repeated batches compare equal.
    #[arg(long = "no-timing")]
    no_timing: bool,
    #[command(flatten)]
    search: SearchOpts,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("candidate").required(true))]
struct CheckArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long)]
    property: PathBuf,
    /// Input vector, `;`- or `,`-separated.
    #[arg(long, group = "candidate", allow_hyphen_values = true)]
    input: Option<String>,
    /// JSON report written by `run`.
    #[arg(long, group = "candidate")]
    report: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run_single(&args),
        Command::Batch(args) => batch::run_batch(&args),
        Command::Check(args) => check(&args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

pub(crate) fn load_pair(
    network: &Path,
    property: &Path,
) -> Result<(Network, SafetyProperty), Error> {
    let net = load_network(network)?;
    let prop = SafetyProperty::load(property)?;
    let prop = prop.bind(&net)?;
    Ok((net, prop))
}

pub(crate) fn search(
    net: &Network,
    prop: &SafetyProperty,
    opts: &SearchOpts,
    seed: u64,
) -> Result<FalsificationOutcome, Error> {
    let cfg = opts.config(net, seed)?;
    let plan = analyze_spec(&prop.predicate);
    falsify(net, prop, &plan, &cfg)
}

fn run_single(args: &RunArgs) -> Result<u8, Error> {
    let (net, prop) = load_pair(&args.network, &args.property)?;
    let outcome = search(&net, &prop, &args.search, args.seed)?;
    match args.format {
        Format::Json => println!("{}", RunReport::from(&outcome).to_json()),
        Format::Text => print!("{}", text_report(&prop, &args.network, &outcome)),
    }
    Ok(if outcome.is_falsified() {
        EXIT_FALSIFIED
    } else {
        EXIT_UNKNOWN
    })
}

fn text_report(prop: &SafetyProperty, network: &Path, o: &FalsificationOutcome) -> String {
    let mut s = String::new();
    s.push_str(&format!("property:  {}\n", prop.name));
    s.push_str(&format!("network:   {}\n", network.display()));
    match &o.counterexample {
        Some(c) => {
            s.push_str("verdict:   falsified\n");
            s.push_str(&format!("input:     {}\n", format_vector(&c.input)));
            s.push_str(&format!("output:    {}\n", format_vector(&c.output)));
            s.push_str(&format!("violates:  {}\n", c.violated));
        }
        None => s.push_str(
            "verdict:   unknown (no violating input found; this does not show the property holds)\n",
        ),
    }
    let st = &o.stats;
    s.push_str(&format!("objective: {}\n", st.objective));
    s.push_str(&format!(
        "samples:   {}\niterations: {}\nrestarts:  {}\ntime_s:    {:.6}\nseed:      {}\n",
        st.total_samples,
        st.iterations,
        st.restarts,
        st.wall_time.as_secs_f64(),
        st.seed
    ));
    s
}

fn check(args: &CheckArgs) -> Result<u8, Error> {
    let (net, prop) = load_pair(&args.network, &args.property)?;
    let input = match (&args.input, &args.report) {
        (Some(text), _) => parse_vector(text)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            let report = RunReport::from_json(&text)?;
            match report.counterexample {
                Some(c) => c.input,
                None => {
                    println!("report has no counterexample");
                    return Ok(EXIT_UNKNOWN);
                }
            }
        }
        (None, None) => unreachable!("clap requires one candidate source"),
    };
    if verify_counterexample(&net, &prop, &input)? {
        let y = net.forward(&input)?;
        println!("violated: {}", prop.predicate.render_with_values(&y));
        Ok(EXIT_FALSIFIED)
    } else {
        println!("not a counterexample");
        Ok(EXIT_UNKNOWN)
    }
}
