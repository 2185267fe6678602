use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use attocell::harness::{run_experiment, ExperimentKind, ExperimentSpec, PowerSetting, Series};
use attocell::power::Scheme;
use attocell::scheduler::Projection;
use attocell::{Error, SystemConfig};

/// Run a super-cell experiment sweep and write the results as CSV.
#[derive(Debug, Parser)]
#[command(name = "simulate", version)]
struct Args {
    /// sumrate-vs-kb | sumrate-vs-lambda | sumrate-vs-nt | sumrate-vs-bw |
    /// pc-coefficients | bbo-vs-kb | bbo-grid
    experiment: String,

    /// TOML file with system parameters; omitted keys take defaults.
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long)]
    out: PathBuf,

    #[arg(long)]
    realizations: Option<usize>,

    /// Tier counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    nt: Vec<usize>,

    /// UE densities in UEs per cell.
    #[arg(long, value_delimiter = ',')]
    lambda: Vec<f64>,

    /// Fixed backhaul power ratios (replaces power-control schemes).
    #[arg(long, value_delimiter = ',')]
    kb: Vec<f64>,

    /// Backhaul-to-access bandwidth ratios.
    #[arg(long = "bw-ratio", value_delimiter = ',')]
    bw_ratio: Vec<f64>,

    /// Series such as CBS-OPT or UBS-EQL.
    #[arg(long, value_delimiter = ',')]
    policy: Vec<String>,

    /// Power-control schemes: NPC, MSPC, ASPC, ARPC.
    #[arg(long, value_delimiter = ',')]
    scheme: Vec<String>,

    /// Simplex handling after each solver step: clip or simplex.
    #[arg(long, default_value = "clip")]
    projection: String,

    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn build(args: &Args) -> Result<(ExperimentSpec, SystemConfig), Error> {
    let kind: ExperimentKind = args.experiment.parse()?;
    let cfg = match &args.config {
        Some(path) => SystemConfig::from_file(path)?,
        None => SystemConfig::default(),
    };
    let mut spec = ExperimentSpec::defaults(kind);
    spec.seed = args.seed;
    if let Some(n) = args.realizations {
        spec.realizations = n;
    }
    if !args.nt.is_empty() {
        spec.n_tiers = args.nt.clone();
    }
    if !args.lambda.is_empty() {
        spec.lambdas = args.lambda.clone();
    }
    if !args.bw_ratio.is_empty() {
        spec.bw_ratios = args.bw_ratio.clone();
    }
    match (args.kb.is_empty(), args.scheme.is_empty()) {
        (false, false) => {
            return Err(Error::InvalidArgument("--kb and --scheme are mutually exclusive".into()))
        }
        (false, true) => spec.power = PowerSetting::Fixed(args.kb.clone()),
        (true, false) => {
            let schemes = args
                .scheme
                .iter()
                .map(|s| s.parse::<Scheme>())
                .collect::<Result<Vec<_>, _>>()?;
            spec.power = PowerSetting::Schemes(schemes);
        }
        (true, true) => {}
    }
    if !args.policy.is_empty() {
        spec.series = args
            .policy
            .iter()
            .map(|s| s.parse::<Series>())
            .collect::<Result<Vec<_>, _>>()?;
    }
    spec.solver.projection = args.projection.parse::<Projection>()?;
    spec.validate()?;
    Ok((spec, cfg))
}

fn main() -> ExitCode {
    let args = Args::parse();
    let (spec, cfg) = match build(&args) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("simulate: {e}");
            return ExitCode::from(2);
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("simulate: cannot start worker pool: {e}");
            return ExitCode::from(2);
        }
    };
    let table = match pool.install(|| run_experiment(&spec, &cfg)) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("simulate: {e}");
            return ExitCode::from(if e.is_input_error() { 2 } else { 3 });
        }
    };
    let written = File::create(&args.out).and_then(|f| table.write_csv(BufWriter::new(f)));
    if let Err(e) = written {
        eprintln!("simulate: cannot write {}: {e}", args.out.display());
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}
