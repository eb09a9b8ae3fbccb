use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mpsim::attractors::{assumption_warnings, minimal_trap_spaces_with_budget, DEFAULT_TRAP_BUDGET};
use mpsim::engine::{DEFAULT_MAX_SPACES, MATERIALIZE_CAP};
use mpsim::model::DEFAULT_FANIN_CAP;
use mpsim::sampler::{default_check_interval, DEFAULT_MAX_STEPS};
use mpsim::{
    estimate_propensities, filter_reachable_attractors, parse_bnet, parse_configuration, BooleanNetwork,
    DepthDistribution, DepthSpec, Error, LRowMode, Limits, MpNetwork, Mutation, Oracle, Result, SimulationParams,
    StopPolicy, WeightSpec, WeightVector,
};

mod report;

use report::{Format, Report};

/// Variable-depth most permissive simulation of Boolean networks.
///
/// Components are numbered in declaration order of the .bnet file; bitstrings
/// list component 1 first.
#[derive(Parser)]
#[command(name = "mpsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate attractor propensities by sampling trajectories
    Simulate(SimulateArgs),
    /// List minimal trap spaces
    Attractors(AttractorsArgs),
    /// Show the spaces and transitions reachable from a configuration
    Transitions(TransitionsArgs),
    /// Exact propensities by solving the absorbing chain (small networks)
    Exact(ExactArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Model in .bnet format
    #[arg(long)]
    model: PathBuf,
    /// Force a component to a constant, as NAME=0 or NAME=1 (repeatable)
    #[arg(long = "mutation", value_name = "NAME=V")]
    mutations: Vec<String>,
    /// Largest regulator count handled by exhaustive checks
    #[arg(long, default_value_t = DEFAULT_FANIN_CAP)]
    fanin_cap: usize,
    /// Largest number of spaces computed from one configuration
    #[arg(long, default_value_t = DEFAULT_MAX_SPACES)]
    max_spaces: usize,
}

#[derive(Args)]
struct DynamicsArgs {
    /// Depth distribution: const:K, exp or custom:p1,...,pn
    #[arg(long, default_value = "exp")]
    depth: String,
    /// Transition weights: uniform, single or custom:w1,...,wn
    #[arg(long, default_value = "uniform")]
    weights: String,
    /// Rate of the transition flipping exactly the irreversible components
    #[arg(long, value_enum, default_value_t = RowMode::Listing)]
    l_row_mode: RowMode,
}

#[derive(Clone, Copy, ValueEnum)]
enum RowMode {
    Listing,
    Count,
}

impl From<RowMode> for LRowMode {
    fn from(m: RowMode) -> Self {
        match m {
            RowMode::Listing => LRowMode::Listing,
            RowMode::Count => LRowMode::Count,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Stop {
    Attractor,
    StrongBasin,
    MaxSteps,
}

impl From<Stop> for StopPolicy {
    fn from(s: Stop) -> Self {
        match s {
            Stop::Attractor => StopPolicy::Attractor,
            Stop::StrongBasin => StopPolicy::StrongBasin,
            Stop::MaxSteps => StopPolicy::MaxSteps,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Initial configuration: bitstring or NAME=V,... covering every component
    #[arg(long)]
    init: String,
    #[command(flatten)]
    dynamics: DynamicsArgs,
    #[arg(long, default_value_t = 1000)]
    runs: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Steps between attractor checks [default: 1 up to 16 components, else 10]
    #[arg(long)]
    check_interval: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: usize,
    #[arg(long, value_enum, default_value_t = Stop::StrongBasin)]
    stop: Stop,
    /// Worker threads [default: all cores]; results do not depend on it
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write attractor fractions as a tab-separated table
    #[arg(long, value_name = "PATH")]
    emit_plot_data: Option<PathBuf>,
    /// Report elapsed_seconds as 0 so reports compare byte for byte
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct AttractorsArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Only attractors reachable from this configuration
    #[arg(long)]
    from: Option<String>,
    /// Search nodes explored before giving up
    #[arg(long, default_value_t = DEFAULT_TRAP_BUDGET)]
    budget: usize,
}

#[derive(Args)]
struct TransitionsArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    from: String,
    /// Permissive depth [default: number of components]
    #[arg(long)]
    depth: Option<usize>,
    /// Also list the most permissive successors by brute force
    #[arg(long)]
    oracle: bool,
}

#[derive(Args)]
struct ExactArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    from: String,
    #[command(flatten)]
    dynamics: DynamicsArgs,
}

struct Loaded {
    network: MpNetwork,
    bytes: Vec<u8>,
}

fn load(args: &ModelArgs) -> Result<Loaded> {
    let bytes = fs::read(&args.model).map_err(|e| Error::Usage(format!("{}: {e}", args.model.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Error::Usage(format!("{}: not valid UTF-8", args.model.display())))?;
    let mut net: BooleanNetwork = parse_bnet(&text)?;
    if !args.mutations.is_empty() {
        let mutations = args
            .mutations
            .iter()
            .map(|m| Mutation::parse(m, &net))
            .collect::<Result<Vec<_>>>()?;
        net = net.apply_mutations(&mutations)?;
    }
    let limits = Limits {
        fanin_cap: args.fanin_cap,
        max_spaces: args.max_spaces,
    };
    Ok(Loaded {
        network: MpNetwork::with_limits(net, limits)?,
        bytes,
    })
}

fn dynamics(args: &DynamicsArgs, n: usize) -> Result<(DepthDistribution, WeightVector, LRowMode)> {
    let depth = DepthDistribution::new(&args.depth.parse::<DepthSpec>()?, n)?;
    let weights = WeightVector::new(&args.weights.parse::<WeightSpec>()?, n)?;
    Ok((depth, weights, args.l_row_mode.into()))
}

fn write_out(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn simulate(args: SimulateArgs) -> Result<()> {
    if args.runs == 0 {
        return Err(Error::Usage("runs must be at least 1".into()));
    }
    if args.workers == Some(0) {
        return Err(Error::Usage("workers must be at least 1".into()));
    }
    let start = Instant::now();
    let loaded = load(&args.model)?;
    let m = &loaded.network;
    let n = m.len();
    let x0 = parse_configuration(&args.init, m.network())?;
    let (depth, weights, l_row_mode) = dynamics(&args.dynamics, n)?;
    let mut params = SimulationParams::new(depth, weights);
    params.l_row_mode = l_row_mode;
    params.seed = args.seed;
    params.max_steps = args.max_steps;
    params.check_interval = args.check_interval.unwrap_or(default_check_interval(n));
    params.stop = args.stop.into();
    params.validate(n)?;

    let all = minimal_trap_spaces_with_budget(m, DEFAULT_TRAP_BUDGET)?;
    let reachable = filter_reachable_attractors(&all, m, &x0)?;
    for w in assumption_warnings(&params, &reachable) {
        eprintln!("warning: {w}");
    }
    let est = estimate_propensities(m, &x0, &params, &reachable, args.runs, args.workers)?;
    if est.not_converged > 0 {
        eprintln!(
            "warning: {} of {} runs did not converge within {} steps",
            est.not_converged, est.runs, params.max_steps
        );
    }
    let elapsed = if args.no_timing {
        0.0
    } else {
        start.elapsed().as_secs_f64()
    };
    let report = Report::new(
        &args.model.model,
        &loaded.bytes,
        &args.init,
        &args.model.mutations,
        &params,
        &est,
        elapsed,
    );
    write_out(args.output.as_ref(), &report.render(args.format))?;
    if let Some(path) = &args.emit_plot_data {
        write_out(Some(path), &report.plot_data())?;
    }
    Ok(())
}

fn attractors(args: AttractorsArgs) -> Result<()> {
    let loaded = load(&args.model)?;
    let m = &loaded.network;
    let mut set = minimal_trap_spaces_with_budget(m, args.budget)?;
    if let Some(from) = &args.from {
        let x = parse_configuration(from, m.network())?;
        set = filter_reachable_attractors(&set, m, &x)?;
    }
    let mut out = String::new();
    for id in set.ids() {
        out.push_str(&id);
        out.push('\n');
    }
    write_out(None, &out)
}

fn transitions(args: TransitionsArgs) -> Result<()> {
    let loaded = load(&args.model)?;
    let m = &loaded.network;
    let n = m.len();
    let x = parse_configuration(&args.from, m.network())?;
    let spaces = m.reachable_spaces(&x, args.depth.unwrap_or(n))?;
    let mut out = String::new();
    for (key, space) in spaces.entries() {
        let counts = space.transition_counts()?;
        out.push_str(&format!(
            "K={} H={} L={} counts=[{}]\n",
            key.to_bitstring(n),
            space.free.to_bitstring(n),
            space.irreversible.to_bitstring(n),
            counts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
        ));
        if space.reversible().len() <= MATERIALIZE_CAP {
            for y in space.targets()? {
                out.push_str(&format!("  {x} -> {y}\n"));
            }
        }
    }
    if args.oracle {
        let oracle = Oracle::new(m.network())?;
        out.push_str("oracle\n");
        for y in oracle.mp_successors(&x)? {
            if y != x {
                out.push_str(&format!("  {x} -> {y}\n"));
            }
        }
    }
    write_out(None, &out)
}

fn exact(args: ExactArgs) -> Result<()> {
    let loaded = load(&args.model)?;
    let m = &loaded.network;
    let x = parse_configuration(&args.from, m.network())?;
    let (depth, weights, mode) = dynamics(&args.dynamics, m.len())?;
    let oracle = Oracle::with_cap(m.network(), mpsim::oracle::EXACT_CAP)?;
    let e = oracle.exact_propensities(&x, depth.probabilities(), weights.as_slice(), mode)?;
    let mut out = String::new();
    for (id, p) in e.ids.iter().zip(&e.probabilities) {
        if *p > 0.0 {
            out.push_str(&format!("{id}\t{}\n", report::number(*p)));
        }
    }
    if e.non_converging > 1e-12 {
        out.push_str(&format!("not-converged\t{}\n", report::number(e.non_converging)));
    }
    write_out(None, &out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Attractors(a) => attractors(a),
        Command::Transitions(a) => transitions(a),
        Command::Exact(a) => exact(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_budget() { 2 } else { 1 })
        }
    }
}
