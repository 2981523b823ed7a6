use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fibcode::analysis::{self, DataPoint};
use fibcode::decoder::DecodingGraph;
use fibcode::experiment::{self, RunConfig, SampleStats};
use fibcode::matching_graph::GraphDump;
use fibcode::{Error, LatticeShape, NoiseModel, Symmetry};

#[derive(Debug, Parser)]
#[command(
    name = "fibcode",
    version,
    about = "Fibonacci fractal code: sampling, decoding and fits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte-Carlo failure rates, appended to a CSV file.
    Sample(SampleArgs),
    /// Matching-graph inspection.
    Graph {
        #[command(subcommand)]
        action: GraphAction,
    },
    /// Low-rate ansatz fit over the five lowest rates per size.
    FitAnsatz(FitArgs),
    /// Finite-size scaling fit near the crossing.
    FitThreshold {
        #[command(flatten)]
        common: FitArgs,
        /// Lowest rate included in the fit.
        #[arg(long)]
        p_min: Option<f64>,
        /// Highest rate included in the fit.
        #[arg(long)]
        p_max: Option<f64>,
    },
}

#[derive(Debug, Args)]
struct SampleArgs {
    /// Lattice exponents N (L = 2^N), comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    lattice_exp: Vec<u32>,
    /// Physical error rates, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    error_rate: Vec<f64>,
    #[arg(long, value_enum)]
    noise: NoiseArg,
    /// Samples per (L, p) cell.
    #[arg(long)]
    samples: u64,
    #[arg(long)]
    seed: u64,
    /// Rate used for the matching weights; defaults to each cell's rate.
    #[arg(long)]
    weight_p: Option<f64>,
    #[arg(long, default_value_t = fibcode::decoder::DecoderConfig::DEFAULT_MAX_ITERATIONS)]
    max_iters: usize,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum GraphAction {
    Dump {
        #[arg(long)]
        lattice_exp: u32,
        #[arg(long, value_enum, default_value_t = DumpFormat::Ascii)]
        format: DumpFormat,
    },
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Restrict to one noise model; required when the file holds both.
    #[arg(long, value_enum)]
    noise: Option<NoiseArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NoiseArg {
    Iid,
    Spanning,
}

impl From<NoiseArg> for NoiseModel {
    fn from(n: NoiseArg) -> Self {
        match n {
            NoiseArg::Iid => NoiseModel::Iid,
            NoiseArg::Spanning => NoiseModel::Spanning,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DumpFormat {
    Ascii,
    Json,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Sample(a) => {
            let mut cfg = RunConfig::new(a.lattice_exp, a.error_rate, a.noise.into(), a.samples, a.seed);
            cfg.weight_p = a.weight_p;
            cfg.max_iterations = a.max_iters;
            cfg.jobs = a.jobs;
            let stats = experiment::run_batch(&cfg)?;
            experiment::write_results(&stats, &a.out)
        }
        Command::Graph {
            action: GraphAction::Dump { lattice_exp, format },
        } => {
            let shape = LatticeShape::from_exponent(lattice_exp)?;
            let dg = DecodingGraph::build(shape)?;
            let text = match format {
                DumpFormat::Json => serde_json::to_string_pretty(&GraphDump::new(&dg.graph, &dg.table))? + "\n",
                DumpFormat::Ascii => ascii_dump(shape, &dg),
            };
            io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
        Command::FitAnsatz(a) => {
            let points = load_points(&a)?;
            let fit = analysis::fit_ansatz(&points)?;
            log::info!(
                "A={:.4} alpha={:.4} beta={:.4} gamma={:.4} delta={:.4}",
                fit.a,
                fit.alpha,
                fit.beta,
                fit.gamma,
                fit.delta
            );
            fit.report().write(&a.out)
        }
        Command::FitThreshold { common, p_min, p_max } => {
            let points = load_points(&common)?;
            let window = (p_min.is_some() || p_max.is_some())
                .then(|| (p_min.unwrap_or(f64::NEG_INFINITY), p_max.unwrap_or(f64::INFINITY)));
            let fit = analysis::fit_threshold(&points, window)?;
            log::info!("p_th={:.4} mu={:.4} B={:?}", fit.p_th, fit.mu, fit.b);
            fit.report().write(&common.out)
        }
    }
}

fn load_points(a: &FitArgs) -> Result<Vec<DataPoint>, Error> {
    let mut stats = experiment::read_results(&a.input)?;
    if let Some(n) = a.noise {
        let n = NoiseModel::from(n);
        stats.retain(|s| s.noise == n);
    }
    let mut models: Vec<NoiseModel> = stats.iter().map(|s: &SampleStats| s.noise).collect();
    models.sort();
    models.dedup();
    match models.len() {
        0 => Err(Error::Fit("no rows to fit".into())),
        1 => Ok(analysis::points_from_stats(&stats)),
        _ => Err(Error::Config("file mixes noise models; pick one with --noise".into())),
    }
}

fn ascii_dump(shape: LatticeShape, dg: &DecodingGraph) -> String {
    let g = &dg.graph;
    let sym = Symmetry::fundamental(shape);
    let anchor = sym.anchor().expect("fundamental symmetry has an anchor");
    let ends = |k: usize| {
        let (a, b) = g.edges()[k].ends;
        format!("{} - {}", g.vertices()[a], g.vertices()[b])
    };
    format!(
        "L={} symmetry anchored at {anchor}: {} members\n{}vertices {}, edges {}, flips by defect count {:?}\nspecial h: {}\nspecial v: {}\n",
        shape.width(),
        sym.len(),
        sym.indicator().to_ascii(),
        g.num_vertices(),
        g.edges().len(),
        g.defect_tally(),
        ends(g.special_h()),
        ends(g.special_v()),
    )
}
