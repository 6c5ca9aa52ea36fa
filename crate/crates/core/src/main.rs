use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cumdiff::cli::{self, GraphOptions, InputOptions, Loaded, DEFAULT_THRESHOLD};
use cumdiff::ingest::{ParseOptions, PerturbationPolicy, DEFAULT_PERTURBATION};
use cumdiff::reliability::BinStrategy;
use cumdiff::synthgen::{SyntheticModel, DEFAULT_FIRST_SIZE, DEFAULT_SECOND_SIZE};

/// Compare two subpopulations' responses via cumulative differences.
#[derive(Parser)]
#[command(name = "cumdiff", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print n, G, H, sigma, G/sigma and H/sigma for one pair of groups.
    Stats {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Also write the JSON report into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the cumulative plot, series table and reliability diagrams for one pair.
    Graph {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        graph: GraphArgs,
    },
    /// Screen many pairs by H/sigma and graph the flagged ones.
    Screen {
        #[command(flatten)]
        input: InputArgs,
        /// Pair to screen as FIRST,SECOND; repeatable. Defaults to all pairs.
        #[arg(long = "pair", value_parser = parse_pair)]
        pairs: Vec<(String, String)>,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[command(flatten)]
        graph: GraphArgs,
    },
    /// Generate one of the synthetic example datasets.
    Synth {
        /// example1, example2, example3 or example4
        example: String,
        #[arg(long, default_value_t = DEFAULT_FIRST_SIZE)]
        size0: usize,
        #[arg(long, default_value_t = DEFAULT_SECOND_SIZE)]
        size1: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    /// Require a `weight` column.
    #[arg(long)]
    weights: bool,
    #[arg(long, default_value = ",", value_parser = parse_delimiter)]
    delimiter: u8,
    /// Relative magnitude of the jitter that breaks score ties.
    #[arg(long, default_value_t = DEFAULT_PERTURBATION)]
    perturb: f64,
    /// Seed for tie-breaking jitter.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct PairArgs {
    #[arg(long)]
    first: String,
    #[arg(long)]
    second: String,
}

#[derive(Args)]
struct GraphArgs {
    /// Reliability-diagram bin count; repeatable.
    #[arg(long = "bins")]
    bins: Vec<usize>,
    /// Binning strategy; repeatable. Defaults depend on whether data are weighted.
    #[arg(long = "strategy", value_parser = |s: &str| s.parse::<BinStrategy>())]
    strategies: Vec<BinStrategy>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// svg writes plots and tables; csv writes tables only; json also prints the report as JSON.
    #[arg(long, value_enum, default_value_t = Format::Svg)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Svg,
    Csv,
    Json,
}

fn parse_pair(s: &str) -> Result<(String, String), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected FIRST,SECOND, got {s:?}"))?;
    Ok((a.to_string(), b.to_string()))
}

fn parse_delimiter(s: &str) -> Result<u8, String> {
    match s {
        "\\t" | "tab" => Ok(b'\t'),
        _ if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
        _ => Err(format!(
            "delimiter must be a single ASCII character, got {s:?}"
        )),
    }
}

impl InputArgs {
    fn load(&self) -> cumdiff::Result<Loaded> {
        let opts = InputOptions {
            input: self.input.clone(),
            parse: ParseOptions {
                delimiter: self.delimiter,
                require_weights: self.weights,
            },
            perturbation: PerturbationPolicy::new(self.perturb, self.seed)?,
        };
        cli::load(&opts)
    }
}

impl GraphArgs {
    fn options(&self) -> GraphOptions {
        GraphOptions {
            out_dir: self.out.clone(),
            bins: self.bins.clone(),
            strategies: self.strategies.clone(),
            tables_only: self.format == Format::Csv,
        }
    }
}

fn run(cli: Cli) -> cumdiff::Result<()> {
    match cli.command {
        Command::Stats {
            input,
            pair,
            format,
            out,
        } => {
            let loaded = input.load()?;
            let report = cli::run_stats(&loaded, &pair.first, &pair.second)?;
            match format {
                Format::Json => print!("{}", report.to_json()?),
                Format::Csv => print!("{}", report.to_csv()),
                Format::Text | Format::Svg => print!("{}", report.to_text()),
            }
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                let name = format!(
                    "{}_vs_{}_stats.json",
                    cli::file_stem(&pair.first),
                    cli::file_stem(&pair.second)
                );
                cli::write_atomic(&dir.join(name), report.to_json()?.as_bytes())?;
            }
        }
        Command::Graph { input, pair, graph } => {
            let loaded = input.load()?;
            let output = cli::run_graph(&loaded, &pair.first, &pair.second, &graph.options())?;
            if graph.format == Format::Json {
                print!("{}", output.report.to_json()?);
            } else {
                print!("{}", output.report.to_text());
            }
            for f in &output.files {
                eprintln!("wrote {}", f.display());
            }
        }
        Command::Screen {
            input,
            pairs,
            threshold,
            graph,
        } => {
            let loaded = input.load()?;
            let pairs = (!pairs.is_empty()).then_some(pairs);
            let (report, graphs) = cli::run_screen(&loaded, pairs, threshold, &graph.options())?;
            std::fs::create_dir_all(&graph.out)?;
            let json = serde_json::to_string_pretty(&report)? + "\n";
            cli::write_atomic(&graph.out.join("screen.json"), json.as_bytes())?;
            cli::write_atomic(&graph.out.join("screen.csv"), report.to_csv().as_bytes())?;
            if graph.format == Format::Json {
                print!("{json}");
            } else {
                print!("{}", report.to_csv());
            }
            for g in &graphs {
                for f in &g.files {
                    eprintln!("wrote {}", f.display());
                }
            }
        }
        Command::Synth {
            example,
            size0,
            size1,
            seed,
            out,
        } => {
            let example = cli::parse_example(&example)?;
            let model = SyntheticModel::new(example, seed).with_sizes(size0, size1);
            let output = cli::run_synth(&model, &out)?;
            println!("seed: {}", output.seed);
            println!("rows: {}", output.rows);
            println!("dataset: {}", output.dataset.display());
            println!("truth: {}", output.truth.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
