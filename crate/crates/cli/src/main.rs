//! `bnnib`: dataset generation, training, aggregation and plotting.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use bnn_ib::datasets::{
    enumerate_endgames, format_tictactoe_line, gen_synthetic, gen_tictactoe, load_mnist_dir,
    write_cache,
};
use bnn_ib::experiment::{
    aggregate_runs, load_run_dir, run_file_name, run_training_on, AveragedLog, EpochRecord,
    ExperimentConfig, Figure, Scale,
};
use bnn_ib::report::{render, PlotKind, PlotRequest, TapSelector};
use bnn_ib::{Error, Split, TapId};
use clap::{Args, Parser, Subcommand, ValueEnum};

const OUT_DIR_ENV: &str = "BNNIB_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "bnnib",
    version,
    about = "Information-plane experiments with binary neural networks"
)]
struct Cli {
    /// Suppress progress output on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate or check datasets.
    #[command(subcommand)]
    Datasets(DatasetsCommand),
    /// Train one run per seed and write a RunLog for each.
    Train(TrainArgs),
    /// Average the RunLogs in a directory across seeds.
    Aggregate(AggregateArgs),
    /// Render an SVG figure from the RunLogs in a directory.
    Plot(PlotArgs),
    /// Train, aggregate and plot one of the built-in experiment presets.
    Reproduce(ReproduceArgs),
}

#[derive(Subcommand)]
enum DatasetsCommand {
    /// Write the 4096-row synthetic dataset as a binary cache file.
    GenSynthetic {
        #[arg(long, default_value_t = 0)]
        label_seed: u64,
        #[arg(long, default_value_t = 0)]
        split_seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the 958 Tic-Tac-Toe endgames as a cache file or CSV.
    GenTtt {
        #[arg(long, default_value_t = 0)]
        split_seed: u64,
        /// Write the UCI-style CSV instead of a cache file.
        #[arg(long)]
        csv: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Load MNIST IDX files from a directory and print a summary.
    VerifyMnist {
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(Args)]
struct DataRoot {
    /// Directory that relative dataset paths in configs resolve against.
    #[arg(long, default_value = ".")]
    data_root: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    config: PathBuf,
    /// Seeds to run; defaults to the config's seed list.
    #[arg(long, num_args = 1..)]
    seed: Vec<u64>,
    /// Output directory; falls back to $BNNIB_OUT_DIR, then the config's
    /// output_dir, then runs/<name>.
    #[arg(long, env = OUT_DIR_ENV)]
    out: Option<PathBuf>,
    /// Print a progress line every N epochs.
    #[arg(long, default_value_t = 100)]
    progress_every: usize,
    #[command(flatten)]
    data: DataRoot,
}

#[derive(Args)]
struct AggregateArgs {
    #[arg(long)]
    runs: PathBuf,
    /// Where to write the averaged JSON; defaults to <runs>/averaged.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Train,
    Test,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Test => Split::Test,
        }
    }
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    runs: PathBuf,
    /// info_plane, loss, accuracy, grad_evolution or layerwise_panels.
    #[arg(long)]
    kind: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "train")]
    split: SplitArg,
    /// Comma-separated taps (e.g. L1.act,softmax), "all", or "activations".
    #[arg(long, default_value = "activations")]
    taps: String,
}

#[derive(Args)]
struct ReproduceArgs {
    /// fig2a..fig2c, fig3a..fig3c, appendix-a-{tanh,hard-tanh,sign-swish},
    /// appendix-c or appendix-d.
    #[arg(long)]
    figure: String,
    #[arg(long, default_value = "desk")]
    scale: String,
    #[arg(long, env = OUT_DIR_ENV)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    progress_every: usize,
    #[command(flatten)]
    data: DataRoot,
}

/// Exit codes: 2 is reserved for usage errors reported by the argument parser.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidArgument(_) => 3,
        Error::Io { .. } => 4,
        Error::Format { .. } | Error::Parse { .. } | Error::Schema { .. } => 5,
        Error::Missing(_) => 6,
        Error::Shape { .. } | Error::State(_) => 7,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let quiet = cli.quiet;
    let result = match cli.command {
        Command::Datasets(cmd) => datasets(cmd),
        Command::Train(args) => train(args, quiet),
        Command::Aggregate(args) => aggregate(args),
        Command::Plot(args) => plot(args),
        Command::Reproduce(args) => reproduce(args, quiet),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io)?;
    }
    std::fs::write(path, bytes).map_err(io)
}

fn datasets(cmd: DatasetsCommand) -> Result<(), Error> {
    match cmd {
        DatasetsCommand::GenSynthetic {
            label_seed,
            split_seed,
            out,
        } => {
            let ds = gen_synthetic(label_seed, split_seed);
            write_cache(&ds, &out)?;
            let counts = ds.class_counts();
            println!(
                "synthetic: {} rows ({} train / {} validation), classes {:?} -> {}",
                ds.len(),
                ds.train.len(),
                ds.validation.len(),
                counts,
                out.display()
            );
        }
        DatasetsCommand::GenTtt {
            split_seed,
            csv,
            out,
        } => {
            if csv {
                let mut text = String::new();
                for (board, win) in enumerate_endgames() {
                    text.push_str(&format_tictactoe_line(&board, win));
                    text.push('\n');
                }
                write_file(&out, text.as_bytes())?;
                println!("tictactoe: 958 boards -> {}", out.display());
            } else {
                let ds = gen_tictactoe(split_seed);
                write_cache(&ds, &out)?;
                println!(
                    "tictactoe: {} boards ({} train / {} validation), {} x-wins -> {}",
                    ds.len(),
                    ds.train.len(),
                    ds.validation.len(),
                    ds.class_counts()[1],
                    out.display()
                );
            }
        }
        DatasetsCommand::VerifyMnist { dir } => {
            let ds = load_mnist_dir(&dir)?;
            let (lo, hi) = ds
                .features
                .as_slice()
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                });
            println!(
                "mnist: {} train / {} test, {} features in [{lo}, {hi}], class counts {:?}",
                ds.train.len(),
                ds.validation.len(),
                ds.dim(),
                ds.class_counts()
            );
        }
    }
    Ok(())
}

fn default_out(config: &ExperimentConfig, out: Option<PathBuf>) -> PathBuf {
    out.or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| Path::new("runs").join(&config.name))
}

fn progress_line(seed: u64, total: usize, every: usize) -> impl FnMut(&EpochRecord) {
    move |r: &EpochRecord| {
        if every > 0 && (r.epoch.is_multiple_of(every) || r.epoch == total) {
            eprintln!(
                "seed {seed} epoch {}/{total}: train loss {:.4} acc {:.4} | validation loss {:.4} acc {:.4}",
                r.epoch, r.train_loss, r.train_accuracy, r.validation_loss, r.validation_accuracy
            );
        }
    }
}

/// Trains every seed into `out`, one RunLog and one timing file per seed.
fn train_seeds(
    config: &ExperimentConfig,
    seeds: &[u64],
    out: &Path,
    data_root: &Path,
    progress_every: usize,
    quiet: bool,
) -> Result<(), Error> {
    config.validate()?;
    let ds = config.load_dataset(Some(data_root))?;
    for &seed in seeds {
        let started = Instant::now();
        let mut progress =
            progress_line(seed, config.epochs, if quiet { 0 } else { progress_every });
        let log = run_training_on(config, &ds, seed, Some(&mut progress))?;
        let path = out.join(run_file_name(seed));
        log.persist(&path)?;
        let timing = serde_json::json!({
            "seed": seed,
            "config_hash": log.config_hash,
            "epochs": config.epochs,
            "wall_seconds": started.elapsed().as_secs_f64(),
        });
        write_file(
            &out.join(format!("seed-{seed}.timing.json")),
            format!("{timing}\n").as_bytes(),
        )?;
        if !quiet {
            eprintln!(
                "seed {seed}: wrote {} ({:.1}s)",
                path.display(),
                started.elapsed().as_secs_f64()
            );
        }
    }
    Ok(())
}

fn train(args: TrainArgs, quiet: bool) -> Result<(), Error> {
    let config = ExperimentConfig::from_file(&args.config)?;
    let seeds = if args.seed.is_empty() {
        config.seeds.clone()
    } else {
        args.seed.clone()
    };
    let out = default_out(&config, args.out);
    train_seeds(
        &config,
        &seeds,
        &out,
        &args.data.data_root,
        args.progress_every,
        quiet,
    )?;
    println!("{} run(s) in {}", seeds.len(), out.display());
    Ok(())
}

fn write_averaged(avg: &AveragedLog, path: &Path) -> Result<(), Error> {
    let json = serde_json::to_string_pretty(avg)
        .map_err(|e| Error::State(format!("serializing averaged log: {e}")))?;
    write_file(path, format!("{json}\n").as_bytes())
}

fn summarize(avg: &AveragedLog) {
    if let Some(last) = avg.epochs.last() {
        println!(
            "{} ({} seeds {:?}) epoch {}: train loss {:.4}±{:.4} acc {:.4}, validation loss {:.4} acc {:.4}",
            avg.config.name,
            avg.seeds.len(),
            avg.seeds,
            last.epoch,
            last.train_loss.mean,
            last.train_loss.variance.sqrt(),
            last.train_accuracy.mean,
            last.validation_loss.mean,
            last.validation_accuracy.mean
        );
    }
}

fn aggregate(args: AggregateArgs) -> Result<(), Error> {
    let avg = aggregate_runs(&load_run_dir(&args.runs)?)?;
    let out = args.out.unwrap_or_else(|| args.runs.join("averaged.json"));
    write_averaged(&avg, &out)?;
    summarize(&avg);
    println!("wrote {}", out.display());
    Ok(())
}

fn parse_taps(spec: &str) -> Result<TapSelector, Error> {
    match spec {
        "activations" => Ok(TapSelector::Activations),
        "all" => Ok(TapSelector::All),
        list => Ok(TapSelector::Only(
            list.split(',')
                .map(|t| t.trim().parse::<TapId>())
                .collect::<Result<_, _>>()?,
        )),
    }
}

fn plot(args: PlotArgs) -> Result<(), Error> {
    let kind: PlotKind = args.kind.parse()?;
    let avg = aggregate_runs(&load_run_dir(&args.runs)?)?;
    let req = PlotRequest {
        kind,
        split: args.split.into(),
        taps: parse_taps(&args.taps)?,
    };
    write_file(&args.out, render(&avg, &req)?.as_bytes())?;
    println!("wrote {}", args.out.display());
    Ok(())
}

/// Every figure kind for one averaged experiment, written into `dir`.
fn emit_figures(avg: &AveragedLog, dir: &Path) -> Result<Vec<PathBuf>, Error> {
    let mut written = Vec::new();
    let mut emit = |name: String, req: PlotRequest| -> Result<(), Error> {
        let path = dir.join(name);
        write_file(&path, render(avg, &req)?.as_bytes())?;
        written.push(path);
        Ok(())
    };
    for split in [Split::Train, Split::Test] {
        for kind in [PlotKind::InfoPlane, PlotKind::LayerwisePanels] {
            emit(
                format!("{kind}_{split}.svg"),
                PlotRequest {
                    kind,
                    split,
                    taps: TapSelector::Activations,
                },
            )?;
        }
    }
    for kind in [PlotKind::Loss, PlotKind::Accuracy, PlotKind::GradEvolution] {
        emit(format!("{kind}.svg"), PlotRequest::new(kind))?;
    }
    Ok(written)
}

fn reproduce(args: ReproduceArgs, quiet: bool) -> Result<(), Error> {
    let figure: Figure = args.figure.parse()?;
    let scale: Scale = args.scale.parse()?;
    let root = args
        .out
        .unwrap_or_else(|| Path::new("runs").join(format!("{figure}-{scale}")));
    for config in figure.configs(scale)? {
        let dir = root.join(&config.name);
        if !quiet {
            eprintln!(
                "{}: {} epochs x {} seeds -> {}",
                config.name,
                config.epochs,
                config.seeds.len(),
                dir.display()
            );
        }
        train_seeds(
            &config,
            &config.seeds,
            &dir,
            &args.data.data_root,
            args.progress_every,
            quiet,
        )?;
        let avg = aggregate_runs(&load_run_dir(&dir)?)?;
        write_averaged(&avg, &dir.join("averaged.json"))?;
        summarize(&avg);
        for path in emit_figures(&avg, &dir)? {
            println!("wrote {}", path.display());
        }
    }
    std::io::stdout().flush().ok();
    Ok(())
}
