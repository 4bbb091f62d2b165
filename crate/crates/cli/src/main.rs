use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};
use simvc_cli::commands::{eval_command, mask_command, synth_command};
use simvc_cli::experiment::write_results;
use simvc_cli::{run_experiment, AnchorCount, CliError, ExperimentArgs, MaskSource};

#[derive(Parser)]
#[command(
    name = "simvc",
    version,
    about = "Incomplete multi-view clustering with anchor-graph alignment"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve, cluster and score a dataset, repeated over derived seeds.
    #[command(group(ArgGroup::new("masking").required(true).args(["mask", "ratio"])))]
    Run {
        #[arg(long)]
        manifest: PathBuf,
        /// Presence mask file (n rows x V columns of 0/1).
        #[arg(long)]
        mask: Option<PathBuf>,
        /// Generate a mask removing this fraction of (view, sample) cells.
        #[arg(long)]
        ratio: Option<f64>,
        /// k, 2k, 5k (multiples of the cluster count) or an absolute count.
        #[arg(long, default_value = "2k")]
        anchors: AnchorCount,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1e-2)]
        mu: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        #[arg(long, default_value_t = 50)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Keep alignment matrices frozen at identity.
        #[arg(long)]
        no_align: bool,
        /// Keep the k-means anchors from initialization.
        #[arg(long)]
        fixed_anchors: bool,
        /// k-means restarts on the final embedding.
        #[arg(long, visible_alias = "restarts", default_value_t = 10)]
        kmeans_restarts: usize,
        /// Draw a new mask for every repeat.
        #[arg(long, requires = "ratio")]
        remask: bool,
        /// Sweep the default lambda, mu and anchor grids.
        #[arg(long)]
        grid: bool,
        /// Worker threads; 1 runs everything on the calling thread, 0 uses all cores.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Convergence trace CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Write a presence mask for a dataset.
    Mask {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        ratio: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a synthetic dataset, labels and manifest from a JSON spec.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Score predicted labels against true labels.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            manifest,
            mask,
            ratio,
            anchors,
            lambda,
            mu,
            seed,
            repeats,
            max_iters,
            tol,
            no_align,
            fixed_anchors,
            kmeans_restarts,
            remask,
            grid,
            threads,
            out,
            trace,
        } => {
            let mask = match (mask, ratio) {
                (Some(path), _) => MaskSource::File(path),
                (None, Some(r)) => MaskSource::Ratio(r),
                (None, None) => unreachable!("clap requires --mask or --ratio"),
            };
            let mut args = ExperimentArgs::new(manifest, mask);
            args.anchors = anchors;
            args.lambda = lambda;
            args.mu = mu;
            args.seed = seed;
            args.repeats = repeats;
            args.max_iters = max_iters;
            args.tol = tol;
            args.align = !no_align;
            args.learn_anchors = !fixed_anchors;
            args.kmeans_restarts = kmeans_restarts;
            args.remask = remask;
            args.grid = grid;
            args.parallel = threads != 1;
            if threads > 1 {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global()
                    .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
            }
            let results = run_experiment(&args)?;
            for r in &results {
                println!("{}", r.summary_line());
            }
            write_results(&results, grid, out.as_deref(), trace.as_deref())
        }
        Command::Mask {
            manifest,
            ratio,
            seed,
            out,
        } => mask_command(&manifest, ratio, seed, &out),
        Command::Synth { spec, out_dir } => {
            let manifest = synth_command(&spec, &out_dir)?;
            println!("{}", manifest.display());
            Ok(())
        }
        Command::Eval { pred, truth } => {
            let report = eval_command(&pred, &truth)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("serializable")
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
