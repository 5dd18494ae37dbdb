//! `graphfam` command-line interface.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 generation
//! failure, 3 validation failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use graphfam::bench::run_benchmark;
use graphfam::io::{
    parse_config, read_dataset, write_canonical, write_dataset, ConfigFormat, DatasetError,
};
use graphfam::pipeline::generate_dataset;
use graphfam::validation::{run_sensitivity, validate_family, DeviationTarget, SensitivityConfig, ValidationOptions};
use graphfam::{derive_shifted_family, generate_graph, FamilyConfig, FamilyShift, GenError, UniverseConfig};
use rayon::prelude::*;

const THREADS_ENV: &str = "GRAPHUNIVERSE_THREADS";

#[derive(Parser)]
#[command(name = "graphfam", version, about = "Generate and validate families of community-structured graphs")]
struct Cli {
    /// Worker threads (overridden by GRAPHUNIVERSE_THREADS). Output bytes do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Pstar,
    Psub,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset directory from a TOML or JSON config.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Replaces the universe seed; the family seed then follows it.
        #[arg(long)]
        seed: Option<u64>,
        /// One graph with node-level splits.
        #[arg(long)]
        transductive: bool,
        /// Overwrite an existing dataset.
        #[arg(long)]
        force: bool,
    },
    /// Compute the validation metrics of a dataset.
    Validate {
        #[arg(long)]
        dataset: PathBuf,
        /// CSV, or canonical JSON when the name ends in `.json`.
        #[arg(long)]
        report: PathBuf,
        #[arg(long, value_enum, default_value = "pstar")]
        deviation_target: Target,
        /// Skip invariant checks and the regeneration check on load.
        #[arg(long)]
        skip_validate: bool,
        /// Seed of the forest and split streams.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Randomized parameter sensitivity study.
    Sensitivity {
        #[arg(long, default_value_t = 100)]
        families: usize,
        #[arg(long, default_value_t = 30)]
        graphs: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Regenerate a dataset with shifted homophily, degree and size ranges.
    Shift {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        dh: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        dd: f64,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        dn: i64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Single-threaded generation timing per graph size.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "100,200,300,400,500,600,700,800,900,1000")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 500)]
        per_size: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Local HTTP API.
    Serve {
        #[arg(long, default_value_t = 8000)]
        port: u16,
        #[arg(long, default_value = "graphfam-data")]
        data_dir: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Generation(String),
    Validation(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Generation(_) => 2,
            Failure::Validation(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Generation(m) | Failure::Validation(m) => m,
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = thread_count(cli.threads).and_then(|threads| match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::Usage(e.to_string()))?
            .install(|| run(cli.command)),
        None => run(cli.command),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, Failure> {
    let from_env = match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| Failure::Usage(format!("{THREADS_ENV}={v:?} is not a thread count")))?,
        ),
        _ => None,
    };
    match from_env.or(flag) {
        Some(0) => Err(Failure::Usage("thread count must be at least 1".into())),
        other => Ok(other),
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Generate { config, out, seed, transductive, force } => {
            generate(&config, &out, seed, transductive, force)
        }
        Command::Validate { dataset, report, deviation_target, skip_validate, seed } => {
            let target = match deviation_target {
                Target::Pstar => DeviationTarget::PStar,
                Target::Psub => DeviationTarget::PSub,
            };
            validate(&dataset, &report, target, skip_validate, seed)
        }
        Command::Sensitivity { families, graphs, out, seed } => sensitivity(families, graphs, &out, seed),
        Command::Shift { dataset, dh, dd, dn, out, force } => shift(&dataset, dh, dd, dn, &out, force),
        Command::Bench { sizes, per_size, out } => bench(&sizes, per_size, &out),
        Command::Serve { port, data_dir } => {
            graphfam_service::run(port, data_dir).map_err(|e| Failure::Usage(e.to_string()))
        }
    }
}

fn generation_failure(e: GenError) -> Failure {
    match &e {
        GenError::InvalidConfig { .. } | GenError::InvalidArgument(_) => Failure::Usage(e.to_string()),
        GenError::FamilyFailed { failures, .. } => {
            for f in failures {
                eprintln!("graph {}: {}", f.graph_index, f.message);
            }
            Failure::Generation(e.to_string())
        }
        _ => Failure::Generation(e.to_string()),
    }
}

fn write_failure(e: DatasetError) -> Failure {
    match e {
        DatasetError::AlreadyExists(_) => Failure::Usage(e.to_string()),
        other => Failure::Generation(other.to_string()),
    }
}

fn create_file(path: &Path) -> Result<fs::File, Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Failure::Usage(format!("{}: {e}", parent.display())))?;
    }
    fs::File::create(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn generate_into(
    universe: &UniverseConfig,
    family: &FamilyConfig,
    mode: graphfam::io::DatasetMode,
    out: &Path,
    force: bool,
) -> Outcome {
    let started = Instant::now();
    let generated = generate_dataset(universe, family, mode, &AtomicUsize::new(0)).map_err(generation_failure)?;
    let manifest = write_dataset(out, &generated.dataset, force).map_err(write_failure)?;
    println!(
        "wrote {} graph(s) to {} in {:.2}s (universe {})",
        manifest.graph_count,
        out.display(),
        started.elapsed().as_secs_f64(),
        &manifest.universe_hash[..16]
    );
    Ok(())
}

fn generate(config: &Path, out: &Path, seed: Option<u64>, transductive: bool, force: bool) -> Outcome {
    let text = fs::read_to_string(config).map_err(|e| Failure::Usage(format!("{}: {e}", config.display())))?;
    let mut parsed = parse_config(&text, ConfigFormat::from_path(config), transductive)
        .map_err(|e| Failure::Usage(format!("{}: {e}", config.display())))?;
    for w in &parsed.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(seed) = seed {
        parsed.universe.seed = seed;
        parsed.family.seed = None;
    }
    generate_into(&parsed.universe, &parsed.family, parsed.mode, out, force)
}

fn validate(dataset: &Path, report: &Path, target: DeviationTarget, skip: bool, seed: u64) -> Outcome {
    let data = read_dataset(dataset, !skip).map_err(|e| Failure::Validation(e.to_string()))?;
    // Regenerating each graph both times it and confirms the stored bytes
    // follow from the stored configs.
    let timings = if skip {
        None
    } else {
        let secs = data
            .instances
            .par_iter()
            .map(|g| {
                let start = Instant::now();
                let again = generate_graph(&data.universe, &data.family, g.graph_index)
                    .map_err(|e| Failure::Validation(format!("graph {}: {e}", g.graph_index)))?;
                let elapsed = start.elapsed().as_secs_f64();
                if &again != g {
                    return Err(Failure::Validation(format!(
                        "graph {} differs from its regeneration",
                        g.graph_index
                    )));
                }
                Ok(elapsed)
            })
            .collect::<Result<Vec<f64>, Failure>>()?;
        Some(secs)
    };
    let options = ValidationOptions {
        seed,
        deviation_target: target,
        ..Default::default()
    };
    let result = validate_family(&data.universe, &data.instances, timings.as_deref(), &options);
    let file = create_file(report)?;
    let written = if report.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        write_canonical(file, &result).map_err(|e| e.to_string())
    } else {
        result.write_csv(file).map_err(|e| e.to_string())
    };
    written.map_err(|e| Failure::Usage(format!("{}: {e}", report.display())))?;

    println!("{:<26} {:>12} {:>12} {:>6}", "metric", "mean", "std", "n");
    for (name, s) in &result.summary {
        println!("{name:<26} {:>12.6} {:>12.6} {:>6}", s.mean, s.std, s.count);
    }
    if let Some(fc) = result.feature_consistency {
        println!("{:<26} {fc:>12.6}", "feature_consistency");
    }
    Ok(())
}

/// Prints `label done/total` to stderr whenever the counter moves.
fn watch_progress<T>(label: &str, total: usize, counter: &AtomicUsize, work: impl FnOnce() -> T) -> T {
    let done = std::sync::atomic::AtomicBool::new(false);
    std::thread::scope(|scope| {
        scope.spawn(|| {
            let mut last = usize::MAX;
            while !done.load(Ordering::Relaxed) {
                let now = counter.load(Ordering::Relaxed);
                if now != last {
                    eprintln!("{label} {now}/{total}");
                    last = now;
                }
                std::thread::sleep(Duration::from_millis(500));
            }
        });
        let out = work();
        done.store(true, Ordering::Relaxed);
        out
    })
}

fn sensitivity(families: usize, graphs: usize, out: &Path, seed: u64) -> Outcome {
    if families < 3 || graphs < 1 {
        return Err(Failure::Usage("need at least 3 families and 1 graph per family".into()));
    }
    let config = SensitivityConfig {
        families,
        graphs_per_family: graphs,
        seed,
        ..Default::default()
    };
    let progress = AtomicUsize::new(0);
    let started = Instant::now();
    let result = watch_progress("families", families, &progress, || {
        run_sensitivity(&config, &ValidationOptions::default(), &progress)
    });
    fs::create_dir_all(out).map_err(|e| Failure::Usage(format!("{}: {e}", out.display())))?;
    let io = |e: std::io::Error| Failure::Usage(e.to_string());
    result.write_csv(create_file(&out.join("correlations.csv"))?).map_err(io)?;
    write_canonical(create_file(&out.join("sensitivity.json"))?, &result)
        .map_err(|e| Failure::Usage(e.to_string()))?;

    println!(
        "{} families used, {} failed, {:.1}s",
        result.families_used,
        result.failed_families,
        started.elapsed().as_secs_f64()
    );
    for check in result.sign_checks() {
        let (r, p) = check.test.map_or((f64::NAN, f64::NAN), |t| (t.pearson_r, t.p_value));
        println!(
            "{} {:>24} -> {:<22} expected {:+} r={r:+.3} p={p:.2e}",
            if check.passed { "ok  " } else { "MISS" },
            check.parameter,
            check.metric,
            check.expected_sign,
        );
    }
    Ok(())
}

fn shift(dataset: &Path, dh: f64, dd: f64, dn: i64, out: &Path, force: bool) -> Outcome {
    let data = read_dataset(dataset, true).map_err(|e| Failure::Validation(e.to_string()))?;
    let shifted = derive_shifted_family(
        &data.family,
        &FamilyShift {
            homophily: dh,
            avg_degree: dd,
            node_count: dn,
        },
    )
    .map_err(|e| Failure::Usage(e.to_string()))?;
    generate_into(&data.universe.config, &shifted, data.mode, out, force)
}

fn bench(sizes: &[usize], per_size: usize, out: &Path) -> Outcome {
    if sizes.is_empty() || per_size == 0 {
        return Err(Failure::Usage("need at least one size and one graph per size".into()));
    }
    let result = run_benchmark(&UniverseConfig::default(), &FamilyConfig::default(), sizes, per_size)
        .map_err(generation_failure)?;
    result
        .write_csv(create_file(out)?)
        .map_err(|e| Failure::Usage(format!("{}: {e}", out.display())))?;
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "{:>10} {:>10} {:>14} {:>12} {:>10}", "nodes", "edges", "sec/graph", "graphs/sec", "R^2");
    for row in &result.rows {
        let _ = writeln!(
            stdout,
            "{:>10.1} {:>10.1} {:>14.6} {:>12.2} {:>10}",
            row.avg_nodes,
            row.avg_edges,
            row.time_per_graph_sec,
            row.throughput_graphs_per_sec,
            row.r_squared.map_or("-".into(), |r| format!("{r:.4}"))
        );
    }
    if let Some(r2) = result.r_squared {
        let _ = writeln!(stdout, "time vs edges across sizes: R^2 = {r2:.4}");
    }
    Ok(())
}
