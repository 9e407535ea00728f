use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::thread;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use sgim::harness::{
    aggregate_timelines, read_points, read_timeline_file, write_histogram, write_report, GOALS_FILE, MEMORY_FILE,
    TIMELINE_FILE,
};
use sgim::social::{read_teaching_set, write_teaching_set};
use sgim::{
    build_teaching_set, generate_benchmark, run_experiment, Benchmark, Experiment64, Memory64, Strategy, TeachingItem,
};

const DEFAULT_BENCHMARK_SEED: u64 = 1_000_003;
const DEFAULT_TEACHER_SEED: u64 = 2_000_003;

#[derive(Parser)]
#[command(
    name = "sgim",
    version,
    about = "Goal-babbling experiments on the fishing-rod surrogate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the evaluation benchmark and write it as `cell,y1,y2` lines.
    Benchmark {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULT_BENCHMARK_SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the teacher's demonstration set.
    Teachset {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULT_TEACHER_SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one experiment into a directory.
    Run {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every strategy for every seed, sharing one benchmark and teaching set.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        inputs: Inputs,
        /// Comma-separated strategies; all four by default.
        #[arg(long, value_delimiter = ',')]
        strategies: Vec<Strategy>,
        /// Comma-separated seeds.
        #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3, 4, 5])]
        seeds: Vec<u64>,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Grid histograms of the reached outcomes and self-generated goals of a run.
    Hist {
        #[command(flatten)]
        common: Common,
        /// Run directory produced by `run` or `sweep`.
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mean and standard deviation of timelines across runs, per evaluation tick.
    Report {
        /// Run directories.
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML file with experiment configuration fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    strategy: Option<Strategy>,
    #[arg(long)]
    total_movements: Option<usize>,
    #[arg(long)]
    eval_period: Option<usize>,
    #[arg(long)]
    large_space: Option<bool>,
    #[arg(long)]
    demo_period: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    noise_sigma: Option<f64>,
}

impl Common {
    fn load(&self) -> Result<Experiment64> {
        let mut cfg = match &self.config {
            Some(p) => Experiment64::load(p).with_context(|| format!("reading {}", p.display()))?,
            None => Experiment64::default(),
        };
        if let Some(v) = self.strategy {
            cfg.strategy = v;
        }
        if let Some(v) = self.total_movements {
            cfg.total_movements = v;
        }
        if let Some(v) = self.eval_period {
            cfg.eval_period = v;
        }
        if let Some(v) = self.large_space {
            cfg.large_space = v;
        }
        if let Some(v) = self.demo_period {
            cfg.teacher.demo_period = v;
        }
        if let Some(v) = self.alpha {
            cfg.lowlevel.alpha = v;
        }
        if let Some(v) = self.noise_sigma {
            cfg.environment.noise_sigma = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct Inputs {
    /// Benchmark file; generated with `--benchmark-seed` when absent.
    #[arg(long)]
    benchmark: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_BENCHMARK_SEED)]
    benchmark_seed: u64,
    /// Teaching-set file; built with `--teacher-seed` when absent and needed.
    #[arg(long)]
    teaching: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TEACHER_SEED)]
    teacher_seed: u64,
}

impl Inputs {
    fn benchmark(&self, cfg: &Experiment64) -> Result<Benchmark<f64>> {
        match &self.benchmark {
            Some(p) => Ok(Benchmark::read(BufReader::new(open(p)?))?),
            None => Ok(generate_benchmark(cfg, self.benchmark_seed)?),
        }
    }

    fn teaching(&self, cfg: &Experiment64, needed: bool) -> Result<Vec<TeachingItem<f64>>> {
        match &self.teaching {
            Some(p) => Ok(read_teaching_set(BufReader::new(open(p)?))?),
            None if needed => Ok(build_teaching_set(
                &cfg.environment,
                &cfg.teacher,
                &cfg.task_bounds,
                self.teacher_seed,
            )?),
            None => Ok(Vec::new()),
        }
    }
}

fn open(p: &Path) -> Result<File> {
    File::open(p).with_context(|| format!("opening {}", p.display()))
}

fn create(p: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(
        File::create(p).with_context(|| format!("creating {}", p.display()))?,
    ))
}

fn run_one(cfg: &Experiment64, bench: &Benchmark<f64>, teaching: &[TeachingItem<f64>], out: &Path) -> Result<()> {
    let run = run_experiment(cfg, Some(bench), teaching)?;
    run.write_dir(out)?;
    if let Some(e) = run.final_error() {
        println!(
            "{} seed {}: final mean error {e:.6} -> {}",
            cfg.strategy,
            cfg.seed,
            out.display()
        );
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Benchmark { common, seed, out } => {
            let cfg = common.load()?;
            let bench = generate_benchmark(&cfg, seed)?;
            bench.write(create(&out)?)?;
            println!("{} benchmark points -> {}", bench.len(), out.display());
        }
        Command::Teachset { common, seed, out } => {
            let cfg = common.load()?;
            let items = build_teaching_set(&cfg.environment, &cfg.teacher, &cfg.task_bounds, seed)?;
            write_teaching_set(&items, create(&out)?)?;
            println!("{} demonstrations -> {}", items.len(), out.display());
        }
        Command::Run {
            common,
            inputs,
            seed,
            out,
        } => {
            let mut cfg = common.load()?;
            cfg.seed = seed;
            let bench = inputs.benchmark(&cfg)?;
            let teaching = inputs.teaching(&cfg, cfg.strategy.uses_teacher())?;
            run_one(&cfg, &bench, &teaching, &out)?;
        }
        Command::Sweep {
            common,
            inputs,
            strategies,
            seeds,
            jobs,
            out,
        } => {
            let base = common.load()?;
            let strategies = if strategies.is_empty() {
                Strategy::ALL.to_vec()
            } else {
                strategies
            };
            let bench = inputs.benchmark(&base)?;
            let teaching = inputs.teaching(&base, strategies.iter().any(|s| s.uses_teacher()))?;
            fs::create_dir_all(&out)?;
            bench.write(create(&out.join("benchmark.csv"))?)?;
            if !teaching.is_empty() {
                write_teaching_set(&teaching, create(&out.join("teaching.csv"))?)?;
            }
            let tasks: Vec<(Experiment64, PathBuf)> = strategies
                .iter()
                .flat_map(|&s| seeds.iter().map(move |&seed| (s, seed)))
                .map(|(strategy, seed)| {
                    let cfg = Experiment64 {
                        strategy,
                        seed,
                        ..base.clone()
                    };
                    (cfg, out.join(strategy.as_str()).join(format!("seed-{seed}")))
                })
                .collect();
            let jobs = jobs
                .unwrap_or_else(|| thread::available_parallelism().map_or(1, |n| n.get()))
                .clamp(1, tasks.len().max(1));
            let results: Vec<Result<()>> = thread::scope(|s| {
                let handles: Vec<_> = (0..jobs)
                    .map(|w| {
                        let (tasks, bench, teaching) = (&tasks, &bench, &teaching);
                        s.spawn(move || {
                            tasks
                                .iter()
                                .skip(w)
                                .step_by(jobs)
                                .map(|(cfg, dir)| run_one(cfg, bench, teaching, dir))
                                .collect::<Vec<_>>()
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .flat_map(|h| h.join().expect("worker panicked"))
                    .collect()
            });
            for r in results {
                r?;
            }
        }
        Command::Hist { common, run, out } => {
            let cfg = common.load()?;
            let grid = cfg.grid();
            let mem = Memory64::restore(BufReader::new(open(&run.join(MEMORY_FILE))?))?;
            let outcomes: Vec<_> = mem.episodes().iter().map(|e| e.outcome).collect();
            let goals = read_points::<f64, _>(BufReader::new(open(&run.join(GOALS_FILE))?))?;
            fs::create_dir_all(&out)?;
            write_histogram(&grid.counts(&outcomes), &grid, create(&out.join("outcomes_hist.csv"))?)?;
            write_histogram(&grid.counts(&goals), &grid, create(&out.join("goals_hist.csv"))?)?;
            println!(
                "occupied cells: {} outcomes, {} goals",
                sgim::harness::occupied_cells(&outcomes, &grid),
                sgim::harness::occupied_cells(&goals, &grid)
            );
        }
        Command::Report { runs, out } => {
            let timelines = runs
                .iter()
                .map(|r| read_timeline_file(&r.join(TIMELINE_FILE)).with_context(|| format!("reading {}", r.display())))
                .collect::<Result<Vec<_>>>()?;
            if timelines.iter().all(|t| t.is_empty()) {
                bail!("no evaluation rows in the given runs");
            }
            let rows = aggregate_timelines(&timelines)?;
            match out {
                Some(p) => write_report(&rows, create(&p)?)?,
                None => write_report(&rows, std::io::stdout().lock())?,
            }
        }
    }
    Ok(())
}
