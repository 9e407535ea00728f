//! Experiment orchestration: benchmark generation, the four strategy loops, periodic
//! evaluation and run artifacts.

use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::env::{simulate, EnvironmentConfig, FishingEnv};
use crate::error::{Error, Result};
use crate::format::{fmt_num, parse_num};
use crate::grid::Grid;
use crate::highlevel::{uniform_in, HighLevelConfig, RegionTree};
use crate::lowlevel::{exploit_action, explore_action, LowLevel, LowLevelConfig};
use crate::memory::EpisodicMemory;
use crate::rng::{self, Rng};
use crate::scalar::Scalar;
use crate::similarity::{competence, distance, sim, SimilarityContext};
use crate::social::{emulate, imitate_demo, interaction_due, next_demo, TeacherConfig, TeachingItem};
use crate::space::{Origin, Rect, TaskPoint};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Uniform random motor babbling.
    Random,
    /// Intrinsically motivated goal babbling only.
    SaggRiac,
    /// Goal babbling interrupted by a demonstration every `demo_period` movements.
    SgimD,
    /// Only variations of the teacher's demonstrations.
    DemoOnly,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Random,
        Strategy::SaggRiac,
        Strategy::SgimD,
        Strategy::DemoOnly,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Random => "random",
            Strategy::SaggRiac => "sagg_riac",
            Strategy::SgimD => "sgim_d",
            Strategy::DemoOnly => "demo_only",
        }
    }

    pub fn uses_teacher(self) -> bool {
        matches!(self, Strategy::SgimD | Strategy::DemoOnly)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown strategy {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig<T: Scalar> {
    pub strategy: Strategy,
    pub total_movements: usize,
    pub eval_period: usize,
    /// Task space close to the reachable region; benchmark, teaching and histogram grids live here.
    pub task_bounds: Rect<T>,
    /// Generate goals in `task_bounds` scaled by `large_space_factor` in area.
    pub large_space: bool,
    pub large_space_factor: T,
    /// Benchmark and histogram grid `[cols, rows]`.
    pub grid: [usize; 2],
    pub seed: u64,
    /// Reached points a grid cell needs before it is admitted into the benchmark.
    pub min_hits: usize,
    /// Noiseless random actions used to estimate the reachable set for the benchmark.
    pub reach_samples: usize,
    /// Length of the goal-babbling run added to the reachable-set estimate.
    pub shakedown_movements: usize,
    pub environment: EnvironmentConfig<T>,
    pub lowlevel: LowLevelConfig<T>,
    pub highlevel: HighLevelConfig<T>,
    pub teacher: TeacherConfig<T>,
}

impl<T: Scalar> Default for ExperimentConfig<T> {
    fn default() -> Self {
        Self {
            strategy: Strategy::SgimD,
            total_movements: 5000,
            eval_period: 250,
            task_bounds: Rect::square(T::lit(1.3)),
            large_space: false,
            large_space_factor: T::lit(20.0),
            grid: [26, 16],
            seed: 0,
            min_hits: 3,
            reach_samples: 20_000,
            shakedown_movements: 5000,
            environment: EnvironmentConfig::default(),
            lowlevel: LowLevelConfig::default(),
            highlevel: HighLevelConfig::default(),
            teacher: TeacherConfig::default(),
        }
    }
}

impl<T: Scalar> ExperimentConfig<T> {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment configuration serializes")
    }

    /// Rectangle in which goals are generated.
    pub fn goal_bounds(&self) -> Rect<T> {
        if self.large_space {
            self.task_bounds.scaled_area(self.large_space_factor)
        } else {
            self.task_bounds
        }
    }

    pub fn grid(&self) -> Grid<T> {
        Grid::new(self.task_bounds, self.grid[0], self.grid[1])
    }

    /// Copy with every derived field filled in: the environment seed follows the run seed and
    /// the goal tree covers the goal bounds.
    pub fn resolved(&self) -> Self {
        let mut cfg = self.clone();
        cfg.environment.seed = self.seed;
        cfg.highlevel.task_bounds = self.goal_bounds();
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        if self.total_movements == 0 || self.eval_period == 0 {
            return Err(Error::Config("total_movements and eval_period must be positive".into()));
        }
        if !self.total_movements.is_multiple_of(self.eval_period) {
            return Err(Error::Config("eval_period must divide total_movements".into()));
        }
        if self.grid[0] == 0 || self.grid[1] == 0 || self.min_hits == 0 {
            return Err(Error::Config("grid and min_hits must be positive".into()));
        }
        if !(self.large_space_factor >= T::one()) {
            return Err(Error::Config("large_space_factor must be at least 1".into()));
        }
        Rect::new(self.task_bounds.min, self.task_bounds.max)?;
        let r = self.resolved();
        r.environment.validate()?;
        r.lowlevel.validate()?;
        r.highlevel.validate()?;
        r.teacher.validate()?;
        Ok(())
    }
}

/// Evaluation points, one per admitted cell of the benchmark grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Benchmark<T: Scalar> {
    pub points: Vec<TaskPoint<T>>,
    pub cells: Vec<usize>,
}

impl<T: Scalar> Benchmark<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// One `cell,y1,y2` line per point.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        for (c, p) in self.cells.iter().zip(&self.points) {
            writeln!(w, "{c},{},{}", fmt_num(p.y1), fmt_num(p.y2))?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let mut out = Benchmark {
            points: Vec::new(),
            cells: Vec::new(),
        };
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let err = || Error::Parse {
                line: lineno + 1,
                reason: format!("expected cell,y1,y2 in {line:?}"),
            };
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 3 {
                return Err(err());
            }
            let cell = f[0].trim().parse().map_err(|_| err())?;
            let y1 = parse_num(f[1]).ok_or_else(err)?;
            let y2 = parse_num(f[2]).ok_or_else(err)?;
            out.cells.push(cell);
            out.points.push(TaskPoint::try_new(y1, y2).map_err(|_| err())?);
        }
        Ok(out)
    }

    /// Fraction of `points` falling in an admitted cell.
    pub fn reachable_fraction(&self, grid: &Grid<T>, points: &[TaskPoint<T>]) -> f64 {
        if points.is_empty() {
            return 0.0;
        }
        let mut admitted = vec![false; grid.len()];
        for &c in &self.cells {
            admitted[c] = true;
        }
        let inside = points
            .iter()
            .filter(|p| grid.cell_of(p).is_some_and(|c| admitted[c]))
            .count();
        inside as f64 / points.len() as f64
    }
}

/// Estimates the reachable set from random actions plus a goal-babbling shakedown run, then
/// draws one uniform point in every grid cell holding at least `min_hits` reached points.
pub fn generate_benchmark<T: Scalar>(cfg: &ExperimentConfig<T>, seed: u64) -> Result<Benchmark<T>> {
    cfg.validate()?;
    let noiseless = cfg.environment.noiseless();
    let mut sampler = rng::stream(seed, rng::tag::REACHABILITY);
    let mut reached: Vec<TaskPoint<T>> = (0..cfg.reach_samples)
        .map(|_| simulate(&explore_action(&mut sampler), &noiseless).point)
        .collect();
    if cfg.shakedown_movements > 0 {
        let shakedown = ExperimentConfig {
            strategy: Strategy::SaggRiac,
            total_movements: cfg.shakedown_movements,
            eval_period: cfg.shakedown_movements,
            large_space: false,
            seed,
            ..cfg.clone()
        };
        let run = run_experiment(&shakedown, None, &[])?;
        reached.extend(run.memory.episodes().iter().map(|e| e.outcome));
    }
    let grid = cfg.grid();
    let counts = grid.counts(&reached);
    let mut placer = rng::stream(seed, rng::tag::BENCHMARK);
    let mut bench = Benchmark {
        points: Vec::new(),
        cells: Vec::new(),
    };
    for (cell, &n) in counts.iter().enumerate() {
        if n >= cfg.min_hits {
            bench.cells.push(cell);
            bench.points.push(uniform_in(&grid.cell_rect(cell), &mut placer));
        }
    }
    if bench.is_empty() {
        return Err(Error::EmptyReachable);
    }
    Ok(bench)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationRecord<T: Scalar> {
    pub movement_count: usize,
    pub mean_error: T,
    pub errors: Vec<T>,
}

/// Mean noiseless reaching error over the benchmark. Leaves memory untouched.
pub fn evaluate<T: Scalar>(
    mem: &EpisodicMemory<T>,
    env_cfg: &EnvironmentConfig<T>,
    benchmark: &[TaskPoint<T>],
    cfg: &LowLevelConfig<T>,
    movement_count: usize,
) -> Result<EvaluationRecord<T>> {
    if mem.is_empty() {
        return Err(Error::EmptyMemory);
    }
    let scratch = env_cfg.noiseless();
    let errors = benchmark
        .iter()
        .map(|goal| {
            let a = exploit_action(goal, mem, cfg)?;
            Ok(distance(goal, &simulate(&a, &scratch).point))
        })
        .collect::<Result<Vec<T>>>()?;
    let mean_error = if errors.is_empty() {
        T::zero()
    } else {
        errors.iter().copied().sum::<T>() / T::from_usize_lossy(errors.len())
    };
    Ok(EvaluationRecord {
        movement_count,
        mean_error,
        errors,
    })
}

/// Executions by origin. Demonstrations are produced by the teacher and cost no movement.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MovementTally {
    pub autonomous: usize,
    pub imitation: usize,
    pub demonstrations: usize,
}

impl MovementTally {
    pub fn movements(&self) -> usize {
        self.autonomous + self.imitation
    }
}

#[derive(Debug, Clone)]
pub struct RunArtifact<T: Scalar> {
    pub config: ExperimentConfig<T>,
    pub timeline: Vec<EvaluationRecord<T>>,
    pub memory: EpisodicMemory<T>,
    /// Self-generated goals in generation order.
    pub goals: Vec<TaskPoint<T>>,
    pub tally: MovementTally,
    pub tree: RegionTree<T>,
}

struct Runner<'a, T: Scalar> {
    cfg: ExperimentConfig<T>,
    benchmark: Option<&'a Benchmark<T>>,
    teaching: &'a [TeachingItem<T>],
    env: FishingEnv<T>,
    mem: EpisodicMemory<T>,
    tree: RegionTree<T>,
    lowlevel: LowLevel<T>,
    motor_rng: Rng,
    goal_rng: Rng,
    teacher_rng: Rng,
    imitation_rng: Rng,
    count: usize,
    timeline: Vec<EvaluationRecord<T>>,
    goals: Vec<TaskPoint<T>>,
    tally: MovementTally,
    /// Demonstration whose imitation phase is still running.
    pending: Option<(TeachingItem<T>, usize)>,
    last_demo: Option<TeachingItem<T>>,
}

impl<'a, T: Scalar> Runner<'a, T> {
    fn new(
        cfg: &ExperimentConfig<T>,
        benchmark: Option<&'a Benchmark<T>>,
        teaching: &'a [TeachingItem<T>],
    ) -> Result<Self> {
        cfg.validate()?;
        if cfg.strategy.uses_teacher() && teaching.is_empty() {
            return Err(Error::Config(format!("strategy {} needs a teaching set", cfg.strategy)));
        }
        let cfg = cfg.resolved();
        let env = FishingEnv::new(cfg.environment.clone())?;
        let ctx = SimilarityContext::new(env.rest_outcome());
        let goal_bounds = cfg.goal_bounds();
        for item in teaching {
            if !goal_bounds.contains(&item.y_demo) {
                return Err(Error::Config("demonstrated outcome outside the goal bounds".into()));
            }
        }
        Ok(Self {
            tree: RegionTree::new(cfg.highlevel.clone())?,
            lowlevel: LowLevel::new(cfg.lowlevel.clone(), ctx)?,
            env,
            mem: EpisodicMemory::new(),
            motor_rng: rng::stream(cfg.seed, rng::tag::REGIME),
            goal_rng: rng::stream(cfg.seed, rng::tag::GOALS),
            teacher_rng: rng::stream(cfg.seed, rng::tag::TEACHER),
            imitation_rng: rng::stream(cfg.seed, rng::tag::IMITATION),
            count: 0,
            timeline: Vec::new(),
            goals: Vec::new(),
            tally: MovementTally::default(),
            pending: None,
            last_demo: None,
            benchmark,
            teaching,
            cfg,
        })
    }

    /// Movements left before the next evaluation, demonstration or the end of the run.
    fn budget(&self) -> usize {
        let next_multiple = |p: usize| (self.count / p + 1) * p;
        let mut stop = self.cfg.total_movements.min(next_multiple(self.cfg.eval_period));
        if self.cfg.strategy.uses_teacher() {
            stop = stop.min(next_multiple(self.cfg.teacher.demo_period));
        }
        stop - self.count
    }

    fn run(mut self) -> Result<RunArtifact<T>> {
        while self.count < self.cfg.total_movements {
            let budget = self.budget();
            let used = self.act(budget)?;
            debug_assert!(used >= 1 && used <= budget);
            self.count += used;
            self.checkpoint()?;
        }
        debug_assert_eq!(self.tally.movements(), self.count);
        Ok(RunArtifact {
            config: self.cfg,
            timeline: self.timeline,
            memory: self.mem,
            goals: self.goals,
            tally: self.tally,
            tree: self.tree,
        })
    }

    /// Performs at most `budget` movements and returns how many were made.
    fn act(&mut self, budget: usize) -> Result<usize> {
        if let Some((item, left)) = self.pending.take() {
            let n = left.min(budget);
            self.imitate(&item, n)?;
            if left > n {
                self.pending = Some((item, left - n));
            }
            return Ok(n);
        }
        match self.cfg.strategy {
            Strategy::Random => {
                let a = explore_action(&mut self.motor_rng);
                let landing = self.env.execute(&a);
                self.mem.record(a, landing.point, Origin::Autonomous);
                self.tally.autonomous += 1;
                Ok(1)
            }
            Strategy::SaggRiac | Strategy::SgimD => {
                let goal = self.tree.sample_goal(&mut self.goal_rng);
                self.goals.push(goal);
                let report = self.lowlevel.reach_goal_within(
                    &goal,
                    &mut self.env,
                    &mut self.mem,
                    &mut self.motor_rng,
                    budget,
                )?;
                let eps = self.tree.config().eps_sim;
                for attempt in &report.attempts {
                    let c = competence(sim(&goal, &attempt.outcome, &self.lowlevel.ctx), eps)?;
                    self.tree.record_attempt(goal, c)?;
                }
                self.tally.autonomous += report.attempts.len();
                Ok(report.attempts.len())
            }
            Strategy::DemoOnly => match self.last_demo {
                Some(item) => {
                    self.imitate(&item, budget)?;
                    Ok(budget)
                }
                // Nothing has been demonstrated yet.
                None => {
                    let a = explore_action(&mut self.motor_rng);
                    let landing = self.env.execute(&a);
                    self.mem.record(a, landing.point, Origin::Autonomous);
                    self.tally.autonomous += 1;
                    Ok(1)
                }
            },
        }
    }

    fn imitate(&mut self, item: &TeachingItem<T>, trials: usize) -> Result<()> {
        let done = imitate_demo(
            item,
            &self.lowlevel,
            &mut self.env,
            &mut self.mem,
            &mut self.tree,
            &mut self.imitation_rng,
            trials,
        )?;
        self.tally.imitation += done.len();
        Ok(())
    }

    fn checkpoint(&mut self) -> Result<()> {
        if self.count.is_multiple_of(self.cfg.eval_period) {
            if let Some(bench) = self.benchmark {
                let rec = evaluate(
                    &self.mem,
                    &self.cfg.environment,
                    &bench.points,
                    &self.cfg.lowlevel,
                    self.count,
                )?;
                self.timeline.push(rec);
            }
        }
        if self.cfg.strategy.uses_teacher() && interaction_due(self.count, self.cfg.teacher.demo_period) {
            let item = *next_demo(self.teaching, &self.mem, &self.cfg.teacher, &mut self.teacher_rng);
            emulate(&item, &mut self.mem, &mut self.tree)?;
            self.tally.demonstrations += 1;
            self.last_demo = Some(item);
            // A demonstration at the very end is still registered; its imitation has no budget left.
            if self.count < self.cfg.total_movements {
                self.pending = Some((item, self.cfg.lowlevel.imitation_trials));
            }
        }
        Ok(())
    }
}

/// Runs one experiment. Evaluation is skipped when no benchmark is given.
pub fn run_experiment<T: Scalar>(
    cfg: &ExperimentConfig<T>,
    benchmark: Option<&Benchmark<T>>,
    teaching: &[TeachingItem<T>],
) -> Result<RunArtifact<T>> {
    Runner::new(cfg, benchmark, teaching)?.run()
}

/// Counts per grid cell, returned row-major.
pub fn export_histograms<T: Scalar>(points: &[TaskPoint<T>], grid: &Grid<T>) -> Vec<usize> {
    grid.counts(points)
}

/// Writes the cell counts as `rows` lines of `cols` comma-separated values, lowest row first.
pub fn write_histogram<T: Scalar, W: Write>(counts: &[usize], grid: &Grid<T>, mut w: W) -> Result<()> {
    for row in counts.chunks(grid.cols) {
        let line: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn occupied_cells<T: Scalar>(points: &[TaskPoint<T>], grid: &Grid<T>) -> usize {
    grid.counts(points).iter().filter(|&&c| c > 0).count()
}

pub fn write_points<T: Scalar, W: Write>(points: &[TaskPoint<T>], mut w: W) -> Result<()> {
    for p in points {
        writeln!(w, "{},{}", fmt_num(p.y1), fmt_num(p.y2))?;
    }
    Ok(())
}

pub fn read_points<T: Scalar, R: BufRead>(r: R) -> Result<Vec<TaskPoint<T>>> {
    let mut out = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let err = || Error::Parse {
            line: lineno + 1,
            reason: format!("expected y1,y2 in {line:?}"),
        };
        let (a, b) = line.split_once(',').ok_or_else(err)?;
        out.push(TaskPoint::try_new(parse_num(a).ok_or_else(err)?, parse_num(b).ok_or_else(err)?).map_err(|_| err())?);
    }
    Ok(out)
}

pub fn write_timeline<T: Scalar, W: Write>(timeline: &[EvaluationRecord<T>], mut w: W) -> Result<()> {
    for rec in timeline {
        writeln!(w, "{},{}", rec.movement_count, fmt_num(rec.mean_error))?;
    }
    Ok(())
}

pub fn read_timeline<R: BufRead>(r: R) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let err = || Error::Parse {
            line: lineno + 1,
            reason: format!("expected movement_count,mean_error in {line:?}"),
        };
        let (a, b) = line.split_once(',').ok_or_else(err)?;
        out.push((a.trim().parse().map_err(|_| err())?, parse_num(b).ok_or_else(err)?));
    }
    Ok(out)
}

#[derive(Serialize)]
struct Meta<'a, T: Scalar> {
    version: &'a str,
    movements: usize,
    autonomous_movements: usize,
    imitation_movements: usize,
    demonstrations: usize,
    memory_size: usize,
    goals: usize,
    evaluations: usize,
    config: &'a ExperimentConfig<T>,
}

pub const TIMELINE_FILE: &str = "timeline.csv";
pub const MEMORY_FILE: &str = "memory.csv";
pub const GOALS_FILE: &str = "goals.csv";
pub const META_FILE: &str = "meta.toml";
pub const TREE_FILE: &str = "regions.csv";

impl<T: Scalar> RunArtifact<T> {
    /// Writes `timeline.csv`, `memory.csv`, `goals.csv`, `regions.csv` and `meta.toml` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let create =
            |name: &str| -> Result<BufWriter<fs::File>> { Ok(BufWriter::new(fs::File::create(dir.join(name))?)) };
        write_timeline(&self.timeline, create(TIMELINE_FILE)?)?;
        self.memory.dump(create(MEMORY_FILE)?)?;
        write_points(&self.goals, create(GOALS_FILE)?)?;
        self.tree.export_snapshot(create(TREE_FILE)?)?;
        let meta = Meta {
            version: VERSION,
            movements: self.tally.movements(),
            autonomous_movements: self.tally.autonomous,
            imitation_movements: self.tally.imitation,
            demonstrations: self.tally.demonstrations,
            memory_size: self.memory.len(),
            goals: self.goals.len(),
            evaluations: self.timeline.len(),
            config: &self.config,
        };
        let text = toml::to_string(&meta).map_err(|e| Error::Config(e.to_string()))?;
        fs::write(dir.join(META_FILE), text)?;
        Ok(())
    }

    pub fn final_error(&self) -> Option<T> {
        self.timeline.last().map(|r| r.mean_error)
    }
}

/// Mean and sample standard deviation of the timelines at each evaluation tick.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub movement_count: usize,
    pub mean: f64,
    pub std: f64,
    pub runs: usize,
}

pub fn aggregate_timelines(timelines: &[Vec<(usize, f64)>]) -> Result<Vec<ReportRow>> {
    let Some(first) = timelines.first() else {
        return Ok(Vec::new());
    };
    for t in timelines {
        if t.len() != first.len() || t.iter().zip(first).any(|(a, b)| a.0 != b.0) {
            return Err(Error::Config("timelines have different evaluation ticks".into()));
        }
    }
    Ok((0..first.len())
        .map(|i| {
            let vals: Vec<f64> = timelines.iter().map(|t| t[i].1).collect();
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let std = if vals.len() > 1 {
                (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            ReportRow {
                movement_count: first[i].0,
                mean,
                std,
                runs: vals.len(),
            }
        })
        .collect())
}

pub fn write_report<W: Write>(rows: &[ReportRow], mut w: W) -> Result<()> {
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            r.movement_count,
            fmt_num(r.mean),
            fmt_num(r.std),
            r.runs
        )?;
    }
    Ok(())
}

pub fn read_timeline_file(path: &Path) -> Result<Vec<(usize, f64)>> {
    read_timeline(BufReader::new(fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::social::build_teaching_set;
    use crate::space::Action;

    fn quick(strategy: Strategy, total: usize) -> ExperimentConfig<f64> {
        ExperimentConfig {
            strategy,
            total_movements: total,
            eval_period: total,
            seed: 7,
            ..Default::default()
        }
    }

    fn tiny_teaching() -> Vec<TeachingItem<f64>> {
        let env = EnvironmentConfig::default();
        let cfg = TeacherConfig {
            teaching_set_size: 4,
            reach_samples: 400,
            candidate_pool_size: 3,
            repeats_per_candidate: 3,
            ..Default::default()
        };
        build_teaching_set(&env, &cfg, &Rect::square(1.3), 99).unwrap()
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.as_str().parse::<Strategy>().unwrap(), s);
        }
        assert!("greedy".parse::<Strategy>().is_err());
    }

    #[test]
    fn config_rejects_non_dividing_eval_period() {
        let cfg = ExperimentConfig::<f64> {
            eval_period: 300,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = ExperimentConfig::<f64> {
            strategy: Strategy::DemoOnly,
            seed: 42,
            large_space: true,
            ..Default::default()
        };
        let back = ExperimentConfig::<f64>::from_toml_str(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        let partial =
            ExperimentConfig::<f64>::from_toml_str("strategy = \"random\"\n[lowlevel]\nalpha = 0.25\n").unwrap();
        assert_eq!(partial.strategy, Strategy::Random);
        assert_eq!(partial.lowlevel.alpha, 0.25);
        assert_eq!(partial.lowlevel.k_max, 5);
        assert!(ExperimentConfig::<f64>::from_toml_str("bogus = 1\n").is_err());
    }

    #[test]
    fn random_run_fills_memory_exactly() {
        let run = run_experiment(&quick(Strategy::Random, 100), None, &[]).unwrap();
        assert_eq!(run.memory.len(), 100);
        assert!(run.goals.is_empty());
        assert_eq!(run.tally.autonomous, 100);
    }

    #[test]
    fn sgim_accounting() {
        let teaching = tiny_teaching();
        let cfg = ExperimentConfig {
            teacher: TeacherConfig {
                demo_period: 40,
                ..Default::default()
            },
            ..quick(Strategy::SgimD, 200)
        };
        let run = run_experiment(&cfg, None, &teaching).unwrap();
        assert_eq!(run.tally.demonstrations, 5);
        assert_eq!(run.tally.movements(), 200);
        // The final demonstration at movement 200 is emulated without imitation.
        assert_eq!(run.tally.imitation, 4 * 5);
        assert_eq!(run.memory.len(), 200 + 5);
        let demos = run
            .memory
            .episodes()
            .iter()
            .filter(|e| e.origin == Origin::Demonstration)
            .count();
        assert_eq!(demos, 5);
    }

    #[test]
    fn teacher_strategies_need_a_teaching_set() {
        assert!(run_experiment(&quick(Strategy::SgimD, 100), None, &[]).is_err());
        assert!(run_experiment(&quick(Strategy::DemoOnly, 100), None, &[]).is_err());
    }

    #[test]
    fn demo_only_imitates_after_first_demo() {
        let teaching = tiny_teaching();
        let cfg = ExperimentConfig {
            teacher: TeacherConfig {
                demo_period: 30,
                ..Default::default()
            },
            ..quick(Strategy::DemoOnly, 90)
        };
        let run = run_experiment(&cfg, None, &teaching).unwrap();
        assert_eq!(run.tally.demonstrations, 3);
        assert_eq!(run.tally.autonomous, 30);
        assert_eq!(run.tally.imitation, 60);
    }

    #[test]
    fn evaluation_with_exact_exemplars_is_zero_and_pure() {
        let env = EnvironmentConfig::<f64>::default();
        let mut mem = EpisodicMemory::new();
        let mut r = rng::stream(1, rng::tag::EXPLORE);
        let mut bench = Vec::new();
        for _ in 0..20 {
            let a: Action<f64> = explore_action(&mut r);
            let y = simulate(&a, &env.noiseless()).point;
            mem.record(a, y, Origin::Autonomous);
            bench.push(y);
        }
        let cfg = LowLevelConfig {
            k_max: 1,
            ..Default::default()
        };
        let before = mem.fingerprint();
        let rec = evaluate(&mem, &env, &bench, &cfg, 0).unwrap();
        assert_eq!(rec.mean_error, 0.0);
        assert_eq!(mem.fingerprint(), before);
        assert_eq!(mem.len(), 20);
    }

    #[test]
    fn evaluation_needs_memory() {
        let env = EnvironmentConfig::<f64>::default();
        let mem = EpisodicMemory::new();
        assert!(evaluate(&mem, &env, &[TaskPoint::new(0.0, 0.0)], &LowLevelConfig::default(), 0).is_err());
    }

    #[test]
    fn histogram_examples() {
        let grid = ExperimentConfig::<f64>::default().grid();
        let counts = export_histograms::<f64>(&[], &grid);
        assert_eq!(counts.len(), 416);
        assert!(counts.iter().all(|&c| c == 0));
        let counts = export_histograms(&[TaskPoint::new(0.3, -0.2)], &grid);
        assert_eq!(counts.iter().filter(|&&c| c > 0).count(), 1);
        let pts: Vec<TaskPoint<f64>> = (0..50).map(|i| TaskPoint::new(-1.2 + 0.05 * i as f64, 0.1)).collect();
        assert_eq!(export_histograms(&pts, &grid).iter().sum::<usize>(), 50);
        let mut buf = Vec::new();
        write_histogram(&export_histograms(&pts, &grid), &grid, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 16);
        assert!(text.lines().all(|l| l.split(',').count() == 26));
    }

    #[test]
    fn benchmark_cells_hold_their_points() {
        let cfg = ExperimentConfig::<f64> {
            reach_samples: 3000,
            shakedown_movements: 200,
            ..Default::default()
        };
        let bench = generate_benchmark(&cfg, 1000).unwrap();
        let grid = cfg.grid();
        assert!(bench.len() <= 416);
        for (p, &c) in bench.points.iter().zip(&bench.cells) {
            assert_eq!(grid.cell_of(p), Some(c));
        }
        let mut buf = Vec::new();
        bench.write(&mut buf).unwrap();
        let back = Benchmark::<f64>::read(buf.as_slice()).unwrap();
        assert_eq!(back.cells, bench.cells);
        assert_eq!(bench.reachable_fraction(&grid, &bench.points), 1.0);
    }

    #[test]
    fn aggregate_mean_std() {
        let rows = aggregate_timelines(&[vec![(250, 1.0), (500, 0.5)], vec![(250, 3.0), (500, 0.5)]]).unwrap();
        assert_eq!(rows[0].mean, 2.0);
        assert!((rows[0].std - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(rows[1].std, 0.0);
        assert!(aggregate_timelines(&[vec![(250, 1.0)], vec![(300, 1.0)]]).is_err());
    }
}
