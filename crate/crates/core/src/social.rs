//! Scripted teacher: offline teaching-set construction, demonstration scheduling, and the
//! learner's two reactions to a demonstration (emulation and imitation).

use std::io::{BufRead, Write};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::env::{simulate, EnvironmentConfig, FishingEnv};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::highlevel::RegionTree;
use crate::lowlevel::{explore_action, LowLevel};
use crate::memory::{outcome_variance, parse_episode_line, write_episode_line, EpisodicMemory};
use crate::rng::{self, Rng};
use crate::scalar::Scalar;
use crate::similarity::{competence, distance, sim};
use crate::space::{Action, Episode, Origin, Rect, TaskPoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
#[serde(default, deny_unknown_fields)]
pub struct TeacherConfig<T: Scalar> {
    /// Movements between two demonstrations.
    pub demo_period: usize,
    pub teaching_set_size: usize,
    /// Noisy executions used to score a candidate's reproducibility.
    pub repeats_per_candidate: usize,
    /// Candidate actions kept per cell.
    pub candidate_pool_size: usize,
    /// A demonstration counts as reached once memory holds an outcome this close to it.
    pub reached_tolerance: T,
    /// Random actions executed to map the reachable region.
    pub reach_samples: usize,
    /// Teaching cells `[cols, rows]` over the task bounds.
    pub grid: [usize; 2],
}

impl<T: Scalar> Default for TeacherConfig<T> {
    fn default() -> Self {
        Self {
            demo_period: 150,
            teaching_set_size: 27,
            repeats_per_candidate: 10,
            candidate_pool_size: 50,
            reached_tolerance: T::lit(0.1),
            reach_samples: 20_000,
            grid: [8, 8],
        }
    }
}

impl<T: Scalar> TeacherConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            self.demo_period,
            self.teaching_set_size,
            self.repeats_per_candidate,
            self.candidate_pool_size,
            self.reach_samples,
            self.grid[0],
            self.grid[1],
        ];
        if counts.contains(&0) {
            return Err(Error::Config("teacher counts must be positive".into()));
        }
        if !(self.reached_tolerance > T::zero()) {
            return Err(Error::Config("reached_tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// One demonstration pair and the teaching cell it stands for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TeachingItem<T: Scalar> {
    pub a_demo: Action<T>,
    pub y_demo: TaskPoint<T>,
    pub cell: usize,
}

type Sample<T> = (Action<T>, TaskPoint<T>);

/// Builds the teaching set offline.
///
/// The reachable region is mapped with noiseless random actions; the most populated teaching
/// cells are kept. In each kept cell, the candidate actions landing there are replayed with
/// noise and the one with the smallest outcome variance becomes the demonstration, paired with
/// its noiseless outcome.
pub fn build_teaching_set<T: Scalar>(
    env_cfg: &EnvironmentConfig<T>,
    cfg: &TeacherConfig<T>,
    bounds: &Rect<T>,
    seed: u64,
) -> Result<Vec<TeachingItem<T>>> {
    cfg.validate()?;
    let noiseless = env_cfg.noiseless();
    noiseless.validate()?;
    let grid = Grid::new(*bounds, cfg.grid[0], cfg.grid[1]);
    let mut sampler = rng::stream(seed, rng::tag::TEACHING_SET);
    let samples: Vec<(Action<T>, TaskPoint<T>)> = (0..cfg.reach_samples)
        .map(|_| {
            let a = explore_action(&mut sampler);
            (a, simulate(&a, &noiseless).point)
        })
        .collect();

    let counts = grid.counts(samples.iter().map(|(_, y)| y));
    let mut ranked: Vec<usize> = (0..grid.len()).filter(|&c| counts[c] > 0).collect();
    ranked.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));

    let mut repeater = FishingEnv::new(EnvironmentConfig {
        seed,
        ..env_cfg.clone()
    })?;
    let mut items = Vec::with_capacity(cfg.teaching_set_size);
    for cell in ranked {
        if items.len() == cfg.teaching_set_size {
            break;
        }
        let candidates: Vec<&Sample<T>> = samples
            .iter()
            .filter(|(_, y)| grid.cell_of(y) == Some(cell))
            .take(cfg.candidate_pool_size)
            .collect();
        let mut best: Option<(T, &Sample<T>)> = None;
        for cand in candidates {
            let trials: Vec<Episode<T>> = (0..cfg.repeats_per_candidate)
                .map(|_| Episode::new(cand.0, repeater.execute(&cand.0).point, Origin::Demonstration))
                .collect();
            let refs: Vec<&Episode<T>> = trials.iter().collect();
            let var = outcome_variance(&refs)?;
            if best.is_none_or(|(v, _)| var < v) {
                best = Some((var, cand));
            }
        }
        if let Some((_, &(a_demo, y_demo))) = best {
            items.push(TeachingItem { a_demo, y_demo, cell });
        }
    }
    if items.len() < cfg.teaching_set_size {
        return Err(Error::TeachingSetInfeasible {
            found: items.len(),
            wanted: cfg.teaching_set_size,
        });
    }
    Ok(items)
}

/// Picks a random demonstration among those not yet reached, or among all once every
/// demonstration has been reached.
pub fn next_demo<'a, T: Scalar>(
    items: &'a [TeachingItem<T>],
    mem: &EpisodicMemory<T>,
    cfg: &TeacherConfig<T>,
    rng: &mut Rng,
) -> &'a TeachingItem<T> {
    assert!(!items.is_empty(), "teaching set is empty");
    let unreached: Vec<&TeachingItem<T>> = items
        .iter()
        .filter(|it| match mem.knn_task(&it.y_demo, 1) {
            Ok(hit) => distance(&hit[0].outcome, &it.y_demo) > cfg.reached_tolerance,
            Err(_) => true,
        })
        .collect();
    if unreached.is_empty() {
        &items[rng.random_range(0..items.len())]
    } else {
        unreached[rng.random_range(0..unreached.len())]
    }
}

pub fn interaction_due(movement_count: usize, demo_period: usize) -> bool {
    movement_count > 0 && movement_count.is_multiple_of(demo_period)
}

/// Emulation: the demonstration joins memory as an exemplar and the goal tree as a reached goal.
pub fn emulate<T: Scalar>(
    item: &TeachingItem<T>,
    mem: &mut EpisodicMemory<T>,
    tree: &mut RegionTree<T>,
) -> Result<usize> {
    let index = mem.record(item.a_demo, item.y_demo, Origin::Demonstration);
    tree.record_attempt(item.y_demo, T::zero())?;
    Ok(index)
}

/// Imitation: `trials` perturbed replays of the demonstrated action, each scored against the
/// demonstrated outcome in the goal tree.
pub fn imitate_demo<T: Scalar>(
    item: &TeachingItem<T>,
    lowlevel: &LowLevel<T>,
    env: &mut FishingEnv<T>,
    mem: &mut EpisodicMemory<T>,
    tree: &mut RegionTree<T>,
    rng: &mut Rng,
    trials: usize,
) -> Result<Vec<Episode<T>>> {
    let episodes = lowlevel.imitate_n(&item.a_demo, env, mem, rng, trials);
    let eps = tree.config().eps_sim;
    for e in &episodes {
        let c = competence(sim(&item.y_demo, &e.outcome, &lowlevel.ctx), eps)?;
        tree.record_attempt(item.y_demo, c)?;
    }
    Ok(episodes)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoReport<T: Scalar> {
    pub emulated: usize,
    pub imitations: Vec<Episode<T>>,
}

pub fn apply_demonstration<T: Scalar>(
    item: &TeachingItem<T>,
    mem: &mut EpisodicMemory<T>,
    lowlevel: &LowLevel<T>,
    tree: &mut RegionTree<T>,
    env: &mut FishingEnv<T>,
    rng: &mut Rng,
) -> Result<DemoReport<T>> {
    let emulated = emulate(item, mem, tree)?;
    let imitations = imitate_demo(item, lowlevel, env, mem, tree, rng, lowlevel.cfg.imitation_trials)?;
    Ok(DemoReport { emulated, imitations })
}

/// Same line format as memory dumps, with the cell id in place of the origin tag.
pub fn write_teaching_set<T: Scalar, W: Write>(items: &[TeachingItem<T>], mut w: W) -> Result<()> {
    for (i, it) in items.iter().enumerate() {
        write_episode_line(&mut w, i, &it.cell.to_string(), it.a_demo.params(), &it.y_demo)?;
    }
    Ok(())
}

pub fn read_teaching_set<T: Scalar, R: BufRead>(r: R) -> Result<Vec<TeachingItem<T>>> {
    let mut items = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = parse_episode_line::<T>(&line, lineno + 1)?;
        let cell = row.tag.parse().map_err(|_| Error::Parse {
            line: lineno + 1,
            reason: format!("bad cell id {:?}", row.tag),
        })?;
        items.push(TeachingItem {
            a_demo: row.action,
            y_demo: row.outcome,
            cell,
        });
    }
    Ok(items)
}
