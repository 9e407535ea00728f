//! Goal-directed low level: memory-based inverse model with an exploration fallback, plus the
//! imitation behaviour.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::env::FishingEnv;
use crate::error::{Error, Result};
use crate::memory::{outcome_variance, EpisodicMemory};
use crate::rng::Rng;
use crate::scalar::Scalar;
use crate::similarity::{distance, sim, SimilarityContext};
use crate::space::{Action, Episode, Origin, TaskPoint, ACTION_DIM};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
#[serde(default, deny_unknown_fields)]
pub struct LowLevelConfig<T: Scalar> {
    /// Task-space neighbours of the goal considered as anchors.
    pub l_max: usize,
    /// Action-space neighbours forming each anchor's locality.
    pub k_max: usize,
    /// Weight of the locality's outcome variance in the reliability score.
    pub alpha: T,
    pub attempts_per_goal: usize,
    /// Distance to the closest known outcome at which exploration becomes certain.
    pub d_norm: T,
    pub imitation_trials: usize,
    /// Per-component bound of the imitation perturbation.
    pub imitation_eps: T,
}

impl<T: Scalar> Default for LowLevelConfig<T> {
    fn default() -> Self {
        Self {
            l_max: 10,
            k_max: 5,
            alpha: T::lit(0.5),
            attempts_per_goal: 5,
            d_norm: T::lit(2.0),
            imitation_trials: 5,
            imitation_eps: T::lit(0.05),
        }
    }
}

impl<T: Scalar> LowLevelConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.l_max == 0 || self.k_max == 0 || self.attempts_per_goal == 0 || self.imitation_trials == 0 {
            return Err(Error::Config("low-level counts must be positive".into()));
        }
        if !(self.alpha > T::zero()) || !self.alpha.is_finite() {
            return Err(Error::Config("alpha must be positive and finite".into()));
        }
        if !(self.d_norm > T::zero()) || !self.d_norm.is_finite() {
            return Err(Error::Config("d_norm must be positive and finite".into()));
        }
        if !(self.imitation_eps > T::zero()) || !self.imitation_eps.is_finite() {
            return Err(Error::Config("imitation_eps must be positive and finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Explore,
    Exploit,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Explore => "explore",
            Regime::Exploit => "exploit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Attempt<T: Scalar> {
    pub action: Action<T>,
    pub outcome: TaskPoint<T>,
    pub regime: Regime,
    pub timed_out: bool,
}

/// Feedback of one goal-reaching episode to the higher level.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachReport<T: Scalar> {
    pub goal: TaskPoint<T>,
    pub attempts: Vec<Attempt<T>>,
    pub best_sim: T,
    pub final_outcome: TaskPoint<T>,
}

/// Intermediate products of the inverse-model interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct ExploitPlan<T: Scalar> {
    /// Episode index of the most reliable anchor.
    pub best: usize,
    /// Reliability score of every anchor, in task-space neighbour order: `(episode, score)`.
    pub reliabilities: Vec<(usize, T)>,
    /// Episode indices of the interpolated locality.
    pub locality: Vec<usize>,
    pub weights: Vec<T>,
    pub action: Action<T>,
}

/// Normalized Gaussian weights over distances.
///
/// The kernel width is the mean distance (floored at 1e-6), so the weights depend only on the
/// relative spread of the neighbours.
pub fn interpolation_weights<T: Scalar>(distances: &[T]) -> Vec<T> {
    if distances.is_empty() {
        return Vec::new();
    }
    let n = T::from_usize_lossy(distances.len());
    let sigma = (distances.iter().copied().sum::<T>() / n).max(T::lit(1e-6));
    let two_var = T::lit(2.0) * sigma * sigma;
    let d_min = distances.iter().copied().fold(T::infinity(), T::min);
    // Shifting by the nearest distance leaves the normalized weights unchanged.
    let raw: Vec<T> = distances
        .iter()
        .map(|&d| (-(d * d - d_min * d_min) / two_var).exp())
        .collect();
    let total = raw.iter().copied().sum::<T>();
    raw.into_iter().map(|w| w / total).collect()
}

pub fn exploit_plan<T: Scalar>(
    y_g: &TaskPoint<T>,
    mem: &EpisodicMemory<T>,
    cfg: &LowLevelConfig<T>,
) -> Result<ExploitPlan<T>> {
    let anchors = mem.knn_task(y_g, cfg.l_max)?;
    let mut reliabilities = Vec::with_capacity(anchors.len());
    let mut best: Option<(T, usize, Vec<&Episode<T>>)> = None;
    for anchor in anchors {
        let locality = mem.knn_action(&anchor.action, cfg.k_max)?;
        let score = distance(&anchor.outcome, y_g) + cfg.alpha * outcome_variance(&locality)?;
        reliabilities.push((anchor.index, score));
        let better = match &best {
            None => true,
            Some((s, idx, _)) => score < *s || (score == *s && anchor.index < *idx),
        };
        if better {
            best = Some((score, anchor.index, locality));
        }
    }
    let (_, best, locality) = best.ok_or(Error::EmptyMemory)?;
    let distances: Vec<T> = locality.iter().map(|e| distance(&e.outcome, y_g)).collect();
    let weights = interpolation_weights(&distances);
    let mut blended = [T::zero(); ACTION_DIM];
    for (e, &w) in locality.iter().zip(&weights) {
        for (out, &v) in blended.iter_mut().zip(e.action.params()) {
            *out = *out + w * v;
        }
    }
    Ok(ExploitPlan {
        best,
        reliabilities,
        locality: locality.iter().map(|e| e.index).collect(),
        weights,
        action: Action::clamped(blended),
    })
}

/// Inverse-model estimate for `y_g` interpolated from the most reliable memory locality.
pub fn exploit_action<T: Scalar>(
    y_g: &TaskPoint<T>,
    mem: &EpisodicMemory<T>,
    cfg: &LowLevelConfig<T>,
) -> Result<Action<T>> {
    exploit_plan(y_g, mem, cfg).map(|p| p.action)
}

/// Uniform random motor command.
pub fn explore_action<T: Scalar>(rng: &mut Rng) -> Action<T> {
    Action::clamped(std::array::from_fn(|_| T::lit(rng.random_range(-1.0..=1.0))))
}

/// Explores with probability proportional to the distance from the goal to the closest
/// reached outcome, saturating at `d_norm`.
pub fn choose_regime<T: Scalar>(
    y_g: &TaskPoint<T>,
    mem: &EpisodicMemory<T>,
    cfg: &LowLevelConfig<T>,
    rng: &mut Rng,
) -> Regime {
    let Ok(closest) = mem.knn_task(y_g, 1) else {
        return Regime::Explore;
    };
    let p_explore = (distance(&closest[0].outcome, y_g) / cfg.d_norm).min(T::one());
    let u = T::lit(rng.random::<f64>());
    if u < p_explore {
        Regime::Explore
    } else {
        Regime::Exploit
    }
}

/// Low-level learner bound to its configuration and the fixed similarity context.
#[derive(Debug, Clone)]
pub struct LowLevel<T: Scalar> {
    pub cfg: LowLevelConfig<T>,
    pub ctx: SimilarityContext<T>,
}

impl<T: Scalar> LowLevel<T> {
    pub fn new(cfg: LowLevelConfig<T>, ctx: SimilarityContext<T>) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg, ctx })
    }

    pub fn reach_goal(
        &self,
        y_g: &TaskPoint<T>,
        env: &mut FishingEnv<T>,
        mem: &mut EpisodicMemory<T>,
        rng: &mut Rng,
    ) -> Result<ReachReport<T>> {
        self.reach_goal_within(y_g, env, mem, rng, self.cfg.attempts_per_goal)
    }

    /// As [`reach_goal`](Self::reach_goal) with at most `budget` attempts (at least one).
    pub fn reach_goal_within(
        &self,
        y_g: &TaskPoint<T>,
        env: &mut FishingEnv<T>,
        mem: &mut EpisodicMemory<T>,
        rng: &mut Rng,
        budget: usize,
    ) -> Result<ReachReport<T>> {
        let n = budget.clamp(1, self.cfg.attempts_per_goal);
        let mut attempts = Vec::with_capacity(n);
        let mut best_sim = -T::infinity();
        for _ in 0..n {
            let regime = choose_regime(y_g, mem, &self.cfg, rng);
            let action = match regime {
                Regime::Explore => explore_action(rng),
                Regime::Exploit => exploit_action(y_g, mem, &self.cfg)?,
            };
            let landing = env.execute(&action);
            mem.record(action, landing.point, Origin::Autonomous);
            best_sim = best_sim.max(sim(y_g, &landing.point, &self.ctx));
            attempts.push(Attempt {
                action,
                outcome: landing.point,
                regime,
                timed_out: landing.timed_out,
            });
        }
        let final_outcome = attempts[attempts.len() - 1].outcome;
        Ok(ReachReport {
            goal: *y_g,
            attempts,
            best_sim,
            final_outcome,
        })
    }

    /// Replays `a_demo` with small uniform perturbations, memorising each trial.
    pub fn imitate(
        &self,
        a_demo: &Action<T>,
        env: &mut FishingEnv<T>,
        mem: &mut EpisodicMemory<T>,
        rng: &mut Rng,
    ) -> Vec<Episode<T>> {
        self.imitate_n(a_demo, env, mem, rng, self.cfg.imitation_trials)
    }

    pub fn imitate_n(
        &self,
        a_demo: &Action<T>,
        env: &mut FishingEnv<T>,
        mem: &mut EpisodicMemory<T>,
        rng: &mut Rng,
        trials: usize,
    ) -> Vec<Episode<T>> {
        let eps = self.cfg.imitation_eps.to_f64_lossy();
        (0..trials)
            .map(|_| {
                let base = a_demo.params();
                let perturbed: [T; ACTION_DIM] = std::array::from_fn(|i| base[i] + T::lit(rng.random_range(-eps..eps)));
                let action = Action::clamped(perturbed);
                let landing = env.execute(&action);
                let index = mem.record(action, landing.point, Origin::Imitation);
                mem.episodes()[index]
            })
            .collect()
    }
}
