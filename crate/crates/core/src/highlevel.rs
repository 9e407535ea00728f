//! Higher level of active learning: a region tree over task space whose leaves track the
//! competence of the goals attempted inside them, split to separate areas of differing
//! competence progress, and sampled to self-generate new goals.

use std::io::Write;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::fmt_num;
use crate::rng::Rng;
use crate::scalar::Scalar;
use crate::similarity::DEFAULT_EPS_SIM;
use crate::space::{Rect, TaskPoint};

/// Additive term on each leaf's interest when choosing leaves by interest.
pub const INTEREST_SMOOTHING: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
#[serde(default, deny_unknown_fields)]
pub struct HighLevelConfig<T: Scalar> {
    /// Sliding window length, in goals.
    pub zeta: usize,
    /// Leaf capacity before a split.
    pub g_max: usize,
    /// Probabilities of: interest-proportional leaf, uniform leaf, uniform point in the bounds.
    pub mode_probs: [T; 3],
    /// Candidate thresholds per axis.
    pub split_candidates: usize,
    /// Root rectangle; experiments resolve it from their own task bounds.
    #[serde(skip)]
    pub task_bounds: Rect<T>,
    /// Similarity above which an attempt counts as a full success.
    pub eps_sim: T,
}

impl<T: Scalar> Default for HighLevelConfig<T> {
    fn default() -> Self {
        Self {
            zeta: 20,
            g_max: 40,
            mode_probs: [T::lit(0.7), T::lit(0.2), T::lit(0.1)],
            split_candidates: 5,
            task_bounds: Rect::square(T::lit(1.3)),
            eps_sim: T::lit(DEFAULT_EPS_SIM),
        }
    }
}

impl<T: Scalar> HighLevelConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.zeta == 0 || !self.zeta.is_multiple_of(2) {
            return Err(Error::Config("zeta must be even and positive".into()));
        }
        if self.g_max == 0 || self.split_candidates == 0 {
            return Err(Error::Config("g_max and split_candidates must be positive".into()));
        }
        if self.mode_probs.iter().any(|p| !(*p >= T::zero())) {
            return Err(Error::Config("mode probabilities must be nonnegative".into()));
        }
        let total: T = self.mode_probs.iter().copied().sum();
        if (total - T::one()).abs() > T::lit(1e-12).max(T::epsilon() * T::lit(4.0)) {
            return Err(Error::Config("mode probabilities must sum to 1".into()));
        }
        if !(self.eps_sim < T::zero()) {
            return Err(Error::Config("eps_sim must be negative".into()));
        }
        Rect::new(self.task_bounds.min, self.task_bounds.max)?;
        Ok(())
    }
}

/// One attempt routed to a region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoalRecord<T: Scalar> {
    pub goal: TaskPoint<T>,
    pub competence: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec<T: Scalar> {
    pub axis: usize,
    pub threshold: T,
}

impl<T: Scalar> SplitSpec<T> {
    /// Points on the threshold belong to the lower child.
    pub fn goes_left(&self, p: &TaskPoint<T>) -> bool {
        p.coords()[self.axis] <= self.threshold
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Region<T: Scalar> {
    pub bounds: Rect<T>,
    /// Attempts in time order. Frozen once the region is split.
    pub history: Vec<GoalRecord<T>>,
    pub children: Option<[usize; 2]>,
    pub split: Option<SplitSpec<T>>,
}

impl<T: Scalar> Region<T> {
    pub fn leaf(bounds: Rect<T>) -> Self {
        Self {
            bounds,
            history: Vec::new(),
            children: None,
            split: None,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

/// Competence progress over the most recent `zeta` attempts of a history.
///
/// With `n` entries in the window, the older `ceil(n/2)` are compared against the
/// newer `floor(n/2)`: `|sum(older) - sum(newer)| / n`. Fewer than two entries score 0.
pub fn window_interest<T: Scalar>(history: &[GoalRecord<T>], zeta: usize) -> T {
    let n = history.len().min(zeta);
    if n < 2 {
        return T::zero();
    }
    let window = &history[history.len() - n..];
    let older = n.div_ceil(2);
    let sum = |s: &[GoalRecord<T>]| s.iter().map(|r| r.competence).sum::<T>();
    (sum(&window[..older]) - sum(&window[older..])).abs() / T::from_usize_lossy(n)
}

pub fn region_interest<T: Scalar>(r: &Region<T>, cfg: &HighLevelConfig<T>) -> T {
    window_interest(&r.history, cfg.zeta)
}

/// Children produced by [`split_region`], histories in time order.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitOutcome<T: Scalar> {
    pub spec: SplitSpec<T>,
    pub score: T,
    pub left: Region<T>,
    pub right: Region<T>,
}

/// Candidate thresholds strictly inside `bounds` along `axis`, ascending.
pub fn split_thresholds<T: Scalar>(bounds: &Rect<T>, axis: usize, candidates: usize) -> Vec<T> {
    let step = bounds.width(axis) / T::from_usize_lossy(candidates + 1);
    (1..=candidates)
        .map(|i| bounds.min[axis] + step * T::from_usize_lossy(i))
        .collect()
}

/// Chooses the axis and threshold that best separate differing competence progress.
///
/// Each candidate scores `|interest(left) - interest(right)| * min(|left|, |right|)`; the
/// first maximum in (axis, ascending threshold) order wins.
pub fn split_region<T: Scalar>(r: &Region<T>, cfg: &HighLevelConfig<T>) -> Result<SplitOutcome<T>> {
    if !r.is_leaf() {
        return Err(Error::SplitPrecondition("region already split"));
    }
    if r.history.len() <= cfg.g_max {
        return Err(Error::SplitPrecondition("history within capacity"));
    }
    let mut best: Option<(T, SplitSpec<T>)> = None;
    for axis in 0..2 {
        for threshold in split_thresholds(&r.bounds, axis, cfg.split_candidates) {
            let spec = SplitSpec { axis, threshold };
            let (left, right): (Vec<GoalRecord<T>>, Vec<GoalRecord<T>>) =
                r.history.iter().partition(|g| spec.goes_left(&g.goal));
            let gap = (window_interest(&left, cfg.zeta) - window_interest(&right, cfg.zeta)).abs();
            let score = gap * T::from_usize_lossy(left.len().min(right.len()));
            if best.as_ref().is_none_or(|(s, _)| score > *s) {
                best = Some((score, spec));
            }
        }
    }
    let (score, spec) = best.expect("at least one candidate per axis");
    let mut left_bounds = r.bounds;
    let mut right_bounds = r.bounds;
    left_bounds.max[spec.axis] = spec.threshold;
    right_bounds.min[spec.axis] = spec.threshold;
    let (lh, rh): (Vec<GoalRecord<T>>, Vec<GoalRecord<T>>) = r.history.iter().partition(|g| spec.goes_left(&g.goal));
    Ok(SplitOutcome {
        spec,
        score,
        left: Region {
            history: lh,
            ..Region::leaf(left_bounds)
        },
        right: Region {
            history: rh,
            ..Region::leaf(right_bounds)
        },
    })
}

/// Arena-backed region tree. Node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionTree<T: Scalar> {
    cfg: HighLevelConfig<T>,
    nodes: Vec<Region<T>>,
}

impl<T: Scalar> RegionTree<T> {
    pub fn new(cfg: HighLevelConfig<T>) -> Result<Self> {
        cfg.validate()?;
        let root = Region::leaf(cfg.task_bounds);
        Ok(Self { cfg, nodes: vec![root] })
    }

    pub fn config(&self) -> &HighLevelConfig<T> {
        &self.cfg
    }

    pub fn root(&self) -> &Region<T> {
        &self.nodes[0]
    }

    pub fn node(&self, id: usize) -> &Region<T> {
        &self.nodes[id]
    }

    pub fn leaf_ids(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].is_leaf()).collect()
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Region<T>> {
        self.nodes.iter().filter(|r| r.is_leaf())
    }

    /// The unique leaf containing `p`.
    pub fn locate(&self, p: &TaskPoint<T>) -> Result<usize> {
        if !self.cfg.task_bounds.contains(p) {
            return Err(Error::GoalOutOfBounds(p.y1.to_f64_lossy(), p.y2.to_f64_lossy()));
        }
        let mut id = 0;
        while let (Some([l, r]), Some(spec)) = (self.nodes[id].children, self.nodes[id].split) {
            id = if spec.goes_left(p) { l } else { r };
        }
        Ok(id)
    }

    /// Routes an attempt to its leaf, splitting the leaf once it exceeds capacity.
    pub fn record_attempt(&mut self, goal: TaskPoint<T>, competence: T) -> Result<usize> {
        let id = self.locate(&goal)?;
        self.nodes[id].history.push(GoalRecord { goal, competence });
        if self.nodes[id].history.len() > self.cfg.g_max {
            let out = split_region(&self.nodes[id], &self.cfg)?;
            let l = self.nodes.len();
            self.nodes.push(out.left);
            self.nodes.push(out.right);
            let parent = &mut self.nodes[id];
            parent.children = Some([l, l + 1]);
            parent.split = Some(out.spec);
        }
        Ok(id)
    }

    pub fn interest(&self, id: usize) -> T {
        region_interest(&self.nodes[id], &self.cfg)
    }

    /// Self-generates a goal inside the task bounds.
    pub fn sample_goal(&self, rng: &mut Rng) -> TaskPoint<T> {
        let leaves = self.leaf_ids();
        let u = T::lit(rng.random::<f64>());
        let [p_interest, p_uniform, _] = self.cfg.mode_probs;
        let bounds = if u < p_interest {
            let weights: Vec<f64> = leaves
                .iter()
                .map(|&id| self.interest(id).to_f64_lossy() + INTEREST_SMOOTHING)
                .collect();
            let total: f64 = weights.iter().sum();
            let mut pick = rng.random::<f64>() * total;
            let mut chosen = leaves[leaves.len() - 1];
            for (&id, w) in leaves.iter().zip(&weights) {
                if pick < *w {
                    chosen = id;
                    break;
                }
                pick -= w;
            }
            self.nodes[chosen].bounds
        } else if u < p_interest + p_uniform {
            self.nodes[leaves[rng.random_range(0..leaves.len())]].bounds
        } else {
            self.cfg.task_bounds
        };
        uniform_in(&bounds, rng)
    }

    /// One leaf per line: `min1,min2,max1,max2,history_len,interest`.
    pub fn export_snapshot<W: Write>(&self, mut w: W) -> Result<()> {
        for id in self.leaf_ids() {
            let r = &self.nodes[id];
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt_num(r.bounds.min[0]),
                fmt_num(r.bounds.min[1]),
                fmt_num(r.bounds.max[0]),
                fmt_num(r.bounds.max[1]),
                r.history.len(),
                fmt_num(self.interest(id))
            )?;
        }
        Ok(())
    }

    /// Checks that the leaves tile the root rectangle: areas add up and interiors are disjoint.
    pub fn leaves_partition_bounds(&self) -> bool {
        let leaves: Vec<&Region<T>> = self.leaves().collect();
        let area: T = leaves.iter().map(|r| r.bounds.area()).sum();
        let root = self.cfg.task_bounds.area();
        if (area - root).abs() > root * T::lit(1e-9) {
            return false;
        }
        for (i, a) in leaves.iter().enumerate() {
            for b in &leaves[i + 1..] {
                let overlap =
                    (0..2).all(|k| a.bounds.min[k].max(b.bounds.min[k]) < a.bounds.max[k].min(b.bounds.max[k]));
                if overlap {
                    return false;
                }
            }
        }
        true
    }
}

pub fn uniform_in<T: Scalar>(bounds: &Rect<T>, rng: &mut Rng) -> TaskPoint<T> {
    let lo = bounds.min.map(|v| v.to_f64_lossy());
    let hi = bounds.max.map(|v| v.to_f64_lossy());
    let p = TaskPoint::new(
        T::lit(rng.random_range(lo[0]..=hi[0])),
        T::lit(rng.random_range(lo[1]..=hi[1])),
    );
    // Conversion to a narrower scalar may round onto or past the edge.
    TaskPoint::new(
        p.y1.max(bounds.min[0]).min(bounds.max[0]),
        p.y2.max(bounds.min[1]).min(bounds.max[1]),
    )
}
