//! Episodic memory of every executed `(action, outcome)` pair.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::format::{fmt_num, parse_num};
use crate::kdtree::KdTree;
use crate::scalar::Scalar;
use crate::space::{Action, Episode, Origin, TaskPoint, ACTION_DIM};

/// Append-only store indexed both by outcome (2-D) and by action (24-D).
#[derive(Debug, Clone, Default)]
pub struct EpisodicMemory<T: Scalar> {
    episodes: Vec<Episode<T>>,
    task_index: KdTree<T, 2>,
    action_index: KdTree<T, ACTION_DIM>,
}

impl<T: Scalar> EpisodicMemory<T> {
    pub fn new() -> Self {
        Self {
            episodes: Vec::new(),
            task_index: KdTree::new(),
            action_index: KdTree::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.episodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.episodes.is_empty()
    }

    pub fn episodes(&self) -> &[Episode<T>] {
        &self.episodes
    }

    pub fn get(&self, index: usize) -> Option<&Episode<T>> {
        self.episodes.get(index)
    }

    /// Appends the episode, assigning it the next ordinal.
    pub fn insert(&mut self, mut e: Episode<T>) -> usize {
        let index = self.episodes.len();
        e.index = index;
        debug_assert!(self.task_index.len() == index && self.action_index.len() == index);
        self.task_index.insert(e.outcome.coords(), index);
        self.action_index.insert(*e.action.params(), index);
        self.episodes.push(e);
        index
    }

    pub fn record(&mut self, action: Action<T>, outcome: TaskPoint<T>, origin: Origin) -> usize {
        self.insert(Episode::new(action, outcome, origin))
    }

    /// Up to `k` episodes nearest to `y` in task space, nearest first.
    pub fn knn_task(&self, y: &TaskPoint<T>, k: usize) -> Result<Vec<&Episode<T>>> {
        if self.is_empty() {
            return Err(Error::EmptyMemory);
        }
        Ok(self
            .task_index
            .nearest(&y.coords(), k)
            .into_iter()
            .map(|n| &self.episodes[n.id])
            .collect())
    }

    /// Up to `k` episodes nearest to `a` in action space, nearest first.
    pub fn knn_action(&self, a: &Action<T>, k: usize) -> Result<Vec<&Episode<T>>> {
        if self.is_empty() {
            return Err(Error::EmptyMemory);
        }
        Ok(self
            .action_index
            .nearest(a.params(), k)
            .into_iter()
            .map(|n| &self.episodes[n.id])
            .collect())
    }

    /// Order-sensitive hash of the full content, used to check that read-only passes stay read-only.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for e in &self.episodes {
            e.index.hash(&mut h);
            e.origin.hash(&mut h);
            for v in e.action.params() {
                v.to_f64_lossy().to_bits().hash(&mut h);
            }
            e.outcome.y1.to_f64_lossy().to_bits().hash(&mut h);
            e.outcome.y2.to_f64_lossy().to_bits().hash(&mut h);
        }
        h.finish()
    }

    /// One line per episode: index, origin, 24 action scalars, 2 outcome scalars.
    pub fn dump<W: Write>(&self, mut w: W) -> Result<()> {
        for e in &self.episodes {
            write_episode_line(&mut w, e.index, e.origin.as_str(), e.action.params(), &e.outcome)?;
        }
        Ok(())
    }

    pub fn restore<R: BufRead>(r: R) -> Result<Self> {
        let mut mem = Self::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row = parse_episode_line::<T>(&line, lineno + 1)?;
            if row.index != mem.len() {
                return Err(Error::Parse {
                    line: lineno + 1,
                    reason: format!("expected index {}, found {}", mem.len(), row.index),
                });
            }
            let origin: Origin = row.tag.parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                reason: format!("unknown origin tag {:?}", row.tag),
            })?;
            mem.record(row.action, row.outcome, origin);
        }
        Ok(mem)
    }
}

/// Trace of the covariance of the outcomes: sum of per-axis population variances.
pub fn outcome_variance<T: Scalar>(episodes: &[&Episode<T>]) -> Result<T> {
    if episodes.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = T::from_usize_lossy(episodes.len());
    let mean1 = episodes.iter().map(|e| e.outcome.y1).sum::<T>() / n;
    let mean2 = episodes.iter().map(|e| e.outcome.y2).sum::<T>() / n;
    let ss = episodes
        .iter()
        .map(|e| {
            let d1 = e.outcome.y1 - mean1;
            let d2 = e.outcome.y2 - mean2;
            d1 * d1 + d2 * d2
        })
        .sum::<T>();
    Ok(ss / n)
}

pub(crate) fn write_episode_line<T: Scalar, W: Write>(
    w: &mut W,
    index: usize,
    tag: &str,
    action: &[T; ACTION_DIM],
    outcome: &TaskPoint<T>,
) -> Result<()> {
    write!(w, "{index},{tag}")?;
    for v in action {
        write!(w, ",{}", fmt_num(*v))?;
    }
    writeln!(w, ",{},{}", fmt_num(outcome.y1), fmt_num(outcome.y2))?;
    Ok(())
}

pub(crate) struct EpisodeLine<'a, T: Scalar> {
    pub index: usize,
    pub tag: &'a str,
    pub action: Action<T>,
    pub outcome: TaskPoint<T>,
}

pub(crate) fn parse_episode_line<T: Scalar>(line: &str, lineno: usize) -> Result<EpisodeLine<'_, T>> {
    let err = |reason: String| Error::Parse { line: lineno, reason };
    let fields: Vec<&str> = line.trim().split(',').collect();
    if fields.len() != 2 + ACTION_DIM + 2 {
        return Err(err(format!(
            "expected {} fields, found {}",
            4 + ACTION_DIM,
            fields.len()
        )));
    }
    let index: usize = fields[0].trim().parse().map_err(|e| err(format!("bad index: {e}")))?;
    let values = fields[2..]
        .iter()
        .map(|f| parse_num::<T>(f).ok_or_else(|| err(format!("bad number {f:?}"))))
        .collect::<Result<Vec<T>>>()?;
    let action = Action::from_slice(&values[..ACTION_DIM]).map_err(|e| err(e.to_string()))?;
    let outcome = TaskPoint::try_new(values[ACTION_DIM], values[ACTION_DIM + 1]).map_err(|e| err(e.to_string()))?;
    Ok(EpisodeLine {
        index,
        tag: fields[1].trim(),
        action,
        outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn action(v: f64) -> Action<f64> {
        Action::new([v; ACTION_DIM]).unwrap()
    }

    fn random_memory(rng: &mut ChaCha8Rng, n: usize) -> EpisodicMemory<f64> {
        let mut mem = EpisodicMemory::new();
        for _ in 0..n {
            let a = Action::new(std::array::from_fn(|_| rng.random_range(-1.0..=1.0))).unwrap();
            let y = TaskPoint::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            mem.record(a, y, Origin::Autonomous);
        }
        mem
    }

    #[test]
    fn insert_assigns_ordinals() {
        let mut mem = EpisodicMemory::new();
        assert_eq!(mem.record(action(0.0), TaskPoint::new(0.0, 0.0), Origin::Autonomous), 0);
        assert_eq!(mem.record(action(0.1), TaskPoint::new(1.0, 0.0), Origin::Imitation), 1);
        assert_eq!(mem.len(), 2);
        assert_eq!(mem.get(1).unwrap().index, 1);
    }

    #[test]
    fn knn_task_examples() {
        let mut mem = EpisodicMemory::new();
        mem.record(action(0.0), TaskPoint::new(0.0, 0.0), Origin::Autonomous);
        mem.record(action(0.5), TaskPoint::new(1.0, 1.0), Origin::Autonomous);
        let one = mem.knn_task(&TaskPoint::new(0.1, 0.0), 1).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].index, 0);
        let all = mem.knn_task(&TaskPoint::new(0.1, 0.0), 5).unwrap();
        assert_eq!(all.iter().map(|e| e.index).collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn knn_action_examples() {
        let mut mem = EpisodicMemory::new();
        mem.record(action(0.0), TaskPoint::new(0.0, 0.0), Origin::Autonomous);
        mem.record(action(0.5), TaskPoint::new(1.0, 1.0), Origin::Autonomous);
        let hit = mem.knn_action(&action(0.5), 1).unwrap();
        assert_eq!(hit[0].index, 1);
        assert_eq!(mem.knn_action(&action(0.5), 9).unwrap().len(), 2);
    }

    #[test]
    fn empty_memory_queries_fail() {
        let mem = EpisodicMemory::<f64>::new();
        assert!(matches!(
            mem.knn_task(&TaskPoint::new(0.0, 0.0), 1),
            Err(Error::EmptyMemory)
        ));
        assert!(matches!(mem.knn_action(&action(0.0), 1), Err(Error::EmptyMemory)));
    }

    #[test]
    fn variance_examples() {
        let e = |y1, y2| Episode::new(action(0.0), TaskPoint::new(y1, y2), Origin::Autonomous);
        let a = e(0.0, 0.0);
        let b = e(2.0, 0.0);
        assert_eq!(outcome_variance(&[&a]).unwrap(), 0.0);
        assert!((outcome_variance(&[&a, &b]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(outcome_variance(&[&b, &b, &b]).unwrap(), 0.0);
        assert!(matches!(outcome_variance::<f64>(&[]), Err(Error::EmptySet)));
    }

    #[test]
    fn dump_restore_preserves_nine_digits() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mem = random_memory(&mut rng, 50);
        let mut buf = Vec::new();
        mem.dump(&mut buf).unwrap();
        let back = EpisodicMemory::<f64>::restore(buf.as_slice()).unwrap();
        assert_eq!(back.len(), mem.len());
        for (a, b) in mem.episodes().iter().zip(back.episodes()) {
            assert_eq!(a.origin, b.origin);
            for (x, y) in a.action.params().iter().zip(b.action.params()) {
                assert!((x - y).abs() <= 1e-8 * x.abs().max(1e-300) + 1e-300);
            }
        }
        let mut again = Vec::new();
        back.dump(&mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn restore_rejects_gaps() {
        let line = format!("3,autonomous{},0,0\n", ",0".repeat(ACTION_DIM));
        assert!(EpisodicMemory::<f64>::restore(line.as_bytes()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn index_matches_linear_scan(seed in any::<u64>(), n in 1usize..400, k in 1usize..15,
                                     qx in -1.2f64..1.2, qy in -1.2f64..1.2) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mem = random_memory(&mut rng, n);
            let q = TaskPoint::new(qx, qy);
            let got: Vec<usize> = mem.knn_task(&q, k).unwrap().iter().map(|e| e.index).collect();
            let mut scan: Vec<(f64, usize)> = mem.episodes().iter()
                .map(|e| ((e.outcome.y1 - qx).powi(2) + (e.outcome.y2 - qy).powi(2), e.index)).collect();
            scan.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let want: Vec<usize> = scan.iter().take(k).map(|p| p.1).collect();
            prop_assert_eq!(got, want);
        }

        #[test]
        fn just_inserted_is_found(seed in any::<u64>(), n in 1usize..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut mem = random_memory(&mut rng, n);
            let y = TaskPoint::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let idx = mem.record(action(0.25), y, Origin::Autonomous);
            let hit = mem.knn_task(&y, 1).unwrap();
            prop_assert_eq!(hit[0].outcome, y);
            prop_assert!(hit[0].index <= idx);
        }
    }
}
