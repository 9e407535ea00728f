//! Closed-form measures over task space: distance, similarity and competence.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::TaskPoint;

/// Default reach threshold: within 5% of the origin-to-goal distance counts as reached.
pub const DEFAULT_EPS_SIM: f64 = -0.05;

/// Fixed context of the experiment. Only the rest outcome survives into the measures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityContext<T: Scalar> {
    y_org: TaskPoint<T>,
}

impl<T: Scalar> SimilarityContext<T> {
    pub fn new(y_org: TaskPoint<T>) -> Self {
        Self { y_org }
    }

    pub fn y_org(&self) -> TaskPoint<T> {
        self.y_org
    }
}

/// Euclidean distance in task space.
pub fn distance<T: Scalar>(p: &TaskPoint<T>, q: &TaskPoint<T>) -> T {
    (p.y1 - q.y1).hypot(p.y2 - q.y2)
}

/// Similarity of a reached outcome `y_f` to the goal `y_g`, in `[-1, 0]`.
///
/// The miss distance is normalized by how far the goal lies from the rest outcome,
/// and saturates at -1 once the attempt did no better than staying at rest.
/// A goal located exactly at the rest outcome scores 0 on an exact hit, -1 otherwise.
pub fn sim<T: Scalar>(y_g: &TaskPoint<T>, y_f: &TaskPoint<T>, ctx: &SimilarityContext<T>) -> T {
    let miss = distance(y_g, y_f);
    let scale = distance(y_g, &ctx.y_org);
    if scale == T::zero() {
        return if miss == T::zero() { T::zero() } else { -T::one() };
    }
    let ratio = miss / scale;
    if ratio > T::one() {
        -T::one()
    } else {
        -ratio
    }
}

/// Thresholded similarity: near misses above `eps_sim` count as full success (0).
pub fn competence<T: Scalar>(sim_value: T, eps_sim: T) -> Result<T> {
    if !(eps_sim < T::zero()) {
        return Err(Error::InvalidThreshold(eps_sim.to_f64_lossy()));
    }
    Ok(if sim_value <= eps_sim { sim_value } else { T::zero() })
}
