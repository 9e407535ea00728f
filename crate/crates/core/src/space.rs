//! Action space, task space and the memorised exemplar.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Number of actuated joints on the arm.
pub const JOINTS: usize = 6;
/// Scalars per joint: initial, middle and final Bezier control point, then duration.
pub const PARAMS_PER_JOINT: usize = 4;
/// Dimension of the action space.
pub const ACTION_DIM: usize = JOINTS * PARAMS_PER_JOINT;

/// A motor command: 24 normalized scalars in `[-1, 1]`, joint-major.
///
/// Joint `j` owns `params[4j..4j + 4] = (p0, p1, p2, duration)`.
#[derive(Clone, Copy, PartialEq)]
pub struct Action<T: Scalar>([T; ACTION_DIM]);

impl<T: Scalar> Action<T> {
    /// Validates the box constraint.
    pub fn new(params: [T; ACTION_DIM]) -> Result<Self> {
        for (index, &value) in params.iter().enumerate() {
            if !(value >= -T::one() && value <= T::one()) {
                return Err(Error::ActionOutOfRange {
                    index,
                    value: value.to_f64_lossy(),
                });
            }
        }
        Ok(Self(params))
    }

    pub fn from_slice(params: &[T]) -> Result<Self> {
        let arr: [T; ACTION_DIM] = params.try_into().map_err(|_| Error::ActionDimension(params.len()))?;
        Self::new(arr)
    }

    /// Projects arbitrary values onto the action box. NaN maps to 0.
    pub fn clamped(mut params: [T; ACTION_DIM]) -> Self {
        for v in params.iter_mut() {
            *v = if v.is_nan() {
                T::zero()
            } else {
                v.max(-T::one()).min(T::one())
            };
        }
        Self(params)
    }

    pub fn zeros() -> Self {
        Self([T::zero(); ACTION_DIM])
    }

    pub fn params(&self) -> &[T; ACTION_DIM] {
        &self.0
    }

    /// `(p0, p1, p2, duration)` of joint `j`.
    pub fn joint(&self, j: usize) -> [T; PARAMS_PER_JOINT] {
        let base = j * PARAMS_PER_JOINT;
        [self.0[base], self.0[base + 1], self.0[base + 2], self.0[base + 3]]
    }

    pub fn squared_distance(&self, other: &Self) -> T {
        squared_distance(&self.0, &other.0)
    }

    pub fn distance(&self, other: &Self) -> T {
        self.squared_distance(other).sqrt()
    }
}

impl<T: Scalar> fmt::Debug for Action<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Action").field(&self.0.as_slice()).finish()
    }
}

/// Hook landing position on the water plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TaskPoint<T: Scalar> {
    pub y1: T,
    pub y2: T,
}

impl<T: Scalar> TaskPoint<T> {
    pub const fn new(y1: T, y2: T) -> Self {
        Self { y1, y2 }
    }

    pub fn try_new(y1: T, y2: T) -> Result<Self> {
        if y1.is_finite() && y2.is_finite() {
            Ok(Self { y1, y2 })
        } else {
            Err(Error::NonFinitePoint)
        }
    }

    pub fn coords(&self) -> [T; 2] {
        [self.y1, self.y2]
    }

    pub fn from_coords([y1, y2]: [T; 2]) -> Self {
        Self { y1, y2 }
    }

    pub fn norm(&self) -> T {
        self.y1.hypot(self.y2)
    }
}

/// Who produced a memorised exemplar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    Autonomous,
    Demonstration,
    Imitation,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Autonomous => "autonomous",
            Origin::Demonstration => "demonstration",
            Origin::Imitation => "imitation",
        }
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Origin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "autonomous" => Ok(Origin::Autonomous),
            "demonstration" => Ok(Origin::Demonstration),
            "imitation" => Ok(Origin::Imitation),
            other => Err(Error::Parse {
                line: 0,
                reason: format!("unknown origin tag {other:?}"),
            }),
        }
    }
}

/// One memorised `(action, outcome)` association.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Episode<T: Scalar> {
    pub action: Action<T>,
    pub outcome: TaskPoint<T>,
    pub origin: Origin,
    /// Position in memory, assigned on insertion.
    pub index: usize,
}

impl<T: Scalar> Episode<T> {
    /// An episode not yet placed in memory; `index` is overwritten on insert.
    pub fn new(action: Action<T>, outcome: TaskPoint<T>, origin: Origin) -> Self {
        Self {
            action,
            outcome,
            origin,
            index: usize::MAX,
        }
    }
}

pub(crate) fn squared_distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
}

/// Axis-aligned rectangle in task space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Rect<T: Scalar> {
    pub min: [T; 2],
    pub max: [T; 2],
}

impl<T: Scalar> Rect<T> {
    pub fn new(min: [T; 2], max: [T; 2]) -> Result<Self> {
        let ok = (0..2).all(|i| min[i].is_finite() && max[i].is_finite() && min[i] < max[i]);
        if ok {
            Ok(Self { min, max })
        } else {
            Err(Error::Config("rectangle bounds must be finite and ordered".into()))
        }
    }

    pub fn square(half_side: T) -> Self {
        Self {
            min: [-half_side; 2],
            max: [half_side; 2],
        }
    }

    pub fn contains(&self, p: &TaskPoint<T>) -> bool {
        let c = p.coords();
        (0..2).all(|i| c[i] >= self.min[i] && c[i] <= self.max[i])
    }

    pub fn width(&self, axis: usize) -> T {
        self.max[axis] - self.min[axis]
    }

    pub fn area(&self) -> T {
        self.width(0) * self.width(1)
    }

    pub fn center(&self) -> [T; 2] {
        let two = T::lit(2.0);
        [(self.min[0] + self.max[0]) / two, (self.min[1] + self.max[1]) / two]
    }

    /// Scales the area by `factor` about the center.
    pub fn scaled_area(&self, factor: T) -> Self {
        let s = factor.sqrt();
        let c = self.center();
        let two = T::lit(2.0);
        let half = [self.width(0) * s / two, self.width(1) * s / two];
        Self {
            min: [c[0] - half[0], c[1] - half[1]],
            max: [c[0] + half[0], c[1] + half[1]],
        }
    }
}
