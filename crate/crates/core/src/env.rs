//! Deterministic fishing-rod surrogate.
//!
//! A six-joint arm (one yaw joint at the base, five pitch joints) holds a rigid rod. A hook
//! hangs from the rod tip on an inextensible massless line. Each joint follows a quadratic
//! Bezier trajectory decoded from an [`Action`]; the hook is integrated as a damped spherical
//! pendulum whose support is the moving rod tip. The outcome is the horizontal position of the
//! hook when it first touches the water plane.

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Rng};
use crate::scalar::Scalar;
use crate::space::{Action, TaskPoint, JOINTS};

pub type Vec3<T> = [T; 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
#[serde(default, deny_unknown_fields)]
pub struct EnvironmentConfig<T: Scalar> {
    /// Link lengths in meters; link 1 follows the yaw joint, links 2..6 follow the pitch joints.
    pub link_lengths: [T; JOINTS],
    pub rod_length: T,
    pub line_length: T,
    /// Height of the arm base above the water plane.
    pub base_height: T,
    /// Symmetric joint limit in radians.
    pub joint_limit: T,
    /// Seconds; a duration parameter of -1 maps to the first value, +1 to the second.
    pub duration_range: [T; 2],
    pub control_timestep: T,
    pub pendulum_damping: T,
    pub gravity: T,
    pub water_height: T,
    /// Standard deviation of the isotropic outcome noise, per task-space axis.
    pub noise_sigma: T,
    pub max_episode_time: T,
    pub seed: u64,
}

impl<T: Scalar> Default for EnvironmentConfig<T> {
    fn default() -> Self {
        Self {
            link_lengths: [T::lit(0.12); JOINTS],
            rod_length: T::lit(0.4),
            line_length: T::lit(0.2),
            base_height: T::lit(0.3),
            joint_limit: T::one(),
            duration_range: [T::lit(0.5), T::lit(2.0)],
            control_timestep: T::lit(0.05),
            pendulum_damping: T::lit(0.8),
            gravity: T::lit(9.81),
            water_height: T::zero(),
            noise_sigma: T::lit(0.073),
            max_episode_time: T::lit(10.0),
            seed: 0,
        }
    }
}

impl<T: Scalar> EnvironmentConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be strictly positive and finite")))
            }
        };
        for &l in &self.link_lengths {
            positive("link_lengths", l)?;
        }
        positive("rod_length", self.rod_length)?;
        positive("line_length", self.line_length)?;
        positive("base_height", self.base_height)?;
        positive("joint_limit", self.joint_limit)?;
        positive("duration_range", self.duration_range[0])?;
        positive("control_timestep", self.control_timestep)?;
        positive("pendulum_damping", self.pendulum_damping)?;
        positive("gravity", self.gravity)?;
        positive("max_episode_time", self.max_episode_time)?;
        if !(self.duration_range[0] <= self.duration_range[1]) || !self.duration_range[1].is_finite() {
            return Err(Error::Config("duration_range must be ordered".into()));
        }
        if !self.water_height.is_finite() {
            return Err(Error::Config("water_height must be finite".into()));
        }
        // Zero noise is accepted for noiseless evaluation and teacher oracles.
        if !(self.noise_sigma >= T::zero()) || !self.noise_sigma.is_finite() {
            return Err(Error::Config("noise_sigma must be nonnegative and finite".into()));
        }
        Ok(())
    }

    /// Longest possible horizontal distance from the base to the tip.
    pub fn arm_reach(&self) -> T {
        self.link_lengths.iter().copied().sum::<T>() + self.rod_length
    }

    /// Upper bound on the horizontal distance of any noiseless landing point from the base.
    pub fn geometric_reach(&self) -> T {
        self.arm_reach() + self.line_length
    }

    /// Same configuration with the outcome noise switched off.
    pub fn noiseless(&self) -> Self {
        Self {
            noise_sigma: T::zero(),
            ..self.clone()
        }
    }
}

/// Decoded motion of one joint: a quadratic Bezier over normalized time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointTrajectory<T: Scalar> {
    /// Control points in radians.
    pub control: [T; 3],
    /// Seconds.
    pub duration: T,
}

impl<T: Scalar> JointTrajectory<T> {
    /// Angle at normalized time `s` in `[0, 1]`.
    pub fn bezier(&self, s: T) -> T {
        let [p0, p1, p2] = self.control;
        let u = T::one() - s;
        u * u * p0 + T::lit(2.0) * s * u * p1 + s * s * p2
    }

    /// Angle at time `t`; holds the final control point once the duration has elapsed.
    pub fn angle_at(&self, t: T) -> T {
        let s = (t / self.duration).min(T::one()).max(T::zero());
        self.bezier(s)
    }
}

fn affine<T: Scalar>(x: T, lo: T, hi: T) -> T {
    lo + (x + T::one()) / T::lit(2.0) * (hi - lo)
}

pub fn decode_action<T: Scalar>(a: &Action<T>, cfg: &EnvironmentConfig<T>) -> [JointTrajectory<T>; JOINTS] {
    let lim = cfg.joint_limit;
    std::array::from_fn(|j| {
        let [p0, p1, p2, d] = a.joint(j);
        JointTrajectory {
            control: [affine(p0, -lim, lim), affine(p1, -lim, lim), affine(p2, -lim, lim)],
            duration: affine(d, cfg.duration_range[0], cfg.duration_range[1]),
        }
    })
}

/// Rod-tip position for the given joint angles.
///
/// The base sits at the horizontal origin, `base_height` above the water. Joint 1 yaws the
/// whole chain about the vertical axis; link 1 leaves the base horizontally. Joints 2..6 pitch
/// the following links within the vertical plane picked by the yaw, elevation angles adding
/// up along the chain. The rod extends the last link. Zero angles give a fully extended
/// horizontal arm along the first horizontal axis.
pub fn forward_kinematics<T: Scalar>(angles: &[T; JOINTS], cfg: &EnvironmentConfig<T>) -> Vec3<T> {
    let mut horizontal = cfg.link_lengths[0];
    let mut height = cfg.water_height + cfg.base_height;
    let mut elevation = T::zero();
    for (&angle, &length) in angles.iter().zip(&cfg.link_lengths).skip(1) {
        elevation = elevation + angle;
        horizontal = horizontal + length * elevation.cos();
        height = height + length * elevation.sin();
    }
    horizontal = horizontal + cfg.rod_length * elevation.cos();
    height = height + cfg.rod_length * elevation.sin();
    let yaw = angles[0];
    [horizontal * yaw.cos(), horizontal * yaw.sin(), height]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvironmentState<T: Scalar> {
    pub joint_angles: [T; JOINTS],
    pub hook_position: Vec3<T>,
    pub hook_velocity: Vec3<T>,
    pub clock: T,
}

/// Result of one execution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Landing<T: Scalar> {
    pub point: TaskPoint<T>,
    /// The hook never reached the water before `max_episode_time`.
    pub timed_out: bool,
}

fn add<T: Scalar>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn sub<T: Scalar>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn scale<T: Scalar>(a: Vec3<T>, s: T) -> Vec3<T> {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn dot<T: Scalar>(a: Vec3<T>, b: Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm<T: Scalar>(a: Vec3<T>) -> T {
    dot(a, a).sqrt()
}

/// Removes the component of `v` along the unit vector `u`.
fn reject<T: Scalar>(v: Vec3<T>, u: Vec3<T>) -> Vec3<T> {
    sub(v, scale(u, dot(v, u)))
}

/// Step-by-step rollout of one action at a given integration step.
#[derive(Debug, Clone)]
pub struct Simulation<'a, T: Scalar> {
    cfg: &'a EnvironmentConfig<T>,
    trajectories: [JointTrajectory<T>; JOINTS],
    dt: T,
    steps: usize,
    max_steps: usize,
    joint_angles: [T; JOINTS],
    tip: Vec3<T>,
    tip_velocity: Vec3<T>,
    /// Hook position relative to the tip; its norm is the line length.
    line: Vec3<T>,
    /// Hook velocity relative to the tip.
    line_velocity: Vec3<T>,
    landed: bool,
}

impl<'a, T: Scalar> Simulation<'a, T> {
    /// Starts from the initial state at the configured control timestep.
    pub fn new(a: &Action<T>, cfg: &'a EnvironmentConfig<T>) -> Self {
        Self::with_timestep(a, cfg, cfg.control_timestep)
    }

    /// The joints are placed at their Bezier start pose with the hook hanging at rest below
    /// the tip, so the reset itself imparts no motion.
    pub fn with_timestep(a: &Action<T>, cfg: &'a EnvironmentConfig<T>, dt: T) -> Self {
        let trajectories = decode_action(a, cfg);
        let joint_angles = trajectories.map(|t| t.control[0]);
        let max_steps = (cfg.max_episode_time / dt - T::lit(1e-9))
            .ceil()
            .to_usize()
            .unwrap_or(0)
            .max(1);
        Self {
            cfg,
            trajectories,
            dt,
            steps: 0,
            max_steps,
            joint_angles,
            tip: forward_kinematics(&joint_angles, cfg),
            tip_velocity: [T::zero(); 3],
            line: [T::zero(), T::zero(), -cfg.line_length],
            line_velocity: [T::zero(); 3],
            landed: false,
        }
    }

    pub fn clock(&self) -> T {
        T::from_usize_lossy(self.steps) * self.dt
    }

    pub fn state(&self) -> EnvironmentState<T> {
        EnvironmentState {
            joint_angles: self.joint_angles,
            hook_position: add(self.tip, self.line),
            hook_velocity: add(self.tip_velocity, self.line_velocity),
            clock: self.clock(),
        }
    }

    /// Kinetic plus gravitational energy of the hook per unit mass, measured against the water.
    pub fn hook_energy(&self) -> T {
        let s = self.state();
        T::lit(0.5) * dot(s.hook_velocity, s.hook_velocity)
            + self.cfg.gravity * (s.hook_position[2] - self.cfg.water_height)
    }

    /// Time after which every joint holds its final angle.
    pub fn motion_end(&self) -> T {
        self.trajectories.iter().map(|t| t.duration).fold(T::zero(), T::max)
    }

    pub fn is_finished(&self) -> bool {
        self.landed || self.steps >= self.max_steps
    }

    /// Advances one integration step. Returns `false` once the episode is over.
    pub fn step(&mut self) -> bool {
        if self.is_finished() {
            return false;
        }
        let dt = self.dt;
        self.steps += 1;
        let t = self.clock();
        for (angle, traj) in self.joint_angles.iter_mut().zip(&self.trajectories) {
            *angle = traj.angle_at(t);
        }
        let tip = forward_kinematics(&self.joint_angles, self.cfg);
        let tip_velocity = scale(sub(tip, self.tip), T::one() / dt);
        let tip_accel = scale(sub(tip_velocity, self.tip_velocity), T::one() / dt);

        // Semi-implicit Euler in the tip frame: velocity first, then position, both kept
        // consistent with the inextensible line.
        let gravity = [T::zero(), T::zero(), -self.cfg.gravity];
        let accel = sub(
            sub(gravity, tip_accel),
            scale(self.line_velocity, self.cfg.pendulum_damping),
        );
        let support_still = tip_velocity == [T::zero(); 3] && self.tip_velocity == [T::zero(); 3];
        let energy_before = self.hook_energy();
        let radial = scale(self.line, T::one() / norm(self.line));
        let v = reject(add(self.line_velocity, scale(accel, dt)), radial);
        let moved = add(self.line, scale(v, dt));
        let radial = scale(moved, T::one() / norm(moved));
        self.line = scale(radial, self.cfg.line_length);
        // Carry the velocity into the new tangent plane at unchanged speed.
        let speed = norm(v);
        let tangent = reject(v, radial);
        let tangent_speed = norm(tangent);
        self.line_velocity = if tangent_speed > T::zero() {
            scale(tangent, speed / tangent_speed)
        } else {
            tangent
        };

        self.tip = tip;
        self.tip_velocity = tip_velocity;
        if support_still {
            self.cap_energy(energy_before);
        }
        if self.tip[2] + self.line[2] <= self.cfg.water_height {
            self.landed = true;
        }
        !self.is_finished()
    }

    /// With a still support only damping acts, so a step must not add energy: the semi-implicit
    /// update's oscillating error is removed by shrinking the line velocity.
    fn cap_energy(&mut self, limit: T) {
        let potential = self.cfg.gravity * (self.tip[2] + self.line[2] - self.cfg.water_height);
        let kinetic = T::lit(0.5) * dot(self.line_velocity, self.line_velocity);
        if potential + kinetic <= limit {
            return;
        }
        let allowed = (limit - potential).max(T::zero());
        let factor = if kinetic > T::zero() {
            (allowed / kinetic).sqrt()
        } else {
            T::zero()
        };
        self.line_velocity = scale(self.line_velocity, factor);
    }

    /// Runs to the end and reports the noiseless landing.
    pub fn run(mut self) -> Landing<T> {
        while self.step() {}
        self.landing()
    }

    pub fn landing(&self) -> Landing<T> {
        let hook = add(self.tip, self.line);
        Landing {
            point: TaskPoint::new(hook[0], hook[1]),
            timed_out: !self.landed,
        }
    }
}

/// Noiseless outcome of `a`. Pure function of the action and the configuration.
pub fn simulate<T: Scalar>(a: &Action<T>, cfg: &EnvironmentConfig<T>) -> Landing<T> {
    Simulation::new(a, cfg).run()
}

/// Outcome of the fixed initial state: the hook hanging below the extended arm.
pub fn rest_outcome<T: Scalar>(cfg: &EnvironmentConfig<T>) -> TaskPoint<T> {
    let tip = forward_kinematics(&[T::zero(); JOINTS], cfg);
    TaskPoint::new(tip[0], tip[1])
}

/// One environment instance with its own noise stream.
#[derive(Debug, Clone)]
pub struct FishingEnv<T: Scalar> {
    cfg: EnvironmentConfig<T>,
    noise: Rng,
}

impl<T: Scalar> FishingEnv<T> {
    pub fn new(cfg: EnvironmentConfig<T>) -> Result<Self> {
        cfg.validate()?;
        let noise = rng::stream(cfg.seed, rng::tag::ENV_NOISE);
        Ok(Self { cfg, noise })
    }

    pub fn config(&self) -> &EnvironmentConfig<T> {
        &self.cfg
    }

    /// Executes `a` from the initial state and returns the landing plus outcome noise.
    pub fn execute(&mut self, a: &Action<T>) -> Landing<T> {
        let mut landing = simulate(a, &self.cfg);
        if self.cfg.noise_sigma > T::zero() {
            let n1: f64 = self.noise.sample(StandardNormal);
            let n2: f64 = self.noise.sample(StandardNormal);
            landing.point.y1 = landing.point.y1 + self.cfg.noise_sigma * T::lit(n1);
            landing.point.y2 = landing.point.y2 + self.cfg.noise_sigma * T::lit(n2);
        }
        landing
    }

    pub fn execute_noiseless(&self, a: &Action<T>) -> Landing<T> {
        simulate(a, &self.cfg)
    }

    pub fn rest_outcome(&self) -> TaskPoint<T> {
        rest_outcome(&self.cfg)
    }
}
