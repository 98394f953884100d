//! Semiclassical stroboscopic map of the kicked top (`p = π/2`).
//!
//! The map is only defined for a quarter-turn kick; comparisons against the
//! quantum dynamics must use `p = π/2`.

/// Normalized angular-momentum direction `(⟨Jx⟩, ⟨Jy⟩, ⟨Jz⟩)/j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassicalState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl ClassicalState {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// `(θ, φ)` with `θ = arccos(−Z)`, `φ = atan2(Y, X)`.
    pub fn angles(&self) -> (f64, f64) {
        ((-self.z).clamp(-1.0, 1.0).acos(), self.y.atan2(self.x))
    }
}

/// Order in which twist and kick act within one period.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MapOrder {
    /// Twist about `z` then quarter-turn kick about `y`; the classical limit
    /// of `U_kick · U_twist(τ)`.
    #[default]
    TwistThenKick,
    /// Kick first, then twist:
    /// `X' = Z cos κX + Y sin κX`, `Y' = −Z sin κX + Y cos κX`, `Z' = −X`.
    KickThenTwist,
}

fn twist(s: ClassicalState, kappa: f64) -> ClassicalState {
    let (sin, cos) = (kappa * s.z).sin_cos();
    ClassicalState::new(s.x * cos - s.y * sin, s.x * sin + s.y * cos, s.z)
}

fn untwist(s: ClassicalState, kappa: f64) -> ClassicalState {
    twist(s, -kappa)
}

fn kick(s: ClassicalState) -> ClassicalState {
    ClassicalState::new(s.z, s.y, -s.x)
}

fn unkick(s: ClassicalState) -> ClassicalState {
    ClassicalState::new(-s.z, s.y, s.x)
}

/// One period of the stroboscopic map in the Floquet order (twist, then kick).
pub fn kick_map(s: ClassicalState, kappa: f64) -> ClassicalState {
    step(s, kappa, MapOrder::TwistThenKick)
}

pub fn step(s: ClassicalState, kappa: f64, order: MapOrder) -> ClassicalState {
    match order {
        MapOrder::TwistThenKick => kick(twist(s, kappa)),
        MapOrder::KickThenTwist => twist(kick(s), kappa),
    }
}

/// Algebraic inverse of [`step`].
pub fn inverse_step(s: ClassicalState, kappa: f64, order: MapOrder) -> ClassicalState {
    match order {
        MapOrder::TwistThenKick => untwist(unkick(s), kappa),
        MapOrder::KickThenTwist => unkick(untwist(s, kappa)),
    }
}

/// Bloch direction of the coherent state `|θ₀, φ₀⟩`.
pub fn initial_condition(theta0: f64, phi0: f64) -> ClassicalState {
    ClassicalState::new(
        theta0.sin() * phi0.cos(),
        theta0.sin() * phi0.sin(),
        -theta0.cos(),
    )
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub states: Vec<ClassicalState>,
    pub kappa: f64,
}

impl Trajectory {
    /// Width of the visited azimuth range, `max φ − min φ`.
    pub fn phi_spread(&self) -> f64 {
        let (lo, hi) = self
            .states
            .iter()
            .map(|s| s.angles().1)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p), hi.max(p))
            });
        hi - lo
    }
}

/// `n_kicks + 1` states starting at `initial_condition(theta0, phi0)`.
pub fn trajectory(theta0: f64, phi0: f64, kappa: f64, n_kicks: usize) -> Trajectory {
    trajectory_with_order(theta0, phi0, kappa, n_kicks, MapOrder::default())
}

pub fn trajectory_with_order(
    theta0: f64,
    phi0: f64,
    kappa: f64,
    n_kicks: usize,
    order: MapOrder,
) -> Trajectory {
    let mut states = Vec::with_capacity(n_kicks + 1);
    let mut s = initial_condition(theta0, phi0);
    states.push(s);
    for _ in 0..n_kicks {
        s = step(s, kappa, order);
        states.push(s);
    }
    Trajectory { states, kappa }
}
