//! Kick and twist propagators and the accumulated Floquet unitary.
//!
//! One period applies the twist for `τ` (in `τ/dt` slices) and then the kick,
//! so `U(nτ) = (U_kick · U_twist(τ))ⁿ`. Samples are taken after every slice.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::spin_core::{hermitian_exp, SpinIrrep};
use crate::{CMat, CVec};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FloquetConfig {
    pub kappa: f64,
    pub p: f64,
    pub tau: f64,
    pub dt: f64,
    pub n_kicks: usize,
}

impl Default for FloquetConfig {
    fn default() -> Self {
        Self {
            kappa: 3.0,
            p: PI / 2.0,
            tau: 1.0,
            dt: 1.0 / 20.0,
            n_kicks: 50,
        }
    }
}

impl FloquetConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(invalid(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !self.kappa.is_finite() || !self.p.is_finite() {
            return Err(invalid("kappa and p must be finite"));
        }
        let ratio = self.tau / self.dt;
        let steps = ratio.round();
        if steps < 1.0 || (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
            return Err(invalid(format!(
                "tau/dt must be a positive integer, got {ratio}"
            )));
        }
        Ok(())
    }

    /// Number of `dt` slices per kick period.
    pub fn steps_per_period(&self) -> usize {
        (self.tau / self.dt).round() as usize
    }

    pub fn total_steps(&self) -> usize {
        self.n_kicks * self.steps_per_period()
    }

    /// Number of samples including `t = 0`.
    pub fn n_samples(&self) -> usize {
        self.total_steps() + 1
    }

    /// Sample time of step `k`.
    pub fn time_of(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    /// Sample indices that land on kick times `0, τ, 2τ, …`.
    pub fn kick_sample_indices(&self) -> impl Iterator<Item = usize> {
        let per = self.steps_per_period();
        (0..=self.n_kicks).map(move |n| n * per)
    }
}

/// `exp(−i p Jy)`.
pub fn kick_unitary(irrep: &SpinIrrep, p: f64) -> Result<CMat> {
    hermitian_exp(irrep.jy(), Complex64::new(0.0, -p))
}

/// Diagonal phases of `exp(−i (κ/2jτ) Jz² t)`.
pub fn twist_phases(irrep: &SpinIrrep, kappa: f64, tau: f64, duration: f64) -> Result<Vec<Complex64>> {
    if duration < 0.0 || !duration.is_finite() {
        return Err(invalid(format!(
            "twist duration must be non-negative, got {duration}"
        )));
    }
    if tau <= 0.0 {
        return Err(invalid(format!("tau must be positive, got {tau}")));
    }
    let rate = kappa / (2.0 * irrep.j() * tau);
    Ok((0..irrep.dim())
        .map(|k| {
            let m = irrep.m_of(k);
            Complex64::from_polar(1.0, -rate * m * m * duration)
        })
        .collect())
}

/// `exp(−i (κ/2jτ) Jz² t)` as a dense (diagonal) matrix.
pub fn twist_unitary(irrep: &SpinIrrep, kappa: f64, tau: f64, duration: f64) -> Result<CMat> {
    let phases = twist_phases(irrep, kappa, tau, duration)?;
    Ok(CMat::from_diagonal(&CVec::from_vec(phases)))
}

/// One-period Floquet operator `U_kick · U_twist(τ)`.
pub fn floquet_operator(irrep: &SpinIrrep, config: &FloquetConfig) -> Result<CMat> {
    let kick = kick_unitary(irrep, config.p)?;
    let twist = twist_phases(irrep, config.kappa, config.tau, config.tau)?;
    Ok(scale_columns(kick, &twist))
}

// A · diag(d)
fn scale_columns(mut a: CMat, d: &[Complex64]) -> CMat {
    for (k, w) in d.iter().enumerate() {
        a.column_mut(k).iter_mut().for_each(|z| *z *= *w);
    }
    a
}

// diag(d) · A
pub(crate) fn scale_rows(a: &mut CMat, d: &[Complex64]) {
    for (r, w) in d.iter().enumerate() {
        a.row_mut(r).iter_mut().for_each(|z| *z *= *w);
    }
}

/// Running product of twist slices and kicks.
#[derive(Clone, Debug)]
pub struct UnitaryAccumulator {
    config: FloquetConfig,
    kick: CMat,
    twist_slice: Vec<Complex64>,
    step: usize,
    u: CMat,
}

impl UnitaryAccumulator {
    pub fn new(irrep: &SpinIrrep, config: FloquetConfig) -> Result<Self> {
        config.validate()?;
        let kick = kick_unitary(irrep, config.p)?;
        let twist_slice = twist_phases(irrep, config.kappa, config.tau, config.dt)?;
        Self::from_parts(config, kick, twist_slice)
    }

    /// Accumulator over an arbitrary representation, given its kick matrix and
    /// the diagonal phases of one twist slice.
    pub fn from_parts(config: FloquetConfig, kick: CMat, twist_slice: Vec<Complex64>) -> Result<Self> {
        config.validate()?;
        let dim = twist_slice.len();
        if kick.nrows() != dim || kick.ncols() != dim {
            return Err(invalid("kick and twist dimensions differ"));
        }
        Ok(Self {
            config,
            kick,
            twist_slice,
            step: 0,
            u: CMat::identity(dim, dim),
        })
    }

    pub fn config(&self) -> &FloquetConfig {
        &self.config
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.config.time_of(self.step)
    }

    pub fn unitary(&self) -> &CMat {
        &self.u
    }

    /// Whether the slice just taken ended a period (and so carried a kick).
    pub fn at_kick(&self) -> bool {
        self.step > 0 && self.step.is_multiple_of(self.config.steps_per_period())
    }

    /// Advance by one `dt` slice, kicking at the end of each period.
    pub fn advance(&mut self) {
        scale_rows(&mut self.u, &self.twist_slice);
        self.step += 1;
        if self.at_kick() {
            self.u = &self.kick * &self.u;
        }
    }
}

/// Visits every sample `(index, t, U_t)` of the schedule in order without
/// retaining past snapshots.
pub fn for_each_sample<F>(irrep: &SpinIrrep, config: &FloquetConfig, mut visit: F) -> Result<()>
where
    F: FnMut(usize, f64, &CMat),
{
    let mut acc = UnitaryAccumulator::new(irrep, *config)?;
    visit(0, 0.0, acc.unitary());
    for _ in 0..config.total_steps() {
        acc.advance();
        visit(acc.step_index(), acc.time(), acc.unitary());
    }
    Ok(())
}

/// Visits the evolved state `ψ_t = U_t ψ₀` at every sample, stepping the
/// vector directly (`O(dim²)` per kick, `O(dim)` per twist slice).
pub fn for_each_state<F>(irrep: &SpinIrrep, config: &FloquetConfig, psi0: &CVec, mut visit: F) -> Result<()>
where
    F: FnMut(usize, f64, &CVec),
{
    config.validate()?;
    if psi0.len() != irrep.dim() {
        return Err(invalid(format!(
            "state has dimension {}, expected {}",
            psi0.len(),
            irrep.dim()
        )));
    }
    let kick = kick_unitary(irrep, config.p)?;
    let slice = twist_phases(irrep, config.kappa, config.tau, config.dt)?;
    let per = config.steps_per_period();
    let mut psi = psi0.clone();
    visit(0, 0.0, &psi);
    for step in 1..=config.total_steps() {
        psi.iter_mut().zip(&slice).for_each(|(z, w)| *z *= *w);
        if step % per == 0 {
            psi = &kick * psi;
        }
        visit(step, config.time_of(step), &psi);
    }
    Ok(())
}

/// All snapshots `(t, U_t)` for `t = 0, dt, …, n_k τ`.
///
/// Holds `n_samples` dense matrices; prefer [`for_each_sample`] for large `N`.
pub fn evolve_schedule(config: &FloquetConfig, irrep: &SpinIrrep) -> Result<Vec<(f64, CMat)>> {
    let mut out = Vec::with_capacity(config.n_samples());
    for_each_sample(irrep, config, |_, t, u| out.push((t, u.clone())))?;
    Ok(out)
}

/// Propagator at kick count `n` by direct Floquet power.
pub fn floquet_power(irrep: &SpinIrrep, config: &FloquetConfig, n: usize) -> Result<CMat> {
    let f = floquet_operator(irrep, config)?;
    let mut u = CMat::identity(irrep.dim(), irrep.dim());
    for _ in 0..n {
        u = &f * u;
    }
    Ok(u)
}
