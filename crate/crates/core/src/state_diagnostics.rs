//! Husimi portraits and single-spin entanglement entropy of collective states.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::floquet_engine::{for_each_state, FloquetConfig};
use crate::spin_core::{coherent_magnitudes, hermitian_eigen, SpinIrrep};
use crate::{CMat, CVec};

const CLAMP: f64 = 1e-14;

/// Uniform node counts over `θ ∈ [0, π]` and `φ ∈ [−π, π]`, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridSpec {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n_theta: 201, n_phi: 201 }
    }
}

impl GridSpec {
    pub fn thetas(&self) -> Vec<f64> {
        linspace(0.0, PI, self.n_theta)
    }

    pub fn phis(&self) -> Vec<f64> {
        linspace(-PI, PI, self.n_phi)
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

#[derive(Clone, Debug)]
pub struct PhaseSpaceGrid {
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    /// Row-major over `θ`: `q[i * n_phi + k]` is `Q(θ_i, φ_k)`.
    pub q: Vec<f64>,
}

impl PhaseSpaceGrid {
    pub fn at(&self, i: usize, k: usize) -> f64 {
        self.q[i * self.phis.len() + k]
    }
}

/// `Q(θ, φ) = |⟨θ,φ|ψ⟩|²` on a grid.
pub fn husimi_q(psi: &CVec, grid: GridSpec) -> Result<PhaseSpaceGrid> {
    if grid.n_theta == 0 || grid.n_phi == 0 {
        return Err(invalid("grid needs at least one node per axis"));
    }
    check_norm(psi)?;
    let thetas = grid.thetas();
    let phis = grid.phis();
    let q = thetas
        .par_iter()
        .flat_map_iter(|&theta| husimi_row(psi, theta, &phis))
        .collect();
    Ok(PhaseSpaceGrid { thetas, phis, q })
}

/// `Q` at a single phase-space point.
pub fn husimi_at(psi: &CVec, theta: f64, phi: f64) -> f64 {
    husimi_row(psi, theta, &[phi])[0]
}

// ⟨θ,φ|ψ⟩ = Σ_k mag_k(θ) e^{ikφ} ψ_k, evaluated by Horner in e^{iφ}
fn husimi_row(psi: &CVec, theta: f64, phis: &[f64]) -> Vec<f64> {
    let n = psi.len() - 1;
    let weighted: Vec<Complex64> = coherent_magnitudes(n, theta)
        .into_iter()
        .zip(psi.iter())
        .map(|(m, z)| *z * m)
        .collect();
    phis.iter()
        .map(|&phi| {
            let z = Complex64::from_polar(1.0, phi);
            let amp = weighted
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c);
            amp.norm_sqr()
        })
        .collect()
}

fn check_norm(psi: &CVec) -> Result<()> {
    let norm = psi.norm();
    if psi.is_empty() || (norm - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("state is not normalized (norm {norm})")));
    }
    Ok(())
}

/// Reduced state of one spin-1/2, basis `(|↑⟩, |↓⟩)`.
#[derive(Clone, Debug)]
pub struct QubitDensity {
    pub matrix: CMat,
    pub bloch: [f64; 3],
}

/// One-spin reduction of a symmetric state via `b_α = 2⟨J_α⟩/N`,
/// `ρ = (I + b·σ)/2`.
pub fn single_spin_rdm(psi: &CVec, irrep: &SpinIrrep) -> Result<QubitDensity> {
    if psi.len() != irrep.dim() {
        return Err(invalid(format!(
            "state has dimension {}, expected {}",
            psi.len(),
            irrep.dim()
        )));
    }
    let e = irrep.expectations(psi);
    let scale = 2.0 / irrep.n() as f64;
    let b = [e[0] * scale, e[1] * scale, e[2] * scale];
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let matrix = CMat::from_row_slice(
        2,
        2,
        &[
            c((1.0 + b[2]) / 2.0, 0.0),
            c(b[0] / 2.0, -b[1] / 2.0),
            c(b[0] / 2.0, b[1] / 2.0),
            c((1.0 - b[2]) / 2.0, 0.0),
        ],
    );
    Ok(QubitDensity { matrix, bloch: b })
}

/// `−Σ λ log₂ λ` over the spectrum of a density matrix, eigenvalues below
/// `1e−14` treated as zero.
pub fn von_neumann_entropy(rho: &CMat) -> Result<f64> {
    let trace: Complex64 = rho.trace();
    if (trace - 1.0).norm() > 1e-8 {
        return Err(invalid(format!("density matrix trace is {trace}, expected 1")));
    }
    let eig = hermitian_eigen(rho)?;
    Ok(entropy_of_spectrum(&eig.values))
}

pub(crate) fn entropy_of_spectrum(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&l| l > CLAMP)
        .map(|&l| -l * l.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Single-spin entropy along a run.
#[derive(Clone, Debug, Default)]
pub struct EntropySeries {
    pub times: Vec<f64>,
    pub entropy: Vec<f64>,
    pub bloch: Vec<[f64; 3]>,
}

pub fn entropy_series(irrep: &SpinIrrep, config: &FloquetConfig, psi0: &CVec) -> Result<EntropySeries> {
    check_norm(psi0)?;
    let mut out = EntropySeries::default();
    let mut err = None;
    for_each_state(irrep, config, psi0, |_, t, psi| {
        if err.is_some() {
            return;
        }
        match single_spin_rdm(psi, irrep).and_then(|r| Ok((von_neumann_entropy(&r.matrix)?, r.bloch))) {
            Ok((s, b)) => {
                out.times.push(t);
                out.entropy.push(s);
                out.bloch.push(b);
            }
            Err(e) => err = Some(e),
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}
