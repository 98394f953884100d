//! Collective angular-momentum algebra in the Dicke basis.
//!
//! Basis index `k` corresponds to `|j, m⟩` with `m = k − j`, so index 0 is the
//! lowest-weight state `|j, −j⟩`.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::{max_abs, CMat, CVec};

const HERMITIAN_TOL: f64 = 1e-12;

/// Spin-`N/2` irreducible representation of the collective operators.
#[derive(Clone, Debug)]
pub struct SpinIrrep {
    n: usize,
    jx: CMat,
    jy: CMat,
    jz: CMat,
}

impl SpinIrrep {
    /// Builds `Jx, Jy, Jz` for `N` spin-1/2 particles from the ladder elements
    /// `⟨j,m+1|J₊|j,m⟩ = √(j(j+1) − m(m+1))`.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("spin count N must be at least 1"));
        }
        let dim = n + 1;
        let j = n as f64 / 2.0;
        let mut jp = CMat::zeros(dim, dim);
        let mut jz = CMat::zeros(dim, dim);
        for k in 0..dim {
            let m = k as f64 - j;
            jz[(k, k)] = Complex64::new(m, 0.0);
            if k + 1 < dim {
                let amp = (j * (j + 1.0) - m * (m + 1.0)).sqrt();
                jp[(k + 1, k)] = Complex64::new(amp, 0.0);
            }
        }
        let jm = jp.adjoint();
        let jx = (&jp + &jm).scale(0.5);
        // (J₊ − J₋) / 2i
        let jy = (&jp - &jm) * Complex64::new(0.0, -0.5);
        Ok(Self { n, jx, jy, jz })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn j(&self) -> f64 {
        self.n as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    pub fn jx(&self) -> &CMat {
        &self.jx
    }

    pub fn jy(&self) -> &CMat {
        &self.jy
    }

    pub fn jz(&self) -> &CMat {
        &self.jz
    }

    /// `m` value of basis index `k`.
    pub fn m_of(&self, k: usize) -> f64 {
        k as f64 - self.j()
    }

    /// Expectation values `(⟨Jx⟩, ⟨Jy⟩, ⟨Jz⟩)` in a (normalized) state.
    pub fn expectations(&self, psi: &CVec) -> [f64; 3] {
        [
            expectation(&self.jx, psi),
            expectation(&self.jy, psi),
            expectation(&self.jz, psi),
        ]
    }
}

/// Real part of `⟨ψ|A|ψ⟩`.
pub fn expectation(a: &CMat, psi: &CVec) -> f64 {
    psi.dotc(&(a * psi)).re
}

/// Ascending spectral decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: CMat,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Rank-1 projector onto eigenvector `k`.
    pub fn projector(&self, k: usize) -> CMat {
        let v = self.vectors.column(k);
        v * v.adjoint()
    }

    /// `Σ_k f(k) P_k` for arbitrary complex eigenvalue weights.
    pub fn compose(&self, weights: &[Complex64]) -> CMat {
        assert_eq!(weights.len(), self.dim());
        let mut scaled = self.vectors.clone();
        for (k, w) in weights.iter().enumerate() {
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= *w);
        }
        scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMat {
        let w: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.compose(&w)
    }
}

fn check_hermitian(a: &CMat) -> Result<()> {
    if !a.is_square() {
        return Err(invalid(format!(
            "matrix must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let defect = max_abs(&(a - a.adjoint()));
    if defect > HERMITIAN_TOL {
        return Err(invalid(format!(
            "matrix is not Hermitian (max |A - A^dagger| = {defect:e})"
        )));
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(a: &CMat) -> Result<EigenSystem> {
    check_hermitian(a)?;
    // symmetrize so the solver sees an exactly Hermitian input
    let sym = (a + a.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let dim = order.len();
    let mut vectors = CMat::zeros(dim, dim);
    let mut values = Vec::with_capacity(dim);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(EigenSystem { values, vectors })
}

/// `exp(scale · A)` for Hermitian `A`, through its eigendecomposition.
pub fn hermitian_exp(a: &CMat, scale: Complex64) -> Result<CMat> {
    if scale == Complex64::new(0.0, 0.0) {
        check_hermitian(a)?;
        return Ok(CMat::identity(a.nrows(), a.ncols()));
    }
    let eig = hermitian_eigen(a)?;
    let w: Vec<Complex64> = eig.values.iter().map(|&v| (scale * v).exp()).collect();
    Ok(eig.compose(&w))
}

/// Spin coherent state `|θ, φ⟩`.
#[derive(Clone, Debug)]
pub struct CoherentState {
    pub theta: f64,
    pub phi: f64,
    pub psi: CVec,
}

/// `exp(−iθ(sin φ Jx − cos φ Jy)) |j, −j⟩`.
pub fn coherent_state(irrep: &SpinIrrep, theta: f64, phi: f64) -> Result<CoherentState> {
    let generator = irrep.jx().scale(phi.sin()) - irrep.jy().scale(phi.cos());
    let rot = hermitian_exp(&generator, Complex64::new(0.0, -theta))?;
    let psi = rot.column(0).into_owned();
    Ok(CoherentState { theta, phi, psi })
}

/// Closed-form amplitudes of `|θ, φ⟩`:
/// `⟨j,m|θ,φ⟩ = √C(2j, j+m) cos^{j−m}(θ/2) sin^{j+m}(θ/2) e^{−i(j+m)φ}`.
///
/// Agrees with [`coherent_state`] including the global phase; used where many
/// states are needed (Husimi grids) and an eigendecomposition per node is too
/// expensive.
pub fn coherent_amplitudes(n: usize, theta: f64, phi: f64) -> CVec {
    let mut out = CVec::zeros(n + 1);
    let magnitudes = coherent_magnitudes(n, theta);
    for (k, mag) in magnitudes.into_iter().enumerate() {
        out[k] = Complex64::from_polar(mag, -(k as f64) * phi);
    }
    out
}

/// `√C(N, k) cos^{N−k}(θ/2) sin^{k}(θ/2)` for `k = 0..=N`.
pub(crate) fn coherent_magnitudes(n: usize, theta: f64) -> Vec<f64> {
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    let ln_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..=n).scan(0.0, |acc, i| {
            *acc += (i as f64).ln();
            Some(*acc)
        }))
        .collect();
    (0..=n)
        .map(|k| {
            let ln_binom = ln_fact[n] - ln_fact[k] - ln_fact[n - k];
            (0.5 * ln_binom).exp() * c.powi((n - k) as i32) * s.powi(k as i32)
        })
        .collect()
}

/// Eigendecomposition of `Jy`; shared eigenbasis of the butterfly operators.
pub fn jy_eigensystem(irrep: &SpinIrrep) -> Result<EigenSystem> {
    hermitian_eigen(irrep.jy())
}
