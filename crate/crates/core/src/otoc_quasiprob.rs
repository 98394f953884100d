//! OTOC `F(t)`, squared commutator `C(t)`, the four-index OTOC
//! quasiprobability and its cumulative nonclassicality `Ñ(t)`.
//!
//! Both butterfly operators are functions of `Jy`, so they share its
//! eigenprojectors `Π_k = |y_k⟩⟨y_k|`. Heisenberg operators are
//! `W(t) = U_t† W U_t` with `U_t` the forward propagator.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::floquet_engine::{for_each_sample, FloquetConfig};
use crate::spin_core::{jy_eigensystem, EigenSystem, SpinIrrep};
use crate::{CMat, CVec};

const NORM_TOL: f64 = 1e-9;

/// Eigenvalue convention of `V = W(0)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ButterflyVariant {
    /// `exp(i Jy / √(2j))`, unitary.
    #[default]
    Unitary,
    /// `exp(Jy / √(2j))`, Hermitian positive-definite.
    HermitianLiteral,
}

#[derive(Clone, Debug)]
pub struct ButterflyOperators {
    variant: ButterflyVariant,
    basis: EigenSystem,
    eigenvalues: Vec<Complex64>,
    op: CMat,
    op_adj: CMat,
}

impl ButterflyOperators {
    pub fn new(irrep: &SpinIrrep, variant: ButterflyVariant) -> Result<Self> {
        let basis = jy_eigensystem(irrep)?;
        Ok(Self::from_basis(irrep, basis, variant))
    }

    /// Builds the operator pair on an existing `Jy` eigenbasis.
    pub fn from_basis(irrep: &SpinIrrep, basis: EigenSystem, variant: ButterflyVariant) -> Self {
        let scale = 1.0 / (2.0 * irrep.j()).sqrt();
        // exact m values; the eigenbasis is ordered by ascending m
        let eigenvalues: Vec<Complex64> = (0..irrep.dim())
            .map(|k| {
                let arg = irrep.m_of(k) * scale;
                match variant {
                    ButterflyVariant::Unitary => Complex64::from_polar(1.0, arg),
                    ButterflyVariant::HermitianLiteral => Complex64::new(arg.exp(), 0.0),
                }
            })
            .collect();
        let op = basis.compose(&eigenvalues);
        let op_adj = op.adjoint();
        Self {
            variant,
            basis,
            eigenvalues,
            op,
            op_adj,
        }
    }

    pub fn variant(&self) -> ButterflyVariant {
        self.variant
    }

    /// Shared eigenbasis; column `k` is `|y_k⟩`.
    pub fn basis(&self) -> &EigenSystem {
        &self.basis
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    /// `V = W(0)`.
    pub fn operator(&self) -> &CMat {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

fn check_state(psi: &CVec, dim: usize) -> Result<()> {
    if psi.len() != dim {
        return Err(invalid(format!(
            "state has dimension {}, expected {dim}",
            psi.len()
        )));
    }
    let norm = psi.norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(invalid(format!("state is not normalized (norm {norm})")));
    }
    Ok(())
}

fn check_unitary_shape(u: &CMat, dim: usize) -> Result<()> {
    if u.nrows() != dim || u.ncols() != dim {
        return Err(invalid(format!(
            "propagator is {}x{}, expected {dim}x{dim}",
            u.nrows(),
            u.ncols()
        )));
    }
    Ok(())
}

// W(t) x = U† W U x
fn heisenberg_apply(u: &CMat, w: &CMat, x: &CVec) -> CVec {
    u.ad_mul(&(w * (u * x)))
}

/// `⟨ψ| W†(t) V† W(t) V |ψ⟩`, by matrix-vector products only.
pub fn compute_f(u: &CMat, ops: &ButterflyOperators, psi: &CVec) -> Result<Complex64> {
    check_unitary_shape(u, ops.dim())?;
    check_state(psi, ops.dim())?;
    let mut x = &ops.op * psi;
    x = heisenberg_apply(u, &ops.op, &x);
    x = &ops.op_adj * x;
    x = heisenberg_apply(u, &ops.op_adj, &x);
    Ok(psi.dotc(&x))
}

/// `⟨ψ| [W(t),V]† [W(t),V] |ψ⟩ = ‖[W(t),V]ψ‖²`.
pub fn compute_c(u: &CMat, ops: &ButterflyOperators, psi: &CVec) -> Result<f64> {
    check_unitary_shape(u, ops.dim())?;
    check_state(psi, ops.dim())?;
    let wv = heisenberg_apply(u, &ops.op, &(&ops.op * psi));
    let vw = &ops.op * heisenberg_apply(u, &ops.op, psi);
    Ok((wv - vw).norm_squared())
}

/// `p̃(v₁, w₂, v₂, w₃)` stored flat, each slot ordered by ascending `Jy`
/// eigenvalue, index `((v₁·d + w₂)·d + v₂)·d + w₃`.
#[derive(Clone, Debug)]
pub struct QuasiprobTensor {
    pub t: f64,
    pub dim: usize,
    pub values: Vec<Complex64>,
}

impl QuasiprobTensor {
    pub fn get(&self, v1: usize, w2: usize, v2: usize, w3: usize) -> Complex64 {
        let d = self.dim;
        self.values[((v1 * d + w2) * d + v2) * d + w3]
    }

    pub fn total(&self) -> Complex64 {
        self.values.iter().sum()
    }

    /// `Σ|p̃| − 1`.
    pub fn nonclassicality(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).sum::<f64>() - 1.0
    }

    /// `Σ v₁ w₂ v₂* w₃* p̃`, which reproduces `F(t)`.
    pub fn otoc(&self, eigenvalues: &[Complex64]) -> Complex64 {
        let d = self.dim;
        let mut acc = Complex64::new(0.0, 0.0);
        for v1 in 0..d {
            for w2 in 0..d {
                let a = eigenvalues[v1] * eigenvalues[w2];
                for v2 in 0..d {
                    let b = a * eigenvalues[v2].conj();
                    for (w3, e3) in eigenvalues.iter().enumerate().take(d) {
                        acc += b * e3.conj() * self.get(v1, w2, v2, w3);
                    }
                }
            }
        }
        acc
    }
}

/// Quasiprobability of a pure state by explicit four-index summation.
/// `O(dim⁴)` memory; meant for small `N`.
pub fn quasiprob_direct(u: &CMat, ops: &ButterflyOperators, psi: &CVec, t: f64) -> Result<QuasiprobTensor> {
    check_state(psi, ops.dim())?;
    let rho = psi * psi.adjoint();
    quasiprob_direct_density(u, ops, &rho, t)
}

/// `Tr(Π_{w₃}^{W(t)} Π_{v₂}^{V} Π_{w₂}^{W(t)} Π_{v₁}^{V} ρ)` for a density
/// matrix `ρ`, with `Π_w^{W(t)} = U†|y_w⟩⟨y_w|U`.
pub fn quasiprob_direct_density(u: &CMat, ops: &ButterflyOperators, rho: &CMat, t: f64) -> Result<QuasiprobTensor> {
    let d = ops.dim();
    check_unitary_shape(u, d)?;
    check_unitary_shape(rho, d)?;
    let v = &ops.basis.vectors;
    // columns are U†|y_w⟩, the eigenvectors of W(t)
    let w_t = u.ad_mul(v);
    // overlap[v][w] = ⟨y_v | U†|y_w⟩
    let overlap = v.ad_mul(&w_t);
    // rho_vw[v][w] = ⟨y_v| ρ |w_t⟩
    let rho_vw = v.ad_mul(&(rho * &w_t));
    let mut values = Vec::with_capacity(d * d * d * d);
    for v1 in 0..d {
        for w2 in 0..d {
            // ⟨w̃₂|v₁⟩
            let a = overlap[(v1, w2)].conj();
            for v2 in 0..d {
                // ⟨v₂|w̃₂⟩
                let b = a * overlap[(v2, w2)];
                for w3 in 0..d {
                    // ⟨w̃₃|v₂⟩ ⟨v₁|ρ|w̃₃⟩
                    values.push(b * overlap[(v2, w3)].conj() * rho_vw[(v1, w3)]);
                }
            }
        }
    }
    Ok(QuasiprobTensor { t, dim: d, values })
}

/// Matrix `M[w, v] = ⟨y_w|U|y_v⟩` of the propagator in the `Jy` eigenbasis.
pub fn eigenbasis_propagator(u: &CMat, ops: &ButterflyOperators) -> CMat {
    let v = &ops.basis.vectors;
    v.ad_mul(&(u * v))
}

/// `Ñ = |s_t|ᵀ |M| |M|ᵀ |M| |s| − 1` with `s = ⟨y_v|ψ⟩`, `s_t = M s`.
pub fn nonclassicality_fast(u: &CMat, ops: &ButterflyOperators, psi: &CVec) -> Result<f64> {
    check_unitary_shape(u, ops.dim())?;
    check_state(psi, ops.dim())?;
    let m = eigenbasis_propagator(u, ops);
    let s = ops.basis.vectors.ad_mul(psi);
    Ok(nonclassicality_from_parts(&m, &s))
}

/// Factorized chain of the fast path given `M` and `s`.
pub fn nonclassicality_from_parts(m: &CMat, s: &CVec) -> f64 {
    let d = s.len();
    let abs_m: Vec<f64> = m.iter().map(|z| z.norm()).collect();
    // column-major: abs_m[r + c*d] = |M[r, c]|
    let at = |r: usize, c: usize| abs_m[r + c * d];
    let abs_s: Vec<f64> = s.iter().map(|z| z.norm()).collect();
    let s_t = m * s;

    // a = |M| |s|
    let a: Vec<f64> = (0..d).map(|w| (0..d).map(|v| at(w, v) * abs_s[v]).sum()).collect();
    // b = |M|ᵀ a
    let b: Vec<f64> = (0..d).map(|v| (0..d).map(|w| at(w, v) * a[w]).sum()).collect();
    // c = |M| b
    let c: Vec<f64> = (0..d).map(|w| (0..d).map(|v| at(w, v) * b[v]).sum()).collect();
    s_t.iter().zip(&c).map(|(x, y)| x.norm() * y).sum::<f64>() - 1.0
}

/// Sampled `F(t)` and `C(t)`.
#[derive(Clone, Debug, Default)]
pub struct OtocSeries {
    pub times: Vec<f64>,
    pub f: Vec<Complex64>,
    pub c: Vec<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct NonclassicalitySeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn otoc_series(
    irrep: &SpinIrrep,
    config: &FloquetConfig,
    ops: &ButterflyOperators,
    psi: &CVec,
) -> Result<OtocSeries> {
    check_state(psi, irrep.dim())?;
    let mut out = OtocSeries::default();
    let mut err = None;
    for_each_sample(irrep, config, |_, t, u| {
        if err.is_some() {
            return;
        }
        match (compute_f(u, ops, psi), compute_c(u, ops, psi)) {
            (Ok(f), Ok(c)) => {
                out.times.push(t);
                out.f.push(f);
                out.c.push(c);
            }
            (Err(e), _) | (_, Err(e)) => err = Some(e),
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

pub fn nonclassicality_series(
    irrep: &SpinIrrep,
    config: &FloquetConfig,
    ops: &ButterflyOperators,
    psi: &CVec,
) -> Result<NonclassicalitySeries> {
    check_state(psi, irrep.dim())?;
    let s = ops.basis.vectors.ad_mul(psi);
    let mut out = NonclassicalitySeries::default();
    for_each_sample(irrep, config, |_, t, u| {
        let m = eigenbasis_propagator(u, ops);
        out.times.push(t);
        out.values.push(nonclassicality_from_parts(&m, &s));
    })?;
    Ok(out)
}
