//! Full `2^N`-dimensional kicked-top propagator, its channel state on `2N`
//! qubits and the tripartite mutual information of a `1:(N−1)` partition.
//!
//! Qubit `q` of an `n`-qubit register is bit `n−1−q` of the basis index
//! (qubit 0 most significant); bit value 0 is spin up (`σz = +1`). In the
//! channel state qubits `0..N` are inputs and `N..2N` outputs.

use num_complex::Complex64;

use crate::error::{invalid, KickedTopError, Result};
use crate::floquet_engine::{FloquetConfig, UnitaryAccumulator};
use crate::spin_core::{hermitian_exp, hermitian_eigen, SpinIrrep};
use crate::state_diagnostics::entropy_of_spectrum;
use crate::{CMat, CVec};

/// Largest spin count for which the channel state is built.
pub const MAX_CHANNEL_SPINS: usize = 8;

fn check_capacity(n: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("spin count N must be at least 1"));
    }
    if n > MAX_CHANNEL_SPINS {
        return Err(KickedTopError::Capacity(format!(
            "channel state for N={n} needs 4^{n} amplitudes; at most N={MAX_CHANNEL_SPINS} is supported"
        )));
    }
    Ok(())
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Pauli matrices `(σx, σy, σz)` in the `(|↑⟩, |↓⟩)` basis.
pub fn pauli() -> [CMat; 3] {
    [
        CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]),
        CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]),
        CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]),
    ]
}

/// `σ` acting on qubit `site` of an `n`-qubit register.
pub fn embed_single(op: &CMat, site: usize, n: usize) -> CMat {
    let mut out = CMat::identity(1, 1);
    for q in 0..n {
        out = if q == site {
            out.kronecker(op)
        } else {
            out.kronecker(&CMat::identity(2, 2))
        };
    }
    out
}

/// Collective `J_α = ½ Σ_i σ_α^i` on the full `2^N` space.
pub fn full_collective(n: usize) -> [CMat; 3] {
    let dim = 1usize << n;
    let mut out = [CMat::zeros(dim, dim), CMat::zeros(dim, dim), CMat::zeros(dim, dim)];
    for (a, sigma) in pauli().iter().enumerate() {
        for q in 0..n {
            out[a] += embed_single(sigma, q, n).scale(0.5);
        }
    }
    out
}

/// Isometry from the Dicke basis into the `2^N` space; column `k` is the
/// normalized uniform superposition of basis states with `k` spins up.
pub fn dicke_isometry(n: usize) -> CMat {
    let dim = 1usize << n;
    let mut out = CMat::zeros(dim, n + 1);
    let mut counts = vec![0usize; n + 1];
    for idx in 0..dim {
        counts[n - idx.count_ones() as usize] += 1;
    }
    for idx in 0..dim {
        let up = n - idx.count_ones() as usize;
        out[(idx, up)] = c(1.0 / (counts[up] as f64).sqrt(), 0.0);
    }
    out
}

/// Unitary on the full `2^N` space generated by collective operators.
#[derive(Clone, Debug)]
pub struct FullSpaceUnitary {
    pub n: usize,
    pub u: CMat,
}

fn full_kick(n: usize, p: f64) -> Result<CMat> {
    // exp(−i p Jy) factorizes into single-spin rotations exp(−i p σy / 2)
    let [_, sy, _] = pauli();
    let single = hermitian_exp(&sy.scale(0.5), c(0.0, -p))?;
    let mut out = CMat::identity(1, 1);
    for _ in 0..n {
        out = out.kronecker(&single);
    }
    Ok(out)
}

fn full_twist_phases(n: usize, kappa: f64, tau: f64, duration: f64) -> Vec<Complex64> {
    let j = n as f64 / 2.0;
    let rate = kappa / (2.0 * j * tau);
    (0..1usize << n)
        .map(|idx| {
            let m = (n as f64 - 2.0 * idx.count_ones() as f64) / 2.0;
            Complex64::from_polar(1.0, -rate * m * m * duration)
        })
        .collect()
}

/// Accumulator running the kicked-top schedule on the full space.
pub fn full_accumulator(n: usize, config: FloquetConfig) -> Result<UnitaryAccumulator> {
    check_capacity(n)?;
    config.validate()?;
    let kick = full_kick(n, config.p)?;
    let slice = full_twist_phases(n, config.kappa, config.tau, config.dt);
    UnitaryAccumulator::from_parts(config, kick, slice)
}

/// Full-space propagator at time `t`: `U_twist(t − nτ) · (U_kick U_twist(τ))ⁿ`
/// with `n` the number of completed periods.
pub fn lift_floquet(n: usize, config: &FloquetConfig, t: f64) -> Result<FullSpaceUnitary> {
    check_capacity(n)?;
    config.validate()?;
    if t < 0.0 || !t.is_finite() {
        return Err(invalid(format!("time must be non-negative, got {t}")));
    }
    let periods = (t / config.tau + 1e-9).floor() as usize;
    let remainder = (t - periods as f64 * config.tau).max(0.0);
    let kick = full_kick(n, config.p)?;
    let period_twist = full_twist_phases(n, config.kappa, config.tau, config.tau);
    let dim = 1usize << n;
    let mut u = CMat::identity(dim, dim);
    for _ in 0..periods {
        crate::floquet_engine::scale_rows(&mut u, &period_twist);
        u = &kick * u;
    }
    let tail = full_twist_phases(n, config.kappa, config.tau, remainder);
    crate::floquet_engine::scale_rows(&mut u, &tail);
    Ok(FullSpaceUnitary { n, u })
}

/// Pure state of `2N` qubits representing a unitary channel.
#[derive(Clone, Debug)]
pub struct ChannelState {
    pub n: usize,
    pub amplitudes: CVec,
}

impl ChannelState {
    pub fn n_qubits(&self) -> usize {
        2 * self.n
    }

    pub fn input(&self, i: usize) -> usize {
        i
    }

    pub fn output(&self, i: usize) -> usize {
        self.n + i
    }
}

/// `|U⟩ = 2^{−N/2} Σ_{m,m'} u_{m',m} |m⟩_in |m'⟩_out`.
pub fn channel_state(u: &FullSpaceUnitary) -> Result<ChannelState> {
    check_capacity(u.n)?;
    let dim = 1usize << u.n;
    if u.u.nrows() != dim || u.u.ncols() != dim {
        return Err(invalid("unitary dimension does not match 2^N"));
    }
    let norm = 1.0 / (dim as f64).sqrt();
    let mut amps = CVec::zeros(dim * dim);
    for m in 0..dim {
        for mp in 0..dim {
            amps[(m << u.n) | mp] = u.u[(mp, m)] * norm;
        }
    }
    Ok(ChannelState { n: u.n, amplitudes: amps })
}

fn check_subset(qubits: &[usize], n_qubits: usize) -> Result<()> {
    if qubits.is_empty() {
        return Err(invalid("qubit subset must be nonempty"));
    }
    let mut seen = vec![false; n_qubits];
    for &q in qubits {
        if q >= n_qubits {
            return Err(invalid(format!("qubit {q} out of range 0..{n_qubits}")));
        }
        if std::mem::replace(&mut seen[q], true) {
            return Err(invalid(format!("qubit {q} listed twice")));
        }
    }
    Ok(())
}

// Ψ[keep, env] with keep qubits in the listed order
fn bipartition(state: &CVec, n_qubits: usize, keep: &[usize]) -> CMat {
    let env: Vec<usize> = (0..n_qubits).filter(|q| !keep.contains(q)).collect();
    let bit = |idx: usize, q: usize| (idx >> (n_qubits - 1 - q)) & 1;
    let gather = |idx: usize, qs: &[usize]| qs.iter().fold(0usize, |acc, &q| (acc << 1) | bit(idx, q));
    let mut psi = CMat::zeros(1 << keep.len(), 1 << env.len());
    for (idx, amp) in state.iter().enumerate() {
        psi[(gather(idx, keep), gather(idx, &env))] = *amp;
    }
    psi
}

/// Reduced density matrix of `keep` (in listed order) for an `n_qubits`
/// pure state.
pub fn reduced_density(state: &CVec, n_qubits: usize, keep: &[usize]) -> Result<CMat> {
    if state.len() != 1usize << n_qubits {
        return Err(invalid("state length is not 2^n_qubits"));
    }
    check_subset(keep, n_qubits)?;
    let psi = bipartition(state, n_qubits, keep);
    Ok(&psi * psi.adjoint())
}

/// Entropy in bits of a subset of qubits of a pure state. Uses whichever side
/// of the bipartition is smaller.
pub fn pure_state_entropy(state: &CVec, n_qubits: usize, qubits: &[usize]) -> Result<f64> {
    if state.len() != 1usize << n_qubits {
        return Err(invalid("state length is not 2^n_qubits"));
    }
    check_subset(qubits, n_qubits)?;
    if qubits.len() == n_qubits {
        return Ok(0.0);
    }
    let psi = bipartition(state, n_qubits, qubits);
    let gram = if psi.nrows() <= psi.ncols() {
        &psi * psi.adjoint()
    } else {
        psi.ad_mul(&psi)
    };
    let eig = hermitian_eigen(&gram)?;
    Ok(entropy_of_spectrum(&eig.values))
}

pub fn subsystem_entropy(state: &ChannelState, qubits: &[usize]) -> Result<f64> {
    pure_state_entropy(&state.amplitudes, state.n_qubits(), qubits)
}

/// All entropies (bits) of the `A = {input a}`, `C = {output c}`,
/// `D = other outputs` partition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TmiReport {
    pub s_a: f64,
    pub s_c: f64,
    pub s_d: f64,
    pub s_ac: f64,
    pub s_ad: f64,
    pub s_cd: f64,
    pub s_acd: f64,
    pub i_ac: f64,
    pub i_ad: f64,
    pub i_acd: f64,
    pub i3: f64,
}

impl TmiReport {
    /// `S_B` follows from purity of the channel state.
    pub fn s_b(&self) -> f64 {
        self.s_acd
    }
}

pub fn tmi(state: &ChannelState, a: usize, c: usize) -> Result<TmiReport> {
    let n = state.n;
    if a >= n || c >= n {
        return Err(invalid(format!("partition indices must be below N={n}")));
    }
    let qa = state.input(a);
    let qc = state.output(c);
    let d: Vec<usize> = (0..n).filter(|&k| k != c).map(|k| state.output(k)).collect();
    let with = |head: &[usize], tail: &[usize]| -> Vec<usize> {
        head.iter().chain(tail).copied().collect()
    };
    let s = |qs: &[usize]| subsystem_entropy(state, qs);

    let s_a = s(&[qa])?;
    let s_c = s(&[qc])?;
    let s_ac = s(&[qa, qc])?;
    let cd = with(&[qc], &d);
    let s_cd = s(&cd)?;
    let s_acd = s(&with(&[qa], &cd))?;
    // D is empty for N = 1
    let (s_d, s_ad) = if d.is_empty() {
        (0.0, s_a)
    } else {
        (s(&d)?, s(&with(&[qa], &d))?)
    };

    let i_ac = s_a + s_c - s_ac;
    let i_ad = s_a + s_d - s_ad;
    let i_acd = s_a + s_cd - s_acd;
    Ok(TmiReport {
        s_a,
        s_c,
        s_d,
        s_ac,
        s_ad,
        s_cd,
        s_acd,
        i_ac,
        i_ad,
        i_acd,
        i3: i_ac + i_ad - i_acd,
    })
}

/// TMI report at every sample of the schedule.
pub fn tmi_series(n: usize, config: &FloquetConfig, a: usize, c: usize) -> Result<Vec<(f64, TmiReport)>> {
    let mut acc = full_accumulator(n, *config)?;
    let mut out = Vec::with_capacity(config.n_samples());
    let report = |acc: &UnitaryAccumulator| -> Result<(f64, TmiReport)> {
        let full = FullSpaceUnitary { n, u: acc.unitary().clone() };
        Ok((acc.time(), tmi(&channel_state(&full)?, a, c)?))
    };
    out.push(report(&acc)?);
    for _ in 0..config.total_steps() {
        acc.advance();
        out.push(report(&acc)?);
    }
    Ok(out)
}

/// One-spin reduced state of a symmetric state, by embedding into the full
/// space and tracing out every other spin.
pub fn embedded_single_spin_rdm(psi: &CVec, irrep: &SpinIrrep, site: usize) -> Result<CMat> {
    let n = irrep.n();
    check_capacity(n)?;
    if site >= n {
        return Err(invalid(format!("site {site} out of range 0..{n}")));
    }
    let full = dicke_isometry(n) * psi;
    reduced_density(&full, n, &[site])
}
