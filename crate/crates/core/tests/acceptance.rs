//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use kicked_top::channel_tmi::{embedded_single_spin_rdm, tmi_series};
use kicked_top::classical_map::{kick_map, trajectory, ClassicalState};
use kicked_top::cli::Preset;
use kicked_top::floquet_engine::{evolve_schedule, FloquetConfig};
use kicked_top::otoc_quasiprob::{
    compute_c, compute_f, nonclassicality_fast, nonclassicality_series, otoc_series, quasiprob_direct,
    ButterflyOperators, ButterflyVariant,
};
use kicked_top::spectra::power_spectrum_of_series;
use kicked_top::spin_core::{coherent_state, SpinIrrep};
use kicked_top::state_diagnostics::{entropy_series, single_spin_rdm, von_neumann_entropy};
use kicked_top::{CMat, CVec, Complex64, Result};

/// φ-spread ratio chaos/elliptic over 50 classical kicks at κ=3.
const SPREAD_RATIO_FIXTURE: f64 = 837.8719531861242;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

fn psi_for(irrep: &SpinIrrep, preset: Preset) -> CVec {
    coherent_state(irrep, Preset::THETA0, preset.phi0()).unwrap().psi
}

fn window_mean(times: &[f64], values: &[f64], lo: f64, hi: f64) -> f64 {
    let sel: Vec<f64> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= lo - 1e-9 && **t <= hi + 1e-9)
        .map(|(_, v)| *v)
        .collect();
    sel.iter().sum::<f64>() / sel.len() as f64
}

fn within(elapsed: Duration, secs: u64) -> bool {
    elapsed <= Duration::from_secs(secs)
}

fn criterion_1() -> Result<Outcome> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in [2, 3, 4] {
        let irrep = SpinIrrep::new(n)?;
        let ops = ButterflyOperators::new(&irrep, ButterflyVariant::Unitary)?;
        let config = FloquetConfig { n_kicks: 7, ..FloquetConfig::default() };
        let sched = evolve_schedule(&config, &irrep)?;
        for preset in Preset::ALL {
            let psi = psi_for(&irrep, preset);
            for kick in [1usize, 3, 7] {
                let (t, u) = &sched[kick * config.steps_per_period()];
                let direct = quasiprob_direct(u, &ops, &psi, *t)?.nonclassicality();
                let fast = nonclassicality_fast(u, &ops, &psi)?;
                worst = worst.max((direct - fast).abs());
            }
        }
    }
    let el = start.elapsed();
    outcome(worst <= 1e-10 && within(el, 10), format!("max |fast - direct| = {worst:.2e}, {el:.2?}"))
}

fn criterion_2() -> Result<Outcome> {
    let start = Instant::now();
    let irrep = SpinIrrep::new(5)?;
    let ops = ButterflyOperators::new(&irrep, ButterflyVariant::Unitary)?;
    let config = FloquetConfig::default();
    let sched = evolve_schedule(&config, &irrep)?;
    let mut worst_sum = 0.0f64;
    let mut min_n = f64::INFINITY;
    for preset in Preset::ALL {
        let psi = psi_for(&irrep, preset);
        for (t, u) in &sched {
            let total = quasiprob_direct(u, &ops, &psi, *t)?.total();
            worst_sum = worst_sum.max((total - Complex64::new(1.0, 0.0)).norm());
        }
        let s = nonclassicality_series(&irrep, &config, &ops, &psi)?;
        min_n = s.values.iter().copied().fold(min_n, f64::min);
    }
    let el = start.elapsed();
    outcome(
        worst_sum <= 1e-10 && min_n >= -1e-10 && within(el, 5),
        format!("max |sum - 1| = {worst_sum:.2e}, min Ntilde = {min_n:.2e}, {el:.2?}"),
    )
}

fn criterion_3() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for n in [5, 100] {
        let irrep = SpinIrrep::new(n)?;
        let ops = ButterflyOperators::new(&irrep, ButterflyVariant::Unitary)?;
        let config = FloquetConfig { n_kicks: 1, ..FloquetConfig::default() };
        let u0: CMat = CMat::identity(irrep.dim(), irrep.dim());
        for preset in Preset::ALL {
            let psi = psi_for(&irrep, preset);
            let nc = nonclassicality_fast(&u0, &ops, &psi)?;
            let c = compute_c(&u0, &ops, &psi)?;
            let f = compute_f(&u0, &ops, &psi)?;
            let s = entropy_series(&irrep, &config, &psi)?.entropy[0];
            let s_direct = von_neumann_entropy(&single_spin_rdm(&psi, &irrep)?.matrix)?;
            for v in [nc.abs(), c.abs(), (f - 1.0).norm(), s.abs(), s_direct.abs()] {
                worst = worst.max(v);
            }
        }
    }
    outcome(worst <= 1e-10, format!("max deviation at t=0: {worst:.2e}"))
}

fn criterion_4() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut el100 = Duration::ZERO;
    for n in [5, 100] {
        let start = Instant::now();
        let irrep = SpinIrrep::new(n)?;
        let ops = ButterflyOperators::new(&irrep, ButterflyVariant::Unitary)?;
        let s = otoc_series(&irrep, &FloquetConfig::default(), &ops, &psi_for(&irrep, Preset::Chaos))?;
        for (f, c) in s.f.iter().zip(&s.c) {
            worst = worst.max((c - 2.0 * (1.0 - f.re)).abs());
        }
        if n == 100 {
            el100 = start.elapsed();
        }
    }
    outcome(
        worst <= 1e-9 && within(el100, 30),
        format!("max |C - 2(1 - Re F)| = {worst:.2e}, N=100 run {el100:.2?}"),
    )
}

fn criterion_5() -> Result<Outcome> {
    let irrep = SpinIrrep::new(5)?;
    let config = FloquetConfig::default();
    let uni = ButterflyOperators::new(&irrep, ButterflyVariant::Unitary)?;
    let her = ButterflyOperators::new(&irrep, ButterflyVariant::HermitianLiteral)?;
    let mut worst = 0.0f64;
    for preset in Preset::ALL {
        let psi = psi_for(&irrep, preset);
        let a = nonclassicality_series(&irrep, &config, &uni, &psi)?;
        let b = nonclassicality_series(&irrep, &config, &her, &psi)?;
        for (x, y) in a.values.iter().zip(&b.values) {
            worst = worst.max((x - y).abs());
        }
    }
    outcome(worst <= 1e-12, format!("max |unitary - hermitian| = {worst:.2e}"))
}

fn criterion_6() -> Result<Outcome> {
    use std::f64::consts::PI;
    let (t0, p0) = (Preset::THETA0, Preset::Chaos.phi0());
    let mut worst = 0.0f64;
    for n in [5, 20, 100] {
        let irrep = SpinIrrep::new(n)?;
        let reference = coherent_state(&irrep, t0, p0)?.psi;
        for i in 0..10 {
            for k in 0..10 {
                let theta = PI * i as f64 / 9.0;
                let phi = -PI + 2.0 * PI * k as f64 / 9.0;
                let other = coherent_state(&irrep, theta, phi)?.psi;
                let overlap = other.dotc(&reference).norm_sqr();
                let cos_big = theta.cos() * t0.cos() + theta.sin() * t0.sin() * (phi - p0).cos();
                let law = ((1.0 + cos_big.clamp(-1.0, 1.0)) / 2.0).powf(n as f64);
                worst = worst.max((overlap - law).abs());
            }
        }
    }
    outcome(worst <= 1e-10, format!("max |overlap - cos^(4j)(Theta/2)| = {worst:.2e}"))
}

fn criterion_7() -> Result<Outcome> {
    let kappa = 3.0;
    let mut worst_norm = 0.0f64;
    for preset in Preset::ALL {
        let tr = trajectory(Preset::THETA0, preset.phi0(), kappa, 50);
        for s in &tr.states {
            worst_norm = worst_norm.max((s.norm() - 1.0).abs());
        }
    }
    let mut s = ClassicalState::new(0.0, 0.0, 1.0);
    for _ in 0..4 {
        s = kick_map(s, kappa);
    }
    let closes = s.x == 0.0 && s.y.abs() == 0.0 && s.z == 1.0;
    let chaos = trajectory(Preset::THETA0, Preset::Chaos.phi0(), kappa, 50).phi_spread();
    let elliptic = trajectory(Preset::THETA0, Preset::Elliptic.phi0(), kappa, 50).phi_spread();
    let ratio = chaos / elliptic;
    let fixture_ok = ratio > 1.0 && ((ratio - SPREAD_RATIO_FIXTURE) / SPREAD_RATIO_FIXTURE).abs() < 1e-6;
    outcome(
        worst_norm <= 1e-12 && closes && fixture_ok,
        format!("max |norm - 1| = {worst_norm:.2e}, period-4 closes: {closes}, spread ratio {ratio:.6}"),
    )
}

/// N=100 series for one preset: times, Re F, Ntilde, entropy.
type Series100 = (Preset, Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>);

fn n100_series() -> Result<Vec<Series100>> {
    let irrep = SpinIrrep::new(100)?;
    let ops = ButterflyOperators::new(&irrep, ButterflyVariant::Unitary)?;
    let config = FloquetConfig::default();
    let mut out = Vec::new();
    for preset in Preset::ALL {
        let psi = psi_for(&irrep, preset);
        let o = otoc_series(&irrep, &config, &ops, &psi)?;
        let nc = nonclassicality_series(&irrep, &config, &ops, &psi)?;
        let re: Vec<f64> = o.f.iter().map(|z| z.re).collect();
        let ent = entropy_series(&irrep, &config, &psi)?.entropy;
        out.push((preset, o.times, re, nc.values, ent));
    }
    Ok(out)
}

fn criterion_8(data: &[Series100], el: Duration) -> Result<Outcome> {
    let means: Vec<f64> = data.iter().map(|(_, t, re, _, _)| window_mean(t, re, 25.0, 50.0)).collect();
    let decreasing = means.windows(2).all(|w| w[0] > w[1]);
    outcome(
        decreasing && within(el, 120),
        format!("late Re F elliptic..chaos = {:.4?}, N=100 runs {el:.2?}", means),
    )
}

fn criterion_9(data: &[Series100]) -> Result<Outcome> {
    let means: Vec<f64> = data.iter().map(|(_, t, _, nc, _)| window_mean(t, nc, 25.0, 50.0)).collect();
    let chaos = means[3];
    let largest = means[..3].iter().all(|m| chaos > *m);
    outcome(largest, format!("late Ntilde elliptic..chaos = {:.3?}", means))
}

fn criterion_10(data: &[Series100]) -> Result<Outcome> {
    let big: Vec<f64> = data.iter().map(|(_, t, _, _, s)| window_mean(t, s, 25.0, 50.0)).collect();
    let chaos_top = big[..3].iter().all(|m| big[3] > *m) && big[3] > 0.9;

    let irrep = SpinIrrep::new(5)?;
    let config = FloquetConfig::default();
    let mut small = Vec::new();
    for preset in Preset::ALL {
        let s = entropy_series(&irrep, &config, &psi_for(&irrep, preset))?;
        small.push(window_mean(&s.times, &s.entropy, 25.0, 50.0));
    }
    let spread = small.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - small.iter().copied().fold(f64::INFINITY, f64::min);

    let four = SpinIrrep::new(4)?;
    let mut worst_rdm = 0.0f64;
    for preset in Preset::ALL {
        let sched = evolve_schedule(&FloquetConfig { n_kicks: 3, ..config }, &four)?;
        let psi0 = psi_for(&four, preset);
        for (_, u) in sched.iter().step_by(7) {
            let psi = u * &psi0;
            let shortcut = single_spin_rdm(&psi, &four)?.matrix;
            for site in 0..4 {
                let oracle = embedded_single_spin_rdm(&psi, &four, site)?;
                worst_rdm = worst_rdm.max((&shortcut - &oracle).camax());
            }
        }
    }
    outcome(
        chaos_top && spread <= 0.2 && worst_rdm <= 1e-10,
        format!(
            "N=100 late S = {:.3?}; N=5 late S = {:.3?} (spread {spread:.3} bits, limit 0.2); RDM oracle {worst_rdm:.2e}",
            big, small
        ),
    )
}

fn criterion_11() -> Result<Outcome> {
    let start = Instant::now();
    let n = 5;
    let rows = tmi_series(n, &FloquetConfig::default(), 0, 0)?;
    let nf = n as f64;
    let mut worst_const = 0.0f64;
    for (_, r) in &rows {
        for v in [r.s_a - 1.0, r.s_c - 1.0, r.s_cd - nf, r.s_acd - (nf - 1.0)] {
            worst_const = worst_const.max(v.abs());
        }
    }
    let i3_0 = rows[0].1.i3;
    let times: Vec<f64> = rows.iter().map(|(t, _)| *t).collect();
    let i3: Vec<f64> = rows.iter().map(|(_, r)| r.i3).collect();
    let i3_mean = window_mean(&times, &i3, 1.0, 50.0);
    let ac: Vec<f64> = rows.iter().map(|(_, r)| r.i_ac).collect();
    let ad: Vec<f64> = rows.iter().map(|(_, r)| r.i_ad).collect();
    let corr = pearson(&ac, &ad);
    let el = start.elapsed();
    outcome(
        i3_mean < 0.0 && i3_0.abs() <= 1e-9 && worst_const <= 1e-9 && corr < 0.0 && within(el, 300),
        format!(
            "mean I3 = {i3_mean:.4}, I3(0) = {i3_0:.1e}, constants {worst_const:.1e}, corr = {corr:.3}, {el:.2?}"
        ),
    )
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn criterion_12(data: &[Series100]) -> Result<Outcome> {
    let config = FloquetConfig::default();
    let irrep = SpinIrrep::new(5)?;
    let ops = ButterflyOperators::new(&irrep, ButterflyVariant::Unitary)?;
    let o = otoc_series(&irrep, &config, &ops, &psi_for(&irrep, Preset::Chaos))?;
    let re: Vec<f64> = o.f.iter().map(|z| z.re).collect();
    let spec = power_spectrum_of_series(&o.times, &re)?;
    let peak = spec.has_peak_near(1.0 / config.tau, 1);

    let m = re.len() as f64;
    let mean = re.iter().sum::<f64>() / m;
    let time_side: f64 = m * re.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
    let parseval = ((spec.two_sided_total() - time_side) / time_side).abs();

    let ratio = |idx: usize| -> Result<f64> {
        let (_, t, re, _, _) = &data[idx];
        Ok(power_spectrum_of_series(t, re)?.harmonic_to_median_ratio(config.tau))
    };
    let (elliptic, chaos) = (ratio(0)?, ratio(3)?);
    outcome(
        peak && parseval <= 1e-9 && chaos < elliptic,
        format!(
            "N=5 peak near 1/tau: {peak}, Parseval rel {parseval:.1e}, N=100 harmonic ratio chaos {chaos:.2} vs elliptic {elliptic:.2}"
        ),
    )
}

fn criterion_13() -> Result<Outcome> {
    let bin = env!("CARGO_BIN_EXE_kicked-top");
    let dir = std::env::temp_dir().join(format!("kicked-top-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let runs: [&[&str]; 6] = [
        &["classical-map", "--preset", "chaos"],
        &["husimi", "--n", "6", "--kicks", "3", "--grid", "21x31"],
        &["otoc", "--n", "5", "--kicks", "5"],
        &["nonclassicality", "--n", "4", "--kicks", "5", "--oracle-check"],
        &["entropy", "--n", "7", "--kicks", "5", "--preset", "edge"],
        &["tmi", "--n", "4", "--kicks", "3"],
    ];
    let mut identical = true;
    let mut count = 0;
    for args in runs {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let path = dir.join(format!("{}_{rep}.csv", args[0]));
            let status = Command::new(bin).args(args).arg("--out").arg(&path).output().unwrap();
            identical &= status.status.success();
            outputs.push(std::fs::read(&path).unwrap_or_default());
        }
        identical &= !outputs[0].is_empty() && outputs[0] == outputs[1];
        count += 1;
    }
    let _ = std::fs::remove_dir_all(&dir);
    outcome(identical, format!("{count} subcommands, two runs each, byte-identical: {identical}"))
}

fn main() -> ExitCode {
    let mut failures = 0;
    let mut report = |id: &str, r: Result<Outcome>| {
        let (pass, detail) = match r {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!("criterion {id:>2}: {} {detail}", if pass { "PASS" } else { "FAIL" });
    };
    report("1", criterion_1());
    report("2", criterion_2());
    report("3", criterion_3());
    report("4", criterion_4());
    report("5", criterion_5());
    report("6", criterion_6());
    report("7", criterion_7());
    let start = Instant::now();
    let data = n100_series();
    let el = start.elapsed();
    match &data {
        Ok(data) => {
            report("8", criterion_8(data, el));
            report("9", criterion_9(data));
            report("10", criterion_10(data));
        }
        Err(e) => {
            for id in ["8", "9", "10"] {
                report(id, Err(kicked_top::KickedTopError::InvalidInput(e.to_string())));
            }
        }
    }
    report("11", criterion_11());
    match &data {
        Ok(data) => report("12", criterion_12(data)),
        Err(e) => report("12", Err(kicked_top::KickedTopError::InvalidInput(e.to_string()))),
    }
    report("13", criterion_13());
    if failures == 0 {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} criterion(s) failed");
        ExitCode::FAILURE
    }
}
