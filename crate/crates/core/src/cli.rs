//! Command-line orchestration and CSV serialization.
//!
//! Every CSV starts with a `#` line echoing the resolved configuration as
//! `key=value` pairs (the same syntax as a config file), then a header row.
//! Reals are written with 17 significant digits.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel_tmi::{tmi_series, TmiReport};
use crate::classical_map::{trajectory_with_order, MapOrder};
use crate::error::{KickedTopError, Result};
use crate::floquet_engine::{evolve_schedule, for_each_state, FloquetConfig};
use crate::otoc_quasiprob::{
    nonclassicality_fast, nonclassicality_series, otoc_series, quasiprob_direct, ButterflyOperators,
    ButterflyVariant,
};
use crate::spectra::power_spectrum_of_series;
use crate::spin_core::{coherent_state, SpinIrrep};
use crate::state_diagnostics::{entropy_series, husimi_q, GridSpec};

/// Largest `N` accepted by the four-index oracle comparison.
pub const MAX_ORACLE_SPINS: usize = 24;
/// Tolerance of the `--oracle-check` comparison.
pub const ORACLE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Preset {
    Elliptic,
    Regular,
    Edge,
    Chaos,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Elliptic, Preset::Regular, Preset::Edge, Preset::Chaos];
    pub const THETA0: f64 = 2.25;

    pub fn phi0(self) -> f64 {
        match self {
            Preset::Elliptic => 0.63,
            Preset::Regular => 0.90,
            Preset::Edge => 1.05,
            Preset::Chaos => 2.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Elliptic => "elliptic",
            Preset::Regular => "regular",
            Preset::Edge => "edge",
            Preset::Chaos => "chaos",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| bad_arg(format!("unknown preset '{s}' (elliptic|regular|edge|chaos)")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    ClassicalMap,
    Husimi,
    Otoc,
    Nonclassicality,
    Entropy,
    Tmi,
    Spectrum,
    ReproduceFigure,
}

impl Subcommand {
    const ALL: [Subcommand; 8] = [
        Subcommand::ClassicalMap,
        Subcommand::Husimi,
        Subcommand::Otoc,
        Subcommand::Nonclassicality,
        Subcommand::Entropy,
        Subcommand::Tmi,
        Subcommand::Spectrum,
        Subcommand::ReproduceFigure,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::ClassicalMap => "classical-map",
            Subcommand::Husimi => "husimi",
            Subcommand::Otoc => "otoc",
            Subcommand::Nonclassicality => "nonclassicality",
            Subcommand::Entropy => "entropy",
            Subcommand::Tmi => "tmi",
            Subcommand::Spectrum => "spectrum",
            Subcommand::ReproduceFigure => "reproduce-figure",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| bad_arg(format!("unknown subcommand '{s}'")))
    }
}

fn variant_name(v: ButterflyVariant) -> &'static str {
    match v {
        ButterflyVariant::Unitary => "unitary",
        ButterflyVariant::HermitianLiteral => "hermitian",
    }
}

fn order_name(o: MapOrder) -> &'static str {
    match o {
        MapOrder::TwistThenKick => "twist-kick",
        MapOrder::KickThenTwist => "kick-twist",
    }
}

fn bad_arg(msg: impl Into<String>) -> KickedTopError {
    KickedTopError::InvalidInput(msg.into())
}

/// Fully resolved run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub n: usize,
    pub kappa: f64,
    pub p: f64,
    pub tau: f64,
    pub dt: f64,
    pub kicks: usize,
    pub theta0: f64,
    pub phi0: f64,
    pub preset: Option<Preset>,
    pub variant: ButterflyVariant,
    pub grid: GridSpec,
    pub site_a: usize,
    pub site_c: usize,
    pub oracle_check: bool,
    pub stroboscopic: bool,
    pub order: MapOrder,
    pub input: Option<PathBuf>,
    pub column: String,
    pub figure: Option<u8>,
    pub parallel: bool,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(subcommand: Subcommand) -> Self {
        let f = FloquetConfig::default();
        Self {
            subcommand,
            n: 5,
            kappa: f.kappa,
            p: f.p,
            tau: f.tau,
            dt: f.dt,
            kicks: f.n_kicks,
            theta0: Preset::THETA0,
            phi0: Preset::Elliptic.phi0(),
            preset: Some(Preset::Elliptic),
            variant: ButterflyVariant::Unitary,
            grid: GridSpec::default(),
            site_a: 0,
            site_c: 0,
            oracle_check: false,
            stroboscopic: false,
            order: MapOrder::TwistThenKick,
            input: None,
            column: "ReF".to_string(),
            figure: None,
            parallel: false,
            out: None,
        }
    }

    pub fn floquet(&self) -> FloquetConfig {
        FloquetConfig {
            kappa: self.kappa,
            p: self.p,
            tau: self.tau,
            dt: self.dt,
            n_kicks: self.kicks,
        }
    }

    pub fn set_preset(&mut self, preset: Preset) {
        self.preset = Some(preset);
        self.theta0 = Preset::THETA0;
        self.phi0 = preset.phi0();
    }

    /// Applies a layer of `key=value` settings. `preset` is applied before
    /// explicit angles so that `theta0`/`phi0` in the same layer win.
    pub fn apply(&mut self, settings: &BTreeMap<String, String>) -> Result<()> {
        if let Some(v) = settings.get("preset") {
            self.set_preset(Preset::parse(v)?);
        }
        for (key, value) in settings {
            self.apply_one(key, value)?;
        }
        Ok(())
    }

    fn apply_one(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| bad_arg(format!("invalid value '{value}' for {key}")))
        }
        fn flag(key: &str, value: &str) -> Result<bool> {
            match value {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                _ => Err(bad_arg(format!("invalid boolean '{value}' for {key}"))),
            }
        }
        match key {
            "subcommand" => self.subcommand = Subcommand::parse(value)?,
            "n" => self.n = num(key, value)?,
            "kappa" => self.kappa = num(key, value)?,
            "p" => self.p = num(key, value)?,
            "tau" => self.tau = num(key, value)?,
            "dt" => self.dt = num(key, value)?,
            "kicks" => self.kicks = num(key, value)?,
            "theta0" => {
                self.theta0 = num(key, value)?;
                self.drop_stale_preset();
            }
            "phi0" => {
                self.phi0 = num(key, value)?;
                self.drop_stale_preset();
            }
            "preset" => {}
            "variant" => {
                self.variant = match value {
                    "unitary" => ButterflyVariant::Unitary,
                    "hermitian" => ButterflyVariant::HermitianLiteral,
                    _ => return Err(bad_arg(format!("unknown variant '{value}' (unitary|hermitian)"))),
                }
            }
            "grid" => self.grid = parse_grid(value)?,
            "site_a" => self.site_a = num(key, value)?,
            "site_c" => self.site_c = num(key, value)?,
            "oracle_check" => self.oracle_check = flag(key, value)?,
            "stroboscopic" => self.stroboscopic = flag(key, value)?,
            "parallel" => self.parallel = flag(key, value)?,
            "order" => {
                self.order = match value {
                    "twist-kick" => MapOrder::TwistThenKick,
                    "kick-twist" => MapOrder::KickThenTwist,
                    _ => return Err(bad_arg(format!("unknown map order '{value}' (twist-kick|kick-twist)"))),
                }
            }
            "input" => self.input = Some(PathBuf::from(value)),
            "column" => self.column = value.to_string(),
            "figure" => self.figure = Some(parse_figure(value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            _ => return Err(bad_arg(format!("unknown configuration key '{key}'"))),
        }
        Ok(())
    }

    fn drop_stale_preset(&mut self) {
        if let Some(p) = self.preset {
            if self.theta0 != Preset::THETA0 || self.phi0 != p.phi0() {
                self.preset = None;
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(bad_arg("n must be at least 1"));
        }
        self.floquet().validate()?;
        if !(0.0..=PI).contains(&self.theta0) {
            return Err(bad_arg(format!("theta0 must lie in [0, pi], got {}", self.theta0)));
        }
        if !self.phi0.is_finite() {
            return Err(bad_arg("phi0 must be finite"));
        }
        if self.grid.n_theta == 0 || self.grid.n_phi == 0 {
            return Err(bad_arg("grid dimensions must be positive"));
        }
        Ok(())
    }

    /// `key=value` pairs that determine the output content.
    pub fn echo_pairs(&self) -> Vec<(&'static str, String)> {
        let mut pairs = vec![
            ("subcommand", self.subcommand.name().to_string()),
            ("n", self.n.to_string()),
            ("kappa", self.kappa.to_string()),
            ("p", self.p.to_string()),
            ("tau", self.tau.to_string()),
            ("dt", self.dt.to_string()),
            ("kicks", self.kicks.to_string()),
        ];
        if let Some(p) = self.preset {
            pairs.push(("preset", p.name().to_string()));
        }
        pairs.extend([
            ("theta0", self.theta0.to_string()),
            ("phi0", self.phi0.to_string()),
            ("variant", variant_name(self.variant).to_string()),
            ("grid", format!("{}x{}", self.grid.n_theta, self.grid.n_phi)),
            ("site_a", self.site_a.to_string()),
            ("site_c", self.site_c.to_string()),
            ("oracle_check", self.oracle_check.to_string()),
            ("stroboscopic", self.stroboscopic.to_string()),
            ("order", order_name(self.order).to_string()),
            ("column", self.column.clone()),
        ]);
        if let Some(input) = &self.input {
            pairs.push(("input", input.display().to_string()));
        }
        if let Some(f) = self.figure {
            pairs.push(("figure", format!("fig{f}")));
        }
        pairs
    }

    /// The `#` comment line written at the top of every CSV.
    pub fn comment_line(&self) -> String {
        let body: Vec<String> = self.echo_pairs().into_iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("# {}", body.join(" "))
    }

    /// Rebuilds a configuration from a CSV comment line.
    pub fn from_comment(line: &str) -> Result<Self> {
        let body = line
            .trim()
            .strip_prefix('#')
            .ok_or_else(|| KickedTopError::Parse("comment line must start with '#'".into()))?;
        let settings = parse_pairs(body.split_whitespace())?;
        let sub = settings
            .get("subcommand")
            .ok_or_else(|| KickedTopError::Parse("comment line lacks subcommand".into()))?;
        let mut cfg = RunConfig::new(Subcommand::parse(sub)?);
        cfg.apply(&settings)?;
        Ok(cfg)
    }
}

fn parse_grid(value: &str) -> Result<GridSpec> {
    let (a, b) = value
        .split_once('x')
        .ok_or_else(|| bad_arg(format!("grid must look like 201x201, got '{value}'")))?;
    let n_theta = a.parse().map_err(|_| bad_arg(format!("invalid grid '{value}'")))?;
    let n_phi = b.parse().map_err(|_| bad_arg(format!("invalid grid '{value}'")))?;
    Ok(GridSpec { n_theta, n_phi })
}

fn parse_figure(value: &str) -> Result<u8> {
    let digits = value.strip_prefix("fig").unwrap_or(value);
    match digits.parse::<u8>() {
        Ok(k @ 1..=7) => Ok(k),
        _ => Err(bad_arg(format!("unknown figure '{value}' (fig1..fig7)"))),
    }
}

fn parse_pairs<'a>(items: impl Iterator<Item = &'a str>) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for item in items {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| KickedTopError::Parse(format!("expected key=value, got '{item}'")))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// Parses a config file: one `key=value` per line, `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let lines = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty());
    parse_pairs(lines)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|source| KickedTopError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config_text(&text)
}

/// A CSV document held in memory until written.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsvDoc {
    pub name: String,
    pub text: String,
}

struct CsvBuilder {
    text: String,
}

impl CsvBuilder {
    fn new(config: &RunConfig, columns: &[&str]) -> Self {
        let mut text = config.comment_line();
        text.push('\n');
        text.push_str(&columns.join(","));
        text.push('\n');
        Self { text }
    }

    fn note(config: &RunConfig, note: &str, columns: &[&str]) -> Self {
        let text = format!("{}\n# {note}\n{}\n", config.comment_line(), columns.join(","));
        Self { text }
    }

    fn row(&mut self, cells: &[Cell]) {
        let mut first = true;
        for c in cells {
            if !first {
                self.text.push(',');
            }
            first = false;
            match c {
                Cell::Int(v) => write!(self.text, "{v}").unwrap(),
                Cell::Real(v) => self.text.push_str(&fmt_real(*v)),
            }
        }
        self.text.push('\n');
    }

    fn finish(self, name: impl Into<String>) -> CsvDoc {
        CsvDoc { name: name.into(), text: self.text }
    }
}

enum Cell {
    Int(usize),
    Real(f64),
}

/// 17 significant digits in scientific notation.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn initial_state(cfg: &RunConfig, irrep: &SpinIrrep) -> Result<crate::CVec> {
    Ok(coherent_state(irrep, cfg.theta0, cfg.phi0)?.psi)
}

pub fn classical_map_csv(cfg: &RunConfig) -> Result<CsvDoc> {
    let tr = trajectory_with_order(cfg.theta0, cfg.phi0, cfg.kappa, cfg.kicks, cfg.order);
    let mut csv = CsvBuilder::new(cfg, &["n", "X", "Y", "Z", "theta", "phi"]);
    for (k, s) in tr.states.iter().enumerate() {
        let (theta, phi) = s.angles();
        csv.row(&[Cell::Int(k), Cell::Real(s.x), Cell::Real(s.y), Cell::Real(s.z), Cell::Real(theta), Cell::Real(phi)]);
    }
    Ok(csv.finish("classical-map"))
}

/// Husimi grid of the state after `kicks` periods.
pub fn husimi_csv(cfg: &RunConfig) -> Result<CsvDoc> {
    let irrep = SpinIrrep::new(cfg.n)?;
    let psi0 = initial_state(cfg, &irrep)?;
    let fc = cfg.floquet();
    let last = fc.total_steps();
    let mut psi = psi0.clone();
    for_each_state(&irrep, &fc, &psi0, |k, _, state| {
        if k == last {
            psi = state.clone();
        }
    })?;
    let grid = husimi_q(&psi, cfg.grid)?;
    let mut csv = CsvBuilder::new(cfg, &["theta", "phi", "Q"]);
    for (i, &theta) in grid.thetas.iter().enumerate() {
        for (k, &phi) in grid.phis.iter().enumerate() {
            csv.row(&[Cell::Real(theta), Cell::Real(phi), Cell::Real(grid.at(i, k))]);
        }
    }
    Ok(csv.finish("husimi"))
}

pub struct OtocRun {
    pub times: Vec<f64>,
    pub f: Vec<Complex64>,
    pub c: Vec<f64>,
}

pub fn otoc_run(cfg: &RunConfig) -> Result<OtocRun> {
    let irrep = SpinIrrep::new(cfg.n)?;
    let ops = ButterflyOperators::new(&irrep, cfg.variant)?;
    let psi = initial_state(cfg, &irrep)?;
    let s = otoc_series(&irrep, &cfg.floquet(), &ops, &psi)?;
    Ok(OtocRun { times: s.times, f: s.f, c: s.c })
}

pub fn otoc_csv(cfg: &RunConfig) -> Result<CsvDoc> {
    let run = otoc_run(cfg)?;
    let mut csv = CsvBuilder::new(cfg, &["t", "ReF", "ImF", "C"]);
    for k in 0..run.times.len() {
        csv.row(&[Cell::Real(run.times[k]), Cell::Real(run.f[k].re), Cell::Real(run.f[k].im), Cell::Real(run.c[k])]);
    }
    Ok(csv.finish("otoc"))
}

/// Largest `|fast − direct|` over three sample times spread across the run.
pub fn oracle_discrepancy(cfg: &RunConfig) -> Result<f64> {
    if cfg.n > MAX_ORACLE_SPINS {
        return Err(KickedTopError::Capacity(format!(
            "oracle check stores (N+1)^4 values; N={} exceeds {MAX_ORACLE_SPINS}",
            cfg.n
        )));
    }
    let irrep = SpinIrrep::new(cfg.n)?;
    let ops = ButterflyOperators::new(&irrep, cfg.variant)?;
    let psi = initial_state(cfg, &irrep)?;
    let fc = cfg.floquet();
    let total = fc.total_steps();
    let mut picks = vec![total / 3, (2 * total) / 3, total];
    picks.dedup();
    let sched = evolve_schedule(&fc, &irrep)?;
    let mut worst = 0.0f64;
    for k in picks {
        let (t, u) = &sched[k];
        let direct = quasiprob_direct(u, &ops, &psi, *t)?.nonclassicality();
        let fast = nonclassicality_fast(u, &ops, &psi)?;
        worst = worst.max((direct - fast).abs());
    }
    Ok(worst)
}

pub fn nonclassicality_csv(cfg: &RunConfig) -> Result<CsvDoc> {
    let irrep = SpinIrrep::new(cfg.n)?;
    let ops = ButterflyOperators::new(&irrep, cfg.variant)?;
    let psi = initial_state(cfg, &irrep)?;
    let s = nonclassicality_series(&irrep, &cfg.floquet(), &ops, &psi)?;
    let mut csv = CsvBuilder::new(cfg, &["t", "Ntilde"]);
    for (t, v) in s.times.iter().zip(&s.values) {
        csv.row(&[Cell::Real(*t), Cell::Real(*v)]);
    }
    Ok(csv.finish("nonclassicality"))
}

pub fn entropy_csv(cfg: &RunConfig) -> Result<CsvDoc> {
    let irrep = SpinIrrep::new(cfg.n)?;
    let psi = initial_state(cfg, &irrep)?;
    let s = entropy_series(&irrep, &cfg.floquet(), &psi)?;
    let mut csv = CsvBuilder::new(cfg, &["t", "S", "bx", "by", "bz"]);
    for k in 0..s.times.len() {
        let b = s.bloch[k];
        csv.row(&[Cell::Real(s.times[k]), Cell::Real(s.entropy[k]), Cell::Real(b[0]), Cell::Real(b[1]), Cell::Real(b[2])]);
    }
    Ok(csv.finish("entropy"))
}

pub const TMI_COLUMNS: [&str; 12] = [
    "t", "S_A", "S_C", "S_D", "S_AC", "S_AD", "S_CD", "S_ACD", "I_AC", "I_AD", "I_ACD", "I3",
];

pub fn tmi_csv(cfg: &RunConfig) -> Result<CsvDoc> {
    let rows = tmi_series(cfg.n, &cfg.floquet(), cfg.site_a, cfg.site_c)?;
    let mut csv = CsvBuilder::new(cfg, &TMI_COLUMNS);
    for (t, r) in rows {
        let TmiReport { s_a, s_c, s_d, s_ac, s_ad, s_cd, s_acd, i_ac, i_ad, i_acd, i3 } = r;
        let cells: Vec<Cell> = [t, s_a, s_c, s_d, s_ac, s_ad, s_cd, s_acd, i_ac, i_ad, i_acd, i3]
            .into_iter()
            .map(Cell::Real)
            .collect();
        csv.row(&cells);
    }
    Ok(csv.finish("tmi"))
}

const SPECTRUM_NOTE: &str = "power = |DFT|^2 of the mean-removed series, one-sided, no window, no 1/M factor";

fn spectrum_doc(cfg: &RunConfig, times: &[f64], values: &[f64], name: String) -> Result<CsvDoc> {
    let (t, x): (Vec<f64>, Vec<f64>) = if cfg.stroboscopic {
        times
            .iter()
            .zip(values)
            .filter(|(t, _)| {
                let r = *t / cfg.tau;
                (r - r.round()).abs() < 1e-6
            })
            .map(|(t, x)| (*t, *x))
            .unzip()
    } else {
        (times.to_vec(), values.to_vec())
    };
    let spec = power_spectrum_of_series(&t, &x)?;
    let mut csv = CsvBuilder::note(cfg, SPECTRUM_NOTE, &["freq", "power"]);
    for (f, p) in spec.freqs.iter().zip(&spec.power) {
        csv.row(&[Cell::Real(*f), Cell::Real(*p)]);
    }
    Ok(csv.finish(name))
}

/// Reads a series CSV emitted by this tool: `#` lines skipped, then a header.
pub fn read_series_csv(path: &Path, column: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path).map_err(|source| KickedTopError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| KickedTopError::Parse(format!("{} has no header row", path.display())))?
        .split(',')
        .map(str::trim)
        .collect();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| KickedTopError::Parse(format!("column '{name}' not found in {}", path.display())))
    };
    let t_col = find("t")?;
    let x_col = find(column)?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (row, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        let get = |c: usize| -> Result<f64> {
            cells
                .get(c)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| KickedTopError::Parse(format!("bad value in row {} of {}", row + 1, path.display())))
        };
        times.push(get(t_col)?);
        values.push(get(x_col)?);
    }
    Ok((times, values))
}

pub fn spectrum_csv(cfg: &RunConfig) -> Result<CsvDoc> {
    let input = cfg
        .input
        .as_ref()
        .ok_or_else(|| bad_arg("spectrum needs --input pointing at a series CSV"))?;
    let (t, x) = read_series_csv(input, &cfg.column)?;
    spectrum_doc(cfg, &t, &x, "spectrum".into())
}

fn per_preset<F>(base: &RunConfig, parallel: bool, job: F) -> Result<Vec<CsvDoc>>
where
    F: Fn(RunConfig) -> Result<Vec<CsvDoc>> + Sync,
{
    let configs: Vec<RunConfig> = Preset::ALL
        .iter()
        .map(|&p| {
            let mut c = base.clone();
            c.set_preset(p);
            c
        })
        .collect();
    let nested: Vec<Result<Vec<CsvDoc>>> = if parallel {
        configs.into_par_iter().map(&job).collect()
    } else {
        configs.into_iter().map(&job).collect()
    };
    let mut out = Vec::new();
    for docs in nested {
        out.extend(docs?);
    }
    Ok(out)
}

fn with_sub(base: &RunConfig, sub: Subcommand, n: usize) -> RunConfig {
    let mut c = base.clone();
    c.subcommand = sub;
    c.n = n;
    c.figure = None;
    c.input = None;
    c.oracle_check = false;
    c
}

fn named(mut doc: CsvDoc, name: String) -> CsvDoc {
    doc.name = name;
    doc
}

/// Documents for one figure preset; file names are `figK_...csv`.
pub fn reproduce_figure(cfg: &RunConfig, figure: u8) -> Result<Vec<CsvDoc>> {
    let par = cfg.parallel;
    match figure {
        1 => per_preset(&with_sub(cfg, Subcommand::ClassicalMap, cfg.n), par, |c| {
            let name = format!("fig1_{}", c.preset.unwrap().name());
            Ok(vec![named(classical_map_csv(&c)?, name)])
        }),
        2 => {
            let mut jobs = Vec::new();
            for n in [5, 100] {
                for preset in [Preset::Elliptic, Preset::Chaos] {
                    for kicks in [0, cfg.kicks] {
                        let mut c = with_sub(cfg, Subcommand::Husimi, n);
                        c.set_preset(preset);
                        c.kicks = kicks;
                        jobs.push(c);
                    }
                }
            }
            let run = |c: &RunConfig| {
                let name = format!("fig2_n{}_{}_k{}", c.n, c.preset.unwrap().name(), c.kicks);
                husimi_csv(c).map(|d| named(d, name))
            };
            if par {
                jobs.par_iter().map(run).collect()
            } else {
                jobs.iter().map(run).collect()
            }
        }
        3 | 4 => {
            let n = if figure == 3 { 5 } else { 100 };
            per_preset(&with_sub(cfg, Subcommand::Otoc, n), par, move |c| {
                let stem = format!("fig{figure}_{}", c.preset.unwrap().name());
                let run = otoc_run(&c)?;
                let doc = named(otoc_csv_from(&c, &run), stem.clone());
                let re: Vec<f64> = run.f.iter().map(|z| z.re).collect();
                let mut sc = c.clone();
                sc.subcommand = Subcommand::Spectrum;
                sc.column = "ReF".into();
                let spec = spectrum_doc(&sc, &run.times, &re, format!("{stem}_spectrum"))?;
                Ok(vec![doc, spec])
            })
        }
        5 => {
            let mut out = Vec::new();
            for n in [5, 100] {
                out.extend(per_preset(&with_sub(cfg, Subcommand::Nonclassicality, n), par, |c| {
                    let stem = format!("fig5_n{}_{}", c.n, c.preset.unwrap().name());
                    let irrep = SpinIrrep::new(c.n)?;
                    let ops = ButterflyOperators::new(&irrep, c.variant)?;
                    let psi = initial_state(&c, &irrep)?;
                    let s = nonclassicality_series(&irrep, &c.floquet(), &ops, &psi)?;
                    let mut csv = CsvBuilder::new(&c, &["t", "Ntilde"]);
                    for (t, v) in s.times.iter().zip(&s.values) {
                        csv.row(&[Cell::Real(*t), Cell::Real(*v)]);
                    }
                    let mut sc = c.clone();
                    sc.subcommand = Subcommand::Spectrum;
                    sc.column = "Ntilde".into();
                    let spec = spectrum_doc(&sc, &s.times, &s.values, format!("{stem}_spectrum"))?;
                    Ok(vec![csv.finish(stem), spec])
                })?);
            }
            Ok(out)
        }
        6 => {
            let mut out = Vec::new();
            for n in [5, 100] {
                out.extend(per_preset(&with_sub(cfg, Subcommand::Entropy, n), par, |c| {
                    let name = format!("fig6_n{}_{}", c.n, c.preset.unwrap().name());
                    Ok(vec![named(entropy_csv(&c)?, name)])
                })?);
            }
            Ok(out)
        }
        7 => {
            let c = with_sub(cfg, Subcommand::Tmi, 5);
            Ok(vec![named(tmi_csv(&c)?, "fig7_tmi".into())])
        }
        _ => Err(bad_arg(format!("unknown figure fig{figure}"))),
    }
}

fn otoc_csv_from(cfg: &RunConfig, run: &OtocRun) -> CsvDoc {
    let mut csv = CsvBuilder::new(cfg, &["t", "ReF", "ImF", "C"]);
    for k in 0..run.times.len() {
        csv.row(&[Cell::Real(run.times[k]), Cell::Real(run.f[k].re), Cell::Real(run.f[k].im), Cell::Real(run.c[k])]);
    }
    csv.finish("otoc")
}

/// Result of a run before anything is written.
#[derive(Debug)]
pub struct RunOutput {
    pub docs: Vec<CsvDoc>,
    /// Human-readable diagnostics for stderr.
    pub messages: Vec<String>,
}

/// Executes a run, producing CSV documents in memory.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let mut messages = Vec::new();
    let docs = match cfg.subcommand {
        Subcommand::ClassicalMap => vec![classical_map_csv(cfg)?],
        Subcommand::Husimi => vec![husimi_csv(cfg)?],
        Subcommand::Otoc => vec![otoc_csv(cfg)?],
        Subcommand::Nonclassicality => {
            let doc = nonclassicality_csv(cfg)?;
            if cfg.oracle_check {
                let worst = oracle_discrepancy(cfg)?;
                messages.push(format!("oracle check: max |fast - direct| = {worst:e}"));
                if worst.is_nan() || worst >= ORACLE_TOL {
                    return Err(KickedTopError::OracleMismatch(format!(
                        "max |fast - direct| = {worst:e} exceeds {ORACLE_TOL:e}"
                    )));
                }
            }
            vec![doc]
        }
        Subcommand::Entropy => vec![entropy_csv(cfg)?],
        Subcommand::Tmi => vec![tmi_csv(cfg)?],
        Subcommand::Spectrum => vec![spectrum_csv(cfg)?],
        Subcommand::ReproduceFigure => {
            let fig = cfg
                .figure
                .ok_or_else(|| bad_arg("reproduce-figure needs a figure (fig1..fig7)"))?;
            reproduce_figure(cfg, fig)?
        }
    };
    Ok(RunOutput { docs, messages })
}

/// Writes the documents: a single document goes to `out` (or stdout when
/// absent); a figure reproduction writes `<out>/<name>.csv`.
pub fn write_output(cfg: &RunConfig, output: &RunOutput) -> Result<Vec<PathBuf>> {
    let io_err = |path: &Path, source| KickedTopError::Io { path: path.display().to_string(), source };
    if cfg.subcommand == Subcommand::ReproduceFigure {
        let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("figures"));
        std::fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        let mut written = Vec::new();
        for doc in &output.docs {
            let path = dir.join(format!("{}.csv", doc.name));
            std::fs::write(&path, &doc.text).map_err(|e| io_err(&path, e))?;
            written.push(path);
        }
        return Ok(written);
    }
    let doc = &output.docs[0];
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, &doc.text).map_err(|e| io_err(path, e))?;
            Ok(vec![path.clone()])
        }
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(doc.text.as_bytes())
                .map_err(|e| io_err(Path::new("<stdout>"), e))?;
            Ok(Vec::new())
        }
    }
}

/// Process exit code for an error.
pub fn exit_code(err: &KickedTopError) -> i32 {
    match err {
        KickedTopError::Capacity(_) => 3,
        KickedTopError::OracleMismatch(_) => 4,
        _ => 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(sub: Subcommand) -> RunConfig {
        RunConfig::new(sub)
    }

    #[test]
    fn comment_round_trips() {
        let mut c = cfg(Subcommand::Otoc);
        c.set_preset(Preset::Chaos);
        c.n = 7;
        c.dt = 0.1;
        c.variant = ButterflyVariant::HermitianLiteral;
        let back = RunConfig::from_comment(&c.comment_line()).unwrap();
        assert_eq!(back, c);

        let mut d = cfg(Subcommand::ClassicalMap);
        d.theta0 = 1.234567890123;
        d.phi0 = -0.3;
        d.preset = None;
        d.order = MapOrder::KickThenTwist;
        assert_eq!(RunConfig::from_comment(&d.comment_line()).unwrap(), d);
    }

    #[test]
    fn explicit_angles_override_preset_in_same_layer() {
        let mut c = cfg(Subcommand::Otoc);
        let layer = parse_config_text("preset=chaos\nphi0=1.5 # comment\n").unwrap();
        c.apply(&layer).unwrap();
        assert_eq!(c.phi0, 1.5);
        assert_eq!(c.theta0, Preset::THETA0);
        assert_eq!(c.preset, None);
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = cfg(Subcommand::Otoc);
        for text in ["n=abc", "variant=weird", "nonsense=1", "grid=12", "figure=fig9"] {
            assert!(c.apply(&parse_config_text(text).unwrap()).is_err(), "{text}");
        }
        assert!(parse_config_text("novalue").is_err());
    }

    #[test]
    fn real_format_has_17_significant_digits() {
        assert_eq!(fmt_real(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_real(-0.1), "-1.0000000000000001e-1");
    }

    #[test]
    fn classical_map_has_expected_shape() {
        let mut c = cfg(Subcommand::ClassicalMap);
        c.set_preset(Preset::Chaos);
        let doc = classical_map_csv(&c).unwrap();
        let lines: Vec<&str> = doc.text.lines().collect();
        assert!(lines[0].starts_with("# subcommand=classical-map"));
        assert_eq!(lines[1], "n,X,Y,Z,theta,phi");
        assert_eq!(lines.len(), 2 + 51);
    }

    #[test]
    fn otoc_row_count_follows_grid() {
        let mut c = cfg(Subcommand::Otoc);
        c.kicks = 4;
        let doc = otoc_csv(&c).unwrap();
        assert_eq!(doc.text.lines().count(), 2 + 4 * 20 + 1);
        assert_eq!(doc.text.lines().nth(1).unwrap(), "t,ReF,ImF,C");
    }

    #[test]
    fn tmi_capacity_maps_to_exit_3() {
        let mut c = cfg(Subcommand::Tmi);
        c.n = 9;
        let err = execute(&c).unwrap_err();
        assert_eq!(exit_code(&err), 3);
    }

    #[test]
    fn oracle_check_passes_at_small_n() {
        let mut c = cfg(Subcommand::Nonclassicality);
        c.n = 4;
        c.kicks = 7;
        c.oracle_check = true;
        let out = execute(&c).unwrap();
        assert!(out.messages[0].starts_with("oracle check"));
    }
}
