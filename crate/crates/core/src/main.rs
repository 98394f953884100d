use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand as ClapSubcommand};

use kicked_top::cli::{self, RunConfig, Subcommand};

#[derive(Parser)]
#[command(name = "kicked-top", version, about = "Chaos diagnostics for the quantum kicked top")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(ClapSubcommand)]
enum Command {
    /// Classical map orbit on the unit sphere
    ClassicalMap,
    /// Husimi Q on a (theta, phi) grid after the last kick
    Husimi,
    /// Butterfly OTOC F(t) and squared commutator C(t)
    Otoc,
    /// Quasiprobability nonclassicality
    Nonclassicality,
    /// Single-spin entanglement entropy
    Entropy,
    /// Tripartite mutual information of the channel state
    Tmi,
    /// Power spectrum of a column of an earlier CSV
    Spectrum,
    /// Write every series behind a figure (fig1..fig7)
    ReproduceFigure { figure: String },
}

#[derive(Args)]
struct Opts {
    /// key=value config file; command-line flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Number of spin-1/2 constituents
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    kappa: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    p: Option<f64>,
    #[arg(long, global = true)]
    tau: Option<f64>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[arg(long, global = true)]
    kicks: Option<usize>,
    #[arg(long, global = true)]
    theta0: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    phi0: Option<f64>,
    /// elliptic | regular | edge | chaos
    #[arg(long, global = true)]
    preset: Option<String>,
    /// unitary | hermitian
    #[arg(long, global = true)]
    variant: Option<String>,
    /// Husimi grid as THETAxPHI, e.g. 201x201
    #[arg(long, global = true)]
    grid: Option<String>,
    /// Qubit forming the input subsystem A
    #[arg(long, global = true)]
    site_a: Option<usize>,
    /// Qubit forming the output subsystem C
    #[arg(long, global = true)]
    site_c: Option<usize>,
    /// twist-kick | kick-twist
    #[arg(long, global = true)]
    order: Option<String>,
    /// Series CSV read by `spectrum`
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Column transformed by `spectrum`
    #[arg(long, global = true)]
    column: Option<String>,
    /// Output file, or directory for reproduce-figure
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Compare the fast nonclassicality against the four-index oracle
    #[arg(long, global = true)]
    oracle_check: bool,
    /// Keep only samples at integer multiples of tau
    #[arg(long, global = true)]
    stroboscopic: bool,
    #[arg(long, global = true)]
    parallel: bool,
}

impl Opts {
    fn layer(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                m.insert(k.to_string(), v);
            }
        };
        put("n", self.n.map(|v| v.to_string()));
        put("kappa", self.kappa.map(|v| v.to_string()));
        put("p", self.p.map(|v| v.to_string()));
        put("tau", self.tau.map(|v| v.to_string()));
        put("dt", self.dt.map(|v| v.to_string()));
        put("kicks", self.kicks.map(|v| v.to_string()));
        put("theta0", self.theta0.map(|v| v.to_string()));
        put("phi0", self.phi0.map(|v| v.to_string()));
        put("preset", self.preset.clone());
        put("variant", self.variant.clone());
        put("grid", self.grid.clone());
        put("site_a", self.site_a.map(|v| v.to_string()));
        put("site_c", self.site_c.map(|v| v.to_string()));
        put("order", self.order.clone());
        put("input", self.input.as_ref().map(|p| p.display().to_string()));
        put("column", self.column.clone());
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        put("oracle_check", self.oracle_check.then(|| "true".into()));
        put("stroboscopic", self.stroboscopic.then(|| "true".into()));
        put("parallel", self.parallel.then(|| "true".into()));
        m
    }
}

fn resolve(cli: &Cli) -> kicked_top::Result<RunConfig> {
    let (sub, figure) = match &cli.command {
        Command::ClassicalMap => (Subcommand::ClassicalMap, None),
        Command::Husimi => (Subcommand::Husimi, None),
        Command::Otoc => (Subcommand::Otoc, None),
        Command::Nonclassicality => (Subcommand::Nonclassicality, None),
        Command::Entropy => (Subcommand::Entropy, None),
        Command::Tmi => (Subcommand::Tmi, None),
        Command::Spectrum => (Subcommand::Spectrum, None),
        Command::ReproduceFigure { figure } => (Subcommand::ReproduceFigure, Some(figure.clone())),
    };
    let mut cfg = RunConfig::new(sub);
    if let Some(path) = &cli.opts.config {
        let mut file = cli::read_config_file(path)?;
        file.remove("subcommand");
        cfg.apply(&file)?;
    }
    let mut layer = cli.opts.layer();
    if let Some(f) = figure {
        layer.insert("figure".into(), f);
    }
    cfg.apply(&layer)?;
    Ok(cfg)
}

fn run(cli: &Cli) -> kicked_top::Result<()> {
    let cfg = resolve(cli)?;
    let output = cli::execute(&cfg)?;
    for msg in &output.messages {
        eprintln!("{msg}");
    }
    for path in cli::write_output(&cfg, &output)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(cli::exit_code(&err) as u8)
        }
    }
}
