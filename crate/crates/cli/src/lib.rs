//! `topowg`: every model computation as a subcommand driven by a config
//! document. Artifacts land in the output directory as `<command>.csv` (or
//! `.json`), optional `<command>.<sidecar>.json` files, and a
//! `<command>.provenance.json` record.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 numerical failure
//! or I/O failure. Failures print an error JSON object on stderr.

pub mod artifacts;
pub mod commands;
pub mod config;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use artifacts::{to_json, ErrorReport, Provenance};
use commands::{Outcome, Overrides};
use config::{parse_config, ConfigError, Document};
use topowg_core::circuit_model::Phase;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Numerical(topowg_core::Error),
    Io(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<topowg_core::Error> for CliError {
    fn from(e: topowg_core::Error) -> Self {
        CliError::Numerical(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) | CliError::Io(_) => EXIT_NUMERICAL,
        }
    }

    pub fn report(&self) -> ErrorReport {
        match self {
            CliError::Config(e) => ErrorReport {
                code: e.code().into(),
                module: "cli".into(),
                message: e.message.clone(),
                location: e.location,
            },
            CliError::Numerical(e) => {
                ErrorReport { code: e.code().into(), module: e.module().into(), message: e.to_string(), location: None }
            }
            CliError::Io(m) => ErrorReport { code: "IoError".into(), module: "cli".into(), message: m.clone(), location: None },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Device1,
    Device2,
    Teststructure,
}

impl Preset {
    pub fn text(self) -> &'static str {
        match self {
            Preset::Device1 => include_str!("../presets/device1.cfg"),
            Preset::Device2 => include_str!("../presets/device2.cfg"),
            Preset::Teststructure => include_str!("../presets/teststructure.cfg"),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Device1 => "device1",
            Preset::Device2 => "device2",
            Preset::Teststructure => "teststructure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PhaseArg {
    Trivial,
    Topological,
}

#[derive(Debug, Parser)]
#[command(name = "topowg", version, about = "Topological waveguide models: bands, edge modes, bound states, scattering and dynamics")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Config document. Without it the command's built-in preset is used.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Built-in parameter set instead of a config file.
    #[arg(long, global = true, value_enum, conflicts_with = "config")]
    pub preset: Option<Preset>,
    /// Output directory (created if missing). Default: [run] output, else ".".
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed for commands that sample disorder.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct PairArgs {
    /// Cell separation |i − j| of the qubit pair.
    #[arg(long)]
    pub dn: Option<usize>,
    /// Phase of the waveguide section between the qubits.
    #[arg(long, value_enum)]
    pub phase: Option<PhaseArg>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Band curves (full and RWA) over the Brillouin zone.
    Dispersion,
    /// Closed-form passband edges.
    BandEdges,
    /// Zak phase and winding number of f(k).
    Zak,
    /// Normal modes of a finite array, optionally with tapers.
    FiniteModes,
    /// Edge-mode splitting versus array size and the fitted localization length.
    EdgeSplitting,
    /// Disorder ensemble of a finite array.
    Disorder,
    /// Photonic envelope of a qubit-photon bound state.
    BoundState {
        /// Label of the qubit section to use.
        #[arg(long)]
        qubit: Option<String>,
    },
    /// Pairwise qubit-qubit couplings mediated by bound states.
    CouplingMatrix,
    /// External coupling of bound states to both ports versus position.
    KappaProfile,
    /// Perfectly super-radiant points of a qubit pair.
    Superradiance(PairArgs),
    /// Exchange and correlated decay across the passband.
    JgCurves(PairArgs),
    /// Transmission map of a resonant qubit pair tuned across the passband.
    S21(PairArgs),
    /// Qubit population versus detuning and interaction time.
    Chevron,
    /// Three-step state transfer through the edge modes with error budget.
    Transfer,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Dispersion => "dispersion",
            Command::BandEdges => "band-edges",
            Command::Zak => "zak",
            Command::FiniteModes => "finite-modes",
            Command::EdgeSplitting => "edge-splitting",
            Command::Disorder => "disorder",
            Command::BoundState { .. } => "bound-state",
            Command::CouplingMatrix => "coupling-matrix",
            Command::KappaProfile => "kappa-profile",
            Command::Superradiance(_) => "superradiance",
            Command::JgCurves(_) => "jg-curves",
            Command::S21(_) => "s21",
            Command::Chevron => "chevron",
            Command::Transfer => "transfer",
        }
    }

    /// Preset used when neither `--config` nor `--preset` is given.
    pub fn default_preset(&self) -> Preset {
        match self {
            Command::EdgeSplitting | Command::Disorder => Preset::Teststructure,
            Command::Chevron | Command::Transfer => Preset::Device2,
            _ => Preset::Device1,
        }
    }

    fn overrides(&self, seed: Option<u64>) -> Overrides {
        let mut o = Overrides { seed, ..Default::default() };
        match self {
            Command::Superradiance(p) | Command::JgCurves(p) | Command::S21(p) => {
                o.delta_n = p.dn;
                o.phase = p.phase.map(|p| match p {
                    PhaseArg::Trivial => Phase::Trivial,
                    PhaseArg::Topological => Phase::Topological,
                });
            }
            Command::BoundState { qubit } => o.qubit = qubit.clone(),
            _ => {}
        }
        o
    }

    fn execute(&self, doc: &Document, ov: &Overrides) -> Result<Outcome, CliError> {
        match self {
            Command::Dispersion => commands::dispersion(doc),
            Command::BandEdges => commands::band_edges_cmd(doc),
            Command::Zak => commands::zak(doc),
            Command::FiniteModes => commands::finite_modes(doc),
            Command::EdgeSplitting => commands::edge_splitting(doc),
            Command::Disorder => commands::disorder(doc, ov),
            Command::BoundState { .. } => commands::bound_state_cmd(doc, ov),
            Command::CouplingMatrix => commands::coupling_matrix(doc),
            Command::KappaProfile => commands::kappa_profile(doc),
            Command::Superradiance(_) => commands::superradiance(doc, ov),
            Command::JgCurves(_) => commands::jg_curves(doc, ov),
            Command::S21(_) => commands::s21(doc, ov),
            Command::Chevron => commands::chevron(doc),
            Command::Transfer => commands::transfer(doc),
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn write(dir: &Path, name: &str, content: &str) -> Result<(), CliError> {
    std::fs::write(dir.join(name), content).map_err(|e| CliError::Io(format!("writing {}: {e}", dir.join(name).display())))
}

/// Parses, runs and writes artifacts. Returns the process exit code; errors
/// are reported on stderr as JSON.
pub fn run(cli: Cli) -> i32 {
    match run_inner(&cli) {
        Ok(line) => {
            println!("{line}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e.report()).expect("serializable report"));
            e.exit_code()
        }
    }
}

fn run_inner(cli: &Cli) -> Result<String, CliError> {
    let started = Instant::now();
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
    let g = &cli.global;
    let (text, source) = match (&g.config, g.preset) {
        (Some(path), _) => {
            let t = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(ConfigError::schema(format!("cannot read {}: {e}", path.display()), None)))?;
            (t, path.display().to_string())
        }
        (None, p) => {
            let p = p.unwrap_or_else(|| cli.command.default_preset());
            (p.text().to_string(), format!("preset:{}", p.name()))
        }
    };
    let doc = parse_config(&text)?;
    let run = doc.section("run");
    let output = g
        .output
        .clone()
        .or_else(|| run.and_then(|r| r.opt_word("output")).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let json = match g.format {
        Some(f) => f == Format::Json,
        None => run.and_then(|r| r.opt_word("format")) == Some("json"),
    };
    let jobs = g.jobs.or_else(|| run.and_then(|r| r.opt_int("jobs")).map(|j| j as usize));
    if jobs == Some(0) {
        return Err(ConfigError { kind: config::ConfigErrorKind::Range, message: "--jobs must be at least 1".into(), location: None }.into());
    }

    let ov = cli.command.overrides(g.seed);
    let outcome = match jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
            pool.install(|| cli.command.execute(&doc, &ov))
        }
        None => cli.command.execute(&doc, &ov),
    }?;

    std::fs::create_dir_all(&output).map_err(|e| CliError::Io(format!("creating {}: {e}", output.display())))?;
    let name = cli.command.name();
    let primary = format!("{name}.{}", if json { "json" } else { "csv" });
    write(&output, &primary, &outcome.primary.render(json))?;
    let mut written = vec![primary];
    for (suffix, content) in &outcome.sidecars {
        let f = format!("{name}.{suffix}");
        write(&output, &f, content)?;
        written.push(f);
    }
    let prov = Provenance {
        command: name.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_source: source,
        config_sha256: sha256_hex(text.as_bytes()),
        seed: outcome.seed.or(g.seed),
        jobs,
        format: if json { "json" } else { "csv" }.into(),
        started_unix_s: started_unix,
        wall_time_s: started.elapsed().as_secs_f64(),
        artifacts: written.clone(),
        summary: outcome.summary.clone(),
    };
    let prov_name = format!("{name}.provenance.json");
    write(&output, &prov_name, &to_json(&prov))?;
    Ok(format!("{name}: wrote {} and {prov_name} in {}; {}", written.join(", "), output.display(), outcome.summary))
}
