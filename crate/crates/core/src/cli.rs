//! Command-line front end: argument parsing, run manifests, and table output.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::asymptotics::{case1_levels, case2_levels, Branch};
use crate::currents::{
    current_case1, current_case1_per_level, current_case2, current_case2_per_level,
    current_numeric, CurrentError, NPolicy, OccupationWindow,
};
use crate::model::{derive_with, Channel, DerivedParams, PhaseConvention, PhysicalConfig, Spin};
use crate::oracle::{self, fd_eigenvalues, GridSpec};
use crate::quantize::{solve_channel, wavefunction, EnergyLevel, Method, SearchControls};

pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Solver(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Solver(_) => EXIT_SOLVER,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config: {m}"),
            CliError::Solver(m) => write!(f, "solver: {m}"),
            CliError::Io(m) => write!(f, "io: {m}"),
        }
    }
}

fn solver<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Solver(e.to_string().replace('\n', " "))
}

#[derive(Debug, Parser)]
#[command(name = "accavity", version, about = "Spectra and spin currents of a dipole outside a charged cylindrical cavity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energy levels by each requested method.
    Spectrum(CommonArgs),
    /// Persistent spin currents: closed forms next to numerical derivatives.
    Current(CommonArgs),
    /// Spectrum or currents over a swept parameter, in long format.
    Scan {
        #[command(flatten)]
        common: CommonArgs,
        /// Quantity to sweep.
        #[arg(long, value_enum, default_value_t = ScanTarget::Spectrum)]
        what: ScanTarget,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanTarget {
    Spectrum,
    Current,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Plus,
    Minus,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON file with m, mu, rho, r_a, r_b and optionally phi_override.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Angular momentum window, `a..b` or a single integer.
    #[arg(long, default_value = "-5..5", allow_hyphen_values = true)]
    pub ell: String,
    /// Spin projection: +1, -1 or both.
    #[arg(long, default_value = "both", allow_hyphen_values = true)]
    pub s: String,
    /// Comma-separated subset of exact, case1, case2, oracle.
    #[arg(long)]
    pub methods: Option<String>,
    /// Upper energy for the exact and oracle searches, in units of omega_ac.
    #[arg(long, default_value_t = 10.0)]
    pub emax: f64,
    /// Sweep, `param=v1,v2,...` with param one of rho, r_a, mu, phi_override.
    #[arg(long)]
    pub sweep: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Number of radial levels per channel (case2 always; exact and oracle cap).
    #[arg(long)]
    pub n: Option<usize>,
    /// Sign choice in the case-1 formula.
    #[arg(long, value_enum, default_value_t = BranchArg::Both)]
    pub branch: BranchArg,
    #[arg(long, value_enum, default_value_t = ConventionArg::Literal)]
    pub convention: ConventionArg,
    /// Use this value for the missing phase instead of s pi mu rho r_a^2.
    #[arg(long, allow_hyphen_values = true)]
    pub phi_override: Option<f64>,
    /// Nodes of the finite-difference oracle grid.
    #[arg(long, default_value_t = 20_000)]
    pub oracle_nodes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Literal,
    Unsigned,
}

impl From<ConventionArg> for PhaseConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Literal => PhaseConvention::Literal,
            ConventionArg::Unsigned => PhaseConvention::Unsigned,
        }
    }
}

/// Config file accepted by the CLI: the physical config plus an optional
/// phase override.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    m: f64,
    mu: f64,
    rho: f64,
    r_a: f64,
    r_b: f64,
    #[serde(default)]
    phi_override: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Rho,
    RA,
    Mu,
    PhiOverride,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Rho => "rho",
            SweepParam::RA => "r_a",
            SweepParam::Mu => "mu",
            SweepParam::PhiOverride => "phi_override",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

/// Everything one invocation computes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub config: PhysicalConfig,
    pub channels: Vec<Channel>,
    pub methods: Vec<Method>,
    pub sweep: Option<Sweep>,
    pub format: Format,
    pub emax: f64,
    pub n: Option<usize>,
    pub branches: Vec<Branch>,
    pub convention: PhaseConvention,
    pub phi_override: Option<f64>,
    pub oracle_nodes: usize,
}

impl RunManifest {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.channels.is_empty() {
            return Err(CliError::Config("channels: empty".into()));
        }
        if self.methods.is_empty() {
            return Err(CliError::Config("methods: empty".into()));
        }
        self.config
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if !(self.emax > 0.0) || !self.emax.is_finite() {
            return Err(CliError::Config(format!("emax: must be > 0, got {}", self.emax)));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(CliError::Config(format!("sweep: {} has no values", sweep.param.name())));
            }
        }
        if self.oracle_nodes < oracle::MIN_NODES {
            return Err(CliError::Config(format!(
                "oracle_nodes: must be >= {}, got {}",
                oracle::MIN_NODES,
                self.oracle_nodes
            )));
        }
        Ok(())
    }

    fn window(&self) -> (i64, i64) {
        let lo = self.channels.iter().map(|c| c.ell).min().unwrap_or(0);
        let hi = self.channels.iter().map(|c| c.ell).max().unwrap_or(0);
        (lo, hi)
    }

    fn spins(&self) -> Vec<Spin> {
        let mut s: Vec<Spin> = self.channels.iter().map(|c| c.s).collect();
        s.sort();
        s.dedup();
        s.reverse();
        s
    }

    fn derive(&self, ch: Channel) -> Result<DerivedParams, CliError> {
        derive_with(&self.config, ch, self.convention, self.phi_override)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    /// Copy with the swept parameter set to `value`.
    pub fn with_sweep_value(&self, param: SweepParam, value: f64) -> Result<RunManifest, CliError> {
        let mut m = self.clone();
        m.sweep = None;
        match param {
            SweepParam::Rho => m.config.rho = value,
            SweepParam::RA => m.config.r_a = value,
            SweepParam::Mu => m.config.mu = value,
            SweepParam::PhiOverride => m.phi_override = Some(value),
        }
        m.config
            .validate()
            .map_err(|e| CliError::Config(format!("sweep {}={value}: {e}", param.name())))?;
        Ok(m)
    }
}

fn parse_ell(text: &str) -> Result<(i64, i64), CliError> {
    let bad = || CliError::Config(format!("ell: expected a..b or an integer, got '{text}'"));
    match text.split_once("..") {
        Some((a, b)) => {
            let a = a.trim().parse().map_err(|_| bad())?;
            let b = b.trim().parse().map_err(|_| bad())?;
            Ok((a, b))
        }
        None => {
            let v = text.trim().parse().map_err(|_| bad())?;
            Ok((v, v))
        }
    }
}

fn parse_spins(text: &str) -> Result<Vec<Spin>, CliError> {
    match text.trim() {
        "+1" | "1" => Ok(vec![Spin::Up]),
        "-1" => Ok(vec![Spin::Down]),
        "both" => Ok(vec![Spin::Up, Spin::Down]),
        other => Err(CliError::Config(format!("s: expected +1, -1 or both, got '{other}'"))),
    }
}

fn parse_methods(text: &str) -> Result<Vec<Method>, CliError> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let m: Method = item.parse().map_err(|e| CliError::Config(format!("methods: {e}")))?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    out.sort();
    Ok(out)
}

fn parse_sweep(text: &str) -> Result<Sweep, CliError> {
    let (name, values) = text
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("sweep: expected param=v1,v2,..., got '{text}'")))?;
    let param = match name.trim() {
        "rho" => SweepParam::Rho,
        "r_a" => SweepParam::RA,
        "mu" => SweepParam::Mu,
        "phi_override" => SweepParam::PhiOverride,
        other => {
            return Err(CliError::Config(format!(
                "sweep: parameter '{other}' is not one of rho, r_a, mu, phi_override"
            )))
        }
    };
    let values = values
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|v| {
            v.parse::<f64>()
                .map_err(|_| CliError::Config(format!("sweep: '{v}' is not a number")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Sweep { param, values })
}

/// Builds and validates the manifest for one invocation.
pub fn manifest_from_args(args: &CommonArgs, default_methods: &str) -> Result<RunManifest, CliError> {
    let (config, file_phi) = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let file: ConfigFile =
                serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
            let cfg = PhysicalConfig {
                m: file.m,
                mu: file.mu,
                rho: file.rho,
                r_a: file.r_a,
                r_b: file.r_b,
            };
            (cfg, file.phi_override)
        }
        None => (PhysicalConfig::default(), None),
    };
    let (lo, hi) = parse_ell(&args.ell)?;
    let spins = parse_spins(&args.s)?;
    let channels = spins
        .iter()
        .flat_map(|&s| (lo..=hi).map(move |ell| Channel::new(ell, s)))
        .collect();
    let methods = parse_methods(args.methods.as_deref().unwrap_or(default_methods))?;
    let branches = match args.branch {
        BranchArg::Plus => vec![Branch::Plus],
        BranchArg::Minus => vec![Branch::Minus],
        BranchArg::Both => Branch::BOTH.to_vec(),
    };
    let manifest = RunManifest {
        config,
        channels,
        methods,
        sweep: args.sweep.as_deref().map(parse_sweep).transpose()?,
        format: args.format,
        emax: args.emax,
        n: args.n,
        branches,
        convention: args.convention.into(),
        phi_override: args.phi_override.or(file_phi),
        oracle_nodes: args.oracle_nodes,
    };
    manifest.validate()?;
    Ok(manifest)
}

/// A cell of an output table.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) if v.is_nan() => "nan".into(),
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(t) => t.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(_) => Value::Null,
            Cell::Int(v) => json!(v),
            Cell::Text(t) => json!(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(name: &str, columns: &[&'static str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub metadata: Vec<(String, String)>,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}: {v}");
        }
        for (i, t) in self.tables.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "# table: {}", t.name);
            out.push_str(&t.columns.join(","));
            out.push('\n');
            for row in &t.rows {
                let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let metadata: serde_json::Map<String, Value> = self
            .metadata
            .iter()
            .map(|(k, v)| (k.clone(), json!(v)))
            .collect();
        let tables: Vec<Value> = self
            .tables
            .iter()
            .map(|t| {
                json!({
                    "name": t.name,
                    "columns": t.columns,
                    "rows": t.rows.iter().map(|r| r.iter().map(Cell::json).collect::<Vec<_>>()).collect::<Vec<_>>(),
                })
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&json!({"metadata": metadata, "tables": tables}))
            .expect("report serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

fn metadata(m: &RunManifest, command: &str) -> Vec<(String, String)> {
    let mut md = vec![
        ("accavity".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("command".to_string(), command.to_string()),
        (
            "config".to_string(),
            serde_json::to_string(&m.config).expect("config serializes"),
        ),
        ("omega_ac".to_string(), format!("{:.16e}", m.config.omega_ac())),
        ("y_a".to_string(), format!("{:.16e}", m.config.y_a())),
        (
            "convention".to_string(),
            match m.convention {
                PhaseConvention::Literal => "literal".into(),
                PhaseConvention::Unsigned => "unsigned".into(),
            },
        ),
        (
            "methods".to_string(),
            m.methods.iter().map(|x| x.name()).collect::<Vec<_>>().join(","),
        ),
        ("emax_over_omega".to_string(), format!("{:.16e}", m.emax)),
    ];
    if let Some(phi) = m.phi_override {
        md.push((
            "phi_override".to_string(),
            format!("{phi:.16e} (non-physical: phase decoupled from mu rho r_a^2)"),
        ));
    }
    if let Some(s) = &m.sweep {
        md.push(("sweep".to_string(), s.param.name().to_string()));
    }
    md
}

/// Levels of one channel with a validity fraction (probability inside r_b).
struct ChannelLevels {
    levels: Vec<(EnergyLevel, f64)>,
}

fn channel_spectrum(m: &RunManifest, ch: Channel) -> Result<ChannelLevels, CliError> {
    let dp = m.derive(ch)?;
    let e_max = m.emax * dp.omega_ac;
    let cap = m.n.unwrap_or(usize::MAX);
    let mut levels = Vec::new();
    for &method in &m.methods {
        match method {
            Method::Exact => {
                let controls = SearchControls {
                    verify_nodes: Some(m.oracle_nodes),
                    ..SearchControls::default()
                };
                let found = solve_channel(&dp, e_max, &controls).map_err(solver)?;
                for l in found.into_iter().take(cap) {
                    let r_max = GridSpec::for_energy(&dp, l.energy, oracle::MIN_NODES)
                        .map_err(solver)?
                        .r_max;
                    let profile = wavefunction(&l, &dp, r_max, 2).map_err(solver)?;
                    levels.push((l, 1.0 - profile.mass_beyond_rb));
                }
            }
            Method::Oracle => {
                let grid = GridSpec::for_energy(&dp, e_max, m.oracle_nodes).map_err(solver)?;
                let k = oracle::sturm_count(&dp, &grid, e_max).min(cap);
                if k == 0 {
                    continue;
                }
                let spec = fd_eigenvalues(&dp, &grid, k).map_err(solver)?;
                for (n, &energy) in spec.extrapolated.iter().enumerate() {
                    let v = oracle::eigenvector(&dp, &grid, spec.coarse[n]);
                    let inside: f64 = v
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| grid.radius(*i) <= dp.r_b)
                        .map(|(_, x)| x * x)
                        .sum();
                    let level = EnergyLevel {
                        n,
                        ell: ch.ell,
                        s: ch.s.as_i8(),
                        energy,
                        method: Method::Oracle,
                        branch: None,
                        residual: (spec.fine[n] - spec.coarse[n]).abs(),
                        residual_scale: 0.0,
                        bracket_width: 1e-10 * dp.omega_ac,
                    };
                    levels.push((level, inside));
                }
            }
            Method::Case1 => {
                for l in case1_levels(&dp, &m.branches) {
                    if l.n < cap {
                        levels.push((l, f64::NAN));
                    }
                }
            }
            Method::Case2 => {
                let count = match m.n {
                    Some(n) => n,
                    None => (0..)
                        .take_while(|&n| crate::asymptotics::energy_case2(n, &dp) <= e_max)
                        .count(),
                };
                for l in case2_levels(&dp, count) {
                    levels.push((l, f64::NAN));
                }
            }
        }
    }
    Ok(ChannelLevels { levels })
}

const SPECTRUM_COLUMNS: [&str; 10] = [
    "method", "branch", "ell", "s", "n", "gamma", "energy", "residual", "bracket_width",
    "validity_fraction",
];

fn spectrum_row(l: &EnergyLevel, gamma: f64, validity: f64) -> Vec<Cell> {
    vec![
        Cell::Text(l.method.name().into()),
        Cell::Text(l.branch.map_or(String::new(), |b| b.to_string())),
        Cell::Int(l.ell),
        Cell::Int(l.s as i64),
        Cell::Int(l.n as i64),
        Cell::Num(gamma),
        Cell::Num(l.energy),
        Cell::Num(l.residual),
        Cell::Num(l.bracket_width),
        Cell::Num(validity),
    ]
}

/// Sort key (method, ell, s, n, branch) and the cells of one spectrum row.
type SpectrumRow = (Method, i64, i8, usize, Option<Branch>, Vec<Cell>);

fn spectrum_tables(m: &RunManifest) -> Result<(Table, Option<Table>), CliError> {
    let per_channel: Vec<Result<(Channel, f64, ChannelLevels), CliError>> = m
        .channels
        .par_iter()
        .map(|&ch| {
            let gamma = m.derive(ch)?.gamma;
            Ok((ch, gamma, channel_spectrum(m, ch)?))
        })
        .collect();
    let mut rows: Vec<SpectrumRow> = Vec::new();
    let mut comparison = Table::new(
        "case1_vs_exact",
        &["ell", "s", "n", "branch", "case1", "exact", "difference"],
    );
    for item in per_channel {
        let (ch, gamma, cl) = item?;
        for (l, v) in &cl.levels {
            rows.push((l.method, l.ell, l.s, l.n, l.branch, spectrum_row(l, gamma, *v)));
        }
        let exact: Vec<&EnergyLevel> = cl
            .levels
            .iter()
            .map(|(l, _)| l)
            .filter(|l| l.method == Method::Exact)
            .collect();
        for (c1, _) in cl.levels.iter().filter(|(l, _)| l.method == Method::Case1) {
            let e = exact.iter().find(|l| l.n == c1.n).map_or(f64::NAN, |l| l.energy);
            comparison.rows.push(vec![
                Cell::Int(ch.ell),
                Cell::Int(ch.s.as_i8() as i64),
                Cell::Int(c1.n as i64),
                Cell::Text(c1.branch.map_or(String::new(), |b| b.to_string())),
                Cell::Num(c1.energy),
                Cell::Num(e),
                Cell::Num(c1.energy - e),
            ]);
        }
    }
    // (method, ℓ, s, n) with s = +1 first, then branch.
    rows.sort_by(|a, b| {
        (a.0, a.1, -a.2, a.3, a.4).cmp(&(b.0, b.1, -b.2, b.3, b.4))
    });
    let mut table = Table::new("spectrum", &SPECTRUM_COLUMNS);
    table.rows = rows.into_iter().map(|r| r.5).collect();
    let compare = m.methods.contains(&Method::Exact) && m.methods.contains(&Method::Case1);
    Ok((table, compare.then_some(comparison)))
}

pub fn cmd_spectrum(m: &RunManifest) -> Result<Report, CliError> {
    m.validate()?;
    let (table, comparison) = spectrum_tables(m)?;
    let mut tables = vec![table];
    tables.extend(comparison);
    Ok(Report {
        metadata: metadata(m, "spectrum"),
        tables,
    })
}

const CURRENT_COLUMNS: [&str; 10] = [
    "method", "branch", "s", "ell_min", "ell_max", "phi_mac", "literal", "per_level", "numeric",
    "numeric_half_step",
];

fn current_rows(m: &RunManifest) -> Result<Vec<Vec<Cell>>, CliError> {
    let (lo, hi) = m.window();
    let mut rows = Vec::new();
    for s in m.spins() {
        let base = m.derive(Channel::new(lo, s))?;
        let phi = base.phi_mac;
        let h = 1e-6 * phi.abs().max(1.0);
        let row = |method: Method, branch: Option<Branch>, lit: f64, per: f64, num: f64, half: f64| {
            vec![
                Cell::Text(method.name().into()),
                Cell::Text(branch.map_or(String::new(), |b| b.to_string())),
                Cell::Int(s.as_i8() as i64),
                Cell::Int(lo),
                Cell::Int(hi),
                Cell::Num(phi),
                Cell::Num(lit),
                Cell::Num(per),
                Cell::Num(num),
                Cell::Num(half),
            ]
        };
        for &method in &m.methods {
            match method {
                Method::Case1 => {
                    let w = OccupationWindow::new(lo, hi, NPolicy::AllAdmissible).map_err(solver)?;
                    for &branch in &m.branches {
                        let source = |p: f64| -> Result<Vec<EnergyLevel>, CurrentError> {
                            Ok(w.channels(&base.with_phase(p))
                                .iter()
                                .flat_map(|ch| case1_levels(ch, &[branch]))
                                .collect())
                        };
                        let lit = current_case1(&base, &w, branch).map_err(solver)?;
                        let per = current_case1_per_level(&base, &w, branch).map_err(solver)?;
                        let num = current_numeric(source, phi, &w, h).map_err(solver)?;
                        let half = current_numeric(source, phi, &w, 0.5 * h).map_err(solver)?;
                        rows.push(row(method, Some(branch), lit, per, num, half));
                    }
                }
                Method::Case2 => {
                    let count = m.n.unwrap_or(1);
                    let w = OccupationWindow::new(lo, hi, NPolicy::Explicit((0..count).collect()))
                        .map_err(solver)?;
                    let dps = w.channels(&base);
                    let source = |p: f64| -> Result<Vec<EnergyLevel>, CurrentError> {
                        Ok(w.channels(&base.with_phase(p))
                            .iter()
                            .flat_map(|ch| case2_levels(ch, count))
                            .collect())
                    };
                    let lit = current_case2(&dps, s).map_err(solver)?;
                    let per = current_case2_per_level(&dps, s, count).map_err(solver)?;
                    let num = current_numeric(source, phi, &w, h).map_err(solver)?;
                    let half = current_numeric(source, phi, &w, 0.5 * h).map_err(solver)?;
                    rows.push(row(method, None, lit, per, num, half));
                }
                Method::Exact | Method::Oracle => {
                    let count = m.n.unwrap_or(1);
                    let w = OccupationWindow::new(lo, hi, NPolicy::Explicit((0..count).collect()))
                        .map_err(solver)?;
                    let hx = 1e-4 * phi.abs().max(1.0);
                    let source = |p: f64| exact_source(m, &w, &base, p, count, method);
                    let num = current_numeric(source, phi, &w, hx).map_err(solver)?;
                    let half = current_numeric(source, phi, &w, 0.5 * hx).map_err(solver)?;
                    rows.push(row(method, None, f64::NAN, f64::NAN, num, half));
                }
            }
        }
    }
    Ok(rows)
}

/// Lowest `count` levels of every channel in the window at phase `phi`.
fn exact_source(
    m: &RunManifest,
    w: &OccupationWindow,
    base: &DerivedParams,
    phi: f64,
    count: usize,
    method: Method,
) -> Result<Vec<EnergyLevel>, CliError> {
    let per: Vec<Result<Vec<EnergyLevel>, CliError>> = w
        .channels(&base.with_phase(phi))
        .par_iter()
        .map(|dp| {
            let e_max = m.emax * dp.omega_ac;
            match method {
                Method::Oracle => {
                    let grid = GridSpec::for_energy(dp, e_max, m.oracle_nodes).map_err(solver)?;
                    let spec = fd_eigenvalues(dp, &grid, count).map_err(solver)?;
                    Ok(spec
                        .extrapolated
                        .iter()
                        .enumerate()
                        .map(|(n, &energy)| EnergyLevel {
                            n,
                            ell: dp.channel.ell,
                            s: dp.channel.s.as_i8(),
                            energy,
                            method,
                            branch: None,
                            residual: 0.0,
                            residual_scale: 0.0,
                            bracket_width: 0.0,
                        })
                        .collect())
                }
                _ => {
                    let controls = SearchControls {
                        verify_nodes: None,
                        ..SearchControls::default()
                    };
                    let levels = solve_channel(dp, e_max, &controls).map_err(solver)?;
                    if levels.len() < count {
                        return Err(CliError::Solver(format!(
                            "channel ell = {} has {} levels below emax, {count} requested",
                            dp.channel.ell,
                            levels.len()
                        )));
                    }
                    Ok(levels.into_iter().take(count).collect())
                }
            }
        })
        .collect();
    let mut out = Vec::new();
    for p in per {
        out.extend(p?);
    }
    Ok(out)
}

pub fn cmd_current(m: &RunManifest) -> Result<Report, CliError> {
    m.validate()?;
    let mut table = Table::new("current", &CURRENT_COLUMNS);
    table.rows = current_rows(m)?;
    Ok(Report {
        metadata: metadata(m, "current"),
        tables: vec![table],
    })
}

pub fn cmd_scan(m: &RunManifest, what: ScanTarget) -> Result<Report, CliError> {
    m.validate()?;
    let sweep = m
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep: required for scan".into()))?;
    let inner_columns: &[&'static str] = match what {
        ScanTarget::Spectrum => &SPECTRUM_COLUMNS,
        ScanTarget::Current => &CURRENT_COLUMNS,
    };
    let mut columns = vec!["param", "value", "y_a", "phi_mac_up"];
    columns.extend_from_slice(inner_columns);
    let mut table = Table::new("scan", &columns);
    for &value in &sweep.values {
        let point = m.with_sweep_value(sweep.param, value)?;
        let phi_up = point.derive(Channel::new(0, Spin::Up))?.phi_mac;
        let prefix = [
            Cell::Text(sweep.param.name().into()),
            Cell::Num(value),
            Cell::Num(point.config.y_a()),
            Cell::Num(phi_up),
        ];
        let rows = match what {
            ScanTarget::Spectrum => spectrum_tables(&point)?.0.rows,
            ScanTarget::Current => current_rows(&point)?,
        };
        for r in rows {
            let mut full = prefix.to_vec();
            full.extend(r);
            table.rows.push(full);
        }
    }
    Ok(Report {
        metadata: metadata(m, "scan"),
        tables: vec![table],
    })
}

/// Parses arguments, runs the command, writes the output. Returns the exit code.
pub fn run(cli: Cli) -> i32 {
    let result = (|| -> Result<(), CliError> {
        let (report, format, out) = match &cli.command {
            Command::Spectrum(args) => {
                let m = manifest_from_args(args, "exact,case1,case2,oracle")?;
                (cmd_spectrum(&m)?, m.format, args.out.clone())
            }
            Command::Current(args) => {
                let m = manifest_from_args(args, "case1,case2")?;
                (cmd_current(&m)?, m.format, args.out.clone())
            }
            Command::Scan { common, what } => {
                let default = match what {
                    ScanTarget::Spectrum => "exact",
                    ScanTarget::Current => "case2",
                };
                let m = manifest_from_args(common, default)?;
                (cmd_scan(&m, *what)?, m.format, common.out.clone())
            }
        };
        let text = report.render(format);
        match out {
            Some(path) => std::fs::write(&path, text)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
            None => {
                use std::io::Write;
                std::io::stdout()
                    .write_all(text.as_bytes())
                    .map_err(|e| CliError::Io(e.to_string()))
            }
        }
    })();
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
