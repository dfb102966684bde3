//! `contagion` command line: `sweep`, `metrics` and `walk`.
//!
//! Settings resolve in the order: command-line flag, `--config` file,
//! `CONTAGION_SEED` (seed only), built-in default. Exit codes are 0 on
//! success, 1 on runtime or I/O failure and 2 on usage or config errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Display;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::parser::ValueSource;
use clap::{value_parser, Arg, ArgAction, ArgMatches, Command};

use crate::error::Error;
use crate::experiment::{run_sweep, write_sweep_csv, SweepConfig};
use crate::netgen::{
    average_clustering, binomial_pmf, degree_pmf_poisson, generate, path_length_estimate,
    path_length_report, read_edge_list, DirectedWeightedNetwork, NetworkConfig, Projection,
};
use crate::spread::{lattice_walk_3d, random_walk, write_lattice_csv, write_node_walk_csv};
use crate::rng::child_seed;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const SEED_ENV: &str = "CONTAGION_SEED";
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn seed_arg() -> Arg {
    Arg::new("seed")
        .long("seed")
        .env(SEED_ENV)
        .default_value("42")
        .value_parser(value_parser!(u64))
        .help("Master RNG seed")
}

fn config_arg() -> Arg {
    Arg::new("config")
        .long("config")
        .value_parser(value_parser!(PathBuf))
        .help("key=value file overriding defaults; flags override the file")
}

fn threads_arg() -> Arg {
    Arg::new("threads")
        .long("threads")
        .default_value("0")
        .value_parser(value_parser!(usize))
        .help("Worker threads (0 = machine parallelism); output does not depend on it")
}

fn out_arg(help: &'static str) -> Arg {
    Arg::new("out")
        .long("out")
        .value_parser(value_parser!(PathBuf))
        .help(help)
}

fn flag(name: &'static str, default: &'static str, help: &'static str) -> Arg {
    Arg::new(name).long(name).default_value(default).help(help)
}

fn switch(name: &'static str, help: &'static str) -> Arg {
    Arg::new(name).long(name).action(ArgAction::SetTrue).help(help)
}

pub fn command() -> Command {
    Command::new("contagion")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Default cascades on random directed weighted interbank networks")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(
            Command::new("sweep")
                .about("Solvency after a cascade, averaged over trials, across a link-probability grid")
                .arg(flag("banks", "100", "Number of banks"))
                .arg(flag("shocked", "15", "Banks shocked into default per trial"))
                .arg(flag("p-min", "0.04", "Lowest link probability"))
                .arg(flag("p-max", "0.1", "Highest link probability"))
                .arg(flag("grid", "15", "Equally spaced grid points, both ends included"))
                .arg(flag("iters", "10", "Trials per grid point"))
                .arg(flag("recovery", "0", "Fraction of an exposure recovered on default"))
                .arg(flag("q", "1", "Resale price of external assets (1 = no fire sales)"))
                .arg(flag("margin", "0.23", "Starting capital buffer as a fraction of total assets"))
                .arg(switch("fixed-network", "Reuse one network per grid point; redraw only the shock"))
                .arg(seed_arg())
                .arg(out_arg("Sweep CSV path (stdout if omitted); a .manifest is written next to it"))
                .arg(threads_arg())
                .arg(config_arg()),
        )
        .subcommand(
            Command::new("metrics")
                .about("Degree statistics, clustering, path length and analytic degree laws as CSV")
                .arg(flag("n", "100", "Number of nodes"))
                .arg(flag("p", "0.05", "Link probability"))
                .arg(
                    Arg::new("in")
                        .long("in")
                        .value_parser(value_parser!(PathBuf))
                        .help("Read the network from an edge-list file instead of generating it"),
                )
                .arg(seed_arg())
                .arg(threads_arg())
                .arg(config_arg()),
        )
        .subcommand(
            Command::new("walk")
                .about("Random walks on a generated network or on the 3-D cubic lattice")
                .arg(switch("lattice", "Walk on the 3-D lattice instead of a network"))
                .arg(flag("walkers", "1000", "Number of walkers"))
                .arg(flag("steps", "10", "Steps per walker"))
                .arg(flag("n", "100", "Network nodes (network walks)"))
                .arg(flag("p", "0.05", "Link probability (network walks)"))
                .arg(
                    Arg::new("in")
                        .long("in")
                        .value_parser(value_parser!(PathBuf))
                        .help("Edge-list file to walk on (network walks)"),
                )
                .arg(seed_arg())
                .arg(out_arg("Path CSV (stdout if omitted)"))
                .arg(threads_arg())
                .arg(config_arg()),
        )
}

/// Flat `key=value` settings; keys are flag names without dashes prefix.
#[derive(Debug, Default)]
struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    fn load(path: Option<&PathBuf>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("--config {}: {e}", path.display())))?;
        let mut values = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!(
                    "--config {} line {}: expected key=value",
                    path.display(),
                    idx + 1
                ))
            })?;
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }
}

struct Resolver<'a> {
    matches: &'a ArgMatches,
    file: ConfigFile,
}

impl<'a> Resolver<'a> {
    fn new(matches: &'a ArgMatches) -> CliResult<Self> {
        let file = ConfigFile::load(matches.get_one::<PathBuf>("config"))?;
        for key in file.values.keys() {
            let known = matches.ids().any(|id| id.as_str() == key) || key == "out" || key == "in";
            if !known || key == "config" {
                return Err(CliError::Usage(format!("--config: unknown key `{key}`")));
            }
        }
        Ok(Self { matches, file })
    }

    fn source(&self, id: &str) -> Option<ValueSource> {
        self.matches.value_source(id)
    }

    fn raw(&self, id: &str) -> Option<String> {
        let from_flag = || {
            self.matches
                .get_raw(id)
                .and_then(|mut vals| vals.next())
                .map(|v| v.to_string_lossy().into_owned())
        };
        match self.source(id) {
            Some(ValueSource::CommandLine) => from_flag(),
            _ => self.file.values.get(id).cloned().or_else(from_flag),
        }
    }

    fn get<T: FromStr>(&self, id: &str) -> CliResult<T>
    where
        T::Err: Display,
    {
        let raw = self
            .raw(id)
            .ok_or_else(|| CliError::Usage(format!("--{id} is required")))?;
        raw.parse()
            .map_err(|e| CliError::Usage(format!("--{id}: invalid value `{raw}`: {e}")))
    }

    fn path(&self, id: &str) -> Option<PathBuf> {
        self.raw(id).map(PathBuf::from)
    }

    fn switch(&self, id: &str) -> CliResult<bool> {
        if self.matches.get_flag(id) {
            return Ok(true);
        }
        match self.file.values.get(id) {
            Some(v) => v
                .parse()
                .map_err(|_| CliError::Usage(format!("--{id}: expected true or false, got `{v}`"))),
            None => Ok(false),
        }
    }
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match matches.subcommand() {
        Some(("sweep", m)) => cmd_sweep(m),
        Some(("metrics", m)) => cmd_metrics(m),
        Some(("walk", m)) => cmd_walk(m),
        _ => Err(CliError::Usage("unknown subcommand".into())),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            EXIT_RUNTIME
        }
    }
}

fn with_threads<T: Send>(
    threads: usize,
    job: impl FnOnce() -> CliResult<T> + Send,
) -> CliResult<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    pool.install(job)
}

fn flag_for(field: &str) -> &'static str {
    match field {
        "n_banks" => "--banks",
        "n_shocked" => "--shocked",
        "p_min" => "--p-min",
        "p_max" => "--p-max",
        "grid_points" => "--grid",
        "iterations" => "--iters",
        "recovery_rate" => "--recovery",
        "q" => "--q",
        "target_buffer_margin" => "--margin",
        "n" => "--n",
        "p" => "--p",
        "walkers" => "--walkers",
        _ => "config",
    }
}

fn usage_from(err: Error) -> CliError {
    match err {
        Error::InvalidConfig { field, message } => {
            CliError::Usage(format!("{}: {}", flag_for(field), message))
        }
        other => CliError::Runtime(other.to_string()),
    }
}

fn runtime(err: Error) -> CliError {
    CliError::Runtime(err.to_string())
}

fn open_output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::Runtime(format!("{}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest");
    PathBuf::from(name)
}

fn cmd_sweep(m: &ArgMatches) -> CliResult<()> {
    let r = Resolver::new(m)?;
    let mut config = SweepConfig {
        n_banks: r.get("banks")?,
        n_shocked: r.get("shocked")?,
        p_min: r.get("p-min")?,
        p_max: r.get("p-max")?,
        grid_points: r.get("grid")?,
        iterations: r.get("iters")?,
        master_seed: r.get("seed")?,
        fixed_network: r.switch("fixed-network")?,
        ..SweepConfig::default()
    };
    config.cascade.recovery_rate = r.get("recovery")?;
    config.cascade.q = r.get("q")?;
    config.sheet_config.target_buffer_margin = r.get("margin")?;
    let threads: usize = r.get("threads")?;
    let out = r.path("out");
    if let Some(err) = config.problems().into_iter().next() {
        return Err(usage_from(err));
    }

    let result = with_threads(threads, || run_sweep(&config).map_err(usage_from))?;
    let mut w = open_output(out.as_deref())?;
    write_sweep_csv(&result, &mut w).map_err(runtime)?;
    w.flush()?;

    if let Some(out) = out {
        let manifest = RunManifest {
            config: &config,
            out: &out,
        };
        let path = manifest_path(&out);
        let mut file = File::create(&path)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        manifest.write(&mut file)?;
    }
    Ok(())
}

/// Resolved settings of a sweep, readable back through `--config`.
pub struct RunManifest<'a> {
    pub config: &'a SweepConfig,
    pub out: &'a Path,
}

impl RunManifest<'_> {
    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        let c = self.config;
        let sheets = &c.sheet_config;
        writeln!(w, "# contagion {} sweep manifest", env!("CARGO_PKG_VERSION"))?;
        let created = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        writeln!(w, "# created_unix={created}")?;
        writeln!(w, "# std_convention=population")?;
        writeln!(w, "# sheets: external_assets={:?} deposits={:?}",
            sheets.external_asset_rule, sheets.deposit_rule)?;
        writeln!(w, "# weights={:?} phi_mode={:?}", c.weight_rule, c.cascade.phi_mode)?;
        writeln!(w, "banks={}", c.n_banks)?;
        writeln!(w, "shocked={}", c.n_shocked)?;
        writeln!(w, "p-min={}", c.p_min)?;
        writeln!(w, "p-max={}", c.p_max)?;
        writeln!(w, "grid={}", c.grid_points)?;
        writeln!(w, "iters={}", c.iterations)?;
        writeln!(w, "seed={}", c.master_seed)?;
        writeln!(w, "recovery={}", c.cascade.recovery_rate)?;
        writeln!(w, "q={}", c.cascade.q)?;
        writeln!(w, "margin={}", sheets.target_buffer_margin)?;
        writeln!(w, "fixed-network={}", c.fixed_network)?;
        writeln!(w, "out={}", self.out.display())?;
        Ok(())
    }
}

fn load_or_generate(r: &Resolver<'_>) -> CliResult<(DirectedWeightedNetwork, Option<f64>)> {
    if let Some(path) = r.path("in") {
        let file = File::open(&path)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        let net = read_edge_list(BufReader::new(file))
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        return Ok((net, None));
    }
    let cfg = NetworkConfig::new(r.get("n")?, r.get("p")?, r.get("seed")?);
    let net = generate(&cfg).map_err(usage_from)?;
    Ok((net, Some(cfg.p)))
}

fn cmd_metrics(m: &ArgMatches) -> CliResult<()> {
    let r = Resolver::new(m)?;
    let threads: usize = r.get("threads")?;
    let (net, p) = load_or_generate(&r)?;
    let n = net.node_count();
    // Total (in + out) degree is binomial over 2(n - 1) ordered pairs.
    let trials = 2 * (n as u64).saturating_sub(1);
    let p = p.unwrap_or_else(|| {
        if trials == 0 {
            0.0
        } else {
            net.edge_count() as f64 / (n as f64 * (n as f64 - 1.0))
        }
    });
    let stats = net.degree_stats();
    let (clustering, paths) = with_threads(threads, || {
        Ok((average_clustering(&net), path_length_report(&net)))
    })?;

    let mut rows: Vec<(String, String, String)> = Vec::new();
    let mut put = |section: &str, key: String, value: String| {
        rows.push((section.to_string(), key, value));
    };
    put("summary", "nodes".into(), n.to_string());
    put("summary", "edges".into(), net.edge_count().to_string());
    put("summary", "z_av".into(), stats.z_av.to_string());
    put("summary", "mean_out_degree".into(), stats.mean_out_degree().to_string());
    put("summary", "avg_clustering".into(), clustering.to_string());
    put("summary", "projection_density".into(), Projection::of(&net).density().to_string());
    put(
        "summary",
        "avg_path_length".into(),
        paths.mean.map_or("disconnected".to_string(), |v| v.to_string()),
    );
    put("summary", "reachable_pairs".into(), paths.reachable_pairs.to_string());
    put("summary", "unreachable_pairs".into(), paths.unreachable_pairs.to_string());
    put(
        "summary",
        "path_length_estimate".into(),
        path_length_estimate(n as u64, stats.mean_out_degree())
            .map_or("undefined".to_string(), |v| v.to_string()),
    );

    let mut max_gap: f64 = 0.0;
    let mut degree_rows = Vec::new();
    for z in 0..=trials {
        let empirical = stats.total_degrees.get(z as usize).copied().unwrap_or(0) as f64 / n as f64;
        let binom = binomial_pmf(trials, p, z).map_err(runtime)?;
        let poisson = degree_pmf_poisson(stats.z_av, z).map_err(runtime)?;
        max_gap = max_gap.max((binom - poisson).abs());
        if empirical > 0.0 || binom > 1e-12 {
            degree_rows.push((z, empirical, binom, poisson));
        }
    }
    put("summary", "binomial_poisson_max_gap".into(), max_gap.to_string());
    for (z, empirical, binom, poisson) in degree_rows {
        put("degree_empirical", z.to_string(), empirical.to_string());
        put("degree_binomial", z.to_string(), binom.to_string());
        put("degree_poisson", z.to_string(), poisson.to_string());
    }

    let mut w = open_output(None)?;
    writeln!(w, "section,key,value")?;
    for (section, key, value) in rows {
        writeln!(w, "{section},{key},{value}")?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_walk(m: &ArgMatches) -> CliResult<()> {
    let r = Resolver::new(m)?;
    let threads: usize = r.get("threads")?;
    let walkers: usize = r.get("walkers")?;
    let steps: usize = r.get("steps")?;
    let seed: u64 = r.get("seed")?;
    let out = r.path("out");
    if walkers == 0 {
        return Err(CliError::Usage("--walkers: need at least one walker".into()));
    }
    if r.switch("lattice")? {
        let paths = with_threads(threads, || lattice_walk_3d(walkers, steps, seed).map_err(usage_from))?;
        let mut w = open_output(out.as_deref())?;
        write_lattice_csv(&paths, &mut w).map_err(runtime)?;
        w.flush()?;
        return Ok(());
    }
    let (net, _) = load_or_generate(&r)?;
    let paths = (0..walkers)
        .map(|k| random_walk(&net, k % net.node_count(), steps, child_seed(seed, k as u64)))
        .collect::<crate::Result<Vec<_>>>()
        .map_err(runtime)?;
    let mut w = open_output(out.as_deref())?;
    write_node_walk_csv(&paths, &mut w).map_err(runtime)?;
    w.flush()?;
    Ok(())
}
