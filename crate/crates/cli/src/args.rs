use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, CommandFactory, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "capcond", version, about = "Condition numbers of spherical feasibility problems and Monte Carlo checks of their tail bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Classify an instance as strictly feasible (SF), ill-posed (IP) or infeasible (IF).
    #[command(args_override_self = true)]
    Classify(InstanceArgs),
    /// Print the class and the condition number of an instance.
    #[command(args_override_self = true)]
    Cond(InstanceArgs),
    /// Print the smallest including cap of an instance.
    #[command(args_override_self = true)]
    Sic(InstanceArgs),
    /// Draw one instance from the cap law around a center and print it in instance-file format.
    #[command(args_override_self = true)]
    Sample(SampleArgs),
    /// Tail probabilities of the condition number against both tail bounds.
    #[command(name = "exp-tail", args_override_self = true)]
    ExpTail(TailArgs),
    /// Mean of ln cond against the expectation bound, with the adversarial-center sweep.
    #[command(name = "exp-mean", args_override_self = true)]
    ExpMean(MeanArgs),
    /// Feasibility frequency of k uniform points against the exact probability.
    #[command(name = "exp-wendel", args_override_self = true)]
    ExpWendel(WendelArgs),
    /// Relative volumes of boundary neighborhoods of caps against the tube bound.
    #[command(name = "exp-tube", args_override_self = true)]
    ExpTube(TubeArgs),
    /// Property checks on constructed instances and synthetic random variables.
    #[command(name = "exp-properties", args_override_self = true)]
    ExpProperties(PropertyArgs),
    /// KS checks of the cap sampler against its exact radial law.
    #[command(name = "validate-sampler", args_override_self = true)]
    ValidateSampler(SamplerArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ConfigArg {
    /// key=value file of flag values (keys are long flag names); flags on the command line win
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct InstanceArgs {
    /// Instance file: first line "n m", then n rows of m+1 reals [required]
    #[arg(long, value_name = "PATH")]
    pub instance: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArg,
}

/// The cap law `μ_ā`.
#[derive(Args, Debug, Clone)]
pub struct LawArgs {
    /// Sphere dimension m (points live in R^{m+1})
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// Cap radius in radians, or "piOverK" for π/K
    #[arg(long, default_value = "piOver6", value_parser = parse_alpha)]
    pub alpha: f64,
    /// Pole order of the radial density, 0 <= beta < m
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    /// Table of (r, h(r)) pairs, one per line; default h = 1
    #[arg(long = "h-table", value_name = "PATH")]
    pub h_table: Option<PathBuf>,
    /// Tolerance formula for the transferred bounds: lemma | beta0-remark
    #[arg(long = "delta-mode", default_value = "lemma")]
    pub delta_mode: String,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Number of Monte Carlo samples
    #[arg(long = "N", default_value_t = 100_000)]
    pub samples: usize,
    /// Master seed
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads [default: machine parallelism]
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory for samples.csv and summary.json
    #[arg(long, value_name = "DIR", default_value = "capcond-out")]
    pub out: PathBuf,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Args, Debug, Clone)]
pub struct CenterArgs {
    /// Number of rows n
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    /// Center instance: file:PATH | random | coincident | great-circle
    #[arg(long, default_value = "random")]
    pub center: String,
}

#[derive(Args, Debug, Clone)]
pub struct SampleArgs {
    #[command(flatten)]
    pub law: LawArgs,
    #[command(flatten)]
    pub center: CenterArgs,
    /// Master seed
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Also write the instance to DIR/instance.txt
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Args, Debug, Clone)]
pub struct TailArgs {
    #[command(flatten)]
    pub law: LawArgs,
    #[command(flatten)]
    pub center: CenterArgs,
    /// Geometric t-grid lo:hi:points [default: 12 points over four decades from the feasible-bound threshold]
    #[arg(long = "t-grid", value_parser = parse_grid)]
    pub t_grid: Option<(f64, f64, usize)>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug, Clone)]
pub struct MeanArgs {
    #[command(flatten)]
    pub law: LawArgs,
    #[command(flatten)]
    pub center: CenterArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug, Clone)]
pub struct WendelArgs {
    /// Sphere dimension m
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// Range of point counts lo:hi
    #[arg(long, default_value = "4:10", value_parser = parse_range)]
    pub k: (usize, usize),
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug, Clone)]
pub struct TubeArgs {
    /// Sphere dimension m
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug, Clone)]
pub struct PropertyArgs {
    #[command(flatten)]
    pub law: LawArgs,
    /// Number of rows n
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    /// Neighborhood radius for the witness check
    #[arg(long, default_value_t = 0.1)]
    pub phi: f64,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug, Clone)]
pub struct SamplerArgs {
    #[command(flatten)]
    pub law: LawArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

/// Radians, or `piOverK` for `π/K`.
pub fn parse_alpha(s: &str) -> Result<f64, String> {
    let v = match s.strip_prefix("piOver") {
        Some(k) => {
            let k: f64 = k.parse().map_err(|_| format!("`{s}`: expected piOverK with K a number"))?;
            std::f64::consts::PI / k
        }
        None => s.parse().map_err(|_| format!("`{s}`: expected radians or piOverK"))?,
    };
    if v > 0.0 && v < std::f64::consts::FRAC_PI_2 {
        Ok(v)
    } else {
        Err(format!("alpha = {v} must lie in (0, π/2)"))
    }
}

pub fn parse_grid(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<_> = s.split(':').collect();
    let bad = || format!("`{s}`: expected lo:hi:points with 0 < lo < hi");
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let points: usize = parts[2].parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi > lo) || points < 2 {
        return Err(bad());
    }
    Ok((lo, hi, points))
}

pub fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let bad = || format!("`{s}`: expected lo:hi with lo <= hi");
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let lo: usize = lo.parse().map_err(|_| bad())?;
    let hi: usize = hi.parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

impl Command {
    fn config_path(&self) -> Option<&Path> {
        let c = match self {
            Command::Classify(a) | Command::Cond(a) | Command::Sic(a) => &a.config,
            Command::Sample(a) => &a.config,
            Command::ExpTail(a) => &a.run.config,
            Command::ExpMean(a) => &a.run.config,
            Command::ExpWendel(a) => &a.run.config,
            Command::ExpTube(a) => &a.run.config,
            Command::ExpProperties(a) => &a.run.config,
            Command::ValidateSampler(a) => &a.run.config,
        };
        c.config.as_deref()
    }
}

/// Lines of `key=value`; blank lines and `#` comments are ignored.
pub fn read_config(path: &Path) -> Result<Vec<(String, String, usize)>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config file {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{}:{}: expected key=value", path.display(), i + 1))?;
        out.push((k.trim().trim_start_matches("--").replace('_', "-"), v.trim().to_string(), i + 1));
    }
    Ok(out)
}

/// Parses the command line; config-file values are spliced in ahead of the explicit flags so
/// that a flag given on the command line overrides them.
pub fn parse(argv: Vec<OsString>) -> std::result::Result<Cli, ParseFailure> {
    let first = Cli::try_parse_from(&argv).map_err(ParseFailure::Clap)?;
    let Some(path) = first.command.config_path().map(Path::to_path_buf) else {
        return Ok(first);
    };
    let entries = read_config(&path).map_err(ParseFailure::Other)?;
    let name = subcommand_name(&first.command);
    let sub = Cli::command().find_subcommand(name).cloned().expect("parsed subcommand exists");
    let mut spliced: Vec<OsString> = Vec::new();
    for (key, value, line) in entries {
        if key == "config" {
            return Err(ParseFailure::Other(anyhow!("{}:{line}: config files cannot include other config files", path.display())));
        }
        if !sub.get_arguments().any(|a| a.get_long() == Some(key.as_str())) {
            return Err(ParseFailure::Other(anyhow!(
                "{}:{line}: unknown key `{key}` for `{name}` (see `capcond {name} --help`)",
                path.display()
            )));
        }
        spliced.push(format!("--{key}").into());
        spliced.push(value.into());
    }
    let at = argv.iter().position(|a| a == name).expect("subcommand present in argv");
    let mut full: Vec<OsString> = argv[..=at].to_vec();
    full.extend(spliced);
    full.extend(argv[at + 1..].iter().cloned());
    Cli::try_parse_from(full).map_err(ParseFailure::Clap)
}

pub enum ParseFailure {
    Clap(clap::Error),
    Other(anyhow::Error),
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Classify(_) => "classify",
        Command::Cond(_) => "cond",
        Command::Sic(_) => "sic",
        Command::Sample(_) => "sample",
        Command::ExpTail(_) => "exp-tail",
        Command::ExpMean(_) => "exp-mean",
        Command::ExpWendel(_) => "exp-wendel",
        Command::ExpTube(_) => "exp-tube",
        Command::ExpProperties(_) => "exp-properties",
        Command::ValidateSampler(_) => "validate-sampler",
    }
}

pub fn require_instance(a: &InstanceArgs) -> Result<&Path> {
    match &a.instance {
        Some(p) => Ok(p),
        None => bail!("missing --instance PATH"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_forms() {
        assert!((parse_alpha("piOver6").unwrap() - std::f64::consts::PI / 6.0).abs() < 1e-15);
        assert_eq!(parse_alpha("0.5").unwrap(), 0.5);
        assert!(parse_alpha("piOver1").is_err());
        assert!(parse_alpha("x").is_err());
    }

    #[test]
    fn grid_and_range() {
        assert_eq!(parse_grid("1:100:3").unwrap(), (1.0, 100.0, 3));
        assert!(parse_grid("100:1:3").is_err());
        assert_eq!(parse_range("4:10").unwrap(), (4, 10));
        assert!(parse_range("5:4").is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
