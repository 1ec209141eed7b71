use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "tn-neutral",
    version,
    about = "Verify the geometry of the neutral metric on tangent bundles",
    after_help = "Tolerances can be overridden with --tol-<name> <value>, e.g. --tol-oracle_gap 1e-3."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Curvature invariants of G at sampled bundle points.
    Curvature(CurvatureArgs),
    /// Split-system geodesics against the direct geodesic ODE.
    Geodesic(GeodesicArgs),
    /// Minimality classification of a gradient graph in T R^n.
    Lagrangian(LagrangianArgs),
    /// Radial source-field potentials.
    Source(SourceArgs),
    /// The embedding of the space of oriented lines into T R^3.
    Linespace(LinespaceArgs),
    /// Run the full acceptance suite.
    VerifyAll(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args, Serialize)]
pub struct Common {
    /// Number of random samples.
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Filled from `--tol-<name>` flags before parsing.
    #[arg(skip)]
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct CurvatureArgs {
    /// Built-in name (euclidean2, sphere2, hyperbolic2, sphere3, warped2, warped3) or a JSON file.
    #[arg(long, default_value = "sphere2")]
    pub manifold: String,
    /// Also evaluate the covariant derivative of the curvature (slow).
    #[arg(long)]
    pub covariant: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct GeodesicArgs {
    #[arg(long, default_value = "sphere2")]
    pub manifold: String,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub steps: u64,
    /// Directory for per-trajectory CSV files (t, x1..xn, v1..vn).
    #[arg(long)]
    pub paths_dir: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    Minimal,
    Hminimal,
    TotallyGeodesic,
    Flat,
}

#[derive(Debug, Args, Serialize)]
pub struct LagrangianArgs {
    /// Potential u in the variables x1..xn.
    #[arg(long)]
    pub u: String,
    #[arg(long)]
    pub n: usize,
    /// Sampling box as lo,hi applied to every axis.
    #[arg(long, default_value = "-1,1", value_parser = parse_interval)]
    pub domain: (f64, f64),
    /// Make the matching classification residual decide the exit status.
    #[arg(long, value_enum)]
    pub expect: Vec<Expectation>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Minimal,
    Hminimal,
}

#[derive(Debug, Args, Serialize)]
#[command(group = clap::ArgGroup::new("profile").required(true).args(["kind", "intensity"]))]
pub struct SourceArgs {
    /// Closed-form family.
    #[arg(long)]
    pub kind: Option<SourceKind>,
    /// Custom intensity H as an expression in R.
    #[arg(long = "H")]
    pub intensity: Option<String>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub c0: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub c1: f64,
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    pub c2: f64,
    /// Radial interval lo,hi.
    #[arg(long, value_parser = parse_interval)]
    pub interval: Option<(f64, f64)>,
    #[arg(long, value_enum)]
    pub expect: Vec<Expectation>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
#[command(group = clap::ArgGroup::new("point").multiple(true).requires_all(["p", "v"]))]
pub struct LinespaceArgs {
    /// Unit vector p as x,y,z. Without p and V, points are sampled.
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true, group = "point")]
    pub p: Option<[f64; 3]>,
    /// Direction data V as x,y,z, orthogonal to p.
    #[arg(long = "V", value_parser = parse_triple, allow_hyphen_values = true, group = "point")]
    pub v: Option<[f64; 3]>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// Run only these criteria, e.g. 1,4,13.
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u8).range(1..=15))]
    pub criteria: Vec<u8>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

impl Command {
    pub fn common_mut(&mut self) -> &mut Common {
        match self {
            Command::Curvature(a) => &mut a.common,
            Command::Geodesic(a) => &mut a.common,
            Command::Lagrangian(a) => &mut a.common,
            Command::Source(a) => &mut a.common,
            Command::Linespace(a) => &mut a.common,
            Command::VerifyAll(a) => &mut a.common,
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Curvature(a) => &a.common,
            Command::Geodesic(a) => &a.common,
            Command::Lagrangian(a) => &a.common,
            Command::Source(a) => &a.common,
            Command::Linespace(a) => &a.common,
            Command::VerifyAll(a) => &a.common,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Curvature(_) => "curvature",
            Command::Geodesic(_) => "geodesic",
            Command::Lagrangian(_) => "lagrangian",
            Command::Source(_) => "source",
            Command::Linespace(_) => "linespace",
            Command::VerifyAll(_) => "verify-all",
        }
    }
}

fn parse_numbers(s: &str, count: usize) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != count {
        return Err(format!("expected {count} comma-separated numbers, got `{s}`"));
    }
    parts
        .iter()
        .map(|p| p.parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect()
}

fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    let v = parse_numbers(s, 2)?;
    if v[0] >= v[1] || v.iter().any(|x| !x.is_finite()) {
        return Err(format!("interval `{s}` must have lo < hi"));
    }
    Ok((v[0], v[1]))
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let v = parse_numbers(s, 3)?;
    Ok([v[0], v[1], v[2]])
}

/// Remove `--tol-<name> <value>` and `--tol-<name>=<value>` from `argv`.
pub fn split_tolerances(argv: Vec<String>) -> Result<(Vec<String>, BTreeMap<String, f64>), String> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut tols = BTreeMap::new();
    let mut it = argv.into_iter();
    while let Some(arg) = it.next() {
        let Some(body) = arg.strip_prefix("--tol-") else {
            rest.push(arg);
            continue;
        };
        let (name, value) = match body.split_once('=') {
            Some((n, v)) => (n.to_string(), v.to_string()),
            None => {
                let v = it.next().ok_or_else(|| format!("--tol-{body} needs a value"))?;
                (body.to_string(), v)
            }
        };
        if name.is_empty() {
            return Err("empty tolerance name".into());
        }
        let tol: f64 = value
            .parse()
            .map_err(|_| format!("--tol-{name}: `{value}` is not a number"))?;
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(format!("--tol-{name} must be positive, got {value}"));
        }
        tols.insert(name, tol);
    }
    Ok((rest, tols))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn tolerance_flags_are_extracted() {
        let (rest, tols) =
            split_tolerances(argv("tn curvature --tol-oracle_gap 1e-3 --tol-weyl=2e-5 --samples 4")).unwrap();
        assert_eq!(rest, argv("tn curvature --samples 4"));
        assert_eq!(tols["oracle_gap"], 1e-3);
        assert_eq!(tols["weyl"], 2e-5);
    }

    #[test]
    fn bad_tolerances_are_rejected() {
        assert!(split_tolerances(argv("tn --tol-x -1")).is_err());
        assert!(split_tolerances(argv("tn --tol-x abc")).is_err());
        assert!(split_tolerances(argv("tn --tol-x")).is_err());
        assert!(split_tolerances(argv("tn --tol-=1")).is_err());
    }

    #[test]
    fn number_lists() {
        assert_eq!(parse_triple("0, 0.6,-0.8").unwrap(), [0.0, 0.6, -0.8]);
        assert!(parse_triple("1,2").is_err());
        assert_eq!(parse_interval("-1,2").unwrap(), (-1.0, 2.0));
        assert!(parse_interval("2,1").is_err());
    }

    #[test]
    fn zero_samples_is_a_usage_error() {
        assert!(Cli::try_parse_from(argv("tn curvature --samples 0")).is_err());
        assert!(Cli::try_parse_from(argv("tn curvature --samples 3")).is_ok());
    }
}
