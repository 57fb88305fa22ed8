use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, ValueEnum};
use serde_json::{json, Value};

use epival_core::epi::PLConvexFunction;
use epival_core::goodey_weil::{default_family, gw_pipeline, minkowski_residual, minkowski_solve, DualAtomMeasure, Mollifier};
use epival_core::measures::SphereMeasure;
use epival_core::num::{f64_to_value, format_f64};
use epival_core::suite::{run_suite, Suite, SuiteConfig};
use epival_core::valuation::{homogeneous_components, ValuationSpec};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    /// Run an identity suite over seeded random cases.
    Verify,
    /// Split a valuation into homogeneous components at one function.
    Decompose,
    /// Mollify a dual atom measure and compare against the exact values.
    Gw,
    /// Reconstruct a polytope from a balanced atomic measure.
    Minkowski,
}

#[derive(Parser, Debug)]
#[command(name = "epival", version, about = "Valuations on convex bodies and convex functions")]
struct Cli {
    command: Command,
    /// Flat `key = value` file with the same keys as the long flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    cases: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol_geom: Option<f64>,
    #[arg(long)]
    tol_quad: Option<f64>,
    /// JSON report path; a CSV table is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Comma-separated mollification indices.
    #[arg(long)]
    j_list: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    /// Mollifier for `gw`: `exp` or `poly3`.
    #[arg(long)]
    bump: Option<String>,
    /// JSON array of functions replacing the default `gw` family.
    #[arg(long)]
    family: Option<PathBuf>,
    /// Monte-Carlo samples per estimate.
    #[arg(long)]
    samples: Option<usize>,
}

/// Failures that are the caller's fault and map to exit status 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

const KEYS: [&str; 13] =
    ["suite", "n", "cases", "seed", "tol-geom", "tol-quad", "out", "in", "j-list", "dim", "bump", "family", "samples"];

/// Settings after merging the config file with the flags; flags win.
struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    fn load(cli: &Cli) -> anyhow::Result<Self> {
        let mut values = BTreeMap::new();
        if let Some(path) = &cli.config {
            let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            for (k, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| usage(format!("config line {}: expected key = value", k + 1)))?;
                let key = key.trim().replace('_', "-");
                if !KEYS.contains(&key.as_str()) {
                    return Err(usage(format!("config line {}: unknown key {key}", k + 1)));
                }
                values.insert(key, value.trim().to_string());
            }
        }
        let mut set = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                values.insert(k.to_string(), v);
            }
        };
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        set("suite", cli.suite.clone());
        set("n", cli.n.map(|x| x.to_string()));
        set("cases", cli.cases.map(|x| x.to_string()));
        set("seed", cli.seed.map(|x| x.to_string()));
        set("tol-geom", cli.tol_geom.map(|x| x.to_string()));
        set("tol-quad", cli.tol_quad.map(|x| x.to_string()));
        set("out", path(&cli.out));
        set("in", path(&cli.input));
        set("j-list", cli.j_list.clone());
        set("dim", cli.dim.map(|x| x.to_string()));
        set("bump", cli.bump.clone());
        set("family", path(&cli.family));
        set("samples", cli.samples.map(|x| x.to_string()));
        Ok(Settings { values })
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> anyhow::Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| usage(format!("invalid value for {key}: {v}"))),
        }
    }

    fn get_or<T: std::str::FromStr>(&self, key: &str, default: T) -> anyhow::Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.values.get(key).map(PathBuf::from)
    }

    fn j_list(&self) -> anyhow::Result<Vec<u32>> {
        let raw = self.values.get("j-list").map_or("2,4,8,16", String::as_str);
        let js: Vec<u32> = raw
            .split(',')
            .map(|s| s.trim().parse::<u32>().ok().filter(|&j| j > 0))
            .collect::<Option<_>>()
            .ok_or_else(|| usage(format!("invalid j-list: {raw}")))?;
        if js.is_empty() {
            return Err(usage("j-list is empty"));
        }
        Ok(js)
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Writes `report` to `out` (and `csv` beside it) or prints it.
fn emit(out: Option<&Path>, report: &Value, csv: Option<String>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(report)? + "\n";
    match out {
        None => print!("{text}"),
        Some(path) => {
            fs::write(path, text).with_context(|| format!("cannot write {}", path.display())).map_err(|e| usage(format!("{e:#}")))?;
            if let Some(csv) = csv {
                let p = path.with_extension("csv");
                fs::write(&p, csv).map_err(|e| usage(format!("cannot write {}: {e}", p.display())))?;
            }
        }
    }
    Ok(())
}

fn verify(s: &Settings) -> anyhow::Result<bool> {
    let name: String = s.get("suite")?.ok_or_else(|| usage("verify needs --suite"))?;
    let suite: Suite = name.parse().map_err(|e: epival_core::Error| usage(e.to_string()))?;
    let mut cfg = SuiteConfig::new(suite, s.get_or("n", 1)?, s.get_or("cases", 10)?, s.get_or("seed", 0)?);
    cfg.tol_geom = s.get_or("tol-geom", cfg.tol_geom)?;
    cfg.tol_quad = s.get_or("tol-quad", cfg.tol_quad)?;
    cfg.mc_samples = s.get_or("samples", cfg.mc_samples)?;
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let report = run_suite(&cfg)?;
    eprintln!(
        "{} n={}: {} pass, {} fail, worst residual {}",
        suite,
        cfg.n,
        report.passed(),
        report.failed(),
        format_f64(report.worst_residual())
    );
    emit(s.path("out").as_deref(), &report.to_json(), Some(report.to_csv()))?;
    Ok(report.all_pass())
}

#[derive(serde::Deserialize)]
struct DecomposeInput {
    valuation: ValuationSpec,
    function: PLConvexFunction,
}

fn decompose(s: &Settings) -> anyhow::Result<bool> {
    let path = s.path("in").ok_or_else(|| usage("decompose needs --in"))?;
    let input: DecomposeInput = read_json(&path)?;
    let tol = s.get_or("tol-geom", 1e-9)?;
    let comps = homogeneous_components(&input.valuation, &input.function)?;
    let total = input.valuation.evaluate(&input.function)?;
    let sum: f64 = comps.iter().sum();
    let residual = (sum - total).abs() / total.abs().max(1.0);
    let report = json!({
        "n": input.function.n(),
        "value": f64_to_value(total),
        "components": comps.iter().map(|c| f64_to_value(*c)).collect::<Vec<_>>(),
        "sum_residual": f64_to_value(residual),
        "pass": residual <= tol,
    });
    let mut csv = String::from("degree,component\n");
    for (i, c) in comps.iter().enumerate() {
        csv.push_str(&format!("{i},{}\n", format_f64(*c)));
    }
    emit(s.path("out").as_deref(), &report, Some(csv))?;
    Ok(residual <= tol)
}

fn gw(s: &Settings) -> anyhow::Result<bool> {
    let mu: DualAtomMeasure = match s.path("in") {
        Some(p) => read_json(&p)?,
        None => match s.get_or("n", 1usize)? {
            1 => DualAtomMeasure::second_difference(),
            n => return Err(usage(format!("gw without --in uses the second difference on the line, not n={n}"))),
        },
    };
    let bump_name: String = s.get_or("bump", "exp".to_string())?;
    let bump = Mollifier::by_name(&bump_name, mu.n).map_err(|e| usage(e.to_string()))?;
    let family: Vec<PLConvexFunction> = match s.path("family") {
        Some(p) => read_json(&p)?,
        None => default_family(mu.n).map_err(|e| usage(e.to_string()))?,
    };
    let js = s.j_list()?;
    let report = gw_pipeline(&mu, &bump, &js, &family)?;
    let tv = report.total_variation;
    let errs: Vec<f64> = report.rows.iter().map(|r| r.sup_error).collect();
    let monotone = errs.iter().all(|e| *e == 0.0) || errs.windows(2).all(|w| w[1] < w[0]);
    let affine = report.rows.iter().all(|r| r.moment_residual <= 1e-8 * tv.max(f64::MIN_POSITIVE) || tv == 0.0);
    let rep = report.rows.iter().all(|r| r.representation_residual.is_none_or(|x| x <= 1e-5));
    eprintln!("gw n={}: monotone={monotone} affine={affine} representation={rep}", mu.n);
    emit(s.path("out").as_deref(), &report.to_json(), Some(report.to_csv()))?;
    Ok(monotone && affine && rep)
}

fn minkowski(s: &Settings) -> anyhow::Result<bool> {
    let path = s.path("in").ok_or_else(|| usage("minkowski needs --in"))?;
    let mu: SphereMeasure = read_json(&path)?;
    let dim = s.get_or("dim", mu.dim)?;
    if dim != mu.dim || mu.atoms.iter().any(|a| a.n.len() != dim) {
        return Err(usage(format!("measure does not live in dimension {dim}")));
    }
    let tol = if dim == 2 { 1e-9 } else { 1e-6 };
    match minkowski_solve(&mu, dim) {
        Ok(p) => {
            let residual = minkowski_residual(&p, &mu, 1e-6);
            eprintln!("minkowski dim={dim}: {} facets, residual {}", p.facets().len(), format_f64(residual));
            let report = json!({ "polytope": p, "residual": f64_to_value(residual), "pass": residual <= tol });
            let mut csv = String::from(if dim == 2 { "x,y\n" } else { "x,y,z\n" });
            for v in p.vertices_f64() {
                csv.push_str(&v.iter().map(|x| format_f64(*x)).collect::<Vec<_>>().join(","));
                csv.push('\n');
            }
            emit(s.path("out").as_deref(), &report, Some(csv))?;
            Ok(residual <= tol)
        }
        Err(e @ (epival_core::Error::UnbalancedInput(_) | epival_core::Error::DegenerateNormals(_))) => Err(usage(e.to_string())),
        Err(e) => Err(anyhow!(e).context("solver failed")),
    }
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let settings = Settings::load(cli)?;
    match cli.command {
        Command::Verify => verify(&settings),
        Command::Decompose => decompose(&settings),
        Command::Gw => gw(&settings),
        Command::Minkowski => minkowski(&settings),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.is::<Usage>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
