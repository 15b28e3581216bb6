use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use padic_dyn::basin::{
    basin_scan, boundary_log_radius, default_depth, siegel_scan, BoundaryConclusion, RadiusVerdict,
    SampleRegion, ScanConfig, ScanReport, SiegelReport, DEFAULT_SEED,
};
use padic_dyn::claims::{
    claims_csv, reproduce, scan_csv, verify_claim, ClaimReport, ClaimStatus, ReproduceReport, Suite, VerifyConfig,
};
use padic_dyn::dynamics::{
    fixed_points, orbit_fate, FixedPointSet, MapParams, OrbitConfig, OrbitFate, Stratum, Which,
};
use padic_dyn::roots::{a_squared_plus_four, padic_sqrt, sqrt_a2p4_verdict, sqrt_exists};
use padic_dyn::{Ball, PAdicNumber, Prime, Sphere, DEFAULT_PRECISION};

/// Dynamics of f(x) = x^3 + a x^2 over the p-adic numbers.
#[derive(Parser, Debug)]
#[command(name = "padyn", version)]
struct Cli {
    /// The prime p.
    #[arg(long, global = true)]
    p: Option<u64>,
    /// Parameter a: a rational "num/den" or digits "v;d0,d1,...".
    #[arg(long, global = true, allow_hyphen_values = true)]
    a: Option<String>,
    /// Working precision in p-adic digits (at least 16).
    #[arg(long, global = true, default_value_t = DEFAULT_PRECISION)]
    precision: u32,
    /// Iteration cap for orbit classification.
    #[arg(long, global = true, default_value_t = 200)]
    max_iter: u32,
    /// Bound on hitting-time searches.
    #[arg(long, global = true, default_value_t = 100)]
    kmax: u32,
    /// Digit depth of sphere and ball enumeration (default depends on p).
    #[arg(long, global = true)]
    depth: Option<u32>,
    /// Seed for the random tails of sample points.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Existence and value of a square root: "a2p4" (a^2 + 4), "-3", "-5" or a rational.
    Sqrt {
        #[arg(allow_hyphen_values = true)]
        target: String,
    },
    /// Fixed points with multipliers and kinds.
    Classify,
    /// Certified fate of the orbit of x0.
    Orbit {
        #[arg(allow_hyphen_values = true)]
        x0: String,
    },
    /// Fates of sampled points of "S(c, e)" or "B(c, e)", radius p^e, c in {0, -a, x2, x3, literal}.
    Scan {
        #[arg(allow_hyphen_values = true)]
        region: String,
    },
    /// Sphere invariance around an indifferent fixed point (x1, x2 or x3).
    Siegel { which: String },
    /// Check one claim on the instance given by --p and --a.
    Verify { claim_id: String },
    /// Run the claim catalog: all, section3, section4 or section5.
    Reproduce {
        #[arg(default_value = "all")]
        suite: String,
    },
}

impl Cli {
    fn prime(&self) -> Result<Prime> {
        let p = self.p.ok_or_else(|| anyhow!("--p is required for this command"))?;
        Ok(Prime::new(p)?)
    }

    fn params(&self) -> Result<MapParams> {
        let a = self.a.as_deref().ok_or_else(|| anyhow!("--a is required for this command"))?;
        MapParams::parse(a, self.prime()?, self.precision).with_context(|| format!("parameter a = {a}"))
    }

    fn orbit_config(&self) -> OrbitConfig {
        OrbitConfig { max_iter: self.max_iter, ..OrbitConfig::default() }
    }

    fn depth(&self, p: Prime) -> u32 {
        self.depth.unwrap_or_else(|| default_depth(p))
    }
}

/// A rendered report plus whether it should make the process fail.
struct Output {
    body: String,
    failed: bool,
}

impl Output {
    fn ok(body: String) -> Self {
        Output { body, failed: false }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let written = match &cli.out {
                Some(path) => fs::write(path, &out.body).with_context(|| format!("writing {}", path.display())),
                None => {
                    print!("{}", out.body);
                    Ok(())
                }
            };
            match written {
                Ok(()) if out.failed => ExitCode::from(1),
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(2)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<Output> {
    if cli.precision < 16 {
        bail!("--precision must be at least 16");
    }
    match &cli.command {
        Command::Sqrt { target } => cmd_sqrt(cli, target),
        Command::Classify => cmd_classify(cli),
        Command::Orbit { x0 } => cmd_orbit(cli, x0),
        Command::Scan { region } => cmd_scan(cli, region),
        Command::Siegel { which } => cmd_siegel(cli, which),
        Command::Verify { claim_id } => cmd_verify(cli, claim_id),
        Command::Reproduce { suite } => cmd_reproduce(cli, suite),
    }
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn csv_rows(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[derive(Serialize)]
struct SqrtReport {
    target: String,
    radicand: PAdicNumber,
    exists: bool,
    case_tag: Option<&'static str>,
    root: Option<PAdicNumber>,
    neg_root: Option<PAdicNumber>,
}

fn cmd_sqrt(cli: &Cli, target: &str) -> Result<Output> {
    let p = cli.prime()?;
    let (radicand, verdict) = if target == "a2p4" {
        let params = cli.params()?;
        (a_squared_plus_four(&params.a), Some(sqrt_a2p4_verdict(&params.a)?))
    } else {
        (PAdicNumber::parse(target, p, cli.precision)?, None)
    };
    let exists = match &verdict {
        Some(v) => v.exists,
        None => sqrt_exists(&radicand)?,
    };
    let roots = if exists { Some(padic_sqrt(&radicand, cli.precision)?) } else { None };
    let report = SqrtReport {
        target: target.to_string(),
        exists,
        case_tag: verdict.map(|v| v.case_tag.as_str()),
        root: roots.as_ref().map(|r| r.root.clone()),
        neg_root: roots.map(|r| r.neg_root),
        radicand,
    };
    let compact = |x: &Option<PAdicNumber>| x.as_ref().map(PAdicNumber::to_compact).unwrap_or_default();
    let body = match cli.format {
        Format::Json => json(&report)?,
        Format::Csv => csv_rows(
            &["target", "exists", "case_tag", "root", "neg_root"],
            &[vec![
                report.target.clone(),
                report.exists.to_string(),
                report.case_tag.unwrap_or("").to_string(),
                compact(&report.root),
                compact(&report.neg_root),
            ]],
        )?,
        Format::Text => {
            let mut s = format!("sqrt({}) in Q_{}: exists={}\n", report.target, p.get(), report.exists);
            s += &format!("radicand  {}\n", report.radicand.to_compact());
            if let Some(tag) = report.case_tag {
                s += &format!("case      {tag}\n");
            }
            if report.exists {
                s += &format!("root      {}\nneg_root  {}\n", compact(&report.root), compact(&report.neg_root));
            }
            s
        }
    };
    Ok(Output::ok(body))
}

#[derive(Serialize)]
struct ClassifyReport<'a> {
    p: u32,
    a: &'a PAdicNumber,
    stratum: Stratum,
    #[serde(flatten)]
    fixed: &'a FixedPointSet,
}

fn stratum_text(s: Stratum) -> String {
    match s {
        Stratum::Small => "|a| < 1".into(),
        Stratum::Unit => "|a| = 1".into(),
        Stratum::Large { m } => format!("|a| = p^{m}"),
    }
}

fn cmd_classify(cli: &Cli) -> Result<Output> {
    let params = cli.params()?;
    let fixed = fixed_points(&params)?;
    let report = ClassifyReport { p: params.p.get(), a: &params.a, stratum: params.stratum(), fixed: &fixed };
    let body = match cli.format {
        Format::Json => json(&report)?,
        Format::Csv => csv_rows(
            &["fixed_point", "value", "multiplier", "multiplier_norm", "kind"],
            &fixed
                .records
                .iter()
                .map(|r| {
                    vec![
                        r.which.to_string(),
                        r.value.to_compact(),
                        r.multiplier.to_compact(),
                        r.multiplier_norm.to_string(),
                        r.kind.as_str().to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        )?,
        Format::Text => {
            let mut s = format!("p = {}, a = {}, {}\n", report.p, params.a.to_compact(), stratum_text(report.stratum));
            if let Some(v) = &fixed.verdict {
                s += &format!("sqrt(a^2+4): exists={} ({})\n", v.exists, v.case_tag.as_str());
            }
            for r in &fixed.records {
                s += &format!(
                    "{}  {:<12} |lambda| = {:<6} {}\n",
                    r.which,
                    r.value.to_compact(),
                    r.multiplier_norm.to_string(),
                    r.kind.as_str()
                );
            }
            if let Some(why) = &fixed.undecided {
                s += &format!("partial listing: {why}\n");
            }
            s
        }
    };
    Ok(Output::ok(body))
}

#[derive(Serialize)]
struct OrbitReport {
    x0: PAdicNumber,
    #[serde(flatten)]
    fate: OrbitFate,
}

fn fate_row(x: &PAdicNumber, fate: &OrbitFate) -> Vec<String> {
    vec![
        x.to_compact(),
        x.valuation().map(|v| v.to_string()).unwrap_or_default(),
        fate.outcome.label(),
        fate.steps_used.to_string(),
    ]
}

fn cmd_orbit(cli: &Cli, x0: &str) -> Result<Output> {
    let params = cli.params()?;
    let x0 = params.parse_point(x0)?;
    let fate = orbit_fate(&params, &x0, &cli.orbit_config())?;
    let body = match cli.format {
        Format::Json => json(&OrbitReport { x0: x0.clone(), fate })?,
        Format::Csv => csv_rows(&["point", "valuation", "fate", "steps"], &[fate_row(&x0, &fate)])?,
        Format::Text => format!(
            "x0 = {}: {} after {} steps\n{}\n",
            x0.to_compact(),
            fate.outcome.label(),
            fate.steps_used,
            fate.certificate
        ),
    };
    Ok(Output::ok(body))
}

fn which_of(name: &str) -> Option<Which> {
    match name.to_ascii_lowercase().as_str() {
        "x1" => Some(Which::X1),
        "x2" => Some(Which::X2),
        "x3" => Some(Which::X3),
        _ => None,
    }
}

fn center(params: &MapParams, fixed: &FixedPointSet, expr: &str) -> Result<PAdicNumber> {
    let expr = expr.trim();
    if expr == "-a" {
        return Ok(-&params.a);
    }
    if let Some(w) = which_of(expr) {
        return fixed
            .get(w)
            .map(|r| r.value.clone())
            .ok_or_else(|| anyhow!("fixed point {w} does not exist for this parameter"));
    }
    params.parse_point(expr).with_context(|| format!("center `{expr}`"))
}

/// Parses `S(c, e)` or `B(c, e)`.
fn parse_region(params: &MapParams, fixed: &FixedPointSet, spec: &str) -> Result<SampleRegion> {
    let spec = spec.trim();
    let bad = || anyhow!("region must look like S(c, e) or B(c, e), got `{spec}`");
    let (shape, rest) = spec.split_at(spec.find('(').ok_or_else(bad)?);
    let inner = rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
    let (c, e) = inner.rsplit_once(',').ok_or_else(bad)?;
    let e: i64 = e.trim().parse().with_context(|| format!("log-radius `{}`", e.trim()))?;
    let c = center(params, fixed, c)?;
    match shape.trim() {
        "S" => Ok(Sphere::new(c, e).into()),
        "B" => Ok(Ball::closed(c, e).into()),
        other => bail!("unknown region shape `{other}`"),
    }
}

#[derive(Serialize)]
struct ScanOutput<'a> {
    region: String,
    #[serde(flatten)]
    report: &'a ScanReport,
}

fn cmd_scan(cli: &Cli, spec: &str) -> Result<Output> {
    let params = cli.params()?;
    let fixed = fixed_points(&params)?;
    let region = parse_region(&params, &fixed, spec)?;
    let config = ScanConfig { orbit: cli.orbit_config(), depth: cli.depth, seed: cli.seed };
    let report = basin_scan(&params, std::slice::from_ref(&region), &config)?;
    let body = match cli.format {
        Format::Json => json(&ScanOutput { region: region.to_string(), report: &report })?,
        Format::Csv => scan_csv(&report)?,
        Format::Text => {
            let total = report.entries.len();
            let mut s = format!("{region}: {total} samples at depth {}\n", report.depth);
            for (label, n) in &report.counts {
                s += &format!("{label:<26} {n:>6}  {:>6.2}%\n", 100.0 * *n as f64 / total.max(1) as f64);
            }
            s
        }
    };
    Ok(Output::ok(body))
}

fn verdict_text(v: &RadiusVerdict) -> String {
    match v {
        RadiusVerdict::InvariantOnSamples => "invariant".into(),
        RadiusVerdict::CounterexampleFound { point, .. } => format!("counterexample {}", point.to_compact()),
        RadiusVerdict::Undetermined => "undetermined".into(),
    }
}

fn conclusion_text(c: BoundaryConclusion) -> &'static str {
    match c {
        BoundaryConclusion::OpenBall => "open_ball",
        BoundaryConclusion::ClosedBall => "closed_ball",
        BoundaryConclusion::Undetermined => "undetermined",
    }
}

fn cmd_siegel(cli: &Cli, which: &str) -> Result<Output> {
    let params = cli.params()?;
    let w = which_of(which).ok_or_else(|| anyhow!("expected x1, x2 or x3, got `{which}`"))?;
    let fixed = fixed_points(&params)?;
    let fp = fixed.get(w).ok_or_else(|| anyhow!("fixed point {w} does not exist for this parameter"))?;
    let b = boundary_log_radius(&params);
    let radii: Vec<i64> = (b - 2..=b + 1).collect();
    let report: SiegelReport = siegel_scan(&params, fp, &radii, cli.depth(params.p), cli.seed)?;
    let body = match cli.format {
        Format::Json => json(&report)?,
        Format::Csv => csv_rows(
            &["log_radius", "samples", "verdict"],
            &report
                .per_radius
                .iter()
                .map(|c| vec![c.log_radius.to_string(), c.samples.to_string(), verdict_text(&c.verdict)])
                .collect::<Vec<_>>(),
        )?,
        Format::Text => {
            let mut s = format!(
                "{} = {} ({}), boundary sphere p^{}\n",
                fp.which,
                fp.value.to_compact(),
                fp.kind.as_str(),
                report.boundary_log_radius
            );
            for c in &report.per_radius {
                s += &format!("S(p^{:<3}) {:>6} samples  {}\n", c.log_radius, c.samples, verdict_text(&c.verdict));
            }
            if let Some(x) = &report.witness {
                s += &format!("boundary point mapped onto the fixed point: {}\n", x.to_compact());
            }
            s += &format!("maximal disc: {}\n", conclusion_text(report.boundary_conclusion));
            s
        }
    };
    Ok(Output::ok(body))
}

impl Cli {
    fn verify_config(&self) -> VerifyConfig {
        VerifyConfig {
            precision: self.precision,
            orbit: self.orbit_config(),
            kmax: self.kmax,
            depth: self.depth,
            seed: self.seed,
        }
    }
}

fn report_text(r: &ClaimReport) -> Result<String> {
    let status = serde_json::to_value(r.status)?;
    let mut s = format!(
        "{:<20} p={:<3} a={:<12} {:<8} samples={}\n",
        r.claim_id,
        r.p,
        r.a.as_deref().unwrap_or("-"),
        status.as_str().unwrap_or(""),
        r.samples_checked
    );
    if let Some(reason) = &r.reason {
        s += &format!("    {reason}\n");
    }
    if r.status != ClaimStatus::Pass {
        for w in &r.witnesses {
            s += &format!("    {}: {}\n", w.point.as_deref().unwrap_or("-"), w.observation);
        }
    }
    Ok(s)
}

fn cmd_verify(cli: &Cli, claim_id: &str) -> Result<Output> {
    let p = cli.prime()?;
    let a = cli.a.as_deref().map(|a| PAdicNumber::parse(a, p, cli.precision)).transpose()?;
    let report = verify_claim(claim_id, p, a.as_ref(), &cli.verify_config())?;
    let body = match cli.format {
        Format::Json => json(&report)?,
        Format::Csv => claims_csv(std::slice::from_ref(&report))?,
        Format::Text => report_text(&report)?,
    };
    Ok(Output { body, failed: report.status == ClaimStatus::Fail })
}

fn cmd_reproduce(cli: &Cli, suite: &str) -> Result<Output> {
    let suite: Suite = suite.parse()?;
    let report: ReproduceReport = reproduce(suite, &cli.verify_config())?;
    let body = match cli.format {
        Format::Json => json(&report)?,
        Format::Csv => claims_csv(&report.reports)?,
        Format::Text => {
            let mut s = String::new();
            for r in &report.reports {
                s += &report_text(r)?;
            }
            let m = report.summary;
            s += &format!("{}: {} pass, {} fail, {} skipped\n", report.suite, m.pass, m.fail, m.skipped);
            s
        }
    };
    Ok(Output { body, failed: report.has_failures() })
}
