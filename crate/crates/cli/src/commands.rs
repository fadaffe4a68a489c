use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use milnor::connectivity::{
    arg_classes, component_report, cyclic_cover_components, gcd_predict, ConnectOptions, ConnectivityError,
    FactoredGerm, CAVEAT,
};
use milnor::fiber::{
    find_fiber_point, flow_trajectory, probe_transversality, rotation_number_with_tol, write_points_csv,
    FiberError, FiberPoint, SampledPath,
};
use milnor::lens::{
    default_epsilon, epsilon_threshold, homogenize, lens_roots, write_roots_csv, LensConfig, LensError,
    LensSummary,
};
use milnor::mixedpoly::{ParseError, PolyError};
use milnor::newton::{newton_data, nondegeneracy_survey, tameness_search, NewtonError};
use milnor::{parse_mixed_expression, MixedPolynomial};
use num_complex::Complex64;
use num_integer::Integer;
use serde_json::{json, Value};

use crate::settings::Settings;
use crate::{AnalyzeArgs, Cli, Command, ComponentsArgs, GcdArgs, LensArgs, MonodromyArgs, SampleArgs};

#[derive(Debug)]
pub enum CliError {
    Numerical(String),
    Input(String),
    Mismatch(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Input(m) => write!(f, "{m}"),
            CliError::Mismatch(m) => write!(f, "expectation mismatch: {m}"),
        }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<PolyError> for CliError {
    fn from(e: PolyError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<NewtonError> for CliError {
    fn from(e: NewtonError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<FiberError> for CliError {
    fn from(e: FiberError) -> Self {
        match e {
            FiberError::InvalidConfig(_)
            | FiberError::Poly(_)
            | FiberError::ConstantPolynomial
            | FiberError::SeedOutsideBall { .. } => CliError::Input(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<ConnectivityError> for CliError {
    fn from(e: ConnectivityError) -> Self {
        match e {
            ConnectivityError::Fiber(f) => f.into(),
            ConnectivityError::TooFewPoints { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<LensError> for CliError {
    fn from(e: LensError) -> Self {
        match e {
            LensError::InvalidConfig(_) => CliError::Input(e.to_string()),
            LensError::NoRoots => CliError::Numerical(e.to_string()),
        }
    }
}

fn io_error(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::Input(format!("cannot write {}: {e}", path.display()))
}

/// An expression, or a file holding an expression or the JSON form.
fn load_polynomial(input: &str) -> Result<MixedPolynomial, CliError> {
    let path = Path::new(input);
    let text = if path.is_file() {
        std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {input}: {e}")))?
    } else {
        input.to_string()
    };
    let text = text.trim();
    if text.starts_with('{') {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("bad polynomial JSON: {e}")))
    } else {
        Ok(parse_mixed_expression(text)?)
    }
}

fn parse_point(text: &str, n: usize) -> Result<Vec<Complex64>, CliError> {
    let xs: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| CliError::Input(format!("bad coordinate `{s}`: {e}"))))
        .collect::<Result<_, _>>()?;
    if xs.len() != 2 * n {
        return Err(CliError::Input(format!("--point needs {} numbers (re,im per variable), got {}", 2 * n, xs.len())));
    }
    Ok(xs.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect())
}

fn flat(z: &[Complex64]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

fn pair(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

/// A finished command: the report and whether its expectation held.
struct Outcome {
    report: Value,
    /// Keys omitted from the text rendering.
    bulky: &'static [&'static str],
    /// Body of the text rendering when it is not a key listing.
    text: Option<String>,
    mismatch: Option<String>,
}

impl Outcome {
    fn new(report: Value, bulky: &'static [&'static str]) -> Self {
        Self { report, bulky, text: None, mismatch: None }
    }

    fn render(&self, as_json: bool) -> String {
        if as_json {
            let mut s = serde_json::to_string_pretty(&self.report).expect("JSON values serialize");
            s.push('\n');
            return s;
        }
        if let Some(t) = &self.text {
            return t.clone();
        }
        let mut out = String::new();
        if let Value::Object(map) = &self.report {
            for (k, v) in map.iter().filter(|(k, _)| !self.bulky.contains(&k.as_str())) {
                out.push_str(&format!("{k}: {v}\n"));
            }
        }
        out
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let settings = Settings::resolve(&cli.global)?;
    let plot = cli.global.emit_plot_data.as_deref();
    let outcome = match &cli.command {
        Command::Analyze(a) => analyze(a, &settings)?,
        Command::SampleFiber(a) => sample(a, &settings, plot)?,
        Command::Monodromy(a) => monodromy(a, &settings, plot)?,
        Command::Components(a) => components(a, &settings, plot)?,
        Command::GcdCheck(a) => gcd_check(a, &settings, plot)?,
        Command::LensRoots(a) => lens(a, plot)?,
    };
    let body = outcome.render(cli.global.json);
    match &cli.global.output {
        Some(path) => std::fs::write(path, body).map_err(|e| io_error(path, e))?,
        None => {
            let mut out = io::stdout().lock();
            out.write_all(body.as_bytes()).and_then(|_| out.flush()).map_err(|e| io_error(Path::new("stdout"), e))?;
        }
    }
    match outcome.mismatch {
        Some(m) => Err(CliError::Mismatch(m)),
        None => Ok(()),
    }
}

type CsvResult = Result<(), Box<dyn std::error::Error>>;

fn write_csv(path: &Path, write: impl FnOnce(BufWriter<File>) -> CsvResult) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    write(BufWriter::new(file)).map_err(|e| io_error(path, e))
}

fn analyze(a: &AnalyzeArgs, s: &Settings) -> Result<Outcome, CliError> {
    let f = load_polynomial(&a.input)?;
    let data = newton_data(&f)?;
    let survey = nondegeneracy_survey(&f, a.weight_bound, a.trials, s.seed, a.search_tol)?;
    let mut tameness = Vec::new();
    for subset in &data.vanishing_subspaces {
        if subset.len() == f.n() {
            continue;
        }
        let reports = tameness_search(&f, subset, a.tameness_epsilon, a.weight_bound, a.trials, s.seed, a.search_tol)?;
        tameness.push(json!({ "subset": subset, "reports": reports }));
    }
    let report = json!({
        "n": f.n(),
        "polynomial": f.to_string(),
        "convenient": data.convenient,
        "radial_support": data.radial_support,
        "vanishing_subspaces": data.vanishing_subspaces,
        "nondegeneracy": survey,
        "tameness": tameness,
    });
    let mut text = format!(
        "polynomial: {f}\nn: {}\nconvenient: {}\nvanishing_subspaces: {}\n",
        f.n(),
        data.convenient,
        serde_json::to_string(&data.vanishing_subspaces).expect("serializable")
    );
    for r in &survey {
        text.push_str(&format!(
            "face {}: {} (residual {:e}, {} trials)\n",
            serde_json::to_string(&r.face).expect("serializable"),
            serde_json::to_value(r.verdict).expect("serializable").as_str().unwrap_or_default(),
            r.residual,
            r.trials
        ));
    }
    Ok(Outcome { text: Some(text), ..Outcome::new(report, &[]) })
}

fn sample(a: &SampleArgs, s: &Settings, plot: Option<&Path>) -> Result<Outcome, CliError> {
    let f = load_polynomial(&a.input)?;
    let cfg = s.fibration(&f)?;
    let points = milnor::connectivity::sample_fiber(&f, &cfg, a.points, s.seed, &ConnectOptions::default())?;
    if let Some(p) = plot {
        write_csv(p, |w| write_points_csv(w, &points).map_err(Into::into))?;
    }
    let mut report = json!({
        "count": points.len(),
        "delta": cfg.delta,
        "r0": cfg.r0,
        "points": points.iter().map(|p| flat(&p.z)).collect::<Vec<_>>(),
        "residuals": points.iter().map(|p| p.residual).collect::<Vec<_>>(),
    });
    if a.probe_transversality {
        let probe = probe_transversality(&f, &cfg, a.probe_radii, a.probe_samples, s.seed);
        report["transversality_probe"] = serde_json::to_value(probe).expect("serializable");
    }
    let mut csv = Vec::new();
    write_points_csv(&mut csv, &points).map_err(|e| CliError::Numerical(e.to_string()))?;
    let mut out = Outcome::new(report, &[]);
    if !a.probe_transversality {
        out.text = Some(String::from_utf8(csv).expect("CSV is UTF-8"));
    }
    Ok(out)
}

fn monodromy(a: &MonodromyArgs, s: &Settings, plot: Option<&Path>) -> Result<Outcome, CliError> {
    let f = load_polynomial(&a.input)?;
    let cfg = s.fibration(&f)?;
    let target = Complex64::new(cfg.delta, 0.0);
    let start = match &a.point {
        Some(text) => find_fiber_point(&f, target, &cfg, &parse_point(text, f.n())?)?,
        None => milnor::connectivity::sample_fiber(&f, &cfg, 2, s.seed, &ConnectOptions::default())?.remove(0),
    };
    let traj = flow_trajectory(&f, &start, a.theta, &cfg)?;
    if let Some(p) = plot {
        write_csv(p, |w| write_points_csv(w, &traj).map_err(Into::into))?;
    }
    let end: &FiberPoint = traj.last().expect("trajectory contains the start point");
    let steps = traj.len() - 1;
    let mut drift: f64 = 0.0;
    let mut angle_error: f64 = 0.0;
    for (k, node) in traj.iter().enumerate() {
        let v = f.evaluate(&node.z)?;
        drift = drift.max((v.norm() - cfg.delta).abs());
        let expected = a.theta * k as f64 / steps.max(1) as f64;
        let got = (v / start.target * Complex64::from_polar(1.0, -expected)).arg();
        angle_error = angle_error.max(got.abs());
    }
    let turns = a.theta / std::f64::consts::TAU;
    let rotation = if turns != 0.0 && (turns - turns.round()).abs() < 1e-12 {
        let path = SampledPath::from_nodes(&f, traj.iter().map(|p| p.z.clone()).collect())?;
        Some(rotation_number_with_tol(&f, &path, cfg.tol_angle)?)
    } else {
        None
    };
    let return_distance = start.z.iter().zip(&end.z).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let report = json!({
        "theta": a.theta,
        "delta": cfg.delta,
        "steps": steps,
        "start": flat(&start.z),
        "end": flat(&end.z),
        "start_value": pair(f.evaluate(&start.z)?),
        "end_value": pair(f.evaluate(&end.z)?),
        "modulus_drift": drift,
        "angle_error": angle_error,
        "rotation_number": rotation,
        "return_distance": return_distance,
    });
    Ok(Outcome::new(report, &[]))
}

fn options(k: usize, retries: usize) -> ConnectOptions {
    ConnectOptions { k, retries, ..ConnectOptions::default() }
}

fn components(a: &ComponentsArgs, s: &Settings, plot: Option<&Path>) -> Result<Outcome, CliError> {
    let f = load_polynomial(&a.input)?;
    let cfg = s.fibration(&f)?;
    let r = component_report(&f, &cfg, a.points, a.budget, s.seed, &options(a.k, a.retries))?;
    if let Some(p) = plot {
        write_csv(p, |w| write_points_csv(w, &r.points).map_err(Into::into))?;
    }
    let report = json!({
        "component_count": r.component_count,
        "component_sizes": r.component_sizes,
        "points_csv": plot.map(|p| p.display().to_string()),
        "edges": r.edges.iter().map(|e| [e.a, e.b]).collect::<Vec<_>>(),
        "caveat": CAVEAT,
        "points": r.points.len(),
        "attempted_pairs": r.attempted_pairs,
        "delta": cfg.delta,
        "seed": s.seed,
    });
    let mut out = Outcome::new(report, &["edges"]);
    if let Some(e) = a.expect {
        if e != r.component_count {
            out.mismatch = Some(format!("expected {e} components, found {}", r.component_count));
        }
    }
    Ok(out)
}

fn gcd_check(a: &GcdArgs, s: &Settings, plot: Option<&Path>) -> Result<Outcome, CliError> {
    let cover = cyclic_cover_components(&a.multiplicities)?;
    let gcd = a.multiplicities.iter().fold(0u32, |g, m| g.gcd(m));
    let mut report = json!({
        "multiplicities": a.multiplicities,
        "gcd": gcd,
        "cyclic_cover_components": cover,
    });
    let mut ok = cover == gcd as usize;
    if !a.factors.is_empty() {
        let parsed: Vec<MixedPolynomial> = a.factors.iter().map(|t| load_polynomial(t)).collect::<Result<_, _>>()?;
        let n = parsed.iter().map(MixedPolynomial::n).max().unwrap_or(1);
        let factors = parsed.iter().map(|g| g.with_arity(n)).collect();
        let germ = FactoredGerm::new(factors, a.multiplicities.clone())?;
        debug_assert_eq!(gcd_predict(&germ), gcd);
        let f = germ.product();
        let cfg = s.fibration(&f)?;
        let r = component_report(&f, &cfg, a.points, a.budget, s.seed, &ConnectOptions::default())?;
        if let Some(p) = plot {
            write_csv(p, |w| write_points_csv(w, &r.points).map_err(Into::into))?;
        }
        let mut classes: Vec<u32> =
            arg_classes(&germ.reduced_root(), &r.points, gcd, 1e-6).into_iter().flatten().collect();
        classes.sort_unstable();
        classes.dedup();
        ok &= r.component_count == gcd as usize && classes.len() == gcd as usize;
        report["polynomial"] = json!(f.to_string());
        report["sampled"] = json!({
            "component_count": r.component_count,
            "component_sizes": r.component_sizes,
            "arg_classes": classes.len(),
            "caveat": CAVEAT,
        });
    }
    report["match"] = json!(ok);
    let mut out = Outcome::new(report, &[]);
    if !ok {
        out.mismatch = Some(format!("gcd {gcd} does not match the component counts"));
    }
    Ok(out)
}

fn lens(a: &LensArgs, plot: Option<&Path>) -> Result<Outcome, CliError> {
    let cfg = LensConfig {
        n: a.n,
        a: a.a,
        epsilon: a.eps.unwrap_or_else(|| default_epsilon(a.n)),
        grid: a.grid,
        dedup_radius: a.dedup_radius,
        half_width: a.half_width,
    };
    let roots = lens_roots(&cfg)?;
    if let Some(p) = plot {
        write_csv(p, |w| write_roots_csv(w, &cfg, &roots).map_err(Into::into))?;
    }
    let summary = LensSummary::new(&cfg, &roots);
    let mut report = serde_json::to_value(&summary).expect("serializable");
    report["a"] = json!(cfg.a);
    report["epsilon"] = json!(cfg.epsilon);
    report["roots"] = json!(roots.iter().map(|z| pair(*z)).collect::<Vec<_>>());
    if a.homogenize {
        report["homogenization"] = json!(homogenize(&cfg)?.to_string());
    }
    if a.bisect {
        let hi = cfg.a / 10.0 * (1.0 - 1e-9);
        let lo = cfg.epsilon.min(1e-8);
        report["epsilon_threshold"] = json!(epsilon_threshold(&cfg, lo, hi, 0.01)?);
    }
    let mut out = Outcome::new(report, &["roots"]);
    if !summary.matches {
        out.mismatch = Some(format!("found {} roots, 5n-5 = {}", roots.len(), cfg.expected_count()));
    }
    Ok(out)
}
