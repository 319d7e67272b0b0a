//! `logweyl` command-line front end.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 I/O or
//! malformed files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;

use logweyl::asymptotics::{
    counting_points, fit_log_weyl, laurent_from_weyl, parse_points_csv, zeta_partial, WeylFit,
    DEFAULT_SKIP_FRACTION,
};
use logweyl::cornerflow::{
    conserved_angle, flow_closed, flow_numeric_with_stats, periodic_measure, return_time, trajectory_numeric,
    CornerState, ModelCornerFlow, ReturnTime, DEFAULT_FLOW_TOL,
};
use logweyl::numfmt::{fmt_f64, FlatJson};
use logweyl::spectrum::{compute_spectrum, DiscretizationConfig, OperatorKind, SchemeOrder, SpectralData};
use logweyl::traces::{gamma1_closed, gamma2_closed, TraceQuadrature};
use logweyl::{symbols, Error};

#[derive(Parser)]
#[command(name = "logweyl", version, about = "Logarithmic Weyl laws for SG operators: coefficients, spectra, fits")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Weyl coefficients γ₂, γ₁ of <x><D> in closed form and/or by quadrature
    Coeffs(CoeffsArgs),
    /// Finite-difference spectrum with grid-refinement trust level
    Spectrum(SpectrumArgs),
    /// Least-squares fit of a counting function in the log-Weyl basis
    Fit(FitArgs),
    /// Corner Hamiltonian flow: closed form vs adaptive integration
    Flow(FlowArgs),
    /// Partial sums of the spectral zeta function
    Zeta(ZetaArgs),
    /// Monte Carlo estimate of the measure of periodic corner points
    Measure(MeasureArgs),
}

#[derive(Args)]
struct Output {
    /// Also write the report as a flat JSON object
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Closed,
    Quadrature,
    Both,
}

#[derive(Args)]
struct CoeffsArgs {
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, value_enum, default_value = "closed")]
    method: Method,
    /// Quadrature tolerance
    #[arg(long, default_value_t = 1e-11)]
    tol: f64,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Interior grid points per axis
    #[arg(long, default_value_t = 4096)]
    grid: usize,
    #[arg(long, default_value_t = 64.0)]
    half_width: f64,
    /// Number of lowest eigenvalues
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 4)]
    scheme: u32,
    /// model, unit-weight or harmonic
    #[arg(long, default_value = "model")]
    operator: String,
    /// Largest eigenvalue that must be confined by the box (matrix scale)
    #[arg(long, value_name = "LAMBDA_MAX")]
    window: Option<f64>,
    /// Exit with code 3 unless at least this many eigenvalues are trusted
    #[arg(long, default_value_t = 1)]
    min_trusted: usize,
    /// Eigenvalue CSV; the JSON sidecar is written next to it
    #[arg(long, value_name = "PATH")]
    csv: PathBuf,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct FitArgs {
    /// Spectrum CSV (from `spectrum`) or two-column `lambda,N` CSV
    input: PathBuf,
    /// Leading exponent d/m of the counting function
    #[arg(long)]
    exponent: f64,
    #[arg(long, default_value_t = 1)]
    levels: u32,
    /// Raise spectrum eigenvalues to this power first (0.5 turns Q into <x><D>)
    #[arg(long, default_value_t = 1.0)]
    power: f64,
    /// Keep only points with lambda in [lo, hi]
    #[arg(long, value_name = "LO,HI", value_parser = parse_window)]
    window: Option<(f64, f64)>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct FlowArgs {
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Seed for a uniformly sampled start state
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Explicit start direction ω (comma separated); needs --theta
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "theta")]
    omega: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "omega")]
    theta: Option<Vec<f64>>,
    /// Flow time; defaults to the return time of the start state
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_FLOW_TOL)]
    tol: f64,
    /// Trajectory samples written to --csv
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct ZetaArgs {
    /// Spectrum CSV
    input: PathBuf,
    /// Evaluation points
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    s: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    power: f64,
    /// Add the closed-form tail of a log-Weyl fit of the spectrum itself
    #[arg(long)]
    tail: bool,
    #[arg(long, default_value_t = 1)]
    levels: u32,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct MeasureArgs {
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    count: usize,
    /// Longest return time scanned
    #[arg(long, default_value_t = 1e12)]
    t_max: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[command(flatten)]
    out: Output,
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected LO,HI")?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if !(lo < hi) {
        return Err("window needs LO < HI".into());
    }
    Ok((lo, hi))
}

enum Val {
    Num(f64),
    Int(i64),
    Str(String),
    Bool(bool),
    Nums(Vec<f64>),
}

/// Ordered key/value report, printed as `key = value` lines and optionally
/// saved as JSON.
struct Report {
    title: &'static str,
    items: Vec<(String, Val)>,
}

impl Report {
    fn new(title: &'static str) -> Self {
        Self { title, items: Vec::new() }
    }

    fn num(&mut self, k: &str, v: f64) -> &mut Self {
        self.items.push((k.into(), Val::Num(v)));
        self
    }

    fn int(&mut self, k: &str, v: impl TryInto<i64>) -> &mut Self {
        self.items.push((k.into(), Val::Int(v.try_into().unwrap_or(i64::MAX))));
        self
    }

    fn str(&mut self, k: &str, v: impl Into<String>) -> &mut Self {
        self.items.push((k.into(), Val::Str(v.into())));
        self
    }

    fn boolean(&mut self, k: &str, v: bool) -> &mut Self {
        self.items.push((k.into(), Val::Bool(v)));
        self
    }

    fn nums(&mut self, k: &str, v: Vec<f64>) -> &mut Self {
        self.items.push((k.into(), Val::Nums(v)));
        self
    }

    fn text(&self) -> String {
        let mut out = format!("# logweyl {}\n", self.title);
        for (k, v) in &self.items {
            let s = match v {
                Val::Num(x) => fmt_f64(*x),
                Val::Int(i) => i.to_string(),
                Val::Str(s) => s.clone(),
                Val::Bool(b) => b.to_string(),
                Val::Nums(xs) => xs.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(","),
            };
            out.push_str(&format!("{k} = {s}\n"));
        }
        out
    }

    fn json(&self) -> String {
        let mut j = FlatJson::new();
        j.str("command", self.title);
        for (k, v) in &self.items {
            match v {
                Val::Num(x) => j.num(k, *x),
                Val::Int(i) => j.int(k, *i),
                Val::Str(s) => j.str(k, s),
                Val::Bool(b) => j.boolean(k, *b),
                Val::Nums(xs) => j.nums(k, xs),
            };
        }
        j.render()
    }

    fn emit(&self, out: &Output) -> logweyl::Result<()> {
        print!("{}", self.text());
        if let Some(p) = &out.json {
            write_file(p, &self.json())?;
        }
        Ok(())
    }
}

fn write_file(path: &Path, text: &str) -> logweyl::Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

fn read_file(path: &Path) -> logweyl::Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

/// Failure with an explicit exit code (e.g. too few trusted eigenvalues).
struct Exit(u8, String);

impl From<Error> for Exit {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidInput(_) | Error::Domain(_) => 2,
            Error::NonConvergence(_) | Error::RankDeficient(_) => 3,
            Error::Io { .. } | Error::Parse { .. } => 4,
        };
        Exit(code, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Coeffs(a) => coeffs(a),
        Cmd::Spectrum(a) => spectrum(a),
        Cmd::Fit(a) => fit(a),
        Cmd::Flow(a) => flow(a),
        Cmd::Zeta(a) => zeta(a),
        Cmd::Measure(a) => measure(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Exit(code, msg)) => {
            eprintln!("logweyl: {msg}");
            ExitCode::from(code)
        }
    }
}

fn coeffs(a: CoeffsArgs) -> Result<(), Exit> {
    if !(1..=3).contains(&a.dim) {
        return Err(Exit(2, format!("--dim must be 1, 2 or 3, got {}", a.dim)));
    }
    let mut r = Report::new("coeffs");
    r.int("dim", a.dim as i64).str(
        "method",
        match a.method {
            Method::Closed => "closed",
            Method::Quadrature => "quadrature",
            Method::Both => "both",
        },
    );
    let closed = match a.method {
        Method::Quadrature => None,
        _ => Some((gamma2_closed(a.dim)?, gamma1_closed(a.dim)?)),
    };
    if let Some((g2, g1)) = closed {
        r.num("gamma2_closed", g2).num("gamma1_closed", g1);
    }
    if !matches!(a.method, Method::Closed) {
        let q = TraceQuadrature {
            tol: a.tol,
            ..TraceQuadrature::default()
        };
        let sym = symbols::model_symbol(a.dim)?;
        let c = q.gamma_coeffs(&sym, a.dim, 1.0)?;
        r.num("tol", q.tol)
            .int("max_level", q.max_level as i64)
            .int("radial_nodes", q.radial_nodes as i64)
            .nums("taus", q.taus.clone())
            .num("gamma2_quadrature", c.gamma2.value)
            .num("gamma2_error_estimate", c.gamma2.estimated_error)
            .num("gamma1_quadrature", c.gamma1.value)
            .num("gamma1_error_estimate", c.gamma1.estimated_error);
        if let Some((g2, g1)) = closed {
            r.num("gamma2_difference", (g2 - c.gamma2.value).abs())
                .num("gamma1_difference", (g1 - c.gamma1.value).abs());
        }
    }
    r.emit(&a.out)?;
    Ok(())
}

fn spectrum(a: SpectrumArgs) -> Result<(), Exit> {
    let cfg = DiscretizationConfig::new(a.dim, a.half_width, a.grid, SchemeOrder::from_int(a.scheme)?)?
        .with_operator(OperatorKind::parse(&a.operator)?);
    if let Some(top) = a.window {
        if !cfg.is_confined(top) {
            return Err(Exit(
                2,
                format!(
                    "half-width {} does not confine the window up to {top}: the largest confined eigenvalue is {}",
                    cfg.half_width,
                    fmt_f64(cfg.confinement_limit())
                ),
            ));
        }
    }
    let spec = compute_spectrum(&cfg, a.count)?;
    let side = spec.write_files(&a.csv)?;
    let mut r = Report::new("spectrum");
    r.int("dim", cfg.dimension as i64)
        .int("grid", cfg.grid_points as i64)
        .num("half_width", cfg.half_width)
        .int("scheme", cfg.scheme_order.as_int() as i64)
        .str("operator", cfg.operator.as_str())
        .int("count", a.count as i64)
        .int("min_trusted", a.min_trusted as i64)
        .num("trust_tolerance", logweyl::spectrum::TRUST_TOLERANCE)
        .num("confinement_limit", cfg.confinement_limit())
        .int("trusted_count", spec.trusted_count() as i64)
        .str("csv", a.csv.display().to_string())
        .str("sidecar", side.display().to_string());
    if let Some(&top) = spec.trusted().last() {
        r.num("largest_trusted", top);
    }
    r.emit(&a.out)?;
    if spec.trusted_count() < a.min_trusted {
        return Err(Exit(
            3,
            format!("only {} of {} eigenvalues trusted (need {})", spec.trusted_count(), a.count, a.min_trusted),
        ));
    }
    Ok(())
}

/// Spectrum file or two-column points file.
enum Input {
    Spectrum(SpectralData),
    Points(Vec<(f64, f64)>),
}

fn read_input(path: &Path) -> logweyl::Result<Input> {
    let text = read_file(path)?;
    if text.starts_with("# logweyl spectrum") {
        Ok(Input::Spectrum(SpectralData::read_files(path)?))
    } else {
        Ok(Input::Points(parse_points_csv(&text, path)?))
    }
}

fn fit(a: FitArgs) -> Result<(), Exit> {
    let mut pts = match read_input(&a.input)? {
        Input::Spectrum(s) => counting_points(&s.powered(a.power)?, DEFAULT_SKIP_FRACTION)?,
        Input::Points(p) => p,
    };
    if let Some((lo, hi)) = a.window {
        pts.retain(|(l, _)| (lo..=hi).contains(l));
    }
    let f = fit_log_weyl(&pts, a.exponent, a.levels)?;
    let mut r = Report::new("fit");
    r.str("input", a.input.display().to_string())
        .num("exponent", a.exponent)
        .int("levels", a.levels as i64)
        .num("power", a.power)
        .num("skip_fraction", DEFAULT_SKIP_FRACTION);
    for (t, c) in &f.coefficients {
        r.num(&t.key(), *c);
    }
    r.num("window_min", f.fit_window.0)
        .num("window_max", f.fit_window.1)
        .num("residual_sup", f.residual_sup)
        .int("n_points", f.n_points as i64)
        .num("condition", f.condition);
    if let Ok(l) = laurent_from_weyl(&f, a.exponent.round() as usize, 0) {
        r.num("laurent_a2_0", l.a2).num("laurent_a1_0", l.a1);
    }
    r.emit(&a.out)?;
    Ok(())
}

fn flow(a: FlowArgs) -> Result<(), Exit> {
    let z = match (&a.omega, &a.theta) {
        (Some(w), Some(t)) => CornerState::normalized(w, t)?,
        _ => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(a.seed);
            CornerState::sample(a.dim, &mut rng)?
        }
    };
    if !(a.tol > 0.0) {
        return Err(Exit(2, format!("--tol must be positive, got {}", a.tol)));
    }
    let rt = return_time(&z);
    let t = a.t.unwrap_or(rt.value());
    let (num, stats) = flow_numeric_with_stats(&z, t, a.tol)?;
    let closed = flow_closed(&z, t);
    let mut r = Report::new("flow");
    r.int("dim", z.dimension() as i64)
        .int("seed", a.seed as i64)
        .boolean("explicit_state", a.omega.is_some())
        .num("tol", a.tol)
        .int("samples", a.samples as i64)
        .nums("omega0", z.omega().to_vec())
        .nums("theta0", z.theta().to_vec())
        .num("c", conserved_angle(&z))
        .num("return_time", rt.value())
        .boolean("fixed_point", rt.is_fixed_point())
        .boolean("never_returns", matches!(rt, ReturnTime::Never))
        .num("t", t)
        .nums("omega_numeric", num.omega().to_vec())
        .nums("theta_numeric", num.theta().to_vec())
        .nums("omega_closed", closed.omega().to_vec())
        .nums("theta_closed", closed.theta().to_vec())
        .num("distance_numeric_to_start", num.distance(&z))
        .num("distance_closed_to_start", closed.distance(&z))
        .num("distance_numeric_to_closed", num.distance(&closed))
        .num("c_drift", (conserved_angle(&num) - conserved_angle(&z)).abs())
        .num("norm_drift", num.norm_defect())
        .int("accepted_steps", stats.accepted as i64)
        .int("rejected_steps", stats.rejected as i64);
    if let Some(p) = &a.csv {
        let traj = trajectory_numeric(&z, t, a.tol, a.samples)?;
        let d = z.dimension();
        let mut text = format!("# logweyl flow trajectory\n# tol = {}\n# columns: t", fmt_f64(a.tol));
        for i in 0..d {
            text.push_str(&format!(",omega{i}"));
        }
        for i in 0..d {
            text.push_str(&format!(",theta{i}"));
        }
        text.push_str(",c\n");
        for (ti, s) in &traj {
            let row: Vec<String> = std::iter::once(*ti)
                .chain(s.omega().iter().copied())
                .chain(s.theta().iter().copied())
                .chain(std::iter::once(conserved_angle(s)))
                .map(fmt_f64)
                .collect();
            text.push_str(&row.join(","));
            text.push('\n');
        }
        write_file(p, &text)?;
        r.str("csv", p.display().to_string());
    }
    r.emit(&a.out)?;
    Ok(())
}

fn zeta(a: ZetaArgs) -> Result<(), Exit> {
    let spec = match read_input(&a.input)? {
        Input::Spectrum(s) => s.powered(a.power)?,
        Input::Points(_) => return Err(Exit(4, format!("{}: not a spectrum file", a.input.display()))),
    };
    let tail: Option<WeylFit> = if a.tail {
        let exponent = logweyl::asymptotics::default_abscissa(&spec);
        if !(exponent > 0.0) {
            return Err(Exit(2, "tail fit needs a spectrum with grid metadata".into()));
        }
        Some(fit_log_weyl(&counting_points(&spec, DEFAULT_SKIP_FRACTION)?, exponent, a.levels)?)
    } else {
        None
    };
    let values = a
        .s
        .iter()
        .map(|&s| zeta_partial(&spec, s, tail.as_ref()))
        .collect::<logweyl::Result<Vec<f64>>>()?;
    let mut r = Report::new("zeta");
    r.str("input", a.input.display().to_string())
        .num("power", a.power)
        .boolean("tail", a.tail)
        .int("levels", a.levels as i64)
        .int("trusted_count", spec.trusted_count() as i64)
        .nums("s", a.s.clone())
        .nums("zeta", values);
    if let Some(f) = &tail {
        r.num("tail_exponent", f.exponent);
        for (t, c) in &f.coefficients {
            r.num(&format!("tail_{}", t.key()), *c);
        }
    }
    r.emit(&a.out)?;
    Ok(())
}

fn measure(a: MeasureArgs) -> Result<(), Exit> {
    let est = periodic_measure(&ModelCornerFlow, a.dim, a.seed, a.count, a.t_max, a.tol)?;
    let mut r = Report::new("measure");
    r.int("dim", a.dim as i64)
        .int("seed", a.seed as i64)
        .int("count", a.count as i64)
        .num("t_max", a.t_max)
        .num("tol", a.tol)
        .int("periodic", est.periodic as i64)
        .int("fixed_points", est.fixed_points as i64)
        .num("max_return_gap", est.max_return_gap)
        .num("fraction", est.fraction());
    r.emit(&a.out)?;
    Ok(())
}
