//! Command-line front end for the `fxy` library.

pub mod config;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use fxy::certify::{certify_r0_backward_exclusion, certify_suite, split_range, CertifyOptions, Status};
use fxy::classify::{classify_backward, classify_forward, orbit, ClassifyOptions, CycleMode, Direction};
use fxy::dynamics::{
    fixed_points, sequences, stability, three_cycle, Parameter, Point, SequenceKind, SequenceOutput,
    StabilityTarget,
};
use fxy::json::fmt17;
use fxy::render::{sweep, write_ppm, GridSpec, Palette, KMINUS_WINDOW, KPLUS_WINDOW};

pub use config::{load_config, parse_config, Config};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNCERTIFIED: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "fxy", version, about = "Dynamics of f(x,y) = (xy + c, x)")]
pub struct Cli {
    /// key=value defaults file; flags override it [default: none]
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fixed points alpha = (a1, a1), theta = (a2, a2) and the 3-cycle
    FixedPoints(FixedPointsArgs),
    /// Classify one point by its forward or backward orbit
    Classify(ClassifyArgs),
    /// Print a raw orbit
    Orbit(OrbitArgs),
    /// Scalar sequences c_n, b_n and the Fibonacci escape count
    Sequences(SequencesArgs),
    /// Certify the region lemmas over a parameter range
    Certify(CertifyArgs),
    /// Render a K+ or K- class image as PPM
    Render(RenderArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum DirArg {
    Forward,
    Backward,
}

impl From<DirArg> for Direction {
    fn from(d: DirArg) -> Direction {
        match d {
            DirArg::Forward => Direction::Forward,
            DirArg::Backward => Direction::Backward,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Metric,
    Itinerary,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Cn,
    Bn,
    Fib,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SetArg {
    Kplus,
    Kminus,
}

fn parse_point(s: &str) -> Result<Point, String> {
    let (x, y) = s.split_once(',').ok_or("expected x,y")?;
    let x: f64 = x.parse().map_err(|_| format!("bad x '{x}'"))?;
    let y: f64 = y.parse().map_err(|_| format!("bad y '{y}'"))?;
    if !x.is_finite() || !y.is_finite() {
        return Err("coordinates must be finite".into());
    }
    Ok(Point::new(x, y))
}

fn parse_window(s: &str) -> Result<[f64; 4], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.parse::<f64>().map_err(|_| format!("bad number '{p}'")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|_| "expected x0,x1,y0,y1".to_string())
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once('x').ok_or("expected WxH")?;
    let w = w.parse().map_err(|_| format!("bad width '{w}'"))?;
    let h = h.parse().map_err(|_| format!("bad height '{h}'"))?;
    Ok((w, h))
}

#[derive(Args, Debug)]
pub struct FixedPointsArgs {
    /// parameter c (<= 1/4) [default: from config]
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// print one JSON object
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct IterArgs {
    /// iteration budget [default: 5000]
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// convergence tolerance [default: 1e-9]
    #[arg(long)]
    pub tol: Option<f64>,
    /// escape radius for the norm rule [default: 1e6]
    #[arg(long)]
    pub escape_radius: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    /// parameter c [default: from config]
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// starting point as x,y
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub point: Point,
    /// orbit direction
    #[arg(long, value_enum, default_value = "forward")]
    pub direction: DirArg,
    #[command(flatten)]
    pub iter: IterArgs,
    /// cycle criterion
    #[arg(long, value_enum, default_value = "metric")]
    pub mode: ModeArg,
}

#[derive(Args, Debug)]
pub struct OrbitArgs {
    /// parameter c [default: from config]
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// starting point as x,y
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub point: Point,
    /// number of steps
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
    /// orbit direction
    #[arg(long, value_enum, default_value = "forward")]
    pub direction: DirArg,
    /// output format
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
    /// record the regions containing each iterate
    #[arg(long)]
    pub regions: bool,
}

#[derive(Args, Debug)]
pub struct SequencesArgs {
    /// parameter c [default: from config]
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// which sequence
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// number of terms
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// start value for b_n [default: a2]
    #[arg(long, allow_hyphen_values = true)]
    pub w: Option<f64>,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    /// lower end of the c range
    #[arg(long, allow_hyphen_values = true)]
    pub c_lo: f64,
    /// upper end of the c range
    #[arg(long, allow_hyphen_values = true)]
    pub c_hi: f64,
    /// width of each c subinterval
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    /// maximum bisection depth [default: 24]
    #[arg(long)]
    pub depth: Option<u32>,
    /// cut radius for unbounded region sides [default: 1e4]
    #[arg(long)]
    pub r_max: Option<f64>,
    /// also certify the backward R0 exclusion per subinterval
    #[arg(long)]
    pub r0: bool,
    /// JSON-lines report path [default: from config]
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    /// parameter c [default: from config]
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// kplus (forward) or kminus (backward)
    #[arg(long, value_enum, default_value = "kplus")]
    pub set: SetArg,
    /// x0,x1,y0,y1 [default: -2.5,2.5,-2.5,2.5 for kplus, -3,3,-3,3 for kminus]
    #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
    pub window: Option<[f64; 4]>,
    /// image size WxH
    #[arg(long, value_parser = parse_size, default_value = "512x512")]
    pub size: (usize, usize),
    /// output PPM path [default: from config]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON stats path [default: none]
    #[arg(long)]
    pub stats: Option<PathBuf>,
    /// worker threads [default: all cores]
    #[arg(long)]
    pub workers: Option<usize>,
    /// palette overrides Tag=r,g,b;Tag=r,g,b [default: built-in]
    #[arg(long)]
    pub palette: Option<String>,
    #[command(flatten)]
    pub iter: IterArgs,
}

/// Error with an exit code; messages name subcommand, flag and constraint.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn domain(cmd: &str, flag: &str, msg: impl std::fmt::Display) -> Self {
        CliError {
            code: EXIT_DOMAIN,
            message: format!("{cmd}: {flag}: {msg}"),
        }
    }

    fn usage(cmd: &str, flag: &str, msg: impl std::fmt::Display) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: format!("{cmd}: {flag}: {msg}"),
        }
    }
}

type CliResult = Result<i32, CliError>;

fn need_c(cmd: &str, flag: Option<f64>, cfg: &Config) -> Result<f64, CliError> {
    let c = flag
        .or(cfg.c)
        .ok_or_else(|| CliError::usage(cmd, "--c", "required (flag or config key c)"))?;
    if !c.is_finite() {
        return Err(CliError::domain(cmd, "--c", "must be finite"));
    }
    Ok(c)
}

fn param(cmd: &str, c: f64) -> Result<Parameter, CliError> {
    Parameter::new(c).map_err(|e| CliError::domain(cmd, "--c", e))
}

fn classify_opts(cmd: &str, a: &IterArgs, cfg: &Config) -> Result<ClassifyOptions, CliError> {
    let d = ClassifyOptions::default();
    let o = ClassifyOptions {
        max_iter: a.max_iter.or(cfg.max_iter).unwrap_or(d.max_iter),
        tol: a.tol.or(cfg.tol).unwrap_or(d.tol),
        escape_radius: a.escape_radius.or(cfg.escape_radius).unwrap_or(d.escape_radius),
        ..d
    };
    if !(o.tol > 0.0 && o.tol.is_finite()) {
        return Err(CliError::domain(cmd, "--tol", "must be positive and finite"));
    }
    if !(o.escape_radius > 0.0) {
        return Err(CliError::domain(cmd, "--escape-radius", "must be positive"));
    }
    Ok(o)
}

fn pair(p: Point) -> String {
    format!("[{},{}]", fmt17(p.x), fmt17(p.y))
}

fn io_err(cmd: &str, path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::domain(cmd, &path.display().to_string(), e)
}

fn fixed_points_cmd(a: &FixedPointsArgs, cfg: &Config, out: &mut dyn Write) -> CliResult {
    const CMD: &str = "fixed-points";
    let c = need_c(CMD, a.c, cfg)?;
    let fp = fixed_points(c).map_err(|_| CliError::domain(CMD, "--c", format!("needs c <= 1/4 for real fixed points (got {c})")))?;
    let cy = three_cycle(c);
    let class = |t| {
        stability(c, t)
            .map(|r| format!("{:?}", r.class))
            .unwrap_or_else(|_| "n/a".into())
    };
    let (sa, st, sc) = (
        class(StabilityTarget::Alpha),
        class(StabilityTarget::Theta),
        class(StabilityTarget::Cycle),
    );
    let res = if a.json {
        writeln!(
            out,
            "{{\"c\":{},\"a1\":{},\"a2\":{},\"alpha\":{},\"theta\":{},\"cycle\":[{},{},{}],\"stability\":{{\"alpha\":\"{sa}\",\"theta\":\"{st}\",\"cycle\":\"{sc}\"}}}}",
            fmt17(c),
            fmt17(fp.a1),
            fmt17(fp.a2),
            pair(fp.alpha),
            pair(fp.theta),
            pair(cy.p),
            pair(cy.fp),
            pair(cy.f2p)
        )
    } else {
        writeln!(
            out,
            "c = {}\na1 = {}\na2 = {}\nalpha = ({}, {})  {sa}\ntheta = ({}, {})  {st}\n3-cycle = ({}, {}) -> ({}, {}) -> ({}, {})  {sc}",
            fmt17(c),
            fmt17(fp.a1),
            fmt17(fp.a2),
            fmt17(fp.alpha.x),
            fmt17(fp.alpha.y),
            fmt17(fp.theta.x),
            fmt17(fp.theta.y),
            fmt17(cy.p.x),
            fmt17(cy.p.y),
            fmt17(cy.fp.x),
            fmt17(cy.fp.y),
            fmt17(cy.f2p.x),
            fmt17(cy.f2p.y)
        )
    };
    res.map_err(|e| CliError::domain(CMD, "stdout", e))?;
    Ok(EXIT_OK)
}

fn classify_cmd(a: &ClassifyArgs, cfg: &Config, out: &mut dyn Write) -> CliResult {
    const CMD: &str = "classify";
    let c = param(CMD, need_c(CMD, a.c, cfg)?)?;
    let mut opts = classify_opts(CMD, &a.iter, cfg)?;
    opts.mode = match a.mode {
        ModeArg::Metric => CycleMode::Metric,
        ModeArg::Itinerary => CycleMode::Itinerary,
    };
    opts.record_orbit = false;
    let line = match a.direction {
        DirArg::Forward => classify_forward(a.point, c, &opts).verdict_json(),
        DirArg::Backward => classify_backward(a.point, c, &opts).verdict_json(),
    };
    writeln!(out, "{line}").map_err(|e| CliError::domain(CMD, "stdout", e))?;
    Ok(EXIT_OK)
}

fn orbit_cmd(a: &OrbitArgs, cfg: &Config, out: &mut dyn Write) -> CliResult {
    const CMD: &str = "orbit";
    let c = param(CMD, need_c(CMD, a.c, cfg)?)?;
    let rec = orbit(a.point, c, a.steps, a.direction.into(), a.regions);
    let text = match a.format {
        FormatArg::Csv => rec.to_csv(),
        FormatArg::Json => rec.to_json() + "\n",
    };
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::domain(CMD, "stdout", e))?;
    Ok(EXIT_OK)
}

fn sequences_cmd(a: &SequencesArgs, cfg: &Config, out: &mut dyn Write) -> CliResult {
    const CMD: &str = "sequences";
    let c = need_c(CMD, a.c, cfg)?;
    let kind = match a.kind {
        KindArg::Cn => SequenceKind::Cn,
        KindArg::Bn => SequenceKind::Bn,
        KindArg::Fib => SequenceKind::FibEscape,
    };
    let flag = match a.kind {
        KindArg::Bn if a.w.is_some() => "--w",
        _ => "--c",
    };
    let res = sequences(kind, c, a.n, a.w).map_err(|e| CliError::domain(CMD, flag, e))?;
    let line = match res {
        SequenceOutput::Values(v) => {
            let v: Vec<String> = v.into_iter().map(fmt17).collect();
            format!("[{}]", v.join(","))
        }
        SequenceOutput::Count(n) => n.to_string(),
    };
    writeln!(out, "{line}").map_err(|e| CliError::domain(CMD, "stdout", e))?;
    Ok(EXIT_OK)
}

fn certify_cmd(a: &CertifyArgs, cfg: &Config, out: &mut dyn Write) -> CliResult {
    const CMD: &str = "certify";
    if !(a.c_lo.is_finite() && a.c_hi.is_finite() && a.c_lo <= a.c_hi) {
        return Err(CliError::domain(CMD, "--c-lo/--c-hi", "need finite c-lo <= c-hi"));
    }
    if !(-1.0 < a.c_lo && a.c_hi < 0.0) {
        return Err(CliError::domain(CMD, "--c-lo/--c-hi", "range must lie inside (-1, 0)"));
    }
    if !(a.step > 0.0 && a.step.is_finite()) {
        return Err(CliError::domain(CMD, "--step", "must be positive"));
    }
    let report = a
        .report
        .clone()
        .or_else(|| cfg.report.clone())
        .ok_or_else(|| CliError::usage(CMD, "--report", "required (flag or config key report)"))?;
    let d = CertifyOptions::default();
    let opts = CertifyOptions {
        r_max: a.r_max.or(cfg.r_max).unwrap_or(d.r_max),
        max_depth: a.depth.or(cfg.max_depth).unwrap_or(d.max_depth),
    };
    if !(opts.r_max > 0.0 && opts.r_max.is_finite()) {
        return Err(CliError::domain(CMD, "--r-max", "must be positive and finite"));
    }
    let pieces = (((a.c_hi - a.c_lo) / a.step) - 1e-9).ceil().max(1.0) as usize;
    let mut lines = Vec::new();
    let (mut total, mut certified) = (0usize, 0usize);
    let mut tally = |st: Status| {
        total += 1;
        if st == Status::Certified {
            certified += 1;
        }
    };
    for c in split_range(a.c_lo, a.c_hi, pieces) {
        let certs = certify_suite(c, &opts).map_err(|e| CliError::domain(CMD, "--c-lo/--c-hi", e))?;
        for cert in &certs {
            tally(cert.status);
            lines.push(cert.to_json_line());
        }
        if a.r0 {
            let ex = certify_r0_backward_exclusion(c, &opts).map_err(|e| CliError::domain(CMD, "--r0", e))?;
            match ex {
                Some(ex) => {
                    tally(ex.certificate.status);
                    lines.push(ex.certificate.to_json_line());
                }
                None => {
                    tally(Status::DepthExceeded);
                    lines.push(format!(
                        "{{\"claim\":\"backward-r0/exclusion\",\"status\":\"DepthExceeded\",\"depth\":0,\"c\":[{},{}]}}",
                        fmt17(c.lo),
                        fmt17(c.hi)
                    ));
                }
            }
        }
    }
    let mut body = lines.join("\n");
    body.push('\n');
    std::fs::write(&report, body).map_err(|e| io_err(CMD, &report, e))?;
    writeln!(
        out,
        "certified {certified}/{total} over {pieces} subintervals; report {}",
        report.display()
    )
    .map_err(|e| CliError::domain(CMD, "stdout", e))?;
    Ok(if certified == total { EXIT_OK } else { EXIT_UNCERTIFIED })
}

fn render_cmd(a: &RenderArgs, cfg: &Config, out: &mut dyn Write) -> CliResult {
    const CMD: &str = "render";
    let c = param(CMD, need_c(CMD, a.c, cfg)?)?;
    let opts = classify_opts(CMD, &a.iter, cfg)?;
    let (window, direction) = match a.set {
        SetArg::Kplus => (a.window.unwrap_or(KPLUS_WINDOW), Direction::Forward),
        SetArg::Kminus => (a.window.unwrap_or(KMINUS_WINDOW), Direction::Backward),
    };
    let grid = GridSpec::new(window, a.size.0, a.size.1).map_err(|e| CliError::domain(CMD, "--window/--size", e))?;
    let path = a
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .ok_or_else(|| CliError::usage(CMD, "--out", "required (flag or config key out)"))?;
    let palette = match a.palette.as_ref().or(cfg.palette.as_ref()) {
        Some(spec) => Palette::default()
            .with_overrides(spec)
            .map_err(|e| CliError::domain(CMD, "--palette", e))?,
        None => Palette::default(),
    };
    let workers = a.workers.or(cfg.workers);
    if workers == Some(0) {
        return Err(CliError::domain(CMD, "--workers", "must be at least 1"));
    }
    let (img, stats) = sweep(&grid, c, direction, &opts, workers).map_err(|e| CliError::domain(CMD, "--workers", e))?;
    write_ppm(&img, &palette, &path).map_err(|e| CliError::domain(CMD, "--out", e))?;
    let json = stats.to_json();
    if let Some(sp) = a.stats.clone().or_else(|| cfg.stats.clone()) {
        std::fs::write(&sp, format!("{json}\n")).map_err(|e| io_err(CMD, &sp, e))?;
    }
    writeln!(out, "{json}").map_err(|e| CliError::domain(CMD, "stdout", e))?;
    Ok(EXIT_OK)
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> CliResult {
    let cfg = load_config(cli.config.as_deref()).map_err(|e| CliError::usage("config", "--config", format!("{e:#}")))?;
    match &cli.command {
        Command::FixedPoints(a) => fixed_points_cmd(a, &cfg, out),
        Command::Classify(a) => classify_cmd(a, &cfg, out),
        Command::Orbit(a) => orbit_cmd(a, &cfg, out),
        Command::Sequences(a) => sequences_cmd(a, &cfg, out),
        Command::Certify(a) => certify_cmd(a, &cfg, out),
        Command::Render(a) => render_cmd(a, &cfg, out),
    }
}

/// Parses `argv` (including the program name), runs it and returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}
