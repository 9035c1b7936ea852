//! Command-line front end: argument parsing, JSON reports and exit codes.
//!
//! Exit codes: 0 success, 1 failed verification, 2 invalid input, 3 a cap was reached or the
//! answer is inconclusive (the report then carries whatever was computed).

mod resolve;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use num_traits::Zero;
use serde::Deserialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub use resolve::{half_and_half_t, hex, load_rule, parse_vector, resolve_mode, resolve_pattern, RuleChoice};

use crate::geom::{self, GeomError, GeomPatch, SvgStyle};
use crate::lattice::{ExpansionMap, LatticeError};
use crate::ldmap::{find_inverse_rule, inflated_language, subdivision_as_ld, InverseResult, LdError, DEFAULT_INVERSE_CAP};
use crate::patterns::{extract_patch, Alphabet, LatticePattern, PatternError, Shape};
use crate::quad::QuadNum;
use crate::recog::{
    canonical_pattern, certify_period, compute_periods, enumerate_fibre, li_fixing_power, recognisability_radius,
    uc_verify, PeriodVerdict, RecogError, RecognisabilityReport, DEFAULT_NORM_BOUND, DEFAULT_RECOGNISABILITY_CAP,
    DEFAULT_WINDOW_SCHEDULE,
};
use crate::subst::{
    complexity, expansion_estimate, fixed_points, hierarchy, is_primitive, substitution_matrix, Language, Rule,
    RuleKind, SubstError, DEFAULT_SATURATION_CAP,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Invalid { reason: String, message: String },
    Inconclusive { reason: String, message: String, partial: Value },
}

impl CliError {
    pub fn validation(reason: &str, message: &str) -> Self {
        CliError::Invalid { reason: reason.into(), message: message.into() }
    }

    pub fn inconclusive(reason: &str, message: &str, partial: Value) -> Self {
        CliError::Inconclusive { reason: reason.into(), message: message.into(), partial }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid { .. } => EXIT_INVALID,
            CliError::Inconclusive { .. } => EXIT_INCONCLUSIVE,
        }
    }

    pub fn reason(&self) -> &str {
        match self {
            CliError::Invalid { reason, .. } | CliError::Inconclusive { reason, .. } => reason,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Invalid { message, .. } | CliError::Inconclusive { message, .. } => message,
        }
    }
}

impl From<SubstError> for CliError {
    fn from(e: SubstError) -> Self {
        match &e {
            SubstError::SaturationCapExceeded { size, depth, partial } => CliError::inconclusive(
                e.reason(),
                &e.to_string(),
                json!({"size": size, "depth": depth, "patches_found": partial}),
            ),
            _ => CliError::validation(e.reason(), &e.to_string()),
        }
    }
}

impl From<RecogError> for CliError {
    fn from(e: RecogError) -> Self {
        match e {
            RecogError::Subst(s) => s.into(),
            RecogError::NotStabilized { lower_bound, window } => CliError::inconclusive(
                "not_stabilized",
                &e.to_string(),
                json!({"lower_bound": lower_bound, "window": window}),
            ),
            RecogError::ConfigRadiusUnstable { radius, .. } => {
                CliError::inconclusive(e.reason(), &e.to_string(), json!({"radius": radius}))
            }
            _ => CliError::validation(e.reason(), &e.to_string()),
        }
    }
}

impl From<LdError> for CliError {
    fn from(e: LdError) -> Self {
        match e {
            LdError::Subst(s) => s.into(),
            LdError::PatchOutsideDeclaredLanguage(_) => CliError::validation("patch_outside_language", &e.to_string()),
            LdError::AlphabetMismatch(_) => CliError::validation("alphabet_mismatch", &e.to_string()),
            _ => CliError::validation("invalid_local_rule", &e.to_string()),
        }
    }
}

impl From<GeomError> for CliError {
    fn from(e: GeomError) -> Self {
        CliError::validation(e.reason(), &e.to_string())
    }
}

impl From<PatternError> for CliError {
    fn from(e: PatternError) -> Self {
        CliError::validation("pattern", &e.to_string())
    }
}

impl From<LatticeError> for CliError {
    fn from(e: LatticeError) -> Self {
        CliError::validation("lattice", &e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "substrate", version, about = "Substitution pattern spaces: languages, periods, fibres, recognisability")]
pub struct Cli {
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Workspace file with defaults for --rule, --pattern, --mode, --power and the caps.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Add wall-clock time to the report (reports are otherwise byte-stable).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Target {
    /// Builtin rule name or path to a rule file.
    #[arg(long)]
    rule: Option<String>,
    /// Pattern: a builtin alias, const:X, periodic:WORD, interior:X@j, corner:a.b or fixed:i.
    #[arg(long)]
    pattern: Option<String>,
    /// Power n of the seed for interior: and corner: patterns.
    #[arg(long)]
    seed_power: Option<u32>,
    /// Translate the pattern by a rational vector, e.g. -1/2 or 1/2,0.
    #[arg(long, allow_hyphen_values = true)]
    shift: Option<String>,
    /// admitted, hull or auto.
    #[arg(long)]
    mode: Option<String>,
    /// Saturation depth cap for languages.
    #[arg(long)]
    saturation_cap: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rule summary; geometric rules also get the stone check and stretch bounds.
    Info(Target),
    /// Legal patches of one box size.
    Language {
        #[command(flatten)]
        target: Target,
        /// N or NxM.
        #[arg(long)]
        size: String,
        #[arg(long)]
        count_only: bool,
    },
    /// Number of legal side-n boxes for n = 1..=max.
    Complexity {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 6)]
        max: i64,
    },
    /// Substitution matrix and primitivity.
    Primitivity(Target),
    /// Fixed points of σⁿ for n up to --power.
    FixedPoints {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        power: Option<u32>,
    },
    /// Period group of a pattern, or a verdict on one --vector.
    Periods {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        norm_bound: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        vector: Option<String>,
    },
    /// Pre-images of a pattern under σⁿ.
    Fibre {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        power: Option<u32>,
        /// Comma-separated window radii.
        #[arg(long)]
        schedule: Option<String>,
    },
    /// Recognisability radius of the language.
    Recognise {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        cap: Option<i64>,
    },
    /// Least power n fixing every configuration class.
    LiPower {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 1)]
        config_radius: i64,
    },
    /// Fibre of a pattern matched against the cosets of LⁿK in K.
    UcVerify {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        power: Option<u32>,
        #[arg(long)]
        schedule: Option<String>,
    },
    /// Subdivision as a local rule, its local surjectivity and a local inverse.
    MldCheck {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 2)]
        check_radius: i64,
        #[arg(long)]
        cap: Option<i64>,
    },
    /// Backward and forward levels of the hierarchy of a pattern.
    Hierarchy {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 2)]
        levels: usize,
        #[arg(long)]
        power: Option<u32>,
        #[arg(long)]
        canonical: bool,
    },
    /// SVG of an iterated geometric inflation.
    Render {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 2)]
        depth: u32,
        /// Seed prototile label; the first prototile by default.
        #[arg(long)]
        tile: Option<String>,
        #[arg(long, default_value_t = 4)]
        precision: u32,
        /// Draw the inflated seed outline on top.
        #[arg(long)]
        overlay: bool,
    },
    /// Run the acceptance criteria.
    Verify {
        /// Criterion id (1-10) or tag.
        #[arg(long)]
        only: Option<String>,
        /// Perturb the expected value of one criterion; that criterion must then fail.
        #[arg(long)]
        inject: Option<u32>,
    },
}

/// Defaults read from `--config`.
#[derive(Deserialize, Debug, Default, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Workspace {
    pub rule: Option<String>,
    pub pattern: Option<String>,
    pub mode: Option<String>,
    pub power: Option<u32>,
    pub seed_power: Option<u32>,
    pub shift: Option<String>,
    #[serde(default)]
    pub caps: Caps,
}

#[derive(Deserialize, Debug, Default, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Caps {
    pub saturation: Option<usize>,
    pub recognisability: Option<i64>,
    pub window_schedule: Option<Vec<i64>>,
    pub inverse: Option<i64>,
    pub norm_bound: Option<i64>,
}

impl Workspace {
    pub fn parse(text: &str) -> Result<Workspace, CliError> {
        let ws: Workspace = toml::from_str(text).map_err(|e| CliError::validation("config", &e.to_string()))?;
        let c = &ws.caps;
        let positive = [
            ("saturation", c.saturation.map(|x| x as i64)),
            ("recognisability", c.recognisability),
            ("inverse", c.inverse),
            ("norm_bound", c.norm_bound),
            ("power", ws.power.map(i64::from)),
            ("seed_power", ws.seed_power.map(i64::from)),
        ];
        for (name, v) in positive {
            if matches!(v, Some(x) if x <= 0) {
                return Err(CliError::validation("config", &format!("{name} must be positive")));
            }
        }
        if let Some(s) = &c.window_schedule {
            check_schedule(s)?;
        }
        if let Some(m) = &ws.mode {
            if !["admitted", "hull", "auto"].contains(&m.as_str()) {
                return Err(CliError::validation("config", &format!("unknown mode {m:?}")));
            }
        }
        Ok(ws)
    }
}

fn check_schedule(s: &[i64]) -> Result<(), CliError> {
    if s.is_empty() || s.iter().any(|&r| r <= 0) || s.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::validation("config", "window schedule must be positive and strictly increasing"));
    }
    Ok(())
}

/// Parses the arguments, runs the command, writes the report and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        return finish(&cli, error_report(&cli, &json!({}), &e), e.exit_code());
    }
    let ws = match &cli.config {
        None => Ok(Workspace::default()),
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| CliError::validation("io", &format!("cannot read {}: {e}", p.display())))
            .and_then(|t| Workspace::parse(&t)),
    };
    let ws = match ws {
        Ok(w) => w,
        Err(e) => return finish(&cli, error_report(&cli, &json!({}), &e), e.exit_code()),
    };
    let start = Instant::now();
    let mut inputs = json!({});
    let outcome = Session { ws }.dispatch(&cli.command, &mut inputs);
    let elapsed = start.elapsed();
    match outcome {
        Ok(Outcome::Svg(svg)) => finish(&cli, svg, EXIT_OK),
        Ok(Outcome::Report { status, result }) => {
            let mut r = report(&cli, &inputs, status, result);
            if cli.timing {
                r["timing_ms"] = json!(elapsed.as_millis() as u64);
            }
            let code = if status == "failed" { EXIT_FAILED } else { EXIT_OK };
            finish(&cli, pretty(&r), code)
        }
        Err(e) => {
            eprintln!("substrate: {}", e.message());
            finish(&cli, error_report(&cli, &inputs, &e), e.exit_code())
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("SUBSTRATE_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::validation("config", &format!("SUBSTRATE_THREADS must be a positive integer, got {v:?}")))?;
    // The global pool can only be set once per process; later calls keep the first setting.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Info(_) => "info",
        Command::Language { .. } => "language",
        Command::Complexity { .. } => "complexity",
        Command::Primitivity(_) => "primitivity",
        Command::FixedPoints { .. } => "fixed-points",
        Command::Periods { .. } => "periods",
        Command::Fibre { .. } => "fibre",
        Command::Recognise { .. } => "recognise",
        Command::LiPower { .. } => "li-power",
        Command::UcVerify { .. } => "uc-verify",
        Command::MldCheck { .. } => "mld-check",
        Command::Hierarchy { .. } => "hierarchy",
        Command::Render { .. } => "render",
        Command::Verify { .. } => "verify",
    }
}

pub fn inputs_hash(inputs: &Value) -> String {
    hex(&Sha256::digest(inputs.to_string().as_bytes()))
}

fn report(cli: &Cli, inputs: &Value, status: &str, result: Value) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "tool": "substrate",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command_name(&cli.command),
        "inputs": inputs,
        "inputs_hash": inputs_hash(inputs),
        "status": status,
        "result": result,
    })
}

fn error_report(cli: &Cli, inputs: &Value, e: &CliError) -> String {
    let (status, partial) = match e {
        CliError::Invalid { .. } => ("error", Value::Null),
        CliError::Inconclusive { partial, .. } => ("inconclusive", partial.clone()),
    };
    let mut r = report(cli, inputs, status, partial);
    r["error"] = json!({"reason": e.reason(), "message": e.message()});
    pretty(&r)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn finish(cli: &Cli, text: String, code: i32) -> i32 {
    let written = match &cli.out {
        Some(p) => std::fs::write(p, text.as_bytes()).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    match written {
        Ok(()) => code,
        Err(m) => {
            eprintln!("substrate: {m}");
            EXIT_INVALID
        }
    }
}

enum Outcome {
    Report { status: &'static str, result: Value },
    Svg(String),
}

fn ok(result: Value) -> Result<Outcome, CliError> {
    Ok(Outcome::Report { status: "ok", result })
}

/// Renders row-major patch contents: rows joined by `/`, letters by spaces when any name is long.
pub fn render_values(a: &Alphabet, dim: usize, size: [i64; 2], values: &[u8]) -> String {
    let sep = if a.letters().iter().any(|l| l.chars().count() > 1) { " " } else { "" };
    let word = |vs: &[u8]| vs.iter().map(|&l| a.name(l)).collect::<Vec<_>>().join(sep);
    if dim == 1 {
        word(values)
    } else {
        values.chunks(size[1].max(1) as usize).map(word).collect::<Vec<_>>().join("/")
    }
}

fn centre_window(p: &LatticePattern) -> String {
    let r = if p.dim() == 1 { 8 } else { 3 };
    let w = extract_patch(p, [0, 0], Shape::radius(r, p.dim()));
    render_values(p.alphabet(), p.dim(), w.shape().size(), w.values())
}

fn expansion_json(l: &ExpansionMap) -> Value {
    json!(l.matrix().iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn parse_size(s: &str, dim: usize) -> Result<[i64; 2], CliError> {
    let bad = || CliError::validation("malformed_size", &format!("size must be N or NxM, got {s:?}"));
    let parts: Vec<i64> = s.split('x').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
    let size = match (dim, parts.as_slice()) {
        (1, [n]) => [*n, 1],
        (2, [n]) => [*n, *n],
        (2, [n, m]) => [*n, *m],
        _ => return Err(bad()),
    };
    if size[0] <= 0 || size[1] <= 0 {
        return Err(bad());
    }
    Ok(size)
}

fn parse_schedule(s: &str) -> Result<Vec<i64>, CliError> {
    let v: Vec<i64> = s
        .split(',')
        .map(|x| x.trim().parse().map_err(|_| CliError::validation("config", &format!("bad schedule {s:?}"))))
        .collect::<Result<_, _>>()?;
    check_schedule(&v)?;
    Ok(v)
}

fn positive_power(p: u32) -> Result<u32, CliError> {
    if p == 0 {
        return Err(CliError::validation("invalid_config", "power must be at least 1"));
    }
    Ok(p)
}

struct Session {
    ws: Workspace,
}

/// A rule with the pattern and language resolved for one command.
struct Resolved {
    rule: Arc<Rule>,
    pattern: Option<LatticePattern>,
    lang: Language,
}

impl Session {
    fn rule(&self, t: &Target, inputs: &mut Value) -> Result<RuleChoice, CliError> {
        let name = t
            .rule
            .clone()
            .or_else(|| self.ws.rule.clone())
            .ok_or_else(|| CliError::validation("missing_rule", "no --rule given"))?;
        let choice = load_rule(&name)?;
        inputs["rule"] = choice.echo.clone();
        Ok(choice)
    }

    fn saturation(&self, t: &Target) -> Result<usize, CliError> {
        let cap = t.saturation_cap.or(self.ws.caps.saturation).unwrap_or(DEFAULT_SATURATION_CAP);
        if cap == 0 {
            return Err(CliError::validation("config", "saturation cap must be positive"));
        }
        Ok(cap)
    }

    fn power(&self, flag: Option<u32>, default: u32) -> Result<u32, CliError> {
        positive_power(flag.or(self.ws.power).unwrap_or(default))
    }

    fn schedule(&self, flag: &Option<String>) -> Result<Vec<i64>, CliError> {
        match (flag, &self.ws.caps.window_schedule) {
            (Some(s), _) => parse_schedule(s),
            (None, Some(v)) => Ok(v.clone()),
            (None, None) => Ok(DEFAULT_WINDOW_SCHEDULE.to_vec()),
        }
    }

    /// Rule, optional pattern and language; `need_pattern` makes a missing pattern an error.
    fn resolve(&self, t: &Target, need_pattern: bool, inputs: &mut Value) -> Result<Resolved, CliError> {
        let choice = self.rule(t, inputs)?;
        let rule = choice.symbolic()?.clone();
        let spec = t.pattern.clone().or_else(|| self.ws.pattern.clone());
        let seed_power = positive_power(t.seed_power.or(self.ws.seed_power).unwrap_or(1))?;
        let shift = t.shift.clone().or_else(|| self.ws.shift.clone());
        let pattern = match &spec {
            Some(s) => {
                inputs["pattern"] = json!({"spec": s, "seed_power": seed_power, "shift": shift});
                Some(resolve_pattern(&rule, s, seed_power, shift.as_deref())?)
            }
            None if need_pattern => return Err(CliError::validation("missing_pattern", "no --pattern given")),
            None => None,
        };
        let mode_name = t.mode.clone().or_else(|| self.ws.mode.clone()).unwrap_or_else(|| "auto".into());
        let (mode, resolved) = resolve_mode(&rule, &mode_name, pattern.as_ref())?;
        let cap = self.saturation(t)?;
        inputs["mode"] = json!({"requested": mode_name, "resolved": resolved});
        inputs["saturation_cap"] = json!(cap);
        let lang = Language::new(Some(rule.clone()), mode).with_cap(cap);
        Ok(Resolved { rule, pattern, lang })
    }

    fn dispatch(&self, cmd: &Command, inputs: &mut Value) -> Result<Outcome, CliError> {
        match cmd {
            Command::Info(t) => self.info(t, inputs),
            Command::Language { target, size, count_only } => {
                let r = self.resolve(target, false, inputs)?;
                let size = parse_size(size, r.rule.dim())?;
                inputs["size"] = json!(size[..r.rule.dim()].to_vec());
                let e = r.lang.entry(size)?;
                let mut result = json!({
                    "count": e.len(),
                    "saturated": e.saturated,
                    "depth": e.depth,
                    "method": e.method,
                });
                if !count_only {
                    result["patches"] = json!(e
                        .patches
                        .iter()
                        .map(|v| render_values(r.rule.alphabet(), r.rule.dim(), size, v))
                        .collect::<Vec<_>>());
                }
                ok(result)
            }
            Command::Complexity { target, max } => {
                let r = self.resolve(target, false, inputs)?;
                if *max <= 0 {
                    return Err(CliError::validation("config", "--max must be positive"));
                }
                inputs["max"] = json!(max);
                let counts = (1..=*max)
                    .map(|n| complexity(&r.rule, n, r.lang.mode()).map(|c| json!({"n": n, "count": c})))
                    .collect::<Result<Vec<_>, _>>()?;
                ok(json!({"counts": counts}))
            }
            Command::Primitivity(t) => {
                let choice = self.rule(t, inputs)?;
                let rule = choice.symbolic()?;
                let m = substitution_matrix(rule);
                ok(json!({
                    "matrix": m.counts,
                    "column_sums": m.column_sums(),
                    "primitive": is_primitive(rule),
                    "expansion_estimate": format!("{:.6}", expansion_estimate(rule)),
                }))
            }
            Command::FixedPoints { target, power } => {
                let choice = self.rule(target, inputs)?;
                let rule = choice.symbolic()?;
                let n = self.power(*power, 2)?;
                inputs["power"] = json!(n);
                let fps = fixed_points(rule, n)?;
                ok(json!({
                    "count": fps.len(),
                    "fixed_points": fps.iter().map(|f| {
                        let mut j = f.to_json(rule);
                        j["window"] = json!(centre_window(&f.pattern(rule)));
                        j
                    }).collect::<Vec<_>>(),
                }))
            }
            Command::Periods { target, norm_bound, vector } => self.periods(target, *norm_bound, vector, inputs),
            Command::Fibre { target, power, schedule } => {
                let r = self.resolve(target, true, inputs)?;
                let n = self.power(*power, 1)?;
                let sched = self.schedule(schedule)?;
                inputs["power"] = json!(n);
                inputs["window_schedule"] = json!(sched);
                let p = r.pattern.as_ref().expect("required");
                let f = enumerate_fibre(&r.rule, p, n, &sched, &r.lang)?;
                let mut result = f.to_json();
                result["windows"] = json!(f.elements.iter().map(centre_window).collect::<Vec<_>>());
                ok(result)
            }
            Command::Recognise { target, cap } => {
                let r = self.resolve(target, false, inputs)?;
                let cap = cap.or(self.ws.caps.recognisability).unwrap_or(DEFAULT_RECOGNISABILITY_CAP);
                if cap <= 0 {
                    return Err(CliError::validation("config", "recognisability cap must be positive"));
                }
                inputs["cap"] = json!(cap);
                match recognisability_radius(&r.rule, cap, &r.lang)? {
                    RecognisabilityReport::Found { radius } => ok(json!({"recognisable": true, "radius": radius})),
                    RecognisabilityReport::AmbiguousAtCap { cap, witness } => {
                        let a = r.rule.alphabet();
                        let pj = |p: &crate::patterns::Patch| p.to_json(a);
                        Err(CliError::inconclusive(
                            "ambiguous_at_cap",
                            &format!("two cuttings survive at radius {cap}"),
                            json!({
                                "recognisable": Value::Null,
                                "cap": cap,
                                "witness": {
                                    "patch": pj(&witness.patch),
                                    "cuttings": witness.cuttings.iter().map(|c| c.to_json(&r.rule)).collect::<Vec<_>>(),
                                    "extensions": witness.extensions.iter().map(pj).collect::<Vec<_>>(),
                                },
                            }),
                        ))
                    }
                }
            }
            Command::LiPower { target, config_radius } => {
                let r = self.resolve(target, false, inputs)?;
                if *config_radius < 0 {
                    return Err(CliError::validation("config", "--config-radius must be non-negative"));
                }
                inputs["config_radius"] = json!(config_radius);
                let li = li_fixing_power(&r.rule, r.lang.mode(), *config_radius)?;
                ok(li.to_json())
            }
            Command::UcVerify { target, power, schedule } => {
                let r = self.resolve(target, true, inputs)?;
                let n = self.power(*power, 1)?;
                let sched = self.schedule(schedule)?;
                let bound = self.ws.caps.norm_bound.unwrap_or(DEFAULT_NORM_BOUND);
                inputs["power"] = json!(n);
                inputs["window_schedule"] = json!(sched);
                let p = r.pattern.as_ref().expect("required");
                let f = enumerate_fibre(&r.rule, p, n, &sched, &r.lang)?;
                let k = compute_periods(&canonical_pattern(p)?, bound)?;
                let uc = uc_verify(&r.rule, &f, &k.group)?;
                let passes = uc.bijection && uc.count as u64 == uc.index;
                ok(json!({
                    "fibre": f.to_json(),
                    "periods": k.group.to_json(),
                    "uc": uc.to_json(),
                    "passes": passes,
                }))
            }
            Command::MldCheck { target, check_radius, cap } => self.mld_check(target, *check_radius, *cap, inputs),
            Command::Hierarchy { target, levels, power, canonical } => {
                let r = self.resolve(target, true, inputs)?;
                let n = self.power(*power, 1)?;
                inputs["power"] = json!(n);
                inputs["levels"] = json!(levels);
                inputs["canonical"] = json!(canonical);
                let p = r.pattern.as_ref().expect("required");
                let h = hierarchy(&r.rule, p, *levels, n, *canonical, &r.lang)?;
                let mut result = h.to_json();
                result["backward_windows"] = json!(h.backward.iter().map(centre_window).collect::<Vec<_>>());
                result["forward_windows"] = json!(h.forward.iter().map(centre_window).collect::<Vec<_>>());
                ok(result)
            }
            Command::Render { target, depth, tile, precision, overlay } => {
                let choice = self.rule(target, inputs)?;
                let g = choice.geometric()?;
                let j = match tile {
                    None => 0,
                    Some(l) => g.prototile_id(l).ok_or_else(|| GeomError::UnknownPrototile(l.clone()))?,
                };
                let patch = geom::iterate(g, &GeomPatch::single(j), *depth);
                let style = SvgStyle {
                    precision: *precision,
                    overlay: overlay.then(|| geom::inflated_outline(g, j, *depth)),
                };
                Ok(Outcome::Svg(geom::render_svg(g, &patch, &style)))
            }
            Command::Verify { only, inject } => {
                inputs["only"] = json!(only);
                inputs["inject"] = json!(inject);
                let suite = verify::run_suite(only.as_deref(), *inject)?;
                let status = if suite.all_passed() { "ok" } else { "failed" };
                Ok(Outcome::Report { status, result: suite.to_json() })
            }
        }
    }

    fn info(&self, t: &Target, inputs: &mut Value) -> Result<Outcome, CliError> {
        let choice = self.rule(t, inputs)?;
        let mut result = json!({});
        if let Some(rule) = &choice.symbolic {
            let a = rule.alphabet();
            let images: Vec<Value> = a
                .iter()
                .map(|l| {
                    let p = rule.image_patch(l);
                    json!({
                        "letter": a.name(l),
                        "image": render_values(a, rule.dim(), p.shape().size(), p.values()),
                    })
                })
                .collect();
            result["symbolic"] = json!({
                "name": rule.name(),
                "dim": rule.dim(),
                "kind": match rule.kind() { RuleKind::Word(_) => "word", RuleKind::Block { .. } => "block" },
                "alphabet": a.letters(),
                "images": images,
                "constant_shape": rule.constant_shape().map(|k| k[..rule.dim()].to_vec()),
                "expansion": rule.expansion().map(expansion_json),
                "primitive": is_primitive(rule),
            });
        }
        if let Some(g) = &choice.geometric {
            let stone = geom::verify_stone(g);
            let m = geom::metrics(g, &QuadNum::zero(), 3)?;
            result["geometric"] = json!({"rule": g.to_json(), "stone": stone.to_json(), "metrics": m.to_json()});
        }
        ok(result)
    }

    fn periods(&self, t: &Target, bound: Option<i64>, vector: &Option<String>, inputs: &mut Value) -> Result<Outcome, CliError> {
        let r = self.resolve(t, true, inputs)?;
        let p = r.pattern.as_ref().expect("required");
        if let Some(v) = vector {
            inputs["vector"] = json!(v);
            let mut u = parse_vector(v, p.dim())?;
            u.resize(2, BigRational::from_integer(0.into()));
            let verdict = certify_period(p, &u, [0, 0]);
            let result = match &verdict {
                PeriodVerdict::Certified { is_period, radius, witness, method } => json!({
                    "certified": true,
                    "is_period": is_period,
                    "radius": radius,
                    "witness": witness.map(|w| w[..p.dim()].to_vec()),
                    "method": method,
                }),
                PeriodVerdict::Unknown { reason } => {
                    return Err(CliError::inconclusive(
                        "period_unknown",
                        reason,
                        json!({"certified": false, "reason": reason}),
                    ))
                }
            };
            return ok(result);
        }
        let bound = bound.or(self.ws.caps.norm_bound).unwrap_or(DEFAULT_NORM_BOUND);
        if bound <= 0 {
            return Err(CliError::validation("config", "--norm-bound must be positive"));
        }
        inputs["norm_bound"] = json!(bound);
        let rep = compute_periods(p, bound)?;
        let result = json!({
            "group": rep.group.to_json(),
            "survivors": rep.survivors,
            "unknown": rep.unknown.iter().map(|c| c[..p.dim()].to_vec()).collect::<Vec<_>>(),
            "invariant": rep.invariant,
        });
        if rep.unknown.is_empty() {
            ok(result)
        } else {
            Err(CliError::inconclusive("periods_unknown", "some candidate periods could not be certified", result))
        }
    }

    fn mld_check(&self, t: &Target, check_radius: i64, cap: Option<i64>, inputs: &mut Value) -> Result<Outcome, CliError> {
        let r = self.resolve(t, false, inputs)?;
        let cap = cap.or(self.ws.caps.inverse).unwrap_or(DEFAULT_INVERSE_CAP);
        if cap < 0 || check_radius < 0 {
            return Err(CliError::validation("config", "radii must be non-negative"));
        }
        inputs["check_radius"] = json!(check_radius);
        inputs["cap"] = json!(cap);
        let sub = subdivision_as_ld(&r.rule, &r.lang, check_radius)?;
        let dim = r.rule.dim();
        let surj = &sub.surjectivity;
        let subdivision = json!({
            "pair_letters": sub.pairs.len(),
            "table_size": sub.rule.len(),
            "surjectivity": {
                "radius": surj.radius,
                "checked": surj.checked,
                "holds": surj.holds(),
                "uncovered": surj.uncovered.len(),
            },
        });
        let domain = |rad: i64| inflated_language(&r.rule, &r.lang, &sub.pairs, rad);
        match find_inverse_rule(&sub.rule, &domain, cap)? {
            InverseResult::Found(g) => ok(json!({
                "subdivision": subdivision,
                "inverse": {"found": true, "radius": g.radius(), "table_size": g.len()},
            })),
            InverseResult::NoInverseUpToCap { cap, witness } => {
                let img = |p: &crate::patterns::Patch| -> Result<Value, CliError> {
                    let q = sub.rule.image_of_patch(p)?;
                    Ok(json!(render_values(r.rule.alphabet(), dim, q.shape().size(), q.values())))
                };
                let pairs = |p: &crate::patterns::Patch| p.to_json(&sub.pairs);
                let partial = json!({
                    "subdivision": subdivision,
                    "inverse": {
                        "found": false,
                        "cap": cap,
                        "witness": {
                            "inputs": [pairs(&witness.0), pairs(&witness.1)],
                            "image": img(&witness.0)?,
                        },
                    },
                });
                Err(CliError::inconclusive("no_inverse_up_to_cap", &format!("no local inverse up to radius {cap}"), partial))
            }
        }
    }
}
