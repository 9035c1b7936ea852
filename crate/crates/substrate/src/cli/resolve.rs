//! Resolving rule names, rule files and pattern descriptions given on the command line.

use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::BigRational;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::CliError;
use crate::geom::InflationRule;
use crate::patterns::{
    extract_patch, pattern_translate, HalfSpaces, LatticePattern, Letter, Patch, Periodic, Region, Shape,
};
use crate::subst::{fixed_points, validate_seed, Language, Mode, Rule, Seed, SubstError};

/// A rule named on the command line: symbolic, geometric, or both for names that exist as both.
pub struct RuleChoice {
    pub symbolic: Option<Arc<Rule>>,
    pub geometric: Option<InflationRule>,
    /// Echo for reports: the builtin name, or the path with a digest of the file.
    pub echo: Value,
}

impl RuleChoice {
    pub fn symbolic(&self) -> Result<&Arc<Rule>, CliError> {
        self.symbolic.as_ref().ok_or_else(|| {
            CliError::validation("geometric_only", "this command needs a symbolic rule; the rule is geometric only")
        })
    }

    pub fn geometric(&self) -> Result<&InflationRule, CliError> {
        self.geometric
            .as_ref()
            .ok_or_else(|| CliError::validation("not_geometric", "this command needs a geometric rule"))
    }
}

/// Builtin name, or a path to a symbolic or geometric rule file.
pub fn load_rule(spec: &str) -> Result<RuleChoice, CliError> {
    if Path::new(spec).is_file() {
        let text = std::fs::read_to_string(spec)
            .map_err(|e| CliError::validation("io", &format!("cannot read {spec}: {e}")))?;
        let digest = hex(&Sha256::digest(text.as_bytes()));
        let echo = json!({"file": spec, "sha256": digest});
        let value: toml::Value =
            toml::from_str(&text).map_err(|e| CliError::validation("config", &format!("{spec}: {e}")))?;
        if value.get("prototile").is_some() {
            let g = InflationRule::from_toml(&text).map_err(CliError::from)?;
            return Ok(RuleChoice { symbolic: None, geometric: Some(g), echo });
        }
        let r = Rule::from_toml(&text).map_err(CliError::from)?;
        return Ok(RuleChoice { symbolic: Some(Arc::new(r)), geometric: None, echo });
    }
    let symbolic = match Rule::builtin(spec) {
        Ok(r) => Some(r),
        Err(SubstError::GeometricOnly(_)) => None,
        Err(e) => {
            if InflationRule::builtin(spec).is_err() {
                return Err(e.into());
            }
            None
        }
    };
    let geometric = InflationRule::builtin(spec).ok();
    Ok(RuleChoice { symbolic, geometric, echo: json!({"builtin": spec}) })
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn letter(rule: &Rule, name: &str) -> Result<Letter, CliError> {
    rule.alphabet()
        .index(name)
        .ok_or_else(|| CliError::validation("unknown_letter", &format!("no letter {name:?} in rule {}", rule.name())))
}

fn int(s: &str) -> Result<i64, CliError> {
    s.trim().parse().map_err(|_| CliError::validation("malformed_pattern", &format!("not an integer: {s:?}")))
}

/// The two half-lines of the half-and-half boundary pattern, split between cells −1 and 0.
pub fn half_and_half_t(rule: &Rule) -> Result<LatticePattern, CliError> {
    let (w, b) = (letter(rule, "w")?, letter(rule, "b")?);
    let h = HalfSpaces::new(
        1,
        vec![
            Region { constraints: vec![([-1, 0], 1)], filler: Periodic::constant(1, w) },
            Region { constraints: vec![([1, 0], 0)], filler: Periodic::constant(1, b) },
        ],
    )?;
    Ok(LatticePattern::half_spaces(rule.alphabet_arc(), h))
}

fn named(rule: &Arc<Rule>, name: &str) -> Result<Option<LatticePattern>, CliError> {
    let a = rule.alphabet_arc();
    let p = match (rule.name(), name) {
        ("mask5", "P_A") => LatticePattern::periodic(a, Periodic::constant(1, letter(rule, "A")?)),
        ("mask5", "P_B") => LatticePattern::periodic(a, Periodic::word(&rule.alphabet().parse_word("C B B B C")?)?),
        ("mask5", "P_star") => {
            LatticePattern::substitutive(rule.clone(), 1, Seed::Interior { letter: letter(rule, "S1")?, offset: [2, 0] })
        }
        ("mask5", "T_star") => {
            let p = LatticePattern::substitutive(
                rule.clone(),
                1,
                Seed::Interior { letter: letter(rule, "S1")?, offset: [2, 0] },
            );
            pattern_translate(&p, &[BigRational::new((-1).into(), 2.into()), BigRational::from_integer(0.into())])
        }
        ("half_and_half", "T") => half_and_half_t(rule)?,
        ("half_and_half", "all_w") => LatticePattern::periodic(a, Periodic::constant(1, letter(rule, "w")?)),
        ("half_and_half", "all_b") => LatticePattern::periodic(a, Periodic::constant(1, letter(rule, "b")?)),
        _ => return Ok(None),
    };
    Ok(Some(p))
}

/// Parses `p/q` or `p/q,r/s`.
pub fn parse_vector(s: &str, dim: usize) -> Result<Vec<BigRational>, CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != dim {
        return Err(CliError::validation("malformed_vector", &format!("{s:?} needs {dim} entries")));
    }
    parts
        .iter()
        .map(|x| {
            BigRational::from_str(x.trim())
                .map_err(|_| CliError::validation("malformed_vector", &format!("not a rational: {x:?}")))
        })
        .collect()
}

/// Pattern descriptions:
/// a builtin name (`P_A`, `P_B`, `P_star`, `T_star` for mask5; `T`, `all_w`, `all_b` for
/// half-and-half), `const:X`, `periodic:WORD`, `interior:X@j` or `interior:X@j,k`,
/// `corner:a.b` or `corner:a,b,c,d`, or `fixed:i` (the `i`-th fixed point of `σ` or `σ²`).
pub fn resolve_pattern(rule: &Arc<Rule>, spec: &str, seed_power: u32, shift: Option<&str>) -> Result<LatticePattern, CliError> {
    let dim = rule.dim();
    let bad = |m: &str| CliError::validation("malformed_pattern", m);
    let p = if let Some(p) = named(rule, spec)? {
        p
    } else {
        let (kind, body) = spec.split_once(':').ok_or_else(|| bad(&format!("unknown pattern {spec:?}")))?;
        match kind {
            "const" => LatticePattern::periodic(rule.alphabet_arc(), Periodic::constant(dim, letter(rule, body)?)),
            "periodic" => {
                if dim != 1 {
                    return Err(bad("periodic words are 1-D"));
                }
                let w = rule.alphabet().parse_word(&body.replace('.', " "))?;
                LatticePattern::periodic(rule.alphabet_arc(), Periodic::word(&w)?)
            }
            "interior" => {
                let (l, at) = body.split_once('@').ok_or_else(|| bad("interior seeds look like X@j"))?;
                let coords: Vec<i64> = at.split(',').map(int).collect::<Result<_, _>>()?;
                if coords.len() != dim {
                    return Err(bad(&format!("interior offsets need {dim} coordinates")));
                }
                let offset = [coords[0], if dim == 2 { coords[1] } else { 0 }];
                let seed = Seed::Interior { letter: letter(rule, l)?, offset };
                validate_seed(rule, &seed, seed_power)?;
                LatticePattern::substitutive(rule.clone(), seed_power, seed)
            }
            "corner" => {
                let sep = if body.contains(',') { ',' } else { '.' };
                let letters: Vec<Letter> = body.split(sep).map(|l| letter(rule, l.trim())).collect::<Result<_, _>>()?;
                let seed = Seed::Corner { letters };
                validate_seed(rule, &seed, seed_power)?;
                LatticePattern::substitutive(rule.clone(), seed_power, seed)
            }
            "fixed" => {
                let i: usize = body.trim().parse().map_err(|_| bad("fixed:i needs an index"))?;
                let fps = fixed_points(rule, 2)?;
                let fp = fps.get(i).ok_or_else(|| bad(&format!("only {} fixed points", fps.len())))?;
                fp.pattern(rule)
            }
            _ => return Err(bad(&format!("unknown pattern kind {kind:?}"))),
        }
    };
    match shift {
        None => Ok(p),
        Some(s) => Ok(pattern_translate(&p, &pad(parse_vector(s, dim)?))),
    }
}

fn pad(mut v: Vec<BigRational>) -> Vec<BigRational> {
    while v.len() < 2 {
        v.push(BigRational::from_integer(0.into()));
    }
    v
}

/// Radius of the window inspected by the `auto` mode.
const AUTO_WINDOW: i64 = 8;

/// `admitted`, `hull` (of the pattern) or `auto`: the admitted language when the central
/// window of the pattern is admitted, otherwise the hull of the pattern.
pub fn resolve_mode(rule: &Arc<Rule>, mode: &str, pattern: Option<&LatticePattern>) -> Result<(Mode, &'static str), CliError> {
    match (mode, pattern) {
        ("admitted", _) | ("auto", None) => Ok((Mode::Admitted, "admitted")),
        ("hull", Some(p)) => Ok((Mode::Hull(p.clone()), "hull")),
        ("hull", None) => Err(CliError::validation("config", "hull mode needs --pattern")),
        ("auto", Some(p)) => {
            let r = if p.dim() == 1 { AUTO_WINDOW } else { AUTO_WINDOW / 2 };
            let w = extract_patch(p, [0, 0], Shape::radius(r, p.dim()));
            let normal = Patch::new(Shape::sized(p.dim(), w.shape().size()), [0, 0], w.values().to_vec())?;
            if Language::admitted(rule.clone()).contains(&normal)? {
                Ok((Mode::Admitted, "admitted"))
            } else {
                Ok((Mode::Hull(p.clone()), "hull"))
            }
        }
        (other, _) => Err(CliError::validation("config", &format!("unknown mode {other:?}"))),
    }
}
