//! Declarative experiment configuration: a flat key-value text format with
//! sections, chosen over positional flags so experiments are archivable.
//! Complex numbers are written `re+imj`. Parsing validates everything and
//! reports every problem at once; unknown keys get an edit-distance
//! suggestion.

use crate::dynamics::{PairCadence, Representation};
use crate::gates::validate_kinetic;
use crate::lattice::LatticeMode;
use crate::state::Statistics;
use crate::C64;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    RunBrick,
    RunQlga,
    Dispersion,
    Converge,
    OracleCheck,
    GateCount,
    MInverse,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::RunBrick => "run-brick",
            ExperimentKind::RunQlga => "run-qlga",
            ExperimentKind::Dispersion => "dispersion",
            ExperimentKind::Converge => "converge",
            ExperimentKind::OracleCheck => "oracle-check",
            ExperimentKind::GateCount => "gate-count",
            ExperimentKind::MInverse => "m-inverse",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "run-brick" => Some(ExperimentKind::RunBrick),
            "run-qlga" => Some(ExperimentKind::RunQlga),
            "dispersion" => Some(ExperimentKind::Dispersion),
            "converge" => Some(ExperimentKind::Converge),
            "oracle-check" => Some(ExperimentKind::OracleCheck),
            "gate-count" => Some(ExperimentKind::GateCount),
            "m-inverse" => Some(ExperimentKind::MInverse),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSection {
    pub d: usize,
    pub l: usize,
    pub epsilon: f64,
    pub mode: LatticeMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KineticSection {
    pub a: C64,
    pub b: C64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollisionSection {
    pub mu: C64,
    pub nu: C64,
    pub lambda: C64,
    pub phi_onsite: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    Occupied,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSection {
    pub statistics: Statistics,
    pub representation: Representation,
    pub t_steps: usize,
    pub record_every: usize,
    pub pair_cadence: PairCadence,
    pub init: InitKind,
    pub occupied: Vec<u32>,
    pub x0: f64,
    pub sigma: f64,
    pub k0: f64,
    pub snapshot: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            statistics: Statistics::HardBoson,
            representation: Representation::Sector,
            t_steps: 0,
            record_every: 1,
            pair_cadence: PairCadence::PerPass,
            init: InitKind::Occupied,
            occupied: Vec::new(),
            x0: 0.0,
            sigma: 1.0,
            k0: 0.0,
            snapshot: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExternalKind {
    None,
    Constant,
    CosineWell,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    None,
    Distance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSection {
    pub external: ExternalKind,
    pub u0: f64,
    pub center: f64,
    pub table: Vec<f64>,
    pub pair: PairKind,
    pub pair_values: Vec<f64>,
}

impl Default for PotentialSection {
    fn default() -> Self {
        PotentialSection {
            external: ExternalKind::None,
            u0: 0.0,
            center: 0.0,
            table: Vec::new(),
            pair: PairKind::None,
            pair_values: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionSection {
    pub k_list: Vec<i64>,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergeSection {
    pub levels: usize,
    pub base_l: usize,
    pub domain: f64,
    pub time: f64,
    pub x0: f64,
    pub sigma: f64,
    pub k0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateCountSection {
    pub n_particles: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MInverseSection {
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToleranceSection {
    pub norm: f64,
}

/// A fully parsed and validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub lattice: LatticeSection,
    pub kinetic: Option<KineticSection>,
    pub collision: Option<CollisionSection>,
    pub run: Option<RunSection>,
    pub potential: Option<PotentialSection>,
    pub dispersion: Option<DispersionSection>,
    pub converge: Option<ConvergeSection>,
    pub gatecount: Option<GateCountSection>,
    pub minverse: Option<MInverseSection>,
    pub tolerance: Option<ToleranceSection>,
}

const SECTIONS: &[&str] = &[
    "experiment",
    "lattice",
    "kinetic",
    "collision",
    "run",
    "potential",
    "dispersion",
    "converge",
    "gatecount",
    "minverse",
    "tolerance",
];

fn known_keys(section: &str) -> &'static [&'static str] {
    match section {
        "experiment" => &["kind", "seed"],
        "lattice" => &["d", "l", "epsilon", "mode"],
        "kinetic" => &["a", "b", "phi"],
        "collision" => &["mu", "nu", "lambda", "phi_onsite"],
        "run" => &[
            "statistics",
            "representation",
            "t_steps",
            "record_every",
            "pair_cadence",
            "init",
            "occupied",
            "x0",
            "sigma",
            "k0",
            "snapshot",
        ],
        "potential" => &["external", "u0", "center", "table", "pair", "pair_values"],
        "dispersion" => &["k_list", "steps"],
        "converge" => &["levels", "base_l", "domain", "time", "x0", "sigma", "k0"],
        "gatecount" => &["n_particles"],
        "minverse" => &["threshold"],
        "tolerance" => &["norm"],
        _ => &[],
    }
}

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let cost = if ca == cb { 0 } else { 1 };
            cur[j + 1] = (prev[j] + cost).min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn suggest(word: &str, candidates: &'static [&'static str]) -> Option<&'static str> {
    candidates
        .iter()
        .map(|&c| (levenshtein(word, c), c))
        .filter(|&(d, _)| d <= 2)
        .min_by_key(|&(d, _)| d)
        .map(|(_, c)| c)
}

/// Parse `re+imj` / `re-imj`; a bare real is accepted as well.
pub fn parse_complex(s: &str) -> Option<C64> {
    let s = s.trim();
    if let Some(stripped) = s.strip_suffix('j') {
        let bytes = stripped.as_bytes();
        // split at the last +/- that is neither leading nor an exponent sign
        let mut split = None;
        for i in (1..bytes.len()).rev() {
            let ch = bytes[i] as char;
            if (ch == '+' || ch == '-') && !matches!(bytes[i - 1] as char, 'e' | 'E') {
                split = Some(i);
                break;
            }
        }
        let i = split?;
        let re: f64 = stripped[..i].parse().ok()?;
        let sign = if bytes[i] as char == '-' { -1.0 } else { 1.0 };
        let im_str = &stripped[i + 1..];
        let im: f64 = if im_str.is_empty() {
            1.0
        } else {
            im_str.parse().ok()?
        };
        Some(C64::new(re, sign * im))
    } else {
        let re: f64 = s.parse().ok()?;
        Some(C64::new(re, 0.0))
    }
}

/// Canonical rendering of a complex number, inverse of [`parse_complex`].
pub fn render_complex(z: C64) -> String {
    if z.im >= 0.0 || z.im.is_nan() {
        format!("{}+{}j", render_f64(z.re), render_f64(z.im))
    } else {
        format!("{}-{}j", render_f64(z.re), render_f64(-z.im))
    }
}

/// 17 significant digits: round trips through parse exactly.
pub fn render_f64(x: f64) -> String {
    format!("{x:.16e}")
}

struct RawSection {
    line: usize,
    entries: Vec<(usize, String, String)>,
}

struct Parser {
    sections: BTreeMap<String, RawSection>,
    errors: Vec<ConfigError>,
}

impl Parser {
    fn err(&mut self, line: Option<usize>, message: impl Into<String>) {
        self.errors.push(ConfigError {
            line,
            message: message.into(),
        });
    }

    fn section(&self, name: &str) -> Option<&RawSection> {
        self.sections.get(name)
    }

    fn get(&self, section: &str, key: &str) -> Option<(usize, String)> {
        self.section(section).and_then(|s| {
            s.entries
                .iter()
                .find(|(_, k, _)| k == key)
                .map(|(line, _, v)| (*line, v.clone()))
        })
    }

    fn required(&mut self, section: &str, key: &str) -> Option<(usize, String)> {
        match self.get(section, key) {
            Some(found) => Some(found),
            None => {
                let line = self.section(section).map(|s| s.line);
                self.err(line, format!("[{section}] is missing required key `{key}`"));
                None
            }
        }
    }

    fn parse_with<T>(
        &mut self,
        section: &str,
        key: &str,
        what: &str,
        f: impl Fn(&str) -> Option<T>,
    ) -> Option<T> {
        let (line, v) = self.required(section, key)?;
        match f(&v) {
            Some(x) => Some(x),
            None => {
                self.err(
                    Some(line),
                    format!("[{section}] {key} = `{v}` is not a valid {what}"),
                );
                None
            }
        }
    }

    fn parse_opt<T>(
        &mut self,
        section: &str,
        key: &str,
        what: &str,
        default: T,
        f: impl Fn(&str) -> Option<T>,
    ) -> T {
        match self.get(section, key) {
            None => default,
            Some((line, v)) => match f(&v) {
                Some(x) => x,
                None => {
                    self.err(
                        Some(line),
                        format!("[{section}] {key} = `{v}` is not a valid {what}"),
                    );
                    default
                }
            },
        }
    }
}

fn parse_usize(s: &str) -> Option<usize> {
    s.parse().ok()
}

fn parse_f64(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

fn parse_f64_list(s: &str) -> Option<Vec<f64>> {
    s.split_whitespace()
        .map(|t| t.parse::<f64>().ok().filter(|x| x.is_finite()))
        .collect()
}

fn tokenize(text: &str) -> (BTreeMap<String, RawSection>, Vec<ConfigError>) {
    let mut sections: BTreeMap<String, RawSection> = BTreeMap::new();
    let mut errors = Vec::new();
    let mut current: Option<String> = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim().to_string();
            if !SECTIONS.contains(&name.as_str()) {
                let hint = suggest(&name, SECTIONS)
                    .map(|s| format!(" (did you mean `[{s}]`?)"))
                    .unwrap_or_default();
                errors.push(ConfigError {
                    line: Some(line_no),
                    message: format!("unknown section `[{name}]`{hint}"),
                });
                current = None;
                continue;
            }
            if sections.contains_key(&name) {
                errors.push(ConfigError {
                    line: Some(line_no),
                    message: format!("duplicate section `[{name}]`"),
                });
            }
            sections.entry(name.clone()).or_insert(RawSection {
                line: line_no,
                entries: Vec::new(),
            });
            current = Some(name);
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            errors.push(ConfigError {
                line: Some(line_no),
                message: format!("expected `key = value`, got `{line}`"),
            });
            continue;
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        let Some(section) = &current else {
            errors.push(ConfigError {
                line: Some(line_no),
                message: format!("key `{key}` appears before any [section] header"),
            });
            continue;
        };
        let keys = known_keys(section);
        if !keys.contains(&key.as_str()) {
            let hint = suggest(&key, keys)
                .map(|s| format!(" (did you mean `{s}`?)"))
                .unwrap_or_default();
            errors.push(ConfigError {
                line: Some(line_no),
                message: format!("unknown key `{key}` in [{section}]{hint}"),
            });
            continue;
        }
        let raw = sections.get_mut(section).unwrap();
        if raw.entries.iter().any(|(_, k, _)| *k == key) {
            errors.push(ConfigError {
                line: Some(line_no),
                message: format!("duplicate key `{key}` in [{section}]"),
            });
            continue;
        }
        raw.entries.push((line_no, key, value));
    }
    (sections, errors)
}

/// Parse and validate a config. All detected problems are returned, not
/// just the first.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, Vec<ConfigError>> {
    let (sections, errors) = tokenize(text);
    let mut p = Parser { sections, errors };

    if p.section("experiment").is_none() {
        p.err(None, "missing required section [experiment]");
    }
    if p.section("lattice").is_none() {
        p.err(None, "missing required section [lattice]");
    }

    let kind = p.parse_with(
        "experiment",
        "kind",
        "experiment kind",
        ExperimentKind::parse,
    );
    let seed = p.parse_opt("experiment", "seed", "unsigned integer", 0u64, |s| {
        s.parse().ok()
    });

    let d = p.parse_with("lattice", "d", "positive integer", parse_usize);
    let l = p.parse_with("lattice", "l", "positive integer", parse_usize);
    let epsilon = p.parse_with("lattice", "epsilon", "positive real", parse_f64);
    let mode = p.parse_with(
        "lattice",
        "mode",
        "lattice mode (brick1d | qlga)",
        |s| match s {
            "brick1d" => Some(LatticeMode::Brick1d),
            "qlga" => Some(LatticeMode::Qlga),
            _ => None,
        },
    );

    let kinetic = if p.section("kinetic").is_some() {
        let a = p.parse_with("kinetic", "a", "complex number (re+imj)", parse_complex);
        let b = p.parse_with("kinetic", "b", "complex number (re+imj)", parse_complex);
        let phi = p.parse_opt("kinetic", "phi", "real number", 0.0, parse_f64);
        if let (Some(a), Some(b)) = (a, b) {
            let line = p.section("kinetic").map(|s| s.line);
            let diag = validate_kinetic(a, b);
            if diag.norm_residual > crate::TOL_ALGEBRAIC {
                p.err(
                    line,
                    format!(
                        "kinetic amplitudes violate |a|^2 + |b|^2 = 1 (residual {:.3e})",
                        diag.norm_residual
                    ),
                );
            }
            if diag.orthogonality_residual > crate::TOL_ALGEBRAIC {
                p.err(
                    line,
                    format!(
                        "kinetic amplitudes violate a*conj(b) + conj(a)*b = 0 (residual {:.3e})",
                        diag.orthogonality_residual
                    ),
                );
            }
            Some(KineticSection { a, b, phi })
        } else {
            None
        }
    } else {
        None
    };

    let collision = if p.section("collision").is_some() {
        let mu = p.parse_with("collision", "mu", "complex number (re+imj)", parse_complex);
        let nu = p.parse_with("collision", "nu", "complex number (re+imj)", parse_complex);
        let lambda = p.parse_with(
            "collision",
            "lambda",
            "complex number (re+imj)",
            parse_complex,
        );
        let phi_onsite = p.parse_opt("collision", "phi_onsite", "real number", 0.0, parse_f64);
        if let (Some(mu), Some(nu), Some(lambda)) = (mu, nu, lambda) {
            let line = p.section("collision").map(|s| s.line);
            for (name, z) in [("mu", mu), ("nu", nu), ("lambda", lambda)] {
                if (z.norm() - 1.0).abs() > crate::TOL_ALGEBRAIC {
                    p.err(
                        line,
                        format!(
                            "collision eigenvalue {name} must be unimodular, |{name}| = {}",
                            z.norm()
                        ),
                    );
                }
            }
            Some(CollisionSection {
                mu,
                nu,
                lambda,
                phi_onsite,
            })
        } else {
            None
        }
    } else {
        None
    };

    let run = if p.section("run").is_some() {
        let defaults = RunSection::default();
        let statistics = p.parse_opt(
            "run",
            "statistics",
            "statistics (hard-boson | fermion)",
            defaults.statistics,
            |s| match s {
                "hard-boson" => Some(Statistics::HardBoson),
                "fermion" => Some(Statistics::Fermion),
                _ => None,
            },
        );
        let representation = p.parse_opt(
            "run",
            "representation",
            "representation (sector | dense)",
            defaults.representation,
            |s| match s {
                "sector" => Some(Representation::Sector),
                "dense" => Some(Representation::Dense),
                _ => None,
            },
        );
        let t_steps = p.parse_opt("run", "t_steps", "unsigned integer", 0, parse_usize);
        let record_every = p.parse_opt("run", "record_every", "positive integer", 1, |s| {
            parse_usize(s).filter(|&x| x > 0)
        });
        let pair_cadence = p.parse_opt(
            "run",
            "pair_cadence",
            "cadence (per-pass | per-double-step)",
            defaults.pair_cadence,
            |s| match s {
                "per-pass" => Some(PairCadence::PerPass),
                "per-double-step" => Some(PairCadence::PerDoubleStep),
                _ => None,
            },
        );
        let init = p.parse_opt(
            "run",
            "init",
            "initial state (occupied | gaussian)",
            defaults.init,
            |s| match s {
                "occupied" => Some(InitKind::Occupied),
                "gaussian" => Some(InitKind::Gaussian),
                _ => None,
            },
        );
        let occupied = p.parse_opt(
            "run",
            "occupied",
            "list of q-bit indices",
            Vec::new(),
            |s| {
                s.split_whitespace()
                    .map(|t| t.parse::<u32>().ok())
                    .collect()
            },
        );
        let x0 = p.parse_opt("run", "x0", "real number", defaults.x0, parse_f64);
        let sigma = p.parse_opt("run", "sigma", "positive real", defaults.sigma, |s| {
            parse_f64(s).filter(|&x| x > 0.0)
        });
        let k0 = p.parse_opt("run", "k0", "real number", defaults.k0, parse_f64);
        let snapshot = p.parse_opt("run", "snapshot", "bool (true | false)", false, parse_bool);
        if init == InitKind::Occupied && p.get("run", "occupied").is_none() {
            let line = p.section("run").map(|s| s.line);
            p.err(line, "[run] init = occupied requires the `occupied` key");
        }
        Some(RunSection {
            statistics,
            representation,
            t_steps,
            record_every,
            pair_cadence,
            init,
            occupied,
            x0,
            sigma,
            k0,
            snapshot,
        })
    } else {
        None
    };

    let potential = if p.section("potential").is_some() {
        let defaults = PotentialSection::default();
        let external = p.parse_opt(
            "potential",
            "external",
            "external kind (none | constant | cosine-well | table)",
            defaults.external,
            |s| match s {
                "none" => Some(ExternalKind::None),
                "constant" => Some(ExternalKind::Constant),
                "cosine-well" => Some(ExternalKind::CosineWell),
                "table" => Some(ExternalKind::Table),
                _ => None,
            },
        );
        let u0 = p.parse_opt("potential", "u0", "real number", 0.0, parse_f64);
        let center = p.parse_opt("potential", "center", "real number", 0.0, parse_f64);
        let table = p.parse_opt(
            "potential",
            "table",
            "list of real numbers",
            Vec::new(),
            parse_f64_list,
        );
        let pair = p.parse_opt(
            "potential",
            "pair",
            "pair kind (none | distance)",
            defaults.pair,
            |s| match s {
                "none" => Some(PairKind::None),
                "distance" => Some(PairKind::Distance),
                _ => None,
            },
        );
        let pair_values = p.parse_opt(
            "potential",
            "pair_values",
            "list of real numbers",
            Vec::new(),
            parse_f64_list,
        );
        let line = p.section("potential").map(|s| s.line);
        if external == ExternalKind::Table && table.is_empty() {
            p.err(
                line,
                "[potential] external = table requires the `table` key",
            );
        }
        if pair == PairKind::Distance && pair_values.is_empty() {
            p.err(
                line,
                "[potential] pair = distance requires the `pair_values` key",
            );
        }
        Some(PotentialSection {
            external,
            u0,
            center,
            table,
            pair,
            pair_values,
        })
    } else {
        None
    };

    let dispersion = if p.section("dispersion").is_some() {
        let k_list = p.parse_with("dispersion", "k_list", "non-empty list of integers", |s| {
            let v: Option<Vec<i64>> = s.split_whitespace().map(|t| t.parse().ok()).collect();
            v.filter(|v| !v.is_empty())
        });
        let steps = p.parse_opt("dispersion", "steps", "positive integer", 4, |s| {
            parse_usize(s).filter(|&x| x > 0)
        });
        k_list.map(|k_list| DispersionSection { k_list, steps })
    } else {
        None
    };

    let converge = if p.section("converge").is_some() {
        let levels = p.parse_opt("converge", "levels", "integer >= 2", 3, |s| {
            parse_usize(s).filter(|&x| x >= 2)
        });
        let base_l = p.parse_with("converge", "base_l", "even integer >= 4", |s| {
            parse_usize(s).filter(|&x| x >= 4 && x % 2 == 0)
        });
        let domain = p.parse_with("converge", "domain", "positive real", |s| {
            parse_f64(s).filter(|&x| x > 0.0)
        });
        let time = p.parse_with("converge", "time", "positive real", |s| {
            parse_f64(s).filter(|&x| x > 0.0)
        });
        let x0 = p.parse_opt("converge", "x0", "real number", 0.0, parse_f64);
        let sigma = p.parse_opt("converge", "sigma", "positive real", 1.0, |s| {
            parse_f64(s).filter(|&x| x > 0.0)
        });
        let k0 = p.parse_opt("converge", "k0", "real number", 0.0, parse_f64);
        match (base_l, domain, time) {
            (Some(base_l), Some(domain), Some(time)) => Some(ConvergeSection {
                levels,
                base_l,
                domain,
                time,
                x0,
                sigma,
                k0,
            }),
            _ => None,
        }
    } else {
        None
    };

    let gatecount = p.section("gatecount").is_some().then(|| GateCountSection {
        n_particles: p.parse_opt("gatecount", "n_particles", "positive integer", 1, |s| {
            parse_usize(s).filter(|&x| x > 0)
        }),
    });

    let minverse = p.section("minverse").is_some().then(|| MInverseSection {
        threshold: p.parse_opt("minverse", "threshold", "positive real", 1e-10, |s| {
            parse_f64(s).filter(|&x| x > 0.0)
        }),
    });

    let tolerance = p.section("tolerance").is_some().then(|| ToleranceSection {
        norm: p.parse_opt(
            "tolerance",
            "norm",
            "positive real",
            crate::TOL_DRIFT,
            |s| parse_f64(s).filter(|&x| x > 0.0),
        ),
    });

    // cross-section requirements per experiment kind
    if let (Some(kind), Some(mode)) = (kind, mode) {
        let need = |p: &mut Parser, present: bool, section: &str| {
            if !present {
                p.err(
                    None,
                    format!(
                        "experiment kind `{}` requires section [{section}]",
                        kind.as_str()
                    ),
                );
            }
        };
        match kind {
            ExperimentKind::RunBrick => {
                need(&mut p, kinetic.is_some(), "kinetic");
                need(&mut p, run.is_some(), "run");
                if mode != LatticeMode::Brick1d {
                    p.err(None, "run-brick requires lattice mode brick1d");
                }
            }
            ExperimentKind::RunQlga => {
                need(&mut p, collision.is_some(), "collision");
                need(&mut p, run.is_some(), "run");
                if mode != LatticeMode::Qlga {
                    p.err(None, "run-qlga requires lattice mode qlga");
                }
            }
            ExperimentKind::Dispersion => {
                need(&mut p, dispersion.is_some(), "dispersion");
                match mode {
                    LatticeMode::Brick1d => need(&mut p, kinetic.is_some(), "kinetic"),
                    LatticeMode::Qlga => need(&mut p, collision.is_some(), "collision"),
                }
            }
            ExperimentKind::Converge => {
                need(&mut p, kinetic.is_some(), "kinetic");
                need(&mut p, converge.is_some(), "converge");
                if mode != LatticeMode::Brick1d {
                    p.err(None, "converge requires lattice mode brick1d");
                }
            }
            ExperimentKind::OracleCheck => {
                need(&mut p, run.is_some(), "run");
                match mode {
                    LatticeMode::Brick1d => need(&mut p, kinetic.is_some(), "kinetic"),
                    LatticeMode::Qlga => need(&mut p, collision.is_some(), "collision"),
                }
            }
            ExperimentKind::GateCount => {}
            ExperimentKind::MInverse => {
                need(&mut p, kinetic.is_some(), "kinetic");
            }
        }
    }

    // lattice-level validation through the real constructor
    if let (Some(d), Some(l), Some(epsilon), Some(mode)) = (d, l, epsilon, mode) {
        let lattice_line = p.section("lattice").map(|s| s.line);
        if let Err(e) = crate::lattice::build_lattice(d, l, epsilon, mode) {
            p.err(lattice_line, e.to_string());
        } else if let Some(pot) = &potential {
            let sites = l.pow(d as u32);
            if pot.external == ExternalKind::Table && pot.table.len() != sites {
                let line = p.section("potential").map(|s| s.line);
                p.err(
                    line,
                    format!(
                        "[potential] table has {} values but the lattice has {sites} sites",
                        pot.table.len()
                    ),
                );
            }
        }
    }

    if !p.errors.is_empty() {
        return Err(p.errors);
    }
    Ok(ExperimentConfig {
        kind: kind.unwrap(),
        seed,
        lattice: LatticeSection {
            d: d.unwrap(),
            l: l.unwrap(),
            epsilon: epsilon.unwrap(),
            mode: mode.unwrap(),
        },
        kinetic,
        collision,
        run,
        potential,
        dispersion,
        converge,
        gatecount,
        minverse,
        tolerance,
    })
}

/// Canonical text form; `parse_config(render_config(c)) == c`.
pub fn render_config(c: &ExperimentConfig) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    writeln!(out, "[experiment]").unwrap();
    writeln!(out, "kind = {}", c.kind.as_str()).unwrap();
    writeln!(out, "seed = {}", c.seed).unwrap();
    writeln!(out, "[lattice]").unwrap();
    writeln!(out, "d = {}", c.lattice.d).unwrap();
    writeln!(out, "l = {}", c.lattice.l).unwrap();
    writeln!(out, "epsilon = {}", render_f64(c.lattice.epsilon)).unwrap();
    let mode = match c.lattice.mode {
        LatticeMode::Brick1d => "brick1d",
        LatticeMode::Qlga => "qlga",
    };
    writeln!(out, "mode = {mode}").unwrap();
    if let Some(k) = &c.kinetic {
        writeln!(out, "[kinetic]").unwrap();
        writeln!(out, "a = {}", render_complex(k.a)).unwrap();
        writeln!(out, "b = {}", render_complex(k.b)).unwrap();
        writeln!(out, "phi = {}", render_f64(k.phi)).unwrap();
    }
    if let Some(col) = &c.collision {
        writeln!(out, "[collision]").unwrap();
        writeln!(out, "mu = {}", render_complex(col.mu)).unwrap();
        writeln!(out, "nu = {}", render_complex(col.nu)).unwrap();
        writeln!(out, "lambda = {}", render_complex(col.lambda)).unwrap();
        writeln!(out, "phi_onsite = {}", render_f64(col.phi_onsite)).unwrap();
    }
    if let Some(r) = &c.run {
        writeln!(out, "[run]").unwrap();
        let stats = match r.statistics {
            Statistics::HardBoson => "hard-boson",
            Statistics::Fermion => "fermion",
        };
        writeln!(out, "statistics = {stats}").unwrap();
        let rep = match r.representation {
            Representation::Sector => "sector",
            Representation::Dense => "dense",
        };
        writeln!(out, "representation = {rep}").unwrap();
        writeln!(out, "t_steps = {}", r.t_steps).unwrap();
        writeln!(out, "record_every = {}", r.record_every).unwrap();
        let cadence = match r.pair_cadence {
            PairCadence::PerPass => "per-pass",
            PairCadence::PerDoubleStep => "per-double-step",
        };
        writeln!(out, "pair_cadence = {cadence}").unwrap();
        match r.init {
            InitKind::Occupied => {
                writeln!(out, "init = occupied").unwrap();
                let occ: Vec<String> = r.occupied.iter().map(|q| q.to_string()).collect();
                writeln!(out, "occupied = {}", occ.join(" ")).unwrap();
            }
            InitKind::Gaussian => {
                writeln!(out, "init = gaussian").unwrap();
            }
        }
        writeln!(out, "x0 = {}", render_f64(r.x0)).unwrap();
        writeln!(out, "sigma = {}", render_f64(r.sigma)).unwrap();
        writeln!(out, "k0 = {}", render_f64(r.k0)).unwrap();
        writeln!(out, "snapshot = {}", r.snapshot).unwrap();
    }
    if let Some(pot) = &c.potential {
        writeln!(out, "[potential]").unwrap();
        let ext = match pot.external {
            ExternalKind::None => "none",
            ExternalKind::Constant => "constant",
            ExternalKind::CosineWell => "cosine-well",
            ExternalKind::Table => "table",
        };
        writeln!(out, "external = {ext}").unwrap();
        writeln!(out, "u0 = {}", render_f64(pot.u0)).unwrap();
        writeln!(out, "center = {}", render_f64(pot.center)).unwrap();
        if !pot.table.is_empty() {
            let vals: Vec<String> = pot.table.iter().map(|&v| render_f64(v)).collect();
            writeln!(out, "table = {}", vals.join(" ")).unwrap();
        }
        let pair = match pot.pair {
            PairKind::None => "none",
            PairKind::Distance => "distance",
        };
        writeln!(out, "pair = {pair}").unwrap();
        if !pot.pair_values.is_empty() {
            let vals: Vec<String> = pot.pair_values.iter().map(|&v| render_f64(v)).collect();
            writeln!(out, "pair_values = {}", vals.join(" ")).unwrap();
        }
    }
    if let Some(disp) = &c.dispersion {
        writeln!(out, "[dispersion]").unwrap();
        let ks: Vec<String> = disp.k_list.iter().map(|k| k.to_string()).collect();
        writeln!(out, "k_list = {}", ks.join(" ")).unwrap();
        writeln!(out, "steps = {}", disp.steps).unwrap();
    }
    if let Some(conv) = &c.converge {
        writeln!(out, "[converge]").unwrap();
        writeln!(out, "levels = {}", conv.levels).unwrap();
        writeln!(out, "base_l = {}", conv.base_l).unwrap();
        writeln!(out, "domain = {}", render_f64(conv.domain)).unwrap();
        writeln!(out, "time = {}", render_f64(conv.time)).unwrap();
        writeln!(out, "x0 = {}", render_f64(conv.x0)).unwrap();
        writeln!(out, "sigma = {}", render_f64(conv.sigma)).unwrap();
        writeln!(out, "k0 = {}", render_f64(conv.k0)).unwrap();
    }
    if let Some(gc) = &c.gatecount {
        writeln!(out, "[gatecount]").unwrap();
        writeln!(out, "n_particles = {}", gc.n_particles).unwrap();
    }
    if let Some(mi) = &c.minverse {
        writeln!(out, "[minverse]").unwrap();
        writeln!(out, "threshold = {}", render_f64(mi.threshold)).unwrap();
    }
    if let Some(tol) = &c.tolerance {
        writeln!(out, "[tolerance]").unwrap();
        writeln!(out, "norm = {}", render_f64(tol.norm)).unwrap();
    }
    out
}
