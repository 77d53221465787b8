//! Config documents: `[section]` headers followed by `key = value` lines.
//! Comments start with `#`. Physical values need a unit suffix and are
//! normalized to SI; frequencies stay in Hz (ordinary, not angular).
//!
//! Every key is checked against [`schema`] while parsing, so a document that
//! parses is free of unknown keys, missing units and out-of-range numbers.

use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigErrorKind {
    Schema,
    Unit,
    Range,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub kind: ConfigErrorKind,
    pub message: String,
    pub location: Option<Location>,
}

impl ConfigError {
    fn at(kind: ConfigErrorKind, line: usize, column: usize, message: impl Into<String>) -> Self {
        ConfigError { kind, message: message.into(), location: Some(Location { line, column }) }
    }

    pub fn schema(message: impl Into<String>, location: Option<Location>) -> Self {
        ConfigError { kind: ConfigErrorKind::Schema, message: message.into(), location }
    }

    pub fn code(&self) -> &'static str {
        match self.kind {
            ConfigErrorKind::Schema => "SchemaError",
            ConfigErrorKind::Unit => "UnitError",
            ConfigErrorKind::Range => "RangeError",
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.location {
            Some(l) => write!(f, "{} at {}:{}: {}", self.code(), l.line, l.column, self.message),
            None => write!(f, "{}: {}", self.code(), self.message),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Inductance,
    Capacitance,
    Frequency,
    Time,
    Resistance,
}

impl Quantity {
    fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Quantity::Inductance => &[("H", 1.0), ("mH", 1e-3), ("uH", 1e-6), ("µH", 1e-6), ("nH", 1e-9), ("pH", 1e-12)],
            Quantity::Capacitance => &[
                ("F", 1.0),
                ("uF", 1e-6),
                ("µF", 1e-6),
                ("nF", 1e-9),
                ("pF", 1e-12),
                ("fF", 1e-15),
                ("aF", 1e-18),
            ],
            Quantity::Frequency => &[("Hz", 1.0), ("kHz", 1e3), ("MHz", 1e6), ("GHz", 1e9), ("THz", 1e12)],
            Quantity::Time => &[("s", 1.0), ("ms", 1e-3), ("us", 1e-6), ("µs", 1e-6), ("ns", 1e-9), ("ps", 1e-12)],
            Quantity::Resistance => &[("Ohm", 1.0), ("ohm", 1.0), ("Ω", 1.0), ("kOhm", 1e3), ("kΩ", 1e3)],
        }
    }

    fn example(self) -> &'static str {
        match self {
            Quantity::Inductance => "1.9nH",
            Quantity::Capacitance => "253fF",
            Quantity::Frequency => "6.621GHz",
            Quantity::Time => "344ns",
            Quantity::Resistance => "50Ohm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Any,
    Positive,
    NonNegative,
    /// 0 ≤ x < 1
    Fraction,
    /// 0 ≤ x ≤ 1
    Probability,
    /// |x| < 1, x ≠ 0
    Dimerization,
}

impl Bound {
    fn check(self, x: f64) -> Result<(), &'static str> {
        let ok = x.is_finite()
            && match self {
                Bound::Any => true,
                Bound::Positive => x > 0.0,
                Bound::NonNegative => x >= 0.0,
                Bound::Fraction => (0.0..1.0).contains(&x),
                Bound::Probability => (0.0..=1.0).contains(&x),
                Bound::Dimerization => x.abs() < 1.0 && x != 0.0,
            };
        if ok {
            return Ok(());
        }
        Err(match self {
            Bound::Any => "must be finite",
            Bound::Positive => "must be positive",
            Bound::NonNegative => "must be non-negative",
            Bound::Fraction => "must lie in [0, 1)",
            Bound::Probability => "must lie in [0, 1]",
            Bound::Dimerization => "must satisfy 0 < |x| < 1",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Physical(Quantity, Bound),
    Number(Bound),
    Integer { min: i64 },
    Bool,
    Choice(&'static [&'static str]),
    /// `a..b` (inclusive) or `a, b, c`.
    IntList { min: i64 },
    Text,
}

use Bound::*;
use Kind::*;
use Quantity::*;

const HZ_POS: Kind = Physical(Frequency, Positive);
const HZ_NONNEG: Kind = Physical(Frequency, NonNegative);

/// Keys accepted in each section. `qubit.<label>` and `mode.<label>` share
/// one table per prefix.
pub fn schema(section: &str) -> Option<&'static [(&'static str, Kind)]> {
    let base = section.split_once('.').map(|(b, _)| b).unwrap_or(section);
    if section.contains('.') != matches!(base, "qubit" | "mode") {
        return None;
    }
    Some(match base {
        "run" => &[
            ("output", Text),
            ("format", Choice(&["csv", "json"])),
            ("seed", Integer { min: 0 }),
            ("jobs", Integer { min: 1 }),
        ],
        "circuit" => &[
            ("L0", Physical(Inductance, Positive)),
            ("C0", Physical(Capacitance, Positive)),
            ("Cv", Physical(Capacitance, NonNegative)),
            ("Cw", Physical(Capacitance, NonNegative)),
            ("Mv", Physical(Inductance, Any)),
            ("Mw", Physical(Inductance, Any)),
            ("swap", Bool),
        ],
        "taper" => &[
            ("C1g", Physical(Capacitance, Positive)),
            ("C2g", Physical(Capacitance, Positive)),
            ("C1", Physical(Capacitance, Positive)),
            ("C2", Physical(Capacitance, Positive)),
            ("Z0", Physical(Resistance, Positive)),
        ],
        "ssh" => &[("f0", HZ_POS), ("J", HZ_POS), ("delta", Number(Dimerization))],
        "lattice" => &[
            ("n_cells", Integer { min: 2 }),
            ("sizes", IntList { min: 2 }),
            ("boundary", Choice(&["matched", "bare"])),
        ],
        "chain" => &[("n_cells", Integer { min: 2 })],
        "disorder" => &[
            ("scenario", Choice(&["mutual-inductance", "coupling-capacitance", "correlated-capacitance"])),
            ("r", Number(Fraction)),
            ("realizations", Integer { min: 1 }),
            ("n_cells", Integer { min: 2 }),
            ("boundary", Choice(&["matched", "bare"])),
            ("seed", Integer { min: 0 }),
        ],
        "qubit" => &[
            ("cell", Integer { min: 1 }),
            ("sublattice", Choice(&["A", "B"])),
            ("frequency", HZ_POS),
            ("g", HZ_POS),
        ],
        "pair" => &[
            ("delta_n", Integer { min: 0 }),
            ("sublattices", Choice(&["AB", "BA", "AA", "BB"])),
            ("phase", Choice(&["trivial", "topological"])),
            ("bath", Choice(&["circuit", "ssh"])),
            ("branch", Choice(&["upper", "lower"])),
        ],
        "scattering" => &[
            ("g", HZ_POS),
            ("gamma_prime", HZ_NONNEG),
            ("gamma_phi", HZ_NONNEG),
            ("f_min", HZ_POS),
            ("f_max", HZ_POS),
        ],
        "kappa" => &[("g", HZ_POS), ("frequency", HZ_POS), ("cells", IntList { min: 1 }), ("kappa_b", HZ_POS)],
        "chevron" => &[
            ("g", HZ_POS),
            ("detuning_min", Physical(Frequency, Any)),
            ("detuning_max", Physical(Frequency, Any)),
            ("duration_max", Physical(Time, Positive)),
        ],
        "transfer" => &[
            ("g_edge", HZ_NONNEG),
            ("g_left", HZ_POS),
            ("g_right", HZ_POS),
            ("control_step1", HZ_NONNEG),
            ("control_step3", HZ_NONNEG),
            ("control_extension", Physical(Time, NonNegative)),
            ("prep_population", Number(Probability)),
        ],
        "mode" => &[("T1", Physical(Time, Positive)), ("T2star", Physical(Time, Positive))],
        "grid" => &[
            ("n_k", Integer { min: 64 }),
            ("n_points", Integer { min: 2 }),
            ("n_tunings", Integer { min: 3 }),
            ("n_probe", Integer { min: 2 }),
            ("n_detunings", Integer { min: 1 }),
            ("n_durations", Integer { min: 1 }),
            ("dt", Physical(Time, Positive)),
            ("sample_every", Integer { min: 1 }),
        ],
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Real(f64),
    Int(i64),
    Bool(bool),
    Word(String),
    IntList(Vec<i64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub value: Value,
    pub location: Location,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub location: Location,
    pub entries: BTreeMap<String, Entry>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub sections: Vec<Section>,
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.')
}

/// 1-based character column of byte offset `byte` in `line`.
fn col(line: &str, byte: usize) -> usize {
    line[..byte].chars().count() + 1
}

pub fn parse_config(text: &str) -> Result<Document, ConfigError> {
    let mut doc = Document::default();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let start = line.len() - line.trim_start().len();
        if let Some(rest) = trimmed.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return Err(ConfigError::at(ConfigErrorKind::Schema, ln, col(line, start), "unterminated section header"));
            };
            let name = name.trim();
            if name.is_empty() || !name.chars().all(is_name_char) {
                return Err(ConfigError::at(ConfigErrorKind::Schema, ln, col(line, start), format!("invalid section name `{name}`")));
            }
            if schema(name).is_none() {
                return Err(ConfigError::at(ConfigErrorKind::Schema, ln, col(line, start), format!("unknown section [{name}]")));
            }
            if doc.section(name).is_some() {
                return Err(ConfigError::at(ConfigErrorKind::Schema, ln, col(line, start), format!("duplicate section [{name}]")));
            }
            doc.sections.push(Section {
                name: name.to_string(),
                location: Location { line: ln, column: col(line, start) },
                entries: BTreeMap::new(),
            });
            continue;
        }
        let Some(eq) = line.find('=') else {
            return Err(ConfigError::at(ConfigErrorKind::Schema, ln, col(line, start), "expected `key = value` or `[section]`"));
        };
        let key = line[..eq].trim();
        let key_col = col(line, start);
        let Some(section) = doc.sections.last_mut() else {
            return Err(ConfigError::at(ConfigErrorKind::Schema, ln, key_col, format!("key `{key}` outside any section")));
        };
        let table = schema(&section.name).expect("section validated on entry");
        let Some(&(_, kind)) = table.iter().find(|(k, _)| *k == key) else {
            let known: Vec<&str> = table.iter().map(|(k, _)| *k).collect();
            return Err(ConfigError::at(
                ConfigErrorKind::Schema,
                ln,
                key_col,
                format!("unknown key `{key}` in [{}]; expected one of {}", section.name, known.join(", ")),
            ));
        };
        if section.entries.contains_key(key) {
            return Err(ConfigError::at(ConfigErrorKind::Schema, ln, key_col, format!("duplicate key `{key}`")));
        }
        let after = &line[eq + 1..];
        let vstart = eq + 1 + (after.len() - after.trim_start().len());
        let vcol = col(line, vstart);
        let value = parse_value(after.trim(), kind).map_err(|(k, m)| ConfigError::at(k, ln, vcol, format!("`{key}`: {m}")))?;
        section.entries.insert(key.to_string(), Entry { value, location: Location { line: ln, column: vcol } });
    }
    Ok(doc)
}

/// Splits `text` into its leading decimal number and the remainder.
fn split_number(text: &str) -> (&str, &str) {
    let b = text.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
        i += 1;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        if j < b.len() && b[j].is_ascii_digit() {
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            i = j;
        }
    }
    (&text[..i], text[i..].trim_start())
}

fn parse_real(num: &str) -> Result<f64, (ConfigErrorKind, String)> {
    num.parse::<f64>().map_err(|_| (ConfigErrorKind::Schema, format!("`{num}` is not a number")))
}

fn parse_int(s: &str, min: i64) -> Result<i64, (ConfigErrorKind, String)> {
    let v: i64 = s.trim().parse().map_err(|_| (ConfigErrorKind::Schema, format!("`{}` is not an integer", s.trim())))?;
    if v < min {
        return Err((ConfigErrorKind::Range, format!("{v} is below the minimum {min}")));
    }
    Ok(v)
}

fn parse_value(text: &str, kind: Kind) -> Result<Value, (ConfigErrorKind, String)> {
    if text.is_empty() {
        return Err((ConfigErrorKind::Schema, "missing value".into()));
    }
    match kind {
        Physical(q, bound) => {
            let (num, unit) = split_number(text);
            if num.is_empty() {
                return Err((ConfigErrorKind::Schema, format!("`{text}` is not a number")));
            }
            let x = parse_real(num)?;
            if unit.is_empty() {
                return Err((ConfigErrorKind::Unit, format!("missing unit (write e.g. {})", q.example())));
            }
            let Some(&(_, scale)) = q.units().iter().find(|(u, _)| *u == unit) else {
                let names: Vec<&str> = q.units().iter().map(|(u, _)| *u).collect();
                return Err((ConfigErrorKind::Unit, format!("unit `{unit}` not accepted here; use one of {}", names.join(", "))));
            };
            let v = x * scale;
            bound.check(v).map_err(|m| (ConfigErrorKind::Range, format!("{v:e} {m}")))?;
            Ok(Value::Real(v))
        }
        Number(bound) => {
            let (num, unit) = split_number(text);
            if num.is_empty() {
                return Err((ConfigErrorKind::Schema, format!("`{text}` is not a number")));
            }
            if !unit.is_empty() {
                return Err((ConfigErrorKind::Unit, format!("dimensionless value takes no unit, found `{unit}`")));
            }
            let v = parse_real(num)?;
            bound.check(v).map_err(|m| (ConfigErrorKind::Range, format!("{v} {m}")))?;
            Ok(Value::Real(v))
        }
        Integer { min } => Ok(Value::Int(parse_int(text, min)?)),
        Bool => match text {
            "true" => Ok(Value::Bool(true)),
            "false" => Ok(Value::Bool(false)),
            _ => Err((ConfigErrorKind::Schema, format!("expected true or false, found `{text}`"))),
        },
        Choice(opts) => {
            if opts.contains(&text) {
                Ok(Value::Word(text.to_string()))
            } else {
                Err((ConfigErrorKind::Schema, format!("expected one of {}, found `{text}`", opts.join(", "))))
            }
        }
        IntList { min } => {
            let v = if let Some((a, b)) = text.split_once("..") {
                let (a, b) = (parse_int(a, min)?, parse_int(b, min)?);
                if b < a {
                    return Err((ConfigErrorKind::Range, format!("empty range {a}..{b}")));
                }
                (a..=b).collect()
            } else {
                text.split(',').map(|s| parse_int(s, min)).collect::<Result<Vec<_>, _>>()?
            };
            Ok(Value::IntList(v))
        }
        Text => Ok(Value::Word(text.to_string())),
    }
}

impl Document {
    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    /// The section, or a schema error naming it.
    pub fn require(&self, name: &str) -> Result<&Section, ConfigError> {
        self.section(name).ok_or_else(|| ConfigError::schema(format!("missing section [{name}]"), None))
    }

    /// Sections `<prefix>.<label>` in document order, with their labels.
    pub fn labelled<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = (&'a str, &'a Section)> + 'a {
        self.sections.iter().filter_map(move |s| {
            let (b, label) = s.name.split_once('.')?;
            (b == prefix).then_some((label, s))
        })
    }
}

impl Section {
    fn missing(&self, key: &str) -> ConfigError {
        ConfigError::schema(format!("missing key `{key}` in [{}]", self.name), Some(self.location))
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn location_of(&self, key: &str) -> Location {
        self.entries.get(key).map(|e| e.location).unwrap_or(self.location)
    }

    pub fn real(&self, key: &str) -> Result<f64, ConfigError> {
        self.opt_real(key).ok_or_else(|| self.missing(key))
    }

    pub fn opt_real(&self, key: &str) -> Option<f64> {
        match self.entries.get(key)?.value {
            Value::Real(v) => Some(v),
            _ => None,
        }
    }

    pub fn int(&self, key: &str) -> Result<i64, ConfigError> {
        self.opt_int(key).ok_or_else(|| self.missing(key))
    }

    pub fn opt_int(&self, key: &str) -> Option<i64> {
        match self.entries.get(key)?.value {
            Value::Int(v) => Some(v),
            _ => None,
        }
    }

    pub fn opt_bool(&self, key: &str) -> Option<bool> {
        match self.entries.get(key)?.value {
            Value::Bool(v) => Some(v),
            _ => None,
        }
    }

    pub fn word(&self, key: &str) -> Result<&str, ConfigError> {
        self.opt_word(key).ok_or_else(|| self.missing(key))
    }

    pub fn opt_word(&self, key: &str) -> Option<&str> {
        match &self.entries.get(key)?.value {
            Value::Word(v) => Some(v),
            _ => None,
        }
    }

    pub fn int_list(&self, key: &str) -> Result<&[i64], ConfigError> {
        match self.entries.get(key).map(|e| &e.value) {
            Some(Value::IntList(v)) => Ok(v),
            _ => Err(self.missing(key)),
        }
    }
}
