//! Flat `key = value` configuration merged with command-line overrides.
//!
//! Recognized keys (the long flag names without dashes):
//!
//! ```text
//! p, variant, family-A, family-B, family-C, g, h, trials, seed, sizes,
//! epsilon, m, out, aggregate-out, format, deterministic, selfcheck,
//! collinear-budget, oracle-budget, grouped-budget
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::energy::Variant;
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::functions::FunctionFamily;
use crate::incidence::Budgets;
use crate::sets::{FSet, SetFamily};

pub const KEYS: &[&str] = &[
    "p",
    "variant",
    "family-A",
    "family-B",
    "family-C",
    "g",
    "h",
    "trials",
    "seed",
    "sizes",
    "epsilon",
    "m",
    "out",
    "aggregate-out",
    "format",
    "deterministic",
    "selfcheck",
    "collinear-budget",
    "oracle-budget",
    "grouped-budget",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariantChoice {
    Mult,
    Add,
    Both,
}

impl VariantChoice {
    pub fn variants(&self) -> &'static [Variant] {
        match self {
            VariantChoice::Mult => &[Variant::Multiplicative],
            VariantChoice::Add => &[Variant::Additive],
            VariantChoice::Both => &Variant::ALL,
        }
    }
}

impl FromStr for VariantChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "mult" => Ok(VariantChoice::Mult),
            "add" => Ok(VariantChoice::Add),
            "both" => Ok(VariantChoice::Both),
            other => Err(Error::InvalidParameter(format!("variant must be mult, add or both, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidParameter(format!("format must be csv or json, got `{other}`"))),
        }
    }
}

/// Where `B` or `C` comes from: its own family, or a translate of an
/// earlier set (`A`, `A+1`, `B-2`, ...).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetSource {
    Family(SetFamily),
    Shift { of: char, by: i64 },
}

impl SetSource {
    pub fn resolve(&self, field: PrimeField, own: impl FnOnce(&SetFamily) -> Result<FSet>, a: &FSet, b: Option<&FSet>) -> Result<FSet> {
        match self {
            SetSource::Family(fam) => own(fam),
            SetSource::Shift { of, by } => {
                let base = match of {
                    'A' => a,
                    'B' => b.ok_or_else(|| Error::InvalidFamily("B cannot refer to itself".into()))?,
                    _ => unreachable!("parser only accepts A and B"),
                };
                Ok(base.translate(field.reduce_i64(*by)))
            }
        }
    }
}

impl fmt::Display for SetSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetSource::Family(fam) => write!(f, "{fam}"),
            SetSource::Shift { of, by: 0 } => write!(f, "{of}"),
            SetSource::Shift { of, by } if *by > 0 => write!(f, "{of}+{by}"),
            SetSource::Shift { of, by } => write!(f, "{of}{by}"),
        }
    }
}

impl FromStr for SetSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut chars = s.chars();
        match chars.next() {
            Some(of @ ('A' | 'B')) => {
                let rest = chars.as_str().trim();
                let by = if rest.is_empty() {
                    0
                } else {
                    let rest = rest.strip_prefix('+').unwrap_or(rest);
                    rest.trim()
                        .parse::<i64>()
                        .map_err(|_| Error::InvalidFamily(s.to_string()))?
                };
                Ok(SetSource::Shift { of, by })
            }
            _ => Ok(SetSource::Family(s.parse()?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub field: PrimeField,
    pub variant: VariantChoice,
    pub family_a: SetFamily,
    pub family_b: SetSource,
    pub family_c: SetSource,
    pub g: FunctionFamily,
    pub h: FunctionFamily,
    pub trials: u64,
    pub seed: u64,
    /// Size grid for `experiment` and `bounds`; empty means "use the
    /// family's own size".
    pub sizes: Vec<u64>,
    pub epsilon: Option<f64>,
    pub m: u64,
    pub budgets: Budgets,
    pub out: Option<PathBuf>,
    pub aggregate_out: Option<PathBuf>,
    pub format: Format,
    pub deterministic: bool,
    pub selfcheck: bool,
}

/// Parses the flat config file format.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidParameter(format!("line {}: expected `key = value`", i + 1)))?;
        let key = k.trim();
        if !KEYS.contains(&key) {
            return Err(Error::InvalidParameter(format!("line {}: unknown key `{key}`", i + 1)));
        }
        map.insert(key.to_string(), v.trim().to_string());
    }
    Ok(map)
}

pub fn read_kv_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))?;
    parse_kv(&text)
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" | "" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::InvalidParameter(format!("{key}: expected a boolean, got `{v}`"))),
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::InvalidParameter(format!("{key}: cannot parse `{v}`")))
}

impl ExperimentConfig {
    /// Builds a config from merged key/value pairs, applying defaults.
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        for key in map.keys() {
            if !KEYS.contains(&key.as_str()) {
                return Err(Error::InvalidParameter(format!("unknown key `{key}`")));
            }
        }
        let get = |k: &str| map.get(k).map(String::as_str);
        let p: u64 = parse_num("p", get("p").unwrap_or("101"))?;
        let field = PrimeField::new(p)?;
        let budgets = Budgets {
            collinear_pairs: get("collinear-budget")
                .map(|v| parse_num("collinear-budget", v))
                .transpose()?
                .unwrap_or(Budgets::default().collinear_pairs),
            oracle: get("oracle-budget")
                .map(|v| parse_num("oracle-budget", v))
                .transpose()?
                .unwrap_or(Budgets::default().oracle),
            grouped: get("grouped-budget")
                .map(|v| parse_num("grouped-budget", v))
                .transpose()?
                .unwrap_or(Budgets::default().grouped),
        };
        let sizes = match get("sizes") {
            Some(v) if !v.is_empty() => v
                .split(',')
                .map(|t| parse_num("sizes", t.trim()))
                .collect::<Result<Vec<u64>>>()?,
            _ => Vec::new(),
        };
        let epsilon = get("epsilon").map(|v| parse_num::<f64>("epsilon", v)).transpose()?;
        if let Some(e) = epsilon {
            if !(e > 0.0 && e < 9.0 / 8.0) {
                return Err(Error::InvalidParameter(format!("epsilon {e} outside (0, 9/8)")));
            }
        }
        let trials: u64 = parse_num("trials", get("trials").unwrap_or("1"))?;
        if trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        let m: u64 = parse_num("m", get("m").unwrap_or("1"))?;
        if m == 0 {
            return Err(Error::InvalidParameter("m must be at least 1".into()));
        }
        Ok(ExperimentConfig {
            field,
            variant: get("variant").unwrap_or("both").parse()?,
            family_a: get("family-A").unwrap_or("random:8").parse()?,
            family_b: get("family-B").unwrap_or("A").parse()?,
            family_c: get("family-C").unwrap_or("A").parse()?,
            g: get("g").unwrap_or("identity").parse()?,
            h: get("h").unwrap_or("identity").parse()?,
            trials,
            seed: parse_num("seed", get("seed").unwrap_or("0"))?,
            sizes,
            epsilon,
            m,
            budgets,
            out: get("out").map(PathBuf::from),
            aggregate_out: get("aggregate-out").map(PathBuf::from),
            format: get("format").unwrap_or("csv").parse()?,
            deterministic: get("deterministic").map(|v| parse_bool("deterministic", v)).transpose()?.unwrap_or(false),
            selfcheck: get("selfcheck").map(|v| parse_bool("selfcheck", v)).transpose()?.unwrap_or(false),
        })
    }
}
