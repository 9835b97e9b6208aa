//! One-variable maps `g, h: F* -> F*` as explicit tables, the expander
//! `f(x, y) = g(x)(h(x) + y)`, and fiber multiplicity `μ`.

use std::fmt;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::energy::Variant;
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::sets::FSet;

/// Which formula produced a table. Tables are always stored explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyTag {
    Identity,
    Constant(u64),
    Inverse,
    Monomial(i64),
    Explicit,
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyTag::Identity => write!(f, "identity"),
            FamilyTag::Constant(c) => write!(f, "constant:{c}"),
            FamilyTag::Inverse => write!(f, "inverse"),
            FamilyTag::Monomial(k) => write!(f, "monomial:{k}"),
            FamilyTag::Explicit => write!(f, "explicit"),
        }
    }
}

/// A map from a domain `G ⊆ F_p*` to `F_p*`.
///
/// Every value is nonzero, with one exception: `constant:0` is admitted so
/// that `h = 0` specializations can be expressed. Such a table is rejected
/// wherever the value is inverted or multiplied into a μ computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionTable {
    domain: FSet,
    values: Vec<u64>,
    family: FamilyTag,
}

impl FunctionTable {
    fn build(domain: &FSet, family: FamilyTag, rule: impl Fn(u64) -> u64) -> Result<Self> {
        if !domain.is_star() {
            return Err(Error::ZeroInSet);
        }
        let values = domain.iter().map(rule).collect();
        let table = FunctionTable {
            domain: domain.clone(),
            values,
            family,
        };
        table.check_codomain()?;
        Ok(table)
    }

    fn check_codomain(&self) -> Result<()> {
        if self.family == FamilyTag::Constant(0) {
            return Ok(());
        }
        match self.iter().find(|&(_, v)| v == 0) {
            Some((x, _)) => Err(Error::ZeroValue { x }),
            None => Ok(()),
        }
    }

    pub fn identity(domain: &FSet) -> Result<Self> {
        Self::build(domain, FamilyTag::Identity, |x| x)
    }

    pub fn constant(domain: &FSet, c: u64) -> Result<Self> {
        let c = domain.field().reduce(c);
        Self::build(domain, FamilyTag::Constant(c), |_| c)
    }

    pub fn inverse(domain: &FSet) -> Result<Self> {
        let f = domain.field();
        Self::build(domain, FamilyTag::Inverse, |x| f.inv(x).expect("domain excludes zero"))
    }

    /// `x ↦ x^k`; negative `k` means `(x^{-1})^{|k|}`.
    pub fn monomial(domain: &FSet, k: i64) -> Result<Self> {
        let f = domain.field();
        Self::build(domain, FamilyTag::Monomial(k), |x| {
            let base = if k < 0 { f.inv(x).expect("domain excludes zero") } else { x };
            f.pow(base, k.unsigned_abs())
        })
    }

    /// A table with values aligned to `domain`'s canonical order.
    pub fn explicit(domain: &FSet, values: Vec<u64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::InvalidTable(format!(
                "{} values for a domain of size {}",
                values.len(),
                domain.len()
            )));
        }
        if !domain.is_star() {
            return Err(Error::ZeroInSet);
        }
        let f = domain.field();
        let table = FunctionTable {
            domain: domain.clone(),
            values: values.into_iter().map(|v| f.reduce(v)).collect(),
            family: FamilyTag::Explicit,
        };
        table.check_codomain()?;
        Ok(table)
    }

    /// Builds an explicit table from `(x, value)` pairs in any order.
    pub fn from_pairs(field: PrimeField, pairs: impl IntoIterator<Item = (u64, u64)>) -> Result<Self> {
        let mut pairs: Vec<(u64, u64)> = pairs
            .into_iter()
            .map(|(x, v)| (field.reduce(x), field.reduce(v)))
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidTable(format!("conflicting values at x = {}", w[0].0)));
        }
        let domain = FSet::new(field, pairs.iter().map(|&(x, _)| x));
        Self::explicit(&domain, pairs.into_iter().map(|(_, v)| v).collect())
    }

    /// Reads a two-column `x,value` CSV. A non-numeric first row is taken
    /// as a header.
    pub fn from_csv_reader(field: PrimeField, reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut pairs = Vec::new();
        for (i, row) in rdr.records().enumerate() {
            let row = row.map_err(|e| Error::InvalidTable(e.to_string()))?;
            if row.len() != 2 {
                return Err(Error::InvalidTable(format!("row {} has {} columns", i + 1, row.len())));
            }
            match (row[0].parse::<u64>(), row[1].parse::<u64>()) {
                (Ok(x), Ok(v)) => pairs.push((x, v)),
                _ if i == 0 => continue,
                _ => return Err(Error::InvalidTable(format!("row {} is not numeric", i + 1))),
            }
        }
        Self::from_pairs(field, pairs)
    }

    pub fn from_csv_path(field: PrimeField, path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| Error::InvalidTable(format!("{}: {e}", path.display())))?;
        Self::from_csv_reader(field, file)
    }

    pub fn domain(&self) -> &FSet {
        &self.domain
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn family(&self) -> FamilyTag {
        self.family
    }

    pub fn field(&self) -> PrimeField {
        self.domain.field()
    }

    pub fn is_zero_map(&self) -> bool {
        self.family == FamilyTag::Constant(0)
    }

    pub fn get(&self, x: u64) -> Result<u64> {
        self.domain
            .index_of(x)
            .map(|i| self.values[i])
            .ok_or(Error::OutsideDomain { x })
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.domain.iter().zip(self.values.iter().copied())
    }

    pub fn distinct_values(&self) -> usize {
        let mut v = self.values.clone();
        v.sort_unstable();
        v.dedup();
        v.len()
    }

    /// `μ(t) = max_{s ≠ 0} |{x : t(x) = s}|`.
    pub fn mu(&self) -> Result<u64> {
        if self.domain.is_empty() {
            return Err(Error::EmptyDomain);
        }
        let mut v: Vec<u64> = self.values.iter().copied().filter(|&s| s != 0).collect();
        if v.is_empty() {
            return Err(Error::NoNonzeroValues);
        }
        v.sort_unstable();
        let mut best = 0u64;
        let mut run = 0u64;
        for (i, &s) in v.iter().enumerate() {
            run = if i > 0 && v[i - 1] == s { run + 1 } else { 1 };
            best = best.max(run);
        }
        Ok(best)
    }

    /// `x ↦ g(x)·h(x)`. Fails if either factor is the zero map.
    pub fn pointwise_product(&self, other: &FunctionTable) -> Result<FunctionTable> {
        if self.domain != other.domain {
            return Err(Error::DomainMismatch);
        }
        let f = self.field();
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f.mul(a, b))
            .collect();
        let table = FunctionTable {
            domain: self.domain.clone(),
            values,
            family: FamilyTag::Explicit,
        };
        table.check_codomain()?;
        Ok(table)
    }
}

/// A function family as written on the command line or in a config file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FunctionFamily {
    Identity,
    Constant(i64),
    Inverse,
    Monomial(i64),
    Explicit(PathBuf),
}

impl FunctionFamily {
    pub fn is_explicit(&self) -> bool {
        matches!(self, FunctionFamily::Explicit(_))
    }

    /// Tabulates a built-in family on `domain`, or loads an explicit table
    /// (whose own domain is then used).
    pub fn table(&self, domain: &FSet) -> Result<FunctionTable> {
        let field = domain.field();
        match self {
            FunctionFamily::Identity => FunctionTable::identity(domain),
            FunctionFamily::Constant(c) => {
                FunctionTable::constant(domain, field.reduce_i64(*c))
            }
            FunctionFamily::Inverse => FunctionTable::inverse(domain),
            FunctionFamily::Monomial(k) => FunctionTable::monomial(domain, *k),
            FunctionFamily::Explicit(path) => FunctionTable::from_csv_path(field, path),
        }
    }
}

impl fmt::Display for FunctionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionFamily::Identity => write!(f, "identity"),
            FunctionFamily::Constant(c) => write!(f, "constant:{c}"),
            FunctionFamily::Inverse => write!(f, "inverse"),
            FunctionFamily::Monomial(k) => write!(f, "monomial:{k}"),
            FunctionFamily::Explicit(p) => write!(f, "explicit:{}", p.display()),
        }
    }
}

impl FromStr for FunctionFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidFamily(s.to_string());
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a.trim())),
            None => (s, None),
        };
        let int = |a: Option<&str>| a.ok_or_else(bad)?.parse::<i64>().map_err(|_| bad());
        Ok(match kind {
            "identity" if arg.is_none() => FunctionFamily::Identity,
            "inverse" if arg.is_none() => FunctionFamily::Inverse,
            "constant" => FunctionFamily::Constant(int(arg)?),
            "monomial" => FunctionFamily::Monomial(int(arg)?),
            "explicit" => match arg {
                Some(path) if !path.is_empty() => FunctionFamily::Explicit(PathBuf::from(path)),
                _ => return Err(bad()),
            },
            _ => return Err(bad()),
        })
    }
}

/// Cached per-point data for `a` in the domain.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Resolved {
    pub g: u64,
    pub h: u64,
    pub g_inv: u64,
}

/// `f(x, y) = g(x)(h(x) + y)` on a shared domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpanderSpec {
    g: FunctionTable,
    h: FunctionTable,
}

impl ExpanderSpec {
    /// `g` must be nowhere zero; `h` may be the zero map.
    pub fn new(g: FunctionTable, h: FunctionTable) -> Result<Self> {
        if g.domain() != h.domain() {
            return Err(Error::DomainMismatch);
        }
        if g.is_zero_map() {
            return Err(Error::InvalidParameter("g must take values in F*".into()));
        }
        Ok(ExpanderSpec { g, h })
    }

    pub fn g(&self) -> &FunctionTable {
        &self.g
    }

    pub fn h(&self) -> &FunctionTable {
        &self.h
    }

    pub fn domain(&self) -> &FSet {
        self.g.domain()
    }

    pub fn field(&self) -> PrimeField {
        self.g.field()
    }

    /// `μ(g·h)` for the multiplicative variant, `μ(g)` for the additive one.
    pub fn multiplicity(&self, variant: Variant) -> Result<u64> {
        match variant {
            Variant::Multiplicative => self.g.pointwise_product(&self.h)?.mu(),
            Variant::Additive => self.g.mu(),
        }
    }

    /// `g(a)(h(a) + b)`. May be zero when `b = -h(a)`.
    pub fn eval(&self, a: u64, b: u64) -> Result<u64> {
        let f = self.field();
        let i = self.domain().index_of(a).ok_or(Error::OutsideDomain { x: a })?;
        Ok(f.mul(self.g.values[i], f.add(self.h.values[i], f.reduce(b))))
    }

    pub(crate) fn resolve(&self, a_set: &FSet) -> Result<Vec<Resolved>> {
        if a_set.field() != self.field() {
            return Err(Error::ModulusMismatch {
                left: a_set.modulus(),
                right: self.field().modulus(),
            });
        }
        let f = self.field();
        a_set
            .iter()
            .map(|a| {
                let i = self.domain().index_of(a).ok_or(Error::OutsideDomain { x: a })?;
                let g = self.g.values[i];
                Ok(Resolved {
                    g,
                    h: self.h.values[i],
                    g_inv: f.inv(g)?,
                })
            })
            .collect()
    }

    /// `f(A, B) = {f(a, b) : a ∈ A, b ∈ B}`; zero values are kept.
    pub fn image(&self, a_set: &FSet, b_set: &FSet) -> Result<FSet> {
        let f = self.field();
        if b_set.field() != f {
            return Err(Error::ModulusMismatch {
                left: b_set.modulus(),
                right: f.modulus(),
            });
        }
        let resolved = self.resolve(a_set)?;
        let values = resolved
            .iter()
            .flat_map(|r| b_set.iter().map(move |b| f.mul(r.g, f.add(r.h, b))));
        Ok(FSet::new(f, values))
    }
}
