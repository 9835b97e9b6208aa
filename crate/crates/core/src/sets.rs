//! Canonical subsets of `F_p`, set algebra, and seeded generators.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::PrimeField;

/// A sorted, duplicate-free subset of `F_p`. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FSet {
    field: PrimeField,
    elems: Vec<u64>,
}

impl FSet {
    /// Reduces every value mod p and canonicalizes.
    pub fn new(field: PrimeField, values: impl IntoIterator<Item = u64>) -> Self {
        let mut elems: Vec<u64> = values.into_iter().map(|v| field.reduce(v)).collect();
        elems.sort_unstable();
        elems.dedup();
        FSet { field, elems }
    }

    /// Like [`FSet::new`] but rejects zero, for subsets of `F_p*`.
    pub fn nonzero(field: PrimeField, values: impl IntoIterator<Item = u64>) -> Result<Self> {
        let set = Self::new(field, values);
        if set.contains(0) {
            return Err(Error::ZeroInSet);
        }
        Ok(set)
    }

    pub fn empty(field: PrimeField) -> Self {
        FSet {
            field,
            elems: Vec::new(),
        }
    }

    /// All of `F_p*`.
    pub fn units(field: PrimeField) -> Self {
        FSet {
            field,
            elems: (1..field.modulus()).collect(),
        }
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        self.field
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.field.modulus()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.elems.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[u64] {
        &self.elems
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.elems.iter().copied()
    }

    pub fn contains(&self, x: u64) -> bool {
        self.elems.binary_search(&x).is_ok()
    }

    /// Position of `x` in the canonical order.
    pub fn index_of(&self, x: u64) -> Option<usize> {
        self.elems.binary_search(&x).ok()
    }

    /// True when the set lies in `F_p*`.
    pub fn is_star(&self) -> bool {
        !self.contains(0)
    }

    pub fn is_subset(&self, other: &FSet) -> bool {
        self.field == other.field && self.elems.iter().all(|&x| other.contains(x))
    }

    fn same_field(&self, other: &FSet) -> Result<PrimeField> {
        if self.field != other.field {
            return Err(Error::ModulusMismatch {
                left: self.modulus(),
                right: other.modulus(),
            });
        }
        Ok(self.field)
    }

    fn combine(&self, other: &FSet, op: impl Fn(u64, u64) -> u64) -> Result<FSet> {
        let field = self.same_field(other)?;
        let mut out = Vec::with_capacity(self.len() * other.len());
        for &a in &self.elems {
            for &b in &other.elems {
                out.push(op(a, b));
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(FSet { field, elems: out })
    }

    /// `A + B`
    pub fn sumset(&self, other: &FSet) -> Result<FSet> {
        let f = self.field;
        self.combine(other, |a, b| f.add(a, b))
    }

    /// `A - B`
    pub fn difference_set(&self, other: &FSet) -> Result<FSet> {
        let f = self.field;
        self.combine(other, |a, b| f.sub(a, b))
    }

    /// `A · B`
    pub fn productset(&self, other: &FSet) -> Result<FSet> {
        let f = self.field;
        self.combine(other, |a, b| f.mul(a, b))
    }

    /// `A : B = {a / b}`, with zero dropped from `B`.
    pub fn ratio_set(&self, other: &FSet) -> Result<FSet> {
        let f = self.field;
        let denominators = FSet::new(f, other.iter().filter(|&b| b != 0).map(|b| f.inv(b).unwrap()));
        self.productset(&denominators)
    }

    /// `A^{-1}`; fails if `0 ∈ A`.
    pub fn inverses(&self) -> Result<FSet> {
        let f = self.field;
        let inv = self
            .iter()
            .map(|a| f.inv(a))
            .collect::<Result<Vec<_>>>()?;
        Ok(FSet::new(f, inv))
    }

    /// `A + t`
    pub fn translate(&self, t: u64) -> FSet {
        let f = self.field;
        let t = f.reduce(t);
        FSet::new(f, self.iter().map(|a| f.add(a, t)))
    }

    /// `t · A`
    pub fn dilate(&self, t: u64) -> FSet {
        let f = self.field;
        let t = f.reduce(t);
        FSet::new(f, self.iter().map(|a| f.mul(a, t)))
    }
}

impl fmt::Display for FSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.elems.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

/// How to build a set for an experiment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetFamily {
    /// `n` elements drawn uniformly without replacement from `F_p*`.
    Random { n: u64, seed: u64 },
    /// `{start, start+1, ..., start+n-1}`.
    Interval { start: u64, n: u64 },
    /// `{start · ratio^i : 0 <= i < n}`.
    Geometric { start: u64, ratio: u64, n: u64 },
    /// The multiplicative subgroup of order `d`.
    Subgroup { d: u64 },
    Explicit(Vec<u64>),
}

impl SetFamily {
    pub fn kind(&self) -> &'static str {
        match self {
            SetFamily::Random { .. } => "random",
            SetFamily::Interval { .. } => "interval",
            SetFamily::Geometric { .. } => "geometric",
            SetFamily::Subgroup { .. } => "subgroup",
            SetFamily::Explicit(_) => "explicit",
        }
    }

    /// Same family with its size parameter replaced. Explicit sets have no
    /// size parameter.
    pub fn with_size(&self, n: u64) -> Result<SetFamily> {
        Ok(match self {
            SetFamily::Random { seed, .. } => SetFamily::Random { n, seed: *seed },
            SetFamily::Interval { start, .. } => SetFamily::Interval { start: *start, n },
            SetFamily::Geometric { start, ratio, .. } => SetFamily::Geometric {
                start: *start,
                ratio: *ratio,
                n,
            },
            SetFamily::Subgroup { .. } => SetFamily::Subgroup { d: n },
            SetFamily::Explicit(_) => {
                return Err(Error::InvalidFamily("explicit sets have a fixed size".into()))
            }
        })
    }

    pub fn with_seed(&self, seed: u64) -> SetFamily {
        match self {
            SetFamily::Random { n, .. } => SetFamily::Random { n: *n, seed },
            other => other.clone(),
        }
    }
}

impl fmt::Display for SetFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetFamily::Random { n, .. } => write!(f, "random:{n}"),
            SetFamily::Interval { start, n } => write!(f, "interval:{start}:{n}"),
            SetFamily::Geometric { start, ratio, n } => write!(f, "geometric:{start}:{ratio}:{n}"),
            SetFamily::Subgroup { d } => write!(f, "subgroup:{d}"),
            SetFamily::Explicit(v) => {
                write!(f, "explicit:")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
        }
    }
}

/// Parses `random:<n>`, `interval:<start>:<n>`, `geometric:<start>:<ratio>:<n>`,
/// `subgroup:<d>` and `explicit:<v1>;<v2>;...`. The size may be omitted
/// (defaults to 1) when a sweep supplies it via [`SetFamily::with_size`].
/// Random seeds are assigned by the caller.
impl FromStr for SetFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidFamily(s.to_string());
        let num = |t: &str| t.trim().parse::<u64>().map_err(|_| bad());
        let mut parts = s.trim().split(':');
        let kind = parts.next().ok_or_else(bad)?.trim();
        let args: Vec<&str> = parts.collect();
        let family = match (kind, args.as_slice()) {
            ("random", []) => SetFamily::Random { n: 1, seed: 0 },
            ("random", [n]) => SetFamily::Random { n: num(n)?, seed: 0 },
            ("interval", [start]) => SetFamily::Interval { start: num(start)?, n: 1 },
            ("interval", [start, n]) => SetFamily::Interval {
                start: num(start)?,
                n: num(n)?,
            },
            ("geometric", [start, ratio]) => SetFamily::Geometric {
                start: num(start)?,
                ratio: num(ratio)?,
                n: 1,
            },
            ("geometric", [start, ratio, n]) => SetFamily::Geometric {
                start: num(start)?,
                ratio: num(ratio)?,
                n: num(n)?,
            },
            ("subgroup", [d]) => SetFamily::Subgroup { d: num(d)? },
            ("explicit", [list]) => SetFamily::Explicit(
                list.split(';')
                    .filter(|t| !t.trim().is_empty())
                    .map(num)
                    .collect::<Result<_>>()?,
            ),
            _ => return Err(bad()),
        };
        Ok(family)
    }
}

/// Builds the set described by `family`. Deterministic in `(family, seed)`.
pub fn generate(family: &SetFamily, field: PrimeField) -> Result<FSet> {
    let p = field.modulus();
    match family {
        SetFamily::Random { n, seed } => {
            if *n > p - 1 {
                return Err(Error::SetTooLarge {
                    requested: *n,
                    available: p - 1,
                });
            }
            Ok(FSet::new(field, sample_units(p, *n, *seed)))
        }
        SetFamily::Interval { start, n } => {
            if *n > p {
                return Err(Error::SetTooLarge {
                    requested: *n,
                    available: p,
                });
            }
            let start = field.reduce(*start);
            Ok(FSet::new(field, (0..*n).map(|i| field.add(start, field.reduce(i)))))
        }
        SetFamily::Geometric { start, ratio, n } => {
            let start = field.reduce(*start);
            let ratio = field.reduce(*ratio);
            if start == 0 || ratio == 0 {
                return Err(Error::InvalidFamily(
                    "geometric progression needs nonzero start and ratio".into(),
                ));
            }
            let available = field.order_of(ratio)?;
            if *n > available {
                return Err(Error::SetTooLarge {
                    requested: *n,
                    available,
                });
            }
            let mut x = start;
            let mut values = Vec::with_capacity(*n as usize);
            for _ in 0..*n {
                values.push(x);
                x = field.mul(x, ratio);
            }
            Ok(FSet::new(field, values))
        }
        SetFamily::Subgroup { d } => subgroup(field, *d),
        SetFamily::Explicit(values) => Ok(FSet::new(field, values.iter().copied())),
    }
}

/// The unique subgroup of `F_p*` of order `d`, generated by `g^((p-1)/d)` for
/// a primitive root `g`.
pub fn subgroup(field: PrimeField, d: u64) -> Result<FSet> {
    let order = field.group_order();
    if d == 0 || !order.is_multiple_of(d) {
        return Err(Error::SubgroupOrder { d, order });
    }
    let gen = field.pow(field.primitive_root(), order / d);
    let mut x = 1u64;
    let mut values = Vec::with_capacity(d as usize);
    for _ in 0..d {
        values.push(x);
        x = field.mul(x, gen);
    }
    Ok(FSet::new(field, values))
}

/// Partial Fisher–Yates over the virtual array `[1, 2, ..., p-1]` driven by
/// ChaCha8 seeded from `seed`. Swapped slots are tracked sparsely so memory
/// is `O(n)` regardless of `p`.
fn sample_units(p: u64, n: u64, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = p - 1;
    let mut moved: HashMap<u64, u64> = HashMap::with_capacity(2 * n as usize);
    let mut out = Vec::with_capacity(n as usize);
    for i in 0..n {
        let j = rng.gen_range(i..len);
        let at_j = *moved.get(&j).unwrap_or(&j);
        let at_i = *moved.get(&i).unwrap_or(&i);
        moved.insert(j, at_i);
        out.push(at_j + 1);
    }
    out
}

/// True iff `|X|^8 <= p^5` for every set, i.e. every size is at most
/// `p^{5/8}`. Compared in exact integer arithmetic.
pub fn hypothesis_gate<'a>(sets: impl IntoIterator<Item = &'a FSet>, field: PrimeField) -> bool {
    sets.into_iter().all(|s| size_within_gate(s.len() as u64, field.modulus()))
}

pub fn size_within_gate(size: u64, p: u64) -> bool {
    BigUint::from(size).pow(8) <= BigUint::from(p).pow(5)
}
