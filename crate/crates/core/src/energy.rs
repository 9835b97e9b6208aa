//! Level counts `E_λ` and their moments.
//!
//! For each triple `(a, b, c) ∈ A×B×C` a point of `F_p^3` is formed:
//!
//! * multiplicative: `(f(a,b), c·g(a)^{-1}, c·h(a))` with level `x·y - z`
//! * additive:       `(f(a,b), g(a)^{-1}, c - h(a))` with level `x·y + z`
//!
//! `E_λ` is the number of *distinct points* at level `λ`, not the number of
//! triples. Both level expressions collapse to `b·c` and `b + c`
//! respectively, so the support is `B·C` or `B+C`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::functions::{ExpanderSpec, Resolved};
use crate::sets::FSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "mult")]
    Multiplicative,
    #[serde(rename = "add")]
    Additive,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::Multiplicative, Variant::Additive];

    /// `B·C` or `B+C`.
    pub fn paired_set(&self, b: &FSet, c: &FSet) -> Result<FSet> {
        match self {
            Variant::Multiplicative => b.productset(c),
            Variant::Additive => b.sumset(c),
        }
    }

    /// The point contributed by `(a, b, c)` given `f(a, b)`.
    #[inline]
    pub(crate) fn point(&self, field: &PrimeField, r: &Resolved, fab: u64, c: u64) -> [u64; 3] {
        match self {
            Variant::Multiplicative => [fab, field.mul(c, r.g_inv), field.mul(c, r.h)],
            Variant::Additive => [fab, r.g_inv, field.sub(c, r.h)],
        }
    }

    /// Level of a point, evaluated from its coordinates.
    #[inline]
    pub(crate) fn level(&self, field: &PrimeField, pt: &[u64; 3]) -> u64 {
        let xy = field.mul(pt[0], pt[1]);
        match self {
            Variant::Multiplicative => field.sub(xy, pt[2]),
            Variant::Additive => field.add(xy, pt[2]),
        }
    }

    /// Level predicted by the collapse identity.
    #[inline]
    pub(crate) fn collapsed(&self, field: &PrimeField, b: u64, c: u64) -> u64 {
        match self {
            Variant::Multiplicative => field.mul(b, c),
            Variant::Additive => field.add(b, c),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Multiplicative => "mult",
            Variant::Additive => "add",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "mult" | "multiplicative" => Ok(Variant::Multiplicative),
            "add" | "additive" => Ok(Variant::Additive),
            other => Err(Error::InvalidParameter(format!("unknown variant `{other}`"))),
        }
    }
}

/// `λ ↦ E_λ`, sorted by `λ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaCounts {
    pub variant: Variant,
    pub counts: Vec<(u64, u64)>,
    pub support: FSet,
    /// Multiplicative variant with `0 ∈ C`: points collapse to `(x, 0, 0)`
    /// and `a` is no longer pinned down by `y` and `z`.
    pub degenerate: bool,
    /// `|A||B||C|`
    pub triples: u64,
}

impl LambdaCounts {
    pub fn get(&self, lambda: u64) -> u64 {
        self.counts
            .binary_search_by_key(&lambda, |&(l, _)| l)
            .map(|i| self.counts[i].1)
            .unwrap_or(0)
    }

    pub fn sum(&self) -> u64 {
        self.counts.iter().map(|&(_, e)| e).sum()
    }

    pub fn second_moment(&self) -> Result<u128> {
        self.counts.iter().try_fold(0u128, |acc, &(_, e)| {
            (e as u128)
                .checked_mul(e as u128)
                .and_then(|sq| acc.checked_add(sq))
                .ok_or(Error::Overflow("second moment"))
        })
    }
}

fn check_inputs(spec: &ExpanderSpec, sets: [&FSet; 3]) -> Result<()> {
    let field = spec.field();
    for s in sets {
        if s.is_empty() {
            return Err(Error::EmptySet);
        }
        if s.field() != field {
            return Err(Error::ModulusMismatch {
                left: s.modulus(),
                right: field.modulus(),
            });
        }
    }
    Ok(())
}

/// Computes every `E_λ` by enumerating `A×B×C` and deduplicating points per
/// level.
pub fn lambda_counts(
    variant: Variant,
    a: &FSet,
    b: &FSet,
    c: &FSet,
    spec: &ExpanderSpec,
) -> Result<LambdaCounts> {
    check_inputs(spec, [a, b, c])?;
    let field = spec.field();
    let resolved = spec.resolve(a)?;
    let triples = (a.len() as u64)
        .checked_mul(b.len() as u64)
        .and_then(|n| n.checked_mul(c.len() as u64))
        .ok_or(Error::Overflow("triple count"))?;

    let mut keyed: Vec<(u64, [u64; 3])> = Vec::with_capacity(triples as usize);
    for r in &resolved {
        for bv in b.iter() {
            let fab = field.mul(r.g, field.add(r.h, bv));
            for cv in c.iter() {
                let pt = variant.point(&field, r, fab, cv);
                keyed.push((variant.level(&field, &pt), pt));
            }
        }
    }
    keyed.sort_unstable();
    keyed.dedup();

    let mut counts: Vec<(u64, u64)> = Vec::new();
    for &(lambda, _) in &keyed {
        match counts.last_mut() {
            Some((l, e)) if *l == lambda => *e += 1,
            _ => counts.push((lambda, 1)),
        }
    }
    let support = FSet::new(field, counts.iter().map(|&(l, _)| l));
    Ok(LambdaCounts {
        variant,
        counts,
        support,
        degenerate: variant == Variant::Multiplicative && c.contains(0),
        triples,
    })
}

/// True iff every triple's level equals `b·c` (resp. `b + c`).
pub fn verify_lambda_identity(
    variant: Variant,
    a: &FSet,
    b: &FSet,
    c: &FSet,
    spec: &ExpanderSpec,
) -> Result<bool> {
    check_inputs(spec, [a, b, c])?;
    let field = spec.field();
    let resolved = spec.resolve(a)?;
    for r in &resolved {
        for bv in b.iter() {
            let fab = field.mul(r.g, field.add(r.h, bv));
            for cv in c.iter() {
                let pt = variant.point(&field, r, fab, cv);
                if variant.level(&field, &pt) != variant.collapsed(&field, bv, cv) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// First and second moments of the level counts together with the counting
/// lower bound and the Cauchy–Schwarz step, all in exact integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EnergyReport {
    pub sum_e: u64,
    /// `E = Σ E_λ²`
    pub energy: u128,
    /// Numerator of the lower bound `|A||B||C| / m`.
    pub triples: u64,
    pub m: u64,
    /// `(Σ E_λ)²`
    pub cs_lhs: u128,
    /// `E · |support|`
    pub cs_rhs: u128,
    pub support_size: u64,
    pub support_matches: bool,
    pub counting_ok: bool,
    pub cauchy_schwarz_ok: bool,
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyViolation {
    /// `Σ E_λ · m < |A||B||C|`
    CountingBound,
    /// `(Σ E_λ)² > E · |support|`
    CauchySchwarz,
    /// Support differs from `B·C` / `B+C`.
    Support,
}

impl EnergyReport {
    pub fn lower_bound(&self) -> f64 {
        self.triples as f64 / self.m as f64
    }

    /// Violated checks. The counting bound is not applicable to degenerate
    /// instances and is reported separately through `counting_ok`.
    pub fn violations(&self) -> Vec<EnergyViolation> {
        let mut v = Vec::new();
        if !self.counting_ok && !self.degenerate {
            v.push(EnergyViolation::CountingBound);
        }
        if !self.cauchy_schwarz_ok {
            v.push(EnergyViolation::CauchySchwarz);
        }
        if !self.support_matches {
            v.push(EnergyViolation::Support);
        }
        v
    }

    pub fn is_ok(&self) -> bool {
        self.violations().is_empty()
    }
}

/// `m` is `μ(g·h)` or `μ(g)` as chosen by the caller.
pub fn energy_report(lc: &LambdaCounts, b: &FSet, c: &FSet, m: u64) -> Result<EnergyReport> {
    if m == 0 {
        return Err(Error::InvalidParameter("multiplicity m must be positive".into()));
    }
    let sum_e = lc.sum();
    let energy = lc.second_moment()?;
    let support_size = lc.support.len() as u64;
    let cs_lhs = (sum_e as u128)
        .checked_mul(sum_e as u128)
        .ok_or(Error::Overflow("(sum E)^2"))?;
    let cs_rhs = energy
        .checked_mul(support_size as u128)
        .ok_or(Error::Overflow("E * |support|"))?;
    let counting_ok = (sum_e as u128) * (m as u128) >= lc.triples as u128;
    let support_matches = lc.support == lc.variant.paired_set(b, c)?;
    Ok(EnergyReport {
        sum_e,
        energy,
        triples: lc.triples,
        m,
        cs_lhs,
        cs_rhs,
        support_size,
        support_matches,
        counting_ok,
        cauchy_schwarz_ok: cs_lhs <= cs_rhs,
        degenerate: lc.degenerate,
    })
}
