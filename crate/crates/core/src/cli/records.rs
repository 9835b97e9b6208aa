//! Serialized record types and the `--selfcheck` validator.

use serde::{Deserialize, Serialize};

use crate::energy::Variant;
use crate::error::{Error, Result};
use crate::theorems::{BoundComparison, Verification};

/// Rounds to 6 significant digits so reports do not depend on the last
/// bits of libm.
pub fn sig6(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub p: u64,
    pub size_a: u64,
    pub size_b: u64,
    pub size_c: u64,
    pub variant: Variant,
    pub family_a: String,
    pub family_b: String,
    pub family_c: String,
    pub g: String,
    pub h: String,
    pub m: u64,
    pub sum_e: u64,
    pub energy: u128,
    pub image_size: u64,
    pub paired_size: u64,
    pub size_r: u64,
    pub size_s: u64,
    pub incidences: u128,
    /// -1 when the collinearity pair budget was exceeded.
    pub k_exact: i64,
    pub k_paper: u64,
    pub k_bound: u64,
    pub rudnev_rhs: f64,
    pub rudnev_ratio: f64,
    pub bound_new: f64,
    pub bound_hh: f64,
    pub measured_max: u64,
    pub chain_ok: bool,
}

/// Family strings for one instance, as they appear in records.
#[derive(Debug, Clone, Default)]
pub struct Tags {
    pub a: String,
    pub b: String,
    pub c: String,
    pub g: String,
    pub h: String,
}

impl TrialRecord {
    pub fn from_verification(trial: u64, v: &Verification, tags: &Tags) -> Self {
        let sizes = v.improved.sizes;
        TrialRecord {
            trial,
            p: v.p,
            size_a: sizes.a,
            size_b: sizes.b,
            size_c: sizes.c,
            variant: v.variant,
            family_a: tags.a.clone(),
            family_b: tags.b.clone(),
            family_c: tags.c.clone(),
            g: tags.g.clone(),
            h: tags.h.clone(),
            m: v.m,
            sum_e: v.energy.sum_e,
            energy: v.energy.energy,
            image_size: v.image_size,
            paired_size: v.paired_size,
            size_r: v.incidence.size_r,
            size_s: v.incidence.size_s,
            incidences: v.incidence.incidences,
            k_exact: v.incidence.k_exact.map_or(-1, |k| k as i64),
            k_paper: v.incidence.k_paper,
            k_bound: v.incidence.k_bound,
            rudnev_rhs: sig6(v.incidence.rudnev_rhs),
            rudnev_ratio: sig6(v.incidence.rudnev_ratio),
            bound_new: sig6(v.improved.bound),
            bound_hh: sig6(v.baseline.bound),
            measured_max: v.image_size.max(v.paired_size),
            chain_ok: v.chain_ok(),
        }
    }

    /// Invariants every emitted record must satisfy, checkable from the
    /// record alone.
    pub fn check(&self) -> std::result::Result<(), String> {
        let fail = |what: &str| Err(format!("trial {} ({}): {what}", self.trial, self.variant));
        if !self.chain_ok {
            return fail("chain_ok is false");
        }
        if self.size_r != self.size_s {
            return fail("|R| != |S|");
        }
        if self.incidences > self.size_r as u128 * self.size_s as u128 {
            return fail("I(R,S) > |R||S|");
        }
        if self.k_exact > self.k_bound as i64 {
            return fail("k_exact > k_bound");
        }
        if self.energy > self.incidences {
            return fail("E > I(R,S)");
        }
        let triples = self.size_a * self.size_b * self.size_c;
        if self.sum_e > triples {
            return fail("sum_E exceeds |A||B||C|");
        }
        if (self.sum_e as u128).pow(2) > self.energy * self.paired_size as u128 {
            return fail("(sum_E)^2 > E|B*C|");
        }
        if self.measured_max != self.image_size.max(self.paired_size) {
            return fail("measured_max mismatch");
        }
        Ok(())
    }
}

/// One row of the `incidence` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncidenceRecord {
    pub trial: u64,
    pub p: u64,
    pub variant: Variant,
    pub size_a: u64,
    pub size_b: u64,
    pub size_c: u64,
    pub size_r: u64,
    pub size_s: u64,
    pub projection_size: u64,
    pub image_size: u64,
    pub incidences: u128,
    /// Empty when the grouped counter was over budget.
    pub incidences_grouped: Option<u128>,
    /// Empty when the naive oracle was over budget.
    pub incidences_naive: Option<u128>,
    pub k_exact: i64,
    pub k_paper: u64,
    pub k_bound: u64,
    pub rudnev_rhs: f64,
    pub rudnev_ratio: f64,
    pub p2_gate: bool,
    pub energy: u128,
    pub e_le_i: bool,
}

impl IncidenceRecord {
    pub fn check(&self) -> std::result::Result<(), String> {
        let fail = |what: &str| Err(format!("trial {} ({}): {what}", self.trial, self.variant));
        if !self.e_le_i || self.energy > self.incidences {
            return fail("E > I(R,S)");
        }
        for other in [self.incidences_grouped, self.incidences_naive].into_iter().flatten() {
            if other != self.incidences {
                return fail("incidence counters disagree");
            }
        }
        if self.size_r != self.size_s || self.size_r != self.projection_size * self.image_size {
            return fail("structural identity");
        }
        if self.k_exact > self.k_bound as i64 {
            return fail("k_exact > k_bound");
        }
        Ok(())
    }
}

/// One row of the `bounds` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    pub size_a: u64,
    pub size_b: u64,
    pub size_c: u64,
    pub m: u64,
    pub p: u64,
    pub hh_term1: f64,
    pub hh_term2: f64,
    pub hh_bound: f64,
    pub new_term1: f64,
    pub new_term2: f64,
    pub new_term3: f64,
    pub new_term4: f64,
    pub new_bound: f64,
    pub larger: String,
    pub gate: bool,
    pub gate_edge: bool,
}

impl From<&BoundComparison> for BoundRecord {
    fn from(b: &BoundComparison) -> Self {
        BoundRecord {
            size_a: b.sizes.a,
            size_b: b.sizes.b,
            size_c: b.sizes.c,
            m: b.m,
            p: b.p,
            hh_term1: sig6(b.hh_terms[0]),
            hh_term2: sig6(b.hh_terms[1]),
            hh_bound: sig6(b.hh_bound),
            new_term1: sig6(b.new_terms[0]),
            new_term2: sig6(b.new_terms[1]),
            new_term3: sig6(b.new_terms[2]),
            new_term4: sig6(b.new_terms[3]),
            new_bound: sig6(b.new_bound),
            larger: b.larger.to_string(),
            gate: b.gate,
            gate_edge: b.gate_edge,
        }
    }
}

/// Serializes records as CSV (header row first) with an optional leading
/// comment line.
pub fn to_csv<T: Serialize>(records: &[T], preamble: Option<&str>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    if let Some(line) = preamble {
        buf.extend_from_slice(line.as_bytes());
        buf.push(b'\n');
    }
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for r in records {
            w.serialize(r).map_err(io_err)?;
        }
        w.flush().map_err(|e| Error::InvalidParameter(e.to_string()))?;
    }
    Ok(buf)
}

pub fn to_json<T: Serialize>(records: &[T]) -> Result<Vec<u8>> {
    let mut buf = serde_json::to_vec_pretty(records).map_err(io_err)?;
    buf.push(b'\n');
    Ok(buf)
}

/// Parses what [`to_csv`] wrote, skipping `#` comment lines.
pub fn from_csv<T: for<'de> Deserialize<'de>>(bytes: &[u8]) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(bytes);
    r.deserialize().map(|row| row.map_err(io_err)).collect()
}

pub fn from_json<T: for<'de> Deserialize<'de>>(bytes: &[u8]) -> Result<Vec<T>> {
    serde_json::from_slice(bytes).map_err(io_err)
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::InvalidParameter(format!("serialization: {e}"))
}
