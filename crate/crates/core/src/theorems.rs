//! Bound evaluators and end-to-end verification of the counting chain.
//!
//! The growth conclusions only hold up to unspecified constants, so bound
//! values are plain `f64` and are compared against measurements as ratios.
//! The chain steps feeding them are constant-free and are checked exactly:
//!
//! 1. every level equals `b·c` (resp. `b + c`), so the support is `B·C` (resp. `B+C`)
//! 2. `Σ E_λ · m >= |A||B||C|`
//! 3. `(Σ E_λ)² <= E · |B∘C|`
//! 4. `E <= I(R, S)`
//! 5. `k_exact <= max{|A|, |C|, |f(A, B)|}`
//! 6. `|R| = |S| = |T|·|f(A, B)|`

use serde::Serialize;

use crate::energy::{energy_report, lambda_counts, verify_lambda_identity, EnergyReport, Variant};
use crate::error::{Error, Result};
use crate::functions::ExpanderSpec;
use crate::incidence::{incidence_report, Budgets, IncidenceReport};
use crate::sets::{hypothesis_gate, size_within_gate, FSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Sizes {
    pub a: u64,
    pub b: u64,
    pub c: u64,
}

impl Sizes {
    pub fn new(a: u64, b: u64, c: u64) -> Self {
        Sizes { a, b, c }
    }

    pub fn uniform(n: u64) -> Self {
        Sizes { a: n, b: n, c: n }
    }

    pub fn of(a: &FSet, b: &FSet, c: &FSet) -> Self {
        Sizes::new(a.len() as u64, b.len() as u64, c.len() as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TheoremId {
    /// Product-set baseline: `|f(A,B)||B·C|`.
    #[serde(rename = "HH1")]
    Hh1,
    /// Sumset baseline: `|f(A,B)||B+C|`.
    #[serde(rename = "HH2")]
    Hh2,
    #[serde(rename = "T1star")]
    T1Star,
    #[serde(rename = "T2star")]
    T2Star,
    #[serde(rename = "Txeps")]
    TxEps,
}

impl TheoremId {
    pub fn baseline(variant: Variant) -> Self {
        match variant {
            Variant::Multiplicative => TheoremId::Hh1,
            Variant::Additive => TheoremId::Hh2,
        }
    }

    pub fn improved(variant: Variant) -> Self {
        match variant {
            Variant::Multiplicative => TheoremId::T1Star,
            Variant::Additive => TheoremId::T2Star,
        }
    }
}

/// `min{ |A||B|²|C| / (p m²), p|B| / m }`.
pub fn hh_terms(sizes: Sizes, m: u64, p: u64) -> [f64; 2] {
    let (a, b, c) = (sizes.a as f64, sizes.b as f64, sizes.c as f64);
    let (m, p) = (m as f64, p as f64);
    [a * b * b * c / (p * m * m), p * b / m]
}

pub fn hh_mult_bound(sizes: Sizes, m: u64, p: u64) -> f64 {
    min_of(&hh_terms(sizes, m, p))
}

/// Same expression as [`hh_mult_bound`], with `m = μ(g)`.
pub fn hh_add_bound(sizes: Sizes, m: u64, p: u64) -> f64 {
    min_of(&hh_terms(sizes, m, p))
}

/// The four terms of the improved bound, shared by both variants:
/// `|A|^{1/5}|B|^{4/5}|C|^{1/5}/m^{4/5}`, `|B||C|^{1/2}/m`, `|B||A|^{1/2}/m`,
/// `|B|^{2/3}|C|^{1/3}|A|^{1/3}/m^{2/3}`.
pub fn new_terms(sizes: Sizes, m: u64) -> [f64; 4] {
    let (a, b, c) = (sizes.a as f64, sizes.b as f64, sizes.c as f64);
    let m = m as f64;
    [
        a.powf(0.2) * b.powf(0.8) * c.powf(0.2) / m.powf(0.8),
        b * c.sqrt() / m,
        b * a.sqrt() / m,
        b.powf(2.0 / 3.0) * c.cbrt() * a.cbrt() / m.powf(2.0 / 3.0),
    ]
}

pub fn new_bound(sizes: Sizes, m: u64) -> f64 {
    min_of(&new_terms(sizes, m))
}

fn min_of(terms: &[f64]) -> f64 {
    terms.iter().copied().fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub theorem: TheoremId,
    pub sizes: Sizes,
    pub m: u64,
    pub p: Option<u64>,
    pub terms: Vec<f64>,
    pub bound: f64,
    /// `max{|f(A,B)|, |B∘C|}` for the improved bounds, the product
    /// `|f(A,B)|·|B∘C|` for the baselines.
    pub measured_lhs: u64,
    pub ratio: f64,
}

impl BoundReport {
    fn new(theorem: TheoremId, sizes: Sizes, m: u64, p: Option<u64>, terms: Vec<f64>, measured: u64) -> Self {
        let bound = min_of(&terms);
        BoundReport {
            theorem,
            sizes,
            m,
            p,
            terms,
            bound,
            measured_lhs: measured,
            ratio: measured as f64 / bound,
        }
    }
}

/// Outcome of each exact chain step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChainChecks {
    pub lambda_identity: bool,
    pub support: bool,
    pub counting_bound: bool,
    /// False when `0 ∈ C` in the multiplicative variant; the counting bound
    /// is then recorded but not required.
    pub counting_applicable: bool,
    pub cauchy_schwarz: bool,
    pub injection: bool,
    /// `k_exact <= max{|A|, m|C|, |f(A,B)|}` within the pair budget.
    pub collinear: bool,
    /// `k_exact <= max{|A|, |C|, |f(A,B)|}`. Recorded only: it fails on
    /// valid instances with multiplicity above 1.
    pub collinear_paper: bool,
    pub structural: bool,
    pub counters_agree: bool,
}

impl ChainChecks {
    pub fn all_ok(&self) -> bool {
        self.lambda_identity
            && self.support
            && (self.counting_bound || !self.counting_applicable)
            && self.cauchy_schwarz
            && self.injection
            && self.collinear
            && self.structural
            && self.counters_agree
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    pub variant: Variant,
    pub p: u64,
    /// All of `|A|, |B|, |C| <= p^{5/8}`.
    pub gate: bool,
    pub m: u64,
    pub image_size: u64,
    pub paired_size: u64,
    pub energy: EnergyReport,
    pub incidence: IncidenceReport,
    pub improved: BoundReport,
    pub baseline: BoundReport,
    pub chain: ChainChecks,
}

impl Verification {
    pub fn chain_ok(&self) -> bool {
        self.chain.all_ok()
    }
}

/// Runs the whole counting chain for one instance. A failed hypothesis gate
/// is recorded, not fatal.
pub fn verify_theorem(
    variant: Variant,
    a: &FSet,
    b: &FSet,
    c: &FSet,
    spec: &ExpanderSpec,
    budgets: &Budgets,
) -> Result<Verification> {
    let field = spec.field();
    let m = spec.multiplicity(variant)?;
    let image = spec.image(a, b)?;
    let paired = variant.paired_set(b, c)?;

    let identity = verify_lambda_identity(variant, a, b, c, spec)?;
    let lc = lambda_counts(variant, a, b, c, spec)?;
    let energy = energy_report(&lc, b, c, m)?;
    let incidence = incidence_report(variant, a, b, c, spec, energy.energy, budgets)?;

    let sizes = Sizes::of(a, b, c);
    let (fab, bc) = (image.len() as u64, paired.len() as u64);
    let improved = BoundReport::new(
        TheoremId::improved(variant),
        sizes,
        m,
        None,
        new_terms(sizes, m).to_vec(),
        fab.max(bc),
    );
    let baseline = BoundReport::new(
        TheoremId::baseline(variant),
        sizes,
        m,
        Some(field.modulus()),
        hh_terms(sizes, m, field.modulus()).to_vec(),
        fab * bc,
    );
    let chain = ChainChecks {
        lambda_identity: identity,
        support: energy.support_matches,
        counting_bound: energy.counting_ok,
        counting_applicable: !energy.degenerate,
        cauchy_schwarz: energy.cauchy_schwarz_ok,
        injection: incidence.e_le_i,
        collinear: incidence.collinear_ok(),
        collinear_paper: incidence.paper_k_holds(),
        structural: incidence.structural_ok(),
        counters_agree: incidence.counters_agree() && incidence.incidences_bounded(),
    };
    Ok(Verification {
        variant,
        p: field.modulus(),
        gate: hypothesis_gate([a, b, c], field),
        m,
        image_size: fab,
        paired_size: bc,
        energy,
        incidence,
        improved,
        baseline,
        chain,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalReport {
    pub size: u64,
    pub sumset_size: u64,
    pub productset_size: u64,
    pub min_sum_product: u64,
    pub image_size: u64,
    pub epsilon: f64,
    /// `|A|^{9/8 - ε}`
    pub threshold: f64,
    pub hypothesis_holds: bool,
    /// Largest `ε` the measured sizes support: `9/8 - log(min)/log|A|`.
    pub epsilon_max: f64,
    /// `5/4 + 2ε/3`
    pub predicted_exponent: f64,
    pub realized_exponent: f64,
    pub gate: bool,
    /// `|f(A,A)| > |A|²`: the conclusion holds outright and the
    /// intermediate ratios are skipped.
    pub short_circuit: bool,
    /// `|f(A,A)|^{3/2}|A·A| / |A|³`
    pub ratio_mult: Option<f64>,
    /// `|f(A,A)|^{3/2}|A+A| / |A|³`
    pub ratio_add: Option<f64>,
}

pub fn predicted_exponent(epsilon: f64) -> f64 {
    1.25 + 2.0 * epsilon / 3.0
}

/// Bookkeeping for the conditional growth statement from set sizes alone.
pub fn conditional_growth_from_sizes(
    size: u64,
    p: u64,
    sumset_size: u64,
    productset_size: u64,
    image_size: u64,
    epsilon: f64,
) -> Result<ConditionalReport> {
    if size <= 1 {
        return Err(Error::InvalidParameter("|A| must exceed 1".into()));
    }
    if !(epsilon > 0.0 && epsilon < 9.0 / 8.0) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} outside (0, 9/8)")));
    }
    let n = size as f64;
    let min = sumset_size.min(productset_size);
    let threshold = n.powf(9.0 / 8.0 - epsilon);
    let short_circuit = image_size as u128 > (size as u128) * (size as u128);
    let f32 = (image_size as f64).powf(1.5);
    let n3 = n.powi(3);
    Ok(ConditionalReport {
        size,
        sumset_size,
        productset_size,
        min_sum_product: min,
        image_size,
        epsilon,
        threshold,
        hypothesis_holds: (min as f64) <= threshold,
        epsilon_max: 9.0 / 8.0 - (min as f64).ln() / n.ln(),
        predicted_exponent: predicted_exponent(epsilon),
        realized_exponent: (image_size as f64).ln() / n.ln(),
        gate: size_within_gate(size, p),
        short_circuit,
        ratio_mult: (!short_circuit).then(|| f32 * productset_size as f64 / n3),
        ratio_add: (!short_circuit).then(|| f32 * sumset_size as f64 / n3),
    })
}

/// Evaluates the hypothesis `min{|A+A|, |A·A|} <= |A|^{9/8-ε}` and the
/// growth exponents for `f(A, A)`.
pub fn conditional_growth_check(a: &FSet, spec: &ExpanderSpec, epsilon: f64) -> Result<ConditionalReport> {
    let sum = a.sumset(a)?.len() as u64;
    let prod = a.productset(a)?.len() as u64;
    let image = spec.image(a, a)?.len() as u64;
    conditional_growth_from_sizes(a.len() as u64, a.modulus(), sum, prod, image, epsilon)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundComparison {
    pub sizes: Sizes,
    pub m: u64,
    pub p: u64,
    pub hh_terms: [f64; 2],
    pub hh_bound: f64,
    pub new_terms: [f64; 4],
    pub new_bound: f64,
    /// `"hh"`, `"new"` or `"equal"` by raw value.
    pub larger: &'static str,
    /// Every size within `p^{5/8}`.
    pub gate: bool,
    /// Some size sits exactly at `floor(p^{5/8})`.
    pub gate_edge: bool,
    pub shape_note: &'static str,
}

pub const SHAPE_NOTE: &str =
    "baseline bounds the product |f(A,B)||B*C|; improved bound bounds max{|f(A,B)|,|B*C|}";

/// Both bounds side by side. They constrain differently shaped quantities,
/// so only the raw minima are compared.
pub fn compare_bounds(sizes: Sizes, m: u64, p: u64) -> BoundComparison {
    let hh = hh_terms(sizes, m, p);
    let nt = new_terms(sizes, m);
    let (hb, nb) = (min_of(&hh), min_of(&nt));
    let all = [sizes.a, sizes.b, sizes.c];
    BoundComparison {
        sizes,
        m,
        p,
        hh_terms: hh,
        hh_bound: hb,
        new_terms: nt,
        new_bound: nb,
        larger: if hb > nb {
            "hh"
        } else if nb > hb {
            "new"
        } else {
            "equal"
        },
        gate: all.iter().all(|&s| size_within_gate(s, p)),
        gate_edge: all
            .iter()
            .any(|&s| size_within_gate(s, p) && !size_within_gate(s + 1, p)),
        shape_note: SHAPE_NOTE,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;
    use crate::functions::FunctionTable;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn hh_examples() {
        let s = Sizes::uniform(10);
        assert!(close(hh_mult_bound(s, 1, 101), 10_000.0 / 101.0, 1e-12));
        assert!(close(hh_mult_bound(s, 1, 101), 99.0099, 1e-4));
        assert_eq!(hh_add_bound(s, 1, 101), hh_mult_bound(s, 1, 101));
        assert_eq!(hh_mult_bound(Sizes::new(3, 0, 4), 1, 101), 0.0);
        for n in [2u64, 5, 30, 200] {
            let p = 101f64;
            let n4 = (n as f64).powi(4);
            assert!(close(hh_mult_bound(Sizes::uniform(n), 1, 101), (n4 / p).min(p * n as f64), 1e-9));
        }
    }

    #[test]
    fn new_bound_examples() {
        let t = new_terms(Sizes::uniform(32), 1);
        assert!(close(t[0], 64.0, 1e-9));
        assert!(close(t[1], 181.019336, 1e-6));
        assert!(close(t[2], 181.019336, 1e-6));
        assert!(close(t[3], 101.593667, 1e-6));
        assert!(close(new_bound(Sizes::uniform(32), 1), 64.0, 1e-9));
        assert!(close(new_bound(Sizes::uniform(1), 1), 1.0, 1e-12));
    }

    #[test]
    fn new_bound_monotonicity() {
        for a in [1u64, 3, 8, 20] {
            for b in [1u64, 4, 9, 25] {
                for c in [1u64, 2, 16] {
                    for m in [1u64, 2, 3] {
                        let base = new_bound(Sizes::new(a, b, c), m);
                        assert!(new_bound(Sizes::new(a + 1, b, c), m) >= base);
                        assert!(new_bound(Sizes::new(a, b + 1, c), m) >= base);
                        assert!(new_bound(Sizes::new(a, b, c + 1), m) >= base);
                        let doubled = new_terms(Sizes::new(a, b, c), 2 * m);
                        for (t2, t1) in doubled.iter().zip(new_terms(Sizes::new(a, b, c), m)) {
                            assert!(*t2 <= t1);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn compare_examples() {
        let c = compare_bounds(Sizes::uniform(10), 1, 101);
        assert!(close(c.hh_bound, 99.0099, 1e-4));
        assert!(close(c.new_bound, 15.848932, 1e-6));
        assert_eq!(c.larger, "hh");
        assert!(c.gate);
        assert!(!c.gate_edge);
        let one = compare_bounds(Sizes::uniform(1), 1, 101);
        assert!(close(one.new_bound, 1.0, 1e-12));
        assert!(close(one.hh_bound, 1.0 / 101.0, 1e-12));
        let edge = compare_bounds(Sizes::uniform(17), 1, 101);
        assert!(edge.gate && edge.gate_edge);
        let over = compare_bounds(Sizes::uniform(18), 1, 101);
        assert!(!over.gate);
    }

    #[test]
    fn conditional_sizes() {
        let r = conditional_growth_from_sizes(16, 4001, 136, 31, 200, 0.125).unwrap();
        assert!(close(r.predicted_exponent, 4.0 / 3.0, 1e-15));
        assert_eq!(r.min_sum_product, 31);
        assert!(!r.hypothesis_holds);
        assert!(r.epsilon_max < 0.0);
        assert!(!r.short_circuit);
        assert!(close(r.ratio_mult.unwrap(), 200f64.powf(1.5) * 31.0 / 4096.0, 1e-9));
        // guard branch
        let g = conditional_growth_from_sizes(4, 4001, 10, 10, 17, 0.1).unwrap();
        assert!(g.short_circuit);
        assert_eq!(g.ratio_mult, None);
        assert_eq!(g.ratio_add, None);
        assert!(conditional_growth_from_sizes(1, 7, 1, 1, 1, 0.1).is_err());
        assert!(conditional_growth_from_sizes(4, 7, 1, 1, 1, 0.0).is_err());
        assert!(conditional_growth_from_sizes(4, 7, 1, 1, 1, 1.125).is_err());
    }

    #[test]
    fn conditional_on_subgroup_satisfies_hypothesis() {
        let field = PrimeField::new(4001).unwrap();
        let a = crate::sets::subgroup(field, 100).unwrap();
        let id = FunctionTable::identity(&a).unwrap();
        let spec = ExpanderSpec::new(id.clone(), id).unwrap();
        let r = conditional_growth_check(&a, &spec, 0.1).unwrap();
        assert_eq!(r.productset_size, 100);
        assert!(r.hypothesis_holds);
        assert!(close(r.epsilon_max, 0.125, 1e-12));
        assert!(r.gate);
    }

    #[test]
    fn verify_tiny_instance() {
        let field = PrimeField::new(5).unwrap();
        let a = FSet::new(field, [1]);
        let b = FSet::new(field, [1, 2]);
        let id = FunctionTable::identity(&a).unwrap();
        let spec = ExpanderSpec::new(id.clone(), id).unwrap();
        let v = verify_theorem(Variant::Multiplicative, &a, &b, &a, &spec, &Budgets::default()).unwrap();
        assert!(v.chain_ok());
        assert_eq!(v.m, 1);
        assert_eq!((v.energy.sum_e, v.energy.triples), (2, 2));
        assert_eq!((v.energy.cs_lhs, v.energy.cs_rhs), (4, 4));
        assert_eq!((v.energy.energy, v.incidence.incidences), (2, 2));
        assert_eq!((v.incidence.k_exact, v.incidence.k_paper), (Some(2), 2));
        assert_eq!(v.improved.measured_lhs, 2);
        // min{2^{4/5}, 2, 2, 2^{2/3}} = 2^{2/3}
        assert!(close(v.improved.bound, 2f64.powf(2.0 / 3.0), 1e-12));
        assert!(close(v.improved.ratio, 2.0 / 2f64.powf(2.0 / 3.0), 1e-12));
        assert_eq!(v.baseline.measured_lhs, 4);
    }

    #[test]
    fn verify_singletons() {
        let field = PrimeField::new(13).unwrap();
        let one = FSet::new(field, [4]);
        let spec = ExpanderSpec::new(
            FunctionTable::monomial(&one, 3).unwrap(),
            FunctionTable::inverse(&one).unwrap(),
        )
        .unwrap();
        for v in Variant::ALL {
            let r = verify_theorem(v, &one, &one, &one, &spec, &Budgets::default()).unwrap();
            assert!(r.chain_ok());
            let e = &r.energy;
            assert_eq!((e.sum_e, e.energy, e.cs_lhs, e.cs_rhs, e.triples), (1, 1, 1, 1, 1));
            assert_eq!(r.incidence.incidences, 1);
            assert_eq!((r.incidence.k_exact, r.incidence.k_paper), (Some(1), 1));
        }
    }
}
