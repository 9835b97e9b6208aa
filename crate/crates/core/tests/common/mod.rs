//! Seeded random instances shared by the integration suites.
#![allow(dead_code)]

use fp_expander::sets::generate;
use fp_expander::{ExpanderSpec, FSet, FunctionFamily, PrimeField, SetFamily, Variant};
use rand::Rng;

pub struct Instance {
    pub a: FSet,
    pub b: FSet,
    pub c: FSet,
    pub spec: ExpanderSpec,
    pub label: String,
}

fn random_family<R: Rng>(rng: &mut R, p: u64, allow_zero: bool) -> FunctionFamily {
    match rng.gen_range(0..4) {
        0 => FunctionFamily::Identity,
        1 => FunctionFamily::Constant(rng.gen_range(if allow_zero { 0 } else { 1 }..p as i64)),
        2 => FunctionFamily::Inverse,
        _ => FunctionFamily::Monomial(rng.gen_range(-5..=5)),
    }
}

fn random_set<R: Rng>(rng: &mut R, field: PrimeField, max: u64) -> FSet {
    let n = rng.gen_range(1..=max);
    generate(&SetFamily::Random { n, seed: rng.gen() }, field).unwrap()
}

/// `A, B, C ⊂ F_p*` with sizes in `1..=max`, and `g, h` drawn from the
/// built-in families tabulated on `A`. `h = 0` only for the additive form.
pub fn random_instance<R: Rng>(rng: &mut R, primes: &[u64], max: u64, variant: Variant) -> Instance {
    let p = primes[rng.gen_range(0..primes.len())];
    let field = PrimeField::new(p).unwrap();
    let a = random_set(rng, field, max);
    let b = random_set(rng, field, max);
    let c = random_set(rng, field, max);
    let gf = random_family(rng, p, false);
    let hf = random_family(rng, p, variant == Variant::Additive);
    let spec = ExpanderSpec::new(gf.table(&a).unwrap(), hf.table(&a).unwrap()).unwrap();
    let label = format!("p={p} |A|={} |B|={} |C|={} g={gf} h={hf} {variant}", a.len(), b.len(), c.len());
    Instance { a, b, c, spec, label }
}
