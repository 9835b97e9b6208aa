mod common;

use fp_expander::sets::generate;
use fp_expander::theorems::verify_theorem;
use fp_expander::{Budgets, ExpanderSpec, FSet, FunctionTable, PrimeField, SetFamily, Variant};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_set(field: PrimeField, n: u64, seed: u64) -> FSet {
    generate(&SetFamily::Random { n, seed }, field).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn chain_holds_on_random_instances(seed in any::<u64>(), add in any::<bool>()) {
        let v = if add { Variant::Additive } else { Variant::Multiplicative };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = common::random_instance(&mut rng, &[13, 31, 101], 7, v);
        let r = verify_theorem(v, &inst.a, &inst.b, &inst.c, &inst.spec, &Budgets::default()).unwrap();
        prop_assert!(r.chain_ok(), "{} {:?}", inst.label, r.chain);
        if r.m == 1 {
            prop_assert!(r.chain.collinear_paper, "{}", inst.label);
        }
    }

    #[test]
    fn special_cases_of_the_image(p in prop::sample::select(vec![31u64, 101, 1009]), na in 1u64..9, nb in 1u64..9, seed in any::<u64>()) {
        let field = PrimeField::new(p).unwrap();
        let a = random_set(field, na, seed);
        let b = random_set(field, nb, seed.wrapping_add(1));
        let x = FunctionTable::identity(&a).unwrap();
        let one = FunctionTable::constant(&a, 1).unwrap();
        let zero = FunctionTable::constant(&a, 0).unwrap();
        let inv = FunctionTable::inverse(&a).unwrap();

        // g = x, h = 0: A·B
        let spec = ExpanderSpec::new(x.clone(), zero).unwrap();
        prop_assert_eq!(spec.image(&a, &b).unwrap(), a.productset(&b).unwrap());
        // g = 1, h = 1/x: A^{-1} + B
        let spec = ExpanderSpec::new(one.clone(), inv).unwrap();
        prop_assert_eq!(spec.image(&a, &b).unwrap(), a.inverses().unwrap().sumset(&b).unwrap());
        // g = x, h = 1: A(B + 1)
        let spec = ExpanderSpec::new(x, one).unwrap();
        prop_assert_eq!(spec.image(&a, &b).unwrap(), a.productset(&b.translate(1)).unwrap());
    }

    #[test]
    fn additive_chain_with_zero_h(na in 1u64..7, nb in 1u64..7, nc in 1u64..7, seed in any::<u64>()) {
        let field = PrimeField::new(101).unwrap();
        let a = random_set(field, na, seed);
        let b = random_set(field, nb, seed ^ 1);
        let c = random_set(field, nc, seed ^ 2);
        let spec = ExpanderSpec::new(FunctionTable::identity(&a).unwrap(), FunctionTable::constant(&a, 0).unwrap()).unwrap();
        let r = verify_theorem(Variant::Additive, &a, &b, &c, &spec, &Budgets::default()).unwrap();
        prop_assert!(r.chain_ok());
        prop_assert!(verify_theorem(Variant::Multiplicative, &a, &b, &c, &spec, &Budgets::default()).is_err());
    }

    #[test]
    fn translated_c_may_contain_zero(na in 2u64..8, seed in any::<u64>()) {
        // B = A, C = A + 1
        let field = PrimeField::new(31).unwrap();
        let a = random_set(field, na, seed);
        let c = a.translate(1);
        let id = FunctionTable::identity(&a).unwrap();
        let spec = ExpanderSpec::new(id.clone(), id).unwrap();
        for v in Variant::ALL {
            let r = verify_theorem(v, &a, &a, &c, &spec, &Budgets::default()).unwrap();
            prop_assert!(r.chain_ok());
            prop_assert_eq!(r.chain.counting_applicable, !(v == Variant::Multiplicative && c.contains(0)));
        }
    }
}
