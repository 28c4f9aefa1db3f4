use btlat::field::{ExtensionDescriptor, FieldModel};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn models() -> Vec<FieldModel> {
    ["padic:2", "padic:3", "padic:5", "laurent:2", "laurent:3", "laurent:4", "laurent:9"]
        .iter()
        .map(|s| FieldModel::from_spec(s).unwrap())
        .collect()
}

#[test]
fn valuation_examples() {
    let q2 = FieldModel::padic(2).unwrap();
    assert_eq!(q2.valuation(&q2.int(12)), Some(2));
    let f2 = FieldModel::laurent(2).unwrap();
    assert_eq!(f2.valuation(&f2.parse("t^2/(1+t)").unwrap()), Some(2));
    for m in models() {
        assert_eq!(m.valuation(&m.one()), Some(0));
        assert_eq!(m.valuation(&m.uniformizer()), Some(1));
        assert_eq!(m.valuation(&m.zero()), None);
    }
}

#[test]
fn residue_examples() {
    let q2 = FieldModel::padic(2).unwrap();
    let r: Vec<String> = q2.enumerate_residues(2).iter().map(|x| q2.format(x)).collect();
    assert_eq!(r, ["0", "1", "2", "3"]);
    let f2 = FieldModel::laurent(2).unwrap();
    let expect: Vec<_> = ["0", "1", "t", "1+t"].iter().map(|s| f2.parse(s).unwrap()).collect();
    assert_eq!(f2.enumerate_residues(2), expect);
    assert_eq!(FieldModel::padic(3).unwrap().enumerate_residues(1).len(), 3);
}

#[test]
fn residues_are_pairwise_incongruent() {
    for f in models() {
        let q = f.residue_size() as u64;
        for m in 1..=8u32 {
            if q.pow(m) > 256 {
                break;
            }
            let r = f.enumerate_residues(m);
            assert_eq!(r.len() as u64, q.pow(m));
            for (i, a) in r.iter().enumerate() {
                assert!(f.valuation(a).map_or(true, |v| v >= 0));
                assert_eq!(&f.reduce(a, m), a);
                for b in &r[..i] {
                    assert!(f.valuation(&f.sub(a, b)).unwrap() < m as i64, "{} {}", f.format(a), f.format(b));
                }
            }
        }
    }
}

#[test]
fn embedding_examples() {
    let f2 = FieldModel::laurent(2).unwrap();
    let x = ExtensionDescriptor::new(&f2, 1, 2).unwrap();
    let y = x.embed(&f2.parse("t").unwrap()).unwrap();
    assert_eq!(y, x.ext().parse("s^2").unwrap());
    assert_eq!(x.ext().valuation(&y), Some(2));
    let x = ExtensionDescriptor::new(&f2, 2, 2).unwrap();
    let y = x.embed(&f2.parse("t/(1+t)").unwrap()).unwrap();
    assert_eq!(y, x.ext().parse("s^2/(1+s^2)").unwrap());
    assert_eq!(x.ext().valuation(&y), Some(2));
    assert!(ExtensionDescriptor::new(&FieldModel::padic(2).unwrap(), 2, 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn valuation_axioms(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for f in models() {
            let a = f.random(&mut rng, -4, 4, 3);
            let b = f.random(&mut rng, -4, 4, 3);
            let (va, vb) = (f.valuation(&a), f.valuation(&b));
            let prod = match (va, vb) {
                (Some(x), Some(y)) => Some(x + y),
                _ => None,
            };
            prop_assert_eq!(f.valuation(&f.mul(&a, &b)), prod);
            let vs = f.valuation(&f.add(&a, &b));
            let lo = btlat::field::vmin(va, vb);
            if let (Some(s), Some(l)) = (vs, lo) {
                prop_assert!(s >= l);
            }
            if va != vb {
                prop_assert_eq!(vs, lo);
            }
            // text syntax round trip
            prop_assert_eq!(f.parse(&f.format(&a)).unwrap(), a);
        }
    }

    #[test]
    fn embedding_is_an_injective_valuation_scaling_homomorphism(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = FieldModel::from_spec(["laurent:2", "laurent:3", "laurent:4"][rng.gen_range(0..3)]).unwrap();
        let x = ExtensionDescriptor::new(&base, rng.gen_range(1..4), rng.gen_range(1..4)).unwrap();
        let k = x.ext();
        let a = base.random(&mut rng, -3, 3, 3);
        let b = base.random(&mut rng, -3, 3, 3);
        let (ea, eb) = (x.embed(&a).unwrap(), x.embed(&b).unwrap());
        prop_assert_eq!(k.valuation(&ea), base.valuation(&a).map(|v| v * x.e() as i64));
        prop_assert_eq!(x.embed(&base.mul(&a, &b)).unwrap(), k.mul(&ea, &eb));
        prop_assert_eq!(x.embed(&base.add(&a, &b)).unwrap(), k.add(&ea, &eb));
        prop_assert_eq!(ea == eb, a == b);
        prop_assert_eq!(x.restrict(&ea), Some(a));
    }
}
