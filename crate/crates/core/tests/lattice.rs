use btlat::field::{FieldElement, FieldModel};
use btlat::lattice::{canonical_form, gaussian_binomial, index, VertexClass};
use btlat::matrix::Mat;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

fn random_invertible<R: Rng>(rng: &mut R, f: &FieldModel, n: usize) -> Mat {
    loop {
        let m = Mat::from_vec(f, n, n, (0..n * n).map(|_| f.random(rng, -2, 3, 2)).collect());
        if !f.is_zero(&m.det()) {
            return m;
        }
    }
}

/// A random element of GL_n(O) built from elementary column operations.
fn random_unimodular<R: Rng>(rng: &mut R, f: &FieldModel, n: usize) -> Mat {
    let mut u = Mat::identity(f, n);
    for _ in 0..3 * n {
        let (j, k) = (rng.gen_range(0..n), rng.gen_range(0..n));
        match rng.gen_range(0..3) {
            0 if j != k => u.add_col(j, k, &f.random(rng, 0, 2, 2)),
            1 => u.swap_cols(j, k),
            _ => {
                let mut c = f.random(rng, 0, 0, 2);
                if f.is_zero(&c) {
                    c = f.one();
                }
                u.scale_col(j, &c);
            }
        }
    }
    u
}

fn check_canonical(f: &FieldModel, c: &Mat) {
    let n = c.rows();
    let mut a = Vec::new();
    for i in 0..n {
        for j in 0..i {
            assert!(f.is_zero(c.get(i, j)));
        }
        let v = f.valuation(c.get(i, i)).unwrap();
        assert!(v >= 0);
        assert_eq!(c.get(i, i), &f.pi_pow(v));
        a.push(v);
    }
    // homothety normalization: inside O^n but not inside pi O^n
    assert_eq!(c.min_val(), Some(0));
    for i in 0..n {
        for j in i + 1..n {
            assert_eq!(&f.reduce(c.get(i, j), a[i] as u32), c.get(i, j));
        }
    }
}

/// The image of the lattice in (O/pi^m)^n, by enumerating coefficients.
fn image_mod(f: &FieldModel, m: &Mat, depth: u32) -> BTreeSet<Vec<FieldElement>> {
    let n = m.rows();
    let res = f.enumerate_residues(depth);
    btlat::building::product(&vec![res.len(); m.cols()])
        .into_iter()
        .map(|idx| {
            (0..n)
                .map(|i| {
                    let s = (0..m.cols()).fold(f.zero(), |acc, j| f.add(&acc, &f.mul(&res[idx[j]], m.get(i, j))));
                    f.reduce(&s, depth)
                })
                .collect()
        })
        .collect()
}

#[test]
fn canonical_examples() {
    let f = FieldModel::padic(2).unwrap();
    let m = Mat::from_ints(&f, 2, 2, &[1, 0, 1, 2]);
    let c = canonical_form(&m).unwrap();
    check_canonical(&f, &c);
    assert_eq!(image_mod(&f, &m, 3), image_mod(&f, &c, 3));
    assert!(canonical_form(&Mat::zeros(&f, 2, 2)).is_err());
}

#[test]
fn index_is_additive_in_towers() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for f in [FieldModel::padic(3).unwrap(), FieldModel::laurent(2).unwrap()] {
        for n in 1..4 {
            for _ in 0..20 {
                let m = random_invertible(&mut rng, &f, n);
                let integral = |rng: &mut ChaCha8Rng| loop {
                    let a = Mat::from_vec(&f, n, n, (0..n * n).map(|_| f.random(rng, 0, 2, 2)).collect());
                    if !f.is_zero(&a.det()) {
                        return a;
                    }
                };
                let l = m.mul(&integral(&mut rng));
                let k = l.mul(&integral(&mut rng));
                let (ml, lk, mk) = (index(&m, &l).unwrap(), index(&l, &k).unwrap(), index(&m, &k).unwrap());
                assert_eq!(ml + lk, mk);
                assert_eq!(ml, f.valuation(&f.div(&l.det(), &m.det())).unwrap());
            }
        }
    }
}

#[test]
fn gaussian_counts_symmetry_and_unimodality() {
    for q in [2u32, 3] {
        let f = FieldModel::laurent(q).unwrap();
        for d in 1..=3usize {
            let o = VertexClass::standard(&f, d + 1);
            let counts: Vec<u128> = (1..=d).map(|w| o.neighbors_by_colength(w).unwrap().len() as u128).collect();
            for w in 1..=d {
                assert_eq!(counts[w - 1], gaussian_binomial(d as u32 + 1, w as u32, q as u64));
                assert_eq!(counts[w - 1], counts[d - w]);
            }
            for w in 1..(d + 1) / 2 {
                assert!(counts[w - 1] < counts[w]);
            }
            if d == 1 {
                assert_eq!(counts[0], q as u128 + 1);
            }
        }
    }
}

#[test]
fn neighbor_labels_shift_by_colength() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for f in [FieldModel::padic(2).unwrap(), FieldModel::laurent(3).unwrap()] {
        for d in 1..=3usize {
            let v = VertexClass::from_basis(&random_invertible(&mut rng, &f, d + 1)).unwrap();
            for w in 1..=d {
                let ns = v.neighbors_by_colength(w).unwrap();
                let distinct: BTreeSet<_> = ns.iter().collect();
                assert_eq!(distinct.len(), ns.len());
                for x in &ns {
                    assert_eq!(x.label(), (v.label() + w) % (d + 1));
                    assert!(v.is_adjacent(x));
                }
            }
        }
    }
}

#[test]
fn dual_pairs_to_a_unimodular_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for f in [FieldModel::padic(3).unwrap(), FieldModel::laurent(2).unwrap()] {
        for n in 2..=4 {
            for _ in 0..20 {
                let v = VertexClass::from_basis(&random_invertible(&mut rng, &f, n)).unwrap();
                let w = v.dual();
                assert_eq!(w.dual(), v);
                assert_eq!((w.label() + v.label()) % n, 0);
                // <L*, L> is O up to homothety: the Gram matrix is a unit times pi^k
                let g = w.matrix().transpose().mul(v.matrix());
                let k = g.min_val().unwrap();
                let det = f.valuation(&g.det()).unwrap();
                assert_eq!(det, k * n as i64);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn canonical_form_is_stable(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = FieldModel::from_spec(["padic:2", "padic:3", "laurent:2", "laurent:4"][rng.gen_range(0..4)]).unwrap();
        let n = rng.gen_range(1..5);
        let m = random_invertible(&mut rng, &f, n);
        let c = canonical_form(&m).unwrap();
        check_canonical(&f, &c);
        prop_assert_eq!(canonical_form(&c).unwrap(), c.clone());
        let u = random_unimodular(&mut rng, &f, n);
        let mut s = f.random(&mut rng, -3, 3, 2);
        if f.is_zero(&s) {
            s = f.uniformizer();
        }
        prop_assert_eq!(canonical_form(&m.mul(&u).scale(&s)).unwrap(), c);
    }
}
