use btlat::autdecomp::{
    aut_order_formula, automorphism_from, automorphisms, check_rigidity, count_automorphisms, decompose_hom,
    label_action, normal_form, propagate_labels, AutWord, Generator, LabelPerm, ProductGraph,
};
use btlat::building::{Ball, BallOptions, BuildingDescriptor};
use btlat::{Error, FieldModel, Mat};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..n {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

/// Automorphisms by trying every bijection of the vertex set.
fn brute_automorphisms(g: &ProductGraph) -> Vec<Vec<usize>> {
    let n = g.len();
    permutations(n)
        .into_iter()
        .filter(|f| (0..n).all(|a| (0..n).all(|b| g.adjacent(a, b) == g.adjacent(f[a], f[b]))))
        .collect()
}

#[test]
fn identity_and_swap() {
    let g = ProductGraph::new(&[2, 3]).unwrap();
    let id: Vec<usize> = (0..6).collect();
    let h = decompose_hom(&g, &g, &id).unwrap();
    assert_eq!(h.mu, vec![0, 1]);
    assert_eq!(h.g, vec![vec![0, 1], vec![0, 1, 2]]);

    let sq = ProductGraph::new(&[2, 2]).unwrap();
    let all = brute_automorphisms(&sq);
    assert_eq!(all.len(), 8);
    let swap: Vec<usize> = (0..4).map(|k| {
        let t = sq.vertex(k);
        sq.index(&[t[1], t[0]])
    }).collect();
    assert!(all.contains(&swap));
    assert_eq!(decompose_hom(&sq, &sq, &swap).unwrap().mu, vec![1, 0]);
}

#[test]
fn aut_order_of_small_products_by_brute_force() {
    let g = ProductGraph::new(&[2, 3]).unwrap();
    assert_eq!(brute_automorphisms(&g).len(), 12);
    assert_eq!(automorphisms(&g, 100).unwrap().len(), 12);
    assert_eq!(count_automorphisms(&g).0, 12);
    let g = ProductGraph::new(&[2, 2, 2]).unwrap();
    let brute = brute_automorphisms(&g);
    assert_eq!(brute.len(), 48);
    assert_eq!(automorphisms(&g, 1000).unwrap(), brute.iter().cloned().collect::<std::collections::BTreeSet<_>>().into_iter().collect::<Vec<_>>());
}

fn size_tuples(max: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut stack = vec![Vec::new()];
    while let Some(t) = stack.pop() {
        let p: usize = t.iter().product();
        if !t.is_empty() {
            out.push(t.clone());
        }
        for a in 2..=max {
            if p * a <= max {
                let mut u = t.clone();
                u.push(a);
                stack.push(u);
            }
        }
    }
    out.sort();
    out
}

#[test]
fn exhaustive_decomposition_up_to_16_vertices() {
    for sizes in size_tuples(16) {
        let g = ProductGraph::new(&sizes).unwrap();
        let formula = aut_order_formula(&sizes);
        let (count, witnesses) = count_automorphisms(&g);
        assert_eq!(count, formula, "{sizes:?}");
        let list = if formula <= 50_000 { automorphisms(&g, 50_000).unwrap() } else { witnesses };
        if formula <= 50_000 {
            assert_eq!(list.len() as u128, formula, "{sizes:?}");
        }
        for f in &list {
            let h = decompose_hom(&g, &g, f).unwrap();
            let mut seen = h.mu.clone();
            seen.sort();
            assert_eq!(seen, (0..sizes.len()).collect::<Vec<_>>());
            for (i, &j) in h.mu.iter().enumerate() {
                assert_eq!(sizes[i], sizes[j]);
                let mut p = h.g[i].clone();
                p.sort();
                assert_eq!(p, (0..sizes[i]).collect::<Vec<_>>());
            }
            assert!(h.alpha.iter().all(|a| a.is_none()));
        }
    }
}

#[test]
fn decomposition_round_trip_on_random_automorphisms() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let r = rng.gen_range(1..=3);
        let sizes: Vec<usize> = (0..r).map(|_| rng.gen_range(2..=3)).collect();
        let g = ProductGraph::new(&sizes).unwrap();
        let mu = loop {
            let mut m: Vec<usize> = (0..r).collect();
            m.shuffle(&mut rng);
            if (0..r).all(|j| sizes[m[j]] == sizes[j]) {
                break m;
            }
        };
        let p: Vec<Vec<usize>> = sizes
            .iter()
            .map(|&a| {
                let mut v: Vec<usize> = (0..a).collect();
                v.shuffle(&mut rng);
                v
            })
            .collect();
        let f = automorphism_from(&g, &mu, &p);
        let h = decompose_hom(&g, &g, &f).unwrap();
        // output coordinate j = p_j(u_mu(j)), so source mu(j) goes to j
        for (j, &i) in mu.iter().enumerate() {
            assert_eq!(h.mu[i], j);
            assert_eq!(h.g[i], p[j]);
        }
    }
}

#[test]
fn injective_homomorphisms_into_larger_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let src = ProductGraph::new(&[2, 3]).unwrap();
    let dst = ProductGraph::new(&[3, 2, 4]).unwrap();
    for _ in 0..50 {
        // factor 0 (size 2) into coordinate 1 or 2, factor 1 (size 3) into 0 or 2
        let (m0, m1) = loop {
            let a = *[0usize, 1, 2].choose(&mut rng).unwrap();
            let b = *[0usize, 2].choose(&mut rng).unwrap();
            if a != b {
                break (a, b);
            }
        };
        let inj = |a: usize, b: usize, rng: &mut ChaCha8Rng| {
            let mut v: Vec<usize> = (0..b).collect();
            v.shuffle(rng);
            v.truncate(a);
            v
        };
        let g0 = inj(2, dst.sizes()[m0], &mut rng);
        let g1 = inj(3, dst.sizes()[m1], &mut rng);
        let free = 3 - m0 - m1;
        let alpha = rng.gen_range(0..dst.sizes()[free]);
        let f: Vec<usize> = (0..src.len())
            .map(|k| {
                let u = src.vertex(k);
                let mut y = vec![0; 3];
                y[m0] = g0[u[0]];
                y[m1] = g1[u[1]];
                y[free] = alpha;
                dst.index(&y)
            })
            .collect();
        let h = decompose_hom(&src, &dst, &f).unwrap();
        assert_eq!(h.mu, vec![m0, m1]);
        assert_eq!(h.g, vec![g0, g1]);
        assert_eq!(h.alpha[free], Some(alpha));
    }
}

#[test]
fn rejects_bad_maps() {
    let g = ProductGraph::new(&[2, 2]).unwrap();
    assert!(matches!(decompose_hom(&g, &g, &[0, 0, 1, 2]), Err(Error::NotInjective(..))));
    // the edge (0,0)-(0,1) is sent to the diagonal (0,0)-(1,1)
    assert!(matches!(decompose_hom(&g, &g, &[0, 3, 1, 2]), Err(Error::NotHomomorphism(..))));
}

fn ball(field: &str, d: usize, r: usize, radius: usize) -> Ball {
    let f = FieldModel::from_spec(field).unwrap();
    let desc = BuildingDescriptor::uniform(&f, d, r).unwrap();
    Ball::new(&desc, &desc.origin(), &BallOptions::full(radius)).unwrap()
}

fn random_gl(f: &FieldModel, n: usize, rng: &mut ChaCha8Rng) -> Mat {
    loop {
        let data = (0..n * n).map(|_| f.random(rng, 0, 1, 2)).collect();
        let m = Mat::from_vec(f, n, n, data);
        if !f.is_zero(&m.det()) {
            return m;
        }
    }
}

fn random_monomial(f: &FieldModel, n: usize, rng: &mut ChaCha8Rng) -> Mat {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    let mut m = Mat::zeros(f, n, n);
    for (j, &i) in p.iter().enumerate() {
        m.set(i, j, f.pi_pow(rng.gen_range(-2..=2)));
    }
    m
}

#[test]
fn label_action_examples() {
    let b = ball("laurent:2", 2, 1, 2);
    let desc = b.descriptor.clone();
    let f = desc.field(0).clone();
    let id = AutWord(vec![Generator::Group(vec![Mat::identity(&f, 3)])]);
    let la = label_action(&id, &b).unwrap();
    assert_eq!(la.kinds, vec![LabelPerm::Rotation(0)]);
    assert_eq!(la.signatures, vec![vec![1, 2]]);
    assert!(la.counterexample.is_none());

    let lam = AutWord(vec![Generator::Lambda(vec![true])]);
    let la = label_action(&lam, &b).unwrap();
    assert_eq!(la.kinds, vec![LabelPerm::Reflection(0)]);
    assert_eq!(la.signatures, vec![vec![2, 1]]);
    assert!(la.counterexample.is_none());

    let sh = AutWord(vec![Generator::Shift(0, 1)]);
    assert_eq!(label_action(&sh, &b).unwrap().kinds, vec![LabelPerm::Rotation(1)]);
}

#[test]
fn label_action_on_products() {
    let b = ball("padic:2", 2, 2, 2);
    let la = label_action(&AutWord(vec![Generator::Lambda(vec![true, true])]), &b).unwrap();
    assert_eq!(la.kinds, vec![LabelPerm::Reflection(0), LabelPerm::Reflection(0)]);
    let la = label_action(&AutWord(vec![Generator::Shift(1, 1)]), &b).unwrap();
    assert_eq!(la.kinds, vec![LabelPerm::Rotation(0), LabelPerm::Rotation(1)]);
    let la = label_action(&AutWord(vec![Generator::Exchange(vec![1, 0]), Generator::Lambda(vec![false, true])]), &b).unwrap();
    assert_eq!(la.mu, vec![1, 0]);
    assert_eq!(la.kinds, vec![LabelPerm::Rotation(0), LabelPerm::Reflection(0)]);
    assert!(la.counterexample.is_none());
}

#[test]
fn label_kinds_stable_under_group_elements() {
    let b = ball("laurent:2", 2, 1, 2);
    let f = b.descriptor.field(0).clone();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for base in [vec![], vec![Generator::Lambda(vec![true])]] {
        let w = AutWord(base);
        let (ga, gc) = btlat::autdecomp::restoring_element(&w, &b.descriptor).unwrap();
        let g0 = vec![gc[0].mul(&ga[0])];
        let reference = label_action(&w.then(Generator::Group(g0)), &b).unwrap().kinds[0];
        for _ in 0..5 {
            let h = random_gl(&f, 3, &mut rng);
            let pre = AutWord(vec![Generator::Group(vec![h])]).concat(&w);
            let (ga, gc) = btlat::autdecomp::restoring_element(&pre, &b.descriptor).unwrap();
            let g = vec![gc[0].mul(&ga[0])];
            let k = label_action(&pre.then(Generator::Group(g)), &b).unwrap().kinds[0];
            assert_eq!(k.is_reflection(), reference.is_reflection());
        }
    }
}

#[test]
fn normal_form_examples() {
    let b = ball("laurent:2", 2, 1, 2);
    let f = b.descriptor.field(0).clone();

    let nf = normal_form(&AutWord::identity(), &b).unwrap();
    assert_eq!(nf.g, vec![Mat::identity(&f, 3)]);
    assert_eq!(nf.mask, vec![false]);
    assert!(nf.violations.is_empty());

    let nf = normal_form(&AutWord(vec![Generator::Shift(0, 2)]), &b).unwrap();
    assert_eq!(nf.g, vec![BuildingDescriptor::shift_generator(&f, 2, -2)]);
    assert!(nf.violations.is_empty());
    assert!(nf.checked > 1);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let w = AutWord(vec![Generator::Lambda(vec![true]), Generator::Group(vec![random_monomial(&f, 3, &mut rng)])]);
        let nf = normal_form(&w, &b).unwrap();
        assert_eq!(nf.mask, vec![true]);
        assert!(nf.violations.is_empty(), "{:?}", nf.violations);
    }
    for _ in 0..5 {
        let w = AutWord(vec![Generator::Group(vec![random_gl(&f, 3, &mut rng)]), Generator::Lambda(vec![true])]);
        let nf = normal_form(&w, &b).unwrap();
        assert_eq!(nf.mask, vec![true]);
        assert!(nf.violations.is_empty(), "{:?}", nf.violations);
    }
}

#[test]
fn normal_form_on_products_with_exchange() {
    let b = ball("padic:3", 1, 2, 2);
    let f = b.descriptor.field(0).clone();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..5 {
        let w = AutWord(vec![
            Generator::Group(vec![random_gl(&f, 2, &mut rng), random_gl(&f, 2, &mut rng)]),
            Generator::Exchange(vec![1, 0]),
            Generator::Lambda(vec![true, false]),
        ]);
        let nf = normal_form(&w, &b).unwrap();
        assert_eq!(nf.mu, vec![1, 0]);
        // labels of a tree are Z/2, where reflections are rotations
        assert_eq!(nf.mask, vec![false, false]);
        assert!(nf.violations.is_empty(), "{:?}", nf.violations);
    }
}

#[test]
fn normal_form_needs_a_large_enough_window() {
    let b = ball("padic:2", 1, 2, 1);
    assert_eq!(
        normal_form(&AutWord::identity(), &b).unwrap_err(),
        Error::WindowTooSmall { required: 2, have: 1 }
    );
}

#[test]
fn word_json_round_trip() {
    let f = FieldModel::padic(3).unwrap();
    let desc = BuildingDescriptor::uniform(&f, 1, 2).unwrap();
    let w = AutWord(vec![
        Generator::Group(vec![Mat::from_ints(&f, 2, 2, &[1, 2, 0, 3]), Mat::identity(&f, 2)]),
        Generator::Lambda(vec![true, false]),
        Generator::Exchange(vec![1, 0]),
        Generator::Shift(1, -3),
    ]);
    let back = AutWord::parse_json(&desc, &w.to_json()).unwrap();
    assert_eq!(back, w);
    let bad = serde_json::json!([{"kind": "shift", "factor": 5, "power": 1}]);
    assert!(AutWord::parse_json(&desc, &bad).is_err());
}

#[test]
fn gallery_propagation_reproduces_labels() {
    for (field, d, r) in [("laurent:2", 1, 1), ("laurent:2", 2, 1), ("padic:2", 1, 2)] {
        let b = ball(field, d, r, 2);
        let p = propagate_labels(&b).unwrap();
        assert!(p.counterexample.is_none(), "{:?}", p.counterexample);
        assert_eq!(p.chambers, b.chamber_tuples.len());
        let covered: std::collections::HashSet<usize> =
            b.chamber_tuples.iter().flat_map(|t| b.chamber_vertices(t)).collect();
        assert_eq!(p.labelled, covered.len());
    }
}

#[test]
fn apartment_maps_are_determined_by_one_chamber() {
    let b = ball("padic:2", 2, 1, 2);
    let f = b.descriptor.field(0).clone();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..6 {
        let w = AutWord(vec![
            Generator::Group(vec![random_monomial(&f, 3, &mut rng)]),
            Generator::Lambda(vec![rng.gen()]),
            Generator::Shift(0, rng.gen_range(-2..=2)),
        ]);
        let rep = check_rigidity(&w, &b).unwrap();
        assert!(rep.counterexample.is_none(), "{:?}", rep.counterexample);
        assert!(rep.chambers > 1);
    }
    let b2 = ball("padic:2", 1, 2, 2);
    let w = AutWord(vec![Generator::Exchange(vec![1, 0]), Generator::Shift(0, 1)]);
    let rep = check_rigidity(&w, &b2).unwrap();
    assert!(rep.counterexample.is_none());
}
