use masterfield::corpus::random_loop;
use masterfield::planar::{
    braid_act, build_graph, lasso_basis, lasso_basis_with, winding, BraidWord, Invertible,
    LassoWord, Loop, Orientation, Step, TreePolicy,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEPS: [Step; 4] = [Step::N, Step::E, Step::S, Step::W];

fn closed_word() -> impl Strategy<Value = Vec<Step>> {
    prop::collection::vec(0usize..4, 0..=20)
        .prop_flat_map(|idx| {
            let mut steps: Vec<Step> = idx.iter().map(|&i| STEPS[i]).collect();
            let (x, y) = steps.iter().fold((0i64, 0i64), |(x, y), s| {
                let (dx, dy) = s.delta();
                (x + dx, y + dy)
            });
            let h = if x > 0 { Step::W } else { Step::E };
            let v = if y > 0 { Step::S } else { Step::N };
            steps.extend(std::iter::repeat_n(h, x.unsigned_abs() as usize));
            steps.extend(std::iter::repeat_n(v, y.unsigned_abs() as usize));
            let n = steps.len();
            (Just(steps), 0..n.max(1))
        })
        .prop_map(|(mut steps, r)| {
            steps.rotate_left(r);
            steps
        })
}

fn erase_randomly(mut steps: Vec<Step>, seed: u64) -> Vec<Step> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let spots: Vec<usize> = (0..steps.len().saturating_sub(1))
            .filter(|&i| steps[i + 1] == steps[i].inverse())
            .collect();
        if spots.is_empty() {
            return steps;
        }
        let i = spots[rng.random_range(0..spots.len())];
        steps.drain(i..i + 2);
    }
}

fn loop_strategy() -> impl Strategy<Value = Loop> {
    (1usize..=10, any::<u64>())
        .prop_map(|(half, seed)| random_loop(half, &mut ChaCha8Rng::seed_from_u64(seed)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn reduction_is_confluent(steps in closed_word(), seed in any::<u64>()) {
        let l = Loop::from_steps(steps.clone()).unwrap();
        let leftmost = l.reduce();
        prop_assert!(leftmost.is_reduced());
        let erased = erase_randomly(steps, seed);
        prop_assert_eq!(leftmost.steps(), erased.as_slice());
        prop_assert_eq!(leftmost.reduce(), leftmost);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn euler_relation(l in loop_strategy()) {
        prop_assume!(!l.is_empty());
        let g = build_graph(std::slice::from_ref(&l)).unwrap();
        prop_assert_eq!(g.euler_characteristic(), 1);
        for f in g.faces() {
            prop_assert!(f.area > 0);
            prop_assert_eq!(g.face_cells(f.id).len() as i64, f.area);
        }
    }

    #[test]
    fn decompose_round_trip_and_winding(l in loop_strategy(), reversed in any::<bool>(), cw in any::<bool>()) {
        prop_assume!(!l.is_empty());
        let g = build_graph(std::slice::from_ref(&l)).unwrap();
        let policy = if reversed { TreePolicy::REVERSED } else { TreePolicy::STANDARD };
        let orientation = if cw { Orientation::Clockwise } else { Orientation::Anticlockwise };
        let basis = lasso_basis_with(&g, policy, orientation);
        prop_assert_eq!(basis.len(), g.faces().len());
        let w = basis.decompose(&l).unwrap();
        prop_assert_eq!(basis.substitute(&w), l.clone());
        let ab = w.abelianize(basis.len());
        let sign = if cw { -1 } else { 1 };
        for (i, lasso) in basis.lassos().iter().enumerate() {
            let face = g.face(lasso.face_id);
            prop_assert_eq!(ab[i] * sign, winding(&l, face));
            prop_assert_eq!(lasso.signed_area() * sign, face.area);
            prop_assert!(lasso.to_loop().is_reduced());
        }
    }

    #[test]
    fn braided_basis_is_free_basis(l in loop_strategy(), gens in prop::collection::vec(-3i32..=3, 0..=4)) {
        prop_assume!(!l.is_empty());
        let basis = lasso_basis(&build_graph(std::slice::from_ref(&l)).unwrap());
        let n = basis.len();
        prop_assume!(n >= 2);
        let gens: Vec<i32> = gens.into_iter().filter(|g| *g != 0 && g.unsigned_abs() < n as u32).collect();
        let b = BraidWord::from_signed(n, &gens).unwrap();
        let c: Vec<LassoWord> = (0..n).map(LassoWord::generator).collect();
        let braided = braid_act(&b, &c).unwrap();
        let back = braid_act(&b.inverse(), &c).unwrap();
        for (i, img) in back.iter().enumerate() {
            prop_assert_eq!(img.substitute(&braided), LassoWord::generator(i));
        }
        let loops: Vec<Loop> = basis.lassos().iter().map(|x| x.to_loop()).collect();
        let braided_loops = braid_act(&b, &loops).unwrap();
        let perm = b.permutation();
        for (j, bl) in braided_loops.iter().enumerate() {
            let w = basis.decompose(bl).unwrap();
            prop_assert_eq!(&w, &braided[j]);
            let ab = w.abelianize(n);
            let mut expected = vec![0; n];
            expected[perm[j]] = 1;
            prop_assert_eq!(ab, expected);
        }
    }
}

#[test]
fn decompose_round_trip_200_random_loops() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    while checked < 200 {
        let l = random_loop(rng.random_range(1..=12), &mut rng);
        if l.is_empty() {
            continue;
        }
        assert!(l.len() <= 24);
        let basis = lasso_basis(&build_graph(std::slice::from_ref(&l)).unwrap());
        let w = basis.decompose(&l).unwrap();
        assert_eq!(basis.substitute(&w), l);
        checked += 1;
    }
}
