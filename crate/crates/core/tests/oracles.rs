//! Checks against independent computations: replayed generators, sampled
//! images, frozen high-precision values and brute-force selection oracles.

use std::collections::BTreeSet;

use num_rational::Ratio;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dyadlab::complexity::{dimension_estimate, ComplexityProfile};
use dyadlab::dyadic::Direction;
use dyadlab::experiments::{half_information_check, lemma_stress, random_instance, BoundCurvePoint, Probe};
use dyadlab::fractal::{generate, sample_points, Ambient, CellSet, FractalSpec};
use dyadlab::geometry::{pinned_distance_cells, projection_cells};
use dyadlab::selection::{PairRelation, Predicate, SelectionInstance, TripleRelation, Violation};

/// Same stream construction as the library, written out from the
/// splitmix64 reference constants.
fn replay_stream(seed: u64, parts: &[u64]) -> ChaCha8Rng {
    let mut h: u64 = 0x9e37_79b9_7f4a_7c15;
    for &p in parts {
        h ^= p;
        h = h.wrapping_add(0x9e37_79b9_7f4a_7c15);
        h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h ^= h >> 31;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(h);
    rng
}

/// Cell count of a planar random tree, by depth-first recursion.
fn replay_tree_count(dim: f64, seed: u64, depth: u32, cell: [i64; 2], r: u32) -> u64 {
    if depth == r {
        return 1;
    }
    let keep = 2f64.powf(dim - 2.0);
    let mut rng = replay_stream(seed, &[depth as u64, cell[0] as u64, cell[1] as u64]);
    let mut mask = 0u32;
    for _ in 0..2 {
        mask = 0;
        for i in 0..4 {
            if rng.random::<f64>() < keep {
                mask |= 1 << i;
            }
        }
        if mask != 0 {
            break;
        }
    }
    if mask == 0 {
        mask = 1 << rng.random_range(0..4u32);
    }
    (0..4)
        .filter(|i| mask & (1 << i) != 0)
        .map(|i| replay_tree_count(dim, seed, depth + 1, [2 * cell[0] + (i >> 1), 2 * cell[1] + (i & 1)], r))
        .sum()
}

#[test]
fn random_tree_matches_replay() {
    let set = generate(&FractalSpec::RandomTree { dim: 1.0, ambient: Ambient::Plane, seed: 7 }, 12).unwrap();
    let replayed = replay_tree_count(1.0, 7, 0, [0, 0], 12);
    assert_eq!(set.len() as u64, replayed);
    let ratio = set.len() as f64 / 4096.0;
    assert!((0.5..=2.0).contains(&ratio), "N_12 = {}", set.len());
}

#[test]
fn three_of_four_tree_dimension() {
    let spec = FractalSpec::RandomTree { dim: 1.585, ambient: Ambient::Plane, seed: 3 };
    let set = generate(&spec, 16).unwrap();
    let rs: Vec<u32> = (6..=16).collect();
    let counts: Vec<f64> = rs.iter().map(|&r| (set.count_at(r).unwrap() as f64).log2()).collect();
    let n = rs.len() as f64;
    let mx = rs.iter().map(|&r| r as f64).sum::<f64>() / n;
    let my = counts.iter().sum::<f64>() / n;
    let sxy: f64 = rs.iter().zip(&counts).map(|(&r, c)| (r as f64 - mx) * (c - my)).sum();
    let sxx: f64 = rs.iter().map(|&r| (r as f64 - mx).powi(2)).sum();
    let fit = sxy / sxx;
    assert!((1.45..=1.72).contains(&fit), "{fit}");
    let est = dimension_estimate(&ComplexityProfile::of_set(&set, &rs).unwrap(), 6, 16).unwrap();
    assert!((est.slope - fit).abs() < 1e-12);
}

#[test]
fn random_tree_refines_consistently() {
    let spec = FractalSpec::RandomTree { dim: 0.7, ambient: Ambient::Line, seed: 21 };
    let fine = generate(&spec, 18).unwrap();
    for r in [4, 9, 13] {
        assert_eq!(fine.coarsen(r).unwrap(), generate(&spec, r).unwrap());
    }
}

/// Image cells hit by points sampled inside every cell, and the same set
/// widened by one cell on each side.
fn sampled_image(set: &CellSet, f: impl Fn([f64; 2]) -> f64, r: u32, per_cell: usize) -> (BTreeSet<i64>, BTreeSet<i64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let h = 2f64.powi(-(set.precision() as i32));
    let scale = 2f64.powi(r as i32);
    let mut hit = BTreeSet::new();
    for c in set.cells() {
        for k in 0..per_cell {
            let (a, b) = if k < 4 { ((k & 1) as f64, (k >> 1) as f64) } else { (rng.random(), rng.random()) };
            let y = if set.ambient() == Ambient::Line { 0.0 } else { (c[1] as f64 + b) * h };
            let p = [(c[0] as f64 + a) * h, y];
            hit.insert((f(p) * scale).floor() as i64);
        }
    }
    let widened = hit.iter().flat_map(|&m| [m - 1, m, m + 1]).collect();
    (hit, widened)
}

#[test]
fn conservative_images_agree_with_sampling() {
    let set = generate(&FractalSpec::mid_four_product(), 8).unwrap();
    let pin = [0.37, -0.21];
    let img: BTreeSet<i64> = pinned_distance_cells(&set, pin, 8).unwrap().cells().iter().map(|c| c[0]).collect();
    let (hit, widened) = sampled_image(&set, |p| (p[0] - pin[0]).hypot(p[1] - pin[1]), 8, 40);
    assert!(hit.is_subset(&img));
    assert!(img.is_subset(&widened));

    for turns in [0.0, 0.11, 0.3, 0.625] {
        let e = Direction::from_turns(turns).unwrap();
        let u = e.unit();
        let img: BTreeSet<i64> = projection_cells(&set, &e, 8).unwrap().cells().iter().map(|c| c[0]).collect();
        let (hit, widened) = sampled_image(&set, |p| p[0] * u[0] + p[1] * u[1], 8, 40);
        assert!(hit.is_subset(&img), "turns {turns}");
        assert!(img.is_subset(&widened), "turns {turns}");
    }
}

#[test]
fn frozen_curve_values() {
    // Evaluated with 30-digit arithmetic.
    let cases = [
        (0.1, 0.051249219725039286, 0.020168067226890756),
        (0.25, 0.132_782_218_537_318_7, 0.097_826_086_956_521_74),
        (0.75, 0.443_000_468_164_691_4, 0.508_064_516_129_032_3),
        (1.0, 0.618_033_988_749_894_9, 0.75),
    ];
    for (s, sw, fs) in cases {
        let p = BoundCurvePoint::at(s).unwrap();
        assert!((p.sw - sw).abs() < 1e-14, "s={s}");
        assert!((p.fs - fs).abs() < 1e-14, "s={s}");
        assert_eq!(p.ours, 0.75 * s);
    }
}

#[test]
fn digit_cantor_estimates_settle_with_depth() {
    let spec = FractalSpec::cantor(2, &[0, 1, 3]);
    let target = 3f64.log2() / 2.0;
    let mut last = f64::INFINITY;
    for r_max in (12..=24).step_by(2) {
        let set = generate(&spec, r_max).unwrap();
        let prof = ComplexityProfile::full(&set).unwrap();
        let est = dimension_estimate(&prof, r_max / 2, r_max).unwrap();
        let err = (est.slope - target).abs();
        assert!(err <= last + est.stderr, "r_max {r_max}: {err} after {last}");
        last = err;
    }
    assert!(last < 0.02);
}

#[test]
fn half_information_on_product() {
    let set = generate(&FractalSpec::mid_four_product(), 20).unwrap();
    let pins = sample_points(&set, 32, 8).unwrap();
    let mut slacks = Vec::new();
    for p in pins {
        let far = [p.to_vec2()[0] + 3.0, p.to_vec2()[1] - 2.0];
        let row = half_information_check(&set, Probe::Pin(far), 20, 10).unwrap();
        assert!((row.rhs - 5.0).abs() < 1e-12);
        assert!(row.lhs.is_finite());
        slacks.push(row.slack);
    }
    assert_eq!(slacks.len(), 32);
}

fn brute_pairs<R: dyadlab::selection::Similarity>(inst: &SelectionInstance<R>) -> Vec<(usize, usize)> {
    let threshold = inst.alpha() * inst.alpha() * Ratio::from(inst.x_len() as u64) / Ratio::from(2);
    let mut out = Vec::new();
    for u in 0..inst.v_len() {
        for v in 0..inst.v_len() {
            let w = inst
                .neighborhood(u)
                .iter()
                .filter(|d| inst.neighborhood(v).contains(d) && !inst.relation().similar(**d as usize, u, v))
                .count();
            if Ratio::from(w as u64) > threshold {
                out.push((u, v));
            }
        }
    }
    out
}

#[test]
fn clique_partition_finds_cross_pair() {
    // 12 elements in cliques of 2; cap (1/4)/4 * 12 = 0.75 < 2 would fail,
    // so use alpha = 1 - 1/10 where the cap is 2.43.
    let v_len = 12;
    let alpha = Ratio::new(9, 10);
    let inst = SelectionInstance::new(8, vec![(0..8).collect(); v_len], alpha, Predicate(|_, u: usize, v: usize| u / 2 == v / 2))
        .unwrap();
    assert!(inst.verify_hypotheses().is_ok());
    let cert = inst.find_pair().unwrap();
    assert_ne!(cert.u / 2, cert.v / 2);
    assert_eq!((cert.u, cert.v, cert.witnesses), (0, 2, 8));
    assert!(cert.recount(&inst));
    assert_eq!(inst.single_relation_pair().unwrap(), Some((0, 2, 8)));
}

#[test]
fn single_element_violation_is_skipped() {
    let x = 10;
    let full: Vec<u32> = (0..10).collect();
    let mut hoods = vec![full.clone(); 8];
    hoods[5] = (0..4).collect();
    let inst = SelectionInstance::new(x, hoods, Ratio::new(1, 2), PairRelation::new(8)).unwrap();
    assert_eq!(inst.verify_hypotheses(), Err(Violation::SmallNeighborhood { v: 5, size: 4 }));

    let mut rel = TripleRelation::new(x, 8);
    rel.insert(3, 0, 2).unwrap();
    // cap (1/4)/4 * 8 = 0.5, so a single similar element already breaks it.
    let inst = SelectionInstance::new(x, vec![full; 8], Ratio::new(1, 2), rel).unwrap();
    assert_eq!(inst.verify_hypotheses(), Err(Violation::TooManySimilar { v: 2, d: 3, count: 1 }));
}

#[test]
fn large_seeded_instances() {
    let s = lemma_stress(300, 200, 200, 17);
    assert!(s.counterexamples.is_empty(), "{s}");
    assert!(s.passed > 200, "{s}");
}

#[test]
fn text_format_round_trip_preserves_answers() {
    for i in 0..40 {
        let inst = random_instance(4, i, 12, 9);
        let back: SelectionInstance<TripleRelation> = inst.to_text().parse().unwrap();
        assert_eq!(back.to_text(), inst.to_text());
        assert_eq!(back.find_pair(), inst.find_pair());
        assert_eq!(back.verify_hypotheses(), inst.verify_hypotheses());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn duplicating_the_ground_set_doubles_witnesses(seed in 0u64..1000) {
        let inst = random_instance(seed, 0, 15, 15);
        let x = inst.x_len();
        let doubled_hoods: Vec<Vec<u32>> = (0..inst.v_len())
            .map(|v| {
                let mut n: Vec<u32> = inst.neighborhood(v).iter().flat_map(|&d| [d, d + x as u32]).collect();
                n.sort_unstable();
                n
            })
            .collect();
        let mut rel = TripleRelation::new(2 * x, inst.v_len());
        for (d, u, v) in inst.relation().triples() {
            rel.insert(d, u, v).unwrap();
            rel.insert(d + x, u, v).unwrap();
        }
        let doubled = SelectionInstance::new(2 * x, doubled_hoods, inst.alpha(), rel).unwrap();
        prop_assert_eq!(doubled.verify_hypotheses().is_ok(), inst.verify_hypotheses().is_ok());
        let a: Vec<_> = inst.qualifying_pairs().iter().map(|c| (c.u, c.v, 2 * c.witnesses)).collect();
        let b: Vec<_> = doubled.qualifying_pairs().iter().map(|c| (c.u, c.v, c.witnesses)).collect();
        prop_assert_eq!(a, b);
        if let Some(c) = doubled.find_pair() {
            prop_assert!(c.recount(&doubled));
        }
    }

    #[test]
    fn engine_matches_brute_force(seed in 0u64..5000) {
        let inst = random_instance(seed, 1, 10, 10);
        let engine: Vec<_> = inst.qualifying_pairs().iter().map(|c| (c.u, c.v)).collect();
        prop_assert_eq!(engine, brute_pairs(&inst));
    }
}
