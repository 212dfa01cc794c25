use carshare_core::ahp::saaty_scale;
use carshare_core::fleet::{RatingSummary, VehicleId};
use carshare_core::rank::{
    criterion_scores, explain, rank_vehicles, Candidate, PreferenceProfile, RankError, RankMode, MAX_CRITERIA,
};
use carshare_oracle::brute_force_ahp;
use proptest::prelude::*;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rated(id: &str, means: (f64, f64, f64)) -> Candidate {
    Candidate::new(
        VehicleId::new(id),
        RatingSummary {
            count: 4,
            mean_comfort: means.0,
            mean_consumption: means.1,
            mean_safety: means.2,
            overall: (means.0 + means.1 + means.2) / 3.0,
        },
    )
}

fn random_fleet(rng: &mut impl Rng, n: usize) -> Vec<Candidate> {
    (0..n)
        .map(|i| {
            if rng.random_bool(0.1) {
                Candidate::new(VehicleId(format!("v{i:05}")), RatingSummary::unrated())
            } else {
                // Means of 1..=5 integer ratings are multiples of 1/count.
                let count = rng.random_range(1..=12u64);
                let total = |rng: &mut dyn rand::RngCore| rng.random_range(count..=5 * count);
                let (c, u, s) = (total(rng), total(rng), total(rng));
                Candidate::new(VehicleId(format!("v{i:05}")), RatingSummary::from_totals(count, c, u, s))
            }
        })
        .collect()
}

fn random_profile(rng: &mut impl Rng) -> PreferenceProfile {
    let names = ["performance", "consumption", "security"];
    let k = rng.random_range(1..=3);
    let scale = saaty_scale();
    let judgments = (0..k * (k - 1) / 2).map(|_| *scale.choose(rng).unwrap()).collect();
    PreferenceProfile::new(names[..k].iter().map(|s| s.to_string()).collect(), judgments).unwrap()
}

#[test]
fn three_vehicle_example_matches_brute_force() {
    let fleet = [rated("a", (5.0, 3.0, 3.0)), rated("b", (3.0, 5.0, 3.0)), rated("c", (3.0, 3.0, 5.0))];
    let judgments = [2.0, 4.0, 2.0];
    let prefs = PreferenceProfile::new(
        vec!["performance".into(), "consumption".into(), "security".into()],
        judgments.to_vec(),
    )
    .unwrap();
    let scores = vec![vec![5.0, 3.0, 3.0], vec![3.0, 5.0, 3.0], vec![3.0, 3.0, 5.0]];
    let oracle = brute_force_ahp(&judgments, &scores);
    // Criteria weights 4/7, 2/7, 1/7 against locals (5,3,3)/11 etc.
    let expected = [29.0 / 77.0, 25.0 / 77.0, 23.0 / 77.0];
    for (o, e) in oracle.iter().zip(expected) {
        assert!((o - e).abs() < 1e-9);
    }
    for mode in [RankMode::Matrix, RankMode::Fast] {
        let list = rank_vehicles(&fleet, &prefs, mode).unwrap();
        let ids: Vec<_> = list.ids().map(VehicleId::as_str).collect();
        assert_eq!(ids, ["a", "b", "c"]);
        for (entry, o) in list.entries.iter().zip(&oracle) {
            assert!((entry.global_score - o).abs() < 1e-9, "{mode:?}");
        }
        assert!(list.consistency.acceptable);
    }
}

#[test]
fn random_fleets_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..30 {
        let n = rng.random_range(1..=25);
        let fleet = random_fleet(&mut rng, n);
        let prefs = random_profile(&mut rng);
        let scores: Vec<Vec<f64>> = prefs
            .criteria()
            .iter()
            .map(|c| criterion_scores(&fleet, c).unwrap())
            .collect();
        let oracle = brute_force_ahp(prefs.judgments(), &scores);
        let list = rank_vehicles(&fleet, &prefs, RankMode::Matrix).unwrap();
        for (i, c) in fleet.iter().enumerate() {
            let got = list.entry(&c.vehicle_id).unwrap().global_score;
            assert!((got - oracle[i]).abs() < 1e-9, "{got} vs {}", oracle[i]);
        }
    }
}

#[test]
fn modes_agree_on_large_fleets() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for n in [1, 2, 50, 200, 500] {
        let fleet = random_fleet(&mut rng, n);
        let prefs = random_profile(&mut rng);
        let m = rank_vehicles(&fleet, &prefs, RankMode::Matrix).unwrap();
        let f = rank_vehicles(&fleet, &prefs, RankMode::Fast).unwrap();
        for (a, b) in m.entries.iter().zip(&f.entries) {
            assert!((a.global_score - b.global_score).abs() < 1e-9);
        }
        let total: f64 = f.entries.iter().map(|e| e.global_score).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
}

#[test]
fn explain_rows_sum_to_global_score() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let fleet = random_fleet(&mut rng, 50);
    let list = rank_vehicles(&fleet, &PreferenceProfile::default_profile(), RankMode::Matrix).unwrap();
    for entry in &list.entries {
        let rows = explain(&list, &entry.vehicle_id).unwrap();
        assert_eq!(rows.len(), 3);
        let total: f64 = rows.iter().map(|r| r.contribution).sum();
        assert!((total - entry.global_score).abs() < 1e-12);
        for r in &rows {
            assert_eq!(r.contribution, r.weight * r.local_priority);
        }
    }
}

#[test]
fn criteria_cap() {
    let names: Vec<String> = ["performance", "consumption", "security", "range", "boot", "noise", "seats", "age"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let eight = PreferenceProfile::new(names.clone(), vec![1.0; 28]);
    assert_eq!(eight, Err(RankError::TooManyCriteria { count: 8, max: MAX_CRITERIA }));

    let seven = PreferenceProfile::new(names[..7].to_vec(), vec![2.0; 21]).unwrap();
    let fleet: Vec<Candidate> = (0..5)
        .map(|i| {
            let base = rated(&format!("v{i}"), (1.0 + i as f64, 2.0, 3.0));
            names[3..7]
                .iter()
                .fold(base, |c, name| c.with_attribute(name, 1.0 + ((i * 3) % 5) as f64))
        })
        .collect();
    let list = rank_vehicles(&fleet, &seven, RankMode::Matrix).unwrap();
    assert_eq!(list.entries.len(), 5);
    assert_eq!(list.criteria_weights.len(), 7);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn input_order_does_not_matter(seed in any::<u64>(), n in 1usize..80) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fleet = random_fleet(&mut rng, n);
        let prefs = random_profile(&mut rng);
        let mut shuffled = fleet.clone();
        shuffled.shuffle(&mut rng);
        for mode in [RankMode::Matrix, RankMode::Fast] {
            prop_assert_eq!(
                rank_vehicles(&fleet, &prefs, mode).unwrap().entries,
                rank_vehicles(&shuffled, &prefs, mode).unwrap().entries
            );
        }
    }

    #[test]
    fn raising_a_score_never_lowers_the_global(seed in any::<u64>(), n in 2usize..40, bump in 0.01f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fleet = random_fleet(&mut rng, n);
        let prefs = random_profile(&mut rng);
        let target = rng.random_range(0..n);
        let before = rank_vehicles(&fleet, &prefs, RankMode::Fast).unwrap();
        let r = &mut fleet[target].ratings;
        if r.mean_comfort + bump > 5.0 {
            return Ok(());
        }
        r.mean_comfort += bump;
        let after = rank_vehicles(&fleet, &prefs, RankMode::Fast).unwrap();
        let id = &fleet[target].vehicle_id;
        let (b, a) = (before.entry(id).unwrap().global_score, after.entry(id).unwrap().global_score);
        prop_assert!(a >= b - 1e-15);
        if before.criteria_weights[0] > 0.0 {
            prop_assert!(a > b);
        }
    }

    #[test]
    fn uniform_scaling_of_one_criterion_is_absorbed(seed in any::<u64>(), n in 1usize..40, c in 1.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fleet: Vec<Candidate> = random_fleet(&mut rng, n)
            .into_iter()
            .map(|cand| cand.with_attribute("range", rng.random_range(1.0..2.5)))
            .collect();
        let scaled: Vec<Candidate> = fleet
            .iter()
            .map(|cand| {
                let v = cand.attributes["range"] * c;
                cand.clone().with_attribute("range", v)
            })
            .collect();
        let prefs = PreferenceProfile::new(vec!["comfort".into(), "range".into()], vec![3.0]).unwrap();
        let a = rank_vehicles(&fleet, &prefs, RankMode::Fast).unwrap();
        let b = rank_vehicles(&scaled, &prefs, RankMode::Fast).unwrap();
        for (x, y) in a.entries.iter().zip(&b.entries) {
            prop_assert_eq!(&x.vehicle_id, &y.vehicle_id);
            prop_assert!((x.global_score - y.global_score).abs() < 1e-12);
        }
    }
}
