mod support;

use binpack::builder::build_model;
use binpack::checker::{self, ViolationKind};
use binpack::model::{BinSpec, Instance, Placement, Solution};
use binpack::presolve::{apply_associations, presolve};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::*;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn model_objective_equals_checker_objective(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, &RandomConfig::small());
        let Ok(model) = build_model(&inst) else { return Ok(()) };
        for _ in 0..20 {
            let sol = random_geometry(&mut r, &inst, 0.1);
            let by_model = model.evaluate(&encode(&model, &inst, &sol)).objective;
            let by_checker = checker::evaluate(&inst, &sol).objective;
            prop_assert!(close(by_model, by_checker), "{by_model} vs {by_checker}");
        }
    }

    #[test]
    fn presolve_keeps_feasible_geometries(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, &RandomConfig::small());
        let Ok(raw) = build_model(&inst) else { return Ok(()) };
        let mut reduced = raw.clone();
        let presolved = presolve(&mut reduced, &inst).is_ok();
        for _ in 0..50 {
            let sol = random_geometry(&mut r, &inst, 0.1);
            let feasible = checker::check(&inst, &sol).unwrap().feasible;
            if feasible {
                prop_assert!(presolved);
                prop_assert!(reduced.evaluate(&encode(&reduced, &inst, &sol)).is_satisfied());
            }
            if presolved {
                prop_assert_eq!(
                    feasible,
                    reduced.evaluate(&encode(&reduced, &inst, &sol)).is_satisfied()
                );
            }
        }
    }

    #[test]
    fn association_fixings_match_counts(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, &RandomConfig::small());
        let Ok(mut model) = build_model(&inst) else { return Ok(()) };
        let n = inst.bin_count();
        let before = model.free_count();
        let report = apply_associations(&mut model, &inst).unwrap();
        let eligible = |c| (0..n).filter(|&j| inst.is_eligible(c, j)).count();
        let zeros: usize = inst.items().iter().map(|it| n - eligible(it.category)).sum();
        let ones = inst.items().iter().filter(|it| eligible(it.category) == 1).count();
        prop_assert_eq!(report.fixed_to_zero, zeros);
        prop_assert_eq!(report.fixed_to_one, ones);
        prop_assert_eq!(report.formula_count, zeros);
        prop_assert_eq!(model.free_count(), before - zeros - ones);
    }

    #[test]
    fn constraint_rows_follow_instance_shape(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, &RandomConfig::small());
        let Ok(model) = build_model(&inst) else { return Ok(()) };
        let (m, n, d) = (inst.item_count(), inst.bin_count(), inst.dimensionality().count());
        let pairs = m * (m - 1) / 2;
        let q_count = [2, 4, 6][d - 1];
        let oriented = inst
            .items()
            .iter()
            .filter(|it| !binpack::model::orientation_set(it, inst.dimensionality()).is_empty())
            .count();
        let capacities = inst.bins().iter().filter(|b| b.capacity.is_some()).count();
        let items = inst.items();
        let incompatible = (0..m)
            .flat_map(|i| (i + 1..m).map(move |k| (i, k)))
            .filter(|&(i, k)| inst.are_incompatible(items[i].category, items[k].category))
            .count();
        let expected = m
            + m * n
            + oriented
            + pairs
            + m * n
            + m * (n - 1)
            + (d - 1) * m * n
            + capacities
            + pairs * n * q_count
            + incompatible * n;
        prop_assert_eq!(model.constraints().len(), expected);
    }

    #[test]
    fn build_is_deterministic(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, &RandomConfig::small());
        let (Ok(a), Ok(b)) = (build_model(&inst), build_model(&inst)) else { return Ok(()) };
        prop_assert_eq!(a.constraints(), b.constraints());
        prop_assert_eq!(a.objective(), b.objective());
        let names = |m: &binpack::model::QuadraticModel| {
            m.variables().map(|(_, v)| v.key.to_string()).collect::<Vec<_>>()
        };
        prop_assert_eq!(names(&a), names(&b));
    }

    #[test]
    fn local_positions_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, &RandomConfig::small());
        let sol = random_geometry(&mut r, &inst, 0.1);
        let locals: Vec<Placement> = (0..inst.item_count())
            .map(|i| Placement { position: sol.local_position(&inst, i), ..sol.placements[i].clone() })
            .collect();
        prop_assert_eq!(Solution::from_local(&inst, locals, sol.bins_used.clone()), sol);
    }

    #[test]
    fn unused_bin_rejects_its_items(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, &RandomConfig::small());
        let mut sol = random_geometry(&mut r, &inst, 0.0);
        let j = sol.placements[0].bin;
        sol.bins_used[j] = false;
        let report = checker::check(&inst, &sol).unwrap();
        prop_assert!(!report.feasible);
        prop_assert!(report.count(ViolationKind::Assignment) >= 1);
    }

    #[test]
    fn reversing_bins_preserves_feasibility(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, &RandomConfig::small());
        let n = inst.bin_count();
        let mut spec = inst.to_spec();
        spec.bins.reverse();
        for bins in spec.associations.values_mut() {
            for j in bins.iter_mut() {
                *j = n - 1 - *j;
            }
            bins.sort_unstable();
        }
        let Ok(mirror) = Instance::new(spec) else { return Ok(()) };
        for _ in 0..30 {
            let sol = random_geometry(&mut r, &inst, 0.1);
            let moved: Vec<Placement> = (0..inst.item_count())
                .map(|i| Placement {
                    bin: n - 1 - sol.placements[i].bin,
                    position: sol.local_position(&inst, i),
                    ..sol.placements[i].clone()
                })
                .collect();
            let used: Vec<bool> = sol.bins_used.iter().rev().copied().collect();
            let flipped = Solution::from_local(&mirror, moved, used);
            let a = checker::check(&inst, &sol).unwrap();
            let b = checker::check(&mirror, &flipped).unwrap();
            prop_assert_eq!(a.feasible, b.feasible);
            prop_assert_eq!(a.violations.len(), b.violations.len());
        }
    }

    #[test]
    fn empty_instance_is_trivially_packed(dims in prop::collection::vec(1u32..50, 1..=3), n in 1usize..4) {
        let d = binpack::model::Dimensionality::from_count(dims.len() as u8).unwrap();
        let inst = Instance::without_items(
            d,
            vec![BinSpec { dims: dims.clone(), capacity: None }; n],
        ).unwrap();
        let sol = Solution::new(Vec::new(), vec![false; n]);
        prop_assert!(checker::check(&inst, &sol).unwrap().feasible);
        prop_assert_eq!(checker::evaluate(&inst, &sol).objective, 0.0);
    }
}

#[test]
fn separated_pair_satisfies_model_and_checker() {
    let mut r = rng(11);
    let cfg = RandomConfig {
        features: false,
        ..RandomConfig::small()
    };
    let mut checked = 0;
    while checked < 200 {
        let inst = random_instance(&mut r, &cfg);
        let sol = random_geometry(&mut r, &inst, 0.0);
        if !checker::check(&inst, &sol).unwrap().feasible || r.gen_bool(0.5) {
            continue;
        }
        let model = build_model(&inst).unwrap();
        let eval = model.evaluate(&encode(&model, &inst, &sol));
        assert!(eval.is_satisfied(), "{:?}", eval.violated);
        checked += 1;
    }
}
