mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use seamcarve::energy::{forward_costs, EnergyMap};
use seamcarve::raster::Grid;
use seamcarve::solvers::*;

fn table_min(e: &EnergyMap) -> f64 {
    dp_seam(e).unwrap().1.min_cost()
}

#[test]
fn path_counts_match_enumeration() {
    assert_eq!(all_paths(2, 2).len(), 4);
    assert_eq!(all_paths(3, 3).len(), 17);
    assert_eq!(all_paths(1, 5).len(), 1);
    // Each path is connected and in range.
    for p in all_paths(4, 5) {
        assert!(Seam::new(p).validate(4, 5).is_ok());
    }
}

#[test]
fn dp_and_brute_force_match_exhaustive_search() {
    let mut rng = rng(11);
    for trial in 0..100 {
        let e = int_energy(&mut rng, 6, 6, 50);
        let paths = all_paths(6, 6);
        let (best, winners) = optimum(&paths, |p| path_energy(&e, p));

        let (dp, table) = dp_seam(&e).unwrap();
        assert_eq!(table.min_cost(), best, "trial {trial}");
        assert!(winners.contains(&dp.columns().to_vec()), "trial {trial}");

        let brute = brute_force_seam(&e, DEFAULT_BRUTE_FORCE_CAP).unwrap();
        assert!(winners.contains(&brute.columns().to_vec()), "trial {trial}");
    }
}

#[test]
fn solvers_agree_on_many_small_maps() {
    let mut rng = rng(12);
    for _ in 0..300 {
        let w = rng.gen_range(1..=12);
        let h = rng.gen_range(1..=12);
        let e = int_energy(&mut rng, w, h, 255);
        let (dp, table) = dp_seam(&e).unwrap();
        let brute = brute_force_seam(&e, 12).unwrap();
        assert_eq!(seam_cost(&e, &brute).unwrap(), table.min_cost());
        assert_eq!(seam_cost(&e, &dp).unwrap(), table.min_cost());
        for workers in [1, 3, 8] {
            assert_eq!(
                parallel_dp_seam(&e, workers).unwrap(),
                (dp.clone(), table.clone())
            );
        }
    }
}

#[test]
fn parallel_tables_are_bit_identical() {
    let mut rng = rng(13);
    for _ in 0..50 {
        let e = real_energy(&mut rng, 200, 200);
        let (seam, table) = dp_seam(&e).unwrap();
        let workers = rng.gen_range(1..=16);
        let (pseam, ptable) = parallel_dp_seam(&e, workers).unwrap();
        assert_eq!(pseam, seam);
        assert_eq!(ptable.parents, table.parents);
        let bits = |g: &Grid<f64>| g.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&ptable.costs), bits(&table.costs));
    }
}

#[test]
fn parallel_forward_matches_sequential() {
    let mut rng = rng(14);
    for _ in 0..20 {
        let img = random_image(&mut rng, 40, 30);
        let g = seamcarve::raster::to_grayscale(&img);
        let e = seamcarve::energy::energy_e1(&g);
        let f = forward_costs(&g);
        let seq = dp_seam_forward(&e, &f).unwrap();
        for workers in [1, 2, 7] {
            assert_eq!(parallel_dp_seam_forward(&e, &f, workers).unwrap(), seq);
        }
    }
}

#[test]
fn forward_dp_matches_exhaustive_search() {
    let mut rng = rng(15);
    for _ in 0..60 {
        let w = rng.gen_range(1..=5);
        let h = rng.gen_range(1..=5);
        let g = Grid::from_fn(w, h, |_, _| rng.gen_range(0..=255) as f64);
        let e = int_energy(&mut rng, w, h, 30);
        let f = forward_costs(&g);
        let (best, winners) = optimum(&all_paths(w, h), |p| path_forward(&e, &f, p));
        let (seam, table) = dp_seam_forward(&e, &f).unwrap();
        assert_eq!(table.min_cost(), best);
        assert!(winners.contains(&seam.columns().to_vec()));
    }
}

#[test]
fn forward_and_backward_choose_different_seams() {
    let g = gray(&[
        &[10.0, 265.0, 255.0, 275.0],
        &[30.0, 30.0, 275.0, 260.0],
        &[10.0, 30.0, 10.0, 275.0],
        &[30.0, 40.0, 10.0, 30.0],
    ]);
    let paths = all_paths(4, 4);

    let e1 = seamcarve::energy::energy_e1(&g);
    let (back_best, back_set) = optimum(&paths, |p| path_energy(&e1, p));
    let zero = EnergyMap::from_values(4, 4, vec![0.0; 16]).unwrap();
    let f = forward_costs(&g);
    let (fwd_best, fwd_set) = optimum(&paths, |p| path_forward(&zero, &f, p));

    assert_eq!(
        (back_best, back_set.clone()),
        (295.0, vec![vec![0, 0, 1, 2]])
    );
    assert_eq!((fwd_best, fwd_set.clone()), (30.0, vec![vec![0, 0, 0, 0]]));

    let (back, _) = dp_seam(&e1).unwrap();
    let (fwd, _) = dp_seam_forward(&zero, &f).unwrap();
    assert_eq!(back.columns(), &back_set[0][..]);
    assert_eq!(fwd.columns(), &fwd_set[0][..]);
    assert_ne!(back, fwd);
}

#[test]
fn table_rows_are_optimal_prefixes() {
    let mut rng = rng(16);
    for _ in 0..40 {
        let w = rng.gen_range(1..=6);
        let h = rng.gen_range(1..=8);
        let e = int_energy(&mut rng, w, h, 99);
        let (_, table) = dp_seam(&e).unwrap();
        for r in 0..h {
            let prefix = all_paths(w, r + 1);
            for c in 0..w {
                let best = prefix
                    .iter()
                    .filter(|p| p[r] == c)
                    .map(|p| path_energy(&e, p))
                    .fold(f64::INFINITY, f64::min);
                assert_eq!(*table.costs.get(r, c), best, "row {r} col {c}");
            }
        }
    }
}

#[test]
fn greedy_never_beats_dp() {
    let mut rng = rng(17);
    let mut strict = 0;
    for _ in 0..500 {
        let w = rng.gen_range(2..=12);
        let h = rng.gen_range(2..=12);
        let e = int_energy(&mut rng, w, h, 255);
        let greedy = seam_cost(&e, &greedy_seam(&e).unwrap()).unwrap();
        let dp = table_min(&e);
        assert!(greedy >= dp);
        strict += (greedy > dp) as usize;
    }
    assert!(
        strict >= 25,
        "greedy strictly worse on only {strict} of 500 maps"
    );
}

#[test]
fn greedy_trap_costs_more() {
    let e = EnergyMap::from_rows(&[[0.0, 100.0, 100.0], [0.0, 100.0, 100.0], [2.0, 100.0, 1.0]])
        .unwrap();
    let greedy = greedy_seam(&e).unwrap();
    assert_eq!(greedy.columns()[2], 2);
    assert_eq!(seam_cost(&e, &greedy).unwrap(), 101.0);
    let (dp, table) = dp_seam(&e).unwrap();
    assert_eq!(dp.columns(), &[0, 0, 0]);
    assert_eq!(table.min_cost(), 2.0);
}

#[test]
fn solving_twice_gives_the_same_seam() {
    let mut rng = rng(18);
    let e = real_energy(&mut rng, 30, 25);
    let opts = SolverOptions {
        workers: 4,
        brute_force_cap: 16,
    };
    for kind in [
        SolverKind::Greedy,
        SolverKind::Dynamic,
        SolverKind::ParallelDynamic,
    ] {
        let a = find_seam(kind, &e, None, opts).unwrap();
        let b = find_seam(kind, &e, None, opts).unwrap();
        assert_eq!(a, b, "{kind}");
    }
}

#[test]
fn brute_force_rejects_tall_maps() {
    let e = EnergyMap::from_values(2, 17, vec![1.0; 34]).unwrap();
    assert!(matches!(
        brute_force_seam(&e, DEFAULT_BRUTE_FORCE_CAP),
        Err(seamcarve::Error::ImageTooLarge {
            height: 17,
            cap: 16
        })
    ));
}

fn arb_energy(max_side: usize) -> impl Strategy<Value = EnergyMap> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(w, h)| {
        prop::collection::vec(0u16..512, w * h).prop_map(move |v| {
            EnergyMap::from_values(w, h, v.into_iter().map(f64::from).collect()).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn every_backend_returns_a_valid_seam(e in arb_energy(10)) {
        let (w, h) = e.dimensions();
        for kind in SolverKind::ALL {
            let seam = find_seam(kind, &e, None, SolverOptions::default()).unwrap();
            prop_assert_eq!(seam.len(), h);
            prop_assert!(seam.validate(w, h).is_ok());
        }
    }

    #[test]
    fn dp_seam_cost_equals_table_minimum(e in arb_energy(24)) {
        let (seam, table) = dp_seam(&e).unwrap();
        prop_assert_eq!(seam_cost(&e, &seam).unwrap(), table.min_cost());
        prop_assert_eq!(table.seam(), seam);
    }

    #[test]
    fn table_minimum_is_the_bottom_row_minimum(e in arb_energy(24)) {
        let (_, table) = dp_seam(&e).unwrap();
        let h = e.height();
        let bottom = table.costs.row(h - 1).iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(table.min_cost(), bottom);
        prop_assert_eq!(*table.costs.get(h - 1, table.best_end()), bottom);
    }
}
