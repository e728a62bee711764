mod common;

use std::collections::HashSet;
use std::time::Duration;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use seamcarve::carver::*;
use seamcarve::energy::{energy_e1, EnergyFn};
use seamcarve::raster::{to_grayscale, transpose, Grid, PixelGrid};
use seamcarve::solvers::*;

fn is_subsequence(short: &[[u8; 3]], long: &[[u8; 3]]) -> bool {
    let mut it = long.iter();
    short.iter().all(|p| it.any(|q| q == p))
}

fn arb_image(max: usize) -> impl Strategy<Value = PixelGrid> {
    (2..=max, 1..=max).prop_flat_map(|(w, h)| {
        prop::collection::vec(any::<[u8; 3]>(), w * h)
            .prop_map(move |data| Grid::new(w, h, data).unwrap())
    })
}

fn cfg(kind: SolverKind) -> CarveConfig {
    let mut cfg = CarveConfig::with_solver(kind);
    cfg.solver_options.workers = 3;
    cfg
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn carving_keeps_rows_as_subsequences(
        img in arb_image(64),
        frac in 0.0f64..1.0,
        kind in prop::sample::select(vec![SolverKind::Greedy, SolverKind::Dynamic, SolverKind::ParallelDynamic]),
    ) {
        let (w, h) = img.dimensions();
        let target = 1 + ((w - 1) as f64 * frac) as usize;
        let (out, report) = carve_to_width(&img, target, &cfg(kind)).unwrap();
        prop_assert_eq!(out.dimensions(), (target, h));
        prop_assert_eq!(report.seams, w - target);
        for r in 0..h {
            prop_assert!(is_subsequence(out.row(r), img.row(r)));
        }
    }

    #[test]
    fn removed_seams_are_distinct_in_original_coordinates(img in arb_image(24), k in 1usize..8) {
        let k = k.min(img.width() - 1);
        let (seams, _) = seam_sequence(&img, k, &cfg(SolverKind::Dynamic)).unwrap();
        prop_assert_eq!(seams.len(), k);
        for r in 0..img.height() {
            let cols: HashSet<usize> = seams.iter().map(|s| s[r]).collect();
            prop_assert_eq!(cols.len(), k);
            prop_assert!(cols.iter().all(|&c| c < img.width()));
        }
    }

    #[test]
    fn removing_a_seam_shifts_only_pixels_right_of_it(img in arb_image(20), seed in any::<u64>()) {
        let (w, h) = img.dimensions();
        let mut rng = rng(seed);
        let mut cols = vec![rng.gen_range(0..w)];
        for _ in 1..h {
            let last = *cols.last().unwrap() as isize;
            let next = (last + rng.gen_range(-1..=1)).clamp(0, w as isize - 1);
            cols.push(next as usize);
        }
        let out = remove_seam(&img, &Seam::new(cols.clone())).unwrap();
        for (r, &c) in cols.iter().enumerate() {
            prop_assert_eq!(&out.row(r)[..c], &img.row(r)[..c]);
            prop_assert_eq!(&out.row(r)[c..], &img.row(r)[c + 1..]);
        }
    }

    #[test]
    fn enlarging_then_carving_restores_dimensions(img in arb_image(16), k in 0usize..6) {
        let (w, h) = img.dimensions();
        let k = k.min(w - 1);
        let c = cfg(SolverKind::Dynamic);
        let (wide, _) = enlarge_to_width(&img, w + k, &c).unwrap();
        prop_assert_eq!(wide.dimensions(), (w + k, h));
        let (back, _) = carve_to_width(&wide, w, &c).unwrap();
        prop_assert_eq!(back.dimensions(), (w, h));
    }
}

#[test]
fn carve_to_height_is_a_transpose_sandwich() {
    let mut rng = rng(31);
    let img = random_image(&mut rng, 10, 8);
    let c = cfg(SolverKind::Dynamic);
    let (direct, _) = carve_to_height(&img, 5, &c).unwrap();
    let (wide, _) = carve_to_width(&transpose(&img), 5, &c).unwrap();
    assert_eq!(direct, transpose(&wide));
    assert_eq!(direct.dimensions(), (10, 5));
}

#[test]
fn object_removal_seams_all_hit_the_mask() {
    let mut rng = rng(32);
    for _ in 0..40 {
        let w = rng.gen_range(2..=8);
        let h = rng.gen_range(2..=8);
        let img = random_image(&mut rng, w, h);
        // Leaving one clear row and column keeps both directions carvable.
        let (r0, c0) = (rng.gen_range(0..h - 1), rng.gen_range(0..w - 1));
        let (r1, c1) = (rng.gen_range(r0..h - 1), rng.gen_range(c0..w - 1));
        let mask = Grid::from_fn(w, h, |r, c| {
            (r0..=r1).contains(&r) && (c0..=c1).contains(&c)
        });
        let masked: usize = mask.data().iter().filter(|&&m| m).count();

        let out = remove_object_with(&img, &mask, &cfg(SolverKind::Dynamic), true).unwrap();
        assert_eq!(out.image.dimensions(), (w, h));
        assert!(out.remaining_mask.data().iter().all(|&m| !m));
        assert_eq!(out.seams_removed, out.masked_after_each_seam.len());
        let mut before = masked;
        for &after in &out.masked_after_each_seam {
            assert!(after < before, "a seam missed the mask");
            before = after;
        }
        assert_eq!(before, 0);
    }
}

#[test]
fn greedy_costs_at_least_dp_at_every_step() {
    let mut rng = rng(33);
    let mut img = random_image(&mut rng, 40, 30);
    for _ in 0..20 {
        let e = energy_e1(&to_grayscale(&img));
        let greedy = seam_cost(&e, &greedy_seam(&e).unwrap()).unwrap();
        let (seam, table) = dp_seam(&e).unwrap();
        assert!(greedy >= table.min_cost());
        img = remove_seam(&img, &seam).unwrap();
    }
}

#[test]
fn report_timings_add_up() {
    let mut rng = rng(34);
    let img = random_image(&mut rng, 30, 20);
    let (_, report) = carve_to_width(&img, 21, &cfg(SolverKind::ParallelDynamic)).unwrap();
    assert_eq!(report.seams, 9);
    assert_eq!(report.per_seam.len(), 9);
    let summed: Duration = report.per_seam.iter().map(SeamTiming::total).sum();
    assert!(summed <= report.total);
}

#[test]
fn backends_and_energies_all_carve() {
    let mut rng = rng(35);
    let img = random_image(&mut rng, 12, 10);
    for energy_fn in EnergyFn::ALL {
        for kind in SolverKind::ALL {
            let mut c = cfg(kind);
            c.energy_fn = energy_fn;
            let (out, _) = carve_to_width(&img, 8, &c).unwrap();
            assert_eq!(out.dimensions(), (8, 10), "{kind} {energy_fn}");
        }
    }
}

#[test]
fn forward_mode_agrees_across_dp_backends() {
    let mut rng = rng(36);
    let img = random_image(&mut rng, 24, 16);
    let mut dp = cfg(SolverKind::Dynamic);
    dp.forward = true;
    let mut par = cfg(SolverKind::ParallelDynamic);
    par.forward = true;
    assert_eq!(
        carve_to_width(&img, 12, &dp).unwrap().0,
        carve_to_width(&img, 12, &par).unwrap().0
    );
}

#[test]
fn stale_energy_mode_still_carves_valid_rows() {
    let mut rng = rng(37);
    let img = random_image(&mut rng, 20, 12);
    let mut c = cfg(SolverKind::Dynamic);
    c.recompute = false;
    let (out, _) = carve_to_width(&img, 11, &c).unwrap();
    assert_eq!(out.dimensions(), (11, 12));
    for r in 0..12 {
        assert!(is_subsequence(out.row(r), img.row(r)));
    }
}
