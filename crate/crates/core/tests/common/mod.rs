//! Helpers shared by the integration tests. Nothing here calls into the
//! solvers; the oracles are written from the definitions alone.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seamcarve::energy::{EnergyMap, ForwardCosts};
use seamcarve::raster::{Grid, PixelGrid};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Integer-valued energies, so every path sum is exact in f64.
pub fn int_energy(rng: &mut ChaCha8Rng, w: usize, h: usize, max: u32) -> EnergyMap {
    let values = (0..w * h).map(|_| rng.gen_range(0..=max) as f64).collect();
    EnergyMap::from_values(w, h, values).unwrap()
}

pub fn real_energy(rng: &mut ChaCha8Rng, w: usize, h: usize) -> EnergyMap {
    let values = (0..w * h).map(|_| rng.gen_range(0.0..510.0)).collect();
    EnergyMap::from_values(w, h, values).unwrap()
}

pub fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> PixelGrid {
    Grid::from_fn(w, h, |_, _| [rng.gen(), rng.gen(), rng.gen()])
}

/// Every 8-connected top-to-bottom path, in no particular order.
pub fn all_paths(w: usize, h: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0..w).map(|c| vec![c]).collect();
    for _ in 1..h {
        let mut next = Vec::with_capacity(out.len() * 3);
        for path in &out {
            let last = *path.last().unwrap() as isize;
            for d in -1..=1 {
                let c = last + d;
                if c >= 0 && (c as usize) < w {
                    let mut p = path.clone();
                    p.push(c as usize);
                    next.push(p);
                }
            }
        }
        out = next;
    }
    out
}

/// Plain sum of energies along `path`, top row first.
pub fn path_energy(e: &Grid<f64>, path: &[usize]) -> f64 {
    path.iter()
        .enumerate()
        .fold(0.0, |acc, (r, &c)| acc + e.get(r, c))
}

/// Energy plus the transition cost of every step.
pub fn path_forward(e: &Grid<f64>, f: &ForwardCosts, path: &[usize]) -> f64 {
    let mut total = *e.get(0, path[0]);
    for r in 1..path.len() {
        let (from, to) = (path[r - 1], path[r]);
        let step = if from + 1 == to {
            f.cost_left.get(r, to)
        } else if from == to {
            f.cost_up.get(r, to)
        } else {
            f.cost_right.get(r, to)
        };
        total = total + step + e.get(r, to);
    }
    total
}

/// Minimum over an explicit path list and every path attaining it.
pub fn optimum(paths: &[Vec<usize>], cost: impl Fn(&[usize]) -> f64) -> (f64, Vec<Vec<usize>>) {
    let best = paths.iter().map(|p| cost(p)).fold(f64::INFINITY, f64::min);
    let winners = paths.iter().filter(|p| cost(p) == best).cloned().collect();
    (best, winners)
}

pub fn gray(rows: &[&[f64]]) -> Grid<f64> {
    let w = rows[0].len();
    Grid::new(w, rows.len(), rows.concat()).unwrap()
}
