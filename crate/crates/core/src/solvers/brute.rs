use super::{check_nonempty, Seam};
use crate::energy::EnergyMap;
use crate::{Error, Result};

/// Exhaustive search over every connected top-to-bottom path.
///
/// Paths are enumerated in lexicographic order of their column sequence
/// and only a strictly cheaper path replaces the incumbent, so among
/// equal-cost seams the lexicographically smallest one is returned. No
/// pruning or memoisation is done: the call visits all `Θ(m·3ⁿ)` paths.
pub fn brute_force_seam(energy: &EnergyMap, height_cap: usize) -> Result<Seam> {
    check_nonempty(energy)?;
    if energy.height() > height_cap {
        return Err(Error::ImageTooLarge {
            height: energy.height(),
            cap: height_cap,
        });
    }

    let mut search = Search {
        energy,
        path: Vec::with_capacity(energy.height()),
        best: Vec::new(),
        best_cost: f64::INFINITY,
    };
    for col in 0..energy.width() {
        search.descend(0, col, 0.0);
    }
    Ok(Seam::new(search.best))
}

struct Search<'a> {
    energy: &'a EnergyMap,
    path: Vec<usize>,
    best: Vec<usize>,
    best_cost: f64,
}

impl Search<'_> {
    fn descend(&mut self, row: usize, col: usize, cost: f64) {
        let cost = cost + self.energy.get(row, col);
        self.path.push(col);
        if row + 1 == self.energy.height() {
            if cost < self.best_cost {
                self.best_cost = cost;
                self.best.clone_from(&self.path);
            }
        } else {
            let last = self.energy.width() - 1;
            for next in col.saturating_sub(1)..=(col + 1).min(last) {
                self.descend(row + 1, next, cost);
            }
        }
        self.path.pop();
    }
}
