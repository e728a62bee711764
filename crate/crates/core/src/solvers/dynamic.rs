use super::{check_forward, check_nonempty, CostTable, Seam};
use crate::energy::{EnergyMap, ForwardCosts};
use crate::raster::Grid;
use crate::Result;

/// Fills the accumulated-cost table row by row,
/// `M(i, j) = e(i, j) + min(M(i-1, j-1), M(i-1, j), M(i-1, j+1))`,
/// skipping out-of-range predecessors, then backtracks from the cheapest
/// bottom cell.
pub fn dp_seam(energy: &EnergyMap) -> Result<(Seam, CostTable)> {
    check_nonempty(energy)?;
    let table = fill(energy, |_, _, _| 0.0, false);
    Ok((table.seam(), table))
}

/// [`dp_seam`] with forward-energy transition costs: arriving at `(i, j)`
/// from column `k` adds `cost_left`, `cost_up` or `cost_right` for
/// `k = j-1, j, j+1` respectively.
pub fn dp_seam_forward(energy: &EnergyMap, costs: &ForwardCosts) -> Result<(Seam, CostTable)> {
    check_nonempty(energy)?;
    check_forward(energy, costs)?;
    let transition = |row: usize, col: usize, from: usize| {
        let grid = match from.cmp(&col) {
            std::cmp::Ordering::Less => &costs.cost_left,
            std::cmp::Ordering::Equal => &costs.cost_up,
            std::cmp::Ordering::Greater => &costs.cost_right,
        };
        *grid.get(row, col)
    };
    let table = fill(energy, transition, true);
    Ok((table.seam(), table))
}

fn fill(
    energy: &EnergyMap,
    transition: impl Fn(usize, usize, usize) -> f64,
    forward: bool,
) -> CostTable {
    let (w, h) = energy.dimensions();
    let mut costs = vec![0.0; w * h];
    let mut parents = vec![0u32; w * h];
    costs[..w].copy_from_slice(energy.row(0));
    for (j, p) in parents[..w].iter_mut().enumerate() {
        *p = j as u32;
    }

    for i in 1..h {
        for j in 0..w {
            let lo = j.saturating_sub(1);
            let hi = (j + 1).min(w - 1);
            let mut best_k = lo;
            let mut best = f64::INFINITY;
            for k in lo..=hi {
                let prev = costs[(i - 1) * w + k];
                let candidate = if forward {
                    prev + transition(i, j, k)
                } else {
                    prev
                };
                if candidate < best {
                    best = candidate;
                    best_k = k;
                }
            }
            costs[i * w + j] = energy.get(i, j) + best;
            parents[i * w + j] = best_k as u32;
        }
    }

    CostTable {
        costs: Grid::new(w, h, costs).expect("sized above"),
        parents: Grid::new(w, h, parents).expect("sized above"),
    }
}
