use super::{argmin, check_nonempty, Seam};
use crate::energy::EnergyMap;
use crate::Result;

/// Starts at the cheapest bottom-row pixel and climbs, each step taking the
/// cheapest of the (up to three) pixels touching the current one in the
/// row above. Linear time, not optimal.
pub fn greedy_seam(energy: &EnergyMap) -> Result<Seam> {
    check_nonempty(energy)?;
    let (w, h) = energy.dimensions();
    let mut cols = vec![0; h];
    let mut col = argmin(energy.row(h - 1));
    cols[h - 1] = col;
    for row in (0..h - 1).rev() {
        let above = energy.row(row);
        let lo = col.saturating_sub(1);
        let hi = (col + 1).min(w - 1);
        col = lo + argmin(&above[lo..=hi]);
        cols[row] = col;
    }
    Ok(Seam::new(cols))
}
