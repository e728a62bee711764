//! Row-synchronous data-parallel fill of the cost table.
//!
//! Cells of one row only read the finished row above, so a row is split
//! into contiguous column spans that are relaxed concurrently; the sweep
//! waits for every span before moving to the next row. Each cell performs
//! exactly the comparisons of the sequential fill in the same order, which
//! keeps the table bit-identical to [`dp_seam`](super::dp_seam) for any
//! worker count.

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use super::{check_forward, check_nonempty, CostTable, Seam};
use crate::energy::{EnergyMap, ForwardCosts};
use crate::raster::Grid;
use crate::{Error, Result};

pub(crate) fn available_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Parallel backend with a persistent worker pool.
///
/// `workers` sets how many column spans each row is cut into. Spans are
/// scheduled on at most `available_parallelism()` threads: a row barrier
/// with more threads than cores only adds context switches.
pub struct ParallelDp {
    workers: usize,
    pool: Option<ThreadPool>,
}

impl ParallelDp {
    pub fn new(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::InvalidConfig(
                "worker count must be at least 1".into(),
            ));
        }
        let threads = workers.min(available_threads());
        let pool = if threads > 1 {
            let pool = ThreadPoolBuilder::new()
                .num_threads(threads)
                .thread_name(|i| format!("seam-dp-{i}"))
                .build()
                .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
            Some(pool)
        } else {
            None
        };
        Ok(ParallelDp { workers, pool })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Threads actually running spans.
    pub fn threads(&self) -> usize {
        self.pool.as_ref().map_or(1, |p| p.current_num_threads())
    }

    pub fn solve(
        &self,
        energy: &EnergyMap,
        forward: Option<&ForwardCosts>,
    ) -> Result<(Seam, CostTable)> {
        check_nonempty(energy)?;
        if let Some(fc) = forward {
            check_forward(energy, fc)?;
        }
        let table = match &self.pool {
            Some(pool) => pool.install(|| self.sweep(energy, forward, true)),
            None => self.sweep(energy, forward, false),
        };
        Ok((table.seam(), table))
    }

    fn sweep(
        &self,
        energy: &EnergyMap,
        forward: Option<&ForwardCosts>,
        threaded: bool,
    ) -> CostTable {
        let (w, h) = energy.dimensions();
        let span = w.div_ceil(self.workers).max(1);
        let mut costs = vec![0.0; w * h];
        let mut parents = vec![0u32; w * h];
        costs[..w].copy_from_slice(energy.row(0));
        for (j, p) in parents[..w].iter_mut().enumerate() {
            *p = j as u32;
        }

        for i in 1..h {
            let (done, rest) = costs.split_at_mut(i * w);
            let prev = &done[(i - 1) * w..];
            let cur = &mut rest[..w];
            let cur_parents = &mut parents[i * w..(i + 1) * w];
            let row = RowInput {
                prev,
                energy: energy.row(i),
                forward: forward
                    .map(|fc| [fc.cost_left.row(i), fc.cost_up.row(i), fc.cost_right.row(i)]),
            };
            // The end of each parallel iteration is the row barrier.
            if threaded {
                cur.par_chunks_mut(span)
                    .zip(cur_parents.par_chunks_mut(span))
                    .enumerate()
                    .for_each(|(s, (c, p))| row.relax(s * span, c, p));
            } else {
                cur.chunks_mut(span)
                    .zip(cur_parents.chunks_mut(span))
                    .enumerate()
                    .for_each(|(s, (c, p))| row.relax(s * span, c, p));
            }
        }

        CostTable {
            costs: Grid::new(w, h, costs).expect("sized above"),
            parents: Grid::new(w, h, parents).expect("sized above"),
        }
    }
}

struct RowInput<'a> {
    prev: &'a [f64],
    energy: &'a [f64],
    /// `[left, up, right]` transition costs of this row.
    forward: Option<[&'a [f64]; 3]>,
}

impl RowInput<'_> {
    /// Relaxes columns `start..start + out.len()`.
    fn relax(&self, start: usize, out: &mut [f64], parents: &mut [u32]) {
        let w = self.prev.len();
        let end = start + out.len();
        // Border columns have two predecessors; handle them apart so the
        // interior loop is branch-light.
        let inner_lo = start.max(1);
        let inner_hi = end.min(w.saturating_sub(1)).max(inner_lo);
        for j in (start..inner_lo).chain(inner_hi..end) {
            let (best, k) = self.best_at_border(j);
            out[j - start] = self.energy[j] + best;
            parents[j - start] = k as u32;
        }
        let out = &mut out[inner_lo - start..inner_hi - start];
        let parents = &mut parents[inner_lo - start..inner_hi - start];
        match self.forward {
            None => {
                for (n, (o, p)) in out.iter_mut().zip(parents.iter_mut()).enumerate() {
                    let j = inner_lo + n;
                    let (l, u, r) = (self.prev[j - 1], self.prev[j], self.prev[j + 1]);
                    let (best, step) = min3(l, u, r);
                    *o = self.energy[j] + best;
                    *p = (j - 1) as u32 + step;
                }
            }
            Some([cl, cu, cr]) => {
                for (n, (o, p)) in out.iter_mut().zip(parents.iter_mut()).enumerate() {
                    let j = inner_lo + n;
                    let (best, step) = min3(
                        self.prev[j - 1] + cl[j],
                        self.prev[j] + cu[j],
                        self.prev[j + 1] + cr[j],
                    );
                    *o = self.energy[j] + best;
                    *p = (j - 1) as u32 + step;
                }
            }
        }
    }

    fn best_at_border(&self, j: usize) -> (f64, usize) {
        let w = self.prev.len();
        let lo = j.saturating_sub(1);
        let hi = (j + 1).min(w - 1);
        let mut best = f64::INFINITY;
        let mut best_k = lo;
        for k in lo..=hi {
            let candidate = match self.forward {
                None => self.prev[k],
                Some([cl, cu, cr]) => {
                    let t = match k.cmp(&j) {
                        std::cmp::Ordering::Less => cl[j],
                        std::cmp::Ordering::Equal => cu[j],
                        std::cmp::Ordering::Greater => cr[j],
                    };
                    self.prev[k] + t
                }
            };
            if candidate < best {
                best = candidate;
                best_k = k;
            }
        }
        (best, best_k)
    }
}

/// Minimum of three candidates and its offset; earlier wins ties.
#[inline(always)]
fn min3(l: f64, u: f64, r: f64) -> (f64, u32) {
    let (mut best, mut step) = (l, 0);
    if u < best {
        best = u;
        step = 1;
    }
    if r < best {
        best = r;
        step = 2;
    }
    (best, step)
}

/// One-shot parallel solve; builds and drops a worker pool.
pub fn parallel_dp_seam(energy: &EnergyMap, workers: usize) -> Result<(Seam, CostTable)> {
    ParallelDp::new(workers)?.solve(energy, None)
}

pub fn parallel_dp_seam_forward(
    energy: &EnergyMap,
    costs: &ForwardCosts,
    workers: usize,
) -> Result<(Seam, CostTable)> {
    ParallelDp::new(workers)?.solve(energy, Some(costs))
}
