//! Minimum-seam search.
//!
//! Four interchangeable backends find a connected top-to-bottom path of
//! minimum total energy (or, for greedy, a cheap approximation of one):
//!
//! | backend                 | single seam  | optimal |
//! |-------------------------|--------------|---------|
//! | [`brute_force_seam`]    | `Θ(m·3ⁿ)`    | yes     |
//! | [`greedy_seam`]         | `Θ(m + n)`   | no      |
//! | [`dp_seam`]             | `Θ(n·m)`     | yes     |
//! | [`parallel_dp_seam`]    | `Θ(n·m / p)` | yes     |
//!
//! Ties are always broken towards the smallest column index, which makes
//! every backend a pure function of its input and lets the parallel sweep
//! reproduce the sequential table bit for bit.

mod brute;
mod dynamic;
mod greedy;
mod parallel;

use std::fmt;
use std::str::FromStr;

pub use brute::brute_force_seam;
pub use dynamic::{dp_seam, dp_seam_forward};
pub use greedy::greedy_seam;
pub use parallel::{parallel_dp_seam, parallel_dp_seam_forward, ParallelDp};

use crate::energy::{EnergyMap, ForwardCosts};
use crate::raster::Grid;
use crate::{Error, Result};

/// Default height cap for the exhaustive search.
pub const DEFAULT_BRUTE_FORCE_CAP: usize = 16;

/// A vertical seam: one column per row, top row first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Seam(Vec<usize>);

impl Seam {
    pub fn new(columns: Vec<usize>) -> Self {
        Seam(columns)
    }

    pub fn columns(&self) -> &[usize] {
        &self.0
    }

    pub fn into_columns(self) -> Vec<usize> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Checks length, range and 8-connectivity against a `width x height` grid.
    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        if self.0.len() != height {
            return Err(Error::InvalidSeam(format!(
                "seam has {} rows, image has {height}",
                self.0.len()
            )));
        }
        if let Some((row, &c)) = self.0.iter().enumerate().find(|(_, &c)| c >= width) {
            return Err(Error::InvalidSeam(format!(
                "column {c} at row {row} is outside width {width}"
            )));
        }
        if let Some(row) = self.0.windows(2).position(|p| p[0].abs_diff(p[1]) > 1) {
            return Err(Error::InvalidSeam(format!(
                "seam jumps from column {} to {} between rows {row} and {}",
                self.0[row],
                self.0[row + 1],
                row + 1
            )));
        }
        Ok(())
    }
}

/// Accumulated minimum costs and the predecessor column chosen for each
/// cell. Row 0 holds the raw energies and points at itself.
#[derive(Clone, Debug, PartialEq)]
pub struct CostTable {
    pub costs: Grid<f64>,
    pub parents: Grid<u32>,
}

impl CostTable {
    /// Cheapest bottom-row entry, smallest column on ties.
    pub fn best_end(&self) -> usize {
        argmin(self.costs.row(self.costs.height() - 1))
    }

    pub fn min_cost(&self) -> f64 {
        *self.costs.get(self.costs.height() - 1, self.best_end())
    }

    /// Follows the parent links up from the cheapest bottom cell.
    pub fn seam(&self) -> Seam {
        let h = self.costs.height();
        let mut cols = vec![0; h];
        let mut col = self.best_end();
        for row in (0..h).rev() {
            cols[row] = col;
            col = *self.parents.get(row, col) as usize;
        }
        Seam(cols)
    }
}

/// Index of the first minimum.
pub(crate) fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn check_nonempty(energy: &EnergyMap) -> Result<()> {
    if energy.is_empty() {
        Err(Error::EmptyImage)
    } else {
        Ok(())
    }
}

pub(crate) fn check_forward(energy: &EnergyMap, costs: &ForwardCosts) -> Result<()> {
    let dims = (costs.width(), costs.height());
    if dims != energy.dimensions() {
        return Err(Error::DimensionMismatch {
            expected: energy.dimensions(),
            actual: dims,
        });
    }
    Ok(())
}

/// `Σ e(i, columns[i])` for a valid seam.
pub fn seam_cost(energy: &EnergyMap, seam: &Seam) -> Result<f64> {
    seam.validate(energy.width(), energy.height())?;
    Ok(seam
        .columns()
        .iter()
        .enumerate()
        .fold(0.0, |acc, (row, &col)| acc + energy.get(row, col)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum SolverKind {
    BruteForce,
    Greedy,
    Dynamic,
    #[default]
    ParallelDynamic,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] = [
        SolverKind::BruteForce,
        SolverKind::Greedy,
        SolverKind::Dynamic,
        SolverKind::ParallelDynamic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::BruteForce => "bruteforce",
            SolverKind::Greedy => "greedy",
            SolverKind::Dynamic => "dp",
            SolverKind::ParallelDynamic => "pardp",
        }
    }

    pub fn supports_forward(self) -> bool {
        matches!(self, SolverKind::Dynamic | SolverKind::ParallelDynamic)
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown solver {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverOptions {
    /// Column partitions per row for the parallel sweep. Never affects output.
    pub workers: usize,
    pub brute_force_cap: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            workers: parallel::available_threads(),
            brute_force_cap: DEFAULT_BRUTE_FORCE_CAP,
        }
    }
}

impl SolverOptions {
    /// Defaults overridden by `CARVE_WORKERS` and `CARVE_BRUTE_CAP`.
    pub fn from_env() -> Result<Self> {
        let mut opts = SolverOptions::default();
        if let Some(w) = env_count("CARVE_WORKERS")? {
            opts.workers = w;
        }
        if let Some(cap) = env_count("CARVE_BRUTE_CAP")? {
            opts.brute_force_cap = cap;
        }
        Ok(opts)
    }
}

fn env_count(name: &str) -> Result<Option<usize>> {
    match std::env::var(name) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Error::InvalidConfig(format!(
                "{name} must be a positive integer, got {v:?}"
            ))),
        },
        Err(_) => Ok(None),
    }
}

/// A backend ready to be called repeatedly. The parallel backend keeps its
/// worker pool alive between calls.
pub struct Solver {
    kind: SolverKind,
    opts: SolverOptions,
    parallel: Option<ParallelDp>,
}

impl fmt::Debug for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Solver")
            .field("kind", &self.kind)
            .field("opts", &self.opts)
            .finish()
    }
}

impl Solver {
    pub fn new(kind: SolverKind, opts: SolverOptions) -> Result<Self> {
        let parallel = match kind {
            SolverKind::ParallelDynamic => Some(ParallelDp::new(opts.workers)?),
            _ => None,
        };
        Ok(Solver {
            kind,
            opts,
            parallel,
        })
    }

    pub fn kind(&self) -> SolverKind {
        self.kind
    }

    pub fn options(&self) -> SolverOptions {
        self.opts
    }

    pub fn solve(&self, energy: &EnergyMap, forward: Option<&ForwardCosts>) -> Result<Seam> {
        if forward.is_some() && !self.kind.supports_forward() {
            return Err(Error::InvalidConfig(format!(
                "forward energy needs a dynamic-programming solver, not {}",
                self.kind
            )));
        }
        match (self.kind, forward) {
            (SolverKind::BruteForce, _) => brute_force_seam(energy, self.opts.brute_force_cap),
            (SolverKind::Greedy, _) => greedy_seam(energy),
            (SolverKind::Dynamic, None) => dp_seam(energy).map(|(s, _)| s),
            (SolverKind::Dynamic, Some(fc)) => dp_seam_forward(energy, fc).map(|(s, _)| s),
            (SolverKind::ParallelDynamic, fc) => {
                let par = self.parallel.as_ref().expect("pool built in Solver::new");
                par.solve(energy, fc).map(|(s, _)| s)
            }
        }
    }
}

/// One-shot convenience over [`Solver`].
pub fn find_seam(
    kind: SolverKind,
    energy: &EnergyMap,
    forward: Option<&ForwardCosts>,
    opts: SolverOptions,
) -> Result<Seam> {
    Solver::new(kind, opts)?.solve(energy, forward)
}
