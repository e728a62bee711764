//! Per-pixel energy maps.
//!
//! Every stencil reads its neighbours with edge replication (indices are
//! clamped into the grid), so energies are defined on every cell and the
//! map always has the image's dimensions.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Deref;
use std::path::Path;
use std::str::FromStr;

use image::ExtendedColorType;

use crate::raster::{self, Grid, LumaGrid};
use crate::{Error, Result};

/// Finite per-pixel importance values.
///
/// Negative values only appear after [`apply_mask`].
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyMap(Grid<f64>);

impl EnergyMap {
    pub fn new(grid: Grid<f64>) -> Result<Self> {
        if let Some(i) = grid.data().iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "energy at index {i} is not finite"
            )));
        }
        Ok(EnergyMap(grid))
    }

    pub fn from_values(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        Self::new(Grid::new(width, height, values)?)
    }

    /// Row-major construction from nested rows, mostly for tests and fixtures.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != width) {
            return Err(Error::InvalidConfig("ragged energy rows".into()));
        }
        let values = rows
            .iter()
            .flat_map(|r| r.as_ref().iter().copied())
            .collect();
        Self::from_values(width, rows.len(), values)
    }

    pub fn into_grid(self) -> Grid<f64> {
        self.0
    }

    pub(crate) fn without_columns(&self, cols: &[usize]) -> Self {
        EnergyMap(self.0.without_columns(cols))
    }
}

impl Deref for EnergyMap {
    type Target = Grid<f64>;

    fn deref(&self) -> &Grid<f64> {
        &self.0
    }
}

/// Pixels flagged `true` are to be carved out.
pub type RemovalMask = Grid<bool>;

/// Extra cost paid when a seam steps into `(i, j)` from the upper-left,
/// from directly above, or from the upper-right. Each one is the
/// intensity jump between the pixels that become neighbours once the
/// seam pixel is gone.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardCosts {
    pub cost_left: Grid<f64>,
    pub cost_up: Grid<f64>,
    pub cost_right: Grid<f64>,
}

impl ForwardCosts {
    pub fn width(&self) -> usize {
        self.cost_up.width()
    }

    pub fn height(&self) -> usize {
        self.cost_up.height()
    }

    /// Largest transition cost anywhere in the three grids.
    pub fn max_cost(&self) -> f64 {
        self.cost_left
            .data()
            .iter()
            .chain(self.cost_right.data())
            .fold(0.0, |acc: f64, &v| acc.max(v))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum EnergyFn {
    /// Sum of absolute first derivatives.
    #[default]
    E1,
    /// `E1` plus absolute second derivatives.
    E2,
    /// `E1` divided by the peak of a local histogram of oriented gradients.
    Hog,
    /// `E1` plus local intensity entropy.
    Entropy,
}

impl EnergyFn {
    pub const ALL: [EnergyFn; 4] = [EnergyFn::E1, EnergyFn::E2, EnergyFn::Hog, EnergyFn::Entropy];

    pub fn name(self) -> &'static str {
        match self {
            EnergyFn::E1 => "e1",
            EnergyFn::E2 => "e2",
            EnergyFn::Hog => "hog",
            EnergyFn::Entropy => "entropy",
        }
    }

    pub fn compute(self, gray: &LumaGrid) -> EnergyMap {
        match self {
            EnergyFn::E1 => energy_e1(gray),
            EnergyFn::E2 => energy_e2(gray),
            EnergyFn::Hog => energy_hog(gray),
            EnergyFn::Entropy => energy_entropy(gray),
        }
    }
}

impl fmt::Display for EnergyFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnergyFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EnergyFn::ALL
            .into_iter()
            .find(|e| e.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown energy function {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HogParams {
    /// Side of the square window, in pixels. Odd.
    pub window: usize,
    pub bins: usize,
    /// Floor applied to the histogram peak before dividing.
    pub epsilon: f64,
}

impl Default for HogParams {
    fn default() -> Self {
        HogParams {
            window: 11,
            bins: 8,
            epsilon: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyParams {
    /// Side of the square window, in pixels. Odd.
    pub window: usize,
    /// Number of equal-width intensity bins over `[0, 256)`.
    pub bins: usize,
}

impl Default for EntropyParams {
    fn default() -> Self {
        EntropyParams {
            window: 9,
            bins: 16,
        }
    }
}

/// Signed central differences `(dx, dy)` at `(row, col)`, unscaled.
#[inline]
fn central_diff(gray: &LumaGrid, row: usize, col: usize) -> (f64, f64) {
    let (r, c) = (row as isize, col as isize);
    let dx = gray.get_clamped(r, c + 1) - gray.get_clamped(r, c - 1);
    let dy = gray.get_clamped(r + 1, c) - gray.get_clamped(r - 1, c);
    (dx, dy)
}

/// `|f(x+1) - f(x-1)| + |f(y+1) - f(y-1)|`, in `[0, 510]`.
pub fn energy_e1(gray: &LumaGrid) -> EnergyMap {
    EnergyMap(Grid::from_fn(gray.width(), gray.height(), |row, col| {
        let (dx, dy) = central_diff(gray, row, col);
        dx.abs() + dy.abs()
    }))
}

pub fn energy_e2(gray: &LumaGrid) -> EnergyMap {
    EnergyMap(Grid::from_fn(gray.width(), gray.height(), |row, col| {
        let (r, c) = (row as isize, col as isize);
        let (dx, dy) = central_diff(gray, row, col);
        let centre = *gray.get(row, col);
        let dxx = gray.get_clamped(r, c + 1) - 2.0 * centre + gray.get_clamped(r, c - 1);
        let dyy = gray.get_clamped(r + 1, c) - 2.0 * centre + gray.get_clamped(r - 1, c);
        dx.abs() + dy.abs() + dxx.abs() + dyy.abs()
    }))
}

/// Sum of `values` over a `(2 * radius + 1)²` window centred on every cell,
/// with indices clamped. Clamping acts on rows and columns independently,
/// so the window sum factors into a horizontal pass followed by a
/// vertical one.
fn clamped_box_sum<T>(values: &Grid<T>, radius: usize) -> Grid<T>
where
    T: Copy + Default + std::ops::AddAssign,
{
    let (w, h) = values.dimensions();
    let r = radius as isize;
    let horizontal = Grid::from_fn(w, h, |row, col| {
        let mut acc = T::default();
        for d in -r..=r {
            acc += values.get_clamped(row as isize, col as isize + d);
        }
        acc
    });
    Grid::from_fn(w, h, |row, col| {
        let mut acc = T::default();
        for d in -r..=r {
            acc += horizontal.get_clamped(row as isize + d, col as isize);
        }
        acc
    })
}

/// Bin of an unsigned gradient orientation in `[0, pi)`.
pub(crate) fn orientation_bin(dx: f64, dy: f64, bins: usize) -> usize {
    let mut theta = dy.atan2(dx);
    if theta < 0.0 {
        theta += PI;
    }
    if theta >= PI {
        theta -= PI;
    }
    ((theta / PI * bins as f64) as usize).min(bins - 1)
}

pub fn energy_hog(gray: &LumaGrid) -> EnergyMap {
    energy_hog_with(gray, &HogParams::default())
}

pub fn energy_hog_with(gray: &LumaGrid, params: &HogParams) -> EnergyMap {
    let (w, h) = gray.dimensions();
    let e1 = energy_e1(gray);
    let gradients = Grid::from_fn(w, h, |row, col| {
        let (dx, dy) = central_diff(gray, row, col);
        (dx.hypot(dy), orientation_bin(dx, dy, params.bins))
    });

    let mut peak = Grid::from_fn(w, h, |_, _| 0.0f64);
    for bin in 0..params.bins {
        let weights = gradients.map(|&(mag, b)| if b == bin { mag } else { 0.0 });
        let sums = clamped_box_sum(&weights, params.window / 2);
        for (p, &s) in peak.data_mut().iter_mut().zip(sums.data()) {
            *p = p.max(s);
        }
    }

    let values = e1
        .data()
        .iter()
        .zip(peak.data())
        .map(|(&e, &m)| e / m.max(params.epsilon))
        .collect();
    EnergyMap(Grid::new(w, h, values).expect("dimensions preserved"))
}

/// Intensity bin for the entropy histogram.
#[inline]
pub(crate) fn intensity_bin(value: f64, bins: usize) -> usize {
    ((value / 256.0 * bins as f64) as usize).min(bins - 1)
}

/// Shannon entropy in bits of a histogram given as raw counts.
pub(crate) fn entropy_bits(counts: &[u32]) -> f64 {
    let total: u32 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum()
}

pub fn energy_entropy(gray: &LumaGrid) -> EnergyMap {
    energy_entropy_with(gray, &EntropyParams::default())
}

pub fn energy_entropy_with(gray: &LumaGrid, params: &EntropyParams) -> EnergyMap {
    let (w, h) = gray.dimensions();
    let e1 = energy_e1(gray);
    let bins = gray.map(|&v| intensity_bin(v, params.bins));

    let mut counts = vec![0u32; w * h * params.bins];
    for bin in 0..params.bins {
        let hits = bins.map(|&b| u32::from(b == bin));
        let sums = clamped_box_sum(&hits, params.window / 2);
        for (cell, &s) in sums.data().iter().enumerate() {
            counts[cell * params.bins + bin] = s;
        }
    }

    let values = e1
        .data()
        .iter()
        .zip(counts.chunks_exact(params.bins))
        .map(|(&e, hist)| e + entropy_bits(hist))
        .collect();
    EnergyMap(Grid::new(w, h, values).expect("dimensions preserved"))
}

pub fn forward_costs(gray: &LumaGrid) -> ForwardCosts {
    let (w, h) = gray.dimensions();
    let cost_up = Grid::from_fn(w, h, |row, col| {
        let (r, c) = (row as isize, col as isize);
        (gray.get_clamped(r, c + 1) - gray.get_clamped(r, c - 1)).abs()
    });
    let cost_left = Grid::from_fn(w, h, |row, col| {
        let (r, c) = (row as isize, col as isize);
        cost_up.get(row, col) + (gray.get_clamped(r - 1, c) - gray.get_clamped(r, c - 1)).abs()
    });
    let cost_right = Grid::from_fn(w, h, |row, col| {
        let (r, c) = (row as isize, col as isize);
        cost_up.get(row, col) + (gray.get_clamped(r - 1, c) - gray.get_clamped(r, c + 1)).abs()
    });
    ForwardCosts {
        cost_left,
        cost_up,
        cost_right,
    }
}

/// Multiplier on the seam-length energy bound used for masked cells.
const MASK_MARGIN: f64 = 1000.0;

/// Forces minimum seams through the masked pixels by giving each one a
/// large negative energy `-K`, `K = 1000 * (height * max_unmasked + 1)`.
pub fn apply_mask(energy: &EnergyMap, mask: &RemovalMask) -> Result<EnergyMap> {
    apply_mask_bounded(energy, mask, 0.0)
}

/// Like [`apply_mask`], with `extra` added to the per-cell bound. Forward
/// transition costs are not part of the map but still accumulate along a
/// seam, so callers using them pass the largest transition cost here.
pub(crate) fn apply_mask_bounded(
    energy: &EnergyMap,
    mask: &RemovalMask,
    extra: f64,
) -> Result<EnergyMap> {
    if energy.dimensions() != mask.dimensions() {
        return Err(Error::DimensionMismatch {
            expected: energy.dimensions(),
            actual: mask.dimensions(),
        });
    }
    let unmasked_max = energy
        .data()
        .iter()
        .zip(mask.data())
        .filter(|(_, &m)| !m)
        .map(|(&e, _)| e)
        .fold(f64::NEG_INFINITY, f64::max);
    // A fully masked map has no unmasked cells; fall back to the whole map.
    let max = if unmasked_max.is_finite() {
        unmasked_max
    } else {
        energy
            .data()
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let bound = max.max(0.0) + extra;
    let k = MASK_MARGIN * (energy.height() as f64 * bound + 1.0);

    let values = energy
        .data()
        .iter()
        .zip(mask.data())
        .map(|(&e, &m)| if m { -k } else { e })
        .collect();
    EnergyMap::from_values(energy.width(), energy.height(), values)
}

/// Reads a removal mask from a grayscale (or colour) image; luminance
/// `>= 128` marks a pixel for removal.
pub fn load_mask(path: impl AsRef<Path>) -> Result<RemovalMask> {
    let luma = raster::decode(path.as_ref())?.to_luma8();
    let (w, h) = (luma.width() as usize, luma.height() as usize);
    Grid::new(
        w,
        h,
        luma.into_raw().into_iter().map(|v| v >= 128).collect(),
    )
}

/// Min-max normalises the map into 8-bit gray. A flat map renders black.
pub fn normalize_to_gray(energy: &EnergyMap) -> Vec<u8> {
    let (lo, hi) = energy
        .data()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let span = hi - lo;
    energy
        .data()
        .iter()
        .map(|&v| {
            if span > 0.0 {
                ((v - lo) / span * 255.0).round() as u8
            } else {
                0
            }
        })
        .collect()
}

pub fn save_energy_png(energy: &EnergyMap, path: impl AsRef<Path>) -> Result<()> {
    raster::write_png(
        path.as_ref(),
        &normalize_to_gray(energy),
        energy.width(),
        energy.height(),
        ExtendedColorType::L8,
    )
}
