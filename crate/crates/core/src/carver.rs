//! Resizing pipelines built from repeated seam search and removal.

use std::borrow::Cow;
use std::time::{Duration, Instant};

use crate::energy::{apply_mask_bounded, forward_costs, EnergyFn, EnergyMap, RemovalMask};
use crate::raster::{to_grayscale, Grid, LumaGrid, PixelGrid, Rgb};
use crate::solvers::{Seam, Solver, SolverKind, SolverOptions};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CarveConfig {
    pub solver: SolverKind,
    pub energy_fn: EnergyFn,
    /// Charge forward-energy transition costs. Dynamic solvers only.
    pub forward: bool,
    /// Recompute the energy map after every removal. When off, the first
    /// map is carried along and loses the removed seam each iteration.
    pub recompute: bool,
    pub solver_options: SolverOptions,
}

impl Default for CarveConfig {
    fn default() -> Self {
        CarveConfig {
            solver: SolverKind::default(),
            energy_fn: EnergyFn::default(),
            forward: false,
            recompute: true,
            solver_options: SolverOptions::default(),
        }
    }
}

impl CarveConfig {
    pub fn with_solver(solver: SolverKind) -> Self {
        CarveConfig {
            solver,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.forward && !self.solver.supports_forward() {
            return Err(Error::InvalidConfig(format!(
                "forward energy is only available with the dp and pardp solvers, not {}",
                self.solver
            )));
        }
        Ok(())
    }
}

/// Wall-clock split of one iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SeamTiming {
    pub energy: Duration,
    pub solve: Duration,
    pub removal: Duration,
}

impl SeamTiming {
    pub fn total(&self) -> Duration {
        self.energy + self.solve + self.removal
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CarveReport {
    /// Seams removed or inserted.
    pub seams: usize,
    pub per_seam: Vec<SeamTiming>,
    pub total: Duration,
}

impl CarveReport {
    fn extend(&mut self, other: CarveReport) {
        self.seams += other.seams;
        self.per_seam.extend(other.per_seam);
        self.total += other.total;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeamDirection {
    /// Top-to-bottom seams; narrows the image.
    Vertical,
    /// Left-to-right seams; shortens the image.
    Horizontal,
}

/// Removes `seam` from any grid, shifting the rest of each row left.
pub fn remove_seam<T: Copy>(grid: &Grid<T>, seam: &Seam) -> Result<Grid<T>> {
    if grid.width() < 2 {
        return Err(Error::WidthTooSmall(grid.width()));
    }
    seam.validate(grid.width(), grid.height())?;
    Ok(grid.without_columns(seam.columns()))
}

/// Inserts a pixel to the right of `seam` on every row, the rounded mean
/// of its left and right neighbours (a copy of the left one at the right
/// border).
pub fn insert_seam(grid: &PixelGrid, seam: &Seam) -> Result<PixelGrid> {
    seam.validate(grid.width(), grid.height())?;
    Ok(insert_columns(grid, seam.columns()))
}

fn mean(a: Rgb, b: Rgb) -> Rgb {
    std::array::from_fn(|c| (a[c] as u16 + b[c] as u16).div_ceil(2) as u8)
}

/// Per-row insertion; `cols` only needs to be in range, not connected.
fn insert_columns(grid: &PixelGrid, cols: &[usize]) -> PixelGrid {
    let w = grid.width();
    let mut data = Vec::with_capacity((w + 1) * grid.height());
    for (row, &c) in grid.rows().zip(cols) {
        data.extend_from_slice(&row[..=c]);
        let right = row.get(c + 1).copied().unwrap_or(row[c]);
        data.push(mean(row[c], right));
        data.extend_from_slice(&row[c + 1..]);
    }
    Grid::new(w + 1, grid.height(), data).expect("one pixel added per row")
}

struct Carried {
    luma: LumaGrid,
    energy: EnergyMap,
}

struct Step {
    /// Seam in original-image columns, when origins are tracked.
    original: Option<Vec<usize>>,
    timing: SeamTiming,
}

/// Mutable state of a removal loop: the shrinking image plus everything
/// that has to shrink with it.
struct Carving<'a> {
    cfg: &'a CarveConfig,
    solver: Solver,
    image: PixelGrid,
    mask: Option<RemovalMask>,
    origin: Option<Grid<u32>>,
    carried: Option<Carried>,
}

impl<'a> Carving<'a> {
    fn new(image: PixelGrid, cfg: &'a CarveConfig) -> Result<Self> {
        cfg.validate()?;
        if image.is_empty() {
            return Err(Error::EmptyImage);
        }
        Ok(Carving {
            cfg,
            solver: Solver::new(cfg.solver, cfg.solver_options)?,
            image,
            mask: None,
            origin: None,
            carried: None,
        })
    }

    fn with_mask(mut self, mask: RemovalMask) -> Self {
        self.mask = Some(mask);
        self
    }

    fn tracking_origins(mut self) -> Self {
        self.origin = Some(Grid::from_fn(
            self.image.width(),
            self.image.height(),
            |_, c| c as u32,
        ));
        self
    }

    fn masked_count(&self) -> usize {
        self.mask
            .as_ref()
            .map_or(0, |m| m.data().iter().filter(|&&f| f).count())
    }

    fn step(&mut self) -> Result<Step> {
        if self.image.width() < 2 {
            return Err(Error::WidthTooSmall(self.image.width()));
        }
        let started = Instant::now();
        if !self.cfg.recompute && self.carried.is_none() {
            let luma = to_grayscale(&self.image);
            let energy = self.cfg.energy_fn.compute(&luma);
            self.carried = Some(Carried { luma, energy });
        }
        let fresh;
        let (luma, base) = match &self.carried {
            Some(c) => (&c.luma, &c.energy),
            None => {
                let luma = to_grayscale(&self.image);
                let energy = self.cfg.energy_fn.compute(&luma);
                fresh = (luma, energy);
                (&fresh.0, &fresh.1)
            }
        };
        let forward = self.cfg.forward.then(|| forward_costs(luma));
        let energy = match &self.mask {
            Some(mask) => {
                let extra = forward.as_ref().map_or(0.0, |f| f.max_cost());
                Cow::Owned(apply_mask_bounded(base, mask, extra)?)
            }
            None => Cow::Borrowed(base),
        };
        let energy_done = Instant::now();

        let seam = self.solver.solve(&energy, forward.as_ref())?;
        let solve_done = Instant::now();

        let cols = seam.columns();
        self.image = remove_seam(&self.image, &seam)?;
        if let Some(mask) = &mut self.mask {
            *mask = mask.without_columns(cols);
        }
        let original = self.origin.as_mut().map(|origin| {
            let mapped = cols
                .iter()
                .enumerate()
                .map(|(row, &c)| *origin.get(row, c) as usize)
                .collect();
            *origin = origin.without_columns(cols);
            mapped
        });
        if let Some(c) = &mut self.carried {
            c.luma = c.luma.without_columns(cols);
            c.energy = c.energy.without_columns(cols);
        }
        let removal_done = Instant::now();

        Ok(Step {
            original,
            timing: SeamTiming {
                energy: energy_done - started,
                solve: solve_done - energy_done,
                removal: removal_done - solve_done,
            },
        })
    }
}

/// Narrows `grid` to `target_width` columns, one minimum seam at a time.
pub fn carve_to_width(
    grid: &PixelGrid,
    target_width: usize,
    cfg: &CarveConfig,
) -> Result<(PixelGrid, CarveReport)> {
    let started = Instant::now();
    if target_width == 0 || target_width > grid.width() {
        return Err(Error::InvalidTarget {
            target: target_width,
            current: grid.width(),
        });
    }
    let mut carving = Carving::new(grid.clone(), cfg)?;
    let count = grid.width() - target_width;
    let mut per_seam = Vec::with_capacity(count);
    for _ in 0..count {
        per_seam.push(carving.step()?.timing);
    }
    let report = CarveReport {
        seams: count,
        per_seam,
        total: started.elapsed(),
    };
    Ok((carving.image, report))
}

/// Shortens `grid` to `target_height` rows by carving its transpose.
pub fn carve_to_height(
    grid: &PixelGrid,
    target_height: usize,
    cfg: &CarveConfig,
) -> Result<(PixelGrid, CarveReport)> {
    let (carved, report) = carve_to_width(&grid.transpose(), target_height, cfg)?;
    Ok((carved.transpose(), report))
}

/// Runs `count` removals on a scratch copy of `grid` and returns each
/// removed seam in the original image's column coordinates, oldest first.
pub fn seam_sequence(
    grid: &PixelGrid,
    count: usize,
    cfg: &CarveConfig,
) -> Result<(Vec<Vec<usize>>, CarveReport)> {
    let started = Instant::now();
    if count >= grid.width() {
        return Err(Error::TargetTooLarge {
            target: count,
            current: grid.width(),
            limit: grid.width().saturating_sub(1),
        });
    }
    let mut carving = Carving::new(grid.clone(), cfg)?.tracking_origins();
    let mut seams = Vec::with_capacity(count);
    let mut per_seam = Vec::with_capacity(count);
    for _ in 0..count {
        let step = carving.step()?;
        seams.push(step.original.expect("origins tracked"));
        per_seam.push(step.timing);
    }
    let report = CarveReport {
        seams: count,
        per_seam,
        total: started.elapsed(),
    };
    Ok((seams, report))
}

/// Widens `grid` by duplicating, with neighbour averaging, the seams that
/// removal would have taken first. At most `2 * width - 1` per call.
pub fn enlarge_to_width(
    grid: &PixelGrid,
    target_width: usize,
    cfg: &CarveConfig,
) -> Result<(PixelGrid, CarveReport)> {
    let started = Instant::now();
    let w = grid.width();
    if target_width < w {
        return Err(Error::InvalidTarget {
            target: target_width,
            current: w,
        });
    }
    let limit = (2 * w).saturating_sub(1);
    if target_width > limit {
        return Err(Error::TargetTooLarge {
            target: target_width,
            current: w,
            limit,
        });
    }
    let (mut pending, mut report) = seam_sequence(grid, target_width - w, cfg)?;

    let mut out = grid.clone();
    for idx in 0..pending.len() {
        let (done, later) = pending.split_at_mut(idx + 1);
        let inserted = &done[idx];
        out = insert_columns(&out, inserted);
        // Everything right of an inserted pixel moved one column over.
        for seam in later.iter_mut() {
            for (c, &at) in seam.iter_mut().zip(inserted) {
                if *c > at {
                    *c += 1;
                }
            }
        }
    }
    report.total = started.elapsed();
    Ok((out, report))
}

pub fn enlarge_to_height(
    grid: &PixelGrid,
    target_height: usize,
    cfg: &CarveConfig,
) -> Result<(PixelGrid, CarveReport)> {
    let (wide, report) = enlarge_to_width(&grid.transpose(), target_height, cfg)?;
    Ok((wide.transpose(), report))
}

/// Grows to `target_width` in as many single-pass enlargements as needed.
fn enlarge_repeatedly(
    grid: PixelGrid,
    target_width: usize,
    cfg: &CarveConfig,
) -> Result<(PixelGrid, CarveReport)> {
    let mut image = grid;
    let mut report = CarveReport::default();
    while image.width() < target_width {
        if image.width() == 1 {
            // The only seam of a one-column image is that column.
            image = insert_columns(&image, &vec![0; image.height()]);
            continue;
        }
        let next = target_width
            .min(2 * image.width() - 1)
            .max(image.width() + 1);
        let (wider, r) = enlarge_to_width(&image, next, cfg)?;
        image = wider;
        report.extend(r);
    }
    Ok((image, report))
}

#[derive(Clone, Debug)]
pub struct ObjectRemoval {
    pub image: PixelGrid,
    pub direction: SeamDirection,
    /// Seams carved out before restoration.
    pub seams_removed: usize,
    /// Masked pixels left after each removal; strictly decreasing.
    pub masked_after_each_seam: Vec<usize>,
    /// The mask as it stood when removal stopped. All `false`.
    pub remaining_mask: RemovalMask,
    pub report: CarveReport,
}

/// Bounding box of the flagged cells as `(width, height)`.
fn mask_extent(mask: &RemovalMask) -> Option<(usize, usize)> {
    let (mut r0, mut r1, mut c0, mut c1) = (usize::MAX, 0, usize::MAX, 0);
    for (r, row) in mask.rows().enumerate() {
        for (c, _) in row.iter().enumerate().filter(|(_, &f)| f) {
            r0 = r0.min(r);
            r1 = r1.max(r);
            c0 = c0.min(c);
            c1 = c1.max(c);
        }
    }
    (r0 != usize::MAX).then(|| (c1 - c0 + 1, r1 - r0 + 1))
}

/// Carves the masked object out, then restores the original dimensions by
/// seam insertion.
pub fn remove_object(
    grid: &PixelGrid,
    mask: &RemovalMask,
    cfg: &CarveConfig,
) -> Result<(PixelGrid, CarveReport)> {
    remove_object_with(grid, mask, cfg, true).map(|r| (r.image, r.report))
}

/// [`remove_object`] with restoration optional.
///
/// Seams run across the narrower side of the mask's bounding box:
/// vertical when it is at most as wide as it is tall, horizontal
/// otherwise.
pub fn remove_object_with(
    grid: &PixelGrid,
    mask: &RemovalMask,
    cfg: &CarveConfig,
    restore: bool,
) -> Result<ObjectRemoval> {
    let started = Instant::now();
    if grid.dimensions() != mask.dimensions() {
        return Err(Error::DimensionMismatch {
            expected: grid.dimensions(),
            actual: mask.dimensions(),
        });
    }
    let (box_w, box_h) = mask_extent(mask).ok_or(Error::EmptyMask)?;
    let direction = if box_w <= box_h {
        SeamDirection::Vertical
    } else {
        SeamDirection::Horizontal
    };
    let (image, mask) = match direction {
        SeamDirection::Vertical => (grid.clone(), mask.clone()),
        SeamDirection::Horizontal => (grid.transpose(), mask.transpose()),
    };
    let original_width = image.width();

    let mut carving = Carving::new(image, cfg)?.with_mask(mask);
    let mut report = CarveReport::default();
    let mut masked_after_each_seam = Vec::new();
    while carving.masked_count() > 0 {
        report.per_seam.push(carving.step()?.timing);
        masked_after_each_seam.push(carving.masked_count());
    }
    let seams_removed = masked_after_each_seam.len();
    report.seams = seams_removed;
    let remaining_mask = carving.mask.take().expect("mask attached");
    let mut image = carving.image;

    if restore {
        let (restored, r) = enlarge_repeatedly(image, original_width, cfg)?;
        image = restored;
        report.extend(r);
    }

    let (image, remaining_mask) = match direction {
        SeamDirection::Vertical => (image, remaining_mask),
        SeamDirection::Horizontal => (image.transpose(), remaining_mask.transpose()),
    };
    report.total = started.elapsed();
    Ok(ObjectRemoval {
        image,
        direction,
        seams_removed,
        masked_after_each_seam,
        remaining_mask,
        report,
    })
}
