//! Runtime measurements of the seam solvers and of whole carves, plus the
//! log-log fits used to read growth rates off them.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::hint::black_box;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use chrono::{DateTime, SecondsFormat, SubsecRound, Utc};
use image::imageops::{self, FilterType};
use image::RgbImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::carver::{carve_to_width, CarveConfig};
use crate::energy::{forward_costs, EnergyFn};
use crate::raster::{to_grayscale, Grid, PixelGrid};
use crate::solvers::{Solver, SolverKind, SolverOptions};
use crate::{Error, Result};

/// Side lengths used for the polynomial-time solvers.
pub const FAST_SIZES: [usize; 5] = [180, 360, 480, 720, 1080];
/// Side lengths small enough for exhaustive search.
pub const BRUTE_SIZES: [usize; 5] = [2, 5, 7, 10, 12];
/// Seed of the generated benchmark image.
pub const FIXTURE_SEED: u64 = 0x5EA4_CA27;

pub const CSV_HEADER: &str = "solver,energy_fn,n,phase,scale,wall_time_s,repetitions,timestamp_utc";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    /// One seam search on precomputed energy.
    SingleSeam,
    /// A whole carve to `scale` times the width, energy included.
    FullCarve,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::SingleSeam => "single_seam",
            Phase::FullCarve => "full_carve",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Phase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single_seam" => Ok(Phase::SingleSeam),
            "full_carve" => Ok(Phase::FullCarve),
            _ => Err(Error::Csv(format!("unknown phase {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub solver: SolverKind,
    pub energy_fn: EnergyFn,
    /// Side length of the square image.
    pub n: usize,
    pub phase: Phase,
    /// Carve scale; only set for [`Phase::FullCarve`].
    pub scale: Option<f64>,
    /// Fastest of `repetitions` runs, in seconds.
    pub wall_time: f64,
    pub repetitions: usize,
    pub timestamp: DateTime<Utc>,
}

/// Least-squares line through `(ln n, ln t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

fn check_reps(reps: usize) -> Result<()> {
    if reps == 0 {
        return Err(Error::InvalidConfig(
            "repetitions must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Seconds, never zero: a sub-resolution run counts as one nanosecond.
fn seconds(d: Duration) -> f64 {
    d.as_secs_f64().max(1e-9)
}

fn now() -> DateTime<Utc> {
    // CSV timestamps carry microseconds.
    Utc::now().trunc_subsecs(6)
}

/// Times the solver alone on the image's precomputed energy; the fastest
/// of `reps` runs is kept.
pub fn time_single_seam(grid: &PixelGrid, cfg: &CarveConfig, reps: usize) -> Result<BenchRecord> {
    check_reps(reps)?;
    cfg.validate()?;
    let luma = to_grayscale(grid);
    let energy = cfg.energy_fn.compute(&luma);
    let forward = cfg.forward.then(|| forward_costs(&luma));
    let solver = Solver::new(cfg.solver, cfg.solver_options)?;

    let mut best = Duration::MAX;
    for _ in 0..reps {
        let started = Instant::now();
        let seam = solver.solve(black_box(&energy), forward.as_ref())?;
        best = best.min(started.elapsed());
        black_box(seam);
    }
    Ok(BenchRecord {
        solver: cfg.solver,
        energy_fn: cfg.energy_fn,
        n: grid.width(),
        phase: Phase::SingleSeam,
        scale: None,
        wall_time: seconds(best),
        repetitions: reps,
        timestamp: now(),
    })
}

/// Target width for carving `width` columns to `scale`.
pub fn scaled_width(width: usize, scale: f64) -> usize {
    ((scale * width as f64).round() as usize).clamp(1, width.max(1))
}

/// Times `carve_to_width(grid, round(scale * width))` end to end.
pub fn time_full_carve(
    grid: &PixelGrid,
    scale: f64,
    cfg: &CarveConfig,
    reps: usize,
) -> Result<BenchRecord> {
    check_reps(reps)?;
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "carve scale must lie in (0, 1], got {scale}"
        )));
    }
    let target = scaled_width(grid.width(), scale);
    let mut best = Duration::MAX;
    for _ in 0..reps {
        let started = Instant::now();
        let carved = carve_to_width(grid, target, cfg)?;
        best = best.min(started.elapsed());
        black_box(carved);
    }
    Ok(BenchRecord {
        solver: cfg.solver,
        energy_fn: cfg.energy_fn,
        n: grid.width(),
        phase: Phase::FullCarve,
        scale: Some(scale),
        wall_time: seconds(best),
        repetitions: reps,
        timestamp: now(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub sizes: Vec<usize>,
    pub solvers: Vec<SolverKind>,
    pub scale: f64,
    pub reps: usize,
    pub energy_fn: EnergyFn,
    pub solver_options: SolverOptions,
    /// Refuse to upsample: sizes larger than the source are an error.
    pub crop_only: bool,
}

impl SuiteConfig {
    pub fn new(sizes: Vec<usize>, solvers: Vec<SolverKind>) -> Self {
        SuiteConfig {
            sizes,
            solvers,
            scale: 0.5,
            reps: 3,
            energy_fn: EnergyFn::E1,
            solver_options: SolverOptions::default(),
            crop_only: false,
        }
    }

    pub fn fast() -> Self {
        Self::new(
            FAST_SIZES.to_vec(),
            vec![
                SolverKind::Greedy,
                SolverKind::Dynamic,
                SolverKind::ParallelDynamic,
            ],
        )
    }

    pub fn brute() -> Self {
        Self::new(BRUTE_SIZES.to_vec(), vec![SolverKind::BruteForce])
    }
}

/// `n x n` version of `source`: a centre crop when the source is large
/// enough, a bilinear resize otherwise.
pub fn square_from(source: &PixelGrid, n: usize, crop_only: bool) -> Result<PixelGrid> {
    let (w, h) = source.dimensions();
    if n == 0 {
        return Err(Error::InvalidConfig("image size must be positive".into()));
    }
    if w >= n && h >= n {
        let (top, left) = ((h - n) / 2, (w - n) / 2);
        return Ok(Grid::from_fn(n, n, |r, c| *source.get(top + r, left + c)));
    }
    if crop_only {
        return Err(Error::SizeExceedsSource {
            size: n,
            width: w,
            height: h,
        });
    }
    let raw: Vec<u8> = source.data().iter().flatten().copied().collect();
    let img = RgbImage::from_raw(w as u32, h as u32, raw).expect("buffer sized from grid");
    let resized = imageops::resize(&img, n as u32, n as u32, FilterType::Triangle);
    let data = resized
        .into_raw()
        .chunks_exact(3)
        .map(|p| [p[0], p[1], p[2]])
        .collect();
    Grid::new(n, n, data)
}

/// Both phases for every `(size, solver)` pair, sizes outermost.
pub fn run_suite(suite: &SuiteConfig, source: &PixelGrid) -> Result<Vec<BenchRecord>> {
    check_reps(suite.reps)?;
    let cap = suite.solver_options.brute_force_cap;
    if suite.solvers.contains(&SolverKind::BruteForce) {
        if let Some(&size) = suite.sizes.iter().find(|&&s| s > cap) {
            return Err(Error::SolverCapViolated { size, cap });
        }
    }
    let mut records = Vec::with_capacity(suite.sizes.len() * suite.solvers.len() * 2);
    if suite.solvers.is_empty() {
        return Ok(records);
    }
    for &n in &suite.sizes {
        let image = square_from(source, n, suite.crop_only)?;
        for &solver in &suite.solvers {
            let cfg = CarveConfig {
                solver,
                energy_fn: suite.energy_fn,
                solver_options: suite.solver_options,
                ..CarveConfig::default()
            };
            records.push(time_single_seam(&image, &cfg, suite.reps)?);
            records.push(time_full_carve(&image, suite.scale, &cfg, suite.reps)?);
        }
    }
    Ok(records)
}

/// Ordinary least squares of `ln wall_time` on `ln n` over the matching
/// records.
pub fn fit_scaling(
    records: &[BenchRecord],
    solver: SolverKind,
    phase: Phase,
) -> Result<ScalingFit> {
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.solver == solver && r.phase == phase)
        .map(|r| ((r.n as f64).ln(), r.wall_time.ln()))
        .collect();
    let mut sizes: Vec<u64> = points.iter().map(|p| p.0.to_bits()).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{solver}/{phase} has {} distinct sizes, need 3",
            sizes.len()
        )));
    }

    let count = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / count;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / count;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in &points {
        let (dx, dy) = (x - mean_x, y - mean_y);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = points
        .iter()
        .map(|&(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(ScalingFit {
        slope,
        intercept,
        r_squared: r_squared.clamp(0.0, 1.0),
    })
}

/// Implied per-row branching factor of brute-force single-seam times:
/// the geometric mean over consecutive sizes of
/// `(t(n_{k+1}) / t(n_k))^(1 / (n_{k+1} - n_k))`.
pub fn exp_growth_ratio(records: &[BenchRecord]) -> Result<f64> {
    let mut by_size: BTreeMap<usize, f64> = BTreeMap::new();
    for r in records
        .iter()
        .filter(|r| r.solver == SolverKind::BruteForce && r.phase == Phase::SingleSeam)
    {
        let t = by_size.entry(r.n).or_insert(f64::INFINITY);
        *t = t.min(r.wall_time);
    }
    if by_size.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "brute-force single-seam times at {} sizes, need 2",
            by_size.len()
        )));
    }
    let points: Vec<(usize, f64)> = by_size.into_iter().collect();
    let log_factors: Vec<f64> = points
        .windows(2)
        .map(|p| (p[1].1 / p[0].1).ln() / (p[1].0 - p[0].0) as f64)
        .collect();
    Ok((log_factors.iter().sum::<f64>() / log_factors.len() as f64).exp())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Csv(format!("{other:?}")),
    }
}

/// Writes records under [`CSV_HEADER`]; times get six fractional digits.
pub fn emit_csv(records: &[BenchRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut out = csv::Writer::from_path(path).map_err(csv_error)?;
    out.write_record(CSV_HEADER.split(',')).map_err(csv_error)?;
    for r in records {
        out.write_record([
            r.solver.name().to_string(),
            r.energy_fn.name().to_string(),
            r.n.to_string(),
            r.phase.name().to_string(),
            r.scale.map(|s| s.to_string()).unwrap_or_default(),
            format!("{:.6}", r.wall_time),
            r.repetitions.to_string(),
            r.timestamp.to_rfc3339_opts(SecondsFormat::Micros, true),
        ])
        .map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

fn field<T: FromStr>(value: &str, name: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Csv(format!("bad {name} {value:?}")))
}

/// Reads a file written by [`emit_csv`].
pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<BenchRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_error)?;
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_string)
        .collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::Csv(format!(
            "unexpected header {:?}",
            header.join(",")
        )));
    }
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(csv_error)?;
        let get = |i: usize| row.get(i).unwrap_or("");
        let timestamp = DateTime::parse_from_rfc3339(get(7))
            .map_err(|e| Error::Csv(format!("bad timestamp {:?}: {e}", get(7))))?
            .with_timezone(&Utc);
        records.push(BenchRecord {
            solver: get(0)
                .parse()
                .map_err(|_| Error::Csv(format!("bad solver {:?}", get(0))))?,
            energy_fn: get(1)
                .parse()
                .map_err(|_| Error::Csv(format!("bad energy_fn {:?}", get(1))))?,
            n: field(get(2), "n")?,
            phase: get(3).parse()?,
            scale: match get(4) {
                "" => None,
                s => Some(field(s, "scale")?),
            },
            wall_time: field(get(5), "wall_time_s")?,
            repetitions: field(get(6), "repetitions")?,
            timestamp,
        });
    }
    Ok(records)
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

type Series = (SolverKind, Phase);

/// Renders a log-log chart of wall time against image side, one polyline
/// per `(solver, phase)` series.
pub fn render_svg(records: &[BenchRecord]) -> Result<String> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut series: Vec<(Series, Vec<(f64, f64)>)> = Vec::new();
    for r in records {
        let key = (r.solver, r.phase);
        let point = ((r.n as f64).log10(), r.wall_time.log10());
        match series.iter_mut().find(|(k, _)| *k == key) {
            Some((_, pts)) => pts.push(point),
            None => series.push((key, vec![point])),
        }
    }
    for (_, pts) in &mut series {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    }

    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for (x, y) in series.iter().flat_map(|(_, p)| p.iter().copied()) {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    // Pad to whole decades on the time axis; keep a sliver on the size axis.
    let (y0, y1) = (y0.floor(), y1.ceil().max(y0.floor() + 1.0));
    let pad = ((x1 - x0) * 0.05).max(0.05);
    let (x0, x1) = (x0 - pad, x1 + pad);

    const W: f64 = 720.0;
    const H: f64 = 480.0;
    const LEFT: f64 = 80.0;
    const RIGHT: f64 = 200.0;
    const TOP: f64 = 30.0;
    const BOTTOM: f64 = 60.0;
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * (W - LEFT - RIGHT);
    let py = |y: f64| H - BOTTOM - (y - y0) / (y1 - y0) * (H - TOP - BOTTOM);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let (ax0, ax1, ay0, ay1) = (px(x0), px(x1), py(y0), py(y1));
    let _ = writeln!(
        svg,
        r#"<path d="M{ax0:.1},{ay1:.1} L{ax0:.1},{ay0:.1} L{ax1:.1},{ay0:.1}" fill="none" stroke="black"/>"#
    );

    let mut sizes: Vec<usize> = records.iter().map(|r| r.n).collect();
    sizes.sort_unstable();
    sizes.dedup();
    for n in sizes {
        let x = px((n as f64).log10());
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.1}" y1="{ay0:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{n}</text>"#,
            ay0 + 5.0,
            ay0 + 20.0
        );
    }
    for decade in y0 as i32..=y1 as i32 {
        let y = py(decade as f64);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.1}" y1="{y:.1}" x2="{ax0:.1}" y2="{y:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">1e{decade}</text>"#,
            ax0 - 5.0,
            ax0 - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">image side n (px, log scale)</text>"#,
        (ax0 + ax1) / 2.0,
        H - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate(20 {:.1}) rotate(-90)" text-anchor="middle">wall time (s, log scale)</text>"#,
        (ay0 + ay1) / 2.0
    );

    for (i, ((solver, phase), pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y)))
            .collect();
        let label = format!("{solver} {phase}");
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"><title>{label}</title></polyline>"#,
            coords.join(" ")
        );
        let ly = TOP + 20.0 * i as f64;
        let lx = W - RIGHT + 20.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{label}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_plot(records: &[BenchRecord], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, render_svg(records)?)?;
    Ok(())
}

/// Deterministic `side x side` test picture: a smooth colour gradient with
/// mild noise, overlaid with a few saturated shapes that carry most of the
/// edge energy.
pub fn fixture_image(side: usize, seed: u64) -> PixelGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = side.max(1) as f64;
    let discs = [
        (0.30, 0.35, 0.12, [220u8, 40, 40]),
        (0.70, 0.60, 0.16, [30, 60, 200]),
    ];
    Grid::from_fn(side, side, |row, col| {
        let (y, x) = (row as f64 / s, col as f64 / s);
        let mut px = [
            (40.0 + 150.0 * x) as i32,
            (60.0 + 120.0 * y) as i32,
            (170.0 - 80.0 * (x + y) / 2.0) as i32,
        ];
        for &(cy, cx, radius, color) in &discs {
            if (y - cy).powi(2) + (x - cx).powi(2) <= radius * radius {
                px = color.map(i32::from);
            }
        }
        // Dark bar across the lower part.
        if (0.82..0.88).contains(&y) && (0.15..0.85).contains(&x) {
            px = [20, 20, 20];
        }
        let noise: i32 = rng.gen_range(-6..=6);
        px.map(|v| (v + noise).clamp(0, 255) as u8)
    })
}
