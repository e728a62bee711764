//! Argument parsing and dispatch for the `seamcarve` binary.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use crate::bench::{self, SuiteConfig};
use crate::carver::{self, CarveConfig};
use crate::energy::{self, EnergyFn};
use crate::raster::{self, load_image, save_image, to_grayscale, PixelGrid};
use crate::solvers::{SolverKind, SolverOptions};
use crate::{Error, Result};

/// Colour used to draw seams.
pub const SEAM_COLOR: [u8; 3] = [255, 0, 0];

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "seamcarve",
    version,
    about = "Content-aware image resizing by seam carving"
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum CliCommand {
    /// Carve (or widen) an image to a new size.
    Resize(ResizeArgs),
    /// Widen an image by seam insertion.
    Enlarge(ResizeArgs),
    /// Carve out the pixels flagged by a mask image.
    RemoveObject(RemoveObjectArgs),
    /// Write the normalised energy map as a grayscale PNG.
    Energy(EnergyArgs),
    /// Draw the next minimum seams in red.
    Seams(SeamsArgs),
    /// Time the solvers across image sizes.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct CarveFlags {
    #[arg(long, default_value = "pardp", value_parser = parse_solver)]
    pub solver: SolverKind,
    #[arg(long, default_value = "e1", value_parser = parse_energy)]
    pub energy: EnergyFn,
    /// Use forward-energy transition costs (dp and pardp only).
    #[arg(long)]
    pub forward: bool,
}

impl CarveFlags {
    fn config(&self, solver_options: SolverOptions) -> CarveConfig {
        CarveConfig {
            solver: self.solver,
            energy_fn: self.energy,
            forward: self.forward,
            recompute: true,
            solver_options,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args)]
#[command(group(ArgGroup::new("target").args(["scale", "width", "height"]).required(true).multiple(true)))]
pub struct ResizeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Ratio of output to input columns.
    #[arg(long, value_parser = parse_scale, conflicts_with = "width")]
    pub scale: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub width: Option<u32>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub height: Option<u32>,
    #[command(flatten)]
    pub carve: CarveFlags,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct RemoveObjectArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Grayscale image; pixels at 128 or above are removed.
    #[arg(long)]
    pub mask: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Leave the image at its carved size.
    #[arg(long)]
    pub no_restore: bool,
    #[command(flatten)]
    pub carve: CarveFlags,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct EnergyArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value = "e1", value_parser = parse_energy)]
    pub energy: EnergyFn,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct SeamsArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub count: u32,
    #[command(flatten)]
    pub carve: CarveFlags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Fast,
    Brute,
}

#[derive(Debug, Clone, PartialEq, Args)]
#[command(group(ArgGroup::new("size_set").args(["suite", "sizes"]).required(true)))]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    /// Side lengths, comma- or space-separated.
    #[arg(long, value_delimiter = ',', num_args = 1.., value_parser = clap::value_parser!(u32).range(1..))]
    pub sizes: Option<Vec<u32>>,
    /// Solver names, comma- or space-separated; defaults to the suite's solvers.
    #[arg(long, value_delimiter = ',', num_args = 1.., value_parser = parse_solver)]
    pub solvers: Option<Vec<SolverKind>>,
    #[arg(long, default_value_t = 0.5, value_parser = parse_scale)]
    pub scale: f64,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    pub reps: u32,
    #[arg(long, default_value = "e1", value_parser = parse_energy)]
    pub energy: EnergyFn,
    #[arg(long)]
    pub csv: PathBuf,
    /// Optional SVG log-log plot.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Source picture; defaults to the generated fixture.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

impl BenchArgs {
    pub fn suite_config(&self) -> SuiteConfig {
        let base = match self.suite {
            Some(Suite::Brute) => SuiteConfig::brute(),
            _ => SuiteConfig::fast(),
        };
        let mut suite = match &self.sizes {
            Some(sizes) => {
                let sizes = sizes.iter().map(|&s| s as usize).collect();
                let solvers = if self.suite.is_none() {
                    SuiteConfig::fast().solvers
                } else {
                    base.solvers
                };
                SuiteConfig::new(sizes, solvers)
            }
            None => base,
        };
        if let Some(solvers) = &self.solvers {
            suite.solvers = solvers.clone();
        }
        suite.scale = self.scale;
        suite.reps = self.reps as usize;
        suite.energy_fn = self.energy;
        suite
    }
}

fn parse_solver(s: &str) -> std::result::Result<SolverKind, String> {
    s.parse()
        .map_err(|_| format!("expected one of bruteforce, greedy, dp, pardp; got {s:?}"))
}

fn parse_energy(s: &str) -> std::result::Result<EnergyFn, String> {
    s.parse()
        .map_err(|_| format!("expected one of e1, e2, hog, entropy; got {s:?}"))
}

fn parse_scale(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v > 0.0 && v <= 2.0 {
        Ok(v)
    } else {
        Err(format!("scale must lie in (0, 2], got {v}"))
    }
}

/// A rejected command line. `message` is ready to print.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError {
    pub message: String,
    /// `--help` / `--version`: print to stdout and exit 0.
    pub informational: bool,
}

impl UsageError {
    pub fn exit_code(&self) -> i32 {
        if self.informational {
            EXIT_OK
        } else {
            EXIT_USAGE
        }
    }
}

/// Parses a full argv (program name first).
pub fn parse_args<I, T>(argv: I) -> std::result::Result<CliCommand, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    Cli::try_parse_from(argv)
        .map(|cli| cli.command)
        .map_err(|e| UsageError {
            message: e.render().to_string(),
            informational: matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion),
        })
}

fn resize_axis(
    image: PixelGrid,
    target: usize,
    cfg: &CarveConfig,
    vertical: bool,
) -> Result<PixelGrid> {
    let current = if vertical {
        image.height()
    } else {
        image.width()
    };
    let out = match (target.cmp(&current), vertical) {
        (std::cmp::Ordering::Equal, _) => return Ok(image),
        (std::cmp::Ordering::Less, false) => carver::carve_to_width(&image, target, cfg)?,
        (std::cmp::Ordering::Less, true) => carver::carve_to_height(&image, target, cfg)?,
        (std::cmp::Ordering::Greater, false) => carver::enlarge_to_width(&image, target, cfg)?,
        (std::cmp::Ordering::Greater, true) => carver::enlarge_to_height(&image, target, cfg)?,
    };
    Ok(out.0)
}

fn cmd_resize(args: &ResizeArgs, opts: SolverOptions, grow_only: bool) -> Result<()> {
    let cfg = args.carve.config(opts);
    cfg.validate()?;
    let mut image = load_image(&args.input)?;
    let (w, h) = image.dimensions();
    let target_w = match (args.scale, args.width) {
        (Some(s), _) => ((s * w as f64).round() as usize).max(1),
        (None, Some(width)) => width as usize,
        (None, None) => w,
    };
    let target_h = args.height.map_or(h, |v| v as usize);
    if grow_only && (target_w < w || target_h < h) {
        return Err(Error::InvalidTarget {
            target: if target_w < w { target_w } else { target_h },
            current: if target_w < w { w } else { h },
        });
    }
    image = resize_axis(image, target_w, &cfg, false)?;
    image = resize_axis(image, target_h, &cfg, true)?;
    save_image(&image, &args.output)
}

fn cmd_remove_object(args: &RemoveObjectArgs, opts: SolverOptions) -> Result<()> {
    let cfg = args.carve.config(opts);
    let image = load_image(&args.input)?;
    let mask = energy::load_mask(&args.mask)?;
    let outcome = carver::remove_object_with(&image, &mask, &cfg, !args.no_restore)?;
    save_image(&outcome.image, &args.output)
}

/// Writes the min-max normalised energy map of `input`.
pub fn cmd_energy(input: &Path, output: &Path, energy_fn: EnergyFn) -> Result<()> {
    let image = load_image(input)?;
    let map = energy_fn.compute(&to_grayscale(&image));
    energy::save_energy_png(&map, output)
}

/// Draws the first `count` seams that iterative removal would take, at
/// their original positions.
pub fn cmd_seams(input: &Path, output: &Path, count: usize, cfg: &CarveConfig) -> Result<()> {
    let mut image = load_image(input)?;
    let (seams, _) = carver::seam_sequence(&image, count, cfg)?;
    for seam in &seams {
        for (row, &col) in seam.iter().enumerate() {
            image.set(row, col, SEAM_COLOR);
        }
    }
    save_image(&image, output)
}

fn cmd_bench(args: &BenchArgs, opts: SolverOptions) -> Result<()> {
    let mut suite = args.suite_config();
    suite.solver_options = opts;
    let largest = suite.sizes.iter().copied().max().unwrap_or(1);
    let source = match &args.input {
        Some(path) => raster::load_image(path)?,
        None => bench::fixture_image(largest, bench::FIXTURE_SEED),
    };
    let records = bench::run_suite(&suite, &source)?;
    for r in &records {
        eprintln!(
            "{:>10} {:>11} n={:<5} {:.6}s",
            r.solver.name(),
            r.phase.name(),
            r.n,
            r.wall_time
        );
    }
    bench::emit_csv(&records, &args.csv)?;
    if let Some(plot) = &args.plot {
        bench::emit_plot(&records, plot)?;
    }
    Ok(())
}

/// Runs a parsed command.
pub fn execute(command: &CliCommand) -> Result<()> {
    let opts = SolverOptions::from_env()?;
    match command {
        CliCommand::Resize(args) => cmd_resize(args, opts, false),
        CliCommand::Enlarge(args) => cmd_resize(args, opts, true),
        CliCommand::RemoveObject(args) => cmd_remove_object(args, opts),
        CliCommand::Energy(args) => cmd_energy(&args.input, &args.output, args.energy),
        CliCommand::Seams(args) => cmd_seams(
            &args.input,
            &args.output,
            args.count as usize,
            &args.carve.config(opts),
        ),
        CliCommand::Bench(args) => cmd_bench(args, opts),
    }
}

/// Entry point: parse, dispatch, map the outcome to an exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let command = match parse_args(argv) {
        Ok(c) => c,
        Err(e) => {
            if e.informational {
                print!("{}", e.message);
            } else {
                eprint!("{}", e.message);
            }
            return e.exit_code();
        }
    };
    match execute(&command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(line: &str) -> std::result::Result<CliCommand, UsageError> {
        parse_args(std::iter::once("seamcarve").chain(line.split_whitespace()))
    }

    #[test]
    fn resize_with_scale() {
        let cmd = parse("resize --input a.png --output b.png --scale 0.5 --solver dp").unwrap();
        let CliCommand::Resize(args) = cmd else {
            panic!("{cmd:?}")
        };
        assert_eq!(args.scale, Some(0.5));
        assert_eq!(args.carve.solver, SolverKind::Dynamic);
        assert_eq!(args.carve.energy, EnergyFn::E1);
    }

    #[test]
    fn default_solver_is_parallel() {
        let CliCommand::Resize(args) = parse("resize --input a --output b --width 3").unwrap()
        else {
            panic!()
        };
        assert_eq!(args.carve.solver, SolverKind::ParallelDynamic);
    }

    #[test]
    fn scale_range_checked() {
        for bad in ["0", "-1", "2.5", "nan", "x"] {
            let e = parse(&format!("resize --input a --output b --scale {bad}")).unwrap_err();
            assert_eq!(e.exit_code(), EXIT_USAGE, "{bad}");
        }
        assert!(parse("resize --input a --output b --scale 2").is_ok());
    }

    #[test]
    fn scale_and_width_are_exclusive() {
        assert!(parse("resize --input a --output b --scale 0.5 --width 4").is_err());
        assert!(parse("resize --input a --output b").is_err());
        assert!(parse("resize --input a --output b --height 4").is_ok());
    }

    #[test]
    fn unknown_solver_is_usage_error() {
        let e = parse("resize --input a --output b --scale 0.5 --solver magic").unwrap_err();
        assert_eq!(e.exit_code(), EXIT_USAGE);
    }

    #[test]
    fn bench_fast_suite() {
        let CliCommand::Bench(args) = parse("bench --suite fast --csv out.csv").unwrap() else {
            panic!()
        };
        let suite = args.suite_config();
        assert_eq!(suite.sizes, vec![180, 360, 480, 720, 1080]);
        assert_eq!(
            suite.solvers,
            vec![
                SolverKind::Greedy,
                SolverKind::Dynamic,
                SolverKind::ParallelDynamic
            ]
        );
        assert_eq!(suite.scale, 0.5);
    }

    #[test]
    fn bench_custom_sizes_and_solvers() {
        let CliCommand::Bench(args) =
            parse("bench --sizes 4,6,8 --solvers bruteforce,dp --reps 2 --csv o.csv").unwrap()
        else {
            panic!()
        };
        let suite = args.suite_config();
        assert_eq!(suite.sizes, vec![4, 6, 8]);
        assert_eq!(
            suite.solvers,
            vec![SolverKind::BruteForce, SolverKind::Dynamic]
        );
        assert_eq!(suite.reps, 2);
    }

    #[test]
    fn bench_needs_a_size_set() {
        assert!(parse("bench --csv o.csv").is_err());
        assert!(parse("bench --suite fast --sizes 3 --csv o.csv").is_err());
    }

    #[test]
    fn seams_count_must_be_positive() {
        assert!(parse("seams --input a --output b --count 0").is_err());
        assert!(parse("seams --input a --output b --count 3").is_ok());
    }

    #[test]
    fn help_is_informational() {
        let e = parse("--help").unwrap_err();
        assert_eq!(e.exit_code(), EXIT_OK);
    }
}
