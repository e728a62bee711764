//! Rasters: the RGB image being carved and the scalar grids derived from it.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use image::codecs::png::PngEncoder;
use image::{ExtendedColorType, ImageEncoder, ImageError, ImageFormat};

use crate::{Error, Result};

/// One 8-bit-per-channel RGB pixel.
pub type Rgb = [u8; 3];

/// A rectangular row-major grid.
///
/// Row `i` occupies `data[i * width..(i + 1) * width]`. All the crate's
/// rasters (pixels, luminance, energies, masks) share this layout.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

/// The image being carved.
pub type PixelGrid = Grid<Rgb>;

/// Per-pixel luminance in `[0, 255]`.
pub type LumaGrid = Grid<f64>;

impl<T> Grid<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidConfig(format!(
                "{} values cannot fill a {width}x{height} grid",
                data.len()
            )));
        }
        Ok(Grid {
            width,
            height,
            data,
        })
    }

    /// Builds a grid by evaluating `f(row, col)` for every cell.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                data.push(f(row, col));
            }
        }
        Grid {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    /// `(width, height)`
    #[inline]
    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> &T {
        &self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: T) {
        self.data[row * self.width + col] = value;
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[T] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        // chunks_exact panics on 0; an empty grid has no rows anyway.
        self.data.chunks_exact(self.width.max(1))
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Copy> Grid<T> {
    /// Mirrors the grid about its main diagonal: `out(i, j) = self(j, i)`.
    pub fn transpose(&self) -> Self {
        let (w, h) = (self.width, self.height);
        let mut data = Vec::with_capacity(w * h);
        for col in 0..w {
            for row in 0..h {
                data.push(self.data[row * w + col]);
            }
        }
        Grid {
            width: h,
            height: w,
            data,
        }
    }

    /// Value at `(row, col)` with both indices clamped into the grid.
    #[inline]
    pub fn get_clamped(&self, row: isize, col: isize) -> T {
        let r = row.clamp(0, self.height as isize - 1) as usize;
        let c = col.clamp(0, self.width as isize - 1) as usize;
        self.data[r * self.width + c]
    }

    /// Deletes `cols[i]` from row `i`. Callers validate the column list.
    pub(crate) fn without_columns(&self, cols: &[usize]) -> Self {
        debug_assert_eq!(cols.len(), self.height);
        let new_width = self.width - 1;
        let mut data = Vec::with_capacity(new_width * self.height);
        for (row, &c) in self.rows().zip(cols) {
            data.extend_from_slice(&row[..c]);
            data.extend_from_slice(&row[c + 1..]);
        }
        Grid {
            width: new_width,
            height: self.height,
            data,
        }
    }
}

/// Grayscale conversion with BT.601 luma weights.
pub fn to_grayscale(grid: &PixelGrid) -> LumaGrid {
    // Integer numerator keeps gray inputs exact: (255, 255, 255) -> 255.0.
    grid.map(|&[r, g, b]| {
        let weighted = 299 * r as u32 + 587 * g as u32 + 114 * b as u32;
        weighted as f64 / 1000.0
    })
}

pub fn transpose(grid: &PixelGrid) -> PixelGrid {
    grid.transpose()
}

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })
}

fn decode_error(e: ImageError) -> Error {
    match e {
        ImageError::Unsupported(u) => Error::UnsupportedFormat(u.to_string()),
        ImageError::IoError(io) => Error::CorruptImage(io.to_string()),
        other => Error::CorruptImage(other.to_string()),
    }
}

/// Decodes a PNG or binary PPM into a dynamic image.
pub(crate) fn decode(path: &Path) -> Result<image::DynamicImage> {
    let bytes = read_file(path)?;
    let format = if bytes.starts_with(PNG_SIGNATURE) {
        ImageFormat::Png
    } else if bytes.starts_with(b"P6") {
        ImageFormat::Pnm
    } else if bytes.len() >= 2 && bytes[0] == b'P' && bytes[1].is_ascii_digit() {
        return Err(Error::UnsupportedFormat(format!(
            "netpbm variant P{} (only binary P6 is read)",
            bytes[1] as char
        )));
    } else {
        return Err(Error::UnsupportedFormat(format!(
            "{} is neither PNG nor PPM",
            path.display()
        )));
    };
    image::load_from_memory_with_format(&bytes, format).map_err(decode_error)
}

/// Loads a PNG or P6 PPM. Alpha is discarded.
pub fn load_image(path: impl AsRef<Path>) -> Result<PixelGrid> {
    let rgb = decode(path.as_ref())?.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let data = rgb
        .into_raw()
        .chunks_exact(3)
        .map(|p| [p[0], p[1], p[2]])
        .collect();
    Grid::new(w, h, data)
}

fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

/// Writes `grid` as PNG or P6 PPM, chosen by the file extension.
pub fn save_image(grid: &PixelGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let raw: Vec<u8> = grid.data().iter().flatten().copied().collect();
    if has_extension(path, "ppm") {
        let mut out = BufWriter::new(fs::File::create(path)?);
        write!(out, "P6\n{} {}\n255\n", grid.width(), grid.height())?;
        out.write_all(&raw)?;
        out.flush()?;
        Ok(())
    } else if has_extension(path, "png") {
        write_png(
            path,
            &raw,
            grid.width(),
            grid.height(),
            ExtendedColorType::Rgb8,
        )
    } else {
        Err(Error::UnsupportedFormat(format!(
            "cannot infer output format for {}",
            path.display()
        )))
    }
}

pub(crate) fn write_png(
    path: &Path,
    raw: &[u8],
    width: usize,
    height: usize,
    color: ExtendedColorType,
) -> Result<()> {
    let out = BufWriter::new(fs::File::create(path)?);
    PngEncoder::new(out)
        .write_image(raw, width as u32, height as u32, color)
        .map_err(|e| match e {
            ImageError::IoError(io) => Error::Io(io),
            other => Error::CorruptImage(other.to_string()),
        })
}
