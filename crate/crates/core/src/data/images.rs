//! Labeled image directories: `root/<class_name>/<image>.{pgm,png}`.

use std::fs;
use std::path::{Path, PathBuf};

use image::{ColorType, ImageReader};

use super::Dataset;
use crate::error::{Error, Result};
use crate::numerics::Matrix;

const EXTENSIONS: [&str; 2] = ["pgm", "png"];

/// Decodes an 8-bit grayscale PGM (binary P5) or PNG into `(height, width, pixels)`.
pub fn read_gray_image(path: &Path) -> Result<(usize, usize, Vec<u8>)> {
    let img_err = |message: String| Error::Image {
        path: path.to_path_buf(),
        message,
    };
    let img = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| img_err(e.to_string()))?;
    if img.color() != ColorType::L8 {
        return Err(img_err(format!(
            "expected 8-bit grayscale, found {:?}",
            img.color()
        )));
    }
    let gray = img.into_luma8();
    let (w, h) = gray.dimensions();
    Ok((h as usize, w as usize, gray.into_raw()))
}

/// Bilinear resize of a row-major grayscale image.
///
/// Pixel centers sit at half-integer coordinates (no corner alignment): output
/// pixel `(i, j)` samples the source at `((i + ½)·h/out_h − ½, (j + ½)·w/out_w − ½)`,
/// clamped to the image. Downscaling by an integer factor of 2 therefore
/// averages each 2×2 block.
pub fn resize_bilinear(src: &[f64], h: usize, w: usize, out_h: usize, out_w: usize) -> Vec<f64> {
    assert_eq!(src.len(), h * w, "source buffer does not match {h}x{w}");
    assert!(h > 0 && w > 0 && out_h > 0 && out_w > 0, "empty image");

    let taps = |out: usize, inp: usize| -> Vec<(usize, usize, f64)> {
        let scale = inp as f64 / out as f64;
        (0..out)
            .map(|o| {
                let pos = ((o as f64 + 0.5) * scale - 0.5).clamp(0.0, (inp - 1) as f64);
                let lo = pos.floor() as usize;
                let hi = (lo + 1).min(inp - 1);
                (lo, hi, pos - lo as f64)
            })
            .collect()
    };
    let rows = taps(out_h, h);
    let cols = taps(out_w, w);

    let mut out = Vec::with_capacity(out_h * out_w);
    for &(y0, y1, fy) in &rows {
        for &(x0, x1, fx) in &cols {
            let top = src[y0 * w + x0] * (1.0 - fx) + src[y0 * w + x1] * fx;
            let bottom = src[y1 * w + x0] * (1.0 - fx) + src[y1 * w + x1] * fx;
            out.push(top * (1.0 - fy) + bottom * fy);
        }
    }
    out
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<Vec<_>>>()?;
    entries.sort();
    Ok(entries)
}

fn is_image(path: &Path) -> bool {
    path.is_file()
        && path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

/// Loads every image under `root/<class>/`, resized to `target_shape` and scaled to `[0, 1]`.
///
/// Class ids follow the sorted subdirectory names; images inside a class are
/// read in sorted file-name order.
pub fn load_image_dir(root: impl AsRef<Path>, target_shape: (usize, usize)) -> Result<Dataset> {
    let root = root.as_ref();
    let (th, tw) = target_shape;
    if th == 0 || tw == 0 {
        return Err(Error::InvalidArgument(format!(
            "target shape must be positive, got {th}x{tw}"
        )));
    }
    let class_dirs: Vec<PathBuf> = sorted_entries(root)?.into_iter().filter(|p| p.is_dir()).collect();
    if class_dirs.is_empty() {
        return Err(Error::Image {
            path: root.to_path_buf(),
            message: "no class subdirectories".into(),
        });
    }

    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut names = Vec::with_capacity(class_dirs.len());
    for (class, dir) in class_dirs.iter().enumerate() {
        let files: Vec<PathBuf> = sorted_entries(dir)?.into_iter().filter(|p| is_image(p)).collect();
        if files.is_empty() {
            return Err(Error::Image {
                path: dir.clone(),
                message: "class directory contains no .pgm or .png images".into(),
            });
        }
        for file in &files {
            let (h, w, pixels) = read_gray_image(file)?;
            let src: Vec<f64> = pixels.iter().map(|&p| f64::from(p)).collect();
            let resized = if (h, w) == (th, tw) {
                src
            } else {
                resize_bilinear(&src, h, w, th, tw)
            };
            data.extend(resized.into_iter().map(|v| (v / 255.0).clamp(0.0, 1.0)));
            labels.push(class);
        }
        names.push(dir.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned()));
    }
    let x = Matrix::new(labels.len(), th * tw, data)?;
    Dataset::new(x, labels, names, Some(target_shape))
}
