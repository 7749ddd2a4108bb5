//! Image files and dataset manifests.
//!
//! A manifest has one record per line: `<path>\t<class-id>\t<split>`, with
//! paths relative to the manifest's directory, one-based class ids and
//! `train`, `validation`, `test` or `-` (unassigned) as split. Blank lines
//! and lines starting with `#` are ignored; the split column may be omitted.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use bayeswords_core::imaging::{GrayImage, LabeledSample, Split};
use rayon::prelude::*;

use crate::error::{io_error, Error, Result};

/// Reads an 8-bit grayscale PNG or PGM (other formats are converted to luma).
pub fn load_image(path: &Path) -> Result<GrayImage> {
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    let luma = img.into_luma8();
    let (w, h) = luma.dimensions();
    Ok(GrayImage::new(w as usize, h as usize, luma.into_raw())?)
}

pub fn save_png(img: &GrayImage, path: &Path) -> Result<()> {
    let buffer = image::GrayImage::from_raw(
        img.width() as u32,
        img.height() as u32,
        img.pixels().to_vec(),
    )
    .expect("pixel buffer matches dimensions");
    buffer.save(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    /// As written in the manifest.
    pub path: PathBuf,
    /// Zero-based.
    pub class: usize,
    pub split: Option<Split>,
}

pub fn parse_manifest(text: &str, origin: &Path) -> Result<Vec<ManifestEntry>> {
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let bad = |message: String| Error::Manifest {
            path: origin.to_path_buf(),
            line: i + 1,
            message,
        };
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(bad(format!(
                "expected 2 or 3 tab-separated fields, found {}",
                fields.len()
            )));
        }
        let class: usize = fields[1]
            .trim()
            .parse()
            .ok()
            .filter(|&c| c >= 1)
            .ok_or_else(|| {
                bad(format!(
                    "class id `{}` is not a positive integer",
                    fields[1]
                ))
            })?;
        let split = match fields.get(2).map(|s| s.trim()) {
            None | Some("-") | Some("") => None,
            Some(s) => Some(Split::parse(s).ok_or_else(|| bad(format!("unknown split `{s}`")))?),
        };
        entries.push(ManifestEntry {
            path: PathBuf::from(fields[0]),
            class: class - 1,
            split,
        });
    }
    Ok(entries)
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    parse_manifest(&text, path)
}

pub fn format_manifest(entries: &[ManifestEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        let split = e.split.map_or("-", Split::as_str);
        let _ = writeln!(out, "{}\t{}\t{}", e.path.display(), e.class + 1, split);
    }
    out
}

pub fn write_manifest(path: &Path, entries: &[ManifestEntry]) -> Result<()> {
    fs::write(path, format_manifest(entries)).map_err(io_error(path))
}

/// Loads every image listed in `manifest`; sample ids are the manifest
/// paths.
pub fn load_dataset(manifest: &Path) -> Result<Vec<LabeledSample>> {
    let entries = read_manifest(manifest)?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    entries
        .par_iter()
        .map(|e| {
            Ok(LabeledSample {
                id: e.path.display().to_string(),
                image: load_image(&base.join(&e.path))?,
                class: e.class,
                split: e.split,
            })
        })
        .collect()
}

/// Writes every sample as `<dir>/images/<id>.png` plus `<dir>/manifest.tsv`
/// and returns the manifest path.
pub fn write_dataset(samples: &[LabeledSample], dir: &Path) -> Result<PathBuf> {
    let images = dir.join("images");
    fs::create_dir_all(&images).map_err(io_error(&images))?;
    let entries = samples
        .par_iter()
        .map(|s| {
            let rel = PathBuf::from("images").join(format!("{}.png", s.id));
            save_png(&s.image, &dir.join(&rel))?;
            Ok(ManifestEntry {
                path: rel,
                class: s.class,
                split: s.split,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = dir.join("manifest.tsv");
    write_manifest(&manifest, &entries)?;
    Ok(manifest)
}
