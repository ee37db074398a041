//! Multiband raster container and patch-grid construction.
//!
//! The on-disk format ("MBR1") is a single UTF-8 JSON header line terminated
//! by `\n`, followed by `channels * height * width` little-endian u16 values,
//! band-sequential, row-major. Intensities are scaled to `[0, 1]` at load
//! time by dividing by the header's `full_scale`; the raw integers are kept
//! so that save/load round-trips are bit-exact.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const RASTER_MAGIC: &str = "MBR1";
pub const RASTER_DTYPE: &str = "u16le";

#[derive(Debug, Serialize, Deserialize)]
struct RasterHeader {
    magic: String,
    width: usize,
    height: usize,
    channels: usize,
    dtype: String,
    full_scale: u16,
    band_names: Vec<String>,
}

/// An M-channel 2-D grid of intensities. All channels share the same
/// dimensions; scaled intensities are finite, non-negative, and `<= 1`.
#[derive(Debug, Clone)]
pub struct MultibandRaster {
    width: usize,
    height: usize,
    band_names: Vec<String>,
    full_scale: u16,
    /// Raw integers, channel-major then row-major. Kept for bit-exact saves.
    raw: Vec<u16>,
    /// Scaled intensities, same layout as `raw`.
    data: Vec<f64>,
    nodata: Option<Vec<bool>>,
}

impl MultibandRaster {
    pub fn from_raw(
        width: usize,
        height: usize,
        band_names: Vec<String>,
        full_scale: u16,
        raw: Vec<u16>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput("zero raster dimension".into()));
        }
        if band_names.is_empty() {
            return Err(Error::InvalidInput("raster needs at least one band".into()));
        }
        {
            let mut sorted = band_names.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != band_names.len() {
                return Err(Error::InvalidInput("band names must be unique".into()));
            }
        }
        if full_scale == 0 {
            return Err(Error::InvalidInput("full-scale value of zero".into()));
        }
        let expected = width * height * band_names.len();
        if raw.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "payload has {} values, expected {}",
                raw.len(),
                expected
            )));
        }
        let scale = f64::from(full_scale);
        let data = raw.iter().map(|&v| f64::from(v) / scale).collect();
        Ok(Self {
            width,
            height,
            band_names,
            full_scale,
            raw,
            data,
            nodata: None,
        })
    }

    /// Marks nodata pixels (length `width * height`); they read as 0.
    pub fn set_nodata(&mut self, mask: Vec<bool>) -> Result<()> {
        if mask.len() != self.width * self.height {
            return Err(Error::DimensionMismatch(
                "nodata mask size does not match raster".into(),
            ));
        }
        for c in 0..self.channels() {
            let base = c * self.width * self.height;
            for (i, &nd) in mask.iter().enumerate() {
                if nd {
                    self.data[base + i] = 0.0;
                }
            }
        }
        self.nodata = Some(mask);
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.band_names.len()
    }

    pub fn band_names(&self) -> &[String] {
        &self.band_names
    }

    pub fn full_scale(&self) -> u16 {
        self.full_scale
    }

    /// Scaled intensities of one channel, row-major.
    pub fn channel(&self, c: usize) -> &[f64] {
        let n = self.width * self.height;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn raw_channel(&self, c: usize) -> &[u16] {
        let n = self.width * self.height;
        &self.raw[c * n..(c + 1) * n]
    }

    #[inline]
    pub fn get(&self, c: usize, x: usize, y: usize) -> f64 {
        self.data[c * self.width * self.height + y * self.width + x]
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut reader = BufReader::new(file);
        let mut header_line = String::new();
        reader
            .read_line(&mut header_line)
            .map_err(|source| Error::Io {
                path: path.to_owned(),
                source,
            })?;
        let header: RasterHeader = serde_json::from_str(header_line.trim_end())
            .map_err(|e| Error::MalformedHeader(e.to_string()))?;
        if header.magic != RASTER_MAGIC {
            return Err(Error::MalformedHeader(format!(
                "bad magic {:?}, expected {:?}",
                header.magic, RASTER_MAGIC
            )));
        }
        if header.dtype != RASTER_DTYPE {
            return Err(Error::MalformedHeader(format!(
                "unsupported dtype {:?}",
                header.dtype
            )));
        }
        if header.band_names.len() != header.channels {
            return Err(Error::MalformedHeader(format!(
                "{} band names for {} channels",
                header.band_names.len(),
                header.channels
            )));
        }
        let expected = header.channels * header.height * header.width * 2;
        let mut payload = Vec::with_capacity(expected);
        reader.read_to_end(&mut payload).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        if payload.len() != expected {
            return Err(Error::TruncatedPayload {
                expected,
                found: payload.len(),
            });
        }
        let raw: Vec<u16> = payload
            .chunks_exact(2)
            .map(|b| u16::from_le_bytes([b[0], b[1]]))
            .collect();
        Self::from_raw(
            header.width,
            header.height,
            header.band_names,
            header.full_scale,
            raw,
        )
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let header = RasterHeader {
            magic: RASTER_MAGIC.to_string(),
            width: self.width,
            height: self.height,
            channels: self.channels(),
            dtype: RASTER_DTYPE.to_string(),
            full_scale: self.full_scale,
            band_names: self.band_names.clone(),
        };
        let file = File::create(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut writer = BufWriter::new(file);
        let io_err = |source| Error::Io {
            path: path.to_owned(),
            source,
        };
        writer
            .write_all(serde_json::to_string(&header)?.as_bytes())
            .map_err(io_err)?;
        writer.write_all(b"\n").map_err(io_err)?;
        let mut bytes = Vec::with_capacity(self.raw.len() * 2);
        for &v in &self.raw {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        writer.write_all(&bytes).map_err(io_err)?;
        Ok(())
    }

    /// Returns a `size`-square M-channel copy with channel order preserved.
    pub fn extract_patch(&self, x: usize, y: usize, size: usize) -> Result<Self> {
        if x + size > self.width || y + size > self.height {
            return Err(Error::OutOfBounds(format!(
                "patch origin ({x},{y}) size {size} exceeds {}x{}",
                self.width, self.height
            )));
        }
        let mut raw = Vec::with_capacity(self.channels() * size * size);
        for c in 0..self.channels() {
            let plane = self.raw_channel(c);
            for row in y..y + size {
                let start = row * self.width + x;
                raw.extend_from_slice(&plane[start..start + size]);
            }
        }
        let mut patch = Self::from_raw(
            size,
            size,
            self.band_names.clone(),
            self.full_scale,
            raw,
        )?;
        if let Some(nodata) = &self.nodata {
            let mut sub = Vec::with_capacity(size * size);
            for row in y..y + size {
                let start = row * self.width + x;
                sub.extend_from_slice(&nodata[start..start + size]);
            }
            patch.set_nodata(sub)?;
        }
        Ok(patch)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatchRef {
    pub x: usize,
    pub y: usize,
    pub label: Label,
}

/// A non-overlapping grid of labeled fixed-size patches over one raster.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabeledPatchSet {
    pub patch_size: usize,
    pub source_raster: String,
    pub patches: Vec<PatchRef>,
}

impl LabeledPatchSet {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn positives(&self) -> usize {
        self.patches
            .iter()
            .filter(|p| p.label == Label::Positive)
            .count()
    }
}

/// Cuts the raster into a non-overlapping grid of `patch_size` squares.
/// Partial patches at the right/bottom edges are discarded. A patch is
/// positive iff it overlaps at least one nonzero pixel of the label mask.
pub fn build_patch_grid(
    raster: &MultibandRaster,
    label_mask: &MultibandRaster,
    patch_size: usize,
    source_raster: &str,
) -> Result<LabeledPatchSet> {
    if label_mask.channels() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "label mask must have 1 channel, has {}",
            label_mask.channels()
        )));
    }
    if label_mask.width() != raster.width() || label_mask.height() != raster.height() {
        return Err(Error::DimensionMismatch(format!(
            "mask {}x{} does not match raster {}x{}",
            label_mask.width(),
            label_mask.height(),
            raster.width(),
            raster.height()
        )));
    }
    if patch_size < 1 {
        return Err(Error::InvalidInput("patch_size must be >= 1".into()));
    }
    if patch_size > raster.width() || patch_size > raster.height() {
        return Err(Error::InvalidInput(format!(
            "patch_size {} exceeds raster {}x{}",
            patch_size,
            raster.width(),
            raster.height()
        )));
    }
    let mask = label_mask.raw_channel(0);
    let nx = raster.width() / patch_size;
    let ny = raster.height() / patch_size;
    let mut patches = Vec::with_capacity(nx * ny);
    for gy in 0..ny {
        for gx in 0..nx {
            let x0 = gx * patch_size;
            let y0 = gy * patch_size;
            let mut positive = false;
            'cell: for y in y0..y0 + patch_size {
                for x in x0..x0 + patch_size {
                    if mask[y * raster.width() + x] != 0 {
                        positive = true;
                        break 'cell;
                    }
                }
            }
            patches.push(PatchRef {
                x: x0,
                y: y0,
                label: if positive {
                    Label::Positive
                } else {
                    Label::Negative
                },
            });
        }
    }
    Ok(LabeledPatchSet {
        patch_size,
        source_raster: source_raster.to_string(),
        patches,
    })
}
