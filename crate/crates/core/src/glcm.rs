//! Gray-level co-occurrence matrices and five Haralick quantities.

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::raster::MultibandRaster;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Angle {
    #[serde(rename = "0")]
    Deg0,
    #[serde(rename = "45")]
    Deg45,
    #[serde(rename = "90")]
    Deg90,
    #[serde(rename = "135")]
    Deg135,
}

impl Angle {
    pub const ALL: [Angle; 4] = [Angle::Deg0, Angle::Deg45, Angle::Deg90, Angle::Deg135];

    /// Pixel offset (dx, dy) at the given distance.
    pub fn offset(self, distance: i32) -> (i32, i32) {
        match self {
            Angle::Deg0 => (distance, 0),
            Angle::Deg45 => (distance, -distance),
            Angle::Deg90 => (0, -distance),
            Angle::Deg135 => (-distance, -distance),
        }
    }

    pub fn degrees(self) -> u32 {
        match self {
            Angle::Deg0 => 0,
            Angle::Deg45 => 45,
            Angle::Deg90 => 90,
            Angle::Deg135 => 135,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GlcmConfig {
    pub levels: usize,
    pub angles: Vec<Angle>,
    pub distance: i32,
    pub symmetric: bool,
}

impl Default for GlcmConfig {
    fn default() -> Self {
        Self {
            levels: 32,
            angles: Angle::ALL.to_vec(),
            distance: 1,
            symmetric: true,
        }
    }
}

impl GlcmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels < 2 {
            return Err(Error::InvalidInput("levels must be >= 2".into()));
        }
        if self.distance < 1 {
            return Err(Error::InvalidInput("glcm distance must be >= 1".into()));
        }
        if self.angles.is_empty() {
            return Err(Error::InvalidInput("angles must be nonempty".into()));
        }
        Ok(())
    }
}

/// A normalized co-occurrence matrix: entries >= 0 summing to 1.
#[derive(Debug, Clone)]
pub struct Glcm {
    pub levels: usize,
    pub matrix: Vec<f64>,
}

impl Glcm {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.levels + j]
    }
}

/// Equal-width quantization of a [0, 1] intensity into `levels` bins.
#[inline]
fn quantize(v: f64, levels: usize) -> usize {
    ((v * levels as f64) as usize).min(levels - 1)
}

/// Counts ordered pairs (p, p + offset(angle, distance)) inside the patch,
/// optionally symmetrized, normalized to sum 1.
pub fn compute_glcm(
    patch: &MultibandRaster,
    channel: usize,
    angle: Angle,
    distance: i32,
    levels: usize,
    symmetric: bool,
) -> Result<Glcm> {
    let (dx, dy) = angle.offset(distance);
    let (w, h) = (patch.width() as i32, patch.height() as i32);
    let mut counts = vec![0.0f64; levels * levels];
    let mut total = 0.0f64;
    for y in 0..h {
        for x in 0..w {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx >= w || ny >= h {
                continue;
            }
            let i = quantize(patch.get(channel, x as usize, y as usize), levels);
            let j = quantize(patch.get(channel, nx as usize, ny as usize), levels);
            counts[i * levels + j] += 1.0;
            total += 1.0;
            if symmetric {
                counts[j * levels + i] += 1.0;
                total += 1.0;
            }
        }
    }
    if total == 0.0 {
        return Err(Error::DegeneratePatch);
    }
    for c in &mut counts {
        *c /= total;
    }
    Ok(Glcm {
        levels,
        matrix: counts,
    })
}

/// ASM, contrast, inverse difference moment, entropy (log base 2, with
/// 0*log(0) = 0), and correlation (0 when either marginal deviation is 0).
pub fn haralick5(g: &Glcm) -> Result<[f64; 5]> {
    let total: f64 = g.matrix.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "glcm is not normalized (sum {total})"
        )));
    }
    let n = g.levels;
    let mut asm = 0.0;
    let mut contrast = 0.0;
    let mut idm = 0.0;
    let mut entropy = 0.0;
    let mut mu_i = 0.0;
    let mut mu_j = 0.0;
    for i in 0..n {
        for j in 0..n {
            let p = g.get(i, j);
            let d = i as f64 - j as f64;
            asm += p * p;
            contrast += d * d * p;
            idm += p / (1.0 + d * d);
            if p > 0.0 {
                entropy -= p * p.log2();
            }
            mu_i += i as f64 * p;
            mu_j += j as f64 * p;
        }
    }
    let mut var_i = 0.0;
    let mut var_j = 0.0;
    let mut cov = 0.0;
    for i in 0..n {
        for j in 0..n {
            let p = g.get(i, j);
            let di = i as f64 - mu_i;
            let dj = j as f64 - mu_j;
            var_i += di * di * p;
            var_j += dj * dj * p;
            cov += di * dj * p;
        }
    }
    let correlation = if var_i <= 0.0 || var_j <= 0.0 {
        0.0
    } else {
        cov / (var_i.sqrt() * var_j.sqrt())
    };
    Ok([asm, contrast, idm, entropy, correlation])
}

pub const QUANTITY_NAMES: [&str; 5] = ["asm", "contrast", "idm", "entropy", "correlation"];

pub fn glcm_component_names(bands: &[usize], config: &GlcmConfig) -> Vec<String> {
    let mut names = Vec::new();
    for &band in bands {
        for angle in &config.angles {
            for q in QUANTITY_NAMES {
                names.push(format!("glcm/b{band}/a{}/{q}", angle.degrees()));
            }
        }
    }
    names
}

/// Concatenation over bands x angles of the five quantities.
pub fn extract_glcm_features(
    patch: &MultibandRaster,
    bands: &[usize],
    config: &GlcmConfig,
) -> Result<FeatureVector> {
    config.validate()?;
    let mut values = Vec::with_capacity(bands.len() * config.angles.len() * 5);
    for &band in bands {
        if band >= patch.channels() {
            return Err(Error::InvalidInput(format!(
                "band {band} out of range for {}-channel patch",
                patch.channels()
            )));
        }
        for &angle in &config.angles {
            let g = compute_glcm(
                patch,
                band,
                angle,
                config.distance,
                config.levels,
                config.symmetric,
            )?;
            values.extend(haralick5(&g)?);
        }
    }
    Ok(FeatureVector {
        values,
        component_names: glcm_component_names(bands, config),
    })
}
