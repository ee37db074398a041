//! HLAC / MUCHLAC feature extraction by product-sum scanning.
//!
//! For a mask with points {(slot_i, a_i)} and displacement distance m, the
//! component value is the sum over reference positions r of the product of
//! intensities at r + a_i, where r ranges over the valid region in which the
//! full (2m+1) x (2m+1) window fits. All masks at a given m share that
//! region; there is no padding. Accumulation is f64 in fixed row-major order.
//!
//! Rotation/reflection-invariant components sum the product-sums of all 8
//! dihedral images of an orbit representative's scan form. The valid region
//! of a square patch is itself D4-symmetric, so a rotated or mirrored patch
//! yields the same multiset of terms and the grouped value is unchanged.

use crate::error::{Error, Result};
use crate::masks;
use crate::raster::{Label, LabeledPatchSet, MultibandRaster};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use crate::masks::{MaskGroup, MaskPattern};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Invariance {
    None,
    RotationReflection,
}

/// Configuration for HLAC/MUCHLAC extraction: which bands, which
/// displacement distances, whether cross-channel masks are used, and
/// whether components are grouped into D4 orbits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtractConfig {
    pub bands: Vec<usize>,
    pub distances: Vec<i32>,
    pub use_cross_channel: bool,
    pub invariance: Invariance,
}

impl ExtractConfig {
    pub fn validate(&self, channels: usize) -> Result<()> {
        if self.distances.is_empty() {
            return Err(Error::InvalidInput("distances must be nonempty".into()));
        }
        if self.distances.iter().any(|&m| m < 1) {
            return Err(Error::InvalidInput("distances must be >= 1".into()));
        }
        if self.bands.is_empty() {
            return Err(Error::InvalidInput("bands must be nonempty".into()));
        }
        if let Some(&b) = self.bands.iter().find(|&&b| b >= channels) {
            return Err(Error::InvalidInput(format!(
                "band {b} out of range for {channels}-channel raster"
            )));
        }
        Ok(())
    }

    /// All ordered band pairs in lexicographic order.
    pub fn ordered_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for &a in &self.bands {
            for &b in &self.bands {
                if a != b {
                    pairs.push((a, b));
                }
            }
        }
        pairs
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub component_names: Vec<String>,
}

/// Masks and orbit tables for one displacement distance.
#[derive(Debug, Clone)]
pub struct MaskBank {
    pub m: i32,
    pub hlac: Vec<MaskPattern>,
    pub hlac_orbits: Vec<MaskGroup>,
    pub muchlac: Vec<MaskPattern>,
    pub muchlac_orbits: Vec<MaskGroup>,
}

impl MaskBank {
    pub fn new(m: i32, use_cross_channel: bool) -> Result<Self> {
        let hlac = masks::enumerate_hlac_masks(m, 2)?;
        let hlac_orbits = masks::d4_orbits(&hlac)?;
        let (muchlac, muchlac_orbits) = if use_cross_channel {
            let mm = masks::enumerate_muchlac_masks(m, 2, 2)?;
            let orbits = masks::d4_orbits(&mm)?;
            (mm, orbits)
        } else {
            (Vec::new(), Vec::new())
        };
        Ok(Self {
            m,
            hlac,
            hlac_orbits,
            muchlac,
            muchlac_orbits,
        })
    }
}

pub fn build_banks(config: &ExtractConfig) -> Result<Vec<MaskBank>> {
    config
        .distances
        .iter()
        .map(|&m| MaskBank::new(m, config.use_cross_channel))
        .collect()
}

fn check_patch_size(patch: &MultibandRaster, m: i32) -> Result<()> {
    let required = (2 * m + 1) as usize;
    let side = patch.width().min(patch.height());
    if side < required {
        return Err(Error::PatchTooSmall { side, m, required });
    }
    Ok(())
}

/// Product-sum of one literal point set over the common valid region.
/// `channel_of_slot` maps mask slots to raster channels.
fn product_sum(
    patch: &MultibandRaster,
    channel_of_slot: &[usize],
    points: &[masks::MaskPoint],
    m: i32,
) -> f64 {
    let m = m as usize;
    let (w, h) = (patch.width(), patch.height());
    let mut total = 0.0;
    for y in m..h - m {
        for x in m..w - m {
            let mut prod = 1.0;
            for p in points {
                let px = (x as i32 + p.dx) as usize;
                let py = (y as i32 + p.dy) as usize;
                prod *= patch.get(channel_of_slot[p.slot as usize], px, py);
            }
            total += prod;
        }
    }
    total
}

fn block_values(
    patch: &MultibandRaster,
    channel_of_slot: &[usize],
    bank_masks: &[MaskPattern],
    orbits: &[MaskGroup],
    invariance: Invariance,
    m: i32,
) -> Vec<f64> {
    match invariance {
        Invariance::None => bank_masks
            .iter()
            .map(|mk| product_sum(patch, channel_of_slot, &mk.scan_points, m))
            .collect(),
        Invariance::RotationReflection => orbits
            .iter()
            .map(|orbit| {
                let rep = &bank_masks[orbit.member_indices[0]].scan_points;
                (0..8)
                    .map(|t| product_sum(patch, channel_of_slot, &masks::apply_d4(rep, t), m))
                    .sum()
            })
            .collect(),
    }
}

/// Per-mask product-sums of one channel (no invariance grouping).
pub fn extract_hlac(
    patch: &MultibandRaster,
    channel: usize,
    bank_masks: &[MaskPattern],
    m: i32,
) -> Result<Vec<f64>> {
    check_patch_size(patch, m)?;
    Ok(bank_masks
        .iter()
        .map(|mk| product_sum(patch, &[channel], &mk.scan_points, m))
        .collect())
}

/// Per-mask product-sums for one ordered band pair: slot 0 reads `pair.0`,
/// slot 1 reads `pair.1`.
pub fn extract_muchlac_pair(
    patch: &MultibandRaster,
    pair: (usize, usize),
    bank_masks: &[MaskPattern],
    m: i32,
) -> Result<Vec<f64>> {
    check_patch_size(patch, m)?;
    Ok(bank_masks
        .iter()
        .map(|mk| product_sum(patch, &[pair.0, pair.1], &mk.scan_points, m))
        .collect())
}

fn block_len(bank: &MaskBank, cross: bool, invariance: Invariance) -> usize {
    match (cross, invariance) {
        (false, Invariance::None) => bank.hlac.len(),
        (false, Invariance::RotationReflection) => bank.hlac_orbits.len(),
        (true, Invariance::None) => bank.muchlac.len(),
        (true, Invariance::RotationReflection) => bank.muchlac_orbits.len(),
    }
}

/// Stable component identifiers matching `extract_full_values` ordering.
pub fn component_names(config: &ExtractConfig, banks: &[MaskBank]) -> Vec<String> {
    let mut names = Vec::new();
    let unit = match config.invariance {
        Invariance::None => "mask",
        Invariance::RotationReflection => "orbit",
    };
    for bank in banks {
        for &band in &config.bands {
            for i in 0..block_len(bank, false, config.invariance) {
                names.push(format!("hlac/b{band}/m{}/{}{}", bank.m, unit, i));
            }
        }
        if config.use_cross_channel {
            for (a, b) in config.ordered_pairs() {
                for i in 0..block_len(bank, true, config.invariance) {
                    names.push(format!("muchlac/b{a}xb{b}/m{}/{}{}", bank.m, unit, i));
                }
            }
        }
    }
    names
}

/// Concatenated feature values for one patch: per distance, HLAC per band
/// (band order), then MUCHLAC per ordered pair (lexicographic pair order).
pub fn extract_full_values(
    patch: &MultibandRaster,
    config: &ExtractConfig,
    banks: &[MaskBank],
) -> Result<Vec<f64>> {
    config.validate(patch.channels())?;
    let mut values = Vec::new();
    for bank in banks {
        check_patch_size(patch, bank.m)?;
        for &band in &config.bands {
            values.extend(block_values(
                patch,
                &[band],
                &bank.hlac,
                &bank.hlac_orbits,
                config.invariance,
                bank.m,
            ));
        }
        if config.use_cross_channel {
            for (a, b) in config.ordered_pairs() {
                values.extend(block_values(
                    patch,
                    &[a, b],
                    &bank.muchlac,
                    &bank.muchlac_orbits,
                    config.invariance,
                    bank.m,
                ));
            }
        }
    }
    Ok(values)
}

pub fn extract_full(
    patch: &MultibandRaster,
    config: &ExtractConfig,
    banks: &[MaskBank],
) -> Result<FeatureVector> {
    Ok(FeatureVector {
        values: extract_full_values(patch, config, banks)?,
        component_names: component_names(config, banks),
    })
}

/// One HLAC/MUCHLAC row per patch; labels carried through as +1/-1.
pub fn extract_dataset(
    raster: &MultibandRaster,
    patches: &LabeledPatchSet,
    config: &ExtractConfig,
) -> Result<crate::matrix::FeatureMatrix> {
    config.validate(raster.channels())?;
    let banks = build_banks(config)?;
    let names = component_names(config, &banks);
    extract_matrix(raster, patches, names, |patch| {
        extract_full_values(patch, config, &banks)
    })
}

/// Generic per-patch row extraction (parallel over patches, ordered output).
pub fn extract_matrix<F>(
    raster: &MultibandRaster,
    patches: &LabeledPatchSet,
    component_names: Vec<String>,
    row: F,
) -> Result<crate::matrix::FeatureMatrix>
where
    F: Fn(&MultibandRaster) -> Result<Vec<f64>> + Sync,
{
    let rows: Vec<Vec<f64>> = patches
        .patches
        .par_iter()
        .map(|p| {
            let patch = raster.extract_patch(p.x, p.y, patches.patch_size)?;
            row(&patch).map_err(|e| {
                Error::InvalidInput(format!("patch at ({}, {}): {e}", p.x, p.y))
            })
        })
        .collect::<Result<_>>()?;
    let labels: Vec<i8> = patches
        .patches
        .iter()
        .map(|p| if p.label == Label::Positive { 1 } else { -1 })
        .collect();
    crate::matrix::FeatureMatrix::from_rows(component_names, rows, Some(labels))
}
