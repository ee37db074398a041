//! Seeded synthetic benchmark scenarios.
//!
//! The "cross-channel" scenario builds a 2-band raster on a grid of
//! square cells. Negative cells fill bands A and B with independent noise
//! drawn from the same marginal distribution; positive cells set B = A
//! pixelwise. Per-channel statistics are therefore indistinguishable
//! across classes while the inter-channel relationship differs, and only
//! features that look across channels can separate the classes.

use crate::error::{Error, Result};
use crate::raster::MultibandRaster;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const SCENARIO_CROSS_CHANNEL: &str = "cross-channel";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthConfig {
    pub scenario: String,
    pub cells_x: usize,
    pub cells_y: usize,
    pub cell_size: usize,
    pub positive_fraction: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            scenario: SCENARIO_CROSS_CHANNEL.to_string(),
            cells_x: 32,
            cells_y: 32,
            cell_size: 16,
            positive_fraction: 0.3,
            seed: 7,
        }
    }
}

// noise marginal: uniform raw values in [0.2, 0.8] of full scale
const NOISE_LO: u16 = 13107;
const NOISE_HI: u16 = 52428;

/// Generates (raster, label mask) for the named scenario. Same config,
/// same bytes.
pub fn synth_generate(config: &SynthConfig) -> Result<(MultibandRaster, MultibandRaster)> {
    if config.scenario != SCENARIO_CROSS_CHANNEL {
        return Err(Error::InvalidInput(format!(
            "unknown scenario {:?}",
            config.scenario
        )));
    }
    if config.cells_x == 0 || config.cells_y == 0 || config.cell_size == 0 {
        return Err(Error::InvalidInput("empty synth grid".into()));
    }
    if !(0.0..=1.0).contains(&config.positive_fraction) {
        return Err(Error::InvalidInput(
            "positive_fraction must be in [0, 1]".into(),
        ));
    }
    let width = config.cells_x * config.cell_size;
    let height = config.cells_y * config.cell_size;
    let n_cells = config.cells_x * config.cells_y;
    let n_pos = (config.positive_fraction * n_cells as f64).round() as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..n_cells).collect();
    order.shuffle(&mut rng);
    let mut positive = vec![false; n_cells];
    for &c in order.iter().take(n_pos) {
        positive[c] = true;
    }

    let plane = width * height;
    let mut band_a = vec![0u16; plane];
    let mut band_b = vec![0u16; plane];
    let mut mask = vec![0u16; plane];
    for cy in 0..config.cells_y {
        for cx in 0..config.cells_x {
            let is_pos = positive[cy * config.cells_x + cx];
            for py in 0..config.cell_size {
                let y = cy * config.cell_size + py;
                for px in 0..config.cell_size {
                    let x = cx * config.cell_size + px;
                    let i = y * width + x;
                    let a = rng.gen_range(NOISE_LO..=NOISE_HI);
                    // draw b unconditionally to keep the stream layout fixed
                    let b = rng.gen_range(NOISE_LO..=NOISE_HI);
                    band_a[i] = a;
                    band_b[i] = if is_pos { a } else { b };
                    if is_pos {
                        mask[i] = 1;
                    }
                }
            }
        }
    }

    let mut raw = band_a;
    raw.extend(band_b);
    let raster = MultibandRaster::from_raw(
        width,
        height,
        vec!["A".into(), "B".into()],
        65535,
        raw,
    )?;
    let mask_raster = MultibandRaster::from_raw(width, height, vec!["label".into()], 1, mask)?;
    Ok((raster, mask_raster))
}
