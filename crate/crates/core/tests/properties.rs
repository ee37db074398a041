//! Property tests for the product-sum extractors: shift invariance,
//! additivity over separated supports, degree homogeneity, exact D4
//! invariance of grouped components, and channel-permutation equivariance.

use muchlac_core::features::{self, ExtractConfig, Invariance};
use muchlac_core::raster::MultibandRaster;
use proptest::prelude::*;
use std::collections::HashMap;

const SIDE: usize = 12;

fn patch_from(channels: usize, side: usize, raw: Vec<u16>, full_scale: u16) -> MultibandRaster {
    MultibandRaster::from_raw(
        side,
        side,
        (0..channels).map(|c| format!("b{c}")).collect(),
        full_scale,
        raw,
    )
    .unwrap()
}

/// Zero patch with a `bw` x `bh` content block pasted at (bx, by), per channel.
fn blob_patch(channels: usize, block: &[u16], bw: usize, bh: usize, bx: usize, by: usize) -> MultibandRaster {
    assert_eq!(block.len(), channels * bw * bh);
    let mut raw = vec![0u16; channels * SIDE * SIDE];
    for c in 0..channels {
        for y in 0..bh {
            for x in 0..bw {
                raw[c * SIDE * SIDE + (by + y) * SIDE + (bx + x)] = block[c * bw * bh + y * bw + x];
            }
        }
    }
    patch_from(channels, SIDE, raw, 65535)
}

fn config(m: i32, invariance: Invariance) -> ExtractConfig {
    ExtractConfig {
        bands: vec![0, 1],
        distances: vec![m],
        use_cross_channel: true,
        invariance,
    }
}

fn extract(patch: &MultibandRaster, cfg: &ExtractConfig) -> Vec<f64> {
    let banks = features::build_banks(cfg).unwrap();
    features::extract_full_values(patch, cfg, &banks).unwrap()
}

proptest! {
    /// Content at least 2m from the border: translating it leaves every
    /// component bit-identical (same nonzero terms in the same scan order).
    #[test]
    fn shift_invariance(
        m in 1i32..=2,
        block in proptest::collection::vec(0u16..=65535, 2 * 4 * 4),
        ox in 0usize..=2, oy in 0usize..=2,
        sx in 0usize..=2, sy in 0usize..=2,
    ) {
        // block spans 4x4; origin range keeps it within [2m, SIDE - 2m)
        let base = 2 * m as usize;
        let a = blob_patch(2, &block, 4, 4, base + ox, base + oy);
        let b = blob_patch(2, &block, 4, 4, base + sx, base + sy);
        let cfg = config(m, Invariance::None);
        prop_assert_eq!(extract(&a, &cfg), extract(&b, &cfg));
    }

    /// Two blobs separated by more than 2m (Chebyshev): the combined patch's
    /// components equal the sum of each blob's components (1e-12 relative).
    #[test]
    fn additivity_over_separated_supports(
        m in 1i32..=2,
        b1 in proptest::collection::vec(0u16..=65535, 2 * 2 * 2),
        b2 in proptest::collection::vec(0u16..=65535, 2 * 2 * 2),
    ) {
        // 2x2 blobs at (0,0) and (9,9): gap of 7 > 2m+1 in both axes
        let p1 = blob_patch(2, &b1, 2, 2, 0, 0);
        let p2 = blob_patch(2, &b2, 2, 2, 9, 9);
        let mut raw = p1.raw_channel(0).to_vec();
        raw.extend_from_slice(p1.raw_channel(1));
        let mut combined = raw.clone();
        for (dst, src) in combined
            .iter_mut()
            .zip(p2.raw_channel(0).iter().chain(p2.raw_channel(1)))
        {
            *dst += *src; // disjoint supports, no overflow
        }
        let both = patch_from(2, SIDE, combined, 65535);
        let cfg = config(m, Invariance::None);
        let v1 = extract(&p1, &cfg);
        let v2 = extract(&p2, &cfg);
        let vb = extract(&both, &cfg);
        for ((a, b), c) in v1.iter().zip(&v2).zip(&vb) {
            let want = a + b;
            prop_assert!((c - want).abs() <= 1e-12 * want.abs().max(1.0));
        }
    }

    /// Doubling every intensity multiplies an order-N component by 2^(N+1)
    /// (degree = number of mask points). Doubling via full_scale is exact.
    #[test]
    fn homogeneity_in_intensity(
        raw in proptest::collection::vec(0u16..=64, 2 * SIDE * SIDE),
        m in 1i32..=2,
    ) {
        let p1 = patch_from(2, SIDE, raw.clone(), 128);
        let p2 = patch_from(2, SIDE, raw, 64); // intensities exactly doubled
        let cfg = config(m, Invariance::None);
        let banks = features::build_banks(&cfg).unwrap();
        let v1 = features::extract_full_values(&p1, &cfg, &banks).unwrap();
        let v2 = features::extract_full_values(&p2, &cfg, &banks).unwrap();
        let degrees: Vec<usize> = banks[0]
            .hlac
            .iter()
            .map(|mk| mk.total_degree())
            .chain(banks[0].hlac.iter().map(|mk| mk.total_degree()))
            .chain((0..2).flat_map(|_| banks[0].muchlac.iter().map(|mk| mk.total_degree())))
            .collect();
        prop_assert_eq!(degrees.len(), v1.len());
        for ((a, b), d) in v1.iter().zip(&v2).zip(&degrees) {
            prop_assert_eq!(*b, a * f64::powi(2.0, *d as i32));
        }
    }

    /// Rotating or reflecting the patch leaves every grouped component equal
    /// within 1e-12 relative, and permutes ungrouped components within orbits.
    #[test]
    fn d4_invariance_of_grouped_components(
        raw in proptest::collection::vec(0u16..=65535, 2 * SIDE * SIDE),
        m in 1i32..=2,
        transform in 1usize..8,
    ) {
        let p = patch_from(2, SIDE, raw.clone(), 65535);
        // apply the same dihedral map to pixel coordinates (square patch)
        let t = muchlac_core::masks::D4_TRANSFORMS[transform];
        let n = SIDE as i32;
        let mut rotated = vec![0u16; raw.len()];
        for c in 0..2 {
            for y in 0..n {
                for x in 0..n {
                    // centered coordinates so the map stays within the square
                    let (tx, ty) = t(2 * x - (n - 1), 2 * y - (n - 1));
                    let (nx, ny) = (((tx + n - 1) / 2) as usize, ((ty + n - 1) / 2) as usize);
                    rotated[c as usize * (SIDE * SIDE) + ny * SIDE + nx] =
                        raw[c as usize * (SIDE * SIDE) + y as usize * SIDE + x as usize];
                }
            }
        }
        let q = patch_from(2, SIDE, rotated, 65535);
        let cfg = config(m, Invariance::RotationReflection);
        let a = extract(&p, &cfg);
        let b = extract(&q, &cfg);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "{x} vs {y}");
        }
    }

    /// Swapping the two bands relabels components: b0<->b1 for per-band
    /// blocks, b0xb1<->b1xb0 for cross blocks. Values are bit-identical.
    #[test]
    fn channel_permutation_equivariance(
        raw in proptest::collection::vec(0u16..=65535, 2 * SIDE * SIDE),
        m in 1i32..=2,
    ) {
        let half = SIDE * SIDE;
        let p = patch_from(2, SIDE, raw.clone(), 65535);
        let swapped: Vec<u16> = raw[half..].iter().chain(&raw[..half]).copied().collect();
        let q = patch_from(2, SIDE, swapped, 65535);
        let cfg = config(m, Invariance::None);
        let banks = features::build_banks(&cfg).unwrap();
        let names = features::component_names(&cfg, &banks);
        let vp: HashMap<&str, f64> = names
            .iter()
            .map(String::as_str)
            .zip(extract(&p, &cfg))
            .collect();
        let vq: HashMap<&str, f64> = names
            .iter()
            .map(String::as_str)
            .zip(extract(&q, &cfg))
            .collect();
        for name in names.iter().map(String::as_str) {
            let mirrored = name
                .replace("b0xb1", "bX")
                .replace("b1xb0", "b0xb1")
                .replace("bX", "b1xb0")
                .replace("/b0/", "/bY/")
                .replace("/b1/", "/b0/")
                .replace("/bY/", "/b1/");
            prop_assert_eq!(vq[name], vp[mirrored.as_str()], "{}", name);
        }
    }
}
