//! Brute-force oracle equivalence for HLAC/MUCHLAC product-sums and the
//! GLCM/Haralick quantities. The oracles here evaluate the definitions
//! literally and stay independent of the library's scanning code.

use muchlac_core::features::{self, ExtractConfig, Invariance};
use muchlac_core::glcm::{self, Angle, GlcmConfig};
use muchlac_core::masks::MaskPoint;
use muchlac_core::raster::MultibandRaster;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Literal evaluation: sum over every reference position where the full
/// (2m+1)x(2m+1) window fits of the product of intensities at r + a_i.
fn oracle_product_sum(
    patch: &MultibandRaster,
    channel_of_slot: &[usize],
    points: &[MaskPoint],
    m: i32,
) -> f64 {
    let (w, h) = (patch.width() as i32, patch.height() as i32);
    let mut total = 0.0;
    for ry in m..h - m {
        for rx in m..w - m {
            let mut product = 1.0;
            for p in points {
                product *= patch.get(
                    channel_of_slot[p.slot as usize],
                    (rx + p.dx) as usize,
                    (ry + p.dy) as usize,
                );
            }
            total += product;
        }
    }
    total
}

fn random_patch(rng: &mut ChaCha8Rng, channels: usize, side: usize) -> MultibandRaster {
    let raw: Vec<u16> = (0..channels * side * side)
        .map(|_| rng.gen_range(0..=65535))
        .collect();
    MultibandRaster::from_raw(
        side,
        side,
        (0..channels).map(|c| format!("b{c}")).collect(),
        65535,
        raw,
    )
    .unwrap()
}

fn assert_close(got: f64, want: f64, context: &str) {
    let tol = 1e-12 * want.abs().max(1.0);
    assert!(
        (got - want).abs() <= tol,
        "{context}: got {got}, oracle {want}"
    );
}

#[test]
fn constant_patch_hlac_values() {
    let c = 0.5_f64;
    let raw = vec![(c * 65536.0) as u16; 9]; // 32768/65536 is exact in binary
    let patch = MultibandRaster::from_raw(3, 3, vec!["b".into()], 65535, raw).unwrap();
    let v = patch.get(0, 0, 0);
    let bank = features::MaskBank::new(1, false).unwrap();
    let values = features::extract_hlac(&patch, 0, &bank.hlac, 1).unwrap();
    for (mask, &got) in bank.hlac.iter().zip(&values) {
        let want = v.powi(mask.total_degree() as i32);
        assert_close(got, want, &format!("constant patch, mask {:?}", mask.points));
    }
}

#[test]
fn sixteen_by_sixteen_m4_valid_region() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let patch = random_patch(&mut rng, 1, 16);
    let bank = features::MaskBank::new(4, false).unwrap();
    let values = features::extract_hlac(&patch, 0, &bank.hlac, 4).unwrap();
    // zeroth-order component: sum of the 8x8 = 64 central intensities
    let mut central = 0.0;
    for y in 4..12 {
        for x in 4..12 {
            central += patch.get(0, x, y);
        }
    }
    let zeroth = bank.hlac.iter().position(|mk| mk.order == 0).unwrap();
    assert_close(values[zeroth], central, "m=4 zeroth order");
}

#[test]
fn patch_smaller_than_window_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let patch = random_patch(&mut rng, 1, 4);
    let bank = features::MaskBank::new(2, false).unwrap();
    assert!(features::extract_hlac(&patch, 0, &bank.hlac, 2).is_err());
}

#[test]
fn hlac_and_muchlac_match_bruteforce_on_1000_random_patches() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let banks = [
        features::MaskBank::new(1, true).unwrap(),
        features::MaskBank::new(2, true).unwrap(),
    ];
    for iter in 0..1000 {
        let m = 1 + (iter % 2) as i32;
        let bank = &banks[(m - 1) as usize];
        let side = rng.gen_range((2 * m as usize + 1)..=12);
        let patch = random_patch(&mut rng, 2, side);
        let hlac = features::extract_hlac(&patch, 0, &bank.hlac, m).unwrap();
        for (mask, &got) in bank.hlac.iter().zip(&hlac) {
            let want = oracle_product_sum(&patch, &[0], &mask.scan_points, m);
            assert_close(got, want, &format!("hlac iter {iter}"));
        }
        let much = features::extract_muchlac_pair(&patch, (0, 1), &bank.muchlac, m).unwrap();
        for (mask, &got) in bank.muchlac.iter().zip(&much) {
            let want = oracle_product_sum(&patch, &[0, 1], &mask.scan_points, m);
            assert_close(got, want, &format!("muchlac iter {iter}"));
        }
    }
    assert!(
        start.elapsed().as_secs() < 60,
        "oracle sweep took {:?}",
        start.elapsed()
    );
}

#[test]
fn identical_bands_reduce_to_single_channel() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let one = random_patch(&mut rng, 1, 8);
    let mut raw = one.raw_channel(0).to_vec();
    raw.extend_from_slice(one.raw_channel(0));
    let patch =
        MultibandRaster::from_raw(8, 8, vec!["a".into(), "b".into()], 65535, raw).unwrap();
    let bank = features::MaskBank::new(1, true).unwrap();
    let values = features::extract_muchlac_pair(&patch, (0, 1), &bank.muchlac, 1).unwrap();
    for (mask, &got) in bank.muchlac.iter().zip(&values) {
        // same-shape single-channel product-sum on band A
        let flattened: Vec<MaskPoint> = mask
            .scan_points
            .iter()
            .map(|p| MaskPoint::new(0, p.dx, p.dy))
            .collect();
        let want = oracle_product_sum(&patch, &[0], &flattened, 1);
        assert_close(got, want, "identical bands");
    }
}

#[test]
fn zero_band_annihilates_cross_components() {
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    let one = random_patch(&mut rng, 1, 8);
    let mut raw = one.raw_channel(0).to_vec();
    raw.extend(std::iter::repeat(0u16).take(64));
    let patch =
        MultibandRaster::from_raw(8, 8, vec!["a".into(), "b".into()], 65535, raw).unwrap();
    let bank = features::MaskBank::new(1, true).unwrap();
    let values = features::extract_muchlac_pair(&patch, (0, 1), &bank.muchlac, 1).unwrap();
    for &v in &values {
        assert_eq!(v, 0.0);
    }
}

#[test]
fn feature_vector_lengths() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    // 3 bands, one distance, no invariance: 35*3 + 82*6 = 597
    let patch3 = random_patch(&mut rng, 3, 8);
    let config3 = ExtractConfig {
        bands: vec![0, 1, 2],
        distances: vec![1],
        use_cross_channel: true,
        invariance: Invariance::None,
    };
    let banks3 = features::build_banks(&config3).unwrap();
    let fv = features::extract_full(&patch3, &config3, &banks3).unwrap();
    assert_eq!(fv.values.len(), 597);
    assert_eq!(fv.component_names.len(), 597);

    // 7 bands, 4 distances: (35*7 + 82*42) * 4 = 14756
    let config7 = ExtractConfig {
        bands: (0..7).collect(),
        distances: vec![1, 2, 3, 4],
        use_cross_channel: true,
        invariance: Invariance::None,
    };
    let banks7 = features::build_banks(&config7).unwrap();
    let names = features::component_names(&config7, &banks7);
    assert_eq!(names.len(), 14756);
    {
        let mut unique = names.clone();
        unique.sort();
        unique.dedup();
        assert_eq!(unique.len(), 14756);
    }

    // 1 band, no cross-channel, one distance: 35
    let config1 = ExtractConfig {
        bands: vec![0],
        distances: vec![1],
        use_cross_channel: false,
        invariance: Invariance::None,
    };
    let banks1 = features::build_banks(&config1).unwrap();
    let fv1 = features::extract_full(&patch3, &config1, &banks1).unwrap();
    assert_eq!(fv1.values.len(), 35);
}

#[test]
fn dataset_extraction_is_order_independent() {
    use muchlac_core::raster::{build_patch_grid, LabeledPatchSet};
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let raster = random_patch(&mut rng, 2, 16);
    let mask_raw: Vec<u16> = (0..256).map(|i| u16::from(i == 3)).collect();
    let mask = MultibandRaster::from_raw(16, 16, vec!["m".into()], 1, mask_raw).unwrap();
    let patches = build_patch_grid(&raster, &mask, 8, "mem").unwrap();
    let config = ExtractConfig {
        bands: vec![0, 1],
        distances: vec![1],
        use_cross_channel: true,
        invariance: Invariance::None,
    };
    let matrix = features::extract_dataset(&raster, &patches, &config).unwrap();
    assert_eq!(matrix.rows(), 4);

    let mut reordered = patches.clone();
    reordered.patches.reverse();
    let matrix2 = features::extract_dataset(&raster, &reordered, &config).unwrap();
    for i in 0..4 {
        assert_eq!(matrix.row(i), matrix2.row(3 - i));
    }

    let empty = LabeledPatchSet {
        patch_size: 8,
        source_raster: "mem".into(),
        patches: vec![],
    };
    let em = features::extract_dataset(&raster, &empty, &config).unwrap();
    assert_eq!(em.rows(), 0);
    assert_eq!(em.cols(), matrix.cols());
}

/// Direct-summation Haralick oracle over an explicit matrix.
fn oracle_haralick(p: &[f64], n: usize) -> [f64; 5] {
    let idx = |i: usize, j: usize| p[i * n + j];
    let mut asm = 0.0;
    let mut contrast = 0.0;
    let mut idm = 0.0;
    let mut entropy = 0.0;
    for i in 0..n {
        for j in 0..n {
            let v = idx(i, j);
            asm += v * v;
            let d = (i as f64) - (j as f64);
            contrast += d * d * v;
            idm += v / (1.0 + d * d);
            if v > 0.0 {
                entropy -= v * v.ln() / std::f64::consts::LN_2;
            }
        }
    }
    let mut mi = 0.0;
    let mut mj = 0.0;
    for i in 0..n {
        for j in 0..n {
            mi += i as f64 * idx(i, j);
            mj += j as f64 * idx(i, j);
        }
    }
    let mut si = 0.0;
    let mut sj = 0.0;
    let mut cov = 0.0;
    for i in 0..n {
        for j in 0..n {
            si += (i as f64 - mi).powi(2) * idx(i, j);
            sj += (j as f64 - mj).powi(2) * idx(i, j);
            cov += (i as f64 - mi) * (j as f64 - mj) * idx(i, j);
        }
    }
    let corr = if si <= 0.0 || sj <= 0.0 {
        0.0
    } else {
        cov / (si.sqrt() * sj.sqrt())
    };
    [asm, contrast, idm, entropy, corr]
}

/// Pair-count GLCM oracle.
fn oracle_glcm(
    patch: &MultibandRaster,
    channel: usize,
    angle: Angle,
    distance: i32,
    levels: usize,
    symmetric: bool,
) -> Vec<f64> {
    let (dx, dy) = angle.offset(distance);
    let (w, h) = (patch.width() as i32, patch.height() as i32);
    let q = |v: f64| ((v * levels as f64) as usize).min(levels - 1);
    let mut counts = vec![0.0; levels * levels];
    for y in 0..h {
        for x in 0..w {
            let (nx, ny) = (x + dx, y + dy);
            if nx >= 0 && ny >= 0 && nx < w && ny < h {
                let a = q(patch.get(channel, x as usize, y as usize));
                let b = q(patch.get(channel, nx as usize, ny as usize));
                counts[a * levels + b] += 1.0;
                if symmetric {
                    counts[b * levels + a] += 1.0;
                }
            }
        }
    }
    let total: f64 = counts.iter().sum();
    counts.iter().map(|c| c / total).collect()
}

#[test]
fn glcm_matches_pair_count_oracle_on_random_patches() {
    let mut rng = ChaCha8Rng::seed_from_u64(321);
    for iter in 0..1000 {
        let side = rng.gen_range(3..=12);
        let patch = random_patch(&mut rng, 1, side);
        let angle = Angle::ALL[iter % 4];
        let levels = [4usize, 8, 32][iter % 3];
        let symmetric = iter % 2 == 0;
        let g = glcm::compute_glcm(&patch, 0, angle, 1, levels, symmetric).unwrap();
        let want = oracle_glcm(&patch, 0, angle, 1, levels, symmetric);
        for (a, b) in g.matrix.iter().zip(&want) {
            assert!((a - b).abs() <= 1e-12, "glcm iter {iter}");
        }
        let har = glcm::haralick5(&g).unwrap();
        let whar = oracle_haralick(&want, levels);
        for (a, b) in har.iter().zip(&whar) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "haralick iter {iter}");
        }
    }
}

#[test]
fn glcm_invariant_bounds_hold_on_random_patches() {
    let mut rng = ChaCha8Rng::seed_from_u64(555);
    for _ in 0..200 {
        let side = rng.gen_range(3..=10);
        let patch = random_patch(&mut rng, 1, side);
        let levels = 8;
        let g = glcm::compute_glcm(&patch, 0, Angle::Deg45, 1, levels, true).unwrap();
        let total: f64 = g.matrix.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        for i in 0..levels {
            for j in 0..levels {
                assert!((g.get(i, j) - g.get(j, i)).abs() < 1e-12);
            }
        }
        let [asm, contrast, idm, entropy, corr] = glcm::haralick5(&g).unwrap();
        let l = levels as f64;
        assert!(asm >= 1.0 / (l * l) - 1e-12 && asm <= 1.0);
        assert!(contrast >= 0.0);
        assert!(idm > 0.0 && idm <= 1.0 + 1e-12);
        assert!((0.0..=2.0 * l.log2() + 1e-12).contains(&entropy));
        assert!(corr.abs() <= 1.0 + 1e-9);
    }
}

#[test]
fn glcm_config_defaults_match_documented_values() {
    let cfg = GlcmConfig::default();
    assert_eq!(cfg.levels, 32);
    assert_eq!(cfg.distance, 1);
    assert!(cfg.symmetric);
    assert_eq!(cfg.angles.len(), 4);
}
