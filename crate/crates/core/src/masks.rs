//! Enumeration of HLAC and MUCHLAC autocorrelation mask patterns.
//!
//! A mask is a multiset of (channel-slot, offset) points; its product-sum
//! over an image is one autocorrelation component. Displacements are drawn
//! from the 3x3 pattern grid scaled by the displacement distance `m`, i.e.
//! offsets in `{-m, 0, m}^2`, so the number of equivalence classes is the
//! same for every `m >= 1`.
//!
//! Two single-channel masks are equivalent iff one is a translate of the
//! other. Cross-channel (two-slot) masks are additionally equivalent under
//! swapping the two slot labels. The stored form is the canonical
//! representative: minimal under (order, lexicographically sorted
//! (slot, dy, dx) tuples) over the whole equivalence group.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// One mask point. Ordering is (slot, dy, dx), which defines the canonical
/// total order on masks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MaskPoint {
    pub slot: u8,
    pub dy: i32,
    pub dx: i32,
}

impl MaskPoint {
    pub fn new(slot: u8, dx: i32, dy: i32) -> Self {
        Self { slot, dy, dx }
    }
}

/// A canonical mask pattern together with a scan form whose offsets all lie
/// within the `(2m+1) x (2m+1)` window (used for product-sum scanning).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskPattern {
    /// Canonical representative, sorted; contains a slot-0 point at (0,0).
    pub points: Vec<MaskPoint>,
    /// Group-equivalent form with every offset in `[-m, m]^2` and a slot-0
    /// point at (0,0); deterministic (lex-min among in-window candidates).
    pub scan_points: Vec<MaskPoint>,
    /// N = number of displacement points = |points| - 1.
    pub order: usize,
    pub m: i32,
    pub cross_channel: bool,
}

impl MaskPattern {
    /// Homogeneity degree of the mask's monomial: |points| with multiplicity.
    pub fn total_degree(&self) -> usize {
        self.points.len()
    }
}

/// One D4 orbit of canonical mask indices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaskGroup {
    pub group_id: usize,
    pub member_indices: Vec<usize>,
}

/// Canonical + scan forms for a point multiset under translation (and slot
/// swap when `allow_swap`). Candidate transforms translate each slot-0 point
/// to the origin; the scan form is the lex-min candidate whose offsets all
/// fit in `[-m, m]^2`.
fn canonical_and_scan(points: &[MaskPoint], allow_swap: bool, m: i32) -> (Vec<MaskPoint>, Vec<MaskPoint>) {
    let mut best: Option<Vec<MaskPoint>> = None;
    let mut best_scan: Option<Vec<MaskPoint>> = None;
    let swaps: &[bool] = if allow_swap { &[false, true] } else { &[false] };
    for &swap in swaps {
        let swapped: Vec<MaskPoint> = points
            .iter()
            .map(|p| MaskPoint {
                slot: if swap { 1 - p.slot } else { p.slot },
                ..*p
            })
            .collect();
        for anchor in swapped.iter().filter(|p| p.slot == 0) {
            let mut cand: Vec<MaskPoint> = swapped
                .iter()
                .map(|p| MaskPoint {
                    slot: p.slot,
                    dy: p.dy - anchor.dy,
                    dx: p.dx - anchor.dx,
                })
                .collect();
            cand.sort();
            if best.as_ref().map_or(true, |b| cand < *b) {
                best = Some(cand.clone());
            }
            let in_window = cand
                .iter()
                .all(|p| p.dx.abs() <= m && p.dy.abs() <= m);
            if in_window && best_scan.as_ref().map_or(true, |b| cand < *b) {
                best_scan = Some(cand);
            }
        }
    }
    let canonical = best.expect("mask has a slot-0 point");
    let scan = best_scan.expect("mask has an in-window form");
    (canonical, scan)
}

/// Re-canonicalizes an arbitrary (possibly transformed) point multiset.
pub fn canonicalize(points: &[MaskPoint], allow_swap: bool) -> Vec<MaskPoint> {
    let span = points
        .iter()
        .map(|p| p.dx.abs().max(p.dy.abs()))
        .max()
        .unwrap_or(0)
        .max(1);
    canonical_and_scan(points, allow_swap, 2 * span).0
}

fn grid(m: i32) -> Vec<(i32, i32)> {
    let mut g = Vec::with_capacity(9);
    for dx in [-m, 0, m] {
        for dy in [-m, 0, m] {
            g.push((dx, dy));
        }
    }
    g
}

fn dedup_insert(
    seen: &mut BTreeMap<Vec<MaskPoint>, MaskPattern>,
    points: Vec<MaskPoint>,
    allow_swap: bool,
    m: i32,
    cross_channel: bool,
) {
    let (canonical, scan) = canonical_and_scan(&points, allow_swap, m);
    let order = canonical.len() - 1;
    seen.entry(canonical.clone()).or_insert(MaskPattern {
        points: canonical,
        scan_points: scan,
        order,
        m,
        cross_channel,
    });
}

fn sorted_output(seen: BTreeMap<Vec<MaskPoint>, MaskPattern>) -> Vec<MaskPattern> {
    let mut out: Vec<MaskPattern> = seen.into_values().collect();
    out.sort_by(|a, b| (a.order, &a.points).cmp(&(b.order, &b.points)));
    out
}

/// Enumerates all single-channel masks up to `max_order`, deduped under
/// translation. Yields 1 + 5 + 29 = 35 classes at `max_order = 2`, for
/// every `m >= 1`.
pub fn enumerate_hlac_masks(m: i32, max_order: usize) -> Result<Vec<MaskPattern>> {
    if m < 1 {
        return Err(Error::InvalidInput("m must be >= 1".into()));
    }
    if max_order > 2 {
        return Err(Error::InvalidInput(
            "max_order > 2 is unsupported (combinatorial cost)".into(),
        ));
    }
    let g = grid(m);
    let reference = MaskPoint::new(0, 0, 0);
    let mut seen = BTreeMap::new();
    dedup_insert(&mut seen, vec![reference], false, m, false);
    if max_order >= 1 {
        for &(dx, dy) in &g {
            dedup_insert(
                &mut seen,
                vec![reference, MaskPoint::new(0, dx, dy)],
                false,
                m,
                false,
            );
        }
    }
    if max_order >= 2 {
        for (i, &(ax, ay)) in g.iter().enumerate() {
            for &(bx, by) in &g[i..] {
                dedup_insert(
                    &mut seen,
                    vec![
                        reference,
                        MaskPoint::new(0, ax, ay),
                        MaskPoint::new(0, bx, by),
                    ],
                    false,
                    m,
                    false,
                );
            }
        }
    }
    Ok(sorted_output(seen))
}

/// Enumerates all two-slot cross-channel masks with orders in
/// `1..=max_order`, deduped under translation and slot swap. Yields
/// 5 + 77 = 82 classes at `max_order = 2`, for every `m >= 1`.
pub fn enumerate_muchlac_masks(m: i32, max_order: usize, n_slots: usize) -> Result<Vec<MaskPattern>> {
    if n_slots != 2 {
        return Err(Error::InvalidInput(
            "only 2-slot cross-channel masks are supported".into(),
        ));
    }
    if m < 1 {
        return Err(Error::InvalidInput("m must be >= 1".into()));
    }
    if max_order == 0 {
        return Err(Error::InvalidInput(
            "no cross-channel zeroth-order mask exists".into(),
        ));
    }
    if max_order > 2 {
        return Err(Error::InvalidInput(
            "max_order > 2 is unsupported (combinatorial cost)".into(),
        ));
    }
    let g = grid(m);
    let reference = MaskPoint::new(0, 0, 0);
    let mut seen = BTreeMap::new();
    for &(dx, dy) in &g {
        dedup_insert(
            &mut seen,
            vec![reference, MaskPoint::new(1, dx, dy)],
            true,
            m,
            true,
        );
    }
    if max_order >= 2 {
        let mut displacements = Vec::with_capacity(18);
        for slot in [0u8, 1u8] {
            for &(dx, dy) in &g {
                displacements.push(MaskPoint::new(slot, dx, dy));
            }
        }
        displacements.sort();
        for (i, &a) in displacements.iter().enumerate() {
            for &b in &displacements[i..] {
                if a.slot == 0 && b.slot == 0 {
                    continue; // both slots must appear
                }
                dedup_insert(&mut seen, vec![reference, a, b], true, m, true);
            }
        }
    }
    Ok(sorted_output(seen))
}

/// The 8 dihedral transforms acting on an (dx, dy) offset.
pub const D4_TRANSFORMS: [fn(i32, i32) -> (i32, i32); 8] = [
    |dx, dy| (dx, dy),
    |dx, dy| (-dy, dx),
    |dx, dy| (-dx, -dy),
    |dx, dy| (dy, -dx),
    |dx, dy| (-dx, dy),
    |dx, dy| (dx, -dy),
    |dx, dy| (dy, dx),
    |dx, dy| (-dy, -dx),
];

pub fn apply_d4(points: &[MaskPoint], transform: usize) -> Vec<MaskPoint> {
    let f = D4_TRANSFORMS[transform];
    points
        .iter()
        .map(|p| {
            let (dx, dy) = f(p.dx, p.dy);
            MaskPoint::new(p.slot, dx, dy)
        })
        .collect()
}

/// Partitions canonical masks (one enumeration call) into orbits under the
/// dihedral group acting on offsets, slots fixed, composed with the
/// enumeration equivalence.
pub fn d4_orbits(masks: &[MaskPattern]) -> Result<Vec<MaskGroup>> {
    let index: BTreeMap<&Vec<MaskPoint>, usize> = masks
        .iter()
        .enumerate()
        .map(|(i, mk)| (&mk.points, i))
        .collect();
    let mut parent: Vec<usize> = (0..masks.len()).collect();
    fn find(parent: &mut Vec<usize>, mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    for (i, mask) in masks.iter().enumerate() {
        for t in 0..8 {
            let transformed = canonicalize(&apply_d4(&mask.points, t), mask.cross_channel);
            let j = *index.get(&transformed).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "transform of mask {i} is not in the enumeration; input not canonical or incomplete"
                ))
            })?;
            let (ra, rb) = (find(&mut parent, i), find(&mut parent, j));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..masks.len() {
        let root = find(&mut parent, i);
        members.entry(root).or_default().push(i);
    }
    Ok(members
        .into_values()
        .enumerate()
        .map(|(group_id, member_indices)| MaskGroup {
            group_id,
            member_indices,
        })
        .collect())
}
