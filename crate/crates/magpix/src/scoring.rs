//! Interaction scoring over integer translations and quarter-turn rotations.
//!
//! Translation scores are exact integer sums divided once by N^2, so the
//! search path carries no floating-point accumulation error. Matrices of
//! order <= 8 additionally get a packed 64-bit kernel used by the batch
//! pool workloads; it is checked against the scalar path by property tests.

use crate::error::{Error, Result};
use crate::matrix::PixelMatrix;

/// Normalized correlation scores over all integer translations, indexed by
/// offsets (dx, dy) in [-(N-1), N-1]^2. Offsets beyond that have no overlap
/// (score 0) and are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMap {
    order: usize,
    scores: Vec<f64>,
}

impl InteractionMap {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Offset extent: dx, dy range over [-(N-1), N-1].
    pub fn max_offset(&self) -> isize {
        self.order as isize - 1
    }

    /// Score at offset (dx, dy). Panics outside the stored range.
    pub fn get(&self, dx: isize, dy: isize) -> f64 {
        let r = self.max_offset();
        assert!(dx.abs() <= r && dy.abs() <= r, "offset out of range");
        let w = 2 * self.order - 1;
        self.scores[(dy + r) as usize * w + (dx + r) as usize]
    }

    /// Iterates (dx, dy, score), dy outermost, both ascending.
    pub fn iter(&self) -> impl Iterator<Item = (isize, isize, f64)> + '_ {
        let r = self.max_offset();
        (-r..=r).flat_map(move |dy| (-r..=r).map(move |dx| (dx, dy, self.get(dx, dy))))
    }

    /// Most negative entry, excluding the centered (0, 0) offset.
    pub fn min_off_center(&self) -> f64 {
        self.iter()
            .filter(|&(dx, dy, _)| (dx, dy) != (0, 0))
            .map(|(_, _, s)| s)
            .fold(f64::INFINITY, f64::min)
    }

    /// CSV with header `dx,dy,score`, nine fractional digits, dy outermost.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dx,dy,score\n");
        for (dx, dy, s) in self.iter() {
            out.push_str(&format!("{dx},{dy},{s:.9}\n"));
        }
        out
    }
}

/// Correlation of `a` against `b` over every integer translation:
/// entry (dx, dy) = sum over the overlap of a[i][j] * b[i+dy][j+dx], / N^2.
/// Entry (0, 0) equals `normalized_score(a, b)`.
pub fn cross_correlate(a: &PixelMatrix, b: &PixelMatrix) -> Result<InteractionMap> {
    check_pair(a, b)?;
    let n = a.order() as isize;
    let denom = (n * n) as f64;
    let r = n - 1;
    let mut scores = Vec::with_capacity(((2 * n - 1) * (2 * n - 1)) as usize);
    for dy in -r..=r {
        for dx in -r..=r {
            scores.push(overlap_sum(a, b, dx, dy) as f64 / denom);
        }
    }
    Ok(InteractionMap {
        order: a.order(),
        scores,
    })
}

/// Integer overlap sum at offset (dx, dy); zero when nothing overlaps.
fn overlap_sum(a: &PixelMatrix, b: &PixelMatrix, dx: isize, dy: isize) -> i64 {
    let n = a.order() as isize;
    let mut sum = 0i64;
    for i in (-dy).max(0)..(n - dy).min(n) {
        for j in (-dx).max(0)..(n - dx).min(n) {
            sum += i64::from(a.get(i as usize, j as usize))
                * i64::from(b.get((i + dy) as usize, (j + dx) as usize));
        }
    }
    sum
}

/// Normalized scores of `a` against quarter-turn rotations of `b`:
/// one entry per 0, 90, 180, 270 degrees counterclockwise.
pub fn rotation_scores_cardinal(a: &PixelMatrix, b: &PixelMatrix) -> Result<[f64; 4]> {
    check_pair(a, b)?;
    let mut out = [0.0; 4];
    let mut rot = b.clone();
    for slot in &mut out {
        *slot = crate::matrix::normalized_score(a, &rot)?;
        rot = rot.rotate90();
    }
    Ok(out)
}

/// Local criterion S_L: the most attractive (most negative) interaction
/// between `a` and its mate over every wrong configuration — all non-center
/// translations plus the centered 90/180/270-degree rotations. 0 is optimal.
pub fn local_score(a: &PixelMatrix) -> Result<f64> {
    a.require_binary()?;
    let n = a.order();
    let num = if n <= PACKED_MAX_ORDER {
        Packed::new(a).local_numerator()
    } else {
        local_numerator_scalar(a)
    };
    Ok(-(num as f64) / (n * n) as f64)
}

/// Pairwise worst case: the minimum score over the four oriented encounters
/// {a, mate(a)} x {b, mate(b)} across all translations and the centered
/// cardinal rotations. Mate negation makes this -max|score| over the
/// configurations of (a, b) alone, which is what gets computed.
pub fn pair_score(a: &PixelMatrix, b: &PixelMatrix) -> Result<f64> {
    check_pair(a, b)?;
    if a == b {
        return Err(Error::InvalidInput(
            "pair_score requires distinct matrices (a matrix always mates itself centered)".into(),
        ));
    }
    let n = a.order();
    let num = if n <= PACKED_MAX_ORDER {
        Packed::new(a).pair_abs_numerator(&Packed::new(b))
    } else {
        pair_abs_numerator_scalar(a, b)
    };
    Ok(-(num as f64) / (n * n) as f64)
}

fn check_pair(a: &PixelMatrix, b: &PixelMatrix) -> Result<()> {
    if a.order() != b.order() {
        return Err(Error::DimensionMismatch {
            expected: a.order(),
            got: b.order(),
        });
    }
    a.require_binary()?;
    b.require_binary()
}

pub(crate) fn local_numerator_scalar(a: &PixelMatrix) -> i64 {
    let n = a.order() as isize;
    let r = n - 1;
    let mut max = i64::MIN;
    for dy in -r..=r {
        for dx in -r..=r {
            if (dx, dy) != (0, 0) {
                max = max.max(overlap_sum(a, a, dx, dy));
            }
        }
    }
    let mut rot = a.rotate90();
    for _ in 0..3 {
        max = max.max(overlap_sum(a, &rot, 0, 0));
        rot = rot.rotate90();
    }
    max
}

pub(crate) fn pair_abs_numerator_scalar(a: &PixelMatrix, b: &PixelMatrix) -> i64 {
    let n = a.order() as isize;
    let r = n - 1;
    let mut max = 0i64;
    for dy in -r..=r {
        for dx in -r..=r {
            max = max.max(overlap_sum(a, b, dx, dy).abs());
        }
    }
    let mut rot = b.rotate90();
    for _ in 0..3 {
        max = max.max(overlap_sum(a, &rot, 0, 0).abs());
        rot = rot.rotate90();
    }
    max
}

// ---------------------------------------------------------------------------
// Packed kernel: one bit per cell at stride 8 (bit i*8+j set iff +1).
// An offset's overlap sum is ov - 2*popcount((A ^ shift(B)) & mask); the
// mask keeps exactly the in-bounds cells, which also discards row-wrap
// contamination from the flat shift.
// ---------------------------------------------------------------------------

pub(crate) const PACKED_MAX_ORDER: usize = 8;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Packed {
    order: usize,
    bits: u64,
    /// 90, 180, 270 degree counterclockwise rotations.
    rots: [u64; 3],
}

impl Packed {
    pub(crate) fn new(m: &PixelMatrix) -> Self {
        debug_assert!(m.order() <= PACKED_MAX_ORDER && m.is_binary());
        let r1 = m.rotate90();
        let r2 = r1.rotate90();
        let r3 = r2.rotate90();
        Self {
            order: m.order(),
            bits: pack(m),
            rots: [pack(&r1), pack(&r2), pack(&r3)],
        }
    }

    pub(crate) fn local_numerator(&self) -> i64 {
        let table = OffsetTable::for_order(self.order);
        let mut max = i64::MIN;
        for e in &table.entries {
            if e.center {
                continue;
            }
            max = max.max(e.sum(self.bits, self.bits));
        }
        let full = table.center();
        for rot in self.rots {
            max = max.max(full.sum(self.bits, rot));
        }
        max
    }

    pub(crate) fn pair_abs_numerator(&self, other: &Packed) -> i64 {
        debug_assert_eq!(self.order, other.order);
        let table = OffsetTable::for_order(self.order);
        self.pair_abs_numerator_with(other, &table)
    }

    pub(crate) fn pair_abs_numerator_with(&self, other: &Packed, table: &OffsetTable) -> i64 {
        let mut max = 0i64;
        for e in &table.entries {
            max = max.max(e.sum(self.bits, other.bits).abs());
        }
        let full = table.center();
        for rot in other.rots {
            max = max.max(full.sum(self.bits, rot).abs());
        }
        max
    }
}

/// Batched form of `pair_abs_numerator_with` for one row of a pair table:
/// `out[i]` gets the numerator of `a` against `others[i]`. Processing four
/// partners per pass over the offset table amortizes the table loads.
pub(crate) fn pair_abs_numerators_row(
    a: &Packed,
    others: &[Packed],
    table: &OffsetTable,
    out: &mut [u8],
) {
    debug_assert_eq!(others.len(), out.len());
    let abits = a.bits;
    let full = table.center();
    let mut idx = 0;
    let mut chunks = others.chunks_exact(4);
    for chunk in &mut chunks {
        let b = [chunk[0].bits, chunk[1].bits, chunk[2].bits, chunk[3].bits];
        let mut m = [0i64; 4];
        for e in &table.entries {
            for lane in 0..4 {
                let shifted = (b[lane] >> e.shr) << e.shl;
                let s = e.overlap - 2 * (((abits ^ shifted) & e.mask).count_ones() as i64);
                m[lane] = m[lane].max(s.abs());
            }
        }
        for lane in 0..4 {
            for rot in chunk[lane].rots {
                m[lane] = m[lane].max(full.sum(abits, rot).abs());
            }
            out[idx + lane] = m[lane] as u8;
        }
        idx += 4;
    }
    for (b, slot) in chunks.remainder().iter().zip(&mut out[idx..]) {
        *slot = a.pair_abs_numerator_with(b, table) as u8;
    }
}

fn pack(m: &PixelMatrix) -> u64 {
    let mut bits = 0u64;
    for i in 0..m.order() {
        for j in 0..m.order() {
            if m.get(i, j) == 1 {
                bits |= 1 << (i * 8 + j);
            }
        }
    }
    bits
}

#[derive(Debug, Clone, Copy)]
struct OffsetEntry {
    /// Right and left shift amounts; one of the two is always zero, which
    /// keeps the alignment branch-free.
    shr: u8,
    shl: u8,
    mask: u64,
    overlap: i64,
    center: bool,
}

impl OffsetEntry {
    /// Overlap sum of a against b shifted by this entry's offset.
    #[inline]
    fn sum(&self, a: u64, b: u64) -> i64 {
        let shifted = (b >> self.shr) << self.shl;
        self.overlap - 2 * (((a ^ shifted) & self.mask).count_ones() as i64)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct OffsetTable {
    entries: Vec<OffsetEntry>,
    center_index: usize,
}

impl OffsetTable {
    pub(crate) fn for_order(n: usize) -> Self {
        debug_assert!((1..=PACKED_MAX_ORDER).contains(&n));
        let n = n as isize;
        let r = n - 1;
        let mut entries = Vec::with_capacity(((2 * n - 1) * (2 * n - 1)) as usize);
        let mut center_index = 0;
        for dy in -r..=r {
            for dx in -r..=r {
                let mut mask = 0u64;
                for i in (-dy).max(0)..(n - dy).min(n) {
                    for j in (-dx).max(0)..(n - dx).min(n) {
                        mask |= 1 << (i * 8 + j);
                    }
                }
                if (dx, dy) == (0, 0) {
                    center_index = entries.len();
                }
                let shift = dy * 8 + dx;
                entries.push(OffsetEntry {
                    shr: shift.max(0) as u8,
                    shl: (-shift).max(0) as u8,
                    mask,
                    overlap: mask.count_ones() as i64,
                    center: (dx, dy) == (0, 0),
                });
            }
        }
        Self {
            entries,
            center_index,
        }
    }

    fn center(&self) -> &OffsetEntry {
        &self.entries[self.center_index]
    }
}
