//! Compatibility graphs over candidate encodings, maximal-clique
//! enumeration, and the threshold sweep that grows the clique to a target
//! size.
//!
//! Pair scores are computed once into a triangular table of exact integer
//! numerators and re-thresholded per sweep step; thresholds are tracked in
//! thousandths so grid comparisons never touch floating point.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::PixelMatrix;
use crate::scoring::{self, OffsetTable, Packed, PACKED_MAX_ORDER};

/// Vertices are candidate matrices (identified by their position in the
/// input pool); an edge means the pair's worst mutual interaction is no
/// more attractive than the threshold.
#[derive(Debug, Clone)]
pub struct CompatibilityGraph {
    threshold: f64,
    ids: Vec<usize>,
    adj: Vec<BitSet>,
    empty_after_filter: bool,
}

impl CompatibilityGraph {
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Pool ids of the vertices, ascending.
    pub fn vertex_ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    /// True when the S_L floor removed every candidate.
    pub fn is_empty_after_filter(&self) -> bool {
        self.empty_after_filter
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BitSet::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, id_u: usize, id_v: usize) -> bool {
        let u = self.ids.iter().position(|&i| i == id_u);
        let v = self.ids.iter().position(|&i| i == id_v);
        match (u, v) {
            (Some(u), Some(v)) => self.adj[u].contains(v),
            _ => false,
        }
    }
}

/// Maximal-clique census and the selected mutually compatible set.
#[derive(Debug, Clone, Serialize)]
pub struct CliqueReport {
    /// Final S_G threshold the sweep stopped at.
    pub threshold: f64,
    /// S_L floor applied before graph construction (fixed at the seed).
    pub s_l_floor: f64,
    pub target_size: usize,
    /// Input pool size, and the vertex counts surviving deduplication and
    /// the S_L floor.
    pub pool_size: usize,
    pub dedup_size: usize,
    pub vertex_count: usize,
    pub empty_after_filter: bool,
    pub max_clique_size: usize,
    pub cliques_at_max: u64,
    /// Maximal-clique count by size at the stop threshold, for sizes at or
    /// above the target only: the sweep prunes branches that cannot reach
    /// the target, so smaller maximal cliques are never materialized.
    /// `clique_census` on a built graph counts every size when the graph is
    /// small enough to enumerate outright.
    pub census: BTreeMap<usize, u64>,
    /// Pool ids of the selected clique, ascending; the lexicographically
    /// smallest id sequence among the maximum-size cliques.
    pub selected: Vec<usize>,
    /// min(S_G, S_L) over the selected clique: the worst local score of any
    /// member and the worst pairwise score of any member pair.
    pub combined_score: f64,
}

/// Threshold sweep parameters. Seed and step are quantized to thousandths.
#[derive(Debug, Clone, Copy)]
pub struct SweepParams {
    pub seed: f64,
    pub step: f64,
    pub target_size: usize,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            seed: -0.2,
            step: 0.02,
            target_size: 12,
        }
    }
}

/// Builds the compatibility graph on `pool` at a fixed threshold. Vertices
/// whose local score falls below `s_l_floor` are excluded before edges are
/// considered; duplicates and exact mates of earlier entries are dropped.
/// An empty graph after filtering is a valid result, flagged on the graph.
pub fn build_graph(
    pool: &[PixelMatrix],
    threshold: f64,
    s_l_floor: f64,
) -> Result<CompatibilityGraph> {
    let prepared = Prepared::from_pool(pool)?;
    let nn = (prepared.order * prepared.order) as f64;
    let kept: Vec<usize> = (0..prepared.matrices.len())
        .filter(|&i| -(prepared.sl_num[i] as f64) / nn >= s_l_floor)
        .collect();
    let table = PairTable::build(&prepared, &kept);
    let adj = table.adjacency(|num| -f64::from(num) / nn >= threshold);
    Ok(CompatibilityGraph {
        threshold,
        ids: kept.iter().map(|&i| prepared.ids[i]).collect(),
        adj,
        empty_after_filter: kept.is_empty(),
    })
}

/// Every maximal clique, as ascending pool-id vectors, in the deterministic
/// order produced by pivoting Bron-Kerbosch over ascending vertex ids.
pub fn maximal_cliques(g: &CompatibilityGraph) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    bron_kerbosch(&g.adj, &mut |clique| {
        out.push(clique.iter().map(|&v| g.ids[v]).collect());
    });
    out
}

/// Counts maximal cliques by size.
pub fn clique_census(g: &CompatibilityGraph) -> BTreeMap<usize, u64> {
    let mut census = BTreeMap::new();
    bron_kerbosch(&g.adj, &mut |clique| {
        *census.entry(clique.len()).or_insert(0u64) += 1;
    });
    census
}

/// Lowers the S_G threshold from `seed` in `step` decrements (S_L floor
/// fixed at the seed) until the maximum clique size reaches `target_size`,
/// then reports that step's census and the selected clique. Reaching -1
/// without success is an exhausted-search error carrying the best census.
pub fn threshold_sweep(pool: &[PixelMatrix], params: &SweepParams) -> Result<CliqueReport> {
    let seed_milli = (params.seed * 1000.0).round() as i64;
    let step_milli = (params.step * 1000.0).round() as i64;
    if step_milli <= 0 {
        return Err(Error::InvalidInput("sweep step must be positive".into()));
    }
    if params.target_size == 0 {
        return Err(Error::InvalidInput("target size must be at least 1".into()));
    }

    let prepared = Prepared::from_pool(pool)?;
    let nn = (prepared.order * prepared.order) as i64;
    // S_L >= floor  <=>  -num/N^2 >= floor_milli/1000  <=>  num*1000 <= -floor_milli*N^2
    let kept: Vec<usize> = (0..prepared.matrices.len())
        .filter(|&i| prepared.sl_num[i] * 1000 <= -seed_milli * nn)
        .collect();
    let t_table = std::time::Instant::now();
    let table = PairTable::build(&prepared, &kept);
    eprintln!("[sweep] pair table {} vertices in {:?}", kept.len(), t_table.elapsed());

    let mut t_milli = seed_milli;
    let mut reached_floor = false;
    while t_milli >= -1000 {
        let t_step = std::time::Instant::now();
        let adj = table.adjacency(|num| i64::from(num) * 1000 <= -t_milli * nn);
        eprintln!("[sweep] t={} adjacency in {:?}", t_milli, t_step.elapsed());
        let mut census: BTreeMap<usize, u64> = BTreeMap::new();
        let mut best: Option<Vec<usize>> = None;
        bron_kerbosch_bounded(&adj, params.target_size, &mut |clique| {
            *census.entry(clique.len()).or_insert(0) += 1;
            let better = match &best {
                None => true,
                Some(b) => clique.len() > b.len() || (clique.len() == b.len() && clique < &b[..]),
            };
            if better {
                best = Some(clique.to_vec());
            }
        });
        let max_size = census.keys().max().copied().unwrap_or(0);
        eprintln!(
            "[sweep] t={} max={} cliques>=target {} in {:?}",
            t_milli,
            max_size,
            census.values().sum::<u64>(),
            t_step.elapsed()
        );
        if max_size >= params.target_size {
            let selected_local = best.expect("nonempty census has a best clique");
            let combined = combined_numerator(&prepared, &kept, &table, &selected_local);
            return Ok(CliqueReport {
                threshold: t_milli as f64 / 1000.0,
                s_l_floor: seed_milli as f64 / 1000.0,
                target_size: params.target_size,
                pool_size: pool.len(),
                dedup_size: prepared.matrices.len(),
                vertex_count: kept.len(),
                empty_after_filter: kept.is_empty(),
                max_clique_size: max_size,
                cliques_at_max: census[&max_size],
                census,
                selected: selected_local
                    .iter()
                    .map(|&v| prepared.ids[kept[v]])
                    .collect(),
                combined_score: -(combined as f64) / nn as f64,
            });
        }
        reached_floor = t_milli == -1000;
        t_milli -= step_milli;
    }
    // At -1 every pair is compatible, so the best census seen is the
    // complete graph's single maximal clique over the filtered vertices.
    let best_census = if reached_floor && !kept.is_empty() {
        BTreeMap::from([(kept.len(), 1)])
    } else {
        BTreeMap::new()
    };
    Err(Error::ExhaustedSearch {
        target: params.target_size,
        best_census,
    })
}

/// Worst integer numerator over the clique: members' S_L numerators and all
/// pairwise numerators. min(S_G, S_L) is -max/N^2.
fn combined_numerator(
    prepared: &Prepared,
    kept: &[usize],
    table: &PairTable,
    clique_local: &[usize],
) -> i64 {
    let mut max = i64::MIN;
    for &v in clique_local {
        max = max.max(prepared.sl_num[kept[v]]);
    }
    for (i, &u) in clique_local.iter().enumerate() {
        for &v in &clique_local[i + 1..] {
            max = max.max(i64::from(table.get(u, v)));
        }
    }
    max
}

// ---------------------------------------------------------------------------
// Pool preparation and the pairwise numerator table
// ---------------------------------------------------------------------------

struct Prepared {
    order: usize,
    /// Original pool index of each kept matrix (dedup + mate exclusion).
    ids: Vec<usize>,
    matrices: Vec<PixelMatrix>,
    /// S_L numerators (max overlap/rotation sum); S_L = -num/N^2.
    sl_num: Vec<i64>,
}

impl Prepared {
    fn from_pool(pool: &[PixelMatrix]) -> Result<Self> {
        let first = pool
            .first()
            .ok_or_else(|| Error::InvalidInput("empty candidate pool".into()))?;
        let order = first.order();
        if order > 15 {
            return Err(Error::Capacity {
                what: "pool search order",
                limit: 15,
                requested: order,
            });
        }
        for m in pool {
            if m.order() != order {
                return Err(Error::DimensionMismatch {
                    expected: order,
                    got: m.order(),
                });
            }
            m.require_binary()?;
        }

        let mut seen: HashSet<Vec<i8>> = HashSet::with_capacity(pool.len());
        let mut ids = Vec::new();
        let mut matrices = Vec::new();
        for (idx, m) in pool.iter().enumerate() {
            if seen.contains(m.cells()) || seen.contains(m.mate().cells()) {
                continue;
            }
            seen.insert(m.cells().to_vec());
            ids.push(idx);
            matrices.push(m.clone());
        }

        let sl_num: Vec<i64> = if order <= PACKED_MAX_ORDER {
            matrices
                .par_iter()
                .map(|m| Packed::new(m).local_numerator())
                .collect()
        } else {
            matrices
                .par_iter()
                .map(scoring::local_numerator_scalar)
                .collect()
        };

        Ok(Self {
            order,
            ids,
            matrices,
            sl_num,
        })
    }
}

/// Upper-triangle table of pairwise worst-interaction numerators over the
/// filtered vertices; pair_score = -num/N^2. Numerators fit u8 for the
/// orders a pool search can realistically cover (guarded at preparation).
struct PairTable {
    k: usize,
    rows: Vec<Vec<u8>>,
}

impl PairTable {
    fn build(prepared: &Prepared, kept: &[usize]) -> Self {
        let k = kept.len();
        let rows: Vec<Vec<u8>> = if prepared.order <= PACKED_MAX_ORDER {
            let packed: Vec<Packed> = kept
                .iter()
                .map(|&i| Packed::new(&prepared.matrices[i]))
                .collect();
            let table = OffsetTable::for_order(prepared.order);
            (0..k)
                .into_par_iter()
                .map(|u| {
                    let mut row = vec![0u8; k - u - 1];
                    scoring::pair_abs_numerators_row(
                        &packed[u],
                        &packed[u + 1..],
                        &table,
                        &mut row,
                    );
                    row
                })
                .collect()
        } else {
            (0..k)
                .into_par_iter()
                .map(|u| {
                    (u + 1..k)
                        .map(|v| {
                            scoring::pair_abs_numerator_scalar(
                                &prepared.matrices[kept[u]],
                                &prepared.matrices[kept[v]],
                            ) as u8
                        })
                        .collect()
                })
                .collect()
        };
        Self { k, rows }
    }

    #[inline]
    fn get(&self, u: usize, v: usize) -> u8 {
        debug_assert!(u != v);
        let (u, v) = if u < v { (u, v) } else { (v, u) };
        self.rows[u][v - u - 1]
    }

    fn adjacency(&self, edge: impl Fn(u8) -> bool + Sync) -> Vec<BitSet> {
        (0..self.k)
            .into_par_iter()
            .map(|u| {
                let mut row = BitSet::with_capacity(self.k);
                for v in 0..self.k {
                    if v != u && edge(self.get(u, v)) {
                        row.insert(v);
                    }
                }
                row
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Bron-Kerbosch with pivoting over fixed-capacity bitsets
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
struct BitSet {
    blocks: Vec<u64>,
}

impl BitSet {
    fn with_capacity(n: usize) -> Self {
        Self {
            blocks: vec![0; n.div_ceil(64)],
        }
    }

    fn full(n: usize) -> Self {
        let mut s = Self::with_capacity(n);
        for i in 0..n {
            s.insert(i);
        }
        s
    }

    #[inline]
    fn insert(&mut self, i: usize) {
        self.blocks[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    fn remove(&mut self, i: usize) {
        self.blocks[i / 64] &= !(1 << (i % 64));
    }

    #[inline]
    fn contains(&self, i: usize) -> bool {
        self.blocks[i / 64] >> (i % 64) & 1 == 1
    }

    fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    fn and(&self, other: &Self) -> Self {
        Self {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    fn and_len(&self, other: &Self) -> usize {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Ascending set bits.
    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().enumerate().flat_map(|(bi, &block)| {
            let mut b = block;
            std::iter::from_fn(move || {
                if b == 0 {
                    None
                } else {
                    let t = b.trailing_zeros() as usize;
                    b &= b - 1;
                    Some(bi * 64 + t)
                }
            })
        })
    }
}

/// Vertices of the k-core: the maximal induced subgraph where every vertex
/// keeps degree at least k. Ascending order.
fn k_core(adj: &[BitSet], k: usize) -> Vec<usize> {
    let n = adj.len();
    let mut degree: Vec<usize> = adj.iter().map(BitSet::len).collect();
    let mut alive = vec![true; n];
    let mut queue: Vec<usize> = (0..n).filter(|&v| degree[v] < k).collect();
    while let Some(v) = queue.pop() {
        if !alive[v] {
            continue;
        }
        alive[v] = false;
        for u in adj[v].iter() {
            if alive[u] {
                degree[u] -= 1;
                if degree[u] < k {
                    queue.push(u);
                }
            }
        }
    }
    (0..n).filter(|&v| alive[v]).collect()
}

/// Visits every maximal clique of size at least `floor`, pruning branches
/// that cannot grow that far. Counts for sizes >= floor are exact.
///
/// A clique of size >= floor lives in the (floor-1)-core, and no peeled
/// vertex can extend one (it would have kept degree >= floor-1), so the
/// search runs on the reindexed core and maximality carries over.
fn bron_kerbosch_bounded(adj: &[BitSet], floor: usize, visit: &mut impl FnMut(&[usize])) {
    if adj.is_empty() {
        return;
    }
    if floor <= 1 {
        // no useful pruning; fall back to the full enumeration
        bron_kerbosch(adj, visit);
        return;
    }
    let core = k_core(adj, floor - 1);
    let m = core.len();
    if m < floor {
        return;
    }
    let mut local_index = vec![usize::MAX; adj.len()];
    for (i, &v) in core.iter().enumerate() {
        local_index[v] = i;
    }
    let mut sub = vec![BitSet::with_capacity(m); m];
    for (i, &v) in core.iter().enumerate() {
        for u in adj[v].iter() {
            if local_index[u] != usize::MAX {
                sub[i].insert(local_index[u]);
            }
        }
    }
    let mut r = Vec::new();
    let mut mapped = |clique: &[usize]| {
        let ids: Vec<usize> = clique.iter().map(|&i| core[i]).collect();
        visit(&ids);
    };
    bk_recurse_bounded(
        &sub,
        &mut r,
        BitSet::full(m),
        BitSet::with_capacity(m),
        floor,
        &mut mapped,
    );
}

fn bk_recurse_bounded(
    adj: &[BitSet],
    r: &mut Vec<usize>,
    mut p: BitSet,
    mut x: BitSet,
    floor: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if r.len() + p.len() < floor {
        return;
    }
    if p.is_empty() && x.is_empty() {
        let mut clique = r.clone();
        clique.sort_unstable();
        visit(&clique);
        return;
    }
    let pivot = p
        .iter()
        .chain(x.iter())
        .max_by_key(|&u| (p.and_len(&adj[u]), std::cmp::Reverse(u)))
        .expect("P or X nonempty");
    let candidates: Vec<usize> = p.iter().filter(|&v| !adj[pivot].contains(v)).collect();
    for v in candidates {
        r.push(v);
        bk_recurse_bounded(adj, r, p.and(&adj[v]), x.and(&adj[v]), floor, visit);
        r.pop();
        p.remove(v);
        x.insert(v);
    }
}

/// Visits every maximal clique exactly once; cliques arrive as ascending
/// vertex lists in an order fixed by the adjacency alone.
fn bron_kerbosch(adj: &[BitSet], visit: &mut impl FnMut(&[usize])) {
    let n = adj.len();
    if n == 0 {
        return;
    }
    let mut r = Vec::new();
    bk_recurse(
        adj,
        &mut r,
        BitSet::full(n),
        BitSet::with_capacity(n),
        visit,
    );
}

fn bk_recurse(
    adj: &[BitSet],
    r: &mut Vec<usize>,
    mut p: BitSet,
    mut x: BitSet,
    visit: &mut impl FnMut(&[usize]),
) {
    if p.is_empty() && x.is_empty() {
        let mut clique = r.clone();
        clique.sort_unstable();
        visit(&clique);
        return;
    }
    // pivot: vertex of P | X with the most neighbors in P; ties go to the
    // smallest id so the recursion order is reproducible
    let pivot = p
        .iter()
        .chain(x.iter())
        .max_by_key(|&u| (p.and_len(&adj[u]), std::cmp::Reverse(u)))
        .expect("P or X nonempty");
    let candidates: Vec<usize> = p.iter().filter(|&v| !adj[pivot].contains(v)).collect();
    for v in candidates {
        r.push(v);
        bk_recurse(adj, r, p.and(&adj[v]), x.and(&adj[v]), visit);
        r.pop();
        p.remove(v);
        x.insert(v);
    }
}
