//! Binary pixel matrices: construction, enumeration, Hadamard identification
//! and the Sylvester doubling recursion.

use crate::error::{Error, Result};

/// Largest order `sylvester` will construct (2^6).
pub const MAX_SYLVESTER_ORDER: usize = 64;

/// Exhaustive enumeration is guarded to order*order <= 25 cells.
pub const MAX_ENUMERATION_CELLS: usize = 25;

/// A square grid of magnetic pixel polarities.
///
/// Cells are trits: `+1` North, `-1` South, `0` unprogrammed. A matrix with
/// no zero cells is *binary*; most scoring operations require binary input.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PixelMatrix {
    order: usize,
    cells: Vec<i8>,
}

impl PixelMatrix {
    /// Builds a matrix from row-major cells. Rejects non-square lengths and
    /// values outside {-1, 0, +1}.
    pub fn new(order: usize, cells: Vec<i8>) -> Result<Self> {
        if order == 0 || cells.len() != order * order {
            return Err(Error::DimensionMismatch {
                expected: order * order,
                got: cells.len(),
            });
        }
        if let Some(bad) = cells.iter().find(|c| !matches!(c, -1 | 0 | 1)) {
            return Err(Error::InvalidInput(format!(
                "cell value {bad} outside {{-1, 0, +1}}"
            )));
        }
        Ok(Self { order, cells })
    }

    pub fn from_rows(rows: &[Vec<i8>]) -> Result<Self> {
        let order = rows.len();
        let mut cells = Vec::with_capacity(order * order);
        for row in rows {
            if row.len() != order {
                return Err(Error::DimensionMismatch {
                    expected: order,
                    got: row.len(),
                });
            }
            cells.extend_from_slice(row);
        }
        Self::new(order, cells)
    }

    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> i8) -> Result<Self> {
        let mut cells = Vec::with_capacity(order * order);
        for i in 0..order {
            for j in 0..order {
                cells.push(f(i, j));
            }
        }
        Self::new(order, cells)
    }

    /// All-zero (unprogrammed) matrix.
    pub fn blank(order: usize) -> Self {
        Self {
            order,
            cells: vec![0; order * order],
        }
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> i8 {
        self.cells[row * self.order + col]
    }

    #[inline]
    pub fn cells(&self) -> &[i8] {
        &self.cells
    }

    /// True when no cell is 0.
    pub fn is_binary(&self) -> bool {
        self.cells.iter().all(|&c| c != 0)
    }

    pub(crate) fn require_binary(&self) -> Result<()> {
        if self.is_binary() {
            Ok(())
        } else {
            Err(Error::NotBinary)
        }
    }

    pub fn count_nonzero(&self) -> usize {
        self.cells.iter().filter(|&&c| c != 0).count()
    }

    /// The mate: every cell negated. An involution.
    pub fn mate(&self) -> Self {
        Self {
            order: self.order,
            cells: self.cells.iter().map(|c| -c).collect(),
        }
    }

    /// Exact quarter-turn counterclockwise: `out[i][j] = in[j][N-1-i]`.
    pub fn rotate90(&self) -> Self {
        let n = self.order;
        Self::from_fn(n, |i, j| self.get(j, n - 1 - i)).expect("quarter turn preserves validity")
    }
}

/// Per-cell product of two equal-order matrices. Zero cells absorb.
pub fn elementwise_product(a: &PixelMatrix, b: &PixelMatrix) -> Result<PixelMatrix> {
    check_orders(a, b)?;
    let cells = a
        .cells
        .iter()
        .zip(&b.cells)
        .map(|(&x, &y)| x * y)
        .collect();
    PixelMatrix::new(a.order, cells)
}

/// Sum of the per-cell product divided by N^2 (always the full cell count,
/// even under partial overlap). -1 is maximal attraction, +1 maximal
/// repulsion, 0 agnosticism.
pub fn normalized_score(a: &PixelMatrix, b: &PixelMatrix) -> Result<f64> {
    check_orders(a, b)?;
    let sum: i64 = a
        .cells
        .iter()
        .zip(&b.cells)
        .map(|(&x, &y)| i64::from(x) * i64::from(y))
        .sum();
    Ok(sum as f64 / (a.order * a.order) as f64)
}

/// True iff `A * A^T == N * I`, i.e. all distinct row pairs are orthogonal.
/// The matrix must be binary.
pub fn is_hadamard(a: &PixelMatrix) -> Result<bool> {
    a.require_binary()?;
    let n = a.order;
    for r in 0..n {
        for s in (r + 1)..n {
            let dot: i32 = (0..n)
                .map(|j| i32::from(a.get(r, j)) * i32::from(a.get(s, j)))
                .sum();
            if dot != 0 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Sylvester construction: order 2^k, first row and column all +1, each
/// doubling placing the previous block in three quadrants and its negation
/// bottom-right.
pub fn sylvester(k: u32) -> Result<PixelMatrix> {
    let order = 1usize.checked_shl(k).unwrap_or(usize::MAX);
    if order > MAX_SYLVESTER_ORDER {
        return Err(Error::Capacity {
            what: "sylvester order",
            limit: MAX_SYLVESTER_ORDER,
            requested: order,
        });
    }
    let mut m = PixelMatrix::new(1, vec![1])?;
    for _ in 0..k {
        let n = m.order;
        m = PixelMatrix::from_fn(2 * n, |i, j| {
            let v = m.get(i % n, j % n);
            if i >= n && j >= n {
                -v
            } else {
                v
            }
        })?;
    }
    Ok(m)
}

/// All 2^(order^2) binary matrices in row-major bit-counter order: counter
/// bit `i*order + j` drives cell (i, j), bit 0 maps to -1 and bit 1 to +1.
pub fn enumerate_binary(order: usize) -> Result<impl Iterator<Item = PixelMatrix>> {
    let cells = order * order;
    if cells > MAX_ENUMERATION_CELLS {
        return Err(Error::Capacity {
            what: "enumeration cells",
            limit: MAX_ENUMERATION_CELLS,
            requested: cells,
        });
    }
    let total: u64 = 1 << cells;
    Ok((0..total).map(move |v| {
        PixelMatrix::from_fn(order, |i, j| {
            if v >> (i * order + j) & 1 == 1 {
                1
            } else {
                -1
            }
        })
        .expect("enumerated cells are trits")
    }))
}

/// All N! row-order permutations in lexicographic permutation order,
/// starting with the identity. Row permutations of a Hadamard matrix stay
/// Hadamard.
pub fn row_permutations(h: &PixelMatrix) -> Result<impl Iterator<Item = PixelMatrix> + '_> {
    use itertools::Itertools;
    h.require_binary()?;
    let n = h.order;
    Ok((0..n).permutations(n).map(move |perm| {
        PixelMatrix::from_fn(n, |i, j| h.get(perm[i], j)).expect("permutation preserves validity")
    }))
}

/// The candidate pool used for clique search: every row permutation of the
/// order-2^k Sylvester matrix, in lexicographic permutation order.
pub fn sylvester_permutation_pool(k: u32) -> Result<Vec<PixelMatrix>> {
    let h = sylvester(k)?;
    let pool = row_permutations(&h)?.collect();
    Ok(pool)
}

fn check_orders(a: &PixelMatrix, b: &PixelMatrix) -> Result<()> {
    if a.order != b.order {
        return Err(Error::DimensionMismatch {
            expected: a.order,
            got: b.order,
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Grid text format, shared repo-wide: first line `order N`, then N lines of
// N space-separated tokens from {-1, 0, 1}. Single spaces, `\n` line ends,
// no trailing whitespace. Any other token is rejected.
// ---------------------------------------------------------------------------

impl PixelMatrix {
    pub fn to_grid_string(&self) -> String {
        let mut out = format!("order {}\n", self.order);
        for i in 0..self.order {
            for j in 0..self.order {
                if j > 0 {
                    out.push(' ');
                }
                out.push_str(match self.get(i, j) {
                    1 => "1",
                    0 => "0",
                    _ => "-1",
                });
            }
            out.push('\n');
        }
        out
    }

    pub fn from_grid_str(text: &str) -> Result<Self> {
        let mut lines = text.split('\n');
        let header = lines.next().unwrap_or("");
        let order: usize = header
            .strip_prefix("order ")
            .and_then(|n| n.parse().ok())
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Parse {
                line: 1,
                msg: format!("expected `order N` header, got {header:?}"),
            })?;
        let mut cells = Vec::new();
        for i in 0..order {
            let line = lines.next().ok_or_else(|| Error::Parse {
                line: i + 2,
                msg: "missing row".into(),
            })?;
            let mut count = 0;
            for tok in line.split(' ') {
                cells.push(match tok {
                    "1" => 1,
                    "0" => 0,
                    "-1" => -1,
                    other => {
                        return Err(Error::Parse {
                            line: i + 2,
                            msg: format!("invalid token {other:?}"),
                        })
                    }
                });
                count += 1;
            }
            if count != order {
                return Err(Error::Parse {
                    line: i + 2,
                    msg: format!("expected {order} tokens, got {count}"),
                });
            }
        }
        match lines.next() {
            None | Some("") => {}
            Some(_) => {
                return Err(Error::Parse {
                    line: order + 2,
                    msg: "trailing content after last row".into(),
                })
            }
        }
        if lines.next().is_some() {
            return Err(Error::Parse {
                line: order + 3,
                msg: "trailing content after last row".into(),
            });
        }
        PixelMatrix::new(order, cells)
    }

    pub fn write_grid_file(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        Ok(std::fs::write(path, self.to_grid_string())?)
    }

    pub fn read_grid_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_grid_str(&std::fs::read_to_string(path)?)
    }
}
