//! Dense bit-packed matrices over GF(2).

use std::fmt;

const WORD: usize = 64;

/// A row operation performed during elimination.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowOp {
    Swap(usize, usize),
    /// `row[dst] ^= row[src]`
    Xor { src: usize, dst: usize },
}

#[derive(Clone, PartialEq, Eq)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(WORD);
        BinaryMatrix {
            rows,
            cols,
            words_per_row,
            bits: vec![0; rows * words_per_row],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged rows");
            for (j, &b) in row.iter().enumerate() {
                m.set(i, j, b != 0);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    fn row_words(&self, r: usize) -> &[u64] {
        &self.bits[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        (self.bits[r * self.words_per_row + c / WORD] >> (c % WORD)) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        debug_assert!(r < self.rows && c < self.cols);
        let w = &mut self.bits[r * self.words_per_row + c / WORD];
        let mask = 1u64 << (c % WORD);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    /// `row[dst] ^= row[src]`.
    pub fn xor_row(&mut self, src: usize, dst: usize) {
        if src == dst {
            self.bits[dst * self.words_per_row..(dst + 1) * self.words_per_row].fill(0);
            return;
        }
        let w = self.words_per_row;
        let (s, d) = if src < dst {
            let (lo, hi) = self.bits.split_at_mut(dst * w);
            (&lo[src * w..(src + 1) * w], &mut hi[..w])
        } else {
            let (lo, hi) = self.bits.split_at_mut(src * w);
            (&hi[..w], &mut lo[dst * w..(dst + 1) * w])
        };
        for (d, s) in d.iter_mut().zip(s) {
            *d ^= s;
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let w = self.words_per_row;
        for i in 0..w {
            self.bits.swap(a * w + i, b * w + i);
        }
    }

    pub fn row_is_zero(&self, r: usize) -> bool {
        self.row_words(r).iter().all(|&w| w == 0)
    }

    /// Copy of the block `[r0, r1) x [c0, c1)`.
    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> BinaryMatrix {
        let mut out = BinaryMatrix::zeros(r1 - r0, c1 - c0);
        for r in r0..r1 {
            for c in c0..c1 {
                if self.get(r, c) {
                    out.set(r - r0, c - c0, true);
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.eliminate(|_| {})
    }

    /// Gauss-Jordan elimination with partial pivoting by column. Every row
    /// operation is reported through `on_op` so a right-hand side can follow
    /// along. Returns the rank; afterwards the first `rank` rows are in
    /// reduced row echelon form.
    pub fn eliminate(&mut self, mut on_op: impl FnMut(RowOp)) -> usize {
        let mut rank = 0;
        for c in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let Some(p) = (rank..self.rows).find(|&r| self.get(r, c)) else {
                continue;
            };
            if p != rank {
                self.swap_rows(rank, p);
                on_op(RowOp::Swap(rank, p));
            }
            for r in 0..self.rows {
                if r != rank && self.get(r, c) {
                    self.xor_row(rank, r);
                    on_op(RowOp::Xor { src: rank, dst: r });
                }
            }
            rank += 1;
        }
        rank
    }
}

impl fmt::Debug for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            for c in 0..self.cols {
                f.write_str(if self.get(r, c) { "1" } else { "." })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
