//! Dense linear algebra over the two-element field.
//!
//! Vectors pack bits into `u64` words; bit `i` lives in word `i / 64` at
//! position `i % 64`. Matrices are stored row-major as a list of vectors.

use std::fmt;

/// A vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range (len={})", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range (len={})", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "length mismatch in dot");
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones % 2 == 1
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.len)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect();
        write!(f, "BitVec({s})")
    }
}

/// A matrix over GF(2) with `rows` equations in `cols` unknowns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    rows: Vec<BitVec>,
    cols: usize,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows: (0..rows).map(|_| BitVec::zeros(cols)).collect(),
            cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value);
    }

    pub fn toggle(&mut self, r: usize, c: usize) {
        let v = self.get(r, c);
        self.set(r, c, !v);
    }

    pub fn row(&self, r: usize) -> &BitVec {
        &self.rows[r]
    }

    pub fn mul_vec(&self, x: &BitVec) -> BitVec {
        assert_eq!(x.len(), self.cols, "dimension mismatch in mul_vec");
        let mut out = BitVec::zeros(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            if row.dot(x) {
                out.set(i, true);
            }
        }
        out
    }

    pub fn add(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.nrows(), other.nrows());
        assert_eq!(self.cols, other.cols);
        let mut out = self.clone();
        for (a, b) in out.rows.iter_mut().zip(&other.rows) {
            a.xor_assign(b);
        }
        out
    }

    pub fn rank(&self) -> usize {
        self.echelon(None).pivots.len()
    }

    /// Basis of `{x : A x = 0}`.
    pub fn kernel_basis(&self) -> Vec<BitVec> {
        let ech = self.echelon(None);
        kernel_from_echelon(&ech, self.cols)
    }

    /// Solves `A x = b`; `None` when the system is inconsistent.
    pub fn solve(&self, rhs: &BitVec) -> Option<AffineSolution> {
        assert_eq!(rhs.len(), self.nrows(), "rhs length mismatch");
        let ech = self.echelon(Some(rhs));
        let image = ech.rhs.as_ref().expect("rhs tracked");
        // Rows below the pivot rows are all-zero on the left; their rhs must vanish.
        for r in ech.pivots.len()..ech.rows.len() {
            if image.get(r) {
                return None;
            }
        }
        let mut particular = BitVec::zeros(self.cols);
        for (r, &c) in ech.pivots.iter().enumerate() {
            if image.get(r) {
                particular.set(c, true);
            }
        }
        Some(AffineSolution {
            particular,
            kernel: kernel_from_echelon(&ech, self.cols),
        })
    }

    /// Reduced row echelon form, optionally carrying a right-hand side.
    fn echelon(&self, rhs: Option<&BitVec>) -> Echelon {
        let mut rows = self.rows.clone();
        let mut rhs = rhs.cloned();
        let mut pivots = Vec::new();
        let mut next = 0;
        for col in 0..self.cols {
            let Some(found) = (next..rows.len()).find(|&r| rows[r].get(col)) else {
                continue;
            };
            rows.swap(next, found);
            if let Some(b) = rhs.as_mut() {
                let (x, y) = (b.get(next), b.get(found));
                b.set(next, y);
                b.set(found, x);
            }
            let pivot_row = rows[next].clone();
            let pivot_bit = rhs.as_ref().map(|b| b.get(next));
            for r in 0..rows.len() {
                if r != next && rows[r].get(col) {
                    rows[r].xor_assign(&pivot_row);
                    if let (Some(b), Some(pb)) = (rhs.as_mut(), pivot_bit) {
                        let v = b.get(r) ^ pb;
                        b.set(r, v);
                    }
                }
            }
            pivots.push(col);
            next += 1;
            if next == rows.len() {
                break;
            }
        }
        Echelon { rows, rhs, pivots }
    }
}

struct Echelon {
    rows: Vec<BitVec>,
    rhs: Option<BitVec>,
    pivots: Vec<usize>,
}

fn kernel_from_echelon(ech: &Echelon, cols: usize) -> Vec<BitVec> {
    let mut is_pivot = vec![false; cols];
    for &c in &ech.pivots {
        is_pivot[c] = true;
    }
    let mut basis = Vec::new();
    for free in (0..cols).filter(|&c| !is_pivot[c]) {
        let mut v = BitVec::zeros(cols);
        v.set(free, true);
        for (r, &c) in ech.pivots.iter().enumerate() {
            if ech.rows[r].get(free) {
                v.set(c, true);
            }
        }
        basis.push(v);
    }
    basis
}

/// The solution set `particular + span(kernel)` of an affine system.
#[derive(Clone, Debug)]
pub struct AffineSolution {
    pub particular: BitVec,
    pub kernel: Vec<BitVec>,
}

impl AffineSolution {
    pub fn dimension(&self) -> usize {
        self.kernel.len()
    }

    /// Enumerates every solution. Callers must keep the kernel small; the
    /// count is `2^dimension`.
    pub fn iter(&self) -> impl Iterator<Item = BitVec> + '_ {
        assert!(self.kernel.len() < 32, "solution space too large to enumerate");
        (0u64..(1u64 << self.kernel.len())).map(move |mask| {
            let mut v = self.particular.clone();
            for (i, k) in self.kernel.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    v.xor_assign(k);
                }
            }
            v
        })
    }
}
