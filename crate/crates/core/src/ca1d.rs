//! The one-dimensional "only one neighbour" automaton.
//!
//! A cell is alive at the next step iff exactly one of its two nearest
//! neighbours is alive now; its own state does not matter. Over GF(2) this is
//! `next(i) = x(i-1) ^ x(i+1)`, a linear map, so predecessors and stationary
//! configurations are solved with [`crate::gf2`] instead of by search.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::gf2::{BitMatrix, BitVec};
use crate::render::{Block, Glyph, Grid, WorksheetDoc};

/// Number of descendants asked for on a worksheet.
pub const WORKSHEET_DESCENDANTS: usize = 10;
/// Largest lattice a worksheet will draw.
pub const WORKSHEET_MAX_WIDTH: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CaError {
    #[error("a {0} lattice needs at least one cell")]
    EmptyLattice(&'static str),
    #[error("configurations live on different lattices")]
    LatticeMismatch,
    #[error("inverse dynamics need a cyclic or periodic boundary, got a zero-padded window")]
    UnsupportedBoundary,
    #[error("cannot parse configuration {input:?}: {reason}")]
    Parse { input: String, reason: String },
    #[error("worksheet size {size} out of range 1..={max}")]
    WorksheetSize { size: usize, max: usize },
}

/// How the stored cells extend to the whole line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Boundary {
    /// Finite window; every cell outside it is dead.
    ZeroPadded,
    /// A ring of `n` cells.
    Cyclic(usize),
    /// The bi-infinite repetition of a block of `p` cells.
    Periodic(usize),
}

impl Boundary {
    fn lattice_len(self) -> Option<usize> {
        match self {
            Boundary::ZeroPadded => None,
            Boundary::Cyclic(n) | Boundary::Periodic(n) => Some(n),
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Boundary::ZeroPadded => "fin",
            Boundary::Cyclic(_) => "cyc",
            Boundary::Periodic(_) => "per",
        }
    }

    fn rebuild(self, cells: Vec<bool>) -> Configuration {
        match self {
            Boundary::ZeroPadded => Configuration::finite(0, cells),
            Boundary::Cyclic(_) => Configuration {
                boundary: Boundary::Cyclic(cells.len()),
                cells,
                origin: 0,
            },
            Boundary::Periodic(_) => Configuration {
                boundary: Boundary::Periodic(cells.len()),
                cells,
                origin: 0,
            },
        }
    }
}

/// A state of the automaton.
///
/// Zero-padded windows are kept trimmed (first and last stored cells alive),
/// so the derived equality compares supports.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    boundary: Boundary,
    origin: i64,
    cells: Vec<bool>,
}

impl Configuration {
    /// A finite configuration whose first stored cell sits at `origin`.
    pub fn finite(origin: i64, cells: Vec<bool>) -> Self {
        let Some(first) = cells.iter().position(|&b| b) else {
            return Self::empty();
        };
        let last = cells.iter().rposition(|&b| b).expect("nonempty support");
        Self {
            boundary: Boundary::ZeroPadded,
            origin: origin + first as i64,
            cells: cells[first..=last].to_vec(),
        }
    }

    /// The finite configuration alive exactly at the given indices.
    pub fn from_support(alive: &[i64]) -> Self {
        let (Some(&lo), Some(&hi)) = (alive.iter().min(), alive.iter().max()) else {
            return Self::empty();
        };
        let mut cells = vec![false; (hi - lo + 1) as usize];
        for &i in alive {
            cells[(i - lo) as usize] = true;
        }
        Self::finite(lo, cells)
    }

    pub fn empty() -> Self {
        Self {
            boundary: Boundary::ZeroPadded,
            origin: 0,
            cells: Vec::new(),
        }
    }

    pub fn cyclic(cells: Vec<bool>) -> Result<Self, CaError> {
        if cells.is_empty() {
            return Err(CaError::EmptyLattice("cyclic"));
        }
        Ok(Self {
            boundary: Boundary::Cyclic(cells.len()),
            origin: 0,
            cells,
        })
    }

    pub fn periodic(cells: Vec<bool>) -> Result<Self, CaError> {
        if cells.is_empty() {
            return Err(CaError::EmptyLattice("periodic"));
        }
        Ok(Self {
            boundary: Boundary::Periodic(cells.len()),
            origin: 0,
            cells,
        })
    }

    /// The all-dead configuration on the given lattice.
    pub fn zero(boundary: Boundary) -> Result<Self, CaError> {
        match boundary {
            Boundary::ZeroPadded => Ok(Self::empty()),
            Boundary::Cyclic(n) => Self::cyclic(vec![false; n]),
            Boundary::Periodic(p) => Self::periodic(vec![false; p]),
        }
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    /// Index of the first stored cell (always 0 on cyclic/periodic lattices).
    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn is_zero(&self) -> bool {
        self.cells.iter().all(|&b| !b)
    }

    /// State of cell `i`; indices wrap on cyclic and periodic lattices.
    pub fn cell(&self, i: i64) -> bool {
        match self.boundary {
            Boundary::ZeroPadded => {
                let k = i - self.origin;
                k >= 0 && (k as usize) < self.cells.len() && self.cells[k as usize]
            }
            Boundary::Cyclic(n) | Boundary::Periodic(n) => {
                self.cells[i.rem_euclid(n as i64) as usize]
            }
        }
    }

    /// Indices of alive cells (within one period on wrapped lattices).
    pub fn support(&self) -> Vec<i64> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(k, _)| self.origin + k as i64)
            .collect()
    }

    /// Cellwise XOR of two configurations on the same lattice.
    pub fn xor(&self, other: &Self) -> Result<Self, CaError> {
        match (self.boundary, other.boundary) {
            (Boundary::ZeroPadded, Boundary::ZeroPadded) => {
                if self.cells.is_empty() {
                    return Ok(other.clone());
                }
                if other.cells.is_empty() {
                    return Ok(self.clone());
                }
                let lo = self.origin.min(other.origin);
                let hi = (self.origin + self.cells.len() as i64)
                    .max(other.origin + other.cells.len() as i64);
                let cells = (lo..hi).map(|i| self.cell(i) ^ other.cell(i)).collect();
                Ok(Self::finite(lo, cells))
            }
            (a, b) if a == b => {
                let cells = self
                    .cells
                    .iter()
                    .zip(&other.cells)
                    .map(|(x, y)| x ^ y)
                    .collect();
                Ok(a.rebuild(cells))
            }
            _ => Err(CaError::LatticeMismatch),
        }
    }

    /// Shifts the pattern `k` cells to the right.
    pub fn rotate(&self, k: i64) -> Self {
        match self.boundary {
            Boundary::ZeroPadded => Self {
                origin: self.origin + k,
                ..self.clone()
            },
            Boundary::Cyclic(n) | Boundary::Periodic(n) => {
                let cells = (0..n as i64).map(|i| self.cell(i - k)).collect();
                self.boundary.rebuild(cells)
            }
        }
    }

    fn to_bitvec(&self) -> BitVec {
        BitVec::from_bools(&self.cells)
    }
}

impl fmt::Display for Configuration {
    /// `cyc:0101`, `per:110`, `fin:00100`; a finite window whose first stored
    /// cell is not at index 0 carries an `@origin` suffix.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.boundary.tag())?;
        if self.cells.is_empty() {
            return f.write_str("0");
        }
        for &b in &self.cells {
            f.write_str(if b { "1" } else { "0" })?;
        }
        if self.boundary == Boundary::ZeroPadded && self.origin != 0 {
            write!(f, "@{}", self.origin)?;
        }
        Ok(())
    }
}

impl FromStr for Configuration {
    type Err = CaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let fail = |reason: &str| CaError::Parse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let (tag, rest) = s.trim().split_once(':').ok_or_else(|| fail("missing boundary tag"))?;
        let (bits, origin) = match rest.split_once('@') {
            Some((bits, o)) if tag == "fin" => {
                (bits, o.parse::<i64>().map_err(|_| fail("bad origin after '@'"))?)
            }
            Some(_) => return Err(fail("only fin: configurations take an origin")),
            None => (rest, 0),
        };
        let cells = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(fail("cells must be '0' or '1'")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        match tag {
            "fin" => Ok(Self::finite(origin, cells)),
            "cyc" => Self::cyclic(cells),
            "per" => Self::periodic(cells),
            _ => Err(fail("boundary tag must be fin, cyc or per")),
        }
    }
}

/// One step of the dynamics.
pub fn step(c: &Configuration) -> Configuration {
    match c.boundary {
        Boundary::ZeroPadded => {
            if c.cells.is_empty() {
                return c.clone();
            }
            let lo = c.origin - 1;
            let hi = c.origin + c.cells.len() as i64 + 1;
            let cells = (lo..hi).map(|i| c.cell(i - 1) ^ c.cell(i + 1)).collect();
            Configuration::finite(lo, cells)
        }
        Boundary::Cyclic(n) | Boundary::Periodic(n) => {
            let cells = (0..n as i64).map(|i| c.cell(i - 1) ^ c.cell(i + 1)).collect();
            c.boundary.rebuild(cells)
        }
    }
}

/// The next `t` configurations, `step^1(c) ..= step^t(c)`.
pub fn evolve(c: &Configuration, t: usize) -> Vec<Configuration> {
    let mut out = Vec::with_capacity(t);
    let mut cur = c.clone();
    for _ in 0..t {
        cur = step(&cur);
        out.push(cur.clone());
    }
    out
}

/// The step map of a ring of `n` cells as a GF(2) matrix.
pub fn step_matrix(n: usize) -> BitMatrix {
    let mut m = BitMatrix::zeros(n, n);
    for i in 0..n {
        // toggle, so that n = 1 and n = 2 cancel the doubled neighbour
        m.toggle(i, (i + n - 1) % n);
        m.toggle(i, (i + 1) % n);
    }
    m
}

fn lattice_of(boundary: Boundary) -> Result<usize, CaError> {
    boundary.lattice_len().ok_or(CaError::UnsupportedBoundary)
}

fn solutions(boundary: Boundary, m: &BitMatrix, rhs: &BitVec) -> BTreeSet<Configuration> {
    match m.solve(rhs) {
        None => BTreeSet::new(),
        Some(sol) => sol.iter().map(|v| boundary.rebuild(v.to_bools())).collect(),
    }
}

/// Every `x` with `step(x) == c`. Empty when `c` has no ancestor.
pub fn predecessors(c: &Configuration) -> Result<BTreeSet<Configuration>, CaError> {
    let n = lattice_of(c.boundary)?;
    Ok(solutions(c.boundary, &step_matrix(n), &c.to_bitvec()))
}

/// Predecessors of the all-dead configuration: the kernel of the step map.
pub fn ancestors_of_empty(boundary: Boundary) -> Result<BTreeSet<Configuration>, CaError> {
    let zero = Configuration::zero(boundary)?;
    predecessors(&zero)
}

/// Stationary configurations, `step(x) == x`.
pub fn fixed_points(boundary: Boundary) -> Result<BTreeSet<Configuration>, CaError> {
    let n = lattice_of(boundary)?;
    if n == 0 {
        return Err(CaError::EmptyLattice("cyclic"));
    }
    let m = step_matrix(n).add(&BitMatrix::identity(n));
    Ok(solutions(boundary, &m, &BitVec::zeros(n)))
}

/// Which exercise a CA worksheet poses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WorksheetKind {
    Descendants,
    Ancestor,
    FixedPoint,
}

impl FromStr for WorksheetKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "descendants" => Ok(Self::Descendants),
            "ancestor" => Ok(Self::Ancestor),
            "fixed-point" => Ok(Self::FixedPoint),
            other => Err(format!(
                "unknown worksheet kind {other:?} (expected descendants, ancestor or fixed-point)"
            )),
        }
    }
}

fn glyph(alive: bool) -> Glyph {
    if alive {
        Glyph::Alive
    } else {
        Glyph::Dead
    }
}

fn row_of(c: &Configuration, lo: i64, width: usize) -> Vec<Glyph> {
    (0..width as i64).map(|k| glyph(c.cell(lo + k))).collect()
}

/// Largest pattern width accepted for `kind`.
pub fn worksheet_max_size(kind: WorksheetKind) -> usize {
    match kind {
        // the pattern can spread by one cell per side per step
        WorksheetKind::Descendants => WORKSHEET_MAX_WIDTH - 2 * WORKSHEET_DESCENDANTS,
        WorksheetKind::Ancestor | WorksheetKind::FixedPoint => WORKSHEET_MAX_WIDTH,
    }
}

/// Builds a printable exercise; the same `(seed, kind, size)` always yields
/// the same document.
pub fn ca_worksheet(seed: u64, kind: WorksheetKind, size: usize) -> Result<WorksheetDoc, CaError> {
    let max = worksheet_max_size(kind);
    if size == 0 || size > max {
        return Err(CaError::WorksheetSize { size, max });
    }
    let mut rng = crate::seeded_rng(seed);
    let mut random_cells = |n: usize| -> Vec<bool> { (0..n).map(|_| rng.gen_bool(0.5)).collect() };
    let doc = match kind {
        WorksheetKind::Descendants => {
            let mut cells = random_cells(size);
            cells[0] = true;
            let start = Configuration::finite(0, cells);
            let pad = WORKSHEET_DESCENDANTS as i64;
            let width = size + 2 * WORKSHEET_DESCENDANTS;
            let mut question = Grid::filled(WORKSHEET_DESCENDANTS + 1, width, Glyph::Blank)
                .expect("nonzero dims");
            question.set_row(0, &row_of(&start, -pad, width));
            let mut answer = Grid::filled(WORKSHEET_DESCENDANTS + 1, width, Glyph::Dead)
                .expect("nonzero dims");
            answer.set_row(0, &row_of(&start, -pad, width));
            for (r, c) in evolve(&start, WORKSHEET_DESCENDANTS).iter().enumerate() {
                answer.set_row(r + 1, &row_of(c, -pad, width));
            }
            let mut doc = WorksheetDoc::new("Continue the configuration until the 10th descendant");
            doc.push(Block::Caption(format!(
                "A cell is alive in the next row iff exactly one of its two neighbours is alive. Start: {start}"
            )));
            doc.push(Block::Grid(question));
            let key = doc.push(Block::Grid(answer));
            doc.push(Block::AnswerKey(key));
            doc
        }
        WorksheetKind::Ancestor => {
            let hidden = Configuration::cyclic(random_cells(size))?;
            let target = step(&hidden);
            let mut question = Grid::filled(2, size, Glyph::Blank).expect("nonzero dims");
            question.set_row(1, &row_of(&target, 0, size));
            let all = predecessors(&target)?;
            let mut doc = WorksheetDoc::new("Find an ancestor of the configuration");
            doc.push(Block::Caption(format!(
                "The row wraps around: the first and last cells are neighbours. Fill the top row so that its descendant is the bottom row ({target})."
            )));
            doc.push(Block::Grid(question));
            let mut answer = Grid::filled(1, size, Glyph::Dead).expect("nonzero dims");
            answer.set_row(0, &row_of(&hidden, 0, size));
            let key_grid = doc.push(Block::Grid(answer));
            let key_table = doc.push(Block::Table(
                std::iter::once(vec!["all ancestors".to_string()])
                    .chain(all.iter().map(|c| vec![c.to_string()]))
                    .collect(),
            ));
            doc.push(Block::AnswerKey(key_grid));
            doc.push(Block::AnswerKey(key_table));
            doc
        }
        WorksheetKind::FixedPoint => {
            let boundary = Boundary::Periodic(size);
            let points: Vec<_> = fixed_points(boundary)?.into_iter().collect();
            let nonzero: Vec<_> = points.iter().filter(|c| !c.is_zero()).collect();
            let chosen = if nonzero.is_empty() {
                Configuration::zero(boundary)?
            } else {
                nonzero[rng.gen_range(0..nonzero.len())].clone()
            };
            let mut question = Grid::filled(1, size, Glyph::Blank).expect("nonzero dims");
            let given = size.min(2);
            for k in 0..given {
                question.set(0, k, glyph(chosen.cell(k as i64)));
            }
            let mut doc = WorksheetDoc::new("Complete the stationary configuration");
            doc.push(Block::Caption(format!(
                "The row repeats forever with period {size}. Fill the blanks so that the configuration never changes."
            )));
            doc.push(Block::Grid(question));
            let mut answer = Grid::filled(1, size, Glyph::Dead).expect("nonzero dims");
            answer.set_row(0, &row_of(&chosen, 0, size));
            let key = doc.push(Block::Grid(answer));
            doc.push(Block::AnswerKey(key));
            doc
        }
    };
    Ok(doc)
}
