//! Paper minesweeper on a chessboard-coloured `m x n` table.
//!
//! Cell `(i, j)` (0-indexed) is black iff `i + j` is even. Mines sit on black
//! cells only; every white cell shows how many of its orthogonal neighbours,
//! all of them black, carry a mine. When `m + 1` and `n + 1` are coprime the
//! clue map is injective, so a generated table has exactly one solution.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::render::{Block, Glyph, Grid, WorksheetDoc};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MinesError {
    #[error("board dimensions must be positive, got {m}x{n}")]
    EmptyBoard { m: usize, n: usize },
    #[error("mine probability {0} is outside [0, 1]")]
    BadProbability(f64),
    #[error("clue {clue} at ({row}, {col}) exceeds its {neighbours} black neighbours")]
    ClueOutOfRange {
        row: usize,
        col: usize,
        clue: u8,
        neighbours: u8,
    },
    #[error("expected {expected} values, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("the clues admit no mine layout")]
    NoSolution,
    #[error("gcd({}, {}) != 1: a {m}x{n} table may have several solutions", m + 1, n + 1)]
    NonCoprimeDims { m: usize, n: usize },
    #[error("cannot parse board: {0}")]
    Parse(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct BoardDims {
    pub m: usize,
    pub n: usize,
}

impl BoardDims {
    pub fn new(m: usize, n: usize) -> Result<Self, MinesError> {
        if m == 0 || n == 0 {
            return Err(MinesError::EmptyBoard { m, n });
        }
        Ok(Self { m, n })
    }

    pub fn is_black(&self, row: usize, col: usize) -> bool {
        (row + col) % 2 == 0
    }

    /// Black cells in row-major order; this order indexes [`MineLayout`].
    pub fn black_cells(&self) -> Vec<(usize, usize)> {
        self.cells().filter(|&(r, c)| self.is_black(r, c)).collect()
    }

    /// White cells in row-major order; this order indexes [`ClueBoard`].
    pub fn white_cells(&self) -> Vec<(usize, usize)> {
        self.cells().filter(|&(r, c)| !self.is_black(r, c)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self { m: self.n, n: self.m }
    }

    fn cells(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.n;
        (0..self.m).flat_map(move |r| (0..n).map(move |c| (r, c)))
    }

    /// In-board orthogonal neighbours.
    pub fn neighbours(&self, row: usize, col: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(4);
        if row > 0 {
            out.push((row - 1, col));
        }
        if row + 1 < self.m {
            out.push((row + 1, col));
        }
        if col > 0 {
            out.push((row, col - 1));
        }
        if col + 1 < self.n {
            out.push((row, col + 1));
        }
        out
    }

    /// Number of black cells strictly before `(row, col)` in row-major order.
    fn black_before(&self, row: usize, col: usize) -> usize {
        let rows: usize = (0..row).map(|r| self.n.div_ceil(2) - (r % 2) * (self.n % 2)).sum();
        let first = row % 2;
        rows + if col > first { (col - first).div_ceil(2) } else { 0 }
    }

    fn black_index(&self, row: usize, col: usize) -> usize {
        self.black_before(row, col)
    }

    fn white_index(&self, row: usize, col: usize) -> usize {
        row * self.n + col - self.black_before(row, col)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The uniqueness hypothesis: `gcd(m + 1, n + 1) == 1`.
pub fn coprime_dims(dims: BoardDims) -> bool {
    gcd(dims.m + 1, dims.n + 1) == 1
}

/// A 0/1 mine assignment on the black cells.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MineLayout {
    dims: BoardDims,
    mines: Vec<bool>,
}

impl MineLayout {
    pub fn new(dims: BoardDims, mines: Vec<bool>) -> Result<Self, MinesError> {
        let expected = dims.black_cells().len();
        if mines.len() != expected {
            return Err(MinesError::WrongLength {
                expected,
                got: mines.len(),
            });
        }
        Ok(Self { dims, mines })
    }

    pub fn empty(dims: BoardDims) -> Self {
        let k = dims.black_cells().len();
        Self {
            dims,
            mines: vec![false; k],
        }
    }

    pub fn dims(&self) -> BoardDims {
        self.dims
    }

    pub fn mines(&self) -> &[bool] {
        &self.mines
    }

    pub fn mine_count(&self) -> usize {
        self.mines.iter().filter(|&&b| b).count()
    }

    /// Whether `(row, col)` holds a mine; white cells never do.
    pub fn is_mine(&self, row: usize, col: usize) -> bool {
        self.dims.is_black(row, col) && self.mines[self.dims.black_index(row, col)]
    }

    /// The board in solution form: `*`/`.` on black cells, clues on white.
    pub fn to_board_string(&self) -> String {
        let clues = clues_of(self);
        let mut out = String::new();
        for r in 0..self.dims.m {
            for c in 0..self.dims.n {
                out.push(if self.dims.is_black(r, c) {
                    if self.is_mine(r, c) {
                        '*'
                    } else {
                        '.'
                    }
                } else {
                    char::from(b'0' + clues.clue(r, c))
                });
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_board(text: &str) -> Result<Self, MinesError> {
        let rows = board_rows(text)?;
        let dims = BoardDims::new(rows.len(), rows[0].len())?;
        let mut mines = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            for (c, &ch) in row.iter().enumerate() {
                match (dims.is_black(r, c), ch) {
                    (true, '*') => mines.push(true),
                    (true, '.') => mines.push(false),
                    (false, d) if d.is_ascii_digit() => {}
                    _ => {
                        return Err(MinesError::Parse(format!(
                            "unexpected {ch:?} at ({r}, {c}) in a solution board"
                        )))
                    }
                }
            }
        }
        let layout = Self::new(dims, mines)?;
        // the printed clues must agree with the mines
        let board = ClueBoard::parse_board(&text.replace(['*', '.'], "#"))?;
        if board != clues_of(&layout) {
            return Err(MinesError::Parse("clues do not match the mines".into()));
        }
        Ok(layout)
    }
}

/// Clue numbers on the white cells.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ClueBoard {
    dims: BoardDims,
    clues: Vec<u8>,
}

impl ClueBoard {
    pub fn new(dims: BoardDims, clues: Vec<u8>) -> Result<Self, MinesError> {
        let whites = dims.white_cells();
        if clues.len() != whites.len() {
            return Err(MinesError::WrongLength {
                expected: whites.len(),
                got: clues.len(),
            });
        }
        for (&(row, col), &clue) in whites.iter().zip(&clues) {
            let neighbours = dims.neighbours(row, col).len() as u8;
            if clue > neighbours {
                return Err(MinesError::ClueOutOfRange {
                    row,
                    col,
                    clue,
                    neighbours,
                });
            }
        }
        Ok(Self { dims, clues })
    }

    pub fn dims(&self) -> BoardDims {
        self.dims
    }

    pub fn clues(&self) -> &[u8] {
        &self.clues
    }

    /// Clue of white cell `(row, col)`.
    pub fn clue(&self, row: usize, col: usize) -> u8 {
        assert!(!self.dims.is_black(row, col), "({row}, {col}) is black");
        self.clues[self.dims.white_index(row, col)]
    }

    /// The puzzle form: `#` on black cells, clues on white.
    pub fn to_board_string(&self) -> String {
        let mut out = String::new();
        for r in 0..self.dims.m {
            for c in 0..self.dims.n {
                out.push(if self.dims.is_black(r, c) {
                    '#'
                } else {
                    char::from(b'0' + self.clue(r, c))
                });
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_board(text: &str) -> Result<Self, MinesError> {
        let rows = board_rows(text)?;
        let dims = BoardDims::new(rows.len(), rows[0].len())?;
        let mut clues = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            for (c, &ch) in row.iter().enumerate() {
                match (dims.is_black(r, c), ch) {
                    (true, '#') => {}
                    (false, d) if d.is_ascii_digit() => clues.push(d as u8 - b'0'),
                    _ => {
                        return Err(MinesError::Parse(format!(
                            "unexpected {ch:?} at ({r}, {c}) in a puzzle board"
                        )))
                    }
                }
            }
        }
        Self::new(dims, clues)
    }
}

impl fmt::Display for ClueBoard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_board_string())
    }
}

impl FromStr for ClueBoard {
    type Err = MinesError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse_board(s)
    }
}

fn board_rows(text: &str) -> Result<Vec<Vec<char>>, MinesError> {
    let rows: Vec<Vec<char>> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| l.chars().collect())
        .collect();
    let Some(first) = rows.first() else {
        return Err(MinesError::Parse("empty board".into()));
    };
    if rows.iter().any(|r| r.len() != first.len()) {
        return Err(MinesError::Parse("rows differ in length".into()));
    }
    Ok(rows)
}

/// The clue each white cell shows for `layout`.
pub fn clues_of(layout: &MineLayout) -> ClueBoard {
    let dims = layout.dims;
    let clues = dims
        .white_cells()
        .into_iter()
        .map(|(r, c)| {
            dims.neighbours(r, c)
                .into_iter()
                .filter(|&(nr, nc)| layout.is_mine(nr, nc))
                .count() as u8
        })
        .collect();
    ClueBoard { dims, clues }
}

/// Parameters of the table generator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenSpec {
    pub dims: BoardDims,
    /// Probability that a black cell gets a mine.
    pub p: f64,
    pub seed: u64,
}

pub const DEFAULT_PROBABILITY: f64 = 0.5;

/// One Bernoulli trial per black cell (row-major), then the clues.
pub fn generate(spec: &GenSpec) -> Result<(MineLayout, ClueBoard), MinesError> {
    if !(0.0..=1.0).contains(&spec.p) {
        return Err(MinesError::BadProbability(spec.p));
    }
    let mut rng = crate::seeded_rng(spec.seed);
    let k = spec.dims.black_cells().len();
    let mines = (0..k).map(|_| rng.gen_bool(spec.p)).collect();
    let layout = MineLayout {
        dims: spec.dims,
        mines,
    };
    let clues = clues_of(&layout);
    Ok((layout, clues))
}

/// Rows are white cells, columns black cells, entries 1 where adjacent.
fn clue_matrix(dims: BoardDims) -> Vec<Vec<u8>> {
    let whites = dims.white_cells();
    let k = dims.black_cells().len();
    whites
        .iter()
        .map(|&(r, c)| {
            let mut row = vec![0u8; k];
            for (nr, nc) in dims.neighbours(r, c) {
                row[dims.black_index(nr, nc)] = 1;
            }
            row
        })
        .collect()
}

/// Gauss-Jordan over the rationals. Returns the rank and, when `rhs` is
/// given and the system is consistent with full column rank, its solution.
fn rational_eliminate(
    matrix: &[Vec<u8>],
    cols: usize,
    rhs: Option<&[u8]>,
) -> (usize, Option<Vec<BigRational>>, bool) {
    let to_q = |v: u8| BigRational::from_integer(i64::from(v).into());
    let mut rows: Vec<Vec<BigRational>> = matrix
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row: Vec<BigRational> = r.iter().map(|&v| to_q(v)).collect();
            row.push(rhs.map_or_else(BigRational::zero, |b| to_q(b[i])));
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut next = 0;
    for col in 0..cols {
        let Some(found) = (next..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(next, found);
        let inv = BigRational::one() / rows[next][col].clone();
        for v in rows[next].iter_mut() {
            *v = &*v * &inv;
        }
        let pivot = rows[next].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != next && !row[col].is_zero() {
                let factor = row[col].clone();
                for (v, p) in row.iter_mut().zip(&pivot) {
                    *v = &*v - &factor * p;
                }
            }
        }
        pivots.push(col);
        next += 1;
        if next == rows.len() {
            break;
        }
    }
    let rank = pivots.len();
    let consistent = rows[rank..].iter().all(|r| r[cols].is_zero());
    let solution = (rhs.is_some() && consistent && rank == cols).then(|| {
        let mut x = vec![BigRational::zero(); cols];
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = rows[r][cols].clone();
        }
        x
    });
    (rank, solution, consistent)
}

/// Rank of the clue map over the rationals and the number of black cells.
/// Full rank means the clue map is injective on real vectors.
pub fn clue_map_rank(dims: BoardDims) -> (usize, usize) {
    let k = dims.black_cells().len();
    let m = clue_matrix(dims);
    if m.is_empty() {
        return (0, k);
    }
    (rational_eliminate(&m, k, None).0, k)
}

struct Search<'a> {
    constraints: &'a [(Vec<usize>, u8)],
    by_var: Vec<Vec<usize>>,
    cap: usize,
    found: Vec<Vec<bool>>,
}

impl Search<'_> {
    /// Fixes forced variables; `false` on contradiction.
    fn propagate(&self, assign: &mut [Option<bool>]) -> bool {
        let mut changed = true;
        while changed {
            changed = false;
            for (vars, clue) in self.constraints {
                let clue = usize::from(*clue);
                let mines = vars.iter().filter(|&&v| assign[v] == Some(true)).count();
                let open: Vec<usize> = vars.iter().copied().filter(|&v| assign[v].is_none()).collect();
                if mines > clue || mines + open.len() < clue {
                    return false;
                }
                if open.is_empty() {
                    continue;
                }
                let value = if mines == clue {
                    false
                } else if mines + open.len() == clue {
                    true
                } else {
                    continue;
                };
                for v in open {
                    assign[v] = Some(value);
                }
                changed = true;
            }
        }
        true
    }

    fn dfs(&mut self, mut assign: Vec<Option<bool>>) {
        if self.found.len() >= self.cap || !self.propagate(&mut assign) {
            return;
        }
        // prefer a variable that appears in some constraint
        let next = assign
            .iter()
            .enumerate()
            .filter(|(_, a)| a.is_none())
            .max_by_key(|(v, _)| (self.by_var[*v].len(), std::cmp::Reverse(*v)))
            .map(|(v, _)| v);
        match next {
            None => self.found.push(assign.iter().map(|a| a.expect("assigned")).collect()),
            Some(v) => {
                for value in [false, true] {
                    let mut branch = assign.clone();
                    branch[v] = Some(value);
                    self.dfs(branch);
                }
            }
        }
    }
}

/// Up to `cap` mine layouts whose clues equal `clues`; exhaustive whenever
/// fewer than `cap` are returned.
pub fn solve(clues: &ClueBoard, cap: usize) -> Vec<MineLayout> {
    let dims = clues.dims;
    let k = dims.black_cells().len();
    if cap == 0 {
        return Vec::new();
    }
    let matrix = clue_matrix(dims);
    if !matrix.is_empty() {
        // Injective clue map: the rational solution is the only candidate.
        let (rank, solution, consistent) = rational_eliminate(&matrix, k, Some(&clues.clues));
        if rank == k {
            if !consistent {
                return Vec::new();
            }
            let x = solution.expect("full rank and consistent");
            let bits: Option<Vec<bool>> = x
                .iter()
                .map(|q| {
                    if q.is_zero() {
                        Some(false)
                    } else if q.is_one() {
                        Some(true)
                    } else {
                        debug_assert!(q.is_positive() || q.is_negative());
                        None
                    }
                })
                .collect();
            return bits
                .map(|mines| vec![MineLayout { dims, mines }])
                .unwrap_or_default();
        }
    }
    let constraints: Vec<(Vec<usize>, u8)> = matrix
        .iter()
        .zip(&clues.clues)
        .map(|(row, &c)| ((0..k).filter(|&j| row[j] == 1).collect(), c))
        .collect();
    let mut by_var = vec![Vec::new(); k];
    for (i, (vars, _)) in constraints.iter().enumerate() {
        for &v in vars {
            by_var[v].push(i);
        }
    }
    let mut search = Search {
        constraints: &constraints,
        by_var,
        cap,
        found: Vec::new(),
    };
    search.dfs(vec![None; k]);
    search
        .found
        .into_iter()
        .map(|mines| MineLayout { dims, mines })
        .collect()
}

/// `(true, None)` for a unique solution, `(false, Some(second))` otherwise.
pub fn is_unique(clues: &ClueBoard) -> Result<(bool, Option<MineLayout>), MinesError> {
    let mut found = solve(clues, 2);
    match found.len() {
        0 => Err(MinesError::NoSolution),
        1 => Ok((true, None)),
        _ => Ok((false, found.pop())),
    }
}

/// Searches seeded random layouts of `dims` for one whose clues have another
/// solution. Returns `(clues, generated layout, different layout)`.
pub fn ambiguity_witness(
    dims: BoardDims,
    seed: u64,
    tries: usize,
) -> Option<(ClueBoard, MineLayout, MineLayout)> {
    let mut rng = crate::seeded_rng(seed);
    let k = dims.black_cells().len();
    for _ in 0..tries {
        let layout = MineLayout {
            dims,
            mines: (0..k).map(|_| rng.gen_bool(DEFAULT_PROBABILITY)).collect(),
        };
        let clues = clues_of(&layout);
        let other = solve(&clues, 2).into_iter().find(|l| *l != layout);
        if let Some(other) = other {
            return Some((clues, layout, other));
        }
    }
    None
}

/// A printable table and its solution.
#[derive(Clone, Debug, PartialEq)]
pub struct MinesSheet {
    pub sheet: WorksheetDoc,
    pub solution: WorksheetDoc,
    pub layout: MineLayout,
    pub clues: ClueBoard,
}

fn puzzle_grid(clues: &ClueBoard) -> Grid {
    let d = clues.dims;
    Grid::from_rows(
        (0..d.m)
            .map(|r| {
                (0..d.n)
                    .map(|c| {
                        if d.is_black(r, c) {
                            Glyph::Hidden
                        } else {
                            Glyph::Digit(clues.clue(r, c))
                        }
                    })
                    .collect()
            })
            .collect(),
    )
    .expect("positive dims")
}

fn solution_grid(layout: &MineLayout, clues: &ClueBoard) -> Grid {
    let mut g = puzzle_grid(clues);
    for (r, c) in layout.dims.black_cells() {
        g.set(r, c, if layout.is_mine(r, c) { Glyph::Mine } else { Glyph::Safe });
    }
    g
}

/// Generates a table whose solution is guaranteed unique. Refuses
/// dimensions outside the coprimality condition.
pub fn mines_worksheet(spec: &GenSpec) -> Result<MinesSheet, MinesError> {
    let d = spec.dims;
    if !coprime_dims(d) {
        return Err(MinesError::NonCoprimeDims { m: d.m, n: d.n });
    }
    let (layout, clues) = generate(spec)?;
    let mut sheet = WorksheetDoc::new(format!("Paper minesweeper {}x{}", d.m, d.n));
    sheet.push(Block::Caption(
        "Each number tells how many of its neighbours (up, down, left, right) hide a mine. Mines are only in the shaded cells.".into(),
    ));
    sheet.push(Block::Grid(puzzle_grid(&clues)));
    let mut solution = WorksheetDoc::new(format!("Paper minesweeper {}x{}: solution", d.m, d.n));
    solution.push(Block::Grid(solution_grid(&layout, &clues)));
    solution.push(Block::Caption(format!("{} mines", layout.mine_count())));
    Ok(MinesSheet {
        sheet,
        solution,
        layout,
        clues,
    })
}
