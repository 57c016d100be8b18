//! Renderer-neutral worksheet documents and their text/SVG emitters.
//!
//! Both emitters are byte-deterministic: a fixed glyph set, fixed element
//! order and floats printed with two decimals.

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Cell size of SVG grids, in user units.
pub const CELL: f64 = 24.0;
/// Largest grid (either side) the SVG emitter accepts.
pub const MAX_SVG_GRID: usize = 64;

const MARGIN: f64 = 24.0;
const LINE: f64 = 16.0;
const CHAR_W: f64 = 7.2;
const CAPTION_WRAP: usize = 80;
const A4_RATIO: f64 = 297.0 / 210.0;
const MIN_WIDTH: f64 = 595.0;
const CUT_LINE: &str = "-- 8< ------------------------------ answer key --";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RenderError {
    #[error("grid {rows}x{cols} exceeds the {max}x{max} SVG limit")]
    OversizeGrid { rows: usize, cols: usize, max: usize },
    #[error("grid dimensions must be at least 1x1, got {rows}x{cols}")]
    EmptyGrid { rows: usize, cols: usize },
    #[error("answer key at block {at} points to missing or invalid block {target}")]
    DanglingAnswerKey { at: usize, target: usize },
}

/// The closed glyph vocabulary of all worksheets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Glyph {
    /// Live automaton cell.
    Alive,
    /// Dead automaton cell.
    Dead,
    /// A cell the pupil fills in.
    Blank,
    /// Covered minesweeper cell.
    Hidden,
    Mine,
    Safe,
    Digit(u8),
}

impl Glyph {
    pub fn as_char(self) -> char {
        match self {
            Glyph::Alive => '■',
            Glyph::Dead => '·',
            Glyph::Blank => '_',
            Glyph::Hidden => '#',
            Glyph::Mine => '*',
            Glyph::Safe => '.',
            Glyph::Digit(d) => char::from_digit(u32::from(d.min(9)), 10).expect("digit"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr")]
pub struct Grid {
    rows: usize,
    cols: usize,
    cells: Vec<Glyph>,
}

#[derive(Deserialize)]
struct GridRepr {
    rows: usize,
    cols: usize,
    cells: Vec<Glyph>,
}

impl TryFrom<GridRepr> for Grid {
    type Error = String;

    fn try_from(g: GridRepr) -> Result<Self, Self::Error> {
        if g.rows == 0 || g.cols == 0 {
            return Err(RenderError::EmptyGrid { rows: g.rows, cols: g.cols }.to_string());
        }
        if g.cells.len() != g.rows * g.cols {
            return Err(format!("{}x{} grid needs {} cells, got {}", g.rows, g.cols, g.rows * g.cols, g.cells.len()));
        }
        Ok(Self {
            rows: g.rows,
            cols: g.cols,
            cells: g.cells,
        })
    }
}

impl Grid {
    pub fn filled(rows: usize, cols: usize, glyph: Glyph) -> Result<Self, RenderError> {
        if rows == 0 || cols == 0 {
            return Err(RenderError::EmptyGrid { rows, cols });
        }
        Ok(Self {
            rows,
            cols,
            cells: vec![glyph; rows * cols],
        })
    }

    pub fn from_rows(rows: Vec<Vec<Glyph>>) -> Result<Self, RenderError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut g = Self::filled(r, c, Glyph::Blank)?;
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged grid rows");
            g.set_row(i, row);
        }
        Ok(g)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Glyph {
        self.cells[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, glyph: Glyph) {
        self.cells[r * self.cols + c] = glyph;
    }

    pub fn set_row(&mut self, r: usize, glyphs: &[Glyph]) {
        assert_eq!(glyphs.len(), self.cols, "row width mismatch");
        self.cells[r * self.cols..(r + 1) * self.cols].copy_from_slice(glyphs);
    }

    pub fn row_string(&self, r: usize) -> String {
        (0..self.cols).map(|c| self.get(r, c).as_char()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Block {
    Grid(Grid),
    Table(Vec<Vec<String>>),
    Caption(String),
    /// Marks the referenced block as part of the answer key; it is printed
    /// after the cut line instead of in the exercise.
    AnswerKey(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorksheetDoc {
    pub title: String,
    pub blocks: Vec<Block>,
}

impl WorksheetDoc {
    pub fn new(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            blocks: Vec::new(),
        }
    }

    /// Appends a block and returns its index, for use in [`Block::AnswerKey`].
    pub fn push(&mut self, block: Block) -> usize {
        self.blocks.push(block);
        self.blocks.len() - 1
    }

    pub fn validate(&self) -> Result<(), RenderError> {
        for (at, b) in self.blocks.iter().enumerate() {
            if let Block::AnswerKey(target) = *b {
                match self.blocks.get(target) {
                    Some(Block::AnswerKey(_)) | None => {
                        return Err(RenderError::DanglingAnswerKey { at, target })
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(())
    }

    /// `(exercise blocks, answer blocks)` in print order.
    fn sections(&self) -> (Vec<&Block>, Vec<&Block>) {
        let answers: Vec<usize> = self
            .blocks
            .iter()
            .filter_map(|b| match b {
                Block::AnswerKey(t) if *t < self.blocks.len() => Some(*t),
                _ => None,
            })
            .collect();
        let exercise = self
            .blocks
            .iter()
            .enumerate()
            .filter(|(i, b)| !answers.contains(i) && !matches!(b, Block::AnswerKey(_)))
            .map(|(_, b)| b)
            .collect();
        let key = answers
            .iter()
            .map(|&i| &self.blocks[i])
            .filter(|b| !matches!(b, Block::AnswerKey(_)))
            .collect();
        (exercise, key)
    }

    pub fn grids(&self) -> impl Iterator<Item = &Grid> {
        self.blocks.iter().filter_map(|b| match b {
            Block::Grid(g) => Some(g),
            _ => None,
        })
    }
}

fn table_lines(rows: &[Vec<String>]) -> Vec<String> {
    let ncols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..ncols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    rows.iter()
        .map(|r| {
            let mut line = String::new();
            for (c, cell) in r.iter().enumerate() {
                if c > 0 {
                    line.push_str("  ");
                }
                line.push_str(cell);
                let pad = widths[c] - cell.chars().count();
                line.extend(std::iter::repeat(' ').take(pad));
            }
            line.trim_end().to_string()
        })
        .collect()
}

fn block_text(block: &Block, out: &mut String) {
    match block {
        Block::Grid(g) => {
            for r in 0..g.rows {
                out.push_str(&g.row_string(r));
                out.push('\n');
            }
        }
        Block::Table(rows) => {
            for line in table_lines(rows) {
                out.push_str(&line);
                out.push('\n');
            }
        }
        Block::Caption(s) => {
            out.push_str(s);
            out.push('\n');
        }
        Block::AnswerKey(_) => {}
    }
}

/// Plain monospace rendering; answer blocks follow a cut line.
pub fn to_text(doc: &WorksheetDoc) -> String {
    let (exercise, key) = doc.sections();
    let mut out = String::new();
    out.push_str(&doc.title);
    out.push('\n');
    for b in exercise {
        out.push('\n');
        block_text(b, &mut out);
    }
    if !key.is_empty() {
        out.push('\n');
        out.push_str(CUT_LINE);
        out.push('\n');
        for b in key {
            out.push('\n');
            block_text(b, &mut out);
        }
    }
    out
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn wrap(s: &str, width: usize) -> Vec<String> {
    let mut lines = Vec::new();
    let mut cur = String::new();
    for word in s.split_whitespace() {
        if !cur.is_empty() && cur.chars().count() + 1 + word.chars().count() > width {
            lines.push(std::mem::take(&mut cur));
        }
        if !cur.is_empty() {
            cur.push(' ');
        }
        cur.push_str(word);
    }
    if !cur.is_empty() || lines.is_empty() {
        lines.push(cur);
    }
    lines
}

struct Svg {
    body: String,
    y: f64,
    width: f64,
}

impl Svg {
    fn text(&mut self, x: f64, size: f64, content: &str) {
        self.y += LINE;
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{:.2}" font-family="monospace" font-size="{size:.2}">{}</text>"#,
            self.y,
            escape(content)
        );
        self.width = self.width.max(x + content.chars().count() as f64 * CHAR_W);
    }

    fn grid(&mut self, g: &Grid) {
        self.y += LINE / 2.0;
        for r in 0..g.rows {
            for c in 0..g.cols {
                let x = MARGIN + c as f64 * CELL;
                let y = self.y + r as f64 * CELL;
                let glyph = g.get(r, c);
                let (fill, dash) = match glyph {
                    Glyph::Alive => ("#000000", false),
                    Glyph::Dead | Glyph::Digit(_) => ("#ffffff", false),
                    Glyph::Blank => ("#ffffff", true),
                    Glyph::Hidden | Glyph::Mine | Glyph::Safe => ("#b0b0b0", false),
                };
                let _ = write!(
                    self.body,
                    r##"<rect x="{x:.2}" y="{y:.2}" width="{CELL:.2}" height="{CELL:.2}" fill="{fill}" stroke="#000000" stroke-width="1.00""##
                );
                if dash {
                    self.body.push_str(r#" stroke-dasharray="2.00,2.00""#);
                }
                self.body.push_str("/>\n");
                let label = match glyph {
                    Glyph::Digit(_) | Glyph::Mine => Some(glyph.as_char()),
                    _ => None,
                };
                if let Some(ch) = label {
                    let _ = writeln!(
                        self.body,
                        r#"<text x="{:.2}" y="{:.2}" font-family="monospace" font-size="16.00" text-anchor="middle">{ch}</text>"#,
                        x + CELL / 2.0,
                        y + CELL / 2.0 + 5.5
                    );
                }
            }
        }
        self.y += g.rows as f64 * CELL;
        self.width = self.width.max(MARGIN + g.cols as f64 * CELL);
    }

    fn block(&mut self, b: &Block) {
        match b {
            Block::Grid(g) => self.grid(g),
            Block::Table(rows) => {
                for line in table_lines(rows) {
                    self.text(MARGIN, 12.0, &line);
                }
            }
            Block::Caption(s) => {
                for line in wrap(s, CAPTION_WRAP) {
                    self.text(MARGIN, 12.0, &line);
                }
            }
            Block::AnswerKey(_) => {}
        }
        self.y += LINE / 2.0;
    }
}

/// Standalone SVG 1.1 rendering with an A4-proportioned view box.
pub fn to_svg(doc: &WorksheetDoc) -> Result<String, RenderError> {
    for g in doc.grids() {
        if g.rows > MAX_SVG_GRID || g.cols > MAX_SVG_GRID {
            return Err(RenderError::OversizeGrid {
                rows: g.rows,
                cols: g.cols,
                max: MAX_SVG_GRID,
            });
        }
    }
    let (exercise, key) = doc.sections();
    let mut svg = Svg {
        body: String::new(),
        y: MARGIN,
        width: 0.0,
    };
    svg.text(MARGIN, 16.0, &doc.title);
    svg.y += LINE / 2.0;
    for b in exercise {
        svg.block(b);
    }
    let mut cut_y = None;
    if !key.is_empty() {
        svg.y += LINE;
        cut_y = Some(svg.y);
        svg.text(MARGIN, 12.0, "answer key");
        svg.y += LINE / 2.0;
        for b in key {
            svg.block(b);
        }
    }
    let content_w = (svg.width + MARGIN).max(MIN_WIDTH);
    let content_h = svg.y + MARGIN;
    let (w, h) = if content_h > content_w * A4_RATIO {
        (content_h / A4_RATIO, content_h)
    } else {
        (content_w, content_w * A4_RATIO)
    };
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n");
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.2}" height="{h:.2}" viewBox="0.00 0.00 {w:.2} {h:.2}">"#
    );
    let _ = writeln!(
        out,
        r##"<rect x="0.00" y="0.00" width="{w:.2}" height="{h:.2}" fill="#ffffff"/>"##
    );
    out.push_str(&svg.body);
    if let Some(y) = cut_y {
        let _ = writeln!(
            out,
            r##"<line x1="0.00" y1="{y:.2}" x2="{w:.2}" y2="{y:.2}" stroke="#000000" stroke-width="1.00" stroke-dasharray="6.00,4.00"/>"##
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
