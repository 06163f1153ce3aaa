//! Placements of points on square boards and the symmetry group of the square.
//!
//! A [`Placement`] is a partial permutation: at most one point per row and per
//! column. Coordinates are 1-based. Internally a placement is stored as its
//! partial-permutation vector (entry `i` is the column of the point in row
//! `i + 1`, or `0` when the row is empty), which is also the persisted form:
//!
//! ```text
//! {"n":4,"p":[2,0,3,1]}
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest board order a [`Placement`] can represent.
pub const MAX_ORDER: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoardError {
    #[error("board order {0} is outside 0..={MAX_ORDER}")]
    Order(usize),
    #[error("point ({row}, {col}) lies outside the {size}x{size} board")]
    OutOfBounds { size: usize, row: usize, col: usize },
    #[error("row {0} is occupied twice")]
    DuplicateRow(usize),
    #[error("column {0} is occupied twice")]
    DuplicateColumn(usize),
    #[error("cannot embed an order-{from} placement into order {to}")]
    Embed { from: usize, to: usize },
    #[error("malformed placement vector: {0}")]
    Malformed(String),
}

/// A point on the board, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub row: u8,
    pub col: u8,
}

impl Point {
    pub const fn new(row: u8, col: u8) -> Self {
        Point { row, col }
    }
}

impl From<(u8, u8)> for Point {
    fn from((row, col): (u8, u8)) -> Self {
        Point { row, col }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// Points on an `n x n` board with the permutation property.
///
/// Ordering (and therefore every sorted set of placements in this crate) is
/// the lexicographic order of `(size, partial-permutation vector)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Placement {
    size: u8,
    cols: [u8; MAX_ORDER],
}

impl Placement {
    /// The placement with no points on a board of order `size`.
    pub fn empty(size: usize) -> Result<Self, BoardError> {
        if size > MAX_ORDER {
            return Err(BoardError::Order(size));
        }
        Ok(Placement {
            size: size as u8,
            cols: [0; MAX_ORDER],
        })
    }

    /// Builds a placement from an arbitrary list of points.
    pub fn new<I, P>(size: usize, points: I) -> Result<Self, BoardError>
    where
        I: IntoIterator<Item = P>,
        P: Into<Point>,
    {
        let mut placement = Placement::empty(size)?;
        let mut used_cols = 0u32;
        for point in points {
            let Point { row, col } = point.into();
            let (r, c) = (row as usize, col as usize);
            if r == 0 || c == 0 || r > size || c > size {
                return Err(BoardError::OutOfBounds {
                    size,
                    row: r,
                    col: c,
                });
            }
            if placement.cols[r - 1] != 0 {
                return Err(BoardError::DuplicateRow(r));
            }
            if used_cols & (1 << c) != 0 {
                return Err(BoardError::DuplicateColumn(c));
            }
            used_cols |= 1 << c;
            placement.cols[r - 1] = col;
        }
        Ok(placement)
    }

    /// Builds a placement from its partial-permutation vector (`0` = empty row).
    pub fn from_vector(vector: &[u8]) -> Result<Self, BoardError> {
        let size = vector.len();
        Placement::new(
            size,
            vector
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(i, &c)| Point::new(i as u8 + 1, c)),
        )
    }

    /// Full placement from a permutation given as 1-based column values.
    pub fn from_permutation(perm: &[u8]) -> Result<Self, BoardError> {
        if perm.contains(&0) {
            return Err(BoardError::Malformed(
                "permutation entries are 1-based".into(),
            ));
        }
        Placement::from_vector(perm)
    }

    pub fn size(&self) -> usize {
        self.size as usize
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.vector().iter().filter(|&&c| c != 0).count()
    }

    pub fn is_empty(&self) -> bool {
        self.vector().iter().all(|&c| c == 0)
    }

    /// True when every row holds a point.
    pub fn is_full(&self) -> bool {
        self.vector().iter().all(|&c| c != 0)
    }

    /// The partial-permutation vector, one entry per row.
    pub fn vector(&self) -> &[u8] {
        &self.cols[..self.size as usize]
    }

    /// Column of the point in `row` (1-based), if any.
    pub fn col_of(&self, row: usize) -> Option<u8> {
        match self.cols.get(row.wrapping_sub(1)) {
            Some(&c) if c != 0 && row <= self.size() => Some(c),
            _ => None,
        }
    }

    pub fn row_used(&self, row: usize) -> bool {
        self.col_of(row).is_some()
    }

    pub fn col_used(&self, col: usize) -> bool {
        self.vector().iter().any(|&c| c as usize == col)
    }

    /// Points sorted by row.
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.vector()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| Point::new(i as u8 + 1, c))
    }

    /// The inverse vector: entry `c - 1` is the row of the point in column `c`.
    pub fn transposed_vector(&self) -> [u8; MAX_ORDER] {
        let mut rows = [0u8; MAX_ORDER];
        for p in self.points() {
            rows[p.col as usize - 1] = p.row;
        }
        rows
    }

    /// Same points on the board one order larger; the new last row and last
    /// column are empty.
    pub fn embed(&self, new_size: usize) -> Result<Self, BoardError> {
        if new_size != self.size() + 1 || new_size > MAX_ORDER {
            return Err(BoardError::Embed {
                from: self.size(),
                to: new_size,
            });
        }
        Ok(Placement {
            size: new_size as u8,
            cols: self.cols,
        })
    }

    /// Adds a point, enforcing the permutation property.
    pub fn with_point(&self, point: Point) -> Result<Self, BoardError> {
        let (r, c) = (point.row as usize, point.col as usize);
        if r == 0 || c == 0 || r > self.size() || c > self.size() {
            return Err(BoardError::OutOfBounds {
                size: self.size(),
                row: r,
                col: c,
            });
        }
        if self.row_used(r) {
            return Err(BoardError::DuplicateRow(r));
        }
        if self.col_used(c) {
            return Err(BoardError::DuplicateColumn(c));
        }
        let mut next = *self;
        next.cols[r - 1] = point.col;
        Ok(next)
    }

    /// Adds a point the caller already knows to be free.
    pub(crate) fn with_point_unchecked(&self, row: usize, col: u8) -> Self {
        debug_assert!(!self.row_used(row) && !self.col_used(col as usize));
        let mut next = *self;
        next.cols[row - 1] = col;
        next
    }

    /// Removes the point in `row`, if there is one.
    pub fn without_row(&self, row: usize) -> Self {
        let mut next = *self;
        if row >= 1 && row <= self.size() {
            next.cols[row - 1] = 0;
        }
        next
    }

    pub fn apply_symmetry(&self, t: SymmetryTransform) -> Self {
        let n = self.size() as u8;
        let mut out = Placement {
            size: self.size,
            cols: [0; MAX_ORDER],
        };
        for p in self.points() {
            let q = t.map_point(p, n);
            out.cols[q.row as usize - 1] = q.col;
        }
        out
    }

    /// All 8 images under the symmetry group, indexed like [`SymmetryTransform::ALL`].
    pub fn orbit_images(&self) -> [Placement; 8] {
        SymmetryTransform::ALL.map(|t| self.apply_symmetry(t))
    }

    /// Number of distinct images under the symmetry group.
    pub fn orbit_size(&self) -> usize {
        let mut images = self.orbit_images();
        images.sort_unstable();
        1 + images.windows(2).filter(|w| w[0] != w[1]).count()
    }

    pub fn canonical_key(&self) -> CanonicalKey {
        let min = self
            .orbit_images()
            .into_iter()
            .min()
            .expect("orbit is never empty");
        CanonicalKey(min)
    }

    pub fn to_serialized(&self) -> SerializedPlacement {
        SerializedPlacement {
            n: self.size(),
            p: self.vector().to_vec(),
        }
    }

    /// One-line JSON form, `{"n":<order>,"p":[...]}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_serialized()).expect("placement serialization cannot fail")
    }

    pub fn from_json(line: &str) -> Result<Self, PlacementParseError> {
        let raw: SerializedPlacement = serde_json::from_str(line)?;
        Ok(raw.try_into()?)
    }
}

impl fmt::Debug for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Placement(n={}, p={:?})", self.size, self.vector())
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json())
    }
}

/// Persisted form of a placement. Field order and names are part of the file
/// format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SerializedPlacement {
    pub n: usize,
    pub p: Vec<u8>,
}

impl TryFrom<SerializedPlacement> for Placement {
    type Error = BoardError;

    fn try_from(raw: SerializedPlacement) -> Result<Self, Self::Error> {
        if raw.p.len() != raw.n {
            return Err(BoardError::Malformed(format!(
                "vector has {} entries for order {}",
                raw.p.len(),
                raw.n
            )));
        }
        Placement::from_vector(&raw.p)
    }
}

#[derive(Debug, Error)]
pub enum PlacementParseError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Board(#[from] BoardError),
}

/// One of the 8 isometries of the square.
///
/// Encoded as an optional transpose followed by optional row and column
/// reversals, which gives a closed-form composition law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymmetryTransform {
    transpose: bool,
    flip_rows: bool,
    flip_cols: bool,
}

impl SymmetryTransform {
    pub const IDENTITY: Self = Self::from_bits(false, false, false);
    /// Quarter turn clockwise: `(r, c) -> (c, n + 1 - r)`.
    pub const ROTATE_90: Self = Self::from_bits(true, false, true);
    pub const ROTATE_180: Self = Self::from_bits(false, true, true);
    pub const ROTATE_270: Self = Self::from_bits(true, true, false);
    /// Mirror across the vertical axis: `(r, c) -> (r, n + 1 - c)`.
    pub const FLIP_COLUMNS: Self = Self::from_bits(false, false, true);
    /// Mirror across the horizontal axis: `(r, c) -> (n + 1 - r, c)`.
    pub const FLIP_ROWS: Self = Self::from_bits(false, true, false);
    /// Mirror across the main diagonal: `(r, c) -> (c, r)`.
    pub const TRANSPOSE: Self = Self::from_bits(true, false, false);
    /// Mirror across the anti-diagonal: `(r, c) -> (n + 1 - c, n + 1 - r)`.
    pub const ANTI_TRANSPOSE: Self = Self::from_bits(true, true, true);

    pub const ALL: [Self; 8] = [
        Self::IDENTITY,
        Self::ROTATE_90,
        Self::ROTATE_180,
        Self::ROTATE_270,
        Self::FLIP_COLUMNS,
        Self::FLIP_ROWS,
        Self::TRANSPOSE,
        Self::ANTI_TRANSPOSE,
    ];

    const fn from_bits(transpose: bool, flip_rows: bool, flip_cols: bool) -> Self {
        SymmetryTransform {
            transpose,
            flip_rows,
            flip_cols,
        }
    }

    pub fn name(&self) -> &'static str {
        match (self.transpose, self.flip_rows, self.flip_cols) {
            (false, false, false) => "identity",
            (true, false, true) => "rotate90",
            (false, true, true) => "rotate180",
            (true, true, false) => "rotate270",
            (false, false, true) => "flip-columns",
            (false, true, false) => "flip-rows",
            (true, false, false) => "transpose",
            (true, true, true) => "anti-transpose",
        }
    }

    pub fn map_point(&self, p: Point, n: u8) -> Point {
        let (mut r, mut c) = if self.transpose {
            (p.col, p.row)
        } else {
            (p.row, p.col)
        };
        if self.flip_rows {
            r = n + 1 - r;
        }
        if self.flip_cols {
            c = n + 1 - c;
        }
        Point::new(r, c)
    }

    /// `self.then(other)` applies `self` first, then `other`.
    pub fn then(self, other: Self) -> Self {
        // Moving a transpose past a reflection swaps which axis is reflected.
        let (fr, fc) = if other.transpose {
            (self.flip_cols, self.flip_rows)
        } else {
            (self.flip_rows, self.flip_cols)
        };
        SymmetryTransform {
            transpose: self.transpose ^ other.transpose,
            flip_rows: fr ^ other.flip_rows,
            flip_cols: fc ^ other.flip_cols,
        }
    }

    pub fn inverse(self) -> Self {
        Self::ALL
            .into_iter()
            .find(|&t| self.then(t) == Self::IDENTITY)
            .expect("every group element has an inverse")
    }
}

/// The least partial-permutation vector over a placement's symmetry orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey(Placement);

impl CanonicalKey {
    pub fn representative(&self) -> Placement {
        self.0
    }

    pub fn bytes(&self) -> &[u8] {
        self.0.vector()
    }
}

/// Groups placements into symmetry classes.
///
/// Returns `(representative, orbit size, members)` sorted by representative.
pub fn equivalence_classes(placements: &[Placement]) -> Vec<EquivalenceClass> {
    let mut keyed: Vec<(CanonicalKey, Placement)> =
        placements.iter().map(|p| (p.canonical_key(), *p)).collect();
    keyed.sort_unstable();
    let mut classes: Vec<EquivalenceClass> = Vec::new();
    for (key, p) in keyed {
        match classes.last_mut() {
            Some(class) if class.key == key => class.members.push(p),
            _ => classes.push(EquivalenceClass {
                key,
                orbit_size: p.orbit_size(),
                members: vec![p],
            }),
        }
    }
    classes
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceClass {
    pub key: CanonicalKey,
    pub orbit_size: usize,
    pub members: Vec<Placement>,
}
