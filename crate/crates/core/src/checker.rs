//! Costas-property decision procedures and comparison accounting.
//!
//! A placement is Costas when all displacement vectors between its points are
//! distinct. Two independent full checks are provided (the correlation sum and
//! the difference triangle) along with the incremental checks used by the
//! recursive enumerator, which only examine comparisons that involve newly
//! added points.
//!
//! A *comparison* is an equality test between two column differences taken
//! over the same row distance. For a set of occupied rows `a_1 < ... < a_k`,
//! each comparison corresponds to exactly one triple `a_p < a_q < a_r` for
//! which `a_p + a_r - a_q` is also occupied, so a placement needs
//! `rho = sum_d C(|S_d|, 2)` comparisons and never more than `C(k, 3)`.

use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{BoardError, Placement, Point, MAX_ORDER};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error(transparent)]
    Board(#[from] BoardError),
    #[error("new points must occupy the last row and the last column of the board: {0}")]
    NewRegion(String),
}

/// Whether a check stops at the first failed comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// Every required comparison is charged, even after a violation is found.
    #[default]
    Strict,
    /// Stop at the first violation.
    EarlyExit,
}

impl Convention {
    pub fn as_str(&self) -> &'static str {
        match self {
            Convention::Strict => "strict",
            Convention::EarlyExit => "early-exit",
        }
    }
}

impl std::str::FromStr for Convention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(Convention::Strict),
            "early-exit" => Ok(Convention::EarlyExit),
            other => Err(format!(
                "unknown convention `{other}` (expected strict or early-exit)"
            )),
        }
    }
}

/// Counters charged by the checks. Merging is a plain sum, so worker-local
/// ledgers can be combined in any order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonLedger {
    /// Placements inspected (or generated, for the enumerator).
    pub candidates: u64,
    /// Evaluations of the triple membership test `a_p + a_r - a_q in rows`.
    pub membership_tests: u64,
    /// Equality tests between two same-distance differences.
    pub comparisons: u64,
}

impl ComparisonLedger {
    pub fn merge(&mut self, other: &ComparisonLedger) {
        *self += *other;
    }
}

impl AddAssign for ComparisonLedger {
    fn add_assign(&mut self, rhs: Self) {
        self.candidates += rhs.candidates;
        self.membership_tests += rhs.membership_tests;
        self.comparisons += rhs.comparisons;
    }
}

impl Add for ComparisonLedger {
    type Output = Self;

    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl std::iter::Sum for ComparisonLedger {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), Add::add)
    }
}

/// Row `d` holds the column differences `col(r + d) - col(r)` over occupied
/// row pairs at distance `d`, ordered by `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferenceTriangle {
    order: usize,
    rows: Vec<Vec<i16>>,
}

impl DifferenceTriangle {
    pub fn order(&self) -> usize {
        self.order
    }

    /// `S_d` for `d` in `1..order`.
    pub fn row(&self, d: usize) -> &[i16] {
        &self.rows[d - 1]
    }

    pub fn rows(&self) -> impl Iterator<Item = (usize, &[i16])> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| (i + 1, r.as_slice()))
    }

    /// The vector `(|S_1|, ..., |S_{n-1}|)`.
    pub fn row_sizes(&self) -> Vec<usize> {
        self.rows.iter().map(Vec::len).collect()
    }

    pub fn total_entries(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn nonempty_rows(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_empty()).count()
    }

    pub fn is_duplicate_free(&self) -> bool {
        self.rows.iter().all(|row| {
            let mut seen = 0u64;
            row.iter().all(|&v| {
                let bit = 1u64 << (v + MAX_ORDER as i16) as u32;
                let fresh = seen & bit == 0;
                seen |= bit;
                fresh
            })
        })
    }
}

pub fn difference_triangle(p: &Placement) -> DifferenceTriangle {
    let n = p.size();
    let v = p.vector();
    let mut rows = vec![Vec::new(); n.saturating_sub(1)];
    for d in 1..n {
        for r in 0..n - d {
            if v[r] != 0 && v[r + d] != 0 {
                rows[d - 1].push(v[r + d] as i16 - v[r] as i16);
            }
        }
    }
    DifferenceTriangle { order: n, rows }
}

/// Fast full check: no difference-triangle row has a repeated entry.
pub fn is_costas(p: &Placement) -> bool {
    let n = p.size();
    let v = p.vector();
    for d in 1..n {
        let mut seen = 0u64;
        for r in 0..n - d {
            if v[r] != 0 && v[r + d] != 0 {
                let bit = 1u64 << (v[r + d] as i32 - v[r] as i32 + MAX_ORDER as i32) as u32;
                if seen & bit != 0 {
                    return false;
                }
                seen |= bit;
            }
        }
    }
    true
}

/// Full check through an explicit [`DifferenceTriangle`].
pub fn is_costas_by_triangle(p: &Placement) -> bool {
    difference_triangle(p).is_duplicate_free()
}

/// Full check through the correlation sum: every non-zero shift `(r, s)` of
/// the point matrix overlaps the original in at most one point.
pub fn is_costas_by_correlation(p: &Placement) -> bool {
    let n = p.size() as i32;
    let mut m = [[false; MAX_ORDER]; MAX_ORDER];
    for pt in p.points() {
        m[pt.row as usize - 1][pt.col as usize - 1] = true;
    }
    let at = |i: i32, j: i32| i >= 0 && j >= 0 && i < n && j < n && m[i as usize][j as usize];
    for r in -n..=n {
        for s in -n..=n {
            if r == 0 && s == 0 {
                continue;
            }
            let mut c = 0;
            for i in 0..n {
                for j in 0..n {
                    if at(i, j) && at(i + r, j + s) {
                        c += 1;
                    }
                }
            }
            if c > 1 {
                return false;
            }
        }
    }
    true
}

/// Number of comparisons the difference triangle requires,
/// `sum_d C(|S_d|, 2)`.
pub fn rho(p: &Placement) -> u64 {
    difference_triangle(p)
        .row_sizes()
        .into_iter()
        .map(|s| (s * s.saturating_sub(1) / 2) as u64)
        .sum()
}

/// The same count through the sparsity expansion
/// `(sum_d |S_d|^2 - C(k, 2)) / 2`.
pub fn rho_by_sparsity(p: &Placement) -> u64 {
    let t = difference_triangle(p);
    let sum_sq: u64 = t.row_sizes().iter().map(|&s| (s * s) as u64).sum();
    let k = p.len() as u64;
    let pairs = k * k.saturating_sub(1) / 2;
    (sum_sq - pairs) / 2
}

/// Row triples `a_p < a_q < a_r` whose comparison is actually required.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ComparisonPlan {
    pub triples: Vec<[u8; 3]>,
}

impl ComparisonPlan {
    pub fn count(&self) -> usize {
        self.triples.len()
    }
}

pub fn comparison_plan(p: &Placement) -> ComparisonPlan {
    let rows: Vec<u8> = p.points().map(|pt| pt.row).collect();
    let mut triples = Vec::new();
    for (i, &a) in rows.iter().enumerate() {
        for (j, &b) in rows.iter().enumerate().skip(i + 1) {
            for &c in &rows[j + 1..] {
                if p.row_used((a + c - b) as usize) {
                    triples.push([a, b, c]);
                }
            }
        }
    }
    ComparisonPlan { triples }
}

/// Full triangle check with comparison charging, as an exhaustive search
/// would run it. In strict mode a full permutation of order `n` is charged
/// exactly `C(n, 3)` comparisons.
pub fn check_full(p: &Placement, ledger: &mut ComparisonLedger, convention: Convention) -> bool {
    let n = p.size();
    let v = p.vector();
    let mut ok = true;
    let mut diffs = [0i8; MAX_ORDER];
    for d in 1..n {
        let mut len = 0;
        for r in 0..n - d {
            if v[r] != 0 && v[r + d] != 0 {
                let x = v[r + d] as i8 - v[r] as i8;
                for &y in &diffs[..len] {
                    ledger.comparisons += 1;
                    if x == y {
                        ok = false;
                        if convention == Convention::EarlyExit {
                            return false;
                        }
                    }
                }
                diffs[len] = x;
                len += 1;
            }
        }
    }
    ok
}

/// Checks the comparisons that involve the point in `new_row`, which must be
/// the highest occupied row of `view` (a partial-permutation vector). Every
/// other comparison is assumed to pass already.
///
/// Charges one membership test per pair of older rows and one comparison per
/// required triple, so at most `C(k - 1, 2)` of each for `k` points.
pub(crate) fn check_extremal(
    view: &[u8],
    new_row: usize,
    ledger: &mut ComparisonLedger,
    convention: Convention,
) -> bool {
    let nc = view[new_row - 1] as i16;
    let mut occupied = [0usize; MAX_ORDER];
    let mut k = 0;
    for (r, &c) in view[..new_row - 1].iter().enumerate() {
        if c != 0 {
            occupied[k] = r + 1;
            k += 1;
        }
    }
    let mut ok = true;
    for qi in 1..k {
        let q = occupied[qi];
        let dq = view[q - 1] as i16;
        for &p in &occupied[..qi] {
            let x2 = p + new_row - q;
            ledger.membership_tests += 1;
            let cx2 = view[x2 - 1];
            if cx2 != 0 {
                ledger.comparisons += 1;
                if dq - view[p - 1] as i16 == nc - cx2 as i16 {
                    ok = false;
                    if convention == Convention::EarlyExit {
                        return false;
                    }
                }
            }
        }
    }
    ok
}

/// Extends a Costas placement by one point and decides whether the result is
/// still Costas, examining only comparisons that involve the new point.
///
/// When the new point has the largest row (or the largest column) of the
/// extension, the check runs in that projection and charges at most
/// `C(k - 1, 2)` comparisons. Otherwise it falls back to comparing every new
/// difference against its triangle row.
pub fn check_one_new(
    base: &Placement,
    new_point: Point,
    ledger: &mut ComparisonLedger,
    convention: Convention,
) -> Result<bool, CheckError> {
    let ext = base.with_point(new_point)?;
    let (row, col) = (new_point.row as usize, new_point.col as usize);
    let max_row = base.points().map(|p| p.row as usize).max().unwrap_or(0);
    let max_col = base.points().map(|p| p.col as usize).max().unwrap_or(0);
    if row > max_row {
        Ok(check_extremal(ext.vector(), row, ledger, convention))
    } else if col > max_col {
        let t = ext.transposed_vector();
        Ok(check_extremal(&t[..ext.size()], col, ledger, convention))
    } else {
        Ok(check_interior(&ext, row, ledger, convention))
    }
}

fn check_interior(
    ext: &Placement,
    new_row: usize,
    ledger: &mut ComparisonLedger,
    convention: Convention,
) -> bool {
    let v = ext.vector();
    let n = ext.size();
    let mut ok = true;
    let mut row: Vec<(i16, bool)> = Vec::with_capacity(n);
    for d in 1..n {
        row.clear();
        for r in 0..n - d {
            if v[r] != 0 && v[r + d] != 0 {
                let touches_new = r + 1 == new_row || r + d + 1 == new_row;
                row.push((v[r + d] as i16 - v[r] as i16, touches_new));
            }
        }
        for (i, &(x, x_new)) in row.iter().enumerate() {
            for &(y, y_new) in &row[..i] {
                if !(x_new || y_new) {
                    continue;
                }
                ledger.comparisons += 1;
                if x == y {
                    ok = false;
                    if convention == Convention::EarlyExit {
                        return false;
                    }
                }
            }
        }
    }
    ok
}

/// Extends a Costas placement on an order-`m` board by one point strictly in
/// the last row and one strictly in the last column.
///
/// The last-column point is checked first in the column projection, then the
/// last-row point in the row projection, so at most
/// `C(k - 2, 2) + C(k - 1, 2) = (k - 2)^2` comparisons are charged.
pub fn check_two_new(
    base: &Placement,
    points: [Point; 2],
    ledger: &mut ComparisonLedger,
    convention: Convention,
) -> Result<bool, CheckError> {
    let m = base.size() as u8;
    let in_last_row = |p: &Point| p.row == m && p.col < m;
    let in_last_col = |p: &Point| p.col == m && p.row < m;
    let (row_pt, col_pt) = match points {
        [a, b] if in_last_row(&a) && in_last_col(&b) => (a, b),
        [a, b] if in_last_row(&b) && in_last_col(&a) => (b, a),
        [a, b] => {
            return Err(CheckError::NewRegion(format!(
                "{a} and {b} on an order-{m} board"
            )))
        }
    };
    if base.row_used(m as usize) || base.col_used(m as usize) {
        return Err(CheckError::NewRegion(format!(
            "base already occupies row or column {m}"
        )));
    }
    let with_col = base.with_point(col_pt)?;
    let full = with_col.with_point(row_pt)?;
    Ok(check_two_prepared(
        &with_col, &full, m as usize, ledger, convention,
    ))
}

pub(crate) fn check_two_prepared(
    with_col: &Placement,
    full: &Placement,
    m: usize,
    ledger: &mut ComparisonLedger,
    convention: Convention,
) -> bool {
    let t = with_col.transposed_vector();
    let first = check_extremal(&t[..m], m, ledger, convention);
    if !first && convention == Convention::EarlyExit {
        return false;
    }
    let second = check_extremal(full.vector(), m, ledger, convention);
    first && second
}

/// Why a cell was excluded by [`cvp_marks`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CvpKind {
    /// The cell would complete a parallelogram with three existing points.
    Parallelogram,
    /// The cell would be one of three equally spaced points on a line.
    Equidistant,
}

/// Cells where a new point would complete a Costas violator pattern with the
/// existing points. A cell reachable through both patterns is reported once,
/// as a parallelogram.
pub fn cvp_marks(p: &Placement) -> Vec<(Point, CvpKind)> {
    let n = p.size() as i16;
    let pts: Vec<(i16, i16)> = p.points().map(|q| (q.row as i16, q.col as i16)).collect();
    let mut marks: Vec<Option<CvpKind>> = vec![None; (n * n) as usize];
    let mut mark = |r: i16, c: i16, kind: CvpKind| {
        if r >= 1 && c >= 1 && r <= n && c <= n {
            let slot = &mut marks[((r - 1) * n + c - 1) as usize];
            if *slot != Some(CvpKind::Parallelogram) {
                *slot = Some(kind);
            }
        }
    };
    for (i, &a) in pts.iter().enumerate() {
        for (j, &b) in pts.iter().enumerate() {
            if i == j {
                continue;
            }
            // a, b, 2b - a equally spaced
            mark(2 * b.0 - a.0, 2 * b.1 - a.1, CvpKind::Equidistant);
            if i < j && (a.0 + b.0) % 2 == 0 && (a.1 + b.1) % 2 == 0 {
                mark((a.0 + b.0) / 2, (a.1 + b.1) / 2, CvpKind::Equidistant);
            }
            for (l, &c) in pts.iter().enumerate() {
                if l != i && l != j {
                    mark(c.0 + b.0 - a.0, c.1 + b.1 - a.1, CvpKind::Parallelogram);
                }
            }
        }
    }
    let mut out = Vec::new();
    for r in 1..=n {
        for c in 1..=n {
            if let Some(kind) = marks[((r - 1) * n + c - 1) as usize] {
                out.push((Point::new(r as u8, c as u8), kind));
            }
        }
    }
    out
}

/// Free cells (row and column unused) that form no violator pattern with the
/// existing points, in row-major order. For a Costas `p`, adding any returned
/// cell gives a Costas placement and adding any other free cell does not.
pub fn eligible_cells(p: &Placement) -> Vec<Point> {
    let n = p.size();
    let mut blocked = vec![false; n * n];
    for (pt, _) in cvp_marks(p) {
        blocked[(pt.row as usize - 1) * n + pt.col as usize - 1] = true;
    }
    let mut out = Vec::new();
    for r in 1..=n {
        if p.row_used(r) {
            continue;
        }
        for c in 1..=n {
            if !p.col_used(c) && !blocked[(r - 1) * n + c - 1] {
                out.push(Point::new(r as u8, c as u8));
            }
        }
    }
    out
}

pub(crate) fn binom2(k: usize) -> u64 {
    (k * k.saturating_sub(1) / 2) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn perm(v: &[u8]) -> Placement {
        Placement::from_permutation(v).unwrap()
    }

    fn all_placements(n: usize) -> Vec<Placement> {
        // every partial permutation of order n, by brute force
        let mut out = vec![Placement::empty(n).unwrap()];
        for r in 1..=n {
            let mut next = Vec::new();
            for p in &out {
                next.push(*p);
                for c in 1..=n {
                    if !p.col_used(c) {
                        next.push(p.with_point(Point::new(r as u8, c as u8)).unwrap());
                    }
                }
            }
            out = next;
        }
        out
    }

    #[test]
    fn identity_triangle() {
        let t = difference_triangle(&perm(&[1, 2, 3]));
        assert_eq!(t.row(1), &[1, 1]);
        assert_eq!(t.row(2), &[2]);
        assert!(!is_costas(&perm(&[1, 2, 3])));
    }

    #[test]
    fn small_placements_have_empty_triangles() {
        let p = Placement::new(5, [(2, 4)]).unwrap();
        assert_eq!(difference_triangle(&p).total_entries(), 0);
        assert_eq!(
            difference_triangle(&Placement::empty(4).unwrap()).nonempty_rows(),
            0
        );
    }

    #[test]
    fn order_four_worked_example() {
        let p = perm(&[2, 1, 3, 4]);
        let t = difference_triangle(&p);
        assert_eq!(t.row(1), &[-1, 2, 1]);
        assert_eq!(t.row(2), &[1, 3]);
        assert_eq!(t.row(3), &[2]);
        assert!(t.is_duplicate_free());
        assert!(is_costas(&p) && is_costas_by_correlation(&p));
    }

    #[test]
    fn order_two_both_costas() {
        assert!(is_costas(&perm(&[1, 2])));
        assert!(is_costas(&perm(&[2, 1])));
    }

    #[test]
    fn full_checks_agree_exhaustively_to_order_five() {
        for n in 0..=5 {
            for p in all_placements(n) {
                let fast = is_costas(&p);
                assert_eq!(fast, is_costas_by_correlation(&p), "{p:?}");
                assert_eq!(fast, is_costas_by_triangle(&p), "{p:?}");
            }
        }
    }

    #[test]
    fn rho_small_cases() {
        assert_eq!(rho(&Placement::new(5, [(1, 1), (3, 2)]).unwrap()), 0);
        // rows and columns both consecutive
        let ap = Placement::new(6, [(2, 1), (3, 2), (4, 3), (5, 4)]).unwrap();
        assert_eq!(rho(&ap), 4);
        assert_eq!(comparison_plan(&ap).count(), 4);
    }

    #[test]
    fn comparison_plan_membership() {
        assert_eq!(
            comparison_plan(&Placement::new(4, [(1, 1), (2, 3)]).unwrap()).count(),
            0
        );
        let p = Placement::new(5, [(1, 1), (2, 3), (4, 2)]).unwrap();
        assert!(comparison_plan(&p).triples.is_empty());
        let q = Placement::new(5, [(1, 1), (2, 3), (3, 5), (4, 2)]).unwrap();
        // rows 1..4 equally spaced: all four triples
        assert_eq!(comparison_plan(&q).count(), 4);
    }

    #[test]
    fn strict_full_check_charges_binomial() {
        let mut ledger = ComparisonLedger::default();
        assert!(!check_full(
            &perm(&[1, 2, 3, 4, 5]),
            &mut ledger,
            Convention::Strict
        ));
        assert_eq!(ledger.comparisons, 10);
        let mut early = ComparisonLedger::default();
        check_full(&perm(&[1, 2, 3, 4, 5]), &mut early, Convention::EarlyExit);
        assert_eq!(early.comparisons, 1);
    }

    #[test]
    fn one_new_point_basic() {
        let mut ledger = ComparisonLedger::default();
        let base = Placement::new(3, [(1, 2)]).unwrap();
        assert!(check_one_new(&base, Point::new(3, 3), &mut ledger, Convention::Strict).unwrap());
        assert_eq!(ledger.comparisons, 0);
        assert!(matches!(
            check_one_new(&base, Point::new(2, 2), &mut ledger, Convention::Strict),
            Err(CheckError::Board(BoardError::DuplicateColumn(2)))
        ));
    }

    #[test]
    fn corner_extensions_match_full_check() {
        for p in all_placements(5) {
            if p.len() != 5 || !is_costas(&p) {
                continue;
            }
            let base = p.embed(6).unwrap();
            let mut ledger = ComparisonLedger::default();
            let got =
                check_one_new(&base, Point::new(6, 6), &mut ledger, Convention::Strict).unwrap();
            let ext = base.with_point(Point::new(6, 6)).unwrap();
            assert_eq!(got, is_costas(&ext));
            assert!(ledger.comparisons <= binom2(5));
        }
    }

    #[test]
    fn one_new_point_agrees_everywhere() {
        // all Costas bases of order 5, every free cell, including interior
        // cells that take the fallback path
        for base in all_placements(5).into_iter().filter(is_costas) {
            for r in 1..=5u8 {
                for c in 1..=5u8 {
                    let pt = Point::new(r, c);
                    let Ok(ext) = base.with_point(pt) else {
                        continue;
                    };
                    for conv in [Convention::Strict, Convention::EarlyExit] {
                        let mut ledger = ComparisonLedger::default();
                        let got = check_one_new(&base, pt, &mut ledger, conv).unwrap();
                        assert_eq!(got, is_costas(&ext), "{base:?} + {pt}");
                    }
                }
            }
        }
    }

    #[test]
    fn two_new_points_agree_and_respect_cap() {
        for src in all_placements(5).into_iter().filter(is_costas) {
            let base = src.embed(6).unwrap();
            let k = src.len() + 2;
            for c in 1..6u8 {
                for r in 1..6u8 {
                    let pts = [Point::new(6, c), Point::new(r, 6)];
                    let mut ledger = ComparisonLedger::default();
                    let got = match check_two_new(&base, pts, &mut ledger, Convention::Strict) {
                        Ok(v) => v,
                        Err(CheckError::Board(_)) => continue,
                        Err(e) => panic!("{e}"),
                    };
                    let ext = base.with_point(pts[0]).unwrap().with_point(pts[1]).unwrap();
                    assert_eq!(got, is_costas(&ext));
                    assert!(ledger.comparisons <= ((k - 2) * (k - 2)) as u64);
                }
            }
        }
    }

    #[test]
    fn two_new_points_from_empty() {
        let base = Placement::empty(2).unwrap();
        let mut ledger = ComparisonLedger::default();
        let ok = check_two_new(
            &base,
            [Point::new(2, 1), Point::new(1, 2)],
            &mut ledger,
            Convention::Strict,
        )
        .unwrap();
        assert!(ok);
        assert_eq!(ledger.comparisons, 0);
        assert!(matches!(
            check_two_new(
                &base,
                [Point::new(2, 2), Point::new(1, 1)],
                &mut ledger,
                Convention::Strict
            ),
            Err(CheckError::NewRegion(_))
        ));
    }

    #[test]
    fn eligible_cells_on_empty_board() {
        assert_eq!(eligible_cells(&Placement::empty(5).unwrap()).len(), 25);
    }

    #[test]
    fn parallelogram_completion_is_excluded() {
        // (1,1)->(2,3) and (3,2)->(4,4) share a displacement
        let p = Placement::new(6, [(1, 1), (2, 3), (3, 2)]).unwrap();
        assert!(is_costas(&p));
        let cells = eligible_cells(&p);
        assert!(!cells.contains(&Point::new(4, 4)));
        let marks = cvp_marks(&p);
        assert!(marks.contains(&(Point::new(4, 4), CvpKind::Parallelogram)));
    }

    #[test]
    fn eligible_cells_are_exact() {
        for p in all_placements(5).into_iter().filter(is_costas) {
            let eligible = eligible_cells(&p);
            for r in 1..=5u8 {
                for c in 1..=5u8 {
                    let pt = Point::new(r, c);
                    if let Ok(ext) = p.with_point(pt) {
                        assert_eq!(eligible.contains(&pt), is_costas(&ext), "{p:?} + {pt}");
                    }
                }
            }
        }
    }

    #[test]
    fn ledger_merge_is_a_sum() {
        let a = ComparisonLedger {
            candidates: 1,
            membership_tests: 2,
            comparisons: 3,
        };
        let b = ComparisonLedger {
            candidates: 10,
            membership_tests: 20,
            comparisons: 30,
        };
        let mut c = a;
        c.merge(&b);
        assert_eq!(c, a + b);
        assert_eq!([a, b].into_iter().sum::<ComparisonLedger>(), c);
    }

    fn arb_partial(max_n: usize) -> impl Strategy<Value = Placement> {
        (1usize..=max_n)
            .prop_flat_map(|n| {
                (
                    Just((1..=n as u8).collect::<Vec<_>>()).prop_shuffle(),
                    proptest::collection::vec(any::<bool>(), n),
                )
            })
            .prop_map(|(perm, keep)| {
                let v: Vec<u8> = perm
                    .iter()
                    .zip(keep)
                    .map(|(&c, k)| if k { c } else { 0 })
                    .collect();
                Placement::from_vector(&v).unwrap()
            })
    }

    proptest! {
        #[test]
        fn full_checks_agree_on_larger_boards(p in arb_partial(12)) {
            prop_assert_eq!(is_costas(&p), is_costas_by_correlation(&p));
        }

        #[test]
        fn rho_routes_agree_and_stay_below_binomial(p in arb_partial(12)) {
            let k = p.len() as u64;
            let r = rho(&p);
            prop_assert_eq!(r, rho_by_sparsity(&p));
            prop_assert_eq!(r, comparison_plan(&p).count() as u64);
            prop_assert!(r <= k * k.saturating_sub(1) * k.saturating_sub(2) / 6);
            prop_assert_eq!(difference_triangle(&p).total_entries() as u64, k * k.saturating_sub(1) / 2);
        }

        #[test]
        fn costas_is_closed_under_deletion(p in arb_partial(10), row in 1usize..=10) {
            if is_costas(&p) {
                prop_assert!(is_costas(&p.without_row(row)));
            }
        }
    }
}
