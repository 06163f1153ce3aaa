//! Closed-form counts, bounds and the efficiency report.
//!
//! All counts are exact integers. Lookups of `C(n, k)` outside `0..=k..=n`
//! are zero, and so are `C(x, 2)` and `x^2` for negative `x`; that single
//! convention covers every boundary term below.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::oracle::ChiCensus;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyticsError {
    #[error("C({n}, {k}) is needed but has not been computed")]
    MissingCell { n: usize, k: usize },
    #[error("chi census for order {0} is missing")]
    MissingCensus(usize),
    #[error("{0}")]
    Input(String),
}

/// Exact counts `C(n, k)`, possibly only partly populated.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CTriangle {
    cells: BTreeMap<(usize, usize), u64>,
}

impl CTriangle {
    pub fn new() -> Self {
        Self::default()
    }

    /// From full rows, `rows[n] = [C(n, 0), ..., C(n, n)]`.
    pub fn from_rows(rows: &[Vec<u64>]) -> Self {
        let mut t = Self::new();
        for (n, row) in rows.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                t.insert(n, k, v);
            }
        }
        t
    }

    pub fn from_cells(cells: impl IntoIterator<Item = ((usize, usize), u64)>) -> Self {
        CTriangle {
            cells: cells.into_iter().collect(),
        }
    }

    pub fn insert(&mut self, n: usize, k: usize, value: u64) {
        self.cells.insert((n, k), value);
    }

    /// `C(n, k)`: zero outside the triangle, one for `k = 0`.
    pub fn get(&self, n: i64, k: i64) -> Result<u64, AnalyticsError> {
        if n < 0 || k < 0 || k > n {
            return Ok(0);
        }
        if k == 0 {
            return Ok(1);
        }
        self.cells
            .get(&(n as usize, k as usize))
            .copied()
            .ok_or(AnalyticsError::MissingCell {
                n: n as usize,
                k: k as usize,
            })
    }

    pub fn cells(&self) -> impl Iterator<Item = ((usize, usize), u64)> + '_ {
        self.cells.iter().map(|(&key, &v)| (key, v))
    }

    pub fn row(&self, n: usize) -> Option<Vec<u64>> {
        (0..=n)
            .map(|k| self.cells.get(&(n, k)).copied().or((k == 0).then_some(1)))
            .collect()
    }

    /// `n,k,C` CSV for every row in `rows` that is fully populated.
    pub fn to_csv(&self, rows: std::ops::RangeInclusive<usize>) -> String {
        let mut out = String::from("n,k,C\n");
        for n in rows {
            if let Some(row) = self.row(n) {
                for (k, v) in row.iter().enumerate() {
                    let _ = writeln!(out, "{n},{k},{v}");
                }
            }
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Self, AnalyticsError> {
        let mut t = Self::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            let parsed: Option<Vec<u64>> = fields.iter().map(|f| f.trim().parse().ok()).collect();
            match parsed.as_deref() {
                Some([n, k, c]) => t.insert(*n as usize, *k as usize, *c),
                _ => return Err(AnalyticsError::Input(format!("line {}: `{line}`", i + 1))),
            }
        }
        Ok(t)
    }
}

fn choose2(x: i64) -> u64 {
    if x < 2 {
        0
    } else {
        (x * (x - 1) / 2) as u64
    }
}

fn square(x: i64) -> u64 {
    if x < 0 {
        0
    } else {
        (x * x) as u64
    }
}

/// `f(n, m)`: candidates the recursion generates for `Phi(n, m)`, with
/// `k = n - m`:
/// `C(n-1, m) + (2k+1) C(n-1, m-1) + (k+1)^2 C(n-1, m-2)`.
pub fn candidate_count(n: usize, m: usize, t: &CTriangle) -> Result<u64, AnalyticsError> {
    let (n, m) = (n as i64, m as i64);
    let k = n - m;
    if k < 0 {
        return Ok(0);
    }
    let k = k as u64;
    Ok(t.get(n - 1, m)?
        + (2 * k + 1) * t.get(n - 1, m - 1)?
        + (k + 1) * (k + 1) * t.get(n - 1, m - 2)?)
}

/// Upper bound on the comparisons spent building `Phi(n, m)`, `k = n - m`:
/// `(2k+1) C(n-k-1, 2) C(n-1, n-k-1) + (k+1)^2 (n-k-2)^2 C(n-1, n-k-2)`.
pub fn fu_bound(n: usize, m: usize, t: &CTriangle) -> Result<u64, AnalyticsError> {
    let (n, m) = (n as i64, m as i64);
    let k = n - m;
    if k < 0 {
        return Ok(0);
    }
    let one = (2 * k + 1) as u64 * choose2(n - k - 1);
    let two = ((k + 1) * (k + 1)) as u64 * square(n - k - 2);
    let mut total = 0;
    if one != 0 {
        total += one * t.get(n - 1, n - k - 1)?;
    }
    if two != 0 {
        total += two * t.get(n - 1, n - k - 2)?;
    }
    Ok(total)
}

/// Upper bound on all comparisons of step `n`:
/// `sum_{r=0}^{n/2} fu_bound(n - r, n - 2r)`.
pub fn f_rec_upper(n: usize, t: &CTriangle) -> Result<u64, AnalyticsError> {
    (0..=n / 2).map(|r| fu_bound(n - r, n - 2 * r, t)).sum()
}

/// Comparisons of an exhaustive search, `C(n, 3) n!`.
pub fn f_exhaustive(n: usize) -> BigUint {
    let n_big = BigUint::from(n);
    let fact: BigUint = (1..=n).map(BigUint::from).product();
    if n < 3 {
        return BigUint::from(0u32);
    }
    let choose3 = &n_big * (&n_big - 1u32) * (&n_big - 2u32) / 6u32;
    choose3 * fact
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `k! C(n, k)^2`, the number of `k`-point partial permutations.
pub fn partial_permutation_count(n: usize, k: usize) -> u128 {
    let fact: u128 = (1..=k as u128).product();
    let b = binomial(n as u64, k as u64);
    fact * b * b
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PartialCountReport {
    pub cells_checked: usize,
    /// Cells with `C(n, k) > k! C(n, k)^2`.
    pub violations: Vec<(usize, usize, u64, u128)>,
    /// Cells with `k <= 2` where equality fails.
    pub equality_failures: Vec<(usize, usize, u64, u128)>,
}

impl PartialCountReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty() && self.equality_failures.is_empty()
    }
}

/// Checks `C(n, k) <= k! C(n, k)^2` on every populated cell, with equality
/// required for `k <= 2`.
pub fn check_partial_count_bound(t: &CTriangle) -> PartialCountReport {
    let mut report = PartialCountReport::default();
    for ((n, k), c) in t.cells() {
        report.cells_checked += 1;
        let bound = partial_permutation_count(n, k);
        if c as u128 > bound {
            report.violations.push((n, k, c, bound));
        }
        if k <= 2 && c as u128 != bound {
            report.equality_failures.push((n, k, c, bound));
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RemovalBoundRow {
    pub k: usize,
    /// `C(n, n-k)`.
    pub lhs: u64,
    /// `(n-k+1) C(n, n-k+1) + 4^k |S_{chi=k}|`.
    pub rhs: u64,
    pub census: u64,
    pub holds: bool,
}

impl RemovalBoundRow {
    pub fn margin(&self) -> i64 {
        self.rhs as i64 - self.lhs as i64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RemovalBoundReport {
    pub n: usize,
    pub rows: Vec<RemovalBoundRow>,
    /// `k > n/3` values with a non-zero census count.
    pub nonzero_beyond_third: Vec<(usize, u64)>,
}

impl RemovalBoundReport {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| r.holds) && self.nonzero_beyond_third.is_empty()
    }
}

/// Checks `C(n, n-k) < (n-k+1) C(n, n-k+1) + 4^k |S_{chi=k}|` for
/// `1 <= k <= n/3`, and that no permutation needs more than `n/3` removals.
pub fn check_removal_bound(
    n: usize,
    t: &CTriangle,
    census: Option<&ChiCensus>,
) -> Result<RemovalBoundReport, AnalyticsError> {
    let census = census
        .filter(|c| c.order == n)
        .ok_or(AnalyticsError::MissingCensus(n))?;
    let mut rows = Vec::new();
    for k in 1..=n / 3 {
        let lhs = t.get(n as i64, (n - k) as i64)?;
        let s = census.count(k);
        let rhs =
            (n - k + 1) as u64 * t.get(n as i64, (n - k + 1) as i64)? + 4u64.pow(k as u32) * s;
        rows.push(RemovalBoundRow {
            k,
            lhs,
            rhs,
            census: s,
            holds: lhs < rhs,
        });
    }
    let nonzero_beyond_third = census
        .histogram
        .iter()
        .enumerate()
        .filter(|&(k, &v)| 3 * k > n && v != 0)
        .map(|(k, &v)| (k, v))
        .collect();
    Ok(RemovalBoundReport {
        n,
        rows,
        nonzero_beyond_third,
    })
}

/// Ordinary least-squares line `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// `None` with fewer than three points.
pub fn fit_line(points: &[(f64, f64)]) -> Option<LineFit> {
    if points.len() < 3 {
        return None;
    }
    let len = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / len;
    let my = points.iter().map(|p| p.1).sum::<f64>() / len;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Some(LineFit {
        intercept,
        slope,
        r_squared,
        points: points.len(),
    })
}

/// Measured comparisons of the recursion for one order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MeasuredComparisons {
    pub n: usize,
    pub strict: u64,
    pub early_exit: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub n: usize,
    pub f_rec: u64,
    pub f_rec_early_exit: Option<u64>,
    pub f_rec_upper: Option<u64>,
    pub f_ex: u128,
    pub ratio_rec_ex: f64,
    pub ratio_upper_ex: Option<f64>,
    pub growth_rec: Option<f64>,
    pub growth_ex: Option<f64>,
    /// Direct evaluation of `(f_ex(n) - n^2) / (f_ex(n-1) - (n-3)^2)`.
    pub ex_growth_direct: Option<f64>,
    /// The same column as printed in the reference table.
    pub ex_growth_published: Option<f64>,
    /// `a(n) = ratio(n-1) / ratio(n)`.
    pub decrement_rate: Option<f64>,
    pub f_rec_published: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extrapolation {
    pub n: usize,
    pub reduction_factor: f64,
    pub status: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfficiencyReport {
    pub rows: Vec<ReportRow>,
    /// Least-squares line through `a(4) ..= a(max_n)`.
    pub decrement_fit: Option<LineFit>,
    pub extrapolations: Vec<Extrapolation>,
}

pub const EXTRAPOLATION_STATUS: &str = "extrapolation, not validated";

/// Builds the report. `triangle` supplies the upper-bound column where its
/// cells are available; `published` supplies the side-by-side columns.
pub fn efficiency_report(
    measured: &[MeasuredComparisons],
    triangle: Option<&CTriangle>,
    published: &[PublishedRow],
    extrapolate_to: &[usize],
) -> Result<EfficiencyReport, AnalyticsError> {
    let mut measured = measured.to_vec();
    measured.sort_by_key(|m| m.n);
    let by_n: BTreeMap<usize, MeasuredComparisons> = measured.iter().map(|m| (m.n, *m)).collect();
    let pub_by_n: BTreeMap<usize, &PublishedRow> = published.iter().map(|p| (p.n, p)).collect();
    let ex = |n: usize| -> Result<u128, AnalyticsError> {
        f_exhaustive(n).to_u128().ok_or_else(|| {
            AnalyticsError::Input(format!(
                "exhaustive count for order {n} overflows the report"
            ))
        })
    };
    let mut rows = Vec::new();
    for m in &measured {
        let n = m.n;
        let f_ex = ex(n)?;
        let upper = match triangle {
            Some(t) => match f_rec_upper(n, t) {
                Ok(v) => Some(v),
                Err(AnalyticsError::MissingCell { .. }) => None,
                Err(e) => return Err(e),
            },
            None => None,
        };
        let ratio = |v: u64| v as f64 / f_ex as f64;
        let prev = n.checked_sub(1).and_then(|p| by_n.get(&p));
        let (growth_rec, growth_ex, decrement_rate, ex_growth_direct) = match prev {
            Some(p) if n >= 4 => {
                let f_ex_prev = ex(p.n)?;
                let direct = (f_ex as f64 - (n * n) as f64)
                    / (f_ex_prev as f64 - ((n - 3) * (n - 3)) as f64);
                (
                    Some(m.strict as f64 / p.strict as f64),
                    Some(f_ex as f64 / f_ex_prev as f64),
                    Some((p.strict as f64 / f_ex_prev as f64) / ratio(m.strict)),
                    Some(direct),
                )
            }
            _ => (None, None, None, None),
        };
        rows.push(ReportRow {
            n,
            f_rec: m.strict,
            f_rec_early_exit: m.early_exit,
            f_rec_upper: upper,
            f_ex,
            ratio_rec_ex: ratio(m.strict),
            ratio_upper_ex: upper.map(ratio),
            growth_rec,
            growth_ex,
            ex_growth_direct,
            ex_growth_published: pub_by_n.get(&n).and_then(|p| p.ex_growth),
            decrement_rate,
            f_rec_published: pub_by_n.get(&n).map(|p| p.f_rec),
        });
    }
    let fit_points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.n >= 4)
        .filter_map(|r| r.decrement_rate.map(|a| (r.n as f64, a)))
        .collect();
    let decrement_fit = fit_line(&fit_points);
    let mut extrapolations = Vec::new();
    if let (Some(fit), Some(last)) = (decrement_fit, rows.last()) {
        for &target in extrapolate_to.iter().filter(|&&t| t > last.n) {
            let factor = ((last.n + 1)..=target).fold(last.ratio_rec_ex, |acc, j| {
                acc / (fit.intercept + fit.slope * j as f64)
            });
            extrapolations.push(Extrapolation {
                n: target,
                reduction_factor: factor,
                status: EXTRAPOLATION_STATUS,
            });
        }
    }
    Ok(EfficiencyReport {
        rows,
        decrement_fit,
        extrapolations,
    })
}

pub const REPORT_CSV_HEADER: &str = "n,f_rec,f_rec_upper,f_ex,ratio_rec_ex,ratio_upper_ex,growth_rec,ex_growth_direct,ex_growth_published,f_rec_early_exit,decrement_rate,f_rec_published";

impl EfficiencyReport {
    pub fn to_csv(&self) -> String {
        fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
            v.map_or_else(|| "-".to_string(), |v| v.to_string())
        }
        fn ratio(v: Option<f64>) -> String {
            v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"))
        }
        let mut out = String::from(REPORT_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.4},{},{},{},{},{},{},{}",
                r.n,
                r.f_rec,
                opt(r.f_rec_upper),
                r.f_ex,
                r.ratio_rec_ex,
                ratio(r.ratio_upper_ex),
                ratio(r.growth_rec),
                ratio(r.ex_growth_direct),
                ratio(r.ex_growth_published),
                opt(r.f_rec_early_exit),
                ratio(r.decrement_rate),
                opt(r.f_rec_published),
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// One row of the published comparison-count table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PublishedRow {
    pub n: usize,
    pub f_rec: u64,
    pub f_rec_upper: u64,
    pub f_ex: u64,
    pub ratio_rec_ex: f64,
    pub ratio_upper_ex: f64,
    pub growth_rec: Option<f64>,
    pub ex_growth: Option<f64>,
}

pub const PUBLISHED_C_TRIANGLE_CSV: &str = include_str!("../data/c_triangle_published.csv");
pub const PUBLISHED_COMPARISONS_CSV: &str = include_str!("../data/comparison_counts_published.csv");

pub fn published_c_triangle() -> CTriangle {
    CTriangle::parse_csv(PUBLISHED_C_TRIANGLE_CSV).expect("bundled table parses")
}

pub fn published_comparisons() -> Vec<PublishedRow> {
    let opt = |s: &str| s.parse::<f64>().ok();
    PUBLISHED_COMPARISONS_CSV
        .lines()
        .skip(1)
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            PublishedRow {
                n: f[0].parse().expect("bundled table parses"),
                f_rec: f[1].parse().expect("bundled table parses"),
                f_rec_upper: f[2].parse().expect("bundled table parses"),
                f_ex: f[3].parse().expect("bundled table parses"),
                ratio_rec_ex: f[4].parse().expect("bundled table parses"),
                ratio_upper_ex: f[5].parse().expect("bundled table parses"),
                growth_rec: opt(f[6]),
                ex_growth: opt(f[7]),
            }
        })
        .collect()
}

/// Measured rows taken from the published table, for reproducing its
/// derived columns and fit.
pub fn published_measurements() -> Vec<MeasuredComparisons> {
    published_comparisons()
        .iter()
        .map(|p| MeasuredComparisons {
            n: p.n,
            strict: p.f_rec,
            early_exit: None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> CTriangle {
        published_c_triangle()
    }

    #[test]
    fn lookup_conventions() {
        let t = table();
        assert_eq!(t.get(3, -1).unwrap(), 0);
        assert_eq!(t.get(3, 4).unwrap(), 0);
        assert_eq!(t.get(-1, 0).unwrap(), 0);
        assert_eq!(t.get(12, 0).unwrap(), 1);
        assert_eq!(t.get(6, 6).unwrap(), 116);
        assert_eq!(t.get(8, 3), Err(AnalyticsError::MissingCell { n: 8, k: 3 }));
    }

    #[test]
    fn candidate_counts() {
        let t = table();
        assert_eq!(candidate_count(4, 4, &t).unwrap(), 22);
        for n in 3..=7 {
            assert_eq!(candidate_count(n, 0, &t).unwrap(), 1);
        }
        // the boundary form f(n, n) = C(n-1, n-1) + C(n-1, n-2)
        for n in 2..=7 {
            let direct = t.get(n - 1, n - 1).unwrap() + t.get(n - 1, n - 2).unwrap();
            assert_eq!(candidate_count(n as usize, n as usize, &t).unwrap(), direct);
        }
    }

    #[test]
    fn upper_bound_cells() {
        let t = table();
        assert_eq!(fu_bound(3, 3, &t).unwrap(), 6);
        assert_eq!(fu_bound(4, 4, &t).unwrap(), 84);
        assert_eq!(fu_bound(2, 1, &t).unwrap(), 0);
        assert_eq!(f_rec_upper(3, &t).unwrap(), 6);
    }

    #[test]
    fn upper_bound_column_from_published_cells() {
        // the published cells (rows <= 7) reproduce the published bound for n <= 8
        let t = table();
        let published = published_comparisons();
        for row in published.iter().filter(|r| r.n <= 8) {
            assert_eq!(
                f_rec_upper(row.n, &t).unwrap(),
                row.f_rec_upper,
                "n = {}",
                row.n
            );
        }
    }

    #[test]
    fn exhaustive_counts() {
        assert_eq!(f_exhaustive(2), BigUint::from(0u32));
        assert_eq!(f_exhaustive(4), BigUint::from(96u32));
        assert_eq!(f_exhaustive(8), BigUint::from(2_257_920u32));
        // beyond 64 bits without loss
        let big = f_exhaustive(25);
        assert_eq!(big.to_string(), "35675783099661267763200000000");
    }

    #[test]
    fn partial_count_values() {
        assert_eq!(partial_permutation_count(5, 2), 200);
        assert_eq!(partial_permutation_count(4, 3), 96);
        assert_eq!(partial_permutation_count(9, 0), 1);
        let mut t = table();
        t.insert(5, 4, 420);
        assert!(check_partial_count_bound(&t).holds());
        t.insert(4, 3, 97);
        assert!(!check_partial_count_bound(&t).holds());
    }

    #[test]
    fn removal_bound_order_three() {
        let census = ChiCensus {
            order: 3,
            histogram: vec![4, 2],
        };
        let r = check_removal_bound(3, &table(), Some(&census)).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!((r.rows[0].lhs, r.rows[0].rhs), (18, 20));
        assert!(r.holds());
        assert!(matches!(
            check_removal_bound(4, &table(), Some(&census)),
            Err(AnalyticsError::MissingCensus(4))
        ));
    }

    #[test]
    fn ols_recovers_exact_line() {
        let pts: Vec<(f64, f64)> = (0..5).map(|x| (x as f64, 2.0 + 0.5 * x as f64)).collect();
        let fit = fit_line(&pts).unwrap();
        assert!((fit.intercept - 2.0).abs() < 1e-12 && (fit.slope - 0.5).abs() < 1e-12);
        assert!(fit_line(&pts[..2]).is_none());
    }

    #[test]
    fn report_from_published_measurements() {
        let published = published_comparisons();
        let report = efficiency_report(
            &published_measurements(),
            Some(&table()),
            &published,
            &[32, 33],
        )
        .unwrap();
        let last = report.rows.last().unwrap();
        assert_eq!(last.n, 10);
        assert!((last.ratio_rec_ex - 0.0581).abs() < 5e-5);
        for pair in report.rows.windows(2) {
            assert!(pair[1].ratio_rec_ex < pair[0].ratio_rec_ex);
        }
        for (row, p) in report.rows.iter().zip(&published) {
            assert_eq!(row.f_ex, p.f_ex as u128);
            assert!((row.ratio_rec_ex - p.ratio_rec_ex).abs() < 5e-5);
            // the printed growth at n = 10 (7.7400) disagrees with its own counts
            if let (Some(g), Some(pg)) = (row.growth_rec, p.growth_rec.filter(|_| p.n < 10)) {
                assert!((g - pg).abs() < 5e-5, "n = {}", row.n);
            }
        }
        assert_eq!(report.extrapolations.len(), 2);
        assert!(report
            .extrapolations
            .iter()
            .all(|e| e.status == EXTRAPOLATION_STATUS));
        let csv = report.to_csv();
        assert!(csv.starts_with(REPORT_CSV_HEADER));
        assert_eq!(csv.lines().count(), 9);
    }

    #[test]
    fn triangle_csv_round_trip() {
        let t = table();
        assert_eq!(t.to_csv(1..=7), PUBLISHED_C_TRIANGLE_CSV);
    }

    #[test]
    fn instrumentation_matches_formulas() {
        use crate::{Convention, EngineConfig, PhiEngine};
        let run = |convention| {
            PhiEngine::new(EngineConfig {
                convention,
                ..Default::default()
            })
            .unwrap()
            .run_to(8)
            .unwrap()
        };
        let (strict, early) = (run(Convention::Strict), run(Convention::EarlyExit));
        let t = CTriangle::from_rows(
            &PhiEngine::new(EngineConfig::default())
                .unwrap()
                .c_rows(7)
                .unwrap(),
        );
        for u in &strict.updates {
            assert_eq!(u.candidates, candidate_count(u.order, u.k, &t).unwrap());
        }
        let early = early.ledger_by_step();
        for (n, ledger) in strict.ledger_by_step() {
            assert!(ledger.comparisons <= f_rec_upper(n, &t).unwrap(), "n = {n}");
            assert!(early[&n].comparisons <= ledger.comparisons);
        }
    }
}
