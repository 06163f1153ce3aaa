//! Recursive enumeration through the triangle of Costas-set families.
//!
//! `Phi(m, k)` is the set of placements of `k` points on an `m x m` board with
//! both the permutation and the Costas property. Any member of `Phi(m, k)` is
//! an `(m-1) x (m-1)` board plus zero, one or two points in the new region
//! (last row and last column), so
//!
//! ```text
//! Phi(m, k) <- Phi(m-1, k)   embedded as is
//!            + Phi(m-1, k-1) with one point anywhere free in the new region
//!            + Phi(m-1, k-2) with one point in the last row and one in the last column
//! ```
//!
//! The column-scheduled engine keeps a single live set per column `k`. At
//! step `n` the columns with the parity of `n` are refreshed in ascending
//! order, after which column `k` holds `Phi((n + k) / 2, k)` and column `n`
//! holds every Costas array of order `n`. Column 0 is the implicit singleton
//! holding the empty placement.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::board::{BoardError, Placement, Point, MAX_ORDER};
use crate::checker::{
    binom2, check_extremal, check_two_prepared, eligible_cells, is_costas, ComparisonLedger,
    Convention,
};
use crate::checkpoint::{self, CheckpointError};

/// Default memory budget for the live sets, 4 GiB.
pub const DEFAULT_MEMORY_BUDGET: u64 = 4 << 30;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("schedule violation: {0}")]
    Schedule(String),
    #[error("inconsistent extension: {0}")]
    Extension(String),
    #[error("order {0} is not supported (1..={max})", max = MAX_ORDER)]
    Order(usize),
    #[error(
        "memory budget exceeded before step {step}, column {k}: estimated {estimate} bytes, budget {budget} bytes{}",
        if *checkpointed { " (state checkpointed, rerun with the same checkpoint directory to resume)" } else { "" }
    )]
    MemoryBudget {
        step: usize,
        k: usize,
        estimate: u64,
        budget: u64,
        checkpointed: bool,
    },
    #[error("halted after {updates} column updates at step {step}, column {k}")]
    Halted {
        updates: usize,
        step: usize,
        k: usize,
    },
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Board(#[from] BoardError),
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    /// Worker threads; results never depend on this.
    pub jobs: usize,
    pub convention: Convention,
    /// Re-check every candidate with the full checker and enforce the
    /// per-candidate comparison caps.
    pub verify: bool,
    pub memory_budget: u64,
    /// Write one file per column update and resume from existing files.
    pub checkpoint_dir: Option<PathBuf>,
    /// Stop with [`EngineError::Halted`] after this many column updates.
    pub halt_after_updates: Option<usize>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            jobs: 1,
            convention: Convention::Strict,
            verify: false,
            memory_budget: DEFAULT_MEMORY_BUDGET,
            checkpoint_dir: None,
            halt_after_updates: None,
        }
    }
}

/// The live sets of the column recursion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhiColumnState {
    step: usize,
    /// Last column refreshed during the step after `step`, if that step has
    /// started.
    in_progress: Option<usize>,
    columns: BTreeMap<usize, Vec<Placement>>,
}

impl PhiColumnState {
    /// Step 1: column 1 holds the single point on the 1x1 board.
    pub fn bootstrap() -> Self {
        let single = Placement::new(1, [(1, 1)]).expect("valid bootstrap placement");
        PhiColumnState {
            step: 1,
            in_progress: None,
            columns: BTreeMap::from([(1, vec![single])]),
        }
    }

    pub(crate) fn from_parts(
        step: usize,
        in_progress: Option<usize>,
        columns: BTreeMap<usize, Vec<Placement>>,
    ) -> Self {
        PhiColumnState {
            step,
            in_progress,
            columns,
        }
    }

    /// Last fully completed step.
    pub fn step(&self) -> usize {
        self.step
    }

    pub fn in_progress(&self) -> Option<usize> {
        self.in_progress
    }

    pub fn column(&self, k: usize) -> Option<&[Placement]> {
        self.columns.get(&k).map(Vec::as_slice)
    }

    pub fn columns(&self) -> impl Iterator<Item = (usize, &[Placement])> {
        self.columns.iter().map(|(&k, v)| (k, v.as_slice()))
    }

    /// Number of sets currently retained; never more than one per column.
    pub fn retained_sets(&self) -> usize {
        self.columns.len()
    }

    pub fn retained_placements(&self) -> usize {
        self.columns.values().map(Vec::len).sum()
    }

    /// Board order of the placements held in column `k`.
    pub fn column_order(&self, k: usize) -> Option<usize> {
        self.columns.get(&k)?;
        let s = self.last_refresh(k);
        Some((s + k) / 2)
    }

    /// Step at which column `k` was last refreshed.
    fn last_refresh(&self, k: usize) -> usize {
        let building = self.step + 1;
        match self.in_progress {
            Some(last) if k % 2 == building % 2 && k <= last => building,
            _ if k % 2 == self.step % 2 => self.step,
            _ => self.step - 1,
        }
    }

    /// The column the schedule refreshes next, and the step it belongs to.
    pub fn next_update(&self) -> (usize, usize) {
        let building = self.step + 1;
        let k = match self.in_progress {
            Some(last) => last + 2,
            None => 2 - building % 2,
        };
        (building, k)
    }

    /// Costas arrays of order `step`, once that step is complete.
    pub fn arrays(&self) -> &[Placement] {
        match self.in_progress {
            None => self.column(self.step).unwrap_or(&[]),
            Some(_) => &[],
        }
    }
}

/// Per-update instrumentation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct UpdateRecord {
    pub step: usize,
    pub k: usize,
    pub order: usize,
    /// Sizes of the zero-, one- and two-point feeder sets.
    pub sources: [usize; 3],
    pub candidates: u64,
    pub admitted: usize,
    pub duplicates: usize,
    pub ledger: ComparisonLedger,
    /// Largest charge for a single one- and two-point candidate.
    pub max_charge: [u64; 2],
    /// Checked candidates, only counted in verify mode.
    pub verified: u64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: PhiColumnState,
    /// Updates executed by this invocation (a resumed run omits earlier ones).
    pub updates: Vec<UpdateRecord>,
    pub resumed_from: Option<usize>,
}

impl RunOutcome {
    pub fn arrays(&self) -> &[Placement] {
        self.state.arrays()
    }

    /// Ledger totals per step, i.e. the comparisons spent producing the
    /// arrays of each order.
    pub fn ledger_by_step(&self) -> BTreeMap<usize, ComparisonLedger> {
        let mut out: BTreeMap<usize, ComparisonLedger> = BTreeMap::new();
        for u in &self.updates {
            *out.entry(u.step).or_default() += u.ledger;
        }
        out
    }

    pub fn total_ledger(&self) -> ComparisonLedger {
        self.updates.iter().map(|u| u.ledger).sum()
    }

    /// Cardinalities `|Phi(m, k)|` observed as update outputs or feeders.
    pub fn observed_counts(&self) -> BTreeMap<(usize, usize), u64> {
        let mut out = BTreeMap::new();
        for u in &self.updates {
            out.insert((u.order, u.k), u.admitted as u64);
            for (j, &size) in u.sources.iter().enumerate() {
                if u.k >= j && u.order >= 1 {
                    out.entry((u.order - 1, u.k - j)).or_insert(size as u64);
                }
            }
        }
        out
    }
}

/// Candidates for `Phi(target_order, target_points)` obtained from one
/// member of `Phi(target_order - 1, target_points - new_points)`.
///
/// With `d = target_order - target_points`, one new point has `2d + 1`
/// positions and two new points have `(d + 1)^2`. Candidates are not checked.
pub fn extend(
    source: &Placement,
    new_points: usize,
    target_points: usize,
) -> Result<Vec<Placement>, EngineError> {
    let m = source.size() + 1;
    if m > MAX_ORDER {
        return Err(EngineError::Order(m));
    }
    if new_points > 2 || source.len() + new_points != target_points || target_points > m {
        return Err(EngineError::Extension(format!(
            "{} points plus {new_points} new cannot make {target_points} on order {m}",
            source.len()
        )));
    }
    let base = source.embed(m)?;
    let mut out = Vec::new();
    for_each_candidate(&base, new_points, |cand| {
        out.push(cand.placement());
    });
    Ok(out)
}

#[derive(Clone, Copy)]
enum Candidate {
    Embedded(Placement),
    /// New point in the last row (the row projection sees it as extremal).
    LastRow(Placement),
    /// New point in the last column, off the corner.
    LastCol(Placement),
    Pair {
        with_col: Placement,
        full: Placement,
    },
}

impl Candidate {
    fn placement(&self) -> Placement {
        match *self {
            Candidate::Embedded(p) | Candidate::LastRow(p) | Candidate::LastCol(p) => p,
            Candidate::Pair { full, .. } => full,
        }
    }
}

fn for_each_candidate(base: &Placement, new_points: usize, mut f: impl FnMut(Candidate)) {
    let m = base.size();
    let v = base.vector();
    let mut free_cols = [0u8; MAX_ORDER];
    let mut free_rows = [0u8; MAX_ORDER];
    let (mut nc, mut nr) = (0, 0);
    let mut used = [false; MAX_ORDER + 1];
    for &c in v {
        used[c as usize] = true;
    }
    for (c, _) in used.iter().enumerate().take(m).skip(1).filter(|(_, &u)| !u) {
        free_cols[nc] = c as u8;
        nc += 1;
    }
    for r in 1..m {
        if v[r - 1] == 0 {
            free_rows[nr] = r as u8;
            nr += 1;
        }
    }
    match new_points {
        0 => f(Candidate::Embedded(*base)),
        1 => {
            for &c in free_cols[..nc].iter().chain(std::iter::once(&(m as u8))) {
                f(Candidate::LastRow(base.with_point_unchecked(m, c)));
            }
            for &r in &free_rows[..nr] {
                f(Candidate::LastCol(
                    base.with_point_unchecked(r as usize, m as u8),
                ));
            }
        }
        _ => {
            for &r in &free_rows[..nr] {
                let with_col = base.with_point_unchecked(r as usize, m as u8);
                for &c in &free_cols[..nc] {
                    f(Candidate::Pair {
                        with_col,
                        full: with_col.with_point_unchecked(m, c),
                    });
                }
            }
        }
    }
}

struct ChunkResult {
    admitted: Vec<Placement>,
    ledger: ComparisonLedger,
    max_charge: [u64; 2],
    verified: u64,
    mismatch: Option<String>,
}

fn process_chunk(items: &[(u8, Placement)], convention: Convention, verify: bool) -> ChunkResult {
    let mut res = ChunkResult {
        admitted: Vec::new(),
        ledger: ComparisonLedger::default(),
        max_charge: [0, 0],
        verified: 0,
        mismatch: None,
    };
    for &(j, ref src) in items {
        let m = src.size() + 1;
        let base = src.embed(m).expect("feeder order below MAX_ORDER");
        let k = src.len() + j as usize;
        for_each_candidate(&base, j as usize, |cand| {
            res.ledger.candidates += 1;
            let before = res.ledger.comparisons;
            let (ok, slot, cap) = match cand {
                Candidate::Embedded(p) => {
                    res.admitted.push(p);
                    return;
                }
                Candidate::LastRow(p) => (
                    check_extremal(p.vector(), m, &mut res.ledger, convention),
                    0,
                    binom2(k - 1),
                ),
                Candidate::LastCol(p) => {
                    let t = p.transposed_vector();
                    (
                        check_extremal(&t[..m], m, &mut res.ledger, convention),
                        0,
                        binom2(k - 1),
                    )
                }
                Candidate::Pair { with_col, full } => (
                    check_two_prepared(&with_col, &full, m, &mut res.ledger, convention),
                    1,
                    ((k - 2) * (k - 2)) as u64,
                ),
            };
            let charged = res.ledger.comparisons - before;
            res.max_charge[slot] = res.max_charge[slot].max(charged);
            let p = cand.placement();
            if verify {
                res.verified += 1;
                if res.mismatch.is_none() {
                    if ok != is_costas(&p) {
                        res.mismatch = Some(format!("incremental check disagrees on {p}"));
                    } else if charged > cap {
                        res.mismatch =
                            Some(format!("{charged} comparisons exceed cap {cap} on {p}"));
                    }
                }
            }
            if ok {
                res.admitted.push(p);
            }
        });
    }
    res
}

/// Runs the column recursion.
#[derive(Debug)]
pub struct PhiEngine {
    config: EngineConfig,
    pool: Option<rayon::ThreadPool>,
}

impl PhiEngine {
    pub fn new(config: EngineConfig) -> Result<Self, EngineError> {
        let pool = if config.jobs > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(config.jobs)
                    .build()
                    .map_err(|e| EngineError::Schedule(format!("cannot start workers: {e}")))?,
            )
        } else {
            None
        };
        Ok(PhiEngine { config, pool })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    /// Builds `Phi(m, k)` from its three feeder sets (orders `m - 1`; points
    /// `k`, `k - 1`, `k - 2`). The feeders must already be Costas.
    pub fn build_set(
        &self,
        m: usize,
        k: usize,
        feeders: [&[Placement]; 3],
    ) -> Result<(Vec<Placement>, UpdateRecord), EngineError> {
        if m == 0 || m > MAX_ORDER {
            return Err(EngineError::Order(m));
        }
        for (j, feeder) in feeders.iter().enumerate() {
            if let Some(bad) = feeder
                .iter()
                .find(|p| p.size() != m - 1 || p.len() + j != k)
            {
                return Err(EngineError::Extension(format!(
                    "feeder {bad} cannot take {j} new points towards {k} points on order {m}"
                )));
            }
        }
        let items: Vec<(u8, Placement)> = feeders
            .iter()
            .enumerate()
            .flat_map(|(j, f)| f.iter().map(move |p| (j as u8, *p)))
            .collect();
        let (convention, verify) = (self.config.convention, self.config.verify);
        let chunks: Vec<ChunkResult> = match &self.pool {
            Some(pool) => {
                let chunk = (items.len() / (self.config.jobs * 16)).max(64);
                pool.install(|| {
                    items
                        .par_chunks(chunk)
                        .map(|c| process_chunk(c, convention, verify))
                        .collect()
                })
            }
            None => vec![process_chunk(&items, convention, verify)],
        };
        let mut record = UpdateRecord {
            order: m,
            k,
            sources: feeders.map(<[Placement]>::len),
            ..Default::default()
        };
        let mut set = Vec::with_capacity(chunks.iter().map(|c| c.admitted.len()).sum());
        for c in chunks {
            if let Some(msg) = c.mismatch {
                return Err(EngineError::Verification(msg));
            }
            record.ledger += c.ledger;
            record.verified += c.verified;
            for (slot, v) in c.max_charge.into_iter().enumerate() {
                record.max_charge[slot] = record.max_charge[slot].max(v);
            }
            set.extend(c.admitted);
        }
        set.sort_unstable();
        let before = set.len();
        set.dedup();
        record.duplicates = before - set.len();
        record.candidates = record.ledger.candidates;
        record.admitted = set.len();
        Ok((set, record))
    }

    /// Refreshes column `k`, which must be the next column in the schedule.
    pub fn update_column(
        &self,
        state: &mut PhiColumnState,
        k: usize,
    ) -> Result<UpdateRecord, EngineError> {
        let (step, expected) = state.next_update();
        if k != expected {
            return Err(EngineError::Schedule(format!(
                "step {step} expects column {expected} next, got {k}"
            )));
        }
        let m = (step + k) / 2;
        if m > MAX_ORDER {
            return Err(EngineError::Order(m));
        }
        let empty = [Placement::empty(m - 1)?];
        let feeder = |kk: Option<usize>| -> &[Placement] {
            match kk {
                Some(0) => &empty,
                Some(kk) => state.column(kk).unwrap_or(&[]),
                None => &[],
            }
        };
        let feeders = [
            feeder(Some(k)),
            feeder(k.checked_sub(1)),
            feeder(k.checked_sub(2)),
        ];
        let d = (m - k) as u64;
        let estimate = (feeders[0].len() as u64
            + (2 * d + 1) * feeders[1].len() as u64
            + (d + 1) * (d + 1) * feeders[2].len() as u64
            + state.retained_placements() as u64)
            * std::mem::size_of::<Placement>() as u64;
        if estimate > self.config.memory_budget {
            return Err(EngineError::MemoryBudget {
                step,
                k,
                estimate,
                budget: self.config.memory_budget,
                checkpointed: self.config.checkpoint_dir.is_some(),
            });
        }
        let (set, mut record) = self.build_set(m, k, feeders)?;
        record.step = step;
        if let Some(dir) = &self.config.checkpoint_dir {
            checkpoint::write_column(dir, step, k, &set)?;
        }
        state.columns.insert(k, set);
        if k + 2 > step {
            state.step = step;
            state.in_progress = None;
        } else {
            state.in_progress = Some(k);
        }
        Ok(record)
    }

    /// Runs (or resumes) the recursion through step `n`.
    pub fn run_to(&self, n: usize) -> Result<RunOutcome, EngineError> {
        if n == 0 || n > MAX_ORDER {
            return Err(EngineError::Order(n));
        }
        let (mut state, resumed_from) = match &self.config.checkpoint_dir {
            Some(dir) => match checkpoint::load_state(dir)? {
                Some(s) => {
                    let from = s.step();
                    (s, Some(from))
                }
                None => {
                    let s = PhiColumnState::bootstrap();
                    checkpoint::write_column(dir, 1, 1, s.column(1).unwrap())?;
                    (s, None)
                }
            },
            None => (PhiColumnState::bootstrap(), None),
        };
        if state.step() > n {
            return Err(EngineError::Schedule(format!(
                "checkpoint is already at step {}, beyond {n}",
                state.step()
            )));
        }
        let mut updates = Vec::new();
        while state.step() < n {
            let (step, k) = state.next_update();
            if self.config.halt_after_updates == Some(updates.len()) {
                return Err(EngineError::Halted {
                    updates: updates.len(),
                    step,
                    k,
                });
            }
            updates.push(self.update_column(&mut state, k)?);
        }
        Ok(RunOutcome {
            state,
            updates,
            resumed_from,
        })
    }

    /// Builds the state the recursion has after step `n` without running
    /// steps `2..n`: each diagonal set is grown point by point from its
    /// predecessor with [`eligible_cells`], and the next diagonal set is
    /// assembled from the resulting triple.
    pub fn direct_start(&self, n: usize) -> Result<PhiColumnState, EngineError> {
        if n == 0 || n > MAX_ORDER {
            return Err(EngineError::Order(n));
        }
        let r0 = n / 2;
        let m0 = n - r0;
        let mut cur = vec![Placement::empty(m0)?];
        if n - 2 * r0 == 1 {
            cur = grow(&cur).0;
        }
        let mut columns = BTreeMap::new();
        for r in (1..=r0).rev() {
            let (m, k) = (n - r, n - 2 * r);
            let g1 = grow(&cur).0;
            let g2 = grow(&g1).0;
            let (next, _) = self.build_set(m + 1, k + 2, [&g2, &g1, &cur])?;
            if k >= 1 {
                columns.insert(k, cur);
            }
            columns.insert(k + 1, g1);
            cur = next;
        }
        columns.insert(n, cur);
        Ok(PhiColumnState::from_parts(n, None, columns))
    }

    /// Builds full rows of the triangle of sets, calling `visit` with each
    /// row `[Phi(n, 0), ..., Phi(n, n)]` for `n = 1..=max_n`.
    pub fn for_each_row<F>(&self, max_n: usize, mut visit: F) -> Result<(), EngineError>
    where
        F: FnMut(usize, &[Vec<Placement>]),
    {
        if max_n > MAX_ORDER {
            return Err(EngineError::Order(max_n));
        }
        let mut prev: Vec<Vec<Placement>> = vec![vec![Placement::empty(0)?]];
        for n in 1..=max_n {
            let mut row = Vec::with_capacity(n + 1);
            for k in 0..=n {
                let get = |kk: Option<usize>| -> &[Placement] {
                    kk.and_then(|i| prev.get(i)).map_or(&[], Vec::as_slice)
                };
                let (set, _) = self.build_set(
                    n,
                    k,
                    [get(Some(k)), get(k.checked_sub(1)), get(k.checked_sub(2))],
                )?;
                row.push(set);
            }
            visit(n, &row);
            prev = row;
        }
        Ok(())
    }

    /// `C(n, k) = |Phi(n, k)|` for `0 <= k <= n <= max_n`, built row by row.
    pub fn c_rows(&self, max_n: usize) -> Result<Vec<Vec<u64>>, EngineError> {
        let mut rows = vec![vec![1]];
        self.for_each_row(max_n, |_, row| {
            rows.push(row.iter().map(|s| s.len() as u64).collect());
        })?;
        Ok(rows)
    }
}

/// `Phi(m, k+1)` from `Phi(m, k)` by adding every eligible cell, plus the
/// total number of eligible cells seen.
pub fn grow(set: &[Placement]) -> (Vec<Placement>, u64) {
    let mut out = Vec::new();
    let mut total = 0u64;
    for p in set {
        for Point { row, col } in eligible_cells(p) {
            total += 1;
            out.push(p.with_point_unchecked(row as usize, col));
        }
    }
    out.sort_unstable();
    out.dedup();
    (out, total)
}
