//! Inactivation decoding.
//!
//! [`triangularize`] runs the random-inactivation pivoting pass over the
//! bipartite graph and reports which inputs became resolvable and which
//! inactive. It touches no payloads, which makes it the fast path used by
//! the simulator. [`decode`] adds the matrix steps: assemble the permuted
//! system, zero out below the triangular block, solve the dense inactive
//! block by Gaussian elimination, then back-substitute.

use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{xor_into, BipartiteGraph, IndexedSet, InputState, ReducedView, Symbol};
use crate::matrix::{BinaryMatrix, RowOp};

/// What the decoder is choosing at a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChoiceKind {
    /// Pick a ripple symbol; candidates are output indices.
    Ripple,
    /// Pick an active input to inactivate; candidates are input indices.
    Inactivate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepRecord {
    /// Active inputs before the step.
    pub u: usize,
    pub ripple: usize,
    pub cloud: usize,
    pub inactivated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InactivationReport {
    pub k: usize,
    pub n_inactivations: usize,
    pub resolvable_order: Vec<usize>,
    /// Ripple symbol used to resolve each entry of `resolvable_order`.
    pub pivot_rows: Vec<usize>,
    /// Inactive inputs in the order they were inactivated.
    pub inactive_set: Vec<usize>,
    pub per_step: Vec<StepRecord>,
    /// Set by [`decode`]: whether the inactive block had full column rank.
    pub success: Option<bool>,
}

impl InactivationReport {
    /// Append `trial,u,r_u,c_u,inactivated` rows plus a `trial,total,,,N` row.
    pub fn write_csv_rows(&self, trial: u64, out: &mut String) {
        for s in &self.per_step {
            let _ = writeln!(
                out,
                "{trial},{},{},{},{}",
                s.u, s.ripple, s.cloud, s.inactivated as u8
            );
        }
        let _ = writeln!(out, "{trial},total,,,{}", self.n_inactivations);
    }

    pub const CSV_HEADER: &'static str = "trial,u,r_u,c_u,inactivated";
}

/// Triangularize with uniformly random ripple and inactivation choices.
pub fn triangularize<R: Rng + ?Sized>(graph: &BipartiteGraph, rng: &mut R) -> InactivationReport {
    triangularize_with(graph, |_, candidates| rng.random_range(0..candidates.len()))
}

/// Triangularize with an explicit choice rule. `choose` receives the
/// candidate set and returns a position in its current order.
pub fn triangularize_with(
    graph: &BipartiteGraph,
    mut choose: impl FnMut(ChoiceKind, &IndexedSet) -> usize,
) -> InactivationReport {
    let k = graph.k();
    let mut view = ReducedView::new(graph);
    let mut report = InactivationReport {
        k,
        n_inactivations: 0,
        resolvable_order: Vec::with_capacity(k),
        pivot_rows: Vec::with_capacity(k),
        inactive_set: Vec::new(),
        per_step: Vec::with_capacity(k),
        success: None,
    };
    for u in (1..=k).rev() {
        let ripple = view.ripple().len();
        let cloud = view.cloud().len();
        debug_assert_eq!(view.active().len(), u);
        let inactivated = ripple == 0;
        if inactivated {
            let pos = choose(ChoiceKind::Inactivate, view.active());
            let v = view.active().get(pos);
            view.remove_input(v, InputState::Inactive)
                .expect("chosen input is active");
            report.inactive_set.push(v);
        } else {
            let pos = choose(ChoiceKind::Ripple, view.ripple());
            let c = view.ripple().get(pos);
            let v = view.ripple_neighbor(c).expect("ripple symbol has one active neighbor");
            view.remove_input(v, InputState::Resolvable)
                .expect("ripple neighbor is active");
            report.resolvable_order.push(v);
            report.pivot_rows.push(c);
        }
        report.per_step.push(StepRecord {
            u,
            ripple,
            cloud,
            inactivated,
        });
    }
    report.n_inactivations = report.inactive_set.len();
    report
}

/// Generator matrix with rows and columns permuted into the block layout
///
/// ```text
///        resolvable  inactive
///      [    A     |    C    ]   pivot rows
///      [    B     |    D    ]   remaining rows
/// ```
///
/// where `A` is lower triangular with a unit diagonal.
#[derive(Debug, Clone)]
pub struct PartitionedSystem {
    pub matrix: BinaryMatrix,
    /// `row_order[i]` is the original output index placed at row `i`.
    pub row_order: Vec<usize>,
    /// `col_order[j]` is the original input index placed at column `j`.
    pub col_order: Vec<usize>,
    pub n_resolvable: usize,
    pub n_inactive: usize,
}

impl PartitionedSystem {
    pub fn a_block(&self) -> BinaryMatrix {
        let r = self.n_resolvable;
        self.matrix.submatrix(0, r, 0, r)
    }

    pub fn b_block(&self) -> BinaryMatrix {
        let r = self.n_resolvable;
        self.matrix.submatrix(r, self.matrix.rows(), 0, r)
    }

    pub fn c_block(&self) -> BinaryMatrix {
        let r = self.n_resolvable;
        self.matrix.submatrix(0, r, r, self.matrix.cols())
    }

    /// Bottom-right block; after [`PartitionedSystem::zero_below`] this is `C'`.
    pub fn d_block(&self) -> BinaryMatrix {
        let r = self.n_resolvable;
        self.matrix
            .submatrix(r, self.matrix.rows(), r, self.matrix.cols())
    }

    /// Original output indices of the rows of the bottom block, i.e. the
    /// rows whose known terms feed the inactive-variable system.
    pub fn cprime_rows(&self) -> &[usize] {
        &self.row_order[self.n_resolvable..]
    }

    /// Received symbols reordered to match `row_order`.
    pub fn permute_known(&self, received: &[Symbol]) -> Vec<Symbol> {
        self.row_order.iter().map(|&i| received[i].clone()).collect()
    }

    /// Diagonalize `A` and clear `B` using only row XORs, mirrored on `known`.
    pub fn zero_below(&mut self, known: &mut [Symbol]) {
        let r = self.n_resolvable;
        let rows = self.matrix.rows();
        let apply = |m: &mut BinaryMatrix, known: &mut [Symbol], src: usize, dst: usize| {
            m.xor_row(src, dst);
            if !known.is_empty() {
                let (s, d) = pick_two(known, src, dst);
                xor_into(d, s);
            }
        };
        for i in 0..r {
            for j in 0..i {
                if self.matrix.get(i, j) {
                    apply(&mut self.matrix, known, j, i);
                }
            }
        }
        for row in r..rows {
            for j in 0..r {
                if self.matrix.get(row, j) {
                    apply(&mut self.matrix, known, j, row);
                }
            }
        }
    }

    /// Recover all source symbols from the inactive-variable solution.
    /// Expects [`PartitionedSystem::zero_below`] to have run on `known`.
    pub fn back_substitute(&self, known: &[Symbol], inactive: &[Symbol]) -> Vec<Symbol> {
        let r = self.n_resolvable;
        let k = self.col_order.len();
        let width = known.first().or(inactive.first()).map_or(0, Vec::len);
        let mut source = vec![Vec::new(); k];
        for (j, sol) in inactive.iter().enumerate() {
            source[self.col_order[r + j]] = sol.clone();
        }
        for i in 0..r {
            let mut v = known[i].clone();
            v.resize(width, 0);
            for (j, sol) in inactive.iter().enumerate() {
                if self.matrix.get(i, r + j) {
                    xor_into(&mut v, sol);
                }
            }
            source[self.col_order[i]] = v;
        }
        source
    }
}

fn pick_two<T>(v: &mut [T], src: usize, dst: usize) -> (&T, &mut T) {
    assert_ne!(src, dst);
    if src < dst {
        let (lo, hi) = v.split_at_mut(dst);
        (&lo[src], &mut hi[0])
    } else {
        let (lo, hi) = v.split_at_mut(src);
        (&hi[0], &mut lo[dst])
    }
}

/// Lay out `G` in the permuted block form described by `report`.
pub fn assemble_permuted(
    graph: &BipartiteGraph,
    report: &InactivationReport,
) -> Result<PartitionedSystem> {
    let k = graph.k();
    let m = graph.m();
    let bad = |msg: &str| Err(Error::InconsistentReport(msg.to_string()));
    if report.k != k {
        return bad("k differs");
    }
    if report.resolvable_order.len() != report.pivot_rows.len() {
        return bad("pivot row count differs from resolvable count");
    }
    if report.resolvable_order.len() + report.inactive_set.len() != k {
        return bad("resolvable + inactive != k");
    }
    let mut col_pos = vec![usize::MAX; k];
    let col_order: Vec<usize> = report
        .resolvable_order
        .iter()
        .chain(&report.inactive_set)
        .copied()
        .collect();
    for (j, &v) in col_order.iter().enumerate() {
        if v >= k || col_pos[v] != usize::MAX {
            return bad("input indices are not a permutation of 0..k");
        }
        col_pos[v] = j;
    }
    let mut used = vec![false; m];
    for &c in &report.pivot_rows {
        if c >= m || used[c] {
            return bad("pivot rows out of range or repeated");
        }
        used[c] = true;
    }
    let mut row_order = report.pivot_rows.clone();
    row_order.extend((0..m).filter(|&c| !used[c]));

    let mut matrix = BinaryMatrix::zeros(m, k);
    for (i, &c) in row_order.iter().enumerate() {
        for &v in graph.neighbors(c) {
            matrix.set(i, col_pos[v as usize], true);
        }
    }
    let r = report.resolvable_order.len();
    for i in 0..r {
        if !matrix.get(i, i) || (i + 1..r).any(|j| matrix.get(i, j)) {
            return bad("triangular block is not lower triangular with unit diagonal");
        }
    }
    Ok(PartitionedSystem {
        matrix,
        row_order,
        col_order,
        n_resolvable: r,
        n_inactive: report.inactive_set.len(),
    })
}

/// Solve `cprime * x = known` for the inactive variables.
pub fn ge_solve(cprime: &BinaryMatrix, known: &[Symbol]) -> Result<Vec<Symbol>> {
    if cprime.rows() != known.len() {
        return Err(Error::LengthMismatch {
            expected: cprime.rows(),
            actual: known.len(),
        });
    }
    let needed = cprime.cols();
    let mut m = cprime.clone();
    let mut rhs = known.to_vec();
    let rank = m.eliminate(|op| match op {
        RowOp::Swap(a, b) => rhs.swap(a, b),
        RowOp::Xor { src, dst } => {
            let (s, d) = pick_two(&mut rhs, src, dst);
            xor_into(d, s);
        }
    });
    if rank < needed {
        return Err(Error::RankDeficient { rank, needed });
    }
    rhs.truncate(needed);
    Ok(rhs)
}

#[derive(Debug)]
pub struct DecodeOutcome {
    /// Recovered source, or [`Error::RankDeficient`].
    pub source: Result<Vec<Symbol>>,
    pub report: InactivationReport,
}

impl DecodeOutcome {
    pub fn is_success(&self) -> bool {
        self.source.is_ok()
    }
}

/// Full inactivation decoder. Rank deficiency is reported in the outcome,
/// not as an error; errors are reserved for malformed input.
pub fn decode<R: Rng + ?Sized>(
    graph: &BipartiteGraph,
    received: &[Symbol],
    rng: &mut R,
) -> Result<DecodeOutcome> {
    if received.len() != graph.m() {
        return Err(Error::LengthMismatch {
            expected: graph.m(),
            actual: received.len(),
        });
    }
    let width = received.first().map_or(0, Vec::len);
    if let Some(bad) = received.iter().find(|s| s.len() != width) {
        return Err(Error::SymbolSizeMismatch {
            expected: width,
            actual: bad.len(),
        });
    }
    let mut report = triangularize(graph, rng);
    let mut system = assemble_permuted(graph, &report)?;
    let mut known = system.permute_known(received);
    system.zero_below(&mut known);
    let r = system.n_resolvable;
    let cprime = system.d_block();
    let source = ge_solve(&cprime, &known[r..])
        .map(|inactive| system.back_substitute(&known[..r], &inactive));
    report.success = Some(source.is_ok());
    Ok(DecodeOutcome { source, report })
}
