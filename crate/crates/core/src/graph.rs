//! LT code instances as bipartite graphs.
//!
//! Output symbols are the rows of the generator matrix `G` (m x k), input
//! symbols its columns. [`BipartiteGraph`] is immutable once built;
//! [`ReducedView`] tracks the shrinking set of active inputs during
//! triangularization and keeps ripple and cloud membership up to date.

use std::fmt::Write as _;

use rand::Rng;

use crate::degree::DegreeDistribution;
use crate::error::{Error, Result};

/// A symbol payload. All symbols handed to one call must share a length.
pub type Symbol = Vec<u8>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    k: usize,
    /// Sorted neighbor list of every output symbol.
    rows: Vec<Vec<u32>>,
    /// For every input symbol, the output symbols it feeds.
    cols: Vec<Vec<u32>>,
}

impl BipartiteGraph {
    /// Build from explicit neighbor lists (one per output symbol).
    pub fn from_adjacency(k: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        let mut sorted_rows = Vec::with_capacity(rows.len());
        for row in rows {
            let mut r: Vec<u32> = Vec::with_capacity(row.len());
            for v in row {
                if v >= k {
                    return Err(Error::InputOutOfRange { index: v, k });
                }
                r.push(v as u32);
            }
            r.sort_unstable();
            r.dedup();
            sorted_rows.push(r);
        }
        Ok(Self::from_sorted_rows(k, sorted_rows))
    }

    fn from_sorted_rows(k: usize, rows: Vec<Vec<u32>>) -> Self {
        let mut cols = vec![Vec::new(); k];
        for (i, row) in rows.iter().enumerate() {
            for &v in row {
                cols[v as usize].push(i as u32);
            }
        }
        BipartiteGraph { k, rows, cols }
    }

    /// Draw an LT code instance: `m` output symbols, each with a degree from
    /// `dist` and that many distinct neighbors chosen uniformly from `k` inputs.
    pub fn encode<R: Rng + ?Sized>(
        k: usize,
        m: usize,
        dist: &DegreeDistribution,
        rng: &mut R,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidPlan("k must be at least 1".into()));
        }
        if m > 0 {
            dist.check_against_k(k)?;
        }
        let mut scratch: Vec<u32> = (0..k as u32).collect();
        let mut rows = Vec::with_capacity(m);
        for _ in 0..m {
            let d = dist.sample(rng);
            // partial Fisher-Yates over the first d slots, then undo the swaps
            let mut swaps = Vec::with_capacity(d);
            for i in 0..d {
                let j = rng.random_range(i..k);
                scratch.swap(i, j);
                swaps.push(j);
            }
            let mut row = scratch[..d].to_vec();
            for (i, &j) in swaps.iter().enumerate().rev() {
                scratch.swap(i, j);
            }
            row.sort_unstable();
            rows.push(row);
        }
        Ok(Self::from_sorted_rows(k, rows))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn neighbors(&self, output: usize) -> &[u32] {
        &self.rows[output]
    }

    pub fn outputs_of(&self, input: usize) -> &[u32] {
        &self.cols[input]
    }

    pub fn degree(&self, output: usize) -> usize {
        self.rows[output].len()
    }

    /// XOR together the source symbols of every output's neighborhood.
    pub fn payload_encode(&self, source: &[Symbol]) -> Result<Vec<Symbol>> {
        if source.len() != self.k {
            return Err(Error::LengthMismatch {
                expected: self.k,
                actual: source.len(),
            });
        }
        let width = source.first().map_or(0, Vec::len);
        if let Some(bad) = source.iter().find(|s| s.len() != width) {
            return Err(Error::SymbolSizeMismatch {
                expected: width,
                actual: bad.len(),
            });
        }
        Ok(self
            .rows
            .iter()
            .map(|row| {
                let mut out = vec![0u8; width];
                for &v in row {
                    xor_into(&mut out, &source[v as usize]);
                }
                out
            })
            .collect())
    }

    /// One line per output: `idx: v_a v_b ...`, preceded by a `k m` header.
    pub fn dump(&self) -> String {
        let mut s = format!("# k m\n{} {}\n", self.k, self.m());
        for (i, row) in self.rows.iter().enumerate() {
            let _ = write!(s, "{i}:");
            for v in row {
                let _ = write!(s, " {v}");
            }
            s.push('\n');
        }
        s
    }

    pub fn load_dump(text: &str) -> Result<Self> {
        let parse_err = |line: usize, msg: &str| Error::Parse {
            path: "<graph>".into(),
            line,
            msg: msg.to_string(),
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines.next().ok_or_else(|| parse_err(0, "missing header"))?;
        let mut it = header.split_whitespace().map(str::parse::<usize>);
        let (k, m) = match (it.next(), it.next(), it.next()) {
            (Some(Ok(k)), Some(Ok(m)), None) => (k, m),
            _ => return Err(parse_err(hl, "expected `k m` header")),
        };
        let mut rows = Vec::with_capacity(m);
        for (ln, line) in lines {
            let (idx, rest) = line
                .split_once(':')
                .ok_or_else(|| parse_err(ln, "expected `index: neighbors`"))?;
            let idx: usize = idx
                .trim()
                .parse()
                .map_err(|_| parse_err(ln, "bad output index"))?;
            if idx != rows.len() {
                return Err(parse_err(ln, "output indices must be consecutive"));
            }
            let row = rest
                .split_whitespace()
                .map(str::parse::<usize>)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| parse_err(ln, "bad neighbor index"))?;
            rows.push(row);
        }
        if rows.len() != m {
            return Err(parse_err(0, "output count does not match header"));
        }
        Self::from_adjacency(k, rows)
    }
}

pub(crate) fn xor_into(dst: &mut [u8], src: &[u8]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputState {
    Active,
    Resolvable,
    Inactive,
}

/// Insertion-ordered set over `0..capacity` with O(1) insert and swap-remove.
#[derive(Debug, Clone)]
pub struct IndexedSet {
    items: Vec<u32>,
    pos: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl IndexedSet {
    pub fn new(capacity: usize) -> Self {
        IndexedSet {
            items: Vec::new(),
            pos: vec![ABSENT; capacity],
        }
    }

    pub fn full(capacity: usize) -> Self {
        IndexedSet {
            items: (0..capacity as u32).collect(),
            pos: (0..capacity as u32).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.pos[x] != ABSENT
    }

    pub fn insert(&mut self, x: usize) {
        if self.pos[x] == ABSENT {
            self.pos[x] = self.items.len() as u32;
            self.items.push(x as u32);
        }
    }

    pub fn remove(&mut self, x: usize) -> bool {
        let p = self.pos[x];
        if p == ABSENT {
            return false;
        }
        let last = *self.items.last().unwrap();
        self.items.swap_remove(p as usize);
        if last as usize != x {
            self.pos[last as usize] = p;
        }
        self.pos[x] = ABSENT;
        true
    }

    /// Element at position `i` in the current membership order.
    pub fn get(&self, i: usize) -> usize {
        self.items[i] as usize
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.items.iter().map(|&x| x as usize)
    }
}

/// Reduced-graph state during triangularization.
#[derive(Debug, Clone)]
pub struct ReducedView<'g> {
    graph: &'g BipartiteGraph,
    reduced_deg: Vec<u32>,
    input_state: Vec<InputState>,
    active: IndexedSet,
    ripple: IndexedSet,
    cloud: IndexedSet,
}

impl<'g> ReducedView<'g> {
    /// All inputs active; reduced degrees equal original degrees.
    pub fn new(graph: &'g BipartiteGraph) -> Self {
        let m = graph.m();
        let mut ripple = IndexedSet::new(m);
        let mut cloud = IndexedSet::new(m);
        let reduced_deg: Vec<u32> = graph.rows.iter().map(|r| r.len() as u32).collect();
        for (i, &d) in reduced_deg.iter().enumerate() {
            match d {
                0 => {}
                1 => ripple.insert(i),
                _ => cloud.insert(i),
            }
        }
        ReducedView {
            graph,
            reduced_deg,
            input_state: vec![InputState::Active; graph.k],
            active: IndexedSet::full(graph.k),
            ripple,
            cloud,
        }
    }

    pub fn graph(&self) -> &'g BipartiteGraph {
        self.graph
    }

    pub fn reduced_degree(&self, output: usize) -> usize {
        self.reduced_deg[output] as usize
    }

    pub fn input_state(&self, input: usize) -> InputState {
        self.input_state[input]
    }

    pub fn active(&self) -> &IndexedSet {
        &self.active
    }

    pub fn ripple(&self) -> &IndexedSet {
        &self.ripple
    }

    pub fn cloud(&self) -> &IndexedSet {
        &self.cloud
    }

    /// The unique active neighbor of a ripple symbol.
    pub fn ripple_neighbor(&self, output: usize) -> Option<usize> {
        if self.reduced_deg[output] != 1 {
            return None;
        }
        self.graph.rows[output]
            .iter()
            .map(|&v| v as usize)
            .find(|&v| self.input_state[v] == InputState::Active)
    }

    /// Take `input` out of the reduced graph, marking it `new_state`.
    ///
    /// Returns the outputs whose reduced degree dropped to 0 or 1.
    pub fn remove_input(&mut self, input: usize, new_state: InputState) -> Result<Vec<usize>> {
        if input >= self.graph.k {
            return Err(Error::InputOutOfRange {
                index: input,
                k: self.graph.k,
            });
        }
        if self.input_state[input] != InputState::Active || new_state == InputState::Active {
            return Err(Error::NotActive(input));
        }
        self.input_state[input] = new_state;
        self.active.remove(input);
        let mut changed = Vec::new();
        for &c in &self.graph.cols[input] {
            let c = c as usize;
            self.reduced_deg[c] -= 1;
            match self.reduced_deg[c] {
                0 => {
                    self.ripple.remove(c);
                    changed.push(c);
                }
                1 => {
                    self.cloud.remove(c);
                    self.ripple.insert(c);
                    changed.push(c);
                }
                _ => {}
            }
        }
        Ok(changed)
    }

    /// Reduced degrees recomputed from the adjacency and input states.
    pub fn recompute_reduced_degrees(&self) -> Vec<usize> {
        self.graph
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .filter(|&&v| self.input_state[v as usize] == InputState::Active)
                    .count()
            })
            .collect()
    }
}
