//! Brute-force reference for the analysis: enumerate every graph and every
//! decoder random choice, recomputing reduced degrees from scratch at each
//! step. Shares no code with the recursion.

#![allow(dead_code)]

use std::collections::BTreeMap;

use ltinact::DegreeDistribution;

pub struct Enumerated {
    pub k: usize,
    /// `states[u]` maps `(c, r)` to its probability with `u` inputs active.
    pub states: Vec<BTreeMap<(usize, usize), f64>>,
    /// `states3[u]` maps `(c, r, n)` to its probability.
    pub states3: Vec<BTreeMap<(usize, usize, usize), f64>>,
    pub f_n: Vec<f64>,
}

impl Enumerated {
    pub fn mean(&self) -> f64 {
        self.f_n.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }
}

fn binom(n: usize, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// All neighbor sets an output may draw, as bitmasks with probabilities.
fn output_choices(k: usize, dist: &DegreeDistribution) -> Vec<(u32, f64)> {
    let mut v = Vec::new();
    for &(d, w) in dist.support() {
        assert!(d <= k);
        let each = w / binom(k, d);
        for mask in 0u32..(1 << k) {
            if mask.count_ones() as usize == d {
                v.push((mask, each));
            }
        }
    }
    v
}

struct Walker<'a> {
    rows: &'a [u32],
    out: &'a mut Enumerated,
}

impl Walker<'_> {
    fn explore(&mut self, active: u32, u: usize, n: usize, weight: f64) {
        let degs: Vec<u32> = self.rows.iter().map(|r| (r & active).count_ones()).collect();
        let c = degs.iter().filter(|&&d| d >= 2).count();
        let ripple: Vec<usize> = (0..degs.len()).filter(|&i| degs[i] == 1).collect();
        let r = ripple.len();
        *self.out.states[u].entry((c, r)).or_insert(0.0) += weight;
        *self.out.states3[u].entry((c, r, n)).or_insert(0.0) += weight;
        if u == 0 {
            self.out.f_n[n] += weight;
            return;
        }
        if r > 0 {
            let w = weight / r as f64;
            for &o in &ripple {
                let v = self.rows[o] & active;
                self.explore(active & !v, u - 1, n, w);
            }
        } else {
            let w = weight / u as f64;
            for bit in 0..32 {
                if active & (1 << bit) != 0 {
                    self.explore(active & !(1 << bit), u - 1, n + 1, w);
                }
            }
        }
    }
}

pub fn enumerate(k: usize, m: usize, dist: &DegreeDistribution) -> Enumerated {
    let choices = output_choices(k, dist);
    let mut out = Enumerated {
        k,
        states: vec![BTreeMap::new(); k + 1],
        states3: vec![BTreeMap::new(); k + 1],
        f_n: vec![0.0; k + 1],
    };
    let mut idx = vec![0usize; m];
    loop {
        let rows: Vec<u32> = idx.iter().map(|&i| choices[i].0).collect();
        let weight: f64 = idx.iter().map(|&i| choices[i].1).product();
        let full = (1u32 << k) - 1;
        Walker {
            rows: &rows,
            out: &mut out,
        }
        .explore(full, k, 0, weight);
        // odometer over output choices
        let mut pos = 0;
        loop {
            if pos == m {
                return out;
            }
            idx[pos] += 1;
            if idx[pos] < choices.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// The three distributions of the small-case equivalence check.
pub fn small_distributions() -> Vec<(&'static str, DegreeDistribution)> {
    vec![
        ("{1:1}", DegreeDistribution::point(1)),
        ("{2:1}", DegreeDistribution::point(2)),
        (
            "{1:.5,2:.5}",
            DegreeDistribution::validate(&[(1, 0.5), (2, 0.5)]).unwrap(),
        ),
    ]
}
