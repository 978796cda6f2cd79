//! Log-domain binomial coefficients and binomial PMFs.

/// Table of `ln(n!)` for `n = 0..=max`.
#[derive(Debug, Clone)]
pub struct LogFactorial {
    table: Vec<f64>,
}

impl LogFactorial {
    pub fn new(max: usize) -> Self {
        let mut table = Vec::with_capacity(max + 1);
        table.push(0.0);
        // compensated summation keeps ln(n!) within an ulp or so at large n
        let (mut acc, mut comp) = (0.0f64, 0.0f64);
        for n in 1..=max {
            let y = (n as f64).ln() - comp;
            let t = acc + y;
            comp = (t - acc) - y;
            acc = t;
            table.push(acc);
        }
        LogFactorial { table }
    }

    pub fn max(&self) -> usize {
        self.table.len() - 1
    }

    pub fn ln_fact(&self, n: usize) -> f64 {
        self.table[n]
    }

    /// `ln C(n, j)`; `-inf` when `j > n`.
    pub fn ln_binom(&self, n: usize, j: usize) -> f64 {
        if j > n {
            return f64::NEG_INFINITY;
        }
        self.table[n] - self.table[j] - self.table[n - j]
    }

    /// `C(n1, j1) / C(n2, j2)` evaluated in log domain.
    pub fn binom_ratio(&self, n1: usize, j1: usize, n2: usize, j2: usize) -> f64 {
        if j1 > n1 {
            return 0.0;
        }
        (self.ln_binom(n1, j1) - self.ln_binom(n2, j2)).exp()
    }
}

/// A binomial PMF stored over a contiguous window `[offset, offset + probs.len())`.
///
/// Terms below `cutoff` at the two tails are dropped; `dropped` holds the
/// mass they carried so callers can account for it.
#[derive(Debug, Clone)]
pub struct TruncatedPmf {
    pub offset: usize,
    pub probs: Vec<f64>,
    pub dropped: f64,
}

impl TruncatedPmf {
    pub fn point(at: usize) -> Self {
        TruncatedPmf {
            offset: at,
            probs: vec![1.0],
            dropped: 0.0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &p)| (self.offset + i, p))
    }

    /// Binomial(n, p), built outward from the mode with the term ratio
    /// recurrence so only the retained window costs any work.
    pub fn binomial(n: usize, p: f64, lf: &LogFactorial, cutoff: f64) -> Self {
        if p <= 0.0 || n == 0 {
            return Self::point(0);
        }
        if p >= 1.0 {
            return Self::point(n);
        }
        let q = 1.0 - p;
        let mode = (((n + 1) as f64) * p).floor().min(n as f64) as usize;
        let ln_mode = lf.ln_binom(n, mode) + mode as f64 * p.ln() + (n - mode) as f64 * q.ln();
        let at_mode = ln_mode.exp();
        let odds = p / q;

        let mut upper = Vec::new();
        let mut term = at_mode;
        let mut j = mode;
        while j < n {
            term *= (n - j) as f64 / (j + 1) as f64 * odds;
            j += 1;
            if term < cutoff {
                break;
            }
            upper.push(term);
        }
        let mut lower = Vec::new();
        term = at_mode;
        j = mode;
        while j > 0 {
            term *= j as f64 / (n - j + 1) as f64 / odds;
            j -= 1;
            if term < cutoff {
                break;
            }
            lower.push(term);
        }
        let offset = mode - lower.len();
        let mut probs = Vec::with_capacity(lower.len() + 1 + upper.len());
        probs.extend(lower.into_iter().rev());
        probs.push(at_mode);
        probs.extend(upper);
        let kept: f64 = probs.iter().sum();
        TruncatedPmf {
            offset,
            probs,
            dropped: (1.0 - kept).max(0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom_exact(n: u64, j: u64) -> f64 {
        let mut acc = 1u128;
        for i in 0..j {
            acc = acc * (n - i) as u128 / (i + 1) as u128;
        }
        acc as f64
    }

    #[test]
    fn binomials_match_integer_arithmetic() {
        let lf = LogFactorial::new(60);
        for n in 0..60u64 {
            for j in 0..=n {
                let got = lf.ln_binom(n as usize, j as usize).exp();
                let want = binom_exact(n, j);
                assert!((got - want).abs() <= 1e-12 * want, "C({n},{j})");
            }
        }
        assert_eq!(lf.ln_binom(3, 4), f64::NEG_INFINITY);
        assert_eq!(lf.binom_ratio(3, 4, 5, 2), 0.0);
    }

    #[test]
    fn large_table_is_finite() {
        let lf = LogFactorial::new(5000);
        assert!(lf.ln_binom(5000, 2500).is_finite());
        assert_eq!(lf.max(), 5000);
    }

    #[test]
    fn binomial_pmf_matches_direct_sum() {
        let lf = LogFactorial::new(200);
        for &(n, p) in &[(1usize, 0.3), (7, 0.5), (40, 0.02), (200, 0.9), (150, 1e-4)] {
            let pmf = TruncatedPmf::binomial(n, p, &lf, 0.0);
            assert_eq!(pmf.offset + pmf.probs.len(), n + 1);
            for (j, got) in pmf.iter() {
                let want =
                    (lf.ln_binom(n, j) + j as f64 * p.ln() + (n - j) as f64 * (1.0 - p).ln()).exp();
                assert!((got - want).abs() <= 1e-12 * want.max(1e-300) + 1e-300);
            }
            let total: f64 = pmf.probs.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn truncated_pmf_reports_dropped_mass() {
        let lf = LogFactorial::new(1000);
        let pmf = TruncatedPmf::binomial(1000, 0.01, &lf, 1e-30);
        assert!(pmf.probs.len() < 200);
        let total: f64 = pmf.probs.iter().sum();
        assert!((total + pmf.dropped - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_binomials() {
        let lf = LogFactorial::new(10);
        let z = TruncatedPmf::binomial(5, 0.0, &lf, 0.0);
        assert_eq!((z.offset, z.probs.clone()), (0, vec![1.0]));
        let o = TruncatedPmf::binomial(5, 1.0, &lf, 0.0);
        assert_eq!((o.offset, o.probs.clone()), (5, vec![1.0]));
    }
}
