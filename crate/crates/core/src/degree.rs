//! Output degree distributions.
//!
//! A [`DegreeDistribution`] is a sparse PMF over output degrees `1..=d_max`.
//! Construction goes through [`DegreeDistribution::validate`], which rejects
//! malformed input instead of renormalizing it.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

/// Tolerance on `|sum - 1|` accepted by [`DegreeDistribution::validate`].
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Coefficients of the standardized MBMS / RFC 5053 degree distribution.
const MBMS_SEC3: [(usize, f64); 7] = [
    (1, 0.0098),
    (2, 0.4590),
    (3, 0.2110),
    (4, 0.1134),
    (10, 0.1113),
    (11, 0.0799),
    (40, 0.0156),
];

/// Rounded variant of the MBMS coefficients used for the k = 300 study.
/// These sum to 1.0008, so [`Preset::MbmsSec4`] is normalized on load.
const MBMS_SEC4: [(usize, f64); 7] = [
    (1, 0.0098),
    (2, 0.4600),
    (3, 0.2110),
    (4, 0.1134),
    (10, 0.1110),
    (11, 0.0800),
    (40, 0.0156),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    MbmsSec3,
    MbmsSec4,
}

impl Preset {
    pub const ALL: [Preset; 2] = [Preset::MbmsSec3, Preset::MbmsSec4];

    pub fn name(self) -> &'static str {
        match self {
            Preset::MbmsSec3 => "mbms-sec3",
            Preset::MbmsSec4 => "mbms-sec4",
        }
    }

    /// Coefficients exactly as published, before any normalization.
    pub fn raw_coefficients(self) -> &'static [(usize, f64)] {
        match self {
            Preset::MbmsSec3 => &MBMS_SEC3,
            Preset::MbmsSec4 => &MBMS_SEC4,
        }
    }

    pub fn distribution(self) -> DegreeDistribution {
        let raw = self.raw_coefficients();
        let total: f64 = raw.iter().map(|&(_, p)| p).sum();
        let scale = if (total - 1.0).abs() > MASS_TOLERANCE {
            1.0 / total
        } else {
            1.0
        };
        let pairs: Vec<(i64, f64)> = raw.iter().map(|&(d, p)| (d as i64, p * scale)).collect();
        DegreeDistribution::validate(&pairs).expect("preset coefficients are valid")
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mbms-sec3" => Ok(Preset::MbmsSec3),
            "mbms-sec4" => Ok(Preset::MbmsSec4),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sparse PMF over output degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    /// `(degree, probability)` sorted by degree, all probabilities > 0.
    support: Vec<(usize, f64)>,
    /// Running sums of `support` probabilities, used for inverse-CDF sampling.
    cdf: Vec<f64>,
}

impl DegreeDistribution {
    /// Check a raw list of `(degree, probability)` pairs.
    ///
    /// The pairs may come in any order; zero-probability entries are rejected
    /// like negative ones, so that every stored degree is actually reachable.
    pub fn validate(raw: &[(i64, f64)]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        let mut support = Vec::with_capacity(raw.len());
        for &(d, p) in raw {
            if d < 1 {
                return Err(Error::DegreeBelowOne(d));
            }
            if p <= 0.0 || !p.is_finite() {
                return Err(Error::NonPositiveProbability {
                    degree: d as usize,
                    prob: p,
                });
            }
            support.push((d as usize, p));
        }
        support.sort_by_key(|&(d, _)| d);
        if let Some(w) = support.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateDegree(w[0].0));
        }
        let total: f64 = support.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::NonUnitMass(total));
        }
        let mut acc = 0.0;
        let cdf = support
            .iter()
            .map(|&(_, p)| {
                acc += p;
                acc
            })
            .collect();
        Ok(DegreeDistribution { support, cdf })
    }

    /// Point mass on a single degree.
    pub fn point(degree: usize) -> Self {
        Self::validate(&[(degree as i64, 1.0)]).expect("point mass on degree >= 1")
    }

    pub fn preset(name: &str) -> Result<Self> {
        Ok(name.parse::<Preset>()?.distribution())
    }

    /// Parse the text format: one `degree probability` pair per line, `#`
    /// starts a comment. `origin` labels parse errors.
    pub fn parse_text(text: &str, origin: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse {
                path: origin.to_string(),
                line: line_no,
                msg,
            };
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(err(format!(
                    "expected `degree probability`, found {} fields",
                    fields.len()
                )));
            }
            let d: i64 = fields[0]
                .parse()
                .map_err(|_| err(format!("invalid degree {:?}", fields[0])))?;
            let p: f64 = fields[1]
                .parse()
                .map_err(|_| err(format!("invalid probability {:?}", fields[1])))?;
            pairs.push((d, p));
        }
        if pairs.is_empty() {
            return Err(Error::Parse {
                path: origin.to_string(),
                line: 0,
                msg: "no degree entries".into(),
            });
        }
        Self::validate(&pairs)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        Self::parse_text(&text, &path.display().to_string())
    }

    /// Resolve a `--dist` argument: preset name first, then file path.
    pub fn from_spec(spec: &str) -> Result<Self> {
        match spec.parse::<Preset>() {
            Ok(p) => Ok(p.distribution()),
            Err(_) => Self::load(Path::new(spec)),
        }
    }

    pub fn d_max(&self) -> usize {
        self.support.last().map(|&(d, _)| d).unwrap()
    }

    /// Probability of degree `d` (0 outside the support).
    pub fn prob(&self, d: usize) -> f64 {
        self.support
            .binary_search_by_key(&d, |&(deg, _)| deg)
            .map(|i| self.support[i].1)
            .unwrap_or(0.0)
    }

    pub fn support(&self) -> &[(usize, f64)] {
        &self.support
    }

    /// Fold the mass of every degree above `k` onto degree `k`, for use
    /// with block sizes smaller than `d_max`.
    pub fn capped(&self, k: usize) -> Self {
        if k == 0 || self.d_max() <= k {
            return self.clone();
        }
        let mut pairs: Vec<(i64, f64)> = self
            .support
            .iter()
            .filter(|&&(d, _)| d < k)
            .map(|&(d, p)| (d as i64, p))
            .collect();
        let folded: f64 = self.support.iter().filter(|&&(d, _)| d >= k).map(|p| p.1).sum();
        pairs.push((k as i64, folded));
        Self::validate(&pairs).expect("folding preserves mass")
    }

    pub fn check_against_k(&self, k: usize) -> Result<()> {
        if self.d_max() > k {
            return Err(Error::DegreeExceedsK {
                d_max: self.d_max(),
                k,
            });
        }
        Ok(())
    }

    /// Draw a degree by inverse CDF.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let x: f64 = rng.random();
        let idx = self.cdf.partition_point(|&c| c <= x);
        // x can land past the last running sum when the mass is 1 - tiny.
        self.support[idx.min(self.support.len() - 1)].0
    }

    /// Text form accepted by [`DegreeDistribution::parse_text`].
    pub fn to_text(&self) -> String {
        self.support
            .iter()
            .map(|(d, p)| format!("{d} {p:e}\n"))
            .collect()
    }
}
