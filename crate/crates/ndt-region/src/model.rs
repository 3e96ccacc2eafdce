//! Domain types shared by all other modules: system parameters, cache
//! partition matrices, demands, NDT points and popularity profiles, plus
//! partition validation and the symmetrization transform.

use crate::{Error, Result, TOL};

/// Number of edge nodes. The whole analysis is specific to the 2x2 network.
pub const NUM_ENS: usize = 2;

/// Global system parameters.
///
/// `mu` is the fractional cache capacity: each EN can store at most
/// `mu * J` file-equivalents. `rate` is the fronthaul rate, the ratio of the
/// cloud-to-EN link capacity to the high-SNR capacity of an
/// interference-free edge link.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    mu: f64,
    rate: f64,
    num_files: usize,
    classes: Option<Vec<(u32, usize)>>,
}

impl SystemParams {
    pub fn new(mu: f64, rate: f64, num_files: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::InvalidParameter {
                name: "mu",
                reason: format!("must be in [0, 1], got {mu}"),
            });
        }
        if !(rate > 0.0) {
            return Err(Error::InvalidParameter {
                name: "rate",
                reason: format!("must be > 0, got {rate}"),
            });
        }
        if num_files < 2 {
            return Err(Error::InvalidParameter {
                name: "num_files",
                reason: format!("need at least 2 files, got {num_files}"),
            });
        }
        Ok(Self {
            mu,
            rate,
            num_files,
            classes: None,
        })
    }

    /// Attach a class structure: `(class id, file count)` pairs that
    /// partition the library.
    pub fn with_classes(mut self, classes: Vec<(u32, usize)>) -> Result<Self> {
        let total: usize = classes.iter().map(|&(_, n)| n).sum();
        if total != self.num_files {
            return Err(Error::InvalidParameter {
                name: "classes",
                reason: format!(
                    "class file counts sum to {total}, expected {}",
                    self.num_files
                ),
            });
        }
        self.classes = Some(classes);
        Ok(self)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn num_files(&self) -> usize {
        self.num_files
    }

    pub fn classes(&self) -> Option<&[(u32, usize)]> {
        self.classes.as_deref()
    }

    /// Per-EN cache budget in file-equivalents, `mu * J`.
    pub fn cache_budget(&self) -> f64 {
        self.mu * self.num_files as f64
    }
}

/// Cache partition matrix: `entry(m, j)` is the fraction of file `j` cached
/// at EN `m` (rows are ENs, columns are files, all entries in `[0, 1]`).
#[derive(Debug, Clone, PartialEq)]
pub struct CachePartition {
    rows: [Vec<f64>; NUM_ENS],
}

impl CachePartition {
    /// Build from two rows of per-file fractions. The rows must have equal
    /// length; entry ranges are reported by [`validate_partition`], not here.
    pub fn new(en1: Vec<f64>, en2: Vec<f64>) -> Result<Self> {
        if en1.len() != en2.len() || en1.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: en1.len().max(en2.len()),
                got: vec![en1.len(), en2.len()],
            });
        }
        Ok(Self { rows: [en1, en2] })
    }

    /// Symmetric partition: both ENs cache the same fraction of each file.
    pub fn symmetric(fractions: Vec<f64>) -> Result<Self> {
        Self::new(fractions.clone(), fractions)
    }

    pub fn num_files(&self) -> usize {
        self.rows[0].len()
    }

    pub fn entry(&self, en: usize, file: usize) -> f64 {
        self.rows[en][file]
    }

    pub fn row(&self, en: usize) -> &[f64] {
        &self.rows[en]
    }

    pub fn row_sum(&self, en: usize) -> f64 {
        self.rows[en].iter().sum()
    }

    /// True when both ENs cache the same fraction of every file.
    pub fn is_symmetric(&self) -> bool {
        self.rows[0]
            .iter()
            .zip(&self.rows[1])
            .all(|(a, b)| (a - b).abs() <= TOL)
    }
}

/// One constraint violation found by [`validate_partition`].
#[derive(Debug, Clone, PartialEq)]
pub enum PartitionViolation {
    /// Entry `(en, file)` lies outside `[0, 1]`.
    EntryOutOfRange { en: usize, file: usize, value: f64 },
    /// Row sum of `en` exceeds the per-EN budget `mu * J`.
    RowSumExceedsBudget { en: usize, sum: f64, budget: f64 },
}

impl std::fmt::Display for PartitionViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::EntryOutOfRange { en, file, value } => write!(
                f,
                "entry (EN{}, file {}) = {} is outside [0, 1]",
                en + 1,
                file,
                value
            ),
            Self::RowSumExceedsBudget { en, sum, budget } => write!(
                f,
                "EN{} row sum {} exceeds cache budget {}",
                en + 1,
                sum,
                budget
            ),
        }
    }
}

/// Validation report: `ok` iff no violations were found.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<PartitionViolation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check a cache partition against the per-EN capacity constraint
/// `sum_j mu_{m,j} <= mu * J` and the per-entry range `[0, 1]`.
///
/// A matrix whose column count differs from the library size is a structural
/// error, not a constraint violation.
pub fn validate_partition(
    partition: &CachePartition,
    params: &SystemParams,
) -> Result<ValidationReport> {
    if partition.num_files() != params.num_files() {
        return Err(Error::DimensionMismatch {
            expected: params.num_files(),
            got: vec![partition.rows[0].len(), partition.rows[1].len()],
        });
    }
    let mut violations = Vec::new();
    let budget = params.cache_budget();
    for en in 0..NUM_ENS {
        for (file, &value) in partition.row(en).iter().enumerate() {
            if !(-TOL..=1.0 + TOL).contains(&value) {
                violations.push(PartitionViolation::EntryOutOfRange { en, file, value });
            }
        }
        let sum = partition.row_sum(en);
        if sum > budget + TOL {
            violations.push(PartitionViolation::RowSumExceedsBudget { en, sum, budget });
        }
    }
    Ok(ValidationReport { violations })
}

/// Replace each file's two per-EN fractions by their mean.
///
/// The output is symmetric, and its row sums equal the mean of the input row
/// sums, so it satisfies any capacity budget the input does.
pub fn symmetrize(partition: &CachePartition) -> CachePartition {
    let means: Vec<f64> = partition.rows[0]
        .iter()
        .zip(&partition.rows[1])
        .map(|(a, b)| (a + b) / 2.0)
        .collect();
    CachePartition {
        rows: [means.clone(), means],
    }
}

/// A request pair: two distinct file indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Demand {
    i: usize,
    j: usize,
}

impl Demand {
    pub fn new(i: usize, j: usize) -> Result<Self> {
        if i == j {
            return Err(Error::NonDistinctDemand(i));
        }
        Ok(Self { i, j })
    }

    pub fn i(&self) -> usize {
        self.i
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn contains(&self, file: usize) -> bool {
        self.i == file || self.j == file
    }
}

/// Fronthaul and edge NDT of one delivery (or one phase of it).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NdtPoint {
    delta_f: f64,
    delta_e: f64,
}

impl NdtPoint {
    pub const ZERO: NdtPoint = NdtPoint {
        delta_f: 0.0,
        delta_e: 0.0,
    };

    pub fn new(delta_f: f64, delta_e: f64) -> Result<Self> {
        if delta_f < 0.0 {
            return Err(Error::InvalidParameter {
                name: "delta_f",
                reason: format!("must be >= 0, got {delta_f}"),
            });
        }
        if delta_e < 0.0 {
            return Err(Error::InvalidParameter {
                name: "delta_e",
                reason: format!("must be >= 0, got {delta_e}"),
            });
        }
        Ok(Self { delta_f, delta_e })
    }

    pub fn delta_f(&self) -> f64 {
        self.delta_f
    }

    pub fn delta_e(&self) -> f64 {
        self.delta_e
    }

    /// Total NDT, fronthaul plus edge.
    pub fn total(&self) -> f64 {
        self.delta_f + self.delta_e
    }

    pub fn add(&self, other: &NdtPoint) -> NdtPoint {
        NdtPoint {
            delta_f: self.delta_f + other.delta_f,
            delta_e: self.delta_e + other.delta_e,
        }
    }

    pub fn scale(&self, factor: f64) -> NdtPoint {
        NdtPoint {
            delta_f: self.delta_f * factor,
            delta_e: self.delta_e * factor,
        }
    }

    pub fn approx_eq(&self, other: &NdtPoint, tol: f64) -> bool {
        (self.delta_f - other.delta_f).abs() <= tol && (self.delta_e - other.delta_e).abs() <= tol
    }
}

/// Two-class popularity profile: a request draws from class 1 with
/// probability `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopularityProfile {
    a: f64,
}

impl PopularityProfile {
    pub fn new(a: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::InvalidParameter {
                name: "a",
                reason: format!("must be in [0, 1], got {a}"),
            });
        }
        Ok(Self { a })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Probability that both requested files are from class 1.
    pub fn p11(&self) -> f64 {
        self.a * self.a
    }

    /// Probability that one file is requested from each class.
    pub fn p12(&self) -> f64 {
        2.0 * self.a * (1.0 - self.a)
    }

    /// Probability that both requested files are from class 2.
    pub fn p22(&self) -> f64 {
        (1.0 - self.a) * (1.0 - self.a)
    }
}
