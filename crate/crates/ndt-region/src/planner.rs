//! Explicit cache placements and delivery plans.
//!
//! A plan assigns normalized bit intervals of the two requested files to
//! ordered strategy phases (HT, then X-IA, then ST+ZF or ZF). The
//! constructions cover the four rate/fraction regimes of the achievable
//! bound, and their totals match `closed_form::ndt_inner` exactly.
//! `verify_plan` mechanizes the correctness conditions: interval coverage,
//! source availability at the ENs, and NDT accounting. `mix_plans`
//! implements convex mixing by file splitting.

use serde::Serialize;

use crate::closed_form::{strategy_ndt, Strategy, StrategyInvocation};
use crate::model::{Demand, NdtPoint, SystemParams, NUM_ENS};
use crate::{Error, Result, TOL};

/// Geometric tolerance for interval endpoints and lengths.
const EPS: f64 = 1e-12;

/// A half-open range `[lo, hi)` of normalized bit positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(0.0 - EPS..=1.0 + EPS).contains(&lo)
            || !(0.0 - EPS..=1.0 + EPS).contains(&hi)
            || lo > hi + EPS
        {
            return Err(Error::InvalidParameter {
                name: "interval",
                reason: format!("need 0 <= lo <= hi <= 1, got [{lo}, {hi})"),
            });
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.len() <= EPS
    }

    fn overlap_len(&self, other: &Interval) -> f64 {
        (self.hi.min(other.hi) - self.lo.max(other.lo)).max(0.0)
    }

    /// Affine map of this interval into the window `[offset, offset + scale)`.
    fn rescale(&self, offset: f64, scale: f64) -> Interval {
        Interval {
            lo: offset + scale * self.lo,
            hi: offset + scale * self.hi,
        }
    }
}

/// Merge a list of intervals into a sorted, disjoint canonical form.
fn normalize(mut intervals: Vec<Interval>) -> Vec<Interval> {
    intervals.retain(|iv| !iv.is_empty());
    intervals.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
    let mut out: Vec<Interval> = Vec::with_capacity(intervals.len());
    for iv in intervals {
        match out.last_mut() {
            Some(last) if iv.lo <= last.hi + EPS => last.hi = last.hi.max(iv.hi),
            _ => out.push(iv),
        }
    }
    out
}

/// Whether a sorted disjoint list covers the whole target interval.
fn covers(sorted: &[Interval], target: &Interval) -> bool {
    if target.is_empty() {
        return true;
    }
    let mut pos = target.lo;
    for iv in sorted {
        if iv.hi <= pos + EPS {
            continue;
        }
        if iv.lo > pos + EPS {
            return false;
        }
        pos = iv.hi;
        if pos >= target.hi - EPS {
            return true;
        }
    }
    pos >= target.hi - EPS
}

/// A cache placement: per file and per EN, the disjoint bit intervals held
/// in that EN's cache.
#[derive(Debug, Clone, PartialEq)]
pub struct CachePlacement {
    cached: Vec<[Vec<Interval>; NUM_ENS]>,
}

impl CachePlacement {
    /// Raw constructor for hand-built placements (mainly negative tests);
    /// interval lists are normalized.
    pub fn from_intervals(cached: Vec<[Vec<Interval>; NUM_ENS]>) -> Self {
        let cached = cached
            .into_iter()
            .map(|[a, b]| [normalize(a), normalize(b)])
            .collect();
        Self { cached }
    }

    pub fn num_files(&self) -> usize {
        self.cached.len()
    }

    pub fn intervals(&self, file: usize, en: usize) -> &[Interval] {
        &self.cached[file][en]
    }

    /// Cached fraction of `file` at `en` (total interval length).
    pub fn fraction(&self, file: usize, en: usize) -> f64 {
        self.cached[file][en].iter().map(Interval::len).sum()
    }

    /// Per-file fractions at EN 1 (equal to EN 2's for placements built by
    /// [`build_cache_placement`]).
    pub fn fractions(&self) -> Vec<f64> {
        (0..self.num_files()).map(|f| self.fraction(f, 0)).collect()
    }
}

/// Lay out the caches for symmetric per-file fractions.
///
/// For `r <= 1` the overlap between the ENs is minimized: file `j` occupies
/// `[0, mu_j)` at EN 1 and `[1 - mu_j, 1)` at EN 2 (the middle is cached at
/// both when `mu_j > 1/2`). For `r > 1` the overlap is maximized: both ENs
/// hold `[0, mu_j)`.
pub fn build_cache_placement(
    mu_per_file: &[f64],
    rate: f64,
    params: &SystemParams,
) -> Result<CachePlacement> {
    if mu_per_file.len() != params.num_files() {
        return Err(Error::DimensionMismatch {
            expected: params.num_files(),
            got: vec![mu_per_file.len()],
        });
    }
    for (file, &mu) in mu_per_file.iter().enumerate() {
        if !(-EPS..=1.0 + EPS).contains(&mu) {
            return Err(Error::InvalidParameter {
                name: "mu_per_file",
                reason: format!("fraction for file {file} is {mu}, outside [0, 1]"),
            });
        }
    }
    let total: f64 = mu_per_file.iter().sum();
    if total > params.cache_budget() + TOL {
        return Err(Error::CapacityViolation(format!(
            "per-file fractions sum to {total}, budget is {}",
            params.cache_budget()
        )));
    }
    let cached = mu_per_file
        .iter()
        .map(|&mu| {
            let head = Interval { lo: 0.0, hi: mu };
            if rate <= 1.0 {
                let tail = Interval {
                    lo: 1.0 - mu,
                    hi: 1.0,
                };
                [normalize(vec![head]), normalize(vec![tail])]
            } else {
                [normalize(vec![head]), normalize(vec![head])]
            }
        })
        .collect();
    Ok(CachePlacement { cached })
}

/// Where a payload is sent: an EN (fronthaul) or a user (edge).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    /// EN index, 0-based.
    En(usize),
    /// User index, 0-based; user `k` requested the `k`-th file of the demand.
    User(usize),
}

impl Endpoint {
    pub fn label(&self) -> String {
        match self {
            Endpoint::En(m) => format!("EN{}", m + 1),
            Endpoint::User(k) => format!("user{}", k + 1),
        }
    }
}

/// One message of a phase: an interval of a file sent to an endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Payload {
    pub file: usize,
    pub interval: Interval,
    pub endpoint: Endpoint,
}

/// One delivery phase: a strategy applied to a set of equal-size payloads.
#[derive(Debug, Clone, PartialEq)]
pub struct Phase {
    pub kind: Strategy,
    pub payloads: Vec<Payload>,
    pub ndt: NdtPoint,
}

/// An ordered sequence of phases delivering both files of a demand.
#[derive(Debug, Clone, PartialEq)]
pub struct DeliveryPlan {
    demand: Demand,
    phases: Vec<Phase>,
    total: NdtPoint,
}

impl DeliveryPlan {
    pub fn demand(&self) -> Demand {
        self.demand
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    pub fn total(&self) -> NdtPoint {
        self.total
    }

    /// Structured-text form: demand, phases with payload intervals and
    /// per-phase NDTs, and the fronthaul/edge/total accounting.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct DemandDoc {
            i: usize,
            j: usize,
        }
        #[derive(Serialize)]
        struct NdtDoc {
            f: f64,
            e: f64,
        }
        #[derive(Serialize)]
        struct PayloadDoc {
            file: usize,
            lo: f64,
            hi: f64,
            endpoint: String,
        }
        #[derive(Serialize)]
        struct PhaseDoc {
            kind: &'static str,
            payloads: Vec<PayloadDoc>,
            ndt: NdtDoc,
        }
        #[derive(Serialize)]
        struct TotalDoc {
            f: f64,
            e: f64,
            sum: f64,
        }
        #[derive(Serialize)]
        struct PlanDoc {
            demand: DemandDoc,
            phases: Vec<PhaseDoc>,
            total: TotalDoc,
        }
        let doc = PlanDoc {
            demand: DemandDoc {
                i: self.demand.i(),
                j: self.demand.j(),
            },
            phases: self
                .phases
                .iter()
                .map(|p| PhaseDoc {
                    kind: p.kind.label(),
                    payloads: p
                        .payloads
                        .iter()
                        .map(|pl| PayloadDoc {
                            file: pl.file,
                            lo: pl.interval.lo(),
                            hi: pl.interval.hi(),
                            endpoint: pl.endpoint.label(),
                        })
                        .collect(),
                    ndt: NdtDoc {
                        f: p.ndt.delta_f(),
                        e: p.ndt.delta_e(),
                    },
                })
                .collect(),
            total: TotalDoc {
                f: self.total.delta_f(),
                e: self.total.delta_e(),
                sum: self.total.total(),
            },
        };
        serde_json::to_string_pretty(&doc).expect("plan serialization cannot fail")
    }
}

fn make_phase(kind: Strategy, payloads: Vec<Payload>, rate: f64) -> Option<Phase> {
    let payloads: Vec<Payload> = payloads
        .into_iter()
        .filter(|p| !p.interval.is_empty())
        .collect();
    if payloads.is_empty() {
        return None;
    }
    let nu = payloads
        .iter()
        .map(|p| p.interval.len())
        .fold(0.0_f64, f64::max);
    let ndt = strategy_ndt(StrategyInvocation { kind, nu }, rate);
    Some(Phase {
        kind,
        payloads,
        ndt,
    })
}

fn iv(lo: f64, hi: f64) -> Interval {
    Interval { lo, hi }
}

/// Check that `file`'s placement matches the canonical symmetric layout for
/// the given rate and return its fraction.
fn placement_fraction(placement: &CachePlacement, file: usize, rate: f64) -> Result<f64> {
    let mu1 = placement.fraction(file, 0);
    let mu2 = placement.fraction(file, 1);
    if (mu1 - mu2).abs() > EPS {
        return Err(Error::UnsupportedPlacement(format!(
            "file {file} has asymmetric fractions ({mu1} at EN1, {mu2} at EN2)"
        )));
    }
    let mu = mu1;
    let expected = if rate <= 1.0 {
        [vec![iv(0.0, mu)], vec![iv(1.0 - mu, 1.0)]]
    } else {
        [vec![iv(0.0, mu)], vec![iv(0.0, mu)]]
    };
    for en in 0..NUM_ENS {
        let got = normalize(placement.intervals(file, en).to_vec());
        let want = normalize(expected[en].clone());
        let matches = got.len() == want.len()
            && got
                .iter()
                .zip(&want)
                .all(|(a, b)| (a.lo - b.lo).abs() <= EPS && (a.hi - b.hi).abs() <= EPS);
        if !matches {
            return Err(Error::UnsupportedPlacement(format!(
                "file {file} at EN{} does not follow the canonical layout",
                en + 1
            )));
        }
    }
    Ok(mu)
}

/// Build the regime construction delivering `demand` from a canonical
/// symmetric placement. The plan total equals the dispatched achievable
/// bound for the two cached fractions.
pub fn build_delivery_plan(
    placement: &CachePlacement,
    demand: Demand,
    rate: f64,
) -> Result<DeliveryPlan> {
    if demand.i() >= placement.num_files() || demand.j() >= placement.num_files() {
        return Err(Error::InvalidParameter {
            name: "demand",
            reason: format!(
                "file index out of range (library has {} files)",
                placement.num_files()
            ),
        });
    }
    let mu_i = placement_fraction(placement, demand.i(), rate)?;
    let mu_j = placement_fraction(placement, demand.j(), rate)?;

    // Relabel so `small` is the less-cached requested file; users keep
    // their identity via the demand ordering.
    let (small, large, mu_s, mu_l) = if mu_i <= mu_j {
        (demand.i(), demand.j(), mu_i, mu_j)
    } else {
        (demand.j(), demand.i(), mu_j, mu_i)
    };
    let user_of = |file: usize| -> Endpoint {
        Endpoint::User(if file == demand.i() { 0 } else { 1 })
    };
    let both_files = [small, large];

    let mut phases: Vec<Phase> = Vec::new();
    if rate > 1.0 {
        // ZF over the commonly cached head, ST+ZF for the rest.
        phases.extend(make_phase(
            Strategy::Zf,
            both_files
                .iter()
                .map(|&f| Payload {
                    file: f,
                    interval: iv(0.0, mu_s),
                    endpoint: user_of(f),
                })
                .collect(),
            rate,
        ));
        phases.extend(make_phase(
            Strategy::StZf,
            both_files
                .iter()
                .map(|&f| Payload {
                    file: f,
                    interval: iv(mu_s, 1.0),
                    endpoint: user_of(f),
                })
                .collect(),
            rate,
        ));
    } else if mu_l < 0.5 {
        // HT tops up the smaller file to mu_l on both sides, X-IA covers
        // the head and tail, ST+ZF the middle.
        phases.extend(make_phase(
            Strategy::Ht,
            vec![
                Payload {
                    file: small,
                    interval: iv(mu_s, mu_l),
                    endpoint: Endpoint::En(0),
                },
                Payload {
                    file: small,
                    interval: iv(1.0 - mu_l, 1.0 - mu_s),
                    endpoint: Endpoint::En(1),
                },
            ],
            rate,
        ));
        phases.extend(make_phase(
            Strategy::XIa,
            both_files
                .iter()
                .flat_map(|&f| {
                    [
                        Payload {
                            file: f,
                            interval: iv(0.0, mu_l),
                            endpoint: user_of(f),
                        },
                        Payload {
                            file: f,
                            interval: iv(1.0 - mu_l, 1.0),
                            endpoint: user_of(f),
                        },
                    ]
                })
                .collect(),
            rate,
        ));
        phases.extend(make_phase(
            Strategy::StZf,
            both_files
                .iter()
                .map(|&f| Payload {
                    file: f,
                    interval: iv(mu_l, 1.0 - mu_l),
                    endpoint: user_of(f),
                })
                .collect(),
            rate,
        ));
    } else if mu_s > 0.5 {
        // X-IA on the disjointly cached head and tail, ZF on the overlap.
        phases.extend(make_phase(
            Strategy::XIa,
            both_files
                .iter()
                .flat_map(|&f| {
                    [
                        Payload {
                            file: f,
                            interval: iv(0.0, 1.0 - mu_s),
                            endpoint: user_of(f),
                        },
                        Payload {
                            file: f,
                            interval: iv(mu_s, 1.0),
                            endpoint: user_of(f),
                        },
                    ]
                })
                .collect(),
            rate,
        ));
        phases.extend(make_phase(
            Strategy::Zf,
            both_files
                .iter()
                .map(|&f| Payload {
                    file: f,
                    interval: iv(1.0 - mu_s, mu_s),
                    endpoint: user_of(f),
                })
                .collect(),
            rate,
        ));
    } else {
        // HT tops up the smaller file to the half-way split, then X-IA
        // delivers both complete files.
        phases.extend(make_phase(
            Strategy::Ht,
            vec![
                Payload {
                    file: small,
                    interval: iv(mu_s, 0.5),
                    endpoint: Endpoint::En(0),
                },
                Payload {
                    file: small,
                    interval: iv(0.5, 1.0 - mu_s),
                    endpoint: Endpoint::En(1),
                },
            ],
            rate,
        ));
        phases.extend(make_phase(
            Strategy::XIa,
            both_files
                .iter()
                .flat_map(|&f| {
                    [
                        Payload {
                            file: f,
                            interval: iv(0.0, 0.5),
                            endpoint: user_of(f),
                        },
                        Payload {
                            file: f,
                            interval: iv(0.5, 1.0),
                            endpoint: user_of(f),
                        },
                    ]
                })
                .collect(),
            rate,
        ));
    }

    let total = phases
        .iter()
        .fold(NdtPoint::ZERO, |acc, p| acc.add(&p.ndt));
    Ok(DeliveryPlan {
        demand,
        phases,
        total,
    })
}

/// Recompute the plan's NDT from its payload sizes via the strategy costs.
///
/// Each phase's payload list must match the message pattern of its strategy
/// kind; a mismatch is a `MalformedPhase` error.
pub fn plan_ndt(plan: &DeliveryPlan, rate: f64) -> Result<NdtPoint> {
    let mut total = NdtPoint::ZERO;
    for phase in &plan.phases {
        let nu = phase_message_size(phase)?;
        total = total.add(&strategy_ndt(
            StrategyInvocation {
                kind: phase.kind,
                nu,
            },
            rate,
        ));
    }
    Ok(total)
}

fn phase_message_size(phase: &Phase) -> Result<f64> {
    let kind = phase.kind.label();
    let lens: Vec<f64> = phase.payloads.iter().map(|p| p.interval.len()).collect();
    let equal_lengths = lens.windows(2).all(|w| (w[0] - w[1]).abs() <= EPS);
    match phase.kind {
        Strategy::Ht => {
            let ens: Vec<usize> = phase
                .payloads
                .iter()
                .map(|p| match p.endpoint {
                    Endpoint::En(m) => Ok(m),
                    Endpoint::User(_) => Err(Error::MalformedPhase {
                        kind,
                        reason: "HT payloads must target ENs".into(),
                    }),
                })
                .collect::<Result<_>>()?;
            if ens.is_empty() || ens.len() > NUM_ENS {
                return Err(Error::MalformedPhase {
                    kind,
                    reason: format!("expected one interval per EN, got {} payloads", ens.len()),
                });
            }
            if ens.len() == 2 && (ens[0] == ens[1] || !equal_lengths) {
                return Err(Error::MalformedPhase {
                    kind,
                    reason: "parallel HT needs distinct ENs and equal message sizes".into(),
                });
            }
            Ok(lens.iter().cloned().fold(0.0, f64::max))
        }
        Strategy::Zf | Strategy::StZf => {
            let users = endpoint_users(phase, kind)?;
            if users.len() != 2 || users[0] == users[1] || !equal_lengths {
                return Err(Error::MalformedPhase {
                    kind,
                    reason: "expected one interval per user with equal sizes".into(),
                });
            }
            Ok(lens[0])
        }
        Strategy::XIa => {
            let users = endpoint_users(phase, kind)?;
            let per_user = |u: usize| users.iter().filter(|&&x| x == u).count();
            if users.len() != 4 || per_user(0) != 2 || per_user(1) != 2 || !equal_lengths {
                return Err(Error::MalformedPhase {
                    kind,
                    reason: "expected four equal-size intervals, two per user".into(),
                });
            }
            Ok(lens[0])
        }
    }
}

fn endpoint_users(phase: &Phase, kind: &'static str) -> Result<Vec<usize>> {
    phase
        .payloads
        .iter()
        .map(|p| match p.endpoint {
            Endpoint::User(u) => Ok(u),
            Endpoint::En(_) => Err(Error::MalformedPhase {
                kind,
                reason: "edge payloads must target users".into(),
            }),
        })
        .collect()
}

/// One failed plan check.
#[derive(Debug, Clone, PartialEq)]
pub enum PlanCheckFailure {
    /// The delivered intervals of a requested file leave `[lo, hi)` uncovered.
    CoverageGap { file: usize, lo: f64, hi: f64 },
    /// Two delivered intervals of a requested file overlap on `[lo, hi)`.
    CoverageOverlap { file: usize, lo: f64, hi: f64 },
    /// A ZF payload is not cached at both ENs, or an X-IA payload is not
    /// available (cache or earlier HT) at any EN.
    MissingSource {
        kind: Strategy,
        file: usize,
        lo: f64,
        hi: f64,
    },
    /// An HT payload is already cached at its destination EN.
    RedundantHt {
        file: usize,
        lo: f64,
        hi: f64,
        en: usize,
    },
    /// Stated total disagrees with the recomputed per-phase sum.
    AccountingMismatch { stated: NdtPoint, recomputed: NdtPoint },
    /// A phase payload list does not match its strategy's message pattern.
    MalformedPhase(String),
}

impl std::fmt::Display for PlanCheckFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::CoverageGap { file, lo, hi } => {
                write!(f, "file {file}: interval [{lo}, {hi}) is never delivered")
            }
            Self::CoverageOverlap { file, lo, hi } => {
                write!(f, "file {file}: interval [{lo}, {hi}) is delivered twice")
            }
            Self::MissingSource { kind, file, lo, hi } => write!(
                f,
                "{kind} payload [{lo}, {hi}) of file {file} has no source EN"
            ),
            Self::RedundantHt { file, lo, hi, en } => write!(
                f,
                "HT payload [{lo}, {hi}) of file {file} is already cached at EN{}",
                en + 1
            ),
            Self::AccountingMismatch { stated, recomputed } => write!(
                f,
                "total ({}, {}) disagrees with recomputed ({}, {})",
                stated.delta_f(),
                stated.delta_e(),
                recomputed.delta_f(),
                recomputed.delta_e()
            ),
            Self::MalformedPhase(reason) => write!(f, "malformed phase: {reason}"),
        }
    }
}

/// Plan verification report; `ok` iff all checks passed.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanReport {
    pub failures: Vec<PlanCheckFailure>,
}

impl PlanReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Verify a plan against its placement: (1) the delivered intervals of each
/// requested file tile `[0, 1)` exactly; (2) every edge payload has a valid
/// source (ZF at both ENs, X-IA at its source EN possibly via an earlier HT
/// phase, ST+ZF cloud-sourced) and HT payloads are not already cached at
/// their destination; (3) the stated total matches the recomputed NDT.
pub fn verify_plan(
    plan: &DeliveryPlan,
    placement: &CachePlacement,
    demand: Demand,
    rate: f64,
) -> PlanReport {
    let mut failures = Vec::new();

    // (1) coverage of each requested file by user-directed payloads
    for file in [demand.i(), demand.j()] {
        let mut delivered: Vec<Interval> = plan
            .phases
            .iter()
            .filter(|p| p.kind != Strategy::Ht)
            .flat_map(|p| &p.payloads)
            .filter(|pl| pl.file == file && !pl.interval.is_empty())
            .map(|pl| pl.interval)
            .collect();
        delivered.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
        let mut pos = 0.0;
        for d in &delivered {
            if d.lo > pos + EPS {
                failures.push(PlanCheckFailure::CoverageGap {
                    file,
                    lo: pos,
                    hi: d.lo,
                });
            } else if d.lo < pos - EPS {
                failures.push(PlanCheckFailure::CoverageOverlap {
                    file,
                    lo: d.lo,
                    hi: pos.min(d.hi),
                });
            }
            pos = pos.max(d.hi);
        }
        if pos < 1.0 - EPS {
            failures.push(PlanCheckFailure::CoverageGap {
                file,
                lo: pos,
                hi: 1.0,
            });
        }
    }

    // (2) source availability, scanning phases in order so HT deliveries
    // feed later edge phases
    let file_slot = |file: usize| if file == demand.i() { 0 } else { 1 };
    let mut effective: [[Vec<Interval>; NUM_ENS]; 2] = [
        [
            placement.intervals(demand.i(), 0).to_vec(),
            placement.intervals(demand.i(), 1).to_vec(),
        ],
        [
            placement.intervals(demand.j(), 0).to_vec(),
            placement.intervals(demand.j(), 1).to_vec(),
        ],
    ];
    for phase in &plan.phases {
        for pl in &phase.payloads {
            if pl.interval.is_empty() || !demand.contains(pl.file) {
                continue;
            }
            let slot = file_slot(pl.file);
            match (phase.kind, pl.endpoint) {
                (Strategy::Ht, Endpoint::En(en)) => {
                    let overlap: f64 = effective[slot][en]
                        .iter()
                        .map(|c| c.overlap_len(&pl.interval))
                        .sum();
                    if overlap > EPS {
                        failures.push(PlanCheckFailure::RedundantHt {
                            file: pl.file,
                            lo: pl.interval.lo(),
                            hi: pl.interval.hi(),
                            en,
                        });
                    }
                    let mut merged = effective[slot][en].clone();
                    merged.push(pl.interval);
                    effective[slot][en] = normalize(merged);
                }
                (Strategy::Zf, Endpoint::User(_)) => {
                    let at_both = (0..NUM_ENS).all(|en| covers(&effective[slot][en], &pl.interval));
                    if !at_both {
                        failures.push(PlanCheckFailure::MissingSource {
                            kind: Strategy::Zf,
                            file: pl.file,
                            lo: pl.interval.lo(),
                            hi: pl.interval.hi(),
                        });
                    }
                }
                (Strategy::XIa, Endpoint::User(_)) => {
                    let at_any = (0..NUM_ENS).any(|en| covers(&effective[slot][en], &pl.interval));
                    if !at_any {
                        failures.push(PlanCheckFailure::MissingSource {
                            kind: Strategy::XIa,
                            file: pl.file,
                            lo: pl.interval.lo(),
                            hi: pl.interval.hi(),
                        });
                    }
                }
                (Strategy::StZf, Endpoint::User(_)) => {} // cloud-sourced
                _ => failures.push(PlanCheckFailure::MalformedPhase(format!(
                    "{} payload targets {}",
                    phase.kind,
                    pl.endpoint.label()
                ))),
            }
        }
    }

    // (3) accounting
    match plan_ndt(plan, rate) {
        Ok(recomputed) => {
            if !plan.total.approx_eq(&recomputed, TOL) {
                failures.push(PlanCheckFailure::AccountingMismatch {
                    stated: plan.total,
                    recomputed,
                });
            }
        }
        Err(e) => failures.push(PlanCheckFailure::MalformedPhase(e.to_string())),
    }

    PlanReport { failures }
}

/// Mix two plans for the same demand by file splitting: plan `a` handles the
/// first `alpha` of every file, plan `b` the rest. The mixed total is the
/// componentwise convex combination of the input totals.
pub fn mix_plans(a: &DeliveryPlan, b: &DeliveryPlan, alpha: f64) -> Result<DeliveryPlan> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: format!("must be in [0, 1], got {alpha}"),
        });
    }
    let same = (a.demand.i() == b.demand.i() && a.demand.j() == b.demand.j())
        || (a.demand.i() == b.demand.j() && a.demand.j() == b.demand.i());
    if !same {
        return Err(Error::DemandMismatch {
            a_i: a.demand.i(),
            a_j: a.demand.j(),
            b_i: b.demand.i(),
            b_j: b.demand.j(),
        });
    }
    let rescale_plan = |plan: &DeliveryPlan, offset: f64, scale: f64| -> Vec<Phase> {
        plan.phases
            .iter()
            .filter_map(|p| {
                let payloads: Vec<Payload> = p
                    .payloads
                    .iter()
                    .map(|pl| Payload {
                        file: pl.file,
                        interval: pl.interval.rescale(offset, scale),
                        endpoint: pl.endpoint,
                    })
                    .filter(|pl| !pl.interval.is_empty())
                    .collect();
                if payloads.is_empty() {
                    None
                } else {
                    Some(Phase {
                        kind: p.kind,
                        payloads,
                        ndt: p.ndt.scale(scale),
                    })
                }
            })
            .collect()
    };
    let mut phases = rescale_plan(a, 0.0, alpha);
    phases.extend(rescale_plan(b, alpha, 1.0 - alpha));
    Ok(DeliveryPlan {
        demand: a.demand,
        phases,
        total: a.total.scale(alpha).add(&b.total.scale(1.0 - alpha)),
    })
}

/// The per-file cache allocation implied by an `alpha` mixture of two
/// symmetric allocations.
pub fn mixed_allocation(a: &[f64], b: &[f64], alpha: f64) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| alpha * x + (1.0 - alpha) * y)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::ndt_inner;

    fn params(mu: f64, j: usize, rate: f64) -> SystemParams {
        SystemParams::new(mu, rate, j).unwrap()
    }

    fn plan_for(mu_i: f64, mu_j: f64, rate: f64) -> (DeliveryPlan, CachePlacement) {
        let p = params((mu_i + mu_j) / 2.0, 2, rate);
        let placement = build_cache_placement(&[mu_i, mu_j], rate, &p).unwrap();
        let plan = build_delivery_plan(&placement, Demand::new(0, 1).unwrap(), rate).unwrap();
        (plan, placement)
    }

    #[test]
    fn placement_layouts_match_rate_policy() {
        let p = params(0.3, 2, 0.2);
        let low = build_cache_placement(&[0.3, 0.3], 0.2, &p).unwrap();
        assert_eq!(low.intervals(0, 0), &[iv(0.0, 0.3)]);
        assert_eq!(low.intervals(0, 1), &[iv(0.7, 1.0)]);

        let p = params(0.75, 2, 0.2);
        let over = build_cache_placement(&[0.75, 0.75], 0.2, &p).unwrap();
        assert_eq!(over.intervals(0, 0), &[iv(0.0, 0.75)]);
        assert_eq!(over.intervals(0, 1), &[iv(0.25, 1.0)]);
        assert!((over.fraction(0, 0) - over.fraction(0, 1)).abs() <= EPS);

        let p = params(0.3, 2, 2.0);
        let high = build_cache_placement(&[0.3, 0.3], 2.0, &p).unwrap();
        assert_eq!(high.intervals(0, 0), &[iv(0.0, 0.3)]);
        assert_eq!(high.intervals(0, 1), &[iv(0.0, 0.3)]);
    }

    #[test]
    fn placement_rejects_capacity_violation() {
        let p = params(0.25, 2, 0.2);
        assert!(matches!(
            build_cache_placement(&[0.5, 0.25], 0.2, &p),
            Err(Error::CapacityViolation(_))
        ));
    }

    #[test]
    fn regime2_plan_matches_fig5_corner() {
        let (plan, placement) = plan_for(0.0, 0.5, 0.2);
        assert!((plan.total().delta_f() - 2.5).abs() <= TOL);
        assert!((plan.total().delta_e() - 1.5).abs() <= TOL);
        assert!((plan.total().total() - 4.0).abs() <= TOL);
        let kinds: Vec<Strategy> = plan.phases().iter().map(|p| p.kind).collect();
        assert_eq!(kinds, vec![Strategy::Ht, Strategy::XIa]);
        assert!(verify_plan(&plan, &placement, plan.demand(), 0.2).ok());
    }

    #[test]
    fn fully_cached_plan_is_single_zf() {
        let (plan, placement) = plan_for(1.0, 1.0, 0.5);
        assert_eq!(plan.phases().len(), 1);
        assert_eq!(plan.phases()[0].kind, Strategy::Zf);
        assert!((plan.total().total() - 1.0).abs() <= TOL);
        assert!(verify_plan(&plan, &placement, plan.demand(), 0.5).ok());
    }

    #[test]
    fn equal_fraction_regime1_plan_has_no_ht() {
        let (plan, placement) = plan_for(0.375, 0.375, 0.2);
        let kinds: Vec<Strategy> = plan.phases().iter().map(|p| p.kind).collect();
        assert_eq!(kinds, vec![Strategy::XIa, Strategy::StZf]);
        assert!((plan.phases()[0].ndt.delta_e() - 1.125).abs() <= TOL);
        assert!((plan.phases()[1].ndt.delta_f() - 1.25).abs() <= TOL);
        assert!((plan.phases()[1].ndt.delta_e() - 0.25).abs() <= TOL);
        assert!((plan.total().total() - 2.625).abs() <= TOL);
        assert!(verify_plan(&plan, &placement, plan.demand(), 0.2).ok());
    }

    #[test]
    fn high_rate_plan_sums_to_inner_bound() {
        let (plan, placement) = plan_for(0.0, 0.7, 2.0);
        assert!((plan.total().delta_f() - 0.5).abs() <= TOL);
        assert!((plan.total().delta_e() - 1.0).abs() <= TOL);
        assert!(verify_plan(&plan, &placement, plan.demand(), 2.0).ok());
    }

    #[test]
    fn plan_ndt_recomputes_total() {
        for &(a, b, r) in &[(0.0, 0.5, 0.2), (0.2, 0.4, 0.5), (0.8, 0.9, 1.0), (0.3, 0.6, 2.0)] {
            let (plan, _) = plan_for(a, b, r);
            let recomputed = plan_ndt(&plan, r).unwrap();
            assert!(recomputed.approx_eq(&plan.total(), 1e-12));
            let (expected, _) = ndt_inner(a, b, r);
            assert!((plan.total().total() - expected).abs() <= 1e-12);
        }
    }

    #[test]
    fn empty_plan_has_zero_ndt() {
        let plan = DeliveryPlan {
            demand: Demand::new(0, 1).unwrap(),
            phases: vec![],
            total: NdtPoint::ZERO,
        };
        let p = plan_ndt(&plan, 0.5).unwrap();
        assert_eq!((p.delta_f(), p.delta_e()), (0.0, 0.0));
    }

    #[test]
    fn asymmetric_placement_is_rejected() {
        let placement = CachePlacement::from_intervals(vec![
            [vec![iv(0.0, 0.5)], vec![iv(0.8, 1.0)]],
            [vec![iv(0.0, 0.3)], vec![iv(0.7, 1.0)]],
        ]);
        assert!(matches!(
            build_delivery_plan(&placement, Demand::new(0, 1).unwrap(), 0.5),
            Err(Error::UnsupportedPlacement(_))
        ));
    }

    #[test]
    fn verify_flags_unavailable_xia_source() {
        let (mut plan, placement) = plan_for(0.375, 0.375, 0.2);
        // widen an X-IA payload beyond what either EN holds
        let phase = &mut plan.phases[0];
        let victim = phase
            .payloads
            .iter_mut()
            .find(|p| p.interval.lo() == 0.0)
            .unwrap();
        victim.interval = iv(0.0, 0.6);
        let report = verify_plan(&plan, &placement, plan.demand(), 0.2);
        assert!(report
            .failures
            .iter()
            .any(|f| matches!(f, PlanCheckFailure::MissingSource { .. })));
    }

    #[test]
    fn verify_flags_coverage_gap() {
        let (mut plan, placement) = plan_for(0.375, 0.375, 0.2);
        // drop the ST+ZF middle of file 0
        let st = plan
            .phases
            .iter_mut()
            .find(|p| p.kind == Strategy::StZf)
            .unwrap();
        st.payloads.retain(|p| p.file != 0);
        let report = verify_plan(&plan, &placement, plan.demand(), 0.2);
        assert!(report.failures.iter().any(|f| matches!(
            f,
            PlanCheckFailure::CoverageGap { file: 0, .. }
        )));
    }

    #[test]
    fn verify_flags_accounting_mismatch() {
        let (mut plan, placement) = plan_for(0.2, 0.4, 0.5);
        plan.total = NdtPoint::new(0.0, 0.0).unwrap();
        let report = verify_plan(&plan, &placement, plan.demand(), 0.5);
        assert!(report
            .failures
            .iter()
            .any(|f| matches!(f, PlanCheckFailure::AccountingMismatch { .. })));
    }

    #[test]
    fn mixing_is_componentwise_convex() {
        let (a, _) = plan_for(0.25, 0.25, 0.2);
        let (b, _) = plan_for(0.5, 0.5, 0.2);
        for &alpha in &[0.0, 0.25, 0.5, 0.75, 1.0] {
            let mixed = mix_plans(&a, &b, alpha).unwrap();
            let expect = a.total().scale(alpha).add(&b.total().scale(1.0 - alpha));
            assert!(mixed.total().approx_eq(&expect, 1e-12));
            let recomputed = plan_ndt(&mixed, 0.2).unwrap();
            assert!(recomputed.approx_eq(&mixed.total(), 1e-9));
        }
        let mixed = mix_plans(&a, &b, 0.5).unwrap();
        assert!((mixed.total().total() - 2.625).abs() <= 1e-12);
    }

    #[test]
    fn mixing_requires_same_demand() {
        let p = params(0.5, 3, 0.5);
        let placement = build_cache_placement(&[0.5, 0.5, 0.5], 0.5, &p).unwrap();
        let a = build_delivery_plan(&placement, Demand::new(0, 1).unwrap(), 0.5).unwrap();
        let b = build_delivery_plan(&placement, Demand::new(0, 2).unwrap(), 0.5).unwrap();
        assert!(matches!(
            mix_plans(&a, &b, 0.5),
            Err(Error::DemandMismatch { .. })
        ));
    }

    #[test]
    fn plan_json_has_expected_shape() {
        let (plan, _) = plan_for(0.0, 0.5, 0.2);
        let doc: serde_json::Value = serde_json::from_str(&plan.to_json()).unwrap();
        assert_eq!(doc["demand"]["i"], 0);
        assert_eq!(doc["phases"][0]["kind"], "HT");
        assert_eq!(doc["phases"][0]["payloads"][0]["endpoint"], "EN1");
        let sum = doc["total"]["sum"].as_f64().unwrap();
        assert!((sum - 4.0).abs() <= TOL);
    }
}
