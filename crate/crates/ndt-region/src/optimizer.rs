//! Two-class region slices and average-latency trade-offs.
//!
//! Files are split into two classes with per-class symmetric cache
//! fractions; the class capacity constraint is
//! `J1 * mu1 + J2 * mu2 <= mu * (J1 + J2)`. Sweeping the class-1 fraction
//! (with the constraint binding) traces the boundary of the NDT region
//! slice in the `(delta_{(1),(2)}, delta_{(1),(1)})` plane; mapping each
//! point through a popularity profile gives the average-latency trade-off.
//! Both curves are reduced to their lower-left Pareto envelope.

use crate::closed_form::{ndt_inner, Regime};
use crate::model::PopularityProfile;
use crate::{Error, Result, TOL};

/// A two-class scenario with a concrete per-class allocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassScenario {
    pub j1: usize,
    pub j2: usize,
    pub mu: f64,
    pub rate: f64,
    pub alloc1: f64,
    pub alloc2: f64,
}

impl ClassScenario {
    pub fn new(j1: usize, j2: usize, mu: f64, rate: f64, alloc1: f64, alloc2: f64) -> Result<Self> {
        for (name, value) in [("alloc1", alloc1), ("alloc2", alloc2)] {
            if !(-TOL..=1.0 + TOL).contains(&value) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be in [0, 1], got {value}"),
                });
            }
        }
        if j1 == 0 || j2 == 0 {
            return Err(Error::InvalidParameter {
                name: "class sizes",
                reason: "both classes need at least one file".into(),
            });
        }
        let lhs = j1 as f64 * alloc1 + j2 as f64 * alloc2;
        let rhs = mu * (j1 + j2) as f64;
        if lhs > rhs + TOL {
            return Err(Error::CapacityViolation(format!(
                "J1*mu1 + J2*mu2 = {lhs} exceeds mu*(J1+J2) = {rhs}"
            )));
        }
        Ok(Self {
            j1,
            j2,
            mu,
            rate,
            alloc1,
            alloc2,
        })
    }
}

/// The three per-demand-type NDTs of one allocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlicePoint {
    /// NDT for two class-1 files.
    pub d11: f64,
    /// NDT for one file from each class.
    pub d12: f64,
    /// NDT for two class-2 files.
    pub d22: f64,
    /// Regime active for the cross-class demand.
    pub regime12: Regime,
}

/// Evaluate the three demand-type NDTs of a scenario: distinct files within
/// a class share the class fraction.
pub fn slice_point(scenario: &ClassScenario) -> SlicePoint {
    let (d11, _) = ndt_inner(scenario.alloc1, scenario.alloc1, scenario.rate);
    let (d12, regime12) = ndt_inner(scenario.alloc1, scenario.alloc2, scenario.rate);
    let (d22, _) = ndt_inner(scenario.alloc2, scenario.alloc2, scenario.rate);
    SlicePoint {
        d11,
        d12,
        d22,
        regime12,
    }
}

/// One swept sample: a 2-D objective point with its achieving allocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSample {
    pub x: f64,
    pub y: f64,
    pub alloc1: f64,
    pub alloc2: f64,
    pub regime: Regime,
}

/// A Pareto polyline in the `(d12, d11)` plane with achieving allocations.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSlice {
    /// Envelope points sorted by increasing `x` with strictly decreasing `y`.
    pub points: Vec<SweepSample>,
    /// Envelope points at which the active regime changes.
    pub breakpoints: Vec<SweepSample>,
}

/// A Pareto trade-off curve in the average-latency plane.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffCurve {
    pub points: Vec<SweepSample>,
    pub profile: PopularityProfile,
}

/// Reading of the class-2 average formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AverageMode {
    /// Class-2 pairs use the class-2 within-class NDT.
    #[default]
    ClassConsistent,
    /// Class-2 pairs use the class-1 within-class NDT (the formula as it
    /// appears in some write-ups).
    AsPrinted,
}

/// Popularity-weighted average NDT per class.
///
/// `delta_bar_1 = p11/(p11+p12) * d11 + p12/(p11+p12) * d12`, and
/// symmetrically for class 2. A degenerate profile (`a` equal to 0 or 1)
/// leaves the never-requested class's average undefined (`None`).
pub fn average_ndt(
    d11: f64,
    d12: f64,
    d22: f64,
    profile: PopularityProfile,
    mode: AverageMode,
) -> (Option<f64>, Option<f64>) {
    let (p11, p12, p22) = (profile.p11(), profile.p12(), profile.p22());
    let class1 = if p11 + p12 > 0.0 {
        Some((p11 * d11 + p12 * d12) / (p11 + p12))
    } else {
        None
    };
    let within2 = match mode {
        AverageMode::ClassConsistent => d22,
        AverageMode::AsPrinted => d11,
    };
    let class2 = if p22 + p12 > 0.0 {
        Some((p22 * within2 + p12 * d12) / (p22 + p12))
    } else {
        None
    };
    (class1, class2)
}

/// Largest feasible class-1 fraction, `min(1, mu*(J1+J2)/J1)`.
fn alloc1_max(j1: usize, j2: usize, mu: f64) -> f64 {
    (mu * (j1 + j2) as f64 / j1 as f64).min(1.0)
}

/// Largest feasible class-2 fraction given `alloc1` (capacity binding).
fn alloc2_for(j1: usize, j2: usize, mu: f64, alloc1: f64) -> f64 {
    ((mu * (j1 + j2) as f64 - j1 as f64 * alloc1) / j2 as f64)
        .min(1.0)
        .max(0.0)
}

/// The swept class-1 fractions: a uniform grid plus the exact kink
/// candidates (0, 1/2, 1, the diagonal crossing at `mu`, and the values
/// where the binding class-2 fraction hits 0, 1/2 or 1).
fn sweep_values(j1: usize, j2: usize, mu: f64, step: f64) -> Vec<f64> {
    let hi = alloc1_max(j1, j2, mu);
    let total = mu * (j1 + j2) as f64;
    let mut values = Vec::new();
    let n = (hi / step).floor() as usize;
    for k in 0..=n {
        values.push((k as f64 * step).min(hi));
    }
    let kinks = [
        0.0,
        0.5,
        1.0,
        mu,
        (total - 0.5 * j2 as f64) / j1 as f64,
        (total - j2 as f64) / j1 as f64,
        total / j1 as f64,
    ];
    for v in kinks {
        if (0.0..=hi + TOL).contains(&v) {
            values.push(v.min(hi));
        }
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    values
}

/// The non-weakly-dominated subset (smaller is better in both coordinates),
/// sorted by the first coordinate, ties collapsed.
pub fn pareto_envelope(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let samples: Vec<SweepSample> = points
        .iter()
        .map(|&(x, y)| SweepSample {
            x,
            y,
            alloc1: 0.0,
            alloc2: 0.0,
            regime: Regime::R1,
        })
        .collect();
    envelope(samples).into_iter().map(|s| (s.x, s.y)).collect()
}

fn envelope(mut samples: Vec<SweepSample>) -> Vec<SweepSample> {
    samples.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap());
    let mut out: Vec<SweepSample> = Vec::new();
    for s in samples {
        if let Some(last) = out.last() {
            if (s.x - last.x).abs() <= 1e-12 || s.y >= last.y - 1e-12 {
                continue; // dominated or duplicate x
            }
        }
        out.push(s);
    }
    out
}

fn regime_breakpoints(points: &[SweepSample]) -> Vec<SweepSample> {
    points
        .windows(2)
        .filter(|w| w[0].regime != w[1].regime)
        .map(|w| w[1])
        .collect()
}

/// Sweep options; `interior` additionally samples non-binding class-2
/// fractions (validation mode — the binding sweep dominates it).
#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    pub step: f64,
    pub interior: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            step: 1e-3,
            interior: false,
        }
    }
}

fn sweep_samples<F>(j1: usize, j2: usize, mu: f64, rate: f64, opts: SweepOptions, map: F) -> Vec<SweepSample>
where
    F: Fn(&SlicePoint) -> (f64, f64),
{
    let mut samples = Vec::new();
    let mut push = |alloc1: f64, alloc2: f64| {
        let scenario = ClassScenario {
            j1,
            j2,
            mu,
            rate,
            alloc1,
            alloc2,
        };
        let sp = slice_point(&scenario);
        let (x, y) = map(&sp);
        samples.push(SweepSample {
            x,
            y,
            alloc1,
            alloc2,
            regime: sp.regime12,
        });
    };
    for alloc1 in sweep_values(j1, j2, mu, opts.step) {
        let alloc2 = alloc2_for(j1, j2, mu, alloc1);
        push(alloc1, alloc2);
        if opts.interior {
            let mut inner = 0.0;
            while inner < alloc2 {
                push(alloc1, inner);
                inner += opts.step.max(0.05);
            }
        }
    }
    samples
}

/// Trace the `(d12, d11)` slice of the NDT region for a two-class library.
pub fn trace_region_slice(
    j1: usize,
    j2: usize,
    mu: f64,
    rate: f64,
    opts: SweepOptions,
) -> RegionSlice {
    let samples = sweep_samples(j1, j2, mu, rate, opts, |sp| (sp.d12, sp.d11));
    let points = envelope(samples);
    let breakpoints = regime_breakpoints(&points);
    RegionSlice {
        points,
        breakpoints,
    }
}

/// Trace the average-latency trade-off curve for a popularity profile.
pub fn trace_average_tradeoff(
    j1: usize,
    j2: usize,
    mu: f64,
    rate: f64,
    profile: PopularityProfile,
    opts: SweepOptions,
    mode: AverageMode,
) -> Result<TradeoffCurve> {
    if profile.a() <= 0.0 || profile.a() >= 1.0 {
        return Err(Error::InvalidParameter {
            name: "a",
            reason: "both class averages need 0 < a < 1".into(),
        });
    }
    let samples = sweep_samples(j1, j2, mu, rate, opts, |sp| {
        let (c1, c2) = average_ndt(sp.d11, sp.d12, sp.d22, profile, mode);
        (c1.expect("a in (0,1)"), c2.expect("a in (0,1)"))
    });
    Ok(TradeoffCurve {
        points: envelope(samples),
        profile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn has_point(points: &[SweepSample], x: f64, y: f64) -> bool {
        points
            .iter()
            .any(|p| (p.x - x).abs() <= TOL && (p.y - y).abs() <= TOL)
    }

    #[test]
    fn slice_points_match_labeled_allocations() {
        let sp = slice_point(&ClassScenario::new(2, 2, 0.375, 0.2, 0.75, 0.0).unwrap());
        assert!((sp.d12 - 4.0).abs() <= TOL && (sp.d11 - 1.25).abs() <= TOL);

        let sp = slice_point(&ClassScenario::new(2, 2, 0.25, 0.2, 0.25, 0.25).unwrap());
        assert!((sp.d12 - 3.75).abs() <= TOL);
        assert!((sp.d11 - 3.75).abs() <= TOL && (sp.d22 - 3.75).abs() <= TOL);

        let sp = slice_point(&ClassScenario::new(2, 2, 0.75, 0.2, 1.0, 0.5).unwrap());
        assert!((sp.d12 - 1.5).abs() <= TOL && (sp.d11 - 1.0).abs() <= TOL);
    }

    #[test]
    fn scenario_rejects_capacity_violation() {
        assert!(matches!(
            ClassScenario::new(2, 2, 0.25, 0.2, 0.75, 0.25),
            Err(Error::CapacityViolation(_))
        ));
    }

    #[test]
    fn region_slice_passes_through_labeled_points() {
        let opts = SweepOptions {
            step: 0.01,
            interior: false,
        };
        let slice = trace_region_slice(2, 2, 0.5, 0.2, opts);
        assert!(has_point(&slice.points, 1.5, 1.5));
        assert!(has_point(&slice.points, 4.0, 1.0));

        let slice = trace_region_slice(2, 2, 0.375, 0.2, opts);
        assert!(has_point(&slice.points, 2.625, 2.625));
        assert!(has_point(&slice.points, 2.75, 1.5));
        assert!(has_point(&slice.points, 4.0, 1.25));
        assert!(!slice.breakpoints.is_empty());
    }

    #[test]
    fn full_capacity_slice_is_a_single_point() {
        let slice = trace_region_slice(2, 2, 1.0, 0.7, SweepOptions::default());
        assert_eq!(slice.points.len(), 1);
        assert!(has_point(&slice.points, 1.0, 1.0));
    }

    #[test]
    fn envelope_is_monotone() {
        let slice = trace_region_slice(3, 5, 0.4, 0.3, SweepOptions::default());
        for w in slice.points.windows(2) {
            assert!(w[0].x < w[1].x);
            assert!(w[0].y > w[1].y);
        }
    }

    #[test]
    fn pareto_drops_weakly_dominated_points() {
        let pts = vec![(1.0, 3.0), (2.0, 2.0), (3.0, 1.0), (2.0, 3.0)];
        assert_eq!(
            pareto_envelope(&pts),
            vec![(1.0, 3.0), (2.0, 2.0), (3.0, 1.0)]
        );
        assert_eq!(pareto_envelope(&[(5.0, 5.0)]), vec![(5.0, 5.0)]);
        assert_eq!(
            pareto_envelope(&[(2.0, 2.0), (2.0, 2.0), (2.0, 2.0)]),
            vec![(2.0, 2.0)]
        );
        assert!(pareto_envelope(&[]).is_empty());
    }

    #[test]
    fn average_weights_match_popularity() {
        let profile = PopularityProfile::new(0.5).unwrap();
        let (c1, _) = average_ndt(1.5, 2.75, 9.9, profile, AverageMode::ClassConsistent);
        assert!((c1.unwrap() - (1.5 / 3.0 + 2.0 * 2.75 / 3.0)).abs() <= TOL);

        let (c1, c2) = average_ndt(3.0, 3.0, 3.0, profile, AverageMode::ClassConsistent);
        assert!((c1.unwrap() - 3.0).abs() <= TOL && (c2.unwrap() - 3.0).abs() <= TOL);
    }

    #[test]
    fn degenerate_popularity_leaves_one_side_undefined() {
        let (c1, c2) = average_ndt(
            1.0,
            2.0,
            3.0,
            PopularityProfile::new(1.0).unwrap(),
            AverageMode::ClassConsistent,
        );
        assert!((c1.unwrap() - 1.0).abs() <= TOL);
        assert!(c2.is_none());

        let (c1, c2) = average_ndt(
            1.0,
            2.0,
            3.0,
            PopularityProfile::new(0.0).unwrap(),
            AverageMode::ClassConsistent,
        );
        assert!(c1.is_none());
        assert!((c2.unwrap() - 3.0).abs() <= TOL);
    }

    #[test]
    fn as_printed_mode_uses_class1_within_term() {
        let profile = PopularityProfile::new(0.5).unwrap();
        let (_, c2) = average_ndt(1.0, 2.0, 4.0, profile, AverageMode::AsPrinted);
        assert!((c2.unwrap() - (1.0 / 3.0 + 2.0 * 2.0 / 3.0)).abs() <= TOL);
    }

    #[test]
    fn symmetric_allocation_gives_equal_averages() {
        let profile = PopularityProfile::new(0.5).unwrap();
        let sp = slice_point(&ClassScenario::new(2, 2, 0.375, 0.2, 0.375, 0.375).unwrap());
        let (c1, c2) = average_ndt(sp.d11, sp.d12, sp.d22, profile, AverageMode::ClassConsistent);
        assert!((c1.unwrap() - c2.unwrap()).abs() <= TOL);
    }

    #[test]
    fn tradeoff_curve_is_diagonal_symmetric_for_balanced_profile() {
        let curve = trace_average_tradeoff(
            2,
            2,
            0.375,
            0.2,
            PopularityProfile::new(0.5).unwrap(),
            SweepOptions {
                step: 0.01,
                interior: false,
            },
            AverageMode::ClassConsistent,
        )
        .unwrap();
        for p in &curve.points {
            assert!(
                curve
                    .points
                    .iter()
                    .any(|q| (q.x - p.y).abs() <= TOL && (q.y - p.x).abs() <= TOL),
                "no mirror for ({}, {})",
                p.x,
                p.y
            );
        }
    }
}
