//! Independent verification of the converse bounds.
//!
//! The converse constraint system is rebuilt as five half-planes in
//! `(delta_e, delta_f)` and the minimum total NDT over the resulting
//! polytope is found exactly by vertex enumeration (two variables, five
//! constraints, at most ten candidate vertices). The module also
//! reconstructs each converse component as an explicit nonnegative
//! combination of the half-planes, and checks the symmetrization dominance
//! of the converse.

use crate::closed_form::{ndt_inner, ndt_outer, ndt_outer_component, Regime};
use crate::model::{symmetrize, CachePartition, Demand};
use crate::TOL;

/// The half-plane `a_e * delta_e + a_f * delta_f >= b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub a_e: f64,
    pub a_f: f64,
    pub b: f64,
}

impl HalfPlane {
    pub fn satisfied_by(&self, delta_e: f64, delta_f: f64, tol: f64) -> bool {
        self.a_e * delta_e + self.a_f * delta_f >= self.b - tol
    }

    fn slack(&self, delta_e: f64, delta_f: f64) -> f64 {
        self.a_e * delta_e + self.a_f * delta_f - self.b
    }
}

/// The five converse constraints for a demand with per-(EN, file) cached
/// fractions `(mu_1i, mu_2i, mu_1j, mu_2j)`:
///
/// 1. `delta_e + r delta_f >= 2 - min{mu_1i, mu_2i, mu_1j, mu_2j}`
/// 2. `r delta_f >= 1/2 - 1/2 min{mu_1i + mu_2i, mu_1j + mu_2j}`
/// 3. `r delta_f >= 1 - (mu_1i + mu_2i)/2 - (mu_1j + mu_2j)/2`
/// 4. `delta_e >= 1`
/// 5. `delta_f >= 0`
pub fn constraint_polytope(
    mu_1i: f64,
    mu_2i: f64,
    mu_1j: f64,
    mu_2j: f64,
    rate: f64,
) -> [HalfPlane; 5] {
    let min4 = mu_1i.min(mu_2i).min(mu_1j).min(mu_2j);
    let sum_i = mu_1i + mu_2i;
    let sum_j = mu_1j + mu_2j;
    [
        HalfPlane {
            a_e: 1.0,
            a_f: rate,
            b: 2.0 - min4,
        },
        HalfPlane {
            a_e: 0.0,
            a_f: rate,
            b: 0.5 - 0.5 * sum_i.min(sum_j),
        },
        HalfPlane {
            a_e: 0.0,
            a_f: rate,
            b: 1.0 - 0.5 * sum_i - 0.5 * sum_j,
        },
        HalfPlane {
            a_e: 1.0,
            a_f: 0.0,
            b: 1.0,
        },
        HalfPlane {
            a_e: 0.0,
            a_f: 1.0,
            b: 0.0,
        },
    ]
}

/// Solution of the 2-variable LP `min delta_e + delta_f`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    /// Optimal vertex `(delta_e, delta_f)`.
    pub vertex: (f64, f64),
    /// Indices (into the half-plane list) of constraints binding at the
    /// vertex.
    pub binding: Vec<usize>,
}

/// Minimize `delta_e + delta_f` over the intersection of the half-planes by
/// enumerating all pairwise constraint intersections.
///
/// The polytope always contains points with large coordinates and both
/// coordinates are bounded below by constraints 4 and 5, so a feasible
/// vertex always exists; this is asserted rather than handled.
pub fn lp_min_total(halfplanes: &[HalfPlane]) -> LpSolution {
    let mut best: Option<(f64, (f64, f64))> = None;
    for i in 0..halfplanes.len() {
        for j in (i + 1)..halfplanes.len() {
            let (p, q) = (halfplanes[i], halfplanes[j]);
            let det = p.a_e * q.a_f - p.a_f * q.a_e;
            if det.abs() < 1e-12 {
                continue; // parallel pair
            }
            let delta_e = (p.b * q.a_f - p.a_f * q.b) / det;
            let delta_f = (p.a_e * q.b - p.b * q.a_e) / det;
            if !halfplanes
                .iter()
                .all(|h| h.satisfied_by(delta_e, delta_f, TOL))
            {
                continue;
            }
            let value = delta_e + delta_f;
            if best.map_or(true, |(v, _)| value < v) {
                best = Some((value, (delta_e, delta_f)));
            }
        }
    }
    let (value, vertex) = best.expect("converse polytope has a feasible vertex");
    let binding = halfplanes
        .iter()
        .enumerate()
        .filter(|(_, h)| h.slack(vertex.0, vertex.1).abs() <= TOL)
        .map(|(k, _)| k)
        .collect();
    LpSolution {
        value,
        vertex,
        binding,
    }
}

/// Weights on the five constraints whose combination reproduces the given
/// converse component exactly. Nonnegative within the component's rate
/// regime (1-3 for `r <= 1`, 4 for `r > 1`); the weighted sum of left-hand
/// sides is the identity `delta_e + delta_f`.
pub fn dual_weights(regime: Regime, rate: f64) -> [f64; 5] {
    let inv_r = 1.0 / rate;
    match regime {
        Regime::R1 => [1.0, 0.0, inv_r - 1.0, 0.0, 0.0],
        Regime::R2 => [1.0, inv_r - 1.0, 0.0, 0.0, 0.0],
        Regime::R3 => [1.0, 0.0, 0.0, 0.0, 1.0 - rate],
        Regime::R4 => [inv_r, 0.0, 0.0, 1.0 - inv_r, 0.0],
    }
}

/// Evaluate the dual combination for one component: the weighted sum of the
/// constraint right-hand sides. Equals `ndt_outer_component` for the same
/// arguments.
pub fn dual_combination(
    regime: Regime,
    mu_1i: f64,
    mu_2i: f64,
    mu_1j: f64,
    mu_2j: f64,
    rate: f64,
) -> f64 {
    let planes = constraint_polytope(mu_1i, mu_2i, mu_1j, mu_2j, rate);
    let weights = dual_weights(regime, rate);
    weights.iter().zip(&planes).map(|(w, h)| w * h.b).sum()
}

/// Three-way tightness report for a symmetric allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct TightnessReport {
    pub inner: f64,
    pub regime: Regime,
    pub outer: f64,
    pub lp: LpSolution,
}

impl TightnessReport {
    pub fn pass(&self) -> bool {
        (self.inner - self.outer).abs() <= TOL && (self.inner - self.lp.value).abs() <= TOL
    }
}

/// Check that the achievable bound, the converse bound and the LP minimum
/// coincide on a symmetric allocation `(mu_i, mu_j)`.
pub fn check_tightness(mu_i: f64, mu_j: f64, rate: f64) -> TightnessReport {
    let (inner, regime) = ndt_inner(mu_i, mu_j, rate);
    let outer = ndt_outer(mu_i, mu_i, mu_j, mu_j, rate);
    let lp = lp_min_total(&constraint_polytope(mu_i, mu_i, mu_j, mu_j, rate));
    TightnessReport {
        inner,
        regime,
        outer,
        lp,
    }
}

/// Per-component symmetrization comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrizationEntry {
    pub regime: Regime,
    pub original: f64,
    pub symmetrized: f64,
}

impl SymmetrizationEntry {
    /// Original minus symmetrized; dominance requires this to be >= 0.
    pub fn delta(&self) -> f64 {
        self.original - self.symmetrized
    }
}

/// Symmetrization dominance report for one demand.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrizationReport {
    pub entries: [SymmetrizationEntry; 4],
    /// True when the four original entries are columnwise symmetric
    /// (`mu_1i = mu_2i` and `mu_1j = mu_2j`).
    pub symmetric_input: bool,
}

impl SymmetrizationReport {
    /// Dominance holds for every component, and a symmetric input yields
    /// equality for every component.
    pub fn pass(&self) -> bool {
        let dominated = self.entries.iter().all(|e| e.delta() >= -TOL);
        let equal_when_symmetric =
            !self.symmetric_input || self.entries.iter().all(|e| e.delta().abs() <= TOL);
        dominated && equal_when_symmetric
    }
}

/// Compare each converse component on a partition against the same
/// component on its symmetrized counterpart, for the two files of `demand`.
pub fn check_symmetrization(
    partition: &CachePartition,
    demand: Demand,
    rate: f64,
) -> SymmetrizationReport {
    let hat = symmetrize(partition);
    let quad = |p: &CachePartition| {
        (
            p.entry(0, demand.i()),
            p.entry(1, demand.i()),
            p.entry(0, demand.j()),
            p.entry(1, demand.j()),
        )
    };
    let (a1, a2, b1, b2) = quad(partition);
    let (h1, h2, h3, h4) = quad(&hat);
    let entries = Regime::ALL.map(|regime| SymmetrizationEntry {
        regime,
        original: ndt_outer_component(regime, a1, a2, b1, b2, rate),
        symmetrized: ndt_outer_component(regime, h1, h2, h3, h4, rate),
    });
    SymmetrizationReport {
        entries,
        symmetric_input: (a1 - a2).abs() <= TOL && (b1 - b2).abs() <= TOL,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polytope_for_symmetric_three_eighths() {
        let hp = constraint_polytope(0.375, 0.375, 0.375, 0.375, 0.2);
        assert!((hp[0].b - 1.625).abs() <= TOL && hp[0].a_f == 0.2);
        assert!((hp[1].b - 0.125).abs() <= TOL);
        assert!((hp[2].b - 0.25).abs() <= TOL);
        assert_eq!((hp[3].a_e, hp[3].b), (1.0, 1.0));
        assert_eq!((hp[4].a_f, hp[4].b), (1.0, 0.0));
    }

    #[test]
    fn polytope_for_empty_and_full_caches() {
        let hp = constraint_polytope(0.0, 0.0, 0.0, 0.0, 1.0);
        let rhs: Vec<f64> = hp.iter().map(|h| h.b).collect();
        assert_eq!(rhs, vec![2.0, 0.5, 1.0, 1.0, 0.0]);

        let hp = constraint_polytope(1.0, 1.0, 1.0, 1.0, 1.0);
        assert!((hp[0].b - 1.0).abs() <= TOL);
        assert!(hp[1].b <= TOL && hp[2].b <= TOL);
    }

    #[test]
    fn lp_finds_fig5_vertex() {
        let sol = lp_min_total(&constraint_polytope(0.375, 0.375, 0.375, 0.375, 0.2));
        assert!((sol.value - 2.625).abs() <= TOL);
        assert!((sol.vertex.0 - 1.375).abs() <= TOL);
        assert!((sol.vertex.1 - 1.25).abs() <= TOL);
        assert!(sol.binding.contains(&0) && sol.binding.contains(&2));
    }

    #[test]
    fn lp_hits_floor_when_fully_cached() {
        let sol = lp_min_total(&constraint_polytope(1.0, 1.0, 1.0, 1.0, 0.5));
        assert!((sol.value - 1.0).abs() <= TOL);
        assert!((sol.vertex.0 - 1.0).abs() <= TOL && sol.vertex.1.abs() <= TOL);
    }

    #[test]
    fn lp_matches_outer_on_asymmetric_allocation() {
        let sol = lp_min_total(&constraint_polytope(0.5, 0.1, 0.3, 0.3, 0.5));
        assert!((sol.value - 2.3).abs() <= TOL);
    }

    #[test]
    fn lp_witness_is_feasible() {
        for &(a, b, c, d, r) in &[
            (0.2, 0.8, 0.5, 0.1, 0.3),
            (0.0, 0.0, 0.0, 0.0, 2.0),
            (0.9, 0.9, 0.9, 0.9, 1.0),
        ] {
            let hp = constraint_polytope(a, b, c, d, r);
            let sol = lp_min_total(&hp);
            assert!(hp
                .iter()
                .all(|h| h.satisfied_by(sol.vertex.0, sol.vertex.1, TOL)));
            assert!((sol.value - sol.vertex.0 - sol.vertex.1).abs() <= TOL);
        }
    }

    #[test]
    fn dual_combination_reproduces_each_component() {
        let cases = [
            (0.5, 0.1, 0.3, 0.3, 0.5),
            (0.375, 0.375, 0.375, 0.375, 0.2),
            (0.2, 0.9, 0.0, 1.0, 1.0),
        ];
        for &(a, b, c, d, r) in &cases {
            for l in [Regime::R1, Regime::R2, Regime::R3] {
                let direct = ndt_outer_component(l, a, b, c, d, r);
                let combined = dual_combination(l, a, b, c, d, r);
                assert!(
                    (direct - combined).abs() <= 1e-12,
                    "{l:?}: {direct} vs {combined}"
                );
            }
        }
        for &(a, b, c, d) in &[(0.5, 0.1, 0.3, 0.3), (0.0, 0.0, 0.0, 0.0)] {
            let direct = ndt_outer_component(Regime::R4, a, b, c, d, 2.0);
            let combined = dual_combination(Regime::R4, a, b, c, d, 2.0);
            assert!((direct - combined).abs() <= 1e-12);
        }
    }

    #[test]
    fn dual_weights_are_nonnegative_in_regime() {
        for &r in &[0.1, 0.5, 1.0] {
            for l in [Regime::R1, Regime::R2, Regime::R3] {
                assert!(dual_weights(l, r).iter().all(|&w| w >= 0.0));
            }
        }
        assert!(dual_weights(Regime::R4, 2.0).iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn tightness_on_known_points() {
        let rep = check_tightness(0.375, 0.375, 0.2);
        assert!(rep.pass() && (rep.inner - 2.625).abs() <= TOL);

        let rep = check_tightness(1.0, 1.0, 2.0);
        assert!(rep.pass() && (rep.inner - 1.0).abs() <= TOL);

        let rep = check_tightness(0.3, 0.7, 0.4);
        assert!(rep.pass());
    }

    #[test]
    fn symmetrization_strict_on_asymmetric_min() {
        let p = CachePartition::new(vec![0.5, 0.3], vec![0.1, 0.3]).unwrap();
        let rep = check_symmetrization(&p, Demand::new(0, 1).unwrap(), 0.5);
        assert!(rep.pass());
        assert!(!rep.symmetric_input);
        // min4 moves from 0.1 to 0.3, so every component strictly decreases
        for e in &rep.entries {
            assert!(e.delta() > TOL, "{:?}", e);
        }
        let r1 = &rep.entries[0];
        assert!((r1.original - 2.3).abs() <= TOL);
    }

    #[test]
    fn symmetrization_equality_on_symmetric_input() {
        let p = CachePartition::symmetric(vec![0.4, 0.9]).unwrap();
        let rep = check_symmetrization(&p, Demand::new(0, 1).unwrap(), 0.3);
        assert!(rep.pass() && rep.symmetric_input);
        assert!(rep.entries.iter().all(|e| e.delta().abs() <= TOL));
    }

    #[test]
    fn symmetrization_on_swapped_full_caches() {
        let p = CachePartition::new(vec![1.0, 1.0], vec![0.0, 0.0]).unwrap();
        let rep = check_symmetrization(&p, Demand::new(0, 1).unwrap(), 0.5);
        assert!(rep.pass() && !rep.symmetric_input);
        let r3 = &rep.entries[2];
        assert!((r3.original - 2.0).abs() <= TOL);
        assert!((r3.symmetrized - 1.5).abs() <= TOL);
    }
}
