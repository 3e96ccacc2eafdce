//! Closed-form NDT evaluation: constituent strategy costs and the
//! achievable (inner) and converse (outer) bounds on the per-demand NDT.
//!
//! The inner bound applies to symmetric per-file allocations (both ENs cache
//! the same fraction `mu_i` of file `i`); the outer bound takes the full
//! four-entry, possibly asymmetric, allocation for the two requested files.
//! Both bounds come in four regime components; the dispatched bound picks
//! the component by the fronthaul rate and the cached fractions.

use crate::model::NdtPoint;
use crate::TOL;

/// The four constituent delivery strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Hard-transfer fronthauling: the cloud ships raw fragments to the ENs
    /// over parallel fronthaul links.
    Ht,
    /// Zero-forcing beamforming: both ENs hold the fragment and cancel
    /// interference cooperatively.
    Zf,
    /// Soft-transfer: the cloud precodes the ZF signal and ships quantized
    /// baseband samples over the fronthaul.
    StZf,
    /// X-channel interference alignment: each EN holds a different fragment
    /// of each requested file.
    XIa,
}

impl Strategy {
    pub fn label(&self) -> &'static str {
        match self {
            Strategy::Ht => "HT",
            Strategy::Zf => "ZF",
            Strategy::StZf => "ST+ZF",
            Strategy::XIa => "X-IA",
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// One strategy applied to messages of `nu` file-fractions each.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyInvocation {
    pub kind: Strategy,
    pub nu: f64,
}

/// Which of the four bound components is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Low rate, both fractions below 1/2.
    R1,
    /// Low rate, one fraction on each side of 1/2.
    R2,
    /// Low rate, both fractions above 1/2.
    R3,
    /// High rate (`r > 1`).
    R4,
}

impl Regime {
    pub const ALL: [Regime; 4] = [Regime::R1, Regime::R2, Regime::R3, Regime::R4];

    pub fn index(&self) -> u8 {
        match self {
            Regime::R1 => 1,
            Regime::R2 => 2,
            Regime::R3 => 3,
            Regime::R4 => 4,
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// Fronthaul and edge NDT of one strategy invocation.
///
/// HT: `(nu/r, 0)`; ZF: `(0, nu)`; ST+ZF: `(nu/r, nu)`; X-IA: `(0, 3 nu)`.
pub fn strategy_ndt(inv: StrategyInvocation, rate: f64) -> NdtPoint {
    debug_assert!(rate > 0.0 && (0.0..=1.0 + TOL).contains(&inv.nu));
    let (f, e) = match inv.kind {
        Strategy::Ht => (inv.nu / rate, 0.0),
        Strategy::Zf => (0.0, inv.nu),
        Strategy::StZf => (inv.nu / rate, inv.nu),
        Strategy::XIa => (0.0, 3.0 * inv.nu),
    };
    NdtPoint::new(f, e).expect("strategy NDT components are nonnegative")
}

/// Achievable-bound component for the given regime, evaluated on a symmetric
/// allocation regardless of whether the regime actually applies.
pub fn ndt_inner_component(regime: Regime, mu_i: f64, mu_j: f64, rate: f64) -> f64 {
    let lo = mu_i.min(mu_j);
    let hi = mu_i.max(mu_j);
    let inv_r = 1.0 / rate;
    match regime {
        Regime::R1 => 1.0 + inv_r - (inv_r - 1.0) * hi - inv_r * lo,
        Regime::R2 => 1.5 + inv_r * (0.5 - lo),
        Regime::R3 => 2.0 - lo,
        Regime::R4 => 1.0 + inv_r - inv_r * lo,
    }
}

/// Dispatched achievable bound and the regime it selected.
///
/// When a fraction sits exactly on the 1/2 boundary the adjacent component
/// formulas coincide; R2 is returned as the canonical choice and the
/// agreement is asserted.
pub fn ndt_inner(mu_i: f64, mu_j: f64, rate: f64) -> (f64, Regime) {
    let regime = if rate > 1.0 {
        Regime::R4
    } else if mu_i < 0.5 && mu_j < 0.5 {
        Regime::R1
    } else if mu_i > 0.5 && mu_j > 0.5 {
        Regime::R3
    } else {
        Regime::R2
    };
    let value = ndt_inner_component(regime, mu_i, mu_j, rate);
    if rate <= 1.0 && (mu_i == 0.5 || mu_j == 0.5) {
        // Self-checking dispatch: every component applicable at the
        // boundary must agree with the canonical one.
        for other in [Regime::R1, Regime::R3] {
            let applicable = match other {
                Regime::R1 => mu_i <= 0.5 && mu_j <= 0.5,
                Regime::R3 => mu_i >= 0.5 && mu_j >= 0.5,
                _ => false,
            };
            if applicable {
                let alt = ndt_inner_component(other, mu_i, mu_j, rate);
                debug_assert!(
                    (alt - value).abs() <= TOL,
                    "regime boundary disagreement: {other:?} gives {alt}, R2 gives {value}"
                );
            }
        }
    }
    (value, regime)
}

/// Converse-bound component for the given regime on the full four-entry
/// allocation `(mu_1i, mu_2i, mu_1j, mu_2j)`.
pub fn ndt_outer_component(
    regime: Regime,
    mu_1i: f64,
    mu_2i: f64,
    mu_1j: f64,
    mu_2j: f64,
    rate: f64,
) -> f64 {
    let min4 = mu_1i.min(mu_2i).min(mu_1j).min(mu_2j);
    let sum_i = mu_1i + mu_2i;
    let sum_j = mu_1j + mu_2j;
    let inv_r = 1.0 / rate;
    match regime {
        Regime::R1 => 1.0 + inv_r - min4 - 0.5 * (inv_r - 1.0) * (sum_i + sum_j),
        Regime::R2 => 1.5 + 0.5 * inv_r - min4 - 0.5 * (inv_r - 1.0) * sum_i.min(sum_j),
        Regime::R3 => 2.0 - min4,
        Regime::R4 => 1.0 + inv_r - inv_r * min4,
    }
}

/// Dispatched converse bound: the max of components 1-3 for `r <= 1`,
/// component 4 for `r > 1`.
pub fn ndt_outer(mu_1i: f64, mu_2i: f64, mu_1j: f64, mu_2j: f64, rate: f64) -> f64 {
    if rate > 1.0 {
        ndt_outer_component(Regime::R4, mu_1i, mu_2i, mu_1j, mu_2j, rate)
    } else {
        [Regime::R1, Regime::R2, Regime::R3]
            .into_iter()
            .map(|l| ndt_outer_component(l, mu_1i, mu_2i, mu_1j, mu_2j, rate))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}
