//! Large-N limit of the effective spin models.
//!
//! For `H = ε J_z − (γ/N) J_x²` the free energy per atom as N → ∞ is the
//! minimum over `m ∈ [0, 1]` of
//!
//! ```text
//! f(m) = γ m²/4 − (1/β) ln[2 cosh((β/2) √(ε² + γ² m²))]
//! ```
//!
//! where `m = 2⟨J_x⟩/N`. A nonzero minimiser appears once
//! `tanh(βε/2) > ε/γ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{check_beta, coupling_coefficient, ModelKind};

/// Points in the uniform pre-scan of `m ∈ [0, 1]`.
pub const PRESCAN_POINTS: usize = 401;
/// Width at which golden-section refinement stops.
pub const MINIMIZER_TOL: f64 = 1e-10;
/// An interior minimum must beat `f(0)` by at least this much.
pub const ORDERING_MARGIN: f64 = 1e-13;
/// Inverse-temperature window searched for a transition.
pub const BETA_SEARCH_RANGE: (f64, f64) = (1e-6, 1e6);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitPoint {
    pub beta: f64,
    pub order_parameter: f64,
    pub free_energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GapStatus {
    /// Root bracketed and refined.
    Found,
    /// The gap function stays negative over the whole search range.
    NoTransition,
    /// Already ordered at the smallest β searched; any transition lies
    /// above the searched temperature range.
    OrderedAtLowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapSolution {
    pub kind: ModelKind,
    pub beta_c: Option<f64>,
    /// Width of the final bisection bracket (whole search range when absent).
    pub bracket_width: f64,
    pub status: GapStatus,
}

impl GapSolution {
    pub fn t_c(&self) -> Option<f64> {
        self.beta_c.map(|b| 1.0 / b)
    }
}

/// `ln(2 cosh x)` without overflow.
fn ln_two_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p()
}

/// Mean-field free energy per atom at order parameter `m`.
pub fn mf_free_energy(m: f64, beta: f64, epsilon: f64, gamma: f64) -> f64 {
    let field = (epsilon * epsilon + gamma * gamma * m * m).sqrt();
    0.25 * gamma * m * m - ln_two_cosh(0.5 * beta * field) / beta
}

fn golden_section(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > MINIMIZER_TOL {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    let m = 0.5 * (lo + hi);
    (m, f(m))
}

/// Global minimum of [`mf_free_energy`] over `m ∈ [0, 1]`.
pub fn minimize_mf(beta: f64, epsilon: f64, gamma: f64) -> LimitPoint {
    let f = |m: f64| mf_free_energy(m, beta, epsilon, gamma);
    let f0 = f(0.0);
    let last = PRESCAN_POINTS - 1;
    let grid = |i: usize| i as f64 / last as f64;

    let (best_i, best_f) = (0..PRESCAN_POINTS)
        .map(|i| (i, f(grid(i))))
        .fold((0, f0), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
    let lo = grid(best_i.saturating_sub(1));
    let hi = grid((best_i + 1).min(last));
    let (m_ref, f_ref) = golden_section(lo, hi, f);
    let (m, fm) = if f_ref < best_f { (m_ref, f_ref) } else { (grid(best_i), best_f) };

    if m > 0.0 && fm < f0 - ORDERING_MARGIN {
        LimitPoint { beta, order_parameter: m, free_energy: fm }
    } else {
        LimitPoint { beta, order_parameter: 0.0, free_energy: f0 }
    }
}

/// `tanh(βε/2) − ε/(4λ² c(β))`; positive on the ordered side.
pub fn gap_function(kind: ModelKind, beta: f64, epsilon: f64, lambda: f64) -> Result<f64> {
    let gamma = 4.0 * lambda * lambda * coupling_coefficient(kind, beta)?;
    Ok((0.5 * beta * epsilon).tanh() - epsilon / gamma)
}

fn check_effective_inputs(kind: ModelKind, epsilon: f64, lambda: f64) -> Result<()> {
    if !kind.is_effective() {
        return Err(Error::NotEffectiveModel(kind.as_str()));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be > 0, got {epsilon}")));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
    }
    Ok(())
}

/// Critical inverse temperature from the gap equation. The search walks a
/// log-spaced grid from high to low temperature and bisects the first sign
/// change, so with several roots the highest `T_c` is reported.
pub fn critical_beta(kind: ModelKind, epsilon: f64, lambda: f64) -> Result<GapSolution> {
    check_effective_inputs(kind, epsilon, lambda)?;
    let (b_min, b_max) = BETA_SEARCH_RANGE;
    let absent = |status| GapSolution { kind, beta_c: None, bracket_width: b_max - b_min, status };
    if lambda == 0.0 {
        return Ok(absent(GapStatus::NoTransition));
    }
    let g = |b: f64| gap_function(kind, b, epsilon, lambda);

    const PER_DECADE: usize = 40;
    let decades = (b_max / b_min).log10();
    let steps = (decades * PER_DECADE as f64).round() as usize;
    let at = |i: usize| b_min * 10f64.powf(decades * i as f64 / steps as f64);

    let mut lo = b_min;
    let mut g_lo = g(lo)?;
    if g_lo >= 0.0 {
        return Ok(absent(GapStatus::OrderedAtLowerBound));
    }
    let mut hi = None;
    for i in 1..=steps {
        let b = if i == steps { b_max } else { at(i) };
        if g(b)? >= 0.0 {
            hi = Some(b);
            break;
        }
        lo = b;
    }
    let Some(mut hi) = hi else {
        return Ok(absent(GapStatus::NoTransition));
    };

    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid)?;
        if g_mid < 0.0 {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    let g_hi = g(hi)?;
    let beta_c = if g_hi.abs() <= g_lo.abs() { hi } else { lo };
    Ok(GapSolution { kind, beta_c: Some(beta_c), bracket_width: hi - lo, status: GapStatus::Found })
}

/// Large-N free energy per atom with `γ = 4λ² c(β)`.
pub fn limit_free_energy(kind: ModelKind, beta: f64, epsilon: f64, lambda: f64) -> Result<LimitPoint> {
    check_effective_inputs(kind, epsilon, lambda)?;
    check_beta(beta)?;
    let gamma = 4.0 * lambda * lambda * coupling_coefficient(kind, beta)?;
    Ok(minimize_mf(beta, epsilon, gamma))
}
