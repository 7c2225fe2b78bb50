//! Infinite-size limit of the two-star model.
//!
//! The limiting free energy is `sup_u F(u)` with
//! `F(u) = αu²/2 + hu/2 − I(u)/2` and `I(u) = u ln u + (1−u) ln(1−u)`.
//! Stationary points solve `σ(2αu + h) = u`. The global maximizer `u*` is
//! the limiting edge density, and where it is unique and non-degenerate
//! the limiting variance of the edge count is
//! `v = ∂_h u* = u*(1−u*) / (1 − 2αu*(1−u*))`.
//!
//! Coexistence of two maximizers occurs on a curve `h = q(α)` starting at
//! `(2, −2)`. Because `F(1−u) − F(u) = (α + h)(1 − 2u)/2`, the curve is
//! `q(α) = −α` wherever two outer roots exist; [`critical_curve`] locates it
//! numerically without assuming this.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::sigmoid;

/// Number of scan intervals on `[0, 1]` for root bracketing.
pub const SCAN_INTERVALS: usize = 10_000;

/// Roots are bisected at least this far.
pub const ROOT_TOL: f64 = 1e-12;

/// Residual bound every reported root satisfies.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Objective values within this of each other count as tied maximizers.
pub const TIE_TOL: f64 = 1e-10;

/// `|1 − 2αu(1−u)|` at or below this marks a degenerate maximizer.
pub const DEGENERACY_TOL: f64 = 1e-6;

/// Accuracy guaranteed for `q(α)`.
pub const CURVE_TOL: f64 = 1e-8;

/// Step and tolerance of the finite-difference variance cross-check.
pub const VARIANCE_FD_STEP: f64 = 1e-5;
pub const VARIANCE_FD_TOL: f64 = 1e-6;

fn check_unit(u: f64) -> Result<()> {
    if (0.0..=1.0).contains(&u) {
        Ok(())
    } else {
        Err(Error::OutOfUnitInterval(u))
    }
}

/// `I(u)`, with `I(0) = I(1) = 0`.
pub fn entropy(u: f64) -> Result<f64> {
    check_unit(u)?;
    let xlnx = |x: f64| if x == 0.0 { 0.0 } else { x * x.ln() };
    Ok(xlnx(u) + xlnx(1.0 - u))
}

/// `F(u) = αu²/2 + hu/2 − I(u)/2`.
pub fn objective(u: f64, alpha: f64, h: f64) -> Result<f64> {
    Ok(alpha * u * u / 2.0 + h * u / 2.0 - entropy(u)? / 2.0)
}

/// `1 − 2αu(1−u)`, the curvature factor of the fixed-point map.
pub fn degeneracy(u: f64, alpha: f64) -> f64 {
    1.0 - 2.0 * alpha * u * (1.0 - u)
}

#[inline]
fn residual(u: f64, alpha: f64, h: f64) -> f64 {
    sigmoid(2.0 * alpha * u + h) - u
}

/// All roots of `σ(2αu + h) = u` in `[0, 1]`, ascending.
///
/// Sign changes on a uniform grid are bisected to full precision; grid
/// points where the residual vanishes exactly are reported as roots.
/// Tangential roots strictly between grid points are not detected.
pub fn fixed_points(alpha: f64, h: f64) -> Vec<f64> {
    let grid = |k: usize| k as f64 / SCAN_INTERVALS as f64;
    let mut roots = Vec::new();
    let mut prev = residual(0.0, alpha, h);
    if prev == 0.0 {
        roots.push(0.0);
    }
    for k in 1..=SCAN_INTERVALS {
        let u = grid(k);
        let g = residual(u, alpha, h);
        if g == 0.0 {
            roots.push(u);
        } else if prev != 0.0 && (prev < 0.0) != (g < 0.0) {
            roots.push(bisect(grid(k - 1), u, prev, |x| residual(x, alpha, h)));
        }
        prev = g;
    }
    roots
}

/// Bisection of a bracketed sign change until the bracket stops shrinking.
fn bisect(mut lo: f64, mut hi: f64, g_lo: f64, g: impl Fn(f64) -> f64) -> f64 {
    let lo_neg = g_lo < 0.0;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if (gm < 0.0) == lo_neg {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    debug_assert!(hi - lo <= ROOT_TOL);
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Unique,
    Coexistence,
    Critical,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Unique => "unique",
            Classification::Coexistence => "coexistence",
            Classification::Critical => "critical",
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub alpha: f64,
    pub h: f64,
    pub roots: Vec<f64>,
    /// Global maximizers of the objective among the roots, ascending.
    pub maximizers: Vec<f64>,
    pub objective: f64,
    pub classification: Classification,
    /// `u(1−u)/(1 − 2αu(1−u))` per maximizer; `None` where degenerate.
    pub variances: Vec<Option<f64>>,
}

impl PhasePoint {
    /// The unique non-degenerate maximizer, if there is one.
    pub fn u_star(&self) -> Option<f64> {
        (self.classification == Classification::Unique).then(|| self.maximizers[0])
    }

    /// The limiting variance at a unique non-critical point.
    pub fn variance(&self) -> Option<f64> {
        match self.classification {
            Classification::Unique => self.variances[0],
            _ => None,
        }
    }
}

pub fn classify(alpha: f64, h: f64) -> PhasePoint {
    let roots = fixed_points(alpha, h);
    let values: Vec<f64> = roots
        .iter()
        .map(|&u| objective(u, alpha, h).expect("root in [0, 1]"))
        .collect();
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let maximizers: Vec<f64> = roots
        .iter()
        .zip(&values)
        .filter(|&(_, &f)| best - f <= TIE_TOL)
        .map(|(&u, _)| u)
        .collect();
    let variances = maximizers
        .iter()
        .map(|&u| {
            let d = degeneracy(u, alpha);
            (d.abs() > DEGENERACY_TOL).then(|| u * (1.0 - u) / d)
        })
        .collect::<Vec<_>>();
    let classification = if maximizers.len() > 1 {
        Classification::Coexistence
    } else if variances[0].is_none() {
        Classification::Critical
    } else {
        Classification::Unique
    };
    PhasePoint {
        alpha,
        h,
        roots,
        maximizers,
        objective: best,
        classification,
        variances,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalCurveSample {
    pub alpha: f64,
    pub q: f64,
    pub u_low: f64,
    pub u_high: f64,
    /// `F(u_high) − F(u_low)` at `h = q`.
    pub objective_gap: f64,
}

/// Best objective among roots on each side of ½, each side also offered ½.
fn side_values(alpha: f64, h: f64) -> ((f64, f64), (f64, f64)) {
    let half = (0.5, objective(0.5, alpha, h).expect("in range"));
    let mut low = half;
    let mut high = half;
    for u in fixed_points(alpha, h) {
        let f = objective(u, alpha, h).expect("in range");
        if u <= 0.5 && f > low.1 {
            low = (u, f);
        }
        if u >= 0.5 && f > high.1 {
            high = (u, f);
        }
    }
    (low, high)
}

/// Locates `q(α)` by bisection on the signed gap between the best root
/// above ½ and the best root below ½.
///
/// The bracket `[−2α − 1, 1]` holds a negative gap at the left end (no
/// root above ½) and a positive one at the right end. Bisection runs until
/// the bracket stops shrinking, well inside [`CURVE_TOL`].
pub fn critical_curve(alpha: f64) -> Result<CriticalCurveSample> {
    if alpha.is_nan() || alpha <= 2.0 || alpha.is_infinite() {
        return Err(Error::CurveUndefined(alpha));
    }
    let gap = |h: f64| {
        let ((_, fl), (_, fh)) = side_values(alpha, h);
        fh - fl
    };
    let (mut lo, mut hi) = (-2.0 * alpha - 1.0, 1.0);
    debug_assert!(gap(lo) < 0.0 && gap(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g = gap(mid);
        if g == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if g < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let q = 0.5 * (lo + hi);
    let ((u_low, fl), (u_high, fh)) = side_values(alpha, q);
    Ok(CriticalCurveSample {
        alpha,
        q,
        u_low,
        u_high,
        objective_gap: fh - fl,
    })
}

/// `v(α, h)` at a unique non-critical point.
pub fn limiting_variance(alpha: f64, h: f64) -> Result<f64> {
    let p = classify(alpha, h);
    p.variance().ok_or_else(|| Error::VarianceUndefined {
        alpha,
        h,
        class: p.classification.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceCheck {
    pub alpha: f64,
    pub h: f64,
    pub analytic: f64,
    pub finite_difference: f64,
    pub abs_error: f64,
    pub pass: bool,
}

/// Compares `v(α, h)` with a central difference of `u*` in `h`.
pub fn variance_cross_check(alpha: f64, h: f64) -> Result<VarianceCheck> {
    let analytic = limiting_variance(alpha, h)?;
    let u_at = |hh: f64| {
        let p = classify(alpha, hh);
        p.u_star().ok_or_else(|| Error::VarianceUndefined {
            alpha,
            h: hh,
            class: p.classification.to_string(),
        })
    };
    let d = VARIANCE_FD_STEP;
    let finite_difference = (u_at(h + d)? - u_at(h - d)?) / (2.0 * d);
    let abs_error = (analytic - finite_difference).abs();
    Ok(VarianceCheck {
        alpha,
        h,
        analytic,
        finite_difference,
        abs_error,
        pass: abs_error <= VARIANCE_FD_TOL,
    })
}

/// One row of a phase diagram, in the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub alpha: f64,
    pub h: f64,
    pub n_roots: usize,
    pub u_star_1: f64,
    pub u_star_2: Option<f64>,
    pub classification: Classification,
    pub variance: Option<f64>,
}

impl From<&PhasePoint> for PhaseRecord {
    fn from(p: &PhasePoint) -> Self {
        PhaseRecord {
            alpha: p.alpha,
            h: p.h,
            n_roots: p.roots.len(),
            u_star_1: p.maximizers[0],
            u_star_2: p.maximizers.get(1).copied(),
            classification: p.classification,
            variance: p.variance(),
        }
    }
}

/// Classifies every `(α, h)` cell, `α`-major.
pub fn phase_grid(alphas: &[f64], hs: &[f64]) -> Vec<PhasePoint> {
    let cells: Vec<(f64, f64)> = alphas
        .iter()
        .flat_map(|&a| hs.iter().map(move |&h| (a, h)))
        .collect();
    cells.par_iter().map(|&(a, h)| classify(a, h)).collect()
}
