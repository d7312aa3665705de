//! Continuous-variable quadratures `r q̂_θ = r (cos θ q̂ + sin θ p̂)`.
//!
//! Eigenbases of two such operators have the constant overlap
//! `1/(2π r_a r_b |sin(θ_a − θ_b)|)` (ℏ = 1), so a family is mutually
//! unbiased exactly when the products `r_a r_b |sin(θ_a − θ_b)|` agree for
//! every pair.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{MubError, Result};

const PARALLEL_TOL: f64 = 1e-14;

/// `r q̂_θ` with `r > 0` and `θ ∈ [0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CvObservable {
    pub r: f64,
    pub theta: f64,
}

impl CvObservable {
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) || !theta.is_finite() {
            return Err(MubError::Domain(format!("invalid quadrature scale/angle ({r}, {theta})")));
        }
        Ok(CvObservable { r, theta: theta.rem_euclid(TAU) })
    }

    /// Folds a signed scale into the angle: `(s, φ) ≡ (|s|, φ + π)` for
    /// `s < 0`, since `q̂_{φ+π} = −q̂_φ` has the same eigenbasis.
    pub fn from_signed(s: f64, phi: f64) -> Result<Self> {
        if s < 0.0 {
            CvObservable::new(-s, phi + PI)
        } else {
            CvObservable::new(s, phi)
        }
    }

    pub fn position() -> Self {
        CvObservable { r: 1.0, theta: 0.0 }
    }

    pub fn momentum() -> Self {
        CvObservable { r: 1.0, theta: PI / 2.0 }
    }

    pub fn canonical(self) -> Result<Self> {
        CvObservable::new(self.r, self.theta)
    }
}

/// `r_a r_b |sin(θ_a − θ_b)|`.
fn product(a: &CvObservable, b: &CvObservable) -> f64 {
    a.r * b.r * (a.theta - b.theta).sin().abs()
}

/// `|⟨q_a|q_b⟩|² = 1/(2π r_a r_b |sin(θ_a − θ_b)|)`.
pub fn cv_overlap(a: &CvObservable, b: &CvObservable) -> Result<f64> {
    if (a.theta - b.theta).sin().abs() < PARALLEL_TOL {
        return Err(MubError::ParallelQuadratures);
    }
    Ok(1.0 / (TAU * product(a, b)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

/// The raw `(s±, φ±)` before the sign of `s` is folded into the angle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Completion {
    pub branch: Branch,
    pub s: f64,
    pub phi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CvTriple {
    pub members: [CvObservable; 3],
    pub completion: Option<Completion>,
}

impl CvTriple {
    pub fn new(members: [CvObservable; 3]) -> Self {
        CvTriple { members, completion: None }
    }

    /// The three pairwise products after rescaling the first member to `r = 1`.
    pub fn normalized_products(&self) -> [f64; 3] {
        let [a, b, c] = self.members;
        let r0 = a.r * a.r;
        [product(&a, &b) / r0, product(&a, &c) / r0, product(&b, &c) / r0]
    }

    /// Spread of the normalized products: zero for a mutually unbiased triple.
    pub fn defect(&self) -> f64 {
        let p = self.normalized_products();
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        hi - lo
    }
}

/// Checks `r|sin θ| = s|sin φ| = rs|sin(θ − φ)|` after rotating the first
/// member to `θ = 0` and rescaling it to `r = 1`.
pub fn verify_cv_triple(t: &CvTriple, tol: f64) -> bool {
    let p = t.normalized_products();
    p.iter().all(|x| *x > 0.0) && t.defect() <= tol
}

/// Completes `(q̂, r q̂_θ)` to both mutually unbiased triples.
///
/// `φ± = atan2(±r sin θ, 1 ± r cos θ)` and `s± = r|sin θ| / sin φ±`; a
/// negative `s` is folded into the angle.
pub fn complete_cv_triple(r: f64, theta: f64) -> Result<(CvTriple, CvTriple)> {
    let second = CvObservable::new(r, theta)?;
    let (sin, cos) = second.theta.sin_cos();
    if sin.abs() < PARALLEL_TOL {
        return Err(MubError::ParallelQuadratures);
    }
    let build = |branch: Branch| -> Result<CvTriple> {
        let sign = match branch {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        };
        let phi = (sign * r * sin).atan2(1.0 + sign * r * cos);
        let s = r * sin.abs() / phi.sin();
        Ok(CvTriple {
            members: [CvObservable::position(), second, CvObservable::from_signed(s, phi)?],
            completion: Some(Completion { branch, s, phi }),
        })
    };
    Ok((build(Branch::Plus)?, build(Branch::Minus)?))
}

/// Resolution of the `(t, ν)` scan for a fourth quadrature `t q̂_ν`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CvGrid {
    pub t_steps: usize,
    pub nu_steps: usize,
    /// Log-spaced scale range, relative to the first member.
    pub t_min: f64,
    pub t_max: f64,
}

impl Default for CvGrid {
    fn default() -> Self {
        CvGrid { t_steps: 1000, nu_steps: 1000, t_min: 1e-2, t_max: 1e2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FourthBasisResidual {
    /// Minimum over candidates of `max_i |t r_i |sin(ν − θ_i)| − c| / c`,
    /// where `c` is the triple's common product.
    pub violation: f64,
    pub t: f64,
    pub nu: f64,
}

/// Members rotated so the first sits at angle 0 with unit scale, plus the
/// common product.
fn normalized_members(t: &CvTriple) -> ([CvObservable; 3], f64) {
    let [a, ..] = t.members;
    let members = t.members.map(|m| CvObservable { r: m.r / a.r, theta: m.theta - a.theta });
    let p = t.normalized_products();
    (members, (p[0] + p[1] + p[2]) / 3.0)
}

fn candidate_violation(members: &[CvObservable; 3], c: f64, t: f64, nu: f64) -> f64 {
    members.iter().map(|m| (t * m.r * (nu - m.theta).sin().abs() - c).abs() / c).fold(0.0, f64::max)
}

/// Violation at angle `ν` with the scale chosen optimally:
/// `t = 2c/(min a + max a)` gives `(max a − min a)/(max a + min a)`.
fn best_scale(members: &[CvObservable; 3], c: f64, nu: f64) -> (f64, f64) {
    let a = members.map(|m| m.r * (nu - m.theta).sin().abs());
    let hi = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = a.iter().copied().fold(f64::INFINITY, f64::min);
    ((hi - lo) / (hi + lo), 2.0 * c / (hi + lo))
}

fn on_member_line(members: &[CvObservable; 3], nu: f64) -> bool {
    members.iter().any(|m| (nu - m.theta).sin().abs() < 1e-9)
}

/// Smallest violation of the four-basis unbiasedness equalities over
/// fourth quadratures `t q̂_ν`.
///
/// Scans the `(t, ν)` grid, `ν ∈ (0, π)` at cell centers and `t`
/// log-spaced, skipping directions of existing members. The best cell is
/// refined by a golden-section search in `ν` with the optimal `t` in closed
/// form.
pub fn cv_fourth_basis_residual(t: &CvTriple, grid: &CvGrid) -> Result<FourthBasisResidual> {
    if !verify_cv_triple(t, 1e-9) {
        return Err(MubError::Domain("input is not a mutually unbiased triple".into()));
    }
    if grid.t_steps < 2 || grid.nu_steps < 2 || !(grid.t_min > 0.0 && grid.t_max > grid.t_min) {
        return Err(MubError::InvalidConfig("grid needs at least 2x2 points and 0 < t_min < t_max".into()));
    }
    let (members, c) = normalized_members(t);
    let dnu = PI / grid.nu_steps as f64;
    let ln_span = (grid.t_max / grid.t_min).ln();

    let rows: Vec<Option<(f64, f64, f64)>> = (0..grid.nu_steps)
        .into_par_iter()
        .map(|i| {
            let nu = (i as f64 + 0.5) * dnu;
            if on_member_line(&members, nu) {
                return None;
            }
            (0..grid.t_steps)
                .map(|j| {
                    let scale = grid.t_min * (ln_span * j as f64 / (grid.t_steps - 1) as f64).exp();
                    (candidate_violation(&members, c, scale, nu), scale, nu)
                })
                .reduce(|a, b| if b.0 < a.0 { b } else { a })
        })
        .collect();
    let (mut violation, mut best_t, mut best_nu) = rows
        .into_iter()
        .flatten()
        .reduce(|a, b| if b.0 < a.0 { b } else { a })
        .ok_or_else(|| MubError::Domain("grid has no admissible direction".into()))?;

    let (mut lo, mut hi) = (best_nu - dnu, best_nu + dnu);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let h = |nu: f64| best_scale(&members, c, nu).0;
    for _ in 0..200 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if h(x1) < h(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let nu = 0.5 * (lo + hi);
    if !on_member_line(&members, nu) {
        let (v, scale) = best_scale(&members, c, nu);
        if v < violation {
            violation = v;
            best_t = scale;
            best_nu = nu;
        }
    }
    let [first, ..] = t.members;
    Ok(FourthBasisResidual { violation, t: best_t * first.r, nu: (best_nu + first.theta).rem_euclid(PI) })
}

/// `(q̂, q̂_{2π/3}, q̂_{4π/3})`.
pub fn symmetric_triple() -> CvTriple {
    CvTriple::new([
        CvObservable::position(),
        CvObservable { r: 1.0, theta: TAU / 3.0 },
        CvObservable { r: 1.0, theta: 2.0 * TAU / 3.0 },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, SQRT_2};

    fn obs(r: f64, th: f64) -> CvObservable {
        CvObservable::new(r, th).unwrap()
    }

    #[test]
    fn overlap_examples() {
        let q = CvObservable::position();
        let inv = 1.0 / TAU;
        assert!((cv_overlap(&q, &CvObservable::momentum()).unwrap() - inv).abs() < 1e-16);
        assert!((cv_overlap(&q, &obs(SQRT_2, FRAC_PI_4)).unwrap() - inv).abs() < 1e-15);
        assert_eq!(cv_overlap(&q, &obs(1.0, PI)).unwrap_err(), MubError::ParallelQuadratures);
        assert!(matches!(CvObservable::new(0.0, 1.0), Err(MubError::Domain(_))));
    }

    #[test]
    fn overlap_symmetric_and_rotation_covariant() {
        let (a, b) = (obs(0.7, 0.3), obs(2.5, 4.1));
        assert_eq!(cv_overlap(&a, &b).unwrap(), cv_overlap(&b, &a).unwrap());
        for shift in [0.1, 1.0, 2.9, 5.5] {
            let (a2, b2) = (obs(a.r, a.theta + shift), obs(b.r, b.theta + shift));
            let diff = cv_overlap(&a2, &b2).unwrap() - cv_overlap(&a, &b).unwrap();
            assert!(diff.abs() < 1e-14, "{diff}");
        }
    }

    #[test]
    fn quarter_turn_completion() {
        let (plus, minus) = complete_cv_triple(1.0, FRAC_PI_2).unwrap();
        let cp = plus.completion.unwrap();
        assert!((cp.phi - FRAC_PI_4).abs() < 1e-15 && (cp.s - SQRT_2).abs() < 1e-15);
        let cm = minus.completion.unwrap();
        assert!((cm.phi + FRAC_PI_4).abs() < 1e-15 && (cm.s + SQRT_2).abs() < 1e-15);
        // folded: (√2, 3π/4), the same line as −π/4
        assert!((minus.members[2].r - SQRT_2).abs() < 1e-15);
        assert!((minus.members[2].theta - 3.0 * FRAC_PI_4).abs() < 1e-15);
        assert!(verify_cv_triple(&plus, 1e-12) && verify_cv_triple(&minus, 1e-12));
    }

    #[test]
    fn two_thirds_turn_completion() {
        let (plus, minus) = complete_cv_triple(1.0, 2.0 * PI / 3.0).unwrap();
        assert!((plus.members[2].theta - FRAC_PI_3).abs() < 1e-15);
        assert!((plus.members[2].r - 1.0).abs() < 1e-15);
        assert!(verify_cv_triple(&plus, 1e-12));
        // the minus branch lands on √3 q̂_{5π/6}
        assert!((minus.members[2].r - 3f64.sqrt()).abs() < 1e-14);
        assert!((minus.members[2].theta - 5.0 * FRAC_PI_6).abs() < 1e-14);
        assert!(verify_cv_triple(&minus, 1e-12));
        let printed = CvTriple::new([CvObservable::position(), obs(1.0, 2.0 * PI / 3.0), obs(3f64.sqrt(), FRAC_PI_6)]);
        assert!(!verify_cv_triple(&printed, 1e-6));
    }

    #[test]
    fn third_turn_completion() {
        let (plus, _) = complete_cv_triple(1.0, FRAC_PI_3).unwrap();
        let c = plus.completion.unwrap();
        assert!((c.phi - FRAC_PI_6).abs() < 1e-15);
        assert!((c.s - 3f64.sqrt()).abs() < 1e-14);
        assert!(verify_cv_triple(&plus, 1e-12));
    }

    #[test]
    fn completion_rejects_parallel() {
        assert_eq!(complete_cv_triple(1.0, 0.0).unwrap_err(), MubError::ParallelQuadratures);
        assert_eq!(complete_cv_triple(2.0, PI).unwrap_err(), MubError::ParallelQuadratures);
        assert!(complete_cv_triple(-1.0, 1.0).is_err());
    }

    #[test]
    fn completion_with_vanishing_denominator() {
        // 1 − r cos θ = 0 for r = 2, θ = π/3
        let (_, minus) = complete_cv_triple(2.0, FRAC_PI_3).unwrap();
        assert!((minus.completion.unwrap().phi + FRAC_PI_2).abs() < 1e-15);
        assert!(verify_cv_triple(&minus, 1e-12));
    }

    #[test]
    fn stated_triples() {
        let q = CvObservable::position();
        assert!(verify_cv_triple(&CvTriple::new([q, CvObservable::momentum(), obs(SQRT_2, FRAC_PI_4)]), 1e-12));
        assert!(verify_cv_triple(&symmetric_triple(), 1e-12));
        assert!(!verify_cv_triple(&CvTriple::new([q, CvObservable::momentum(), obs(1.0, FRAC_PI_4)]), 1e-12));
    }

    #[test]
    fn canonicalization_idempotent() {
        for (s, phi) in [(-2.0, 0.3), (1.5, -0.2), (0.4, 7.0)] {
            let o = CvObservable::from_signed(s, phi).unwrap();
            assert_eq!(o.canonical().unwrap(), o);
        }
    }

    #[test]
    fn fourth_basis_small_grid() {
        let grid = CvGrid { t_steps: 100, nu_steps: 100, ..CvGrid::default() };
        let r = cv_fourth_basis_residual(&symmetric_triple(), &grid).unwrap();
        assert!(r.violation > 0.3);
        let bad = CvTriple::new([CvObservable::position(), CvObservable::momentum(), obs(1.0, FRAC_PI_4)]);
        assert!(cv_fourth_basis_residual(&bad, &grid).is_err());
        let tiny = CvGrid { t_steps: 1, ..grid };
        assert!(cv_fourth_basis_residual(&symmetric_triple(), &tiny).is_err());
    }
}
