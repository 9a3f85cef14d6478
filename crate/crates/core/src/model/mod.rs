//! The nonmonotone reaction function and everything derived from its shape.
//!
//! A [`ReactionFunction`] is increasing on `[0, α₊)`, decreasing on
//! `(α₊, β₋)` and increasing again on `(β₋, U_max]`. The fold values
//! `f₊ = F(α₊)` and `f₋ = F(β₋)` bound the range `(f₋, f₊)` in which
//! `F(u) = ξ` has three roots, and [`BranchStructure`] records the six
//! numbers that describe this geometry.

mod branches;
mod plotnikov;
pub(crate) mod roots;

pub use branches::{nondegeneracy_check, Branch, BranchInverses, BranchPoint, WronskianSettings};
pub use plotnikov::{plotnikov_maps, PlotnikovMaps};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Samples used when scanning `F'` for sign changes.
const SCAN_SAMPLES: usize = 4096;

/// Shape of `F` behind the evaluators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `Σ c_k u^k` with coefficients in ascending order.
    Polynomial(Vec<f64>),
    /// Continuous piecewise-affine interpolant through `(u, F)` knots; the
    /// first knot sits at `u = 0` and the last segment is extended linearly.
    PiecewiseLinear(Vec<(f64, f64)>),
}

/// Reaction function `F` restricted to `[0, U_max]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReactionFunction {
    profile: Profile,
    u_max: f64,
}

impl ReactionFunction {
    /// `F(u) = u³ − 4.5u² + 6u` on `[0, 4]`: folds at `u = 1, 2`,
    /// `f₊ = 2.5`, `f₋ = 2`, and `min F' = −0.75`.
    pub fn reference_cubic() -> Self {
        Self {
            profile: Profile::Polynomial(vec![0.0, 6.0, -4.5, 1.0]),
            u_max: 4.0,
        }
    }

    pub fn polynomial(coeffs: Vec<f64>, u_max: f64) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Shape("polynomial coefficients must be finite and non-empty".into()));
        }
        Self::checked(Profile::Polynomial(coeffs), u_max)
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>, u_max: f64) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::Shape("need at least two knots".into()));
        }
        if knots[0].0 != 0.0 {
            return Err(Error::Shape("first knot must sit at u = 0".into()));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Shape("knots must be strictly increasing in u".into()));
        }
        Self::checked(Profile::PiecewiseLinear(knots), u_max)
    }

    fn checked(profile: Profile, u_max: f64) -> Result<Self> {
        if !(u_max.is_finite() && u_max > 0.0) {
            return Err(Error::Shape(format!("u_max must be positive, got {u_max}")));
        }
        let rf = Self { profile, u_max };
        if rf.value(0.0) != 0.0 {
            return Err(Error::Shape(format!("F(0) must vanish, got {}", rf.value(0.0))));
        }
        Ok(rf)
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    /// `(F(u), F'(u))` for `u ∈ [0, U_max]`.
    pub fn eval(&self, u: f64) -> Result<(f64, f64)> {
        if !(0.0..=self.u_max).contains(&u) {
            return Err(Error::Domain {
                value: u,
                lo: 0.0,
                hi: self.u_max,
            });
        }
        Ok((self.value(u), self.derivative(u)))
    }

    /// Unchecked `F(u)`; polynomials and affine extensions are defined on all of ℝ.
    #[inline]
    pub fn value(&self, u: f64) -> f64 {
        match &self.profile {
            Profile::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &ck| acc * u + ck),
            Profile::PiecewiseLinear(knots) => {
                let k = segment(knots, u);
                let (u0, f0) = knots[k];
                let (u1, f1) = knots[k + 1];
                f0 + (f1 - f0) * (u - u0) / (u1 - u0)
            }
        }
    }

    /// Unchecked `F'(u)`. Piecewise-affine profiles use the right derivative.
    #[inline]
    pub fn derivative(&self, u: f64) -> f64 {
        match &self.profile {
            Profile::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, &ck)| acc * u + k as f64 * ck),
            Profile::PiecewiseLinear(knots) => {
                let k = segment(knots, u);
                let (u0, f0) = knots[k];
                let (u1, f1) = knots[k + 1];
                (f1 - f0) / (u1 - u0)
            }
        }
    }

    /// `Ψ(u) = ∫₀ᵘ F`, exact for both profile kinds.
    pub fn primitive(&self, u: f64) -> f64 {
        match &self.profile {
            Profile::Polynomial(c) => c
                .iter()
                .enumerate()
                .rev()
                .fold(0.0, |acc, (k, &ck)| acc * u + ck / (k + 1) as f64)
                * u,
            Profile::PiecewiseLinear(knots) => {
                let (lo, hi, sign) = if u >= 0.0 { (0.0, u, 1.0) } else { (u, 0.0, -1.0) };
                let mut breaks = vec![lo];
                breaks.extend(knots.iter().map(|k| k.0).filter(|&x| x > lo && x < hi));
                breaks.push(hi);
                let acc: f64 = breaks
                    .windows(2)
                    .map(|w| 0.5 * (self.value(w[0]) + self.value(w[1])) * (w[1] - w[0]))
                    .sum();
                sign * acc
            }
        }
    }
}

fn segment(knots: &[(f64, f64)], u: f64) -> usize {
    let last = knots.len() - 2;
    match knots.iter().position(|k| k.0 > u) {
        Some(0) => 0,
        Some(i) => (i - 1).min(last),
        None => last,
    }
}

/// Fold geometry of an admissible `F`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchStructure {
    pub alpha_minus: f64,
    pub alpha_plus: f64,
    pub beta_minus: f64,
    pub beta_plus: f64,
    pub f_minus: f64,
    pub f_plus: f64,
}

impl BranchStructure {
    /// Half-open test `ξ ∈ J_i` for the branch domains
    /// `J₁ = [0, f₊)`, `J₂ = (f₋, f₊)`, `J₃ = (f₋, ∞)`.
    pub fn in_domain(&self, branch: Branch, xi: f64) -> bool {
        match branch {
            Branch::Lower => xi < self.f_plus,
            Branch::Unstable => xi > self.f_minus && xi < self.f_plus,
            Branch::Upper => xi > self.f_minus,
        }
    }

    /// Image interval `I_i` on the u-axis.
    pub fn image(&self, branch: Branch) -> (f64, f64) {
        match branch {
            Branch::Lower => (f64::NEG_INFINITY, self.alpha_plus),
            Branch::Unstable => (self.alpha_plus, self.beta_minus),
            Branch::Upper => (self.beta_minus, f64::INFINITY),
        }
    }

    /// Domain interval `J_i` on the ξ-axis.
    pub fn domain(&self, branch: Branch) -> (f64, f64) {
        match branch {
            Branch::Lower => (f64::NEG_INFINITY, self.f_plus),
            Branch::Unstable => (self.f_minus, self.f_plus),
            Branch::Upper => (self.f_minus, f64::INFINITY),
        }
    }
}

/// Finds `α₊, β₋` as the sign changes of `F'` and then `α₋, β₊` on the outer
/// increasing pieces. Rejects any `F` that is not increasing–decreasing–increasing
/// on `(0, U_max)`, negative somewhere, or whose last piece never climbs past `f₊`.
pub fn compute_branch_structure(rf: &ReactionFunction) -> Result<BranchStructure> {
    let u_max = rf.u_max();
    let du = u_max / SCAN_SAMPLES as f64;
    let mut changes = Vec::new();
    let mut prev_sign = 0.0;
    let mut prev_u = 0.0;
    for k in 0..=SCAN_SAMPLES {
        let u = k as f64 * du;
        let value = rf.value(u);
        if value < -1e-12 {
            return Err(Error::Shape(format!("F({u}) = {value} is negative")));
        }
        let d = rf.derivative(u);
        if d == 0.0 {
            continue;
        }
        let s = d.signum();
        if prev_sign != 0.0 && s != prev_sign {
            changes.push((prev_u, u));
        }
        prev_sign = s;
        prev_u = u;
    }
    if changes.len() != 2 {
        return Err(Error::Shape(format!(
            "F' must change sign exactly twice on (0, {u_max}), found {}",
            changes.len()
        )));
    }
    if rf.derivative(changes[0].0) <= 0.0 {
        return Err(Error::Shape("F must start increasing".into()));
    }
    let d = |u: f64| rf.derivative(u);
    let alpha_plus = roots::bisect_sign_change(d, changes[0].0, changes[0].1);
    let beta_minus = roots::bisect_sign_change(d, changes[1].0, changes[1].1);
    let f_plus = rf.value(alpha_plus);
    let f_minus = rf.value(beta_minus);
    if f_minus <= 0.0 {
        return Err(Error::Shape(format!("local minimum value f₋ = {f_minus} must be positive")));
    }
    if rf.value(u_max) <= f_plus {
        return Err(Error::Shape(format!(
            "F(U_max) = {} must exceed f₊ = {f_plus}",
            rf.value(u_max)
        )));
    }
    let f = |u: f64| rf.value(u);
    let alpha_minus = roots::solve_monotone(f, d, f_minus, 0.0, alpha_plus);
    let beta_plus = roots::solve_monotone(f, d, f_plus, beta_minus, u_max);
    Ok(BranchStructure {
        alpha_minus,
        alpha_plus,
        beta_minus,
        beta_plus,
        f_minus,
        f_plus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_reference_cubic() {
        let rf = ReactionFunction::reference_cubic();
        assert_eq!(rf.eval(0.0).unwrap(), (0.0, 6.0));
        let (f, d) = rf.eval(1.5).unwrap();
        assert!((f - 2.25).abs() < 1e-14 && (d + 0.75).abs() < 1e-14);
        let (f, d) = rf.eval(3.0).unwrap();
        assert!((f - 4.5).abs() < 1e-14 && (d - 6.0).abs() < 1e-14);
    }

    #[test]
    fn eval_rejects_out_of_domain() {
        let rf = ReactionFunction::reference_cubic();
        assert!(matches!(rf.eval(-0.1), Err(Error::Domain { .. })));
        assert!(matches!(rf.eval(4.5), Err(Error::Domain { .. })));
    }

    #[test]
    fn primitive_matches_antiderivative() {
        let rf = ReactionFunction::reference_cubic();
        assert!((rf.primitive(1.0) - 1.75).abs() < 1e-14);
        let pl = ReactionFunction::piecewise_linear(vec![(0.0, 0.0), (1.0, 2.0), (2.0, 1.0)], 2.0).unwrap();
        // ∫₀² = 1 + 1.5
        assert!((pl.primitive(2.0) - 2.5).abs() < 1e-14);
        assert!((pl.primitive(0.5) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn branch_structure_of_reference_cubic() {
        let bs = compute_branch_structure(&ReactionFunction::reference_cubic()).unwrap();
        assert!((bs.alpha_minus - 0.5).abs() < 1e-10);
        assert!((bs.alpha_plus - 1.0).abs() < 1e-10);
        assert!((bs.beta_minus - 2.0).abs() < 1e-10);
        assert!((bs.beta_plus - 2.5).abs() < 1e-10);
        assert!((bs.f_minus - 2.0).abs() < 1e-12);
        assert!((bs.f_plus - 2.5).abs() < 1e-12);
        let rf = ReactionFunction::reference_cubic();
        assert!((rf.value(bs.alpha_minus) - bs.f_minus).abs() < 1e-10);
        assert!((rf.value(bs.beta_plus) - bs.f_plus).abs() < 1e-10);
        assert_eq!(rf.value(bs.alpha_plus), bs.f_plus);
        assert!(rf.derivative(1.5) < 0.0);
    }

    #[test]
    fn monotone_function_is_rejected() {
        let rf = ReactionFunction::polynomial(vec![0.0, 1.0, 0.0, 1.0], 3.0).unwrap();
        assert!(matches!(compute_branch_structure(&rf), Err(Error::Shape(_))));
    }

    #[test]
    fn nonzero_intercept_is_rejected() {
        assert!(ReactionFunction::polynomial(vec![1.0, 1.0], 3.0).is_err());
    }

    #[test]
    fn short_last_branch_is_rejected() {
        // Reference cubic cut off at u = 2.2 where F < f₊.
        let rf = ReactionFunction::polynomial(vec![0.0, 6.0, -4.5, 1.0], 2.2).unwrap();
        assert!(compute_branch_structure(&rf).is_err());
    }

    #[test]
    fn piecewise_linear_structure() {
        let rf = ReactionFunction::piecewise_linear(
            vec![(0.0, 0.0), (1.0, 2.5), (2.0, 2.0), (3.0, 4.5)],
            3.0,
        )
        .unwrap();
        let bs = compute_branch_structure(&rf).unwrap();
        assert!((bs.alpha_plus - 1.0).abs() < 1e-12);
        assert!((bs.beta_minus - 2.0).abs() < 1e-12);
        assert!((bs.alpha_minus - 0.8).abs() < 1e-12);
        assert!((bs.beta_plus - 2.2).abs() < 1e-12);
    }
}
