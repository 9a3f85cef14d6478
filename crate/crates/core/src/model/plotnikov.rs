//! Change of variables `w = I(u) = u + F(u)` and the forward-backward
//! potential `A(w) = F(I⁻¹(w))`, defined whenever `F' > −1`.

use super::{roots, Branch, BranchInverses, ReactionFunction};
use crate::{Error, Result};

const SCAN_SAMPLES: usize = 4096;

#[derive(Clone, Debug)]
pub struct PlotnikovMaps {
    rf: ReactionFunction,
    min_slope: f64,
    valid: bool,
}

/// Builds the maps and decides validity from the minimum of `F'` on
/// `[0, U_max]` (dense sampling, then golden-section refinement around the
/// sampled minimum).
pub fn plotnikov_maps(rf: &ReactionFunction) -> PlotnikovMaps {
    let u_max = rf.u_max();
    let du = u_max / SCAN_SAMPLES as f64;
    let (mut k_min, mut d_min) = (0, f64::INFINITY);
    for k in 0..=SCAN_SAMPLES {
        let d = rf.derivative(k as f64 * du);
        if d < d_min {
            d_min = d;
            k_min = k;
        }
    }
    let lo = (k_min.saturating_sub(1)) as f64 * du;
    let hi = ((k_min + 1).min(SCAN_SAMPLES)) as f64 * du;
    let refined = golden_min(|u| rf.derivative(u), lo, hi);
    let min_slope = d_min.min(rf.derivative(refined));
    PlotnikovMaps {
        rf: rf.clone(),
        min_slope,
        valid: min_slope > -1.0,
    }
}

fn golden_min<G: Fn(f64) -> f64>(g: G, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    for _ in 0..100 {
        if g(c) < g(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - r * (b - a);
        d = a + r * (b - a);
    }
    0.5 * (a + b)
}

impl PlotnikovMaps {
    pub fn valid(&self) -> bool {
        self.valid
    }

    pub fn min_slope(&self) -> f64 {
        self.min_slope
    }

    pub fn reaction(&self) -> &ReactionFunction {
        &self.rf
    }

    fn ensure_valid(&self) -> Result<()> {
        if self.valid {
            Ok(())
        } else {
            Err(Error::Validity {
                min_slope: self.min_slope,
            })
        }
    }

    /// `I(u) = u + F(u)`; defined regardless of validity.
    pub fn lift(&self, u: f64) -> f64 {
        u + self.rf.value(u)
    }

    /// `I⁻¹(w)` on `[0, I(U_max)]`.
    pub fn unlift(&self, w: f64) -> Result<f64> {
        self.ensure_valid()?;
        let hi = self.lift(self.rf.u_max());
        if !(0.0..=hi).contains(&w) {
            return Err(Error::Domain { value: w, lo: 0.0, hi });
        }
        Ok(self.unlift_unchecked(w))
    }

    pub(crate) fn unlift_unchecked(&self, w: f64) -> f64 {
        roots::solve_monotone(
            |u| self.lift(u),
            |u| 1.0 + self.rf.derivative(u),
            w,
            0.0,
            self.rf.u_max(),
        )
    }

    /// `A(w) = F(I⁻¹(w))`.
    pub fn potential(&self, w: f64) -> Result<f64> {
        let u = self.unlift(w)?;
        Ok(self.rf.value(u))
    }

    /// `A'(w) = F'(u) / (1 + F'(u))` with `u = I⁻¹(w)`.
    pub fn potential_slope(&self, w: f64) -> Result<f64> {
        let u = self.unlift(w)?;
        let d = self.rf.derivative(u);
        Ok(d / (1.0 + d))
    }

    /// Branch inverses of `A`: `R_i(ξ) = I(S_i(ξ))` with
    /// `R_i'(ξ) = S_i'(ξ) + 1_{J_i}(ξ)`.
    pub fn potential_branch(&self, bi: &BranchInverses, branch: Branch, xi: f64) -> Result<(f64, f64)> {
        self.ensure_valid()?;
        let p = bi.inverse(branch, xi);
        let indicator = if bi.in_domain(branch, xi) { 1.0 } else { 0.0 };
        Ok((self.lift(p.u), p.slope + indicator))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let m = plotnikov_maps(&ReactionFunction::reference_cubic());
        assert!(m.valid());
        assert!((m.min_slope() + 0.75).abs() < 1e-12);
        assert!((m.lift(1.0) - 3.5).abs() < 1e-14);
        assert!((m.potential(3.5).unwrap() - 2.5).abs() < 1e-12);
        assert_eq!(m.lift(0.0), 0.0);
        assert_eq!(m.potential(0.0).unwrap(), 0.0);
    }

    #[test]
    fn potential_inverts_lift() {
        let rf = ReactionFunction::reference_cubic();
        let m = plotnikov_maps(&rf);
        for k in 0..=400 {
            let u = 4.0 * k as f64 / 400.0;
            let a = m.potential(m.lift(u)).unwrap();
            assert!((a - rf.value(u)).abs() < 1e-10, "u = {u}");
        }
    }

    #[test]
    fn potential_branch_slopes() {
        let rf = ReactionFunction::reference_cubic();
        let m = plotnikov_maps(&rf);
        let bi = BranchInverses::new(rf).unwrap();
        let (r2, d2) = m.potential_branch(&bi, Branch::Unstable, 2.25).unwrap();
        assert!((r2 - 3.75).abs() < 1e-12);
        assert!((d2 - (1.0 - 4.0 / 3.0)).abs() < 1e-10);
        // Outside J₂ both pieces of R₂' vanish.
        assert_eq!(m.potential_branch(&bi, Branch::Unstable, 1.0).unwrap().1, 0.0);
    }

    #[test]
    fn steep_descent_is_invalid() {
        // F = u³ − 6u² + 9.5u has min F' = −2.5 at u = 2.
        let rf = ReactionFunction::polynomial(vec![0.0, 9.5, -6.0, 1.0], 5.0).unwrap();
        let m = plotnikov_maps(&rf);
        assert!(!m.valid());
        assert!(matches!(m.potential(1.0), Err(Error::Validity { .. })));
        assert!(matches!(m.unlift(1.0), Err(Error::Validity { .. })));
    }
}
