use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EmpiricalKinetic, KineticProfile};
use crate::model::{Branch, BranchInverses, BranchStructure, PlotnikovMaps};
use crate::Result;

/// Excluded neighbourhoods: `fold` around `f₋` and `f₊`, `edge` around `0`
/// and `ξ_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuardBands {
    pub fold: f64,
    pub edge: f64,
    pub xi_max: f64,
}

impl GuardBands {
    pub fn admits(&self, bs: &BranchStructure, xi: f64) -> bool {
        xi > self.edge
            && xi < self.xi_max - self.edge
            && (xi - bs.f_minus).abs() >= self.fold
            && (xi - bs.f_plus).abs() >= self.fold
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IdentityStats {
    pub sup: f64,
    pub mean: f64,
    pub count: usize,
}

impl IdentityStats {
    fn from_values(values: impl IntoIterator<Item = f64>) -> Self {
        let (mut sup, mut sum, mut count) = (0.0f64, 0.0, 0usize);
        for r in values {
            sup = sup.max(r);
            sum += r;
            count += 1;
        }
        Self {
            sup,
            mean: if count == 0 { 0.0 } else { sum / count as f64 },
            count,
        }
    }
}

fn chi(a: f64, b: f64) -> f64 {
    if 0.0 < b && b <= a {
        1.0
    } else {
        0.0
    }
}

fn indicator(bi: &BranchInverses, b: Branch, xi: f64) -> f64 {
    if bi.in_domain(b, xi) {
        1.0
    } else {
        0.0
    }
}

/// `Σ (−1)^{i+1} p(S_i(ξ)) 1_{J_i}(ξ)`.
pub fn pushforward<P: KineticProfile + ?Sized>(p: &P, bi: &BranchInverses, xi: f64) -> f64 {
    Branch::ALL
        .iter()
        .map(|&b| b.parity() * p.at(bi.inverse(b, xi).u) * indicator(bi, b, xi))
        .sum()
}

/// `sup_ξ |q(ξ) − Σ (−1)^{i+1} p(S_i(ξ)) 1_{J_i}(ξ)|` over `xis`.
pub fn pushforward_gap<P, Q>(p: &P, q: &Q, bi: &BranchInverses, xis: &[f64]) -> f64
where
    P: KineticProfile + ?Sized,
    Q: KineticProfile + ?Sized,
{
    xis.iter()
        .map(|&xi| (q.at(xi) - pushforward(p, bi, xi)).abs())
        .fold(0.0, f64::max)
}

/// Per-cell push-forward gap over the bin centers admitted by `guard`.
pub fn pushforward_residual(ek: &EmpiricalKinetic, bi: &BranchInverses, guard: &GuardBands) -> Vec<f64> {
    let bs = bi.structure();
    let xis: Vec<f64> = ek.xi.centers().into_iter().filter(|&x| guard.admits(bs, x)).collect();
    (0..ek.n_cells())
        .map(|c| pushforward_gap(&ek.p_profile(c), &ek.q_profile(c), bi, &xis))
        .collect()
}

/// `S(η) = Σ p(S_i(η)) |S_i'(η)|` and
/// `R(η, ξ) = Σ_i (−1)^{i+1} p(S_i(ξ)) 1_{J_i}(ξ) Σ_j χ_{S_i(ξ)}(S_j(η)) |S_j'(η)|`.
pub fn calc_s_r<P: KineticProfile + ?Sized>(p: &P, bi: &BranchInverses, eta: f64, xi: f64) -> (f64, f64) {
    let at_eta = bi.all(eta);
    let s = at_eta.iter().map(|pt| p.at(pt.u) * pt.slope.abs()).sum();
    let r = Branch::ALL
        .iter()
        .map(|&b| {
            let si = bi.inverse(b, xi).u;
            let inner: f64 = at_eta.iter().map(|pt| chi(si, pt.u) * pt.slope.abs()).sum();
            b.parity() * p.at(si) * indicator(bi, b, xi) * inner
        })
        .sum();
    (s, r)
}

/// `|[q(ξ) − χ_η(ξ)] S(η) − χ_ξ(η) q(ξ) − χ_η(ξ) q(η) + q(η) q(ξ) − R(η, ξ)|`.
pub fn identity_residual<P, Q>(p: &P, q: &Q, bi: &BranchInverses, eta: f64, xi: f64) -> f64
where
    P: KineticProfile + ?Sized,
    Q: KineticProfile + ?Sized,
{
    let (s, r) = calc_s_r(p, bi, eta, xi);
    let (q_xi, q_eta) = (q.at(xi), q.at(eta));
    let (chi_eta_xi, chi_xi_eta) = (chi(eta, xi), chi(xi, eta));
    ((q_xi - chi_eta_xi) * s - chi_xi_eta * q_xi - chi_eta_xi * q_eta + q_eta * q_xi - r).abs()
}

/// Identity residual for every pair in every cell.
pub fn kinetic_identity_residual(ek: &EmpiricalKinetic, bi: &BranchInverses, pairs: &[(f64, f64)]) -> IdentityStats {
    IdentityStats::from_values((0..ek.n_cells()).flat_map(|c| {
        let (p, q) = (ek.p_profile(c), ek.q_profile(c));
        pairs
            .iter()
            .map(move |&(eta, xi)| identity_residual(&p, &q, bi, eta, xi))
            .collect::<Vec<_>>()
    }))
}

/// `count` pairs `(η, ξ)` drawn uniformly from `(0, ξ_max)²` subject to the
/// guard bands.
pub fn sample_pairs(seed: u64, count: usize, guard: &GuardBands, bs: &BranchStructure) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || loop {
        let x = rng.gen_range(0.0..guard.xi_max);
        if guard.admits(bs, x) {
            return x;
        }
    };
    (0..count).map(|_| (draw(), draw())).collect()
}

/// Closed form of `R(η, ξ₁)` for `f₋ < ξ₁ < η < f₊`.
pub fn closed_form_r_low<P: KineticProfile + ?Sized>(p: &P, bi: &BranchInverses, eta: f64, xi1: f64) -> f64 {
    let [_, s2, s3] = bi.all(xi1);
    let [d1, d2, _] = bi.all(eta);
    (p.at(s3.u) - p.at(s2.u)) * (d1.slope - d2.slope)
}

/// Closed form of `R(η, ξ₂)` for `f₋ < η < ξ₂ < f₊`.
pub fn closed_form_r_high<P, Q>(p: &P, q: &Q, bi: &BranchInverses, eta: f64, xi2: f64) -> f64
where
    P: KineticProfile + ?Sized,
    Q: KineticProfile + ?Sized,
{
    let s3 = bi.inverse(Branch::Upper, xi2);
    let [d1, d2, d3] = bi.all(eta);
    q.at(xi2) * d1.slope + p.at(s3.u) * (d3.slope - d2.slope)
}

/// Sup-norm gaps in the change of variables `w = I(u)` over `xis`:
/// `[0]` between `Σ (−1)^{i+1} k(R_i(ξ)) 1_{J_i}(ξ)` and `q(ξ)`,
/// `[1]` between `k(I(ξ))` and `p(ξ)`,
/// `[2]` between `Σ k(R_i(ξ)) |R_i'(ξ)|` and `Σ (−1)^{i+1} p(S_i(ξ)) S_i'(ξ) + q(ξ)`.
pub fn plotnikov_residuals<P, Q, K>(
    p: &P,
    q: &Q,
    k: &K,
    bi: &BranchInverses,
    maps: &PlotnikovMaps,
    xis: &[f64],
) -> Result<[f64; 3]>
where
    P: KineticProfile + ?Sized,
    Q: KineticProfile + ?Sized,
    K: KineticProfile + ?Sized,
{
    let mut out = [0.0f64; 3];
    for &xi in xis {
        let mut l = 0.0;
        let mut lhs = 0.0;
        let mut rhs = q.at(xi);
        for b in Branch::ALL {
            let (r, dr) = maps.potential_branch(bi, b, xi)?;
            let s = bi.inverse(b, xi);
            let kr = k.at(r);
            l += b.parity() * kr * indicator(bi, b, xi);
            lhs += kr * dr.abs();
            rhs += b.parity() * p.at(s.u) * s.slope;
        }
        out[0] = out[0].max((l - q.at(xi)).abs());
        out[1] = out[1].max((k.at(maps.lift(xi)) - p.at(xi)).abs());
        out[2] = out[2].max((lhs - rhs).abs());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::StepProfile;
    use super::*;
    use crate::model::{plotnikov_maps, ReactionFunction};

    fn bi() -> BranchInverses {
        BranchInverses::new(ReactionFunction::reference_cubic()).unwrap()
    }

    #[test]
    fn s_at_midlevel_matches_slopes() {
        let bi = bi();
        let p = StepProfile::three_plateau(&bi, 2.25, 0.6, 0.3).unwrap();
        let (s, _) = calc_s_r(&p, &bi, 2.25, 3.0);
        assert!((s - 5.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn r_vanishes_above_support() {
        let bi = bi();
        let p = StepProfile::three_plateau(&bi, 2.25, 0.6, 0.3).unwrap();
        let (_, r) = calc_s_r(&p, &bi, 3.5, 3.9);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn single_branch_constant_state_has_no_gap() {
        let bi = bi();
        // u ≡ 3, v = F(3) = 4.5 lies on the upper branch only.
        let p = StepProfile::indicator(3.0);
        let q = StepProfile::indicator(4.5);
        let xis: Vec<f64> = (1..400).map(|k| k as f64 * 0.0123).filter(|&x| (x - 2.0f64).abs() > 1e-3 && (x - 2.5f64).abs() > 1e-3).collect();
        assert_eq!(pushforward_gap(&p, &q, &bi, &xis), 0.0);
    }

    #[test]
    fn pairs_respect_guards_and_seed() {
        let bi = bi();
        let g = GuardBands { fold: 0.1, edge: 0.2, xi_max: 4.5 };
        let a = sample_pairs(3, 200, &g, bi.structure());
        assert_eq!(a, sample_pairs(3, 200, &g, bi.structure()));
        assert!(a.iter().all(|&(e, x)| g.admits(bi.structure(), e) && g.admits(bi.structure(), x)));
    }

    #[test]
    fn plotnikov_gaps_vanish_for_constant_equilibrium() {
        let rf = ReactionFunction::reference_cubic();
        let maps = plotnikov_maps(&rf);
        let bi = bi();
        let p = StepProfile::indicator(3.0);
        let q = StepProfile::indicator(4.5);
        let k = StepProfile::indicator(7.5);
        let xis: Vec<f64> = (1..300).map(|k| k as f64 * 0.0149).filter(|&x| (x - 2.0f64).abs() > 1e-3 && (x - 2.5f64).abs() > 1e-3).collect();
        let r = plotnikov_residuals(&p, &q, &k, &bi, &maps, &xis).unwrap();
        assert!(r.iter().all(|&x| x < 1e-12), "{r:?}");
    }
}
