use serde::{Deserialize, Serialize};

use super::{compute_branch_structure, roots, BranchStructure, ReactionFunction};
use crate::{Error, Result};

/// The three monotone pieces of `F`, ordered along the u-axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    /// `S₁`: increasing piece on `[0, α₊)`.
    Lower,
    /// `S₂`: decreasing piece on `(α₊, β₋)`.
    Unstable,
    /// `S₃`: increasing piece on `(β₋, U_max]`.
    Upper,
}

impl Branch {
    pub const ALL: [Branch; 3] = [Branch::Lower, Branch::Unstable, Branch::Upper];

    /// 1-based index as used in `S₁, S₂, S₃`.
    pub fn index(self) -> usize {
        match self {
            Branch::Lower => 1,
            Branch::Unstable => 2,
            Branch::Upper => 3,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        match i {
            1 => Some(Branch::Lower),
            2 => Some(Branch::Unstable),
            3 => Some(Branch::Upper),
            _ => None,
        }
    }

    /// `(−1)^{i+1}`: `+1` on increasing pieces, `−1` on the unstable one.
    pub fn parity(self) -> f64 {
        match self {
            Branch::Unstable => -1.0,
            _ => 1.0,
        }
    }
}

/// Value and slope of a branch inverse at one ξ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchPoint {
    pub u: f64,
    pub slope: f64,
    /// Slope hit the cap near a fold point.
    pub capped: bool,
}

/// `S₁, S₂, S₃` with derivatives, extended by constants outside `J_i`.
#[derive(Clone, Debug)]
pub struct BranchInverses {
    rf: ReactionFunction,
    structure: BranchStructure,
    slope_cap: f64,
}

impl BranchInverses {
    pub const DEFAULT_SLOPE_CAP: f64 = 1e6;

    pub fn new(rf: ReactionFunction) -> Result<Self> {
        let structure = compute_branch_structure(&rf)?;
        Ok(Self {
            rf,
            structure,
            slope_cap: Self::DEFAULT_SLOPE_CAP,
        })
    }

    pub fn with_slope_cap(mut self, cap: f64) -> Self {
        self.slope_cap = cap;
        self
    }

    pub fn reaction(&self) -> &ReactionFunction {
        &self.rf
    }

    pub fn structure(&self) -> &BranchStructure {
        &self.structure
    }

    /// `(S_i(ξ), S_i'(ξ))`. Inside `J_i` the root is bracketed on the i-th
    /// monotone piece; outside, the value of the nearest endpoint is returned
    /// with zero slope.
    pub fn inverse(&self, branch: Branch, xi: f64) -> BranchPoint {
        let bs = &self.structure;
        let u_max = self.rf.u_max();
        let flat = |u| BranchPoint {
            u,
            slope: 0.0,
            capped: false,
        };
        let (lo, hi) = match branch {
            Branch::Lower => {
                if xi >= bs.f_plus {
                    return flat(bs.alpha_plus);
                }
                if xi <= 0.0 {
                    return flat(0.0);
                }
                (0.0, bs.alpha_plus)
            }
            Branch::Unstable => {
                if xi <= bs.f_minus {
                    return flat(bs.beta_minus);
                }
                if xi >= bs.f_plus {
                    return flat(bs.alpha_plus);
                }
                (bs.alpha_plus, bs.beta_minus)
            }
            Branch::Upper => {
                if xi <= bs.f_minus {
                    return flat(bs.beta_minus);
                }
                if xi >= self.rf.value(u_max) {
                    return flat(u_max);
                }
                (bs.beta_minus, u_max)
            }
        };
        let u = roots::solve_monotone(|u| self.rf.value(u), |u| self.rf.derivative(u), xi, lo, hi);
        let d = self.rf.derivative(u);
        let raw = 1.0 / d;
        if raw.is_finite() && raw.abs() <= self.slope_cap {
            BranchPoint {
                u,
                slope: raw,
                capped: false,
            }
        } else {
            BranchPoint {
                u,
                slope: branch.parity() * self.slope_cap,
                capped: true,
            }
        }
    }

    /// All three inverses at once.
    pub fn all(&self, xi: f64) -> [BranchPoint; 3] {
        Branch::ALL.map(|b| self.inverse(b, xi))
    }

    /// `1_{J_i}(ξ)`.
    pub fn in_domain(&self, branch: Branch, xi: f64) -> bool {
        self.structure.in_domain(branch, xi)
    }
}

/// Sampling controls for [`nondegeneracy_check`].
#[derive(Clone, Copy, Debug)]
pub struct WronskianSettings {
    pub samples: usize,
    /// Step of the centered differences applied to `S_i'`.
    pub step: f64,
}

impl Default for WronskianSettings {
    fn default() -> Self {
        Self {
            samples: 100,
            step: 1e-3,
        }
    }
}

/// Minimum over sampled ξ of `|W(1+S₁', 1+S₂', 1+S₃')(ξ)|` on `[lo, hi]`.
///
/// A strictly positive value certifies the functions are linearly
/// independent on every subinterval containing a sample, which is the
/// sufficient form of the nondegeneracy condition. Derivatives of `S_i'`
/// come from centered differences with the configured step.
pub fn nondegeneracy_check(bi: &BranchInverses, lo: f64, hi: f64, settings: WronskianSettings) -> Result<f64> {
    let bs = bi.structure();
    let h = settings.step;
    if settings.samples < 3 {
        return Err(Error::Invalid(format!("need at least 3 samples, got {}", settings.samples)));
    }
    if !(h > 0.0) {
        return Err(Error::Invalid(format!("difference step must be positive, got {h}")));
    }
    if !(lo < hi) || lo - h <= bs.f_minus || hi + h >= bs.f_plus {
        return Err(Error::Domain {
            value: if lo - h <= bs.f_minus { lo } else { hi },
            lo: bs.f_minus,
            hi: bs.f_plus,
        });
    }
    let n = settings.samples;
    let mut min_abs = f64::INFINITY;
    for k in 0..n {
        let xi = lo + (hi - lo) * k as f64 / (n - 1) as f64;
        let slope = |x: f64| Branch::ALL.map(|b| bi.inverse(b, x).slope);
        let (m, c, p) = (slope(xi - h), slope(xi), slope(xi + h));
        let mut rows = [[0.0; 3]; 3];
        for i in 0..3 {
            rows[0][i] = 1.0 + c[i];
            rows[1][i] = (p[i] - m[i]) / (2.0 * h);
            rows[2][i] = (p[i] - 2.0 * c[i] + m[i]) / (h * h);
        }
        min_abs = min_abs.min(det3(&rows).abs());
    }
    Ok(min_abs)
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}
