//! Factorized `I − r·L` where `L` is the `[1, −2, 1]` stencil with mirrored
//! ghost cells at both ends (homogeneous Neumann).

/// Thomas factorization of the symmetric Neumann system `(I − rL) x = b`.
#[derive(Clone, Debug)]
pub struct NeumannSystem {
    r: f64,
    /// Modified super-diagonal `c'_j`.
    upper: Vec<f64>,
    /// Reciprocal pivots `1 / (b_j − a_j c'_{j−1})`.
    inv_pivot: Vec<f64>,
}

impl NeumannSystem {
    pub fn new(n: usize, r: f64) -> Self {
        assert!(n >= 2, "need at least two cells");
        let mut upper = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let off = -r;
        let mut prev_upper = 0.0;
        for j in 0..n {
            let diag = if j == 0 || j == n - 1 { 1.0 + r } else { 1.0 + 2.0 * r };
            let lower = if j == 0 { 0.0 } else { off };
            let pivot = diag - lower * prev_upper;
            inv_pivot[j] = 1.0 / pivot;
            upper[j] = if j == n - 1 { 0.0 } else { off / pivot };
            prev_upper = upper[j];
        }
        Self { r, upper, inv_pivot }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn len(&self) -> usize {
        self.upper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.upper.is_empty()
    }

    /// Overwrites `rhs` with the solution.
    pub fn solve(&self, rhs: &mut [f64]) {
        let n = self.len();
        assert_eq!(rhs.len(), n);
        let off = -self.r;
        rhs[0] *= self.inv_pivot[0];
        for j in 1..n {
            rhs[j] = (rhs[j] - off * rhs[j - 1]) * self.inv_pivot[j];
        }
        for j in (0..n - 1).rev() {
            rhs[j] -= self.upper[j] * rhs[j + 1];
        }
    }
}

/// `out = L v` for the Neumann `[1, −2, 1]` stencil (unscaled by `h²`).
pub fn neumann_stencil(v: &[f64], out: &mut [f64]) {
    let n = v.len();
    assert_eq!(out.len(), n);
    if n == 1 {
        out[0] = 0.0;
        return;
    }
    out[0] = v[1] - v[0];
    for j in 1..n - 1 {
        out[j] = v[j - 1] - 2.0 * v[j] + v[j + 1];
    }
    out[n - 1] = v[n - 2] - v[n - 1];
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn apply(r: f64, x: &[f64]) -> Vec<f64> {
        let mut lx = vec![0.0; x.len()];
        neumann_stencil(x, &mut lx);
        x.iter().zip(&lx).map(|(xi, li)| xi - r * li).collect()
    }

    #[test]
    fn constants_are_fixed() {
        let sys = NeumannSystem::new(16, 3.7);
        let mut b = vec![2.5; 16];
        sys.solve(&mut b);
        assert!(b.iter().all(|x| (x - 2.5).abs() < 1e-14));
    }

    proptest! {
        #[test]
        fn solve_inverts_operator(r in 1e-4f64..1e4, xs in prop::collection::vec(-5.0f64..5.0, 8..64)) {
            let sys = NeumannSystem::new(xs.len(), r);
            let mut b = apply(r, &xs);
            let sum_b: f64 = b.iter().sum();
            sys.solve(&mut b);
            for (a, e) in b.iter().zip(&xs) {
                prop_assert!((a - e).abs() < 1e-9 * (1.0 + r));
            }
            // The stencil annihilates constants in the summation sense.
            let sum_x: f64 = xs.iter().sum();
            prop_assert!((sum_b - sum_x).abs() < 1e-9 * (1.0 + r) * xs.len() as f64);
        }
    }
}
