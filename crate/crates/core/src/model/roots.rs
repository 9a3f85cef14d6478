//! Bracketed scalar root finding: bisection down to a coarse width, then a
//! Newton polish that never leaves the bracket.

const COARSE_WIDTH: f64 = 1e-6;
const MAX_BISECT: usize = 200;
const MAX_NEWTON: usize = 40;

/// Solves `f(x) = target` for `x ∈ [lo, hi]` where `f` is monotone on the
/// bracket. `df` is the derivative of `f`. Values outside the range of `f`
/// on the bracket are resolved to the nearer endpoint.
pub(crate) fn solve_monotone<F, D>(f: F, df: D, target: f64, lo: f64, hi: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let ga = f(a) - target;
    let gb = f(b) - target;
    if ga == 0.0 {
        return a;
    }
    if gb == 0.0 {
        return b;
    }
    if ga.signum() == gb.signum() {
        return if ga.abs() <= gb.abs() { a } else { b };
    }
    let increasing = gb > 0.0;
    let above = |g: f64| if increasing { g > 0.0 } else { g < 0.0 };

    let mut iters = 0;
    while b - a > COARSE_WIDTH * (1.0 + a.abs().max(b.abs())) && iters < MAX_BISECT {
        let m = 0.5 * (a + b);
        let g = f(m) - target;
        if g == 0.0 {
            return m;
        }
        if above(g) {
            b = m;
        } else {
            a = m;
        }
        iters += 1;
    }

    let mut x = 0.5 * (a + b);
    for _ in 0..MAX_NEWTON {
        let g = f(x) - target;
        if g == 0.0 {
            return x;
        }
        if above(g) {
            b = x;
        } else {
            a = x;
        }
        let d = df(x);
        let newton = x - g / d;
        let next = if d != 0.0 && newton.is_finite() && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if (next - x).abs() <= 4.0 * f64::EPSILON * (1.0 + x.abs()) {
            x = next;
            break;
        }
        x = next;
    }

    // Double roots (fold points) defeat Newton; finish with plain bisection.
    let mut best = x;
    let mut best_res = (f(x) - target).abs();
    while b - a > 2.0 * f64::EPSILON * (1.0 + a.abs().max(b.abs())) && iters < 2 * MAX_BISECT {
        let m = 0.5 * (a + b);
        let g = f(m) - target;
        if g.abs() < best_res {
            best = m;
            best_res = g.abs();
        }
        if g == 0.0 {
            break;
        }
        if above(g) {
            b = m;
        } else {
            a = m;
        }
        iters += 1;
    }
    best
}

/// Locates a sign change of `g` inside `[lo, hi]` by bisection to machine
/// precision. Requires `g(lo)` and `g(hi)` of opposite sign.
pub(crate) fn bisect_sign_change<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    let positive_at_a = g(a) > 0.0;
    for _ in 0..MAX_BISECT {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if (gm > 0.0) == positive_at_a {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_increasing_and_decreasing() {
        let x = solve_monotone(|x| x * x, |x| 2.0 * x, 2.0, 0.0, 3.0);
        assert!((x - 2f64.sqrt()).abs() < 1e-14);
        let y = solve_monotone(|x| -x * x * x, |x| -3.0 * x * x, -8.0, 0.0, 5.0);
        assert!((y - 2.0).abs() < 1e-13);
    }

    #[test]
    fn out_of_range_targets_clamp() {
        assert_eq!(solve_monotone(|x| x, |_| 1.0, 10.0, 0.0, 1.0), 1.0);
        assert_eq!(solve_monotone(|x| x, |_| 1.0, -1.0, 0.0, 1.0), 0.0);
    }

    #[test]
    fn double_root_at_endpoint_is_resolved() {
        // (x-1)^2 on [0,1] is decreasing, with a double root at 1.
        let x = solve_monotone(|x| (x - 1.0) * (x - 1.0), |x| 2.0 * (x - 1.0), 1e-10, 0.0, 1.0);
        assert!(((x - 1.0) * (x - 1.0) - 1e-10).abs() < 1e-15);
    }

    #[test]
    fn sign_change() {
        let r = bisect_sign_change(|x| x - 0.3, 0.0, 1.0);
        assert!((r - 0.3).abs() < 1e-15);
    }
}
