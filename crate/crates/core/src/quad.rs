//! Quadrature kernels shared by the analysis modules: Gauss–Legendre rules
//! with adaptive bisection for weighted L² integrals, and a cumulative
//! composite Simpson rule for Duhamel time integrals on stored nodes.

use alloc::vec::Vec;

use num_complex::Complex64;
// Needed in pure no_std builds; shadowed whenever std is in the crate
// graph (e.g. under the test harness), hence the blanket allow.
#[allow(unused_imports)]
use num_traits::Float;

/// A Gauss–Legendre rule on the reference interval [-1, 1].
///
/// Nodes and weights are generated by Newton iteration on the Legendre
/// recurrence; for the orders used here (≤ 64) the iteration converges to
/// machine precision in a handful of steps.
#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "rule order must be at least 2");
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let nf = n as f64;
        for i in 0..n {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (core::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_deriv(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-15 * (1.0 + x.abs()) {
                    let (_, d2) = legendre_with_deriv(n, x);
                    dp = d2;
                    break;
                }
            }
            nodes.push(-x); // loop visits roots in descending order
            weights.push(2.0 / ((1.0 - x * x) * dp * dp));
        }
        GaussRule { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// ∫_a^b f, single application of the rule.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(self.weights.iter()) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// ∫_a^b f with bisection refinement until two successive resolutions of
    /// each subinterval agree to `rel_tol` (relative to the local magnitude).
    pub fn integrate_adaptive<F: Fn(f64) -> f64>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        rel_tol: f64,
        max_depth: u32,
    ) -> f64 {
        if a == b {
            return 0.0;
        }
        let whole = self.integrate(f, a, b);
        self.refine(f, a, b, whole, rel_tol, max_depth)
    }

    fn refine<F: Fn(f64) -> f64>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        rel_tol: f64,
        depth: u32,
    ) -> f64 {
        let mid = 0.5 * (a + b);
        let left = self.integrate(f, a, mid);
        let right = self.integrate(f, mid, b);
        let refined = left + right;
        let scale = refined.abs().max(whole.abs()).max(f64::MIN_POSITIVE);
        if depth == 0 || (refined - whole).abs() <= rel_tol * scale || mid <= a || mid >= b {
            return refined;
        }
        self.refine(f, a, mid, left, rel_tol, depth - 1)
            + self.refine(f, mid, b, right, rel_tol, depth - 1)
    }
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cumulative integrals of uniformly sampled complex data.
///
/// Returns I with I[j] ≈ ∫_{t_0}^{t_j} f, t_j = t_0 + j·h. Even nodes carry
/// exact composite Simpson; odd nodes add the forward-quadratic correction
/// through (t_{j-1}, t_j, t_{j+1}), falling back to the backward quadratic
/// at an odd final node.
pub fn cumulative_simpson(f: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = f.len();
    let mut out = alloc::vec![Complex64::new(0.0, 0.0); n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        out[1] = 0.5 * h * (f[0] + f[1]);
        return out;
    }
    for j in (2..n).step_by(2) {
        out[j] = out[j - 2] + h / 3.0 * (f[j - 2] + 4.0 * f[j - 1] + f[j]);
    }
    for j in (1..n).step_by(2) {
        out[j] = if j + 1 < n {
            out[j - 1] + h / 12.0 * (5.0 * f[j - 1] + 8.0 * f[j] - f[j + 1])
        } else {
            out[j - 1] + h / 12.0 * (-f[j - 2] + 8.0 * f[j - 1] + 5.0 * f[j])
        };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_nodes_match_published_values() {
        // Spot checks against the classical 32-point tables.
        let rule = GaussRule::new(32);
        let x0 = rule.nodes[16]; // smallest positive node
        let w0 = rule.weights[16];
        assert!((x0 - 0.048307665687738316).abs() < 1e-14);
        assert!((w0 - 0.096540088514727801).abs() < 1e-14);
        let x_last = rule.nodes[31];
        let w_last = rule.weights[31];
        assert!((x_last - 0.997263861849481564).abs() < 1e-14);
        assert!((w_last - 0.007018610009470097).abs() < 1e-14);
    }

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = GaussRule::new(32);
        // Degree 63 is the exactness limit of a 32-point rule.
        let f = |x: f64| x.powi(62) + 3.0 * x.powi(17) + 1.0;
        let got = rule.integrate(&f, -1.0, 1.0);
        let want = 2.0 / 63.0 + 2.0;
        assert!((got - want).abs() < 1e-14 * want.abs());
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let rule = GaussRule::new(32);
        let f = |x: f64| (-(x * x) * 4000.0).exp();
        let got = rule.integrate_adaptive(&f, -1.0, 1.0, 1e-12, 24);
        let want = (core::f64::consts::PI / 4000.0).sqrt(); // erf(~63) ≈ 1
        assert!((got - want).abs() < 1e-11 * want);
    }

    #[test]
    fn cumulative_simpson_matches_closed_forms() {
        let n = 65;
        let h = 0.01;
        let f: Vec<Complex64> = (0..n)
            .map(|j| {
                let t = j as f64 * h;
                Complex64::new((2.0 * t).cos(), t * t)
            })
            .collect();
        let cum = cumulative_simpson(&f, h);
        for j in [1usize, 2, 3, 17, 64] {
            let t = j as f64 * h;
            let want_re = (2.0 * t).sin() / 2.0;
            let want_im = t * t * t / 3.0;
            assert!((cum[j].re - want_re).abs() < 1e-9);
            assert!((cum[j].im - want_im).abs() < 1e-9);
        }
    }

    #[test]
    fn cumulative_simpson_even_nodes_are_composite_simpson() {
        let f: Vec<Complex64> = (0..5)
            .map(|j| Complex64::new((j as f64).exp(), 0.0))
            .collect();
        let h = 0.25;
        let cum = cumulative_simpson(&f, h);
        let composite =
            h / 3.0 * (f[0] + 4.0 * f[1] + 2.0 * f[2] + 4.0 * f[3] + f[4]);
        assert!((cum[4] - composite).norm() < 1e-15);
    }
}
