//! Quadrature rules: Golub-Welsch Gauss-Legendre / Gauss-Hermite nodes and
//! an adaptive panel integrator with an embedded error estimate.

use nalgebra::DMatrix;

use crate::linalg::symmetric_eigen_desc;

/// Nodes and weights of an n-point Gaussian rule.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gauss-Legendre rule on [-1, 1] via the Golub-Welsch eigenproblem.
pub fn gauss_legendre(n: usize) -> GaussRule {
    assert!(n >= 1);
    let mut jacobi = DMatrix::zeros(n, n);
    for k in 1..n {
        let kf = k as f64;
        let beta = kf / (4.0 * kf * kf - 1.0).sqrt();
        jacobi[(k - 1, k)] = beta;
        jacobi[(k, k - 1)] = beta;
    }
    let eig = jacobi.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let node = eig.eigenvalues[i];
            let w = 2.0 * eig.eigenvectors[(0, i)] * eig.eigenvectors[(0, i)];
            (node, w)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    GaussRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Gauss-Hermite rule for the weight exp(-t^2) on the real line.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub order: usize,
    rule: GaussRule,
}

impl GaussHermite {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let mut jacobi = DMatrix::zeros(order, order);
        for k in 1..order {
            let beta = (k as f64 / 2.0).sqrt();
            jacobi[(k - 1, k)] = beta;
            jacobi[(k, k - 1)] = beta;
        }
        let (values, vectors) = symmetric_eigen_desc(&jacobi);
        let mu0 = std::f64::consts::PI.sqrt();
        let mut pairs: Vec<(f64, f64)> = (0..order)
            .map(|i| (values[i], mu0 * vectors[(0, i)] * vectors[(0, i)]))
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        GaussHermite {
            order,
            rule: GaussRule {
                nodes: pairs.iter().map(|p| p.0).collect(),
                weights: pairs.iter().map(|p| p.1).collect(),
            },
        }
    }

    /// Expectation of `f` under the standard Gaussian measure Dz: the change
    /// of variable z = sqrt(2) t maps the e^{-t^2} weight onto Dz.
    pub fn gaussian_expectation<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let root2 = std::f64::consts::SQRT_2;
        let inv_root_pi = 1.0 / std::f64::consts::PI.sqrt();
        let mut acc = 0.0;
        for (t, w) in self.rule.nodes.iter().zip(&self.rule.weights) {
            acc += w * f(root2 * t);
        }
        acc * inv_root_pi
    }
}

/// Adaptive integrator: Gauss-Legendre panels with an embedded lower-order
/// estimate, bisecting until the panel error meets a relative target.
pub struct AdaptiveQuadrature {
    coarse: GaussRule,
    fine: GaussRule,
}

impl Default for AdaptiveQuadrature {
    fn default() -> Self {
        AdaptiveQuadrature {
            coarse: gauss_legendre(10),
            fine: gauss_legendre(21),
        }
    }
}

impl AdaptiveQuadrature {
    fn panel<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> (f64, f64) {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let eval = |rule: &GaussRule| -> f64 {
            rule.nodes
                .iter()
                .zip(&rule.weights)
                .map(|(x, w)| w * f(mid + half * x))
                .sum::<f64>()
                * half
        };
        let coarse = eval(&self.coarse);
        let fine = eval(&self.fine);
        (fine, (fine - coarse).abs())
    }

    /// Integrates `f` over `[a, b]` to relative tolerance `rel_tol`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
        if a == b {
            return 0.0;
        }
        let (whole, _) = self.panel(f, a, b);
        let scale = whole.abs().max(1e-300);
        let mut total = 0.0;
        // Explicit stack of pending panels.
        let mut stack = vec![(a, b, 0u32)];
        while let Some((lo, hi, depth)) = stack.pop() {
            let (value, err) = self.panel(f, lo, hi);
            let width_frac = (hi - lo) / (b - a);
            if err <= rel_tol * scale * width_frac.max(1e-6) || depth >= 60 {
                total += value;
            } else {
                let mid = 0.5 * (lo + hi);
                stack.push((lo, mid, depth + 1));
                stack.push((mid, hi, depth + 1));
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let rule = gauss_legendre(10);
        // 10-point rule is exact through degree 19.
        let value: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * x.powi(18))
            .sum();
        assert!((value - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn hermite_matches_gaussian_moments() {
        let rule = GaussHermite::new(31);
        let m2 = rule.gaussian_expectation(|z| z * z);
        let m4 = rule.gaussian_expectation(|z| z.powi(4));
        assert!((m2 - 1.0).abs() < 1e-13);
        assert!((m4 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn adaptive_handles_endpoint_spike() {
        // Integral of u^{-0.9} over [1e-8, 1]: exact (1 - 1e-8^{0.1}) / 0.1.
        let quad = AdaptiveQuadrature::default();
        let value = quad.integrate(&|u: f64| u.powf(-0.9), 1e-8, 1.0, 1e-12);
        let exact = (1.0 - 1e-8_f64.powf(0.1)) / 0.1;
        assert!(
            (value - exact).abs() / exact < 1e-10,
            "value {value}, exact {exact}"
        );
    }

    #[test]
    fn adaptive_smooth_function() {
        let quad = AdaptiveQuadrature::default();
        let value = quad.integrate(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-13);
        assert!((value - 2.0).abs() < 1e-12);
    }
}
