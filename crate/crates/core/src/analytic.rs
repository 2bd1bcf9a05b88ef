//! Closed-form solutions and time-scale formulas for the decoupled mode
//! dynamics at every depth, plus the hyperbolic-coordinate solution for
//! unequal layer strengths.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netsim::ModeTrajectory;
use crate::quad::AdaptiveQuadrature;

/// Parameters of one connectivity mode.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ModeParams {
    /// Association strength (singular value of sigma31).
    pub s: f64,
    /// Time constant tau = 1 / learning rate.
    pub tau: f64,
    /// Initial composite mode strength.
    pub u0: f64,
    /// Number of layers N_l (>= 3).
    pub depth: usize,
}

impl ModeParams {
    pub fn new(s: f64, tau: f64, u0: f64, depth: usize) -> Result<Self> {
        if s <= 0.0 || tau <= 0.0 || u0 <= 0.0 {
            return Err(Error::InvalidArgument(
                "mode parameters s, tau, u0 must be positive".into(),
            ));
        }
        if depth < 3 {
            return Err(Error::InvalidArgument(format!(
                "depth {depth} must be at least 3"
            )));
        }
        Ok(ModeParams { s, tau, u0, depth })
    }
}

/// Hyperbolic chart for a single mode's two-layer strengths: the trajectory
/// runs along an invariant hyperbola with `ab = c0 sinh(theta)`, where
/// `2 c0 = |a^2 - b^2|` is (twice) the conserved quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicState {
    pub c0: f64,
    pub theta: f64,
    pub branch: HyperbolicBranch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HyperbolicBranch {
    /// a^2 > b^2: the input-side strength dominates.
    InputHeavy,
    /// a^2 < b^2: the output-side strength dominates.
    OutputHeavy,
}

impl HyperbolicState {
    /// Chart coordinates of a concrete (a, b) point with a + b > 0.
    pub fn from_strengths(a: f64, b: f64) -> Result<Self> {
        if a + b <= 0.0 {
            return Err(Error::Domain(
                "hyperbolic chart covers the a + b > 0 basin".into(),
            ));
        }
        let c0 = 0.5 * (a * a - b * b).abs();
        if c0 == 0.0 {
            return Err(Error::Domain(
                "a = b sits on the degenerate hyperbola; use the sigmoid solution".into(),
            ));
        }
        let theta = (a * b / c0).asinh();
        let branch = if a * a > b * b {
            HyperbolicBranch::InputHeavy
        } else {
            HyperbolicBranch::OutputHeavy
        };
        Ok(HyperbolicState { c0, theta, branch })
    }

    /// The product ab at this chart point.
    pub fn product(&self) -> f64 {
        self.c0 * self.theta.sinh()
    }
}

/// Flow of the two-dimensional scalar system:
/// da/dt = b (s - ab) / tau, db/dt = a (s - ab) / tau.
pub fn scalar_flow(a: f64, b: f64, s: f64, tau: f64) -> (f64, f64) {
    let drive = (s - a * b) / tau;
    (b * drive, a * drive)
}

/// Energy whose gradient descent generates the decoupled mode dynamics:
/// E = (s - prod a_i)^2 / (2 tau).
pub fn mode_energy(layer_strengths: &[f64], s: f64, tau: f64) -> f64 {
    let product: f64 = layer_strengths.iter().product();
    let miss = s - product;
    miss * miss / (2.0 * tau)
}

fn check_cutoffs(u0: f64, uf: f64, s: f64) -> Result<()> {
    let rising = 0.0 < u0 && u0 <= uf && uf < s;
    let decaying = s < uf && uf <= u0;
    if !(rising || decaying) {
        return Err(Error::Domain(format!(
            "cutoffs must satisfy 0 < u0 <= uf < s or s < uf <= u0 (got u0={u0}, uf={uf}, s={s})"
        )));
    }
    Ok(())
}

/// Exact three-layer traversal time of the composite strength u = ab from
/// u0 to uf: t = (tau / 2s) ln[ uf (s - u0) / (u0 (s - uf)) ].
pub fn learning_time(u0: f64, uf: f64, s: f64, tau: f64) -> Result<f64> {
    check_cutoffs(u0, uf, s)?;
    Ok(tau / (2.0 * s) * ((uf * (s - u0)) / (u0 * (s - uf))).ln())
}

/// The full sigmoidal time course u(t) of a three-layer mode, evaluated in
/// the overflow-safe form u = s / (1 + (s/u0 - 1) e^{-2 s t / tau}).
pub fn mode_strength_curve(t: f64, params: &ModeParams) -> f64 {
    let ModeParams { s, tau, u0, .. } = *params;
    s / (1.0 + (s / u0 - 1.0) * (-2.0 * s * t / tau).exp())
}

/// Traversal time along the hyperbola ab = c0 sinh(theta) between two chart
/// angles, for the flow tau dtheta/dt = 2 (s - c0 sinh(theta)).
///
/// The closed form is the antiderivative of tau dtheta / (2 (s - c0 sinh
/// theta)); its c0 -> 0 limit recovers `learning_time` under the
/// substitution u = c0 sinh(theta).
pub fn hyperbolic_time(c0: f64, theta0: f64, theta_f: f64, s: f64, tau: f64) -> Result<f64> {
    if c0 <= 0.0 || s <= 0.0 || tau <= 0.0 {
        return Err(Error::InvalidArgument(
            "hyperbolic_time needs c0 > 0, s > 0, tau > 0 (the c0 = 0 manifold is the sigmoid)"
                .into(),
        ));
    }
    if theta_f < theta0 {
        return Err(Error::Domain("theta_f must not precede theta0".into()));
    }
    // The flow stalls at sinh(theta*) = s / c0; beyond it the primitive's
    // log argument flips sign.
    let theta_star = (s / c0).asinh();
    if theta_f > theta_star {
        return Err(Error::Domain(format!(
            "theta_f {theta_f:.6} lies beyond the fixed angle {theta_star:.6}"
        )));
    }
    let root = (c0 * c0 + s * s).sqrt();
    let primitive = |theta: f64| -> f64 {
        let th = (0.5 * theta).tanh();
        ((root + c0 + s * th) / (root - c0 - s * th)).ln()
    };
    Ok(tau / (2.0 * root) * (primitive(theta_f) - primitive(theta0)))
}

/// Mode-strength flow at depth N_l:
/// du/dt = (N_l - 1) u^{2 - 2/(N_l - 1)} (s - u) / tau.
pub fn deep_mode_flow(u: f64, s: f64, tau: f64, depth: usize) -> f64 {
    let m = (depth - 1) as f64;
    m * u.powf(2.0 - 2.0 / m) * (s - u) / tau
}

/// Traversal time of the depth-N_l flow by adaptive quadrature of the
/// separated integral, relative tolerance 1e-10.
pub fn deep_learning_time(u0: f64, uf: f64, s: f64, tau: f64, depth: usize) -> Result<f64> {
    if depth < 3 {
        return Err(Error::InvalidArgument(format!(
            "depth {depth} must be at least 3"
        )));
    }
    if !(0.0 < u0 && u0 <= uf && uf < s) {
        return Err(Error::Domain(format!(
            "deep learning time needs 0 < u0 <= uf < s (got u0={u0}, uf={uf}, s={s})"
        )));
    }
    let m = (depth - 1) as f64;
    let quad = AdaptiveQuadrature::default();
    let integrand = |u: f64| 1.0 / (m * u.powf(2.0 - 2.0 / m) * (s - u));
    Ok(tau * quad.integrate(&integrand, u0, uf, 1e-10))
}

/// Depth-free bracket of the infinite-depth traversal time, times tau:
/// tau [ (1/s^2) ln(uf (u0 - s) / (u0 (uf - s))) + 1/(s u0) - 1/(s uf) ].
/// Callers modelling a fixed rate divide by N_l.
pub fn infinite_depth_time(u0: f64, uf: f64, s: f64, tau: f64) -> Result<f64> {
    if !(0.0 < u0 && u0 <= uf && uf < s) {
        return Err(Error::Domain(format!(
            "infinite-depth time needs 0 < u0 <= uf < s (got u0={u0}, uf={uf}, s={s})"
        )));
    }
    let log_term = ((uf * (u0 - s)) / (u0 * (uf - s))).ln() / (s * s);
    Ok(tau * (log_term + 1.0 / (s * u0) - 1.0 / (s * uf)))
}

/// Largest Hessian eigenvalue over the symmetric mode manifold and the
/// corresponding first-order rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalRate {
    /// lambda_1 at the converged strengths: (N_l-1) s^{(2 N_l - 4)/(N_l - 1)} / tau.
    pub hessian_eigenvalue: f64,
    /// alpha_opt = c / lambda_1.
    pub rate: f64,
}

/// Stability-edge learning rate as a function of depth, with proportionality
/// constant `c` (default choice c = 1 is the inverse-Hessian step).
pub fn optimal_learning_rate(s: f64, tau: f64, depth: usize) -> OptimalRate {
    optimal_learning_rate_scaled(s, tau, depth, 1.0)
}

pub fn optimal_learning_rate_scaled(s: f64, tau: f64, depth: usize, c: f64) -> OptimalRate {
    let m = (depth - 1) as f64;
    let hessian_eigenvalue = m * s.powf((2.0 * m - 2.0) / m) / tau;
    OptimalRate {
        hessian_eigenvalue,
        rate: c / hessian_eigenvalue,
    }
}

/// Leading estimate of the extra time an infinitely deep network needs over
/// a three-layer one at optimally scaled rates: c s / eps.
pub fn depth_delay(c: f64, s: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 0.5 * s) {
        return Err(Error::Domain(format!(
            "cutoff eps {eps} must lie in (0, s/2) for s = {s}"
        )));
    }
    Ok(c * s / eps)
}

/// Exact two-term form of the depth delay for cutoffs u0 and uf.
pub fn depth_delay_exact(c: f64, s: f64, u0: f64, uf: f64) -> f64 {
    c * s / u0 - c * s / uf
}

/// Per-mode fractional delays of simulated half-learning against the
/// closed-form half-learning time. Modes that never cross half strength are
/// reported as missing.
pub fn half_learning_delay(
    trajectory: &ModeTrajectory,
    params: &[ModeParams],
) -> Result<Vec<Option<f64>>> {
    let mut delays = Vec::with_capacity(params.len());
    for (alpha, p) in params.iter().enumerate() {
        if alpha >= trajectory.num_modes() {
            delays.push(None);
            continue;
        }
        let analytic = learning_time(p.u0, 0.5 * p.s, p.s, p.tau)?;
        let sim = simulated_crossing_time(trajectory, alpha, 0.5 * p.s);
        delays.push(sim.map(|t| (t - analytic) / analytic));
    }
    Ok(delays)
}

/// First rising crossing of `level` in a recorded mode trace, located by
/// linear interpolation between samples.
pub fn simulated_crossing_time(
    trajectory: &ModeTrajectory,
    mode: usize,
    level: f64,
) -> Option<f64> {
    let mut prev_t = None;
    let mut prev_v = None;
    for (row, &t) in trajectory.times.iter().enumerate() {
        let v = trajectory.mode_strengths[row][mode];
        if v >= level {
            return match (prev_t, prev_v) {
                (Some(t0), Some(v0)) if v > v0 => {
                    let frac = (level - v0) / (v - v0);
                    Some(t0 as f64 + frac * (t as f64 - t0 as f64))
                }
                _ => Some(t as f64),
            };
        }
        prev_t = Some(t);
        prev_v = Some(v);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn scalar_flow_fixed_points() {
        assert_eq!(scalar_flow(2.0, 0.5, 1.0, 1.0), (0.0, 0.0));
        assert_eq!(scalar_flow(0.0, 0.0, 1.0, 1.0), (0.0, 0.0));
    }

    #[test]
    fn scalar_flow_direct_substitution() {
        let (da, db) = scalar_flow(0.5, 0.2, 1.0, 1.0);
        assert_abs_diff_eq!(da, 0.18, epsilon = 1e-15);
        assert_abs_diff_eq!(db, 0.45, epsilon = 1e-15);
    }

    #[test]
    fn mode_energy_values() {
        assert_eq!(mode_energy(&[2.0, 0.5], 1.0, 1.0), 0.0);
        assert_abs_diff_eq!(mode_energy(&[0.0, 0.0], 1.0, 1.0), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn mode_energy_gradient_matches_flow() {
        // The flow is exactly minus the energy gradient, at any tau.
        for &tau in &[1.0, 2.0] {
            let (a, b, s) = (0.7, 0.3, 1.4);
            let h = 1e-6;
            let grad_a =
                (mode_energy(&[a + h, b], s, tau) - mode_energy(&[a - h, b], s, tau)) / (2.0 * h);
            let grad_b =
                (mode_energy(&[a, b + h], s, tau) - mode_energy(&[a, b - h], s, tau)) / (2.0 * h);
            let (da, db) = scalar_flow(a, b, s, tau);
            assert_abs_diff_eq!(da, -grad_a, epsilon = 1e-8);
            assert_abs_diff_eq!(db, -grad_b, epsilon = 1e-8);
        }
    }

    #[test]
    fn learning_time_examples() {
        assert_eq!(learning_time(0.3, 0.3, 1.0, 1.0).unwrap(), 0.0);
        let t = learning_time(1e-6, 1.0 - 1e-6, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(t, 13.8155, epsilon = 1e-3);
        let half = learning_time(1e-6, 0.5, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(half, 6.9078, epsilon = 1e-4);
        // Half-time closed form (tau/2s) ln((s-u0)/u0).
        assert_abs_diff_eq!(
            half,
            0.5 * ((1.0 - 1e-6) / 1e-6_f64).ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn learning_time_rejects_bad_ordering() {
        assert!(learning_time(0.5, 0.1, 1.0, 1.0).is_err());
        assert!(learning_time(0.1, 1.5, 1.0, 1.0).is_err());
        // Decay branch toward s from above is allowed.
        assert!(learning_time(2.0, 1.2, 1.0, 1.0).is_ok());
    }

    #[test]
    fn learning_time_scales_inversely_with_strength() {
        let base = learning_time(0.01, 0.8, 1.0, 1.0).unwrap();
        let doubled = learning_time(0.02, 1.6, 2.0, 1.0).unwrap();
        assert_abs_diff_eq!(doubled, base / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn curve_boundary_values() {
        let p = ModeParams::new(1.0, 1.0, 1e-6, 3).unwrap();
        assert_abs_diff_eq!(mode_strength_curve(0.0, &p), 1e-6, epsilon = 1e-18);
        let fixed = ModeParams::new(1.0, 1.0, 1.0, 3).unwrap();
        for &t in &[0.0, 1.0, 50.0] {
            assert_abs_diff_eq!(mode_strength_curve(t, &fixed), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn curve_inverts_learning_time() {
        let p = ModeParams::new(1.0, 1.0, 1e-6, 3).unwrap();
        let u = mode_strength_curve(6.9078, &p);
        assert_abs_diff_eq!(u, 0.5, epsilon = 1e-4);
    }

    #[test]
    fn curve_is_overflow_safe_at_long_times() {
        let p = ModeParams::new(2.5, 1.0, 1e-8, 3).unwrap();
        let u = mode_strength_curve(1e6, &p);
        assert!(u.is_finite());
        assert_abs_diff_eq!(u, 2.5, epsilon = 1e-12);
    }

    #[test]
    fn curve_handles_decay_branch() {
        let p = ModeParams::new(1.0, 1.0, 3.0, 3).unwrap();
        assert!(mode_strength_curve(0.5, &p) < 3.0);
        assert!(mode_strength_curve(20.0, &p) > 1.0 - 1e-9);
    }

    #[test]
    fn hyperbolic_zero_interval() {
        assert_eq!(hyperbolic_time(0.5, 0.3, 0.3, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn hyperbolic_limit_recovers_sigmoid_time() {
        // Match endpoints through u = c0 sinh(theta) at c0 = 1e-8; the
        // finite-c0 correction scales like (c0/u0)^2, so keep u0 >> c0.
        let c0: f64 = 1e-8;
        let (u0, uf, s): (f64, f64, f64) = (1e-4, 0.5, 1.0);
        let theta0 = (u0 / c0).asinh();
        let theta_f = (uf / c0).asinh();
        let t_hyp = hyperbolic_time(c0, theta0, theta_f, s, 1.0).unwrap();
        let t_sig = learning_time(u0, uf, s, 1.0).unwrap();
        assert!(
            (t_hyp - t_sig).abs() / t_sig < 1e-6,
            "hyperbolic {t_hyp}, sigmoid {t_sig}"
        );
    }

    #[test]
    fn hyperbolic_rejects_angles_beyond_fixed_point() {
        let c0 = 0.5;
        let theta_star = (1.0 / 0.5_f64).asinh();
        assert!(hyperbolic_time(c0, 0.0, theta_star + 0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn chart_round_trip() {
        let state = HyperbolicState::from_strengths(0.9, 0.4).unwrap();
        assert_eq!(state.branch, HyperbolicBranch::InputHeavy);
        assert_abs_diff_eq!(state.product(), 0.36, epsilon = 1e-12);
        assert_abs_diff_eq!(2.0 * state.c0, 0.81 - 0.16, epsilon = 1e-12);
    }

    #[test]
    fn deep_flow_reduces_to_sigmoid_at_depth_three() {
        for &u in &[0.1, 0.4, 0.9] {
            let deep = deep_mode_flow(u, 1.3, 0.7, 3);
            let (expected, _) = {
                let drive = 2.0 * u * (1.3 - u) / 0.7;
                (drive, ())
            };
            assert_abs_diff_eq!(deep, expected, epsilon = 1e-14);
        }
    }

    #[test]
    fn deep_flow_values() {
        assert_eq!(deep_mode_flow(1.0, 1.0, 1.0, 9), 0.0);
        let v = deep_mode_flow(0.5, 1.0, 1.0, 11);
        assert_abs_diff_eq!(v, 10.0 * 0.5_f64.powf(1.8) * 0.5, epsilon = 1e-14);
    }

    #[test]
    fn deep_time_depth_three_matches_closed_form() {
        let quad = deep_learning_time(1e-4, 0.95, 1.2, 1.7, 3).unwrap();
        let closed = learning_time(1e-4, 0.95, 1.2, 1.7).unwrap();
        assert!((quad - closed).abs() / closed < 1e-8);
    }

    #[test]
    fn deep_time_increases_and_saturates_in_depth() {
        // Rate-per-layer scaled times (N_l - 1) t(N_l) increase with depth
        // and stay below the infinite-depth bracket.
        let (u0, uf, s) = (0.001, 0.99, 1.0);
        let bound = infinite_depth_time(u0, uf, s, 1.0).unwrap();
        let mut prev = 0.0;
        for &depth in &[3usize, 5, 8, 16, 32, 64, 200] {
            let t = deep_learning_time(u0, uf, s, 1.0, depth).unwrap() * (depth as f64 - 1.0);
            assert!(t > prev, "depth {depth}: {t} not increasing");
            assert!(t < bound, "depth {depth}: {t} exceeds bound {bound}");
            prev = t;
        }
    }

    #[test]
    fn deep_time_approaches_infinite_depth_bracket() {
        let (u0, uf, s) = (0.1, 0.9, 1.0);
        let bracket = infinite_depth_time(u0, uf, s, 1.0).unwrap();
        let depth = 800;
        let scaled = deep_learning_time(u0, uf, s, 1.0, depth).unwrap() * (depth as f64 - 1.0);
        let rel = (scaled - bracket).abs() / bracket;
        assert!(rel < 0.01, "relative gap {rel:.4} at depth {depth}");
    }

    #[test]
    fn infinite_depth_edge_cases() {
        let t = infinite_depth_time(0.3, 0.3, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(t, 0.0, epsilon = 1e-12);
        // For symmetric cutoffs (eps, 1 - eps) the bracket expands to
        // 1/eps + 2 ln(1/eps) - 1/(1 - eps): the 1/(s u0) term dominates.
        for &eps in &[1e-4_f64, 1e-5] {
            let b = infinite_depth_time(eps, 1.0 - eps, 1.0, 1.0).unwrap();
            let expansion = 1.0 / eps + 2.0 * (1.0 / eps).ln() - 1.0 / (1.0 - eps);
            assert!((b - expansion).abs() / expansion < 1e-3, "eps {eps}: {b}");
            let dominance = b * eps;
            assert!(
                (1.0..1.01).contains(&dominance) || eps > 1e-4,
                "1/(s u0) should dominate: bracket * eps = {dominance}"
            );
        }
    }

    #[test]
    fn optimal_rate_depth_three() {
        let opt = optimal_learning_rate(1.0, 1.0, 3);
        assert_abs_diff_eq!(opt.hessian_eigenvalue, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(opt.rate, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn optimal_rate_scales_inversely_with_depth() {
        let a64 = optimal_learning_rate(1.0, 1.0, 64).rate;
        let a128 = optimal_learning_rate(1.0, 1.0, 128).rate;
        let ratio = a64 / a128;
        assert!((ratio - 127.0 / 63.0).abs() < 1e-12);
    }

    #[test]
    fn optimal_rate_strength_scaling_at_large_depth() {
        let base = optimal_learning_rate(1.0, 1.0, 100).rate;
        let doubled = optimal_learning_rate(2.0, 1.0, 100).rate;
        let shrink = base / doubled;
        assert!((3.8..=4.0).contains(&shrink), "shrink factor {shrink}");
    }

    #[test]
    fn depth_delay_values() {
        assert_abs_diff_eq!(depth_delay(1.0, 1.0, 0.01).unwrap(), 100.0, epsilon = 1e-12);
        assert!(depth_delay(1.0, 1.0, 1.0).is_err());
        let exact = depth_delay_exact(1.0, 1.0, 0.01, 0.99);
        assert_abs_diff_eq!(exact, 100.0 - 1.0 / 0.99, epsilon = 1e-10);
        // The eps shorthand is the leading term of the exact form.
        assert!((depth_delay(1.0, 1.0, 0.01).unwrap() - exact) / exact < 0.02);
    }

    #[test]
    fn depth_delay_flattens_at_large_depth() {
        // Times at the depth-scaled optimal rate: tau_eff = lambda_1(N).
        let (u0, uf, s) = (0.01, 0.99, 1.0);
        let time_at = |depth: usize| {
            let tau = optimal_learning_rate(s, 1.0, depth).hessian_eigenvalue;
            deep_learning_time(u0, uf, s, tau, depth).unwrap()
        };
        let t3 = {
            let tau = optimal_learning_rate(s, 1.0, 3).hessian_eigenvalue;
            learning_time(u0, uf, s, tau).unwrap()
        };
        let deltas: Vec<f64> = [200usize, 400, 800]
            .iter()
            .map(|&d| time_at(d) - t3)
            .collect();
        for pair in deltas.windows(2) {
            let rel = (pair[1] - pair[0]).abs() / pair[0];
            assert!(rel < 0.05, "delays not flat: {deltas:?}");
        }
        // And the flattened delay sits near the cs/u0 - cs/uf prediction.
        let predicted = depth_delay_exact(1.0, s, u0, uf);
        let rel = (deltas[2] - predicted).abs() / predicted;
        assert!(rel < 0.05, "delay {} vs predicted {predicted}", deltas[2]);
    }

    #[test]
    fn crossing_time_interpolates() {
        let traj = ModeTrajectory {
            times: vec![0, 10, 20],
            mode_strengths: vec![vec![0.1], vec![0.3], vec![0.7]],
            loss: vec![0.0; 3],
        };
        let t = simulated_crossing_time(&traj, 0, 0.5).unwrap();
        assert_abs_diff_eq!(t, 15.0, epsilon = 1e-12);
        assert!(simulated_crossing_time(&traj, 0, 0.9).is_none());
    }

    #[test]
    fn delays_vanish_on_exact_sigmoid_samples() {
        let p = ModeParams::new(2.0, 1000.0, 1e-5, 3).unwrap();
        let times: Vec<usize> = (0..400).map(|k| k * 10).collect();
        let traj = ModeTrajectory {
            mode_strengths: times
                .iter()
                .map(|&t| vec![mode_strength_curve(t as f64, &p)])
                .collect(),
            loss: vec![0.0; times.len()],
            times,
        };
        let delays = half_learning_delay(&traj, &[p]).unwrap();
        let d = delays[0].expect("crossing exists");
        assert!(d.abs() < 2e-3, "fractional delay {d}");
    }
}
