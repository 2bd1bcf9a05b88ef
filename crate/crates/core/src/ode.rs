//! Classical fourth-order Runge-Kutta integration for small autonomous
//! systems. Used to cross-check closed-form learning curves and conserved
//! quantities against direct integration of the flow.

/// One RK4 step of an autonomous system.
pub fn rk4_step<const N: usize, F>(f: &F, y: [f64; N], h: f64) -> [f64; N]
where
    F: Fn([f64; N]) -> [f64; N],
{
    let k1 = f(y);
    let mut y2 = y;
    for i in 0..N {
        y2[i] = y[i] + 0.5 * h * k1[i];
    }
    let k2 = f(y2);
    let mut y3 = y;
    for i in 0..N {
        y3[i] = y[i] + 0.5 * h * k2[i];
    }
    let k3 = f(y3);
    let mut y4 = y;
    for i in 0..N {
        y4[i] = y[i] + h * k3[i];
    }
    let k4 = f(y4);
    let mut out = y;
    for i in 0..N {
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Fixed-step integration over `[0, t_end]`, invoking `observe` after every
/// step (including the initial state at t = 0).
pub fn rk4_fixed<const N: usize, F, O>(f: &F, y0: [f64; N], t_end: f64, h: f64, mut observe: O) -> [f64; N]
where
    F: Fn([f64; N]) -> [f64; N],
    O: FnMut(f64, [f64; N]),
{
    assert!(h > 0.0 && t_end >= 0.0);
    let mut y = y0;
    let mut t = 0.0;
    observe(t, y);
    while t < t_end {
        let step = h.min(t_end - t);
        y = rk4_step(f, y, step);
        t += step;
        observe(t, y);
    }
    y
}

/// Step-doubling adaptive RK4: each accepted step compares one full step
/// against two half steps and keeps the local error below
/// `tol * (1 + |y|)` per component.
pub fn rk4_adaptive<const N: usize, F>(
    f: &F,
    y0: [f64; N],
    t_end: f64,
    tol: f64,
    h_init: f64,
) -> [f64; N]
where
    F: Fn([f64; N]) -> [f64; N],
{
    let mut y = y0;
    let mut t = 0.0;
    let mut h = h_init.max(1e-300);
    while t < t_end {
        h = h.min(t_end - t);
        let full = rk4_step(f, y, h);
        let half = rk4_step(f, y, 0.5 * h);
        let double = rk4_step(f, half, 0.5 * h);
        let mut err = 0.0_f64;
        for i in 0..N {
            let scale = 1.0 + y[i].abs();
            err = err.max((full[i] - double[i]).abs() / scale / 15.0);
        }
        if err <= tol || h <= 1e-14 * (1.0 + t) {
            // Richardson extrapolation of the two half steps.
            let mut next = double;
            for i in 0..N {
                next[i] = double[i] + (double[i] - full[i]) / 15.0;
            }
            y = next;
            t += h;
        }
        let ratio = if err > 0.0 { (tol / err).powf(0.2) } else { 4.0 };
        h *= ratio.clamp(0.2, 4.0) * 0.9;
        if h < 1e-300 {
            break;
        }
    }
    y
}

/// Integrates until `event(y)` crosses zero from below, returning the event
/// time located by bisection on the step size. `event` must be increasing
/// through the crossing.
pub fn rk4_event_time<const N: usize, F, E>(
    f: &F,
    y0: [f64; N],
    tol: f64,
    h_init: f64,
    t_max: f64,
    event: E,
) -> Option<f64>
where
    F: Fn([f64; N]) -> [f64; N],
    E: Fn([f64; N]) -> f64,
{
    let mut y = y0;
    let mut t = 0.0;
    let mut h = h_init.max(1e-300);
    if event(y) >= 0.0 {
        return Some(0.0);
    }
    while t < t_max {
        h = h.min(t_max - t);
        let full = rk4_step(f, y, h);
        let half = rk4_step(f, y, 0.5 * h);
        let double = rk4_step(f, half, 0.5 * h);
        let mut err = 0.0_f64;
        for i in 0..N {
            let scale = 1.0 + y[i].abs();
            err = err.max((full[i] - double[i]).abs() / scale / 15.0);
        }
        if err <= tol || h <= 1e-14 * (1.0 + t) {
            let mut next = double;
            for i in 0..N {
                next[i] = double[i] + (double[i] - full[i]) / 15.0;
            }
            if event(next) >= 0.0 {
                // Bisect inside [t, t + h] with fresh sub-steps.
                let mut lo = 0.0;
                let mut hi = h;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let probe = rk4_step(f, rk4_step(f, y, 0.5 * mid), 0.5 * mid);
                    if event(probe) >= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                    if hi - lo <= 1e-13 * (1.0 + t) {
                        break;
                    }
                }
                return Some(t + 0.5 * (lo + hi));
            }
            y = next;
            t += h;
        }
        let ratio = if err > 0.0 { (tol / err).powf(0.2) } else { 4.0 };
        h *= ratio.clamp(0.2, 4.0) * 0.9;
        if h < 1e-300 {
            break;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_matches_closed_form() {
        let f = |y: [f64; 1]| [-y[0]];
        let y = rk4_adaptive(&f, [1.0], 3.0, 1e-12, 0.1);
        assert!((y[0] - (-3.0_f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_conserves_energy() {
        let f = |y: [f64; 2]| [y[1], -y[0]];
        let mut max_drift = 0.0_f64;
        rk4_fixed(&f, [1.0, 0.0], 20.0, 0.005, |_, y| {
            let e = y[0] * y[0] + y[1] * y[1];
            max_drift = max_drift.max((e - 1.0).abs());
        });
        assert!(max_drift < 1e-10, "energy drift {max_drift:.3e}");
    }

    #[test]
    fn event_time_for_logistic_crossing() {
        // u' = u(1-u), u0 = 0.1; time to reach 0.5 is ln(9)/... the exact
        // separable answer ln((0.5*0.9)/(0.1*0.5)) = ln 9.
        let f = |y: [f64; 1]| [y[0] * (1.0 - y[0])];
        let t = rk4_event_time(&f, [0.1], 1e-11, 0.05, 100.0, |y| y[0] - 0.5).unwrap();
        assert!((t - 9.0_f64.ln()).abs() < 1e-8, "t={t}");
    }
}
