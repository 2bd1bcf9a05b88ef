//! Random-matrix product spectra, end-to-end Jacobians of nonlinear
//! orthogonal networks, dynamical-isometry metrics, and the mean-field
//! variance recursion with its edge-of-chaos fixed point.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::init;
use crate::linalg;
use crate::netsim::{forward_tanh, LinearNetwork};
use crate::quad::GaussHermite;

/// Matrix ensemble of one layer factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    /// Entries i.i.d. N(0, 1/width).
    Gaussian,
    /// Haar-distributed orthogonal.
    Orthogonal,
}

/// Sampled singular values of a matrix ensemble, sorted descending.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub values: Vec<f64>,
    pub width: usize,
    pub depth: usize,
    pub ensemble: Ensemble,
    pub realizations: usize,
}

impl SpectrumReport {
    pub fn min(&self) -> f64 {
        *self.values.last().unwrap_or(&f64::NAN)
    }

    pub fn max(&self) -> f64 {
        *self.values.first().unwrap_or(&f64::NAN)
    }

    pub fn median(&self) -> f64 {
        median_of_sorted_desc(&self.values)
    }

    pub fn fraction_in_band(&self, lo: f64, hi: f64) -> f64 {
        fraction_in_band(&self.values, lo, hi)
    }

    pub fn fraction_below(&self, cut: f64) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.iter().filter(|&&v| v < cut).count() as f64 / self.values.len() as f64
    }

    pub fn summary(&self, band: (f64, f64)) -> IsometrySummary {
        isometry_metrics(&self.values, band)
    }
}

fn median_of_sorted_desc(values: &[f64]) -> f64 {
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn fraction_in_band(values: &[f64], lo: f64, hi: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().filter(|&&v| v >= lo && v <= hi).count() as f64 / values.len() as f64
}

/// Singular values of products of `depth` i.i.d. width x width draws,
/// aggregated over independent realizations.
///
/// Products are accumulated explicitly; when entries outgrow 1e100 the
/// factor is renormalized and the scale reapplied to the singular values,
/// so very deep Gaussian chains cannot overflow.
pub fn product_singular_values(
    width: usize,
    depth: usize,
    ensemble: Ensemble,
    realizations: usize,
    seed: u64,
) -> Result<SpectrumReport> {
    if width < 2 || depth < 1 || realizations < 1 {
        return Err(Error::InvalidArgument(
            "need width >= 2, depth >= 1, realizations >= 1".into(),
        ));
    }
    let mut values = Vec::with_capacity(width * realizations);
    for realization in 0..realizations {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(realization as u64 + 1);
        let draw = |rng: &mut ChaCha8Rng| -> DMatrix<f64> {
            match ensemble {
                Ensemble::Gaussian => {
                    linalg::gaussian_matrix(width, width, rng) / (width as f64).sqrt()
                }
                Ensemble::Orthogonal => linalg::haar_orthogonal(width, rng),
            }
        };
        let mut product = draw(&mut rng);
        let mut log_scale = 0.0_f64;
        for _ in 1..depth {
            product = draw(&mut rng) * product;
            let magnitude = linalg::max_abs(&product);
            if magnitude > 1e100 {
                product /= magnitude;
                log_scale += magnitude.ln();
            }
        }
        let singular = linalg::singular_values(&product)?;
        let rescale = log_scale.exp();
        values.extend(singular.iter().map(|v| v * rescale));
    }
    values.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    Ok(SpectrumReport {
        values,
        width,
        depth,
        ensemble,
        realizations,
    })
}

/// Singular values of the end-to-end Jacobian of a tanh network evaluated
/// along the forward pass from `x1`.
#[derive(Debug, Clone)]
pub struct JacobianProbe {
    pub gain: f64,
    pub input_variance: f64,
    pub width: usize,
    pub depth: usize,
    pub values: Vec<f64>,
}

impl JacobianProbe {
    pub fn summary(&self, band: (f64, f64)) -> IsometrySummary {
        isometry_metrics(&self.values, band)
    }
}

/// Accumulates J = prod_l [ g W^l diag(tanh'(x^l)) ] in forward order and
/// returns its singular values.
pub fn jacobian_nonlinear(net: &LinearNetwork, x1: &DVector<f64>, gain: f64) -> Result<JacobianProbe> {
    if x1.len() != net.input_dim() {
        return Err(Error::Shape(format!(
            "input has {} entries, network expects {}",
            x1.len(),
            net.input_dim()
        )));
    }
    let activations = forward_tanh(net, x1, gain);
    let n1 = net.input_dim();
    let mut jacobian = DMatrix::<f64>::identity(n1, n1);
    for (layer, w) in net.weights().iter().enumerate() {
        // Row-scale by tanh'(x^l) = sech^2, then apply g W^l.
        let x = &activations[layer];
        for j in 0..jacobian.ncols() {
            for i in 0..jacobian.nrows() {
                let t = x[i].tanh();
                jacobian[(i, j)] *= 1.0 - t * t;
            }
        }
        jacobian = w * jacobian * gain;
    }
    let values = linalg::singular_values(&jacobian)?;
    Ok(JacobianProbe {
        gain,
        input_variance: x1.norm_squared() / n1 as f64,
        width: n1,
        depth: net.weights().len(),
        values: values.iter().copied().collect(),
    })
}

/// Default Gauss-Hermite order for the variance recursion.
pub const DEFAULT_QUADRATURE_ORDER: usize = 101;

fn default_rule() -> &'static GaussHermite {
    static RULE: OnceLock<GaussHermite> = OnceLock::new();
    RULE.get_or_init(|| GaussHermite::new(DEFAULT_QUADRATURE_ORDER))
}

/// One step of the population-variance recursion:
/// q_next = g^2 Int Dz tanh(sqrt(q) z)^2.
pub fn variance_map(q: f64, gain: f64, rule: &GaussHermite) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    let root_q = q.sqrt();
    gain * gain * rule.gaussian_expectation(|z| {
        let t = (root_q * z).tanh();
        t * t
    })
}

/// Variance map at the default quadrature order.
pub fn variance_map_default(q: f64, gain: f64) -> f64 {
    variance_map(q, gain, default_rule())
}

/// Stable fixed point q_inf(g) of the variance recursion: exactly 0 at or
/// below the critical gain g = 1, located by bisection above it.
pub fn q_fixed_point(gain: f64, tolerance: f64) -> f64 {
    assert!(gain > 0.0, "gain must be positive");
    if gain <= 1.0 {
        return 0.0;
    }
    let rule = default_rule();
    let residual = |q: f64| variance_map(q, gain, rule) - q;
    let mut lo = 1e-12;
    let mut hi = gain * gain;
    debug_assert!(residual(lo) > 0.0 && residual(hi) < 0.0);
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Per-layer population variances q^l of a tanh forward pass through `net`
/// at gain `g`, starting from an input drawn with population variance
/// exactly `q1`. Returns one entry per layer including the input layer.
pub fn q_profile(net: &LinearNetwork, gain: f64, q1: f64, seed: u64) -> Result<Vec<f64>> {
    let width = net.input_dim();
    if q1 < 0.0 {
        return Err(Error::InvalidArgument("q1 must be non-negative".into()));
    }
    let x1 = if q1 == 0.0 {
        DVector::zeros(width)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = DVector::<f64>::from_fn(width, |_, _| rng.sample(rand_distr::StandardNormal));
        let scale = (q1 * width as f64 / raw.norm_squared()).sqrt();
        raw * scale
    };
    let activations = forward_tanh(net, &x1, gain);
    Ok(activations
        .iter()
        .map(|x| x.norm_squared() / x.len() as f64)
        .collect())
}

/// Builds a random orthogonal tanh network of `depth` layers and returns
/// its population-variance profile.
pub fn empirical_q_profile(
    width: usize,
    depth: usize,
    gain: f64,
    q1: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    if width < 100 {
        log::warn!("population variance concentrates for large widths; width {width} < 100 will be noisy");
    }
    if depth < 3 {
        return Err(Error::InvalidArgument("profile needs depth >= 3".into()));
    }
    let net = init::random_orthogonal(&vec![width; depth], seed)?;
    q_profile(&net, gain, q1, seed ^ 0x9e37_79b9_7f4a_7c15)
}

/// Theory-side chaos curve: q_inf over a grid of gains.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChaosCurve {
    pub gains: Vec<f64>,
    pub q_values: Vec<f64>,
    pub method: ChaosMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChaosMethod {
    Theory,
    Simulation,
}

impl ChaosCurve {
    pub fn theory(gains: &[f64], tolerance: f64) -> ChaosCurve {
        ChaosCurve {
            gains: gains.to_vec(),
            q_values: gains.iter().map(|&g| q_fixed_point(g, tolerance)).collect(),
            method: ChaosMethod::Theory,
        }
    }
}

/// Summary statistics of a singular-value sample for isometry judgments.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IsometrySummary {
    pub fraction_in_band: f64,
    pub log_spread: f64,
    pub min: f64,
    pub median: f64,
    pub max: f64,
    pub band_lo: f64,
    pub band_hi: f64,
}

/// Fraction of values inside the band, spread of log values, and extremes.
pub fn isometry_metrics(values: &[f64], band: (f64, f64)) -> IsometrySummary {
    assert!(!values.is_empty(), "isometry metrics need at least one value");
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    let logs: Vec<f64> = sorted
        .iter()
        .map(|&v| v.max(f64::MIN_POSITIVE).ln())
        .collect();
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    let var = logs.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / logs.len() as f64;
    IsometrySummary {
        fraction_in_band: fraction_in_band(&sorted, band.0, band.1),
        log_spread: var.sqrt(),
        min: *sorted.last().unwrap(),
        median: median_of_sorted_desc(&sorted),
        max: sorted[0],
        band_lo: band.0,
        band_hi: band.1,
    }
}
