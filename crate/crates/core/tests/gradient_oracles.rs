//! Finite-difference oracles: every analytic gradient in the crate is
//! checked against central differences of an independently computed loss.

use dld_core::linalg;
use dld_core::netsim::{
    self, effective_map, forward_tanh, grad_step_deep, grad_step_three_layer, LinearNetwork,
};
use dld_core::spectra::jacobian_nonlinear;
use dld_core::tasks::{compute_correlations, TaskDataset};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_dataset(n_in: usize, n_out: usize, examples: usize, seed: u64) -> TaskDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    TaskDataset::new(
        linalg::gaussian_matrix(n_in, examples, &mut rng),
        linalg::gaussian_matrix(n_out, examples, &mut rng),
        "fd-fixture",
    )
    .unwrap()
}

fn random_net(sizes: &[usize], seed: u64) -> LinearNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    LinearNetwork::new(
        sizes
            .windows(2)
            .map(|w| linalg::gaussian_matrix(w[1], w[0], &mut rng) * 0.5)
            .collect(),
    )
    .unwrap()
}

/// Squared error summed over examples, by explicit forward propagation.
fn forward_loss(net: &LinearNetwork, data: &TaskDataset) -> f64 {
    let residual = &data.outputs - effective_map(net) * &data.inputs;
    0.5 * residual.iter().map(|r| r * r).sum::<f64>()
}

fn check_linear_gradient(sizes: &[usize], seed: u64) {
    let data = random_dataset(sizes[0], *sizes.last().unwrap(), 3 * sizes[0], seed);
    let stats = compute_correlations(&data).unwrap();
    let net = random_net(sizes, seed.wrapping_add(1));
    let rate = 1e-3;

    let mut stepped = net.clone();
    if sizes.len() == 3 {
        grad_step_three_layer(&mut stepped, &stats, rate).unwrap();
    } else {
        grad_step_deep(&mut stepped, &stats, rate).unwrap();
    }

    let h = 1e-5;
    for layer in 0..net.weights().len() {
        let (rows, cols) = net.weights()[layer].shape();
        let mut fd_update = DMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let mut plus = net.clone();
                plus.weights_mut()[layer][(i, j)] += h;
                let mut minus = net.clone();
                minus.weights_mut()[layer][(i, j)] -= h;
                let grad = (forward_loss(&plus, &data) - forward_loss(&minus, &data)) / (2.0 * h);
                fd_update[(i, j)] = -rate * grad;
            }
        }
        let applied = &stepped.weights()[layer] - &net.weights()[layer];
        let rel = linalg::frobenius(&(&applied - &fd_update)) / linalg::frobenius(&applied);
        assert!(
            rel < 1e-5,
            "layer {layer} of {sizes:?}: gradient mismatch {rel:.3e}"
        );
    }
}

#[test]
fn three_layer_update_matches_finite_differences() {
    // Three random fixtures per depth, including the rectangular 4-3-5 case.
    for seed in [1, 2, 3] {
        check_linear_gradient(&[4, 3, 5], seed);
    }
}

#[test]
fn depth_five_update_matches_finite_differences() {
    for seed in [4, 5, 6] {
        check_linear_gradient(&[6, 4, 5, 4, 3], seed);
    }
}

#[test]
fn depth_six_mixed_widths_update_matches_finite_differences() {
    check_linear_gradient(&[8, 5, 5, 5, 5, 4], 7);
}

#[test]
fn depth_eight_update_matches_finite_differences() {
    for seed in [8, 9, 10] {
        check_linear_gradient(&[5, 4, 4, 3, 4, 4, 3, 4], seed);
    }
}

#[test]
fn tanh_backprop_matches_finite_differences() {
    let data = random_dataset(6, 5, 12, 20);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let w21 = linalg::gaussian_matrix(4, 6, &mut rng) * 0.6;
    let w32 = linalg::gaussian_matrix(5, 4, &mut rng) * 0.6;
    let (_, grad21, grad32) = netsim::tanh_loss_and_gradients(&w21, &w32, &data);

    let loss_of = |w21: &DMatrix<f64>, w32: &DMatrix<f64>| -> f64 {
        let hidden = (w21 * &data.inputs).map(f64::tanh);
        let residual = w32 * hidden - &data.outputs;
        0.5 * residual.iter().map(|r| r * r).sum::<f64>()
    };

    let h = 1e-6;
    let mut fd21 = DMatrix::zeros(4, 6);
    for i in 0..4 {
        for j in 0..6 {
            let mut plus = w21.clone();
            plus[(i, j)] += h;
            let mut minus = w21.clone();
            minus[(i, j)] -= h;
            fd21[(i, j)] = (loss_of(&plus, &w32) - loss_of(&minus, &w32)) / (2.0 * h);
        }
    }
    let rel = linalg::frobenius(&(&grad21 - &fd21)) / linalg::frobenius(&grad21);
    assert!(rel < 1e-5, "hidden-layer gradient mismatch {rel:.3e}");

    let mut fd32 = DMatrix::zeros(5, 4);
    for i in 0..5 {
        for j in 0..4 {
            let mut plus = w32.clone();
            plus[(i, j)] += h;
            let mut minus = w32.clone();
            minus[(i, j)] -= h;
            fd32[(i, j)] = (loss_of(&w21, &plus) - loss_of(&w21, &minus)) / (2.0 * h);
        }
    }
    let rel = linalg::frobenius(&(&grad32 - &fd32)) / linalg::frobenius(&grad32);
    assert!(rel < 1e-5, "readout gradient mismatch {rel:.3e}");
}

#[test]
fn nonlinear_jacobian_matches_finite_differences() {
    for (fixture, gain) in [(1u64, 0.9), (2, 1.0), (3, 1.2)] {
        let net = dld_core::init::random_orthogonal(&vec![20; 6], fixture).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(100 + fixture);
        let x1 = DVector::from_fn(20, |_, _| {
            rand::Rng::sample::<f64, _>(&mut rng, rand_distr::StandardNormal)
        });
        let probe = jacobian_nonlinear(&net, &x1, gain).unwrap();

        let h = 1e-6;
        let mut fd = DMatrix::zeros(20, 20);
        for j in 0..20 {
            let mut plus = x1.clone();
            plus[j] += h;
            let mut minus = x1.clone();
            minus[j] -= h;
            let out_plus = forward_tanh(&net, &plus, gain).pop().unwrap();
            let out_minus = forward_tanh(&net, &minus, gain).pop().unwrap();
            for i in 0..20 {
                fd[(i, j)] = (out_plus[i] - out_minus[i]) / (2.0 * h);
            }
        }
        let fd_values = linalg::singular_values(&fd).unwrap();
        for (a, b) in probe.values.iter().zip(fd_values.iter()) {
            let rel = (a - b).abs() / b.abs().max(1e-12);
            assert!(
                rel < 1e-4,
                "fixture {fixture} gain {gain}: singular value {a} vs fd {b}"
            );
        }
    }
}
