//! Shared helpers for in-crate tests: the central-difference gradient oracle
//! and small random matrices.

use ndarray::Array2;
use rand::Rng;

use crate::nn::{Tape, Tensor};

/// Rebuilds the forward pass with perturbed leaves and compares analytic
/// gradients against central differences, element by element.
pub(crate) fn check_gradients<F>(build: F, inits: &[Array2<f64>], eps: f64, tol: f64)
where
    F: Fn(&mut Tape, &[Tensor]) -> Tensor,
{
    let forward = |values: &[Array2<f64>]| -> f64 {
        let mut tape = Tape::new();
        let leaves: Vec<Tensor> = values.iter().map(|v| tape.leaf(v.clone())).collect();
        let loss = build(&mut tape, &leaves);
        tape.value(loss)[(0, 0)]
    };

    let mut tape = Tape::new();
    let leaves: Vec<Tensor> = inits.iter().map(|v| tape.leaf(v.clone())).collect();
    let loss = build(&mut tape, &leaves);
    tape.backward(loss).unwrap();
    let analytic: Vec<Array2<f64>> = leaves
        .iter()
        .map(|&l| {
            tape.grad(l)
                .cloned()
                .unwrap_or_else(|| Array2::zeros(tape.value(l).dim()))
        })
        .collect();

    for (li, init) in inits.iter().enumerate() {
        let (rows, cols) = init.dim();
        for r in 0..rows {
            for c in 0..cols {
                let mut plus = inits.to_vec();
                plus[li][(r, c)] += eps;
                let mut minus = inits.to_vec();
                minus[li][(r, c)] -= eps;
                let fd = (forward(&plus) - forward(&minus)) / (2.0 * eps);
                let a = analytic[li][(r, c)];
                let rel = (a - fd).abs() / a.abs().max(fd.abs()).max(1e-6);
                assert!(
                    rel < tol,
                    "leaf {} element ({}, {}): analytic {} vs fd {} (rel {})",
                    li,
                    r,
                    c,
                    a,
                    fd,
                    rel
                );
            }
        }
    }
}

/// Random values bounded away from zero so relu kinks cannot sit inside the
/// FD stencil.
pub(crate) fn rand_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| {
        let v: f64 = rng.random_range(0.1..1.0);
        if rng.random::<bool>() {
            v
        } else {
            -v
        }
    })
}

pub(crate) const FD_EPS: f64 = 1e-5;
pub(crate) const FD_TOL: f64 = 1e-4;
