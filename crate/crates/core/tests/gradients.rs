//! Analytic gradients against central differences computed here.

use proptest::prelude::*;
use vaeattack::numkernel::{Matrix, Rng};
use vaeattack::wavenet::{Activation, DenseLayer, Layer, WaveletKind, WaveletLayer};

const STEP: f64 = 1e-5;
const TOLERANCE: f64 = 1e-4;

fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-4)
}

fn central<F: FnMut(f64) -> f64>(mut f: F, x: f64) -> f64 {
    (f(x + STEP) - f(x - STEP)) / (2.0 * STEP)
}

/// Scalar objective `Σ out ⊙ r` so the upstream gradient is `r`.
fn objective(layer: &Layer, x: &Matrix, r: &Matrix) -> f64 {
    let (_, out) = layer.forward(x).unwrap();
    out.as_slice().iter().zip(r.as_slice()).map(|(a, b)| a * b).sum()
}

fn check_layer(mut layer: Layer, rows: usize, rng: &mut Rng) -> Result<(), TestCaseError> {
    let x = Matrix::from_fn(rows, layer.inputs(), |_, _| 2.0 * rng.next_normal());
    let r = Matrix::from_fn(rows, layer.outputs(), |_, _| rng.next_normal());
    let (pre, _) = layer.forward(&x).unwrap();
    let (grads, dx) = layer.backward(&x, &pre, &r).unwrap();

    let groups = layer.params().len();
    prop_assert_eq!(grads.len(), groups);
    for g in 0..groups {
        let len = layer.params()[g].len();
        prop_assert_eq!(grads[g].len(), len);
        for i in 0..len {
            let original = layer.params()[g][i];
            let numeric = central(
                |v| {
                    layer.params_mut()[g][i] = v;
                    objective(&layer, &x, &r)
                },
                original,
            );
            layer.params_mut()[g][i] = original;
            let e = rel_err(grads[g][i], numeric);
            prop_assert!(e < TOLERANCE, "group {} index {}: analytic {} numeric {} err {}", g, i, grads[g][i], numeric, e);
        }
    }
    let mut xp = x.clone();
    for i in 0..x.as_slice().len() {
        let original = x.as_slice()[i];
        let numeric = central(
            |v| {
                xp.as_mut_slice()[i] = v;
                objective(&layer, &xp, &r)
            },
            original,
        );
        xp.as_mut_slice()[i] = original;
        let e = rel_err(dx.as_slice()[i], numeric);
        prop_assert!(e < TOLERANCE, "input {}: analytic {} numeric {}", i, dx.as_slice()[i], numeric);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn scalar_wavelet_derivatives(kind in 0usize..5, x in -6.0f64..6.0) {
        let w = WaveletKind::ALL[kind];
        let numeric = central(|v| w.eval(v), x);
        prop_assert!(rel_err(w.grad(x), numeric) < TOLERANCE, "{} at {}", w, x);
    }

    #[test]
    fn wavelet_layer_parameters(kind in 0usize..5, inputs in 1usize..=16, outputs in 1usize..=16, rows in 1usize..=6, seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let layer = WaveletLayer::random(inputs, outputs, WaveletKind::ALL[kind], &mut rng);
        check_layer(Layer::Wavelet(layer), rows, &mut rng)?;
    }

    #[test]
    fn dense_layer_parameters(act in 0usize..4, inputs in 1usize..=16, outputs in 1usize..=16, rows in 1usize..=6, seed in any::<u64>()) {
        let activation = [Activation::Relu, Activation::Tanh, Activation::Sigmoid, Activation::Identity][act];
        let mut rng = Rng::new(seed);
        let layer = DenseLayer::random(inputs, outputs, activation, &mut rng);
        check_layer(Layer::Dense(layer), rows, &mut rng)?;
    }
}

#[test]
fn shannon_near_its_removable_point() {
    for x in [0.5 - 1e-3, 0.5 - 1e-5, 0.5, 0.5 + 1e-7, 0.5 + 1e-3] {
        let numeric = central(|v| WaveletKind::Shannon.eval(v), x);
        assert!(rel_err(WaveletKind::Shannon.grad(x), numeric) < TOLERANCE, "{x}");
    }
    assert!((WaveletKind::Shannon.eval(0.5) + 1.0).abs() < 1e-12);
}
