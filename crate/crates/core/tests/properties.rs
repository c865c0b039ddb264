use proptest::prelude::*;
use vaeattack::chaos::LogisticMap;
use vaeattack::dataprep::{load_csv, write_csv, Dataset};
use vaeattack::numkernel::{Matrix, Rng};
use vaeattack::vae::{reparameterize, vae_loss, Architecture, VaeModel, Variant};
use vaeattack::wavenet::{Activation, WaveletKind};

proptest! {
    #[test]
    fn kl_is_never_negative(
        mu in prop::collection::vec(-50.0f64..50.0, 1..16),
        lv in prop::collection::vec(-30.0f64..30.0, 16),
    ) {
        let d = mu.len();
        let mu = Matrix::new(1, d, mu).unwrap();
        let lv = Matrix::new(1, d, lv[..d].to_vec()).unwrap();
        let x = Matrix::zeros(1, 2);
        let loss = vae_loss(&x, &x, &mu, &lv).unwrap();
        prop_assert!(loss.kl >= 0.0);
        prop_assert_eq!(loss.recon, 0.0);
        prop_assert_eq!(loss.total, loss.kl);
    }

    #[test]
    fn csv_round_trip(rows in 1usize..30, cols in 1usize..6, seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let x = Matrix::from_fn(rows, cols, |_, _| rng.next_normal() * 10f64.powi(rng.next_below(12) as i32 - 6));
        let labels = (0..rows).map(|_| rng.next_below(2) as u8).collect();
        let names = (0..cols).map(|j| format!("col {j}")).collect();
        let ds = Dataset::new(x, labels, names).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        write_csv(&ds, &path).unwrap();
        let back = load_csv(&path, Some("label")).unwrap();
        prop_assert_eq!(back, ds);
    }

    #[test]
    fn chaotic_values_stay_in_unit_interval(seed in 0.0001f64..0.9999, n in 1usize..5000) {
        prop_assume!(![0.25, 0.5, 0.75].contains(&seed));
        let values = LogisticMap::new(seed).unwrap().fill(n).unwrap();
        prop_assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}

#[test]
fn kl_of_unit_mean_is_half_per_dimension() {
    for d in 1..=8 {
        let x = Matrix::zeros(3, 2);
        let loss = vae_loss(&x, &x, &Matrix::from_fn(3, d, |_, _| 1.0), &Matrix::zeros(3, d)).unwrap();
        assert!((loss.kl - 0.5 * d as f64).abs() < 1e-12);
    }
}

#[test]
fn vanishing_variance_returns_the_mean() {
    let mu = Matrix::new(2, 2, vec![0.3, -1.2, 4.0, 0.0]).unwrap();
    let lv = Matrix::from_fn(2, 2, |_, _| -60.0);
    let eps = Matrix::new(2, 2, vec![1.0, -2.0, 0.5, 3.0]).unwrap();
    let z = reparameterize(&mu, &lv, &eps).unwrap();
    for (a, b) in z.as_slice().iter().zip(mu.as_slice()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn chaotic_and_gaussian_variants_share_the_forward_pass() {
    for (plain, chaotic) in [(Variant::VaeMlp, Variant::CvaeMlp), (Variant::VaeWnn, Variant::CvaeWnn)] {
        let arch = Architecture {
            features: 5,
            hidden_layers: vec![6, 4],
            latent_dim: 3,
            activation: Activation::Tanh,
            wavelet: WaveletKind::MexicanHat,
        };
        let a = VaeModel::new(plain, &arch, &mut Rng::new(8)).unwrap();
        let b = VaeModel::new(chaotic, &arch, &mut Rng::new(8)).unwrap();
        let mut rng = Rng::new(1);
        let x = Matrix::from_fn(7, 5, |_, _| rng.next_f64());
        let eps = Matrix::from_fn(7, 3, |_, _| rng.next_f64());
        let fa = a.forward_with_noise(&x, &eps).unwrap();
        let fb = b.forward_with_noise(&x, &eps).unwrap();
        assert_eq!(fa.x_hat, fb.x_hat);
        assert_eq!(fa.z, fb.z);
    }
}

#[test]
fn nearby_chaos_seeds_diverge() {
    let a = LogisticMap::new(0.1234).unwrap().fill(100).unwrap();
    let b = LogisticMap::new(0.1234 + 1e-9).unwrap().fill(100).unwrap();
    assert!(a.iter().zip(&b).any(|(x, y)| (x - y).abs() > 0.1));
}
