//! Behavioral guarantees of the RGPR augmentation: prediction invariance,
//! cubic variance growth, uniform asymptotic confidence, binary decay, and
//! the far-away Monte Carlo behavior.

mod common;

use rgpr::data::scale_point;
use rgpr::kernels::LayeredDscsParams;
use rgpr::laplace::{linearized_predictive, probit_predict, GaussianPosterior, PosteriorCov};
use rgpr::network::{argmax, forward, softmax};
use rgpr::numerics::{Matrix, Rng};
use rgpr::rgpr::{confidence, mc_predict, rgpr_predictive, RgprModel};

#[test]
fn predictive_mean_is_bit_identical_under_augmentation() {
    let (model, data) = common::trained_moons_model(51);
    let mut rng = Rng::new(52);
    for _ in 0..100 {
        let x = [
            rng.uniform_in(-3.0, 3.0) * 1000.0f64.powf(rng.uniform()),
            rng.uniform_in(-3.0, 3.0),
        ];
        let plain = linearized_predictive(&model.net, &model.post, &x).unwrap();
        let aug = rgpr_predictive(&model, &x).unwrap();
        assert_eq!(plain.mean, aug.mean);
    }
    // Also at the training points themselves.
    for i in 0..50 {
        let x = data.input(i);
        let plain = linearized_predictive(&model.net, &model.post, x).unwrap();
        let aug = rgpr_predictive(&model, x).unwrap();
        assert_eq!(plain.mean, aug.mean);
    }
}

/// With an isotropic last-layer posterior the per-class base variances are
/// equal, so the probit argmax must match the MAP argmax wherever the MAP
/// logit margin is nonzero.
#[test]
fn probit_argmax_matches_map_argmax_under_isotropic_posterior() {
    let (mut model, _) = common::trained_moons_model(53);
    let p = model.post.mean.len();
    model.post = GaussianPosterior {
        subset: model.post.subset,
        mean: model.post.mean.clone(),
        cov: PosteriorCov::Full(Matrix::identity(p)),
    };
    let mut rng = Rng::new(54);
    let mut checked = 0;
    for _ in 0..200 {
        let x = [rng.uniform_in(-4.0, 4.0), rng.uniform_in(-4.0, 4.0)];
        let logits = forward(&model.net, &x).unwrap().logits;
        let margin = {
            let mut sorted = logits.clone();
            sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
            sorted[0] - sorted[1]
        };
        if margin <= 1e-6 {
            continue;
        }
        let map_class = argmax(&softmax(&logits));
        let aug_class = argmax(&probit_predict(&rgpr_predictive(&model, &x).unwrap()));
        assert_eq!(aug_class, map_class, "argmax flipped at {x:?}");
        checked += 1;
    }
    assert!(checked > 150, "margin filter rejected too many points");
}

/// With an input-only kernel the augmented variance grows cubically along
/// rays: the log-log slope over three decades of alpha is 3 +- 0.05.
#[test]
fn augmented_variance_grows_cubically() {
    let (mut model, _) = common::trained_moons_model(55);
    model.kernel = LayeredDscsParams::input_only(model.net.n_representations(), 1.0).unwrap();
    let alphas = [1e2, 1e3, 1e4];
    let mut rng = Rng::new(56);
    for trial in 0..10 {
        let angle = rng.uniform_in(0.0, 2.0 * std::f64::consts::PI);
        let x = [angle.cos(), angle.sin()];
        for class in 0..2 {
            let vars: Vec<f64> = alphas
                .iter()
                .map(|alpha| {
                    let pred = rgpr_predictive(&model, &scale_point(&x, *alpha)).unwrap();
                    pred.variance(class)
                })
                .collect();
            let slope = common::log_log_slope(&alphas, &vars);
            assert!(
                (slope - 3.0).abs() <= 0.05,
                "trial {trial}, class {class}: slope {slope}, vars {vars:?}"
            );
        }
    }
}

/// Far along any ray the probit confidence collapses to 1/C for every
/// class, on trained and random networks alike. The kernel variance is
/// set to 100 (inside the range the entropy-objective tuning itself
/// selects) so the asymptotic regime is reached by alpha = 1e6; the limit
/// itself does not depend on the variance.
#[test]
fn probit_confidence_is_asymptotically_uniform() {
    let alpha = 1e6;
    let tol = 1e-3;
    let sigma2 = 100.0;
    let mut cases: Vec<(String, RgprModel)> = Vec::new();
    let (moons, _) = common::trained_moons_model(57);
    cases.push(("trained moons C=2".into(), moons));
    for c in [3usize, 10] {
        let (blobs, _) = common::trained_blob_model(c, 57 + c as u64);
        cases.push((format!("trained blobs C={c}"), blobs));
    }
    for c in [2usize, 3, 10] {
        cases.push((
            format!("random C={c}"),
            common::random_model(c, 60 + c as u64),
        ));
    }
    for (_, model) in cases.iter_mut() {
        model.kernel = LayeredDscsParams::constant(model.net.n_representations(), sigma2).unwrap();
    }
    let mut rng = Rng::new(58);
    for (name, model) in &cases {
        let c = model.net.output_dim() as f64;
        for _ in 0..5 {
            let angle = rng.uniform_in(0.0, 2.0 * std::f64::consts::PI);
            let x = [alpha * angle.cos(), alpha * angle.sin()];
            let probs = probit_predict(&rgpr_predictive(model, &x).unwrap());
            for (cls, p) in probs.iter().enumerate() {
                assert!(
                    (p - 1.0 / c).abs() <= tol,
                    "{name}, class {cls}: p = {p}, |p - 1/C| = {}",
                    (p - 1.0 / c).abs()
                );
            }
        }
    }
}

/// Binary case: the excess confidence decays like 1/sqrt(alpha), so
/// (conf - 1/2) * sqrt(alpha) is stable across decades.
#[test]
fn binary_excess_confidence_decays_like_inverse_sqrt_alpha() {
    let (model, _) = common::trained_moons_model(59);
    let alphas = [1e4, 1e6, 1e8];
    let mut rng = Rng::new(60);
    for trial in 0..10 {
        let angle = rng.uniform_in(0.0, 2.0 * std::f64::consts::PI);
        let x = [angle.cos(), angle.sin()];
        let scaled: Vec<f64> = alphas
            .iter()
            .map(|alpha| {
                let probs =
                    probit_predict(&rgpr_predictive(&model, &scale_point(&x, *alpha)).unwrap());
                (confidence(&probs) - 0.5) * alpha.sqrt()
            })
            .collect();
        for w in scaled.windows(2) {
            let ratio = w[1] / w[0];
            assert!(
                (0.8..=1.25).contains(&ratio),
                "trial {trial}: scaled excess confidences {scaled:?}, ratio {ratio}"
            );
        }
    }
}

/// Far away, Monte Carlo prediction with the residual prior is uncertain
/// while the un-augmented BNN remains confident.
#[test]
fn mc_prediction_is_uncertain_far_away() {
    let (model, data) = common::trained_moons_model(61);
    let x = scale_point(data.input(0), 2000.0);
    let s = 1000;
    let mc_aug = mc_predict(&model, &x, s, &mut Rng::new(62)).unwrap();
    let mut plain = model.clone();
    plain.kernel = LayeredDscsParams::new(vec![0.0; model.net.n_representations()]).unwrap();
    let mc_plain = mc_predict(&plain, &x, s, &mut Rng::new(62)).unwrap();
    assert!(
        confidence(&mc_plain) >= 0.9,
        "un-augmented far-away MC confidence {}",
        confidence(&mc_plain)
    );
    assert!(
        confidence(&mc_aug) <= 0.75,
        "augmented far-away MC confidence {}",
        confidence(&mc_aug)
    );
}
