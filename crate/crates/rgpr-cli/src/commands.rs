//! The experiment subcommands: train, sweep-alpha, eval-ood, tune,
//! predict. Every command is deterministic given the configured seed; all
//! randomness flows through named substreams of one generator.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rgpr::baseline_gp::{BnoPosterior, GpResidualModel};
use rgpr::data::{
    export_csv, gaussian_outliers, scale_point, toy_regression_1d, two_moons, uniform_outliers,
    LabeledDataset, Targets,
};
use rgpr::error::{Error, Result};
use rgpr::kernels::{DscsParams, LayeredDscsParams};
use rgpr::laplace::{fit_laplace, probit_predict};
use rgpr::metrics::{auroc, brier, entropy, mmc, EvalReport};
use rgpr::network::{
    argmax, classification_accuracy, forward, regression_rmse, softmax, train_map, ReluNet,
    TrainConfig,
};
use rgpr::numerics::{Matrix, Rng};
use rgpr::persist::{ModelArtifact, SigmaFile};
use rgpr::rgpr::{confidence, mc_predict, rgpr_predictive, RgprModel};
use rgpr::tuning::{
    entropy_objective, generate_outliers, tune_sigmas_with_outliers, OutlierSource, TuneConfig,
};

use crate::config::{DatasetKind, ExperimentConfig, SigmaSpec};

// Substream tags: one per source of randomness, so commands can be
// re-run independently without disturbing each other's draws.
const STREAM_DATA: u64 = 0;
const STREAM_TRAIN: u64 = 1;
const STREAM_SWEEP_POINTS: u64 = 2;
const STREAM_EVAL_INLIERS: u64 = 3;
const STREAM_EVAL_OUTLIERS: u64 = 4;
const STREAM_TUNE_VAL: u64 = 5;
const STREAM_TUNE_OUTLIERS: u64 = 6;
const STREAM_TUNE_HELDOUT: u64 = 7;
const STREAM_PREDICT_MC: u64 = 8;
const STREAM_SWEEP_MC_BASE: u64 = 1000;

fn generate_dataset(cfg: &ExperimentConfig, rng: &mut Rng) -> LabeledDataset {
    let mut data = match cfg.dataset {
        DatasetKind::TwoMoons => two_moons(cfg.n_points, cfg.noise_std, rng),
        DatasetKind::ToyRegression1d => toy_regression_1d(cfg.n_points, cfg.noise_std, rng),
    };
    data.standardize();
    data
}

/// Fresh draw from the same task, mapped through the training
/// standardizer so it lives in the model's input space.
fn generate_eval_set(
    cfg: &ExperimentConfig,
    artifact: &ModelArtifact,
    n: usize,
    rng: &mut Rng,
) -> LabeledDataset {
    let mut data = match cfg.dataset {
        DatasetKind::TwoMoons => two_moons(n, cfg.noise_std, rng),
        DatasetKind::ToyRegression1d => toy_regression_1d(n, cfg.noise_std, rng),
    };
    artifact.standardizer.apply_in_place(&mut data.inputs);
    data.standardizer = artifact.standardizer.clone();
    data
}

fn resolve_sigmas(cfg: &ExperimentConfig, net: &ReluNet) -> Result<LayeredDscsParams> {
    let layers = net.n_representations();
    match &cfg.sigma2 {
        SigmaSpec::Constant(v) => LayeredDscsParams::constant(layers, *v),
        SigmaSpec::PerLayer(vs) => {
            if vs.len() != layers {
                return Err(Error::Format(format!(
                    "sigma2 has {} entries but the network has {layers} representation spaces",
                    vs.len()
                )));
            }
            LayeredDscsParams::new(vs.clone())
        }
        // Tuning starts from the default all-ones kernel.
        SigmaSpec::Tune(_) => LayeredDscsParams::constant(layers, 1.0),
    }
}

fn load_run(dir: &Path) -> Result<(ExperimentConfig, ModelArtifact)> {
    let cfg = ExperimentConfig::load(&dir.join("config.json"))?;
    let artifact = ModelArtifact::load(&dir.join("model.json"))?;
    Ok((cfg, artifact))
}

fn rgpr_model(artifact: &ModelArtifact, sigmas: Option<&LayeredDscsParams>) -> Result<RgprModel> {
    RgprModel::new(
        artifact.net.clone(),
        artifact.posterior.clone(),
        sigmas.cloned().unwrap_or_else(|| artifact.sigma2.clone()),
    )
}

fn zero_kernel(net: &ReluNet) -> LayeredDscsParams {
    LayeredDscsParams::new(vec![0.0; net.n_representations()]).expect("zero kernel is valid")
}

fn bno_model(
    cfg: &ExperimentConfig,
    artifact: &ModelArtifact,
    train: &LabeledDataset,
) -> Result<GpResidualModel> {
    let Targets::Values(targets) = &train.targets else {
        return Err(Error::Format(
            "the residual-GP baseline runs on regression datasets only".into(),
        ));
    };
    let n_features = artifact.net.layer_dims[artifact.net.layer_dims.len() - 2] + 1;
    let mut prior = Matrix::identity(n_features);
    for i in 0..n_features {
        prior[(i, i)] = 1.0 / cfg.laplace_precision;
    }
    Ok(GpResidualModel {
        feature_fn: GpResidualModel::network_features(artifact.net.clone()),
        prior_cov_b: prior,
        kernel: DscsParams {
            sigma2: cfg.bno_kernel_sigma2,
        },
        noise_var: cfg.bno_noise_var,
        train_inputs: train.inputs.clone(),
        train_targets: targets.clone(),
    })
}

/// Trains the MAP network, fits its Laplace posterior, optionally tunes
/// the kernel variances, and writes `model.json`, `config.json`, and the
/// training set CSV into the output directory.
pub fn cmd_train(cfg: &ExperimentConfig) -> Result<()> {
    let out_dir = PathBuf::from(&cfg.out_dir);
    std::fs::create_dir_all(&out_dir)?;
    let rng = Rng::new(cfg.seed);
    let data = generate_dataset(cfg, &mut rng.substream(STREAM_DATA));
    let n_train = (data.len() * 4) / 5;
    let (train, val) = data.split_at(n_train);

    let train_cfg = TrainConfig {
        prior_precision: cfg.prior_precision,
        learning_rate: cfg.learning_rate,
        epochs: cfg.epochs,
        batch_size: cfg.batch_size,
        seed: cfg.seed,
    };
    let net = train_map(
        &train,
        &train_cfg,
        &cfg.arch,
        &mut rng.substream(STREAM_TRAIN),
    )?;
    match cfg.dataset {
        DatasetKind::TwoMoons => {
            let train_acc = classification_accuracy(&net, &train)?;
            let val_acc = classification_accuracy(&net, &val)?;
            println!("train accuracy: {train_acc}");
            println!("val accuracy: {val_acc}");
        }
        DatasetKind::ToyRegression1d => {
            println!("train rmse: {}", regression_rmse(&net, &train)?);
            println!("val rmse: {}", regression_rmse(&net, &val)?);
        }
    }

    let posterior = fit_laplace(&net, &train, cfg.laplace_precision, cfg.subset.into())?;
    let mut sigmas = resolve_sigmas(cfg, &net)?;
    if cfg.sigma2.wants_tuning()? {
        if !cfg.is_classification() {
            return Err(Error::Format(
                "sigma2 tuning requires a classification dataset".into(),
            ));
        }
        let model = RgprModel::new(net.clone(), posterior.clone(), sigmas.clone())?;
        let tune_cfg = tune_config(cfg);
        let outliers = generate_outliers(
            &tune_cfg.outlier_source,
            &val.inputs,
            tune_cfg.batch,
            &mut rng.substream(STREAM_TUNE_OUTLIERS),
        );
        sigmas = tune_sigmas_with_outliers(&model, &val, &outliers, &tune_cfg)?;
        println!("tuned sigma2: {:?}", sigmas.sigma2_per_layer);
    }

    let artifact = ModelArtifact::new(net, posterior, sigmas, data.standardizer.clone());
    artifact.save(&out_dir.join("model.json"))?;
    cfg.save(&out_dir.join("config.json"))?;
    export_csv(&train, &out_dir.join("train.csv"))?;
    println!("artifacts written to {}", out_dir.display());
    Ok(())
}

fn format_cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

struct SweepRow {
    alpha: f64,
    method: &'static str,
    mean_conf_probit: Option<f64>,
    mean_conf_mc: Option<f64>,
    mean_var: Option<f64>,
}

/// Confidence and variance of every method across the alpha grid, written
/// as one CSV. Variance slopes between consecutive grid points are
/// appended per row as a diagnostic.
pub fn cmd_sweep_alpha(
    run_dir: &Path,
    out: Option<&Path>,
    seed_override: Option<u64>,
    samples_override: Option<usize>,
    grid_override: Option<Vec<f64>>,
) -> Result<()> {
    let (mut cfg, artifact) = load_run(run_dir)?;
    if let Some(seed) = seed_override {
        cfg.seed = seed;
    }
    if let Some(s) = samples_override {
        cfg.mc_samples = s;
    }
    if let Some(grid) = grid_override {
        cfg.alpha_grid = grid;
    }
    cfg.validate()?;
    let rng = Rng::new(cfg.seed);
    let n_eval = cfg.n_eval.min(200);
    let eval = generate_eval_set(
        &cfg,
        &artifact,
        n_eval,
        &mut rng.substream(STREAM_SWEEP_POINTS),
    );

    let model = rgpr_model(&artifact, None)?;
    let mut plain = model.clone();
    plain.kernel = zero_kernel(&artifact.net);
    let classification = cfg.is_classification();

    // The regression sweep also carries the residual-GP baseline.
    let train_full = generate_dataset(&cfg, &mut rng.substream(STREAM_DATA));
    let (train, _) = train_full.split_at((train_full.len() * 4) / 5);
    let bno_storage;
    let bno: Option<BnoPosterior<'_>> = if classification {
        None
    } else {
        bno_storage = bno_model(&cfg, &artifact, &train)?;
        Some(bno_storage.fit()?)
    };

    let mut rows: Vec<SweepRow> = Vec::new();
    for (ai, alpha) in cfg.alpha_grid.iter().enumerate() {
        let scaled: Vec<Vec<f64>> = (0..eval.len())
            .map(|i| scale_point(eval.input(i), *alpha))
            .collect();
        // MAP point estimate.
        let mut map_conf = Vec::new();
        for x in &scaled {
            let logits = forward(&artifact.net, x)?.logits;
            if classification {
                map_conf.push(confidence(&softmax(&logits)));
            }
        }
        rows.push(SweepRow {
            alpha: *alpha,
            method: "map",
            mean_conf_probit: classification.then(|| mean(&map_conf)),
            mean_conf_mc: None,
            mean_var: Some(0.0),
        });
        // Laplace with and without the residual prior.
        for (mi, (name, m)) in [("lll", &plain), ("lll-rgpr", &model)].iter().enumerate() {
            let mut conf_probit = Vec::new();
            let mut conf_mc = Vec::new();
            let mut vars = Vec::new();
            let mut mc_rng = rng.substream(STREAM_SWEEP_MC_BASE + (ai as u64) * 10 + mi as u64);
            for x in &scaled {
                let pred = rgpr_predictive(m, x)?;
                let c = pred.mean.len();
                vars.push((0..c).map(|k| pred.variance(k)).sum::<f64>() / c as f64);
                if classification {
                    conf_probit.push(confidence(&probit_predict(&pred)));
                    conf_mc.push(confidence(&mc_predict(m, x, cfg.mc_samples, &mut mc_rng)?));
                }
            }
            rows.push(SweepRow {
                alpha: *alpha,
                method: name,
                mean_conf_probit: classification.then(|| mean(&conf_probit)),
                mean_conf_mc: classification.then(|| mean(&conf_mc)),
                mean_var: Some(mean(&vars)),
            });
        }
        if let Some(fit) = &bno {
            let mut vars = Vec::new();
            for x in &scaled {
                vars.push(fit.predict(x)?.1);
            }
            rows.push(SweepRow {
                alpha: *alpha,
                method: "bno",
                mean_conf_probit: None,
                mean_conf_mc: None,
                mean_var: Some(mean(&vars)),
            });
        }
    }

    let mut csv = String::from("alpha,method,mean_conf_probit,mean_conf_mc,mean_var,var_slope\n");
    for (i, row) in rows.iter().enumerate() {
        // Slope of log variance against log alpha relative to the same
        // method's previous grid point.
        let slope = rows[..i]
            .iter()
            .rev()
            .find(|prev| prev.method == row.method)
            .and_then(|prev| match (prev.mean_var, row.mean_var) {
                (Some(a), Some(b)) if a > 0.0 && b > 0.0 && row.alpha != prev.alpha => {
                    Some((b / a).ln() / (row.alpha / prev.alpha).ln())
                }
                _ => None,
            });
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            row.alpha,
            row.method,
            format_cell(row.mean_conf_probit),
            format_cell(row.mean_conf_mc),
            format_cell(row.mean_var),
            format_cell(slope)
        )
        .expect("string write");
    }
    let out_path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| run_dir.join("sweep_alpha.csv"));
    std::fs::write(&out_path, csv)?;
    println!("sweep written to {}", out_path.display());
    Ok(())
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len().max(1) as f64
}

/// Inlier/outlier evaluation. Classification: MMC-in, MMC-out and AUR per
/// method against uniform noise scaled far away. Regression: mean error
/// bars on inliers and far Gaussian outliers, their ratio, and test RMSE.
pub fn cmd_eval_ood(
    run_dir: &Path,
    out_base: Option<&Path>,
    seed_override: Option<u64>,
    sigma_file: Option<&Path>,
) -> Result<()> {
    let (mut cfg, artifact) = load_run(run_dir)?;
    if let Some(seed) = seed_override {
        cfg.seed = seed;
    }
    let sigmas = sigma_file.map(SigmaFile::load).transpose()?;
    let rng = Rng::new(cfg.seed);
    let model = rgpr_model(&artifact, sigmas.as_ref())?;
    let mut plain = model.clone();
    plain.kernel = zero_kernel(&artifact.net);

    let base = out_base
        .map(Path::to_path_buf)
        .unwrap_or_else(|| run_dir.join("eval_ood"));
    let csv_path = base.with_extension("csv");
    let json_path = base.with_extension("json");

    if cfg.is_classification() {
        let inliers = generate_eval_set(
            &cfg,
            &artifact,
            cfg.n_eval,
            &mut rng.substream(STREAM_EVAL_INLIERS),
        );
        let Targets::Classes(labels) = &inliers.targets else {
            unreachable!("classification dataset")
        };
        let outliers = uniform_outliers(
            cfg.n_outliers,
            artifact.net.input_dim(),
            cfg.outlier_alpha,
            &artifact.standardizer,
            &mut rng.substream(STREAM_EVAL_OUTLIERS),
        );
        let mut csv = format!("method,{}\n", EvalReport::CSV_HEADER);
        let mut json = serde_json::Map::new();
        for (name, kind) in [
            ("map", MethodKind::Map),
            ("lll", MethodKind::Model(&plain)),
            ("lll-rgpr", MethodKind::Model(&model)),
        ] {
            let probs_in = predict_all(&artifact.net, &kind, &inliers.inputs)?;
            let probs_out = predict_all(&artifact.net, &kind, &outliers)?;
            let conf_in: Vec<f64> = probs_in.iter().map(|p| confidence(p)).collect();
            let conf_out: Vec<f64> = probs_out.iter().map(|p| confidence(p)).collect();
            let hits = probs_in
                .iter()
                .zip(labels)
                .filter(|(p, y)| argmax(p) == **y)
                .count();
            let report = EvalReport {
                mmc_in: mmc(&conf_in)?,
                mmc_out: mmc(&conf_out)?,
                aur: auroc(&conf_in, &conf_out)?,
                accuracy: hits as f64 / probs_in.len() as f64,
                brier: brier(&probs_in, labels)?,
                mean_entropy: mean(&probs_in.iter().map(|p| entropy(p)).collect::<Vec<_>>()),
            };
            writeln!(csv, "{},{}", name, report.to_csv_row()).expect("string write");
            json.insert(name.to_string(), serde_json::to_value(&report)?);
        }
        std::fs::write(&csv_path, csv)?;
        std::fs::write(&json_path, serde_json::to_string_pretty(&json)?)?;
    } else {
        let test = generate_eval_set(
            &cfg,
            &artifact,
            cfg.n_eval,
            &mut rng.substream(STREAM_EVAL_INLIERS),
        );
        let Targets::Values(targets) = &test.targets else {
            unreachable!("regression dataset")
        };
        let outliers = gaussian_outliers(
            cfg.n_outliers,
            1,
            cfg.outlier_alpha,
            &mut rng.substream(STREAM_EVAL_OUTLIERS),
        );
        let train_full = generate_dataset(&cfg, &mut rng.substream(STREAM_DATA));
        let (train, _) = train_full.split_at((train_full.len() * 4) / 5);
        let bno_storage = bno_model(&cfg, &artifact, &train)?;
        let bno = bno_storage.fit()?;

        let mut csv = String::from("method,errbar_in,errbar_out,ratio,rmse\n");
        let mut json = serde_json::Map::new();
        for name in ["lll", "lll-rgpr", "bno"] {
            let eval_point = |x: &[f64]| -> Result<(f64, f64)> {
                match name {
                    "bno" => bno.predict(x),
                    "lll" => {
                        let pred = rgpr_predictive(&plain, x)?;
                        Ok((pred.mean[0], pred.variance(0)))
                    }
                    _ => {
                        let pred = rgpr_predictive(&model, x)?;
                        Ok((pred.mean[0], pred.variance(0)))
                    }
                }
            };
            let mut err_in = Vec::new();
            let mut se = 0.0;
            for i in 0..test.len() {
                let (m, v) = eval_point(test.input(i))?;
                err_in.push(v.sqrt());
                se += (m - targets[i]).powi(2);
            }
            let rmse = (se / test.len() as f64).sqrt();
            let mut err_out = Vec::new();
            for i in 0..outliers.rows() {
                err_out.push(eval_point(outliers.row(i))?.1.sqrt());
            }
            let (ein, eout) = (mean(&err_in), mean(&err_out));
            writeln!(csv, "{},{},{},{},{}", name, ein, eout, eout / ein, rmse)
                .expect("string write");
            json.insert(
                name.to_string(),
                serde_json::json!({
                    "errbar_in": ein,
                    "errbar_out": eout,
                    "ratio": eout / ein,
                    "rmse": rmse,
                }),
            );
        }
        std::fs::write(&csv_path, csv)?;
        std::fs::write(&json_path, serde_json::to_string_pretty(&json)?)?;
    }
    println!(
        "evaluation written to {} and {}",
        csv_path.display(),
        json_path.display()
    );
    Ok(())
}

enum MethodKind<'a> {
    Map,
    Model(&'a RgprModel),
}

fn predict_all(net: &ReluNet, kind: &MethodKind<'_>, points: &Matrix) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(points.rows());
    for i in 0..points.rows() {
        let x = points.row(i);
        let probs = match kind {
            MethodKind::Map => softmax(&forward(net, x)?.logits),
            MethodKind::Model(m) => probit_predict(&rgpr_predictive(m, x)?),
        };
        out.push(probs);
    }
    Ok(out)
}

fn tune_config(cfg: &ExperimentConfig) -> TuneConfig {
    TuneConfig {
        learning_rate: cfg.tune_learning_rate,
        epochs: cfg.tune_epochs,
        outlier_source: OutlierSource::UniformBox {
            scales: cfg.tune_scales.clone(),
        },
        batch: cfg.tune_batch,
        seed: cfg.seed,
    }
}

/// Tunes the kernel variances on a fresh validation draw plus generated
/// noise outliers, writes them next to the model, and reports the
/// objective and held-out AUR before and after.
pub fn cmd_tune(run_dir: &Path, out: Option<&Path>, seed_override: Option<u64>) -> Result<()> {
    let (mut cfg, artifact) = load_run(run_dir)?;
    if let Some(seed) = seed_override {
        cfg.seed = seed;
    }
    if !cfg.is_classification() {
        return Err(Error::Format(
            "sigma2 tuning requires a classification dataset".into(),
        ));
    }
    let rng = Rng::new(cfg.seed);
    let model = rgpr_model(&artifact, None)?;
    let val = generate_eval_set(
        &cfg,
        &artifact,
        cfg.n_eval.min(500),
        &mut rng.substream(STREAM_TUNE_VAL),
    );
    let tune_cfg = tune_config(&cfg);
    let outliers = generate_outliers(
        &tune_cfg.outlier_source,
        &val.inputs,
        tune_cfg.batch,
        &mut rng.substream(STREAM_TUNE_OUTLIERS),
    );
    let heldout = generate_outliers(
        &tune_cfg.outlier_source,
        &val.inputs,
        tune_cfg.batch,
        &mut rng.substream(STREAM_TUNE_HELDOUT),
    );

    let conf_on = |m: &RgprModel, points: &Matrix| -> Result<Vec<f64>> {
        (0..points.rows())
            .map(|i| {
                Ok(confidence(&probit_predict(&rgpr_predictive(
                    m,
                    points.row(i),
                )?)))
            })
            .collect()
    };
    let l_before = entropy_objective(&model, &val.inputs, &outliers)?;
    let aur_before = auroc(&conf_on(&model, &val.inputs)?, &conf_on(&model, &heldout)?)?;

    let sigmas = tune_sigmas_with_outliers(&model, &val, &outliers, &tune_cfg)?;
    let mut tuned = model.clone();
    tuned.kernel = sigmas.clone();
    let l_after = entropy_objective(&tuned, &val.inputs, &outliers)?;
    let aur_after = auroc(&conf_on(&tuned, &val.inputs)?, &conf_on(&tuned, &heldout)?)?;

    let out_path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| run_dir.join("sigmas.json"));
    SigmaFile::new(&sigmas).save(&out_path)?;
    println!("objective before: {l_before}");
    println!("objective after: {l_after}");
    println!("held-out aur before: {aur_before}");
    println!("held-out aur after: {aur_after}");
    println!("tuned sigma2: {:?}", sigmas.sigma2_per_layer);
    println!("sigmas written to {}", out_path.display());
    Ok(())
}

/// Per-method prediction at one raw input point, printed as JSON.
pub fn cmd_predict(
    run_dir: &Path,
    input: &str,
    samples_override: Option<usize>,
    seed_override: Option<u64>,
) -> Result<()> {
    let (mut cfg, artifact) = load_run(run_dir)?;
    if let Some(seed) = seed_override {
        cfg.seed = seed;
    }
    if let Some(s) = samples_override {
        cfg.mc_samples = s;
    }
    let raw: Vec<f64> = input
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("bad input coordinate {t:?}: {e}")))
        })
        .collect::<Result<_>>()?;
    if raw.len() != artifact.net.input_dim() {
        return Err(Error::Format(format!(
            "input has {} coordinates, the model expects {}",
            raw.len(),
            artifact.net.input_dim()
        )));
    }
    let x = artifact.standardizer.apply_point(&raw);
    let model = rgpr_model(&artifact, None)?;
    let mut plain = model.clone();
    plain.kernel = zero_kernel(&artifact.net);

    let mut json = serde_json::Map::new();
    json.insert("input".into(), serde_json::to_value(&raw)?);
    json.insert("standardized".into(), serde_json::to_value(&x)?);
    if cfg.is_classification() {
        let map_probs = softmax(&forward(&artifact.net, &x)?.logits);
        let lll = probit_predict(&rgpr_predictive(&plain, &x)?);
        let aug = probit_predict(&rgpr_predictive(&model, &x)?);
        let mc = mc_predict(
            &model,
            &x,
            cfg.mc_samples,
            &mut Rng::new(cfg.seed).substream(STREAM_PREDICT_MC),
        )?;
        json.insert(
            "map".into(),
            serde_json::json!({ "probs": map_probs.clone(), "confidence": confidence(&map_probs) }),
        );
        json.insert(
            "lll".into(),
            serde_json::json!({ "probs": lll.clone(), "confidence": confidence(&lll) }),
        );
        json.insert(
            "lll_rgpr".into(),
            serde_json::json!({ "probs": aug.clone(), "confidence": confidence(&aug) }),
        );
        json.insert(
            "lll_rgpr_mc".into(),
            serde_json::json!({ "probs": mc.clone(), "confidence": confidence(&mc) }),
        );
    } else {
        let lll = rgpr_predictive(&plain, &x)?;
        let aug = rgpr_predictive(&model, &x)?;
        json.insert(
            "map".into(),
            serde_json::json!({ "mean": forward(&artifact.net, &x)?.logits[0] }),
        );
        json.insert(
            "lll".into(),
            serde_json::json!({ "mean": lll.mean[0], "std": lll.variance(0).sqrt() }),
        );
        json.insert(
            "lll_rgpr".into(),
            serde_json::json!({ "mean": aug.mean[0], "std": aug.variance(0).sqrt() }),
        );
    }
    println!("{}", serde_json::to_string_pretty(&json)?);
    Ok(())
}
