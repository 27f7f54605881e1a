//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fail.

use std::fs;
use std::path::Path;
use std::time::Instant;

use dnnsca::arch::zoo::Zoo;
use dnnsca::arch::{
    act_op_count, conv_op_count, fc_op_count, pool_op_count, ActivationLayer, FcLayer, LayerOp,
};
use dnnsca::dsp::{
    compute_power, detect_peaks, extract_features, featurize, DspConfig, IdleEstimate, PowerSeries,
};
use dnnsca::experiment::{run_experiment, ExperimentConfig, ExperimentResult, Task};
use dnnsca::learn::{
    evaluate, split, train, write_feature_csv, ClassifierKind, FeatureRow, LabeledDataset, Row,
    SplitRatio, TaskMode, TrainConfig,
};
use dnnsca::power::{arch_energy, DevicePowerProfile, SparsityConfig};
use dnnsca::report::write_bundle;
use dnnsca::synth::{
    synthesize_epoch, synthesize_image_inference, trace_energy, EpochPlan, NoiseModel,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

mod common;
use common::*;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(kind: &'static str) -> impl Fn(E) -> String {
    move |e| format!("{kind}: {e}")
}

fn c1_op_counts() -> Outcome {
    let cases = 1000;
    let runner = || {
        TestRunner::new(Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        })
    };
    runner()
        .run(&conv_layer(), |l| {
            prop_assert_eq!(conv_op_count(&l).unwrap(), conv_oracle(&l));
            Ok(())
        })
        .map_err(err("conv"))?;
    runner()
        .run(&pool_layer(), |l| {
            prop_assert_eq!(pool_op_count(&l).unwrap(), pool_oracle(&l));
            Ok(())
        })
        .map_err(err("pool"))?;
    runner()
        .run(&(1u64..=256, 1u64..=256), |(x, y)| {
            let l = FcLayer::new(x, y);
            prop_assert_eq!(fc_op_count(&l).unwrap(), fc_oracle(&l));
            Ok(())
        })
        .map_err(err("fc"))?;
    runner()
        .run(
            &(1u64..=8, 1u64..=32, 1u64..=32, 0u64..=4),
            |(c, l, w, a)| {
                let layer = ActivationLayer::other(c, l, w, a as f64);
                prop_assert_eq!(act_op_count(&layer).unwrap(), act_oracle(c, l, w, a));
                Ok(())
            },
        )
        .map_err(err("activation"))?;
    Ok(format!("{cases} cases per layer kind, exact"))
}

fn c2_conservation(zoo: &Zoo) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let arch = &zoo.entries()[rng.random_range(0..zoo.len())];
        let d = DevicePowerProfile::default();
        let profile = DevicePowerProfile {
            p_m: d.p_m * rng.random_range(0.5..2.0),
            p_a: d.p_a * rng.random_range(0.5..2.0),
            p_c: d.p_c * rng.random_range(0.5..2.0),
            p_ac: d.p_ac * rng.random_range(0.5..2.0),
            idle_power: rng.random_range(0.5..4.0),
            supply_voltage: rng.random_range(3.3..12.0),
            throughput: d.throughput * rng.random_range(0.5..2.0),
            ..d
        };
        let s = SparsityConfig {
            lambda1: rng.random_range(0.1..=1.0),
            lambda2: rng.random_range(0.1..=1.0),
        };
        let expected = arch_energy(arch, &profile, &s)
            .map_err(|e| e.to_string())?
            .total;
        let trace = synthesize_image_inference(arch, &profile, &s, &NoiseModel::none(0))
            .map_err(|e| e.to_string())?;
        let rel = (trace_energy(&trace, profile.idle_power) - expected).abs() / expected;
        worst = worst.max(rel);
    }
    check(
        worst <= 0.01,
        format!("50 triples, worst relative error {worst:.2e}"),
    )
}

fn c3_sparsity(zoo: &Zoo) -> Outcome {
    let p = DevicePowerProfile::default();
    let mut worst = 0.0f64;
    let grid = [0.1, 0.3, 0.5, 0.7, 0.9, 1.0];
    for arch in zoo.entries() {
        let full = arch_energy(arch, &p, &SparsityConfig::uniform(1.0)).unwrap();
        let (mut conv, mut fc, mut other) = (0.0, 0.0, 0.0);
        for (layer, e) in arch.layers.iter().zip(&full.per_layer) {
            match layer.op {
                LayerOp::Conv(_) => conv += e.energy,
                LayerOp::Fc(_) => fc += e.energy,
                _ => other += e.energy,
            }
        }
        let e = |l1: f64, l2: f64| {
            arch_energy(
                arch,
                &p,
                &SparsityConfig {
                    lambda1: l1,
                    lambda2: l2,
                },
            )
            .unwrap()
            .total
        };
        for &l1 in &grid {
            for &l2 in &grid {
                let got = e(l1, l2);
                let want = other + l1 * conv + l2 * fc;
                worst = worst.max((got - want).abs() / want);
                if l1 < 1.0 && e(l1 + 0.05, l2) <= got {
                    return Err(format!(
                        "{}: not increasing in lambda1 at {l1}",
                        arch.label()
                    ));
                }
                if l2 < 1.0 && e(l1, l2 + 0.05) <= got {
                    return Err(format!(
                        "{}: not increasing in lambda2 at {l2}",
                        arch.label()
                    ));
                }
            }
        }
    }
    check(
        worst <= 1e-12,
        format!("24 entries, worst affine residual {worst:.2e}, strictly monotone"),
    )
}

fn c4_features() -> Outcome {
    let f5 = extract_features(&PowerSeries::new(vec![1.0, 2.0, 3.0, 4.0, 5.0], 400.0)).unwrap();
    let f4 = extract_features(&PowerSeries::new(vec![4.0, 1.0, 3.0, 2.0], 400.0)).unwrap();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;
    let ok = close(f5.p_mea, 3.0)
        && close(f5.p_mid, 3.0)
        && close(f5.p_std, 2f64.sqrt())
        && close(f4.p_mea, 2.5)
        && close(f4.p_mid, 3.0)
        && close(f4.p_std, 1.25f64.sqrt());
    check(ok, format!("{:?} {:?}", f5.to_array(), f4.to_array()))
}

fn c5_peaks(zoo: &Zoo) -> Outcome {
    let p = DevicePowerProfile::default();
    let s = SparsityConfig::uniform(1.0);
    let mut min_noisy = usize::MAX;
    for name in zoo.names() {
        let arch = zoo.base(name).unwrap();
        let clean =
            synthesize_epoch(arch, &p, &s, &NoiseModel::none(0), &EpochPlan::default()).unwrap();
        let n = detect_peaks(&compute_power(&clean).unwrap(), IdleEstimate::Auto).len();
        if n != 24 {
            return Err(format!("{name}: {n} peaks without noise"));
        }
        for seed in 0..3 {
            let noise = NoiseModel {
                seed,
                ..NoiseModel::default()
            };
            let t = synthesize_epoch(arch, &p, &s, &noise, &EpochPlan::default()).unwrap();
            min_noisy =
                min_noisy.min(detect_peaks(&compute_power(&t).unwrap(), IdleEstimate::Auto).len());
        }
    }
    check(
        min_noisy >= 22,
        format!("24 at sigma 0 for every family, min {min_noisy} at default noise"),
    )
}

fn experiment(task: Task, zoo: &Zoo) -> Result<ExperimentResult, String> {
    run_experiment(
        &ExperimentConfig::new(task),
        zoo,
        &DevicePowerProfile::default(),
    )
    .map_err(|e| e.to_string())
}

fn c6_coarse(r: &ExperimentResult, secs: f64) -> Outcome {
    let acc = r.mean_accuracy();
    check(
        acc >= 0.96 && r.splits.len() == 10 && secs < 300.0,
        format!(
            "mean accuracy {acc:.4} over {} splits, {secs:.1} s",
            r.splits.len()
        ),
    )
}

fn c7_finetune(r: &ExperimentResult, coarse: &ExperimentResult) -> Outcome {
    let sup = r.mean_superclass_accuracy();
    let c = coarse.mean_accuracy();
    check(
        sup >= 0.95 && sup <= c,
        format!("mean superclass accuracy {sup:.4}, coarse {c:.4}"),
    )
}

fn c8_sparsity(r: &ExperimentResult) -> Outcome {
    let fine = r.mean_accuracy();
    let sup = r.mean_superclass_accuracy();
    check(
        (0.70..=0.90).contains(&fine) && sup >= 0.95 && sup > fine,
        format!(
            "fine {fine:.4}, superclass {sup:.4}, sigma_drift {}, sigma_current {:.2e} A",
            r.noise.sigma_drift, r.noise.sigma_current
        ),
    )
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

fn c9_determinism(zoo: &Zoo) -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |tag: &str| -> Result<Vec<(String, Vec<u8>)>, String> {
        let dir = tmp.path().join(tag);
        fs::create_dir_all(&dir).unwrap();
        let p = DevicePowerProfile::default();
        let mut rows = Vec::new();
        for (i, name) in ["Alexnet", "MobilenetV2"].iter().enumerate() {
            let arch = zoo.base(name).unwrap();
            let noise = NoiseModel {
                seed: 40 + i as u64,
                sigma_drift: 0.05,
                sigma_level: 0.01,
                ..NoiseModel::default()
            };
            let s = SparsityConfig::uniform(0.8);
            let t = synthesize_epoch(arch, &p, &s, &noise, &EpochPlan::default())
                .map_err(|e| e.to_string())?;
            t.write_csv(&dir.join(format!("{name}.csv")))
                .map_err(|e| e.to_string())?;
            for f in featurize(&t, &DspConfig::default())
                .map_err(|e| e.to_string())?
                .features
            {
                rows.push(FeatureRow {
                    features: f,
                    arch: Some(name.to_string()),
                    sparsity: Some(0.8),
                });
            }
        }
        let mut csv = Vec::new();
        write_feature_csv(&mut csv, &rows).map_err(|e| e.to_string())?;
        fs::write(dir.join("features.csv"), csv).unwrap();
        let ds = LabeledDataset::from_feature_rows(TaskMode::Coarse, &rows)
            .map_err(|e| e.to_string())?;
        let m = train(&ds, &TrainConfig::default()).map_err(|e| e.to_string())?;
        fs::write(dir.join("model.json"), m.to_json()).unwrap();
        let cfg = ExperimentConfig {
            windows_per_class: 20,
            split_repeats: 3,
            seed: 9,
            ..ExperimentConfig::new(Task::Sparsity16)
        };
        let r = run_experiment(&cfg, zoo, &p).map_err(|e| e.to_string())?;
        let bundle = dir.join("bundle");
        write_bundle(&r, &bundle).map_err(|e| e.to_string())?;
        let mut all = files(&dir);
        all.extend(
            files(&bundle)
                .into_iter()
                .map(|(n, b)| (format!("bundle/{n}"), b)),
        );
        Ok(all)
    };
    let a = run("a")?;
    let b = run("b")?;
    let names: Vec<&str> = a.iter().map(|(n, _)| n.as_str()).collect();
    check(
        a == b,
        format!(
            "{} artifacts byte-identical: {}",
            names.len(),
            names.join(" ")
        ),
    )
}

fn c10_classifiers() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let spread = 1.0;
    let noise = Normal::new(0.0, spread).unwrap();
    // 6 centroids on the axes at distance 10 * sqrt(2) from each neighbour
    let mut rows = Vec::new();
    for c in 0..6 {
        let mut centre = [0.0; 3];
        centre[c / 2] = if c % 2 == 0 { 10.0 } else { -10.0 };
        for _ in 0..100 {
            let f = centre.map(|m| m + noise.sample(&mut rng));
            rows.push(Row {
                features: dnnsca::dsp::FeatureVector::from_array(f),
                arch: format!("g{c}"),
                sparsity: 1.0,
            });
        }
    }
    let ds = LabeledDataset::new(TaskMode::Coarse, rows).unwrap();
    let (tr, te) = split(&ds, SplitRatio::default(), 1).unwrap();
    let mut detail = Vec::new();
    let mut ok = true;
    for (name, cfg) in [
        ("svm", TrainConfig::default()),
        (
            "knn k=1",
            TrainConfig {
                kind: ClassifierKind::NearestNeighbor,
                k: 1,
                ..TrainConfig::default()
            },
        ),
    ] {
        let m = train(&tr, &cfg).map_err(|e| e.to_string())?;
        let held = evaluate(&m, &te).map_err(|e| e.to_string())?.accuracy();
        let fit = evaluate(&m, &tr).map_err(|e| e.to_string())?.accuracy();
        ok &= held >= 0.99;
        if cfg.kind == ClassifierKind::NearestNeighbor {
            ok &= fit == 1.0;
        }
        detail.push(format!("{name} held-out {held:.4} train {fit:.4}"));
    }
    check(ok, detail.join(", "))
}

fn main() {
    let zoo = Zoo::embedded();
    let mut failed = 0;
    let mut report = |n: u32, what: &str, start: Instant, r: Outcome| {
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(d) => println!("criterion {n:>2} PASS  {what}: {d} [{secs:.1} s]"),
            Err(d) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {what}: {d} [{secs:.1} s]");
            }
        }
    };

    let t = Instant::now();
    report(1, "op counts match loop oracles", t, c1_op_counts());
    let t = Instant::now();
    report(2, "synthesized energy conserved", t, c2_conservation(&zoo));
    let t = Instant::now();
    report(
        3,
        "energy affine and monotone in sparsity",
        t,
        c3_sparsity(&zoo),
    );
    let t = Instant::now();
    report(4, "feature triples", t, c4_features());
    let t = Instant::now();
    report(5, "peak detection on 24-image epochs", t, c5_peaks(&zoo));

    let t = Instant::now();
    let coarse = experiment(Task::Coarse6, &zoo);
    let coarse_secs = t.elapsed().as_secs_f64();
    match &coarse {
        Ok(r) => report(6, "coarse6 accuracy", t, c6_coarse(r, coarse_secs)),
        Err(e) => report(6, "coarse6 accuracy", t, Err(e.clone())),
    }
    let t = Instant::now();
    let r = experiment(Task::Finetune24, &zoo).and_then(|f| match &coarse {
        Ok(c) => c7_finetune(&f, c),
        Err(e) => Err(format!("coarse6 unavailable: {e}")),
    });
    report(7, "finetune24 superclass accuracy", t, r);
    let t = Instant::now();
    report(
        8,
        "sparsity16 fine vs superclass",
        t,
        experiment(Task::Sparsity16, &zoo).and_then(|r| c8_sparsity(&r)),
    );
    let t = Instant::now();
    report(9, "determinism", t, c9_determinism(&zoo));
    let t = Instant::now();
    report(
        10,
        "classifiers on separated clusters",
        t,
        c10_classifiers(),
    );

    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
