//! Trains both classifier kinds on three synthetic clusters and prints the
//! confusion matrix of each.

use dnnsca::dsp::FeatureVector;
use dnnsca::learn::{
    evaluate, split, train, ClassifierKind, LabeledDataset, Row, SplitRatio, TaskMode, TrainConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let jitter = Normal::new(0.0, 0.1)?;
    let centers = [
        ("a", [0.0, 0.0, 0.0]),
        ("b", [2.0, 0.5, 1.0]),
        ("c", [0.0, 2.0, 2.0]),
    ];
    let mut rows = Vec::new();
    for (name, c) in centers {
        for _ in 0..50 {
            let f = c.map(|x| x + jitter.sample(&mut rng));
            rows.push(Row {
                features: FeatureVector::from_array(f),
                arch: name.into(),
                sparsity: 1.0,
            });
        }
    }
    let data = LabeledDataset::new(TaskMode::Coarse, rows)?;
    let (tr, te) = split(&data, SplitRatio::default(), 11)?;

    for kind in [
        ClassifierKind::MaxMarginLinear,
        ClassifierKind::NearestNeighbor,
    ] {
        let model = train(
            &tr,
            &TrainConfig {
                kind,
                k: 3,
                ..TrainConfig::default()
            },
        )?;
        let cm = evaluate(&model, &te)?;
        println!("{kind:?}: accuracy {:.3}", cm.accuracy());
        cm.write_csv(std::io::stdout().lock())?;
    }
    Ok(())
}
