//! Experiments against data drawn from known generative models.

use bayeswords_core::dbn::{
    classify, total_log_likelihood, train_class_model, ClassModelBank, CoupledHmm, TrainConfig,
};
use bayeswords_core::staticbn::{
    build_nb, build_tan, conditional_mutual_information, decide, learn_fan_structure,
    DiscreteDataset, DiscreteSample, FanConfig, TanRoot,
};
use bayeswords_core::synth::coupled_model_family;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_distribution(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

fn draw(rng: &mut ChaCha8Rng, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Samples `n` rows from a naive Bayes model with tables `cpts[c][i]`.
fn sample_nb(
    rng: &mut ChaCha8Rng,
    prior: &[f64],
    cpts: &[Vec<Vec<f64>>],
    n: usize,
) -> Vec<DiscreteSample> {
    (0..n)
        .map(|_| {
            let class = draw(rng, prior);
            let attributes = cpts[class].iter().map(|row| draw(rng, row)).collect();
            DiscreteSample { attributes, class }
        })
        .collect()
}

#[test]
fn naive_bayes_recovers_its_generator() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (classes, m, card) = (2, 12, 22);
    let prior = vec![0.5, 0.5];
    let cpts: Vec<Vec<Vec<f64>>> = (0..classes)
        .map(|_| {
            (0..m)
                .map(|_| random_distribution(&mut rng, card))
                .collect()
        })
        .collect();
    let samples = sample_nb(&mut rng, &prior, &cpts, 5000);
    let data = DiscreteDataset::new(samples, vec![card; m], classes).unwrap();
    let nb = build_nb(&data).unwrap();
    let mut worst: f64 = 0.0;
    for c in 0..classes {
        for i in 0..m {
            for (est, truth) in nb.cpts[i].row(c, 0).iter().zip(&cpts[c][i]) {
                worst = worst.max((est - truth).abs());
            }
        }
    }
    assert!(worst <= 0.05, "largest CPT error {worst}");
}

#[test]
fn sampled_cmi_of_independent_pair_is_small() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cpts: Vec<Vec<Vec<f64>>> = (0..2)
        .map(|_| (0..2).map(|_| random_distribution(&mut rng, 3)).collect())
        .collect();
    let samples = sample_nb(&mut rng, &[0.4, 0.6], &cpts, 5000);
    let data = DiscreteDataset::new(samples, vec![3, 3], 2).unwrap();
    assert!(conditional_mutual_information(&data, 0, 1) < 0.02);
}

#[test]
fn independent_attributes_give_naive_structure() {
    for (card, seed) in [(4, 1u64), (22, 2)] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cpts: Vec<Vec<Vec<f64>>> = (0..2)
            .map(|_| {
                (0..12)
                    .map(|_| random_distribution(&mut rng, card))
                    .collect()
            })
            .collect();
        let samples = sample_nb(&mut rng, &[0.5, 0.5], &cpts, 5000);
        let data = DiscreteDataset::new(samples, vec![card; 12], 2).unwrap();
        let fan = learn_fan_structure(&data, &FanConfig::default()).unwrap();
        assert!(
            fan.structure.edges().is_empty(),
            "cardinality {card}: {:?}",
            fan.structure.edges()
        );
    }
}

#[test]
fn copied_attribute_joins_the_tree() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let samples = (0..400)
        .map(|_| {
            let class = rng.random_range(0..2);
            let a = rng.random_range(0..3);
            DiscreteSample {
                attributes: vec![a, a, rng.random_range(0..3)],
                class,
            }
        })
        .collect();
    let data = DiscreteDataset::new(samples, vec![3; 3], 2).unwrap();
    let tan = build_tan(&data, TanRoot::Attribute(2)).unwrap();
    assert!(tan.structure.undirected_edges().contains(&(0, 1)));
}

#[test]
fn duplicated_training_set_keeps_decisions() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let cpts: Vec<Vec<Vec<f64>>> = (0..3)
        .map(|_| (0..5).map(|_| random_distribution(&mut rng, 4)).collect())
        .collect();
    let samples = sample_nb(&mut rng, &[0.3, 0.3, 0.4], &cpts, 600);
    let doubled: Vec<_> = samples.iter().chain(&samples).cloned().collect();
    let once = DiscreteDataset::new(samples, vec![4; 5], 3).unwrap();
    let twice = DiscreteDataset::new(doubled, vec![4; 5], 3).unwrap();
    let probes = sample_nb(&mut rng, &[0.3, 0.3, 0.4], &cpts, 200);
    for (a, b) in [
        (build_nb(&once).unwrap(), build_nb(&twice).unwrap()),
        (
            build_tan(&once, TanRoot::Attribute(0)).unwrap(),
            build_tan(&twice, TanRoot::Attribute(0)).unwrap(),
        ),
    ] {
        let mut flips = 0;
        for p in &probes {
            let pa = a.block_posterior(&p.attributes).unwrap();
            let pb = b.block_posterior(&p.attributes).unwrap();
            if decide(&pa.0) != decide(&pb.0) {
                // add-one smoothing shrinks when counts double, so only
                // near-ties may flip
                let mut sorted = pa.0.clone();
                sorted.sort_by(|x, y| y.total_cmp(x));
                assert!(
                    sorted[0] - sorted[1] < 0.05,
                    "decisive posterior flipped: {:?}",
                    pa.0
                );
                flips += 1;
            }
        }
        assert!(flips <= probes.len() / 50, "{flips} flips");
    }
}

#[test]
fn trained_coupled_model_approaches_generator_likelihood() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let truth = CoupledHmm::random([3, 3], [4, 4], &mut rng).unwrap();
    let train: Vec<_> = (0..200).map(|_| truth.sample(20, &mut rng).0).collect();
    let held_out: Vec<_> = (0..200).map(|_| truth.sample(20, &mut rng).0).collect();
    let trained = train_class_model(&train, [3, 3], [4, 4], &TrainConfig::default()).unwrap();
    let generator = total_log_likelihood(&truth, &held_out).unwrap() / 200.0;
    let model = total_log_likelihood(&trained.model, &held_out).unwrap() / 200.0;
    assert!(
        ((model - generator) / generator).abs() <= 0.05,
        "trained {model} vs generator {generator}"
    );
}

#[test]
fn separated_class_models_classify_their_own_samples() {
    let family = coupled_model_family(4, 3, 6, 0.9, 0.9, 12).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    // distinct symbol alphabets per class separate the models
    let family: Vec<CoupledHmm> = family
        .into_iter()
        .enumerate()
        .map(|(c, mut m)| {
            for l in 0..2 {
                for j in 0..3 {
                    m.emit[l][j * 6..(j + 1) * 6].rotate_right((c * 3 + j) % 6);
                }
            }
            m
        })
        .collect();
    let models = family
        .iter()
        .map(|truth| {
            let data: Vec<_> = (0..60).map(|_| truth.sample(15, &mut rng).0).collect();
            let cfg = TrainConfig {
                max_iters: 40,
                ..TrainConfig::default()
            };
            train_class_model(&data, [3, 3], [6, 6], &cfg)
                .unwrap()
                .model
        })
        .collect();
    let bank = ClassModelBank::new(models).unwrap();
    let mut correct = 0;
    let total = 4 * 50;
    for (c, truth) in family.iter().enumerate() {
        for _ in 0..50 {
            if classify(&bank, &truth.sample(15, &mut rng).0).unwrap().0 == c {
                correct += 1;
            }
        }
    }
    assert!(correct as f64 >= 0.95 * total as f64, "{correct}/{total}");
}
