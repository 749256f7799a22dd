//! Hot-path benchmarks: filter updates, augmentation throughput, forward
//! kinematics, SMO training, decoding and the similarity metric.

use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use posture_core::augment::{augment_posture, build_training_dictionary, AugmentSettings};
use posture_core::bvh::forward_kinematics;
use posture_core::classifier::{ecoc_predict, train_ecoc, train_svm_binary, SolverSettings};
use posture_core::fusion::{madgwick_update, FilterState, ImuSample};
use posture_core::metrics::lambda_similarity;
use posture_core::pose::FEATURES_PER_POSE;
use posture_core::synth::{canonical_postures, generate_motion_sequence};
use posture_core::UnitQuaternion;

fn bench_madgwick(c: &mut Criterion) {
    let truth = UnitQuaternion::from_axis_angle([1.0, 0.0, 0.0], 0.5);
    let sample = ImuSample {
        timestamp_us: 0,
        gyro: [0.01, -0.02, 0.03],
        accel: truth.conjugate().rotate([0.0, 0.0, 9.81]),
        mag: truth.conjugate().rotate([0.5, 0.0, -0.866]),
    };
    let state = FilterState::new(0.1);
    c.bench_function("madgwick_update", |b| {
        b.iter(|| madgwick_update(black_box(&state), black_box(&sample), 1.0 / 30.0))
    });
}

fn bench_augmentation(c: &mut Criterion) {
    let pose = canonical_postures(1).postures[0].pose;
    let settings = AugmentSettings::new(800.0, 100.0, 1000, 7).unwrap();
    c.bench_function("augment_posture_1000", |b| {
        b.iter_batched(
            || ChaCha8Rng::seed_from_u64(1),
            |mut rng| augment_posture(black_box(&pose), &settings, &mut rng),
            BatchSize::SmallInput,
        )
    });
}

fn bench_forward_kinematics(c: &mut Criterion) {
    let set = canonical_postures(2);
    let anim = generate_motion_sequence(&set, 10, 10);
    c.bench_function("forward_kinematics_frame", |b| {
        b.iter(|| forward_kinematics(black_box(&anim), 115).unwrap())
    });
}

fn blob_rows(n: usize, seed: u64) -> (Vec<[f64; FEATURES_PER_POSE]>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = if i % 2 == 0 { 1.0 } else { -1.0 };
        let centre = if label > 0.0 { 2.5 } else { -2.5 };
        let mut row = [0.0; FEATURES_PER_POSE];
        for v in row.iter_mut().take(4) {
            *v = centre + rng.gen_range(-1.0..1.0);
        }
        rows.push(row);
        labels.push(label);
    }
    (rows, labels)
}

fn bench_smo(c: &mut Criterion) {
    let (rows, labels) = blob_rows(400, 3);
    let solver = SolverSettings::default();
    c.bench_function("smo_train_400", |b| {
        b.iter(|| {
            train_svm_binary(
                black_box(&rows),
                black_box(&labels),
                1.0,
                0.5,
                solver.tolerance,
                solver.max_passes,
            )
            .unwrap()
        })
    });
}

fn bench_ecoc_predict(c: &mut Criterion) {
    let dict = canonical_postures(3).dictionary().unwrap();
    let settings = AugmentSettings::new(20.0, 20.0, 40, 5).unwrap();
    let dataset = build_training_dictionary(&dict, &settings);
    let model = train_ecoc(&dataset, 10.0, 0.2, &SolverSettings::default()).unwrap();
    let x = dataset.features[17];
    c.bench_function("ecoc_predict", |b| {
        b.iter(|| ecoc_predict(black_box(&model), black_box(&x)))
    });
}

fn bench_lambda(c: &mut Criterion) {
    let set = canonical_postures(4);
    let a = set.postures[0].pose.to_features();
    let b_features = set.postures[1].pose.to_features();
    c.bench_function("lambda_similarity", |b| {
        b.iter(|| lambda_similarity(black_box(&a), black_box(&b_features)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_madgwick,
    bench_augmentation,
    bench_forward_kinematics,
    bench_smo,
    bench_ecoc_predict,
    bench_lambda
);
criterion_main!(benches);
