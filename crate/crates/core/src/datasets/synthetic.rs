use super::{seeded_split, Dataset};
use crate::numerics::{streams, Matrix, RngStream};

pub const SYNTHETIC_BITS: usize = 12;
pub const SYNTHETIC_SAMPLES: usize = 1 << SYNTHETIC_BITS;

/// All 4096 binary 12-vectors, labelled by thresholding a random linear score
/// at its median, split 80/20.
///
/// Row `i` holds the bits of `i`, most significant first; its sample id is `i`.
pub fn gen_synthetic(label_seed: u64, split_seed: u64) -> Dataset {
    let mut rng = RngStream::with_stream(label_seed, streams::DATA_LABELS);
    let w: Vec<f64> = (0..SYNTHETIC_BITS)
        .map(|_| rng.uniform(-1.0, 1.0))
        .collect();

    let mut data = Vec::with_capacity(SYNTHETIC_SAMPLES * SYNTHETIC_BITS);
    let mut scores = Vec::with_capacity(SYNTHETIC_SAMPLES);
    for i in 0..SYNTHETIC_SAMPLES {
        let mut s = 0.0;
        for (b, wb) in w.iter().enumerate() {
            let bit = ((i >> (SYNTHETIC_BITS - 1 - b)) & 1) as f64;
            data.push(bit);
            s += wb * bit;
        }
        scores.push(s);
    }
    let mut sorted = scores.clone();
    sorted.sort_by(f64::total_cmp);
    let mid = SYNTHETIC_SAMPLES / 2;
    let median = 0.5 * (sorted[mid - 1] + sorted[mid]);
    let labels = scores.iter().map(|&s| usize::from(s > median)).collect();

    let train = SYNTHETIC_SAMPLES * 4 / 5;
    let (train, validation) = seeded_split(SYNTHETIC_SAMPLES, train, split_seed);
    Dataset {
        name: "synthetic".into(),
        features: Matrix::new(SYNTHETIC_SAMPLES, SYNTHETIC_BITS, data).expect("consistent shape"),
        labels,
        sample_ids: (0..SYNTHETIC_SAMPLES).collect(),
        train,
        validation,
        num_classes: 2,
    }
}
