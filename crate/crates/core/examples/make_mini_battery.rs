//! Regenerates the small `mini` battery shipped under `data/`.
//!
//! ```text
//! cargo run -p clubench-core --example make_mini_battery -- data
//! ```

use std::f64::consts::TAU;
use std::path::PathBuf;

use clubench_core::dataset::save_dataset;
use clubench_core::{BenchmarkDataset, ReferenceLabelling};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u: f64 = 1.0 - rng.random::<f64>();
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (TAU * v).cos()
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

fn blobs(rng: &mut ChaCha8Rng, centres: &[&[f64]], sizes: &[usize], spread: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (c, (centre, &size)) in centres.iter().zip(sizes).enumerate() {
        for _ in 0..size {
            points.push(centre.iter().map(|m| round3(m + spread * gauss(rng))).collect());
            labels.push(c + 1);
        }
    }
    (points, labels)
}

fn build(name: &str, points: Vec<Vec<f64>>, labellings: Vec<Vec<usize>>) -> BenchmarkDataset {
    let d = points[0].len();
    let data = Array2::from_shape_vec((points.len(), d), points.concat()).unwrap();
    let labellings = labellings
        .into_iter()
        .map(|l| ReferenceLabelling::new(l).unwrap())
        .collect();
    BenchmarkDataset::new("mini", name, data, labellings).unwrap()
}

fn main() {
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    let mut rng = ChaCha8Rng::seed_from_u64(2022);
    let mut out = Vec::new();

    // three blobs; the second labelling merges the two closer ones
    let (p, l) = blobs(&mut rng, &[&[0.0, 0.0], &[3.0, 0.5], &[10.0, 8.0]], &[40, 35, 45], 0.8);
    let merged = l.iter().map(|&v| if v == 3 { 2 } else { 1 }).collect();
    out.push(build("blobs", p, vec![l, merged]));

    // two dense groups plus scattered background marked as noise
    let (mut p, mut l) = blobs(&mut rng, &[&[-4.0, 0.0], &[4.0, 0.0]], &[50, 50], 1.0);
    for _ in 0..20 {
        p.push(vec![round3(rng.random_range(-9.0..9.0)), round3(rng.random_range(-6.0..6.0))]);
        l.push(0);
    }
    out.push(build("noisy", p, vec![l]));

    // two concentric rings
    let mut p = Vec::new();
    let mut l = Vec::new();
    for (c, (radius, count)) in [(1.0, 60), (4.0, 90)].into_iter().enumerate() {
        for i in 0..count {
            let t = TAU * i as f64 / count as f64;
            let r = radius + 0.1 * gauss(&mut rng);
            p.push(vec![round3(r * t.cos()), round3(r * t.sin())]);
            l.push(c + 1);
        }
    }
    out.push(build("rings", p, vec![l]));

    // four groups in three dimensions; also labelled as two halves
    let (p, l) = blobs(
        &mut rng,
        &[&[0.0, 0.0, 0.0], &[6.0, 0.0, 0.0], &[0.0, 6.0, 0.0], &[6.0, 6.0, 6.0]],
        &[25, 25, 25, 25],
        1.0,
    );
    let halves = l.iter().map(|&v| if v <= 2 { 1 } else { 2 }).collect();
    out.push(build("cube", p, vec![l, halves]));

    // a one-dimensional example
    let (p, l) = blobs(&mut rng, &[&[0.0], &[5.0]], &[30, 30], 1.0);
    out.push(build("line", p, vec![l]));

    for ds in &out {
        save_dataset(&root, ds).unwrap();
        println!("{} n={} d={} k={:?}", ds.id(), ds.n_points(), ds.dim(), ds.n_clusters());
    }
}
