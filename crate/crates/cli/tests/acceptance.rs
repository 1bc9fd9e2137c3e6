//! Acceptance checks. Prints one PASS/FAIL/SKIP line per criterion and exits
//! with status 1 if any check fails.
//!
//! The two checks against published benchmark data run only when
//! `CLUBENCH_PUBLISHED_DATA` points at a checkout of the benchmark data
//! repository (and, for stored results, `CLUBENCH_PUBLISHED_RESULTS` at the
//! results repository).

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use clubench_core::algorithms::{agglomerative, fit_predict_many, KMeans, KMeansConfig, Linkage};
use clubench_core::dataset::save_dataset;
use clubench_core::metrics::{nca, solve_assignment, ConfusionMatrix};
use clubench_core::results::{
    load_method, load_published_results, read_partition, result_path, save_results, MethodId,
};
use clubench_core::scoring::score_one;
use clubench_core::{get_score, load_dataset, BenchmarkDataset, MetricId, PartitionSet, ReferenceLabelling};
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = fn() -> Verdict;

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn within(limit: Duration, elapsed: Duration) -> (bool, String) {
    (elapsed <= limit, format!("{:.2} s of {} s", elapsed.as_secs_f64(), limit.as_secs()))
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..k).collect();
    // Heap's algorithm
    let mut c = vec![0usize; k];
    out.push(p.clone());
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            out.push(p.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

fn nca_by_permutations(rows: &[Vec<u64>], perms: &[Vec<usize>]) -> f64 {
    let k = rows.len() as f64;
    perms
        .iter()
        .map(|sigma| {
            let acc: f64 = rows
                .iter()
                .zip(sigma)
                .map(|(r, &j)| r[j] as f64 / r.iter().sum::<u64>() as f64)
                .sum::<f64>()
                / k;
            (acc - 1.0 / k) / (1.0 - 1.0 / k)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn nca_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let perms: Vec<Vec<Vec<usize>>> = (0..=7).map(permutations).collect();
    let started = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let k = rng.random_range(2..=7);
        let rows: Vec<Vec<u64>> = (0..k)
            .map(|_| loop {
                // reference clusters are never empty
                let r: Vec<u64> = (0..k).map(|_| rng.random_range(0..=50)).collect();
                if r.iter().any(|&x| x > 0) {
                    break r;
                }
            })
            .collect();
        let got = nca(&ConfusionMatrix::from_counts(&rows).unwrap()).unwrap();
        worst = worst.max((got - nca_by_permutations(&rows, &perms[k])).abs());
    }
    let (fast, time) = within(Duration::from_secs(10), started.elapsed());
    verdict(worst <= 1e-12 && fast, format!("max |diff| {worst:.1e}, {time}"))
}

fn nca_fixed_points() -> Verdict {
    let value = |rows: &[&[u64]]| {
        let rows: Vec<Vec<u64>> = rows.iter().map(|r| r.to_vec()).collect();
        nca(&ConfusionMatrix::from_counts(&rows).unwrap()).unwrap()
    };
    let a = value(&[&[10, 0], &[0, 5]]);
    let b = value(&[&[5, 5], &[5, 5]]);
    let c = value(&[&[9, 1], &[2, 8]]);
    verdict(
        a == 1.0 && b == 0.0 && (c - 0.7).abs() <= 1e-12,
        format!("{a}, {b}, {c}"),
    )
}

fn published_dir(var: &str) -> Option<PathBuf> {
    std::env::var_os(var).map(PathBuf::from).filter(|p| p.is_dir())
}

fn genie_reproduction() -> Verdict {
    let (Some(data), Some(results)) = (
        published_dir("CLUBENCH_PUBLISHED_DATA"),
        published_dir("CLUBENCH_PUBLISHED_RESULTS"),
    ) else {
        return Verdict::Skip("CLUBENCH_PUBLISHED_DATA / CLUBENCH_PUBLISHED_RESULTS not set".into());
    };
    let ds = match load_dataset(&data, "wut", "x2") {
        Ok(ds) => ds,
        Err(e) => return Verdict::Fail(format!("wut/x2: {e}")),
    };
    let ks = ds.distinct_ks();
    let variant = MethodId::new("Genie_G0.3").unwrap();
    // the native layout first, then the published comma-separated tables
    let set = load_method(&results, &variant, "wut", "x2", &ks).ok().or_else(|| {
        load_published_results(&results, "Genie", "wut", "x2", &ks)
            .ok()
            .and_then(|mut loaded| loaded.partitions.remove(&variant))
    });
    let Some(set) = set else {
        return Verdict::Fail("no Genie_G0.3 partitions for wut/x2".into());
    };
    match get_score(ds.labellings(), &set, MetricId::Nca) {
        Ok(s) => verdict(format!("{s:.2}") == "0.87", format!("score {s:.4}")),
        Err(e) => Verdict::Fail(e.to_string()),
    }
}

fn kmeans_reproduction() -> Verdict {
    let Some(data) = published_dir("CLUBENCH_PUBLISHED_DATA") else {
        return Verdict::Skip("CLUBENCH_PUBLISHED_DATA not set".into());
    };
    let ds = match load_dataset(&data, "wut", "x2") {
        Ok(ds) => ds,
        Err(e) => return Verdict::Fail(format!("wut/x2: {e}")),
    };
    let started = Instant::now();
    let mut scores = Vec::new();
    for seed in 0..10 {
        let method = KMeans {
            config: KMeansConfig::with_seed(seed),
        };
        let set = fit_predict_many(&method, ds.data().view(), &ds.distinct_ks()).unwrap();
        scores.push(get_score(ds.labellings(), &set, MetricId::Nca).unwrap());
    }
    let hits = scores.iter().filter(|s| format!("{s:.2}") == "0.98").count();
    let close = scores.iter().all(|s| (s - 0.98).abs() <= 0.02);
    let (fast, time) = within(Duration::from_secs(30), started.elapsed());
    let listed: Vec<String> = scores.iter().map(|s| format!("{s:.3}")).collect();
    verdict(
        hits >= 8 && close && fast,
        format!("{hits}/10 at 0.98 [{}], {time}", listed.join(" ")),
    )
}

fn data_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn ui_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/ui_export")
}

/// Every bundled dataset with at least one noisy labelling.
fn noisy_fixtures() -> Vec<BenchmarkDataset> {
    let mut out = Vec::new();
    for root in [data_root(), ui_root()] {
        for battery in clubench_core::dataset::list_batteries(&root).unwrap() {
            for name in clubench_core::dataset::list_datasets(&root, &battery).unwrap() {
                let ds = load_dataset(&root, &battery, &name).unwrap();
                if ds.labellings().iter().any(ReferenceLabelling::has_noise) {
                    out.push(ds);
                }
            }
        }
    }
    out
}

fn noise_indifference() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let fixtures = noisy_fixtures();
    let mut checked = 0;
    for ds in &fixtures {
        let set = fit_predict_many(&KMeans::default(), ds.data().view(), &ds.distinct_ks()).unwrap();
        for labelling in ds.labellings().iter().filter(|l| l.has_noise()) {
            let k = labelling.n_clusters();
            let y_pred = set.get(k).unwrap();
            let noise: Vec<usize> = (0..y_pred.len()).filter(|&i| labelling.labels()[i] == 0).collect();
            let base: Vec<f64> = MetricId::ALL.iter().map(|&m| score_one(labelling, y_pred, m).unwrap()).collect();
            let mut done = 0;
            while done < 100 {
                let mut other = y_pred.to_vec();
                for &i in &noise {
                    other[i] = rng.random_range(1..=k);
                }
                if clubench_core::labels::validate_partition(&other) != Ok(k) {
                    continue;
                }
                for (m, b) in MetricId::ALL.iter().zip(&base) {
                    let s = score_one(labelling, &other, *m).unwrap();
                    if s.to_bits() != b.to_bits() {
                        return Verdict::Fail(format!("{} {m}: {b} became {s}", ds.id()));
                    }
                }
                done += 1;
                checked += 1;
            }
        }
    }
    verdict(
        !fixtures.is_empty(),
        format!("{} fixtures, {checked} perturbations x 3 metrics bitwise equal", fixtures.len()),
    )
}

fn relabelling_invariance() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let root = data_root();
    let mut checked = 0;
    for name in clubench_core::dataset::list_datasets(&root, "mini").unwrap() {
        let ds = load_dataset(&root, "mini", &name).unwrap();
        let ks = ds.distinct_ks();
        let fitted = fit_predict_many(&KMeans::default(), ds.data().view(), &ks).unwrap();
        // random predictions produce many more tied optima than fitted ones
        let random = PartitionSet::from_partitions(
            ds.n_points(),
            ks.iter().map(|&k| {
                let mut l: Vec<usize> = (0..ds.n_points()).map(|i| if i < k { i + 1 } else { rng.random_range(1..=k) }).collect();
                l.shuffle(&mut rng);
                l
            }),
        )
        .unwrap();
        for set in [fitted, random] {
            for metric in MetricId::ALL {
                let base = get_score(ds.labellings(), &set, metric).unwrap();
                for _ in 0..100 {
                    let renamed = PartitionSet::from_partitions(
                        set.n(),
                        set.iter().map(|(k, labels)| {
                            let mut perm: Vec<usize> = (1..=k).collect();
                            perm.shuffle(&mut rng);
                            labels.iter().map(|&l| perm[l - 1]).collect()
                        }),
                    )
                    .unwrap();
                    let s = get_score(ds.labellings(), &renamed, metric).unwrap();
                    if s.to_bits() != base.to_bits() {
                        return Verdict::Fail(format!("mini/{name} {metric}: {base} became {s}"));
                    }
                    checked += 1;
                }
            }
        }
    }
    verdict(true, format!("{checked} relabelled scorings bitwise equal"))
}

fn sq(data: &Array2<f64>, i: usize, j: usize) -> f64 {
    data.row(i).iter().zip(data.row(j)).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Textbook agglomeration on the full cluster distance matrix; among equal
/// distances the pair with the smallest (founder, founder) key merges
/// first, a cluster's founder being its smallest point index.
fn naive_single_linkage(data: &Array2<f64>, k: usize) -> Vec<usize> {
    let n = data.nrows();
    let mut d: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| sq(data, i, j)).collect()).collect();
    let mut alive = vec![true; n];
    let mut owner: Vec<usize> = (0..n).collect();
    for _ in 0..n - k {
        let mut best = (f64::INFINITY, 0, 0);
        for a in 0..n {
            for b in a + 1..n {
                if alive[a] && alive[b] && d[a][b] < best.0 {
                    best = (d[a][b], a, b);
                }
            }
        }
        let (_, a, b) = best;
        alive[b] = false;
        let merged: Vec<f64> = d[a].iter().zip(&d[b]).map(|(p, q)| p.min(*q)).collect();
        for (row, &v) in d.iter_mut().zip(&merged) {
            row[a] = v;
        }
        d[a] = merged;
        for o in owner.iter_mut() {
            if *o == b {
                *o = a;
            }
        }
    }
    clubench_core::labels::relabel_first_occurrence(&owner)
}

fn single_linkage_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let started = Instant::now();
    for round in 0..50 {
        let n = rng.random_range(6..=200);
        let d = rng.random_range(1..=3);
        // every other dataset lies on a coarse grid and is full of ties
        let data = if round % 2 == 0 {
            Array2::from_shape_fn((n, d), |_| rng.random_range(-5.0..5.0))
        } else {
            Array2::from_shape_fn((n, d), |_| f64::from(rng.random_range(0..8u8)))
        };
        for k in 2..=6 {
            let got = agglomerative(data.view(), Linkage::Single, k).unwrap();
            if got != naive_single_linkage(&data, k) {
                return Verdict::Fail(format!("dataset {round} (n={n}, d={d}), k={k}"));
            }
        }
    }
    let (fast, time) = within(Duration::from_secs(60), started.elapsed());
    verdict(fast, format!("50 datasets x k=2..6 identical, {time}"))
}

fn assignment_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let perms = permutations(6);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let w: Vec<Vec<f64>> = (0..6).map(|_| (0..6).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let (_, total) = solve_assignment(&w).unwrap();
        let best = perms
            .iter()
            .map(|p| (0..6).map(|j| w[p[j]][j]).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max((total - best).abs());
    }
    verdict(worst <= 1e-12, format!("max |diff| {worst:.1e}"))
}

fn clubench(args: &[&str], results: &Path) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_clubench"))
        .args(args)
        .env("CLUBENCH_DATA", data_root())
        .env("CLUBENCH_RESULTS", results)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    Ok(out.stdout)
}

fn tree_bytes(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push((path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Verdict {
    let mut passes = Vec::new();
    for workers in ["1", "8"] {
        let results = tempfile::tempdir().unwrap();
        let outcome = (|| {
            for method in ["kmeans", "average"] {
                clubench(&["run", "--method", method, "--seed", "42", "--workers", workers], results.path())?;
            }
            clubench(
                &["score", "--metric", "nca", "--metric", "ar", "--metric", "nmi", "--workers", workers],
                results.path(),
            )
        })();
        match outcome {
            Ok(csv) => passes.push((csv, tree_bytes(results.path()))),
            Err(e) => return Verdict::Fail(format!("workers {workers}: {e}")),
        }
    }
    let files = passes[0].1.len();
    verdict(
        passes[0] == passes[1] && files > 0,
        format!("{files} result files and {} CSV bytes identical", passes[0].0.len()),
    )
}

fn random_dataset(rng: &mut ChaCha8Rng) -> BenchmarkDataset {
    let n = rng.random_range(4..60);
    let d = rng.random_range(1..5);
    let data = Array2::from_shape_fn((n, d), |_| match rng.random_range(0..4) {
        0 => rng.random_range(-1e3..1e3),
        1 => f64::from_bits(rng.random::<u64>()).clamp(-f64::MAX, f64::MAX),
        2 => rng.random_range(-1e-300..1e-300),
        _ => f64::from(rng.random_range(-9i8..9)),
    });
    let data = data.mapv(|v| if v.is_nan() { 0.5 } else { v });
    let labellings = (0..rng.random_range(1..4))
        .map(|_| {
            let k = rng.random_range(2..=n.min(6));
            let mut l: Vec<usize> = (0..n).map(|i| if i < k { i + 1 } else { rng.random_range(0..=k) }).collect();
            l.shuffle(rng);
            ReferenceLabelling::new(l).unwrap()
        })
        .collect();
    BenchmarkDataset::new("rand", "set", data, labellings).unwrap()
}

fn random_partitions(rng: &mut ChaCha8Rng) -> PartitionSet {
    let n = rng.random_range(6..80);
    let mut ks: Vec<usize> = (2..=6).filter(|_| rng.random_bool(0.5)).collect();
    if ks.is_empty() {
        ks.push(2);
    }
    PartitionSet::from_partitions(
        n,
        ks.into_iter().map(|k| {
            let mut l: Vec<usize> = (0..n).map(|i| if i < k { i + 1 } else { rng.random_range(1..=k) }).collect();
            l.shuffle(rng);
            l
        }),
    )
    .unwrap()
}

fn flip_bits(rng: &mut ChaCha8Rng, path: &Path) {
    let mut bytes = fs::read(path).unwrap();
    for _ in 0..rng.random_range(1..=8) {
        let i = rng.random_range(0..bytes.len());
        bytes[i] ^= 1 << rng.random_range(0..8);
    }
    if rng.random_bool(0.2) {
        bytes.truncate(rng.random_range(0..bytes.len()));
    }
    fs::write(path, bytes).unwrap();
}

fn format_round_trips() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let tmp = tempfile::tempdir().unwrap();
    let method = MethodId::new("M").unwrap();
    for i in 0..100 {
        let ds = random_dataset(&mut rng);
        let root = tmp.path().join(format!("data{i}"));
        save_dataset(&root, &ds).unwrap();
        let back = load_dataset(&root, "rand", "set").unwrap();
        let exact = back.data().iter().zip(ds.data()).all(|(a, b)| a.to_bits() == b.to_bits())
            && back.data().dim() == ds.data().dim()
            && back.labellings() == ds.labellings();
        if !exact {
            return Verdict::Fail(format!("dataset instance {i} changed"));
        }
        let set = random_partitions(&mut rng);
        let root = tmp.path().join(format!("results{i}"));
        save_results(&root, &method, "rand", "set", &set).unwrap();
        let ks: Vec<usize> = set.ks().collect();
        if load_method(&root, &method, "rand", "set", &ks).ok() != Some(set) {
            return Verdict::Fail(format!("results instance {i} changed"));
        }
    }

    // silence the default hook so that a panic is counted, not printed
    let hook = panic::take_hook();
    panic::set_hook(Box::new(|_| {}));
    let (mut rejected, mut accepted, mut panics) = (0, 0, 0);
    for i in 0..1000 {
        let root = tmp.path().join(format!("fuzz{i}"));
        let outcome = if i % 2 == 0 {
            let ds = random_dataset(&mut rng);
            save_dataset(&root, &ds).unwrap();
            let j = rng.random_range(0..ds.labellings().len());
            let target = if rng.random_bool(0.5) { "set.data.gz".to_string() } else { format!("set.labels{j}.gz") };
            flip_bits(&mut rng, &root.join("rand").join(target));
            panic::catch_unwind(AssertUnwindSafe(|| match load_dataset(&root, "rand", "set") {
                Ok(back) => back.labellings().iter().all(|l| l.len() == back.n_points()),
                Err(_) => false,
            }))
        } else {
            let set = random_partitions(&mut rng);
            save_results(&root, &method, "rand", "set", &set).unwrap();
            let k = set.ks().next().unwrap();
            let path = result_path(&root, &method, "rand", "set", k);
            flip_bits(&mut rng, &path);
            panic::catch_unwind(AssertUnwindSafe(|| match read_partition(&path, k) {
                Ok(labels) => labels.iter().all(|&l| (1..=k).contains(&l)),
                Err(_) => false,
            }))
        };
        match outcome {
            Ok(true) => accepted += 1,
            Ok(false) => rejected += 1,
            Err(_) => panics += 1,
        }
    }
    panic::set_hook(hook);
    verdict(
        panics == 0,
        format!("100 + 100 exact round trips; 1000 mutated files: {rejected} typed errors, {accepted} still valid, {panics} panics"),
    )
}

fn main() {
    let checks: [(&str, Check); 10] = [
        ("nca matches permutation search on 1000 matrices", nca_oracle),
        ("nca fixed points", nca_fixed_points),
        ("Genie_G0.3 on wut/x2 scores 0.87", genie_reproduction),
        ("k-means on wut/x2 scores 0.98", kmeans_reproduction),
        ("noise indifference", noise_indifference),
        ("relabelling invariance", relabelling_invariance),
        ("single linkage matches naive agglomeration", single_linkage_oracle),
        ("assignment solver matches exhaustive search", assignment_oracle),
        ("run + score deterministic across worker counts", determinism),
        ("format round trips and corruption fuzzing", format_round_trips),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let (tag, detail) = match check() {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Verdict::Skip(d) => ("SKIP", d),
        };
        println!("{tag}  {name}: {detail}");
    }
    if failed > 0 {
        println!("{failed} acceptance check(s) failed");
        std::process::exit(1);
    }
}
