use std::fs;
use std::path::{Path, PathBuf};

use clubench_core::dataset::{list_batteries, list_datasets, save_dataset};
use clubench_core::results::{load_results, read_partition, result_path, save_results, MethodId};
use clubench_core::{load_dataset, BenchmarkDataset, PartitionSet, ReferenceLabelling};
use ndarray::Array2;
use proptest::prelude::*;

fn fixture_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/ui_export")
}

fn coordinate() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e3f64..1e3,
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
        Just(5e-324),
        Just(f64::MAX),
    ]
}

fn labelling(n: usize) -> impl Strategy<Value = Vec<usize>> {
    (2usize..=4).prop_flat_map(move |k| {
        proptest::collection::vec(0..=k, n - k).prop_flat_map(move |tail| {
            let mut labels: Vec<usize> = (1..=k).collect();
            labels.extend(tail);
            Just(labels).prop_shuffle()
        })
    })
}

fn dataset() -> impl Strategy<Value = BenchmarkDataset> {
    (4usize..30, 1usize..4).prop_flat_map(|(n, d)| {
        (
            proptest::collection::vec(coordinate(), n * d),
            proptest::collection::vec(labelling(n), 1..4),
        )
            .prop_map(move |(values, labellings)| {
                let data = Array2::from_shape_vec((n, d), values).unwrap();
                let labellings = labellings
                    .into_iter()
                    .map(|l| ReferenceLabelling::new(l).unwrap())
                    .collect();
                BenchmarkDataset::new("battery", "set_1", data, labellings).unwrap()
            })
    })
}

fn partition_set() -> impl Strategy<Value = PartitionSet> {
    (6usize..40).prop_flat_map(|n| {
        proptest::collection::btree_set(2usize..=5, 1..4).prop_flat_map(move |ks| {
            let parts: Vec<_> = ks
                .into_iter()
                .map(|k| {
                    proptest::collection::vec(1..=k, n - k).prop_flat_map(move |tail| {
                        let mut labels: Vec<usize> = (1..=k).collect();
                        labels.extend(tail);
                        Just(labels).prop_shuffle()
                    })
                })
                .collect();
            parts.prop_map(move |parts| PartitionSet::from_partitions(n, parts).unwrap())
        })
    })
}

fn same_bits(a: &Array2<f64>, b: &Array2<f64>) -> bool {
    a.dim() == b.dim() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

fn dir_bytes(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
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

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn dataset_round_trip(ds in dataset()) {
        let root = tempfile::tempdir().unwrap();
        save_dataset(root.path(), &ds).unwrap();
        let back = load_dataset(root.path(), "battery", "set_1").unwrap();
        prop_assert!(same_bits(ds.data(), back.data()));
        prop_assert_eq!(ds.labellings(), back.labellings());
        let first = dir_bytes(root.path());
        save_dataset(root.path(), &back).unwrap();
        prop_assert_eq!(first, dir_bytes(root.path()));
    }

    #[test]
    fn results_round_trip(set in partition_set()) {
        let root = tempfile::tempdir().unwrap();
        let method = MethodId::new("Algo_x.1").unwrap();
        save_results(root.path(), &method, "battery", "set_1", &set).unwrap();
        let ks: Vec<usize> = set.ks().collect();
        let loaded = load_results(root.path(), "Algo", "battery", "set_1", &ks).unwrap();
        prop_assert!(loaded.warnings.is_empty());
        prop_assert_eq!(loaded.partitions.get(&method), Some(&set));
    }

    #[test]
    fn corrupted_dataset_files_give_errors(
        ds in dataset(),
        flips in proptest::collection::vec((any::<prop::sample::Index>(), 0u8..8), 1..6),
        truncate in proptest::option::of(any::<prop::sample::Index>()),
        which in 0usize..2,
    ) {
        let root = tempfile::tempdir().unwrap();
        save_dataset(root.path(), &ds).unwrap();
        let name = if which == 0 { "set_1.data.gz" } else { "set_1.labels0.gz" };
        let path = root.path().join("battery").join(name);
        let mut bytes = fs::read(&path).unwrap();
        for (at, bit) in flips {
            let i = at.index(bytes.len());
            bytes[i] ^= 1 << bit;
        }
        if let Some(at) = truncate {
            bytes.truncate(at.index(bytes.len()));
        }
        fs::write(&path, bytes).unwrap();
        // any outcome but a panic is acceptable; a success must be consistent
        if let Ok(back) = load_dataset(root.path(), "battery", "set_1") {
            for l in back.labellings() {
                prop_assert_eq!(l.len(), back.n_points());
            }
        }
    }

    #[test]
    fn corrupted_plain_text_gives_errors(
        ds in dataset(),
        edits in proptest::collection::vec((any::<prop::sample::Index>(), any::<u8>()), 1..6),
    ) {
        let root = tempfile::tempdir().unwrap();
        let dir = root.path().join("battery");
        fs::create_dir_all(&dir).unwrap();
        let data: String = ds
            .data()
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ") + "\n")
            .collect();
        let labels: String = ds.labellings()[0].labels().iter().map(|l| format!("{l}\n")).collect();
        for (name, text) in [("set_1.data", data), ("set_1.labels0", labels)] {
            let mut bytes = text.into_bytes();
            for &(at, b) in &edits {
                let i = at.index(bytes.len());
                bytes[i] = b;
            }
            fs::write(dir.join(name), bytes).unwrap();
        }
        let _ = load_dataset(root.path(), "battery", "set_1");
    }

    #[test]
    fn corrupted_result_files_give_errors(
        set in partition_set(),
        flips in proptest::collection::vec((any::<prop::sample::Index>(), 0u8..8), 1..6),
    ) {
        let root = tempfile::tempdir().unwrap();
        let method = MethodId::new("M").unwrap();
        save_results(root.path(), &method, "b", "d", &set).unwrap();
        let k = set.ks().next().unwrap();
        let path = result_path(root.path(), &method, "b", "d", k);
        let mut bytes = fs::read(&path).unwrap();
        for (at, bit) in flips {
            let i = at.index(bytes.len());
            bytes[i] ^= 1 << bit;
        }
        fs::write(&path, bytes).unwrap();
        if let Ok(labels) = read_partition(&path, k) {
            prop_assert!(labels.iter().all(|&l| (1..=k).contains(&l)));
        }
    }
}

const UI_BUNDLES: [&str; 10] = [
    "decimal_fractions",
    "huge_scale",
    "integer_grid",
    "layers",
    "minimal",
    "negative",
    "nine_labels",
    "three_blobs",
    "tiny_scale",
    "with_noise",
];

#[test]
fn every_ui_export_loads() {
    let root = fixture_root();
    assert_eq!(list_batteries(&root).unwrap(), ["ui"]);
    assert_eq!(list_datasets(&root, "ui").unwrap(), UI_BUNDLES);
    for name in UI_BUNDLES {
        let ds = load_dataset(&root, "ui", name).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(ds.dim(), 2, "{name}");
    }
}

#[test]
fn ui_export_values_are_exact() {
    let root = fixture_root();
    let ds = load_dataset(&root, "ui", "minimal").unwrap();
    assert_eq!(ds.data().as_slice().unwrap(), [0.0, 0.0, 1.0, 0.0, 5.0, 5.0, 6.0, 5.0]);
    assert_eq!(ds.labellings()[0].labels(), [1, 1, 2, 2]);

    // 17 significant digits recover the binary value exactly
    let ds = load_dataset(&root, "ui", "decimal_fractions").unwrap();
    for (i, row) in ds.data().rows().into_iter().enumerate() {
        assert_eq!(row[0], 0.1 * i as f64);
        assert_eq!(row[1], 0.2 * i as f64);
    }

    let ds = load_dataset(&root, "ui", "layers").unwrap();
    assert_eq!(ds.n_clusters(), [3, 2, 3]);
    assert!(ds.labellings()[2].has_noise());
    assert_eq!(ds.distinct_ks(), [2, 3]);

    let ds = load_dataset(&root, "ui", "nine_labels").unwrap();
    assert_eq!(ds.n_clusters(), [9]);
}

#[test]
fn ui_export_survives_compression() {
    let root = fixture_root();
    let out = tempfile::tempdir().unwrap();
    for name in UI_BUNDLES {
        let ds = load_dataset(&root, "ui", name).unwrap();
        save_dataset(out.path(), &ds).unwrap();
        let back = load_dataset(out.path(), "ui", name).unwrap();
        assert!(same_bits(ds.data(), back.data()), "{name}");
        assert_eq!(ds.labellings(), back.labellings(), "{name}");
    }
}
