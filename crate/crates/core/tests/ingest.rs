use std::collections::BTreeSet;
use std::fs;

use nalgebra::DMatrix;
use proptest::prelude::*;
use simvc_core::ingest::{
    generate_mask, load_dataset, read_mask, synth_dataset, write_labels, write_mask, write_matrix,
    DatasetManifest, SynthSpec, ViewEntry,
};
use simvc_core::{accuracy, kmeans, Error, PresenceMask};

fn bits(mask: &PresenceMask) -> Vec<bool> {
    (0..mask.n_views())
        .flat_map(|v| mask.row(v).to_vec())
        .collect()
}

#[test]
fn all_two_by_two_masks() {
    let mut valid = 0;
    for code in 0u8..16 {
        let rows = vec![
            vec![code & 1 != 0, code & 2 != 0],
            vec![code & 4 != 0, code & 8 != 0],
        ];
        let covered = (0..2).all(|j| rows[0][j] || rows[1][j]) && rows.iter().all(|r| r[0] || r[1]);
        assert_eq!(PresenceMask::new(rows).is_ok(), covered, "mask {code:04b}");
        valid += covered as usize;
    }
    assert_eq!(valid, 7);

    let single: BTreeSet<Vec<bool>> = (0..64)
        .map(|s| bits(&generate_mask(2, 2, 0.25, s).unwrap()))
        .collect();
    assert_eq!(single.len(), 4);
    let double: BTreeSet<Vec<bool>> = (0..64)
        .map(|s| bits(&generate_mask(2, 2, 0.5, s).unwrap()))
        .collect();
    let expected: BTreeSet<Vec<bool>> = [
        vec![true, false, false, true],
        vec![false, true, true, false],
    ]
    .into_iter()
    .collect();
    assert_eq!(double, expected);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generated_masks_meet_their_quota(
        n in 2usize..60,
        views in 2usize..5,
        fraction in 0.0f64..=0.7,
        seed in any::<u64>(),
    ) {
        let ratio = fraction * (views - 1) as f64 / views as f64;
        let mask = generate_mask(n, views, ratio, seed).unwrap();
        let quota = (ratio * (n * views) as f64 + 1e-9).floor() as usize;
        prop_assert_eq!(mask.missing_cells(), quota);
        for j in 0..n {
            prop_assert!((0..views).any(|v| mask.is_observed(v, j)));
        }
        for v in 0..views {
            prop_assert!(mask.observed_count(v) >= 1);
        }
        prop_assert_eq!(&mask, &generate_mask(n, views, ratio, seed).unwrap());
    }

    #[test]
    fn too_high_ratios_are_rejected(views in 1usize..5, excess in 1e-6f64..0.5) {
        let ratio = (views - 1) as f64 / views as f64 + excess;
        prop_assert!(matches!(generate_mask(10, views, ratio, 0), Err(Error::Config(_))));
    }
}

#[test]
fn manifest_round_trip_with_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    let view0 = DMatrix::from_fn(5, 3, |i, j| (i * 3 + j) as f64 * 0.25);
    let view1 = DMatrix::from_fn(5, 2, |i, j| -((i + j) as f64) / 3.0);
    write_matrix(&dir.path().join("a.csv"), &view0, ',').unwrap();
    write_matrix(&dir.path().join("b.csv"), &view1, ',').unwrap();
    write_labels(&dir.path().join("y.txt"), &[3, 3, 7, 7, 3]).unwrap();
    let manifest = DatasetManifest {
        name: "tiny".into(),
        n: 5,
        views: vec![
            ViewEntry {
                path: "a.csv".into(),
                dim: 3,
            },
            ViewEntry {
                path: "b.csv".into(),
                dim: 2,
            },
        ],
        labels_path: Some("y.txt".into()),
        delimiter: ",".into(),
    };
    let path = dir.path().join("m.json");
    fs::write(&path, serde_json::to_string(&manifest).unwrap()).unwrap();

    let (data, mapping) = load_dataset(&DatasetManifest::read(&path).unwrap()).unwrap();
    assert_eq!(data.dims(), vec![3, 2]);
    assert_eq!(*data.view(0).as_inner(), view0.transpose());
    assert_eq!(*data.view(1).as_inner(), view1.transpose());
    assert_eq!(data.labels().unwrap(), &[0, 0, 1, 1, 0]);
    assert_eq!(mapping.unwrap().original, vec![3, 7]);
}

#[test]
fn parse_errors_name_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mask.txt");
    fs::write(&path, "1,0\n1,1\n0,2\n").unwrap();
    let message = read_mask(&path, ',').unwrap_err().to_string();
    assert!(message.contains("mask.txt"), "{message}");
    assert!(message.contains("row 3, column 2"), "{message}");

    fs::write(&path, "1,0\n1,0\n").unwrap();
    let message = read_mask(&path, ',').unwrap_err().to_string();
    assert!(message.contains("view 1 observes no samples"), "{message}");

    let manifest = dir.path().join("bad.json");
    fs::write(&manifest, "{\n  \"name\": \"x\",\n  \"n\": oops\n}").unwrap();
    let message = DatasetManifest::read(&manifest).unwrap_err().to_string();
    assert!(
        message.contains("bad.json") && message.contains("line 3"),
        "{message}"
    );
}

#[test]
fn mask_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mask.txt");
    let mask = generate_mask(30, 3, 0.4, 5).unwrap();
    write_mask(&path, &mask, ',').unwrap();
    assert_eq!(read_mask(&path, ',').unwrap(), mask);
}

#[test]
fn synthetic_views_are_separable_on_their_own() {
    let spec = SynthSpec {
        n: 500,
        k: 4,
        views: 3,
        dims: vec![10, 12, 15],
        cluster_separation: 8.0,
        noise_std: 1.0,
        anchor_permutations: Some(vec![vec![0, 1, 2, 3], vec![2, 0, 3, 1], vec![3, 2, 1, 0]]),
        seed: 42,
    };
    let (data, labels) = synth_dataset(&spec).unwrap();
    for v in 0..3 {
        let points = data.view(v).as_inner().transpose();
        let run = kmeans(&points, 4, 0, 10).unwrap();
        assert!(accuracy(&run.labels, &labels).unwrap() >= 0.95);
        // The cluster mean sits on the planted axis.
        for c in 0..4 {
            let members: Vec<usize> = (0..500).filter(|&j| labels[j] == c).collect();
            let mean: Vec<f64> = (0..spec.dims[v])
                .map(|f| {
                    members.iter().map(|&j| points[(j, f)]).sum::<f64>() / members.len() as f64
                })
                .collect();
            let axis = (0..mean.len())
                .max_by(|&a, &b| mean[a].total_cmp(&mean[b]))
                .unwrap();
            assert_eq!(axis, spec.axes(v)[c]);
        }
    }
}
