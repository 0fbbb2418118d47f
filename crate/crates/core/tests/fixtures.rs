mod common;

use verse_core::clustering::{feasibility_verdict, Summary, DEFAULT_THRESHOLD};
use verse_core::explain::{
    attribute_features, compose_booster, detect_low_clusters, render_delta, sweep_report,
    Characterization, Predicate, Run,
};
use verse_core::pipeline::project;
use verse_core::reduction::{pca_fit, ReductionQuality};
use verse_core::report::{table_row, DiagnosticsReport};
use verse_core::tensor_io::{decode_embeddings, encode_embeddings, EmbeddingMatrix};
use verse_core::Error;

use common::{blobs, cluster_of, ids, session};

#[test]
fn feasibility_gate_on_reference_silhouettes() {
    let verdicts: Vec<bool> = [0.63, 0.50, 0.38, 0.35]
        .iter()
        .map(|&s| feasibility_verdict(s, DEFAULT_THRESHOLD).unwrap().suitable)
        .collect();
    assert_eq!(verdicts, [true, true, false, false]);
    assert!(
        feasibility_verdict(0.45, DEFAULT_THRESHOLD)
            .unwrap()
            .suitable
    );
}

#[test]
fn diagnostics_row_rendering() {
    let (points, _) = blobs(&common::five_centres(), 10, 0.3, 1);
    let meta = format!(
        "sample_id,layout\n{}",
        ids(50)
            .iter()
            .map(|i| format!("{i},A\n"))
            .collect::<String>()
    );
    let scores = format!(
        "sample_id,f1\n{}",
        ids(50)
            .iter()
            .map(|i| format!("{i},0.7\n"))
            .collect::<String>()
    );
    let s = session(&points, 5, &meta, Some(&scores));
    let mut report = DiagnosticsReport::new(
        &ReductionQuality {
            trustworthiness: 0.96,
            continuity: 0.98,
            k: 5,
        },
        &s.clusters,
        2,
    );
    report.k = 7;
    report.radius = Summary {
        mean: 0.30,
        min: 0.21,
        max: 0.47,
    };
    report.density = Some(Summary {
        mean: 243.0,
        min: 69.0,
        max: 476.0,
    });
    report.silhouette = 0.63;
    report.suitable = true;
    assert_eq!(
        report.table_row(),
        "0.96 | 0.98 | 7 | 0.30 [0.21–0.47] | 243 [69–476] | 0.63 | ✓"
    );
    let json = serde_json::to_value(&report).unwrap();
    for key in [
        "trustworthiness",
        "proximity",
        "k",
        "radius",
        "density",
        "silhouette",
        "suitable",
    ] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert_eq!(
        table_row(
            0.99,
            0.99,
            4,
            &Summary {
                mean: 0.46,
                min: 0.36,
                max: 0.58
            },
            None,
            0.50,
            true
        ),
        "0.99 | 0.99 | 4 | 0.46 [0.36–0.58] | n/a | 0.50 | ✓"
    );
}

/// Three clusters of ten: means 0.5989 (A), 0.4325 (B) and 0.9822, for a global mean of 0.6712.
#[test]
fn both_low_regions_are_flagged() {
    let (points, _) = blobs(
        &[vec![0.0, 0.0], vec![20.0, 0.0], vec![0.0, 20.0]],
        10,
        0.5,
        3,
    );
    let ids = ids(30);
    let meta = format!(
        "sample_id,layout\n{}",
        ids.iter().map(|i| format!("{i},A\n")).collect::<String>()
    );
    let means = [0.5989, 0.4325, 0.9822];
    let offsets = [-0.01, 0.01];
    let scores = format!(
        "sample_id,f1\n{}",
        ids.iter()
            .enumerate()
            .map(|(i, id)| format!("{id},{}\n", means[i / 10] + offsets[i % 2]))
            .collect::<String>()
    );
    let s = session(&points, 3, &meta, Some(&scores));
    assert!((s.global_score.mean - 0.6712).abs() < 1e-12);
    let mut expected = vec![cluster_of(&s, 0), cluster_of(&s, 10)];
    expected.sort();
    assert_eq!(detect_low_clusters(&s, 0.05, 5), expected);
}

fn cluster_b_session() -> verse_core::explain::Session {
    let (points, labels) = blobs(&common::five_centres(), 10, 0.3, 8);
    let mut meta = String::from(
        "sample_id,grades:intrinsic,layout:intrinsic,row_h/image_h:intrinsic,shadows:extrinsic\n",
    );
    let mut scores = String::from("sample_id,f1\n");
    for (i, id) in ids(points.len()).iter().enumerate() {
        let j = (i % 10) as f64;
        let (grades, layout, ratio, f1) = if labels[i] == 1 {
            ("alphanumeric", "A-double", 0.025 + 0.002 * j, 0.43)
        } else {
            ("numeric", ["A", "B", "C"][i % 3], 0.030 + 0.005 * j, 0.70)
        };
        let shadows = if i % 2 == 0 { "yes" } else { "no" };
        meta.push_str(&format!("{id},{grades},{layout},{ratio},{shadows}\n"));
        scores.push_str(&format!("{id},{f1}\n"));
    }
    session(&points, 5, &meta, Some(&scores))
}

#[test]
fn cluster_b_characterization() {
    let s = cluster_b_session();
    let b = cluster_of(&s, 10);
    assert_eq!(detect_low_clusters(&s, 0.05, 5), vec![b]);

    let ranked = attribute_features(&s, b).unwrap();
    let top3: Vec<&str> = ranked.iter().take(3).map(|a| a.feature.as_str()).collect();
    assert_eq!(top3, ["grades", "layout", "row_h/image_h"]);
    match &ranked[2].characterization {
        Characterization::Numeric {
            lo,
            hi,
            cluster_mean,
            rest_mean,
        } => {
            assert!(cluster_mean < rest_mean);
            assert!(*lo >= 0.025 && *hi <= 0.043);
        }
        other => panic!("expected numeric interval, got {other:?}"),
    }

    let spec = compose_booster(&s, b, 2).unwrap();
    assert_eq!(
        spec.predicates,
        vec![
            Predicate::Equals {
                feature: "grades".into(),
                value: "alphanumeric".into()
            },
            Predicate::Equals {
                feature: "layout".into(),
                value: "A-double".into()
            },
        ]
    );
    assert!(matches!(
        compose_booster(&s, b, 0),
        Err(Error::NoAttributions)
    ));
}

#[test]
fn sweep_deltas_render_two_decimals() {
    let (points, _) = blobs(&[vec![0.0, 0.0], vec![20.0, 0.0]], 10, 0.5, 6);
    let ids = ids(20);
    let meta = format!(
        "sample_id,layout\n{}",
        ids.iter().map(|i| format!("{i},A\n")).collect::<String>()
    );
    let per_sample = |a: f64, rest: f64| -> Vec<(String, f64)> {
        ids.iter()
            .enumerate()
            .map(|(i, id)| {
                (
                    id.clone(),
                    if i < 10 { a } else { rest } + [-0.02, 0.02][i % 2],
                )
            })
            .collect()
    };
    let base = per_sample(0.5989, 0.7435);
    let scores = format!(
        "sample_id,f1\n{}",
        base.iter()
            .map(|(i, v)| format!("{i},{v}\n"))
            .collect::<String>()
    );
    let s = session(&points, 2, &meta, Some(&scores));
    let a = cluster_of(&s, 0);
    let runs = [
        Run::new("base", base),
        Run::new("boost", per_sample(0.7828, 0.7386)),
    ];
    let report = sweep_report(&runs, &s, &[a], "base").unwrap();

    let region = format!("cluster-{a}");
    let dv = report.delta("validation", "boost").unwrap();
    let da = report.delta(&region, "boost").unwrap();
    assert!((dv - 0.0895).abs() < 1e-12);
    assert!((da - 0.1839).abs() < 1e-12);
    assert_eq!(render_delta(dv), "+0.09");
    assert_eq!(render_delta(da), "+0.18");
    assert_eq!(report.delta("validation", "base"), Some(0.0));

    assert!(matches!(
        sweep_report(&runs, &s, &[a], "zoom"),
        Err(Error::UnknownBaseline(_))
    ));
    let short = Run::new("short", per_sample(0.5, 0.5).into_iter().skip(1));
    assert!(matches!(
        sweep_report(&[runs[0].clone(), short], &s, &[a], "base"),
        Err(Error::MissingRunScores { .. })
    ));
}

#[test]
fn validation_set_of_152_round_trips_and_reduces() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(152);
    let rows: Vec<Vec<f64>> = (0..152)
        .map(|_| (0..1024).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let m = EmbeddingMatrix::from_rows(ids(152), &rows).unwrap();
    let back = decode_embeddings(&encode_embeddings(&m).unwrap()).unwrap();
    assert_eq!(back.len(), 152);
    assert_eq!(back, m);

    let wide: Vec<Vec<f64>> = (0..152)
        .map(|_| (0..1152).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let m = EmbeddingMatrix::from_rows(ids(152), &wide).unwrap();
    let space = pca_fit(&m, 2).unwrap();
    assert_eq!(space.coords.len(), 152);
    assert!(space.coords.iter().all(|c| c.len() == 2));

    let train: Vec<Vec<f64>> = (0..400)
        .map(|_| (0..1152).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let train_ids = (0..400).map(|i| format!("t{i}")).collect();
    let projected = project(
        &space,
        &EmbeddingMatrix::from_rows(train_ids, &train).unwrap(),
    )
    .unwrap();
    assert_eq!(projected.coords.len(), 400);
    assert!(projected.coords.iter().all(|c| c.len() == 2));
}

#[test]
fn session_joins_all_152_samples() {
    let centres: Vec<Vec<f64>> = (0..4)
        .map(|c| vec![(c % 2) as f64 * 20.0, (c / 2) as f64 * 20.0])
        .collect();
    let (points, _) = blobs(&centres, 38, 0.5, 12);
    let ids = ids(152);
    let meta = format!(
        "sample_id,layout\n{}",
        ids.iter().map(|i| format!("{i},A\n")).collect::<String>()
    );
    let scores = format!(
        "sample_id,f1\n{}",
        ids.iter().map(|i| format!("{i},0.6\n")).collect::<String>()
    );
    let s = session(&points, 4, &meta, Some(&scores));
    assert_eq!(s.len(), 152);
    s.validate().unwrap();
}
