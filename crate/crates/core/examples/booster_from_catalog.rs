//! Reads a training catalog from line-delimited JSON and selects the samples
//! that satisfy a hand-written booster specification.
//!
//! ```text
//! cargo run -p verse-core --example booster_from_catalog
//! ```

use verse_core::explain::{match_booster, BoosterSpec, Predicate};
use verse_core::tensor_io::RecordSet;

const CATALOG: &str = r#"{"sample_id": "t0", "grades": "alphanumeric", "layout": "A-double", "row_h/image_h": 0.021}
{"sample_id": "t1", "grades": "numeric", "layout": "A-double", "row_h/image_h": 0.020}
{"sample_id": "t2", "grades": "alphanumeric", "layout": "B", "row_h/image_h": 0.019}
{"sample_id": "t3", "grades": "alphanumeric", "layout": "A-double", "row_h/image_h": null}
{"sample_id": "t4", "grades": "alphanumeric", "layout": "A-double", "row_h/image_h": 0.018}
"#;

fn main() -> verse_core::Result<()> {
    let catalog = RecordSet::from_json_lines(CATALOG.as_bytes())?;
    let spec = BoosterSpec {
        target_cluster: 1,
        predicates: vec![
            Predicate::Equals {
                feature: "grades".into(),
                value: "alphanumeric".into(),
            },
            Predicate::Equals {
                feature: "layout".into(),
                value: "A-double".into(),
            },
            Predicate::Within {
                feature: "row_h/image_h".into(),
                lo: 0.015,
                hi: 0.025,
            },
        ],
        matched_ids: Vec::new(),
    }
    .with_matches(&catalog)?;
    println!("{}", serde_json::to_string_pretty(&spec)?);
    println!("matched {:?}", match_booster(&spec, &catalog)?);
    Ok(())
}
