//! JSON schemas of every service response, versioned alongside the payloads.

pub const SCHEMAS: &[(&str, &str)] = &[
    (
        "session-created",
        include_str!("../schema/session-created.json"),
    ),
    ("res", include_str!("../schema/res.json")),
    ("clusters", include_str!("../schema/clusters.json")),
    ("overlay", include_str!("../schema/overlay.json")),
    ("attribution", include_str!("../schema/attribution.json")),
    ("booster", include_str!("../schema/booster.json")),
    ("report", include_str!("../schema/report.json")),
    ("error", include_str!("../schema/error.json")),
];

pub fn get(name: &str) -> Option<&'static str> {
    SCHEMAS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, body)| *body)
}
