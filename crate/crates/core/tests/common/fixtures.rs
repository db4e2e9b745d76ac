//! Hand-built 2-D configurations. The probe sits at the origin; `y1` is
//! its nearest gallery sample but lives in a tight cluster, so it does not
//! search back; `y2` and `y3` are in sparse surroundings and do.
#![allow(dead_code)]

use dakr::FeatureSet;

pub const PROBE_ID: u64 = 100;
pub const EXTRA_PROBE_ID: u64 = 101;

pub fn figure_one_gallery() -> FeatureSet {
    let rows = [
        (1, [1.0, 0.0]),
        (2, [-0.5, 0.6]),
        (3, [0.0, -0.9]),
        (4, [1.2, 0.0]),
        (5, [1.2, 0.3]),
        (6, [1.0, -0.3]),
        (7, [0.3, -1.6]),
        (8, [-0.4, -1.55]),
        (9, [-0.8, -1.9]),
    ];
    FeatureSet::with_ids_from_rows(
        rows.iter().map(|r| r.0).collect(),
        &rows.iter().map(|r| r.1.to_vec()).collect::<Vec<_>>(),
    )
    .unwrap()
}

/// The probe alone.
pub fn figure_one_probes() -> FeatureSet {
    FeatureSet::new(vec![PROBE_ID], vec![0.0, 0.0], 2).unwrap()
}

/// The probe plus one extra probe `z` lodged between `y3` and its
/// lower neighbors.
pub fn figure_two_probes() -> FeatureSet {
    FeatureSet::new(vec![PROBE_ID, EXTRA_PROBE_ID], vec![0.0, 0.0, 0.6, -1.2], 2).unwrap()
}

/// Figure-1 gallery plus an isolated `y10` whose nearest neighbors are far
/// away: it searches back to the probe although it is not among the
/// probe's three nearest.
pub fn isolated_gallery() -> FeatureSet {
    let base = figure_one_gallery();
    let mut ids = base.ids().to_vec();
    let mut rows: Vec<Vec<f64>> = (0..base.len()).map(|i| base.row(i).to_vec()).collect();
    ids.push(10);
    rows.push(vec![-2.5, 0.8]);
    FeatureSet::with_ids_from_rows(ids, &rows).unwrap()
}
