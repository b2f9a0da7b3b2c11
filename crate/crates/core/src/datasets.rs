//! The three worked example tables.

use crate::data::{FrequencyTable, GroupCounts};

fn labelled(rows: &[(&str, [u32; 5])]) -> FrequencyTable {
    let labels = rows.iter().map(|(l, _)| l.to_string()).collect();
    let groups = rows
        .iter()
        .map(|(_, [m0, m1, m2, n0, n1])| GroupCounts::new(*m0, *m1, *m2, *n0, *n1))
        .collect();
    FrequencyTable::with_labels(labels, groups).expect("built-in table is valid")
}

/// Otitis media with effusion after antibiotic treatment; response = cured.
pub fn otitis_media() -> FrequencyTable {
    labelled(&[("cefaclor", [21, 9, 14, 38, 24]), ("amoxicillin", [13, 3, 15, 27, 39])])
}

/// Myopia treatment trial across three arms.
pub fn myopia() -> FrequencyTable {
    labelled(&[("Q", [2, 1, 7, 1, 2]), ("Y", [3, 1, 1, 1, 0]), ("W", [3, 4, 6, 0, 1])])
}

/// Retinitis pigmentosa by genetic type; bilateral subjects only.
pub fn retinitis_pigmentosa() -> FrequencyTable {
    labelled(&[
        ("DOM", [15, 6, 7, 0, 0]),
        ("AR", [7, 5, 9, 0, 0]),
        ("SL", [3, 2, 14, 0, 0]),
        ("ISO", [67, 24, 57, 0, 0]),
    ])
}
