//! The candidate varifolds `W1..W9` on a near-round ellipsoid, the width
//! assignment they force and the resulting counterexample ledger.
//!
//! That the first eight widths are realized by these candidates is taken as
//! given (it is a min-max statement); what is computed here are the masses,
//! the indices of the supporting geodesics and the case analysis built on
//! them. Report rows say which is which in their `source` field.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::index::{index_nullity, ClosedGeodesic, IndexResult};
use crate::surface::{principal_ellipse, EllipsoidParams};
use crate::tolerances;

/// `(label, pieces)` with pieces `(i, multiplicity)` of principal ellipses.
pub const CANDIDATES: [(&str, &[(usize, u32)]); 9] = [
    ("W1", &[(1, 1)]),
    ("W2", &[(2, 1)]),
    ("W3", &[(3, 1)]),
    ("W4", &[(1, 2)]),
    ("W5", &[(1, 1), (2, 1)]),
    ("W6", &[(2, 2)]),
    ("W7", &[(1, 1), (3, 1)]),
    ("W8", &[(2, 1), (3, 1)]),
    ("W9", &[(3, 2)]),
];

/// Vertices used for the principal-ellipse lengths.
const LENGTH_VERTICES: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CandidateRow {
    pub label: String,
    pub support: String,
    pub multiplicity: u32,
    pub mass: f64,
    /// Index and nullity of the supporting geodesic, covered `multiplicity`
    /// times; absent when the support is two different geodesics.
    pub index: Option<usize>,
    pub nullity: Option<usize>,
    pub ambiguous: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CandidateTable {
    pub surface: [f64; 3],
    pub lengths: [f64; 3],
    pub rows: Vec<CandidateRow>,
    /// `‖W1‖ < ‖W2‖ < ‖W3‖`.
    pub first_three_ordered: bool,
    /// `‖W4‖ < ‖W5‖ < ‖W6‖`.
    pub next_three_ordered: bool,
    /// `|‖W5‖ − (‖W4‖ + ‖W6‖)/2|`, zero up to rounding.
    pub midpoint_defect: f64,
    /// `sign(‖W6‖ − ‖W7‖)`: `-1`, `0` (tie within the mass tolerance) or `1`.
    pub w6_minus_w7: i32,
}

impl CandidateTable {
    pub fn row(&self, label: &str) -> Option<&CandidateRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    fn mass(&self, label: &str) -> f64 {
        self.row(label).map_or(f64::NAN, |r| r.mass)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IndexOptions {
    /// Grid points per covering.
    pub points_per_cover: usize,
    pub zero_tol: Option<f64>,
}

impl Default for IndexOptions {
    fn default() -> Self {
        Self { points_per_cover: 512, zero_tol: None }
    }
}

/// Index and nullity of `γ_i^(r)`.
pub fn principal_index(surface: &EllipsoidParams, i: usize, r: u32, opts: IndexOptions) -> Result<IndexResult> {
    let g = ClosedGeodesic::principal(*surface, i, r, 1024)?;
    index_nullity(&g, opts.points_per_cover * r as usize, opts.zero_tol)
}

/// Masses, supports and indices of `W1..W9`.
pub fn candidate_table(surface: &EllipsoidParams, opts: IndexOptions) -> Result<CandidateTable> {
    surface.require_near_round()?;
    let mut lengths = [0.0; 3];
    for (i, l) in lengths.iter_mut().enumerate() {
        *l = principal_ellipse(surface, i + 1, LENGTH_VERTICES)?.length();
    }
    let mut rows = Vec::with_capacity(9);
    for (label, pieces) in CANDIDATES {
        let mass = pieces.iter().map(|&(i, m)| m as f64 * lengths[i - 1]).sum();
        let support = pieces
            .iter()
            .map(|&(i, m)| if m == 1 { format!("g{i}") } else { format!("g{i}x{m}") })
            .collect::<Vec<_>>()
            .join("+");
        let (index, nullity, ambiguous, multiplicity) = match pieces {
            [(i, m)] => {
                let r = principal_index(surface, *i, *m, opts)?;
                (Some(r.index), Some(r.nullity), r.ambiguous, *m)
            }
            _ => (None, None, false, 1),
        };
        rows.push(CandidateRow { label: label.into(), support, multiplicity, mass, index, nullity, ambiguous });
    }
    let m = |k: usize| rows[k].mass;
    let diff = m(5) - m(6);
    let w6_minus_w7 = if diff.abs() <= tolerances::MASS_TIE { 0 } else { diff.signum() as i32 };
    Ok(CandidateTable {
        surface: surface.coefficients(),
        lengths,
        first_three_ordered: m(0) < m(1) && m(1) < m(2),
        next_three_ordered: m(3) < m(4) && m(4) < m(5),
        midpoint_defect: (m(4) - 0.5 * (m(3) + m(5))).abs(),
        w6_minus_w7,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WidthRow {
    pub k: usize,
    /// Candidate realizing `width_k` under the default (largest candidate
    /// omitted) assignment; absent when masses tie.
    pub candidate: Option<String>,
    pub mass: f64,
    /// Every candidate that realizes `width_k` in some scenario.
    pub possible: Vec<String>,
    pub source: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WidthAssignment {
    pub rows: Vec<WidthRow>,
    /// Masses within the tie tolerance: the assignment is not determined.
    pub ambiguous: bool,
    /// Assigned masses strictly increase over widths 1..8.
    pub strictly_increasing: bool,
    /// Omitted candidate of the default assignment.
    pub omitted: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Scenario {
    pub omitted: String,
    /// Order of `W6` and `W7` assumed; absent when one of them is omitted.
    pub w6_before_w7: Option<bool>,
    /// Consistent with the masses of this ellipsoid.
    pub realized: bool,
    /// `(k, label)` for widths 4..8.
    pub assignment: Vec<(usize, String)>,
    pub violation: Option<Violation>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub k: usize,
    pub label: String,
    pub index: usize,
    pub nullity: usize,
}

/// Every assignment of widths 4..8 compatible with the candidate masses:
/// one of `W4..W9` is omitted, and the rest are ordered by mass. All
/// comparisons among `W4..W9` follow from `L1 < L2 < L3` except
/// `W6` against `W7`, so both orders of that pair are enumerated.
pub fn scenarios(table: &CandidateTable) -> Vec<Scenario> {
    let upper = ["W4", "W5", "W6", "W7", "W8", "W9"];
    let mut out = Vec::new();
    for omitted in upper {
        let mut chosen: Vec<&str> = upper.iter().copied().filter(|l| *l != omitted).collect();
        chosen.sort_by(|a, b| table.mass(a).partial_cmp(&table.mass(b)).unwrap().then(a.cmp(b)));
        let both = chosen.contains(&"W6") && chosen.contains(&"W7");
        let orders: Vec<Option<bool>> = if both { vec![Some(true), Some(false)] } else { vec![None] };
        for order in orders {
            let mut seq = chosen.clone();
            if let Some(w6_first) = order {
                let p6 = seq.iter().position(|l| *l == "W6").unwrap();
                let p7 = seq.iter().position(|l| *l == "W7").unwrap();
                if (p6 < p7) != w6_first {
                    seq.swap(p6, p7);
                }
            }
            let realized = match order {
                None => true,
                Some(w6_first) => table.w6_minus_w7 == 0 || (table.w6_minus_w7 < 0) == w6_first,
            };
            let assignment: Vec<(usize, String)> = seq.iter().enumerate().map(|(p, l)| (p + 4, l.to_string())).collect();
            let violation = assignment.iter().find_map(|(k, l)| {
                let row = table.row(l)?;
                let (index, nullity) = (row.index?, row.nullity?);
                (index + nullity < *k).then(|| Violation { k: *k, label: l.clone(), index, nullity })
            });
            out.push(Scenario { omitted: omitted.into(), w6_before_w7: order, realized, assignment, violation });
        }
    }
    out
}

/// Widths 1..3 go to `W1..W3`; widths 4..8 to five of `W4..W9`.
pub fn width_assignment(table: &CandidateTable) -> WidthAssignment {
    let masses: Vec<f64> = table.rows.iter().map(|r| r.mass).collect();
    let mut sorted_upper: Vec<usize> = (3..9).collect();
    sorted_upper.sort_by(|&a, &b| masses[a].partial_cmp(&masses[b]).unwrap().then(a.cmp(&b)));
    let mut order: Vec<usize> = vec![0, 1, 2];
    order.sort_by(|&a, &b| masses[a].partial_cmp(&masses[b]).unwrap().then(a.cmp(&b)));
    order.extend(&sorted_upper[..5]);

    let tie = |a: f64, b: f64| (a - b).abs() <= tolerances::MASS_TIE;
    let ambiguous = (0..3).any(|a| (a + 1..3).any(|b| tie(masses[a], masses[b])))
        || (3..9).any(|a| (a + 1..9).any(|b| tie(masses[a], masses[b])));

    let all = scenarios(table);
    let rows = order
        .iter()
        .enumerate()
        .map(|(p, &c)| {
            let k = p + 1;
            let possible = if k <= 3 {
                vec![table.rows[k - 1].label.clone()]
            } else {
                let mut v: Vec<String> = all.iter().map(|s| s.assignment[k - 4].1.clone()).collect();
                v.sort();
                v.dedup();
                v
            };
            WidthRow {
                k,
                candidate: (!ambiguous).then(|| table.rows[c].label.clone()),
                mass: masses[c],
                possible,
                source: if k <= 3 { "paper-theorem" } else { "paper-theorem+computed" },
            }
        })
        .collect::<Vec<_>>();
    let strictly_increasing = rows.windows(2).all(|w| w[0].mass < w[1].mass);
    WidthAssignment {
        rows,
        ambiguous,
        strictly_increasing,
        omitted: (!ambiguous).then(|| table.rows[sorted_upper[5]].label.clone()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub scenarios: Vec<Scenario>,
    /// Every scenario has a width `k` realized by a candidate with
    /// `index + nullity < k`.
    pub every_scenario_violated: bool,
    pub verdict: String,
    /// The identification of varifold and geodesic index is assumed for the
    /// multiplicity-two candidates.
    pub assumptions: Vec<&'static str>,
}

pub fn counterexample_report(table: &CandidateTable, assignment: &WidthAssignment) -> Result<CounterexampleReport> {
    if assignment.ambiguous {
        return Err(Error::InvalidArgument("width assignment is ambiguous (tied masses)".into()));
    }
    let scenarios = scenarios(table);
    let every = scenarios.iter().all(|s| s.violation.is_some());
    Ok(CounterexampleReport {
        every_scenario_violated: every,
        verdict: if every { "Question 1 violated".into() } else { "inconclusive".into() },
        scenarios,
        assumptions: vec![
            "widths 1..8 are realized by W1..W9 without repetition (min-max theorem, not computed)",
            "varifold index and nullity equal those of the supporting closed geodesic",
        ],
    })
}
