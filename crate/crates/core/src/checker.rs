//! Geometric feasibility oracle and objective evaluator.
//!
//! Works on placements only and never consults the quadratic model, so the
//! two can be compared against each other.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Instance, Solution};

/// Geometric slack below which an overlap or overflow is ignored.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ViolationKind {
    Boundary,
    Overlap,
    Capacity,
    Association,
    Priority,
    Incompatibility,
    LoadBearing,
    Assignment,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub items: Vec<usize>,
    pub bin: Option<usize>,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ViolationReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        Self {
            feasible: violations.is_empty(),
            violations,
        }
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }

    pub fn total_magnitude(&self) -> f64 {
        self.violations.iter().map(|v| v.magnitude).sum()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CheckError {
    #[error("solution places {found} items, instance has {expected}")]
    ItemCount { expected: usize, found: usize },
    #[error("solution flags {found} bins, instance has {expected}")]
    BinCount { expected: usize, found: usize },
    #[error("item {item} is placed in unknown bin {bin}")]
    UnknownBin { item: usize, bin: usize },
    #[error("item {item} has extents {extents:?} that do not permute its dimensions")]
    BadExtents { item: usize, extents: [u32; 3] },
    #[error("item {item} has a non-finite position")]
    NonFinite { item: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub bins_used: usize,
    pub o_x: f64,
    pub o_y: f64,
    pub o_z: f64,
    pub com_deviation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Evaluation {
    pub objective: f64,
    pub metrics: Metrics,
}

fn validate_shape(instance: &Instance, solution: &Solution) -> Result<(), CheckError> {
    let (m, n) = (instance.item_count(), instance.bin_count());
    if solution.placements.len() != m {
        return Err(CheckError::ItemCount {
            expected: m,
            found: solution.placements.len(),
        });
    }
    if solution.bins_used.len() != n {
        return Err(CheckError::BinCount {
            expected: n,
            found: solution.bins_used.len(),
        });
    }
    let d = instance.dimensionality().count();
    for (i, (p, item)) in solution.placements.iter().zip(instance.items()).enumerate() {
        if p.bin >= n {
            return Err(CheckError::UnknownBin {
                item: i,
                bin: p.bin,
            });
        }
        if p.position.iter().any(|v| !v.is_finite()) {
            return Err(CheckError::NonFinite { item: i });
        }
        let mut got = p.extents;
        let mut want = item.dims;
        got[..d].sort_unstable();
        want[..d].sort_unstable();
        if got != want {
            return Err(CheckError::BadExtents {
                item: i,
                extents: p.extents,
            });
        }
    }
    Ok(())
}

// Length of the open-interval intersection of [a, a + ea] and [b, b + eb].
fn overlap_1d(a: f64, ea: f64, b: f64, eb: f64) -> f64 {
    ((a + ea).min(b + eb) - a.max(b)).max(0.0)
}

/// Verifies containment, non-overlap, capacities and every loading feature.
pub fn check(instance: &Instance, solution: &Solution) -> Result<ViolationReport, CheckError> {
    validate_shape(instance, solution)?;
    let d = instance.dimensionality().count();
    let items = instance.items();
    let placed = &solution.placements;
    let mut out = Vec::new();

    for (i, p) in placed.iter().enumerate() {
        if !solution.bins_used[p.bin] {
            out.push(Violation {
                kind: ViolationKind::Assignment,
                items: vec![i],
                bin: Some(p.bin),
                magnitude: 1.0,
            });
        }
        if !instance.is_eligible(items[i].category, p.bin) {
            out.push(Violation {
                kind: ViolationKind::Association,
                items: vec![i],
                bin: Some(p.bin),
                magnitude: 1.0,
            });
        }
        let bin = &instance.bins()[p.bin];
        let start = instance.x_offset(p.bin) as f64;
        let mut overflow = 0.0;
        for a in 0..d {
            let lo = if a == 0 { start } else { 0.0 };
            let hi = lo + bin.dims[a] as f64;
            overflow += (lo - p.position[a]).max(0.0);
            overflow += (p.position[a] + p.extents[a] as f64 - hi).max(0.0);
        }
        if overflow > TOLERANCE {
            out.push(Violation {
                kind: ViolationKind::Boundary,
                items: vec![i],
                bin: Some(p.bin),
                magnitude: overflow,
            });
        }
    }

    for (j, bin) in instance.bins().iter().enumerate() {
        let Some(cap) = bin.capacity else { continue };
        let load: u64 = placed
            .iter()
            .zip(items)
            .filter(|(p, _)| p.bin == j)
            .map(|(_, it)| it.weight)
            .sum();
        if load > cap {
            let members = (0..placed.len()).filter(|&i| placed[i].bin == j).collect();
            out.push(Violation {
                kind: ViolationKind::Capacity,
                items: members,
                bin: Some(j),
                magnitude: (load - cap) as f64,
            });
        }
    }

    let priority_axis = instance.priority().map(|p| p.axis.index());
    let heavy = instance.heavy_categories();
    for i in 0..placed.len() {
        for k in i + 1..placed.len() {
            let (a, b) = (&placed[i], &placed[k]);
            if a.bin != b.bin {
                continue;
            }
            let bin = Some(a.bin);
            let ov: Vec<f64> = (0..d)
                .map(|ax| {
                    overlap_1d(
                        a.position[ax],
                        a.extents[ax] as f64,
                        b.position[ax],
                        b.extents[ax] as f64,
                    )
                })
                .collect();
            if ov.iter().all(|&o| o > TOLERANCE) {
                out.push(Violation {
                    kind: ViolationKind::Overlap,
                    items: vec![i, k],
                    bin,
                    magnitude: ov.iter().product(),
                });
            }
            let (ci, ck) = (items[i].category, items[k].category);
            if instance.are_incompatible(ci, ck) {
                out.push(Violation {
                    kind: ViolationKind::Incompatibility,
                    items: vec![i, k],
                    bin,
                    magnitude: 1.0,
                });
            }
            if let Some(ax) = priority_axis {
                let ordered = if instance.delivered_before(i, k) {
                    Some((a, b))
                } else if instance.delivered_before(k, i) {
                    Some((b, a))
                } else {
                    None
                };
                if let Some((first, second)) = ordered {
                    let gap = first.position[ax] + first.extents[ax] as f64 - second.position[ax];
                    if gap > TOLERANCE {
                        out.push(Violation {
                            kind: ViolationKind::Priority,
                            items: vec![i, k],
                            bin,
                            magnitude: gap,
                        });
                    }
                }
            }
            if d == 3 && ci != ck {
                let footprint = ov[0] * ov[1];
                for (lo, hi, lo_idx, hi_idx) in [(a, b, i, k), (b, a, k, i)] {
                    let lo_cat = items[lo_idx].category;
                    if !heavy.contains(&lo_cat) || footprint <= TOLERANCE {
                        continue;
                    }
                    if lo.position[2] + lo.extents[2] as f64 <= hi.position[2] + TOLERANCE {
                        out.push(Violation {
                            kind: ViolationKind::LoadBearing,
                            items: vec![lo_idx, hi_idx],
                            bin,
                            magnitude: footprint,
                        });
                    }
                }
            }
        }
    }

    Ok(ViolationReport::from_violations(out))
}

/// Objective and metrics recomputed from geometry.
pub fn evaluate(instance: &Instance, solution: &Solution) -> Evaluation {
    let w = instance.weights();
    let d = instance.dimensionality();
    let m = solution.placements.len();
    let mut metrics = Metrics {
        bins_used: solution.bins_used_count(),
        ..Metrics::default()
    };
    if m > 0 {
        let push = |a: usize, span: f64| {
            let s: f64 = solution
                .placements
                .iter()
                .map(|p| p.position[a] + p.extents[a] as f64)
                .sum();
            s / (m as f64 * span)
        };
        metrics.o_x = push(0, instance.total_length() as f64);
        if d.count() >= 2 {
            metrics.o_y = push(1, instance.max_width() as f64);
        }
        if d.count() == 3 {
            metrics.o_z = push(2, instance.max_height() as f64);
        }
        if let Some(target) = instance.com_target() {
            let total = instance.total_weight() as f64;
            let axes = d.count().min(2);
            for (a, t) in target.iter().enumerate().take(axes) {
                let centroid: f64 = solution
                    .placements
                    .iter()
                    .zip(instance.items())
                    .map(|(p, it)| it.weight as f64 * (p.position[a] + p.extents[a] as f64 / 2.0))
                    .sum::<f64>()
                    / total;
                metrics.com_deviation += (centroid - t).powi(2);
            }
        }
    }
    let objective = w.bins * metrics.bins_used as f64
        + w.push * (metrics.o_x + metrics.o_y + metrics.o_z)
        + w.com * metrics.com_deviation;
    Evaluation { objective, metrics }
}
