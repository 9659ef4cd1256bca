//! The `.sol.json` document written by `solve`.

use serde::{Deserialize, Serialize};

use super::IoError;
use crate::builder::build_model;
use crate::checker::{self, Metrics, Violation};
use crate::model::{Instance, OrientationId, Placement, Solution};
use crate::presolve::{presolve, PresolveReport};
use crate::solver::SolverResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementRecord {
    pub item: usize,
    pub category: u32,
    pub bin: usize,
    pub orientation: OrientationId,
    pub extents: Vec<u32>,
    /// Global coordinates, bins laid end to end on x.
    pub position: Vec<f64>,
    pub local_position: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinRecord {
    pub bin: usize,
    pub used: bool,
    pub items: Vec<usize>,
    pub load: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub capacity: Option<u64>,
    /// Occupied length, area or volume over the bin's.
    pub fill: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRecord {
    pub iterations: u64,
    pub proven_optimal: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<usize>,
    /// Seconds; left out of deterministic runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionDocument {
    pub backend: String,
    pub feasible: bool,
    pub objective: Option<f64>,
    pub metrics: Option<Metrics>,
    pub placements: Vec<PlacementRecord>,
    pub bins: Vec<BinRecord>,
    pub presolve: Option<PresolveReport>,
    pub violations: Vec<Violation>,
    pub stats: StatsRecord,
}

impl SolutionDocument {
    pub fn new(instance: &Instance, result: &SolverResult) -> Self {
        let d = instance.dimensionality();
        let dc = d.count();
        let presolve = build_model(instance)
            .ok()
            .and_then(|mut m| presolve(&mut m, instance).ok());
        let stats = StatsRecord {
            iterations: result.stats.iterations,
            proven_optimal: result.stats.proven_optimal,
            lower_bound: result.stats.lower_bound,
            wall_time: Some(result.stats.wall_time),
        };
        let mut doc = SolutionDocument {
            backend: result.stats.backend.clone(),
            feasible: result.feasible,
            objective: None,
            metrics: None,
            placements: Vec::new(),
            bins: Vec::new(),
            presolve,
            violations: Vec::new(),
            stats,
        };
        let Some(sample) = result.best_sample() else {
            return doc;
        };
        let sol = &sample.solution;
        let eval = checker::evaluate(instance, sol);
        doc.objective = Some(eval.objective);
        doc.metrics = Some(eval.metrics);
        doc.violations = sample.report.violations.clone();
        let items = instance.items();
        doc.placements = sol
            .placements
            .iter()
            .enumerate()
            .map(|(i, p)| PlacementRecord {
                item: i,
                category: items[i].category,
                bin: p.bin,
                orientation: p.orientation,
                extents: p.extents[..dc].to_vec(),
                position: p.position[..dc].to_vec(),
                local_position: sol.local_position(instance, i)[..dc].to_vec(),
            })
            .collect();
        doc.bins = instance
            .bins()
            .iter()
            .enumerate()
            .map(|(j, b)| {
                let members: Vec<usize> = (0..items.len())
                    .filter(|&i| sol.placements[i].bin == j)
                    .collect();
                let occupied: u64 = members
                    .iter()
                    .map(|&i| {
                        sol.placements[i].extents[..dc]
                            .iter()
                            .map(|&e| e as u64)
                            .product::<u64>()
                    })
                    .sum();
                BinRecord {
                    bin: j,
                    used: sol.bins_used[j],
                    load: members.iter().map(|&i| items[i].weight).sum(),
                    items: members,
                    capacity: b.capacity,
                    fill: occupied as f64 / b.measure(d) as f64,
                }
            })
            .collect();
        doc
    }

    /// Drops timing so identical runs serialize identically.
    pub fn without_timing(mut self) -> Self {
        self.stats.wall_time = None;
        self
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("document serializes");
        out.push(b'\n');
        out
    }

    /// The packing described by the document.
    pub fn solution(&self, instance: &Instance) -> Result<Solution, IoError> {
        let m = instance.item_count();
        let n = instance.bin_count();
        let dc = instance.dimensionality().count();
        if self.placements.len() != m {
            return Err(IoError::Solution(format!(
                "{} placements for {m} items",
                self.placements.len()
            )));
        }
        if self.bins.len() != n {
            return Err(IoError::Solution(format!(
                "{} bins for {n} bins",
                self.bins.len()
            )));
        }
        let mut placements = Vec::with_capacity(m);
        for (i, rec) in self.placements.iter().enumerate() {
            if rec.item != i {
                return Err(IoError::Solution(format!(
                    "placement {i} is for item {}",
                    rec.item
                )));
            }
            if rec.position.len() != dc || rec.extents.len() != dc {
                return Err(IoError::Solution(format!(
                    "placement {i}: expected {dc} coordinates"
                )));
            }
            let mut position = [0.0; 3];
            let mut extents = [0; 3];
            position[..dc].copy_from_slice(&rec.position);
            extents[..dc].copy_from_slice(&rec.extents);
            placements.push(Placement {
                bin: rec.bin,
                orientation: rec.orientation,
                position,
                extents,
            });
        }
        let mut used = vec![false; n];
        for b in &self.bins {
            if b.bin >= n {
                return Err(IoError::Solution(format!("unknown bin {}", b.bin)));
            }
            used[b.bin] = b.used;
        }
        Ok(Solution::new(placements, used))
    }
}

pub fn write_solution(instance: &Instance, result: &SolverResult) -> Vec<u8> {
    SolutionDocument::new(instance, result).to_bytes()
}

pub fn read_solution(bytes: &[u8], instance: &Instance) -> Result<Solution, IoError> {
    let doc: SolutionDocument = serde_json::from_slice(bytes)?;
    doc.solution(instance)
}
