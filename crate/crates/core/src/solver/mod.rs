//! Solver backends and the result types they share.
//!
//! Every backend hands its candidate solutions to [`SolverResult::finalize`],
//! which re-checks them with [`crate::checker`] before choosing the best.

pub mod anneal;
pub mod exact1d;
pub mod lattice;
pub mod placement;
pub mod remote;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::builder::BuildError;
use crate::checker::{self, CheckError, ViolationReport};
use crate::model::{Dimensionality, Instance, Solution};
use crate::presolve::PresolveError;

pub use anneal::{solve_anneal, AnnealConfig};
pub use exact1d::solve_exact_1d;
pub use lattice::{solve_exact_small, LatticeConfig};
pub use remote::{solve_remote, RemoteError};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverBudget {
    pub time_limit: Duration,
    /// Per restart for the annealer, search nodes for the exact backends.
    pub max_iterations: u64,
    pub restarts: usize,
    pub seed: u64,
    /// Ignore the wall-clock limit so results depend only on the other fields.
    pub deterministic: bool,
}

impl Default for SolverBudget {
    fn default() -> Self {
        Self {
            time_limit: Duration::from_secs(60),
            max_iterations: 20_000,
            restarts: 4,
            seed: 0,
            deterministic: false,
        }
    }
}

impl SolverBudget {
    pub fn validate(&self) -> Result<(), SolverError> {
        if self.time_limit.is_zero() {
            return Err(SolverError::Budget("time limit must be positive".into()));
        }
        if self.restarts == 0 {
            return Err(SolverError::Budget(
                "at least one restart is required".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Anneal,
    Exact1d,
    ExactSmall,
    Remote,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Anneal => "anneal",
            Backend::Exact1d => "exact1d",
            Backend::ExactSmall => "exact-small",
            Backend::Remote => "remote",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "anneal" => Ok(Backend::Anneal),
            "exact1d" => Ok(Backend::Exact1d),
            "exact-small" => Ok(Backend::ExactSmall),
            "remote" => Ok(Backend::Remote),
            _ => Err(format!("unknown backend `{s}`")),
        }
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid budget: {0}")]
    Budget(String),
    #[error("backend requires dimensionality {expected}, instance has {found}")]
    Dimensionality {
        expected: &'static str,
        found: Dimensionality,
    },
    #[error("instance too large for this backend: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Presolve(#[from] PresolveError),
    #[error("backend produced a malformed solution: {0}")]
    Check(#[from] CheckError),
    #[error(transparent)]
    Remote(#[from] RemoteError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub solution: Solution,
    pub objective: f64,
    pub feasible: bool,
    pub report: ViolationReport,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SolveStats {
    pub backend: String,
    pub iterations: u64,
    /// Seconds.
    pub wall_time: f64,
    pub proven_optimal: bool,
    /// Lower bound on bins used, when the backend derives one.
    pub lower_bound: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub best: Option<Solution>,
    pub best_index: Option<usize>,
    pub feasible: bool,
    pub samples: Vec<Sample>,
    pub stats: SolveStats,
}

impl SolverResult {
    /// Checks every candidate and selects the minimum-objective feasible one.
    /// Without a feasible candidate the least violating one is kept as an
    /// infeasible best so callers can report diagnostics. Ties go to the
    /// earliest candidate.
    pub fn finalize(
        instance: &Instance,
        candidates: Vec<Solution>,
        stats: SolveStats,
    ) -> Result<Self, SolverError> {
        let mut samples = Vec::with_capacity(candidates.len());
        for solution in candidates {
            let report = checker::check(instance, &solution)?;
            let objective = checker::evaluate(instance, &solution).objective;
            samples.push(Sample {
                feasible: report.feasible,
                solution,
                objective,
                report,
            });
        }
        let key = |s: &Sample| {
            (
                !s.feasible,
                if s.feasible {
                    0.0
                } else {
                    s.report.total_magnitude()
                },
                s.objective,
            )
        };
        let mut best_index: Option<usize> = None;
        for (k, s) in samples.iter().enumerate() {
            match best_index {
                Some(b)
                    if key(&samples[b]).partial_cmp(&key(s))
                        != Some(std::cmp::Ordering::Greater) => {}
                _ => best_index = Some(k),
            }
        }
        let best = best_index.map(|k| samples[k].solution.clone());
        let feasible = best_index.is_some_and(|k| samples[k].feasible);
        Ok(Self {
            best,
            best_index,
            feasible,
            samples,
            stats,
        })
    }

    pub fn best_sample(&self) -> Option<&Sample> {
        self.best_index.map(|k| &self.samples[k])
    }
}

/// Fewest bins whose combined measure and capacity can hold every item.
pub(crate) fn bins_lower_bound(instance: &Instance) -> usize {
    let d = instance.dimensionality();
    let need_measure: u64 = instance.items().iter().map(|it| it.measure(d)).sum();
    let need_weight: u64 = instance.total_weight();
    if instance.item_count() == 0 {
        return 0;
    }
    let mut measures: Vec<u64> = instance.bins().iter().map(|b| b.measure(d)).collect();
    measures.sort_unstable_by(|a, b| b.cmp(a));
    let mut caps: Vec<Option<u64>> = instance.bins().iter().map(|b| b.capacity).collect();
    caps.sort_unstable_by(|a, b| match (a, b) {
        (None, None) => std::cmp::Ordering::Equal,
        (None, _) => std::cmp::Ordering::Less,
        (_, None) => std::cmp::Ordering::Greater,
        (Some(x), Some(y)) => y.cmp(x),
    });
    let by_measure = prefix_reach(measures.iter().map(|&v| Some(v)), need_measure);
    let by_weight = prefix_reach(caps.into_iter(), need_weight);
    by_measure.max(by_weight).max(1)
}

// Smallest k such that the first k amounts cover `need`; `None` is unbounded.
fn prefix_reach(amounts: impl Iterator<Item = Option<u64>>, need: u64) -> usize {
    let mut total = 0u64;
    let mut k = 0;
    for a in amounts {
        if total >= need {
            return k;
        }
        k += 1;
        match a {
            None => return k,
            Some(v) => total = total.saturating_add(v),
        }
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BinSpec, InstanceSpec, ItemSpec, Placement};
    use std::collections::BTreeMap;

    fn line(bins: &[(u32, Option<u64>)], items: &[(u32, u64)]) -> Instance {
        Instance::new(InstanceSpec {
            dimensionality: 1,
            bins: bins
                .iter()
                .map(|&(l, capacity)| BinSpec {
                    dims: vec![l],
                    capacity,
                })
                .collect(),
            items: items
                .iter()
                .enumerate()
                .map(|(k, &(l, w))| ItemSpec {
                    category: k as u32,
                    quantity: 1,
                    dims: vec![l],
                    weight: w,
                })
                .collect(),
            associations: BTreeMap::new(),
            priority: None,
            incompatible: Vec::new(),
            heavy: Vec::new(),
            center_of_mass: None,
            weights: None,
        })
        .unwrap()
    }

    fn put(bin: usize, x: f64, l: u32) -> Placement {
        Placement {
            bin,
            orientation: 1,
            position: [x, 0.0, 0.0],
            extents: [l, 0, 0],
        }
    }

    #[test]
    fn budget_validation() {
        assert!(SolverBudget::default().validate().is_ok());
        let mut b = SolverBudget {
            restarts: 0,
            ..SolverBudget::default()
        };
        assert!(b.validate().is_err());
        b.restarts = 1;
        b.time_limit = Duration::ZERO;
        assert!(b.validate().is_err());
    }

    #[test]
    fn finalize_prefers_feasible_then_objective() {
        let inst = line(&[(10, None), (10, None)], &[(5, 1), (5, 1)]);
        let two_bins = Solution::with_occupied_bins(vec![put(0, 0.0, 5), put(1, 10.0, 5)], 2);
        let one_bin = Solution::with_occupied_bins(vec![put(0, 0.0, 5), put(0, 5.0, 5)], 2);
        let broken = Solution::with_occupied_bins(vec![put(0, 0.0, 5), put(0, 1.0, 5)], 2);
        let r = SolverResult::finalize(
            &inst,
            vec![broken.clone(), two_bins, one_bin.clone()],
            SolveStats::default(),
        )
        .unwrap();
        assert!(r.feasible);
        assert_eq!(r.best_index, Some(2));
        assert_eq!(r.best, Some(one_bin));

        let r = SolverResult::finalize(&inst, vec![broken.clone()], SolveStats::default()).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.best, Some(broken));
    }

    #[test]
    fn lower_bound_counts_length_and_weight() {
        let inst = line(
            &[(10, Some(5)), (10, Some(5)), (10, None)],
            &[(4, 4), (4, 4)],
        );
        assert_eq!(bins_lower_bound(&inst), 1);
        let inst = line(&[(10, Some(5)), (10, Some(5))], &[(4, 4), (4, 4)]);
        assert_eq!(bins_lower_bound(&inst), 2);
        let inst = line(
            &[(5, None), (5, None), (5, None)],
            &[(4, 0), (4, 0), (4, 0)],
        );
        assert_eq!(bins_lower_bound(&inst), 3);
    }

    #[test]
    fn backend_names_round_trip() {
        for b in [
            Backend::Anneal,
            Backend::Exact1d,
            Backend::ExactSmall,
            Backend::Remote,
        ] {
            assert_eq!(b.name().parse::<Backend>().unwrap(), b);
        }
    }
}
