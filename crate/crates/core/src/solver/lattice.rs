//! Exhaustive search on the integer position lattice for tiny instances.
//!
//! With integer item and bin dimensions, any packing that is feasible at
//! integer coordinates is found here, so this backend is an exact oracle on
//! that class. It keeps its own feasibility rules ([`lattice_feasible`]) to
//! cross-check the checker and the heuristics.

use std::time::Instant;

use super::{SolveStats, SolverBudget, SolverError, SolverResult};
use crate::checker;
use crate::model::{
    admissible_orientations, effective_dims, Instance, OrientationId, Placement, Solution,
};

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeConfig {
    pub max_items: usize,
    /// Upper limit on lattice placements per item (bins x orientations x points).
    pub max_points: u64,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        Self {
            max_items: 4,
            max_points: 200_000,
        }
    }
}

pub fn solve_exact_small(
    instance: &Instance,
    budget: &SolverBudget,
) -> Result<SolverResult, SolverError> {
    solve_exact_small_with(instance, budget, &LatticeConfig::default())
}

pub fn solve_exact_small_with(
    instance: &Instance,
    budget: &SolverBudget,
    config: &LatticeConfig,
) -> Result<SolverResult, SolverError> {
    budget.validate()?;
    let m = instance.item_count();
    if m > config.max_items {
        return Err(SolverError::TooLarge(format!(
            "{m} items exceed the lattice cap of {}",
            config.max_items
        )));
    }
    let options = Options::new(instance, 0);
    let points = options
        .per_item
        .iter()
        .map(|o| o.len() as u64)
        .max()
        .unwrap_or(0);
    if points > config.max_points {
        return Err(SolverError::TooLarge(format!(
            "{points} lattice placements per item exceed the cap of {}",
            config.max_points
        )));
    }
    let start = Instant::now();
    let mut search = Search {
        instance,
        options: &options,
        chosen: Vec::with_capacity(m),
        best: None,
        nodes: 0,
        node_limit: budget.max_iterations.max(1),
        exhausted: false,
    };
    search.dfs();
    let proven = !search.exhausted;
    let nodes = search.nodes;
    let candidates = match search.best {
        Some((_, placements)) => vec![Solution::with_occupied_bins(
            to_global(instance, placements),
            instance.bin_count(),
        )],
        None => Vec::new(),
    };
    let stats = SolveStats {
        backend: "exact-small".into(),
        iterations: nodes,
        wall_time: start.elapsed().as_secs_f64(),
        proven_optimal: proven,
        lower_bound: None,
    };
    SolverResult::finalize(instance, candidates, stats)
}

/// Visits every combination of bin, orientation and integer position for all
/// items, including positions one step outside each bin. Bin usage flags mark
/// the occupied bins. Returns the number of visited solutions.
pub fn enumerate_assignments(
    instance: &Instance,
    config: &LatticeConfig,
    mut visit: impl FnMut(&Solution),
) -> Result<u64, SolverError> {
    let m = instance.item_count();
    if m > config.max_items {
        return Err(SolverError::TooLarge(format!("{m} items")));
    }
    let options = Options::new(instance, 1);
    let mut idx = vec![0usize; m];
    let mut count = 0;
    if options.per_item.iter().any(|o| o.is_empty()) {
        return Ok(0);
    }
    loop {
        let placements: Vec<Local> = (0..m).map(|i| options.per_item[i][idx[i]]).collect();
        let sol =
            Solution::with_occupied_bins(to_global(instance, placements), instance.bin_count());
        visit(&sol);
        count += 1;
        let mut k = 0;
        loop {
            if k == m {
                return Ok(count);
            }
            idx[k] += 1;
            if idx[k] < options.per_item[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Feasibility under the lattice rules: integer positions inside the bin,
/// orientation-consistent extents, no shared interior, and every loading
/// feature (capacity, associations, incompatibility, priority, load bearing).
pub fn lattice_feasible(instance: &Instance, solution: &Solution) -> bool {
    let m = instance.item_count();
    let n = instance.bin_count();
    if solution.placements.len() != m || solution.bins_used.len() != n {
        return false;
    }
    let d = instance.dimensionality();
    let items = instance.items();
    let mut locals = Vec::with_capacity(m);
    for (i, p) in solution.placements.iter().enumerate() {
        if p.bin >= n || !solution.bins_used[p.bin] {
            return false;
        }
        if !instance.eligible_bins(items[i].category).contains(&p.bin) {
            return false;
        }
        match effective_dims(&items[i], d, p.orientation) {
            Ok(e) if e == p.extents => {}
            _ => return false,
        }
        let mut pos = [0i64; 3];
        for a in 0..3 {
            let v = if a == 0 {
                p.position[0] - instance.x_offset(p.bin) as f64
            } else {
                p.position[a]
            };
            if v.fract() != 0.0 || (a >= d.count() && v != 0.0) {
                return false;
            }
            pos[a] = v as i64;
        }
        let local = Local {
            bin: p.bin,
            orientation: p.orientation,
            ext: p.extents.map(|e| e as i64),
            pos,
        };
        if !inside(instance, &local) {
            return false;
        }
        locals.push(local);
    }
    for (j, bin) in instance.bins().iter().enumerate() {
        if let Some(cap) = bin.capacity {
            let load: u64 = (0..m)
                .filter(|&i| locals[i].bin == j)
                .map(|i| items[i].weight)
                .sum();
            if load > cap {
                return false;
            }
        }
    }
    for k in 0..m {
        for i in 0..k {
            if !compatible(instance, i, &locals[i], k, &locals[k]) {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Local {
    bin: usize,
    orientation: OrientationId,
    pos: [i64; 3],
    ext: [i64; 3],
}

fn inside(instance: &Instance, p: &Local) -> bool {
    let dims = instance.bins()[p.bin].dims;
    (0..instance.dimensionality().count())
        .all(|a| p.pos[a] >= 0 && p.pos[a] + p.ext[a] <= dims[a] as i64)
}

fn disjoint(a: &Local, b: &Local, axis: usize) -> bool {
    a.pos[axis] + a.ext[axis] <= b.pos[axis] || b.pos[axis] + b.ext[axis] <= a.pos[axis]
}

// Pair rules for items sharing a bin.
fn compatible(instance: &Instance, i: usize, a: &Local, k: usize, b: &Local) -> bool {
    if a.bin != b.bin {
        return true;
    }
    let d = instance.dimensionality().count();
    if (0..d).all(|axis| !disjoint(a, b, axis)) {
        return false;
    }
    let items = instance.items();
    let (ci, ck) = (items[i].category, items[k].category);
    if instance.are_incompatible(ci, ck) {
        return false;
    }
    if let Some(pr) = instance.priority() {
        let ax = pr.axis.index();
        if instance.delivered_before(i, k) && a.pos[ax] + a.ext[ax] > b.pos[ax] {
            return false;
        }
        if instance.delivered_before(k, i) && b.pos[ax] + b.ext[ax] > a.pos[ax] {
            return false;
        }
    }
    if d == 3 && ci != ck {
        let stacked = !disjoint(a, b, 0) && !disjoint(a, b, 1);
        let heavy = instance.heavy_categories();
        if stacked && heavy.contains(&ci) && a.pos[2] + a.ext[2] <= b.pos[2] {
            return false;
        }
        if stacked && heavy.contains(&ck) && b.pos[2] + b.ext[2] <= a.pos[2] {
            return false;
        }
    }
    true
}

fn to_global(instance: &Instance, locals: Vec<Local>) -> Vec<Placement> {
    locals
        .into_iter()
        .map(|l| {
            let mut position = l.pos.map(|v| v as f64);
            position[0] += instance.x_offset(l.bin) as f64;
            Placement {
                bin: l.bin,
                orientation: l.orientation,
                position,
                extents: l.ext.map(|v| v as u32),
            }
        })
        .collect()
}

struct Options {
    per_item: Vec<Vec<Local>>,
}

impl Options {
    /// Lattice placements per item; `margin` extends the range past each wall.
    fn new(instance: &Instance, margin: i64) -> Self {
        let d = instance.dimensionality();
        let per_item = instance
            .items()
            .iter()
            .map(|it| {
                let mut out = Vec::new();
                for (j, bin) in instance.bins().iter().enumerate() {
                    if margin == 0 && !instance.is_eligible(it.category, j) {
                        continue;
                    }
                    for k in admissible_orientations(it, d) {
                        let ext = effective_dims(it, d, k).unwrap().map(|v| v as i64);
                        let range = |a: usize| {
                            if a < d.count() {
                                -margin..=(bin.dims[a] as i64 - ext[a] + margin)
                            } else {
                                0..=0
                            }
                        };
                        for x in range(0) {
                            for y in range(1) {
                                for z in range(2) {
                                    out.push(Local {
                                        bin: j,
                                        orientation: k,
                                        pos: [x, y, z],
                                        ext,
                                    });
                                }
                            }
                        }
                    }
                }
                out
            })
            .collect();
        Self { per_item }
    }
}

struct Search<'a> {
    instance: &'a Instance,
    options: &'a Options,
    chosen: Vec<Local>,
    best: Option<(f64, Vec<Local>)>,
    nodes: u64,
    node_limit: u64,
    exhausted: bool,
}

impl Search<'_> {
    fn bound(&self) -> f64 {
        let inst = self.instance;
        let w = inst.weights();
        let d = inst.dimensionality().count();
        let m = inst.item_count() as f64;
        let mut bins: Vec<usize> = self.chosen.iter().map(|l| l.bin).collect();
        bins.sort_unstable();
        bins.dedup();
        let spans = [
            inst.total_length() as f64,
            inst.max_width() as f64,
            inst.max_height() as f64,
        ];
        let mut push = 0.0;
        for l in &self.chosen {
            for a in 0..d {
                let lo = l.pos[a] as f64
                    + if a == 0 {
                        inst.x_offset(l.bin) as f64
                    } else {
                        0.0
                    };
                push += (lo + l.ext[a] as f64) / (m * spans[a]);
            }
        }
        w.bins * bins.len() as f64 + w.push * push
    }

    fn dfs(&mut self) {
        let inst = self.instance;
        let i = self.chosen.len();
        if i == inst.item_count() {
            let sol = Solution::with_occupied_bins(
                to_global(inst, self.chosen.clone()),
                inst.bin_count(),
            );
            let value = checker::evaluate(inst, &sol).objective;
            if self.best.as_ref().is_none_or(|(b, _)| value < *b) {
                self.best = Some((value, self.chosen.clone()));
            }
            return;
        }
        let items = inst.items();
        let floor = match i.checked_sub(1) {
            Some(p) if items[p] == items[i] => Some(self.chosen[p]),
            _ => None,
        };
        for opt in &self.options.per_item[i] {
            if self.exhausted {
                return;
            }
            self.nodes += 1;
            if self.nodes > self.node_limit {
                self.exhausted = true;
                return;
            }
            if floor.is_some_and(|f| *opt < f) {
                continue;
            }
            if !self.extends(i, opt) {
                continue;
            }
            self.chosen.push(*opt);
            let prune = self.best.as_ref().is_some_and(|(b, _)| self.bound() >= *b);
            if !prune {
                self.dfs();
            }
            self.chosen.pop();
        }
    }

    fn extends(&self, i: usize, opt: &Local) -> bool {
        let inst = self.instance;
        let items = inst.items();
        if let Some(cap) = inst.bins()[opt.bin].capacity {
            let load: u64 = self
                .chosen
                .iter()
                .enumerate()
                .filter(|(_, l)| l.bin == opt.bin)
                .map(|(k, _)| items[k].weight)
                .sum();
            if load + items[i].weight > cap {
                return false;
            }
        }
        self.chosen
            .iter()
            .enumerate()
            .all(|(k, l)| compatible(inst, k, l, i, opt))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BinSpec, InstanceSpec, ItemSpec};
    use std::collections::BTreeMap;

    fn spec(bins: &[&[u32]], items: &[&[u32]]) -> InstanceSpec {
        InstanceSpec {
            dimensionality: bins[0].len() as u8,
            bins: bins
                .iter()
                .map(|b| BinSpec {
                    dims: b.to_vec(),
                    capacity: None,
                })
                .collect(),
            items: items
                .iter()
                .enumerate()
                .map(|(k, dims)| ItemSpec {
                    category: k as u32,
                    quantity: 1,
                    dims: dims.to_vec(),
                    weight: 1,
                })
                .collect(),
            associations: BTreeMap::new(),
            priority: None,
            incompatible: Vec::new(),
            heavy: Vec::new(),
            center_of_mass: None,
            weights: None,
        }
    }

    fn budget() -> SolverBudget {
        SolverBudget {
            max_iterations: 10_000_000,
            ..SolverBudget::default()
        }
    }

    #[test]
    fn side_by_side_squares() {
        let inst = Instance::new(spec(&[&[4, 2]], &[&[2, 2], &[2, 2]])).unwrap();
        let r = solve_exact_small(&inst, &budget()).unwrap();
        assert!(r.feasible && r.stats.proven_optimal);
        let best = r.best.unwrap();
        assert_eq!(best.bins_used_count(), 1);
        assert!(lattice_feasible(&inst, &best));
    }

    #[test]
    fn oversized_item_is_infeasible() {
        let inst = Instance::new(spec(&[&[3, 3, 3]], &[&[4, 1, 1]])).unwrap();
        let r = solve_exact_small(&inst, &budget()).unwrap();
        assert!(!r.feasible);
        assert!(r.best.is_none());
    }

    #[test]
    fn association_restricts_search() {
        let mut s = spec(&[&[1, 1], &[1, 2]], &[&[1, 2]]);
        let inst = Instance::new(s.clone()).unwrap();
        assert!(solve_exact_small(&inst, &budget()).unwrap().feasible);
        s.associations.insert(0, vec![0]);
        let inst = Instance::new(s).unwrap();
        assert!(!solve_exact_small(&inst, &budget()).unwrap().feasible);
    }

    #[test]
    fn cap_is_enforced() {
        let unit: &[u32] = &[1, 1];
        let inst = Instance::new(spec(&[&[9, 9]], &[unit; 5])).unwrap();
        assert!(matches!(
            solve_exact_small(&inst, &budget()),
            Err(SolverError::TooLarge(_))
        ));
    }

    #[test]
    fn enumeration_counts_every_combination() {
        // 2x1 item in a 2x2 bin: orientation 1 has 3 x 4 points with margin,
        // orientation 3 has 4 x 3
        let inst = Instance::new(spec(&[&[2, 2]], &[&[2, 1]])).unwrap();
        let mut feasible = 0;
        let n = enumerate_assignments(&inst, &LatticeConfig::default(), |s| {
            if lattice_feasible(&inst, s) {
                feasible += 1;
            }
        })
        .unwrap();
        assert_eq!(n, 24);
        assert_eq!(feasible, 4);
    }
}
