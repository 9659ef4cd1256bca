//! Exact bin-count minimization for one-dimensional instances.
//!
//! Bin subsets are tried in increasing size; for each subset a depth-first
//! search assigns items (longest first) under length, capacity, association
//! and incompatibility limits. The first subset size that admits a packing is
//! optimal. Inside a bin items are laid out contiguously in delivery order.

use std::time::Instant;

use super::{SolveStats, SolverBudget, SolverError, SolverResult};
use crate::model::{Dimensionality, Instance, Placement, Solution};

pub fn solve_exact_1d(
    instance: &Instance,
    budget: &SolverBudget,
) -> Result<SolverResult, SolverError> {
    budget.validate()?;
    if instance.dimensionality() != Dimensionality::One {
        return Err(SolverError::Dimensionality {
            expected: "1",
            found: instance.dimensionality(),
        });
    }
    let start = Instant::now();
    let lower = super::bins_lower_bound(instance);
    let mut search = Search::new(instance, budget.max_iterations);
    let n = instance.bin_count();
    let mut found = None;
    let mut proven = true;
    if instance.item_count() == 0 {
        found = Some(vec![]);
    } else {
        'sizes: for k in lower..=n {
            for subset in subsets(n, k) {
                match search.pack(&subset) {
                    Outcome::Packed(assign) => {
                        found = Some(assign);
                        break 'sizes;
                    }
                    Outcome::Infeasible => {}
                    Outcome::OutOfBudget => {
                        proven = false;
                        break 'sizes;
                    }
                }
            }
        }
    }
    let solution = match &found {
        Some(assign) => layout(instance, assign),
        None => layout(instance, &fallback(instance)),
    };
    let stats = SolveStats {
        backend: "exact1d".into(),
        iterations: search.nodes,
        wall_time: start.elapsed().as_secs_f64(),
        proven_optimal: proven,
        lower_bound: Some(lower),
    };
    SolverResult::finalize(instance, vec![solution], stats)
}

enum Outcome {
    Packed(Vec<usize>),
    Infeasible,
    OutOfBudget,
}

struct Search<'a> {
    instance: &'a Instance,
    /// Items by decreasing length.
    sequence: Vec<usize>,
    node_limit: u64,
    nodes: u64,
    found: Option<Vec<usize>>,
}

impl<'a> Search<'a> {
    fn new(instance: &'a Instance, node_limit: u64) -> Self {
        let items = instance.items();
        let mut sequence: Vec<usize> = (0..items.len()).collect();
        sequence.sort_by(|&a, &b| {
            items[b]
                .length()
                .cmp(&items[a].length())
                .then(items[b].weight.cmp(&items[a].weight))
                .then(items[a].category.cmp(&items[b].category))
                .then(a.cmp(&b))
        });
        Self {
            instance,
            sequence,
            node_limit: node_limit.max(1),
            nodes: 0,
            found: None,
        }
    }

    fn pack(&mut self, subset: &[usize]) -> Outcome {
        let inst = self.instance;
        let items = inst.items();
        let bins = inst.bins();
        let need_len: u64 = items.iter().map(|it| it.length() as u64).sum();
        let have_len: u64 = subset.iter().map(|&j| bins[j].dims[0] as u64).sum();
        if need_len > have_len {
            return Outcome::Infeasible;
        }
        if subset.iter().all(|&j| bins[j].capacity.is_some()) {
            let have: u64 = subset.iter().map(|&j| bins[j].capacity.unwrap()).sum();
            if inst.total_weight() > have {
                return Outcome::Infeasible;
            }
        }
        let mut state = State {
            len_left: subset.iter().map(|&j| bins[j].dims[0] as u64).collect(),
            cap_left: subset.iter().map(|&j| bins[j].capacity).collect(),
            members: vec![Vec::new(); subset.len()],
            assign: vec![usize::MAX; items.len()],
        };
        match self.dfs(subset, &mut state, 0) {
            Some(true) => Outcome::Packed(
                self.found
                    .take()
                    .expect("packing recorded")
                    .iter()
                    .map(|&slot| subset[slot])
                    .collect(),
            ),
            Some(false) => Outcome::Infeasible,
            None => Outcome::OutOfBudget,
        }
    }

    // Some(true) packed, Some(false) exhausted, None out of budget.
    fn dfs(&mut self, subset: &[usize], st: &mut State, depth: usize) -> Option<bool> {
        if depth == self.sequence.len() {
            let full = st.members.iter().all(|m| !m.is_empty());
            if full {
                self.found = Some(st.assign.clone());
            }
            return Some(full);
        }
        self.nodes += 1;
        if self.nodes > self.node_limit {
            return None;
        }
        // every still-empty bin needs at least one of the remaining items
        let empty = st.members.iter().filter(|m| m.is_empty()).count();
        if empty > self.sequence.len() - depth {
            return Some(false);
        }
        let inst = self.instance;
        let items = inst.items();
        let i = self.sequence[depth];
        let it = &items[i];
        // identical consecutive items take non-decreasing slots
        let min_slot = match depth.checked_sub(1).map(|p| self.sequence[p]) {
            Some(prev) if items[prev] == *it => st.assign[prev],
            _ => 0,
        };
        for slot in min_slot..subset.len() {
            let j = subset[slot];
            if !inst.is_eligible(it.category, j) || st.len_left[slot] < it.length() as u64 {
                continue;
            }
            if st.cap_left[slot].is_some_and(|c| c < it.weight) {
                continue;
            }
            if st.members[slot]
                .iter()
                .any(|&k| inst.are_incompatible(items[k].category, it.category))
            {
                continue;
            }
            st.len_left[slot] -= it.length() as u64;
            if let Some(c) = st.cap_left[slot].as_mut() {
                *c -= it.weight;
            }
            st.members[slot].push(i);
            st.assign[i] = slot;
            let r = self.dfs(subset, st, depth + 1);
            st.members[slot].pop();
            st.assign[i] = usize::MAX;
            st.len_left[slot] += it.length() as u64;
            if let Some(c) = st.cap_left[slot].as_mut() {
                *c += it.weight;
            }
            match r {
                Some(false) => {}
                other => return other,
            }
        }
        Some(false)
    }
}

struct State {
    len_left: Vec<u64>,
    cap_left: Vec<Option<u64>>,
    members: Vec<Vec<usize>>,
    assign: Vec<usize>,
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in start..n {
            if n - j < k - cur.len() {
                break;
            }
            cur.push(j);
            rec(j + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Contiguous layout: per bin, items in delivery order, then longest first.
fn layout(instance: &Instance, assign: &[usize]) -> Solution {
    let items = instance.items();
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = instance
            .priority_rank(items[a].category)
            .unwrap_or(usize::MAX);
        let rb = instance
            .priority_rank(items[b].category)
            .unwrap_or(usize::MAX);
        ra.cmp(&rb)
            .then(items[b].length().cmp(&items[a].length()))
            .then(a.cmp(&b))
    });
    let mut cursor = vec![0u64; instance.bin_count()];
    let mut placements = vec![None; items.len()];
    for i in order {
        let j = assign[i];
        placements[i] = Some(Placement {
            bin: j,
            orientation: 1,
            position: [cursor[j] as f64, 0.0, 0.0],
            extents: items[i].dims,
        });
        cursor[j] += items[i].length() as u64;
    }
    let placements = placements.into_iter().map(Option::unwrap).collect();
    let used = (0..instance.bin_count())
        .map(|j| assign.contains(&j))
        .collect();
    Solution::from_local(instance, placements, used)
}

/// Best-effort assignment for infeasible or unfinished searches: first fit by
/// decreasing length, overflowing into the eligible bin with the most room.
fn fallback(instance: &Instance) -> Vec<usize> {
    let items = instance.items();
    let bins = instance.bins();
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| items[b].length().cmp(&items[a].length()).then(a.cmp(&b)));
    let mut room: Vec<i64> = bins.iter().map(|b| b.dims[0] as i64).collect();
    let mut cap: Vec<Option<i64>> = bins.iter().map(|b| b.capacity.map(|c| c as i64)).collect();
    let mut assign = vec![0; items.len()];
    for i in order {
        let it = &items[i];
        let eligible = instance.eligible_bins(it.category);
        let fits = eligible.iter().copied().find(|&j| {
            room[j] >= it.length() as i64 && cap[j].is_none_or(|c| c >= it.weight as i64)
        });
        let j = fits.unwrap_or_else(|| {
            *eligible
                .iter()
                .max_by_key(|&&j| (room[j], std::cmp::Reverse(j)))
                .unwrap()
        });
        room[j] -= it.length() as i64;
        if let Some(c) = cap[j].as_mut() {
            *c -= it.weight as i64;
        }
        assign[i] = j;
    }
    assign
}
