//! Simulated annealing over integer placements.
//!
//! A restart starts from a greedy extreme-point construction and keeps a
//! partial packing in which every placed item is feasible; items that could
//! not be placed are carried as a penalized pool. Moves only ever produce
//! placements that pass [`Packer::fits`], so fixed relative positions
//! (priorities, load bearing) act as hard filters.

use std::time::Instant;

use log::debug;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::placement::{axis_order, default_sequence, key, Packer, Slot};
use super::{SolveStats, SolverBudget, SolverError, SolverResult};
use crate::model::{Axis, Instance, Solution};

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealConfig {
    /// Target acceptance ratio of worsening moves at the start.
    pub initial_acceptance: f64,
    /// Temperature factor applied after every sweep of `m` iterations.
    pub cooling: f64,
    /// Penalty growth per sweep while items remain unplaced.
    pub penalty_growth: f64,
    /// Stop a restart after this many iterations without a new best.
    pub patience: u64,
    /// Weight of the concave fill term that rewards emptying bins, relative
    /// to the bin weight.
    pub shaping: f64,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            initial_acceptance: 0.8,
            cooling: 0.97,
            penalty_growth: 2.0,
            patience: 4_000,
            shaping: 0.1,
        }
    }
}

pub fn solve_anneal(
    instance: &Instance,
    budget: &SolverBudget,
) -> Result<SolverResult, SolverError> {
    solve_anneal_with(instance, budget, &AnnealConfig::default())
}

pub fn solve_anneal_with(
    instance: &Instance,
    budget: &SolverBudget,
    config: &AnnealConfig,
) -> Result<SolverResult, SolverError> {
    budget.validate()?;
    let start = Instant::now();
    let packer = Packer::new(instance)?;
    if instance.item_count() == 0 {
        let empty = Solution::new(Vec::new(), vec![false; instance.bin_count()]);
        let stats = SolveStats {
            backend: "anneal".into(),
            wall_time: start.elapsed().as_secs_f64(),
            ..SolveStats::default()
        };
        return SolverResult::finalize(instance, vec![empty], stats);
    }
    let deadline = (!budget.deterministic).then(|| start + budget.time_limit);
    let runs: Vec<(Vec<Slot>, u64)> = (0..budget.restarts)
        .into_par_iter()
        .map(|r| {
            let seed = budget.seed.wrapping_add(r as u64);
            Restart::new(&packer, config, seed, r).run(budget.max_iterations, deadline)
        })
        .collect();
    let iterations = runs.iter().map(|r| r.1).sum();
    let candidates = runs.iter().map(|(s, _)| packer.to_solution(s)).collect();
    let stats = SolveStats {
        backend: "anneal".into(),
        iterations,
        wall_time: start.elapsed().as_secs_f64(),
        proven_optimal: false,
        lower_bound: Some(super::bins_lower_bound(instance)),
    };
    SolverResult::finalize(instance, candidates, stats)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Score {
    total: f64,
    objective: f64,
    unplaced: usize,
}

struct Restart<'p, 'a> {
    packer: &'p Packer<'a>,
    config: &'p AnnealConfig,
    rng: ChaCha8Rng,
    order: [usize; 3],
    slots: Vec<Slot>,
    penalty: f64,
    undo: Vec<(usize, Slot)>,
}

impl<'p, 'a> Restart<'p, 'a> {
    fn new(packer: &'p Packer<'a>, config: &'p AnnealConfig, seed: u64, index: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = packer.instance;
        let mut bins: Vec<usize> = (0..inst.bin_count()).collect();
        if index == 0 {
            bins.sort_by(|&a, &b| {
                packer.bin_measure[b]
                    .total_cmp(&packer.bin_measure[a])
                    .then(a.cmp(&b))
            });
        } else {
            bins.shuffle(&mut rng);
        }
        let order = axis_order(inst);
        let slots = packer.construct(&default_sequence(packer), &bins, &order);
        let penalty = inst.weights().bins.max(1.0);
        Self {
            packer,
            config,
            rng,
            order,
            slots,
            penalty,
            undo: Vec::new(),
        }
    }

    fn score(&self) -> Score {
        let p = self.packer;
        let inst = p.instance;
        let w = inst.weights();
        let d = p.d.count();
        let m = self.slots.len() as f64;
        let n = p.bin_dims.len();
        let mut fill = vec![0.0; n];
        let mut push = [0.0f64; 3];
        let mut com = [0.0f64; 2];
        let mut unplaced = 0;
        let mut missing = 0.0;
        let max_bin = p.bin_measure.iter().cloned().fold(0.0, f64::max);
        let spans = [Axis::X, Axis::Y, Axis::Z].map(|a| inst.axis_span(a));
        for (i, s) in self.slots.iter().enumerate() {
            if !s.placed {
                unplaced += 1;
                missing += 1.0 + p.measure[i] / max_bin;
                for v in push.iter_mut().take(d) {
                    *v += 1.0;
                }
                continue;
            }
            fill[s.bin] += p.measure[i];
            let offset = inst.x_offset(s.bin) as f64;
            for a in 0..d {
                let lo = s.pos[a] as f64 + if a == 0 { offset } else { 0.0 };
                push[a] += (lo + s.ext[a] as f64) / spans[a];
                if a < 2 {
                    com[a] += inst.items()[i].weight as f64 * (lo + s.ext[a] as f64 / 2.0);
                }
            }
        }
        let used = fill.iter().filter(|&&f| f > 0.0).count() as f64;
        let mut objective = w.bins * used + w.push * push.iter().sum::<f64>() / m;
        if let (Some(target), true) = (inst.com_target(), w.com > 0.0) {
            let total = inst.total_weight() as f64;
            let dev: f64 = (0..d.min(2))
                .map(|a| (com[a] / total - target[a]).powi(2))
                .sum();
            objective += w.com * dev;
        }
        let shaping: f64 = fill
            .iter()
            .zip(&p.bin_measure)
            .map(|(f, b)| (f / b).sqrt())
            .sum::<f64>()
            * self.config.shaping
            * w.bins;
        Score {
            total: objective + shaping + self.penalty * missing,
            objective,
            unplaced,
        }
    }

    fn set(&mut self, i: usize, slot: Slot) {
        self.undo.push((i, self.slots[i]));
        self.slots[i] = slot;
    }

    fn lift(&mut self, i: usize) {
        let mut s = self.slots[i];
        s.placed = false;
        self.set(i, s);
    }

    fn revert(&mut self) {
        while let Some((i, s)) = self.undo.pop() {
            self.slots[i] = s;
        }
    }

    // Chooses among feasible candidates: usually the lowest, sometimes any.
    fn pick(&mut self, mut cands: Vec<Slot>) -> Option<Slot> {
        if cands.is_empty() {
            return None;
        }
        if self.rng.gen_bool(0.3) {
            let k = self.rng.gen_range(0..cands.len());
            return Some(cands.swap_remove(k));
        }
        let order = self.order;
        cands.into_iter().min_by_key(|c| key(c, &order))
    }

    fn random_shape(&mut self, i: usize) -> (u8, [i64; 3]) {
        let shapes = &self.packer.shapes[i];
        shapes[self.rng.gen_range(0..shapes.len())]
    }

    fn relocate(&mut self) -> bool {
        let m = self.slots.len();
        let pool: Vec<usize> = (0..m).filter(|&i| !self.slots[i].placed).collect();
        let i = if !pool.is_empty() && self.rng.gen_bool(0.5) {
            pool[self.rng.gen_range(0..pool.len())]
        } else {
            self.rng.gen_range(0..m)
        };
        let current = self.slots[i];
        let eligible = &self.packer.eligible[i];
        let bin = if current.placed && self.rng.gen_bool(0.3) {
            current.bin
        } else {
            eligible[self.rng.gen_range(0..eligible.len())]
        };
        let (k, ext) = if self.rng.gen_bool(0.5) {
            (current.orientation, current.ext)
        } else {
            self.random_shape(i)
        };
        self.lift(i);
        let cands = self.packer.candidates(&self.slots, i, bin, k, ext);
        match self.pick(cands) {
            Some(s) if s != current => {
                self.set(i, s);
                true
            }
            _ => false,
        }
    }

    fn swap(&mut self) -> bool {
        let m = self.slots.len();
        let (a, b) = (self.rng.gen_range(0..m), self.rng.gen_range(0..m));
        let (sa, sb) = (self.slots[a], self.slots[b]);
        if !sa.placed || !sb.placed || sa.bin == sb.bin {
            return false;
        }
        let p = self.packer;
        if !p.eligible[a].contains(&sb.bin) || !p.eligible[b].contains(&sa.bin) {
            return false;
        }
        self.lift(a);
        self.lift(b);
        for (i, bin) in [(a, sb.bin), (b, sa.bin)] {
            match p.best_in_bin(&self.slots, i, bin, &self.order) {
                Some(s) => self.set(i, s),
                None => return false,
            }
        }
        true
    }

    fn reorient(&mut self) -> bool {
        let m = self.slots.len();
        let i = self.rng.gen_range(0..m);
        let current = self.slots[i];
        if !current.placed || self.packer.shapes[i].len() < 2 {
            return false;
        }
        let (k, ext) = self.random_shape(i);
        if k == current.orientation {
            return false;
        }
        let mut same = current;
        same.orientation = k;
        same.ext = ext;
        self.lift(i);
        if self.packer.fits(&self.slots, i, &same) {
            self.set(i, same);
            return true;
        }
        let cands = self.packer.candidates(&self.slots, i, current.bin, k, ext);
        match self.pick(cands) {
            Some(s) => {
                self.set(i, s);
                true
            }
            None => false,
        }
    }

    fn nudge(&mut self) -> bool {
        let m = self.slots.len();
        let i = self.rng.gen_range(0..m);
        let current = self.slots[i];
        if !current.placed {
            return false;
        }
        let d = self.packer.d.count();
        let a = self.rng.gen_range(0..d);
        let mut moved = current;
        if self.rng.gen_bool(0.5) {
            // slide toward the origin until contact
            let mut stop = 0;
            for (k, s) in self.slots.iter().enumerate() {
                if k == i || !s.placed || s.bin != current.bin {
                    continue;
                }
                let face = s.pos[a] + s.ext[a];
                let shadow = (0..d).filter(|&b| b != a).all(|b| {
                    s.pos[b] < current.pos[b] + current.ext[b]
                        && current.pos[b] < s.pos[b] + s.ext[b]
                });
                if shadow && face <= current.pos[a] {
                    stop = stop.max(face);
                }
            }
            moved.pos[a] = stop;
        } else {
            let room = self.packer.bin_dims[current.bin][a] - current.ext[a];
            if room <= 0 {
                return false;
            }
            let reach = (room / 4).max(1);
            let delta = self.rng.gen_range(-reach..=reach);
            moved.pos[a] = (current.pos[a] + delta).clamp(0, room);
        }
        if moved == current {
            return false;
        }
        self.lift(i);
        if self.packer.fits(&self.slots, i, &moved) {
            self.set(i, moved);
            true
        } else {
            false
        }
    }

    fn empty_bin(&mut self) -> bool {
        let p = self.packer;
        let n = p.bin_dims.len();
        let mut fill = vec![0.0; n];
        for (i, s) in self.slots.iter().enumerate() {
            if s.placed {
                fill[s.bin] += p.measure[i];
            }
        }
        let used: Vec<usize> = (0..n).filter(|&j| fill[j] > 0.0).collect();
        if used.len() < 2 {
            return false;
        }
        // favour bins with little content
        let weights: Vec<f64> = used
            .iter()
            .map(|&j| 1.0 - fill[j] / p.bin_measure[j] + 0.05)
            .collect();
        let total: f64 = weights.iter().sum();
        let mut r = self.rng.gen_range(0.0..total);
        let mut victim = used[0];
        for (k, w) in weights.iter().enumerate() {
            if r < *w {
                victim = used[k];
                break;
            }
            r -= w;
        }
        let mut members: Vec<usize> = (0..self.slots.len())
            .filter(|&i| self.slots[i].placed && self.slots[i].bin == victim)
            .collect();
        members.sort_by(|&a, &b| p.measure[b].total_cmp(&p.measure[a]).then(a.cmp(&b)));
        for &i in &members {
            self.lift(i);
        }
        let mut targets: Vec<usize> = used.iter().copied().filter(|&j| j != victim).collect();
        targets.sort_by(|&a, &b| {
            (fill[b] / p.bin_measure[b])
                .total_cmp(&(fill[a] / p.bin_measure[a]))
                .then(a.cmp(&b))
        });
        for &i in &members {
            let spot = targets
                .iter()
                .filter(|j| p.eligible[i].contains(j))
                .find_map(|&j| p.best_in_bin(&self.slots, i, j, &self.order));
            match spot {
                Some(s) => self.set(i, s),
                None => return false,
            }
        }
        true
    }

    fn repack(&mut self) -> bool {
        let p = self.packer;
        let n = p.bin_dims.len();
        let bin = self.rng.gen_range(0..n);
        let mut members: Vec<usize> = (0..self.slots.len())
            .filter(|&i| self.slots[i].placed && self.slots[i].bin == bin)
            .collect();
        let pool: Vec<usize> = (0..self.slots.len())
            .filter(|&i| !self.slots[i].placed && p.eligible[i].contains(&bin))
            .collect();
        if !pool.is_empty() && self.rng.gen_bool(0.5) {
            members.push(pool[self.rng.gen_range(0..pool.len())]);
        }
        if members.is_empty() {
            return false;
        }
        let inst = p.instance;
        if self.rng.gen_bool(0.5) {
            members.shuffle(&mut self.rng);
        } else {
            members.sort_by(|&a, &b| p.measure[b].total_cmp(&p.measure[a]).then(a.cmp(&b)));
        }
        // priority ranks must be decoded first to keep the front free
        members.sort_by_key(|&i| {
            inst.priority_rank(inst.items()[i].category)
                .unwrap_or(usize::MAX)
        });
        for &i in &members {
            self.lift(i);
        }
        for &i in &members {
            if let Some(s) = p.best_in_bin(&self.slots, i, bin, &self.order) {
                self.set(i, s);
            }
        }
        true
    }

    fn propose(&mut self) -> bool {
        self.undo.clear();
        let roll = self.rng.gen_range(0..100);
        let changed = match roll {
            0..=39 => self.relocate(),
            40..=54 => self.swap(),
            55..=64 => self.reorient(),
            65..=81 => self.nudge(),
            82..=90 => self.empty_bin(),
            _ => self.repack(),
        };
        if !changed {
            self.revert();
        }
        changed
    }

    fn initial_temperature(&mut self, base: f64) -> f64 {
        let mut deltas = Vec::new();
        for _ in 0..60 {
            if self.propose() {
                let s = self.score().total;
                if s > base {
                    deltas.push(s - base);
                }
                self.revert();
            }
        }
        let mean = if deltas.is_empty() {
            1e-3 * self.packer.instance.weights().bins.max(1.0)
        } else {
            deltas.iter().sum::<f64>() / deltas.len() as f64
        };
        mean / (1.0 / self.config.initial_acceptance).ln()
    }

    fn run(mut self, max_iterations: u64, deadline: Option<Instant>) -> (Vec<Slot>, u64) {
        let m = self.slots.len() as u64;
        let mut current = self.score();
        let mut best = self.slots.clone();
        let mut best_key = (current.unplaced, current.objective);
        let mut temperature = self.initial_temperature(current.total);
        let mut since_best = 0;
        let mut it = 0;
        while it < max_iterations {
            it += 1;
            if it % m.max(1) == 0 {
                temperature *= self.config.cooling;
                if current.unplaced > 0 {
                    self.penalty = (self.penalty * self.config.penalty_growth).min(1e12);
                    current = self.score();
                }
                if deadline.is_some_and(|t| Instant::now() >= t) {
                    break;
                }
            }
            since_best += 1;
            if since_best > self.config.patience {
                break;
            }
            if !self.propose() {
                continue;
            }
            let next = self.score();
            let delta = next.total - current.total;
            let accept = delta <= 0.0
                || (temperature > 0.0 && self.rng.gen_bool((-delta / temperature).exp().min(1.0)));
            if !accept {
                self.revert();
                continue;
            }
            current = next;
            let k = (next.unplaced, next.objective);
            if k.0 < best_key.0 || (k.0 == best_key.0 && k.1 < best_key.1 - 1e-12) {
                best_key = k;
                best.clone_from(&self.slots);
                since_best = 0;
            }
        }
        debug!(
            "restart finished after {it} iterations: unplaced {} objective {:.4}",
            best_key.0, best_key.1
        );
        (best, it)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker;
    use crate::model::{BinSpec, Dimensionality, InstanceSpec, ItemSpec};
    use std::collections::BTreeMap;

    fn budget(seed: u64) -> SolverBudget {
        SolverBudget {
            max_iterations: 3_000,
            restarts: 2,
            seed,
            deterministic: true,
            ..SolverBudget::default()
        }
    }

    fn line(bins: &[u32], lengths: &[u32]) -> Instance {
        Instance::new(InstanceSpec {
            dimensionality: 1,
            bins: bins
                .iter()
                .map(|&l| BinSpec {
                    dims: vec![l],
                    capacity: None,
                })
                .collect(),
            items: lengths
                .iter()
                .enumerate()
                .map(|(k, &l)| ItemSpec {
                    category: k as u32,
                    quantity: 1,
                    dims: vec![l],
                    weight: 1,
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

    #[test]
    fn empty_instance_is_trivially_feasible() {
        let inst = Instance::without_items(
            Dimensionality::Three,
            vec![BinSpec {
                dims: vec![5, 5, 5],
                capacity: None,
            }],
        )
        .unwrap();
        let r = solve_anneal(&inst, &budget(1)).unwrap();
        assert!(r.feasible);
        assert_eq!(r.best.unwrap().bins_used_count(), 0);
    }

    #[test]
    fn finds_single_bin_packing() {
        // greedy volume order fills the big bin first; everything fits in bin 1 only
        let inst = line(&[6, 10], &[5, 5]);
        let r = solve_anneal(&inst, &budget(3)).unwrap();
        assert!(r.feasible);
        let best = r.best.unwrap();
        assert_eq!(best.bins_used_count(), 1);
        assert!(best.bins_used[1]);
    }

    #[test]
    fn overfull_instance_reports_diagnostics() {
        let inst = line(&[4], &[3, 3]);
        let r = solve_anneal(&inst, &budget(2)).unwrap();
        assert!(!r.feasible);
        let sample = r.best_sample().unwrap();
        assert!(!sample.report.violations.is_empty());
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let inst = line(&[10, 10, 7], &[3, 4, 5, 2, 6, 1, 3]);
        let a = solve_anneal(&inst, &budget(11)).unwrap();
        let b = solve_anneal(&inst, &budget(11)).unwrap();
        assert_eq!(a.best, b.best);
        assert!(
            checker::check(&inst, a.best.as_ref().unwrap())
                .unwrap()
                .feasible
        );
    }
}
