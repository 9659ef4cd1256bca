//! Integer box geometry shared by the heuristic backends: relative-position
//! masks from fixed selectors, insertion feasibility and extreme points.

use crate::builder::{self, BuildError, RelativePosition};
use crate::model::{
    admissible_orientations, effective_dims, Dimensionality, Instance, OrientationId, Placement,
    QuadraticModel, Solution, VarKey,
};

/// Bit `q - 1` set when relative position `q` is allowed or holds.
pub type RelationMask = u8;

/// Allowed relative positions per item pair, read from the selector variables
/// that delivery priorities and load bearing fix in the model.
#[derive(Debug, Clone)]
pub struct PairMasks {
    m: usize,
    bits: Vec<RelationMask>,
}

impl PairMasks {
    pub fn from_instance(instance: &Instance) -> Result<Self, BuildError> {
        let d = instance.dimensionality();
        let m = instance.item_count();
        let all = all_relations(d);
        let mut bits = vec![all; m * m];
        if instance.priority().is_none() && instance.heavy_categories().is_empty() {
            return Ok(Self { m, bits });
        }
        let mut model = QuadraticModel::new();
        builder::register_variables(&mut model, instance);
        builder::add_priority_and_load_bearing(&mut model, instance)?;
        for (&var, &value) in model.fixed() {
            if let VarKey::Relative { first, second, q } = model.variable(var).key {
                let bit = 1u8 << (q - 1);
                let slot = &mut bits[first * m + second];
                if value {
                    *slot = bit;
                } else {
                    *slot &= !bit;
                }
            }
        }
        Ok(Self { m, bits })
    }

    /// Allowed relations of `first` with respect to `second`, `first < second`.
    pub fn allowed(&self, first: usize, second: usize) -> RelationMask {
        debug_assert!(first < second);
        self.bits[first * self.m + second]
    }
}

pub fn all_relations(d: Dimensionality) -> RelationMask {
    RelativePosition::for_dimensionality(d)
        .iter()
        .fold(0, |acc, q| acc | 1 << (q.id() - 1))
}

/// Relations of box `a` with respect to box `b` that hold geometrically.
/// Empty exactly when the boxes overlap.
pub fn relations(d: Dimensionality, a: &Slot, b: &Slot) -> RelationMask {
    let mut out = 0;
    for axis in 0..d.count() {
        if a.pos[axis] + a.ext[axis] <= b.pos[axis] {
            out |= 1 << axis;
        }
        if b.pos[axis] + b.ext[axis] <= a.pos[axis] {
            out |= 1 << (axis + 3);
        }
    }
    out
}

/// Bin-local integer placement of one item.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub bin: usize,
    pub orientation: OrientationId,
    pub ext: [i64; 3],
    pub pos: [i64; 3],
    pub placed: bool,
}

/// Per-instance lookup tables for fast insertion tests.
#[derive(Debug, Clone)]
pub struct Packer<'a> {
    pub instance: &'a Instance,
    pub d: Dimensionality,
    pub masks: PairMasks,
    pub bin_dims: Vec<[i64; 3]>,
    /// `(orientation, extents)` per item.
    pub shapes: Vec<Vec<(OrientationId, [i64; 3])>>,
    pub eligible: Vec<Vec<usize>>,
    pub incompatible: Vec<Vec<bool>>,
    pub measure: Vec<f64>,
    pub bin_measure: Vec<f64>,
}

impl<'a> Packer<'a> {
    pub fn new(instance: &'a Instance) -> Result<Self, BuildError> {
        let d = instance.dimensionality();
        let items = instance.items();
        let widen = |v: [u32; 3]| v.map(|x| x as i64);
        let shapes = items
            .iter()
            .map(|it| {
                admissible_orientations(it, d)
                    .into_iter()
                    .map(|k| (k, widen(effective_dims(it, d, k).unwrap())))
                    .collect()
            })
            .collect();
        let incompatible = items
            .iter()
            .map(|a| {
                items
                    .iter()
                    .map(|b| instance.are_incompatible(a.category, b.category))
                    .collect()
            })
            .collect();
        Ok(Self {
            instance,
            d,
            masks: PairMasks::from_instance(instance)?,
            bin_dims: instance.bins().iter().map(|b| widen(b.dims)).collect(),
            shapes,
            eligible: items
                .iter()
                .map(|it| instance.eligible_bins(it.category))
                .collect(),
            incompatible,
            measure: items.iter().map(|it| it.measure(d) as f64).collect(),
            bin_measure: instance
                .bins()
                .iter()
                .map(|b| b.measure(d) as f64)
                .collect(),
        })
    }

    pub fn item_count(&self) -> usize {
        self.shapes.len()
    }

    /// True when `candidate` for item `i` respects containment, capacity,
    /// incompatibility and every pair mask against the placed items of its bin.
    pub fn fits(&self, slots: &[Slot], i: usize, candidate: &Slot) -> bool {
        let j = candidate.bin;
        let dims = &self.bin_dims[j];
        for a in 0..self.d.count() {
            if candidate.pos[a] < 0 || candidate.pos[a] + candidate.ext[a] > dims[a] {
                return false;
            }
        }
        let items = self.instance.items();
        let mut load = items[i].weight;
        for (k, s) in slots.iter().enumerate() {
            if k == i || !s.placed || s.bin != j {
                continue;
            }
            if self.incompatible[i][k] {
                return false;
            }
            load += items[k].weight;
            let ok = if i < k {
                relations(self.d, candidate, s) & self.masks.allowed(i, k)
            } else {
                relations(self.d, s, candidate) & self.masks.allowed(k, i)
            };
            if ok == 0 {
                return false;
            }
        }
        match self.instance.bins()[j].capacity {
            Some(cap) => load <= cap,
            None => true,
        }
    }

    /// Corner points of the placed boxes in `bin` and their projections toward
    /// the origin, plus the origin itself. Sorted and deduplicated.
    pub fn extreme_points(&self, slots: &[Slot], bin: usize) -> Vec<[i64; 3]> {
        let d = self.d.count();
        let boxes: Vec<&Slot> = slots.iter().filter(|s| s.placed && s.bin == bin).collect();
        let mut out = vec![[0i64; 3]];
        for b in &boxes {
            for a in 0..d {
                let mut corner = b.pos;
                corner[a] += b.ext[a];
                out.push(corner);
                for p in 0..d {
                    if p != a {
                        out.push(project(&boxes, corner, p, d));
                    }
                }
            }
        }
        let dims = self.bin_dims[bin];
        out.retain(|p| (0..d).all(|a| p[a] < dims[a]));
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Feasible extreme-point candidates for item `i` with the given shape.
    pub fn candidates(
        &self,
        slots: &[Slot],
        i: usize,
        bin: usize,
        orientation: OrientationId,
        ext: [i64; 3],
    ) -> Vec<Slot> {
        self.extreme_points(slots, bin)
            .into_iter()
            .map(|pos| Slot {
                bin,
                orientation,
                ext,
                pos,
                placed: true,
            })
            .filter(|c| self.fits(slots, i, c))
            .collect()
    }

    /// Lowest candidate under `order` over every admissible orientation.
    pub fn best_in_bin(
        &self,
        slots: &[Slot],
        i: usize,
        bin: usize,
        order: &[usize; 3],
    ) -> Option<Slot> {
        self.shapes[i]
            .iter()
            .flat_map(|&(k, ext)| self.candidates(slots, i, bin, k, ext))
            .min_by_key(|c| key(c, order))
    }

    /// Greedy construction: items in `sequence`, each at the lowest extreme
    /// point of the first bin in `bin_order` that accepts it.
    pub fn construct(
        &self,
        sequence: &[usize],
        bin_order: &[usize],
        order: &[usize; 3],
    ) -> Vec<Slot> {
        let mut slots: Vec<Slot> = (0..self.item_count()).map(|i| self.unplaced(i)).collect();
        for &i in sequence {
            for &j in bin_order {
                if !self.eligible[i].contains(&j) {
                    continue;
                }
                if let Some(s) = self.best_in_bin(&slots, i, j, order) {
                    slots[i] = s;
                    break;
                }
            }
        }
        slots
    }

    pub fn unplaced(&self, i: usize) -> Slot {
        let (orientation, ext) = self.shapes[i][0];
        Slot {
            bin: self.eligible[i][0],
            orientation,
            ext,
            pos: [0; 3],
            placed: false,
        }
    }

    /// Global solution; unplaced items are left at the origin of their bin.
    pub fn to_solution(&self, slots: &[Slot]) -> Solution {
        let placements = slots
            .iter()
            .map(|s| Placement {
                bin: s.bin,
                orientation: s.orientation,
                position: s.pos.map(|v| v as f64),
                extents: s.ext.map(|v| v as u32),
            })
            .collect();
        let bins_used = occupied(slots, self.bin_dims.len());
        Solution::from_local(self.instance, placements, bins_used)
    }
}

fn occupied(slots: &[Slot], n: usize) -> Vec<bool> {
    let mut used = vec![false; n];
    for s in slots {
        used[s.bin] = true;
    }
    used
}

/// Lexicographic preference of a position, axes listed in `order`.
pub fn key(s: &Slot, order: &[usize; 3]) -> [i64; 3] {
    [s.pos[order[0]], s.pos[order[1]], s.pos[order[2]]]
}

/// Moves `point` toward 0 along `axis` until it meets the far face of a box.
fn project(boxes: &[&Slot], point: [i64; 3], axis: usize, d: usize) -> [i64; 3] {
    let mut stop = 0;
    for b in boxes {
        let face = b.pos[axis] + b.ext[axis];
        if face > point[axis] || face <= stop {
            continue;
        }
        let covers = (0..d)
            .filter(|&a| a != axis)
            .all(|a| b.pos[a] <= point[a] && point[a] < b.pos[a] + b.ext[a]);
        if covers {
            stop = face;
        }
    }
    let mut out = point;
    out[axis] = stop;
    out
}

/// Default axis preference: fill the priority axis from its origin first,
/// otherwise build bottom-up.
pub fn axis_order(instance: &Instance) -> [usize; 3] {
    let d = instance.dimensionality().count();
    if let Some(p) = instance.priority() {
        let a = p.axis.index();
        let mut rest: Vec<usize> = [2, 0, 1].into_iter().filter(|&x| x != a && x < d).collect();
        rest.extend((0..3).filter(|&x| x >= d));
        return [a, rest[0], rest[1]];
    }
    match d {
        1 => [0, 1, 2],
        2 => [1, 0, 2],
        _ => [2, 1, 0],
    }
}

/// Items sorted by delivery rank, then decreasing measure, then index.
pub fn default_sequence(packer: &Packer) -> Vec<usize> {
    let inst = packer.instance;
    let mut seq: Vec<usize> = (0..packer.item_count()).collect();
    seq.sort_by(|&a, &b| {
        let ra = inst
            .priority_rank(inst.items()[a].category)
            .unwrap_or(usize::MAX);
        let rb = inst
            .priority_rank(inst.items()[b].category)
            .unwrap_or(usize::MAX);
        ra.cmp(&rb)
            .then(packer.measure[b].total_cmp(&packer.measure[a]))
            .then(a.cmp(&b))
    });
    seq
}
