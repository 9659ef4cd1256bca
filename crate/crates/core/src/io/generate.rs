//! Seeded synthetic instances.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::IoError;
use crate::model::{Axis, BinSpec, Instance, InstanceSpec, ItemSpec, PrioritySpec};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Features {
    pub capacities: bool,
    pub associations: bool,
    pub priority: bool,
    pub incompatibility: bool,
    pub load_bearing: bool,
    pub center_of_mass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub dimensionality: u8,
    pub items: usize,
    pub bins: usize,
    pub categories: u32,
    pub bin_dims: RangeInclusive<u32>,
    pub item_dims: RangeInclusive<u32>,
    pub weights: RangeInclusive<u64>,
    pub features: Features,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            dimensionality: 3,
            items: 51,
            bins: 2,
            categories: 10,
            bin_dims: 900..=1200,
            item_dims: 100..=400,
            weights: 1..=50,
            features: Features::default(),
        }
    }
}

/// Items take categories round-robin; each category gets one size and unit
/// weight. Identical seeds give identical instances.
pub fn generate_instance(spec: &GeneratorSpec, seed: u64) -> Result<Instance, IoError> {
    let bad = |m: &str| Err(IoError::Generator(m.to_string()));
    if spec.items == 0 {
        return bad("at least one item is required");
    }
    if spec.bins == 0 {
        return bad("at least one bin is required");
    }
    if spec.categories == 0 {
        return bad("at least one category is required");
    }
    if !(1..=3).contains(&spec.dimensionality) {
        return bad("dimensionality must be 1, 2 or 3");
    }
    for (name, empty) in [
        (
            "bin_dims",
            spec.bin_dims.is_empty() || *spec.bin_dims.start() == 0,
        ),
        (
            "item_dims",
            spec.item_dims.is_empty() || *spec.item_dims.start() == 0,
        ),
        ("weights", spec.weights.is_empty()),
    ] {
        if empty {
            return bad(&format!(
                "{name} must be a non-empty range of positive values"
            ));
        }
    }
    if spec.item_dims.start() > spec.bin_dims.end() {
        return bad("smallest item dimension exceeds every bin dimension");
    }
    let d = spec.dimensionality as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut bins: Vec<BinSpec> = (0..spec.bins)
        .map(|_| BinSpec {
            dims: (0..d)
                .map(|_| rng.gen_range(spec.bin_dims.clone()))
                .collect(),
            capacity: None,
        })
        .collect();
    // item sizes stay within the largest bin along every axis
    let mut largest = vec![0u32; d];
    for b in &bins {
        for a in 0..d {
            largest[a] = largest[a].max(b.dims[a]);
        }
    }
    let cats = spec.categories.min(spec.items as u32);
    let mut items: Vec<ItemSpec> = (0..cats)
        .map(|c| ItemSpec {
            category: c,
            quantity: 0,
            dims: (0..d)
                .map(|a| {
                    let hi = (*spec.item_dims.end()).min(largest[a]);
                    let lo = (*spec.item_dims.start()).min(hi);
                    rng.gen_range(lo..=hi)
                })
                .collect(),
            weight: rng.gen_range(spec.weights.clone()),
        })
        .collect();
    for i in 0..spec.items {
        items[i % cats as usize].quantity += 1;
    }

    let f = spec.features;
    if f.capacities {
        let total: u64 = items.iter().map(|it| it.weight * it.quantity as u64).sum();
        let share = total.div_ceil(spec.bins as u64);
        for b in &mut bins {
            b.capacity = Some(share + share / 2 + *spec.weights.end());
        }
    }
    let mut associations = BTreeMap::new();
    if f.associations && spec.bins > 1 {
        let all: Vec<usize> = (0..spec.bins).collect();
        for c in 0..cats {
            let k = rng.gen_range(1..=spec.bins);
            let mut chosen: Vec<usize> = all.choose_multiple(&mut rng, k).copied().collect();
            chosen.sort_unstable();
            if chosen.len() < spec.bins {
                associations.insert(c, chosen);
            }
        }
    }
    let priority = (f.priority && cats > 1).then(|| PrioritySpec {
        categories: vec![cats - 1],
        // x is shared by all bins, so several bins order along y
        axis: Some(match d {
            1 => Axis::X,
            _ if spec.bins > 1 || rng.gen_bool(0.5) => Axis::Y,
            _ => Axis::X,
        }),
    });
    let mut incompatible = Vec::new();
    if f.incompatibility && cats > 2 {
        let a = rng.gen_range(0..cats - 1);
        incompatible.push([a, a + 1]);
    }
    let heavy = if f.load_bearing && d == 3 {
        vec![rng.gen_range(0..cats)]
    } else {
        Vec::new()
    };
    let center_of_mass = f.center_of_mass.then(|| {
        [
            bins[0].dims[0] as f64 / 2.0,
            bins[0].dims.get(1).map_or(0.0, |&w| w as f64 / 2.0),
        ]
    });

    Ok(Instance::new(InstanceSpec {
        dimensionality: spec.dimensionality,
        bins,
        items,
        associations,
        priority,
        incompatible,
        heavy,
        center_of_mass,
        weights: None,
    })?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_round_robin() {
        let inst = generate_instance(&GeneratorSpec::default(), 1).unwrap();
        assert_eq!(inst.item_count(), 51);
        assert_eq!(inst.bin_count(), 2);
        let counts: Vec<usize> = (0..10)
            .map(|c| inst.items().iter().filter(|it| it.category == c).count())
            .collect();
        assert_eq!(counts, vec![6, 5, 5, 5, 5, 5, 5, 5, 5, 5]);
    }

    #[test]
    fn same_seed_same_instance() {
        let spec = GeneratorSpec {
            features: Features {
                capacities: true,
                associations: true,
                priority: true,
                incompatibility: true,
                load_bearing: true,
                center_of_mass: true,
            },
            bins: 3,
            ..GeneratorSpec::default()
        };
        let a = generate_instance(&spec, 42).unwrap();
        assert_eq!(a, generate_instance(&spec, 42).unwrap());
        assert_ne!(a, generate_instance(&spec, 43).unwrap());
    }

    #[test]
    fn rejects_empty_and_oversized() {
        let spec = GeneratorSpec {
            items: 0,
            ..GeneratorSpec::default()
        };
        assert!(generate_instance(&spec, 0).is_err());
        let spec = GeneratorSpec {
            item_dims: 2000..=3000,
            ..GeneratorSpec::default()
        };
        assert!(generate_instance(&spec, 0).is_err());
    }
}
