//! Axis-aligned item orientations.
//!
//! Orientation ids are 1..=6 and index the permutations of (l, w, h) below. Id 1
//! is the identity and id 3 swaps length and width, so the planar case uses
//! ids {1, 3}.

use thiserror::Error;

use super::instance::{Dimensionality, Item};

pub type OrientationId = u8;

pub const IDENTITY: OrientationId = 1;

// effective[axis] = nominal[PERMUTATIONS[id - 1][axis]]
const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrientationError {
    #[error("orientation assignment is not one-hot ({active} active)")]
    NotOneHot { active: usize },
    #[error("orientation {0} is not admissible for this item")]
    NotAdmissible(OrientationId),
}

/// Non-redundant orientations of an item, `K_i`. Empty when only the identity
/// is meaningful (1d items, squares, cubes); the identity is then preset.
pub fn orientation_set(item: &Item, d: Dimensionality) -> Vec<OrientationId> {
    match d {
        Dimensionality::One => Vec::new(),
        Dimensionality::Two => {
            if item.length() == item.width() {
                Vec::new()
            } else {
                vec![1, 3]
            }
        }
        Dimensionality::Three => {
            let mut seen: Vec<[u32; 3]> = Vec::with_capacity(6);
            let mut ids = Vec::with_capacity(6);
            for id in 1..=6 {
                let dims = permute(item.dims, id);
                if !seen.contains(&dims) {
                    seen.push(dims);
                    ids.push(id);
                }
            }
            if ids.len() == 1 {
                ids.clear();
            }
            ids
        }
    }
}

/// Orientations a placement may use: `K_i`, or just the identity when it is empty.
pub fn admissible_orientations(item: &Item, d: Dimensionality) -> Vec<OrientationId> {
    let set = orientation_set(item, d);
    if set.is_empty() {
        vec![IDENTITY]
    } else {
        set
    }
}

fn permute(dims: [u32; 3], id: OrientationId) -> [u32; 3] {
    let p = PERMUTATIONS[(id - 1) as usize];
    [dims[p[0]], dims[p[1]], dims[p[2]]]
}

/// Effective extents `(x', y', z')` of an item under orientation `id`. Axes
/// beyond `d` are 0.
pub fn effective_dims(
    item: &Item,
    d: Dimensionality,
    id: OrientationId,
) -> Result<[u32; 3], OrientationError> {
    if !admissible_orientations(item, d).contains(&id) {
        return Err(OrientationError::NotAdmissible(id));
    }
    Ok(permute(item.dims, id))
}

/// Effective extents from the binary values of `r_{i,k}` over `K_i`, given as
/// `(orientation, active)` pairs. An empty assignment selects the preset identity.
pub fn effective_dims_from_assignment(
    item: &Item,
    d: Dimensionality,
    assignment: &[(OrientationId, bool)],
) -> Result<[u32; 3], OrientationError> {
    if assignment.is_empty() && orientation_set(item, d).is_empty() {
        return Ok(item.dims);
    }
    let active: Vec<_> = assignment.iter().filter(|(_, on)| *on).collect();
    if active.len() != 1 {
        return Err(OrientationError::NotOneHot {
            active: active.len(),
        });
    }
    effective_dims(item, d, active[0].0)
}

/// Canonical orientation id producing the given extents, if any.
pub fn orientation_for_extents(
    item: &Item,
    d: Dimensionality,
    extents: [u32; 3],
) -> Option<OrientationId> {
    admissible_orientations(item, d)
        .into_iter()
        .find(|&id| permute(item.dims, id) == extents)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn item(dims: [u32; 3]) -> Item {
        Item {
            category: 0,
            dims,
            weight: 0,
        }
    }

    #[test]
    fn square_has_no_orientation_variables() {
        assert!(orientation_set(&item([5, 5, 0]), Dimensionality::Two).is_empty());
        assert_eq!(
            admissible_orientations(&item([5, 5, 0]), Dimensionality::Two),
            vec![IDENTITY]
        );
    }

    #[test]
    fn rectangle_has_two() {
        assert_eq!(
            orientation_set(&item([4, 2, 0]), Dimensionality::Two),
            vec![1, 3]
        );
    }

    #[test]
    fn cube_collapses_to_identity() {
        assert!(orientation_set(&item([7, 7, 7]), Dimensionality::Three).is_empty());
    }

    #[test]
    fn set_sizes_in_3d() {
        assert_eq!(
            orientation_set(&item([2, 2, 3]), Dimensionality::Three).len(),
            3
        );
        assert_eq!(
            orientation_set(&item([1, 2, 3]), Dimensionality::Three).len(),
            6
        );
    }

    #[test]
    fn rotated_rectangle() {
        let it = item([4, 2, 0]);
        let dims =
            effective_dims_from_assignment(&it, Dimensionality::Two, &[(1, false), (3, true)])
                .unwrap();
        assert_eq!(&dims[..2], &[2, 4]);
    }

    #[test]
    fn one_dimensional_identity() {
        let it = item([9, 0, 0]);
        assert_eq!(
            effective_dims_from_assignment(&it, Dimensionality::One, &[]).unwrap()[0],
            9
        );
    }

    #[test]
    fn all_six_triples_distinct() {
        let it = item([1, 2, 3]);
        let mut triples: Vec<_> = (1..=6)
            .map(|id| effective_dims(&it, Dimensionality::Three, id).unwrap())
            .collect();
        for t in &triples {
            let mut s = *t;
            s.sort();
            assert_eq!(s, [1, 2, 3]);
        }
        triples.sort();
        triples.dedup();
        assert_eq!(triples.len(), 6);
    }

    #[test]
    fn non_one_hot_rejected() {
        let it = item([4, 2, 0]);
        assert_eq!(
            effective_dims_from_assignment(&it, Dimensionality::Two, &[(1, true), (3, true)]),
            Err(OrientationError::NotOneHot { active: 2 })
        );
        assert_eq!(
            effective_dims_from_assignment(&it, Dimensionality::Two, &[(1, false), (3, false)]),
            Err(OrientationError::NotOneHot { active: 0 })
        );
    }

    fn dims_strategy() -> impl Strategy<Value = (Dimensionality, [u32; 3])> {
        (1u8..=3, 1u32..5, 1u32..5, 1u32..5).prop_map(|(d, l, w, h)| {
            let d = Dimensionality::from_count(d).unwrap();
            let mut dims = [l, w, h];
            for v in dims.iter_mut().skip(d.count()) {
                *v = 0;
            }
            (d, dims)
        })
    }

    proptest! {
        #[test]
        fn effective_dims_preserve_multiset((d, dims) in dims_strategy()) {
            let it = item(dims);
            let mut nominal = dims[..d.count()].to_vec();
            nominal.sort();
            for id in admissible_orientations(&it, d) {
                let eff = effective_dims(&it, d, id).unwrap();
                let mut e = eff[..d.count()].to_vec();
                e.sort();
                prop_assert_eq!(&e, &nominal);
                prop_assert_eq!(orientation_for_extents(&it, d, eff), Some(id));
            }
        }

        #[test]
        fn set_sizes_are_restricted((d, dims) in dims_strategy()) {
            let k = orientation_set(&item(dims), d).len();
            match d {
                Dimensionality::One => prop_assert_eq!(k, 0),
                Dimensionality::Two => prop_assert!(k == 0 || k == 2),
                Dimensionality::Three => prop_assert!(k == 0 || k == 3 || k == 6),
            }
        }
    }
}
