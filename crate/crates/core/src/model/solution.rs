//! Geometric solutions: one placement per item plus bin usage flags.

use super::instance::Instance;
use super::orientation::OrientationId;

#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub bin: usize,
    pub orientation: OrientationId,
    /// Back-lower-left corner in global coordinates (bins laid end to end on x).
    pub position: [f64; 3],
    /// Effective extents after orientation; axes beyond the dimensionality are 0.
    pub extents: [u32; 3],
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Solution {
    pub placements: Vec<Placement>,
    /// `v_j`
    pub bins_used: Vec<bool>,
}

impl Solution {
    pub fn new(placements: Vec<Placement>, bins_used: Vec<bool>) -> Self {
        Self {
            placements,
            bins_used,
        }
    }

    /// Marks exactly the bins holding at least one item as used.
    pub fn with_occupied_bins(placements: Vec<Placement>, bin_count: usize) -> Self {
        let mut bins_used = vec![false; bin_count];
        for p in &placements {
            if let Some(flag) = bins_used.get_mut(p.bin) {
                *flag = true;
            }
        }
        Self {
            placements,
            bins_used,
        }
    }

    /// Builds a solution from bin-local positions.
    pub fn from_local(
        instance: &Instance,
        mut placements: Vec<Placement>,
        bins_used: Vec<bool>,
    ) -> Self {
        for p in &mut placements {
            p.position[0] += instance.x_offset(p.bin) as f64;
        }
        Self::new(placements, bins_used)
    }

    /// Position of item `i` relative to its bin's origin.
    pub fn local_position(&self, instance: &Instance, i: usize) -> [f64; 3] {
        let p = &self.placements[i];
        let mut pos = p.position;
        pos[0] -= instance.x_offset(p.bin) as f64;
        pos
    }

    pub fn bins_used_count(&self) -> usize {
        self.bins_used.iter().filter(|&&u| u).count()
    }
}
