//! Variable fixing before search: item-bin associations and preset orientations.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{orientation_set, Instance, ModelError, QuadraticModel, VarKey, VarKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PresolveReport {
    /// `u` variables fixed to 0.
    pub fixed_to_zero: usize,
    /// `u` variables fixed to 1.
    pub fixed_to_one: usize,
    /// Items whose orientation is preset to the identity. They own no `r`
    /// variables, so this does not reduce the free count.
    pub fixed_orientations: usize,
    /// `Σ_α (n - |J_α|)·|I_α|`
    pub formula_count: usize,
    /// `b` variables fixed by delivery priorities and load bearing.
    pub fixed_relative_positions: usize,
    pub variables_before: usize,
    pub variables_after: usize,
    pub constraints_dropped: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PresolveError {
    #[error("association fixing conflicts: {0}")]
    Conflict(ModelError),
    #[error("model is infeasible after fixing: {0}")]
    Infeasible(ModelError),
}

/// Fixes `u_{i,j}` from each category's eligible bins `J_α`:
/// a single bin fixes the item there, a proper subset excludes the other bins,
/// and the full set leaves the item free.
pub fn apply_associations(
    model: &mut QuadraticModel,
    instance: &Instance,
) -> Result<PresolveReport, PresolveError> {
    let n = instance.bin_count();
    let mut report = PresolveReport::default();
    for (i, item) in instance.items().iter().enumerate() {
        let eligible = instance.eligible_bins(item.category);
        report.formula_count += n - eligible.len();
        if eligible.len() == n && n > 1 {
            continue;
        }
        for j in 0..n {
            let var = model
                .var(VarKey::Assign { item: i, bin: j })
                .expect("assignment variable registered");
            let value = if eligible.binary_search(&j).is_ok() {
                if eligible.len() > 1 {
                    continue;
                }
                true
            } else {
                false
            };
            if model.fix(var, value).map_err(PresolveError::Conflict)? {
                if value {
                    report.fixed_to_one += 1;
                } else {
                    report.fixed_to_zero += 1;
                }
            }
        }
    }
    Ok(report)
}

/// Items with an empty orientation set keep the identity; returns how many.
pub fn apply_orientation_presets(model: &QuadraticModel, instance: &Instance) -> usize {
    let d = instance.dimensionality();
    instance
        .items()
        .iter()
        .enumerate()
        .filter(|(i, it)| {
            let preset = orientation_set(it, d).is_empty();
            debug_assert!(
                !preset
                    || model
                        .var(VarKey::Orient {
                            item: *i,
                            orientation: 1
                        })
                        .is_none()
            );
            preset
        })
        .count()
}

/// Runs both fixing rules and eliminates every fixed variable by substitution.
pub fn presolve(
    model: &mut QuadraticModel,
    instance: &Instance,
) -> Result<PresolveReport, PresolveError> {
    let variables_before = model.variable_count();
    let mut report = apply_associations(model, instance)?;
    report.fixed_orientations = apply_orientation_presets(model, instance);
    report.fixed_relative_positions = model
        .fixed()
        .keys()
        .filter(|&&v| {
            let var = model.variable(v);
            var.kind == VarKind::Binary && matches!(var.key, VarKey::Relative { .. })
        })
        .count();
    report.constraints_dropped = model
        .substitute_fixed()
        .map_err(PresolveError::Infeasible)?;
    report.variables_before = variables_before;
    report.variables_after = model.free_count();
    Ok(report)
}
