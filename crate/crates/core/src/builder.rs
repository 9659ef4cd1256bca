//! Translation of an [`Instance`] into its constrained quadratic model.
//!
//! Bins are laid end to end along the global x axis; big-M terms switch
//! boundary and pairwise constraints off for bins an item is not assigned to.

use thiserror::Error;

use crate::model::{
    effective_dims, orientation_set, Axis, Dimensionality, Instance, ModelError, QuadExpr,
    QuadraticModel, Sense, VarId, VarKey,
};

/// Relative position `q` of the first item of a pair with respect to the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelativePosition {
    LeftOf = 1,
    Behind = 2,
    Below = 3,
    RightOf = 4,
    InFrontOf = 5,
    Above = 6,
}

impl RelativePosition {
    pub const ALL: [RelativePosition; 6] = [
        Self::LeftOf,
        Self::Behind,
        Self::Below,
        Self::RightOf,
        Self::InFrontOf,
        Self::Above,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(q: u8) -> Option<Self> {
        Self::ALL.get((q as usize).checked_sub(1)?).copied()
    }

    pub fn opposite(self) -> Self {
        Self::from_id((self.id() + 2) % 6 + 1).unwrap()
    }

    pub fn axis(self) -> Axis {
        match self {
            Self::LeftOf | Self::RightOf => Axis::X,
            Self::Behind | Self::InFrontOf => Axis::Y,
            Self::Below | Self::Above => Axis::Z,
        }
    }

    /// True when the first item precedes the second along [`Self::axis`].
    pub fn first_precedes(self) -> bool {
        self.id() <= 3
    }

    /// `Q_d`
    pub fn for_dimensionality(d: Dimensionality) -> &'static [RelativePosition] {
        match d {
            Dimensionality::One => &[Self::LeftOf, Self::RightOf],
            Dimensionality::Two => &[Self::LeftOf, Self::Behind, Self::RightOf, Self::InFrontOf],
            Dimensionality::Three => &Self::ALL,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuildError {
    #[error("degenerate objective: every objective weight is zero")]
    DegenerateObjective,
    #[error("model is trivially infeasible: {0}")]
    TriviallyInfeasible(String),
    #[error("contradictory relative position fixing: {0}")]
    ContradictoryFixing(#[from] ModelError),
}

/// Variables fixed by the priority and load bearing passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PairFixings {
    pub priority: usize,
    pub load_bearing: usize,
}

/// Builds the full model: variables, every constraint family and the objective.
/// Association fixings are left to [`crate::presolve`].
pub fn build_model(instance: &Instance) -> Result<QuadraticModel, BuildError> {
    let mut model = QuadraticModel::new();
    register_variables(&mut model, instance);
    add_structural_constraints(&mut model, instance);
    add_bin_boundary_constraints(&mut model, instance);
    add_overweight_constraints(&mut model, instance);
    add_nonoverlap_constraints(&mut model, instance);
    add_association_and_incompatibility(&mut model, instance)?;
    add_priority_and_load_bearing(&mut model, instance)?;
    build_objective(&mut model, instance)?;
    Ok(model)
}

/// Registers `v`, `u`, `r`, positions and `b`, in that order.
pub fn register_variables(model: &mut QuadraticModel, instance: &Instance) {
    let d = instance.dimensionality();
    let (m, n) = (instance.item_count(), instance.bin_count());
    for bin in 0..n {
        model.add_binary(VarKey::BinUsed { bin });
    }
    for item in 0..m {
        for bin in 0..n {
            model.add_binary(VarKey::Assign { item, bin });
        }
    }
    for (item, it) in instance.items().iter().enumerate() {
        for orientation in orientation_set(it, d) {
            model.add_binary(VarKey::Orient { item, orientation });
        }
    }
    for &axis in d.axes() {
        let upper = instance.axis_span(axis);
        for item in 0..m {
            model.add_real(VarKey::Position { axis, item }, 0.0, upper);
        }
    }
    for first in 0..m {
        for second in first + 1..m {
            for q in RelativePosition::for_dimensionality(d) {
                model.add_binary(VarKey::Relative {
                    first,
                    second,
                    q: q.id(),
                });
            }
        }
    }
}

fn id(model: &QuadraticModel, key: VarKey) -> VarId {
    model
        .var(key)
        .unwrap_or_else(|| panic!("variable {key} is not registered"))
}

fn pos(model: &QuadraticModel, axis: Axis, item: usize) -> VarId {
    id(model, VarKey::Position { axis, item })
}

fn assign(model: &QuadraticModel, item: usize, bin: usize) -> VarId {
    id(model, VarKey::Assign { item, bin })
}

fn relative(model: &QuadraticModel, first: usize, second: usize, q: RelativePosition) -> VarId {
    id(
        model,
        VarKey::Relative {
            first,
            second,
            q: q.id(),
        },
    )
}

/// Effective extent of item `i` along `axis` as an expression in `r_{i,k}`.
pub fn extent_expr(
    model: &QuadraticModel,
    instance: &Instance,
    item: usize,
    axis: Axis,
) -> QuadExpr {
    let d = instance.dimensionality();
    let it = &instance.items()[item];
    let set = orientation_set(it, d);
    if set.is_empty() {
        return QuadExpr::constant(it.dims[axis.index()] as f64);
    }
    let mut e = QuadExpr::new();
    for k in set {
        let dims = effective_dims(it, d, k).expect("orientation from K_i");
        e.linear(
            id(
                model,
                VarKey::Orient {
                    item,
                    orientation: k,
                },
            ),
            dims[axis.index()] as f64,
        );
    }
    e
}

/// Single assignment, bin usage coupling and the one-hot selectors.
pub fn add_structural_constraints(model: &mut QuadraticModel, instance: &Instance) {
    let d = instance.dimensionality();
    let (m, n) = (instance.item_count(), instance.bin_count());
    for i in 0..m {
        let mut e = QuadExpr::constant(-1.0);
        for j in 0..n {
            e.linear(assign(model, i, j), 1.0);
        }
        model.add_constraint(format!("assign_{i}"), Sense::Eq, e);
    }
    for i in 0..m {
        for j in 0..n {
            let mut e = QuadExpr::new();
            e.linear(assign(model, i, j), 1.0)
                .linear(id(model, VarKey::BinUsed { bin: j }), -1.0);
            model.add_constraint(format!("bin_used_{i}_{j}"), Sense::Le, e);
        }
    }
    for (i, it) in instance.items().iter().enumerate() {
        let set = orientation_set(it, d);
        if set.is_empty() {
            continue;
        }
        let mut e = QuadExpr::constant(-1.0);
        for k in set {
            e.linear(
                id(
                    model,
                    VarKey::Orient {
                        item: i,
                        orientation: k,
                    },
                ),
                1.0,
            );
        }
        model.add_constraint(format!("orientation_{i}"), Sense::Eq, e);
    }
    for i in 0..m {
        for k in i + 1..m {
            let mut e = QuadExpr::constant(-1.0);
            for &q in RelativePosition::for_dimensionality(d) {
                e.linear(relative(model, i, k, q), 1.0);
            }
            model.add_constraint(format!("relative_{i}_{k}"), Sense::Eq, e);
        }
    }
}

/// Containment of every item in the bin it is assigned to.
pub fn add_bin_boundary_constraints(model: &mut QuadraticModel, instance: &Instance) {
    let d = instance.dimensionality();
    let (m, n) = (instance.item_count(), instance.bin_count());
    let span = instance.total_length() as f64;
    let w_max = instance.max_width() as f64;
    let h_max = instance.max_height() as f64;
    for i in 0..m {
        let ext: Vec<QuadExpr> = d
            .axes()
            .iter()
            .map(|&a| extent_expr(model, instance, i, a))
            .collect();
        for j in 0..n {
            let u = assign(model, i, j);
            let bin = &instance.bins()[j];

            // x_i + x'_i - Σ_{p≤j} L_p <= (1 - u_ij) Σ_p L_p
            let mut e = QuadExpr::constant(-(instance.x_offset(j + 1) as f64) - span);
            e.linear(pos(model, Axis::X, i), 1.0).linear(u, span);
            e.add_scaled(&ext[0], 1.0);
            model.add_constraint(format!("boundary_x_end_{i}_{j}"), Sense::Le, e);

            // x_i - u_ij Σ_{p<j} L_p >= 0
            if j > 0 {
                let mut e = QuadExpr::new();
                e.linear(pos(model, Axis::X, i), 1.0)
                    .linear(u, -(instance.x_offset(j) as f64));
                model.add_constraint(format!("boundary_x_start_{i}_{j}"), Sense::Ge, e);
            }

            for (axis, big_m) in [(Axis::Y, w_max), (Axis::Z, h_max)] {
                if axis.index() >= d.count() {
                    break;
                }
                let mut e = QuadExpr::constant(-(bin.dims[axis.index()] as f64) - big_m);
                e.linear(pos(model, axis, i), 1.0).linear(u, big_m);
                e.add_scaled(&ext[axis.index()], 1.0);
                model.add_constraint(format!("boundary_{axis}_{i}_{j}"), Sense::Le, e);
            }
        }
    }
}

/// `Σ_i μ_i u_ij <= M_j` for every bin with a capacity.
pub fn add_overweight_constraints(model: &mut QuadraticModel, instance: &Instance) {
    for (j, bin) in instance.bins().iter().enumerate() {
        let Some(cap) = bin.capacity else { continue };
        let mut e = QuadExpr::constant(-(cap as f64));
        for (i, it) in instance.items().iter().enumerate() {
            if it.weight > 0 {
                e.linear(assign(model, i, j), it.weight as f64);
            }
        }
        model.add_constraint(format!("capacity_{j}"), Sense::Le, e);
    }
}

/// Big-M separation of every pair in every bin, one constraint per relative position.
pub fn add_nonoverlap_constraints(model: &mut QuadraticModel, instance: &Instance) {
    let d = instance.dimensionality();
    let (m, n) = (instance.item_count(), instance.bin_count());
    let exts: Vec<Vec<QuadExpr>> = (0..m)
        .map(|i| {
            d.axes()
                .iter()
                .map(|&a| extent_expr(model, instance, i, a))
                .collect()
        })
        .collect();
    for i in 0..m {
        for k in i + 1..m {
            for j in 0..n {
                let (ui, uk) = (assign(model, i, j), assign(model, k, j));
                for &q in RelativePosition::for_dimensionality(d) {
                    let axis = q.axis();
                    let big_m = instance.axis_span(axis);
                    let (a, b) = if q.first_precedes() { (i, k) } else { (k, i) };
                    // (u_ij u_kj + b_ikq - 2) M + pos_a + ext_a - pos_b <= 0
                    let mut e = QuadExpr::constant(-2.0 * big_m);
                    e.quadratic(ui, uk, big_m)
                        .linear(relative(model, i, k, q), big_m)
                        .linear(pos(model, axis, a), 1.0)
                        .linear(pos(model, axis, b), -1.0);
                    e.add_scaled(&exts[a][axis.index()], 1.0);
                    model.add_constraint(
                        format!("nonoverlap_{i}_{k}_{j}_{}", q.id()),
                        Sense::Le,
                        e,
                    );
                }
            }
        }
    }
}

/// Associations are fixings applied by presolve, so only incompatibilities add
/// rows here: `u_ij + u_kj <= 1` for every cross-category pair and bin.
pub fn add_association_and_incompatibility(
    model: &mut QuadraticModel,
    instance: &Instance,
) -> Result<(), BuildError> {
    let categories = instance.categories();
    for &(a, b) in instance.incompatible_pairs() {
        if !categories.contains(&a) || !categories.contains(&b) {
            continue;
        }
        let (ea, eb) = (instance.eligible_bins(a), instance.eligible_bins(b));
        if ea.len() == 1 && ea == eb {
            return Err(BuildError::TriviallyInfeasible(format!(
                "incompatible categories {a} and {b} are both restricted to bin {}",
                ea[0]
            )));
        }
    }
    let items = instance.items();
    for i in 0..items.len() {
        for k in i + 1..items.len() {
            if !instance.are_incompatible(items[i].category, items[k].category) {
                continue;
            }
            for j in 0..instance.bin_count() {
                let mut e = QuadExpr::constant(-1.0);
                e.linear(assign(model, i, j), 1.0)
                    .linear(assign(model, k, j), 1.0);
                model.add_constraint(format!("incompatible_{i}_{k}_{j}"), Sense::Le, e);
            }
        }
    }
    Ok(())
}

/// Relative position selectors pinned by delivery priorities. For a pair
/// `(i, k)` with `i` delivered first, `b_{i,k,q} = 1`; with `k` first,
/// `b_{i,k,q'} = 1`. The remaining selectors of the pair are fixed to 0.
pub fn add_priorities(
    model: &mut QuadraticModel,
    instance: &Instance,
) -> Result<usize, BuildError> {
    let Some(priority) = instance.priority() else {
        return Ok(0);
    };
    let (q, q_rev) = match priority.axis {
        Axis::X => (RelativePosition::LeftOf, RelativePosition::RightOf),
        _ => (RelativePosition::Behind, RelativePosition::InFrontOf),
    };
    let d = instance.dimensionality();
    let m = instance.item_count();
    let mut fixed = 0;
    for i in 0..m {
        for k in i + 1..m {
            let chosen = if instance.delivered_before(i, k) {
                q
            } else if instance.delivered_before(k, i) {
                q_rev
            } else {
                continue;
            };
            for &p in RelativePosition::for_dimensionality(d) {
                if model.fix(relative(model, i, k, p), p == chosen)? {
                    fixed += 1;
                }
            }
        }
    }
    Ok(fixed)
}

/// Forbids items of heavy categories from lying beneath items of any other
/// category by fixing the corresponding selector to 0.
pub fn add_load_bearing(
    model: &mut QuadraticModel,
    instance: &Instance,
) -> Result<usize, BuildError> {
    let heavy = instance.heavy_categories();
    if heavy.is_empty() {
        return Ok(0);
    }
    let items = instance.items();
    let mut fixed = 0;
    for p in 0..items.len() {
        if !heavy.contains(&items[p].category) {
            continue;
        }
        for o in 0..items.len() {
            if items[o].category == items[p].category {
                continue;
            }
            let var = if p < o {
                relative(model, p, o, RelativePosition::Below)
            } else {
                relative(model, o, p, RelativePosition::Above)
            };
            if model.fix(var, false)? {
                fixed += 1;
            }
        }
    }
    Ok(fixed)
}

pub fn add_priority_and_load_bearing(
    model: &mut QuadraticModel,
    instance: &Instance,
) -> Result<PairFixings, BuildError> {
    let priority = add_priorities(model, instance)?;
    let load_bearing = add_load_bearing(model, instance)?;
    Ok(PairFixings {
        priority,
        load_bearing,
    })
}

/// Bins used, boundary push and center of mass deviation, weighted.
pub fn build_objective(model: &mut QuadraticModel, instance: &Instance) -> Result<(), BuildError> {
    let w = instance.weights();
    let has_com = w.com > 0.0 && instance.com_target().is_some();
    if w.bins == 0.0 && w.push == 0.0 && !has_com {
        return Err(BuildError::DegenerateObjective);
    }
    let d = instance.dimensionality();
    let m = instance.item_count();
    let mut obj = QuadExpr::new();
    if w.bins > 0.0 {
        for bin in 0..instance.bin_count() {
            obj.linear(id(model, VarKey::BinUsed { bin }), w.bins);
        }
    }
    if w.push > 0.0 && m > 0 {
        for &axis in d.axes() {
            let scale = w.push / (m as f64 * instance.axis_span(axis));
            for i in 0..m {
                obj.linear(pos(model, axis, i), scale);
                let ext = extent_expr(model, instance, i, axis);
                obj.add_scaled(&ext, scale);
            }
        }
    }
    if has_com && m > 0 {
        let target = instance.com_target().unwrap();
        let total = instance.total_weight() as f64;
        for (t, &axis) in target.iter().zip(d.axes().iter().take(2)) {
            // Σ μ_i (pos_i + ext_i / 2) / Σ μ - target
            let mut dev = QuadExpr::constant(-t);
            for (i, it) in instance.items().iter().enumerate() {
                if it.weight == 0 {
                    continue;
                }
                let mu = it.weight as f64 / total;
                dev.linear(pos(model, axis, i), mu);
                let ext = extent_expr(model, instance, i, axis);
                dev.add_scaled(&ext, mu / 2.0);
            }
            obj.add_scaled(&dev.square(), w.com);
        }
    }
    model.set_objective(obj);
    Ok(())
}
