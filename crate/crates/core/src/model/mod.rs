//! Domain types: instances, orientations, the quadratic model and solutions.

pub mod instance;
pub mod orientation;
pub mod quadratic;
pub mod solution;

pub use instance::{
    Axis, Bin, BinSpec, CategoryId, Dimensionality, Instance, InstanceError, InstanceSpec, Item,
    ItemSpec, ObjectiveWeights, Priority, PrioritySpec,
};
pub use orientation::{
    admissible_orientations, effective_dims, effective_dims_from_assignment, orientation_set,
    OrientationError, OrientationId,
};
pub use quadratic::{
    Assignment, Constraint, ModelError, ModelEvaluation, QuadExpr, QuadraticModel, Sense, VarId,
    VarKey, VarKind, Variable,
};
pub use solution::{Placement, Solution};
