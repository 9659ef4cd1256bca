//! Problem instances: items, heterogeneous bins and the optional loading features.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Category identifier shared by items of identical shape and weight.
pub type CategoryId = u32;

/// Number of spatial axes an instance lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dimensionality {
    One = 1,
    Two = 2,
    Three = 3,
}

impl Dimensionality {
    pub fn from_count(count: u8) -> Option<Self> {
        match count {
            1 => Some(Self::One),
            2 => Some(Self::Two),
            3 => Some(Self::Three),
            _ => None,
        }
    }

    /// Number of axes, 1 to 3.
    pub fn count(self) -> usize {
        self as usize
    }

    /// The axes in use, in x, y, z order.
    pub fn axes(self) -> &'static [Axis] {
        &[Axis::X, Axis::Y, Axis::Z][..self.count()]
    }
}

impl fmt::Display for Dimensionality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.count())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Item {
    pub category: CategoryId,
    /// Nominal (length, width, height); axes beyond the dimensionality hold 0.
    pub dims: [u32; 3],
    pub weight: u64,
}

impl Item {
    pub fn length(&self) -> u32 {
        self.dims[0]
    }

    pub fn width(&self) -> u32 {
        self.dims[1]
    }

    pub fn height(&self) -> u32 {
        self.dims[2]
    }

    /// Length, area or volume depending on `d`.
    pub fn measure(&self, d: Dimensionality) -> u64 {
        self.dims[..d.count()].iter().map(|&v| v as u64).product()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bin {
    /// (L, W, H); axes beyond the dimensionality hold 0.
    pub dims: [u32; 3],
    /// Maximum load. `None` drops the overweight constraint for this bin.
    pub capacity: Option<u64>,
}

impl Bin {
    pub fn measure(&self, d: Dimensionality) -> u64 {
        self.dims[..d.count()].iter().map(|&v| v as u64).product()
    }
}

/// Categories delivered first, closest to the origin of `axis`.
///
/// The list is ordered: a category listed earlier is delivered before one listed
/// later, and every listed category before any unlisted one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Priority {
    pub categories: Vec<CategoryId>,
    pub axis: Axis,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveWeights {
    pub bins: f64,
    pub push: f64,
    pub com: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        Self {
            bins: 100.0,
            push: 1.0,
            com: 1.0,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error("instance has no items")]
    NoItems,
    #[error("instance has no bins")]
    NoBins,
    #[error("dimensionality must be 1, 2 or 3, found {0}")]
    BadDimensionality(u8),
    #[error("{path}: expected {expected} dimension(s) for d={expected}, found {found}")]
    DimensionMismatch {
        path: String,
        expected: usize,
        found: usize,
    },
    #[error("{path}: dimensions must be at least 1")]
    ZeroDimension { path: String },
    #[error("{path}: quantity must be at least 1")]
    ZeroQuantity { path: String },
    #[error(
        "{path}: category {category} was already declared with different dimensions or weight"
    )]
    InconsistentCategory { path: String, category: CategoryId },
    #[error("{path}: unknown bin id {bin}")]
    UnknownBin { path: String, bin: usize },
    #[error("{path}: eligible bin list is empty")]
    EmptyAssociation { path: String },
    #[error("priority.axis: {reason}")]
    InvalidPriorityAxis { reason: String },
    #[error("{path}: category {category} cannot be incompatible with itself")]
    SelfIncompatible { path: String, category: CategoryId },
    #[error("heavy: load bearing categories are only meaningful for d=3")]
    HeavyRequires3d,
    #[error("center_of_mass: a target requires positive total item weight")]
    ComWithoutWeight,
    #[error("{path}: must be finite and non-negative")]
    InvalidNumber { path: String },
}

/// Serialized description of an instance. This is the canonical json schema;
/// [`Instance::new`] validates it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub dimensionality: u8,
    pub bins: Vec<BinSpec>,
    pub items: Vec<ItemSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub associations: BTreeMap<CategoryId, Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priority: Option<PrioritySpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub incompatible: Vec<[CategoryId; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub heavy: Vec<CategoryId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center_of_mass: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<ObjectiveWeights>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinSpec {
    pub dims: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ItemSpec {
    pub category: CategoryId,
    #[serde(default = "one")]
    pub quantity: u32,
    pub dims: Vec<u32>,
    #[serde(default)]
    pub weight: u64,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrioritySpec {
    pub categories: Vec<CategoryId>,
    /// Defaults to `x` for d=1 and `y` otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<Axis>,
}

/// A validated, immutable bin packing instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    dimensionality: Dimensionality,
    items: Vec<Item>,
    bins: Vec<Bin>,
    associations: BTreeMap<CategoryId, Vec<usize>>,
    priority: Option<Priority>,
    incompatible: Vec<(CategoryId, CategoryId)>,
    heavy: BTreeSet<CategoryId>,
    com_target: Option<[f64; 2]>,
    weights: ObjectiveWeights,
    // prefix sums of bin lengths: x_offsets[j] = sum of L_p for p < j, len n + 1
    x_offsets: Vec<u64>,
}

impl Instance {
    /// Validates a raw description.
    pub fn new(spec: InstanceSpec) -> Result<Self, InstanceError> {
        if spec.items.is_empty() {
            return Err(InstanceError::NoItems);
        }
        Self::validate(spec)
    }

    /// An instance without items, which [`Instance::new`] rejects. Solvers and the
    /// checker accept it and produce the empty packing.
    pub fn without_items(
        dimensionality: Dimensionality,
        bins: Vec<BinSpec>,
    ) -> Result<Self, InstanceError> {
        Self::validate(InstanceSpec {
            dimensionality: dimensionality as u8,
            bins,
            items: Vec::new(),
            associations: BTreeMap::new(),
            priority: None,
            incompatible: Vec::new(),
            heavy: Vec::new(),
            center_of_mass: None,
            weights: None,
        })
    }

    fn validate(spec: InstanceSpec) -> Result<Self, InstanceError> {
        let d = Dimensionality::from_count(spec.dimensionality)
            .ok_or(InstanceError::BadDimensionality(spec.dimensionality))?;
        if spec.bins.is_empty() {
            return Err(InstanceError::NoBins);
        }

        let bins = spec
            .bins
            .iter()
            .enumerate()
            .map(|(j, b)| {
                let dims = read_dims(&b.dims, d, &format!("bins[{j}].dims"))?;
                Ok(Bin {
                    dims,
                    capacity: b.capacity,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let n = bins.len();

        let mut items = Vec::new();
        let mut shapes: BTreeMap<CategoryId, ([u32; 3], u64)> = BTreeMap::new();
        for (row, it) in spec.items.iter().enumerate() {
            let path = format!("items[{row}]");
            if it.quantity == 0 {
                return Err(InstanceError::ZeroQuantity { path });
            }
            let dims = read_dims(&it.dims, d, &format!("{path}.dims"))?;
            match shapes.get(&it.category) {
                Some(&shape) if shape != (dims, it.weight) => {
                    return Err(InstanceError::InconsistentCategory {
                        path,
                        category: it.category,
                    })
                }
                _ => {
                    shapes.insert(it.category, (dims, it.weight));
                }
            }
            for _ in 0..it.quantity {
                items.push(Item {
                    category: it.category,
                    dims,
                    weight: it.weight,
                });
            }
        }

        let mut associations = BTreeMap::new();
        for (&category, list) in &spec.associations {
            let path = format!("associations.{category}");
            if list.is_empty() {
                return Err(InstanceError::EmptyAssociation { path });
            }
            if let Some(&bin) = list.iter().find(|&&j| j >= n) {
                return Err(InstanceError::UnknownBin { path, bin });
            }
            let mut list = list.clone();
            list.sort_unstable();
            list.dedup();
            associations.insert(category, list);
        }

        let priority = match spec.priority {
            None => None,
            Some(p) => {
                let axis = p.axis.unwrap_or(if d == Dimensionality::One {
                    Axis::X
                } else {
                    Axis::Y
                });
                match axis {
                    Axis::Y if d == Dimensionality::One => {
                        return Err(InstanceError::InvalidPriorityAxis {
                            reason: "y is not available for d=1".into(),
                        })
                    }
                    Axis::X if d != Dimensionality::One && n > 1 => {
                        return Err(InstanceError::InvalidPriorityAxis {
                            reason: "x is the bin concatenation axis and cannot carry priorities \
                                     when there are several bins"
                                .into(),
                        })
                    }
                    Axis::Z => {
                        return Err(InstanceError::InvalidPriorityAxis {
                            reason: "only x and y are supported".into(),
                        })
                    }
                    _ => {}
                }
                let mut seen = BTreeSet::new();
                let categories: Vec<_> = p
                    .categories
                    .into_iter()
                    .filter(|c| seen.insert(*c))
                    .collect();
                (!categories.is_empty()).then_some(Priority { categories, axis })
            }
        };

        let mut incompatible = Vec::new();
        for (k, &[a, b]) in spec.incompatible.iter().enumerate() {
            if a == b {
                return Err(InstanceError::SelfIncompatible {
                    path: format!("incompatible[{k}]"),
                    category: a,
                });
            }
            incompatible.push((a.min(b), a.max(b)));
        }
        incompatible.sort_unstable();
        incompatible.dedup();

        let heavy: BTreeSet<_> = spec.heavy.iter().copied().collect();
        if !heavy.is_empty() && d != Dimensionality::Three {
            return Err(InstanceError::HeavyRequires3d);
        }

        if let Some(target) = spec.center_of_mass {
            if target.iter().any(|v| !v.is_finite()) {
                return Err(InstanceError::InvalidNumber {
                    path: "center_of_mass".into(),
                });
            }
            if !items.is_empty() && items.iter().all(|it| it.weight == 0) {
                return Err(InstanceError::ComWithoutWeight);
            }
        }

        let weights = spec.weights.unwrap_or_default();
        for (name, v) in [
            ("bins", weights.bins),
            ("push", weights.push),
            ("com", weights.com),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(InstanceError::InvalidNumber {
                    path: format!("weights.{name}"),
                });
            }
        }

        let mut x_offsets = Vec::with_capacity(n + 1);
        x_offsets.push(0u64);
        for b in &bins {
            x_offsets.push(x_offsets.last().unwrap() + b.dims[0] as u64);
        }

        Ok(Self {
            dimensionality: d,
            items,
            bins,
            associations,
            priority,
            incompatible,
            heavy,
            com_target: spec.center_of_mass,
            weights,
            x_offsets,
        })
    }

    /// Back to the serialized description. Consecutive items of one category are
    /// grouped into a single row with a quantity.
    pub fn to_spec(&self) -> InstanceSpec {
        let d = self.dimensionality.count();
        let mut items: Vec<ItemSpec> = Vec::new();
        for it in &self.items {
            match items.last_mut() {
                Some(last) if last.category == it.category => last.quantity += 1,
                _ => items.push(ItemSpec {
                    category: it.category,
                    quantity: 1,
                    dims: it.dims[..d].to_vec(),
                    weight: it.weight,
                }),
            }
        }
        InstanceSpec {
            dimensionality: d as u8,
            bins: self
                .bins
                .iter()
                .map(|b| BinSpec {
                    dims: b.dims[..d].to_vec(),
                    capacity: b.capacity,
                })
                .collect(),
            items,
            associations: self.associations.clone(),
            priority: self.priority.as_ref().map(|p| PrioritySpec {
                categories: p.categories.clone(),
                axis: Some(p.axis),
            }),
            incompatible: self.incompatible.iter().map(|&(a, b)| [a, b]).collect(),
            heavy: self.heavy.iter().copied().collect(),
            center_of_mass: self.com_target,
            weights: Some(self.weights),
        }
    }

    /// Same instance with different objective weights.
    pub fn with_weights(&self, weights: ObjectiveWeights) -> Result<Self, InstanceError> {
        let mut spec = self.to_spec();
        spec.weights = Some(weights);
        Self::validate(spec)
    }

    pub fn dimensionality(&self) -> Dimensionality {
        self.dimensionality
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn bins(&self) -> &[Bin] {
        &self.bins
    }

    pub fn item_count(&self) -> usize {
        self.items.len()
    }

    pub fn bin_count(&self) -> usize {
        self.bins.len()
    }

    pub fn associations(&self) -> &BTreeMap<CategoryId, Vec<usize>> {
        &self.associations
    }

    pub fn priority(&self) -> Option<&Priority> {
        self.priority.as_ref()
    }

    /// Normalized `(a, b)` pairs with `a < b`, sorted.
    pub fn incompatible_pairs(&self) -> &[(CategoryId, CategoryId)] {
        &self.incompatible
    }

    pub fn heavy_categories(&self) -> &BTreeSet<CategoryId> {
        &self.heavy
    }

    pub fn com_target(&self) -> Option<[f64; 2]> {
        self.com_target
    }

    pub fn weights(&self) -> ObjectiveWeights {
        self.weights
    }

    /// Eligible bins of a category: its association list, or every bin.
    pub fn eligible_bins(&self, category: CategoryId) -> Vec<usize> {
        match self.associations.get(&category) {
            Some(list) => list.clone(),
            None => (0..self.bins.len()).collect(),
        }
    }

    pub fn is_eligible(&self, category: CategoryId, bin: usize) -> bool {
        match self.associations.get(&category) {
            Some(list) => list.binary_search(&bin).is_ok(),
            None => bin < self.bins.len(),
        }
    }

    pub fn are_incompatible(&self, a: CategoryId, b: CategoryId) -> bool {
        self.incompatible
            .binary_search(&(a.min(b), a.max(b)))
            .is_ok()
    }

    /// Delivery rank of a category; `None` for categories without priority.
    pub fn priority_rank(&self, category: CategoryId) -> Option<usize> {
        self.priority
            .as_ref()?
            .categories
            .iter()
            .position(|&c| c == category)
    }

    /// True when item `a` must be delivered before item `b`.
    pub fn delivered_before(&self, a: usize, b: usize) -> bool {
        let ra = self.priority_rank(self.items[a].category);
        let rb = self.priority_rank(self.items[b].category);
        match (ra, rb) {
            (Some(ra), Some(rb)) => ra < rb,
            (Some(_), None) => true,
            _ => false,
        }
    }

    /// Categories in order of first appearance.
    pub fn categories(&self) -> Vec<CategoryId> {
        let mut seen = BTreeSet::new();
        self.items
            .iter()
            .map(|it| it.category)
            .filter(|c| seen.insert(*c))
            .collect()
    }

    /// Global x coordinate where bin `j` starts (sum of the preceding lengths).
    pub fn x_offset(&self, bin: usize) -> u64 {
        self.x_offsets[bin]
    }

    /// Sum of all bin lengths: the span of the global x axis.
    pub fn total_length(&self) -> u64 {
        *self.x_offsets.last().unwrap()
    }

    pub fn max_width(&self) -> u32 {
        self.bins.iter().map(|b| b.dims[1]).max().unwrap_or(0)
    }

    pub fn max_height(&self) -> u32 {
        self.bins.iter().map(|b| b.dims[2]).max().unwrap_or(0)
    }

    /// Upper bound of the position variable along `axis`.
    pub fn axis_span(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.total_length() as f64,
            Axis::Y => self.max_width() as f64,
            Axis::Z => self.max_height() as f64,
        }
    }

    pub fn total_weight(&self) -> u64 {
        self.items.iter().map(|it| it.weight).sum()
    }
}

fn read_dims(raw: &[u32], d: Dimensionality, path: &str) -> Result<[u32; 3], InstanceError> {
    if raw.len() != d.count() {
        return Err(InstanceError::DimensionMismatch {
            path: path.to_string(),
            expected: d.count(),
            found: raw.len(),
        });
    }
    if raw.contains(&0) {
        return Err(InstanceError::ZeroDimension {
            path: path.to_string(),
        });
    }
    let mut dims = [0; 3];
    dims[..raw.len()].copy_from_slice(raw);
    Ok(dims)
}
