//! Catalog flows and maps, orbit sampling, adapted neighborhoods, invariant
//! manifolds, and the collapse of an isolated set to a point.

mod manifold;
mod neighborhood;
mod orbit;
mod quotient;
mod system;

pub use manifold::{analytic_direction, invariant_manifold_sample, ManifoldKind, ManifoldSample};
pub use neighborhood::{
    adapted_membership, audit_adapted, search_rho, AdaptedAudit, AdaptedNeighborhood, NeighborhoodSpec,
    DEFAULT_HORIZON,
};
pub use orbit::{
    is_rest_point, orbit_closure_to_point, orbit_segment_in_region, sample_orbit, Direction, OrbitSegment, Region,
    StopRule,
};
pub use quotient::{quotient_distance, quotient_system};
pub use system::{CatalogId, SystemKind, SystemSpec, DEFAULT_STEP};
