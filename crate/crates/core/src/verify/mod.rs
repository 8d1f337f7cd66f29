//! Ground-truth checks: girth, bicycle-freeness, neighbor expansion,
//! simple-path counts, spectra and induced-subgraph density.

pub mod density;
pub mod expansion;
pub mod girth;
pub mod paths;
pub mod spectral;
pub mod subsets;

pub use density::{bethe_hessian_pd, subgraph_density_check, DensityOptions, DensityReport};
pub use expansion::{
    expansion_audit, girth_expansion_audit, unique_neighbors, AuditOptions, AuditReport, Mode,
    Threshold,
};
pub use girth::{girth, is_bicycle_free, BicycleReport};
pub use paths::count_lr_simple_paths;
pub use spectral::{lambda2, lambda2_bipartite, SpectralReport};
