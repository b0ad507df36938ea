//! Lattice shape keys, turbulence displacement and the sampling policy that
//! combines them into per-sample deformation states.

mod displace;
mod keys;
mod lattice;
mod noise;
mod shape_key;
mod state;

pub use displace::{apply_displacement, bake_displacement_key, DisplaceParams};
pub use keys::{
    builtin_lattice_keys, hinge_keys, CategoryCounts, DeformConfig, DeformRig, HingeParams,
    LatticeKeyParams,
};
pub use lattice::{bake_lattice_key, bernstein, ffd_evaluate, Lattice};
pub use noise::{hard_turbulence, GradientNoise, Turbulence, NOISE_AMPLITUDE_BOUND, TURBULENCE_OCTAVES};
pub use shape_key::{apply_shape_keys, load_shape_keys, save_shape_keys, Category, ShapeKey};
pub use state::{sample_deformation, DeformationState, SamplingConfig};
