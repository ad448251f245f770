//! Wave functions rebuilt from moments through generalized Hermite expansions.

mod gaussian;
mod hermite;
mod state;
mod wave;

pub use gaussian::{
    gaussian_central_moment, gaussian_from_moments, gaussian_moment_sequence, GaussianParams,
    GaussianTemplate,
};
pub use hermite::HermiteBasis;
pub use state::{
    reconstruct, reconstruct_density, reconstruct_phase_derivative, write_profile_csv, ProfileRow,
    ReconstructedState, NEGATIVITY_TOL,
};
pub use wave::{
    global_phase_free, global_phase_rate, FallingTemplate, FreeGaussianPacket, NauenbergTransform,
    WaveFunction,
};
