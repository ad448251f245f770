//! Eötvös estimates, gravitational return times and interferometer phases.

mod eotvos;
mod interferometer;
mod phase;
mod return_time;

pub use eotvos::{
    anomalous_acceleration, eotvos_estimate, width_bound_from_eta, write_eotvos_csv, EotvosInput,
    TERRESTRIAL_D2G, TERRESTRIAL_G,
};
pub use interferometer::{
    mach_zehnder_phase, write_mz_csv, ArmReport, MachZehnderConfig, MzReport, MzRow, Readout,
};
pub use phase::{
    phase_line_integral, propagation_phase_plane_wave, propagation_phase_plane_wave_between,
    propagation_phase_second_order, propagation_phase_second_order_between, vertical_phase,
    PathPoint, PhasePath, PlaneWavePartials, Segment, SegmentKind, WidthTerms,
};
pub use return_time::{
    return_time, return_time_curve, write_return_time_csv, Abscissa, ReturnTime, ReturnTimeProblem,
    ReturnTimeRow, RowStatus, WidthPolicy, DEFAULT_ESCAPE_FACTOR, DEFAULT_T_MAX,
};
