//! Spectral density, non-dynamical shift and the memory kernel of the
//! amplitude equation.

mod density;
mod emitter;
mod memory;

pub use density::{nondyn_shift, nondyn_shift_with, spectral_density, spectral_density_tilde, ShiftGuard};
pub use emitter::{Coupling, EmitterConfig, ShiftPrefactor};
pub use memory::{
    build_kernel_table, build_kernel_table_with, memory_kernel, time_steps, FrequencyGrid, KernelOptions, KernelTable,
    QuadratureInfo,
};
