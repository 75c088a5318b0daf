//! Gain sweeps, figure presets, CSV tables and the phase-integral oracle.

pub mod oracle;
pub mod presets;
pub mod sweep;
pub mod table;

pub use oracle::{phase_quadrature_oracle, simpson, simpson_until_converged};
pub use presets::Preset;
pub use sweep::{sweep, sweep_all, GainGrid, Mode, Source, SweepRow, SweepSpec};
pub use table::{emit_csv, read_csv, write_csv, CSV_HEADER};
