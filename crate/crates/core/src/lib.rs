//! Models of the coherent-state comparison amplifier.
//!
//! An unknown coherent state `|α⟩` is interfered with a guess state `|β⟩` on a
//! first beam splitter. One output goes to a comparison detector that must stay
//! dark; the other passes a weakly reflecting second beam splitter whose
//! reflected arm feeds a subtraction detector that must click. With the guess
//! `β = t₁α/r₁` the comparison port is nulled and the transmitted output is
//! `|gα⟩` with nominal amplitude gain `g = t₂/r₁`.
//!
//! * [`optics`] holds the domain types and the three optical primitives.
//! * [`analytic`] evaluates the exact success probabilities, fidelities and
//!   noise figure for the binary and phase-covariant input ensembles.
//! * [`montecarlo`] simulates the device shot by shot and cross-validates the
//!   closed forms.
//! * [`experiments`] runs gain sweeps, figure presets and the phase-integral
//!   quadrature oracle, and writes the CSV tables.
//! * [`fixtures`] regenerates and checks the committed regression values.

pub mod analytic;
pub mod bessel;
pub mod error;
pub mod experiments;
pub mod fixtures;
pub mod montecarlo;
pub mod optics;
pub mod oracles;

pub use error::{Error, Result};
pub use optics::{
    beam_splitter_transform, coherent_overlap, no_click_probability, AmplifierConfig, BeamSplitter,
    ComplexAmplitude, DetectorModel, EnsembleKind, InputEnsemble,
};
