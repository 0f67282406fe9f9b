//! Converter metrology: static linearity and spectral performance.

mod linearity;
mod spectrum;

pub use linearity::{
    histogram_linearity, inl_from_dnl, linearity_from_transitions, transition_levels, LinearityMethod,
    LinearityReport, TransitionLevels,
};
pub use spectrum::{analyze_spectrum, enob_from_sndr, power_spectrum, sndr_enob, SpectralMetrics, SpectrumReport};
