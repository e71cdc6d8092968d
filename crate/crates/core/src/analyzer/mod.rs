//! Learning-curve analytics over training traces: per-epoch gains,
//! critical-period detection, cross-inference comparison of sequential
//! switch points, and SVG figures.

mod critical;
mod cross;
mod render;

pub use critical::{
    cp_vs_data_fraction, detect_critical_period, detect_in_rows, gain_rows, gains,
    CriticalPeriodReport, CriticalPeriodStream, DetectionParams, FractionSummary, GainMatrix,
};
pub use cross::{cross_inference_compare, ClassSummary, CrossInferenceReport, VisemeBars};
pub use render::{
    bars_svg, distribution_svg, heatmap_svg, render_bars, render_heatmap, BAR_FAMILIES,
    BAR_PLOT_HEIGHT,
};
