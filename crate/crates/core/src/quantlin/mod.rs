//! Optimal local linearization of quantizers and transform coders.

mod scalar;
mod sweep;
mod transform;

pub use scalar::{
    fit_scalar, fit_scalar_oracle, local_mse, two_level_closed_form, uniform_closed_form,
    Interval, LinearFit, QuantizerError, ScalarQuantizer,
};
pub use sweep::{format_g, sweep_csv, sweep_grid, GridRange, SweepRow, SWEEP_HEADER};
pub use transform::{
    dct_basis, filter_response, fit_transform_coder, geometric_steps, rotation_45, ApproxArea,
    MonteCarlo, TransformCoder, VectorLinearFit,
};
