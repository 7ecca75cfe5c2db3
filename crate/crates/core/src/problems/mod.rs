//! Concrete objectives: piecewise-linear test functions and hinge-loss SVMs.

mod csv_data;
mod hinge;
mod piecewise;

pub use csv_data::{load_dense_csv, write_dense_csv, Dataset, LoadOptions};
pub use hinge::{synth_classification, HingeSvm, Labeled, MatrixSvm};
pub use piecewise::{synth_piecewise_linear, Certificate, L1Distance, PiecewiseLinear};
