//! Synthetic data, experiment drivers and validation oracles.

mod common;
mod generate;
mod mnist;
mod rng;
mod synthetic;
mod validation;

pub use common::{
    auto_eps, correlation, mean_std, EpsSpec, ExperimentOutput, ExperimentReport, FieldTable,
    Instance, KernelSpec, MethodSettings, Solved,
};
pub use generate::{generate, Generator, LabelPoint, SyntheticSpec};
pub use mnist::{
    draw_class_labels, load_mnist_dir, run_mnist, run_mnist_on, MnistParams, CLASS_COUNT,
};
pub use rng::{mix64, rng_from_seed, trial_seed, ExperimentRng};
pub use synthetic::{
    boundary_nodes, box_stats, diagonal_deviation, run_decision_boundary, run_strip,
    run_two_point_box, strip_error, two_point_labels, wnll_degeneracy_probe, BoundaryParams,
    BoxParams, BoxStats, DegeneracyParams, StripParams,
};
pub use validation::{
    barrier_check, consistency_check, holder_check, holder_probe, radial_oracle_check,
    radial_profile, BarrierParams, BarrierResult, ConsistencyParams, ConsistencyProbe,
    ConsistencyRow, HolderParams, HolderReport, RadialParams, RadialProfile, RingValues,
    TestFunction,
};
