//! Multiple kernel learning with an elastic-net constraint on the kernel
//! weights.
//!
//! Training alternates an SVM dual solve for a fixed kernel combination with
//! a closed-form-ish update of the weights θ, where θ ranges over
//! `η‖θ‖₁ + (1−η)‖θ‖₂² ≤ 1`. The weight update is a weighted sum of
//! reciprocals solved by a fixed-point iteration ([`wsr`]); the duality gap
//! comes from a linear program over the same set ([`enlp`]).
//!
//! ```
//! use elasticmkl::{datasets, train_model, ElasticNetMix, KernelSpec, MklConfig};
//!
//! let data = datasets::two_gaussians(30, 3.0, 1);
//! let kernels = [KernelSpec::linear(), KernelSpec::rbf(0.5)];
//! let cfg = MklConfig::new(ElasticNetMix::new(0.5).unwrap()).with_c(10.0);
//! let (model, fit) = train_model(&data.features, &data.labels, &kernels, &cfg).unwrap();
//! assert!(fit.converged);
//! assert_eq!(model.predict_features(&data.features[0]).unwrap(), -1.0);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod datasets;
pub mod enlp;
pub mod error;
pub mod gram;
pub mod mkl;
pub mod oracle;
pub mod persist;
pub mod svm;
pub mod wsr;

pub use data::{load_dataset, parse_dataset, DataFormat, Dataset};
pub use enlp::{enlp_solve, enlp_solve_detailed, LpActiveSet};
pub use error::{MklError, Result};
pub use gram::{
    build_gram_stack, composite_gram, load_kernel_config, parse_kernel_config, GramStack,
    KernelKind, KernelSpec,
};
pub use mkl::{
    decision_value, predict, train, train_model, KernelWeights, MklConfig, MklFit, MklModel,
    SupportVector, TraceRecord,
};
pub use oracle::{enlp_oracle, wsr_oracle};
pub use persist::{load_model, save_model, save_trace};
pub use svm::{solve_svm, SvmParams, SvmSolution};
pub use wsr::{
    scaling_grad, scaling_norm, wsr_solve, ElasticNetMix, WsrConfig, WsrSolution, WsrState,
    WsrStrategy,
};
