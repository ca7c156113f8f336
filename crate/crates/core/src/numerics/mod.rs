//! Tensors, reverse-mode autodiff, GRU cells, SGD and gradient checking.

mod gradcheck;
mod graph;
mod gru;
mod optim;
mod params;
mod tensor;

pub use gradcheck::{finite_diff_check, GradCheck, GradCheckReport, DENOM_FLOOR};
pub use graph::{Gradients, Graph, Var};
pub use gru::{BoundGru, GruCell, GruStack, StackRun};
pub use optim::sgd_step;
pub use params::{ParamId, ParamStore, Parameter};
pub use tensor::{Scalar, Tensor};
