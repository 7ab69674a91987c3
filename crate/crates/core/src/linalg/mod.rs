//! Small dense linear algebra for signature-(n,m) inner products.

pub mod frame;
pub mod normal_form;
pub mod onm;
pub mod random;
pub mod signature;

pub use frame::{
    frame_norm_bounds, tensor_norm_k_sq, tensor_norm_sq, FrameNormBounds, FramePair, Tensor,
};
pub use normal_form::{onm_normal_form, onm_normal_form_tol, reconstruct, NormalForm};
pub use onm::{check_onm, tilt, PseudoOrthogonalMatrix, ONM_TOL};
pub use signature::{inertia, inner, Signature};
