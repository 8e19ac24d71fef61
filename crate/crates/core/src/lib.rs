//! Recovery of third-order tensors from incomplete or grossly corrupted
//! observations by minimizing the framelet-transformed tensor nuclear norm
//! with ADMM.
//!
//! * [`tensor`]: dense tensors, mode-3 algebra, masks, SVT and soft-thresholding.
//! * [`framelet`]: undecimated B-spline tight frames along mode 3.
//! * [`transform`]: framelet, DCT and identity transforms behind one interface.
//! * [`solvers`]: completion and robust PCA solvers.
//! * [`analysis`]: transform-domain singular value spectra and truncated ranks.
//! * [`metrics`]: PSNR and SSIM.
//! * [`synth`]: seeded synthetic data.
//! * [`io`]: binary tensor and mask files.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod framelet;
pub mod io;
pub mod metrics;
pub mod solvers;
pub mod synth;
pub mod tensor;
pub mod transform;

pub use error::{Error, Result};
pub use framelet::{FilterBank, FrameletSystem};
pub use solvers::{complete, rpca, SolveReport, SolverConfig};
pub use tensor::{Mask, Matrix, Tensor3};
pub use transform::{Transform, TransformKind};
