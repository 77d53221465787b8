//! Shared numerical kernels: dense eigendecomposition, root bracketing,
//! least-squares fits, spectral peak extraction and a counter-based RNG.

mod eig;
mod fft;
mod fit;
mod rng;
mod roots;

pub use eig::{eig_general, eig_general_real, eig_hermitian, lu_rcond, Eigen};
pub use fft::{spectral_peaks, Peak};
pub use fit::{fit_exponential_decay, fit_line, fit_lorentzian, FitResult};
pub use rng::{CounterRng, Stream};
pub use roots::bisect_roots;

/// Relative tolerance for floating-point comparisons unless an operation says otherwise.
pub const REL_TOL: f64 = 1e-9;
