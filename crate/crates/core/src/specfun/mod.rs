//! Special functions over real and complex arguments.

pub mod gamma;
pub mod incgamma;
pub mod polylog;
pub mod quad;
pub mod zeta;

pub use gamma::{gamma, gamma_real, ln_gamma, rgamma};
pub use incgamma::{incomplete_gamma, lower_gamma, upper_gamma, IncGammaKind};
pub use polylog::{polylog, polylog_complex};
pub use quad::{integrate, QuadOptions, QuadResult};
pub use zeta::{riemann_zeta, riemann_zeta_with, zeta_real, ZetaOptions};
