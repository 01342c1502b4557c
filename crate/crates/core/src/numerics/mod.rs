//! Small numerical kernels shared by the geometry engines.

pub mod interp;
pub mod mat2;
pub mod quad;
pub mod rk4;

pub use interp::MonotoneCubic;
pub use mat2::Mat2;
