use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Scalar type used by the path, queue, percolation and particle code.
///
/// Implemented for `f32` and `f64`. Random draws are always made in `f64`
/// and rounded, so an `f32` run sees the same noise as the `f64` run with
/// the same seed.
pub trait Real: Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    /// Converts a literal; every finite `f64` is representable (possibly rounded).
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("float to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
