use ndarray::NdFloat;
use num_traits::FromPrimitive;

/// Floating point type the numerical routines are generic over.
pub trait Scalar: NdFloat + FromPrimitive + Default {
    /// Converts an `f64` literal; every finite literal is representable.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal fits in the scalar type")
    }

    /// Lossy widening used for reporting and RNG-driven decisions.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
