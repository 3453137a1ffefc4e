use clarabel::algebra::FloatT;

/// Floating-point type usable throughout the numeric layers.
///
/// Anything the interior-point backend accepts qualifies; in practice this is
/// `f32` or `f64`.
pub trait Scalar: FloatT {
    /// Lossy conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        <Self as num_traits::NumCast>::from(v).expect("f64 literal representable")
    }

    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl<T: FloatT> Scalar for T {}
