//! Scalar abstraction: every numeric routine in this crate is generic over a
//! floating-point scalar so the same code runs in `f32` and `f64`.

use std::fmt;

/// Floating-point scalar usable throughout the crate.
///
/// This is a convenience umbrella over [`num_traits::Float`] plus the
/// formatting and threading bounds the library needs. It is blanket-implemented
/// for `f32` and `f64`; downstream code never implements it by hand.
pub trait Scalar:
    num_traits::Float + num_traits::NumCast + fmt::Debug + fmt::Display + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: num_traits::Float + num_traits::NumCast + fmt::Debug + fmt::Display + Send + Sync + 'static
{
}

/// Cast an `f64` constant into `T`.
///
/// Panics only if the scalar type cannot represent the constant at all, which
/// cannot happen for the finite literals used in this crate with `f32`/`f64`.
#[inline]
pub(crate) fn lit<T: Scalar>(v: f64) -> T {
    T::from(v).expect("numeric literal must be representable in the scalar type")
}

/// Sum of a slice in index order (deterministic, no tree reduction).
#[inline]
pub(crate) fn sum<T: Scalar>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |acc, &x| acc + x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lit_roundtrips_in_both_widths() {
        assert_eq!(lit::<f64>(0.5), 0.5);
        assert_eq!(lit::<f32>(0.5), 0.5f32);
    }

    #[test]
    fn sum_is_index_ordered() {
        let xs = [1.0f64, 2.0, 3.0];
        assert_eq!(sum(&xs), 6.0);
        assert_eq!(sum::<f64>(&[]), 0.0);
    }
}
