//! Scalar abstraction: every numeric kernel in this crate is generic over a
//! real floating-point type (`f32` or `f64`).

use nalgebra::{Complex, RealField};
use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Real scalar for spectral computations: `f32` or `f64`.
///
/// `RealField` brings the transcendental functions and lets `Complex<T>`
/// participate in nalgebra's dense linear algebra (LU determinants, Schur
/// eigenvalues); `Num` keeps `Complex<T>` arithmetic available and the
/// `*Primitive` bounds cover literal conversion.
pub trait Real: RealField + Num + FromPrimitive + ToPrimitive + Copy + Default {}

impl<T: RealField + Num + FromPrimitive + ToPrimitive + Copy + Default> Real for T {}

/// Convert an `f64` constant into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant must convert into the scalar type")
}

/// Convert a `usize` count into `T`.
#[inline]
pub fn count<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("usize must convert into the scalar type")
}

/// Convert an `i64` index into `T`.
#[inline]
pub fn index<T: Real>(n: i64) -> T {
    T::from_i64(n).expect("i64 index must convert into the scalar type")
}

/// Convert `T` to `f64` (for diagnostics and interchange files).
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().expect("scalar embeds into f64")
}

/// Machine epsilon of the scalar type (distance from 1 to the next float).
pub fn machine_epsilon<T: Real>() -> T {
    let one = T::one();
    let two = lit::<T>(2.0);
    let mut eps = one;
    while one + eps / two > one {
        eps /= two;
    }
    eps
}

/// Euclidean remainder: `x mod m` in `[0, m)` for `m > 0`.
#[inline]
pub fn fmod_pos<T: Real>(x: T, m: T) -> T {
    let r = x - (x / m).floor() * m;
    // Guard the half-open interval against rounding at the upper edge.
    if r >= m {
        r - m
    } else if r < T::zero() {
        r + m
    } else {
        r
    }
}

/// Unit phasor `e^{i a}`.
#[inline]
pub fn unit_phasor<T: Real>(a: T) -> Complex<T> {
    Complex::new(a.cos(), a.sin())
}

/// Squared modulus of a complex number, without the `Float` bound.
#[inline]
pub fn cmod2<T: Real>(z: Complex<T>) -> T {
    z.re * z.re + z.im * z.im
}

/// Modulus of a complex number.
#[inline]
pub fn cmod<T: Real>(z: Complex<T>) -> T {
    cmod2(z).sqrt()
}

/// Principal argument of a complex number, in `(-pi, pi]`.
#[inline]
pub fn carg<T: Real>(z: Complex<T>) -> T {
    z.im.atan2(z.re)
}

/// Distance between two phases measured on the unit circle of period `m`.
#[inline]
pub fn cyclic_distance<T: Real>(a: T, b: T, m: T) -> T {
    let d = fmod_pos(a - b, m);
    d.min(m - d)
}
