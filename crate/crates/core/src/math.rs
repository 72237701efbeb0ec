//! Float shims so the numerical code reads the same with and without `std`.
//! With `std` the platform implementations are used; otherwise `libm`.

macro_rules! unary {
    ($($name:ident => $std:ident, $libm:ident;)*) => {$(
        #[inline(always)]
        pub fn $name(x: f64) -> f64 {
            #[cfg(feature = "std")]
            {
                x.$std()
            }
            #[cfg(not(feature = "std"))]
            {
                libm::$libm(x)
            }
        }
    )*};
}

unary! {
    sqrt => sqrt, sqrt;
    ln => ln, log;
    exp => exp, exp;
    sin => sin, sin;
    cos => cos, cos;
    cosh => cosh, cosh;
    sinh => sinh, sinh;
    floor => floor, floor;
}

#[inline(always)]
pub fn powf(x: f64, y: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        x.powf(y)
    }
    #[cfg(not(feature = "std"))]
    {
        libm::pow(x, y)
    }
}

#[inline(always)]
pub fn atan2(y: f64, x: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        y.atan2(x)
    }
    #[cfg(not(feature = "std"))]
    {
        libm::atan2(y, x)
    }
}

/// Squared Euclidean distance between two equally sized slices.
#[inline(always)]
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline(always)]
pub fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}
