//! Fixed-step integrators shared by the coefficient and master-equation code.

use crate::model::C64;

/// One classical RK4 step for a system of `N` complex unknowns. `f(stage, y)`
/// receives the stage (0: start, 1: midpoint, 2: end) instead of a time so
/// callers can look up tabulated coefficients.
#[inline]
pub(crate) fn rk4_step<const N: usize>(
    y: &[C64; N],
    h: f64,
    mut f: impl FnMut(usize, &[C64; N]) -> [C64; N],
) -> [C64; N] {
    let add = |a: &[C64; N], b: &[C64; N], s: f64| -> [C64; N] {
        let mut o = *a;
        for i in 0..N {
            o[i] += b[i] * s;
        }
        o
    };
    let k1 = f(0, y);
    let k2 = f(1, &add(y, &k1, 0.5 * h));
    let k3 = f(1, &add(y, &k2, 0.5 * h));
    let k4 = f(2, &add(y, &k3, h));
    let mut out = *y;
    for i in 0..N {
        out[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
    }
    out
}

/// Trapezoidal rule over equally spaced samples.
pub(crate) fn trapezoid(values: impl ExactSizeIterator<Item = C64>, h: f64) -> C64 {
    let n = values.len();
    if n < 2 {
        return C64::new(0.0, 0.0);
    }
    let mut acc = C64::new(0.0, 0.0);
    for (i, v) in values.enumerate() {
        if i == 0 || i == n - 1 {
            acc += v * 0.5;
        } else {
            acc += v;
        }
    }
    acc * h
}
