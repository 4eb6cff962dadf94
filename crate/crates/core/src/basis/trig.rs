//! Closed-form derivatives of the one-dimensional building blocks.

/// `[f, f', f'', f''']` for `f(s) = cos(ω s)`.
pub(crate) fn cos_derivs(omega: f64, s: f64) -> [f64; 4] {
    let (sn, cs) = (omega * s).sin_cos();
    let w2 = omega * omega;
    [cs, -omega * sn, -w2 * cs, w2 * omega * sn]
}

/// `[f, f', f'', f''']` for `f(s) = sin(ω s)`.
pub(crate) fn sin_derivs(omega: f64, s: f64) -> [f64; 4] {
    let (sn, cs) = (omega * s).sin_cos();
    let w2 = omega * omega;
    [sn, omega * cs, -w2 * sn, -w2 * omega * cs]
}

/// Stream-function envelope `η_j(s) = sin(κs)·sin(jκs)` and its first three
/// derivatives, with `κ = π / L`.
///
/// Evaluated as `½[cos((j−1)κs) − cos((j+1)κs)]`; both cosines are
/// exactly ±1 at the walls, so `η_j` vanishes there to round-off.
pub(crate) fn envelope_derivs(j: usize, kappa: f64, s: f64) -> [f64; 4] {
    let lo = cos_derivs((j as f64 - 1.0) * kappa, s);
    let hi = cos_derivs((j as f64 + 1.0) * kappa, s);
    [
        0.5 * (lo[0] - hi[0]),
        0.5 * (lo[1] - hi[1]),
        0.5 * (lo[2] - hi[2]),
        0.5 * (lo[3] - hi[3]),
    ]
}
