/// Step-size search along the negative gradient ray.

/// How the per-iteration learning factor is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OlfMode {
    /// Newton step from finite-difference derivatives along the ray, with
    /// backtracking as the fallback.
    SecondOrder,
    /// Pure backtracking from z = 1.
    Backtracking,
}

/// Probe spacing for the ray derivatives.
const DERIVATIVE_H: f64 = 1e-3;

/// Upper clamp on the returned step.
const Z_MAX: f64 = 1e4;

/// Backtracking halvings before giving up.
const MAX_HALVINGS: u32 = 30;

/// Pick a step size z ≥ 0 for the ray f(z) = loss at `W − z·G`.
///
/// `SecondOrder` estimates f′(0) and f″(0) by central differences and takes
/// the Newton step −f′(0)/f″(0), clamped to (0, Z_MAX]. Whenever that step
/// is unusable — non-positive curvature, non-finite, non-positive, or simply
/// not decreasing f — it falls back to backtracking: halve from z = 1 until
/// f(z) < f(0). A return of exactly 0.0 means no decreasing step was found;
/// callers record that as a stall.
pub fn optimal_learning_factor<F: FnMut(f64) -> f64>(mut f: F, mode: OlfMode) -> f64 {
    let f0 = f(0.0);
    debug_assert!(f0.is_finite(), "line search needs a finite starting loss");
    if let OlfMode::SecondOrder = mode {
        let h = DERIVATIVE_H;
        let fp = f(h);
        let fm = f(-h);
        let d1 = (fp - fm) / (2.0 * h);
        let d2 = (fp - 2.0 * f0 + fm) / (h * h);
        if d2 > 0.0 {
            let z = (-d1 / d2).min(Z_MAX);
            if z.is_finite() && z > 0.0 && f(z) < f0 {
                return z;
            }
        }
    }
    let mut z = 1.0;
    for _ in 0..MAX_HALVINGS {
        if f(z) < f0 {
            return z;
        }
        z /= 2.0;
    }
    0.0
}
