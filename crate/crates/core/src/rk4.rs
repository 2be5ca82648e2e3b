//! Classic fixed-step fourth-order Runge-Kutta.

use nalgebra::SVector;

/// Advances `x' = f(t, x)` from `t` by one step `dt`.
pub fn step<const N: usize, F>(f: F, t: f64, x: &SVector<f64, N>, dt: f64) -> SVector<f64, N>
where
    F: Fn(f64, &SVector<f64, N>) -> SVector<f64, N>,
{
    let half = 0.5 * dt;
    let k1 = f(t, x);
    let k2 = f(t + half, &(x + k1 * half));
    let k3 = f(t + half, &(x + k2 * half));
    let k4 = f(t + dt, &(x + k3 * dt));
    x + (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector2;

    #[test]
    fn harmonic_oscillator_fourth_order() {
        let f = |_t: f64, x: &Vector2<f64>| Vector2::new(x[1], -x[0]);
        let run = |dt: f64| {
            let steps = (1.0 / dt).round() as usize;
            let mut x = Vector2::new(1.0, 0.0);
            for k in 0..steps {
                x = step(f, k as f64 * dt, &x, dt);
            }
            (x[0] - 1.0f64.cos()).abs()
        };
        let ratio = run(0.1) / run(0.05);
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
    }
}
