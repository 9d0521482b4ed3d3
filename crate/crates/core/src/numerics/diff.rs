/// Derivative order for [`central_difference`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
}

/// Second-order central difference stencil. Used as a test oracle for the
/// analytic derivatives, never on a production path.
pub fn central_difference(f: impl Fn(f64) -> f64, x: f64, order: Order, step: f64) -> f64 {
    assert!(step > 0.0, "finite-difference step must be positive");
    match order {
        Order::First => (f(x + step) - f(x - step)) / (2.0 * step),
        Order::Second => (f(x + step) - 2.0 * f(x) + f(x - step)) / (step * step),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_slope_at_origin() {
        let h = 1e-3;
        let d = central_difference(f64::sin, 0.0, Order::First, h);
        assert!((d - 1.0).abs() < h * h);
    }

    #[test]
    fn second_derivative_of_half_angle_square() {
        let h = 1e-3;
        let f = |x: f64| (x / 2.0).sin().powi(2);
        let d = central_difference(f, 1.0, Order::Second, h);
        assert!((d - 1f64.cos() / 2.0).abs() < h * h);
    }
}
