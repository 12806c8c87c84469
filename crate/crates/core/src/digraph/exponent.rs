use libm::log;

use super::GraphError;

/// Terms of the failure-probability exponent for a union of `d` random
/// Hamiltonian cycles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentTerms {
    /// `1 - (1 - gamma) * lambda / 2`
    pub a: f64,
    /// `1 - (1 + gamma) * lambda / 2`
    pub b: f64,
    /// Coefficient `c` of `n` in the exponent.
    pub coefficient: f64,
}

impl ExponentTerms {
    /// A non-negative coefficient gives no decaying bound.
    pub fn is_vacuous(&self) -> bool {
        self.coefficient >= 0.0
    }
}

fn xlogx(x: f64) -> f64 {
    x * log(x)
}

/// `c = (1 + lambda) ln 2 + d (a ln a + b ln b - (1 - lambda) ln(1 - lambda))`.
///
/// The probability that some `lambda * n`-subset of the union of `d` random
/// Hamiltonian cycles fails to contain an SCC of `gamma * lambda * n` vertices
/// decays like `e^{c n}` (up to an unspecified constant factor) when `c < 0`.
pub fn failure_exponent(gamma: f64, lambda: f64, d: u32) -> Result<ExponentTerms, GraphError> {
    let open_unit = |x: f64| x > 0.0 && x < 1.0;
    if !open_unit(gamma) {
        return Err(GraphError::InvalidParameter("gamma must lie in (0, 1)"));
    }
    if !open_unit(lambda) {
        return Err(GraphError::InvalidParameter("lambda must lie in (0, 1)"));
    }
    let a = 1.0 - (1.0 - gamma) * lambda / 2.0;
    let b = 1.0 - (1.0 + gamma) * lambda / 2.0;
    if !open_unit(a) || !open_unit(b) {
        return Err(GraphError::InvalidParameter(
            "derived terms a, b must lie in (0, 1)",
        ));
    }
    let per_cycle = xlogx(a) + xlogx(b) - xlogx(1.0 - lambda);
    let coefficient = (1.0 + lambda) * core::f64::consts::LN_2 + d as f64 * per_cycle;
    Ok(ExponentTerms { a, b, coefficient })
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independently evaluated at 30 significant digits.
    const DEGREE4_ANCHOR: f64 = -0.280_864_886_717_604_5;
    const DEGREE8_ANCHOR: f64 = -1.100_344_714_346_031_9;

    #[test]
    fn degree_four_anchor() {
        let t = failure_exponent(7.0 / 15.0, 15.0 / 16.0, 4).unwrap();
        assert!((t.a - 0.75).abs() < 1e-15);
        assert!((t.b - 5.0 / 16.0).abs() < 1e-15);
        assert!((t.coefficient - DEGREE4_ANCHOR).abs() < 1e-12);
        assert!(t.coefficient <= -0.25);
    }

    #[test]
    fn degree_eight_anchor() {
        let t = failure_exponent(0.5, 7.0 / 8.0, 8).unwrap();
        assert!((t.a - 25.0 / 32.0).abs() < 1e-15);
        assert!((t.b - 11.0 / 32.0).abs() < 1e-15);
        assert!((t.coefficient - DEGREE8_ANCHOR).abs() < 1e-12);
        assert!(t.coefficient <= -1.0);
    }

    #[test]
    fn zero_cycles_is_vacuous() {
        let t = failure_exponent(0.3, 0.6, 0).unwrap();
        assert!((t.coefficient - 1.6 * core::f64::consts::LN_2).abs() < 1e-15);
        assert!(t.is_vacuous());
    }

    #[test]
    fn rejects_singular_parameters() {
        assert!(failure_exponent(0.5, 1.0, 4).is_err());
        assert!(failure_exponent(0.0, 0.5, 4).is_err());
        assert!(failure_exponent(0.5, 0.0, 4).is_err());
    }
}
