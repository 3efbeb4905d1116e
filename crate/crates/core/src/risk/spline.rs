//! Natural cubic spline through sorted knots, with linear extension beyond
//! the end knots (zero curvature at the boundaries).

#[derive(Debug, Clone, PartialEq)]
pub struct NaturalCubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl NaturalCubicSpline {
    /// `x` must be strictly increasing; at least one knot is required.
    pub fn new(x: &[f64], y: &[f64]) -> Option<Self> {
        let n = x.len();
        if n == 0 || n != y.len() || x.windows(2).any(|w| !(w[1] > w[0])) {
            return None;
        }
        let mut m = vec![0.0; n];
        if n > 2 {
            // tridiagonal system for the interior second derivatives
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            let mut upper = vec![0.0; k];
            for i in 0..k {
                let h0 = x[i + 1] - x[i];
                let h1 = x[i + 2] - x[i + 1];
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h1 - (y[i + 1] - y[i]) / h0);
            }
            for i in 1..k {
                let lower = x[i + 1] - x[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
            }
        }
        Some(NaturalCubicSpline { x: x.to_vec(), y: y.to_vec(), m })
    }

    fn slope_at(&self, i: usize, at_right: bool) -> f64 {
        let h = self.x[i + 1] - self.x[i];
        let d = (self.y[i + 1] - self.y[i]) / h;
        if at_right {
            d + h * (2.0 * self.m[i + 1] + self.m[i]) / 6.0
        } else {
            d - h * (2.0 * self.m[i] + self.m[i + 1]) / 6.0
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if n == 1 {
            return self.y[0];
        }
        if t <= self.x[0] {
            return self.y[0] + self.slope_at(0, false) * (t - self.x[0]);
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1] + self.slope_at(n - 2, true) * (t - self.x[n - 1]);
        }
        let i = self.x.partition_point(|&v| v <= t).saturating_sub(1).min(n - 2);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i] + b * self.y[i + 1] + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_knots_and_lines() {
        let x = [0.0, 1.0, 2.5, 4.0];
        let y = [1.0, 3.0, 2.0, 5.0];
        let s = NaturalCubicSpline::new(&x, &y).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((s.eval(*a) - b).abs() < 1e-12);
        }
        // a line is reproduced everywhere, including extrapolation
        let l = NaturalCubicSpline::new(&x, &x.map(|v| 2.0 * v - 1.0)).unwrap();
        for t in [-3.0, 0.3, 3.3, 9.0] {
            assert!((l.eval(t) - (2.0 * t - 1.0)).abs() < 1e-12);
        }
        assert!(NaturalCubicSpline::new(&[1.0, 1.0], &[0.0, 0.0]).is_none());
        assert_eq!(NaturalCubicSpline::new(&[2.0], &[7.0]).unwrap().eval(10.0), 7.0);
    }

    #[test]
    fn matches_hand_solution_on_three_knots() {
        // knots (0,0), (1,1), (2,0): interior curvature m1 = -3
        let s = NaturalCubicSpline::new(&[0.0, 1.0, 2.0], &[0.0, 1.0, 0.0]).unwrap();
        assert!((s.eval(0.5) - 0.6875).abs() < 1e-12);
        // linear extension with the end slope 1.5 / -1.5
        assert!((s.eval(-1.0) + 1.5).abs() < 1e-12);
        assert!((s.eval(3.0) + 1.5).abs() < 1e-12);
    }
}
