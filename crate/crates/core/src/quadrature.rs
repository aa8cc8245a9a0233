//! Adaptive Simpson quadrature and a cubic Hermite lookup table.

/// `∫ₐᵇ f` by adaptive Simpson with Richardson correction.
///
/// `tol` is an absolute target. A panel is also accepted once its error
/// estimate is at rounding level, and recursion stops at depth 50 regardless.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    let noise = 64.0 * f64::EPSILON * (left.abs() + right.abs());
    if depth == 0 || delta.abs() <= (15.0 * tol).max(noise) {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Values and slopes of a function on a uniform grid, interpolated by
/// piecewise cubic Hermite polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteTable {
    lo: f64,
    h: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl HermiteTable {
    /// Tabulates `F(s) = ∫_{lo}^{s} f` at `nodes` points on `[lo, hi]`, with
    /// slopes `f(s)` taken exactly.
    pub fn antiderivative<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, nodes: usize, tol: f64) -> Self {
        assert!(nodes >= 2 && hi > lo);
        let h = (hi - lo) / (nodes - 1) as f64;
        let mut values = Vec::with_capacity(nodes);
        let mut slopes = Vec::with_capacity(nodes);
        let mut acc = 0.0;
        for i in 0..nodes {
            let s = lo + i as f64 * h;
            if i > 0 {
                acc += adaptive_simpson(&f, s - h, s, tol);
            }
            values.push(acc);
            slopes.push(f(s));
        }
        Self { lo, h, values, slopes }
    }

    pub fn lower(&self) -> f64 {
        self.lo
    }

    pub fn upper(&self) -> f64 {
        self.lo + self.h * (self.values.len() - 1) as f64
    }

    /// `None` outside the tabulated interval.
    pub fn eval(&self, s: f64) -> Option<f64> {
        if !(s >= self.lo && s <= self.upper()) {
            return None;
        }
        let last = self.values.len() - 2;
        let i = (((s - self.lo) / self.h) as usize).min(last);
        let t = (s - self.lo) / self.h - i as f64;
        let (p0, p1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * self.h, self.slopes[i + 1] * self.h);
        let t2 = t * t;
        let t3 = t2 * t;
        Some(
            (2.0 * t3 - 3.0 * t2 + 1.0) * p0
                + (t3 - 2.0 * t2 + t) * m0
                + (-2.0 * t3 + 3.0 * t2) * p1
                + (t3 - t2) * m1,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial_and_trig() {
        let v = adaptive_simpson(|x| x * x * x, 0.0, 2.0, 1e-12);
        assert!((v - 4.0).abs() < 1e-12);
        let v = adaptive_simpson(f64::sin, 0.0, std::f64::consts::PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-11);
    }

    #[test]
    fn hermite_reproduces_log() {
        let t = HermiteTable::antiderivative(|x| 1.0 / x, 1.0, 3.0, 201, 1e-13);
        for s in [1.0, 1.37, 2.0, 2.999, 3.0] {
            assert!((t.eval(s).unwrap() - f64::ln(s)).abs() < 1e-9, "s = {s}");
        }
        assert!(t.eval(0.5).is_none());
        assert!(t.eval(3.1).is_none());
    }
}
