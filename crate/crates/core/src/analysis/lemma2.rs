use super::AnalysisError;
use crate::odesim::{integrate_fixed, FieldError, VectorField};

/// Perturbed cone dynamics `ẇ₁ = w₂`,
/// `ẇ₂ = (a₁ sin w₁ + ε(t))/(1 + k a₂ cos w₁)` with `|ε(t)| ≤ ℓ₁e^{−ℓ₂t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma2Setup {
    pub k: f64,
    pub a1: f64,
    pub a2: f64,
    pub l1: f64,
    pub w0: [f64; 2],
}

impl Lemma2Setup {
    /// Rejects `k` within `1e-6` of `−1/a₂` (where `H_w^min` diverges) and
    /// initial angles outside the cone.
    pub fn new(k: f64, a1: f64, a2: f64, l1: f64, w0: [f64; 2]) -> Result<Self, AnalysisError> {
        if !(a1 > 0.0 && a2 > 0.0 && l1 >= 0.0) {
            return Err(AnalysisError::InvalidSetup(
                "need a1 > 0, a2 > 0, l1 >= 0".into(),
            ));
        }
        if !(k < -1.0 / a2 - 1e-6) {
            return Err(AnalysisError::InvalidSetup(format!(
                "k = {k} must satisfy k < -1/a2 with margin 1e-6 (-1/a2 = {})",
                -1.0 / a2
            )));
        }
        let setup = Self { k, a1, a2, l1, w0 };
        if !(w0[0].abs() < setup.beta_star()) {
            return Err(AnalysisError::InvalidSetup(format!(
                "w1(0) = {} is outside the cone |w1| < {}",
                w0[0],
                setup.beta_star()
            )));
        }
        Ok(setup)
    }

    pub fn beta_star(&self) -> f64 {
        (-1.0 / (self.k * self.a2)).acos()
    }

    /// `k₀ = −2k a₂/a₁`.
    pub fn k0(&self) -> f64 {
        -2.0 * self.k * self.a2 / self.a1
    }

    /// `H_w^min = (a₁/(k a₂)) ln(−1 − k a₂)`, the value of the potential at the
    /// origin.
    pub fn hw_min(&self) -> f64 {
        self.a1 / (self.k * self.a2) * (-1.0 - self.k * self.a2).ln()
    }

    /// `H_w(w) = ½w₂² + (a₁/(k a₂)) ln|1 + k a₂ cos w₁|`.
    pub fn hw(&self, w: [f64; 2]) -> f64 {
        let ka2 = self.k * self.a2;
        0.5 * w[1] * w[1] + self.a1 / ka2 * (1.0 + ka2 * w[0].cos()).abs().ln()
    }

    /// `F(r) = exp(−k a₂ r/a₁) − √(2(r − H_w^min))`, defined for `r ≥ H_w^min`.
    pub fn f(&self, r: f64) -> f64 {
        (-self.k * self.a2 * r / self.a1).exp() - (2.0 * (r - self.hw_min())).sqrt()
    }
}

/// Largest root `r₀` of [`Lemma2Setup::f`].
///
/// `F` is convex, positive at `H_w^min` and eventually increasing, so the
/// search doubles an upper point until `F` is positive and rising there,
/// locates the minimum by golden section, and bisects between the minimum
/// and the upper point.
pub fn lemma2_r0(setup: &Lemma2Setup) -> Result<f64, AnalysisError> {
    let lo = setup.hw_min();
    let f = |r: f64| setup.f(r);
    let mut hi = lo.abs().max(1.0);
    let mut doublings = 0;
    while !(f(hi) > 0.0 && f(hi * 1.001 + 1e-9) > f(hi)) {
        hi *= 2.0;
        doublings += 1;
        if doublings > 60 || !f(hi).is_finite() {
            return Err(AnalysisError::NoRoot(format!(
                "F never turns positive and increasing; F({hi}) = {}",
                f(hi)
            )));
        }
    }

    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        if b - a < 1e-12 * (1.0 + b.abs()) {
            break;
        }
    }
    let rmin = 0.5 * (a + b);
    if !(f(rmin) < 0.0) {
        return Err(AnalysisError::NoRoot(format!(
            "F stays nonnegative: min F = F({rmin}) = {}, F({lo}) = {}, F({hi}) = {}",
            f(rmin),
            f(lo),
            f(hi)
        )));
    }

    let (mut left, mut right) = (rmin, hi);
    debug_assert!(f(left) * f(right) < 0.0);
    for _ in 0..400 {
        let mid = 0.5 * (left + right);
        if mid <= left || mid >= right {
            break;
        }
        if f(mid) < 0.0 {
            left = mid;
        } else {
            right = mid;
        }
    }
    let r0 = if f(left).abs() < f(right).abs() { left } else { right };
    if !(r0 > 0.0) {
        return Err(AnalysisError::NoRoot(format!("largest root {r0} is not positive")));
    }
    Ok(r0)
}

/// `ℓ₂^min = k₀ℓ₁ exp{k₀ max(r₀, H_w^min + H_w(w(0)))}`.
pub fn lemma2_l2min(setup: &Lemma2Setup) -> Result<f64, AnalysisError> {
    let r0 = lemma2_r0(setup)?;
    let k0 = setup.k0();
    let level = r0.max(setup.hw_min() + setup.hw(setup.w0));
    Ok(k0 * setup.l1 * (k0 * level).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma2Report {
    pub stayed_in_cone: bool,
    pub max_abs_w2: f64,
    /// Smallest `β* − |w₁(t)|`.
    pub min_margin: f64,
    /// Set when the run stopped at the cone boundary.
    pub exit_time: Option<f64>,
}

struct ConeField<'a> {
    setup: &'a Lemma2Setup,
    l2: f64,
}

impl VectorField for ConeField<'_> {
    fn dimension(&self) -> usize {
        3
    }
    fn eval(&self, s: &[f64], ds: &mut [f64]) -> Result<(), FieldError> {
        let p = self.setup;
        let den = 1.0 + p.k * p.a2 * s[0].cos();
        if den >= 0.0 {
            return Err(FieldError::Inadmissible(format!("w1 = {} left the cone", s[0])));
        }
        ds[0] = s[1];
        ds[1] = (p.a1 * s[0].sin() + p.l1 * (-self.l2 * s[2]).exp()) / den;
        ds[2] = 1.0;
        Ok(())
    }
}

/// Simulates the worst-case perturbation `ε = ℓ₁e^{−ℓ₂t}` over `horizon`.
/// Leaving the cone ends the run and is reported, not raised.
pub fn lemma2_check(setup: &Lemma2Setup, l2: f64, horizon: f64) -> Result<Lemma2Report, AnalysisError> {
    if !(l2 > 0.0 && horizon > 0.0) {
        return Err(AnalysisError::InvalidSetup("need l2 > 0 and horizon > 0".into()));
    }
    let field = ConeField { setup, l2 };
    let beta = setup.beta_star();
    let x0 = [setup.w0[0], setup.w0[1], 0.0];
    let (traj, exit_time) = match integrate_fixed(&field, &x0, 0.0, horizon, 1e-3) {
        Ok(t) => (t, None),
        Err(e) => {
            let time = e.abort_time();
            match e.into_partial() {
                Some(partial) => (partial, time),
                None => return Err(AnalysisError::InvalidSetup("integration refused".into())),
            }
        }
    };
    let mut max_abs_w2: f64 = 0.0;
    let mut min_margin = f64::INFINITY;
    for s in traj.states() {
        max_abs_w2 = max_abs_w2.max(s[1].abs());
        min_margin = min_margin.min(beta - s[0].abs());
    }
    Ok(Lemma2Report {
        stayed_in_cone: exit_time.is_none() && min_margin > 0.0,
        max_abs_w2,
        min_margin,
        exit_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults(l1: f64) -> Lemma2Setup {
        Lemma2Setup::new(-4.0, 9.8, 1.0, l1, [0.3, 0.0]).unwrap()
    }

    #[test]
    fn root_and_positivity_beyond() {
        let s = defaults(0.1);
        let r0 = lemma2_r0(&s).unwrap();
        assert!(s.f(r0).abs() <= 1e-10);
        for i in 1..=100 {
            assert!(s.f(r0 + 0.05 * i as f64) >= 0.0);
        }
        assert!((r0 - 2.97).abs() < 0.05, "r0 = {r0}");
    }

    #[test]
    fn l2min_by_formula() {
        let s = defaults(0.1);
        let k0 = 2.0 * 4.0 / 9.8;
        let hw_min = (9.8 / -4.0) * 3f64.ln();
        let hw0 = (9.8 / -4.0) * (1.0 - 4.0 * 0.3f64.cos()).abs().ln();
        let r0 = lemma2_r0(&s).unwrap();
        let expect = k0 * 0.1 * (k0 * r0.max(hw_min + hw0)).exp();
        assert!((lemma2_l2min(&s).unwrap() - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn l2min_is_linear_in_l1_and_grows_with_speed() {
        let a = lemma2_l2min(&defaults(0.1)).unwrap();
        let b = lemma2_l2min(&defaults(0.05)).unwrap();
        assert!((a - 2.0 * b).abs() < 1e-12);
        let mut last = 0.0;
        for w2 in [0.0, 1.0, 3.0, 6.0] {
            let s = Lemma2Setup::new(-4.0, 9.8, 1.0, 0.1, [0.3, w2]).unwrap();
            let v = lemma2_l2min(&s).unwrap();
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn guaranteed_rate_keeps_cone() {
        let s = defaults(0.1);
        let l2 = 2.0 * lemma2_l2min(&s).unwrap();
        let rep = lemma2_check(&s, l2, 30.0).unwrap();
        assert!(rep.stayed_in_cone, "{rep:?}");
        let free = lemma2_check(&defaults(0.0), 0.01, 30.0).unwrap();
        assert!(free.stayed_in_cone);
    }

    #[test]
    fn cone_exit_is_reported() {
        let s = Lemma2Setup::new(-4.0, 9.8, 1.0, 50.0, [0.3, 0.0]).unwrap();
        let rep = lemma2_check(&s, 0.01, 30.0).unwrap();
        assert!(!rep.stayed_in_cone);
        assert!(rep.exit_time.is_some());
    }

    #[test]
    fn degenerate_gain_rejected() {
        assert!(Lemma2Setup::new(-1.0 - 1e-7, 9.8, 1.0, 0.1, [0.0, 0.0]).is_err());
        assert!(Lemma2Setup::new(-4.0, 9.8, 1.0, 0.1, [1.4, 0.0]).is_err());
    }
}
