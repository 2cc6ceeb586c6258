//! Mean-field rate equation for the `+1` density of a well-mixed population:
//!
//! ```text
//! dρ/dt = [ρ^α (1 − ρ) − ρ (1 − ρ)^α] / [ρ^α + (1 − ρ)^α]
//! ```
//!
//! For α > 1 the majority grows (0 and 1 attract); for α < 1 the flow
//! pushes back toward ρ = 1/2, which is why consensus stalls there.

use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_T_MAX: f64 = 200.0;

fn check_domain(rho: f64, alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::MeanField(format!("rho = {rho} outside [0, 1]")));
    }
    if !alpha.is_finite() {
        return Err(Error::MeanField(format!("alpha must be finite, got {alpha}")));
    }
    Ok(())
}

/// Right-hand side of the rate equation. Both endpoints are fixed points.
pub fn mf_rhs(rho: f64, alpha: f64) -> Result<f64> {
    check_domain(rho, alpha)?;
    Ok(rhs_unchecked(rho, alpha))
}

#[inline]
fn rhs_unchecked(rho: f64, alpha: f64) -> f64 {
    if rho <= 0.0 || rho >= 1.0 {
        return 0.0;
    }
    let q = 1.0 - rho;
    let (rp, qp) = (rho.powf(alpha), q.powf(alpha));
    (rp * q - rho * qp) / (rp + qp)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MfTrajectory {
    pub alpha: f64,
    pub dt: f64,
    pub times: Vec<f64>,
    pub rho_values: Vec<f64>,
}

impl MfTrajectory {
    pub fn final_rho(&self) -> f64 {
        *self.rho_values.last().expect("trajectory holds at least the initial point")
    }
}

/// Fixed-step classical RK4, clamped to `[0, 1]` after every step.
/// Takes `round(t_max / dt)` steps; `times[i] = i · dt`.
pub fn mf_integrate(rho0: f64, alpha: f64, dt: f64, t_max: f64) -> Result<MfTrajectory> {
    check_domain(rho0, alpha)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::MeanField(format!("dt must be positive, got {dt}")));
    }
    if !(t_max.is_finite() && t_max >= dt) {
        return Err(Error::MeanField(format!("t_max = {t_max} must be finite and at least dt = {dt}")));
    }
    let steps = (t_max / dt).round() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut rho_values = Vec::with_capacity(steps + 1);
    let f = |r: f64| rhs_unchecked(r.clamp(0.0, 1.0), alpha);
    let mut rho = rho0;
    times.push(0.0);
    rho_values.push(rho);
    for i in 1..=steps {
        let k1 = f(rho);
        let k2 = f(rho + 0.5 * dt * k1);
        let k3 = f(rho + 0.5 * dt * k2);
        let k4 = f(rho + dt * k3);
        rho = (rho + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).clamp(0.0, 1.0);
        times.push(i as f64 * dt);
        rho_values.push(rho);
    }
    Ok(MfTrajectory { alpha, dt, times, rho_values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPoint {
    pub rho: f64,
    pub stability: Stability,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointReport {
    pub alpha: f64,
    pub points: [FixedPoint; 3],
}

/// Classifies the fixed points 0, 1/2 and 1 from the flow direction at the
/// probes ρ = 1/4 and ρ = 3/4.
pub fn mf_fixed_point_stability(alpha: f64) -> Result<FixedPointReport> {
    if alpha == 1.0 {
        return Err(Error::MeanField("alpha = 1 makes the rate vanish identically".into()));
    }
    let low = mf_rhs(0.25, alpha)?;
    let high = mf_rhs(0.75, alpha)?;
    // flow toward 0 below 1/2 and toward 1 above it: ends attract
    let ends_attract = low < 0.0 && high > 0.0;
    let centre_attracts = low > 0.0 && high < 0.0;
    if !(ends_attract || centre_attracts) {
        return Err(Error::MeanField(format!("no sign structure at alpha = {alpha}")));
    }
    let (ends, centre) =
        if ends_attract { (Stability::Stable, Stability::Unstable) } else { (Stability::Unstable, Stability::Stable) };
    Ok(FixedPointReport {
        alpha,
        points: [
            FixedPoint { rho: 0.0, stability: ends },
            FixedPoint { rho: 0.5, stability: centre },
            FixedPoint { rho: 1.0, stability: ends },
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Literal uncancelled form of the rate equation.
    fn rhs_literal(r: f64, a: f64) -> f64 {
        r * (1.0 - r) / (r.powf(a) + (1.0 - r).powf(a)) * (r.powf(a - 1.0) - (1.0 - r).powf(a - 1.0))
    }

    #[test]
    fn rhs_examples() {
        for a in [-2.0, 0.0, 0.5, 1.0, 2.0, 7.0] {
            assert_eq!(mf_rhs(0.5, a).unwrap(), 0.0);
            assert_eq!(mf_rhs(0.0, a).unwrap(), 0.0);
            assert_eq!(mf_rhs(1.0, a).unwrap(), 0.0);
        }
        assert!((mf_rhs(0.75, 2.0).unwrap() - 0.15).abs() < 1e-15);
        // 40-digit evaluation
        assert!((mf_rhs(0.75, 0.5).unwrap() - (-0.116_025_403_784_438_65)).abs() < 1e-15);
        assert!((mf_rhs(0.3, 3.0).unwrap() - (-0.227_027_027_027_027_03)).abs() < 1e-15);
        assert!((mf_rhs(0.9, -1.0).unwrap() - (-0.8)).abs() < 1e-15);
    }

    #[test]
    fn rhs_domain_errors() {
        assert!(mf_rhs(-0.1, 2.0).is_err());
        assert!(mf_rhs(1.1, 2.0).is_err());
        assert!(mf_rhs(0.5, f64::INFINITY).is_err());
        assert!(mf_rhs(f64::NAN, 2.0).is_err());
    }

    #[test]
    fn integrate_fixed_point() {
        let t = mf_integrate(0.5, 0.5, 0.01, 10.0).unwrap();
        assert_eq!(t.times.len(), 1001);
        assert!(t.rho_values.iter().all(|&r| r == 0.5));
    }

    #[test]
    fn integrate_converges() {
        let t = mf_integrate(0.6, 2.0, DEFAULT_DT, DEFAULT_T_MAX).unwrap();
        assert!((t.final_rho() - 1.0).abs() < 1e-6);
        assert!(t.rho_values.windows(2).all(|w| w[1] >= w[0]));
        let t = mf_integrate(0.6, 0.5, DEFAULT_DT, DEFAULT_T_MAX).unwrap();
        assert!((t.final_rho() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn integrate_rejects_bad_params() {
        assert!(mf_integrate(0.5, 2.0, 0.0, 1.0).is_err());
        assert!(mf_integrate(0.5, 2.0, 0.1, 0.01).is_err());
        assert!(mf_integrate(1.5, 2.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn fourth_order_convergence() {
        let end = |dt: f64| mf_integrate(0.55, 3.0, dt, 4.0).unwrap().final_rho();
        let (a, b, c) = (end(0.1), end(0.05), end(0.025));
        let (d1, d2) = ((a - b).abs(), (b - c).abs());
        assert!(d1 <= 16.0 * d2 * 1.5, "d1={d1} d2={d2}");
        assert!(d1 / d2 > 10.0, "observed ratio {}", d1 / d2);
    }

    #[test]
    fn trajectory_derivative_matches_rhs() {
        let dt = 1e-3;
        let t = mf_integrate(0.55, 2.5, dt, 3.0).unwrap();
        for i in (1..t.rho_values.len() - 1).step_by(97) {
            let fd = (t.rho_values[i + 1] - t.rho_values[i - 1]) / (2.0 * dt);
            let r = mf_rhs(t.rho_values[i], 2.5).unwrap();
            assert!((fd - r).abs() < 1e-6, "i={i} fd={fd} rhs={r}");
        }
    }

    #[test]
    fn stability_classification() {
        let r = mf_fixed_point_stability(2.0).unwrap();
        let s: Vec<_> = r.points.iter().map(|p| p.stability).collect();
        assert_eq!(s, [Stability::Stable, Stability::Unstable, Stability::Stable]);
        let r = mf_fixed_point_stability(0.5).unwrap();
        let s: Vec<_> = r.points.iter().map(|p| p.stability).collect();
        assert_eq!(s, [Stability::Unstable, Stability::Stable, Stability::Unstable]);
        assert!(mf_fixed_point_stability(1.0).is_err());
    }

    proptest! {
        #[test]
        fn antisymmetry(r in 0.0f64..=1.0, a in -8.0f64..8.0) {
            let lhs = mf_rhs(r, a).unwrap();
            let rhs = mf_rhs(1.0 - r, a).unwrap();
            prop_assert!((lhs + rhs).abs() <= 1e-12);
        }

        #[test]
        fn matches_literal_form(r in 0.01f64..0.99, a in -4.0f64..6.0) {
            let got = mf_rhs(r, a).unwrap();
            prop_assert!((got - rhs_literal(r, a)).abs() <= 1e-12 * (1.0 + got.abs()));
        }
    }
}
