//! Quadrature-only evaluators of the analytic energy formulas: Brown–York,
//! the conformally flat family and rotationally symmetric balls.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::rotsym::{boundary_mean_curvature, validate_profile};
use crate::geometry::{BoundaryGeometry, ConformalFactor, MetricSpec, RadialFactor, RotProfile, Topology};
use crate::quadrature::integrate_with_error;
use crate::scalar::Real;

/// An energy that may be `−∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EnergyValue {
    Finite(f64),
    NegInf,
}

impl EnergyValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            Self::Finite(v) => Some(v),
            Self::NegInf => None,
        }
    }

    pub fn is_neg_inf(self) -> bool {
        matches!(self, Self::NegInf)
    }
}

impl Serialize for EnergyValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(v) => s.serialize_f64(*v),
            Self::NegInf => s.serialize_str("-inf"),
        }
    }
}

impl<'de> Deserialize<'de> for EnergyValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Self::Finite(v)),
            Repr::Text(t) if t == "-inf" => Ok(Self::NegInf),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"-inf\", got {t:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    BrownYork,
    ConformalBoundary,
    ConformalInterior,
    Rotsym,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormResult {
    pub energy: EnergyValue,
    pub formula: Formula,
    /// Estimated quadrature error.
    pub error_estimate: f64,
}

/// `½ ∫_C (H_M − H_N) ds` on the selected components.
pub fn brown_york<T: Real>(geometry: &BoundaryGeometry<T>, components: &[usize]) -> T {
    let half = T::lit(0.5);
    components.iter().fold(T::zero(), |acc, &c| {
        let comp = &geometry.components[c];
        comp.h_n.iter().zip(&comp.ds).fold(acc, |a, (&h, &w)| a + half * (comp.h_m - h) * w)
    })
}

/// Both closed forms of the conformally flat energy with `C = ∂N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConformalEnergy {
    pub boundary: ClosedFormResult,
    pub interior: ClosedFormResult,
}

impl ConformalEnergy {
    pub fn energy(&self) -> EnergyValue {
        self.boundary.energy
    }
}

fn circles(topology: &Topology) -> Result<Vec<(f64, f64)>> {
    // (radius, σ) with the inward normal σ·r̂
    match *topology {
        Topology::Disk { radius } if radius > 0.0 => Ok(vec![(radius, -1.0)]),
        Topology::Annulus { inner, outer } if inner > 0.0 && outer > inner => Ok(vec![(outer, -1.0), (inner, 1.0)]),
        _ => Err(Error::InvalidSpec("invalid topology".into())),
    }
}

/// Conformally flat energy from a radial factor on the given topology.
pub fn conformal_energy_of_factor(factor: &RadialFactor<f64>, topology: &Topology) -> Result<ConformalEnergy> {
    let cs = circles(topology)?;
    let mut boundary = 0.0;
    let mut negative = false;
    for &(radius, sigma) in &cs {
        let jet = factor.jet(radius);
        if jet.value.abs() > 1e-10 {
            return Err(Error::InvalidSpec(format!(
                "conformal factor must vanish on the boundary circle r = {radius} (φ = {})",
                jet.value
            )));
        }
        // e_n φ is constant along a circle for radial φ
        let en_phi = (-jet.value).exp() * sigma * jet.d_r;
        if en_phi < -1e-12 {
            negative = true;
        }
        boundary += 0.5 * en_phi * 2.0 * std::f64::consts::PI * radius;
    }
    // ¼∫e^{2φ}R′ dx = −½∫Δφ dx = −π ∫ r Δφ dr
    let (a, b) = match *topology {
        Topology::Disk { radius } => (0.0, radius),
        Topology::Annulus { inner, outer } => (inner, outer),
    };
    let (integral, err) = integrate_with_error(|r: f64| r * factor.jet(r).laplacian(), a, b);
    let interior = -std::f64::consts::PI * integral;
    let value = |v: f64| if negative { EnergyValue::NegInf } else { EnergyValue::Finite(v) };
    Ok(ConformalEnergy {
        boundary: ClosedFormResult { energy: value(boundary), formula: Formula::ConformalBoundary, error_estimate: 1e-14 * boundary.abs().max(1.0) },
        interior: ClosedFormResult {
            energy: value(interior),
            formula: Formula::ConformalInterior,
            error_estimate: std::f64::consts::PI * err,
        },
    })
}

/// Closed form for a conformally flat specification.
pub fn conformal_energy(spec: &MetricSpec) -> Result<ConformalEnergy> {
    match spec {
        MetricSpec::ConformalFlat { topology, phi } => conformal_energy_of_factor(&RadialFactor::from_spec(phi)?, topology),
        MetricSpec::FlatDisk { radius } => conformal_energy_of_factor(
            &RadialFactor::from_spec(&ConformalFactor::PolyR2 { coeffs: vec![0.0] })?,
            &Topology::Disk { radius: *radius },
        ),
        MetricSpec::RotSym { n: 2, profile, rho_max } => {
            let rewrite = crate::geometry::rotsym::RotSymConformal::new(*profile, *rho_max)?;
            let radius = rewrite.flat_radius();
            conformal_energy_of_factor(&RadialFactor::RotSym(rewrite), &Topology::Disk { radius })
        }
        _ => Err(Error::Unsupported("the conformal closed form needs a conformally flat specification".into())),
    }
}

/// Volume of the unit sphere `S^{m}`.
pub fn unit_sphere_volume(m: usize) -> f64 {
    use std::f64::consts::PI;
    match m {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (m as f64 - 1.0) * unit_sphere_volume(m - 2),
    }
}

/// `½ Vol(∂N) ((n−1)/k − H_∂N)` with `k = s(ρ₀)`, or `−∞` when the bracket
/// is negative.
pub fn rotsym_energy(n: usize, profile: RotProfile, rho_max: f64) -> Result<ClosedFormResult> {
    if n < 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    validate_profile(profile, rho_max)?;
    let h = boundary_mean_curvature(n, profile, rho_max);
    if !(h > 0.0) {
        return Err(Error::OutOfHypothesis(format!("boundary mean curvature must be positive, got {h}")));
    }
    let k = profile.eval(rho_max).0;
    let vol = unit_sphere_volume(n - 1) * k.powi(n as i32 - 1);
    // the bracket is (n−1)·e_nφ of the conformal rewrite; below zero the
    // conformal energy is −∞
    let bracket = (n as f64 - 1.0) / k - h;
    if bracket < -1e-12 * h {
        return Ok(ClosedFormResult { energy: EnergyValue::NegInf, formula: Formula::Rotsym, error_estimate: 0.0 });
    }
    let energy = 0.5 * vol * bracket;
    Ok(ClosedFormResult { energy: EnergyValue::Finite(energy), formula: Formula::Rotsym, error_estimate: 1e-15 * energy.abs().max(1.0) })
}

/// The closed form applicable to a specification, if any.
pub fn closed_form_for(spec: &MetricSpec) -> Option<ClosedFormResult> {
    match spec {
        MetricSpec::RotSym { n, profile, rho_max } if *n != 2 => rotsym_energy(*n, *profile, *rho_max).ok(),
        MetricSpec::RotSym { n: 2, .. } | MetricSpec::ConformalFlat { .. } | MetricSpec::FlatDisk { .. } => {
            conformal_energy(spec).ok().map(|c| c.boundary)
        }
        MetricSpec::General2D { .. } => None,
        MetricSpec::RotSym { .. } => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{boundary_geometry, build_domain};
    use std::f64::consts::PI;

    fn poly(c: Vec<f64>) -> MetricSpec {
        MetricSpec::ConformalFlat { topology: Topology::Disk { radius: 1.0 }, phi: ConformalFactor::PolyR2 { coeffs: c } }
    }

    #[test]
    fn half_bump_gives_pi_by_both_forms() {
        let e = conformal_energy(&poly(vec![0.5, -0.5])).unwrap();
        assert!((e.boundary.energy.finite().unwrap() - PI).abs() < 1e-12);
        assert!((e.interior.energy.finite().unwrap() - PI).abs() < 1e-10);
    }

    #[test]
    fn squared_bump_has_zero_energy() {
        let spec = MetricSpec::ConformalFlat {
            topology: Topology::Disk { radius: 1.0 },
            phi: ConformalFactor::Bump { amplitude: 0.7, power: 2, radius: 1.0 },
        };
        let e = conformal_energy(&spec).unwrap();
        assert!(e.boundary.energy.finite().unwrap().abs() < 1e-12);
        assert!(e.interior.energy.finite().unwrap().abs() < 1e-10);
    }

    #[test]
    fn inward_decreasing_factor_is_negative_infinity() {
        let e = conformal_energy(&poly(vec![-0.5, 0.5])).unwrap();
        assert!(e.boundary.energy.is_neg_inf() && e.interior.energy.is_neg_inf());
    }

    #[test]
    fn factor_not_vanishing_on_boundary_is_rejected() {
        assert!(matches!(conformal_energy(&poly(vec![0.5, -0.4])), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn brown_york_matches_conformal_energy() {
        let spec = poly(vec![0.5, -0.5]);
        let d = build_domain::<f64>(&spec, (16, 64)).unwrap();
        let by = brown_york(&boundary_geometry(&d), &[0]);
        assert!((by - PI).abs() < 1e-8, "{by}");
    }

    #[test]
    fn round_three_ball_cap() {
        let e = rotsym_energy(3, RotProfile::Sin, PI / 3.0).unwrap();
        assert!((e.energy.finite().unwrap() - 3f64.sqrt() * PI).abs() < 1e-12);
    }

    #[test]
    fn flat_profile_has_zero_energy() {
        for n in 2..6 {
            assert!(rotsym_energy(n, RotProfile::Linear, 0.7).unwrap().energy.finite().unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn two_dimensional_cap_agrees_with_its_conformal_rewrite() {
        let rho0 = 1.1;
        let direct = rotsym_energy(2, RotProfile::Sin, rho0).unwrap().energy.finite().unwrap();
        let spec = MetricSpec::RotSym { n: 2, profile: RotProfile::Sin, rho_max: rho0 };
        let e = conformal_energy(&spec).unwrap();
        assert!((direct - e.boundary.energy.finite().unwrap()).abs() < 1e-8);
        assert!((direct - e.interior.energy.finite().unwrap()).abs() < 1e-8);
    }

    #[test]
    fn hyperbolic_cap_is_negative_infinity() {
        assert!(rotsym_energy(2, RotProfile::Sinh, 0.8).unwrap().energy.is_neg_inf());
        assert!(rotsym_energy(4, RotProfile::Sinh, 0.8).unwrap().energy.is_neg_inf());
    }

    #[test]
    fn nonpositive_boundary_curvature_is_out_of_hypothesis() {
        assert!(matches!(rotsym_energy(3, RotProfile::Sin, 2.0), Err(Error::OutOfHypothesis(_))));
    }

    #[test]
    fn energy_value_round_trips() {
        for v in [EnergyValue::Finite(1.25), EnergyValue::NegInf] {
            let s = serde_json::to_string(&v).unwrap();
            assert_eq!(serde_json::from_str::<EnergyValue>(&s).unwrap(), v);
        }
    }
}
