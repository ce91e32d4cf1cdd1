//! Switchable soft adhesive mechanics.
//!
//! The pad is an elastomer membrane on a foam foundation whose pneumatic
//! pressure state changes both the area it can put in contact with an object
//! and its compliance in the loading direction. Pull-off force follows the
//! fracture-mechanics scaling `F_c = sqrt(G_c * A / C)` with unit prefactor;
//! the free constants are pinned by [`AdhesiveParams::calibrated`].
//!
//! All quantities are SI: metres, newtons, pascals, J/m².

use std::f64::consts::PI;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Standard gravity, m/s².
pub const GRAVITY: f64 = 9.81;

/// Indenter radius at which the force endpoints are measured.
pub const REFERENCE_RADIUS: f64 = 12.5e-3;
/// Pull-off force of the neutral-to-negative grasp at the reference radius, N.
pub const ADHESION_TARGET_FORCE: f64 = 18.0;
/// Pull-off force of the positive-to-negative (wrapping) grasp at the reference radius, N.
pub const WRAPPING_TARGET_FORCE: f64 = 50.0;
/// On/off force ratio of the wrapping grasp at the reference radius.
pub const SWITCHING_RATIO_TARGET: f64 = 187.0;
/// Porous-indenter calibration point: radius, porosity and the force reached there.
pub const POROUS_RADIUS: f64 = 7.5e-3;
pub const POROUS_POROSITY: f64 = 0.8;
pub const POROUS_TARGET_FORCE: f64 = 0.9;
/// Share of the base area touched by the inflated membrane at the reference radius.
pub const REFERENCE_APEX_FRACTION: f64 = 0.05;

/// Indentation protocol: preload pressure, hold duration and crosshead speed.
pub const PRELOAD_PRESSURE: f64 = 25.0e3;
pub const HOLD_DURATION: f64 = 5.0;
pub const CROSSHEAD_SPEED: f64 = 10.0e-3 / 60.0;
const TRACE_SAMPLE_PERIOD: f64 = 0.02;

/// Pneumatic state of one pad.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PressureState {
    Positive,
    Neutral,
    Negative,
}

impl PressureState {
    /// Gauge pressure applied to the membrane, Pa.
    pub fn pascals(self) -> f64 {
        match self {
            PressureState::Positive => 1.5e3,
            PressureState::Neutral => 0.0,
            PressureState::Negative => -85.0e3,
        }
    }
}

/// How the pad reached its load-bearing state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AdhesionMode {
    /// Flat membrane brought into contact, then stiffened by vacuum.
    NeutralToNegative,
    /// Inflated membrane pressed around the object, then constricted.
    PositiveToNegative,
    /// Membrane stays inflated: the release ("off") state.
    PositiveToPositive,
}

impl AdhesionMode {
    pub const ALL: [AdhesionMode; 3] = [
        AdhesionMode::NeutralToNegative,
        AdhesionMode::PositiveToNegative,
        AdhesionMode::PositiveToPositive,
    ];

    pub fn start_state(self) -> PressureState {
        match self {
            AdhesionMode::NeutralToNegative => PressureState::Neutral,
            AdhesionMode::PositiveToNegative | AdhesionMode::PositiveToPositive => {
                PressureState::Positive
            }
        }
    }

    pub fn load_state(self) -> PressureState {
        match self {
            AdhesionMode::PositiveToPositive => PressureState::Positive,
            _ => PressureState::Negative,
        }
    }

    /// Mode produced by switching a pad from `from` to `to` while in contact.
    pub fn from_transition(from: PressureState, to: PressureState) -> Option<AdhesionMode> {
        match (from, to) {
            (PressureState::Neutral, PressureState::Negative) => Some(AdhesionMode::NeutralToNegative),
            (PressureState::Positive, PressureState::Negative) => Some(AdhesionMode::PositiveToNegative),
            (PressureState::Positive, PressureState::Positive) => Some(AdhesionMode::PositiveToPositive),
            _ => None,
        }
    }

    pub fn is_on(self) -> bool {
        self != AdhesionMode::PositiveToPositive
    }
}

/// Surface texture of an object face: either unengraved or engraved with
/// lines at a given spacing (m). Serialized as `"smooth"` or a number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Roughness {
    Smooth,
    Spacing(f64),
}

impl Serialize for Roughness {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Roughness::Smooth => s.serialize_str("smooth"),
            Roughness::Spacing(d) => s.serialize_f64(*d),
        }
    }
}

impl<'de> Deserialize<'de> for Roughness {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Roughness::Spacing(v)),
            Raw::Str(s) if s == "smooth" => Ok(Roughness::Smooth),
            Raw::Str(s) => Err(de::Error::invalid_value(
                de::Unexpected::Str(&s),
                &"a spacing in metres or \"smooth\"",
            )),
        }
    }
}

/// Geometry and surface of the object face presented to a pad.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceDescriptor {
    pub contact_radius: f64,
    /// 1/m, zero for a flat face.
    pub curvature: f64,
    pub roughness_spacing: Roughness,
    /// Void fraction of the face, in [0, 1].
    pub porosity: f64,
    pub mass: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{field}: {value} {reason}")]
pub struct SurfaceError {
    pub field: &'static str,
    pub value: f64,
    pub reason: &'static str,
}

impl SurfaceDescriptor {
    /// Smooth flat disc of the given radius; mass and height zero.
    pub fn flat_disc(radius: f64) -> Self {
        SurfaceDescriptor {
            contact_radius: radius,
            curvature: 0.0,
            roughness_spacing: Roughness::Smooth,
            porosity: 0.0,
            mass: 0.0,
            height: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), SurfaceError> {
        let check = |field, value: f64, ok: bool, reason| {
            if ok && value.is_finite() {
                Ok(())
            } else {
                Err(SurfaceError { field, value, reason })
            }
        };
        check("contact_radius", self.contact_radius, self.contact_radius > 0.0, "must be > 0")?;
        check("curvature", self.curvature, self.curvature >= 0.0, "must be >= 0")?;
        if let Roughness::Spacing(d) = self.roughness_spacing {
            check("roughness_spacing", d, d > 0.0, "must be > 0 or \"smooth\"")?;
        }
        check(
            "porosity",
            self.porosity,
            (0.0..=1.0).contains(&self.porosity),
            "not in [0, 1]",
        )?;
        check("mass", self.mass, self.mass >= 0.0, "must be >= 0")?;
        check("height", self.height, self.height >= 0.0, "must be >= 0")?;
        Ok(())
    }

    pub fn weight(&self) -> f64 {
        self.mass * GRAVITY
    }
}

/// Calibrated constants of one adhesive pad.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdhesiveParams {
    /// Interface fracture energy after a neutral-to-negative grasp, J/m².
    pub g_c_adhesion: f64,
    /// Interface fracture energy after a wrapping grasp, J/m².
    pub g_c_wrapping: f64,
    /// Interface fracture energy with the membrane inflated, J/m².
    pub g_c_off: f64,
    /// Compliance of the flat membrane under vacuum, m/N.
    pub c_negative: f64,
    /// Compliance of the membrane constricted around an embedded object, m/N.
    pub c_wrapped: f64,
    pub c_neutral: f64,
    pub c_positive: f64,
    pub pad_radius: f64,
    /// Time for a pressure switch to take effect, s.
    pub switch_latency: f64,
    /// Fraction of the embedded side band that ends up in contact when wrapping.
    pub wrap_coverage: f64,
    /// Extent of the inflated membrane's apex patch, m.
    pub apex_length: f64,
    /// Line spacing at which engraving halves the contact area, m.
    pub roughness_scale: f64,
    /// Pores act as interface flaws: G_c scales as (1 - porosity)^exponent.
    pub porosity_exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdhesionError {
    #[error("invalid adhesive parameters: {0}")]
    InvalidParams(&'static str),
    #[error("off-state force is zero; switching ratio undefined")]
    ZeroOffForce,
    #[error("switching ratio needs an on-state mode, got {0:?}")]
    NotAnOnMode(AdhesionMode),
}

impl AdhesiveParams {
    /// Pad constants pinned to the published force endpoints.
    ///
    /// `c_negative` fixes the 18 N adhesion endpoint, `c_wrapped` the 50 N
    /// wrapping endpoint, `g_c_off` the 187 switching ratio and
    /// `porosity_exponent` the 0.9 N porous endpoint. The remaining
    /// compliances and geometry are documented estimates.
    pub fn calibrated() -> Self {
        let mut p = AdhesiveParams {
            g_c_adhesion: 4.2,
            g_c_wrapping: 44.7,
            g_c_off: 1.0,
            c_negative: 1.0,
            c_wrapped: 1.0,
            c_neutral: 2.0e-5,
            c_positive: 5.0e-5,
            pad_radius: 15.0e-3,
            switch_latency: 0.08,
            wrap_coverage: 1.0,
            apex_length: REFERENCE_APEX_FRACTION * REFERENCE_RADIUS
                / (1.0 - REFERENCE_APEX_FRACTION),
            roughness_scale: 0.2e-3,
            porosity_exponent: 0.0,
        };
        let reference = SurfaceDescriptor::flat_disc(REFERENCE_RADIUS);

        let area = contact_area(&reference, AdhesionMode::NeutralToNegative, &p);
        p.c_negative = p.g_c_adhesion * area / ADHESION_TARGET_FORCE.powi(2);

        let area = contact_area(&reference, AdhesionMode::PositiveToNegative, &p);
        p.c_wrapped = p.g_c_wrapping * area / WRAPPING_TARGET_FORCE.powi(2);

        let f_low = WRAPPING_TARGET_FORCE / SWITCHING_RATIO_TARGET;
        let area = contact_area(&reference, AdhesionMode::PositiveToPositive, &p);
        p.g_c_off = f_low * f_low * p.c_positive / area;

        let solid = SurfaceDescriptor::flat_disc(POROUS_RADIUS);
        let f_solid = force_capacity(&solid, AdhesionMode::PositiveToNegative, &p);
        // F(p) = F(0) * (1 - p)^((1 + m) / 2)
        let solid_fraction = 1.0 - POROUS_POROSITY;
        p.porosity_exponent = 2.0 * (POROUS_TARGET_FORCE / f_solid).ln() / solid_fraction.ln() - 1.0;
        p
    }

    pub fn validate(&self) -> Result<(), AdhesionError> {
        let positive = [
            self.g_c_adhesion,
            self.g_c_wrapping,
            self.g_c_off,
            self.c_negative,
            self.c_wrapped,
            self.c_neutral,
            self.c_positive,
            self.pad_radius,
            self.apex_length,
            self.roughness_scale,
        ];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(AdhesionError::InvalidParams("energies, compliances and lengths must be > 0"));
        }
        if !(self.c_negative < self.c_neutral && self.c_neutral < self.c_positive) {
            return Err(AdhesionError::InvalidParams("need c_negative < c_neutral < c_positive"));
        }
        if !(self.g_c_off < self.g_c_adhesion && self.g_c_adhesion < self.g_c_wrapping) {
            return Err(AdhesionError::InvalidParams("need g_c_off < g_c_adhesion < g_c_wrapping"));
        }
        if !(0.0..=0.1).contains(&self.switch_latency) {
            return Err(AdhesionError::InvalidParams("switch_latency must be in [0, 0.1] s"));
        }
        if !(self.wrap_coverage >= 0.0 && self.porosity_exponent >= 0.0) {
            return Err(AdhesionError::InvalidParams("wrap_coverage and porosity_exponent must be >= 0"));
        }
        Ok(())
    }
}

impl Default for AdhesiveParams {
    fn default() -> Self {
        Self::calibrated()
    }
}

/// Radius of the face patch the pad can cover.
pub fn effective_radius(surface: &SurfaceDescriptor, params: &AdhesiveParams) -> f64 {
    surface.contact_radius.min(params.pad_radius)
}

/// Area retained by engraving: `d / (d + d0)`, 1 for a smooth face.
pub fn roughness_factor(roughness: Roughness, scale: f64) -> f64 {
    match roughness {
        Roughness::Smooth => 1.0,
        Roughness::Spacing(d) => d / (d + scale),
    }
}

/// Area retained on a curved face: `1 / (1 + curvature * r)`.
pub fn curvature_factor(curvature: f64, radius: f64) -> f64 {
    1.0 / (1.0 + curvature * radius)
}

pub fn porosity_factor(porosity: f64) -> f64 {
    1.0 - porosity
}

/// Depth an object sinks into the inflated membrane.
pub fn embed_depth(radius: f64, params: &AdhesiveParams) -> f64 {
    (0.5 * radius).min(0.5 * params.pad_radius)
}

/// Share of the base area the inflated membrane touches at its apex.
pub fn apex_fraction(radius: f64, params: &AdhesiveParams) -> f64 {
    params.apex_length / (radius + params.apex_length)
}

/// Contact area between pad and object face for a given grasp mode, m².
pub fn contact_area(surface: &SurfaceDescriptor, mode: AdhesionMode, params: &AdhesiveParams) -> f64 {
    let r = effective_radius(surface, params);
    let texture = porosity_factor(surface.porosity) * roughness_factor(surface.roughness_spacing, params.roughness_scale);
    let normal = PI * r * r * curvature_factor(surface.curvature, r);
    let raw = match mode {
        AdhesionMode::NeutralToNegative => normal,
        AdhesionMode::PositiveToNegative => {
            normal + params.wrap_coverage * 2.0 * PI * r * embed_depth(r, params)
        }
        AdhesionMode::PositiveToPositive => normal * apex_fraction(r, params),
    };
    raw * texture
}

/// Load-bearing compliance for a mode, m/N.
pub fn compliance(params: &AdhesiveParams, mode: AdhesionMode) -> f64 {
    match mode {
        AdhesionMode::NeutralToNegative => params.c_negative,
        AdhesionMode::PositiveToNegative => params.c_wrapped,
        AdhesionMode::PositiveToPositive => params.c_positive,
    }
}

/// Fracture energy of the pad/object interface, including the pore-flaw knockdown.
pub fn fracture_energy(surface: &SurfaceDescriptor, mode: AdhesionMode, params: &AdhesiveParams) -> f64 {
    let base = match mode {
        AdhesionMode::NeutralToNegative => params.g_c_adhesion,
        AdhesionMode::PositiveToNegative => params.g_c_wrapping,
        AdhesionMode::PositiveToPositive => params.g_c_off,
    };
    base * porosity_factor(surface.porosity).powf(params.porosity_exponent)
}

/// `sqrt(G_c * A / C)`.
pub fn pull_off_force(fracture_energy: f64, area: f64, compliance: f64) -> f64 {
    (fracture_energy * area / compliance).sqrt()
}

/// Maximum tensile load the pad sustains on this face before pull-off, N.
pub fn force_capacity(surface: &SurfaceDescriptor, mode: AdhesionMode, params: &AdhesiveParams) -> f64 {
    pull_off_force(
        fracture_energy(surface, mode, params),
        contact_area(surface, mode, params),
        compliance(params, mode),
    )
}

/// `F_high / F_low` with the inflated state as the off force.
pub fn switching_ratio(
    surface: &SurfaceDescriptor,
    params: &AdhesiveParams,
    on_mode: AdhesionMode,
) -> Result<f64, AdhesionError> {
    if !on_mode.is_on() {
        return Err(AdhesionError::NotAnOnMode(on_mode));
    }
    let low = force_capacity(surface, AdhesionMode::PositiveToPositive, params);
    if !(low > 0.0) {
        return Err(AdhesionError::ZeroOffForce);
    }
    Ok(force_capacity(surface, on_mode, params) / low)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("need at least {required} points, got {got}")]
    TooFewPoints { required: usize, got: usize },
    #[error("abscissa sqrt(A/C) must be finite and > 0, got {0}")]
    BadAbscissa(f64),
    #[error("all abscissae are zero")]
    DegenerateAbscissae,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct FitOptions {
    /// Accept a single point (slope through the origin is still defined).
    pub allow_single_point: bool,
}

/// Fracture energy from `(sqrt(A/C), F_c)` pairs: the squared slope of a
/// least-squares line through the origin.
pub fn fit_fracture_energy(points: &[(f64, f64)]) -> Result<f64, FitError> {
    fit_fracture_energy_with(points, FitOptions::default())
}

pub fn fit_fracture_energy_with(points: &[(f64, f64)], opts: FitOptions) -> Result<f64, FitError> {
    let required = if opts.allow_single_point { 1 } else { 2 };
    if points.len() < required {
        return Err(FitError::TooFewPoints { required, got: points.len() });
    }
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(x, y) in points {
        if !x.is_finite() || x < 0.0 {
            return Err(FitError::BadAbscissa(x));
        }
        sxy += x * y;
        sxx += x * x;
    }
    if sxx == 0.0 {
        return Err(FitError::DegenerateAbscissae);
    }
    let slope = sxy / sxx;
    Ok(slope * slope)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub time: f64,
    /// Crosshead displacement into the pad, m (compression positive).
    pub displacement: f64,
    /// Measured force, N (compression positive, tension negative).
    pub force: f64,
}

/// Force/displacement record of one indentation test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForceTrace {
    pub samples: Vec<TraceSample>,
    /// Largest tensile force magnitude seen: the pull-off force.
    pub f_c: f64,
    pub pull_off_time: f64,
}

/// Simulated pull-off test: compress to the preload at the start-state
/// compliance, hold while the pressure switches, then retract at constant
/// speed through the load-bearing compliance until the interface lets go.
pub fn simulate_indentation(
    surface: &SurfaceDescriptor,
    mode: AdhesionMode,
    params: &AdhesiveParams,
) -> ForceTrace {
    let capacity = force_capacity(surface, mode, params);
    let preload = PRELOAD_PRESSURE * PI * params.pad_radius * params.pad_radius;
    let c_start = match mode.start_state() {
        PressureState::Neutral => params.c_neutral,
        _ => params.c_positive,
    };
    let c_load = compliance(params, mode);
    let v = CROSSHEAD_SPEED;
    let dt = TRACE_SAMPLE_PERIOD;

    let mut samples = Vec::new();
    let mut push = |time: f64, displacement: f64, force: f64| {
        samples.push(TraceSample { time, displacement, force });
    };

    let max_depth = preload * c_start;
    let t_contact = max_depth / v;
    let mut k = 0u64;
    loop {
        let t = k as f64 * dt;
        if t >= t_contact {
            break;
        }
        push(t, v * t, v * t / c_start);
        k += 1;
    }
    push(t_contact, max_depth, preload);

    let t_release = t_contact + HOLD_DURATION;
    let mut t = t_contact + dt;
    while t < t_release {
        push(t, max_depth, preload);
        t += dt;
    }
    push(t_release, max_depth, preload);

    let travel = (preload + capacity) * c_load;
    let t_pull = t_release + travel / v;
    let mut k = 1u64;
    loop {
        let tau = k as f64 * dt;
        if t_release + tau >= t_pull {
            break;
        }
        push(t_release + tau, max_depth - v * tau, preload - v * tau / c_load);
        k += 1;
    }
    push(t_pull, max_depth - travel, -capacity);
    push(t_pull + dt, max_depth - travel - v * dt, 0.0);

    let f_c = samples.iter().map(|s| -s.force).fold(0.0, f64::max);
    ForceTrace { samples, f_c, pull_off_time: t_pull }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> AdhesiveParams {
        AdhesiveParams::calibrated()
    }

    #[test]
    fn calibrated_params_are_valid() {
        let p = params();
        p.validate().unwrap();
        assert!(p.c_negative < p.c_wrapped);
        assert!(p.g_c_off * 10.0 < p.g_c_adhesion);
    }

    #[test]
    fn flat_smooth_area_is_the_disc() {
        let p = params();
        let s = SurfaceDescriptor::flat_disc(p.pad_radius);
        let a = contact_area(&s, AdhesionMode::NeutralToNegative, &p);
        assert_eq!(a, PI * p.pad_radius * p.pad_radius);
    }

    #[test]
    fn porosity_scales_area_linearly() {
        let p = params();
        let r = 7.5e-3;
        let s = SurfaceDescriptor { porosity: 0.8, ..SurfaceDescriptor::flat_disc(r) };
        let a = contact_area(&s, AdhesionMode::NeutralToNegative, &p);
        assert_relative_eq!(a, 0.2 * PI * r * r, max_relative = 1e-12);
    }

    #[test]
    fn oversized_faces_are_capped_at_the_pad() {
        let p = params();
        let big = SurfaceDescriptor::flat_disc(0.1);
        let pad = SurfaceDescriptor::flat_disc(p.pad_radius);
        for mode in AdhesionMode::ALL {
            assert_eq!(contact_area(&big, mode, &p), contact_area(&pad, mode, &p));
        }
    }

    #[test]
    fn compliance_follows_state() {
        let p = params();
        assert_eq!(compliance(&p, AdhesionMode::NeutralToNegative), p.c_negative);
        assert_eq!(compliance(&p, AdhesionMode::PositiveToPositive), p.c_positive);
        assert!(
            compliance(&p, AdhesionMode::NeutralToNegative)
                < compliance(&p, AdhesionMode::PositiveToPositive)
        );
    }

    #[test]
    fn fully_porous_face_has_no_capacity() {
        let p = params();
        let s = SurfaceDescriptor { porosity: 1.0, ..SurfaceDescriptor::flat_disc(0.01) };
        for mode in AdhesionMode::ALL {
            assert_eq!(force_capacity(&s, mode, &p), 0.0);
        }
        assert_eq!(
            switching_ratio(&s, &p, AdhesionMode::PositiveToNegative),
            Err(AdhesionError::ZeroOffForce)
        );
    }

    #[test]
    fn endpoint_inversion() {
        // sqrt(A/C) implied by 50 N at 44.7 J/m²
        let p = params();
        let s = SurfaceDescriptor::flat_disc(REFERENCE_RADIUS);
        let mode = AdhesionMode::PositiveToNegative;
        let root = (contact_area(&s, mode, &p) / compliance(&p, mode)).sqrt();
        assert_relative_eq!(root, 50.0 / 44.7f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(root, 7.478, max_relative = 1e-3);
    }

    #[test]
    fn switching_ratio_rejects_off_mode() {
        let p = params();
        let s = SurfaceDescriptor::flat_disc(0.01);
        assert!(matches!(
            switching_ratio(&s, &p, AdhesionMode::PositiveToPositive),
            Err(AdhesionError::NotAnOnMode(_))
        ));
    }

    #[test]
    fn switching_ratio_is_invariant_to_common_energy_scaling() {
        let p = params();
        let mut scaled = p;
        scaled.g_c_adhesion *= 3.0;
        scaled.g_c_wrapping *= 3.0;
        scaled.g_c_off *= 3.0;
        let s = SurfaceDescriptor::flat_disc(0.009);
        for mode in [AdhesionMode::NeutralToNegative, AdhesionMode::PositiveToNegative] {
            assert_relative_eq!(
                switching_ratio(&s, &p, mode).unwrap(),
                switching_ratio(&s, &scaled, mode).unwrap(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn fit_errors() {
        assert_eq!(
            fit_fracture_energy(&[(7.48, 50.0)]),
            Err(FitError::TooFewPoints { required: 2, got: 1 })
        );
        assert_eq!(fit_fracture_energy(&[(0.0, 1.0), (0.0, 2.0)]), Err(FitError::DegenerateAbscissae));
        assert!(matches!(fit_fracture_energy(&[(-1.0, 1.0), (1.0, 2.0)]), Err(FitError::BadAbscissa(_))));
        let g = fit_fracture_energy_with(&[(7.48, 50.0)], FitOptions { allow_single_point: true }).unwrap();
        assert_relative_eq!(g, (50.0f64 / 7.48).powi(2), max_relative = 1e-12);
    }

    #[test]
    fn fit_recovers_planted_energy() {
        for g in [4.2_f64, 44.7] {
            let pts: Vec<_> = (1..=12).map(|i| {
                let x = i as f64 * 0.9;
                (x, g.sqrt() * x)
            }).collect();
            assert_relative_eq!(fit_fracture_energy(&pts).unwrap(), g, max_relative = 1e-9);
        }
    }

    #[test]
    fn off_state_trace_peak_is_small() {
        let p = params();
        let s = SurfaceDescriptor::flat_disc(REFERENCE_RADIUS);
        let trace = simulate_indentation(&s, AdhesionMode::PositiveToPositive, &p);
        assert!(trace.f_c <= WRAPPING_TARGET_FORCE / SWITCHING_RATIO_TARGET * (1.0 + 1e-12));
    }

    #[test]
    fn trace_phases() {
        let p = params();
        let s = SurfaceDescriptor::flat_disc(REFERENCE_RADIUS);
        let trace = simulate_indentation(&s, AdhesionMode::NeutralToNegative, &p);
        assert!(trace.samples.windows(2).all(|w| w[1].time > w[0].time));
        let preload = PRELOAD_PRESSURE * PI * p.pad_radius.powi(2);
        let peak = trace.samples.iter().map(|s| s.force).fold(f64::MIN, f64::max);
        assert_relative_eq!(peak, preload, max_relative = 1e-12);
        let held: Vec<_> = trace.samples.iter().filter(|s| s.force == peak).collect();
        let span = held.last().unwrap().time - held.first().unwrap().time;
        assert_relative_eq!(span, HOLD_DURATION, max_relative = 1e-9);
        assert_eq!(trace.samples.last().unwrap().force, 0.0);
        assert_relative_eq!(trace.f_c, ADHESION_TARGET_FORCE, max_relative = 1e-9);
    }

    #[test]
    fn roughness_serde() {
        let r: Roughness = serde_json::from_str("\"smooth\"").unwrap();
        assert_eq!(r, Roughness::Smooth);
        let r: Roughness = serde_json::from_str("0.0005").unwrap();
        assert_eq!(r, Roughness::Spacing(0.0005));
        assert!(serde_json::from_str::<Roughness>("\"rough\"").is_err());
        assert_eq!(serde_json::to_string(&Roughness::Smooth).unwrap(), "\"smooth\"");
    }

    #[test]
    fn surface_validation_names_field() {
        let s = SurfaceDescriptor { porosity: 1.3, ..SurfaceDescriptor::flat_disc(0.01) };
        let err = s.validate().unwrap_err();
        assert_eq!(err.field, "porosity");
        assert!(err.to_string().contains("porosity"));
    }
}
