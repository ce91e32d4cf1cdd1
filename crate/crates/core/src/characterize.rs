//! Force-capacity curves over one surface property at a time.

use std::fmt;
use std::io;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adhesion::{
    force_capacity, switching_ratio, AdhesionMode, AdhesiveParams, Roughness, SurfaceDescriptor, POROUS_RADIUS,
    REFERENCE_RADIUS,
};
use crate::experiment::{map_indexed, Execution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Radius,
    Curvature,
    Roughness,
    Porosity,
}

impl SweepKind {
    pub const ALL: [SweepKind; 4] = [SweepKind::Radius, SweepKind::Curvature, SweepKind::Roughness, SweepKind::Porosity];

    pub fn name(self) -> &'static str {
        match self {
            SweepKind::Radius => "radius",
            SweepKind::Curvature => "curvature",
            SweepKind::Roughness => "roughness",
            SweepKind::Porosity => "porosity",
        }
    }

    /// Default range: radius and roughness spacing in m, curvature in 1/m.
    pub fn default_range(self) -> (f64, f64) {
        match self {
            SweepKind::Radius => (2.5e-3, 12.5e-3),
            SweepKind::Curvature => (0.0, 133.0),
            SweepKind::Roughness => (0.1e-3, 2.0e-3),
            SweepKind::Porosity => (0.0, 0.8),
        }
    }

    /// Surface with the swept property set to `x`. Radius and roughness use a
    /// 12.5 mm indenter, curvature and porosity a 7.5 mm one.
    pub fn surface(self, x: f64) -> SurfaceDescriptor {
        match self {
            SweepKind::Radius => SurfaceDescriptor::flat_disc(x),
            SweepKind::Curvature => SurfaceDescriptor { curvature: x, ..SurfaceDescriptor::flat_disc(POROUS_RADIUS) },
            SweepKind::Roughness => {
                SurfaceDescriptor { roughness_spacing: Roughness::Spacing(x), ..SurfaceDescriptor::flat_disc(REFERENCE_RADIUS) }
            }
            SweepKind::Porosity => SurfaceDescriptor { porosity: x, ..SurfaceDescriptor::flat_disc(POROUS_RADIUS) },
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SweepKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown sweep {s:?} (expected radius, curvature, roughness or porosity)"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub kind: SweepKind,
    pub start: f64,
    pub stop: f64,
    /// Number of evenly spaced points, both ends included.
    pub points: usize,
}

impl Sweep {
    pub fn new(kind: SweepKind, points: usize) -> Self {
        let (start, stop) = kind.default_range();
        Sweep { kind, start, stop, points }
    }

    pub fn xs(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![self.start],
            n => (0..n).map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub x: f64,
    pub f_c_neutral_neg: f64,
    pub f_c_pos_neg: f64,
    pub f_c_pos_pos: f64,
    /// Empty when the off-state force vanishes.
    pub sr: Option<f64>,
}

pub fn curve_row(surface: &SurfaceDescriptor, x: f64, params: &AdhesiveParams) -> CurveRow {
    CurveRow {
        x,
        f_c_neutral_neg: force_capacity(surface, AdhesionMode::NeutralToNegative, params),
        f_c_pos_neg: force_capacity(surface, AdhesionMode::PositiveToNegative, params),
        f_c_pos_pos: force_capacity(surface, AdhesionMode::PositiveToPositive, params),
        sr: switching_ratio(surface, params, AdhesionMode::PositiveToNegative).ok(),
    }
}

pub fn characterize(sweep: &Sweep, params: &AdhesiveParams, exec: Execution) -> Vec<CurveRow> {
    let xs = sweep.xs();
    map_indexed(xs.len(), exec, |i| curve_row(&sweep.kind.surface(xs[i]), xs[i], params))
}

const HEADER: [&str; 5] = ["x", "f_c_neutral_neg", "f_c_pos_neg", "f_c_pos_pos", "sr"];

pub fn write_curve_csv<W: io::Write>(rows: &[CurveRow], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
