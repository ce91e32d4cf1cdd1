//! Scenario documents: objects, bin and gripper configuration as JSON.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adhesion::{AdhesiveParams, Roughness, SurfaceDescriptor};
use crate::gripper::{GripperConfig, GripperState, ObjectId};
use crate::world::{BinRegion, ObjectStatus, WorldObject, WorldState};
use crate::Vec3;

const HOUSEHOLD15: &str = include_str!("../scenarios/household15.json");
const HOUSEHOLD15_EXTENDED: &str = include_str!("../scenarios/household15-extended.json");

/// Names of the scenarios compiled into the library.
pub const BUNDLED: [&str; 2] = ["household15", "household15-extended"];

pub fn bundled(name: &str) -> Option<&'static str> {
    match name {
        "household15" => Some(HOUSEHOLD15),
        "household15-extended" => Some(HOUSEHOLD15_EXTENDED),
        _ => None,
    }
}

const DEFAULT_EE_START: [f64; 3] = [0.4, 0.0, 0.25];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    pub id: String,
    pub position: [f64; 3],
    pub mass_kg: f64,
    pub height_m: f64,
    pub contact_radius_m: f64,
    pub curvature_per_m: f64,
    pub roughness_spacing_m: Roughness,
    pub porosity: f64,
    /// Values are estimates rather than measurements.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimated: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ObjectSpec {
    pub fn surface(&self) -> SurfaceDescriptor {
        SurfaceDescriptor {
            contact_radius: self.contact_radius_m,
            curvature: self.curvature_per_m,
            roughness_spacing: self.roughness_spacing_m,
            porosity: self.porosity,
            mass: self.mass_kg,
            height: self.height_m,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinSpec {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GripperSpec {
    pub n_pads: usize,
    pub pinch_force_n: f64,
    pub max_aperture_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pad_offsets_m: Option<Vec<[f64; 3]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub objects: Vec<ObjectSpec>,
    pub bin: BinSpec,
    pub gripper: GripperSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ee_start: Option<[f64; 3]>,
    /// Targets may need a combined rigid-soft grasp.
    #[serde(default)]
    pub multi_object_targets: bool,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario is not valid JSON for the schema: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("duplicate object id {0:?}")]
    DuplicateId(String),
    #[error("no bundled scenario named {0:?} and no such file")]
    NotFound(String),
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid { path: path.into(), message: message.into() }
}

fn finite3(path: &str, v: &[f64; 3]) -> Result<(), ScenarioError> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(invalid(path, "components must be finite"))
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    /// A bundled scenario name, or a path to a JSON file.
    pub fn load(name_or_path: &str) -> Result<Self, ScenarioError> {
        if let Some(text) = bundled(name_or_path) {
            return Self::from_json(text);
        }
        let path = Path::new(name_or_path);
        if !path.exists() {
            return Err(ScenarioError::NotFound(name_or_path.to_owned()));
        }
        let text = std::fs::read_to_string(path)
            .map_err(|source| ScenarioError::Io { path: name_or_path.to_owned(), source })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let mut seen = BTreeSet::new();
        for (i, o) in self.objects.iter().enumerate() {
            let at = format!("objects[{i}]");
            if o.id.is_empty() {
                return Err(invalid(format!("{at}.id"), "must not be empty"));
            }
            if !seen.insert(o.id.as_str()) {
                return Err(ScenarioError::DuplicateId(o.id.clone()));
            }
            finite3(&format!("{at}.position"), &o.position)?;
            if let Err(e) = o.surface().validate() {
                let field = match e.field {
                    "contact_radius" => "contact_radius_m",
                    "curvature" => "curvature_per_m",
                    "roughness_spacing" => "roughness_spacing_m",
                    "mass" => "mass_kg",
                    "height" => "height_m",
                    f => f,
                };
                return Err(invalid(format!("{at}.{field}"), format!("{} {}", e.value, e.reason)));
            }
        }
        finite3("bin.min", &self.bin.min)?;
        finite3("bin.max", &self.bin.max)?;
        for k in 0..3 {
            if self.bin.min[k] >= self.bin.max[k] {
                return Err(invalid("bin", "min must be below max on every axis"));
            }
        }
        let g = &self.gripper;
        if g.n_pads == 0 {
            return Err(invalid("gripper.n_pads", "need at least one pad"));
        }
        if !(g.pinch_force_n.is_finite() && g.pinch_force_n >= 0.0) {
            return Err(invalid("gripper.pinch_force_n", format!("{} must be >= 0", g.pinch_force_n)));
        }
        if !(g.max_aperture_m.is_finite() && g.max_aperture_m > 0.0) {
            return Err(invalid("gripper.max_aperture_m", format!("{} must be > 0", g.max_aperture_m)));
        }
        if let Some(offsets) = &g.pad_offsets_m {
            if offsets.len() != g.n_pads {
                return Err(invalid("gripper.pad_offsets_m", "need one offset per pad"));
            }
        }
        if let Some(start) = &self.ee_start {
            finite3("ee_start", start)?;
        }
        Ok(())
    }

    pub fn gripper_config(&self) -> GripperConfig {
        GripperConfig {
            n_pads: self.gripper.n_pads,
            pinch_force: self.gripper.pinch_force_n,
            max_aperture: self.gripper.max_aperture_m,
        }
    }

    pub fn object_ids(&self) -> Vec<ObjectId> {
        self.objects.iter().map(|o| ObjectId::new(o.id.clone())).collect()
    }

    /// Instantiate the world with every object on the table.
    pub fn world(&self, params: AdhesiveParams, seed: u64) -> WorldState {
        self.world_with(params, seed, |_| true)
    }

    /// Instantiate the world keeping only objects accepted by `keep`.
    pub fn world_with<F: Fn(&ObjectSpec) -> bool>(&self, params: AdhesiveParams, seed: u64, keep: F) -> WorldState {
        let ee = Vec3::from(self.ee_start.unwrap_or(DEFAULT_EE_START));
        let config = self.gripper_config();
        let gripper = match &self.gripper.pad_offsets_m {
            Some(offsets) => {
                GripperState::with_pad_offsets(config, params, ee, offsets.iter().map(|o| Vec3::from(*o)).collect())
            }
            None => GripperState::new(config, params, ee),
        };
        let objects: BTreeMap<ObjectId, WorldObject> = self
            .objects
            .iter()
            .filter(|o| keep(o))
            .map(|o| {
                let id = ObjectId::new(o.id.clone());
                let obj = WorldObject {
                    id: id.clone(),
                    position: Vec3::from(o.position),
                    surface: o.surface(),
                    status: ObjectStatus::OnTable,
                    hold_offset: None,
                    grasped_with: None,
                };
                (id, obj)
            })
            .collect();
        WorldState {
            time: 0.0,
            steps: 0,
            ee_pose: ee,
            ee_vel: Vec3::zeros(),
            gripper,
            objects,
            bin_region: BinRegion { min: Vec3::from(self.bin.min), max: Vec3::from(self.bin.max) },
            rng_seed: seed,
            multi_object_targets: self.multi_object_targets,
        }
    }
}

/// Parse, validate and instantiate a scenario document.
pub fn load_scenario(document: &str, params: AdhesiveParams, seed: u64) -> Result<WorldState, ScenarioError> {
    Ok(Scenario::from_json(document)?.world(params, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    const EMPTY: &str = r#"{
        "objects": [],
        "bin": {"min": [0.4, 0.4, 0.0], "max": [0.6, 0.6, 0.1]},
        "gripper": {"n_pads": 1, "pinch_force_n": 60.0, "max_aperture_m": 0.08}
    }"#;

    fn with_object(fields: &str) -> String {
        format!(
            r#"{{
            "objects": [{{"id": "a", "position": [0.3, 0.0, 0.0], "mass_kg": 0.01, "height_m": 0.01,
                         "contact_radius_m": 0.01, "curvature_per_m": 0.0,
                         "roughness_spacing_m": "smooth", "porosity": 0.0 {fields}}}],
            "bin": {{"min": [0.4, 0.4, 0.0], "max": [0.6, 0.6, 0.1]}},
            "gripper": {{"n_pads": 1, "pinch_force_n": 60.0, "max_aperture_m": 0.08}}
        }}"#
        )
    }

    #[test]
    fn empty_object_list() {
        let w = load_scenario(EMPTY, AdhesiveParams::calibrated(), 1).unwrap();
        assert!(w.objects.is_empty());
        assert_eq!(w.gripper.n_pads(), 1);
        assert_eq!(w.rng_seed, 1);
    }

    #[test]
    fn household15_has_fifteen_objects_on_the_table() {
        let w = Scenario::load("household15").unwrap().world(AdhesiveParams::calibrated(), 0);
        assert_eq!(w.objects.len(), 15);
        assert!(w.objects.values().all(|o| o.status == ObjectStatus::OnTable));
        let masses: Vec<f64> = w.objects.values().map(|o| o.surface.mass).collect();
        let max = masses.iter().cloned().fold(0.0, f64::max);
        assert!((max - 2.0).abs() < 1e-12);
    }

    #[test]
    fn extended_fixture_spans_the_mass_range() {
        let s = Scenario::load("household15-extended").unwrap();
        let masses: Vec<f64> = s.objects.iter().map(|o| o.mass_kg).collect();
        let min = masses.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = masses.iter().cloned().fold(0.0, f64::max);
        assert!((min - 2.0e-6).abs() < 1e-15);
        assert!((max - 2.0).abs() < 1e-12);
    }

    #[test]
    fn porosity_out_of_range_names_the_field() {
        let doc = with_object("").replace("\"porosity\": 0.0", "\"porosity\": 1.3");
        let err = Scenario::from_json(&doc).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("objects[0].porosity"), "{msg}");
        assert!(msg.contains("1.3"), "{msg}");
    }

    #[test]
    fn duplicate_ids_rejected() {
        let mut s = Scenario::from_json(&with_object("")).unwrap();
        s.objects.push(s.objects[0].clone());
        assert!(matches!(s.validate(), Err(ScenarioError::DuplicateId(id)) if id == "a"));
    }

    #[test]
    fn unknown_fields_rejected() {
        let err = Scenario::from_json(&with_object(r#", "colour": "red""#)).unwrap_err();
        assert!(err.to_string().contains("colour"));
    }

    #[test]
    fn roughness_accepts_number_or_smooth() {
        let doc = with_object("").replace("\"smooth\"", "0.0004");
        let s = Scenario::from_json(&doc).unwrap();
        assert_eq!(s.objects[0].roughness_spacing_m, Roughness::Spacing(0.0004));
    }

    #[test]
    fn missing_file() {
        assert!(matches!(Scenario::load("/no/such/file.json"), Err(ScenarioError::NotFound(_))));
    }
}
