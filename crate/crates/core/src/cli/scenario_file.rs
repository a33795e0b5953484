//! JSON scenario files. Decibel quantities carry `_db`, `_dbm` or `_dbsm`
//! suffixes and are converted to linear units here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{db_to_linear, dbm_to_watts, FadingModel, GeometryKind, Lane, MediumAccess, RadarParams, Scenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub tx_power_dbm: f64,
    pub antenna_gain_db: f64,
    pub beamwidth_deg: f64,
    pub frequency_hz: f64,
    pub rcs_dbsm: f64,
    pub sinr_threshold_db: f64,
    pub pathloss_exp: f64,
    #[serde(default)]
    pub noise_power_w: f64,
    pub duty_cycle: f64,
    pub lanes: Vec<LaneFile>,
    #[serde(default)]
    pub fading: FadingFile,
    #[serde(default)]
    pub geometry: GeometryFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaneFile {
    pub offset_m: f64,
    pub density_per_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard_distance_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FadingFile {
    #[default]
    Unit,
    Gamma {
        shape: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryFile {
    #[default]
    Ppp,
    BernoulliLattice,
}

impl ScenarioFile {
    pub fn into_scenario(self) -> Result<Scenario> {
        let scenario = Scenario {
            radar: RadarParams {
                tx_power: dbm_to_watts(self.tx_power_dbm),
                antenna_gain: db_to_linear(self.antenna_gain_db),
                beamwidth: self.beamwidth_deg.to_radians(),
                frequency: self.frequency_hz,
                rcs: db_to_linear(self.rcs_dbsm),
                sinr_threshold: db_to_linear(self.sinr_threshold_db),
                pathloss_exp: self.pathloss_exp,
                noise_power: self.noise_power_w,
            },
            lanes: self
                .lanes
                .iter()
                .map(|l| Lane { offset: l.offset_m, density: l.density_per_m, guard_distance: l.guard_distance_m })
                .collect(),
            access: MediumAccess { duty_cycle: self.duty_cycle },
            fading: match self.fading {
                FadingFile::Unit => FadingModel::Unit,
                FadingFile::Gamma { shape } => FadingModel::Gamma { shape },
            },
            geometry: match self.geometry {
                GeometryFile::Ppp => GeometryKind::Ppp,
                GeometryFile::BernoulliLattice => GeometryKind::BernoulliLattice,
            },
        };
        scenario.validate().map_err(|e| match e {
            Error::Invalid { field, detail } => Error::invalid(file_field(&field), detail),
            other => other,
        })?;
        Ok(scenario)
    }
}

/// Maps a model field name to the name used in the file.
fn file_field(field: &str) -> String {
    let (prefix, last) = match field.rfind('.') {
        Some(i) => (&field[..=i], &field[i + 1..]),
        None => ("", field),
    };
    let renamed = match last {
        "tx_power" => "tx_power_dbm",
        "antenna_gain" => "antenna_gain_db",
        "beamwidth" => "beamwidth_deg",
        "frequency" => "frequency_hz",
        "rcs" => "rcs_dbsm",
        "sinr_threshold" => "sinr_threshold_db",
        "noise_power" => "noise_power_w",
        "offset" => "offset_m",
        "density" => "density_per_m",
        "guard_distance" => "guard_distance_m",
        other => other,
    };
    format!("{prefix}{renamed}")
}

pub fn parse_scenario(json_text: &str) -> Result<Scenario> {
    let file: ScenarioFile = serde_json::from_str(json_text).map_err(|e| Error::Schema(e.to_string()))?;
    file.into_scenario()
}

/// The bundled reference scenario.
pub const REFERENCE_JSON: &str = include_str!("../../data/reference.json");
