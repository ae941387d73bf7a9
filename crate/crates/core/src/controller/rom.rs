use serde::{Deserialize, Serialize};

use super::plant::PlantParams;
use super::ControllerError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HandSize {
    S,
    M,
    L,
}

impl HandSize {
    pub fn parse(s: &str) -> Result<Self, ControllerError> {
        match s.trim().to_ascii_uppercase().as_str() {
            "S" => Ok(HandSize::S),
            "M" => Ok(HandSize::M),
            "L" => Ok(HandSize::L),
            _ => Err(ControllerError::InvalidHandSize),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            HandSize::S => "S",
            HandSize::M => "M",
            HandSize::L => "L",
        }
    }

    /// Moment arms scale with finger size.
    pub fn moment_arm_scale(self) -> f64 {
        match self {
            HandSize::S => 0.85,
            HandSize::M => 1.0,
            HandSize::L => 1.15,
        }
    }

    pub fn plant_params(self, base: PlantParams) -> PlantParams {
        let mut p = base;
        for r in &mut p.hand.moment_arm {
            *r *= self.moment_arm_scale();
        }
        p
    }
}

/// Spool payouts for a fully open and a closable hand, mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RomCalibration {
    pub retracted_setpoint: f64,
    pub extended_setpoint: f64,
}

impl RomCalibration {
    pub fn new(retracted: f64, extended: f64, travel: (f64, f64)) -> Result<Self, ControllerError> {
        let within = |v: f64| v.is_finite() && v >= travel.0 && v <= travel.1;
        if !(within(retracted) && within(extended) && retracted < extended) {
            return Err(ControllerError::InvalidRom);
        }
        Ok(RomCalibration {
            retracted_setpoint: retracted,
            extended_setpoint: extended,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RomTable {
    pub s: RomCalibration,
    pub m: RomCalibration,
    pub l: RomCalibration,
}

impl Default for RomTable {
    fn default() -> Self {
        let rom = |e| RomCalibration {
            retracted_setpoint: 0.0,
            extended_setpoint: e,
        };
        RomTable {
            s: rom(38.0),
            m: rom(45.0),
            l: rom(52.0),
        }
    }
}

pub fn calibrate_rom(size: HandSize, table: &RomTable) -> RomCalibration {
    match size {
        HandSize::S => table.s,
        HandSize::M => table.m,
        HandSize::L => table.l,
    }
}
