use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TaskPhase {
    /// Device familiarisation; no inventory items belong to it.
    Controls,
    RepetitiveDrill,
    Tray,
    Irregular,
    Bimanual,
}

impl TaskPhase {
    pub const ALL: [TaskPhase; 5] = [
        TaskPhase::Controls,
        TaskPhase::RepetitiveDrill,
        TaskPhase::Tray,
        TaskPhase::Irregular,
        TaskPhase::Bimanual,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskPhase::Controls => "CONTROLS",
            TaskPhase::RepetitiveDrill => "REPETITIVE_DRILL",
            TaskPhase::Tray => "TRAY",
            TaskPhase::Irregular => "IRREGULAR",
            TaskPhase::Bimanual => "BIMANUAL",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Support {
    Supported,
    Unsupported,
    #[serde(rename = "N/A")]
    NotApplicable,
}

impl Support {
    pub fn as_str(self) -> &'static str {
        match self {
            Support::Supported => "SUPPORTED",
            Support::Unsupported => "UNSUPPORTED",
            Support::NotApplicable => "N/A",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingTask {
    /// 1-based position in the protocol.
    pub id: u16,
    pub phase: TaskPhase,
    pub object: String,
    pub reps: u32,
    pub support: Support,
}

pub const DRILL_OBJECTS: [&str; 5] = [
    "2.5 cm wooden cube",
    "5 cm wooden cube",
    "tennis ball",
    "4 cm diameter toiletry bottle",
    "13 cm tall tapered hard plastic cup",
];

pub const TRAY_PASSES: [&str; 2] = [
    "remove all 5 items from tray",
    "replace all 5 items onto tray",
];

pub const IRREGULAR_OBJECTS: [&str; 3] = ["cotton ball", "1 inch rubber ball", "washcloth"];

pub const BIMANUAL_TASKS: [&str; 8] = [
    "remove and replace cap of broad line marker",
    "remove and replace screw cap of toothpaste tube",
    "remove and replace cap of screw top beverage bottle",
    "remove and replace wide mouth screw cap of large coffee container",
    "stir in small bowl with wooden spoon for 10 s",
    "make 2 cuts in theraputty log with butter knife",
    "open lock with key",
    "open sealed sandwich-size ziploc bag",
];

pub const DRILL_REPS: u32 = 5;
pub const TRAY_REPS: u32 = 2;
pub const IRREGULAR_REPS: u32 = 2;
pub const BIMANUAL_REPS: u32 = 2;

/// The fixed training sequence: drill (each object supported then
/// unsupported), tray passes, irregular objects, bimanual tasks.
pub fn build_protocol() -> Vec<TrainingTask> {
    let mut tasks = Vec::with_capacity(23);
    let mut push = |phase, object: &str, reps, support| {
        tasks.push(TrainingTask {
            id: tasks.len() as u16 + 1,
            phase,
            object: object.to_string(),
            reps,
            support,
        })
    };
    for obj in DRILL_OBJECTS {
        push(
            TaskPhase::RepetitiveDrill,
            obj,
            DRILL_REPS,
            Support::Supported,
        );
        push(
            TaskPhase::RepetitiveDrill,
            obj,
            DRILL_REPS,
            Support::Unsupported,
        );
    }
    for pass in TRAY_PASSES {
        push(TaskPhase::Tray, pass, TRAY_REPS, Support::NotApplicable);
    }
    for obj in IRREGULAR_OBJECTS {
        push(
            TaskPhase::Irregular,
            obj,
            IRREGULAR_REPS,
            Support::NotApplicable,
        );
    }
    for task in BIMANUAL_TASKS {
        push(
            TaskPhase::Bimanual,
            task,
            BIMANUAL_REPS,
            Support::NotApplicable,
        );
    }
    tasks
}
