use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::calibration::{session_calibration, CalibrationBundle, IntentCalibration, SubjectModel};
use super::durations::DurationModel;
use super::tasks::{build_protocol, TrainingTask};
use super::{mix_seed, ProtocolError};
use crate::controller::{
    run_episode, ControllerConfig, EpisodeError, HandPlant, IntentStream, MotorState,
    RomCalibration, TrajectoryLog,
};
use crate::intent::{decode_trace, EmgClassifier, Intent, ShConfig, ShDetector};
use crate::signals::{gen_emg_trace, gen_load_trace, LoadProfile, Posture};

pub const SESSION_BUDGET_S: f64 = 1800.0;
pub const SESSIONS_PER_WEEK: u8 = 3;
pub const WEEKS: u8 = 4;
pub const SESSION_COUNT: u8 = SESSIONS_PER_WEEK * WEEKS;

/// Seconds per phase of one grasp-release cycle: open, hold, close, hold.
pub const CYCLE_S: [f64; 4] = [2.0, 1.0, 2.0, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionPlan {
    /// 1-based.
    pub index: u8,
    /// ISO date, if scheduled.
    pub date: Option<String>,
    pub tasks: Vec<TrainingTask>,
    pub budget_s: f64,
}

impl SessionPlan {
    pub fn new(index: u8, date: Option<String>) -> Self {
        SessionPlan {
            index,
            date,
            tasks: build_protocol(),
            budget_s: SESSION_BUDGET_S,
        }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        if !(1..=SESSION_COUNT).contains(&self.index) {
            return Err(ProtocolError::InvalidPlan(
                "session index must lie in 1..=12",
            ));
        }
        if !(self.budget_s.is_finite() && self.budget_s > 0.0) {
            return Err(ProtocolError::InvalidPlan(
                "active-time budget must be positive",
            ));
        }
        if self.tasks.iter().any(|t| t.reps == 0) {
            return Err(ProtocolError::InvalidPlan(
                "every task needs at least one repetition",
            ));
        }
        Ok(())
    }
}

/// A participant's full course.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgramPlan {
    pub sessions_per_week: u8,
    pub weeks: u8,
    pub sessions: Vec<SessionPlan>,
}

impl ProgramPlan {
    /// Twelve sessions; `dates`, when given, must hold one entry per session.
    pub fn standard(dates: Option<&[String]>) -> Result<Self, ProtocolError> {
        if dates.is_some_and(|d| d.len() != SESSION_COUNT as usize) {
            return Err(ProtocolError::InvalidPlan("need exactly 12 session dates"));
        }
        let sessions = (1..=SESSION_COUNT)
            .map(|i| SessionPlan::new(i, dates.map(|d| d[i as usize - 1].clone())))
            .collect();
        Ok(ProgramPlan {
            sessions_per_week: SESSIONS_PER_WEEK,
            weeks: WEEKS,
            sessions,
        })
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.sessions_per_week as u16 * self.weeks as u16 != SESSION_COUNT as u16 {
            return Err(ProtocolError::InvalidPlan("schedule must give 12 sessions"));
        }
        if self.sessions.len() != SESSION_COUNT as usize {
            return Err(ProtocolError::InvalidPlan(
                "a plan holds exactly 12 sessions",
            ));
        }
        for (i, s) in self.sessions.iter().enumerate() {
            s.validate()?;
            if s.index as usize != i + 1 {
                return Err(ProtocolError::InvalidPlan(
                    "session indices must run 1..=12 in order",
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub ticks: usize,
    pub reversals: usize,
    pub max_tension_n: f64,
    pub min_angle_deg: f64,
}

impl EpisodeSummary {
    fn of(log: &TrajectoryLog, deadband: f64) -> Self {
        EpisodeSummary {
            ticks: log.ticks.len(),
            reversals: log.direction_reversals(deadband),
            max_tension_n: log.max_tension(),
            min_angle_deg: log.min_angle(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EventKind {
    Calibration {
        bundle: CalibrationBundle,
    },
    TaskStarted {
        task: u16,
    },
    TaskCompleted {
        task: u16,
        duration_s: f64,
        episode: EpisodeSummary,
    },
    DeviceAdjustment {
        task: u16,
        reason: String,
    },
    Break {
        duration_s: f64,
    },
    FreeTraining {
        duration_s: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEvent {
    /// Wall-clock seconds since session start, breaks included.
    pub t: f64,
    /// Cumulative active seconds.
    pub active_s: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SessionLog {
    pub subject: String,
    pub session: u8,
    pub events: Vec<SessionEvent>,
    pub last_completed: Option<u16>,
    /// Task time only; free training is reported separately.
    pub active_s: f64,
    /// Set when the budget was crossed part-way through a task.
    pub overflow: bool,
    pub protocol_completed: bool,
    pub free_training_s: f64,
    pub adjustments: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionRun {
    pub log: SessionLog,
    /// Closed-loop ticks of the first task.
    pub trajectory: TrajectoryLog,
}

/// Last task with a completion event, read back from the event stream.
pub fn replay_last_completed(events: &[SessionEvent]) -> Option<u16> {
    events.iter().rev().find_map(|e| match e.kind {
        EventKind::TaskCompleted { task, .. } => Some(task),
        _ => None,
    })
}

fn grasp_posture_script(reps: u32) -> Vec<(Posture, f64)> {
    let phases = [
        Posture::Depressed,
        Posture::Rest,
        Posture::Elevated,
        Posture::Rest,
    ];
    (0..reps)
        .flat_map(|_| phases.into_iter().zip(CYCLE_S))
        .collect()
}

fn grasp_intent_script(reps: u32) -> Vec<(Intent, f64)> {
    let phases = [Intent::Open, Intent::Relax, Intent::Close, Intent::Relax];
    (0..reps)
        .flat_map(|_| phases.into_iter().zip(CYCLE_S))
        .collect()
}

/// Harness intents for a load trace.
pub fn sh_intent_stream(
    trace_rate_hz: f64,
    tensions: impl IntoIterator<Item = f64>,
    cfg: ShConfig,
) -> IntentStream {
    let mut det = ShDetector::new(cfg);
    let intents = tensions
        .into_iter()
        .map(|tension| det.update(&crate::signals::LoadCellSample { t: 0.0, tension }))
        .collect();
    IntentStream {
        rate_hz: trace_rate_hz,
        intents,
    }
}

fn task_intents(
    subject: &SubjectModel,
    bundle: &CalibrationBundle,
    reps: u32,
    seed: u64,
) -> Result<IntentStream, ProtocolError> {
    match &bundle.intent {
        IntentCalibration::Sh { thresholds } => {
            let p = LoadProfile {
                seed,
                ..subject.load
            };
            let trace = gen_load_trace(&p, &grasp_posture_script(reps))?;
            Ok(sh_intent_stream(
                trace.rate_hz,
                trace.samples.iter().map(|s| s.tension),
                *thresholds,
            ))
        }
        IntentCalibration::Emg { classifier } => {
            let clf = EmgClassifier::from_params(classifier.clone())?;
            let trace = gen_emg_trace(&subject.emg.with_seed(seed), &grasp_intent_script(reps))?;
            let decisions = decode_trace(&trace, &clf)?;
            Ok(IntentStream {
                rate_hz: clf.window().decision_rate(trace.rate_hz),
                intents: decisions.into_iter().map(|(_, i)| i).collect(),
            })
        }
    }
}

struct Clock {
    t: f64,
    active: f64,
    events: Vec<SessionEvent>,
}

impl Clock {
    fn log(&mut self, kind: EventKind) {
        self.events.push(SessionEvent {
            t: self.t,
            active_s: self.active,
            kind,
        });
    }
}

fn run_task(
    task: &TrainingTask,
    subject: &SubjectModel,
    bundle: &CalibrationBundle,
    cfg: &ControllerConfig,
    rom: &RomCalibration,
    seed: u64,
) -> Result<(TrajectoryLog, Option<String>), ProtocolError> {
    let stream = task_intents(subject, bundle, task.reps, seed)?;
    let plant = HandPlant::at_rest(cfg.plant);
    match run_episode(
        &stream,
        rom,
        cfg,
        plant,
        MotorState::at(rom.extended_setpoint),
    ) {
        Ok(log) => Ok((log, None)),
        Err(EpisodeError::Abort(a)) => {
            Ok((a.partial, Some(format!("{:?} at t={:.3} s", a.reason, a.t))))
        }
        Err(EpisodeError::Config(e)) => Err(e.into()),
    }
}

/// Runs one session: calibration, then tasks in order until the active-time
/// budget is reached or the list runs out.
pub fn run_session(
    plan: &SessionPlan,
    subject: &SubjectModel,
    base: &ControllerConfig,
    durations: &dyn DurationModel,
) -> Result<SessionRun, ProtocolError> {
    plan.validate()?;
    subject.validate()?;
    let mut log = SessionLog {
        subject: subject.id.clone(),
        session: plan.index,
        ..SessionLog::default()
    };
    if plan.tasks.is_empty() {
        return Ok(SessionRun {
            log,
            trajectory: TrajectoryLog::default(),
        });
    }
    let cfg = subject.controller_config(base);
    cfg.validate()?;
    let session_seed = mix_seed(subject.seed, &[plan.index as u64]);
    let bundle = session_calibration(subject, &cfg, session_seed)?;
    let rom = bundle.rom;
    let mut clock = Clock {
        t: 0.0,
        active: 0.0,
        events: Vec::new(),
    };
    clock.log(EventKind::Calibration {
        bundle: bundle.clone(),
    });

    let mut breaks = ChaCha8Rng::seed_from_u64(mix_seed(session_seed, &[0xb7]));
    let mut trajectory = None;
    let mut stopped = false;
    for (k, task) in plan.tasks.iter().enumerate() {
        let d = durations.task_seconds(plan.index, task);
        if !(d.is_finite() && d >= 0.0) {
            return Err(ProtocolError::InvalidDuration {
                task: task.id,
                value: d,
            });
        }
        clock.log(EventKind::TaskStarted { task: task.id });
        let (traj, abort) = run_task(
            task,
            subject,
            &bundle,
            &cfg,
            &rom,
            mix_seed(session_seed, &[task.id as u64]),
        )?;
        if let Some(reason) = abort {
            log.adjustments += 1;
            clock.log(EventKind::DeviceAdjustment {
                task: task.id,
                reason,
            });
        }
        let summary = EpisodeSummary::of(&traj, cfg.reversal_deadband);
        if trajectory.is_none() {
            trajectory = Some(traj);
        }
        clock.t += d;
        clock.active += d;
        clock.log(EventKind::TaskCompleted {
            task: task.id,
            duration_s: d,
            episode: summary,
        });
        log.last_completed = Some(task.id);
        if clock.active >= plan.budget_s {
            log.overflow = clock.active > plan.budget_s;
            log.protocol_completed = k + 1 == plan.tasks.len();
            stopped = true;
            break;
        }
        if k + 1 < plan.tasks.len() && breaks.random::<f64>() < subject.break_probability {
            let pause = breaks.random_range(60.0..180.0);
            clock.t += pause;
            clock.log(EventKind::Break { duration_s: pause });
        }
    }
    if !stopped {
        log.protocol_completed = true;
        log.free_training_s = plan.budget_s - clock.active;
        clock.log(EventKind::FreeTraining {
            duration_s: log.free_training_s,
        });
        clock.t += log.free_training_s;
    }
    log.active_s = clock.active;
    log.events = clock.events;
    Ok(SessionRun {
        log,
        trajectory: trajectory.unwrap_or_default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intent::ControlGroup;
    use crate::protocol::ProportionalDurations;
    use proptest::prelude::*;

    fn quiet(group: ControlGroup) -> SubjectModel {
        SubjectModel {
            break_probability: 0.0,
            ..SubjectModel::new("T01", group, 5)
        }
    }

    fn short_plan(n: usize) -> SessionPlan {
        let mut p = SessionPlan::new(1, None);
        p.tasks.truncate(n);
        for t in &mut p.tasks {
            t.reps = 1;
        }
        p
    }

    #[test]
    fn empty_plan_gives_empty_log() {
        let plan = short_plan(0);
        let run = run_session(
            &plan,
            &quiet(ControlGroup::Sh),
            &ControllerConfig::default(),
            &|_, _: &TrainingTask| 10.0,
        )
        .unwrap();
        assert!(run.log.events.is_empty());
        assert_eq!(run.log.active_s, 0.0);
        assert_eq!(run.log.last_completed, None);
    }

    #[test]
    fn short_protocol_gets_free_training() {
        let plan = short_plan(3);
        let run = run_session(
            &plan,
            &quiet(ControlGroup::Sh),
            &ControllerConfig::default(),
            &|_, _: &TrainingTask| 100.0,
        )
        .unwrap();
        assert!(run.log.protocol_completed && !run.log.overflow);
        assert_eq!(run.log.free_training_s, 1500.0);
        assert!(matches!(
            run.log.events.last().unwrap().kind,
            EventKind::FreeTraining { duration_s } if duration_s == 1500.0
        ));
    }

    #[test]
    fn stops_after_task_that_crosses_budget() {
        let plan = short_plan(5);
        let run = run_session(
            &plan,
            &quiet(ControlGroup::Sh),
            &ControllerConfig::default(),
            &|_, _: &TrainingTask| 700.0,
        )
        .unwrap();
        assert_eq!(run.log.last_completed, Some(3));
        assert!(run.log.overflow);
        assert_eq!(run.log.active_s, 2100.0);
        assert_eq!(replay_last_completed(&run.log.events), Some(3));
    }

    #[test]
    fn exact_boundary_is_not_overflow() {
        let plan = short_plan(5);
        let run = run_session(
            &plan,
            &quiet(ControlGroup::Sh),
            &ControllerConfig::default(),
            &|_, _: &TrainingTask| 600.0,
        )
        .unwrap();
        assert_eq!((run.log.last_completed, run.log.overflow), (Some(3), false));
        assert_eq!(run.log.free_training_s, 0.0);
    }

    #[test]
    fn sh_grasp_cycles_open_and_close_the_hand() {
        let plan = short_plan(1);
        let run = run_session(
            &plan,
            &quiet(ControlGroup::Sh),
            &ControllerConfig::default(),
            &|_, _: &TrainingTask| 10.0,
        )
        .unwrap();
        let traj = &run.trajectory;
        assert!(traj.first_open_time(0.0, 5.0).is_some());
        assert!(traj.max_tension() <= 100.0 && traj.min_angle() >= 0.0);
    }

    #[test]
    fn emg_session_runs() {
        let plan = short_plan(2);
        let run = run_session(
            &plan,
            &quiet(ControlGroup::Emg),
            &ControllerConfig::default(),
            &|_, _: &TrainingTask| 10.0,
        )
        .unwrap();
        assert_eq!(run.log.last_completed, Some(2));
        assert!(run.trajectory.first_open_time(0.0, 5.0).is_some());
    }

    #[test]
    fn low_safety_limit_logs_adjustment_and_resumes() {
        let plan = short_plan(2);
        let cfg = ControllerConfig {
            safety_limit_n: 5.0,
            ..ControllerConfig::default()
        };
        let run = run_session(
            &plan,
            &quiet(ControlGroup::Sh),
            &cfg,
            &|_, _: &TrainingTask| 10.0,
        )
        .unwrap();
        assert_eq!(run.log.adjustments, 2);
        assert_eq!(run.log.last_completed, Some(2));
        assert!(run
            .log
            .events
            .iter()
            .any(|e| matches!(e.kind, EventKind::DeviceAdjustment { task: 1, .. })));
    }

    #[test]
    fn breaks_take_no_active_time() {
        let plan = short_plan(6);
        let subject = SubjectModel {
            break_probability: 1.0,
            ..quiet(ControlGroup::Sh)
        };
        let run = run_session(
            &plan,
            &subject,
            &ControllerConfig::default(),
            &|_, _: &TrainingTask| 50.0,
        )
        .unwrap();
        let n_breaks = run
            .log
            .events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::Break { .. }))
            .count();
        assert_eq!(n_breaks, 5);
        assert_eq!(run.log.active_s, 300.0);
        assert!(run.log.events.windows(2).all(|w| w[0].t <= w[1].t));
        let end = run
            .log
            .events
            .iter()
            .rev()
            .find(|e| matches!(e.kind, EventKind::TaskCompleted { .. }))
            .unwrap();
        assert!(end.t > end.active_s);
    }

    #[test]
    fn standard_program_has_twelve_sessions() {
        let p = ProgramPlan::standard(None).unwrap();
        p.validate().unwrap();
        assert_eq!(p.sessions.len(), 12);
        assert_eq!((p.sessions_per_week, p.weeks), (3, 4));
        assert!(ProgramPlan::standard(Some(&[String::from("2020-01-01")])).is_err());
        let mut bad = p.clone();
        bad.sessions.pop();
        assert!(bad.validate().is_err());
    }

    #[test]
    fn proportional_overflow_on_full_protocol() {
        let plan = SessionPlan::new(4, None);
        let d = ProportionalDurations::with_total(45.0 * 60.0, &plan.tasks);
        let run = run_session(
            &plan,
            &quiet(ControlGroup::Sh),
            &ControllerConfig::default(),
            &d,
        )
        .unwrap();
        assert!(run.log.overflow && !run.log.protocol_completed);
        assert!(run.log.active_s >= SESSION_BUDGET_S);
        let before = run.log.active_s
            - d.task_seconds(4, &plan.tasks[run.log.last_completed.unwrap() as usize - 1]);
        assert!(before < SESSION_BUDGET_S);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn budget_crossing_sets_overflow_or_lands_exactly(ds in proptest::collection::vec(0u32..900, 1..6)) {
            let plan = short_plan(ds.len());
            let model = |_: u8, t: &TrainingTask| ds[t.id as usize - 1] as f64;
            let run = run_session(&plan, &quiet(ControlGroup::Sh), &ControllerConfig::default(), &model).unwrap();
            let log = &run.log;
            if log.active_s >= SESSION_BUDGET_S {
                prop_assert!(log.overflow || log.active_s == SESSION_BUDGET_S);
            } else {
                prop_assert!(log.protocol_completed && !log.overflow);
                prop_assert_eq!(log.free_training_s, SESSION_BUDGET_S - log.active_s);
            }
            prop_assert_eq!(replay_last_completed(&log.events), log.last_completed);
        }
    }
}
