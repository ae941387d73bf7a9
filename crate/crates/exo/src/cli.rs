use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use exo_core::controller::{ControllerConfig, HandSize, Mas};
use exo_core::intent::{
    labeled_features, screen_emg_eligibility, screening_script, screening_traces, train_classifier,
    training_script, ControlGroup, FeatureWindow, Intent, SCREENING_CONDITIONS,
};
use exo_core::math::mix_seed;
use exo_core::outcomes::{analyze_cohort, AnalysisConfig};
use exo_core::protocol::{
    build_protocol, lognormal_with_median_total, run_session, LognormalDurations, ProgramPlan,
    SubjectModel,
};
use exo_core::signals::{gen_emg_trace, gen_load_trace, LoadProfile, Posture, SignalProfile};
use serde_json::json;

use crate::config::Config;
use crate::error::{CliError, Result};
use crate::jsonl::{write_records, COHORT_REPORT, SESSION_LOG, TRAJECTORY};
use crate::{cohort, plan, report, traces};

#[derive(Debug, Parser)]
#[command(
    name = "exo",
    version,
    about = "Hand-orthosis workbench: signals, screening, simulation, analysis"
)]
pub struct Cli {
    /// RNG seed; falls back to the config file, then 0.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Flat key = value config file; falls back to $EXO_CONFIG.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for generated files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic sensor traces.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Screen a directory of condition recordings for EMG eligibility.
    Screen { dir: PathBuf },
    /// Run training sessions in closed loop and write session logs.
    Simulate(SimulateArgs),
    /// Cohort outcome analysis from a long-format CSV.
    Analyze(AnalyzeArgs),
    /// Training protocol utilities.
    #[command(subcommand)]
    Protocol(ProtocolCommand),
}

#[derive(Debug, Args, Clone, Copy)]
pub struct Distortion {
    /// Fatigue drift rate, 1/s.
    #[arg(long, default_value_t = 0.0)]
    pub drift: f64,
    /// Channel crosstalk fraction.
    #[arg(long, default_value_t = 0.0)]
    pub crosstalk: f64,
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// EMG trace following an intent script such as `open:2,relax:2,close:2`.
    Emg {
        #[arg(long)]
        intent_script: String,
        #[command(flatten)]
        distortion: Distortion,
        #[arg(long, default_value = "emg.jsonl")]
        file: String,
    },
    /// Harness load trace following a posture script such as `rest:1,elevated:1`.
    Load {
        #[arg(long)]
        script: String,
        #[arg(long, default_value_t = 0.0)]
        noise_sd: f64,
        #[arg(long, default_value_t = 0.0)]
        dither_amplitude: f64,
        #[arg(long, default_value_t = 2.0)]
        dither_hz: f64,
        #[arg(long, default_value = "load.jsonl")]
        file: String,
    },
    /// Training recording plus the six screening condition recordings.
    Subject {
        #[command(flatten)]
        distortion: Distortion,
    },
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Session plan file; defaults to the standard twelve sessions.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    #[arg(long)]
    pub group: Option<String>,
    #[arg(long)]
    pub hand: Option<String>,
    #[arg(long)]
    pub mas: Option<String>,
    /// Median active minutes for the whole protocol.
    #[arg(long)]
    pub median_total_min: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub cohort: PathBuf,
    /// Benjamini-Hochberg FDR level.
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum ProtocolCommand {
    /// Print the ordered training task list.
    ListTasks,
    /// Print or write the twelve-session plan.
    Plan {
        /// First session date, YYYY-MM-DD.
        #[arg(long)]
        start: Option<String>,
    },
}

/// Output of a successful command: text for stdout.
pub type Stdout = String;

struct Ctx {
    seed: u64,
    config: Config,
    out: Option<PathBuf>,
    format: Format,
}

impl Ctx {
    fn out_dir(&self) -> Result<PathBuf> {
        let dir = self.out.clone().unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&dir)
            .map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
        Ok(dir)
    }

    fn json<T: serde::Serialize>(&self, v: &T) -> Result<String> {
        let mut s = serde_json::to_string_pretty(v).map_err(CliError::data)?;
        s.push('\n');
        Ok(s)
    }
}

pub fn run(cli: Cli) -> Result<Stdout> {
    let config = Config::load(cli.config.as_deref())?;
    let seed = match cli.seed {
        Some(s) => s,
        None => config.get("seed")?.unwrap_or(0),
    };
    let ctx = Ctx {
        seed,
        config,
        out: cli.out,
        format: cli.format,
    };
    match cli.command {
        Command::Gen(g) => cmd_gen(&ctx, g),
        Command::Screen { dir } => cmd_screen(&ctx, &dir),
        Command::Simulate(a) => cmd_simulate(&ctx, a),
        Command::Analyze(a) => cmd_analyze(&ctx, a),
        Command::Protocol(p) => cmd_protocol(&ctx, p),
    }
}

/// Parses `args` (program name first) and runs the command. Help and
/// version requests come back as stdout text.
pub fn run_from<I, T>(args: I) -> Result<Stdout>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) if !e.use_stderr() => Ok(e.to_string()),
        Err(e) => Err(CliError::Usage(e.to_string())),
    }
}

fn parse_script<T>(s: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Vec<(T, f64)>> {
    s.split(',')
        .map(|seg| {
            let (name, dur) = seg.split_once(':').ok_or_else(|| {
                CliError::Usage(format!("script segment `{seg}` must be name:seconds"))
            })?;
            let label =
                parse(name).ok_or_else(|| CliError::Usage(format!("unknown label `{name}`")))?;
            let d: f64 = dur
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad duration in `{seg}`")))?;
            Ok((label, d))
        })
        .collect()
}

fn emg_profile(ctx: &Ctx, d: Distortion, seed: u64) -> Result<SignalProfile> {
    let mut drift = d.drift;
    let mut crosstalk = d.crosstalk;
    if drift == 0.0 {
        ctx.config.apply("subject.drift", &mut drift)?;
    }
    if crosstalk == 0.0 {
        ctx.config.apply("subject.crosstalk", &mut crosstalk)?;
    }
    let p = SignalProfile::separable(seed).with_distortion(drift, crosstalk);
    p.validate().map_err(CliError::usage)?;
    Ok(p)
}

fn load_profile(ctx: &Ctx, base: LoadProfile) -> Result<LoadProfile> {
    let mut p = base;
    ctx.config.apply("sh.rest_n", &mut p.rest_n)?;
    ctx.config.apply("sh.elevated_n", &mut p.elevated_n)?;
    ctx.config.apply("sh.depressed_n", &mut p.depressed_n)?;
    p.validate().map_err(CliError::usage)?;
    Ok(p)
}

/// File name for a screening condition recording.
pub fn condition_file(key: &str) -> String {
    format!("{key}.jsonl")
}

pub const TRAINING_FILE: &str = "training.jsonl";

fn cmd_gen(ctx: &Ctx, g: GenCommand) -> Result<Stdout> {
    let dir = ctx.out_dir()?;
    let mut written = Vec::new();
    match g {
        GenCommand::Emg {
            intent_script,
            distortion,
            file,
        } => {
            let script = parse_script(&intent_script, Intent::parse)?;
            let trace = gen_emg_trace(&emg_profile(ctx, distortion, ctx.seed)?, &script)
                .map_err(CliError::usage)?;
            let path = dir.join(file);
            traces::write_emg(&path, &trace)?;
            written.push(path);
        }
        GenCommand::Load {
            script,
            noise_sd,
            dither_amplitude,
            dither_hz,
            file,
        } => {
            let script = parse_script(&script, Posture::parse)?;
            let profile = load_profile(
                ctx,
                LoadProfile {
                    noise_sd,
                    dither_amplitude,
                    dither_hz,
                    seed: ctx.seed,
                    ..LoadProfile::default()
                },
            )?;
            let trace = gen_load_trace(&profile, &script).map_err(CliError::usage)?;
            let path = dir.join(file);
            traces::write_load(&path, &trace)?;
            written.push(path);
        }
        GenCommand::Subject { distortion } => {
            let profile = emg_profile(ctx, distortion, ctx.seed)?;
            let train = gen_emg_trace(
                &profile.with_seed(mix_seed(ctx.seed, &[0x7a])),
                &training_script(),
            )
            .map_err(CliError::usage)?;
            let path = dir.join(TRAINING_FILE);
            traces::write_emg(&path, &train)?;
            written.push(path);
            for (c, trace) in screening_traces(&profile).map_err(CliError::usage)? {
                let path = dir.join(condition_file(&c.key()));
                traces::write_emg(&path, &trace)?;
                written.push(path);
            }
        }
    }
    Ok(written
        .iter()
        .map(|p| format!("wrote {}\n", p.display()))
        .collect())
}

fn cmd_screen(ctx: &Ctx, dir: &Path) -> Result<Stdout> {
    let mut missing: Vec<String> = SCREENING_CONDITIONS
        .iter()
        .map(|c| condition_file(&c.key()))
        .filter(|f| !dir.join(f).is_file())
        .collect();
    if !dir.join(TRAINING_FILE).is_file() {
        missing.push(TRAINING_FILE.into());
    }
    if !missing.is_empty() {
        return Err(CliError::Data(format!(
            "{}: missing recordings: {}",
            dir.display(),
            missing.join(", ")
        )));
    }
    let train = traces::read_emg(&dir.join(TRAINING_FILE))?;
    let labeled = labeled_features(&train, &FeatureWindow::default()).map_err(CliError::data)?;
    let classifier = train_classifier(&labeled).map_err(CliError::data)?;
    let mut recs = Vec::new();
    for c in SCREENING_CONDITIONS {
        let path = dir.join(condition_file(&c.key()));
        let trace = traces::read_emg(&path)?;
        if trace
            .annotations
            .iter()
            .filter(|a| a.label == c.intent)
            .count()
            != screening_script(c.intent)
                .iter()
                .filter(|(i, _)| *i == c.intent)
                .count()
        {
            return Err(CliError::Data(format!(
                "{}: wrong number of attempts",
                path.display()
            )));
        }
        recs.push((c, trace));
    }
    let report = screen_emg_eligibility(&recs, &classifier).map_err(CliError::data)?;
    match ctx.format {
        Format::Text => Ok(report::screening_text(&report)),
        Format::Json => ctx.json(&report),
    }
}

fn controller_config(ctx: &Ctx) -> Result<ControllerConfig> {
    let mut cfg = ControllerConfig::default();
    let c = &ctx.config;
    c.apply("controller.dt", &mut cfg.dt)?;
    c.apply("controller.safety_limit_n", &mut cfg.safety_limit_n)?;
    c.apply(
        "controller.voluntary_torque_nmm",
        &mut cfg.voluntary_torque_nmm,
    )?;
    c.apply("controller.hold_tolerance_mm", &mut cfg.hold_tolerance_mm)?;
    c.apply("pid.kp", &mut cfg.gains.kp)?;
    c.apply("pid.ki", &mut cfg.gains.ki)?;
    c.apply("pid.kd", &mut cfg.gains.kd)?;
    c.apply("motor.no_load_rpm", &mut cfg.plant.motor.no_load_rpm)?;
    c.apply(
        "motor.spool_radius_mm",
        &mut cfg.plant.motor.spool_radius_mm,
    )?;
    c.apply("motor.stall_force_n", &mut cfg.plant.motor.stall_force_n)?;
    c.apply("tendon.stiffness", &mut cfg.plant.tendon.stiffness)?;
    c.apply("tendon.force_cap_n", &mut cfg.plant.tendon.force_cap_n)?;
    cfg.validate().map_err(CliError::usage)?;
    Ok(cfg)
}

fn subject_model(ctx: &Ctx, a: &SimulateArgs) -> Result<SubjectModel> {
    let c = &ctx.config;
    let pick =
        |flag: &Option<String>, key: &str| flag.clone().or_else(|| c.raw(key).map(str::to_string));
    let group = match pick(&a.group, "subject.group") {
        Some(g) => ControlGroup::parse(&g)
            .ok_or_else(|| CliError::Usage(format!("unknown group `{g}`")))?,
        None => ControlGroup::Emg,
    };
    let id = c.raw("subject.id").unwrap_or("P01");
    let mut s = SubjectModel::new(id, group, ctx.seed);
    if let Some(h) = pick(&a.hand, "subject.hand") {
        s.hand_size = HandSize::parse(&h).map_err(CliError::usage)?;
    }
    if let Some(m) = pick(&a.mas, "subject.mas") {
        s.mas = Mas::parse(&m)
            .ok_or_else(|| CliError::Usage(format!("MAS must be 0, 1, 1+ or 2, got `{m}`")))?;
    }
    s.emg = emg_profile(
        ctx,
        Distortion {
            drift: 0.0,
            crosstalk: 0.0,
        },
        ctx.seed,
    )?;
    s.load = load_profile(ctx, s.load)?;
    c.apply("subject.break_probability", &mut s.break_probability)?;
    s.validate().map_err(CliError::usage)?;
    Ok(s)
}

fn duration_model(ctx: &Ctx, a: &SimulateArgs) -> Result<LognormalDurations> {
    let seed = mix_seed(ctx.seed, &[0xd0]);
    let total_s = match a.median_total_min {
        Some(m) => Some(m * 60.0),
        None => ctx.config.get("durations.median_total_s")?,
    };
    let mut d = match total_s {
        Some(t) if t.is_finite() && t > 0.0 => {
            lognormal_with_median_total(t, &build_protocol(), seed)
        }
        Some(t) => {
            return Err(CliError::Usage(format!(
                "median total must be positive, got {t}"
            )))
        }
        None => LognormalDurations::default().with_seed(seed),
    };
    if let Some(sigma) = ctx.config.get::<f64>("durations.sigma")? {
        d.sigma = [sigma; 5];
    }
    d.validate().map_err(CliError::usage)?;
    Ok(d)
}

#[derive(serde::Serialize)]
struct SessionSummary<'a> {
    session: u8,
    date: Option<&'a str>,
    active_min: f64,
    last_completed: Option<u16>,
    overflow: bool,
    free_training_min: f64,
    safety_events: usize,
    log_file: String,
    trajectory_file: String,
}

fn cmd_simulate(ctx: &Ctx, a: SimulateArgs) -> Result<Stdout> {
    let program = match &a.plan {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?;
            plan::parse_plan(&text)?
        }
        None => ProgramPlan::standard(None).map_err(CliError::data)?,
    };
    let cfg = controller_config(ctx)?;
    let subject = subject_model(ctx, &a)?;
    let durations = duration_model(ctx, &a)?;
    let dir = ctx.out_dir()?;
    let mut lines = String::new();
    let mut summaries = Vec::new();
    let mut safety = 0usize;
    for sp in &program.sessions {
        let run = run_session(sp, &subject, &cfg, &durations).map_err(CliError::data)?;
        let log_file = format!("session_{:02}.jsonl", sp.index);
        let traj_file = format!("trajectory_{:02}.jsonl", sp.index);
        let log = &run.log;
        let meta = json!({
            "subject": log.subject,
            "session": log.session,
            "date": sp.date,
            "last_completed": log.last_completed,
            "active_s": log.active_s,
            "overflow": log.overflow,
            "protocol_completed": log.protocol_completed,
            "free_training_s": log.free_training_s,
            "adjustments": log.adjustments,
        });
        write_records(&dir.join(&log_file), SESSION_LOG, meta, &log.events)?;
        write_records(
            &dir.join(&traj_file),
            TRAJECTORY,
            json!({"session": log.session, "task": log.events.iter().find_map(|e| match e.kind {
                exo_core::protocol::EventKind::TaskStarted { task } => Some(task),
                _ => None,
            })}),
            &run.trajectory.ticks,
        )?;
        safety += log.adjustments;
        lines.push_str(&report::session_line(log, sp.date.as_deref()));
        lines.push('\n');
        summaries.push((sp.index, sp.date.clone(), log.clone(), log_file, traj_file));
    }
    let out = match ctx.format {
        Format::Text => lines,
        Format::Json => ctx.json(
            &summaries
                .iter()
                .map(|(i, d, log, lf, tf)| SessionSummary {
                    session: *i,
                    date: d.as_deref(),
                    active_min: log.active_s / 60.0,
                    last_completed: log.last_completed,
                    overflow: log.overflow,
                    free_training_min: log.free_training_s / 60.0,
                    safety_events: log.adjustments,
                    log_file: lf.clone(),
                    trajectory_file: tf.clone(),
                })
                .collect::<Vec<_>>(),
        )?,
    };
    if safety > 0 {
        print!("{out}");
        return Err(CliError::Safety(format!(
            "{safety} safety abort(s) during simulation; see DeviceAdjustment events in the session logs"
        )));
    }
    Ok(out)
}

fn cmd_analyze(ctx: &Ctx, a: AnalyzeArgs) -> Result<Stdout> {
    let mut cfg = AnalysisConfig::default();
    ctx.config.apply("q", &mut cfg.q)?;
    ctx.config.apply("alpha", &mut cfg.alpha)?;
    if let Some(q) = a.q {
        cfg.q = q;
    }
    if let Some(alpha) = a.alpha {
        cfg.alpha = alpha;
    }
    if !(cfg.q > 0.0 && cfg.q < 1.0) || !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(CliError::Usage("--q and --alpha must lie in (0, 1)".into()));
    }
    let cohort = cohort::read_cohort(&a.cohort)?;
    let rep = analyze_cohort(&cohort, &cfg).map_err(CliError::data)?;
    let text = report::cohort_text(&rep);
    if ctx.out.is_some() {
        let dir = ctx.out_dir()?;
        write_records(
            &dir.join("report.jsonl"),
            COHORT_REPORT,
            serde_json::Value::Null,
            &[&rep],
        )?;
        let p = dir.join("report.txt");
        std::fs::write(&p, format!("# {COHORT_REPORT} v1\n{text}"))
            .map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?;
    }
    match ctx.format {
        Format::Text => Ok(text),
        Format::Json => ctx.json(&rep),
    }
}

fn cmd_protocol(ctx: &Ctx, p: ProtocolCommand) -> Result<Stdout> {
    match p {
        ProtocolCommand::ListTasks => {
            let tasks = build_protocol();
            match ctx.format {
                Format::Text => Ok(report::tasks_text(&tasks)),
                Format::Json => ctx.json(&tasks),
            }
        }
        ProtocolCommand::Plan { start } => {
            let start = start
                .map(|s| {
                    NaiveDate::parse_from_str(&s, "%Y-%m-%d").map_err(|_| {
                        CliError::Usage(format!("--start must be YYYY-MM-DD, got `{s}`"))
                    })
                })
                .transpose()?;
            let text = plan::format_plan(&plan::standard_plan(start));
            if ctx.out.is_some() {
                let path = ctx.out_dir()?.join("plan.txt");
                std::fs::write(&path, &text)
                    .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            }
            Ok(text)
        }
    }
}
