//! Command-line surface. Every subcommand writes its primary output files
//! plus a `manifest.json` into the output directory. Exit codes: 0 success,
//! 1 validation error (machine-readable JSON on stderr), 2 usage error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bell::{
    chsh_value, monte_carlo_chsh, BellState, ChshConfig, ChshSettings, MeasurementSetting,
};
use crate::budget::{pair_rate, time_to_pairs, BudgetConfig};
use crate::cavity::{scan_length, IonConstants};
use crate::density::DensityMatrix;
use crate::error::Error;
use crate::optics::{Detector, DetectorBank, HeraldClass, OpticalCircuit};
use crate::protocol::{
    apply_channels, apply_compensation, emit_pair, group_by_class, hom_experiment, phase_grid,
    phase_insensitivity_report, run_attempt, ChannelModel, EmissionModel,
};
use crate::report::{
    self, write_csv, write_json, write_manifest, ChshReport, HeraldReport, HomReport, RateReport,
    TimingOutput,
};
use crate::timing::{build_schedule, min_choice_delay, validate, Scenario};

#[derive(Parser, Debug)]
#[command(
    name = "ionherald",
    version,
    about = "Exact simulator for heralded ion-ion entanglement via two-photon Bell-state detection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Directory for output files and the run manifest.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for sweeps and Monte Carlo trials
    /// (default: IONHERALD_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact herald statistics of one entanglement attempt.
    Herald(HeraldArgs),
    /// CHSH statistics on a heralded ion state, analytic plus Monte Carlo.
    Chsh(ChshArgs),
    /// Optimal-cavity figures over a range of cavity lengths (CSV).
    CavityScan(CavityScanArgs),
    /// Entangled-pair rate budget.
    Rate(RateArgs),
    /// Loophole-free timing checks for an experiment geometry.
    Timing(TimingArgs),
    /// Two-photon interference at a symmetric 50/50 beam splitter.
    Hom(HomArgs),
    /// Herald fidelity vs propagation phases, against the single-photon
    /// scheme (CSV).
    PhaseSweep(PhaseSweepArgs),
}

/// Error carried to the process boundary; printed as JSON on stderr.
#[derive(Debug)]
pub struct CliError {
    pub kind: String,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        Self {
            kind: err.kind().to_string(),
            message: err.to_string(),
        }
    }
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self {
            kind: "invalid_config".to_string(),
            message: message.into(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

pub fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(err) => {
            eprintln!(
                "{}",
                json!({"error": {"kind": err.kind, "message": err.message}})
            );
            std::process::ExitCode::FAILURE
        }
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    let threads = cli.threads.or_else(|| {
        std::env::var("IONHERALD_THREADS")
            .ok()
            .and_then(|s| s.parse().ok())
    });
    match threads {
        Some(n) if n > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::config(format!("building thread pool: {e}")))?;
            pool.install(|| dispatch(&cli))
        }
        _ => dispatch(&cli),
    }
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Herald(args) => herald(args, &cli.out),
        Command::Chsh(args) => chsh(args, &cli.out),
        Command::CavityScan(args) => cavity_scan(args, &cli.out),
        Command::Rate(args) => rate(args, &cli.out),
        Command::Timing(args) => timing(args, &cli.out),
        Command::Hom(args) => hom(args, &cli.out),
        Command::PhaseSweep(args) => phase_sweep(args, &cli.out),
    }
}

fn load_config<T: for<'de> Deserialize<'de> + Default>(path: Option<&PathBuf>) -> CliResult<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::config(format!("reading {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::config(format!("parsing {}: {e}", p.display())))
        }
    }
}

fn config_json<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("config serializes")
}

// ---------------------------------------------------------------------------
// herald
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct HeraldConfig {
    pub emission: EmissionModel,
    pub channel_a: ChannelModel,
    pub channel_b: ChannelModel,
    pub detector: Detector,
}

#[derive(Args, Debug)]
pub struct HeraldArgs {
    /// JSON config file; flags override file values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Lossless channels, perfect detectors, symmetric emission.
    #[arg(long)]
    pub ideal: bool,
    /// Ion-to-ion distance; each channel gets half of it.
    #[arg(long)]
    pub distance_km: Option<f64>,
    #[arg(long)]
    pub attenuation_db_per_km: Option<f64>,
    /// Detector efficiency η.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub dark_count_prob: Option<f64>,
    #[arg(long)]
    pub number_resolving: Option<bool>,
    /// Propagation phase k·L of channel A, radians.
    #[arg(long)]
    pub phase_a: Option<f64>,
    /// Propagation phase k·L of channel B, radians.
    #[arg(long)]
    pub phase_b: Option<f64>,
    /// Temporal offset of channel B in bins (any nonzero value is fully
    /// distinguishable).
    #[arg(long)]
    pub temporal_offset: Option<u8>,
    /// Wavepacket overlap μ applied to both channels.
    #[arg(long)]
    pub overlap: Option<f64>,
    /// Emission amplitude asymmetry ε.
    #[arg(long)]
    pub asymmetry: Option<f64>,
    #[arg(long)]
    pub compensate: Option<bool>,
    /// Custom analyzer circuit JSON replacing the built-in one.
    #[arg(long)]
    pub circuit: Option<PathBuf>,
}

fn herald(args: &HeraldArgs, out_dir: &Path) -> CliResult<()> {
    let mut config: HeraldConfig = load_config(args.config.as_ref())?;
    if args.ideal {
        config = HeraldConfig::default();
    }
    if let Some(d) = args.distance_km {
        config.channel_a.length_km = d / 2.0;
        config.channel_b.length_km = d / 2.0;
    }
    if let Some(a) = args.attenuation_db_per_km {
        config.channel_a.attenuation_db_per_km = a;
        config.channel_b.attenuation_db_per_km = a;
    }
    if let Some(p) = args.phase_a {
        config.channel_a.wavenumber_rad_per_m = 1.0;
        config.channel_a.path_length_m = Some(p);
    }
    if let Some(p) = args.phase_b {
        config.channel_b.wavenumber_rad_per_m = 1.0;
        config.channel_b.path_length_m = Some(p);
    }
    if let Some(o) = args.temporal_offset {
        config.channel_b.temporal_offset_bins = o;
    }
    if let Some(mu) = args.overlap {
        config.channel_a.overlap = Some(mu);
        config.channel_b.overlap = Some(mu);
    }
    if let Some(eta) = args.eta {
        config.detector.efficiency = eta;
    }
    if let Some(d) = args.dark_count_prob {
        config.detector.dark_count_prob = d;
    }
    if let Some(nr) = args.number_resolving {
        config.detector.number_resolving = nr;
    }
    if let Some(eps) = args.asymmetry {
        config.emission.amplitude_asymmetry = eps;
    }
    if let Some(c) = args.compensate {
        config.emission.compensate = c;
    }

    let bank = DetectorBank::analyzer(config.detector);
    let results = match &args.circuit {
        None => run_attempt(
            &config.emission,
            &config.channel_a,
            &config.channel_b,
            &bank,
        )?,
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("reading {}: {e}", path.display())))?;
            let circuit: OpticalCircuit = serde_json::from_str(&text)
                .map_err(|e| CliError::config(format!("parsing {}: {e}", path.display())))?;
            let state = emit_pair(&config.emission);
            let compensated = apply_compensation(&state, &config.emission)?;
            let mut members = Vec::new();
            for m in compensated.members() {
                members.extend(
                    apply_channels(m, &config.channel_a, &config.channel_b)?
                        .members()
                        .to_vec(),
                );
            }
            let ens = circuit.apply(&crate::optics::Ensemble::from_members(members))?;
            group_by_class(crate::optics::measure(&ens, &bank)?)
        }
    };

    let report = HeraldReport {
        config: config_json(&config),
        results: results.iter().map(Into::into).collect(),
    };
    let path = out_dir.join("herald_report.json");
    let bytes = write_json(&path, &report)?;
    write_manifest(
        out_dir,
        "herald",
        None,
        config_json(&config),
        &[(path, bytes)],
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// chsh
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UsableHerald {
    PsiMinus,
    PsiPlus,
}

impl UsableHerald {
    fn herald_class(self) -> HeraldClass {
        match self {
            UsableHerald::PsiMinus => HeraldClass::PsiMinus,
            UsableHerald::PsiPlus => HeraldClass::PsiPlus,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct ChshCliConfig {
    /// "ideal" for the perfect heralded ψ⁻, or a path to a herald report.
    pub state: String,
    pub herald_class: UsableHerald,
    /// In-plane setting azimuths a, a′, b, b′ in degrees.
    pub settings_deg: [f64; 4],
    pub trials: u64,
    pub seed: u64,
    pub depolarize: f64,
    pub analytic_only: bool,
}

impl Default for ChshCliConfig {
    fn default() -> Self {
        Self {
            state: "ideal".to_string(),
            herald_class: UsableHerald::PsiMinus,
            settings_deg: [0.0, 90.0, 45.0, 135.0],
            trials: 100_000,
            seed: 42,
            depolarize: 0.0,
            analytic_only: false,
        }
    }
}

#[derive(Args, Debug)]
pub struct ChshArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// "ideal" or a herald_report.json produced by the herald subcommand.
    #[arg(long)]
    pub state: Option<String>,
    /// Which herald class to read from the report file.
    #[arg(long, value_enum)]
    pub herald_class: Option<UsableHerald>,
    /// Four equatorial setting angles a,a',b,b' in degrees.
    #[arg(long, value_delimiter = ',')]
    pub settings_deg: Option<Vec<f64>>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Depolarization applied to the state before measuring.
    #[arg(long)]
    pub depolarize: Option<f64>,
    /// Skip Monte Carlo sampling.
    #[arg(long)]
    pub analytic_only: bool,
}

fn chsh(args: &ChshArgs, out_dir: &Path) -> CliResult<()> {
    let mut config: ChshCliConfig = load_config(args.config.as_ref())?;
    if let Some(s) = &args.state {
        config.state = s.clone();
    }
    if let Some(h) = args.herald_class {
        config.herald_class = h;
    }
    if let Some(s) = &args.settings_deg {
        if s.len() != 4 {
            return Err(CliError::config("--settings-deg needs exactly 4 angles"));
        }
        config.settings_deg = [s[0], s[1], s[2], s[3]];
    }
    if let Some(t) = args.trials {
        config.trials = t;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(d) = args.depolarize {
        config.depolarize = d;
    }
    if args.analytic_only {
        config.analytic_only = true;
    }

    let mut rho: DensityMatrix = if config.state == "ideal" {
        match config.herald_class {
            UsableHerald::PsiMinus => BellState::PsiMinus.density(),
            UsableHerald::PsiPlus => BellState::PsiPlus.density(),
        }
    } else {
        let text = fs::read_to_string(&config.state)
            .map_err(|e| CliError::config(format!("reading {}: {e}", config.state)))?;
        let herald: HeraldReport = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("parsing {}: {e}", config.state)))?;
        let wanted = config.herald_class.herald_class();
        let entry = herald
            .results
            .iter()
            .find(|r| r.class == wanted)
            .ok_or_else(|| CliError::config(format!("herald report has no {wanted} entry")))?;
        report::ion_density_matrix_from_json(&entry.ion_state)?
    };
    if config.depolarize > 0.0 {
        rho = crate::bell::depolarize(&rho, config.depolarize)?;
    }

    let [a, ap, b, bp] = config.settings_deg;
    let settings = ChshSettings {
        a: MeasurementSetting::equatorial(a.to_radians()),
        a_prime: MeasurementSetting::equatorial(ap.to_radians()),
        b: MeasurementSetting::equatorial(b.to_radians()),
        b_prime: MeasurementSetting::equatorial(bp.to_radians()),
    };
    let analytic_s = chsh_value(&rho, &settings)?;
    let monte_carlo = if config.analytic_only {
        None
    } else {
        Some(monte_carlo_chsh(
            &rho,
            &ChshConfig {
                settings,
                trials: config.trials,
                rng_seed: config.seed,
            },
        )?)
    };

    let report = ChshReport {
        config: config_json(&config),
        analytic_s,
        monte_carlo,
    };
    let path = out_dir.join("chsh_report.json");
    let bytes = write_json(&path, &report)?;
    write_manifest(
        out_dir,
        "chsh",
        Some(config.seed),
        config_json(&config),
        &[(path, bytes)],
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// cavity-scan
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct CavityScanArgs {
    /// Explicit cavity lengths in meters.
    #[arg(long, value_delimiter = ',')]
    pub lengths: Option<Vec<f64>>,
    /// Log-spaced scan range (meters), used with --points.
    #[arg(long, requires = "l_max")]
    pub l_min: Option<f64>,
    #[arg(long, requires = "l_min")]
    pub l_max: Option<f64>,
    #[arg(long, default_value_t = 25)]
    pub points: usize,
    /// Non-cavity loss rate Γ, 1/s.
    #[arg(long)]
    pub loss_rate: Option<f64>,
    /// Free-space rate of the cavity-coupled transition, 1/s.
    #[arg(long)]
    pub transition_rate: Option<f64>,
    /// Transition wavelength, m.
    #[arg(long)]
    pub wavelength: Option<f64>,
}

fn cavity_scan(args: &CavityScanArgs, out_dir: &Path) -> CliResult<()> {
    let mut ion = IonConstants::default();
    if let Some(v) = args.loss_rate {
        ion.loss_rate = v;
    }
    if let Some(v) = args.transition_rate {
        ion.transition_rate = v;
    }
    if let Some(v) = args.wavelength {
        ion.wavelength = v;
    }
    let lengths: Vec<f64> = match (&args.lengths, args.l_min, args.l_max) {
        (Some(list), _, _) => list.clone(),
        (None, Some(lo), Some(hi)) => {
            if !(lo > 0.0 && hi > lo && args.points >= 2) {
                return Err(CliError::config(
                    "scan range needs 0 < l-min < l-max and at least 2 points",
                ));
            }
            (0..args.points)
                .map(|i| {
                    (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (args.points - 1) as f64).exp()
                })
                .collect()
        }
        _ => vec![1e-3, 3e-3, 1e-2],
    };

    let rows: Vec<Vec<String>> = lengths
        .iter()
        .map(|&l| {
            let row = scan_length(&ion, l)?;
            Ok(vec![
                format!("{}", row.length_m),
                format!("{}", row.coupling),
                format!("{}", row.gamma_opt),
                format!("{}", row.finesse_pi),
                format!("{}", row.finesse_4pi),
                format!("{}", row.p_cav),
            ])
        })
        .collect::<Result<_, Error>>()?;

    let path = out_dir.join("cavity_scan.csv");
    let bytes = write_csv(
        &path,
        &[
            "length_m",
            "omega_rad_per_s",
            "gamma_opt_per_s",
            "finesse_pi",
            "finesse_4pi",
            "p_cav",
        ],
        &rows,
    )?;
    let config = json!({"ion": ion, "lengths": lengths});
    write_manifest(out_dir, "cavity-scan", None, config, &[(path, bytes)])?;
    Ok(())
}

// ---------------------------------------------------------------------------
// rate
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RatePreset {
    /// 3 mm cavity (p_cav = 0.01), 10 km distance.
    #[value(name = "paper-3mm")]
    Paper3mm,
    /// 1 mm cavity (p_cav = 0.06), 10 km distance.
    #[value(name = "paper-1mm")]
    Paper1mm,
}

#[derive(Args, Debug)]
pub struct RateArgs {
    #[arg(long, value_enum)]
    pub preset: Option<RatePreset>,
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub repetition_rate: Option<f64>,
    #[arg(long)]
    pub p_cav: Option<f64>,
    #[arg(long)]
    pub fiber_coupling: Option<f64>,
    #[arg(long)]
    pub distance_km: Option<f64>,
    #[arg(long)]
    pub attenuation_db_per_km: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub herald_fraction: Option<f64>,
    /// Also report the time to accumulate this many pairs.
    #[arg(long)]
    pub pairs: Option<u64>,
    /// Sweep cavity length as min,max,points (meters, log-spaced); p_cav is
    /// derived from the cavity model at each length.
    #[arg(long, value_delimiter = ',')]
    pub sweep_length: Option<Vec<f64>>,
}

fn rate(args: &RateArgs, out_dir: &Path) -> CliResult<()> {
    let mut config: BudgetConfig = match args.preset {
        Some(RatePreset::Paper3mm) => BudgetConfig::default(),
        Some(RatePreset::Paper1mm) => BudgetConfig {
            p_cav: 0.06,
            ..BudgetConfig::default()
        },
        None => load_config(args.config.as_ref())?,
    };
    if let Some(v) = args.repetition_rate {
        config.repetition_rate = v;
    }
    if let Some(v) = args.p_cav {
        config.p_cav = v;
    }
    if let Some(v) = args.fiber_coupling {
        config.fiber_coupling = v;
    }
    if let Some(v) = args.distance_km {
        config.distance_km = v;
    }
    if let Some(v) = args.attenuation_db_per_km {
        config.attenuation_db_per_km = v;
    }
    if let Some(v) = args.eta {
        config.detector_eta = v;
    }
    if let Some(v) = args.herald_fraction {
        config.herald_fraction = v;
    }

    let rate = pair_rate(&config)?;
    let seconds = match args.pairs {
        Some(n) => Some(time_to_pairs(&config, n)?),
        None => None,
    };
    let report = RateReport {
        config: config_json(&config),
        pairs_per_second: rate,
        pairs_per_minute: rate * 60.0,
        seconds_to_requested_pairs: seconds,
    };
    let path = out_dir.join("rate_report.json");
    let bytes = write_json(&path, &report)?;
    let mut outputs = vec![(path, bytes)];

    if let Some(sweep) = &args.sweep_length {
        if sweep.len() != 3 {
            return Err(CliError::config("--sweep-length needs min,max,points"));
        }
        let (lo, hi, n) = (sweep[0], sweep[1], sweep[2] as usize);
        if !(lo > 0.0 && hi > lo && n >= 2) {
            return Err(CliError::config(
                "sweep needs 0 < min < max and at least 2 points",
            ));
        }
        let ion = IonConstants::default();
        let rows: Vec<Vec<String>> = (0..n)
            .map(|i| {
                let l = (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp();
                let cavity = scan_length(&ion, l)?;
                let swept = BudgetConfig {
                    p_cav: cavity.p_cav,
                    ..config
                };
                Ok(vec![
                    format!("{}", l),
                    format!("{}", cavity.p_cav),
                    format!("{}", pair_rate(&swept)?),
                ])
            })
            .collect::<Result<_, Error>>()?;
        let sweep_path = out_dir.join("rate_sweep.csv");
        let sweep_bytes = write_csv(
            &sweep_path,
            &["length_m", "p_cav", "pairs_per_second"],
            &rows,
        )?;
        outputs.push((sweep_path, sweep_bytes));
    }

    write_manifest(out_dir, "rate", None, config_json(&config), &outputs)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// timing
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TimingPreset {
    /// Symmetric 10 km geometry with fiber photons at c/1.5.
    #[value(name = "paper-10km")]
    Paper10km,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepField {
    ExcitationToChoice,
    ChoiceToRotation,
    ReadoutDuration,
    FiberSpeed,
}

impl SweepField {
    fn apply(self, scenario: &Scenario, value: f64) -> Scenario {
        let mut s = *scenario;
        match self {
            SweepField::ExcitationToChoice => s.excitation_to_choice = value,
            SweepField::ChoiceToRotation => s.choice_to_rotation = value,
            SweepField::ReadoutDuration => s.readout_duration = value,
            SweepField::FiberSpeed => s.fiber_speed = value,
        }
        s
    }
}

#[derive(Args, Debug)]
pub struct TimingArgs {
    #[arg(long, value_enum)]
    pub preset: Option<TimingPreset>,
    /// Scenario JSON file.
    #[arg(long, conflicts_with = "preset")]
    pub scenario: Option<PathBuf>,
    #[arg(long)]
    pub excitation_to_choice: Option<f64>,
    #[arg(long)]
    pub choice_to_rotation: Option<f64>,
    #[arg(long)]
    pub readout_duration: Option<f64>,
    #[arg(long)]
    pub fiber_speed: Option<f64>,
    /// Scenario field to sweep into timing_sweep.csv.
    #[arg(long, value_enum, requires = "sweep_range")]
    pub sweep: Option<SweepField>,
    /// Sweep range as min,max,points (linear).
    #[arg(long, value_delimiter = ',', requires = "sweep")]
    pub sweep_range: Option<Vec<f64>>,
}

fn timing(args: &TimingArgs, out_dir: &Path) -> CliResult<()> {
    let mut scenario: Scenario = match args.preset {
        Some(TimingPreset::Paper10km) => Scenario::default(),
        None => load_config(args.scenario.as_ref())?,
    };
    if let Some(v) = args.excitation_to_choice {
        scenario.excitation_to_choice = v;
    }
    if let Some(v) = args.choice_to_rotation {
        scenario.choice_to_rotation = v;
    }
    if let Some(v) = args.readout_duration {
        scenario.readout_duration = v;
    }
    if let Some(v) = args.fiber_speed {
        scenario.fiber_speed = v;
    }

    let schedule = build_schedule(&scenario)?;
    let report = validate(&schedule)?;
    let output = TimingOutput {
        config: config_json(&scenario),
        schedule,
        report,
        max_choice_to_detection_window_s: scenario.max_choice_to_detection_window(),
        min_excitation_to_choice_delay_s: min_choice_delay(&scenario)?,
    };
    let path = out_dir.join("timing_report.json");
    let bytes = write_json(&path, &output)?;
    let mut outputs = vec![(path, bytes)];

    if let (Some(field), Some(range)) = (args.sweep, &args.sweep_range) {
        if range.len() != 3 {
            return Err(CliError::config("--sweep-range needs min,max,points"));
        }
        let (lo, hi, n) = (range[0], range[1], range[2] as usize);
        if !(hi > lo && n >= 2) {
            return Err(CliError::config(
                "sweep needs min < max and at least 2 points",
            ));
        }
        let rows: Vec<Vec<String>> = (0..n)
            .map(|i| {
                let value = lo + (hi - lo) * i as f64 / (n - 1) as f64;
                let swept = field.apply(&scenario, value);
                let report = validate(&build_schedule(&swept)?)?;
                Ok(vec![
                    format!("{}", value),
                    format!("{}", report.checks[0].margin_s),
                    format!("{}", report.checks[1].margin_s),
                    format!("{}", report.checks[2].margin_s),
                    format!("{}", report.all_passed),
                ])
            })
            .collect::<Result<_, Error>>()?;
        let sweep_path = out_dir.join("timing_sweep.csv");
        let sweep_bytes = write_csv(
            &sweep_path,
            &[
                "value",
                "margin_choice_b_vs_detection_a_s",
                "margin_choice_a_vs_detection_b_s",
                "margin_herald_s",
                "all_passed",
            ],
            &rows,
        )?;
        outputs.push((sweep_path, sweep_bytes));
    }

    write_manifest(out_dir, "timing", None, config_json(&scenario), &outputs)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// hom
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct HomArgs {
    /// Temporal offset between the two photons, whole bins.
    #[arg(long, default_value_t = 0)]
    pub offset_bins: u8,
    /// Fractional wavepacket overlap μ instead of whole-bin offsets.
    #[arg(long, conflicts_with = "offset_bins")]
    pub overlap: Option<f64>,
}

fn hom(args: &HomArgs, out_dir: &Path) -> CliResult<()> {
    let outcome = hom_experiment(args.offset_bins, args.overlap)?;
    let config = json!({"offset_bins": args.offset_bins, "overlap": args.overlap});
    let report = HomReport {
        config: config.clone(),
        coincidence_probability: outcome.coincidence_probability,
        bunched_first_output: outcome.bunched_first,
        bunched_second_output: outcome.bunched_second,
    };
    let path = out_dir.join("hom_report.json");
    let bytes = write_json(&path, &report)?;
    write_manifest(out_dir, "hom", None, config, &[(path, bytes)])?;
    Ok(())
}

// ---------------------------------------------------------------------------
// phase-sweep
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct PhaseSweepArgs {
    /// Grid points per phase axis over [0, 2π).
    #[arg(long, default_value_t = 11)]
    pub grid: usize,
}

fn phase_sweep(args: &PhaseSweepArgs, out_dir: &Path) -> CliResult<()> {
    if args.grid < 2 {
        return Err(CliError::config("grid needs at least 2 points"));
    }
    let grid = phase_grid(args.grid);
    let bank = DetectorBank::analyzer(Detector::default());
    let rows_data = phase_insensitivity_report(&grid, &grid, &bank)?;

    let mut rows: Vec<Vec<String>> = Vec::with_capacity(rows_data.len() * 3);
    for r in &rows_data {
        rows.push(vec![
            format!("{}", r.phi_a),
            format!("{}", r.phi_b),
            "psi_minus".to_string(),
            format!("{}", r.psi_minus_probability),
            format!("{}", r.psi_minus_fidelity),
        ]);
        rows.push(vec![
            format!("{}", r.phi_a),
            format!("{}", r.phi_b),
            "psi_plus".to_string(),
            format!("{}", r.psi_plus_probability),
            format!("{}", r.psi_plus_fidelity),
        ]);
        rows.push(vec![
            format!("{}", r.phi_a),
            format!("{}", r.phi_b),
            "single_photon".to_string(),
            "1".to_string(),
            format!("{}", r.single_photon_fidelity),
        ]);
    }
    let path = out_dir.join("phase_sweep.csv");
    let bytes = write_csv(
        &path,
        &["phi_a", "phi_b", "herald_class", "probability", "fidelity"],
        &rows,
    )?;
    let config = json!({"grid": args.grid});
    write_manifest(out_dir, "phase-sweep", None, config, &[(path, bytes)])?;
    Ok(())
}
