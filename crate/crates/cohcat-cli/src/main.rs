//! Command-line driver for coherence catalysis experiments.
//!
//! Five commands, all emitting deterministic CSV or JSON reports keyed by
//! the seed: exact and perturbed-target protocol runs (`catalysis-demo`),
//! the randomized monotonicity sweep (`monotonicity-sweep`), measure
//! evaluation of a state file (`rates`), assisted-distillation rate checks
//! (`assisted`), and merging-rate analyses (`iqsm`).
//!
//! Exit codes are CI-friendly: 0 when every asserted invariant passed,
//! 2 on an invariant violation, 1 on a usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use serde::Deserialize;

use cohcat::catalysis::{build_catalyst, monotonicity_harness, run_protocol};
use cohcat::channels::KrausChannel;
use cohcat::linalg::kron_power;
use cohcat::measures::{
    coherence_cost, coherence_of_formation, distillable_coherence, relative_entropy_of_coherence,
};
use cohcat::protocols::{assisted_distillation_rate, collaboration_upper_bound, iqsm_e0, verify_merge_bound};
use cohcat::report::ExperimentReport;
use cohcat::states::{
    is_incoherent, is_quantum_incoherent, random_density, random_pure, DensityOperator, PureState,
    SystemLayout,
};

const USAGE: &str = "usage: cohcat <command> [flags]

commands:
  catalysis-demo      run the catalytic protocol against an exact or
                      epsilon-perturbed n-copy target
  monotonicity-sweep  randomized monotone verification through
                      certified-incoherent channels
  rates               coherence measures of the state in --state-file
  assisted            assisted-distillation rates (sweep, or --state-file)
  iqsm                merging rates and resource-bound margins

flags:
  --d N            local dimension (default 2)
  --n N            protocol copy count, 2..=6 (default 3)
  --trials N       number of trials (default 1 for catalysis-demo, else 100)
  --seed N         RNG seed (fallback: env COHCAT_SEED, then config, then 0)
  --epsilon X      target perturbation for catalysis-demo (default 0)
  --state-file P   state JSON input (rates, assisted)
  --out P          write the report here instead of stdout
  --format F       csv | json (default csv)
  --config P       JSON file supplying the same keys; flags take precedence
";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    CatalysisDemo,
    MonotonicitySweep,
    Rates,
    Assisted,
    Iqsm,
}

impl Command {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "catalysis-demo" => Some(Self::CatalysisDemo),
            "monotonicity-sweep" => Some(Self::MonotonicitySweep),
            "rates" => Some(Self::Rates),
            "assisted" => Some(Self::Assisted),
            "iqsm" => Some(Self::Iqsm),
            _ => None,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Self::CatalysisDemo => "catalysis-demo",
            Self::MonotonicitySweep => "monotonicity-sweep",
            Self::Rates => "rates",
            Self::Assisted => "assisted",
            Self::Iqsm => "iqsm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

/// Keys a JSON config file may supply; flags override each one.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    d: Option<usize>,
    n: Option<usize>,
    trials: Option<usize>,
    seed: Option<u64>,
    epsilon: Option<f64>,
    state_file: Option<String>,
    out: Option<String>,
    format: Option<String>,
}

#[derive(Debug)]
struct ExperimentConfig {
    command: Command,
    d: usize,
    n: usize,
    trials: usize,
    seed: u64,
    epsilon: f64,
    state_file: Option<PathBuf>,
    out: Option<PathBuf>,
    format: Format,
}

struct UsageError(String);

fn parse_args(args: &[String]) -> Result<ExperimentConfig, UsageError> {
    if args.is_empty() {
        return Err(UsageError("missing command".into()));
    }
    let command = Command::parse(&args[0])
        .ok_or_else(|| UsageError(format!("unknown command `{}`", args[0])))?;

    let mut flag_d = None;
    let mut flag_n = None;
    let mut flag_trials = None;
    let mut flag_seed = None;
    let mut flag_epsilon = None;
    let mut flag_state = None;
    let mut flag_out = None;
    let mut flag_format = None;
    let mut config_path: Option<String> = None;

    let mut it = args[1..].iter();
    while let Some(flag) = it.next() {
        let mut value = |name: &str| -> Result<String, UsageError> {
            it.next()
                .cloned()
                .ok_or_else(|| UsageError(format!("flag {name} needs a value")))
        };
        match flag.as_str() {
            "--d" => flag_d = Some(parse_num::<usize>(&value("--d")?, "--d")?),
            "--n" => flag_n = Some(parse_num::<usize>(&value("--n")?, "--n")?),
            "--trials" => flag_trials = Some(parse_num::<usize>(&value("--trials")?, "--trials")?),
            "--seed" => flag_seed = Some(parse_num::<u64>(&value("--seed")?, "--seed")?),
            "--epsilon" => flag_epsilon = Some(parse_num::<f64>(&value("--epsilon")?, "--epsilon")?),
            "--state-file" => flag_state = Some(value("--state-file")?),
            "--out" => flag_out = Some(value("--out")?),
            "--format" => flag_format = Some(value("--format")?),
            "--config" => config_path = Some(value("--config")?),
            other => return Err(UsageError(format!("unknown flag `{other}`"))),
        }
    }

    let file: FileConfig = match &config_path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| UsageError(format!("cannot read config {p}: {e}")))?;
            serde_json::from_str(&text)
                .map_err(|e| UsageError(format!("malformed config {p}: {e}")))?
        }
        None => FileConfig::default(),
    };

    let env_seed = match std::env::var("COHCAT_SEED") {
        Ok(s) => Some(
            s.parse::<u64>()
                .map_err(|_| UsageError(format!("COHCAT_SEED is not an integer: `{s}`")))?,
        ),
        Err(_) => None,
    };

    let default_trials = match command {
        Command::CatalysisDemo | Command::Rates => 1,
        _ => 100,
    };

    let config = ExperimentConfig {
        command,
        d: flag_d.or(file.d).unwrap_or(2),
        n: flag_n.or(file.n).unwrap_or(3),
        trials: flag_trials.or(file.trials).unwrap_or(default_trials),
        seed: flag_seed.or(env_seed).or(file.seed).unwrap_or(0),
        epsilon: flag_epsilon.or(file.epsilon).unwrap_or(0.0),
        state_file: flag_state.or(file.state_file).map(PathBuf::from),
        out: flag_out.or(file.out).map(PathBuf::from),
        format: match flag_format.or(file.format).as_deref() {
            None | Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            Some(other) => return Err(UsageError(format!("unknown format `{other}`"))),
        },
    };

    if config.d < 2 {
        return Err(UsageError(format!("--d must be at least 2, got {}", config.d)));
    }
    if !(2..=6).contains(&config.n) {
        return Err(UsageError(format!("--n must be in 2..=6, got {}", config.n)));
    }
    if config.trials < 1 {
        return Err(UsageError("--trials must be at least 1".into()));
    }
    if config.epsilon.is_nan() || config.epsilon < 0.0 {
        return Err(UsageError(format!("--epsilon must be nonnegative, got {}", config.epsilon)));
    }
    Ok(config)
}

fn parse_num<T: std::str::FromStr>(s: &str, flag: &str) -> Result<T, UsageError> {
    s.parse::<T>()
        .map_err(|_| UsageError(format!("flag {flag} got a malformed value `{s}`")))
}

fn mix_seed(seed: u64, trial: u64, salt: u64) -> u64 {
    let mut z = seed
        ^ trial.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ salt.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn base_params(report: &mut ExperimentReport, config: &ExperimentConfig) {
    report.param("command", config.command.name());
    report.param("d", config.d);
    report.param("n", config.n);
    report.param("trials", config.trials);
    report.param("seed", config.seed);
    report.param("epsilon", config.epsilon);
    report.param(
        "format",
        match config.format {
            Format::Csv => "csv",
            Format::Json => "json",
        },
    );
    if let Some(p) = &config.state_file {
        report.param("state_file", p.display().to_string());
    }
}

fn run_catalysis_demo(config: &ExperimentConfig) -> cohcat::Result<ExperimentReport> {
    let mut report = ExperimentReport::new(config.command.name());
    base_params(&mut report, config);
    report.columns(&[
        "trial", "n", "d", "eps_in", "dist_out", "ratio", "cr_in", "cr_out", "cf_in", "cf_out",
        "pass",
    ]);

    let layout = SystemLayout::single("S", config.d, "A")?;
    let n = config.n;
    for t in 0..config.trials as u64 {
        let rho = random_density(&layout, config.d, mix_seed(config.seed, t, 1))?;
        let sigma = random_density(&layout, config.d, mix_seed(config.seed, t, 2))?;
        let copies = SystemLayout::from_factors(
            (1..=n)
                .map(|j| cohcat::states::Factor {
                    label: format!("S.{j}"),
                    dim: config.d,
                    party: "A".to_string(),
                })
                .collect(),
        )?;
        let clean = DensityOperator::from_matrix(copies.clone(), kron_power(sigma.matrix(), n))?;

        let gamma = if config.epsilon == 0.0 {
            clean.clone()
        } else {
            // mix toward a symmetrized random state; the trace distance is
            // linear along the segment, so the weight lands exactly on ε
            let noise = cohcat::channels::symmetrize(
                &random_density(&copies, copies.dim(), mix_seed(config.seed, t, 3))?,
                n,
            )?;
            let gap = clean.distance(&noise)?;
            if gap <= config.epsilon {
                return Err(cohcat::Error::Invalid(format!(
                    "epsilon {} is unreachable (sampled direction only {gap} away)",
                    config.epsilon
                )));
            }
            clean.mix(&noise, config.epsilon / gap)?
        };

        let tau = build_catalyst(&rho, &gamma, n)?;
        let lambda = KrausChannel::replacement(&gamma)?;
        let trace = run_protocol(&rho, &sigma, &tau, &lambda)?;

        let eps_in = trace.dist_gamma_target;
        let dist_out = trace.dist_joint;
        let ratio = if eps_in > 1e-13 { dist_out / eps_in } else { 0.0 };
        let cr_in = relative_entropy_of_coherence(&rho).value;
        let cr_out = relative_entropy_of_coherence(&trace.output).value;
        let cf_in = coherence_of_formation(&rho).value;
        let cf_out = coherence_of_formation(&trace.output).value;

        let mut pass = dist_out <= 2.0 * eps_in + 1e-9;
        pass &= trace.dist_catalyst_return <= 1e-10;
        if config.epsilon == 0.0 {
            pass &= dist_out <= 1e-10;
        }
        report.track_margin("dist_bound", 2.0 * eps_in + 1e-9 - dist_out);
        report.track_margin("catalyst_return", 1e-10 - trace.dist_catalyst_return);
        report.record(pass);
        report.push_row(vec![
            (t as usize).into(),
            n.into(),
            config.d.into(),
            eps_in.into(),
            dist_out.into(),
            ratio.into(),
            cr_in.into(),
            cr_out.into(),
            cf_in.into(),
            cf_out.into(),
            pass.into(),
        ]);
    }
    Ok(report)
}

fn run_rates(config: &ExperimentConfig) -> Result<ExperimentReport, String> {
    let path = config
        .state_file
        .as_ref()
        .ok_or_else(|| "rates needs --state-file".to_string())?;
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let rho: DensityOperator =
        serde_json::from_str(&text).map_err(|e| format!("malformed state {}: {e}", path.display()))?;

    let mut report = ExperimentReport::new(config.command.name());
    base_params(&mut report, config);
    report.param("state_dim", rho.dim());
    report.param("state_incoherent", is_incoherent(&rho));
    report.columns(&["measure", "value", "certified"]);

    let cr = relative_entropy_of_coherence(&rho);
    let cd = distillable_coherence(&rho);
    let cf = coherence_of_formation(&rho);
    let cc = coherence_cost(&rho);
    for (name, m) in [
        ("relative_entropy_of_coherence", &cr),
        ("distillable_coherence", &cd),
        ("coherence_of_formation", &cf),
        ("coherence_cost", &cc),
    ] {
        report.push_row(vec![
            name.into(),
            m.value.into(),
            match m.certified {
                cohcat::measures::Certification::Exact => "exact".into(),
                cohcat::measures::Certification::UpperBound => "upper-bound".into(),
            },
        ]);
    }
    let pass = cd.value <= cc.value + 1e-6
        && [cr.value, cd.value, cf.value, cc.value].iter().all(|&v| v >= -1e-9);
    report.track_margin("cost_dominates", cc.value + 1e-6 - cd.value);
    report.record(pass);
    Ok(report)
}

fn run_assisted(config: &ExperimentConfig) -> Result<ExperimentReport, String> {
    let mut report = ExperimentReport::new(config.command.name());
    base_params(&mut report, config);

    if let Some(path) = &config.state_file {
        let text =
            std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let rho: DensityOperator =
            serde_json::from_str(&text).map_err(|e| format!("malformed state {}: {e}", path.display()))?;
        let party_b = rho.layout().party_labels("B");
        if party_b.is_empty() {
            return Err("state has no factors assigned to party B".into());
        }
        let refs: Vec<&str> = party_b.iter().map(|s| s.as_str()).collect();
        let bound = collaboration_upper_bound(&rho, &refs).map_err(|e| e.to_string())?;
        let qi = is_quantum_incoherent(&rho, &refs).map_err(|e| e.to_string())?;
        report.columns(&["dim", "qi_upper_bound", "quantum_incoherent"]);
        report.push_row(vec![rho.dim().into(), bound.into(), qi.into()]);
        // the bound vanishes exactly on quantum-incoherent states
        let pass = bound >= -1e-9 && (qi == (bound < 1e-9));
        report.record(pass);
        return Ok(report);
    }

    // sweep: the pure-state rate equals the one-sided upper bound
    report.columns(&["trial", "rate", "upper_bound", "residual", "pass"]);
    let layout = SystemLayout::new(&[("A", config.d, "A"), ("B", config.d, "B")])
        .map_err(|e| e.to_string())?;
    for t in 0..config.trials as u64 {
        let psi = random_pure(&layout, mix_seed(config.seed, t, 11));
        let rate = assisted_distillation_rate(&psi, &["B"]).map_err(|e| e.to_string())?;
        let bound =
            collaboration_upper_bound(&psi.density(), &["B"]).map_err(|e| e.to_string())?;
        let residual = rate - bound;
        let pass = residual.abs() <= 1e-9;
        report.track_margin("pure_rate_equality", 1e-9 - residual.abs());
        report.record(pass);
        report.push_row(vec![
            (t as usize).into(),
            rate.into(),
            bound.into(),
            residual.into(),
            pass.into(),
        ]);
    }
    Ok(report)
}

/// Schmidt spectrum (1-t+t/k, t/k, ...) hits every entropy in [0, log2 k];
/// bisect t to a target entropy.
fn matched_resource(dim: usize, target_entropy: f64) -> PureState {
    let h = |t: f64| -> f64 {
        let mut p = vec![t / dim as f64; dim];
        p[0] += 1.0 - t;
        cohcat::linalg::shannon_entropy_bits(&p)
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < target_entropy {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    let mut p = vec![t / dim as f64; dim];
    p[0] += 1.0 - t;

    let layout = SystemLayout::new(&[("At", dim, "A"), ("Bt", dim, "B")]).expect("fresh labels");
    let mut amps = vec![0.0; dim * dim];
    for (i, &w) in p.iter().enumerate() {
        amps[i * dim + i] = w.max(0.0).sqrt();
    }
    PureState::from_real(layout, &amps).expect("unit Schmidt vector")
}

fn run_iqsm(config: &ExperimentConfig) -> cohcat::Result<ExperimentReport> {
    let mut report = ExperimentReport::new(config.command.name());
    base_params(&mut report, config);
    report.columns(&["trial", "e0", "tradeoff_rhs", "cond_entropy", "R", "margin"]);

    let layout = SystemLayout::new(&[
        ("R", config.d, "R"),
        ("A", config.d, "A"),
        ("B", config.d, "B"),
    ])?;
    for t in 0..config.trials as u64 {
        let psi = random_pure(&layout, mix_seed(config.seed, t, 21));
        let analysis = iqsm_e0(&psi, &["R"], &["A"], &["B"])?;
        // resource tuned to carry exactly e0 ebits
        let chi = matched_resource(config.d * config.d, analysis.e0.max(0.0));
        let bound = verify_merge_bound(&psi, &["R"], &["A"], &["B"], &chi)?;

        let pass = analysis.tradeoff_rhs >= -1e-9
            && bound.margin.abs() <= 1e-9
            && bound.resource_rate_residual <= 1e-9
            && bound.additivity_residual <= 1e-9
            && bound.relabel_residual <= 1e-9;
        report.track_margin("tradeoff_rhs", analysis.tradeoff_rhs);
        report.track_margin("matched_margin", 1e-9 - bound.margin.abs());
        report.record(pass);
        report.push_row(vec![
            (t as usize).into(),
            analysis.e0.into(),
            analysis.tradeoff_rhs.into(),
            analysis.conditional_entropy.into(),
            bound.resource_rate.into(),
            bound.margin.into(),
        ]);
    }
    Ok(report)
}

fn emit(report: &ExperimentReport, config: &ExperimentConfig) -> Result<(), String> {
    let body = match config.format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json(),
    };
    match &config.out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let config = match parse_args(&args) {
        Ok(c) => c,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}\n\n{USAGE}");
            return ExitCode::from(1);
        }
    };

    let report = match config.command {
        Command::CatalysisDemo => run_catalysis_demo(&config).map_err(|e| e.to_string()),
        Command::MonotonicitySweep => {
            monotonicity_harness(config.trials, config.seed).map_err(|e| e.to_string())
        }
        Command::Rates => run_rates(&config),
        Command::Assisted => run_assisted(&config),
        Command::Iqsm => run_iqsm(&config).map_err(|e| e.to_string()),
    };
    let mut report = match report {
        Ok(r) => r,
        Err(msg) => {
            eprintln!("error: {msg}\n\n{USAGE}");
            return ExitCode::from(1);
        }
    };
    if config.command == Command::MonotonicitySweep {
        // harness fills its own params; pin the resolved config alongside
        base_params(&mut report, &config);
    }

    if let Err(msg) = emit(&report, &config) {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
