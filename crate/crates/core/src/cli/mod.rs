//! The `pdit` command-line front end.
//!
//! Every command resolves its settings (config file first, then flags) into an
//! [`ExperimentSpec`], runs, and prints a report that embeds the resolved spec.
//! Exit codes: 0 on success, 2 on invalid input, 3 when a dimension budget is
//! exceeded, 1 for anything else.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::channel::{ChannelConfig, PauliDistribution, ProtocolKind};
use crate::distill::{run_with_distribution, CodeSpec};
use crate::pgm::{random_set_error, SetMode};
use crate::pstate::{
    key_security_report, maximally_entangled, twist, verify_private_state, TwistingOperator,
};
use crate::qcore::random::random_density;
use crate::qcore::{Layout, Operator};
use crate::rates::{
    key_rate, optimize_q, rate_curve, threshold_with, NoisePolicy, RateInput, THRESHOLD_TOLERANCE,
};
use crate::tolerance::PURIFICATION_DIM;
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

const DEFAULT_CURVE_TO: f64 = 0.2;
const DEFAULT_CURVE_POINTS: usize = 41;
const DEFAULT_TRIALS: usize = 50;
const DEFAULT_VERIFY_TRIALS: usize = 100;
const MAX_TRIALS: usize = 100_000;
const MAX_CURVE_POINTS: usize = 10_001;

#[derive(Debug, Parser)]
#[command(
    name = "pdit",
    version,
    about = "Private-state view of QKD with noisy preprocessing"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON or TOML file with default settings; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Coset,
    Subset,
}

#[derive(Debug, Default, Args)]
pub struct ChannelArgs {
    /// bb84, six-state or custom.
    #[arg(long)]
    pub protocol: Option<String>,
    /// Observed bit-error rate.
    #[arg(long = "Q")]
    pub qber: Option<f64>,
    #[arg(long)]
    pub p00: Option<f64>,
    #[arg(long)]
    pub p01: Option<f64>,
    #[arg(long)]
    pub p10: Option<f64>,
    #[arg(long)]
    pub p11: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Asymptotic key rate for one channel.
    Rate {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Added noise.
        #[arg(long = "q")]
        q: Option<f64>,
        /// Maximize over the added noise instead of fixing it.
        #[arg(long)]
        optimize_q: bool,
    },
    /// Bit-error rate where the key rate reaches zero.
    Threshold {
        #[arg(long)]
        protocol: Option<String>,
        /// Fix the added noise (default: optimize it at every Q).
        #[arg(long = "q")]
        q: Option<f64>,
    },
    /// Key rate over a grid of bit-error rates.
    Curve {
        #[arg(long)]
        protocol: Option<String>,
        #[arg(long = "q")]
        q: Option<f64>,
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Run the small-n distillation pipeline.
    Simulate {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long = "q")]
        q: Option<f64>,
        /// full, empty, random:K or checks:ROW,ROW,...
        #[arg(long)]
        bit_code: Option<String>,
        #[arg(long)]
        phase_code: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// PGM error on random sets of phase patterns.
    Pgm {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long = "q")]
        q: Option<f64>,
        /// Phase-flip probability of the prior.
        #[arg(long)]
        p_z: Option<f64>,
        /// Set size is 2^(n · exponent).
        #[arg(long)]
        set_exponent: Option<f64>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Random twisted states: key-security distance and untwisting certificate.
    VerifyPdit {
        #[arg(long)]
        key_qubits: Option<usize>,
        #[arg(long)]
        shield_qubits: Option<usize>,
        /// Rank of the random shield state (default: full).
        #[arg(long)]
        shield_rank: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Rate { .. } => "rate",
            Command::Threshold { .. } => "threshold",
            Command::Curve { .. } => "curve",
            Command::Simulate { .. } => "simulate",
            Command::Pgm { .. } => "pgm",
            Command::VerifyPdit { .. } => "verify-pdit",
        }
    }
}

/// All settings a command may use. Unset fields are omitted from reports.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", alias = "kind")]
    pub protocol: Option<String>,
    #[serde(rename = "Q", skip_serializing_if = "Option::is_none")]
    pub qber: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p00: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p01: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p10: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p11: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimize_q: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bit_code: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_code: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_z: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set_exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub from: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub to: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key_qubits: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shield_qubits: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shield_rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

impl ExperimentSpec {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
        let parsed = match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => toml::from_str(&text).map_err(|e| e.to_string()),
            Some("json") => serde_json::from_str(&text).map_err(|e| e.to_string()),
            _ => serde_json::from_str(&text)
                .map_err(|e| e.to_string())
                .or_else(|_| toml::from_str(&text).map_err(|e| e.to_string())),
        };
        parsed.map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
    }

    /// Fields set in `self` win over those in `base`.
    pub fn over(self, base: ExperimentSpec) -> ExperimentSpec {
        ExperimentSpec {
            command: self.command.or(base.command),
            protocol: self.protocol.or(base.protocol),
            qber: self.qber.or(base.qber),
            p00: self.p00.or(base.p00),
            p01: self.p01.or(base.p01),
            p10: self.p10.or(base.p10),
            p11: self.p11.or(base.p11),
            q: self.q.or(base.q),
            optimize_q: self.optimize_q.or(base.optimize_q),
            n: self.n.or(base.n),
            bit_code: self.bit_code.or(base.bit_code),
            phase_code: self.phase_code.or(base.phase_code),
            p_z: self.p_z.or(base.p_z),
            set_exponent: self.set_exponent.or(base.set_exponent),
            mode: self.mode.or(base.mode),
            trials: self.trials.or(base.trials),
            seed: self.seed.or(base.seed),
            from: self.from.or(base.from),
            to: self.to.or(base.to),
            points: self.points.or(base.points),
            key_qubits: self.key_qubits.or(base.key_qubits),
            shield_qubits: self.shield_qubits.or(base.shield_qubits),
            shield_rank: self.shield_rank.or(base.shield_rank),
            format: self.format.or(base.format),
        }
    }

    fn channel(&self) -> ChannelConfig {
        ChannelConfig {
            kind: self.protocol.clone(),
            qber: self.qber,
            p00: self.p00,
            p01: self.p01,
            p10: self.p10,
            p11: self.p11,
            q: self.q,
            n: self.n,
            seed: self.seed,
        }
    }

    fn kind(&self) -> Result<ProtocolKind> {
        match self.protocol.as_deref().unwrap_or("bb84") {
            "bb84" => Ok(ProtocolKind::Bb84),
            "six-state" => Ok(ProtocolKind::SixState),
            other => Err(Error::invalid(format!(
                "protocol `{other}` has no threshold or curve"
            ))),
        }
    }

    fn require_seed(&self, command: &str) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::invalid(format!("`{command}` is stochastic and needs --seed")))
    }

    fn policy(&self) -> Result<NoisePolicy> {
        match (self.q, self.optimize_q.unwrap_or(false)) {
            (Some(_), true) => Err(Error::invalid("give either --q or --optimize-q, not both")),
            (Some(q), false) => {
                if !(0.0..=0.5).contains(&q) {
                    return Err(Error::invalid(format!(
                        "added noise q = {q} outside [0, 1/2]"
                    )));
                }
                Ok(NoisePolicy::Fixed(q))
            }
            (None, _) => Ok(NoisePolicy::Optimized),
        }
    }
}

fn flags_spec(command: &Command, format: Option<Format>) -> ExperimentSpec {
    let mut spec = ExperimentSpec {
        command: Some(command.name().into()),
        format,
        ..Default::default()
    };
    let set_channel = |spec: &mut ExperimentSpec, c: &ChannelArgs| {
        spec.protocol = c.protocol.clone();
        spec.qber = c.qber;
        spec.p00 = c.p00;
        spec.p01 = c.p01;
        spec.p10 = c.p10;
        spec.p11 = c.p11;
    };
    match command {
        Command::Rate {
            channel,
            q,
            optimize_q,
        } => {
            set_channel(&mut spec, channel);
            spec.q = *q;
            spec.optimize_q = optimize_q.then_some(true);
        }
        Command::Threshold { protocol, q } => {
            spec.protocol = protocol.clone();
            spec.q = *q;
        }
        Command::Curve {
            protocol,
            q,
            from,
            to,
            points,
        } => {
            spec.protocol = protocol.clone();
            spec.q = *q;
            spec.from = *from;
            spec.to = *to;
            spec.points = *points;
        }
        Command::Simulate {
            channel,
            n,
            q,
            bit_code,
            phase_code,
            seed,
        } => {
            set_channel(&mut spec, channel);
            spec.n = *n;
            spec.q = *q;
            spec.bit_code = bit_code.clone();
            spec.phase_code = phase_code.clone();
            spec.seed = *seed;
        }
        Command::Pgm {
            n,
            q,
            p_z,
            set_exponent,
            mode,
            trials,
            seed,
        } => {
            spec.n = *n;
            spec.q = *q;
            spec.p_z = *p_z;
            spec.set_exponent = *set_exponent;
            spec.mode = mode.map(|m| match m {
                ModeArg::Coset => "coset".into(),
                ModeArg::Subset => "subset".into(),
            });
            spec.trials = *trials;
            spec.seed = *seed;
        }
        Command::VerifyPdit {
            key_qubits,
            shield_qubits,
            shield_rank,
            trials,
            seed,
        } => {
            spec.key_qubits = *key_qubits;
            spec.shield_qubits = *shield_qubits;
            spec.shield_rank = *shield_rank;
            spec.trials = *trials;
            spec.seed = *seed;
        }
    }
    spec
}

/// A finished command: the resolved spec, the result, and the rows used for CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub spec: ExperimentSpec,
    pub result: Value,
    #[serde(skip)]
    pub rows: Vec<Value>,
}

impl Report {
    fn single(spec: ExperimentSpec, result: Value) -> Self {
        Self {
            rows: vec![result.clone()],
            spec,
            result,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s =
            serde_json::to_string_pretty(self).map_err(|e| Error::Invariant(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// One CSV row per record, nested fields flattened to dotted column names
    /// and the resolved spec prefixed with `spec.`.
    pub fn to_csv(&self) -> Result<String> {
        let spec = serde_json::to_value(&self.spec).map_err(|e| Error::Invariant(e.to_string()))?;
        let mut spec_cols = Map::new();
        flatten("spec", &spec, &mut spec_cols);
        let records: Vec<Map<String, Value>> = self
            .rows
            .iter()
            .map(|r| {
                let mut cols = spec_cols.clone();
                flatten("", r, &mut cols);
                cols
            })
            .collect();
        let header: Vec<String> = records
            .first()
            .map(|r| r.keys().cloned().collect())
            .unwrap_or_default();
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Invariant(e.to_string());
        w.write_record(&header).map_err(csv_err)?;
        for r in &records {
            w.write_record(
                header
                    .iter()
                    .map(|h| r.get(h).map(cell).unwrap_or_default()),
            )
            .map_err(csv_err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Invariant(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Invariant(e.to_string()))
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Map<String, Value>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, x, out);
            }
        }
        _ => {
            out.insert(prefix.to_string(), v.clone());
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    }
}

fn to_value<T: Serialize>(t: &T) -> Result<Value> {
    serde_json::to_value(t).map_err(|e| Error::Invariant(e.to_string()))
}

fn check_trials(trials: usize) -> Result<usize> {
    if trials == 0 {
        return Err(Error::invalid("at least one trial is required"));
    }
    if trials > MAX_TRIALS {
        return Err(Error::budget("trials", trials, MAX_TRIALS));
    }
    Ok(trials)
}

pub fn cmd_rate(mut spec: ExperimentSpec) -> Result<Report> {
    let model = spec.channel().model()?;
    spec.protocol = Some(model.kind.name().into());
    spec.qber = Some(model.qber);
    let d = model.distribution()?;
    let (q_star, result) = match spec.policy()? {
        NoisePolicy::Fixed(q) => (q, key_rate(&RateInput::new(d, q)?)?),
        NoisePolicy::Optimized if spec.optimize_q.unwrap_or(false) => {
            let r = optimize_q(&d)?;
            (r.q_star, r.result)
        }
        NoisePolicy::Optimized => {
            spec.q = Some(0.0);
            (0.0, key_rate(&RateInput::new(d, 0.0)?)?)
        }
    };
    #[derive(Serialize)]
    struct Out {
        distribution: PauliDistribution,
        q: f64,
        rate: f64,
        effective_bit_error: f64,
        bit_term: f64,
        phase_term: f64,
        shield_term: f64,
    }
    let out = Out {
        distribution: d,
        q: q_star,
        rate: result.rate,
        effective_bit_error: result.effective_bit_error,
        bit_term: result.bit_term,
        phase_term: result.phase_term,
        shield_term: result.shield_term,
    };
    Ok(Report::single(spec, to_value(&out)?))
}

pub fn cmd_threshold(mut spec: ExperimentSpec) -> Result<Report> {
    let kind = spec.kind()?;
    spec.protocol = Some(kind.name().into());
    let t = threshold_with(kind, spec.policy()?, THRESHOLD_TOLERANCE)?;
    Ok(Report::single(spec, to_value(&t)?))
}

pub fn cmd_curve(mut spec: ExperimentSpec) -> Result<Report> {
    let kind = spec.kind()?;
    spec.protocol = Some(kind.name().into());
    let from = *spec.from.get_or_insert(0.0);
    let to = *spec.to.get_or_insert(DEFAULT_CURVE_TO);
    let points = *spec.points.get_or_insert(DEFAULT_CURVE_POINTS);
    if !(0.0..0.5).contains(&from) || !(0.0..0.5).contains(&to) || to < from {
        return Err(Error::invalid(format!(
            "curve range [{from}, {to}] must lie in [0, 1/2)"
        )));
    }
    if points < 2 {
        return Err(Error::invalid("a curve needs at least two points"));
    }
    if points > MAX_CURVE_POINTS {
        return Err(Error::budget("curve points", points, MAX_CURVE_POINTS));
    }
    let qbers: Vec<f64> = (0..points)
        .map(|i| from + (to - from) * i as f64 / (points - 1) as f64)
        .collect();
    let rows = rate_curve(kind, &qbers, spec.policy()?)?;
    let flat: Vec<Value> = rows
        .iter()
        .map(|r| {
            serde_json::json!({
                "Q": r.qber,
                "q": r.q,
                "rate": r.result.rate,
                "effective_bit_error": r.result.effective_bit_error,
                "bit_term": r.result.bit_term,
                "phase_term": r.result.phase_term,
                "shield_term": r.result.shield_term,
            })
        })
        .collect();
    Ok(Report {
        spec,
        result: serde_json::json!({ "rows": flat.clone() }),
        rows: flat,
    })
}

pub fn cmd_simulate(mut spec: ExperimentSpec) -> Result<Report> {
    let model = spec.channel().model()?;
    spec.protocol = Some(model.kind.name().into());
    spec.qber = Some(model.qber);
    let n = spec
        .n
        .ok_or_else(|| Error::invalid("`simulate` needs --n"))?;
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let q = *spec.q.get_or_insert(0.0);
    let bit: CodeSpec = spec.bit_code.get_or_insert_with(|| "full".into()).parse()?;
    let phase: CodeSpec = spec
        .phase_code
        .get_or_insert_with(|| "empty".into())
        .parse()?;
    spec.bit_code = Some(bit.to_string());
    spec.phase_code = Some(phase.to_string());
    let random = matches!(bit, CodeSpec::Random(_)) || matches!(phase, CodeSpec::Random(_));
    let seed = if random {
        spec.require_seed("simulate")?
    } else {
        spec.seed.unwrap_or(0)
    };
    let d = model.distribution()?;
    let report = run_with_distribution(n, &d, q, &bit, &phase, seed)?;
    Ok(Report::single(spec, to_value(&report)?))
}

pub fn cmd_pgm(mut spec: ExperimentSpec) -> Result<Report> {
    let seed = spec.require_seed("pgm")?;
    let n = spec.n.ok_or_else(|| Error::invalid("`pgm` needs --n"))?;
    let q = spec.q.ok_or_else(|| Error::invalid("`pgm` needs --q"))?;
    let exponent = spec
        .set_exponent
        .ok_or_else(|| Error::invalid("`pgm` needs --set-exponent"))?;
    let p_z = *spec.p_z.get_or_insert(0.5);
    let trials = check_trials(*spec.trials.get_or_insert(DEFAULT_TRIALS))?;
    let mode = match spec.mode.get_or_insert_with(|| "coset".into()).as_str() {
        "coset" => SetMode::Coset,
        "subset" => SetMode::Subset,
        other => return Err(Error::invalid(format!("unknown set mode `{other}`"))),
    };
    let d = PauliDistribution::new(1.0 - p_z, p_z, 0.0, 0.0)?;
    let stats = random_set_error(n, q, &d, exponent, trials, seed, mode)?;
    Ok(Report::single(spec, to_value(&stats)?))
}

#[derive(Debug, Clone, Serialize)]
struct TwistTrial {
    distance: f64,
    agreement: f64,
    /// Fidelity of the `A B` marginal with `Φ_d` before untwisting.
    raw_fidelity: f64,
    certificate_fidelity: f64,
    certificate_epsilon: f64,
}

pub fn cmd_verify_pdit(mut spec: ExperimentSpec) -> Result<Report> {
    let seed = spec.require_seed("verify-pdit")?;
    let k = *spec.key_qubits.get_or_insert(1);
    let s = *spec.shield_qubits.get_or_insert(1);
    let rank = *spec.shield_rank.get_or_insert(1 << s);
    let trials = check_trials(*spec.trials.get_or_insert(DEFAULT_VERIFY_TRIALS))?;
    if k == 0 {
        return Err(Error::invalid("the key needs at least one qubit"));
    }
    let dim = 1usize.checked_shl((2 * k + s) as u32).unwrap_or(usize::MAX);
    if 2 * k + s >= usize::BITS as usize || dim > PURIFICATION_DIM {
        return Err(Error::budget("private state A B S", dim, PURIFICATION_DIM));
    }
    if rank == 0 || rank > 1 << s {
        return Err(Error::invalid(format!(
            "shield rank {rank} outside [1, {}]",
            1 << s
        )));
    }
    let shield_layout = Layout::single("S", s);
    let phi = maximally_entangled("A", "B", k)?;
    let no_untwist = Operator::identity(Layout::single("B", k));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(trials);
    for _ in 0..trials {
        let shield = random_density(shield_layout.clone(), rank, &mut rng)?;
        let t = TwistingOperator::random(k, shield_layout.clone(), &mut rng);
        let gamma = twist(&phi, &shield, &t)?;
        let r = key_security_report(gamma.gamma(), &["A", "B"])?;
        let raw = verify_private_state(gamma.gamma(), &["A", "B"], &no_untwist)?;
        let cert =
            verify_private_state(gamma.gamma(), &["A", "B"], &t.bob_controlled_inverse("B")?)?;
        records.push(TwistTrial {
            distance: r.distance,
            agreement: r.agreement,
            raw_fidelity: raw.fidelity,
            certificate_fidelity: cert.fidelity,
            certificate_epsilon: cert.epsilon,
        });
    }
    let max_distance = records.iter().map(|r| r.distance).fold(0.0, f64::max);
    let min_certificate = records
        .iter()
        .map(|r| r.certificate_fidelity)
        .fold(1.0, f64::min);
    let mean_raw = records.iter().map(|r| r.raw_fidelity).sum::<f64>() / trials as f64;
    let result = serde_json::json!({
        "max_distance": max_distance,
        "min_certificate_fidelity": min_certificate,
        "mean_raw_fidelity": mean_raw,
        "trials": to_value(&records)?,
    });
    let rows = records.iter().map(to_value).collect::<Result<Vec<_>>>()?;
    Ok(Report { spec, result, rows })
}

/// Resolve settings and run the command.
pub fn execute(cli: &Cli) -> Result<Report> {
    let file = match &cli.config {
        Some(path) => ExperimentSpec::from_file(path)?,
        None => ExperimentSpec::default(),
    };
    let name = cli.command.name();
    if let Some(c) = &file.command {
        if c != name {
            return Err(Error::invalid(format!("config is for `{c}`, not `{name}`")));
        }
    }
    let spec = flags_spec(&cli.command, cli.format).over(file);
    match cli.command {
        Command::Rate { .. } => cmd_rate(spec),
        Command::Threshold { .. } => cmd_threshold(spec),
        Command::Curve { .. } => cmd_curve(spec),
        Command::Simulate { .. } => cmd_simulate(spec),
        Command::Pgm { .. } => cmd_pgm(spec),
        Command::VerifyPdit { .. } => cmd_verify_pdit(spec),
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Budget { .. } => EXIT_BUDGET,
        Error::Invariant(_) => EXIT_FAILURE,
        _ => EXIT_INVALID,
    }
}

/// Parse, run, print. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
        }
    };
    let rendered =
        execute(&cli).and_then(|report| match report.spec.format.unwrap_or(Format::Json) {
            Format::Json => report.to_json(),
            Format::Csv => report.to_csv(),
        });
    let text = match rendered {
        Ok(t) => t,
        Err(e) => {
            eprintln!("pdit: {e}");
            return exit_code(&e);
        }
    };
    let written = match &cli.output {
        Some(path) => fs::write(path, &text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    match written {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("pdit: {e}");
            EXIT_FAILURE
        }
    }
}
