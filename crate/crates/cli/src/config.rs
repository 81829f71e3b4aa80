//! Experiment configuration: a TOML file plus command-line overrides,
//! validated into a typed [`Experiment`] and hashed into a digest that the
//! reports embed.
//!
//! Validation happens entirely up front so that a bad file fails fast with
//! a field-level diagnostic (and the config exit code), while execution can
//! assume every parameter is in range.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use spincourt::ensemble::PreparationSpec;
use spincourt::protocol::{ProtocolAParams, ProtocolBParams};
use spincourt::quantum::{Axis, Direction};
use spincourt::stats::child_seed;

/// Environment variable naming the default output directory, used when no
/// `--out` flag or `out =` key is given.
pub const OUT_DIR_ENV: &str = "SPINCOURT_OUT_DIR";

fn default_trials() -> u64 {
    1000
}

fn default_level() -> f64 {
    0.95
}

fn default_bias() -> f64 {
    0.5
}

fn default_threshold() -> f64 {
    1.0
}

fn default_target() -> f64 {
    1.0
}

/// Which subcommand is being configured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Tomography,
    DisputeA,
    DisputeB,
    Sweep,
}

impl CommandKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandKind::Tomography => "tomography",
            CommandKind::DisputeA => "dispute-a",
            CommandKind::DisputeB => "dispute-b",
            CommandKind::Sweep => "sweep",
        }
    }
}

/// Report rendering: `table` is CSV with `#` comment headers, `structured`
/// is pretty-printed JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Table,
    Structured,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Table => "csv",
            OutputFormat::Structured => "json",
        }
    }
}

/// How much a party knows about the preparation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartyKnowledge {
    Full,
    BasisOnly,
    None,
}

impl fmt::Display for PartyKnowledge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PartyKnowledge::Full => "full",
            PartyKnowledge::BasisOnly => "basis-only",
            PartyKnowledge::None => "none",
        })
    }
}

/// Which knob a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParameter {
    /// Ensemble size (margin dispute).
    Count,
    /// Margin over one half (margin dispute).
    Margin,
    /// Axis tolerance in degrees (axis dispute).
    AxisToleranceDeg,
    /// Judge direction's polar angle from the preparation axis, degrees
    /// (margin dispute with a pinned direction).
    ThetaDeg,
    /// Charles's disguise target accuracy (margin dispute).
    TargetAccuracy,
}

impl SweepParameter {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParameter::Count => "count",
            SweepParameter::Margin => "margin",
            SweepParameter::AxisToleranceDeg => "axis-tolerance-deg",
            SweepParameter::ThetaDeg => "theta-deg",
            SweepParameter::TargetAccuracy => "target-accuracy",
        }
    }

    /// Whether the swept protocol is the axis dispute (otherwise the
    /// margin dispute).
    pub fn uses_protocol_a(self) -> bool {
        matches!(self, SweepParameter::AxisToleranceDeg)
    }
}

/// An axis given either as a letter (`"x"`, `"y"`, `"z"`) or as an
/// arbitrary nonzero 3-vector (normalized on load).
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum AxisField {
    Named(String),
    Vector([f64; 3]),
}

impl AxisField {
    fn resolve(&self, field: &str) -> Result<Axis> {
        match self {
            AxisField::Named(name) => match name.as_str() {
                "x" => Ok(Axis::X),
                "y" => Ok(Axis::Y),
                "z" => Ok(Axis::Z),
                other => bail!(
                    "{field}.axis: unknown axis name {other:?} (use \"x\", \"y\", \"z\", or a 3-vector)"
                ),
            },
            AxisField::Vector(v) => {
                let direction = Direction::normalized(v[0], v[1], v[2])
                    .map_err(|e| anyhow::anyhow!("{field}.axis: {e}"))?;
                Ok(Axis::new(direction))
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPreparation {
    axis: AxisField,
    #[serde(default = "default_bias")]
    bias: f64,
    count: usize,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParties {
    alice: Option<PartyKnowledge>,
    charles: Option<PartyKnowledge>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProtocolA {
    axis_tolerance_deg: f64,
    #[serde(default = "default_threshold")]
    match_threshold: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProtocolB {
    margin: f64,
    #[serde(default = "default_target")]
    charles_target_accuracy: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    parameter: SweepParameter,
    values: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: String,
    #[serde(default = "default_trials")]
    trials: u64,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_level")]
    confidence_level: f64,
    format: Option<OutputFormat>,
    out: Option<PathBuf>,
    preparation: RawPreparation,
    preparation_b: Option<RawPreparation>,
    parties: Option<RawParties>,
    protocol_a: Option<RawProtocolA>,
    protocol_b: Option<RawProtocolB>,
    sweep: Option<RawSweep>,
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

/// A validated preparation recipe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrepCfg {
    pub axis: Axis,
    pub bias: f64,
    pub count: usize,
    pub seed: u64,
}

impl PrepCfg {
    /// Core preparation spec for this recipe.
    pub fn spec(&self) -> PreparationSpec {
        PreparationSpec::new(self.axis, self.bias, self.count, self.seed)
            .expect("validated at load")
    }
}

/// Validated axis-dispute parameters (degrees kept for echo).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtoACfg {
    pub axis_tolerance_deg: f64,
    pub match_threshold: f64,
}

impl ProtoACfg {
    pub fn params(&self, count: usize) -> ProtocolAParams {
        ProtocolAParams::with_threshold(
            count,
            self.axis_tolerance_deg.to_radians(),
            self.match_threshold,
        )
        .expect("validated at load")
    }
}

/// Validated margin-dispute parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtoBCfg {
    pub margin: f64,
    pub charles_target_accuracy: f64,
}

impl ProtoBCfg {
    pub fn params(&self, count: usize) -> ProtocolBParams {
        ProtocolBParams::new(count, self.margin, self.charles_target_accuracy)
            .expect("validated at load")
    }
}

/// Validated sweep grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCfg {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

/// A fully validated experiment, ready to execute.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub command: CommandKind,
    pub scenario: String,
    pub trials: u64,
    pub master_seed: u64,
    pub confidence_level: f64,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub prep_a: PrepCfg,
    pub prep_b: Option<PrepCfg>,
    pub alice: PartyKnowledge,
    pub charles: PartyKnowledge,
    pub protocol_a: Option<ProtoACfg>,
    pub protocol_b: Option<ProtoBCfg>,
    pub sweep: Option<SweepCfg>,
    /// SHA-256 (hex) of the effective post-override configuration; output
    /// path and format are excluded because they do not affect results.
    pub config_digest: String,
}

#[derive(Serialize)]
struct PrepEffective {
    axis: [f64; 3],
    bias: f64,
    count: usize,
    seed: u64,
}

impl From<&PrepCfg> for PrepEffective {
    fn from(p: &PrepCfg) -> Self {
        PrepEffective {
            axis: p.axis.representative().components(),
            bias: p.bias,
            count: p.count,
            seed: p.seed,
        }
    }
}

#[derive(Serialize)]
struct SweepEffective<'a> {
    parameter: &'static str,
    values: &'a [f64],
}

/// Canonical serialization of everything that determines results.
#[derive(Serialize)]
struct EffectiveConfig<'a> {
    command: &'static str,
    scenario: &'a str,
    trials: u64,
    seed: u64,
    confidence_level: f64,
    preparation: PrepEffective,
    #[serde(skip_serializing_if = "Option::is_none")]
    preparation_b: Option<PrepEffective>,
    alice: PartyKnowledge,
    charles: PartyKnowledge,
    #[serde(skip_serializing_if = "Option::is_none")]
    protocol_a: Option<ProtoACfg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    protocol_b: Option<ProtoBCfg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<SweepEffective<'a>>,
}

fn validate_prep(
    raw: &RawPreparation,
    field: &str,
    master_seed: u64,
    slot: u64,
) -> Result<PrepCfg> {
    let axis = raw.axis.resolve(field)?;
    let seed = raw.seed.unwrap_or_else(|| child_seed(master_seed, slot));
    PreparationSpec::new(axis, raw.bias, raw.count, seed)
        .map_err(|e| anyhow::anyhow!("{field}: {e}"))?;
    Ok(PrepCfg { axis, bias: raw.bias, count: raw.count, seed })
}

fn validate_protocol_a(raw: &RawProtocolA, count: usize) -> Result<ProtoACfg> {
    ProtocolAParams::with_threshold(
        count,
        raw.axis_tolerance_deg.to_radians(),
        raw.match_threshold,
    )
    .map_err(|e| anyhow::anyhow!("[protocol_a]: {e}"))?;
    Ok(ProtoACfg {
        axis_tolerance_deg: raw.axis_tolerance_deg,
        match_threshold: raw.match_threshold,
    })
}

fn validate_protocol_b(raw: &RawProtocolB, count: usize) -> Result<ProtoBCfg> {
    ProtocolBParams::new(count, raw.margin, raw.charles_target_accuracy)
        .map_err(|e| anyhow::anyhow!("[protocol_b]: {e}"))?;
    Ok(ProtoBCfg {
        margin: raw.margin,
        charles_target_accuracy: raw.charles_target_accuracy,
    })
}

fn validate_sweep(raw: &RawSweep, prep: &PrepCfg, a: Option<&ProtoACfg>, b: Option<&ProtoBCfg>) -> Result<SweepCfg> {
    if raw.values.is_empty() {
        bail!("[sweep].values: at least one grid point is required");
    }
    for (i, &v) in raw.values.iter().enumerate() {
        let at = format!("[sweep].values[{i}]");
        if !v.is_finite() {
            bail!("{at}: value must be finite, got {v}");
        }
        match raw.parameter {
            SweepParameter::Count => {
                if v < 1.0 || v.fract() != 0.0 || v > 1e9 {
                    bail!("{at}: count must be a positive integer, got {v}");
                }
                let b = b.expect("checked by caller");
                ProtocolBParams::new(v as usize, b.margin, b.charles_target_accuracy)
                    .map_err(|e| anyhow::anyhow!("{at}: {e}"))?;
            }
            SweepParameter::Margin => {
                let b = b.expect("checked by caller");
                ProtocolBParams::new(prep.count, v, b.charles_target_accuracy)
                    .map_err(|e| anyhow::anyhow!("{at}: {e}"))?;
            }
            SweepParameter::AxisToleranceDeg => {
                let a = a.expect("checked by caller");
                ProtocolAParams::with_threshold(
                    prep.count,
                    v.to_radians(),
                    a.match_threshold,
                )
                .map_err(|e| anyhow::anyhow!("{at}: {e}"))?;
            }
            SweepParameter::ThetaDeg => {
                if !(0.0..=180.0).contains(&v) {
                    bail!("{at}: polar angle must lie in [0, 180] degrees, got {v}");
                }
            }
            SweepParameter::TargetAccuracy => {
                let b = b.expect("checked by caller");
                ProtocolBParams::new(prep.count, b.margin, v)
                    .map_err(|e| anyhow::anyhow!("{at}: {e}"))?;
            }
        }
    }
    Ok(SweepCfg { parameter: raw.parameter, values: raw.values.clone() })
}

/// Loads, overrides, and validates a configuration file for `command`.
pub fn load(path: &Path, command: CommandKind, overrides: &Overrides) -> Result<Experiment> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let raw: RawConfig = toml::from_str(&text)
        .with_context(|| format!("cannot parse config file {}", path.display()))?;

    let master_seed = overrides.seed.unwrap_or(raw.seed);
    let trials = overrides.trials.unwrap_or(raw.trials);
    let format = overrides
        .format
        .or(raw.format)
        .unwrap_or(OutputFormat::Structured);
    let out = overrides.out.clone().or(raw.out);

    if trials == 0 && command != CommandKind::Tomography {
        bail!("trials: at least one trial is required");
    }
    if !(raw.confidence_level > 0.0 && raw.confidence_level < 1.0) {
        bail!(
            "confidence_level: {} outside (0, 1)",
            raw.confidence_level
        );
    }
    if raw.scenario.trim().is_empty() {
        bail!("scenario: must not be empty");
    }

    let prep_a = validate_prep(&raw.preparation, "[preparation]", master_seed, 0)?;
    let parties = raw.parties.as_ref();
    let alice = parties
        .and_then(|p| p.alice)
        .unwrap_or(PartyKnowledge::BasisOnly);
    let charles = parties
        .and_then(|p| p.charles)
        .unwrap_or(PartyKnowledge::Full);

    // Keep only the sections the command uses: the digest then pins exactly
    // the knobs that determine this command's results.
    let mut prep_b = None;
    let mut protocol_a = None;
    let mut protocol_b = None;
    let mut sweep = None;
    match command {
        CommandKind::Tomography => {
            let raw_b = raw.preparation_b.as_ref().with_context(|| {
                "tomography needs a [preparation_b] section to compare against"
            })?;
            prep_b = Some(validate_prep(raw_b, "[preparation_b]", master_seed, 1)?);
        }
        CommandKind::DisputeA => {
            let raw_a = raw
                .protocol_a
                .as_ref()
                .with_context(|| "dispute-a needs a [protocol_a] section")?;
            protocol_a = Some(validate_protocol_a(raw_a, prep_a.count)?);
        }
        CommandKind::DisputeB => {
            let raw_b = raw
                .protocol_b
                .as_ref()
                .with_context(|| "dispute-b needs a [protocol_b] section")?;
            protocol_b = Some(validate_protocol_b(raw_b, prep_a.count)?);
        }
        CommandKind::Sweep => {
            let raw_sweep = raw
                .sweep
                .as_ref()
                .with_context(|| "sweep needs a [sweep] section")?;
            if raw_sweep.parameter.uses_protocol_a() {
                let raw_a = raw.protocol_a.as_ref().with_context(|| {
                    "sweeping axis-tolerance-deg needs a [protocol_a] section"
                })?;
                protocol_a = Some(validate_protocol_a(raw_a, prep_a.count)?);
            } else {
                let raw_b = raw.protocol_b.as_ref().with_context(|| {
                    format!(
                        "sweeping {} needs a [protocol_b] section",
                        raw_sweep.parameter.as_str()
                    )
                })?;
                protocol_b = Some(validate_protocol_b(raw_b, prep_a.count)?);
            }
            sweep = Some(validate_sweep(
                raw_sweep,
                &prep_a,
                protocol_a.as_ref(),
                protocol_b.as_ref(),
            )?);
        }
    }

    let effective = EffectiveConfig {
        command: command.as_str(),
        scenario: &raw.scenario,
        trials,
        seed: master_seed,
        confidence_level: raw.confidence_level,
        preparation: (&prep_a).into(),
        preparation_b: prep_b.as_ref().map(Into::into),
        alice,
        charles,
        protocol_a,
        protocol_b,
        sweep: sweep.as_ref().map(|s| SweepEffective {
            parameter: s.parameter.as_str(),
            values: &s.values,
        }),
    };
    let canonical =
        serde_json::to_string(&effective).context("cannot serialize effective config")?;
    let config_digest = format!("{:x}", Sha256::digest(canonical.as_bytes()));

    Ok(Experiment {
        command,
        scenario: raw.scenario,
        trials,
        master_seed,
        confidence_level: raw.confidence_level,
        format,
        out,
        prep_a,
        prep_b,
        alice,
        charles,
        protocol_a,
        protocol_b,
        sweep,
        config_digest,
    })
}

/// Resolves where the report goes: explicit path, else
/// `$SPINCOURT_OUT_DIR/<scenario>.<ext>`, else stdout (`None`).
pub fn resolve_out_path(experiment: &Experiment) -> Option<PathBuf> {
    if let Some(path) = &experiment.out {
        return Some(path.clone());
    }
    match std::env::var(OUT_DIR_ENV) {
        Ok(dir) if !dir.is_empty() => {
            let stem: String = experiment
                .scenario
                .chars()
                .map(|c| {
                    if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                        c
                    } else {
                        '-'
                    }
                })
                .collect();
            Some(
                Path::new(&dir)
                    .join(format!("{stem}.{}", experiment.format.extension())),
            )
        }
        _ => None,
    }
}
