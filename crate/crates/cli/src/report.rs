//! Report types and rendering.
//!
//! Every command produces one report value; `structured` output is
//! pretty-printed JSON (field order fixed by declaration order), `table`
//! output is CSV preceded by `# key=value` comment lines. Both renderings
//! are byte-deterministic for a given report: floats are written in
//! shortest round-trip form.

use serde::Serialize;

use spincourt::stats::TrialEstimate;

use crate::config::PartyKnowledge;

/// A success rate with its confidence interval.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Rate {
    pub successes: u64,
    pub trials: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence_level: f64,
}

impl From<TrialEstimate> for Rate {
    fn from(e: TrialEstimate) -> Self {
        Rate {
            successes: e.successes,
            trials: e.trials,
            estimate: e.estimate,
            ci_low: e.ci_low,
            ci_high: e.ci_high,
            confidence_level: e.level,
        }
    }
}

/// Echo of a preparation recipe, with the resulting mixture's Bloch vector.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PrepEcho {
    pub axis: [f64; 3],
    pub bias: f64,
    pub count: usize,
    pub seed: u64,
    pub bloch_vector: [f64; 3],
}

/// Echo of the two parties' knowledge settings.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PartiesEcho {
    pub alice: PartyKnowledge,
    pub charles: PartyKnowledge,
}

/// Echo of the protocol parameters actually used.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(untagged)]
pub enum ProtocolEcho {
    AxisDispute {
        axis_tolerance_deg: f64,
        match_threshold: f64,
        required_matches: usize,
    },
    MarginDispute {
        margin: f64,
        charles_target_accuracy: f64,
        required_matches: usize,
    },
}

/// An exactly computed counterpart to a simulated rate.
#[derive(Debug, Clone, Serialize)]
pub struct ClosedForm {
    pub quantity: &'static str,
    pub value: f64,
}

/// One measurement direction's comparison between the two preparations.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DirectionRow {
    pub index: usize,
    pub direction: [f64; 3],
    pub freq_a: f64,
    pub freq_b: f64,
    pub expected_a: f64,
    pub expected_b: f64,
    pub gap: f64,
    pub band: f64,
    pub within_band: bool,
}

/// Output of the `tomography` command.
#[derive(Debug, Serialize)]
pub struct TomographyReport {
    pub command: &'static str,
    pub scenario: String,
    pub master_seed: u64,
    pub config_digest: String,
    pub preparation_a: PrepEcho,
    pub preparation_b: PrepEcho,
    pub trace_distance: f64,
    pub max_abs_gap: f64,
    pub indistinguishable: bool,
    pub directions: Vec<DirectionRow>,
}

/// Output of the `dispute-a` / `dispute-b` commands.
#[derive(Debug, Serialize)]
pub struct DisputeReport {
    pub command: &'static str,
    pub scenario: String,
    pub master_seed: u64,
    pub config_digest: String,
    pub trials: u64,
    pub preparation: PrepEcho,
    pub parties: PartiesEcho,
    pub protocol: ProtocolEcho,
    pub alice_wins: Rate,
    pub charles_wins: Rate,
    pub closed_form: ClosedForm,
    pub sample_transcript: Vec<String>,
}

/// One grid point of a sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub closed_form: f64,
    pub successes: u64,
    pub trials: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Output of the `sweep` command.
#[derive(Debug, Serialize)]
pub struct SweepReport {
    pub command: &'static str,
    pub scenario: String,
    pub master_seed: u64,
    pub config_digest: String,
    pub parameter: &'static str,
    pub quantity: &'static str,
    pub trials_per_point: u64,
    pub confidence_level: f64,
    pub preparation: PrepEcho,
    pub parties: PartiesEcho,
    pub rows: Vec<SweepRow>,
}

/// Any command's report.
#[derive(Debug)]
pub enum Report {
    Tomography(TomographyReport),
    Dispute(DisputeReport),
    Sweep(SweepReport),
}

impl Report {
    /// Renders to the final output bytes (trailing newline included).
    pub fn render(&self, structured: bool) -> String {
        if structured {
            let json = match self {
                Report::Tomography(r) => serde_json::to_string_pretty(r),
                Report::Dispute(r) => serde_json::to_string_pretty(r),
                Report::Sweep(r) => serde_json::to_string_pretty(r),
            }
            .expect("reports contain only finite numbers and strings");
            format!("{json}\n")
        } else {
            match self {
                Report::Tomography(r) => render_tomography_table(r),
                Report::Dispute(r) => render_dispute_table(r),
                Report::Sweep(r) => render_sweep_table(r),
            }
        }
    }

    /// One-line human summary for stderr.
    pub fn summary(&self) -> String {
        match self {
            Report::Tomography(r) => {
                let within = r.directions.iter().filter(|d| d.within_band).count();
                format!(
                    "tomography {:?}: trace distance {}, {within}/{} directions within band -> {}",
                    r.scenario,
                    r.trace_distance,
                    r.directions.len(),
                    if r.indistinguishable {
                        "indistinguishable"
                    } else {
                        "distinguishable"
                    }
                )
            }
            Report::Dispute(r) => format!(
                "{} {:?}: alice won {}/{} trials, charles won {}/{} ({} = {})",
                r.command,
                r.scenario,
                r.alice_wins.successes,
                r.trials,
                r.charles_wins.successes,
                r.trials,
                r.closed_form.quantity,
                r.closed_form.value
            ),
            Report::Sweep(r) => format!(
                "sweep {:?}: {} over {} points x {} trials",
                r.scenario,
                r.parameter,
                r.rows.len(),
                r.trials_per_point
            ),
        }
    }
}

fn vec3(v: [f64; 3]) -> String {
    format!("{} {} {}", v[0], v[1], v[2])
}

fn push_prep(lines: &mut String, label: &str, p: &PrepEcho) {
    lines.push_str(&format!("# {label}_axis={}\n", vec3(p.axis)));
    lines.push_str(&format!("# {label}_bias={}\n", p.bias));
    lines.push_str(&format!("# {label}_count={}\n", p.count));
    lines.push_str(&format!("# {label}_seed={}\n", p.seed));
    lines.push_str(&format!("# {label}_bloch_vector={}\n", vec3(p.bloch_vector)));
}

fn push_common(lines: &mut String, command: &str, scenario: &str, seed: u64, digest: &str) {
    lines.push_str(&format!("# command={command}\n"));
    lines.push_str(&format!("# scenario={scenario}\n"));
    lines.push_str(&format!("# master_seed={seed}\n"));
    lines.push_str(&format!("# config_digest={digest}\n"));
}

fn push_parties(lines: &mut String, parties: &PartiesEcho) {
    lines.push_str(&format!("# alice={}\n", parties.alice));
    lines.push_str(&format!("# charles={}\n", parties.charles));
}

fn push_protocol(lines: &mut String, protocol: &ProtocolEcho) {
    match protocol {
        ProtocolEcho::AxisDispute {
            axis_tolerance_deg,
            match_threshold,
            required_matches,
        } => {
            lines.push_str(&format!("# axis_tolerance_deg={axis_tolerance_deg}\n"));
            lines.push_str(&format!("# match_threshold={match_threshold}\n"));
            lines.push_str(&format!("# required_matches={required_matches}\n"));
        }
        ProtocolEcho::MarginDispute {
            margin,
            charles_target_accuracy,
            required_matches,
        } => {
            lines.push_str(&format!("# margin={margin}\n"));
            lines.push_str(&format!(
                "# charles_target_accuracy={charles_target_accuracy}\n"
            ));
            lines.push_str(&format!("# required_matches={required_matches}\n"));
        }
    }
}

fn render_tomography_table(r: &TomographyReport) -> String {
    let mut out = String::new();
    push_common(&mut out, r.command, &r.scenario, r.master_seed, &r.config_digest);
    push_prep(&mut out, "preparation_a", &r.preparation_a);
    push_prep(&mut out, "preparation_b", &r.preparation_b);
    out.push_str(&format!("# trace_distance={}\n", r.trace_distance));
    out.push_str(&format!("# max_abs_gap={}\n", r.max_abs_gap));
    out.push_str(&format!("# indistinguishable={}\n", r.indistinguishable));
    out.push_str(
        "index,dx,dy,dz,freq_a,freq_b,expected_a,expected_b,gap,band,within_band\n",
    );
    for d in &r.directions {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            d.index,
            d.direction[0],
            d.direction[1],
            d.direction[2],
            d.freq_a,
            d.freq_b,
            d.expected_a,
            d.expected_b,
            d.gap,
            d.band,
            d.within_band
        ));
    }
    out
}

fn render_dispute_table(r: &DisputeReport) -> String {
    let mut out = String::new();
    push_common(&mut out, r.command, &r.scenario, r.master_seed, &r.config_digest);
    out.push_str(&format!("# trials={}\n", r.trials));
    push_prep(&mut out, "preparation", &r.preparation);
    push_parties(&mut out, &r.parties);
    push_protocol(&mut out, &r.protocol);
    out.push_str(&format!(
        "# closed_form_quantity={}\n",
        r.closed_form.quantity
    ));
    out.push_str(&format!("# closed_form_value={}\n", r.closed_form.value));
    out.push_str("metric,successes,trials,estimate,ci_low,ci_high,confidence_level\n");
    for (name, rate) in [("alice_wins", &r.alice_wins), ("charles_wins", &r.charles_wins)] {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            name,
            rate.successes,
            rate.trials,
            rate.estimate,
            rate.ci_low,
            rate.ci_high,
            rate.confidence_level
        ));
    }
    for line in &r.sample_transcript {
        out.push_str(&format!("# transcript\t{line}\n"));
    }
    out
}

fn render_sweep_table(r: &SweepReport) -> String {
    let mut out = String::new();
    push_common(&mut out, r.command, &r.scenario, r.master_seed, &r.config_digest);
    out.push_str(&format!("# parameter={}\n", r.parameter));
    out.push_str(&format!("# quantity={}\n", r.quantity));
    out.push_str(&format!("# trials_per_point={}\n", r.trials_per_point));
    out.push_str(&format!("# confidence_level={}\n", r.confidence_level));
    push_prep(&mut out, "preparation", &r.preparation);
    push_parties(&mut out, &r.parties);
    out.push_str("value,closed_form,successes,trials,estimate,ci_low,ci_high\n");
    for row in &r.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.value,
            row.closed_form,
            row.successes,
            row.trials,
            row.estimate,
            row.ci_low,
            row.ci_high
        ));
    }
    out
}
