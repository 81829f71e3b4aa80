//! Command implementations: each takes a validated [`Experiment`] and
//! produces a [`Report`].
//!
//! Seeding layout (all streams are ChaCha12, all derivation via
//! `child_seed`):
//!
//! * dispute commands run their trials under `child_seed(master, 0)`;
//!   trial `i` then gets `child_seed(child_seed(master, 0), i)` inside the
//!   trial runner, and the sample transcript re-runs trial 0 bit-exactly;
//! * sweep row `i` runs its trials under `child_seed(master, i)`, so a
//!   single-point sweep reproduces the matching dispute command;
//! * tomography measures direction `d` of preparation slot `p` with the
//!   stream `child_seed(child_seed(master, slot_seed_p), d)`, so the two
//!   slots coincide bit-for-bit exactly when their recipes (including
//!   seeds) coincide.

use std::f64::consts::FRAC_PI_2;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use spincourt::ensemble::{Ensemble, KnowledgeView, Notebook};
use spincourt::protocol::{
    charles_win_probability_b, charles_win_probability_b_sphere_average, run_protocol_a,
    run_protocol_b, run_protocol_b_with_direction, soundness_protocol_a, ProtocolAParams,
    ProtocolBParams, Transcript, Verdict, Winner,
};
use spincourt::quantum::{outcome_distribution, trace_distance, Axis, Direction, Sign};
use spincourt::stats::{
    binomial_tail, child_seed, confidence_interval, direction_at_polar_angle, run_trials,
};

use crate::config::{CommandKind, Experiment, PartyKnowledge, PrepCfg, SweepParameter};
use crate::report::{
    ClosedForm, DirectionRow, DisputeReport, PartiesEcho, PrepEcho, ProtocolEcho, Rate, Report,
    SweepReport, SweepRow, TomographyReport,
};

const ALICE_WIN_PROBABILITY: &str = "alice_win_probability";
const CHARLES_WIN_PROBABILITY: &str = "charles_win_probability";

/// Runs the experiment's command.
pub fn execute(experiment: &Experiment) -> Report {
    match experiment.command {
        CommandKind::Tomography => Report::Tomography(tomography(experiment)),
        CommandKind::DisputeA | CommandKind::DisputeB => Report::Dispute(dispute(experiment)),
        CommandKind::Sweep => Report::Sweep(sweep(experiment)),
    }
}

fn prep_echo(p: &PrepCfg) -> PrepEcho {
    PrepEcho {
        axis: p.axis.representative().components(),
        bias: p.bias,
        count: p.count,
        seed: p.seed,
        bloch_vector: p.spec().density().bloch_vector(),
    }
}

fn parties_echo(experiment: &Experiment) -> PartiesEcho {
    PartiesEcho { alice: experiment.alice, charles: experiment.charles }
}

fn view_for(kind: PartyKnowledge, notebook: &Notebook, axis: Axis) -> KnowledgeView {
    match kind {
        PartyKnowledge::Full => KnowledgeView::Full(notebook.clone()),
        PartyKnowledge::BasisOnly => KnowledgeView::BasisOnly(axis),
        PartyKnowledge::None => KnowledgeView::NoKnowledge,
    }
}

// ---------------------------------------------------------------------------
// Tomography
// ---------------------------------------------------------------------------

/// The 26 measurement directions: every nonzero vector with components in
/// `{-1, 0, 1}`, normalized, in lexicographic component order.
pub fn direction_grid() -> Vec<Direction> {
    let mut grid = Vec::with_capacity(26);
    for i in -1..=1i32 {
        for j in -1..=1i32 {
            for k in -1..=1i32 {
                if i == 0 && j == 0 && k == 0 {
                    continue;
                }
                grid.push(
                    Direction::normalized(f64::from(i), f64::from(j), f64::from(k))
                        .expect("grid vectors are nonzero"),
                );
            }
        }
    }
    grid
}

fn plus_counts(prep: &PrepCfg, master_seed: u64, grid: &[Direction]) -> Vec<u64> {
    let spec = prep.spec();
    let slot_master = child_seed(master_seed, prep.seed);
    grid.iter()
        .enumerate()
        .map(|(index, &direction)| {
            let mut rng = ChaCha12Rng::seed_from_u64(child_seed(slot_master, index as u64));
            let (mut ensemble, _) = Ensemble::prepare(&spec, &mut rng);
            let outcomes = ensemble
                .measure_all(direction, &mut rng)
                .expect("freshly prepared ensemble has no measured particles");
            outcomes.iter().filter(|&&s| s == Sign::Plus).count() as u64
        })
        .collect()
}

fn tomography(experiment: &Experiment) -> TomographyReport {
    let prep_a = experiment.prep_a;
    let prep_b = experiment.prep_b.expect("tomography config carries a second preparation");
    let grid = direction_grid();
    let counts_a = plus_counts(&prep_a, experiment.master_seed, &grid);
    let counts_b = plus_counts(&prep_b, experiment.master_seed, &grid);
    let density_a = prep_a.spec().density();
    let density_b = prep_b.spec().density();
    let (n_a, n_b) = (prep_a.count as f64, prep_b.count as f64);

    let mut rows = Vec::with_capacity(grid.len());
    let mut max_abs_gap: f64 = 0.0;
    let mut all_within = true;
    for (index, &direction) in grid.iter().enumerate() {
        let freq_a = counts_a[index] as f64 / n_a;
        let freq_b = counts_b[index] as f64 / n_b;
        let gap = (freq_a - freq_b).abs();
        // Two-sample binomial comparison: pooled rate, three standard
        // errors of the difference.
        let pooled = (counts_a[index] + counts_b[index]) as f64 / (n_a + n_b);
        let band = 3.0 * (pooled * (1.0 - pooled) * (1.0 / n_a + 1.0 / n_b)).sqrt();
        let within_band = gap <= band;
        all_within &= within_band;
        max_abs_gap = max_abs_gap.max(gap);
        rows.push(DirectionRow {
            index,
            direction: direction.components(),
            freq_a,
            freq_b,
            expected_a: outcome_distribution(density_a, direction),
            expected_b: outcome_distribution(density_b, direction),
            gap,
            band,
            within_band,
        });
    }

    TomographyReport {
        command: CommandKind::Tomography.as_str(),
        scenario: experiment.scenario.clone(),
        master_seed: experiment.master_seed,
        config_digest: experiment.config_digest.clone(),
        preparation_a: prep_echo(&prep_a),
        preparation_b: prep_echo(&prep_b),
        trace_distance: trace_distance(density_a, density_b),
        max_abs_gap,
        indistinguishable: all_within,
        directions: rows,
    }
}

// ---------------------------------------------------------------------------
// Disputes and sweeps share one trial plan
// ---------------------------------------------------------------------------

/// Everything one simulated courtroom round needs.
#[derive(Debug, Clone, Copy)]
enum TrialPlan {
    /// Axis dispute: Alice commits an axis, Charles demonstrates.
    Axis { prep: PrepCfg, params: ProtocolAParams },
    /// Margin dispute: Alice picks the direction from her knowledge.
    Margin { prep: PrepCfg, params: ProtocolBParams },
    /// Margin dispute at a pinned polar angle from the preparation axis.
    MarginAtAngle { prep: PrepCfg, params: ProtocolBParams, theta: f64 },
}

impl TrialPlan {
    /// Who the estimated success rate belongs to.
    fn quantity(&self) -> &'static str {
        match self {
            TrialPlan::Axis { .. } => ALICE_WIN_PROBABILITY,
            _ => CHARLES_WIN_PROBABILITY,
        }
    }

    fn succeeded(&self, verdict: &Verdict) -> bool {
        match self {
            TrialPlan::Axis { .. } => verdict.winner == Winner::Alice,
            _ => verdict.winner == Winner::Charles,
        }
    }

    /// Runs one full round: prepare, argue, measure, rule.
    fn run(
        &self,
        alice: PartyKnowledge,
        charles: PartyKnowledge,
        rng: &mut ChaCha12Rng,
    ) -> (Verdict, Transcript) {
        match self {
            TrialPlan::Axis { prep, params } => {
                let (ensemble, notebook) = Ensemble::prepare(&prep.spec(), rng);
                let alice_view = view_for(alice, &notebook, prep.axis);
                let charles_view = view_for(charles, &notebook, prep.axis);
                run_protocol_a(&alice_view, &charles_view, ensemble, params, rng)
                    .expect("ensemble size matches validated params")
            }
            TrialPlan::Margin { prep, params } => {
                let (ensemble, notebook) = Ensemble::prepare(&prep.spec(), rng);
                let alice_view = view_for(alice, &notebook, prep.axis);
                let charles_view = view_for(charles, &notebook, prep.axis);
                run_protocol_b(&alice_view, &charles_view, ensemble, params, rng)
                    .expect("ensemble size matches validated params")
            }
            TrialPlan::MarginAtAngle { prep, params, theta } => {
                let (ensemble, notebook) = Ensemble::prepare(&prep.spec(), rng);
                let charles_view = view_for(charles, &notebook, prep.axis);
                let direction = direction_at_polar_angle(prep.axis, *theta, rng);
                run_protocol_b_with_direction(direction, &charles_view, ensemble, params, rng)
                    .expect("ensemble size matches validated params")
            }
        }
    }

    /// Exact win probability for [`Self::quantity`], using the parties'
    /// knowledge settings.
    fn closed_form(&self, alice: PartyKnowledge, charles: PartyKnowledge) -> f64 {
        match self {
            TrialPlan::Axis { params, .. } => {
                // Validation and the axis-angle check are independent:
                // predictions from a party without the notebook are fair
                // coins, so the match count is Binomial(n, 1/2) whatever
                // axes were declared.
                let validated = if charles == PartyKnowledge::Full {
                    1.0
                } else {
                    binomial_tail(
                        params.count() as u64,
                        params.required_matches() as u64,
                        0.5,
                    )
                    .expect("probability in range")
                };
                let within_tolerance =
                    if alice == PartyKnowledge::None || charles == PartyKnowledge::None {
                        soundness_protocol_a(params.axis_tolerance())
                    } else {
                        1.0
                    };
                validated * within_tolerance
            }
            TrialPlan::Margin { params, .. } => {
                if charles != PartyKnowledge::Full {
                    coin_tail(params)
                } else if alice == PartyKnowledge::None {
                    charles_win_probability_b_sphere_average(params)
                } else {
                    // A knowing Alice measures perpendicular to the axis.
                    charles_win_probability_b(params, FRAC_PI_2)
                }
            }
            TrialPlan::MarginAtAngle { params, theta, .. } => {
                if charles == PartyKnowledge::Full {
                    charles_win_probability_b(params, *theta)
                } else {
                    coin_tail(params)
                }
            }
        }
    }
}

/// Charles's win probability when his predictions are fair coins.
fn coin_tail(params: &ProtocolBParams) -> f64 {
    binomial_tail(params.count() as u64, params.required_matches() as u64, 0.5)
        .expect("probability in range")
}

fn base_plan(experiment: &Experiment) -> TrialPlan {
    match experiment.command {
        CommandKind::DisputeA => TrialPlan::Axis {
            prep: experiment.prep_a,
            params: experiment
                .protocol_a
                .expect("dispute-a config carries protocol parameters")
                .params(experiment.prep_a.count),
        },
        CommandKind::DisputeB => TrialPlan::Margin {
            prep: experiment.prep_a,
            params: experiment
                .protocol_b
                .expect("dispute-b config carries protocol parameters")
                .params(experiment.prep_a.count),
        },
        other => unreachable!("no base trial plan for {}", other.as_str()),
    }
}

fn protocol_echo(plan: &TrialPlan, experiment: &Experiment) -> ProtocolEcho {
    match plan {
        TrialPlan::Axis { params, .. } => ProtocolEcho::AxisDispute {
            axis_tolerance_deg: experiment
                .protocol_a
                .expect("axis plan comes from an axis config")
                .axis_tolerance_deg,
            match_threshold: params.match_threshold(),
            required_matches: params.required_matches(),
        },
        TrialPlan::Margin { params, .. } | TrialPlan::MarginAtAngle { params, .. } => {
            ProtocolEcho::MarginDispute {
                margin: params.margin(),
                charles_target_accuracy: params.charles_target_accuracy(),
                required_matches: params.required_matches(),
            }
        }
    }
}

fn dispute(experiment: &Experiment) -> DisputeReport {
    let plan = base_plan(experiment);
    let run_master = child_seed(experiment.master_seed, 0);
    let estimate = run_trials(experiment.trials, run_master, experiment.confidence_level, |rng| {
        let (verdict, _) = plan.run(experiment.alice, experiment.charles, rng);
        plan.succeeded(&verdict)
    })
    .expect("trials >= 1 validated");

    // The trial runner counted one side's wins; the other side's rate is
    // its complement over the same trials.
    let complement = experiment.trials - estimate.successes;
    let (lo, hi) = confidence_interval(complement, experiment.trials, experiment.confidence_level)
        .expect("level validated");
    let complement_rate = Rate {
        successes: complement,
        trials: experiment.trials,
        estimate: complement as f64 / experiment.trials as f64,
        ci_low: lo,
        ci_high: hi,
        confidence_level: experiment.confidence_level,
    };
    let counted_rate = Rate::from(estimate);
    let (alice_wins, charles_wins) = match plan {
        TrialPlan::Axis { .. } => (counted_rate, complement_rate),
        _ => (complement_rate, counted_rate),
    };

    // Bit-exact replay of trial 0 for the transcript.
    let mut replay_rng = ChaCha12Rng::seed_from_u64(child_seed(run_master, 0));
    let (_, transcript) = plan.run(experiment.alice, experiment.charles, &mut replay_rng);
    let sample_transcript = transcript.to_log().lines().map(str::to_owned).collect();

    DisputeReport {
        command: experiment.command.as_str(),
        scenario: experiment.scenario.clone(),
        master_seed: experiment.master_seed,
        config_digest: experiment.config_digest.clone(),
        trials: experiment.trials,
        preparation: prep_echo(&experiment.prep_a),
        parties: parties_echo(experiment),
        protocol: protocol_echo(&plan, experiment),
        alice_wins,
        charles_wins,
        closed_form: ClosedForm {
            quantity: plan.quantity(),
            value: plan.closed_form(experiment.alice, experiment.charles),
        },
        sample_transcript,
    }
}

// ---------------------------------------------------------------------------
// Sweep
// ---------------------------------------------------------------------------

fn plan_for_value(experiment: &Experiment, parameter: SweepParameter, value: f64) -> TrialPlan {
    let prep = experiment.prep_a;
    match parameter {
        SweepParameter::AxisToleranceDeg => {
            let base = experiment.protocol_a.expect("validated for this sweep");
            TrialPlan::Axis {
                prep,
                params: ProtocolAParams::with_threshold(
                    prep.count,
                    value.to_radians(),
                    base.match_threshold,
                )
                .expect("validated at load"),
            }
        }
        SweepParameter::Count => {
            let base = experiment.protocol_b.expect("validated for this sweep");
            let count = value as usize;
            TrialPlan::Margin {
                prep: PrepCfg { count, ..prep },
                params: base.params(count),
            }
        }
        SweepParameter::Margin => {
            let base = experiment.protocol_b.expect("validated for this sweep");
            TrialPlan::Margin {
                prep,
                params: ProtocolBParams::new(prep.count, value, base.charles_target_accuracy)
                    .expect("validated at load"),
            }
        }
        SweepParameter::TargetAccuracy => {
            let base = experiment.protocol_b.expect("validated for this sweep");
            TrialPlan::Margin {
                prep,
                params: ProtocolBParams::new(prep.count, base.margin, value)
                    .expect("validated at load"),
            }
        }
        SweepParameter::ThetaDeg => {
            let base = experiment.protocol_b.expect("validated for this sweep");
            TrialPlan::MarginAtAngle {
                prep,
                params: base.params(prep.count),
                theta: value.to_radians(),
            }
        }
    }
}

fn sweep(experiment: &Experiment) -> SweepReport {
    let sweep_cfg = experiment.sweep.as_ref().expect("sweep config carries a grid");
    let mut rows = Vec::with_capacity(sweep_cfg.values.len());
    let mut quantity = CHARLES_WIN_PROBABILITY;
    for (row_index, &value) in sweep_cfg.values.iter().enumerate() {
        let plan = plan_for_value(experiment, sweep_cfg.parameter, value);
        quantity = plan.quantity();
        let row_master = child_seed(experiment.master_seed, row_index as u64);
        let estimate = run_trials(
            experiment.trials,
            row_master,
            experiment.confidence_level,
            |rng| {
                let (verdict, _) = plan.run(experiment.alice, experiment.charles, rng);
                plan.succeeded(&verdict)
            },
        )
        .expect("trials >= 1 validated");
        rows.push(SweepRow {
            value,
            closed_form: plan.closed_form(experiment.alice, experiment.charles),
            successes: estimate.successes,
            trials: estimate.trials,
            estimate: estimate.estimate,
            ci_low: estimate.ci_low,
            ci_high: estimate.ci_high,
        });
    }

    SweepReport {
        command: CommandKind::Sweep.as_str(),
        scenario: experiment.scenario.clone(),
        master_seed: experiment.master_seed,
        config_digest: experiment.config_digest.clone(),
        parameter: sweep_cfg.parameter.as_str(),
        quantity,
        trials_per_point: experiment.trials,
        confidence_level: experiment.confidence_level,
        preparation: prep_echo(&experiment.prep_a),
        parties: parties_echo(experiment),
        rows,
    }
}
