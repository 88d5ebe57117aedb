//! Closed-loop simulation harness.

pub mod config;
pub mod run;
pub mod scenario;
pub mod sweep;
pub mod trace;

pub use config::{load_config, parse_config, MapSource, PlannerKind, SimConfig};
pub use run::{
    default_obs_rate_threshold, initial_belief, min_distance_to, replay_filter, run_eer_sim,
    run_eer_sim_with_phases, run_observability_sim, run_sim, run_sim_on, straight_action,
    time_averaged_trace, EerRun, EntropyPhases,
};
pub use scenario::{Builtin, MapSpec, SourceSpec};
pub use sweep::{run_metric, sweep_ratios, SweepCell, SweepMetric, SweepRow, SweepSummary};
pub use trace::{
    read_trace, read_trace_from, trace_to_string, write_trace, write_trace_to, SimTraceRecord,
    TRACE_HEADER,
};
