//! Rank-distribution BER and FER estimators, throughput, weight
//! calibration and the experiment runner.

mod calibrate;
mod estimators;
mod experiment;
mod pipeline;

pub use calibrate::{calibrate_jferro, calibrate_w2, JferroCalibration, SweepPoint, W2Calibration, W2Table, DEFAULT_JFERRO_GRID};
pub use estimators::{
    ber, expected_bit_errors, fer, fpga_throughput, frame_error_free_prob, pr_rmin, rank_probabilities,
    rank_solutions, throughput, zero_error_mass, FerEstimate, InstanceDistribution, RankEntry, DEFAULT_FRAME_CAP,
};
pub use experiment::{
    calibrate_experiment, calibrate_jferro_experiment, run_experiment, AnnealSettings, BerRow, BpRow, ChannelSpec, CodeSource, ExperimentConfig, ExperimentResults,
    FerRow, InstanceRecord, Manifest, SnrInstances, W2Choice,
};
pub use pipeline::{distance_costs, ml_decode, safe_w2_bound, Backend, MlDecision, QbpDecoder, QbpOutcome, MAX_ML_DIMENSION};
