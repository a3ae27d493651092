//! The two-source non-malleable extractor: advice, alternating-extraction
//! flip-flops, the correlation breaker and the final extraction.

mod params;
mod pipeline;

pub use params::{
    derive_asymptotic, derive_params, n3_from_n1, Deltas, Mode, ParamProfile, Role, RoleConstructions, ToyParams,
};
pub use pipeline::{
    adv_cb, adv_cb_rounds, flip_flop, flip_flop_record, nmext2, nmext2_t, trace, BlockMap, Interval, NmExt,
    RoundRecord, Transcript,
};
