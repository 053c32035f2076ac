//! The universal block transmission scheme.
//!
//! Transmission is divided into blocks. Inside each block, randomly placed
//! *training* positions carry a known fill symbol so the receiver can
//! coarsely estimate the noise distribution, *update* positions carry a
//! repetition-coded side-information payload (noise counts of the previously
//! accepted block, the current message-interval index, and one ambiguity
//! bit), and the remaining *regular* positions run Horstein iterations with
//! the receiver's committed KT estimates. A block whose training estimate
//! looks too uniform (too little empirical capacity to carry the payload) is
//! discarded and both terminals rewind to their pre-block snapshots.
//!
//! Because feedback is noiseless and all protocol randomness is shared, the
//! transmitter maintains a bit-identical replica of the receiver state at all
//! times, even when payloads decode incorrectly: both sides run the same
//! decoder on the same received data and adopt the same (possibly wrong)
//! beliefs.

mod params;
mod payload;
mod plan;
mod run;

pub use params::{
    ArithMode, BlockParams, Exponents, FamilyMode, HorizonFreeExponents, SchemeParams, SyncMode,
    Tau, Variant,
};
pub use payload::{PayloadLayout, UpdatePayload};
pub use plan::{plan_block, range_check, BlockPlan, PositionKind};
pub use run::{
    decode_update_bit, run_finite_horizon, run_genie, run_horizon_free, run_trial, BlockRecord,
    DiscardReason, GenieReport, TrialRecord,
};
