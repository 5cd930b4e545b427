//! The MUSEC trial: interim and final relief counts with its O'Brien–Fleming
//! efficacy boundaries.

use crate::design::{Design, Trial, TrialData};

pub const N1_CTRL: u32 = 97;
pub const N1_TRT: u32 = 101;
pub const N2_CTRL: u32 = 134;
pub const N2_TRT: u32 = 143;
pub const S1_CTRL: u32 = 12;
pub const S1_TRT: u32 = 27;
/// Cumulative successes at the final analysis.
pub const S2_CTRL_CUMULATIVE: u32 = 21;
pub const S2_TRT_CUMULATIVE: u32 = 42;
pub const E1: f64 = 2.797;
pub const E2: f64 = 1.977;
pub const ALPHA: f64 = 0.05;

/// Observed final control rate, 21/134.
pub const P_CTRL: f64 = 21.0 / 134.0;
/// Observed final treatment rate, 42/143.
pub const P_TRT: f64 = 42.0 / 143.0;

pub fn musec_design() -> Design {
    Design::new(N1_CTRL, N1_TRT, N2_CTRL, N2_TRT, E1, E2, ALPHA).expect("fixture design is valid")
}

pub fn musec_data() -> TrialData {
    TrialData::continued(
        S1_CTRL,
        S1_TRT,
        S2_CTRL_CUMULATIVE - S1_CTRL,
        S2_TRT_CUMULATIVE - S1_TRT,
    )
}

pub fn musec_trial() -> Trial {
    Trial::new(musec_design(), musec_data()).expect("fixture data is valid")
}
