//! `ehd besov`: Besov norm of one field of a checkpoint.

use std::path::Path;
use std::str::FromStr;

use ehd_core::checkpoint;
use ehd_core::littlewood_paley::{besov_norm_vector, BesovParams};
use ehd_core::spectral::{forward_transform, spectral_tail_fraction};
use ehd_core::{RealField, State};

use crate::error::{CliError, ErrorCode};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldChoice {
    /// Velocity, with the pointwise Euclidean magnitude inside each block.
    U,
    Ux,
    Uy,
    Uz,
    V,
    W,
    /// `v − w`
    Eta,
}

impl FromStr for FieldChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "u" => Self::U,
            "ux" | "u.x" => Self::Ux,
            "uy" | "u.y" => Self::Uy,
            "uz" | "u.z" => Self::Uz,
            "v" => Self::V,
            "w" => Self::W,
            "eta" => Self::Eta,
            other => return Err(format!("unknown field `{other}` (expected u, ux, uy, uz, v, w or eta)")),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesovOutput {
    pub norm: f64,
    /// Largest spectral tail fraction among the components, a reliability
    /// hint for `p = ∞` grid maxima.
    pub tail_fraction: f64,
}

pub fn cmd_besov(path: &Path, s: f64, p: f64, r: f64, field: FieldChoice) -> Result<BesovOutput, CliError> {
    let params = BesovParams::new(s, p, r).map_err(|e| CliError::new(ErrorCode::Usage, e.to_string()))?;
    let state: State =
        checkpoint::load(path).map_err(|e| CliError::new(ErrorCode::Checkpoint, format!("{}: {e}", path.display())))?;
    let eta;
    let parts: Vec<&RealField> = match field {
        FieldChoice::U => state.u.components().to_vec(),
        FieldChoice::Ux => vec![&state.u.x],
        FieldChoice::Uy => vec![&state.u.y],
        FieldChoice::Uz => vec![&state.u.z],
        FieldChoice::V => vec![&state.v],
        FieldChoice::W => vec![&state.w],
        FieldChoice::Eta => {
            eta = &state.v - &state.w;
            vec![&eta]
        }
    };
    let spectral = parts
        .into_iter()
        .map(forward_transform)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::new(ErrorCode::Checkpoint, e.to_string()))?;
    let refs: Vec<_> = spectral.iter().collect();
    let norm = besov_norm_vector(&refs, params).map_err(|e| CliError::new(ErrorCode::Usage, e.to_string()))?;
    let tail_fraction = spectral.iter().map(spectral_tail_fraction).fold(0.0, f64::max);
    Ok(BesovOutput { norm, tail_fraction })
}
