//! Working precision for the exact (audit) path.

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

pub const DEFAULT_PRECISION_BITS: u32 = 256;
pub const DEFAULT_GRID_POINTS: usize = 10001;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrecisionContext {
    pub precision_bits: u32,
    pub grid_points: usize,
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext {
            precision_bits: DEFAULT_PRECISION_BITS,
            grid_points: DEFAULT_GRID_POINTS,
        }
    }
}

impl PrecisionContext {
    pub fn new(precision_bits: u32, grid_points: usize) -> Result<Self> {
        let ctx = PrecisionContext {
            precision_bits,
            grid_points,
        };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn validate(&self) -> Result<()> {
        if self.precision_bits < 64 {
            return param(format!(
                "precision_bits must be at least 64, got {}",
                self.precision_bits
            ));
        }
        if self.precision_bits > 1 << 20 {
            return param(format!("precision_bits {} is unreasonably large", self.precision_bits));
        }
        if self.grid_points < 2 {
            return param(format!("grid_points must be at least 2, got {}", self.grid_points));
        }
        Ok(())
    }

    /// Tolerance `2^(-precision_bits/2)` used for normalization and equality checks.
    pub fn tolerance(&self) -> Float {
        tolerance(self.precision_bits)
    }
}

pub fn tolerance(bits: u32) -> Float {
    Float::with_val(bits, Float::i_exp(1, -((bits / 2) as i32)))
}
