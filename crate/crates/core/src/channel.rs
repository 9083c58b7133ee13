//! Per-channel capacity catalog.
//!
//! Every channel contributes two numbers: a lower bound, the two-way assisted
//! quantum capacity, and an upper bound, an entanglement measure of the
//! channel. For the named distillable families the two coincide. Anything
//! else is entered as [`ChannelSpec::Explicit`]. All values are in qubits
//! (base-2 logarithms) per channel use.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    /// Pure-loss bosonic channel with transmissivity `eta` in `[0, 1)`.
    LossyOptical { eta: f64 },
    /// Erasure channel on a `d`-dimensional input, erasure probability `p`.
    Erasure { p: f64, d: u32 },
    /// Qubit dephasing channel with flip probability `p`.
    Dephasing { p: f64 },
    /// User-supplied numbers. When several upper bounds are known (say a
    /// squashed-entanglement and a max-relative-entropy value), list the
    /// extra ones in `extra_upper`; the smallest is used.
    Explicit {
        lower: f64,
        upper: f64,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        extra_upper: Vec<f64>,
    },
}

/// Which of the two per-channel numbers feeds an LP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSide {
    Lower,
    Upper,
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

fn in_unit(x: f64) -> bool {
    x.is_finite() && (0.0..=1.0).contains(&x)
}

impl ChannelSpec {
    pub fn explicit(lower: f64, upper: f64) -> Self {
        ChannelSpec::Explicit {
            lower,
            upper,
            extra_upper: Vec::new(),
        }
    }

    pub fn lossy_optical(eta: f64) -> Self {
        ChannelSpec::LossyOptical { eta }
    }

    /// True for the catalog families whose lower and upper numbers agree.
    pub fn is_distillable(&self) -> bool {
        !matches!(self, ChannelSpec::Explicit { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ChannelSpec::LossyOptical { eta } => {
                if eta == 1.0 {
                    return Err(Error::UnboundedCapacity(
                        "lossy optical channel with eta = 1".into(),
                    ));
                }
                if !(eta.is_finite() && (0.0..1.0).contains(&eta)) {
                    return Err(Error::invalid(format!("transmissivity {eta} outside [0, 1)")));
                }
            }
            ChannelSpec::Erasure { p, d } => {
                if !in_unit(p) {
                    return Err(Error::invalid(format!("erasure probability {p} outside [0, 1]")));
                }
                if d < 2 {
                    return Err(Error::invalid(format!("erasure input dimension {d} < 2")));
                }
            }
            ChannelSpec::Dephasing { p } => {
                if !in_unit(p) {
                    return Err(Error::invalid(format!("dephasing probability {p} outside [0, 1]")));
                }
            }
            ChannelSpec::Explicit {
                lower,
                upper,
                ref extra_upper,
            } => {
                for x in std::iter::once(lower).chain(std::iter::once(upper)).chain(extra_upper.iter().copied()) {
                    if x.is_infinite() {
                        return Err(Error::UnboundedCapacity(format!("explicit value {x}")));
                    }
                    if !(x.is_finite() && x >= 0.0) {
                        return Err(Error::invalid(format!("explicit capacity {x} must be nonnegative")));
                    }
                }
                let upper = extra_upper.iter().copied().fold(upper, f64::min);
                if lower > upper {
                    return Err(Error::invalid(format!(
                        "explicit lower {lower} exceeds upper {upper}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn lower_capacity(&self) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            ChannelSpec::LossyOptical { eta } => -(1.0 - eta).log2(),
            ChannelSpec::Erasure { p, d } => (1.0 - p) * f64::from(d).log2(),
            ChannelSpec::Dephasing { p } => 1.0 - binary_entropy(p),
            ChannelSpec::Explicit { lower, .. } => lower,
        })
    }

    pub fn upper_bound(&self) -> Result<f64> {
        match self {
            ChannelSpec::Explicit {
                upper, extra_upper, ..
            } => {
                self.validate()?;
                Ok(extra_upper.iter().copied().fold(*upper, f64::min))
            }
            _ => self.lower_capacity(),
        }
    }

    pub fn capacity(&self, side: BoundSide) -> Result<f64> {
        match side {
            BoundSide::Lower => self.lower_capacity(),
            BoundSide::Upper => self.upper_bound(),
        }
    }
}
