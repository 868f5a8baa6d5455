use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeTag {
    /// `δ = 1`
    HighField,
    /// `δ = ε`
    Parabolic,
    Custom,
}

/// Scaling pair `(δ, ε)` of `∂t f + (1/δ) v ∂x f − (1/ε) ∂xφ ∂v f = (1/(δε)) F f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RegimeRepr", into = "RegimeRepr")]
pub struct ScalingRegime {
    delta: f64,
    epsilon: f64,
    tag: RegimeTag,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegimeRepr {
    tag: RegimeTag,
    epsilon: f64,
    #[serde(default)]
    delta: Option<f64>,
}

impl TryFrom<RegimeRepr> for ScalingRegime {
    type Error = Error;

    fn try_from(r: RegimeRepr) -> Result<Self> {
        match r.tag {
            RegimeTag::HighField => Self::high_field(r.epsilon),
            RegimeTag::Parabolic => Self::parabolic(r.epsilon),
            RegimeTag::Custom => {
                let delta = r.delta.ok_or_else(|| contract("custom regime needs delta"))?;
                Self::custom(delta, r.epsilon)
            }
        }
    }
}

impl From<ScalingRegime> for RegimeRepr {
    fn from(r: ScalingRegime) -> Self {
        Self { tag: r.tag, epsilon: r.epsilon, delta: Some(r.delta) }
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(contract(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    Ok(())
}

impl ScalingRegime {
    pub fn high_field(epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(Self { delta: 1.0, epsilon, tag: RegimeTag::HighField })
    }

    pub fn parabolic(epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(Self { delta: epsilon, epsilon, tag: RegimeTag::Parabolic })
    }

    pub fn custom(delta: f64, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        if !(delta.is_finite() && delta > 0.0) {
            return Err(contract(format!("delta must be positive, got {delta}")));
        }
        Ok(Self { delta, epsilon, tag: RegimeTag::Custom })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn tag(&self) -> RegimeTag {
        self.tag
    }

    /// Same tag at a different `ε`; custom regimes keep their `δ`.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        match self.tag {
            RegimeTag::HighField => Self::high_field(epsilon),
            RegimeTag::Parabolic => Self::parabolic(epsilon),
            RegimeTag::Custom => Self::custom(self.delta, epsilon),
        }
    }

    /// Free parameter of the field-term inequalities: 1 (high-field), `sqrt(ε)` (parabolic).
    pub fn a_param(&self) -> f64 {
        match self.tag {
            RegimeTag::Parabolic => self.epsilon.sqrt(),
            _ => 1.0,
        }
    }
}
