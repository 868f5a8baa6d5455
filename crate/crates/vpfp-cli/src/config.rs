//! Run files: a versioned TOML document wrapping a [`SolverConfig`].
//!
//! ```toml
//! schema_version = 1
//!
//! [solver]
//! t_end = 1.0
//! regime = { tag = "parabolic", epsilon = 0.1 }
//! initial = { kind = "sigma_bump", amplitude = { smallness_fraction = 0.5 } }
//!
//! [sweep]            # optional
//! epsilons = [0.1, 0.03, 0.01, 0.003]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use vpfp_core::kinetic_solver::{RegimeTag, ScalingRegime, SolverConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    pub schema_version: u32,
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Each member replaces `solver.regime.epsilon`, keeping its tag.
    pub epsilons: Vec<f64>,
    /// Step of the spectral limit solve the members are compared against.
    #[serde(default = "default_limit_dt")]
    pub limit_dt: f64,
}

fn default_limit_dt() -> f64 {
    1e-3
}

/// A config that failed to parse or validate, rendered `path:line:col: message`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaError(pub String);

impl std::fmt::Display for SchemaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for SchemaError {}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

impl RunFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self, SchemaError> {
        let anchored = |offset: usize, msg: &str| {
            let (line, col) = line_col(text, offset);
            SchemaError(format!("{origin}:{line}:{col}: {msg}"))
        };
        let file: RunFile = toml::from_str(text).map_err(|e| {
            let offset = e.span().map_or(0, |s| s.start);
            anchored(offset, e.message())
        })?;
        let key_offset = |key: &str| {
            text.lines()
                .scan(0, |pos, l| {
                    let start = *pos;
                    *pos += l.len() + 1;
                    Some((start, l))
                })
                .find(|(_, l)| l.trim_start().starts_with(key))
                .map_or(0, |(start, _)| start)
        };
        if file.schema_version != SCHEMA_VERSION {
            return Err(anchored(
                key_offset("schema_version"),
                &format!("unsupported schema_version {}, expected {SCHEMA_VERSION}", file.schema_version),
            ));
        }
        file.solver.validate().map_err(|e| anchored(key_offset("[solver]"), &e.to_string()))?;
        if let Some(sweep) = &file.sweep {
            let at = key_offset("epsilons");
            if sweep.epsilons.is_empty() {
                return Err(anchored(at, "sweep needs at least one epsilon"));
            }
            for &eps in &sweep.epsilons {
                with_epsilon(&file.solver.regime, eps).map_err(|e| anchored(at, &e.to_string()))?;
            }
            if !(sweep.limit_dt > 0.0 && sweep.limit_dt.is_finite()) {
                return Err(anchored(key_offset("limit_dt"), "limit_dt must be positive"));
            }
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self, SchemaError> {
        let text = std::fs::read_to_string(path).map_err(|e| SchemaError(format!("{}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// The fully defaulted form, suitable as a self-describing snapshot.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run files serialize")
    }

    /// Solver configs of the sweep members, or the single run.
    pub fn members(&self) -> Vec<SolverConfig> {
        match &self.sweep {
            None => vec![self.solver.clone()],
            Some(s) => s
                .epsilons
                .iter()
                .map(|&eps| {
                    let mut cfg = self.solver.clone();
                    cfg.regime = with_epsilon(&cfg.regime, eps).expect("validated on parse");
                    cfg
                })
                .collect(),
        }
    }
}

pub fn with_epsilon(regime: &ScalingRegime, eps: f64) -> vpfp_core::Result<ScalingRegime> {
    match regime.tag() {
        RegimeTag::HighField => ScalingRegime::high_field(eps),
        RegimeTag::Parabolic => ScalingRegime::parabolic(eps),
        RegimeTag::Custom => ScalingRegime::custom(regime.delta(), eps),
    }
}
