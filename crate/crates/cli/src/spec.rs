//! The system-spec file: a versioned JSON document describing the SFT, named
//! potentials, an optional reference measure, an optional suspension section,
//! and run defaults. See `specs/golden_mean.json` for a complete example.

use std::collections::BTreeMap;

use serde::Deserialize;

use ergopt_core::{
    CocyclePotential, EdgeFrequencyVector, LocallyConstantPotential, Matrix, Scalar, Sft, Symbol,
};

use crate::{CliError, CliResult};

pub const FORMAT: &str = "ergopt/1";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSpec {
    pub format: String,
    pub sft: RawSft,
    #[serde(default)]
    pub potentials: BTreeMap<String, RawPotential>,
    #[serde(default)]
    pub measure: Option<RawMeasure>,
    #[serde(default)]
    pub suspension: Option<RawSuspension>,
    #[serde(default)]
    pub run: RawRun,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSft {
    pub alphabet_size: usize,
    pub allowed: Vec<(Symbol, Symbol)>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RawPotential {
    /// Explicit weight table: keys are comma-separated blocks ("0", "0,1").
    BlockWeights {
        range: usize,
        weights: BTreeMap<String, serde_json::Value>,
    },
    Constant { value: serde_json::Value },
    SymbolIndicator { symbol: Symbol },
    BlockIndicator { block: Vec<Symbol> },
    /// Weight of a symbol equals its index.
    SymbolValue {},
    /// One row-major matrix per symbol; forces float mode.
    Cocycle {
        dimension: usize,
        matrices: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMeasure {
    /// Edge frequencies keyed "a,b"; must be invariant and normalized.
    pub edges: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSuspension {
    pub roof: String,
    pub observable: String,
    pub constraint: String,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRun {
    pub f: Option<String>,
    pub phi: Option<String>,
    pub g: Option<String>,
    pub psi: Option<String>,
    pub alpha: Option<serde_json::Value>,
    pub grid: Option<usize>,
    pub seed: Option<u64>,
    pub depth: Option<usize>,
    pub growth: Option<usize>,
    pub base_len: Option<usize>,
    pub n: Option<usize>,
    pub xi: Option<f64>,
    /// "auto" (default), "exact", or "float".
    pub mode: Option<String>,
}

pub fn load(path: &str) -> CliResult<RawSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read spec file {path}: {e}")))?;
    let spec: RawSpec = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("spec file {path} is not valid: {e}")))?;
    if spec.format != FORMAT {
        return Err(CliError::Config(format!(
            "unsupported spec format {:?} (expected {FORMAT:?})",
            spec.format
        )));
    }
    Ok(spec)
}

impl RawSpec {
    pub fn sft(&self) -> CliResult<Sft> {
        Sft::new(self.sft.alphabet_size, &self.sft.allowed).map_err(CliError::config_from_core)
    }

    pub fn raw_potential(&self, name: &str) -> CliResult<&RawPotential> {
        self.potentials
            .get(name)
            .ok_or_else(|| CliError::Config(format!("unknown potential {name:?}")))
    }

    pub fn is_cocycle(&self, name: &str) -> CliResult<bool> {
        Ok(matches!(self.raw_potential(name)?, RawPotential::Cocycle { .. }))
    }

    /// Resolves a named potential as a locally constant table over `S`.
    pub fn locally_constant<S: Scalar>(
        &self,
        sft: &Sft,
        name: &str,
    ) -> CliResult<LocallyConstantPotential<S>> {
        let pot = match self.raw_potential(name)? {
            RawPotential::BlockWeights { range, weights } => {
                let mut table = BTreeMap::new();
                for (key, value) in weights {
                    let block = parse_block(key)?;
                    if block.len() != *range {
                        return Err(CliError::Config(format!(
                            "potential {name:?}: block {key:?} does not match range {range}"
                        )));
                    }
                    table.insert(block, parse_value::<S>(value, name)?);
                }
                LocallyConstantPotential::from_weights(*range, table)
                    .map_err(CliError::config_from_core)?
            }
            RawPotential::Constant { value } => {
                LocallyConstantPotential::constant(sft, parse_value::<S>(value, name)?)
            }
            RawPotential::SymbolIndicator { symbol } => {
                if *symbol as usize >= sft.alphabet_size() {
                    return Err(CliError::Config(format!(
                        "potential {name:?}: symbol {symbol} outside alphabet"
                    )));
                }
                LocallyConstantPotential::symbol_indicator(sft, *symbol)
            }
            RawPotential::BlockIndicator { block } => {
                LocallyConstantPotential::block_indicator(sft, block)
                    .map_err(CliError::config_from_core)?
            }
            RawPotential::SymbolValue {} => LocallyConstantPotential::symbol_value(sft),
            RawPotential::Cocycle { .. } => {
                return Err(CliError::Config(format!(
                    "potential {name:?} is a cocycle and has no exact weight table"
                )))
            }
        };
        pot.validate_on(sft).map_err(CliError::config_from_core)?;
        Ok(pot)
    }

    pub fn cocycle(&self, sft: &Sft, name: &str) -> CliResult<CocyclePotential> {
        match self.raw_potential(name)? {
            RawPotential::Cocycle { dimension, matrices } => {
                if matrices.len() != sft.alphabet_size() {
                    return Err(CliError::Config(format!(
                        "potential {name:?}: {} matrices for {} symbols",
                        matrices.len(),
                        sft.alphabet_size()
                    )));
                }
                let mats = matrices
                    .iter()
                    .map(|data| Matrix::new(*dimension, data.clone()))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(CliError::config_from_core)?;
                CocyclePotential::new(mats).map_err(CliError::config_from_core)
            }
            _ => Err(CliError::Config(format!("potential {name:?} is not a cocycle"))),
        }
    }

    pub fn measure<S: Scalar>(&self, sft: &Sft) -> CliResult<EdgeFrequencyVector<S>> {
        let raw = self
            .measure
            .as_ref()
            .ok_or_else(|| CliError::Config("spec file has no measure section".into()))?;
        let mut freq = vec![S::zero(); sft.edge_count()];
        for (key, value) in &raw.edges {
            let block = parse_block(key)?;
            if block.len() != 2 {
                return Err(CliError::Config(format!(
                    "measure edge key {key:?} must name a pair"
                )));
            }
            let e = sft.edge_id(block[0], block[1]).ok_or_else(|| {
                CliError::Config(format!("measure names forbidden edge {key:?}"))
            })?;
            freq[e] = parse_value::<S>(value, "measure")?;
        }
        Ok(EdgeFrequencyVector::new(freq))
    }
}

pub fn parse_block(key: &str) -> CliResult<Vec<Symbol>> {
    key.split(',')
        .map(|part| {
            part.trim()
                .parse::<Symbol>()
                .map_err(|_| CliError::Config(format!("bad block key {key:?}")))
        })
        .collect()
}

/// Accepts `"p/q"`, decimal strings, and JSON numbers. Numbers convert into
/// exact scalars through their (exact, deterministic) binary expansion.
pub fn parse_value<S: Scalar>(value: &serde_json::Value, context: &str) -> Result<S, CliError> {
    match value {
        serde_json::Value::String(text) => ergopt_core::scalar::parse_scalar::<S>(text)
            .ok_or_else(|| CliError::Config(format!("{context}: cannot parse value {text:?}"))),
        serde_json::Value::Number(num) => {
            let x = num
                .as_f64()
                .ok_or_else(|| CliError::Config(format!("{context}: bad number {num}")))?;
            from_f64_exact::<S>(x)
                .ok_or_else(|| CliError::Config(format!("{context}: cannot convert {x}")))
        }
        other => Err(CliError::Config(format!(
            "{context}: expected string or number, got {other}"
        ))),
    }
}

fn from_f64_exact<S: Scalar>(x: f64) -> Option<S> {
    if !x.is_finite() {
        return None;
    }
    // Decompose x = mantissa * 2^exp exactly.
    let (mantissa, exp) = {
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        if raw_exp == 0 {
            (sign * frac as i64, -1074i64)
        } else {
            (sign * (frac | 1 << 52) as i64, raw_exp - 1075)
        }
    };
    let mut v = S::from_int(mantissa);
    let two = S::from_int(2);
    if exp >= 0 {
        for _ in 0..exp {
            v = v * two.clone();
        }
    } else {
        for _ in 0..-exp {
            v = v / two.clone();
        }
    }
    Some(v)
}
