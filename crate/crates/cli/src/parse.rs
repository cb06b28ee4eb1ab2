//! Parsers for command-line values.

use std::str::FromStr;

use geam_core::geam::Sign;
use num_rational::Ratio;

/// A real given either as a decimal or as an exact fraction `p/q`.
pub fn real(text: &str) -> Result<f64, String> {
    let text = text.trim();
    if text.contains('/') {
        let r = Ratio::<i64>::from_str(text).map_err(|e| format!("bad fraction {text:?}: {e}"))?;
        // both parts are reduced and exactly representable for the sizes used here
        return Ok(*r.numer() as f64 / *r.denom() as f64);
    }
    let x: f64 = text.parse().map_err(|e| format!("bad number {text:?}: {e}"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("{text:?} is not finite"))
    }
}

pub fn real_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',').map(real).collect()
}

pub fn usize_list(text: &str) -> Result<Vec<usize>, String> {
    text.split(',')
        .map(|t| t.trim().parse().map_err(|e| format!("bad integer {t:?}: {e}")))
        .collect()
}

pub fn signs(text: &str) -> Result<Vec<Sign>, String> {
    text.split(',')
        .map(|t| match t.trim() {
            "+" | "plus" | "1" | "+1" => Ok(Sign::Plus),
            "-" | "minus" | "-1" => Ok(Sign::Minus),
            other => Err(format!("bad sign {other:?}")),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum Gamma {
    Uniform,
    List(Vec<f64>),
}

pub fn gamma(text: &str) -> Result<Gamma, String> {
    if text.trim() == "uniform" {
        Ok(Gamma::Uniform)
    } else {
        real_list(text).map(Gamma::List)
    }
}

/// Per-frame rotation request.
#[derive(Clone, Debug, PartialEq)]
pub enum Rotation {
    Identity,
    Permutation(Vec<usize>),
    RandomPermutation,
    /// Exponential of a random generator with the given scale.
    Exponential(f64),
}

pub fn rotation(text: &str) -> Result<Rotation, String> {
    let text = text.trim();
    if text == "identity" {
        return Ok(Rotation::Identity);
    }
    if let Some(rest) = text.strip_prefix("perm:") {
        return if rest == "random" {
            Ok(Rotation::RandomPermutation)
        } else {
            usize_list(rest).map(Rotation::Permutation)
        };
    }
    if let Some(rest) = text.strip_prefix("exp:") {
        return real(rest).map(Rotation::Exponential);
    }
    Err(format!(
        "bad rotation {text:?}; expected identity, perm:i,j,..., perm:random or exp:<scale>"
    ))
}
