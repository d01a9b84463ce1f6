use num_complex::Complex64;

use super::Wavepacket;
use crate::error::{Error, Result};

/// Overlaps above `1 − PARALLEL_TOL` are treated as parallel modes.
const PARALLEL_TOL: f64 = 1e-12;

/// Normalized component of the target orthogonal to the reference, if any.
#[derive(Debug, Clone, PartialEq)]
pub enum Residual {
    Orthogonal(Wavepacket),
    ZeroResidual,
}

/// `target = c·reference + √(1−η)·perp` with `η = |c|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeDecomposition {
    pub eta: f64,
    /// `⟨reference, target⟩`; its phase is the relative phase of the two modes.
    pub overlap: Complex64,
    pub residual: Residual,
}

impl ModeDecomposition {
    pub fn perp(&self) -> Option<&Wavepacket> {
        match &self.residual {
            Residual::Orthogonal(w) => Some(w),
            Residual::ZeroResidual => None,
        }
    }
}

/// Splits `target` into its projection on `reference` and a normalized
/// orthogonal remainder. Both inputs must be normalized.
pub fn gram_schmidt_residual(target: &Wavepacket, reference: &Wavepacket) -> Result<ModeDecomposition> {
    for (name, w) in [("target", target), ("reference", reference)] {
        if (w.norm_sq() - 1.0).abs() > 1e-6 {
            return Err(Error::invalid(format!(
                "{name} must be normalized (norm² = {})",
                w.norm_sq()
            )));
        }
    }
    let overlap = reference.inner_product(target)?;
    let eta = overlap.norm_sqr();
    if eta > 1.0 - PARALLEL_TOL {
        return Ok(ModeDecomposition {
            eta: 1.0,
            overlap,
            residual: Residual::ZeroResidual,
        });
    }
    let mut rest = target.add_scaled(-overlap, reference)?;
    // A second pass removes the component reintroduced by rounding.
    let again = reference.inner_product(&rest)?;
    rest = rest.add_scaled(-again, reference)?;
    let residual = match rest.normalize() {
        Ok(perp) => Residual::Orthogonal(perp),
        Err(_) => Residual::ZeroResidual,
    };
    Ok(ModeDecomposition {
        eta: eta.clamp(0.0, 1.0),
        overlap,
        residual,
    })
}
