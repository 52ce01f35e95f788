//! Datasets over uniformly sampled two-qubit spectra.
//!
//! All figures work on `(d_A, d_B) = (2, 2)` and on the diagonal
//! representation of each state, which is enough because every quantity is a
//! spectral function.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::haar::{sample_simplex, RngState};
use crate::linalg::{BipartiteDims, Spectrum};
use crate::orbit::{self, fidelity_bounds_spectral, sum_entropy_bounds_spectral};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityRow {
    pub purity: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityFigure {
    pub rows: Vec<FidelityRow>,
    pub max_lower: f64,
    pub min_upper: f64,
}

impl FidelityFigure {
    /// Whether every lower bound lies below every upper bound.
    pub fn bounds_separated(&self) -> bool {
        self.max_lower < self.min_upper
    }
}

fn check_points(points: usize, min: usize) -> Result<()> {
    if points < min {
        return Err(Error::InvalidConfig(format!("need at least {min} points, got {points}")));
    }
    Ok(())
}

/// Fidelity sandwich at `points` uniform simplex points.
pub fn figure_fidelity(points: usize, seed: u64) -> Result<FidelityFigure> {
    check_points(points, 1)?;
    let dims = BipartiteDims::two_qubit();
    let mut rng = RngState::new(seed);
    let rows = (0..points)
        .map(|_| {
            let s = sample_simplex(4, &mut rng)?;
            let b = fidelity_bounds_spectral(&s, dims)?;
            Ok(FidelityRow { purity: s.purity(), lower_bound: b.lower, upper_bound: b.upper })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_lower = rows.iter().map(|r| r.lower_bound).fold(f64::NEG_INFINITY, f64::max);
    let min_upper = rows.iter().map(|r| r.upper_bound).fold(f64::INFINITY, f64::min);
    Ok(FidelityFigure { rows, max_lower, min_upper })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyRow {
    pub purity: f64,
    /// `-Tr Lambda ln(c0 + c1 Lambda + c2 Lambda^2)`.
    pub lower_term: f64,
    /// `S(c0 + c1 Lambda + c2 Lambda^2)`.
    pub upper_entropy: f64,
    /// `upper_entropy - lower_term`.
    pub gap: f64,
}

fn entropy_row(s: &Spectrum) -> Result<EntropyRow> {
    let b = sum_entropy_bounds_spectral(s, BipartiteDims::two_qubit())?;
    Ok(EntropyRow { purity: s.purity(), lower_term: b.lower, upper_entropy: b.upper, gap: b.upper - b.lower })
}

/// Sum-entropy sandwich at `points` spectra: the uniform and pure corners
/// first, then `points - 2` uniform simplex samples.
pub fn figure_entropy(points: usize, seed: u64) -> Result<Vec<EntropyRow>> {
    check_points(points, 2)?;
    let mut rows = vec![entropy_row(&Spectrum::uniform(4))?, entropy_row(&Spectrum::pure(4))?];
    let mut rng = RngState::new(seed);
    for _ in 2..points {
        rows.push(entropy_row(&sample_simplex(4, &mut rng)?)?);
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PageRow {
    pub m: usize,
    pub n: usize,
    pub page: f64,
    pub diagonal: f64,
    pub coherence: f64,
}

/// Page, diagonal and coherence averages for every `1 <= m <= n <= bound`.
pub fn page_table(bound: usize) -> Result<Vec<PageRow>> {
    check_points(bound, 1)?;
    let mut rows = Vec::new();
    for n in 1..=bound {
        for m in 1..=n {
            rows.push(PageRow {
                m,
                n,
                page: orbit::page_average_entropy(m, n)?,
                diagonal: orbit::diagonal_average_entropy(m, n)?,
                coherence: orbit::average_coherence(m, n)?,
            });
        }
    }
    Ok(rows)
}
