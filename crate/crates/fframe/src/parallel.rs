//! Multi-threaded drivers over the core kernels.

use fframe_core::frame::{
    frame_report_from_gram, CylinderFunction, FrameReport, GramAccumulator, HermitianMatrix,
};
use fframe_core::ifs::{AffineIfs, TruncationBudget};
use fframe_core::measure::AtomicMeasure;
use fframe_core::reconstruct::{fourier_reconstruct, ReconstructionReport, SplitSystem};
use fframe_core::Complex64;
use rayon::prelude::*;

use crate::error::Result;

/// Bytes of partial Gram matrices alive at once.
const GRAM_MEMORY_BUDGET: usize = 1 << 30;

/// Fewest atoms worth a separate accumulator.
const MIN_ATOMS_PER_CHUNK: usize = 256;

/// Chunk count ceiling. Fixed rather than tied to the thread count so the
/// summation order, and with it every output bit, is machine independent.
const MAX_CHUNKS: usize = 16;

/// Gram matrix with atoms split across threads and partial matrices summed.
pub fn gram_matrix(
    ifs: &AffineIfs,
    level: usize,
    nu: &AtomicMeasure,
    budget: &TruncationBudget,
) -> Result<HermitianMatrix> {
    let probe = GramAccumulator::new(ifs, level, *budget)?;
    let dim = probe.dim();
    let matrix_bytes = dim * dim * std::mem::size_of::<Complex64>();
    let chunks = MAX_CHUNKS
        .min((GRAM_MEMORY_BUDGET / matrix_bytes.max(1)).max(1))
        .min((nu.len() / MIN_ATOMS_PER_CHUNK).max(1));
    let atoms: Vec<(f64, f64)> = nu.atoms().collect();
    let size = atoms.len().div_ceil(chunks).max(1);
    let partials: Vec<GramAccumulator<'_>> = atoms
        .par_chunks(size)
        .map(|chunk| {
            let mut acc = GramAccumulator::new(ifs, level, *budget)?;
            for &(lambda, w) in chunk {
                acc.add_atom(lambda, w);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = probe;
    for p in &partials {
        total.merge(p);
    }
    Ok(total.finish())
}

pub fn frame_bounds(
    ifs: &AffineIfs,
    level: usize,
    nu: &AtomicMeasure,
    budget: &TruncationBudget,
    lambda_truncation: Option<f64>,
) -> Result<FrameReport> {
    let g = gram_matrix(ifs, level, nu, budget)?;
    Ok(frame_report_from_gram(ifs, level, &g, lambda_truncation)?)
}

/// `μ̂_B` on a frequency grid.
pub fn ft_sweep(ifs: &AffineIfs, ts: &[f64], budget: &TruncationBudget) -> Vec<Complex64> {
    ts.par_iter()
        .map(|&t| ifs.ft_invariant(t, budget))
        .collect()
}

/// One reconstruction per evaluation point.
pub fn reconstruct_many(
    sys: &SplitSystem,
    f: &CylinderFunction<'_>,
    ts: &[f64],
    cutoff: f64,
    step: f64,
    budget: &TruncationBudget,
) -> Result<Vec<ReconstructionReport>> {
    ts.par_iter()
        .map(|&t| Ok(fourier_reconstruct(sys, f, t, cutoff, step, budget)?))
        .collect()
}
