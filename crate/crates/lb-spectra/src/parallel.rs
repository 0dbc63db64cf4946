//! Thread pool sizing and cell-parallel assembly.

use lb_spectra_core::assembly::{self, AssembledForms, FeSpace};
use lb_spectra_core::quadrature::QuadratureRule;
use lb_spectra_core::sparse::Triplet;
use rayon::prelude::*;

/// Cells per assembly task. Fixed, so the triplet order (and with it the
/// summation order of every matrix entry) does not depend on thread count.
const CHUNK: usize = 256;

pub const THREADS_ENV: &str = "LB_SPECTRA_THREADS";

/// Worker count: `LB_SPECTRA_THREADS` if set and positive, else the
/// available parallelism.
pub fn thread_count() -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(available)
}

pub fn pool() -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(thread_count()).build().expect("thread pool")
}

/// Same result as [`assembly::assemble`], bit for bit.
pub fn assemble(space: &FeSpace, rule: &QuadratureRule) -> lb_spectra_core::Result<AssembledForms> {
    let tables = space.tables(rule);
    let n_cells = space.lifted.n_cells();
    let chunks: Vec<(Vec<Triplet>, Vec<Triplet>)> = (0..n_cells.div_ceil(CHUNK))
        .into_par_iter()
        .map(|i| {
            let (mut a, mut m) = (Vec::new(), Vec::new());
            assembly::assemble_cells(space, &tables, i * CHUNK..((i + 1) * CHUNK).min(n_cells), &mut a, &mut m)?;
            Ok((a, m))
        })
        .collect::<lb_spectra_core::Result<_>>()?;
    let (a, m): (Vec<_>, Vec<_>) = chunks.into_iter().unzip();
    Ok(assembly::finish(space, a.concat(), m.concat()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use lb_spectra_core::pipeline::Discretization;
    use lb_spectra_core::{CellKind, SurfaceDescription};

    #[test]
    fn parallel_assembly_is_bitwise_sequential() {
        let d = Discretization::new(SurfaceDescription::sphere(1.0), CellKind::Quad, 2, 2);
        let space = d.space(3).unwrap();
        let rule = d.rule(&space);
        let seq = assembly::assemble(&space, &rule).unwrap();
        for threads in [1, 3] {
            let p = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let par = p.install(|| assemble(&space, &rule)).unwrap();
            assert_eq!(par, seq);
        }
    }
}
