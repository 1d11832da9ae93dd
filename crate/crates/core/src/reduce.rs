//! Deterministic parallel reductions.
//!
//! Chunk boundaries are fixed by index, never by thread scheduling, so sums are
//! bit-identical for any pool size.

use rayon::prelude::*;

pub(crate) const CHUNK: usize = 1 << 14;

/// Sums `f(x)` over `xs` with a fixed chunk-then-sequential tree.
pub(crate) fn fixed_sum<T, F>(xs: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync,
{
    if xs.len() <= CHUNK {
        return xs.iter().map(&f).sum();
    }
    let partial: Vec<f64> = xs
        .par_chunks(CHUNK)
        .map(|c| c.iter().map(&f).sum::<f64>())
        .collect();
    partial.iter().sum()
}

/// Like [`fixed_sum`] but the closure also receives the element index.
pub(crate) fn fixed_sum_indexed<T, F>(xs: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(usize, &T) -> f64 + Sync,
{
    if xs.len() <= CHUNK {
        return xs.iter().enumerate().map(|(i, x)| f(i, x)).sum();
    }
    let partial: Vec<f64> = xs
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(c, chunk)| {
            let base = c * CHUNK;
            chunk
                .iter()
                .enumerate()
                .map(|(i, x)| f(base + i, x))
                .sum::<f64>()
        })
        .collect();
    partial.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunked_sum_matches_naive_within_rounding() {
        let xs: Vec<f64> = (0..100_000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = xs.iter().sum();
        let fixed = fixed_sum(&xs, |x| *x);
        assert!((naive - fixed).abs() < 1e-9);
        assert_eq!(fixed.to_bits(), fixed_sum(&xs, |x| *x).to_bits());
    }
}
