//! Data-parallel primitives used by the numerical kernels.
//!
//! With the `parallel` feature (on by default) these run on the rayon global
//! pool. Without it every helper degrades to a plain loop on the calling
//! thread. Reductions use fixed blocks so sums do not depend on how work was
//! scheduled.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Elements per reduction block.
const SUM_BLOCK: usize = 4096;
/// Minimum elements handed to a worker by the element-wise helpers.
const MIN_LEN: usize = 1024;

/// Number of execution lanes available to the kernels.
pub fn lanes() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// `out[i] = f(i)` for every index.
pub fn fill_indexed<F>(out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    out.par_iter_mut()
        .with_min_len(MIN_LEN)
        .enumerate()
        .for_each(|(i, v)| *v = f(i));
    #[cfg(not(feature = "parallel"))]
    out.iter_mut().enumerate().for_each(|(i, v)| *v = f(i));
}

/// `out[i] = f(i, out[i])` for every index.
pub fn update_indexed<F>(out: &mut [f64], f: F)
where
    F: Fn(usize, f64) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    out.par_iter_mut()
        .with_min_len(MIN_LEN)
        .enumerate()
        .for_each(|(i, v)| *v = f(i, *v));
    #[cfg(not(feature = "parallel"))]
    out.iter_mut().enumerate().for_each(|(i, v)| *v = f(i, *v));
}

/// Sum of `f(i)` over `0..len`, blocked so the result is independent of the
/// number of lanes.
pub fn sum<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let blocks = len.div_ceil(SUM_BLOCK);
    let block_sum = |b: usize| {
        let start = b * SUM_BLOCK;
        let end = (start + SUM_BLOCK).min(len);
        (start..end).map(&f).sum::<f64>()
    };
    #[cfg(feature = "parallel")]
    let partial: Vec<f64> = (0..blocks).into_par_iter().map(block_sum).collect();
    #[cfg(not(feature = "parallel"))]
    let partial: Vec<f64> = (0..blocks).map(block_sum).collect();
    partial.into_iter().sum()
}

/// Maximum of `f(i)` over `0..len` (`-inf` when empty).
pub fn max<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len)
            .into_par_iter()
            .with_min_len(MIN_LEN)
            .map(f)
            .reduce(|| f64::NEG_INFINITY, f64::max)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Scatter-style accumulation. The items `0..items` are split into one
/// contiguous range per lane; each lane adds into a private zeroed buffer of
/// length `out_len` and the buffers are summed in lane order.
pub fn accumulate<F>(out_len: usize, items: usize, f: F) -> Vec<f64>
where
    F: Fn(Range<usize>, &mut [f64]) + Sync + Send,
{
    let lanes = lanes().min(items.max(1));
    if lanes <= 1 {
        let mut out = vec![0.0; out_len];
        f(0..items, &mut out);
        return out;
    }
    let per = items.div_ceil(lanes);
    let run = |lane: usize| {
        let mut buf = vec![0.0; out_len];
        let start = (lane * per).min(items);
        let end = ((lane + 1) * per).min(items);
        f(start..end, &mut buf);
        buf
    };
    #[cfg(feature = "parallel")]
    let buffers: Vec<Vec<f64>> = (0..lanes).into_par_iter().map(run).collect();
    #[cfg(not(feature = "parallel"))]
    let buffers: Vec<Vec<f64>> = (0..lanes).map(run).collect();

    let mut iter = buffers.into_iter();
    let mut out = iter.next().unwrap_or_else(|| vec![0.0; out_len]);
    for buf in iter {
        update_indexed(&mut out, |i, v| v + buf[i]);
    }
    out
}

/// Runs `op` on every consecutive `line_len` chunk of `data`, handing each
/// lane its own scratch built by `init`.
pub fn lines_mut<S, I, F>(data: &mut [f64], line_len: usize, init: I, op: F)
where
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, &mut [f64]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(line_len)
        .for_each_init(&init, |scratch, line| op(scratch, line));
    #[cfg(not(feature = "parallel"))]
    {
        let mut scratch = init();
        data.chunks_mut(line_len)
            .for_each(|line| op(&mut scratch, line));
    }
}

/// Like [`lines_mut`] with a companion index buffer chunked alongside.
pub fn lines_mut_with_aux<S, I, F>(
    data: &mut [f64],
    aux: &mut [usize],
    line_len: usize,
    init: I,
    op: F,
) where
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, &mut [f64], &mut [usize]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(line_len)
        .zip(aux.par_chunks_mut(line_len))
        .for_each_init(&init, |scratch, (line, idx)| op(scratch, line, idx));
    #[cfg(not(feature = "parallel"))]
    {
        let mut scratch = init();
        data.chunks_mut(line_len)
            .zip(aux.chunks_mut(line_len))
            .for_each(|(line, idx)| op(&mut scratch, line, idx));
    }
}

/// `out[i] = f(i)` for index buffers.
pub fn fill_indexed_usize<F>(out: &mut [usize], f: F)
where
    F: Fn(usize) -> usize + Sync + Send,
{
    #[cfg(feature = "parallel")]
    out.par_iter_mut()
        .with_min_len(MIN_LEN)
        .enumerate()
        .for_each(|(i, v)| *v = f(i));
    #[cfg(not(feature = "parallel"))]
    out.iter_mut().enumerate().for_each(|(i, v)| *v = f(i));
}
