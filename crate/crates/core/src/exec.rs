//! Pixel-parallel dispatch. With the `parallel` feature, work is spread over the
//! current rayon pool; otherwise (or with [`Execution::Sequential`]) pixels run in
//! order on the calling thread. Output never depends on the schedule.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Workers that will actually run pixel kernels.
    pub fn workers(self) -> usize {
        match self {
            Execution::Sequential => 1,
            #[cfg(feature = "parallel")]
            Execution::Parallel => rayon::current_num_threads(),
            #[cfg(not(feature = "parallel"))]
            Execution::Parallel => 1,
        }
    }
}

// Pixels handed to one task at a time; keeps per-pixel scheduling overhead down.
#[cfg(feature = "parallel")]
const MIN_PIXELS_PER_TASK: usize = 64;

/// Calls `kernel(scratch, pixel_index, out_chunk)` for every `chunk`-sized piece of `out`.
/// `scratch` is created once per worker.
pub(crate) fn for_each_pixel<T, S, I, K>(exec: Execution, out: &mut [T], chunk: usize, init: I, kernel: K)
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    K: Fn(&mut S, usize, &mut [T]) + Sync + Send,
{
    if chunk == 0 {
        return;
    }
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => out
            .par_chunks_mut(chunk)
            .with_min_len(MIN_PIXELS_PER_TASK)
            .enumerate()
            .for_each_init(init, |s, (p, c)| kernel(s, p, c)),
        _ => {
            let mut s = init();
            for (p, c) in out.chunks_mut(chunk).enumerate() {
                kernel(&mut s, p, c);
            }
        }
    }
}

/// Fallible variant of [`for_each_pixel`]; reports the error of the lowest failing pixel.
pub(crate) fn try_for_each_pixel<T, S, E, I, K>(
    exec: Execution,
    out: &mut [T],
    chunk: usize,
    init: I,
    kernel: K,
) -> Result<(), E>
where
    T: Send,
    E: Send,
    I: Fn() -> S + Sync + Send,
    K: Fn(&mut S, usize, &mut [T]) -> Result<(), E> + Sync + Send,
{
    if chunk == 0 {
        return Ok(());
    }
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            let first = out
                .par_chunks_mut(chunk)
                .with_min_len(MIN_PIXELS_PER_TASK)
                .enumerate()
                .map_init(init, |s, (p, c)| kernel(s, p, c).err().map(|e| (p, e)))
                .flatten()
                .min_by_key(|(p, _)| *p);
            match first {
                Some((_, e)) => Err(e),
                None => Ok(()),
            }
        }
        _ => {
            let mut s = init();
            for (p, c) in out.chunks_mut(chunk).enumerate() {
                kernel(&mut s, p, c)?;
            }
            Ok(())
        }
    }
}
