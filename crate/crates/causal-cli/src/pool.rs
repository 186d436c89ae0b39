//! A small scoped worker pool for embarrassingly parallel cell evaluation.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Number of worker threads: `CAUSAL_DIST_THREADS` when set, otherwise the
/// available parallelism.
pub fn thread_count() -> usize {
    if let Ok(v) = std::env::var("CAUSAL_DIST_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            return n.max(1);
        }
    }
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Evaluates `f(0..n)` on up to `threads` workers. Results come back in
/// index order regardless of the schedule; each worker owns a scratch value
/// produced by `mk_scratch`.
pub fn parallel_map<T, S, F, M>(n: usize, threads: usize, mk_scratch: M, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut S) -> T + Sync,
    M: Fn() -> S + Sync,
{
    let threads = threads.max(1).min(n.max(1));
    if threads == 1 {
        let mut scratch = mk_scratch();
        return (0..n).map(|i| f(i, &mut scratch)).collect();
    }
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<T>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| {
                let mut scratch = mk_scratch();
                loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= n {
                        break;
                    }
                    let out = f(i, &mut scratch);
                    results.lock().unwrap()[i] = Some(out);
                }
            });
        }
    });
    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|o| o.expect("every index was evaluated"))
        .collect()
}
