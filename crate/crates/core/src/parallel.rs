//! Index-ordered fan-out of independent work units over scoped threads.

use crate::Result;

/// Runs `work(i)` for `i in 0..trials` on `threads` workers; results keep index order.
pub(crate) fn run_trials<T: Send>(
    trials: usize,
    threads: usize,
    work: impl Fn(u64) -> Result<T> + Sync,
) -> Vec<Result<T>> {
    let threads = threads.clamp(1, trials.max(1));
    if threads == 1 {
        return (0..trials as u64).map(&work).collect();
    }
    let mut slots: Vec<Option<Result<T>>> = (0..trials).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|w| {
                let work = &work;
                scope.spawn(move || (w..trials).step_by(threads).map(|t| (t, work(t as u64))).collect::<Vec<_>>())
            })
            .collect();
        for h in handles {
            for (t, r) in h.join().expect("trial worker panicked") {
                slots[t] = Some(r);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("every trial ran")).collect()
}
