//! Opt-in multiply-accumulate counter.
//!
//! Kernels report the number of multiply-accumulates they execute through
//! [`record`]; the count is only kept while [`counting`] is active on the
//! current thread, so the normal path pays one thread-local read per call.

use std::cell::Cell;

thread_local! {
    static COUNTER: Cell<Option<u64>> = const { Cell::new(None) };
}

#[inline]
pub fn record(macs: u64) {
    COUNTER.with(|c| {
        if let Some(n) = c.get() {
            c.set(Some(n + macs));
        }
    });
}

/// Runs `f` and returns its result along with the MACs recorded inside it.
pub fn counting<T>(f: impl FnOnce() -> T) -> (T, u64) {
    let outer = COUNTER.with(|c| c.replace(Some(0)));
    let out = f();
    let inner = COUNTER.with(|c| c.replace(outer)).unwrap_or(0);
    if let Some(n) = outer {
        COUNTER.with(|c| c.set(Some(n + inner)));
    }
    (out, inner)
}
