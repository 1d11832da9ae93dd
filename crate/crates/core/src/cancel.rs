//! Process-wide interruption flag checked by long-running pipelines.
//!
//! The command-line front end raises it from a Ctrl-C handler; pipelines stop at
//! the next work-unit boundary and return what they have, and the output
//! writer marks the manifest as truncated.

use std::sync::atomic::{AtomicBool, Ordering};

static REQUESTED: AtomicBool = AtomicBool::new(false);

pub fn request() {
    REQUESTED.store(true, Ordering::SeqCst);
}

pub fn is_requested() -> bool {
    REQUESTED.load(Ordering::Relaxed)
}

pub fn reset() {
    REQUESTED.store(false, Ordering::SeqCst);
}
