#![allow(dead_code)]

pub mod oracle;
pub mod pipeline;

use std::sync::{Mutex, MutexGuard};

static HEAVY: Mutex<()> = Mutex::new(());

/// Serializes the timed, CPU-bound checks so their wall times are not
/// inflated by each other.
pub fn heavy() -> MutexGuard<'static, ()> {
    HEAVY.lock().unwrap_or_else(|e| e.into_inner())
}

/// Prints the verdict line and fails the test when `ok` is false.
pub fn report(id: u32, name: &str, ok: bool, detail: impl std::fmt::Display) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("[{verdict}] criterion {id:>2} {name}: {detail}");
    assert!(ok, "criterion {id} ({name}) failed: {detail}");
}
