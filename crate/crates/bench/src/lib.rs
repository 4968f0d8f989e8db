//! Shared setup for the benchmarks.

use std::sync::Arc;

use fmf_core::ideals::primes_above;
use fmf_core::{ClassGroup, Field, Ideal, Result};

/// Class group of `Q(sqrt(-d))` and a prime of level above `p`.
pub fn setup(d: i64, p: i128) -> Result<(Arc<ClassGroup>, Ideal)> {
    let f = Field::new(d)?;
    let cg = Arc::new(ClassGroup::new(f));
    let n = primes_above(f, p)[0].0;
    Ok((cg, n))
}
