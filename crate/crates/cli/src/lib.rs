//! Command-line front end for `kloosterman-core`: argument parsing, JSON /
//! CSV / text documents, the result cache, parallel enumeration and the
//! verification suites.

pub mod args;
pub mod cache;
pub mod commands;
pub mod output;
pub mod verify;

use kloosterman_core::coset::{Budget, ColumnFilter, CosetEnumerator, RepresentativeSet};
use rayon::prelude::*;

pub use commands::{run, CliError};

/// Enumerates `Ω(c)` with one rayon task per shard. The budget is shared.
pub fn enumerate_parallel(
    c: &[u64],
    filter: &dyn ColumnFilter,
    budget: &Budget,
) -> kloosterman_core::Result<RepresentativeSet> {
    let en = CosetEnumerator::new(c)?;
    let parts = (0..en.shard_count())
        .into_par_iter()
        .map(|s| en.enumerate_shard(s, filter, budget))
        .collect::<kloosterman_core::Result<Vec<_>>>()?;
    RepresentativeSet::concat(parts)
}
