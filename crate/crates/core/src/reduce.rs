//! Ordered reductions over row-partitioned pair sums.
//!
//! Each row total is accumulated sequentially and rows are folded in index
//! order. The parallel path evaluates rows concurrently but folds the same
//! row totals in the same order, so both paths give bit-identical sums.

use crate::error::Result;

/// Rows below this count are never split across threads.
#[cfg(feature = "parallel")]
const PARALLEL_MIN_ROWS: usize = 256;

pub(crate) fn ordered_row_sum<F>(rows: usize, row: F) -> Result<f64>
where
    F: Fn(usize) -> Result<f64> + Sync,
{
    #[cfg(feature = "parallel")]
    if rows >= PARALLEL_MIN_ROWS && rayon::current_num_threads() > 1 {
        use rayon::prelude::*;
        let totals: Result<alloc::vec::Vec<f64>> = (0..rows).into_par_iter().map(&row).collect();
        return Ok(totals?.into_iter().fold(0.0, |acc, x| acc + x));
    }
    let mut acc = 0.0;
    for i in 0..rows {
        acc += row(i)?;
    }
    Ok(acc)
}
