//! Compensated and reproducible reductions over point pairs.

use rayon::prelude::*;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.compensation += (self.sum - t) + v;
        } else {
            self.compensation += (v - t) + self.sum;
        }
        self.sum = t;
    }

    /// Folds another accumulator into this one.
    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::default();
        iter.into_iter().for_each(|v| acc.add(v));
        acc
    }
}

pub const DEFAULT_PARTITIONS: usize = 64;

/// How pairwise sums are reduced.
///
/// With `deterministic` set, rows are dealt round-robin into `partitions`
/// buckets, each bucket is summed in row order, and the bucket totals are
/// combined by a fixed binary tree. The result is then independent of the
/// number of worker threads. Otherwise rayon chooses the split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SumOptions {
    pub deterministic: bool,
    pub partitions: usize,
}

impl Default for SumOptions {
    fn default() -> Self {
        Self {
            deterministic: false,
            partitions: DEFAULT_PARTITIONS,
        }
    }
}

impl SumOptions {
    pub fn deterministic() -> Self {
        Self {
            deterministic: true,
            ..Self::default()
        }
    }
}

/// Sums `width` quantities over `rows` rows. `row(i, acc)` adds row `i`'s
/// contributions into `acc` (length `width`); each row must do so in a fixed
/// order for deterministic mode to be bit-reproducible.
pub fn sum_rows<F>(rows: usize, width: usize, opts: SumOptions, row: F) -> Vec<f64>
where
    F: Fn(usize, &mut [CompensatedSum]) + Sync,
{
    let fresh = || vec![CompensatedSum::default(); width];
    let merge = |mut a: Vec<CompensatedSum>, b: Vec<CompensatedSum>| {
        a.iter_mut().zip(&b).for_each(|(x, y)| x.merge(y));
        a
    };
    let total = if opts.deterministic {
        let parts = opts.partitions.max(1);
        let buckets: Vec<Vec<CompensatedSum>> = (0..parts)
            .into_par_iter()
            .map(|p| {
                let mut acc = fresh();
                for i in (p..rows).step_by(parts) {
                    row(i, &mut acc);
                }
                acc
            })
            .collect();
        tree_reduce(buckets, &merge).unwrap_or_else(fresh)
    } else {
        (0..rows)
            .into_par_iter()
            .fold(fresh, |mut acc, i| {
                row(i, &mut acc);
                acc
            })
            .reduce(fresh, merge)
    };
    total.iter().map(CompensatedSum::value).collect()
}

/// Scalar form of [`sum_rows`].
pub fn sum_rows_scalar<F>(rows: usize, opts: SumOptions, row: F) -> f64
where
    F: Fn(usize, &mut CompensatedSum) + Sync,
{
    sum_rows(rows, 1, opts, |i, acc| row(i, &mut acc[0]))[0]
}

fn tree_reduce<T, M: Fn(T, T) -> T>(mut items: Vec<T>, merge: &M) -> Option<T> {
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(merge(a, b)),
                None => next.push(a),
            }
        }
        items = next;
    }
    items.pop()
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool
/// when `threads` is `None`.
pub fn with_threads<T: Send, F: FnOnce() -> T + Send>(threads: Option<usize>, f: F) -> T {
    match threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .expect("thread pool construction")
            .install(f),
        None => f(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensation_recovers_cancelled_mass() {
        let mut acc = CompensatedSum::default();
        for v in [1.0, 1e100, 1.0, -1e100] {
            acc.add(v);
        }
        assert_eq!(acc.value(), 2.0);
        let naive: f64 = [1.0, 1e100, 1.0, -1e100].iter().sum();
        assert_eq!(naive, 0.0);
    }

    #[test]
    fn merge_matches_sequential() {
        let xs: Vec<f64> = (1..1000).map(|k| 1.0 / k as f64).collect();
        let all: CompensatedSum = xs.iter().copied().collect();
        let mut a: CompensatedSum = xs[..300].iter().copied().collect();
        let b: CompensatedSum = xs[300..].iter().copied().collect();
        a.merge(&b);
        assert!((a.value() - all.value()).abs() <= 1e-15 * all.value());
    }

    #[test]
    fn deterministic_sum_ignores_thread_count() {
        let f = |i: usize, acc: &mut CompensatedSum| {
            for j in 0..50 {
                acc.add(((i * 31 + j * 7) as f64).sin() / (1.0 + j as f64));
            }
        };
        let opts = SumOptions::deterministic();
        let one = with_threads(Some(1), || sum_rows_scalar(5003, opts, f));
        let many = with_threads(Some(7), || sum_rows_scalar(5003, opts, f));
        assert_eq!(one.to_bits(), many.to_bits());
        let free = with_threads(Some(3), || sum_rows_scalar(5003, SumOptions::default(), f));
        assert!((free - one).abs() <= 1e-12 * one.abs().max(1.0));
    }

    #[test]
    fn empty_and_odd_partitions() {
        let opts = SumOptions {
            deterministic: true,
            partitions: 5,
        };
        assert_eq!(sum_rows(0, 2, opts, |_, _| unreachable!()), vec![0.0, 0.0]);
        let v = sum_rows(3, 2, opts, |i, acc| {
            acc[0].add(i as f64);
            acc[1].add(1.0);
        });
        assert_eq!(v, vec![3.0, 3.0]);
    }
}
