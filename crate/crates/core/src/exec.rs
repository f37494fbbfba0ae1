//! Index-parallel batch execution. Results never depend on the schedule:
//! maps are collected in index order and reductions must be associative.

/// Whether this build can run batches on several threads.
pub const PARALLEL: bool = cfg!(feature = "parallel");

/// `f(0), …, f(count-1)` in index order. `jobs == 1` forces the sequential
/// path; `jobs == 0` uses all available threads.
pub fn map_indexed<T, F>(count: u64, jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if jobs != 1 {
        use rayon::prelude::*;
        return with_pool(jobs, || (0..count).into_par_iter().map(&f).collect());
    }
    let _ = jobs;
    (0..count).map(f).collect()
}

/// Folds `f(i)` over all indices with an associative `combine`.
pub fn map_reduce<T, F, R>(count: u64, jobs: usize, f: F, identity: T, combine: R) -> T
where
    T: Send + Sync + Clone,
    F: Fn(u64) -> T + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if jobs != 1 {
        use rayon::prelude::*;
        return with_pool(jobs, || {
            (0..count as usize)
                .into_par_iter()
                .with_min_len(64)
                .map(|i| f(i as u64))
                .reduce(|| identity.clone(), &combine)
        });
    }
    let _ = jobs;
    (0..count).map(f).fold(identity, combine)
}

#[cfg(feature = "parallel")]
fn with_pool<T: Send>(jobs: usize, body: impl FnOnce() -> T + Send) -> T {
    if jobs == 0 {
        return body();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(body),
        Err(_) => body(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_and_reduction_do_not_depend_on_jobs() {
        let seq = map_indexed(1000, 1, |i| i * i);
        let par = map_indexed(1000, 0, |i| i * i);
        assert_eq!(seq, par);
        let s1 = map_reduce(1000, 1, |i| vec![i], Vec::new(), |mut a, b| {
            a.extend(b);
            a
        });
        let s2 = map_reduce(1000, 4, |i| vec![i], Vec::new(), |mut a, b| {
            a.extend(b);
            a
        });
        assert_eq!(s1, s2);
    }
}
