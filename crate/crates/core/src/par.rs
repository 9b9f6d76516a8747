//! Order-preserving map over independent work items.
//!
//! With the `parallel` feature the map runs on the rayon thread pool;
//! otherwise, or when [`Execution::Sequential`] is requested, it is a plain
//! iterator. Results are always in input order.

/// How a batch of independent evaluations is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

#[cfg(feature = "parallel")]
pub fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    match exec {
        Execution::Parallel => items.par_iter().map(f).collect(),
        Execution::Sequential => items.iter().map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, R, F>(_exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let items: Vec<u64> = (0..1000).collect();
        let par = map(Execution::Parallel, &items, |x| x * x);
        let seq = map(Execution::Sequential, &items, |x| x * x);
        assert_eq!(par, seq);
        assert_eq!(par[999], 998_001);
    }
}
