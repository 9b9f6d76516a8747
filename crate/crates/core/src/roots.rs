//! Bracketed bisection for monotone scalar functions.

use crate::error::{Error, Result};

/// Outcome of a bisection: final bracket and the number of halvings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
}

impl Bracket {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Bisects `[lo, hi]` on a predicate that is false at `lo` and true at `hi`
/// and switches exactly once. Stops once the bracket no longer shrinks in
/// floating point or is narrower than `rel_tol * |hi|`.
pub fn bisect<P>(
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
    max_iter: usize,
    mut above: P,
) -> Result<Bracket>
where
    P: FnMut(f64) -> bool,
{
    for iterations in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= rel_tol * hi.abs() {
            return Ok(Bracket { lo, hi, iterations });
        }
        if above(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    if mid <= lo || mid >= hi || hi - lo <= rel_tol * hi.abs() {
        return Ok(Bracket {
            lo,
            hi,
            iterations: max_iter,
        });
    }
    Err(Error::ConvergenceFailure {
        iterations: max_iter,
    })
}

/// Doubles `hi` from `start` until `above(hi)` holds; `None` past `cap`.
pub fn expand_upward<P>(start: f64, cap: f64, mut above: P) -> Option<f64>
where
    P: FnMut(f64) -> bool,
{
    let mut hi = start;
    while hi <= cap {
        if above(hi) {
            return Some(hi);
        }
        hi *= 2.0;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_square_root_of_two() {
        let b = bisect(0.0, 2.0, 1e-15, 200, |x| x * x >= 2.0).unwrap();
        assert!((b.mid() - 2f64.sqrt()).abs() < 1e-14);
        assert!(b.lo * b.lo < 2.0 && b.hi * b.hi >= 2.0);
    }

    #[test]
    fn iteration_cap_reports_failure() {
        let r = bisect(0.0, 1.0, 0.0, 5, |x| x > 0.3);
        assert!(matches!(
            r,
            Err(Error::ConvergenceFailure { iterations: 5 })
        ));
    }

    #[test]
    fn expansion() {
        assert_eq!(expand_upward(1.0, 100.0, |x| x > 10.0), Some(16.0));
        assert_eq!(expand_upward(1.0, 100.0, |_| false), None);
    }
}
