//! Expected-reward values with a distinguished infinite element.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::rational::{rat_to_f64, Rat};

/// A nonnegative expected reward, or the distinguished infinite value for
/// states that do not reach a goal with probability one.
///
/// Deliberately not a float sentinel: comparisons against thresholds treat
/// `Infinite` as strictly greater than every rational.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Finite(f64),
    Infinite,
}

impl Value {
    pub fn is_finite(&self) -> bool {
        matches!(self, Value::Finite(_))
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Finite(x) => Some(*x),
            Value::Infinite => None,
        }
    }

    /// `self ⋈ τ` with `⋈` being `<` when `strict`, `≤` otherwise, allowing
    /// `slack` of absolute tolerance. `Infinite` never meets a threshold.
    pub fn meets_threshold(&self, tau: &Rat, strict: bool, slack: f64) -> bool {
        match self {
            Value::Infinite => false,
            Value::Finite(x) => {
                let t = rat_to_f64(tau);
                if strict {
                    *x < t + slack
                } else {
                    *x <= t + slack
                }
            }
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Value::Infinite, Value::Infinite) => Some(Ordering::Equal),
            (Value::Infinite, Value::Finite(_)) => Some(Ordering::Greater),
            (Value::Finite(_), Value::Infinite) => Some(Ordering::Less),
            (Value::Finite(a), Value::Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Finite(x) => write!(f, "{x}"),
            Value::Infinite => write!(f, "inf"),
        }
    }
}

/// Per-state values plus the uniform mean over the initial states.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueVector {
    pub values: Vec<Value>,
    pub aggregate: Value,
}

impl ValueVector {
    /// Builds the vector and the aggregate `(1/|I|)·Σ_{s∈I} value(s)`;
    /// the aggregate is `Infinite` when any initial value is.
    pub fn new(values: Vec<Value>, initial: &[usize]) -> ValueVector {
        let mut sum = 0.0;
        let mut infinite = initial.is_empty();
        for &s in initial {
            match values[s] {
                Value::Finite(x) => sum += x,
                Value::Infinite => infinite = true,
            }
        }
        let aggregate = if infinite {
            Value::Infinite
        } else {
            Value::Finite(sum / initial.len() as f64)
        };
        ValueVector { values, aggregate }
    }

    pub fn get(&self, s: usize) -> Value {
        self.values[s]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn infinite_exceeds_every_threshold() {
        assert!(!Value::Infinite.meets_threshold(&int(1_000_000_000), false, 0.0));
        assert!(Value::Finite(2.0).meets_threshold(&int(2), false, 0.0));
        assert!(!Value::Finite(2.0).meets_threshold(&int(2), true, 0.0));
    }

    #[test]
    fn aggregate_is_mean_over_initial() {
        let vv = ValueVector::new(
            alloc::vec![Value::Finite(4.0), Value::Finite(2.0), Value::Finite(0.0)],
            &[0, 1],
        );
        assert_eq!(vv.aggregate, Value::Finite(3.0));

        let vv = ValueVector::new(
            alloc::vec![Value::Finite(4.0), Value::Infinite, Value::Finite(0.0)],
            &[0, 1],
        );
        assert_eq!(vv.aggregate, Value::Infinite);
    }
}
