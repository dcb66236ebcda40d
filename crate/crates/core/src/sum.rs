//! Compensated (Kahan-Babuška-Neumaier) summation with a running error bound.

use std::ops::AddAssign;

/// Unit roundoff for `f64`.
pub const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// Neumaier accumulator that also tracks `sum |x_i|` and the term count, which
/// is what the a-priori error bound needs.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
    abs_sum: f64,
    count: u64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs_sum += x.abs();
        self.count += 1;
    }

    /// Current compensated value.
    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    pub fn abs_sum(&self) -> f64 {
        self.abs_sum
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Bound on the summation error alone: `2u|S| + 4 n u^2 sum|x_i|`.
    pub fn error_bound(&self) -> f64 {
        let u = UNIT_ROUNDOFF;
        2.0 * u * self.value().abs() + 4.0 * (self.count as f64) * u * u * self.abs_sum
    }

    /// Folds another accumulator in after this one. Used for ordered block
    /// reductions; the result depends on the merge order, never on scheduling.
    pub fn merge(&mut self, other: &CompensatedSum) {
        let t = self.sum + other.sum;
        let err = if self.sum.abs() >= other.sum.abs() {
            (self.sum - t) + other.sum
        } else {
            (other.sum - t) + self.sum
        };
        self.sum = t;
        self.comp += err + other.comp;
        self.abs_sum += other.abs_sum;
        self.count += other.count;
    }
}

impl AddAssign<f64> for CompensatedSum {
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}
