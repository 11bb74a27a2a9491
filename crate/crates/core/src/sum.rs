//! Compensated summation for slowly convergent series.
//!
//! All reductions over mode indices go through [`sum_by_magnitude`] so that the
//! result depends only on the multiset of terms, never on how they were
//! produced or on the number of worker threads.

use num_complex::Complex64;

/// Kahan–Babuška–Neumaier accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    carry: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl Extend<f64> for NeumaierSum {
    fn extend<T: IntoIterator<Item = f64>>(&mut self, iter: T) {
        for x in iter {
            self.add(x);
        }
    }
}

/// Sorts by descending magnitude, then sums with compensation.
///
/// Ties in magnitude are broken by the signed value so the order is total.
pub fn sum_by_magnitude(terms: &mut [f64]) -> f64 {
    terms.sort_unstable_by(|a, b| b.abs().total_cmp(&a.abs()).then(b.total_cmp(a)));
    let mut acc = NeumaierSum::default();
    acc.extend(terms.iter().copied());
    acc.value()
}

/// Complex version of [`sum_by_magnitude`]; terms are ordered by modulus and
/// the real and imaginary parts are accumulated separately.
pub fn sum_complex_by_magnitude(terms: &mut [Complex64]) -> Complex64 {
    terms.sort_unstable_by(|a, b| {
        b.norm_sqr()
            .total_cmp(&a.norm_sqr())
            .then(b.re.total_cmp(&a.re))
            .then(b.im.total_cmp(&a.im))
    });
    let mut re = NeumaierSum::default();
    let mut im = NeumaierSum::default();
    for z in terms.iter() {
        re.add(z.re);
        im.add(z.im);
    }
    Complex64::new(re.value(), im.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn recovers_small_terms_under_cancellation() {
        let mut acc = NeumaierSum::default();
        acc.extend([1e200, 0.1, 0.2, 0.3, -1e200]);
        assert!((acc.value() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn basel_partial_sum_is_accurate() {
        let n = 100_000;
        let mut terms: Vec<f64> = (1..=n).map(|k| 1.0 / (k as f64 * k as f64)).collect();
        let s = sum_by_magnitude(&mut terms);
        // ζ(2) − Σ_{k>n} 1/k² with the Euler–Maclaurin tail 1/n − 1/(2n²) + 1/(6n³)
        let nf = n as f64;
        let expected = std::f64::consts::PI.powi(2) / 6.0 - (1.0 / nf - 0.5 / (nf * nf) + 1.0 / (6.0 * nf.powi(3)));
        assert!((s - expected).abs() < 1e-15, "{s} vs {expected}");
    }

    proptest! {
        #[test]
        fn order_of_input_does_not_matter(mut xs in proptest::collection::vec(-1e6f64..1e6, 0..200), seed in any::<u64>()) {
            let a = sum_by_magnitude(&mut xs.clone());
            // deterministic shuffle
            let n = xs.len();
            let mut state = seed | 1;
            for i in (1..n).rev() {
                state ^= state << 13; state ^= state >> 7; state ^= state << 17;
                xs.swap(i, (state % (i as u64 + 1)) as usize);
            }
            let b = sum_by_magnitude(&mut xs);
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
