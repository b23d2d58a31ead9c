//! Piecewise-uniform time grids with composite Simpson weights.

use crate::coeff::Coeff;

/// Composite Simpson weights for `n` (even) intervals of width `h`.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 2 && n % 2 == 0, "Simpson needs an even interval count");
    (0..=n)
        .map(|k| {
            let c = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect()
}

/// Composite Simpson integral of `f` over `[a, b]` with `n` (even) intervals.
pub fn simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    simpson_weights(n, h)
        .iter()
        .enumerate()
        .map(|(k, w)| w * f(a + k as f64 * h))
        .sum()
}

/// Pairwise summation; fixed association order regardless of thread count.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n if n <= 8 => values.iter().sum(),
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Time grid on `[0, 1]` made of uniform pieces between breakpoints.
///
/// Each piece carries an even number of steps, so Simpson's rule applies
/// piecewise and integrands may have kinks at the breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
    weights: Vec<f64>,
    /// Index ranges `[start, end]` (inclusive) of the uniform pieces.
    pieces: Vec<(usize, usize)>,
}

impl TimeGrid {
    /// Uniform grid on `[0, 1]` with at least `steps` intervals.
    pub fn uniform(steps: usize) -> Self {
        Self::with_breaks(&[0.0, 1.0], steps)
    }

    /// Grid whose pieces are delimited by `breaks` (sorted, starting at 0,
    /// ending at 1). Roughly `steps` intervals in total, distributed by length.
    pub fn with_breaks(breaks: &[f64], steps: usize) -> Self {
        assert!(breaks.len() >= 2, "need at least two breakpoints");
        let mut times = vec![breaks[0]];
        let mut weights = vec![0.0];
        let mut pieces = Vec::new();
        for pair in breaks.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let len = b - a;
            if len <= 1e-15 {
                continue;
            }
            let mut n = ((steps as f64) * len).ceil() as usize;
            n = n.max(2);
            if n % 2 == 1 {
                n += 1;
            }
            let h = len / n as f64;
            let start = times.len() - 1;
            let w = simpson_weights(n, h);
            *weights.last_mut().unwrap() += w[0];
            for k in 1..=n {
                times.push(if k == n { b } else { a + k as f64 * h });
                weights.push(w[k]);
            }
            pieces.push((start, times.len() - 1));
        }
        Self {
            times,
            weights,
            pieces,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn pieces(&self) -> &[(usize, usize)] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn integrate<C: Coeff>(&self, values: &[C]) -> C {
        assert_eq!(values.len(), self.times.len());
        values
            .iter()
            .zip(&self.weights)
            .fold(C::zero(), |acc, (v, w)| acc + *v * *w)
    }

    /// Grid index holding time `t`, if `t` is a node.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|s| (s - t).abs() < 1e-13)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_for_cubics() {
        let v = simpson(|t| 4.0 * t * t * t - t + 2.0, 0.0, 1.0, 2);
        assert!((v - 2.5).abs() < 1e-14);
    }

    #[test]
    fn grid_weights_sum_to_one_and_respect_breaks() {
        let grid = TimeGrid::with_breaks(&[0.0, 0.3, 1.0], 101);
        let total: f64 = grid.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
        assert!(grid.index_of(0.3).is_some());
        for &(a, b) in grid.pieces() {
            assert_eq!((b - a) % 2, 0);
        }
        let t2: Vec<f64> = grid.times().iter().map(|t| t * t).collect();
        assert!((grid.integrate(&t2) - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn zero_length_pieces_are_dropped() {
        let grid = TimeGrid::with_breaks(&[0.0, 0.5, 0.5, 1.0], 10);
        assert_eq!(grid.pieces().len(), 2);
        assert_eq!(*grid.times().last().unwrap(), 1.0);
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let v: Vec<f64> = (0..1000).map(|k| (k as f64).sin()).collect();
        let naive: f64 = v.iter().sum();
        assert!((pairwise_sum(&v) - naive).abs() < 1e-10);
    }
}
