use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

/// Separable FFT on an `n^dim` row-major cube.
#[derive(Clone)]
pub struct FftNd {
    n: usize,
    dim: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FftNd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftNd")
            .field("n", &self.n)
            .field("dim", &self.dim)
            .finish()
    }
}

impl FftNd {
    pub fn new(n: usize, dim: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            dim,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.process(data, &self.forward);
    }

    /// Normalized inverse: `inverse(forward(x)) == x`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.process(data, &self.inverse);
        let scale = 1.0 / self.len() as f64;
        data.par_iter_mut().for_each(|v| *v *= scale);
    }

    fn process(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.len(), "FFT buffer has the wrong length");
        let n = self.n;
        let scratch_len = fft.get_inplace_scratch_len();
        let zero = Complex64::new(0.0, 0.0);
        for axis in 0..self.dim {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            if stride == 1 {
                data.par_chunks_mut(n).for_each_init(
                    || vec![zero; scratch_len],
                    |scratch, line| fft.process_with_scratch(line, scratch),
                );
                continue;
            }
            let block = n * stride;
            let mut lines = vec![zero; data.len()];
            {
                let src: &[Complex64] = data;
                lines.par_chunks_mut(n).enumerate().for_each_init(
                    || vec![zero; scratch_len],
                    |scratch, (line, out)| {
                        let (o, i) = (line / stride, line % stride);
                        let base = o * block + i;
                        for (k, v) in out.iter_mut().enumerate() {
                            *v = src[base + k * stride];
                        }
                        fft.process_with_scratch(out, scratch);
                    },
                );
            }
            data.par_chunks_mut(block).enumerate().for_each(|(o, blk)| {
                for i in 0..stride {
                    let line = &lines[(o * stride + i) * n..(o * stride + i + 1) * n];
                    for (k, v) in line.iter().enumerate() {
                        blk[k * stride + i] = *v;
                    }
                }
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(data: &[Complex64], n: usize, dim: usize) -> Vec<Complex64> {
        let len = n.pow(dim as u32);
        let idx = |flat: usize| {
            let mut v = vec![0usize; dim];
            let mut r = flat;
            for a in (0..dim).rev() {
                v[a] = r % n;
                r /= n;
            }
            v
        };
        (0..len)
            .map(|kf| {
                let k = idx(kf);
                (0..len)
                    .map(|xf| {
                        let x = idx(xf);
                        let phase: f64 = k.iter().zip(&x).map(|(k, x)| (k * x) as f64).sum::<f64>()
                            * -2.0
                            * std::f64::consts::PI
                            / n as f64;
                        data[xf] * Complex64::from_polar(1.0, phase)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_in_three_dims() {
        let n = 4;
        let data: Vec<Complex64> = (0..64)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut fast = data.clone();
        FftNd::new(n, 3).forward(&mut fast);
        let slow = naive_dft(&data, n, 3);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let plan = FftNd::new(16, 2);
        let data: Vec<Complex64> = (0..256)
            .map(|i| Complex64::new(i as f64, -(i as f64).sqrt()))
            .collect();
        let mut work = data.clone();
        plan.forward(&mut work);
        plan.inverse(&mut work);
        for (a, b) in work.iter().zip(&data) {
            assert!((a - b).norm() < 1e-10);
        }
    }
}
