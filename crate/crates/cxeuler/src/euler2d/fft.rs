//! Transforms between the centered spectral array and a padded physical grid.
//!
//! Spectra live on the rectangular mode set `|k_i| ≤ K` stored as a
//! `(2K+1)×(2K+1)` array with index `a_i = k_i + K`. Physical grids have `N`
//! points per axis; with the 2/3-style padding `N ≥ 3K+2`, quadratic products
//! evaluated pointwise on the grid are alias-free on the retained modes, and
//! the grid mean of a cubic is exact.

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Smallest grid size `≥ lo` whose prime factors are in {2, 3, 5}.
pub fn next_fast_size(lo: usize) -> usize {
    let mut n = lo.max(1);
    loop {
        let mut m = n;
        for p in [2usize, 3, 5] {
            while m % p == 0 {
                m /= p;
            }
        }
        if m == 1 {
            return n;
        }
        n += 1;
    }
}

/// Padded grid size used for dealiased quadratic products at cutoff `k`.
pub fn dealias_grid_size(cutoff: u32) -> usize {
    next_fast_size(3 * cutoff as usize + 2)
}

/// FFT plans plus work buffers for one grid size.
pub struct SpectralGrid {
    pub cutoff: u32,
    pub n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    transpose: Vec<Complex64>,
}

impl SpectralGrid {
    pub fn new(cutoff: u32, n: usize) -> Self {
        assert!(n >= 2 * cutoff as usize + 1, "grid must resolve the mode set");
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        Self {
            cutoff,
            n,
            fwd,
            inv,
            scratch: vec![Complex64::default(); scratch_len],
            transpose: vec![Complex64::default(); n * n],
        }
    }

    pub fn alloc_grid(&self) -> Array2<Complex64> {
        Array2::default((self.n, self.n))
    }

    fn fft2(&mut self, data: &mut Array2<Complex64>, forward: bool) {
        let n = self.n;
        let fft = if forward { &self.fwd } else { &self.inv };
        let slice = data.as_slice_mut().expect("standard layout");
        for row in slice.chunks_exact_mut(n) {
            fft.process_with_scratch(row, &mut self.scratch);
        }
        // Column pass via transpose.
        for i in 0..n {
            for j in 0..n {
                self.transpose[j * n + i] = slice[i * n + j];
            }
        }
        for row in self.transpose.chunks_exact_mut(n) {
            fft.process_with_scratch(row, &mut self.scratch);
        }
        for i in 0..n {
            for j in 0..n {
                slice[i * n + j] = self.transpose[j * n + i];
            }
        }
    }

    /// Synthesis: fill `grid` with `u(x_n) = Σ_k û(k) e^{ik·x_n}` from the
    /// centered spectrum (the `k = 0` entry carries the mean).
    pub fn synth(&mut self, spec: &Array2<Complex64>, grid: &mut Array2<Complex64>) {
        let k = self.cutoff as i32;
        let n = self.n as i32;
        grid.fill(Complex64::default());
        for a1 in 0..spec.nrows() {
            let g1 = (a1 as i32 - k).rem_euclid(n) as usize;
            for a2 in 0..spec.ncols() {
                let v = spec[(a1, a2)];
                if v != Complex64::default() {
                    let g2 = (a2 as i32 - k).rem_euclid(n) as usize;
                    grid[(g1, g2)] = v;
                }
            }
        }
        self.fft2(grid, false);
    }

    /// Analysis: overwrite `spec` with the coefficients of `grid`, truncated
    /// to `|k_i| ≤ K`. Destroys `grid`.
    pub fn analyze(&mut self, grid: &mut Array2<Complex64>, spec: &mut Array2<Complex64>) {
        self.fft2(grid, true);
        let k = self.cutoff as i32;
        let n = self.n as i32;
        let norm = 1.0 / (self.n * self.n) as f64;
        for a1 in 0..spec.nrows() {
            let g1 = (a1 as i32 - k).rem_euclid(n) as usize;
            for a2 in 0..spec.ncols() {
                let g2 = (a2 as i32 - k).rem_euclid(n) as usize;
                spec[(a1, a2)] = grid[(g1, g2)] * norm;
            }
        }
    }
}
