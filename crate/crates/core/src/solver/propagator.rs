//! Exact unitary propagator of the constant-coefficient stiff part.
//!
//! Per mode the symbol of `(1/ε_A)L_A + (1/ε_M)L_M` is `i·H` with `H` real
//! symmetric; one eigendecomposition `H = Q Λ Qᵀ` per mode is cached and the
//! flow for any step size is `exp(i dt Λ)` in the eigenbasis. Conjugate
//! lattice points share the decomposition with negated eigenvalues, so
//! Hermitian symmetry of the coefficients is preserved exactly.

use std::sync::Arc;

use nalgebra::SVector;
use num_complex::Complex64;

use crate::exec;
use crate::grid::GridSpec;
use crate::params::ScaleParams;
use crate::state::StateVector;
use crate::symbol::{symbol_matrix, Mat7};

pub struct StiffPropagator {
    grid: Arc<GridSpec>,
    evecs: Vec<Mat7>,
    evals: Vec<[f64; 7]>,
    max_freq: f64,
    max_freq_dealias: f64,
}

impl StiffPropagator {
    pub fn new(grid: &Arc<GridSpec>, params: &ScaleParams) -> Self {
        let n = grid.len();
        let (ca, cm) = (1.0 / params.eps_a, 1.0 / params.eps_m);
        let mut table: Vec<(Mat7, [f64; 7])> = vec![(Mat7::identity(), [0.0; 7]); n];
        {
            let g = grid.clone();
            exec::fill_indexed(&mut table, |idx| {
                if g.conj_idx(idx) < idx {
                    return (Mat7::identity(), [0.0; 7]); // filled from partner below
                }
                let (kx, ky, kz) = g.wavenumber_eff(idx);
                if (kx, ky, kz) == (0, 0, 0) {
                    return (Mat7::identity(), [0.0; 7]);
                }
                let h = symbol_matrix(kx, ky, kz, ca, cm);
                let eig = nalgebra::SymmetricEigen::new(h);
                let mut lam = [0.0; 7];
                for (i, v) in eig.eigenvalues.iter().enumerate() {
                    lam[i] = *v;
                }
                (eig.eigenvectors, lam)
            });
        }
        // Conjugate partners: H(-k) = -H(k) shares eigenvectors with Λ → -Λ.
        for idx in 0..n {
            let cidx = grid.conj_idx(idx);
            if cidx < idx {
                let (q, lam) = table[cidx];
                table[idx] = (q, lam.map(|v| -v));
            }
        }
        let mode_max = |lam: &[f64; 7]| lam.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let max_freq = table.iter().map(|(_, lam)| mode_max(lam)).fold(0.0, f64::max);
        let max_freq_dealias = table
            .iter()
            .enumerate()
            .filter(|(idx, _)| {
                let (kx, ky, kz) = grid.wavenumber(*idx);
                grid.dealias_keep(kx, ky, kz)
            })
            .map(|(_, (_, lam))| mode_max(lam))
            .fold(0.0, f64::max);
        let (evecs, evals) = table.into_iter().unzip();
        StiffPropagator {
            grid: grid.clone(),
            evecs,
            evals,
            max_freq,
            max_freq_dealias,
        }
    }

    /// Largest stiff frequency, the explicit-integrator stability bound.
    pub fn max_frequency(&self) -> f64 {
        self.max_freq
    }

    /// Largest stiff frequency over modes kept by the dealiasing mask; the
    /// stability bound when the dynamics stay band-limited.
    pub fn max_frequency_dealias(&self) -> f64 {
        self.max_freq_dealias
    }

    /// Advance the stiff sub-flow by `dt` (may be negative or fractional).
    #[allow(clippy::needless_range_loop)]
    pub fn apply(&self, state: &mut StateVector, dt: f64) {
        let grid = self.grid.clone();
        let chunk = (grid.nx * grid.ny).max(64);
        let [r, u1, u2, u3, b1, b2, b3] = split_components(state);
        let zipped: Vec<_> = r
            .chunks_mut(chunk)
            .zip(u1.chunks_mut(chunk))
            .zip(u2.chunks_mut(chunk))
            .zip(u3.chunks_mut(chunk))
            .zip(b1.chunks_mut(chunk))
            .zip(b2.chunks_mut(chunk))
            .zip(b3.chunks_mut(chunk))
            .map(|((((((a, b), c), d), e), f), g)| [a, b, c, d, e, f, g])
            .collect();
        let evecs = &self.evecs;
        let evals = &self.evals;
        let body = |(ci, comps): (usize, &mut [&mut [Complex64]; 7])| {
            let base = ci * chunk;
            let len = comps[0].len();
            for j in 0..len {
                let idx = base + j;
                let q = &evecs[idx];
                let lam = &evals[idx];
                let mut v = SVector::<Complex64, 7>::zeros();
                for c in 0..7 {
                    v[c] = comps[c][j];
                }
                let mut w = SVector::<Complex64, 7>::zeros();
                for col in 0..7 {
                    let mut acc = Complex64::default();
                    for row in 0..7 {
                        acc += q[(row, col)] * v[row];
                    }
                    let (s, c) = (dt * lam[col]).sin_cos();
                    w[col] = acc * Complex64::new(c, s);
                }
                for row in 0..7 {
                    let mut acc = Complex64::default();
                    for col in 0..7 {
                        acc += q[(row, col)] * w[col];
                    }
                    comps[row][j] = acc;
                }
            }
        };
        #[cfg(feature = "parallel")]
        if exec::parallel_enabled() {
            use rayon::prelude::*;
            let mut zipped = zipped;
            zipped
                .par_iter_mut()
                .enumerate()
                .for_each(|(ci, comps)| body((ci, comps)));
            return;
        }
        let mut zipped = zipped;
        for (ci, comps) in zipped.iter_mut().enumerate() {
            body((ci, comps));
        }
    }
}

fn split_components(state: &mut StateVector) -> [&mut [Complex64]; 7] {
    let StateVector { r, u, b } = state;
    let [u1, u2, u3] = u;
    let [b1, b2, b3] = b;
    [
        r.spectral_mut(),
        u1.spectral_mut(),
        u2.spectral_mut(),
        u3.spectral_mut(),
        b1.spectral_mut(),
        b2.spectral_mut(),
        b3.spectral_mut(),
    ]
}
