//! Real scalar fields on the torus, stored as mean-normalized spectral
//! coefficients.
//!
//! The coefficients satisfy Hermitian symmetry `f̂(-k) = conj(f̂(k))` and the
//! normalization `‖f‖₀² = Σ_k |f̂(k)|² = mean(|f|²)`, so Parseval holds with
//! no extra factors. All operations are pure; fields are values.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec;
use crate::grid::GridSpec;

/// Spatial axis of the box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Sobolev order for `H^j` norms, weight `(1+|k|²)^j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormSpec(pub usize);

impl NormSpec {
    pub fn order(&self) -> usize {
        self.0
    }

    pub fn norm(&self, f: &ScalarField) -> f64 {
        f.sobolev_norm(self.0)
    }
}

/// A real-valued scalar field in spectral representation.
#[derive(Clone)]
pub struct ScalarField {
    grid: Arc<GridSpec>,
    hat: Vec<Complex64>,
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ScalarField({:?})", self.grid)
    }
}

impl ScalarField {
    pub fn zeros(grid: &Arc<GridSpec>) -> Self {
        ScalarField {
            grid: grid.clone(),
            hat: vec![Complex64::default(); grid.len()],
        }
    }

    /// Build from physical samples (x-fastest ordering).
    pub fn from_physical(grid: &Arc<GridSpec>, phys: &[f64]) -> Result<Self> {
        Ok(ScalarField {
            grid: grid.clone(),
            hat: grid.forward(phys)?,
        })
    }

    /// Build from a function of the grid point coordinates in `[0,2π)`.
    pub fn from_fn(grid: &Arc<GridSpec>, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let (nx, ny, nz) = grid.dims();
        let tau = std::f64::consts::TAU;
        let mut phys = vec![0.0; grid.len()];
        for iz in 0..nz {
            let z = tau * iz as f64 / nz as f64;
            for iy in 0..ny {
                let y = tau * iy as f64 / ny as f64;
                for ix in 0..nx {
                    let x = tau * ix as f64 / nx as f64;
                    phys[grid.idx(ix, iy, iz)] = f(x, y, z);
                }
            }
        }
        ScalarField::from_physical(grid, &phys).expect("sizes match by construction")
    }

    /// Build directly from spectral coefficients.
    pub fn from_spectral(grid: &Arc<GridSpec>, hat: Vec<Complex64>) -> Result<Self> {
        if hat.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "spectral buffer length {} does not match grid {}",
                hat.len(),
                grid.len()
            )));
        }
        Ok(ScalarField {
            grid: grid.clone(),
            hat,
        })
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn spectral(&self) -> &[Complex64] {
        &self.hat
    }

    pub fn spectral_mut(&mut self) -> &mut [Complex64] {
        &mut self.hat
    }

    /// Physical samples, x-fastest.
    pub fn to_physical(&self) -> Vec<f64> {
        self.grid.inverse(&self.hat)
    }

    fn chunk(&self) -> usize {
        (self.grid.nx * self.grid.ny).max(64)
    }

    /// Apply a complex multiplier depending on the wavenumber triple.
    pub fn map_modes(&self, f: impl Fn(i64, i64, i64) -> Complex64 + Sync) -> Self {
        let mut out = self.clone();
        out.map_modes_in_place(f);
        out
    }

    pub fn map_modes_in_place(&mut self, f: impl Fn(i64, i64, i64) -> Complex64 + Sync) {
        let grid = self.grid.clone();
        let chunk = self.chunk();
        exec::for_each_chunk_mut(&mut self.hat, chunk, |ci, c| {
            let base = ci * chunk;
            for (j, v) in c.iter_mut().enumerate() {
                let (kx, ky, kz) = grid.wavenumber(base + j);
                *v *= f(kx, ky, kz);
            }
        });
    }

    /// Spectral derivative along an axis; Nyquist modes stay zero.
    pub fn derivative(&self, axis: Axis) -> Self {
        let grid = self.grid.clone();
        let mut out = self.clone();
        let chunk = self.chunk();
        exec::for_each_chunk_mut(&mut out.hat, chunk, |ci, c| {
            let base = ci * chunk;
            for (j, v) in c.iter_mut().enumerate() {
                let idx = base + j;
                let (kx, ky, kz) = grid.wavenumber(idx);
                let k = match axis {
                    Axis::X => kx,
                    Axis::Y => ky,
                    Axis::Z => kz,
                };
                if grid.is_nyquist(idx) {
                    *v = Complex64::default();
                } else {
                    *v *= Complex64::new(0.0, k as f64);
                }
            }
        });
        out
    }

    /// `Δ⁻¹` (or `Δ_h⁻¹`): multiply by `-1/|k|²`; kernel modes map to zero.
    pub fn inverse_laplacian(&self, horizontal_only: bool) -> Self {
        self.map_modes(|kx, ky, kz| {
            let k2 = if horizontal_only {
                (kx * kx + ky * ky) as f64
            } else {
                (kx * kx + ky * ky + kz * kz) as f64
            };
            if k2 == 0.0 {
                Complex64::default()
            } else {
                Complex64::new(-1.0 / k2, 0.0)
            }
        })
    }

    /// Keep only the `k₃ = 0` modes: the vertical average as a z-independent
    /// field on the same grid.
    pub fn vertical_average(&self) -> Self {
        let grid = self.grid.clone();
        let mut out = self.clone();
        let plane = grid.nx * grid.ny;
        exec::for_each_chunk_mut(&mut out.hat, plane, |slab_i, c| {
            if slab_i != 0 {
                for v in c {
                    *v = Complex64::default();
                }
            }
        });
        // Index 0 along z carries k₃ = 0 for any nz.
        debug_assert_eq!(grid.az.k[0], 0);
        out
    }

    /// Remove the vertical average: `(1 - ⟨·⟩_z) f`.
    pub fn remove_vertical_average(&self) -> Self {
        let grid = self.grid.clone();
        let mut out = self.clone();
        let plane = grid.nx * grid.ny;
        exec::for_each_chunk_mut(&mut out.hat, plane, |slab_i, c| {
            if slab_i == 0 {
                for v in c {
                    *v = Complex64::default();
                }
            }
        });
        out
    }

    /// Mean over the whole torus.
    pub fn full_average(&self) -> f64 {
        self.hat[0].re
    }

    /// The z-average restricted to the matching 2D grid (`k₃ = 0` plane).
    pub fn restrict_2d(&self, grid2d: &Arc<GridSpec>) -> Result<Self> {
        if grid2d.nx != self.grid.nx || grid2d.ny != self.grid.ny || grid2d.nz != 1 {
            return Err(Error::GridMismatch {
                expected: (self.grid.nx, self.grid.ny, 1),
                got: grid2d.dims(),
            });
        }
        let plane = self.grid.nx * self.grid.ny;
        ScalarField::from_spectral(grid2d, self.hat[..plane].to_vec())
    }

    /// Lift a 2D field to a z-independent field on a 3D grid.
    pub fn lift_3d(&self, grid3d: &Arc<GridSpec>) -> Result<Self> {
        if grid3d.nx != self.grid.nx || grid3d.ny != self.grid.ny || self.grid.nz != 1 {
            return Err(Error::GridMismatch {
                expected: (grid3d.nx, grid3d.ny, 1),
                got: self.grid.dims(),
            });
        }
        let mut hat = vec![Complex64::default(); grid3d.len()];
        hat[..self.hat.len()].copy_from_slice(&self.hat);
        ScalarField::from_spectral(grid3d, hat)
    }

    /// `H^j` norm with spectral weight `(1+|k|²)^j`.
    pub fn sobolev_norm(&self, j: usize) -> f64 {
        self.sobolev_norm_sq(j).sqrt()
    }

    pub fn sobolev_norm_sq(&self, j: usize) -> f64 {
        let grid = self.grid.clone();
        let chunk = self.chunk();
        exec::sum_chunks(&self.hat, chunk, |ci, c| {
            let base = ci * chunk;
            let mut s = 0.0;
            for (jj, v) in c.iter().enumerate() {
                let (kx, ky, kz) = grid.wavenumber(base + jj);
                let w = 1.0 + (kx * kx + ky * ky + kz * kz) as f64;
                s += w.powi(j as i32) * v.norm_sqr();
            }
            s
        })
    }

    /// `L²` norm (`H⁰`).
    pub fn l2_norm(&self) -> f64 {
        self.sobolev_norm(0)
    }

    /// Weighted inner product `Σ (1+|k|²)^j f̂ conj(ĝ)` (real part).
    pub fn sobolev_inner(&self, other: &Self, j: usize) -> f64 {
        let grid = self.grid.clone();
        let chunk = self.chunk();
        let other_hat = &other.hat;
        exec::sum_chunks(&self.hat, chunk, |ci, c| {
            let base = ci * chunk;
            let mut s = 0.0;
            for (jj, v) in c.iter().enumerate() {
                let idx = base + jj;
                let (kx, ky, kz) = grid.wavenumber(idx);
                let w = 1.0 + (kx * kx + ky * ky + kz * kz) as f64;
                s += w.powi(j as i32) * (*v * other_hat[idx].conj()).re;
            }
            s
        })
    }

    /// Zero all modes outside the 2/3-rule mask. Idempotent.
    pub fn dealias(&self) -> Self {
        let mut out = self.clone();
        out.dealias_in_place();
        out
    }

    pub fn dealias_in_place(&mut self) {
        let grid = self.grid.clone();
        let chunk = self.chunk();
        exec::for_each_chunk_mut(&mut self.hat, chunk, |ci, c| {
            let base = ci * chunk;
            for (j, v) in c.iter_mut().enumerate() {
                let (kx, ky, kz) = grid.wavenumber(base + j);
                if !grid.dealias_keep(kx, ky, kz) {
                    *v = Complex64::default();
                }
            }
        });
    }

    /// Max |f| over grid points (transforms to physical space).
    pub fn max_abs(&self) -> f64 {
        self.to_physical().iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    // ---- arithmetic -----------------------------------------------------

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.scale_in_place(s);
        out
    }

    pub fn scale_in_place(&mut self, s: f64) {
        exec::for_each_chunk_mut(&mut self.hat, self.grid.len().max(1), |_, c| {
            for v in c {
                *v *= s;
            }
        });
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(1.0, other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &Self) -> Result<()> {
        self.grid.check_same_dims(&other.grid)?;
        let chunk = self.chunk();
        let oh = &other.hat;
        exec::for_each_chunk_mut(&mut self.hat, chunk, |ci, c| {
            let base = ci * chunk;
            for (j, v) in c.iter_mut().enumerate() {
                *v += a * oh[base + j];
            }
        });
        Ok(())
    }

    /// Add a constant (shifts the mean).
    pub fn add_constant(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.hat[0] += c;
        out
    }
}

/// 2D Leray-Helmholtz projection `w_h - ∇_h Δ_h⁻¹ ∇_h·w_h` onto horizontally
/// divergence-free vector fields. Acts mode-wise; modes with `k_h = 0` are
/// untouched. Idempotent and self-adjoint in every `H^j`.
pub fn leray_h(w1: &ScalarField, w2: &ScalarField) -> Result<(ScalarField, ScalarField)> {
    w1.grid().check_same_dims(w2.grid())?;
    let grid = w1.grid().clone();
    let mut o1 = w1.clone();
    let mut o2 = w2.clone();
    let chunk = (grid.nx * grid.ny).max(64);
    let (h1, h2) = (o1.hat.as_mut_slice(), o2.hat.as_mut_slice());
    let pairs: Vec<(&mut [Complex64], &mut [Complex64])> =
        h1.chunks_mut(chunk).zip(h2.chunks_mut(chunk)).collect();
    let apply = |(ci, (c1, c2)): (usize, &mut (&mut [Complex64], &mut [Complex64]))| {
        let base = ci * chunk;
        for j in 0..c1.len() {
            let (kx, ky, _) = grid.wavenumber(base + j);
            let kh2 = (kx * kx + ky * ky) as f64;
            if kh2 > 0.0 {
                let div = (kx as f64) * c1[j] + (ky as f64) * c2[j];
                c1[j] -= (kx as f64) * div / kh2;
                c2[j] -= (ky as f64) * div / kh2;
            }
        }
    };
    #[cfg(feature = "parallel")]
    if exec::parallel_enabled() {
        use rayon::prelude::*;
        let mut pairs = pairs;
        pairs
            .par_iter_mut()
            .enumerate()
            .for_each(|(ci, p)| apply((ci, p)));
        return Ok((o1, o2));
    }
    let mut pairs = pairs;
    for (ci, p) in pairs.iter_mut().enumerate() {
        apply((ci, p));
    }
    Ok((o1, o2))
}

/// Pointwise product computed pseudo-spectrally: physical product of the two
/// fields, transformed back and dealiased.
pub fn product(f: &ScalarField, g: &ScalarField) -> Result<ScalarField> {
    f.grid().check_same_dims(g.grid())?;
    let fp = f.to_physical();
    let gp = g.to_physical();
    let prod: Vec<f64> = fp.iter().zip(gp.iter()).map(|(a, b)| a * b).collect();
    let mut out = ScalarField::from_physical(f.grid(), &prod)?;
    out.dealias_in_place();
    Ok(out)
}
