//! Discretization of the periodic box: wavenumber lattice, dealiasing mask
//! and FFT plans.
//!
//! The domain is fixed to `[0, 2π)` per axis so wavenumbers are integers.
//! `nz = 1` marks a two-dimensional horizontal grid.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::exec;

/// Wavenumbers of one axis in FFT storage order, with the Nyquist index
/// flagged. The lattice spans `-n/2+1 ..= n/2`; operators treat the Nyquist
/// mode as zero.
#[derive(Debug, Clone)]
pub struct AxisWavenumbers {
    pub k: Vec<i64>,
    pub nyquist: Vec<bool>,
    /// Largest retained |k| of the 2/3-rule mask (strict: 3*kmax < n).
    pub dealias_kmax: i64,
}

fn axis_wavenumbers(n: usize) -> AxisWavenumbers {
    let mut k = Vec::with_capacity(n);
    let mut nyquist = vec![false; n];
    for i in 0..n {
        if i <= n / 2 {
            k.push(i as i64);
        } else {
            k.push(i as i64 - n as i64);
        }
    }
    if n > 1 {
        nyquist[n / 2] = true;
    }
    let dealias_kmax = if n == 1 { 0 } else { ((n - 1) / 3) as i64 };
    AxisWavenumbers {
        k,
        nyquist,
        dealias_kmax,
    }
}

struct AxisPlans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Grid of a periodic box `[0,2π)³` (or `[0,2π)²` when `nz = 1`).
///
/// Holds the integer wavenumber lattice, the 2/3-rule dealiasing mask and the
/// FFT plans every transform on this grid shares. Cheap to share via `Arc`.
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub ax: AxisWavenumbers,
    pub ay: AxisWavenumbers,
    pub az: AxisWavenumbers,
    plans_x: AxisPlans,
    plans_y: AxisPlans,
    plans_z: Option<AxisPlans>,
}

impl std::fmt::Debug for GridSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GridSpec({}x{}x{})", self.nx, self.ny, self.nz)
    }
}

impl GridSpec {
    /// Build a 3D grid; all axis sizes must be even and positive.
    pub fn new(nx: usize, ny: usize, nz: usize) -> Result<Arc<Self>> {
        if nx == 0 || ny == 0 || nz == 0 {
            return Err(Error::InvalidGrid("zero axis size".into()));
        }
        if !nx.is_multiple_of(2) || !ny.is_multiple_of(2) || (nz != 1 && !nz.is_multiple_of(2)) {
            return Err(Error::InvalidGrid(format!(
                "axis sizes must be even (nz may be 1 for a 2D grid): {nx}x{ny}x{nz}"
            )));
        }
        let mut planner = FftPlanner::new();
        let mut plans = |n: usize| AxisPlans {
            forward: planner.plan_fft(n, FftDirection::Forward),
            inverse: planner.plan_fft(n, FftDirection::Inverse),
        };
        let plans_x = plans(nx);
        let plans_y = plans(ny);
        let plans_z = if nz > 1 { Some(plans(nz)) } else { None };
        Ok(Arc::new(GridSpec {
            nx,
            ny,
            nz,
            ax: axis_wavenumbers(nx),
            ay: axis_wavenumbers(ny),
            az: axis_wavenumbers(nz),
            plans_x,
            plans_y,
            plans_z,
        }))
    }

    /// 2D horizontal grid of the same horizontal resolution.
    pub fn new_2d(nx: usize, ny: usize) -> Result<Arc<Self>> {
        Self::new(nx, ny, 1)
    }

    pub fn is_2d(&self) -> bool {
        self.nz == 1
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nz)
    }

    pub fn same_dims(&self, other: &GridSpec) -> bool {
        self.dims() == other.dims()
    }

    pub fn check_same_dims(&self, other: &GridSpec) -> Result<()> {
        if self.same_dims(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                expected: self.dims(),
                got: other.dims(),
            })
        }
    }

    /// Flat index of lattice point `(ix, iy, iz)`, x-fastest.
    #[inline]
    pub fn idx(&self, ix: usize, iy: usize, iz: usize) -> usize {
        ix + self.nx * (iy + self.ny * iz)
    }

    /// Wavenumber triple at a flat index.
    #[inline]
    pub fn wavenumber(&self, idx: usize) -> (i64, i64, i64) {
        let ix = idx % self.nx;
        let iy = (idx / self.nx) % self.ny;
        let iz = idx / (self.nx * self.ny);
        (self.ax.k[ix], self.ay.k[iy], self.az.k[iz])
    }

    /// Wavenumber triple with Nyquist axes treated as zero — the effective
    /// lattice seen by derivative operators and per-mode symbols.
    #[inline]
    pub fn wavenumber_eff(&self, idx: usize) -> (i64, i64, i64) {
        let ix = idx % self.nx;
        let iy = (idx / self.nx) % self.ny;
        let iz = idx / (self.nx * self.ny);
        (
            if self.ax.nyquist[ix] { 0 } else { self.ax.k[ix] },
            if self.ay.nyquist[iy] { 0 } else { self.ay.k[iy] },
            if self.az.nyquist[iz] { 0 } else { self.az.k[iz] },
        )
    }

    /// Whether any axis of the flat index sits on its Nyquist mode.
    #[inline]
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let ix = idx % self.nx;
        let iy = (idx / self.nx) % self.ny;
        let iz = idx / (self.nx * self.ny);
        self.ax.nyquist[ix] || self.ay.nyquist[iy] || self.az.nyquist[iz]
    }

    /// 2/3-rule box mask: true when the mode is kept. `mask(0,0,0)` is true.
    #[inline]
    pub fn dealias_keep(&self, kx: i64, ky: i64, kz: i64) -> bool {
        kx.abs() <= self.ax.dealias_kmax
            && ky.abs() <= self.ay.dealias_kmax
            && (self.nz == 1 || kz.abs() <= self.az.dealias_kmax)
    }

    /// Index of the conjugate lattice point (negated wavenumbers).
    #[inline]
    pub fn conj_idx(&self, idx: usize) -> usize {
        let ix = idx % self.nx;
        let iy = (idx / self.nx) % self.ny;
        let iz = idx / (self.nx * self.ny);
        let cx = (self.nx - ix) % self.nx;
        let cy = (self.ny - iy) % self.ny;
        let cz = (self.nz - iz) % self.nz;
        self.idx(cx, cy, cz)
    }

    /// Forward transform of real samples (x-fastest) into mean-normalized
    /// spectral coefficients: `f̂(0) = mean(f)` and `Σ|f̂|² = mean(|f|²)`.
    pub fn forward(&self, phys: &[f64]) -> Result<Vec<Complex64>> {
        if phys.len() != self.len() {
            return Err(Error::InvalidGrid(format!(
                "physical buffer length {} does not match grid {}",
                phys.len(),
                self.len()
            )));
        }
        let mut data: Vec<Complex64> = phys.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft_all_axes(&mut data, true);
        let scale = 1.0 / self.len() as f64;
        exec::for_each_chunk_mut(&mut data, self.nx.max(64), |_, c| {
            for v in c {
                *v *= scale;
            }
        });
        Ok(data)
    }

    /// Inverse transform of spectral coefficients to real samples.
    pub fn inverse(&self, hat: &[Complex64]) -> Vec<f64> {
        assert_eq!(hat.len(), self.len());
        let mut data = hat.to_vec();
        self.fft_all_axes(&mut data, false);
        data.iter().map(|v| v.re).collect()
    }

    /// Inverse transform keeping the complex samples (used by tests).
    pub fn inverse_complex(&self, hat: &[Complex64]) -> Vec<Complex64> {
        let mut data = hat.to_vec();
        self.fft_all_axes(&mut data, false);
        data
    }

    fn fft_all_axes(&self, data: &mut [Complex64], forward: bool) {
        self.fft_axis_x(data, forward);
        self.fft_axis_y(data, forward);
        if self.plans_z.is_some() {
            self.fft_axis_z(data, forward);
        }
    }

    fn plan(&self, plans: &AxisPlans, forward: bool) -> Arc<dyn Fft<f64>> {
        if forward {
            plans.forward.clone()
        } else {
            plans.inverse.clone()
        }
    }

    fn fft_axis_x(&self, data: &mut [Complex64], forward: bool) {
        let fft = self.plan(&self.plans_x, forward);
        let nx = self.nx;
        exec::for_each_chunk_mut(data, nx * self.ny, |_, slab| {
            let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
            for row in slab.chunks_mut(nx) {
                fft.process_with_scratch(row, &mut scratch);
            }
        });
    }

    fn fft_axis_y(&self, data: &mut [Complex64], forward: bool) {
        let fft = self.plan(&self.plans_y, forward);
        let (nx, ny) = (self.nx, self.ny);
        exec::for_each_chunk_mut(data, nx * ny, |_, slab| {
            let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
            let mut line = vec![Complex64::default(); ny];
            for ix in 0..nx {
                for iy in 0..ny {
                    line[iy] = slab[ix + nx * iy];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for iy in 0..ny {
                    slab[ix + nx * iy] = line[iy];
                }
            }
        });
    }

    fn fft_axis_z(&self, data: &mut [Complex64], forward: bool) {
        let fft = self.plan(self.plans_z.as_ref().unwrap(), forward);
        let (nx, ny, nz) = (self.nx, self.ny, self.nz);
        let plane = nx * ny;
        // Transpose to z-fastest, transform contiguous lines, transpose back.
        let mut scratch_buf = vec![Complex64::default(); data.len()];
        {
            let src = &*data;
            exec::fill_indexed(&mut scratch_buf, |j| {
                let iz = j % nz;
                let h = j / nz;
                src[h + plane * iz]
            });
        }
        exec::for_each_chunk_mut(&mut scratch_buf, nz, |_, line| {
            let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
            fft.process_with_scratch(line, &mut scratch);
        });
        {
            let src = &scratch_buf;
            exec::fill_indexed(data, |j| {
                let h = j % plane;
                let iz = j / plane;
                src[iz + nz * h]
            });
        }
    }
}
