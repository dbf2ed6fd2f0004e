//! The seven-field state `V = (r, u, b)` on one grid.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::GridSpec;

/// Number of scalar components: density-like `r`, velocity `u`, magnetic
/// perturbation `b`.
pub const N_COMPONENTS: usize = 7;

/// State vector of the scaled MHD system. The magnetic part is kept
/// spectrally divergence-free by construction or projection.
#[derive(Clone, Debug)]
pub struct StateVector {
    pub r: ScalarField,
    pub u: [ScalarField; 3],
    pub b: [ScalarField; 3],
}

impl StateVector {
    pub fn zeros(grid: &Arc<GridSpec>) -> Self {
        let z = || ScalarField::zeros(grid);
        StateVector {
            r: z(),
            u: [z(), z(), z()],
            b: [z(), z(), z()],
        }
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        self.r.grid()
    }

    pub fn component(&self, c: usize) -> &ScalarField {
        match c {
            0 => &self.r,
            1..=3 => &self.u[c - 1],
            4..=6 => &self.b[c - 4],
            _ => panic!("component index {c} out of range"),
        }
    }

    pub fn component_mut(&mut self, c: usize) -> &mut ScalarField {
        match c {
            0 => &mut self.r,
            1..=3 => &mut self.u[c - 1],
            4..=6 => &mut self.b[c - 4],
            _ => panic!("component index {c} out of range"),
        }
    }

    pub fn components(&self) -> impl Iterator<Item = &ScalarField> {
        (0..N_COMPONENTS).map(move |c| self.component(c))
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &Self) -> Result<()> {
        for c in 0..N_COMPONENTS {
            self.component_mut(c).axpy(a, other.component(c))?;
        }
        Ok(())
    }

    pub fn scale_in_place(&mut self, s: f64) {
        for c in 0..N_COMPONENTS {
            self.component_mut(c).scale_in_place(s);
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.scale_in_place(s);
        out
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

    /// `H^j` norm: root of the sum of component norm squares.
    pub fn sobolev_norm(&self, j: usize) -> f64 {
        self.components()
            .map(|f| f.sobolev_norm_sq(j))
            .sum::<f64>()
            .sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.sobolev_norm(0)
    }

    /// Weighted inner product summed over components.
    pub fn sobolev_inner(&self, other: &Self, j: usize) -> f64 {
        (0..N_COMPONENTS)
            .map(|c| self.component(c).sobolev_inner(other.component(c), j))
            .sum()
    }

    pub fn dealias_in_place(&mut self) {
        for c in 0..N_COMPONENTS {
            self.component_mut(c).dealias_in_place();
        }
    }

    /// Largest `|k·b̂(k)|` over the lattice, the spectral divergence of `b`.
    pub fn max_div_b(&self) -> f64 {
        let grid = self.grid();
        let (b1, b2, b3) = (
            self.b[0].spectral(),
            self.b[1].spectral(),
            self.b[2].spectral(),
        );
        let mut max = 0.0f64;
        for idx in 0..grid.len() {
            let (kx, ky, kz) = grid.wavenumber(idx);
            let d = (kx as f64) * b1[idx] + (ky as f64) * b2[idx] + (kz as f64) * b3[idx];
            max = max.max(d.norm());
        }
        max
    }

    /// Check `|k·b̂| ≤ tol·‖b‖₀` for all modes.
    pub fn check_div_b(&self, tol: f64) -> Result<()> {
        let scale = (self.b[0].sobolev_norm_sq(0)
            + self.b[1].sobolev_norm_sq(0)
            + self.b[2].sobolev_norm_sq(0))
        .sqrt();
        let norm = self.max_div_b();
        if norm <= tol * scale.max(f64::MIN_POSITIVE) {
            Ok(())
        } else {
            Err(Error::DivergenceViolation {
                norm,
                tol: tol * scale,
            })
        }
    }

    /// Project the magnetic part onto its divergence-free part:
    /// `b̂ ← b̂ - k (k·b̂)/|k|²`.
    pub fn project_b_div_free(&mut self) {
        let grid = self.grid().clone();
        let n = grid.len();
        let mut div: Vec<Complex64> = vec![Complex64::default(); n];
        {
            let (b1, b2, b3) = (
                self.b[0].spectral(),
                self.b[1].spectral(),
                self.b[2].spectral(),
            );
            crate::exec::fill_indexed(&mut div, |idx| {
                let (kx, ky, kz) = grid.wavenumber(idx);
                let k2 = (kx * kx + ky * ky + kz * kz) as f64;
                if k2 == 0.0 {
                    Complex64::default()
                } else {
                    ((kx as f64) * b1[idx] + (ky as f64) * b2[idx] + (kz as f64) * b3[idx]) / k2
                }
            });
        }
        let chunk = (grid.nx * grid.ny).max(64);
        for (axis, field) in self.b.iter_mut().enumerate() {
            let grid = grid.clone();
            let div = &div;
            crate::exec::for_each_chunk_mut(field.spectral_mut(), chunk, |ci, c| {
                let base = ci * chunk;
                for (j, v) in c.iter_mut().enumerate() {
                    let idx = base + j;
                    let (kx, ky, kz) = grid.wavenumber(idx);
                    let k = [kx as f64, ky as f64, kz as f64][axis];
                    *v -= k * div[idx];
                }
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{random_field, seeded_rng};

    #[test]
    fn projection_makes_b_divergence_free() {
        let grid = GridSpec::new(16, 16, 16).unwrap();
        let mut rng = seeded_rng(41);
        let mut v = StateVector::zeros(&grid);
        for axis in 0..3 {
            v.b[axis] = random_field(&grid, &mut rng, 5.0);
        }
        assert!(v.check_div_b(1e-12).is_err());
        v.project_b_div_free();
        v.check_div_b(1e-12).unwrap();
        // Idempotent.
        let before = v.clone();
        v.project_b_div_free();
        assert!(v.sub(&before).unwrap().l2_norm() < 1e-14);
    }

    #[test]
    fn norm_splits_over_components() {
        let grid = GridSpec::new(16, 16, 16).unwrap();
        let mut rng = seeded_rng(43);
        let mut v = StateVector::zeros(&grid);
        v.r = random_field(&grid, &mut rng, 5.0);
        v.u[0] = random_field(&grid, &mut rng, 5.0);
        let total = v.sobolev_norm(2);
        let byhand = (v.r.sobolev_norm_sq(2) + v.u[0].sobolev_norm_sq(2)).sqrt();
        assert!((total - byhand).abs() < 1e-13);
    }
}
