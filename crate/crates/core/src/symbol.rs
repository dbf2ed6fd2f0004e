//! Per-Fourier-mode symbol of the large operator and its eigenstructure.
//!
//! At mode `(k,l,m)` the symbol of `c_A L_A + c_M L_M` is `i·H` with `H` real
//! symmetric, so eigenvalues are purely imaginary and eigenvectors can be
//! taken real. Eigen-analysis is restricted to the six-dimensional
//! divergence-constrained subspace `{(r,u,b) : (k,l,m)·b̂ = 0}`; the excluded
//! direction is a spurious invariant of the full 7×7 symbol.

use nalgebra::{SMatrix, SVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::multipliers::multipliers;

pub type Mat7 = SMatrix<f64, 7, 7>;
pub type Basis76 = SMatrix<f64, 7, 6>;
pub type Mat6 = SMatrix<f64, 6, 6>;

/// Real symmetric `H` with `symbol(c_A L_A + c_M L_M) = i·H` at mode
/// `(k,l,m)`. Component order: `(r, u₁, u₂, u₃, b₁, b₂, b₃)`.
pub fn symbol_matrix(k: i64, l: i64, m: i64, coef_a: f64, coef_m: f64) -> Mat7 {
    let (kf, lf, mf) = (k as f64, l as f64, m as f64);
    let mut h = Mat7::zeros();
    // Alfvén part: u_h rows -∇_h b₃ + ∂_z b_h; b rows (∂_z u_h, -∇_h·u_h).
    h[(1, 4)] += coef_a * mf;
    h[(1, 6)] += -coef_a * kf;
    h[(2, 5)] += coef_a * mf;
    h[(2, 6)] += -coef_a * lf;
    h[(4, 1)] += coef_a * mf;
    h[(5, 2)] += coef_a * mf;
    h[(6, 1)] += -coef_a * kf;
    h[(6, 2)] += -coef_a * lf;
    // Mach part: r row -∇·u; u rows -∇r.
    for (slot, kc) in [(1, kf), (2, lf), (3, mf)] {
        h[(0, slot)] += -coef_m * kc;
        h[(slot, 0)] += -coef_m * kc;
    }
    h
}

/// Orthonormal basis of the divergence-constrained subspace: the four
/// `(r, u)` directions plus two magnetic directions perpendicular to the
/// wavenumber.
pub fn constrained_basis(k: i64, l: i64, m: i64) -> Basis76 {
    let kv = nalgebra::Vector3::new(k as f64, l as f64, m as f64);
    debug_assert!(kv.norm() > 0.0);
    let trial = if k == 0 && l == 0 {
        nalgebra::Vector3::new(1.0, 0.0, 0.0)
    } else {
        nalgebra::Vector3::new(0.0, 0.0, 1.0)
    };
    let p1 = trial.cross(&kv).normalize();
    let p2 = kv.cross(&p1).normalize();
    let mut b = Basis76::zeros();
    for i in 0..4 {
        b[(i, i)] = 1.0;
    }
    for i in 0..3 {
        b[(4 + i, 4)] = p1[i];
        b[(4 + i, 5)] = p2[i];
    }
    b
}

/// `H` restricted to the constrained subspace (still real symmetric).
pub fn constrained_symbol(k: i64, l: i64, m: i64, coef_a: f64, coef_m: f64) -> Mat6 {
    let h = symbol_matrix(k, l, m, coef_a, coef_m);
    let b = constrained_basis(k, l, m);
    b.transpose() * h * b
}

/// Analytic rank of the slow projection's symbol on the constrained
/// subspace: 4 on horizontal modes (`m = 0`), 0 otherwise.
pub fn slow_projection_rank(_k: i64, _l: i64, m: i64) -> usize {
    if m == 0 {
        4
    } else {
        0
    }
}

/// Outcome of verifying the eigenstructure of `L_A + μ L_M` at one mode.
#[derive(Debug, Clone, Serialize)]
pub struct EigenReport {
    pub mode: (i64, i64, i64),
    pub mu: f64,
    pub zero_multiplicity: usize,
    pub p_rank: usize,
    /// `|m| μ Q̂`, the expected intermediate eigenvalue magnitude (0 if m=0).
    pub intermediate_expected: f64,
    /// Relative error of the matched ± intermediate pair (0 when m=0).
    pub intermediate_rel_err: f64,
    /// Smallest modulus among the remaining (fast) eigenvalues.
    pub nonzero_floor: f64,
    pub solver_ok: bool,
    pub pass: bool,
}

/// Numerically eigendecompose the constrained symbol of `L_A + μ L_M` and
/// check it against the analytic structure: zero-eigenvalue multiplicity
/// equals the slow projection rank, the `m ≠ 0` intermediate pair equals
/// `∓i m μ Q̂` to `rel_tol`, and everything else sits above a positive floor.
pub fn verify_eigenstructure(k: i64, l: i64, m: i64, mu: f64) -> Result<EigenReport> {
    verify_eigenstructure_tol(k, l, m, mu, 1e-9)
}

pub fn verify_eigenstructure_tol(
    k: i64,
    l: i64,
    m: i64,
    mu: f64,
    rel_tol: f64,
) -> Result<EigenReport> {
    if (k, l, m) == (0, 0, 0) {
        return Err(Error::ZeroMode);
    }
    if !(0.0..1.0).contains(&mu) {
        return Err(Error::InvalidParams(format!("mu = {mu} must lie in [0,1)")));
    }
    let h6 = constrained_symbol(k, l, m, 1.0, mu);
    let scale = h6.norm().max(1.0);
    let zero_tol = 1e-9 * scale;

    let eig = nalgebra::SymmetricEigen::try_new(h6, f64::EPSILON, 0);
    let (solver_ok, evals) = match eig {
        Some(e) if e.eigenvalues.iter().all(|v| v.is_finite()) => (true, e.eigenvalues),
        _ => (false, SVector::<f64, 6>::zeros()),
    };

    let p_rank = slow_projection_rank(k, l, m);
    if !solver_ok {
        return Ok(EigenReport {
            mode: (k, l, m),
            mu,
            zero_multiplicity: 0,
            p_rank,
            intermediate_expected: 0.0,
            intermediate_rel_err: f64::NAN,
            nonzero_floor: 0.0,
            solver_ok,
            pass: false,
        });
    }

    let mut lam: Vec<f64> = evals.iter().copied().collect();
    lam.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
    let zero_multiplicity = lam.iter().filter(|v| v.abs() <= zero_tol).count();

    let mut used = [false; 6];
    for (i, v) in lam.iter().enumerate() {
        if v.abs() <= zero_tol {
            used[i] = true;
        }
    }

    let (intermediate_expected, intermediate_rel_err) = if m != 0 {
        let q = multipliers(k, l, m, mu)?.q;
        let target = (m as f64).abs() * mu * q;
        let mut worst: f64 = 0.0;
        for sign in [1.0, -1.0] {
            let t = sign * (m as f64) * mu * q;
            let mut best = None;
            for (i, v) in lam.iter().enumerate() {
                if used[i] {
                    continue;
                }
                let err = (v - t).abs();
                if best.is_none_or(|(_, e)| err < e) {
                    best = Some((i, err));
                }
            }
            match best {
                Some((i, err)) => {
                    used[i] = true;
                    worst = worst.max(err / target.max(f64::MIN_POSITIVE));
                }
                None => worst = f64::INFINITY,
            }
        }
        (target, worst)
    } else {
        (0.0, 0.0)
    };

    let nonzero_floor = lam
        .iter()
        .enumerate()
        .filter(|(i, _)| !used[*i])
        .map(|(_, v)| v.abs())
        .fold(f64::INFINITY, f64::min);
    let nonzero_floor = if nonzero_floor.is_finite() {
        nonzero_floor
    } else {
        // All eigenvalues accounted for by the zero group and the pair.
        f64::INFINITY
    };

    let pass = zero_multiplicity == p_rank
        && (m == 0 || intermediate_rel_err <= rel_tol)
        && (nonzero_floor > zero_tol);

    Ok(EigenReport {
        mode: (k, l, m),
        mu,
        zero_multiplicity,
        p_rank,
        intermediate_expected,
        intermediate_rel_err,
        nonzero_floor: if nonzero_floor.is_finite() {
            nonzero_floor
        } else {
            0.0
        },
        solver_ok,
        pass,
    })
}
