//! Damped Newton for `L xi = q sinh(2 xi)` on a structured 2-D grid.
//!
//! `L` is the five-point Laplacian with spacings `(h1, h2)`, optionally
//! periodic in the second index. Each Newton correction solves the SPD system
//! `(-L + diag(2 q cosh(2 xi))) delta = L xi - q sinh(2 xi)` by conjugate
//! gradients preconditioned with a symmetric red-black Gauss-Seidel sweep
//! (red, black, red).

use crate::{Error, Result};

pub(crate) struct StencilProblem {
    pub n1: usize,
    pub n2: usize,
    pub h1: f64,
    pub h2: f64,
    pub periodic2: bool,
    /// Dirichlet nodes keep their initial value.
    pub fixed: Vec<bool>,
    /// Coefficient of `sinh(2 xi)`, nonnegative.
    pub q: Vec<f64>,
    /// Row scale dividing the residual to express it in the physical Laplacian.
    pub scale: Vec<f64>,
}

pub(crate) struct NewtonSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub xi_cap: f64,
    pub cg_rtol: f64,
    pub cg_max_iter: usize,
}

pub(crate) struct NewtonOutcome {
    pub values: Vec<f64>,
    /// Scaled residual at every node (zero on fixed nodes).
    pub residual: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

impl StencilProblem {
    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n2 + j
    }

    /// Calls `f(neighbor_index, weight)` for each neighbor of free node `(i, j)`.
    #[inline]
    fn for_neighbors(&self, i: usize, j: usize, mut f: impl FnMut(usize, f64)) {
        let w1 = 1.0 / (self.h1 * self.h1);
        let w2 = 1.0 / (self.h2 * self.h2);
        if i > 0 {
            f(self.idx(i - 1, j), w1);
        }
        if i + 1 < self.n1 {
            f(self.idx(i + 1, j), w1);
        }
        if self.periodic2 {
            f(self.idx(i, (j + self.n2 - 1) % self.n2), w2);
            f(self.idx(i, (j + 1) % self.n2), w2);
        } else {
            if j > 0 {
                f(self.idx(i, j - 1), w2);
            }
            if j + 1 < self.n2 {
                f(self.idx(i, j + 1), w2);
            }
        }
    }

    fn center_weight(&self) -> f64 {
        2.0 / (self.h1 * self.h1) + 2.0 / (self.h2 * self.h2)
    }

    /// `L xi - q sinh(2 xi)` at free nodes, zero elsewhere.
    pub fn raw_residual(&self, xi: &[f64]) -> Vec<f64> {
        let cw = self.center_weight();
        let mut out = vec![0.0; xi.len()];
        for i in 0..self.n1 {
            for j in 0..self.n2 {
                let p = self.idx(i, j);
                if self.fixed[p] {
                    continue;
                }
                let mut lap = -cw * xi[p];
                self.for_neighbors(i, j, |nb, w| lap += w * xi[nb]);
                out[p] = lap - self.q[p] * (2.0 * xi[p]).sinh();
            }
        }
        out
    }

    fn scaled_max(&self, raw: &[f64]) -> f64 {
        raw.iter().zip(&self.scale).map(|(r, s)| (r / s).abs()).fold(0.0, f64::max)
    }

    fn apply(&self, diag_extra: &[f64], x: &[f64], y: &mut [f64]) {
        let cw = self.center_weight();
        for i in 0..self.n1 {
            for j in 0..self.n2 {
                let p = self.idx(i, j);
                if self.fixed[p] {
                    y[p] = x[p];
                    continue;
                }
                let mut acc = (cw + diag_extra[p]) * x[p];
                self.for_neighbors(i, j, |nb, w| {
                    if !self.fixed[nb] {
                        acc -= w * x[nb];
                    }
                });
                y[p] = acc;
            }
        }
    }

    fn sweep_color(&self, diag_extra: &[f64], b: &[f64], x: &mut [f64], color: usize) {
        let cw = self.center_weight();
        for i in 0..self.n1 {
            let j0 = (color + i) % 2;
            for j in (j0..self.n2).step_by(2) {
                let p = self.idx(i, j);
                if self.fixed[p] {
                    x[p] = b[p];
                    continue;
                }
                let mut acc = b[p];
                self.for_neighbors(i, j, |nb, w| {
                    if !self.fixed[nb] {
                        acc += w * x[nb];
                    }
                });
                x[p] = acc / (cw + diag_extra[p]);
            }
        }
    }

    fn precondition(&self, diag_extra: &[f64], r: &[f64], z: &mut [f64]) {
        z.iter_mut().for_each(|v| *v = 0.0);
        self.sweep_color(diag_extra, r, z, 0);
        self.sweep_color(diag_extra, r, z, 1);
        self.sweep_color(diag_extra, r, z, 0);
    }

    fn pcg(&self, diag_extra: &[f64], b: &[f64], rtol: f64, max_iter: usize) -> Vec<f64> {
        let n = b.len();
        let dot = |a: &[f64], c: &[f64]| a.iter().zip(c).map(|(x, y)| x * y).sum::<f64>();
        let mut x = vec![0.0; n];
        let mut r = b.to_vec();
        let b_norm = dot(b, b).sqrt();
        if b_norm == 0.0 {
            return x;
        }
        let mut z = vec![0.0; n];
        self.precondition(diag_extra, &r, &mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut ap = vec![0.0; n];
        for _ in 0..max_iter {
            self.apply(diag_extra, &p, &mut ap);
            let pap = dot(&p, &ap);
            if pap <= 0.0 {
                break;
            }
            let alpha = rz / pap;
            for k in 0..n {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            if dot(&r, &r).sqrt() <= rtol * b_norm {
                break;
            }
            self.precondition(diag_extra, &r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..n {
                p[k] = z[k] + beta * p[k];
            }
        }
        x
    }

    pub fn solve(&self, init: Vec<f64>, s: &NewtonSettings) -> Result<NewtonOutcome> {
        if self.periodic2 && self.n2 % 2 == 1 {
            return Err(Error::Invalid("red-black ordering needs an even periodic count".into()));
        }
        let mut xi = init;
        let mut raw = self.raw_residual(&xi);
        let mut res = self.scaled_max(&raw);
        let mut omega = s.damping;
        let mut iterations = 0;
        while res >= s.tol {
            if iterations >= s.max_iter {
                return Err(Error::NoConvergence { iterations, residual: res });
            }
            iterations += 1;
            let diag: Vec<f64> = xi.iter().zip(&self.q).map(|(x, q)| 2.0 * q * (2.0 * x).cosh()).collect();
            let delta = self.pcg(&diag, &raw, s.cg_rtol, s.cg_max_iter);
            let mut accepted = false;
            for _ in 0..40 {
                let trial: Vec<f64> = xi.iter().zip(&delta).map(|(x, d)| x + omega * d).collect();
                let trial_raw = self.raw_residual(&trial);
                let trial_res = self.scaled_max(&trial_raw);
                if trial_res.is_finite() && trial_res < res {
                    xi = trial;
                    raw = trial_raw;
                    res = trial_res;
                    omega = (omega / s.damping).min(1.0);
                    accepted = true;
                    break;
                }
                omega *= s.damping;
            }
            if !accepted {
                return Err(Error::NoConvergence { iterations, residual: res });
            }
            let peak = xi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if peak > s.xi_cap {
                return Err(Error::Unstable { value: peak });
            }
        }
        let residual: Vec<f64> = raw.iter().zip(&self.scale).map(|(r, s)| r / s).collect();
        Ok(NewtonOutcome { values: xi, residual, residual_norm: res, iterations })
    }
}
