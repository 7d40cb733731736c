#![allow(dead_code)]

//! References shared by the integration tests, independent of the crate's code.

/// `(A, k, s, h(s))` by tanh-sinh at 50 digits; see `tests/oracles/catenoid_height.py`.
#[allow(clippy::excessive_precision)]
pub const CATENOID_HEIGHT_ORACLE: [(f64, f64, f64, f64); 4] = [
    (1.0, 1.0, 2.0, 1.035_148_479_673_607_540_099_528_796_823_997_3),
    (1.0, 1.0, 1.5, 0.839_053_941_277_675_195_545_223_631_273_041_43),
    (1.0, 1.0, 5.0, 1.297_552_271_271_019_308_037_262_086_637_623_6),
    (0.5, 2.0, 3.0, 0.503_487_075_098_750_785_086_177_382_797_632_38),
];

/// Radial reference solution for `xi'' + xi'/r = kappa sinh(2 xi)` on
/// `[r0, r1]` with `xi(r0) = b`, `xi(r1) = 0`: uniform grid in `r`, Newton
/// with a tridiagonal solve, and one Richardson step between `n` and `2n`
/// intervals.
pub struct RadialOracle {
    pub r0: f64,
    pub h: f64,
    pub values: Vec<f64>,
    pub kappa: f64,
}

fn solve_uniform(r0: f64, r1: f64, b: f64, kappa: f64, n: usize) -> Vec<f64> {
    let h = (r1 - r0) / n as f64;
    let mut x: Vec<f64> = (0..=n).map(|i| b * (1.0 - i as f64 / n as f64)).collect();
    for _ in 0..60 {
        let mut sub = vec![0.0; n + 1];
        let mut diag = vec![1.0; n + 1];
        let mut sup = vec![0.0; n + 1];
        let mut rhs = vec![0.0; n + 1];
        for i in 1..n {
            let r = r0 + i as f64 * h;
            let (lo, hi) = (1.0 / (h * h) - 1.0 / (2.0 * h * r), 1.0 / (h * h) + 1.0 / (2.0 * h * r));
            let f = lo * x[i - 1] - 2.0 * x[i] / (h * h) + hi * x[i + 1] - kappa * (2.0 * x[i]).sinh();
            sub[i] = lo;
            diag[i] = -2.0 / (h * h) - 2.0 * kappa * (2.0 * x[i]).cosh();
            sup[i] = hi;
            rhs[i] = -f;
        }
        // Thomas algorithm; boundary rows are identity with zero right side.
        for i in 1..=n {
            let w = sub[i] / diag[i - 1];
            diag[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut d = vec![0.0; n + 1];
        d[n] = rhs[n] / diag[n];
        for i in (0..n).rev() {
            d[i] = (rhs[i] - sup[i] * d[i + 1]) / diag[i];
        }
        let step = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..=n {
            x[i] += d[i];
        }
        // Quadratic convergence stalls at the round-off floor of the fine grid.
        if step < 1e-10 {
            return x;
        }
    }
    panic!("radial oracle did not converge");
}

impl RadialOracle {
    pub fn new(r0: f64, r1: f64, b: f64, kappa: f64, n: usize) -> Self {
        let coarse = solve_uniform(r0, r1, b, kappa, n);
        let fine = solve_uniform(r0, r1, b, kappa, 2 * n);
        let values = (0..=n).map(|i| (4.0 * fine[2 * i] - coarse[i]) / 3.0).collect();
        Self { r0, h: (r1 - r0) / n as f64, values, kappa }
    }

    fn stencil(&self, r: f64) -> (usize, f64) {
        let n = self.values.len() - 1;
        let s = (r - self.r0) / self.h;
        let i = (s.floor() as isize).clamp(1, n as isize - 2) as usize;
        (i, s - i as f64)
    }

    /// Cubic Lagrange interpolation through nodes `i-1..=i+2`.
    pub fn value(&self, r: f64) -> f64 {
        let (i, u) = self.stencil(r);
        let v = &self.values;
        let w = [
            -u * (u - 1.0) * (u - 2.0) / 6.0,
            (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0,
            -(u + 1.0) * u * (u - 2.0) / 2.0,
            (u + 1.0) * u * (u - 1.0) / 6.0,
        ];
        w[0] * v[i - 1] + w[1] * v[i] + w[2] * v[i + 1] + w[3] * v[i + 2]
    }

    pub fn derivative(&self, r: f64) -> f64 {
        let (i, u) = self.stencil(r);
        let v = &self.values;
        let w = [
            -(3.0 * u * u - 6.0 * u + 2.0) / 6.0,
            (3.0 * u * u - 4.0 * u - 1.0) / 2.0,
            -(3.0 * u * u - 2.0 * u - 2.0) / 2.0,
            (3.0 * u * u - 1.0) / 6.0,
        ];
        (w[0] * v[i - 1] + w[1] * v[i] + w[2] * v[i + 1] + w[3] * v[i + 2]) / self.h
    }

    /// Intrinsic curvature of `4 cosh^2(xi) |dz|^2` for the radial profile.
    pub fn surface_curvature(&self, r: f64) -> f64 {
        let (x, dx) = (self.value(r), self.derivative(r));
        let ch = x.cosh();
        let lap_lncosh = x.tanh() * self.kappa * (2.0 * x).sinh() + dx * dx / (ch * ch);
        -lap_lncosh / (4.0 * ch * ch)
    }
}
