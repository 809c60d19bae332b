//! Adaptive Dormand–Prince 5(4) integrator for `w'' + b w' + c0 w = |w|^{p-1} w`.

pub struct ScalarOde {
    pub b: f64,
    pub c0: f64,
    pub p: f64,
}

impl ScalarOde {
    fn f(&self, y: [f64; 2]) -> [f64; 2] {
        let nl = y[0].abs().powf(self.p - 1.0) * y[0];
        [y[1], -self.b * y[1] - self.c0 * y[0] + nl]
    }

    /// Dense samples `(s, w)` at the requested times (sorted); stops early if `|w|` exceeds `cap`.
    pub fn solve(&self, y0: [f64; 2], times: &[f64], cap: f64) -> Vec<(f64, f64)> {
        const A: [[f64; 6]; 7] = [
            [0.0; 6],
            [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
            [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
            [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
            [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
            [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
            [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
        ];
        const E: [f64; 7] = [
            71.0 / 57600.0,
            0.0,
            -71.0 / 16695.0,
            71.0 / 1920.0,
            -17253.0 / 339200.0,
            22.0 / 525.0,
            -1.0 / 40.0,
        ];
        let mut out = Vec::new();
        let mut s = 0.0;
        let mut y = y0;
        let mut h: f64 = 1e-4;
        let tol = 1e-13;
        for &t in times {
            while s < t {
                let hh = h.min(t - s);
                let mut k = [[0.0; 2]; 7];
                k[0] = self.f(y);
                for i in 1..7 {
                    let mut yi = y;
                    for j in 0..i {
                        yi[0] += hh * A[i][j] * k[j][0];
                        yi[1] += hh * A[i][j] * k[j][1];
                    }
                    k[i] = self.f(yi);
                }
                let mut yn = y;
                for j in 0..6 {
                    yn[0] += hh * A[6][j] * k[j][0];
                    yn[1] += hh * A[6][j] * k[j][1];
                }
                let mut err: f64 = 0.0;
                for c in 0..2 {
                    let e: f64 = (0..7).map(|j| E[j] * k[j][c]).sum::<f64>() * hh;
                    err = err.max(e.abs() / (tol * (1.0 + yn[c].abs())));
                }
                if err <= 1.0 {
                    s += hh;
                    y = yn;
                }
                h = hh * (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
            }
            out.push((t, y[0]));
            if y[0].abs() > cap {
                break;
            }
        }
        out
    }
}
