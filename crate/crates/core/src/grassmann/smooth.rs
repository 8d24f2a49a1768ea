//! The smooth transition function used by radial cutoffs.
//!
//! `step(u)` is 0 for `u <= lo`, 1 for `u >= hi` and C-infinity in between,
//! built from `h(t) = exp(-1/t)`. Derivatives are computed with truncated
//! Taylor arithmetic.

/// Truncated power series `c[0] + c[1] e + ... + c[len-1] e^(len-1)`.
#[derive(Clone, Debug)]
struct Series(Vec<f64>);

impl Series {
    fn linear(a: f64, b: f64, len: usize) -> Self {
        let mut c = vec![0.0; len];
        c[0] = a;
        if len > 1 {
            c[1] = b;
        }
        Series(c)
    }

    fn mul(&self, o: &Series) -> Series {
        let n = self.0.len();
        let mut c = vec![0.0; n];
        for i in 0..n {
            for j in 0..n - i {
                c[i + j] += self.0[i] * o.0[j];
            }
        }
        Series(c)
    }

    fn add(&self, o: &Series) -> Series {
        Series(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    fn recip(&self) -> Series {
        let n = self.0.len();
        let mut r = vec![0.0; n];
        r[0] = 1.0 / self.0[0];
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| self.0[j] * r[k - j]).sum();
            r[k] = -s * r[0];
        }
        Series(r)
    }

    fn exp(&self) -> Series {
        let n = self.0.len();
        let mut e = vec![0.0; n];
        e[0] = self.0[0].exp();
        // e' = a' e  =>  k e_k = sum_j j a_j e_{k-j}
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| j as f64 * self.0[j] * e[k - j]).sum();
            e[k] = s / k as f64;
        }
        Series(e)
    }
}

fn h_series(t: f64, dir: f64, len: usize) -> Series {
    if t <= 0.0 {
        return Series(vec![0.0; len]);
    }
    let mut inv = Series::linear(t, dir, len).recip();
    for c in inv.0.iter_mut() {
        *c = -*c;
    }
    inv.exp()
}

/// `d`-th derivative of the transition from `lo` to `hi`, evaluated at `u`.
pub fn step_derivative(lo: f64, hi: f64, d: u32, u: f64) -> f64 {
    let width = hi - lo;
    let t = (u - lo) / width;
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return if d == 0 { 1.0 } else { 0.0 };
    }
    let len = d as usize + 1;
    let a = h_series(t, 1.0, len);
    let b = h_series(1.0 - t, -1.0, len);
    let s = a.mul(&a.add(&b).recip());
    let mut fact = 1.0;
    for k in 1..=d {
        fact *= k as f64;
    }
    s.0[d as usize] * fact / width.powi(d as i32)
}
