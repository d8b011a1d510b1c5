//! Bjøntegaard delta rate with monotone piecewise-cubic (PCHIP) interpolation
//! of log10(rate) over PSNR, integrated in closed form.

use crate::error::{Error, Result};

struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl Pchip {
    fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut m = vec![0.0; n];
        for i in 1..n - 1 {
            if d[i - 1] * d[i] > 0.0 {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
            }
        }
        m[0] = end_slope(h[0], h[1], d[0], d[1]);
        m[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
        Pchip { x, y, m }
    }

    /// Integral of the interpolant over `[a, b]` (within the knot range).
    fn integrate(&self, a: f64, b: f64) -> f64 {
        let mut total = 0.0;
        for i in 0..self.x.len() - 1 {
            let (x0, x1) = (self.x[i], self.x[i + 1]);
            let lo = a.max(x0);
            let hi = b.min(x1);
            if hi <= lo {
                continue;
            }
            let h = x1 - x0;
            let f = |t: f64| {
                let (t2, t3, t4) = (t * t, t * t * t, t * t * t * t);
                let h00 = t4 / 2.0 - t3 + t;
                let h10 = t4 / 4.0 - 2.0 * t3 / 3.0 + t2 / 2.0;
                let h01 = -t4 / 2.0 + t3;
                let h11 = t4 / 4.0 - t3 / 3.0;
                self.y[i] * h00
                    + h * self.m[i] * h10
                    + self.y[i + 1] * h01
                    + h * self.m[i + 1] * h11
            };
            total += h * (f((hi - x0) / h) - f((lo - x0) / h));
        }
        total
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

fn prepare(name: &str, curve: &[(f64, f64)]) -> Result<(Vec<f64>, Vec<f64>)> {
    if curve.len() < 4 {
        return Err(Error::Eval(format!(
            "{name} curve needs at least 4 points, got {}",
            curve.len()
        )));
    }
    if curve
        .iter()
        .any(|&(r, p)| r <= 0.0 || !r.is_finite() || !p.is_finite())
    {
        return Err(Error::Eval(format!(
            "{name} curve needs positive finite rates and finite PSNR"
        )));
    }
    let mut pts = curve.to_vec();
    pts.sort_by(|a, b| a.1.total_cmp(&b.1));
    if pts.windows(2).any(|w| w[1].1 <= w[0].1 || w[1].0 <= w[0].0) {
        return Err(Error::Eval(format!(
            "{name} curve is not strictly monotone"
        )));
    }
    Ok((
        pts.iter().map(|p| p.1).collect(),
        pts.iter().map(|p| p.0.log10()).collect(),
    ))
}

/// Average rate difference of `test` against `anchor` at equal PSNR, in
/// percent. Curves are `(rate, psnr)` pairs; negative means `test` saves rate.
pub fn bd_rate(anchor: &[(f64, f64)], test: &[(f64, f64)]) -> Result<f64> {
    let (xa, ya) = prepare("anchor", anchor)?;
    let (xt, yt) = prepare("test", test)?;
    let lo = xa[0].max(xt[0]);
    let hi = xa[xa.len() - 1].min(xt[xt.len() - 1]);
    if hi <= lo {
        return Err(Error::Eval("PSNR ranges do not overlap".into()));
    }
    let ia = Pchip::new(xa, ya).integrate(lo, hi);
    let it = Pchip::new(xt, yt).integrate(lo, hi);
    let avg = (it - ia) / (hi - lo);
    Ok((10f64.powf(avg) - 1.0) * 100.0)
}
