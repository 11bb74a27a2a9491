//! Reference implementations used as oracles: an independent Gauss–Legendre
//! rule and a direct transcription of the bag-mode spinors.

#![allow(dead_code)]

use num_complex::Complex64;

pub type Spinor = [Complex64; 2];

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        let mut x = (std::f64::consts::PI * (k as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite rule on `[a, b]` with `panels` equal panels.
pub fn integrate(f: impl Fn(f64) -> Complex64, a: f64, b: f64, panels: usize, rule: &[(f64, f64)]) -> Complex64 {
    let h = (b - a) / panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..panels {
        let lo = a + k as f64 * h;
        let mut s = Complex64::new(0.0, 0.0);
        for &(x, w) in rule {
            s += f(lo + 0.5 * h * (x + 1.0)) * w;
        }
        acc += s * (0.5 * h);
    }
    acc
}

/// Bag mode with wavenumber `p` on `[offset, offset + length]`, written out
/// directly from the normalized spinor formulas.
#[derive(Clone, Copy, Debug)]
pub struct RefMode {
    pub p: f64,
    pub m: f64,
    pub offset: f64,
    pub length: f64,
}

impl RefMode {
    pub fn omega(&self) -> f64 {
        (self.p * self.p + self.m * self.m).sqrt()
    }

    fn parts(&self, x: f64) -> (f64, f64, f64) {
        let w = self.omega();
        let t = self.p / (w + self.m);
        let big_n = (w * w / (2.0 * self.length * (w * w + self.m / self.length))).sqrt();
        let s = ((w + self.m) / (2.0 * w)).sqrt();
        let theta = self.p * (x - self.offset) + t.atan();
        (2.0 * big_n * s, t, theta)
    }

    /// Positive-frequency spinor at `t = 0`.
    pub fn plus(&self, x: f64) -> Spinor {
        let (amp, t, th) = self.parts(x);
        [Complex64::new(0.0, amp * th.sin()), Complex64::new(amp * t * th.cos(), 0.0)]
    }

    /// Negative-frequency spinor at `t = 0`.
    pub fn minus(&self, x: f64) -> Spinor {
        let (amp, t, th) = self.parts(x);
        [Complex64::new(amp * t * th.cos(), 0.0), Complex64::new(0.0, -amp * th.sin())]
    }
}

pub fn dot(f: &Spinor, g: &Spinor) -> Complex64 {
    f[0].conj() * g[0] + f[1].conj() * g[1]
}

/// `(f | g)` over `[a, b]`, with panels fine enough for wavenumbers up to `kmax`.
pub fn overlap(f: impl Fn(f64) -> Spinor, g: impl Fn(f64) -> Spinor, a: f64, b: f64, kmax: f64) -> Complex64 {
    let rule = gauss_legendre(20);
    let panels = (((b - a) * kmax / 4.0).ceil() as usize).max(4);
    integrate(|x| dot(&f(x), &g(x)), a, b, panels, &rule)
}
