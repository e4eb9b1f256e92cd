//! Compensated (Neumaier) summation for real and complex accumulators.

use crate::Complex;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bp = s - a;
    let err = (a - (s - bp)) + (b - bp);
    (s, err)
}

/// Running sum carrying a second word of error compensation.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    hi: f64,
    lo: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.hi, x);
        self.hi = s;
        self.lo += e;
    }

    #[inline]
    pub fn sum(&self) -> f64 {
        self.hi + self.lo
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct ComplexSum {
    re: NeumaierSum,
    im: NeumaierSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    pub fn sum(&self) -> Complex {
        Complex::new(self.re.sum(), self.im.sum())
    }
}

impl Extend<f64> for NeumaierSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

impl Extend<Complex> for ComplexSum {
    fn extend<I: IntoIterator<Item = Complex>>(&mut self, iter: I) {
        for z in iter {
            self.add(z);
        }
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut acc = NeumaierSum::new();
    acc.extend(iter);
    acc.sum()
}

pub fn compensated_sum_complex<I: IntoIterator<Item = Complex>>(iter: I) -> Complex {
    let mut acc = ComplexSum::new();
    acc.extend(iter);
    acc.sum()
}
