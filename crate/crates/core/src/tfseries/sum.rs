use num_complex::Complex64;

/// Neumaier-compensated accumulator for real sums.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated accumulator for complex sums (real and imaginary parts kept
/// separately).
#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancels_catastrophic_loss() {
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(v), 2.0);
    }
}
