//! Small numeric helpers shared by the field accumulators.

/// Neumaier-compensated running sum.
///
/// Every field accumulation in the crate goes through this type so that the
/// result depends only on the order of the terms, which is fixed by the
/// contact and surface-point index order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub const fn new() -> Self {
        Self {
            sum: 0.0,
            compensation: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if libm::fabs(self.sum) >= libm::fabs(value) {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Compensated accumulator for a 2-vector.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KahanSum2 {
    pub x: KahanSum,
    pub y: KahanSum,
}

impl KahanSum2 {
    #[inline]
    pub fn add(&mut self, v: [f64; 2]) {
        self.x.add(v[0]);
        self.y.add(v[1]);
    }

    #[inline]
    pub fn value(&self) -> [f64; 2] {
        [self.x.value(), self.y.value()]
    }
}

#[inline]
pub fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

#[inline]
pub fn norm2(v: [f64; 2]) -> f64 {
    libm::sqrt(v[0] * v[0] + v[1] * v[1])
}

/// Squared euclidean distance between two planar points.
#[inline]
pub fn dist2_sq(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}
