//! Float helpers: `std`/`libm` shims, log-sum-exp, and compensated summation.
//!
//! All scoring in this crate happens in the natural-log domain, so the
//! numerically sensitive operations are concentrated here. The free functions
//! `ln`, `exp`, … exist because the inherent `f64` methods live in `std`; with
//! the `libm` feature they route to [`libm`] instead, keeping the crate
//! `no_std`-compatible.

#[cfg(feature = "std")]
mod shim {
    pub fn ln(x: f64) -> f64 {
        x.ln()
    }
    pub fn exp(x: f64) -> f64 {
        x.exp()
    }
    pub fn exp_m1(x: f64) -> f64 {
        x.exp_m1()
    }
    pub fn ln_1p(x: f64) -> f64 {
        x.ln_1p()
    }
    pub fn log2(x: f64) -> f64 {
        x.log2()
    }
}

#[cfg(not(feature = "std"))]
mod shim {
    pub fn ln(x: f64) -> f64 {
        libm::log(x)
    }
    pub fn exp(x: f64) -> f64 {
        libm::exp(x)
    }
    pub fn exp_m1(x: f64) -> f64 {
        libm::expm1(x)
    }
    pub fn ln_1p(x: f64) -> f64 {
        libm::log1p(x)
    }
    pub fn log2(x: f64) -> f64 {
        libm::log2(x)
    }
}

/// Natural logarithm.
pub fn ln(x: f64) -> f64 {
    shim::ln(x)
}

/// Natural exponential.
pub fn exp(x: f64) -> f64 {
    shim::exp(x)
}

/// `e^x - 1`, accurate for `x` near zero.
pub fn exp_m1(x: f64) -> f64 {
    shim::exp_m1(x)
}

/// `ln(1 + x)`, accurate for `x` near zero.
pub fn ln_1p(x: f64) -> f64 {
    shim::ln_1p(x)
}

/// Base-2 logarithm.
pub fn log2(x: f64) -> f64 {
    shim::log2(x)
}

/// `ln(sum_i exp(x_i))`, computed against the running maximum so that the
/// exponentials stay in range even when every `x_i` is a large negative
/// log-probability.
///
/// Returns `f64::NEG_INFINITY` for an empty slice (the log of an empty sum).
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let mut max = f64::NEG_INFINITY;
    for &x in xs {
        if x > max {
            max = x;
        }
    }
    if max == f64::NEG_INFINITY {
        // Empty input, or every term is itself -inf.
        return f64::NEG_INFINITY;
    }
    let mut acc = KahanSum::new();
    for &x in xs {
        acc.add(exp(x - max));
    }
    // The largest term contributes exp(0) = 1, so the sum is in [1, n] and
    // ln_1p(sum - 1) keeps full precision when it is barely above 1.
    max + ln_1p(acc.value() - 1.0)
}

/// Compensated (Kahan–Neumaier) summation accumulator.
///
/// Used wherever many same-sign terms of very different magnitude are added,
/// e.g. summing `e^score - 1` contributions across a thread's messages.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    /// A fresh accumulator holding zero.
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one term.
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// The compensated total.
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Sums a slice with compensation.
pub fn kahan_sum(xs: &[f64]) -> f64 {
    let mut acc = KahanSum::new();
    for &x in xs {
        acc.add(x);
    }
    acc.value()
}
