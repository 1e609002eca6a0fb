//! Time series on a uniform grid and the trapezoidal convolution engine.
//!
//! `(a ⋆ b)(t) = ∫₀ᵗ a(t − τ) b(τ) dτ`, evaluated at `t_k = kΔt` with the
//! composite trapezoidal rule over the `k + 1` available samples.

use crate::error::{invalid, Result};

/// What one sample of a series represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// A single number per instant.
    Scalar,
    /// One value per grid cell.
    Cell,
    /// One velocity component per grid face.
    Face,
    /// One value per face of some boundary face set.
    Boundary,
}

impl Kind {
    pub fn is_vector(self) -> bool {
        self == Kind::Face
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pairing {
    ScalarScalar,
    ScalarVector,
    /// Entrywise product of face components; the dot product is completed by
    /// the face quadrature that follows.
    VectorVector,
}

impl Pairing {
    pub fn infer(a: Kind, b: Kind) -> Pairing {
        match (a.is_vector(), b.is_vector()) {
            (false, false) => Pairing::ScalarScalar,
            (true, true) => Pairing::VectorVector,
            _ => Pairing::ScalarVector,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    dt: f64,
    kind: Kind,
    width: usize,
    samples: usize,
    data: Vec<f64>,
}

impl TimeSeries {
    /// Builds a series from `samples` stacked sample-major (`steps + 1` samples of
    /// `width` values each).
    pub fn new(dt: f64, kind: Kind, width: usize, data: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return invalid(format!("time step must be positive, got {dt}"));
        }
        if width == 0 || !data.len().is_multiple_of(width) {
            return invalid(format!("{} values do not split into samples of width {width}", data.len()));
        }
        let samples = data.len() / width;
        if samples < 2 {
            return invalid("a time series needs at least two samples");
        }
        if kind == Kind::Scalar && width != 1 {
            return invalid("scalar series must have width 1");
        }
        Ok(Self { dt, kind, width, samples, data })
    }

    /// Zero series; `width` may be 0 (e.g. data on an empty boundary set).
    pub fn zeros(dt: f64, steps: usize, kind: Kind, width: usize) -> Self {
        assert!(dt > 0.0 && steps >= 1);
        Self { dt, kind, width, samples: steps + 1, data: vec![0.0; (steps + 1) * width] }
    }

    pub fn constant(dt: f64, steps: usize, kind: Kind, value: &[f64]) -> Self {
        let mut s = Self::zeros(dt, steps, kind, value.len());
        for k in 0..=steps {
            s.sample_mut(k).copy_from_slice(value);
        }
        s
    }

    pub fn from_fn(dt: f64, steps: usize, kind: Kind, width: usize, mut f: impl FnMut(f64, &mut [f64])) -> Self {
        let mut s = Self::zeros(dt, steps, kind, width);
        for k in 0..=steps {
            let t = k as f64 * dt;
            f(t, s.sample_mut(k));
        }
        s
    }

    pub fn scalar_fn(dt: f64, steps: usize, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(dt, steps, Kind::Scalar, 1, |t, out| out[0] = f(t))
    }

    pub fn from_samples(dt: f64, kind: Kind, samples: &[Vec<f64>]) -> Result<Self> {
        let width = samples.first().map_or(0, Vec::len);
        if samples.iter().any(|s| s.len() != width) {
            return invalid("samples of unequal width");
        }
        Self::new(dt, kind, width, samples.concat())
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of steps N; there are N + 1 samples.
    pub fn steps(&self) -> usize {
        self.samples - 1
    }

    pub fn len(&self) -> usize {
        self.steps() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn sample(&self, k: usize) -> &[f64] {
        &self.data[k * self.width..(k + 1) * self.width]
    }

    pub fn sample_mut(&mut self, k: usize) -> &mut [f64] {
        let w = self.width;
        &mut self.data[k * w..(k + 1) * w]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Values of a width-1 series.
    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.sample(k)[0]).collect()
    }

    pub fn last(&self) -> &[f64] {
        self.sample(self.steps())
    }

    pub fn with_kind(mut self, kind: Kind) -> Self {
        self.kind = kind;
        self
    }

    pub fn check_axis(&self, other: &TimeSeries) -> Result<()> {
        if self.steps() != other.steps() {
            return invalid(format!("step counts differ: {} vs {}", self.steps(), other.steps()));
        }
        if (self.dt - other.dt).abs() > 1e-12 * self.dt.max(other.dt) {
            return invalid(format!("time steps differ: {} vs {}", self.dt, other.dt));
        }
        Ok(())
    }

    fn check_same(&self, other: &TimeSeries) -> Result<()> {
        self.check_axis(other)?;
        if self.width != other.width {
            return invalid(format!("widths differ: {} vs {}", self.width, other.width));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { data: self.data.iter().map(|&x| f(x)).collect(), ..self.clone() }
    }

    /// Multiplies entry `x` of every sample by `w[x]`.
    pub fn scale_entries(&self, w: &[f64]) -> Self {
        assert_eq!(w.len(), self.width);
        let mut out = self.clone();
        for k in 0..self.len() {
            for (v, s) in out.sample_mut(k).iter_mut().zip(w) {
                *v *= s;
            }
        }
        out
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &TimeSeries) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + c * b).collect(),
            ..self.clone()
        })
    }

    pub fn add(&self, other: &TimeSeries) -> Result<Self> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &TimeSeries) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|x| c * x)
    }

    /// Applies `f` to each sample, producing a series of possibly different width.
    pub fn map_samples(&self, kind: Kind, width: usize, mut f: impl FnMut(&[f64], &mut [f64])) -> Self {
        let mut out = Self::zeros(self.dt, self.steps(), kind, width);
        for k in 0..self.len() {
            let src = self.sample(k);
            f(src, out.sample_mut(k));
        }
        out
    }

    /// `Σ_x w[x] · sample_k[x]` for every `k`, as a scalar series.
    pub fn weighted_sum(&self, w: &[f64]) -> Self {
        assert_eq!(w.len(), self.width);
        self.map_samples(Kind::Scalar, 1, |s, o| o[0] = s.iter().zip(w).map(|(a, b)| a * b).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

fn result_shape(a: &TimeSeries, b: &TimeSeries, pairing: Pairing) -> Result<(Kind, usize)> {
    a.check_axis(b)?;
    let width = match (a.width, b.width) {
        (x, y) if x == y => x,
        (1, y) if a.kind == Kind::Scalar => y,
        (x, 1) if b.kind == Kind::Scalar => x,
        (x, y) => return invalid(format!("incompatible widths {x} and {y}")),
    };
    let kind = match pairing {
        Pairing::ScalarScalar => {
            if a.kind.is_vector() || b.kind.is_vector() {
                return invalid("scalar·scalar pairing given a vector operand");
            }
            if a.kind == Kind::Scalar {
                b.kind
            } else {
                a.kind
            }
        }
        Pairing::ScalarVector => {
            if a.kind.is_vector() == b.kind.is_vector() {
                return invalid("scalar·vector pairing needs exactly one vector operand");
            }
            Kind::Face
        }
        Pairing::VectorVector => {
            if !(a.kind.is_vector() && b.kind.is_vector()) {
                return invalid("vector·vector pairing needs two vector operands");
            }
            Kind::Face
        }
    };
    Ok((kind, width))
}

/// Trapezoidal convolution. Sample 0 of the result is zero.
pub fn convolve(a: &TimeSeries, b: &TimeSeries, pairing: Pairing) -> Result<TimeSeries> {
    let (kind, width) = result_shape(a, b, pairing)?;
    let n = a.steps();
    let dt = a.dt;
    let ia = |k: usize, x: usize| if a.width == 1 { a.data[k] } else { a.data[k * a.width + x] };
    let ib = |k: usize, x: usize| if b.width == 1 { b.data[k] } else { b.data[k * b.width + x] };
    let mut out = TimeSeries::zeros(dt, n, kind, width);
    for k in 1..=n {
        let s = out.sample_mut(k);
        for (x, sx) in s.iter_mut().enumerate() {
            // Neumaier-compensated sum.
            let mut acc = 0.5 * (ia(k, x) * ib(0, x) + ia(0, x) * ib(k, x));
            let mut comp = 0.0;
            for j in 1..k {
                let v = ia(k - j, x) * ib(j, x);
                let t = acc + v;
                comp += if acc.abs() >= v.abs() { (acc - t) + v } else { (v - t) + acc };
                acc = t;
            }
            *sx = dt * (acc + comp);
        }
    }
    Ok(out)
}

/// Convolution with the pairing inferred from the operand kinds.
pub fn conv(a: &TimeSeries, b: &TimeSeries) -> Result<TimeSeries> {
    convolve(a, b, Pairing::infer(a.kind, b.kind))
}

/// Running trapezoidal integral, `1 ⋆ a`.
pub fn one_star(a: &TimeSeries) -> TimeSeries {
    let mut out = TimeSeries::zeros(a.dt, a.steps(), a.kind, a.width);
    let h = 0.5 * a.dt;
    for k in 1..a.len() {
        for x in 0..a.width {
            let prev = out.data[(k - 1) * a.width + x];
            out.data[k * a.width + x] = prev + h * (a.data[(k - 1) * a.width + x] + a.data[k * a.width + x]);
        }
    }
    out
}

/// Second-order time derivative: centred inside, one-sided at both ends.
pub fn time_derivative(a: &TimeSeries) -> Result<TimeSeries> {
    let n = a.steps();
    if n < 2 {
        return invalid("time derivative needs at least two steps");
    }
    let w = a.width;
    let d = &a.data;
    let inv = 1.0 / (2.0 * a.dt);
    let mut out = TimeSeries::zeros(a.dt, n, a.kind, w);
    for x in 0..w {
        out.data[x] = (-3.0 * d[x] + 4.0 * d[w + x] - d[2 * w + x]) * inv;
        for k in 1..n {
            out.data[k * w + x] = (d[(k + 1) * w + x] - d[(k - 1) * w + x]) * inv;
        }
        out.data[n * w + x] = (3.0 * d[n * w + x] - 4.0 * d[(n - 1) * w + x] + d[(n - 2) * w + x]) * inv;
    }
    Ok(out)
}

/// `(a ⋆ b) ⋆ c` with pairings inferred from the operand kinds.
pub fn triple_convolve(a: &TimeSeries, b: &TimeSeries, c: &TimeSeries) -> Result<TimeSeries> {
    let ab = conv(a, b)?;
    conv(&ab, c)
}

/// `x(0)·y(t)` entrywise, with width-1 scalar broadcast as in `convolve`.
fn initial_times(x: &TimeSeries, y: &TimeSeries, kind: Kind, width: usize) -> TimeSeries {
    let x0 = x.sample(0).to_vec();
    let mut out = TimeSeries::zeros(y.dt, y.steps(), kind, width);
    for k in 0..y.len() {
        let ys = y.sample(k);
        for (i, o) in out.sample_mut(k).iter_mut().enumerate() {
            let a = if x0.len() == 1 { x0[0] } else { x0[i] };
            let b = if ys.len() == 1 { ys[0] } else { ys[i] };
            *o = a * b;
        }
    }
    out
}

/// `a⋆ḃ − ȧ⋆b − [a(0)·b(t) − a(t)·b(0)]`, which vanishes for exact
/// convolutions of smooth series.
pub fn derivative_swap_defect(a: &TimeSeries, b: &TimeSeries) -> Result<TimeSeries> {
    let lhs = conv(a, &time_derivative(b)?)?.sub(&conv(&time_derivative(a)?, b)?)?;
    let (kind, width) = (lhs.kind, lhs.width);
    let bracket = initial_times(a, b, kind, width).sub(&initial_times(b, a, kind, width))?;
    lhs.sub(&bracket)
}

/// `d(a⋆b)/dt − a(0)·b(t) − ȧ⋆b`.
pub fn product_rule_defect(a: &TimeSeries, b: &TimeSeries) -> Result<TimeSeries> {
    let ab = conv(a, b)?;
    let (kind, width) = (ab.kind, ab.width);
    time_derivative(&ab)?.sub(&initial_times(a, b, kind, width))?.sub(&conv(&time_derivative(a)?, b)?)
}

/// `d(1⋆a)/dt − a`.
pub fn leibniz_defect(a: &TimeSeries) -> Result<TimeSeries> {
    time_derivative(&one_star(a))?.sub(a)
}
