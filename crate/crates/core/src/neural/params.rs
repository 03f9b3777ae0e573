use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Location of one tensor inside a flat parameter vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Span {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }

    #[inline]
    pub fn of<'a, S>(&self, flat: &'a [S]) -> &'a [S] {
        &flat[self.range()]
    }

    #[inline]
    pub fn of_mut<'a, S>(&self, flat: &'a mut [S]) -> &'a mut [S] {
        &mut flat[self.range()]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub name: String,
    pub offset: usize,
    pub shape: Vec<usize>,
    /// Fan-in used by the uniform initializer.
    pub fan_in: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Named tensor table describing a flat parameter vector.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    segments: Vec<Segment>,
    len: usize,
}

impl Layout {
    pub fn builder() -> LayoutBuilder {
        LayoutBuilder::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn zeros<S: Scalar>(&self) -> Vec<S> {
        vec![S::zero(); self.len]
    }

    /// Uniform `U(-1/sqrt(fan_in), 1/sqrt(fan_in))` initialization.
    pub fn init<S: Scalar, R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<S> {
        let mut out = self.zeros::<S>();
        for seg in &self.segments {
            let bound = 1.0 / (seg.fan_in.max(1) as f64).sqrt();
            for x in &mut out[seg.offset..seg.offset + seg.len()] {
                *x = S::lit(rng.random_range(-bound..=bound));
            }
        }
        out
    }
}

#[derive(Debug, Default)]
pub struct LayoutBuilder {
    segments: Vec<Segment>,
    len: usize,
}

impl LayoutBuilder {
    pub fn matrix(&mut self, name: impl Into<String>, rows: usize, cols: usize, fan_in: usize) -> Span {
        let span = Span { offset: self.len, rows, cols };
        self.segments.push(Segment { name: name.into(), offset: self.len, shape: vec![rows, cols], fan_in });
        self.len += rows * cols;
        span
    }

    pub fn vector(&mut self, name: impl Into<String>, len: usize, fan_in: usize) -> Span {
        let span = Span { offset: self.len, rows: len, cols: 1 };
        self.segments.push(Segment { name: name.into(), offset: self.len, shape: vec![len], fan_in });
        self.len += len;
        span
    }

    pub fn finish(self) -> Layout {
        Layout { segments: self.segments, len: self.len }
    }
}

/// A model whose trainable state is one flat vector described by a [`Layout`].
pub trait Parametric<S: Scalar> {
    fn layout(&self) -> &Layout;
    fn params(&self) -> &[S];
    fn params_mut(&mut self) -> &mut [S];

    fn zero_grads(&self) -> Vec<S> {
        self.layout().zeros()
    }

    fn num_params(&self) -> usize {
        self.layout().len()
    }
}

/// `y += W x` for a row-major `rows x cols` matrix.
#[inline]
pub fn gemv_acc<S: Scalar>(w: &[S], rows: usize, cols: usize, x: &[S], y: &mut [S]) {
    debug_assert_eq!(w.len(), rows * cols);
    debug_assert_eq!(x.len(), cols);
    debug_assert_eq!(y.len(), rows);
    for (r, yr) in y.iter_mut().enumerate() {
        let row = &w[r * cols..(r + 1) * cols];
        let mut acc = S::zero();
        for (a, b) in row.iter().zip(x) {
            acc += *a * *b;
        }
        *yr += acc;
    }
}

/// `dx += W^T dy` and `dW += dy x^T`.
#[inline]
pub fn gemv_backward<S: Scalar>(
    w: &[S],
    rows: usize,
    cols: usize,
    x: &[S],
    dy: &[S],
    dw: &mut [S],
    dx: Option<&mut [S]>,
) {
    for r in 0..rows {
        let g = dy[r];
        if g == S::zero() {
            continue;
        }
        let drow = &mut dw[r * cols..(r + 1) * cols];
        for (d, xi) in drow.iter_mut().zip(x) {
            *d += g * *xi;
        }
    }
    if let Some(dx) = dx {
        for r in 0..rows {
            let g = dy[r];
            if g == S::zero() {
                continue;
            }
            let row = &w[r * cols..(r + 1) * cols];
            for (d, wi) in dx.iter_mut().zip(row) {
                *d += g * *wi;
            }
        }
    }
}
