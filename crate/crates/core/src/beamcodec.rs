//! DFT codebooks and exhaustive beam-pair evaluation.
//!
//! A beam pair `(p, q)` (transmit beam `p`, receive beam `q`) is flattened
//! row-major to `i = p * N_r + q`. The equivalent channel of a pair is
//! `y = w_q^H H f_p`, and the optimal pair is the first index maximizing
//! `|y|`.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::channel::ChannelMatrix;
use crate::{Error, Result};

/// A set of `N` orthonormal beams of length `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    n: usize,
    beams: Vec<Vec<Complex64>>,
}

impl Codebook {
    pub fn antennas(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.beams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beams.is_empty()
    }

    pub fn beam(&self, index: usize) -> &[Complex64] {
        &self.beams[index]
    }

    pub fn beams(&self) -> impl Iterator<Item = &[Complex64]> {
        self.beams.iter().map(Vec::as_slice)
    }
}

/// Beam `q` has element `n` equal to `exp(j 2 pi n q / N) / sqrt(N)`.
pub fn dft_codebook(n: usize) -> Result<Codebook> {
    if n == 0 {
        return Err(Error::ZeroAntennas);
    }
    let amp = 1.0 / libm::sqrt(n as f64);
    let beams = (0..n)
        .map(|q| {
            (0..n)
                .map(|k| {
                    // Reduce n*q mod N first so large products keep full phase precision.
                    let phase = 2.0 * PI * ((k * q) % n) as f64 / n as f64;
                    Complex64::from_polar(amp, phase)
                })
                .collect()
        })
        .collect();
    Ok(Codebook { n, beams })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BeamPair {
    /// Transmit beam.
    pub p: usize,
    /// Receive beam.
    pub q: usize,
    /// Flattened index.
    pub i: usize,
}

impl BeamPair {
    pub fn new(p: usize, q: usize, n_t: usize, n_r: usize) -> Result<Self> {
        Ok(Self { p, q, i: pair_index(p, q, n_t, n_r)? })
    }

    pub fn from_index(i: usize, n_t: usize, n_r: usize) -> Result<Self> {
        let (p, q) = unpair_index(i, n_t, n_r)?;
        Ok(Self { p, q, i })
    }
}

pub fn pair_index(p: usize, q: usize, n_t: usize, n_r: usize) -> Result<usize> {
    if p >= n_t {
        return Err(Error::IndexOutOfRange { index: p, bound: n_t });
    }
    if q >= n_r {
        return Err(Error::IndexOutOfRange { index: q, bound: n_r });
    }
    Ok(p * n_r + q)
}

pub fn unpair_index(i: usize, n_t: usize, n_r: usize) -> Result<(usize, usize)> {
    let m = n_t * n_r;
    if i >= m {
        return Err(Error::IndexOutOfRange { index: i, bound: m });
    }
    Ok((i / n_r, i % n_r))
}

fn apply(h: &ChannelMatrix, f: &[Complex64]) -> Vec<Complex64> {
    (0..h.n_r())
        .map(|r| h.row(r).iter().zip(f).fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a * b))
        .collect()
}

fn dot_conj(w: &[Complex64], v: &[Complex64]) -> Complex64 {
    w.iter().zip(v).fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a.conj() * b)
}

/// Noise-free `y = w^H H f`.
pub fn equivalent_channel(h: &ChannelMatrix, w: &[Complex64], f: &[Complex64]) -> Result<Complex64> {
    if w.len() != h.n_r() {
        return Err(Error::ShapeMismatch { expected: h.n_r(), got: w.len() });
    }
    if f.len() != h.n_t() {
        return Err(Error::ShapeMismatch { expected: h.n_t(), got: f.len() });
    }
    Ok(dot_conj(w, &apply(h, f)))
}

/// `|y_i|` for every flattened beam pair, with the optimal index.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalentMagnitudes {
    values: Vec<f64>,
    best_index: usize,
}

impl EquivalentMagnitudes {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let best_index = optimal_index(&values)?;
        Ok(Self { values, best_index })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn best_index(&self) -> usize {
        self.best_index
    }

    pub fn best_value(&self) -> f64 {
        self.values[self.best_index]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Exhaustive sweep over `C_t x C_r` in pair-index order.
pub fn equivalent_magnitudes(h: &ChannelMatrix, c_t: &Codebook, c_r: &Codebook) -> Result<EquivalentMagnitudes> {
    if c_t.antennas() != h.n_t() {
        return Err(Error::ShapeMismatch { expected: h.n_t(), got: c_t.antennas() });
    }
    if c_r.antennas() != h.n_r() {
        return Err(Error::ShapeMismatch { expected: h.n_r(), got: c_r.antennas() });
    }
    let mut values = Vec::with_capacity(c_t.len() * c_r.len());
    for f in c_t.beams() {
        let hf = apply(h, f);
        values.extend(c_r.beams().map(|w| dot_conj(w, &hf).norm()));
    }
    EquivalentMagnitudes::new(values)
}

/// First index attaining the maximum.
pub fn optimal_index(values: &[f64]) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i).ok_or(Error::EmptyMagnitudes)
}

/// The `k` largest indices, by decreasing value, ties to the lower index.
pub fn top_k(values: &[f64], k: usize) -> Result<Vec<usize>> {
    let m = values.len();
    if k == 0 || k > m {
        return Err(Error::TopKRange { k, m });
    }
    let mut order: Vec<usize> = (0..m).collect();
    // Stable sort keeps equal values in index order.
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap_or(Ordering::Equal));
    order.truncate(k);
    Ok(order)
}
