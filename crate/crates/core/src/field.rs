//! Multi-channel data attached to faces, edges, or face slots.
//!
//! Storage is channel-major: channel `k` occupies `data[k*len..(k+1)*len]`,
//! so the scalar operators can be applied one channel at a time.

use std::marker::PhantomData;

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Marker for data living on faces (space U).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OnFaces;
/// Marker for data living on edges (space V).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OnEdges;
/// Marker for data with three slots per face (space W), indexed `3*face + slot`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OnSlots;

#[derive(Debug, Clone, PartialEq)]
pub struct Field<S> {
    channels: usize,
    len: usize,
    data: Vec<f64>,
    _space: PhantomData<S>,
}

pub type FaceField = Field<OnFaces>;
pub type EdgeField = Field<OnEdges>;
pub type StencilField = Field<OnSlots>;

impl<S> Field<S> {
    pub fn zeros(channels: usize, len: usize) -> Self {
        Self {
            channels,
            len,
            data: vec![0.0; channels * len],
            _space: PhantomData,
        }
    }

    pub fn constant(channels: usize, len: usize, value: f64) -> Self {
        Self {
            channels,
            len,
            data: vec![value; channels * len],
            _space: PhantomData,
        }
    }

    /// Builds a field from channel-major data.
    pub fn from_raw(channels: usize, len: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != channels * len {
            return Err(Error::SizeMismatch {
                expected: channels * len,
                found: data.len(),
            });
        }
        Ok(Self {
            channels,
            len,
            data,
            _space: PhantomData,
        })
    }

    pub fn from_channels(channels: Vec<Vec<f64>>) -> Result<Self> {
        let len = channels.first().map_or(0, Vec::len);
        let n = channels.len();
        let mut data = Vec::with_capacity(n * len);
        for c in channels {
            if c.len() != len {
                return Err(Error::SizeMismatch {
                    expected: len,
                    found: c.len(),
                });
            }
            data.extend(c);
        }
        Self::from_raw(n, len, data)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn channel(&self, k: usize) -> &[f64] {
        &self.data[k * self.len..(k + 1) * self.len]
    }

    pub fn channel_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.data[k * self.len..(k + 1) * self.len]
    }

    pub fn get(&self, k: usize, i: usize) -> f64 {
        self.data[k * self.len + i]
    }

    pub fn set(&mut self, k: usize, i: usize, value: f64) {
        self.data[k * self.len + i] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// The value of every channel at entry `i`.
    pub fn group(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.channels).map(move |k| self.data[k * self.len + i])
    }

    /// Euclidean norm across channels at entry `i`.
    pub fn group_norm(&self, i: usize) -> f64 {
        self.group(i).map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn ensure_shape(&self, channels: usize, len: usize) -> Result<()> {
        if self.channels != channels {
            return Err(Error::ChannelMismatch {
                expected: channels,
                found: self.channels,
            });
        }
        if self.len != len {
            return Err(Error::SizeMismatch {
                expected: len,
                found: self.len,
            });
        }
        Ok(())
    }

    pub fn ensure_same_shape(&self, other: &Self) -> Result<()> {
        other.ensure_shape(self.channels, self.len)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// `self + scale * other`, elementwise.
    pub fn add_scaled(&self, scale: f64, other: &Self) -> Result<Self> {
        self.ensure_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + scale * b)
            .collect();
        Self::from_raw(self.channels, self.len, data)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            channels: self.channels,
            len: self.len,
            data: self.data.iter().copied().map(f).collect(),
            _space: PhantomData,
        }
    }
}

impl<S> Field<S> {
    /// A three-channel field from per-entry vectors.
    pub fn from_vectors(vectors: &[Vector3<f64>]) -> Self {
        let len = vectors.len();
        let mut data = vec![0.0; 3 * len];
        for (i, v) in vectors.iter().enumerate() {
            for k in 0..3 {
                data[k * len + i] = v[k];
            }
        }
        Self {
            channels: 3,
            len,
            data,
            _space: PhantomData,
        }
    }

    /// Entry `i` of a three-channel field.
    pub fn vector(&self, i: usize) -> Vector3<f64> {
        debug_assert_eq!(self.channels, 3);
        Vector3::new(self.get(0, i), self.get(1, i), self.get(2, i))
    }

    pub fn set_vector(&mut self, i: usize, v: &Vector3<f64>) {
        for k in 0..3 {
            self.set(k, i, v[k]);
        }
    }

    pub fn to_vectors(&self) -> Vec<Vector3<f64>> {
        (0..self.len).map(|i| self.vector(i)).collect()
    }
}
