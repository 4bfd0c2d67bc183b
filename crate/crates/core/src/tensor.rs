//! Dense tensors over a single chart: every slot has the same extent `n`.

use std::ops::{Index, IndexMut};

use serde::Serialize;

use crate::error::{Error, Result};

/// A rank-`r` array with all extents equal to `n`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tensor {
    n: usize,
    rank: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(n: usize, rank: usize) -> Self {
        Self { n, rank, data: vec![0.0; n.pow(rank as u32)] }
    }

    pub fn from_fn(n: usize, rank: usize, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut t = Self::zeros(n, rank);
        let mut idx = vec![0usize; rank];
        for flat in 0..t.data.len() {
            let mut rem = flat;
            for slot in (0..rank).rev() {
                idx[slot] = rem % n;
                rem /= n;
            }
            t.data[flat] = f(&idx);
        }
        t
    }

    pub fn vector(v: &[f64]) -> Self {
        Self { n: v.len(), rank: 1, data: v.to_vec() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, 2, |i| if i[0] == i[1] { 1.0 } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank, "index arity does not match rank");
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.n);
            acc * self.n + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Tensor) -> f64 {
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { n: self.n, rank: self.rank, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    /// Matrix rows, for rank-2 tensors.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        assert_eq!(self.rank, 2);
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    /// `sum_j self[i][j] v[j]` for rank-2 tensors.
    pub fn mat_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.rank, 2);
        (0..self.n).map(|i| (0..self.n).map(|j| self[[i, j]] * v[j]).sum()).collect()
    }

    /// `u^i self_ij v^j` for rank-2 tensors.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        assert_eq!(self.rank, 2);
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                acc += u[i] * self[[i, j]] * v[j];
            }
        }
        acc
    }

    /// Trace over the first two slots of a rank-2 tensor.
    pub fn trace(&self) -> f64 {
        assert_eq!(self.rank, 2);
        (0..self.n).map(|i| self[[i, i]]).sum()
    }

    pub fn transpose(&self) -> Self {
        assert_eq!(self.rank, 2);
        Self::from_fn(self.n, 2, |i| self[[i[1], i[0]]])
    }
}

impl<const R: usize> Index<[usize; R]> for Tensor {
    type Output = f64;
    fn index(&self, idx: [usize; R]) -> &f64 {
        &self.data[self.offset(&idx)]
    }
}

impl<const R: usize> IndexMut<[usize; R]> for Tensor {
    fn index_mut(&mut self, idx: [usize; R]) -> &mut f64 {
        let o = self.offset(&idx);
        &mut self.data[o]
    }
}

/// Raise or lower one slot of a tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    /// Contract the slot with `a^{ij}`.
    Raise(usize),
    /// Contract the slot with `a_{ij}`.
    Lower(usize),
}

/// Contract a single slot of `t` with the symmetric matrix `m`.
pub fn contract_slot(t: &Tensor, m: &Tensor, slot: usize) -> Result<Tensor> {
    if m.rank != 2 {
        return Err(Error::RankMismatch { expected: 2, got: m.rank });
    }
    if slot >= t.rank {
        return Err(Error::RankMismatch { expected: slot + 1, got: t.rank });
    }
    if m.n != t.n {
        return Err(Error::Shape { expected: t.n, got: m.n });
    }
    let n = t.n;
    let mut scratch = vec![0usize; t.rank];
    Ok(Tensor::from_fn(n, t.rank, |idx| {
        scratch.copy_from_slice(idx);
        let mut acc = 0.0;
        for k in 0..n {
            scratch[slot] = k;
            acc += m[[idx[slot], k]] * t.get(&scratch);
        }
        acc
    }))
}

/// Raise/lower the listed slots using `a_ij` (`lower`) and `a^ij` (`inverse`).
pub fn raise_lower(t: &Tensor, lower: &Tensor, inverse: &Tensor, slots: &[Slot]) -> Result<Tensor> {
    let mut out = t.clone();
    for s in slots {
        out = match *s {
            Slot::Raise(k) => contract_slot(&out, inverse, k)?,
            Slot::Lower(k) => contract_slot(&out, lower, k)?,
        };
    }
    Ok(out)
}

/// Cholesky factor `L` with `m = L L^T`; `None` when `m` is not positive definite.
pub fn cholesky(m: &Tensor) -> Option<Tensor> {
    let n = m.n;
    let mut l = Tensor::zeros(n, 2);
    for j in 0..n {
        let mut d = m[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        l[[j, j]] = d;
        for i in j + 1..n {
            let mut v = m[[i, j]];
            for k in 0..j {
                v -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = v / d;
        }
    }
    Some(l)
}

/// Inverse of a symmetric positive-definite matrix via Cholesky.
pub fn spd_inverse(m: &Tensor) -> Option<Tensor> {
    let n = m.n;
    let l = cholesky(m)?;
    let mut inv = Tensor::zeros(n, 2);
    for col in 0..n {
        // L z = e_col
        let mut z = vec![0.0; n];
        for i in 0..n {
            let mut v = if i == col { 1.0 } else { 0.0 };
            for k in 0..i {
                v -= l[[i, k]] * z[k];
            }
            z[i] = v / l[[i, i]];
        }
        // L^T x = z
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut v = z[i];
            for k in i + 1..n {
                v -= l[[k, i]] * x[k];
            }
            x[i] = v / l[[i, i]];
        }
        for i in 0..n {
            inv[[i, col]] = x[i];
        }
    }
    Some(inv)
}

pub fn determinant_spd(m: &Tensor) -> Option<f64> {
    let l = cholesky(m)?;
    Some((0..m.n).map(|i| l[[i, i]] * l[[i, i]]).product())
}

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_raise_lower_is_identity() {
        let id = Tensor::identity(3);
        let v = Tensor::vector(&[0.3, -1.0, 2.5]);
        let w = raise_lower(&v, &id, &id, &[Slot::Lower(0), Slot::Raise(0)]).unwrap();
        assert_eq!(w, v);
    }

    #[test]
    fn diagonal_raise_divides() {
        let a = Tensor::identity(3).map(|x| 4.0 * x);
        let inv = spd_inverse(&a).unwrap();
        let b = Tensor::vector(&[2.0, 0.4, -0.8]);
        let up = raise_lower(&b, &a, &inv, &[Slot::Raise(0)]).unwrap();
        for i in 0..3 {
            assert!((up[[i]] - b[[i]] / 4.0).abs() < 1e-15);
        }
    }

    #[test]
    fn antisymmetric_contraction_vanishes() {
        let a = Tensor::from_fn(3, 2, |i| if i[0] == i[1] { 2.0 } else { 0.3 });
        let inv = spd_inverse(&a).unwrap();
        let s = Tensor::from_fn(3, 2, |i| {
            let (p, q) = (i[0] as f64, i[1] as f64);
            (p - q) * 0.7 + (p * p - q * q) * 0.2
        });
        let s_up = raise_lower(&s, &a, &inv, &[Slot::Raise(0)]).unwrap();
        let y = [0.4, -1.3, 0.9];
        let y_low = a.mat_vec(&y);
        let si0 = s_up.mat_vec(&y);
        assert!(dot(&si0, &y_low).abs() < 1e-12);
    }

    #[test]
    fn rank_mismatch_is_reported() {
        let id = Tensor::identity(3);
        let v = Tensor::vector(&[1.0, 2.0, 3.0]);
        assert!(matches!(contract_slot(&v, &id, 1), Err(Error::RankMismatch { .. })));
        assert!(matches!(contract_slot(&id, &v, 0), Err(Error::RankMismatch { .. })));
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = Tensor::from_fn(2, 2, |i| if i[0] == i[1] { 1.0 } else { 2.0 });
        assert!(cholesky(&m).is_none());
    }
}
