//! Truncated multivariate Taylor series ("jets") for exact forward-mode
//! differentiation.
//!
//! A [`Jet`] stores the Taylor coefficients `c_m = ∂^m f / m!` of a function
//! around a base point for every monomial `m` in a [`Layout`]. A layout is a
//! downward-closed set of monomials: total degree up to `order`, optionally
//! with a tighter cap on the degree within a contiguous group of variables.
//! Because the set is downward closed, products, quotients and compositions
//! of jets are exact on every monomial of the layout.
//!
//! Differentiating a jet shifts coefficients down; the top-degree
//! coefficients of the result are meaningless, so callers must only read
//! monomials whose shifted preimage lies inside the layout. The Finsler
//! pipeline relies on this: it builds `F²` to degree four and reads the spray
//! only to degree two.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

/// The monomial set shared by a family of jets.
pub struct Layout {
    nvars: usize,
    order: usize,
    monomials: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    /// `(a, b, c)` with `monomials[a] + monomials[b] == monomials[c]`.
    products: Vec<(u32, u32, u32)>,
    /// `raise[v][m]` is the index of `m + e_v`, when inside the layout.
    raise: Vec<Vec<Option<u32>>>,
    /// `lower[v][m]` is the index of `m - e_v`, when `m_v > 0`.
    lower: Vec<Vec<Option<u32>>>,
}

impl fmt::Debug for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Layout")
            .field("nvars", &self.nvars)
            .field("order", &self.order)
            .field("len", &self.monomials.len())
            .finish()
    }
}

impl Layout {
    /// All monomials in `nvars` variables of total degree `<= order`.
    pub fn new(nvars: usize, order: usize) -> Arc<Self> {
        Self::build(nvars, order, None)
    }

    /// Like [`Layout::new`], but the combined degree in the variables
    /// `group.0 .. group.1` is additionally capped at `cap`.
    pub fn with_group_cap(nvars: usize, order: usize, group: (usize, usize), cap: usize) -> Arc<Self> {
        assert!(group.0 <= group.1 && group.1 <= nvars);
        Self::build(nvars, order, Some((group, cap)))
    }

    fn build(nvars: usize, order: usize, cap: Option<((usize, usize), usize)>) -> Arc<Self> {
        let admissible = |m: &[u8]| {
            let total: usize = m.iter().map(|&e| e as usize).sum();
            if total > order {
                return false;
            }
            match cap {
                Some(((lo, hi), c)) => m[lo..hi].iter().map(|&e| e as usize).sum::<usize>() <= c,
                None => true,
            }
        };

        let mut monomials = Vec::new();
        for degree in 0..=order {
            let mut current = vec![0u8; nvars];
            enumerate_degree(nvars, degree, 0, &mut current, &mut |m| {
                if admissible(m) {
                    monomials.push(m.to_vec());
                }
            });
        }
        let index: HashMap<Vec<u8>, usize> =
            monomials.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();

        let mut products = Vec::new();
        let mut sum = vec![0u8; nvars];
        for (a, ma) in monomials.iter().enumerate() {
            for (b, mb) in monomials.iter().enumerate() {
                for v in 0..nvars {
                    sum[v] = ma[v] + mb[v];
                }
                if let Some(&c) = index.get(&sum) {
                    products.push((a as u32, b as u32, c as u32));
                }
            }
        }

        let mut raise = vec![vec![None; monomials.len()]; nvars];
        let mut lower = vec![vec![None; monomials.len()]; nvars];
        for (i, m) in monomials.iter().enumerate() {
            for v in 0..nvars {
                let mut up = m.clone();
                up[v] += 1;
                raise[v][i] = index.get(&up).map(|&j| j as u32);
                if m[v] > 0 {
                    let mut down = m.clone();
                    down[v] -= 1;
                    lower[v][i] = index.get(&down).map(|&j| j as u32);
                }
            }
        }

        Arc::new(Self { nvars, order, monomials, index, products, raise, lower })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomial(&self, i: usize) -> &[u8] {
        &self.monomials[i]
    }

    pub fn index_of(&self, exponents: &[u8]) -> Option<usize> {
        self.index.get(exponents).copied()
    }
}

fn enumerate_degree(nvars: usize, remaining: usize, var: usize, current: &mut Vec<u8>, f: &mut impl FnMut(&[u8])) {
    if var + 1 == nvars {
        current[var] = remaining as u8;
        f(current);
        current[var] = 0;
        return;
    }
    if nvars == 0 {
        if remaining == 0 {
            f(current);
        }
        return;
    }
    for e in (0..=remaining).rev() {
        current[var] = e as u8;
        enumerate_degree(nvars, remaining - e, var + 1, current, f);
    }
    current[var] = 0;
}

/// A truncated Taylor series over a [`Layout`].
#[derive(Clone)]
pub struct Jet {
    layout: Arc<Layout>,
    coef: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet").field("value", &self.value()).field("len", &self.coef.len()).finish()
    }
}

impl Jet {
    pub fn zero(layout: &Arc<Layout>) -> Self {
        Self { layout: Arc::clone(layout), coef: vec![0.0; layout.len()] }
    }

    pub fn constant(layout: &Arc<Layout>, value: f64) -> Self {
        let mut j = Self::zero(layout);
        j.coef[0] = value;
        j
    }

    /// The independent variable `var` expanded around `value`.
    pub fn variable(layout: &Arc<Layout>, var: usize, value: f64) -> Self {
        let mut j = Self::constant(layout, value);
        if layout.order >= 1 {
            let mut e = vec![0u8; layout.nvars];
            e[var] = 1;
            if let Some(i) = layout.index_of(&e) {
                j.coef[i] = 1.0;
            }
        }
        j
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn value(&self) -> f64 {
        self.coef[0]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coef
    }

    /// Taylor coefficient of the monomial with the given exponents; zero if
    /// the monomial is not in the layout.
    pub fn coeff(&self, exponents: &[u8]) -> f64 {
        self.layout.index_of(exponents).map_or(0.0, |i| self.coef[i])
    }

    pub fn set_coeff(&mut self, exponents: &[u8], value: f64) {
        let i = self.layout.index_of(exponents).expect("monomial outside layout");
        self.coef[i] = value;
    }

    /// The partial derivative `∂^m f` at the base point.
    pub fn partial(&self, exponents: &[u8]) -> f64 {
        let scale: f64 = exponents.iter().map(|&e| factorial(e as usize)).product();
        self.coeff(exponents) * scale
    }

    /// Partial derivative along a list of variables, e.g. `&[0, 3]` for
    /// `∂²/∂v0∂v3`.
    pub fn partial_vars(&self, vars: &[usize]) -> f64 {
        let mut e = vec![0u8; self.layout.nvars];
        for &v in vars {
            e[v] += 1;
        }
        self.partial(&e)
    }

    /// `∂f/∂v` as a jet. Coefficients at the top of the layout are lost.
    pub fn derivative(&self, var: usize) -> Self {
        let raise = &self.layout.raise[var];
        let mut out = Self::zero(&self.layout);
        for (i, slot) in raise.iter().enumerate() {
            if let Some(j) = *slot {
                let e = self.layout.monomials[j as usize][var] as f64;
                out.coef[i] = e * self.coef[j as usize];
            }
        }
        out
    }

    /// Antiderivative in `var` vanishing on `v_var = base`; terms pushed beyond
    /// the layout are dropped.
    pub fn antiderivative(&self, var: usize) -> Self {
        let lower = &self.layout.lower[var];
        let mut out = Self::zero(&self.layout);
        for (i, slot) in lower.iter().enumerate() {
            if let Some(j) = *slot {
                let e = self.layout.monomials[i][var] as f64;
                out.coef[i] = self.coef[j as usize] / e;
            }
        }
        out
    }

    /// Compose a univariate function with this jet, given the derivatives
    /// `f(u0), f'(u0), ...` at the base value `u0`. Accuracy is limited to the
    /// number of supplied derivatives.
    pub fn compose(&self, derivatives: &[f64]) -> Self {
        let mut delta = self.clone();
        delta.coef[0] = 0.0;
        let top = derivatives.len().min(self.layout.order + 1);
        if top == 0 {
            return Self::zero(&self.layout);
        }
        // Horner in delta.
        let mut acc = Self::constant(&self.layout, derivatives[top - 1] / factorial(top - 1));
        for k in (0..top - 1).rev() {
            acc = &acc * &delta;
            acc.coef[0] += derivatives[k] / factorial(k);
        }
        acc
    }

    fn compose_with(&self, mut kth: impl FnMut(usize) -> f64) -> Self {
        let derivs: Vec<f64> = (0..=self.layout.order).map(&mut kth).collect();
        self.compose(&derivs)
    }

    pub fn recip(&self) -> Self {
        let u = self.value();
        // d^k/du^k 1/u = (-1)^k k! / u^{k+1}
        self.compose_with(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * factorial(k) / u.powi(k as i32 + 1)
        })
    }

    pub fn sqrt(&self) -> Self {
        let u = self.value();
        // d^k/du^k u^{1/2} = (1/2)(1/2 - 1)...(1/2 - k + 1) u^{1/2 - k}
        self.compose_with(|k| {
            let mut c = 1.0;
            for j in 0..k {
                c *= 0.5 - j as f64;
            }
            c * u.powf(0.5 - k as f64)
        })
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose_with(|_| e)
    }

    pub fn ln(&self) -> Self {
        let u = self.value();
        self.compose_with(|k| {
            if k == 0 {
                u.ln()
            } else {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * factorial(k - 1) / u.powi(k as i32)
            }
        })
    }

    pub fn square(&self) -> Self {
        self * self
    }

    pub fn scale(&self, k: f64) -> Self {
        Self { layout: Arc::clone(&self.layout), coef: self.coef.iter().map(|c| c * k).collect() }
    }

    pub fn add_scalar(&self, k: f64) -> Self {
        let mut out = self.clone();
        out.coef[0] += k;
        out
    }

    pub fn div(&self, other: &Jet) -> Self {
        self * &other.recip()
    }

    /// `self += k * other`
    pub fn axpy(&mut self, k: f64, other: &Jet) {
        for (a, b) in self.coef.iter_mut().zip(&other.coef) {
            *a += k * b;
        }
    }

    fn check_layout(&self, other: &Jet) {
        debug_assert!(Arc::ptr_eq(&self.layout, &other.layout), "jets from different layouts");
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

impl<'a> Add<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn add(self, rhs: &'a Jet) -> Jet {
        self.check_layout(rhs);
        let mut out = self.clone();
        for (a, b) in out.coef.iter_mut().zip(&rhs.coef) {
            *a += b;
        }
        out
    }
}

impl<'a> Sub<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn sub(self, rhs: &'a Jet) -> Jet {
        self.check_layout(rhs);
        let mut out = self.clone();
        for (a, b) in out.coef.iter_mut().zip(&rhs.coef) {
            *a -= b;
        }
        out
    }
}

impl<'a> Mul<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn mul(self, rhs: &'a Jet) -> Jet {
        self.check_layout(rhs);
        let mut out = Jet::zero(&self.layout);
        let (a, b) = (&self.coef, &rhs.coef);
        for &(i, j, k) in &self.layout.products {
            out.coef[k as usize] += a[i as usize] * b[j as usize];
        }
        out
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &'a Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Jet> for &'a Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        self.add_scalar(rhs)
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        self.add_scalar(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn layout_counts() {
        assert_eq!(Layout::new(3, 2).len(), 10);
        assert_eq!(Layout::new(1, 4).len(), 5);
        // x-degree <= 2 within total degree 4 in (x1..x3, y1..y3)
        assert_eq!(Layout::with_group_cap(6, 4, (0, 3), 2).len(), 155);
    }

    #[test]
    fn polynomial_partials() {
        let l = Layout::new(2, 3);
        let x = Jet::variable(&l, 0, 2.0);
        let y = Jet::variable(&l, 1, -1.0);
        // f = x^2 y + 3 y
        let f = &(&x * &x) * &y + y.scale(3.0);
        close(f.value(), -7.0, 1e-15);
        close(f.partial(&[1, 0]), -4.0, 1e-15);
        close(f.partial(&[0, 1]), 4.0 + 3.0, 1e-15);
        close(f.partial(&[2, 1]), 2.0, 1e-15);
        close(f.partial(&[1, 1]), 4.0, 1e-15);
    }

    #[test]
    fn elementary_functions_univariate() {
        let l = Layout::new(1, 4);
        let x = Jet::variable(&l, 0, 0.7);
        let e = x.exp();
        for k in 0..=4u8 {
            close(e.partial(&[k]), 0.7f64.exp(), 1e-14);
        }
        let r = x.sqrt();
        close(r.partial(&[3]), 3.0 / 8.0 * 0.7f64.powf(-2.5), 1e-12);
        let q = x.recip();
        close(q.partial(&[4]), 24.0 / 0.7f64.powi(5), 1e-10);
        let g = x.ln();
        close(g.partial(&[2]), -1.0 / 0.49, 1e-13);
        let back = x.ln().exp();
        close(back.partial(&[4]), 0.0, 1e-12);
        close(back.partial(&[1]), 1.0, 1e-14);
    }

    #[test]
    fn derivative_and_antiderivative() {
        let l = Layout::new(2, 3);
        let x = Jet::variable(&l, 0, 0.5);
        let y = Jet::variable(&l, 1, 0.25);
        let f = (&x * &y).exp();
        let dfx = f.derivative(0);
        // ∂x f = y e^{xy}
        close(dfx.value(), 0.25 * (0.125f64).exp(), 1e-15);
        close(dfx.partial(&[0, 1]), (0.125f64).exp() * (1.0 + 0.125), 1e-14);
        let back = dfx.antiderivative(0);
        // matches f minus its x-independent part on the surviving monomials
        close(back.partial(&[1, 0]), f.partial(&[1, 0]), 1e-14);
        close(back.partial(&[2, 0]), f.partial(&[2, 0]), 1e-14);
    }

    #[test]
    fn group_cap_keeps_lower_monomials_exact() {
        let l = Layout::with_group_cap(2, 4, (0, 1), 1);
        let x = Jet::variable(&l, 0, 0.3);
        let y = Jet::variable(&l, 1, 0.6);
        let f = (&x + &y).sqrt();
        // ∂x ∂y^3 of sqrt(x+y) = (1/2)(-1/2)(-3/2)(-5/2)(x+y)^{-7/2}
        close(f.partial(&[1, 3]), -15.0 / 16.0 * 0.9f64.powf(-3.5), 1e-12);
        assert_eq!(f.coeff(&[2, 0]), 0.0);
    }
}
