//! Truncated multivariate Taylor expansions ("jets").
//!
//! A [`Jet`] of dimension `d` and order `K` stores every Taylor coefficient
//! `∂^α f / α!` with `|α| ≤ K`, densely, in graded-lexicographic order. Since
//! the ordering is graded, truncating to a lower order is a prefix slice, and
//! differentiating a jet of order `K` yields an exact jet of order `K - 1`.
//!
//! All geometric quantities in this crate are obtained by running ordinary
//! arithmetic on jets and differentiating the results.

mod matrix;
pub mod oracle;
mod space;

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

pub use matrix::JetMatrix;
pub use space::{JetSpace, MultiIndex};

use crate::error::{FinjetError, Result};

/// Truncated Taylor expansion of a scalar around a fixed point.
#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("dim", &self.dim())
            .field("order", &self.order())
            .field("value", &self.value())
            .finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.order() == other.order() && self.coeffs == other.coeffs
    }
}

/// One coordinate jet per entry of `point`.
///
/// The `i`-th jet has value `point[i]` and unit first-order coefficient in
/// direction `i`; for `order == 0` only the value is kept.
pub fn lift_variables(point: &[f64], order: usize) -> Vec<Jet> {
    let dim = point.len();
    point
        .iter()
        .enumerate()
        .map(|(i, &v)| Jet::variable(dim, order, i, v))
        .collect()
}

impl Jet {
    pub fn zero(dim: usize, order: usize) -> Self {
        let space = JetSpace::get(dim, order);
        let coeffs = vec![0.0; space.len()];
        Jet { space, coeffs }
    }

    pub fn constant(dim: usize, order: usize, value: f64) -> Self {
        let mut j = Self::zero(dim, order);
        j.coeffs[0] = value;
        j
    }

    pub fn variable(dim: usize, order: usize, index: usize, value: f64) -> Self {
        assert!(index < dim, "variable index {index} out of range for dim {dim}");
        let mut j = Self::constant(dim, order, value);
        if order > 0 {
            // degree-one monomials follow the constant, one per variable
            j.coeffs[1 + index] = 1.0;
        }
        j
    }

    /// Builds a jet from raw Taylor coefficients in the space's ordering.
    pub fn from_coeffs(dim: usize, order: usize, coeffs: Vec<f64>) -> Self {
        let space = JetSpace::get(dim, order);
        assert_eq!(coeffs.len(), space.len(), "coefficient count mismatch");
        Jet { space, coeffs }
    }

    /// A constant jet living in the same space as `self`.
    pub fn constant_like(&self, value: f64) -> Self {
        Self::constant(self.dim(), self.order(), value)
    }

    pub fn zero_like(&self) -> Self {
        Self::zero(self.dim(), self.order())
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn order(&self) -> usize {
        self.space.order()
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Taylor coefficient `∂^α f / α!`.
    pub fn coeff(&self, alpha: &[usize]) -> Result<f64> {
        let idx = self.space.index_of(alpha)?;
        Ok(self.coeffs[idx])
    }

    /// Raw partial derivative `∂^α f` at the expansion point.
    pub fn partial(&self, alpha: &[usize]) -> Result<f64> {
        let c = self.coeff(alpha)?;
        let fact: f64 = alpha.iter().map(|&a| factorial(a)).product();
        Ok(c * fact)
    }

    /// First-order partial derivatives at the expansion point.
    pub fn gradient(&self) -> Vec<f64> {
        if self.order() == 0 {
            return vec![0.0; self.dim()];
        }
        self.coeffs[1..=self.dim()].to_vec()
    }

    /// Exact jet of `∂f/∂x_var`, one order lower.
    pub fn derivative(&self, var: usize) -> Jet {
        assert!(var < self.dim(), "derivative variable out of range");
        let order = self.order();
        if order == 0 {
            // nothing is known about the derivative
            panic!("cannot differentiate an order-0 jet");
        }
        let lower = JetSpace::get(self.dim(), order - 1);
        let table = self.space.derivative_table(var);
        let coeffs = table.iter().map(|&(src, factor)| self.coeffs[src] * factor).collect();
        Jet { space: lower, coeffs }
    }

    /// Drops every coefficient above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order() {
            return self.clone();
        }
        let space = JetSpace::get(self.dim(), order);
        let coeffs = self.coeffs[..space.len()].to_vec();
        Jet { space, coeffs }
    }

    fn aligned(&self, other: &Jet) -> (Jet, Jet) {
        assert_eq!(self.dim(), other.dim(), "jet dimension mismatch");
        let order = self.order().min(other.order());
        (self.truncate(order), other.truncate(order))
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet { space: self.space.clone(), coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    fn product(&self, other: &Jet) -> Jet {
        let (a, b) = self.aligned(other);
        let mut out = vec![0.0; a.coeffs.len()];
        for &(i, j, k) in a.space.product_table() {
            out[k as usize] += a.coeffs[i as usize] * b.coeffs[j as usize];
        }
        Jet { space: a.space, coeffs: out }
    }

    /// Composes the univariate Taylor series with coefficients `series`
    /// (expanded around `self.value()`) with this jet.
    fn compose_series(&self, series: &[f64]) -> Jet {
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let k = self.order();
        let mut acc = self.constant_like(series[k]);
        for d in (0..k).rev() {
            acc = acc.product(&h).add_scalar(series[d]);
        }
        acc
    }

    pub fn exp(&self) -> Jet {
        let a = self.value().exp();
        let series: Vec<f64> = (0..=self.order()).map(|k| a / factorial(k)).collect();
        self.compose_series(&series)
    }

    pub fn ln(&self) -> Result<Jet> {
        let a = self.value();
        if !(a > 0.0) {
            return Err(FinjetError::NumericDomain(format!("log of non-positive value {a}")));
        }
        let mut series = vec![a.ln()];
        for k in 1..=self.order() {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            series.push(sign / (k as f64 * a.powi(k as i32)));
        }
        Ok(self.compose_series(&series))
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let series: Vec<f64> = (0..=self.order()).map(|k| cycle[k % 4] / factorial(k)).collect();
        self.compose_series(&series)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let series: Vec<f64> = (0..=self.order()).map(|k| cycle[k % 4] / factorial(k)).collect();
        self.compose_series(&series)
    }

    /// Real power `f^r` for `f > 0`.
    pub fn powf(&self, r: f64) -> Result<Jet> {
        let a = self.value();
        if !(a > 0.0) {
            return Err(FinjetError::NumericDomain(format!("real power of non-positive value {a}")));
        }
        Ok(self.compose_series(&power_series(a, r, self.order())))
    }

    pub fn sqrt(&self) -> Result<Jet> {
        let a = self.value();
        if !(a > 0.0) {
            return Err(FinjetError::NumericDomain(format!("sqrt of non-positive value {a}")));
        }
        self.powf(0.5)
    }

    pub fn recip(&self) -> Result<Jet> {
        let a = self.value();
        if a == 0.0 || !a.is_finite() {
            return Err(FinjetError::NumericDomain(format!("division by jet with value {a}")));
        }
        // (a + h)^-1 = Σ (-h)^k / a^(k+1), valid for either sign of a
        let series: Vec<f64> = (0..=self.order())
            .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } / a.powi(k as i32 + 1))
            .collect();
        Ok(self.compose_series(&series))
    }

    pub fn checked_div(&self, other: &Jet) -> Result<Jet> {
        Ok(self * &other.recip()?)
    }

    /// Integer power; negative exponents require a nonzero value.
    pub fn powi(&self, e: i32) -> Result<Jet> {
        if e < 0 {
            return self.recip()?.powi(-e);
        }
        let mut base = self.clone();
        let mut acc = self.constant_like(1.0);
        let mut e = e as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(acc)
    }

    /// Substitutes jets for the variables: the Taylor polynomial of `self`
    /// is evaluated at `inner - inner.value()`. `inner` must have one entry
    /// per variable of `self`, all in one space, with values at the point
    /// where `self` was expanded. The result lives in the space of `inner`.
    pub fn compose(&self, inner: &[Jet]) -> Jet {
        assert_eq!(inner.len(), self.dim(), "compose needs one inner jet per variable");
        let target = inner[0].space().clone();
        let order = self.order().min(target.order());
        let shifts: Vec<Jet> = inner
            .iter()
            .map(|j| {
                assert_eq!(j.dim(), target.dim(), "inner jets must share a space");
                let mut h = j.truncate(target.order());
                h.coeffs[0] = 0.0;
                h
            })
            .collect();
        let monomials = &self.space.monomials()[..JetSpace::get(self.dim(), order).len()];
        // powers[i] = h^monomials[i]; shifts have no constant term so higher
        // degrees than the target order would vanish anyway
        let mut powers: Vec<Jet> = Vec::with_capacity(monomials.len());
        let mut acc = Jet::constant(target.dim(), target.order(), self.coeffs[0]);
        powers.push(acc.constant_like(1.0));
        for (idx, alpha) in monomials.iter().enumerate().skip(1) {
            let var = alpha.iter().position(|&e| e > 0).expect("non-constant monomial");
            let mut lower: Vec<usize> = alpha.iter().map(|&e| e as usize).collect();
            lower[var] -= 1;
            let prev = self.space.index_of(&lower).expect("lower monomial present");
            let p = &powers[prev] * &shifts[var];
            if self.coeffs[idx] != 0.0 {
                acc += &p.scale(self.coeffs[idx]);
            }
            powers.push(p);
        }
        acc
    }
}

fn power_series(a: f64, r: f64, order: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(order + 1);
    let mut binom = 1.0;
    for k in 0..=order {
        if k > 0 {
            binom *= (r - (k as f64 - 1.0)) / k as f64;
        }
        out.push(binom * a.powf(r - k as f64));
    }
    out
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let (mut a, b) = self.aligned(rhs);
        a.coeffs.iter_mut().zip(&b.coeffs).for_each(|(x, y)| *x += y);
        a
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        let (mut a, b) = self.aligned(rhs);
        a.coeffs.iter_mut().zip(&b.coeffs).for_each(|(x, y)| *x -= y);
        a
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.product(rhs)
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
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
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

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        if self.order() <= rhs.order() && self.dim() == rhs.dim() {
            let n = self.coeffs.len();
            self.coeffs.iter_mut().zip(&rhs.coeffs[..n]).for_each(|(x, y)| *x += y);
        } else {
            *self = &*self + rhs;
        }
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        if self.order() <= rhs.order() && self.dim() == rhs.dim() {
            let n = self.coeffs.len();
            self.coeffs.iter_mut().zip(&rhs.coeffs[..n]).for_each(|(x, y)| *x -= y);
        } else {
            *self = &*self - rhs;
        }
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

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lift_variables_gives_unit_gradients() {
        let v = lift_variables(&[2.0, 3.0], 1);
        assert_eq!(v[0].value(), 2.0);
        assert_eq!(v[1].value(), 3.0);
        assert_eq!(v[0].gradient(), vec![1.0, 0.0]);
        assert_eq!(v[1].gradient(), vec![0.0, 1.0]);
    }

    #[test]
    fn order_zero_lift_keeps_only_value() {
        let v = lift_variables(&[0.0], 0);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].coeffs(), &[0.0]);
    }

    #[test]
    fn coefficient_count_is_binomial() {
        let v = lift_variables(&[1.0, 0.0, 4.0], 6);
        for j in &v {
            assert_eq!(j.coeffs().len(), 84);
        }
        assert_eq!(JetSpace::get(8, 6).len(), 3003);
    }

    #[test]
    fn partial_of_square() {
        let x = &lift_variables(&[3.0], 2)[0];
        let f = x * x;
        assert_eq!(f.partial(&[1]).unwrap(), 6.0);
        assert_eq!(f.partial(&[2]).unwrap(), 2.0);
    }

    #[test]
    fn mixed_partial_of_product() {
        let v = lift_variables(&[2.0, 5.0], 2);
        let f = &v[0] * &v[1];
        assert_eq!(f.partial(&[1, 1]).unwrap(), 1.0);
        assert_eq!(f.value(), 10.0);
    }

    #[test]
    fn exp_fourth_derivative() {
        let x = &lift_variables(&[0.0], 4)[0];
        assert_relative_eq!(x.exp().partial(&[4]).unwrap(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(x.exp().coeff(&[4]).unwrap(), 1.0 / 24.0, epsilon = 1e-16);
    }

    #[test]
    fn order_exceeded_is_an_error() {
        let x = &lift_variables(&[1.0], 2)[0];
        assert!(matches!(x.partial(&[3]), Err(FinjetError::OrderExceeded { .. })));
    }

    #[test]
    fn domain_errors_instead_of_nan() {
        let x = &lift_variables(&[0.0], 3)[0];
        assert!(matches!(x.ln(), Err(FinjetError::NumericDomain(_))));
        assert!(matches!(x.sqrt(), Err(FinjetError::NumericDomain(_))));
        assert!(matches!(x.recip(), Err(FinjetError::NumericDomain(_))));
        let neg = x.add_scalar(-1.0);
        assert!(matches!(neg.sqrt(), Err(FinjetError::NumericDomain(_))));
        assert!(neg.recip().is_ok());
    }

    #[test]
    fn derivative_lowers_order() {
        let v = lift_variables(&[0.5, -0.25], 4);
        let f = (&v[0] * &v[1]).sin();
        let d = f.derivative(1);
        assert_eq!(d.order(), 3);
        // d/dy sin(xy) = x cos(xy)
        assert_relative_eq!(d.value(), 0.5 * (0.5f64 * -0.25).cos(), epsilon = 1e-15);
        // second mixed partial computed two ways
        let dxy = f.derivative(0).derivative(1).value();
        assert_relative_eq!(dxy, f.partial(&[1, 1]).unwrap(), epsilon = 1e-14);
    }

    #[test]
    fn mixed_orders_truncate_to_lower() {
        let a = Jet::constant(2, 4, 1.0);
        let b = Jet::constant(2, 2, 2.0);
        assert_eq!((&a + &b).order(), 2);
        assert_eq!((&a * &b).order(), 2);
    }

    #[test]
    fn recip_of_negative_value() {
        let x = &lift_variables(&[-2.0], 3)[0];
        let r = x.recip().unwrap();
        // d^3/dx^3 (1/x) = -6/x^4
        assert_relative_eq!(r.partial(&[3]).unwrap(), -6.0 / 16.0, epsilon = 1e-14);
    }

    #[test]
    fn powi_matches_repeated_product() {
        let v = lift_variables(&[1.3, 0.7], 3);
        let s = &v[0] + &v[1];
        let p = s.powi(3).unwrap();
        let q = &(&s * &s) * &s;
        for (a, b) in p.coeffs().iter().zip(q.coeffs()) {
            assert_relative_eq!(a, b, epsilon = 1e-13);
        }
        let inv = s.powi(-2).unwrap();
        let one = &inv * &(&s * &s);
        assert_relative_eq!(one.value(), 1.0, epsilon = 1e-14);
        assert!(one.coeffs()[1..].iter().all(|c| c.abs() < 1e-13));
    }

    #[test]
    fn composition_is_the_chain_rule() {
        // outer: exp(u) * v at (u, v) = (0.4, 1.14); inner: u = x*y, v = x + y^2 at (x, y) = (0.5, 0.8)
        let outer_vars = lift_variables(&[0.4, 1.14], 4);
        let outer = &outer_vars[0].exp() * &outer_vars[1];
        let xy = lift_variables(&[0.5, 0.8], 4);
        let inner = vec![&xy[0] * &xy[1], &xy[0] + &(&xy[1] * &xy[1])];
        let composed = outer.compose(&inner);
        let direct = &inner[0].exp() * &inner[1];
        for (a, b) in composed.coeffs().iter().zip(direct.coeffs()) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }
}
