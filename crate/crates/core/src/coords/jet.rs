//! Truncated multivariate Taylor polynomials ("jets").
//!
//! A [`Jet`] of order `K` in `m` variables stores the Taylor coefficients
//! `c_α = ∂^α f / α!` for every multi-index with `|α| ≤ K`. Arithmetic on jets
//! is forward-mode differentiation: every operation propagates all partials up
//! to order `K` at once. Mixed partials are stored once per multi-index, so
//! they are symmetric by construction.
//!
//! Monomials are enumerated degree by degree with an ordering that does not
//! depend on the maximal order, so the layout of order `K - 1` is a prefix of
//! the layout of order `K` and truncation is a slice.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Highest jet order the crate builds layouts for.
pub const MAX_ORDER: usize = 4;

const NONE: u32 = u32::MAX;

#[derive(Debug)]
pub struct JetLayout {
    nvars: usize,
    order: usize,
    exponents: Vec<Vec<u8>>,
    lookup: HashMap<Vec<u8>, usize>,
    /// `(i, j, k)` such that monomial `i` times monomial `j` is monomial `k`.
    products: Vec<[u32; 3]>,
    /// `raise[v][i]` is the index of monomial `i` times the variable `v`.
    raise: Vec<Vec<u32>>,
}

impl JetLayout {
    fn build(nvars: usize, order: usize) -> Self {
        let mut exponents = Vec::new();
        for degree in 0..=order {
            let mut current = vec![0u8; nvars];
            monomials_of_degree(nvars, degree, 0, &mut current, &mut exponents);
        }
        let lookup: HashMap<Vec<u8>, usize> = exponents.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let degree = |e: &[u8]| e.iter().map(|&k| k as usize).sum::<usize>();

        let mut products = Vec::new();
        for (i, a) in exponents.iter().enumerate() {
            let da = degree(a);
            for (j, b) in exponents.iter().enumerate() {
                if da + degree(b) > order {
                    continue;
                }
                let sum: Vec<u8> = a.iter().zip(b).map(|(p, q)| p + q).collect();
                products.push([i as u32, j as u32, lookup[&sum] as u32]);
            }
        }

        let raise = (0..nvars)
            .map(|v| {
                exponents
                    .iter()
                    .map(|e| {
                        if degree(e) >= order {
                            return NONE;
                        }
                        let mut up = e.clone();
                        up[v] += 1;
                        lookup[&up] as u32
                    })
                    .collect()
            })
            .collect();

        JetLayout {
            nvars,
            order,
            exponents,
            lookup,
            products,
            raise,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self, index: usize) -> &[u8] {
        &self.exponents[index]
    }

    pub fn index_of(&self, exponents: &[u8]) -> Option<usize> {
        self.lookup.get(exponents).copied()
    }
}

// Reverse-lexicographic enumeration within a single degree.
fn monomials_of_degree(nvars: usize, remaining: usize, var: usize, current: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if var + 1 == nvars {
        current[var] = remaining as u8;
        out.push(current.clone());
        current[var] = 0;
        return;
    }
    for k in (0..=remaining).rev() {
        current[var] = k as u8;
        monomials_of_degree(nvars, remaining - k, var + 1, current, out);
    }
    current[var] = 0;
}

type LayoutCache = HashMap<(usize, usize), Arc<JetLayout>>;

/// Shared, cached layout for `nvars` variables truncated at `order`.
pub fn layout(nvars: usize, order: usize) -> Arc<JetLayout> {
    static CACHE: OnceLock<Mutex<LayoutCache>> = OnceLock::new();
    thread_local! {
        static LOCAL: RefCell<LayoutCache> = RefCell::new(HashMap::new());
    }
    assert!(nvars > 0, "jets need at least one variable");
    assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
    // per-thread front so parallel grid maps do not serialise on the mutex
    LOCAL.with(|local| {
        local
            .borrow_mut()
            .entry((nvars, order))
            .or_insert_with(|| {
                let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
                let mut guard = cache.lock().expect("jet layout cache poisoned");
                guard
                    .entry((nvars, order))
                    .or_insert_with(|| Arc::new(JetLayout::build(nvars, order)))
                    .clone()
            })
            .clone()
    })
}

#[derive(Clone)]
pub struct Jet {
    layout: Arc<JetLayout>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("nvars", &self.layout.nvars)
            .field("order", &self.layout.order)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.layout.nvars == other.layout.nvars
            && self.layout.order == other.layout.order
            && self.coeffs == other.coeffs
    }
}

impl Jet {
    pub fn constant(nvars: usize, order: usize, value: f64) -> Self {
        let layout = layout(nvars, order);
        let mut coeffs = vec![0.0; layout.len()];
        coeffs[0] = value;
        Jet { layout, coeffs }
    }

    /// The coordinate function `v`, expanded around `value`.
    pub fn variable(nvars: usize, order: usize, var: usize, value: f64) -> Self {
        assert!(var < nvars);
        let mut jet = Jet::constant(nvars, order, value);
        if order > 0 {
            // degree-1 monomials follow the constant, ordered by variable
            jet.coeffs[1 + var] = 1.0;
        }
        jet
    }

    /// One variable jet per coordinate of `point`.
    pub fn seed(point: &[f64], order: usize) -> Vec<Jet> {
        point
            .iter()
            .enumerate()
            .map(|(v, &value)| Jet::variable(point.len(), order, v, value))
            .collect()
    }

    fn from_parts(layout: Arc<JetLayout>, coeffs: Vec<f64>) -> Self {
        debug_assert_eq!(layout.len(), coeffs.len());
        Jet { layout, coeffs }
    }

    pub fn layout(&self) -> &JetLayout {
        &self.layout
    }

    pub fn nvars(&self) -> usize {
        self.layout.nvars
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Partial derivative along the listed variables (repetitions allowed),
    /// e.g. `[0, 0, 3]` is `∂³f / ∂v0² ∂v3`.
    pub fn partial(&self, vars: &[usize]) -> f64 {
        assert!(
            vars.len() <= self.order(),
            "partial of order {} requested from a jet of order {}",
            vars.len(),
            self.order()
        );
        let mut exps = vec![0u8; self.nvars()];
        for &v in vars {
            exps[v] += 1;
        }
        let factorial: f64 = exps.iter().map(|&k| (1..=k as u32).product::<u32>() as f64).product();
        let index = self.layout.index_of(&exps).expect("monomial within order");
        self.coeffs[index] * factorial
    }

    /// Exact derivative of the truncated polynomial; the order drops by one.
    pub fn diff(&self, var: usize) -> Jet {
        assert!(self.order() > 0, "cannot differentiate an order-0 jet");
        let lower = layout(self.nvars(), self.order() - 1);
        let raise = &self.layout.raise[var];
        let coeffs = (0..lower.len())
            .map(|i| {
                let up = raise[i] as usize;
                (lower.exponents[i][var] as f64 + 1.0) * self.coeffs[up]
            })
            .collect();
        Jet::from_parts(lower, coeffs)
    }

    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order() {
            return self.clone();
        }
        let lower = layout(self.nvars(), order);
        let coeffs = self.coeffs[..lower.len()].to_vec();
        Jet::from_parts(lower, coeffs)
    }

    fn aligned<'a>(&'a self, other: &'a Jet) -> (std::borrow::Cow<'a, Jet>, std::borrow::Cow<'a, Jet>) {
        use std::borrow::Cow;
        assert_eq!(self.nvars(), other.nvars(), "jets over different variable sets");
        match self.order().cmp(&other.order()) {
            std::cmp::Ordering::Equal => (Cow::Borrowed(self), Cow::Borrowed(other)),
            std::cmp::Ordering::Less => (Cow::Borrowed(self), Cow::Owned(other.truncate(self.order()))),
            std::cmp::Ordering::Greater => (Cow::Owned(self.truncate(other.order())), Cow::Borrowed(other)),
        }
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        let (a, b) = self.aligned(other);
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(&p, &q)| f(p, q)).collect();
        Jet::from_parts(a.layout.clone(), coeffs)
    }

    fn product(&self, other: &Jet) -> Jet {
        let (a, b) = self.aligned(other);
        let mut coeffs = vec![0.0; a.layout.len()];
        for &[i, j, k] in &a.layout.products {
            coeffs[k as usize] += a.coeffs[i as usize] * b.coeffs[j as usize];
        }
        Jet::from_parts(a.layout.clone(), coeffs)
    }

    pub fn scale(&self, factor: f64) -> Jet {
        Jet::from_parts(self.layout.clone(), self.coeffs.iter().map(|c| c * factor).collect())
    }

    /// `g(self)` for a univariate `g` given by its Taylor coefficients
    /// `g^(k)(a) / k!` at `a = self.value()`, `k = 0..=order`.
    pub fn compose(&self, taylor: &[f64]) -> Jet {
        let order = self.order();
        assert!(taylor.len() > order);
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut out = Jet::constant(self.nvars(), order, taylor[order]);
        for k in (0..order).rev() {
            out = out.product(&h);
            out.coeffs[0] += taylor[k];
        }
        out
    }

    pub fn recip(&self) -> Result<Jet> {
        let a = self.value();
        if a == 0.0 {
            return Err(Error::Domain("division by zero".into()));
        }
        let taylor: Vec<f64> = (0..=self.order())
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign / a.powi(k as i32 + 1)
            })
            .collect();
        Ok(self.compose(&taylor))
    }

    pub fn try_div(&self, other: &Jet) -> Result<Jet> {
        Ok(self.product(&other.recip()?))
    }

    pub fn sqrt(&self) -> Result<Jet> {
        self.powf(0.5)
            .map_err(|_| Error::Domain(format!("sqrt of {}", self.value())))
    }

    pub fn exp(&self) -> Jet {
        let ea = self.value().exp();
        let mut factorial = 1.0;
        let taylor: Vec<f64> = (0..=self.order())
            .map(|k| {
                if k > 0 {
                    factorial *= k as f64;
                }
                ea / factorial
            })
            .collect();
        self.compose(&taylor)
    }

    pub fn ln(&self) -> Result<Jet> {
        let a = self.value();
        if a <= 0.0 {
            return Err(Error::Domain(format!("ln of non-positive value {a}")));
        }
        let taylor: Vec<f64> = (0..=self.order())
            .map(|k| match k {
                0 => a.ln(),
                _ => {
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    sign / (k as f64 * a.powi(k as i32))
                }
            })
            .collect();
        Ok(self.compose(&taylor))
    }

    pub fn powi(&self, exponent: i32) -> Result<Jet> {
        if exponent < 0 {
            return self.recip()?.powi(-exponent);
        }
        let mut out = Jet::constant(self.nvars(), self.order(), 1.0);
        let mut base = self.clone();
        let mut e = exponent as u32;
        while e > 0 {
            if e & 1 == 1 {
                out = out.product(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.product(&base);
            }
        }
        Ok(out)
    }

    pub fn powf(&self, exponent: f64) -> Result<Jet> {
        if exponent.fract() == 0.0 && exponent.abs() <= 64.0 {
            return self.powi(exponent as i32);
        }
        let a = self.value();
        if a < 0.0 || (a == 0.0 && (self.order() > 0 || exponent < 0.0)) {
            return Err(Error::Domain(format!("{a} raised to non-integer power {exponent}")));
        }
        if a == 0.0 {
            return Ok(Jet::constant(self.nvars(), 0, 0.0));
        }
        let mut binom = 1.0;
        let taylor: Vec<f64> = (0..=self.order())
            .map(|k| {
                if k > 0 {
                    binom *= (exponent - (k as f64 - 1.0)) / k as f64;
                }
                binom * a.powf(exponent - k as f64)
            })
            .collect();
        Ok(self.compose(&taylor))
    }

    pub fn abs(&self) -> Result<Jet> {
        let a = self.value();
        if a > 0.0 {
            Ok(self.clone())
        } else if a < 0.0 {
            Ok(-self)
        } else if self.order() == 0 {
            Ok(self.clone())
        } else {
            Err(Error::Domain(
                "abs is not differentiable where its argument vanishes".into(),
            ))
        }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::from_parts(self.layout.clone(), self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        self.coeffs.iter_mut().for_each(|c| *c = -*c);
        self
    }
}

impl Add<&Jet> for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub<&Jet> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<&Jet> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.product(rhs)
    }
}

macro_rules! forward_owned {
    ($trait:ident, $method:ident) => {
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                (&self).$method(rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                self.$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += rhs;
        out
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.coeffs[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.coeffs[0] -= rhs;
        self
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
    fn mul(mut self, rhs: f64) -> Jet {
        self.coeffs.iter_mut().for_each(|c| *c *= rhs);
        self
    }
}

/// Sum of a sequence of jets; `None` for an empty iterator.
pub fn sum<'a>(jets: impl IntoIterator<Item = &'a Jet>) -> Option<Jet> {
    let mut iter = jets.into_iter();
    let first = iter.next()?.clone();
    Some(iter.fold(first, |acc, j| acc + j))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn layout_sizes_match_binomials() {
        // C(m + K, K)
        assert_eq!(layout(2, 3).len(), 10);
        assert_eq!(layout(4, 4).len(), 70);
        assert_eq!(layout(6, 4).len(), 210);
    }

    #[test]
    fn lower_layout_is_prefix() {
        let hi = layout(3, 4);
        let lo = layout(3, 2);
        for i in 0..lo.len() {
            assert_eq!(hi.exponents(i), lo.exponents(i));
        }
    }

    #[test]
    fn product_of_variables() {
        // f = u * v^2 at (u, v) = (2, 3)
        let vars = Jet::seed(&[2.0, 3.0], 3);
        let f = &vars[0] * &(&vars[1] * &vars[1]);
        assert_eq!(f.value(), 18.0);
        assert_eq!(f.partial(&[0]), 9.0);
        assert_eq!(f.partial(&[1]), 12.0);
        assert_eq!(f.partial(&[1, 1]), 4.0);
        assert_eq!(f.partial(&[0, 1]), 6.0);
        assert_eq!(f.partial(&[0, 1, 1]), 2.0);
        assert_eq!(f.partial(&[0, 0]), 0.0);
    }

    #[test]
    fn elementary_functions_at_a_point() {
        let t = Jet::variable(1, 4, 0, 0.7);
        let e = t.exp();
        for k in 0..=4 {
            let vars = vec![0; k];
            assert!(close(e.partial(&vars), 0.7f64.exp()));
        }
        let s = t.sqrt().unwrap();
        assert!(close(s.partial(&[0]), 0.5 / 0.7f64.sqrt()));
        assert!(close(s.partial(&[0, 0]), -0.25 * 0.7f64.powf(-1.5)));
        let l = t.ln().unwrap();
        assert!(close(l.partial(&[0, 0, 0]), 2.0 / 0.7f64.powi(3)));
        let r = t.recip().unwrap();
        assert!(close(r.partial(&[0, 0]), 2.0 / 0.7f64.powi(3)));
        let p = t.powf(1.5).unwrap();
        assert!(close(p.partial(&[0, 0]), 0.75 / 0.7f64.sqrt()));
    }

    #[test]
    fn diff_and_truncate_agree_with_partials() {
        let vars = Jet::seed(&[0.3, -1.2, 0.5], 4);
        let f = (&vars[0] * &vars[1] + &vars[2] * &vars[2]).exp();
        let g = f.diff(1);
        assert_eq!(g.order(), 3);
        assert!(close(g.value(), f.partial(&[1])));
        assert!(close(g.partial(&[0, 2]), f.partial(&[1, 0, 2])));
        let t = f.truncate(2);
        assert_eq!(t.partial(&[0, 1]), f.partial(&[0, 1]));
    }

    #[test]
    fn mixed_orders_truncate_to_lower() {
        let a = Jet::variable(2, 3, 0, 1.0);
        let b = Jet::variable(2, 1, 1, 2.0);
        assert_eq!((&a * &b).order(), 1);
    }

    #[test]
    fn domain_errors() {
        let z = Jet::variable(1, 1, 0, 0.0);
        assert!(z.recip().is_err());
        assert!(z.sqrt().is_err());
        assert!(z.ln().is_err());
        assert!(z.abs().is_err());
        assert!(Jet::constant(1, 0, 0.0).abs().is_ok());
        assert!(Jet::variable(1, 2, 0, -1.0).powf(0.5).is_err());
        // integer powers are fine for negative bases
        let m = Jet::variable(1, 2, 0, -2.0).powf(3.0).unwrap();
        assert_eq!(m.value(), -8.0);
        assert_eq!(m.partial(&[0]), 12.0);
    }
}
