use super::{check_dim, Field, Jet, ScalarField, TangentSample};
use crate::error::{Error, Result};

/// `-f`. Negation is exact, so `f + (-f)` vanishes identically.
#[derive(Debug, Clone)]
pub struct Negated(pub Field);

impl ScalarField for Negated {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn smoothness(&self) -> usize {
        self.0.smoothness()
    }
    fn jet(&self, p: &TangentSample, order: usize) -> Result<Jet> {
        Ok(-self.0.jet(p, order)?)
    }
}

/// `c · f`.
#[derive(Debug, Clone)]
pub struct Scaled(pub f64, pub Field);

impl ScalarField for Scaled {
    fn dim(&self) -> usize {
        self.1.dim()
    }
    fn smoothness(&self) -> usize {
        self.1.smoothness()
    }
    fn jet(&self, p: &TangentSample, order: usize) -> Result<Jet> {
        Ok(self.1.jet(p, order)? * self.0)
    }
}

/// `f · g`.
#[derive(Debug, Clone)]
pub struct Product(pub Field, pub Field);

impl ScalarField for Product {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn smoothness(&self) -> usize {
        self.0.smoothness().min(self.1.smoothness())
    }
    fn jet(&self, p: &TangentSample, order: usize) -> Result<Jet> {
        Ok(self.0.jet(p, order)? * self.1.jet(p, order)?)
    }
}

/// `Σ fₖ`, summed left to right.
#[derive(Debug, Clone)]
pub struct Sum(Vec<Field>);

impl Sum {
    pub fn new(terms: Vec<Field>) -> Result<Self> {
        let Some(first) = terms.first() else {
            return Err(Error::PreconditionFailed("empty sum of fields".into()));
        };
        let dim = first.dim();
        if let Some(bad) = terms.iter().find(|t| t.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        Ok(Sum(terms))
    }

    pub fn terms(&self) -> &[Field] {
        &self.0
    }
}

impl ScalarField for Sum {
    fn dim(&self) -> usize {
        self.0[0].dim()
    }
    fn smoothness(&self) -> usize {
        self.0.iter().map(|t| t.smoothness()).min().unwrap_or(0)
    }
    fn jet(&self, p: &TangentSample, order: usize) -> Result<Jet> {
        let mut acc = self.0[0].jet(p, order)?;
        for term in &self.0[1..] {
            acc = acc + term.jet(p, order)?;
        }
        Ok(acc)
    }
}

/// Conformal rescaling `e^{2a} · F` of a field `F` by a function `a`.
#[derive(Debug, Clone)]
pub struct Conformal {
    pub exponent: Field,
    pub base: Field,
}

impl ScalarField for Conformal {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn smoothness(&self) -> usize {
        self.base.smoothness().min(self.exponent.smoothness())
    }
    fn jet(&self, p: &TangentSample, order: usize) -> Result<Jet> {
        check_dim(self.dim(), p)?;
        let factor = (self.exponent.jet(p, order)? * 2.0).exp();
        Ok(factor * self.base.jet(p, order)?)
    }
}
