//! Lie brackets of jet-valued vector fields and endomorphisms on `TM`.
//!
//! Vector fields are stored as `2n` component jets with respect to the frame
//! `(∂/∂x¹..∂/∂xⁿ, ∂/∂y¹..∂/∂yⁿ)`; a (1,1)-tensor `T` is stored column by
//! column, `t[μ][ν]` being the `μ`-component of `T(∂_ν)`. The
//! Frölicher–Nijenhuis bracket of a vector field `S` with a (1,1)-tensor `T`
//! is the Lie derivative, `[S, T](X) = [S, TX] − T[S, X]`.

use nalgebra::DMatrix;

use crate::coords::{Jet, TangentSample};

pub type VectorJet = Vec<Jet>;
pub type EndoJet = Vec<Vec<Jet>>;

/// `S = yⁱ ∂/∂xⁱ − 2Gⁱ ∂/∂yⁱ` from coefficient jets.
pub fn spray_vector(p: &TangentSample, coeffs: &[Jet]) -> VectorJet {
    let n = p.dim();
    let order = coeffs[0].order();
    let vars = p.seed(order);
    let mut out: VectorJet = vars[n..].to_vec();
    out.extend(coeffs.iter().map(|g| g * -2.0));
    out
}

/// Directional derivative `A(f) = Aᵘ ∂_μ f`; the order drops by one.
pub fn apply(a: &[Jet], f: &Jet) -> Jet {
    let mut terms = a.iter().enumerate().map(|(mu, comp)| comp * f.diff(mu));
    let first = terms.next().expect("non-empty vector field");
    terms.fold(first, |acc, t| acc + t)
}

/// `[A, B]ᵘ = A(Bᵘ) − B(Aᵘ)`.
pub fn lie_bracket(a: &[Jet], b: &[Jet]) -> VectorJet {
    a.iter()
        .zip(b)
        .map(|(a_mu, b_mu)| apply(a, b_mu) - apply(b, a_mu))
        .collect()
}

/// Constant tensor with entries `m[μ][ν]`.
pub fn constant_endo(m: &DMatrix<f64>, nvars: usize, order: usize) -> EndoJet {
    (0..m.nrows())
        .map(|mu| {
            (0..m.ncols())
                .map(|nu| Jet::constant(nvars, order, m[(mu, nu)]))
                .collect()
        })
        .collect()
}

/// The tangent structure `J = ∂/∂yⁱ ⊗ dxⁱ` as a `2n × 2n` matrix.
pub fn tangent_structure(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(n + i, i)] = 1.0;
    }
    j
}

/// `[S, T](∂_ν) = [S, T∂_ν] − T[S, ∂_ν]` for every frame vector `∂_ν`.
pub fn lie_derivative(s: &[Jet], t: &EndoJet) -> EndoJet {
    let dim = s.len();
    let mut out = vec![Vec::with_capacity(dim); dim];
    for nu in 0..dim {
        let t_col: VectorJet = (0..dim).map(|mu| t[mu][nu].clone()).collect();
        let first = lie_bracket(s, &t_col);
        // [S, ∂_ν]ᵘ = −∂_ν Sᵘ
        let s_nu: VectorJet = s.iter().map(|c| -c.diff(nu)).collect();
        for (mu, first_mu) in first.into_iter().enumerate() {
            let correction = (0..dim)
                .map(|k| &t[mu][k] * &s_nu[k])
                .reduce(|a, b| a + b)
                .expect("non-empty");
            out[mu].push(first_mu - correction);
        }
    }
    out
}

pub fn values(t: &EndoJet) -> DMatrix<f64> {
    let dim = t.len();
    DMatrix::from_fn(dim, dim, |mu, nu| t[mu][nu].value())
}

/// `h = ½(Id − [S, J])` as jets one order below the spray coefficients.
pub fn horizontal_projector_jets(p: &TangentSample, coeffs: &[Jet]) -> EndoJet {
    let n = p.dim();
    let s = spray_vector(p, coeffs);
    let order = s[0].order();
    let j = constant_endo(&tangent_structure(n), 2 * n, order);
    let sj = lie_derivative(&s, &j);
    sj.into_iter()
        .enumerate()
        .map(|(mu, row)| {
            row.into_iter()
                .enumerate()
                .map(|(nu, entry)| {
                    let id = if mu == nu { 1.0 } else { 0.0 };
                    (-entry + id) * 0.5
                })
                .collect()
        })
        .collect()
}

/// `Φ = (Id − h) ∘ [S, h]` as a full `2n × 2n` matrix at `p`. Requires
/// coefficient jets of order 2.
pub fn jacobi_full(p: &TangentSample, coeffs: &[Jet]) -> DMatrix<f64> {
    let s = spray_vector(p, coeffs);
    let h = horizontal_projector_jets(p, coeffs);
    let sh = values(&lie_derivative(&s, &h));
    let dim = h.len();
    let v = DMatrix::identity(dim, dim) - values(&h);
    v * sh
}
