//! Exact algebra on polynomial symbols and affine self-maps of the plane.
//!
//! Polynomials are dense coefficient vectors indexed by degree. The stored
//! representation is always trimmed, so the zero polynomial is the empty
//! vector and `degree()` is `None` for it.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{FockError, Result};

/// Finite complex polynomial `sum_k coeffs[k] z^k`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComplexPolynomial {
    coeffs: Vec<Complex64>,
}

impl ComplexPolynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// `c z^k`.
    pub fn monomial(k: usize, c: Complex64) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `z^k`, zero beyond the stored range.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&x| x * c).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) - other.coeff(k)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Max modulus of the coefficients; used for relative comparisons.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl Serialize for ComplexPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.coeffs.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexPolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(d)?;
        if pairs.iter().flatten().any(|x| !x.is_finite()) {
            return Err(D::Error::custom("polynomial coefficients must be finite"));
        }
        Ok(Self::new(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect()))
    }
}

/// Coefficient-wise derivative.
pub fn derivative(p: &ComplexPolynomial) -> ComplexPolynomial {
    ComplexPolynomial::new(
        p.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect(),
    )
}

/// Antiderivative vanishing at the origin, i.e. the path integral from 0.
pub fn antiderivative(p: &ComplexPolynomial) -> ComplexPolynomial {
    if p.is_zero() {
        return ComplexPolynomial::zero();
    }
    let mut out = Vec::with_capacity(p.coeffs.len() + 1);
    out.push(Complex64::new(0.0, 0.0));
    out.extend(p.coeffs.iter().enumerate().map(|(k, &c)| c / (k + 1) as f64));
    ComplexPolynomial::new(out)
}

/// `psi(z) = a z + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub a: Complex64,
    pub b: Complex64,
}

impl AffineMap {
    pub fn new(a: Complex64, b: Complex64) -> Self {
        Self { a, b }
    }

    pub fn identity() -> Self {
        Self::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn rotation(theta: f64) -> Self {
        Self::new(Complex64::from_polar(1.0, theta), Complex64::new(0.0, 0.0))
    }

    pub fn real(a: f64, b: f64) -> Self {
        Self::new(Complex64::new(a, 0.0), Complex64::new(b, 0.0))
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        self.a * z + self.b
    }

    pub fn as_polynomial(&self) -> ComplexPolynomial {
        ComplexPolynomial::new(vec![self.b, self.a])
    }

    /// Reads an affine map off a polynomial of degree at most one.
    pub fn from_polynomial(p: &ComplexPolynomial) -> Option<Self> {
        match p.degree() {
            None | Some(0) | Some(1) => Some(Self::new(p.coeff(1), p.coeff(0))),
            _ => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct AffineRepr {
    a: [f64; 2],
    b: [f64; 2],
}

impl Serialize for AffineMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        AffineRepr { a: [self.a.re, self.a.im], b: [self.b.re, self.b.im] }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AffineMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = AffineRepr::deserialize(d)?;
        if r.a.iter().chain(r.b.iter()).any(|x| !x.is_finite()) {
            return Err(D::Error::custom("affine coefficients must be finite"));
        }
        Ok(Self::new(Complex64::new(r.a[0], r.a[1]), Complex64::new(r.b[0], r.b[1])))
    }
}

/// `p(a z + b)` expanded by the binomial theorem.
pub fn compose_affine(p: &ComplexPolynomial, m: &AffineMap) -> ComplexPolynomial {
    let Some(deg) = p.degree() else {
        return ComplexPolynomial::zero();
    };
    // Horner in the polynomial ring: ((c_d) * psi + c_{d-1}) * psi + ...
    let psi = m.as_polynomial();
    let mut acc = ComplexPolynomial::constant(p.coeff(deg));
    for k in (0..deg).rev() {
        acc = acc.mul(&psi).add(&ComplexPolynomial::constant(p.coeff(k)));
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OperatorKind {
    /// `f -> int_0^z f(psi(w)) g'(w) dw`
    V,
    /// `f -> int_0^z f'(psi(w)) g(w) dw`
    J,
}

/// The unit of classification: a symbol, a self-map and an operator kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolPair {
    pub kind: OperatorKind,
    pub g: ComplexPolynomial,
    pub psi: AffineMap,
}

impl SymbolPair {
    pub fn new(kind: OperatorKind, g: ComplexPolynomial, psi: AffineMap) -> Self {
        Self { kind, g, psi }
    }

    pub fn v(g: ComplexPolynomial, psi: AffineMap) -> Self {
        Self::new(OperatorKind::V, g, psi)
    }

    pub fn j(g: ComplexPolynomial, psi: AffineMap) -> Self {
        Self::new(OperatorKind::J, g, psi)
    }
}

/// Whether `exp(alpha z^2 + beta z + gamma)` lies in `F_p`.
///
/// The Gaussian weight `exp(-p|z|^2/2)` dominates iff `|alpha| < 1/2`; the
/// boundary `|alpha| = 1/2` diverges along one of the two critical rays for
/// every `beta`.
pub fn exp_quadratic_in_fock(alpha: Complex64, _beta: Complex64, p: f64) -> Result<bool> {
    if !(p > 0.0) {
        return Err(FockError::InvalidArgument(format!("Fock exponent must be positive, got {p}")));
    }
    Ok(alpha.norm() < 0.5)
}

/// Whether `exp(h)` lies in `F_p` for a polynomial `h`.
pub fn exp_polynomial_in_fock(h: &ComplexPolynomial, p: f64) -> Result<bool> {
    match h.degree() {
        Some(d) if d >= 3 => {
            if !(p > 0.0) {
                return Err(FockError::InvalidArgument(format!(
                    "Fock exponent must be positive, got {p}"
                )));
            }
            Ok(false)
        }
        _ => exp_quadratic_in_fock(h.coeff(2), h.coeff(1), p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(derivative(&ComplexPolynomial::from_real(&[0.0, 0.0, 1.0])), ComplexPolynomial::from_real(&[0.0, 2.0]));
        assert!(derivative(&ComplexPolynomial::from_real(&[5.0])).is_zero());
        assert_eq!(derivative(&ComplexPolynomial::from_real(&[0.0, 1.0, 3.0])), ComplexPolynomial::from_real(&[1.0, 6.0]));
    }

    #[test]
    fn antiderivative_examples() {
        assert_eq!(antiderivative(&ComplexPolynomial::from_real(&[0.0, 2.0])), ComplexPolynomial::from_real(&[0.0, 0.0, 1.0]));
        assert_eq!(antiderivative(&ComplexPolynomial::from_real(&[1.0])), ComplexPolynomial::from_real(&[0.0, 1.0]));
        let cube = antiderivative(&ComplexPolynomial::from_real(&[0.0, 0.0, 1.0]));
        assert_eq!(cube.degree(), Some(3));
        assert!((cube.coeff(3).re - 1.0 / 3.0).abs() < 1e-15);
        assert!(antiderivative(&ComplexPolynomial::zero()).is_zero());
    }

    #[test]
    fn compose_examples() {
        let sq = ComplexPolynomial::from_real(&[0.0, 0.0, 1.0]);
        assert_eq!(compose_affine(&sq, &AffineMap::real(1.0, 1.0)), ComplexPolynomial::from_real(&[1.0, 2.0, 1.0]));
        let cube = ComplexPolynomial::from_real(&[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(compose_affine(&cube, &AffineMap::real(0.5, 0.0)), ComplexPolynomial::from_real(&[0.0, 0.0, 0.0, 0.125]));
        let z = ComplexPolynomial::from_real(&[0.0, 1.0]);
        let m = AffineMap::new(c(0.0, 0.0), c(2.0, -1.0));
        assert_eq!(compose_affine(&z, &m), ComplexPolynomial::constant(c(2.0, -1.0)));
    }

    #[test]
    fn zero_polynomial_is_trimmed() {
        let p = ComplexPolynomial::new(vec![c(0.0, 0.0); 4]);
        assert!(p.is_zero());
        assert_eq!(p.degree(), None);
        assert_eq!(ComplexPolynomial::from_real(&[1.0, 2.0, 0.0]).degree(), Some(1));
    }

    #[test]
    fn exp_quadratic_rule() {
        assert!(exp_quadratic_in_fock(c(0.0, 0.0), c(7.0, 0.0), 2.0).unwrap());
        assert!(exp_quadratic_in_fock(c(0.4, 0.0), c(-3.0, 2.0), 2.0).unwrap());
        assert!(!exp_quadratic_in_fock(c(0.5, 0.0), c(0.0, 0.0), 2.0).unwrap());
        assert!(!exp_quadratic_in_fock(c(0.0, 0.5), c(0.0, 0.0), 1.0).unwrap());
        assert!(exp_quadratic_in_fock(c(0.1, 0.0), c(0.0, 0.0), 0.0).is_err());
        assert!(!exp_polynomial_in_fock(&ComplexPolynomial::from_real(&[0.0, 0.0, 0.0, 1e-9]), 2.0).unwrap());
        assert!(exp_polynomial_in_fock(&ComplexPolynomial::from_real(&[1.0, 40.0]), 0.5).unwrap());
    }

    /// Radial-angular quadrature of `exp(p Re(alpha z^2) - p|z|^2/2)` over `|z| < r_max`,
    /// composite midpoint in both variables. Independent of the closed-form rule.
    fn truncated_exp_quadratic_integral(alpha: f64, p: f64, r_max: f64) -> f64 {
        let nr = (r_max * 400.0) as usize;
        let nt = 4096;
        let dr = r_max / nr as f64;
        let dt = std::f64::consts::TAU / nt as f64;
        let mut total = 0.0;
        for i in 0..nr {
            let r = (i as f64 + 0.5) * dr;
            let mut ring = 0.0;
            for j in 0..nt {
                let t = (j as f64 + 0.5) * dt;
                ring += (p * r * r * (alpha * (2.0 * t).cos() - 0.5)).exp();
            }
            total += ring * dt * r * dr;
        }
        total
    }

    #[test]
    fn exp_quadratic_rule_matches_quadrature_oracle() {
        // alpha = 0.4 settles; alpha = 0.5 keeps growing linearly in the radius.
        let settled: Vec<f64> = [6.0, 12.0, 18.0].iter().map(|&r| truncated_exp_quadratic_integral(0.4, 2.0, r)).collect();
        assert!((settled[2] - settled[1]).abs() / settled[2] < 1e-6);
        let growing: Vec<f64> = [6.0, 12.0, 18.0].iter().map(|&r| truncated_exp_quadratic_integral(0.5, 2.0, r)).collect();
        assert!(growing[1] > 1.5 * growing[0] && growing[2] > 1.3 * growing[1]);
    }

    #[test]
    fn serde_formats() {
        let p = ComplexPolynomial::new(vec![c(1.0, -2.0), c(0.0, 3.0)]);
        assert_eq!(serde_json::to_string(&p).unwrap(), "[[1.0,-2.0],[0.0,3.0]]");
        let m = AffineMap::new(c(0.5, 0.0), c(1.0, 1.0));
        assert_eq!(serde_json::to_string(&m).unwrap(), r#"{"a":[0.5,0.0],"b":[1.0,1.0]}"#);
        let back: AffineMap = serde_json::from_str(r#"{"a":[0.5,0.0],"b":[1.0,1.0]}"#).unwrap();
        assert_eq!(back, m);
    }

    fn arb_poly() -> impl Strategy<Value = ComplexPolynomial> {
        prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 0..12)
            .prop_map(|v| ComplexPolynomial::new(v.into_iter().map(|(a, b)| c(a, b)).collect()))
    }

    proptest! {
        #[test]
        fn derivative_inverts_antiderivative(p in arb_poly()) {
            let back = derivative(&antiderivative(&p));
            prop_assert_eq!(back.degree(), p.degree());
            for k in 0..p.coeffs().len() {
                prop_assert!((back.coeff(k) - p.coeff(k)).norm() <= 1e-14 * (1.0 + p.coeff(k).norm()));
            }
        }

        #[test]
        fn compose_with_identity_is_noop(p in arb_poly()) {
            prop_assert_eq!(compose_affine(&p, &AffineMap::identity()), p);
        }

        #[test]
        fn compose_preserves_degree(p in arb_poly(), ar in 0.1f64..2.0, th in 0.0f64..6.3, br in -2.0f64..2.0, bi in -2.0f64..2.0) {
            let m = AffineMap::new(Complex64::from_polar(ar, th), c(br, bi));
            prop_assert_eq!(compose_affine(&p, &m).degree(), p.degree());
        }

        #[test]
        fn compose_agrees_pointwise(p in arb_poly(), ar in -1.5f64..1.5, ai in -1.5f64..1.5, br in -1.0f64..1.0, zr in -1.0f64..1.0, zi in -1.0f64..1.0) {
            let m = AffineMap::new(c(ar, ai), c(br, 0.5));
            let z = c(zr, zi);
            let lhs = compose_affine(&p, &m).eval(z);
            let rhs = p.eval(m.apply(z));
            prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()));
        }

        #[test]
        fn exp_quadratic_monotone(a in 0.0f64..1.0, shrink in 0.0f64..1.0, th in 0.0f64..6.3) {
            let alpha = Complex64::from_polar(a, th);
            let smaller = Complex64::from_polar(a * shrink, th * 0.5);
            if exp_quadratic_in_fock(alpha, c(0.0, 0.0), 2.0).unwrap() {
                prop_assert!(exp_quadratic_in_fock(smaller, c(0.0, 0.0), 2.0).unwrap());
            }
        }
    }
}
