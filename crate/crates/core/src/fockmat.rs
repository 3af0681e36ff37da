//! Truncated matrices of Volterra-type, composition and multiplication
//! operators in the orthonormal Fock basis `e_n(z) = z^n / sqrt(n!)`.
//!
//! Every column is assembled directly in basis coordinates, where the
//! elementary maps are well scaled:
//!
//! ```text
//! z^j e_k      = sqrt((k+j)! / k!) e_{k+j}
//! int_0^z e_k  = e_{k+1} / sqrt(k+1)
//! d/dz e_k     = sqrt(k) e_{k-1}
//! e_n(a z + b) = sum_k sqrt(n!/k!) / (n-k)! a^k b^(n-k) e_k
//! ```
//!
//! The binomial coefficients in the last line are formed from log-factorials,
//! so raw factorials never appear even for `N` in the hundreds.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FockError, Result};
use crate::symbols::{derivative, AffineMap, ComplexPolynomial, OperatorKind, SymbolPair};

pub const MIN_DIM: usize = 4;

/// Largest dimension exported as JSON.
pub const JSON_MAX_DIM: usize = 32;

/// What a truncated matrix represents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum OperatorSpec {
    Pair(SymbolPair),
    Composition { psi: AffineMap },
    Multiplication { g: ComplexPolynomial },
    Difference { first: SymbolPair, second: SymbolPair },
}

/// `ln k!` for `k = 0..len`, by cumulative log sums.
struct LogFactorials(Vec<f64>);

impl LogFactorials {
    fn new(len: usize) -> Self {
        let mut t = Vec::with_capacity(len + 1);
        t.push(0.0);
        let mut acc = 0.0;
        for k in 1..=len {
            acc += (k as f64).ln();
            t.push(acc);
        }
        Self(t)
    }

    fn get(&self, k: usize) -> f64 {
        self.0[k]
    }
}

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Basis coordinates of `e_n(a z + b)`.
fn compose_basis(n: usize, psi: &AffineMap, lf: &LogFactorials) -> Vec<Complex64> {
    let (la, pa) = (psi.a.norm().ln(), psi.a.arg());
    let (lb, pb) = (psi.b.norm().ln(), psi.b.arg());
    (0..=n)
        .map(|k| {
            let j = n - k;
            if (k > 0 && psi.a == czero()) || (j > 0 && psi.b == czero()) {
                return czero();
            }
            let mut log_mag = 0.5 * (lf.get(n) - lf.get(k)) - lf.get(j);
            let mut phase = 0.0;
            if k > 0 {
                log_mag += k as f64 * la;
                phase += k as f64 * pa;
            }
            if j > 0 {
                log_mag += j as f64 * lb;
                phase += j as f64 * pb;
            }
            Complex64::from_polar(log_mag.exp(), phase)
        })
        .collect()
}

/// `sqrt((k+j)! / k!)`; an exact integer product when it fits in 53 bits.
fn rising_sqrt(k: usize, j: usize, lf: &LogFactorials) -> f64 {
    const EXACT: f64 = 9_007_199_254_740_992.0;
    let mut prod = 1.0f64;
    for i in 1..=j {
        prod *= (k + i) as f64;
        if prod > EXACT {
            return (0.5 * (lf.get(k + j) - lf.get(k))).exp();
        }
    }
    prod.sqrt()
}

/// Basis coordinates of `h * f` for `f` in basis coordinates.
fn multiply_basis(f: &[Complex64], h: &ComplexPolynomial, lf: &LogFactorials) -> Vec<Complex64> {
    if h.is_zero() || f.is_empty() {
        return Vec::new();
    }
    let mut out = vec![czero(); f.len() + h.coeffs().len() - 1];
    for (k, &fk) in f.iter().enumerate() {
        if fk == czero() {
            continue;
        }
        for (j, &hj) in h.coeffs().iter().enumerate() {
            out[k + j] += fk * hj * rising_sqrt(k, j, lf);
        }
    }
    out
}

/// Basis coordinates of the antiderivative vanishing at 0.
fn integrate_basis(f: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![czero(); f.len() + 1];
    for (k, &fk) in f.iter().enumerate() {
        out[k + 1] = fk / ((k + 1) as f64).sqrt();
    }
    out
}

fn column(spec: &OperatorSpec, n: usize, lf: &LogFactorials) -> Vec<Complex64> {
    match spec {
        OperatorSpec::Pair(pair) => match pair.kind {
            OperatorKind::V => {
                let dg = derivative(&pair.g);
                integrate_basis(&multiply_basis(&compose_basis(n, &pair.psi, lf), &dg, lf))
            }
            OperatorKind::J => {
                if n == 0 {
                    return Vec::new();
                }
                // e_n' = sqrt(n) e_{n-1}, then precompose
                let scale = (n as f64).sqrt();
                let fp: Vec<Complex64> = compose_basis(n - 1, &pair.psi, lf).into_iter().map(|c| c * scale).collect();
                integrate_basis(&multiply_basis(&fp, &pair.g, lf))
            }
        },
        OperatorSpec::Composition { psi } => compose_basis(n, psi, lf),
        OperatorSpec::Multiplication { g } => {
            let mut e = vec![czero(); n + 1];
            e[n] = Complex64::new(1.0, 0.0);
            multiply_basis(&e, g, lf)
        }
        OperatorSpec::Difference { first, second } => {
            let a = column(&OperatorSpec::Pair(first.clone()), n, lf);
            let b = column(&OperatorSpec::Pair(second.clone()), n, lf);
            let len = a.len().max(b.len());
            (0..len)
                .map(|k| a.get(k).copied().unwrap_or_default() - b.get(k).copied().unwrap_or_default())
                .collect()
        }
    }
}

fn symbol_degree(spec: &OperatorSpec) -> usize {
    let deg = |p: &ComplexPolynomial| p.degree().unwrap_or(0);
    match spec {
        OperatorSpec::Pair(p) => deg(&p.g),
        OperatorSpec::Composition { .. } => 0,
        OperatorSpec::Multiplication { g } => deg(g),
        OperatorSpec::Difference { first, second } => deg(&first.g).max(deg(&second.g)),
    }
}

/// The compression `P_N T P_N`: `entries[(m, n)] = <T e_n, e_m>`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    dim: usize,
    entries: DMatrix<Complex64>,
    meta: OperatorSpec,
}

impl TruncatedOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn meta(&self) -> &OperatorSpec {
        &self.meta
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            entries: DMatrix::zeros(dim, dim),
            meta: OperatorSpec::Multiplication { g: ComplexPolynomial::zero() },
        }
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Row-major, little-endian `(re, im)` pairs of `f64`, no header.
    pub fn write_binary<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for m in 0..self.dim {
            for n in 0..self.dim {
                let c = self.entries[(m, n)];
                out.write_all(&c.re.to_le_bytes())?;
                out.write_all(&c.im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<serde_json::Value> {
        if self.dim > JSON_MAX_DIM {
            return Err(FockError::InvalidArgument(format!(
                "JSON export is limited to N <= {JSON_MAX_DIM}, got {}",
                self.dim
            )));
        }
        let rows: Vec<Vec<[f64; 2]>> = (0..self.dim)
            .map(|m| (0..self.dim).map(|n| [self.entries[(m, n)].re, self.entries[(m, n)].im]).collect())
            .collect();
        Ok(serde_json::json!({ "dim": self.dim, "meta": self.meta, "entries": rows }))
    }
}

/// Reads the layout written by [`TruncatedOperator::write_binary`].
pub fn read_binary(bytes: &[u8]) -> Result<DMatrix<Complex64>> {
    let count = bytes.len() / 16;
    let dim = (count as f64).sqrt().round() as usize;
    if !bytes.len().is_multiple_of(16) || dim * dim != count {
        return Err(FockError::InvalidArgument(format!("{} bytes is not a square complex matrix", bytes.len())));
    }
    let val = |i: usize| f64::from_le_bytes(bytes[8 * i..8 * i + 8].try_into().expect("8-byte slice"));
    Ok(DMatrix::from_fn(dim, dim, |m, n| {
        let i = 2 * (m * dim + n);
        Complex64::new(val(i), val(i + 1))
    }))
}

/// Truncated matrix of the operator at dimension `n` (column `k` is the image of `e_k`).
pub fn build(spec: &OperatorSpec, n: usize) -> Result<TruncatedOperator> {
    if n < MIN_DIM {
        return Err(FockError::InvalidArgument(format!("dimension must be at least {MIN_DIM}, got {n}")));
    }
    let lf = LogFactorials::new(n + symbol_degree(spec) + 2);
    let columns: Vec<Vec<Complex64>> = (0..n).into_par_iter().map(|k| column(spec, k, &lf)).collect();
    let mut entries = DMatrix::zeros(n, n);
    for (k, col) in columns.iter().enumerate() {
        for (m, &c) in col.iter().enumerate().take(n) {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(FockError::InvalidArgument(format!("non-finite entry at ({m}, {k})")));
            }
            entries[(m, k)] = c;
        }
    }
    Ok(TruncatedOperator { dim: n, entries, meta: spec.clone() })
}

pub fn build_pair(pair: &SymbolPair, n: usize) -> Result<TruncatedOperator> {
    build(&OperatorSpec::Pair(pair.clone()), n)
}

/// Max entry of `V_g + J_g - M_g + R` over the leading `(N-d) x (N-d)` block,
/// where `R e_n = g(0) <e_n, e_0> e_0`.
pub fn parts_identity_residual(g: &ComplexPolynomial, n: usize) -> Result<f64> {
    let d = g.degree().unwrap_or(0);
    if n <= d + 2 {
        return Err(FockError::InvalidArgument(format!("need N > deg g + 2, got N = {n}, deg = {d}")));
    }
    let id = AffineMap::identity();
    let v = build_pair(&SymbolPair::v(g.clone(), id), n)?;
    let j = build_pair(&SymbolPair::j(g.clone(), id), n)?;
    let m = build(&OperatorSpec::Multiplication { g: g.clone() }, n)?;
    let mut sum = &v.entries + &j.entries - &m.entries;
    sum[(0, 0)] += g.coeff(0);
    let block = n - d;
    Ok(sum.view((0, 0), (block, block)).iter().map(|c| c.norm()).fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSpectrum {
    /// Descending.
    pub values: Vec<f64>,
    pub source_dim: usize,
}

impl SingularSpectrum {
    pub fn largest(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn smallest(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `(sum s_k^p)^{1/p}`.
    pub fn schatten(&self, p: f64) -> Result<f64> {
        if !(p > 0.0) {
            return Err(FockError::InvalidArgument(format!("Schatten exponent must be positive, got {p}")));
        }
        let top = self.largest();
        if top == 0.0 {
            return Ok(0.0);
        }
        // scale out the top value so large p cannot overflow
        let s: f64 = self.values.iter().map(|&x| (x / top).powf(p)).sum();
        Ok(top * s.powf(1.0 / p))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,value\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{i},{v}\n"));
        }
        out
    }
}

fn svd_values(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    let svd = m.clone().try_svd(false, false, f64::EPSILON, 10_000).ok_or(FockError::SvdNonConvergence(n))?;
    let mut values: Vec<f64> = svd.singular_values.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

pub fn singular_values(t: &TruncatedOperator) -> Result<SingularSpectrum> {
    Ok(SingularSpectrum { values: svd_values(&t.entries)?, source_dim: t.dim })
}

/// Truncated Schatten norm; a lower estimate of the true norm, nondecreasing in `N`.
pub fn schatten_norm(t: &TruncatedOperator, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(FockError::InvalidArgument(format!("Schatten exponent must be positive, got {p}")));
    }
    singular_values(t)?.schatten(p)
}

/// Relative operator-norm growth per ladder step still read as "stabilized".
pub const BOUNDED_GROWTH_TOL: f64 = 0.05;

pub const DEFAULT_TAIL_FRACTION: f64 = 0.1;
pub const DEFAULT_TAIL_TOL: f64 = 0.2;
pub const DEFAULT_DIMS: [usize; 3] = [32, 64, 128];

/// Singular values at or below this fraction of `max(1, s_max)` count as zero.
const ZERO_REL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactnessEvidence {
    pub dims: Vec<usize>,
    /// Largest singular value per dimension.
    pub operator_norms: Vec<f64>,
    /// Singular value at the start of the tail per dimension, floored at the zero threshold.
    pub tail_quantiles: Vec<f64>,
    /// Smallest nonzero singular value in the tail at the largest dimension.
    pub tail_min_nonzero: Option<f64>,
    pub bounded_signature: bool,
    pub compact: bool,
    /// Spectrum at the largest dimension.
    pub spectrum: SingularSpectrum,
}

/// Operator norm stabilizes along the dims ladder.
fn bounded_signature(norms: &[f64]) -> bool {
    let (prev, last) = (norms[norms.len() - 2], norms[norms.len() - 1]);
    if prev <= ZERO_REL {
        return last <= ZERO_REL;
    }
    last <= prev * (1.0 + BOUNDED_GROWTH_TOL)
}

/// Numerical compactness surrogate along a ladder of truncations.
///
/// Compact means: the operator norm stabilizes, the smallest nonzero singular
/// value in the last `tail_fraction` of the spectrum at the largest `N` is
/// below `tol`, and the tail quantile does not increase across `dims`.
pub fn compactness_proxy(
    spec: &OperatorSpec,
    dims: &[usize],
    tail_fraction: f64,
    tol: f64,
) -> Result<CompactnessEvidence> {
    if dims.len() < 3 || dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FockError::InvalidArgument("compactness proxy needs >= 3 increasing dims".into()));
    }
    if !(tail_fraction > 0.0 && tail_fraction < 1.0) || !(tol > 0.0) {
        return Err(FockError::InvalidArgument(format!(
            "tail fraction must lie in (0,1) and tol be positive, got {tail_fraction}, {tol}"
        )));
    }
    let spectra = dims
        .par_iter()
        .map(|&n| build(spec, n).and_then(|t| singular_values(&t)))
        .collect::<Result<Vec<_>>>()?;

    let mut operator_norms = Vec::with_capacity(dims.len());
    let mut tail_quantiles = Vec::with_capacity(dims.len());
    for (s, &n) in spectra.iter().zip(dims) {
        let floor = ZERO_REL * s.largest().max(1.0);
        let start = (((1.0 - tail_fraction) * n as f64).floor() as usize).min(n - 1);
        operator_norms.push(s.largest());
        tail_quantiles.push(s.values[start].max(floor));
    }
    let last = spectra.last().expect("nonempty ladder");
    let n = *dims.last().expect("nonempty ladder");
    let floor = ZERO_REL * last.largest().max(1.0);
    let start = ((1.0 - tail_fraction) * n as f64).floor() as usize;
    let tail_min_nonzero = last.values[start.min(n - 1)..].iter().copied().filter(|&x| x > floor).reduce(f64::min);

    let floors: Vec<f64> = spectra.iter().map(|s| ZERO_REL * s.largest().max(1.0)).collect();
    let decreasing = tail_quantiles
        .windows(2)
        .zip(floors.windows(2))
        .all(|(q, f)| q[1] < q[0] || (q[1] <= f[1] && q[0] <= f[0]));
    let bounded = bounded_signature(&operator_norms);
    let small_tail = tail_min_nonzero.is_none_or(|x| x < tol);
    Ok(CompactnessEvidence {
        dims: dims.to_vec(),
        operator_norms,
        tail_quantiles,
        tail_min_nonzero,
        bounded_signature: bounded,
        compact: bounded && small_tail && decreasing,
        spectrum: last.clone(),
    })
}

fn is_lower_triangular(m: &DMatrix<Complex64>) -> bool {
    (0..m.ncols()).all(|c| (0..c).all(|r| m[(r, c)] == czero()))
}

/// `||(T - lambda I)^{-1}||_2 = 1 / sigma_min(T - lambda I)`; `+inf` when singular.
pub fn resolvent_norm(t: &TruncatedOperator, lambda: Complex64) -> Result<f64> {
    let n = t.dim;
    let shifted = &t.entries - DMatrix::<Complex64>::identity(n, n) * lambda;
    // The Volterra truncations with psi = id are strictly lower triangular;
    // forward substitution keeps the inverse accurate far past 1/eps.
    let inverse = if is_lower_triangular(&shifted) {
        if lambda == czero() {
            None
        } else {
            shifted.solve_lower_triangular(&DMatrix::identity(n, n))
        }
    } else {
        shifted.clone().lu().try_inverse()
    };
    match inverse {
        Some(inv) if inv.iter().all(|c| c.re.is_finite() && c.im.is_finite()) => Ok(svd_values(&inv)?[0]),
        _ => {
            let s = svd_values(&shifted)?;
            let smin = *s.last().expect("nonempty spectrum");
            Ok(if smin == 0.0 { f64::INFINITY } else { 1.0 / smin })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly(xs: &[f64]) -> ComplexPolynomial {
        ComplexPolynomial::from_real(xs)
    }

    fn v_id(g: &[f64]) -> SymbolPair {
        SymbolPair::v(poly(g), AffineMap::identity())
    }

    #[test]
    fn v_z_squared_four_by_four() {
        let t = build_pair(&v_id(&[0.0, 0.0, 1.0]), 4).unwrap();
        let expect = |m: usize, n: usize| match (m, n) {
            (2, 0) => 2f64.sqrt(),
            (3, 1) => 2.0 * 6f64.sqrt() / 3.0,
            _ => 0.0,
        };
        for m in 0..4 {
            for n in 0..4 {
                assert!((t.entry(m, n) - Complex64::new(expect(m, n), 0.0)).norm() < 1e-14, "({m},{n})");
            }
        }
    }

    #[test]
    fn j_one_is_identity_minus_constant_projection() {
        let t = build_pair(&SymbolPair::j(poly(&[1.0]), AffineMap::identity()), 9).unwrap();
        for m in 0..9 {
            for n in 0..9 {
                let e = if m == n && n > 0 { 1.0 } else { 0.0 };
                assert!((t.entry(m, n).re - e).abs() < 1e-14 && t.entry(m, n).im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn identity_composition() {
        let t = build(&OperatorSpec::Composition { psi: AffineMap::identity() }, 12).unwrap();
        assert_eq!(t.entries(), &DMatrix::<Complex64>::identity(12, 12));
    }

    #[test]
    fn composition_matches_coefficient_route() {
        // C_psi e_n = e_n(psi) via symbols::compose_affine on the monomial, rescaled
        let psi = AffineMap::new(Complex64::new(0.3, 0.4), Complex64::new(-0.5, 0.2));
        let t = build(&OperatorSpec::Composition { psi }, 10).unwrap();
        let mut fact = [1.0f64; 12];
        for k in 1..12 {
            fact[k] = fact[k - 1] * k as f64;
        }
        for n in 0..10 {
            let mono = ComplexPolynomial::monomial(n, Complex64::new(1.0 / fact[n].sqrt(), 0.0));
            let img = crate::symbols::compose_affine(&mono, &psi);
            #[allow(clippy::needless_range_loop)]
            for m in 0..10 {
                let expect = img.coeff(m) * fact[m].sqrt();
                assert!((t.entry(m, n) - expect).norm() < 1e-12, "({m},{n})");
            }
        }
    }

    #[test]
    fn rejects_small_dims() {
        assert!(build_pair(&v_id(&[0.0, 1.0]), 3).is_err());
    }

    #[test]
    fn column_support_of_v() {
        let pair = SymbolPair::v(poly(&[0.0, 1.0, 2.0]), AffineMap::real(0.5, 1.0));
        let t = build_pair(&pair, 16).unwrap();
        for n in 0..16 {
            assert_eq!(t.entry(0, n), czero());
            for m in (n + 3).min(16)..16 {
                assert_eq!(t.entry(m, n), czero());
            }
        }
    }

    #[test]
    fn large_dimensions_stay_finite() {
        for psi in [AffineMap::real(0.5, 1.0), AffineMap::real(1.0, 1.0), AffineMap::identity()] {
            let t = build_pair(&SymbolPair::v(poly(&[0.0, 0.0, 1.0]), psi), 512).unwrap();
            assert!(t.entries().iter().all(|c| c.re.is_finite() && c.im.is_finite()));
        }
    }

    #[test]
    fn parts_identity_examples() {
        assert!(parts_identity_residual(&poly(&[0.0, 1.0]), 16).unwrap() <= 1e-12);
        assert!(parts_identity_residual(&poly(&[1.0, 0.0, 1.0]), 32).unwrap() <= 1e-12);
        assert_eq!(parts_identity_residual(&poly(&[]), 8).unwrap(), 0.0);
        assert!(parts_identity_residual(&poly(&[0.0, 0.0, 1.0]), 4).is_err());
    }

    #[test]
    fn zero_matrix_spectrum_and_norms() {
        let z = TruncatedOperator::zero(8);
        let s = singular_values(&z).unwrap();
        assert!(s.values.iter().all(|&x| x == 0.0));
        assert_eq!(schatten_norm(&z, 2.0).unwrap(), 0.0);
        assert_eq!(resolvent_norm(&z, Complex64::new(1.0, 0.0)).unwrap(), 1.0);
        assert!(schatten_norm(&z, 0.0).is_err());
    }

    #[test]
    fn zero_operator_is_numerically_compact() {
        let ev = compactness_proxy(&OperatorSpec::Pair(v_id(&[4.0])), &DEFAULT_DIMS, 0.1, 0.2).unwrap();
        assert!(ev.compact && ev.bounded_signature);
        assert_eq!(ev.tail_min_nonzero, None);
    }

    #[test]
    fn compactness_proxy_examples() {
        let ev = compactness_proxy(&OperatorSpec::Pair(v_id(&[0.0, 1.0])), &DEFAULT_DIMS, 0.1, 0.2).unwrap();
        assert!(ev.compact, "{ev:?}");
        let ev = compactness_proxy(&OperatorSpec::Pair(v_id(&[0.0, 0.0, 1.0])), &DEFAULT_DIMS, 0.1, 0.2).unwrap();
        assert!(!ev.compact && ev.bounded_signature);
        assert!(compactness_proxy(&OperatorSpec::Pair(v_id(&[0.0, 1.0])), &[32, 64], 0.1, 0.2).is_err());
    }

    #[test]
    fn resolvent_probe_inside_and_outside_disk() {
        let t = |n| build_pair(&v_id(&[0.0, 0.0, -1.0]), n).unwrap();
        let inside: Vec<f64> = [32, 64, 128].iter().map(|&n| resolvent_norm(&t(n), Complex64::new(1.0, 0.0)).unwrap()).collect();
        assert!(inside[0] < inside[1] && inside[1] < inside[2], "{inside:?}");
        // outside the disk the truncations increase to 1 / (2.5 - 2) = 2
        let outside: Vec<f64> = [64, 128, 256].iter().map(|&n| resolvent_norm(&t(n), Complex64::new(2.5, 0.0)).unwrap()).collect();
        assert!(outside.windows(2).all(|w| w[0] < w[1] && w[1] < 2.0), "{outside:?}");
        assert!((outside[2] - outside[1]) / outside[1] < 0.05);
    }

    #[test]
    fn exports() {
        let t = build_pair(&v_id(&[0.0, 0.0, 1.0]), 4).unwrap();
        let mut buf = Vec::new();
        t.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 * 16);
        assert_eq!(&read_binary(&buf).unwrap(), t.entries());
        // (2, 0) is the ninth complex entry in row-major order
        assert!((f64::from_le_bytes(buf[16 * 8..16 * 8 + 8].try_into().unwrap()) - 2f64.sqrt()).abs() < 1e-14);
        let js = t.to_json().unwrap();
        assert_eq!(js["dim"], 4);
        assert_eq!(js["entries"][2][0][0], t.entry(2, 0).re);
        assert!(build_pair(&v_id(&[0.0, 1.0]), 33).unwrap().to_json().is_err());
        let csv = singular_values(&t).unwrap().to_csv();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.starts_with("index,value\n0,"));
    }

    fn arb_c() -> impl Strategy<Value = Complex64> {
        (-1.5f64..1.5, -1.5f64..1.5).prop_map(|(re, im)| Complex64::new(re, im))
    }

    fn arb_pair() -> impl Strategy<Value = SymbolPair> {
        let kind = prop_oneof![Just(OperatorKind::V), Just(OperatorKind::J)];
        let g = proptest::collection::vec(arb_c(), 0..4).prop_map(ComplexPolynomial::new);
        let psi = (0.0f64..1.2, 0.0f64..std::f64::consts::TAU, arb_c())
            .prop_map(|(r, t, b)| AffineMap::new(Complex64::from_polar(r, t), b));
        (kind, g, psi).prop_map(|(k, g, psi)| SymbolPair::new(k, g, psi))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn truncations_nest(pair in arb_pair(), n in 4usize..24) {
            let small = build_pair(&pair, n).unwrap();
            let big = build_pair(&pair, 2 * n).unwrap();
            let scale = big.max_abs_entry().max(1.0);
            for m in 0..n {
                for k in 0..n {
                    prop_assert!((small.entry(m, k) - big.entry(m, k)).norm() <= 1e-12 * scale);
                }
            }
        }

        #[test]
        fn schatten_norm_nondecreasing_in_dim(pair in arb_pair(), n in 4usize..20, p in 0.5f64..6.0) {
            let a = schatten_norm(&build_pair(&pair, n).unwrap(), p).unwrap();
            let b = schatten_norm(&build_pair(&pair, n + 7).unwrap(), p).unwrap();
            prop_assert!(b >= a * (1.0 - 1e-10));
        }

        #[test]
        fn singular_values_sorted_and_bounded_by_frobenius(pair in arb_pair(), n in 4usize..24) {
            let t = build_pair(&pair, n).unwrap();
            let s = singular_values(&t).unwrap();
            prop_assert!(s.values.windows(2).all(|w| w[0] >= w[1]) && s.smallest() >= 0.0);
            let f2: f64 = t.entries().iter().map(|c| c.norm_sqr()).sum();
            let s2: f64 = s.values.iter().map(|x| x * x).sum();
            prop_assert!((f2 - s2).abs() <= 1e-9 * f2.max(1.0));
        }

        #[test]
        fn monomial_volterra_columns_are_orthogonal(k in 1usize..5, c in arb_c(), n in 8usize..40) {
            let g = ComplexPolynomial::monomial(k, c);
            let t = build_pair(&SymbolPair::v(g, AffineMap::identity()), n).unwrap();
            let gram = t.entries().adjoint() * t.entries();
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        prop_assert!(gram[(i, j)].norm() == 0.0);
                    }
                }
            }
        }

        #[test]
        fn binary_round_trip(pair in arb_pair(), n in 4usize..16) {
            let t = build_pair(&pair, n).unwrap();
            let mut buf = Vec::new();
            t.write_binary(&mut buf).unwrap();
            prop_assert_eq!(&read_binary(&buf).unwrap(), t.entries());
        }
    }
}
