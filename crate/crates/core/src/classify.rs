//! Verdicts for `V_(g,psi)` and `J_(g,psi)` on Fock spaces.
//!
//! Everything here is decided from the growth of the criterion functions
//!
//! ```text
//! M(z)  = |g'(z)| / (1+|z|) * exp((|psi(z)|^2 - |z|^2) / 2)                 (kind V)
//! M~(z) = |g(z)| (1+|psi(z)|) / (1+|z|) * exp((|psi(z)|^2 - |z|^2) / 2)     (kind J)
//! ```
//!
//! For polynomial `g` and affine `psi(z) = a z + b` the growth is read off
//! symbolically: `|a| < 1` gives Gaussian decay, `|a| > 1` or `|a| = 1, b != 0`
//! gives exponential growth, and the rotations `|a| = 1, b = 0` leave the
//! exponential factor identically one so only polynomial degrees matter.
//!
//! The quadrature-backed functions (`lr_norm`, `berezin`, `kernel_norm`) are
//! numeric companions to the symbolic rules, not inputs to them.

use std::f64::consts::{PI, TAU};
use std::fmt;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{FockError, Result};
use crate::planequad::{self, integrate_weighted, integrate_weighted_log, make_grid_shifted, QuadratureGrid};
use crate::symbols::{derivative, exp_polynomial_in_fock, AffineMap, ComplexPolynomial, OperatorKind, SymbolPair};

/// `|a|` within this distance of one counts as unimodular.
pub const UNIMODULAR_TOL: f64 = 1e-12;

/// Extended nonnegative real; `+inf` serializes as the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Extended(pub f64);

impl Extended {
    pub const INF: Self = Self(f64::INFINITY);
    pub const ZERO: Self = Self(0.0);

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Extended {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Extended {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(Self(x)),
            Repr::Str(s) if s == "inf" => Ok(Self::INF),
            Repr::Str(s) => Err(D::Error::custom(format!("expected number or \"inf\", got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationVerdict {
    pub bounded: bool,
    pub compact: bool,
    /// In `S_p(F_2)` iff `p > schatten_cutoff`.
    pub schatten_cutoff: Extended,
    pub reasons: Vec<String>,
}

fn ln_abs(z: Complex64) -> f64 {
    z.norm().ln()
}

fn gaussian_excess(psi: &AffineMap, z: Complex64) -> f64 {
    0.5 * (psi.apply(z).norm_sqr() - z.norm_sqr())
}

/// `ln M(z)`; `-inf` at zeros of `g'`.
pub fn eval_m_log(pair: &SymbolPair, z: Complex64) -> f64 {
    ln_abs(derivative(&pair.g).eval(z)) - (1.0 + z.norm()).ln() + gaussian_excess(&pair.psi, z)
}

pub fn eval_m(pair: &SymbolPair, z: Complex64) -> f64 {
    eval_m_log(pair, z).exp()
}

/// `ln M~(z)`; `-inf` at zeros of `g`.
pub fn eval_mtilde_log(pair: &SymbolPair, z: Complex64) -> f64 {
    let w = pair.psi.apply(z);
    ln_abs(pair.g.eval(z)) + (1.0 + w.norm()).ln() - (1.0 + z.norm()).ln() + gaussian_excess(&pair.psi, z)
}

pub fn eval_mtilde(pair: &SymbolPair, z: Complex64) -> f64 {
    eval_mtilde_log(pair, z).exp()
}

/// The governing criterion for the pair's kind (`M` for V, `M~` for J), in log form.
pub fn criterion_log(pair: &SymbolPair, z: Complex64) -> f64 {
    match pair.kind {
        OperatorKind::V => eval_m_log(pair, z),
        OperatorKind::J => eval_mtilde_log(pair, z),
    }
}

pub fn criterion(pair: &SymbolPair, z: Complex64) -> f64 {
    criterion_log(pair, z).exp()
}

/// `g'` for V, `g` for J: the symbol that multiplies the kernel data.
fn active_symbol(pair: &SymbolPair) -> ComplexPolynomial {
    match pair.kind {
        OperatorKind::V => derivative(&pair.g),
        OperatorKind::J => pair.g.clone(),
    }
}

/// The criterion vanishes identically, so the operator is zero.
pub fn is_zero_operator(pair: &SymbolPair) -> bool {
    active_symbol(pair).is_zero()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PsiShape {
    Contractive,
    Rotation,
    UnimodularTranslate,
    Expanding,
}

fn psi_shape(psi: &AffineMap) -> PsiShape {
    let a = psi.a.norm();
    if a > 1.0 + UNIMODULAR_TOL {
        PsiShape::Expanding
    } else if a < 1.0 - UNIMODULAR_TOL {
        PsiShape::Contractive
    } else if psi.b == Complex64::new(0.0, 0.0) {
        PsiShape::Rotation
    } else {
        PsiShape::UnimodularTranslate
    }
}

/// `lim sup_{|z| -> inf}` of the governing criterion.
pub fn criterion_limit(pair: &SymbolPair) -> Extended {
    if is_zero_operator(pair) {
        return Extended::ZERO;
    }
    match psi_shape(&pair.psi) {
        PsiShape::Contractive => Extended::ZERO,
        PsiShape::Expanding | PsiShape::UnimodularTranslate => Extended::INF,
        PsiShape::Rotation => {
            // Exponential factor is identically one.
            let h = active_symbol(pair);
            let deg = h.degree().unwrap_or(0);
            match pair.kind {
                // |g'| / (1 + |z|)
                OperatorKind::V => match deg {
                    0 => Extended::ZERO,
                    1 => Extended(h.coeff(1).norm()),
                    _ => Extended::INF,
                },
                // |g| (1 + |z|) / (1 + |z|) = |g|
                OperatorKind::J => match deg {
                    0 => Extended(h.coeff(0).norm()),
                    _ => Extended::INF,
                },
            }
        }
    }
}

/// Whether the governing criterion lies in `L^r(C, dA)`.
pub fn criterion_in_lr(pair: &SymbolPair, r: f64) -> bool {
    if is_zero_operator(pair) {
        return true;
    }
    match psi_shape(&pair.psi) {
        PsiShape::Contractive => true,
        PsiShape::Expanding | PsiShape::UnimodularTranslate => false,
        PsiShape::Rotation => match pair.kind {
            // c / (1+|z|) with c != 0 only for deg g = 1; int (1+|z|)^{-r} dA < inf iff r > 2.
            OperatorKind::V => pair.g.degree() == Some(1) && r > 2.0,
            OperatorKind::J => false,
        },
    }
}

fn check_exponent(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(FockError::InvalidArgument(format!("{name} must be positive and finite, got {x}")))
    }
}

/// Schatten cutoff on `F_2`.
fn f2_schatten_cutoff(pair: &SymbolPair) -> Extended {
    if is_zero_operator(pair) {
        return Extended::ZERO;
    }
    match psi_shape(&pair.psi) {
        PsiShape::Contractive => Extended::ZERO,
        PsiShape::Rotation if pair.kind == OperatorKind::V && pair.g.degree() == Some(1) => Extended(2.0),
        _ => Extended::INF,
    }
}

/// Verdict for `T_(g,psi): F_p -> F_q`.
pub fn verdict(pair: &SymbolPair, p: f64, q: f64) -> Result<ClassificationVerdict> {
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    let mut reasons = vec![match pair.kind {
        OperatorKind::V => "kind-v:criterion-m".to_string(),
        OperatorKind::J => "kind-j:criterion-m-tilde".to_string(),
    }];

    if is_zero_operator(pair) {
        reasons.push("zero-operator".into());
        return Ok(ClassificationVerdict { bounded: true, compact: true, schatten_cutoff: Extended::ZERO, reasons });
    }

    reasons.push(
        match psi_shape(&pair.psi) {
            PsiShape::Contractive => "psi-contractive:gaussian-decay",
            PsiShape::Rotation => "psi-rotation:exponential-factor-one",
            PsiShape::UnimodularTranslate => "psi-unimodular-translate:exponential-growth",
            PsiShape::Expanding => "psi-expanding:exponential-growth",
        }
        .into(),
    );

    let (bounded, compact) = if p <= q {
        reasons.push("p<=q:sup-and-limit".into());
        let limit = criterion_limit(pair);
        (limit.is_finite(), limit.value() == 0.0)
    } else {
        let r = p * q / (p - q);
        reasons.push(format!("q<p:criterion-in-L^{r}"));
        let fin = criterion_in_lr(pair, r);
        (fin, fin)
    };

    let schatten_cutoff = if compact { f2_schatten_cutoff(pair) } else { Extended::INF };
    reasons.push(format!("schatten-cutoff:{schatten_cutoff}"));
    Ok(ClassificationVerdict { bounded, compact, schatten_cutoff, reasons })
}

/// Verdict when the self-map is given as an arbitrary polynomial. Only
/// affine maps can induce bounded operators with a nonzero criterion.
pub fn verdict_polynomial_psi(
    kind: OperatorKind,
    g: &ComplexPolynomial,
    psi: &ComplexPolynomial,
    p: f64,
    q: f64,
) -> Result<ClassificationVerdict> {
    match AffineMap::from_polynomial(psi) {
        Some(m) => verdict(&SymbolPair::new(kind, g.clone(), m), p, q),
        None => {
            check_exponent("p", p)?;
            check_exponent("q", q)?;
            let probe = SymbolPair::new(kind, g.clone(), AffineMap::identity());
            if is_zero_operator(&probe) {
                return verdict(&probe, p, q);
            }
            Ok(ClassificationVerdict {
                bounded: false,
                compact: false,
                schatten_cutoff: Extended::INF,
                reasons: vec![format!("psi-not-affine:degree-{}", psi.degree().unwrap_or(0))],
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrNorm {
    pub finite: bool,
    /// `int criterion^r dA` when finite.
    pub value: Option<f64>,
}

/// `2 pi int_0^inf t (1+t)^{-r} dt` by quadrature, for `r > 2`.
///
/// With `v = 1/(1+t)` and `v = s^{1/(r-2)}` the integral becomes
/// `(2 pi / (r-2)) int_0^1 (1 - s^{1/(r-2)}) ds`, which is smooth.
fn radial_decay_integral(r: f64) -> f64 {
    // u = 1/(1+|z|), then u = s^m with m >= 8 so the integrand is smooth at 0
    let k = (8.0 * (r - 2.0)).ceil().max(1.0);
    let m = k / (r - 2.0);
    let terms: Vec<f64> = planequad::composite_gauss_legendre(0.0, 1.0, 64)
        .into_iter()
        .map(|(s, w)| w * s.powf(k - 1.0) * (1.0 - s.powf(m)))
        .collect();
    TAU * m * planequad::pairwise_sum(&terms)
}

/// Grid adapted to `criterion^r` for a contractive self-map.
fn contractive_lr_grid(pair: &SymbolPair, r: f64, eps: f64) -> Result<QuadratureGrid> {
    let a2 = pair.psi.a.norm_sqr();
    let rate = r * (1.0 - a2);
    let deg = active_symbol(pair).degree().unwrap_or(0) as f64
        + if pair.kind == OperatorKind::J { 1.0 } else { 0.0 };
    // |az+b|^2 - |z|^2 = -(1-|a|^2)|z - z0|^2 + const with |z0| = |a||b|/(1-|a|^2).
    let shift = pair.psi.a.norm() * pair.psi.b.norm() / (1.0 - a2);
    make_grid_shifted(rate, (r * deg).ceil(), eps, shift)
}

/// `L^r` integrability of the governing criterion, with the value by quadrature when finite.
pub fn lr_norm(pair: &SymbolPair, r: f64, eps: f64) -> Result<LrNorm> {
    check_exponent("r", r)?;
    if !criterion_in_lr(pair, r) {
        return Ok(LrNorm { finite: false, value: None });
    }
    if is_zero_operator(pair) {
        return Ok(LrNorm { finite: true, value: Some(0.0) });
    }
    let value = match psi_shape(&pair.psi) {
        PsiShape::Contractive => {
            let grid = contractive_lr_grid(pair, r, eps)?;
            integrate_weighted(|z| r * criterion_log(pair, z), &grid)?
        }
        // Only kind V with deg g = 1 reaches here: M = |g_1| / (1+|z|).
        _ => pair.g.coeff(1).norm().powf(r) * radial_decay_integral(r),
    };
    Ok(LrNorm { finite: true, value: Some(value) })
}

/// As [`lr_norm`] on a caller-supplied grid (contractive self-maps only).
pub fn lr_norm_on_grid(pair: &SymbolPair, r: f64, grid: &QuadratureGrid) -> Result<LrNorm> {
    check_exponent("r", r)?;
    if !criterion_in_lr(pair, r) {
        return Ok(LrNorm { finite: false, value: None });
    }
    if psi_shape(&pair.psi) != PsiShape::Contractive {
        return lr_norm(pair, r, grid.target_eps());
    }
    let value = if is_zero_operator(pair) { 0.0 } else { integrate_weighted(|z| r * criterion_log(pair, z), grid)? };
    Ok(LrNorm { finite: true, value: Some(value) })
}

/// Grid for the Berezin-type integrand at `w`: the kernel factor
/// `|k_w(a z + b)|^p e^{-p|z|^2/2}` is a Gaussian of rate `p` centred at `conj(a) w`.
pub fn berezin_grid(pair: &SymbolPair, p: f64, w: Complex64, eps: f64) -> Result<QuadratureGrid> {
    check_exponent("p", p)?;
    let deg = active_symbol(pair).degree().unwrap_or(0) as f64;
    make_grid_shifted(p, (p * deg).ceil(), eps, pair.psi.a.norm() * w.norm())
}

fn berezin_log(pair: &SymbolPair, p: f64, w: Complex64, grid: &QuadratureGrid) -> Result<f64> {
    check_exponent("p", p)?;
    let h = active_symbol(pair);
    if h.is_zero() {
        return Ok(f64::NEG_INFINITY);
    }
    let half_w2 = 0.5 * w.norm_sqr();
    let front = match pair.kind {
        OperatorKind::V => 0.0,
        OperatorKind::J => p * (1.0 + w.norm()).ln(),
    };
    integrate_weighted_log(
        |z| {
            let u = pair.psi.apply(z);
            // ln |k_w(u)| = Re(conj(w) u) - |w|^2 / 2
            let kernel = (w.conj() * u).re - half_w2;
            front + p * (kernel + ln_abs(h.eval(z)) - (1.0 + z.norm()).ln()) - 0.5 * p * z.norm_sqr()
        },
        grid,
    )
}

/// Berezin-type transform at `w`: `B` for kind V, `B~` for kind J.
pub fn berezin(pair: &SymbolPair, p: f64, w: Complex64, grid: &QuadratureGrid) -> Result<f64> {
    berezin_log(pair, p, w, grid).map(f64::exp)
}

/// [`berezin`] on a grid chosen by [`berezin_grid`].
pub fn berezin_auto(pair: &SymbolPair, p: f64, w: Complex64, eps: f64) -> Result<f64> {
    berezin(pair, p, w, &berezin_grid(pair, p, w, eps)?)
}

pub fn kernel_grid(w: Complex64, p: f64, eps: f64) -> Result<QuadratureGrid> {
    make_grid_shifted(p, 0.0, eps, w.norm())
}

/// `||K_w||_p` by quadrature: `((p / 2 pi) int e^{p Re(conj(w) z) - p|z|^2/2} dA)^{1/p}`.
pub fn kernel_norm(w: Complex64, p: f64, grid: &QuadratureGrid) -> Result<f64> {
    check_exponent("p", p)?;
    let log_int = integrate_weighted_log(|z| p * (w.conj() * z).re - 0.5 * p * z.norm_sqr(), grid)?;
    Ok((((p / TAU).ln() + log_int) / p).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DifferenceBranch {
    BothCompact,
    Cancellation,
    Neither,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CancellationEvidence {
    pub psi_equal: bool,
    /// Limit of the criterion of `(g1 - g2, psi1)`; only meaningful when `psi_equal`.
    pub difference_limit: Option<Extended>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceVerdict {
    pub compact: bool,
    pub schatten_for_p: Option<bool>,
    /// For Schatten queries the branch that decided membership; otherwise the compactness branch.
    pub branch: DifferenceBranch,
    pub cancellation_evidence: Option<CancellationEvidence>,
}

fn difference_pair(pair1: &SymbolPair, pair2: &SymbolPair) -> SymbolPair {
    SymbolPair::new(pair1.kind, pair1.g.sub(&pair2.g), pair1.psi)
}

fn bounded_verdicts(
    pair1: &SymbolPair,
    pair2: &SymbolPair,
    p: f64,
    q: f64,
) -> Result<(ClassificationVerdict, ClassificationVerdict)> {
    if pair1.kind != pair2.kind {
        return Err(FockError::MixedKinds(pair1.kind, pair2.kind));
    }
    let v1 = verdict(pair1, p, q)?;
    let v2 = verdict(pair2, p, q)?;
    for (i, v) in [(1, &v1), (2, &v2)] {
        if !v.bounded {
            return Err(FockError::UnboundedInput(format!("pair {i} is unbounded from F_{p} to F_{q}")));
        }
    }
    Ok((v1, v2))
}

/// Compactness of `T_(g1,psi1) - T_(g2,psi2)`: both compact, or equal self-maps
/// with a criterion of `g1 - g2` tending to zero.
pub fn difference_compact(pair1: &SymbolPair, pair2: &SymbolPair, p: f64, q: f64) -> Result<DifferenceVerdict> {
    let (v1, v2) = bounded_verdicts(pair1, pair2, p, q)?;
    let psi_equal = pair1.psi == pair2.psi;
    let diff = difference_pair(pair1, pair2);
    let difference_limit = psi_equal.then(|| criterion_limit(&diff));
    let cancels = psi_equal && verdict(&diff, p, q)?.compact;
    let branch = if v1.compact && v2.compact {
        DifferenceBranch::BothCompact
    } else if cancels {
        DifferenceBranch::Cancellation
    } else {
        DifferenceBranch::Neither
    };
    Ok(DifferenceVerdict {
        compact: branch != DifferenceBranch::Neither,
        schatten_for_p: None,
        branch,
        cancellation_evidence: Some(CancellationEvidence { psi_equal, difference_limit }),
    })
}

/// `S_p(F_2)` membership of the difference: both in `S_p`, or equal self-maps
/// with the criterion of `g1 - g2` in `L^p`.
pub fn difference_schatten(pair1: &SymbolPair, pair2: &SymbolPair, p: f64) -> Result<DifferenceVerdict> {
    check_exponent("p", p)?;
    let (v1, v2) = bounded_verdicts(pair1, pair2, 2.0, 2.0)?;
    let compact = difference_compact(pair1, pair2, 2.0, 2.0)?;
    let psi_equal = pair1.psi == pair2.psi;
    let diff = difference_pair(pair1, pair2);
    let both = v1.schatten_cutoff.value() < p && v2.schatten_cutoff.value() < p;
    let cancels = psi_equal && criterion_in_lr(&diff, p);
    let branch = if both {
        DifferenceBranch::BothCompact
    } else if cancels {
        DifferenceBranch::Cancellation
    } else {
        DifferenceBranch::Neither
    };
    Ok(DifferenceVerdict {
        compact: compact.compact,
        schatten_for_p: Some(both || cancels),
        branch,
        cancellation_evidence: compact.cancellation_evidence,
    })
}

fn check_quadratic(g: &ComplexPolynomial) -> Result<()> {
    match g.degree() {
        Some(d) if d > 2 => Err(FockError::DegreeTooHigh(d)),
        _ => Ok(()),
    }
}

/// Radius of the closed disk `sigma(V_g1 - V_g2)`, i.e. `2 |a1 - a2|` for the `z^2` coefficients.
pub fn spectrum_disk(g1: &ComplexPolynomial, g2: &ComplexPolynomial) -> Result<f64> {
    check_quadratic(g1)?;
    check_quadratic(g2)?;
    Ok(2.0 * (g1.coeff(2) - g2.coeff(2)).norm())
}

/// `lambda` in `sigma(V_g1 - V_g2)` on `F_p`: zero always, otherwise iff
/// `exp((g1 - g2) / lambda)` fails to lie in `F_p`.
pub fn spectrum_contains(g1: &ComplexPolynomial, g2: &ComplexPolynomial, lambda: Complex64, p: f64) -> Result<bool> {
    check_quadratic(g1)?;
    check_quadratic(g2)?;
    check_exponent("p", p)?;
    if lambda == Complex64::new(0.0, 0.0) {
        return Ok(true);
    }
    Ok(!exp_polynomial_in_fock(&g1.sub(g2).scale(lambda.inv()), p)?)
}

/// `int (1+|z|)^{-r} dA = 2 pi / ((r-1)(r-2))` for `r > 2`.
pub fn radial_decay_closed_form(r: f64) -> f64 {
    2.0 * PI / ((r - 1.0) * (r - 2.0))
}
