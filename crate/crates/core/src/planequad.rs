//! Gaussian-weighted quadrature over the complex plane.
//!
//! Integrands are handed over as natural logarithms of nonnegative values so
//! that factors like `exp(|w|^2/2)` never overflow before they meet the
//! Gaussian weight. A grid is a polar product rule: composite Gauss-Legendre
//! in the radius on `[0, R]`, uniform trapezoid in the angle.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FockError, Result};
use crate::symbols::{derivative, ComplexPolynomial};

/// Default truncation tolerance for grids built by the higher-level modules.
pub const DEFAULT_EPS: f64 = 1e-10;

/// Default ladder of radii for annulus profiles.
pub const DEFAULT_RADII: [f64; 5] = [2.0, 4.0, 8.0, 16.0, 32.0];

const NODES_PER_PANEL: usize = 20;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss-Legendre `(node, weight)` pairs on `[lo, hi]`.
pub(crate) fn composite_gauss_legendre(lo: f64, hi: f64, panels: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(NODES_PER_PANEL);
    let h = (hi - lo) / panels as f64;
    (0..panels)
        .flat_map(|k| {
            let left = lo + k as f64 * h;
            x.iter().zip(&w).map(move |(xi, wi)| (left + 0.5 * h * (xi + 1.0), 0.5 * h * wi))
        })
        .collect()
}

/// Pairwise summation; fixed order, so results are reproducible.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let (lo, hi) = xs.split_at(xs.len() / 2);
    pairwise_sum(lo) + pairwise_sum(hi)
}

/// Polar product rule on the disk `|z| < R`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureGrid {
    radial_nodes: Vec<f64>,
    radial_weights: Vec<f64>,
    angular_count: usize,
    outer_radius: f64,
    target_eps: f64,
}

/// Summary of a grid, carried next to integral values in reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub radial_count: usize,
    pub angular_count: usize,
    pub outer_radius: f64,
    pub target_eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralRecord {
    pub value: f64,
    pub grid_meta: GridMeta,
}

impl QuadratureGrid {
    fn with_panels(outer_radius: f64, panels: usize, angular_count: usize, target_eps: f64) -> Self {
        let (radial_nodes, radial_weights) = composite_gauss_legendre(0.0, outer_radius, panels).into_iter().unzip();
        Self { radial_nodes, radial_weights, angular_count, outer_radius, target_eps }
    }

    pub fn radial_nodes(&self) -> &[f64] {
        &self.radial_nodes
    }

    pub fn radial_weights(&self) -> &[f64] {
        &self.radial_weights
    }

    pub fn angular_count(&self) -> usize {
        self.angular_count
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    pub fn target_eps(&self) -> f64 {
        self.target_eps
    }

    pub fn node_count(&self) -> usize {
        self.radial_nodes.len() * self.angular_count
    }

    pub fn meta(&self) -> GridMeta {
        GridMeta {
            radial_count: self.radial_nodes.len(),
            angular_count: self.angular_count,
            outer_radius: self.outer_radius,
            target_eps: self.target_eps,
        }
    }

    /// Same disk, twice the radial panels and twice the angular nodes.
    pub fn refined(&self) -> Self {
        let panels = self.radial_nodes.len() / NODES_PER_PANEL;
        Self::with_panels(self.outer_radius, 2 * panels, 2 * self.angular_count, self.target_eps)
    }

    /// Iterates `(z, weight)` with `weight` including the polar Jacobian `r`.
    pub fn nodes(&self) -> impl Iterator<Item = (Complex64, f64)> + '_ {
        let m = self.angular_count;
        let dt = TAU / m as f64;
        self.radial_nodes.iter().zip(&self.radial_weights).flat_map(move |(&r, &wr)| {
            (0..m).map(move |j| (Complex64::from_polar(r, j as f64 * dt), wr * r * dt))
        })
    }
}

/// Smallest `R` past the envelope maximum with
/// `R^d exp(-p R^2/2) <= eps * max_r r^d exp(-p r^2/2)`.
fn envelope_radius(p: f64, growth_degree: f64, eps: f64) -> f64 {
    let peak = (growth_degree / p).sqrt();
    let log_env = |r: f64| {
        let lr = if growth_degree > 0.0 { growth_degree * r.ln() } else { 0.0 };
        lr - 0.5 * p * r * r
    };
    let target = log_env(peak) + eps.ln();
    let mut lo = peak;
    let mut hi = peak.max(1.0);
    while log_env(hi) > target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if log_env(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn validate_grid_args(p: f64, eps: f64) -> Result<()> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(FockError::InvalidArgument(format!("weight exponent must be positive, got {p}")));
    }
    if !(eps > 0.0 && eps <= 1e-2) {
        return Err(FockError::InvalidArgument(format!("eps must lie in (0, 1e-2], got {eps}")));
    }
    Ok(())
}

/// Grid for integrands bounded by `|z|^growth_degree exp(-p|z|^2/2)`.
pub fn make_grid(p: f64, growth_degree: u32, eps: f64) -> Result<QuadratureGrid> {
    make_grid_shifted(p, growth_degree as f64, eps, 0.0)
}

/// As [`make_grid`], for an envelope whose Gaussian is centred at distance
/// `shift` from the origin (integrands carrying `|k_w(a z + b)|^p` factors).
pub fn make_grid_shifted(p: f64, growth_degree: f64, eps: f64, shift: f64) -> Result<QuadratureGrid> {
    validate_grid_args(p, eps)?;
    if !(growth_degree >= 0.0 && shift >= 0.0 && shift.is_finite()) {
        return Err(FockError::InvalidArgument(format!(
            "growth degree and shift must be nonnegative, got {growth_degree}, {shift}"
        )));
    }
    let outer_radius = envelope_radius(p, growth_degree, eps) + shift;
    let panel_width = 0.5f64.min(1.0 / p.sqrt());
    let panels = (outer_radius / panel_width).ceil().max(1.0) as usize;
    let angular_count = 4 * ((outer_radius * outer_radius).ceil() as usize + 8);
    Ok(QuadratureGrid::with_panels(outer_radius, panels, angular_count, eps))
}

/// Natural log of `int_C f dA`, with `f` given by its log at each node.
/// Returns `-inf` for an integrand that vanishes on the grid.
pub fn integrate_weighted_log<F>(log_f: F, grid: &QuadratureGrid) -> Result<f64>
where
    F: Fn(Complex64) -> f64,
{
    let mut terms = Vec::with_capacity(grid.node_count());
    let mut peak = f64::NEG_INFINITY;
    for (node, (z, w)) in grid.nodes().enumerate() {
        let v = log_f(z);
        if v.is_nan() || v == f64::INFINITY {
            return Err(FockError::NonFiniteIntegrand { node, value: v });
        }
        let lv = v + w.ln();
        peak = peak.max(lv);
        terms.push(lv);
    }
    if peak == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    for t in terms.iter_mut() {
        *t = (*t - peak).exp();
    }
    Ok(peak + pairwise_sum(&terms).ln())
}

/// Quadrature approximation of `int_C f dA` (no `p/2pi` prefactor).
pub fn integrate_weighted<F>(log_f: F, grid: &QuadratureGrid) -> Result<f64>
where
    F: Fn(Complex64) -> f64,
{
    integrate_weighted_log(log_f, grid).map(f64::exp)
}

/// Sup of a function over sampled circles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusProfile {
    radii: Vec<f64>,
    #[serde(rename = "sup")]
    sup_values: Vec<f64>,
}

impl AnnulusProfile {
    pub fn new(radii: Vec<f64>, sup_values: Vec<f64>) -> Result<Self> {
        if radii.len() != sup_values.len() || radii.len() < 3 {
            return Err(FockError::InvalidArgument(format!(
                "profile needs >= 3 radii with matching values, got {} and {}",
                radii.len(),
                sup_values.len()
            )));
        }
        if radii.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(FockError::InvalidArgument("profile radii must be strictly increasing".into()));
        }
        if sup_values.iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(FockError::InvalidArgument("profile values must be nonnegative".into()));
        }
        Ok(Self { radii, sup_values })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn sup_values(&self) -> &[f64] {
        &self.sup_values
    }
}

/// Samples `f` on `max(64, 8 ceil(r^2))` equispaced points of each circle `|z| = r`.
pub fn sup_on_annuli<F>(f: F, radii: &[f64]) -> Result<AnnulusProfile>
where
    F: Fn(Complex64) -> f64,
{
    let sups = radii
        .iter()
        .map(|&r| {
            let n = 64usize.max(8 * (r * r).ceil() as usize);
            let dt = TAU / n as f64;
            (0..n).map(|j| f(Complex64::from_polar(r, j as f64 * dt))).fold(0.0, f64::max)
        })
        .collect();
    AnnulusProfile::new(radii.to_vec(), sups)
}

/// Last three values strictly decreasing and the final one below `tol`.
pub fn decays_to_zero(profile: &AnnulusProfile, tol: f64) -> bool {
    let v = profile.sup_values();
    let tail = &v[v.len() - 3..];
    tail[0] > tail[1] && tail[1] > tail[2] && tail[2] < tol
}

/// Grid suited to `|f|^p exp(-p|z|^2/2)` for a polynomial `f`.
pub fn polynomial_grid(f: &ComplexPolynomial, p: f64, eps: f64) -> Result<QuadratureGrid> {
    let deg = f.degree().unwrap_or(0) as f64;
    make_grid_shifted(p, (p * deg).ceil(), eps, 0.0)
}

/// `LHS / RHS` for the Fock-space Littlewood-Paley comparison
/// `int |f|^p e^{-p|z|^2/2} dA  ~  |f(0)|^p + int |f'|^p (1+|z|)^{-p} e^{-p|z|^2/2} dA`.
pub fn littlewood_paley_ratio(f: &ComplexPolynomial, p: f64, grid: &QuadratureGrid) -> Result<f64> {
    if f.is_zero() {
        return Err(FockError::InvalidArgument("Littlewood-Paley ratio of the zero polynomial".into()));
    }
    if !(p > 0.0) {
        return Err(FockError::InvalidArgument(format!("exponent must be positive, got {p}")));
    }
    let lhs = integrate_weighted(|z| p * f.eval(z).norm().ln() - 0.5 * p * z.norm_sqr(), grid)?;
    let df = derivative(f);
    let tail = if df.is_zero() {
        0.0
    } else {
        integrate_weighted(
            |z| p * df.eval(z).norm().ln() - p * (1.0 + z.norm()).ln() - 0.5 * p * z.norm_sqr(),
            grid,
        )?
    };
    let rhs = f.coeff(0).norm().powf(p) + tail;
    if rhs == 0.0 {
        return Err(FockError::InvalidArgument("Littlewood-Paley right-hand side vanished".into()));
    }
    Ok(lhs / rhs)
}
