//! The spectrum of V_{g1} - V_{g2} for quadratic symbols is the closed disk of
//! radius 2|a1 - a2| (a = z^2 coefficients). Truncations are nilpotent, so the
//! probe is resolvent growth: exponential in N inside, convergent outside.
//!
//! cargo run --release --example spectrum_disk

use focklab::classify;
use focklab::fockmat::{self, OperatorSpec};
use focklab::{AffineMap, ComplexPolynomial, SymbolPair};
use num_complex::Complex64;

fn main() -> focklab::Result<()> {
    let g1 = ComplexPolynomial::from_real(&[0.0, 0.0, 1.0]);
    let g2 = ComplexPolynomial::from_real(&[0.0, 1.0, 2.0]);
    println!("disk radius {}", classify::spectrum_disk(&g1, &g2)?);
    let spec = OperatorSpec::Difference {
        first: SymbolPair::v(g1.clone(), AffineMap::identity()),
        second: SymbolPair::v(g2.clone(), AffineMap::identity()),
    };
    let dims = [32, 64, 128, 256];
    let mats = dims.iter().map(|&n| fockmat::build(&spec, n)).collect::<focklab::Result<Vec<_>>>()?;
    for r in [0.5, 1.5, 1.9, 2.1, 2.5, 4.0] {
        let lambda = Complex64::from_polar(r, 0.7);
        let inside = classify::spectrum_contains(&g1, &g2, lambda, 2.0)?;
        let norms: Vec<String> = mats
            .iter()
            .map(|t| fockmat::resolvent_norm(t, lambda).map(|x| format!("{x:.3e}")))
            .collect::<focklab::Result<_>>()?;
        println!("|lambda| = {r:<4} in spectrum {inside:<5}  ||(T_N - lambda)^-1|| for N = {dims:?}: {}", norms.join("  "));
    }
    Ok(())
}
