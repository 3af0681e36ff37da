//! Littlewood-Paley ratios for monomials: the Fock norm against |f(0)|^p plus the
//! derivative integral weighted by (1+|z|)^{-p}. The ratio stays in a fixed band.
//!
//! cargo run --release --example littlewood_paley

use focklab::planequad;
use focklab::ComplexPolynomial;
use num_complex::Complex64;

fn main() -> focklab::Result<()> {
    for p in [1.0, 2.0, 4.0] {
        let mut row = Vec::new();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for n in 0..=40 {
            let f = ComplexPolynomial::monomial(n, Complex64::new(1.0, 0.0));
            let r = planequad::littlewood_paley_ratio(&f, p, &planequad::polynomial_grid(&f, p, 1e-10)?)?;
            lo = lo.min(r);
            hi = hi.max(r);
            if n % 8 == 0 {
                row.push(format!("n={n}: {r:.4}"));
            }
        }
        println!("p = {p}: range [{lo:.4}, {hi:.4}]   {}", row.join("  "));
    }
    Ok(())
}
