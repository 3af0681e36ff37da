//! Boundedness, compactness and Schatten cutoffs for a few symbol pairs.
//!
//! cargo run --example classify_symbols

use focklab::classify;
use focklab::{AffineMap, ComplexPolynomial, SymbolPair};

fn main() -> focklab::Result<()> {
    let g = |c: &[f64]| ComplexPolynomial::from_real(c);
    let cases = [
        ("V_(z, z)", SymbolPair::v(g(&[0.0, 1.0]), AffineMap::identity())),
        ("V_(z^2, z)", SymbolPair::v(g(&[0.0, 0.0, 1.0]), AffineMap::identity())),
        ("V_(z^3, z)", SymbolPair::v(g(&[0.0, 0.0, 0.0, 1.0]), AffineMap::identity())),
        ("V_(z^3, z/2)", SymbolPair::v(g(&[0.0, 0.0, 0.0, 1.0]), AffineMap::real(0.5, 0.0))),
        ("V_(z, z+1)", SymbolPair::v(g(&[0.0, 1.0]), AffineMap::real(1.0, 1.0))),
        ("J_(1, e^{i} z)", SymbolPair::j(g(&[1.0]), AffineMap::rotation(1.0))),
        ("J_(z, z)", SymbolPair::j(g(&[0.0, 1.0]), AffineMap::identity())),
    ];
    println!("{:<16} {:>7} {:>7} {:>7}   reasons", "operator", "bounded", "compact", "S_p for p >");
    for (name, pair) in &cases {
        let v = classify::verdict(pair, 2.0, 2.0)?;
        println!("{name:<16} {:>7} {:>7} {:>7}   {}", v.bounded, v.compact, v.schatten_cutoff.to_string(), v.reasons.join(", "));
    }

    // below the diagonal the verdict becomes an integrability question
    let pair = SymbolPair::v(g(&[0.0, 1.0]), AffineMap::identity());
    for (p, q) in [(4.0, 2.0), (6.0, 2.0)] {
        let v = classify::verdict(&pair, p, q)?;
        let r = p * q / (p - q);
        println!("V_(z, z): F_{p} -> F_{q}: bounded {} (criterion in L^{r}: {})", v.bounded, classify::criterion_in_lr(&pair, r));
    }
    Ok(())
}
