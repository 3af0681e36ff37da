//! Berezin-type transforms along psi(r) against the criterion function: the
//! transform dominates M^p pointwise, and its growth or decay in r mirrors
//! boundedness and compactness.
//!
//! cargo run --release --example berezin_bounds

use focklab::classify;
use focklab::{AffineMap, ComplexPolynomial, SymbolPair};
use num_complex::Complex64;

fn main() -> focklab::Result<()> {
    let g = |c: &[f64]| ComplexPolynomial::from_real(c);
    let cases = [
        ("V_(z, z)      compact", SymbolPair::v(g(&[0.0, 1.0]), AffineMap::identity())),
        ("V_(z^2, z)    bounded", SymbolPair::v(g(&[0.0, 0.0, 1.0]), AffineMap::identity())),
        ("V_(z^3, z)  unbounded", SymbolPair::v(g(&[0.0, 0.0, 0.0, 1.0]), AffineMap::identity())),
        ("J_(z, z/2+1)  compact", SymbolPair::j(g(&[0.0, 1.0]), AffineMap::real(0.5, 1.0))),
        ("V_(z, z+1)  unbounded", SymbolPair::v(g(&[0.0, 1.0]), AffineMap::real(1.0, 1.0))),
    ];
    let p = 2.0;
    for (name, pair) in &cases {
        let mut cells = Vec::new();
        for r in [1.0, 2.0, 4.0, 8.0, 16.0] {
            let zeta = Complex64::new(r, 0.0);
            let b = classify::berezin_auto(pair, p, pair.psi.apply(zeta), 1e-10)?;
            let m = classify::criterion(pair, zeta).powf(p);
            cells.push(format!("{b:.3e} ({:.2e})", b / m));
        }
        println!("{name}: B(psi(r)) (B / M^p) for r = 1..16: {}", cells.join("  "));
    }
    Ok(())
}
