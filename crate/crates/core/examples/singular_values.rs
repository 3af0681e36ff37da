//! Truncated matrices and their singular values, checked against closed forms.
//!
//! cargo run --example singular_values [N]

use focklab::fockmat;
use focklab::{AffineMap, ComplexPolynomial, SymbolPair};

fn main() -> focklab::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(64);
    let v = |c: &[f64]| SymbolPair::v(ComplexPolynomial::from_real(c), AffineMap::identity());

    // V_{z^2} is a two-step weighted shift with weights 2 sqrt((k+1)/(k+2))
    let s = fockmat::singular_values(&fockmat::build_pair(&v(&[0.0, 0.0, 1.0]), n)?)?;
    let err = (0..n - 2)
        .map(|k| {
            let want = 2.0 * ((n - 2 - k) as f64 / (n - 1 - k) as f64).sqrt();
            (s.values[k] - want).abs()
        })
        .fold(0.0, f64::max);
    println!("V_(z^2): top {:.6}, bottom nonzero {:.6}, max err vs closed form {err:.1e}", s.largest(), s.values[n - 3]);

    // V_z: weights 1/sqrt(k+1)
    let s = fockmat::singular_values(&fockmat::build_pair(&v(&[0.0, 1.0]), n)?)?;
    let err = (0..n - 1).map(|k| (s.values[k] - 1.0 / ((k + 1) as f64).sqrt()).abs()).fold(0.0, f64::max);
    println!("V_z:     top {:.6}, bottom nonzero {:.6}, max err vs closed form {err:.1e}", s.largest(), s.values[n - 2]);

    // small matrices export as JSON, any size as little-endian binary
    let t = fockmat::build_pair(&v(&[0.0, 0.0, 1.0]), 4)?;
    println!("{}", serde_json::to_string(&t.to_json()?["entries"])?);
    let mut bytes = Vec::new();
    t.write_binary(&mut bytes).map_err(|e| focklab::FockError::io("<memory>", e))?;
    println!("binary export: {} bytes, round trip exact: {}", bytes.len(), &fockmat::read_binary(&bytes)? == t.entries());
    Ok(())
}
