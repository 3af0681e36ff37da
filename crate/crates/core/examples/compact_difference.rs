//! Compact differences: V_{z^2} and V_{z^2+z} are both non-compact, but their
//! difference is V_{-z}, which is compact. Both routes agree.
//!
//! cargo run --release --example compact_difference

use focklab::classify;
use focklab::fockmat::{self, OperatorSpec};
use focklab::{AffineMap, ComplexPolynomial, SymbolPair};

fn main() -> focklab::Result<()> {
    let v = |c: &[f64], psi| SymbolPair::v(ComplexPolynomial::from_real(c), psi);
    let id = AffineMap::identity();
    let pairs = [
        ("V_(z^2) - V_(z^2+z)", v(&[0.0, 0.0, 1.0], id), v(&[0.0, 1.0, 1.0], id)),
        ("V_(z) - V_(z, z/2)", v(&[0.0, 1.0], id), v(&[0.0, 1.0], AffineMap::real(0.5, 0.0))),
        ("V_(z^2) - V_(z^2, z/2)", v(&[0.0, 0.0, 1.0], id), v(&[0.0, 0.0, 1.0], AffineMap::real(0.5, 0.0))),
    ];
    for (name, a, b) in pairs {
        let verdict = classify::difference_compact(&a, &b, 2.0, 2.0)?;
        let s4 = classify::difference_schatten(&a, &b, 4.0)?;
        let spec = OperatorSpec::Difference { first: a.clone(), second: b.clone() };
        let ev = fockmat::compactness_proxy(&spec, &fockmat::DEFAULT_DIMS, 0.1, 0.2)?;
        println!("{name}");
        println!("  verdict: compact {} via {:?}, in S_4 {:?}", verdict.compact, verdict.branch, s4.schatten_for_p);
        println!(
            "  proxy:   compact {}, tail quantiles {:?}, operator norms {:?}",
            ev.compact,
            ev.tail_quantiles.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>(),
            ev.operator_norms.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>()
        );
    }
    Ok(())
}
