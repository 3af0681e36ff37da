//! Truncated Schatten norms of V_z across a dims ladder. The operator is in S_p
//! exactly for p > 2: the norms settle above the cutoff and keep growing below it.
//!
//! cargo run --release --example schatten_threshold

use focklab::classify;
use focklab::fockmat;
use focklab::{AffineMap, ComplexPolynomial, SymbolPair};

fn main() -> focklab::Result<()> {
    let pair = SymbolPair::v(ComplexPolynomial::from_real(&[0.0, 1.0]), AffineMap::identity());
    println!("symbolic cutoff: S_p for p > {}", classify::verdict(&pair, 2.0, 2.0)?.schatten_cutoff);
    let dims = [32, 64, 128, 256];
    let spectra = dims
        .iter()
        .map(|&n| fockmat::build_pair(&pair, n).and_then(|t| fockmat::singular_values(&t)))
        .collect::<focklab::Result<Vec<_>>>()?;
    print!("{:>5}", "p");
    for n in dims {
        print!(" {:>10}", format!("N={n}"));
    }
    println!(" {:>10}", "last step");
    for p in [1.0, 1.5, 2.0, 2.5, 3.0, 4.0] {
        print!("{p:>5}");
        let norms: Vec<f64> = spectra.iter().map(|s| s.schatten(p)).collect::<focklab::Result<_>>()?;
        for x in &norms {
            print!(" {x:>10.5}");
        }
        println!(" {:>9.2}%", 100.0 * (norms[3] / norms[2] - 1.0));
    }
    println!("p = 4 limit: zeta(2)^(1/4) = {:.5}", (std::f64::consts::PI.powi(2) / 6.0).powf(0.25));
    Ok(())
}
