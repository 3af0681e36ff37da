//! Reproducing-kernel norms by plane quadrature against the closed form e^{|w|^2/2}.
//!
//! cargo run --example kernel_norms

use focklab::classify;
use num_complex::Complex64;

fn main() -> focklab::Result<()> {
    println!("{:>10} {:>4} {:>16} {:>16} {:>10} {:>8}", "w", "p", "quadrature", "closed form", "rel err", "nodes");
    for w in [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0), Complex64::new(2.0, 2.0), Complex64::new(3.0, 0.0)] {
        for p in [1.0, 2.0, 4.0] {
            let grid = classify::kernel_grid(w, p, 1e-10)?;
            let got = classify::kernel_norm(w, p, &grid)?;
            let want = (0.5 * w.norm_sqr()).exp();
            println!("{:>10} {p:>4} {got:>16.10} {want:>16.10} {:>10.1e} {:>8}", w.to_string(), (got - want).abs() / want, grid.node_count());
        }
    }
    Ok(())
}
