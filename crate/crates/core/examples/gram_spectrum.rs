//! Eve's Gram matrix for random collective attacks: closed-form spectrum
//! against numerical diagonalisation, and the resulting Holevo quantity.

use pnp_qkd::security::{
    gram_eigenvalues_closed_form, gram_eigenvalues_numeric, gram_matrix, holevo_from_attack, AncillaRealization,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..5 {
        let r = AncillaRealization::random(&mut rng);
        let ov = r.overlaps();
        let numeric = gram_eigenvalues_numeric(&gram_matrix(&r).unwrap());
        let closed = gram_eigenvalues_closed_form(&ov);
        println!(
            "|e01|²={:.3} |e10|²={:.3}  eig={:.4?}  max diff={:.1e}  chi={:.4}",
            ov.eps01_norm,
            ov.eps10_norm,
            closed,
            numeric.iter().zip(&closed).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
            holevo_from_attack(&ov)
        );
    }
}
