mod common;

use common::{fd_check, fd_fixture};
use wlticket::gnn::{Activation, Variant};

#[test]
fn analytic_gradients_match_finite_differences() {
    for variant in [Variant::Gin, Variant::Gcn] {
        for activation in [Activation::Relu, Activation::LEAKY, Activation::Softsign] {
            let mut skipped = 0;
            for seed in 0..20 {
                let (model, g) = fd_fixture(variant, activation, seed);
                let (err, s) = fd_check(&model, &g);
                skipped += s;
                assert!(
                    err <= 1e-6,
                    "{variant:?}/{activation:?} seed {seed}: rel err {err:e}"
                );
            }
            eprintln!("{variant:?}/{activation:?}: {skipped} kink-crossing coordinates skipped");
        }
    }
}
