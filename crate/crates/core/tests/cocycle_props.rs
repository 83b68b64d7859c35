mod common;

use common::*;
use metaplectic_core::cocycle::{kubota_gl2, sigma, CocycleParams};
use metaplectic_core::SymbolBackend;

#[test]
fn cocycle_identity_random() {
    let mut g = rng(1);
    for r in 2..=3 {
        for bk in backends().into_iter().chain(["tame:7:3".parse::<SymbolBackend>().unwrap()]) {
            for c in 0..2 {
                let p = CocycleParams::new(r, c, bk.clone()).unwrap();
                for _ in 0..200 {
                    let (x, y, z) = (mat(&mut g, r), mat(&mut g, r), mat(&mut g, r));
                    let lhs = sigma(&x, &y, &p).unwrap() * sigma(&x.mul(&y), &z, &p).unwrap();
                    let rhs = sigma(&x, &y.mul(&z), &p).unwrap() * sigma(&y, &z, &p).unwrap();
                    assert_eq!(lhs, rhs, "{bk} r={r} c={c}\n{x}\n{y}\n{z}");
                }
            }
        }
    }
}

#[test]
fn kubota_matches_rank_two() {
    let mut g = rng(2);
    for bk in backends() {
        for c in 0..2 {
            let p = CocycleParams::new(2, c, bk.clone()).unwrap();
            for _ in 0..500 {
                let (x, y) = (mat(&mut g, 2), mat(&mut g, 2));
                assert_eq!(
                    kubota_gl2(&x, &y, &p).unwrap(),
                    sigma(&x, &y, &p).unwrap(),
                    "{bk} c={c} {x} {y}"
                );
            }
        }
    }
}
