#![allow(dead_code)]

use metaplectic_core::arith::{unit_part, valuation};
use metaplectic_core::levi::{block_embed, iota};
use metaplectic_core::{LeviShape, MatQ, Rat, SymbolBackend};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::ToPrimitive;
use std::cell::RefCell;
use std::collections::HashMap;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rat(rng: &mut TestRng, bound: i64) -> Rat {
    Rat::new(rng.gen_range(-bound..=bound), rng.gen_range(1..=bound))
}

pub fn nonzero_rat(rng: &mut TestRng, bound: i64) -> Rat {
    loop {
        let x = rat(rng, bound);
        if !x.is_zero() {
            return x;
        }
    }
}

/// Random invertible matrix; about a third of the entries are zero so that
/// small Bruhat cells are hit often.
pub fn mat(rng: &mut TestRng, r: usize) -> MatQ {
    loop {
        let rows = (0..r)
            .map(|_| {
                (0..r)
                    .map(|_| {
                        if rng.gen_bool(0.35) {
                            Rat::zero()
                        } else {
                            rat(rng, 12)
                        }
                    })
                    .collect()
            })
            .collect();
        if let Ok(m) = MatQ::from_rows(rows) {
            return m;
        }
    }
}

pub fn diag(rng: &mut TestRng, r: usize) -> MatQ {
    MatQ::diag(&(0..r).map(|_| nonzero_rat(rng, 30)).collect::<Vec<_>>()).unwrap()
}

pub fn unipotent(rng: &mut TestRng, r: usize) -> MatQ {
    let mut m = MatQ::identity(r);
    for i in 0..r {
        for j in i + 1..r {
            m = m.mul(&MatQ::elementary(r, i, j, rat(rng, 12)));
        }
    }
    m
}

pub fn backends() -> Vec<SymbolBackend> {
    ["real", "padic:2", "padic:3", "padic:5"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect()
}


pub fn all_perms(r: usize) -> Vec<Vec<usize>> {
    if r == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in all_perms(r - 1) {
        for pos in 0..r {
            let mut q = p.clone();
            q.insert(pos, r - 1);
            out.push(q);
        }
    }
    out
}

/// All tuples of length `len` over `items`.
pub fn tuples<T: Clone>(items: &[T], len: usize) -> Vec<Vec<T>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                items.iter().map(move |x| {
                    let mut t = t.clone();
                    t.push(x.clone());
                    t
                })
            })
            .collect();
    }
    out
}

fn residue_mod(x: &Rat, m: i64) -> i64 {
    let mb = BigInt::from(m);
    let num = x.numer().mod_floor(&mb).to_i64().unwrap();
    let den = x.denom().mod_floor(&mb).to_i64().unwrap();
    let inv = (1..m).find(|&d| (d * den).rem_euclid(m) == 1).unwrap();
    (num * inv).rem_euclid(m)
}

thread_local! {
    static CONIC_CACHE: RefCell<HashMap<(u64, i64, i64), bool>> = RefCell::new(HashMap::new());
}

/// Solvability of `z^2 = a x^2 + b y^2` with `(x, y)` primitive mod `p^k`.
pub fn conic_solvable(a: &Rat, b: &Rat, p: u64) -> bool {
    let k = match p {
        2 => 6,
        3 => 5,
        _ => 3,
    };
    let pb = BigUint::from(p);
    let m = (p as i64).pow(k);
    let reduce = |x: &Rat| {
        let v = valuation(x, &pb).unwrap().rem_euclid(2);
        let u = residue_mod(&unit_part(x, &pb).unwrap(), m);
        (u * (p as i64).pow(v as u32)).rem_euclid(m)
    };
    let key = (p, reduce(a), reduce(b));
    if let Some(v) = CONIC_CACHE.with(|c| c.borrow().get(&key).copied()) {
        return v;
    }
    let (_, a, b) = key;
    let mut is_square = vec![false; m as usize];
    for z in 0..m {
        is_square[(z * z % m) as usize] = true;
    }
    let pi = p as i64;
    let v = (0..m).any(|x| {
        (0..m).any(|y| (x % pi != 0 || y % pi != 0) && is_square[((a * x * x + b * y * y) % m) as usize])
    });
    CONIC_CACHE.with(|c| c.borrow_mut().insert(key, v));
    v
}

/// `z^2 = a x^2 + b y^2` has a nonzero real solution.
pub fn real_conic_solvable(a: &Rat, b: &Rat) -> bool {
    !(a.is_negative() && b.is_negative())
}

/// Tame symbol at a small prime by direct residue arithmetic, with μ_n
/// identified through the least primitive root found by brute force.
pub fn tame_oracle(a: &Rat, b: &Rat, p: i64, n: i64) -> i64 {
    let pb = BigUint::from(p as u64);
    let al = valuation(a, &pb).unwrap();
    let be = valuation(b, &pb).unwrap();
    let ua = residue_mod(&unit_part(a, &pb).unwrap(), p);
    let ub = residue_mod(&unit_part(b, &pb).unwrap(), p);
    let powmod = |mut x: i64, mut e: i64| {
        let mut acc = 1;
        x = x.rem_euclid(p);
        e = e.rem_euclid(p - 1);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * x % p;
            }
            x = x * x % p;
            e >>= 1;
        }
        acc
    };
    // a = p^al ua, b = p^be ub: (-1)^{al be} a^be b^-al has residue below
    let sign = if (al * be).rem_euclid(2) == 1 { p - 1 } else { 1 };
    let x = sign * powmod(ua, be) % p * powmod(ub, -al) % p;
    let g = (2..p)
        .find(|&g| (1..p - 1).all(|e| powmod(g, e) != 1))
        .unwrap();
    let zeta = powmod(g, (p - 1) / n);
    let y = powmod(x, (p - 1) / n);
    (0..n).find(|&k| powmod(zeta, k) == y).unwrap()
}

pub fn shape(part: &[usize], c: u32, bk: &SymbolBackend) -> LeviShape {
    LeviShape::new(part.to_vec(), c, bk.clone()).unwrap()
}

pub fn blocks(rng: &mut TestRng, part: &[usize]) -> Vec<MatQ> {
    part.iter().map(|&ri| mat(rng, ri)).collect()
}

/// Random element of `M^{(n)}`: `g_i ι_i(det(g_i)^{n-1})` per block.
pub fn blocks_mn(rng: &mut TestRng, part: &[usize], n: u32) -> Vec<MatQ> {
    blocks(rng, part)
        .into_iter()
        .zip(part)
        .map(|(g, &ri)| g.mul(&iota(ri, &g.det().pow(n as i64 - 1)).unwrap()))
        .collect()
}

/// Random element of the unipotent radical of the standard parabolic.
pub fn radical(rng: &mut TestRng, part: &[usize]) -> MatQ {
    let r: usize = part.iter().sum();
    let mut block_of = Vec::new();
    for (i, &ri) in part.iter().enumerate() {
        block_of.extend(std::iter::repeat(i).take(ri));
    }
    let mut m = MatQ::identity(r);
    for i in 0..r {
        for j in i + 1..r {
            if block_of[i] < block_of[j] && rng.gen_bool(0.7) {
                m = m.mul(&MatQ::elementary(r, i, j, rat(rng, 9)));
            }
        }
    }
    m
}

pub fn block_scalar(a: &[Rat], shape: &LeviShape) -> MatQ {
    let blocks: Vec<MatQ> = a
        .iter()
        .zip(shape.partition())
        .map(|(x, &ri)| MatQ::scalar(ri, x).unwrap())
        .collect();
    block_embed(&blocks, shape).unwrap()
}
