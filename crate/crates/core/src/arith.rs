//! Exact rationals, places of Q, p-adic valuations and n-th power classes.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, Error, Result};

/// A rational number in lowest terms with positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rat(BigRational);

impl Rat {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        let den = den.into();
        assert!(!den.is_zero(), "zero denominator");
        Rat(BigRational::new(num.into(), den))
    }

    pub fn int(v: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_big(num: BigInt) -> Self {
        Rat(BigRational::from_integer(num))
    }

    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn abs(&self) -> Rat {
        Rat(self.0.abs())
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn recip(&self) -> Rat {
        assert!(!self.is_zero(), "reciprocal of zero");
        Rat(self.0.recip())
    }

    pub fn checked_recip(&self) -> Result<Rat> {
        if self.is_zero() {
            return domain("reciprocal of zero");
        }
        Ok(Rat(self.0.recip()))
    }

    /// Integer power; negative exponents require a nonzero base.
    pub fn pow(&self, e: i64) -> Rat {
        if e >= 0 {
            Rat(num_traits::pow(self.0.clone(), e as usize))
        } else {
            Rat(num_traits::pow(self.recip().0, e.unsigned_abs() as usize))
        }
    }

    /// Height: max(|numerator|, denominator), used to rank counterexamples.
    pub fn height(&self) -> BigUint {
        let n = self.numer().magnitude();
        let d = self.denom().magnitude();
        if n > d {
            n.clone()
        } else {
            d.clone()
        }
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }
}

impl From<i64> for Rat {
    fn from(v: i64) -> Self {
        Rat::int(v)
    }
}

impl From<BigRational> for Rat {
    fn from(v: BigRational) -> Self {
        Rat(v)
    }
}

macro_rules! rat_binop {
    ($tr:ident, $f:ident) => {
        impl $tr<Rat> for Rat {
            type Output = Rat;
            fn $f(self, rhs: Rat) -> Rat {
                Rat(self.0.$f(rhs.0))
            }
        }
        impl<'a> $tr<&'a Rat> for Rat {
            type Output = Rat;
            fn $f(self, rhs: &'a Rat) -> Rat {
                Rat(self.0.$f(&rhs.0))
            }
        }
        impl<'a> $tr<Rat> for &'a Rat {
            type Output = Rat;
            fn $f(self, rhs: Rat) -> Rat {
                Rat((&self.0).$f(rhs.0))
            }
        }
        impl<'a, 'b> $tr<&'b Rat> for &'a Rat {
            type Output = Rat;
            fn $f(self, rhs: &'b Rat) -> Rat {
                Rat((&self.0).$f(&rhs.0))
            }
        }
    };
}

rat_binop!(Add, add);
rat_binop!(Sub, sub);
rat_binop!(Mul, mul);
rat_binop!(Div, div);

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0.clone())
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom().is_one() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("not a rational: {s:?}"));
        match s.split_once('/') {
            None => Ok(Rat::from_big(s.parse::<BigInt>().map_err(|_| bad())?)),
            Some((n, d)) => {
                let n = n.trim().parse::<BigInt>().map_err(|_| bad())?;
                let d = d.trim().parse::<BigInt>().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(bad());
                }
                Ok(Rat::new(n, d))
            }
        }
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Str(String),
            Int(i64),
        }
        match Repr::deserialize(d)? {
            Repr::Str(s) => s.parse().map_err(serde::de::Error::custom),
            Repr::Int(i) => Ok(Rat::int(i)),
        }
    }
}

/// A place of Q.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Place {
    Infinite,
    Finite(BigUint),
}

impl Place {
    pub fn finite(p: u64) -> Result<Place> {
        let p = BigUint::from(p);
        if !is_prime(&p) {
            return domain(format!("{p} is not prime"));
        }
        Ok(Place::Finite(p))
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinite => write!(f, "inf"),
            Place::Finite(p) => write!(f, "{p}"),
        }
    }
}

impl fmt::Debug for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Place {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PowerClassParams {
    pub n: u32,
    pub place: Place,
}

impl PowerClassParams {
    pub fn new(n: u32, place: Place) -> Result<Self> {
        if n < 2 {
            return domain(format!("power-class modulus must be >= 2, got {n}"));
        }
        Ok(PowerClassParams { n, place })
    }
}

pub fn is_prime(p: &BigUint) -> bool {
    num_prime::nt_funcs::is_prime(p, None).probably()
}

/// Distinct prime divisors of `m`, ascending.
pub fn prime_factors(m: &BigUint) -> Vec<BigUint> {
    if m <= &BigUint::one() {
        return Vec::new();
    }
    if let Some(v) = m.to_u64() {
        return num_prime::nt_funcs::factorize64(v)
            .into_keys()
            .map(BigUint::from)
            .collect();
    }
    if let Some(v) = m.to_u128() {
        return num_prime::nt_funcs::factorize128(v)
            .into_keys()
            .map(BigUint::from)
            .collect();
    }
    num_prime::nt_funcs::factorize(m.clone()).into_keys().collect()
}

fn int_valuation(m: &BigInt, p: &BigUint) -> i64 {
    let p = BigInt::from_biguint(Sign::Plus, p.clone());
    let mut m = m.clone();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

/// `x = p^v · num / den` with `num`, `den` prime to `p`.
pub(crate) fn split_unit(x: &Rat, p: &BigUint) -> Result<(i64, BigInt, BigInt)> {
    if x.is_zero() {
        return domain("valuation of zero");
    }
    let pi = BigInt::from_biguint(Sign::Plus, p.clone());
    let strip = |m: &BigInt| {
        let mut m = m.clone();
        let mut v = 0;
        loop {
            let (q, r) = m.div_rem(&pi);
            if !r.is_zero() {
                return (v, m);
            }
            m = q;
            v += 1;
        }
    };
    let (vn, num) = strip(x.numer());
    let (vd, den) = strip(x.denom());
    Ok((vn - vd, num, den))
}

pub(crate) fn mod_u64(m: &BigInt, p: u64) -> u64 {
    m.mod_floor(&BigInt::from(p)).to_u64().expect("reduced below p")
}

pub(crate) fn pow_mod_u64(x: u64, mut e: u64, p: u64) -> u64 {
    let (mut base, mut acc) = (x as u128 % p as u128, 1u128);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u128;
        }
        base = base * base % p as u128;
        e >>= 1;
    }
    acc as u64
}

/// The p-adic valuation of a nonzero rational.
pub fn valuation(x: &Rat, p: &BigUint) -> Result<i64> {
    if x.is_zero() {
        return domain("valuation of zero");
    }
    Ok(int_valuation(x.numer(), p) - int_valuation(x.denom(), p))
}

/// `x / p^valuation(x, p)`.
pub fn unit_part(x: &Rat, p: &BigUint) -> Result<Rat> {
    let v = valuation(x, p)?;
    let pr = Rat::from_big(BigInt::from_biguint(Sign::Plus, p.clone()));
    Ok(x * pr.pow(-v))
}

/// Image of a p-adic unit (rational with numerator and denominator prime to
/// `p`) in Z/pZ. `p` must be prime.
pub fn residue(x: &Rat, p: &BigUint) -> Result<BigUint> {
    let pi = BigInt::from_biguint(Sign::Plus, p.clone());
    let num = x.numer().mod_floor(&pi).to_biguint().unwrap();
    let den = x.denom().mod_floor(&pi).to_biguint().unwrap();
    if num.is_zero() || den.is_zero() {
        return domain(format!("{x} is not a unit at {p}"));
    }
    let den_inv = den.modpow(&(p - 2u32), p);
    Ok((num * den_inv) % p)
}

/// An odd 2-adic unit reduced mod 8 (one of 1, 3, 5, 7).
pub fn odd_mod8(u: &Rat) -> Result<u32> {
    let eight = BigInt::from(8);
    let num = u.numer().mod_floor(&eight).to_u32().unwrap();
    let den = u.denom().mod_floor(&eight).to_u32().unwrap();
    if num % 2 == 0 || den % 2 == 0 {
        return domain(format!("{u} is not a 2-adic unit"));
    }
    // odd d satisfies d^2 = 1 mod 8, so d^{-1} = d
    Ok((num * den) % 8)
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Number of classes of units mod n-th powers in the residue field at `p`,
/// i.e. gcd(n, p-1).
fn unit_class_order(n: u32, p: &BigUint) -> u32 {
    let pm1 = p - 1u32;
    let r = (&pm1 % n).to_u64().unwrap();
    gcd_u64(n as u64, r) as u32
}

fn check_tame(params: &PowerClassParams) -> Result<()> {
    if let Place::Finite(p) = &params.place {
        if params.n > 2 && (BigUint::from(params.n) % p).is_zero() {
            return Err(Error::UnsupportedBackend(format!(
                "wild power test: p = {p} divides n = {}",
                params.n
            )));
        }
    }
    Ok(())
}

/// Whether `x` lies in `F_v^{×n}` where `F_v` is the completion of Q at the
/// given place.
pub fn is_nth_power(x: &Rat, params: &PowerClassParams) -> Result<bool> {
    if x.is_zero() {
        return domain("power test of zero");
    }
    check_tame(params)?;
    let n = params.n;
    match &params.place {
        Place::Infinite => Ok(n % 2 == 1 || !x.is_negative()),
        Place::Finite(p) => {
            let v = valuation(x, p)?;
            if v.rem_euclid(n as i64) != 0 {
                return Ok(false);
            }
            let u = unit_part(x, p)?;
            if p == &BigUint::from(2u32) {
                // n = 2 here (n > 2 with p | n was rejected, odd n handled below)
                if n % 2 == 0 {
                    return Ok(odd_mod8(&u)? == 1);
                }
                return Ok(true);
            }
            let k = unit_class_order(n, p);
            let e = (p - 1u32) / k;
            Ok(residue(&u, p)?.modpow(&e, p).is_one())
        }
    }
}

/// The smallest primitive root modulo a prime `p`.
pub fn primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let qs: Vec<u64> = num_prime::nt_funcs::factorize64(p - 1).into_keys().collect();
    let pb = BigUint::from(p);
    (2..p)
        .find(|&g| {
            let gb = BigUint::from(g);
            qs.iter()
                .all(|q| !gb.modpow(&BigUint::from((p - 1) / q), &pb).is_one())
        })
        .expect("every prime has a primitive root")
}

/// Smallest integer whose residue generates the cyclic group
/// `F_p^× / F_p^{×k}` (k | p-1).
fn class_generator(p: &BigUint, k: u32) -> BigUint {
    let qs: Vec<u64> = num_prime::nt_funcs::factorize64(k as u64)
        .into_keys()
        .collect();
    let pm1 = p - 1u32;
    let mut g = BigUint::from(2u32);
    loop {
        if qs
            .iter()
            .all(|q| !g.modpow(&(&pm1 / *q), p).is_one())
        {
            return g;
        }
        g += 1u32;
    }
}

/// Canonical representative of the class of `x` in `F_v^× / F_v^{×n}`.
///
/// Representatives are `p^i g^j` (finite odd or tame), `2^i u` with
/// `u ∈ {1,3,5,7}` (dyadic quadratic), or `±1` (real).
pub fn power_class_rep(x: &Rat, params: &PowerClassParams) -> Result<Rat> {
    if x.is_zero() {
        return domain("power class of zero");
    }
    check_tame(params)?;
    let n = params.n;
    match &params.place {
        Place::Infinite => Ok(if n % 2 == 0 && x.is_negative() {
            Rat::int(-1)
        } else {
            Rat::one()
        }),
        Place::Finite(p) => {
            let v = valuation(x, p)?.rem_euclid(n as i64);
            let u = unit_part(x, p)?;
            let pr = Rat::from_big(BigInt::from_biguint(Sign::Plus, p.clone()));
            let unit_rep = if p == &BigUint::from(2u32) {
                if n % 2 == 0 {
                    Rat::int(odd_mod8(&u)? as i64)
                } else {
                    Rat::one()
                }
            } else {
                let k = unit_class_order(n, p);
                if k == 1 {
                    Rat::one()
                } else {
                    let g = class_generator(p, k);
                    let e = (p - 1u32) / k;
                    let zeta = g.modpow(&e, p);
                    let y = residue(&u, p)?.modpow(&e, p);
                    let mut acc = BigUint::one();
                    let mut j = 0u32;
                    while acc != y {
                        acc = (acc * &zeta) % p;
                        j += 1;
                    }
                    Rat::from_big(BigInt::from_biguint(Sign::Plus, g)).pow(j as i64)
                }
            };
            Ok(pr.pow(v) * unit_rep)
        }
    }
}

/// A full set of representatives of `F_v^× / F_v^{×n}`, in the canonical
/// form produced by [`power_class_rep`].
pub fn power_class_transversal(params: &PowerClassParams) -> Result<Vec<Rat>> {
    check_tame(params)?;
    let n = params.n;
    match &params.place {
        Place::Infinite => Ok(if n % 2 == 0 {
            vec![Rat::one(), Rat::int(-1)]
        } else {
            vec![Rat::one()]
        }),
        Place::Finite(p) => {
            let pr = Rat::from_big(BigInt::from_biguint(Sign::Plus, p.clone()));
            let units: Vec<Rat> = if p == &BigUint::from(2u32) {
                if n % 2 == 0 {
                    [1, 3, 5, 7].iter().map(|&u| Rat::int(u)).collect()
                } else {
                    vec![Rat::one()]
                }
            } else {
                let k = unit_class_order(n, p);
                let g = Rat::from_big(BigInt::from_biguint(Sign::Plus, class_generator(p, k)));
                (0..k as i64).map(|j| g.pow(j)).collect()
            };
            let mut out = Vec::new();
            for i in 0..n as i64 {
                for u in &units {
                    out.push(pr.pow(i) * u);
                }
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn big(p: u64) -> BigUint {
        BigUint::from(p)
    }

    // Oracle: direct factorisation of numerator and denominator.
    fn valuation_by_factoring(num: i64, den: i64, p: i64) -> i64 {
        let count = |mut m: i64| {
            let mut v = 0;
            while m % p == 0 {
                m /= p;
                v += 1;
            }
            v
        };
        count(num.abs()) - count(den.abs())
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(valuation(&Rat::int(12), &big(2)).unwrap(), 2);
        assert_eq!(valuation(&Rat::int(1), &big(5)).unwrap(), 0);
        assert_eq!(valuation_by_factoring(9, 50, 5), -2);
        assert_eq!(valuation(&r("9/50"), &big(5)).unwrap(), -2);
        assert!(matches!(valuation(&Rat::zero(), &big(3)), Err(Error::Domain(_))));
    }

    #[test]
    fn unit_part_examples() {
        assert_eq!(unit_part(&Rat::int(12), &big(2)).unwrap(), Rat::int(3));
        assert_eq!(unit_part(&r("9/50"), &big(5)).unwrap(), r("9/2"));
        assert_eq!(unit_part(&Rat::int(7), &big(3)).unwrap(), Rat::int(7));
        assert!(unit_part(&Rat::zero(), &big(3)).is_err());
    }

    // Oracle for the dyadic square test: Hensel-style search for a root of
    // y^2 = u mod 2^k for k up to 7.
    fn dyadic_square_oracle(u: i64) -> bool {
        let m = 1i64 << 7;
        (0..m).any(|y| (y * y - u).rem_euclid(m) == 0)
    }

    #[test]
    fn nth_power_examples() {
        let real = PowerClassParams::new(2, Place::Infinite).unwrap();
        assert!(is_nth_power(&Rat::int(4), &real).unwrap());
        assert!(!is_nth_power(&Rat::int(-4), &real).unwrap());
        let five = PowerClassParams::new(2, Place::finite(5).unwrap()).unwrap();
        assert!(!is_nth_power(&Rat::int(5), &five).unwrap());
        let two = PowerClassParams::new(2, Place::finite(2).unwrap()).unwrap();
        assert!(dyadic_square_oracle(17));
        assert!(is_nth_power(&Rat::int(17), &two).unwrap());
    }

    #[test]
    fn dyadic_test_matches_hensel_oracle() {
        let two = PowerClassParams::new(2, Place::finite(2).unwrap()).unwrap();
        for u in (1..200).step_by(2) {
            assert_eq!(
                is_nth_power(&Rat::int(u), &two).unwrap(),
                dyadic_square_oracle(u),
                "u = {u}"
            );
        }
    }

    #[test]
    fn wild_cases_rejected() {
        let p = PowerClassParams::new(4, Place::finite(2).unwrap()).unwrap();
        assert!(matches!(
            is_nth_power(&Rat::int(3), &p),
            Err(Error::UnsupportedBackend(_))
        ));
        let p = PowerClassParams::new(3, Place::finite(3).unwrap()).unwrap();
        assert!(is_nth_power(&Rat::int(2), &p).is_err());
    }

    #[test]
    fn transversal_sizes() {
        let cases = [(2, Place::Infinite, 2), (2, Place::finite(2).unwrap(), 8)];
        for (n, place, size) in cases {
            let params = PowerClassParams::new(n, place).unwrap();
            assert_eq!(power_class_transversal(&params).unwrap().len(), size);
        }
        for p in [3u64, 5, 7, 11] {
            let params = PowerClassParams::new(2, Place::finite(p).unwrap()).unwrap();
            assert_eq!(power_class_transversal(&params).unwrap().len(), 4);
        }
        let params = PowerClassParams::new(3, Place::finite(7).unwrap()).unwrap();
        assert_eq!(power_class_transversal(&params).unwrap().len(), 9);
    }

    #[test]
    fn class_reps_are_fixed_points_and_distinct() {
        for (n, p) in [(2u32, 2u64), (2, 3), (2, 5), (3, 7), (3, 13), (4, 13)] {
            let params = PowerClassParams::new(n, Place::finite(p).unwrap()).unwrap();
            let t = power_class_transversal(&params).unwrap();
            for (i, a) in t.iter().enumerate() {
                assert_eq!(&power_class_rep(a, &params).unwrap(), a);
                for b in &t[i + 1..] {
                    assert!(!is_nth_power(&(a / b), &params).unwrap());
                }
            }
        }
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(r("6/-4").to_string(), "-3/2");
        assert_eq!(r("7").to_string(), "7");
        assert!("1/0".parse::<Rat>().is_err());
        assert!("x".parse::<Rat>().is_err());
        let json = serde_json::to_string(&r("-3/2")).unwrap();
        assert_eq!(json, "\"-3/2\"");
        assert_eq!(serde_json::from_str::<Rat>(&json).unwrap(), r("-3/2"));
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(primitive_root(7), 3);
        assert_eq!(primitive_root(13), 2);
        assert_eq!(primitive_root(41), 6);
    }

    #[test]
    fn factors_of_large_numbers() {
        let m = BigUint::from(2u64.pow(61) - 1) * BigUint::from(1_000_003u64) * 12u32;
        let fs = prime_factors(&m);
        assert_eq!(
            fs,
            vec![big(2), big(3), big(1_000_003), big(2u64.pow(61) - 1)]
        );
    }
}
