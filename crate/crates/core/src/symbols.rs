//! Steinberg/Hilbert symbol backends with values in μ_n, written additively.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Mul, MulAssign};
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize, Serializer};

use crate::arith::{
    is_nth_power, is_prime, mod_u64, pow_mod_u64, power_class_rep, power_class_transversal,
    prime_factors, primitive_root, split_unit, Place, PowerClassParams, Rat,
};
use crate::error::{domain, Error, Result};

/// An n-th root of unity `ζ^exponent`, stored as an exponent mod n.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MuN {
    exponent: u32,
    modulus: u32,
}

impl MuN {
    pub fn new(exponent: i64, modulus: u32) -> Self {
        assert!(modulus >= 1, "modulus must be positive");
        MuN {
            exponent: exponent.rem_euclid(modulus as i64) as u32,
            modulus,
        }
    }

    pub fn identity(modulus: u32) -> Self {
        MuN::new(0, modulus)
    }

    pub fn exponent(self) -> u32 {
        self.exponent
    }

    pub fn modulus(self) -> u32 {
        self.modulus
    }

    pub fn is_identity(self) -> bool {
        self.exponent == 0
    }

    pub fn inv(self) -> Self {
        MuN::new(-(self.exponent as i64), self.modulus)
    }

    pub fn pow(self, e: i64) -> Self {
        let n = self.modulus as i64;
        MuN::new((self.exponent as i64 * e.rem_euclid(n)) % n, self.modulus)
    }
}

impl Mul for MuN {
    type Output = MuN;
    fn mul(self, rhs: MuN) -> MuN {
        assert_eq!(self.modulus, rhs.modulus, "μ_n moduli differ");
        MuN::new(self.exponent as i64 + rhs.exponent as i64, self.modulus)
    }
}

impl MulAssign for MuN {
    fn mul_assign(&mut self, rhs: MuN) {
        *self = *self * rhs;
    }
}

impl fmt::Display for MuN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ζ{}^{}", self.modulus, self.exponent)
    }
}

impl fmt::Debug for MuN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A bimultiplicative pairing `F^× × F^× → μ_n` together with the power-class
/// structure of `F^×` it is attached to.
pub trait Pairing: Send + Sync {
    fn modulus(&self) -> u32;

    fn pair(&self, a: &Rat, b: &Rat) -> Result<MuN>;

    /// Whether `x ∈ F^{×m}`.
    fn is_power(&self, x: &Rat, m: u32) -> Result<bool>;

    /// Canonical representative of `x` modulo `F^{×n}`.
    fn class_rep(&self, x: &Rat) -> Result<Rat>;

    /// Representatives of `F^× / F^{×n}`.
    fn transversal(&self) -> Result<Vec<Rat>>;

    fn describe(&self) -> String;

    fn is_nth_power(&self, x: &Rat) -> Result<bool> {
        self.is_power(x, self.modulus())
    }
}

pub type SharedPairing = Arc<dyn Pairing>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BackendKind {
    RealQuadratic,
    PadicQuadratic(BigUint),
    Tame { p: u64, n: u32 },
    Trivial(u32),
}

/// Local symbol over the completion of Q at one place.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymbolBackend {
    kind: BackendKind,
    // ζ = g^{(p-1)/n} with g the least primitive root, for the tame backend
    zeta: Option<u64>,
}

impl SymbolBackend {
    pub fn real() -> Self {
        SymbolBackend {
            kind: BackendKind::RealQuadratic,
            zeta: None,
        }
    }

    pub fn padic(p: u64) -> Result<Self> {
        Self::padic_big(BigUint::from(p))
    }

    pub fn padic_big(p: BigUint) -> Result<Self> {
        if !is_prime(&p) {
            return domain(format!("{p} is not prime"));
        }
        Ok(SymbolBackend {
            kind: BackendKind::PadicQuadratic(p),
            zeta: None,
        })
    }

    pub fn tame(p: u64, n: u32) -> Result<Self> {
        if !is_prime(&BigUint::from(p)) {
            return domain(format!("{p} is not prime"));
        }
        if n < 2 || (p - 1) % n as u64 != 0 {
            return Err(Error::UnsupportedBackend(format!(
                "tame symbol needs n >= 2 dividing p - 1, got p = {p}, n = {n}"
            )));
        }
        let g = primitive_root(p);
        let zeta = BigUint::from(g)
            .modpow(&BigUint::from((p - 1) / n as u64), &BigUint::from(p))
            .to_u64()
            .unwrap();
        Ok(SymbolBackend {
            kind: BackendKind::Tame { p, n },
            zeta: Some(zeta),
        })
    }

    pub fn trivial(n: u32) -> Result<Self> {
        if n < 1 {
            return domain("trivial backend needs n >= 1");
        }
        Ok(SymbolBackend {
            kind: BackendKind::Trivial(n),
            zeta: None,
        })
    }

    /// The quadratic symbol at a place of Q.
    pub fn at_place(place: &Place) -> Self {
        match place {
            Place::Infinite => Self::real(),
            Place::Finite(p) => SymbolBackend {
                kind: BackendKind::PadicQuadratic(p.clone()),
                zeta: None,
            },
        }
    }

    pub fn kind(&self) -> &BackendKind {
        &self.kind
    }

    pub fn modulus(&self) -> u32 {
        match &self.kind {
            BackendKind::RealQuadratic | BackendKind::PadicQuadratic(_) => 2,
            BackendKind::Tame { n, .. } => *n,
            BackendKind::Trivial(n) => *n,
        }
    }

    /// The place of Q this backend lives at; `None` for the trivial backend.
    pub fn place(&self) -> Option<Place> {
        match &self.kind {
            BackendKind::RealQuadratic => Some(Place::Infinite),
            BackendKind::PadicQuadratic(p) => Some(Place::Finite(p.clone())),
            BackendKind::Tame { p, .. } => Some(Place::Finite(BigUint::from(*p))),
            BackendKind::Trivial(_) => None,
        }
    }

    /// Human-readable note on how roots of unity are identified with Z/n.
    pub fn normalization(&self) -> String {
        match &self.kind {
            BackendKind::Tame { p, n } => format!(
                "exponent k means ζ^k with ζ = g^((p-1)/n) mod p, g = {} the least primitive root mod {p}, n = {n}",
                primitive_root(*p)
            ),
            _ => "exponent 1 means -1".to_string(),
        }
    }

    pub fn symbol(&self, a: &Rat, b: &Rat) -> Result<MuN> {
        if a.is_zero() || b.is_zero() {
            return domain("symbol of zero");
        }
        match &self.kind {
            BackendKind::Trivial(n) => Ok(MuN::identity(*n)),
            BackendKind::RealQuadratic => Ok(MuN::new(
                (a.is_negative() && b.is_negative()) as i64,
                2,
            )),
            BackendKind::PadicQuadratic(p) => {
                let (alpha, un, ud) = split_unit(a, p)?;
                let (beta, vn, vd) = split_unit(b, p)?;
                let e = if let Some(2) = p.to_u64() {
                    let u8_ = (mod_u64(&un, 8) * mod_u64(&ud, 8) % 8) as u32;
                    let v8 = (mod_u64(&vn, 8) * mod_u64(&vd, 8) % 8) as u32;
                    let eps = |x: u32| ((x - 1) / 2) as i64;
                    let omega = |x: u32| (((x * x - 1) / 8) % 2) as i64;
                    eps(u8_) * eps(v8) + alpha * omega(v8) + beta * omega(u8_)
                } else {
                    let half = ((p - 1u32) / 2u32 % 2u32).to_i64().unwrap();
                    let leg = |m: &BigInt| legendre_exp(m, p);
                    alpha * beta * half
                        + beta * (leg(&un) + leg(&ud))
                        + alpha * (leg(&vn) + leg(&vd))
                };
                Ok(MuN::new(e, 2))
            }
            BackendKind::Tame { p, n } => {
                let (p, n) = (*p, *n);
                let pb = BigUint::from(p);
                let (alpha, un, ud) = split_unit(a, &pb)?;
                let (beta, vn, vd) = split_unit(b, &pb)?;
                // a^β b^{-α} up to sign, with the powers of p cancelling
                let res = |num: &BigInt, den: &BigInt| {
                    let d = mod_u64(den, p);
                    mod_u64(num, p) as u128 * pow_mod_u64(d, p - 2, p) as u128 % p as u128
                };
                let (u, v) = (res(&un, &ud) as u64, res(&vn, &vd) as u64);
                let ex = |x: u64, k: i64| {
                    if k >= 0 {
                        pow_mod_u64(x, k as u64, p)
                    } else {
                        pow_mod_u64(pow_mod_u64(x, p - 2, p), (-k) as u64, p)
                    }
                };
                let mut x = (ex(u, beta) as u128 * ex(v, -alpha) as u128 % p as u128) as u64;
                if (alpha * beta).rem_euclid(2) == 1 {
                    x = p - x;
                }
                let y = pow_mod_u64(x, (p - 1) / n as u64, p);
                let zeta = self.zeta.expect("tame backend carries ζ");
                let mut acc = 1u64;
                for k in 0..n {
                    if acc == y {
                        return Ok(MuN::new(k as i64, n));
                    }
                    acc = (acc as u128 * zeta as u128 % p as u128) as u64;
                }
                Err(Error::UnsupportedBackend(format!(
                    "residue {y} is not an n-th root of unity mod {p}"
                )))
            }
        }
    }

    fn power_params(&self, m: u32) -> Result<Option<PowerClassParams>> {
        if m == 1 {
            return Ok(None);
        }
        match self.place() {
            None => Ok(None),
            Some(place) => Ok(Some(PowerClassParams::new(m, place)?)),
        }
    }
}

// Exponent of the Legendre symbol of an integer prime to p.
fn legendre_exp(m: &BigInt, p: &BigUint) -> i64 {
    if let Some(q) = p.to_u64() {
        return (pow_mod_u64(mod_u64(m, q), (q - 1) / 2, q) != 1) as i64;
    }
    let pi = BigInt::from(p.clone());
    let r = m.mod_floor(&pi).to_biguint().expect("nonnegative");
    (!r.modpow(&((p - 1u32) / 2u32), p).is_one()) as i64
}

impl Pairing for SymbolBackend {
    fn modulus(&self) -> u32 {
        SymbolBackend::modulus(self)
    }

    fn pair(&self, a: &Rat, b: &Rat) -> Result<MuN> {
        self.symbol(a, b)
    }

    fn is_power(&self, x: &Rat, m: u32) -> Result<bool> {
        if x.is_zero() {
            return domain("power test of zero");
        }
        match self.power_params(m)? {
            None => Ok(true),
            Some(params) => is_nth_power(x, &params),
        }
    }

    fn class_rep(&self, x: &Rat) -> Result<Rat> {
        if x.is_zero() {
            return domain("power class of zero");
        }
        match self.power_params(self.modulus())? {
            None => Ok(Rat::one()),
            Some(params) => power_class_rep(x, &params),
        }
    }

    fn transversal(&self) -> Result<Vec<Rat>> {
        match self.power_params(self.modulus())? {
            None => Ok(vec![Rat::one()]),
            Some(params) => power_class_transversal(&params),
        }
    }

    fn describe(&self) -> String {
        self.to_string()
    }
}

pub fn symbol(bk: &SymbolBackend, a: &Rat, b: &Rat) -> Result<MuN> {
    bk.symbol(a, b)
}

impl fmt::Display for SymbolBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            BackendKind::RealQuadratic => write!(f, "real"),
            BackendKind::PadicQuadratic(p) => write!(f, "padic:{p}"),
            BackendKind::Tame { p, n } => write!(f, "tame:{p}:{n}"),
            BackendKind::Trivial(n) => write!(f, "trivial:{n}"),
        }
    }
}

impl FromStr for SymbolBackend {
    type Err = Error;

    /// Accepts `real`, `padic:<p>`, `tame:<p>:<n>` and `trivial:<n>`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |t: &str| {
            t.parse::<u64>()
                .map_err(|_| Error::Parse(format!("bad number {t:?} in backend {s:?}")))
        };
        match parts.as_slice() {
            ["real"] => Ok(Self::real()),
            ["padic", p] => Self::padic(num(p)?),
            ["tame", p, n] => Self::tame(num(p)?, num(n)? as u32),
            ["trivial", n] => Self::trivial(num(n)? as u32),
            _ => Err(Error::Parse(format!(
                "unknown backend {s:?}; expected real, padic:<p>, tame:<p>:<n> or trivial:<n>"
            ))),
        }
    }
}

impl Serialize for SymbolBackend {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

fn push_primes(out: &mut BTreeSet<Place>, m: &BigInt) {
    for p in prime_factors(m.magnitude()) {
        out.insert(Place::Finite(p));
    }
}

/// Places outside of which the quadratic symbol of `a` and `b` is trivial.
pub fn support_places(a: &Rat, b: &Rat) -> BTreeSet<Place> {
    let mut out = BTreeSet::new();
    out.insert(Place::Infinite);
    out.insert(Place::Finite(BigUint::from(2u32)));
    for x in [a, b] {
        push_primes(&mut out, x.numer());
        push_primes(&mut out, x.denom());
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalFactor {
    pub place: Place,
    pub value: MuN,
}

/// The product of quadratic symbols over all places of Q, with its
/// nontrivial local factors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GlobalSymbol {
    pub value: MuN,
    pub local: Vec<LocalFactor>,
}

pub fn global_symbol(a: &Rat, b: &Rat) -> Result<GlobalSymbol> {
    if a.is_zero() || b.is_zero() {
        return domain("symbol of zero");
    }
    let mut value = MuN::identity(2);
    let mut local = Vec::new();
    for place in support_places(a, b) {
        let s = SymbolBackend::at_place(&place).symbol(a, b)?;
        value *= s;
        if !s.is_identity() {
            local.push(LocalFactor { place, value: s });
        }
    }
    Ok(GlobalSymbol { value, local })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{unit_part, valuation};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn modp_k(x: &Rat, m: i64) -> i64 {
        // x a unit at every prime dividing m
        let mb = BigInt::from(m);
        let num = x.numer().mod_floor(&mb).to_i64().unwrap();
        let den = x.denom().mod_floor(&mb).to_i64().unwrap();
        let inv = (1..m).find(|&d| (d * den).rem_euclid(m) == 1).unwrap();
        (num * inv).rem_euclid(m)
    }

    // Conic oracle: z^2 = a x^2 + b y^2 has a primitive solution mod p^k.
    fn conic_solvable(a: &Rat, b: &Rat, p: u64, k: u32) -> bool {
        let pb = BigUint::from(p);
        let m = (p as i64).pow(k);
        let reduce = |x: &Rat| {
            let v = valuation(x, &pb).unwrap().rem_euclid(2);
            let u = modp_k(&unit_part(x, &pb).unwrap(), m);
            (u * (p as i64).pow(v as u32)).rem_euclid(m)
        };
        let (a, b) = (reduce(a), reduce(b));
        let squares: BTreeSet<i64> = (0..m).map(|z| z * z % m).collect();
        let pi = p as i64;
        (0..m).any(|x| {
            (0..m).any(|y| {
                (x % pi != 0 || y % pi != 0) && squares.contains(&((a * x * x + b * y * y) % m))
            })
        })
    }

    fn oracle_k(p: u64) -> u32 {
        match p {
            2 => 6,
            3 => 5,
            _ => 3,
        }
    }

    #[test]
    fn named_examples() {
        let real = SymbolBackend::real();
        assert_eq!(real.symbol(&Rat::int(-1), &Rat::int(-1)).unwrap(), MuN::new(1, 2));
        let five = SymbolBackend::padic(5).unwrap();
        assert_eq!(five.symbol(&Rat::int(2), &Rat::int(5)).unwrap(), MuN::new(1, 2));
        assert!(!conic_solvable(&Rat::int(2), &Rat::int(5), 5, 3));
        assert!(real.symbol(&Rat::zero(), &Rat::one()).is_err());
    }

    #[test]
    fn quadratic_symbols_match_conic_oracle() {
        for p in [2u64, 3, 5, 7] {
            let bk = SymbolBackend::padic(p).unwrap();
            let t = bk.transversal().unwrap();
            for a in &t {
                for b in &t {
                    let s = bk.symbol(a, b).unwrap();
                    let solvable = conic_solvable(a, b, p, oracle_k(p));
                    assert_eq!(s.is_identity(), solvable, "p={p} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn tame_agrees_with_quadratic_for_n_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for p in [3u64, 5, 7, 11, 13] {
            let q = SymbolBackend::padic(p).unwrap();
            let t = SymbolBackend::tame(p, 2).unwrap();
            for _ in 0..200 {
                let a = Rat::new(rng.gen_range(-500i64..500) | 1, rng.gen_range(1i64..300));
                let b = Rat::new(rng.gen_range(-500i64..500) | 1, rng.gen_range(1i64..300));
                assert_eq!(q.symbol(&a, &b).unwrap(), t.symbol(&a, &b).unwrap());
            }
        }
    }

    #[test]
    fn tame_seven_three() {
        let bk = SymbolBackend::tame(7, 3).unwrap();
        assert_eq!(bk.transversal().unwrap().len(), 9);
        // (7, 3): residue of 3^{-1} = 5, and 5^2 = 4 = ζ^2 with ζ = 3^2 = 2
        assert_eq!(bk.symbol(&Rat::int(7), &Rat::int(3)).unwrap(), MuN::new(2, 3));
        assert_eq!(bk.symbol(&Rat::int(3), &Rat::int(7)).unwrap(), MuN::new(1, 3));
        assert!(SymbolBackend::tame(7, 4).is_err());
        assert!(SymbolBackend::tame(9, 2).is_err());
    }

    #[test]
    fn global_product_examples() {
        let g = global_symbol(&Rat::int(-1), &Rat::int(-1)).unwrap();
        assert!(g.value.is_identity());
        assert_eq!(g.local.len(), 2);
        let g = global_symbol(&Rat::int(2), &Rat::int(3)).unwrap();
        assert!(g.value.is_identity());
        let places: Vec<String> = g.local.iter().map(|f| f.place.to_string()).collect();
        assert_eq!(places, vec!["2", "3"]);
    }

    #[test]
    fn support_examples() {
        let show = |a: &str, b: &str| -> Vec<String> {
            support_places(&r(a), &r(b)).iter().map(|p| p.to_string()).collect()
        };
        assert_eq!(show("1", "1"), vec!["inf", "2"]);
        assert_eq!(show("6", "5"), vec!["inf", "2", "3", "5"]);
        assert_eq!(show("-7/3", "10"), vec!["inf", "2", "3", "5", "7"]);
    }

    #[test]
    fn backend_parsing() {
        for s in ["real", "padic:3", "tame:7:3", "trivial:4"] {
            assert_eq!(s.parse::<SymbolBackend>().unwrap().to_string(), s);
        }
        assert!("padic:4".parse::<SymbolBackend>().is_err());
        assert!("complex".parse::<SymbolBackend>().is_err());
    }

    #[test]
    fn mu_n_arithmetic() {
        let z = MuN::new(2, 3);
        assert_eq!(z * z, MuN::new(1, 3));
        assert_eq!(z.inv(), MuN::new(1, 3));
        assert_eq!(z.pow(-1), z.inv());
        assert!((z * z.inv()).is_identity());
    }
}
