//! The 2-cocycle σ_r on GL_r with values in μ_n and its c-twist.
//!
//! Values are first produced as formal products of symbol pairs, which do not
//! depend on the backend, and then evaluated with a [`Pairing`]. The formal
//! product of a pair of matrices is computed by the rewriting rules below and
//! memoised.
//!
//! | rule | rewrite |
//! |------|---------|
//! | R0 | split `σ(h, yz)` into `σ(h, y)·σ(hy, z)·σ(y, z)^{-1}` |
//! | R1 | `σ(n g, g' n') = σ(g, g')` for upper unitriangular `n, n'` |
//! | R2 | `σ(g n, g') = σ(g, n g')` |
//! | R3 | `σ(η, t) = ∏ (−t_j, t_i)` over positive roots `(i, j)` inverted by `η` |
//! | R4 | `σ(t, t') = ∏_{i<j} (t_i, t'_j)` |
//! | R5 | `σ(t, η) = 1` |
//! | R6 | `σ(tη, t'η') = σ(t, η t' η^{-1})·σ(η, t')` when lengths of `η, η'` add |
//! | R7 | rank-one values from [`kubota_gl2`] on a 2×2 diagonal block |

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use serde::Serialize;

use crate::arith::Rat;
use crate::error::{domain, Error, Result};
use crate::matq::{bruhat, simple_reflection, word_matrix, EtaElement, MatQ};
use crate::symbols::{MuN, Pairing, SharedPairing, SymbolBackend};

/// A formal product `∏ (a, b)^e` of symbol pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolProduct {
    terms: BTreeMap<(Rat, Rat), i64>,
}

impl SymbolProduct {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn pair(a: Rat, b: Rat) -> Self {
        let mut p = Self::new();
        p.push(a, b, 1);
        p
    }

    pub fn push(&mut self, a: Rat, b: Rat, e: i64) {
        if e == 0 || a.is_one() || b.is_one() {
            return;
        }
        let key = (a, b);
        let v = self.terms.get(&key).copied().unwrap_or(0) + e;
        if v == 0 {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, v);
        }
    }

    pub fn extend(&mut self, other: &SymbolProduct) {
        for ((a, b), e) in &other.terms {
            self.push(a.clone(), b.clone(), *e);
        }
    }

    pub fn inverse(&self) -> SymbolProduct {
        SymbolProduct {
            terms: self.terms.iter().map(|(k, e)| (k.clone(), -e)).collect(),
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Rat, &Rat, i64)> {
        self.terms.iter().map(|((a, b), e)| (a, b, *e))
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, pairing: &dyn Pairing) -> Result<MuN> {
        let mut acc = MuN::identity(pairing.modulus());
        for ((a, b), e) in &self.terms {
            acc *= pairing.pair(a, b)?.pow(*e);
        }
        Ok(acc)
    }
}

impl fmt::Display for SymbolProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "1");
        }
        for (i, ((a, b), e)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, "·")?;
            }
            write!(f, "({a}, {b})")?;
            if *e != 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// Rank, twist and symbol backend of a cover.
#[derive(Clone)]
pub struct CocycleParams {
    pub r: usize,
    pub n: u32,
    pub c: u32,
    pub backend: SharedPairing,
}

impl CocycleParams {
    pub fn new(r: usize, c: u32, backend: SymbolBackend) -> Result<Self> {
        Self::with_pairing(r, c, Arc::new(backend))
    }

    pub fn with_pairing(r: usize, c: u32, backend: SharedPairing) -> Result<Self> {
        let n = backend.modulus();
        if r == 0 {
            return domain("rank must be positive");
        }
        if c >= n {
            return domain(format!("twist c = {c} must lie in 0..{n}"));
        }
        Ok(CocycleParams { r, n, c, backend })
    }

    /// Same backend and twist, different rank.
    pub fn with_rank(&self, r: usize) -> Self {
        CocycleParams {
            r,
            ..self.clone()
        }
    }

    pub fn same_as(&self, other: &CocycleParams) -> bool {
        self.r == other.r
            && self.n == other.n
            && self.c == other.c
            && (Arc::ptr_eq(&self.backend, &other.backend)
                || self.backend.describe() == other.backend.describe())
    }

    pub fn identity(&self) -> MuN {
        MuN::identity(self.n)
    }

    fn check(&self, g: &MatQ) -> Result<()> {
        if g.dim() != self.r {
            return Err(Error::ParamMismatch(format!(
                "matrix of size {} used with rank {}",
                g.dim(),
                self.r
            )));
        }
        Ok(())
    }

    /// `(det g, det g')^c`.
    fn det_twist(&self, g: &MatQ, g2: &MatQ) -> Result<MuN> {
        if self.c == 0 {
            return Ok(self.identity());
        }
        Ok(self.backend.pair(&g.det(), &g2.det())?.pow(self.c as i64))
    }
}

impl fmt::Debug for CocycleParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CocycleParams {{ r: {}, n: {}, c: {}, backend: {} }}",
            self.r,
            self.n,
            self.c,
            self.backend.describe()
        )
    }
}

impl fmt::Display for CocycleParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r={} n={} c={} {}", self.r, self.n, self.c, self.backend.describe())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub rule: &'static str,
    pub detail: String,
}

type Trace<'a> = Option<&'a mut Vec<TraceStep>>;

fn note(trace: &mut Trace<'_>, rule: &'static str, detail: impl FnOnce() -> String) {
    if let Some(t) = trace.as_deref_mut() {
        t.push(TraceStep {
            rule,
            detail: detail(),
        });
    }
}

fn require_diagonal(t: &MatQ) -> Result<Vec<Rat>> {
    if !t.is_diagonal() {
        return domain("expected a diagonal matrix");
    }
    Ok(t.diagonal())
}

fn formal_tt(t: &[Rat], t2: &[Rat]) -> SymbolProduct {
    let mut p = SymbolProduct::new();
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            p.push(t[i].clone(), t2[j].clone(), 1);
        }
    }
    p
}

fn formal_eta_t(perm: &[usize], t: &[Rat]) -> SymbolProduct {
    let mut p = SymbolProduct::new();
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                p.push(-&t[j], t[i].clone(), 1);
            }
        }
    }
    p
}

/// Diagonal entries of `η t η^{-1}`.
fn conj_diag(perm: &[usize], t: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::one(); t.len()];
    for (j, x) in t.iter().enumerate() {
        out[perm[j]] = x.clone();
    }
    out
}

/// `x(h)`: lower-left entry if nonzero, else lower-right.
fn kubota_x(h: &MatQ) -> Rat {
    let c = h.get(1, 0);
    if c.is_zero() {
        h.get(1, 1).clone()
    } else {
        c.clone()
    }
}

fn kubota_formal(g: &MatQ, g2: &MatQ) -> SymbolProduct {
    let x = kubota_x(&g.mul(g2));
    let a = &x / kubota_x(g);
    let b = &x / (kubota_x(g2) * g.det());
    SymbolProduct::pair(a, b)
}

pub fn sigma_tt(t: &MatQ, t2: &MatQ, params: &CocycleParams) -> Result<MuN> {
    params.check(t)?;
    params.check(t2)?;
    let (d, d2) = (require_diagonal(t)?, require_diagonal(t2)?);
    Ok(formal_tt(&d, &d2).eval(params.backend.as_ref())? * params.det_twist(t, t2)?)
}

pub fn sigma_eta_t(eta: &EtaElement, t: &MatQ, params: &CocycleParams) -> Result<MuN> {
    params.check(eta.matrix())?;
    params.check(t)?;
    formal_eta_t(eta.perm(), &require_diagonal(t)?).eval(params.backend.as_ref())
}

/// `σ(h, t')` for diagonal `t'`.
fn against_torus(h: &MatQ, t2: &[Rat], trace: &mut Trace<'_>) -> Result<SymbolProduct> {
    let b = bruhat(h)?;
    let t = b.t.diagonal();
    let perm = b.eta.perm();
    note(trace, "R1", || {
        format!("strip unipotents of {h}: torus part {:?}, Weyl part {:?}", t, perm)
    });
    note(trace, "R6", || "split σ(tη, t') = σ(t, ηt'η⁻¹)·σ(η, t')".into());
    let mut p = formal_tt(&t, &conj_diag(perm, t2));
    note(trace, "R4", || format!("σ(t, ηt'η⁻¹) = {p}"));
    let q = formal_eta_t(perm, t2);
    note(trace, "R3", || format!("σ(η, t') = {q}"));
    p.extend(&q);
    Ok(p)
}

/// `σ(k, w_a)`.
fn against_simple(k: &MatQ, a: usize, trace: &mut Trace<'_>) -> Result<SymbolProduct> {
    let r = k.dim();
    let b = bruhat(k)?;
    if !b.eta.inverts(a, a + 1) {
        note(trace, "R6", || {
            format!("σ(·, w_{}) = 1: Weyl part of {k} does not invert root {}", a + 1, a + 1)
        });
        return Ok(SymbolProduct::new());
    }
    let t = b.t.diagonal();
    let perm0: Vec<usize> = (0..r)
        .map(|j| {
            let sj = if j == a {
                a + 1
            } else if j == a + 1 {
                a
            } else {
                j
            };
            b.eta.perm()[sj]
        })
        .collect();
    let u = b.n2.get(a, a + 1).clone();
    let w = simple_reflection(2, 0);
    let mut h = vec![Rat::one(); r];
    let base = if u.is_zero() {
        h[a] = Rat::int(-1);
        h[a + 1] = Rat::int(-1);
        note(trace, "R0", || {
            format!("σ(tη₀w_{0}, w_{0}) = σ(tη₀, w_{0}²)·σ(w_{0}, w_{0})", a + 1)
        });
        kubota_formal(&w, &w)
    } else {
        h[a] = u.recip();
        h[a + 1] = u.clone();
        note(trace, "R0", || {
            format!(
                "σ(tη₀w_{0}x({u}), w_{0}) = σ(tη₀, h w_{0})·σ(w_{0}x({u}), w_{0})",
                a + 1
            )
        });
        let wx = MatQ::from_rows(vec![
            vec![Rat::zero(), Rat::int(-1)],
            vec![Rat::one(), u.clone()],
        ])?;
        kubota_formal(&wx, &w)
    };
    note(trace, "R7", || format!("rank-one block value {base}"));
    let mut p = formal_tt(&t, &conj_diag(&perm0, &h));
    note(trace, "R4", || format!("σ(t, η₀hη₀⁻¹) = {p}"));
    let q = formal_eta_t(&perm0, &h);
    note(trace, "R3", || format!("σ(η₀, h) = {q}"));
    p.extend(&q);
    p.extend(&base);
    Ok(p)
}

fn formal_sigma(g: &MatQ, g2: &MatQ, mut trace: Trace<'_>) -> Result<SymbolProduct> {
    let r = g.dim();
    let b2 = bruhat(g2)?;
    let t2 = b2.t.diagonal();
    note(&mut trace, "R1", || {
        format!("strip unipotents of {g2}: torus part {:?}, Weyl word {:?}", t2, b2.eta.word())
    });
    let h = g.mul(&b2.n1);
    note(&mut trace, "R2", || format!("move left unipotent across: first argument {h}"));
    let word = b2.eta.word();
    let mut out = against_torus(&h, &t2, &mut trace)?;
    let ht = h.mul(&b2.t);
    for m in 0..word.len() {
        let a = word[m];
        note(&mut trace, "R0", || {
            format!("peel w_{} (letter {} of {})", a + 1, m + 1, word.len())
        });
        note(&mut trace, "R5", || "σ(t'η'', w_a) = σ(η'', w_a) = 1".into());
        let k = ht.mul(&word_matrix(r, &word[..m]));
        out.extend(&against_simple(&k, a, &mut trace)?);
    }
    Ok(out)
}

type Cache = RwLock<HashMap<(MatQ, MatQ), Arc<SymbolProduct>>>;

const CACHE_LIMIT: usize = 1 << 15;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// The untwisted value `σ_r(g, g2)` as a backend-independent formal product.
pub fn sigma_formal(g: &MatQ, g2: &MatQ) -> Result<Arc<SymbolProduct>> {
    if g.dim() != g2.dim() {
        return Err(Error::ParamMismatch("matrix sizes differ".into()));
    }
    let key = (g.clone(), g2.clone());
    if let Some(v) = cache().read().unwrap().get(&key) {
        return Ok(v.clone());
    }
    let v = Arc::new(formal_sigma(g, g2, None)?);
    let mut w = cache().write().unwrap();
    if w.len() >= CACHE_LIMIT {
        w.clear();
    }
    w.insert(key, v.clone());
    Ok(v)
}

/// `σ_r^{(c)}(g, g2)`.
pub fn sigma(g: &MatQ, g2: &MatQ, params: &CocycleParams) -> Result<MuN> {
    params.check(g)?;
    params.check(g2)?;
    Ok(sigma_formal(g, g2)?.eval(params.backend.as_ref())? * params.det_twist(g, g2)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct TracedValue {
    pub value: MuN,
    pub formal: String,
    pub trace: Vec<TraceStep>,
}

/// [`sigma`] together with the sequence of rewriting steps used.
pub fn sigma_traced(g: &MatQ, g2: &MatQ, params: &CocycleParams) -> Result<TracedValue> {
    params.check(g)?;
    params.check(g2)?;
    let mut trace = Vec::new();
    let formal = formal_sigma(g, g2, Some(&mut trace))?;
    let mut value = formal.eval(params.backend.as_ref())?;
    if params.c != 0 {
        let (d, d2) = (g.det(), g2.det());
        trace.push(TraceStep {
            rule: "twist",
            detail: format!("multiply by ({d}, {d2})^{}", params.c),
        });
        value *= params.det_twist(g, g2)?;
    }
    Ok(TracedValue {
        value,
        formal: formal.to_string(),
        trace,
    })
}

/// Kubota's cocycle on GL_2, with the same c-twist.
pub fn kubota_gl2(g: &MatQ, g2: &MatQ, params: &CocycleParams) -> Result<MuN> {
    if g.dim() != 2 || g2.dim() != 2 || params.r != 2 {
        return Err(Error::ParamMismatch("kubota_gl2 needs 2×2 matrices and r = 2".into()));
    }
    Ok(kubota_formal(g, g2).eval(params.backend.as_ref())? * params.det_twist(g, g2)?)
}

pub type CocycleFn = Arc<dyn Fn(&MatQ, &MatQ) -> Result<MuN> + Send + Sync>;

/// The cocycle `(g, g') ↦ σ(g, g')` for fixed parameters.
pub fn sigma_fn(params: &CocycleParams) -> CocycleFn {
    let params = params.clone();
    Arc::new(move |g, g2| sigma(g, g2, &params))
}

/// A map `GL_r → μ_n`.
#[derive(Clone)]
pub struct Cochain1 {
    f: Arc<dyn Fn(&MatQ) -> MuN + Send + Sync>,
}

impl Cochain1 {
    pub fn trivial(n: u32) -> Self {
        Cochain1 {
            f: Arc::new(move |_| MuN::identity(n)),
        }
    }

    pub fn from_fn(f: impl Fn(&MatQ) -> MuN + Send + Sync + 'static) -> Self {
        Cochain1 { f: Arc::new(f) }
    }

    pub fn eval(&self, g: &MatQ) -> MuN {
        (self.f)(g)
    }

    pub fn inverse(&self) -> Self {
        let f = self.f.clone();
        Cochain1 {
            f: Arc::new(move |g| f(g).inv()),
        }
    }
}

/// `(g, g') ↦ base(g, g')·s(g)·s(g')·s(gg')^{-1}`.
pub fn coboundary_twist(base: CocycleFn, s: Cochain1) -> CocycleFn {
    Arc::new(move |g, g2| {
        Ok(base(g, g2)? * s.eval(g) * s.eval(g2) * s.eval(&g.mul(g2)).inv())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matq::eta_from_perm;

    fn params(r: usize, c: u32, bk: &str) -> CocycleParams {
        CocycleParams::new(r, c, bk.parse().unwrap()).unwrap()
    }

    fn d(x: &[i64]) -> MatQ {
        MatQ::diag(&x.iter().map(|&v| Rat::int(v)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn torus_torus_examples() {
        let p = params(2, 0, "padic:5");
        assert!(sigma_tt(&d(&[1, 1]), &d(&[2, 5]), &p).unwrap().is_identity());
        assert_eq!(
            sigma_tt(&d(&[2, 1]), &d(&[1, 5]), &p).unwrap(),
            p.backend.pair(&Rat::int(2), &Rat::int(5)).unwrap()
        );
        let p = params(2, 1, "padic:3");
        assert_eq!(sigma_tt(&d(&[3, 1]), &d(&[3, 1]), &p).unwrap(), MuN::new(1, 2));
    }

    #[test]
    fn eta_torus_examples() {
        let p = params(2, 0, "padic:3");
        let id = eta_from_perm(&[0, 1]).unwrap();
        assert!(sigma_eta_t(&id, &d(&[3, 7]), &p).unwrap().is_identity());
        let w = eta_from_perm(&[1, 0]).unwrap();
        assert_eq!(sigma_eta_t(&w, &d(&[3, 1]), &p).unwrap(), MuN::new(1, 2));
        assert_eq!(
            sigma_eta_t(&w, &d(&[5, 7]), &p).unwrap(),
            p.backend.pair(&Rat::int(-7), &Rat::int(5)).unwrap()
        );
    }

    #[test]
    fn torus_then_eta_is_trivial() {
        for bk in ["real", "padic:2", "padic:3", "tame:7:3"] {
            let p = params(3, 1, bk);
            let eta = eta_from_perm(&[2, 0, 1]).unwrap();
            let t = d(&[-3, 14, 5]);
            assert!(sigma(&t, eta.matrix(), &p).unwrap().is_identity());
        }
    }

    #[test]
    fn kubota_on_weyl_element() {
        let w = simple_reflection(2, 0);
        for bk in ["real", "padic:2", "padic:3"] {
            let p = params(2, 0, bk);
            let expect = p.backend.pair(&Rat::int(-1), &Rat::int(-1)).unwrap();
            assert_eq!(kubota_gl2(&w, &w, &p).unwrap(), expect);
            assert_eq!(sigma(&w, &w, &p).unwrap(), expect);
        }
    }

    #[test]
    fn cocycle_identity_small_sample() {
        let mats = [
            MatQ::from_ints(&[&[0, 1], &[1, 0]]).unwrap(),
            MatQ::from_ints(&[&[2, 3], &[5, -7]]).unwrap(),
            MatQ::from_ints(&[&[-1, 0], &[3, 6]]).unwrap(),
            MatQ::from_ints(&[&[0, -5], &[2, 3]]).unwrap(),
        ];
        for bk in ["real", "padic:2", "padic:3", "padic:5", "padic:7"] {
            for c in 0..2 {
                let p = params(2, c, bk);
                for x in &mats {
                    for y in &mats {
                        for z in &mats {
                            let lhs = sigma(x, y, &p).unwrap() * sigma(&x.mul(y), z, &p).unwrap();
                            let rhs = sigma(x, &y.mul(z), &p).unwrap() * sigma(y, z, &p).unwrap();
                            assert_eq!(lhs, rhs, "{bk} c={c} {x} {y} {z}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn trace_records_rules() {
        let p = params(3, 0, "padic:3");
        let g = MatQ::from_ints(&[&[1, 2, 0], &[0, 3, 1], &[4, 0, 1]]).unwrap();
        let g2 = MatQ::from_ints(&[&[0, 0, 1], &[0, 2, 0], &[-1, 0, 5]]).unwrap();
        let tv = sigma_traced(&g, &g2, &p).unwrap();
        assert_eq!(tv.value, sigma(&g, &g2, &p).unwrap());
        let rules: Vec<&str> = tv.trace.iter().map(|s| s.rule).collect();
        for r in ["R0", "R1", "R2", "R3", "R4", "R6"] {
            assert!(rules.contains(&r), "missing {r} in {rules:?}");
        }
    }

    #[test]
    fn coboundary_examples() {
        let p = params(2, 0, "padic:3");
        let base = sigma_fn(&p);
        let s = Cochain1::from_fn(|g: &MatQ| {
            MuN::new(g.get(0, 0).numer().bits() as i64 + g.get(1, 0).is_zero() as i64, 2)
        });
        let mats = [
            MatQ::from_ints(&[&[0, 1], &[1, 0]]).unwrap(),
            MatQ::from_ints(&[&[2, 3], &[5, -7]]).unwrap(),
            MatQ::from_ints(&[&[3, 0], &[1, 6]]).unwrap(),
        ];
        let unchanged = coboundary_twist(base.clone(), Cochain1::trivial(2));
        let twisted = coboundary_twist(base.clone(), s.clone());
        let back = coboundary_twist(twisted.clone(), s.inverse());
        for x in &mats {
            for y in &mats {
                assert_eq!(unchanged(x, y).unwrap(), base(x, y).unwrap());
                assert_eq!(back(x, y).unwrap(), base(x, y).unwrap());
                for z in &mats {
                    let lhs = twisted(x, y).unwrap() * twisted(&x.mul(y), z).unwrap();
                    let rhs = twisted(x, &y.mul(z)).unwrap() * twisted(y, z).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn rank_mismatch_is_reported() {
        let p = params(3, 0, "real");
        let g = MatQ::identity(2);
        assert!(matches!(sigma(&g, &g, &p), Err(Error::ParamMismatch(_))));
        assert!(CocycleParams::new(2, 2, SymbolBackend::real()).is_err());
    }
}
