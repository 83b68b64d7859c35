//! Seeded property suites with a deterministic JSON-ready report.
//!
//! Every suite draws its cases from its own ChaCha stream, derived from the
//! base seed and the suite name, so reports do not depend on scheduling.
//! After a failure the suite resamples with tiny entry bounds and keeps the
//! counterexample of least height.

use std::sync::Arc;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::adelic::product_formula_sigma;
use crate::cocycle::{kubota_gl2, sigma};
use crate::cover::{in_center_glr, in_center_m};
use crate::error::{Error, Result};
use crate::levi::{block_embed, iota, levi_cocycle, phi_w};
use crate::matq::{eta_from_perm, simple_reflection};
use crate::symbols::global_symbol;
use crate::{
    BlockPerm, CocycleParams, CoverElement, LeviShape, MatQ, MuN, Pairing, Rat, SharedPairing,
    SymbolBackend,
};

pub const SCHEMA: u32 = 1;
pub const DEFAULT_SAMPLES: usize = 1000;
const BOUND: i64 = 20;
const SHRINK_TRIES: usize = 150;

/// A deliberately broken symbol, used to confirm that the suites catch bugs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// `(a, b)` is forced to 1 whenever `a > b`.
    Antisymmetry,
}

impl Fault {
    pub fn name(self) -> &'static str {
        match self {
            Fault::Antisymmetry => "antisymmetry",
        }
    }
}

impl std::str::FromStr for Fault {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "antisymmetry" => Ok(Fault::Antisymmetry),
            _ => Err(Error::Parse(format!("unknown fault '{s}'"))),
        }
    }
}

struct FaultyPairing {
    inner: SymbolBackend,
}

impl Pairing for FaultyPairing {
    fn modulus(&self) -> u32 {
        self.inner.modulus()
    }

    fn pair(&self, a: &Rat, b: &Rat) -> Result<MuN> {
        if a > b {
            Ok(MuN::identity(self.modulus()))
        } else {
            self.inner.symbol(a, b)
        }
    }

    fn is_power(&self, x: &Rat, m: u32) -> Result<bool> {
        self.inner.is_power(x, m)
    }

    fn class_rep(&self, x: &Rat) -> Result<Rat> {
        self.inner.class_rep(x)
    }

    fn transversal(&self) -> Result<Vec<Rat>> {
        self.inner.transversal()
    }

    fn describe(&self) -> String {
        format!("{} (faulty)", self.inner)
    }
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub seed: u64,
    pub samples: usize,
    pub suites: Vec<String>,
    pub backends: Vec<SymbolBackend>,
    pub fault: Option<Fault>,
}

impl VerifyConfig {
    pub fn new(seed: u64) -> Self {
        VerifyConfig {
            seed,
            samples: DEFAULT_SAMPLES,
            suites: suite_names().iter().map(|s| s.to_string()).collect(),
            backends: default_backends(),
            fault: None,
        }
    }
}

pub fn default_backends() -> Vec<SymbolBackend> {
    ["real", "padic:2", "padic:3", "padic:5", "tame:7:3"]
        .iter()
        .map(|s| s.parse().expect("built-in backend"))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backend: Option<String>,
    pub c: u32,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub partition: Vec<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub perm: Vec<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub matrices: Vec<MatQ>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub scalars: Vec<Rat>,
    /// Largest |numerator| or denominator among the inputs.
    pub height: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub statement: String,
    pub samples: usize,
    pub failures: usize,
    pub passed: bool,
    pub counterexample: Option<Counterexample>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub seed: u64,
    pub samples: usize,
    pub backends: Vec<String>,
    pub fault: Option<String>,
    pub suites: Vec<SuiteReport>,
    pub passed: bool,
}

// ---------------------------------------------------------------------------
// cases

#[derive(Clone, Debug, Default)]
struct Case {
    backend: Option<usize>,
    c: u32,
    partition: Vec<usize>,
    perm: Vec<usize>,
    mats: Vec<MatQ>,
    scalars: Vec<Rat>,
}

impl Case {
    fn height(&self) -> BigUint {
        let mut h = BigUint::from(1u32);
        for x in &self.scalars {
            h = h.max(x.height());
        }
        for m in &self.mats {
            for x in m.rows().iter().flatten() {
                h = h.max(x.height());
            }
        }
        h
    }

    fn r(&self) -> usize {
        self.partition.iter().sum()
    }
}

struct Ctx {
    backends: Vec<SharedPairing>,
}

impl Ctx {
    fn pairing(&self, case: &Case) -> Result<&SharedPairing> {
        let i = case.backend.ok_or_else(|| Error::Domain("case has no backend".into()))?;
        Ok(&self.backends[i])
    }

    fn params(&self, case: &Case) -> Result<CocycleParams> {
        CocycleParams::with_pairing(case.r(), case.c, self.pairing(case)?.clone())
    }

    fn shape(&self, case: &Case) -> Result<LeviShape> {
        LeviShape::with_pairing(case.partition.clone(), case.c, self.pairing(case)?.clone())
    }

    fn pick(&self, rng: &mut ChaCha8Rng, case: &mut Case) {
        let i = rng.gen_range(0..self.backends.len());
        case.backend = Some(i);
        case.c = rng.gen_range(0..self.backends[i].modulus());
    }
}

fn rat(rng: &mut ChaCha8Rng, bound: i64) -> Rat {
    Rat::new(rng.gen_range(-bound..=bound), rng.gen_range(1..=bound))
}

fn nonzero_rat(rng: &mut ChaCha8Rng, bound: i64) -> Rat {
    loop {
        let x = rat(rng, bound);
        if !x.is_zero() {
            return x;
        }
    }
}

fn mat(rng: &mut ChaCha8Rng, r: usize, bound: i64) -> MatQ {
    loop {
        let rows = (0..r)
            .map(|_| {
                (0..r)
                    .map(|_| if rng.gen_bool(0.35) { Rat::zero() } else { rat(rng, bound) })
                    .collect()
            })
            .collect();
        if let Ok(m) = MatQ::from_rows(rows) {
            return m;
        }
    }
}

fn torus(rng: &mut ChaCha8Rng, r: usize, bound: i64) -> Vec<Rat> {
    (0..r).map(|_| nonzero_rat(rng, bound)).collect()
}

fn diag(d: &[Rat]) -> Result<MatQ> {
    MatQ::diag(d)
}

fn unipotent(rng: &mut ChaCha8Rng, r: usize, bound: i64) -> MatQ {
    let mut m = MatQ::identity(r);
    for i in 0..r {
        for j in i + 1..r {
            m = m.mul(&MatQ::elementary(r, i, j, rat(rng, bound)));
        }
    }
    m
}

fn radical(rng: &mut ChaCha8Rng, part: &[usize], bound: i64) -> MatQ {
    let r: usize = part.iter().sum();
    let block_of: Vec<usize> = part
        .iter()
        .enumerate()
        .flat_map(|(i, &ri)| std::iter::repeat(i).take(ri))
        .collect();
    let mut m = MatQ::identity(r);
    for i in 0..r {
        for j in i + 1..r {
            if block_of[i] < block_of[j] {
                m = m.mul(&MatQ::elementary(r, i, j, rat(rng, bound)));
            }
        }
    }
    m
}

fn blocks(rng: &mut ChaCha8Rng, part: &[usize], bound: i64) -> Vec<MatQ> {
    part.iter().map(|&ri| mat(rng, ri, bound)).collect()
}

fn perm(rng: &mut ChaCha8Rng, k: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..k).collect();
    p.shuffle(rng);
    p
}

fn rank(rng: &mut ChaCha8Rng) -> usize {
    rng.gen_range(2..=3)
}

fn choose<T: Clone>(rng: &mut ChaCha8Rng, items: &[T]) -> T {
    items[rng.gen_range(0..items.len())].clone()
}

/// A uniformly chosen class representative times a random n-th power.
fn class_sample(rng: &mut ChaCha8Rng, p: &dyn Pairing, bound: i64) -> Result<Rat> {
    let reps = p.transversal()?;
    let y = nonzero_rat(rng, bound.min(6));
    Ok(choose(rng, &reps) * y.pow(p.modulus() as i64))
}

const LEVI_SHAPES: [&[usize]; 5] = [&[1, 1], &[2, 1], &[1, 2], &[2, 2], &[1, 1, 1]];

fn lift(g: &MatQ, p: &CocycleParams) -> Result<CoverElement> {
    CoverElement::lift(g.clone(), p)
}

fn product(xs: &[Rat]) -> Rat {
    xs.iter().fold(Rat::one(), |a, x| a * x)
}

// ---------------------------------------------------------------------------
// suites

type Generate = fn(&mut ChaCha8Rng, i64, &Ctx) -> Case;
type Check = fn(&Case, &Ctx) -> Result<bool>;

struct Suite {
    name: &'static str,
    statement: &'static str,
    generate: Generate,
    check: Check,
}

const SUITES: [Suite; 15] = [
    Suite {
        name: "block-compat",
        statement: "On a standard Levi subgroup, σ_r(diag(g_i), diag(g'_i)) equals the block cocycle: ∏ σ_{r_i}(g_i, g'_i) times the Hilbert-symbol cross terms between block determinants.",
        generate: gen_block_compat,
        check: check_block_compat,
    },
    Suite {
        name: "center-closed-form",
        statement: "The closed-form center tests for the covers of GL_r and of a Levi subgroup agree with brute-force commutation against a generating set.",
        generate: gen_center_closed_form,
        check: check_center_closed_form,
    },
    Suite {
        name: "center-commutator",
        statement: "σ(g, aI)σ(aI, g)^{-1} = (det g, a^{r-1+2cr}) for g in GL_r and a scalar a.",
        generate: gen_center_commutator,
        check: check_center_commutator,
    },
    Suite {
        name: "cocycle-identity",
        statement: "σ(g, g')σ(gg', g'') = σ(g, g'g'')σ(g', g'') on GL_2 and GL_3.",
        generate: gen_cocycle_identity,
        check: check_cocycle_identity,
    },
    Suite {
        name: "hilbert-product",
        statement: "The product over all places of Q of the quadratic Hilbert symbols (x, y)_v is 1.",
        generate: gen_hilbert_product,
        check: check_hilbert_product,
    },
    Suite {
        name: "kubota-differential",
        statement: "Kubota's cocycle on GL_2 coincides with σ_2, including the c-twist.",
        generate: gen_kubota,
        check: check_kubota,
    },
    Suite {
        name: "normalizer",
        statement: "For m in a Levi subgroup M and u in the unipotent radical of the parabolic P = MN, (m,1)(u,1)(m,1)^{-1} = (mum^{-1}, 1).",
        generate: gen_normalizer,
        check: check_normalizer,
    },
    Suite {
        name: "product-formula",
        statement: "For rational g, g' the product over all places of the local quadratic cocycles σ_{r,v}(g, g') is 1.",
        generate: gen_product_formula,
        check: check_product_formula,
    },
    Suite {
        name: "symbol-axioms",
        statement: "The local symbol is bimultiplicative, (a,b)^{-1} = (b,a), (a^n,b) = (a,b^n) = 1, (a,-a) = 1 and (a,1-a) = 1.",
        generate: gen_symbol_axioms,
        check: check_symbol_axioms,
    },
    Suite {
        name: "torus-torus",
        statement: "σ(t, t') = ∏_{i<j} (t_i, t'_j) · (det t, det t')^c for diagonal t, t'.",
        generate: gen_torus_torus,
        check: check_torus_torus,
    },
    Suite {
        name: "torus-weyl",
        statement: "σ(t, η) = 1 for diagonal t and η a signed permutation matrix of determinant 1.",
        generate: gen_torus_weyl,
        check: check_torus_weyl,
    },
    Suite {
        name: "unipotent-invariance",
        statement: "σ(ng, g'n') = σ(g, g') for upper unitriangular n, n'.",
        generate: gen_unipotent_invariance,
        check: check_unipotent_invariance,
    },
    Suite {
        name: "unipotent-transfer",
        statement: "σ(gn, g') = σ(g, ng') for upper unitriangular n.",
        generate: gen_unipotent_transfer,
        check: check_unipotent_transfer,
    },
    Suite {
        name: "weyl-torus",
        statement: "σ(η, t) = ∏ (-t_j, t_i) over the pairs i < j inverted by the permutation of η.",
        generate: gen_weyl_torus,
        check: check_weyl_torus,
    },
    Suite {
        name: "weyl-twist",
        statement: "For a block permutation w and m in M^(n), σ(w, mw^{-1})σ(m, w^{-1})σ(w, w^{-1})^{-1} = 1, and (w,1) conjugates (m,1) to (wmw^{-1}, 1).",
        generate: gen_weyl_twist,
        check: check_weyl_twist,
    },
];

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|s| s.name).collect()
}

pub fn suite_statement(name: &str) -> Option<&'static str> {
    SUITES.iter().find(|s| s.name == name).map(|s| s.statement)
}

fn gen_symbol_axioms(rng: &mut ChaCha8Rng, bound: i64, ctx: &Ctx) -> Case {
    let mut case = Case::default();
    ctx.pick(rng, &mut case);
    case.c = 0;
    case.scalars = torus(rng, 3, bound * bound);
    case
}

fn check_symbol_axioms(case: &Case, ctx: &Ctx) -> Result<bool> {
    let b = ctx.pairing(case)?;
    let n = b.modulus() as i64;
    let [x, y, z] = [&case.scalars[0], &case.scalars[1], &case.scalars[2]];
    let s = |u: &Rat, v: &Rat| b.pair(u, v);
    let mut ok = s(&(x * z), y)? == s(x, y)? * s(z, y)?
        && s(x, &(y * z))? == s(x, y)? * s(x, z)?
        && s(x, y)? == s(y, x)?.inv()
        && s(&x.pow(n), y)?.is_identity()
        && s(x, &y.pow(n))?.is_identity()
        && s(x, &-x)?.is_identity();
    if !x.is_one() {
        ok = ok && s(x, &(Rat::one() - x))?.is_identity();
    }
    Ok(ok)
}

fn gen_hilbert_product(rng: &mut ChaCha8Rng, bound: i64, _: &Ctx) -> Case {
    Case {
        scalars: torus(rng, 2, bound.pow(3)),
        ..Case::default()
    }
}

fn check_hilbert_product(case: &Case, _: &Ctx) -> Result<bool> {
    Ok(global_symbol(&case.scalars[0], &case.scalars[1])?.value.is_identity())
}

fn gen_matrices(rng: &mut ChaCha8Rng, bound: i64, ctx: &Ctx, r: usize, count: usize) -> Case {
    let mut case = Case::default();
    ctx.pick(rng, &mut case);
    case.partition = vec![r];
    case.mats = (0..count).map(|_| mat(rng, r, bound)).collect();
    case
}

fn gen_cocycle_identity(rng: &mut ChaCha8Rng, bound: i64, ctx: &Ctx) -> Case {
    let r = rank(rng);
    gen_matrices(rng, bound, ctx, r, 3)
}

fn check_cocycle_identity(case: &Case, ctx: &Ctx) -> Result<bool> {
    let p = ctx.params(case)?;
    let [g, h, k] = [&case.mats[0], &case.mats[1], &case.mats[2]];
    Ok(sigma(g, h, &p)? * sigma(&g.mul(h), k, &p)? == sigma(g, &h.mul(k), &p)? * sigma(h, k, &p)?)
}

fn gen_unipotent_invariance(rng: &mut ChaCha8Rng, bound: i64, ctx: &Ctx) -> Case {
    let r = rank(rng);
    let mut case = gen_matrices(rng, bound, ctx, r, 2);
    case.mats.push(unipotent(rng, r, bound));
    case.mats.push(unipotent(rng, r, bound));
    case
}

fn check_unipotent_invariance(case: &Case, ctx: &Ctx) -> Result<bool> {
    let p = ctx.params(case)?;
    let [g, h, u, u2] = [&case.mats[0], &case.mats[1], &case.mats[2], &case.mats[3]];
    Ok(sigma(&u.mul(g), &h.mul(u2), &p)? == sigma(g, h, &p)?
        && sigma(&u.mul(g), u2, &p)?.is_identity()
        && sigma(u, &h.mul(u2), &p)?.is_identity())
}

fn gen_unipotent_transfer(rng: &mut ChaCha8Rng, bound: i64, ctx: &Ctx) -> Case {
    let r = rank(rng);
    let mut case = gen_matrices(rng, bound, ctx, r, 2);
    case.mats.push(unipotent(rng, r, bound));
    case
}

fn check_unipotent_transfer(case: &Case, ctx: &Ctx) -> Result<bool> {
    let p = ctx.params(case)?;
    let [g, h, u] = [&case.mats[0], &case.mats[1], &case.mats[2]];
    Ok(sigma(&g.mul(u), h, &p)? == sigma(g, &u.mul(h), &p)?)
}

fn gen_torus_perm(rng: &mut ChaCha8Rng, bound: i64, ctx: &Ctx) -> Case {
    let mut case = Case::default();
    ctx.pick(rng, &mut case);
    let r = rng.gen_range(1..=3);
    case.partition = vec![r];
    case.perm = perm(rng, r);
    case.scalars = torus(rng, r, bound);
    case
}

fn gen_weyl_torus(rng: &mut ChaCha8Rng, bound: i64, ctx: &Ctx) -> Case {
    gen_torus_perm(rng, bound, ctx)
}

fn check_weyl_torus(case: &Case, ctx: &Ctx) -> Result<bool> {
    let p = ctx.params(case)?;
    let t = &case.scalars;
    let eta = eta_from_perm(&case.perm)?;
    let mut expected = p.identity();
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            if case.perm[i] > case.perm[j] {
                expected *= p.backend.pair(&-&t[j], &t[i])?;
            }
        }
    }
    Ok(sigma(eta.matrix(), &diag(t)?, &p)? == expected)
}

fn gen_torus_weyl(rng: &mut ChaCha8Rng, bound: i64, ctx: &Ctx) -> Case {
    gen_torus_perm(rng, bound, ctx)
}

fn check_torus_weyl(case: &Case, ctx: &Ctx) -> Result<bool> {
    let p = ctx.params(case)?;
    let eta = eta_from_perm(&case.perm)?;
    Ok(sigma(&diag(&case.scalars)?, eta.matrix(), &p)?.is_identity())
}

fn gen_torus_torus(rng: &mut ChaCha8Rng, bound: i64, ctx: &Ctx) -> Case {
    let mut case = Case::default();
    ctx.pick(rng, &mut case);
    let r = rng.gen_range(1..=3);
    case.partition = vec![r];
    case.scalars = torus(rng, 2 * r, bound);
    case
}

fn check_torus_torus(case: &Case, ctx: &Ctx) -> Result<bool> {
    let p = ctx.params(case)?;
    let (t, t2) = case.scalars.split_at(case.r());
    let mut expected = p.identity();
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            expected *= p.backend.pair(&t[i], &t2[j])?;
        }
    }
    expected *= p.backend.pair(&product(t), &product(t2))?.pow(p.c as i64);
    Ok(sigma(&diag(t)?, &diag(t2)?, &p)? == expected)
}

fn gen_block_compat(rng: &mut ChaCha8Rng, bound: i64, ctx: &Ctx) -> Case {
    let mut case = Case::default();
    ctx.pick(rng, &mut case);
    case.partition = choose(rng, &LEVI_SHAPES).to_vec();
    case.mats = blocks(rng, &case.partition, bound);
    case.mats.extend(blocks(rng, &case.partition, bound));
    case
}

fn check_block_compat(case: &Case, ctx: &Ctx) -> Result<bool> {
    let sh = ctx.shape(case)?;
    let (m, m2) = case.mats.split_at(sh.k());
    Ok(sigma(&block_embed(m, &sh)?, &block_embed(m2, &sh)?, sh.params())? == levi_cocycle(m, m2, &sh)?)
}

fn gen_center_commutator(rng: &mut ChaCha8Rng, bound: i64, ctx: &Ctx) -> Case {
    let r = rank(rng);
    let mut case = gen_matrices(rng, bound, ctx, r, 1);
    case.scalars = vec![nonzero_rat(rng, 2 * bound)];
    case
}

fn check_center_commutator(case: &Case, ctx: &Ctx) -> Result<bool> {
    let p = ctx.params(case)?;
    let r = p.r;
    let (g, a) = (&case.mats[0], &case.scalars[0]);
    let ai = MatQ::scalar(r, a)?;
    let e = r as i64 - 1 + 2 * p.c as i64 * r as i64;
    Ok(sigma(g, &ai, &p)? * sigma(&ai, g, &p)?.inv() == p.backend.pair(&g.det(), &a.pow(e))?)
}

fn gen_center_closed_form(rng: &mut ChaCha8Rng, bound: i64, ctx: &Ctx) -> Case {
    let mut case = Case::default();
    ctx.pick(rng, &mut case);
    let shapes: [&[usize]; 6] = [&[1], &[2], &[3], &[1, 1], &[2, 1], &[1, 2]];
    case.partition = choose(rng, &shapes).to_vec();
    let b = ctx.pairing(&case).expect("picked").clone();
    case.scalars = (0..case.partition.len())
        .map(|_| class_sample(rng, b.as_ref(), bound).expect("backend transversal"))
        .collect();
    case
}

fn embed_at(r: usize, offset: usize, g: &MatQ) -> MatQ {
    let mut rows = MatQ::identity(r).rows();
    for i in 0..g.dim() {
        for j in 0..g.dim() {
            rows[offset + i][offset + j] = g.get(i, j).clone();
        }
    }
    MatQ::from_rows(rows).expect("block embedding of an invertible matrix")
}

/// Generators of `GL_r` modulo n-th powers on the diagonal.
fn gl_generators(r: usize, reps: &[Rat]) -> Result<Vec<MatQ>> {
    let mut gens = Vec::new();
    for pos in 0..r {
        for b in reps.iter().filter(|b| !b.is_one()) {
            let mut d = vec![Rat::one(); r];
            d[pos] = b.clone();
            gens.push(diag(&d)?);
        }
    }
    for i in 0..r {
        for j in 0..r {
            if i != j {
                gens.push(MatQ::elementary(r, i, j, Rat::one()));
                for b in reps {
                    gens.push(MatQ::elementary(r, i, j, b.clone()));
                }
            }
        }
    }
    for a in 0..r.saturating_sub(1) {
        gens.push(simple_reflection(r, a));
    }
    Ok(gens)
}

fn check_center_closed_form(case: &Case, ctx: &Ctx) -> Result<bool> {
    let sh = ctx.shape(case)?;
    let p = sh.params();
    let reps = p.backend.transversal()?;
    let r = sh.r();
    let mut gens = Vec::new();
    for (&ri, &off) in sh.partition().iter().zip(&sh.offsets()) {
        gens.extend(gl_generators(ri, &reps)?.iter().map(|g| embed_at(r, off, g)));
    }
    let z: Vec<MatQ> = case
        .scalars
        .iter()
        .zip(sh.partition())
        .map(|(a, &ri)| MatQ::scalar(ri, a))
        .collect::<Result<_>>()?;
    let zt = lift(&block_embed(&z, &sh)?, p)?;
    let mut brute = true;
    for g in &gens {
        if !zt.commutes_with(&lift(g, p)?)? {
            brute = false;
            break;
        }
    }
    let closed = if sh.k() == 1 {
        in_center_glr(&case.scalars[0], p)?
    } else {
        in_center_m(&case.scalars, &sh)?
    };
    Ok(closed == brute)
}

fn gen_kubota(rng: &mut ChaCha8Rng, bound: i64, ctx: &Ctx) -> Case {
    gen_matrices(rng, bound, ctx, 2, 2)
}

fn check_kubota(case: &Case, ctx: &Ctx) -> Result<bool> {
    let p = ctx.params(case)?;
    Ok(kubota_gl2(&case.mats[0], &case.mats[1], &p)? == sigma(&case.mats[0], &case.mats[1], &p)?)
}

fn gen_normalizer(rng: &mut ChaCha8Rng, bound: i64, ctx: &Ctx) -> Case {
    let mut case = Case::default();
    ctx.pick(rng, &mut case);
    case.partition = choose(rng, &LEVI_SHAPES).to_vec();
    case.mats = blocks(rng, &case.partition, bound);
    case.mats.push(radical(rng, &case.partition, bound));
    case
}

fn check_normalizer(case: &Case, ctx: &Ctx) -> Result<bool> {
    let sh = ctx.shape(case)?;
    let p = sh.params();
    let (m, u) = case.mats.split_at(sh.k());
    let m = block_embed(m, &sh)?;
    let u = &u[0];
    Ok(lift(&m, p)?.conj(&lift(u, p)?)? == lift(&m.mul(u).mul(&m.inv()), p)?)
}

fn gen_product_formula(rng: &mut ChaCha8Rng, bound: i64, _: &Ctx) -> Case {
    let r = rank(rng);
    Case {
        c: rng.gen_range(0..2),
        partition: vec![r],
        mats: vec![mat(rng, r, bound), mat(rng, r, bound)],
        ..Case::default()
    }
}

fn check_product_formula(case: &Case, _: &Ctx) -> Result<bool> {
    Ok(product_formula_sigma(&case.mats[0], &case.mats[1], case.c)?.value.is_identity())
}

fn gen_weyl_twist(rng: &mut ChaCha8Rng, bound: i64, ctx: &Ctx) -> Case {
    let mut case = Case::default();
    ctx.pick(rng, &mut case);
    let shapes: [&[usize]; 3] = [&[1, 1], &[2, 2], &[1, 1, 1]];
    case.partition = choose(rng, &shapes).to_vec();
    case.perm = perm(rng, case.partition.len());
    let n = ctx.pairing(&case).expect("picked").modulus() as i64;
    case.mats = blocks(rng, &case.partition, bound)
        .into_iter()
        .map(|g| g.mul(&iota(g.dim(), &g.det().pow(n - 1)).expect("nonzero determinant")))
        .collect();
    case
}

fn check_weyl_twist(case: &Case, ctx: &Ctx) -> Result<bool> {
    let sh = ctx.shape(case)?;
    let p = sh.params();
    let bp = BlockPerm::new(case.perm.clone(), &sh)?;
    let w = bp.matrix();
    let m = block_embed(&case.mats, &sh)?;
    Ok(phi_w(&case.mats, &bp)?.is_identity()
        && lift(&w, p)?.conj(&lift(&m, p)?)? == lift(&w.mul(&m).mul(&w.inv()), p)?)
}

// ---------------------------------------------------------------------------
// driver

fn suite_seed(seed: u64, name: &str) -> u64 {
    // FNV-1a over the name, mixed into the base seed
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    seed ^ h
}

enum Verdict {
    Pass,
    Fail(Option<String>),
}

fn judge(suite: &Suite, case: &Case, ctx: &Ctx) -> Verdict {
    match (suite.check)(case, ctx) {
        Ok(true) => Verdict::Pass,
        Ok(false) => Verdict::Fail(None),
        Err(e) => Verdict::Fail(Some(e.to_string())),
    }
}

fn counterexample(case: &Case, error: Option<String>, ctx: &Ctx) -> Counterexample {
    Counterexample {
        backend: case.backend.map(|i| ctx.backends[i].describe()),
        c: case.c,
        partition: case.partition.clone(),
        perm: case.perm.clone(),
        matrices: case.mats.clone(),
        scalars: case.scalars.clone(),
        height: case.height().to_string(),
        error,
    }
}

fn run_suite(suite: &Suite, seed: u64, samples: usize, ctx: &Ctx) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(suite_seed(seed, suite.name));
    let mut failures = 0;
    let mut worst: Option<(Case, Option<String>)> = None;
    for _ in 0..samples {
        let case = (suite.generate)(&mut rng, BOUND, ctx);
        if let Verdict::Fail(err) = judge(suite, &case, ctx) {
            failures += 1;
            worst.get_or_insert((case, err));
        }
    }
    if let Some((case, err)) = worst.as_mut() {
        let mut shrink = ChaCha8Rng::seed_from_u64(suite_seed(!seed, suite.name));
        for bound in 1..=3 {
            for _ in 0..SHRINK_TRIES {
                let small = (suite.generate)(&mut shrink, bound, ctx);
                if let Verdict::Fail(e) = judge(suite, &small, ctx) {
                    if small.height() < case.height() {
                        *case = small;
                        *err = e;
                    }
                }
            }
        }
    }
    SuiteReport {
        name: suite.name.to_string(),
        statement: suite.statement.to_string(),
        samples,
        failures,
        passed: failures == 0,
        counterexample: worst.map(|(case, err)| counterexample(&case, err, ctx)),
    }
}

/// Run the selected suites in parallel; the report lists them sorted by name.
pub fn run(config: &VerifyConfig) -> Result<Report> {
    if config.samples == 0 {
        return Err(Error::Domain("sample count must be at least 1".into()));
    }
    if config.backends.is_empty() {
        return Err(Error::Domain("at least one backend is required".into()));
    }
    let mut selected = Vec::new();
    for name in &config.suites {
        let suite = SUITES
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::Domain(format!("unknown suite '{name}'")))?;
        if !selected.iter().any(|s: &&Suite| s.name == suite.name) {
            selected.push(suite);
        }
    }
    selected.sort_by_key(|s| s.name);
    let backends: Vec<SharedPairing> = config
        .backends
        .iter()
        .map(|b| -> SharedPairing {
            match config.fault {
                Some(Fault::Antisymmetry) => Arc::new(FaultyPairing { inner: b.clone() }),
                None => Arc::new(b.clone()),
            }
        })
        .collect();
    let ctx = Ctx { backends };
    let suites: Vec<SuiteReport> = std::thread::scope(|s| {
        let handles: Vec<_> = selected
            .iter()
            .map(|suite| {
                let ctx = &ctx;
                s.spawn(move || run_suite(suite, config.seed, config.samples, ctx))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("suite thread panicked")).collect()
    });
    Ok(Report {
        schema: SCHEMA,
        seed: config.seed,
        samples: config.samples,
        backends: ctx.backends.iter().map(|b| b.describe()).collect(),
        fault: config.fault.map(|f| f.name().to_string()),
        passed: suites.iter().all(|s| s.passed),
        suites,
    })
}
