//! Global computations over Q: the product formula for σ_r, divisibility
//! criteria for Levi shapes, and power-class data of block determinants.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use serde::Serialize;

use crate::arith::{Place, Rat};
use crate::cocycle::sigma_formal;
use crate::error::{domain, Error, Result};
use crate::levi::LeviShape;
use crate::matq::MatQ;
use crate::symbols::{support_places, MuN, SymbolBackend};

/// Local data at finitely many places; every other place carries the
/// unramified default.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdelicPointSet<T> {
    entries: BTreeMap<Place, T>,
}

impl<T> AdelicPointSet<T> {
    pub fn new() -> Self {
        AdelicPointSet {
            entries: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, place: Place, value: T) -> Result<()> {
        if self.entries.contains_key(&place) {
            return domain(format!("place {place} given twice"));
        }
        self.entries.insert(place, value);
        Ok(())
    }

    pub fn get(&self, place: &Place) -> Option<&T> {
        self.entries.get(place)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Place, &T)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl<T> Default for AdelicPointSet<T> {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProductFormulaReport {
    /// Product of all local values.
    pub value: MuN,
    /// Every place at which some symbol in the reduction can be nontrivial.
    pub places: Vec<Place>,
    /// Local values `σ_{r,v}(g, g')` at those places.
    pub local: AdelicPointSet<MuN>,
}

impl ProductFormulaReport {
    pub fn nontrivial_places(&self) -> Vec<&Place> {
        self.local
            .iter()
            .filter(|(_, v)| !v.is_identity())
            .map(|(p, _)| p)
            .collect()
    }
}

/// Evaluate the quadratic `σ_r^{(c)}(g, g2)` at every place of Q where it can
/// be nontrivial and multiply.
pub fn product_formula_sigma(g: &MatQ, g2: &MatQ, c: u32) -> Result<ProductFormulaReport> {
    if c >= 2 {
        return domain("the global check uses n = 2, so c must be 0 or 1");
    }
    let mut formal = (*sigma_formal(g, g2)?).clone();
    formal.push(g.det(), g2.det(), c as i64);
    let mut places = BTreeSet::new();
    for (a, b, _) in formal.terms() {
        places.extend(support_places(a, b));
    }
    if places.is_empty() {
        places = support_places(&Rat::one(), &Rat::one());
    }
    let mut value = MuN::identity(2);
    let mut local = AdelicPointSet::new();
    for place in &places {
        let v = formal.eval(&SymbolBackend::at_place(place))?;
        value *= v;
        local.insert(place.clone(), v)?;
    }
    Ok(ProductFormulaReport {
        value,
        places: places.into_iter().collect(),
        local,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Satisfied,
    Unknown,
}

/// The condition `n | n r_i / d` for the listed blocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DivisibilityFamily {
    pub name: String,
    pub d: u64,
    /// 1-based block indices.
    pub blocks: Vec<usize>,
    pub flags: Vec<bool>,
}

impl DivisibilityFamily {
    fn new(name: &str, n: u32, exponent: i64, shape: &LeviShape, blocks: Vec<usize>) -> Self {
        let d = exponent.gcd(&(n as i64)) as u64;
        let n = n as u64;
        let flags = blocks
            .iter()
            .map(|&i| {
                let ri = shape.partition()[i - 1] as u64;
                (n * ri / d) % n == 0
            })
            .collect();
        DivisibilityFamily {
            name: name.to_string(),
            d,
            blocks,
            flags,
        }
    }

    pub fn holds(&self) -> bool {
        self.flags.iter().all(|&f| f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HypothesisReport {
    pub hypothesis: String,
    pub n: u32,
    pub c: u32,
    pub partition: Vec<usize>,
    pub families: Vec<DivisibilityFamily>,
    /// For n = 2 the tail-center chain always gives a valid choice.
    pub n2_guarantee: bool,
    pub verdict: Verdict,
}

impl HypothesisReport {
    fn build(name: &str, shape: &LeviShape, families: Vec<DivisibilityFamily>) -> Self {
        let n2_guarantee = shape.n() == 2;
        let verdict = if n2_guarantee || families.iter().all(DivisibilityFamily::holds) {
            Verdict::Satisfied
        } else {
            Verdict::Unknown
        };
        HypothesisReport {
            hypothesis: name.to_string(),
            n: shape.n(),
            c: shape.c(),
            partition: shape.partition().to_vec(),
            families,
            n2_guarantee,
            verdict,
        }
    }
}

/// `m - 1 + 2cm`.
fn scalar_exponent(m: usize, c: u32) -> i64 {
    m as i64 - 1 + 2 * c as i64 * m as i64
}

fn family_d(shape: &LeviShape) -> DivisibilityFamily {
    DivisibilityFamily::new(
        "d = gcd(n, r-1+2cr)",
        shape.n(),
        scalar_exponent(shape.r(), shape.c()),
        shape,
        (1..=shape.k()).collect(),
    )
}

/// Whether the center of the cover of `GL_r` lies in the cover of `M^{(n)}`,
/// which makes it a valid choice of the abelian subgroup used for
/// metaplectic tensor products.
pub fn hypothesis_star(shape: &LeviShape) -> HypothesisReport {
    HypothesisReport::build("*", shape, vec![family_d(shape)])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RestrictionReport {
    /// Compatible with restriction to the lower-right `GL_{r - r_1}`.
    pub double: HypothesisReport,
    /// Compatible with restriction to the upper-left `GL_{r - r_k}`.
    pub triple: HypothesisReport,
}

pub fn hypothesis_star2(shape: &LeviShape) -> Result<RestrictionReport> {
    let k = shape.k();
    if k < 2 {
        return domain("restriction criteria need at least two blocks");
    }
    let (n, c, r) = (shape.n(), shape.c(), shape.r());
    let part = shape.partition();
    let tail = r - part[0];
    let d2 = DivisibilityFamily::new(
        "d2 = gcd(n, (r-r_1)-1+2c(r-r_1))",
        n,
        scalar_exponent(tail, c),
        shape,
        (2..=k).collect(),
    );
    let head = r - part[k - 1];
    let dk = DivisibilityFamily::new(
        "d_{k-1} = gcd(n, (r-r_k)-1+2c(r-r_k))",
        n,
        scalar_exponent(head, c),
        shape,
        (1..k).collect(),
    );
    Ok(RestrictionReport {
        double: HypothesisReport::build("**", shape, vec![family_d(shape), d2]),
        triple: HypothesisReport::build("***", shape, vec![family_d(shape), dk]),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ChainLink {
    /// `r_i + ⋯ + r_k`.
    pub tail_rank: usize,
    /// Scalars `a` central in the cover of `GL_{tail_rank}` are exactly
    /// `a ∈ F^{×ε}`.
    pub epsilon: u32,
}

/// The tail centers whose product forms the abelian subgroup used when n = 2.
pub fn a_chain_n2(shape: &LeviShape) -> Result<Vec<ChainLink>> {
    if shape.n() != 2 {
        return domain("the tail-center chain is defined for n = 2");
    }
    let part = shape.partition();
    Ok((0..part.len())
        .map(|i| {
            let tail_rank: usize = part[i..].iter().sum();
            ChainLink {
                tail_rank,
                epsilon: if tail_rank % 2 == 1 { 1 } else { 2 },
            }
        })
        .collect())
}

/// Whether `diag(a_1 I_{r_1}, …, a_k I_{r_k})` lies in the product of the
/// tail centers.
pub fn in_a_chain(a: &[Rat], shape: &LeviShape) -> Result<bool> {
    let chain = a_chain_n2(shape)?;
    if a.len() != chain.len() {
        return domain(format!("expected {} scalars, got {}", chain.len(), a.len()));
    }
    if a.iter().any(Rat::is_zero) {
        return domain("scalars must be nonzero");
    }
    let bk = &shape.params().backend;
    for (i, link) in chain.iter().enumerate() {
        let step = if i == 0 { a[0].clone() } else { &a[i] / &a[i - 1] };
        if !bk.is_power(&step, link.epsilon)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Classes of the block determinants modulo n-th powers.
pub fn det_m(m: &[MatQ], shape: &LeviShape) -> Result<Vec<Rat>> {
    if m.len() != shape.k() {
        return Err(Error::ParamMismatch(format!(
            "expected {} blocks, got {}",
            shape.k(),
            m.len()
        )));
    }
    m.iter()
        .map(|g| shape.params().backend.class_rep(&g.det()))
        .collect()
}

/// Order of `{±1} / {±1}^m`, the finite quotient attached to Q.
pub fn quotient_order_q(m: u64) -> Result<u64> {
    if m == 0 {
        return domain("m must be positive");
    }
    Ok(if m % 2 == 0 { 2 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(part: &[usize], n: u32, c: u32) -> LeviShape {
        let bk = if n == 2 {
            SymbolBackend::padic(3).unwrap()
        } else {
            SymbolBackend::trivial(n).unwrap()
        };
        LeviShape::new(part.to_vec(), c, bk).unwrap()
    }

    #[test]
    fn product_formula_examples() {
        let i = MatQ::identity(2);
        assert!(product_formula_sigma(&i, &i, 0).unwrap().value.is_identity());
        let w = MatQ::from_ints(&[&[0, -1], &[1, 0]]).unwrap();
        let rep = product_formula_sigma(&w, &w, 0).unwrap();
        assert!(rep.value.is_identity());
        let bad: Vec<String> = rep.nontrivial_places().iter().map(|p| p.to_string()).collect();
        assert_eq!(bad, vec!["inf", "2"]);
        let g = MatQ::from_ints(&[&[3, 1, 0], &[0, 5, 2], &[7, 0, -1]]).unwrap();
        let g2 = MatQ::from_ints(&[&[0, 0, 2], &[11, 1, 0], &[1, 3, 0]]).unwrap();
        for c in 0..2 {
            assert!(product_formula_sigma(&g, &g2, c).unwrap().value.is_identity());
        }
    }

    #[test]
    fn star_examples() {
        let h = hypothesis_star(&shape(&[1, 1], 2, 0));
        assert_eq!(h.families[0].d, 1);
        assert_eq!(h.verdict, Verdict::Satisfied);
        let h = hypothesis_star(&shape(&[1, 2], 3, 0));
        assert_eq!(h.families[0].d, 1);
        assert_eq!(h.verdict, Verdict::Satisfied);
        let h = hypothesis_star(&shape(&[1, 4], 4, 0));
        assert_eq!(h.families[0].d, 4);
        assert_eq!(h.families[0].flags, vec![false, true]);
        assert_eq!(h.verdict, Verdict::Unknown);
    }

    #[test]
    fn star2_examples() {
        let h = hypothesis_star2(&shape(&[1, 2], 3, 0)).unwrap();
        assert_eq!(h.double.families[1].d, 1);
        assert_eq!(h.double.verdict, Verdict::Satisfied);
        for part in [vec![1, 1], vec![2, 1], vec![1, 2, 3]] {
            let h = hypothesis_star2(&shape(&part, 2, 1)).unwrap();
            assert_eq!(h.double.verdict, Verdict::Satisfied);
            assert_eq!(h.triple.verdict, Verdict::Satisfied);
        }
        assert!(hypothesis_star2(&shape(&[3], 3, 0)).is_err());
    }

    #[test]
    fn chain_examples() {
        let eps = |p: &[usize]| -> Vec<u32> {
            a_chain_n2(&shape(p, 2, 0)).unwrap().iter().map(|l| l.epsilon).collect()
        };
        assert_eq!(eps(&[1, 1]), vec![2, 1]);
        assert_eq!(eps(&[2, 2]), vec![2, 2]);
        assert!(a_chain_n2(&shape(&[1, 1], 3, 0)).is_err());
        let s = shape(&[1, 1], 2, 0);
        assert!(in_a_chain(&[Rat::int(4), Rat::int(9)], &s).unwrap());
        assert!(!in_a_chain(&[Rat::int(3), Rat::int(3)], &s).unwrap());
        assert!(in_a_chain(&[Rat::int(4), Rat::int(12)], &s).unwrap());
    }

    #[test]
    fn det_m_examples() {
        let s = LeviShape::new(vec![1, 1], 0, SymbolBackend::padic(5).unwrap()).unwrap();
        let m = [MatQ::from_ints(&[&[5]]).unwrap(), MatQ::from_ints(&[&[2]]).unwrap()];
        assert_eq!(det_m(&m, &s).unwrap(), vec![Rat::int(5), Rat::int(2)]);
        let sq = [MatQ::from_ints(&[&[4]]).unwrap(), MatQ::from_ints(&[&[25]]).unwrap()];
        assert_eq!(det_m(&sq, &s).unwrap(), vec![Rat::one(), Rat::one()]);
    }

    #[test]
    fn quotient_orders() {
        assert_eq!(quotient_order_q(1).unwrap(), 1);
        assert_eq!(quotient_order_q(2).unwrap(), 2);
        assert_eq!(quotient_order_q(3).unwrap(), 1);
        assert!(quotient_order_q(0).is_err());
    }
}
