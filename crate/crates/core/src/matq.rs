//! Invertible rational matrices, the signed permutations 𝔐 and Bruhat
//! decomposition.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::Rat;
use crate::error::{domain, Error, Result};

/// An invertible square matrix over Q, stored row-major.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MatQ {
    r: usize,
    e: Vec<Rat>,
}

impl MatQ {
    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return domain("empty matrix");
        }
        if rows.iter().any(|row| row.len() != r) {
            return domain("matrix is not square");
        }
        let m = MatQ {
            r,
            e: rows.into_iter().flatten().collect(),
        };
        if m.det().is_zero() {
            return domain("singular matrix");
        }
        Ok(m)
    }

    /// Build from integer rows; convenient in tests and examples.
    pub fn from_ints(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|row| row.iter().map(|&x| Rat::int(x)).collect())
                .collect(),
        )
    }

    pub fn identity(r: usize) -> Self {
        let mut e = vec![Rat::zero(); r * r];
        for i in 0..r {
            e[i * r + i] = Rat::one();
        }
        MatQ { r, e }
    }

    pub fn diag(d: &[Rat]) -> Result<Self> {
        if d.iter().any(Rat::is_zero) {
            return domain("singular diagonal matrix");
        }
        let r = d.len();
        let mut m = Self::identity(r);
        for (i, x) in d.iter().enumerate() {
            m.e[i * r + i] = x.clone();
        }
        Ok(m)
    }

    pub fn scalar(r: usize, a: &Rat) -> Result<Self> {
        Self::diag(&vec![a.clone(); r])
    }

    /// `I + x·E_{ij}` for `i ≠ j`.
    pub fn elementary(r: usize, i: usize, j: usize, x: Rat) -> Self {
        assert!(i != j && i < r && j < r);
        let mut m = Self::identity(r);
        m.e[i * r + j] = x;
        m
    }

    pub fn dim(&self) -> usize {
        self.r
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.e[i * self.r + j]
    }

    fn set(&mut self, i: usize, j: usize, x: Rat) {
        self.e[i * self.r + j] = x;
    }

    pub fn rows(&self) -> Vec<Vec<Rat>> {
        self.e.chunks(self.r).map(|c| c.to_vec()).collect()
    }

    pub fn diagonal(&self) -> Vec<Rat> {
        (0..self.r).map(|i| self.get(i, i).clone()).collect()
    }

    pub fn mul(&self, other: &MatQ) -> MatQ {
        assert_eq!(self.r, other.r, "dimension mismatch");
        let r = self.r;
        let mut e = Vec::with_capacity(r * r);
        for i in 0..r {
            for j in 0..r {
                let mut acc = Rat::zero();
                for k in 0..r {
                    let a = self.get(i, k);
                    let b = other.get(k, j);
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc + a * b;
                    }
                }
                e.push(acc);
            }
        }
        MatQ { r, e }
    }

    pub fn det(&self) -> Rat {
        let r = self.r;
        let mut a = self.e.clone();
        let mut det = Rat::one();
        for c in 0..r {
            let Some(p) = (c..r).find(|&i| !a[i * r + c].is_zero()) else {
                return Rat::zero();
            };
            if p != c {
                for j in 0..r {
                    a.swap(p * r + j, c * r + j);
                }
                det = -det;
            }
            let piv = a[c * r + c].clone();
            det = det * &piv;
            for i in c + 1..r {
                if a[i * r + c].is_zero() {
                    continue;
                }
                let f = &a[i * r + c] / &piv;
                for j in c..r {
                    let v = &a[c * r + j] * &f;
                    a[i * r + j] = &a[i * r + j] - v;
                }
            }
        }
        det
    }

    pub fn inv(&self) -> MatQ {
        let r = self.r;
        let mut a = self.e.clone();
        let mut b = Self::identity(r).e;
        for c in 0..r {
            let p = (c..r)
                .find(|&i| !a[i * r + c].is_zero())
                .expect("MatQ is invertible");
            if p != c {
                for j in 0..r {
                    a.swap(p * r + j, c * r + j);
                    b.swap(p * r + j, c * r + j);
                }
            }
            let piv = a[c * r + c].recip();
            for j in 0..r {
                if !a[c * r + j].is_zero() {
                    a[c * r + j] = &a[c * r + j] * &piv;
                }
                if !b[c * r + j].is_zero() {
                    b[c * r + j] = &b[c * r + j] * &piv;
                }
            }
            for i in 0..r {
                if i == c || a[i * r + c].is_zero() {
                    continue;
                }
                let f = a[i * r + c].clone();
                for j in 0..r {
                    if !a[c * r + j].is_zero() {
                        let va = &a[c * r + j] * &f;
                        a[i * r + j] = &a[i * r + j] - va;
                    }
                    if !b[c * r + j].is_zero() {
                        let vb = &b[c * r + j] * &f;
                        b[i * r + j] = &b[i * r + j] - vb;
                    }
                }
            }
        }
        MatQ { r, e: b }
    }

    pub fn transpose(&self) -> MatQ {
        let r = self.r;
        let e = (0..r * r).map(|k| self.e[(k % r) * r + k / r].clone()).collect();
        MatQ { r, e }
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.r).all(|i| (0..self.r).all(|j| i == j || self.get(i, j).is_zero()))
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.r).all(|i| (0..i).all(|j| self.get(i, j).is_zero()))
    }

    pub fn is_upper_unitriangular(&self) -> bool {
        self.is_upper_triangular() && (0..self.r).all(|i| self.get(i, i).is_one())
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.r)
    }

    /// The square sub-block with rows and columns `start..start + size`.
    pub fn block(&self, start: usize, size: usize) -> Result<MatQ> {
        if start + size > self.r {
            return domain("block out of range");
        }
        let mut e = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                e.push(self.get(start + i, start + j).clone());
            }
        }
        let m = MatQ { r: size, e };
        if m.det().is_zero() {
            return domain("singular block");
        }
        Ok(m)
    }
}

impl fmt::Debug for MatQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.rows().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{row:?}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for MatQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Serialize for MatQ {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for MatQ {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<Rat>>::deserialize(d)?;
        MatQ::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

/// Number of inversions of a permutation in one-line notation.
pub fn perm_length(perm: &[usize]) -> usize {
    let mut l = 0;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                l += 1;
            }
        }
    }
    l
}

fn check_perm(perm: &[usize]) -> Result<()> {
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || seen[p] {
            return Err(Error::Domain(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// A signed permutation matrix of the form `w_{a_1} ⋯ w_{a_l}` for a reduced
/// word, where `w_a` acts as `[[0,-1],[1,0]]` on coordinates `a, a+1`.
///
/// `perm[j] = i` means column `j` has its nonzero entry in row `i`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize)]
pub struct EtaElement {
    perm: Vec<usize>,
    word: Vec<usize>,
    matrix: MatQ,
}

impl EtaElement {
    pub fn identity(r: usize) -> Self {
        EtaElement {
            perm: (0..r).collect(),
            word: Vec::new(),
            matrix: MatQ::identity(r),
        }
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn word(&self) -> &[usize] {
        &self.word
    }

    pub fn matrix(&self) -> &MatQ {
        &self.matrix
    }

    pub fn length(&self) -> usize {
        self.word.len()
    }

    pub fn is_identity(&self) -> bool {
        self.word.is_empty()
    }

    /// Whether the positive root `(i, j)`, `i < j`, is sent to a negative root.
    pub fn inverts(&self, i: usize, j: usize) -> bool {
        self.perm[i] > self.perm[j]
    }
}

/// The generator `w_a` as an r×r matrix.
pub fn simple_reflection(r: usize, a: usize) -> MatQ {
    assert!(a + 1 < r);
    let mut m = MatQ::identity(r);
    m.set(a, a, Rat::zero());
    m.set(a + 1, a + 1, Rat::zero());
    m.set(a, a + 1, Rat::int(-1));
    m.set(a + 1, a, Rat::one());
    m
}

/// Product of generators along `word`, without checking reducedness.
pub fn word_matrix(r: usize, word: &[usize]) -> MatQ {
    word.iter()
        .fold(MatQ::identity(r), |acc, &a| acc.mul(&simple_reflection(r, a)))
}

/// The lexicographically least reduced word of `perm`.
pub fn canonical_word(perm: &[usize]) -> Result<Vec<usize>> {
    check_perm(perm)?;
    let r = perm.len();
    let mut p = perm.to_vec();
    let mut word = Vec::new();
    loop {
        let mut pos = vec![0; r];
        for (j, &v) in p.iter().enumerate() {
            pos[v] = j;
        }
        // smallest left descent: value a+1 occurs before value a
        let Some(a) = (0..r.saturating_sub(1)).find(|&a| pos[a + 1] < pos[a]) else {
            break;
        };
        word.push(a);
        for v in p.iter_mut() {
            if *v == a {
                *v = a + 1;
            } else if *v == a + 1 {
                *v = a;
            }
        }
    }
    Ok(word)
}

pub fn eta_from_perm(perm: &[usize]) -> Result<EtaElement> {
    let word = canonical_word(perm)?;
    let matrix = word_matrix(perm.len(), &word);
    Ok(EtaElement {
        perm: perm.to_vec(),
        word,
        matrix,
    })
}

/// `g = n1 · t · η · n2` with `n1`, `n2` upper unitriangular and `t` diagonal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BruhatForm {
    pub n1: MatQ,
    pub t: MatQ,
    pub eta: EtaElement,
    pub n2: MatQ,
}

impl BruhatForm {
    pub fn reassemble(&self) -> MatQ {
        self.n1
            .mul(&self.t)
            .mul(self.eta.matrix())
            .mul(&self.n2)
    }
}

pub fn bruhat(g: &MatQ) -> Result<BruhatForm> {
    let r = g.dim();
    if g.is_upper_triangular() {
        let t = MatQ::diag(&g.diagonal())?;
        return Ok(BruhatForm {
            n1: g.mul(&t.inv()),
            t,
            eta: EtaElement::identity(r),
            n2: MatQ::identity(r),
        });
    }
    let mut a = g.clone();
    let mut left = MatQ::identity(r);
    let mut right = MatQ::identity(r);
    let mut perm = vec![0; r];
    for j in 0..r {
        let Some(i) = (0..r).rev().find(|&i| !a.get(i, j).is_zero()) else {
            return domain("singular matrix");
        };
        perm[j] = i;
        let piv = a.get(i, j).clone();
        for k in 0..i {
            if a.get(k, j).is_zero() {
                continue;
            }
            let f = a.get(k, j) / &piv;
            for c in 0..r {
                if !a.get(i, c).is_zero() {
                    let v = &f * a.get(i, c);
                    a.set(k, c, a.get(k, c) - v);
                }
                if !left.get(i, c).is_zero() {
                    let v = &f * left.get(i, c);
                    left.set(k, c, left.get(k, c) - v);
                }
            }
        }
        for l in j + 1..r {
            if a.get(i, l).is_zero() {
                continue;
            }
            let f = a.get(i, l) / &piv;
            for row in 0..r {
                if !a.get(row, j).is_zero() {
                    let v = &f * a.get(row, j);
                    a.set(row, l, a.get(row, l) - v);
                }
                if !right.get(row, j).is_zero() {
                    let v = &f * right.get(row, j);
                    right.set(row, l, right.get(row, l) - v);
                }
            }
        }
    }
    let eta = eta_from_perm(&perm)?;
    let t_prime = a.mul(&eta.matrix().transpose());
    let u = left.inv().mul(&t_prime);
    let t = MatQ::diag(&u.diagonal())?;
    let n1 = u.mul(&t.inv());
    let n2 = right.inv();
    Ok(BruhatForm { n1, t, eta, n2 })
}

pub fn torus_part(g: &MatQ) -> Result<MatQ> {
    Ok(bruhat(g)?.t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_mat(rng: &mut ChaCha8Rng, r: usize) -> MatQ {
        loop {
            let rows = (0..r)
                .map(|_| {
                    (0..r)
                        .map(|_| {
                            if rng.gen_bool(0.3) {
                                Rat::zero()
                            } else {
                                Rat::new(rng.gen_range(-20i64..=20), rng.gen_range(1i64..=20))
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

    fn all_perms(r: usize) -> Vec<Vec<usize>> {
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

    #[test]
    fn eta_examples() {
        let id = eta_from_perm(&[0, 1, 2]).unwrap();
        assert!(id.matrix().is_identity());
        assert!(id.word().is_empty());
        let w = eta_from_perm(&[1, 0]).unwrap();
        assert_eq!(w.matrix(), &MatQ::from_ints(&[&[0, -1], &[1, 0]]).unwrap());
        let long = eta_from_perm(&[2, 1, 0]).unwrap();
        assert_eq!(long.word(), &[0, 1, 0]);
        // braid relation by direct multiplication
        assert_eq!(word_matrix(3, &[0, 1, 0]), word_matrix(3, &[1, 0, 1]));
        assert_eq!(long.matrix(), &word_matrix(3, &[1, 0, 1]));
        assert!(eta_from_perm(&[0, 0]).is_err());
    }

    #[test]
    fn eta_support_and_det() {
        for r in 1..=4 {
            for p in all_perms(r) {
                let eta = eta_from_perm(&p).unwrap();
                assert_eq!(eta.length(), perm_length(&p));
                assert!(eta.matrix().det().is_one());
                for j in 0..r {
                    for i in 0..r {
                        assert_eq!(eta.matrix().get(i, j).is_zero(), i != p[j]);
                    }
                }
            }
        }
    }

    #[test]
    fn length_additive_products() {
        for r in 2..=4 {
            let perms = all_perms(r);
            for p in &perms {
                for q in &perms {
                    let pq: Vec<usize> = (0..r).map(|j| p[q[j]]).collect();
                    if perm_length(&pq) != perm_length(p) + perm_length(q) {
                        continue;
                    }
                    let lhs = eta_from_perm(p)
                        .unwrap()
                        .matrix()
                        .mul(eta_from_perm(q).unwrap().matrix());
                    assert_eq!(&lhs, eta_from_perm(&pq).unwrap().matrix());
                }
            }
        }
    }

    #[test]
    fn bruhat_examples() {
        let g = MatQ::from_ints(&[&[2, 3], &[0, 5]]).unwrap();
        let b = bruhat(&g).unwrap();
        assert!(b.eta.is_identity());
        assert_eq!(b.t, MatQ::from_ints(&[&[2, 0], &[0, 5]]).unwrap());

        let swap = MatQ::from_ints(&[&[0, 1], &[1, 0]]).unwrap();
        let b = bruhat(&swap).unwrap();
        assert_eq!(b.eta.matrix(), &MatQ::from_ints(&[&[0, -1], &[1, 0]]).unwrap());
        assert_eq!(b.t, MatQ::from_ints(&[&[-1, 0], &[0, 1]]).unwrap());
        assert_eq!(b.reassemble(), swap);

        let d = MatQ::from_ints(&[&[3, 0, 0], &[0, -1, 0], &[0, 0, 7]]).unwrap();
        assert_eq!(torus_part(&d).unwrap(), d);
        let n = MatQ::from_ints(&[&[1, 4, 2], &[0, 1, -3], &[0, 0, 1]]).unwrap();
        assert!(torus_part(&n).unwrap().is_identity());
        assert!(MatQ::from_ints(&[&[1, 2], &[2, 4]]).is_err());
    }

    #[test]
    fn bruhat_reassembles_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for r in 1..=4 {
            for _ in 0..300 {
                let g = random_mat(&mut rng, r);
                let b = bruhat(&g).unwrap();
                assert!(b.n1.is_upper_unitriangular());
                assert!(b.n2.is_upper_unitriangular());
                assert!(b.t.is_diagonal());
                assert_eq!(b.reassemble(), g);
            }
        }
    }

    #[test]
    fn inverse_and_det() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let g = random_mat(&mut rng, 3);
            let h = random_mat(&mut rng, 3);
            assert!(g.mul(&g.inv()).is_identity());
            assert_eq!(g.mul(&h).det(), g.det() * h.det());
        }
    }

    #[test]
    fn json_round_trip() {
        let g: MatQ = serde_json::from_str(r#"[["1/2", "3"], [0, "-1"]]"#).unwrap();
        assert_eq!(g.det(), Rat::new(-1, 2));
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"[["1/2","3"],["0","-1"]]"#);
        assert!(serde_json::from_str::<MatQ>(r#"[["1","2"],["2","4"]]"#).is_err());
    }
}
