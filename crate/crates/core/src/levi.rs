//! Block-diagonal Levi subgroups `GL_{r_1} × ⋯ × GL_{r_k}` of `GL_r`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::arith::Rat;
use crate::cocycle::{sigma, CocycleParams};
use crate::error::{domain, Error, Result};
use crate::matq::{eta_from_perm, EtaElement, MatQ};
use crate::symbols::{MuN, SharedPairing, SymbolBackend};

#[derive(Clone)]
pub struct LeviShape {
    partition: Vec<usize>,
    params: CocycleParams,
}

impl LeviShape {
    pub fn new(partition: Vec<usize>, c: u32, backend: SymbolBackend) -> Result<Self> {
        Self::with_pairing(partition, c, Arc::new(backend))
    }

    pub fn with_pairing(partition: Vec<usize>, c: u32, backend: SharedPairing) -> Result<Self> {
        if partition.is_empty() || partition.contains(&0) {
            return domain(format!("bad partition {partition:?}"));
        }
        let r = partition.iter().sum();
        Ok(LeviShape {
            params: CocycleParams::with_pairing(r, c, backend)?,
            partition,
        })
    }

    pub fn from_params(partition: Vec<usize>, params: &CocycleParams) -> Result<Self> {
        Self::with_pairing(partition, params.c, params.backend.clone())
    }

    pub fn partition(&self) -> &[usize] {
        &self.partition
    }

    pub fn k(&self) -> usize {
        self.partition.len()
    }

    pub fn r(&self) -> usize {
        self.params.r
    }

    pub fn n(&self) -> u32 {
        self.params.n
    }

    pub fn c(&self) -> u32 {
        self.params.c
    }

    pub fn params(&self) -> &CocycleParams {
        &self.params
    }

    /// Index of the first row of each block.
    pub fn offsets(&self) -> Vec<usize> {
        self.partition
            .iter()
            .scan(0, |acc, &ri| {
                let o = *acc;
                *acc += ri;
                Some(o)
            })
            .collect()
    }

    fn check_blocks(&self, blocks: &[MatQ]) -> Result<()> {
        if blocks.len() != self.k() {
            return domain(format!("expected {} blocks, got {}", self.k(), blocks.len()));
        }
        for (i, (b, &ri)) in blocks.iter().zip(&self.partition).enumerate() {
            if b.dim() != ri {
                return domain(format!("block {i} has size {}, expected {ri}", b.dim()));
            }
        }
        Ok(())
    }

    /// Split a block-diagonal matrix into its blocks.
    pub fn split(&self, m: &MatQ) -> Result<Vec<MatQ>> {
        if m.dim() != self.r() {
            return domain("matrix size does not match shape");
        }
        let blocks = self
            .offsets()
            .iter()
            .zip(&self.partition)
            .map(|(&o, &ri)| m.block(o, ri))
            .collect::<Result<Vec<_>>>()?;
        if block_embed(&blocks, self)? != *m {
            return domain("matrix is not block diagonal");
        }
        Ok(blocks)
    }
}

impl fmt::Debug for LeviShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LeviShape {{ partition: {:?}, {:?} }}", self.partition, self.params)
    }
}

impl fmt::Display for LeviShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let part: Vec<String> = self.partition.iter().map(|x| x.to_string()).collect();
        write!(f, "({}) {}", part.join(","), self.params)
    }
}

pub fn block_embed(blocks: &[MatQ], shape: &LeviShape) -> Result<MatQ> {
    shape.check_blocks(blocks)?;
    let r = shape.r();
    let mut rows = vec![vec![Rat::zero(); r]; r];
    for (b, o) in blocks.iter().zip(shape.offsets()) {
        for i in 0..b.dim() {
            for j in 0..b.dim() {
                rows[o + i][o + j] = b.get(i, j).clone();
            }
        }
    }
    MatQ::from_rows(rows)
}

/// `ι_i(a)`: the `r_i × r_i` matrix `diag(a, 1, …, 1)`.
pub fn iota(ri: usize, a: &Rat) -> Result<MatQ> {
    let mut d = vec![Rat::one(); ri];
    d[0] = a.clone();
    MatQ::diag(&d)
}

/// The cocycle on the Levi subgroup assembled from per-block cocycles and
/// determinant symbols.
pub fn levi_cocycle(m: &[MatQ], m2: &[MatQ], shape: &LeviShape) -> Result<MuN> {
    shape.check_blocks(m)?;
    shape.check_blocks(m2)?;
    let p = shape.params();
    let bk = p.backend.as_ref();
    let mut acc = p.identity();
    for ((g, g2), &ri) in m.iter().zip(m2).zip(shape.partition()) {
        acc *= sigma(g, g2, &p.with_rank(ri))?;
    }
    let dets: Vec<Rat> = m.iter().map(MatQ::det).collect();
    let dets2: Vec<Rat> = m2.iter().map(MatQ::det).collect();
    for i in 0..shape.k() {
        for j in 0..shape.k() {
            if i == j {
                continue;
            }
            let s = bk.pair(&dets[i], &dets2[j])?;
            let e = (i < j) as i64 + p.c as i64;
            acc *= s.pow(e);
        }
    }
    Ok(acc)
}

/// Whether every block determinant is an n-th power.
pub fn in_mn(m: &[MatQ], shape: &LeviShape) -> Result<bool> {
    shape.check_blocks(m)?;
    for g in m {
        if !shape.params().backend.is_nth_power(&g.det())? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CosetDecomposition {
    /// Blocks `ι_i(det(g_i)^{1-n})`.
    pub rep: Vec<MatQ>,
    /// Blocks `g_i ι_i(det(g_i)^{n-1})`, all of n-th power determinant.
    pub mn: Vec<MatQ>,
}

/// Write `m = mn · rep` blockwise with `mn ∈ M^{(n)}`.
pub fn coset_decompose(m: &[MatQ], shape: &LeviShape) -> Result<CosetDecomposition> {
    shape.check_blocks(m)?;
    let n = shape.n() as i64;
    let mut rep = Vec::new();
    let mut mn = Vec::new();
    for (g, &ri) in m.iter().zip(shape.partition()) {
        let d = g.det();
        rep.push(iota(ri, &d.pow(1 - n))?);
        mn.push(g.mul(&iota(ri, &d.pow(n - 1))?));
    }
    Ok(CosetDecomposition { rep, mn })
}

/// A permutation of the blocks of a Levi subgroup with equal sizes swapped.
#[derive(Clone, Debug)]
pub struct BlockPerm {
    sigma: Vec<usize>,
    shape: LeviShape,
}

impl BlockPerm {
    /// `sigma[i]` is the block placed in position `i`; requires
    /// `r_{sigma(i)} = r_i`.
    pub fn new(sigma: Vec<usize>, shape: &LeviShape) -> Result<Self> {
        let k = shape.k();
        let mut seen = vec![false; k];
        if sigma.len() != k || sigma.iter().any(|&s| s >= k || std::mem::replace(&mut seen[s], true)) {
            return domain(format!("{sigma:?} is not a permutation of {k} blocks"));
        }
        for (i, &s) in sigma.iter().enumerate() {
            if shape.partition()[s] != shape.partition()[i] {
                return domain(format!(
                    "block permutation {sigma:?} moves blocks of different sizes"
                ));
            }
        }
        Ok(BlockPerm {
            sigma,
            shape: shape.clone(),
        })
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn shape(&self) -> &LeviShape {
        &self.shape
    }

    /// The block permutation matrix `w`, with `w m w^{-1} = diag(g_{σ(1)}, …)`.
    pub fn matrix(&self) -> MatQ {
        let r = self.shape.r();
        let offs = self.shape.offsets();
        let mut rows = vec![vec![Rat::zero(); r]; r];
        for (i, &s) in self.sigma.iter().enumerate() {
            for l in 0..self.shape.partition()[i] {
                rows[offs[i] + l][offs[s] + l] = Rat::one();
            }
        }
        MatQ::from_rows(rows).expect("permutation matrices are invertible")
    }

    /// Apply the permutation to a tuple of blocks.
    pub fn permute_blocks(&self, m: &[MatQ]) -> Vec<MatQ> {
        self.sigma.iter().map(|&s| m[s].clone()).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WeylBlockElement {
    pub w: MatQ,
    pub eta_w: EtaElement,
    pub t_w: MatQ,
}

/// `w = t_w · η_w` with `η_w ∈ 𝔐` and `t_w` diagonal with entries ±1.
pub fn weyl_block_element(bp: &BlockPerm) -> Result<WeylBlockElement> {
    let w = bp.matrix();
    let r = w.dim();
    let perm: Vec<usize> = (0..r)
        .map(|j| (0..r).find(|&i| !w.get(i, j).is_zero()).unwrap())
        .collect();
    let eta_w = eta_from_perm(&perm)?;
    let t_w = w.mul(&eta_w.matrix().inv());
    if !t_w.is_diagonal() {
        return Err(Error::Domain("torus part of a block permutation is not diagonal".into()));
    }
    Ok(WeylBlockElement { w, eta_w, t_w })
}

/// `σ(w, m w^{-1})·σ(m, w^{-1})·σ(w, w^{-1})^{-1}` for `m ∈ M^{(n)}`.
pub fn phi_w(m: &[MatQ], bp: &BlockPerm) -> Result<MuN> {
    let shape = bp.shape();
    if !in_mn(m, shape)? {
        return domain("φ_w is only defined on M^(n)");
    }
    let p = shape.params();
    let mm = block_embed(m, shape)?;
    let w = bp.matrix();
    let wi = w.inv();
    Ok(sigma(&w, &mm.mul(&wi), p)? * sigma(&mm, &wi, p)? * sigma(&w, &wi, p)?.inv())
}

/// `(det δ, det a)^{1+2c}` for `δ` in the first block.
pub fn omega_delta_factor(delta: &MatQ, a: &[MatQ], shape: &LeviShape) -> Result<MuN> {
    shape.check_blocks(a)?;
    if delta.dim() != shape.partition()[0] {
        return domain("δ must have the size of the first block");
    }
    let det_a = a.iter().fold(Rat::one(), |acc, g| acc * g.det());
    let s = shape.params().backend.pair(&delta.det(), &det_a)?;
    Ok(s.pow(1 + 2 * shape.c() as i64))
}
