//! Elements `(g, ξ)` of the metaplectic cover and its center.

use num_integer::Integer;
use serde::Serialize;

use crate::arith::Rat;
use crate::cocycle::{sigma, CocycleParams};
use crate::error::{domain, Error, Result};
use crate::levi::LeviShape;
use crate::matq::MatQ;
use crate::symbols::MuN;

#[derive(Clone, Debug, Serialize)]
pub struct CoverElement {
    pub g: MatQ,
    pub xi: MuN,
    #[serde(skip)]
    pub params: CocycleParams,
}

impl PartialEq for CoverElement {
    fn eq(&self, other: &Self) -> bool {
        self.g == other.g && self.xi == other.xi && self.params.same_as(&other.params)
    }
}

impl CoverElement {
    pub fn new(g: MatQ, xi: MuN, params: &CocycleParams) -> Result<Self> {
        if g.dim() != params.r {
            return Err(Error::ParamMismatch(format!(
                "matrix of size {} in a cover of rank {}",
                g.dim(),
                params.r
            )));
        }
        if xi.modulus() != params.n {
            return Err(Error::ParamMismatch(format!(
                "root of unity of order {} in a cover with n = {}",
                xi.modulus(),
                params.n
            )));
        }
        Ok(CoverElement {
            g,
            xi,
            params: params.clone(),
        })
    }

    /// `(g, 1)`.
    pub fn lift(g: MatQ, params: &CocycleParams) -> Result<Self> {
        Self::new(g, params.identity(), params)
    }

    pub fn identity(params: &CocycleParams) -> Self {
        CoverElement {
            g: MatQ::identity(params.r),
            xi: params.identity(),
            params: params.clone(),
        }
    }

    fn same_cover(&self, other: &Self) -> Result<()> {
        if !self.params.same_as(&other.params) {
            return Err(Error::ParamMismatch(format!(
                "{:?} vs {:?}",
                self.params, other.params
            )));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_cover(other)?;
        let s = sigma(&self.g, &other.g, &self.params)?;
        Ok(CoverElement {
            g: self.g.mul(&other.g),
            xi: s * self.xi * other.xi,
            params: self.params.clone(),
        })
    }

    pub fn inv(&self) -> Result<Self> {
        let gi = self.g.inv();
        let s = sigma(&self.g, &gi, &self.params)?;
        Ok(CoverElement {
            g: gi,
            xi: s.inv() * self.xi.inv(),
            params: self.params.clone(),
        })
    }

    /// `x y x^{-1}`.
    pub fn conj(&self, y: &Self) -> Result<Self> {
        self.mul(y)?.mul(&self.inv()?)
    }

    pub fn commutes_with(&self, y: &Self) -> Result<bool> {
        Ok(self.mul(y)? == y.mul(self)?)
    }
}

/// `r - 1 + 2rc`, the exponent governing centrality of scalars.
pub fn center_exponent(r: usize, c: u32) -> i64 {
    r as i64 - 1 + 2 * r as i64 * c as i64
}

/// Whether `(a I_r, ξ)` is central in the cover, i.e. `a^{r-1+2rc} ∈ F^{×n}`.
///
/// The answer is cross-checked against the equivalent condition
/// `a ∈ F^{×n/d}` with `d = gcd(r-1+2rc, n)`.
pub fn in_center_glr(a: &Rat, params: &CocycleParams) -> Result<bool> {
    if a.is_zero() {
        return domain("scalar must be nonzero");
    }
    let e = center_exponent(params.r, params.c);
    let direct = params.backend.is_nth_power(&a.pow(e))?;
    let via_gcd = in_center_glr_gcd_form(a, params)?;
    if direct != via_gcd {
        return domain(format!(
            "centrality tests disagree for a = {a} under {:?}",
            params
        ));
    }
    Ok(direct)
}

/// `a ∈ F^{×n/d}` with `d = gcd(r-1+2rc, n)`.
pub fn in_center_glr_gcd_form(a: &Rat, params: &CocycleParams) -> Result<bool> {
    let d = center_exponent(params.r, params.c).gcd(&(params.n as i64)) as u32;
    params.backend.is_power(a, params.n / d)
}

/// Whether `diag(a_1 I_{r_1}, …, a_k I_{r_k})` lifts to the center of the
/// cover of the Levi subgroup.
pub fn in_center_m(a: &[Rat], shape: &LeviShape) -> Result<bool> {
    if a.len() != shape.k() {
        return domain(format!("expected {} scalars, got {}", shape.k(), a.len()));
    }
    if a.iter().any(Rat::is_zero) {
        return domain("scalars must be nonzero");
    }
    let bk = &shape.params().backend;
    let e = center_exponent(shape.r(), shape.c());
    for ai in a {
        if !bk.is_nth_power(&ai.pow(e))? {
            return Ok(false);
        }
    }
    for ai in a {
        if !bk.is_nth_power(&(ai / &a[0]))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether `(aI, 1)` commutes with `(g, 1)` in the cover; requires
/// `det g ∈ F^{×n}`.
pub fn commutes_with_gln(a: &Rat, g: &MatQ, params: &CocycleParams) -> Result<bool> {
    if !params.backend.is_nth_power(&g.det())? {
        return domain(format!("det {} is not an n-th power", g.det()));
    }
    let z = CoverElement::lift(MatQ::scalar(params.r, a)?, params)?;
    let x = CoverElement::lift(g.clone(), params)?;
    Ok(z.conj(&x)? == x)
}
