//! `(k, n)` Shamir secret sharing over a prime field.
//!
//! Used twice in the system: once for the global secret (x-coordinates
//! `1..=n`) and once per group for the sub-secret (x-coordinates `1..=γ+1`
//! in that group's own namespace).

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{check_distinct, lagrange_eval, Fe, Field, Polynomial};

/// A point `(x, y)` on a sharing polynomial. `x` is public, `y` private.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Share {
    pub x: Fe,
    pub y: Fe,
}

impl Share {
    pub fn new(x: Fe, y: Fe) -> Self {
        Share { x, y }
    }

    pub fn point(&self) -> (Fe, Fe) {
        (self.x, self.y)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SharingParams {
    k: usize,
    xs: Vec<Fe>,
}

impl SharingParams {
    /// `k` of `xs.len()` sharing at the given abscissas.
    pub fn new(k: usize, xs: Vec<Fe>) -> Result<Self> {
        if k == 0 || k > xs.len() {
            return Err(Error::Config(format!(
                "threshold k = {k} must satisfy 1 <= k <= n = {}",
                xs.len()
            )));
        }
        if xs.iter().any(Fe::is_zero) {
            return Err(Error::ZeroX);
        }
        check_distinct(xs.iter().copied())?;
        Ok(SharingParams { k, xs })
    }

    /// Participant `i` gets `x = i`, for `i` in `1..=n`.
    pub fn sequential(field: Field, k: usize, n: usize) -> Result<Self> {
        if n as u64 >= field.modulus() {
            return Err(Error::FieldExhausted {
                modulus: field.modulus(),
            });
        }
        Self::new(k, (1..=n as u64).map(|i| field.element(i)).collect())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.xs.len()
    }

    pub fn xs(&self) -> &[Fe] {
        &self.xs
    }
}

/// Splits `secret` into `n` shares, one per abscissa in `params`, using a
/// random polynomial of degree `k - 1` with constant term `secret`.
pub fn split<R: Rng + ?Sized>(
    secret: Fe,
    params: &SharingParams,
    rng: &mut R,
) -> Result<Vec<Share>> {
    let field = secret.field();
    let poly = Polynomial::random(field, params.k - 1, &[(field.zero(), secret)], rng)?;
    Ok(params
        .xs
        .iter()
        .map(|&x| Share::new(x, poly.eval(x)))
        .collect())
}

type Selection = (Vec<(Fe, Fe)>, Vec<Share>);

/// Orders shares by x and separates the first `k` from the rest.
fn select(shares: &[Share], k: usize) -> Result<Selection> {
    if k == 0 {
        return Err(Error::Config("threshold k must be at least 1".into()));
    }
    if shares.len() < k {
        return Err(Error::InsufficientShares {
            need: k,
            have: shares.len(),
        });
    }
    check_distinct(shares.iter().map(|s| s.x))?;
    let mut sorted = shares.to_vec();
    sorted.sort_by_key(|s| s.x.value());
    let extra = sorted.split_off(k);
    Ok((sorted.iter().map(Share::point).collect(), extra))
}

/// The unique degree `<= k - 1` polynomial through the lowest-x `k` shares.
/// Any further shares must lie on it, otherwise [`Error::Corruption`].
pub fn reconstruct_polynomial(shares: &[Share], k: usize) -> Result<Polynomial> {
    let (basis, extra) = select(shares, k)?;
    let poly = Polynomial::interpolate(&basis)?;
    if let Some(bad) = extra.iter().find(|s| poly.eval(s.x) != s.y) {
        return Err(Error::Corruption { x: bad.x.value() });
    }
    Ok(poly)
}

/// Recovers the secret `f(0)` from at least `k` shares.
pub fn recover(shares: &[Share], k: usize) -> Result<Fe> {
    let (basis, extra) = select(shares, k)?;
    let field = basis[0].0.field();
    if extra.is_empty() {
        return lagrange_eval(&basis, field.zero());
    }
    let all: Vec<Share> = basis
        .iter()
        .map(|&(x, y)| Share::new(x, y))
        .chain(extra)
        .collect();
    Ok(reconstruct_polynomial(&all, k)?.eval(field.zero()))
}
