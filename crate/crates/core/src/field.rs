//! Prime-field arithmetic and dense polynomials over it.
//!
//! The field is `GF(p)` for a runtime prime `p < 2^63`; products are formed
//! in 128-bit intermediates so any such modulus works. Elements carry their
//! field, which keeps polynomial code free of a separate context argument.
//! Mixing elements of different fields is a programming error and panics.

use std::collections::HashSet;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rand::Rng;

use crate::error::{Error, Result};

/// `2^31 - 1`, the default production modulus.
pub const MERSENNE_31: u64 = (1 << 31) - 1;

/// A prime field `GF(p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Field {
    modulus: u64,
}

impl Field {
    pub fn new(modulus: u64) -> Result<Self> {
        if !(3..(1 << 63)).contains(&modulus) {
            return Err(Error::ModulusOutOfRange(modulus));
        }
        if !is_prime(modulus) {
            return Err(Error::NotPrime(modulus));
        }
        Ok(Field { modulus })
    }

    /// `GF(2^31 - 1)`.
    pub fn mersenne31() -> Self {
        Field {
            modulus: MERSENNE_31,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn element(&self, value: u64) -> Fe {
        Fe {
            value: value % self.modulus,
            field: *self,
        }
    }

    pub fn zero(&self) -> Fe {
        self.element(0)
    }

    pub fn one(&self) -> Fe {
        self.element(1)
    }

    /// Uniform element of the field.
    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Fe {
        self.element(rng.gen_range(0..self.modulus))
    }

    /// Iterator over every element, in increasing order.
    pub fn elements(&self) -> impl Iterator<Item = Fe> + '_ {
        (0..self.modulus).map(move |v| self.element(v))
    }
}

/// A residue modulo the field's prime, always fully reduced.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fe {
    value: u64,
    field: Field,
}

impl Fe {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn pow(self, mut exp: u64) -> Fe {
        let mut base = self;
        let mut acc = self.field.one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc *= base;
            }
            base *= base;
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via the extended Euclidean algorithm.
    pub fn inverse(self) -> Result<Fe> {
        if self.value == 0 {
            return Err(Error::ZeroInverse);
        }
        let p = self.field.modulus as i128;
        let (mut r0, mut r1) = (p, self.value as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(self.field.element(t0.rem_euclid(p) as u64))
    }

    #[inline]
    fn check(&self, other: &Fe) {
        assert_eq!(
            self.field.modulus, other.field.modulus,
            "field elements from different fields"
        );
    }
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for Fe {
    type Output = Fe;
    #[inline]
    fn add(self, rhs: Fe) -> Fe {
        self.check(&rhs);
        let p = self.field.modulus;
        let s = self.value + rhs.value;
        Fe {
            value: if s >= p { s - p } else { s },
            field: self.field,
        }
    }
}

impl Sub for Fe {
    type Output = Fe;
    #[inline]
    fn sub(self, rhs: Fe) -> Fe {
        self.check(&rhs);
        let p = self.field.modulus;
        Fe {
            value: if self.value >= rhs.value {
                self.value - rhs.value
            } else {
                self.value + p - rhs.value
            },
            field: self.field,
        }
    }
}

impl Mul for Fe {
    type Output = Fe;
    #[inline]
    fn mul(self, rhs: Fe) -> Fe {
        self.check(&rhs);
        let p = self.field.modulus as u128;
        Fe {
            value: ((self.value as u128 * rhs.value as u128) % p) as u64,
            field: self.field,
        }
    }
}

impl Neg for Fe {
    type Output = Fe;
    fn neg(self) -> Fe {
        self.field.zero() - self
    }
}

impl AddAssign for Fe {
    fn add_assign(&mut self, rhs: Fe) {
        *self = *self + rhs;
    }
}

impl SubAssign for Fe {
    fn sub_assign(&mut self, rhs: Fe) {
        *self = *self - rhs;
    }
}

impl MulAssign for Fe {
    fn mul_assign(&mut self, rhs: Fe) {
        *self = *self * rhs;
    }
}

/// Dense polynomial, constant term first.
///
/// Trailing zero coefficients are trimmed on construction and the zero
/// polynomial is `[0]`, so coefficient equality is polynomial equality.
#[derive(Clone, PartialEq, Eq)]
pub struct Polynomial {
    coeffs: Vec<Fe>,
    field: Field,
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coeffs.iter()).finish()
    }
}

impl Polynomial {
    pub fn new(field: Field, mut coeffs: Vec<Fe>) -> Self {
        for c in &coeffs {
            assert_eq!(c.field, field, "coefficient from a different field");
        }
        while coeffs.len() > 1 && coeffs.last().is_some_and(Fe::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(field.zero());
        }
        Polynomial { coeffs, field }
    }

    /// Builds from raw integers, reducing each modulo `p`.
    pub fn from_u64s(field: Field, coeffs: &[u64]) -> Self {
        Self::new(field, coeffs.iter().map(|&c| field.element(c)).collect())
    }

    pub fn zero(field: Field) -> Self {
        Self::new(field, Vec::new())
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn coefficients(&self) -> &[Fe] {
        &self.coeffs
    }

    /// Coefficient values as plain integers; handy in tests.
    pub fn to_u64s(&self) -> Vec<u64> {
        self.coeffs.iter().map(Fe::value).collect()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    /// Horner evaluation.
    pub fn eval(&self, x: Fe) -> Fe {
        self.coeffs
            .iter()
            .rev()
            .fold(self.field.zero(), |acc, &c| acc * x + c)
    }

    /// The unique polynomial of degree `< points.len()` through `points`,
    /// built from the Lagrange basis in `O(d^2)`.
    pub fn interpolate(points: &[(Fe, Fe)]) -> Result<Self> {
        let field = points.first().ok_or(Error::NoPoints)?.0.field;
        check_distinct(points.iter().map(|p| p.0))?;

        // master(x) = prod (x - x_j), coefficients constant-first
        let mut master = vec![field.one()];
        for &(xj, _) in points {
            master.push(field.zero());
            for i in (1..master.len()).rev() {
                master[i] = master[i - 1] - xj * master[i];
            }
            master[0] = -(master[0] * xj);
        }

        let d = points.len();
        let mut acc = vec![field.zero(); d];
        let mut quotient = vec![field.zero(); d];
        for &(xi, yi) in points {
            // synthetic division of master by (x - xi)
            let mut carry = field.zero();
            for i in (0..d).rev() {
                carry = master[i + 1] + carry * xi;
                quotient[i] = carry;
            }
            let denom = quotient.iter().rev().fold(field.zero(), |a, &c| a * xi + c);
            let scale = yi * denom.inverse()?;
            for (a, &q) in acc.iter_mut().zip(&quotient) {
                *a += scale * q;
            }
        }
        Ok(Polynomial::new(field, acc))
    }

    /// A uniformly random polynomial of degree at most `degree` passing
    /// through every point in `constraints`.
    ///
    /// The free degrees of freedom are drawn as uniform values at fixed
    /// auxiliary abscissas, which is a bijection onto the constrained
    /// polynomial space. Fully constrained input consumes no randomness.
    pub fn random<R: Rng + ?Sized>(
        field: Field,
        degree: usize,
        constraints: &[(Fe, Fe)],
        rng: &mut R,
    ) -> Result<Self> {
        if constraints.len() > degree + 1 {
            return Err(Error::OverConstrained {
                degree,
                constraints: constraints.len(),
            });
        }
        check_distinct(constraints.iter().map(|p| p.0))?;
        let free = degree + 1 - constraints.len();
        if free == 0 {
            return Self::interpolate(constraints);
        }
        if (degree as u64) >= field.modulus() {
            return Err(Error::FieldExhausted {
                modulus: field.modulus(),
            });
        }
        let taken: HashSet<u64> = constraints.iter().map(|p| p.0.value()).collect();
        let mut points = constraints.to_vec();
        let mut candidate = 0u64;
        while points.len() <= degree {
            if !taken.contains(&candidate) {
                points.push((field.element(candidate), field.random(rng)));
            }
            candidate += 1;
        }
        Self::interpolate(&points)
    }
}

/// Evaluates the interpolating polynomial of `points` at `x` without
/// materializing its coefficients.
pub fn lagrange_eval(points: &[(Fe, Fe)], x: Fe) -> Result<Fe> {
    let field = points.first().ok_or(Error::NoPoints)?.0.field;
    check_distinct(points.iter().map(|p| p.0))?;
    let mut acc = field.zero();
    for (i, &(xi, yi)) in points.iter().enumerate() {
        let mut num = field.one();
        let mut den = field.one();
        for (j, &(xj, _)) in points.iter().enumerate() {
            if i != j {
                num *= x - xj;
                den *= xi - xj;
            }
        }
        acc += yi * num * den.inverse()?;
    }
    Ok(acc)
}

pub(crate) fn check_distinct(xs: impl Iterator<Item = Fe>) -> Result<()> {
    let mut seen = HashSet::new();
    for x in xs {
        if !seen.insert(x.value()) {
            return Err(Error::DuplicateX(x.value()));
        }
    }
    Ok(())
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Miller-Rabin with the first twelve prime bases, exact for all `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gf13() -> Field {
        Field::new(13).unwrap()
    }

    #[test]
    fn inverse_examples() {
        let f = gf13();
        assert_eq!(f.element(1).inverse().unwrap().value(), 1);
        assert_eq!(f.element(5).inverse().unwrap().value(), 8);
        assert_eq!(f.element(12).inverse().unwrap().value(), 12);
        assert_eq!(f.zero().inverse(), Err(Error::ZeroInverse));
    }

    #[test]
    fn inverse_is_exhaustive_in_gf13() {
        let f = gf13();
        for a in f.elements().skip(1) {
            assert_eq!((a * a.inverse().unwrap()).value(), 1);
        }
    }

    #[test]
    fn field_rejects_composites_and_tiny_moduli() {
        assert_eq!(Field::new(15), Err(Error::NotPrime(15)));
        assert_eq!(Field::new(2), Err(Error::ModulusOutOfRange(2)));
        assert!(Field::new(MERSENNE_31).is_ok());
        assert!(Field::new((1 << 61) - 1).is_ok());
        // Carmichael number
        assert!(!is_prime(561));
        assert!(!is_prime(3_215_031_751));
    }

    #[test]
    fn eval_examples() {
        let f = gf13();
        let line = Polynomial::from_u64s(f, &[2, 3]);
        assert_eq!(line.eval(f.element(0)).value(), 2);
        assert_eq!(line.eval(f.element(2)).value(), 8);
        let cubic = Polynomial::from_u64s(f, &[1, 2, 3, 4]);
        assert_eq!(cubic.eval(f.element(4)).value(), 1);
    }

    #[test]
    fn canonical_zero_and_trimming() {
        let f = gf13();
        assert_eq!(Polynomial::from_u64s(f, &[]).to_u64s(), vec![0]);
        assert_eq!(Polynomial::from_u64s(f, &[0, 0]).to_u64s(), vec![0]);
        assert_eq!(Polynomial::from_u64s(f, &[3, 13, 26]).to_u64s(), vec![3]);
        assert!(Polynomial::zero(f).is_zero());
    }

    #[test]
    fn interpolate_examples() {
        let f = gf13();
        let pts = [(f.element(1), f.element(5)), (f.element(2), f.element(7))];
        assert_eq!(Polynomial::interpolate(&pts).unwrap().to_u64s(), vec![3, 2]);
        let single = [(f.element(9), f.element(4))];
        assert_eq!(Polynomial::interpolate(&single).unwrap().to_u64s(), vec![4]);
    }

    #[test]
    fn interpolate_errors() {
        let f = gf13();
        assert_eq!(Polynomial::interpolate(&[]), Err(Error::NoPoints));
        let dup = [(f.element(1), f.element(5)), (f.element(14), f.element(7))];
        assert_eq!(Polynomial::interpolate(&dup), Err(Error::DuplicateX(1)));
    }

    /// Exhaustive over all polynomials of degree <= 2 in GF(13).
    #[test]
    fn interpolation_round_trip_exhaustive_low_degree() {
        let f = gf13();
        for deg in 0..=2usize {
            let count = 13usize.pow(deg as u32 + 1);
            for code in 0..count {
                let mut c = code;
                let coeffs: Vec<u64> = (0..=deg)
                    .map(|_| {
                        let v = c % 13;
                        c /= 13;
                        v as u64
                    })
                    .collect();
                let poly = Polynomial::from_u64s(f, &coeffs);
                let pts: Vec<_> = (1..=deg as u64 + 1)
                    .map(|x| (f.element(x), poly.eval(f.element(x))))
                    .collect();
                assert_eq!(Polynomial::interpolate(&pts).unwrap(), poly);
            }
        }
    }

    #[test]
    fn interpolation_round_trip_random_up_to_degree_six() {
        let f = gf13();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let deg = rng.gen_range(0..=6usize);
            let poly = Polynomial::new(f, (0..=deg).map(|_| f.random(&mut rng)).collect());
            // any deg+1 distinct abscissas, including 0
            let mut xs: Vec<u64> = (0..13).collect();
            for i in 0..=deg {
                let j = rng.gen_range(i..13);
                xs.swap(i, j);
            }
            let pts: Vec<_> = xs[..=deg]
                .iter()
                .map(|&x| (f.element(x), poly.eval(f.element(x))))
                .collect();
            assert_eq!(Polynomial::interpolate(&pts).unwrap(), poly);
            let probe = f.random(&mut rng);
            assert_eq!(lagrange_eval(&pts, probe).unwrap(), poly.eval(probe));
        }
    }

    #[test]
    fn random_fully_constrained_ignores_seed() {
        let f = gf13();
        let c = [(f.zero(), f.element(5))];
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            assert_eq!(
                Polynomial::random(f, 0, &c, &mut rng).unwrap().to_u64s(),
                vec![5]
            );
        }
        let c3 = [
            (f.element(1), f.element(2)),
            (f.element(2), f.element(9)),
            (f.element(3), f.element(0)),
        ];
        let a = Polynomial::random(f, 2, &c3, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = Polynomial::random(f, 2, &c3, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_is_deterministic_and_constrained() {
        let f = gf13();
        let c = [(f.zero(), f.element(5))];
        let a = Polynomial::random(f, 2, &c, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let b = Polynomial::random(f, 2, &c, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.eval(f.zero()).value(), 5);
        assert!(a.degree() <= 2);
    }

    #[test]
    fn random_rejects_over_constraint() {
        let f = gf13();
        let c = [(f.element(1), f.one()), (f.element(2), f.one())];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            Polynomial::random(f, 0, &c, &mut rng),
            Err(Error::OverConstrained {
                degree: 0,
                constraints: 2
            })
        );
    }

    /// f(1) for a degree-2 polynomial pinned at (0, 5) must be uniform on
    /// GF(13). Chi-square with 12 degrees of freedom; 32.9 is the 0.999
    /// quantile.
    #[test]
    fn random_free_values_are_uniform() {
        let f = gf13();
        let c = [(f.zero(), f.element(5))];
        let trials = 10_000u64;
        let mut counts = [0u64; 13];
        for seed in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = Polynomial::random(f, 2, &c, &mut rng).unwrap();
            counts[p.eval(f.one()).value() as usize] += 1;
        }
        let expected = trials as f64 / 13.0;
        let chi2: f64 = counts
            .iter()
            .map(|&o| (o as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 32.91, "chi2 = {chi2}, counts = {counts:?}");
    }
}
