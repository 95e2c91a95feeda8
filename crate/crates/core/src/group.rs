//! Groups, repairing polynomials and local repair.
//!
//! Within a group of `γ` participants the repairing polynomial is the unique
//! degree `γ - 1` polynomial through the members' share points. Its
//! coefficient list is the *strong* redundancy (it alone yields every member
//! share). A single extra point `(x_λ, y_λ)` on it is the *weak* redundancy:
//! useless alone, but together with `γ - 1` surviving shares it pins the
//! polynomial down and so repairs the missing one. `y_λ` is the group's
//! sub-secret and is itself shared `(γ, γ + 1)`.

use std::collections::HashSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{check_distinct, Fe, Field, Polynomial};
use crate::shamir::{self, Share, SharingParams};

/// One of the `m` disjoint groups. Members are 1-based participant ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupSpec {
    pub id: usize,
    pub members: Vec<usize>,
}

impl GroupSpec {
    pub fn gamma(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, participant: usize) -> bool {
        self.members.contains(&participant)
    }

    /// Position of `participant` within the group, 0-based.
    pub fn position(&self, participant: usize) -> Option<usize> {
        self.members.iter().position(|&p| p == participant)
    }
}

/// Splits participants `1..=n` into `m` groups of `n / m` consecutive ids.
pub fn partition(n: usize, m: usize) -> Result<Vec<GroupSpec>> {
    if m == 0 || !n.is_multiple_of(m) {
        return Err(Error::Config(format!(
            "n = {n} must split into m = {m} equal groups"
        )));
    }
    let gamma = n / m;
    if gamma < 2 {
        return Err(Error::Config(format!(
            "group size n / m = {gamma} must be at least 2"
        )));
    }
    Ok((0..m)
        .map(|g| GroupSpec {
            id: g + 1,
            members: (g * gamma + 1..=(g + 1) * gamma).collect(),
        })
        .collect())
}

/// The full repairing polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrongRedundancy {
    poly: Polynomial,
}

impl StrongRedundancy {
    pub fn polynomial(&self) -> &Polynomial {
        &self.poly
    }

    /// The member share at `x`; no cooperation needed.
    pub fn share_at(&self, x: Fe) -> Share {
        Share::new(x, self.poly.eval(x))
    }
}

/// One extra point on the repairing polynomial. `x_lambda` is public.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WeakRedundancy {
    pub x_lambda: Fe,
    pub y_lambda: Fe,
}

impl WeakRedundancy {
    pub fn point(&self) -> (Fe, Fe) {
        (self.x_lambda, self.y_lambda)
    }
}

pub fn build_repair_function(group_shares: &[Share]) -> Result<StrongRedundancy> {
    let pts: Vec<_> = group_shares.iter().map(Share::point).collect();
    Ok(StrongRedundancy {
        poly: Polynomial::interpolate(&pts)?,
    })
}

/// Draws `x_λ` uniformly from the field minus `{0}` and `excluded`, and
/// evaluates the repairing polynomial there.
pub fn make_weak_redundancy<R: Rng + ?Sized>(
    f: &StrongRedundancy,
    excluded: &[Fe],
    rng: &mut R,
) -> Result<WeakRedundancy> {
    let field = f.poly.field();
    let banned: HashSet<u64> = excluded
        .iter()
        .map(Fe::value)
        .chain(std::iter::once(0))
        .collect();
    if banned.len() as u64 >= field.modulus() {
        return Err(Error::FieldExhausted {
            modulus: field.modulus(),
        });
    }
    let x_lambda = loop {
        let x = field.random(rng);
        if !banned.contains(&x.value()) {
            break x;
        }
    };
    Ok(WeakRedundancy {
        x_lambda,
        y_lambda: f.poly.eval(x_lambda),
    })
}

/// `(γ, γ + 1)` sharing of the sub-secret at abscissas `1..=γ+1`. Shares
/// `1..=γ` go to the members in order, share `γ + 1` is the external one.
pub fn setup_sss<R: Rng + ?Sized>(y_lambda: Fe, gamma: usize, rng: &mut R) -> Result<Vec<Share>> {
    if gamma < 2 {
        return Err(Error::Config(format!(
            "group size {gamma} must be at least 2"
        )));
    }
    let params = SharingParams::sequential(y_lambda.field(), gamma, gamma + 1)?;
    shamir::split(y_lambda, &params, rng)
}

/// Recomputes the share at `failed_x` from `γ - 1` surviving member points
/// plus the weak redundancy. The result is the original `y`, exactly.
pub fn repair_share(
    surviving: &[Share],
    redundancy: &WeakRedundancy,
    failed_x: Fe,
    gamma: usize,
) -> Result<Fe> {
    let mut pts: Vec<(Fe, Fe)> = surviving.iter().map(Share::point).collect();
    pts.push(redundancy.point());
    check_distinct(pts.iter().map(|p| p.0))?;
    if pts.len() < gamma {
        return Err(Error::InsufficientPoints {
            need: gamma,
            have: pts.len(),
        });
    }
    pts.truncate(gamma);
    // the λ-point must be among the γ used
    if pts.last() != Some(&redundancy.point()) {
        pts[gamma - 1] = redundancy.point();
    }
    Ok(Polynomial::interpolate(&pts)?.eval(failed_x))
}

/// Recomputes the sub-share at `failed_sss_x` from `γ` other sub-shares.
pub fn restore_subshare(available: &[Share], failed_sss_x: Fe, gamma: usize) -> Result<Share> {
    if available.len() < gamma {
        return Err(Error::InsufficientPoints {
            need: gamma,
            have: available.len(),
        });
    }
    let poly = shamir::reconstruct_polynomial(available, gamma)?;
    Ok(Share::new(failed_sss_x, poly.eval(failed_sss_x)))
}

/// A group after setup: public `x_λ` plus the `γ + 1` sub-shares of `y_λ`.
/// `y_λ` itself and the repairing polynomial are not retained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupState {
    pub spec: GroupSpec,
    pub x_lambda: Fe,
    pub sss_shares: Vec<Share>,
}

impl GroupState {
    pub fn sss_threshold(&self) -> usize {
        self.spec.gamma()
    }

    pub fn member_subshare(&self, position: usize) -> Share {
        self.sss_shares[position]
    }

    pub fn external_subshare(&self) -> Share {
        self.sss_shares[self.spec.gamma()]
    }

    pub fn sss_xs(&self) -> Vec<Fe> {
        self.sss_shares.iter().map(|s| s.x).collect()
    }
}

/// Runs the per-group setup: repairing polynomial, weak redundancy, SSS.
pub fn setup_group<R1, R2>(
    spec: GroupSpec,
    member_shares: &[Share],
    lambda_rng: &mut R1,
    sss_rng: &mut R2,
) -> Result<GroupState>
where
    R1: Rng + ?Sized,
    R2: Rng + ?Sized,
{
    if member_shares.len() != spec.gamma() {
        return Err(Error::Config(format!(
            "group {} has {} members but {} shares were supplied",
            spec.id,
            spec.gamma(),
            member_shares.len()
        )));
    }
    let strong = build_repair_function(member_shares)?;
    let excluded: Vec<Fe> = member_shares.iter().map(|s| s.x).collect();
    let weak = make_weak_redundancy(&strong, &excluded, lambda_rng)?;
    let sss_shares = setup_sss(weak.y_lambda, spec.gamma(), sss_rng)?;
    Ok(GroupState {
        spec,
        x_lambda: weak.x_lambda,
        sss_shares,
    })
}

/// Abscissas `1..=γ+1` of the sub-secret sharing.
pub fn sss_abscissas(field: Field, gamma: usize) -> Vec<Fe> {
    (1..=gamma as u64 + 1).map(|x| field.element(x)).collect()
}
