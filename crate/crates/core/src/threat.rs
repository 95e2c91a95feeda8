//! Threat analysis.
//!
//! Two views of the same attacker. The probabilistic one asks how likely it
//! is to collect all four shares of a single group when every server falls
//! independently with probability `q`, with and without a fifth server
//! holding repair data. The combinatorial one computes exactly what a given
//! set of compromised servers can derive ([`attacker_closure`]) and searches
//! for the smallest set that reveals the secret ([`min_compromise_size`]).

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::field::{Fe, Polynomial};
use crate::protocol::SystemState;
use crate::shamir::{self, Share};

/// Largest system accepted by the exhaustive searches.
pub const ENUMERATION_LIMIT: usize = 16;

fn check_q(q: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&q) {
        Ok(q)
    } else {
        Err(Error::ProbabilityOutOfRange(q))
    }
}

/// Probability of taking all four servers of a group with no redundancy:
/// `q^4`.
pub fn p1_exact(q: f64) -> Result<f64> {
    let q = check_q(q)?;
    Ok(q.powi(4))
}

/// Probability of taking at least four of five servers:
/// `C(5,4) q^4 (1 - q) + q^5 = q^4 (5 - 4q)`.
pub fn p2_exact(q: f64) -> Result<f64> {
    let q = check_q(q)?;
    Ok(q.powi(4) * (5.0 - 4.0 * q))
}

/// What the Monte Carlo attacker must take to own a group's four shares.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Four servers, all required.
    Baseline4,
    /// Four members plus one redundancy server, any four suffice.
    Sss5,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Baseline4 => "baseline4",
            Scheme::Sss5 => "sss5",
        }
    }

    pub fn exact(&self, q: f64) -> Result<f64> {
        match self {
            Scheme::Baseline4 => p1_exact(q),
            Scheme::Sss5 => p2_exact(q),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompromiseModel {
    q: f64,
    trials: u64,
    seed: u64,
}

impl CompromiseModel {
    pub fn new(q: f64, trials: u64, seed: u64) -> Result<Self> {
        check_q(q)?;
        if trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        Ok(CompromiseModel { q, trials, seed })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// One Monte Carlo trial. Each trial owns a ChaCha stream keyed by its
/// index, so the estimate does not depend on execution order.
fn trial(model: &CompromiseModel, scheme: Scheme, index: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    rng.set_stream(index);
    match scheme {
        Scheme::Baseline4 => (0..4).all(|_| rng.gen_bool(model.q)),
        Scheme::Sss5 => (0..5).filter(|_| rng.gen_bool(model.q)).count() >= 4,
    }
}

pub fn mc_group_compromise_with(model: &CompromiseModel, scheme: Scheme, exec: Exec) -> f64 {
    let hits = exec.count(model.trials, |i| trial(model, scheme, i));
    hits as f64 / model.trials as f64
}

/// Fraction of trials in which the attacker obtains all four group shares.
pub fn mc_group_compromise(model: &CompromiseModel, scheme: Scheme) -> f64 {
    mc_group_compromise_with(model, scheme, Exec::default())
}

/// Result line of the probability analyses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityRecord {
    pub q: f64,
    pub p1_exact: f64,
    pub p2_exact: f64,
    pub scheme: Option<Scheme>,
    pub p_empirical: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
}

impl ProbabilityRecord {
    pub fn analytic(q: f64) -> Result<Self> {
        Ok(ProbabilityRecord {
            q,
            p1_exact: p1_exact(q)?,
            p2_exact: p2_exact(q)?,
            scheme: None,
            p_empirical: None,
            trials: None,
            seed: None,
        })
    }

    pub fn monte_carlo(model: &CompromiseModel, scheme: Scheme, exec: Exec) -> Result<Self> {
        Ok(ProbabilityRecord {
            scheme: Some(scheme),
            p_empirical: Some(mc_group_compromise_with(model, scheme, exec)),
            trials: Some(model.trials),
            seed: Some(model.seed),
            ..Self::analytic(model.q)?
        })
    }
}

/// Everything an attacker holds or can derive from a compromised set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AttackerKnowledge {
    pub compromised: BTreeSet<usize>,
    /// Participant id to primary share y.
    pub known_primary: BTreeMap<usize, Fe>,
    /// Group id to (sub-share x, y).
    pub known_subshares: BTreeMap<usize, BTreeMap<u64, Fe>>,
    /// Group id to derived sub-secret `y_λ`.
    pub derived_subsecrets: BTreeMap<usize, Fe>,
    /// Number of primary shares read directly off compromised nodes.
    pub direct_primary: usize,
    pub secret: Option<Fe>,
}

impl AttackerKnowledge {
    pub fn secret_recovered(&self) -> bool {
        self.secret.is_some()
    }

    /// Component-wise inclusion.
    pub fn is_subset_of(&self, other: &AttackerKnowledge) -> bool {
        fn map_sub<K: Ord, V: PartialEq>(a: &BTreeMap<K, V>, b: &BTreeMap<K, V>) -> bool {
            a.iter().all(|(k, v)| b.get(k) == Some(v))
        }
        self.compromised.is_subset(&other.compromised)
            && map_sub(&self.known_primary, &other.known_primary)
            && self.known_subshares.iter().all(|(g, subs)| {
                other
                    .known_subshares
                    .get(g)
                    .is_some_and(|o| map_sub(subs, o))
            })
            && map_sub(&self.derived_subsecrets, &other.derived_subsecrets)
            && (self.secret.is_none() || self.secret == other.secret)
    }

    /// One pass of the derivation rules. Returns whether anything changed.
    ///
    /// * R1: `γ` sub-shares of a group give its `y_λ`.
    /// * R2: `γ` points on a group's repairing polynomial (member shares
    ///   plus the λ-point) give the whole polynomial, so every member share
    ///   and `y_λ`.
    /// * R3: `k` primary shares give the secret.
    pub fn apply_rules(&mut self, state: &SystemState) -> Result<bool> {
        let registry = state.registry();
        let field = registry.field;
        let mut changed = false;
        for g in &registry.groups {
            let gamma = g.gamma();
            if !self.derived_subsecrets.contains_key(&g.id) {
                if let Some(subs) = self.known_subshares.get(&g.id) {
                    if subs.len() >= gamma {
                        let shares: Vec<Share> = subs
                            .iter()
                            .map(|(&x, &y)| Share::new(field.element(x), y))
                            .collect();
                        self.derived_subsecrets
                            .insert(g.id, shamir::recover(&shares, gamma)?);
                        changed = true;
                    }
                }
            }

            let mut points: Vec<(Fe, Fe)> = g
                .members
                .iter()
                .filter_map(|p| {
                    self.known_primary
                        .get(p)
                        .map(|&y| (registry.participants[p - 1].x, y))
                })
                .collect();
            let lambda = self.derived_subsecrets.get(&g.id).copied();
            let complete = points.len() == gamma && lambda.is_some();
            if let Some(y) = lambda {
                points.push((g.x_lambda, y));
            }
            if !complete && points.len() >= gamma {
                points.truncate(gamma);
                let poly = Polynomial::interpolate(&points)?;
                for &p in &g.members {
                    let x = registry.participants[p - 1].x;
                    if self.known_primary.insert(p, poly.eval(x)).is_none() {
                        changed = true;
                    }
                }
                if lambda.is_none() {
                    self.derived_subsecrets.insert(g.id, poly.eval(g.x_lambda));
                    changed = true;
                }
            }
        }

        if self.secret.is_none() && self.known_primary.len() >= registry.k {
            let shares: Vec<Share> = self
                .known_primary
                .iter()
                .map(|(&p, &y)| Share::new(registry.participants[p - 1].x, y))
                .collect();
            self.secret = Some(shamir::recover(&shares, registry.k)?);
            changed = true;
        }
        Ok(changed)
    }
}

/// Fixpoint of the derivation rules, starting from all private data on the
/// compromised nodes plus the public registry.
pub fn attacker_closure(state: &SystemState, compromised: &[usize]) -> Result<AttackerKnowledge> {
    let registry = state.registry();
    let mut know = AttackerKnowledge::default();
    for &id in compromised {
        let node = state.node(id)?;
        know.compromised.insert(id);
        if let Some(share) = node.primary {
            know.known_primary.insert(id, share.y);
        }
        if let Some(sub) = node.subshare {
            let g = registry.group_of(id)?.id;
            know.known_subshares
                .entry(g)
                .or_default()
                .insert(sub.x.value(), sub.y);
        }
        for h in &node.hosted {
            if let Some(g) = registry.group_by_digest(&h.digest) {
                know.known_subshares
                    .entry(g.id)
                    .or_default()
                    .insert(h.subshare.x.value(), h.subshare.y);
            }
        }
    }
    know.direct_primary = know.known_primary.len();
    while know.apply_rules(state)? {}
    Ok(know)
}

/// All `r`-subsets of `1..=n`, each sorted, in lexicographic order.
pub fn subsets_of_size(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if r > n {
        return out;
    }
    let mut idx: Vec<usize> = (1..=r).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..r).rev().find(|&i| idx[i] < n - r + i + 1) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinCompromise {
    pub size: usize,
    /// Lexicographically first minimum set.
    pub witness: Vec<usize>,
}

fn check_enumerable(state: &SystemState) -> Result<()> {
    let n = state.registry().n;
    if n > ENUMERATION_LIMIT {
        return Err(Error::EnumerationRefused {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(())
}

fn reveals(state: &SystemState, subset: &[usize]) -> bool {
    attacker_closure(state, subset).is_ok_and(|k| k.secret_recovered())
}

pub fn min_compromise_size_with(state: &SystemState, exec: Exec) -> Result<Option<MinCompromise>> {
    check_enumerable(state)?;
    let n = state.registry().n;
    for r in 0..=n {
        let subsets = subsets_of_size(n, r);
        if let Some(w) = exec.find_first(&subsets, |s| reveals(state, s)) {
            return Ok(Some(MinCompromise {
                size: r,
                witness: w.clone(),
            }));
        }
    }
    Ok(None)
}

/// Smallest set of servers whose closure recovers the secret, by
/// exhaustive search in ascending size. `None` if even all live servers
/// together cannot.
pub fn min_compromise_size(state: &SystemState) -> Result<Option<MinCompromise>> {
    min_compromise_size_with(state, Exec::default())
}

/// Classifies the placement currently stored in `state`.
pub fn placement_mode(state: &SystemState) -> &'static str {
    let registry = state.registry();
    let host: Vec<Option<usize>> = registry
        .groups
        .iter()
        .map(|g| {
            state
                .holder_of(g.id)
                .and_then(|h| registry.group_of(h).ok())
                .map(|hg| hg.id)
        })
        .collect();
    if host.iter().all(Option::is_none) {
        return "none";
    }
    let mutual = registry
        .groups
        .iter()
        .enumerate()
        .any(|(i, g)| host[i].is_some_and(|h| host[h - 1] == Some(g.id)));
    if mutual {
        "reciprocal"
    } else {
        "anti-reciprocal"
    }
}

/// Every assignment of one holder per group, each outside its group; with
/// `anti_reciprocal`, assignments where two groups host each other are
/// dropped.
pub fn enumerate_placements(state: &SystemState, anti_reciprocal: bool) -> Vec<Vec<usize>> {
    let registry = state.registry();
    let groups = &registry.groups;
    let options: Vec<Vec<usize>> = groups
        .iter()
        .map(|g| {
            (1..=registry.n)
                .filter(|p| !g.members.contains(p))
                .collect()
        })
        .collect();
    let group_of = |p: usize| groups.iter().position(|g| g.members.contains(&p)).unwrap();

    let mut out = Vec::new();
    let mut current = Vec::with_capacity(groups.len());
    fn rec(
        depth: usize,
        options: &[Vec<usize>],
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        ok: &dyn Fn(&[usize]) -> bool,
    ) {
        if depth == options.len() {
            if ok(current) {
                out.push(current.clone());
            }
            return;
        }
        for &h in &options[depth] {
            current.push(h);
            rec(depth + 1, options, current, out, ok);
            current.pop();
        }
    }
    let ok = |holders: &[usize]| {
        !anti_reciprocal
            || (0..holders.len()).all(|a| {
                let b = group_of(holders[a]);
                group_of(holders[b]) != a
            })
    };
    rec(0, &options, &mut current, &mut out, &ok);
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacementSweep {
    pub placements: usize,
    /// Minimum and maximum over placements of the minimum compromise size.
    pub min: usize,
    pub max: usize,
    pub worst_placement: Vec<usize>,
    pub witness: Vec<usize>,
}

/// Re-places the external sub-shares in every admissible way and runs
/// [`min_compromise_size`] on each placement.
pub fn sweep_placements_with(
    state: &SystemState,
    anti_reciprocal: bool,
    exec: Exec,
) -> Result<PlacementSweep> {
    check_enumerable(state)?;
    let placements = enumerate_placements(state, anti_reciprocal);
    if placements.is_empty() {
        return Err(Error::Placement("no admissible placement".into()));
    }
    let results = exec.map(&placements, |holders| {
        let mut sys = state.clone();
        let holders: Vec<Option<usize>> = holders.iter().map(|&h| Some(h)).collect();
        sys.replace_holders(&holders)?;
        min_compromise_size_with(&sys, Exec::Sequential)?
            .ok_or_else(|| Error::Integrity("secret unreachable".into()))
    });
    let results: Vec<MinCompromise> = results.into_iter().collect::<Result<_>>()?;
    let (worst_idx, worst) = results
        .iter()
        .enumerate()
        .min_by_key(|(i, r)| (r.size, *i))
        .expect("nonempty");
    Ok(PlacementSweep {
        placements: placements.len(),
        min: worst.size,
        max: results.iter().map(|r| r.size).max().unwrap_or(0),
        worst_placement: placements[worst_idx].clone(),
        witness: worst.witness.clone(),
    })
}

pub fn sweep_placements(state: &SystemState, anti_reciprocal: bool) -> Result<PlacementSweep> {
    sweep_placements_with(state, anti_reciprocal, Exec::default())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationRecord {
    pub placement_mode: String,
    pub min_compromise_size: Option<usize>,
    pub witness_subset: Vec<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{Placement, SetupConfig};

    fn toy(placement: Placement) -> SystemState {
        SystemState::setup(&SetupConfig::toy(42, 7).with_placement(placement)).unwrap()
    }

    #[test]
    fn closed_forms() {
        assert_eq!(p1_exact(0.0).unwrap(), 0.0);
        assert_eq!(p1_exact(1.0).unwrap(), 1.0);
        assert_eq!(p1_exact(0.5).unwrap(), 0.0625);
        assert_eq!(p2_exact(1.0).unwrap(), 1.0);
        assert_eq!(p2_exact(0.5).unwrap(), 0.1875);
        assert!(matches!(
            p1_exact(1.5),
            Err(Error::ProbabilityOutOfRange(_))
        ));
        assert!(matches!(
            p2_exact(-0.1),
            Err(Error::ProbabilityOutOfRange(_))
        ));
    }

    /// Independent check of the p2 closed form: sum over the 32 outcomes of
    /// five independent servers.
    #[test]
    fn p2_matches_outcome_enumeration() {
        for i in 0..=20 {
            let q = i as f64 / 20.0;
            let brute: f64 = (0u32..32)
                .filter(|m| m.count_ones() >= 4)
                .map(|m| q.powi(m.count_ones() as i32) * (1.0 - q).powi(5 - m.count_ones() as i32))
                .sum();
            assert!((brute - p2_exact(q).unwrap()).abs() < 1e-12);
            let diff = p2_exact(q).unwrap() - p1_exact(q).unwrap();
            assert!((diff - 4.0 * q.powi(4) * (1.0 - q)).abs() < 1e-12);
        }
    }

    #[test]
    fn monte_carlo_matches_closed_form() {
        let model = CompromiseModel::new(0.5, 40_000, 3).unwrap();
        for scheme in [Scheme::Baseline4, Scheme::Sss5] {
            let p = scheme.exact(0.5).unwrap();
            let sigma = (p * (1.0 - p) / 40_000.0).sqrt();
            let est = mc_group_compromise(&model, scheme);
            assert!((est - p).abs() < 3.0 * sigma, "{scheme:?}: {est} vs {p}");
        }
        let zero = CompromiseModel::new(0.0, 1000, 1).unwrap();
        assert_eq!(mc_group_compromise(&zero, Scheme::Sss5), 0.0);
        assert!(CompromiseModel::new(0.5, 0, 1).is_err());
    }

    #[test]
    fn monte_carlo_is_order_independent() {
        let model = CompromiseModel::new(0.6, 5_000, 11).unwrap();
        let seq = mc_group_compromise_with(&model, Scheme::Sss5, Exec::Sequential);
        assert_eq!(seq, mc_group_compromise(&model, Scheme::Sss5));
    }

    #[test]
    fn subsets_are_lexicographic() {
        assert_eq!(
            subsets_of_size(4, 2),
            vec![
                vec![1, 2],
                vec![1, 3],
                vec![1, 4],
                vec![2, 3],
                vec![2, 4],
                vec![3, 4]
            ]
        );
        assert_eq!(subsets_of_size(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(subsets_of_size(12, 6).len(), 924);
        assert!(subsets_of_size(2, 3).is_empty());
    }

    #[test]
    fn closure_examples() {
        let sys = toy(Placement::Random);
        let empty = attacker_closure(&sys, &[]).unwrap();
        assert_eq!(empty, AttackerKnowledge::default());

        let group = attacker_closure(&sys, &[1, 2, 3, 4]).unwrap();
        assert_eq!(group.known_primary.len(), 4);
        assert!(group.derived_subsecrets.contains_key(&1));
        assert!(!group.secret_recovered());
        assert!(attacker_closure(&sys, &[13]).is_err());
    }

    #[test]
    fn reciprocal_worst_case_reveals_with_six() {
        let sys = toy(Placement::Reciprocal);
        let h1 = sys.holder_of(1).unwrap(); // in group 2
        let h2 = sys.holder_of(2).unwrap(); // in group 1
        let mut set: Vec<usize> = vec![h2];
        set.extend((1..=4).filter(|&p| p != h2).take(2));
        set.push(h1);
        set.extend((5..=8).filter(|&p| p != h1).take(2));
        let know = attacker_closure(&sys, &set).unwrap();
        assert_eq!(know.direct_primary, 6);
        assert_eq!(know.known_primary.len(), 8);
        assert_eq!(know.secret.map(|s| s.value()), Some(42));
    }

    #[test]
    fn closure_is_a_fixpoint() {
        let sys = toy(Placement::Reciprocal);
        let mut know = attacker_closure(&sys, &[1, 2, 5, 6, 7, 9]).unwrap();
        let before = know.clone();
        assert!(!know.apply_rules(&sys).unwrap());
        assert_eq!(know, before);
    }

    #[test]
    fn placement_modes() {
        assert_eq!(placement_mode(&toy(Placement::Reciprocal)), "reciprocal");
        assert_eq!(
            placement_mode(&toy(Placement::AntiReciprocal)),
            "anti-reciprocal"
        );
        assert_eq!(placement_mode(&toy(Placement::Withheld)), "none");
    }

    #[test]
    fn placement_enumeration_counts() {
        let sys = toy(Placement::Random);
        assert_eq!(enumerate_placements(&sys, false).len(), 8 * 8 * 8);
        // two orientations of the 3-cycle, 4 holders per hop
        assert_eq!(enumerate_placements(&sys, true).len(), 2 * 4 * 4 * 4);
    }

    #[test]
    fn enumeration_refuses_large_systems() {
        let sys = SystemState::setup(&SetupConfig {
            n: 20,
            m: 5,
            k: 10,
            ..SetupConfig::toy(1, 1)
        })
        .unwrap();
        assert!(matches!(
            min_compromise_size(&sys),
            Err(Error::EnumerationRefused { n: 20, .. })
        ));
    }

    #[test]
    fn min_compromise_without_redundancy_is_threshold() {
        let sys = toy(Placement::Withheld);
        let min = min_compromise_size(&sys).unwrap().unwrap();
        assert_eq!(min.size, 8);
        assert_eq!(min.witness, (1..=8).collect::<Vec<_>>());
    }
}
