//! Deterministic simulated storage network.
//!
//! Nodes are records inside one [`SystemState`]; a broadcast is an iteration
//! over them. Setup publishes the x-coordinates, splits the secret, builds
//! every group's repairing polynomial and sub-secret sharing, and places each
//! group's extra sub-share on a random node outside the group. Only the
//! holder remembers the placement, and it knows the record only by the
//! group's hash identity.
//!
//! Randomness comes from the master seed through independent named streams
//! (`hw`, `sharing`, `lambda`, `sss`, `placement`), so changing how one
//! stage consumes randomness never perturbs another.

mod identity;
mod store;
mod trace;

use std::collections::{BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest as _, Sha256};

pub use identity::{hash_identity, Digest, HwId, NodeIdentity};
pub use store::{NodeFile, RegistryFile, REGISTRY_FILE};
pub use trace::{Payload, Recipients, RepairTrace, TraceEvent};

use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::group::{self, GroupSpec, WeakRedundancy};
use crate::shamir::{self, Share, SharingParams};

/// How each group's external sub-share is placed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Placement {
    /// Uniform over all nodes outside the group.
    Random,
    /// Uniform, but two groups never host each other's sub-share.
    AntiReciprocal,
    /// Groups 1 and 2 host each other's sub-share; the rest is random.
    /// Worst-case fixture for the threat analysis.
    Reciprocal,
    /// The external sub-share is discarded; no group can repair.
    Withheld,
}

impl Placement {
    pub fn from_flag(anti_reciprocal: bool) -> Self {
        if anti_reciprocal {
            Placement::AntiReciprocal
        } else {
            Placement::Random
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Placement::Random => "random",
            Placement::AntiReciprocal => "anti-reciprocal",
            Placement::Reciprocal => "reciprocal",
            Placement::Withheld => "none",
        }
    }
}

impl std::str::FromStr for Placement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Placement::Random),
            "anti-reciprocal" => Ok(Placement::AntiReciprocal),
            "reciprocal" => Ok(Placement::Reciprocal),
            "none" => Ok(Placement::Withheld),
            other => Err(Error::Config(format!("unknown placement {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetupConfig {
    pub k: usize,
    pub n: usize,
    pub m: usize,
    pub modulus: u64,
    pub secret: u64,
    pub seed: u64,
    pub placement: Placement,
}

impl SetupConfig {
    /// The (8, 12) system with three groups of four over `GF(2^31 - 1)`.
    pub fn toy(secret: u64, seed: u64) -> Self {
        SetupConfig {
            k: 8,
            n: 12,
            m: 3,
            modulus: crate::field::MERSENNE_31,
            secret,
            seed,
            placement: Placement::Random,
        }
    }

    pub fn with_placement(mut self, placement: Placement) -> Self {
        self.placement = placement;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParticipantRecord {
    pub id: usize,
    pub x: Fe,
    pub hw_id: HwId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupRecord {
    pub id: usize,
    pub members: Vec<usize>,
    pub x_lambda: Fe,
    pub sss_x: Vec<Fe>,
    pub digest: Digest,
}

impl GroupRecord {
    pub fn spec(&self) -> GroupSpec {
        GroupSpec {
            id: self.id,
            members: self.members.clone(),
        }
    }

    pub fn gamma(&self) -> usize {
        self.members.len()
    }
}

/// Everything public: field, parameters, x-assignments, hash identities.
/// Holds no y-values and no holder locations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicRegistry {
    pub field: Field,
    pub k: usize,
    pub n: usize,
    pub m: usize,
    pub participants: Vec<ParticipantRecord>,
    pub groups: Vec<GroupRecord>,
}

impl PublicRegistry {
    pub fn participant(&self, id: usize) -> Result<&ParticipantRecord> {
        id.checked_sub(1)
            .and_then(|i| self.participants.get(i))
            .ok_or(Error::UnknownParticipant(id))
    }

    pub fn group_of(&self, participant: usize) -> Result<&GroupRecord> {
        self.groups
            .iter()
            .find(|g| g.members.contains(&participant))
            .ok_or(Error::UnknownParticipant(participant))
    }

    pub fn group_by_digest(&self, digest: &Digest) -> Option<&GroupRecord> {
        self.groups.iter().find(|g| &g.digest == digest)
    }

    pub fn gamma(&self) -> usize {
        self.n / self.m
    }
}

/// An externally placed sub-share, known to its holder only by digest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HostedRecord {
    pub digest: Digest,
    pub subshare: Share,
}

/// Private storage of one node. `None` shares mean the node has failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeStore {
    pub identity: NodeIdentity,
    pub primary: Option<Share>,
    pub subshare: Option<Share>,
    pub hosted: Vec<HostedRecord>,
}

impl NodeStore {
    pub fn is_failed(&self) -> bool {
        self.primary.is_none()
    }

    /// Private field elements held: primary y, own sub-share y, hosted y's.
    pub fn private_elements(&self) -> usize {
        self.primary.is_some() as usize + self.subshare.is_some() as usize + self.hosted.len()
    }

    pub fn own_role_elements(&self) -> usize {
        self.primary.is_some() as usize + self.subshare.is_some() as usize
    }
}

/// Result of a successful repair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepairOutcome {
    pub share: Share,
    pub subshare: Share,
    pub trace: RepairTrace,
}

/// Responder to a holder lookup.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HolderResponse {
    pub holder: usize,
    pub subshare: Share,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemState {
    registry: PublicRegistry,
    nodes: Vec<NodeStore>,
    withheld_acks: BTreeSet<usize>,
}

/// Independent ChaCha stream for one named stage.
pub fn substream(seed: u64, label: &str) -> ChaCha20Rng {
    let mut h = Sha256::new();
    h.update(b"lrss/");
    h.update(label.as_bytes());
    h.update(seed.to_le_bytes());
    ChaCha20Rng::from_seed(h.finalize().into())
}

const PLACEMENT_ATTEMPTS: usize = 64;

/// Picks a holder for group `group`'s external sub-share, uniformly among
/// nodes outside the group. `placed[h]` is the holder already chosen for
/// group `h`, if any. With `anti_reciprocal`, nodes of a group whose own
/// sub-share sits inside `group` are excluded.
pub fn place_external<R: Rng + ?Sized>(
    groups: &[GroupSpec],
    group: usize,
    placed: &[Option<usize>],
    anti_reciprocal: bool,
    rng: &mut R,
) -> Result<usize> {
    let own = &groups[group];
    let banned_groups: HashSet<usize> = if anti_reciprocal {
        groups
            .iter()
            .enumerate()
            .filter(|&(h, _)| {
                placed
                    .get(h)
                    .copied()
                    .flatten()
                    .is_some_and(|node| own.contains(node))
            })
            .map(|(h, _)| h)
            .collect()
    } else {
        HashSet::new()
    };
    let candidates: Vec<usize> = groups
        .iter()
        .enumerate()
        .filter(|&(h, _)| h != group && !banned_groups.contains(&h))
        .flat_map(|(_, g)| g.members.iter().copied())
        .collect();
    if candidates.is_empty() {
        return Err(Error::Placement(format!(
            "no admissible holder for group {}",
            own.id
        )));
    }
    Ok(candidates[rng.gen_range(0..candidates.len())])
}

/// Holder choice per group under `policy`. `None` means withheld.
fn plan_placement<R: Rng + ?Sized>(
    groups: &[GroupSpec],
    policy: Placement,
    rng: &mut R,
) -> Result<Vec<Option<usize>>> {
    let m = groups.len();
    match policy {
        Placement::Withheld => Ok(vec![None; m]),
        Placement::Random => {
            let mut placed = vec![None; m];
            for g in 0..m {
                placed[g] = Some(place_external(groups, g, &placed, false, rng)?);
            }
            Ok(placed)
        }
        Placement::Reciprocal => {
            if m < 2 {
                return Err(Error::Placement(
                    "reciprocal placement needs two groups".into(),
                ));
            }
            let mut placed = vec![None; m];
            let pick = |g: &GroupSpec, rng: &mut R| g.members[rng.gen_range(0..g.gamma())];
            placed[0] = Some(pick(&groups[1], rng));
            placed[1] = Some(pick(&groups[0], rng));
            for g in 2..m {
                placed[g] = Some(place_external(groups, g, &placed, false, rng)?);
            }
            Ok(placed)
        }
        Placement::AntiReciprocal => {
            let mut last_err = None;
            // sequential draws can paint themselves into a corner; redraw
            for _ in 0..PLACEMENT_ATTEMPTS {
                let mut placed = vec![None; m];
                let mut ok = true;
                for g in 0..m {
                    match place_external(groups, g, &placed, true, rng) {
                        Ok(node) => placed[g] = Some(node),
                        Err(e) => {
                            last_err = Some(e);
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    return Ok(placed);
                }
            }
            Err(last_err.unwrap_or_else(|| Error::Placement("no groups".into())))
        }
    }
}

impl SystemState {
    /// Builds a complete system from `config`. Deterministic in the seed.
    pub fn setup(config: &SetupConfig) -> Result<Self> {
        let SetupConfig {
            k, n, m, modulus, ..
        } = *config;
        let field = Field::new(modulus)?;
        if k == 0 || k > n {
            return Err(Error::Config(format!(
                "need 1 <= k <= n, got k = {k}, n = {n}"
            )));
        }
        let groups = group::partition(n, m)?;
        if (modulus as u128) <= (n + m + 2) as u128 {
            return Err(Error::Config(format!(
                "modulus {modulus} must exceed n + m + 2 = {}",
                n + m + 2
            )));
        }
        let gamma = n / m;

        let mut hw_rng = substream(config.seed, "hw");
        let mut seen = HashSet::new();
        let hw_ids: Vec<HwId> = (0..n)
            .map(|_| loop {
                let id = HwId::new(hw_rng.gen());
                if seen.insert(id) {
                    break id;
                }
            })
            .collect();

        let secret = field.element(config.secret);
        let params = SharingParams::sequential(field, k, n)?;
        let shares = shamir::split(secret, &params, &mut substream(config.seed, "sharing"))?;

        let mut lambda_rng = substream(config.seed, "lambda");
        let mut sss_rng = substream(config.seed, "sss");
        let mut group_states = Vec::with_capacity(m);
        for spec in &groups {
            let member_shares: Vec<Share> = spec.members.iter().map(|&p| shares[p - 1]).collect();
            group_states.push(group::setup_group(
                spec.clone(),
                &member_shares,
                &mut lambda_rng,
                &mut sss_rng,
            )?);
        }

        let participants: Vec<ParticipantRecord> = (1..=n)
            .map(|id| ParticipantRecord {
                id,
                x: params.xs()[id - 1],
                hw_id: hw_ids[id - 1],
            })
            .collect();
        let group_records: Vec<GroupRecord> = group_states
            .iter()
            .map(|gs| GroupRecord {
                id: gs.spec.id,
                members: gs.spec.members.clone(),
                x_lambda: gs.x_lambda,
                sss_x: gs.sss_xs(),
                digest: hash_identity(
                    &gs.spec
                        .members
                        .iter()
                        .map(|&p| hw_ids[p - 1])
                        .collect::<Vec<_>>(),
                ),
            })
            .collect();

        let mut nodes: Vec<NodeStore> = (1..=n)
            .map(|id| NodeStore {
                identity: NodeIdentity {
                    node_id: id,
                    hw_id: hw_ids[id - 1],
                },
                primary: Some(shares[id - 1]),
                subshare: None,
                hosted: Vec::new(),
            })
            .collect();
        for gs in &group_states {
            for (pos, &p) in gs.spec.members.iter().enumerate() {
                nodes[p - 1].subshare = Some(gs.member_subshare(pos));
            }
        }

        let plan = plan_placement(
            &groups,
            config.placement,
            &mut substream(config.seed, "placement"),
        )?;
        for (g, holder) in plan.into_iter().enumerate() {
            if let Some(holder) = holder {
                nodes[holder - 1].hosted.push(HostedRecord {
                    digest: group_records[g].digest,
                    subshare: group_states[g].external_subshare(),
                });
            }
        }
        debug_assert_eq!(gamma, group_states[0].sss_threshold());

        Ok(SystemState {
            registry: PublicRegistry {
                field,
                k,
                n,
                m,
                participants,
                groups: group_records,
            },
            nodes,
            withheld_acks: BTreeSet::new(),
        })
    }

    pub(crate) fn from_parts(registry: PublicRegistry, nodes: Vec<NodeStore>) -> Self {
        SystemState {
            registry,
            nodes,
            withheld_acks: BTreeSet::new(),
        }
    }

    pub fn registry(&self) -> &PublicRegistry {
        &self.registry
    }

    pub fn field(&self) -> Field {
        self.registry.field
    }

    pub fn nodes(&self) -> &[NodeStore] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> Result<&NodeStore> {
        id.checked_sub(1)
            .and_then(|i| self.nodes.get(i))
            .ok_or(Error::UnknownParticipant(id))
    }

    fn node_mut(&mut self, id: usize) -> Result<&mut NodeStore> {
        id.checked_sub(1)
            .and_then(|i| self.nodes.get_mut(i))
            .ok_or(Error::UnknownParticipant(id))
    }

    pub fn identity(&self, id: usize) -> Result<NodeIdentity> {
        Ok(self.node(id)?.identity)
    }

    /// Node currently hosting group `group_id`'s external sub-share.
    /// Omniscient view for analysis and tests; no protocol step uses it.
    pub fn holder_of(&self, group_id: usize) -> Option<usize> {
        let digest = self
            .registry
            .groups
            .iter()
            .find(|g| g.id == group_id)?
            .digest;
        self.nodes
            .iter()
            .find(|n| n.hosted.iter().any(|h| h.digest == digest))
            .map(|n| n.identity.node_id)
    }

    /// Removes every hosted record and re-places the external sub-shares
    /// on `holders[g]` (`None` = withheld). The sub-shares are recovered
    /// from the current hosted records.
    pub fn replace_holders(&mut self, holders: &[Option<usize>]) -> Result<()> {
        let mut externals = Vec::new();
        for g in &self.registry.groups {
            let record = self
                .nodes
                .iter()
                .flat_map(|n| n.hosted.iter())
                .find(|h| h.digest == g.digest)
                .cloned()
                .ok_or_else(|| Error::HolderLost {
                    digest: g.digest.to_hex(),
                })?;
            externals.push(record);
        }
        for (g, holder) in holders.iter().enumerate() {
            if let Some(h) = holder {
                if self.registry.groups[g].members.contains(h) {
                    return Err(Error::Placement(format!(
                        "node {h} belongs to group {}",
                        self.registry.groups[g].id
                    )));
                }
                self.node(*h)?;
            }
        }
        for node in &mut self.nodes {
            node.hosted.clear();
        }
        for (record, holder) in externals.into_iter().zip(holders) {
            if let Some(h) = holder {
                self.nodes[h - 1].hosted.push(record);
            }
        }
        Ok(())
    }

    /// Erases all private data on node `id`, including anything it hosts.
    /// The hardware id is kept: a replacement inherits it.
    pub fn fail(&mut self, id: usize) -> Result<()> {
        let node = self.node_mut(id)?;
        if node.is_failed() {
            return Err(Error::AlreadyFailed(id));
        }
        node.primary = None;
        node.subshare = None;
        node.hosted.clear();
        Ok(())
    }

    /// Simulation knob: `id` refuses (or resumes) acking repair requests.
    pub fn set_withhold_ack(&mut self, id: usize, withhold: bool) {
        if withhold {
            self.withheld_acks.insert(id);
        } else {
            self.withheld_acks.remove(&id);
        }
    }

    pub fn total_private_elements(&self) -> usize {
        self.nodes.iter().map(NodeStore::private_elements).sum()
    }

    /// Broadcasts `digest`; every live node checks its hosted records.
    pub fn lookup_holder(&self, digest: &Digest) -> Result<HolderResponse> {
        let mut responders = self.nodes.iter().filter_map(|n| {
            n.hosted
                .iter()
                .find(|h| &h.digest == digest)
                .map(|h| HolderResponse {
                    holder: n.identity.node_id,
                    subshare: h.subshare,
                })
        });
        let first = responders.next().ok_or_else(|| Error::HolderLost {
            digest: digest.to_hex(),
        })?;
        if let Some(second) = responders.next() {
            return Err(Error::Integrity(format!(
                "nodes {} and {} both answer digest {}",
                first.holder,
                second.holder,
                digest.short()
            )));
        }
        Ok(first)
    }

    /// Runs the repair protocol for `failed`, proposed by `proposer`.
    ///
    /// The proposer authenticates by hardware id, every surviving group
    /// member acks, the group digest is broadcast, the holder answers with
    /// the external sub-share and the members send their points directly
    /// to the proposer, which interpolates locally. The repaired share is
    /// delivered to the proposer alone, and its sub-share is restored too.
    pub fn request_repair(
        &mut self,
        proposer: NodeIdentity,
        failed: usize,
    ) -> Result<RepairOutcome> {
        let registered = self.registry.participant(failed)?.clone();
        if proposer.node_id != failed || proposer.hw_id != registered.hw_id {
            return Err(Error::Authorization(format!(
                "node {} ({}) may not request repair of participant {failed}",
                proposer.node_id, proposer.hw_id
            )));
        }
        if !self.node(failed)?.is_failed() {
            return Err(Error::NotFailed(failed));
        }
        let group = self.registry.group_of(failed)?.clone();
        let gamma = group.gamma();
        let others: Vec<usize> = group
            .members
            .iter()
            .copied()
            .filter(|&p| p != failed)
            .collect();
        let live: Vec<usize> = others
            .iter()
            .copied()
            .filter(|&p| !self.nodes[p - 1].is_failed())
            .collect();
        if live.len() < others.len() {
            return Err(Error::InsufficientPoints {
                need: gamma,
                have: live.len() + 1,
            });
        }

        let mut trace = RepairTrace::default();
        trace.push(
            failed,
            Recipients::Nodes(others.clone()),
            Payload::Request {
                group: group.id,
                failed,
            },
        );
        for &p in &others {
            if self.withheld_acks.contains(&p) {
                return Err(Error::Authorization(format!(
                    "member {p} did not authorize the repair"
                )));
            }
            trace.push(p, Recipients::Nodes(vec![failed]), Payload::Ack);
        }

        trace.push(
            failed,
            Recipients::Broadcast,
            Payload::HolderLookup {
                digest: group.digest,
            },
        );
        let response = self.lookup_holder(&group.digest)?;
        trace.push(
            response.holder,
            Recipients::Nodes(vec![failed]),
            Payload::HolderResponse {
                subshare: response.subshare,
            },
        );

        let mut points = Vec::with_capacity(gamma - 1);
        let mut subshares = Vec::with_capacity(gamma);
        for &p in &others {
            let node = &self.nodes[p - 1];
            let share = node.primary.expect("live member has a share");
            let subshare = node
                .subshare
                .ok_or_else(|| Error::Integrity(format!("member {p} is missing its sub-share")))?;
            trace.push(
                p,
                Recipients::Nodes(vec![failed]),
                Payload::Contribution { share, subshare },
            );
            points.push(share);
            subshares.push(subshare);
        }
        subshares.push(response.subshare);

        let y_lambda = shamir::recover(&subshares, gamma)?;
        let weak = WeakRedundancy {
            x_lambda: group.x_lambda,
            y_lambda,
        };
        trace.push(
            failed,
            Recipients::Nodes(vec![failed]),
            Payload::Interpolation {
                subshares: subshares.len(),
                points: points.len() + 1,
            },
        );
        let y = group::repair_share(&points, &weak, registered.x, gamma)?;
        let share = Share::new(registered.x, y);
        trace.push(
            failed,
            Recipients::Nodes(vec![failed]),
            Payload::Delivery { share },
        );

        let position = group
            .members
            .iter()
            .position(|&p| p == failed)
            .expect("member");
        let subshare = group::restore_subshare(&subshares, group.sss_x[position], gamma)?;
        trace.push(
            failed,
            Recipients::Nodes(vec![failed]),
            Payload::SubshareRestored { subshare },
        );

        let node = &mut self.nodes[failed - 1];
        node.primary = Some(share);
        node.subshare = Some(subshare);
        Ok(RepairOutcome {
            share,
            subshare,
            trace,
        })
    }

    /// Recovers the global secret from the listed participants' shares.
    pub fn recover_secret(&self, participants: &[usize]) -> Result<Fe> {
        let mut ids = participants.to_vec();
        ids.sort_unstable();
        ids.dedup();
        let mut shares = Vec::with_capacity(ids.len());
        for id in ids {
            let node = self.node(id)?;
            shares.push(node.primary.ok_or(Error::ParticipantFailed(id))?);
        }
        shamir::recover(&shares, self.registry.k)
    }
}
