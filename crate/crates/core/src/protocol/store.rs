//! On-disk format: `registry.json` plus one `node-NNN.json` per node.
//! Field elements are decimal strings; digests are lowercase hex.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    Digest, GroupRecord, HostedRecord, HwId, NodeIdentity, NodeStore, ParticipantRecord,
    PublicRegistry, SystemState,
};
use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::shamir::Share;

pub const REGISTRY_FILE: &str = "registry.json";

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct RegistryFile {
    pub modulus: String,
    pub k: usize,
    pub n: usize,
    pub m: usize,
    pub participants: Vec<ParticipantEntry>,
    pub groups: Vec<GroupEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ParticipantEntry {
    pub id: usize,
    pub x: String,
    pub hw_id: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct GroupEntry {
    pub id: usize,
    pub members: Vec<usize>,
    pub x_lambda: String,
    pub sss_x: Vec<String>,
    pub digest_hex: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct PointEntry {
    pub x: String,
    pub y: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct HostedEntry {
    pub digest_hex: String,
    pub subshare: PointEntry,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct NodeFile {
    pub id: usize,
    pub y: Option<String>,
    pub sss_subshare: Option<PointEntry>,
    pub hosted: Vec<HostedEntry>,
}

fn parse_fe(field: Field, s: &str) -> Result<Fe> {
    let v: u64 = s
        .parse()
        .map_err(|_| Error::Format(format!("bad field element {s:?}")))?;
    if v >= field.modulus() {
        return Err(Error::Format(format!("field element {v} not reduced")));
    }
    Ok(field.element(v))
}

impl PointEntry {
    fn from_share(s: &Share) -> Self {
        PointEntry {
            x: s.x.to_string(),
            y: s.y.to_string(),
        }
    }

    fn to_share(&self, field: Field) -> Result<Share> {
        Ok(Share::new(
            parse_fe(field, &self.x)?,
            parse_fe(field, &self.y)?,
        ))
    }
}

impl From<&PublicRegistry> for RegistryFile {
    fn from(r: &PublicRegistry) -> Self {
        RegistryFile {
            modulus: r.field.modulus().to_string(),
            k: r.k,
            n: r.n,
            m: r.m,
            participants: r
                .participants
                .iter()
                .map(|p| ParticipantEntry {
                    id: p.id,
                    x: p.x.to_string(),
                    hw_id: p.hw_id.to_string(),
                })
                .collect(),
            groups: r
                .groups
                .iter()
                .map(|g| GroupEntry {
                    id: g.id,
                    members: g.members.clone(),
                    x_lambda: g.x_lambda.to_string(),
                    sss_x: g.sss_x.iter().map(Fe::to_string).collect(),
                    digest_hex: g.digest.to_hex(),
                })
                .collect(),
        }
    }
}

impl RegistryFile {
    pub fn to_registry(&self) -> Result<PublicRegistry> {
        let modulus: u64 = self
            .modulus
            .parse()
            .map_err(|_| Error::Format(format!("bad modulus {:?}", self.modulus)))?;
        let field = Field::new(modulus)?;
        if self.participants.len() != self.n || self.groups.len() != self.m {
            return Err(Error::Format("participant or group count mismatch".into()));
        }
        let participants = self
            .participants
            .iter()
            .enumerate()
            .map(|(i, p)| {
                if p.id != i + 1 {
                    return Err(Error::Format(format!("participant {} out of order", p.id)));
                }
                Ok(ParticipantRecord {
                    id: p.id,
                    x: parse_fe(field, &p.x)?,
                    hw_id: p.hw_id.parse::<HwId>()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let groups = self
            .groups
            .iter()
            .map(|g| {
                Ok(GroupRecord {
                    id: g.id,
                    members: g.members.clone(),
                    x_lambda: parse_fe(field, &g.x_lambda)?,
                    sss_x: g
                        .sss_x
                        .iter()
                        .map(|s| parse_fe(field, s))
                        .collect::<Result<_>>()?,
                    digest: Digest::from_hex(&g.digest_hex)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PublicRegistry {
            field,
            k: self.k,
            n: self.n,
            m: self.m,
            participants,
            groups,
        })
    }
}

impl From<&NodeStore> for NodeFile {
    fn from(n: &NodeStore) -> Self {
        NodeFile {
            id: n.identity.node_id,
            y: n.primary.map(|s| s.y.to_string()),
            sss_subshare: n.subshare.as_ref().map(PointEntry::from_share),
            hosted: n
                .hosted
                .iter()
                .map(|h| HostedEntry {
                    digest_hex: h.digest.to_hex(),
                    subshare: PointEntry::from_share(&h.subshare),
                })
                .collect(),
        }
    }
}

impl NodeFile {
    fn to_store(&self, registry: &PublicRegistry) -> Result<NodeStore> {
        let field = registry.field;
        let p = registry.participant(self.id)?;
        Ok(NodeStore {
            identity: NodeIdentity {
                node_id: p.id,
                hw_id: p.hw_id,
            },
            primary: self
                .y
                .as_deref()
                .map(|y| Ok::<_, Error>(Share::new(p.x, parse_fe(field, y)?)))
                .transpose()?,
            subshare: self
                .sss_subshare
                .as_ref()
                .map(|e| e.to_share(field))
                .transpose()?,
            hosted: self
                .hosted
                .iter()
                .map(|h| {
                    Ok(HostedRecord {
                        digest: Digest::from_hex(&h.digest_hex)?,
                        subshare: h.subshare.to_share(field)?,
                    })
                })
                .collect::<Result<_>>()?,
        })
    }
}

pub fn node_file_name(id: usize) -> String {
    format!("node-{id:03}.json")
}

impl SystemState {
    pub fn registry_json(&self) -> String {
        serde_json::to_string_pretty(&RegistryFile::from(self.registry()))
            .expect("registry serializes")
    }

    pub fn node_json(&self, id: usize) -> Result<String> {
        Ok(serde_json::to_string_pretty(&NodeFile::from(
            self.node(id)?,
        ))?)
    }

    /// Writes the registry and every node file into `dir`, creating it.
    pub fn save(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::with_capacity(self.nodes().len() + 1);
        let reg = dir.join(REGISTRY_FILE);
        fs::write(&reg, self.registry_json() + "\n")?;
        written.push(reg);
        for node in self.nodes() {
            let path = dir.join(node_file_name(node.identity.node_id));
            fs::write(&path, self.node_json(node.identity.node_id)? + "\n")?;
            written.push(path);
        }
        Ok(written)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let reg_text = fs::read_to_string(dir.join(REGISTRY_FILE))?;
        let registry = serde_json::from_str::<RegistryFile>(&reg_text)?.to_registry()?;
        let mut nodes = Vec::with_capacity(registry.n);
        for id in 1..=registry.n {
            let text = fs::read_to_string(dir.join(node_file_name(id)))?;
            let file: NodeFile = serde_json::from_str(&text)?;
            if file.id != id {
                return Err(Error::Format(format!(
                    "{} holds node {}",
                    node_file_name(id),
                    file.id
                )));
            }
            nodes.push(file.to_store(&registry)?);
        }
        Ok(SystemState::from_parts(registry, nodes))
    }
}
