use std::fmt;
use std::str::FromStr;

use sha2::{Digest as _, Sha256};

use crate::error::Error;

/// 48-bit hardware identifier, MAC-style.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HwId(u64);

impl HwId {
    pub const MASK: u64 = (1 << 48) - 1;

    pub fn new(raw: u64) -> Self {
        HwId(raw & Self::MASK)
    }

    pub fn raw(&self) -> u64 {
        self.0
    }

    pub fn to_be_bytes(self) -> [u8; 6] {
        let b = self.0.to_be_bytes();
        [b[2], b[3], b[4], b[5], b[6], b[7]]
    }
}

impl fmt::Display for HwId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = self.to_be_bytes();
        write!(
            f,
            "{:02x}:{:02x}:{:02x}:{:02x}:{:02x}:{:02x}",
            b[0], b[1], b[2], b[3], b[4], b[5]
        )
    }
}

impl FromStr for HwId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 6 {
            return Err(Error::Format(format!("bad hardware id {s:?}")));
        }
        let mut raw = 0u64;
        for p in parts {
            let byte = u8::from_str_radix(p, 16)
                .map_err(|_| Error::Format(format!("bad hardware id {s:?}")))?;
            raw = raw << 8 | byte as u64;
        }
        Ok(HwId(raw))
    }
}

/// A participant's public identity: its index and its hardware id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NodeIdentity {
    pub node_id: usize,
    pub hw_id: HwId,
}

/// SHA-256 group identity.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digest(pub [u8; 32]);

impl Digest {
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self, Error> {
        let mut out = [0u8; 32];
        hex::decode_to_slice(s, &mut out)
            .map_err(|e| Error::Format(format!("bad digest {s:?}: {e}")))?;
        Ok(Digest(out))
    }

    /// First 8 hex characters, for trace summaries.
    pub fn short(&self) -> String {
        hex::encode(&self.0[..4])
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", self.to_hex())
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Hash identity of a group: SHA-256 over the members' hardware ids sorted
/// ascending, each as 6 big-endian bytes, concatenated.
pub fn hash_identity(member_hw_ids: &[HwId]) -> Digest {
    let mut ids = member_hw_ids.to_vec();
    ids.sort_unstable();
    let mut hasher = Sha256::new();
    for id in ids {
        hasher.update(id.to_be_bytes());
    }
    Digest(hasher.finalize().into())
}
