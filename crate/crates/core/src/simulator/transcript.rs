use std::io::Write;

use serde::Serialize;

use crate::codec::SymbolVector;
use crate::error::Result;
use crate::model::NodeId;

use super::groups::Subsystem;

/// One multicast transmission: coded row `row` of the batch identified by
/// `(subsystem, subset, sender)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Record {
    pub subsystem: Subsystem,
    pub sender: NodeId,
    pub recipients: Vec<NodeId>,
    pub subset: Vec<NodeId>,
    pub row: usize,
    /// Unpadded bits; this is what the communication load counts.
    pub bits: usize,
    pub padding_bits: usize,
    pub payload: SymbolVector,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    pub records: Vec<Record>,
}

/// Deliberate transcript corruption for exercising the verification path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Flip the leading payload bit of a record.
    FlipBit { record: usize },
    /// Lose a record in transit.
    DropRecord { record: usize },
}

#[derive(Serialize)]
struct ExportLine<'a> {
    sender: NodeId,
    recipients: &'a [NodeId],
    subset: &'a [NodeId],
    bits: usize,
    subsystem: u8,
    row: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    payload: Option<String>,
}

impl Transcript {
    pub fn extend(&mut self, other: Transcript) {
        self.records.extend(other.records);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn total_bits(&self) -> usize {
        self.records.iter().map(|r| r.bits).sum()
    }

    pub fn bits_of(&self, subsystem: Subsystem) -> usize {
        self.records.iter().filter(|r| r.subsystem == subsystem).map(|r| r.bits).sum()
    }

    pub fn padding_bits(&self) -> usize {
        self.records.iter().map(|r| r.padding_bits).sum()
    }

    /// Applies `fault`; returns false when the record index is out of range.
    pub fn inject(&mut self, fault: Fault, w: u32) -> bool {
        match fault {
            Fault::FlipBit { record } => match self.records.get_mut(record) {
                Some(r) if !r.payload.elems.is_empty() => {
                    r.payload.elems[0] ^= 1 << (w - 1);
                    true
                }
                _ => false,
            },
            Fault::DropRecord { record } => {
                if record < self.records.len() {
                    self.records.remove(record);
                    true
                } else {
                    false
                }
            }
        }
    }

    /// Writes one JSON object per record; with `with_payload`, the padded
    /// payload is included as big-endian hex of its `w`-bit words.
    pub fn write_json_lines(&self, mut out: impl Write, w: u32, with_payload: bool) -> Result<()> {
        for r in &self.records {
            let payload = with_payload.then(|| {
                let bytes: Vec<u8> = r
                    .payload
                    .elems
                    .iter()
                    .flat_map(|&e| {
                        let be = e.to_be_bytes();
                        be[4 - (w as usize / 8)..].to_vec()
                    })
                    .collect();
                hex::encode(bytes)
            });
            let line = ExportLine {
                sender: r.sender,
                recipients: &r.recipients,
                subset: &r.subset,
                bits: r.bits,
                subsystem: r.subsystem.index(),
                row: r.row,
                payload,
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}
