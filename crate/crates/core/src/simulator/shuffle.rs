use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use rayon::prelude::*;

use crate::codec::{decode_vandermonde, encode_vandermonde, Bits, Field, SymbolVector};
use crate::error::{Error, Result};
use crate::math::{binom_usize, subsets};
use crate::model::{Allocation, NodeId, Placement, ReduceAssignment, TaskParams, Violation};

use super::groups::{build_group, Subsystem, ValueGroup};
use super::transcript::{Record, Transcript};
use super::IvStore;

/// Sizes of the subsets `S` that carry traffic for replication `r`.
fn subset_sizes(r: usize, s: usize, ks: usize) -> std::ops::RangeInclusive<usize> {
    (r + 1).max(s)..=(r + s).min(ks)
}

/// Solver-subsystem batch of sender `j` within `subset`: every `r1`-subset
/// `S1` of `subset` containing `j`, in lexicographic order, with the position
/// of `j` in `S1` (its sub-segment index).
fn cdc_layout(subset: &[NodeId], r1: usize, j: NodeId) -> Vec<(Vec<NodeId>, usize)> {
    subsets(subset, r1).into_iter().filter_map(|s1| s1.iter().position(|&k| k == j).map(|pos| (s1, pos))).collect()
}

fn sub_segment(payload: &Bits, r1: usize, pos: usize) -> Bits {
    let len = payload.len() / r1;
    payload[pos * len..(pos + 1) * len].to_bitvec()
}

struct Context<'a> {
    store: &'a IvStore,
    placement: &'a Placement,
    assignment: &'a ReduceAssignment,
    field: &'a Field,
}

impl Context<'_> {
    fn group(
        &self,
        subsystem: Subsystem,
        subset: &[NodeId],
        s1: &[NodeId],
        helper: Option<NodeId>,
    ) -> Result<ValueGroup> {
        build_group(subsystem, subset, s1, helper, self.assignment, self.placement)
    }

    fn symbol(&self, bits: &Bits) -> SymbolVector {
        SymbolVector::from_bits(bits, self.field.w())
    }
}

fn records_for(
    subsystem: Subsystem,
    sender: NodeId,
    recipients: Vec<NodeId>,
    subset: &[NodeId],
    coded: Vec<SymbolVector>,
    w: u32,
) -> Vec<Record> {
    coded
        .into_iter()
        .enumerate()
        .map(|(row, payload)| Record {
            subsystem,
            sender,
            recipients: recipients.clone(),
            subset: subset.to_vec(),
            row,
            bits: payload.bit_len,
            padding_bits: payload.padding_bits(w),
            payload,
        })
        .collect()
}

fn cdc_subset(ctx: &Context, subset: &[NodeId], r1: usize) -> Result<Vec<Record>> {
    let l = subset.len();
    let n2 = binom_usize(l - 2, r1 - 1);
    let mut out = Vec::new();
    for &j in subset {
        let layout = cdc_layout(subset, r1, j);
        let mut symbols = Vec::with_capacity(layout.len());
        for (s1, pos) in &layout {
            let payload = ctx.group(Subsystem::Solver, subset, s1, None)?.payload(ctx.store, j)?;
            symbols.push(ctx.symbol(&sub_segment(&payload, r1, *pos)));
        }
        let alphas = ctx.field.alphas(symbols.len())?;
        let coded = encode_vandermonde(ctx.field, &symbols, n2, &alphas)?;
        let recipients = subset.iter().copied().filter(|&k| k != j).collect();
        out.extend(records_for(Subsystem::Solver, j, recipients, subset, coded, ctx.field.w()));
    }
    Ok(out)
}

fn acdc_subset(ctx: &Context, subset: &[NodeId], r2: usize, helper: NodeId) -> Result<Vec<Record>> {
    let l = subset.len();
    let n2 = binom_usize(l - 1, r2);
    let mut symbols = Vec::new();
    for s1 in subsets(subset, r2) {
        let payload = ctx.group(Subsystem::Helper, subset, &s1, Some(helper))?.payload(ctx.store, helper)?;
        symbols.push(ctx.symbol(&payload));
    }
    let alphas = ctx.field.alphas(symbols.len())?;
    let coded = encode_vandermonde(ctx.field, &symbols, n2, &alphas)?;
    Ok(records_for(Subsystem::Helper, helper, subset.to_vec(), subset, coded, ctx.field.w()))
}

/// Solver-subsystem shuffle. Within each subset `S` of size `l`, every
/// value group is split into `r1` sub-segments, one per member of its `S1`;
/// each sender multicasts `C(l-2, r1-1)` Vandermonde combinations of its
/// `C(l-1, r1-1)` sub-segments to the rest of `S`.
pub fn shuffle_cdc(
    store: &IvStore,
    placement: &Placement,
    assignment: &ReduceAssignment,
    alloc: &Allocation,
    task: &TaskParams,
    field: &Field,
) -> Result<Transcript> {
    if alloc.alpha.is_zero() || placement.n1 == 0 {
        return Ok(Transcript::default());
    }
    let r1 = alloc.r1;
    if r1 == 0 || !task.v.is_multiple_of(r1) {
        return Err(Error::Divisibility(vec![Violation::SubSegments { r1, v: task.v }]));
    }
    let ctx = Context { store, placement, assignment, field };
    let solvers = alloc.solvers();
    let all: Vec<Vec<NodeId>> = subset_sizes(r1, task.s, alloc.ks).flat_map(|l| subsets(&solvers, l)).collect();
    let chunks = all.par_iter().map(|subset| cdc_subset(&ctx, subset, r1)).collect::<Result<Vec<_>>>()?;
    Ok(Transcript { records: chunks.into_iter().flatten().collect() })
}

/// Helper-subsystem shuffle: for each subset `S` of size `l` and each
/// helper, the helper multicasts `C(l-1, r2)` combinations of the `C(l, r2)`
/// groups it mapped for `S`; solvers send nothing.
pub fn shuffle_acdc(
    store: &IvStore,
    placement: &Placement,
    assignment: &ReduceAssignment,
    alloc: &Allocation,
    task: &TaskParams,
    field: &Field,
) -> Result<Transcript> {
    if alloc.alpha >= num_traits::One::one() || placement.n1 == placement.n {
        return Ok(Transcript::default());
    }
    let ctx = Context { store, placement, assignment, field };
    let solvers = alloc.solvers();
    let helpers = alloc.helpers();
    let jobs: Vec<(Vec<NodeId>, NodeId)> = subset_sizes(alloc.r2, task.s, alloc.ks)
        .flat_map(|l| subsets(&solvers, l))
        .flat_map(|subset| helpers.iter().map(move |&h| (subset.clone(), h)))
        .collect();
    let chunks =
        jobs.par_iter().map(|(subset, h)| acdc_subset(&ctx, subset, alloc.r2, *h)).collect::<Result<Vec<_>>>()?;
    Ok(Transcript { records: chunks.into_iter().flatten().collect() })
}

/// Outcome of decoding every received batch.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DeliveryReport {
    /// `(receiver, sender)` decodes that succeeded.
    pub decoded: usize,
    /// Human-readable reasons for each decode that could not complete.
    pub failures: Vec<String>,
    /// Intermediate values written into receivers' stores.
    pub values_delivered: usize,
}

type BatchKey = (Subsystem, Vec<NodeId>, NodeId);
/// `(q, n)` of an intermediate value.
type ValueId = (usize, usize);
/// `(S, S1)` of a solver group.
type GroupKey = (Vec<NodeId>, Vec<NodeId>);

/// Values a receiver recovered from one batch.
enum Recovered {
    Values(Vec<(ValueId, Bits)>),
    /// Sub-segment `pos` of the solver group `(S, S1)`.
    Pieces(Vec<(GroupKey, usize, Bits)>),
}

fn split_values(group: &ValueGroup, payload: &Bits, v: usize) -> Vec<(ValueId, Bits)> {
    group.members.iter().enumerate().map(|(i, &m)| (m, payload[i * v..(i + 1) * v].to_bitvec())).collect()
}

fn decode_batch(
    ctx: &Context,
    key: &BatchKey,
    rows: &[&Record],
    receiver: NodeId,
    alloc: &Allocation,
    task: &TaskParams,
) -> Result<Recovered> {
    let (subsystem, subset, sender) = key;
    let w = ctx.field.w();
    if rows.iter().enumerate().any(|(i, r)| r.row != i) {
        return Err(Error::DecodeFailure(format!("batch from node {sender} to {subset:?} is missing coded rows")));
    }
    let coded: Vec<SymbolVector> = rows.iter().map(|r| r.payload.clone()).collect();
    match subsystem {
        Subsystem::Solver => {
            let layout = cdc_layout(subset, alloc.r1, *sender);
            let mut known = BTreeMap::new();
            let mut unknown = Vec::new();
            let mut sub_len = 0;
            for (idx, (s1, pos)) in layout.iter().enumerate() {
                let group = ctx.group(Subsystem::Solver, subset, s1, None)?;
                sub_len = group.members.len() * task.v / alloc.r1;
                if s1.contains(&receiver) {
                    let payload = group.payload(ctx.store, receiver)?;
                    known.insert(idx, ctx.symbol(&sub_segment(&payload, alloc.r1, *pos)));
                } else {
                    unknown.push(idx);
                }
            }
            if unknown.len() != coded.len() {
                return Err(Error::DecodeFailure(format!(
                    "node {receiver} has {} unknown sub-segments but received {} combinations from node {sender}",
                    unknown.len(),
                    coded.len()
                )));
            }
            let alphas = ctx.field.alphas(layout.len())?;
            let decoded = decode_vandermonde(ctx.field, &coded, &alphas, &known)?;
            Ok(Recovered::Pieces(
                unknown
                    .into_iter()
                    .map(|idx| {
                        let (s1, pos) = &layout[idx];
                        let mut bits = decoded[idx].to_bits(w);
                        bits.truncate(sub_len);
                        ((subset.clone(), s1.clone()), *pos, bits)
                    })
                    .collect(),
            ))
        }
        Subsystem::Helper => {
            let s1s = subsets(subset, alloc.r2);
            let mut known = BTreeMap::new();
            let mut groups = Vec::with_capacity(s1s.len());
            for (idx, s1) in s1s.iter().enumerate() {
                let group = ctx.group(Subsystem::Helper, subset, s1, Some(*sender))?;
                if s1.contains(&receiver) {
                    known.insert(idx, ctx.symbol(&group.payload(ctx.store, receiver)?));
                }
                groups.push(group);
            }
            if s1s.len() - known.len() != coded.len() {
                return Err(Error::DecodeFailure(format!(
                    "node {receiver} has {} unknown groups but received {} combinations from helper {sender}",
                    s1s.len() - known.len(),
                    coded.len()
                )));
            }
            let alphas = ctx.field.alphas(s1s.len())?;
            let decoded = decode_vandermonde(ctx.field, &coded, &alphas, &known)?;
            let mut values = Vec::new();
            for (idx, group) in groups.iter().enumerate() {
                if !known.contains_key(&idx) {
                    values.extend(split_values(group, &decoded[idx].to_bits(w), task.v));
                }
            }
            Ok(Recovered::Values(values))
        }
    }
}

/// Decodes every batch at every recipient and writes the recovered values
/// into the recipients' stores. Decoding failures are collected rather than
/// aborting, so that the reduce check can name the resulting holes.
pub fn deliver(
    store: &mut IvStore,
    transcript: &Transcript,
    placement: &Placement,
    assignment: &ReduceAssignment,
    alloc: &Allocation,
    task: &TaskParams,
    field: &Field,
) -> DeliveryReport {
    let mut batches: BTreeMap<BatchKey, Vec<&Record>> = BTreeMap::new();
    for r in &transcript.records {
        batches.entry((r.subsystem, r.subset.clone(), r.sender)).or_default().push(r);
    }
    for rows in batches.values_mut() {
        rows.sort_by_key(|r| r.row);
    }
    let jobs: Vec<(&BatchKey, &Vec<&Record>, NodeId)> = batches
        .iter()
        .flat_map(|(key, rows)| {
            let recipients: BTreeSet<NodeId> = rows.iter().flat_map(|r| r.recipients.iter().copied()).collect();
            recipients.into_iter().map(move |k| (key, rows, k))
        })
        .collect();
    let ctx = Context { store, placement, assignment, field };
    let results: Vec<(NodeId, Result<Recovered>)> =
        jobs.par_iter().map(|(key, rows, k)| (*k, decode_batch(&ctx, key, rows, *k, alloc, task))).collect();

    let mut report = DeliveryReport::default();
    let mut pieces: BTreeMap<(NodeId, GroupKey), BTreeMap<usize, Bits>> = BTreeMap::new();
    let mut inserts = Vec::new();
    for (k, res) in results {
        match res {
            Ok(Recovered::Values(vals)) => {
                report.decoded += 1;
                inserts.extend(vals.into_iter().map(|(m, b)| (k, m, b)));
            }
            Ok(Recovered::Pieces(ps)) => {
                report.decoded += 1;
                for ((subset, s1), pos, bits) in ps {
                    pieces.entry((k, (subset, s1))).or_default().insert(pos, bits);
                }
            }
            Err(e) => report.failures.push(format!("node {k}: {e}")),
        }
    }
    let ctx = Context { store, placement, assignment, field };
    for ((k, (subset, s1)), parts) in pieces {
        if parts.len() != alloc.r1 {
            report.failures.push(format!(
                "node {k}: group {s1:?} within {subset:?} has {} of {} sub-segments",
                parts.len(),
                alloc.r1
            ));
            continue;
        }
        let group = match ctx.group(Subsystem::Solver, &subset, &s1, None) {
            Ok(g) => g,
            Err(e) => {
                report.failures.push(format!("node {k}: {e}"));
                continue;
            }
        };
        let mut payload = Bits::new();
        for bits in parts.values() {
            payload.extend_from_bitslice(bits);
        }
        inserts.extend(split_values(&group, &payload, task.v).into_iter().map(|(m, b)| (k, m, b)));
    }
    report.values_delivered = inserts.len();
    for (k, (q, n), bits) in inserts {
        store.insert(k, q, n, bits);
    }
    report
}
