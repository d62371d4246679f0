//! Bit-exact execution of the hybrid scheme: Map on the placement, coded
//! Shuffle in both subsystems, decoding at every receiver, and Reduce with
//! payload verification and replica agreement.
//!
//! Intermediate values are synthetic: `v(q, n)` is a keyed pseudorandom
//! expansion of `(seed, q, n)`, so any node can recompute the expected bits.

mod groups;
mod shuffle;
mod transcript;

use std::collections::{BTreeMap, HashMap};
use std::hash::Hasher;

use num_traits::{One, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::codec::{Bits, Field};
use crate::error::{Error, Result};
use crate::loads::{exec_time_hybrid_raw, l1, l2, TimeBreakdown};
use crate::math::{frac, int, Rational};
use crate::model::{
    build_hybrid_placement, build_reduce_assignment, peak_computation_load, Allocation, NodeId, Placement,
    ReduceAssignment, SystemParams, TaskParams,
};

pub use groups::{build_group, Subsystem, ValueGroup};
pub use shuffle::{deliver, shuffle_acdc, shuffle_cdc, DeliveryReport};
pub use transcript::{Fault, Record, Transcript};

/// Synthetic `V`-bit intermediate value for reduce function `q` on file `n`.
pub fn iv_payload(seed: u64, q: usize, n: usize, v: usize) -> Bits {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(q as u64).to_le_bytes());
    key[16..24].copy_from_slice(&(n as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    let mut bytes = vec![0u8; v.div_ceil(8)];
    rng.fill_bytes(&mut bytes);
    let mut bits = Bits::from_vec(bytes);
    bits.truncate(v);
    bits
}

/// Intermediate values held by each node, keyed by `(q, n)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IvStore {
    nodes: Vec<HashMap<(usize, usize), Bits>>,
}

impl IvStore {
    pub fn new(node_count: usize) -> Self {
        Self { nodes: vec![HashMap::new(); node_count] }
    }

    pub fn get(&self, node: NodeId, q: usize, n: usize) -> Option<&Bits> {
        self.nodes.get(node.checked_sub(1)?)?.get(&(q, n))
    }

    pub fn insert(&mut self, node: NodeId, q: usize, n: usize, bits: Bits) {
        self.nodes[node - 1].insert((q, n), bits);
    }

    pub fn count(&self, node: NodeId) -> usize {
        node.checked_sub(1).and_then(|i| self.nodes.get(i)).map_or(0, HashMap::len)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

/// Every node maps every file it stores, for all `Q` functions.
pub fn map_phase(placement: &Placement, task: &TaskParams, seed: u64) -> IvStore {
    let nodes = (1..=placement.node_count())
        .into_par_iter()
        .map(|k| {
            placement
                .files_of(k)
                .iter()
                .flat_map(|&n| (1..=task.q).map(move |q| ((q, n), iv_payload(seed, q, n, task.v))))
                .collect()
        })
        .collect();
    IvStore { nodes }
}

/// Reduce outputs, one digest per function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReduceReport {
    pub digests: BTreeMap<usize, u64>,
}

/// Each solver checks it holds the correct `v(q, n)` for every assigned `q`
/// and every file, then hashes `v(q,1) .. v(q,N)`; all replicas of a
/// function must agree.
pub fn reduce_phase(
    store: &IvStore,
    assignment: &ReduceAssignment,
    task: &TaskParams,
    seed: u64,
) -> Result<ReduceReport> {
    let mut digests: BTreeMap<usize, u64> = BTreeMap::new();
    for &k in &assignment.solvers {
        for &q in assignment.functions_of(k) {
            let mut joined = Bits::new();
            for n in 1..=task.n {
                let v = store.get(k, q, n).ok_or(Error::MissingValue { node: k, q, n })?;
                if *v != iv_payload(seed, q, n, task.v) {
                    return Err(Error::PayloadMismatch { node: k, q, n });
                }
                joined.extend_from_bitslice(v);
            }
            let mut h = fnv::FnvHasher::default();
            h.write_u64(joined.len() as u64);
            h.write(joined.as_raw_slice());
            let d = h.finish();
            if let Some(&prev) = digests.get(&q) {
                if prev != d {
                    return Err(Error::ReplicaDisagreement { q });
                }
            }
            digests.insert(q, d);
        }
    }
    Ok(ReduceReport { digests })
}

/// Bits an uncoded shuffle would send: every missing needed value unicast.
pub fn uncoded_bits(placement: &Placement, assignment: &ReduceAssignment, task: &TaskParams) -> usize {
    assignment
        .solvers
        .iter()
        .map(|&k| assignment.functions_of(k).len() * (task.n - placement.files_of(k).len()))
        .sum::<usize>()
        * task.v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimOptions {
    /// Field width for the Vandermonde codes (8 or 16).
    pub w: u32,
    pub fault: Option<Fault>,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { w: 16, fault: None }
    }
}

#[derive(Clone, Debug)]
pub struct SimReport {
    pub alloc: Allocation,
    pub seed: u64,
    pub n1: usize,
    pub n2: usize,
    pub bits1: usize,
    pub bits2: usize,
    pub total_bits: usize,
    /// Field-alignment padding carried by coded symbols, excluded from loads.
    pub padding_bits: usize,
    pub uncoded_bits: usize,
    /// `bits1 / (N1 Q V)`; `None` when the subsystem has no files.
    pub measured_load1: Option<Rational>,
    pub measured_load2: Option<Rational>,
    /// `total_bits / (N Q V)`.
    pub measured_load: Rational,
    /// `alpha l1(r1) + (1 - alpha) l2(r2)`.
    pub predicted_load: Rational,
    pub measured_time: TimeBreakdown,
    pub predicted_time: TimeBreakdown,
    pub decode_ok: bool,
    pub reduce_ok: bool,
    pub delivery: DeliveryReport,
    pub digests: BTreeMap<usize, u64>,
    pub transcript: Transcript,
}

impl SimReport {
    pub fn matches_prediction(&self) -> bool {
        self.measured_load == self.predicted_load && self.measured_time == self.predicted_time
    }
}

/// The placement and reduce assignment a run executes on.
#[derive(Clone, Debug)]
pub struct Layout {
    pub placement: Placement,
    pub assignment: ReduceAssignment,
}

pub fn layout(alloc: &Allocation, task: &TaskParams, k: usize) -> Result<Layout> {
    let placement = build_hybrid_placement(alloc, task, k)?;
    let assignment = build_reduce_assignment(&alloc.solvers(), task.s, task.q)?;
    Ok(Layout { placement, assignment })
}

/// Runs Map, Shuffle, decoding and Reduce, and compares the measured times
/// and loads with the closed-form prediction at raw loads.
pub fn run(
    alloc: &Allocation,
    task: &TaskParams,
    system: &SystemParams,
    seed: u64,
    options: SimOptions,
) -> Result<SimReport> {
    alloc.validate(task, system)?;
    let Layout { placement, assignment } = layout(alloc, task, system.k)?;
    let field = Field::new(options.w)?;
    let mut store = map_phase(&placement, task, seed);

    let mut transcript = shuffle_cdc(&store, &placement, &assignment, alloc, task, &field)?;
    transcript.extend(shuffle_acdc(&store, &placement, &assignment, alloc, task, &field)?);
    if let Some(fault) = options.fault {
        transcript.inject(fault, field.w());
    }
    let delivery = deliver(&mut store, &transcript, &placement, &assignment, alloc, task, &field);
    let reduce = reduce_phase(&store, &assignment, task, seed)?;
    if let Some(first) = delivery.failures.first() {
        return Err(Error::DecodeFailure(first.clone()));
    }

    let (n1, n2) = (placement.n1, task.n - placement.n1);
    let bits1 = transcript.bits_of(Subsystem::Solver);
    let bits2 = transcript.bits_of(Subsystem::Helper);
    let total_bits = bits1 + bits2;
    let qv = task.q * task.v;
    let per = |bits: usize, files: usize| (files > 0).then(|| frac(bits, files * qv));
    let mut predicted_load = Rational::zero();
    if !alloc.alpha.is_zero() {
        predicted_load += &alloc.alpha * l1(alloc.r1, task.s, alloc.ks)?;
    }
    if alloc.alpha < Rational::one() {
        predicted_load += alloc.alpha_bar() * l2(alloc.r2, task.s, alloc.ks)?;
    }
    let measured_load = frac(total_bits, task.n * qv);
    let measured_time = TimeBreakdown::new(
        &system.c_m * peak_computation_load(&placement, task.n),
        &system.c_s * &measured_load,
        &system.c_r * int(assignment.max_load()),
    );
    Ok(SimReport {
        alloc: alloc.clone(),
        seed,
        n1,
        n2,
        bits1,
        bits2,
        total_bits,
        padding_bits: transcript.padding_bits(),
        uncoded_bits: uncoded_bits(&placement, &assignment, task),
        measured_load1: per(bits1, n1),
        measured_load2: per(bits2, n2),
        measured_load,
        predicted_load,
        measured_time,
        predicted_time: exec_time_hybrid_raw(alloc, task, system)?,
        decode_ok: true,
        reduce_ok: true,
        delivery,
        digests: reduce.digests,
        transcript,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn sys(k: usize, m: usize) -> SystemParams {
        SystemParams::new(k, m, int(2), int(1), int(1)).unwrap()
    }

    #[test]
    fn payloads_are_deterministic() {
        assert_eq!(iv_payload(7, 1, 2, 33), iv_payload(7, 1, 2, 33));
        assert_eq!(iv_payload(7, 1, 2, 33).len(), 33);
        assert_eq!(iv_payload(7, 1, 2, 1), iv_payload(7, 1, 2, 1));
        assert_ne!(iv_payload(7, 1, 2, 64), iv_payload(8, 1, 2, 64));
        let distinct: HashSet<_> = (1..=10_000).map(|n| iv_payload(1, 3, n, 64)).collect();
        assert_eq!(distinct.len(), 10_000);
    }

    #[test]
    fn map_counts() {
        let task = TaskParams::new(3, 3, 1, 8).unwrap();
        let alloc = Allocation::new(int(0), 0, 1, 3, 1);
        let p = build_hybrid_placement(&alloc, &task, 5).unwrap();
        let store = map_phase(&p, &task, 1);
        for k in 1..=3 {
            assert_eq!(store.count(k), 3);
        }
        assert_eq!(store.count(4), 9);
        assert_eq!(store.count(5), 0);
    }

    #[test]
    fn acdc_example_load() {
        let task = TaskParams::new(3, 3, 1, 8).unwrap();
        let alloc = Allocation::new(int(0), 0, 1, 3, 1);
        let r = run(&alloc, &task, &sys(4, 6), 5, SimOptions::default()).unwrap();
        assert_eq!(r.measured_load2, Some(frac(1, 3)));
        assert!(r.matches_prediction());
    }

    #[test]
    fn cascaded_cdc_load() {
        // Ks = 3, r1 = 1, s = 2: every pair owns one function
        let task = TaskParams::new(3, 3, 2, 8).unwrap();
        let alloc = Allocation::new(int(1), 1, 0, 3, 0);
        let r = run(&alloc, &task, &sys(3, 3), 5, SimOptions::default()).unwrap();
        assert_eq!(r.measured_load1, Some(int(1)));
        assert!(r.matches_prediction());
    }

    #[test]
    fn full_replication_needs_no_shuffle() {
        let task = TaskParams::new(3, 3, 1, 6).unwrap();
        let alloc = Allocation::new(int(1), 3, 0, 3, 0);
        let r = run(&alloc, &task, &sys(3, 9), 5, SimOptions::default()).unwrap();
        assert!(r.transcript.is_empty());
        assert_eq!(r.measured_time.t_shuffle, int(0));
    }

    #[test]
    fn helper_copy_only_is_uncoded_broadcast() {
        let task = TaskParams::new(3, 3, 1, 8).unwrap();
        let alloc = Allocation::new(int(0), 0, 0, 3, 1);
        let r = run(&alloc, &task, &sys(4, 3), 5, SimOptions::default()).unwrap();
        assert_eq!(r.measured_load, int(1));
        assert_eq!(r.uncoded_bits, r.total_bits);
    }

    #[test]
    fn faults_are_detected() {
        let task = TaskParams::new(6, 3, 1, 8).unwrap();
        let alloc = Allocation::new(frac(1, 2), 1, 1, 3, 1);
        let s = sys(4, 12);
        let flip = SimOptions { fault: Some(Fault::FlipBit { record: 0 }), ..SimOptions::default() };
        assert!(matches!(run(&alloc, &task, &s, 1, flip), Err(Error::PayloadMismatch { .. })));
        let drop = SimOptions { fault: Some(Fault::DropRecord { record: 0 }), ..SimOptions::default() };
        assert!(matches!(run(&alloc, &task, &s, 1, drop), Err(Error::MissingValue { .. })));
    }
}
