use serde::Serialize;

use crate::codec::Bits;
use crate::error::{Error, Result};
use crate::model::{NodeId, Placement, ReduceAssignment};

use super::IvStore;

/// Which half of the file split a shuffle step serves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Subsystem {
    /// Solver-only coded shuffle over files `1..=N1`.
    Solver,
    /// Helper-assisted shuffle over files `N1+1..=N`.
    Helper,
}

impl Subsystem {
    pub fn index(self) -> u8 {
        match self {
            Subsystem::Solver => 1,
            Subsystem::Helper => 2,
        }
    }
}

/// Intermediate values mapped exclusively by `s1` (plus `helper` in the
/// helper subsystem) and needed by every node of `subset \ s1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueGroup {
    pub subsystem: Subsystem,
    pub subset: Vec<NodeId>,
    pub s1: Vec<NodeId>,
    pub helper: Option<NodeId>,
    /// `(q, n)` pairs sorted by `q`, then `n`.
    pub members: Vec<(usize, usize)>,
}

impl ValueGroup {
    /// Concatenated payload as computed from `node`'s intermediate values.
    pub fn payload(&self, store: &IvStore, node: NodeId) -> Result<Bits> {
        let mut out = Bits::new();
        for &(q, n) in &self.members {
            let v = store.get(node, q, n).ok_or(Error::MissingValue { node, q, n })?;
            out.extend_from_bitslice(v);
        }
        Ok(out)
    }
}

/// Enumerates the group by its defining predicate: a function `q` qualifies
/// when every node of `subset \ s1` computes it and no node outside `subset`
/// does; a file `n` qualifies when its holders are exactly `s1` (plus the
/// helper) within the subsystem's file range.
pub fn build_group(
    subsystem: Subsystem,
    subset: &[NodeId],
    s1: &[NodeId],
    helper: Option<NodeId>,
    assignment: &ReduceAssignment,
    placement: &Placement,
) -> Result<ValueGroup> {
    if s1.iter().any(|k| !subset.contains(k)) {
        return Err(Error::InvalidParams(format!("{s1:?} is not contained in {subset:?}")));
    }
    if (subsystem == Subsystem::Helper) != helper.is_some() {
        return Err(Error::InvalidParams("a helper is given exactly for the helper subsystem".into()));
    }
    let receivers: Vec<NodeId> = subset.iter().copied().filter(|k| !s1.contains(k)).collect();
    let outside: Vec<NodeId> = assignment.solvers.iter().copied().filter(|k| !subset.contains(k)).collect();
    let functions: Vec<usize> = (1..=assignment.q)
        .filter(|&q| {
            receivers.iter().all(|&k| assignment.functions_of(k).contains(&q))
                && outside.iter().all(|&k| !assignment.functions_of(k).contains(&q))
        })
        .collect();
    let range = match subsystem {
        Subsystem::Solver => 1..=placement.n1,
        Subsystem::Helper => placement.n1 + 1..=placement.n,
    };
    let mut holders: Vec<NodeId> = s1.to_vec();
    holders.extend(helper);
    holders.sort_unstable();
    let files: Vec<usize> =
        range.filter(|&n| placement.holders_of(n).iter().copied().eq(holders.iter().copied())).collect();
    let members = functions.iter().flat_map(|&q| files.iter().map(move |&n| (q, n))).collect();
    Ok(ValueGroup { subsystem, subset: subset.to_vec(), s1: s1.to_vec(), helper, members })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{binom, frac, int, subsets};
    use crate::model::{build_hybrid_placement, build_reduce_assignment, Allocation, TaskParams};
    use num_traits::ToPrimitive;

    #[test]
    fn s1_group_for_single_receiver() {
        // alpha = 0, Ks = 3, Kh = 1, r2 = 1: eta1 = 1 file per batch, eta2 = 1
        let task = TaskParams::new(3, 3, 1, 8).unwrap();
        let alloc = Allocation::new(int(0), 0, 1, 3, 1);
        let p = build_hybrid_placement(&alloc, &task, 4).unwrap();
        let a = build_reduce_assignment(&[1, 2, 3], 1, 3).unwrap();
        let g = build_group(Subsystem::Helper, &[1, 2], &[1], Some(4), &a, &p).unwrap();
        // node 2 needs its function (q = 2) on the file stored by {1, helper}
        assert_eq!(g.members, vec![(2, 1)]);
        let g = build_group(Subsystem::Helper, &[1, 2, 3], &[1], Some(4), &a, &p).unwrap();
        assert!(g.members.is_empty());
    }

    #[test]
    fn group_sizes_match_counts() {
        // N1 = 6 over C(4,2) batches, N2 = 8 over 2 * C(4,1) batches
        let task = TaskParams::new(14, 6, 2, 8).unwrap();
        let alloc = Allocation::new(frac(3, 7), 2, 1, 4, 2);
        let p = build_hybrid_placement(&alloc, &task, 6).unwrap();
        let a = build_reduce_assignment(&alloc.solvers(), 2, 6).unwrap();
        let expect = |r: usize, l: usize| binom(r as i64, l as i64 - 2).to_usize().unwrap();
        for l in 2..=4 {
            for subset in subsets(&[1, 2, 3, 4], l) {
                if l > 2 {
                    for s1 in subsets(&subset, 2) {
                        let g = build_group(Subsystem::Solver, &subset, &s1, None, &a, &p).unwrap();
                        assert_eq!(g.members.len(), expect(2, l), "S={subset:?} S1={s1:?}");
                    }
                }
                for s1 in subsets(&subset, 1) {
                    let g = build_group(Subsystem::Helper, &subset, &s1, Some(5), &a, &p).unwrap();
                    assert_eq!(g.members.len(), expect(1, l), "S={subset:?} S1={s1:?}");
                }
            }
        }
    }
}
