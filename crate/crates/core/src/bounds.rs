//! Converse bounds evaluated on concrete placements.
//!
//! `tally_a` + `lemma1_bound` give the generic counting bound for any
//! placement and reduce assignment. `tally_b` + `enhanced_lower_bound` give
//! the sharper bound for weakly symmetric assignments, obtained by merging
//! every node that reduces nothing into one super node.

use std::collections::BTreeMap;

use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::loads::{l1_envelope, l2_envelope, TimeBreakdown};
use crate::math::{binom, frac, int, max_rational, Rational};
use crate::model::{NodeId, Placement, ReduceAssignment, SystemParams, TaskParams};

/// Counts `a[(j, d)]` of intermediate values available at `j` nodes and
/// needed by `d` nodes that do not have them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ATable {
    pub counts: BTreeMap<(usize, usize), usize>,
}

impl ATable {
    pub fn get(&self, j: usize, d: usize) -> usize {
        self.counts.get(&(j, d)).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    fn bump(&mut self, j: usize, d: usize, by: usize) {
        if by > 0 {
            *self.counts.entry((j, d)).or_default() += by;
        }
    }
}

/// Tallies every `(q, n)` over all nodes of the placement.
pub fn tally_a(placement: &Placement, assignment: &ReduceAssignment) -> ATable {
    let mut a = ATable::default();
    for n in 1..=placement.n {
        let holders = placement.holders_of(n);
        let j = holders.len();
        for q in 1..=assignment.q {
            let d = assignment.owners_of(q).iter().filter(|k| !holders.contains(k)).count();
            a.bump(j, d, 1);
        }
    }
    a
}

/// `(1/QN) sum_{j>=1, d>=1} a[j,d] d/(j+d-1)`.
pub fn lemma1_bound(a: &ATable, n: usize, q: usize) -> Rational {
    let sum: Rational =
        a.counts.iter().filter(|(&(j, d), _)| j >= 1 && d >= 1).map(|(&(j, d), &c)| frac(c * d, j + d - 1)).sum();
    sum / int(n * q)
}

/// File counts by solver multiplicity: `b1[j]` files at exactly `j` solvers
/// and no helper, `b2[j]` files at exactly `j` solvers and some helper.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BTables {
    pub n: usize,
    pub solvers: Vec<NodeId>,
    pub helpers: Vec<NodeId>,
    pub b1: Vec<usize>,
    pub b2: Vec<usize>,
}

impl BTables {
    pub fn ks(&self) -> usize {
        self.solvers.len()
    }

    pub fn kh(&self) -> usize {
        self.helpers.len()
    }

    /// Fraction of files no helper stores.
    pub fn alpha(&self) -> Rational {
        frac(self.b1.iter().sum::<usize>(), self.n)
    }

    fn mean(b: &[usize]) -> Option<Rational> {
        let files: usize = b.iter().sum();
        (files > 0).then(|| frac(b.iter().enumerate().map(|(j, c)| j * c).sum::<usize>(), files))
    }

    /// Average solver replication of helper-free files; `None` if there are none.
    pub fn r1(&self) -> Option<Rational> {
        Self::mean(&self.b1)
    }

    /// Average solver replication of helper-stored files; `None` if there are none.
    pub fn r2(&self) -> Option<Rational> {
        Self::mean(&self.b2)
    }

    /// Copies held by solvers, `sum_j j (b1[j] + b2[j]) = (alpha r1 + (1-alpha) r2) N`.
    pub fn solver_storage(&self) -> usize {
        self.b1.iter().zip(&self.b2).enumerate().map(|(j, (c1, c2))| j * (c1 + c2)).sum()
    }
}

/// Classifies nodes by whether they reduce anything and counts files by
/// solver multiplicity.
pub fn tally_b(placement: &Placement, assignment: &ReduceAssignment) -> BTables {
    let all: Vec<NodeId> = (1..=placement.node_count()).collect();
    let (solvers, helpers): (Vec<NodeId>, Vec<NodeId>) =
        all.into_iter().partition(|&k| !assignment.functions_of(k).is_empty());
    let ks = solvers.len();
    let mut b1 = vec![0; ks + 1];
    let mut b2 = vec![0; ks + 1];
    for n in 1..=placement.n {
        let holders = placement.holders_of(n);
        let j = solvers.iter().filter(|k| holders.contains(k)).count();
        if helpers.iter().any(|k| holders.contains(k)) {
            b2[j] += 1;
        } else {
            b1[j] += 1;
        }
    }
    BTables { n: placement.n, solvers, helpers, b1, b2 }
}

fn symmetric_batch(s: usize, ks: usize, q: usize) -> Result<usize> {
    let subsets = binom(ks as i64, s as i64).to_usize().unwrap_or(0);
    if subsets == 0 || !q.is_multiple_of(subsets) {
        return Err(Error::AssignmentNotSymmetric(format!("C({ks},{s}) = {subsets} does not divide Q = {q}")));
    }
    Ok(q / subsets)
}

/// Closed-form `(a1, a2)` under a weakly symmetric assignment:
/// `a_i[j,d] = (Q / C(Ks,s)) b_i[j] C(Ks-j, d) C(j, j+d-s)`.
pub fn a_from_b(b: &BTables, s: usize, ks: usize, q: usize) -> Result<(ATable, ATable)> {
    let per = symmetric_batch(s, ks, q)?;
    let mut a1 = ATable::default();
    let mut a2 = ATable::default();
    for j in 0..=ks {
        for d in 0..=ks - j {
            let ways = binom((ks - j) as i64, d as i64) * binom(j as i64, (j + d) as i64 - s as i64);
            let ways = ways.to_usize().expect("small counts");
            a1.bump(j, d, per * b.b1.get(j).copied().unwrap_or(0) * ways);
            a2.bump(j, d, per * b.b2.get(j).copied().unwrap_or(0) * ways);
        }
    }
    Ok((a1, a2))
}

/// Direct enumeration in the enhanced system: `j` counts solvers storing the
/// file, and the value goes to `a2` when the merged helper node stores it.
pub fn tally_enhanced(placement: &Placement, assignment: &ReduceAssignment) -> (ATable, ATable) {
    let b = tally_b(placement, assignment);
    let mut a1 = ATable::default();
    let mut a2 = ATable::default();
    for n in 1..=placement.n {
        let holders = placement.holders_of(n);
        let j = b.solvers.iter().filter(|k| holders.contains(k)).count();
        let super_node = b.helpers.iter().any(|k| holders.contains(k));
        for q in 1..=assignment.q {
            let d = assignment.owners_of(q).iter().filter(|k| !holders.contains(k)).count();
            if super_node {
                a2.bump(j, d, 1);
            } else {
                a1.bump(j, d, 1);
            }
        }
    }
    (a1, a2)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnhancedBound {
    pub alpha: Rational,
    pub r1: Option<Rational>,
    pub r2: Option<Rational>,
    /// Exact per-multiplicity sum before averaging over `j`.
    pub pre_jensen: Rational,
    /// `alpha env1(r1) + (1-alpha) env2(r2)`.
    pub bound: Rational,
}

/// Enhanced-system load bound from the multiplicity tables.
pub fn enhanced_lower_bound(b: &BTables, s: usize, ks: usize, q: usize, n: usize) -> Result<EnhancedBound> {
    let (a1, a2) = a_from_b(b, s, ks, q)?;
    let mut pre = Rational::zero();
    for (&(j, d), &c) in &a1.counts {
        if d >= 1 {
            pre += frac(c * d, j + d - 1);
        }
    }
    for (&(j, d), &c) in &a2.counts {
        if d >= 1 {
            pre += frac(c * d, j + d);
        }
    }
    pre /= int(n * q);

    let alpha = b.alpha();
    let (r1, r2) = (b.r1(), b.r2());
    let mut bound = Rational::zero();
    if let Some(r) = &r1 {
        bound += &alpha * l1_envelope(s, ks)?.eval(r)?;
    }
    if let Some(r) = &r2 {
        bound += (Rational::one() - &alpha) * l2_envelope(s, ks)?.eval(r)?;
    }
    Ok(EnhancedBound { alpha, r1, r2, pre_jensen: pre, bound })
}

/// Per-phase lower bounds for any placement with these multiplicity tables
/// under a weakly symmetric assignment on `Ks = b.ks()` solvers.
pub fn phase_lower_bounds(b: &BTables, task: &TaskParams, system: &SystemParams, kh: usize) -> Result<TimeBreakdown> {
    let ks = b.ks();
    let eb = enhanced_lower_bound(b, task.s, ks, task.q, task.n)?;
    let alpha_bar = Rational::one() - &eb.alpha;
    let solver_arm = frac(b.solver_storage(), task.n * ks);
    let helper_arm = if alpha_bar.is_zero() {
        Rational::zero()
    } else if kh == 0 {
        return Err(Error::InvalidParams("files outside the solvers need at least one helper".into()));
    } else {
        &alpha_bar / int(kh)
    };
    Ok(TimeBreakdown::new(
        &system.c_m * max_rational(&solver_arm, &helper_arm),
        &system.c_s * eb.bound,
        &system.c_r * frac(task.s * task.q, ks),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loads::{l1, l2};
    use crate::model::{build_hybrid_placement, build_reduce_assignment, Allocation};
    use std::collections::BTreeSet;

    #[test]
    fn two_node_example() {
        let p = Placement::from_node_sets(1, vec![BTreeSet::from([1]), BTreeSet::new()]).unwrap();
        let w = ReduceAssignment::from_node_sets(2, vec![BTreeSet::from([1]), BTreeSet::from([2])]).unwrap();
        let a = tally_a(&p, &w);
        assert_eq!(a.get(1, 1), 1);
        assert_eq!(a.get(1, 0), 1);
        assert_eq!(a.total(), 2);
        assert_eq!(lemma1_bound(&a, 1, 2), frac(1, 2));
    }

    #[test]
    fn full_replication_bound_is_zero() {
        let task = TaskParams::new(3, 3, 1, 6).unwrap();
        let alloc = Allocation::new(int(1), 3, 0, 3, 0);
        let p = build_hybrid_placement(&alloc, &task, 3).unwrap();
        let w = build_reduce_assignment(&alloc.solvers(), 1, 3).unwrap();
        let a = tally_a(&p, &w);
        assert!(a.counts.keys().all(|&(_, d)| d == 0));
        assert_eq!(lemma1_bound(&a, 3, 3), int(0));
        let b = tally_b(&p, &w);
        assert_eq!(enhanced_lower_bound(&b, 1, 3, 3, 3).unwrap().bound, int(0));
        let sys = SystemParams::new(3, 9, int(2), int(1), int(1)).unwrap();
        assert_eq!(phase_lower_bounds(&b, &task, &sys, 0).unwrap().t_map, int(2));
    }

    #[test]
    fn cdc_single_copy_table() {
        let task = TaskParams::new(3, 3, 1, 8).unwrap();
        let alloc = Allocation::new(int(1), 1, 0, 3, 0);
        let p = build_hybrid_placement(&alloc, &task, 3).unwrap();
        let w = build_reduce_assignment(&alloc.solvers(), 1, 3).unwrap();
        let a = tally_a(&p, &w);
        assert_eq!(a.counts, BTreeMap::from([((1, 0), 3), ((1, 1), 6)]));
        assert_eq!(lemma1_bound(&a, 3, 3), l1(1, 1, 3).unwrap());
    }

    #[test]
    fn b_tables_recover_allocation() {
        let task = TaskParams::new(14, 6, 2, 8).unwrap();
        let alloc = Allocation::new(frac(3, 7), 2, 1, 4, 2);
        let p = build_hybrid_placement(&alloc, &task, 6).unwrap();
        let w = build_reduce_assignment(&alloc.solvers(), 2, 6).unwrap();
        let b = tally_b(&p, &w);
        assert_eq!(b.alpha(), frac(3, 7));
        assert_eq!(b.r1(), Some(int(2)));
        assert_eq!(b.r2(), Some(int(1)));
        assert_eq!(b.helpers, vec![5, 6]);
        assert_eq!(b.solver_storage(), 6 * 2 + 8);
        let eb = enhanced_lower_bound(&b, 2, 4, 6, 14).unwrap();
        let expect = frac(3, 7) * l1(2, 2, 4).unwrap() + frac(4, 7) * l2(1, 2, 4).unwrap();
        assert_eq!(eb.bound, expect);
        assert!(eb.pre_jensen >= eb.bound);
        assert_eq!(a_from_b(&b, 2, 4, 6).unwrap(), tally_enhanced(&p, &w));
    }

    #[test]
    fn single_owner_specialization() {
        let b = BTables { n: 4, solvers: vec![1, 2, 3], helpers: vec![], b1: vec![0, 1, 2, 1], b2: vec![0; 4] };
        let (a1, a2) = a_from_b(&b, 1, 3, 6).unwrap();
        for j in 1..=3 {
            assert_eq!(a1.get(j, 1), 2 * b.b1[j] * (3 - j));
        }
        assert!(a2.counts.is_empty());
        assert!(matches!(a_from_b(&b, 1, 3, 4), Err(Error::AssignmentNotSymmetric(_))));
    }

    #[test]
    fn helper_only_files() {
        let task = TaskParams::new(3, 3, 1, 8).unwrap();
        let alloc = Allocation::new(int(0), 0, 0, 3, 1);
        let p = build_hybrid_placement(&alloc, &task, 4).unwrap();
        let w = build_reduce_assignment(&alloc.solvers(), 1, 3).unwrap();
        let b = tally_b(&p, &w);
        assert_eq!(b.alpha(), int(0));
        assert_eq!(b.r1(), None);
        assert_eq!(b.r2(), Some(int(0)));
    }
}
