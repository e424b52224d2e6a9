//! Atomic distinguishability groups: the quotient of non-goal states by
//! optimal-signature equality.

use alloc::vec::Vec;

use crate::mdp::{ActionSet, Mdp};

/// One group: states sharing an identical optimal signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub states: Vec<usize>,
    pub signature: ActionSet,
}

/// The quotient of the non-goal states under strong action equivalence,
/// ordered by smallest member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupPartition {
    pub groups: Vec<Group>,
    /// Group index per state; `None` for goal states.
    pub state_group: Vec<Option<usize>>,
}

impl GroupPartition {
    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// Groups non-goal states by exact equality of their optimal signatures
/// (strong action equivalence). `signatures` must cover all states, as
/// produced by [`crate::solve::optimal_signatures`].
pub fn atomic_groups(m: &Mdp, signatures: &[ActionSet]) -> GroupPartition {
    let mut groups: Vec<Group> = Vec::new();
    let mut state_group = alloc::vec![None; m.n_states()];
    for s in m.non_goal_states() {
        let sig = signatures[s];
        match groups.iter().position(|g| g.signature == sig) {
            Some(i) => {
                groups[i].states.push(s);
                state_group[s] = Some(i);
            }
            None => {
                state_group[s] = Some(groups.len());
                groups.push(Group {
                    states: alloc::vec![s],
                    signature: sig,
                });
            }
        }
    }
    GroupPartition { groups, state_group }
}

/// Weak action equivalence: the optimal signatures intersect.
pub fn weakly_equivalent(s: usize, s2: usize, signatures: &[ActionSet]) -> bool {
    !signatures[s].intersect(signatures[s2]).is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{one, ratio};
    use crate::solve::MdpAnalysis;
    use crate::worlds::{self, GoalMode};

    #[test]
    fn grid3_has_three_groups() {
        let m = worlds::gen_grid(3, GoalMode::Corner).unwrap();
        let a = MdpAnalysis::analyze(&m, 1e-9, 1e-6).unwrap();
        let g = atomic_groups(&m, &a.signatures);
        assert_eq!(g.len(), 3);
        assert_eq!(g.groups[0].states, alloc::vec![0, 1, 3, 4]);
        assert_eq!(g.groups[1].states, alloc::vec![2, 5]);
        assert_eq!(g.groups[2].states, alloc::vec![6, 7]);
    }

    #[test]
    fn trap_has_four_groups() {
        let m = worlds::trap();
        let a = MdpAnalysis::analyze(&m, 1e-9, 1e-6).unwrap();
        let g = atomic_groups(&m, &a.signatures);
        assert_eq!(g.len(), 4);
        assert_eq!(g.groups[0].states, alloc::vec![0]);
        assert_eq!(g.groups[1].states, alloc::vec![1, 4]);
        assert_eq!(g.groups[2].states, alloc::vec![2]);
        assert_eq!(g.groups[3].states, alloc::vec![5]);
    }

    #[test]
    fn lines_have_two_groups_for_any_p() {
        for (k, p) in [(5usize, one()), (9, ratio(1, 2)), (13, ratio(2, 3))] {
            let m = worlds::gen_line(k, p).unwrap();
            let a = MdpAnalysis::analyze(&m, 1e-9, 1e-6).unwrap();
            let g = atomic_groups(&m, &a.signatures);
            assert_eq!(g.len(), 2, "line {k}");
        }
    }

    #[test]
    fn weak_equivalence_on_grid3() {
        let m = worlds::gen_grid(3, GoalMode::Corner).unwrap();
        let a = MdpAnalysis::analyze(&m, 1e-9, 1e-6).unwrap();
        // s0 shares `down` with s2
        assert!(weakly_equivalent(0, 2, &a.signatures));
        // s2 goes down, s6 goes right
        assert!(!weakly_equivalent(2, 6, &a.signatures));
        // reflexivity
        for s in m.non_goal_states() {
            assert!(weakly_equivalent(s, s, &a.signatures));
        }
    }
}
