//! Observation functions: total maps from states to observation identifiers.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::mdp::Mdp;

/// The observation assigned to one state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ObsLabel {
    /// Numbered observation class of a general observation function.
    Class(usize),
    /// Location sensor `@s` reporting the state's own index.
    At(usize),
    /// The blind observation of a location POMDP.
    Blind,
    /// Distinguished marker carried by every goal state.
    Goal,
}

impl fmt::Display for ObsLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObsLabel::Class(o) => write!(f, "o{o}"),
            ObsLabel::At(s) => write!(f, "@s{s}"),
            ObsLabel::Blind => write!(f, "bot"),
            ObsLabel::Goal => write!(f, "goal"),
        }
    }
}

/// Which family of observation functions this is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObsKind {
    /// Arbitrary assignment of non-goal states to numbered classes.
    General,
    /// Location POMDP: each non-goal state sees its own location or `⊥`.
    Location,
}

/// A total map from states to observation identifiers. Goal states always
/// carry [`ObsLabel::Goal`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationFunction {
    pub kind: ObsKind,
    /// Number of observation classes, excluding the goal marker. For the
    /// general kind this is the class-index width; for the location kind it
    /// counts activated sensors plus one blind class when present.
    pub n_classes: usize,
    pub assignment: Vec<ObsLabel>,
}

/// Raised when an observation function does not fit an MDP.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ObsError {
    #[error("assignment covers {got} states, MDP has {want}")]
    WrongLength { got: usize, want: usize },
    #[error("state s{state} maps to {label} which is invalid here")]
    BadLabel { state: usize, label: String },
    #[error("goal marker on non-goal state s{state} or missing on goal")]
    GoalMismatch { state: usize },
    #[error("class index {class} out of range (|O| = {classes})")]
    ClassOutOfRange { class: usize, classes: usize },
}

impl ObservationFunction {
    /// General observation function from per-non-goal-state class indices.
    /// `classes[i]` is the class of the i-th non-goal state in state order.
    pub fn general(m: &Mdp, n_classes: usize, classes: &[usize]) -> Result<Self, ObsError> {
        let non_goal: Vec<usize> = m.non_goal_states().collect();
        if classes.len() != non_goal.len() {
            return Err(ObsError::WrongLength {
                got: classes.len(),
                want: non_goal.len(),
            });
        }
        let mut assignment = alloc::vec![ObsLabel::Goal; m.n_states()];
        for (i, &s) in non_goal.iter().enumerate() {
            if classes[i] >= n_classes {
                return Err(ObsError::ClassOutOfRange {
                    class: classes[i],
                    classes: n_classes,
                });
            }
            assignment[s] = ObsLabel::Class(classes[i]);
        }
        Ok(ObservationFunction {
            kind: ObsKind::General,
            n_classes,
            assignment,
        })
    }

    /// One observation class per non-goal state: full observability.
    pub fn full_observability(m: &Mdp) -> Self {
        let non_goal: Vec<usize> = m.non_goal_states().collect();
        let classes: Vec<usize> = (0..non_goal.len()).collect();
        Self::general(m, non_goal.len(), &classes).expect("full observability is always valid")
    }

    /// All non-goal states in a single class: the blind POMDP.
    pub fn blind(m: &Mdp) -> Self {
        let non_goal = m.non_goal_states().count();
        Self::general(m, 1, &alloc::vec![0; non_goal]).expect("single class is always valid")
    }

    /// Location observation function activating exactly the given sensors.
    pub fn location(m: &Mdp, sensors: &[usize]) -> Result<Self, ObsError> {
        let mut assignment = alloc::vec![ObsLabel::Goal; m.n_states()];
        for s in m.non_goal_states() {
            assignment[s] = ObsLabel::Blind;
        }
        for &s in sensors {
            if s >= m.n_states() || m.is_goal(s) {
                return Err(ObsError::BadLabel {
                    state: s,
                    label: alloc::format!("@s{s}"),
                });
            }
            assignment[s] = ObsLabel::At(s);
        }
        let blind_present = assignment.iter().any(|l| *l == ObsLabel::Blind);
        Ok(ObservationFunction {
            kind: ObsKind::Location,
            n_classes: sensors.len() + usize::from(blind_present),
            assignment,
        })
    }

    pub fn label(&self, s: usize) -> ObsLabel {
        self.assignment[s]
    }

    /// Activated sensor states, ascending (location kind).
    pub fn sensors(&self) -> Vec<usize> {
        self.assignment
            .iter()
            .filter_map(|l| match l {
                ObsLabel::At(s) => Some(*s),
                _ => None,
            })
            .collect()
    }

    /// Number of activated sensors (location kind).
    pub fn sensors_on(&self) -> usize {
        self.sensors().len()
    }

    /// Distinct non-goal observation labels in ascending order.
    pub fn classes(&self) -> Vec<ObsLabel> {
        let mut labels: Vec<ObsLabel> = self
            .assignment
            .iter()
            .copied()
            .filter(|l| *l != ObsLabel::Goal)
            .collect();
        labels.sort_unstable();
        labels.dedup();
        labels
    }

    /// States assigned to the given label, ascending.
    pub fn members(&self, label: ObsLabel) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(s, l)| (*l == label).then_some(s))
            .collect()
    }

    /// Checks totality and the goal-marker/kind invariants against `m`.
    pub fn validate(&self, m: &Mdp) -> Result<(), ObsError> {
        if self.assignment.len() != m.n_states() {
            return Err(ObsError::WrongLength {
                got: self.assignment.len(),
                want: m.n_states(),
            });
        }
        for (s, label) in self.assignment.iter().enumerate() {
            let is_goal = m.is_goal(s);
            match label {
                ObsLabel::Goal if !is_goal => return Err(ObsError::GoalMismatch { state: s }),
                _ if is_goal && *label != ObsLabel::Goal => {
                    return Err(ObsError::GoalMismatch { state: s })
                }
                ObsLabel::Class(o) => {
                    if self.kind != ObsKind::General {
                        return Err(ObsError::BadLabel {
                            state: s,
                            label: alloc::format!("{label}"),
                        });
                    }
                    if *o >= self.n_classes {
                        return Err(ObsError::ClassOutOfRange {
                            class: *o,
                            classes: self.n_classes,
                        });
                    }
                }
                ObsLabel::At(loc) => {
                    if self.kind != ObsKind::Location || *loc != s {
                        return Err(ObsError::BadLabel {
                            state: s,
                            label: alloc::format!("{label}"),
                        });
                    }
                }
                ObsLabel::Blind => {
                    if self.kind != ObsKind::Location {
                        return Err(ObsError::BadLabel {
                            state: s,
                            label: alloc::format!("{label}"),
                        });
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::one;
    use crate::worlds;

    #[test]
    fn general_assignment_round_trip() {
        let m = worlds::gen_line(5, one()).unwrap();
        // non-goal states are 0,1,3,4
        let obs = ObservationFunction::general(&m, 2, &[0, 0, 1, 1]).unwrap();
        obs.validate(&m).unwrap();
        assert_eq!(obs.label(2), ObsLabel::Goal);
        assert_eq!(obs.members(ObsLabel::Class(0)), alloc::vec![0, 1]);
        assert_eq!(obs.members(ObsLabel::Class(1)), alloc::vec![3, 4]);
        assert_eq!(obs.classes().len(), 2);
    }

    #[test]
    fn location_assignment() {
        let m = worlds::gen_line(5, one()).unwrap();
        let obs = ObservationFunction::location(&m, &[0, 3]).unwrap();
        obs.validate(&m).unwrap();
        assert_eq!(obs.label(0), ObsLabel::At(0));
        assert_eq!(obs.label(1), ObsLabel::Blind);
        assert_eq!(obs.sensors(), alloc::vec![0, 3]);
        assert_eq!(obs.n_classes, 3);
        // goal state cannot carry a sensor
        assert!(ObservationFunction::location(&m, &[2]).is_err());
    }

    #[test]
    fn goal_marker_is_enforced() {
        let m = worlds::gen_line(5, one()).unwrap();
        let mut obs = ObservationFunction::general(&m, 2, &[0, 0, 1, 1]).unwrap();
        obs.assignment[2] = ObsLabel::Class(0);
        assert!(obs.validate(&m).is_err());
    }
}
