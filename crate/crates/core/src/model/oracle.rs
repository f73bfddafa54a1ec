//! Voter utility oracles.

use crate::scalar::Scalar;
use crate::set::CandidateSet;

/// Which of the two gadget utility shapes a gadget oracle uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GadgetKind {
    /// `(alpha_lb + 1) * [favorite complete] + [second complete]`; monotone, not submodular.
    General,
    /// `x + z (1 - x) y` with `x`, `y` the covered fractions of the two gadgets.
    Submodular,
}

/// Utility of a gadget voter given how many members of each of its two gadgets
/// are selected. Both the subset oracle and the count-profile verifier go
/// through this function, so their values agree bit for bit.
#[inline]
pub fn gadget_value<S: Scalar>(
    kind: GadgetKind,
    favorite_hits: usize,
    favorite_size: usize,
    second_hits: usize,
    second_size: usize,
    param: S,
) -> S {
    match kind {
        GadgetKind::General => {
            let mut v = S::zero();
            if favorite_hits >= favorite_size {
                v = v + param + S::one();
            }
            if second_hits >= second_size {
                v = v + S::one();
            }
            v
        }
        GadgetKind::Submodular => {
            let x = S::lit(favorite_hits as f64) / S::lit(favorite_size as f64);
            let y = S::lit(second_hits as f64) / S::lit(second_size as f64);
            x + param * (S::one() - x) * y
        }
    }
}

/// A monotone set function over candidate indices.
#[derive(Debug, Clone, PartialEq)]
pub enum UtilityOracle<S> {
    /// `u(T) = sum_{j in T} weights[j]`.
    Additive { weights: Vec<S> },
    /// Weighted coverage: `u(T)` is the weight of the union of the elements
    /// covered by members of `T`.
    Coverage {
        elements: Vec<String>,
        element_weights: Vec<S>,
        covers: Vec<CandidateSet>,
    },
    GadgetGeneral {
        favorite: CandidateSet,
        second: CandidateSet,
        alpha_lb: S,
    },
    GadgetSubmodular {
        favorite: CandidateSet,
        second: CandidateSet,
        z: S,
    },
}

impl<S: Scalar> UtilityOracle<S> {
    /// Raw (unnormalized) utility of committee `t`.
    pub fn value(&self, t: &CandidateSet) -> S {
        match self {
            UtilityOracle::Additive { weights } => t.iter().map(|j| weights[j]).sum(),
            UtilityOracle::Coverage {
                element_weights,
                covers,
                ..
            } => {
                let mut covered = CandidateSet::empty(element_weights.len());
                for j in t.iter() {
                    covered.union_with(&covers[j]);
                }
                covered.iter().map(|e| element_weights[e]).sum()
            }
            UtilityOracle::GadgetGeneral {
                favorite,
                second,
                alpha_lb,
            } => gadget_value(
                GadgetKind::General,
                t.intersection_count(favorite),
                favorite.count(),
                t.intersection_count(second),
                second.count(),
                *alpha_lb,
            ),
            UtilityOracle::GadgetSubmodular {
                favorite,
                second,
                z,
            } => gadget_value(
                GadgetKind::Submodular,
                t.intersection_count(favorite),
                favorite.count(),
                t.intersection_count(second),
                second.count(),
                *z,
            ),
        }
    }

    /// Largest single-candidate utility `max_j u({j})` over `m` candidates.
    pub fn max_singleton(&self, m: usize) -> S {
        match self {
            UtilityOracle::Additive { weights } => weights.iter().copied().fold(S::zero(), S::max),
            _ => (0..m)
                .map(|j| self.value(&CandidateSet::from_indices(m, [j])))
                .fold(S::zero(), S::max),
        }
    }

    pub fn is_additive(&self) -> bool {
        matches!(self, UtilityOracle::Additive { .. })
    }

    /// Gadget view `(kind, favorite, second, parameter)` for gadget oracles.
    pub fn gadget(&self) -> Option<(GadgetKind, &CandidateSet, &CandidateSet, S)> {
        match self {
            UtilityOracle::GadgetGeneral {
                favorite,
                second,
                alpha_lb,
            } => Some((GadgetKind::General, favorite, second, *alpha_lb)),
            UtilityOracle::GadgetSubmodular {
                favorite,
                second,
                z,
            } => Some((GadgetKind::Submodular, favorite, second, *z)),
            _ => None,
        }
    }

    /// The same set function multiplied by `factor`, when the payload can
    /// express it (additive and coverage only).
    pub fn scaled(&self, factor: S) -> Option<Self> {
        match self {
            UtilityOracle::Additive { weights } => Some(UtilityOracle::Additive {
                weights: weights.iter().map(|&w| w * factor).collect(),
            }),
            UtilityOracle::Coverage {
                elements,
                element_weights,
                covers,
            } => Some(UtilityOracle::Coverage {
                elements: elements.clone(),
                element_weights: element_weights.iter().map(|&w| w * factor).collect(),
                covers: covers.clone(),
            }),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(m: usize, idx: &[usize]) -> CandidateSet {
        CandidateSet::from_indices(m, idx.iter().copied())
    }

    #[test]
    fn additive_sums_weights() {
        let o = UtilityOracle::Additive {
            weights: vec![3.0, 1.0, 0.5],
        };
        assert_eq!(o.value(&set(3, &[0, 2])), 3.5);
        assert_eq!(o.value(&set(3, &[])), 0.0);
        assert_eq!(o.max_singleton(3), 3.0);
    }

    #[test]
    fn coverage_counts_union_once() {
        let o = UtilityOracle::Coverage {
            elements: vec!["a".into(), "b".into(), "c".into()],
            element_weights: vec![1.0, 2.0, 4.0],
            covers: vec![set(3, &[0, 1]), set(3, &[1, 2]), set(3, &[])],
        };
        assert_eq!(o.value(&set(3, &[0, 1])), 7.0);
        assert_eq!(o.value(&set(3, &[0])), 3.0);
        assert_eq!(o.value(&set(3, &[2])), 0.0);
        assert_eq!(o.max_singleton(3), 6.0);
    }

    #[test]
    fn gadget_submodular_second_gadget_gives_z() {
        let o = UtilityOracle::GadgetSubmodular {
            favorite: set(10, &[0, 1, 2, 3, 4]),
            second: set(10, &[5, 6, 7, 8, 9]),
            z: 0.9f64,
        };
        assert!((o.value(&set(10, &[5, 6, 7, 8, 9])) - 0.9).abs() < 1e-15);
        assert!((o.value(&set(10, &[0])) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn gadget_general_needs_complete_gadgets() {
        let o = UtilityOracle::GadgetGeneral {
            favorite: set(4, &[0, 1]),
            second: set(4, &[2, 3]),
            alpha_lb: 10.0,
        };
        assert_eq!(o.value(&set(4, &[0, 2, 3])), 1.0);
        assert_eq!(o.value(&set(4, &[0, 1])), 11.0);
        assert_eq!(o.value(&set(4, &[0, 1, 2, 3])), 12.0);
        assert_eq!(o.max_singleton(4), 0.0);
    }
}
