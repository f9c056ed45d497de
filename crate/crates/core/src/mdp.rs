//! Sparse MDP storage and the value-function/policy containers the solvers
//! operate on.

use std::ops::Index;

use thiserror::Error;

use crate::scalar::Scalar;

/// Construction and contract errors for MDP-level types.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MdpError {
    #[error("MDP must have at least one state and one action")]
    Empty,
    #[error("discount {0} outside [0, 1)")]
    InvalidDiscount(f64),
    #[error("state {state} out of range (num_states = {num_states})")]
    StateOutOfRange { state: usize, num_states: usize },
    #[error("action {action} out of range (num_actions = {num_actions})")]
    ActionOutOfRange { action: usize, num_actions: usize },
    #[error("invalid probability {value} for ({state}, {action}) -> {successor}")]
    InvalidProbability {
        state: usize,
        action: usize,
        successor: usize,
        value: f64,
    },
    #[error("duplicate successor {successor} for ({state}, {action})")]
    DuplicateSuccessor {
        state: usize,
        action: usize,
        successor: usize,
    },
    #[error("probabilities for ({state}, {action}) sum to {sum}, expected 1")]
    ProbabilitySum {
        state: usize,
        action: usize,
        sum: f64,
    },
    #[error("non-finite reward at ({state}, {action})")]
    NonFiniteReward { state: usize, action: usize },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("non-finite value at index {index}")]
    NonFiniteValue { index: usize },
}

/// A finite discounted MDP with sparse transitions.
///
/// Transitions are stored row-compressed: row `s * num_actions + a` holds the
/// successors of `(s, a)` sorted by state index, each with a strictly positive
/// probability. The per-state union of supports is precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMdp<T> {
    num_states: usize,
    num_actions: usize,
    row_offsets: Vec<usize>,
    successors: Vec<usize>,
    probabilities: Vec<T>,
    rewards: Vec<T>,
    discount: T,
    support_offsets: Vec<usize>,
    support: Vec<usize>,
}

impl<T: Scalar> SparseMdp<T> {
    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn discount(&self) -> T {
        self.discount
    }

    #[inline]
    fn row(&self, s: usize, a: usize) -> std::ops::Range<usize> {
        let r = s * self.num_actions + a;
        self.row_offsets[r]..self.row_offsets[r + 1]
    }

    /// Successor states and probabilities of `(s, a)`, sorted by successor.
    #[inline]
    pub fn transitions(&self, s: usize, a: usize) -> (&[usize], &[T]) {
        let r = self.row(s, a);
        (&self.successors[r.clone()], &self.probabilities[r])
    }

    #[inline]
    pub fn reward(&self, s: usize, a: usize) -> T {
        self.rewards[s * self.num_actions + a]
    }

    /// Sorted, deduplicated union of supports of every action at `s`.
    #[inline]
    pub fn support(&self, s: usize) -> &[usize] {
        &self.support[self.support_offsets[s]..self.support_offsets[s + 1]]
    }

    /// Total number of stored transition entries.
    pub fn num_entries(&self) -> usize {
        self.successors.len()
    }

    /// `r(s,a) + γ Σ P(s'|s,a) v(s')` over the stored entries.
    #[inline]
    pub fn action_value(&self, v: &[T], s: usize, a: usize) -> T {
        let (succ, prob) = self.transitions(s, a);
        let expected = succ
            .iter()
            .zip(prob)
            .fold(T::zero(), |acc, (&t, &p)| acc + p * v[t]);
        self.reward(s, a) + self.discount * expected
    }
}

/// Accumulates transitions and rewards, then validates them into a
/// [`SparseMdp`].
#[derive(Debug, Clone)]
pub struct MdpBuilder<T> {
    num_states: usize,
    num_actions: usize,
    discount: T,
    rows: Vec<Vec<(usize, T)>>,
    rewards: Vec<T>,
}

impl<T: Scalar> MdpBuilder<T> {
    pub fn new(num_states: usize, num_actions: usize, discount: T) -> Self {
        MdpBuilder {
            num_states,
            num_actions,
            discount,
            rows: vec![Vec::new(); num_states * num_actions],
            rewards: vec![T::zero(); num_states * num_actions],
        }
    }

    fn check_pair(&self, s: usize, a: usize) -> Result<(), MdpError> {
        if s >= self.num_states {
            return Err(MdpError::StateOutOfRange {
                state: s,
                num_states: self.num_states,
            });
        }
        if a >= self.num_actions {
            return Err(MdpError::ActionOutOfRange {
                action: a,
                num_actions: self.num_actions,
            });
        }
        Ok(())
    }

    /// Adds `P(next | s, a) = p`. Zero probabilities are dropped.
    pub fn transition(
        &mut self,
        s: usize,
        a: usize,
        next: usize,
        p: T,
    ) -> Result<&mut Self, MdpError> {
        self.check_pair(s, a)?;
        if next >= self.num_states {
            return Err(MdpError::StateOutOfRange {
                state: next,
                num_states: self.num_states,
            });
        }
        if !p.is_finite() || p < T::zero() || p > T::one() + T::probability_tolerance() {
            return Err(MdpError::InvalidProbability {
                state: s,
                action: a,
                successor: next,
                value: p.as_f64(),
            });
        }
        if p > T::zero() {
            self.rows[s * self.num_actions + a].push((next, p));
        }
        Ok(self)
    }

    pub fn reward(&mut self, s: usize, a: usize, r: T) -> Result<&mut Self, MdpError> {
        self.check_pair(s, a)?;
        if !r.is_finite() {
            return Err(MdpError::NonFiniteReward {
                state: s,
                action: a,
            });
        }
        self.rewards[s * self.num_actions + a] = r;
        Ok(self)
    }

    pub fn build(self) -> Result<SparseMdp<T>, MdpError> {
        let MdpBuilder {
            num_states,
            num_actions,
            discount,
            mut rows,
            rewards,
        } = self;
        if num_states == 0 || num_actions == 0 {
            return Err(MdpError::Empty);
        }
        if !(discount >= T::zero() && discount < T::one()) {
            return Err(MdpError::InvalidDiscount(discount.as_f64()));
        }

        let tol = T::probability_tolerance();
        let mut row_offsets = Vec::with_capacity(rows.len() + 1);
        let mut successors = Vec::new();
        let mut probabilities = Vec::new();
        row_offsets.push(0);
        for (r, row) in rows.iter_mut().enumerate() {
            let (s, a) = (r / num_actions, r % num_actions);
            row.sort_by_key(|&(t, _)| t);
            if let Some(w) = row.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(MdpError::DuplicateSuccessor {
                    state: s,
                    action: a,
                    successor: w[0].0,
                });
            }
            let sum = row.iter().fold(T::zero(), |acc, &(_, p)| acc + p);
            if (sum - T::one()).abs() > tol {
                return Err(MdpError::ProbabilitySum {
                    state: s,
                    action: a,
                    sum: sum.as_f64(),
                });
            }
            for &(t, p) in row.iter() {
                successors.push(t);
                probabilities.push(p);
            }
            row_offsets.push(successors.len());
        }

        let mut support_offsets = Vec::with_capacity(num_states + 1);
        let mut support = Vec::new();
        support_offsets.push(0);
        let mut scratch = Vec::new();
        for s in 0..num_states {
            scratch.clear();
            let lo = row_offsets[s * num_actions];
            let hi = row_offsets[(s + 1) * num_actions];
            scratch.extend_from_slice(&successors[lo..hi]);
            scratch.sort_unstable();
            scratch.dedup();
            support.extend_from_slice(&scratch);
            support_offsets.push(support.len());
        }

        Ok(SparseMdp {
            num_states,
            num_actions,
            row_offsets,
            successors,
            probabilities,
            rewards,
            discount,
            support_offsets,
            support,
        })
    }
}

/// Dense value function indexed by state.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunction<T>(Vec<T>);

impl<T: Scalar> ValueFunction<T> {
    pub fn zeros(num_states: usize) -> Self {
        ValueFunction(vec![T::zero(); num_states])
    }

    /// Wraps a vector, rejecting non-finite entries.
    pub fn from_vec(values: Vec<T>) -> Result<Self, MdpError> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(MdpError::NonFiniteValue { index });
        }
        Ok(ValueFunction(values))
    }

    pub(crate) fn from_vec_unchecked(values: Vec<T>) -> Self {
        ValueFunction(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }

    pub(crate) fn check_len(&self, num_states: usize) -> Result<(), MdpError> {
        if self.0.len() != num_states {
            return Err(MdpError::LengthMismatch {
                expected: num_states,
                found: self.0.len(),
            });
        }
        Ok(())
    }
}

impl<T> Index<usize> for ValueFunction<T> {
    type Output = T;

    fn index(&self, s: usize) -> &T {
        &self.0[s]
    }
}

/// Deterministic stationary policy: one action index per state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy(Vec<usize>);

impl Policy {
    /// Wraps an action vector after checking every entry is `< num_actions`.
    pub fn new(actions: Vec<usize>, num_actions: usize) -> Result<Self, MdpError> {
        if let Some(&action) = actions.iter().find(|&&a| a >= num_actions) {
            return Err(MdpError::ActionOutOfRange {
                action,
                num_actions,
            });
        }
        Ok(Policy(actions))
    }

    pub(crate) fn from_vec_unchecked(actions: Vec<usize>) -> Self {
        Policy(actions)
    }

    pub fn actions(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Index<usize> for Policy {
    type Output = usize;

    fn index(&self, s: usize) -> &usize {
        &self.0[s]
    }
}
