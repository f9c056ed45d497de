//! Bellman operator, residual norms, greedy policies, and exact policy
//! evaluation.

use crate::mdp::{MdpError, Policy, SparseMdp, ValueFunction};
use crate::scalar::{max_abs_diff, Scalar};

/// Above this many states `evaluate_policy_exact` iterates instead of
/// factoring a dense matrix.
pub const DIRECT_SOLVE_MAX_STATES: usize = 2000;

const FIXED_POINT_MAX_SWEEPS: usize = 10_000_000;

/// `max_a [r(s,a) + γ Σ P(s'|s,a) v(s')]`, reading only stored entries.
#[inline]
pub fn backup_state<T: Scalar>(mdp: &SparseMdp<T>, v: &[T], s: usize) -> T {
    let mut best = mdp.action_value(v, s, 0);
    for a in 1..mdp.num_actions() {
        let q = mdp.action_value(v, s, a);
        if q > best {
            best = q;
        }
    }
    best
}

/// Backup with the greedy action; ties go to the lowest action index.
#[inline]
pub fn greedy_action<T: Scalar>(mdp: &SparseMdp<T>, v: &[T], s: usize) -> (usize, T) {
    let mut best = (0, mdp.action_value(v, s, 0));
    for a in 1..mdp.num_actions() {
        let q = mdp.action_value(v, s, a);
        if q > best.1 {
            best = (a, q);
        }
    }
    best
}

/// Synchronous application of the Bellman operator. `v` is left untouched.
pub fn apply_bellman<T: Scalar>(mdp: &SparseMdp<T>, v: &ValueFunction<T>) -> ValueFunction<T> {
    assert_eq!(v.len(), mdp.num_states(), "value function length");
    let out = (0..mdp.num_states())
        .map(|s| backup_state(mdp, v.as_slice(), s))
        .collect();
    ValueFunction::from_vec_unchecked(out)
}

/// `max_s |u(s) - v(s)|`.
pub fn sup_norm_diff<T: Scalar>(u: &ValueFunction<T>, v: &ValueFunction<T>) -> Result<T, MdpError> {
    v.check_len(u.len())?;
    Ok(max_abs_diff(u.as_slice(), v.as_slice()))
}

/// Bellman residual `‖v - Tv‖`.
pub fn bellman_residual<T: Scalar>(mdp: &SparseMdp<T>, v: &ValueFunction<T>) -> T {
    assert_eq!(v.len(), mdp.num_states(), "value function length");
    (0..mdp.num_states()).fold(T::zero(), |acc, s| {
        acc.max((backup_state(mdp, v.as_slice(), s) - v[s]).abs())
    })
}

/// Whether `‖v - Tv‖ <= eps`.
pub fn is_eps_contracted<T: Scalar>(mdp: &SparseMdp<T>, v: &ValueFunction<T>, eps: T) -> bool {
    bellman_residual(mdp, v) <= eps
}

/// Greedy policy with respect to `v`.
pub fn induce_policy<T: Scalar>(mdp: &SparseMdp<T>, v: &ValueFunction<T>) -> Policy {
    assert_eq!(v.len(), mdp.num_states(), "value function length");
    let actions = (0..mdp.num_states())
        .map(|s| greedy_action(mdp, v.as_slice(), s).0)
        .collect();
    Policy::from_vec_unchecked(actions)
}

/// Loss bound `2·eps·γ / (1 - γ)` for the greedy policy of an
/// eps-contracted value function.
pub fn policy_error_bound<T: Scalar>(eps: T, gamma: T) -> Result<T, MdpError> {
    if !(gamma >= T::zero() && gamma < T::one()) {
        return Err(MdpError::InvalidDiscount(gamma.as_f64()));
    }
    Ok(T::lit(2.0) * eps * gamma / (T::one() - gamma))
}

/// Value of a fixed policy, solving `V = r_π + γ P_π V`.
///
/// Dense Gaussian elimination up to [`DIRECT_SOLVE_MAX_STATES`] states,
/// fixed-point iteration to a 1e-12 residual beyond that.
pub fn evaluate_policy_exact<T: Scalar>(mdp: &SparseMdp<T>, policy: &Policy) -> ValueFunction<T> {
    let n = mdp.num_states();
    assert_eq!(policy.len(), n, "policy length");
    assert!(
        policy.actions().iter().all(|&a| a < mdp.num_actions()),
        "policy action out of range"
    );
    let values = if n <= DIRECT_SOLVE_MAX_STATES {
        solve_dense(mdp, policy)
    } else {
        solve_fixed_point(mdp, policy)
    };
    ValueFunction::from_vec_unchecked(values)
}

fn solve_dense<T: Scalar>(mdp: &SparseMdp<T>, policy: &Policy) -> Vec<T> {
    let n = mdp.num_states();
    let gamma = mdp.discount();
    // Row-major (I - γ P_π) augmented with r_π.
    let width = n + 1;
    let mut m = vec![T::zero(); n * width];
    for s in 0..n {
        let a = policy[s];
        let row = &mut m[s * width..(s + 1) * width];
        row[s] = T::one();
        let (succ, prob) = mdp.transitions(s, a);
        for (&t, &p) in succ.iter().zip(prob) {
            row[t] -= gamma * p;
        }
        row[n] = mdp.reward(s, a);
    }

    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                m[i * width + col]
                    .abs()
                    .partial_cmp(&m[j * width + col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("non-empty pivot range");
        if pivot != col {
            for k in col..width {
                m.swap(pivot * width + k, col * width + k);
            }
        }
        let diag = m[col * width + col];
        for row in col + 1..n {
            let factor = m[row * width + col] / diag;
            if factor == T::zero() {
                continue;
            }
            for k in col..width {
                let upper = m[col * width + k];
                m[row * width + k] -= factor * upper;
            }
        }
    }

    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = m[row * width + n];
        for k in row + 1..n {
            acc -= m[row * width + k] * x[k];
        }
        x[row] = acc / m[row * width + row];
    }
    x
}

fn solve_fixed_point<T: Scalar>(mdp: &SparseMdp<T>, policy: &Policy) -> Vec<T> {
    let n = mdp.num_states();
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(16.0));
    let mut cur = vec![T::zero(); n];
    let mut next = vec![T::zero(); n];
    for _ in 0..FIXED_POINT_MAX_SWEEPS {
        for (s, slot) in next.iter_mut().enumerate() {
            *slot = mdp.action_value(&cur, s, policy[s]);
        }
        let residual = max_abs_diff(&next, &cur);
        std::mem::swap(&mut cur, &mut next);
        if residual <= tol {
            break;
        }
    }
    cur
}
