//! Exact classical enumeration of the memory-reset protocol.
//!
//! The single-cycle protocol is a finite probability tree: the observer
//! learns of a disaster (and resets), resets pseudo-randomly, or carries on.
//! The post-reset disaster observation is obtained by renormalizing the
//! reset subtree — not by quoting the closed-form expression — which makes
//! this module an independent oracle for the quantum branch-weight
//! computation and the closed forms.
//!
//! When `p` and `q` are ratios of integers up to 10⁶ the tree is evaluated
//! in exact rational arithmetic; otherwise in double precision.

use alloc::vec::Vec;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::protocols::BranchGroup;

type Rational = Ratio<i128>;

const MAX_DENOMINATOR: i128 = 1_000_000;

fn rational_to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// One leaf of the outcome tree.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeLeaf {
    pub group: BranchGroup,
    /// Post-reset observation; present on resetting paths only.
    pub disaster_after_reset: Option<bool>,
    pub probability: f64,
    /// Exact probability when the tree is in rational mode.
    pub exact: Option<Rational>,
}

/// The enumerated protocol tree. Zero-probability leaves are omitted.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeTree {
    leaves: Vec<OutcomeLeaf>,
    exact_mode: bool,
}

impl OutcomeTree {
    pub fn leaves(&self) -> &[OutcomeLeaf] {
        &self.leaves
    }

    pub fn is_exact(&self) -> bool {
        self.exact_mode
    }

    pub fn leaf_probability_sum(&self) -> f64 {
        self.leaves.iter().map(|l| l.probability).sum()
    }

    /// Exact leaf sum in rational mode; equals one by construction.
    pub fn exact_leaf_sum(&self) -> Option<Rational> {
        if !self.exact_mode {
            return None;
        }
        Some(
            self.leaves
                .iter()
                .filter_map(|l| l.exact)
                .fold(Rational::new(0, 1), |acc, x| acc + x),
        )
    }

    fn mass_where(&self, keep: impl Fn(&OutcomeLeaf) -> bool) -> (f64, Option<Rational>) {
        let float: f64 = self.leaves.iter().filter(|l| keep(l)).map(|l| l.probability).sum();
        let exact = if self.exact_mode {
            Some(
                self.leaves
                    .iter()
                    .filter(|l| keep(l))
                    .filter_map(|l| l.exact)
                    .fold(Rational::new(0, 1), |acc, x| acc + x),
            )
        } else {
            None
        };
        (float, exact)
    }

    /// Probability that the observer resets: mass of the k1 and k2 leaves.
    pub fn p_reset(&self) -> f64 {
        let (float, exact) = self.mass_where(|l| l.group != BranchGroup::K3);
        exact.map(rational_to_f64).unwrap_or(float)
    }

    /// Probability of facing the disaster after a reset, by renormalizing
    /// the reset subtree.
    pub fn p_dis(&self) -> Result<f64> {
        if self.exact_mode {
            let (_, reset) = self.mass_where(|l| l.group != BranchGroup::K3);
            let (_, hit) = self.mass_where(|l| l.disaster_after_reset == Some(true));
            let reset = reset.expect("exact mode");
            if reset == Rational::new(0, 1) {
                return Err(Error::UndefinedConditional);
            }
            Ok(rational_to_f64(hit.expect("exact mode") / reset))
        } else {
            let (reset, _) = self.mass_where(|l| l.group != BranchGroup::K3);
            if reset <= 0.0 {
                return Err(Error::UndefinedConditional);
            }
            let (hit, _) = self.mass_where(|l| l.disaster_after_reset == Some(true));
            Ok(hit / reset)
        }
    }
}

/// Best rational approximation of `x` with denominator at most 10⁶, accepted
/// only when it reproduces `x` to absolute accuracy 1e-15.
fn rationalize(x: f64) -> Option<Rational> {
    if !(0.0..=1.0).contains(&x) {
        return None;
    }
    let mut value = x;
    let (mut num_prev, mut den_prev): (i128, i128) = (1, 0);
    let mut num = libm::floor(value) as i128;
    let mut den: i128 = 1;
    for _ in 0..64 {
        let approx = num as f64 / den as f64;
        if libm::fabs(x - approx) <= 1e-15 {
            return Some(Rational::new(num, den));
        }
        let frac = value - libm::floor(value);
        if frac <= f64::EPSILON {
            break;
        }
        value = 1.0 / frac;
        let coefficient = libm::floor(value) as i128;
        let num_next = coefficient * num + num_prev;
        let den_next = coefficient * den + den_prev;
        if den_next > MAX_DENOMINATOR {
            break;
        }
        num_prev = num;
        den_prev = den;
        num = num_next;
        den = den_next;
    }
    let approx = num as f64 / den as f64;
    (libm::fabs(x - approx) <= 1e-15).then(|| Rational::new(num, den))
}

fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidProbability { name, value });
    }
    Ok(())
}

/// Enumerates the protocol tree for disaster probability `p` and reset
/// fraction `q`.
pub fn enumerate(p: f64, q: f64) -> Result<OutcomeTree> {
    check_probability("p", p)?;
    check_probability("q", q)?;
    let rational = rationalize(p).zip(rationalize(q));
    let mut leaves = Vec::with_capacity(3);
    match rational {
        Some((rp, rq)) => {
            let one = Rational::new(1, 1);
            let masses = [
                (BranchGroup::K1, Some(true), rp),
                (BranchGroup::K2, Some(false), (one - rp) * rq),
                (BranchGroup::K3, None, (one - rp) * (one - rq)),
            ];
            for (group, outcome, mass) in masses {
                if mass == Rational::new(0, 1) {
                    continue;
                }
                leaves.push(OutcomeLeaf {
                    group,
                    disaster_after_reset: outcome,
                    probability: rational_to_f64(mass),
                    exact: Some(mass),
                });
            }
            Ok(OutcomeTree { leaves, exact_mode: true })
        }
        None => {
            let masses = [
                (BranchGroup::K1, Some(true), p),
                (BranchGroup::K2, Some(false), (1.0 - p) * q),
                (BranchGroup::K3, None, (1.0 - p) * (1.0 - q)),
            ];
            for (group, outcome, mass) in masses {
                if mass <= 0.0 {
                    continue;
                }
                leaves.push(OutcomeLeaf {
                    group,
                    disaster_after_reset: outcome,
                    probability: mass,
                    exact: None,
                });
            }
            Ok(OutcomeTree { leaves, exact_mode: false })
        }
    }
}

/// Reset probability read off the tree.
pub fn oracle_p_reset(p: f64, q: f64) -> Result<f64> {
    Ok(enumerate(p, q)?.p_reset())
}

/// Post-reset disaster probability read off the tree.
pub fn oracle_p_dis(p: f64, q: f64) -> Result<f64> {
    enumerate(p, q)?.p_dis()
}
