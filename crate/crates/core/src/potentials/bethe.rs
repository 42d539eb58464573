//! Addresses on the Bethe lattice and the two automorphisms `tau1`, `tau2`.
//!
//! The root is the empty address. A vertex at level `l >= 1` is
//! `(a1, ..., al)` with `a1` in `1..=k` and `aj` in `1..=k-1` for `j >= 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BetheAddress(Vec<u32>);

impl BetheAddress {
    pub fn new(digits: Vec<u32>) -> Self {
        BetheAddress(digits)
    }

    pub fn root() -> Self {
        BetheAddress(Vec::new())
    }

    pub fn digits(&self) -> &[u32] {
        &self.0
    }

    pub fn level(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn validate(&self, k: u32) -> Result<()> {
        if k < 3 {
            return Err(Error::InvalidFamily(format!("Bethe lattice needs k >= 3, got {k}")));
        }
        for (j, &a) in self.0.iter().enumerate() {
            let top = if j == 0 { k } else { k - 1 };
            if a == 0 || a > top {
                return Err(Error::InvalidAddress(format!("{self:?} for k = {k}")));
            }
        }
        Ok(())
    }

    pub fn parent(&self) -> Option<BetheAddress> {
        if self.is_root() {
            None
        } else {
            Some(BetheAddress(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    /// Parent first, then children in digit order.
    pub fn neighbors(&self, k: u32) -> Vec<BetheAddress> {
        let mut out: Vec<BetheAddress> = self.parent().into_iter().collect();
        let children = if self.is_root() { k } else { k - 1 };
        for a in 1..=children {
            let mut d = self.0.clone();
            d.push(a);
            out.push(BetheAddress(d));
        }
        out
    }

    pub fn is_adjacent(&self, other: &BetheAddress) -> bool {
        self.parent().as_ref() == Some(other) || other.parent().as_ref() == Some(self)
    }

    /// Breadth-first index of the address, which is its vertex index in any
    /// ball containing it.
    pub fn rank(&self, k: u32) -> Result<u64> {
        self.validate(k)?;
        let l = self.level() as u32;
        if l == 0 {
            return Ok(0);
        }
        let overflow = || Error::Overflow(format!("rank of {self:?}"));
        let q = (k - 1) as u64;
        let before = crate::graph::ball_cardinality(crate::graph::GraphFamily::Bethe { k }, l - 1)?;
        let mut within: u64 = (self.0[0] - 1) as u64;
        for &a in &self.0[1..] {
            within = within.checked_mul(q).and_then(|w| w.checked_add((a - 1) as u64)).ok_or_else(overflow)?;
        }
        before.checked_add(within).ok_or_else(overflow)
    }

    pub fn tau1(&self, k: u32) -> Result<BetheAddress> {
        self.validate(k)?;
        let d = &self.0;
        Ok(BetheAddress(match d.len() {
            0 => vec![1],
            1 if d[0] == k => Vec::new(),
            _ if d[0] <= k - 1 => {
                let mut out = Vec::with_capacity(d.len() + 1);
                out.push(1);
                out.extend_from_slice(d);
                out
            }
            _ => {
                let mut out = Vec::with_capacity(d.len() - 1);
                out.push(d[1] + 1);
                out.extend_from_slice(&d[2..]);
                out
            }
        }))
    }

    pub fn tau1_inv(&self, k: u32) -> Result<BetheAddress> {
        self.validate(k)?;
        let d = &self.0;
        Ok(BetheAddress(match d.len() {
            0 => vec![k],
            1 if d[0] == 1 => Vec::new(),
            _ if d[0] == 1 => d[1..].to_vec(),
            _ => {
                let mut out = Vec::with_capacity(d.len() + 1);
                out.push(k);
                out.push(d[0] - 1);
                out.extend_from_slice(&d[1..]);
                out
            }
        }))
    }

    pub fn tau2(&self, k: u32) -> Result<BetheAddress> {
        self.validate(k)?;
        Ok(self.rotate(k, 1))
    }

    pub fn tau2_inv(&self, k: u32) -> Result<BetheAddress> {
        self.validate(k)?;
        Ok(self.rotate(k, -1))
    }

    /// `tau2^m` for any integer `m`.
    pub fn tau2_pow(&self, k: u32, m: i64) -> Result<BetheAddress> {
        self.validate(k)?;
        Ok(self.rotate(k, m))
    }

    fn rotate(&self, k: u32, m: i64) -> BetheAddress {
        let shift = |a: u32, n: u32| -> u32 {
            let n64 = n as i64;
            ((a as i64 - 1 + m).rem_euclid(n64) + 1) as u32
        };
        BetheAddress(
            self.0
                .iter()
                .enumerate()
                .map(|(j, &a)| if j == 0 { shift(a, k) } else { shift(a, k - 1) })
                .collect(),
        )
    }
}

/// Period of `tau2`, `lcm(k, k-1) = k(k-1)`.
pub fn tau2_period(k: u32) -> u64 {
    k as u64 * (k as u64 - 1)
}

/// `(d1, d2)` with `tau2^{d2} tau1^{d1}(0) = x`, found by exhaustive search
/// over `d1 <= max_d1` and one period of `tau2`. Such a pair exists on
/// levels at most 2 and on addresses whose digits after the first agree.
pub fn transitive_coordinates(x: &BetheAddress, k: u32, max_d1: u32) -> Result<(u32, u64)> {
    x.validate(k)?;
    let mut base = BetheAddress::root();
    for d1 in 0..=max_d1 {
        if base.level() == x.level() {
            let mut y = base.clone();
            for d2 in 0..tau2_period(k) {
                if &y == x {
                    return Ok((d1, d2));
                }
                y = y.rotate(k, 1);
            }
        }
        base = base.tau1(k)?;
    }
    Err(Error::SearchExhausted(format!("{x:?} (k = {k}, d1 <= {max_d1})")))
}

/// Exponents `m_1..m_l` with `x = tau2^{m_l} tau1 ... tau2^{m_1} tau1 (0)`.
/// Exists for every address.
pub fn transitive_word(x: &BetheAddress, k: u32) -> Result<Vec<u32>> {
    x.validate(k)?;
    let mut word = Vec::with_capacity(x.level());
    let mut cur = x.clone();
    while !cur.is_root() {
        let m = cur.0[0] - 1;
        // tau2^{-m} sends the leading digit to 1, then tau1^{-1} drops it
        let y = cur.rotate(k, -(m as i64));
        word.push(m);
        cur = y.tau1_inv(k)?;
    }
    word.reverse();
    Ok(word)
}

/// Applies `tau2^{m_l} tau1 ... tau2^{m_1} tau1` to `x`.
pub fn apply_word(word: &[u32], x: &BetheAddress, k: u32) -> Result<BetheAddress> {
    let mut y = x.clone();
    for &m in word {
        y = y.tau1(k)?.rotate(k, m as i64);
    }
    Ok(y)
}

/// Applies the inverse of [`apply_word`].
pub fn apply_word_inv(word: &[u32], x: &BetheAddress, k: u32) -> Result<BetheAddress> {
    let mut y = x.clone();
    for &m in word.iter().rev() {
        y = y.rotate(k, -(m as i64)).tau1_inv(k)?;
    }
    Ok(y)
}

/// All addresses of level exactly `l`, in breadth-first order.
pub fn addresses_at_level(k: u32, l: usize) -> Vec<BetheAddress> {
    let mut out = vec![BetheAddress::root()];
    for j in 0..l {
        let top = if j == 0 { k } else { k - 1 };
        out = out
            .into_iter()
            .flat_map(|a| {
                (1..=top).map(move |d| {
                    let mut v = a.0.clone();
                    v.push(d);
                    BetheAddress(v)
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau2_examples() {
        assert_eq!(BetheAddress::new(vec![3]).tau2(3).unwrap().digits(), &[1]);
        assert_eq!(BetheAddress::new(vec![1]).tau2(3).unwrap().digits(), &[2]);
        assert_eq!(BetheAddress::new(vec![2, 2]).tau2(3).unwrap().digits(), &[3, 1]);
    }

    #[test]
    fn tau1_examples() {
        let k = 3;
        assert_eq!(BetheAddress::root().tau1(k).unwrap().digits(), &[1]);
        assert!(BetheAddress::new(vec![3]).tau1(k).unwrap().is_root());
        assert_eq!(BetheAddress::new(vec![2]).tau1(k).unwrap().digits(), &[1, 2]);
        assert_eq!(BetheAddress::new(vec![3, 1, 2]).tau1(k).unwrap().digits(), &[2, 2]);
    }

    #[test]
    fn invalid_digits_rejected() {
        assert!(BetheAddress::new(vec![4]).tau1(3).is_err());
        assert!(BetheAddress::new(vec![1, 3]).tau2(3).is_err());
        assert!(BetheAddress::new(vec![0]).validate(3).is_err());
    }

    #[test]
    fn rank_matches_level_order() {
        let k = 4;
        let mut expected = 0;
        for l in 0..4 {
            for a in addresses_at_level(k, l) {
                assert_eq!(a.rank(k).unwrap(), expected);
                expected += 1;
            }
        }
    }

    #[test]
    fn single_word_fails_beyond_its_orbit() {
        let x = BetheAddress::new(vec![1, 1, 2]);
        assert!(matches!(transitive_coordinates(&x, 3, 8), Err(Error::SearchExhausted(_))));
        let w = transitive_word(&x, 3).unwrap();
        assert_eq!(apply_word(&w, &BetheAddress::root(), 3).unwrap(), x);
    }
}
