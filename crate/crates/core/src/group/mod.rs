//! Finite groups, cocycle actions and reduced twisted crossed products.

mod action;
mod automorphism;
mod crossed;
mod regular;

pub use action::{
    conjugation, verify_cocycle_action, CocycleAction, CocycleReport, IDENTITY_COCYCLE,
    IDENTITY_COMPOSITION, IDENTITY_NORMALIZATION,
};
pub use automorphism::{classify_automorphism, AutomorphismReport, Classification};
pub use crossed::{canonical_expectation, crossed_product, CrossedProduct, CrossedProductReport};
pub use regular::{
    coset_partition, recover_structure, regular_index_pipeline, verify_regularity,
    weyl_and_index_report, CosetPartition, IndexCheck, RecoveredStructure, RegularityReport,
    WeylIndexReport,
};

use crate::error::{Error, Result};

/// A finite group given by its Cayley table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    labels: Vec<String>,
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

impl FiniteGroup {
    /// Validates closure, associativity, identity and inverses exhaustively.
    pub fn new(labels: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidGroup("empty group".into()));
        }
        if table.len() != n || table.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidGroup(format!("Cayley table is not {n}x{n}")));
        }
        if table.iter().flatten().any(|&k| k >= n) {
            return Err(Error::InvalidGroup("table entry out of range".into()));
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::InvalidGroup(format!(
                            "associativity fails at ({}, {}, {})",
                            labels[a], labels[b], labels[c]
                        )));
                    }
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g))
            .ok_or_else(|| Error::InvalidGroup("no identity element".into()))?;
        let mut inverse = Vec::with_capacity(n);
        for g in 0..n {
            let h = (0..n)
                .find(|&h| table[g][h] == identity && table[h][g] == identity)
                .ok_or_else(|| Error::InvalidGroup(format!("{} has no inverse", labels[g])))?;
            inverse.push(h);
        }
        Ok(FiniteGroup {
            labels,
            table,
            identity,
            inverse,
        })
    }

    fn from_fn(labels: Vec<String>, mul: impl Fn(usize, usize) -> usize) -> Self {
        let n = labels.len();
        let table = (0..n)
            .map(|a| (0..n).map(|b| mul(a, b)).collect())
            .collect();
        FiniteGroup::new(labels, table).expect("standard group")
    }

    pub fn trivial() -> Self {
        FiniteGroup::cyclic(1)
    }

    pub fn cyclic(n: usize) -> Self {
        let labels = (0..n).map(|k| format!("r{k}")).collect();
        FiniteGroup::from_fn(labels, |a, b| (a + b) % n)
    }

    /// `ℤ₂ × ℤ₂` with labels `e, a, b, c` and `ab = c`.
    pub fn klein_four() -> Self {
        let labels = ["e", "a", "b", "c"].iter().map(|s| s.to_string()).collect();
        FiniteGroup::from_fn(labels, |x, y| x ^ y)
    }

    /// Dihedral group of order `2n`: `r^k` at index `k`, `s r^k` at `n + k`.
    pub fn dihedral(n: usize) -> Self {
        let labels = (0..n)
            .map(|k| format!("r{k}"))
            .chain((0..n).map(|k| format!("sr{k}")))
            .collect();
        FiniteGroup::from_fn(labels, move |a, b| {
            let (fa, ka) = (a / n, a % n);
            let (fb, kb) = (b / n, b % n);
            // (s^fa r^ka)(s^fb r^kb) = s^(fa+fb) r^(±ka + kb)
            let k = if fb == 0 { ka + kb } else { n - ka + kb };
            ((fa + fb) % 2) * n + k % n
        })
    }

    /// Permutations of three points, composed right to left.
    pub fn symmetric3() -> Self {
        let perms: Vec<[usize; 3]> = vec![
            [0, 1, 2],
            [1, 0, 2],
            [0, 2, 1],
            [2, 1, 0],
            [1, 2, 0],
            [2, 0, 1],
        ];
        let labels = perms
            .iter()
            .map(|p| format!("({}{}{})", p[0], p[1], p[2]))
            .collect();
        let ps = perms.clone();
        FiniteGroup::from_fn(labels, move |a, b| {
            let comp = [ps[a][ps[b][0]], ps[a][ps[b][1]], ps[a][ps[b][2]]];
            ps.iter().position(|p| *p == comp).expect("closed")
        })
    }

    /// Unit quaternions `±1, ±i, ±j, ±k`.
    pub fn quaternion() -> Self {
        // index = 2·unit + sign, unit ∈ {1, i, j, k}
        let labels = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        // unit products: (unit, sign flip)
        const PROD: [[(usize, usize); 4]; 4] = [
            [(0, 0), (1, 0), (2, 0), (3, 0)],
            [(1, 0), (0, 1), (3, 0), (2, 1)],
            [(2, 0), (3, 1), (0, 1), (1, 0)],
            [(3, 0), (2, 0), (1, 1), (0, 1)],
        ];
        FiniteGroup::from_fn(labels, |a, b| {
            let (u, s) = PROD[a / 2][b / 2];
            2 * u + (s + a % 2 + b % 2) % 2
        })
    }

    pub fn direct_product(&self, other: &FiniteGroup) -> Self {
        let m = other.order();
        let labels = self
            .labels
            .iter()
            .flat_map(|a| other.labels.iter().map(move |b| format!("{a}.{b}")))
            .collect();
        FiniteGroup::from_fn(labels, |x, y| {
            self.mul(x / m, y / m) * m + other.mul(x % m, y % m)
        })
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..n).all(|b| self.table[a][b] == self.table[b][a]))
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// Some `φ` with `φ(ab) = φ(a)φ(b)` onto `other`, as `φ[a]`, found by
    /// backtracking with element-order pruning.
    pub fn find_isomorphism(&self, other: &FiniteGroup) -> Option<Vec<usize>> {
        let n = self.order();
        if n != other.order() {
            return None;
        }
        let mut ord_a: Vec<usize> = (0..n).map(|a| self.element_order(a)).collect();
        let mut ord_b: Vec<usize> = (0..n).map(|b| other.element_order(b)).collect();
        let (oa, ob) = (ord_a.clone(), ord_b.clone());
        ord_a.sort();
        ord_b.sort();
        if ord_a != ord_b {
            return None;
        }
        let mut map = vec![usize::MAX; n];
        let mut used = vec![false; n];
        map[self.identity] = other.identity;
        used[other.identity] = true;
        let order: Vec<usize> = (0..n).filter(|&a| a != self.identity).collect();
        if self.extend_map(other, &order, 0, &mut map, &mut used, &oa, &ob) {
            Some(map)
        } else {
            None
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn extend_map(
        &self,
        other: &FiniteGroup,
        order: &[usize],
        pos: usize,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        oa: &[usize],
        ob: &[usize],
    ) -> bool {
        if pos == order.len() {
            return true;
        }
        let a = order[pos];
        for b in 0..other.order() {
            if used[b] || oa[a] != ob[b] {
                continue;
            }
            map[a] = b;
            used[b] = true;
            let consistent = (0..self.order()).all(|x| {
                if map[x] == usize::MAX {
                    return true;
                }
                [(a, x), (x, a)].iter().all(|&(p, q)| {
                    let pq = self.mul(p, q);
                    map[pq] == usize::MAX || map[pq] == other.mul(map[p], map[q])
                })
            });
            if consistent && self.extend_map(other, order, pos + 1, map, used, oa, ob) {
                return true;
            }
            map[a] = usize::MAX;
            used[b] = false;
        }
        false
    }
}

impl std::fmt::Display for FiniteGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "group of order {}", self.order())
    }
}


#[cfg(test)]
mod catalog_tests;
