//! Construction A: lattices `scale * (C + q Z^n)` from linear codes over a
//! prime field, nested pairs from nested codes, and the message space
//! `F_q^m` identified with the quotient group.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hnf::hermite_normal_form;
use crate::lattice::{Lattice, NestedPair};
use crate::scalar::{lit, Real};

fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= q {
        if q % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn inv_mod(a: u64, q: u64) -> Option<u64> {
    let (g, x, _) = crate::hnf::extended_gcd(a as i64, q as i64);
    (g == 1).then(|| x.rem_euclid(q as i64) as u64)
}

/// Reduced row echelon form over `F_q`; returns the nonzero rows and their
/// pivot columns.
fn rref(rows: &[Vec<u64>], q: u64) -> (Vec<Vec<u64>>, Vec<usize>) {
    let mut a: Vec<Vec<u64>> = rows.to_vec();
    let n = a.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(p) = (r..a.len()).find(|&i| a[i][col] != 0) else {
            continue;
        };
        a.swap(r, p);
        let inv = inv_mod(a[r][col], q).expect("prime modulus");
        for x in a[r].iter_mut() {
            *x = *x * inv % q;
        }
        for i in 0..a.len() {
            if i != r && a[i][col] != 0 {
                let f = a[i][col];
                let pivot_row = a[r].clone();
                for (x, y) in a[i].iter_mut().zip(&pivot_row) {
                    *x = (*x + q * q - f * y % q) % q;
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == a.len() {
            break;
        }
    }
    a.truncate(r);
    (a, pivots)
}

/// Reduces `v` against an RREF basis; the residue is zero iff `v` is in the
/// span.
fn reduce_against(basis: &[Vec<u64>], pivots: &[usize], v: &[u64], q: u64) -> Vec<u64> {
    let mut v = v.to_vec();
    for (row, &p) in basis.iter().zip(pivots) {
        let f = v[p];
        if f != 0 {
            for (x, y) in v.iter_mut().zip(row) {
                *x = (*x + q * q - f * y % q) % q;
            }
        }
    }
    v
}

/// JSON form `{"q": 5, "n": 2, "generators": [[1, 2]]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeDesc {
    pub q: u64,
    pub n: usize,
    pub generators: Vec<Vec<i64>>,
}

/// A linear code over the prime field `F_q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearCode {
    q: u64,
    n: usize,
    generators: Vec<Vec<u64>>,
}

impl LinearCode {
    pub fn new(q: u64, n: usize, generators: Vec<Vec<i64>>) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        if n == 0 {
            return Err(Error::InvalidCode("length must be positive".into()));
        }
        let mut reduced = Vec::with_capacity(generators.len());
        for g in generators {
            if g.len() != n {
                return Err(Error::InvalidCode(format!(
                    "generator of length {} in a code of length {n}",
                    g.len()
                )));
            }
            reduced.push(g.into_iter().map(|x| x.rem_euclid(q as i64) as u64).collect());
        }
        let (basis, _) = rref(&reduced, q);
        if basis.len() != reduced.len() {
            return Err(Error::DependentGenerators { q });
        }
        Ok(LinearCode {
            q,
            n,
            generators: reduced,
        })
    }

    pub fn from_desc(desc: &CodeDesc) -> Result<Self> {
        Self::new(desc.q, desc.n, desc.generators.clone())
    }

    pub fn to_desc(&self) -> CodeDesc {
        CodeDesc {
            q: self.q,
            n: self.n,
            generators: self
                .generators
                .iter()
                .map(|g| g.iter().map(|&x| x as i64).collect())
                .collect(),
        }
    }

    /// `F_q^n`.
    pub fn full(q: u64, n: usize) -> Result<Self> {
        let gens = (0..n)
            .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
            .collect();
        Self::new(q, n, gens)
    }

    /// `{0}`.
    pub fn zero(q: u64, n: usize) -> Result<Self> {
        Self::new(q, n, Vec::new())
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[Vec<u64>] {
        &self.generators
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        let (basis, pivots) = rref(&self.generators, self.q);
        reduce_against(&basis, &pivots, v, self.q).iter().all(|&x| x == 0)
    }

    pub fn is_subcode_of(&self, other: &LinearCode) -> bool {
        self.q == other.q
            && self.n == other.n
            && self.generators.iter().all(|g| other.contains(g))
    }
}

/// The lattice `scale * (C + q Z^n)`, with a square basis taken from the
/// Hermite normal form of the stacked rows `(generators; q I)`.
pub fn construction_a<T: Real>(code: &LinearCode, scale: T) -> Result<Lattice<T>> {
    let q = code.q as i64;
    let n = code.n;
    let mut rows: Vec<Vec<i64>> = code
        .generators
        .iter()
        .map(|g| g.iter().map(|&x| x as i64).collect())
        .collect();
    for i in 0..n {
        rows.push((0..n).map(|j| if i == j { q } else { 0 }).collect());
    }
    let h = hermite_normal_form(&rows)?;
    let generator = h
        .iter()
        .map(|r| r.iter().map(|&x| lit::<T>(x as f64) * scale).collect())
        .collect();
    Lattice::new(generator)
}

/// Messages `F_q^m`, identified with the cosets of a Construction-A pair.
///
/// A message is a coordinate vector over a fixed echelon complement of `C0`
/// inside `C`; message `a` maps to the coset of `scale * sum_i a_i g_i`.
#[derive(Clone, Debug)]
pub struct MessageSpace {
    q: u64,
    m: usize,
    complement: Vec<Vec<u64>>,
    to_label: Vec<usize>,
    from_label: Vec<usize>,
}

impl MessageSpace {
    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `q^m`.
    pub fn size(&self) -> usize {
        self.to_label.len()
    }

    /// Rate `log2(q^m) / n` in bits per dimension.
    pub fn rate(&self, n: usize) -> f64 {
        (self.size() as f64).log2() / n as f64
    }

    pub fn complement(&self) -> &[Vec<u64>] {
        &self.complement
    }

    pub fn index_of(&self, message: &[u64]) -> usize {
        message
            .iter()
            .rev()
            .fold(0usize, |acc, &d| acc * self.q as usize + d as usize)
    }

    pub fn message_at(&self, mut index: usize) -> Vec<u64> {
        (0..self.m)
            .map(|_| {
                let d = (index % self.q as usize) as u64;
                index /= self.q as usize;
                d
            })
            .collect()
    }

    /// Codeword `sum_i a_i g_i mod q`.
    pub fn codeword(&self, message: &[u64]) -> Vec<u64> {
        let n = self.complement.first().map_or(0, |g| g.len());
        let mut c = vec![0u64; n];
        for (a, g) in message.iter().zip(&self.complement) {
            for (ci, gi) in c.iter_mut().zip(g) {
                *ci = (*ci + a * gi) % self.q;
            }
        }
        c
    }

    /// Coset label of a message.
    pub fn encode(&self, message: &[u64]) -> usize {
        self.to_label[self.index_of(message)]
    }

    /// Message carried by a coset label.
    pub fn decode(&self, label: usize) -> Vec<u64> {
        self.message_at(self.from_label[label])
    }

    /// `k1 x + k2 y` componentwise in `F_q^m`.
    pub fn combine(&self, k1: i64, x: &[u64], k2: i64, y: &[u64]) -> Vec<u64> {
        let q = self.q as i64;
        x.iter()
            .zip(y)
            .map(|(&a, &b)| (k1 * a as i64 + k2 * b as i64).rem_euclid(q) as u64)
            .collect()
    }

    /// Recovers the other user's message from `s = k_self own + k_other other`.
    pub fn recover_message(
        &self,
        s: &[u64],
        own: &[u64],
        k_self: i64,
        k_other: i64,
    ) -> Result<Vec<u64>> {
        let q = self.q as i64;
        let inv = inv_mod(k_other.rem_euclid(q) as u64, self.q)
            .filter(|_| k_other.rem_euclid(q) != 0)
            .ok_or(Error::NonInvertible { k: k_other, q: self.q })? as i64;
        Ok(s.iter()
            .zip(own)
            .map(|(&si, &oi)| ((si as i64 - k_self * oi as i64).rem_euclid(q) * inv).rem_euclid(q) as u64)
            .collect())
    }
}

/// `(construction_a(c), construction_a(c0))` with its message space.
pub fn nested_pair_from_codes<T: Real>(
    c0: &LinearCode,
    c: &LinearCode,
    scale: T,
) -> Result<(NestedPair<T>, MessageSpace)> {
    if c0.q != c.q || c0.n != c.n {
        return Err(Error::InvalidCode("codes differ in field or length".into()));
    }
    if !c0.is_subcode_of(c) {
        return Err(Error::NotSubcode);
    }
    let q = c.q;
    let fine = construction_a(c, scale)?;
    let coarse = construction_a(c0, scale)?;
    let pair = NestedPair::new(fine, coarse)?;

    let (mut basis, mut pivots) = rref(&c0.generators, q);
    let (c_rref, _) = rref(&c.generators, q);
    let mut complement = Vec::new();
    for v in c_rref {
        let residue = reduce_against(&basis, &pivots, &v, q);
        if residue.iter().any(|&x| x != 0) {
            complement.push(v);
            let mut extended = basis.clone();
            extended.extend(complement.iter().cloned());
            let (b, p) = rref(&extended, q);
            basis = b;
            pivots = p;
        }
    }
    let m = complement.len();
    let size = (q as usize).pow(m as u32);
    debug_assert_eq!(size, pair.index());
    let mut space = MessageSpace {
        q,
        m,
        complement,
        to_label: Vec::with_capacity(size),
        from_label: vec![usize::MAX; size],
    };
    for idx in 0..size {
        let cw = space.codeword(&space.message_at(idx));
        let x: Vec<T> = cw.iter().map(|&v| lit::<T>(v as f64) * scale).collect();
        let label = pair.label(&x)?;
        if space.from_label[label] != usize::MAX {
            return Err(Error::InvalidCode("message map is not injective".into()));
        }
        space.from_label[label] = idx;
        space.to_label.push(label);
    }
    Ok((pair, space))
}

/// Whether some nonzero quotient element has order dividing `|k|`, i.e. the
/// secrecy precondition fails for gain `k`.
pub fn order_divides_check<T: Real>(pair: &NestedPair<T>, k: i64) -> bool {
    pair.order_divides(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_validation() {
        assert_eq!(LinearCode::new(4, 2, vec![]).unwrap_err(), Error::NotPrime(4));
        assert!(matches!(
            LinearCode::new(5, 2, vec![vec![1, 2], vec![2, 4]]),
            Err(Error::DependentGenerators { q: 5 })
        ));
    }

    #[test]
    fn full_and_zero_codes() {
        let full = construction_a::<f64>(&LinearCode::full(5, 2).unwrap(), 0.5).unwrap();
        assert!(full.same_points(&Lattice::scaled_integer(2, 0.5).unwrap()));
        let zero = construction_a::<f64>(&LinearCode::zero(5, 2).unwrap(), 1.0).unwrap();
        assert!(zero.same_points(&Lattice::scaled_integer(2, 5.0).unwrap()));
    }

    #[test]
    fn span_1_2_over_f5() {
        let c = LinearCode::new(5, 2, vec![vec![1, 2]]).unwrap();
        let l = construction_a::<f64>(&c, 1.0).unwrap();
        assert!((l.cell_volume() - 5.0).abs() < 1e-12);
        // point-enumeration oracle: x in L iff x mod 5 in span{(1,2)}
        for a in -12i64..=12 {
            for b in -12i64..=12 {
                let in_code = (0..5).any(|t| {
                    (a - t).rem_euclid(5) == 0 && (b - 2 * t).rem_euclid(5) == 0
                });
                assert_eq!(l.contains(&[a as f64, b as f64]), in_code, "({a},{b})");
            }
        }
    }

    #[test]
    fn equivalent_generators_same_lattice() {
        let a = LinearCode::new(5, 3, vec![vec![1, 2, 0], vec![0, 1, 4]]).unwrap();
        let b = LinearCode::new(5, 3, vec![vec![1, 3, 4], vec![2, 4, 0]]).unwrap();
        let la = construction_a::<f64>(&a, 1.0).unwrap();
        let lb = construction_a::<f64>(&b, 1.0).unwrap();
        assert!(la.same_points(&lb));
    }

    #[test]
    fn nested_codes() {
        let c0 = LinearCode::zero(5, 2).unwrap();
        let c = LinearCode::new(5, 2, vec![vec![1, 2]]).unwrap();
        let (pair, space) = nested_pair_from_codes::<f64>(&c0, &c, 1.0).unwrap();
        assert_eq!(pair.index(), 5);
        assert_eq!(space.size(), 5);
        assert_eq!(space.m(), 1);

        let (pair, space) = nested_pair_from_codes::<f64>(&c, &c, 1.0).unwrap();
        assert_eq!(pair.index(), 1);
        assert_eq!(space.size(), 1);

        assert_eq!(
            nested_pair_from_codes::<f64>(&c, &c0, 1.0).unwrap_err(),
            Error::NotSubcode
        );
    }

    #[test]
    fn isomorphism_is_exhaustive() {
        let c0 = LinearCode::new(3, 3, vec![vec![1, 1, 1]]).unwrap();
        let c = LinearCode::full(3, 3).unwrap();
        let (pair, space) = nested_pair_from_codes::<f64>(&c0, &c, 1.0).unwrap();
        assert_eq!(space.size(), 9);
        for ia in 0..9 {
            let a = space.message_at(ia);
            assert_eq!(space.decode(space.encode(&a)), a);
            for ib in 0..9 {
                let b = space.message_at(ib);
                let sum = space.combine(1, &a, 1, &b);
                assert_eq!(pair.add(space.encode(&a), space.encode(&b)), space.encode(&sum));
            }
        }
    }

    #[test]
    fn recover_from_combination() {
        let c0 = LinearCode::zero(5, 1).unwrap();
        let c = LinearCode::full(5, 1).unwrap();
        let (_, space) = nested_pair_from_codes::<f64>(&c0, &c, 1.0).unwrap();
        let s = space.combine(1, &[3], 2, &[4]);
        assert_eq!(s, vec![1]);
        assert_eq!(space.recover_message(&s, &[3], 1, 2).unwrap(), vec![4]);
        assert_eq!(space.recover_message(&[2], &[0], 1, 1).unwrap(), vec![2]);
        assert_eq!(
            space.recover_message(&s, &[3], 1, 5).unwrap_err(),
            Error::NonInvertible { k: 5, q: 5 }
        );
    }

    #[test]
    fn prime_order_condition() {
        let c0 = LinearCode::zero(5, 1).unwrap();
        let c = LinearCode::full(5, 1).unwrap();
        let (pair, _) = nested_pair_from_codes::<f64>(&c0, &c, 1.0).unwrap();
        assert!(!order_divides_check(&pair, 2));
        assert!(order_divides_check(&pair, 5));
        assert!(order_divides_check(&pair, 10));
        for k in 1..30 {
            assert_eq!(order_divides_check(&pair, k), k % 5 == 0);
        }
    }
}
