use serde::Serialize;

use super::{Matroid, MatroidError};

pub const DEFAULT_SUBSET_CAP: usize = 20;

/// Coefficients listed from the leading term down: `chi[k]` multiplies
/// `λ^{r−k}` and `reduced[k]` multiplies `λ^{r−1−k}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CharPoly {
    pub chi: Vec<i64>,
    pub reduced: Vec<i64>,
    pub mu: Vec<i64>,
    pub mu_bar: Vec<i64>,
}

impl CharPoly {
    fn from_chi(chi: Vec<i64>) -> Result<Self, MatroidError> {
        // synthetic division by (λ − 1)
        let mut reduced = Vec::with_capacity(chi.len().saturating_sub(1));
        let mut carry = 0i64;
        for &c in &chi[..chi.len() - 1] {
            carry += c;
            reduced.push(carry);
        }
        if carry + chi[chi.len() - 1] != 0 {
            return Err(MatroidError::Encoding("characteristic polynomial does not vanish at 1".into()));
        }
        let unsign = |v: &[i64]| v.iter().enumerate().map(|(k, c)| if k % 2 == 0 { *c } else { -c }).collect();
        Ok(CharPoly { mu: unsign(&chi), mu_bar: unsign(&reduced), chi, reduced })
    }
}

/// `χ(λ) = Σ_{S⊆E} (−1)^{|S|} λ^{r − rk S}`, with closures of all subsets
/// built incrementally from the cover relation.
pub fn char_poly_subsets(m: &Matroid, cap: usize) -> Result<Vec<i64>, MatroidError> {
    let n = m.size();
    if n > cap {
        return Err(MatroidError::GroundSetTooLarge { size: n, cap });
    }
    let flats = m.flats();
    let mut step = vec![u32::MAX; flats.len() * n];
    for f in 0..flats.len() {
        for &c in m.covers(f) {
            for e in 0..n {
                if (flats[c] & !flats[f]) >> e & 1 == 1 {
                    step[f * n + e] = c as u32;
                }
            }
        }
    }
    let r = m.rank();
    let mut chi = vec![0i64; r + 1];
    let mut cl = vec![0u32; 1 << n];
    chi[0] += 1;
    for s in 1u32..(1u32 << n) {
        let low = s.trailing_zeros() as usize;
        let prev = cl[(s & (s - 1)) as usize] as usize;
        let c = if flats[prev] >> low & 1 == 1 { prev } else { step[prev * n + low] as usize };
        cl[s as usize] = c as u32;
        let sign = if s.count_ones() % 2 == 0 { 1 } else { -1 };
        chi[m.flat_rank(c)] += sign;
    }
    Ok(chi)
}

/// `χ(λ) = Σ_F μ(∅, F) λ^{r − rk F}` over the lattice of flats.
pub fn char_poly_mobius(m: &Matroid) -> Vec<i64> {
    let flats = m.flats();
    let mut mu = vec![0i64; flats.len()];
    for (i, &f) in flats.iter().enumerate() {
        if f == 0 {
            mu[i] = 1;
            continue;
        }
        // flats are sorted by rank, so all proper subflats come first
        mu[i] = -(0..i).filter(|&j| flats[j] & f == flats[j] && flats[j] != f).map(|j| mu[j]).sum::<i64>();
    }
    let mut chi = vec![0i64; m.rank() + 1];
    for (i, &x) in mu.iter().enumerate() {
        chi[m.flat_rank(i)] += x;
    }
    chi
}

/// Both computations, required to agree.
pub fn char_poly_with_cap(m: &Matroid, cap: usize) -> Result<CharPoly, MatroidError> {
    let a = char_poly_subsets(m, cap)?;
    let b = char_poly_mobius(m);
    if a != b {
        return Err(MatroidError::Mismatch(a, b));
    }
    CharPoly::from_chi(a)
}

pub fn char_poly(m: &Matroid) -> Result<CharPoly, MatroidError> {
    char_poly_with_cap(m, DEFAULT_SUBSET_CAP)
}
