//! Exact max-min-slack LP solved with a dense simplex tableau and Bland's rule.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::{dot, QVec, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("normalization constraint cannot be satisfied")]
    Infeasible,
    #[error("objective is unbounded; the normalizer does not bound the slack")]
    Unbounded,
    #[error("row {row} has length {found}, expected {expected}")]
    DimensionMismatch { row: usize, expected: usize, found: usize },
}

/// Optimum of `max t  s.t.  aᵢ·z + cᵢ ≥ t,  normalizer·z = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlackOptimum {
    pub z: QVec,
    pub t: Rat,
    /// Dual multipliers `λᵢ ≥ 0` with `Σλᵢ = 1` and `Σλᵢaᵢ = μ·normalizer`;
    /// together they certify `t ≤ μ + Σλᵢcᵢ` for every feasible point.
    pub multipliers: QVec,
    pub mu: Rat,
}

impl SlackOptimum {
    /// Positive slack certifies an interior point of the constraint cone.
    pub fn is_interior(&self) -> bool {
        self.t.is_positive()
    }

    /// Re-checks primal feasibility and the dual bound exactly.
    pub fn verify(&self, rows: &[(QVec, Rat)], normalizer: &[Rat]) -> bool {
        let primal = dot(normalizer, &self.z).is_one()
            && rows.iter().all(|(a, c)| dot(a, &self.z) + c >= self.t);
        let lam_ok = self.multipliers.iter().all(|l| !l.is_negative())
            && self.multipliers.iter().fold(Rat::zero(), |s, l| s + l).is_one();
        let n = normalizer.len();
        let mut combo = vec![Rat::zero(); n];
        let mut bound = self.mu.clone();
        for (l, (a, c)) in self.multipliers.iter().zip(rows) {
            for (x, ai) in combo.iter_mut().zip(a) {
                *x += l * ai;
            }
            bound += l * c;
        }
        let stationary = combo.iter().zip(normalizer).all(|(x, nz)| *x == &self.mu * nz);
        primal && lam_ok && stationary && bound == self.t
    }
}

/// Maximizes the minimum of the affine forms `aᵢ·z + cᵢ` over the hyperplane
/// `normalizer·z = 1`. Each row is `(aᵢ, cᵢ)`.
pub fn lp_max_min_slack(rows: &[(QVec, Rat)], normalizer: &[Rat]) -> Result<SlackOptimum, LpError> {
    let n = normalizer.len();
    for (i, (a, _)) in rows.iter().enumerate() {
        if a.len() != n {
            return Err(LpError::DimensionMismatch { row: i, expected: n, found: a.len() });
        }
    }
    let Some(pivot) = normalizer.iter().position(|x| !x.is_zero()) else {
        return Err(LpError::Infeasible);
    };
    if rows.is_empty() {
        return Err(LpError::Unbounded);
    }

    // Parametrize the hyperplane as z = z0 + K·y with z0 = e_p / c_p and
    // kernel columns e_k - (c_k / c_p) e_p.
    let cp = normalizer[pivot].clone();
    let mut z0 = vec![Rat::zero(); n];
    z0[pivot] = cp.recip();
    let kernel: Vec<usize> = (0..n).filter(|&k| k != pivot).collect();
    let apply_k = |a: &[Rat]| -> QVec {
        kernel.iter().map(|&k| &a[k] - &normalizer[k] / &cp * &a[pivot]).collect()
    };

    let base: Vec<Rat> = rows.iter().map(|(a, c)| dot(a, &z0) + c).collect();
    let t0 = base.iter().min().cloned().expect("nonempty rows");

    // Structural variables: y⁺ (m), y⁻ (m), s = t - t0 ≥ 0. Each row reads
    //   -(Kᵀa)·y⁺ + (Kᵀa)·y⁻ + s ≤ base - t0.
    let m = kernel.len();
    let ncols = 2 * m + 1;
    let mut tab: Vec<Vec<Rat>> = rows
        .iter()
        .map(|(a, _)| {
            let ka = apply_k(a);
            let mut r = Vec::with_capacity(ncols);
            r.extend(ka.iter().map(|x| -x.clone()));
            r.extend(ka);
            r.push(Rat::one());
            r
        })
        .collect();
    let mut rhs: Vec<Rat> = base.iter().map(|b| b - &t0).collect();
    let mut cost: Vec<Rat> = vec![Rat::zero(); ncols];
    cost[ncols - 1] = Rat::one();
    let mut obj = Rat::zero();
    // variable ids: 0..ncols structural, ncols.. slack for row i
    let mut nonbasis: Vec<usize> = (0..ncols).collect();
    let mut basis: Vec<usize> = (ncols..ncols + rows.len()).collect();

    loop {
        // Bland: entering variable is the smallest id with positive reduced cost.
        let entering = (0..ncols)
            .filter(|&j| cost[j].is_positive())
            .min_by_key(|&j| nonbasis[j]);
        let Some(s) = entering else { break };
        let mut leave: Option<(usize, Rat)> = None;
        for i in 0..tab.len() {
            if !tab[i][s].is_positive() {
                continue;
            }
            let ratio = &rhs[i] / &tab[i][s];
            let better = match &leave {
                None => true,
                Some((r, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*r]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        let Some((r, _)) = leave else {
            return Err(LpError::Unbounded);
        };
        pivot_tableau(&mut tab, &mut rhs, &mut cost, &mut obj, r, s);
        std::mem::swap(&mut basis[r], &mut nonbasis[s]);
    }

    let mut x = vec![Rat::zero(); ncols];
    for (i, &b) in basis.iter().enumerate() {
        if b < ncols {
            x[b] = rhs[i].clone();
        }
    }
    let y: QVec = (0..m).map(|k| &x[k] - &x[m + k]).collect();
    let mut z = z0;
    for (yk, &k) in y.iter().zip(&kernel) {
        z[k] += yk;
        z[pivot] -= &normalizer[k] / &cp * yk;
    }
    let t = &t0 + &x[ncols - 1];

    let mut multipliers = vec![Rat::zero(); rows.len()];
    for (j, &v) in nonbasis.iter().enumerate() {
        if v >= ncols {
            multipliers[v - ncols] = -cost[j].clone();
        }
    }
    // Dual feasibility gives Σλᵢ ≥ 1; when it is strict the slack is at its
    // initial value and rescaling keeps the bound tight.
    let total = multipliers.iter().fold(Rat::zero(), |s, l| s + l);
    if !total.is_zero() && !total.is_one() {
        for l in &mut multipliers {
            *l /= &total;
        }
    }
    // Σλᵢaᵢ is parallel to the normalizer; read μ off the pivot coordinate.
    let mu = multipliers
        .iter()
        .zip(rows)
        .fold(Rat::zero(), |acc, (l, (a, _))| acc + l * &a[pivot])
        / &cp;
    debug_assert_eq!(obj, &t - &t0);
    Ok(SlackOptimum { z, t, multipliers, mu })
}

fn pivot_tableau(
    tab: &mut [Vec<Rat>],
    rhs: &mut [Rat],
    cost: &mut [Rat],
    obj: &mut Rat,
    r: usize,
    s: usize,
) {
    let p = tab[r][s].clone();
    let pinv = p.recip();
    for (j, v) in tab[r].iter_mut().enumerate() {
        if j == s {
            *v = pinv.clone();
        } else if !v.is_zero() {
            *v *= &pinv;
        }
    }
    rhs[r] *= &pinv;
    let prow = tab[r].clone();
    let prhs = rhs[r].clone();
    for i in 0..tab.len() {
        if i == r {
            continue;
        }
        let f = tab[i][s].clone();
        if f.is_zero() {
            continue;
        }
        for (j, pv) in prow.iter().enumerate() {
            if j == s {
                tab[i][j] = -(&f * &pinv);
            } else if !pv.is_zero() {
                let v = &f * pv;
                tab[i][j] -= v;
            }
        }
        rhs[i] -= &f * &prhs;
    }
    let f = cost[s].clone();
    if !f.is_zero() {
        for (j, pv) in prow.iter().enumerate() {
            if j == s {
                cost[j] = -(&f * &pinv);
            } else if !pv.is_zero() {
                cost[j] -= &f * pv;
            }
        }
        *obj += &f * &prhs;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, ratio, vec_of};
    use proptest::prelude::*;

    fn row(a: &[i64]) -> (QVec, Rat) {
        (vec_of(a), rat(0))
    }

    #[test]
    fn symmetric_two_variable_case() {
        let rows = vec![row(&[1, 0]), row(&[0, 1])];
        let opt = lp_max_min_slack(&rows, &vec_of(&[1, 1])).unwrap();
        assert_eq!(opt.z, vec![ratio(1, 2), ratio(1, 2)]);
        assert_eq!(opt.t, ratio(1, 2));
        assert!(opt.is_interior());
        assert!(opt.verify(&rows, &vec_of(&[1, 1])));
    }

    #[test]
    fn contradictory_rows_have_no_interior() {
        let rows = vec![row(&[1]), row(&[-1])];
        let opt = lp_max_min_slack(&rows, &vec_of(&[1])).unwrap();
        assert_eq!(opt.t, rat(-1));
        assert!(!opt.is_interior());
        assert!(opt.verify(&rows, &vec_of(&[1])));
    }

    #[test]
    fn quadrant_coordinate_rows() {
        let rows: Vec<_> = (0..4)
            .map(|i| {
                let mut a = vec![0; 4];
                a[i] = 1;
                row(&a)
            })
            .collect();
        let opt = lp_max_min_slack(&rows, &vec_of(&[1, 1, 1, 1])).unwrap();
        assert_eq!(opt.t, ratio(1, 4));
        assert_eq!(opt.z, vec![ratio(1, 4); 4]);
    }

    #[test]
    fn error_cases() {
        assert_eq!(lp_max_min_slack(&[row(&[1, 0])], &vec_of(&[0, 0])), Err(LpError::Infeasible));
        // z1 - z2 ≥ t with z1 + z2 = 1 is unbounded
        assert_eq!(lp_max_min_slack(&[row(&[1, -1])], &vec_of(&[1, 1])), Err(LpError::Unbounded));
        assert!(matches!(
            lp_max_min_slack(&[row(&[1])], &vec_of(&[1, 1])),
            Err(LpError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn affine_offsets_are_honored() {
        // z1 + 1 ≥ t, z2 ≥ t, z1 + z2 = 1  →  z = (0, 1), t = 1
        let rows = vec![(vec_of(&[1, 0]), rat(1)), row(&[0, 1])];
        let opt = lp_max_min_slack(&rows, &vec_of(&[1, 1])).unwrap();
        assert_eq!(opt.t, rat(1));
        assert!(opt.verify(&rows, &vec_of(&[1, 1])));
    }

    /// Brute force over vertices of the feasible region on desk-scale
    /// instances: every optimum of a 2-variable LP sits where two of the
    /// constraints (including the normalizer) are tight.
    fn brute_force_2d(rows: &[(QVec, Rat)], normalizer: &[Rat]) -> Option<Rat> {
        // On the line normalizer·z = 1 parametrized by one variable, t(z) is
        // concave piecewise linear; the max is at a breakpoint.
        let (c1, c2) = (&normalizer[0], &normalizer[1]);
        let point = |s: &Rat| -> QVec {
            if !c2.is_zero() {
                vec![s.clone(), (Rat::one() - c1 * s) / c2]
            } else {
                vec![c1.recip(), s.clone()]
            }
        };
        let value = |z: &QVec| rows.iter().map(|(a, c)| dot(a, z) + c).min().unwrap();
        let slope_offset = |(a, c): &(QVec, Rat)| -> (Rat, Rat) {
            let z0 = point(&Rat::zero());
            let z1 = point(&Rat::one());
            let v0 = dot(a, &z0) + c;
            let v1 = dot(a, &z1) + c;
            (&v1 - &v0, v0)
        };
        let lines: Vec<_> = rows.iter().map(slope_offset).collect();
        let mut best: Option<Rat> = None;
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                let (si, oi) = &lines[i];
                let (sj, oj) = &lines[j];
                if si == sj {
                    continue;
                }
                let s = (oj - oi) / (si - sj);
                let v = value(&point(&s));
                if best.as_ref().map_or(true, |b| v > *b) {
                    best = Some(v);
                }
            }
        }
        // bounded in both directions of the line
        let up = lines.iter().any(|(s, _)| !s.is_positive());
        let down = lines.iter().any(|(s, _)| !s.is_negative());
        if !(up && down) {
            return None;
        }
        if lines.iter().all(|(s, _)| s.is_zero()) {
            return Some(value(&point(&Rat::zero())));
        }
        best
    }

    proptest! {
        #[test]
        fn matches_brute_force_in_two_variables(
            coeffs in proptest::collection::vec((-4i64..=4, -4i64..=4, -3i64..=3), 2..6),
            nz in (1i64..=3, -2i64..=3),
        ) {
            let rows: Vec<(QVec, Rat)> =
                coeffs.iter().map(|&(a, b, c)| (vec_of(&[a, b]), rat(c))).collect();
            let normalizer = vec_of(&[nz.0, nz.1]);
            let expected = brute_force_2d(&rows, &normalizer);
            match lp_max_min_slack(&rows, &normalizer) {
                Ok(opt) => {
                    prop_assert!(opt.verify(&rows, &normalizer));
                    prop_assert_eq!(Some(opt.t), expected);
                }
                Err(LpError::Unbounded) => prop_assert!(expected.is_none()),
                Err(e) => prop_assert!(false, "unexpected {e:?}"),
            }
        }
    }
}
