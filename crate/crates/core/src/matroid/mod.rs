//! Loopless matroids given by their lattice of flats, and their Bergman fans.

mod charpoly;

pub use charpoly::{
    char_poly, char_poly_mobius, char_poly_subsets, char_poly_with_cap, CharPoly, DEFAULT_SUBSET_CAP,
};

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{self, QMat, QVec, Rat};
use crate::fan::{FanError, MarkedFan, Ray, Validation};
use crate::normalcx::{Context, InnerProduct, NormalError, ZValues};

/// Hard limit from the bitset representation.
pub const MAX_GROUND_SET: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axiom {
    F1,
    F2,
    F3,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatroidError {
    #[error("flat axiom {0:?} fails: {1}")]
    AxiomViolation(Axiom, String),
    #[error("element {0:?} is a loop")]
    Loop(String),
    #[error("unknown element {0:?}")]
    UnknownElement(String),
    #[error("duplicate element {0:?}")]
    DuplicateElement(String),
    #[error("ground set has {size} elements, limit is {cap}")]
    GroundSetTooLarge { size: usize, cap: usize },
    #[error("rank {0} is too small for a Bergman fan")]
    RankTooSmall(usize),
    #[error("invalid encoding: {0}")]
    Encoding(String),
    #[error("characteristic polynomial paths disagree: {0:?} vs {1:?}")]
    Mismatch(Vec<i64>, Vec<i64>),
    #[error(transparent)]
    Fan(#[from] FanError),
    #[error(transparent)]
    Normal(#[from] NormalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatroidKind {
    Flats,
    Uniform,
    Graphic,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matroid {
    labels: Vec<String>,
    /// flats as bitsets, sorted by rank then bitset
    flats: Vec<u32>,
    ranks: Vec<usize>,
    index: HashMap<u32, usize>,
    /// upper covers of each flat
    covers: Vec<Vec<usize>>,
    kind: MatroidKind,
}

/// Serialized form of a matroid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatroidJson {
    pub ground_set: Vec<String>,
    pub kind: MatroidKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flats: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(String, String)>>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_mat")]
    pub matrix: Option<Vec<QVec>>,
}

mod opt_mat {
    use crate::exact::{rat_serde, QVec};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "rat_serde::mat")] Vec<QVec>);

    pub fn serialize<S: Serializer>(v: &Option<Vec<QVec>>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(|m| Wrap(m.clone())).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<QVec>>, D::Error> {
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

fn letters(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| if n <= 26 { ((b'a' + i as u8) as char).to_string() } else { format!("e{i}") })
        .collect()
}

fn check_labels(labels: &[String]) -> Result<(), MatroidError> {
    if labels.len() > MAX_GROUND_SET {
        return Err(MatroidError::GroundSetTooLarge { size: labels.len(), cap: MAX_GROUND_SET });
    }
    let mut seen = BTreeSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(MatroidError::DuplicateElement(l.clone()));
        }
    }
    Ok(())
}

fn bits(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |i| mask >> i & 1 == 1)
}

impl Matroid {
    /// Validates a family of flats against (F1)–(F3).
    pub fn from_flats(labels: Vec<String>, flats: &[Vec<String>]) -> Result<Self, MatroidError> {
        check_labels(&labels)?;
        let pos: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let mut masks = Vec::with_capacity(flats.len());
        for f in flats {
            let mut m = 0u32;
            for e in f {
                let &i = pos.get(e.as_str()).ok_or_else(|| MatroidError::UnknownElement(e.clone()))?;
                m |= 1 << i;
            }
            masks.push(m);
        }
        Self::from_masks(labels, masks, MatroidKind::Flats)
    }

    fn from_masks(labels: Vec<String>, mut masks: Vec<u32>, kind: MatroidKind) -> Result<Self, MatroidError> {
        let n = labels.len();
        let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        masks.sort_unstable();
        masks.dedup();
        let show = |m: u32| -> String {
            let v: Vec<&str> = bits(m).map(|i| labels[i].as_str()).collect();
            format!("{{{}}}", v.join(","))
        };
        if !masks.contains(&0) {
            return Err(MatroidError::AxiomViolation(Axiom::F1, "the empty set is not a flat".into()));
        }
        let set: BTreeSet<u32> = masks.iter().copied().collect();
        for (i, &a) in masks.iter().enumerate() {
            for &b in &masks[i + 1..] {
                if !set.contains(&(a & b)) {
                    return Err(MatroidError::AxiomViolation(
                        Axiom::F2,
                        format!("{} ∩ {} is not a flat", show(a), show(b)),
                    ));
                }
            }
        }
        // covers: minimal flats strictly containing each flat; they must
        // partition the complement
        let mut cover_masks: Vec<Vec<u32>> = Vec::with_capacity(masks.len());
        for &f in &masks {
            let mut above: Vec<u32> = masks.iter().copied().filter(|&g| g != f && g & f == f).collect();
            above.sort_by_key(|g| g.count_ones());
            let mut minimal: Vec<u32> = Vec::new();
            for g in above {
                if !minimal.iter().any(|&h| h & g == h) {
                    minimal.push(g);
                }
            }
            let mut covered = 0u32;
            for &g in &minimal {
                if covered & (g & !f) != 0 {
                    return Err(MatroidError::AxiomViolation(
                        Axiom::F3,
                        format!("an element outside {} lies in two minimal flats above it", show(f)),
                    ));
                }
                covered |= g & !f;
            }
            if covered != full & !f {
                return Err(MatroidError::AxiomViolation(
                    Axiom::F3,
                    format!("an element outside {} lies in no minimal flat above it", show(f)),
                ));
            }
            cover_masks.push(minimal);
        }
        // rank = height in the lattice, assigned in order of size
        let mut order: Vec<usize> = (0..masks.len()).collect();
        order.sort_by_key(|&i| (masks[i].count_ones(), masks[i]));
        let idx_of: HashMap<u32, usize> = masks.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let mut rank = vec![usize::MAX; masks.len()];
        rank[idx_of[&0]] = 0;
        for &i in &order {
            let r = rank[i];
            for g in &cover_masks[i] {
                let j = idx_of[g];
                if rank[j] == usize::MAX {
                    rank[j] = r + 1;
                } else if rank[j] != r + 1 {
                    return Err(MatroidError::AxiomViolation(Axiom::F3, format!("{} is not graded", show(*g))));
                }
            }
        }
        // final layout sorted by (rank, mask)
        let mut perm: Vec<usize> = (0..masks.len()).collect();
        perm.sort_by_key(|&i| (rank[i], masks[i]));
        let flats: Vec<u32> = perm.iter().map(|&i| masks[i]).collect();
        let ranks: Vec<usize> = perm.iter().map(|&i| rank[i]).collect();
        let index: HashMap<u32, usize> = flats.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let covers = perm
            .iter()
            .map(|&i| {
                let mut c: Vec<usize> = cover_masks[i].iter().map(|g| index[g]).collect();
                c.sort_unstable();
                c
            })
            .collect();
        Ok(Matroid { labels, flats, ranks, index, covers, kind })
    }

    /// Flats generated from a rank oracle by repeated closure.
    fn from_rank_oracle<F: Fn(u32) -> usize>(
        labels: Vec<String>,
        rank: F,
        kind: MatroidKind,
    ) -> Result<Self, MatroidError> {
        check_labels(&labels)?;
        let n = labels.len();
        let closure = |s: u32| -> u32 {
            let r = rank(s);
            let mut c = s;
            for e in 0..n {
                if s >> e & 1 == 0 && rank(s | 1 << e) == r {
                    c |= 1 << e;
                }
            }
            c
        };
        let bottom = closure(0);
        if bottom != 0 {
            let e = bits(bottom).next().expect("nonzero");
            return Err(MatroidError::Loop(labels[e].clone()));
        }
        let mut seen = BTreeSet::from([0u32]);
        let mut queue = VecDeque::from([0u32]);
        while let Some(f) = queue.pop_front() {
            for e in 0..n {
                if f >> e & 1 == 0 {
                    let g = closure(f | 1 << e);
                    if seen.insert(g) {
                        queue.push_back(g);
                    }
                }
            }
        }
        Self::from_masks(labels, seen.into_iter().collect(), kind)
    }

    /// `U_{r,n}` on elements `a, b, c, …`.
    pub fn uniform(r: usize, n: usize) -> Result<Self, MatroidError> {
        Self::uniform_on(letters(n), r)
    }

    pub fn uniform_on(labels: Vec<String>, r: usize) -> Result<Self, MatroidError> {
        if r > labels.len() {
            return Err(MatroidError::Encoding(format!("rank {r} exceeds ground set size {}", labels.len())));
        }
        Self::from_rank_oracle(labels, |s| (s.count_ones() as usize).min(r), MatroidKind::Uniform)
    }

    /// Cycle matroid of a multigraph; element `i` is edge `edges[i]`.
    pub fn graphic(labels: Vec<String>, edges: &[(String, String)]) -> Result<Self, MatroidError> {
        if labels.len() != edges.len() {
            return Err(MatroidError::Encoding(format!("{} labels for {} edges", labels.len(), edges.len())));
        }
        let mut vertices: Vec<&str> = edges.iter().flat_map(|(u, v)| [u.as_str(), v.as_str()]).collect();
        vertices.sort_unstable();
        vertices.dedup();
        let vid = |v: &str| vertices.binary_search(&v).expect("collected");
        let ends: Vec<(usize, usize)> = edges.iter().map(|(u, v)| (vid(u), vid(v))).collect();
        if let Some(i) = ends.iter().position(|(u, v)| u == v) {
            check_labels(&labels)?;
            return Err(MatroidError::Loop(labels[i].clone()));
        }
        let nv = vertices.len();
        let rank = move |s: u32| -> usize {
            let mut parent: Vec<usize> = (0..nv).collect();
            fn find(p: &mut [usize], mut x: usize) -> usize {
                while p[x] != x {
                    p[x] = p[p[x]];
                    x = p[x];
                }
                x
            }
            let mut r = 0;
            for e in bits(s) {
                let (a, b) = (find(&mut parent, ends[e].0), find(&mut parent, ends[e].1));
                if a != b {
                    parent[a] = b;
                    r += 1;
                }
            }
            r
        };
        Self::from_rank_oracle(labels, rank, MatroidKind::Graphic)
    }

    /// Column matroid of a rational matrix; element `i` is column `i`.
    pub fn linear(labels: Vec<String>, matrix: &[QVec]) -> Result<Self, MatroidError> {
        let m = QMat::from_rows(matrix.to_vec()).map_err(|e| MatroidError::Encoding(e.to_string()))?;
        if m.cols() != labels.len() {
            return Err(MatroidError::Encoding(format!("{} labels for {} columns", labels.len(), m.cols())));
        }
        let cols: Vec<QVec> = (0..m.cols()).map(|j| m.column(j)).collect();
        let height = m.rows();
        let rank = move |s: u32| -> usize {
            let sel: Vec<QVec> = bits(s).map(|j| cols[j].clone()).collect();
            if sel.is_empty() {
                0
            } else {
                QMat::from_columns(&sel, height).rank()
            }
        };
        Self::from_rank_oracle(labels, rank, MatroidKind::Linear)
    }

    pub fn from_json(raw: &MatroidJson) -> Result<Self, MatroidError> {
        let labels = raw.ground_set.clone();
        let missing = |what: &str| MatroidError::Encoding(format!("kind {:?} needs {what:?}", raw.kind));
        match raw.kind {
            MatroidKind::Flats => Self::from_flats(labels, raw.flats.as_ref().ok_or_else(|| missing("flats"))?),
            MatroidKind::Uniform => Self::uniform_on(labels, raw.rank.ok_or_else(|| missing("rank"))?),
            MatroidKind::Graphic => Self::graphic(labels, raw.edges.as_ref().ok_or_else(|| missing("edges"))?),
            MatroidKind::Linear => Self::linear(labels, raw.matrix.as_ref().ok_or_else(|| missing("matrix"))?),
        }
    }

    pub fn parse(json: &str) -> Result<Self, MatroidError> {
        let raw: MatroidJson = serde_json::from_str(json).map_err(|e| MatroidError::Encoding(e.to_string()))?;
        Self::from_json(&raw)
    }

    /// Flats encoding of the same matroid.
    pub fn to_json(&self) -> MatroidJson {
        MatroidJson {
            ground_set: self.labels.clone(),
            kind: MatroidKind::Flats,
            flats: Some(self.flats.iter().map(|&f| self.members(f)).collect()),
            rank: None,
            edges: None,
            matrix: None,
        }
    }

    pub fn kind(&self) -> MatroidKind {
        self.kind
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn element(&self, label: &str) -> Result<usize, MatroidError> {
        self.labels.iter().position(|l| l == label).ok_or_else(|| MatroidError::UnknownElement(label.to_string()))
    }

    pub fn full_set(&self) -> u32 {
        self.flats[self.flats.len() - 1]
    }

    /// Flats as bitsets, sorted by rank.
    pub fn flats(&self) -> &[u32] {
        &self.flats
    }

    pub fn flat_rank(&self, i: usize) -> usize {
        self.ranks[i]
    }

    pub fn flat_index(&self, mask: u32) -> Option<usize> {
        self.index.get(&mask).copied()
    }

    pub fn covers(&self, i: usize) -> &[usize] {
        &self.covers[i]
    }

    pub fn rank(&self) -> usize {
        self.ranks[self.ranks.len() - 1]
    }

    /// Indices of the proper flats (neither empty nor the ground set).
    pub fn proper_flats(&self) -> impl Iterator<Item = usize> + '_ {
        (1..self.flats.len() - 1).filter(|&i| self.flats[i] != 0)
    }

    pub fn members(&self, mask: u32) -> Vec<String> {
        bits(mask).map(|i| self.labels[i].clone()).collect()
    }

    /// Display id of a set, e.g. `{a,b}`.
    pub fn set_id(&self, mask: u32) -> String {
        format!("{{{}}}", self.members(mask).join(","))
    }

    pub fn closure(&self, s: u32) -> u32 {
        self.flats.iter().copied().filter(|&f| f & s == s).fold(self.full_set(), |a, f| a & f)
    }

    pub fn rank_of(&self, s: u32) -> usize {
        self.ranks[self.index[&self.closure(s)]]
    }

    /// Maximal chains of proper flats, as flat indices in increasing order.
    pub fn maximal_flags(&self) -> Vec<Vec<usize>> {
        let top = self.flats.len() - 1;
        let mut out = Vec::new();
        let mut chain = Vec::new();
        fn walk(m: &Matroid, at: usize, top: usize, chain: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            for &c in &m.covers[at] {
                if c == top {
                    out.push(chain.clone());
                } else {
                    chain.push(c);
                    walk(m, c, top, chain, out);
                    chain.pop();
                }
            }
        }
        walk(self, 0, top, &mut chain, &mut out);
        out
    }

    /// The minor `M[lo, hi]` on `hi ∖ lo` with flats `F ∖ lo` for `lo ⊆ F ⊆ hi`.
    pub fn interval_minor(&self, lo: u32, hi: u32) -> Result<Matroid, MatroidError> {
        if self.flat_index(lo).is_none() || self.flat_index(hi).is_none() || lo & hi != lo {
            return Err(MatroidError::Encoding("interval endpoints must be nested flats".into()));
        }
        let elems: Vec<usize> = bits(hi & !lo).collect();
        let labels = elems.iter().map(|&i| self.labels[i].clone()).collect();
        let squeeze = |f: u32| -> u32 {
            elems.iter().enumerate().filter(|(_, &e)| f >> e & 1 == 1).fold(0, |a, (k, _)| a | 1 << k)
        };
        let masks = self.flats.iter().copied().filter(|&f| f & lo == lo && f & hi == f).map(|f| squeeze(f & !lo));
        Self::from_masks(labels, masks.collect(), self.kind)
    }

    /// Coordinates of `u_S` in `ℝ^{E∖{e₀}}`: the image of `v_S − (v_S)_{e₀}·v_E`.
    pub fn section_coordinates(&self, mask: u32, e0: usize) -> QVec {
        let shift = if mask >> e0 & 1 == 1 { 1 } else { 0 };
        (0..self.size())
            .filter(|&e| e != e0)
            .map(|e| Rat::from_integer(((mask >> e & 1) as i64 - shift).into()))
            .collect()
    }
}

/// Bergman fan with coordinates obtained by deleting the element `e0`.
pub fn bergman_fan_at(m: &Matroid, e0: &str) -> Result<MarkedFan, MatroidError> {
    let e0 = m.element(e0)?;
    if m.rank() < 2 {
        return Err(MatroidError::RankTooSmall(m.rank()));
    }
    let proper: Vec<usize> = m.proper_flats().collect();
    let ray_of: HashMap<usize, usize> = proper.iter().enumerate().map(|(k, &f)| (f, k)).collect();
    let rays = proper
        .iter()
        .map(|&f| Ray { id: m.set_id(m.flats[f]), u: m.section_coordinates(m.flats[f], e0) })
        .collect();
    let cones = m
        .maximal_flags()
        .into_iter()
        .map(|flag| (flag.iter().map(|f| ray_of[f]).collect(), Rat::one()))
        .collect();
    Ok(MarkedFan::from_parts(m.size() - 1, rays, cones, Validation::Combinatorial)?)
}

/// Bergman fan in the coordinates that delete the first element.
pub fn bergman_fan(m: &Matroid) -> Result<MarkedFan, MatroidError> {
    bergman_fan_at(m, &m.labels[0].clone())
}

/// Inner product with orthonormal basis `{u_e | e ≠ e₀}`; in the
/// coordinates of [`bergman_fan_at`] with the same `e0` it is the identity.
pub fn e0_inner_product(m: &Matroid, e0: &str) -> Result<InnerProduct, MatroidError> {
    m.element(e0)?;
    Ok(InnerProduct::standard(m.size() - 1))
}

/// Closed form of `u_{F₁} * u_{F₂}` under [`e0_inner_product`].
pub fn e0_pairing(m: &Matroid, e0: &str, f1: u32, f2: u32) -> Result<Rat, MatroidError> {
    let e = m.element(e0)?;
    let full = m.full_set();
    let (in1, in2) = (f1 >> e & 1 == 1, f2 >> e & 1 == 1);
    let count = |s: u32| Rat::from_integer(i64::from(s.count_ones()).into());
    Ok(match (in1, in2) {
        (false, false) => count(f1 & f2),
        (false, true) => -count(f1 & (full & !f2)),
        (true, false) => -count(f2 & (full & !f1)),
        (true, true) => count((full & !f1) & (full & !f2)),
    })
}

/// `z^α_F = [e₀ ∈ F]` and `z^β_F = [e₀ ∉ F]` on the proper flats.
pub fn alpha_beta_z(m: &Matroid, e0: &str) -> Result<(ZValues, ZValues), MatroidError> {
    let e = m.element(e0)?;
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    for f in m.proper_flats() {
        let id = m.set_id(m.flats[f]);
        let has = m.flats[f] >> e & 1 == 1;
        alpha.push((id.clone(), if has { Rat::one() } else { Rat::zero() }));
        beta.push((id, if has { Rat::zero() } else { Rat::one() }));
    }
    Ok((ZValues::from_pairs(&alpha), ZValues::from_pairs(&beta)))
}

/// Closed forms of `w_{σ_𝓕}(z^α)` and `w_{σ_𝓕}(z^β)` for a flag of proper flats.
pub fn alpha_beta_w(m: &Matroid, e0: &str, flag: &[u32]) -> Result<(QVec, QVec), MatroidError> {
    let e = m.element(e0)?;
    let zero = vec![Rat::zero(); m.size() - 1];
    let full = m.full_set();
    let (Some(&first), Some(&last)) = (flag.first(), flag.last()) else {
        return Ok((zero.clone(), zero));
    };
    let wa = if last >> e & 1 == 1 {
        let c = Rat::new(1.into(), i64::from((full & !last).count_ones()).into());
        exact::scale(&c, &m.section_coordinates(last, e))
    } else {
        zero.clone()
    };
    let wb = if first >> e & 1 == 0 {
        let c = Rat::new(1.into(), i64::from(first.count_ones()).into());
        exact::scale(&c, &m.section_coordinates(first, e))
    } else {
        zero
    };
    Ok((wa, wb))
}

/// Bergman fan, `e₀` inner product and the values `z^α`, `z^β`.
pub struct BergmanSetup {
    pub e0: String,
    pub ctx: Context,
    pub z_alpha: ZValues,
    pub z_beta: ZValues,
}

pub fn bergman_setup(m: &Matroid, e0: &str) -> Result<BergmanSetup, MatroidError> {
    let fan = bergman_fan_at(m, e0)?;
    let ip = e0_inner_product(m, e0)?;
    let (z_alpha, z_beta) = alpha_beta_z(m, e0)?;
    Ok(BergmanSetup { e0: e0.to_string(), ctx: Context::new(fan, ip)?, z_alpha, z_beta })
}
