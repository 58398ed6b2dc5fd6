//! The explicit family `Z(w, l)`: its matrices, width and length recursions,
//! areas, and a search certifying one stage of the Rips machine.

use crate::complex::{Band, BandComplex, BandId, BaseAttachment, Component, ComponentId};
use crate::error::{Error, Result};
use crate::iso::{invariant_key, isomorphic, IsoWitness};
use crate::normalize::normalize_long_bands;
use crate::rational::{self, int, Rational};
use crate::rips::{collapse, free_arcs, FreeArc};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, VecDeque};

pub type IntMatrix = Vec<Vec<i64>>;
pub type RatMatrix = Vec<Vec<Rational>>;

fn check_positive(m: i64, n: i64) -> Result<()> {
    if m < 1 || n < 1 {
        return Err(Error::NonPositiveParameter(format!("m = {m}, n = {n}")));
    }
    Ok(())
}

pub fn matrix_a(m: i64, n: i64) -> Result<IntMatrix> {
    check_positive(m, n)?;
    Ok(vec![
        vec![m + 3, m + 3, (m + 3) * (n + 1) - 1],
        vec![0, 1, 1],
        vec![m + 2, m + 1, (m + 2) * (n + 1)],
    ])
}

pub fn matrix_b(m: i64, n: i64) -> Result<IntMatrix> {
    check_positive(m, n)?;
    Ok(vec![
        vec![n + 3, 2 * n + 5, 2 * n + 6, n + 3, n + 3],
        vec![1, 3, 4, 2, 1],
        vec![1, 1, 0, 0, 0],
        vec![n + 2, 2 * n + 4, 2 * n + 5, n + 2, n + 2],
        vec![m * (n + 5), m * (2 * n + 9) - 1, 2 * m * (n + 5) - 1, m * (n + 5), m * (n + 4)],
    ])
}

pub fn matrix_bprime(m: i64, n: i64) -> Result<IntMatrix> {
    check_positive(m, n)?;
    Ok(vec![
        vec![n + 1, n, 0, 1, 0],
        vec![0, 1, 0, 0, 1],
        vec![0, 0, 1, 0, 0],
        vec![n, n, 0, 1, 0],
        vec![m * (n + 1), m * (n + 1) - 1, m, m, m],
    ])
}

pub fn matrix_bsecond() -> IntMatrix {
    vec![
        vec![1, 1, 1, 1, 1],
        vec![0, 1, 1, 0, 0],
        vec![1, 1, 0, 0, 0],
        vec![2, 4, 5, 2, 2],
        vec![1, 2, 3, 2, 1],
    ]
}

/// Row `i` holds the coefficients of `l_{i+1}` in the area `l . C . w`.
pub fn matrix_c() -> IntMatrix {
    vec![vec![2, 1, 1, 1, 1], vec![0, 1, 1, 0, 0], vec![1, 1, 1, 1, 1]]
}

pub fn mat_mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    a.iter()
        .map(|row| {
            (0..b[0].len())
                .map(|j| row.iter().zip(b).map(|(x, r)| x * r[j]).sum())
                .collect()
        })
        .collect()
}

pub fn to_rational(a: &IntMatrix) -> RatMatrix {
    a.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
}

pub fn rat_mul(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    a.iter()
        .map(|row| {
            (0..b[0].len())
                .map(|j| row.iter().zip(b).map(|(x, r)| x * &r[j]).sum())
                .collect()
        })
        .collect()
}

/// `M v` for a column vector `v`.
pub fn mat_vec(a: &IntMatrix, v: &[Rational]) -> Vec<Rational> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(&x, y)| int(x) * y).sum())
        .collect()
}

/// `v M` for a row vector `v`.
pub fn vec_mat(v: &[Rational], a: &IntMatrix) -> Vec<Rational> {
    (0..a[0].len())
        .map(|j| v.iter().zip(a).map(|(x, row)| x * int(row[j])).sum())
        .collect()
}

/// `l . C . w`.
pub fn area_formula(ell: &[Rational], w: &[Rational]) -> Rational {
    ell.iter().zip(mat_vec(&matrix_c(), w)).map(|(l, x)| l * x).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Presentation {
    FourBand,
    #[default]
    ThreeBand,
}

fn widths(w: &[Rational]) -> Result<[Rational; 5]> {
    let arr: [Rational; 5] = w
        .to_vec()
        .try_into()
        .map_err(|_| Error::InvalidWidths(format!("expected 5 widths, got {}", w.len())))?;
    if let Some(bad) = arr.iter().find(|x| !x.is_positive()) {
        return Err(Error::InvalidWidths(format!("width {} is not positive", rational::format(bad))));
    }
    Ok(arr)
}

fn band(id: u32, width: &Rational, c0: u32, o0: Rational, c1: u32, o1: Rational, length: Option<&Rational>) -> Band {
    let mut b = Band::new(
        BandId(id),
        width.clone(),
        BaseAttachment::new(ComponentId(c0), o0),
        BaseAttachment::new(ComponentId(c1), o1),
    );
    b.length = length.cloned();
    b
}

/// Builds `Z(w, l)`. Without `ell` the complex is not enhanced.
///
/// The three-band form lives on `[0, L]`, `L = 2w1 + 2w2 + 2w3 + w4 + w5`.
/// The four-band form adds a second component `[0, W]`, `W = w1 + ... + w5`,
/// joined to `[w1+w2+w3, L]` of the first by `B4` (width `W`, length `l1`);
/// the upper bases of `B2` and `B3` sit on it instead of on the first
/// component. Identifying the two bases of `B4` gives back the three-band
/// form.
pub fn build_z(w: &[Rational], ell: Option<&[Rational]>, presentation: Presentation) -> Result<BandComplex> {
    let w = widths(w)?;
    let ell = lengths(ell)?;
    let layout = match presentation {
        Presentation::ThreeBand => None,
        Presentation::FourBand => Some(FOUR_BAND),
    };
    assemble(w, ell, layout)
}

/// Where `B4` and the second component go in the four-band form.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FourBandLayout {
    /// `B4` is glued over the upper bases (`[w1+w2+w3, L]`) instead of the
    /// lower ones (`[0, W]`).
    pub upper: bool,
    /// Which of `B1`, `B2`, `B3` have that base on the second component.
    pub moved: [bool; 3],
}

const FOUR_BAND: FourBandLayout = FourBandLayout {
    upper: true,
    moved: [false, true, true],
};

#[doc(hidden)]
pub fn build_z_with(w: &[Rational], ell: Option<&[Rational]>, layout: FourBandLayout) -> Result<BandComplex> {
    let w = widths(w)?;
    let ell = lengths(ell)?;
    assemble(w, ell, Some(layout))
}

fn lengths(ell: Option<&[Rational]>) -> Result<Option<[Rational; 3]>> {
    let Some(l) = ell else { return Ok(None) };
    let arr: [Rational; 3] = l
        .to_vec()
        .try_into()
        .map_err(|_| Error::InvalidWidths(format!("expected 3 lengths, got {}", l.len())))?;
    if arr.iter().any(Signed::is_negative) || arr.iter().all(Zero::is_zero) {
        return Err(Error::InvalidWidths("lengths must be non-negative and not all zero".into()));
    }
    Ok(Some(arr))
}

fn assemble(w: [Rational; 5], ell: Option<[Rational; 3]>, layout: Option<FourBandLayout>) -> Result<BandComplex> {
    let [w1, w2, w3, w4, w5] = w;
    let len = |i: usize| ell.as_ref().map(|l| &l[i]);
    let total = &w1 + &w2 + &w3 + &w4 + &w5;
    let big_l = &total + &w1 + &w2 + &w3;
    let b23 = &w2 + &w3;
    let upper_start = &w1 + &w2 + &w3;
    // (width, lower offset, upper offset)
    let spec = [
        (w1.clone(), int(0), &big_l - &w1),
        (b23.clone(), &w1 + &w2, &upper_start + &w4),
        (total.clone(), int(0), upper_start.clone()),
    ];
    let mut components = vec![Component {
        id: ComponentId(0),
        length: big_l.clone(),
    }];
    let mut bands = Vec::new();
    for (i, (width, lo, hi)) in spec.iter().enumerate() {
        let (mut c0, mut c1, mut o1) = (0, 0, hi.clone());
        if let Some(l) = layout.filter(|l| l.moved[i]) {
            if l.upper {
                c1 = 1;
                o1 = hi - &upper_start;
            } else {
                c0 = 1;
            }
        }
        bands.push(band(i as u32, width, c0, lo.clone(), c1, o1, len(i)));
    }
    if let Some(l) = layout {
        components.push(Component {
            id: ComponentId(1),
            length: total.clone(),
        });
        let anchor = if l.upper { upper_start } else { int(0) };
        bands.push(band(3, &total, 1, int(0), 0, anchor, len(0)));
    }
    BandComplex::new(components, bands, ell.is_some())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GallerySpec {
    pub m: Vec<i64>,
    pub n: Vec<i64>,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(with = "rational::serde_vec_str")]
    pub seed: Vec<Rational>,
    #[serde(with = "rational::serde_vec_str", default = "unit_lengths")]
    pub ell0: Vec<Rational>,
    #[serde(default)]
    pub presentation: Presentation,
}

fn unit_lengths() -> Vec<Rational> {
    vec![int(1), int(1), int(1)]
}

impl GallerySpec {
    pub fn new(m: Vec<i64>, n: Vec<i64>) -> Self {
        let k = m.len();
        GallerySpec {
            m,
            n,
            k,
            seed: vec![int(1); 5],
            ell0: unit_lengths(),
            presentation: Presentation::ThreeBand,
        }
    }

    /// `m = n = (1, 2, 4, ...)` with `k` stages.
    pub fn doubling(k: usize) -> Self {
        let m: Vec<i64> = (0..k).map(|i| 1 << i).collect();
        GallerySpec::new(m.clone(), m)
    }

    pub fn constant(m: i64, n: i64, k: usize) -> Self {
        GallerySpec::new(vec![m; k], vec![n; k])
    }

    pub fn validate(&self) -> Result<()> {
        if self.m.len() < self.k || self.n.len() < self.k {
            return Err(Error::NonPositiveParameter(format!(
                "K = {} needs {} values of m and n",
                self.k, self.k
            )));
        }
        for (m, n) in self.m.iter().zip(&self.n).take(self.k) {
            check_positive(*m, *n)?;
        }
        widths(&self.seed)?;
        if self.ell0.len() != 3 || self.ell0.iter().any(|x| !x.is_positive()) {
            return Err(Error::InvalidWidths("ell0 must be three positive numbers".into()));
        }
        Ok(())
    }

    /// `m_k = n_k <= m_{k+1} / 2`.
    pub fn two_ended_at(&self, k: usize) -> bool {
        k + 1 < self.k && self.m[k] == self.n[k] && 2 * self.m[k] <= self.m[k + 1]
    }
}

/// `w_0, ..., w_K` with `w_K` the seed and `w_k = B(m_k, n_k) w_{k+1}`.
pub fn truncated_widths(spec: &GallerySpec) -> Result<Vec<Vec<Rational>>> {
    spec.validate()?;
    let mut out = vec![spec.seed.clone()];
    for k in (0..spec.k).rev() {
        let next = mat_vec(&matrix_b(spec.m[k], spec.n[k])?, out.last().unwrap());
        out.push(next);
    }
    out.reverse();
    Ok(out)
}

/// `l_0, ..., l_K` with `l_{k+1} = l_k A(m_k, n_k)`.
pub fn length_sequence(spec: &GallerySpec) -> Result<Vec<Vec<Rational>>> {
    spec.validate()?;
    let mut out = vec![spec.ell0.clone()];
    for k in 0..spec.k {
        let next = vec_mat(out.last().unwrap(), &matrix_a(spec.m[k], spec.n[k])?);
        out.push(next);
    }
    Ok(out)
}

/// Stage `k` of the gallery, `Z(w_k, l_k)` in the spec's presentation.
pub fn gallery_state(spec: &GallerySpec, k: usize) -> Result<BandComplex> {
    let w = truncated_widths(spec)?;
    let l = length_sequence(spec)?;
    build_z(&w[k], Some(&l[k]), spec.presentation)
}

/// An eventually periodic sequence of positive integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Periodic {
    #[serde(default)]
    pub prefix: Vec<i64>,
    pub period: Vec<i64>,
}

impl Periodic {
    pub fn constant(x: i64) -> Self {
        Periodic {
            prefix: Vec::new(),
            period: vec![x],
        }
    }

    pub fn at(&self, k: usize) -> i64 {
        match self.prefix.get(k) {
            Some(&x) => x,
            None => self.period[(k - self.prefix.len()) % self.period.len()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedWidths {
    /// Euclidean unit vector.
    pub direction: Vec<f64>,
    pub depth: usize,
    /// Max-norm gap between the last two iterates.
    pub gap: f64,
}

/// Unit direction of `w_0` for infinite sequences, as the limit of
/// `B_0 B_1 ... B_{d-1} v` normalised, starting from `v = (1, ..., 1)`.
pub fn projective_fixed_widths(m: &Periodic, n: &Periodic, tol: f64) -> Result<FixedWidths> {
    projective_fixed_widths_from(m, n, tol, &[1.0; 5])
}

pub fn projective_fixed_widths_from(m: &Periodic, n: &Periodic, tol: f64, start: &[f64]) -> Result<FixedWidths> {
    if !(tol > 0.0) {
        return Err(Error::NonPositiveParameter(format!("tol = {tol}")));
    }
    if m.period.is_empty() || n.period.is_empty() {
        return Err(Error::NonPositiveParameter("empty period".into()));
    }
    const CAP: usize = 100_000;
    let mut product: Vec<Vec<f64>> = (0..5).map(|i| (0..5).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let mut previous = unit(start);
    let mut gap = f64::INFINITY;
    for depth in 1..=CAP {
        let b = matrix_b(m.at(depth - 1), n.at(depth - 1))?;
        product = float_mul(&product, &b);
        let scale = product.iter().flatten().fold(0.0f64, |a, &x| a.max(x));
        product.iter_mut().flatten().for_each(|x| *x /= scale);
        let current = unit(&apply(&product, start));
        gap = max_diff(&current, &previous);
        previous = current;
        if gap < tol {
            return Ok(FixedWidths {
                direction: previous,
                depth,
                gap,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: CAP,
        residual: gap,
    })
}

fn float_mul(a: &[Vec<f64>], b: &IntMatrix) -> Vec<Vec<f64>> {
    a.iter()
        .map(|row| (0..5).map(|j| row.iter().zip(b).map(|(x, r)| x * r[j] as f64).sum()).collect())
        .collect()
}

fn apply(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

pub fn unit(v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / norm).collect()
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Max-norm distance between the unit directions of two positive vectors.
pub fn projective_distance(a: &[f64], b: &[f64]) -> f64 {
    max_diff(&unit(a), &unit(b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaStage {
    pub k: usize,
    #[serde(with = "rational::serde_str")]
    pub area: Rational,
    /// The same area summed over the bands of `Z(w_k, l_k)`.
    pub geometric_area_agrees: bool,
    /// `S_{k+1} > (1 - 2/m_k) S_k`; absent at the last stage, whose
    /// successor is built on the seed rather than on a `B`-image.
    pub inequality: Option<Verdict>,
    /// Entry positivity of `m_k (A_k C - (1 - 2/m_k) C B_k) B_{k+1}`.
    pub certificate: Option<Verdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaReport {
    pub stages: Vec<AreaStage>,
    /// `prod (1 - 2/m_k)` over the stages where it is positive.
    #[serde(with = "rational::serde_str")]
    pub partial_product: Rational,
}

impl AreaReport {
    pub fn all_pass(&self) -> bool {
        self.stages.iter().all(|s| {
            s.geometric_area_agrees
                && s.inequality != Some(Verdict::Fail)
                && s.certificate != Some(Verdict::Fail)
        })
    }
}

/// `m_k (A_k C - (1 - 2/m_k) C B_k) B_{k+1}`.
pub fn certificate_matrix(m0: i64, n0: i64, m1: i64, n1: i64) -> Result<RatMatrix> {
    let a = to_rational(&matrix_a(m0, n0)?);
    let b = to_rational(&matrix_b(m0, n0)?);
    let c = to_rational(&matrix_c());
    let next = to_rational(&matrix_b(m1, n1)?);
    let factor = Rational::one() - rational::rat(2, m0);
    let ac = rat_mul(&a, &c);
    let cb = rat_mul(&c, &b);
    let diff: RatMatrix = ac
        .iter()
        .zip(&cb)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| (x - &factor * y) * int(m0)).collect())
        .collect();
    Ok(rat_mul(&diff, &next))
}

pub fn area_sequence(spec: &GallerySpec) -> Result<AreaReport> {
    let ws = truncated_widths(spec)?;
    let ls = length_sequence(spec)?;
    let areas: Vec<Rational> = ws.iter().zip(&ls).map(|(w, l)| area_formula(l, w)).collect();
    let mut stages = Vec::new();
    let mut partial = Rational::one();
    for k in 0..spec.k.max(1) {
        let geometric = build_z(&ws[k], Some(&ls[k]), Presentation::FourBand)?.area();
        let inequality = (k + 1 < spec.k).then(|| {
            if !spec.two_ended_at(k) {
                return Verdict::NotApplicable;
            }
            let factor = Rational::one() - rational::rat(2, spec.m[k]);
            if factor.is_positive() {
                partial *= &factor;
            }
            verdict(areas[k + 1] > factor * &areas[k])
        });
        let certificate = (k + 1 < spec.k).then(|| {
            if !spec.two_ended_at(k) {
                return Ok(Verdict::NotApplicable);
            }
            let cert = certificate_matrix(spec.m[k], spec.n[k], spec.m[k + 1], spec.n[k + 1])?;
            Ok(verdict(cert.iter().flatten().all(Signed::is_positive)))
        });
        stages.push(AreaStage {
            k,
            area: areas[k].clone(),
            geometric_area_agrees: geometric == areas[k],
            inequality,
            certificate: certificate.transpose()?,
        });
    }
    Ok(AreaReport {
        stages,
        partial_product: partial,
    })
}

fn verdict(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RipsStepWitness {
    pub schedule: Vec<FreeArc>,
    pub reached: BandComplex,
    pub target: BandComplex,
    pub iso: IsoWitness,
    pub states_explored: usize,
}

/// Searches collapse schedules from `Z(B(m,n) w', l)` to a complex
/// isomorphic, lengths included, to `Z(w', l A(m,n))`.
///
/// States are compared after merging bands in series. Breadth-first, with
/// states deduplicated up to isomorphism and pruned when their area falls
/// below the target's (every collapse loses area).
pub fn verify_rips_step(
    m: i64,
    n: i64,
    w_prime: &[Rational],
    ell: &[Rational],
    budget: usize,
) -> Result<RipsStepWitness> {
    let w = mat_vec(&matrix_b(m, n)?, w_prime);
    let ell_prime = vec_mat(ell, &matrix_a(m, n)?);
    let start = normalize_long_bands(&build_z(&w, Some(ell), Presentation::FourBand)?);
    let target = normalize_long_bands(&build_z(w_prime, Some(&ell_prime), Presentation::FourBand)?);
    search_collapses(&start, &target, budget)
}

/// Breadth-first search for a collapse schedule from `start` to `target`.
pub fn search_collapses(start: &BandComplex, target: &BandComplex, budget: usize) -> Result<RipsStepWitness> {
    let target_area = target.area();
    let target_width = target.total_width();
    let target_key = invariant_key(target);
    let mut seen: HashMap<String, Vec<BandComplex>> = HashMap::new();
    let mut queue: VecDeque<(BandComplex, Vec<FreeArc>)> = VecDeque::new();
    seen.entry(invariant_key(start)).or_default().push(start.clone());
    queue.push_back((start.clone(), Vec::new()));
    let mut explored = 0usize;
    while let Some((state, schedule)) = queue.pop_front() {
        explored += 1;
        if state.area() == target_area && state.total_width() == target_width {
            if invariant_key(&state) == target_key {
                if let Some(iso) = isomorphic(&state, target) {
                    return Ok(RipsStepWitness {
                        schedule,
                        reached: state,
                        target: target.clone(),
                        iso,
                        states_explored: explored,
                    });
                }
            }
            continue;
        }
        if explored >= budget {
            return Err(Error::SearchExhausted { states: explored });
        }
        for arc in free_arcs(&state) {
            let next = normalize_long_bands(&collapse(&state, &arc)?);
            if next.area() < target_area || next.total_width() < target_width {
                continue;
            }
            let bucket = seen.entry(invariant_key(&next)).or_default();
            if bucket.iter().any(|s| isomorphic(s, &next).is_some()) {
                continue;
            }
            bucket.push(next.clone());
            let mut sched = schedule.clone();
            sched.push(arc);
            queue.push_back((next, sched));
        }
    }
    Err(Error::SearchExhausted { states: explored })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn printed_matrices_at_one_one() {
        assert_eq!(matrix_a(1, 1).unwrap(), vec![vec![4, 4, 7], vec![0, 1, 1], vec![3, 2, 6]]);
        assert_eq!(
            matrix_b(1, 1).unwrap(),
            vec![
                vec![4, 7, 8, 4, 4],
                vec![1, 3, 4, 2, 1],
                vec![1, 1, 0, 0, 0],
                vec![3, 6, 7, 3, 3],
                vec![6, 10, 11, 6, 5]
            ]
        );
    }

    #[test]
    fn factorisation() {
        for m in 1..=5 {
            for n in 1..=5 {
                assert_eq!(
                    mat_mul(&matrix_bprime(m, n).unwrap(), &matrix_bsecond()),
                    matrix_b(m, n).unwrap()
                );
            }
        }
    }

    #[test]
    fn rejects_non_positive_parameters() {
        assert!(matches!(matrix_a(0, 1), Err(Error::NonPositiveParameter(_))));
        assert!(matches!(matrix_b(1, -2), Err(Error::NonPositiveParameter(_))));
    }

    #[test]
    fn three_band_unit_widths() {
        let z = build_z(&ints(&[1, 1, 1, 1, 1]), None, Presentation::ThreeBand).unwrap();
        let spans: Vec<_> = z
            .bands()
            .iter()
            .map(|b| (b.base0.offset.clone(), b.base1.offset.clone(), b.width.clone()))
            .collect();
        assert_eq!(
            spans,
            vec![(int(0), int(7), int(1)), (int(2), int(4), int(2)), (int(0), int(3), int(5))]
        );
        assert_eq!(z.support_length(), int(8));
        assert_eq!(z.excess(), int(0));
    }

    #[test]
    fn four_band_area_is_the_formula() {
        let w = ints(&[1, 1, 1, 1, 1]);
        let l = ints(&[1, 1, 1]);
        let z = build_z(&w, Some(&l), Presentation::FourBand).unwrap();
        assert_eq!(z.area(), int(13));
        assert_eq!(area_formula(&l, &w), int(13));
        assert_eq!(z.excess(), int(0));
    }

    #[test]
    fn invalid_widths() {
        assert!(matches!(
            build_z(&ints(&[1, 0, 1, 1, 1]), None, Presentation::ThreeBand),
            Err(Error::InvalidWidths(_))
        ));
        assert!(build_z(&ints(&[1, 1, 1]), None, Presentation::ThreeBand).is_err());
    }

    #[test]
    fn one_stage_widths_are_row_sums() {
        let spec = GallerySpec::constant(1, 1, 1);
        let ws = truncated_widths(&spec).unwrap();
        assert_eq!(ws[0], ints(&[27, 11, 2, 22, 38]));
        let zero = GallerySpec::constant(1, 1, 0);
        assert_eq!(truncated_widths(&zero).unwrap(), vec![ints(&[1; 5])]);
    }

    #[test]
    fn lengths_grow() {
        let spec = GallerySpec::doubling(5);
        let ls = length_sequence(&spec).unwrap();
        assert_eq!(ls[1], ints(&[7, 7, 14]));
        for pair in ls.windows(2) {
            assert!(pair[0].iter().zip(&pair[1]).all(|(a, b)| a < b));
        }
    }

    #[test]
    fn areas_on_short_doubling_spec() {
        let report = area_sequence(&GallerySpec::doubling(4)).unwrap();
        assert!(report.all_pass(), "{report:?}");
        assert_eq!(report.stages.len(), 4);
        assert!(report.stages[..3].iter().all(|s| s.inequality == Some(Verdict::Pass)));
        let flat = area_sequence(&GallerySpec::doubling(0)).unwrap();
        assert_eq!(flat.stages[0].area, int(13));
    }

    #[test]
    fn certificate_examples() {
        for (a, b) in [(1, 2), (2, 4), (3, 6)] {
            let cert = certificate_matrix(a, a, b, b).unwrap();
            assert!(cert.iter().flatten().all(Signed::is_positive), "{a} {b}");
        }
    }

    #[test]
    fn fixed_widths_do_not_depend_on_the_start() {
        let one = Periodic::constant(1);
        let tol = 1e-12;
        let a = projective_fixed_widths(&one, &one, tol).unwrap();
        let b = projective_fixed_widths_from(&one, &one, tol, &[5.0, 1.0, 0.5, 2.0, 9.0]).unwrap();
        assert!(max_diff(&a.direction, &b.direction) < 2.0 * tol * 100.0);
    }
}
