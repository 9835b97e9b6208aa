//! The point set `R` and plane set `S` built from `(A, B, C, f)`, exact
//! incidence counts, exact collinearity, and the point–plane bound terms.
//!
//! Both configurations are products. With `T` the projection of `R` onto
//! its first two coordinates and `F = f(A, B)`:
//!
//! * `R = T × F`
//! * `S ≅ F × T`, plane `u X ∓ Y - v Z = w'` for `u ∈ F`, `(v, ·) ∈ T`
//!
//! so `I(R, S) = Σ_λ N(λ)²` with `N(λ) = |{(u, (x, y)) ∈ F × T : u·x ∓ y = λ}|`.
//! That histogram count is used for large instances; the prefix-grouped
//! counter and the naive double loop cross-check it within their budgets.

use std::collections::HashMap;

use serde::Serialize;

use crate::energy::Variant;
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::functions::ExpanderSpec;
use crate::sets::FSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point3 {
    pub x: u64,
    pub y: u64,
    pub z: u64,
}

impl Point3 {
    pub fn new(field: PrimeField, x: u64, y: u64, z: u64) -> Self {
        Point3 {
            x: field.reduce(x),
            y: field.reduce(y),
            z: field.reduce(z),
        }
    }

    fn coords(&self) -> [u64; 3] {
        [self.x, self.y, self.z]
    }
}

/// `n1·X + n2·Y + n3·Z = d`, scaled so the first nonzero normal coefficient
/// is 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Plane3 {
    pub normal: [u64; 3],
    pub d: u64,
}

impl Plane3 {
    pub fn new(field: PrimeField, normal: [u64; 3], d: u64) -> Result<Self> {
        let normal = normal.map(|c| field.reduce(c));
        let d = field.reduce(d);
        let lead = *normal
            .iter()
            .find(|&&c| c != 0)
            .ok_or_else(|| Error::InvalidParameter("plane normal is zero".into()))?;
        let s = field.inv(lead)?;
        Ok(Plane3 {
            normal: normal.map(|c| field.mul(c, s)),
            d: field.mul(d, s),
        })
    }

    #[inline]
    pub fn contains(&self, field: PrimeField, pt: &Point3) -> bool {
        let [a, b, c] = self.normal;
        let lhs = field.add(
            field.add(field.mul(a, pt.x), field.mul(b, pt.y)),
            field.mul(c, pt.z),
        );
        lhs == self.d
    }
}

fn first_two_coords(variant: Variant, field: PrimeField, g_inv: u64, h: u64, c: u64) -> (u64, u64) {
    match variant {
        Variant::Multiplicative => (field.mul(c, g_inv), field.mul(c, h)),
        Variant::Additive => (g_inv, field.sub(c, h)),
    }
}

/// `R` enumerated literally over `(a, c, a', b') ∈ A×C×A×B`, sorted and
/// deduplicated. Cost `O(|A|²|B||C|)`.
pub fn build_r(
    variant: Variant,
    a: &FSet,
    b: &FSet,
    c: &FSet,
    spec: &ExpanderSpec,
) -> Result<Vec<Point3>> {
    let field = spec.field();
    let resolved = spec.resolve(a)?;
    let mut out = Vec::with_capacity(resolved.len() * resolved.len() * b.len() * c.len());
    for r in &resolved {
        for cv in c.iter() {
            let (x, y) = first_two_coords(variant, field, r.g_inv, r.h, cv);
            for r2 in &resolved {
                for bv in b.iter() {
                    let z = field.mul(r2.g, field.add(r2.h, bv));
                    out.push(Point3 { x, y, z });
                }
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// `S` enumerated literally over `(a, b, a', c') ∈ A×B×A×C`, canonicalized
/// and deduplicated.
pub fn build_s(
    variant: Variant,
    a: &FSet,
    b: &FSet,
    c: &FSet,
    spec: &ExpanderSpec,
) -> Result<Vec<Plane3>> {
    let field = spec.field();
    let resolved = spec.resolve(a)?;
    let minus_one = field.neg(1);
    let mut out = Vec::with_capacity(resolved.len() * resolved.len() * b.len() * c.len());
    for r in &resolved {
        for bv in b.iter() {
            let u = field.mul(r.g, field.add(r.h, bv));
            for r2 in &resolved {
                for cv in c.iter() {
                    let plane = match variant {
                        // u X - Y - c' g(a')^{-1} Z = -c' h(a')
                        Variant::Multiplicative => Plane3::new(
                            field,
                            [u, minus_one, field.neg(field.mul(cv, r2.g_inv))],
                            field.neg(field.mul(cv, r2.h)),
                        )?,
                        // u X + Y - g(a')^{-1} Z = c' - h(a')
                        Variant::Additive => Plane3::new(
                            field,
                            [u, 1, field.neg(r2.g_inv)],
                            field.sub(cv, r2.h),
                        )?,
                    };
                    out.push(plane);
                }
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// `T = {(x, y)}`, built directly from `A × C`.
pub fn projection(variant: Variant, a: &FSet, c: &FSet, spec: &ExpanderSpec) -> Result<Vec<(u64, u64)>> {
    let field = spec.field();
    let resolved = spec.resolve(a)?;
    let mut t: Vec<(u64, u64)> = resolved
        .iter()
        .flat_map(|r| c.iter().map(move |cv| first_two_coords(variant, field, r.g_inv, r.h, cv)))
        .collect();
    t.sort_unstable();
    t.dedup();
    Ok(t)
}

/// Distinct `(x, y)` prefixes of a point set.
pub fn project_points(points: &[Point3]) -> Vec<(u64, u64)> {
    let mut t: Vec<(u64, u64)> = points.iter().map(|p| (p.x, p.y)).collect();
    t.sort_unstable();
    t.dedup();
    t
}

/// Reference count: every point against every plane.
pub fn count_incidences_naive(points: &[Point3], planes: &[Plane3], field: PrimeField) -> u64 {
    planes
        .iter()
        .map(|s| points.iter().filter(|r| s.contains(field, r)).count() as u64)
        .sum()
}

/// Groups points by their `(x, y)` prefix; a plane with `n3 ≠ 0` meets each
/// prefix column in at most one `z`, found by binary search. Works for any
/// point and plane sets.
pub fn count_incidences(points: &[Point3], planes: &[Plane3], field: PrimeField) -> u64 {
    let mut sorted = points.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut columns: Vec<(u64, u64, Vec<u64>)> = Vec::new();
    for p in &sorted {
        match columns.last_mut() {
            Some((x, y, zs)) if *x == p.x && *y == p.y => zs.push(p.z),
            _ => columns.push((p.x, p.y, vec![p.z])),
        }
    }
    let mut total = 0u64;
    for s in planes {
        let [n1, n2, n3] = s.normal;
        let n3_inv = if n3 != 0 { Some(field.inv(n3).expect("nonzero")) } else { None };
        for (x, y, zs) in &columns {
            let rest = field.sub(s.d, field.add(field.mul(n1, *x), field.mul(n2, *y)));
            match n3_inv {
                Some(inv) => {
                    if zs.binary_search(&field.mul(rest, inv)).is_ok() {
                        total += 1;
                    }
                }
                None if rest == 0 => total += zs.len() as u64,
                None => {}
            }
        }
    }
    total
}

/// `I(R, S)` for `R = T × F` and the matching plane set, as `Σ_λ N(λ)²`.
pub fn count_product_incidences(
    variant: Variant,
    t: &[(u64, u64)],
    image: &FSet,
    field: PrimeField,
) -> Result<u128> {
    let mut levels: Vec<u64> = Vec::with_capacity(t.len() * image.len());
    for &(x, y) in t {
        for u in image.iter() {
            let ux = field.mul(u, x);
            levels.push(match variant {
                Variant::Multiplicative => field.sub(ux, y),
                Variant::Additive => field.add(ux, y),
            });
        }
    }
    levels.sort_unstable();
    let mut total = 0u128;
    let mut i = 0;
    while i < levels.len() {
        let j = i + levels[i..].iter().take_while(|&&l| l == levels[i]).count();
        let n = (j - i) as u128;
        total = total
            .checked_add(n * n)
            .ok_or(Error::Overflow("incidence count"))?;
        i = j;
    }
    Ok(total)
}

/// Canonical key of the line through two distinct points: direction scaled
/// to a leading 1, and the base point with zero in the pivot coordinate.
fn line_key(field: PrimeField, p: [u64; 3], q: [u64; 3]) -> ([u64; 3], [u64; 3]) {
    let mut dir = [0u64; 3];
    for i in 0..3 {
        dir[i] = field.sub(q[i], p[i]);
    }
    let pivot = dir.iter().position(|&c| c != 0).expect("distinct points");
    let s = field.inv(dir[pivot]).expect("nonzero");
    let dir = dir.map(|c| field.mul(c, s));
    let t = p[pivot];
    let mut base = [0u64; 3];
    for i in 0..3 {
        base[i] = field.sub(p[i], field.mul(t, dir[i]));
    }
    (dir, base)
}

/// Maximum number of points on a common line, or `None` when the number of
/// point pairs exceeds `pair_budget`. Each line with `t` points collects
/// `t(t-1)/2` pairs.
pub fn max_collinear(points: &[Point3], field: PrimeField, pair_budget: u64) -> Option<u64> {
    let n = points.len() as u64;
    if n <= 1 {
        return Some(n);
    }
    let pairs = n * (n - 1) / 2;
    if pairs > pair_budget {
        return None;
    }
    let mut lines: HashMap<([u64; 3], [u64; 3]), u64> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            if p == q {
                continue;
            }
            *lines.entry(line_key(field, p.coords(), q.coords())).or_insert(0) += 1;
        }
    }
    let max_pairs = lines.values().copied().max().unwrap_or(0);
    if max_pairs == 0 {
        // all points coincide
        return Some(1);
    }
    Some((1 + 8 * max_pairs).isqrt().div_ceil(2))
}

/// `max{|A|, |C|, |f(A, B)|}`
pub fn k_paper_bound(a: &FSet, c: &FSet, image: &FSet) -> u64 {
    a.len().max(c.len()).max(image.len()) as u64
}

/// `max{|A|, m|C|, |f(A, B)|}` where `m` is the variant's multiplicity.
///
/// The covering lines of `T` are indexed by the values `g(a)h(a)` (resp.
/// `g(a)^{-1}`), not by `a`, so one line can carry `m|C|` points of `T`.
/// With `m = 1` this is [`k_paper_bound`].
pub fn k_bound(a: &FSet, c: &FSet, image: &FSet, m: u64) -> u64 {
    (a.len() as u64).max(m * c.len() as u64).max(image.len() as u64)
}

/// `|R|^{1/2}|S| + k|S|`
pub fn rudnev_rhs(size_r: u64, size_s: u64, k: u64) -> f64 {
    (size_r as f64).sqrt() * size_s as f64 + k as f64 * size_s as f64
}

/// True iff `|R| <= p²`, i.e. the small-configuration branch applies.
pub fn p2_gate(size_r: u64, field: PrimeField) -> bool {
    let p = field.modulus() as u128;
    (size_r as u128) <= p * p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budgets {
    /// Max point pairs for exact collinearity.
    pub collinear_pairs: u64,
    /// Max `|R|·|S|` for the naive counter.
    pub oracle: u64,
    /// Max `|T|·|S|` for the prefix-grouped counter.
    pub grouped: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            collinear_pairs: 200_000,
            oracle: 10_000_000,
            grouped: 20_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncidenceReport {
    pub size_r: u64,
    pub size_s: u64,
    pub projection_size: u64,
    pub image_size: u64,
    pub incidences: u128,
    pub incidences_grouped: Option<u128>,
    pub incidences_naive: Option<u128>,
    pub k_exact: Option<u64>,
    pub k_paper: u64,
    pub k_bound: u64,
    pub rudnev_rhs: f64,
    pub rudnev_ratio: f64,
    pub p2_gate: bool,
    pub energy: u128,
    pub e_le_i: bool,
}

impl IncidenceReport {
    /// `|R| = |S| = |T|·|f(A, B)|`
    pub fn structural_ok(&self) -> bool {
        self.size_r == self.size_s
            && self.size_r as u128 == self.projection_size as u128 * self.image_size as u128
    }

    pub fn counters_agree(&self) -> bool {
        [self.incidences_grouped, self.incidences_naive]
            .iter()
            .flatten()
            .all(|&i| i == self.incidences)
    }

    /// Checks `k_exact` against [`k_bound`].
    pub fn collinear_ok(&self) -> bool {
        self.k_exact.is_none_or(|k| k <= self.k_bound)
    }

    /// Checks `k_exact` against [`k_paper_bound`], which can fail when the
    /// multiplicity exceeds 1.
    pub fn paper_k_holds(&self) -> bool {
        self.k_exact.is_none_or(|k| k <= self.k_paper)
    }

    pub fn incidences_bounded(&self) -> bool {
        self.incidences <= self.size_r as u128 * self.size_s as u128
    }

    pub fn is_ok(&self) -> bool {
        self.structural_ok()
            && self.counters_agree()
            && self.collinear_ok()
            && self.e_le_i
            && self.incidences_bounded()
    }
}

/// Builds `R` and `S`, counts incidences and collinearity, and compares
/// against `energy = E` from the level counts on the same inputs.
pub fn incidence_report(
    variant: Variant,
    a: &FSet,
    b: &FSet,
    c: &FSet,
    spec: &ExpanderSpec,
    energy: u128,
    budgets: &Budgets,
) -> Result<IncidenceReport> {
    let field = spec.field();
    let r = build_r(variant, a, b, c, spec)?;
    let s = build_s(variant, a, b, c, spec)?;
    let t = projection(variant, a, c, spec)?;
    let image = spec.image(a, b)?;

    let incidences = count_product_incidences(variant, &t, &image, field)?;
    let (size_r, size_s) = (r.len() as u64, s.len() as u64);
    let rs = size_r as u128 * size_s as u128;
    let incidences_naive = (rs <= budgets.oracle as u128)
        .then(|| count_incidences_naive(&r, &s, field) as u128);
    let ts = t.len() as u128 * size_s as u128;
    let incidences_grouped =
        (ts <= budgets.grouped as u128).then(|| count_incidences(&r, &s, field) as u128);

    let k_exact = max_collinear(&r, field, budgets.collinear_pairs);
    let k_paper = k_paper_bound(a, c, &image);
    let k_bound = k_bound(a, c, &image, spec.multiplicity(variant)?);
    let rhs = rudnev_rhs(size_r, size_s, k_exact.unwrap_or(k_bound));
    Ok(IncidenceReport {
        size_r,
        size_s,
        projection_size: t.len() as u64,
        image_size: image.len() as u64,
        incidences,
        incidences_grouped,
        incidences_naive,
        k_exact,
        k_paper,
        k_bound,
        rudnev_rhs: rhs,
        rudnev_ratio: if rhs > 0.0 { incidences as f64 / rhs } else { 0.0 },
        p2_gate: p2_gate(size_r, field),
        energy,
        e_le_i: energy <= incidences,
    })
}
