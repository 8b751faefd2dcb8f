//! Cohomology-ring models of spaces and maps.
//!
//! A [`SpaceModel`] is a truncated graded ring together with rewrite rules
//! that bring any element to a canonical normal form, a tangent class and
//! (for compact models) the monomial whose coefficient is the integral.
//!
//! `P(F)` is the bundle of lines in `F^dual`, with `xi = c_1(O(1))`. Its
//! Euler sequence is `0 -> O -> p^*F^dual (x) O(1) -> T_p -> 0`, the relation
//! is `sum_i c_i(F^dual) xi^{r-i} = 0` and the push-forward of a power of `xi`
//! is a Segre class: `p_*(xi^k) = s_{k-r+1}(F^dual)` with
//! `s(F^dual) c(F^dual) = 1`. For rank 2 this gives `xi^2 = c_1 xi - c_2` and
//! `A = xi - c_1/2` satisfies `A^2 = c_1^2/4 - c_2`.

use std::sync::Arc;

use smallvec::SmallVec;
use thiserror::Error;

use crate::algebra::{rat, AlgebraError, GradedElement, GradedRing, Rational};
use crate::classes::{ClassError, FormalBundle};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Class(#[from] ClassError),
    #[error("unsupported operation on {space}: {what}")]
    Unsupported { space: String, what: String },
    #[error("projective bundle needs a bundle of rank >= 1 (got {0})")]
    BadRank(i64),
    #[error("element does not live in the ring of {0}")]
    WrongSpace(String),
}

/// `gen^power = replacement`.
#[derive(Clone, Debug)]
struct Rewrite {
    generator: usize,
    power: u16,
    replacement: GradedElement,
}

/// Monomials whose weight restricted to the masked generators exceeds `cap`
/// vanish.
#[derive(Clone, Debug)]
struct WeightCap {
    mask: Vec<bool>,
    cap: u32,
}

#[derive(Debug)]
pub struct SpaceModel {
    name: String,
    ring: GradedRing,
    dimension: Option<u32>,
    rewrites: Vec<Rewrite>,
    caps: Vec<WeightCap>,
    tangent: FormalBundle,
    top: Option<SmallVec<[u16; 8]>>,
    tautological: Option<FormalBundle>,
}

impl SpaceModel {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ring(&self) -> &GradedRing {
        &self.ring
    }

    /// Complex dimension; `None` for the inverse-limit base.
    pub fn dimension(&self) -> Option<u32> {
        self.dimension
    }

    /// Tangent class. The universal base carries the trivial class.
    pub fn tangent(&self) -> &FormalBundle {
        &self.tangent
    }

    /// The tautological rank-2 bundle of the universal base.
    pub fn tautological(&self) -> Option<&FormalBundle> {
        self.tautological.as_ref()
    }

    pub fn generator(&self, name: &str) -> Result<GradedElement, SpaceError> {
        Ok(self.ring.generator_by_name(name)?)
    }

    fn check(&self, a: &GradedElement) -> Result<(), SpaceError> {
        if a.ring() != &self.ring {
            return Err(SpaceError::WrongSpace(self.name.clone()));
        }
        Ok(())
    }

    /// Canonical normal form modulo the relations of the model.
    pub fn reduce(&self, a: &GradedElement) -> Result<GradedElement, SpaceError> {
        self.check(a)?;
        let mut current = self.apply_caps(a);
        loop {
            let mut changed = false;
            let mut next = self.ring.zero();
            for (mono, c) in current.terms() {
                let exps = mono.exponents();
                let rule = self.rewrites.iter().find(|r| exps[r.generator] >= r.power);
                match rule {
                    None => {
                        let term = self.ring.monomial(exps.iter().copied().collect(), c.clone());
                        next = &next + &term;
                    }
                    Some(r) => {
                        changed = true;
                        let mut rest: SmallVec<[u16; 8]> = exps.iter().copied().collect();
                        rest[r.generator] -= r.power;
                        let term = self.ring.monomial(rest, c.clone());
                        next = &next + &self.apply_caps(&(&term * &r.replacement));
                    }
                }
            }
            current = self.apply_caps(&next);
            if !changed {
                return Ok(current);
            }
        }
    }

    fn apply_caps(&self, a: &GradedElement) -> GradedElement {
        if self.caps.is_empty() {
            return a.clone();
        }
        let weights = self.ring.generators().weights();
        a.filter_terms(|m| {
            self.caps.iter().all(|cap| {
                let w: u32 = m
                    .exponents()
                    .iter()
                    .zip(weights)
                    .zip(&cap.mask)
                    .filter(|(_, &on)| on)
                    .map(|((&e, &w), _)| e as u32 * w)
                    .sum();
                w <= cap.cap
            })
        })
    }

    /// Whether `a == b` in the cohomology of the model.
    pub fn equal(&self, a: &GradedElement, b: &GradedElement) -> Result<bool, SpaceError> {
        Ok(self.reduce(&a.sub(b)?)?.is_zero())
    }

    /// Integral over the model: the coefficient of the top monomial of the
    /// normal form.
    pub fn integrate(&self, a: &GradedElement) -> Result<Rational, SpaceError> {
        let top = self.top.as_ref().ok_or_else(|| SpaceError::Unsupported {
            space: self.name.clone(),
            what: "integration (the model has no fundamental class)".into(),
        })?;
        let reduced = self.reduce(a)?;
        Ok(reduced.coeff(top))
    }
}

/// The one-point space; its ring is the rationals.
pub fn point() -> Arc<SpaceModel> {
    let ring = GradedRing::with_generators(Vec::<(String, u32)>::new(), 0).expect("empty generator set");
    Arc::new(SpaceModel {
        name: "point".into(),
        tangent: FormalBundle::trivial(&ring, 0),
        ring,
        dimension: Some(0),
        rewrites: Vec::new(),
        caps: Vec::new(),
        top: Some(SmallVec::new()),
        tautological: None,
    })
}

/// `P^n` with hyperplane class `h`: ring `Q[h]/(h^{n+1})`, tangent class from
/// the Euler sequence `[T] = (n+1)[O(1)] - [O]`.
pub fn projective_space(n: u32) -> Arc<SpaceModel> {
    if n == 0 {
        return point();
    }
    let ring = GradedRing::with_generators([("h", 1)], n).expect("single generator");
    let h = ring.generator(0);
    let c = (&ring.one() + &h).pow(n + 1);
    let tangent = FormalBundle::new(n as i64, c).expect("unit total Chern class");
    Arc::new(SpaceModel {
        name: format!("P({n})"),
        tangent,
        ring,
        dimension: Some(n),
        rewrites: Vec::new(),
        caps: vec![WeightCap { mask: vec![true], cap: n }],
        top: Some(SmallVec::from_slice(&[n as u16])),
        tautological: None,
    })
}

/// Free ring on `c1` (weight 1) and `c2` (weight 2) truncated at `truncation`:
/// the inverse limit of the cohomology of the Grassmannians of 2-planes,
/// carrying the tautological bundle `S` with `c(S) = 1 + c1 + c2`.
pub fn universal_rank2_base(truncation: u32) -> Arc<SpaceModel> {
    let truncation = truncation.max(1);
    let ring = GradedRing::with_generators([("c1", 1), ("c2", 2)], truncation).expect("distinct generators");
    let s = FormalBundle::from_classes(2, &[ring.generator(0), ring.generator(1)], &ring).expect("unit total Chern class");
    Arc::new(SpaceModel {
        name: format!("universal2({truncation})"),
        tangent: FormalBundle::trivial(&ring, 0),
        ring,
        dimension: None,
        rewrites: Vec::new(),
        caps: Vec::new(),
        top: None,
        tautological: Some(s),
    })
}

/// `c_0(Q), ..., c_maxk(Q)` from `c(S) c(Q) = 1`, computed by the recurrence
/// `c_k(Q) = -c_1(S) c_{k-1}(Q) - c_2(S) c_{k-2}(Q)`.
pub fn grassmannian_quotient_classes(base: &SpaceModel, maxk: u32) -> Result<Vec<GradedElement>, SpaceError> {
    let s = base.tautological().ok_or_else(|| SpaceError::Unsupported {
        space: base.name.clone(),
        what: "quotient classes need the universal rank-2 base".into(),
    })?;
    let truncation = base.ring.truncation();
    if maxk > truncation {
        return Err(ClassError::BeyondTruncation { requested: maxk, truncation }.into());
    }
    let c1 = s.chern_class(1);
    let c2 = s.chern_class(2);
    let mut q = vec![base.ring.one()];
    if maxk >= 1 {
        q.push(c1.neg());
    }
    for k in 2..=maxk as usize {
        let next = &(&c1 * &q[k - 1]).neg() - &(&c2 * &q[k - 2]);
        q.push(next);
    }
    Ok(q)
}

/// How a map pushes classes forward.
#[derive(Debug)]
enum PushRule {
    /// Projection of a projective bundle: `p_*(a xi^k) = a s_{k-r+1}(F)`.
    ProjectiveBundle { xi: usize, rank: u32, segre: Vec<GradedElement> },
    /// Integration over a compact model.
    ToPoint,
    /// `(g o f)_* = g_* f_*`.
    Composite { first: Arc<MapModel>, second: Arc<MapModel> },
}

/// A map of models: a ring morphism `target -> source` by generator images,
/// with a push-forward rule and relative tangent class.
#[derive(Debug)]
pub struct MapModel {
    source: Arc<SpaceModel>,
    target: Arc<SpaceModel>,
    images: Vec<GradedElement>,
    relative_dimension: u32,
    relative_tangent: FormalBundle,
    rule: Option<PushRule>,
}

impl MapModel {
    pub fn source(&self) -> &Arc<SpaceModel> {
        &self.source
    }

    pub fn target(&self) -> &Arc<SpaceModel> {
        &self.target
    }

    pub fn relative_dimension(&self) -> u32 {
        self.relative_dimension
    }

    pub fn relative_tangent(&self) -> &FormalBundle {
        &self.relative_tangent
    }

    /// `f^* a`, reduced in the source model.
    pub fn pullback(&self, a: &GradedElement) -> Result<GradedElement, SpaceError> {
        self.target.check(a)?;
        let up = a.substitute(&self.images, self.source.ring())?;
        self.source.reduce(&up)
    }

    pub fn pullback_bundle(&self, e: &FormalBundle) -> Result<FormalBundle, SpaceError> {
        let chern = self.pullback(e.total_chern())?;
        Ok(FormalBundle::new(e.rank(), chern)?)
    }

    /// `f_* a`, reduced in the target model. Lowers weight by the relative
    /// dimension.
    pub fn pushforward(&self, a: &GradedElement) -> Result<GradedElement, SpaceError> {
        self.source.check(a)?;
        match &self.rule {
            None => Err(SpaceError::Unsupported {
                space: self.source.name.clone(),
                what: "map without a push-forward rule".into(),
            }),
            Some(PushRule::ToPoint) => Ok(self.target.ring().constant(self.source.integrate(a)?)),
            Some(PushRule::Composite { first, second }) => second.pushforward(&first.pushforward(a)?),
            Some(PushRule::ProjectiveBundle { xi, rank, segre }) => {
                let target_ring = self.target.ring();
                let n = target_ring.ngens();
                let mut out = target_ring.zero();
                for (mono, c) in a.terms() {
                    let exps = mono.exponents();
                    let k = exps[*xi] as i64;
                    let j = k - (*rank as i64 - 1);
                    if j < 0 || j as usize >= segre.len() {
                        continue;
                    }
                    let base: SmallVec<[u16; 8]> = exps[..n].iter().copied().collect();
                    let term = target_ring.monomial(base, c.clone());
                    out = &out + &(&term * &segre[j as usize]);
                }
                self.target.reduce(&out)
            }
        }
    }

    /// The structure map of a compact model to the point.
    pub fn to_point(space: &Arc<SpaceModel>) -> Result<Arc<MapModel>, SpaceError> {
        let dim = match (space.dimension, &space.top) {
            (Some(d), Some(_)) => d,
            _ => {
                return Err(SpaceError::Unsupported {
                    space: space.name.clone(),
                    what: "map to the point from a non-compact model".into(),
                })
            }
        };
        let pt = point();
        Ok(Arc::new(MapModel {
            source: space.clone(),
            target: pt.clone(),
            images: Vec::new(),
            relative_dimension: dim,
            relative_tangent: space.tangent.clone(),
            rule: Some(PushRule::ToPoint),
        }))
    }

    /// `g o f` for `f = self: X -> Z` and `g: Z -> Y`.
    pub fn then(self: &Arc<Self>, g: &Arc<MapModel>) -> Result<Arc<MapModel>, SpaceError> {
        if !Arc::ptr_eq(&self.target, &g.source) {
            return Err(SpaceError::Unsupported {
                space: self.target.name.clone(),
                what: "composition of maps that do not chain".into(),
            });
        }
        let images = g
            .images
            .iter()
            .map(|img| self.pullback(img))
            .collect::<Result<Vec<_>, _>>()?;
        let pulled = self.pullback_bundle(&g.relative_tangent)?;
        let relative_tangent = self.relative_tangent.sum(&pulled)?;
        Ok(Arc::new(MapModel {
            source: self.source.clone(),
            target: g.target.clone(),
            images,
            relative_dimension: self.relative_dimension + g.relative_dimension,
            relative_tangent,
            rule: Some(PushRule::Composite { first: self.clone(), second: g.clone() }),
        }))
    }
}

/// Segre classes `s_0..s_max` of a bundle: graded pieces of `c(F)^{-1}`.
pub fn segre_classes(f: &FormalBundle, max: u32) -> Result<Vec<GradedElement>, SpaceError> {
    let inv = f.total_chern().inverse()?;
    Ok((0..=max).map(|j| inv.grade_part(j)).collect())
}

fn fresh_xi_name(ring: &GradedRing) -> String {
    let names = ring.generators().names();
    if !names.iter().any(|n| n == "xi") {
        return "xi".into();
    }
    (2..).map(|i| format!("xi{i}")).find(|n| !names.contains(n)).expect("unbounded")
}

/// `X = P(F) -> Y` for a bundle `F` of rank `r >= 1` on `Y`.
///
/// The ring of `X` adds `xi` of weight 1, truncated at `trunc(Y) + r - 1`.
pub fn projective_bundle(
    base: &Arc<SpaceModel>,
    f: &FormalBundle,
) -> Result<(Arc<SpaceModel>, Arc<MapModel>), SpaceError> {
    base.check(f.total_chern())?;
    if f.rank() < 1 {
        return Err(SpaceError::BadRank(f.rank()));
    }
    let r = f.rank() as u32;
    let base_ring = base.ring();
    let ring = base_ring.extend([(fresh_xi_name(base_ring), 1)], base_ring.truncation() + r - 1)?;
    let nbase = base_ring.ngens();
    let xi = ring.generator(nbase);
    let fd = f.dual();

    let mut replacement = ring.zero();
    for i in 1..=r {
        let ci = fd.chern_class(i).embed(&ring)?;
        replacement = &replacement - &(&ci * &xi.pow(r - i));
    }
    let mut rewrites = base
        .rewrites
        .iter()
        .map(|rw| {
            Ok(Rewrite { generator: rw.generator, power: rw.power, replacement: rw.replacement.embed(&ring)? })
        })
        .collect::<Result<Vec<_>, AlgebraError>>()?;
    rewrites.push(Rewrite { generator: nbase, power: r as u16, replacement });

    let mut caps: Vec<WeightCap> = base
        .caps
        .iter()
        .map(|c| {
            let mut mask = c.mask.clone();
            mask.push(false);
            WeightCap { mask, cap: c.cap }
        })
        .collect();
    let mut mask = vec![true; nbase];
    mask.push(false);
    caps.push(WeightCap { mask, cap: base_ring.truncation() });

    let mut top = base.top.clone();
    if let Some(t) = top.as_mut() {
        t.push((r - 1) as u16);
    }
    let mut space = SpaceModel {
        name: format!("proj_bundle({}, {})", base.name, r),
        ring: ring.clone(),
        dimension: base.dimension.map(|d| d + r - 1),
        rewrites,
        caps,
        tangent: FormalBundle::trivial(&ring, 0),
        top,
        tautological: None,
    };

    let fd_up = FormalBundle::new(fd.rank(), fd.total_chern().embed(&ring)?)?;
    let relative = fd_up.twist_by_line(&xi)?.difference(&FormalBundle::trivial(&ring, 1))?;
    let relative = FormalBundle::new(relative.rank(), space.reduce(relative.total_chern())?)?;
    let base_tangent = FormalBundle::new(base.tangent.rank(), base.tangent.total_chern().embed(&ring)?)?;
    let tangent = base_tangent.sum(&relative)?;
    space.tangent = FormalBundle::new(tangent.rank(), space.reduce(tangent.total_chern())?)?;

    let space = Arc::new(space);
    let map = Arc::new(MapModel {
        source: space.clone(),
        target: base.clone(),
        images: (0..nbase).map(|i| ring.generator(i)).collect(),
        relative_dimension: r - 1,
        relative_tangent: relative,
        rule: Some(PushRule::ProjectiveBundle {
            xi: nbase,
            rank: r,
            segre: segre_classes(&fd, base_ring.truncation())?,
        }),
    });
    Ok((space, map))
}

/// `A = xi - p^*c_1(F)/2` on a projective bundle `P(F)`.
pub fn normalized_hyperplane(map: &MapModel, f: &FormalBundle) -> Result<GradedElement, SpaceError> {
    let xi = map.source.ring().generator(map.target.ring().ngens());
    let c1 = map.pullback(&f.chern_class(1))?;
    Ok(&xi - &c1.scale(&rat(1, 2)))
}
