use std::fmt;

use crate::dyadic::DyadicMpt;
use crate::group::Group;
use crate::groups::IsometrySpace;
use crate::l0::StepFn;
use crate::rational::Q;

/// An element `(f, T)` of `L⁰([0,1], G) ⋊ Aut([0,1])`, acting on
/// `L⁰([0,1], X)` by `((f,T)·α)(ω) = f(ω)(α(T⁻¹ω))`.
#[derive(Debug, Clone, PartialEq)]
pub struct TildeElement<G: Group> {
    pub fiber: StepFn<G>,
    pub base: DyadicMpt,
}

impl<G: Group> TildeElement<G> {
    pub fn new(fiber: StepFn<G>, base: DyadicMpt) -> Self {
        Self { fiber, base }
    }

    /// `(C_g, T)`.
    pub fn constant(g: G, base: DyadicMpt) -> Self {
        Self { fiber: StepFn::constant(g), base }
    }

    pub fn from_fiber(fiber: StepFn<G>) -> Self {
        Self { fiber, base: DyadicMpt::identity_at(0) }
    }

    pub fn from_base(base: DyadicMpt) -> Self {
        Self { fiber: StepFn::identity(), base }
    }

    /// Finest level used by either component.
    pub fn level(&self) -> u32 {
        self.fiber.level().max(self.base.level())
    }

    /// `(f, T)(g, S) = (f · (g ∘ T⁻¹), T ∘ S)`.
    pub fn product(&self, rhs: &Self) -> Self {
        Self { fiber: self.fiber.mul(&rhs.fiber.pushforward(&self.base)), base: self.base.compose(&rhs.base) }
    }

    /// `(ω ↦ f(Tω)⁻¹, T⁻¹)`.
    pub fn inverse(&self) -> Self {
        Self { fiber: self.fiber.pullback(&self.base).inv(), base: self.base.inverse() }
    }

    pub fn act<S: IsometrySpace<Iso = G>>(&self, space: &S, alpha: &StepFn<S::Point>) -> StepFn<S::Point> {
        self.fiber.zip_with(&alpha.pushforward(&self.base), |g, x| space.act(g, x))
    }
}

impl<G: Group> Group for TildeElement<G> {
    fn identity() -> Self {
        Self { fiber: StepFn::identity(), base: DyadicMpt::identity_at(0) }
    }

    fn mul(&self, rhs: &Self) -> Self {
        self.product(rhs)
    }

    fn inv(&self) -> Self {
        self.inverse()
    }
}

/// `d̂(α, β) = ∫ d(α(ω), β(ω)) dω` over `X`.
pub fn dhat_x<S: IsometrySpace>(space: &S, a: &StepFn<S::Point>, b: &StepFn<S::Point>) -> Q {
    a.integrate_distance(b, |x, y| space.dist(x, y))
}

impl<G: Group + fmt::Display> fmt::Display for TildeElement<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tilde {{ {} ; {} }}", self.fiber, self.base)
    }
}
