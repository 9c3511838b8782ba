use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{AmbientSpace, Point};
use crate::scalar::Scalar;

pub const DEFAULT_STEP: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatalogId {
    /// `x_i' = rate_i * x_i`, all rates negative, on `[-1, 1]^d`.
    LinearNode,
    /// `x' = rate_u * x`, `y' = rate_s * y` on `[-1, 1]^2`.
    PlanarSaddle,
    /// `theta' = sin(theta)` on the circle of length `2 pi`; source at 0, sink at `pi`.
    NorthSouthCircle,
    /// `r' = r (1 - r)`, `theta' = 1` in Cartesian form on `[-2, 2]^2`.
    AttractingCircle,
    /// `(x, y) -> (2x + y, x + y) mod 1` on the unit torus.
    CatMap,
    /// `theta -> theta + angle mod 2 pi` on the circle of length `2 pi`.
    Rotation,
    /// `x' = M x` for a row-major square matrix `M`, on `[-1, 1]^d`.
    CustomLinear,
}

impl CatalogId {
    pub const ALL: [CatalogId; 7] = [
        CatalogId::LinearNode,
        CatalogId::PlanarSaddle,
        CatalogId::NorthSouthCircle,
        CatalogId::AttractingCircle,
        CatalogId::CatMap,
        CatalogId::Rotation,
        CatalogId::CustomLinear,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CatalogId::LinearNode => "linear_node",
            CatalogId::PlanarSaddle => "planar_saddle",
            CatalogId::NorthSouthCircle => "north_south_circle",
            CatalogId::AttractingCircle => "attracting_circle",
            CatalogId::CatMap => "cat_map",
            CatalogId::Rotation => "rotation",
            CatalogId::CustomLinear => "custom_linear",
        }
    }

    pub fn kind(self) -> SystemKind {
        match self {
            CatalogId::CatMap | CatalogId::Rotation => SystemKind::Map,
            _ => SystemKind::Flow,
        }
    }
}

impl fmt::Display for CatalogId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CatalogId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CatalogId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown system {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Flow,
    Map,
}

/// A catalog flow or invertible map together with its ambient space.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec<T> {
    id: CatalogId,
    params: Vec<T>,
    step: T,
    reversed: bool,
    space: AmbientSpace<T>,
}

impl<T: Scalar> SystemSpec<T> {
    /// Build a catalog system. `params` follow the catalog conventions; an empty
    /// list selects the defaults where the system has any.
    pub fn from_catalog(id: CatalogId, params: &[T], step: T) -> Result<Self> {
        match id {
            CatalogId::LinearNode => {
                let rates = if params.is_empty() { vec![-T::one(), T::lit(-2.0)] } else { params.to_vec() };
                Self::linear_node(rates, step)
            }
            CatalogId::PlanarSaddle => match params {
                [] => Self::planar_saddle(T::one(), -T::one(), step),
                [u, s] => Self::planar_saddle(*u, *s, step),
                _ => Err(Error::Argument("planar_saddle takes two rates".into())),
            },
            CatalogId::NorthSouthCircle => Self::no_params(params, Self::north_south_circle(step)),
            CatalogId::AttractingCircle => Self::no_params(params, Self::attracting_circle(step)),
            CatalogId::CatMap => Self::no_params(params, Ok(Self::cat_map())),
            CatalogId::Rotation => match params {
                [] => Self::rotation(T::one()),
                [a] => Self::rotation(*a),
                _ => Err(Error::Argument("rotation takes one angle".into())),
            },
            CatalogId::CustomLinear => Self::custom_linear(params.to_vec(), step),
        }
    }

    fn no_params(params: &[T], sys: Result<Self>) -> Result<Self> {
        if params.is_empty() {
            sys
        } else {
            Err(Error::Argument("system takes no parameters".into()))
        }
    }

    fn check_step(step: T) -> Result<()> {
        if step > T::zero() && step.is_finite() {
            Ok(())
        } else {
            Err(Error::Argument("integrator step must be positive".into()))
        }
    }

    pub fn linear_node(rates: Vec<T>, step: T) -> Result<Self> {
        Self::check_step(step)?;
        if rates.is_empty() || rates.iter().any(|&r| !(r < T::zero())) {
            return Err(Error::Argument("linear_node needs negative rates".into()));
        }
        let space = AmbientSpace::centered_box(rates.len(), T::one())?;
        Ok(SystemSpec { id: CatalogId::LinearNode, params: rates, step, reversed: false, space })
    }

    pub fn planar_saddle(rate_u: T, rate_s: T, step: T) -> Result<Self> {
        Self::check_step(step)?;
        if !(rate_u > T::zero() && rate_s < T::zero()) {
            return Err(Error::Argument("planar_saddle needs rate_u > 0 > rate_s".into()));
        }
        let space = AmbientSpace::centered_box(2, T::one())?;
        Ok(SystemSpec { id: CatalogId::PlanarSaddle, params: vec![rate_u, rate_s], step, reversed: false, space })
    }

    pub fn north_south_circle(step: T) -> Result<Self> {
        Self::check_step(step)?;
        let space = AmbientSpace::circle(T::lit(std::f64::consts::TAU))?;
        Ok(SystemSpec { id: CatalogId::NorthSouthCircle, params: vec![], step, reversed: false, space })
    }

    pub fn attracting_circle(step: T) -> Result<Self> {
        Self::check_step(step)?;
        let space = AmbientSpace::centered_box(2, T::lit(2.0))?;
        Ok(SystemSpec { id: CatalogId::AttractingCircle, params: vec![], step, reversed: false, space })
    }

    pub fn cat_map() -> Self {
        let space = AmbientSpace::flat_torus(vec![T::one(), T::one()]).expect("unit torus");
        SystemSpec { id: CatalogId::CatMap, params: vec![], step: T::one(), reversed: false, space }
    }

    pub fn rotation(angle: T) -> Result<Self> {
        if !angle.is_finite() {
            return Err(Error::Argument("rotation angle must be finite".into()));
        }
        let space = AmbientSpace::circle(T::lit(std::f64::consts::TAU))?;
        Ok(SystemSpec { id: CatalogId::Rotation, params: vec![angle], step: T::one(), reversed: false, space })
    }

    /// Flow of `x' = M x`; `matrix` is row-major and square.
    pub fn custom_linear(matrix: Vec<T>, step: T) -> Result<Self> {
        Self::check_step(step)?;
        let n = (matrix.len() as f64).sqrt().round() as usize;
        if n == 0 || n * n != matrix.len() || matrix.iter().any(|m| !m.is_finite()) {
            return Err(Error::Argument("custom_linear needs a finite square row-major matrix".into()));
        }
        let space = AmbientSpace::centered_box(n, T::one())?;
        Ok(SystemSpec { id: CatalogId::CustomLinear, params: matrix, step, reversed: false, space })
    }

    pub fn id(&self) -> CatalogId {
        self.id
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn kind(&self) -> SystemKind {
        self.id.kind()
    }

    pub fn is_map(&self) -> bool {
        self.kind() == SystemKind::Map
    }

    pub fn is_flow(&self) -> bool {
        self.kind() == SystemKind::Flow
    }

    /// Integrator step for flows, `1` for maps.
    pub fn step(&self) -> T {
        self.step
    }

    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    pub fn space(&self) -> &AmbientSpace<T> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn with_step(mut self, step: T) -> Result<Self> {
        Self::check_step(step)?;
        if self.is_flow() {
            self.step = step;
        }
        Ok(self)
    }

    /// Same dynamics measured in another metric on the same coordinates.
    pub fn with_space(mut self, space: AmbientSpace<T>) -> Result<Self> {
        if space.geometric() != self.space.geometric() {
            return Err(Error::Argument("replacement space must share the system's coordinates".into()));
        }
        self.space = space;
        Ok(self)
    }

    /// Time reversal: negated vector field, or the inverse map.
    pub fn reversed(mut self) -> Self {
        self.reversed = !self.reversed;
        self
    }

    pub fn closed_form_available(&self) -> bool {
        matches!(
            self.id,
            CatalogId::LinearNode
                | CatalogId::PlanarSaddle
                | CatalogId::NorthSouthCircle
                | CatalogId::AttractingCircle
                | CatalogId::CatMap
                | CatalogId::Rotation
        )
    }

    /// The catalog's distinguished singular or fixed point, if it has one.
    pub fn rest_point(&self) -> Option<Point<T>> {
        match self.id {
            CatalogId::LinearNode | CatalogId::PlanarSaddle | CatalogId::CustomLinear | CatalogId::CatMap => {
                Some(vec![T::zero(); self.dim()])
            }
            // the sink; the source is at 0
            CatalogId::NorthSouthCircle => Some(vec![T::lit(std::f64::consts::PI)]),
            CatalogId::AttractingCircle | CatalogId::Rotation => None,
        }
    }

    /// Matrix of the linear part at the rest point (row-major), when the catalog knows it.
    pub fn linear_part(&self) -> Option<Vec<T>> {
        let sign = if self.reversed { -T::one() } else { T::one() };
        match self.id {
            CatalogId::LinearNode | CatalogId::PlanarSaddle => {
                let n = self.params.len();
                let mut m = vec![T::zero(); n * n];
                for (i, &r) in self.params.iter().enumerate() {
                    m[i * n + i] = sign * r;
                }
                Some(m)
            }
            CatalogId::CustomLinear => Some(self.params.iter().map(|&m| sign * m).collect()),
            CatalogId::CatMap => {
                let (one, two) = (T::one(), T::lit(2.0));
                Some(if self.reversed { vec![one, -one, -one, two] } else { vec![two, one, one, one] })
            }
            _ => None,
        }
    }

    /// Vector field of a flow (time reversal applied).
    pub fn vector_field(&self, x: &[T]) -> Vec<T> {
        let mut v = match self.id {
            CatalogId::LinearNode | CatalogId::PlanarSaddle => {
                x.iter().zip(&self.params).map(|(&c, &r)| r * c).collect()
            }
            CatalogId::CustomLinear => {
                let n = x.len();
                (0..n).map(|i| (0..n).fold(T::zero(), |acc, j| acc + self.params[i * n + j] * x[j])).collect()
            }
            CatalogId::NorthSouthCircle => vec![x[0].sin()],
            CatalogId::AttractingCircle => {
                let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
                let g = T::one() - r;
                vec![g * x[0] - x[1], g * x[1] + x[0]]
            }
            CatalogId::CatMap | CatalogId::Rotation => panic!("vector field requested for a map system"),
        };
        if self.reversed {
            for c in &mut v {
                *c = -*c;
            }
        }
        v
    }

    /// One classical Runge-Kutta step of size `h` (negative `h` integrates backward),
    /// normalized into the fundamental domain.
    pub fn rk4_step(&self, x: &[T], h: T) -> Point<T> {
        let half = T::lit(0.5);
        let sixth = T::one() / T::lit(6.0);
        let axpy = |a: T, v: &[T]| -> Vec<T> { x.iter().zip(v).map(|(&xi, &vi)| xi + a * vi).collect() };
        let k1 = self.vector_field(x);
        let k2 = self.vector_field(&axpy(h * half, &k1));
        let k3 = self.vector_field(&axpy(h * half, &k2));
        let k4 = self.vector_field(&axpy(h, &k3));
        let mut out: Vec<T> = (0..x.len())
            .map(|i| x[i] + h * sixth * (k1[i] + T::lit(2.0) * (k2[i] + k3[i]) + k4[i]))
            .collect();
        self.space.normalize(&mut out);
        out
    }

    fn apply_map(&self, x: &[T], forward: bool) -> Result<Point<T>> {
        self.space.check(x)?;
        let forward = forward != self.reversed;
        let mut y = self.lift_raw(x, forward);
        self.space.normalize(&mut y);
        Ok(y)
    }

    fn lift_raw(&self, x: &[T], forward: bool) -> Point<T> {
        match self.id {
            CatalogId::CatMap => {
                let two = T::lit(2.0);
                if forward {
                    vec![two * x[0] + x[1], x[0] + x[1]]
                } else {
                    vec![x[0] - x[1], two * x[1] - x[0]]
                }
            }
            CatalogId::Rotation => {
                let a = self.params[0];
                vec![if forward { x[0] + a } else { x[0] - a }]
            }
            _ => panic!("map requested for a flow system"),
        }
    }

    /// Image under the map.
    pub fn forward(&self, x: &[T]) -> Result<Point<T>> {
        if !self.is_map() {
            return Err(Error::Argument("forward image needs a map system".into()));
        }
        self.apply_map(x, true)
    }

    /// Image under the inverse map.
    pub fn inverse(&self, x: &[T]) -> Result<Point<T>> {
        if !self.is_map() {
            return Err(Error::Argument("inverse image needs a map system".into()));
        }
        self.apply_map(x, false)
    }

    /// Image of a covering-space point under the linear lift of the map, without
    /// reduction to the fundamental domain. Both catalog maps lift to affine maps.
    pub fn lift(&self, x: &[T], forward: bool) -> Result<Point<T>> {
        if !self.is_map() {
            return Err(Error::Argument("lift needs a map system".into()));
        }
        Ok(self.lift_raw(x, forward != self.reversed))
    }

    /// Exact flow map `phi_t(x)` for catalog flows with a closed form.
    pub fn closed_form(&self, x: &[T], t: T) -> Option<Point<T>> {
        let t = if self.reversed { -t } else { t };
        let mut y = match self.id {
            CatalogId::LinearNode | CatalogId::PlanarSaddle => {
                x.iter().zip(&self.params).map(|(&c, &r)| c * (r * t).exp()).collect()
            }
            CatalogId::NorthSouthCircle => {
                let half = x[0] * T::lit(0.5);
                let a = (half.sin() * t.exp()).atan2(half.cos());
                vec![a * T::lit(2.0)]
            }
            CatalogId::AttractingCircle => {
                let r0 = (x[0] * x[0] + x[1] * x[1]).sqrt();
                if r0 == T::zero() {
                    return Some(vec![T::zero(), T::zero()]);
                }
                let e = t.exp();
                let r = r0 * e / (T::one() - r0 + r0 * e);
                let th = x[1].atan2(x[0]) + t;
                vec![r * th.cos(), r * th.sin()]
            }
            _ => return None,
        };
        self.space.normalize(&mut y);
        Some(y)
    }
}
