//! The value space `E = F^dim`, its L1 metric, the bounded metric
//! `d / (1 + d)`, and the truncated product space standing in for `E^ℕ`.

use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Point of `E`: a fixed-dimension coordinate vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Value<S>(Vec<S>);

/// Point of `E^m`, the first `m` coordinates of an element of `E^ℕ`.
/// Coordinates past `m` are implicitly equal for all values in one computation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TupleValue<S>(Vec<Value<S>>);

/// Common interface of [`Value`] and [`TupleValue`] needed by tree functions.
pub trait Vector<S: Scalar>: Clone + Debug + Eq + Hash + Send + Sync {
    fn zero_like(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn scale(&self, a: &S) -> Self;
    fn is_zero_vector(&self) -> bool;
    fn is_negligible(&self) -> bool;
    /// Scalars in a fixed order, used for serialization.
    fn flat(&self) -> Vec<S>;
}

impl<S: Scalar> Value<S> {
    pub fn new(coords: Vec<S>) -> Self {
        Value(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Value(vec![S::zero(); dim])
    }

    pub fn constant(dim: usize, c: S) -> Self {
        Value(vec![c; dim])
    }

    pub fn scalar(c: S) -> Self {
        Value(vec![c])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[S] {
        &self.0
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

impl<S: Scalar> Vector<S> for Value<S> {
    fn zero_like(&self) -> Self {
        Value::zeros(self.dim())
    }

    fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        Value(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        )
    }

    fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        Value(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        )
    }

    fn scale(&self, a: &S) -> Self {
        Value(self.0.iter().map(|x| a.clone() * x.clone()).collect())
    }

    fn is_zero_vector(&self) -> bool {
        self.0.iter().all(Scalar::is_zero)
    }

    fn is_negligible(&self) -> bool {
        self.0.iter().all(Scalar::is_negligible)
    }

    fn flat(&self) -> Vec<S> {
        self.0.clone()
    }
}

impl<S: Scalar> TupleValue<S> {
    pub fn new(components: Vec<Value<S>>) -> Result<Self> {
        if let Some(first) = components.first() {
            for c in &components {
                first.check_dim(c)?;
            }
        }
        Ok(TupleValue(components))
    }

    pub fn zeros(width: usize, dim: usize) -> Self {
        TupleValue(vec![Value::zeros(dim); width])
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn dim(&self) -> usize {
        self.0.first().map_or(0, Value::dim)
    }

    pub fn components(&self) -> &[Value<S>] {
        &self.0
    }

    pub fn component(&self, k: usize) -> &Value<S> {
        &self.0[k]
    }

    pub fn into_components(self) -> Vec<Value<S>> {
        self.0
    }
}

impl<S: Scalar> Vector<S> for TupleValue<S> {
    fn zero_like(&self) -> Self {
        TupleValue::zeros(self.width(), self.dim())
    }

    fn add(&self, other: &Self) -> Self {
        assert_eq!(self.width(), other.width(), "width mismatch");
        TupleValue(self.0.iter().zip(&other.0).map(|(a, b)| a.add(b)).collect())
    }

    fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.width(), other.width(), "width mismatch");
        TupleValue(self.0.iter().zip(&other.0).map(|(a, b)| a.sub(b)).collect())
    }

    fn scale(&self, a: &S) -> Self {
        TupleValue(self.0.iter().map(|v| v.scale(a)).collect())
    }

    fn is_zero_vector(&self) -> bool {
        self.0.iter().all(Vector::is_zero_vector)
    }

    fn is_negligible(&self) -> bool {
        self.0.iter().all(Vector::is_negligible)
    }

    fn flat(&self) -> Vec<S> {
        self.0.iter().flat_map(|v| v.0.iter().cloned()).collect()
    }
}

/// L1 distance `Σ |u_i − v_i|`.
pub fn base_metric<S: Scalar>(u: &Value<S>, v: &Value<S>) -> Result<S> {
    u.check_dim(v)?;
    Ok(u.0
        .iter()
        .zip(&v.0)
        .fold(S::zero(), |acc, (a, b)| acc + (a.clone() - b.clone()).abs()))
}

/// `t / (1 + t)`.
pub fn bounded<S: Scalar>(t: S) -> S {
    t.clone() / (S::one() + t)
}

pub fn bounded_metric<S: Scalar>(u: &Value<S>, v: &Value<S>) -> Result<S> {
    base_metric(u, v).map(bounded)
}

/// Product metric `Σ_{n=1}^m 2^{-n} d(u_n, v_n) / (1 + d(u_n, v_n))`.
pub fn tuple_metric<S: Scalar>(u: &TupleValue<S>, v: &TupleValue<S>) -> Result<S> {
    if u.width() != v.width() {
        return Err(Error::WidthMismatch {
            expected: u.width(),
            found: v.width(),
        });
    }
    let mut total = S::zero();
    for (n, (a, b)) in u.0.iter().zip(&v.0).enumerate() {
        total = total + S::half_pow(n + 1) * bounded_metric(a, b)?;
    }
    Ok(total)
}

/// Parameters of the dyadic grid `{k / 2^resolution : |k| ≤ bound · 2^resolution}^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridParams {
    pub dim: usize,
    pub resolution: u32,
    pub bound: u32,
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams {
            dim: 1,
            resolution: 0,
            bound: 1,
        }
    }
}

fn grid_numerators(params: &GridParams) -> Result<(i64, Vec<i64>)> {
    if params.bound == 0 {
        return Err(Error::InvalidArgument("grid bound must be at least 1".into()));
    }
    if params.resolution > 30 {
        return Err(Error::InvalidArgument("grid resolution above 30".into()));
    }
    let scale = 1i64 << params.resolution;
    let max = params.bound as i64 * scale;
    Ok((scale, (-max..=max).collect()))
}

/// All grid vectors in lexicographic order.
pub fn dense_grid<S: Scalar>(params: GridParams) -> Result<Vec<Value<S>>> {
    let (scale, nums) = grid_numerators(&params)?;
    let mut out: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..params.dim {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                nums.iter().map(move |&k| {
                    let mut p = prefix.clone();
                    p.push(k);
                    p
                })
            })
            .collect();
    }
    Ok(out
        .into_iter()
        .map(|ks| Value(ks.into_iter().map(|k| S::from_ratio(k, scale)).collect()))
        .collect())
}

/// The grid reordered so that zero comes first, then by increasing
/// L1 norm, ties broken lexicographically. Used by enumerations that
/// must start from the zero function.
pub fn grid_by_norm<S: Scalar>(params: GridParams) -> Result<Vec<Value<S>>> {
    let mut grid = dense_grid::<S>(params)?;
    grid.sort_by(|a, b| {
        let na = base_metric(a, &a.zero_like()).expect("same dim");
        let nb = base_metric(b, &b.zero_like()).expect("same dim");
        na.cmp(&nb).then_with(|| a.cmp(b))
    });
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn v(xs: &[(i64, i64)]) -> Value<Rational> {
        Value::new(xs.iter().map(|&(n, d)| r(n, d)).collect())
    }

    #[test]
    fn base_metric_examples() {
        let u = v(&[(1, 1), (0, 1)]);
        let w = v(&[(0, 1), (1, 1)]);
        assert_eq!(base_metric(&u, &u).unwrap(), r(0, 1));
        // |1-0| + |0-1|
        assert_eq!(base_metric(&u, &w).unwrap(), r(2, 1));
        assert!(matches!(
            base_metric(&u, &v(&[(1, 1)])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn bounded_metric_examples() {
        assert_eq!(bounded(r(0, 1)), r(0, 1));
        assert_eq!(bounded(r(1, 1)), r(1, 2));
        // 3 / (1 + 3)
        assert_eq!(bounded(r(3, 1)), r(3, 4));
    }

    #[test]
    fn tuple_metric_examples() {
        let zero = v(&[(0, 1)]);
        let one = v(&[(1, 1)]);
        let a = TupleValue::new(vec![zero.clone(), zero.clone()]).unwrap();
        let b = TupleValue::new(vec![one.clone(), zero.clone()]).unwrap();
        let c = TupleValue::new(vec![one.clone(), one.clone()]).unwrap();
        assert_eq!(tuple_metric(&a, &a).unwrap(), r(0, 1));
        assert_eq!(tuple_metric(&a, &b).unwrap(), r(1, 4));
        assert_eq!(tuple_metric(&a, &c).unwrap(), r(3, 8));
        let short = TupleValue::new(vec![zero]).unwrap();
        assert!(matches!(
            tuple_metric(&a, &short),
            Err(Error::WidthMismatch { .. })
        ));
    }

    #[test]
    fn dense_grid_examples() {
        let g = dense_grid::<Rational>(GridParams { dim: 1, resolution: 0, bound: 1 }).unwrap();
        assert_eq!(g, vec![v(&[(-1, 1)]), v(&[(0, 1)]), v(&[(1, 1)])]);
        let g = dense_grid::<Rational>(GridParams { dim: 1, resolution: 1, bound: 1 }).unwrap();
        assert_eq!(
            g,
            vec![v(&[(-1, 1)]), v(&[(-1, 2)]), v(&[(0, 1)]), v(&[(1, 2)]), v(&[(1, 1)])]
        );
        let g = dense_grid::<Rational>(GridParams { dim: 2, resolution: 0, bound: 1 }).unwrap();
        assert_eq!(g.len(), 3usize.pow(2));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(dense_grid::<Rational>(GridParams { dim: 1, resolution: 0, bound: 0 }).is_err());
    }

    #[test]
    fn grid_by_norm_starts_at_zero() {
        let g = grid_by_norm::<Rational>(GridParams { dim: 2, resolution: 1, bound: 1 }).unwrap();
        assert!(g[0].is_zero_vector());
        assert_eq!(g.len(), 25);
    }
}
