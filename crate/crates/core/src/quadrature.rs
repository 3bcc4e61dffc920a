//! Tensor Gauss–Hermite rule for the Gaussian measure `(1/pi) e^{-|z|^2} dV(z)`.
//!
//! This is the independent route to Fock-space inner products: it never looks
//! at basis coefficients, only at point values.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default per-axis order.
pub const DEFAULT_ORDER: usize = 40;

/// Nodes `x_i + i y_j` and weights `w_i w_j / pi`.
///
/// Exact for polynomials in `x, y` of degree at most `2*order - 1` in each variable.
#[derive(Debug, Clone)]
pub struct QuadratureGrid<T> {
    order: usize,
    nodes: Vec<Complex<T>>,
    weights: Vec<T>,
}

/// One-dimensional Gauss–Hermite rule for weight `e^{-x^2}` (nodes ascending).
pub fn gauss_hermite<T: Real>(order: usize) -> (Vec<T>, Vec<T>) {
    assert!(order > 0, "quadrature order must be positive");
    let n = order;
    let nf = T::from_usize(n).unwrap();
    let one = T::one();
    let two = one + one;
    let pim4 = T::PI().powf(-T::lit(0.25));
    let mut x = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let m = n.div_ceil(2);
    let mut z = T::zero();
    for i in 0..m {
        z = match i {
            0 => (two * nf + one).sqrt() - T::lit(1.85575) * (two * nf + one).powf(-T::lit(1.0 / 6.0)),
            1 => z - T::lit(1.14) * nf.powf(T::lit(0.426)) / z,
            2 => T::lit(1.86) * z - T::lit(0.86) * x[0],
            3 => T::lit(1.91) * z - T::lit(0.91) * x[1],
            _ => two * z - x[i - 2],
        };
        let mut pp = one;
        for _ in 0..100 {
            // orthonormal Hermite recurrence
            let mut p1 = pim4;
            let mut p2 = T::zero();
            for j in 1..=n {
                let jf = T::from_usize(j).unwrap();
                let p3 = p2;
                p2 = p1;
                p1 = z * (two / jf).sqrt() * p2 - ((jf - one) / jf).sqrt() * p3;
            }
            pp = (two * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= T::epsilon() * (one + z.abs()) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = two / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = T::zero();
    }
    x.reverse();
    w.reverse();
    (x, w)
}

impl<T: Real> QuadratureGrid<T> {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::Precondition("quadrature order must be positive".into()));
        }
        let (x, w) = gauss_hermite::<T>(order);
        let inv_pi = T::one() / T::PI();
        let mut nodes = Vec::with_capacity(order * order);
        let mut weights = Vec::with_capacity(order * order);
        for (xi, wi) in x.iter().zip(&w) {
            for (yj, wj) in x.iter().zip(&w) {
                nodes.push(Complex::new(*xi, *yj));
                weights.push(*wi * *wj * inv_pi);
            }
        }
        Ok(Self { order, nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> &[Complex<T>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// `(1/pi) ∫ h(z) e^{-|z|^2} dV(z)` for a pointwise-evaluable `h`.
    pub fn integrate<F>(&self, h: F) -> Result<Complex<T>>
    where
        F: Fn(Complex<T>) -> Complex<T>,
    {
        let mut acc = Complex::new(T::zero(), T::zero());
        for (z, w) in self.nodes.iter().zip(&self.weights) {
            let v = h(*z);
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NumericFailure(format!("non-finite integrand at node {z}")));
            }
            acc = acc + v * *w;
        }
        Ok(acc)
    }
}

/// Quadrature approximation of `<p, q> = (1/pi) ∫ p(z) conj(q(z)) e^{-|z|^2} dV(z)`.
///
/// Exact (up to rounding) for polynomial `p`, `q` of degree below `order`;
/// for entire functions the integrand must decay within the grid's reach,
/// roughly `|z| < sqrt(2 * order)`.
pub fn quadrature_inner<T, P, Q>(p: P, q: Q, grid: &QuadratureGrid<T>) -> Result<Complex<T>>
where
    T: Real,
    P: Fn(Complex<T>) -> Complex<T>,
    Q: Fn(Complex<T>) -> Complex<T>,
{
    grid.integrate(|z| p(z) * q(z).conj())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_rule_small_orders() {
        let (x, w) = gauss_hermite::<f64>(2);
        let r = 0.5f64.sqrt();
        assert!((x[0] + r).abs() < 1e-15 && (x[1] - r).abs() < 1e-15);
        let sp = std::f64::consts::PI.sqrt();
        assert!((w[0] - sp / 2.0).abs() < 1e-15);

        let (x3, _) = gauss_hermite::<f64>(3);
        assert!(x3[1].abs() < 1e-15);
        assert!((x3[2] - 1.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn weights_sum_to_sqrt_pi() {
        for n in [1usize, 5, 20, 40, 80] {
            let (_, w) = gauss_hermite::<f64>(n);
            let s: f64 = w.iter().sum();
            assert!((s - std::f64::consts::PI.sqrt()).abs() < 1e-13, "order {n}: {s}");
        }
    }

    #[test]
    fn normalized_measure() {
        let g = QuadratureGrid::<f64>::new(DEFAULT_ORDER).unwrap();
        let one = |_z: Complex<f64>| Complex::new(1.0, 0.0);
        let v = quadrature_inner(one, one, &g).unwrap();
        assert!((v.re - 1.0).abs() < 1e-13 && v.im.abs() < 1e-15);
    }

    #[test]
    fn monomial_moments() {
        let g = QuadratureGrid::<f64>::new(3).unwrap();
        let z2 = |z: Complex<f64>| z * z;
        let v = quadrature_inner(z2, z2, &g).unwrap();
        assert!((v.re - 2.0).abs() < 1e-13 && v.im.abs() < 1e-13);
        let z1 = |z: Complex<f64>| z;
        let o = quadrature_inner(z1, z2, &g).unwrap();
        assert!(o.norm() < 1e-14);
    }

    #[test]
    fn factorial_moments_high_degree() {
        // <z^n, z^n> = n!
        let g = QuadratureGrid::<f64>::new(DEFAULT_ORDER).unwrap();
        let mut fact = 1.0;
        for n in 0..=12 {
            if n > 0 {
                fact *= n as f64;
            }
            let zn = move |z: Complex<f64>| z.powu(n);
            let v = quadrature_inner(zn, zn, &g).unwrap();
            assert!((v.re - fact).abs() < 1e-9 * fact, "n={n}: {v}");
        }
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let g = QuadratureGrid::<f64>::new(4).unwrap();
        let bad = |_z: Complex<f64>| Complex::new(f64::NAN, 0.0);
        let one = |_z: Complex<f64>| Complex::new(1.0, 0.0);
        assert!(matches!(quadrature_inner(bad, one, &g), Err(Error::NumericFailure(_))));
    }

    #[test]
    fn zero_order_rejected() {
        assert!(QuadratureGrid::<f64>::new(0).is_err());
    }
}
