//! Band-limited scalar fields on the unit sphere.
//!
//! A field is stored by its values on a tensor grid: Gauss–Legendre nodes in
//! `mu = cos(theta)` times uniformly spaced longitudes. With `n_theta >= L + 1`
//! and `n_phi >= 2L + 1` the forward and inverse real spherical-harmonic
//! transforms are exact for fields of degree at most `L`, and the spectral
//! Laplace–Beltrami operator is a diagonal scaling by `-l(l+1)`.
//!
//! The real harmonic basis is orthonormal on the unit sphere:
//!
//! ```text
//! Y_l0     = N_l0(mu) / sqrt(2 pi)
//! Y_lm     = N_lm(mu) cos(m phi) / sqrt(pi)      m > 0
//! Y_l(-m)  = N_lm(mu) sin(m phi) / sqrt(pi)      m > 0
//! ```
//!
//! where `N_lm` are the associated Legendre functions normalized so that
//! `int_{-1}^{1} N_lm^2 dmu = 1`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

/// Discretization parameters of a sphere grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub band_limit: usize,
    pub n_theta: usize,
    pub n_phi: usize,
}

impl GridSpec {
    /// Default grid for band limit `L`, dealiased for a cubic nonlinearity:
    /// `n_theta = ceil((3L + 3) / 2)`, `n_phi = 3L + 3`.
    pub fn new(band_limit: usize) -> Result<Self> {
        if band_limit < 2 {
            return Err(Error::InvalidBandLimit(band_limit));
        }
        let n_theta = (3 * band_limit + 3).div_ceil(2);
        let n_phi = 3 * band_limit + 3;
        Self::with_nodes(band_limit, n_theta, n_phi)
    }

    pub fn with_nodes(band_limit: usize, n_theta: usize, n_phi: usize) -> Result<Self> {
        if band_limit < 2 {
            return Err(Error::InvalidBandLimit(band_limit));
        }
        if n_theta < band_limit + 1 {
            return Err(Error::InvalidGrid(format!(
                "n_theta = {n_theta} < L + 1 = {}",
                band_limit + 1
            )));
        }
        if n_phi < 2 * band_limit + 1 {
            return Err(Error::InvalidGrid(format!(
                "n_phi = {n_phi} < 2L + 1 = {}",
                2 * band_limit + 1
            )));
        }
        Ok(Self {
            band_limit,
            n_theta,
            n_phi,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n_theta * self.n_phi
    }

    /// `L(L + 1)`, the largest Laplacian eigenvalue magnitude on the grid.
    pub fn max_eigenvalue(&self) -> f64 {
        (self.band_limit * (self.band_limit + 1)) as f64
    }
}

/// Shorthand for [`GridSpec::new`].
pub fn make_grid(band_limit: usize) -> Result<GridSpec> {
    GridSpec::new(band_limit)
}

#[inline]
fn legendre_index(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// All `N_lm(mu)` for `0 <= m <= l <= lmax`, indexed by `l(l+1)/2 + m`.
fn legendre_table(lmax: usize, mu: f64) -> Vec<f64> {
    let mut out = vec![0.0; (lmax + 1) * (lmax + 2) / 2];
    let sin_theta = (1.0 - mu * mu).max(0.0).sqrt();
    let mut diag = (0.5f64).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            let mf = m as f64;
            diag *= ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * sin_theta;
        }
        out[legendre_index(m, m)] = diag;
        if m == lmax {
            break;
        }
        let mf = m as f64;
        let mut prev = diag;
        let mut cur = (2.0 * mf + 3.0).sqrt() * mu * diag;
        out[legendre_index(m + 1, m)] = cur;
        for l in (m + 2)..=lmax {
            let alpha = |k: usize| {
                let k = k as f64;
                ((k * k - mf * mf) / (4.0 * k * k - 1.0)).sqrt()
            };
            let next = (mu * cur - alpha(l - 1) * prev) / alpha(l);
            out[legendre_index(l, m)] = next;
            prev = cur;
            cur = next;
        }
    }
    out
}

/// Normalized associated Legendre function `N_lm(mu)`, `int N^2 dmu = 1`.
pub fn normalized_legendre(l: usize, m: usize, mu: f64) -> f64 {
    assert!(m <= l, "order {m} exceeds degree {l}");
    legendre_table(l, mu)[legendre_index(l, m)]
}

/// Real orthonormal spherical harmonic `Y_lm(theta, phi)`; negative `m`
/// selects the `sin(|m| phi)` partner.
pub fn real_harmonic(l: usize, m: i64, theta: f64, phi: f64) -> f64 {
    let am = m.unsigned_abs() as usize;
    let p = normalized_legendre(l, am, theta.cos());
    match m {
        0 => p / (2.0 * PI).sqrt(),
        m if m > 0 => p * (am as f64 * phi).cos() / PI.sqrt(),
        _ => p * (am as f64 * phi).sin() / PI.sqrt(),
    }
}

/// Real spherical-harmonic coefficients up to a band limit.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoefficients {
    band_limit: usize,
    data: Vec<f64>,
}

impl SpectralCoefficients {
    pub fn zeros(band_limit: usize) -> Self {
        Self {
            band_limit,
            data: vec![0.0; (band_limit + 1) * (band_limit + 1)],
        }
    }

    #[inline]
    fn index(l: usize, m: i64) -> usize {
        debug_assert!(m.unsigned_abs() as usize <= l);
        ((l * l + l) as i64 + m) as usize
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn get(&self, l: usize, m: i64) -> f64 {
        self.data[Self::index(l, m)]
    }

    pub fn set(&mut self, l: usize, m: i64, value: f64) {
        let i = Self::index(l, m);
        self.data[i] = value;
    }

    /// Applies `f(l)` to every coefficient of degree `l`.
    pub fn scale_by_degree<F: Fn(usize) -> f64>(&mut self, f: F) {
        for l in 0..=self.band_limit {
            let s = f(l);
            for c in &mut self.data[l * l..(l + 1) * (l + 1)] {
                *c *= s;
            }
        }
    }

    /// Sum of squared coefficients (the `L^2(S^2)` energy).
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|c| c * c).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, i64, f64)> + '_ {
        (0..=self.band_limit).flat_map(move |l| {
            let li = l as i64;
            (-li..=li).map(move |m| (l, m, self.get(l, m)))
        })
    }
}

/// A sphere grid with its quadrature and transform tables.
pub struct SphereGrid {
    spec: GridSpec,
    mu: Vec<f64>,
    theta: Vec<f64>,
    weights: Vec<f64>,
    phi: Vec<f64>,
    // (m * n_phi + j)
    cos_table: Vec<f64>,
    sin_table: Vec<f64>,
    // (i * n_lm + legendre_index(l, m))
    legendre: Vec<f64>,
    n_lm: usize,
}

impl fmt::Debug for SphereGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SphereGrid")
            .field("spec", &self.spec)
            .finish()
    }
}

impl SphereGrid {
    pub fn new(spec: GridSpec) -> Arc<Self> {
        let l_max = spec.band_limit;
        let (mu, weights) = gauss_legendre(spec.n_theta);
        let theta = mu.iter().map(|m| m.acos()).collect();
        let dphi = 2.0 * PI / spec.n_phi as f64;
        let phi: Vec<f64> = (0..spec.n_phi).map(|j| j as f64 * dphi).collect();
        let mut cos_table = Vec::with_capacity((l_max + 1) * spec.n_phi);
        let mut sin_table = Vec::with_capacity((l_max + 1) * spec.n_phi);
        for m in 0..=l_max {
            for &p in &phi {
                cos_table.push((m as f64 * p).cos());
                sin_table.push((m as f64 * p).sin());
            }
        }
        let n_lm = (l_max + 1) * (l_max + 2) / 2;
        let legendre = mu.iter().flat_map(|&x| legendre_table(l_max, x)).collect();
        Arc::new(Self {
            spec,
            mu,
            theta,
            weights,
            phi,
            cos_table,
            sin_table,
            legendre,
            n_lm,
        })
    }

    /// Builds the default grid for band limit `L`.
    pub fn with_band_limit(band_limit: usize) -> Result<Arc<Self>> {
        Ok(Self::new(GridSpec::new(band_limit)?))
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn band_limit(&self) -> usize {
        self.spec.band_limit
    }

    /// Gauss–Legendre nodes `mu = cos(theta)`, ascending.
    pub fn mu_nodes(&self) -> &[f64] {
        &self.mu
    }

    pub fn colatitudes(&self) -> &[f64] {
        &self.theta
    }

    pub fn longitudes(&self) -> &[f64] {
        &self.phi
    }

    pub fn mu_weights(&self) -> &[f64] {
        &self.weights
    }

    /// Iterator over `(theta, phi)` of every node in storage order.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.theta
            .iter()
            .flat_map(move |&t| self.phi.iter().map(move |&p| (t, p)))
    }

    fn dphi(&self) -> f64 {
        2.0 * PI / self.spec.n_phi as f64
    }

    /// Quadrature of nodal values against the unit-sphere measure.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        let n_phi = self.spec.n_phi;
        let total: f64 = self
            .weights
            .iter()
            .enumerate()
            .map(|(i, w)| w * values[i * n_phi..(i + 1) * n_phi].iter().sum::<f64>())
            .sum();
        total * self.dphi()
    }

    /// Forward transform: nodal values to coefficients of degree `<= L`.
    pub fn analyze(&self, values: &[f64]) -> SpectralCoefficients {
        let l_max = self.spec.band_limit;
        let n_phi = self.spec.n_phi;
        let dphi = self.dphi();
        let norm0 = dphi / (2.0 * PI).sqrt();
        let norm = dphi / PI.sqrt();
        let mut coeffs = SpectralCoefficients::zeros(l_max);
        let mut cos_sums = vec![0.0; l_max + 1];
        let mut sin_sums = vec![0.0; l_max + 1];
        for (i, w) in self.weights.iter().enumerate() {
            let row = &values[i * n_phi..(i + 1) * n_phi];
            for m in 0..=l_max {
                let ct = &self.cos_table[m * n_phi..(m + 1) * n_phi];
                let st = &self.sin_table[m * n_phi..(m + 1) * n_phi];
                let (mut c, mut s) = (0.0, 0.0);
                for j in 0..n_phi {
                    c += row[j] * ct[j];
                    s += row[j] * st[j];
                }
                cos_sums[m] = c;
                sin_sums[m] = s;
            }
            let leg = &self.legendre[i * self.n_lm..(i + 1) * self.n_lm];
            for l in 0..=l_max {
                let p0 = leg[legendre_index(l, 0)];
                let k = SpectralCoefficients::index(l, 0);
                coeffs.data[k] += w * p0 * cos_sums[0] * norm0;
                for m in 1..=l {
                    let p = w * leg[legendre_index(l, m)] * norm;
                    let mi = m as i64;
                    coeffs.data[SpectralCoefficients::index(l, mi)] += p * cos_sums[m];
                    coeffs.data[SpectralCoefficients::index(l, -mi)] += p * sin_sums[m];
                }
            }
        }
        coeffs
    }

    /// Inverse transform: coefficients (truncated to `L`) to nodal values.
    pub fn synthesize(&self, coeffs: &SpectralCoefficients) -> Vec<f64> {
        let l_max = self.spec.band_limit.min(coeffs.band_limit);
        let n_phi = self.spec.n_phi;
        let norm0 = 1.0 / (2.0 * PI).sqrt();
        let norm = 1.0 / PI.sqrt();
        let mut out = vec![0.0; self.spec.node_count()];
        let mut a = vec![0.0; l_max + 1];
        let mut b = vec![0.0; l_max + 1];
        for i in 0..self.spec.n_theta {
            let leg = &self.legendre[i * self.n_lm..(i + 1) * self.n_lm];
            for m in 0..=l_max {
                let mi = m as i64;
                let (mut am, mut bm) = (0.0, 0.0);
                for l in m..=l_max {
                    let p = leg[legendre_index(l, m)];
                    am += coeffs.get(l, mi) * p;
                    if m > 0 {
                        bm += coeffs.get(l, -mi) * p;
                    }
                }
                a[m] = am;
                b[m] = bm;
            }
            let row = &mut out[i * n_phi..(i + 1) * n_phi];
            for (j, v) in row.iter_mut().enumerate() {
                let mut acc = a[0] * norm0;
                for m in 1..=l_max {
                    acc += norm
                        * (a[m] * self.cos_table[m * n_phi + j]
                            + b[m] * self.sin_table[m * n_phi + j]);
                }
                *v = acc;
            }
        }
        out
    }
}

/// A real function on the unit sphere, stored by its nodal values.
#[derive(Clone)]
pub struct ScalarField {
    grid: Arc<SphereGrid>,
    values: Vec<f64>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("grid", &self.grid.spec)
            .field("min", &self.min())
            .field("max", &self.max())
            .finish()
    }
}

impl ScalarField {
    pub fn new(grid: Arc<SphereGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.spec.node_count() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.spec.node_count(),
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::DegenerateField(format!("non-finite value {bad}")));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(theta, phi)` at the nodes (no projection).
    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: &Arc<SphereGrid>, f: F) -> Self {
        let values = grid.nodes().map(|(t, p)| f(t, p)).collect();
        Self {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn constant(grid: &Arc<SphereGrid>, c: f64) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: vec![c; grid.spec.node_count()],
        }
    }

    /// Samples the real harmonic `Y_lm`; `l` may exceed the band limit.
    pub fn harmonic(grid: &Arc<SphereGrid>, l: usize, m: i64) -> Self {
        Self::from_fn(grid, |t, p| real_harmonic(l, m, t, p))
    }

    pub fn from_coefficients(grid: &Arc<SphereGrid>, coeffs: &SpectralCoefficients) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: grid.synthesize(coeffs),
        }
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn spec(&self) -> GridSpec {
        self.grid.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `oint_{S^2} f d omega`.
    pub fn integrate(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    /// Sphere mean `integrate(f) / 4 pi`.
    pub fn mean(&self) -> f64 {
        self.integrate() / (4.0 * PI)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Sup norm over the nodes.
    pub fn norm_inf(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn is_positive(&self) -> bool {
        self.min() > 0.0
    }

    pub fn coefficients(&self) -> SpectralCoefficients {
        self.grid.analyze(&self.values)
    }

    /// Projection onto degrees `<= L`.
    pub fn project(&self) -> Self {
        Self::from_coefficients(&self.grid, &self.coefficients())
    }

    /// Projection together with the discarded energy fraction
    /// `oint (f - Pf)^2 / oint f^2`.
    pub fn project_with_residual(&self) -> (Self, f64) {
        let projected = self.project();
        let diff2: Vec<f64> = self
            .values
            .iter()
            .zip(&projected.values)
            .map(|(a, b)| (a - b) * (a - b))
            .collect();
        let total: Vec<f64> = self.values.iter().map(|a| a * a).collect();
        let denom = self.grid.integrate(&total);
        let residual = if denom > 0.0 {
            self.grid.integrate(&diff2) / denom
        } else {
            0.0
        };
        (projected, residual)
    }

    /// Spectral Laplace–Beltrami operator of the round unit sphere.
    pub fn laplacian(&self) -> Self {
        let mut coeffs = self.coefficients();
        coeffs.scale_by_degree(|l| -((l * (l + 1)) as f64));
        Self::from_coefficients(&self.grid, &coeffs)
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map<F: Fn(f64, f64) -> f64>(&self, other: &Self, f: F) -> Self {
        self.assert_same_grid(other);
        Self {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn add_scalar(&self, c: f64) -> Self {
        self.map(|v| v + c)
    }

    pub fn powi(&self, n: i32) -> Self {
        self.map(|v| v.powi(n))
    }

    pub fn reciprocal(&self) -> Result<Self> {
        if let Some(i) = self.values.iter().position(|&v| v == 0.0 || !v.is_finite()) {
            return Err(Error::DegenerateField(format!(
                "reciprocal of a field with value {} at node {i}",
                self.values[i]
            )));
        }
        Ok(self.map(|v| 1.0 / v))
    }

    fn assert_same_grid(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.grid, &other.grid) || self.grid.spec == other.grid.spec,
            "fields live on different grids: {:?} vs {:?}",
            self.grid.spec,
            other.grid.spec
        );
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a * b)
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: f64) -> ScalarField {
        self.scale(rhs)
    }
}

/// A random field with coefficients uniform in `[-1, 1]` on degrees
/// `min_degree..=max_degree` (clamped to the grid's band limit).
pub fn random_band_limited<R: Rng + ?Sized>(
    grid: &Arc<SphereGrid>,
    min_degree: usize,
    max_degree: usize,
    rng: &mut R,
) -> ScalarField {
    let l_max = grid.band_limit();
    let mut coeffs = SpectralCoefficients::zeros(l_max);
    for l in min_degree..=max_degree.min(l_max) {
        let li = l as i64;
        for m in -li..=li {
            coeffs.set(l, m, rng.random_range(-1.0..=1.0));
        }
    }
    ScalarField::from_coefficients(grid, &coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid(l: usize) -> Arc<SphereGrid> {
        SphereGrid::with_band_limit(l).unwrap()
    }

    #[test]
    fn default_grid_sizes() {
        let g = make_grid(2).unwrap();
        assert_eq!((g.n_theta, g.n_phi), (5, 9));
        let g = make_grid(15).unwrap();
        assert_eq!((g.n_theta, g.n_phi), (24, 48));
        assert!(matches!(make_grid(1), Err(Error::InvalidBandLimit(1))));
    }

    #[test]
    fn undersized_grids_are_rejected() {
        assert!(GridSpec::with_nodes(8, 8, 40).is_err());
        assert!(GridSpec::with_nodes(8, 9, 16).is_err());
        assert!(GridSpec::with_nodes(8, 9, 17).is_ok());
    }

    #[test]
    fn integrate_examples() {
        let g = grid(6);
        assert!((ScalarField::constant(&g, 1.0).integrate() - 4.0 * PI).abs() < 1e-13);
        assert!(ScalarField::from_fn(&g, |t, _| t.cos()).integrate().abs() < 1e-14);
        // 2 pi int_{-1}^{1} (1 + x)^2 dx = 2 pi * 8/3
        let f = ScalarField::from_fn(&g, |t, _| (1.0 + t.cos()).powi(2));
        assert!((f.integrate() - 16.0 * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn legendre_functions_are_orthonormal() {
        let (x, w) = gauss_legendre(40);
        for m in 0..6 {
            for l in m..12 {
                for k in m..12 {
                    let ip: f64 = x
                        .iter()
                        .zip(&w)
                        .map(|(&mu, &wt)| {
                            wt * normalized_legendre(l, m, mu) * normalized_legendre(k, m, mu)
                        })
                        .sum();
                    let want = if l == k { 1.0 } else { 0.0 };
                    assert!((ip - want).abs() < 1e-12, "l={l} k={k} m={m}: {ip}");
                }
            }
        }
    }

    #[test]
    fn low_degree_harmonics_match_closed_forms() {
        let cases = [(0.3, 1.1), (2.0, -0.4), (1.2, 4.0)];
        for (t, p) in cases {
            let y10 = (3.0 / (4.0 * PI)).sqrt() * f64::cos(t);
            assert!((real_harmonic(1, 0, t, p) - y10).abs() < 1e-14);
            let y11 = (3.0 / (4.0 * PI)).sqrt() * t.sin() * p.cos();
            assert!((real_harmonic(1, 1, t, p) - y11).abs() < 1e-14);
            let y22s = (15.0 / (16.0 * PI)).sqrt() * t.sin().powi(2) * (2.0 * p).sin();
            assert!((real_harmonic(2, -2, t, p) - y22s).abs() < 1e-14);
        }
    }

    #[test]
    fn laplacian_examples() {
        let g = grid(8);
        let c = ScalarField::constant(&g, 3.5).laplacian();
        assert!(c.norm_inf() < 1e-12);
        let f = ScalarField::from_fn(&g, |t, _| t.cos());
        let lf = f.laplacian();
        assert!((&lf + &f.scale(2.0)).norm_inf() < 1e-12);
        let f = ScalarField::from_fn(&g, |t, p| t.sin().powi(2) * (2.0 * p).cos());
        let lf = f.laplacian();
        assert!((&lf + &f.scale(6.0)).norm_inf() < 1e-12);
    }

    #[test]
    fn pointwise_examples() {
        let g = grid(4);
        let r = ScalarField::constant(&g, 2.0).reciprocal().unwrap();
        assert!(r.values().iter().all(|&v| v == 0.5));
        let f = ScalarField::from_fn(&g, |t, _| t.cos());
        let sq = &f * &f;
        for ((t, _), v) in g.nodes().zip(sq.values()) {
            assert!((v - t.cos().powi(2)).abs() < 1e-15);
        }
        let mut vals = vec![1.0; g.spec().node_count()];
        vals[7] = 0.0;
        let z = ScalarField::new(Arc::clone(&g), vals).unwrap();
        assert!(matches!(z.reciprocal(), Err(Error::DegenerateField(_))));
    }

    #[test]
    fn non_finite_values_rejected() {
        let g = grid(3);
        let mut vals = vec![1.0; g.spec().node_count()];
        vals[0] = f64::NAN;
        assert!(ScalarField::new(Arc::clone(&g), vals).is_err());
        assert!(ScalarField::new(Arc::clone(&g), vec![1.0; 3]).is_err());
    }

    #[test]
    fn projection_reports_discarded_energy() {
        let g = grid(4);
        let (p, res) = ScalarField::harmonic(&g, 3, 1).project_with_residual();
        assert!(res < 1e-26);
        assert!((&p - &ScalarField::harmonic(&g, 3, 1)).norm_inf() < 1e-13);
        // Degree 6 is invisible to an L = 4 projection (orthogonal on this grid).
        let (p, res) = ScalarField::harmonic(&g, 6, 2).project_with_residual();
        assert!(p.norm_inf() < 1e-12);
        assert!((res - 1.0).abs() < 1e-10);
    }

    #[test]
    fn random_field_is_band_limited() {
        let g = grid(10);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_band_limited(&g, 1, 4, &mut rng);
        let c = f.coefficients();
        for (l, _, v) in c.iter() {
            if l == 0 || l > 4 {
                assert!(v.abs() < 1e-13);
            }
        }
        assert!(f.mean().abs() < 1e-14);
    }
}
