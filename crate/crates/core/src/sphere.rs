//! Pseudospectral discretization of the unit sphere.
//!
//! Scalar fields live on a tensor-product grid of Gauss-Legendre
//! colatitudes (`ntheta = lmax + 1` interior nodes, no polar points) and
//! uniformly spaced longitudes (`nphi = 2 * ntheta`). The spectral basis
//! is the real orthonormal spherical harmonic family
//!
//! ```text
//! Y_{l,0}  = Pb_l^0(cos θ)
//! Y_{l,m}  = √2 Pb_l^m(cos θ) cos(mφ)      m > 0
//! Y_{l,-m} = √2 Pb_l^m(cos θ) sin(mφ)      m > 0
//! ```
//!
//! where `Pb_l^m` is the fully normalized associated Legendre function
//! *without* the Condon-Shortley phase. The combined quadrature
//! (Gauss-Legendre in `cos θ`, trapezoidal in `φ`) integrates products of
//! basis functions exactly for total degree `l + l' ≤ 2*lmax + 1`, so
//! analysis followed by synthesis is an exact identity on band-limited
//! fields up to round-off.
//!
//! Derivatives are taken spectrally: a field is analyzed into
//! coefficients and partial derivatives in `θ` and `φ` are evaluated from
//! closed-form derivatives of the basis functions. Because all
//! colatitude nodes are interior (`sin θ > 0`), formulas containing
//! `1/sin θ` are well defined on the grid.

use nalgebra::{DMatrix, DVector};

use crate::error::{CoreError, Result};

/// Scalar field sampled on the nodes of a [`SphereGrid`], flat node
/// ordering `node = i_theta * nphi + j_phi` (theta-major).
pub type Field = DVector<f64>;

/// Spectral coefficient vector, flat index `l*l + (m + l)`.
pub type Coeffs = DVector<f64>;

/// First and second spectral partial derivatives of a scalar field with
/// respect to the intrinsic parameters `(θ, φ)`.
pub struct FieldDerivs {
    pub dt: Field,
    pub dp: Field,
    pub dtt: Field,
    pub dtp: Field,
    pub dpp: Field,
}

/// Reference radial frame of the parametrization: the Euclidean unit
/// radial direction and its parameter derivatives at one node.
#[derive(Debug, Clone, Copy)]
pub struct RadialFrame {
    pub n: [f64; 3],
    pub n_t: [f64; 3],
    pub n_p: [f64; 3],
    pub n_tt: [f64; 3],
    pub n_tp: [f64; 3],
    pub n_pp: [f64; 3],
}

/// Gauss-Legendre x uniform-longitude collocation grid with cached
/// spherical harmonic basis tables.
pub struct SphereGrid {
    lmax: usize,
    ntheta: usize,
    nphi: usize,
    theta: Vec<f64>,
    sin_theta: Vec<f64>,
    cos_theta: Vec<f64>,
    phi: Vec<f64>,
    /// Solid-angle quadrature weight per node; sums to `4π`.
    wsolid: Vec<f64>,
    /// Basis value table, `node_count x coeff_count`.
    y: DMatrix<f64>,
    yt: DMatrix<f64>,
    yp: DMatrix<f64>,
    ytt: DMatrix<f64>,
    ytp: DMatrix<f64>,
    ypp: DMatrix<f64>,
    /// Analysis operator `coeff_count x node_count`; rows are
    /// `Y_k(node) * wsolid(node)`.
    analysis: DMatrix<f64>,
}

impl SphereGrid {
    /// Builds the grid and basis tables for band limit `lmax >= 1`.
    pub fn new(lmax: usize) -> Result<Self> {
        if lmax < 1 {
            return Err(CoreError::InvalidArgument(
                "band limit lmax must be at least 1".into(),
            ));
        }
        let ntheta = lmax + 1;
        let nphi = 2 * ntheta;
        let (x, w) = gauss_legendre(ntheta);
        // Gauss nodes ascending in x = cos θ; store θ ascending instead.
        let mut theta: Vec<f64> = x.iter().map(|&xi| xi.acos()).collect();
        let mut wtheta = w;
        theta.reverse();
        wtheta.reverse();
        let sin_theta: Vec<f64> = theta.iter().map(|t| t.sin()).collect();
        let cos_theta: Vec<f64> = theta.iter().map(|t| t.cos()).collect();
        let dphi = 2.0 * std::f64::consts::PI / nphi as f64;
        let phi: Vec<f64> = (0..nphi).map(|j| j as f64 * dphi).collect();

        let n_nodes = ntheta * nphi;
        let n_coeff = (lmax + 1) * (lmax + 1);
        let mut wsolid = vec![0.0; n_nodes];
        for i in 0..ntheta {
            for j in 0..nphi {
                wsolid[i * nphi + j] = wtheta[i] * dphi;
            }
        }

        let mut y = DMatrix::zeros(n_nodes, n_coeff);
        let mut yt = DMatrix::zeros(n_nodes, n_coeff);
        let mut yp = DMatrix::zeros(n_nodes, n_coeff);
        let mut ytt = DMatrix::zeros(n_nodes, n_coeff);
        let mut ytp = DMatrix::zeros(n_nodes, n_coeff);
        let mut ypp = DMatrix::zeros(n_nodes, n_coeff);

        // Per colatitude row: normalized associated Legendre values and
        // θ-derivatives for all (l, m), then combine with the azimuthal
        // factors per node.
        let mut pbar = vec![0.0; n_coeff_lm(lmax)];
        let mut dpbar = vec![0.0; n_coeff_lm(lmax)];
        for i in 0..ntheta {
            normalized_legendre_row(lmax, cos_theta[i], sin_theta[i], &mut pbar, &mut dpbar);
            let cot = cos_theta[i] / sin_theta[i];
            let inv_sin2 = 1.0 / (sin_theta[i] * sin_theta[i]);
            for l in 0..=lmax {
                for m in 0..=l {
                    let p = pbar[lm_index(l, m)];
                    let dp = dpbar[lm_index(l, m)];
                    // Second θ-derivative from the associated Legendre ODE:
                    // Pb'' = -cotθ Pb' - (l(l+1) - m²/sin²θ) Pb.
                    let ddp = -cot * dp - (l * (l + 1)) as f64 * p
                        + (m * m) as f64 * inv_sin2 * p;
                    let norm = if m == 0 { 1.0 } else { std::f64::consts::SQRT_2 };
                    for j in 0..nphi {
                        let node = i * nphi + j;
                        let (c, s) = {
                            let a = m as f64 * phi[j];
                            (a.cos(), a.sin())
                        };
                        let mf = m as f64;
                        if m == 0 {
                            let k = coeff_index(l, 0);
                            y[(node, k)] = p;
                            yt[(node, k)] = dp;
                            ytt[(node, k)] = ddp;
                        } else {
                            let kc = coeff_index(l, m as isize);
                            let ks = coeff_index(l, -(m as isize));
                            y[(node, kc)] = norm * p * c;
                            y[(node, ks)] = norm * p * s;
                            yt[(node, kc)] = norm * dp * c;
                            yt[(node, ks)] = norm * dp * s;
                            yp[(node, kc)] = -norm * p * mf * s;
                            yp[(node, ks)] = norm * p * mf * c;
                            ytt[(node, kc)] = norm * ddp * c;
                            ytt[(node, ks)] = norm * ddp * s;
                            ytp[(node, kc)] = -norm * dp * mf * s;
                            ytp[(node, ks)] = norm * dp * mf * c;
                            ypp[(node, kc)] = -norm * p * mf * mf * c;
                            ypp[(node, ks)] = -norm * p * mf * mf * s;
                        }
                    }
                }
            }
        }

        let mut analysis = DMatrix::zeros(n_coeff, n_nodes);
        for k in 0..n_coeff {
            for node in 0..n_nodes {
                analysis[(k, node)] = y[(node, k)] * wsolid[node];
            }
        }

        Ok(Self {
            lmax,
            ntheta,
            nphi,
            theta,
            sin_theta,
            cos_theta,
            phi,
            wsolid,
            y,
            yt,
            yp,
            ytt,
            ytp,
            ypp,
            analysis,
        })
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn ntheta(&self) -> usize {
        self.ntheta
    }

    pub fn nphi(&self) -> usize {
        self.nphi
    }

    /// Number of collocation nodes `ntheta * nphi`.
    pub fn node_count(&self) -> usize {
        self.ntheta * self.nphi
    }

    /// Number of spectral coefficients `(lmax + 1)^2`.
    pub fn coeff_count(&self) -> usize {
        (self.lmax + 1) * (self.lmax + 1)
    }

    pub fn node_index(&self, itheta: usize, jphi: usize) -> usize {
        itheta * self.nphi + jphi
    }

    pub fn theta(&self, itheta: usize) -> f64 {
        self.theta[itheta]
    }

    pub fn phi(&self, jphi: usize) -> f64 {
        self.phi[jphi]
    }

    pub fn sin_theta_of_node(&self, node: usize) -> f64 {
        self.sin_theta[node / self.nphi]
    }

    /// Solid-angle weight of one node; the weights sum to `4π`.
    pub fn solid_weight(&self, node: usize) -> f64 {
        self.wsolid[node]
    }

    /// Degree and order `(l, m)` of a flat coefficient index.
    pub fn degree_order(k: usize) -> (usize, isize) {
        let l = (k as f64).sqrt() as usize;
        let l = if (l + 1) * (l + 1) <= k { l + 1 } else { l };
        (l, k as isize - (l * l + l) as isize)
    }

    /// Flat coefficient index of `(l, m)`.
    pub fn coeff_of(l: usize, m: isize) -> usize {
        coeff_index(l, m)
    }

    /// Quadrature of a node field against the solid-angle measure `dΩ`.
    pub fn integrate_solid(&self, f: &Field) -> f64 {
        f.iter()
            .zip(self.wsolid.iter())
            .map(|(a, w)| a * w)
            .sum()
    }

    /// Forward transform: spectral coefficients of a node field.
    pub fn analyze(&self, f: &Field) -> Coeffs {
        &self.analysis * f
    }

    /// Inverse transform: node values of a coefficient vector.
    pub fn synthesize(&self, c: &Coeffs) -> Field {
        &self.y * c
    }

    /// Node values of the `(θ, φ)` partial derivatives of a coefficient
    /// vector.
    pub fn synthesize_derivs(&self, c: &Coeffs) -> FieldDerivs {
        FieldDerivs {
            dt: &self.yt * c,
            dp: &self.yp * c,
            dtt: &self.ytt * c,
            dtp: &self.ytp * c,
            dpp: &self.ypp * c,
        }
    }

    /// Spectral partial derivatives of a node field (band-limits first).
    pub fn differentiate(&self, f: &Field) -> FieldDerivs {
        let c = self.analyze(f);
        self.synthesize_derivs(&c)
    }

    /// First-order spectral partials only; cheaper than
    /// [`SphereGrid::differentiate`] when curvature terms are not needed.
    pub fn gradient(&self, f: &Field) -> (Field, Field) {
        let c = self.analyze(f);
        (&self.yt * &c, &self.yp * &c)
    }

    /// Euclidean radial frame at one node: `n(θ,φ)` and its first and
    /// second parameter derivatives. `n` is the outward unit vector of
    /// the round reference sphere.
    pub fn radial_frame(&self, node: usize) -> RadialFrame {
        let i = node / self.nphi;
        let j = node % self.nphi;
        let (st, ct) = (self.sin_theta[i], self.cos_theta[i]);
        let (sp, cp) = (self.phi[j].sin(), self.phi[j].cos());
        RadialFrame {
            n: [st * cp, st * sp, ct],
            n_t: [ct * cp, ct * sp, -st],
            n_p: [-st * sp, st * cp, 0.0],
            n_tt: [-st * cp, -st * sp, -ct],
            n_tp: [-ct * sp, ct * cp, 0.0],
            n_pp: [-st * cp, -st * sp, 0.0],
        }
    }

    /// Basis value table (`node_count x coeff_count`).
    pub fn basis_values(&self) -> &DMatrix<f64> {
        &self.y
    }

    /// Basis derivative tables in the order `(dθ, dφ, dθθ, dθφ, dφφ)`.
    pub fn basis_derivs(&self) -> [&DMatrix<f64>; 5] {
        [&self.yt, &self.yp, &self.ytt, &self.ytp, &self.ypp]
    }

    /// Analysis operator as a dense matrix (`coeff_count x node_count`).
    pub fn analysis_matrix(&self) -> &DMatrix<f64> {
        &self.analysis
    }

    /// Evaluates a coefficient vector at an arbitrary direction (θ, φ)
    /// off the collocation grid.
    pub fn evaluate_at(&self, c: &Coeffs, theta: f64, phi: f64) -> f64 {
        let lmax = self.lmax;
        let mut pbar = vec![0.0; n_coeff_lm(lmax)];
        let mut dpbar = vec![0.0; n_coeff_lm(lmax)];
        let st = theta.sin().max(1e-300);
        normalized_legendre_row(lmax, theta.cos(), st, &mut pbar, &mut dpbar);
        let mut acc = 0.0;
        for l in 0..=lmax {
            acc += c[coeff_index(l, 0)] * pbar[lm_index(l, 0)];
            for m in 1..=l {
                let p = std::f64::consts::SQRT_2 * pbar[lm_index(l, m)];
                let a = m as f64 * phi;
                acc += c[coeff_index(l, m as isize)] * p * a.cos();
                acc += c[coeff_index(l, -(m as isize))] * p * a.sin();
            }
        }
        acc
    }
}

fn n_coeff_lm(lmax: usize) -> usize {
    (lmax + 1) * (lmax + 2) / 2
}

/// Triangular index for `0 <= m <= l <= lmax`.
fn lm_index(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

fn coeff_index(l: usize, m: isize) -> usize {
    (l * l) as usize + (m + l as isize) as usize
}

/// Fully normalized associated Legendre functions `Pb_l^m(cos θ)` and
/// their θ-derivatives at one colatitude, no Condon-Shortley phase.
///
/// Uses the standard stable recurrences
/// `Pb_m^m = Pb_{m-1}^{m-1} sinθ √((2m+1)/(2m))`,
/// `Pb_{m+1}^m = √(2m+3) cosθ Pb_m^m`,
/// `Pb_l^m = a_{lm} (cosθ Pb_{l-1}^m - Pb_{l-2}^m / a_{l-1,m})` with
/// `a_{lm} = √((4l²-1)/(l²-m²))`, and the derivative identity
/// `sinθ dPb_l^m/dθ = l cosθ Pb_l^m - e_{lm} Pb_{l-1}^m`,
/// `e_{lm} = √((2l+1)/(2l-1) (l²-m²))`.
fn normalized_legendre_row(
    lmax: usize,
    ct: f64,
    st: f64,
    pbar: &mut [f64],
    dpbar: &mut [f64],
) {
    let inv_sqrt_4pi = 0.5 / std::f64::consts::PI.sqrt();
    pbar[lm_index(0, 0)] = inv_sqrt_4pi;
    for m in 1..=lmax {
        let prev = pbar[lm_index(m - 1, m - 1)];
        pbar[lm_index(m, m)] = prev * st * ((2 * m + 1) as f64 / (2 * m) as f64).sqrt();
    }
    for m in 0..lmax {
        pbar[lm_index(m + 1, m)] = ((2 * m + 3) as f64).sqrt() * ct * pbar[lm_index(m, m)];
    }
    for m in 0..=lmax {
        for l in (m + 2)..=lmax {
            let a = ((4 * l * l - 1) as f64 / (l * l - m * m) as f64).sqrt();
            let a_prev =
                ((4 * (l - 1) * (l - 1) - 1) as f64 / ((l - 1) * (l - 1) - m * m) as f64).sqrt();
            pbar[lm_index(l, m)] =
                a * (ct * pbar[lm_index(l - 1, m)] - pbar[lm_index(l - 2, m)] / a_prev);
        }
    }
    for m in 0..=lmax {
        for l in m..=lmax {
            let e = if l == 0 || l <= m {
                0.0
            } else {
                ((2 * l + 1) as f64 / (2 * l - 1) as f64 * (l * l - m * m) as f64).sqrt()
            };
            let low = if l == 0 || l <= m {
                0.0
            } else {
                pbar[lm_index(l - 1, m)]
            };
            dpbar[lm_index(l, m)] = (l as f64 * ct * pbar[lm_index(l, m)] - e * low) / st;
        }
    }
}

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]`.
///
/// Newton iteration on `P_n` from the Chebyshev-like initial guesses;
/// converges to machine precision in a handful of steps for the moderate
/// orders used here.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut xi =
            (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_and_deriv(n, xi);
            let dx = p / d;
            xi -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_deriv(n, xi);
        x[i] = xi;
        w[i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
    }
    // Initial guesses are descending in x; return ascending.
    x.reverse();
    w.reverse();
    (x, w)
}

fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid(lmax: usize) -> SphereGrid {
        SphereGrid::new(lmax).unwrap()
    }

    #[test]
    fn weights_sum_to_sphere_area() {
        for lmax in [2, 7, 16, 24] {
            let g = grid(lmax);
            let total: f64 = (0..g.node_count()).map(|k| g.solid_weight(k)).sum();
            assert_abs_diff_eq!(total, 4.0 * std::f64::consts::PI, epsilon = 1e-12);
        }
    }

    #[test]
    fn constant_field_analyzes_to_monopole() {
        let g = grid(8);
        let f = Field::from_element(g.node_count(), 1.0);
        let c = g.analyze(&f);
        let sqrt4pi = (4.0 * std::f64::consts::PI).sqrt();
        assert_abs_diff_eq!(c[0], sqrt4pi, epsilon = 1e-12);
        for k in 1..g.coeff_count() {
            assert!(c[k].abs() < 1e-12, "leakage into k={k}: {}", c[k]);
        }
    }

    #[test]
    fn dipole_roundtrip_is_exact() {
        let g = grid(6);
        // f = Y_{1,0} evaluated from the node frame: Y_{1,0} = √(3/4π) cosθ.
        let a = (3.0 / (4.0 * std::f64::consts::PI)).sqrt();
        let f = Field::from_fn(g.node_count(), |k, _| a * g.radial_frame(k).n[2]);
        let c = g.analyze(&f);
        assert_abs_diff_eq!(c[SphereGrid::coeff_of(1, 0)], 1.0, epsilon = 1e-13);
        let back = g.synthesize(&c);
        for k in 0..g.node_count() {
            assert_abs_diff_eq!(back[k], f[k], epsilon = 1e-13);
        }
    }

    #[test]
    fn random_bandlimited_roundtrip() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for lmax in [4, 11, 24] {
            let g = grid(lmax);
            let c = Coeffs::from_fn(g.coeff_count(), |_, _| rng.gen_range(-1.0..1.0));
            let f = g.synthesize(&c);
            let c2 = g.analyze(&f);
            let err = (&c2 - &c).amax();
            assert!(err < 1e-12, "roundtrip error {err} at lmax={lmax}");
            let f2 = g.synthesize(&c2);
            assert!((&f2 - &f).amax() < 1e-12);
        }
    }

    #[test]
    fn basis_is_orthonormal_under_quadrature() {
        let g = grid(9);
        // Quadrature is exact for products of basis functions, so the
        // Gram matrix of the full basis must be the identity.
        let gram = g.analysis_matrix() * g.basis_values();
        for i in 0..g.coeff_count() {
            for j in 0..g.coeff_count() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(gram[(i, j)], expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn quadrature_moments_of_normals() {
        let g = grid(10);
        let one = Field::from_element(g.node_count(), 1.0);
        assert_abs_diff_eq!(
            g.integrate_solid(&one),
            4.0 * std::f64::consts::PI,
            epsilon = 1e-12
        );
        for axis in 0..3 {
            let ni = Field::from_fn(g.node_count(), |k, _| g.radial_frame(k).n[axis]);
            assert_abs_diff_eq!(g.integrate_solid(&ni), 0.0, epsilon = 1e-12);
            let nisq = ni.component_mul(&ni);
            assert_abs_diff_eq!(
                g.integrate_solid(&nisq),
                4.0 * std::f64::consts::PI / 3.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn spectral_derivatives_match_dipole_closed_form() {
        let g = grid(8);
        let a = (3.0 / (4.0 * std::f64::consts::PI)).sqrt();
        // f = Y_{1,1} ∝ sinθ cosφ; derivatives known in closed form.
        let s2 = std::f64::consts::SQRT_2;
        let f = Field::from_fn(g.node_count(), |k, _| {
            let i = k / g.nphi();
            let j = k % g.nphi();
            s2 * a / s2 * g.theta(i).sin() * g.phi(j).cos()
        });
        let d = g.differentiate(&f);
        for i in 0..g.ntheta() {
            for j in 0..g.nphi() {
                let k = g.node_index(i, j);
                let (t, p) = (g.theta(i), g.phi(j));
                let c = a;
                assert_abs_diff_eq!(d.dt[k], c * t.cos() * p.cos(), epsilon = 1e-12);
                assert_abs_diff_eq!(d.dp[k], -c * t.sin() * p.sin(), epsilon = 1e-12);
                assert_abs_diff_eq!(d.dtt[k], -c * t.sin() * p.cos(), epsilon = 1e-12);
                assert_abs_diff_eq!(d.dtp[k], -c * t.cos() * p.sin(), epsilon = 1e-12);
                assert_abs_diff_eq!(d.dpp[k], -c * t.sin() * p.cos(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn radial_frame_derivatives_are_consistent() {
        // Finite differences of n(θ, φ) against the stored frame.
        let g = grid(5);
        let h = 1e-6;
        let n_of = |t: f64, p: f64| {
            [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()]
        };
        for k in [0, 3, 17, g.node_count() - 1] {
            let i = k / g.nphi();
            let j = k % g.nphi();
            let (t, p) = (g.theta(i), g.phi(j));
            let fr = g.radial_frame(k);
            for a in 0..3 {
                let dt = (n_of(t + h, p)[a] - n_of(t - h, p)[a]) / (2.0 * h);
                let dp = (n_of(t, p + h)[a] - n_of(t, p - h)[a]) / (2.0 * h);
                assert_abs_diff_eq!(fr.n_t[a], dt, epsilon = 1e-8);
                assert_abs_diff_eq!(fr.n_p[a], dp, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn degree_order_roundtrip() {
        for l in 0..20usize {
            for m in -(l as isize)..=(l as isize) {
                let k = SphereGrid::coeff_of(l, m);
                assert_eq!(SphereGrid::degree_order(k), (l, m));
            }
        }
    }

    #[test]
    fn quadrature_exact_to_twice_band_limit() {
        // ∫ Y_{l,m} Y_{l',m'} dΩ = δ for l + l' ≤ 2 lmax + 1: sample the
        // extreme case l = l' = lmax with the highest order.
        let g = grid(12);
        let l = 12usize;
        let k = SphereGrid::coeff_of(l, l as isize);
        let yk = g.basis_values().column(k).into_owned();
        let prod = Field::from_fn(g.node_count(), |n, _| yk[n] * yk[n]);
        assert_abs_diff_eq!(g.integrate_solid(&prod), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_zero_band_limit() {
        assert!(SphereGrid::new(0).is_err());
    }
}
