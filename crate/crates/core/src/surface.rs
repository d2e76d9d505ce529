//! Embedded closed surfaces represented as radial graphs over the
//! collocation sphere: induced geometry, extrinsic curvature, ambient
//! curvature restrictions, quadrature, and per-surface shape diagnostics.
//!
//! Sign convention: the second fundamental form is oriented so the
//! outward round sphere of radius `r` in flat space has mean curvature
//! `H = -2/r`.

use std::path::Path;

use crate::error::{CoreError, Result};
use crate::initialdata::{sym, sym_get, InitialData};
use crate::sphere::{Coeffs, Field, SphereGrid};

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

#[inline]
fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn sub3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

/// Packed index for symmetric 2x2 surface tensors: `[θθ, θφ, φφ]`.
#[inline]
fn sym2(a: usize, b: usize) -> usize {
    a + b
}

#[inline]
fn unpack2(m: &[f64; 3]) -> [[f64; 2]; 2] {
    [[m[0], m[1]], [m[1], m[2]]]
}

/// `ḡ_ij a^i b^j` for a packed symmetric ambient metric.
#[inline]
fn gbar_dot(g: &[f64; 6], a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            acc += sym_get(g, i, j) * a[i] * b[j];
        }
    }
    acc
}

/// `g^{AC} g^{BD} m_AB k_CD` for packed symmetric surface tensors.
fn inner_2x2(m: &[f64; 3], k: &[f64; 3], gi: &[[f64; 2]; 2]) -> f64 {
    let mm = unpack2(m);
    let kk = unpack2(k);
    let mut acc = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    acc += gi[a][c] * gi[b][d] * mm[a][b] * kk[c][d];
                }
            }
        }
    }
    acc
}

/// Polar angles of a unit direction vector.
#[inline]
fn dir_angles(u: &[f64; 3]) -> (f64, f64) {
    (u[2].clamp(-1.0, 1.0).acos(), u[1].atan2(u[0]))
}

/// A closed surface stored as a radial graph `x(θ,φ) = c + ρ(θ,φ)·n(θ,φ)`
/// over the collocation sphere; `ρ` holds the node values (coordinate
/// units) and is interpreted through its band-limited representation.
#[derive(Debug, Clone)]
pub struct RadialSurface {
    pub center: [f64; 3],
    pub rho: Field,
}

impl RadialSurface {
    /// Round sphere of the given coordinate radius about `center`.
    pub fn round(grid: &SphereGrid, center: [f64; 3], radius: f64) -> Self {
        RadialSurface {
            center,
            rho: Field::from_element(grid.node_count(), radius),
        }
    }

    /// Surface from a spectral coefficient vector of the radius field.
    pub fn from_coeffs(grid: &SphereGrid, center: [f64; 3], coeffs: &Coeffs) -> Self {
        RadialSurface {
            center,
            rho: grid.synthesize(coeffs),
        }
    }

    /// Spectral coefficients of the radius field.
    pub fn rho_coeffs(&self, grid: &SphereGrid) -> Coeffs {
        grid.analyze(&self.rho)
    }

    /// Full geometric state of the surface in the given initial data.
    pub fn geometry(&self, grid: &SphereGrid, data: &dyn InitialData) -> Result<SurfaceGeometry> {
        let n = grid.node_count();
        if self.rho.len() != n {
            return Err(CoreError::InvalidArgument(format!(
                "radius field has {} nodes but the grid has {}",
                self.rho.len(),
                n
            )));
        }
        for (q, &v) in self.rho.iter().enumerate() {
            if !(v > 0.0) {
                return Err(CoreError::DegenerateSurface {
                    node: q,
                    message: format!("nonpositive radius {v}"),
                });
            }
        }
        let coeffs = grid.analyze(&self.rho);
        let vals = grid.synthesize(&coeffs);
        let der = grid.synthesize_derivs(&coeffs);

        let mut pos = vec![[0.0; 3]; n];
        let mut e_t = vec![[0.0; 3]; n];
        let mut e_p = vec![[0.0; 3]; n];
        let mut x_tt = vec![[0.0; 3]; n];
        let mut x_tp = vec![[0.0; 3]; n];
        let mut x_pp = vec![[0.0; 3]; n];
        for q in 0..n {
            let r = vals[q];
            if !(r > 0.0) {
                return Err(CoreError::DegenerateSurface {
                    node: q,
                    message: format!("nonpositive radius {r}"),
                });
            }
            let f = grid.radial_frame(q);
            let (rt, rp) = (der.dt[q], der.dp[q]);
            let (rtt, rtp, rpp) = (der.dtt[q], der.dtp[q], der.dpp[q]);
            for i in 0..3 {
                pos[q][i] = self.center[i] + r * f.n[i];
                e_t[q][i] = rt * f.n[i] + r * f.n_t[i];
                e_p[q][i] = rp * f.n[i] + r * f.n_p[i];
                x_tt[q][i] = rtt * f.n[i] + 2.0 * rt * f.n_t[i] + r * f.n_tt[i];
                x_tp[q][i] = rtp * f.n[i] + rt * f.n_p[i] + rp * f.n_t[i] + r * f.n_tp[i];
                x_pp[q][i] = rpp * f.n[i] + 2.0 * rp * f.n_p[i] + r * f.n_pp[i];
            }
        }
        assemble(grid, data, self.center, pos, e_t, e_p, x_tt, x_tp, x_pp)
    }

    /// Reparametrizes the same point set as a radial graph about the
    /// shifted center `c + shift`. Radii of the new parametrization are
    /// found per node by solving the ray/surface intersection; the
    /// result agrees with the original point set up to the band-limited
    /// interpolation error of the radius field.
    pub fn recentered(&self, grid: &SphereGrid, shift: [f64; 3]) -> Result<RadialSurface> {
        let coeffs = grid.analyze(&self.rho);
        let cnew = [
            self.center[0] + shift[0],
            self.center[1] + shift[1],
            self.center[2] + shift[2],
        ];
        let n = grid.node_count();
        let mut vals = Field::zeros(n);
        for q in 0..n {
            let w = grid.radial_frame(q).n;
            // Distance from the old center to the surface along direction w,
            // used as the starting guess for the shifted-ray intersection.
            let (th0, ph0) = dir_angles(&w);
            let base = grid.evaluate_at(&coeffs, th0, ph0);
            let residual = |s: f64| -> f64 {
                let v = [
                    cnew[0] + s * w[0] - self.center[0],
                    cnew[1] + s * w[1] - self.center[1],
                    cnew[2] + s * w[2] - self.center[2],
                ];
                let r = norm3(&v);
                if !(r > 0.0) {
                    return f64::NAN;
                }
                let u = [v[0] / r, v[1] / r, v[2] / r];
                let (th, ph) = dir_angles(&u);
                r - grid.evaluate_at(&coeffs, th, ph)
            };
            let mut s0 = base - dot3(&w, &shift);
            let mut f0 = residual(s0);
            let mut s1 = s0 + 1e-6 * s0.abs().max(1e-6);
            let mut f1 = residual(s1);
            let scale = base.abs().max(1.0);
            let mut iters = 0usize;
            while f1.abs() > 1e-13 * scale && iters < 80 {
                let denom = f1 - f0;
                if denom == 0.0 || !denom.is_finite() {
                    break;
                }
                let step = f1 * (s1 - s0) / denom;
                s0 = s1;
                f0 = f1;
                s1 -= step;
                f1 = residual(s1);
                iters += 1;
            }
            if !(s1 > 0.0) || !f1.is_finite() || f1.abs() > 1e-9 * scale {
                return Err(CoreError::DegenerateSurface {
                    node: q,
                    message: format!(
                        "reparametrization about the shifted center did not converge \
                         (radius {s1}, residual {f1})"
                    ),
                });
            }
            vals[q] = s1;
        }
        Ok(RadialSurface {
            center: cnew,
            rho: vals,
        })
    }
}

/// Constant-weight expansion field `Θ_b = H + b·tr_Σ K` on a surface.
pub struct ExpansionField {
    pub b: f64,
    pub theta: Field,
}

/// Geometry of an embedded closed surface at the collocation nodes,
/// immutable once computed. Surface tensors are packed `[θθ, θφ, φφ]`;
/// surface covectors `[θ, φ]`.
#[derive(Debug)]
pub struct SurfaceGeometry {
    pub lmax: usize,
    pub center: [f64; 3],
    /// Position `x` per node.
    pub pos: Vec<[f64; 3]>,
    /// Tangent vectors `e_θ = ∂_θ x`, `e_φ = ∂_φ x`.
    pub e_theta: Vec<[f64; 3]>,
    pub e_phi: Vec<[f64; 3]>,
    /// Second parameter derivatives of the position `[x_θθ, x_θφ, x_φφ]`.
    pub x_second: Vec<[[f64; 3]; 3]>,
    /// Induced metric `g_AB`, its inverse and determinant.
    pub metric: Vec<[f64; 3]>,
    pub metric_inv: Vec<[f64; 3]>,
    pub det_metric: Vec<f64>,
    /// Quadrature weight per node for `∫ · dμ` (induced measure) and its
    /// flat-metric counterpart `∫ · dμ_e`.
    pub area_weight: Vec<f64>,
    pub area_weight_euclid: Vec<f64>,
    /// Outward unit normal: vector `ν^i` and covector `ν_i`.
    pub normal: Vec<[f64; 3]>,
    pub normal_cov: Vec<[f64; 3]>,
    /// Second fundamental form `A_AB`, mean curvature `H = g^{AB}A_AB`,
    /// trace-free part `Å_AB` and the squared norms `|A|²`, `|Å|²`.
    pub second_form: Vec<[f64; 3]>,
    pub mean_curvature: Vec<f64>,
    pub tracefree_form: Vec<[f64; 3]>,
    pub second_form_sq: Vec<f64>,
    pub tracefree_sq: Vec<f64>,
    /// Ambient curvature tensor restricted to the surface: `K_AB`,
    /// `tr_Σ K = g^{AB}K_AB`, `ω_A = K(ν,e_A)` (and raised), `K(ν,ν)`,
    /// `|K(ν,·)|²_Σ`, and the tangential divergence `div_Σ K(ν,·)`.
    pub k_tan: Vec<[f64; 3]>,
    pub k_trace_tan: Vec<f64>,
    pub k_normal: Vec<[f64; 2]>,
    pub k_normal_up: Vec<[f64; 2]>,
    pub k_nn: Vec<f64>,
    pub k_normal_sq: Vec<f64>,
    pub div_k_normal: Vec<f64>,
    /// Tangential inner products `⟨A,K⟩_Σ` and `⟨K,K⟩_Σ`.
    pub inner_a_k: Vec<f64>,
    pub inner_k_k: Vec<f64>,
    /// Ambient curvature scalars at the surface: `Ric(ν,ν)`, scalar
    /// curvature, and the constraint densities `ρ`, `J(ν)`.
    pub ricci_nn: Vec<f64>,
    pub scalar_amb: Vec<f64>,
    pub energy_density: Vec<f64>,
    pub momentum_normal: Vec<f64>,
    /// Surface Christoffel symbols `γ^C_AB` packed C-major
    /// (`[γ^θ_θθ, γ^θ_θφ, γ^θ_φφ, γ^φ_θθ, γ^φ_θφ, γ^φ_φφ]`) and the
    /// Laplace–Beltrami drift `-g^{AB}γ^C_AB`.
    pub christoffel_surf: Vec<[f64; 6]>,
    pub laplace_drift: Vec<[f64; 2]>,
    /// Normal-graph conversion factor `w = ḡ(ν,n)/|n|_ḡ` (with `n` the
    /// Euclidean unit radial direction from the parametrization center),
    /// plus the raw pieces: `ḡ(ν,n)` — the exact factor converting a
    /// coordinate radial increment into a normal-graph increment — and
    /// `|n|_ḡ`.
    pub w: Vec<f64>,
    pub radial_speed: Vec<f64>,
    pub radial_norm_g: Vec<f64>,
    /// Tangential transport coefficients `t^A = g^{AB} ḡ(n, e_B)`: the
    /// tangential part of the radial direction in the surface frame.
    pub transport_up: Vec<[f64; 2]>,
    /// Euclidean unit radial direction from the center, the graph radius
    /// `|x - c|`, and the chart radius `|x|`.
    pub radial_unit: Vec<[f64; 3]>,
    pub rho: Vec<f64>,
    pub chart_radius: Vec<f64>,
    // Aggregates.
    pub area: f64,
    pub area_euclid: f64,
    /// Area radius `σ = √(area/4π)`.
    pub area_radius: f64,
    /// Euclidean coordinate center `z_i = (1/|Σ|_e) ∫ x_i dμ_e`.
    pub center_euclid: [f64; 3],
    pub hawking_mass: f64,
    /// `∫ H² dμ`.
    pub willmore_integral: f64,
    /// `∫ R_Σ dμ` (intrinsic scalar curvature; `8π` for genus 0).
    pub gauss_bonnet_integral: f64,
    pub min_rho: f64,
    pub min_chart_radius: f64,
}

impl SurfaceGeometry {
    pub fn node_count(&self) -> usize {
        self.pos.len()
    }

    /// `∫ f dμ` with the induced measure.
    pub fn integrate(&self, f: &Field) -> f64 {
        f.iter()
            .zip(self.area_weight.iter())
            .map(|(a, w)| a * w)
            .sum()
    }

    /// `∫ f dμ_e` with the flat measure.
    pub fn integrate_euclid(&self, f: &Field) -> f64 {
        f.iter()
            .zip(self.area_weight_euclid.iter())
            .map(|(a, w)| a * w)
            .sum()
    }

    /// Expansion with curvature weight `b`: `Θ_b = H + b·tr_Σ K`.
    pub fn expansion(&self, b: f64) -> Result<ExpansionField> {
        if !(-1.0..=1.0).contains(&b) {
            return Err(CoreError::InvalidArgument(format!(
                "curvature weight b = {b} outside [-1, 1]"
            )));
        }
        let n = self.node_count();
        let mut theta = Field::zeros(n);
        for q in 0..n {
            theta[q] = self.mean_curvature[q] + b * self.k_trace_tan[q];
        }
        Ok(ExpansionField { b, theta })
    }

    /// Pointwise supremum of `|Å|`.
    pub fn sup_tracefree(&self) -> f64 {
        self.tracefree_sq
            .iter()
            .fold(0.0f64, |m, &v| m.max(v.max(0.0).sqrt()))
    }

    /// `|∫ R_Σ dμ - 8π|`: quadrature defect of the closed-surface
    /// curvature integral (genus 0).
    pub fn gauss_bonnet_defect(&self) -> f64 {
        (self.gauss_bonnet_integral - 2.0 * FOUR_PI).abs()
    }
}

/// Geometry of a surface given by explicit position coefficient vectors
/// `(x, y, z)` over the sphere. Used for derivative checks of the
/// expansion under general (non-radial) deformations; `center` fixes the
/// orientation and the radial conversion factors.
pub fn parametric_geometry(
    grid: &SphereGrid,
    data: &dyn InitialData,
    center: [f64; 3],
    coords: &[Coeffs; 3],
) -> Result<SurfaceGeometry> {
    let n = grid.node_count();
    let mut pos = vec![[0.0; 3]; n];
    let mut e_t = vec![[0.0; 3]; n];
    let mut e_p = vec![[0.0; 3]; n];
    let mut x_tt = vec![[0.0; 3]; n];
    let mut x_tp = vec![[0.0; 3]; n];
    let mut x_pp = vec![[0.0; 3]; n];
    for (i, c) in coords.iter().enumerate() {
        if c.len() != grid.coeff_count() {
            return Err(CoreError::InvalidArgument(format!(
                "coordinate coefficient vector {i} has length {} but the grid has {} modes",
                c.len(),
                grid.coeff_count()
            )));
        }
        let vals = grid.synthesize(c);
        let der = grid.synthesize_derivs(c);
        for q in 0..n {
            pos[q][i] = vals[q];
            e_t[q][i] = der.dt[q];
            e_p[q][i] = der.dp[q];
            x_tt[q][i] = der.dtt[q];
            x_tp[q][i] = der.dtp[q];
            x_pp[q][i] = der.dpp[q];
        }
    }
    assemble(grid, data, center, pos, e_t, e_p, x_tt, x_tp, x_pp)
}

/// Shared geometry kernel: everything is evaluated pointwise from the
/// exact ambient jet and the exact parameter derivatives of the
/// (band-limited) embedding, so no spectral differentiation error enters
/// beyond the representation of the surface itself.
#[allow(clippy::too_many_arguments)]
fn assemble(
    grid: &SphereGrid,
    data: &dyn InitialData,
    center: [f64; 3],
    pos: Vec<[f64; 3]>,
    e_t: Vec<[f64; 3]>,
    e_p: Vec<[f64; 3]>,
    x_tt: Vec<[f64; 3]>,
    x_tp: Vec<[f64; 3]>,
    x_pp: Vec<[f64; 3]>,
) -> Result<SurfaceGeometry> {
    let n = grid.node_count();
    let mut geo = SurfaceGeometry {
        lmax: grid.lmax(),
        center,
        pos,
        e_theta: e_t,
        e_phi: e_p,
        x_second: vec![[[0.0; 3]; 3]; n],
        metric: vec![[0.0; 3]; n],
        metric_inv: vec![[0.0; 3]; n],
        det_metric: vec![0.0; n],
        area_weight: vec![0.0; n],
        area_weight_euclid: vec![0.0; n],
        normal: vec![[0.0; 3]; n],
        normal_cov: vec![[0.0; 3]; n],
        second_form: vec![[0.0; 3]; n],
        mean_curvature: vec![0.0; n],
        tracefree_form: vec![[0.0; 3]; n],
        second_form_sq: vec![0.0; n],
        tracefree_sq: vec![0.0; n],
        k_tan: vec![[0.0; 3]; n],
        k_trace_tan: vec![0.0; n],
        k_normal: vec![[0.0; 2]; n],
        k_normal_up: vec![[0.0; 2]; n],
        k_nn: vec![0.0; n],
        k_normal_sq: vec![0.0; n],
        div_k_normal: vec![0.0; n],
        inner_a_k: vec![0.0; n],
        inner_k_k: vec![0.0; n],
        ricci_nn: vec![0.0; n],
        scalar_amb: vec![0.0; n],
        energy_density: vec![0.0; n],
        momentum_normal: vec![0.0; n],
        christoffel_surf: vec![[0.0; 6]; n],
        laplace_drift: vec![[0.0; 2]; n],
        w: vec![0.0; n],
        radial_speed: vec![0.0; n],
        radial_norm_g: vec![0.0; n],
        transport_up: vec![[0.0; 2]; n],
        radial_unit: vec![[0.0; 3]; n],
        rho: vec![0.0; n],
        chart_radius: vec![0.0; n],
        area: 0.0,
        area_euclid: 0.0,
        area_radius: 0.0,
        center_euclid: [0.0; 3],
        hawking_mass: 0.0,
        willmore_integral: 0.0,
        gauss_bonnet_integral: 0.0,
        min_rho: f64::INFINITY,
        min_chart_radius: f64::INFINITY,
    };

    let mut z_acc = [0.0; 3];
    for q in 0..n {
        let x = geo.pos[q];
        let e = [geo.e_theta[q], geo.e_phi[q]];
        let xx = [
            [x_tt[q], x_tp[q]],
            [x_tp[q], x_pp[q]],
        ];
        geo.x_second[q] = [x_tt[q], x_tp[q], x_pp[q]];

        let jet = data.jet(x)?;
        let gb = jet.g;
        let gib = jet.g_inv();
        let gam = jet.christoffel();
        let (ric, scal) = jet.ricci();
        let (rho_c, jmom) = jet.constraint_densities();

        // Induced metric (ambient and flat) and the measure weights.
        let g2 = [
            gbar_dot(&gb, &e[0], &e[0]),
            gbar_dot(&gb, &e[0], &e[1]),
            gbar_dot(&gb, &e[1], &e[1]),
        ];
        let det = g2[0] * g2[2] - g2[1] * g2[1];
        if !det.is_finite() || det <= 0.0 {
            let (it, jt) = (q / grid.nphi(), q % grid.nphi());
            return Err(CoreError::DegenerateSurface {
                node: q,
                message: format!(
                    "induced metric determinant {det} at θ={:.6}, φ={:.6}",
                    grid.theta(it),
                    grid.phi(jt)
                ),
            });
        }
        let gi2 = [g2[2] / det, -g2[1] / det, g2[0] / det];
        let gi2m = unpack2(&gi2);
        let det_e = dot3(&e[0], &e[0]) * dot3(&e[1], &e[1]) - dot3(&e[0], &e[1]).powi(2);
        let wq = grid.solid_weight(q) / grid.sin_theta_of_node(q);
        geo.metric[q] = g2;
        geo.metric_inv[q] = gi2;
        geo.det_metric[q] = det;
        geo.area_weight[q] = det.sqrt() * wq;
        geo.area_weight_euclid[q] = det_e.max(0.0).sqrt() * wq;

        // Outward unit normal from the metric-free conormal e_θ × e_φ.
        let nc = cross3(&e[0], &e[1]);
        let rvec = sub3(&x, &center);
        if !(dot3(&nc, &rvec) > 0.0) {
            return Err(CoreError::DegenerateSurface {
                node: q,
                message: "surface is not an outward graph over its center".into(),
            });
        }
        let len = gbar_dot(&gib, &nc, &nc).sqrt();
        let nu_cov = [nc[0] / len, nc[1] / len, nc[2] / len];
        let mut nu = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                nu[i] += sym_get(&gib, i, j) * nu_cov[j];
            }
        }
        geo.normal[q] = nu;
        geo.normal_cov[q] = nu_cov;

        // Second fundamental form A_AB = ν_i (x^i_AB + Γ̄^i_jk e_A^j e_B^k).
        let mut a2 = [0.0; 3];
        for a in 0..2 {
            for b in a..2 {
                let mut acc = 0.0;
                for i in 0..3 {
                    let mut t = xx[a][b][i];
                    for j in 0..3 {
                        for k in 0..3 {
                            t += gam[i][j][k] * e[a][j] * e[b][k];
                        }
                    }
                    acc += nu_cov[i] * t;
                }
                a2[sym2(a, b)] = acc;
            }
        }
        let h = gi2[0] * a2[0] + 2.0 * gi2[1] * a2[1] + gi2[2] * a2[2];
        let aring = [
            a2[0] - 0.5 * h * g2[0],
            a2[1] - 0.5 * h * g2[1],
            a2[2] - 0.5 * h * g2[2],
        ];
        geo.second_form[q] = a2;
        geo.mean_curvature[q] = h;
        geo.tracefree_form[q] = aring;
        geo.second_form_sq[q] = inner_2x2(&a2, &a2, &gi2m);
        geo.tracefree_sq[q] = inner_2x2(&aring, &aring, &gi2m);

        // Ambient curvature restricted to the surface.
        let mut k2 = [0.0; 3];
        for a in 0..2 {
            for b in a..2 {
                let mut acc = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        acc += sym_get(&jet.k, i, j) * e[a][i] * e[b][j];
                    }
                }
                k2[sym2(a, b)] = acc;
            }
        }
        let mut om = [0.0; 2];
        for (a, slot) in om.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    acc += sym_get(&jet.k, i, j) * nu[i] * e[a][j];
                }
            }
            *slot = acc;
        }
        let mut knn = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                knn += sym_get(&jet.k, i, j) * nu[i] * nu[j];
            }
        }
        geo.k_tan[q] = k2;
        geo.k_trace_tan[q] = gi2[0] * k2[0] + 2.0 * gi2[1] * k2[1] + gi2[2] * k2[2];
        geo.k_normal[q] = om;
        geo.k_normal_up[q] = [
            gi2m[0][0] * om[0] + gi2m[0][1] * om[1],
            gi2m[1][0] * om[0] + gi2m[1][1] * om[1],
        ];
        geo.k_nn[q] = knn;
        geo.k_normal_sq[q] = gi2m[0][0] * om[0] * om[0]
            + 2.0 * gi2m[0][1] * om[0] * om[1]
            + gi2m[1][1] * om[1] * om[1];
        geo.inner_a_k[q] = inner_2x2(&a2, &k2, &gi2m);
        geo.inner_k_k[q] = inner_2x2(&k2, &k2, &gi2m);

        let mut ricnn = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                ricnn += sym_get(&ric, i, j) * nu[i] * nu[j];
            }
        }
        geo.ricci_nn[q] = ricnn;
        geo.scalar_amb[q] = scal;
        geo.energy_density[q] = rho_c;
        geo.momentum_normal[q] = jmom[0] * nu[0] + jmom[1] * nu[1] + jmom[2] * nu[2];

        // Surface Christoffel symbols from the induced-metric derivatives
        // ∂_A g_BC = (∂_k ḡ_ij) e_A^k e_B^i e_C^j + ḡ(x_AB, e_C) + ḡ(e_B, x_AC).
        let mut dg2 = [[0.0; 3]; 2];
        for a in 0..2 {
            for b in 0..2 {
                for c in b..2 {
                    let mut acc = 0.0;
                    for k in 0..3 {
                        for i in 0..3 {
                            for j in 0..3 {
                                acc += jet.dg[k][sym(i, j)] * e[a][k] * e[b][i] * e[c][j];
                            }
                        }
                    }
                    acc += gbar_dot(&gb, &xx[a][b], &e[c]) + gbar_dot(&gb, &e[b], &xx[a][c]);
                    dg2[a][sym2(b, c)] = acc;
                }
            }
        }
        let mut gam2 = [0.0; 6];
        for c in 0..2 {
            for a in 0..2 {
                for b in a..2 {
                    let mut acc = 0.0;
                    for d in 0..2 {
                        acc += gi2m[c][d]
                            * (dg2[a][sym2(d, b)] + dg2[b][sym2(d, a)] - dg2[d][sym2(a, b)]);
                    }
                    gam2[c * 3 + sym2(a, b)] = 0.5 * acc;
                }
            }
        }
        geo.christoffel_surf[q] = gam2;
        geo.laplace_drift[q] = [
            -(gi2[0] * gam2[0] + 2.0 * gi2[1] * gam2[1] + gi2[2] * gam2[2]),
            -(gi2[0] * gam2[3] + 2.0 * gi2[1] * gam2[4] + gi2[2] * gam2[5]),
        ];

        // Tangential divergence of ω_A = K(ν, e_A), using the Weingarten
        // derivative ∂_A ν^i = -A_A^B e_B^i - Γ̄^i_jk ν^j e_A^k.
        let a2m = unpack2(&a2);
        let mut dnu = [[0.0; 3]; 2];
        for a in 0..2 {
            for i in 0..3 {
                let mut acc = 0.0;
                for b in 0..2 {
                    let mut aup = 0.0;
                    for c in 0..2 {
                        aup += gi2m[b][c] * a2m[c][a];
                    }
                    acc -= aup * e[b][i];
                }
                for j in 0..3 {
                    for k in 0..3 {
                        acc -= gam[i][j][k] * nu[j] * e[a][k];
                    }
                }
                dnu[a][i] = acc;
            }
        }
        let mut div = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                let mut dom = 0.0;
                for k in 0..3 {
                    for i in 0..3 {
                        for j in 0..3 {
                            dom += jet.dk[k][sym(i, j)] * e[a][k] * nu[i] * e[b][j];
                        }
                    }
                }
                for i in 0..3 {
                    for j in 0..3 {
                        dom += sym_get(&jet.k, i, j) * (dnu[a][i] * e[b][j] + nu[i] * xx[a][b][j]);
                    }
                }
                for c in 0..2 {
                    dom -= gam2[c * 3 + sym2(a, b)] * om[c];
                }
                div += gi2m[a][b] * dom;
            }
        }
        geo.div_k_normal[q] = div;

        // Radial conversion factors and tangential transport.
        let rr = norm3(&rvec);
        let nhat = [rvec[0] / rr, rvec[1] / rr, rvec[2] / rr];
        let ng = gbar_dot(&gb, &nhat, &nhat).sqrt();
        let speed = nu_cov[0] * nhat[0] + nu_cov[1] * nhat[1] + nu_cov[2] * nhat[2];
        let s_low = [gbar_dot(&gb, &nhat, &e[0]), gbar_dot(&gb, &nhat, &e[1])];
        geo.radial_unit[q] = nhat;
        geo.rho[q] = rr;
        geo.chart_radius[q] = norm3(&x);
        geo.radial_speed[q] = speed;
        geo.radial_norm_g[q] = ng;
        geo.w[q] = speed / ng;
        geo.transport_up[q] = [
            gi2m[0][0] * s_low[0] + gi2m[0][1] * s_low[1],
            gi2m[1][0] * s_low[0] + gi2m[1][1] * s_low[1],
        ];

        // Aggregates.
        let wmu = geo.area_weight[q];
        geo.area += wmu;
        geo.area_euclid += geo.area_weight_euclid[q];
        geo.willmore_integral += h * h * wmu;
        geo.gauss_bonnet_integral +=
            (scal - 2.0 * ricnn + h * h - geo.second_form_sq[q]) * wmu;
        for i in 0..3 {
            z_acc[i] += x[i] * geo.area_weight_euclid[q];
        }
        geo.min_rho = geo.min_rho.min(rr);
        geo.min_chart_radius = geo.min_chart_radius.min(geo.chart_radius[q]);
    }

    geo.area_radius = (geo.area / FOUR_PI).sqrt();
    for i in 0..3 {
        geo.center_euclid[i] = z_acc[i] / geo.area_euclid;
    }
    geo.hawking_mass = (geo.area / (4.0 * FOUR_PI)).sqrt()
        * (1.0 - geo.willmore_integral / (4.0 * FOUR_PI));
    Ok(geo)
}

/// Report of the three asymptotic-roundness inequalities that define the
/// admissible concentric class, each with its margin (`bound - value`;
/// nonnegative means satisfied). The scale inequality is evaluated
/// literally in chart units.
#[derive(Debug, Clone)]
pub struct ConcentricityReport {
    pub center_offset: f64,
    pub center_bound: f64,
    pub center_margin: f64,
    pub center_ok: bool,
    pub scale_value: f64,
    pub scale_bound: f64,
    pub scale_margin: f64,
    pub scale_ok: bool,
    pub willmore_defect: f64,
    pub willmore_bound: f64,
    pub willmore_margin: f64,
    pub willmore_ok: bool,
    pub passed: bool,
}

/// Checks membership in the concentric class of surfaces:
/// `|z| ≤ c_z σ + c₁ σ^{1-η}`, `σ^{4+η} ≤ min_Σ |x|^{5+2ε}`, and
/// `∫H² dμ - 16π ≤ c₁/σ^η` (genus 0).
pub fn concentricity_check(
    geo: &SurfaceGeometry,
    eps: f64,
    eta: f64,
    cz: f64,
    c1: f64,
) -> ConcentricityReport {
    let sigma = geo.area_radius;
    let z = norm3(&geo.center_euclid);
    let center_bound = cz * sigma + c1 * sigma.powf(1.0 - eta);
    let scale_value = sigma.powf(4.0 + eta);
    let scale_bound = geo.min_chart_radius.powf(5.0 + 2.0 * eps);
    let willmore_defect = geo.willmore_integral - 4.0 * FOUR_PI;
    let willmore_bound = c1 / sigma.powf(eta);
    let report = ConcentricityReport {
        center_offset: z,
        center_bound,
        center_margin: center_bound - z,
        center_ok: z <= center_bound,
        scale_value,
        scale_bound,
        scale_margin: scale_bound - scale_value,
        scale_ok: scale_value <= scale_bound,
        willmore_defect,
        willmore_bound,
        willmore_margin: willmore_bound - willmore_defect,
        willmore_ok: willmore_defect <= willmore_bound,
        passed: false,
    };
    ConcentricityReport {
        passed: report.center_ok && report.scale_ok && report.willmore_ok,
        ..report
    }
}

/// `L^p` norm of a node field with the induced measure (`p = ∞` takes
/// the pointwise supremum).
fn lp_norm(geo: &SurfaceGeometry, f: &Field, p: f64) -> f64 {
    if p.is_infinite() {
        f.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    } else {
        let mut acc = 0.0;
        for (q, &v) in f.iter().enumerate() {
            acc += v.abs().powf(p) * geo.area_weight[q];
        }
        acc.powf(1.0 / p)
    }
}

/// Area-radius-weighted Sobolev norm of a scalar field on the surface,
/// by the recursion `‖T‖_{W^{k+1,p}} = ‖T‖_{L^p} + σ‖∇T‖_{W^{k,p}}` for
/// `k ≤ 2`. Derivatives are covariant in the induced metric and computed
/// spectrally. Errors when `p < 1` or `k > 2`.
pub fn sobolev_norm(
    grid: &SphereGrid,
    geo: &SurfaceGeometry,
    f: &Field,
    k: usize,
    p: f64,
) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(CoreError::InvalidArgument(format!(
            "Lebesgue exponent p = {p} must be at least 1 (or infinite)"
        )));
    }
    if k > 2 {
        return Err(CoreError::InvalidArgument(format!(
            "Sobolev order k = {k} out of the supported range 0..=2"
        )));
    }
    if f.len() != geo.node_count() {
        return Err(CoreError::InvalidArgument(
            "field length does not match the surface grid".into(),
        ));
    }
    let sigma = geo.area_radius;
    let base = lp_norm(geo, f, p);
    if k == 0 {
        return Ok(base);
    }
    let der = grid.differentiate(f);
    let n = geo.node_count();
    let mut grad = Field::zeros(n);
    for q in 0..n {
        let gi = geo.metric_inv[q];
        let (ft, fp) = (der.dt[q], der.dp[q]);
        grad[q] = (gi[0] * ft * ft + 2.0 * gi[1] * ft * fp + gi[2] * fp * fp)
            .max(0.0)
            .sqrt();
    }
    if k == 1 {
        return Ok(base + sigma * lp_norm(geo, &grad, p));
    }
    // Covariant Hessian ∇_A∇_B f = ∂_A∂_B f - γ^C_AB ∂_C f.
    let mut hess_norm = Field::zeros(n);
    for q in 0..n {
        let gam2 = geo.christoffel_surf[q];
        let (ft, fp) = (der.dt[q], der.dp[q]);
        let mut hess = [0.0; 3];
        let d2 = [der.dtt[q], der.dtp[q], der.dpp[q]];
        for a in 0..2 {
            for b in a..2 {
                hess[sym2(a, b)] = d2[sym2(a, b)]
                    - gam2[sym2(a, b)] * ft
                    - gam2[3 + sym2(a, b)] * fp;
            }
        }
        let gi2m = unpack2(&geo.metric_inv[q]);
        hess_norm[q] = inner_2x2(&hess, &hess, &gi2m).max(0.0).sqrt();
    }
    Ok(base + sigma * (lp_norm(geo, &grad, p) + sigma * lp_norm(geo, &hess_norm, p)))
}

/// Umbilicity diagnostics: `(sup |Å|, σ^{-1}·(‖Å‖_{L²} + σ‖∇Å‖_{L²}))`.
/// The covariant derivative of `Å` uses spectral derivatives of its
/// coordinate components, so the second entry is a diagnostic (exact for
/// band-limited geometry, spectrally accurate otherwise).
pub fn umbilicity_report(grid: &SphereGrid, geo: &SurfaceGeometry) -> (f64, f64) {
    let n = geo.node_count();
    let sup = geo.sup_tracefree();
    let mut comp = [Field::zeros(n), Field::zeros(n), Field::zeros(n)];
    for q in 0..n {
        for s in 0..3 {
            comp[s][q] = geo.tracefree_form[q][s];
        }
    }
    let der: Vec<_> = comp.iter().map(|c| grid.differentiate(c)).collect();
    let mut grad_sq = Field::zeros(n);
    for q in 0..n {
        let gam2 = geo.christoffel_surf[q];
        let gi = unpack2(&geo.metric_inv[q]);
        let ar = unpack2(&geo.tracefree_form[q]);
        // ∂_C Å_AB per node, then the covariant correction.
        let mut cov = [[[0.0; 2]; 2]; 2];
        for c in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    let d = &der[sym2(a, b)];
                    let partial = if c == 0 { d.dt[q] } else { d.dp[q] };
                    let mut t = partial;
                    for dd in 0..2 {
                        t -= gam2[dd * 3 + sym2(c, a)] * ar[dd][b]
                            + gam2[dd * 3 + sym2(c, b)] * ar[a][dd];
                    }
                    cov[c][a][b] = t;
                }
            }
        }
        let mut acc = 0.0;
        for c in 0..2 {
            for e in 0..2 {
                for a in 0..2 {
                    for f0 in 0..2 {
                        for b in 0..2 {
                            for g0 in 0..2 {
                                acc += gi[c][e]
                                    * gi[a][f0]
                                    * gi[b][g0]
                                    * cov[c][a][b]
                                    * cov[e][f0][g0];
                            }
                        }
                    }
                }
            }
        }
        grad_sq[q] = acc.max(0.0);
    }
    let l2 = geo
        .tracefree_sq
        .iter()
        .zip(geo.area_weight.iter())
        .map(|(v, w)| v * w)
        .sum::<f64>()
        .max(0.0)
        .sqrt();
    let l2_grad = grad_sq
        .iter()
        .zip(geo.area_weight.iter())
        .map(|(v, w)| v * w)
        .sum::<f64>()
        .max(0.0)
        .sqrt();
    let sigma = geo.area_radius;
    (sup, (l2 + sigma * l2_grad) / sigma)
}

/// Contents of a surface dump file.
#[derive(Debug, Clone)]
pub struct SurfaceFile {
    pub lmax: usize,
    pub sigma: f64,
    pub b: f64,
    pub center: [f64; 3],
    pub rho: Vec<f64>,
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a surface dump: three header lines (`CESURF1`; band limit,
/// curvature index and weight; center coordinates) followed by the
/// `Nθ·Nφ` little-endian radius values in θ-major order. See the
/// repository README for the normative layout.
pub fn write_surface_file(path: &Path, file: &SurfaceFile) -> Result<()> {
    let ntheta = file.lmax + 1;
    let expected = ntheta * 2 * ntheta;
    if file.rho.len() != expected {
        return Err(CoreError::InvalidArgument(format!(
            "surface dump with band limit {} needs {} radius values, got {}",
            file.lmax,
            expected,
            file.rho.len()
        )));
    }
    let mut bytes = Vec::with_capacity(128 + 8 * expected);
    bytes.extend_from_slice(b"CESURF1\n");
    bytes.extend_from_slice(
        format!(
            "{} {} {}\n",
            file.lmax,
            fmt17(file.sigma),
            fmt17(file.b)
        )
        .as_bytes(),
    );
    bytes.extend_from_slice(
        format!(
            "{} {} {}\n",
            fmt17(file.center[0]),
            fmt17(file.center[1]),
            fmt17(file.center[2])
        )
        .as_bytes(),
    );
    for v in &file.rho {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

/// Reads a surface dump, rejecting malformed headers, payload size
/// mismatches, and non-finite radius values.
pub fn read_surface_file(path: &Path) -> Result<SurfaceFile> {
    let bytes = std::fs::read(path)?;
    let mut offset = 0usize;
    let mut next_line = |what: &str| -> Result<(String, usize)> {
        let start = offset;
        match bytes[offset..].iter().position(|&c| c == b'\n') {
            Some(k) => {
                let line = std::str::from_utf8(&bytes[start..start + k])
                    .map_err(|_| CoreError::ParseError {
                        offset: start,
                        message: format!("{what} is not valid UTF-8"),
                    })?
                    .to_string();
                offset = start + k + 1;
                Ok((line, start))
            }
            None => Err(CoreError::ParseError {
                offset: start,
                message: format!("missing newline after {what}"),
            }),
        }
    };

    let (magic, at) = next_line("magic line")?;
    if magic != "CESURF1" {
        return Err(CoreError::ParseError {
            offset: at,
            message: format!("bad magic {magic:?}, expected \"CESURF1\""),
        });
    }
    let (header, at) = next_line("header line")?;
    let tok: Vec<&str> = header.split_whitespace().collect();
    if tok.len() != 3 {
        return Err(CoreError::ParseError {
            offset: at,
            message: format!("header needs 3 fields (Lmax sigma b), got {}", tok.len()),
        });
    }
    let lmax: usize = tok[0].parse().map_err(|_| CoreError::ParseError {
        offset: at,
        message: format!("bad band limit {:?}", tok[0]),
    })?;
    let sigma: f64 = tok[1].parse().map_err(|_| CoreError::ParseError {
        offset: at,
        message: format!("bad curvature index {:?}", tok[1]),
    })?;
    let b: f64 = tok[2].parse().map_err(|_| CoreError::ParseError {
        offset: at,
        message: format!("bad curvature weight {:?}", tok[2]),
    })?;
    if lmax < 1 || !sigma.is_finite() || !b.is_finite() {
        return Err(CoreError::ParseError {
            offset: at,
            message: "band limit must be ≥ 1 and sigma, b finite".into(),
        });
    }
    let (cline, at) = next_line("center line")?;
    let ctok: Vec<&str> = cline.split_whitespace().collect();
    if ctok.len() != 3 {
        return Err(CoreError::ParseError {
            offset: at,
            message: format!("center line needs 3 fields, got {}", ctok.len()),
        });
    }
    let mut center = [0.0f64; 3];
    for (i, t) in ctok.iter().enumerate() {
        center[i] = t.parse().map_err(|_| CoreError::ParseError {
            offset: at,
            message: format!("bad center coordinate {t:?}"),
        })?;
        if !center[i].is_finite() {
            return Err(CoreError::ParseError {
                offset: at,
                message: format!("non-finite center coordinate {t:?}"),
            });
        }
    }

    let ntheta = lmax + 1;
    let count = ntheta * 2 * ntheta;
    let need = count * 8;
    let have = bytes.len() - offset;
    if have < need {
        return Err(CoreError::ParseError {
            offset: bytes.len(),
            message: format!("payload truncated: need {need} bytes, have {have}"),
        });
    }
    if have > need {
        return Err(CoreError::ParseError {
            offset: offset + need,
            message: format!("{} trailing bytes after the payload", have - need),
        });
    }
    let mut rho = Vec::with_capacity(count);
    for i in 0..count {
        let at = offset + 8 * i;
        let v = f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
        if !v.is_finite() {
            return Err(CoreError::ParseError {
                offset: at,
                message: format!("non-finite radius value at index {i}"),
            });
        }
        rho.push(v);
    }
    Ok(SurfaceFile {
        lmax,
        sigma,
        b,
        center,
        rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initialdata::{BowenYork, Flat, Schwarzschild};
    use crate::sphere::SphereGrid;

    fn round_geo(
        lmax: usize,
        center: [f64; 3],
        radius: f64,
        data: &dyn InitialData,
    ) -> SurfaceGeometry {
        let grid = SphereGrid::new(lmax).unwrap();
        RadialSurface::round(&grid, center, radius)
            .geometry(&grid, data)
            .unwrap()
    }

    /// Round sphere in flat data: every geometric field has its closed
    /// form.
    #[test]
    fn flat_round_sphere_geometry_exact() {
        let r = 3.0;
        let geo = round_geo(12, [0.0; 3], r, &Flat);
        for q in 0..geo.node_count() {
            assert!((geo.mean_curvature[q] + 2.0 / r).abs() < 1e-12);
            assert!(geo.tracefree_sq[q].abs() < 1e-24);
            assert!(geo.k_trace_tan[q].abs() < 1e-15);
            // Normal coincides with the radial direction.
            for i in 0..3 {
                assert!((geo.normal[q][i] - geo.radial_unit[q][i]).abs() < 1e-12);
            }
            assert!((geo.w[q] - 1.0).abs() < 1e-12);
            assert!(geo.transport_up[q][0].abs() < 1e-13);
            assert!(geo.transport_up[q][1].abs() < 1e-13);
        }
        assert!((geo.area - FOUR_PI * r * r).abs() < 1e-10);
        assert!((geo.area_radius - r).abs() < 1e-12);
        assert!(norm3(&geo.center_euclid) < 1e-12);
        assert!(geo.hawking_mass.abs() < 1e-12);
        assert!(geo.gauss_bonnet_defect() < 1e-10);
    }

    /// Centered coordinate spheres in the conformally flat static family:
    /// mean curvature and Hawking mass match their closed forms.
    #[test]
    fn schwarzschild_sphere_closed_forms() {
        let m = 1.0;
        let data = Schwarzschild::new(m);
        for &r in &[5.0, 10.0] {
            let geo = round_geo(12, [0.0; 3], r, &data);
            let x = m / (2.0 * r);
            let h_exact = -2.0 * (1.0 - x) / (r * (1.0 + x).powi(3));
            for q in 0..geo.node_count() {
                assert!(
                    (geo.mean_curvature[q] - h_exact).abs() < 1e-10,
                    "H mismatch at node {q}: {} vs {h_exact}",
                    geo.mean_curvature[q]
                );
                assert!(geo.k_trace_tan[q].abs() < 1e-15);
                assert!(geo.tracefree_sq[q].abs() < 1e-20);
            }
            assert!((geo.hawking_mass - m).abs() < 1e-10);
            // Area radius of the conformal sphere: σ = r(1+m/2r)².
            assert!((geo.area_radius - r * (1.0 + x).powi(2)).abs() < 1e-9);
            // Conversion factors: ν is radial, so w ≡ 1 and ḡ(ν,n) = φ².
            for q in 0..geo.node_count() {
                assert!((geo.w[q] - 1.0).abs() < 1e-12);
                assert!((geo.radial_speed[q] - (1.0 + x).powi(2)).abs() < 1e-12);
            }
        }
    }

    /// Expansion weights: vacuum-like data keeps Θ_b = H; boosted data
    /// separates the two null expansions by 2·tr_Σ K with its closed form.
    #[test]
    fn expansion_weight_behavior() {
        let grid = SphereGrid::new(12).unwrap();
        let geo = round_geo(12, [0.0; 3], 4.0, &Schwarzschild::new(1.0));
        for &b in &[-1.0, -0.3, 0.0, 0.5, 1.0] {
            let ex = geo.expansion(b).unwrap();
            for q in 0..geo.node_count() {
                assert!((ex.theta[q] - geo.mean_curvature[q]).abs() < 1e-14);
            }
        }
        assert!(geo.expansion(1.2).is_err());

        let m = 1.0;
        let r = 50.0;
        let p = [0.01, 0.0, 0.0];
        let data = BowenYork::new(m, p);
        let geo = round_geo(12, [0.0; 3], r, &data);
        let plus = geo.expansion(1.0).unwrap();
        let minus = geo.expansion(-1.0).unwrap();
        let phi4 = (1.0 + m / (2.0 * r)).powi(4);
        for q in 0..geo.node_count() {
            let n = grid.radial_frame(q).n;
            let pn = p[0] * n[0] + p[1] * n[1] + p[2] * n[2];
            let exact = -6.0 * pn / (r * r * phi4);
            let got = plus.theta[q] - minus.theta[q];
            assert!(
                (got - exact).abs() < 1e-12,
                "2 tr_Σ K mismatch: {got} vs {exact}"
            );
            // Flat-background approximation −6(P·n)/r² is good to O(m/r).
            assert!((got + 6.0 * pn / (r * r)).abs() < 6.0 * pn.abs() / (r * r) * 0.1 + 1e-15);
        }
    }

    /// Euclidean coordinate center: exact for translated round spheres,
    /// quadratically small for mixed-parity shape perturbations.
    #[test]
    fn coordinate_center_translation_and_parity() {
        let geo = round_geo(12, [1.0, 2.0, 3.0], 5.0, &Flat);
        for i in 0..3 {
            assert!((geo.center_euclid[i] - [1.0, 2.0, 3.0][i]).abs() < 1e-12);
        }

        let grid = SphereGrid::new(16).unwrap();
        let r = 10.0;
        let z_of = |a: f64| -> f64 {
            let mut c = Coeffs::zeros(grid.coeff_count());
            c[SphereGrid::coeff_of(0, 0)] = r * (FOUR_PI).sqrt() / 2.0; // Y00 = 1/√(4π)
            c[SphereGrid::coeff_of(2, 0)] = a;
            c[SphereGrid::coeff_of(3, 1)] = a;
            let s = RadialSurface::from_coeffs(&grid, [0.0; 3], &c);
            let geo = s.geometry(&grid, &Flat).unwrap();
            norm3(&geo.center_euclid)
        };
        let z1 = z_of(0.05);
        let z2 = z_of(0.025);
        assert!(z1 > 1e-8, "offset unexpectedly tiny: {z1}");
        let ratio = z1 / z2;
        assert!(
            (3.5..=4.5).contains(&ratio),
            "center offset is not quadratic in the amplitude: ratio {ratio}"
        );
    }

    /// Concentricity examples: centered spheres pass, an off-center
    /// sphere violates the first inequality.
    #[test]
    fn concentricity_class_examples() {
        let geo = round_geo(10, [0.0; 3], 10.0, &Flat);
        let rep = concentricity_check(&geo, 0.5, 0.1, 0.0, 1.0);
        assert!(rep.passed);
        assert!(rep.center_margin >= 0.0 && rep.willmore_margin >= 0.0);

        let data = Schwarzschild::new(1.0);
        let geo = round_geo(10, [0.0; 3], 100.0, &data);
        let rep = concentricity_check(&geo, 0.5, 0.1, 0.0, 1.0);
        assert!(rep.passed, "{rep:?}");

        let geo = round_geo(10, [10.0, 0.0, 0.0], 10.0, &Flat);
        let rep = concentricity_check(&geo, 0.5, 0.1, 0.1, 1.0);
        assert!(!rep.center_ok && !rep.passed);
    }

    /// Sobolev norms: constants, the first eigenfunction identity
    /// `‖Y₁₀‖_{W^{1,2}} = 1 + √2` on the unit sphere, monotonicity in k,
    /// and rejection of p < 1.
    #[test]
    fn sobolev_norm_examples() {
        let grid = SphereGrid::new(10).unwrap();
        let r = 7.0;
        let s = RadialSurface::round(&grid, [0.0; 3], r);
        let geo = s.geometry(&grid, &Flat).unwrap();
        let ones = Field::from_element(grid.node_count(), 1.0);
        let l2 = sobolev_norm(&grid, &geo, &ones, 0, 2.0).unwrap();
        assert!((l2 - FOUR_PI.sqrt() * r).abs() < 1e-10);

        let unit = RadialSurface::round(&grid, [0.0; 3], 1.0);
        let geo1 = unit.geometry(&grid, &Flat).unwrap();
        let mut c = Coeffs::zeros(grid.coeff_count());
        c[SphereGrid::coeff_of(1, 0)] = 1.0;
        let y10 = grid.synthesize(&c);
        let w12 = sobolev_norm(&grid, &geo1, &y10, 1, 2.0).unwrap();
        assert!(
            (w12 - (1.0 + 2.0f64.sqrt())).abs() < 1e-10,
            "W^{{1,2}} of Y10: {w12}"
        );

        // Monotonicity across orders for a generic field, several p.
        let mut f = Field::zeros(grid.node_count());
        for q in 0..grid.node_count() {
            f[q] = (0.3 + q as f64 * 0.7).sin();
        }
        for &p in &[1.0, 2.0, 3.5, f64::INFINITY] {
            let n0 = sobolev_norm(&grid, &geo, &f, 0, p).unwrap();
            let n1 = sobolev_norm(&grid, &geo, &f, 1, p).unwrap();
            let n2 = sobolev_norm(&grid, &geo, &f, 2, p).unwrap();
            assert!(n0 <= n1 && n1 <= n2);
        }
        assert!(sobolev_norm(&grid, &geo, &f, 1, 0.5).is_err());
        assert!(sobolev_norm(&grid, &geo, &f, 3, 2.0).is_err());
    }

    /// Umbilicity: spheres in spherically symmetric data are exactly
    /// umbilic; both report entries vanish.
    #[test]
    fn umbilicity_of_symmetric_spheres() {
        let grid = SphereGrid::new(10).unwrap();
        let geo = RadialSurface::round(&grid, [0.0; 3], 5.0)
            .geometry(&grid, &Flat)
            .unwrap();
        let (sup, h1) = umbilicity_report(&grid, &geo);
        assert!(sup < 1e-12 && h1 < 1e-11, "({sup}, {h1})");

        let geo = RadialSurface::round(&grid, [0.0; 3], 10.0)
            .geometry(&grid, &Schwarzschild::new(1.0))
            .unwrap();
        let (sup, h1) = umbilicity_report(&grid, &geo);
        assert!(sup < 1e-10 && h1 < 1e-10, "({sup}, {h1})");
    }

    /// Closed-surface integral identities on a bumpy surface: Gauss
    /// curvature integrates to 8π and the tangential divergence of
    /// K(ν,·) integrates to zero.
    #[test]
    fn closed_surface_integral_identities() {
        let grid = SphereGrid::new(20).unwrap();
        let mut c = Coeffs::zeros(grid.coeff_count());
        c[SphereGrid::coeff_of(0, 0)] = 10.0 * FOUR_PI.sqrt() / 2.0;
        c[SphereGrid::coeff_of(2, 0)] = 0.2;
        c[SphereGrid::coeff_of(3, 1)] = 0.1;
        let s = RadialSurface::from_coeffs(&grid, [0.0; 3], &c);

        let data = Schwarzschild::new(1.0);
        let geo = s.geometry(&grid, &data).unwrap();
        assert!(
            geo.gauss_bonnet_defect() < 1e-8,
            "Gauss integral defect {}",
            geo.gauss_bonnet_defect()
        );

        let by = BowenYork::new(1.0, [0.02, -0.01, 0.015]);
        let geo = s.geometry(&grid, &by).unwrap();
        let div = Field::from_iterator(geo.node_count(), geo.div_k_normal.iter().copied());
        let total = geo.integrate(&div);
        let scale: f64 = geo
            .div_k_normal
            .iter()
            .zip(geo.area_weight.iter())
            .map(|(d, w)| d.abs() * w)
            .sum();
        assert!(
            total.abs() < 1e-9 * scale.max(1.0),
            "∫ div_Σ K(ν,·) dμ = {total} (scale {scale})"
        );
    }

    /// Closed form for div_Σ K(ν,·) on centered spheres in boosted data:
    /// ω = (3/(2rφ²)) d(P·n) gives div = −3(P·n)/(r³φ⁶) exactly.
    #[test]
    fn divergence_of_boosted_curvature_closed_form() {
        let m = 1.0;
        let r = 6.0;
        let p = [0.3, -0.2, 0.5];
        let grid = SphereGrid::new(10).unwrap();
        let geo = RadialSurface::round(&grid, [0.0; 3], r)
            .geometry(&grid, &BowenYork::new(m, p))
            .unwrap();
        let phi = 1.0 + m / (2.0 * r);
        for q in 0..geo.node_count() {
            let n = grid.radial_frame(q).n;
            let pn = p[0] * n[0] + p[1] * n[1] + p[2] * n[2];
            let exact = -3.0 * pn / (r.powi(3) * phi.powi(6));
            assert!(
                (geo.div_k_normal[q] - exact).abs() < 1e-12,
                "node {q}: {} vs {exact}",
                geo.div_k_normal[q]
            );
        }
    }

    /// Flat-space scaling: radii scaled by a power of two scale H and the
    /// area exactly; a generic factor scales them to roundoff.
    #[test]
    fn scaling_invariance_in_flat_space() {
        let grid = SphereGrid::new(14).unwrap();
        let mut c = Coeffs::zeros(grid.coeff_count());
        c[SphereGrid::coeff_of(0, 0)] = 6.0 * FOUR_PI.sqrt() / 2.0;
        c[SphereGrid::coeff_of(2, 1)] = 0.15;
        c[SphereGrid::coeff_of(4, -2)] = 0.05;
        let s1 = RadialSurface::from_coeffs(&grid, [0.0; 3], &c);
        let g1 = s1.geometry(&grid, &Flat).unwrap();

        let lam = 4.0;
        let s2 = RadialSurface {
            center: [0.0; 3],
            rho: &s1.rho * lam,
        };
        let g2 = s2.geometry(&grid, &Flat).unwrap();
        for q in 0..g1.node_count() {
            assert_eq!(
                g2.mean_curvature[q],
                g1.mean_curvature[q] / lam,
                "power-of-two scaling must be exact at node {q}"
            );
        }
        assert!((g2.area - lam * lam * g1.area).abs() < 1e-11 * g1.area);

        let lam = 3.7;
        let s3 = RadialSurface {
            center: [0.0; 3],
            rho: &s1.rho * lam,
        };
        let g3 = s3.geometry(&grid, &Flat).unwrap();
        for q in 0..g1.node_count() {
            assert!((g3.mean_curvature[q] - g1.mean_curvature[q] / lam).abs() < 1e-14);
        }
        assert!((g3.area - lam * lam * g1.area).abs() < 1e-12 * g3.area);
    }

    /// Recentring represents the same point set: mean curvature agrees at
    /// matched points to interpolation accuracy, and the new radii are
    /// consistent with the stored point positions.
    #[test]
    fn reparametrization_preserves_mean_curvature() {
        let grid = SphereGrid::new(20).unwrap();
        let mut c = Coeffs::zeros(grid.coeff_count());
        c[SphereGrid::coeff_of(0, 0)] = 8.0 * FOUR_PI.sqrt() / 2.0;
        c[SphereGrid::coeff_of(2, 0)] = 0.15;
        c[SphereGrid::coeff_of(3, -2)] = 0.08;
        let s = RadialSurface::from_coeffs(&grid, [0.0; 3], &c);
        let data = Schwarzschild::new(1.0);
        let g_old = s.geometry(&grid, &data).unwrap();
        let h_old = Field::from_iterator(
            g_old.node_count(),
            g_old.mean_curvature.iter().copied(),
        );
        let h_coeffs = grid.analyze(&h_old);

        let shift = [0.05, -0.03, 0.02];
        let s2 = s.recentered(&grid, shift).unwrap();
        let g_new = s2.geometry(&grid, &data).unwrap();
        let mut worst = 0.0f64;
        for q in 0..g_new.node_count() {
            let u = sub3(&g_new.pos[q], &s.center);
            let r = norm3(&u);
            let (th, ph) = dir_angles(&[u[0] / r, u[1] / r, u[2] / r]);
            let h_interp = grid.evaluate_at(&h_coeffs, th, ph);
            worst = worst.max((h_interp - g_new.mean_curvature[q]).abs());
        }
        assert!(worst < 1e-7, "matched-point H deviation {worst}");
    }

    /// Normal and trace identities hold pointwise on a generic surface.
    #[test]
    fn orthonormality_and_trace_invariants() {
        let grid = SphereGrid::new(16).unwrap();
        let mut c = Coeffs::zeros(grid.coeff_count());
        c[SphereGrid::coeff_of(0, 0)] = 7.0 * FOUR_PI.sqrt() / 2.0;
        c[SphereGrid::coeff_of(1, 1)] = 0.2;
        c[SphereGrid::coeff_of(2, -1)] = 0.15;
        c[SphereGrid::coeff_of(4, 3)] = 0.05;
        let s = RadialSurface::from_coeffs(&grid, [0.0; 3], &c);
        let by = BowenYork::new(0.8, [0.05, 0.02, -0.03]);
        let geo = s.geometry(&grid, &by).unwrap();
        for q in 0..geo.node_count() {
            let nu = geo.normal[q];
            let nu_cov = geo.normal_cov[q];
            let unit: f64 = (0..3).map(|i| nu[i] * nu_cov[i]).sum();
            assert!((unit - 1.0).abs() < 1e-12);
            let ot: f64 = (0..3).map(|i| nu_cov[i] * geo.e_theta[q][i]).sum();
            let op: f64 = (0..3).map(|i| nu_cov[i] * geo.e_phi[q][i]).sum();
            assert!(ot.abs() < 1e-12 && op.abs() < 1e-12);
            // Trace of Å vanishes; H is the trace of A.
            let gi = geo.metric_inv[q];
            let ar = geo.tracefree_form[q];
            let tr = gi[0] * ar[0] + 2.0 * gi[1] * ar[1] + gi[2] * ar[2];
            assert!(tr.abs() < 1e-12 * (1.0 + geo.second_form_sq[q].sqrt()));
            let a = geo.second_form[q];
            let h = gi[0] * a[0] + 2.0 * gi[1] * a[1] + gi[2] * a[2];
            assert!((h - geo.mean_curvature[q]).abs() < 1e-13);
        }
    }

    /// The explicit-position front-end reproduces the radial-graph
    /// geometry when fed the same embedding.
    #[test]
    fn parametric_front_end_matches_radial_graph() {
        let grid = SphereGrid::new(16).unwrap();
        let mut c = Coeffs::zeros(grid.coeff_count());
        c[SphereGrid::coeff_of(0, 0)] = 9.0 * FOUR_PI.sqrt() / 2.0;
        c[SphereGrid::coeff_of(2, 0)] = 0.3;
        c[SphereGrid::coeff_of(3, 2)] = 0.1;
        let center = [0.4, -0.2, 0.1];
        let s = RadialSurface::from_coeffs(&grid, center, &c);
        let data = Schwarzschild::new(1.0);
        let g_rad = s.geometry(&grid, &data).unwrap();

        // The radius has band limit lmax-2, so ρ·n (degree +1) is exactly
        // representable and the two pipelines see the same embedding.
        let n = grid.node_count();
        let mut coords: [Coeffs; 3] = [
            Coeffs::zeros(grid.coeff_count()),
            Coeffs::zeros(grid.coeff_count()),
            Coeffs::zeros(grid.coeff_count()),
        ];
        for i in 0..3 {
            let mut comp = Field::zeros(n);
            for q in 0..n {
                comp[q] = g_rad.pos[q][i];
            }
            coords[i] = grid.analyze(&comp);
        }
        let g_par = parametric_geometry(&grid, &data, center, &coords).unwrap();
        for q in 0..n {
            assert!((g_par.mean_curvature[q] - g_rad.mean_curvature[q]).abs() < 1e-11);
            assert!((g_par.k_trace_tan[q] - g_rad.k_trace_tan[q]).abs() < 1e-12);
        }
        assert!((g_par.area - g_rad.area).abs() < 1e-9 * g_rad.area);
    }

    /// Degenerate inputs are rejected with the offending node named.
    #[test]
    fn degenerate_surfaces_rejected() {
        let grid = SphereGrid::new(8).unwrap();
        let mut rho = Field::from_element(grid.node_count(), 5.0);
        rho[3] = -1.0;
        let s = RadialSurface {
            center: [0.0; 3],
            rho,
        };
        match s.geometry(&grid, &Flat) {
            Err(CoreError::DegenerateSurface { .. }) => {}
            Err(e) => panic!("expected degenerate-surface error, got {e:?}"),
            Ok(_) => panic!("expected degenerate-surface error, got a geometry"),
        }

        // Sphere reaching inside the provider's inner boundary.
        let data = Schwarzschild::new(1.0);
        let s = RadialSurface::round(&grid, [0.0; 3], 0.4);
        assert!(matches!(
            s.geometry(&grid, &data),
            Err(CoreError::DomainError { .. })
        ));
    }

    /// Surface dump round-trip is bitwise; malformed files are rejected
    /// with byte offsets.
    #[test]
    fn surface_file_round_trip_and_rejection() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("leaf.cesurf");
        let lmax = 6usize;
        let count = (lmax + 1) * 2 * (lmax + 1);
        let rho: Vec<f64> = (0..count).map(|i| 10.0 + (i as f64) * 1e-3).collect();
        let file = SurfaceFile {
            lmax,
            sigma: 10.5,
            b: -0.25,
            center: [0.1, -0.2, 0.3],
            rho,
        };
        write_surface_file(&path, &file).unwrap();
        let back = read_surface_file(&path).unwrap();
        assert_eq!(back.lmax, file.lmax);
        assert_eq!(back.sigma, file.sigma);
        assert_eq!(back.b, file.b);
        assert_eq!(back.center, file.center);
        assert_eq!(back.rho, file.rho);

        // Wrong magic.
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0] = b'X';
        let bad = dir.path().join("bad_magic.cesurf");
        std::fs::write(&bad, &bytes).unwrap();
        assert!(matches!(
            read_surface_file(&bad),
            Err(CoreError::ParseError { offset: 0, .. })
        ));

        // Truncated payload.
        let bytes = std::fs::read(&path).unwrap();
        let trunc = dir.path().join("trunc.cesurf");
        std::fs::write(&trunc, &bytes[..bytes.len() - 8]).unwrap();
        match read_surface_file(&trunc) {
            Err(CoreError::ParseError { message, .. }) => {
                assert!(message.contains("truncated"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }

        // Non-finite payload value.
        let mut bytes = std::fs::read(&path).unwrap();
        let payload_start = bytes.len() - 8 * count;
        let at = payload_start + 8 * 5;
        bytes[at..at + 8].copy_from_slice(&f64::NAN.to_le_bytes());
        let nanf = dir.path().join("nan.cesurf");
        std::fs::write(&nanf, &bytes).unwrap();
        match read_surface_file(&nanf) {
            Err(CoreError::ParseError { offset, .. }) => assert_eq!(offset, at),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
