//! Evaluation of asymptotically flat initial data sets `(M, g, K)`.
//!
//! A provider returns, at any admissible Cartesian point, the full
//! second-order jet of the Riemannian metric and the first-order jet of
//! the extrinsic curvature. All downstream geometry (Christoffel
//! symbols, curvature, constraint densities, surface data) is assembled
//! pointwise from these jets, so a provider is the single source of
//! truth about the ambient data.
//!
//! Symmetric 3x3 tensors are stored in the packed order
//! `(11, 12, 13, 22, 23, 33)`.

mod families;
mod gridfile;

pub mod audit;

pub use families::{BowenYork, Flat, Perturbed, Schwarzschild};
pub use gridfile::GridDataSet;

use crate::error::Result;

/// Packed index of the symmetric pair `(i, j)`.
#[inline]
pub fn sym(i: usize, j: usize) -> usize {
    const IDX: [[usize; 3]; 3] = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];
    IDX[i][j]
}

/// Decay and scale parameters advertised by a provider.
#[derive(Debug, Clone, Copy)]
pub struct ProviderMetadata {
    /// Mass scale of the family (0 when not applicable).
    pub mass_param: f64,
    /// Linear-momentum parameter of the family (zero when N/A).
    pub momentum_param: [f64; 3],
    /// Decay exponent: `|g - δ| = O(r^{-1/2-eps})` and correspondingly
    /// for derivatives, curvature and `K`.
    pub eps: f64,
    /// Points with `|x| < r_inner` are outside the evaluation domain.
    pub r_inner: f64,
}

/// Second-order jet of `g` and first-order jet of `K` at one point.
#[derive(Debug, Clone)]
pub struct AmbientJet {
    /// Metric components `g_ij`.
    pub g: [f64; 6],
    /// `dg[k][ab] = ∂_k g_ab`.
    pub dg: [[f64; 6]; 3],
    /// `ddg[l][k][ab] = ∂_l ∂_k g_ab` (symmetric in `l, k`).
    pub ddg: [[[f64; 6]; 3]; 3],
    /// Extrinsic curvature components `K_ij`.
    pub k: [f64; 6],
    /// `dk[m][ab] = ∂_m K_ab`.
    pub dk: [[f64; 6]; 3],
}

impl AmbientJet {
    /// Jet of flat data: `g = δ`, `K = 0`.
    pub fn flat() -> Self {
        AmbientJet {
            g: [1.0, 0.0, 0.0, 1.0, 0.0, 1.0],
            dg: [[0.0; 6]; 3],
            ddg: [[[0.0; 6]; 3]; 3],
            k: [0.0; 6],
            dk: [[0.0; 6]; 3],
        }
    }

    #[inline]
    pub fn g_at(&self, i: usize, j: usize) -> f64 {
        self.g[sym(i, j)]
    }

    #[inline]
    pub fn k_at(&self, i: usize, j: usize) -> f64 {
        self.k[sym(i, j)]
    }

    /// Inverse metric, packed.
    pub fn g_inv(&self) -> [f64; 6] {
        invert_sym(&self.g)
    }

    /// Christoffel symbols `Γ^k_{ij}`, `gamma[k][i][j]`.
    pub fn christoffel(&self) -> [[[f64; 3]; 3]; 3] {
        let gi = self.g_inv();
        let mut gamma = [[[0.0; 3]; 3]; 3];
        for k in 0..3 {
            for i in 0..3 {
                for j in i..3 {
                    let mut acc = 0.0;
                    for l in 0..3 {
                        acc += sym_get(&gi, k, l)
                            * (self.dg[i][sym(l, j)] + self.dg[j][sym(l, i)]
                                - self.dg[l][sym(i, j)]);
                    }
                    gamma[k][i][j] = 0.5 * acc;
                    gamma[k][j][i] = gamma[k][i][j];
                }
            }
        }
        gamma
    }

    /// Ricci tensor (packed) and scalar curvature.
    ///
    /// `Ric_ij = ∂_k Γ^k_{ij} - ∂_i Γ^k_{kj} + Γ^k_{kl} Γ^l_{ij}
    ///           - Γ^k_{il} Γ^l_{kj}`.
    pub fn ricci(&self) -> ([f64; 6], f64) {
        let gi = self.g_inv();
        let gamma = self.christoffel();
        let dgamma = self.dchristoffel(&gi);
        let mut ric = [0.0; 6];
        for i in 0..3 {
            for j in i..3 {
                let mut acc = 0.0;
                for k in 0..3 {
                    acc += dgamma[k][k][i][j] - dgamma[i][k][k][j];
                    for l in 0..3 {
                        acc += gamma[k][k][l] * gamma[l][i][j]
                            - gamma[k][i][l] * gamma[l][k][j];
                    }
                }
                ric[sym(i, j)] = acc;
            }
        }
        let mut scal = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                scal += sym_get(&gi, i, j) * sym_get(&ric, i, j);
            }
        }
        (ric, scal)
    }

    /// `∂_m Γ^k_{ij}`, indexed `dgamma[m][k][i][j]`.
    fn dchristoffel(&self, gi: &[f64; 6]) -> [[[[f64; 3]; 3]; 3]; 3] {
        // ∂_m g^{kl} = -g^{ka} g^{lb} ∂_m g_{ab}
        let mut dgi = [[0.0f64; 6]; 3];
        for m in 0..3 {
            for k in 0..3 {
                for l in k..3 {
                    let mut acc = 0.0;
                    for a in 0..3 {
                        for b in 0..3 {
                            acc -= sym_get(gi, k, a)
                                * sym_get(gi, l, b)
                                * self.dg[m][sym(a, b)];
                        }
                    }
                    dgi[m][sym(k, l)] = acc;
                }
            }
        }
        let mut dgamma = [[[[0.0; 3]; 3]; 3]; 3];
        for m in 0..3 {
            for k in 0..3 {
                for i in 0..3 {
                    for j in i..3 {
                        let mut acc = 0.0;
                        for l in 0..3 {
                            let bracket = self.dg[i][sym(l, j)] + self.dg[j][sym(l, i)]
                                - self.dg[l][sym(i, j)];
                            let dbracket = self.ddg[m][i][sym(l, j)]
                                + self.ddg[m][j][sym(l, i)]
                                - self.ddg[m][l][sym(i, j)];
                            acc += dgi[m][sym(k, l)] * bracket
                                + sym_get(gi, k, l) * dbracket;
                        }
                        dgamma[m][k][i][j] = 0.5 * acc;
                        dgamma[m][k][j][i] = dgamma[m][k][i][j];
                    }
                }
            }
        }
        dgamma
    }

    /// Trace of `K` with respect to `g`.
    pub fn mean_curvature_trace(&self) -> f64 {
        let gi = self.g_inv();
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                acc += sym_get(&gi, i, j) * sym_get(&self.k, i, j);
            }
        }
        acc
    }

    /// Momentum density `J_i = [div(tr K g - K)]_i
    ///                      = ∂_i tr K - g^{jk} ∇_k K_{ji}`.
    pub fn momentum_density(&self) -> [f64; 3] {
        let gi = self.g_inv();
        let gamma = self.christoffel();
        // ∂_m tr K = ∂_m g^{ij} K_ij + g^{ij} ∂_m K_ij
        let mut dtr = [0.0; 3];
        for m in 0..3 {
            let mut acc = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    let mut dgi = 0.0;
                    for a in 0..3 {
                        for b in 0..3 {
                            dgi -= sym_get(&gi, i, a)
                                * sym_get(&gi, j, b)
                                * self.dg[m][sym(a, b)];
                        }
                    }
                    acc += dgi * sym_get(&self.k, i, j)
                        + sym_get(&gi, i, j) * self.dk[m][sym(i, j)];
                }
            }
            dtr[m] = acc;
        }
        let mut jm = [0.0; 3];
        for i in 0..3 {
            let mut div = 0.0;
            for j in 0..3 {
                for kk in 0..3 {
                    let mut cov = self.dk[kk][sym(j, i)];
                    for l in 0..3 {
                        cov -= gamma[l][kk][j] * sym_get(&self.k, l, i)
                            + gamma[l][kk][i] * sym_get(&self.k, j, l);
                    }
                    div += sym_get(&gi, j, kk) * cov;
                }
            }
            jm[i] = dtr[i] - div;
        }
        jm
    }

    /// Constraint densities `(ρ, J)` of the data:
    /// `2ρ = R - |K|² + (tr K)²`, `J = div(tr K g - K)`.
    pub fn constraint_densities(&self) -> (f64, [f64; 3]) {
        let gi = self.g_inv();
        let (_, scal) = self.ricci();
        let tr = self.mean_curvature_trace();
        let mut ksq = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for a in 0..3 {
                    for b in 0..3 {
                        ksq += sym_get(&gi, i, a)
                            * sym_get(&gi, j, b)
                            * sym_get(&self.k, i, j)
                            * sym_get(&self.k, a, b);
                    }
                }
            }
        }
        (0.5 * (scal - ksq + tr * tr), self.momentum_density())
    }
}

/// Reads a packed symmetric tensor at `(i, j)`.
#[inline]
pub fn sym_get(t: &[f64; 6], i: usize, j: usize) -> f64 {
    t[sym(i, j)]
}

/// Inverse of a packed symmetric 3x3 matrix.
pub fn invert_sym(g: &[f64; 6]) -> [f64; 6] {
    let (a, b, c, d, e, f) = (g[0], g[1], g[2], g[3], g[4], g[5]);
    let det = a * (d * f - e * e) - b * (b * f - e * c) + c * (b * e - d * c);
    let inv_det = 1.0 / det;
    [
        (d * f - e * e) * inv_det,
        (c * e - b * f) * inv_det,
        (b * e - c * d) * inv_det,
        (a * f - c * c) * inv_det,
        (b * c - a * e) * inv_det,
        (a * d - b * b) * inv_det,
    ]
}

/// Determinant of a packed symmetric 3x3 matrix.
pub fn det_sym(g: &[f64; 6]) -> f64 {
    let (a, b, c, d, e, f) = (g[0], g[1], g[2], g[3], g[4], g[5]);
    a * (d * f - e * e) - b * (b * f - e * c) + c * (b * e - d * c)
}

/// An initial data set `(g, K)` evaluable on `{|x| >= r_inner}` (or a
/// box, for gridded data).
pub trait InitialData: Send + Sync {
    fn metadata(&self) -> ProviderMetadata;

    /// Full jet at a Cartesian point; errors when the point is outside
    /// the evaluation domain.
    fn jet(&self, x: [f64; 3]) -> Result<AmbientJet>;
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Central finite differences of the metric validate the exact jet
    /// derivatives to the expected truncation order.
    pub(crate) fn check_jet_consistency(data: &dyn InitialData, x: [f64; 3], tol: f64) {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let h = 1e-4 * r;
        let j0 = data.jet(x).unwrap();
        for dir in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[dir] += h;
            xm[dir] -= h;
            let jp = data.jet(xp).unwrap();
            let jm = data.jet(xm).unwrap();
            for ab in 0..6 {
                let fd = (jp.g[ab] - jm.g[ab]) / (2.0 * h);
                let scale = j0.dg[dir][ab].abs().max(1.0 / r);
                assert!(
                    (fd - j0.dg[dir][ab]).abs() <= tol * scale,
                    "dg[{dir}][{ab}]: fd {fd} vs jet {}",
                    j0.dg[dir][ab]
                );
                let fdk = (jp.k[ab] - jm.k[ab]) / (2.0 * h);
                let scale_k = j0.dk[dir][ab].abs().max(1.0 / (r * r));
                assert!(
                    (fdk - j0.dk[dir][ab]).abs() <= tol * scale_k,
                    "dk[{dir}][{ab}]: fd {fdk} vs jet {}",
                    j0.dk[dir][ab]
                );
                for d2 in 0..3 {
                    let fdd = (jp.dg[d2][ab] - jm.dg[d2][ab]) / (2.0 * h);
                    let scale2 = j0.ddg[dir][d2][ab].abs().max(1.0 / (r * r));
                    assert!(
                        (fdd - j0.ddg[dir][d2][ab]).abs() <= tol * scale2,
                        "ddg[{dir}][{d2}][{ab}]: fd {fdd} vs jet {}",
                        j0.ddg[dir][d2][ab]
                    );
                }
            }
        }
    }

    #[test]
    fn flat_jet_is_trivial() {
        let data = Flat::new();
        let j = data.jet([3.0, -2.0, 5.0]).unwrap();
        assert_eq!(j.g, [1.0, 0.0, 0.0, 1.0, 0.0, 1.0]);
        let gamma = j.christoffel();
        for k in 0..3 {
            for i in 0..3 {
                for jj in 0..3 {
                    assert_eq!(gamma[k][i][jj], 0.0);
                }
            }
        }
        let (ric, scal) = j.ricci();
        assert!(ric.iter().all(|v| v.abs() < 1e-15));
        assert!(scal.abs() < 1e-15);
        let (rho, jm) = j.constraint_densities();
        assert_eq!(rho, 0.0);
        assert_eq!(jm, [0.0; 3]);
    }

    #[test]
    fn jet_derivatives_match_finite_differences() {
        let pts = [[7.0, -3.0, 2.0], [15.0, 4.0, -9.0], [-6.0, 6.0, 6.0]];
        let providers: Vec<Box<dyn InitialData>> = vec![
            Box::new(Schwarzschild::new(1.0)),
            Box::new(BowenYork::new(1.0, [0.01, -0.02, 0.005])),
            Box::new(Perturbed::new(1.0, 0.05, 0.25)),
        ];
        for p in &providers {
            for &x in &pts {
                check_jet_consistency(p.as_ref(), x, 1e-7);
            }
        }
    }

    #[test]
    fn christoffel_matches_finite_differences_of_metric() {
        // Independent quadratic-form check: Γ from FD of g vs exact jet.
        let data = Schwarzschild::new(1.0);
        let x = [4.0, 3.0, -2.0];
        let h = 1e-5 * 5.0;
        let j0 = data.jet(x).unwrap();
        let gi = j0.g_inv();
        let mut dg_fd = [[0.0f64; 6]; 3];
        for dir in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[dir] += h;
            xm[dir] -= h;
            let jp = data.jet(xp).unwrap();
            let jm = data.jet(xm).unwrap();
            for ab in 0..6 {
                dg_fd[dir][ab] = (jp.g[ab] - jm.g[ab]) / (2.0 * h);
            }
        }
        let gamma = j0.christoffel();
        for k in 0..3 {
            for i in 0..3 {
                for jj in 0..3 {
                    let mut acc = 0.0;
                    for l in 0..3 {
                        acc += 0.5
                            * sym_get(&gi, k, l)
                            * (dg_fd[i][sym(l, jj)] + dg_fd[jj][sym(l, i)]
                                - dg_fd[l][sym(i, jj)]);
                    }
                    assert!((acc - gamma[k][i][jj]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn conformal_christoffel_closed_form() {
        // For g = φ⁴ δ: Γ^k_ij = 2(δ^k_i w_j + δ^k_j w_i - δ_ij w_k),
        // w = ∇ ln φ.
        let m = 1.0;
        let data = Schwarzschild::new(m);
        let x: [f64; 3] = [5.0, -1.0, 2.0];
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let phi = 1.0 + 0.5 * m / r;
        let w: Vec<f64> = (0..3)
            .map(|i| (-0.5 * m * x[i] / (r * r * r)) / phi)
            .collect();
        let gamma = data.jet(x).unwrap().christoffel();
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let mut expect = 0.0;
                    if k == i {
                        expect += 2.0 * w[j];
                    }
                    if k == j {
                        expect += 2.0 * w[i];
                    }
                    if i == j {
                        expect -= 2.0 * w[k];
                    }
                    assert!(
                        (gamma[k][i][j] - expect).abs() < 1e-12,
                        "Γ^{k}_{i}{j}"
                    );
                }
            }
        }
    }

    #[test]
    fn conformal_ricci_closed_form() {
        // g = e^{2u} δ with u = 2 ln φ:
        // Ric_ij = -(∂_i∂_j u - u_i u_j) - (Δu + |∇u|²) δ_ij.
        let m = 1.3;
        let data = Schwarzschild::new(m);
        let x: [f64; 3] = [6.0, 2.0, -3.0];
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let phi = 1.0 + 0.5 * m / r;
        let dphi: Vec<f64> = (0..3).map(|i| -0.5 * m * x[i] / r.powi(3)).collect();
        let ddphi = |i: usize, j: usize| {
            let kron = if i == j { 1.0 } else { 0.0 };
            -0.5 * m * (kron / r.powi(3) - 3.0 * x[i] * x[j] / r.powi(5))
        };
        let u_i: Vec<f64> = (0..3).map(|i| 2.0 * dphi[i] / phi).collect();
        let u_ij = |i: usize, j: usize| {
            2.0 * (ddphi(i, j) / phi - dphi[i] * dphi[j] / (phi * phi))
        };
        let grad_u_sq: f64 = u_i.iter().map(|v| v * v).sum();
        let lap_u: f64 = (0..3).map(|i| u_ij(i, i)).sum();
        let (ric, scal) = data.jet(x).unwrap().ricci();
        for i in 0..3 {
            for j in i..3 {
                let kron = if i == j { 1.0 } else { 0.0 };
                let expect =
                    -(u_ij(i, j) - u_i[i] * u_i[j]) - (lap_u + grad_u_sq) * kron;
                assert!(
                    (sym_get(&ric, i, j) - expect).abs() < 1e-12,
                    "Ric_{i}{j}: {} vs {}",
                    sym_get(&ric, i, j),
                    expect
                );
            }
        }
        // Time-symmetric vacuum slice: scalar curvature vanishes.
        assert!(scal.abs() < 1e-12, "R = {scal}");
    }

    #[test]
    fn schwarzschild_constraints_vanish() {
        let data = Schwarzschild::new(1.0);
        for &r in &[5.0, 20.0, 100.0, 1e4] {
            let x = [r / (3.0f64).sqrt(); 3];
            let (rho, jm) = data.jet(x).unwrap().constraint_densities();
            assert!(rho.abs() < 1e-9, "rho({r}) = {rho}");
            for c in jm {
                assert!(c.abs() < 1e-9, "J({r}) = {c}");
            }
        }
    }

    #[test]
    fn bowen_york_momentum_constraint_vanishes_on_flat_background() {
        // With conformal factor ≡ 1 the family is exactly transverse
        // trace-free, so the momentum constraint holds pointwise and the
        // Hamiltonian residual is exactly -|K|²/2 < 0.
        let data = BowenYork::new(0.0, [0.05, 0.0, -0.02]);
        for &x in &[[20.0, 1.0, 3.0], [-8.0, 12.0, 5.0]] {
            let jet = data.jet(x).unwrap();
            let (rho, jm) = jet.constraint_densities();
            for c in jm {
                assert!(c.abs() < 1e-9, "J = {c}");
            }
            let k_sq: f64 = (0..3)
                .flat_map(|i| (0..3).map(move |j| (i, j)))
                .map(|(i, j)| sym_get(&jet.k, i, j).powi(2))
                .sum();
            assert!((rho + 0.5 * k_sq).abs() < 1e-12 * k_sq.max(1e-30));
            assert!(rho < 0.0);
        }
    }

    #[test]
    fn bowen_york_constraint_residuals_on_curved_background_are_small() {
        // On the Schwarzschild background the momentum constraint picks up
        // a conformal-coupling residual 2 φ^{-4} K(∇lnφ, ·); it decays like
        // m·|P|/r⁴ and is reported honestly rather than hidden.
        let data = BowenYork::new(1.0, [0.05, 0.0, -0.02]);
        let x = [20.0, 1.0, 3.0];
        let (rho, jm) = data.jet(x).unwrap().constraint_densities();
        let jn = (jm[0] * jm[0] + jm[1] * jm[1] + jm[2] * jm[2]).sqrt();
        assert!(jn > 1e-12, "curved-background residual unexpectedly zero");
        assert!(jn < 1e-6, "momentum residual too large: {jn}");
        assert!(rho < 0.0);
    }
}
