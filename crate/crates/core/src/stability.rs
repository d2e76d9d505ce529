//! Linear stability-type operators on surface scalar fields: the
//! conventional stability operator `L`, the weighted expansion
//! linearization `J^b`, and the temporal action of a lapse on the
//! expansion; spectra, the translational subspace, and the quantitative
//! invertibility estimates.
//!
//! Operators act on normal-graph perturbations: `J^b f` is the
//! directional derivative of `Θ_b` under deformation by `f·ν`. The
//! discretization is Galerkin in the spherical-harmonic basis: the node
//! form of an operator is evaluated on each basis function and projected
//! back by quadrature, so matrices act on band-limited content exactly.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{CoreError, Result};
use crate::initialdata::InitialData;
use crate::sphere::{Coeffs, Field, SphereGrid};
use crate::surface::{parametric_geometry, RadialSurface, SurfaceGeometry};

/// Dense-eigensolver size cutoff: above this coefficient count the
/// spectrum is computed by shift-inverted subspace iteration instead of
/// a full Schur decomposition.
const DENSE_EIGEN_LIMIT: usize = 760;

/// A discretized linear operator on surface scalar fields, tied to the
/// surface and curvature weight it was assembled for.
pub struct OperatorMatrix {
    pub b: f64,
    /// Area radius of the underlying surface.
    pub sigma: f64,
    /// Hawking mass of the underlying surface.
    pub hawking: f64,
    /// Galerkin matrix on spectral coefficients (`M×M`).
    coeff: DMatrix<f64>,
    /// Operator applied to each basis function at the nodes (`N×M`).
    node_basis: DMatrix<f64>,
}

impl OperatorMatrix {
    /// Galerkin coefficient matrix (`M×M`).
    pub fn coeff_matrix(&self) -> &DMatrix<f64> {
        &self.coeff
    }

    /// Matrix acting on grid-node values (`N×N`). The node form
    /// band-limits its input: content above the grid's band limit is
    /// annihilated, which is the projection inherent to the
    /// discretization.
    pub fn node_matrix(&self, grid: &SphereGrid) -> DMatrix<f64> {
        &self.node_basis * grid.analysis_matrix()
    }

    /// Applies the operator to a spectral coefficient vector.
    pub fn apply_coeffs(&self, c: &Coeffs) -> Coeffs {
        grid_checked_mul(&self.coeff, c)
    }

    /// Applies the operator to a node field, returning node values.
    pub fn apply_nodes(&self, grid: &SphereGrid, f: &Field) -> Field {
        &self.node_basis * grid.analyze(f)
    }

    /// Returns the operator with a pointwise potential added:
    /// `f ↦ op f + d·f`, where `d` is a node field.
    pub fn with_potential(&self, grid: &SphereGrid, d: &Field) -> OperatorMatrix {
        let y = grid.basis_values();
        let mut node_basis = self.node_basis.clone();
        for q in 0..node_basis.nrows() {
            for k in 0..node_basis.ncols() {
                node_basis[(q, k)] += d[q] * y[(q, k)];
            }
        }
        let coeff = grid.analysis_matrix() * &node_basis;
        OperatorMatrix {
            b: self.b,
            sigma: self.sigma,
            hawking: self.hawking,
            coeff,
            node_basis,
        }
    }

    /// Solves `op · c = rhs` in coefficient space. A numerically
    /// rank-deficient operator (the translational kernel degenerates to
    /// an exact kernel in the vacuum-flat limit) is solved in the
    /// minimum-norm least-squares sense, but only when the right-hand
    /// side lies in the numerical range; otherwise the pivot-based
    /// smallest-magnitude estimate is reported as a singular-operator
    /// error.
    pub fn solve_coeffs(&self, rhs: &Coeffs) -> Result<Coeffs> {
        solve_linear(&self.coeff, rhs, true)
    }
}

/// Solves `mat · x = rhs` by LU with full pivoting. When the pivots
/// reveal numerical rank deficiency the truncated-SVD minimum-norm
/// solution is returned instead (relative cutoff `1e-12`). With
/// `check_range` the right-hand-side component outside the numerical
/// range must be negligible, else the solve errors; without it the
/// residual on the kernel directions is silently dropped, which is the
/// Gauss-Newton behaviour wanted inside the damped Newton iteration.
pub(crate) fn solve_linear(mat: &DMatrix<f64>, rhs: &Coeffs, check_range: bool) -> Result<Coeffs> {
    let n = mat.nrows();
    let lu = mat.clone().full_piv_lu();
    let mut min_pivot = f64::INFINITY;
    let mut max_pivot = 0.0_f64;
    for i in 0..n {
        let p = lu.u()[(i, i)].abs();
        min_pivot = min_pivot.min(p);
        max_pivot = max_pivot.max(p);
    }
    if min_pivot.is_finite() && max_pivot.is_finite() && min_pivot >= 1e-13 * max_pivot {
        return lu.solve(rhs).ok_or(CoreError::SingularJacobian(min_pivot));
    }
    if !max_pivot.is_finite() {
        return Err(CoreError::SingularJacobian(min_pivot));
    }
    let fm = faer::Mat::<f64>::from_fn(n, n, |i, j| mat[(i, j)]);
    let svd = fm
        .svd()
        .map_err(|_| CoreError::SingularJacobian(min_pivot))?;
    let sv = svd.S();
    let sv = sv.column_vector();
    let smax = sv.iter().fold(0.0_f64, |a, v| a.max(*v));
    let cut = 1e-12 * smax;
    let u = svd.U();
    let v = svd.V();
    let mut x = Coeffs::zeros(n);
    let mut dropped = 0.0_f64;
    for k in 0..n {
        let mut ub = 0.0;
        for i in 0..n {
            ub += u[(i, k)] * rhs[i];
        }
        if sv[k] > cut {
            let scale = ub / sv[k];
            for i in 0..n {
                x[i] += v[(i, k)] * scale;
            }
        } else {
            dropped = dropped.max(ub.abs());
        }
    }
    if check_range && dropped > 1e-8 * rhs.norm().max(1e-300) {
        return Err(CoreError::SingularJacobian(min_pivot));
    }
    Ok(x)
}

fn grid_checked_mul(m: &DMatrix<f64>, c: &Coeffs) -> Coeffs {
    m * c
}

/// Assembles the node form `f ↦ g^{AB}∂²_AB f + d^A ∂_A f + c₀ f`
/// applied to every basis function (`N×M`).
fn node_basis_from_coefficients(
    grid: &SphereGrid,
    geo: &SurfaceGeometry,
    drift: &[[f64; 2]],
    c0: Option<&[f64]>,
) -> DMatrix<f64> {
    let n = grid.node_count();
    let m = grid.coeff_count();
    let y = grid.basis_values();
    let [yt, yp, ytt, ytp, ypp] = grid.basis_derivs();
    let mut out = DMatrix::zeros(n, m);
    for q in 0..n {
        let gi = geo.metric_inv[q];
        let d = drift[q];
        let z = c0.map_or(0.0, |c| c[q]);
        for k in 0..m {
            let mut v = gi[0] * ytt[(q, k)] + 2.0 * gi[1] * ytp[(q, k)] + gi[2] * ypp[(q, k)];
            v += d[0] * yt[(q, k)] + d[1] * yp[(q, k)];
            if c0.is_some() {
                v += z * y[(q, k)];
            }
            out[(q, k)] = v;
        }
    }
    out
}

fn operator_from_parts(
    grid: &SphereGrid,
    geo: &SurfaceGeometry,
    b: f64,
    drift: &[[f64; 2]],
    c0: &[f64],
) -> OperatorMatrix {
    let node_basis = node_basis_from_coefficients(grid, geo, drift, Some(c0));
    let coeff = grid.analysis_matrix() * &node_basis;
    OperatorMatrix {
        b,
        sigma: geo.area_radius,
        hawking: geo.hawking_mass,
        coeff,
        node_basis,
    }
}

/// Conventional stability operator
/// `L f = Δ_Σ f + (Ric(ν,ν) + |A|²) f`, the linearization of the mean
/// curvature under normal-graph deformation.
pub fn conventional_stability(grid: &SphereGrid, geo: &SurfaceGeometry) -> OperatorMatrix {
    let n = geo.node_count();
    let mut c0 = vec![0.0; n];
    for q in 0..n {
        c0[q] = geo.ricci_nn[q] + geo.second_form_sq[q];
    }
    operator_from_parts(grid, geo, 0.0, &geo.laplace_drift, &c0)
}

/// Weighted expansion linearization
/// `J^b f = L f + 2b·K(ν,∇f) + b·(div_Σ K(ν,·) + ⟨A,K⟩ + J̄(ν) − H·K(ν,ν)) f`.
/// The momentum density `J̄(ν)` is taken from the surface geometry, where
/// it was computed from the provider jets via the constraint expression.
pub fn weighted_pseudo_stability(
    grid: &SphereGrid,
    geo: &SurfaceGeometry,
    b: f64,
) -> Result<OperatorMatrix> {
    if !(-1.0..=1.0).contains(&b) {
        return Err(CoreError::InvalidArgument(format!(
            "curvature weight b = {b} outside [-1, 1]"
        )));
    }
    let n = geo.node_count();
    let mut drift = vec![[0.0; 2]; n];
    let mut c0 = vec![0.0; n];
    for q in 0..n {
        drift[q] = [
            geo.laplace_drift[q][0] + 2.0 * b * geo.k_normal_up[q][0],
            geo.laplace_drift[q][1] + 2.0 * b * geo.k_normal_up[q][1],
        ];
        c0[q] = geo.ricci_nn[q]
            + geo.second_form_sq[q]
            + b * (geo.div_k_normal[q] + geo.inner_a_k[q] + geo.momentum_normal[q]
                - geo.mean_curvature[q] * geo.k_nn[q]);
    }
    Ok(operator_from_parts(grid, geo, b, &drift, &c0))
}

/// Laplace–Beltrami eigenbasis of the surface, orthonormal in `L²(dμ)`,
/// with the translational band selected by
/// `|λ_i − 2/σ²| ≤ 1/σ²` (eigenvalues of `−Δ_Σ`).
pub struct LaplaceBasis {
    /// Eigenvalues of `−Δ_Σ`, ascending.
    pub eigenvalues: Vec<f64>,
    /// Indices of the translational band.
    pub translational: Vec<usize>,
    pub sigma: f64,
    /// `L²(dμ)`-orthonormal coefficient eigenvectors, as columns.
    basis: DMatrix<f64>,
    /// Gram matrix `G_kl = ∫ Y_k Y_l dμ` and its Cholesky factor.
    gram: DMatrix<f64>,
    chol_l: DMatrix<f64>,
}

impl LaplaceBasis {
    pub fn translational_rank(&self) -> usize {
        self.translational.len()
    }

    /// Columns spanning the translational band (`M×rank`).
    pub fn translational_matrix(&self) -> DMatrix<f64> {
        let m = self.basis.nrows();
        let mut v = DMatrix::zeros(m, self.translational.len());
        for (j, &idx) in self.translational.iter().enumerate() {
            v.set_column(j, &self.basis.column(idx));
        }
        v
    }

    /// Columns spanning the `L²(dμ)`-orthogonal complement of the
    /// translational band.
    pub fn complement_matrix(&self) -> DMatrix<f64> {
        let m = self.basis.nrows();
        let keep: Vec<usize> = (0..m).filter(|i| !self.translational.contains(i)).collect();
        let mut v = DMatrix::zeros(m, keep.len());
        for (j, &idx) in keep.iter().enumerate() {
            v.set_column(j, &self.basis.column(idx));
        }
        v
    }

    /// `L²(dμ)` projection of a coefficient vector onto the
    /// translational band.
    pub fn project_translational(&self, c: &Coeffs) -> Coeffs {
        let gc = &self.gram * c;
        let mut out = Coeffs::zeros(c.len());
        for &idx in &self.translational {
            let v = self.basis.column(idx);
            let amp = v.dot(&gc);
            out += amp * v;
        }
        out
    }

    /// `L²(dμ)` inner product of coefficient vectors.
    pub fn inner(&self, a: &Coeffs, b: &Coeffs) -> f64 {
        (a.transpose() * &self.gram * b)[(0, 0)]
    }

    /// `L²(dμ)` norm of a coefficient vector.
    pub fn norm(&self, a: &Coeffs) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }

    /// Cholesky factor `L` of the Gram matrix (`G = LLᵀ`).
    pub fn chol_l(&self) -> &DMatrix<f64> {
        &self.chol_l
    }

    /// Fraction of a (complex) coefficient vector's `L²(dμ)` mass lying
    /// in the translational band.
    pub fn translational_mass_fraction(&self, re: &Coeffs, im: &Coeffs) -> f64 {
        let g_re = &self.gram * re;
        let g_im = &self.gram * im;
        let total = re.dot(&g_re) + im.dot(&g_im);
        if total <= 0.0 {
            return 0.0;
        }
        let mut band = 0.0;
        for &idx in &self.translational {
            let v = self.basis.column(idx);
            let dr = v.dot(&g_re);
            let di = v.dot(&g_im);
            band += dr * dr + di * di;
        }
        (band / total).clamp(0.0, 1.0)
    }
}

/// Builds the `−Δ_Σ` eigenbasis by reducing the Galerkin pencil
/// `(K, G)` with the Gram Cholesky factor and solving the resulting
/// symmetric problem.
pub fn laplace_eigenbasis(grid: &SphereGrid, geo: &SurfaceGeometry) -> Result<LaplaceBasis> {
    let n = grid.node_count();
    let m = grid.coeff_count();
    let lap_nodes = node_basis_from_coefficients(grid, geo, &geo.laplace_drift, None);
    let y = grid.basis_values();
    // G = Yᵀ diag(w_μ) Y,  K = −Yᵀ diag(w_μ) Δ-basis (so K ⪰ 0).
    let mut wy = DMatrix::zeros(n, m);
    for q in 0..n {
        let w = geo.area_weight[q];
        for k in 0..m {
            wy[(q, k)] = w * y[(q, k)];
        }
    }
    let gram = y.transpose() * &wy;
    let kmat = -(wy.transpose() * &lap_nodes);
    let ksym = (&kmat + kmat.transpose()) * 0.5;

    let chol = nalgebra::linalg::Cholesky::new(gram.clone()).ok_or_else(|| {
        CoreError::EigenFailure("surface Gram matrix is not positive definite".into())
    })?;
    let l = chol.l();
    // S = L⁻¹ K L⁻ᵀ, symmetric.
    let mut s = ksym;
    // Solve L X = K (column-wise), then L Sᵀ = Xᵀ.
    l.solve_lower_triangular_mut(&mut s);
    s.transpose_mut();
    l.solve_lower_triangular_mut(&mut s);
    // Symmetrize against roundoff.
    let s = (&s + s.transpose()) * 0.5;
    let eig = nalgebra::linalg::SymmetricEigen::new(s);

    // Sort ascending.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut eigenvalues = Vec::with_capacity(m);
    let mut u = DMatrix::zeros(m, m);
    for (j, &idx) in order.iter().enumerate() {
        eigenvalues.push(eig.eigenvalues[idx]);
        u.set_column(j, &eig.eigenvectors.column(idx));
    }
    // Coefficient eigenvectors: basis = L⁻ᵀ U, G-orthonormal columns.
    let mut basis = u;
    l.transpose().solve_upper_triangular_mut(&mut basis);

    let sigma = geo.area_radius;
    let target = 2.0 / (sigma * sigma);
    let band = 1.0 / (sigma * sigma);
    let translational: Vec<usize> = (0..m)
        .filter(|&i| (eigenvalues[i] - target).abs() <= band)
        .collect();
    Ok(LaplaceBasis {
        eigenvalues,
        translational,
        sigma,
        basis,
        gram,
        chol_l: l.clone(),
    })
}

/// One computed eigenpair of an operator.
pub struct EigenPair {
    pub re: f64,
    pub im: f64,
    pub vector_re: Coeffs,
    pub vector_im: Coeffs,
    pub translational: bool,
}

/// Spectral summary of an operator: eigenvalues ascending by real part,
/// the smallest-magnitude eigenpairs, and the translational structure.
pub struct SpectralSummary {
    /// All computed eigenvalues `(re, im)` sorted ascending by real
    /// part. Above the dense-solver cutoff only the computed subset
    /// (smallest magnitudes) is listed.
    pub eigenvalues: Vec<(f64, f64)>,
    /// Translational flag aligned with `eigenvalues`.
    pub flags: Vec<bool>,
    /// The `k` smallest-magnitude eigenpairs, ascending by magnitude.
    pub smallest: Vec<EigenPair>,
    /// Rank of the surface's translational Laplace band (target 3).
    pub translational_rank: usize,
}

fn complex_vec_norm(v: &DVector<Complex<f64>>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Full eigendecomposition of a dense real matrix, as (eigenvalue,
/// eigenvector) columns in matching order.
fn dense_eigen(mat: &DMatrix<f64>) -> Result<(Vec<Complex<f64>>, Vec<DVector<Complex<f64>>>)> {
    let n = mat.nrows();
    let fm = faer::Mat::<f64>::from_fn(n, n, |i, j| mat[(i, j)]);
    let evd = fm.eigen().map_err(|e| {
        CoreError::EigenFailure(format!("dense eigendecomposition failed: {e:?}"))
    })?;
    let vals: Vec<Complex<f64>> = evd.S().column_vector().iter().copied().collect();
    let u = evd.U();
    let vecs: Vec<DVector<Complex<f64>>> = (0..n)
        .map(|j| DVector::from_iterator(n, u.col(j).iter().copied()))
        .collect();
    Ok((vals, vecs))
}

/// Eigenvalues only of a dense real matrix.
fn dense_eigenvalues(mat: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    let n = mat.nrows();
    let fm = faer::Mat::<f64>::from_fn(n, n, |i, j| mat[(i, j)]);
    fm.eigenvalues().map_err(|e| {
        CoreError::EigenFailure(format!("eigenvalue computation failed: {e:?}"))
    })
}

/// Singular values of a dense real matrix.
fn dense_singular_values(mat: &DMatrix<f64>) -> Result<Vec<f64>> {
    let fm = faer::Mat::<f64>::from_fn(mat.nrows(), mat.ncols(), |i, j| mat[(i, j)]);
    fm.singular_values().map_err(|e| {
        CoreError::EigenFailure(format!("singular value computation failed: {e:?}"))
    })
}

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn uniform_from_bits(bits: u64) -> f64 {
    (bits >> 11) as f64 / (1u64 << 53) as f64
}

/// Spectrum of an operator: all eigenvalues (dense path) or the
/// requested smallest set (iterative path), plus `k` smallest-magnitude
/// eigenpairs with translational flags.
pub fn spectrum(
    grid: &SphereGrid,
    geo: &SurfaceGeometry,
    op: &OperatorMatrix,
    k: usize,
) -> Result<SpectralSummary> {
    let m = op.coeff.nrows();
    if k > m {
        return Err(CoreError::InvalidArgument(format!(
            "requested {k} eigenpairs from an operator with {m} modes"
        )));
    }
    let basis = laplace_eigenbasis(grid, geo)?;
    let scale = op.coeff.norm() / (m as f64).sqrt();

    let (mut all, vectors): (Vec<Complex<f64>>, Vec<DVector<Complex<f64>>>) = if m
        <= DENSE_EIGEN_LIMIT
    {
        let (vals, vecs) = dense_eigen(&op.coeff)?;
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| vals[a].norm().total_cmp(&vals[b].norm()));
        let evs: Vec<Complex<f64>> = order.iter().map(|&i| vals[i]).collect();
        let picked: Vec<DVector<Complex<f64>>> =
            order.iter().take(k).map(|&i| vecs[i].clone()).collect();
        (evs, picked)
    } else {
        subspace_smallest(&op.coeff, k, scale)?
    };

    // Smallest-magnitude pairs with flags.
    let mut smallest = Vec::with_capacity(k);
    for (lam, v) in all.iter().take(k).zip(vectors.iter()) {
        let re_v = Coeffs::from_fn(m, |i, _| v[i].re);
        let im_v = Coeffs::from_fn(m, |i, _| v[i].im);
        let frac = basis.translational_mass_fraction(&re_v, &im_v);
        smallest.push(EigenPair {
            re: lam.re,
            im: lam.im,
            vector_re: re_v,
            vector_im: im_v,
            translational: frac >= 0.5,
        });
    }

    // Full list ascending by real part, flags carried from the smallest
    // set (translational modes are near-kernel, hence smallest).
    all.sort_by(|a, b| a.re.total_cmp(&b.re));
    let eigenvalues: Vec<(f64, f64)> = all.iter().map(|z| (z.re, z.im)).collect();
    let mut flags = vec![false; eigenvalues.len()];
    for pair in &smallest {
        if !pair.translational {
            continue;
        }
        // Mark the matching entry in the sorted list.
        let mut best = usize::MAX;
        let mut bestd = f64::INFINITY;
        for (i, &(re, im)) in eigenvalues.iter().enumerate() {
            if flags[i] {
                continue;
            }
            let d = ((re - pair.re).powi(2) + (im - pair.im).powi(2)).sqrt();
            if d < bestd {
                bestd = d;
                best = i;
            }
        }
        if best != usize::MAX {
            flags[best] = true;
        }
    }

    smallest.sort_by(|a, b| {
        (a.re * a.re + a.im * a.im)
            .sqrt()
            .total_cmp(&(b.re * b.re + b.im * b.im).sqrt())
    });
    Ok(SpectralSummary {
        eigenvalues,
        flags,
        smallest,
        translational_rank: basis.translational_rank(),
    })
}

/// Shift-inverted subspace iteration for the smallest-magnitude
/// eigenpairs of a large real matrix.
fn subspace_smallest(
    mat: &DMatrix<f64>,
    k: usize,
    scale: f64,
) -> Result<(Vec<Complex<f64>>, Vec<DVector<Complex<f64>>>)> {
    let m = mat.nrows();
    let p = (2 * k + 4).min(m);
    let lu = mat.clone().full_piv_lu();
    let mut min_pivot = f64::INFINITY;
    for i in 0..m {
        min_pivot = min_pivot.min(lu.u()[(i, i)].abs());
    }
    if min_pivot < 1e-300 {
        return Err(CoreError::EigenFailure(
            "operator is numerically singular; cannot shift-invert at zero".into(),
        ));
    }
    let mut state = 0x51a09e3779b97f4au64;
    let mut v = DMatrix::from_fn(m, p, |_, _| {
        state = splitmix64(state);
        uniform_from_bits(state) - 0.5
    });
    let mut last: Option<Vec<Complex<f64>>> = None;
    for iter in 0..200 {
        let w = lu.solve(&v).ok_or_else(|| {
            CoreError::EigenFailure("shift-invert solve failed".into())
        })?;
        let qr = w.qr();
        v = qr.q();
        if iter % 4 != 3 {
            continue;
        }
        // Rayleigh–Ritz on the current subspace.
        let h = v.transpose() * (mat * &v);
        let mut evs = dense_eigenvalues(&h)?;
        evs.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        let converged = match &last {
            Some(prev) => evs
                .iter()
                .take(k)
                .zip(prev.iter().take(k))
                .all(|(a, b)| (a - b).norm() <= 1e-12 * scale.max(a.norm())),
            None => false,
        };
        last = Some(evs.clone());
        if !converged {
            continue;
        }
        // Lift the small-space eigenvectors and verify residuals.
        let (hvals, hvecs) = dense_eigen(&h)?;
        let mut horder: Vec<usize> = (0..hvals.len()).collect();
        horder.sort_by(|&a, &b| hvals[a].norm().total_cmp(&hvals[b].norm()));
        let mut values = Vec::with_capacity(k);
        let mut vectors = Vec::with_capacity(k);
        for &hi in horder.iter().take(k) {
            let lam = &hvals[hi];
            let y = &hvecs[hi];
            let vc: DMatrix<Complex<f64>> = v.map(|x| Complex::new(x, 0.0));
            let x = &vc * y;
            let mx = mat.map(|t| Complex::new(t, 0.0)) * &x;
            let res = (&mx - x.scale(1.0) * *lam).norm()
                / (scale.max(lam.norm()) * complex_vec_norm(&x)).max(1e-300);
            if res > 1e-8 {
                return Err(CoreError::EigenFailure(format!(
                    "subspace iteration residual {res:.3e} at eigenvalue {lam}"
                )));
            }
            let nrm = Complex::new(complex_vec_norm(&x), 0.0);
            values.push(*lam);
            vectors.push(x / nrm);
        }
        return Ok((values, vectors));
    }
    Err(CoreError::EigenFailure(
        "subspace iteration did not converge within 200 sweeps".into(),
    ))
}

/// Smallest-magnitude eigenvalue of an operator, `(re, im)`. A
/// numerically singular operator reports `(0, 0)` (it has a kernel to
/// working precision).
pub fn smallest_eigenvalue(op: &OperatorMatrix) -> Result<(f64, f64)> {
    let m = op.coeff.nrows();
    if m <= DENSE_EIGEN_LIMIT {
        let vals = dense_eigenvalues(&op.coeff)?;
        let best = vals
            .iter()
            .min_by(|a, b| a.norm().total_cmp(&b.norm()))
            .copied()
            .ok_or_else(|| CoreError::EigenFailure("empty spectrum".into()))?;
        Ok((best.re, best.im))
    } else {
        let scale = op.coeff.norm() / (m as f64).sqrt();
        match subspace_smallest(&op.coeff, 4, scale) {
            Ok((vals, _)) => Ok((vals[0].re, vals[0].im)),
            Err(CoreError::EigenFailure(msg)) if msg.contains("singular") => Ok((0.0, 0.0)),
            Err(e) => Err(e),
        }
    }
}

/// CSV rendering of a spectral summary with columns
/// `index,re,im,translational_flag`.
pub fn spectrum_csv(summary: &SpectralSummary) -> String {
    let mut out = String::from("index,re,im,translational_flag\n");
    for (i, ((re, im), flag)) in summary
        .eigenvalues
        .iter()
        .zip(summary.flags.iter())
        .enumerate()
    {
        out.push_str(&format!(
            "{i},{},{},{}\n",
            format_g17(*re),
            format_g17(*im),
            u8::from(*flag)
        ));
    }
    out
}

/// 17-significant-digit decimal rendering.
pub fn format_g17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Numerical evaluation of the three invertibility estimates for the
/// weighted operator on a leaf: the translational bilinear form against
/// its predicted multiple of the identity, the lower bound on the
/// orthogonal complement, and the global lower bound.
#[derive(Debug, Clone)]
pub struct InvertibilityReport {
    pub sigma: f64,
    pub hawking_mass: f64,
    pub translational_rank: usize,
    /// `D = σ³·‖M₃ + (6 m_H/σ³) I‖₂` where `M₃` is the translational
    /// bilinear form of the operator.
    pub d_measured: f64,
    /// Reference magnitude `6|m_H|/σ³` of the translational eigenvalues.
    pub translational_scale: f64,
    /// Smallest singular value of the operator restricted to the
    /// complement of the translational band, and its predicted bound
    /// `1/σ²`.
    pub complement_min_singular: f64,
    pub complement_bound: f64,
    pub complement_margin: f64,
    /// Smallest singular value of the full operator in `L²(dμ)`
    /// coordinates, and its predicted bound `(6|m_H| − D)/σ³`.
    pub global_min_singular: f64,
    pub global_bound: f64,
    pub global_margin: f64,
    /// False when `|m_H|` is too small for the mass-dependent bound to
    /// mean anything (the estimate's hypothesis requires nonzero mass).
    pub mass_hypothesis_met: bool,
}

/// Evaluates the invertibility estimates for `J^b` on the given surface.
pub fn verify_invertibility_estimates(
    grid: &SphereGrid,
    geo: &SurfaceGeometry,
    b: f64,
) -> Result<InvertibilityReport> {
    let op = weighted_pseudo_stability(grid, geo, b)?;
    let basis = laplace_eigenbasis(grid, geo)?;
    let sigma = geo.area_radius;
    let m_h = geo.hawking_mass;
    let rank = basis.translational_rank();
    let vmat = basis.translational_matrix();

    // M₃[i][j] = ⟨J f_i, f_j⟩_{L²(dμ)} on the translational band.
    let jv = &op.coeff * &vmat;
    let m3 = vmat.transpose() * &basis.gram * &jv;
    let r = m3.nrows();
    let mut shifted = m3.clone();
    let lam_ref = 6.0 * m_h / sigma.powi(3);
    for i in 0..r {
        shifted[(i, i)] += lam_ref;
    }
    let d_measured = sigma.powi(3)
        * dense_singular_values(&shifted)?
            .iter()
            .fold(0.0f64, |a, &s| a.max(s));

    // Complement restriction in L²(dμ) coordinates: Lᵀ J V⊥.
    let l_t = basis.chol_l.transpose();
    let comp = basis.complement_matrix();
    let comp_map = &l_t * (&op.coeff * &comp);
    let complement_min_singular = dense_singular_values(&comp_map)?
        .iter()
        .fold(f64::INFINITY, |a, &s| a.min(s));
    let complement_bound = 1.0 / (sigma * sigma);

    // Global operator in L²(dμ) coordinates: Lᵀ J L⁻ᵀ.
    let mut global = op.coeff.clone();
    global.transpose_mut();
    basis
        .chol_l
        .transpose()
        .solve_upper_triangular_mut(&mut global);
    global.transpose_mut();
    let global = &l_t * &global;
    let global_min_singular = dense_singular_values(&global)?
        .iter()
        .fold(f64::INFINITY, |a, &s| a.min(s));
    let global_bound = (6.0 * m_h.abs() - d_measured) / sigma.powi(3);
    let mass_hypothesis_met = m_h.abs() > 1e-6;

    Ok(InvertibilityReport {
        sigma,
        hawking_mass: m_h,
        translational_rank: rank,
        d_measured,
        translational_scale: 6.0 * m_h.abs() / sigma.powi(3),
        complement_min_singular,
        complement_bound,
        complement_margin: complement_min_singular - complement_bound,
        global_min_singular,
        global_bound,
        global_margin: global_min_singular - global_bound,
        mass_hypothesis_met,
    })
}

/// Lapse data for the temporal action: the lapse jet and the doubly
/// spatially contracted spacetime Einstein tensor.
pub trait TemporalData: Send + Sync {
    /// `(α, ∂_i α, ∂_i∂_j α)` at a point (second derivatives packed
    /// symmetric).
    fn lapse_jet(&self, x: [f64; 3]) -> Result<(f64, [f64; 3], [f64; 6])>;

    /// Spacetime Einstein tensor contracted twice with the (spatial)
    /// unit normal `ν` at `x`.
    fn einstein_nn(&self, x: [f64; 3], nu: [f64; 3]) -> Result<f64>;
}

/// Unit lapse with vanishing spacetime Einstein tensor (vacuum or
/// synthetic flows reported without matter coupling).
pub struct UnitLapse;

impl TemporalData for UnitLapse {
    fn lapse_jet(&self, _x: [f64; 3]) -> Result<(f64, [f64; 3], [f64; 6])> {
        Ok((1.0, [0.0; 3], [0.0; 6]))
    }

    fn einstein_nn(&self, _x: [f64; 3], _nu: [f64; 3]) -> Result<f64> {
        Ok(0.0)
    }
}

/// Static vacuum lapse `α = (1 − m/2r)/(1 + m/2r)` of the conformally
/// flat static slice; the spacetime is vacuum, so the Einstein term is
/// zero.
pub struct StaticSchwarzschildLapse {
    pub m: f64,
}

impl TemporalData for StaticSchwarzschildLapse {
    fn lapse_jet(&self, x: [f64; 3]) -> Result<(f64, [f64; 3], [f64; 6])> {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        let r = r2.sqrt();
        if !(r > 0.5 * self.m.abs()) {
            return Err(CoreError::DomainError {
                x: x[0],
                y: x[1],
                z: x[2],
                message: format!("static lapse undefined at r = {r} (inner region)"),
            });
        }
        let xq = 0.5 * self.m / r;
        let alpha = (1.0 - xq) / (1.0 + xq);
        let da_dx = -2.0 / (1.0 + xq).powi(2);
        let dda_dx2 = 4.0 / (1.0 + xq).powi(3);
        // xq_i = -(m/2) x_i / r³, xq_ij = -(m/2)(δ_ij/r³ - 3 x_i x_j/r⁵).
        let c1 = -0.5 * self.m / (r * r2);
        let mut da = [0.0; 3];
        for i in 0..3 {
            da[i] = da_dx * c1 * x[i];
        }
        let mut dda = [0.0; 6];
        for i in 0..3 {
            for j in i..3 {
                let xq_i = c1 * x[i];
                let xq_j = c1 * x[j];
                let delta = if i == j { 1.0 } else { 0.0 };
                let xq_ij = c1 * (delta - 3.0 * x[i] * x[j] / r2);
                dda[crate::initialdata::sym(i, j)] = dda_dx2 * xq_i * xq_j + da_dx * xq_ij;
            }
        }
        Ok((alpha, da, dda))
    }

    fn einstein_nn(&self, _x: [f64; 3], _nu: [f64; 3]) -> Result<f64> {
        Ok(0.0)
    }
}

/// Temporal action of a lapse on the expansion `Θ_b`: the time
/// derivative of `Θ_b` along the zero-shift flow `∂_t = α·(time normal)`
/// at a fixed coordinate surface,
///
/// ```text
/// J̃^t α =  α(J̄(ν) − div_Σ K(ν,·) + ⟨A,K⟩) − 2 K(ν, ∇_Σ α)
///        + b·[ −Δ_Σ α + H·D_ν α
///              + α( tr_Σ R̄ic + (tr K)·tr_Σ K − 2|K(ν,·)|²_Σ − ρ̄ + Ĝ(ν,ν) ) ]
/// ```
///
/// The mean-curvature part (weight-independent) and the `tr_Σ K` part
/// (weight `b`) were derived from the evolution equations of the slice
/// data and validated against finite-difference time derivatives on
/// synthetic spacetimes; on static data the weighted part vanishes
/// identically, which fixes the relative signs.
pub fn temporal_action(
    grid: &SphereGrid,
    geo: &SurfaceGeometry,
    td: &dyn TemporalData,
    weight: f64,
) -> Result<Field> {
    if !(-1.0..=1.0).contains(&weight) {
        return Err(CoreError::InvalidArgument(format!(
            "curvature weight {weight} outside [-1, 1]"
        )));
    }
    let _ = grid;
    let n = geo.node_count();
    let mut out = Field::zeros(n);
    for q in 0..n {
        let x = geo.pos[q];
        let (alpha, da, dda) = td.lapse_jet(x)?;
        let e = [geo.e_theta[q], geo.e_phi[q]];
        let xx = geo.x_second[q];
        // Surface derivatives of the restricted lapse.
        let mut da_s = [0.0; 2];
        for a in 0..2 {
            da_s[a] = da[0] * e[a][0] + da[1] * e[a][1] + da[2] * e[a][2];
        }
        let mut dda_s = [0.0; 3];
        for a in 0..2 {
            for b in a..2 {
                let second = [xx[0], xx[1], xx[2]];
                let idx = a + b;
                let mut acc = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        acc += crate::initialdata::sym_get(&dda, i, j) * e[a][i] * e[b][j];
                    }
                    acc += da[i] * second[idx][i];
                }
                dda_s[idx] = acc;
            }
        }
        let gi = geo.metric_inv[q];
        let gam2 = geo.christoffel_surf[q];
        let mut lap = 0.0;
        let gi_m = [[gi[0], gi[1]], [gi[1], gi[2]]];
        for a in 0..2 {
            for b in 0..2 {
                let idx = a + b;
                let mut cov = dda_s[idx];
                cov -= gam2[idx] * da_s[0] + gam2[3 + idx] * da_s[1];
                lap += gi_m[a][b] * cov;
            }
        }
        let nu = geo.normal[q];
        let d_nu_alpha = da[0] * nu[0] + da[1] * nu[1] + da[2] * nu[2];
        let k_grad = geo.k_normal_up[q][0] * da_s[0] + geo.k_normal_up[q][1] * da_s[1];

        let part_mean = alpha
            * (geo.momentum_normal[q] - geo.div_k_normal[q] + geo.inner_a_k[q])
            - 2.0 * k_grad;
        let tr_sigma_ric = geo.scalar_amb[q] - geo.ricci_nn[q];
        let tr_k_amb = geo.k_trace_tan[q] + geo.k_nn[q];
        let gnn = td.einstein_nn(x, nu)?;
        let part_trace = -lap
            + geo.mean_curvature[q] * d_nu_alpha
            + alpha
                * (tr_sigma_ric + tr_k_amb * geo.k_trace_tan[q]
                    - 2.0 * geo.k_normal_sq[q]
                    - geo.energy_density[q]
                    + gnn);
        out[q] = part_mean + weight * part_trace;
    }
    Ok(out)
}

/// Deterministic band-limited random directions (unit coefficient norm,
/// degrees `1..=lmax_cut`) for derivative checks.
pub fn random_band_limited_directions(
    grid: &SphereGrid,
    lmax_cut: usize,
    count: usize,
    seed: u64,
) -> Vec<Coeffs> {
    let m = grid.coeff_count();
    let cut = lmax_cut.min(grid.lmax());
    let mut state = seed ^ 0xd1b54a32d192ed03;
    let mut dirs = Vec::with_capacity(count);
    for _ in 0..count {
        let mut c = Coeffs::zeros(m);
        for l in 0..=cut {
            for mm in -(l as isize)..=(l as isize) {
                state = splitmix64(state);
                let u1 = uniform_from_bits(state).max(1e-12);
                state = splitmix64(state);
                let u2 = uniform_from_bits(state);
                let gauss =
                    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
                c[SphereGrid::coeff_of(l, mm)] = gauss;
            }
        }
        let nrm = c.norm();
        if nrm > 0.0 {
            c /= nrm;
        }
        dirs.push(c);
    }
    dirs
}

/// Relative errors between the assembled `J^b` action and central finite
/// differences of the nonlinear expansion under normal-graph
/// deformations `x ± h·f·ν`, one entry per direction. This is the
/// defining property of the operator.
pub fn directional_derivative_errors(
    grid: &SphereGrid,
    data: &dyn InitialData,
    surface: &RadialSurface,
    b: f64,
    dirs: &[Coeffs],
    h_rel: f64,
) -> Result<Vec<f64>> {
    let geo = surface.geometry(grid, data)?;
    let op = weighted_pseudo_stability(grid, &geo, b)?;
    let n = grid.node_count();
    let h = h_rel * geo.area_radius;

    let theta_coeffs_of = |step: f64, dir: &Coeffs| -> Result<Coeffs> {
        let u = grid.synthesize(dir);
        let mut coords: [Coeffs; 3] = [
            Coeffs::zeros(grid.coeff_count()),
            Coeffs::zeros(grid.coeff_count()),
            Coeffs::zeros(grid.coeff_count()),
        ];
        for i in 0..3 {
            let mut comp = Field::zeros(n);
            for q in 0..n {
                comp[q] = geo.pos[q][i] + step * u[q] * geo.normal[q][i];
            }
            coords[i] = grid.analyze(&comp);
        }
        let pert = parametric_geometry(grid, data, surface.center, &coords)?;
        let theta = pert.expansion(b)?.theta;
        Ok(grid.analyze(&theta))
    };

    let mut errors = Vec::with_capacity(dirs.len());
    for dir in dirs {
        let plus = theta_coeffs_of(h, dir)?;
        let minus = theta_coeffs_of(-h, dir)?;
        let fd = (plus - minus) / (2.0 * h);
        let predicted = op.apply_coeffs(dir);
        let denom = predicted.norm();
        if denom == 0.0 {
            return Err(CoreError::InvalidArgument(
                "operator action vanished on a test direction".into(),
            ));
        }
        errors.push((fd - predicted).norm() / denom);
    }
    Ok(errors)
}
