//! Gridded initial data loaded from `CEGRID1` files.
//!
//! File layout (see the repository README for the normative text):
//! three ASCII header lines — the magic `CEGRID1`, the dimensions
//! `nx ny nz`, and the geometry `x0 y0 z0 hx hy hz` — followed by a
//! blank line and `nx·ny·nz·15` little-endian IEEE-754 doubles in
//! x-fastest node order with 15 channels per node:
//! `g_11 g_12 g_13 g_22 g_23 g_33 K_11 K_12 K_13 K_22 K_23 K_33
//! alpha rho_placeholder reserved`.
//!
//! Evaluation uses tricubic Lagrange interpolation on the 4×4×4 stencil
//! around the query point: values are `O(h⁴)` accurate and the jet's
//! derivative entries come from differentiating the interpolant (one
//! order lower per derivative). The format carries no decay metadata,
//! so the provider advertises conservative defaults (`mass_param = 0`,
//! `eps = 1/2`).

use std::io::Write as _;
use std::path::Path;

use super::{AmbientJet, InitialData, ProviderMetadata};
use crate::error::{CoreError, Result};

const CHANNELS: usize = 15;
const MAGIC: &str = "CEGRID1";

/// Initial data sampled on a uniform Cartesian grid.
#[derive(Debug, Clone)]
pub struct GridDataSet {
    dims: [usize; 3],
    origin: [f64; 3],
    spacing: [f64; 3],
    /// `dims[0]*dims[1]*dims[2]*CHANNELS` values, x-fastest, channel-minor.
    data: Vec<f64>,
}

fn parse_err(offset: usize, message: impl Into<String>) -> CoreError {
    CoreError::ParseError {
        offset,
        message: message.into(),
    }
}

/// Reads one `\n`-terminated ASCII line starting at `*pos`.
fn read_line<'a>(bytes: &'a [u8], pos: &mut usize, what: &str) -> Result<&'a str> {
    let start = *pos;
    let rel = bytes[start..]
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| parse_err(start, format!("missing newline after {what}")))?;
    let line = &bytes[start..start + rel];
    *pos = start + rel + 1;
    std::str::from_utf8(line)
        .map_err(|_| parse_err(start, format!("{what} is not valid ASCII")))
        .map(str::trim_end)
}

impl GridDataSet {
    /// Parses a `CEGRID1` file.
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        Self::from_bytes(&bytes)
    }

    /// Parses `CEGRID1` content from memory.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0usize;
        let magic = read_line(bytes, &mut pos, "magic line")?;
        if magic != MAGIC {
            return Err(parse_err(0, format!("bad magic {magic:?}, expected {MAGIC:?}")));
        }
        let dims_start = pos;
        let dims_line = read_line(bytes, &mut pos, "dimension line")?;
        let dims_vals: Vec<usize> = dims_line
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| parse_err(dims_start, format!("bad dimension token {t:?}")))
            })
            .collect::<Result<_>>()?;
        if dims_vals.len() != 3 {
            return Err(parse_err(dims_start, "dimension line must hold nx ny nz"));
        }
        let dims = [dims_vals[0], dims_vals[1], dims_vals[2]];
        for (axis, &n) in dims.iter().enumerate() {
            if n < 4 {
                return Err(parse_err(
                    dims_start,
                    format!("axis {axis} has {n} nodes; tricubic needs at least 4"),
                ));
            }
        }

        let geom_start = pos;
        let geom_line = read_line(bytes, &mut pos, "geometry line")?;
        let geom: Vec<f64> = geom_line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| parse_err(geom_start, format!("bad geometry token {t:?}")))
            })
            .collect::<Result<_>>()?;
        if geom.len() != 6 {
            return Err(parse_err(
                geom_start,
                "geometry line must hold x0 y0 z0 hx hy hz",
            ));
        }
        let origin = [geom[0], geom[1], geom[2]];
        let spacing = [geom[3], geom[4], geom[5]];
        if !origin.iter().all(|v| v.is_finite()) {
            return Err(parse_err(geom_start, "non-finite origin"));
        }
        for (axis, &h) in spacing.iter().enumerate() {
            if !(h.is_finite() && h > 0.0) {
                return Err(parse_err(
                    geom_start,
                    format!("axis {axis} spacing {h} is not positive (axes must be increasing)"),
                ));
            }
        }

        let blank_start = pos;
        let blank = read_line(bytes, &mut pos, "separator line")?;
        if !blank.is_empty() {
            return Err(parse_err(blank_start, "expected blank separator line"));
        }

        let count = dims[0] * dims[1] * dims[2] * CHANNELS;
        let need = count * 8;
        let have = bytes.len() - pos;
        if have < need {
            return Err(parse_err(
                bytes.len(),
                format!("payload truncated: need {need} bytes, have {have}"),
            ));
        }
        if have > need {
            return Err(parse_err(
                pos + need,
                format!("trailing bytes after payload: {}", have - need),
            ));
        }
        let mut data = Vec::with_capacity(count);
        for i in 0..count {
            let off = pos + 8 * i;
            let v = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
            if v.is_nan() {
                return Err(parse_err(off, format!("NaN payload value at index {i}")));
            }
            data.push(v);
        }
        Ok(GridDataSet {
            dims,
            origin,
            spacing,
            data,
        })
    }

    /// Samples a provider onto a fresh grid (`alpha ≡ 1`, spare channels 0).
    pub fn sample_from(
        provider: &dyn InitialData,
        origin: [f64; 3],
        spacing: [f64; 3],
        dims: [usize; 3],
    ) -> Result<Self> {
        let mut data = vec![0.0; dims[0] * dims[1] * dims[2] * CHANNELS];
        for iz in 0..dims[2] {
            for iy in 0..dims[1] {
                for ix in 0..dims[0] {
                    let x = [
                        origin[0] + ix as f64 * spacing[0],
                        origin[1] + iy as f64 * spacing[1],
                        origin[2] + iz as f64 * spacing[2],
                    ];
                    let jet = provider.jet(x)?;
                    let node = ((iz * dims[1] + iy) * dims[0] + ix) * CHANNELS;
                    data[node..node + 6].copy_from_slice(&jet.g);
                    data[node + 6..node + 12].copy_from_slice(&jet.k);
                    data[node + 12] = 1.0;
                }
            }
        }
        Ok(GridDataSet {
            dims,
            origin,
            spacing,
            data,
        })
    }

    /// Serializes to the `CEGRID1` format.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = Vec::with_capacity(self.data.len() * 8 + 128);
        writeln!(out, "{MAGIC}").unwrap();
        writeln!(out, "{} {} {}", self.dims[0], self.dims[1], self.dims[2]).unwrap();
        writeln!(
            out,
            "{:.17e} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e}",
            self.origin[0],
            self.origin[1],
            self.origin[2],
            self.spacing[0],
            self.spacing[1],
            self.spacing[2]
        )
        .unwrap();
        writeln!(out).unwrap();
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    /// Per-axis stencil data for a query coordinate, or `None` when the
    /// point leaves the region where a full 4-point stencil exists.
    fn axis_stencil(&self, axis: usize, q: f64) -> Option<(usize, f64)> {
        let n = self.dims[axis];
        let t = (q - self.origin[axis]) / self.spacing[axis];
        if !(t >= 1.0 && t <= (n - 2) as f64) {
            return None;
        }
        let mut i0 = t.floor() as usize;
        i0 = i0.clamp(1, n - 3);
        Some((i0, t - i0 as f64))
    }

    /// Cubic Lagrange weights on the stencil offsets {−1,0,1,2} for the
    /// value and its first two derivatives, already scaled by 1/h^order.
    fn lagrange_weights(s: f64, h: f64) -> [[f64; 4]; 3] {
        let w0 = [
            -s * (s - 1.0) * (s - 2.0) / 6.0,
            (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
            -(s + 1.0) * s * (s - 2.0) / 2.0,
            (s + 1.0) * s * (s - 1.0) / 6.0,
        ];
        // d/ds of the cubics above.
        let w1 = [
            -(3.0 * s * s - 6.0 * s + 2.0) / 6.0,
            (3.0 * s * s - 4.0 * s - 1.0) / 2.0,
            -(3.0 * s * s - 2.0 * s - 2.0) / 2.0,
            (3.0 * s * s - 1.0) / 6.0,
        ];
        let w2 = [
            -(6.0 * s - 6.0) / 6.0,
            (6.0 * s - 4.0) / 2.0,
            -(6.0 * s - 2.0) / 2.0,
            (6.0 * s) / 6.0,
        ];
        let inv_h = 1.0 / h;
        [
            w0,
            w1.map(|w| w * inv_h),
            w2.map(|w| w * inv_h * inv_h),
        ]
    }

    /// Interpolated value/gradient/Hessian of the given channels.
    ///
    /// Output layout per channel: `[v, vx, vy, vz, vxx, vxy, vxz, vyy,
    /// vyz, vzz]`.
    fn interp_jet(&self, x: [f64; 3], channels: &[usize]) -> Result<Vec<[f64; 10]>> {
        let mut base = [0usize; 3];
        let mut wts = [[[0.0; 4]; 3]; 3];
        for axis in 0..3 {
            let (i0, s) = self.axis_stencil(axis, x[axis]).ok_or(CoreError::DomainError {
                x: x[0],
                y: x[1],
                z: x[2],
                message: format!("outside the interpolable interior of the grid (axis {axis})"),
            })?;
            base[axis] = i0;
            wts[axis] = Self::lagrange_weights(s, self.spacing[axis]);
        }
        // Derivative-order triples in the output order documented above.
        const ORDERS: [[usize; 3]; 10] = [
            [0, 0, 0],
            [1, 0, 0],
            [0, 1, 0],
            [0, 0, 1],
            [2, 0, 0],
            [1, 1, 0],
            [1, 0, 1],
            [0, 2, 0],
            [0, 1, 1],
            [0, 0, 2],
        ];
        let mut out = vec![[0.0; 10]; channels.len()];
        let (nx, ny) = (self.dims[0], self.dims[1]);
        for cz in 0..4 {
            let iz = base[2] - 1 + cz;
            for cy in 0..4 {
                let iy = base[1] - 1 + cy;
                for cx in 0..4 {
                    let ix = base[0] - 1 + cx;
                    let node = ((iz * ny + iy) * nx + ix) * CHANNELS;
                    for (slot, &ch) in channels.iter().enumerate() {
                        let val = self.data[node + ch];
                        for (k, ord) in ORDERS.iter().enumerate() {
                            out[slot][k] += wts[0][ord[0]][cx]
                                * wts[1][ord[1]][cy]
                                * wts[2][ord[2]][cz]
                                * val;
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Interpolated lapse value, gradient and Hessian (channel 13 of the
    /// format is a placeholder and not used here).
    pub fn alpha_jet(&self, x: [f64; 3]) -> Result<(f64, [f64; 3], [[f64; 3]; 3])> {
        let v = self.interp_jet(x, &[12])?;
        let j = v[0];
        let grad = [j[1], j[2], j[3]];
        let hess = [
            [j[4], j[5], j[6]],
            [j[5], j[7], j[8]],
            [j[6], j[8], j[9]],
        ];
        Ok((j[0], grad, hess))
    }
}

impl InitialData for GridDataSet {
    fn metadata(&self) -> ProviderMetadata {
        ProviderMetadata {
            mass_param: 0.0,
            momentum_param: [0.0; 3],
            eps: 0.5,
            r_inner: 0.0,
        }
    }

    fn jet(&self, x: [f64; 3]) -> Result<AmbientJet> {
        let g_channels: [usize; 6] = [0, 1, 2, 3, 4, 5];
        let k_channels: [usize; 6] = [6, 7, 8, 9, 10, 11];
        let all: Vec<usize> = g_channels.iter().chain(k_channels.iter()).copied().collect();
        let vals = self.interp_jet(x, &all)?;
        let mut jet = AmbientJet::flat();
        for ab in 0..6 {
            let v = vals[ab];
            jet.g[ab] = v[0];
            for (d, g) in [(0usize, 1usize), (1, 2), (2, 3)] {
                jet.dg[d][ab] = v[g];
            }
            let hess = [
                [v[4], v[5], v[6]],
                [v[5], v[7], v[8]],
                [v[6], v[8], v[9]],
            ];
            for d1 in 0..3 {
                for d2 in 0..3 {
                    jet.ddg[d1][d2][ab] = hess[d1][d2];
                }
            }
            let k = vals[6 + ab];
            jet.k[ab] = k[0];
            for (d, g) in [(0usize, 1usize), (1, 2), (2, 3)] {
                jet.dk[d][ab] = k[g];
            }
        }
        Ok(jet)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initialdata::{Flat, Schwarzschild};

    fn tmpfile(name: &str) -> std::path::PathBuf {
        let mut p = std::env::temp_dir();
        p.push(format!("cefoliator-gridtest-{}-{name}", std::process::id()));
        p
    }

    #[test]
    fn flat_grid_interpolates_exactly() {
        let grid = GridDataSet::sample_from(
            &Flat::new(),
            [-2.0, -2.0, -2.0],
            [0.5, 0.5, 0.5],
            [9, 9, 9],
        )
        .unwrap();
        let jet = grid.jet([0.13, -0.42, 0.31]).unwrap();
        let flat = AmbientJet::flat();
        for ab in 0..6 {
            assert!((jet.g[ab] - flat.g[ab]).abs() < 1e-12);
            assert!(jet.k[ab].abs() < 1e-12);
            for d in 0..3 {
                assert!(jet.dg[d][ab].abs() < 1e-12);
                for d2 in 0..3 {
                    assert!(jet.ddg[d][d2][ab].abs() < 1e-11);
                }
            }
        }
        let (a, da, _) = grid.alpha_jet([0.13, -0.42, 0.31]).unwrap();
        assert!((a - 1.0).abs() < 1e-12);
        assert!(da.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn schwarzschild_grid_converges_fourth_order() {
        // Max error over a probe lattice spanning many cells, so the
        // cell-phase dependence of the Lagrange error constant averages
        // out and halving h shows the clean O(h⁴) factor.
        let exact = Schwarzschild::new(1.0);
        let probes: Vec<[f64; 3]> = (0..4)
            .flat_map(|a| (0..4).flat_map(move |b| (0..4).map(move |c| (a, b, c))))
            .map(|(a, b, c)| {
                [
                    5.55 + 0.37 * a as f64,
                    -0.61 + 0.29 * b as f64,
                    -0.47 + 0.31 * c as f64,
                ]
            })
            .collect();
        let err_at = |h: f64, dims: usize| {
            let grid = GridDataSet::sample_from(
                &exact,
                [4.5, -1.5, -1.7],
                [h, h, h],
                [dims, dims, dims],
            )
            .unwrap();
            probes
                .iter()
                .map(|&p| {
                    let ji = grid.jet(p).unwrap();
                    let je = exact.jet(p).unwrap();
                    (0..6)
                        .map(|ab| (ji.g[ab] - je.g[ab]).abs())
                        .fold(0.0f64, f64::max)
                })
                .fold(0.0f64, f64::max)
        };
        let e1 = err_at(0.25, 17);
        let e2 = err_at(0.125, 33);
        assert!(e1 > 1e-12, "coarse error suspiciously small: {e1}");
        let ratio = e1 / e2;
        assert!(
            ratio > 11.0 && ratio < 23.0,
            "halving h gave ratio {ratio}, expected ~16"
        );
    }

    #[test]
    fn grid_derivatives_track_exact_jets() {
        let exact = Schwarzschild::new(1.0);
        let grid = GridDataSet::sample_from(
            &exact,
            [4.5, -1.5, -1.7],
            [0.25, 0.25, 0.25],
            [17, 17, 17],
        )
        .unwrap();
        let probe = [6.3, 0.4, -0.3];
        let ji = grid.jet(probe).unwrap();
        let je = exact.jet(probe).unwrap();
        for d in 0..3 {
            for ab in 0..6 {
                assert!(
                    (ji.dg[d][ab] - je.dg[d][ab]).abs() < 1e-4,
                    "dg[{d}][{ab}]"
                );
                for d2 in 0..3 {
                    assert!(
                        (ji.ddg[d][d2][ab] - je.ddg[d][d2][ab]).abs() < 3e-3,
                        "ddg[{d}][{d2}][{ab}]"
                    );
                }
            }
        }
    }

    #[test]
    fn round_trip_preserves_jets() {
        let exact = Schwarzschild::new(1.0);
        let grid = GridDataSet::sample_from(
            &exact,
            [4.5, -1.5, -1.7],
            [0.5, 0.5, 0.5],
            [9, 9, 9],
        )
        .unwrap();
        let path = tmpfile("roundtrip.grid");
        grid.write(&path).unwrap();
        let loaded = GridDataSet::load(&path).unwrap();
        std::fs::remove_file(&path).ok();
        let p = [6.2, 0.1, -0.4];
        let a = grid.jet(p).unwrap();
        let b = loaded.jet(p).unwrap();
        assert_eq!(a.g, b.g);
        assert_eq!(a.ddg, b.ddg);
        assert_eq!(a.dk, b.dk);
    }

    #[test]
    fn truncated_file_is_a_parse_error() {
        let grid = GridDataSet::sample_from(
            &Flat::new(),
            [0.0, 0.0, 0.0],
            [1.0, 1.0, 1.0],
            [4, 4, 4],
        )
        .unwrap();
        let path = tmpfile("trunc.grid");
        grid.write(&path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        std::fs::remove_file(&path).ok();
        bytes.truncate(bytes.len() - 9);
        match GridDataSet::from_bytes(&bytes) {
            Err(CoreError::ParseError { message, .. }) => {
                assert!(message.contains("truncated"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn nan_payload_is_a_parse_error_with_offset() {
        let grid = GridDataSet::sample_from(
            &Flat::new(),
            [0.0, 0.0, 0.0],
            [1.0, 1.0, 1.0],
            [4, 4, 4],
        )
        .unwrap();
        let path = tmpfile("nan.grid");
        grid.write(&path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        std::fs::remove_file(&path).ok();
        let payload_start = bytes.len() - 4 * 4 * 4 * CHANNELS * 8;
        let poison = payload_start + 8 * 37;
        bytes[poison..poison + 8].copy_from_slice(&f64::NAN.to_le_bytes());
        match GridDataSet::from_bytes(&bytes) {
            Err(CoreError::ParseError { offset, message }) => {
                assert_eq!(offset, poison, "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn bad_headers_are_rejected() {
        assert!(GridDataSet::from_bytes(b"WRONG\n4 4 4\n0 0 0 1 1 1\n\n").is_err());
        assert!(GridDataSet::from_bytes(b"CEGRID1\n4 4\n0 0 0 1 1 1\n\n").is_err());
        // negative spacing = non-increasing axis
        assert!(GridDataSet::from_bytes(b"CEGRID1\n4 4 4\n0 0 0 -1 1 1\n\n").is_err());
        // too few nodes for the stencil
        assert!(GridDataSet::from_bytes(b"CEGRID1\n3 4 4\n0 0 0 1 1 1\n\n").is_err());
    }

    #[test]
    fn out_of_domain_queries_error() {
        let grid = GridDataSet::sample_from(
            &Flat::new(),
            [0.0, 0.0, 0.0],
            [1.0, 1.0, 1.0],
            [6, 6, 6],
        )
        .unwrap();
        // valid region is [1,4]³ (one-cell margin for the stencil)
        assert!(grid.jet([2.5, 2.5, 2.5]).is_ok());
        assert!(grid.jet([0.5, 2.5, 2.5]).is_err());
        assert!(grid.jet([2.5, 2.5, 4.7]).is_err());
    }
}
