//! Digital beamforming for the virtual linear array.
//!
//! The array is an N-element uniform line at λ/2 pitch. Images are formed by
//! a weighted coherent sum over elements,
//!
//! ```text
//! I'(r, φ, t) = Σ_n w_n(φ) · s_n(t, 2r/c),      w_n(φ) = α_n · e^{jπ(n−1) sin φ}
//! ```
//!
//! with Taylor-taper amplitudes α_n trading mainlobe width for sidelobe
//! suppression. Polar images convert to Cartesian via (x, y) = (−r sin φ,
//! r cos φ) using nearest-neighbor resampling, which preserves complex phase
//! exactly — downstream displacement recovery lives in that phase.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::RangeProfileCube;

/// Geometry and taper of the virtual receive array.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArrayConfig {
    /// Number of virtual elements.
    pub n_elements: usize,
    /// Element pitch in wavelengths (0.5 for the virtual array).
    pub spacing_wavelengths: f64,
    /// Carrier wavelength in meters.
    pub lambda_m: f64,
    /// Taylor sidelobe level in dB (negative).
    pub taper_sll_db: f64,
    /// Taylor n̄ (number of near-in sidelobes held at the design level).
    pub taper_nbar: usize,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        ArrayConfig {
            n_elements: 12,
            spacing_wavelengths: 0.5,
            lambda_m: 3.8e-3,
            taper_sll_db: -30.0,
            taper_nbar: 4,
        }
    }
}

impl ArrayConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_elements < 1 {
            return Err(Error::InvalidParameter("n_elements must be >= 1".into()));
        }
        if !(self.spacing_wavelengths > 0.0) {
            return Err(Error::InvalidParameter(
                "spacing_wavelengths must be > 0".into(),
            ));
        }
        if !(self.lambda_m > 0.0) {
            return Err(Error::InvalidParameter("lambda_m must be > 0".into()));
        }
        Ok(())
    }

    /// Taper coefficients for this array.
    pub fn taper(&self) -> Result<Vec<f64>> {
        taylor_taper(self.n_elements, self.taper_sll_db, self.taper_nbar)
    }
}

/// Which grid a [`RadarImage`] lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Polar,
    Cartesian,
}

/// Complex radar image over (axis0, axis1) × slow time.
///
/// Polar images index (range, azimuth); Cartesian images index (y, x) after
/// resampling. Cell series are stored contiguously over slow time so the
/// per-cell phase history can be borrowed as a slice.
#[derive(Debug, Clone)]
pub struct RadarImage {
    pub grid_kind: GridKind,
    /// Polar: range bin centers in meters. Cartesian: y axis in meters.
    pub range_axis: Vec<f64>,
    /// Polar: azimuth bin centers in degrees. Cartesian: x axis in meters.
    pub azimuth_axis: Vec<f64>,
    /// Slow-time sampling rate, Hz.
    pub fs_slow: f64,
    /// Cell-major data: `[axis0][axis1][slow]`.
    data: Vec<Complex64>,
    n_slow: usize,
}

impl RadarImage {
    /// Builds an image, validating the axis/data contract.
    pub fn new(
        grid_kind: GridKind,
        range_axis: Vec<f64>,
        azimuth_axis: Vec<f64>,
        fs_slow: f64,
        n_slow: usize,
        data: Vec<Complex64>,
    ) -> Result<Self> {
        if data.len() != range_axis.len() * azimuth_axis.len() * n_slow {
            return Err(Error::InvalidParameter(format!(
                "image data length {} does not match {}x{}x{}",
                data.len(),
                range_axis.len(),
                azimuth_axis.len(),
                n_slow
            )));
        }
        for axis in [&range_axis, &azimuth_axis] {
            if axis.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::InvalidParameter(
                    "image axes must be strictly increasing".into(),
                ));
            }
        }
        if !(fs_slow > 0.0) {
            return Err(Error::InvalidParameter("fs_slow must be > 0".into()));
        }
        Ok(RadarImage {
            grid_kind,
            range_axis,
            azimuth_axis,
            fs_slow,
            data,
            n_slow,
        })
    }

    pub fn n_axis0(&self) -> usize {
        self.range_axis.len()
    }

    pub fn n_axis1(&self) -> usize {
        self.azimuth_axis.len()
    }

    pub fn n_slow(&self) -> usize {
        self.n_slow
    }

    #[inline]
    pub fn at(&self, i0: usize, i1: usize, t: usize) -> Complex64 {
        self.data[(i0 * self.azimuth_axis.len() + i1) * self.n_slow + t]
    }

    /// Slow-time series of one cell.
    #[inline]
    pub fn cell_series(&self, i0: usize, i1: usize) -> &[Complex64] {
        let base = (i0 * self.azimuth_axis.len() + i1) * self.n_slow;
        &self.data[base..base + self.n_slow]
    }

    pub(crate) fn cell_series_mut(&mut self, i0: usize, i1: usize) -> &mut [Complex64] {
        let base = (i0 * self.azimuth_axis.len() + i1) * self.n_slow;
        &mut self.data[base..base + self.n_slow]
    }

    /// Raw cell-major storage (`[axis0][axis1][slow]`).
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }
}

/// Classic Taylor line-source taper, normalized to max = 1.
///
/// `nbar` near-in sidelobes are held near `sll_db`; beyond them the pattern
/// decays like the uniform taper. `n = 1` degenerates to `[1.0]`.
pub fn taylor_taper(n: usize, sll_db: f64, nbar: usize) -> Result<Vec<f64>> {
    if n < 1 {
        return Err(Error::InvalidParameter("taper length must be >= 1".into()));
    }
    if !(sll_db < 0.0) {
        return Err(Error::InvalidParameter("taper sll_db must be < 0".into()));
    }
    if n == 1 {
        // Degenerate window; nbar is meaningless for a single element.
        return Ok(vec![1.0]);
    }
    if nbar < 1 || 2 * nbar > n {
        return Err(Error::InvalidParameter(format!(
            "taper nbar must satisfy 1 <= nbar <= n/2 (got nbar={nbar}, n={n})"
        )));
    }

    // Design parameter A from the sidelobe ratio, and the dilation factor
    // sigma^2 that stitches the Taylor zeros onto the uniform-taper zeros.
    let r = 10f64.powf(-sll_db / 20.0);
    let a = r.acosh() / std::f64::consts::PI;
    let nb = nbar as f64;
    let sigma2 = nb * nb / (a * a + (nb - 0.5) * (nb - 0.5));

    // Fourier coefficients F_m of the aperture distribution.
    let mut fm = vec![0.0f64; nbar];
    for m in 1..nbar {
        let mf = m as f64;
        let mut num = 1.0;
        for j in 1..nbar {
            let jf = j as f64;
            num *= 1.0 - mf * mf / (sigma2 * (a * a + (jf - 0.5) * (jf - 0.5)));
        }
        let mut den = 1.0;
        for j in 1..nbar {
            if j != m {
                let jf = j as f64;
                den *= 1.0 - mf * mf / (jf * jf);
            }
        }
        fm[m] = if m % 2 == 1 { 0.5 } else { -0.5 } * num / den;
    }

    let mut w = vec![1.0f64; n];
    let center = (n as f64 - 1.0) / 2.0;
    for (k, wk) in w.iter_mut().enumerate() {
        for (m, &f) in fm.iter().enumerate().skip(1) {
            *wk += 2.0
                * f
                * (2.0 * std::f64::consts::PI * m as f64 * (k as f64 - center) / n as f64).cos();
        }
    }
    let max = w.iter().cloned().fold(f64::MIN, f64::max);
    for wk in &mut w {
        *wk /= max;
    }
    Ok(w)
}

/// Steering weights w_n(φ) = α_n · e^{jπ(n−1) sin φ} for a λ/2-pitch line.
pub fn steer_weights(phi_deg: f64, taper: &[f64]) -> Vec<Complex64> {
    let s = phi_deg.to_radians().sin();
    taper
        .iter()
        .enumerate()
        .map(|(n, &alpha)| {
            let phase = std::f64::consts::PI * n as f64 * s;
            Complex64::from_polar(alpha, phase)
        })
        .collect()
}

/// Forms a polar image over the cube's range bins and the given azimuth grid.
pub fn form_image(
    cube: &RangeProfileCube,
    azimuth_grid_deg: &[f64],
    array: &ArrayConfig,
) -> Result<RadarImage> {
    array.validate()?;
    if cube.n_elements != array.n_elements {
        return Err(Error::InvalidParameter(format!(
            "cube has {} elements, array expects {}",
            cube.n_elements, array.n_elements
        )));
    }
    if azimuth_grid_deg.is_empty() {
        return Err(Error::InvalidParameter("azimuth grid is empty".into()));
    }
    let taper = array.taper()?;
    let (n_el, n_slow, n_range) = (cube.n_elements, cube.n_slow(), cube.n_range);
    let n_az = azimuth_grid_deg.len();

    let mut data = vec![Complex64::default(); n_range * n_az * n_slow];
    for (ai, &phi) in azimuth_grid_deg.iter().enumerate() {
        let w = steer_weights(phi, &taper);
        for n in 0..n_el {
            let wn = w[n];
            for t in 0..n_slow {
                let row = cube.element_slow_row(n, t);
                for r in 0..n_range {
                    data[(r * n_az + ai) * n_slow + t] += wn * row[r];
                }
            }
        }
    }

    let range_axis: Vec<f64> = (0..n_range)
        .map(|r| r as f64 * cube.range_bin_m)
        .collect();
    RadarImage::new(
        GridKind::Polar,
        range_axis,
        azimuth_grid_deg.to_vec(),
        cube.fs_slow,
        n_slow,
        data,
    )
}

/// Resamples a polar image onto a Cartesian (x, y) grid, nearest neighbor.
///
/// Uses the sign convention (x, y) = (−r sin φ, r cos φ); cells with no polar
/// source inside the grid coverage are zero-filled.
pub fn polar_to_cartesian(image: &RadarImage, x_axis: &[f64], y_axis: &[f64]) -> Result<RadarImage> {
    if image.grid_kind != GridKind::Polar {
        return Err(Error::InvalidParameter(
            "polar_to_cartesian needs a polar image".into(),
        ));
    }
    if x_axis.is_empty() || y_axis.is_empty() {
        return Err(Error::InvalidParameter("Cartesian grid is empty".into()));
    }
    let n_slow = image.n_slow;
    let mut data = vec![Complex64::default(); y_axis.len() * x_axis.len() * n_slow];

    let r_axis = &image.range_axis;
    let a_axis = &image.azimuth_axis;
    let r_half = half_step(r_axis);
    let a_half = half_step(a_axis);

    for (yi, &y) in y_axis.iter().enumerate() {
        for (xi, &x) in x_axis.iter().enumerate() {
            let r = (x * x + y * y).sqrt();
            // x = −r sin φ, y = r cos φ  ⇒  φ = atan2(−x, y)
            let phi = (-x).atan2(y).to_degrees();
            let (ri, rd) = nearest(r_axis, r);
            let (ai, ad) = nearest(a_axis, phi);
            if rd <= r_half && ad <= a_half {
                let src = image.cell_series(ri, ai);
                let base = (yi * x_axis.len() + xi) * n_slow;
                data[base..base + n_slow].copy_from_slice(src);
            }
        }
    }

    RadarImage::new(
        GridKind::Cartesian,
        y_axis.to_vec(),
        x_axis.to_vec(),
        image.fs_slow,
        n_slow,
        data,
    )
}

/// Nearest axis index and the absolute distance to it.
fn nearest(axis: &[f64], v: f64) -> (usize, f64) {
    let mut lo = 0usize;
    let mut hi = axis.len();
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if axis[mid] <= v {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut best = lo;
    if lo + 1 < axis.len() && (axis[lo + 1] - v).abs() < (axis[lo] - v).abs() {
        best = lo + 1;
    }
    (best, (axis[best] - v).abs())
}

/// Half the largest axis step: coverage radius for nearest-neighbor lookup.
fn half_step(axis: &[f64]) -> f64 {
    axis.windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0f64, f64::max)
        / 2.0
        + 1e-12
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{gen_cube, gen_waveform, RespirationParams, SceneConfig};

    #[test]
    fn taper_degenerate_single_element() {
        assert_eq!(taylor_taper(1, -30.0, 4).unwrap(), vec![1.0]);
        assert!(taylor_taper(12, -30.0, 7).is_err());
        assert!(taylor_taper(12, 30.0, 4).is_err());
    }

    #[test]
    fn taper_symmetric_12() {
        let w = taylor_taper(12, -30.0, 4).unwrap();
        assert_eq!(w.len(), 12);
        for k in 0..12 {
            assert!(
                (w[k] - w[11 - k]).abs() < 1e-12,
                "taper not palindromic at {k}"
            );
        }
        assert!(w.iter().all(|&x| x > 0.0 && x <= 1.0 + 1e-15));
    }

    #[test]
    fn taper_sidelobes_below_29db() {
        // Brute-force array factor of the tapered 12-element pattern.
        let w = taylor_taper(12, -30.0, 4).unwrap();
        let n_grid = 36001;
        let mut af = Vec::with_capacity(n_grid);
        for i in 0..n_grid {
            let phi = -90.0 + 180.0 * i as f64 / (n_grid - 1) as f64;
            let s = (phi as f64).to_radians().sin();
            let mut acc = Complex64::default();
            for (n, &alpha) in w.iter().enumerate() {
                acc += Complex64::from_polar(alpha, std::f64::consts::PI * n as f64 * s);
            }
            af.push(acc.norm());
        }
        let peak = af.iter().cloned().fold(0.0f64, f64::max);
        let db: Vec<f64> = af.iter().map(|a| 20.0 * (a / peak).log10()).collect();
        // Walk outward from the peak to the first -25 dB crossings, then take
        // the max beyond them.
        let pk = db
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        let mut i = pk;
        while i > 0 && db[i] > -25.0 {
            i -= 1;
        }
        let mut j = pk;
        while j < db.len() - 1 && db[j] > -25.0 {
            j += 1;
        }
        let sidelobe = db[..i]
            .iter()
            .chain(db[j + 1..].iter())
            .cloned()
            .fold(f64::MIN, f64::max);
        assert!(
            sidelobe <= -29.0,
            "peak sidelobe {sidelobe:.2} dB above -29 dB"
        );
    }

    #[test]
    fn steer_weight_examples() {
        let taper = vec![1.0; 3];
        let w = steer_weights(0.0, &taper);
        for wn in &w {
            assert!((wn.im).abs() < 1e-15 && (wn.re - 1.0).abs() < 1e-15);
        }
        // phi = 30°, n = 3 (index 2): phase = π·2·sin(30°) = π.
        let w = steer_weights(30.0, &taper);
        let expect = std::f64::consts::PI;
        assert!((w[2].arg().abs() - expect).abs() < 1e-12);
    }

    #[test]
    fn cartesian_mapping_examples() {
        // (r = 1 m, φ = 0°) → (0, 1); (r = 1, φ = 30°) → (−0.5, 0.866).
        let r = 1.0f64;
        for (phi, ex, ey) in [(0.0, 0.0, 1.0), (30.0f64, -0.5, 0.866_025_4)] {
            let x = -r * phi.to_radians().sin();
            let y = r * phi.to_radians().cos();
            assert!((x - ex).abs() < 1e-6 && (y - ey).abs() < 1e-6);
        }
    }

    fn small_scene(theta_az: f64) -> (RangeProfileCube, ArrayConfig) {
        let params = RespirationParams {
            f0_hz: 0.25,
            a1_mm: 0.8,
            a2_mm: 0.3,
            a3_mm: 0.15,
            psi1_rad: 0.4,
            psi2_rad: -0.2,
            psi3_rad: 1.0,
            drift_sigma_mm: 0.0,
            noise_sigma_mm: 0.0,
        };
        let wf = gen_waveform(&params, 20.0, 10.0, 1).unwrap();
        let scene = SceneConfig {
            theta_deg: 0.0,
            target_range_m: 1.0,
            target_azimuth_deg: theta_az,
            snr_db: None,
            ..SceneConfig::default()
        };
        let array = ArrayConfig::default();
        let cube = gen_cube(&scene, &wf, &array, 2).unwrap();
        (cube, array)
    }

    #[test]
    fn steering_correctness_argmax_at_target() {
        let (cube, array) = small_scene(18.0);
        let grid: Vec<f64> = (-60..=60).map(|d| d as f64).collect();
        let img = form_image(&cube, &grid, &array).unwrap();
        let r_bin = (1.0 / cube.range_bin_m).round() as usize;
        for t in [0, 37, img.n_slow() - 1] {
            let (best, _) = grid
                .iter()
                .enumerate()
                .map(|(i, _)| (i, img.at(r_bin, i, t).norm()))
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            assert_eq!(grid[best], 18.0, "argmax off target at t={t}");
        }
    }

    #[test]
    fn beamforming_preserves_phase_differences() {
        let (cube, array) = small_scene(-22.0);
        let grid: Vec<f64> = (-60..=60).map(|d| d as f64).collect();
        let img = form_image(&cube, &grid, &array).unwrap();
        let r_bin = (1.0 / cube.range_bin_m).round() as usize;
        let a_bin = grid.iter().position(|&a| a == -22.0).unwrap();
        let formed = img.cell_series(r_bin, a_bin);
        let single: Vec<Complex64> = (0..cube.n_slow())
            .map(|t| cube.element_slow_row(0, t)[r_bin])
            .collect();
        for t in 1..formed.len() {
            let df = (formed[t] / formed[t - 1]).arg();
            let ds = (single[t] / single[t - 1]).arg();
            assert!(
                (df - ds).abs() < 1e-9,
                "phase difference drifted at t={t}: {df} vs {ds}"
            );
        }
    }

    #[test]
    fn form_image_linear_in_cube() {
        let (cube, array) = small_scene(5.0);
        let grid = [-10.0, 0.0, 5.0, 10.0];
        let img1 = form_image(&cube, &grid, &array).unwrap();
        let mut cube2 = cube.clone();
        for v in cube2.data_mut() {
            *v *= Complex64::new(2.0, 0.5);
        }
        let img2 = form_image(&cube2, &grid, &array).unwrap();
        for (a, b) in img1.data().iter().zip(img2.data()) {
            let want = a * Complex64::new(2.0, 0.5);
            assert!((want - b).norm() <= 1e-12 * want.norm().max(1.0));
        }
    }

    #[test]
    fn cartesian_round_trip_preserves_value() {
        let (cube, array) = small_scene(0.0);
        let grid: Vec<f64> = (-30..=30).map(|d| d as f64).collect();
        let img = form_image(&cube, &grid, &array).unwrap();
        // Grid-aligned point: the target cell itself.
        let r_bin = (1.0 / cube.range_bin_m).round() as usize;
        let r = img.range_axis[r_bin];
        let x_axis = vec![-0.02, 0.0, 0.02];
        let y_axis = vec![r - 0.02, r, r + 0.02];
        let cart = polar_to_cartesian(&img, &x_axis, &y_axis).unwrap();
        let a_bin = grid.iter().position(|&a| a == 0.0).unwrap();
        for t in 0..img.n_slow() {
            assert_eq!(cart.at(1, 1, t), img.at(r_bin, a_bin, t));
        }
    }
}
