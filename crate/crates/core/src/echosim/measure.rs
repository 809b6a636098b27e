use std::collections::VecDeque;

use num_complex::Complex64;

use super::synth::sinc;
use super::{ComplexImage, EchoError};
use crate::geom::{Vec2, Vec3};

/// Directions along which impulse-response widths are measured, and how far
/// from the expected position to look for the peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrwAxes {
    pub range: Vec2,
    pub azimuth: Vec2,
    pub search_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrwMeasurement {
    pub peak_pos: Vec3,
    /// Brightest pixel.
    pub peak: Complex64,
    /// -3 dB width along the range axis, m.
    pub rho_r_meas: f64,
    /// -3 dB width along the azimuth axis, m.
    pub rho_a_meas: f64,
    /// Area of the contiguous -3 dB region around the peak, m².
    pub cell_area_meas: f64,
    /// Highest first sidelobe over both profiles, dB below the peak. `None`
    /// when no profile reaches a sidelobe inside the image.
    pub pslr: Option<f64>,
}

/// Oversampling of the measurement profiles relative to the pixel spacing.
const PROFILE_OVERSAMPLE: f64 = 16.0;

/// Minimum peak-to-median power ratio for a peak to count as a target.
const NOISE_FLOOR_RATIO: f64 = 10.0;

pub fn measure_irw(image: &ComplexImage, near: Vec3, axes: IrwAxes) -> Result<IrwMeasurement, EchoError> {
    let g = image.grid;
    let no_peak = EchoError::NoPeak { near, radius: axes.search_radius };
    let r2 = axes.search_radius * axes.search_radius;
    let mut best: Option<(usize, usize, f64)> = None;
    for j in 0..g.n_y {
        for i in 0..g.n_x {
            let p = g.position(i, j);
            let d = p - near;
            if d.x * d.x + d.y * d.y > r2 {
                continue;
            }
            let pw = image.power(i, j);
            if best.is_none_or(|b| pw > b.2) {
                best = Some((i, j, pw));
            }
        }
    }
    let (pi, pj, pixel_peak) = best.ok_or(no_peak.clone())?;
    if !(pixel_peak > 0.0) {
        return Err(no_peak);
    }
    if pi == 0 || pj == 0 || pi == g.n_x - 1 || pj == g.n_y - 1 {
        return Err(EchoError::RegionTouchesBorder);
    }

    let vertex = |a: f64, b: f64, c: f64| {
        let den = a - 2.0 * b + c;
        if den.abs() > 0.0 {
            (0.5 * (a - c) / den).clamp(-0.5, 0.5)
        } else {
            0.0
        }
    };
    let mag = |i, j| image.at(i, j).norm();
    let dx = vertex(mag(pi - 1, pj), mag(pi, pj), mag(pi + 1, pj));
    let dy = vertex(mag(pi, pj - 1), mag(pi, pj), mag(pi, pj + 1));
    let center = g.position(pi, pj) + Vec3::new(dx * g.spacing, dy * g.spacing, 0.0);
    let peak = image.at(pi, pj);

    let range = profile_width(image, center, axes.range)?;
    let azimuth = profile_width(image, center, axes.azimuth)?;
    let peak_power = pixel_peak.max(range.peak_power).max(azimuth.peak_power);
    let pixels = half_power_region(image, (pi, pj), 0.5 * peak_power)?;
    let mut powers: Vec<f64> = image.data.iter().map(|z| z.norm_sqr()).collect();
    let mid = powers.len() / 2;
    let median = *powers.select_nth_unstable_by(mid, f64::total_cmp).1;
    if !(peak_power > NOISE_FLOOR_RATIO * median) {
        return Err(no_peak);
    }
    let pslr = match (range.sidelobe, azimuth.sidelobe) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (a, b) => a.or(b),
    }
    .map(|s| 10.0 * (s / peak_power).log10());

    Ok(IrwMeasurement {
        peak_pos: center,
        peak,
        rho_r_meas: range.width,
        rho_a_meas: azimuth.width,
        cell_area_meas: pixels as f64 * g.pixel_area(),
        pslr,
    })
}

struct Profile {
    width: f64,
    peak_power: f64,
    /// Power of the higher first sidelobe of the two sides.
    sidelobe: Option<f64>,
}

fn profile_width(image: &ComplexImage, center: Vec3, dir: Vec2) -> Result<Profile, EchoError> {
    let dir = dir.unit().ok_or_else(|| EchoError::InvalidGrid("measurement axis has zero length".into()))?;
    let h = image.grid.spacing / PROFILE_OVERSAMPLE;
    let at = |s: f64| image.sample_magnitude(center.x + s * dir.x, center.y + s * dir.y).map(|m| m * m);
    let side = |sign: f64| -> Vec<f64> {
        let mut out = Vec::new();
        let mut m = 0.0;
        while let Some(p) = at(sign * m * h) {
            out.push(p);
            m += 1.0;
        }
        out
    };
    let fwd = side(1.0);
    let back = side(-1.0);
    // The interpolated peak may sit up to a pixel off the grid maximum.
    let near = PROFILE_OVERSAMPLE as usize;
    let peak_power = fwd.iter().take(near).chain(back.iter().take(near)).copied().fold(0.0, f64::max);
    let half = 0.5 * peak_power;
    let crossing = |p: &[f64]| -> Result<(f64, Option<f64>), EchoError> {
        let top = (0..p.len().min(near)).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap_or(0);
        let k = (top..p.len()).find(|&k| p[k] < half).ok_or(EchoError::RegionTouchesBorder)?;
        let frac = (p[k - 1] - half) / (p[k - 1] - p[k]);
        Ok(((k as f64 - 1.0 + frac) * h, first_sidelobe(&p[k..])))
    };
    let (right, side_r) = crossing(&fwd)?;
    let (left, side_l) = crossing(&back)?;
    let sidelobe = match (side_r, side_l) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (a, b) => a.or(b),
    };
    Ok(Profile { width: right + left, peak_power, sidelobe })
}

/// Maximum of the first lobe after the first null of a decaying profile.
fn first_sidelobe(p: &[f64]) -> Option<f64> {
    let null = (1..p.len()).find(|&k| p[k] > p[k - 1])?;
    let top = (null..p.len()).find(|&k| k + 1 < p.len() && p[k + 1] < p[k])?;
    Some(p[top])
}

/// Count of pixels 4-connected to `seed` with power at or above `threshold`.
fn half_power_region(image: &ComplexImage, seed: (usize, usize), threshold: f64) -> Result<usize, EchoError> {
    let g = image.grid;
    let mut seen = vec![false; g.len()];
    let mut queue = VecDeque::from([seed]);
    seen[seed.1 * g.n_x + seed.0] = true;
    let mut count = 0;
    while let Some((i, j)) = queue.pop_front() {
        if i == 0 || j == 0 || i == g.n_x - 1 || j == g.n_y - 1 {
            return Err(EchoError::RegionTouchesBorder);
        }
        count += 1;
        for (ni, nj) in [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)] {
            let idx = nj * g.n_x + ni;
            if !seen[idx] && image.power(ni, nj) >= threshold {
                seen[idx] = true;
                queue.push_back((ni, nj));
            }
        }
    }
    Ok(count)
}

/// Area of the -3 dB region of an ideal separable response
/// `sinc(u)·sinc(v)`, in units of the `(u, v)` null-to-null cell.
///
/// A focused bistatic impulse response is this function in the skewed
/// coordinates of the range and Doppler gradients, so its measured -3 dB area
/// is this fraction of the parallelogram cell `rho_r·rho_a / sin ψ`.
pub fn ideal_cell_area_fraction() -> f64 {
    let bisect = |f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64| {
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let s2 = |x: f64| sinc(x) * sinc(x);
    let u0 = bisect(&|u| s2(u) - 0.5, 0.0, 1.0);
    // v(u) has a square-root edge at u0; substitute u = u0·(1 − t²).
    let v_of = |u: f64| bisect(&|v| s2(v) * s2(u) - 0.5, 0.0, u0);
    let n = 4000;
    let h = 1.0 / n as f64;
    let integral: f64 = (0..n)
        .map(|k| {
            let t = (k as f64 + 0.5) * h;
            v_of(u0 * (1.0 - t * t)) * 2.0 * u0 * t * h
        })
        .sum();
    4.0 * integral
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::echosim::ImageGrid;
    use approx::assert_relative_eq;

    /// Full width of `sinc²` at half power, in units of the nominal width.
    const SINC_HALF_POWER_WIDTH: f64 = 0.885_892_941_378_905;

    /// Separable sinc with -3 dB width `w` metres, centred at `c`.
    fn sinc_image(grid: ImageGrid, c: Vec3, w: f64) -> ComplexImage {
        let k = SINC_HALF_POWER_WIDTH / w;
        ComplexImage::from_fn(grid, |p| Complex64::new(sinc((p.x - c.x) * k) * sinc((p.y - c.y) * k), 0.0))
    }

    fn axes() -> IrwAxes {
        IrwAxes { range: Vec2::new(1.0, 0.0), azimuth: Vec2::new(0.0, 1.0), search_radius: 3.0 }
    }

    #[test]
    fn ideal_fraction_matches_brute_force() {
        let kappa = ideal_cell_area_fraction();
        // Oracle: fine-grid pixel count of sinc²(u)·sinc²(v) ≥ 0.5.
        let n = 2000;
        let h = 1.0 / n as f64;
        let mut count = 0usize;
        for a in -n..n {
            for b in -n..n {
                let u = (a as f64 + 0.5) * h;
                let v = (b as f64 + 0.5) * h;
                if (sinc(u) * sinc(v)).powi(2) >= 0.5 {
                    count += 1;
                }
            }
        }
        assert_relative_eq!(kappa, count as f64 * h * h, max_relative = 2e-3);
        assert_relative_eq!(kappa, 0.62751, max_relative = 1e-4);
    }

    #[test]
    fn synthetic_sinc_width_four_pixels() {
        let grid = ImageGrid::centered(Vec3::ZERO, 1.0, 41);
        let c = Vec3::new(0.3, -0.2, 0.0);
        let m = measure_irw(&sinc_image(grid, c, 4.0), Vec3::ZERO, axes()).unwrap();
        assert_relative_eq!(m.rho_r_meas, 4.0, max_relative = 0.02);
        assert_relative_eq!(m.rho_a_meas, 4.0, max_relative = 0.02);
        assert!((m.peak_pos.x - c.x).abs() < 0.1 && (m.peak_pos.y - c.y).abs() < 0.1);
        // First sidelobe of sinc² is -13.26 dB.
        let pslr = m.pslr.unwrap();
        assert!((pslr + 13.26).abs() < 0.5, "{pslr}");
    }

    #[test]
    fn area_matches_ideal_fraction() {
        let grid = ImageGrid::centered(Vec3::ZERO, 0.1, 161);
        let w = 2.0;
        let m = measure_irw(&sinc_image(grid, Vec3::ZERO, w), Vec3::ZERO, axes()).unwrap();
        let cell = w / SINC_HALF_POWER_WIDTH;
        assert_relative_eq!(m.cell_area_meas, ideal_cell_area_fraction() * cell * cell, max_relative = 0.03);
    }

    #[test]
    fn scale_invariant() {
        let grid = ImageGrid::centered(Vec3::ZERO, 0.5, 61);
        let img = sinc_image(grid, Vec3::new(0.1, 0.2, 0.0), 3.0);
        let a = measure_irw(&img, Vec3::ZERO, axes()).unwrap();
        let b = measure_irw(&img.scaled(1e5), Vec3::ZERO, axes()).unwrap();
        assert_relative_eq!(a.rho_r_meas, b.rho_r_meas, max_relative = 1e-9);
        assert_relative_eq!(a.rho_a_meas, b.rho_a_meas, max_relative = 1e-9);
        assert_eq!(a.cell_area_meas, b.cell_area_meas);
    }

    #[test]
    fn zero_image_has_no_peak() {
        let img = ComplexImage::zeros(ImageGrid::centered(Vec3::ZERO, 1.0, 11));
        assert!(matches!(measure_irw(&img, Vec3::ZERO, axes()), Err(EchoError::NoPeak { .. })));
    }

    #[test]
    fn small_grid_touches_border() {
        let grid = ImageGrid::centered(Vec3::ZERO, 0.5, 9);
        let img = sinc_image(grid, Vec3::ZERO, 6.0);
        assert_eq!(measure_irw(&img, Vec3::ZERO, axes()), Err(EchoError::RegionTouchesBorder));
    }
}
