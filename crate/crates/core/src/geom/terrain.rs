use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GeomError, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HillProfile {
    /// Linear fall-off, zero at one radius.
    #[default]
    Cone,
    /// Gaussian with standard deviation of half the radius.
    Gaussian,
}

/// An analytic elevated area added on top of flat ground.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HillSpec {
    pub center: (f64, f64),
    /// Height above the base level at the center.
    pub peak_height: f64,
    pub radius: f64,
    pub profile: HillProfile,
}

impl HillSpec {
    pub fn cone(center: (f64, f64), peak_height: f64, radius: f64) -> Self {
        HillSpec { center, peak_height, radius, profile: HillProfile::Cone }
    }

    /// Height added by this hill at ground position `(x, y)`.
    pub fn contribution(&self, x: f64, y: f64) -> f64 {
        let dist = (x - self.center.0).hypot(y - self.center.1);
        match self.profile {
            HillProfile::Cone => self.peak_height * (1.0 - dist / self.radius).max(0.0),
            HillProfile::Gaussian => {
                let sigma = self.radius / 2.0;
                self.peak_height * (-dist * dist / (2.0 * sigma * sigma)).exp()
            }
        }
    }

    fn validate(&self, index: usize) -> Result<(), GeomError> {
        let bad = |reason: &str| GeomError::InvalidHill { index, reason: reason.to_string() };
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(bad("radius must be positive"));
        }
        if !(self.peak_height >= 0.0 && self.peak_height.is_finite()) {
            return Err(bad("peak height must be non-negative"));
        }
        Ok(())
    }
}

/// Rectangular ground area `[x0, x0 + width] x [y0, y0 + depth]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Footprint {
    pub origin: (f64, f64),
    pub size: (f64, f64),
}

impl Footprint {
    pub fn new(origin: (f64, f64), size: (f64, f64)) -> Self {
        Footprint { origin, size }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.origin.0 && x <= self.origin.0 + self.size.0 && y >= self.origin.1 && y <= self.origin.1 + self.size.1
    }
}

/// Regular height grid with bilinear interpolation.
///
/// Node `(i, j)` sits at `origin + (i * spacing, j * spacing)`; heights are
/// stored row-major with `i` (x) varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct TerrainModel {
    origin: (f64, f64),
    spacing: f64,
    nx: usize,
    ny: usize,
    heights: Vec<f64>,
    hills: Vec<HillSpec>,
}

impl TerrainModel {
    /// Builds a grid from explicit node heights.
    pub fn from_grid(
        origin: (f64, f64),
        spacing: f64,
        nx: usize,
        ny: usize,
        heights: Vec<f64>,
    ) -> Result<Self, GeomError> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(GeomError::NonPositiveSpacing(spacing));
        }
        if nx < 2 || ny < 2 {
            return Err(GeomError::GridTooSmall { nx, ny });
        }
        if heights.len() != nx * ny {
            return Err(GeomError::AsciiGrid(format!("expected {} heights, got {}", nx * ny, heights.len())));
        }
        if let Some(k) = heights.iter().position(|h| !h.is_finite()) {
            return Err(GeomError::NonFiniteHeight { i: k % nx, j: k / nx });
        }
        Ok(TerrainModel { origin, spacing, nx, ny, heights, hills: Vec::new() })
    }

    /// Flat ground at `base_height` plus the given hills, sampled on a grid
    /// covering `extent`.
    pub fn synthetic(base_height: f64, hills: &[HillSpec], extent: Footprint, spacing: f64) -> Result<Self, GeomError> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(GeomError::NonPositiveSpacing(spacing));
        }
        let (w, d) = extent.size;
        if !(w > 0.0 && d > 0.0) {
            return Err(GeomError::EmptyExtent);
        }
        for (index, hill) in hills.iter().enumerate() {
            hill.validate(index)?;
            if !extent.contains(hill.center.0, hill.center.1) {
                return Err(GeomError::InvalidHill { index, reason: "center lies outside the terrain extent".into() });
            }
        }
        // Round up so the grid always covers the requested extent.
        let nx = ((w / spacing) - 1e-9).ceil() as usize + 1;
        let ny = ((d / spacing) - 1e-9).ceil() as usize + 1;
        let (x0, y0) = extent.origin;
        let mut heights = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            let y = y0 + j as f64 * spacing;
            for i in 0..nx {
                let x = x0 + i as f64 * spacing;
                let h: f64 = hills.iter().map(|hill| hill.contribution(x, y)).sum();
                heights.push(base_height + h);
            }
        }
        let mut model = TerrainModel::from_grid(extent.origin, spacing, nx, ny, heights)?;
        model.hills = hills.to_vec();
        Ok(model)
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn hills(&self) -> &[HillSpec] {
        &self.hills
    }

    pub fn footprint(&self) -> Footprint {
        Footprint {
            origin: self.origin,
            size: ((self.nx - 1) as f64 * self.spacing, (self.ny - 1) as f64 * self.spacing),
        }
    }

    pub fn node_height(&self, i: usize, j: usize) -> f64 {
        self.heights[j * self.nx + i]
    }

    pub fn node_position(&self, i: usize, j: usize) -> (f64, f64) {
        (self.origin.0 + i as f64 * self.spacing, self.origin.1 + j as f64 * self.spacing)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.footprint().contains(x, y)
    }

    /// Bilinearly interpolated terrain height at `(x, y)`.
    pub fn height_at(&self, x: f64, y: f64) -> Result<f64, GeomError> {
        if !self.contains(x, y) {
            return Err(GeomError::OutOfBounds { x, y });
        }
        let gx = (x - self.origin.0) / self.spacing;
        let gy = (y - self.origin.1) / self.spacing;
        let i = (gx.floor() as usize).min(self.nx - 2);
        let j = (gy.floor() as usize).min(self.ny - 2);
        let fx = gx - i as f64;
        let fy = gy - j as f64;
        let h00 = self.node_height(i, j);
        let h10 = self.node_height(i + 1, j);
        let h01 = self.node_height(i, j + 1);
        let h11 = self.node_height(i + 1, j + 1);
        let h0 = h00 + (h10 - h00) * fx;
        let h1 = h01 + (h11 - h01) * fx;
        Ok(h0 + (h1 - h0) * fy)
    }

    /// Height of `p` above the terrain surface; negative below ground.
    pub fn clearance(&self, p: Vec3) -> Result<f64, GeomError> {
        Ok(p.z - self.height_at(p.x, p.y)?)
    }

    /// Ray-marches from `a` to `b` and reports whether every interior sample
    /// keeps positive clearance.
    pub fn line_of_sight(&self, a: Vec3, b: Vec3, step: f64) -> Result<bool, GeomError> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(GeomError::NonPositiveStep(step));
        }
        for p in [a, b] {
            if self.clearance(p)? < 0.0 {
                return Err(GeomError::EndpointBelowTerrain { x: p.x, y: p.y, z: p.z });
            }
        }
        // March in a canonical endpoint order so los(a, b) == los(b, a) bit for bit.
        let (from, to) = if (a.x, a.y, a.z) <= (b.x, b.y, b.z) { (a, b) } else { (b, a) };
        let length = from.distance(to);
        let n = (length / step).ceil() as usize;
        for k in 1..n {
            let p = from.lerp(to, k as f64 / n as f64);
            if self.clearance(p)? <= 0.0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Parses an ESRI-style ASCII grid.
    ///
    /// Header keys (case-insensitive): `ncols`, `nrows`, `xllcorner`,
    /// `yllcorner`, `cellsize`, optional `nodata_value`. Values are treated as
    /// node heights; the first data row is the northernmost (largest y).
    pub fn from_ascii_grid(text: &str) -> Result<Self, GeomError> {
        let err = |m: String| GeomError::AsciiGrid(m);
        let mut ncols = None;
        let mut nrows = None;
        let mut xll = None;
        let mut yll = None;
        let mut cellsize = None;
        let mut nodata = None;
        let mut tokens = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let first = trimmed.split_whitespace().next().unwrap_or("");
            if first.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
                let mut parts = trimmed.split_whitespace();
                let key = parts.next().unwrap().to_ascii_lowercase();
                let value =
                    parts.next().ok_or_else(|| err(format!("line {}: missing value for `{key}`", lineno + 1)))?;
                let num: f64 = value.parse().map_err(|_| err(format!("line {}: bad number `{value}`", lineno + 1)))?;
                match key.as_str() {
                    "ncols" => ncols = Some(num as usize),
                    "nrows" => nrows = Some(num as usize),
                    "xllcorner" => xll = Some(num),
                    "yllcorner" => yll = Some(num),
                    "cellsize" => cellsize = Some(num),
                    "nodata_value" => nodata = Some(num),
                    other => return Err(err(format!("line {}: unknown key `{other}`", lineno + 1))),
                }
            } else {
                for tok in trimmed.split_whitespace() {
                    let h: f64 = tok.parse().map_err(|_| err(format!("line {}: bad height `{tok}`", lineno + 1)))?;
                    tokens.push(h);
                }
            }
        }
        let missing = |k: &str| err(format!("missing header `{k}`"));
        let nx = ncols.ok_or_else(|| missing("ncols"))?;
        let ny = nrows.ok_or_else(|| missing("nrows"))?;
        let origin = (xll.ok_or_else(|| missing("xllcorner"))?, yll.ok_or_else(|| missing("yllcorner"))?);
        let spacing = cellsize.ok_or_else(|| missing("cellsize"))?;
        if tokens.len() != nx * ny {
            return Err(err(format!("expected {} heights, found {}", nx * ny, tokens.len())));
        }
        if let Some(nd) = nodata {
            if let Some(k) = tokens.iter().position(|&h| h == nd) {
                return Err(err(format!("nodata value at data index {k}")));
            }
        }
        // File rows run north to south; flip into ascending-y storage.
        let mut heights = Vec::with_capacity(nx * ny);
        for row in tokens.chunks(nx).rev() {
            heights.extend_from_slice(row);
        }
        TerrainModel::from_grid(origin, spacing, nx, ny, heights)
    }

    pub fn load_ascii_grid(path: impl AsRef<Path>) -> Result<Self, GeomError> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| GeomError::AsciiGrid(format!("{}: {e}", path.display())))?;
        Self::from_ascii_grid(&text)
    }

    /// Renders the grid in the format read by [`TerrainModel::from_ascii_grid`].
    pub fn to_ascii_grid(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "ncols {}", self.nx);
        let _ = writeln!(out, "nrows {}", self.ny);
        let _ = writeln!(out, "xllcorner {}", self.origin.0);
        let _ = writeln!(out, "yllcorner {}", self.origin.1);
        let _ = writeln!(out, "cellsize {}", self.spacing);
        for j in (0..self.ny).rev() {
            let row: Vec<String> = (0..self.nx).map(|i| self.node_height(i, j).to_string()).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }
}
