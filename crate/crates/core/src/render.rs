//! Per-pixel classification sweeps, PPM output and class statistics.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{Classifier, ClassifyOptions, Direction, Tag};
use crate::dynamics::{Parameter, Point};
use crate::json::fmt17;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("thread pool: {0}")]
    Pool(String),
    #[error("palette entry '{0}': expected Tag=r,g,b")]
    Palette(String),
}

/// Default window for forward (K+) images.
pub const KPLUS_WINDOW: [f64; 4] = [-2.5, 2.5, -2.5, 2.5];
/// Default window for backward (K-) images.
pub const KMINUS_WINDOW: [f64; 4] = [-3.0, 3.0, -3.0, 3.0];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub width: usize,
    pub height: usize,
}

impl GridSpec {
    pub fn new(window: [f64; 4], width: usize, height: usize) -> Result<Self, RenderError> {
        let [x_min, x_max, y_min, y_max] = window;
        if !window.iter().all(|v| v.is_finite()) {
            return Err(RenderError::Grid("window bounds must be finite".into()));
        }
        if x_min >= x_max || y_min >= y_max {
            return Err(RenderError::Grid("need x_min < x_max and y_min < y_max".into()));
        }
        if width == 0 || height == 0 {
            return Err(RenderError::Grid("width and height must be at least 1".into()));
        }
        Ok(GridSpec {
            x_min,
            x_max,
            y_min,
            y_max,
            width,
            height,
        })
    }

    /// Centre of pixel (i, j): column i, row j, row 0 at the top.
    pub fn center(&self, i: usize, j: usize) -> Point {
        let dx = (self.x_max - self.x_min) / self.width as f64;
        let dy = (self.y_max - self.y_min) / self.height as f64;
        Point::new(
            self.x_min + (i as f64 + 0.5) * dx,
            self.y_max - (j as f64 + 0.5) * dy,
        )
    }

    fn to_json(&self) -> String {
        format!(
            "{{\"x_min\":{},\"x_max\":{},\"y_min\":{},\"y_max\":{},\"width\":{},\"height\":{}}}",
            fmt17(self.x_min),
            fmt17(self.x_max),
            fmt17(self.y_min),
            fmt17(self.y_max),
            self.width,
            self.height
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassImage {
    pub width: usize,
    pub height: usize,
    /// row-major, row 0 at the top
    pub codes: Vec<Tag>,
}

impl ClassImage {
    pub fn get(&self, i: usize, j: usize) -> Tag {
        self.codes[j * self.width + i]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub c: f64,
    /// indexed by tag code
    pub counts: [usize; Tag::ALL.len()],
    pub total: usize,
    pub grid: Option<GridSpec>,
}

impl Stats {
    pub fn count(&self, t: Tag) -> usize {
        self.counts[t.code() as usize]
    }

    pub fn fraction(&self, t: Tag) -> f64 {
        self.count(t) as f64 / self.total as f64
    }

    /// {"c", "counts": {tag: n, ...}, "grid": {...}, "total"}
    pub fn to_json(&self) -> String {
        let mut counts = String::new();
        for (k, t) in Tag::ALL.iter().enumerate() {
            if k > 0 {
                counts.push(',');
            }
            let _ = write!(counts, "\"{}\":{}", t, self.counts[k]);
        }
        let grid = self.grid.map(|g| g.to_json()).unwrap_or_else(|| "null".into());
        format!(
            "{{\"c\":{},\"counts\":{{{}}},\"grid\":{},\"total\":{}}}",
            fmt17(self.c),
            counts,
            grid,
            self.total
        )
    }
}

pub fn stats_summary(img: &ClassImage, c: f64, grid: Option<GridSpec>) -> Stats {
    let mut counts = [0; Tag::ALL.len()];
    for t in &img.codes {
        counts[t.code() as usize] += 1;
    }
    Stats {
        c,
        counts,
        total: img.codes.len(),
        grid,
    }
}

fn classify_row(cl: &Classifier, grid: &GridSpec, direction: Direction, j: usize) -> Vec<Tag> {
    (0..grid.width)
        .map(|i| {
            let z = grid.center(i, j);
            match direction {
                Direction::Forward => cl.forward(z).tag(),
                Direction::Backward => cl.backward(z).tag(),
            }
        })
        .collect()
}

fn row_opts(opts: &ClassifyOptions) -> ClassifyOptions {
    ClassifyOptions {
        record_orbit: false,
        trace_regions: false,
        ..*opts
    }
}

/// Parallel sweep split by rows; rows are merged in order, so the result does
/// not depend on `workers` (None = rayon's global pool).
pub fn sweep(
    grid: &GridSpec,
    c: Parameter,
    direction: Direction,
    opts: &ClassifyOptions,
    workers: Option<usize>,
) -> Result<(ClassImage, Stats), RenderError> {
    let cl = Classifier::new(c, row_opts(opts));
    let run = || -> Vec<Vec<Tag>> {
        (0..grid.height)
            .into_par_iter()
            .map(|j| classify_row(&cl, grid, direction, j))
            .collect()
    };
    let rows = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| RenderError::Pool(e.to_string()))?
            .install(run),
        None => run(),
    };
    let img = ClassImage {
        width: grid.width,
        height: grid.height,
        codes: rows.into_iter().flatten().collect(),
    };
    let stats = stats_summary(&img, c.c(), Some(*grid));
    Ok((img, stats))
}

/// Single-threaded reference: one independent classification per pixel.
pub fn sweep_sequential(grid: &GridSpec, c: Parameter, direction: Direction, opts: &ClassifyOptions) -> ClassImage {
    let mut codes = Vec::with_capacity(grid.width * grid.height);
    for j in 0..grid.height {
        for i in 0..grid.width {
            let z = grid.center(i, j);
            let t = match direction {
                Direction::Forward => crate::classify::classify_forward(z, c, opts).tag(),
                Direction::Backward => crate::classify::classify_backward(z, c, opts).tag(),
            };
            codes.push(t);
        }
    }
    ClassImage {
        width: grid.width,
        height: grid.height,
        codes,
    }
}

/// Total map tag -> RGB.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Palette {
    colors: [[u8; 3]; Tag::ALL.len()],
}

impl Default for Palette {
    fn default() -> Self {
        let mut p = Palette {
            colors: [[0; 3]; Tag::ALL.len()],
        };
        let set = [
            (Tag::AttractingBasin, [40, 40, 40]),
            (Tag::Escaping, [255, 255, 255]),
            (Tag::ThetaStableCandidate, [200, 0, 0]),
            (Tag::CycleStableCandidate, [0, 0, 200]),
            (Tag::Undecided, [120, 120, 120]),
            (Tag::FixedAlpha, [255, 200, 0]),
            (Tag::FixedTheta, [255, 0, 255]),
            (Tag::ThreeCycleMember, [0, 200, 0]),
            (Tag::ThetaUnstableCandidate, [200, 0, 0]),
            (Tag::CycleUnstableCandidate, [0, 0, 200]),
            (Tag::BackwardEscaping, [255, 255, 255]),
            (Tag::PreimageFailure, [0, 160, 160]),
        ];
        for (t, rgb) in set {
            p.set(t, rgb);
        }
        p
    }
}

impl Palette {
    pub fn get(&self, t: Tag) -> [u8; 3] {
        self.colors[t.code() as usize]
    }

    pub fn set(&mut self, t: Tag, rgb: [u8; 3]) {
        self.colors[t.code() as usize] = rgb;
    }

    /// Applies overrides of the form `Tag=r,g,b;Tag=r,g,b`.
    pub fn with_overrides(mut self, spec: &str) -> Result<Self, RenderError> {
        for entry in spec.split(';').map(str::trim).filter(|e| !e.is_empty()) {
            let bad = || RenderError::Palette(entry.to_string());
            let (name, rgb) = entry.split_once('=').ok_or_else(bad)?;
            let tag = Tag::ALL
                .iter()
                .copied()
                .find(|t| t.as_str() == name.trim())
                .ok_or_else(bad)?;
            let parts: Vec<u8> = rgb
                .split(',')
                .map(|v| v.trim().parse::<u8>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad())?;
            let rgb: [u8; 3] = parts.try_into().map_err(|_| bad())?;
            self.set(tag, rgb);
        }
        Ok(self)
    }
}

pub fn ppm_bytes(img: &ClassImage, palette: &Palette) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.reserve(3 * img.codes.len());
    for t in &img.codes {
        out.extend_from_slice(&palette.get(*t));
    }
    out
}

pub fn write_ppm(img: &ClassImage, palette: &Palette, path: &Path) -> Result<(), RenderError> {
    std::fs::write(path, ppm_bytes(img, palette)).map_err(|source| RenderError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads back the header of a P6 file: (width, height, maxval, header length).
pub fn parse_ppm_header(bytes: &[u8]) -> Option<(usize, usize, u32, usize)> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return None;
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).ok()?);
    }
    if fields[0] != "P6" {
        return None;
    }
    Some((fields[1].parse().ok()?, fields[2].parse().ok()?, fields[3].parse().ok()?, pos + 1))
}
