//! Spherical geometry on the viewing sphere and the equirectangular tile grid.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{Error, Result};

/// A gaze direction. Yaw is kept in `[-pi, pi)`, pitch in `[-pi/2, pi/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orientation {
    yaw: f64,
    pitch: f64,
}

impl Orientation {
    /// Builds an orientation from radians, wrapping yaw and clamping pitch.
    pub fn new(yaw: f64, pitch: f64) -> Self {
        Orientation {
            yaw: wrap_angle(yaw),
            pitch: pitch.clamp(-FRAC_PI_2, FRAC_PI_2),
        }
    }

    pub fn from_degrees(yaw_deg: f64, pitch_deg: f64) -> Self {
        Self::new(yaw_deg.to_radians(), pitch_deg.to_radians())
    }

    pub fn yaw(&self) -> f64 {
        self.yaw
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn yaw_degrees(&self) -> f64 {
        self.yaw.to_degrees()
    }

    pub fn pitch_degrees(&self) -> f64 {
        self.pitch.to_degrees()
    }

    /// Unit vector with `z` pointing at the north pole and `x` at yaw 0.
    pub fn to_unit_vector(&self) -> [f64; 3] {
        let (sp, cp) = self.pitch.sin_cos();
        let (sy, cy) = self.yaw.sin_cos();
        [cp * cy, cp * sy, sp]
    }

    /// Inverse of [`Orientation::to_unit_vector`]; the input need not be normalized.
    pub fn from_vector(v: [f64; 3]) -> Self {
        let horizontal = v[0].hypot(v[1]);
        Self::new(v[1].atan2(v[0]), v[2].atan2(horizontal))
    }

    /// Spherical linear interpolation, `t = 0` gives `self`, `t = 1` gives `other`.
    pub fn slerp(&self, other: &Orientation, t: f64) -> Orientation {
        let a = self.to_unit_vector();
        let b = other.to_unit_vector();
        let omega = angular_distance(self, other);
        if omega < 1e-12 {
            return *self;
        }
        let s = omega.sin();
        let (wa, wb) = if s < 1e-12 {
            // Antipodal: no unique great circle, fall back to linear blend.
            (1.0 - t, t)
        } else {
            (((1.0 - t) * omega).sin() / s, (t * omega).sin() / s)
        };
        Orientation::from_vector([wa * a[0] + wb * b[0], wa * a[1] + wb * b[1], wa * a[2] + wb * b[2]])
    }
}

/// Wraps an angle into `[-pi, pi)`.
pub fn wrap_angle(angle: f64) -> f64 {
    let wrapped = (angle + PI).rem_euclid(TAU) - PI;
    // rem_euclid can round up to TAU for tiny negative inputs.
    if wrapped >= PI {
        wrapped - TAU
    } else {
        wrapped
    }
}

/// Great-circle distance between two orientations, in `[0, pi]`.
///
/// Equal to `acos(u . v)` of the unit vectors; evaluated as
/// `atan2(|u x v|, u . v)`, which stays accurate for nearly equal directions.
pub fn angular_distance(a: &Orientation, b: &Orientation) -> f64 {
    let u = a.to_unit_vector();
    let v = b.to_unit_vector();
    let dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    let cross = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    sin.atan2(dot)
}

/// Splits `total` into `(part, rest)` with `part + rest == total` exactly in
/// floating point, moving `part` and `rest = total - part` by at most a few
/// ulps each. Falls back to the plain difference if no exact pair is found.
pub fn exact_split(total: f64, part: f64) -> (f64, f64) {
    let step = |x: f64, k: i32| -> f64 {
        let mut y = x;
        for _ in 0..k.unsigned_abs() {
            y = if k > 0 { y.next_up() } else { y.next_down() };
        }
        y
    };
    for dp in [0, -1, 1, -2, 2, -3, 3] {
        let p = step(part, dp);
        let base = total - p;
        for dr in [0, -1, 1, -2, 2, -3, 3] {
            let r = step(base, dr);
            if p + r == total {
                return (p, r);
            }
        }
    }
    (part, total - part)
}

/// Uniform equirectangular tiling of the sphere, tiles indexed row-major
/// from the south-west corner (`index = row * cols + col`).
#[derive(Debug, Clone, PartialEq)]
pub struct TileGrid {
    cols: usize,
    rows: usize,
    centers: Vec<Orientation>,
}

impl TileGrid {
    pub const DEFAULT_COLS: usize = 20;
    pub const DEFAULT_ROWS: usize = 10;

    pub fn new(cols: usize, rows: usize) -> Result<Self> {
        if cols == 0 || rows == 0 {
            return Err(Error::Precondition(format!(
                "tile grid must be non-empty, got {cols}x{rows}"
            )));
        }
        let col_width = TAU / cols as f64;
        let row_height = PI / rows as f64;
        let centers = (0..rows)
            .flat_map(|r| {
                (0..cols).map(move |c| {
                    Orientation::new(
                        -PI + (c as f64 + 0.5) * col_width,
                        -FRAC_PI_2 + (r as f64 + 0.5) * row_height,
                    )
                })
            })
            .collect();
        Ok(TileGrid { cols, rows, centers })
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of tiles `M`.
    pub fn tile_count(&self) -> usize {
        self.centers.len()
    }

    pub fn centers(&self) -> &[Orientation] {
        &self.centers
    }

    pub fn center(&self, index: usize) -> Orientation {
        self.centers[index]
    }

    /// Yaw extent of one tile column, radians.
    pub fn col_width(&self) -> f64 {
        TAU / self.cols as f64
    }

    pub fn row_height(&self) -> f64 {
        PI / self.rows as f64
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    /// Index of the tile whose center is closest to `fixation` (lowest index on ties).
    pub fn nearest_tile(&self, fixation: &Orientation) -> usize {
        let mut best = 0;
        let mut best_distance = f64::INFINITY;
        for (m, center) in self.centers.iter().enumerate() {
            let d = angular_distance(center, fixation);
            if d < best_distance {
                best = m;
                best_distance = d;
            }
        }
        best
    }

    /// Angular distance from `fixation` to every tile center.
    pub fn distances_from(&self, fixation: &Orientation) -> Vec<f64> {
        self.centers.iter().map(|c| angular_distance(c, fixation)).collect()
    }
}

impl Default for TileGrid {
    fn default() -> Self {
        TileGrid::new(Self::DEFAULT_COLS, Self::DEFAULT_ROWS).expect("default grid is valid")
    }
}

/// Circular field of view of the given half-angle around the gaze direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FovSpec {
    half_angle: f64,
}

impl FovSpec {
    pub const DEFAULT_HALF_ANGLE_DEG: f64 = 50.0;

    pub fn new(half_angle: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&half_angle) {
            return Err(Error::Precondition(format!(
                "FoV half-angle must lie in [0, pi], got {half_angle}"
            )));
        }
        Ok(FovSpec { half_angle })
    }

    pub fn from_degrees(half_angle_deg: f64) -> Result<Self> {
        Self::new(half_angle_deg.to_radians())
    }

    pub fn half_angle(&self) -> f64 {
        self.half_angle
    }
}

impl Default for FovSpec {
    fn default() -> Self {
        FovSpec {
            half_angle: Self::DEFAULT_HALF_ANGLE_DEG.to_radians(),
        }
    }
}

/// Binary indicator over the `M` tiles of a grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TileSet {
    indicator: Vec<bool>,
}

impl TileSet {
    pub fn empty(tile_count: usize) -> Self {
        TileSet {
            indicator: vec![false; tile_count],
        }
    }

    pub fn full(tile_count: usize) -> Self {
        TileSet {
            indicator: vec![true; tile_count],
        }
    }

    /// Panics if an index is out of range.
    pub fn from_indices(tile_count: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut set = Self::empty(tile_count);
        for m in indices {
            set.insert(m);
        }
        set
    }

    pub fn insert(&mut self, index: usize) {
        self.indicator[index] = true;
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indicator.get(index).copied().unwrap_or(false)
    }

    /// Length of the indicator vector, i.e. `M`.
    pub fn tile_count(&self) -> usize {
        self.indicator.len()
    }

    /// Number of selected tiles (the l1 norm of the indicator).
    pub fn cardinality(&self) -> usize {
        self.indicator.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.indicator.iter().any(|&b| b)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.indicator.iter().enumerate().filter_map(|(m, &b)| b.then_some(m))
    }

    pub fn indicator(&self) -> &[bool] {
        &self.indicator
    }

    /// Inner product of the two indicators.
    pub fn intersection_count(&self, other: &TileSet) -> usize {
        self.indicator
            .iter()
            .zip(&other.indicator)
            .filter(|(&a, &b)| a && b)
            .count()
    }

    pub fn union_with(&mut self, other: &TileSet) {
        for (a, &b) in self.indicator.iter_mut().zip(&other.indicator) {
            *a |= b;
        }
    }

    pub fn is_subset_of(&self, other: &TileSet) -> bool {
        self.tile_count() == other.tile_count() && self.indicator.iter().zip(&other.indicator).all(|(&a, &b)| !a || b)
    }
}

/// Tiles whose centers fall inside the FoV cap around `fixation`. The tile
/// nearest to the fixation is always included, so the set is never empty.
pub fn fov_tiles(grid: &TileGrid, fixation: &Orientation, fov: &FovSpec) -> TileSet {
    let mut set = TileSet::empty(grid.tile_count());
    let mut nearest = 0;
    let mut nearest_distance = f64::INFINITY;
    for (m, center) in grid.centers().iter().enumerate() {
        let d = angular_distance(center, fixation);
        if d <= fov.half_angle() {
            set.insert(m);
        }
        if d < nearest_distance {
            nearest = m;
            nearest_distance = d;
        }
    }
    set.insert(nearest);
    set
}

/// The `n` tiles closest to `fixation`, ties broken by ascending index.
pub fn nearest_tiles(grid: &TileGrid, fixation: &Orientation, n: usize) -> TileSet {
    let distances = grid.distances_from(fixation);
    let mut order: Vec<usize> = (0..grid.tile_count()).collect();
    order.sort_by(|&a, &b| distances[a].total_cmp(&distances[b]).then(a.cmp(&b)));
    TileSet::from_indices(grid.tile_count(), order.into_iter().take(n))
}
