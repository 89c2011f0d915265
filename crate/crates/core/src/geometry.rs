//! Planar domains and the geometric quantities the solvability conditions
//! need: exterior sphere radius, annulus fit, inscribed disc, strip width,
//! boundary curvature and volume.

use std::collections::VecDeque;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Point = [f64; 2];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid domain: {0}")]
    Invalid(String),
    #[error("grid mask interior is not connected ({components} components)")]
    Disconnected { components: usize },
    #[error("no translation places the domain outside the ball of radius {r}")]
    Infeasible { r: f64 },
    #[error("{0} is not supported for this domain kind")]
    NotSupported(&'static str),
    #[error("PGM parse error: {0}")]
    Pgm(String),
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;

/// Bitmap domain: cell `(ix, iy)` covers
/// `[origin + ix*cell, origin + (ix+1)*cell] × [origin + iy*cell, ...]`,
/// rows stored bottom-up.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMask {
    pub width: usize,
    pub height: usize,
    pub cells: Vec<bool>,
    pub cell: f64,
    pub origin: Point,
}

impl GridMask {
    pub fn new(width: usize, height: usize, cells: Vec<bool>, cell: f64, origin: Point) -> Result<Self> {
        if cells.len() != width * height {
            return Err(GeometryError::Invalid(format!(
                "mask has {} cells, expected {}x{}",
                cells.len(),
                width,
                height
            )));
        }
        if !(cell > 0.0) {
            return Err(GeometryError::Invalid(format!("cell size must be positive, got {cell}")));
        }
        Ok(Self { width, height, cells, cell, origin })
    }

    /// Parses a P2 or P5 bitmap; nonzero pixels are interior. The first image
    /// row is the top of the domain.
    pub fn from_pgm(bytes: &[u8], cell: f64, origin: Point) -> Result<Self> {
        let mut pos = 0usize;
        let token = |bytes: &[u8], pos: &mut usize| -> Result<String> {
            loop {
                while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                    *pos += 1;
                }
                if *pos < bytes.len() && bytes[*pos] == b'#' {
                    while *pos < bytes.len() && bytes[*pos] != b'\n' {
                        *pos += 1;
                    }
                    continue;
                }
                break;
            }
            let start = *pos;
            while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if start == *pos {
                return Err(GeometryError::Pgm("unexpected end of header".into()));
            }
            Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
        };
        let magic = token(bytes, &mut pos)?;
        let num = |s: String| -> Result<usize> {
            s.parse::<usize>().map_err(|_| GeometryError::Pgm(format!("bad number {s:?}")))
        };
        let width = num(token(bytes, &mut pos)?)?;
        let height = num(token(bytes, &mut pos)?)?;
        let maxval = num(token(bytes, &mut pos)?)?;
        if width == 0 || height == 0 || maxval == 0 || maxval > 65535 {
            return Err(GeometryError::Pgm("bad dimensions or maxval".into()));
        }
        let mut raw = Vec::with_capacity(width * height);
        match magic.as_str() {
            "P2" => {
                for _ in 0..width * height {
                    raw.push(num(token(bytes, &mut pos)?)? != 0);
                }
            }
            "P5" => {
                // exactly one whitespace byte after maxval
                pos += 1;
                let bpp = if maxval > 255 { 2 } else { 1 };
                let need = width * height * bpp;
                if bytes.len() < pos + need {
                    return Err(GeometryError::Pgm("truncated raster".into()));
                }
                for k in 0..width * height {
                    let v = if bpp == 1 {
                        bytes[pos + k] as u16
                    } else {
                        u16::from_be_bytes([bytes[pos + 2 * k], bytes[pos + 2 * k + 1]])
                    };
                    raw.push(v != 0);
                }
            }
            other => return Err(GeometryError::Pgm(format!("unsupported magic {other:?}"))),
        }
        // flip to bottom-up rows
        let mut cells = vec![false; width * height];
        for row in 0..height {
            let iy = height - 1 - row;
            cells[iy * width..(iy + 1) * width].copy_from_slice(&raw[row * width..(row + 1) * width]);
        }
        Self::new(width, height, cells, cell, origin)
    }

    #[inline]
    pub fn get(&self, ix: isize, iy: isize) -> bool {
        ix >= 0
            && iy >= 0
            && (ix as usize) < self.width
            && (iy as usize) < self.height
            && self.cells[iy as usize * self.width + ix as usize]
    }

    pub fn center(&self, ix: usize, iy: usize) -> Point {
        [
            self.origin[0] + (ix as f64 + 0.5) * self.cell,
            self.origin[1] + (iy as f64 + 0.5) * self.cell,
        ]
    }

    pub fn interior_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    fn components(&self) -> usize {
        let mut seen = vec![false; self.cells.len()];
        let mut count = 0;
        for start in 0..self.cells.len() {
            if !self.cells[start] || seen[start] {
                continue;
            }
            count += 1;
            let mut queue = VecDeque::from([start]);
            seen[start] = true;
            while let Some(k) = queue.pop_front() {
                let (ix, iy) = ((k % self.width) as isize, (k / self.width) as isize);
                for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                    let (jx, jy) = (ix + dx, iy + dy);
                    if self.get(jx, jy) {
                        let kk = jy as usize * self.width + jx as usize;
                        if !seen[kk] {
                            seen[kk] = true;
                            queue.push_back(kk);
                        }
                    }
                }
            }
        }
        count
    }

    /// Interior cells with at least one exterior 4-neighbour.
    fn boundary_cells(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for iy in 0..self.height {
            for ix in 0..self.width {
                let (x, y) = (ix as isize, iy as isize);
                if self.get(x, y)
                    && (!self.get(x + 1, y) || !self.get(x - 1, y) || !self.get(x, y + 1) || !self.get(x, y - 1))
                {
                    out.push((ix, iy));
                }
            }
        }
        out
    }

    fn corner_hull(&self) -> Vec<Point> {
        let mut pts = Vec::new();
        let half = 0.5 * self.cell;
        for (ix, iy) in self.boundary_cells() {
            let c = self.center(ix, iy);
            for (sx, sy) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
                pts.push([c[0] + sx * half, c[1] + sy * half]);
            }
        }
        convex_hull(pts)
    }

    /// Convex iff every cell whose center lies inside the hull of the
    /// interior cell centers is itself interior.
    pub fn is_convex(&self) -> bool {
        let centers: Vec<Point> = (0..self.height)
            .flat_map(|iy| (0..self.width).map(move |ix| (ix, iy)))
            .filter(|&(ix, iy)| self.cells[iy * self.width + ix])
            .map(|(ix, iy)| self.center(ix, iy))
            .collect();
        let hull = convex_hull(centers);
        if hull.len() < 3 {
            return true;
        }
        let tol = 1e-9 * self.cell;
        for iy in 0..self.height {
            for ix in 0..self.width {
                if !self.cells[iy * self.width + ix] && polygon_signed_distance(&hull, self.center(ix, iy)) < -tol {
                    return false;
                }
            }
        }
        true
    }
}

/// Squared Euclidean distance transform (Felzenszwalb–Huttenlocher) of a
/// binary image: distance in cells from each pixel to the nearest `target`
/// pixel.
fn distance_transform(width: usize, height: usize, target: &dyn Fn(usize, usize) -> bool) -> Vec<f64> {
    const BIG: f64 = 1e20;
    let mut grid = vec![0.0; width * height];
    for iy in 0..height {
        for ix in 0..width {
            grid[iy * width + ix] = if target(ix, iy) { 0.0 } else { BIG };
        }
    }
    fn pass(f: &[f64], out: &mut [f64]) {
        let n = f.len();
        let mut v = vec![0usize; n];
        let mut z = vec![0.0f64; n + 1];
        let mut k = 0usize;
        v[0] = 0;
        z[0] = f64::NEG_INFINITY;
        z[1] = f64::INFINITY;
        for q in 1..n {
            loop {
                let p = v[k];
                let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * q as f64 - 2.0 * p as f64);
                if s <= z[k] && k > 0 {
                    k -= 1;
                    continue;
                }
                if s <= z[k] {
                    // k == 0
                    v[0] = q;
                    z[1] = f64::INFINITY;
                    break;
                }
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
        k = 0;
        for (q, o) in out.iter_mut().enumerate() {
            while z[k + 1] < q as f64 {
                k += 1;
            }
            let p = v[k];
            let d = q as f64 - p as f64;
            *o = d * d + f[p];
        }
    }
    let mut col = vec![0.0; height];
    let mut col_out = vec![0.0; height];
    for ix in 0..width {
        for iy in 0..height {
            col[iy] = grid[iy * width + ix];
        }
        pass(&col, &mut col_out);
        for iy in 0..height {
            grid[iy * width + ix] = col_out[iy];
        }
    }
    let mut row = vec![0.0; width];
    for iy in 0..height {
        row.copy_from_slice(&grid[iy * width..(iy + 1) * width]);
        pass(&row.clone(), &mut row);
        grid[iy * width..(iy + 1) * width].copy_from_slice(&row);
    }
    grid
}

/// Andrew's monotone chain; returns the hull counterclockwise without the
/// closing point.
pub fn convex_hull(mut pts: Vec<Point>) -> Vec<Point> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: Point, a: Point, b: Point| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn norm(p: Point) -> f64 {
    p[0].hypot(p[1])
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn dist_to_segment(p: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let ap = sub(p, a);
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 { ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0) } else { 0.0 };
    norm([ap[0] - t * ab[0], ap[1] - t * ab[1]])
}

/// Signed distance to a convex CCW polygon: positive outside, negative inside.
fn polygon_signed_distance(poly: &[Point], p: Point) -> f64 {
    let n = poly.len();
    let mut inside = true;
    let mut worst_inside = f64::NEG_INFINITY;
    let mut dmin = f64::INFINITY;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let e = sub(b, a);
        let len = norm(e);
        // outward normal of a CCW edge is (e_y, -e_x)
        let sd = ((p[0] - a[0]) * e[1] - (p[1] - a[1]) * e[0]) / len;
        if sd > 0.0 {
            inside = false;
        }
        worst_inside = worst_inside.max(sd);
        dmin = dmin.min(dist_to_segment(p, a, b));
    }
    if inside {
        worst_inside
    } else {
        dmin
    }
}

/// Exterior sphere radius, flagged when only a heuristic estimate exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereRadius {
    pub value: f64,
    pub approximate: bool,
}

/// Translation placing the domain inside `{r < |x| < r + d}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnulusFit {
    pub r: f64,
    pub d: f64,
    pub translation: Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundarySample {
    pub point: Point,
    /// Curvature of the boundary w.r.t. the inner normal.
    pub hhat: f64,
    pub component: usize,
}

/// Margin kept between the translated domain and both annulus circles.
pub const FIT_MARGIN: f64 = 2e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    /// `{r_in < |x| < r_out}` centred at the origin.
    Annulus { r_in: f64, r_out: f64 },
    Disc { radius: f64, center: Point },
    /// Counterclockwise vertices in convex position.
    ConvexPolygon { vertices: Vec<Point> },
    GridMask(GridMask),
}

impl DomainSpec {
    pub fn annulus(r_in: f64, r_out: f64) -> Self {
        DomainSpec::Annulus { r_in, r_out }
    }

    pub fn disc(radius: f64) -> Self {
        DomainSpec::Disc { radius, center: [0.0, 0.0] }
    }

    pub fn rectangle(width: f64, height: f64) -> Self {
        DomainSpec::ConvexPolygon {
            vertices: vec![[0.0, 0.0], [width, 0.0], [width, height], [0.0, height]],
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            DomainSpec::Annulus { .. } => "annulus",
            DomainSpec::Disc { .. } => "disc",
            DomainSpec::ConvexPolygon { .. } => "convex_polygon",
            DomainSpec::GridMask(_) => "grid_mask",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DomainSpec::Annulus { r_in, r_out } => {
                if !(*r_in > 0.0 && r_out > r_in && r_out.is_finite()) {
                    return Err(GeometryError::Invalid(format!(
                        "annulus needs 0 < r_in < r_out, got ({r_in}, {r_out})"
                    )));
                }
            }
            DomainSpec::Disc { radius, center } => {
                if !(*radius > 0.0 && radius.is_finite() && center.iter().all(|c| c.is_finite())) {
                    return Err(GeometryError::Invalid(format!("disc radius must be positive, got {radius}")));
                }
            }
            DomainSpec::ConvexPolygon { vertices } => {
                let n = vertices.len();
                if n < 3 {
                    return Err(GeometryError::Invalid("polygon needs at least 3 vertices".into()));
                }
                for i in 0..n {
                    let (a, b, c) = (vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
                    let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
                    if !(cross > 0.0) {
                        return Err(GeometryError::Invalid(format!(
                            "polygon is not strictly convex and counterclockwise at vertex {}",
                            (i + 1) % n
                        )));
                    }
                }
            }
            DomainSpec::GridMask(mask) => {
                let components = mask.components();
                if components == 0 {
                    return Err(GeometryError::Invalid("grid mask has no interior cells".into()));
                }
                if components > 1 {
                    return Err(GeometryError::Disconnected { components });
                }
            }
        }
        Ok(())
    }

    pub fn is_convex(&self) -> bool {
        match self {
            DomainSpec::Annulus { .. } => false,
            DomainSpec::Disc { .. } | DomainSpec::ConvexPolygon { .. } => true,
            DomainSpec::GridMask(m) => m.is_convex(),
        }
    }

    /// Metrics of bitmap domains are estimates.
    pub fn is_approximate(&self) -> bool {
        matches!(self, DomainSpec::GridMask(_))
    }

    pub fn contains(&self, p: Point) -> bool {
        match self {
            DomainSpec::Annulus { r_in, r_out } => {
                let r = norm(p);
                r > *r_in && r < *r_out
            }
            DomainSpec::Disc { radius, center } => norm(sub(p, *center)) < *radius,
            DomainSpec::ConvexPolygon { vertices } => polygon_signed_distance(vertices, p) < 0.0,
            DomainSpec::GridMask(m) => {
                let ix = ((p[0] - m.origin[0]) / m.cell).floor() as isize;
                let iy = ((p[1] - m.origin[1]) / m.cell).floor() as isize;
                m.get(ix, iy)
            }
        }
    }

    /// Smallest `t` in `(0, max]` at which `p + t·dir` leaves the domain,
    /// for `p` inside and `dir` a unit vector; `None` if the segment stays
    /// inside.
    pub fn ray_exit(&self, p: Point, dir: Point, max: f64) -> Option<f64> {
        let circle_hits = |center: Point, radius: f64| {
            // |q + t dir|^2 = radius^2 with q = p - center
            let q = sub(p, center);
            let b = q[0] * dir[0] + q[1] * dir[1];
            let c = (q[0] * q[0] + q[1] * q[1]) - radius * radius;
            let disc = b * b - c;
            if disc < 0.0 {
                return [f64::INFINITY; 2];
            }
            let s = disc.sqrt();
            // roots -b ± s, the small one computed without cancellation
            let big = if b > 0.0 { -b - s } else { -b + s };
            let small = if big != 0.0 { c / big } else { 0.0 };
            let mut roots = [big, small];
            for r in roots.iter_mut() {
                if !(*r > 0.0) {
                    *r = f64::INFINITY;
                }
            }
            roots
        };
        let t = match self {
            DomainSpec::Annulus { r_in, r_out } => {
                let a = circle_hits([0.0, 0.0], *r_in);
                let b = circle_hits([0.0, 0.0], *r_out);
                a.into_iter().chain(b).fold(f64::INFINITY, f64::min)
            }
            DomainSpec::Disc { radius, center } => {
                circle_hits(*center, *radius).into_iter().fold(f64::INFINITY, f64::min)
            }
            DomainSpec::ConvexPolygon { vertices } => {
                let n = vertices.len();
                let mut best = f64::INFINITY;
                for i in 0..n {
                    let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                    let e = sub(b, a);
                    // outward normal (e_y, -e_x): the ray leaves through
                    // edges it moves outwards across
                    let nrm = [e[1], -e[0]];
                    let rate = nrm[0] * dir[0] + nrm[1] * dir[1];
                    if rate > 0.0 {
                        let gap = nrm[0] * (a[0] - p[0]) + nrm[1] * (a[1] - p[1]);
                        best = best.min((gap / rate).max(0.0));
                    }
                }
                best
            }
            DomainSpec::GridMask(m) => {
                let step = m.cell / 16.0;
                let at = |t: f64| self.contains([p[0] + t * dir[0], p[1] + t * dir[1]]);
                let mut lo = 0.0;
                let mut hit = None;
                let mut t = step;
                while t < max + step {
                    let tt = t.min(max);
                    if !at(tt) {
                        hit = Some(tt);
                        break;
                    }
                    lo = tt;
                    if tt == max {
                        break;
                    }
                    t += step;
                }
                match hit {
                    None => f64::INFINITY,
                    Some(mut hi) => {
                        for _ in 0..60 {
                            let mid = 0.5 * (lo + hi);
                            if at(mid) {
                                lo = mid;
                            } else {
                                hi = mid;
                            }
                        }
                        hi
                    }
                }
            }
        };
        (t <= max).then_some(t)
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Point, Point) {
        match self {
            DomainSpec::Annulus { r_out, .. } => ([-r_out, -r_out], [*r_out, *r_out]),
            DomainSpec::Disc { radius, center } => {
                ([center[0] - radius, center[1] - radius], [center[0] + radius, center[1] + radius])
            }
            DomainSpec::ConvexPolygon { vertices } => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for v in vertices {
                    for k in 0..2 {
                        lo[k] = lo[k].min(v[k]);
                        hi[k] = hi[k].max(v[k]);
                    }
                }
                (lo, hi)
            }
            DomainSpec::GridMask(m) => (
                m.origin,
                [m.origin[0] + m.width as f64 * m.cell, m.origin[1] + m.height as f64 * m.cell],
            ),
        }
    }

    /// `|Ω|`.
    pub fn volume(&self) -> f64 {
        match self {
            DomainSpec::Annulus { r_in, r_out } => PI * (r_out * r_out - r_in * r_in),
            DomainSpec::Disc { radius, .. } => PI * radius * radius,
            DomainSpec::ConvexPolygon { vertices } => {
                let n = vertices.len();
                0.5 * (0..n)
                    .map(|i| {
                        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                        a[0] * b[1] - a[1] * b[0]
                    })
                    .sum::<f64>()
            }
            DomainSpec::GridMask(m) => m.interior_count() as f64 * m.cell * m.cell,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            DomainSpec::Annulus { r_out, .. } => 2.0 * r_out,
            DomainSpec::Disc { radius, .. } => 2.0 * radius,
            DomainSpec::ConvexPolygon { vertices } => max_pairwise(vertices),
            DomainSpec::GridMask(m) => max_pairwise(&m.corner_hull()),
        }
    }

    /// Largest `r` such that every boundary point has a tangent exterior ball
    /// of radius `r`. Convex domains give `+inf`.
    pub fn exterior_sphere_radius(&self) -> Result<SphereRadius> {
        self.validate()?;
        match self {
            DomainSpec::Annulus { r_in, .. } => Ok(SphereRadius { value: *r_in, approximate: false }),
            DomainSpec::Disc { .. } | DomainSpec::ConvexPolygon { .. } => {
                Ok(SphereRadius { value: f64::INFINITY, approximate: false })
            }
            DomainSpec::GridMask(m) => {
                if m.is_convex() {
                    return Ok(SphereRadius { value: f64::INFINITY, approximate: true });
                }
                Ok(SphereRadius { value: mask_exterior_radius(m), approximate: true })
            }
        }
    }

    /// Distance from `q` to the closed domain (zero inside) and the largest
    /// distance from `q` to a point of the closed domain.
    fn distance_range(&self, q: Point) -> (f64, f64) {
        match self {
            DomainSpec::Annulus { r_in, r_out } => {
                let s = norm(q);
                let near = if s <= *r_in {
                    r_in - s
                } else if s <= *r_out {
                    0.0
                } else {
                    s - r_out
                };
                (near, s + r_out)
            }
            DomainSpec::Disc { radius, center } => {
                let s = norm(sub(q, *center));
                ((s - radius).max(0.0), s + radius)
            }
            DomainSpec::ConvexPolygon { vertices } => {
                let near = polygon_signed_distance(vertices, q).max(0.0);
                let far = vertices.iter().map(|v| norm(sub(*v, q))).fold(0.0, f64::max);
                (near, far)
            }
            DomainSpec::GridMask(m) => {
                let half = 0.5 * m.cell;
                let mut near = f64::INFINITY;
                if self.contains(q) {
                    near = 0.0;
                } else {
                    for (ix, iy) in m.boundary_cells() {
                        let c = m.center(ix, iy);
                        let dx = ((q[0] - c[0]).abs() - half).max(0.0);
                        let dy = ((q[1] - c[1]).abs() - half).max(0.0);
                        near = near.min(dx.hypot(dy));
                    }
                }
                let far = m.corner_hull().iter().map(|v| norm(sub(*v, q))).fold(0.0, f64::max);
                (near, far)
            }
        }
    }

    /// Places the domain inside `{r < |x| < r + d}` with `d` as small as the
    /// search finds.
    ///
    /// Translations are searched along rays: for each approach direction the
    /// domain is slid from its centre outwards until it clears the ball
    /// `|x| <= r` (by [`FIT_MARGIN`]); the direction is scanned on a coarse
    /// grid and then refined by golden-section search.
    pub fn annulus_fit(&self, r: f64) -> Result<AnnulusFit> {
        self.validate()?;
        if !(r > 0.0) || !r.is_finite() {
            return Err(GeometryError::Invalid(format!("fit radius must be positive and finite, got {r}")));
        }
        if let DomainSpec::Annulus { r_in, r_out } = self {
            if r > *r_in {
                return Err(GeometryError::Infeasible { r });
            }
            return Ok(AnnulusFit { r, d: r_out - r, translation: [0.0, 0.0] });
        }
        let (lo, hi) = self.bounding_box();
        let center = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
        let reach = self.distance_range(center).1;
        let s_max = r + reach + 2.0 * FIT_MARGIN + 1.0;
        let feasible = |tau: Point| self.distance_range([-tau[0], -tau[1]]).0 >= r + FIT_MARGIN;
        let far = |tau: Point| self.distance_range([-tau[0], -tau[1]]).1;
        let translation = |phi: f64, s: f64| [-center[0] + s * phi.cos(), -center[1] + s * phi.sin()];

        // Best (d, s) along direction phi.
        let along = |phi: f64| -> Option<(f64, f64)> {
            let steps = 64;
            let ds = s_max / steps as f64;
            let mut prev = 0.0;
            let mut first = None;
            for k in 0..=steps {
                let s = k as f64 * ds;
                if feasible(translation(phi, s)) {
                    first = Some(s);
                    break;
                }
                prev = s;
            }
            let s_hit = first?;
            let s_star = if s_hit == 0.0 {
                0.0
            } else {
                let (mut a, mut b) = (prev, s_hit);
                for _ in 0..200 {
                    if b - a <= 1e-15 * b.max(1.0) {
                        break;
                    }
                    let m = 0.5 * (a + b);
                    if feasible(translation(phi, m)) {
                        b = m;
                    } else {
                        a = m;
                    }
                }
                b
            };
            // far distance is convex in s; its minimiser over [s_star, s_max]
            let s_best = golden_min(|s| far(translation(phi, s)), s_star, s_max, 1e-13);
            let s_use = if feasible(translation(phi, s_best)) { s_best } else { s_star };
            Some((far(translation(phi, s_use)) - r + FIT_MARGIN, s_use))
        };

        let coarse = 360;
        let mut best: Option<(f64, f64, f64)> = None; // (d, phi, s)
        for k in 0..coarse {
            let phi = 2.0 * PI * k as f64 / coarse as f64;
            if let Some((d, s)) = along(phi) {
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, phi, s));
                }
            }
        }
        let (mut d_best, phi0, mut s_best) = best.ok_or(GeometryError::Infeasible { r })?;
        let mut phi_best = phi0;
        let width = 2.0 * PI / coarse as f64;
        let objective = |phi: f64| along(phi).map_or(f64::INFINITY, |(d, _)| d);
        let phi_ref = golden_min(objective, phi0 - width, phi0 + width, 1e-12);
        if let Some((d, s)) = along(phi_ref) {
            if d < d_best {
                d_best = d;
                phi_best = phi_ref;
                s_best = s;
            }
        }
        let tau = translation(phi_best, s_best);
        let (near, far_d) = self.distance_range([-tau[0], -tau[1]]);
        if !(near >= r + 0.5 * FIT_MARGIN && far_d <= r + d_best - 0.5 * FIT_MARGIN) {
            return Err(GeometryError::Infeasible { r });
        }
        Ok(AnnulusFit { r, d: d_best, translation: tau })
    }

    /// Radius of the largest disc contained in the domain.
    pub fn inscribed_disc_radius(&self) -> f64 {
        match self {
            DomainSpec::Annulus { r_in, r_out } => 0.5 * (r_out - r_in),
            DomainSpec::Disc { radius, .. } => *radius,
            DomainSpec::ConvexPolygon { vertices } => chebyshev_center(vertices).1,
            DomainSpec::GridMask(m) => {
                // distance (in cells) from interior centers to the nearest
                // exterior center; the frame counts as exterior
                let (w, h) = (m.width + 2, m.height + 2);
                let dt = distance_transform(w, h, &|ix, iy| !m.get(ix as isize - 1, iy as isize - 1));
                let max = dt.iter().cloned().fold(0.0, f64::max).sqrt();
                (max - 0.5).max(0.0) * m.cell
            }
        }
    }

    /// Minimal width over directions for convex domains; `None` otherwise.
    pub fn strip_width(&self) -> Option<f64> {
        match self {
            DomainSpec::Annulus { .. } => None,
            DomainSpec::Disc { radius, .. } => Some(2.0 * radius),
            DomainSpec::ConvexPolygon { vertices } => Some(polygon_width(vertices)),
            DomainSpec::GridMask(m) => {
                if m.is_convex() {
                    Some(polygon_width(&m.corner_hull()))
                } else {
                    None
                }
            }
        }
    }

    /// Boundary curvature w.r.t. the inner normal at `samples` points per
    /// boundary component, evenly spaced in arclength. Polygon corners are
    /// never sampled.
    pub fn boundary_mean_curvature(&self, samples: usize) -> Result<Vec<BoundarySample>> {
        let samples = samples.max(1);
        let circle = |center: Point, radius: f64, hhat: f64, component: usize| {
            (0..samples).map(move |k| {
                let phi = 2.0 * PI * k as f64 / samples as f64;
                BoundarySample {
                    point: [center[0] + radius * phi.cos(), center[1] + radius * phi.sin()],
                    hhat,
                    component,
                }
            })
        };
        match self {
            DomainSpec::Annulus { r_in, r_out } => Ok(circle([0.0, 0.0], *r_out, 1.0 / r_out, 0)
                .chain(circle([0.0, 0.0], *r_in, -1.0 / r_in, 1))
                .collect()),
            DomainSpec::Disc { radius, center } => Ok(circle(*center, *radius, 1.0 / radius, 0).collect()),
            DomainSpec::ConvexPolygon { vertices } => {
                let n = vertices.len();
                let lengths: Vec<f64> = (0..n).map(|i| norm(sub(vertices[(i + 1) % n], vertices[i]))).collect();
                let total: f64 = lengths.iter().sum();
                let mut out = Vec::with_capacity(samples);
                for k in 0..samples {
                    let mut s = (k as f64 + 0.5) * total / samples as f64;
                    let mut i = 0;
                    while i + 1 < n && s > lengths[i] {
                        s -= lengths[i];
                        i += 1;
                    }
                    let t = (s / lengths[i]).clamp(0.0, 1.0);
                    if t <= 1e-12 || t >= 1.0 - 1e-12 {
                        continue;
                    }
                    let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                    out.push(BoundarySample {
                        point: [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])],
                        hhat: 0.0,
                        component: 0,
                    });
                }
                Ok(out)
            }
            DomainSpec::GridMask(_) => Err(GeometryError::NotSupported("boundary curvature")),
        }
    }
}

/// JSON form of a domain, e.g. `{"kind":"annulus","r_in":1,"r_out":2}`.
/// Grid masks name a PGM file, resolved relative to `base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainConfig {
    Annulus { r_in: f64, r_out: f64 },
    Disc {
        radius: f64,
        #[serde(default)]
        center: Point,
    },
    ConvexPolygon { vertices: Vec<Point> },
    GridMask {
        path: String,
        cell: f64,
        #[serde(default)]
        origin: Point,
    },
}

impl DomainConfig {
    pub fn load(&self, base: &std::path::Path) -> Result<DomainSpec> {
        let spec = match self {
            DomainConfig::Annulus { r_in, r_out } => DomainSpec::Annulus { r_in: *r_in, r_out: *r_out },
            DomainConfig::Disc { radius, center } => DomainSpec::Disc { radius: *radius, center: *center },
            DomainConfig::ConvexPolygon { vertices } => DomainSpec::ConvexPolygon { vertices: vertices.clone() },
            DomainConfig::GridMask { path, cell, origin } => {
                let full = base.join(path);
                let bytes = std::fs::read(&full)
                    .map_err(|e| GeometryError::Pgm(format!("cannot read {}: {e}", full.display())))?;
                DomainSpec::GridMask(GridMask::from_pgm(&bytes, *cell, *origin)?)
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn max_pairwise(pts: &[Point]) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            best = best.max(norm(sub(pts[i], pts[j])));
        }
    }
    best
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= tol * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        c
    } else {
        d
    }
}

/// Width of a convex CCW polygon by rotating calipers: the minimum over
/// edges of the largest vertex distance to the edge's supporting line.
pub fn polygon_width(poly: &[Point]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let line_dist = |i: usize, p: Point| {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let e = sub(b, a);
        ((p[0] - a[0]) * e[1] - (p[1] - a[1]) * e[0]).abs() / norm(e)
    };
    let mut j = 1;
    let mut best = f64::INFINITY;
    for i in 0..n {
        if j == i {
            j = (j + 1) % n;
        }
        while line_dist(i, poly[(j + 1) % n]) > line_dist(i, poly[j]) {
            j = (j + 1) % n;
        }
        best = best.min(line_dist(i, poly[j]));
    }
    best
}

/// Chebyshev centre and radius of a convex CCW polygon.
///
/// The linear program `max ρ  s.t.  n_i·x + ρ <= b_i` is solved by vertex
/// enumeration: every basic solution is the incircle of three edge lines;
/// the best feasible one is optimal.
pub fn chebyshev_center(poly: &[Point]) -> (Point, f64) {
    let n = poly.len();
    // edge i: outward unit normal nrm, offset off; inside means nrm·x <= off
    let lines: Vec<(Point, f64)> = (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            let e = sub(b, a);
            let l = norm(e);
            let nrm = [e[1] / l, -e[0] / l];
            (nrm, nrm[0] * a[0] + nrm[1] * a[1])
        })
        .collect();
    let slack = |x: Point| lines.iter().map(|(nr, off)| off - nr[0] * x[0] - nr[1] * x[1]).fold(f64::INFINITY, f64::min);
    let mut best = (poly[0], 0.0);
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                // [n_x n_y 1] [x y ρ]^T = off, three rows
                let rows = [lines[i], lines[j], lines[k]];
                let m = |r: usize, c: usize| match c {
                    0 => rows[r].0[0],
                    1 => rows[r].0[1],
                    _ => 1.0,
                };
                let det3 = |col: Option<usize>| {
                    let e = |r: usize, c: usize| if Some(c) == col { rows[r].1 } else { m(r, c) };
                    e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
                        + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
                };
                let det = det3(None);
                if det.abs() < 1e-14 {
                    continue;
                }
                let x = [det3(Some(0)) / det, det3(Some(1)) / det];
                let rho = det3(Some(2)) / det;
                let s = slack(x);
                if rho > best.1 && s >= rho - 1e-12 * (1.0 + rho.abs()) {
                    best = (x, s.min(rho));
                }
            }
        }
    }
    best
}

/// Exterior-ball radius estimate for a non-convex mask: for every boundary
/// cell, the largest exterior ball (from the exterior distance transform)
/// touching it; the minimum over boundary cells.
fn mask_exterior_radius(m: &GridMask) -> f64 {
    let pad = m.width.max(m.height);
    let (w, h) = (m.width + 2 * pad, m.height + 2 * pad);
    let interior = |ix: usize, iy: usize| m.get(ix as isize - pad as isize, iy as isize - pad as isize);
    let dt = distance_transform(w, h, &interior);
    let boundary = m.boundary_cells();
    let cap = pad as f64 - 1.0;
    let mut result = f64::INFINITY;
    for (bx, by) in boundary {
        let (bx, by) = ((bx + pad) as f64, (by + pad) as f64);
        let mut rb: f64 = 0.0;
        for iy in 0..h {
            for ix in 0..w {
                if interior(ix, iy) {
                    continue;
                }
                let d = dt[iy * w + ix].sqrt();
                if d <= rb + 0.5 {
                    continue;
                }
                let dist = (ix as f64 - bx).hypot(iy as f64 - by);
                if dist <= d + 1.0 {
                    rb = rb.max(d - 0.5);
                }
            }
        }
        result = result.min(rb.min(cap));
    }
    if result >= cap {
        f64::INFINITY
    } else {
        result * m.cell
    }
}
