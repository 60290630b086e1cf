//! Planar domains and their boundary samples.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::Real;

/// Shape of a planar domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainKind {
    /// The open unit disk.
    UnitDisk,
    /// A disk of arbitrary center and radius.
    Disk,
    /// `{|z| < r, Im z > 0}`.
    UpperHalfDisk,
    /// `{|z| < r, Im z < 0}`.
    LowerHalfDisk,
    /// Interior of a closed simple polygon given by samples.
    BoundarySampled,
}

/// One sample of the boundary curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundarySample<T> {
    /// Arclength parameter measured from the first sample.
    pub s: T,
    /// Boundary point.
    pub z: Complex<T>,
    /// Complex trapezoid weight, so that `sum f(z_k) dz_k` approximates `∮ f dζ`.
    pub dz: Complex<T>,
    /// Arclength trapezoid weight.
    pub ds: T,
    /// Unit tangent in the counterclockwise direction.
    pub tangent: Complex<T>,
}

impl<T: Real> BoundarySample<T> {
    /// Outward unit normal.
    pub fn normal(&self) -> Complex<T> {
        self.tangent * Complex::new(T::zero(), -T::one())
    }
}

/// A planar domain with its counterclockwise boundary samples.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainSpec<T> {
    /// Shape tag.
    pub kind: DomainKind,
    /// Radius for disk kinds; maximal distance from `center` to the boundary otherwise.
    pub radius: T,
    /// Center for disk kinds; vertex centroid for sampled boundaries.
    pub center: Complex<T>,
    /// True when the input polygon was clockwise and has been reversed.
    pub reoriented: bool,
    /// Counterclockwise boundary samples.
    pub boundary: Vec<BoundarySample<T>>,
}

/// Default number of boundary samples for analytic kinds.
pub const DEFAULT_BOUNDARY_SAMPLES: usize = 1024;

impl<T: Real> DomainSpec<T> {
    /// The unit disk with the default boundary sampling.
    pub fn unit_disk() -> Self {
        let mut d = Self::disk(Complex::new(T::zero(), T::zero()), T::one(), DEFAULT_BOUNDARY_SAMPLES);
        d.kind = DomainKind::UnitDisk;
        d
    }

    /// A disk with `m` equally spaced boundary samples.
    pub fn disk(center: Complex<T>, radius: T, m: usize) -> Self {
        let m = m.max(3);
        let dth = T::TAU() / T::n(m);
        let boundary = (0..m)
            .map(|k| {
                let th = dth * T::n(k);
                let e = Complex::from_polar(T::one(), th);
                let tangent = e * Complex::i();
                BoundarySample {
                    s: radius * th,
                    z: center + e * radius,
                    dz: tangent * (radius * dth),
                    ds: radius * dth,
                    tangent,
                }
            })
            .collect();
        Self { kind: DomainKind::Disk, radius, center, reoriented: false, boundary }
    }

    /// Upper half-disk `{|z| < r, Im z > 0}` with about `m` boundary samples.
    pub fn upper_half_disk(radius: T, m: usize) -> Self {
        Self::half_disk(radius, m, true)
    }

    /// Lower half-disk `{|z| < r, Im z < 0}` with about `m` boundary samples.
    pub fn lower_half_disk(radius: T, m: usize) -> Self {
        Self::half_disk(radius, m, false)
    }

    fn half_disk(radius: T, m: usize, upper: bool) -> Self {
        let m = m.max(8);
        let two = T::c(2.0);
        let half = T::c(0.5);
        let ratio = two / (two + T::PI());
        let ms = ((T::n(m) * ratio).round().to_usize().unwrap_or(2)).max(2);
        let ma = (m - ms).max(2);
        let dx = two * radius / T::n(ms);
        let dth = T::PI() / T::n(ma);
        // Orientation sign: the upper boundary runs -r -> r then the arc through i r,
        // the lower one runs r -> -r then the arc through -i r.
        let sg = if upper { T::one() } else { -T::one() };
        let seg_t = Complex::new(sg, T::zero());
        let arc_t = |th: T| Complex::from_polar(T::one(), th) * Complex::i();
        let start_th = if upper { T::zero() } else { T::PI() };
        let mut boundary = Vec::with_capacity(ms + ma);
        for k in 0..ms {
            let x = -sg * radius + sg * dx * T::n(k);
            let z = Complex::new(x, T::zero());
            let (dz, ds) = if k == 0 {
                // Corner where the arc ends and the segment starts.
                let t_in = arc_t(start_th + T::PI());
                (seg_t * (half * dx) + t_in * (half * radius * dth), half * (dx + radius * dth))
            } else {
                (seg_t * dx, dx)
            };
            boundary.push(BoundarySample { s: dx * T::n(k), z, dz, ds, tangent: dz / dz.norm() });
        }
        let s0 = two * radius;
        for k in 0..ma {
            let th = start_th + dth * T::n(k);
            let z = Complex::from_polar(radius, th);
            let t = arc_t(th);
            let (dz, ds) = if k == 0 {
                (seg_t * (half * dx) + t * (half * radius * dth), half * (dx + radius * dth))
            } else {
                (t * (radius * dth), radius * dth)
            };
            boundary.push(BoundarySample {
                s: s0 + radius * dth * T::n(k),
                z,
                dz,
                ds,
                tangent: dz / dz.norm(),
            });
        }
        let kind = if upper { DomainKind::UpperHalfDisk } else { DomainKind::LowerHalfDisk };
        Self { kind, radius, center: Complex::new(T::zero(), T::zero()), reoriented: false, boundary }
    }

    /// A domain bounded by the closed polygon through `points`.
    ///
    /// Clockwise input is reversed. The polygon must be simple, have distinct
    /// consecutive vertices and turn by less than 60 degrees at every vertex.
    pub fn from_boundary(points: Vec<Complex<T>>) -> Result<Self> {
        let m = points.len();
        if m < 8 {
            return Err(Error::InvalidInput(format!("boundary needs at least 8 samples, got {m}")));
        }
        let mut pts = points;
        let area2: T = (0..m).map(|k| {
            let a = pts[k];
            let b = pts[(k + 1) % m];
            a.re * b.im - a.im * b.re
        }).sum();
        let reoriented = area2 < T::zero();
        if reoriented {
            pts.reverse();
        }
        for k in 0..m {
            let a = pts[k];
            let b = pts[(k + 1) % m];
            let c = pts[(k + 2) % m];
            if (b - a).norm() == T::zero() {
                return Err(Error::InvalidInput(format!("repeated boundary vertex at index {k}")));
            }
            let turn = ((c - b) / (b - a)).arg().abs();
            if turn >= T::FRAC_PI_3() {
                return Err(Error::InvalidInput(format!(
                    "boundary is not discretely C1: turning angle {turn} at vertex {}",
                    (k + 1) % m
                )));
            }
        }
        if m <= 8192 {
            check_simple(&pts)?;
        }
        let mut boundary = Vec::with_capacity(m);
        let mut s = T::zero();
        let half = T::c(0.5);
        for k in 0..m {
            let prev = pts[(k + m - 1) % m];
            let next = pts[(k + 1) % m];
            let z = pts[k];
            let dz = (next - prev) * half;
            let ds = ((next - z).norm() + (z - prev).norm()) * half;
            boundary.push(BoundarySample { s, z, dz, ds, tangent: dz / dz.norm() });
            s += (next - z).norm();
        }
        let center = pts.iter().fold(Complex::new(T::zero(), T::zero()), |acc, p| acc + p) / T::n(m);
        let radius = pts.iter().map(|p| (p - center).norm()).fold(T::zero(), T::max);
        Ok(Self { kind: DomainKind::BoundarySampled, radius, center, reoriented, boundary })
    }

    /// Closed-set membership test.
    pub fn contains(&self, z: Complex<T>) -> bool {
        match self.kind {
            DomainKind::UnitDisk | DomainKind::Disk => (z - self.center).norm_sqr() <= self.radius * self.radius,
            DomainKind::UpperHalfDisk => z.im >= T::zero() && z.norm_sqr() <= self.radius * self.radius,
            DomainKind::LowerHalfDisk => z.im <= T::zero() && z.norm_sqr() <= self.radius * self.radius,
            DomainKind::BoundarySampled => point_in_polygon(&self.boundary, z),
        }
    }

    /// Euclidean distance from `z` to the boundary curve.
    pub fn boundary_distance(&self, z: Complex<T>) -> T {
        match self.kind {
            DomainKind::UnitDisk | DomainKind::Disk => ((z - self.center).norm() - self.radius).abs(),
            DomainKind::UpperHalfDisk | DomainKind::LowerHalfDisk => {
                let r = self.radius;
                let arc = {
                    let on_side = if self.kind == DomainKind::UpperHalfDisk { z.im >= T::zero() } else { z.im <= T::zero() };
                    if on_side {
                        (z.norm() - r).abs()
                    } else {
                        (z - Complex::new(r, T::zero())).norm().min((z + Complex::new(r, T::zero())).norm())
                    }
                };
                let seg = if z.re.abs() <= r {
                    z.im.abs()
                } else {
                    (z - Complex::new(r * z.re.signum(), T::zero())).norm()
                };
                arc.min(seg)
            }
            DomainKind::BoundarySampled => {
                let m = self.boundary.len();
                (0..m)
                    .map(|k| segment_distance(z, self.boundary[k].z, self.boundary[(k + 1) % m].z))
                    .fold(T::infinity(), T::min)
            }
        }
    }

    /// Axis-aligned bounding box `(min, max)` of the closed domain.
    pub fn bounding_box(&self) -> (Complex<T>, Complex<T>) {
        match self.kind {
            DomainKind::UnitDisk | DomainKind::Disk => {
                let r = Complex::new(self.radius, self.radius);
                (self.center - r, self.center + r)
            }
            DomainKind::UpperHalfDisk => (Complex::new(-self.radius, T::zero()), Complex::new(self.radius, self.radius)),
            DomainKind::LowerHalfDisk => (Complex::new(-self.radius, -self.radius), Complex::new(self.radius, T::zero())),
            DomainKind::BoundarySampled => {
                let mut lo = self.boundary[0].z;
                let mut hi = lo;
                for b in &self.boundary {
                    lo = Complex::new(lo.re.min(b.z.re), lo.im.min(b.z.im));
                    hi = Complex::new(hi.re.max(b.z.re), hi.im.max(b.z.im));
                }
                (lo, hi)
            }
        }
    }

    /// Diameter of the domain.
    pub fn diameter(&self) -> T {
        match self.kind {
            DomainKind::UnitDisk | DomainKind::Disk | DomainKind::UpperHalfDisk | DomainKind::LowerHalfDisk => {
                T::c(2.0) * self.radius
            }
            DomainKind::BoundarySampled => {
                let mut d = T::zero();
                for a in &self.boundary {
                    for b in &self.boundary {
                        d = d.max((a.z - b.z).norm());
                    }
                }
                d
            }
        }
    }

    /// Exact area of the domain (polygon area for sampled boundaries).
    pub fn area(&self) -> T {
        match self.kind {
            DomainKind::UnitDisk | DomainKind::Disk => T::PI() * self.radius * self.radius,
            DomainKind::UpperHalfDisk | DomainKind::LowerHalfDisk => T::FRAC_PI_2() * self.radius * self.radius,
            DomainKind::BoundarySampled => {
                let m = self.boundary.len();
                let a2: T = (0..m)
                    .map(|k| {
                        let a = self.boundary[k].z;
                        let b = self.boundary[(k + 1) % m].z;
                        a.re * b.im - a.im * b.re
                    })
                    .sum();
                a2 * T::c(0.5)
            }
        }
    }

    /// Minimal spacing between consecutive boundary samples.
    pub fn boundary_spacing(&self) -> T {
        let m = self.boundary.len();
        (0..m)
            .map(|k| (self.boundary[(k + 1) % m].z - self.boundary[k].z).norm())
            .fold(T::infinity(), T::min)
    }

    /// Maximal spacing between consecutive boundary samples.
    pub fn max_boundary_spacing(&self) -> T {
        let m = self.boundary.len();
        (0..m)
            .map(|k| (self.boundary[(k + 1) % m].z - self.boundary[k].z).norm())
            .fold(T::zero(), T::max)
    }

    /// Indices of boundary samples on the real axis (the straight segment of a half-disk).
    pub fn segment_indices(&self) -> Vec<usize> {
        match self.kind {
            DomainKind::UpperHalfDisk | DomainKind::LowerHalfDisk => self
                .boundary
                .iter()
                .enumerate()
                .filter(|(_, b)| b.z.im == T::zero())
                .map(|(k, _)| k)
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Returns a copy with `m` boundary samples (analytic kinds only).
    pub fn resampled(&self, m: usize) -> Result<Self> {
        let mut d = match self.kind {
            DomainKind::UnitDisk | DomainKind::Disk => Self::disk(self.center, self.radius, m),
            DomainKind::UpperHalfDisk => Self::upper_half_disk(self.radius, m),
            DomainKind::LowerHalfDisk => Self::lower_half_disk(self.radius, m),
            DomainKind::BoundarySampled => {
                return Err(Error::InvalidInput("cannot resample a sampled boundary".into()))
            }
        };
        d.kind = self.kind;
        Ok(d)
    }
}

fn segment_distance<T: Real>(z: Complex<T>, a: Complex<T>, b: Complex<T>) -> T {
    let d = b - a;
    let t = ((z - a) * d.conj()).re / d.norm_sqr();
    let t = t.max(T::zero()).min(T::one());
    (z - (a + d * t)).norm()
}

fn point_in_polygon<T: Real>(boundary: &[BoundarySample<T>], z: Complex<T>) -> bool {
    let m = boundary.len();
    let mut inside = false;
    for k in 0..m {
        let a = boundary[k].z;
        let b = boundary[(k + 1) % m].z;
        if (a.im > z.im) != (b.im > z.im) {
            let x = a.re + (z.im - a.im) * (b.re - a.re) / (b.im - a.im);
            if z.re < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn check_simple<T: Real>(pts: &[Complex<T>]) -> Result<()> {
    let m = pts.len();
    let cross = |o: Complex<T>, a: Complex<T>, b: Complex<T>| (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re);
    for i in 0..m {
        let (a, b) = (pts[i], pts[(i + 1) % m]);
        for j in (i + 2)..m {
            if i == 0 && j == m - 1 {
                continue;
            }
            let (c, d) = (pts[j], pts[(j + 1) % m]);
            let d1 = cross(a, b, c);
            let d2 = cross(a, b, d);
            let d3 = cross(c, d, a);
            let d4 = cross(c, d, b);
            if d1 * d2 < T::zero() && d3 * d4 < T::zero() {
                return Err(Error::InvalidInput(format!("boundary self-intersects at edges {i} and {j}")));
            }
        }
    }
    Ok(())
}
