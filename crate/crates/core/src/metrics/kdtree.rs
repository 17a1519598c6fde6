//! Static 3-d tree for exact nearest-neighbour queries.

use crate::geometry::Vec3;

const LEAF: usize = 8;

/// Balanced k-d tree stored implicitly in a permuted point array: every
/// range `[lo, hi)` larger than a leaf splits at its midpoint on the axis of
/// largest spread.
#[derive(Debug, Clone)]
pub struct KdIndex {
    points: Vec<Vec3>,
    ids: Vec<u32>,
    axes: Vec<u8>,
}

impl KdIndex {
    pub fn build(points: &[Vec3]) -> KdIndex {
        let mut ids: Vec<u32> = (0..points.len() as u32).collect();
        let mut axes = vec![0u8; points.len()];
        split(points, &mut ids, &mut axes, 0);
        let points = ids.iter().map(|&i| points[i as usize]).collect();
        KdIndex { points, ids, axes }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index into the original slice and squared distance of the nearest
    /// point. Equal distances resolve to the lower index.
    pub fn nearest(&self, q: &Vec3) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let mut best = (u32::MAX, f64::INFINITY);
        self.search(q, 0, self.points.len(), &mut best);
        Some((best.0 as usize, best.1))
    }

    fn search(&self, q: &Vec3, lo: usize, hi: usize, best: &mut (u32, f64)) {
        if hi - lo <= LEAF {
            for k in lo..hi {
                self.offer(q, k, best);
            }
            return;
        }
        let mid = (lo + hi) / 2;
        let axis = self.axes[mid] as usize;
        self.offer(q, mid, best);
        let diff = q[axis] - self.points[mid][axis];
        let (first, second) = if diff < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(q, first.0, first.1, best);
        if diff * diff <= best.1 {
            self.search(q, second.0, second.1, best);
        }
    }

    #[inline]
    fn offer(&self, q: &Vec3, k: usize, best: &mut (u32, f64)) {
        let d = (self.points[k] - q).norm_squared();
        let id = self.ids[k];
        if d < best.1 || (d == best.1 && id < best.0) {
            *best = (id, d);
        }
    }
}

fn split(points: &[Vec3], ids: &mut [u32], axes: &mut [u8], offset: usize) {
    let len = ids.len();
    if len <= LEAF {
        return;
    }
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for &i in ids.iter() {
        lo = lo.inf(&points[i as usize]);
        hi = hi.sup(&points[i as usize]);
    }
    let spread = hi - lo;
    let axis = if spread.x >= spread.y && spread.x >= spread.z {
        0
    } else if spread.y >= spread.z {
        1
    } else {
        2
    };
    let mid = len / 2;
    ids.select_nth_unstable_by(mid, |&a, &b| points[a as usize][axis].total_cmp(&points[b as usize][axis]));
    axes[offset + mid] = axis as u8;
    let (left, right) = ids.split_at_mut(mid);
    split(points, left, axes, offset);
    split(points, &mut right[1..], axes, offset + mid + 1);
}
