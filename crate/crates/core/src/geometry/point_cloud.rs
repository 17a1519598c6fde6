use super::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Provenance {
    Visible = 0,
    Hidden = 1,
}

/// 3D points with optional unit normals and visible/hidden labels.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
    pub normals: Option<Vec<Vec3>>,
    pub provenance: Option<Vec<Provenance>>,
}

impl PointCloud {
    pub fn from_points(points: Vec<Vec3>) -> Self {
        PointCloud {
            points,
            normals: None,
            provenance: None,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn count(&self, label: Provenance) -> usize {
        self.provenance
            .as_ref()
            .map_or(0, |p| p.iter().filter(|&&l| l == label).count())
    }

    /// Appends `other`, dropping normals or labels that only one side has.
    pub fn extend(&mut self, other: PointCloud) {
        let n_self = self.points.len();
        self.normals = match (self.normals.take(), other.normals) {
            (Some(mut a), Some(b)) => {
                a.extend(b);
                Some(a)
            }
            (None, b) if n_self == 0 => b,
            (a, None) if other.points.is_empty() => a,
            _ => None,
        };
        self.provenance = match (self.provenance.take(), other.provenance) {
            (Some(mut a), Some(b)) => {
                a.extend(b);
                Some(a)
            }
            (None, b) if n_self == 0 => b,
            (a, None) if other.points.is_empty() => a,
            _ => None,
        };
        self.points.extend(other.points);
    }
}
