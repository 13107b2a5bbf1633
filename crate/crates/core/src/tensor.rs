//! Small fixed-size linear algebra: planar vectors, 3-vectors, full and
//! symmetric 3x3 tensors, and a Jacobi eigensolver for symmetric matrices.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the cross product of two planar vectors.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        Vec2::new(self.x / n, self.y / n)
    }

    /// Rotate by -90 degrees: maps a CCW edge vector to its outward normal direction.
    pub fn rot_cw(self) -> Vec2 {
        Vec2::new(self.y, -self.x)
    }

    pub fn to3(self) -> Vec3 {
        Vec3::new(self.x, self.y, 0.0)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}
impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}
impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}
impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}
impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}
impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}
impl SubAssign for Vec2 {
    fn sub_assign(&mut self, o: Vec2) {
        self.x -= o.x;
        self.y -= o.y;
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn xy(self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}
impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}
impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}
impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}
impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        self.x += o.x;
        self.y += o.y;
        self.z += o.z;
    }
}
impl SubAssign for Vec3 {
    fn sub_assign(&mut self, o: Vec3) {
        self.x -= o.x;
        self.y -= o.y;
        self.z -= o.z;
    }
}

/// Full 3x3 tensor, row-major: `m[row][col]`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Mat3 {
    pub m: [[f64; 3]; 3],
}

impl Mat3 {
    pub const ZERO: Mat3 = Mat3 { m: [[0.0; 3]; 3] };

    pub fn identity() -> Mat3 {
        let mut a = Mat3::ZERO;
        a.m[0][0] = 1.0;
        a.m[1][1] = 1.0;
        a.m[2][2] = 1.0;
        a
    }

    /// Outer product a (x) b, entries a_i b_j.
    pub fn outer(a: Vec3, b: Vec3) -> Mat3 {
        let av = [a.x, a.y, a.z];
        let bv = [b.x, b.y, b.z];
        let mut r = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                r.m[i][j] = av[i] * bv[j];
            }
        }
        r
    }

    pub fn transpose(self) -> Mat3 {
        let mut r = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                r.m[i][j] = self.m[j][i];
            }
        }
        r
    }

    pub fn trace(self) -> f64 {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn mat_mul(self, o: Mat3) -> Mat3 {
        let mut r = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += self.m[i][k] * o.m[k][j];
                }
                r.m[i][j] = s;
            }
        }
        r
    }

    pub fn mul_vec(self, v: Vec3) -> Vec3 {
        Vec3::new(
            self.m[0][0] * v.x + self.m[0][1] * v.y + self.m[0][2] * v.z,
            self.m[1][0] * v.x + self.m[1][1] * v.y + self.m[1][2] * v.z,
            self.m[2][0] * v.x + self.m[2][1] * v.y + self.m[2][2] * v.z,
        )
    }

    pub fn sym_part(self) -> Sym3 {
        Sym3 {
            xx: self.m[0][0],
            yy: self.m[1][1],
            zz: self.m[2][2],
            xy: 0.5 * (self.m[0][1] + self.m[1][0]),
            xz: 0.5 * (self.m[0][2] + self.m[2][0]),
            yz: 0.5 * (self.m[1][2] + self.m[2][1]),
        }
    }

    pub fn frobenius(self) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += self.m[i][j] * self.m[i][j];
            }
        }
        s.sqrt()
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, o: Mat3) -> Mat3 {
        let mut r = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                r.m[i][j] = self.m[i][j] + o.m[i][j];
            }
        }
        r
    }
}
impl Mul<f64> for Mat3 {
    type Output = Mat3;
    fn mul(self, s: f64) -> Mat3 {
        let mut r = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                r.m[i][j] = self.m[i][j] * s;
            }
        }
        r
    }
}

/// Symmetric 3x3 tensor stored as six independent components.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Sym3 {
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
    pub xy: f64,
    pub xz: f64,
    pub yz: f64,
}

impl Sym3 {
    pub const ZERO: Sym3 = Sym3 { xx: 0.0, yy: 0.0, zz: 0.0, xy: 0.0, xz: 0.0, yz: 0.0 };

    pub fn identity() -> Sym3 {
        Sym3::spherical(1.0)
    }

    /// s * I
    pub fn spherical(s: f64) -> Sym3 {
        Sym3 { xx: s, yy: s, zz: s, ..Sym3::ZERO }
    }

    pub fn diag(a: f64, b: f64, c: f64) -> Sym3 {
        Sym3 { xx: a, yy: b, zz: c, ..Sym3::ZERO }
    }

    pub fn trace(self) -> f64 {
        self.xx + self.yy + self.zz
    }

    /// Deviator: trace-free part.
    pub fn dev(self) -> Sym3 {
        let t = self.trace() / 3.0;
        Sym3 { xx: self.xx - t, yy: self.yy - t, zz: self.zz - t, ..self }
    }

    pub fn det(self) -> f64 {
        self.xx * (self.yy * self.zz - self.yz * self.yz)
            - self.xy * (self.xy * self.zz - self.yz * self.xz)
            + self.xz * (self.xy * self.yz - self.yy * self.xz)
    }

    pub fn frobenius_sq(self) -> f64 {
        self.xx * self.xx
            + self.yy * self.yy
            + self.zz * self.zz
            + 2.0 * (self.xy * self.xy + self.xz * self.xz + self.yz * self.yz)
    }

    pub fn frobenius(self) -> f64 {
        self.frobenius_sq().sqrt()
    }

    /// Double contraction A : B.
    pub fn ddot(self, o: Sym3) -> f64 {
        self.xx * o.xx
            + self.yy * o.yy
            + self.zz * o.zz
            + 2.0 * (self.xy * o.xy + self.xz * o.xz + self.yz * o.yz)
    }

    pub fn to_mat(self) -> Mat3 {
        Mat3 {
            m: [
                [self.xx, self.xy, self.xz],
                [self.xy, self.yy, self.yz],
                [self.xz, self.yz, self.zz],
            ],
        }
    }

    pub fn mul_vec(self, v: Vec3) -> Vec3 {
        Vec3::new(
            self.xx * v.x + self.xy * v.y + self.xz * v.z,
            self.xy * v.x + self.yy * v.y + self.yz * v.z,
            self.xz * v.x + self.yz * v.y + self.zz * v.z,
        )
    }

    /// Symmetrized product sym(A B). For commuting operands this is exact,
    /// the symmetrization only removes round-off drift.
    pub fn sym_mul(self, o: Sym3) -> Sym3 {
        self.to_mat().mat_mul(o.to_mat()).sym_part()
    }

    /// Inverse via the adjugate; caller guarantees non-singular input.
    pub fn inverse(self) -> Sym3 {
        let d = self.det();
        let inv = 1.0 / d;
        Sym3 {
            xx: (self.yy * self.zz - self.yz * self.yz) * inv,
            yy: (self.xx * self.zz - self.xz * self.xz) * inv,
            zz: (self.xx * self.yy - self.xy * self.xy) * inv,
            xy: (self.xz * self.yz - self.xy * self.zz) * inv,
            xz: (self.xy * self.yz - self.xz * self.yy) * inv,
            yz: (self.xy * self.xz - self.xx * self.yz) * inv,
        }
    }

    /// Positive definiteness via leading principal minors.
    pub fn is_positive_definite(self) -> bool {
        self.xx > 0.0
            && (self.xx * self.yy - self.xy * self.xy) > 0.0
            && self.det() > 0.0
    }

    /// Change of basis E^T A E for orthonormal E (columns are the new axes).
    pub fn conjugate_by(self, e: Mat3) -> Sym3 {
        e.transpose().mat_mul(self.to_mat()).mat_mul(e).sym_part()
    }

    /// E A E^T, the inverse change of basis of `conjugate_by`.
    pub fn conjugate_back(self, e: Mat3) -> Sym3 {
        e.mat_mul(self.to_mat()).mat_mul(e.transpose()).sym_part()
    }

    pub fn abs(self) -> Sym3 {
        Sym3 {
            xx: self.xx.abs(),
            yy: self.yy.abs(),
            zz: self.zz.abs(),
            xy: self.xy.abs(),
            xz: self.xz.abs(),
            yz: self.yz.abs(),
        }
    }
}

impl Add for Sym3 {
    type Output = Sym3;
    fn add(self, o: Sym3) -> Sym3 {
        Sym3 {
            xx: self.xx + o.xx,
            yy: self.yy + o.yy,
            zz: self.zz + o.zz,
            xy: self.xy + o.xy,
            xz: self.xz + o.xz,
            yz: self.yz + o.yz,
        }
    }
}
impl Sub for Sym3 {
    type Output = Sym3;
    fn sub(self, o: Sym3) -> Sym3 {
        Sym3 {
            xx: self.xx - o.xx,
            yy: self.yy - o.yy,
            zz: self.zz - o.zz,
            xy: self.xy - o.xy,
            xz: self.xz - o.xz,
            yz: self.yz - o.yz,
        }
    }
}
impl Mul<f64> for Sym3 {
    type Output = Sym3;
    fn mul(self, s: f64) -> Sym3 {
        Sym3 {
            xx: self.xx * s,
            yy: self.yy * s,
            zz: self.zz * s,
            xy: self.xy * s,
            xz: self.xz * s,
            yz: self.yz * s,
        }
    }
}
impl AddAssign for Sym3 {
    fn add_assign(&mut self, o: Sym3) {
        *self = *self + o;
    }
}

/// Eigendecomposition of a symmetric 3x3 matrix by cyclic Jacobi rotations.
/// Returns eigenvalues sorted descending and the orthonormal matrix whose
/// columns are the matching eigenvectors.
pub fn jacobi_eigen_sym3(a: Sym3) -> ([f64; 3], Mat3) {
    let mut m = a.to_mat().m;
    let mut e = Mat3::identity().m;
    let scale = a.frobenius().max(f64::MIN_POSITIVE);

    for _sweep in 0..50 {
        let off = m[0][1].abs() + m[0][2].abs() + m[1][2].abs();
        if off <= 1.0e-15 * scale {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = m[p][q];
            if apq.abs() <= 1.0e-300 {
                continue;
            }
            // Classic 2x2 rotation that annihilates m[p][q].
            let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
            let t = if theta >= 0.0 {
                1.0 / (theta + (1.0 + theta * theta).sqrt())
            } else {
                1.0 / (theta - (1.0 + theta * theta).sqrt())
            };
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = t * c;

            for k in 0..3 {
                let mkp = m[k][p];
                let mkq = m[k][q];
                m[k][p] = c * mkp - s * mkq;
                m[k][q] = s * mkp + c * mkq;
            }
            for k in 0..3 {
                let mpk = m[p][k];
                let mqk = m[q][k];
                m[p][k] = c * mpk - s * mqk;
                m[q][k] = s * mpk + c * mqk;
            }
            for k in 0..3 {
                let ekp = e[k][p];
                let ekq = e[k][q];
                e[k][p] = c * ekp - s * ekq;
                e[k][q] = s * ekp + c * ekq;
            }
        }
    }

    let mut vals = [m[0][0], m[1][1], m[2][2]];
    let mut order = [0usize, 1, 2];
    // Sort descending.
    for i in 0..3 {
        for j in (i + 1)..3 {
            if vals[order[j]] > vals[order[i]] {
                order.swap(i, j);
            }
        }
    }
    let sorted = [vals[order[0]], vals[order[1]], vals[order[2]]];
    vals = sorted;
    let mut evec = Mat3::ZERO;
    for (new_col, &old_col) in order.iter().enumerate() {
        for k in 0..3 {
            evec.m[k][new_col] = e[k][old_col];
        }
    }
    (vals, evec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::Rng64;

    #[test]
    fn deviator_is_trace_free() {
        let a = Sym3 { xx: 1.3, yy: -0.2, zz: 4.0, xy: 0.7, xz: -1.1, yz: 0.25 };
        assert!(a.dev().trace().abs() <= 1e-14 * a.frobenius());
    }

    #[test]
    fn inverse_round_trip() {
        let a = Sym3 { xx: 2.0, yy: 3.0, zz: 1.5, xy: 0.3, xz: -0.2, yz: 0.1 };
        let p = a.to_mat().mat_mul(a.inverse().to_mat());
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((p.m[i][j] - want).abs() < 1e-13, "A A^-1 != I at ({i},{j})");
            }
        }
    }

    #[test]
    fn jacobi_identity_matrix() {
        let (vals, e) = jacobi_eigen_sym3(Sym3::identity());
        assert_eq!(vals, [1.0, 1.0, 1.0]);
        assert_eq!(e, Mat3::identity());
    }

    #[test]
    fn jacobi_diagonal_sorted() {
        let (vals, e) = jacobi_eigen_sym3(Sym3::diag(2.0, 3.0, 1.0));
        assert_eq!(vals, [3.0, 2.0, 1.0]);
        // Columns are signed unit axes.
        for c in 0..3 {
            let col = Vec3::new(e.m[0][c], e.m[1][c], e.m[2][c]);
            assert!((col.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn jacobi_reconstructs_random_symmetric() {
        let mut rng = Rng64::new(42);
        for _ in 0..200 {
            let a = Sym3 {
                xx: rng.range(-2.0, 2.0),
                yy: rng.range(-2.0, 2.0),
                zz: rng.range(-2.0, 2.0),
                xy: rng.range(-2.0, 2.0),
                xz: rng.range(-2.0, 2.0),
                yz: rng.range(-2.0, 2.0),
            };
            let (vals, e) = jacobi_eigen_sym3(a);
            // Orthonormality.
            let ete = e.transpose().mat_mul(e);
            for i in 0..3 {
                for j in 0..3 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((ete.m[i][j] - want).abs() < 1e-13);
                }
            }
            // A = E diag(vals) E^T.
            let rebuilt = Sym3::diag(vals[0], vals[1], vals[2]).conjugate_back(e);
            assert!(
                (rebuilt - a).frobenius() <= 1e-12 * a.frobenius().max(1.0),
                "eigen reconstruction failed"
            );
            assert!(vals[0] >= vals[1] && vals[1] >= vals[2]);
        }
    }

    #[test]
    fn sym_mul_matches_full_product_for_commuting_pair() {
        let g = Sym3 { xx: 1.4, yy: 0.9, zz: 1.1, xy: 0.2, xz: 0.05, yz: -0.1 };
        let full = g.to_mat().mat_mul(g.dev().to_mat());
        let sym = g.sym_mul(g.dev());
        assert!((full.sym_part() - sym).frobenius() < 1e-15);
        // G and dev(G) commute, the full product is already symmetric.
        assert!((full.m[0][1] - full.m[1][0]).abs() < 1e-14);
    }
}
