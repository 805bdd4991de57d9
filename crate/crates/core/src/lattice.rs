//! Period lattices of flat tori, and exact integer pattern frames used to lay out copies.

use serde::Serialize;

use crate::scalar::{add2, norm2, scale2, sub2, Real, Vec2};

/// A rank-two lattice in the plane spanned by `basis[0]` and `basis[1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lattice<T> {
    pub basis: [Vec2<T>; 2],
}

impl<T: Real> Lattice<T> {
    /// Panics on a degenerate basis.
    pub fn new(v1: Vec2<T>, v2: Vec2<T>) -> Self {
        let l = Self { basis: [v1, v2] };
        assert!(l.det() != T::zero(), "degenerate lattice basis");
        l
    }

    pub fn unit_square() -> Self {
        Self::rectangle(T::one(), T::one())
    }

    pub fn rectangle(w: T, h: T) -> Self {
        Self::new([w, T::zero()], [T::zero(), h])
    }

    /// Rhombic lattice with 60 degree angle and side `s`.
    pub fn equilateral(s: T) -> Self {
        Self::new([s, T::zero()], [s * T::half(), s * T::lit(3f64.sqrt() / 2.0)])
    }

    pub fn det(&self) -> T {
        let [a, b] = self.basis;
        a[0] * b[1] - a[1] * b[0]
    }

    pub fn point(&self, c: [i64; 2]) -> Vec2<T> {
        add2(scale2(self.basis[0], T::lit(c[0] as f64)), scale2(self.basis[1], T::lit(c[1] as f64)))
    }

    /// Real coordinates of `p` in the basis.
    pub fn coeffs(&self, p: Vec2<T>) -> Vec2<T> {
        let [a, b] = self.basis;
        let d = self.det();
        [(p[0] * b[1] - p[1] * b[0]) / d, (a[0] * p[1] - a[1] * p[0]) / d]
    }

    /// Translate `p` into the half-open cell `[0,1)^2` of the basis. Returns the reduced point and
    /// the integer shift that was subtracted.
    pub fn reduce(&self, p: Vec2<T>) -> (Vec2<T>, [i64; 2]) {
        let c = self.coeffs(p);
        let k = [c[0].floor().to_i64().unwrap_or(0), c[1].floor().to_i64().unwrap_or(0)];
        (sub2(p, self.point(k)), k)
    }

    /// Shortest lattice translate of `v`: rounding in the basis, then the 3x3 neighbourhood.
    pub fn shortest(&self, v: Vec2<T>) -> Vec2<T> {
        let c = self.coeffs(v);
        let k = [c[0].round().to_i64().unwrap_or(0), c[1].round().to_i64().unwrap_or(0)];
        let base = sub2(v, self.point(k));
        let mut best = base;
        let mut best_n = norm2(base);
        for i in -1..=1 {
            for j in -1..=1 {
                let cand = sub2(base, self.point([i, j]));
                let n = norm2(cand);
                if n < best_n {
                    best = cand;
                    best_n = n;
                }
            }
        }
        best
    }

    /// Longer diagonal of the basis parallelogram.
    pub fn cell_diameter(&self) -> T {
        let [a, b] = self.basis;
        norm2(add2(a, b)).max(norm2(sub2(a, b)))
    }

    pub fn area(&self) -> T {
        self.det().abs()
    }

    pub fn distance_mod(&self, p: Vec2<T>, q: Vec2<T>) -> T {
        norm2(self.shortest(sub2(p, q)))
    }

    /// Lattice with basis `m[0][0] v1 + m[0][1] v2`, `m[1][0] v1 + m[1][1] v2`.
    pub fn rebased(&self, m: [[i64; 2]; 2]) -> Self {
        Self::new(self.point(m[0]), self.point(m[1]))
    }

    pub fn scaled(&self, s: T) -> Self {
        Self::new(scale2(self.basis[0], s), scale2(self.basis[1], s))
    }

    pub fn convert<U: Real>(&self) -> Lattice<U> {
        let c = |v: Vec2<T>| [U::lit(v[0].as_f64()), U::lit(v[1].as_f64())];
        Lattice { basis: [c(self.basis[0]), c(self.basis[1])] }
    }
}

pub type IVec = [i64; 2];

pub fn isub(a: IVec, b: IVec) -> IVec {
    [a[0] - b[0], a[1] - b[1]]
}

pub fn iadd(a: IVec, b: IVec) -> IVec {
    [a[0] + b[0], a[1] + b[1]]
}

pub fn ineg(a: IVec) -> IVec {
    [-a[0], -a[1]]
}

pub fn idet(m: [IVec; 2]) -> i64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Integer sublattice of `Z^2` in which copies of a tile are laid out, together with the flat
/// lattice its basis is mapped onto.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternFrame<T> {
    pub basis: [IVec; 2],
    pub target: Lattice<T>,
}

impl<T: Real> PatternFrame<T> {
    pub fn new(basis: [IVec; 2], target: Lattice<T>) -> Self {
        assert!(idet(basis) != 0, "degenerate pattern lattice");
        Self { basis, target }
    }

    fn adjugate_coeffs(&self, p: IVec) -> (IVec, i64) {
        let [a, b] = self.basis;
        let d = idet(self.basis);
        let num = [p[0] * b[1] - p[1] * b[0], a[0] * p[1] - a[1] * p[0]];
        if d < 0 {
            ([-num[0], -num[1]], -d)
        } else {
            (num, d)
        }
    }

    /// Integer coordinates of a pattern lattice vector, `None` off the lattice.
    pub fn coeffs_exact(&self, p: IVec) -> Option<IVec> {
        let (num, d) = self.adjugate_coeffs(p);
        (num[0] % d == 0 && num[1] % d == 0).then(|| [num[0] / d, num[1] / d])
    }

    pub fn contains(&self, p: IVec) -> bool {
        self.coeffs_exact(p).is_some()
    }

    /// Canonical representative of `p` modulo the pattern lattice.
    pub fn reduce(&self, p: IVec) -> IVec {
        let (num, d) = self.adjugate_coeffs(p);
        let k = [num[0].div_euclid(d), num[1].div_euclid(d)];
        let [a, b] = self.basis;
        [p[0] - k[0] * a[0] - k[1] * b[0], p[1] - k[0] * a[1] - k[1] * b[1]]
    }

    /// Image of a pattern point in the plane of the target lattice.
    pub fn to_plane(&self, p: IVec) -> Vec2<T> {
        let (num, d) = self.adjugate_coeffs(p);
        let d = T::lit(d as f64);
        add2(
            scale2(self.target.basis[0], T::lit(num[0] as f64) / d),
            scale2(self.target.basis[1], T::lit(num[1] as f64) / d),
        )
    }

    pub fn convert<U: Real>(&self) -> PatternFrame<U> {
        PatternFrame { basis: self.basis, target: self.target.convert() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reduce_lands_in_cell() {
        let l = Lattice::<f64>::equilateral(1.0);
        let (r, k) = l.reduce([3.7, -2.2]);
        let c = l.coeffs(r);
        assert!((0.0..1.0).contains(&c[0]) && (0.0..1.0).contains(&c[1]));
        let back = add2(r, l.point(k));
        assert!((back[0] - 3.7).abs() < 1e-12 && (back[1] + 2.2).abs() < 1e-12);
    }

    #[test]
    fn pattern_frame_exact_coeffs() {
        let f = PatternFrame::new([[2, 1], [-1, 3]], Lattice::<f64>::unit_square());
        assert_eq!(f.coeffs_exact([1, 4]), Some([1, 1]));
        assert_eq!(f.coeffs_exact([1, 0]), None);
        assert_eq!(f.reduce([2, 1]), [0, 0]);
        let p = f.to_plane([1, 4]);
        assert!((p[0] - 1.0).abs() < 1e-15 && (p[1] - 1.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn shortest_translate_is_minimal(x in -10.0f64..10.0, y in -10.0f64..10.0, skew in -0.9f64..0.9) {
            let l = Lattice::new([1.0, 0.0], [skew, 0.7]);
            let s = l.shortest([x, y]);
            let c = l.coeffs(sub2([x, y], s));
            prop_assert!((c[0] - c[0].round()).abs() < 1e-9 && (c[1] - c[1].round()).abs() < 1e-9);
            for i in -3..=3 {
                for j in -3..=3 {
                    prop_assert!(norm2(s) <= norm2(sub2(s, l.point([i, j]))) + 1e-12);
                }
            }
        }

        #[test]
        fn pattern_reduce_is_canonical(a in -50i64..50, b in -50i64..50, i in -5i64..5, j in -5i64..5) {
            let f = PatternFrame::new([[6, 3], [-3, 9]], Lattice::<f64>::unit_square());
            let shifted = [a + i * 6 - j * 3, b + i * 3 + j * 9];
            prop_assert_eq!(f.reduce([a, b]), f.reduce(shifted));
            prop_assert!(f.contains(isub([a, b], f.reduce([a, b]))));
        }
    }
}
