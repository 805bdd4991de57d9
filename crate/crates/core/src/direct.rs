//! Single-copy solves: one disk mapped onto a triangle or rectangle with corners pinned and
//! boundary vertices sliding along their side lines.

use serde::Serialize;
use thiserror::Error;

use crate::construct::{build_torus_4, build_torus_42, build_torus_8, ConstructError, Construction, MarkedDisk};
use crate::energy::{EdgeWeights, EnergyError};
use crate::lattice::Lattice;
use crate::linalg::{solve_dense, solve_spd, CsrMatrix, LinalgError, SolveStats, SolverMethod, SolverOptions};
use crate::scalar::{add2, dot2, norm2, scale2, sub2, Real, Vec2};
use crate::torus::{harmonic_embedding, TorusError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ShapeKind {
    RightIsosceles,
    Equilateral,
    Rectangle { aspect: f64 },
}

/// Target polygon; side `j` runs from corner `j` to corner `j + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetShape<T> {
    pub kind: ShapeKind,
    pub corners: Vec<Vec2<T>>,
}

impl<T: Real> TargetShape<T> {
    /// Legs of length 1/2, right angle at the third corner.
    pub fn right_isosceles() -> Self {
        let h = T::half();
        Self { kind: ShapeKind::RightIsosceles, corners: vec![[T::zero(), T::zero()], [h, h], [T::zero(), h]] }
    }

    /// Unit side.
    pub fn equilateral() -> Self {
        let h = T::lit(3f64.sqrt() / 2.0);
        Self { kind: ShapeKind::Equilateral, corners: vec![[T::zero(), T::zero()], [T::one(), T::zero()], [T::half(), h]] }
    }

    /// `aspect x 1`.
    pub fn rectangle(aspect: T) -> Self {
        let (z, o) = (T::zero(), T::one());
        Self {
            kind: ShapeKind::Rectangle { aspect: aspect.as_f64() },
            corners: vec![[z, z], [aspect, z], [aspect, o], [z, o]],
        }
    }

    /// Start point and unit direction of side `j`.
    pub fn side_line(&self, j: usize) -> (Vec2<T>, Vec2<T>) {
        let a = self.corners[j];
        let d = sub2(self.corners[(j + 1) % self.corners.len()], a);
        (a, scale2(d, T::one() / norm2(d)))
    }

    pub fn diameter(&self) -> T {
        let mut best = T::zero();
        for a in &self.corners {
            for b in &self.corners {
                best = best.max(norm2(sub2(*a, *b)));
            }
        }
        best
    }

    /// Torus construction whose tiles have this shape.
    pub fn construction(&self) -> Construction {
        match self.kind {
            ShapeKind::RightIsosceles => Construction::Isosceles8,
            ShapeKind::Equilateral => Construction::Equilateral42,
            ShapeKind::Rectangle { .. } => Construction::Rectangle4,
        }
    }
}

#[derive(Debug, Error)]
pub enum DirectError {
    #[error("shape has {expected} corners but the disk has {got} marks")]
    Marks { expected: usize, got: usize },
    #[error("weights must be finite (degenerate faces {faces:?})")]
    NonFiniteWeights { faces: Vec<usize> },
    #[error("direct solution leaves residual {residual:.3e}")]
    Residual { residual: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
}

#[derive(Debug, Clone, Serialize)]
pub struct DirectSolution<T> {
    pub uv: Vec<Vec2<T>>,
    pub stats: SolveStats,
    /// Largest residual of the interior and tangential equations, relative to
    /// `max |w| * shape diameter`.
    pub equation_residual: f64,
}

enum Dof<T> {
    Fixed(Vec2<T>),
    /// On a side line: `point + t * dir`, `t` unknown at index `idx`.
    Line { point: Vec2<T>, dir: Vec2<T>, idx: usize },
    Free { idx: usize },
}

/// Minimizes the Dirichlet energy of the disk with marks pinned to the shape corners and each
/// boundary path constrained to, but free to slide along, its side line.
pub fn solve_direct<T: Real>(
    d: &MarkedDisk<T>,
    shape: &TargetShape<T>,
    w: &EdgeWeights<T>,
    opts: &SolverOptions,
) -> Result<DirectSolution<T>, DirectError> {
    if d.marks().len() != shape.corners.len() {
        return Err(DirectError::Marks { expected: shape.corners.len(), got: d.marks().len() });
    }
    if w.edge_weights().iter().any(|x| !x.is_finite()) {
        return Err(DirectError::NonFiniteWeights { faces: w.degenerate_faces().to_vec() });
    }
    let mesh = d.mesh();
    let nv = mesh.n_vertices();
    let mut dof: Vec<Option<Dof<T>>> = (0..nv).map(|_| None).collect();
    for (j, &m) in d.marks().iter().enumerate() {
        dof[m] = Some(Dof::Fixed(shape.corners[j]));
    }
    let mut n = 0;
    for j in 0..shape.corners.len() {
        let (point, dir) = shape.side_line(j);
        let side = d.side(j);
        for &v in &side[1..side.len() - 1] {
            dof[v] = Some(Dof::Line { point, dir, idx: n });
            n += 1;
        }
    }
    let dof: Vec<Dof<T>> = dof
        .into_iter()
        .map(|x| {
            x.unwrap_or_else(|| {
                n += 2;
                Dof::Free { idx: n - 2 }
            })
        })
        .collect();

    // each vertex is c_v + B_v q_v; an edge adds w/2 |x_i - x_j|^2
    let basis = |v: usize| -> (Vec2<T>, Vec<(usize, Vec2<T>)>) {
        match &dof[v] {
            Dof::Fixed(p) => (*p, vec![]),
            Dof::Line { point, dir, idx } => (*point, vec![(*idx, *dir)]),
            Dof::Free { idx } => ([T::zero(); 2], vec![(*idx, [T::one(), T::zero()]), (idx + 1, [T::zero(), T::one()])]),
        }
    };
    let mut trip = Vec::new();
    let mut rhs = vec![T::zero(); n];
    for e in 0..mesh.n_edges() {
        let [i, j] = mesh.edge_vertices(e);
        let we = w.weight(e);
        let (ci, bi) = basis(i);
        let (cj, bj) = basis(j);
        for (own_b, own_c, other_b, other_c) in [(&bi, ci, &bj, cj), (&bj, cj, &bi, ci)] {
            for &(r, u) in own_b.iter() {
                for &(c, v) in own_b.iter() {
                    trip.push((r, c, we * dot2(u, v)));
                }
                for &(c, v) in other_b.iter() {
                    trip.push((r, c, -we * dot2(u, v)));
                }
                rhs[r] += we * dot2(u, sub2(other_c, own_c));
            }
        }
    }
    let a = CsrMatrix::from_triplets(n, trip);
    let negative = w.edge_weights().iter().any(|&x| x < T::zero());
    let (sol, stats) = if n == 0 {
        (vec![vec![]], SolveStats { method: SolverMethod::Pcg, iterations: 0, relative_residual: 0.0 })
    } else if negative {
        log::warn!("negative weights: solving densely, the map may fold");
        solve_dense(&a, &[rhs])?
    } else {
        solve_spd(&a, &[rhs], opts)?
    };
    if !(stats.relative_residual <= opts.accept) {
        return Err(DirectError::Residual { residual: stats.relative_residual });
    }
    let q = &sol[0];
    let uv: Vec<Vec2<T>> = dof
        .iter()
        .map(|d| match d {
            Dof::Fixed(p) => *p,
            Dof::Line { point, dir, idx } => add2(*point, scale2(*dir, q[*idx])),
            Dof::Free { idx } => [q[*idx], q[idx + 1]],
        })
        .collect();

    let mut force = vec![[0.0f64; 2]; nv];
    for e in 0..mesh.n_edges() {
        let [i, j] = mesh.edge_vertices(e);
        let dv = sub2(uv[j], uv[i]).map(|x| x.as_f64());
        let we = w.weight(e).as_f64();
        for k in 0..2 {
            force[i][k] += we * dv[k];
            force[j][k] -= we * dv[k];
        }
    }
    let worst = dof
        .iter()
        .zip(&force)
        .map(|(d, f)| match d {
            Dof::Fixed(_) => 0.0,
            Dof::Line { dir, .. } => (f[0] * dir[0].as_f64() + f[1] * dir[1].as_f64()).abs(),
            Dof::Free { .. } => f[0].hypot(f[1]),
        })
        .fold(0.0, f64::max);
    let wmax = w.edge_weights().iter().map(|x| x.as_f64().abs()).fold(0.0, f64::max);
    let scale = wmax * shape.diameter().as_f64();
    let equation_residual = if scale > 0.0 { worst / scale } else { worst };
    Ok(DirectSolution { uv, stats, equation_residual })
}

/// Best alignment of `moving` onto `fixed` by a plane isometry (reflections allowed), optionally
/// with a uniform scale.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Alignment {
    pub rms: f64,
    pub reflected: bool,
    pub scale: f64,
    pub rotation: f64,
    pub translation: [f64; 2],
}

pub fn procrustes(fixed: &[[f64; 2]], moving: &[[f64; 2]], allow_scale: bool) -> Alignment {
    assert_eq!(fixed.len(), moving.len());
    let n = fixed.len().max(1) as f64;
    let mean = |p: &[[f64; 2]]| {
        let s = p.iter().fold([0.0, 0.0], |a, q| [a[0] + q[0], a[1] + q[1]]);
        [s[0] / n, s[1] / n]
    };
    let (mf, mm) = (mean(fixed), mean(moving));
    let fx: Vec<[f64; 2]> = fixed.iter().map(|p| [p[0] - mf[0], p[1] - mf[1]]).collect();
    [false, true]
        .into_iter()
        .map(|reflected| {
            let mv: Vec<[f64; 2]> = moving
                .iter()
                .map(|p| {
                    let q = [p[0] - mm[0], p[1] - mm[1]];
                    if reflected {
                        [q[0], -q[1]]
                    } else {
                        q
                    }
                })
                .collect();
            let (mut sd, mut sc, mut ss) = (0.0, 0.0, 0.0);
            for (y, x) in mv.iter().zip(&fx) {
                sd += y[0] * x[0] + y[1] * x[1];
                sc += y[0] * x[1] - y[1] * x[0];
                ss += y[0] * y[0] + y[1] * y[1];
            }
            let theta = sc.atan2(sd);
            let scale = if allow_scale && ss > 0.0 { sd.hypot(sc) / ss } else { 1.0 };
            let (c, s) = (theta.cos(), theta.sin());
            let err: f64 = mv
                .iter()
                .zip(&fx)
                .map(|(y, x)| {
                    let r = [scale * (c * y[0] - s * y[1]), scale * (s * y[0] + c * y[1])];
                    (r[0] - x[0]).powi(2) + (r[1] - x[1]).powi(2)
                })
                .sum();
            // x ~ scale * R * F (y - mm) + mf
            let fm = if reflected { [mm[0], -mm[1]] } else { mm };
            let rm = [scale * (c * fm[0] - s * fm[1]), scale * (s * fm[0] + c * fm[1])];
            Alignment {
                rms: (err / n).sqrt(),
                reflected,
                scale,
                rotation: theta,
                translation: [mf[0] - rm[0], mf[1] - rm[1]],
            }
        })
        .min_by(|a, b| a.rms.total_cmp(&b.rms))
        .expect("two candidates")
}

#[derive(Debug, Clone, Serialize)]
pub struct Crosscheck {
    pub construction: Construction,
    pub rms_deviation: f64,
    /// `rms_deviation / shape diameter`.
    pub relative_rms: f64,
    pub alignment: Alignment,
    pub similarity: bool,
    /// Dirichlet energy of the direct solution.
    pub energy_direct: f64,
    /// Energy of copy 0 inside the torus solve, rescaled by `alignment.scale^2`.
    pub energy_torus_copy: f64,
    pub passed: bool,
}

/// Relative RMS bound for agreement between the direct and the torus solution.
pub const CROSSCHECK_TOLERANCE: f64 = 1e-7;

/// Solves the disk both directly and through its glued torus, then aligns copy 0 of the torus
/// solution to the direct one. Equilateral targets are compared up to similarity, the others up
/// to congruence.
pub fn crosscheck_against_torus<T: Real>(
    d: &MarkedDisk<T>,
    shape: &TargetShape<T>,
    w: &EdgeWeights<T>,
    opts: &SolverOptions,
) -> Result<(Crosscheck, DirectSolution<T>), DirectError> {
    let direct = solve_direct(d, shape, w, opts)?;
    let t = match shape.kind {
        ShapeKind::RightIsosceles => build_torus_8(d)?,
        ShapeKind::Equilateral => build_torus_42(d)?,
        ShapeKind::Rectangle { aspect } => build_torus_4(d, T::lit(aspect))?,
    };
    let tw = t.lift_weights(w);
    let lattice = t.lattice().unwrap_or_else(Lattice::unit_square);
    let (emb, _) = harmonic_embedding(&t, &tw, t.default_pin(), lattice, opts)?;
    let copy = emb.copy_uv(&t, 0);
    let fixed: Vec<[f64; 2]> = direct.uv.iter().map(|p| p.map(|x| x.as_f64())).collect();
    let moving: Vec<[f64; 2]> = copy.iter().map(|p| p.map(|x| x.as_f64())).collect();
    let similarity = matches!(shape.kind, ShapeKind::Equilateral);
    let alignment = procrustes(&fixed, &moving, similarity);
    let diam = shape.diameter().as_f64();
    let mesh = d.mesh();
    let energy_direct = crate::energy::dirichlet_energy(mesh, w, &direct.uv)?.as_f64();
    let energy_copy = crate::energy::dirichlet_energy(mesh, w, &copy)?.as_f64();
    let relative_rms = alignment.rms / diam;
    let report = Crosscheck {
        construction: t.construction(),
        rms_deviation: alignment.rms,
        relative_rms,
        alignment,
        similarity,
        energy_direct,
        energy_torus_copy: energy_copy * alignment.scale * alignment.scale,
        passed: relative_rms <= CROSSCHECK_TOLERANCE,
    };
    Ok((report, direct))
}
