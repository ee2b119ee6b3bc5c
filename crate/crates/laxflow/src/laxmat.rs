//! Krichever-Lax matrices: constraint validation, construction from
//! Krichever-Tyurin parameters, the gauge action and Hitchin invariants.
//!
//! A Lax matrix here is an `l×l` matrix of function-field elements with at
//! most simple poles at the Tyurin points `γ_j` and poles bounded by a fixed
//! divisor `K` elsewhere, whose residue at `γ_j` is the rank-one traceless
//! matrix `β_jᵀ·α_j` and whose constant term there has `α_j` as a left
//! eigenvector. The data `(α, β, γ, κ)` coordinatizes the space; this module
//! moves between the matrix and the coordinates in both directions.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::curvefield::{
    laurent_expand, rr_basis, valuation, BaseCurve, Divisor, FieldElement, Place,
};
use crate::error::{LaxError, Result};
use crate::Tol;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

// ---------------------------------------------------------------------------
// Matrix-valued meromorphic functions
// ---------------------------------------------------------------------------

/// An `l×l` matrix of function-field elements over one base curve.
#[derive(Debug, Clone)]
pub struct MatrixFunc {
    curve: Arc<BaseCurve>,
    l: usize,
    entries: Vec<FieldElement>,
}

impl MatrixFunc {
    pub fn new(curve: Arc<BaseCurve>, l: usize, entries: Vec<FieldElement>) -> Self {
        assert_eq!(entries.len(), l * l);
        for e in &entries {
            assert!(BaseCurve::same_curve(e.curve(), &curve), "mixed curves in matrix");
        }
        MatrixFunc { curve, l, entries }
    }

    pub fn zero(curve: Arc<BaseCurve>, l: usize) -> Self {
        let entries = (0..l * l).map(|_| FieldElement::zero(curve.clone())).collect();
        MatrixFunc { curve, l, entries }
    }

    pub fn identity(curve: Arc<BaseCurve>, l: usize) -> Self {
        let mut m = MatrixFunc::zero(curve.clone(), l);
        for i in 0..l {
            *m.get_mut(i, i) = FieldElement::one(curve.clone());
        }
        m
    }

    /// Constant matrix lifted to function-field entries.
    pub fn from_constant(curve: Arc<BaseCurve>, c: &CMat) -> Self {
        let l = c.nrows();
        let entries = (0..l * l)
            .map(|idx| FieldElement::constant(curve.clone(), c[(idx / l, idx % l)]))
            .collect();
        MatrixFunc { curve, l, entries }
    }

    pub fn curve(&self) -> &Arc<BaseCurve> {
        &self.curve
    }

    pub fn size(&self) -> usize {
        self.l
    }

    pub fn get(&self, i: usize, j: usize) -> &FieldElement {
        &self.entries[i * self.l + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut FieldElement {
        &mut self.entries[i * self.l + j]
    }

    pub fn entries(&self) -> &[FieldElement] {
        &self.entries
    }

    pub fn add(&self, rhs: &MatrixFunc) -> Result<MatrixFunc> {
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(MatrixFunc::new(self.curve.clone(), self.l, entries))
    }

    pub fn sub(&self, rhs: &MatrixFunc) -> Result<MatrixFunc> {
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(MatrixFunc::new(self.curve.clone(), self.l, entries))
    }

    pub fn mul(&self, rhs: &MatrixFunc) -> Result<MatrixFunc> {
        let l = self.l;
        let mut entries = Vec::with_capacity(l * l);
        for i in 0..l {
            for j in 0..l {
                let mut acc = FieldElement::zero(self.curve.clone());
                for k in 0..l {
                    acc = acc.add(&self.get(i, k).mul(rhs.get(k, j))?)?;
                }
                entries.push(acc);
            }
        }
        Ok(MatrixFunc::new(self.curve.clone(), l, entries))
    }

    pub fn scale(&self, s: Complex64) -> MatrixFunc {
        MatrixFunc {
            curve: self.curve.clone(),
            l: self.l,
            entries: self.entries.iter().map(|e| e.scale(s)).collect(),
        }
    }

    pub fn scale_elem(&self, s: &FieldElement) -> Result<MatrixFunc> {
        let entries = self
            .entries
            .iter()
            .map(|e| e.mul(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(MatrixFunc::new(self.curve.clone(), self.l, entries))
    }

    pub fn commutator(&self, rhs: &MatrixFunc) -> Result<MatrixFunc> {
        self.mul(rhs)?.sub(&rhs.mul(self)?)
    }

    pub fn powi(&self, n: u32) -> Result<MatrixFunc> {
        let mut acc = MatrixFunc::identity(self.curve.clone(), self.l);
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn trace(&self) -> Result<FieldElement> {
        let mut acc = FieldElement::zero(self.curve.clone());
        for i in 0..self.l {
            acc = acc.add(self.get(i, i))?;
        }
        Ok(acc)
    }

    /// Numerical value at a place where all entries are regular.
    pub fn eval_at(&self, p: &Place, tol: &Tol) -> Result<CMat> {
        let mut m = CMat::zeros(self.l, self.l);
        for i in 0..self.l {
            for j in 0..self.l {
                m[(i, j)] = self.get(i, j).eval_at(p, tol)?;
            }
        }
        Ok(m)
    }

    /// One constant matrix per Laurent order `k ∈ [lo, hi]` at `p`.
    pub fn laurent_matrices(&self, p: &Place, lo: i32, hi: i32) -> Result<Vec<CMat>> {
        let mut out = vec![CMat::zeros(self.l, self.l); (hi - lo + 1) as usize];
        for i in 0..self.l {
            for j in 0..self.l {
                let w = laurent_expand(self.get(i, j), p, lo, hi)?;
                for (idx, c) in w.into_iter().enumerate() {
                    out[idx][(i, j)] = c;
                }
            }
        }
        Ok(out)
    }

    /// Deepest pole order of any entry at `p` (0 when regular).
    pub fn pole_order_at(&self, p: &Place) -> Result<i32> {
        let mut worst = 0i32;
        for e in &self.entries {
            if let Some(v) = valuation(e, p)? {
                worst = worst.max(-v);
            }
        }
        Ok(worst)
    }

    /// Distinct candidate pole places of all entries (denominator roots and
    /// the infinite places).
    pub fn pole_candidates(&self, tol: &Tol) -> Vec<Place> {
        let mut places: Vec<Place> = Vec::new();
        let mut push = |p: Place| {
            if !places.iter().any(|q| q.same(&p, tol)) {
                places.push(p);
            }
        };
        for e in &self.entries {
            for r in e.den().roots() {
                for p in self.curve.places_over(r, tol) {
                    push(p);
                }
            }
        }
        for p in self.curve.infinite_places() {
            push(p);
        }
        places
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.max_abs()).fold(0.0, f64::max)
    }

    /// Max entry-wise canonical-form distance.
    pub fn distance(&self, rhs: &MatrixFunc) -> Result<f64> {
        let mut worst = 0.0f64;
        for (a, b) in self.entries.iter().zip(&rhs.entries) {
            worst = worst.max(a.distance(b)?);
        }
        Ok(worst)
    }
}

// ---------------------------------------------------------------------------
// Tyurin data and parameters
// ---------------------------------------------------------------------------

/// One Tyurin point: a place `γ` with its framing direction `α` (last
/// coordinate normalized to 1).
#[derive(Debug, Clone)]
pub struct TyurinPoint {
    pub gamma: Place,
    pub alpha: CVec,
}

#[derive(Debug, Clone, Default)]
pub struct TyurinData {
    pub points: Vec<TyurinPoint>,
}

impl TyurinData {
    pub fn empty() -> Self {
        TyurinData { points: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Mutual distinctness, disjointness from `supp K`, `α` normalization.
    pub fn validate(&self, k_div: &Divisor, l: usize, tol: &Tol) -> Result<()> {
        for (j, pt) in self.points.iter().enumerate() {
            if pt.alpha.len() != l {
                return Err(LaxError::Precondition(format!("alpha_{j} has wrong length")));
            }
            let last = pt.alpha[l - 1];
            if (last - Complex64::new(1.0, 0.0)).norm() > tol.eq {
                return Err(LaxError::Precondition(format!(
                    "alpha_{j} last coordinate {last} != 1"
                )));
            }
            for (i, other) in self.points.iter().enumerate().skip(j + 1) {
                if pt.gamma.same(&other.gamma, tol) {
                    return Err(LaxError::Precondition(format!(
                        "gamma_{j} and gamma_{i} coincide"
                    )));
                }
            }
            for (kp, _) in k_div.iter() {
                if pt.gamma.same(kp, tol) {
                    return Err(LaxError::Precondition(format!(
                        "gamma_{j} lies on supp K"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The coordinates `(α, β, γ, κ)` of the Lax space, without a matrix.
#[derive(Debug, Clone)]
pub struct KricheverTyurinParams {
    pub tyurin: TyurinData,
    pub beta: Vec<CVec>,
    pub kappa: Vec<Complex64>,
}

/// A validated Krichever-Lax matrix with its extracted local data.
#[derive(Debug, Clone)]
pub struct KricheverLax {
    pub matrix: MatrixFunc,
    pub tyurin: TyurinData,
    pub k_divisor: Divisor,
    pub beta: Vec<CVec>,
    pub kappa: Vec<Complex64>,
    pub res_matrices: Vec<CMat>,
    pub const_matrices: Vec<CMat>,
}

impl KricheverLax {
    pub fn size(&self) -> usize {
        self.matrix.size()
    }

    pub fn curve(&self) -> &Arc<BaseCurve> {
        self.matrix.curve()
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    SimplePole,
    StrayPole,
    KPoleOrder,
    ResidueRank,
    ResidueTrace,
    ResidueFactor,
    EigenCondition,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct Violation {
    pub clause: Clause,
    pub location: String,
    pub defect: f64,
}

#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for v in &self.violations {
            writeln!(f, "  {:?} at {}: defect {:.3e}", v.clause, v.location, v.defect)?;
        }
        Ok(())
    }
}

/// Outer product `βᵀ·α` of two row vectors.
pub fn outer(beta: &CVec, alpha: &CVec) -> CMat {
    let l = beta.len();
    CMat::from_fn(l, l, |i, k| beta[i] * alpha[k])
}

/// Check a matrix against the Krichever-Lax constraints for the given Tyurin
/// data and pole divisor `K`; on success extract `(β, κ, L_{j,-1}, L_{j,0})`.
pub fn validate_lax(
    m: &MatrixFunc,
    tyurin: &TyurinData,
    k_div: &Divisor,
    tol: &Tol,
) -> Result<KricheverLax> {
    let l = m.size();
    tyurin.validate(k_div, l, tol)?;
    let mut report = ValidationReport::default();
    let scale = m.max_abs().max(1.0);

    let mut res_matrices = Vec::new();
    let mut const_matrices = Vec::new();
    let mut beta = Vec::new();
    let mut kappa = Vec::new();

    for (j, pt) in tyurin.points.iter().enumerate() {
        // Pole order at γ_j must be at most 1; read residue and constant term.
        let order = m.pole_order_at(&pt.gamma)?;
        if order > 1 {
            let mats = m.laurent_matrices(&pt.gamma, -order, -2)?;
            let defect = mats.iter().map(|mm| mm.norm()).fold(0.0, f64::max);
            report.violations.push(Violation {
                clause: Clause::SimplePole,
                location: format!("gamma_{j} = {}", pt.gamma),
                defect,
            });
        }
        let mats = m.laurent_matrices(&pt.gamma, -1, 0)?;
        let r = mats[0].clone();
        let l0 = mats[1].clone();

        // Rank-one residue by singular values.
        let svd = r.clone().svd(false, false);
        let mut sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        if sv.len() >= 2 && sv[0] > tol.eq * scale && sv[1] / sv[0] > tol.rank {
            report.violations.push(Violation {
                clause: Clause::ResidueRank,
                location: format!("gamma_{j}"),
                defect: sv[1] / sv[0],
            });
        }

        // Traceless residue.
        let tr: Complex64 = (0..l).map(|i| r[(i, i)]).sum();
        if tr.norm() > tol.eq * r.norm().max(1.0) {
            report.violations.push(Violation {
                clause: Clause::ResidueTrace,
                location: format!("gamma_{j}"),
                defect: tr.norm(),
            });
        }

        // β_j from the last column (α_j has last coordinate 1).
        let b_j = CVec::from_fn(l, |i, _| r[(i, l - 1)]);
        let factor_defect = (&r - outer(&b_j, &pt.alpha)).norm();
        if factor_defect > 10.0 * tol.rank * r.norm().max(tol.eq * scale) {
            report.violations.push(Violation {
                clause: Clause::ResidueFactor,
                location: format!("gamma_{j}"),
                defect: factor_defect,
            });
        }

        // Left eigenvector condition α_j L_{j,0} = κ_j α_j.
        let row = pt.alpha.transpose() * &l0;
        let kap = row[(0, l - 1)];
        let eig_defect = (0..l)
            .map(|k| (row[(0, k)] - kap * pt.alpha[k]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if eig_defect > tol.eq * l0.norm().max(1.0) {
            report.violations.push(Violation {
                clause: Clause::EigenCondition,
                location: format!("gamma_{j}"),
                defect: eig_defect,
            });
        }

        res_matrices.push(r);
        const_matrices.push(l0);
        beta.push(b_j);
        kappa.push(kap);
    }

    // No poles outside {γ_j} ∪ supp K; at supp K the order is bounded by the
    // multiplicity of K.
    for p in m.pole_candidates(tol) {
        if tyurin.points.iter().any(|pt| pt.gamma.same(&p, tol)) {
            continue; // handled above
        }
        let order = m.pole_order_at(&p)?;
        if order == 0 {
            continue;
        }
        let allowed = k_div.mult_at(&p, tol);
        if allowed <= 0 {
            let mats = m.laurent_matrices(&p, -order, -1)?;
            let defect = mats.iter().map(|mm| mm.norm()).fold(0.0, f64::max);
            report.violations.push(Violation {
                clause: Clause::StrayPole,
                location: format!("{p}"),
                defect,
            });
        } else if order > allowed {
            let mats = m.laurent_matrices(&p, -order, -allowed - 1)?;
            let defect = mats.iter().map(|mm| mm.norm()).fold(0.0, f64::max);
            report.violations.push(Violation {
                clause: Clause::KPoleOrder,
                location: format!("{p}"),
                defect,
            });
        }
    }

    if !report.is_clean() {
        return Err(LaxError::Validation(report));
    }
    Ok(KricheverLax {
        matrix: m.clone(),
        tyurin: tyurin.clone(),
        k_divisor: k_div.clone(),
        beta,
        kappa,
        res_matrices,
        const_matrices,
    })
}

// ---------------------------------------------------------------------------
// Linear-algebra helpers
// ---------------------------------------------------------------------------

/// Orthonormal nullspace basis of `a`, padding with zero rows so the full
/// right factor is available.
pub fn svd_nullspace(a: &CMat, rtol: f64) -> Vec<CVec> {
    let ncols = a.ncols();
    let nrows = a.nrows().max(ncols);
    let mut padded = CMat::zeros(nrows, ncols);
    padded.view_mut((0, 0), (a.nrows(), ncols)).copy_from(a);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.unwrap();
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let mut out = Vec::new();
    for i in 0..ncols {
        let s = svd.singular_values[i];
        if s <= rtol * smax.max(1.0) {
            out.push(CVec::from_fn(ncols, |j, _| vt[(i, j)].conj()));
        }
    }
    out
}

/// Minimum-norm least squares `min ‖Ax − b‖` with an SVD cutoff; returns the
/// solution, the residual norm and the numerical rank.
pub fn lstsq(a: &CMat, b: &CVec, rtol: f64) -> (CVec, f64, usize) {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let eps = rtol * smax.max(1.0);
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    let x = svd.solve(b, eps).expect("svd solve");
    let residual = (a * &x - b).norm();
    (x, residual, rank)
}

// ---------------------------------------------------------------------------
// Construction from parameters
// ---------------------------------------------------------------------------

/// Basis data shared by [`construct_lax`] and the parameter sampler: the
/// Riemann-Roch basis of `L(γ + K)` with its residue and constant term at
/// every Tyurin point.
struct LaxBasis {
    elems: Vec<FieldElement>,
    res: Vec<Vec<Complex64>>,  // [j][b]
    val0: Vec<Vec<Complex64>>, // [j][b]
}

fn lax_basis(
    curve: &Arc<BaseCurve>,
    k_div: &Divisor,
    tyurin: &TyurinData,
    tol: &Tol,
) -> Result<LaxBasis> {
    let mut d = k_div.clone();
    for pt in &tyurin.points {
        d.push(pt.gamma.clone(), 1, tol);
    }
    let elems = rr_basis(curve, &d, tol)?;
    let mut res = Vec::new();
    let mut val0 = Vec::new();
    for pt in &tyurin.points {
        let mut rrow = Vec::with_capacity(elems.len());
        let mut vrow = Vec::with_capacity(elems.len());
        for e in &elems {
            let w = laurent_expand(e, &pt.gamma, -1, 0)?;
            rrow.push(w[0]);
            vrow.push(w[1]);
        }
        res.push(rrow);
        val0.push(vrow);
    }
    Ok(LaxBasis { elems, res, val0 })
}

fn matrix_from_coords(
    curve: &Arc<BaseCurve>,
    l: usize,
    basis: &[FieldElement],
    coords: &CVec,
) -> Result<MatrixFunc> {
    let nb = basis.len();
    let mut entries = Vec::with_capacity(l * l);
    for i in 0..l {
        for k in 0..l {
            let mut acc = FieldElement::zero(curve.clone());
            for (b, e) in basis.iter().enumerate() {
                let c = coords[(i * l + k) * nb + b];
                if c.norm() > 1e-14 {
                    acc = acc.add(&e.scale(c))?;
                }
            }
            entries.push(acc);
        }
    }
    Ok(MatrixFunc::new(curve.clone(), l, entries))
}

/// Solve for the Lax matrix with prescribed Krichever-Tyurin parameters.
///
/// The matrix is sought in `L(γ + K)^{l×l}`; residue matching at every `γ_j`
/// and the κ-eigenvector conditions form one global linear system. Rank
/// deficiency or an inconsistent right-hand side signals non-generic
/// parameters.
pub fn construct_lax(
    curve: &Arc<BaseCurve>,
    k_div: &Divisor,
    params: &KricheverTyurinParams,
    tol: &Tol,
) -> Result<KricheverLax> {
    if curve.is_rational() || curve.genus() < 2 {
        return Err(LaxError::Unsupported(
            "construct_lax needs a hyperelliptic base of genus >= 2".into(),
        ));
    }
    let lg = params.tyurin.len();
    if lg == 0 {
        return Err(LaxError::Precondition("no Tyurin points".into()));
    }
    let l = params.tyurin.points[0].alpha.len();
    params.tyurin.validate(k_div, l, tol)?;

    let basis = lax_basis(curve, k_div, &params.tyurin, tol)?;
    let nb = basis.elems.len();
    let nunk = l * l * nb;
    let neq = lg * l * l + lg * l;
    let mut a = CMat::zeros(neq, nunk);
    let mut rhs = CVec::zeros(neq);
    let mut row = 0;

    for (j, pt) in params.tyurin.points.iter().enumerate() {
        // Residue prescription: Res_{γ_j} X = β_jᵀ α_j.
        for i in 0..l {
            for k in 0..l {
                for b in 0..nb {
                    a[(row, (i * l + k) * nb + b)] = basis.res[j][b];
                }
                rhs[row] = params.beta[j][i] * pt.alpha[k];
                row += 1;
            }
        }
        // Eigen condition with prescribed κ_j: α_j X_{j,0} = κ_j α_j.
        for k in 0..l {
            for i in 0..l {
                for b in 0..nb {
                    a[(row, (i * l + k) * nb + b)] += pt.alpha[i] * basis.val0[j][b];
                }
            }
            rhs[row] = params.kappa[j] * pt.alpha[k];
            row += 1;
        }
    }

    let (x, residual, rank) = lstsq(&a, &rhs, tol.rank);
    let rhs_scale = rhs.norm().max(1.0);
    if rank < nunk {
        return Err(LaxError::NonGenericParameters {
            rank_deficiency: nunk - rank,
            residual,
        });
    }
    if residual > 1e-7 * rhs_scale {
        return Err(LaxError::NonGenericParameters { rank_deficiency: 0, residual });
    }

    let m = matrix_from_coords(curve, l, &basis.elems, &x)?;
    validate_lax(&m, &params.tyurin, k_div, tol)
}

/// Draw generic Krichever-Tyurin parameters from the realizable locus.
///
/// `(γ, α)` are sampled freely; the structural linear system (rank-one
/// residues in the α-directions, traceless, left-eigenvector condition with
/// free κ) is solved and a random point of its solution space is taken, from
/// which `(β, κ)` are read off. The returned matrix realizes the parameters.
pub fn sample_params<R: Rng>(
    curve: &Arc<BaseCurve>,
    k_div: &Divisor,
    l: usize,
    rng: &mut R,
    tol: &Tol,
) -> Result<(KricheverTyurinParams, KricheverLax)> {
    let g = curve.genus();
    if curve.is_rational() || g < 2 {
        return Err(LaxError::Unsupported(
            "parameter sampling needs a hyperelliptic base of genus >= 2".into(),
        ));
    }
    let lg = l * g;
    let f = curve.f().unwrap();
    let branch_xs = f.roots();

    // Tyurin points: well-separated finite regular places off supp K.
    let mut xs: Vec<Complex64> = Vec::new();
    let mut guard = 0;
    while xs.len() < lg {
        guard += 1;
        if guard > 2000 {
            return Err(LaxError::Precondition("could not place Tyurin points".into()));
        }
        let cand = Complex64::new(rng.gen_range(-1.2..1.2), rng.gen_range(-1.2..1.2));
        let ok = xs.iter().all(|x| (x - cand).norm() > 0.25)
            && branch_xs.iter().all(|x| (x - cand).norm() > 0.2);
        if ok {
            xs.push(cand);
        }
    }
    let mut points = Vec::with_capacity(lg);
    for x in xs {
        let y = f.eval(x).sqrt();
        let y = if rng.gen_bool(0.5) { y } else { -y };
        let mut alpha = CVec::from_fn(l, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        alpha[l - 1] = Complex64::new(1.0, 0.0);
        points.push(TyurinPoint { gamma: Place::finite_regular(x, y), alpha });
    }
    let tyurin = TyurinData { points };
    tyurin.validate(k_div, l, tol)?;

    let basis = lax_basis(curve, k_div, &tyurin, tol)?;
    let nb = basis.elems.len();
    let nunk = l * l * nb;

    // Structural system: for each j, rows of Res_j annihilate ker(α_j ·),
    // tr Res_j = 0, and α_j X_{j,0} lies on the α_j line.
    let a = structural_system(&tyurin, &basis, l);
    let null = svd_nullspace(&a, tol.rank);
    if null.is_empty() {
        return Err(LaxError::NonGenericParameters { rank_deficiency: 0, residual: f64::NAN });
    }

    // Random combination with all residues bounded away from zero.
    for _ in 0..64 {
        let mut x = CVec::zeros(nunk);
        for v in &null {
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            x += v * c;
        }
        if x.norm() < 1e-6 {
            continue;
        }
        let x = x.scale(2.0 / x.norm());
        let res_ok = (0..tyurin.len()).all(|j| {
            let r = CMat::from_fn(l, l, |i, k| {
                (0..nb).map(|b| x[(i * l + k) * nb + b] * basis.res[j][b]).sum()
            });
            r.norm() > 0.02
        });
        if !res_ok {
            continue;
        }
        let m = matrix_from_coords(curve, l, &basis.elems, &x)?;
        match validate_lax(&m, &tyurin, k_div, tol) {
            Ok(lax) => {
                let params = KricheverTyurinParams {
                    tyurin: tyurin.clone(),
                    beta: lax.beta.clone(),
                    kappa: lax.kappa.clone(),
                };
                return Ok((params, lax));
            }
            Err(_) => continue,
        }
    }
    Err(LaxError::NonGenericParameters { rank_deficiency: 0, residual: f64::NAN })
}

/// Rows of the structural (free-κ, free-β) constraint system over the
/// coordinates of `L(γ+K)^{l×l}`.
fn structural_system(tyurin: &TyurinData, basis: &LaxBasis, l: usize) -> CMat {
    let nb = basis.elems.len();
    let nunk = l * l * nb;
    let mut rows: Vec<CVec> = Vec::new();
    for (j, pt) in tyurin.points.iter().enumerate() {
        let alpha = &pt.alpha;
        // Kernel basis v_k = e_k − α_k e_l, k < l.
        for k in 0..l - 1 {
            // Res_j · v_k = 0 (l scalar rows).
            for i in 0..l {
                let mut r = CVec::zeros(nunk);
                for b in 0..nb {
                    r[(i * l + k) * nb + b] += basis.res[j][b];
                    r[(i * l + (l - 1)) * nb + b] -= alpha[k] * basis.res[j][b];
                }
                rows.push(r);
            }
            // (α_j X_{j,0}) · v_k = 0.
            let mut r = CVec::zeros(nunk);
            for i in 0..l {
                for b in 0..nb {
                    r[(i * l + k) * nb + b] += alpha[i] * basis.val0[j][b];
                    r[(i * l + (l - 1)) * nb + b] -= alpha[i] * alpha[k] * basis.val0[j][b];
                }
            }
            rows.push(r);
        }
        // tr Res_j = 0.
        let mut r = CVec::zeros(nunk);
        for i in 0..l {
            for b in 0..nb {
                r[(i * l + i) * nb + b] += basis.res[j][b];
            }
        }
        rows.push(r);
    }
    let mut a = CMat::zeros(rows.len(), nunk);
    for (i, r) in rows.iter().enumerate() {
        a.row_mut(i).copy_from(&r.transpose());
    }
    a
}

// ---------------------------------------------------------------------------
// Hitchin invariants
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, serde::Serialize)]
pub struct HolomorphyEntry {
    pub invariant: usize,
    pub tyurin_index: usize,
    pub max_tail: f64,
}

/// Laurent tails of the invariants at the Tyurin points; all should vanish.
#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct HolomorphyReport {
    pub entries: Vec<HolomorphyEntry>,
    pub max_defect: f64,
}

/// Characteristic-polynomial coefficients `h_1..h_l` of the Lax matrix
/// (`det(μI − L) = μ^l + Σ h_d μ^{l−d}`) by the Faddeev-LeVerrier recursion,
/// together with the holomorphy diagnostics at every Tyurin point.
pub fn hitchin_invariants(lax: &KricheverLax) -> Result<(Vec<FieldElement>, HolomorphyReport)> {
    let m = &lax.matrix;
    let l = m.size();
    let curve = m.curve().clone();
    let mut h = Vec::with_capacity(l);
    let mut acc = m.clone();
    for d in 1..=l {
        let tr = acc.trace()?;
        let c = tr.scale(Complex64::new(-1.0 / d as f64, 0.0));
        h.push(c.clone());
        if d < l {
            let shift = MatrixFunc::identity(curve.clone(), l).scale_elem(&c)?;
            acc = m.mul(&acc.add(&shift)?)?;
        }
    }

    let mut report = HolomorphyReport::default();
    for (j, pt) in lax.tyurin.points.iter().enumerate() {
        for (d, hd) in h.iter().enumerate() {
            let w = laurent_expand(hd, &pt.gamma, -(l as i32), -1)?;
            let max_tail = w.iter().map(|c| c.norm()).fold(0.0, f64::max);
            report.max_defect = report.max_defect.max(max_tail);
            report.entries.push(HolomorphyEntry {
                invariant: d + 1,
                tyurin_index: j,
                max_tail,
            });
        }
    }
    Ok((h, report))
}

// ---------------------------------------------------------------------------
// Gauge action
// ---------------------------------------------------------------------------

/// Conjugate by a constant invertible matrix, transporting the Tyurin data.
///
/// `W` is rescaled to determinant one; `α_j ↦ α_j W` renormalized to last
/// coordinate 1, `β_j` transported so the residue conjugates correctly, `κ_j`
/// unchanged.
pub fn gauge_transform(lax: &KricheverLax, w: &CMat, tol: &Tol) -> Result<KricheverLax> {
    let l = lax.size();
    let det = w.clone().lu().determinant();
    if det.norm() < 1e-12 {
        return Err(LaxError::Precondition("gauge matrix is singular".into()));
    }
    // Rescale to SL(l): divide by a principal l-th root of the determinant.
    let root = (det.ln() / l as f64).exp();
    let w = w.map(|c| c / root);
    let w_inv = w
        .clone()
        .try_inverse()
        .ok_or_else(|| LaxError::Precondition("gauge matrix is singular".into()))?;

    let curve = lax.curve().clone();
    let wf = MatrixFunc::from_constant(curve.clone(), &w);
    let wf_inv = MatrixFunc::from_constant(curve.clone(), &w_inv);
    let new_matrix = wf_inv.mul(&lax.matrix)?.mul(&wf)?;

    let mut points = Vec::with_capacity(lax.tyurin.len());
    let mut beta = Vec::with_capacity(lax.tyurin.len());
    for (j, pt) in lax.tyurin.points.iter().enumerate() {
        let row = pt.alpha.transpose() * &w;
        let c = row[(0, l - 1)];
        if c.norm() < tol.eq {
            return Err(LaxError::GaugeRenormalization { index: j });
        }
        let alpha = CVec::from_fn(l, |k, _| row[(0, k)] / c);
        // β'ᵀ = c · W⁻¹ βᵀ keeps Res = β'ᵀ α' after the α-renormalization.
        let bcol = &w_inv * CVec::from_iterator(l, lax.beta[j].iter().cloned());
        beta.push(bcol.map(|v| v * c));
        points.push(TyurinPoint { gamma: pt.gamma.clone(), alpha });
    }
    let tyurin = TyurinData { points };
    let validated = validate_lax(&new_matrix, &tyurin, &lax.k_divisor, tol)?;

    // Consistency of the transported β against the re-extracted one.
    for (j, b) in beta.iter().enumerate() {
        let d = (b - &validated.beta[j]).norm();
        if d > 1e-6 * b.norm().max(1.0) {
            return Err(LaxError::Precondition(format!(
                "transported beta_{j} disagrees with extraction by {d:.3e}"
            )));
        }
    }
    Ok(validated)
}

// ---------------------------------------------------------------------------
// Closed-form dimension identities
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct ExpectedDims {
    pub dim_lax_space: i64,
    pub spectral_genus: i64,
    pub eigen_divisor_degree: i64,
    pub dim_cotangent: i64,
    pub regime_warning: bool,
}

/// The closed-form counts: `dim 𝓛 = l²(2g−1)`, `ĝ = l²(g−1)+1`,
/// `deg D̂ = ĝ+l−1`, `dim T* = 2(l²(g−1)+1)`. Genus below 2 is allowed with a
/// regime warning (the identities degenerate there).
pub fn expected_dims(l: i64, g: i64) -> ExpectedDims {
    assert!(l >= 1, "rank must be positive");
    assert!(g >= 0, "genus must be nonnegative");
    let ghat = l * l * (g - 1) + 1;
    ExpectedDims {
        dim_lax_space: l * l * (2 * g - 1),
        spectral_genus: ghat,
        eigen_divisor_degree: ghat + l - 1,
        dim_cotangent: 2 * ghat,
        regime_warning: g < 2,
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use crate::poly::{cr, Poly};

    pub fn genus2_curve() -> Arc<BaseCurve> {
        BaseCurve::hyperelliptic(
            Poly::new(vec![cr(1.0), cr(1.0), cr(0.0), cr(0.0), cr(0.0), cr(1.0)]),
            &Tol::default(),
        )
        .unwrap()
    }

    /// The Mumford-form benchmark matrix [[v,w],[u,−v]] with u=z²−1, v=0, w=z.
    pub fn mumford_matrix() -> MatrixFunc {
        let c = BaseCurve::rational_line();
        let u = FieldElement::from_poly(c.clone(), Poly::new(vec![cr(-1.0), cr(0.0), cr(1.0)]));
        let w = FieldElement::from_poly(c.clone(), Poly::x());
        let v = FieldElement::zero(c.clone());
        MatrixFunc::new(c, 2, vec![v.clone(), w, u, v.neg()])
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;
    use crate::curvefield::canonical_divisor;
    use crate::poly::{cr, Poly};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn expected_dims_closed_forms() {
        let d22 = expected_dims(2, 2);
        assert_eq!(d22.dim_lax_space, 12);
        assert_eq!(d22.spectral_genus, 5);
        assert_eq!(d22.eigen_divisor_degree, 6);
        assert_eq!(d22.dim_cotangent, 10);
        assert!(!d22.regime_warning);

        let d32 = expected_dims(3, 2);
        assert_eq!(d32.dim_lax_space, 27);
        assert_eq!(d32.spectral_genus, 10);
        assert_eq!(d32.eigen_divisor_degree, 12);

        let d1g = expected_dims(1, 7);
        assert_eq!(d1g.spectral_genus, 7);
        assert_eq!(d1g.eigen_divisor_degree, 7);
    }

    #[test]
    fn constant_matrix_is_valid_without_tyurin_points() {
        let c = BaseCurve::rational_line();
        let m = MatrixFunc::from_constant(
            c,
            &CMat::from_row_slice(2, 2, &[cr(1.0), cr(2.0), cr(3.0), cr(-1.0)]),
        );
        let lax = validate_lax(&m, &TyurinData::empty(), &Divisor::new(), &Tol::default());
        assert!(lax.is_ok());
    }

    #[test]
    fn mumford_hitchin_invariants() {
        let tol = Tol::default();
        let m = mumford_matrix();
        let k = Divisor::single(Place::infinity(0), 2);
        let lax = validate_lax(&m, &TyurinData::empty(), &k, &tol).unwrap();
        let (h, _) = hitchin_invariants(&lax).unwrap();
        assert!(h[0].is_zero());
        // h2 = det L = −(z³ − z).
        let h2 = h[1].as_polynomial().unwrap();
        assert_abs_diff_eq!((h2.coeff(3) + cr(1.0)).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((h2.coeff(1) - cr(1.0)).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn diagonal_constant_invariants() {
        let c = BaseCurve::rational_line();
        let a = cr(1.7);
        let m = MatrixFunc::from_constant(
            c,
            &CMat::from_row_slice(2, 2, &[a, cr(0.0), cr(0.0), -a]),
        );
        let lax =
            validate_lax(&m, &TyurinData::empty(), &Divisor::new(), &Tol::default()).unwrap();
        let (h, _) = hitchin_invariants(&lax).unwrap();
        assert!(h[0].is_zero());
        let h2 = h[1].as_polynomial().unwrap();
        assert_abs_diff_eq!((h2.coeff(0) + a * a).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn double_pole_injection_is_reported() {
        let tol = Tol::default();
        let curve = genus2_curve();
        let k = canonical_divisor(&curve).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (_, lax) = sample_params(&curve, &k, 2, &mut rng, &tol).unwrap();
        // Inject a double pole at γ_1.
        let x1 = lax.tyurin.points[0].gamma.x().unwrap();
        let lin = Poly::new(vec![-x1, cr(1.0)]);
        let dp = FieldElement::from_rational(curve.clone(), Poly::one(), &lin * &lin);
        let mut m = lax.matrix.clone();
        *m.get_mut(0, 0) = m.get(0, 0).add(&dp).unwrap();
        let err = validate_lax(&m, &lax.tyurin, &k, &tol);
        match err {
            Err(LaxError::Validation(report)) => {
                assert!(report
                    .violations
                    .iter()
                    .any(|v| v.clause == Clause::SimplePole && v.defect > 0.5));
            }
            other => panic!("expected a validation report, got {other:?}"),
        }
    }

    #[test]
    fn construct_round_trips_sampled_parameters() {
        let tol = Tol::default();
        let curve = genus2_curve();
        let k = canonical_divisor(&curve).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..3 {
            let (params, sampled) = sample_params(&curve, &k, 2, &mut rng, &tol).unwrap();
            let rebuilt = construct_lax(&curve, &k, &params, &tol).unwrap();
            for j in 0..params.tyurin.len() {
                assert!((&rebuilt.beta[j] - &params.beta[j]).norm() < 1e-8);
                assert!((rebuilt.kappa[j] - params.kappa[j]).norm() < 1e-8);
            }
            assert!(rebuilt.matrix.distance(&sampled.matrix).unwrap() < 1e-7);
        }
    }

    #[test]
    fn structural_space_has_expected_dimension() {
        // For fixed generic (γ, α) the Lax matrices form a space of dimension
        // l²(g−1)+1 = dim H⁰(End E ⊗ K) for a simple bundle E. The trace
        // conditions carry one exact dependency: tr(X)·dx/y is a differential
        // with poles only at the γ_j, so its residues sum to zero.
        let tol = Tol::default();
        let curve = genus2_curve();
        let k = canonical_divisor(&curve).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let l = 2usize;
        let g = 2usize;
        let (params, _) = sample_params(&curve, &k, l, &mut rng, &tol).unwrap();
        let basis = lax_basis(&curve, &k, &params.tyurin, &tol).unwrap();
        assert_eq!(basis.elems.len(), l * g + g - 1); // deg(γ+K) − g + 1
        let a = structural_system(&params.tyurin, &basis, l);
        let null = svd_nullspace(&a, tol.rank);
        assert_eq!(null.len(), l * l * (g - 1) + 1);
    }

    #[test]
    fn gauge_identity_and_invariance() {
        let tol = Tol::default();
        let curve = genus2_curve();
        let k = canonical_divisor(&curve).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (_, lax) = sample_params(&curve, &k, 2, &mut rng, &tol).unwrap();

        let id = CMat::identity(2, 2);
        let same = gauge_transform(&lax, &id, &tol).unwrap();
        assert!(same.matrix.distance(&lax.matrix).unwrap() < 1e-12);

        let w = CMat::from_row_slice(
            2,
            2,
            &[cr(1.3), Complex64::new(0.2, 0.4), cr(-0.5), Complex64::new(0.9, -0.1)],
        );
        let moved = gauge_transform(&lax, &w, &tol).unwrap();
        for j in 0..lax.tyurin.len() {
            assert!((moved.kappa[j] - lax.kappa[j]).norm() < 1e-9);
        }
        let (h0, _) = hitchin_invariants(&lax).unwrap();
        let (h1, _) = hitchin_invariants(&moved).unwrap();
        for (a, b) in h0.iter().zip(&h1) {
            assert!(a.distance(b).unwrap() < 1e-10);
        }
    }

    #[test]
    fn holomorphy_of_invariants_at_tyurin_points() {
        let tol = Tol::default();
        let curve = genus2_curve();
        let k = canonical_divisor(&curve).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let (_, lax) = sample_params(&curve, &k, 2, &mut rng, &tol).unwrap();
        let (_, report) = hitchin_invariants(&lax).unwrap();
        assert!(report.max_defect < 1e-9, "holomorphy defect {}", report.max_defect);
    }

    #[test]
    fn tyurin_vector_section_count() {
        // dim of vector sections with simple poles at the lg points and
        // residue direction α_j: l(lg − g + 1) − lg(l−1) = l.
        let tol = Tol::default();
        let curve = genus2_curve();
        let k = canonical_divisor(&curve).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let l = 2usize;
        let (params, _) = sample_params(&curve, &k, l, &mut rng, &tol).unwrap();
        let mut gamma_div = Divisor::new();
        for pt in &params.tyurin.points {
            gamma_div.push(pt.gamma.clone(), 1, &tol);
        }
        let comp_basis = rr_basis(&curve, &gamma_div, &tol).unwrap();
        let nb = comp_basis.len();
        assert_eq!(nb, 3); // lg − g + 1 = 4 − 2 + 1
        let lg = params.tyurin.len();
        let mut a = CMat::zeros(lg * (l - 1), l * nb);
        for (j, pt) in params.tyurin.points.iter().enumerate() {
            let res: Vec<Complex64> = comp_basis
                .iter()
                .map(|e| laurent_expand(e, &pt.gamma, -1, -1).unwrap()[0])
                .collect();
            // Residue vector must be parallel to α_j: ρ_k − α_k ρ_l = 0.
            for kcomp in 0..l - 1 {
                for b in 0..nb {
                    a[(j * (l - 1) + kcomp, kcomp * nb + b)] += res[b];
                    a[(j * (l - 1) + kcomp, (l - 1) * nb + b)] -= pt.alpha[kcomp] * res[b];
                }
            }
        }
        let null = svd_nullspace(&a, tol.rank);
        assert_eq!(null.len(), l);
    }
}
