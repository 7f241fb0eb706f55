//! Factorization changes and the self/interaction split of a Hamiltonian.
//!
//! Factorizations of a `D`-dimensional space relative to a reference split
//! are parametrized by special unitaries `U(theta) = exp(i sum_a theta_a L_a)`
//! over the generalized Gell-Mann generators `L_a`. For a fixed bipartite
//! shape, a Hamiltonian splits into a trace term, traceless self terms on
//! each factor, and an interaction expanded in the `SU(d_A) x SU(d_B)`
//! product basis; a real SVD of the coefficient matrix turns the interaction
//! into a sum of Hermitian product terms `lambda_alpha A_alpha x B_alpha`
//! with unit-Frobenius factors and positive strengths sorted descending.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{partial_trace, tensor_product, BipartiteShape, Keep, Operator};

/// The `D^2 - 1` generalized Gell-Mann generators of `SU(D)`.
///
/// Ordering: symmetric pairs `(j,k)` lexicographic, then antisymmetric pairs
/// `(j,k)` lexicographic, then diagonal generators `l = 1..D-1`. Each
/// generator is traceless Hermitian with `Tr(L_a L_b) = 2 delta_ab`.
#[derive(Clone, Debug)]
pub struct GellMannBasis {
    pub dim: usize,
    pub generators: Vec<Operator>,
}

/// A point in factorization space: coefficients on the Gell-Mann generators.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorizationPoint {
    pub theta: Vec<f64>,
}

impl FactorizationPoint {
    pub fn zero(dim: usize) -> Self {
        Self {
            theta: vec![0.0; dim * dim - 1],
        }
    }

    pub fn norm(&self) -> f64 {
        self.theta.iter().map(|t| t * t).sum::<f64>().sqrt()
    }
}

/// One Hermitian product term of the diagonal interaction expansion.
#[derive(Clone, Debug)]
pub struct InteractionTerm {
    /// Strength, positive, sorted descending across terms.
    pub lambda: f64,
    /// Traceless Hermitian factor on A with unit Frobenius norm.
    pub a_op: Operator,
    /// Traceless Hermitian factor on B with unit Frobenius norm.
    pub b_op: Operator,
}

/// A Hamiltonian decomposed for a bipartite shape.
#[derive(Clone, Debug)]
pub struct HamiltonianSplit {
    pub shape: BipartiteShape,
    /// Traceless self term on A.
    pub h_a: Operator,
    /// Traceless self term on B.
    pub h_b: Operator,
    /// `Tr H`; the split reconstructs `H` as
    /// `(h0/D) I + H_A x I + I x H_B + sum lambda_a A_a x B_a`.
    pub trace_term: f64,
    pub terms: Vec<InteractionTerm>,
    /// Real coefficients of the interaction in the Gell-Mann product basis.
    pub coeff_matrix: DMatrix<f64>,
}

/// Build the generalized Gell-Mann basis for `SU(D)`, `D >= 2`.
pub fn gell_mann_basis(dim: usize) -> Result<GellMannBasis> {
    if dim < 2 {
        return Err(Error::InvalidDimension(format!(
            "Gell-Mann basis needs D >= 2, got {dim}"
        )));
    }
    let mut generators = Vec::with_capacity(dim * dim - 1);
    // Symmetric: E^{kj} + E^{jk}.
    for j in 0..dim {
        for k in (j + 1)..dim {
            let mut m = DMatrix::<C64>::zeros(dim, dim);
            m[(k, j)] = C64::new(1.0, 0.0);
            m[(j, k)] = C64::new(1.0, 0.0);
            generators.push(Operator::from_matrix(m).expect("square"));
        }
    }
    // Antisymmetric: -i (E^{jk} - E^{kj}).
    for j in 0..dim {
        for k in (j + 1)..dim {
            let mut m = DMatrix::<C64>::zeros(dim, dim);
            m[(j, k)] = C64::new(0.0, -1.0);
            m[(k, j)] = C64::new(0.0, 1.0);
            generators.push(Operator::from_matrix(m).expect("square"));
        }
    }
    // Diagonal: sqrt(2/(l(l+1))) (sum_{j<=l} E^{jj} - l E^{l+1,l+1}).
    for l in 1..dim {
        let norm = (2.0 / (l as f64 * (l as f64 + 1.0))).sqrt();
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        for j in 0..l {
            m[(j, j)] = C64::new(norm, 0.0);
        }
        m[(l, l)] = C64::new(-(l as f64) * norm, 0.0);
        generators.push(Operator::from_matrix(m).expect("square"));
    }
    Ok(GellMannBasis { dim, generators })
}

impl GellMannBasis {
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Hermitian combination `sum_a coeffs[a] L_a`.
    pub fn combine(&self, coeffs: &[f64]) -> Result<Operator> {
        if coeffs.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "coefficient vector length {} vs basis size {}",
                coeffs.len(),
                self.len()
            )));
        }
        let mut out = Operator::zeros(self.dim);
        for (c, g) in coeffs.iter().zip(&self.generators) {
            if *c != 0.0 {
                out = out.add(&g.scale_re(*c));
            }
        }
        Ok(out)
    }

    /// Coefficients of a traceless Hermitian operator in this basis,
    /// `c_a = Tr(L_a M) / 2`.
    pub fn project(&self, m: &Operator) -> Result<Vec<f64>> {
        if m.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "operator dim {} vs basis dim {}",
                m.dim(),
                self.dim
            )));
        }
        Ok(self
            .generators
            .iter()
            .map(|g| (g.mul(m).trace() * 0.5).re)
            .collect())
    }
}

/// The factorization-change unitary `exp(i sum_a theta_a L_a)`.
///
/// The generator sum is Hermitian, so the result is special-unitary.
pub fn factorization_unitary(p: &FactorizationPoint, basis: &GellMannBasis) -> Result<Operator> {
    let k = basis.combine(&p.theta)?;
    let dec = k.eigh()?;
    Ok(dec.map_spectrum(|e| C64::from_polar(1.0, e)))
}

/// Re-express a fixed Hamiltonian in a rotated factorization: `U^dag H U`.
pub fn transform_hamiltonian(h: &Operator, u: &Operator) -> Result<Operator> {
    u.check_unitary(1e-8)?;
    h.conjugated_by(u)
}

const SINGULAR_VALUE_CUTOFF: f64 = 1e-12;

/// Split a Hermitian Hamiltonian into trace, self, and diagonal interaction
/// parts for the given shape.
pub fn split_hamiltonian(h: &Operator, shape: BipartiteShape) -> Result<HamiltonianSplit> {
    if shape.total() != h.dim() {
        return Err(Error::DimensionMismatch(format!(
            "split: shape {}x{} vs operator dim {}",
            shape.d_a,
            shape.d_b,
            h.dim()
        )));
    }
    h.check_hermitian(1e-8)?;
    let (d_a, d_b) = (shape.d_a, shape.d_b);
    let dim = h.dim();

    let trace_term = h.trace().re;
    let h0 = h.traceless_part();

    let h_a = partial_trace(&h0, shape, Keep::A)?.scale_re(1.0 / d_b as f64);
    let h_b = partial_trace(&h0, shape, Keep::B)?.scale_re(1.0 / d_a as f64);

    let eye_a = Operator::identity(d_a);
    let eye_b = Operator::identity(d_b);
    let h_int = h0
        .sub(&tensor_product(&h_a, &eye_b))
        .sub(&tensor_product(&eye_a, &h_b));

    // Degenerate factor of dimension 1: no SU(d) generators, no interaction.
    if d_a < 2 || d_b < 2 {
        return Ok(HamiltonianSplit {
            shape,
            h_a,
            h_b,
            trace_term,
            terms: Vec::new(),
            coeff_matrix: DMatrix::zeros(
                d_a.saturating_mul(d_a).saturating_sub(1),
                d_b.saturating_mul(d_b).saturating_sub(1),
            ),
        });
    }

    let basis_a = gell_mann_basis(d_a)?;
    let basis_b = gell_mann_basis(d_b)?;
    let (n_a, n_b) = (basis_a.len(), basis_b.len());

    // h_ab = Tr[(L_a x L_b) H_int] / 4, contracted one factor at a time.
    let mut coeff_matrix = DMatrix::<f64>::zeros(n_a, n_b);
    let mut max_imag = 0.0f64;
    for (a, la) in basis_a.generators.iter().enumerate() {
        // t_a[l,k] = sum_{i,j} L_a[i,j] H_int[(j,l),(i,k)]
        let mut t_a = DMatrix::<C64>::zeros(d_b, d_b);
        for i in 0..d_a {
            for j in 0..d_a {
                let w = la.get(i, j);
                if w.norm_sqr() == 0.0 {
                    continue;
                }
                for lb in 0..d_b {
                    for kb in 0..d_b {
                        t_a[(lb, kb)] += w * h_int.get(j * d_b + lb, i * d_b + kb);
                    }
                }
            }
        }
        for (b, lbgen) in basis_b.generators.iter().enumerate() {
            let mut tr = C64::new(0.0, 0.0);
            for kb in 0..d_b {
                for lb in 0..d_b {
                    tr += lbgen.get(kb, lb) * t_a[(lb, kb)];
                }
            }
            max_imag = max_imag.max(tr.im.abs() * 0.25);
            coeff_matrix[(a, b)] = tr.re * 0.25;
        }
    }
    debug_assert!(
        max_imag < 1e-9 * (1.0 + h.frobenius_norm()),
        "interaction coefficients should be real, got imaginary part {max_imag}"
    );

    // Real SVD -> Hermitian product terms with positive strengths.
    let svd = coeff_matrix.clone().svd(true, true);
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));

    let sigma_max = order
        .first()
        .map(|&i| svd.singular_values[i])
        .unwrap_or(0.0);
    // Relative cutoff per the contract, with an absolute floor at the
    // Hamiltonian scale so that numerically zero interactions stay empty.
    let cutoff = SINGULAR_VALUE_CUTOFF * sigma_max.max(h.frobenius_norm());
    let inv_sqrt2 = 1.0 / 2f64.sqrt();
    let mut terms = Vec::new();
    for &alpha in &order {
        let sigma = svd.singular_values[alpha];
        if sigma <= cutoff || sigma == 0.0 {
            continue;
        }
        let coeffs_a: Vec<f64> = (0..n_a).map(|a| u[(a, alpha)] * inv_sqrt2).collect();
        let coeffs_b: Vec<f64> = (0..n_b).map(|b| v_t[(alpha, b)] * inv_sqrt2).collect();
        let mut a_op = basis_a.combine(&coeffs_a)?;
        let mut b_op = basis_b.combine(&coeffs_b)?;
        if canonical_sign(&a_op) < 0.0 {
            a_op = a_op.scale_re(-1.0);
            b_op = b_op.scale_re(-1.0);
        }
        terms.push(InteractionTerm {
            lambda: 2.0 * sigma,
            a_op,
            b_op,
        });
    }

    let _ = dim;
    Ok(HamiltonianSplit {
        shape,
        h_a,
        h_b,
        trace_term,
        terms,
        coeff_matrix,
    })
}

/// Sign convention for the `(A, B) -> (-A, -B)` ambiguity of a product term:
/// the largest-magnitude entry of `A` (first in row-major order on ties)
/// should have positive real part.
fn canonical_sign(a_op: &Operator) -> f64 {
    let d = a_op.dim();
    let mut best = C64::new(0.0, 0.0);
    let mut best_norm = -1.0;
    for i in 0..d {
        for j in 0..d {
            let z = a_op.get(i, j);
            if z.norm() > best_norm + 1e-15 {
                best_norm = z.norm();
                best = z;
            }
        }
    }
    if best.re.abs() > 1e-12 * best_norm.max(1e-300) {
        best.re.signum()
    } else if best.im != 0.0 {
        best.im.signum()
    } else {
        1.0
    }
}

impl HamiltonianSplit {
    pub fn n_int(&self) -> usize {
        self.terms.len()
    }

    pub fn dim(&self) -> usize {
        self.shape.total()
    }

    /// Construct a split directly from parts. Validates tracelessness of the
    /// self terms and the unit-norm/Hermiticity/tracelessness constraints on
    /// the interaction factors.
    pub fn from_parts(
        shape: BipartiteShape,
        h_a: Operator,
        h_b: Operator,
        trace_term: f64,
        terms: Vec<InteractionTerm>,
    ) -> Result<Self> {
        if h_a.dim() != shape.d_a || h_b.dim() != shape.d_b {
            return Err(Error::DimensionMismatch(
                "self-term dimensions do not match shape".into(),
            ));
        }
        for (op, name) in [(&h_a, "H_A"), (&h_b, "H_B")] {
            op.check_hermitian(1e-8)?;
            if op.trace().norm() > 1e-8 {
                return Err(Error::InvalidParameter(format!("{name} must be traceless")));
            }
        }
        for (k, t) in terms.iter().enumerate() {
            if t.a_op.dim() != shape.d_a || t.b_op.dim() != shape.d_b {
                return Err(Error::DimensionMismatch(format!(
                    "interaction term {k} dimensions do not match shape"
                )));
            }
            if !t.lambda.is_finite() || t.lambda <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "interaction strength of term {k} must be positive"
                )));
            }
            for (op, name) in [(&t.a_op, "A"), (&t.b_op, "B")] {
                op.check_hermitian(1e-8)?;
                if op.trace().norm() > 1e-8 {
                    return Err(Error::InvalidParameter(format!(
                        "factor {name} of term {k} must be traceless"
                    )));
                }
                if (op.frobenius_norm() - 1.0).abs() > 1e-8 {
                    return Err(Error::InvalidParameter(format!(
                        "factor {name} of term {k} must have unit Frobenius norm"
                    )));
                }
            }
        }
        let n_a = if shape.d_a >= 2 { shape.d_a * shape.d_a - 1 } else { 0 };
        let n_b = if shape.d_b >= 2 { shape.d_b * shape.d_b - 1 } else { 0 };
        Ok(Self {
            shape,
            h_a,
            h_b,
            trace_term,
            terms,
            coeff_matrix: DMatrix::zeros(n_a, n_b),
        })
    }

    /// `sum_alpha lambda_alpha A_alpha x B_alpha` on the full space.
    pub fn interaction_operator(&self) -> Operator {
        let mut out = Operator::zeros(self.dim());
        for t in &self.terms {
            out = out.add(&tensor_product(&t.a_op, &t.b_op).scale_re(t.lambda));
        }
        out
    }

    /// `H_A x I + I x H_B`.
    pub fn self_operator(&self) -> Operator {
        let eye_a = Operator::identity(self.shape.d_a);
        let eye_b = Operator::identity(self.shape.d_b);
        tensor_product(&self.h_a, &eye_b).add(&tensor_product(&eye_a, &self.h_b))
    }

    /// Rebuild the full Hamiltonian from the split.
    pub fn reconstruct(&self) -> Operator {
        let d = self.dim();
        Operator::identity(d)
            .scale_re(self.trace_term / d as f64)
            .add(&self.self_operator())
            .add(&self.interaction_operator())
    }

    /// `||H_int||_F / ||H_self||_F`; infinite when the self part vanishes.
    pub fn qml_ratio(&self) -> f64 {
        let s = self.self_operator().frobenius_norm();
        let i = self.interaction_operator().frobenius_norm();
        if s == 0.0 {
            if i == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            i / s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{
        evolve_state, random_hermitian, random_state, random_traceless_hermitian_unit,
    };
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn gell_mann_d2_is_the_pauli_triple() {
        let basis = gell_mann_basis(2).unwrap();
        assert_eq!(basis.len(), 3);
        let sx = &basis.generators[0];
        let sy = &basis.generators[1];
        let sz = &basis.generators[2];
        assert!((sx.get(0, 1) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((sx.get(1, 0) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((sy.get(0, 1) - c(0.0, -1.0)).norm() < 1e-15);
        assert!((sy.get(1, 0) - c(0.0, 1.0)).norm() < 1e-15);
        assert!((sz.get(0, 0) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((sz.get(1, 1) - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn gell_mann_d3_diagonal_family() {
        let basis = gell_mann_basis(3).unwrap();
        assert_eq!(basis.len(), 8);
        let d1 = &basis.generators[6];
        let d2 = &basis.generators[7];
        for (k, v) in [(0usize, 1.0), (1, -1.0), (2, 0.0)] {
            assert!((d1.get(k, k) - c(v, 0.0)).norm() < 1e-15);
        }
        let s3 = 1.0 / 3f64.sqrt();
        for (k, v) in [(0usize, s3), (1, s3), (2, -2.0 * s3)] {
            assert!((d2.get(k, k) - c(v, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn gell_mann_counting_and_orthogonality() {
        for dim in [2usize, 3, 4, 5] {
            let basis = gell_mann_basis(dim).unwrap();
            assert_eq!(basis.len(), dim * dim - 1);
            for (a, ga) in basis.generators.iter().enumerate() {
                assert!(ga.is_hermitian(1e-12));
                assert!(ga.trace().norm() < 1e-12);
                for (b, gb) in basis.generators.iter().enumerate() {
                    let tr = ga.mul(gb).trace();
                    let expected = if a == b { 2.0 } else { 0.0 };
                    assert!((tr - c(expected, 0.0)).norm() < 1e-10);
                }
            }
        }
        assert!(gell_mann_basis(1).is_err());
    }

    #[test]
    fn unitary_at_zero_is_identity() {
        let basis = gell_mann_basis(3).unwrap();
        let u = factorization_unitary(&FactorizationPoint::zero(3), &basis).unwrap();
        assert!(u.sub(&Operator::identity(3)).max_abs_entry() < 1e-12);
    }

    #[test]
    fn unitary_pauli_exponential_identity() {
        // exp(i (pi/2) sigma_x) = i sigma_x.
        let basis = gell_mann_basis(2).unwrap();
        let mut theta = vec![0.0; 3];
        theta[0] = std::f64::consts::FRAC_PI_2;
        let u = factorization_unitary(&FactorizationPoint { theta }, &basis).unwrap();
        let expected = basis.generators[0].scale(c(0.0, 1.0));
        assert!(u.sub(&expected).max_abs_entry() < 1e-12);
    }

    #[test]
    fn unitary_is_special_unitary_and_invertible_by_negation() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let basis = gell_mann_basis(6).unwrap();
        let theta: Vec<f64> = (0..35).map(|_| 0.1 * rng.gen_range(-1.0..1.0)).collect();
        let p = FactorizationPoint {
            theta: theta.clone(),
        };
        let u = factorization_unitary(&p, &basis).unwrap();
        assert!(u.is_unitary(1e-10));
        let det = u.matrix().clone().lu().determinant();
        assert!((det - c(1.0, 0.0)).norm() < 1e-8, "det = {det}");

        let minus = FactorizationPoint {
            theta: theta.iter().map(|t| -t).collect(),
        };
        let u_inv = factorization_unitary(&minus, &basis).unwrap();
        let prod = u.mul(&u_inv);
        assert!(prod.sub(&Operator::identity(6)).max_abs_entry() < 1e-10);
    }

    #[test]
    fn transform_preserves_spectrum_and_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let h = random_hermitian(6, &mut rng);
        assert!(transform_hamiltonian(&h, &Operator::identity(6))
            .unwrap()
            .sub(&h)
            .max_abs_entry()
            .abs()
            < 1e-14);

        let basis = gell_mann_basis(6).unwrap();
        let theta: Vec<f64> = (0..35).map(|_| 0.2 * rng.gen_range(-1.0..1.0)).collect();
        let u = factorization_unitary(&FactorizationPoint { theta }, &basis).unwrap();
        let hp = transform_hamiltonian(&h, &u).unwrap();
        assert!((hp.frobenius_norm() - h.frobenius_norm()).abs() < 1e-10);

        let mut s1: Vec<f64> = h.eigh().unwrap().values.iter().copied().collect();
        let mut s2: Vec<f64> = hp.eigh().unwrap().values.iter().copied().collect();
        s1.sort_by(f64::total_cmp);
        s2.sort_by(f64::total_cmp);
        for (a, b) in s1.iter().zip(&s2) {
            assert!((a - b).abs() < 1e-10);
        }
        // Non-unitary input is rejected.
        assert!(transform_hamiltonian(&h, &h).is_err());
    }

    #[test]
    fn split_of_noninteracting_hamiltonian_has_empty_interaction() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let shape = BipartiteShape::new(3, 4).unwrap();
        let ha = random_hermitian(3, &mut rng).traceless_part();
        let hb = random_hermitian(4, &mut rng).traceless_part();
        let h = tensor_product(&ha, &Operator::identity(4))
            .add(&tensor_product(&Operator::identity(3), &hb));
        let split = split_hamiltonian(&h, shape).unwrap();
        assert_eq!(split.n_int(), 0);
        assert!(split.h_a.sub(&ha).max_abs_entry() < 1e-12);
        assert!(split.h_b.sub(&hb).max_abs_entry() < 1e-12);
        assert!(split.trace_term.abs() < 1e-10);
    }

    #[test]
    fn split_of_rank_one_interaction_recovers_the_term() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let shape = BipartiteShape::new(3, 3).unwrap();
        let x = random_traceless_hermitian_unit(3, &mut rng);
        let y = random_traceless_hermitian_unit(3, &mut rng);
        let lambda = -0.7;
        let h = tensor_product(&x, &y).scale_re(lambda);
        let split = split_hamiltonian(&h, shape).unwrap();
        assert_eq!(split.n_int(), 1);
        let t = &split.terms[0];
        assert!((t.lambda - lambda.abs()).abs() < 1e-10);
        // A x B equals sign(lambda) X x Y up to the canonical pair sign.
        let rebuilt = tensor_product(&t.a_op, &t.b_op).scale_re(t.lambda);
        assert!(rebuilt.sub(&h).max_abs_entry() < 1e-10);
        assert!(split.h_a.frobenius_norm() < 1e-10);
        assert!(split.h_b.frobenius_norm() < 1e-10);
    }

    #[test]
    fn split_reconstructs_random_hamiltonians() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for (da, db) in [(2usize, 2usize), (2, 3), (3, 3), (3, 4)] {
            let shape = BipartiteShape::new(da, db).unwrap();
            let h = random_hermitian(da * db, &mut rng);
            let split = split_hamiltonian(&h, shape).unwrap();
            assert!(split.n_int() <= (da * da - 1).min(db * db - 1));
            let err = split.reconstruct().sub(&h).max_abs_entry();
            assert!(err < 1e-10, "reconstruction error {err} at {da}x{db}");
            // Terms are normalized, Hermitian, traceless, sorted descending.
            for w in split.terms.windows(2) {
                assert!(w[0].lambda >= w[1].lambda);
            }
            for t in &split.terms {
                assert!(t.lambda > 0.0);
                assert!((t.a_op.frobenius_norm() - 1.0).abs() < 1e-10);
                assert!((t.b_op.frobenius_norm() - 1.0).abs() < 1e-10);
                assert!(t.a_op.is_hermitian(1e-10));
                assert!(t.b_op.is_hermitian(1e-10));
                assert!(t.a_op.trace().norm() < 1e-10);
                assert!(t.b_op.trace().norm() < 1e-10);
            }
        }
    }

    #[test]
    fn interaction_strengths_are_local_unitary_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(81);
        let shape = BipartiteShape::new(3, 3).unwrap();
        let h = random_hermitian(9, &mut rng);
        let split = split_hamiltonian(&h, shape).unwrap();

        let basis3 = gell_mann_basis(3).unwrap();
        let ta: Vec<f64> = (0..8).map(|_| 0.3 * rng.gen_range(-1.0..1.0)).collect();
        let tb: Vec<f64> = (0..8).map(|_| 0.3 * rng.gen_range(-1.0..1.0)).collect();
        let ua = factorization_unitary(&FactorizationPoint { theta: ta }, &basis3).unwrap();
        let ub = factorization_unitary(&FactorizationPoint { theta: tb }, &basis3).unwrap();
        let u = tensor_product(&ua, &ub);
        let hp = transform_hamiltonian(&h, &u).unwrap();
        let split_p = split_hamiltonian(&hp, shape).unwrap();

        assert_eq!(split.n_int(), split_p.n_int());
        for (t, tp) in split.terms.iter().zip(&split_p.terms) {
            assert!(
                (t.lambda - tp.lambda).abs() < 1e-9,
                "{} vs {}",
                t.lambda,
                tp.lambda
            );
        }
    }

    #[test]
    fn split_rejects_bad_inputs() {
        let shape = BipartiteShape::new(2, 3).unwrap();
        assert!(split_hamiltonian(&Operator::identity(4), shape).is_err());
        let mut m = DMatrix::<C64>::zeros(6, 6);
        m[(0, 1)] = c(1.0, 0.0);
        let not_herm = Operator::from_matrix(m).unwrap();
        assert!(split_hamiltonian(&not_herm, shape).is_err());
    }

    #[test]
    fn transformed_split_reconstruction_used_by_the_sweep() {
        // A factorization rotation leaves the total Hamiltonian invariant,
        // so evolving with the reconstruction of the rotated split must
        // agree with evolving with U^dag H U directly.
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        let shape = BipartiteShape::new(2, 3).unwrap();
        let h = random_hermitian(6, &mut rng);
        let basis = gell_mann_basis(6).unwrap();
        let theta: Vec<f64> = (0..35).map(|_| 0.1 * rng.gen_range(-1.0..1.0)).collect();
        let u = factorization_unitary(&FactorizationPoint { theta }, &basis).unwrap();
        let hp = transform_hamiltonian(&h, &u).unwrap();
        let split = split_hamiltonian(&hp, shape).unwrap();

        let psi = random_state(6, &mut rng);
        let direct = evolve_state(&hp, &psi, 0.37).unwrap();
        let via_split = evolve_state(&split.reconstruct(), &psi, 0.37).unwrap();
        assert!((direct.amplitudes() - via_split.amplitudes()).norm() < 1e-9);
    }
}
