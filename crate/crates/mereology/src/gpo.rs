//! Generalized Pauli operator algebra on odd-dimensional spaces.
//!
//! The clock/shift pair `A`, `B` obeys the Weyl braiding relation
//! `A B = omega^{-1} B A` with `omega = exp(2 pi i / d)`, and defines the
//! Hermitian conjugate pair `phi`, `pi` through `A = exp(-i alpha pi)` and
//! `B = exp(i beta phi)` with `alpha beta d = 2 pi`. Everything is
//! represented in the `phi` eigenbasis (where `B` is diagonal), with basis
//! index `m` standing for the lattice label `j = m - l`, `j = -l..l`.
//!
//! On top of the algebra this module provides the Schwinger-basis expansion
//! of an operator, its shift profiles along each conjugate direction, the
//! collimation score that rewards short shifts, and residuals of the finite
//! dimensional Heisenberg equations of motion.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hilbert::{commutator, Operator};

/// Clock/shift generators and derived conjugate operators on an
/// odd-dimensional space.
#[derive(Clone, Debug)]
pub struct GpoSystem {
    pub d: usize,
    pub l: usize,
    /// Eigenvalue spacing of `phi`; the spacing of `pi` is `beta`.
    pub alpha: f64,
    /// Constrained to `beta = 2 pi / (d alpha)`.
    pub beta: f64,
    pub omega: C64,
    pub shift_a: Operator,
    pub clock_b: Operator,
    pub phi: Operator,
    pub pi: Operator,
    pub sylvester_s: Operator,
}

/// Coefficients `m_ba` of an operator in the unitary basis `B^b A^a`,
/// `b, a = -l..l`.
#[derive(Clone, Debug)]
pub struct SchwingerExpansion {
    pub d: usize,
    pub l: usize,
    /// `coeffs[(b + l, a + l)] = m_ba`.
    pub coeffs: DMatrix<C64>,
    /// Sum of `|m_ba|` over all entries; the normalization of the profiles.
    pub total_weight: f64,
}

/// Conjugate direction of a shift profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Phi,
    Pi,
}

/// Marginal shift profile of an operator along one conjugate direction.
#[derive(Clone, Debug)]
pub struct ShiftProfile {
    pub axis: Axis,
    /// `weights[k]` is the weight of a shift by `k - l` units; sums to 1.
    pub weights: Vec<f64>,
    /// `sum_k weights[k] * exp(-|k - l| / d)`, in `(0, 1]`.
    pub collimation: f64,
}

/// The symmetric scale choice `alpha = beta = sqrt(2 pi / d)`.
pub fn symmetric_alpha(d: usize) -> f64 {
    (2.0 * PI / d as f64).sqrt()
}

/// Build the GPO system for odd `d >= 3` and scale `alpha > 0`.
pub fn build_gpo(d: usize, alpha: f64) -> Result<GpoSystem> {
    if d < 3 || d.is_multiple_of(2) {
        return Err(Error::InvalidDimension(format!(
            "GPO construction requires odd d >= 3, got {d}"
        )));
    }
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "GPO scale alpha must be positive, got {alpha}"
        )));
    }
    let l = (d - 1) / 2;
    let df = d as f64;
    let beta = 2.0 * PI / (df * alpha);
    let omega = C64::from_polar(1.0, 2.0 * PI / df);

    // Cyclic unit shift with wraparound: A |b_j> = |b_{j+1}>.
    let shift_a = Operator::from_fn(d, |m, mp| {
        if m == (mp + 1) % d {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });

    // Clock: diag(omega^{-l} .. omega^{l}).
    let clock_b = Operator::from_fn(d, |m, mp| {
        if m == mp {
            omega.powi(m as i32 - l as i32)
        } else {
            C64::new(0.0, 0.0)
        }
    });

    // phi is diagonal with spectrum j * 2 pi / (d beta) = j * alpha.
    let phi_diag: Vec<f64> = (0..d).map(|m| (m as f64 - l as f64) * alpha).collect();
    let phi = Operator::from_real_diagonal(&phi_diag);

    // pi in the phi basis: zero diagonal, and
    // <phi_j| pi |phi_j'> = (2 pi / (d^2 alpha)) sum_n n omega^{(j-j')n}.
    let prefactor = 2.0 * PI / (df * df * alpha);
    let pi = Operator::from_fn(d, |m, mp| {
        if m == mp {
            return C64::new(0.0, 0.0);
        }
        let delta = m as i32 - mp as i32;
        let mut acc = C64::new(0.0, 0.0);
        for n in -(l as i32)..=(l as i32) {
            acc += omega.powi(delta * n) * C64::new(n as f64, 0.0);
        }
        acc * C64::new(prefactor, 0.0)
    });

    // Sylvester's circulant matrix [S]_{jk} = omega^{jk} / sqrt(d).
    let root = 1.0 / df.sqrt();
    let sylvester_s = Operator::from_fn(d, |m, mp| {
        let j = m as i32 - l as i32;
        let k = mp as i32 - l as i32;
        omega.powi(j * k) * C64::new(root, 0.0)
    });

    Ok(GpoSystem {
        d,
        l,
        alpha,
        beta,
        omega,
        shift_a,
        clock_b,
        phi,
        pi,
        sylvester_s,
    })
}

impl GpoSystem {
    /// Signed power of the shift generator, `A^a` with `A^{-k} = A^{d-k}`.
    pub fn shift_pow(&self, a: i32) -> Operator {
        self.shift_a.powi(a.rem_euclid(self.d as i32) as usize)
    }

    /// Signed power of the clock generator.
    pub fn clock_pow(&self, b: i32) -> Operator {
        self.clock_b.powi(b.rem_euclid(self.d as i32) as usize)
    }

    /// `phi^n`.
    pub fn phi_pow(&self, n: usize) -> Operator {
        self.phi.powi(n)
    }

    /// `pi^n`.
    pub fn pi_pow(&self, n: usize) -> Operator {
        self.pi.powi(n)
    }

    /// `cos(alpha pi) = (A + A^dag)/2`, the minimal nonzero phi-shift operator.
    pub fn cos_pi(&self) -> Operator {
        self.shift_a.add(&self.shift_a.dagger()).scale_re(0.5)
    }

    /// `cos(beta phi) = (B + B^dag)/2`.
    pub fn cos_phi(&self) -> Operator {
        self.clock_b.add(&self.clock_b.dagger()).scale_re(0.5)
    }

    /// Max entrywise deviation of `A B - omega^{-1} B A` from zero.
    pub fn weyl_deviation(&self) -> f64 {
        let ab = self.shift_a.mul(&self.clock_b);
        let ba = self.clock_b.mul(&self.shift_a).scale(self.omega.conj());
        ab.sub(&ba).max_abs_entry()
    }

    /// Max entrywise deviation of `A^d` and `B^d` from the identity.
    pub fn cyclic_deviation(&self) -> f64 {
        let eye = Operator::identity(self.d);
        let da = self.shift_a.powi(self.d).sub(&eye).max_abs_entry();
        let db = self.clock_b.powi(self.d).sub(&eye).max_abs_entry();
        da.max(db)
    }

    /// Max entrywise deviation of `S A S^{-1}` from `B`.
    pub fn sylvester_deviation(&self) -> f64 {
        let s = &self.sylvester_s;
        let conj = s.mul(&self.shift_a).mul(&s.dagger());
        conj.sub(&self.clock_b).max_abs_entry()
    }

    /// Max entrywise deviation of `exp(-i alpha pi)` from `A`.
    pub fn shift_exponential_deviation(&self) -> f64 {
        let dec = self.pi.eigh().expect("pi is Hermitian by construction");
        let exp = dec.propagator(self.alpha);
        exp.sub(&self.shift_a).max_abs_entry()
    }

    /// Matrix of `op` in the `pi` eigenbasis (columns of the Sylvester
    /// matrix, ascending eigenvalue).
    pub fn to_pi_basis(&self, op: &Operator) -> Operator {
        op.conjugated_by(&self.sylvester_s)
            .expect("dimensions match by construction")
    }
}

/// Expand `m` in the Schwinger unitary basis: `m_ba = Tr(A^{-a} B^{-b} M)/d`.
pub fn schwinger_expand(m: &Operator, g: &GpoSystem) -> Result<SchwingerExpansion> {
    if m.dim() != g.d {
        return Err(Error::DimensionMismatch(format!(
            "schwinger_expand: operator dim {} vs GPO dim {}",
            m.dim(),
            g.d
        )));
    }
    let d = g.d;
    let l = g.l as i32;
    // A^p is the cyclic permutation delta_{i,(j+p) mod d} and B^q is
    // diagonal, so each trace Tr(A^{-a} B^{-b} M) reduces to a single sum
    // over the permuted diagonal of M.
    let mut coeffs = DMatrix::<C64>::zeros(d, d);
    let inv_d = 1.0 / d as f64;
    for b in -l..=l {
        for a in -l..=l {
            let p = (-a).rem_euclid(d as i32) as usize;
            let q = -b;
            let mut tr = C64::new(0.0, 0.0);
            for i in 0..d {
                let k = (i + d - p) % d;
                let phase = g.omega.powi(q * (k as i32 - l));
                tr += phase * m.get(k, i);
            }
            coeffs[((b + l) as usize, (a + l) as usize)] = tr * C64::new(inv_d, 0.0);
        }
    }
    let total_weight: f64 = coeffs.iter().map(|z| z.norm()).sum();
    Ok(SchwingerExpansion {
        d,
        l: g.l,
        coeffs,
        total_weight,
    })
}

impl SchwingerExpansion {
    pub fn coeff(&self, b: i32, a: i32) -> C64 {
        let l = self.l as i32;
        self.coeffs[((b + l) as usize, (a + l) as usize)]
    }

    /// Rebuild `sum_ba m_ba B^b A^a`; used to check the expansion.
    pub fn reconstruct(&self, g: &GpoSystem) -> Operator {
        let l = self.l as i32;
        let mut out = Operator::zeros(self.d);
        for b in -l..=l {
            for a in -l..=l {
                let term = g.clock_pow(b).mul(&g.shift_pow(a)).scale(self.coeff(b, a));
                out = out.add(&term);
            }
        }
        out
    }

    /// Max deviation from the Hermitian-source constraint
    /// `omega^{-ba} conj(m_{-b,-a}) = m_ba`.
    pub fn hermitian_constraint_deviation(&self, g: &GpoSystem) -> f64 {
        let l = self.l as i32;
        let mut max = 0.0f64;
        for b in -l..=l {
            for a in -l..=l {
                let lhs = g.omega.powi(-b * a) * self.coeff(-b, -a).conj();
                max = max.max((lhs - self.coeff(b, a)).norm());
            }
        }
        max
    }
}

/// Collimation decay weight for a shift by `k` units, `exp(-|k| / d)`.
fn decay(k: i32, d: usize) -> f64 {
    (-(k.abs() as f64) / d as f64).exp()
}

/// Marginalize the expansion onto one conjugate direction and score its
/// collimation.
pub fn shift_profile(e: &SchwingerExpansion, axis: Axis) -> ShiftProfile {
    let d = e.d;
    let l = e.l as i32;
    let denominator = if e.total_weight > 0.0 {
        e.total_weight
    } else {
        1.0
    };
    let mut weights = vec![0.0f64; d];
    for bk in 0..d {
        for ak in 0..d {
            let w = e.coeffs[(bk, ak)].norm() / denominator;
            match axis {
                Axis::Phi => weights[ak] += w,
                Axis::Pi => weights[bk] += w,
            }
        }
    }
    let collimation = weights
        .iter()
        .enumerate()
        .map(|(k, w)| w * decay(k as i32 - l, d))
        .sum();
    ShiftProfile {
        axis,
        weights,
        collimation,
    }
}

/// Phi-collimation of an operator; convenience over expand + profile.
pub fn phi_collimation(m: &Operator, g: &GpoSystem) -> Result<f64> {
    Ok(shift_profile(&schwinger_expand(m, g)?, Axis::Phi).collimation)
}

/// Pi-collimation of an operator.
pub fn pi_collimation(m: &Operator, g: &GpoSystem) -> Result<f64> {
    Ok(shift_profile(&schwinger_expand(m, g)?, Axis::Pi).collimation)
}

/// `[X, [X, ... [X, H] ... ]]` with `n` occurrences of `X`.
pub fn nested_commutator(x: &Operator, h: &Operator, n: usize) -> Result<Operator> {
    if n < 1 {
        return Err(Error::InvalidParameter(
            "nested commutator order must be >= 1".into(),
        ));
    }
    let mut acc = commutator(x, h)?;
    for _ in 1..n {
        acc = commutator(x, &acc)?;
    }
    Ok(acc)
}

/// Frobenius norm of the central `size x size` block of `op` (block centered
/// on the lattice origin).
pub fn central_block_norm(op: &Operator, size: usize) -> f64 {
    let d = op.dim();
    let size = size.min(d);
    let start = (d - size) / 2;
    let mut acc = 0.0;
    for i in 0..size {
        for j in 0..size {
            acc += op.get(start + i, start + j).norm_sqr();
        }
    }
    acc.sqrt()
}

/// Max entrywise deviation of the central `size x size` block of
/// `[phi, pi]` from `i I`. Converges toward the canonical commutation
/// relation away from the cyclic boundary as `d` grows.
pub fn ccr_central_deviation(g: &GpoSystem, size: usize) -> f64 {
    let comm = commutator(&g.phi, &g.pi).expect("dimensions match");
    let d = g.d;
    let size = size.min(d);
    let start = (d - size) / 2;
    let mut max = 0.0f64;
    for i in 0..size {
        for j in 0..size {
            let expected = if i == j {
                C64::new(0.0, 1.0)
            } else {
                C64::new(0.0, 0.0)
            };
            max = max.max((comm.get(start + i, start + j) - expected).norm());
        }
    }
    max
}

/// Residuals of the finite-dimensional Heisenberg equations of motion for a
/// polynomial Hamiltonian `H(phi, pi)` with caller-supplied derivative
/// operators:
///
/// - `r_pi`  measures `i [H, pi] + dH/dphi`,
/// - `r_phi` measures `i [H, phi] - dH/dpi`.
///
/// Each residual is the Frobenius norm of the central 3x3 block of the
/// residual operator, taken in the eigenbasis of the conjugate variable that
/// the equation evolves (`phi` basis for `r_pi`, `pi` basis for `r_phi`).
/// The central block is used because the cyclic lattice boundary carries
/// finite-d artifacts that never converge entrywise, while the interior
/// does; the trace obstruction to the exact CCR sits on the diagonal and
/// shrinks with the eigenvalue spacing.
pub fn eom_residual(
    h: &Operator,
    g: &GpoSystem,
    dh_dphi: &Operator,
    dh_dpi: &Operator,
) -> Result<(f64, f64)> {
    if h.dim() != g.d || dh_dphi.dim() != g.d || dh_dpi.dim() != g.d {
        return Err(Error::DimensionMismatch(format!(
            "eom_residual: operator dims {}, {}, {} vs GPO dim {}",
            h.dim(),
            dh_dphi.dim(),
            dh_dpi.dim(),
            g.d
        )));
    }
    let i = C64::new(0.0, 1.0);
    let res_pi = commutator(h, &g.pi)?.scale(i).add(dh_dphi);
    let res_phi = commutator(h, &g.phi)?.scale(i).sub(dh_dpi);
    let r_pi = central_block_norm(&res_pi, 3);
    let r_phi = central_block_norm(&g.to_pi_basis(&res_phi), 3);
    Ok((r_pi, r_phi))
}
