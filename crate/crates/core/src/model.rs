//! Physical parameter sets, the derived diffusion/length/time scales, the
//! Arrhenius temperature model, and external potentials.
//!
//! All symbols shared across solvers live here: the Einstein diffusion
//! constant D = k_BT/ζ = 1/(βζ), the thermal de Broglie length
//! λ_T = ħ/(2√(m k_BT)) = ħ√β/(2√m), and the activation length
//! λ_E = ħ/(2√(m E_a)).

use crate::error::{Error, Result};
use crate::scalar::{cst, two, Real};

/// Brownian-particle parameters: mass m, friction ζ, inverse temperature β,
/// quantum of action ħ, and oscillator frequency ω₀ (0 means free particle).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams<R: Real> {
    pub mass: R,
    pub friction: R,
    pub beta: R,
    pub hbar: R,
    pub omega0: R,
}

impl<R: Real> PhysicalParams<R> {
    pub fn new(mass: R, friction: R, beta: R, hbar: R, omega0: R) -> Result<Self> {
        let positive = |name: &'static str, v: R| -> Result<()> {
            if !(v > R::zero()) || !v.is_finite() {
                return Err(Error::InvalidParam {
                    name,
                    reason: format!("must be > 0 and finite, got {v}"),
                });
            }
            Ok(())
        };
        positive("mass", mass)?;
        positive("friction", friction)?;
        positive("beta", beta)?;
        let nonneg = |name: &'static str, v: R| -> Result<()> {
            if !(v >= R::zero()) || !v.is_finite() {
                return Err(Error::InvalidParam {
                    name,
                    reason: format!("must be >= 0 and finite, got {v}"),
                });
            }
            Ok(())
        };
        nonneg("hbar", hbar)?;
        nonneg("omega0", omega0)?;
        Ok(Self {
            mass,
            friction,
            beta,
            hbar,
            omega0,
        })
    }

    /// Classical Einstein diffusion constant D = k_BT/ζ = 1/(βζ).
    pub fn diffusion(&self) -> R {
        (self.beta * self.friction).recip()
    }

    /// Thermal de Broglie length λ_T = ħ√β/(2√m); zero iff ħ = 0.
    pub fn lambda_t(&self) -> R {
        self.hbar * self.beta.sqrt() / (two::<R>() * self.mass.sqrt())
    }

    /// Time at which the classical dispersion 2Dt reaches λ_T².
    pub fn t_cross(&self) -> R {
        let lt = self.lambda_t();
        lt * lt / (two::<R>() * self.diffusion())
    }

    pub fn is_free(&self) -> bool {
        self.omega0 == R::zero()
    }

    pub fn is_classical(&self) -> bool {
        self.hbar == R::zero()
    }

    /// Same parameters with ħ = 0; the classical counterpart of any mode.
    pub fn classical(&self) -> Self {
        Self {
            hbar: R::zero(),
            ..*self
        }
    }
}

/// The derived scales of a parameter set, bundled for reporting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScales<R: Real> {
    pub diffusion: R,
    pub lambda_t: R,
    pub t_cross: R,
}

/// D, λ_T and t_cross = λ_T²/(2D) for the given parameters.
pub fn derived_scales<R: Real>(p: &PhysicalParams<R>) -> DerivedScales<R> {
    DerivedScales {
        diffusion: p.diffusion(),
        lambda_t: p.lambda_t(),
        t_cross: p.t_cross(),
    }
}

/// Arrhenius diffusion law D(β) = D₀·exp(−β·E_a).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrheniusModel<R: Real> {
    pub d0: R,
    pub ea: R,
}

impl<R: Real> ArrheniusModel<R> {
    pub fn new(d0: R, ea: R) -> Result<Self> {
        if !(d0 > R::zero()) || !d0.is_finite() {
            return Err(Error::InvalidParam {
                name: "d0",
                reason: format!("must be > 0 and finite, got {d0}"),
            });
        }
        if !(ea > R::zero()) || !ea.is_finite() {
            return Err(Error::InvalidParam {
                name: "ea",
                reason: format!("must be > 0 and finite, got {ea}"),
            });
        }
        Ok(Self { d0, ea })
    }

    /// Activation de Broglie length λ_E = ħ/(2√(m·E_a)).
    pub fn lambda_e(&self, p: &PhysicalParams<R>) -> R {
        p.hbar / (two::<R>() * (p.mass * self.ea).sqrt())
    }
}

/// β-resolved quantities of the Arrhenius model at inverse temperature β.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrheniusScales<R: Real> {
    /// D(β) = D₀·exp(−β·E_a).
    pub diffusion: R,
    /// ζ(β) = 1/(β·D(β)).
    pub friction: R,
    /// λ_E = ħ/(2√(m·E_a)), from the accompanying mass and ħ.
    pub lambda_e: R,
    /// ∂_β(βζ) = E_a/D(β), the analytic derivative of βζ = exp(βE_a)/D₀.
    pub d_beta_beta_zeta: R,
}

/// Evaluates the Arrhenius model at β; errors once exp(β·E_a) would overflow.
pub fn arrhenius_diffusion<R: Real>(
    model: &ArrheniusModel<R>,
    p: &PhysicalParams<R>,
    beta: R,
) -> Result<ArrheniusScales<R>> {
    if !(beta > R::zero()) {
        return Err(Error::InvalidParam {
            name: "beta",
            reason: format!("must be > 0, got {beta}"),
        });
    }
    if beta * model.ea > cst(700.0) {
        return Err(Error::Overflow(format!(
            "arrhenius_diffusion: beta*Ea = {} exceeds 700",
            beta * model.ea
        )));
    }
    let diffusion = model.d0 * (-beta * model.ea).exp();
    Ok(ArrheniusScales {
        diffusion,
        friction: (beta * diffusion).recip(),
        lambda_e: model.lambda_e(p),
        d_beta_beta_zeta: model.ea / diffusion,
    })
}

/// External potential V(x) with analytic or finite-difference derivatives.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential<R: Real> {
    /// V(x) = Σ cᵢ xⁱ with degree ≤ 8; derivatives are exact.
    Polynomial {
        coeffs: Vec<R>,
        x_lo: R,
        x_hi: R,
    },
    /// Uniform-grid samples; derivatives by second-order central differences
    /// (one-sided second-order stencils at the edges), interpolated linearly
    /// between nodes.
    Tabulated {
        x_lo: R,
        x_hi: R,
        values: Vec<R>,
        deriv1: Vec<R>,
        deriv2: Vec<R>,
        deriv3: Vec<R>,
    },
}

const MAX_POLY_DEGREE: usize = 8;
const MIN_TABLE_SAMPLES: usize = 9;

impl<R: Real> Potential<R> {
    pub fn polynomial(coeffs: Vec<R>, x_lo: R, x_hi: R) -> Result<Self> {
        if coeffs.is_empty() || coeffs.len() > MAX_POLY_DEGREE + 1 {
            return Err(Error::InvalidParam {
                name: "potential.coeffs",
                reason: format!(
                    "need 1..={} coefficients (degree <= {MAX_POLY_DEGREE}), got {}",
                    MAX_POLY_DEGREE + 1,
                    coeffs.len()
                ),
            });
        }
        check_domain(x_lo, x_hi)?;
        Ok(Self::Polynomial { coeffs, x_lo, x_hi })
    }

    /// Harmonic well ½mω₀²x², the workhorse test potential.
    pub fn harmonic(mass: R, omega0: R, x_lo: R, x_hi: R) -> Result<Self> {
        let half = R::one() / two::<R>();
        Self::polynomial(
            vec![R::zero(), R::zero(), half * mass * omega0 * omega0],
            x_lo,
            x_hi,
        )
    }

    pub fn tabulated(x_lo: R, x_hi: R, values: Vec<R>) -> Result<Self> {
        if values.len() < MIN_TABLE_SAMPLES {
            return Err(Error::InvalidParam {
                name: "potential.samples",
                reason: format!(
                    "need at least {MIN_TABLE_SAMPLES} samples, got {}",
                    values.len()
                ),
            });
        }
        check_domain(x_lo, x_hi)?;
        let h = (x_hi - x_lo) / R::from_usize(values.len() - 1).unwrap();
        let deriv1 = fd_derivative(&values, h);
        let deriv2 = fd_derivative(&deriv1, h);
        let deriv3 = fd_derivative(&deriv2, h);
        Ok(Self::Tabulated {
            x_lo,
            x_hi,
            values,
            deriv1,
            deriv2,
            deriv3,
        })
    }

    pub fn domain(&self) -> (R, R) {
        match self {
            Self::Polynomial { x_lo, x_hi, .. } => (*x_lo, *x_hi),
            Self::Tabulated { x_lo, x_hi, .. } => (*x_lo, *x_hi),
        }
    }

    /// True when V‴ comes from exact differentiation rather than an extra
    /// finite difference of the V″ table.
    pub fn has_exact_derivatives(&self) -> bool {
        matches!(self, Self::Polynomial { .. })
    }

    pub fn value(&self, x: R) -> Result<R> {
        self.eval(x, 0)
    }

    pub fn first_derivative(&self, x: R) -> Result<R> {
        self.eval(x, 1)
    }

    pub fn second_derivative(&self, x: R) -> Result<R> {
        self.eval(x, 2)
    }

    pub fn third_derivative(&self, x: R) -> Result<R> {
        self.eval(x, 3)
    }

    fn eval(&self, x: R, order: usize) -> Result<R> {
        match self {
            Self::Polynomial { coeffs, .. } => {
                let mut c = coeffs.clone();
                for _ in 0..order {
                    c = differentiate_coeffs(&c);
                }
                Ok(horner(&c, x))
            }
            Self::Tabulated {
                x_lo,
                x_hi,
                values,
                deriv1,
                deriv2,
                deriv3,
            } => {
                let table = match order {
                    0 => values,
                    1 => deriv1,
                    2 => deriv2,
                    3 => deriv3,
                    _ => unreachable!(),
                };
                interp_linear(*x_lo, *x_hi, table, x)
            }
        }
    }
}

fn check_domain<R: Real>(x_lo: R, x_hi: R) -> Result<()> {
    if !(x_hi > x_lo) || !x_lo.is_finite() || !x_hi.is_finite() {
        return Err(Error::InvalidParam {
            name: "potential.domain",
            reason: format!("need finite x_lo < x_hi, got [{x_lo}, {x_hi}]"),
        });
    }
    Ok(())
}

fn horner<R: Real>(coeffs: &[R], x: R) -> R {
    coeffs
        .iter()
        .rev()
        .fold(R::zero(), |acc, &c| acc * x + c)
}

fn differentiate_coeffs<R: Real>(coeffs: &[R]) -> Vec<R> {
    if coeffs.len() <= 1 {
        return vec![R::zero()];
    }
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| c * R::from_usize(i).unwrap())
        .collect()
}

/// Second-order finite-difference derivative of a uniform table: central in
/// the interior, one-sided three-point stencils at the edges.
fn fd_derivative<R: Real>(values: &[R], h: R) -> Vec<R> {
    let n = values.len();
    let mut out = vec![R::zero(); n];
    let two_h = two::<R>() * h;
    let three: R = cst(3.0);
    let four: R = cst(4.0);
    out[0] = (-three * values[0] + four * values[1] - values[2]) / two_h;
    out[n - 1] = (three * values[n - 1] - four * values[n - 2] + values[n - 3]) / two_h;
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) / two_h;
    }
    out
}

fn interp_linear<R: Real>(x_lo: R, x_hi: R, table: &[R], x: R) -> Result<R> {
    let slack = cst::<R>(1e-12) * (x_hi - x_lo);
    if x < x_lo - slack || x > x_hi + slack {
        return Err(Error::Domain(format!(
            "x = {x} outside the tabulated domain [{x_lo}, {x_hi}]"
        )));
    }
    let n = table.len();
    let h = (x_hi - x_lo) / R::from_usize(n - 1).unwrap();
    let s = ((x - x_lo) / h).max(R::zero());
    let i = s
        .floor()
        .to_usize()
        .unwrap_or(0)
        .min(n - 2);
    let frac = s - R::from_usize(i).unwrap();
    Ok(table[i] + (table[i + 1] - table[i]) * frac.min(R::one()))
}
