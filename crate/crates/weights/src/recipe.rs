use geometry::DomainGeometry;

use crate::psi::PsiKit;
use crate::WeightsError;

#[derive(Clone, Debug, PartialEq)]
pub struct Clause {
    pub label: &'static str,
    pub value: f64,
}

/// A max- or min-recipe evaluated clause by clause.
#[derive(Clone, Debug, PartialEq)]
pub struct RecipeChoice {
    pub value: f64,
    pub binding: usize,
    pub clauses: Vec<Clause>,
}

impl RecipeChoice {
    fn select(clauses: Vec<Clause>, take_max: bool) -> Self {
        let mut binding = 0;
        for (i, c) in clauses.iter().enumerate() {
            let better = if take_max { c.value > clauses[binding].value } else { c.value < clauses[binding].value };
            if better {
                binding = i;
            }
        }
        Self { value: clauses[binding].value, binding, clauses }
    }

    pub fn binding_label(&self) -> &'static str {
        self.clauses[self.binding].label
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeltaInputs {
    pub delta0: f64,
    /// `C_Omega`; the recipe uses `C'_Omega = 2 C_Omega`.
    pub tangency: f64,
    pub d_omega: f64,
    pub r_omega: f64,
    pub dpsi1_sup: f64,
    pub d2psi1_sup: f64,
}

/// Lower bound for `delta`: the max of five clauses.
pub fn delta_clauses(inp: &DeltaInputs) -> Result<RecipeChoice, WeightsError> {
    let d0 = inp.delta0;
    if !(d0 > 0.0) {
        return Err(WeightsError::InvalidKit(format!("gradient floor delta_0 must be positive, got {d0}")));
    }
    let c_prime = 2.0 * inp.tangency;
    let choice = RecipeChoice::select(
        vec![
            Clause { label: "1", value: 1.0 },
            Clause { label: "2C'/delta0", value: 2.0 * c_prime / d0 },
            Clause { label: "24 D R^2/delta0^2", value: 24.0 * inp.d_omega * inp.r_omega.powi(2) / (d0 * d0) },
            Clause { label: "2/delta0", value: 2.0 / d0 },
            Clause {
                label: "(1+4D+|Dpsi1|+2|D2psi1|)/delta0^2",
                value: (1.0 + 4.0 * inp.d_omega + inp.dpsi1_sup + 2.0 * inp.d2psi1_sup) / (d0 * d0),
            },
        ],
        true,
    );
    if inp.tangency > 0.0 && !(choice.value * d0 > 2.0 * inp.tangency) {
        return Err(WeightsError::InvalidKit(format!(
            "delta delta_0 = {} does not exceed 2 C_Omega = {}",
            choice.value * d0,
            2.0 * inp.tangency
        )));
    }
    Ok(choice)
}

/// Recipe value of `delta` for a kit, using the geometry's padded constants.
pub fn choose_delta(kit: &PsiKit, geometry: &DomainGeometry) -> Result<f64, WeightsError> {
    Ok(delta_clauses(&DeltaInputs {
        delta0: kit.delta0(),
        tangency: geometry.tangency_constant(),
        d_omega: kit.d_omega(),
        r_omega: geometry.r_omega(),
        dpsi1_sup: kit.dpsi1_sup(),
        d2psi1_sup: kit.d2psi1_sup(),
    })?
    .value)
}

#[derive(Clone, Debug, PartialEq)]
pub struct R0Inputs {
    pub dpsi_sup: f64,
    pub d2psi_sup: f64,
    pub psi_sup: f64,
    pub gamma: f64,
    pub mu: f64,
    pub c3: f64,
    pub d_omega: f64,
    pub delta0: f64,
    pub beta0: f64,
}

impl R0Inputs {
    pub fn from_kit(kit: &PsiKit, gamma: f64, mu: f64, c3: f64) -> Self {
        Self {
            dpsi_sup: kit.dpsi_sup(),
            d2psi_sup: kit.d2psi_sup(),
            psi_sup: kit.psi_sup(),
            gamma,
            mu,
            c3,
            d_omega: kit.d_omega(),
            delta0: kit.delta0(),
            beta0: kit.collar(),
        }
    }
}

fn finite_or_inf(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Upper bound for `r_0`: the min of eleven clauses. Clauses that divide by
/// zero (for instance `mu = 0`) are `+inf`.
pub fn r0_clauses(inp: &R0Inputs) -> Result<RecipeChoice, WeightsError> {
    let g = inp.gamma;
    if !(g > 1.0 && g < 2.0) {
        return Err(WeightsError::InvalidGamma(g));
    }
    if !(inp.c3 > 0.0) {
        return Err(WeightsError::InvalidConstant(format!("C_3 must be positive, got {}", inp.c3)));
    }
    let (a, b, p) = (inp.dpsi_sup, inp.d2psi_sup, inp.psi_sup);
    let e = 1.0 / (g - 1.0);
    let raw = [
        ("1", 1.0),
        ("beta0/2", inp.beta0 / 2.0),
        ("1/((2-gamma)(|Dpsi|+|D2psi|))", 1.0 / ((2.0 - g) * (a + b))),
        ("1/sqrt(2(3|Dpsi|^2+|D2psi|))", 1.0 / (2.0 * (3.0 * a * a + b)).sqrt()),
        ("1/(|Dpsi| sqrt(8|psi|^2+2))", 1.0 / (a * (8.0 * p * p + 2.0).sqrt())),
        ("(C3/(8|Dpsi|^2+8|D2psi|))^(1/(gamma-1))", (inp.c3 / (8.0 * a * a + 8.0 * b)).powf(e)),
        ("(C3/(|mu||Dpsi|))^(1/(gamma-1))", (inp.c3 / (inp.mu.abs() * a)).powf(e)),
        ("1/sqrt(3|Dpsi|)", 1.0 / (3.0 * a).sqrt()),
        ("1/(2|psi||Dpsi|)", 1.0 / (2.0 * p * a)),
        ("1/sqrt(8D|Dpsi|/delta0+3|D2psi|)", 1.0 / (8.0 * inp.d_omega * a / inp.delta0 + 3.0 * b).sqrt()),
        ("2/(4|Dpsi|+|D2psi|)", 2.0 / (4.0 * a + b)),
    ];
    let choice = RecipeChoice::select(raw.iter().map(|&(label, v)| Clause { label, value: finite_or_inf(v) }).collect(), false);
    if !(choice.value > 0.0) {
        return Err(WeightsError::Overflow(format!("r0 clause `{}` underflows to zero", choice.binding_label())));
    }
    Ok(choice)
}

pub fn choose_r0(inp: &R0Inputs) -> Result<f64, WeightsError> {
    Ok(r0_clauses(inp)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_delta() -> DeltaInputs {
        DeltaInputs { delta0: 1.0, tangency: 0.0, d_omega: 0.0, r_omega: 1.0, dpsi1_sup: 1.0, d2psi1_sup: 0.0 }
    }

    #[test]
    fn delta_trivial_clauses() {
        let c = delta_clauses(&unit_delta()).unwrap();
        let v: Vec<f64> = c.clauses.iter().map(|c| c.value).collect();
        assert_eq!(v, vec![1.0, 0.0, 0.0, 2.0, 2.0]);
        assert_eq!(c.value, 2.0);
    }

    #[test]
    fn delta_each_clause_can_bind() {
        let base = DeltaInputs { delta0: 1.0, tangency: 0.0, d_omega: 0.0, r_omega: 1.0, dpsi1_sup: 0.0, d2psi1_sup: 0.0 };
        let mut i = base.clone();
        i.delta0 = 4.0;
        assert_eq!(delta_clauses(&i).unwrap().binding, 0);
        let mut i = base.clone();
        i.tangency = 10.0;
        assert_eq!(delta_clauses(&i).unwrap().value, 40.0);
        let mut i = base.clone();
        i.d_omega = 1.0;
        i.r_omega = 2.0;
        assert_eq!(delta_clauses(&i).unwrap().value, 96.0);
        assert_eq!(delta_clauses(&base).unwrap().value, 2.0);
        let mut i = base;
        i.d2psi1_sup = 5.0;
        assert_eq!(delta_clauses(&i).unwrap().value, 11.0);
    }

    #[test]
    fn delta_rejects_nonpositive_floor() {
        let mut i = unit_delta();
        i.delta0 = 0.0;
        assert!(matches!(delta_clauses(&i), Err(WeightsError::InvalidKit(_))));
    }

    #[test]
    fn delta_interval_hand_evaluation() {
        let i = DeltaInputs { delta0: 0.5, tangency: 1.1, d_omega: 2.0, r_omega: 1.0, dpsi1_sup: 3.0, d2psi1_sup: 7.0 };
        let hand = [1.0f64, 2.0 * 2.2 / 0.5, 24.0 * 2.0 / 0.25, 4.0, (1.0 + 8.0 + 3.0 + 14.0) / 0.25];
        let c = delta_clauses(&i).unwrap();
        for (cl, h) in c.clauses.iter().zip(hand) {
            assert!((cl.value - h).abs() < 1e-12);
        }
        assert_eq!(c.value, 192.0);
        assert!(c.value * i.delta0 > 2.0 * i.tangency);
    }

    fn slack_r0() -> R0Inputs {
        R0Inputs { dpsi_sup: 1e-3, d2psi_sup: 1e-3, psi_sup: 1e-3, gamma: 1.5, mu: 0.0, c3: 1e6, d_omega: 0.0, delta0: 1.0, beta0: 2.0 }
    }

    #[test]
    fn r0_beta_binds() {
        let mut i = slack_r0();
        i.beta0 = 0.1;
        let c = r0_clauses(&i).unwrap();
        assert_eq!(c.value, 0.05);
        assert_eq!(c.binding_label(), "beta0/2");
    }

    #[test]
    fn r0_mu_zero_clause_is_infinite() {
        let c = r0_clauses(&slack_r0()).unwrap();
        assert_eq!(c.clauses[6].value, f64::INFINITY);
        assert_eq!(c.value, 1.0);
    }

    #[test]
    fn r0_unit_norms_clause_by_clause() {
        let i =
            R0Inputs { dpsi_sup: 1.0, d2psi_sup: 1.0, psi_sup: 1.0, gamma: 1.5, mu: 0.0, c3: 1e3, d_omega: 0.5, delta0: 1.0, beta0: 2.0 };
        let hand = [
            1.0,
            1.0,
            1.0 / (0.5 * 2.0),
            1.0 / 8f64.sqrt(),
            1.0 / 10f64.sqrt(),
            (1e3f64 / 16.0).powi(2),
            f64::INFINITY,
            1.0 / 3f64.sqrt(),
            0.5,
            1.0 / 7f64.sqrt(),
            0.4,
        ];
        let c = r0_clauses(&i).unwrap();
        for (k, (cl, h)) in c.clauses.iter().zip(hand).enumerate() {
            assert!(cl.value == h || (cl.value - h).abs() < 1e-12, "clause {k}");
        }
        assert!((c.value - 1.0 / 10f64.sqrt()).abs() < 1e-15);
        assert_eq!(c.binding, 4);
    }

    #[test]
    fn r0_rejects_bad_inputs() {
        let mut i = slack_r0();
        i.gamma = 2.0;
        assert!(matches!(r0_clauses(&i), Err(WeightsError::InvalidGamma(_))));
        let mut i = slack_r0();
        i.c3 = 0.0;
        assert!(matches!(r0_clauses(&i), Err(WeightsError::InvalidConstant(_))));
    }

    proptest! {
        #[test]
        fn delta_is_max_of_clauses(d0 in 0.01f64..2.0, c in 0.0f64..3.0, d in 0.0f64..3.0, r in 0.1f64..3.0, a in 0.0f64..3.0, b in 0.0f64..30.0) {
            let i = DeltaInputs { delta0: d0, tangency: c, d_omega: d, r_omega: r, dpsi1_sup: a, d2psi1_sup: b };
            let ch = delta_clauses(&i).unwrap();
            let m = ch.clauses.iter().map(|c| c.value).fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(ch.value, m);
            prop_assert!(ch.value * d0 > 2.0 * c || c == 0.0);
        }

        #[test]
        fn delta_scaling_is_monotone(d0 in 0.05f64..2.0, c in 0.0f64..3.0, d in 0.0f64..3.0, a in 0.0f64..3.0, b in 0.0f64..30.0) {
            let i = DeltaInputs { delta0: d0, tangency: c, d_omega: d, r_omega: 1.0, dpsi1_sup: a, d2psi1_sup: b };
            let j = DeltaInputs { delta0: d0 / 2.0, tangency: 4.0 * c, d_omega: 4.0 * d, r_omega: 1.0, dpsi1_sup: 4.0 * a, d2psi1_sup: 4.0 * b };
            let (ci, cj) = (delta_clauses(&i).unwrap(), delta_clauses(&j).unwrap());
            prop_assert!((cj.clauses[1].value - 8.0 * ci.clauses[1].value).abs() <= 1e-9 * (1.0 + cj.clauses[1].value));
            prop_assert!((cj.clauses[2].value - 16.0 * ci.clauses[2].value).abs() <= 1e-9 * (1.0 + cj.clauses[2].value));
            prop_assert!(cj.value >= ci.value);
        }

        #[test]
        fn r0_is_min_of_clauses(a in 0.0f64..50.0, b in 0.0f64..500.0, p in 0.0f64..50.0, g in 1.01f64..1.99, mu in -1.0f64..1.0, c3 in 1e-3f64..10.0, d in 0.0f64..5.0, d0 in 0.1f64..1.0, beta in 0.01f64..2.0) {
            let i = R0Inputs { dpsi_sup: a, d2psi_sup: b, psi_sup: p, gamma: g, mu, c3, d_omega: d, delta0: d0, beta0: beta };
            let ch = match r0_clauses(&i) {
                Err(WeightsError::Overflow(_)) => {
                    prop_assert!((i.c3 / (8.0 * a * a + 8.0 * b)).powf(1.0 / (g - 1.0)) == 0.0 || (i.c3 / (mu.abs() * a)).powf(1.0 / (g - 1.0)) == 0.0);
                    return Ok(());
                }
                other => other.unwrap(),
            };
            let m = ch.clauses.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
            prop_assert_eq!(ch.value, m);
            prop_assert!(ch.value > 0.0 && ch.value <= 1.0);
        }
    }
}
