//! Moment constraints of WkN structures and the leading pole data they
//! induce at marked points.

use serde::{Deserialize, Serialize};

use super::jet::{BiJet, MatrixBiJet};
use crate::algebra::{SquareMatrix, C64};
use crate::error::{Error, Result};

/// `W_j = k tr(A^j) / (N j)` for `j = 2..=k`.
pub fn wk_constraint_values(a: &MatrixBiJet, n: usize, k: usize) -> Result<Vec<BiJet>> {
    if k < 2 || n == 0 {
        return Err(Error::InvalidArgument(format!("need k >= 2 and N >= 1, got k = {k}, N = {n}")));
    }
    let mut power = a.clone();
    let mut out = Vec::with_capacity(k - 1);
    for j in 2..=k {
        power = &power * a;
        out.push(power.trace().scale_real(k as f64 / (n * j) as f64));
    }
    Ok(out)
}

/// Leading coefficients at a marked point: `T_{-2}` and, at level 3, `W_{-3}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleCoefficients {
    #[serde(with = "crate::algebra::complex_pair")]
    pub t_minus2: C64,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "option_pair")]
    pub w_minus3: Option<C64>,
}

mod option_pair {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(c: &Option<C64>, s: S) -> Result<S::Ok, S::Error> {
        c.map(|c| [c.re, c.im]).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<C64>, D::Error> {
        Ok(Option::<[f64; 2]>::deserialize(d)?.map(|[re, im]| C64::new(re, im)))
    }
}

/// Pole coefficients forced by a residue `p`: at level 2
/// `T_{-2} = tr(p^2) / N`; at level 3 `T_{-2} = 3 tr(p^2) / N` and
/// `W_{-3} = (tr(p^3) - 3 kappa tr(p^2)) / N`.
pub fn expected_pole_coefficients(p: &SquareMatrix, kappa: C64, level: usize) -> Result<PoleCoefficients> {
    let n = p.dim() as f64;
    let p2 = p * p;
    let tr2 = p2.trace();
    match level {
        2 => Ok(PoleCoefficients {
            t_minus2: tr2 / n,
            w_minus3: None,
        }),
        3 => Ok(PoleCoefficients {
            t_minus2: tr2 * 3.0 / n,
            w_minus3: Some(((&p2 * p).trace() - kappa * tr2 * 3.0) / n),
        }),
        _ => Err(Error::InvalidArgument(format!("level must be 2 or 3, got {level}"))),
    }
}

/// Largest deviation of declared pole coefficients from the ones forced by
/// the residue.
pub fn pole_metadata_residual(declared: &PoleCoefficients, p: &SquareMatrix, kappa: C64, level: usize) -> Result<f64> {
    let expect = expected_pole_coefficients(p, kappa, level)?;
    let w = match (declared.w_minus3, expect.w_minus3) {
        (Some(a), Some(b)) => (a - b).norm(),
        (None, None) => 0.0,
        _ => return Err(Error::InvalidArgument("W_{-3} is declared exactly at level 3".into())),
    };
    Ok((declared.t_minus2 - expect.t_minus2).norm().max(w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ZERO;

    fn sample_a() -> MatrixBiJet {
        let p = C64::new(0.2, -0.1);
        MatrixBiJet::from_fn(2, |i, j| {
            BiJet::from_fn(p, 6, 2, |a, b| C64::new((i + 2 * j) as f64 * 0.3 - 0.4 + 0.1 * a as f64, 0.2 * b as f64 - 0.1 * i as f64))
        })
        .unwrap()
    }

    #[test]
    fn sugawara_at_level_two() {
        let a = sample_a();
        let w = wk_constraint_values(&a, 2, 2).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0], (&a * &a).trace().scale_real(0.5));
    }

    #[test]
    fn level_three_constraints() {
        let a = sample_a();
        let w = wk_constraint_values(&a, 2, 3).unwrap();
        let a2 = &a * &a;
        assert_eq!(w[0], a2.trace().scale_real(3.0 / 4.0));
        assert_eq!(w[1], (&a2 * &a).trace().scale_real(0.5));
    }

    #[test]
    fn zero_field_has_zero_constraints() {
        let z = MatrixBiJet::zeros(3, &BiJet::zero(ZERO, 6, 2));
        for w in wk_constraint_values(&z, 3, 5).unwrap() {
            assert_eq!(w.max_valid_abs().unwrap(), 0.0);
        }
        assert!(wk_constraint_values(&z, 3, 1).is_err());
    }

    #[test]
    fn pole_data() {
        let p = SquareMatrix::from_diagonal(&[C64::new(0.5, 0.0), C64::new(-0.5, 0.0)]);
        let k = C64::new(2.0, 0.0);
        let e2 = expected_pole_coefficients(&p, k, 2).unwrap();
        assert_eq!(e2.t_minus2, C64::new(0.25, 0.0));
        let e3 = expected_pole_coefficients(&p, k, 3).unwrap();
        assert_eq!(e3.t_minus2, C64::new(0.75, 0.0));
        // tr p^3 = 0, tr p^2 = 1/2.
        assert_eq!(e3.w_minus3, Some(C64::new(-1.5, 0.0)));
        assert_eq!(pole_metadata_residual(&e3, &p, k, 3).unwrap(), 0.0);
        let bad = PoleCoefficients {
            t_minus2: C64::new(0.8, 0.0),
            ..e3
        };
        assert!((pole_metadata_residual(&bad, &p, k, 3).unwrap() - 0.05).abs() < 1e-15);
        assert!(pole_metadata_residual(&e2, &p, k, 3).is_err());
    }
}
