//! Abstract universal boundary system `A u0 + B u1 + C f = θ` and its
//! residual report.
//!
//! An instantiation supplies three linear maps into a common residual
//! space (a grid with quadrature weights) plus scalar compatibility
//! functionals that are not part of the pointwise equation.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Result, UbvpError};
use crate::format::fmt_f64;

/// Where residuals live: sample count and quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSpace {
    pub label: String,
    pub weights: Vec<f64>,
}

impl ResidualSpace {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// A scalar compatibility constraint evaluated on `(u0, u1, f)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Compatibility {
    pub name: String,
    pub value: f64,
}

pub trait UniversalBoundarySystem {
    fn residual_space(&self) -> &ResidualSpace;

    /// Expected lengths of the `u0`, `u1` and `f` arguments.
    fn arg_lens(&self) -> [usize; 3];

    fn apply_a(&self, u0: &[f64]) -> Result<Vec<f64>>;

    fn apply_b(&self, u1: &[f64]) -> Result<Vec<f64>>;

    /// Source-term map; systems without a source accept only zero-length
    /// or all-zero input.
    fn apply_c(&self, f: &[f64]) -> Result<Vec<f64>>;

    fn compatibility(&self, u0: &[f64], u1: &[f64], f: &[f64]) -> Result<Vec<Compatibility>>;
}

/// Residual of one argument triple against a system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    #[serde(skip)]
    pub pointwise: Vec<f64>,
    pub sup_norm: f64,
    pub weighted_l2: f64,
    pub compatibility: Vec<Compatibility>,
    pub tolerance: f64,
    pub consistent: bool,
}

impl ResidualReport {
    pub fn from_parts(pointwise: Vec<f64>, weights: &[f64], compatibility: Vec<Compatibility>, tol: f64) -> Self {
        let sup_norm = pointwise.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let weighted_l2 = pointwise
            .iter()
            .zip(weights)
            .map(|(v, w)| w * v * v)
            .sum::<f64>()
            .sqrt();
        let consistent = sup_norm <= tol && compatibility.iter().all(|c| c.value.abs() <= tol);
        ResidualReport { pointwise, sup_norm, weighted_l2, compatibility, tolerance: tol, consistent }
    }

    /// JSON object with fixed 17-significant-digit float formatting:
    /// `{"sup_norm":…,"weighted_l2":…,"compatibility":[…],"consistent":…}`
    /// plus the tolerance and compatibility names.
    pub fn to_json(&self) -> String {
        let compat: Vec<String> = self.compatibility.iter().map(|c| fmt_f64(c.value)).collect();
        let names: Vec<String> = self
            .compatibility
            .iter()
            .map(|c| serde_json::to_string(&c.name).expect("string serializes"))
            .collect();
        format!(
            "{{\"sup_norm\":{},\"weighted_l2\":{},\"compatibility\":[{}],\"compatibility_names\":[{}],\"tolerance\":{},\"consistent\":{}}}",
            fmt_f64(self.sup_norm),
            fmt_f64(self.weighted_l2),
            compat.join(","),
            names.join(","),
            fmt_f64(self.tolerance),
            self.consistent
        )
    }

    /// `index,value` lines of the pointwise residual.
    pub fn write_pointwise_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "index,value")?;
        for (i, v) in self.pointwise.iter().enumerate() {
            writeln!(out, "{i},{}", fmt_f64(*v))?;
        }
        Ok(())
    }
}

/// Default consistency tolerance `1e-6 (1 + ‖u0‖∞ + ‖u1‖∞)`.
pub fn default_tolerance(u0: &[f64], u1: &[f64]) -> f64 {
    let sup = |v: &[f64]| v.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    1e-6 * (1.0 + sup(u0) + sup(u1))
}

/// `pointwise = A u0 + B u1 + C f`, with norms, compatibility values and a
/// consistency decision against `tol`.
pub fn system_residual<S: UniversalBoundarySystem + ?Sized>(
    sys: &S,
    u0: &[f64],
    u1: &[f64],
    f: &[f64],
    tol: f64,
) -> Result<ResidualReport> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(UbvpError::invalid(format!("tolerance must be positive, got {tol}")));
    }
    let [n0, n1, nf] = sys.arg_lens();
    for (name, got, want) in [("u0", u0.len(), n0), ("u1", u1.len(), n1), ("f", f.len(), nf)] {
        if got != want {
            return Err(UbvpError::invalid(format!("{name} has {got} values, system expects {want}")));
        }
    }
    let mut pointwise = sys.apply_a(u0)?;
    for (r, b) in pointwise.iter_mut().zip(sys.apply_b(u1)?) {
        *r += b;
    }
    if nf > 0 {
        for (r, c) in pointwise.iter_mut().zip(sys.apply_c(f)?) {
            *r += c;
        }
    }
    let compatibility = sys.compatibility(u0, u1, f)?;
    Ok(ResidualReport::from_parts(pointwise, &sys.residual_space().weights, compatibility, tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Toy system on two points: A = I, B = -2 I, no source, one
    /// functional sum(u1).
    struct Toy {
        space: ResidualSpace,
    }

    impl UniversalBoundarySystem for Toy {
        fn residual_space(&self) -> &ResidualSpace {
            &self.space
        }
        fn arg_lens(&self) -> [usize; 3] {
            [2, 2, 0]
        }
        fn apply_a(&self, u0: &[f64]) -> Result<Vec<f64>> {
            Ok(u0.to_vec())
        }
        fn apply_b(&self, u1: &[f64]) -> Result<Vec<f64>> {
            Ok(u1.iter().map(|v| -2.0 * v).collect())
        }
        fn apply_c(&self, _f: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![0.0; 2])
        }
        fn compatibility(&self, _u0: &[f64], u1: &[f64], _f: &[f64]) -> Result<Vec<Compatibility>> {
            Ok(vec![Compatibility { name: "sum".into(), value: u1.iter().sum() }])
        }
    }

    fn toy() -> Toy {
        Toy { space: ResidualSpace { label: "toy".into(), weights: vec![0.5, 0.5] } }
    }

    #[test]
    fn residual_and_consistency() {
        let r = system_residual(&toy(), &[2.0, -2.0], &[1.0, -1.0], &[], 1e-12).unwrap();
        assert!(r.consistent);
        assert_eq!(r.sup_norm, 0.0);
        let r = system_residual(&toy(), &[1.0, 0.0], &[0.0, 0.0], &[], 1e-12).unwrap();
        assert!(!r.consistent);
        assert_eq!(r.sup_norm, 1.0);
        assert!((r.weighted_l2 - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(system_residual(&toy(), &[1.0], &[0.0, 0.0], &[], 1e-12).is_err());
        assert!(system_residual(&toy(), &[1.0, 0.0], &[0.0, 0.0], &[], 0.0).is_err());
    }

    #[test]
    fn json_has_fixed_shape() {
        let r = system_residual(&toy(), &[1.0, 0.0], &[0.5, 0.0], &[], 1e-6).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["consistent"], false);
        assert_eq!(v["compatibility"][0], 0.5);
        assert_eq!(v["sup_norm"], 0.0);
        let mut csv = Vec::new();
        r.write_pointwise_csv(&mut csv).unwrap();
        assert!(String::from_utf8(csv).unwrap().starts_with("index,value\n0,"));
    }
}
