use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    ConfigSpace, DiscreteLagrangian, DiscreteQuadraticField, Domain, LagrangianSystem, Monomial,
    PolynomialField, QuadraticLagrangianField, QuarticKineticField, System, VelocityGuess,
};
use crate::error::{Error, Result};

/// Velocities below this are outside the domain of `quartic_kinetic`.
pub const QUARTIC_MIN_SPEED: f64 = 1e-3;

/// Harmonic-type systems refuse times beyond this fraction of the first
/// conjugate time `π/ω`.
pub const HORIZON_FRACTION: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpecKind {
    Builtin,
    Polynomial,
}

/// Declarative system description, the contents of a system-spec file.
///
/// Polynomial systems are named `lagrangian` (variables `(q, q̇)`) or
/// `discrete` (variables `(q0, q1)`); each parameter `c_e1_..._e2n` is the
/// coefficient of the monomial with those exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub kind: SpecKind,
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periodic: Option<Vec<bool>>,
}

fn default_dimension() -> usize {
    1
}

impl SystemSpec {
    pub fn builtin(name: &str, params: &[(&str, f64)]) -> Self {
        Self {
            kind: SpecKind::Builtin,
            name: name.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            dimension: 1,
            periodic: None,
        }
    }

    pub fn with_dimension(mut self, dimension: usize) -> Self {
        self.dimension = dimension;
        self
    }

    pub fn with_periodic(mut self, periodic: Vec<bool>) -> Self {
        self.periodic = Some(periodic);
        self
    }

    /// `name(k=v,...)` with parameters in key order.
    pub fn display_name(&self) -> String {
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let base = match self.kind {
            SpecKind::Builtin => self.name.clone(),
            SpecKind::Polynomial => format!("polynomial:{}", self.name),
        };
        if params.is_empty() {
            base
        } else {
            format!("{base}({})", params.join(","))
        }
    }

    /// Fill defaults and validate against the catalog.
    pub fn validated(mut self) -> Result<Self> {
        if self.dimension == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if let Some(p) = &self.periodic {
            if p.len() != self.dimension {
                return Err(Error::DimensionMismatch {
                    expected: self.dimension,
                    got: p.len(),
                });
            }
        }
        match self.kind {
            SpecKind::Builtin => {
                let entry = catalog()
                    .iter()
                    .find(|e| e.name == self.name)
                    .ok_or_else(|| Error::UnknownSystem(self.name.clone()))?;
                if let Some(k) = self.params.keys().find(|k| !entry.params.iter().any(|(p, _)| p == k)) {
                    return Err(Error::InvalidParameter {
                        name: k.clone(),
                        value: self.params[k],
                        reason: "not a parameter of this system",
                    });
                }
                for (k, v) in entry.params {
                    self.params.entry(k.to_string()).or_insert(*v);
                }
                for (k, &v) in &self.params {
                    if !v.is_finite() {
                        return Err(Error::InvalidParameter { name: k.clone(), value: v, reason: "must be finite" });
                    }
                    if matches!(k.as_str(), "mass" | "h" | "omega") && v <= 0.0 {
                        return Err(Error::InvalidParameter { name: k.clone(), value: v, reason: "must be positive" });
                    }
                }
            }
            SpecKind::Polynomial => {
                if !matches!(self.name.as_str(), "lagrangian" | "discrete") {
                    return Err(Error::UnknownSystem(format!("polynomial:{}", self.name)));
                }
                monomials(&self.params, 2 * self.dimension)?;
            }
        }
        Ok(self)
    }
}

fn monomials(params: &BTreeMap<String, f64>, vars: usize) -> Result<Vec<Monomial>> {
    params
        .iter()
        .map(|(key, &coefficient)| {
            let bad = || Error::InvalidParameter {
                name: key.clone(),
                value: coefficient,
                reason: "expected c_<e1>_..._<e2n> with one exponent per variable",
            };
            let rest = key.strip_prefix("c_").ok_or_else(bad)?;
            let exponents = rest
                .split('_')
                .map(|e| e.parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| bad())?;
            if exponents.len() != vars || !coefficient.is_finite() {
                return Err(bad());
            }
            Ok(Monomial { coefficient, exponents })
        })
        .collect()
}

/// Parse and validate a system-spec document.
pub fn parse_system_spec(text: &str) -> Result<SystemSpec> {
    let spec: SystemSpec = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    spec.validated()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CatalogKind {
    Continuous,
    Discrete,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub kind: CatalogKind,
    /// Parameter names with their defaults.
    pub params: &'static [(&'static str, f64)],
    pub formula: &'static str,
}

pub fn catalog() -> &'static [CatalogEntry] {
    const ENTRIES: &[CatalogEntry] = &[
        CatalogEntry {
            name: "free_particle",
            kind: CatalogKind::Continuous,
            params: &[("mass", 1.0)],
            formula: "L = m|qdot|^2/2",
        },
        CatalogEntry {
            name: "harmonic",
            kind: CatalogKind::Continuous,
            params: &[("mass", 1.0), ("omega", 1.0)],
            formula: "L = m|qdot|^2/2 - m omega^2 |q|^2/2",
        },
        CatalogEntry {
            name: "quartic_kinetic",
            kind: CatalogKind::Continuous,
            params: &[],
            formula: "L = (3/4) sum |qdot_i|^(4/3), |qdot_i| >= 1e-3",
        },
        CatalogEntry {
            name: "discrete_quadratic",
            kind: CatalogKind::Discrete,
            params: &[("h", 1.0)],
            formula: "Lambda = |q1 - q0|^2/(2h)",
        },
        CatalogEntry {
            name: "discrete_kicked",
            kind: CatalogKind::Discrete,
            params: &[("h", 1.0), ("K", 0.3)],
            formula: "Lambda = |q1 - q0|^2/(2h) + K sum cos(q1_i)",
        },
    ];
    ENTRIES
}

/// Build a fully wired system from a spec.
pub fn catalog_lookup(spec: &SystemSpec) -> Result<System> {
    let spec = spec.clone().validated()?;
    let n = spec.dimension;
    let periodic = spec.periodic.clone().unwrap_or_else(|| vec![false; n]);
    let space = ConfigSpace::with_periodic(periodic.clone())?;
    let name = spec.display_name();
    let p = |k: &str| spec.params[k];

    let system = match (spec.kind, spec.name.as_str()) {
        (SpecKind::Builtin, "free_particle") => System::Continuous(LagrangianSystem::new(
            name,
            space,
            Arc::new(QuadraticLagrangianField::new(n, p("mass"), 0.0)),
        )?),
        (SpecKind::Builtin, "harmonic") => System::Continuous(
            LagrangianSystem::new(
                name,
                space,
                Arc::new(QuadraticLagrangianField::new(n, p("mass"), p("omega"))),
            )?
            .with_horizon(HORIZON_FRACTION * PI / p("omega")),
        ),
        (SpecKind::Builtin, "quartic_kinetic") => System::Continuous(
            LagrangianSystem::new(name, space, Arc::new(QuarticKineticField::new(n)))?
                .with_domain(Domain::MinAbsVelocity(QUARTIC_MIN_SPEED))
                .with_velocity_guess(VelocityGuess::Momentum),
        ),
        (SpecKind::Builtin, "discrete_quadratic") => System::Discrete(DiscreteLagrangian::new(
            name,
            space,
            Arc::new(DiscreteQuadraticField::new(periodic, p("h"), 0.0)),
        )?),
        (SpecKind::Builtin, "discrete_kicked") => System::Discrete(DiscreteLagrangian::new(
            name,
            space,
            Arc::new(DiscreteQuadraticField::new(periodic, p("h"), p("K"))),
        )?),
        (SpecKind::Polynomial, kind) => {
            let field = PolynomialField::new(2 * n, monomials(&spec.params, 2 * n)?)
                .expect("exponent arity checked by monomials");
            if kind == "lagrangian" {
                System::Continuous(LagrangianSystem::new(name, space, Arc::new(field))?)
            } else {
                System::Discrete(DiscreteLagrangian::new(name, space, Arc::new(field))?)
            }
        }
        (SpecKind::Builtin, other) => return Err(Error::UnknownSystem(other.to_string())),
    };
    Ok(system)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lagrangian(spec: SystemSpec) -> LagrangianSystem {
        catalog_lookup(&spec).unwrap().into_continuous().unwrap()
    }

    #[test]
    fn free_particle_value() {
        let l = lagrangian(SystemSpec::builtin("free_particle", &[("mass", 1.0)]));
        assert_eq!(l.eval(&[0.0], &[2.0]), 2.0);
    }

    #[test]
    fn harmonic_value() {
        let l = lagrangian(SystemSpec::builtin("harmonic", &[("mass", 1.0), ("omega", 1.0)]));
        assert_eq!(l.eval(&[1.0], &[0.0]), -0.5);
        assert!((l.horizon().unwrap() - 0.9 * PI).abs() < 1e-15);
    }

    #[test]
    fn discrete_quadratic_value() {
        let s = catalog_lookup(&SystemSpec::builtin("discrete_quadratic", &[("h", 0.5)]))
            .unwrap()
            .into_discrete()
            .unwrap();
        assert_eq!(s.eval(&[0.0], &[1.0]), 1.0);
    }

    #[test]
    fn parse_builtin() {
        let s = parse_system_spec(r#"{"kind":"builtin","name":"free_particle","params":{"mass":2.0},"dimension":1}"#)
            .unwrap();
        assert_eq!(s.kind, SpecKind::Builtin);
        assert_eq!(s.name, "free_particle");
        assert_eq!(s.params["mass"], 2.0);
        assert_eq!(s.dimension, 1);
    }

    #[test]
    fn parse_applies_defaults() {
        let s = parse_system_spec(r#"{"kind":"builtin","name":"harmonic","dimension":1}"#).unwrap();
        assert_eq!(s.params["mass"], 1.0);
        assert_eq!(s.params["omega"], 1.0);
    }

    #[test]
    fn missing_name_is_parse_error() {
        let err = parse_system_spec("{\n  \"kind\": \"builtin\",\n  \"dimension\": 1\n}").unwrap_err();
        match err {
            Error::Parse { line, message, .. } => {
                assert!(line >= 1);
                assert!(message.contains("name"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_field_rejected() {
        let err = parse_system_spec(r#"{"kind":"builtin","name":"harmonic","colour":"red"}"#).unwrap_err();
        assert!(matches!(err, Error::Parse { ref message, .. } if message.contains("colour")));
    }

    #[test]
    fn invalid_parameters() {
        for text in [
            r#"{"kind":"builtin","name":"free_particle","params":{"mass":0}}"#,
            r#"{"kind":"builtin","name":"discrete_quadratic","params":{"h":-1}}"#,
            r#"{"kind":"builtin","name":"free_particle","params":{"omega":1}}"#,
        ] {
            assert!(matches!(parse_system_spec(text), Err(Error::InvalidParameter { .. })), "{text}");
        }
        assert!(matches!(
            parse_system_spec(r#"{"kind":"builtin","name":"pendulum"}"#),
            Err(Error::UnknownSystem(_))
        ));
    }

    #[test]
    fn polynomial_lagrangian() {
        let s = parse_system_spec(
            r#"{"kind":"polynomial","name":"lagrangian","params":{"c_0_2":0.5,"c_2_0":-0.5},"dimension":1}"#,
        )
        .unwrap();
        let l = lagrangian(s);
        assert_eq!(l.eval(&[1.0], &[2.0]), 1.5);
        assert!(matches!(
            parse_system_spec(r#"{"kind":"polynomial","name":"lagrangian","params":{"c_2":1.0}}"#),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn periodic_length_checked() {
        let text = r#"{"kind":"builtin","name":"discrete_kicked","dimension":2,"periodic":[true]}"#;
        assert!(matches!(parse_system_spec(text), Err(Error::DimensionMismatch { .. })));
    }
}
