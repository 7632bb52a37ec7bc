//! Analytic C² scalar fields on the plane, compact domains, grids and the built-in catalog.
//!
//! Every field is evaluated through a [`Jet`], so value, gradient and Hessian come from the
//! same closed-form expression and the Hessian is symmetric by construction.

mod domain;
mod jet;

pub use domain::{Domain, Grid};
pub use jet::Jet;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geom::Point;

/// A field description. This is also the JSON schema accepted by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FieldSpec {
    Zero,
    /// `a·x₁ + b·x₂ + c`.
    Affine {
        a: f64,
        b: f64,
        c: f64,
    },
    /// `amplitude·(1 − |x−center|²/radius²)³` inside the disk, 0 outside.
    Bump {
        center: Point,
        radius: f64,
        amplitude: f64,
    },
    /// The bump times `1 + depth·sin(frequency·d₁)·sin(frequency·d₂)`, `d = x − center`.
    ModulatedBump {
        center: Point,
        radius: f64,
        amplitude: f64,
        #[serde(default = "default_frequency")]
        frequency: f64,
        #[serde(default = "default_depth")]
        depth: f64,
    },
    /// `2cos(0.6(0.5x³ − y²)) − (y+4)(x²+y−4)`.
    PaperFigure,
    Sum {
        terms: Vec<FieldSpec>,
    },
    Scaled {
        factor: f64,
        field: Box<FieldSpec>,
    },
    /// `field(x − offset)`.
    Translated {
        offset: Point,
        field: Box<FieldSpec>,
    },
}

fn default_frequency() -> f64 {
    5.0
}

fn default_depth() -> f64 {
    0.5
}

impl FieldSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|v| v.is_finite());
        match self {
            FieldSpec::Zero | FieldSpec::PaperFigure => Ok(()),
            FieldSpec::Affine { a, b, c } => {
                if finite(&[*a, *b, *c]) {
                    Ok(())
                } else {
                    Err(invalid("affine coefficients must be finite"))
                }
            }
            FieldSpec::Bump {
                center,
                radius,
                amplitude,
            } => check_bump(*center, *radius, *amplitude),
            FieldSpec::ModulatedBump {
                center,
                radius,
                amplitude,
                frequency,
                depth,
            } => {
                check_bump(*center, *radius, *amplitude)?;
                if finite(&[*frequency, *depth]) {
                    Ok(())
                } else {
                    Err(invalid("modulation parameters must be finite"))
                }
            }
            FieldSpec::Sum { terms } => terms.iter().try_for_each(FieldSpec::validate),
            FieldSpec::Scaled { factor, field } => {
                if !factor.is_finite() {
                    return Err(invalid("scale factor must be finite"));
                }
                field.validate()
            }
            FieldSpec::Translated { offset, field } => {
                if !offset.is_finite() {
                    return Err(invalid("offset must be finite"));
                }
                field.validate()
            }
        }
    }

    pub fn jet(&self, p: Point) -> Jet {
        match self {
            FieldSpec::Zero => Jet::ZERO,
            FieldSpec::Affine { a, b, c } => Jet {
                v: a * p.x + b * p.y + c,
                gx: *a,
                gy: *b,
                ..Jet::ZERO
            },
            FieldSpec::Bump {
                center,
                radius,
                amplitude,
            } => bump_jet(p, *center, *radius, *amplitude),
            FieldSpec::ModulatedBump {
                center,
                radius,
                amplitude,
                frequency,
                depth,
            } => {
                let b = bump_jet(p, *center, *radius, *amplitude);
                if b == Jet::ZERO {
                    return b;
                }
                let sx = (Jet::x(p.x - center.x) * *frequency).sin();
                let sy = (Jet::y(p.y - center.y) * *frequency).sin();
                b * ((sx * sy) * *depth + 1.0)
            }
            FieldSpec::PaperFigure => {
                let x = Jet::x(p.x);
                let y = Jet::y(p.y);
                let u = (x.powi(3) * 0.5 - y * y) * 0.6;
                u.cos() * 2.0 - (y + 4.0) * (x * x + y + -4.0)
            }
            FieldSpec::Sum { terms } => terms.iter().fold(Jet::ZERO, |acc, t| acc + t.jet(p)),
            FieldSpec::Scaled { factor, field } => field.jet(p) * *factor,
            FieldSpec::Translated { offset, field } => field.jet(p - *offset),
        }
    }

    /// A closed set outside of which the field vanishes identically, if one exists.
    /// `Some(None)` means the field is identically zero.
    fn support(&self) -> Option<Option<Domain>> {
        match self {
            FieldSpec::Zero => Some(None),
            FieldSpec::Affine { a, b, c } => (*a == 0.0 && *b == 0.0 && *c == 0.0).then_some(None),
            FieldSpec::PaperFigure => None,
            FieldSpec::Bump {
                center,
                radius,
                amplitude,
            }
            | FieldSpec::ModulatedBump {
                center,
                radius,
                amplitude,
                ..
            } => {
                if *amplitude == 0.0 {
                    Some(None)
                } else {
                    Some(Some(Domain::Disk {
                        center: *center,
                        radius: *radius,
                    }))
                }
            }
            FieldSpec::Scaled { factor, field } => {
                if *factor == 0.0 {
                    Some(None)
                } else {
                    field.support()
                }
            }
            FieldSpec::Translated { offset, field } => {
                field.support().map(|s| s.map(|d| d.translated(*offset)))
            }
            FieldSpec::Sum { terms } => {
                let mut boxes: Vec<Domain> = Vec::new();
                for t in terms {
                    if let Some(d) = t.support()? {
                        boxes.push(d);
                    }
                }
                match boxes.len() {
                    0 => Some(None),
                    1 => Some(Some(boxes[0])),
                    _ => {
                        let (mut lo, mut hi) = boxes[0].bbox();
                        for d in &boxes[1..] {
                            let (a, b) = d.bbox();
                            lo = Point::new(lo.x.min(a.x), lo.y.min(a.y));
                            hi = Point::new(hi.x.max(b.x), hi.y.max(b.y));
                        }
                        Some(Some(Domain::Rect { lo, hi }))
                    }
                }
            }
        }
    }

    /// Disjoint pieces of the support, used for the exact-zero outside check.
    fn support_pieces(&self, out: &mut Vec<Domain>) {
        match self {
            FieldSpec::Sum { terms } => terms.iter().for_each(|t| t.support_pieces(out)),
            FieldSpec::Scaled { field, .. } => field.support_pieces(out),
            FieldSpec::Translated { offset, field } => {
                let mut inner = Vec::new();
                field.support_pieces(&mut inner);
                out.extend(inner.into_iter().map(|d| d.translated(*offset)));
            }
            _ => {
                if let Some(Some(d)) = self.support() {
                    out.push(d);
                }
            }
        }
    }
}

fn check_bump(center: Point, radius: f64, amplitude: f64) -> Result<()> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(invalid(format!(
            "bump radius must be positive, got {radius}"
        )));
    }
    if !(center.is_finite() && amplitude.is_finite()) {
        return Err(invalid("bump center and amplitude must be finite"));
    }
    Ok(())
}

fn bump_jet(p: Point, center: Point, radius: f64, amplitude: f64) -> Jet {
    let d = p - center;
    let r2 = radius * radius;
    let rho = d.dot(d) / r2;
    if rho >= 1.0 {
        return Jet::ZERO;
    }
    let inner = Jet {
        v: rho,
        gx: 2.0 * d.x / r2,
        gy: 2.0 * d.y / r2,
        hxx: 2.0 / r2,
        hxy: 0.0,
        hyy: 2.0 / r2,
    };
    let s = 1.0 - rho;
    inner.compose(
        amplitude * s * s * s,
        -3.0 * amplitude * s * s,
        6.0 * amplitude * s,
    )
}

/// A named analytic field with support metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    pub id: String,
    pub spec: FieldSpec,
}

impl ScalarField {
    pub fn new(id: impl Into<String>, spec: FieldSpec) -> Result<ScalarField> {
        spec.validate()?;
        Ok(ScalarField {
            id: id.into(),
            spec,
        })
    }

    pub fn jet(&self, p: Point) -> Jet {
        self.spec.jet(p)
    }

    pub fn evaluate(&self, p: Point) -> f64 {
        self.spec.jet(p).v
    }

    pub fn gradient(&self, p: Point) -> [f64; 2] {
        let j = self.spec.jet(p);
        [j.gx, j.gy]
    }

    pub fn hessian(&self, p: Point) -> [[f64; 2]; 2] {
        let j = self.spec.jet(p);
        [[j.hxx, j.hxy], [j.hxy, j.hyy]]
    }

    pub fn compactly_supported(&self) -> bool {
        self.spec.support().is_some()
    }

    /// A domain outside of which the field vanishes. `None` for fields without compact
    /// support and for the identically zero field.
    pub fn support_domain(&self) -> Option<Domain> {
        self.spec.support().flatten()
    }

    /// Whether `p` lies outside every piece of the support (so `f` vanishes there exactly).
    pub fn outside_support(&self, p: Point) -> bool {
        let mut pieces = Vec::new();
        self.spec.support_pieces(&mut pieces);
        pieces.iter().all(|d| !d.contains(p))
    }

    /// Distance from `p` to the boundary of the nearest support piece, or infinity.
    pub fn distance_to_support_boundary(&self, p: Point) -> f64 {
        let mut pieces = Vec::new();
        self.spec.support_pieces(&mut pieces);
        pieces
            .iter()
            .map(|d| d.distance_to_boundary(p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, s: f64) -> ScalarField {
        ScalarField {
            id: format!("{}*{}", s, self.id),
            spec: FieldSpec::Scaled {
                factor: s,
                field: Box::new(self.spec.clone()),
            },
        }
    }

    pub fn translated(&self, offset: Point) -> ScalarField {
        ScalarField {
            id: format!("{}+({},{})", self.id, offset.x, offset.y),
            spec: FieldSpec::Translated {
                offset,
                field: Box::new(self.spec.clone()),
            },
        }
    }
}

pub fn make_bump(center: Point, radius: f64, amplitude: f64) -> Result<ScalarField> {
    ScalarField::new(
        "bump",
        FieldSpec::Bump {
            center,
            radius,
            amplitude,
        },
    )
}

pub fn make_paper_figure_field() -> ScalarField {
    ScalarField {
        id: "paper_figure".into(),
        spec: FieldSpec::PaperFigure,
    }
}

/// A catalog field together with the domain it is meant to be verified on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub field: ScalarField,
    pub domain: Domain,
}

/// Center of the disk used for the figure field.
pub const FIGURE_CENTER: Point = Point::new(2.54, -3.62);
/// Second base point used for the boundary-arc figure.
pub const FIGURE_CENTER_ALT: Point = Point::new(3.04, -4.38);
pub const FIGURE_RADIUS: f64 = 2.6;

pub fn catalog() -> Vec<CatalogEntry> {
    let origin = Point::new(0.0, 0.0);
    let square = Domain::Rect {
        lo: Point::new(-1.0, -1.0),
        hi: Point::new(1.0, 1.0),
    };
    let unit_disk = Domain::Disk {
        center: origin,
        radius: 1.0,
    };
    let entry = |id: &str, spec: FieldSpec, domain: Domain| CatalogEntry {
        field: ScalarField {
            id: id.into(),
            spec,
        },
        domain,
    };
    vec![
        entry("zero", FieldSpec::Zero, square),
        entry(
            "affine",
            FieldSpec::Affine {
                a: 0.7,
                b: -0.4,
                c: 0.25,
            },
            square,
        ),
        entry(
            "bump",
            FieldSpec::Bump {
                center: origin,
                radius: 1.0,
                amplitude: 1.0,
            },
            unit_disk,
        ),
        entry(
            "modulated_bump",
            FieldSpec::ModulatedBump {
                center: origin,
                radius: 1.0,
                amplitude: 1.0,
                frequency: 5.0,
                depth: 0.5,
            },
            unit_disk,
        ),
        entry(
            "two_bumps",
            FieldSpec::Sum {
                terms: vec![
                    FieldSpec::Bump {
                        center: Point::new(-0.5, 0.0),
                        radius: 0.4,
                        amplitude: 1.0,
                    },
                    FieldSpec::Bump {
                        center: Point::new(0.55, 0.1),
                        radius: 0.35,
                        amplitude: -0.7,
                    },
                ],
            },
            Domain::Rect {
                lo: Point::new(-1.0, -0.6),
                hi: Point::new(1.0, 0.6),
            },
        ),
        entry(
            "paper_figure",
            FieldSpec::PaperFigure,
            Domain::Disk {
                center: FIGURE_CENTER,
                radius: FIGURE_RADIUS,
            },
        ),
    ]
}

/// Looks up a catalog entry by id.
pub fn builtin(id: &str) -> Option<CatalogEntry> {
    catalog().into_iter().find(|e| e.field.id == id)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_peak_and_rim() {
        let f = make_bump(Point::new(0.0, 0.0), 1.0, 1.0).unwrap();
        assert_eq!(f.evaluate(Point::new(0.0, 0.0)), 1.0);
        let rim = Point::new(1.0, 0.0);
        assert_eq!(f.evaluate(rim), 0.0);
        assert_eq!(f.gradient(rim), [0.0, 0.0]);
        assert_eq!(f.hessian(rim), [[0.0, 0.0], [0.0, 0.0]]);
        assert!(make_bump(Point::new(0.0, 0.0), 0.0, 1.0).is_err());
        assert!(make_bump(Point::new(0.0, 0.0), -1.0, 1.0).is_err());
    }

    #[test]
    fn bump_hessian_vanishes_approaching_rim() {
        // Every second-derivative term carries a factor (1 − ρ).
        let f = make_bump(Point::new(0.0, 0.0), 1.0, 1.0).unwrap();
        let h = f.hessian(Point::new(1.0 - 1e-9, 0.0));
        assert!(h.iter().flatten().all(|v| v.abs() < 1e-7));
    }

    #[test]
    fn paper_figure_at_origin() {
        assert_eq!(
            make_paper_figure_field().evaluate(Point::new(0.0, 0.0)),
            18.0
        );
        assert!(!make_paper_figure_field().compactly_supported());
    }

    #[test]
    fn catalog_shape() {
        let c = catalog();
        assert!(c.len() >= 6);
        let compact: Vec<_> = c.iter().filter(|e| e.field.compactly_supported()).collect();
        assert!(compact.len() >= 4);
        let aff = builtin("affine").unwrap();
        let h = aff.field.hessian(Point::new(0.3, -0.8));
        assert_eq!(h, [[0.0, 0.0], [0.0, 0.0]]);
        for e in &c {
            if let Some(s) = e.field.support_domain() {
                assert!(s.is_inside(&e.domain), "{}", e.field.id);
            }
        }
    }

    #[test]
    fn field_spec_json_roundtrip() {
        for e in catalog() {
            let s = serde_json::to_string(&e.field.spec).unwrap();
            let back: FieldSpec = serde_json::from_str(&s).unwrap();
            assert_eq!(back, e.field.spec);
        }
        let parsed: FieldSpec =
            serde_json::from_str(r#"{"type":"bump","center":[0,0],"radius":1,"amplitude":2}"#)
                .unwrap();
        assert_eq!(
            parsed,
            FieldSpec::Bump {
                center: Point::new(0.0, 0.0),
                radius: 1.0,
                amplitude: 2.0
            }
        );
    }
}
