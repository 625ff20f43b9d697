//! String specs for catalog maps, e.g. `power:3`, `stretch:2.0@north`,
//! `qs:pw2;deg=2`, `mobius:0.3,0.1;rot=0.5`, `compose:power:2|stretch:1.5`.

use super::{named_point, Lift, MapError, QsCovering, SphereMap};
use crate::hyperbolic::{BPoint, HPoint, MobiusIsometry};
use crate::linalg::Vector;
use crate::Real;

fn bad(spec: &str, token: &str) -> MapError {
    MapError::Parse { spec: spec.to_string(), token: token.to_string() }
}

fn number<T: Real>(spec: &str, token: &str) -> Result<T, MapError> {
    token.trim().parse::<f64>().ok().filter(|x| x.is_finite()).map(T::lit).ok_or_else(|| bad(spec, token))
}

fn degree(spec: &str, token: &str) -> Result<u32, MapError> {
    token.trim().parse::<u32>().map_err(|_| bad(spec, token))
}

fn point<T: Real>(spec: &str, token: &str, n: usize) -> Result<BPoint<T>, MapError> {
    if let Some(p) = named_point(token.trim(), n) {
        return Ok(p);
    }
    let coords: Result<Vec<T>, _> = token.split(',').map(|c| number::<T>(spec, c)).collect();
    let coords = coords?;
    if coords.len() != n + 1 {
        return Err(bad(spec, token));
    }
    BPoint::new(Vector::from_slice(&coords)).map_err(|_| bad(spec, token))
}

/// Parses a map spec for maps of `S^n`.
pub fn parse_map_spec<T: Real>(spec: &str, n: usize) -> Result<SphereMap<T>, MapError> {
    let map = parse_inner::<T>(spec, spec.trim(), n)?;
    Ok(map.with_label(spec.trim()))
}

fn parse_inner<T: Real>(spec: &str, body: &str, n: usize) -> Result<SphereMap<T>, MapError> {
    if body == "identity" {
        return SphereMap::identity(n);
    }
    let (head, rest) = body.split_once(':').ok_or_else(|| bad(spec, body))?;
    match head {
        "power" => SphereMap::power(n, degree(spec, rest)?),
        "winding" => {
            if n != 2 {
                return Err(MapError::WrongSphere { kind: "winding", required: 2 });
            }
            SphereMap::winding(degree(spec, rest)?)
        }
        "stretch" => {
            let (alpha, pivot) = match rest.split_once('@') {
                Some((a, p)) => (a, point::<T>(spec, p, n)?),
                None => (rest, named_point("north", n).ok_or_else(|| bad(spec, rest))?),
            };
            SphereMap::radial_stretch(number(spec, alpha)?, pivot)
        }
        "mobius" => {
            let mut parts = rest.split(';');
            let coords = parts.next().unwrap_or_default();
            let a: Result<Vec<T>, _> = coords.split(',').map(|c| number::<T>(spec, c)).collect();
            let a = a?;
            if a.len() != n + 1 {
                return Err(bad(spec, coords));
            }
            let target = HPoint::new(Vector::from_slice(&a)).map_err(|_| bad(spec, coords))?;
            let mut g = MobiusIsometry::transvection(target);
            for opt in parts {
                let angle = opt.strip_prefix("rot=").ok_or_else(|| bad(spec, opt))?;
                let angle: T = number(spec, angle)?;
                let rot = match n {
                    1 => MobiusIsometry::planar_rotation(angle),
                    _ => MobiusIsometry::axis_rotation(&named_point("north", 2).expect("named"), angle),
                };
                g = rot.compose(&g);
            }
            Ok(SphereMap::mobius(g))
        }
        "qs" => {
            if n != 1 {
                return Err(MapError::WrongSphere { kind: "quasisymmetric covering", required: 1 });
            }
            let mut parts = rest.split(';');
            let homeo = parts.next().unwrap_or_default().trim();
            let lift = parse_lift(spec, homeo)?;
            let mut deg = 1;
            for opt in parts {
                let d = opt.trim().strip_prefix("deg=").ok_or_else(|| bad(spec, opt))?;
                deg = degree(spec, d)?;
            }
            Ok(SphereMap::qs_covering(QsCovering::new(lift, deg)?))
        }
        "compose" => {
            let (outer, inner) = rest.split_once('|').ok_or_else(|| bad(spec, rest))?;
            SphereMap::compose(parse_inner(spec, outer.trim(), n)?, parse_inner(spec, inner.trim(), n)?)
        }
        _ => Err(bad(spec, head)),
    }
}

fn parse_lift(spec: &str, token: &str) -> Result<Lift, MapError> {
    if token == "id" {
        Ok(Lift::Identity)
    } else if let Some(p) = token.strip_prefix("pw") {
        Lift::piecewise_power(number::<f64>(spec, p)?)
    } else if let Some(a) = token.strip_prefix("mob") {
        Lift::mobius(number::<f64>(spec, a)?)
    } else if let Some(knots) = token.strip_prefix("pl") {
        let pairs: Result<Vec<(f64, f64)>, MapError> = knots
            .split(',')
            .map(|k| {
                let (x, y) = k.split_once('/').ok_or_else(|| bad(spec, k))?;
                Ok((number::<f64>(spec, x)?, number::<f64>(spec, y)?))
            })
            .collect();
        Lift::piecewise_linear(pairs?)
    } else {
        Err(bad(spec, token))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary_maps::MapKind;

    #[test]
    fn parses_catalog_specs() {
        let cases: &[(&str, usize, MapKind, u32)] = &[
            ("power:3", 2, MapKind::Power, 3),
            ("power:2", 1, MapKind::Power, 2),
            ("identity", 2, MapKind::Power, 1),
            ("stretch:2.0@north", 2, MapKind::RadialStretch, 1),
            ("stretch:1.5@0,1", 1, MapKind::RadialStretch, 1),
            ("qs:pw2;deg=2", 1, MapKind::QsCircle, 2),
            ("qs:mob0.3;deg=1", 1, MapKind::QsCircle, 1),
            ("qs:pl0.25/0.4,0.5/0.6;deg=3", 1, MapKind::QsCircle, 3),
            ("mobius:0.3,0.1;rot=0.5", 1, MapKind::MobiusBoundary, 1),
            ("mobius:0.1,0.2,0.3", 2, MapKind::MobiusBoundary, 1),
            ("winding:2", 2, MapKind::Winding, 2),
            ("compose:power:2|stretch:1.5@east", 1, MapKind::Composition, 2),
            ("compose:power:2|compose:stretch:1.5|mobius:0.1,0.0", 1, MapKind::Composition, 2),
        ];
        for &(spec, n, kind, deg) in cases {
            let f = parse_map_spec::<f64>(spec, n).unwrap_or_else(|e| panic!("{spec}: {e}"));
            assert_eq!(f.kind(), kind, "{spec}");
            assert_eq!(f.nominal_degree(), deg, "{spec}");
            assert_eq!(f.label(), spec);
        }
    }

    #[test]
    fn malformed_specs_name_the_token() {
        match parse_map_spec::<f64>("power:x", 1) {
            Err(MapError::Parse { token, .. }) => assert_eq!(token, "x"),
            other => panic!("{other:?}"),
        }
        assert!(parse_map_spec::<f64>("spiral:2", 2).is_err());
        assert!(parse_map_spec::<f64>("power:0", 2).is_err());
        assert!(parse_map_spec::<f64>("mobius:1.0,0.0", 1).is_err());
        assert!(parse_map_spec::<f64>("qs:pw2;deg=2", 2).is_err());
        assert!(parse_map_spec::<f64>("winding:2", 1).is_err());
        assert!(parse_map_spec::<f64>("compose:power:2", 1).is_err());
    }
}
