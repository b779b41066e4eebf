//! Plain-text dumps of curves, cycles, varifolds, networks and cones.
//!
//! Curve blocks hold one vertex per line as three space-separated decimals
//! and are separated by a blank line; closed curves do not repeat their
//! first vertex. Floats are written in shortest round-trip form, so reading
//! a dump back gives bit-identical vertices. Lines starting with `#` are
//! comments in every format.

use std::fmt::Write as _;

use crate::cone::ConeVarifold;
use crate::curve::{Cycle1, PolyCurve, Varifold1};
use crate::error::{Error, Result};
use crate::network::{End, GeodesicNetwork, Region};
use crate::surface::{EllipsoidParams, Vec3};

fn push_vertices(out: &mut String, c: &PolyCurve) {
    for v in c.vertices() {
        let _ = writeln!(out, "{} {} {}", v[0], v[1], v[2]);
    }
}

/// Curves as blank-line separated vertex blocks.
pub fn write_curves(curves: &[PolyCurve]) -> String {
    let mut out = String::new();
    for (k, c) in curves.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        push_vertices(&mut out, c);
    }
    out
}

pub fn write_cycle(c: &Cycle1) -> String {
    write_curves(c.curves())
}

/// Each block is preceded by `mult k`; open pieces are marked
/// `mult k open`.
pub fn write_varifold(v: &Varifold1) -> String {
    let mut out = String::new();
    for (k, (c, m)) in v.pieces().iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "mult {m}{}", if c.is_closed() { "" } else { " open" });
        push_vertices(&mut out, c);
    }
    out
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_floats<const N: usize>(words: &[&str], line: usize) -> Result<[f64; N]> {
    if words.len() != N {
        return Err(parse_err(line, format!("expected {N} numbers, found {}", words.len())));
    }
    let mut out = [0.0f64; N];
    for (o, w) in out.iter_mut().zip(words) {
        *o = w.parse().map_err(|_| parse_err(line, format!("bad number '{w}'")))?;
        if !o.is_finite() {
            return Err(parse_err(line, format!("non-finite number '{w}'")));
        }
    }
    Ok(out)
}

fn vertex(words: &[&str], line: usize) -> Result<Vec3> {
    let [x, y, z] = parse_floats::<3>(words, line)?;
    Ok(Vec3::new(x, y, z))
}

/// Vertex blocks of a plain curve dump.
pub fn read_blocks(text: &str) -> Result<Vec<Vec<Vec3>>> {
    let mut blocks = Vec::new();
    let mut cur: Vec<Vec3> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim_start().starts_with('#') {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.is_empty() {
            if !cur.is_empty() {
                blocks.push(std::mem::take(&mut cur));
            }
            continue;
        }
        cur.push(vertex(&words, i + 1)?);
    }
    if !cur.is_empty() {
        blocks.push(cur);
    }
    Ok(blocks)
}

pub fn read_cycle(text: &str) -> Result<Cycle1> {
    let curves = read_blocks(text)?
        .into_iter()
        .map(|b| PolyCurve::new(b, true))
        .collect::<Result<Vec<_>>>()?;
    Cycle1::new(curves)
}

pub fn read_varifold(text: &str) -> Result<Varifold1> {
    let mut pieces = Vec::new();
    let mut header: Option<(u32, bool, usize)> = None;
    let mut cur: Vec<Vec3> = Vec::new();
    let finish = |header: Option<(u32, bool, usize)>, cur: &mut Vec<Vec3>, pieces: &mut Vec<(PolyCurve, u32)>| -> Result<()> {
        if let Some((m, closed, line)) = header {
            let c = PolyCurve::new(std::mem::take(cur), closed).map_err(|e| parse_err(line, e.to_string()))?;
            pieces.push((c, m));
        }
        Ok(())
    };
    for (i, line) in text.lines().enumerate() {
        if line.trim_start().starts_with('#') {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.first() {
            None => {}
            Some(&"mult") => {
                finish(header.take(), &mut cur, &mut pieces)?;
                let m: u32 = words
                    .get(1)
                    .and_then(|w| w.parse().ok())
                    .filter(|m| *m > 0)
                    .ok_or_else(|| parse_err(i + 1, "expected 'mult k' with k ≥ 1"))?;
                let closed = match words.get(2) {
                    None => true,
                    Some(&"open") if words.len() == 3 => false,
                    _ => return Err(parse_err(i + 1, "unexpected words after 'mult k'")),
                };
                header = Some((m, closed, i + 1));
            }
            Some(_) => {
                if header.is_none() {
                    return Err(parse_err(i + 1, "vertex before any 'mult' header"));
                }
                cur.push(vertex(&words, i + 1)?);
            }
        }
    }
    finish(header, &mut cur, &mut pieces)?;
    Varifold1::new(pieces)
}

/// Network dump: a `surface a1 a2 a3` header, `segment <id> mult <k>`
/// blocks of open curves, then `junction x y z` lines each followed by
/// `incident <segment id> <±1>` lines (`1` for the segment start, `-1` for
/// its end). An optional `region x y z r` line restricts the working region
/// to a geodesic ball.
pub fn write_network(net: &GeodesicNetwork) -> String {
    let mut out = String::new();
    let [a1, a2, a3] = net.surface().coefficients();
    let _ = writeln!(out, "surface {a1} {a2} {a3}");
    if let Region::Ball { center, radius } = net.region() {
        let _ = writeln!(out, "region {} {} {} {}", center[0], center[1], center[2], radius);
    }
    for (id, (c, m)) in net.pieces().iter().enumerate() {
        let _ = writeln!(out, "segment {id} mult {m}");
        push_vertices(&mut out, c);
    }
    for (j, ends) in net.junctions().iter().zip(net.attachments()) {
        let p = j.point();
        let _ = writeln!(out, "junction {} {} {}", p[0], p[1], p[2]);
        for (seg, end) in ends {
            let _ = writeln!(out, "incident {seg} {}", end.flag());
        }
    }
    out
}

pub fn read_network(text: &str) -> Result<GeodesicNetwork> {
    let mut surface: Option<EllipsoidParams> = None;
    let mut region = Region::Whole;
    let mut segments: Vec<(usize, u32, Vec<Vec3>, usize)> = Vec::new();
    let mut junctions: Vec<(Vec3, Vec<(usize, End)>)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim_start().starts_with('#') {
            continue;
        }
        let n = i + 1;
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.first() {
            None => {}
            Some(&"surface") => {
                let [a1, a2, a3] = parse_floats::<3>(&words[1..], n)?;
                surface = Some(EllipsoidParams::new(a1, a2, a3).map_err(|e| parse_err(n, e.to_string()))?);
            }
            Some(&"region") => {
                let [x, y, z, r] = parse_floats::<4>(&words[1..], n)?;
                region = Region::Ball { center: Vec3::new(x, y, z), radius: r };
            }
            Some(&"segment") => {
                if words.len() != 4 || words[2] != "mult" {
                    return Err(parse_err(n, "expected 'segment <id> mult <k>'"));
                }
                let id: usize = words[1].parse().map_err(|_| parse_err(n, "bad segment id"))?;
                let m: u32 = words[3].parse().map_err(|_| parse_err(n, "bad multiplicity"))?;
                if id != segments.len() {
                    return Err(parse_err(n, format!("segment ids must be 0, 1, … in order; found {id}")));
                }
                segments.push((id, m, Vec::new(), n));
            }
            Some(&"junction") => {
                junctions.push((vertex(&words[1..], n)?, Vec::new()));
            }
            Some(&"incident") => {
                let j = junctions.last_mut().ok_or_else(|| parse_err(n, "'incident' before any junction"))?;
                if words.len() != 3 {
                    return Err(parse_err(n, "expected 'incident <segment id> <±1>'"));
                }
                let seg: usize = words[1].parse().map_err(|_| parse_err(n, "bad segment id"))?;
                let flag: i32 = words[2].parse().map_err(|_| parse_err(n, "bad end flag"))?;
                j.1.push((seg, End::from_flag(flag).map_err(|e| parse_err(n, e.to_string()))?));
            }
            Some(_) => {
                if !junctions.is_empty() {
                    return Err(parse_err(n, "vertex after the junction section"));
                }
                let seg = segments.last_mut().ok_or_else(|| parse_err(n, "vertex before any segment"))?;
                seg.2.push(vertex(&words, n)?);
            }
        }
    }
    let surface = surface.ok_or_else(|| parse_err(1, "missing 'surface' header"))?;
    let pieces = segments
        .into_iter()
        .map(|(_, m, v, line)| Ok((PolyCurve::new(v, false).map_err(|e| parse_err(line, e.to_string()))?, m)))
        .collect::<Result<Vec<_>>>()?;
    GeodesicNetwork::new(surface, pieces, junctions, region)
}

/// One `tri x1 y1 z1 x2 y2 z2 x3 y3 z3 mult k` line per cone triangle.
pub fn write_cone(c: &ConeVarifold) -> String {
    let mut out = String::new();
    for t in c.triangles() {
        let _ = writeln!(
            out,
            "tri 0 0 0 {} {} {} {} {} {} mult {}",
            t.a[0], t.a[1], t.a[2], t.b[0], t.b[1], t.b[2], t.multiplicity
        );
    }
    out
}

/// Triangles `([p0, p1, p2], k)` of a `tri` dump.
pub fn read_triangles(text: &str) -> Result<Vec<([Vec3; 3], u32)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim_start().starts_with('#') {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.is_empty() {
            continue;
        }
        if words.len() != 12 || words[0] != "tri" || words[10] != "mult" {
            return Err(parse_err(i + 1, "expected 'tri <9 numbers> mult <k>'"));
        }
        let p = parse_floats::<9>(&words[1..10], i + 1)?;
        let m: u32 = words[11].parse().ok().filter(|m| *m > 0).ok_or_else(|| parse_err(i + 1, "bad multiplicity"))?;
        out.push((
            [Vec3::new(p[0], p[1], p[2]), Vec3::new(p[3], p[4], p[5]), Vec3::new(p[6], p[7], p[8])],
            m,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::build_cone;
    use crate::curve::{sphere_arc, sphere_circle, Mass};
    use crate::network::fixtures;
    use proptest::prelude::*;

    #[test]
    fn cycle_roundtrip() {
        let c = Cycle1::new(vec![
            sphere_circle(Vec3::z(), 0.0, 64).unwrap(),
            sphere_circle(Vec3::x(), 0.3, 80).unwrap(),
        ])
        .unwrap();
        let text = write_cycle(&c);
        assert_eq!(text.lines().filter(|l| l.is_empty()).count(), 1);
        assert_eq!(read_cycle(&text).unwrap(), c);
        assert_eq!(read_cycle(&format!("# seed 3\n{text}")).unwrap(), c);
    }

    #[test]
    fn varifold_roundtrip() {
        let v = Varifold1::new(vec![
            (sphere_circle(Vec3::z(), 0.0, 64).unwrap(), 2),
            (sphere_arc(Vec3::z(), Vec3::x(), 1.0, 16).unwrap(), 1),
        ])
        .unwrap();
        let back = read_varifold(&write_varifold(&v)).unwrap();
        assert_eq!(back.pieces().len(), 2);
        assert_eq!(back.pieces()[0], v.pieces()[0]);
        assert_eq!(back.pieces()[1].0.vertices(), v.pieces()[1].0.vertices());
        assert!((back.mass() - v.mass()).abs() < 1e-12);
    }

    #[test]
    fn network_roundtrip() {
        for net in [fixtures::y_network(32).unwrap(), fixtures::star(&[(0.0, 1), (2.0, 1), (4.0, 1)], 0.5, 16).unwrap()] {
            let back = read_network(&write_network(&net)).unwrap();
            assert_eq!(back.junctions().len(), net.junctions().len());
            assert_eq!(back.attachments(), net.attachments());
            assert_eq!(back.region(), net.region());
            for (a, b) in back.pieces().iter().zip(net.pieces()) {
                assert_eq!(a.0.vertices(), b.0.vertices());
                assert_eq!(a.1, b.1);
            }
        }
    }

    #[test]
    fn cone_dump() {
        let v = Cycle1::new(vec![sphere_circle(Vec3::z(), 0.0, 16).unwrap()]).unwrap().into_varifold();
        let c = build_cone(&v, 2.0).unwrap();
        let tris = read_triangles(&write_cone(&c)).unwrap();
        assert_eq!(tris.len(), 16);
        assert_eq!(tris[3].0[1], c.triangles()[3].a);
        assert!(tris.iter().all(|t| t.0[0] == Vec3::zeros() && t.1 == 1));
    }

    #[test]
    fn parse_errors_report_lines() {
        match read_varifold("mult 1\n0 0 1\n0 1 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(read_varifold("mult 0\n1 0 0\n0 1 0\n0 0 1\n").is_err());
        assert!(read_network("segment 0 mult 1\n1 0 0\n0 1 0\n").is_err());
        assert!(read_triangles("tri 1 2 3 mult 1\n").is_err());
    }

    proptest! {
        #[test]
        fn curve_dump_is_exact(pts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 3..40)) {
            let vertices: Vec<Vec3> = pts
                .into_iter()
                .map(|(x, y, z)| Vec3::new(x, y, z + 2.0).normalize())
                .collect();
            prop_assume!(vertices.windows(2).all(|w| (w[0] - w[1]).norm() > 1e-9));
            let c = PolyCurve::new(vertices.clone(), false).unwrap();
            let blocks = read_blocks(&write_curves(&[c.clone(), c])).unwrap();
            prop_assert_eq!(blocks.len(), 2);
            prop_assert_eq!(&blocks[0], &vertices);
        }
    }
}
