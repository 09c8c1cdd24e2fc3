//! S-expression scene description.
//!
//! ```text
//! ; solid torus with a ball removed
//! (subtract
//!   (torus (0 0 0) (0 0 1) 0.25 0.1)
//!   (ball (0.25 0 0) 0.05))
//! ```
//!
//! Forms: `(ball C r)`, `(box C H)`, `(torus C A R r)`, `(cylinder C A r h)`,
//! `(union S...)`, `(intersection S...)`, `(subtract S S)`, `(translate V S)`,
//! `(rotate A angle S)`, `(scale f S)`, where `C`, `H`, `A`, `V` are `(x y z)` triples.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::scalar::Real;

use super::scene::SdfScene;

#[derive(Debug, Clone, PartialEq)]
enum Sexp {
    Atom(String, usize),
    List(Vec<Sexp>, usize),
}

impl Sexp {
    fn pos(&self) -> usize {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }
}

fn err(pos: usize, msg: impl Into<String>) -> Error {
    Error::Parse { pos, msg: msg.into() }
}

fn tokenize(src: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c == b';' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else if c == b'(' || c == b')' {
            out.push((i, &src[i..i + 1]));
            i += 1;
        } else {
            let start = i;
            while i < bytes.len()
                && !bytes[i].is_ascii_whitespace()
                && !matches!(bytes[i], b'(' | b')' | b';')
            {
                i += 1;
            }
            out.push((start, &src[start..i]));
        }
    }
    out
}

fn read(tokens: &[(usize, &str)], at: &mut usize, end: usize) -> Result<Sexp> {
    let Some(&(pos, tok)) = tokens.get(*at) else {
        return Err(err(end, "unexpected end of input"));
    };
    *at += 1;
    match tok {
        "(" => {
            let mut items = Vec::new();
            loop {
                match tokens.get(*at) {
                    None => return Err(err(end, "unclosed '('")),
                    Some(&(_, ")")) => {
                        *at += 1;
                        return Ok(Sexp::List(items, pos));
                    }
                    Some(_) => items.push(read(tokens, at, end)?),
                }
            }
        }
        ")" => Err(err(pos, "unexpected ')'")),
        atom => Ok(Sexp::Atom(atom.to_string(), pos)),
    }
}

fn number<T: Real>(s: &Sexp) -> Result<T> {
    match s {
        Sexp::Atom(a, p) => a
            .parse::<T>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| err(*p, format!("expected a finite number, found '{a}'"))),
        Sexp::List(_, p) => Err(err(*p, "expected a number, found a list")),
    }
}

fn triple<T: Real>(s: &Sexp) -> Result<Vec3<T>> {
    match s {
        Sexp::List(items, _) if items.len() == 3 => Ok(Vec3::new(
            number(&items[0])?,
            number(&items[1])?,
            number(&items[2])?,
        )),
        other => Err(err(other.pos(), "expected an (x y z) triple")),
    }
}

fn scene<T: Real>(s: &Sexp) -> Result<SdfScene<T>> {
    let (items, pos) = match s {
        Sexp::List(items, pos) if !items.is_empty() => (items, *pos),
        other => return Err(err(other.pos(), "expected a scene form")),
    };
    let head = match &items[0] {
        Sexp::Atom(a, _) => a.as_str(),
        other => return Err(err(other.pos(), "form name must be a symbol")),
    };
    let args = &items[1..];
    let arity = |n: usize| -> Result<()> {
        if args.len() == n {
            Ok(())
        } else {
            Err(err(pos, format!("'{head}' takes {n} arguments, got {}", args.len())))
        }
    };
    let invalid = |e: Error| match e {
        Error::InvalidScene(msg) => err(pos, msg),
        other => other,
    };
    let built = match head {
        "ball" => {
            arity(2)?;
            SdfScene::ball(triple(&args[0])?, number(&args[1])?)
        }
        "box" => {
            arity(2)?;
            SdfScene::cuboid(triple(&args[0])?, triple(&args[1])?)
        }
        "torus" => {
            arity(4)?;
            SdfScene::torus(
                triple(&args[0])?,
                triple(&args[1])?,
                number(&args[2])?,
                number(&args[3])?,
            )
        }
        "cylinder" => {
            arity(4)?;
            SdfScene::cylinder(
                triple(&args[0])?,
                triple(&args[1])?,
                number(&args[2])?,
                number(&args[3])?,
            )
        }
        "union" => SdfScene::union(args.iter().map(scene).collect::<Result<_>>()?),
        "intersection" => SdfScene::intersection(args.iter().map(scene).collect::<Result<_>>()?),
        "subtract" => {
            arity(2)?;
            Ok(SdfScene::subtraction(scene(&args[0])?, scene(&args[1])?))
        }
        "translate" => {
            arity(2)?;
            scene(&args[1])?.translate(triple(&args[0])?)
        }
        "rotate" => {
            arity(3)?;
            scene(&args[2])?.rotate(triple(&args[0])?, number(&args[1])?)
        }
        "scale" => {
            arity(2)?;
            scene(&args[1])?.scale(number(&args[0])?)
        }
        other => return Err(err(pos, format!("unknown form '{other}'"))),
    };
    built.map_err(invalid)
}

/// Parses a scene description.
pub fn parse_scene<T: Real>(src: &str) -> Result<SdfScene<T>> {
    let tokens = tokenize(src);
    let mut at = 0;
    let tree = read(&tokens, &mut at, src.len())?;
    if let Some(&(pos, _)) = tokens.get(at) {
        return Err(err(pos, "trailing input after scene"));
    }
    scene(&tree)
}

fn put_triple<T: Real>(out: &mut String, v: Vec3<T>) {
    let _ = write!(out, "({} {} {})", v.x, v.y, v.z);
}

fn print(out: &mut String, s: &SdfScene<impl Real>, depth: usize) {
    let indent = "  ".repeat(depth);
    out.push_str(&indent);
    match s {
        SdfScene::Ball { center, radius } => {
            out.push_str("(ball ");
            put_triple(out, *center);
            let _ = write!(out, " {radius})");
        }
        SdfScene::Cuboid { center, half_extents } => {
            out.push_str("(box ");
            put_triple(out, *center);
            out.push(' ');
            put_triple(out, *half_extents);
            out.push(')');
        }
        SdfScene::Torus {
            center,
            axis,
            ring_radius,
            tube_radius,
        } => {
            out.push_str("(torus ");
            put_triple(out, *center);
            out.push(' ');
            put_triple(out, *axis);
            let _ = write!(out, " {ring_radius} {tube_radius})");
        }
        SdfScene::Cylinder {
            center,
            axis,
            radius,
            half_height,
        } => {
            out.push_str("(cylinder ");
            put_triple(out, *center);
            out.push(' ');
            put_triple(out, *axis);
            let _ = write!(out, " {radius} {half_height})");
        }
        SdfScene::Union(cs) | SdfScene::Intersection(cs) => {
            let name = if matches!(s, SdfScene::Union(_)) {
                "union"
            } else {
                "intersection"
            };
            let _ = write!(out, "({name}");
            for c in cs {
                out.push('\n');
                print(out, c, depth + 1);
            }
            out.push(')');
        }
        SdfScene::Subtraction { base, cut } => {
            out.push_str("(subtract\n");
            print(out, base, depth + 1);
            out.push('\n');
            print(out, cut, depth + 1);
            out.push(')');
        }
        SdfScene::Translate { offset, child } => {
            out.push_str("(translate ");
            put_triple(out, *offset);
            out.push('\n');
            print(out, child, depth + 1);
            out.push(')');
        }
        SdfScene::Rotate { rotation, child } => {
            out.push_str("(rotate ");
            put_triple(out, rotation.axis());
            let _ = writeln!(out, " {}", rotation.angle());
            print(out, child, depth + 1);
            out.push(')');
        }
        SdfScene::Scale { factor, child } => {
            let _ = writeln!(out, "(scale {factor}");
            print(out, child, depth + 1);
            out.push(')');
        }
    }
}

/// Prints a scene in the form accepted by [`parse_scene`]; numbers use the shortest
/// representation that reads back to the same value.
pub fn format_scene<T: Real>(scene: &SdfScene<T>) -> String {
    let mut out = String::new();
    print(&mut out, scene, 0);
    out.push('\n');
    out
}
