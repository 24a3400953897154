//! Line-oriented text format: a header `m n`, then one term per line
//! `h a_1 .. a_m k_1 .. k_n re im` with a 1-based component index `h`.
//! Blank lines and `#` comments are ignored.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use super::field::TFVectorField;
use super::index::MultiIndex;
use super::SeriesError;

pub fn write_field(field: &TFVectorField) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", field.m(), field.n());
    for (h, comp) in field.components().iter().enumerate() {
        for (idx, z) in comp.iter() {
            let _ = write!(out, "{}", h + 1);
            for a in idx.alpha() {
                let _ = write!(out, " {a}");
            }
            for k in idx.k() {
                let _ = write!(out, " {k}");
            }
            let _ = writeln!(out, " {:e} {:e}", z.re, z.im);
        }
    }
    out
}

pub fn parse_field(text: &str) -> Result<TFVectorField, SeriesError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or_else(|| SeriesError::Parse {
        line: 0,
        message: "missing header `m n`".into(),
    })?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| SeriesError::Parse {
            line: hline,
            message: format!("bad header: {e}"),
        })?;
    if dims.len() != 2 {
        return Err(SeriesError::Parse {
            line: hline,
            message: "header must be `m n`".into(),
        });
    }
    let (m, n) = (dims[0], dims[1]);
    let mut field = TFVectorField::zero(m, n);
    for (ln, line) in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 + m + n {
            return Err(SeriesError::Parse {
                line: ln,
                message: format!("expected {} fields, found {}", 3 + m + n, toks.len()),
            });
        }
        let perr = |what: &str, e: &dyn std::fmt::Display| SeriesError::Parse {
            line: ln,
            message: format!("bad {what}: {e}"),
        };
        let h: usize = toks[0].parse().map_err(|e| perr("component", &e))?;
        if h == 0 || h > m + n {
            return Err(SeriesError::Parse {
                line: ln,
                message: format!("component index {h} outside 1..={}", m + n),
            });
        }
        let alpha: Vec<u32> = toks[1..1 + m]
            .iter()
            .map(|t| t.parse::<u32>())
            .collect::<Result<_, _>>()
            .map_err(|e| perr("exponent", &e))?;
        let k: Vec<i32> = toks[1 + m..1 + m + n]
            .iter()
            .map(|t| t.parse::<i32>())
            .collect::<Result<_, _>>()
            .map_err(|e| perr("harmonic", &e))?;
        let re: f64 = toks[1 + m + n].parse().map_err(|e| perr("real part", &e))?;
        let im: f64 = toks[2 + m + n].parse().map_err(|e| perr("imaginary part", &e))?;
        field
            .component_mut(h - 1)
            .add_term(MultiIndex::new(&alpha, &k), Complex64::new(re, im));
    }
    Ok(field)
}

pub fn read_field(path: &Path) -> Result<TFVectorField, SeriesError> {
    let text = std::fs::read_to_string(path).map_err(|e| SeriesError::Io(format!("{}: {e}", path.display())))?;
    parse_field(&text)
}

pub fn write_field_file(field: &TFVectorField, path: &Path) -> Result<(), SeriesError> {
    std::fs::write(path, write_field(field)).map_err(|e| SeriesError::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let text = "# sample\n2 1\n1 1 0 -1 0.5 0\n3 0 2 2 -1e-7 2.5\n";
        let f = parse_field(text).unwrap();
        assert_eq!(f.num_terms(), 2);
        let g = parse_field(&write_field(&f)).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(parse_field("1 1\n1 0 0 1\n").is_err());
        assert!(parse_field("1 1\n3 0 0 1 0\n").is_err());
        assert!(parse_field("").is_err());
    }
}
