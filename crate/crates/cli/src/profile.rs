use std::f64::consts::PI;
use std::path::PathBuf;

use burgers_alpha::io::read_field;
use burgers_alpha::{Error, Field64, Grid64, Result};

/// Initial or target data. Terms joined by `+` are summed.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Zero,
    Const(f64),
    /// `amp sin(k pi x / L)`.
    Sin { k: f64, amp: f64 },
    /// `amp exp(1 - 1/(1 - r^2))` for `r = (x - center)/width` inside the support.
    Bump { center: f64, width: f64, amp: f64 },
    Csv(PathBuf),
    Sum(Vec<Profile>),
}

fn num(spec: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::config(format!("profile '{spec}': '{s}' is not a finite number")))
}

impl Profile {
    pub fn parse(spec: &str) -> Result<Self> {
        if !spec.starts_with("csv:") && spec.contains('+') {
            return spec.split('+').map(Self::parse).collect::<Result<Vec<_>>>().map(Profile::Sum);
        }
        let parts: Vec<&str> = spec.trim().split(':').collect();
        let arity = |k: usize| {
            if parts.len() == k + 1 {
                Ok(())
            } else {
                Err(Error::config(format!(
                    "profile '{spec}' expects {k} parameters; forms: zero, const:c, sin:k:amp, bump:center:width:amp, csv:path"
                )))
            }
        };
        match parts[0] {
            "zero" => arity(0).map(|_| Profile::Zero),
            "const" => {
                arity(1)?;
                Ok(Profile::Const(num(spec, parts[1])?))
            }
            "sin" => {
                arity(2)?;
                Ok(Profile::Sin { k: num(spec, parts[1])?, amp: num(spec, parts[2])? })
            }
            "bump" => {
                arity(3)?;
                let width = num(spec, parts[2])?;
                if width <= 0.0 {
                    return Err(Error::config(format!("profile '{spec}': width must be positive")));
                }
                Ok(Profile::Bump { center: num(spec, parts[1])?, width, amp: num(spec, parts[3])? })
            }
            "csv" => Ok(Profile::Csv(PathBuf::from(&spec.trim()[4..]))),
            other => Err(Error::config(format!(
                "unknown profile '{other}'; forms: zero, const:c, sin:k:amp, bump:center:width:amp, csv:path"
            ))),
        }
    }

    pub fn field(&self, grid: Grid64) -> Result<Field64> {
        let (x0, len) = (grid.x_left, grid.length());
        Ok(match self {
            Profile::Zero => Field64::zeros(grid),
            Profile::Const(c) => Field64::constant(grid, *c),
            Profile::Sin { k, amp } => Field64::from_fn(grid, |x| amp * (k * PI * (x - x0) / len).sin()),
            Profile::Bump { center, width, amp } => Field64::from_fn(grid, |x| {
                let r = (x - center) / width;
                if r.abs() < 1.0 {
                    amp * (1.0 - 1.0 / (1.0 - r * r)).exp()
                } else {
                    0.0
                }
            }),
            Profile::Csv(path) => {
                let file = std::fs::File::open(path)
                    .map_err(|e| Error::config(format!("cannot open profile {}: {e}", path.display())))?;
                read_field(file, grid)?
            }
            Profile::Sum(terms) => {
                let mut acc = Field64::zeros(grid);
                for t in terms {
                    acc = acc.axpy(1.0, &t.field(grid)?)?;
                }
                acc
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_form() {
        assert_eq!(Profile::parse("zero").unwrap(), Profile::Zero);
        assert_eq!(Profile::parse("const:0.5").unwrap(), Profile::Const(0.5));
        assert_eq!(Profile::parse("sin:2:0.1").unwrap(), Profile::Sin { k: 2.0, amp: 0.1 });
        assert!(matches!(Profile::parse("bump:0.5:0.2:1").unwrap(), Profile::Bump { .. }));
        assert!(matches!(Profile::parse("csv:data/y0.csv").unwrap(), Profile::Csv(_)));
        assert!(matches!(Profile::parse("const:1+sin:1:2").unwrap(), Profile::Sum(v) if v.len() == 2));
        for bad in ["sin:1", "wave:1", "const:x", "bump:0.5:0:1", "const:inf"] {
            assert!(Profile::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn evaluates_on_the_grid() {
        let g = Grid64::new(0.0, 2.0, 5).unwrap();
        let f = Profile::parse("const:1+sin:1:2").unwrap().field(g).unwrap();
        assert!((f.values[2] - 3.0).abs() < 1e-15);
        assert!((f.values[4] - 1.0).abs() < 1e-12);
        let b = Profile::parse("bump:1:0.5:2").unwrap().field(g).unwrap();
        assert_eq!(b.values, vec![0.0, 0.0, 2.0, 0.0, 0.0]);
    }
}
