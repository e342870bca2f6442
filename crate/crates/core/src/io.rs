//! Document formats: JSON with reals as 17-significant-digit decimal strings,
//! and plain CSV sample files.

use std::fmt::Write as _;

/// Formats a real with 17 significant digits (`d.dddddddddddddddde±x`).
/// Round-trips every finite `f64` exactly; infinities print as `inf`/`-inf`.
pub fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// Parses a decimal string produced by [`fmt17`] (any `f64` literal is accepted).
pub fn parse17(s: &str) -> Result<f64, std::num::ParseFloatError> {
    s.trim().parse::<f64>()
}

/// Serde adapter for reals as decimal strings.
pub mod sig17 {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::fmt17(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let raw = String::deserialize(d)?;
        super::parse17(&raw).map_err(D::Error::custom)
    }

    pub mod vec {
        use serde::{de::Error as _, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for x in v {
                seq.serialize_element(&super::super::fmt17(*x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            let raw = Vec::<String>::deserialize(d)?;
            raw.iter()
                .map(|s| super::super::parse17(s).map_err(D::Error::custom))
                .collect()
        }
    }

    pub mod array4 {
        use serde::{de::Error as _, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &[f64; 4], s: S) -> Result<S::Ok, S::Error> {
            super::vec::serialize(v, s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[f64; 4], D::Error> {
            let v = super::vec::deserialize(d)?;
            v.try_into().map_err(|v: Vec<f64>| {
                D::Error::custom(format!("expected 4 reals, got {}", v.len()))
            })
        }
    }

    pub mod option {
        use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(x) => s.serialize_some(&super::super::fmt17(*x)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            let raw = Option::<String>::deserialize(d)?;
            raw.map(|s| super::super::parse17(&s).map_err(D::Error::custom))
                .transpose()
        }
    }
}

/// Two-column `x,value` CSV with a leading `# lambda=<value>` line.
pub fn samples_csv(lambda: f64, grid: &[f64], values: &[f64]) -> String {
    let mut out = String::with_capacity(grid.len() * 52 + 32);
    let _ = writeln!(out, "# lambda={}", fmt17(lambda));
    out.push_str("x,value\n");
    for (x, v) in grid.iter().zip(values) {
        let _ = writeln!(out, "{},{}", fmt17(*x), fmt17(*v));
    }
    out
}

/// Parses the output of [`samples_csv`] back into `(lambda, grid, values)`.
pub fn parse_samples_csv(text: &str) -> Option<(f64, Vec<f64>, Vec<f64>)> {
    let mut lines = text.lines();
    let lambda = parse17(lines.next()?.strip_prefix("# lambda=")?).ok()?;
    if lines.next()? != "x,value" {
        return None;
    }
    let mut grid = Vec::new();
    let mut values = Vec::new();
    for line in lines {
        let (x, v) = line.split_once(',')?;
        grid.push(parse17(x).ok()?);
        values.push(parse17(v).ok()?);
    }
    Some((lambda, grid, values))
}

/// Single-column CSV of reals under a header.
pub fn column_csv(header: &str, values: &[f64]) -> String {
    let mut out = String::with_capacity(values.len() * 26 + header.len() + 1);
    out.push_str(header);
    out.push('\n');
    for v in values {
        out.push_str(&fmt17(*v));
        out.push('\n');
    }
    out
}

/// Multi-column CSV; every row must have `header.len()` entries.
pub fn table_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| fmt17(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
