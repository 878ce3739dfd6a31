use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::BallGeometry;
use crate::quadrature::{QuadratureSpec, Scheme};

/// Every accepted key with its default value.
const KEYS: &[(&str, &str)] = &[
    ("geometry.n", "2"),
    ("geometry.ell", "1"),
    ("geometry.k", "1"),
    ("lambda", "0"),
    ("cutoff", "8"),
    ("levels", "6"),
    ("inner_cutoff", "12"),
    ("symbol.a", "r1^2"),
    ("symbol.c", "1 - abs2(zc)"),
    ("factorization.pairs", "r1^2 | 1; r1^2 | 1 - abs2(z); 1 - r1^2 | re(z1)"),
    ("factorization.cutoff", "6"),
    ("factorization.order", "48"),
    ("semicommutator.c1", "1 - abs2(z)"),
    ("semicommutator.c2", "1 - abs2(z)"),
    ("semicommutator.cutoff", "64"),
    ("mu.list", "1, 2, 4, 8, 16, 32"),
    ("berezin.corpus", "1 - abs2(z); re(z1)^2 + 2; (1 - abs2(z))^2 * im(z1)"),
    ("berezin.cutoff", "60"),
    ("berezin.mu", "0, 2, 8"),
    ("grid.radii", "0, 0.2, 0.4"),
    ("boundary.symbol", "1 - abs2(z)"),
    ("boundary.mu", "2"),
    ("boundary.steps", "6"),
    ("recovery.richardson", "false"),
    ("spectrum.symbols", "2 - abs2(z) | zc1 | 2 - abs2(z), 0; 0, 3 - abs2(z)"),
    ("spectrum.expect", "fredholm | not | fredholm"),
    ("spectrum.profile", "r1^2"),
    ("spectrum.random", "64"),
    ("spectrum.steps", "6"),
    ("spectrum.cutoffs", "2, 4, 6, 8"),
    ("spectrum.singular_threshold", "0.1"),
    ("quad.scheme", "gauss-jacobi"),
    ("quad.radial_order", "0"),
    ("quad.angular_order", "0"),
    ("quad.phase_points", "0"),
    ("quad.samples", "200000"),
    ("quad.seed", "0"),
    ("tol.closed", "1e-10"),
    ("tol.quadrature", "1e-6"),
    ("tol.factorization", "1e-5"),
    ("tol.mc_sigma", "5"),
    ("tol.block", "1e-8"),
    ("tol.norm", "1e-10"),
    ("tol.commutator", "1e-8"),
    ("tol.berezin", "1e-6"),
    ("tol.remainder", "1e-6"),
    ("tol.entry", "1e-10"),
    ("tol.boundary", "0.05"),
    ("tol.fredholm", "1e-6"),
    ("tol.spectrum", "1e-6"),
];

/// Suite-specific departures from the base defaults.
fn overlay(suite: &str) -> &'static [(&'static str, &'static str)] {
    match suite {
        "spectrum" => &[("geometry.n", "3"), ("geometry.ell", "1"), ("geometry.k", "1")],
        _ => &[],
    }
}

/// Flat `key = value` configuration with dotted section names.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    values: BTreeMap<String, String>,
}

impl ExperimentConfig {
    /// Base defaults with the overlay for `suite`.
    pub fn for_suite(suite: &str) -> Self {
        let mut values: BTreeMap<String, String> = KEYS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        for (k, v) in overlay(suite) {
            values.insert(k.to_string(), v.to_string());
        }
        Self { values }
    }

    pub fn keys() -> impl Iterator<Item = &'static str> {
        KEYS.iter().map(|(k, _)| *k)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !self.values.contains_key(key) {
            return Err(Error::config(format!("unknown key '{key}'")));
        }
        self.values.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    /// Apply `key = value` lines; `#` starts a comment, values may be quoted.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}: expected 'key = value'", i + 1)))?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::config(format!("line {}: duplicate key '{key}'", i + 1)));
            }
            let value = unquote(value.trim());
            self.set(key, value).map_err(|e| match e {
                Error::Config(m) => Error::config(format!("line {}: {m}", i + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Result<&str> {
        self.values.get(key).map(String::as_str).ok_or_else(|| Error::config(format!("unknown key '{key}'")))
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> Result<T> {
        let v = self.get(key)?;
        v.parse().map_err(|_| Error::config(format!("{key}: cannot read '{v}'")))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>> {
        let v = self.get(key)?;
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|_| Error::config(format!("{key}: cannot read '{s}'"))))
            .collect()
    }

    /// Items separated by `sep`, trimmed, empty items dropped.
    pub fn items(&self, key: &str, sep: char) -> Result<Vec<String>> {
        Ok(self.get(key)?.split(sep).map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
    }

    pub fn geometry(&self) -> Result<BallGeometry> {
        BallGeometry::new(self.parse("geometry.n")?, self.parse("geometry.ell")?, self.list("geometry.k")?)
    }

    /// Quadrature spec; zero orders mean "pick from the cutoff".
    pub fn quadrature(&self, cutoff: u32) -> Result<QuadratureSpec> {
        let mut spec = QuadratureSpec::for_cutoff(cutoff);
        spec.scheme = self.parse::<Scheme>("quad.scheme")?;
        let radial: usize = self.parse("quad.radial_order")?;
        let angular: usize = self.parse("quad.angular_order")?;
        if radial > 0 {
            spec.radial_order = radial;
        }
        if angular > 0 {
            spec.angular_order = angular;
        }
        spec.phase_points = self.parse("quad.phase_points")?;
        spec.samples = self.parse("quad.samples")?;
        spec.seed = self.parse("quad.seed")?;
        spec.validate()?;
        Ok(spec)
    }

    /// Checks that do not depend on a particular suite.
    pub fn validate(&self) -> Result<()> {
        self.geometry()?;
        let lambda: f64 = self.parse("lambda")?;
        if !(lambda > -1.0) {
            return Err(Error::config(format!("lambda must exceed -1, got {lambda}")));
        }
        self.quadrature(self.parse("cutoff")?)?;
        Ok(())
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.values {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, ch) in line.char_indices() {
        match ch {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn unquote(v: &str) -> &str {
    v.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects() {
        let mut c = ExperimentConfig::for_suite("norm");
        c.apply_text("# comment\ngeometry.n = 3\nquad.scheme = \"mc\"   # trailing\nsymbol.c = \"1 - abs2(zc)\"\n").unwrap();
        assert_eq!(c.get("geometry.n").unwrap(), "3");
        assert_eq!(c.parse::<Scheme>("quad.scheme").unwrap(), Scheme::MonteCarlo);
        assert!(matches!(ExperimentConfig::for_suite("norm").apply_text("bogus = 1"), Err(Error::Config(_))));
        assert!(ExperimentConfig::for_suite("norm").apply_text("lambda = 1\nlambda = 2").is_err());
        assert!(ExperimentConfig::for_suite("norm").apply_text("lambda 1").is_err());
        assert_eq!(c.list::<f64>("mu.list").unwrap(), vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0]);
        assert_eq!(c.items("factorization.pairs", ';').unwrap().len(), 3);
    }

    #[test]
    fn suites_have_their_own_defaults() {
        assert_eq!(ExperimentConfig::for_suite("spectrum").geometry().unwrap().n(), 3);
        assert_eq!(ExperimentConfig::for_suite("norm").geometry().unwrap().n(), 2);
        let text = ExperimentConfig::for_suite("norm").to_string();
        assert_eq!(text.lines().count(), ExperimentConfig::keys().count());
    }

    #[test]
    fn quadrature_from_config() {
        let mut c = ExperimentConfig::for_suite("norm");
        assert_eq!(c.quadrature(6).unwrap().radial_order, 14);
        c.set("quad.radial_order", "40").unwrap();
        assert_eq!(c.quadrature(6).unwrap().radial_order, 40);
        c.set("quad.samples", "0").unwrap();
        assert!(c.quadrature(6).is_err());
    }
}
