//! Spec strings: `name` or `name:key=value,key=value`.

use gme_core::zoo::{OracleTarget, StateSpec, SubspaceSpec};
use std::collections::BTreeMap;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct SpecError(pub String);

impl std::fmt::Display for SpecError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

struct Args<'a> {
    name: &'a str,
    values: BTreeMap<String, &'a str>,
}

impl<'a> Args<'a> {
    fn take(&mut self, key: &str) -> Option<&'a str> {
        self.values.remove(key)
    }

    fn float(&mut self, key: &str, default: Option<f64>) -> Result<f64, SpecError> {
        match self.take(key) {
            Some(v) => parse_real(v).ok_or_else(|| SpecError(format!("{}: `{key}={v}` is not a number", self.name))),
            None => default.ok_or_else(|| SpecError(format!("{}: missing key `{key}`", self.name))),
        }
    }

    fn int(&mut self, key: &str, default: Option<usize>) -> Result<usize, SpecError> {
        match self.take(key) {
            Some(v) => v
                .trim()
                .parse()
                .map_err(|_| SpecError(format!("{}: `{key}={v}` is not a non-negative integer", self.name))),
            None => default.ok_or_else(|| SpecError(format!("{}: missing key `{key}`", self.name))),
        }
    }

    fn finish(self) -> Result<(), SpecError> {
        match self.values.keys().next() {
            Some(k) => Err(SpecError(format!("{}: unknown key `{k}`", self.name))),
            None => Ok(()),
        }
    }
}

/// A number, `pi`, or a product/quotient of those such as `pi/2` or `3*pi/4`.
fn parse_real(s: &str) -> Option<f64> {
    let s = s.trim();
    let mut value = 1.0;
    let mut op = '*';
    let mut rest = s;
    loop {
        let end = rest.find(['*', '/']).unwrap_or(rest.len());
        let token = rest[..end].trim();
        let x = if token.eq_ignore_ascii_case("pi") { PI } else { token.parse::<f64>().ok()? };
        value = if op == '*' { value * x } else { value / x };
        if end == rest.len() {
            return value.is_finite().then_some(value);
        }
        op = rest.as_bytes()[end] as char;
        rest = &rest[end + 1..];
    }
}

fn split(s: &str) -> Result<Args<'_>, SpecError> {
    let (name, params) = match s.split_once(':') {
        Some((n, p)) => (n.trim(), p),
        None => (s.trim(), ""),
    };
    if name.is_empty() {
        return Err(SpecError("empty spec name".into()));
    }
    let mut values = BTreeMap::new();
    for item in params.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| SpecError(format!("{name}: expected key=value, got `{item}`")))?;
        let key = k.trim().to_ascii_lowercase();
        if values.insert(key.clone(), v).is_some() {
            return Err(SpecError(format!("{name}: key `{key}` given twice")));
        }
    }
    Ok(Args { name, values })
}

/// Parses a named state or subspace.
pub fn parse_spec(s: &str) -> Result<OracleTarget, SpecError> {
    let mut a = split(s)?;
    use OracleTarget::{State, Subspace};
    let target = match a.name.to_ascii_lowercase().as_str() {
        "bell" => State(StateSpec::Bell),
        "ghz" => State(StateSpec::Ghz { n: a.int("n", Some(3))? }),
        "w" => State(StateSpec::W),
        "w_tilde" => State(StateSpec::WTilde),
        "max_entangled" => State(StateSpec::MaxEntangled { d: a.int("d", None)? }),
        "dicke" => State(StateSpec::Dicke { n: a.int("n", None)?, m: a.int("m", None)? }),
        "isotropic" => State(StateSpec::Isotropic { d: a.int("d", None)?, f: a.float("f", None)? }),
        "werner" => State(StateSpec::Werner { d: a.int("d", None)?, alpha: a.float("alpha", None)? }),
        "horodecki" => State(StateSpec::Horodecki { a: a.float("a", None)? }),
        "upb_tiles_state" => State(StateSpec::UpbTilesState),
        "upb_shifts_state" => State(StateSpec::UpbShiftsState),
        "huber_ppt" => State(StateSpec::HuberPpt { d: a.int("d", None)? }),
        "dicke_mixture" => State(StateSpec::DickeMixture {
            n: a.int("n", None)?,
            k1: a.int("k1", None)?,
            k2: a.int("k2", None)?,
            r: a.float("r", None)?,
        }),
        "two_by_d_theta" => Subspace(SubspaceSpec::TwoByDTheta {
            d: a.int("d", None)?,
            theta: a.float("theta", None)?,
            xi: a.float("xi", Some(0.0))?,
        }),
        "johnston_4x4" => Subspace(SubspaceSpec::Johnston4x4),
        "bhat" => Subspace(SubspaceSpec::Bhat {
            d1: a.int("d1", None)?,
            d2: a.int("d2", None)?,
            d3: a.int("d3", None)?,
        }),
        "tiles_complement" => Subspace(SubspaceSpec::TilesComplement),
        "shifts_complement" => Subspace(SubspaceSpec::ShiftsComplement),
        other => return Err(SpecError(format!("unknown state or subspace `{other}`"))),
    };
    a.finish()?;
    let valid = match &target {
        State(s) => s.validate(),
        Subspace(s) => s.validate(),
    };
    valid.map_err(|e| SpecError(e.to_string()))?;
    Ok(target)
}
