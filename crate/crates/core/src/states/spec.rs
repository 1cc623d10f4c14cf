//! Text form of state specifications.
//!
//! ```text
//! spec   := "file:" PATH | family (":" item)*
//! item   := N "x" D            parties × local dimension
//!         | key "=" number
//! family := ghz | w | dicke | cluster4 | bell | isotropic | werner
//!         | horodecki3x3 | horodecki2x4 | gamma | maximally_mixed
//!         | random | random_pure
//! ```
//!
//! Keys: `a`, `b` (Horodecki), `theta` (gamma), `t` (isotropic, werner),
//! `k` (dicke excitations), `seed` (random families). Everything after
//! `file:` is the path. `Display` prints the canonical form, which parses
//! back to the same spec.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hermitian::PartitionedState;

#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    Ghz { n: usize, d: usize },
    W { n: usize, d: usize },
    Dicke { n: usize, k: usize },
    Cluster4,
    Bell,
    Isotropic { d: usize, t: f64 },
    Werner { d: usize, t: f64 },
    Horodecki3x3 { a: f64 },
    Horodecki2x4 { b: f64 },
    Gamma { theta: f64 },
    MaximallyMixed { n: usize, d: usize },
    Random { n: usize, d: usize, seed: u64 },
    RandomPure { n: usize, d: usize, seed: u64 },
    File(String),
}

#[derive(Default)]
struct Items {
    shape: Option<(usize, usize)>,
    keys: Vec<(String, f64)>,
}

impl Items {
    fn take(&mut self, key: &str) -> Option<f64> {
        let pos = self.keys.iter().position(|(k, _)| k == key)?;
        Some(self.keys.remove(pos).1)
    }

    fn require(&mut self, family: &str, key: &str) -> Result<f64> {
        self.take(key)
            .ok_or_else(|| Error::parse(format!("{family}: missing parameter {key}=")))
    }

    fn finish(self, family: &str) -> Result<()> {
        match self.keys.first() {
            Some((k, _)) => Err(Error::parse(format!("{family}: unknown parameter {k}"))),
            None => Ok(()),
        }
    }

    fn no_shape(&self, family: &str) -> Result<()> {
        match self.shape {
            Some(_) => Err(Error::parse(format!("{family} takes no NxD shape"))),
            None => Ok(()),
        }
    }
}

fn parse_count(s: &str, what: &str) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|_| Error::parse(format!("{what} must be a positive integer, got {s:?}")))
}

fn as_count(x: f64, key: &str) -> Result<usize> {
    if x >= 0.0 && x.fract() == 0.0 && x <= 1e9 {
        Ok(x as usize)
    } else {
        Err(Error::parse(format!("{key} must be a nonnegative integer, got {x}")))
    }
}

fn as_seed(x: &str) -> Result<u64> {
    x.parse::<u64>()
        .map_err(|_| Error::parse(format!("seed must be an unsigned integer, got {x:?}")))
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(path) = s.strip_prefix("file:") {
            if path.is_empty() {
                return Err(Error::parse("file: needs a path"));
            }
            return Ok(StateSpec::File(path.to_string()));
        }
        let mut parts = s.split(':');
        let family = parts.next().unwrap_or_default().to_ascii_lowercase();
        if family.is_empty() {
            return Err(Error::parse("empty state spec"));
        }
        let mut items = Items::default();
        let mut seed: Option<u64> = None;
        for part in parts {
            if let Some((k, v)) = part.split_once('=') {
                let k = k.trim().to_ascii_lowercase();
                let v = v.trim();
                if k == "seed" {
                    seed = Some(as_seed(v)?);
                    continue;
                }
                let x: f64 = v
                    .parse()
                    .map_err(|_| Error::parse(format!("{k}: not a number: {v:?}")))?;
                if !x.is_finite() {
                    return Err(Error::parse(format!("{k}: value must be finite")));
                }
                if items.keys.iter().any(|(kk, _)| *kk == k) {
                    return Err(Error::parse(format!("{k} given twice")));
                }
                items.keys.push((k, x));
            } else if let Some((n, d)) = part.split_once(['x', 'X']) {
                if items.shape.is_some() {
                    return Err(Error::parse("shape given twice"));
                }
                items.shape = Some((parse_count(n, "parties")?, parse_count(d, "dimension")?));
            } else {
                return Err(Error::parse(format!("unexpected item {part:?}")));
            }
        }
        let f = family.as_str();
        let shape = items.shape;
        let spec = match f {
            "ghz" => {
                let (n, d) = shape.unwrap_or((3, 2));
                StateSpec::Ghz { n, d }
            }
            "w" => {
                let (n, d) = shape.unwrap_or((3, 2));
                StateSpec::W { n, d }
            }
            "dicke" => {
                let (n, d) = shape.unwrap_or((4, 2));
                if d != 2 {
                    return Err(Error::parse("dicke states are defined for qubits only"));
                }
                let k = as_count(items.take("k").unwrap_or(2.0), "k")?;
                StateSpec::Dicke { n, k }
            }
            "cluster4" => {
                items.no_shape(f)?;
                StateSpec::Cluster4
            }
            "bell" => {
                items.no_shape(f)?;
                StateSpec::Bell
            }
            "isotropic" | "werner" => {
                let (n, d) = shape.unwrap_or((2, 2));
                if n != 2 {
                    return Err(Error::parse(format!("{f} states are bipartite")));
                }
                let t = items.take("t").unwrap_or(1.0);
                if f == "isotropic" {
                    StateSpec::Isotropic { d, t }
                } else {
                    StateSpec::Werner { d, t }
                }
            }
            "horodecki3x3" => {
                items.no_shape(f)?;
                StateSpec::Horodecki3x3 {
                    a: items.require(f, "a")?,
                }
            }
            "horodecki2x4" => {
                items.no_shape(f)?;
                StateSpec::Horodecki2x4 {
                    b: items.require(f, "b")?,
                }
            }
            "gamma" | "gamma_theta" => {
                items.no_shape(f)?;
                StateSpec::Gamma {
                    theta: items.require(f, "theta")?,
                }
            }
            "maximally_mixed" | "mixed" => {
                let (n, d) = shape.unwrap_or((2, 2));
                StateSpec::MaximallyMixed { n, d }
            }
            "random" | "random_pure" => {
                let (n, d) = shape.unwrap_or((2, 2));
                let seed = seed.ok_or_else(|| Error::parse(format!("{f}: missing seed=")))?;
                if f == "random" {
                    StateSpec::Random { n, d, seed }
                } else {
                    StateSpec::RandomPure { n, d, seed }
                }
            }
            other => return Err(Error::parse(format!("unknown state family {other:?}"))),
        };
        if seed.is_some() && !matches!(spec, StateSpec::Random { .. } | StateSpec::RandomPure { .. }) {
            return Err(Error::parse(format!("{f} takes no seed")));
        }
        items.finish(f)?;
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Ghz { n, d } => write!(f, "ghz:{n}x{d}"),
            StateSpec::W { n, d } => write!(f, "w:{n}x{d}"),
            StateSpec::Dicke { n, k } => write!(f, "dicke:{n}x2:k={k}"),
            StateSpec::Cluster4 => write!(f, "cluster4"),
            StateSpec::Bell => write!(f, "bell"),
            StateSpec::Isotropic { d, t } => write!(f, "isotropic:2x{d}:t={t:?}"),
            StateSpec::Werner { d, t } => write!(f, "werner:2x{d}:t={t:?}"),
            StateSpec::Horodecki3x3 { a } => write!(f, "horodecki3x3:a={a:?}"),
            StateSpec::Horodecki2x4 { b } => write!(f, "horodecki2x4:b={b:?}"),
            StateSpec::Gamma { theta } => write!(f, "gamma:theta={theta:?}"),
            StateSpec::MaximallyMixed { n, d } => write!(f, "maximally_mixed:{n}x{d}"),
            StateSpec::Random { n, d, seed } => write!(f, "random:{n}x{d}:seed={seed}"),
            StateSpec::RandomPure { n, d, seed } => write!(f, "random_pure:{n}x{d}:seed={seed}"),
            StateSpec::File(p) => write!(f, "file:{p}"),
        }
    }
}

impl StateSpec {
    /// Checks parameter ranges without building the state.
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, x: f64| {
            if (0.0..=1.0).contains(&x) {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must lie in [0, 1], got {x}")))
            }
        };
        let shape = |n: usize, d: usize, min_n: usize| {
            if n < min_n || d < 2 || (d as f64).powi(n as i32) > 4096.0 {
                Err(Error::invalid(format!("unsupported shape {n}x{d}")))
            } else {
                Ok(())
            }
        };
        match *self {
            StateSpec::Ghz { n, d } | StateSpec::W { n, d } => shape(n, d, 2),
            StateSpec::Dicke { n, k } => {
                shape(n, 2, 2)?;
                if k == 0 || k >= n {
                    return Err(Error::invalid(format!("dicke k must be in 1..{n}, got {k}")));
                }
                Ok(())
            }
            StateSpec::Isotropic { d, t } | StateSpec::Werner { d, t } => {
                shape(2, d, 2)?;
                unit("t", t)
            }
            StateSpec::Horodecki3x3 { a } => unit("a", a),
            StateSpec::Horodecki2x4 { b } => unit("b", b),
            StateSpec::Gamma { theta } => {
                if (0.0..std::f64::consts::TAU).contains(&theta) {
                    Ok(())
                } else {
                    Err(Error::invalid(format!("theta must lie in [0, 2π), got {theta}")))
                }
            }
            StateSpec::MaximallyMixed { n, d }
            | StateSpec::Random { n, d, .. }
            | StateSpec::RandomPure { n, d, .. } => shape(n, d, 1),
            StateSpec::Cluster4 | StateSpec::Bell | StateSpec::File(_) => Ok(()),
        }
    }

    pub fn make_state(&self) -> Result<PartitionedState> {
        self.validate()?;
        match *self {
            StateSpec::Ghz { n, d } => super::ghz(n, d),
            StateSpec::W { n, d } => super::w_state(n, d),
            StateSpec::Dicke { n, k } => super::dicke(n, k),
            StateSpec::Cluster4 => Ok(super::cluster4()),
            StateSpec::Bell => Ok(super::bell()),
            StateSpec::Isotropic { d, t } => super::isotropic(d, t),
            StateSpec::Werner { d, t } => super::werner(d, t),
            StateSpec::Horodecki3x3 { a } => super::horodecki3x3(a),
            StateSpec::Horodecki2x4 { b } => super::horodecki2x4(b),
            StateSpec::Gamma { theta } => Ok(super::gamma_family(theta)),
            StateSpec::MaximallyMixed { n, d } => super::maximally_mixed(vec![d; n]),
            StateSpec::Random { n, d, seed } => super::random_density(vec![d; n], seed),
            StateSpec::RandomPure { n, d, seed } => super::random_pure(vec![d; n], seed),
            StateSpec::File(ref path) => {
                let op = crate::io::read_matrix(path)?;
                PartitionedState::new(op).map_err(|e| e.context(path))
            }
        }
    }

    /// Family name and its scalar sweep parameter, if any.
    pub fn sweep_parameter(&self) -> Option<(&'static str, f64)> {
        match *self {
            StateSpec::Isotropic { t, .. } | StateSpec::Werner { t, .. } => Some(("t", t)),
            StateSpec::Horodecki3x3 { a } => Some(("a", a)),
            StateSpec::Horodecki2x4 { b } => Some(("b", b)),
            StateSpec::Gamma { theta } => Some(("theta", theta)),
            _ => None,
        }
    }

    /// Copy with the sweep parameter replaced.
    pub fn with_parameter(&self, x: f64) -> Result<StateSpec> {
        let s = match *self {
            StateSpec::Isotropic { d, .. } => StateSpec::Isotropic { d, t: x },
            StateSpec::Werner { d, .. } => StateSpec::Werner { d, t: x },
            StateSpec::Horodecki3x3 { .. } => StateSpec::Horodecki3x3 { a: x },
            StateSpec::Horodecki2x4 { .. } => StateSpec::Horodecki2x4 { b: x },
            StateSpec::Gamma { .. } => StateSpec::Gamma { theta: x },
            _ => return Err(Error::invalid(format!("{self} has no scalar parameter"))),
        };
        s.validate()?;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_examples_parse() {
        let cases = [
            ("ghz:3x2", StateSpec::Ghz { n: 3, d: 2 }),
            ("w:3x3", StateSpec::W { n: 3, d: 3 }),
            ("dicke:4x2:k=2", StateSpec::Dicke { n: 4, k: 2 }),
            ("cluster4", StateSpec::Cluster4),
            ("horodecki3x3:a=0.25", StateSpec::Horodecki3x3 { a: 0.25 }),
            ("horodecki2x4:b=0.25", StateSpec::Horodecki2x4 { b: 0.25 }),
            ("gamma:theta=0.48", StateSpec::Gamma { theta: 0.48 }),
            ("file:some/dir/rho.json", StateSpec::File("some/dir/rho.json".into())),
            ("bell", StateSpec::Bell),
            ("isotropic:2x3:t=0.5", StateSpec::Isotropic { d: 3, t: 0.5 }),
            ("random:2x2:seed=4", StateSpec::Random { n: 2, d: 2, seed: 4 }),
        ];
        for (text, want) in cases {
            let got: StateSpec = text.parse().unwrap();
            assert_eq!(got, want, "{text}");
            let again: StateSpec = got.to_string().parse().unwrap();
            assert_eq!(again, got);
        }
    }

    #[test]
    fn rejects_bad_specs() {
        for bad in [
            "",
            "nope",
            "ghz:3",
            "ghz:ax2",
            "horodecki2x4",
            "horodecki2x4:b=2",
            "horodecki2x4:b=0.1:b=0.2",
            "gamma:theta=7",
            "bell:t=0.3",
            "isotropic:3x3",
            "random:2x2",
            "ghz:3x2:seed=1",
            "dicke:4x2:k=4",
            "dicke:4x3",
            "file:",
            "ghz:3x2:zz",
            "gamma:theta=nan",
        ] {
            assert!(bad.parse::<StateSpec>().is_err(), "{bad:?} should fail");
        }
    }

    #[test]
    fn file_keeps_colons_in_path() {
        let s: StateSpec = "file:C:/x:y.json".parse().unwrap();
        assert_eq!(s, StateSpec::File("C:/x:y.json".into()));
    }

    #[test]
    fn make_state_matches_constructors() {
        let s: StateSpec = "ghz:3x2".parse().unwrap();
        assert_eq!(s.make_state().unwrap(), super::super::ghz(3, 2).unwrap());
        let h: StateSpec = "horodecki2x4:b=0.25".parse().unwrap();
        assert_eq!(h.make_state().unwrap(), super::super::horodecki2x4(0.25).unwrap());
        assert_eq!(h.with_parameter(0.5).unwrap(), StateSpec::Horodecki2x4 { b: 0.5 });
    }
}
