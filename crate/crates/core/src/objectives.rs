//! Lipschitz test objectives with exact constants and certified minima.
//!
//! Every [`Benchmark`] carries its Lipschitz constant, the global minimum over
//! the unit cube and one minimizer, so regret can be computed exactly.
//! Benchmarks are addressed from the command line with the mini-syntax
//! `family:key=value,key=v1;v2`, e.g. `cone:dim=2,L=1,center=0.3;0.7`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{euclidean, Point};

/// Anything that can be evaluated on the unit cube.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> f64;
}

/// Adapts a closure into an [`Objective`].
pub struct FnObjective<F> {
    dim: usize,
    f: F,
}

impl<F> FnObjective<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        FnObjective { dim, f }
    }
}

impl<F> Objective for FnObjective<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

/// One term `offset + slope·‖x − apex‖` of a multi-cone landscape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConePiece {
    pub apex: Vec<f64>,
    pub offset: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Landscape {
    /// `f ≡ value`.
    Constant { value: f64 },
    /// `slope·‖x − apex‖`.
    Cone { apex: Vec<f64>, slope: f64 },
    /// Zero everywhere except a linear well of depth `slope·radius` around `center`.
    Spike {
        center: Vec<f64>,
        slope: f64,
        radius: f64,
    },
    /// `Σ sin(2πk·x_i)`.
    Sine { frequency: u32 },
    /// Pointwise minimum of shifted cones.
    MultiCone { cones: Vec<ConePiece> },
}

impl Landscape {
    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Landscape::Constant { value } => *value,
            Landscape::Cone { apex, slope } => slope * euclidean(x, apex),
            Landscape::Spike {
                center,
                slope,
                radius,
            } => {
                let d = euclidean(x, center);
                if d <= *radius {
                    slope * (d - radius)
                } else {
                    0.0
                }
            }
            Landscape::Sine { frequency } => {
                let w = 2.0 * PI * f64::from(*frequency);
                x.iter().map(|xi| (w * xi).sin()).sum()
            }
            Landscape::MultiCone { cones } => cones
                .iter()
                .map(|c| c.offset + c.slope * euclidean(x, &c.apex))
                .fold(f64::INFINITY, f64::min),
        }
    }
}

/// A suite objective: landscape plus its exact constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Benchmark {
    id: String,
    dim: usize,
    lipschitz: f64,
    f_min: f64,
    x_min: Point,
    landscape: Landscape,
}

impl Objective for Benchmark {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        self.landscape.eval(x)
    }
}

impl Benchmark {
    /// Canonical id, parseable back with [`ObjectiveSpec`].
    pub fn id(&self) -> &str {
        &self.id
    }

    /// Exact Lipschitz constant with respect to the Euclidean norm.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn f_min(&self) -> f64 {
        self.f_min
    }

    pub fn x_min(&self) -> &Point {
        &self.x_min
    }

    pub fn landscape(&self) -> &Landscape {
        &self.landscape
    }

    pub fn constant(n: usize, value: f64) -> Result<Self> {
        check_dim(n)?;
        if !value.is_finite() {
            return Err(Error::param("c", "must be finite"));
        }
        Ok(Benchmark {
            id: format!("constant:dim={n},c={value}"),
            dim: n,
            lipschitz: 0.0,
            f_min: value,
            x_min: Point::new(vec![0.5; n])?,
            landscape: Landscape::Constant { value },
        })
    }

    /// `slope·‖x − center‖`, minimum 0 at `center`.
    pub fn cone(n: usize, slope: f64, center: &[f64]) -> Result<Self> {
        check_dim(n)?;
        check_positive("L", slope)?;
        let center = check_in_cube(n, center)?;
        Ok(Benchmark {
            id: format!("cone:dim={n},L={slope},center={}", join(&center)),
            dim: n,
            lipschitz: slope,
            f_min: 0.0,
            x_min: Point::new(center.clone())?,
            landscape: Landscape::Cone {
                apex: center,
                slope,
            },
        })
    }

    /// Flat-with-spike instance: `slope·(‖x − center‖ − eps)` inside the
    /// `eps`-ball, 0 outside. Minimum `−slope·eps` at `center`.
    pub fn adversarial_spike(n: usize, slope: f64, eps: f64, center: &[f64]) -> Result<Self> {
        check_dim(n)?;
        check_positive("L", slope)?;
        check_positive("eps", eps)?;
        let center = check_in_cube(n, center)?;
        Ok(Benchmark {
            id: format!("spike:dim={n},L={slope},eps={eps},center={}", join(&center)),
            dim: n,
            lipschitz: slope,
            f_min: -slope * eps,
            x_min: Point::new(center.clone())?,
            landscape: Landscape::Spike {
                center,
                slope,
                radius: eps,
            },
        })
    }

    /// `Σ sin(2πk·x_i)`, Lipschitz constant `2πk·√n`, minimum `−n` at `x_i = 3/(4k)`.
    pub fn separable_sine(n: usize, frequency: u32) -> Result<Self> {
        check_dim(n)?;
        if frequency == 0 {
            return Err(Error::param("k", "frequency must be a positive integer"));
        }
        let k = f64::from(frequency);
        Ok(Benchmark {
            id: format!("sine:dim={n},k={frequency}"),
            dim: n,
            lipschitz: 2.0 * PI * k * (n as f64).sqrt(),
            f_min: -(n as f64),
            x_min: Point::new(vec![3.0 / (4.0 * k); n])?,
            landscape: Landscape::Sine { frequency },
        })
    }

    /// `min_j (c_j + L_j‖x − p_j‖)` with apexes, offsets and slopes drawn from
    /// a seeded ChaCha8 stream. Each apex lies in the cube, so the minimum is
    /// the smallest offset, attained at its apex.
    pub fn random_multicone(n: usize, m: usize, seed: u64) -> Result<Self> {
        check_dim(n)?;
        if m == 0 {
            return Err(Error::param("m", "need at least one cone"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cones: Vec<ConePiece> = (0..m)
            .map(|_| {
                let apex = (0..n).map(|_| rng.gen::<f64>()).collect();
                let offset = rng.gen::<f64>();
                let slope = 0.5 + 1.5 * rng.gen::<f64>();
                ConePiece {
                    apex,
                    offset,
                    slope,
                }
            })
            .collect();
        let lipschitz = cones.iter().map(|c| c.slope).fold(0.0, f64::max);
        let best = cones
            .iter()
            .min_by(|a, b| a.offset.total_cmp(&b.offset))
            .expect("m >= 1");
        Ok(Benchmark {
            id: format!("multicone:dim={n},m={m},seed={seed}"),
            dim: n,
            lipschitz,
            f_min: best.offset,
            x_min: Point::new(best.apex.clone())?,
            landscape: Landscape::MultiCone { cones },
        })
    }
}

/// Deterministic, off-grid default location for cone apexes and spikes.
pub fn default_center(n: usize) -> Vec<f64> {
    const COORDS: [f64; 8] = [0.3, 0.7, 0.45, 0.62, 0.38, 0.55, 0.41, 0.66];
    (0..n).map(|i| COORDS[i % COORDS.len()]).collect()
}

/// The four families used by the audits and the regret experiments.
pub fn suite(n: usize) -> Result<Vec<Benchmark>> {
    let center = default_center(n);
    Ok(vec![
        Benchmark::cone(n, 1.0, &center)?,
        Benchmark::adversarial_spike(n, 1.0, 0.1, &center)?,
        Benchmark::separable_sine(n, 2)?,
        Benchmark::random_multicone(n, 5, 7)?,
    ])
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::ZeroDimension)
    } else {
        Ok(())
    }
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be positive, got {v}")))
    }
}

fn check_in_cube(n: usize, center: &[f64]) -> Result<Vec<f64>> {
    if center.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: center.len(),
        });
    }
    if center.iter().any(|c| !(0.0..=1.0).contains(c)) {
        return Err(Error::param("center", "must lie in the unit cube"));
    }
    Ok(center.to_vec())
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

/// Static description of an objective family, for `list-objectives`.
#[derive(Debug, Clone, Copy)]
pub struct FamilyInfo {
    pub name: &'static str,
    pub params: &'static str,
    pub summary: &'static str,
}

pub const FAMILIES: [FamilyInfo; 5] = [
    FamilyInfo {
        name: "cone",
        params: "dim, L=1, center=<default>",
        summary: "L·‖x − center‖",
    },
    FamilyInfo {
        name: "spike",
        params: "dim, L=1, eps=0.1, center=<default>",
        summary: "L·(‖x − center‖ − eps) inside the eps-ball, 0 outside",
    },
    FamilyInfo {
        name: "sine",
        params: "dim, k=1",
        summary: "Σ sin(2πk·x_i), L = 2πk√n",
    },
    FamilyInfo {
        name: "multicone",
        params: "dim, m=3, seed=7",
        summary: "min_j (c_j + L_j‖x − p_j‖), seeded parameters",
    },
    FamilyInfo {
        name: "constant",
        params: "dim, c=0",
        summary: "f ≡ c",
    },
];

/// Parsed `family:key=value,...` objective address.
///
/// `dim` may be left out and supplied later (sweeps instantiate one family
/// at several dimensions). A single `center` value is broadcast to every axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpec {
    pub family: String,
    params: BTreeMap<String, String>,
    raw: String,
}

impl FromStr for ObjectiveSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: &str| Error::BadObjectiveSpec {
            spec: s.to_string(),
            reason: reason.into(),
        };
        let s_trim = s.trim();
        let (family, rest) = match s_trim.split_once(':') {
            Some((f, r)) => (f.trim(), r.trim()),
            None => (s_trim, ""),
        };
        if !FAMILIES.iter().any(|f| f.name == family) {
            return Err(Error::UnknownObjective(family.to_string()));
        }
        let mut params = BTreeMap::new();
        for kv in rest.split(',').map(str::trim).filter(|kv| !kv.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| bad("expected key=value"))?;
            if params
                .insert(k.trim().to_string(), v.trim().to_string())
                .is_some()
            {
                return Err(bad(&format!("duplicate key `{}`", k.trim())));
            }
        }
        Ok(ObjectiveSpec {
            family: family.to_string(),
            params,
            raw: s.to_string(),
        })
    }
}

impl fmt::Display for ObjectiveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

impl ObjectiveSpec {
    pub fn dim(&self) -> Option<usize> {
        self.params.get("dim").and_then(|d| d.parse().ok())
    }

    /// Instantiates the benchmark. `dim` overrides the address's own `dim` key.
    pub fn build(&self, dim: Option<usize>) -> Result<Benchmark> {
        let bad = |reason: String| Error::BadObjectiveSpec {
            spec: self.raw.clone(),
            reason,
        };
        let allowed: &[&str] = match self.family.as_str() {
            "cone" => &["dim", "L", "center"],
            "spike" => &["dim", "L", "eps", "center"],
            "sine" => &["dim", "k"],
            "multicone" => &["dim", "m", "seed"],
            "constant" => &["dim", "c"],
            other => return Err(Error::UnknownObjective(other.to_string())),
        };
        if let Some(k) = self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(bad(format!("unknown key `{k}` for {}", self.family)));
        }

        let n = match dim {
            Some(n) => n,
            None => self
                .get::<usize>("dim")?
                .ok_or_else(|| bad("missing `dim`".into()))?,
        };
        match self.family.as_str() {
            "cone" => {
                let center = self.center(n)?;
                Benchmark::cone(n, self.get("L")?.unwrap_or(1.0), &center)
            }
            "spike" => {
                let center = self.center(n)?;
                let l = self.get("L")?.unwrap_or(1.0);
                Benchmark::adversarial_spike(n, l, self.get("eps")?.unwrap_or(0.1), &center)
            }
            "sine" => Benchmark::separable_sine(n, self.get("k")?.unwrap_or(1)),
            "multicone" => Benchmark::random_multicone(
                n,
                self.get("m")?.unwrap_or(3),
                self.get("seed")?.unwrap_or(7),
            ),
            _ => Benchmark::constant(n, self.get("c")?.unwrap_or(0.0)),
        }
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.params
            .get(key)
            .map(|v| {
                v.parse::<T>().map_err(|_| Error::BadObjectiveSpec {
                    spec: self.raw.clone(),
                    reason: format!("cannot parse `{key}={v}`"),
                })
            })
            .transpose()
    }

    fn center(&self, n: usize) -> Result<Vec<f64>> {
        let Some(raw) = self.params.get("center") else {
            return Ok(default_center(n));
        };
        let coords = raw
            .split(';')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::BadObjectiveSpec {
                spec: self.raw.clone(),
                reason: format!("cannot parse center `{raw}`"),
            })?;
        Ok(if coords.len() == 1 {
            vec![coords[0]; n]
        } else {
            coords
        })
    }
}
