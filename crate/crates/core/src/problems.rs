//! Finite-difference benchmark systems on uniform `n x n`-cell grids.
//!
//! Unknowns are the `(n-1)^2` interior nodes, numbered row-major with `x`
//! varying fastest. Every operator is scaled by `h^2` so the Laplacian part
//! has the stencil `(4, -1, -1, -1, -1)`.
//!
//! Blockwise coefficients are drawn from `ChaCha8Rng::seed_from_u64(seed)`,
//! one `(r0, r1)` pair per block in row-major block order, each uniform in
//! the open interval `(0, 1)`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProblemKind {
    /// `-a Δu = f` on `[0,1]^2`, `u = sin(πx) sin(πy)`.
    ConstPoisson,
    /// `-∇·(κ∇u) = 1` on `[0,1]^2` with blockwise diagonal κ.
    BlockDiffusion,
    /// `Δu + k²u = f` on `(-1,1)^2`, `u = sin(πx) cos(πy)`.
    Helmholtz,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::ConstPoisson => "poisson",
            ProblemKind::BlockDiffusion => "diffusion",
            ProblemKind::Helmholtz => "helmholtz",
        }
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "poisson" | "const_poisson" | "constpoisson" => Ok(ProblemKind::ConstPoisson),
            "diffusion" | "block_diffusion" | "blockdiffusion" => Ok(ProblemKind::BlockDiffusion),
            "helmholtz" => Ok(ProblemKind::Helmholtz),
            other => Err(Error::InvalidParameter(format!("unknown problem family `{other}`"))),
        }
    }
}

impl std::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    /// Cells per axis.
    pub n: usize,
    pub coeff_a: f64,
    pub wave_k: f64,
    /// Blocks per axis (`T`).
    pub blocks: usize,
    /// Multiscale exponent (`M`).
    pub multiscale: f64,
    pub seed: u64,
}

impl ProblemSpec {
    pub fn new(kind: ProblemKind, n: usize) -> Self {
        Self {
            kind,
            n,
            coeff_a: 1.0,
            wave_k: 2.0 * PI,
            blocks: 4,
            multiscale: 2.0,
            seed: 0,
        }
    }

    pub fn poisson(n: usize) -> Self {
        Self::new(ProblemKind::ConstPoisson, n)
    }

    pub fn helmholtz(n: usize) -> Self {
        Self::new(ProblemKind::Helmholtz, n)
    }

    pub fn block_diffusion(n: usize, blocks: usize, multiscale: f64, seed: u64) -> Self {
        Self {
            blocks,
            multiscale,
            seed,
            ..Self::new(ProblemKind::BlockDiffusion, n)
        }
    }

    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if self.blocks < 1 {
            return bad("blocks must be at least 1".into());
        }
        if !(self.multiscale >= 0.0) {
            return bad(format!("multiscale exponent must be >= 0, got {}", self.multiscale));
        }
        if !(self.wave_k > 0.0) {
            return bad(format!("wave number must be positive, got {}", self.wave_k));
        }
        if !self.coeff_a.is_finite() || self.coeff_a <= 0.0 {
            return bad(format!("coefficient a must be positive, got {}", self.coeff_a));
        }
        Ok(())
    }

    /// `key = value` text, one field per line.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "kind = {}", self.kind);
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "coeff_a = {:?}", self.coeff_a);
        let _ = writeln!(s, "wave_k = {:?}", self.wave_k);
        let _ = writeln!(s, "blocks = {}", self.blocks);
        let _ = writeln!(s, "multiscale = {:?}", self.multiscale);
        let _ = writeln!(s, "seed = {}", self.seed);
        s
    }

    /// Parses the `key = value` format. Missing keys keep their defaults;
    /// `kind` and `n` are required. Blank lines and `#` comments are ignored.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut kind = None;
        let mut n = None;
        let mut spec = Self::poisson(2);
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", ln + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let ln = ln + 1;
            match key {
                "kind" => kind = Some(value.parse::<ProblemKind>()?),
                "n" => n = Some(parse_value(key, value, ln)?),
                "coeff_a" => spec.coeff_a = parse_value(key, value, ln)?,
                "wave_k" => spec.wave_k = parse_value(key, value, ln)?,
                "blocks" => spec.blocks = parse_value(key, value, ln)?,
                "multiscale" => spec.multiscale = parse_value(key, value, ln)?,
                "seed" => spec.seed = parse_value(key, value, ln)?,
                other => return Err(Error::Parse(format!("line {ln}: unknown key `{other}`"))),
            }
        }
        spec.kind = kind.ok_or_else(|| Error::Parse("missing `kind`".into()))?;
        spec.n = n.ok_or_else(|| Error::Parse("missing `n`".into()))?;
        Ok(spec)
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad value `{value}` for `{key}`")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub a: CsrMatrix,
    pub b: Vec<f64>,
    /// Exact solution sampled at the interior nodes, when one is known.
    pub exact: Option<Vec<f64>>,
    pub spec: ProblemSpec,
}

impl ProblemInstance {
    pub fn dim(&self) -> usize {
        self.b.len()
    }
}

/// Dispatches on `spec.kind`.
pub fn assemble(spec: &ProblemSpec) -> Result<ProblemInstance> {
    match spec.kind {
        ProblemKind::ConstPoisson => assemble_const_poisson(spec),
        ProblemKind::BlockDiffusion => assemble_block_diffusion(spec),
        ProblemKind::Helmholtz => assemble_helmholtz(spec),
    }
}

fn check_kind(spec: &ProblemSpec, kind: ProblemKind) -> Result<()> {
    if spec.kind != kind {
        return Err(Error::InvalidParameter(format!(
            "expected a {kind} spec, got {}",
            spec.kind
        )));
    }
    spec.validate()
}

/// Five-point operator with diagonal `diag` and unit negative couplings on
/// the interior of an `n x n`-cell grid.
fn five_point(n: usize, diag: f64, off: f64) -> CsrMatrix {
    let m = n - 1;
    let mut t = Vec::with_capacity(5 * m * m);
    for j in 0..m {
        for i in 0..m {
            let row = i + j * m;
            if j > 0 {
                t.push((row, row - m, off));
            }
            if i > 0 {
                t.push((row, row - 1, off));
            }
            t.push((row, row, diag));
            if i + 1 < m {
                t.push((row, row + 1, off));
            }
            if j + 1 < m {
                t.push((row, row + m, off));
            }
        }
    }
    CsrMatrix::from_triplets(m * m, m * m, &t).expect("stencil indices are in range")
}

pub fn assemble_const_poisson(spec: &ProblemSpec) -> Result<ProblemInstance> {
    check_kind(spec, ProblemKind::ConstPoisson)?;
    let n = spec.n;
    let m = n - 1;
    let h = 1.0 / n as f64;
    let a_coef = spec.coeff_a;
    let a = five_point(n, 4.0 * a_coef, -a_coef);
    let mut b = Vec::with_capacity(m * m);
    let mut exact = Vec::with_capacity(m * m);
    for j in 1..n {
        for i in 1..n {
            let (x, y) = (i as f64 * h, j as f64 * h);
            let u = (PI * x).sin() * (PI * y).sin();
            exact.push(u);
            b.push(h * h * 2.0 * a_coef * PI * PI * u);
        }
    }
    Ok(ProblemInstance {
        a,
        b,
        exact: Some(exact),
        spec: spec.clone(),
    })
}

/// Per-block diagonal diffusion coefficients `(10^{M r0}, 10^{M r1})`,
/// row-major over the `T x T` blocks.
pub fn block_coefficients(spec: &ProblemSpec) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..spec.blocks * spec.blocks)
        .map(|_| {
            let r0: f64 = rng.sample(rand::distr::Open01);
            let r1: f64 = rng.sample(rand::distr::Open01);
            (10f64.powf(spec.multiscale * r0), 10f64.powf(spec.multiscale * r1))
        })
        .collect()
}

pub fn assemble_block_diffusion(spec: &ProblemSpec) -> Result<ProblemInstance> {
    check_kind(spec, ProblemKind::BlockDiffusion)?;
    let (n, t) = (spec.n, spec.blocks);
    if t > n {
        return Err(Error::InvalidParameter(format!(
            "{t} blocks per axis is finer than the {n}-cell grid"
        )));
    }
    let coeffs = block_coefficients(spec);
    // node (i, j) takes the coefficient of the block containing it
    let block_of = |i: usize| ((i * t) / n).min(t - 1);
    let kappa = |i: usize, j: usize| coeffs[block_of(i) + t * block_of(j)];
    let harmonic = |p: f64, q: f64| 2.0 * p * q / (p + q);
    let m = n - 1;
    let h = 1.0 / n as f64;
    let mut trip = Vec::with_capacity(5 * m * m);
    for j in 1..n {
        for i in 1..n {
            let row = (i - 1) + (j - 1) * m;
            let (kx, ky) = kappa(i, j);
            let faces = [
                (i - 1, j, harmonic(kx, kappa(i - 1, j).0)),
                (i + 1, j, harmonic(kx, kappa(i + 1, j).0)),
                (i, j - 1, harmonic(ky, kappa(i, j - 1).1)),
                (i, j + 1, harmonic(ky, kappa(i, j + 1).1)),
            ];
            let mut diag = 0.0;
            for (ni, nj, w) in faces {
                diag += w;
                if ni >= 1 && ni < n && nj >= 1 && nj < n {
                    trip.push((row, (ni - 1) + (nj - 1) * m, -w));
                }
            }
            trip.push((row, row, diag));
        }
    }
    let a = CsrMatrix::from_triplets(m * m, m * m, &trip)?;
    Ok(ProblemInstance {
        a,
        b: vec![h * h; m * m],
        exact: None,
        spec: spec.clone(),
    })
}

pub fn assemble_helmholtz(spec: &ProblemSpec) -> Result<ProblemInstance> {
    check_kind(spec, ProblemKind::Helmholtz)?;
    let n = spec.n;
    let m = n - 1;
    let h = 2.0 / n as f64;
    let k2 = spec.wave_k * spec.wave_k;
    let a = five_point(n, 4.0 - k2 * h * h, -1.0);
    let coord = |i: usize| -1.0 + i as f64 * h;
    let u = |x: f64, y: f64| (PI * x).sin() * (PI * y).cos();
    // Δu = -2π² u for this u, so f = (k² - 2π²) u
    let f = |x: f64, y: f64| (k2 - 2.0 * PI * PI) * u(x, y);
    let boundary = |i: usize, j: usize| -> f64 {
        if i == 0 || i == n {
            0.0
        } else if j == 0 || j == n {
            -(PI * coord(i)).sin()
        } else {
            unreachable!()
        }
    };
    let mut b = Vec::with_capacity(m * m);
    let mut exact = Vec::with_capacity(m * m);
    for j in 1..n {
        for i in 1..n {
            let (x, y) = (coord(i), coord(j));
            exact.push(u(x, y));
            let mut rhs = -h * h * f(x, y);
            for (ni, nj) in [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)] {
                if ni == 0 || ni == n || nj == 0 || nj == n {
                    rhs += boundary(ni, nj);
                }
            }
            b.push(rhs);
        }
    }
    Ok(ProblemInstance {
        a,
        b,
        exact: Some(exact),
        spec: spec.clone(),
    })
}
