//! Numerical surrogate of the monotone ladder `φ̂₁` and reverse iteration
//! of intervals.
//!
//! The surrogate is defined as the antiderivative of `Z̃²` from an anchor:
//! `φ̂₁(t) = φ̂₁(t₀) + ∫_{t₀}^t Z̃²(u) du`. With that definition the
//! change-of-variables identity behind every factorization formula holds
//! by construction, up to quadrature error.
//!
//! A table stores the cumulative integral on a grid no coarser than 0.05
//! in `t`; between nodes the integral is continued by the same fixed
//! Gauss–Kronrod rule used to build the panels, so queries agree with the
//! stored nodes to the last bit and the interpolant is monotone because
//! the integrand is nonnegative.

use crate::num::quad::{gk15_once, QuadError};
use crate::num::roots::RootError;
use crate::num::{KahanSum, Real};
use crate::zeta::{z_tilde_sq_unchecked, EvalConfig, ZetaError};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::path::Path;
use thiserror::Error;

/// Default anchor deficit constant `2 + ln 2π − 2γ`.
const ANCHOR_DEFICIT: f64 = 2.6834457366062795;

/// Hard floor on the build resolution, in units of t.
const MAX_RESOLUTION: f64 = 0.05;

#[derive(Debug, Error)]
pub enum LadderError {
    #[error("degenerate range [{t_lo}, {t_hi}]: need t_lo < t_hi")]
    EmptyRange { t_lo: f64, t_hi: f64 },
    #[error("t_lo = {t_lo} is below the configured cutoff t_min = {t_min}")]
    BelowCutoff { t_lo: f64, t_min: f64 },
    #[error("resolution {0} outside (0, 0.05]: coarser grids cannot resolve the weight oscillation")]
    ResolutionTooCoarse(f64),
    #[error("internal consistency: non-increasing cumulative integral at node {index}")]
    NonMonotone { index: usize },
    #[error("anchor too high: ladder value meets the identity line at t = {t}; lower the anchor value")]
    AnchorAboveIdentity { t: f64 },
    #[error("t = {t} outside table range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },
    #[error("y = {y} outside achievable ladder range [{lo}, {hi}]")]
    InverseOutOfRange { y: f64, lo: f64, hi: f64 },
    #[error("reverse iteration escaped the table at depth {depth}: needed preimage of {y}, achievable range [{lo}, {hi}]")]
    RangeEscape { depth: u32, y: f64, lo: f64, hi: f64 },
    #[error("cache parse error at line {line}: {message}")]
    CacheFormat { line: usize, message: String },
    #[error(transparent)]
    Zeta(#[from] ZetaError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Root(#[from] RootError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Tabulated surrogate ladder with inversion support.
#[derive(Debug, Clone)]
pub struct LadderTable<T: Real> {
    grid: Vec<T>,
    phi: Vec<T>,
    weight: Vec<T>,
    resolution: T,
    cfg: EvalConfig<T>,
}

/// An interval together with its reverse-iteration depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct IteratedInterval<T: Real> {
    pub r: u32,
    pub lo: T,
    pub hi: T,
}

impl<T: Real> IteratedInterval<T> {
    pub fn base(lo: T, hi: T) -> Self {
        Self { r: 0, lo, hi }
    }

    pub fn length(&self) -> T {
        self.hi - self.lo
    }

    pub fn contains(&self, t: T) -> bool {
        self.lo < t && t < self.hi
    }
}

/// Default anchor: `t₀ − (2 + ln 2π − 2γ) t₀ / ln t₀`, the mean deficit of
/// `Z̃²` below one at desk heights.
pub fn default_anchor<T: Real>(t0: T) -> T {
    t0 - T::of(ANCHOR_DEFICIT) * t0 / t0.ln()
}

/// Build a ladder table over `[t_lo, t_hi]` with panels no wider than
/// `resolution`, anchored at `default_anchor(t_lo)`.
pub fn build_ladder<T: Real>(
    t_lo: T,
    t_hi: T,
    resolution: T,
    cfg: &EvalConfig<T>,
) -> Result<LadderTable<T>, LadderError> {
    build_ladder_anchored(t_lo, t_hi, resolution, default_anchor(t_lo), cfg)
}

/// Build with an explicit anchor value `φ̂₁(t_lo)`.
pub fn build_ladder_anchored<T: Real>(
    t_lo: T,
    t_hi: T,
    resolution: T,
    anchor_phi: T,
    cfg: &EvalConfig<T>,
) -> Result<LadderTable<T>, LadderError> {
    if !(t_lo < t_hi) {
        return Err(LadderError::EmptyRange {
            t_lo: t_lo.to_f64().unwrap_or(f64::NAN),
            t_hi: t_hi.to_f64().unwrap_or(f64::NAN),
        });
    }
    if !(t_lo >= cfg.t_min) {
        return Err(LadderError::BelowCutoff {
            t_lo: t_lo.to_f64().unwrap_or(f64::NAN),
            t_min: cfg.t_min.to_f64().unwrap_or(f64::NAN),
        });
    }
    let res_f = resolution.to_f64().unwrap_or(f64::NAN);
    if !(res_f > 0.0 && res_f <= MAX_RESOLUTION) {
        return Err(LadderError::ResolutionTooCoarse(res_f));
    }

    let span = t_hi - t_lo;
    let n_panels = (span / resolution).ceil().to_f64().unwrap_or(0.0) as usize;
    let h = span / T::of(n_panels as f64);

    let weight_fn = |t: T| z_tilde_sq_unchecked(t, cfg);

    let mut grid = Vec::with_capacity(n_panels + 1);
    let mut phi = Vec::with_capacity(n_panels + 1);
    let mut weight = Vec::with_capacity(n_panels + 1);
    grid.push(t_lo);
    phi.push(anchor_phi);
    weight.push(weight_fn(t_lo));

    let mut cum = KahanSum::new();
    for i in 0..n_panels {
        let a = t_lo + h * T::of(i as f64);
        let b = if i + 1 == n_panels {
            t_hi
        } else {
            t_lo + h * T::of((i + 1) as f64)
        };
        // Refine a panel whose error estimate is out of proportion; with
        // panels at 0.05 the weight is smooth and this almost never fires.
        subdivide_panel(
            &weight_fn,
            a,
            b,
            cfg.quadrature_rel_tol,
            0,
            &mut |end, integral| {
                cum.add(integral);
                grid.push(end);
                phi.push(anchor_phi + cum.value());
                weight.push(weight_fn(end));
            },
        );
    }

    let table = LadderTable {
        grid,
        phi,
        weight,
        resolution,
        cfg: *cfg,
    };
    table.validate()?;
    Ok(table)
}

fn subdivide_panel<T: Real, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    rel_tol: T,
    depth: u32,
    emit: &mut impl FnMut(T, T),
) {
    let (v, err) = gk15_once(f, a, b);
    if depth >= 12 || err <= rel_tol * (v.abs() + (b - a)) {
        emit(b, v);
    } else {
        let mid = T::of(0.5) * (a + b);
        subdivide_panel(f, a, mid, rel_tol, depth + 1, emit);
        subdivide_panel(f, mid, b, rel_tol, depth + 1, emit);
    }
}

impl<T: Real> LadderTable<T> {
    fn validate(&self) -> Result<(), LadderError> {
        for i in 1..self.phi.len() {
            if !(self.phi[i] > self.phi[i - 1]) {
                return Err(LadderError::NonMonotone { index: i });
            }
        }
        for (t, p) in self.grid.iter().zip(&self.phi) {
            if !(*p < *t) {
                return Err(LadderError::AnchorAboveIdentity {
                    t: t.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(())
    }

    pub fn t_lo(&self) -> T {
        self.grid[0]
    }

    pub fn t_hi(&self) -> T {
        *self.grid.last().expect("nonempty grid")
    }

    /// Anchor pair `(t₀, φ̂₁(t₀))`.
    pub fn anchor(&self) -> (T, T) {
        (self.grid[0], self.phi[0])
    }

    /// Achievable range of `φ̂₁` over the table.
    pub fn phi_range(&self) -> (T, T) {
        (self.phi[0], *self.phi.last().expect("nonempty grid"))
    }

    /// Order of the in-panel continuation rule (Gauss–Kronrod point count).
    pub fn interpolation_order(&self) -> u32 {
        15
    }

    pub fn resolution(&self) -> T {
        self.resolution
    }

    pub fn config(&self) -> &EvalConfig<T> {
        &self.cfg
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Node triple `(t, φ̂₁(t), Z̃²(t))` at index `i`.
    pub fn node(&self, i: usize) -> (T, T, T) {
        (self.grid[i], self.phi[i], self.weight[i])
    }

    /// The ladder weight at `t`, for integrands composed with the table.
    pub fn weight_at(&self, t: T) -> T {
        z_tilde_sq_unchecked(t, &self.cfg)
    }

    fn panel_index(&self, t: T) -> usize {
        // Last node <= t; valid for t within range.
        match self
            .grid
            .binary_search_by(|g| g.partial_cmp(&t).expect("finite grid"))
        {
            Ok(i) => i,
            Err(i) => i - 1,
        }
    }

    /// `φ̂₁(t)` for `t` within the table range.
    pub fn phi1(&self, t: T) -> Result<T, LadderError> {
        let (lo, hi) = (self.t_lo(), self.t_hi());
        if !(t >= lo && t <= hi) {
            return Err(LadderError::OutOfRange {
                t: t.to_f64().unwrap_or(f64::NAN),
                lo: lo.to_f64().unwrap_or(f64::NAN),
                hi: hi.to_f64().unwrap_or(f64::NAN),
            });
        }
        let i = self.panel_index(t);
        if self.grid[i] == t {
            return Ok(self.phi[i]);
        }
        // t is strictly between nodes here, so i+1 is a valid node.
        let (partial, _) = gk15_once(|u| z_tilde_sq_unchecked(u, &self.cfg), self.grid[i], t);
        Ok(self.phi[i] + partial)
    }

    /// The unique `t` with `φ̂₁(t) = y`, by bracketed bisection on the
    /// monotone table.
    pub fn phi1_inv(&self, y: T) -> Result<T, LadderError> {
        let (plo, phi_hi) = self.phi_range();
        if !(y >= plo && y <= phi_hi) {
            return Err(LadderError::InverseOutOfRange {
                y: y.to_f64().unwrap_or(f64::NAN),
                lo: plo.to_f64().unwrap_or(f64::NAN),
                hi: phi_hi.to_f64().unwrap_or(f64::NAN),
            });
        }
        // Locate the bracketing panel in the monotone phi array.
        let idx = match self
            .phi
            .binary_search_by(|p| p.partial_cmp(&y).expect("finite phi"))
        {
            Ok(i) => return Ok(self.grid[i]),
            Err(i) => (i - 1).min(self.grid.len() - 2),
        };
        let (mut a, mut b) = (self.grid[idx], self.grid[idx + 1]);
        let base = self.phi[idx];
        let target = y - base;
        let partial = |t: T| gk15_once(|u| z_tilde_sq_unchecked(u, &self.cfg), self.grid[idx], t).0;
        // Bisection: the partial integral is monotone in t.
        let tol = self.cfg.rootfind_abs_tol;
        while b - a > tol {
            let mid = T::of(0.5) * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if partial(mid) < target {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok(T::of(0.5) * (a + b))
    }

    /// Apply `phi1_inv` `r` times to both endpoints of a base interval.
    pub fn reverse_interval(
        &self,
        base: IteratedInterval<T>,
        r: u32,
    ) -> Result<IteratedInterval<T>, LadderError> {
        let mut lo = base.lo;
        let mut hi = base.hi;
        for depth in 1..=r {
            lo = self.phi1_inv(lo).map_err(|e| escape_at(e, depth))?;
            hi = self.phi1_inv(hi).map_err(|e| escape_at(e, depth))?;
        }
        Ok(IteratedInterval {
            r: base.r + r,
            lo,
            hi,
        })
    }

    /// Write the table as CSV rows `(t, phi, z_tilde_sq)`; values use the
    /// shortest round-trip decimal form, so a reload is bit-exact.
    pub fn save_csv(&self, path: &Path) -> Result<(), LadderError> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "t,phi,z_tilde_sq")?;
        for i in 0..self.grid.len() {
            writeln!(out, "{},{},{}", self.grid[i], self.phi[i], self.weight[i])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Sidecar metadata for a saved table.
    pub fn sidecar(&self) -> LadderSidecar<T> {
        LadderSidecar {
            anchor_t: self.grid[0],
            anchor_phi: self.phi[0],
            t_lo: self.t_lo(),
            t_hi: self.t_hi(),
            resolution: self.resolution,
            interpolation_order: self.interpolation_order(),
            config: self.cfg,
        }
    }

    pub fn save(&self, csv_path: &Path) -> Result<(), LadderError>
    where
        T: Serialize,
    {
        self.save_csv(csv_path)?;
        let sidecar_path = sidecar_path(csv_path);
        let json = serde_json::to_string_pretty(&self.sidecar()).expect("sidecar serializes");
        std::fs::write(sidecar_path, json)?;
        Ok(())
    }

    /// Reload a table saved by [`LadderTable::save`].
    pub fn load(csv_path: &Path) -> Result<Self, LadderError>
    where
        T: serde::de::DeserializeOwned + std::str::FromStr,
        <T as std::str::FromStr>::Err: std::fmt::Display,
    {
        let sidecar: LadderSidecar<T> =
            serde_json::from_str(&std::fs::read_to_string(sidecar_path(csv_path))?).map_err(
                |e| LadderError::CacheFormat {
                    line: 0,
                    message: format!("sidecar: {e}"),
                },
            )?;
        let file = std::io::BufReader::new(std::fs::File::open(csv_path)?);
        let mut grid = Vec::new();
        let mut phi = Vec::new();
        let mut weight = Vec::new();
        for (lineno, line) in file.lines().enumerate() {
            let line = line?;
            if lineno == 0 {
                continue; // header
            }
            let mut parts = line.split(',');
            let mut next = |what: &str| -> Result<T, LadderError> {
                parts
                    .next()
                    .ok_or_else(|| LadderError::CacheFormat {
                        line: lineno + 1,
                        message: format!("missing {what}"),
                    })?
                    .parse::<T>()
                    .map_err(|e| LadderError::CacheFormat {
                        line: lineno + 1,
                        message: format!("{what}: {e}"),
                    })
            };
            grid.push(next("t")?);
            phi.push(next("phi")?);
            weight.push(next("z_tilde_sq")?);
        }
        let table = Self {
            grid,
            phi,
            weight,
            resolution: sidecar.resolution,
            cfg: sidecar.config,
        };
        table.validate()?;
        Ok(table)
    }
}

fn escape_at(e: LadderError, depth: u32) -> LadderError {
    match e {
        LadderError::InverseOutOfRange { y, lo, hi } => {
            LadderError::RangeEscape { depth, y, lo, hi }
        }
        other => other,
    }
}

fn sidecar_path(csv_path: &Path) -> std::path::PathBuf {
    let mut os = csv_path.as_os_str().to_owned();
    os.push(".json");
    std::path::PathBuf::from(os)
}

/// Metadata stored next to the CSV cache.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct LadderSidecar<T: Real> {
    pub anchor_t: T,
    pub anchor_phi: T,
    pub t_lo: T,
    pub t_hi: T,
    pub resolution: T,
    pub interpolation_order: u32,
    pub config: EvalConfig<T>,
}
