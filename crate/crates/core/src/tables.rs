//! Tabulated densities and detection profiles, plus the plain-text format
//! they are loaded from.
//!
//! Density tables are two columns `θ f(θ)`; profile tables are three columns
//! `γ θ p(γ,θ)` forming a complete grid, γ-major. Columns are whitespace
//! separated, abscissae strictly increasing, `#` starts a comment.

use crate::error::{Error, Result};
use crate::numeric::integrate;
use crate::scalar::{clamp, Real};

/// Target number of nodes in the refined CDF used for inverse sampling.
const FINE_NODES: usize = 8192;

/// Piecewise-linear density f(θ) on [θ₀, θ_end] ⊆ [0, π], with precomputed
/// cumulative measure of 2π·f(θ)·sin θ for sampling and cap partitioning.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityTable<T> {
    points: Vec<(T, T)>,
    /// Raw cumulative measure at each node (node_cdf[0] = 0).
    node_cdf: Vec<T>,
    /// Total raw mass; 1 within tolerance for a valid cap density.
    total: T,
    /// Refined grid for inverse-CDF sampling: θ values and normalized CDF.
    fine_theta: Vec<T>,
    fine_cdf: Vec<T>,
}

impl<T: Real> DensityTable<T> {
    /// Build from `(θ, f(θ))` nodes. Requires at least two nodes, strictly
    /// increasing θ inside [0, π], nonnegative f, and unit total measure.
    pub fn new(points: Vec<(T, T)>) -> Result<Self> {
        Self::build(points, true)
    }

    /// Build, rescaling f so the total measure is exactly normalized.
    pub fn new_normalized(points: Vec<(T, T)>) -> Result<Self> {
        Self::build(points, false)
    }

    fn build(points: Vec<(T, T)>, strict: bool) -> Result<Self> {
        validate_axis(&points.iter().map(|p| p.0).collect::<Vec<_>>(), "theta")?;
        let first = points[0].0;
        let last = points[points.len() - 1].0;
        if first < T::zero() || last > T::PI() + T::state_tol() {
            return Err(Error::config(format!(
                "density abscissae must lie in [0, π], got [{first}, {last}]"
            )));
        }
        if points.iter().any(|&(_, f)| f < T::zero() || !f.is_finite()) {
            return Err(Error::config(
                "density values must be finite and >= 0".to_string(),
            ));
        }

        let mut points = points;
        let (node_cdf, total) = cumulative_mass(&points)?;
        if total <= T::zero() {
            return Err(Error::config("density carries no mass".to_string()));
        }
        let mut node_cdf = node_cdf;
        let mut total = total;
        if strict {
            if (total - T::one()).abs() > T::measure_tol() {
                return Err(Error::config(format!(
                    "density is not normalized: cap measure is {total}, expected 1 \
                     (rescale the table or load it with normalization enabled)"
                )));
            }
        } else {
            for p in &mut points {
                p.1 /= total;
            }
            for c in &mut node_cdf {
                *c /= total;
            }
            total = T::one();
        }

        let (fine_theta, fine_cdf) = refine_cdf(&points, &node_cdf, total);
        Ok(DensityTable {
            points,
            node_cdf,
            total,
            fine_theta,
            fine_cdf,
        })
    }

    pub fn theta0(&self) -> T {
        self.points[0].0
    }

    pub fn theta_end(&self) -> T {
        self.points[self.points.len() - 1].0
    }

    pub fn points(&self) -> &[(T, T)] {
        &self.points
    }

    pub fn total_mass(&self) -> T {
        self.total
    }

    /// Linear interpolation of f(θ); zero outside the tabulated support.
    pub fn density(&self, theta: T) -> T {
        if theta < self.theta0() || theta > self.theta_end() {
            return T::zero();
        }
        let i = cell_index(&self.points, theta);
        let (t0, f0) = self.points[i];
        let (t1, f1) = self.points[i + 1];
        if t1 == t0 {
            return f0;
        }
        let w = (theta - t0) / (t1 - t0);
        f0 + (f1 - f0) * w
    }

    /// Raw cumulative measure ∫ 2π f sinθ' dθ' from θ₀ up to `theta`.
    pub fn cumulative(&self, theta: T) -> Result<T> {
        if theta <= self.theta0() {
            return Ok(T::zero());
        }
        if theta >= self.theta_end() {
            return Ok(self.total);
        }
        let i = cell_index(&self.points, theta);
        let partial = cell_mass(&self.points, i, theta)?;
        Ok(self.node_cdf[i] + partial)
    }

    /// Normalized measure of [theta, π]: the mass fraction above `theta`.
    pub fn measure_from(&self, theta: T) -> Result<T> {
        Ok(clamp(
            (self.total - self.cumulative(theta)?) / self.total,
            T::zero(),
            T::one(),
        ))
    }

    /// Invert the normalized CDF on the refined grid: u in [0, 1).
    pub fn inverse_cdf(&self, u: T) -> T {
        let cdf = &self.fine_cdf;
        let n = cdf.len();
        // First index with cdf[i] >= u.
        let mut lo = 0usize;
        let mut hi = n - 1;
        while lo < hi {
            let mid = (lo + hi) / 2;
            if cdf[mid] < u {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        if lo == 0 {
            return self.fine_theta[0];
        }
        let (c0, c1) = (cdf[lo - 1], cdf[lo]);
        let (t0, t1) = (self.fine_theta[lo - 1], self.fine_theta[lo]);
        if c1 <= c0 {
            return t0;
        }
        t0 + (t1 - t0) * (u - c0) / (c1 - c0)
    }
}

/// Mass 2π ∫ f sinθ dθ of one cell up to `upper`, by adaptive quadrature on
/// the linearly interpolated density.
fn cell_mass<T: Real>(points: &[(T, T)], i: usize, upper: T) -> Result<T> {
    let (t0, f0) = points[i];
    let (t1, f1) = points[i + 1];
    if upper <= t0 {
        return Ok(T::zero());
    }
    let slope = if t1 == t0 {
        T::zero()
    } else {
        (f1 - f0) / (t1 - t0)
    };
    let f = move |t: T| {
        let lin = f0 + slope * (t - t0);
        T::two() * T::PI() * lin * t.sin()
    };
    integrate(f, t0, upper.min(t1), T::measure_tol() * T::lit(1e-4))
}

fn cumulative_mass<T: Real>(points: &[(T, T)]) -> Result<(Vec<T>, T)> {
    let mut cdf = Vec::with_capacity(points.len());
    let mut acc = T::zero();
    cdf.push(acc);
    for i in 0..points.len() - 1 {
        acc += cell_mass(points, i, points[i + 1].0)?;
        cdf.push(acc);
    }
    Ok((cdf, acc))
}

/// Subdivide each cell and accumulate a dense, normalized CDF for sampling.
fn refine_cdf<T: Real>(points: &[(T, T)], node_cdf: &[T], total: T) -> (Vec<T>, Vec<T>) {
    let cells = points.len() - 1;
    let per_cell = (FINE_NODES / cells).clamp(8, 512);
    let mut thetas = Vec::with_capacity(cells * per_cell + 1);
    let mut cdf = Vec::with_capacity(cells * per_cell + 1);
    thetas.push(points[0].0);
    cdf.push(T::zero());
    for i in 0..cells {
        let (t0, f0) = points[i];
        let (t1, f1) = points[i + 1];
        let slope = if t1 == t0 {
            T::zero()
        } else {
            (f1 - f0) / (t1 - t0)
        };
        let mut acc = node_cdf[i];
        let h = (t1 - t0) / T::lit(per_cell as f64);
        let mut prev = t0;
        for s in 1..=per_cell {
            let t = if s == per_cell {
                t1
            } else {
                t0 + h * T::lit(s as f64)
            };
            // Simpson on the sub-step is far below sampling resolution.
            let m = (prev + t) * T::half();
            let g = |x: T| (f0 + slope * (x - t0)) * x.sin() * T::two() * T::PI();
            acc += (t - prev) / T::lit(6.0) * (g(prev) + T::lit(4.0) * g(m) + g(t));
            thetas.push(t);
            cdf.push(clamp(acc / total, T::zero(), T::one()));
            prev = t;
        }
    }
    let n = cdf.len();
    cdf[n - 1] = T::one();
    (thetas, cdf)
}

fn cell_index<T: Real>(points: &[(T, T)], theta: T) -> usize {
    // Last cell whose left node is <= theta.
    let mut lo = 0usize;
    let mut hi = points.len() - 2;
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if points[mid].0 <= theta {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo
}

/// Bilinear p(γ, θ) on a complete rectangular grid, clamped at the edges.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable<T> {
    gammas: Vec<T>,
    thetas: Vec<T>,
    /// Row-major, γ-major: values[gi * thetas.len() + ti].
    values: Vec<T>,
}

impl<T: Real> ProfileTable<T> {
    pub fn new(gammas: Vec<T>, thetas: Vec<T>, values: Vec<T>) -> Result<Self> {
        validate_axis(&gammas, "gamma")?;
        validate_axis(&thetas, "theta")?;
        if values.len() != gammas.len() * thetas.len() {
            return Err(Error::config(format!(
                "profile grid needs {} x {} = {} values, got {}",
                gammas.len(),
                thetas.len(),
                gammas.len() * thetas.len(),
                values.len()
            )));
        }
        if values.iter().any(|&p| !(p >= T::zero() && p <= T::one())) {
            return Err(Error::config(
                "detection probabilities must lie in [0, 1]".to_string(),
            ));
        }
        Ok(ProfileTable {
            gammas,
            thetas,
            values,
        })
    }

    pub fn gammas(&self) -> &[T] {
        &self.gammas
    }

    pub fn thetas(&self) -> &[T] {
        &self.thetas
    }

    pub fn eval(&self, gamma: T, theta: T) -> T {
        let (gi, gw) = locate(&self.gammas, gamma);
        let (ti, tw) = locate(&self.thetas, theta);
        let nt = self.thetas.len();
        let at = |g: usize, t: usize| self.values[g * nt + t];
        let low = at(gi, ti) * (T::one() - tw) + at(gi, ti + 1) * tw;
        let high = at(gi + 1, ti) * (T::one() - tw) + at(gi + 1, ti + 1) * tw;
        low * (T::one() - gw) + high * gw
    }
}

/// Cell index and interpolation weight along one axis; clamps outside.
fn locate<T: Real>(axis: &[T], x: T) -> (usize, T) {
    if x <= axis[0] {
        return (0, T::zero());
    }
    let last = axis.len() - 1;
    if x >= axis[last] {
        return (last - 1, T::one());
    }
    let mut lo = 0usize;
    let mut hi = last - 1;
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if axis[mid] <= x {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let w = (x - axis[lo]) / (axis[lo + 1] - axis[lo]);
    (lo, w)
}

fn validate_axis<T: Real>(axis: &[T], name: &str) -> Result<()> {
    if axis.len() < 2 {
        return Err(Error::config(format!(
            "{name} axis needs at least two points"
        )));
    }
    if axis.iter().any(|v| !v.is_finite()) {
        return Err(Error::config(format!(
            "{name} axis contains a non-finite value"
        )));
    }
    if axis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config(format!(
            "{name} axis must be strictly increasing"
        )));
    }
    Ok(())
}

/// Parse whitespace-separated numeric rows, skipping blanks and `#` comments.
fn parse_rows<T: Real>(text: &str, columns: usize) -> Result<Vec<Vec<T>>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != columns {
            return Err(Error::config(format!(
                "line {}: expected {} columns, found {}",
                lineno + 1,
                columns,
                fields.len()
            )));
        }
        let mut row = Vec::with_capacity(columns);
        for f in &fields {
            let v: f64 = f.parse().map_err(|_| {
                Error::config(format!("line {}: '{f}' is not a number", lineno + 1))
            })?;
            row.push(T::lit(v));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::config("table contains no data rows".to_string()));
    }
    Ok(rows)
}

/// Parse a two-column `θ f(θ)` density table.
pub fn parse_density_table<T: Real>(text: &str) -> Result<Vec<(T, T)>> {
    Ok(parse_rows(text, 2)?
        .into_iter()
        .map(|r| (r[0], r[1]))
        .collect())
}

/// Parse a three-column `γ θ p` profile grid, γ-major, into axis vectors and
/// row-major values.
pub fn parse_profile_table<T: Real>(text: &str) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
    let rows = parse_rows(text, 3)?;
    let mut gammas: Vec<T> = Vec::new();
    for r in &rows {
        if gammas.last() != Some(&r[0]) {
            gammas.push(r[0]);
        }
    }
    if gammas.is_empty() {
        return Err(Error::config(
            "profile table has no gamma values".to_string(),
        ));
    }
    let per_gamma = rows.len() / gammas.len();
    if per_gamma == 0 || rows.len() % gammas.len() != 0 {
        return Err(Error::config(
            "profile rows do not form a complete gamma x theta grid".to_string(),
        ));
    }
    let thetas: Vec<T> = rows[..per_gamma].iter().map(|r| r[1]).collect();
    let mut values = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        let expected_gamma = gammas[i / per_gamma];
        let expected_theta = thetas[i % per_gamma];
        if r[0] != expected_gamma || r[1] != expected_theta {
            return Err(Error::config(format!(
                "profile grid is irregular at data row {}: expected gamma {expected_gamma}, \
                 theta {expected_theta}",
                i + 1
            )));
        }
        values.push(r[2]);
    }
    Ok((gammas, thetas, values))
}
