//! Jump measures and their Poisson mark samplers.
//!
//! A `LevyMeasureSpec` is a finite-activity jump measure `nu` split at a
//! truncation radius `c` into a small-jump region `{|y| < c}` and a
//! large-jump region `{|y| >= c}`. On an operational increment `dE` the
//! marks in a region arrive as a Poisson count with mean `mass * dE`, i.i.d.
//! from `nu` restricted to the region.
//!
//! Infinite-activity measures are rejected at construction: silently
//! truncating one would corrupt every criteria constant downstream.

use rand::Rng;
use rand_distr::{Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::math::{normal_cdf, normal_pdf};
use crate::quad::{adaptive_simpson_multi, QuadResult, DEFAULT_TOL};

/// Effective support radius for the Gaussian measure: the pdf below 1e-36
/// contributes nothing at the quadrature tolerances in use.
const NORMAL_SUPPORT: f64 = 13.0;

/// Density family of the jump measure.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureKind {
    /// Uniform probability density on [0, 1].
    Uniform01,
    /// Standard normal probability density.
    StdNormal,
    /// User-supplied density tabulated on a grid, linearly interpolated.
    Tabulated(TabulatedDensity),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpRegion {
    Small,
    Large,
}

/// Tabulated density on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDensity {
    ys: Vec<f64>,
    densities: Vec<f64>,
}

impl TabulatedDensity {
    pub fn new(ys: Vec<f64>, densities: Vec<f64>) -> Result<Self> {
        if ys.len() != densities.len() || ys.len() < 2 {
            return Err(Error::InvalidSpec(
                "tabulated density needs >= 2 aligned points".into(),
            ));
        }
        if ys.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSpec(
                "tabulated y grid must be strictly increasing".into(),
            ));
        }
        if densities.iter().any(|&d| !(d >= 0.0) || !d.is_finite()) {
            return Err(Error::InvalidSpec(
                "tabulated density must be finite and nonnegative".into(),
            ));
        }
        Ok(Self { ys, densities })
    }

    /// Parse CSV text with header `y,density`.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut ys = Vec::new();
        let mut ds = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if i == 0 && line.starts_with("y,") {
                continue;
            }
            let mut parts = line.split(',');
            let (y, d) = match (parts.next(), parts.next()) {
                (Some(y), Some(d)) => (y.trim(), d.trim()),
                _ => {
                    return Err(Error::InvalidSpec(format!(
                        "line {}: expected y,density",
                        i + 1
                    )))
                }
            };
            let y: f64 = y
                .parse()
                .map_err(|_| Error::InvalidSpec(format!("line {}: bad y value {y:?}", i + 1)))?;
            let d: f64 = d
                .parse()
                .map_err(|_| Error::InvalidSpec(format!("line {}: bad density {d:?}", i + 1)))?;
            ys.push(y);
            ds.push(d);
        }
        Self::new(ys, ds)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.ys[0], *self.ys.last().unwrap())
    }

    pub fn density(&self, y: f64) -> f64 {
        let (lo, hi) = self.support();
        if y < lo || y > hi {
            return 0.0;
        }
        let i = match self.ys.binary_search_by(|v| v.total_cmp(&y)) {
            Ok(i) => return self.densities[i],
            Err(i) => i,
        };
        let (y0, y1) = (self.ys[i - 1], self.ys[i]);
        let (d0, d1) = (self.densities[i - 1], self.densities[i]);
        d0 + (d1 - d0) * (y - y0) / (y1 - y0)
    }
}

/// Inverse-CDF table over a union of intervals of one region.
#[derive(Debug, Clone, PartialEq)]
struct CdfTable {
    ys: Vec<f64>,
    cdf: Vec<f64>, // unnormalized, ends at the region mass
}

const CDF_POINTS: usize = 4096;

impl CdfTable {
    fn build(density: &TabulatedDensity, intervals: &[(f64, f64)]) -> Self {
        let total_len: f64 = intervals.iter().map(|(a, b)| b - a).sum();
        let mut ys = Vec::with_capacity(CDF_POINTS + intervals.len());
        let mut cdf = Vec::with_capacity(CDF_POINTS + intervals.len());
        let mut acc = 0.0;
        for &(a, b) in intervals {
            let n = ((CDF_POINTS as f64) * (b - a) / total_len).ceil().max(8.0) as usize;
            let h = (b - a) / n as f64;
            if ys.is_empty() {
                ys.push(a);
                cdf.push(0.0);
            } else {
                ys.push(a);
                cdf.push(acc);
            }
            let mut prev = density.density(a);
            for i in 1..=n {
                let y = a + h * i as f64;
                let d = density.density(y);
                acc += 0.5 * (prev + d) * h; // trapezoid on the interpolant
                ys.push(y);
                cdf.push(acc);
                prev = d;
            }
        }
        Self { ys, cdf }
    }

    fn mass(&self) -> f64 {
        *self.cdf.last().unwrap()
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = rng.random::<f64>() * self.mass();
        let i = match self.cdf.binary_search_by(|v| v.total_cmp(&u)) {
            Ok(i) => i,
            Err(i) => i.min(self.cdf.len() - 1).max(1),
        };
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let (y0, y1) = (self.ys[i - 1], self.ys[i]);
        if c1 > c0 {
            y0 + (y1 - y0) * (u - c0) / (c1 - c0)
        } else {
            y0
        }
    }
}

/// Jump measure with truncation radius and cached region masses.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyMeasureSpec {
    kind: MeasureKind,
    cutoff: f64,
    small_mass: f64,
    large_mass: f64,
    small_cdf: Option<CdfTable>,
    large_cdf: Option<CdfTable>,
}

impl LevyMeasureSpec {
    pub fn new(kind: MeasureKind, cutoff: f64) -> Result<Self> {
        if !(cutoff > 0.0) || !cutoff.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "truncation radius {cutoff} must be positive"
            )));
        }
        let (small_mass, large_mass, small_cdf, large_cdf) = match &kind {
            MeasureKind::Uniform01 => {
                let a = cutoff.min(1.0);
                (a, 1.0 - a, None, None)
            }
            MeasureKind::StdNormal => {
                let inside = normal_cdf(cutoff) - normal_cdf(-cutoff);
                (inside, 1.0 - inside, None, None)
            }
            MeasureKind::Tabulated(density) => {
                let small = region_intervals_for(&kind, cutoff, JumpRegion::Small);
                let large = region_intervals_for(&kind, cutoff, JumpRegion::Large);
                let sc = CdfTable::build(density, &small);
                let lc = CdfTable::build(density, &large);
                let (sm, lm) = (sc.mass(), lc.mass());
                (sm, lm, Some(sc), Some(lc))
            }
        };
        if !small_mass.is_finite() || !large_mass.is_finite() {
            return Err(Error::InvalidSpec("region masses must be finite".into()));
        }
        Ok(Self {
            kind,
            cutoff,
            small_mass,
            large_mass,
            small_cdf,
            large_cdf,
        })
    }

    pub fn uniform01(cutoff: f64) -> Result<Self> {
        Self::new(MeasureKind::Uniform01, cutoff)
    }

    pub fn std_normal(cutoff: f64) -> Result<Self> {
        Self::new(MeasureKind::StdNormal, cutoff)
    }

    pub fn kind(&self) -> &MeasureKind {
        &self.kind
    }

    /// Truncation radius `c`.
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn mass(&self, region: JumpRegion) -> f64 {
        match region {
            JumpRegion::Small => self.small_mass,
            JumpRegion::Large => self.large_mass,
        }
    }

    fn region_intervals(&self, region: JumpRegion) -> Vec<(f64, f64)> {
        region_intervals_for(&self.kind, self.cutoff, region)
    }

    fn density(&self, y: f64) -> f64 {
        match &self.kind {
            MeasureKind::Uniform01 => {
                if (0.0..=1.0).contains(&y) {
                    1.0
                } else {
                    0.0
                }
            }
            MeasureKind::StdNormal => normal_pdf(y),
            MeasureKind::Tabulated(d) => d.density(y),
        }
    }

    /// `integral of phi d(nu)` over a region, by adaptive quadrature with
    /// absolute tolerance `tol`.
    pub fn integrate_tol(
        &self,
        region: JumpRegion,
        phi: &dyn Fn(f64) -> f64,
        tol: f64,
    ) -> Result<QuadResult> {
        let intervals = self.region_intervals(region);
        adaptive_simpson_multi(&|y| phi(y) * self.density(y), &intervals, tol)
    }

    /// `integral of phi d(nu)` at the default tolerance.
    pub fn integrate(&self, region: JumpRegion, phi: &dyn Fn(f64) -> f64) -> Result<f64> {
        Ok(self.integrate_tol(region, phi, DEFAULT_TOL)?.value)
    }

    /// `Z_c = integral over {|y| < c} of max(|h(y)|, |h(y)|^2) d(nu)`;
    /// a divergent or non-finite integral violates the jump-moment
    /// assumption.
    pub fn z_constant(&self, h: &dyn Fn(f64) -> f64) -> Result<f64> {
        let value = self
            .integrate(JumpRegion::Small, &|y| {
                let a = h(y).abs();
                a.max(a * a)
            })
            .map_err(|e| Error::AssumptionViolation(format!("jump moment integral: {e}")))?;
        if !value.is_finite() {
            return Err(Error::AssumptionViolation(
                "jump moment integral diverges".into(),
            ));
        }
        Ok(value)
    }

    /// Poisson marks over an operational increment `d_e`. An empty region
    /// (zero mass) yields an empty list, never an error.
    pub fn sample_marks<R: Rng + ?Sized>(
        &self,
        region: JumpRegion,
        d_e: f64,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        if d_e < 0.0 {
            return Err(Error::Domain(format!(
                "operational increment {d_e} must be >= 0"
            )));
        }
        let rate = self.mass(region) * d_e;
        if rate <= 0.0 {
            return Ok(Vec::new());
        }
        let count = rng
            .sample(Poisson::new(rate).map_err(|e| Error::Domain(format!("poisson rate: {e}")))?)
            as usize;
        let mut marks = Vec::with_capacity(count);
        for _ in 0..count {
            marks.push(self.sample_one(region, rng));
        }
        Ok(marks)
    }

    fn sample_one<R: Rng + ?Sized>(&self, region: JumpRegion, rng: &mut R) -> f64 {
        match &self.kind {
            MeasureKind::Uniform01 => {
                let a = self.cutoff.min(1.0);
                match region {
                    JumpRegion::Small => rng.random::<f64>() * a,
                    JumpRegion::Large => a + rng.random::<f64>() * (1.0 - a),
                }
            }
            MeasureKind::StdNormal => loop {
                // Filtered Gaussian draws; the Poisson rate above already
                // carries the region mass.
                let z: f64 = rng.sample(StandardNormal);
                let inside = z.abs() < self.cutoff;
                match region {
                    JumpRegion::Small if inside => return z,
                    JumpRegion::Large if !inside => return z,
                    _ => {}
                }
            },
            MeasureKind::Tabulated(_) => {
                let table = match region {
                    JumpRegion::Small => self.small_cdf.as_ref(),
                    JumpRegion::Large => self.large_cdf.as_ref(),
                };
                table.expect("cdf built at construction").sample(rng)
            }
        }
    }
}

fn region_intervals_for(kind: &MeasureKind, cutoff: f64, region: JumpRegion) -> Vec<(f64, f64)> {
    let support = match kind {
        MeasureKind::Uniform01 => (0.0, 1.0),
        MeasureKind::StdNormal => (-NORMAL_SUPPORT, NORMAL_SUPPORT),
        MeasureKind::Tabulated(d) => d.support(),
    };
    let (lo, hi) = support;
    let mut out = Vec::new();
    let mut push = |a: f64, b: f64| {
        if b > a {
            out.push((a, b));
        }
    };
    match region {
        JumpRegion::Small => push(lo.max(-cutoff), hi.min(cutoff)),
        JumpRegion::Large => {
            push(lo, hi.min(-cutoff));
            push(lo.max(cutoff), hi);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, StreamRole};

    fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
        stream_rng(seed, 0, StreamRole::Noise)
    }

    #[test]
    fn uniform_masses_split_at_cutoff() {
        let m = LevyMeasureSpec::uniform01(1.0).unwrap();
        assert_eq!(m.mass(JumpRegion::Small), 1.0);
        assert_eq!(m.mass(JumpRegion::Large), 0.0);
        let m = LevyMeasureSpec::uniform01(0.5).unwrap();
        assert_eq!(m.mass(JumpRegion::Small), 0.5);
        assert_eq!(m.mass(JumpRegion::Large), 0.5);
    }

    #[test]
    fn normal_small_mass_matches_cdf() {
        let m = LevyMeasureSpec::std_normal(1.0).unwrap();
        let expected = normal_cdf(1.0) - normal_cdf(-1.0); // ~0.6827
        assert!((m.mass(JumpRegion::Small) - expected).abs() < 1e-15);
        assert!((m.mass(JumpRegion::Small) - 0.6827).abs() < 5e-5);
    }

    #[test]
    fn stored_masses_agree_with_quadrature() {
        for m in [
            LevyMeasureSpec::uniform01(1.0).unwrap(),
            LevyMeasureSpec::uniform01(0.3).unwrap(),
            LevyMeasureSpec::std_normal(1.0).unwrap(),
            LevyMeasureSpec::std_normal(2.5).unwrap(),
        ] {
            for region in [JumpRegion::Small, JumpRegion::Large] {
                let q = m.integrate_tol(region, &|_| 1.0, 1e-12).unwrap().value;
                assert!(
                    (q - m.mass(region)).abs() < 1e-10,
                    "mass mismatch {q} vs {}",
                    m.mass(region)
                );
            }
        }
    }

    #[test]
    fn quadratic_integrals_match_hand_values() {
        let uni = LevyMeasureSpec::uniform01(1.0).unwrap();
        let v = uni.integrate(JumpRegion::Small, &|y| 16.0 * y * y).unwrap();
        assert!((v - 16.0 / 3.0).abs() < 1e-8, "got {v}");

        let zero = uni.integrate(JumpRegion::Small, &|_| 0.0).unwrap();
        assert_eq!(zero, 0.0);

        // Gaussian second moment inside [-1, 1]: Phi(1) - Phi(-1) - 2 pdf(1).
        let norm = LevyMeasureSpec::std_normal(1.0).unwrap();
        let v = norm.integrate(JumpRegion::Small, &|y| y * y).unwrap();
        let oracle = (normal_cdf(1.0) - normal_cdf(-1.0)) - 2.0 * normal_pdf(1.0);
        assert!((v - oracle).abs() < 1e-8, "got {v}, oracle {oracle}");
        assert!((v - 0.1987).abs() < 5e-5);
    }

    #[test]
    fn integral_is_linear_and_monotone() {
        let m = LevyMeasureSpec::std_normal(1.0).unwrap();
        let a = m.integrate(JumpRegion::Small, &|y| y * y).unwrap();
        let b = m.integrate(JumpRegion::Small, &|y| y.cos()).unwrap();
        let combo = m
            .integrate(JumpRegion::Small, &|y| 2.0 * y * y + 3.0 * y.cos())
            .unwrap();
        assert!((combo - (2.0 * a + 3.0 * b)).abs() < 1e-8);
        // Monotone for nonnegative integrands.
        let bigger = m.integrate(JumpRegion::Small, &|y| y * y + 0.1).unwrap();
        assert!(bigger > a);
    }

    #[test]
    fn z_constant_hand_checks() {
        let uni = LevyMeasureSpec::uniform01(1.0).unwrap();
        // On [0,1], y^2 >= y^4, so the max is y^2 with integral 1/3.
        let z = uni.z_constant(&|y| y * y).unwrap();
        assert!((z - 1.0 / 3.0).abs() < 1e-8);
        assert_eq!(uni.z_constant(&|_| 0.0).unwrap(), 0.0);

        // 16 y^2: brute-force Riemann oracle for max(16y^2, 256y^4).
        let n = 1_000_000;
        let oracle: f64 = (0..n)
            .map(|i| {
                let y = (i as f64 + 0.5) / n as f64;
                let a = 16.0 * y * y;
                a.max(a * a) / n as f64
            })
            .sum();
        let z = uni.z_constant(&|y| 16.0 * y * y).unwrap();
        assert!((z - oracle).abs() < 1e-5, "z {z} vs oracle {oracle}");
    }

    #[test]
    fn zero_increment_yields_no_marks() {
        let m = LevyMeasureSpec::std_normal(1.0).unwrap();
        for _ in 0..100 {
            assert!(m
                .sample_marks(JumpRegion::Small, 0.0, &mut rng(1))
                .unwrap()
                .is_empty());
        }
    }

    #[test]
    fn empty_region_yields_no_marks() {
        let m = LevyMeasureSpec::uniform01(1.0).unwrap();
        assert!(m
            .sample_marks(JumpRegion::Large, 2.0, &mut rng(2))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn negative_increment_is_domain_error() {
        let m = LevyMeasureSpec::uniform01(1.0).unwrap();
        assert!(m
            .sample_marks(JumpRegion::Small, -0.1, &mut rng(3))
            .is_err());
    }

    #[test]
    fn poisson_mean_count_matches_rate() {
        // Unit mass, dE = 2: mean count 2 within 3 standard errors.
        let m = LevyMeasureSpec::uniform01(1.0).unwrap();
        let mut r = rng(4);
        let n = 100_000;
        let total: usize = (0..n)
            .map(|_| {
                m.sample_marks(JumpRegion::Small, 2.0, &mut r)
                    .unwrap()
                    .len()
            })
            .sum();
        let mean = total as f64 / n as f64;
        let se = (2.0f64 / n as f64).sqrt(); // Poisson variance = mean
        assert!((mean - 2.0).abs() < 3.0 * se, "mean {mean}");
    }

    /// Chi-square goodness of fit of sampled marks against the restricted
    /// density; 20 bins, 1% critical value for 19 dof is 36.191.
    fn chi_square_marks(m: &LevyMeasureSpec, region: JumpRegion, lo: f64, hi: f64, seed: u64) {
        let bins = 20;
        let n_marks = 100_000;
        let mut r = rng(seed);
        let mut counts = vec![0usize; bins];
        let mut collected = 0;
        while collected < n_marks {
            for y in m.sample_marks(region, 1.0, &mut r).unwrap() {
                if collected == n_marks {
                    break;
                }
                let b = (((y - lo) / (hi - lo)) * bins as f64).floor() as isize;
                let b = b.clamp(0, bins as isize - 1) as usize;
                counts[b] += 1;
                collected += 1;
            }
        }
        let mass = m.mass(region);
        let mut chi2 = 0.0;
        for (b, &count) in counts.iter().enumerate() {
            let a = lo + (hi - lo) * b as f64 / bins as f64;
            let bdy = lo + (hi - lo) * (b + 1) as f64 / bins as f64;
            // Bin probability by fine Riemann sum of the restricted density.
            let steps = 4000;
            let h = (bdy - a) / steps as f64;
            let p = (0..steps)
                .map(|i| m.density(a + h * (i as f64 + 0.5)) * h)
                .sum::<f64>()
                / mass;
            let expected = p * n_marks as f64;
            if expected > 0.0 {
                chi2 += (count as f64 - expected).powi(2) / expected;
            }
        }
        assert!(chi2 < 36.191, "chi2 {chi2} exceeds the 1% critical value");
    }

    #[test]
    fn uniform_marks_match_density() {
        let m = LevyMeasureSpec::uniform01(1.0).unwrap();
        chi_square_marks(&m, JumpRegion::Small, 0.0, 1.0, 5);
    }

    #[test]
    fn normal_small_marks_match_density() {
        let m = LevyMeasureSpec::std_normal(1.0).unwrap();
        chi_square_marks(&m, JumpRegion::Small, -1.0, 1.0, 6);
    }

    #[test]
    fn tabulated_round_trip_and_sampling() {
        // Triangle density on [-1, 1].
        let ys: Vec<f64> = (0..=200).map(|i| -1.0 + i as f64 / 100.0).collect();
        let ds: Vec<f64> = ys.iter().map(|y| 1.0 - y.abs()).collect();
        let tab = TabulatedDensity::new(ys, ds).unwrap();
        let m = LevyMeasureSpec::new(MeasureKind::Tabulated(tab), 0.5).unwrap();
        // Triangle mass inside |y| < 0.5 is 2 * (0.5 * (1 + 0.5) * 0.5 / 2)....
        // Direct: integral of (1 - |y|) over [-0.5, 0.5] = 2 * (0.5 - 0.125) = 0.75.
        assert!((m.mass(JumpRegion::Small) - 0.75).abs() < 1e-6);
        assert!((m.mass(JumpRegion::Large) - 0.25).abs() < 1e-6);
        chi_square_marks(&m, JumpRegion::Small, -0.5, 0.5, 7);
    }

    #[test]
    fn tabulated_csv_loader_validates() {
        let good = "y,density\n-1.0,0.0\n0.0,1.0\n1.0,0.0\n";
        assert!(TabulatedDensity::from_csv(good).is_ok());
        let non_increasing = "y,density\n0.0,1.0\n0.0,1.0\n";
        assert!(TabulatedDensity::from_csv(non_increasing).is_err());
        let negative = "y,density\n0.0,1.0\n1.0,-0.5\n";
        assert!(TabulatedDensity::from_csv(negative).is_err());
        let garbage = "y,density\n0.0\n";
        assert!(TabulatedDensity::from_csv(garbage).is_err());
    }
}
