use crate::losses::AreaDistribution;
use crate::rally::Coord;

/// Smallest standard deviation a fitted Gaussian may have.
pub(crate) const SIGMA_FLOOR: f64 = 1e-3;
/// Fitted correlations are clamped to `[-RHO_CAP, RHO_CAP]`.
pub(crate) const RHO_CAP: f64 = 0.99;
/// Fewer samples than this fall back to a coarser estimate.
pub(crate) const MIN_SAMPLES: usize = 3;

pub(crate) const DEFAULT_AREA: AreaDistribution = AreaDistribution {
    mu_x: 0.0,
    mu_y: 0.5,
    sigma_x: 0.5,
    sigma_y: 0.5,
    rho: 0.0,
};

#[derive(Debug, Clone, Default)]
pub(crate) struct AreaMoments {
    n: usize,
    sx: f64,
    sy: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
}

impl AreaMoments {
    pub fn push(&mut self, c: Coord) {
        self.n += 1;
        self.sx += c.x;
        self.sy += c.y;
        self.sxx += c.x * c.x;
        self.syy += c.y * c.y;
        self.sxy += c.x * c.y;
    }

    pub fn count(&self) -> usize {
        self.n
    }

    /// Sample mean and (unbiased) covariance, or `fallback` when too few
    /// samples were seen.
    pub fn fit(&self, fallback: &AreaDistribution) -> AreaDistribution {
        if self.n < MIN_SAMPLES {
            return *fallback;
        }
        let n = self.n as f64;
        let (mx, my) = (self.sx / n, self.sy / n);
        let vx = ((self.sxx - n * mx * mx) / (n - 1.0)).max(0.0);
        let vy = ((self.syy - n * my * my) / (n - 1.0)).max(0.0);
        let cxy = (self.sxy - n * mx * my) / (n - 1.0);
        from_moments(mx, my, vx, vy, cxy)
    }
}

pub(crate) fn from_moments(mx: f64, my: f64, vx: f64, vy: f64, cxy: f64) -> AreaDistribution {
    let sigma_x = vx.sqrt().max(SIGMA_FLOOR);
    let sigma_y = vy.sqrt().max(SIGMA_FLOOR);
    let rho = (cxy / (sigma_x * sigma_y)).clamp(-RHO_CAP, RHO_CAP);
    AreaDistribution { mu_x: mx, mu_y: my, sigma_x, sigma_y, rho: if rho.is_finite() { rho } else { 0.0 } }
}

/// Single Gaussian with the same first two moments as the mixture.
pub(crate) fn moment_match(weights: &[f64], parts: &[AreaDistribution]) -> AreaDistribution {
    let (mut mx, mut my, mut exx, mut eyy, mut exy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (w, d) in weights.iter().zip(parts) {
        mx += w * d.mu_x;
        my += w * d.mu_y;
        exx += w * (d.sigma_x * d.sigma_x + d.mu_x * d.mu_x);
        eyy += w * (d.sigma_y * d.sigma_y + d.mu_y * d.mu_y);
        exy += w * (d.rho * d.sigma_x * d.sigma_y + d.mu_x * d.mu_y);
    }
    from_moments(mx, my, (exx - mx * mx).max(0.0), (eyy - my * my).max(0.0), exy - mx * my)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_moments() {
        let mut m = AreaMoments::default();
        for (x, y) in [(0.0, 0.0), (0.2, 0.4), (0.4, 0.2)] {
            m.push(Coord::new(x, y));
        }
        let d = m.fit(&DEFAULT_AREA);
        assert!((d.mu_x - 0.2).abs() < 1e-12 && (d.mu_y - 0.2).abs() < 1e-12);
        assert!((d.sigma_x - 0.2).abs() < 1e-12);
        assert!((d.sigma_y - 0.2).abs() < 1e-12);
        // cov = ((-.2)(-.2) + 0 + (.2)(0)) / 2 = 0.02
        assert!((d.rho - 0.5).abs() < 1e-12);
    }

    #[test]
    fn few_samples_fall_back() {
        let mut m = AreaMoments::default();
        m.push(Coord::new(0.1, 0.1));
        m.push(Coord::new(0.1, 0.1));
        assert_eq!(m.fit(&DEFAULT_AREA), DEFAULT_AREA);
    }

    #[test]
    fn degenerate_samples_stay_valid() {
        let mut m = AreaMoments::default();
        for _ in 0..5 {
            m.push(Coord::new(0.3, 0.3));
        }
        let d = m.fit(&DEFAULT_AREA);
        assert!(d.is_valid());
        assert_eq!(d.sigma_x, SIGMA_FLOOR);
    }

    #[test]
    fn moment_match_of_one_component_is_identity() {
        let d = AreaDistribution { mu_x: 0.1, mu_y: 0.7, sigma_x: 0.2, sigma_y: 0.1, rho: 0.3 };
        let m = moment_match(&[1.0], &[d]);
        assert!((m.mu_x - d.mu_x).abs() < 1e-15);
        assert!((m.sigma_x - d.sigma_x).abs() < 1e-12);
        assert!((m.rho - d.rho).abs() < 1e-9);
    }
}
