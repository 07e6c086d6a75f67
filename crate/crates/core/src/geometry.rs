//! Poisson base-station deployments and nearest-BS (Voronoi) association.
//!
//! Base stations are dropped as a homogeneous PPP in a finite window. Users
//! are placed only in the guard-reduced inner region so the interference
//! field they see is close to that of an infinite network.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rate_control::LinkSpec;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance_sq(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.distance_sq(other).sqrt()
    }
}

/// Simulation region, centred at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum Window {
    Square { half_width: f64 },
    Disc { radius: f64 },
}

impl Window {
    /// Half-width or radius.
    pub fn extent(&self) -> f64 {
        match *self {
            Window::Square { half_width } => half_width,
            Window::Disc { radius } => radius,
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Window::Square { half_width } => 4.0 * half_width * half_width,
            Window::Disc { radius } => PI * radius * radius,
        }
    }

    pub fn scaled(&self, factor: f64) -> Window {
        match *self {
            Window::Square { half_width } => Window::Square {
                half_width: half_width * factor,
            },
            Window::Disc { radius } => Window::Disc {
                radius: radius * factor,
            },
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match *self {
            Window::Square { half_width } => p.x.abs() <= half_width && p.y.abs() <= half_width,
            Window::Disc { radius } => p.x * p.x + p.y * p.y <= radius * radius,
        }
    }

    /// Distance from an interior point to the window boundary.
    pub fn boundary_distance(&self, p: &Point) -> f64 {
        match *self {
            Window::Square { half_width } => (half_width - p.x.abs()).min(half_width - p.y.abs()),
            Window::Disc { radius } => radius - (p.x * p.x + p.y * p.y).sqrt(),
        }
    }

    /// Uniform point in the window.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match *self {
            Window::Square { half_width } => Point {
                x: rng.random_range(-half_width..=half_width),
                y: rng.random_range(-half_width..=half_width),
            },
            Window::Disc { radius } => {
                let r = radius * rng.random::<f64>().sqrt();
                let t = 2.0 * PI * rng.random::<f64>();
                Point {
                    x: r * t.cos(),
                    y: r * t.sin(),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeploymentConfig {
    /// BS density per square meter.
    pub density: f64,
    pub window: Window,
    /// Fraction of the window extent reserved as a user-free border.
    pub guard_fraction: f64,
    pub seed: u64,
}

impl DeploymentConfig {
    pub fn new(density: f64, window: Window, guard_fraction: f64, seed: u64) -> Result<Self> {
        let config = DeploymentConfig {
            density,
            window,
            guard_fraction,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    /// Square window sized so that `mean_count` base stations fall in it on
    /// average.
    pub fn square_with_mean_count(
        density: f64,
        mean_count: f64,
        guard_fraction: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(mean_count > 0.0 && mean_count.is_finite()) {
            return Err(Error::invalid(
                "mean_count",
                format!("must be positive, got {mean_count}"),
            ));
        }
        if !(density > 0.0 && density.is_finite()) {
            return Err(Error::invalid(
                "density",
                format!("must be positive, got {density}"),
            ));
        }
        let half_width = 0.5 * (mean_count / density).sqrt();
        Self::new(density, Window::Square { half_width }, guard_fraction, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.density > 0.0 && self.density.is_finite()) {
            return Err(Error::invalid(
                "density",
                format!("must be positive, got {}", self.density),
            ));
        }
        let extent = self.window.extent();
        if !(extent > 0.0 && extent.is_finite()) {
            return Err(Error::invalid(
                "window",
                format!("empty window (extent {extent})"),
            ));
        }
        if !(0.0..1.0).contains(&self.guard_fraction) {
            return Err(Error::invalid(
                "guard_fraction",
                format!("must lie in [0, 1), got {}", self.guard_fraction),
            ));
        }
        Ok(())
    }

    pub fn expected_bs_count(&self) -> f64 {
        self.density * self.window.area()
    }

    /// Region where users may be placed.
    pub fn inner_window(&self) -> Window {
        self.window.scaled(1.0 - self.guard_fraction)
    }

    pub fn guard_distance(&self) -> f64 {
        self.guard_fraction * self.window.extent()
    }
}

/// Where the tagged user of a realization goes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UePlacement {
    /// Uniform in the guard-reduced inner region.
    #[default]
    UniformInner,
    At(Point),
}

/// Serving BS and sorted interferer distances of one user.
#[derive(Debug, Clone, PartialEq)]
pub struct Association {
    pub serving_index: usize,
    pub serving_distance: f64,
    /// Distances to every other BS, ascending.
    pub interferer_distances: Vec<f64>,
}

impl Association {
    pub fn link(&self, epsilon: f64, alpha: f64) -> Result<LinkSpec> {
        LinkSpec::new(
            self.serving_distance,
            self.interferer_distances.clone(),
            epsilon,
            alpha,
        )
    }
}

/// One sampled deployment. `links[k]` is the association of `ues[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRealization {
    pub base_stations: Vec<Point>,
    pub ues: Vec<Point>,
    pub links: Vec<Association>,
}

/// Associates `ue` with its closest base station.
pub fn associate(base_stations: &[Point], ue: Point) -> Result<Association> {
    if base_stations.len() < 2 {
        return Err(Error::TooFewBaseStations(base_stations.len()));
    }
    let mut distances: Vec<(usize, f64)> = base_stations
        .iter()
        .enumerate()
        .map(|(k, bs)| (k, bs.distance(&ue)))
        .collect();
    let (serving_pos, &(serving_index, serving_distance)) = distances
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(a.1 .0.cmp(&b.1 .0)))
        .expect("non-empty");
    distances.swap_remove(serving_pos);
    let mut interferer_distances: Vec<f64> = distances.into_iter().map(|(_, d)| d).collect();
    interferer_distances.sort_by(f64::total_cmp);
    Ok(Association {
        serving_index,
        serving_distance,
        interferer_distances,
    })
}

impl NetworkRealization {
    pub fn associate(&self, ue: Point) -> Result<Association> {
        associate(&self.base_stations, ue)
    }
}

/// PPP of base stations in the window; redrawn until at least two exist.
pub fn sample_base_stations<R: Rng + ?Sized>(
    config: &DeploymentConfig,
    rng: &mut R,
) -> Result<Vec<Point>> {
    config.validate()?;
    let mean = config.expected_bs_count();
    let poisson = Poisson::new(mean)
        .map_err(|e| Error::invalid("density", format!("bad Poisson mean {mean}: {e}")))?;
    loop {
        let count = poisson.sample(rng) as usize;
        if count >= 2 {
            return Ok((0..count).map(|_| config.window.sample(rng)).collect());
        }
    }
}

/// One deployment with a single tagged user placed uniformly in the inner
/// region.
pub fn sample_ppp<R: Rng + ?Sized>(
    config: &DeploymentConfig,
    rng: &mut R,
) -> Result<NetworkRealization> {
    sample_ppp_with(config, rng, UePlacement::UniformInner)
}

pub fn sample_ppp_with<R: Rng + ?Sized>(
    config: &DeploymentConfig,
    rng: &mut R,
    placement: UePlacement,
) -> Result<NetworkRealization> {
    let base_stations = sample_base_stations(config, rng)?;
    let ue = match placement {
        UePlacement::UniformInner => config.inner_window().sample(rng),
        UePlacement::At(p) => p,
    };
    let link = associate(&base_stations, ue)?;
    Ok(NetworkRealization {
        base_stations,
        ues: vec![ue],
        links: vec![link],
    })
}

/// Deployment with two users served by the same BS.
///
/// The first user is uniform in the inner region; the second is drawn
/// uniformly from the inner region until it lands in the first user's cell.
pub fn sample_cocell_pair<R: Rng + ?Sized>(
    config: &DeploymentConfig,
    rng: &mut R,
    max_attempts: usize,
) -> Result<NetworkRealization> {
    let base_stations = sample_base_stations(config, rng)?;
    let inner = config.inner_window();
    let ue_a = inner.sample(rng);
    let link_a = associate(&base_stations, ue_a)?;
    let serving = link_a.serving_index;
    let index = CellIndex::new(&base_stations, config.window.extent());

    for _ in 0..max_attempts {
        let candidate = inner.sample(rng);
        let d2 = candidate.distance_sq(&base_stations[serving]);
        if !index.closer_exists(candidate, d2, serving) {
            let link_b = associate(&base_stations, candidate)?;
            return Ok(NetworkRealization {
                base_stations,
                ues: vec![ue_a, candidate],
                links: vec![link_a, link_b],
            });
        }
    }
    Err(Error::PairPlacement(max_attempts))
}

/// Uniform bucket grid used to test Voronoi-cell membership quickly.
struct CellIndex<'a> {
    points: &'a [Point],
    origin: f64,
    size: f64,
    side: usize,
    buckets: Vec<Vec<u32>>,
}

impl<'a> CellIndex<'a> {
    fn new(points: &'a [Point], extent: f64) -> Self {
        let side = ((points.len() as f64).sqrt().ceil() as usize).max(1);
        let size = 2.0 * extent / side as f64;
        let mut index = CellIndex {
            points,
            origin: -extent,
            size,
            side,
            buckets: vec![Vec::new(); side * side],
        };
        for (k, p) in points.iter().enumerate() {
            let b = index.bucket(index.coord(p.x), index.coord(p.y));
            index.buckets[b].push(k as u32);
        }
        index
    }

    fn coord(&self, v: f64) -> usize {
        let c = ((v - self.origin) / self.size).floor();
        (c.max(0.0) as usize).min(self.side - 1)
    }

    fn bucket(&self, cx: usize, cy: usize) -> usize {
        cy * self.side + cx
    }

    fn scan(&self, bucket: usize, p: Point, d2: f64, skip: usize) -> bool {
        self.buckets[bucket]
            .iter()
            .any(|&k| k as usize != skip && self.points[k as usize].distance_sq(&p) < d2)
    }

    /// Whether some point other than `skip` is strictly closer to `p` than
    /// `sqrt(d2)`.
    fn closer_exists(&self, p: Point, d2: f64, skip: usize) -> bool {
        let own = self.bucket(self.coord(p.x), self.coord(p.y));
        if self.scan(own, p, d2, skip) {
            return true;
        }
        let d = d2.sqrt();
        let (x0, x1) = (self.coord(p.x - d), self.coord(p.x + d));
        let (y0, y1) = (self.coord(p.y - d), self.coord(p.y + d));
        for cy in y0..=y1 {
            for cx in x0..=x1 {
                let b = self.bucket(cx, cy);
                if b != own && self.scan(b, p, d2, skip) {
                    return true;
                }
            }
        }
        false
    }
}

/// Affine interferer layouts `r_j = 40 + spacing * j` used as deterministic
/// test deployments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixtureRule {
    /// `40 + 10 j`
    High,
    /// `40 + 20 j`
    Medium,
    /// `40 + 30 j`
    Low,
}

impl FixtureRule {
    pub const ALL: [FixtureRule; 3] = [FixtureRule::High, FixtureRule::Medium, FixtureRule::Low];

    pub fn spacing(&self) -> f64 {
        match self {
            FixtureRule::High => 10.0,
            FixtureRule::Medium => 20.0,
            FixtureRule::Low => 30.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FixtureRule::High => "high",
            FixtureRule::Medium => "medium",
            FixtureRule::Low => "low",
        }
    }
}

impl fmt::Display for FixtureRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FixtureRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "high" => Ok(FixtureRule::High),
            "medium" => Ok(FixtureRule::Medium),
            "low" => Ok(FixtureRule::Low),
            other => Err(Error::invalid("fixture", format!("unknown rule `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureDeployment {
    pub rule: FixtureRule,
    pub serving_distance: f64,
    pub interferer_distances: Vec<f64>,
}

impl FixtureDeployment {
    pub fn link(&self, epsilon: f64, alpha: f64) -> Result<LinkSpec> {
        LinkSpec::new(
            self.serving_distance,
            self.interferer_distances.clone(),
            epsilon,
            alpha,
        )
    }
}

pub fn make_fixture(
    rule: FixtureRule,
    n: usize,
    serving_distance: f64,
) -> Result<FixtureDeployment> {
    if n == 0 {
        return Err(Error::invalid("n", "fixture needs at least one interferer"));
    }
    if !(serving_distance > 0.0 && serving_distance.is_finite()) {
        return Err(Error::invalid(
            "serving_distance",
            format!("must be positive, got {serving_distance}"),
        ));
    }
    let interferer_distances = (1..=n).map(|j| 40.0 + rule.spacing() * j as f64).collect();
    Ok(FixtureDeployment {
        rule,
        serving_distance,
        interferer_distances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn two_point_association() {
        let bs = [Point::new(10.0, 0.0), Point::new(20.0, 0.0)];
        let a = associate(&bs, Point::ORIGIN).unwrap();
        assert_eq!(a.serving_index, 0);
        assert_eq!(a.serving_distance, 10.0);
        assert_eq!(a.interferer_distances, vec![20.0]);
    }

    #[test]
    fn association_needs_two_stations() {
        assert_eq!(
            associate(&[Point::new(1.0, 1.0)], Point::ORIGIN),
            Err(Error::TooFewBaseStations(1))
        );
    }

    #[test]
    fn fixtures_follow_affine_rule() {
        let f = make_fixture(FixtureRule::High, 3, 30.0).unwrap();
        assert_eq!(f.interferer_distances, vec![50.0, 60.0, 70.0]);
        let f = make_fixture(FixtureRule::Low, 1, 30.0).unwrap();
        assert_eq!(f.interferer_distances, vec![70.0]);
        let f = make_fixture(FixtureRule::Medium, 5, 30.0).unwrap();
        assert_eq!(
            f.interferer_distances,
            vec![60.0, 80.0, 100.0, 120.0, 140.0]
        );
        let f = make_fixture(FixtureRule::Medium, 10, 30.0).unwrap();
        let expected: Vec<f64> = (1..=10).map(|j| 40.0 + 20.0 * j as f64).collect();
        assert_eq!(f.interferer_distances, expected);
        assert_eq!(*f.interferer_distances.last().unwrap(), 240.0);
        assert!(make_fixture(FixtureRule::High, 0, 30.0).is_err());
    }

    #[test]
    fn rejects_bad_configs() {
        let w = Window::Square { half_width: 100.0 };
        assert!(DeploymentConfig::new(0.0, w, 0.2, 1).is_err());
        assert!(DeploymentConfig::new(-1e-4, w, 0.2, 1).is_err());
        assert!(DeploymentConfig::new(1e-4, Window::Square { half_width: 0.0 }, 0.2, 1).is_err());
        assert!(DeploymentConfig::new(1e-4, w, 1.0, 1).is_err());
        assert!(DeploymentConfig::new(1e-4, w, 0.2, 1).is_ok());
    }

    #[test]
    fn paper_scale_window_has_thousand_stations() {
        let c = DeploymentConfig::square_with_mean_count(1e-4, 1000.0, 0.2, 0).unwrap();
        assert!((c.window.area() - 1e7).abs() < 1e-6);
        assert!((c.expected_bs_count() - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn users_respect_guard_and_nearest_bs() {
        for shape in [
            Window::Square { half_width: 1000.0 },
            Window::Disc { radius: 1000.0 },
        ] {
            let config = DeploymentConfig::new(1e-4, shape, 0.3, 11).unwrap();
            for k in 0..200 {
                let mut rng = substream(config.seed, k);
                let real = sample_ppp(&config, &mut rng).unwrap();
                let ue = real.ues[0];
                assert!(config.window.boundary_distance(&ue) >= config.guard_distance() - 1e-9);
                let link = &real.links[0];
                assert_eq!(
                    link.interferer_distances.len(),
                    real.base_stations.len() - 1
                );
                assert!(link.interferer_distances.windows(2).all(|w| w[0] <= w[1]));
                assert!(link.interferer_distances[0] >= link.serving_distance);
            }
        }
    }

    #[test]
    fn cocell_pairs_share_serving_bs() {
        let config = DeploymentConfig::square_with_mean_count(1e-4, 200.0, 0.2, 5).unwrap();
        for k in 0..100 {
            let mut rng = substream(config.seed, k);
            let real = sample_cocell_pair(&config, &mut rng, 100_000).unwrap();
            let brute = |ue: &Point| {
                (0..real.base_stations.len())
                    .min_by(|&a, &b| {
                        real.base_stations[a]
                            .distance(ue)
                            .total_cmp(&real.base_stations[b].distance(ue))
                    })
                    .unwrap()
            };
            assert_eq!(real.links[0].serving_index, brute(&real.ues[0]));
            assert_eq!(real.links[1].serving_index, brute(&real.ues[1]));
            assert_eq!(real.links[0].serving_index, real.links[1].serving_index);
        }
    }

    #[test]
    fn disc_samples_stay_inside() {
        let w = Window::Disc { radius: 5.0 };
        let mut rng = substream(3, 0);
        for _ in 0..1000 {
            assert!(w.contains(&w.sample(&mut rng)));
        }
    }
}
