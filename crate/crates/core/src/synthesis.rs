//! Measurement configurations, multi-frequency far-field synthesis, relative
//! Gaussian noise and the on-disk dataset format.
//!
//! Records are ordered by base direction, then rotation (0 is pure
//! backscattering), then frequency index; every consumer relies on that order.

use crate::error::{Error, Result};
use crate::geometry::Direction;
use crate::solver::{required_nodes, FactorizedScatterer, ScattererSpec};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Component tolerance used when looking records up by direction.
pub const DIRECTION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "set")]
pub enum DirectionConfig {
    /// `x̂ = Qθ` with `Q` the rotation by `rotation` radians; `π` is `−I`.
    A1 { rotation: f64 },
    /// Backscattering plus the two rotated families `(Q_α R_α θ, R_α θ)`.
    A2 { alphas: [u32; 2] },
}

impl DirectionConfig {
    pub fn backscatter() -> Self {
        DirectionConfig::A1 { rotation: PI }
    }

    pub fn a2_default() -> Self {
        DirectionConfig::A2 { alphas: [8, 10] }
    }
}

/// `Q_α = −rot(απ/16)`.
pub fn q_alpha(alpha: u32, v: Direction) -> Direction {
    let beta = alpha as f64 * PI / 16.0;
    -v.rotated(beta)
}

/// `R_α = rot(−απ/32)`.
pub fn r_alpha(alpha: u32, v: Direction) -> Direction {
    v.rotated(-(alpha as f64) * PI / 32.0)
}

/// One measurement pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionPair {
    pub base: usize,
    pub rotation: usize,
    /// Index of the incident direction within the base set.
    pub incident: usize,
    pub obs: Direction,
    pub inc: Direction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionPairSet {
    pub config: DirectionConfig,
    pub base: Vec<Direction>,
    /// Pairs in canonical order (base index, rotation index).
    pub pairs: Vec<DirectionPair>,
}

/// Base directions at angles `2πi/l`; when `l` is even the second half is the
/// exact negation of the first so that opposite directions match bitwise.
pub fn base_directions(l: usize) -> Vec<Direction> {
    let mut dirs: Vec<Direction> = (0..l).map(|i| Direction::from_angle(TAU * i as f64 / l as f64)).collect();
    if l % 2 == 0 {
        for i in 0..l / 2 {
            dirs[i + l / 2] = -dirs[i];
        }
    }
    dirs
}

pub fn build_direction_set(l: usize, config: DirectionConfig) -> Result<DirectionPairSet> {
    if l < 4 {
        return Err(Error::DirectionSet(format!("need at least 4 directions, got {l}")));
    }
    let base = base_directions(l);
    let mut pairs = Vec::new();
    match config {
        DirectionConfig::A1 { rotation } => {
            if !rotation.is_finite() {
                return Err(Error::DirectionSet("rotation angle must be finite".into()));
            }
            let is_reverse = ((rotation - PI) / TAU).fract().abs() < 1e-15;
            for (i, &theta) in base.iter().enumerate() {
                let obs = if is_reverse { -theta } else { theta.rotated(rotation) };
                pairs.push(DirectionPair { base: i, rotation: 0, incident: i, obs, inc: theta });
            }
        }
        DirectionConfig::A2 { alphas } => {
            if l % 64 != 0 {
                return Err(Error::DirectionSet(format!(
                    "A2 needs the direction count divisible by 64, got {l}"
                )));
            }
            for (i, &theta) in base.iter().enumerate() {
                pairs.push(DirectionPair { base: i, rotation: 0, incident: i, obs: -theta, inc: theta });
                for (r, &alpha) in alphas.iter().enumerate() {
                    // R_α shifts the angle by −α·l/64 grid steps.
                    let shift = (alpha as usize * l / 64) % l;
                    let j = (i + l - shift) % l;
                    let inc = base[j];
                    pairs.push(DirectionPair { base: i, rotation: r + 1, incident: j, obs: q_alpha(alpha, inc), inc });
                }
            }
        }
    }
    Ok(DirectionPairSet { config, base, pairs })
}

impl DirectionPairSet {
    pub fn rotations(&self) -> usize {
        match self.config {
            DirectionConfig::A1 { .. } => 1,
            DirectionConfig::A2 { .. } => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub k_minus: f64,
    pub k_plus: f64,
    pub dk: f64,
}

impl FrequencyGrid {
    pub fn new(k_minus: f64, k_plus: f64, dk: f64) -> Result<Self> {
        if !(k_minus > 0.0) || !(dk > 0.0) || !k_plus.is_finite() || !(k_minus < k_plus) {
            return Err(Error::InvalidParameter(format!(
                "band {k_minus}:{k_plus}:{dk} needs 0 < k_minus < k_plus and dk > 0"
            )));
        }
        let steps = (k_plus - k_minus) / dk;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "band width {} is not a multiple of dk = {dk}",
                k_plus - k_minus
            )));
        }
        Ok(Self { k_minus, k_plus, dk })
    }

    /// Number of steps `M`; samples are `m = 0..=M`.
    pub fn steps(&self) -> usize {
        ((self.k_plus - self.k_minus) / self.dk).round() as usize
    }

    pub fn len(&self) -> usize {
        self.steps() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn k(&self, m: usize) -> f64 {
        self.k_minus + m as f64 * self.dk
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.len()).map(|m| self.k(m)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub theta: Direction,
    pub obs: Direction,
    pub k: f64,
    pub value: Complex64,
}

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub scatterer: ScattererSpec,
    pub directions: DirectionManifest,
    pub k_minus: f64,
    pub k_plus: f64,
    pub dk: f64,
    pub delta: f64,
    pub seed: Option<u64>,
    pub count: usize,
    pub generator: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionManifest {
    pub count: usize,
    #[serde(flatten)]
    pub config: DirectionConfig,
}

impl Manifest {
    pub fn grid(&self) -> Result<FrequencyGrid> {
        FrequencyGrid::new(self.k_minus, self.k_plus, self.dk)
    }

    pub fn pair_set(&self) -> Result<DirectionPairSet> {
        build_direction_set(self.directions.count, self.directions.config)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldDataset {
    pub manifest: Manifest,
    pub records: Vec<Record>,
}

/// One frequency series `(k_m, u_m)`.
pub type Series = Vec<(f64, Complex64)>;

impl FarFieldDataset {
    pub fn grid(&self) -> Result<FrequencyGrid> {
        self.manifest.grid()
    }

    pub fn pair_set(&self) -> Result<DirectionPairSet> {
        self.manifest.pair_set()
    }

    pub fn base_directions(&self) -> Vec<Direction> {
        base_directions(self.manifest.directions.count)
    }

    fn group_len(&self) -> usize {
        ((self.manifest.k_plus - self.manifest.k_minus) / self.manifest.dk).round() as usize + 1
    }

    /// Series of base direction `base`, rotation `rotation`, by position.
    pub fn pair_records(&self, base: usize, rotation: usize) -> Result<&[Record]> {
        let rotations = match self.manifest.directions.config {
            DirectionConfig::A1 { .. } => 1,
            DirectionConfig::A2 { .. } => 3,
        };
        if rotation >= rotations || base >= self.manifest.directions.count {
            return Err(Error::MissingRecord(format!("pair ({base}, {rotation}) outside the set")));
        }
        let m = self.group_len();
        let start = (base * rotations + rotation) * m;
        self.records
            .get(start..start + m)
            .ok_or_else(|| Error::MissingRecord(format!("pair ({base}, {rotation}) beyond the records")))
    }

    /// Series for observation `obs` and incidence `inc`, located by direction.
    pub fn series(&self, obs: Direction, inc: Direction) -> Result<Series> {
        let m = self.group_len();
        for chunk in self.records.chunks(m) {
            let first = chunk[0];
            if first.obs.approx_eq(obs, DIRECTION_TOL) && first.theta.approx_eq(inc, DIRECTION_TOL) {
                return Ok(chunk.iter().map(|r| (r.k, r.value)).collect());
            }
        }
        Err(Error::MissingRecord(format!(
            "no records for x̂ = ({:.6}, {:.6}), θ = ({:.6}, {:.6})",
            obs.x(),
            obs.y(),
            inc.x(),
            inc.y()
        )))
    }

    /// Backscattering series `u∞(x̂, −x̂, ·)`.
    pub fn backscatter(&self, xhat: Direction) -> Result<Series> {
        self.series(xhat, -xhat)
    }
}

fn generator_tag() -> String {
    format!("echoform {}", env!("CARGO_PKG_VERSION"))
}

/// Noise-free far-field data for every pair and wavenumber.
///
/// One factorization per wavenumber serves all incident directions;
/// wavenumbers are processed in parallel on the current rayon pool.
pub fn synthesize(spec: &ScattererSpec, pairs: &DirectionPairSet, grid: &FrequencyGrid) -> Result<FarFieldDataset> {
    let ks = grid.wavenumbers();
    let mut used = vec![false; pairs.base.len()];
    for p in &pairs.pairs {
        used[p.incident] = true;
    }
    let incident: Vec<usize> = (0..pairs.base.len()).filter(|&i| used[i]).collect();
    let mut column = vec![usize::MAX; pairs.base.len()];
    for (c, &i) in incident.iter().enumerate() {
        column[i] = c;
    }
    let inc_dirs: Vec<Direction> = incident.iter().map(|&i| pairs.base[i]).collect();

    let per_k: Vec<Vec<Complex64>> = ks
        .par_iter()
        .map(|&k| -> Result<Vec<Complex64>> {
            let nodes = required_nodes(&spec.curve, k);
            let fact = FactorizedScatterer::new(spec, k, nodes).map_err(|e| e.context(format!("k = {k}")))?;
            let dens = fact.densities(&inc_dirs).map_err(|e| e.context(format!("k = {k}")))?;
            Ok(pairs.pairs.iter().map(|p| fact.far_field_of(&dens, column[p.incident], p.obs)).collect())
        })
        .collect::<Result<_>>()?;

    let mut records = Vec::with_capacity(pairs.pairs.len() * ks.len());
    for (pi, p) in pairs.pairs.iter().enumerate() {
        for (m, &k) in ks.iter().enumerate() {
            let value = per_k[m][pi];
            if !value.re.is_finite() || !value.im.is_finite() {
                return Err(Error::SolverBreakdown("non-finite value".into()).context(format!(
                    "k = {k}, pair ({}, {})",
                    p.base, p.rotation
                )));
            }
            records.push(Record { theta: p.inc, obs: p.obs, k, value });
        }
    }
    let manifest = Manifest {
        version: FORMAT_VERSION,
        scatterer: spec.clone(),
        directions: DirectionManifest { count: pairs.base.len(), config: pairs.config },
        k_minus: grid.k_minus,
        k_plus: grid.k_plus,
        dk: grid.dk,
        delta: 0.0,
        seed: None,
        count: records.len(),
        generator: generator_tag(),
    };
    Ok(FarFieldDataset { manifest, records })
}

/// Multiplies each value by `1 + δ(X + iY)`, with `X, Y` standard normals
/// drawn from ChaCha20 seeded by `seed`, one `(X, Y)` per record in order.
pub fn add_noise(data: &FarFieldDataset, delta: f64, seed: u64) -> Result<FarFieldDataset> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("noise level {delta} must be nonnegative")));
    }
    let mut out = data.clone();
    out.manifest.delta = delta;
    out.manifest.seed = Some(seed);
    if delta == 0.0 {
        return Ok(out);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for r in &mut out.records {
        let x: f64 = StandardNormal.sample(&mut rng);
        let y: f64 = StandardNormal.sample(&mut rng);
        r.value *= Complex64::new(1.0 + delta * x, delta * y);
    }
    Ok(out)
}

const CSV_HEADER: &str = "theta_x,theta_y,obs_x,obs_y,k,re,im";

fn push_num(line: &mut String, v: f64) {
    // 17 significant digits round-trip every f64.
    let _ = write!(line, "{v:.16e}");
}

pub fn write_dataset<W: Write>(data: &FarFieldDataset, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    let mut manifest = data.manifest.clone();
    manifest.count = data.records.len();
    serde_json::to_writer(&mut w, &manifest)?;
    writeln!(w)?;
    writeln!(w, "{CSV_HEADER}")?;
    let mut line = String::with_capacity(200);
    for r in &data.records {
        line.clear();
        for (i, v) in [r.theta.x(), r.theta.y(), r.obs.x(), r.obs.y(), r.k, r.value.re, r.value.im]
            .into_iter()
            .enumerate()
        {
            if i > 0 {
                line.push(',');
            }
            push_num(&mut line, v);
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_dataset(data: &FarFieldDataset, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_dataset(data, file).map_err(|e| e.context(format!("writing {}", path.display())))
}

pub fn read_dataset<R: std::io::Read>(input: R) -> Result<FarFieldDataset> {
    let reader = BufReader::new(input);
    let mut lines = reader.lines();
    let first = lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })??;
    let manifest: Manifest =
        serde_json::from_str(&first).map_err(|e| Error::Parse { line: 1, msg: format!("manifest: {e}") })?;
    if manifest.version != FORMAT_VERSION {
        return Err(Error::Parse { line: 1, msg: format!("unsupported version {}", manifest.version) });
    }
    let grid = manifest.grid().map_err(|e| e.context("manifest band"))?;
    let rotations = match manifest.directions.config {
        DirectionConfig::A1 { .. } => 1,
        DirectionConfig::A2 { .. } => 3,
    };
    let expected = manifest.directions.count * rotations * grid.len();
    if manifest.count != expected {
        return Err(Error::Integrity(format!(
            "manifest count {} disagrees with {} directions × {rotations} rotations × {} wavenumbers",
            manifest.count,
            manifest.directions.count,
            grid.len()
        )));
    }
    let mut records = Vec::with_capacity(manifest.count);
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        let line = line?;
        if lineno == 2 && line.trim() == CSV_HEADER {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut vals = [0.0f64; 7];
        let mut n = 0;
        for field in line.split(',') {
            if n == 7 {
                return Err(Error::Parse { line: lineno, msg: "more than 7 fields".into() });
            }
            vals[n] = field
                .trim()
                .parse()
                .map_err(|_| Error::Parse { line: lineno, msg: format!("bad number {field:?}") })?;
            n += 1;
        }
        if n != 7 {
            return Err(Error::Parse { line: lineno, msg: format!("expected 7 fields, found {n}") });
        }
        let dir = |x, y| Direction::from_unit(x, y).map_err(|e| Error::Parse { line: lineno, msg: e.to_string() });
        records.push(Record {
            theta: dir(vals[0], vals[1])?,
            obs: dir(vals[2], vals[3])?,
            k: vals[4],
            value: Complex64::new(vals[5], vals[6]),
        });
    }
    if records.len() != manifest.count {
        return Err(Error::Integrity(format!(
            "manifest announces {} records, file holds {}",
            manifest.count,
            records.len()
        )));
    }
    Ok(FarFieldDataset { manifest, records })
}

pub fn load_dataset(path: &Path) -> Result<FarFieldDataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io(e).context(format!("opening {}", path.display())))?;
    read_dataset(file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{reflect_normal, BoundaryCurve, Vec2};
    use crate::solver::BoundaryCondition;
    use proptest::prelude::*;

    fn disk_spec(bc: BoundaryCondition) -> ScattererSpec {
        ScattererSpec::new(BoundaryCurve::disk(1.5, Vec2::default()).unwrap(), bc).unwrap()
    }

    fn small_dataset(config: DirectionConfig, l: usize) -> FarFieldDataset {
        let pairs = build_direction_set(l, config).unwrap();
        let grid = FrequencyGrid::new(2.0, 2.5, 0.25).unwrap();
        synthesize(&disk_spec(BoundaryCondition::Dirichlet), &pairs, &grid).unwrap()
    }

    #[test]
    fn a1_reverse_pairs() {
        let set = build_direction_set(4, DirectionConfig::backscatter()).unwrap();
        assert_eq!(set.pairs.len(), 4);
        assert_eq!(set.pairs[0].obs.vec(), Vec2::new(-1.0, 0.0));
        assert_eq!(set.pairs[0].inc.vec(), Vec2::new(1.0, 0.0));
        for p in &set.pairs {
            assert_eq!(p.obs, -p.inc);
        }
        assert!(matches!(build_direction_set(3, DirectionConfig::backscatter()), Err(Error::DirectionSet(_))));
    }

    #[test]
    fn a2_first_rotation_example() {
        let set = build_direction_set(64, DirectionConfig::a2_default()).unwrap();
        let p = set.pairs[1];
        let r = 0.5f64.sqrt();
        assert!((p.inc.x() - r).abs() < 1e-15 && (p.inc.y() + r).abs() < 1e-15);
        assert!((p.obs.x() + r).abs() < 1e-15 && (p.obs.y() + r).abs() < 1e-15);
        let phi = reflect_normal(p.obs, p.inc).unwrap();
        assert!((phi.x() - 1.0).abs() < 1e-12 && phi.y().abs() < 1e-12);
        assert!(matches!(build_direction_set(96, DirectionConfig::a2_default()), Err(Error::DirectionSet(_))));
    }

    #[test]
    fn a2_rotated_pairs_share_reflection_normals() {
        for l in [64, 128] {
            let set = build_direction_set(l, DirectionConfig::a2_default()).unwrap();
            for p in &set.pairs {
                assert!((p.obs.vec().norm() - 1.0).abs() < 1e-15);
                let theta = set.base[p.base];
                let phi = reflect_normal(p.obs, p.inc).unwrap();
                assert!(phi.approx_eq(theta, 1e-12), "{p:?}");
                // Incident directions stay in the base set.
                assert!(set.base.iter().any(|&b| b == p.inc));
                if p.rotation > 0 {
                    let xhat = -theta;
                    let alpha = [8, 10][p.rotation - 1] as f64;
                    let c = (alpha * PI / 32.0).cos();
                    assert!((xhat.dot(p.obs.vec()) - c).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn frequency_grid_counts() {
        let g = FrequencyGrid::new(20.0, 50.0, 0.1).unwrap();
        assert_eq!(g.len(), 301);
        assert!((g.k(300) - 50.0).abs() < 1e-12);
        assert!(FrequencyGrid::new(50.0, 20.0, 0.1).is_err());
        assert!(FrequencyGrid::new(20.0, 50.05, 0.1).is_err());
    }

    #[test]
    fn disk_record_matches_reference_value() {
        let pairs = build_direction_set(4, DirectionConfig::backscatter()).unwrap();
        let grid = FrequencyGrid::new(20.0, 20.2, 0.1).unwrap();
        let data = synthesize(&disk_spec(BoundaryCondition::Dirichlet), &pairs, &grid).unwrap();
        assert_eq!(data.records.len(), 12);
        let v = data.backscatter(Direction::from_angle(PI)).unwrap()[0].1;
        let v0 = data.records[0].value;
        assert_eq!(v, v0);
        assert!((v.re - 0.8278).abs() < 2e-3 && (v.im + 0.2555).abs() < 2e-3, "{v}");
    }

    #[test]
    fn records_are_canonically_ordered() {
        let data = small_dataset(DirectionConfig::a2_default(), 64);
        assert_eq!(data.records.len(), 64 * 3 * 3);
        let set = data.pair_set().unwrap();
        for p in &set.pairs {
            let recs = data.pair_records(p.base, p.rotation).unwrap();
            for (m, r) in recs.iter().enumerate() {
                assert_eq!((r.obs, r.theta), (p.obs, p.inc));
                assert_eq!(r.k, 2.0 + 0.25 * m as f64);
            }
        }
    }

    #[test]
    fn zero_noise_is_identity_and_seeded_noise_is_reproducible() {
        let data = small_dataset(DirectionConfig::backscatter(), 8);
        let same = add_noise(&data, 0.0, 3).unwrap();
        assert_eq!(same.records, data.records);
        let a = add_noise(&data, 0.1, 42).unwrap();
        let b = add_noise(&data, 0.1, 42).unwrap();
        let mut fa = Vec::new();
        let mut fb = Vec::new();
        write_dataset(&a, &mut fa).unwrap();
        write_dataset(&b, &mut fb).unwrap();
        assert_eq!(fa, fb);
        let c = add_noise(&data, 0.1, 43).unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn noise_statistics() {
        let n = 100_000;
        let rec = Record {
            theta: Direction::from_angle(0.0),
            obs: Direction::from_angle(PI),
            k: 1.0,
            value: Complex64::new(0.3, -0.7),
        };
        let mut data = small_dataset(DirectionConfig::backscatter(), 4);
        data.records = vec![rec; n];
        let noisy = add_noise(&data, 0.1, 7).unwrap();
        let (mut sxx, mut syy, mut sxy, mut mean_sq) = (0.0, 0.0, 0.0, 0.0);
        for r in &noisy.records {
            let e = r.value / rec.value - 1.0;
            let (x, y) = (e.re / 0.1, e.im / 0.1);
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
            mean_sq += e.norm_sqr();
        }
        let nf = n as f64;
        assert!((mean_sq / nf - 0.02).abs() < 0.05 * 0.02);
        assert!((sxx / nf - 1.0).abs() < 0.05 && (syy / nf - 1.0).abs() < 0.05 && (sxy / nf).abs() < 0.05);
    }

    #[test]
    fn save_and_load_round_trip() {
        let data = add_noise(&small_dataset(DirectionConfig::a2_default(), 64), 0.1, 5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.echo");
        save_dataset(&data, &path).unwrap();
        let back = load_dataset(&path).unwrap();
        assert_eq!(back, data);
        let mut again = Vec::new();
        write_dataset(&back, &mut again).unwrap();
        assert_eq!(again, std::fs::read(&path).unwrap());
    }

    #[test]
    fn truncated_and_malformed_files() {
        let data = small_dataset(DirectionConfig::backscatter(), 4);
        let mut buf = Vec::new();
        write_dataset(&data, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();

        let truncated = lines[..lines.len() - 2].join("\n");
        assert!(matches!(read_dataset(truncated.as_bytes()), Err(Error::Integrity(_))));

        let manifest_only = lines[0].to_string();
        assert!(matches!(read_dataset(manifest_only.as_bytes()), Err(Error::Integrity(_))));

        let mut bad = lines.clone();
        bad[4] = "1.0,0.0,oops,0.0,2.0,0.1,0.2";
        match read_dataset(bad.join("\n").as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn manifest_with_wrong_count_is_rejected() {
        let data = small_dataset(DirectionConfig::backscatter(), 4);
        let mut m = data.manifest.clone();
        m.k_minus = 20.0;
        m.k_plus = 50.0;
        m.dk = 0.1;
        m.count = 0;
        let text = serde_json::to_string(&m).unwrap();
        assert!(matches!(read_dataset(text.as_bytes()), Err(Error::Integrity(_))));
    }

    proptest! {
        #[test]
        fn noise_keeps_order_and_directions(seed in any::<u64>(), delta in 0.0f64..1.0) {
            let data = small_dataset(DirectionConfig::backscatter(), 4);
            let noisy = add_noise(&data, delta, seed).unwrap();
            prop_assert_eq!(noisy.records.len(), data.records.len());
            for (a, b) in noisy.records.iter().zip(&data.records) {
                prop_assert_eq!((a.theta, a.obs, a.k), (b.theta, b.obs, b.k));
            }
        }
    }
}
