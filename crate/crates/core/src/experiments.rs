//! Scenario runner, run records, CSV/JSON output and binary tuple files.
//!
//! Every scenario derives its random streams from
//! `SeedSpec::with_path(seed, [scenario])`, then `.child(k).child(replica)`,
//! and collects parallel work in index order. Metric tables are therefore
//! bit-identical across worker counts.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::concentration::{deviation_profile, nondecreasing_in_k, Observable, Statistic};
use crate::ensembles::{sample_tuple, EnsembleKind, MatTuple};
use crate::freeprob::{limit_norm, GeneratorSpec, LimitNorm, LimitNormOptions};
use crate::laws::{empirical_law, is_microstate, Law, NeighborhoodSpec};
use crate::linalg::{is_hermitian, ntrace, CMat, C64};
use crate::ncpoly::{Letter, Monomial, NcPoly};
use crate::orbit::{dorb_exact_herm1, dorb_lower, dorb_upper, Certification, OrbitDistance, OrbitOptions};
use crate::seed::SeedSpec;
use crate::spectral::{hausdorff, op_norm, spectrum_set, HausdorffTarget};
use crate::tensorops::{eval_tensor_poly, haagerup_witness, nonamen_laplacian, norm_inf_one_lower, tensor_norm, WeightVector};
use crate::{Error, Result};

/// Version string stored in every record.
pub const VERSION: &str = concat!("strongconv ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioId {
    HtStrong,
    AsymFree,
    TensorProbe,
    Collapse,
    EntropyProbe,
    Concentration,
    NonamenGap,
    HaarVariant,
    Witness,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 9] = [
        Self::HtStrong,
        Self::AsymFree,
        Self::TensorProbe,
        Self::Collapse,
        Self::EntropyProbe,
        Self::Concentration,
        Self::NonamenGap,
        Self::HaarVariant,
        Self::Witness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::HtStrong => "ht-strong",
            Self::AsymFree => "asym-free",
            Self::TensorProbe => "tensor-probe",
            Self::Collapse => "collapse",
            Self::EntropyProbe => "entropy-probe",
            Self::Concentration => "concentration",
            Self::NonamenGap => "nonamen-gap",
            Self::HaarVariant => "haar-variant",
            Self::Witness => "witness",
        }
    }

    fn index(self) -> u64 {
        Self::ALL.iter().position(|&s| s == self).expect("listed") as u64 + 1
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|id| id.name() == key || format!("s{}", id.index()) == key)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scenario {s:?}")))
    }
}

/// Scenario parameters. Empty lists select per-scenario defaults, which are
/// written back into the record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioParams {
    /// Strictly ascending matrix dimensions.
    pub ks: Vec<usize>,
    /// Tuple length.
    pub r: usize,
    pub reps: usize,
    /// Degree cap for laws.
    pub degree: usize,
    pub q_max: usize,
    /// Lanczos tolerance.
    pub tol: f64,
    pub polys: Vec<String>,
    /// Polynomial maps `f = (P_1, …, P_m)` for the collapse and entropy probes.
    pub maps: Vec<Vec<String>>,
    pub epsilons: Vec<f64>,
    /// Neighborhood tolerance for microstate filtering.
    pub law_eps: f64,
    pub ensemble: EnsembleKind,
    pub restarts: usize,
    pub max_iters: usize,
    /// Worker threads; `None` uses the rayon default. Does not affect results.
    pub threads: Option<usize>,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            ks: vec![32, 64, 128, 256],
            r: 2,
            reps: 20,
            degree: 4,
            q_max: 12,
            tol: 1e-10,
            polys: Vec::new(),
            maps: Vec::new(),
            epsilons: Vec::new(),
            law_eps: 0.3,
            ensemble: EnsembleKind::Gue,
            restarts: 4,
            max_iters: 300,
            threads: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub id: ScenarioId,
    pub seed: u64,
    #[serde(default)]
    pub params: ScenarioParams,
}

impl ScenarioSpec {
    pub fn new(id: ScenarioId, seed: u64) -> Self {
        Self { id, seed, params: ScenarioParams::default() }
    }

    /// Parse a JSON config mirroring [`ScenarioSpec`]. Parameters may sit at top
    /// level or under `"params"`; `id` and `seed`, when present, must agree with the caller's.
    pub fn from_config(id: ScenarioId, seed: u64, config: &str) -> Result<Self> {
        let mut value: Value = if config.trim().is_empty() { json!({}) } else { serde_json::from_str(config)? };
        let obj = value
            .as_object_mut()
            .ok_or_else(|| Error::InvalidArgument("config must be a JSON object".into()))?;
        if let Some(v) = obj.remove("id") {
            let given: ScenarioId = serde_json::from_value(v)?;
            if given != id {
                return Err(Error::InvalidArgument(format!("config is for scenario {given}, not {id}")));
            }
        }
        obj.remove("seed");
        let params_value = match obj.remove("params") {
            Some(p) if obj.is_empty() => p,
            Some(_) => return Err(Error::InvalidArgument("config mixes top-level parameters with \"params\"".into())),
            None => value,
        };
        let spec = Self { id, seed, params: serde_json::from_value(params_value)? };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        if p.ks.is_empty() || p.ks.windows(2).any(|w| w[0] >= w[1]) || p.ks[0] == 0 {
            return Err(Error::InvalidArgument("ks must be a nonempty strictly ascending list of positive sizes".into()));
        }
        if p.r == 0 || p.reps == 0 || p.degree == 0 || p.q_max == 0 {
            return Err(Error::InvalidArgument("r, reps, degree and q_max must be ≥ 1".into()));
        }
        for s in p.polys.iter().chain(p.maps.iter().flatten()) {
            s.parse::<NcPoly>()?;
        }
        if p.epsilons.iter().any(|&e| !(e >= 0.0)) {
            return Err(Error::InvalidArgument("epsilons must be ≥ 0".into()));
        }
        Ok(())
    }
}

/// A metric table: named columns and rows of JSON scalars.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Value>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: ScenarioId,
    /// Parameters with defaults resolved.
    pub params: ScenarioParams,
    pub seed: SeedSpec,
    pub tables: BTreeMap<String, Table>,
    pub wall_clock_seconds: f64,
    pub version: String,
    pub notes: Vec<String>,
}

impl RunRecord {
    /// The spec that reproduces this record.
    pub fn spec(&self) -> ScenarioSpec {
        ScenarioSpec { id: self.scenario, seed: self.seed.master_seed, params: self.params.clone() }
    }
}

fn num(x: f64) -> Value {
    Value::from(x)
}

fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, Value::from)
}

fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn generator_spec(kind: EnsembleKind, r: usize) -> GeneratorSpec {
    match kind {
        EnsembleKind::Gue => GeneratorSpec::semicircular(r),
        EnsembleKind::Haar => GeneratorSpec::haar(r),
    }
}

fn parse_all(src: &[String]) -> Result<Vec<NcPoly>> {
    src.iter().map(|s| s.parse()).collect()
}

/// Run a scenario in a worker pool of `params.threads` threads.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<RunRecord> {
    spec.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = spec.params.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let mut ctx = Ctx {
        params: spec.params.clone(),
        seed: SeedSpec::with_path(spec.seed, &[spec.id.index()]),
        tables: BTreeMap::new(),
        notes: Vec::new(),
    };
    pool.install(|| ctx.run(spec.id))?;
    Ok(RunRecord {
        scenario: spec.id,
        params: ctx.params,
        seed: SeedSpec::new(spec.seed),
        tables: ctx.tables,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        version: VERSION.to_string(),
        notes: ctx.notes,
    })
}

struct Ctx {
    params: ScenarioParams,
    seed: SeedSpec,
    tables: BTreeMap<String, Table>,
    notes: Vec<String>,
}

/// Spectral hull `[lo, hi]` of a self-adjoint polynomial in the limit, and whether it is exact.
///
/// Affine single-generator polynomials have closed-form hulls; otherwise
/// `hi = ‖P + c‖ − c` and `lo = c − ‖c − P‖` with `c` the estimated `‖P‖`.
pub fn support_hull(p: &NcPoly, spec: &GeneratorSpec, q_max: usize) -> Result<(f64, f64, bool)> {
    // Semicircular generators are self-adjoint, so `T'` and `T` coincide.
    let fold = |q: &NcPoly| if spec.is_haar() { q.clone() } else { q.substitute(|l| NcPoly::generator(l.index)) };
    let p = &fold(p);
    let skew = p - &fold(&p.adjoint());
    if skew.terms().any(|(_, c)| c.norm() > 1e-12) {
        return Err(Error::InvalidArgument(format!("{p} is not self-adjoint")));
    }
    if p.degree() <= 1 {
        let idx: Vec<usize> = p.terms().filter(|(m, _)| !m.is_unit()).map(|(m, _)| m.letters()[0].index).collect();
        if idx.windows(2).all(|w| w[0] == w[1]) {
            let b = p.coeff(&Monomial::unit()).re;
            if let Some(&j) = idx.first() {
                let plain = p.coeff(&Monomial::from_letters(vec![Letter::generator(j)]));
                let star = p.coeff(&Monomial::from_letters(vec![Letter::generator(j).adjoint()]));
                match spec.kind {
                    crate::freeprob::GeneratorKind::Semicircular { mean, variance } => {
                        let a = (plain + star).re;
                        let c = b + a * mean;
                        let w = 2.0 * a.abs() * variance.sqrt();
                        return Ok((c - w, c + w, true));
                    }
                    crate::freeprob::GeneratorKind::HaarUnitary => {
                        let a = plain.norm();
                        return Ok((b - 2.0 * a, b + 2.0 * a, true));
                    }
                }
            }
            return Ok((b, b, true));
        }
    }
    let opts = LimitNormOptions::with_q_max(q_max);
    let c = limit_norm(p, spec, &opts)?.extrapolated;
    let shift = NcPoly::constant(C64::new(c, 0.0));
    let hi = limit_norm(&(p + &shift), spec, &opts)?.extrapolated - c;
    let lo = c - limit_norm(&(&shift - p), spec, &opts)?.extrapolated;
    Ok((lo, hi, false))
}

impl Ctx {
    fn run(&mut self, id: ScenarioId) -> Result<()> {
        match id {
            ScenarioId::HtStrong => self.ht_strong("", self.params.ensemble),
            ScenarioId::AsymFree => self.asym_free("", self.params.ensemble),
            ScenarioId::TensorProbe => self.tensor_probe("", self.params.ensemble),
            ScenarioId::Collapse => self.collapse("", self.params.ensemble),
            ScenarioId::EntropyProbe => self.entropy_probe(),
            ScenarioId::Concentration => self.concentration(),
            ScenarioId::NonamenGap => self.nonamen_gap(),
            ScenarioId::HaarVariant => {
                self.params.ensemble = EnsembleKind::Haar;
                self.ht_strong("haar_", EnsembleKind::Haar)?;
                self.asym_free("haar_", EnsembleKind::Haar)?;
                self.tensor_probe("haar_", EnsembleKind::Haar)?;
                self.collapse("haar_", EnsembleKind::Haar)
            }
            ScenarioId::Witness => self.witness(),
        }
    }

    fn tuple(&self, kind: EnsembleKind, r: usize, k: usize, stream: u64, rep: usize) -> Result<MatTuple> {
        sample_tuple(kind, r, k, &self.seed.child(stream).child(k as u64).child(rep as u64))
    }

    fn default_polys(&mut self, f: impl FnOnce(usize) -> Vec<String>) -> Result<Vec<NcPoly>> {
        if self.params.polys.is_empty() {
            self.params.polys = f(self.params.r);
        }
        parse_all(&self.params.polys)
    }

    fn ht_strong(&mut self, prefix: &str, kind: EnsembleKind) -> Result<()> {
        let polys = self.default_polys(|r| match (kind, r) {
            (EnsembleKind::Gue, 1) => vec!["T1".into(), "T1 T1 - 1".into()],
            (EnsembleKind::Gue, _) => vec!["T1".into(), "T1 + T2".into(), "T1 T1 - 1".into()],
            (EnsembleKind::Haar, 1) => vec!["T1 + T1'".into()],
            (EnsembleKind::Haar, _) => vec!["T1 + T1'".into(), "T1 + T1' + T2 + T2'".into()],
        })?;
        let r = self.params.r.max(polys.iter().map(NcPoly::max_index).max().unwrap_or(1));
        let spec = generator_spec(kind, r);
        let q_max = self.params.q_max;
        let mut limits = Vec::new();
        for p in &polys {
            let lim = limit_norm(p, &spec, &LimitNormOptions::with_q_max(q_max)).map(|l| l.extrapolated);
            let hull = support_hull(p, &spec, q_max);
            if let Err(e) = &lim {
                self.notes.push(format!("{prefix}ht_strong: limit norm of {p}: {e}"));
            }
            if let Err(e) = &hull {
                self.notes.push(format!("{prefix}ht_strong: support of {p}: {e}"));
            }
            limits.push((lim.ok(), hull.ok()));
        }
        let mut table = Table::new(&[
            "k", "rep", "poly", "finite_norm", "limit_norm", "norm_gap", "support_lo", "support_hi", "support_exact", "hausdorff",
        ]);
        let mut summary = Table::new(&["k", "poly", "median_hausdorff", "median_abs_norm_gap"]);
        for &k in &self.params.ks {
            let reps = self.params.reps;
            let rows: Vec<Vec<(f64, Option<f64>)>> = (0..reps)
                .into_par_iter()
                .map(|rep| {
                    let t = self.tuple(kind, r, k, 0, rep)?;
                    polys
                        .iter()
                        .zip(&limits)
                        .map(|(p, (_, hull))| {
                            let m = p.evaluate(t.matrices())?;
                            let norm = op_norm(&m);
                            let h = match hull {
                                Some((lo, hi, _)) if is_hermitian(&m, 1e-10) => {
                                    Some(hausdorff(&spectrum_set(&m)?, &HausdorffTarget::Intervals(vec![(*lo, *hi)]))?)
                                }
                                _ => None,
                            };
                            Ok((norm, h))
                        })
                        .collect()
                })
                .collect::<Result<_>>()?;
            for (pi, p) in polys.iter().enumerate() {
                let (lim, hull) = &limits[pi];
                let mut hs = Vec::new();
                let mut gaps = Vec::new();
                for (rep, row) in rows.iter().enumerate() {
                    let (norm, h) = row[pi];
                    let gap = lim.map(|l| norm - l);
                    hs.extend(h);
                    gaps.extend(gap.map(f64::abs));
                    table.push(vec![
                        json!(k),
                        json!(rep),
                        json!(p.to_string()),
                        num(norm),
                        opt(*lim),
                        opt(gap),
                        opt(hull.map(|h| h.0)),
                        opt(hull.map(|h| h.1)),
                        hull.map_or(Value::Null, |h| json!(h.2)),
                        opt(h),
                    ]);
                }
                summary.push(vec![json!(k), json!(p.to_string()), num(median(&hs)), num(median(&gaps))]);
            }
        }
        self.tables.insert(format!("{prefix}ht_strong"), table);
        self.tables.insert(format!("{prefix}ht_strong_summary"), summary);
        Ok(())
    }

    fn asym_free(&mut self, prefix: &str, kind: EnsembleKind) -> Result<()> {
        let r = self.params.r;
        let degree = self.params.degree;
        let words: Vec<Monomial> = if self.params.polys.is_empty() || !prefix.is_empty() {
            Monomial::enumerate(r, degree).into_iter().filter(|m| !m.is_unit()).collect()
        } else {
            parse_all(&self.params.polys)?
                .into_iter()
                .map(|p| p.terms().next().map(|(m, _)| m.clone()).unwrap_or_else(Monomial::unit))
                .collect()
        };
        let degree = degree.max(words.iter().map(Monomial::degree).max().unwrap_or(1));
        let spec = generator_spec(kind, r);
        let oracle = Law::from_oracle(&spec, r, degree, vec![f64::INFINITY; r])?;
        let mut table = Table::new(&["k", "word", "mc_mean_re", "mc_mean_im", "oracle", "abs_gap", "std_err"]);
        for &k in &self.params.ks {
            let reps = self.params.reps;
            let laws: Vec<Law> = (0..reps)
                .into_par_iter()
                .map(|rep| empirical_law(&self.tuple(kind, r, k, 1, rep)?, degree))
                .collect::<Result<_>>()?;
            for w in &words {
                let vals: Vec<C64> = laws.iter().map(|l| l.get(w).expect("complete law")).collect();
                let mean: C64 = vals.iter().sum::<C64>() / reps as f64;
                let var = vals.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (reps.max(2) - 1) as f64;
                let o = oracle.get(w).expect("complete law");
                table.push(vec![
                    json!(k),
                    json!(w.to_string()),
                    num(mean.re),
                    num(mean.im),
                    num(o.re),
                    num((mean - o).norm()),
                    num((var / reps as f64).sqrt()),
                ]);
            }
        }
        self.tables.insert(format!("{prefix}asym_free"), table);
        Ok(())
    }

    fn tensor_probe(&mut self, prefix: &str, kind: EnsembleKind) -> Result<()> {
        let polys = self.default_polys(|r| vec![format!("T1 + T{}", r + 1), format!("T1 T{}", r + 1)])?;
        let r = self.params.r;
        let spec = generator_spec(kind, r);
        let limits: Vec<Option<f64>> = polys
            .iter()
            .map(|p| match limit_norm(p, &spec, &LimitNormOptions::with_q_max(self.params.q_max)) {
                Ok(l) => Some(l.extrapolated),
                Err(e) => {
                    self.notes.push(format!("{prefix}tensor_probe: limit norm of {p}: {e}"));
                    None
                }
            })
            .collect();
        let mut table = Table::new(&[
            "k", "rep", "poly", "finite_norm", "converged", "limit_norm", "norm_gap", "moment_gap", "inf_one_lower", "inf_one_ratio",
        ]);
        let tol = self.params.tol;
        for &k in &self.params.ks {
            let rows: Vec<Vec<Vec<Value>>> = (0..self.params.reps)
                .into_par_iter()
                .map(|rep| {
                    let x = self.tuple(kind, r, k, 2, rep)?;
                    let y = self.tuple(kind, r, k, 3, rep)?;
                    polys
                        .iter()
                        .zip(&limits)
                        .map(|(p, lim)| {
                            let t = eval_tensor_poly(p, &x, &y)?;
                            let n = tensor_norm(&t, tol)?;
                            let moment: C64 = t.terms().iter().map(|s| s.coeff * ntrace(&s.left) * ntrace(&s.right)).sum();
                            let oracle = crate::freeprob::poly_moment(p, &spec)?;
                            let lower = if k <= 64 {
                                Some(norm_inf_one_lower(&t, 2, &self.seed.child(4).child(k as u64).child(rep as u64))?.value)
                            } else {
                                None
                            };
                            Ok(vec![
                                json!(k),
                                json!(rep),
                                json!(p.to_string()),
                                num(n.value),
                                json!(n.converged),
                                opt(*lim),
                                opt(lim.map(|l| n.value - l)),
                                num((moment - oracle).norm()),
                                opt(lower),
                                opt(lower.zip(*lim).map(|(a, b)| a / b)),
                            ])
                        })
                        .collect()
                })
                .collect::<Result<_>>()?;
            for row in rows.into_iter().flatten() {
                table.push(row);
            }
        }
        self.tables.insert(format!("{prefix}tensor_probe"), table);
        Ok(())
    }

    fn orbit_options(&self, stream: u64) -> OrbitOptions {
        OrbitOptions {
            restarts: self.params.restarts,
            max_iters: self.params.max_iters,
            seed: self.seed.child(stream),
            ..OrbitOptions::default()
        }
    }

    fn default_maps(&mut self) -> Result<Vec<Vec<NcPoly>>> {
        if self.params.maps.is_empty() {
            let all: Vec<String> = (1..=self.params.r).map(|j| format!("T{j}")).collect();
            self.params.maps = if self.params.r > 1 { vec![vec!["T1".into()], all] } else { vec![all] };
        }
        self.params.maps.iter().map(|m| parse_all(m)).collect()
    }

    fn collapse(&mut self, prefix: &str, kind: EnsembleKind) -> Result<()> {
        let maps = self.default_maps()?;
        let r = self.params.r.max(maps.iter().flatten().map(NcPoly::max_index).max().unwrap_or(1));
        let mut table = Table::new(&["k", "rep", "map", "value", "certification", "lower_bound", "restarts_used"]);
        let mut summary = Table::new(&["k", "map", "median_value", "certification"]);
        let labels: Vec<String> =
            maps.iter().map(|m| m.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ")).collect();
        for &k in &self.params.ks {
            let results: Vec<Vec<(f64, Certification, f64, usize)>> = (0..self.params.reps)
                .into_par_iter()
                .map(|rep| {
                    let a = self.tuple(kind, r, k, 5, rep)?;
                    let b = self.tuple(kind, r, k, 6, rep)?;
                    maps.iter()
                        .map(|f| {
                            let fa = MatTuple::new(f.iter().map(|p| p.evaluate(a.matrices())).collect::<Result<_>>()?)?;
                            let fb = MatTuple::new(f.iter().map(|p| p.evaluate(b.matrices())).collect::<Result<_>>()?)?;
                            let lower = dorb_lower(&fa, &fb)?;
                            let single_herm = fa.len() == 1 && is_hermitian(fa.get(0), 1e-10) && is_hermitian(fb.get(0), 1e-10);
                            if single_herm {
                                Ok((dorb_exact_herm1(fa.get(0), fb.get(0))?, Certification::Exact, lower, 0))
                            } else {
                                let opts = self.orbit_options(7 + rep as u64);
                                let res = dorb_upper(&fa, &fb, &opts)?;
                                Ok((res.value, res.certified, lower, res.restarts_used))
                            }
                        })
                        .collect()
                })
                .collect::<Result<_>>()?;
            for (mi, label) in labels.iter().enumerate() {
                let mut values = Vec::new();
                let mut cert = Certification::Exact;
                for (rep, row) in results.iter().enumerate() {
                    let (v, c, lo, used) = row[mi];
                    values.push(v);
                    if c == Certification::UpperBound {
                        cert = c;
                    }
                    table.push(vec![json!(k), json!(rep), json!(label), num(v), json!(c), num(lo), json!(used)]);
                }
                summary.push(vec![json!(k), json!(label), num(median(&values)), json!(cert)]);
            }
        }
        if maps.iter().any(|m| m.len() > 1) {
            self.notes.push(format!(
                "{prefix}collapse: multi-coordinate values are best-found upper bounds, never certified minima"
            ));
        }
        self.tables.insert(format!("{prefix}collapse"), table);
        self.tables.insert(format!("{prefix}collapse_summary"), summary);
        Ok(())
    }

    fn entropy_probe(&mut self) -> Result<()> {
        let maps = self.default_maps()?;
        if self.params.epsilons.is_empty() {
            self.params.epsilons = vec![0.05, 0.1, 0.25, 0.5];
        }
        let kind = self.params.ensemble;
        let r = self.params.r.max(maps.iter().flatten().map(NcPoly::max_index).max().unwrap_or(1));
        let spec = generator_spec(kind, r);
        let radius = match kind {
            EnsembleKind::Gue => crate::ensembles::default_gue_radius(),
            EnsembleKind::Haar => 1.0,
        };
        let center = Law::from_oracle(&spec, r, self.params.degree, vec![radius; r])?;
        let nbhd = NeighborhoodSpec::new(center, self.params.law_eps)?;
        let mut table = Table::new(&[
            "k", "map", "epsilon", "sampled", "microstates", "cover_size", "greedy_size", "h_estimate", "distance",
        ]);
        for &k in &self.params.ks {
            let samples: Vec<(MatTuple, bool)> = (0..self.params.reps)
                .into_par_iter()
                .map(|rep| {
                    let t = self.tuple(kind, r, k, 8, rep)?;
                    let ok = is_microstate(&t, &nbhd)?;
                    Ok((t, ok))
                })
                .collect::<Result<_>>()?;
            let accepted: Vec<&MatTuple> = samples.iter().filter(|(_, ok)| *ok).map(|(t, _)| t).collect();
            for f in &maps {
                let label = f.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ");
                let pushed: Vec<MatTuple> = accepted
                    .iter()
                    .map(|t| MatTuple::new(f.iter().map(|p| p.evaluate(t.matrices())).collect::<Result<_>>()?))
                    .collect::<Result<_>>()?;
                let exact = pushed.first().is_some_and(|t| t.len() == 1 && pushed.iter().all(|s| is_hermitian(s.get(0), 1e-10)));
                let dist = if exact { OrbitDistance::ExactHerm1 } else { OrbitDistance::Upper(self.orbit_options(9)) };
                let matrix = if pushed.is_empty() { None } else { Some(crate::orbit::pairwise_distances(&pushed, &dist)?) };
                for &eps in &self.params.epsilons {
                    let probe = matrix.as_ref().map(|d| crate::orbit::covering_from_distances(d, eps, k));
                    table.push(vec![
                        json!(k),
                        json!(label),
                        num(eps),
                        json!(samples.len()),
                        json!(pushed.len()),
                        json!(probe.as_ref().map_or(0, |p| p.cover_size)),
                        json!(probe.as_ref().map_or(0, |p| p.greedy_size)),
                        opt(probe.as_ref().map(|p| p.h_estimate)),
                        json!(if exact { "exact_herm1" } else { "dorb_upper" }),
                    ]);
                }
            }
        }
        self.tables.insert("entropy_probe".into(), table);
        Ok(())
    }

    fn concentration(&mut self) -> Result<()> {
        if self.params.epsilons.is_empty() {
            self.params.epsilons = vec![0.05, 0.1, 0.2, 0.5];
        }
        let observables: Vec<Observable> = if self.params.polys.is_empty() {
            self.params.polys = vec!["tr: T1 T1".into(), "norm: T1".into()];
            vec![
                Observable::new("T1 T1".parse()?, Statistic::TraceMoment),
                Observable::new("T1".parse()?, Statistic::OpNorm),
            ]
        } else {
            self.params.polys.iter().map(|s| parse_observable(s)).collect::<Result<_>>()?
        };
        let mut diag = Table::new(&["observable", "nondecreasing_in_k"]);
        for (i, obs) in observables.iter().enumerate() {
            let rows = deviation_profile(
                self.params.ensemble,
                obs,
                &self.params.ks,
                &self.params.epsilons,
                self.params.reps,
                &self.seed.child(10 + i as u64),
            )?;
            let mut table = Table::new(&["k", "epsilon", "tail_prob", "neg_log_tail_over_k2", "censored_flag"]);
            for row in &rows {
                table.push(vec![
                    json!(row.k),
                    num(row.epsilon),
                    num(row.tail_prob),
                    num(row.neg_log_tail_over_k2),
                    json!(row.censored),
                ]);
            }
            diag.push(vec![json!(self.params.polys[i]), json!(nondecreasing_in_k(&rows))]);
            self.tables.insert(format!("concentration_{i}"), table);
        }
        self.tables.insert("concentration_diagnostic".into(), diag);
        Ok(())
    }

    fn nonamen_gap(&mut self) -> Result<()> {
        let r = self.params.r;
        let kind = self.params.ensemble;
        if kind != EnsembleKind::Gue {
            return Err(Error::InvalidArgument("the tensor Laplacian scenario needs Hermitian (gue) coordinates".into()));
        }
        let mu = WeightVector::uniform(r);
        let mut table = Table::new(&["k", "rep", "lambda_min", "lambda_gap", "kernel_dim", "converged"]);
        for &k in &self.params.ks {
            let rows: Vec<Vec<Value>> = (0..self.params.reps)
                .into_par_iter()
                .map(|rep| {
                    let x = self.tuple(kind, r, k, 11, rep)?;
                    let g = nonamen_laplacian(&x, &mu)?;
                    Ok(vec![json!(k), json!(rep), num(g.lambda_min), num(g.lambda_gap), json!(g.kernel_dim), json!(g.converged)])
                })
                .collect::<Result<_>>()?;
            for row in rows {
                table.push(row);
            }
        }
        self.tables.insert("nonamen_gap".into(), table);
        Ok(())
    }

    fn witness(&mut self) -> Result<()> {
        let r = self.params.r;
        let terms: Vec<String> = (1..=r).map(|j| format!("T{j} T{}", r + j)).collect();
        let p: NcPoly = format!("{} * ({})", 1.0 / r as f64, terms.join(" + ")).parse()?;
        let oracle: Option<LimitNorm> = match limit_norm(&p, &GeneratorSpec::haar(r), &LimitNormOptions::with_q_max(self.params.q_max)) {
            Ok(l) => Some(l),
            Err(e) => {
                self.notes.push(format!("witness: oracle limit norm: {e}"));
                None
            }
        };
        let mut table = Table::new(&[
            "k", "rep", "witness_same", "witness_independent", "oracle_extrapolated", "oracle_raw", "gap",
        ]);
        for &k in &self.params.ks {
            let rows: Vec<Vec<Value>> = (0..self.params.reps)
                .into_par_iter()
                .map(|rep| {
                    let u = self.tuple(EnsembleKind::Haar, r, k, 12, rep)?;
                    let v = self.tuple(EnsembleKind::Haar, r, k, 13, rep)?;
                    let same = haagerup_witness(&u, &u)?.value;
                    let ind = haagerup_witness(&u, &v)?.value;
                    let ext = oracle.as_ref().map(|o| o.extrapolated);
                    Ok(vec![
                        json!(k),
                        json!(rep),
                        num(same),
                        num(ind),
                        opt(ext),
                        opt(oracle.as_ref().map(LimitNorm::best_lower_bound)),
                        opt(ext.map(|e| ind - e)),
                    ])
                })
                .collect::<Result<_>>()?;
            for row in rows {
                table.push(row);
            }
        }
        self.tables.insert("witness".into(), table);
        Ok(())
    }
}

/// `"tr: P"` or `"norm: P"`; a bare polynomial means the trace moment.
pub fn parse_observable(s: &str) -> Result<Observable> {
    let (stat, poly) = match s.split_once(':') {
        Some((tag, rest)) => match tag.trim() {
            "tr" | "trace" => (Statistic::TraceMoment, rest),
            "norm" => (Statistic::OpNorm, rest),
            other => return Err(Error::InvalidArgument(format!("unknown statistic {other:?}"))),
        },
        None => (Statistic::TraceMoment, s),
    };
    Ok(Observable::new(poly.parse()?, stat))
}

/// Output format for [`emit`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmitFormat {
    Json,
    Csv,
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Write `record.json`, or one `<table>.csv` per metric table, into `dir`.
pub fn emit(record: &RunRecord, format: EmitFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    match format {
        EmitFormat::Json => {
            let path = dir.join("record.json");
            fs::write(&path, serde_json::to_string_pretty(record)?)?;
            Ok(vec![path])
        }
        EmitFormat::Csv => {
            let mut out = Vec::new();
            for (name, table) in &record.tables {
                let path = dir.join(format!("{name}.csv"));
                let mut w = csv::Writer::from_path(&path).map_err(csv_error)?;
                w.write_record(&table.columns).map_err(csv_error)?;
                for row in &table.rows {
                    w.write_record(row.iter().map(csv_cell)).map_err(csv_error)?;
                }
                w.flush()?;
                out.push(path);
            }
            Ok(out)
        }
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

pub fn load_record(path: &Path) -> Result<RunRecord> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Sidecar describing a binary tuple file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TupleSidecar {
    pub k: usize,
    pub r: usize,
    pub hermitian_flags: Vec<bool>,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Write a tuple as little-endian interleaved `f64` re/im, row-major, one
/// matrix after another, with a JSON sidecar at `<path>.json`.
pub fn write_tuple(path: &Path, t: &MatTuple) -> Result<()> {
    let k = t.dim();
    let mut bytes = Vec::with_capacity(t.len() * k * k * 16);
    for m in t.matrices() {
        for i in 0..k {
            for j in 0..k {
                bytes.extend_from_slice(&m[(i, j)].re.to_le_bytes());
                bytes.extend_from_slice(&m[(i, j)].im.to_le_bytes());
            }
        }
    }
    fs::File::create(path)?.write_all(&bytes)?;
    let side = TupleSidecar {
        k,
        r: t.len(),
        hermitian_flags: t.matrices().iter().map(|m| is_hermitian(m, 1e-12)).collect(),
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&side)?)?;
    Ok(())
}

/// Read a tuple written by [`write_tuple`].
pub fn read_tuple(path: &Path) -> Result<MatTuple> {
    let side: TupleSidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let k = side.k;
    let expected = side.r * k * k * 16;
    if bytes.len() != expected || side.hermitian_flags.len() != side.r {
        return Err(Error::Dimension(format!("{} bytes for r={} k={k} (expected {expected})", bytes.len(), side.r)));
    }
    let mut vals = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
    let mut mats = Vec::with_capacity(side.r);
    for _ in 0..side.r {
        let mut m = CMat::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                let re = vals.next().expect("length checked");
                let im = vals.next().expect("length checked");
                m[(i, j)] = C64::new(re, im);
            }
        }
        mats.push(m);
    }
    MatTuple::new(mats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(id: ScenarioId) -> ScenarioSpec {
        let mut s = ScenarioSpec::new(id, 11);
        s.params.ks = vec![4, 8];
        s.params.reps = 3;
        s.params.q_max = 8;
        s.params.restarts = 2;
        s.params.max_iters = 50;
        s
    }

    #[test]
    fn scenario_names_round_trip() {
        for id in ScenarioId::ALL {
            assert_eq!(id.name().parse::<ScenarioId>().unwrap(), id);
            let j = serde_json::to_string(&id).unwrap();
            assert_eq!(j, format!("\"{}\"", id.name()));
        }
        assert_eq!("S3".parse::<ScenarioId>().unwrap(), ScenarioId::TensorProbe);
        assert!("s10".parse::<ScenarioId>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(ScenarioSpec::from_config(ScenarioId::HtStrong, 1, r#"{"ks": [64, 32]}"#).is_err());
        assert!(ScenarioSpec::from_config(ScenarioId::HtStrong, 1, r#"{"ks": []}"#).is_err());
        assert!(ScenarioSpec::from_config(ScenarioId::HtStrong, 1, r#"{"polys": ["T1 +"]}"#).is_err());
        assert!(ScenarioSpec::from_config(ScenarioId::HtStrong, 1, r#"{"bogus": 1}"#).is_err());
        let s = ScenarioSpec::from_config(ScenarioId::Witness, 5, r#"{"ks": [8], "reps": 2}"#).unwrap();
        assert_eq!(s.params.r, 2);
        assert_eq!(s.params.ks, vec![8]);
        let nested = ScenarioSpec::from_config(ScenarioId::Witness, 5, r#"{"id": "witness", "seed": 9, "params": {"ks": [8], "reps": 2}}"#);
        assert_eq!(nested.unwrap(), s);
        assert!(ScenarioSpec::from_config(ScenarioId::Witness, 5, r#"{"id": "collapse"}"#).is_err());
        let full = serde_json::to_string(&s).unwrap();
        assert_eq!(ScenarioSpec::from_config(ScenarioId::Witness, 5, &full).unwrap(), s);
    }

    #[test]
    fn every_scenario_runs_small() {
        for id in ScenarioId::ALL {
            let mut s = small(id);
            if id == ScenarioId::AsymFree {
                s.params.degree = 2;
            }
            let rec = run_scenario(&s).unwrap_or_else(|e| panic!("{id}: {e}"));
            assert!(!rec.tables.is_empty(), "{id}");
            for (name, t) in &rec.tables {
                assert!(t.rows.iter().all(|r| r.len() == t.columns.len()), "{id}/{name}");
            }
        }
    }

    #[test]
    fn record_round_trip_and_csv() {
        let rec = run_scenario(&small(ScenarioId::NonamenGap)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let json_path = emit(&rec, EmitFormat::Json, dir.path()).unwrap();
        assert_eq!(load_record(&json_path[0]).unwrap(), rec);
        let files = emit(&rec, EmitFormat::Csv, dir.path()).unwrap();
        let text = fs::read_to_string(&files[0]).unwrap();
        assert_eq!(text.lines().count(), 1 + rec.tables["nonamen_gap"].rows.len());
        assert_eq!(text.lines().next().unwrap(), "k,rep,lambda_min,lambda_gap,kernel_dim,converged");
    }

    #[test]
    fn empty_table_is_header_only() {
        let mut rec = run_scenario(&small(ScenarioId::NonamenGap)).unwrap();
        rec.tables.insert("empty".into(), Table::new(&["a", "b"]));
        let dir = tempfile::tempdir().unwrap();
        emit(&rec, EmitFormat::Csv, dir.path()).unwrap();
        assert_eq!(fs::read_to_string(dir.path().join("empty.csv")).unwrap(), "a,b\n");
    }

    #[test]
    fn tuple_file_round_trip() {
        let t = sample_tuple(EnsembleKind::Gue, 2, 5, &SeedSpec::new(1)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.bin");
        write_tuple(&p, &t).unwrap();
        assert_eq!(read_tuple(&p).unwrap(), t);
        let side: TupleSidecar = serde_json::from_str(&fs::read_to_string(dir.path().join("a.bin.json")).unwrap()).unwrap();
        assert_eq!(side, TupleSidecar { k: 5, r: 2, hermitian_flags: vec![true, true] });
        fs::write(&p, [0u8; 7]).unwrap();
        assert!(read_tuple(&p).is_err());
    }

    #[test]
    fn support_hulls() {
        let semi = GeneratorSpec::semicircular(2);
        assert_eq!(support_hull(&"T1".parse().unwrap(), &semi, 8).unwrap(), (-2.0, 2.0, true));
        assert_eq!(support_hull(&"3*T2 + 1".parse().unwrap(), &semi, 8).unwrap(), (-5.0, 7.0, true));
        let (lo, hi, exact) = support_hull(&"T1 T1 - 1".parse().unwrap(), &semi, 12).unwrap();
        assert!(!exact && (lo + 1.0).abs() < 0.1 && (hi - 3.0).abs() < 0.1, "{lo} {hi}");
        let haar = GeneratorSpec::haar(1);
        assert_eq!(support_hull(&"T1 + T1'".parse().unwrap(), &haar, 8).unwrap(), (-2.0, 2.0, true));
        assert!(support_hull(&"T1 T2".parse().unwrap(), &semi, 8).is_err());
    }
}
