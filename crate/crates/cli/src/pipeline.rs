use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use pseudoflat_core::incidence::{spanned_lines_incidences, spanned_planes_incidences, IncidenceStructure};
use pseudoflat_core::pointgen::PointSet;
use pseudoflat_core::prooflab::{
    admissible_triples, case_split, index_lemma_check, pigeonhole_levels, select_level_l,
    theorem13_diagnostic, AdmissibleCount, CaseReport, IndexLemmaReport, ProofContext, Theorem13Report,
};
use pseudoflat_core::xplab::{
    certify_bound, emit_outputs, spanned_histogram, BoundCertificate, ExperimentConfig, ExperimentReport,
    FamilyKind, RunRecord, Verdict, VERSION,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::manifest::{write_manifest, Timings};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: config field `{field}`: {message}")]
    Config { path: PathBuf, field: String, message: String },
    #[error(transparent)]
    Xplab(#[from] pseudoflat_core::xplab::XplabError),
    #[error("diagnose at size {size}: {message}")]
    Diagnose { size: u64, message: String },
    #[error("{path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

pub struct RunOptions {
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub verbose: bool,
}

pub struct Outcome {
    pub all_pass: bool,
    pub summary: String,
}

/// Parses a config, reporting the path of the offending field.
pub fn parse_config(path: &Path, text: &str) -> Result<ExperimentConfig, RunError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| RunError::Config {
        path: path.to_path_buf(),
        field: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

fn load_config(opts: &RunOptions) -> Result<ExperimentConfig, RunError> {
    let text = std::fs::read_to_string(&opts.config).map_err(|source| RunError::Read {
        path: opts.config.clone(),
        source,
    })?;
    let mut cfg = parse_config(&opts.config, &text)?;
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if opts.threads.is_some() {
        cfg.threads = opts.threads;
    }
    if let Some(p) = &cfg.points_file {
        if p.is_relative() {
            let base = opts.config.parent().unwrap_or(Path::new("."));
            cfg.points_file = Some(base.join(p));
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct IndexSummary {
    lemma: IndexLemmaReport,
    chosen_level: u32,
    family_size: usize,
    s1_size: usize,
    pigeonhole_ok: bool,
    case: CaseReport,
    big_l: u32,
    chosen_l: u32,
    s2_size: usize,
    level_pigeonhole_ok: bool,
    density_ok: bool,
    admissible: AdmissibleCount,
}

#[derive(Serialize)]
struct Diagnosis {
    size: u64,
    k: usize,
    r: usize,
    theorem13: Theorem13Report,
    index: Option<IndexSummary>,
}

fn diagnose_one(cfg: &ExperimentConfig, size: u64, ps: &PointSet) -> Result<Diagnosis, String> {
    let d = cfg.diagnose.as_ref().expect("checked by caller");
    let kind = cfg.family_kind();
    let is: IncidenceStructure = match kind {
        FamilyKind::Lines => spanned_lines_incidences(ps),
        FamilyKind::Planes => spanned_planes_incidences(ps),
    }
    .map_err(|e| e.to_string())?;
    // Surfaces whose pairwise curves have type r are themselves of type r + 1.
    let tuple = if kind == FamilyKind::Planes { d.r + 1 } else { d.r };
    let theorem13 = theorem13_diagnostic(ps, &is, d.k, tuple).map_err(|e| e.to_string())?;
    let index = if d.index && kind == FamilyKind::Planes {
        let rich = is.restrict(&is.rich_flats(d.k).map_err(|e| e.to_string())?);
        let ctx = ProofContext::new(ps, &rich, d.r)
            .map_err(|e| e.to_string())?
            .with_subset_cap(cfg.subset_cap as u128);
        let lemma = index_lemma_check(&ctx).map_err(|e| e.to_string())?;
        let table = pigeonhole_levels(&ctx, d.k).map_err(|e| e.to_string())?;
        let case = case_split(&ctx, &table).map_err(|e| e.to_string())?;
        let sel = select_level_l(&ctx, &table);
        let admissible = admissible_triples(&ctx, &table, &sel).map_err(|e| e.to_string())?;
        Some(IndexSummary {
            lemma,
            chosen_level: table.chosen,
            family_size: ctx.family().len(),
            s1_size: table.s1.len(),
            pigeonhole_ok: table.pigeonhole_ok,
            case,
            big_l: sel.big_l,
            chosen_l: sel.chosen,
            s2_size: sel.s2.len(),
            level_pigeonhole_ok: sel.pigeonhole_ok,
            density_ok: sel.density_ok,
            admissible,
        })
    } else {
        None
    };
    Ok(Diagnosis {
        size,
        k: d.k,
        r: d.r,
        theorem13,
        index,
    })
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), RunError> {
    std::fs::write(path, contents).map_err(|source| RunError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Executes the configured phases and writes outputs plus the manifest.
/// `init_threads` is called once with the resolved thread count.
pub fn run(opts: &RunOptions, init_threads: impl FnOnce(Option<usize>)) -> Result<Outcome, RunError> {
    let cfg = load_config(opts)?;
    init_threads(cfg.threads);
    let mut timings = Timings::default();
    let mut summary = String::new();
    std::fs::create_dir_all(&opts.out).map_err(|source| RunError::Write {
        path: opts.out.clone(),
        source,
    })?;
    let mut written: Vec<PathBuf> = Vec::new();

    let t = Instant::now();
    let sizes = cfg.size_params();
    let sets: Vec<PointSet> = sizes
        .par_iter()
        .map(|&s| cfg.instance(s))
        .collect::<Result<_, _>>()?;
    if cfg.outputs.points {
        for (size, ps) in sizes.iter().zip(&sets) {
            let p = opts.out.join(format!("points_{size}.txt"));
            write_file(&p, ps.to_text().as_bytes())?;
            written.push(p);
        }
    }
    timings.record("generate", t);

    let t = Instant::now();
    let kind = cfg.family_kind();
    let runs: Vec<RunRecord> = sizes
        .par_iter()
        .zip(&sets)
        .map(|(&size, ps)| {
            Ok(RunRecord {
                size,
                n_points: ps.len(),
                histogram: spanned_histogram(ps, kind)?,
            })
        })
        .collect::<Result<_, pseudoflat_core::xplab::XplabError>>()?;
    let report = ExperimentReport {
        scenario: cfg.scenario,
        n: cfg.n,
        seed: cfg.seed,
        config_hash: cfg.hash(),
        version: VERSION.to_string(),
        runs,
    };
    for run in &report.runs {
        let _ = writeln!(
            summary,
            "size {}: N={} M={} incidences={} max_rich={}",
            run.size,
            run.n_points,
            run.flats(),
            run.total_incidences(),
            run.max_rich()
        );
    }
    timings.record("incidence", t);

    if cfg.diagnose.is_some() {
        let t = Instant::now();
        for (&size, ps) in sizes.iter().zip(&sets) {
            let d = diagnose_one(&cfg, size, ps).map_err(|message| RunError::Diagnose { size, message })?;
            let p = opts.out.join(format!("diagnose_{size}.json"));
            let mut json = serde_json::to_vec_pretty(&d).expect("report serializes");
            json.push(b'\n');
            write_file(&p, &json)?;
            written.push(p);
        }
        timings.record("diagnose", t);
    }

    let t = Instant::now();
    let certs: Vec<BoundCertificate> = cfg
        .certify
        .iter()
        .map(|c| {
            certify_bound(&report, c.theorem, c.r, c.n.unwrap_or(cfg.n), cfg.fit_window, cfg.c_thresh)
                .with_limit(c.c_limit)
        })
        .collect();
    for c in &certs {
        let _ = writeln!(
            summary,
            "certificate {} r={} n={}: C={:.4e} c_thresh_min={:.3} verdict={}",
            c.theorem.label(),
            c.r,
            c.n,
            c.constant,
            c.c_thresh_min,
            c.verdict.as_str()
        );
    }
    if !certs.is_empty() {
        let p = opts.out.join("certificates.json");
        let mut json = serde_json::to_vec_pretty(&certs).expect("certificates serialize");
        json.push(b'\n');
        write_file(&p, &json)?;
        written.push(p);
    }
    timings.record("certify", t);

    written.extend(emit_outputs(&report, &certs, &cfg.k_values, &opts.out, &cfg.outputs)?);
    write_manifest(&opts.out, &opts.config, &cfg, &written)?;
    timings.write(&opts.out)?;
    if opts.verbose {
        summary.push_str(&timings.summary());
    }
    Ok(Outcome {
        all_pass: certs.iter().all(|c| c.verdict == Verdict::Pass),
        summary,
    })
}
