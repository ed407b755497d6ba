//! CSV encodings of traces, co-membership matrices and partitions.

use std::fmt::Write as _;
use std::path::Path;

use crate::dpmm::{Trace, TraceSample};
use crate::fsutil::write_atomic;
use crate::partition::{CoincidenceMatrix, Partition};
use crate::{Atom, Error, Result};

pub const TRACE_HEADER: &str = "iteration,obs_id,cluster,alpha,beta,lambda,w,nu,n_star";

/// One row per retained iteration per observation.
pub fn trace_csv_string(trace: &Trace, ids: &[String]) -> Result<String> {
    if ids.len() != trace.n_obs() {
        return Err(Error::domain(format!(
            "{} ids for a trace over {} observations",
            ids.len(),
            trace.n_obs()
        )));
    }
    let mut s = String::with_capacity(trace.samples.len() * ids.len() * 80);
    s.push_str(TRACE_HEADER);
    s.push('\n');
    for t in &trace.samples {
        let n_star = t.n_star();
        for (i, id) in ids.iter().enumerate() {
            let k = t.assignments[i];
            let a = &t.atoms[k];
            let _ = writeln!(
                s,
                "{},{id},{k},{},{},{},{},{},{n_star}",
                t.iteration, a.ew.alpha, a.ew.beta, a.ew.lambda, a.w, t.nu
            );
        }
    }
    Ok(s)
}

pub fn write_trace(path: &Path, trace: &Trace, ids: &[String]) -> Result<()> {
    write_atomic(path, trace_csv_string(trace, ids)?.as_bytes())
}

/// A trace read back from CSV, with the observation ids in file order.
#[derive(Debug, Clone)]
pub struct LoadedTrace {
    pub ids: Vec<String>,
    pub trace: Trace,
}

struct Pending {
    iteration: usize,
    assignments: Vec<usize>,
    atoms: Vec<Option<Atom>>,
    nu: f64,
    n_star: usize,
}

pub fn read_trace(path: &Path) -> Result<LoadedTrace> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trace(&text, &path.display().to_string())
}

pub fn parse_trace(text: &str, source: &str) -> Result<LoadedTrace> {
    let err = |line: u64, message: String| Error::Parse {
        path: source.to_string(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    let mut ids: Vec<String> = Vec::new();
    let mut ids_done = false;
    let mut samples = Vec::new();
    let mut current: Option<Pending> = None;
    let mut pos = 0usize;

    let finish = |p: Pending, line: u64, n_ids: usize| -> Result<TraceSample> {
        if p.assignments.len() != n_ids {
            return Err(err(line, format!("iteration {} has {} rows, expected {n_ids}", p.iteration, p.assignments.len())));
        }
        let atoms: Vec<Atom> = p
            .atoms
            .into_iter()
            .enumerate()
            .map(|(k, a)| a.ok_or_else(|| err(line, format!("iteration {}: cluster {k} has no members", p.iteration))))
            .collect::<Result<_>>()?;
        if atoms.len() != p.n_star {
            return Err(err(line, format!("iteration {}: n_star {} but {} clusters", p.iteration, p.n_star, atoms.len())));
        }
        Ok(TraceSample::from_state(p.iteration, &p.assignments, &atoms, p.nu))
    };

    let mut last_line = 0;
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        last_line = line;
        if row == 0 {
            let header: Vec<&str> = record.iter().collect();
            if header.join(",") != TRACE_HEADER {
                return Err(err(line, format!("expected header `{TRACE_HEADER}`")));
            }
            continue;
        }
        if record.len() != 9 {
            return Err(err(line, format!("expected 9 fields, found {}", record.len())));
        }
        let f = |k: usize| -> Result<f64> {
            record[k]
                .parse::<f64>()
                .map_err(|_| err(line, format!("field {} `{}` is not a number", k + 1, &record[k])))
        };
        let u = |k: usize| -> Result<usize> {
            record[k]
                .parse::<usize>()
                .map_err(|_| err(line, format!("field {} `{}` is not an integer", k + 1, &record[k])))
        };
        let iteration = u(0)?;
        let id = record[1].to_string();
        let cluster = u(2)?;
        let atom = Atom::new(f(3)?, f(4)?, f(5)?, f(6)?).map_err(|e| err(line, e.to_string()))?;
        let nu = f(7)?;
        let n_star = u(8)?;

        if current.as_ref().is_some_and(|p| p.iteration != iteration) {
            ids_done = true;
            let p = current.take().expect("checked");
            if iteration <= p.iteration {
                return Err(err(line, format!("iteration {iteration} follows {}", p.iteration)));
            }
            samples.push(finish(p, line, ids.len())?);
        }
        let p = current.get_or_insert_with(|| {
            pos = 0;
            Pending {
                iteration,
                assignments: Vec::new(),
                atoms: Vec::new(),
                nu,
                n_star,
            }
        });
        if ids_done {
            if ids.get(pos) != Some(&id) {
                return Err(err(line, format!("observation `{id}` out of order for iteration {iteration}")));
            }
        } else {
            if ids.contains(&id) {
                return Err(err(line, format!("observation `{id}` repeated in iteration {iteration}")));
            }
            ids.push(id);
        }
        pos += 1;
        if nu != p.nu || n_star != p.n_star {
            return Err(err(line, format!("nu or n_star changes within iteration {iteration}")));
        }
        if cluster >= p.atoms.len() {
            p.atoms.resize(cluster + 1, None);
        }
        match p.atoms[cluster] {
            None => p.atoms[cluster] = Some(atom),
            Some(a) if a != atom => {
                return Err(err(line, format!("cluster {cluster} has two atoms in iteration {iteration}")));
            }
            _ => {}
        }
        p.assignments.push(cluster);
    }
    if let Some(p) = current {
        samples.push(finish(p, last_line, ids.len())?);
    }
    if samples.is_empty() {
        return Err(err(last_line, "trace has no rows".into()));
    }
    Ok(LoadedTrace {
        ids,
        trace: Trace {
            samples,
            acceptance: Default::default(),
        },
    })
}

/// `N x N` matrix with a header row and a leading id column.
pub fn coincidence_csv_string(rho: &CoincidenceMatrix, ids: &[String]) -> String {
    let mut s = String::from("id");
    for id in ids {
        let _ = write!(s, ",{id}");
    }
    s.push('\n');
    for (i, id) in ids.iter().enumerate() {
        s.push_str(id);
        for v in rho.row(i) {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

/// `# K=<k> score=<score>` comment, then `id,cluster` rows.
pub fn partition_csv_string(partition: &Partition, ids: &[String]) -> String {
    let mut s = format!("# K={} score={}\nid,cluster\n", partition.k_star, partition.score);
    for (id, c) in ids.iter().zip(&partition.labels) {
        let _ = writeln!(s, "{id},{c}");
    }
    s
}
