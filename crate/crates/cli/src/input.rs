//! Flag-value parsing: weights, complex vectors/matrices as JSON, and the
//! optional key=value config file whose entries act as flag defaults.

use siegelforms::nalgebra;
use siegelforms::{CMatrix, CVector, RMatrix, C64};

pub fn parse_omega(text: &str) -> Result<Vec<i64>, String> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<i64>()
                .map_err(|_| format!("invalid weight entry {part:?}"))
        })
        .collect()
}

pub fn parse_f64_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| format!("invalid number {part:?}"))
        })
        .collect()
}

/// JSON array of [re, im] pairs.
pub fn parse_cvector(text: &str) -> Result<CVector, String> {
    let data: Vec<[f64; 2]> =
        serde_json::from_str(text).map_err(|e| format!("vector must be [[re,im],...]: {e}"))?;
    Ok(CVector::from_vec(
        data.into_iter().map(|[re, im]| C64::new(re, im)).collect(),
    ))
}

/// JSON nested array of [re, im] pairs, row by row.
pub fn parse_cmatrix(text: &str) -> Result<CMatrix, String> {
    let rows: Vec<Vec<[f64; 2]>> =
        serde_json::from_str(text).map_err(|e| format!("matrix must be [[[re,im],...],...]: {e}"))?;
    let nrows = rows.len();
    if nrows == 0 || rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err("matrix rows must be nonempty and of equal length".into());
    }
    let ncols = rows[0].len();
    Ok(CMatrix::from_fn(nrows, ncols, |r, c| {
        C64::new(rows[r][c][0], rows[r][c][1])
    }))
}

/// JSON nested array of reals, row by row.
pub fn parse_rmatrix(text: &str) -> Result<RMatrix, String> {
    let rows: Vec<Vec<f64>> =
        serde_json::from_str(text).map_err(|e| format!("matrix must be [[..],[..]]: {e}"))?;
    let nrows = rows.len();
    if nrows == 0 || rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err("matrix rows must be nonempty and of equal length".into());
    }
    let ncols = rows[0].len();
    Ok(RMatrix::from_fn(nrows, ncols, |r, c| rows[r][c]))
}

/// Entries of T given as multiples of one half; returns 2T exactly.
pub fn parse_half_integral(text: &str) -> Result<nalgebra::DMatrix<i64>, String> {
    let t = parse_rmatrix(text)?;
    let mut twice = nalgebra::DMatrix::zeros(t.nrows(), t.ncols());
    for r in 0..t.nrows() {
        for c in 0..t.ncols() {
            let doubled = 2.0 * t[(r, c)];
            if (doubled - doubled.round()).abs() > 1e-12 {
                return Err(format!(
                    "entry T[{r}][{c}] = {} is not half-integral",
                    t[(r, c)]
                ));
            }
            twice[(r, c)] = doubled.round() as i64;
        }
    }
    Ok(twice)
}

/// Reads a key=value config file and returns the args with file entries
/// appended as defaults (flags on the command line win).
pub fn merge_config_file(args: Vec<String>) -> Result<Vec<String>, String> {
    let mut merged = args.clone();
    let config_path = args
        .iter()
        .position(|a| a == "--config")
        .and_then(|i| args.get(i + 1).cloned());
    let Some(path) = config_path else {
        return Ok(merged);
    };
    let text =
        std::fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("config line {} is not key=value", lineno + 1));
        };
        let flag = format!("--{}", key.trim());
        if !merged.iter().any(|a| a == &flag) {
            merged.push(flag);
            merged.push(value.trim().to_string());
        }
    }
    Ok(merged)
}

/// Complex vector rendered as [[re, im], ...] for JSON output.
pub fn cvector_json(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}
