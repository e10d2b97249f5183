//! Parametric conditional-independence tests.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor};
use statrs::function::erf::erfc;

use super::dataset::{Column, Dataset};
use super::CiTestError;

/// Correlations are clamped to `[-1 + EPS, 1 - EPS]` before the log.
pub const CORRELATION_EPS: f64 = 1e-12;

/// Expected cell counts below this raise a warning on chi-square results.
pub const DEFAULT_MIN_EXPECTED: f64 = 5.0;

#[derive(Clone, Debug, PartialEq)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
    pub warning: Option<String>,
}

impl TestOutcome {
    fn new(statistic: f64, p_value: f64) -> Self {
        Self { statistic, p_value: p_value.clamp(0.0, 1.0), warning: None }
    }
}

/// Fisher z-transform of a partial correlation `r` over `n` rows with `k`
/// conditioning variables. The p-value is two-sided.
pub fn fisher_z_from_r(r: f64, n: usize, k: usize) -> TestOutcome {
    let r = r.clamp(-1.0 + CORRELATION_EPS, 1.0 - CORRELATION_EPS);
    let dof = n as f64 - k as f64 - 3.0;
    let z = 0.5 * ((1.0 + r) / (1.0 - r)).ln() * dof.sqrt();
    TestOutcome::new(z, erfc(z.abs() / std::f64::consts::SQRT_2))
}

fn continuous<'d>(d: &'d Dataset, name: &str) -> Result<&'d [f64], CiTestError> {
    match d.column(name)? {
        Column::Continuous(v) => Ok(v),
        Column::Categorical { .. } => Err(CiTestError::NotContinuous(name.to_string())),
    }
}

fn categorical<'d>(d: &'d Dataset, name: &str) -> Result<&'d [u32], CiTestError> {
    match d.column(name)? {
        Column::Categorical { codes, .. } => Ok(codes),
        Column::Continuous(_) => Err(CiTestError::NotCategorical(name.to_string())),
    }
}

/// Correlation matrix of the named continuous columns.
fn correlation(d: &Dataset, names: &[&str]) -> Result<DMatrix<f64>, CiTestError> {
    let n = d.row_count();
    let mut standardized = Vec::with_capacity(names.len());
    for &name in names {
        let v = continuous(d, name)?;
        let mean = v.iter().sum::<f64>() / n as f64;
        let ss = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
        if ss <= 0.0 || !ss.is_finite() {
            return Err(CiTestError::Singular(vec![name.to_string()]));
        }
        let sd = ss.sqrt();
        standardized.push(v.iter().map(|x| (x - mean) / sd).collect::<Vec<_>>());
    }
    let k = names.len();
    Ok(DMatrix::from_fn(k, k, |i, j| standardized[i].iter().zip(&standardized[j]).map(|(a, b)| a * b).sum::<f64>()))
}

/// Covariance of the first `m` variables after regressing out the rest,
/// from a correlation matrix ordered `[targets..., conditioning...]`.
fn residual_block(c: &DMatrix<f64>, m: usize, names: &[&str]) -> Result<DMatrix<f64>, CiTestError> {
    let k = c.nrows();
    let a = c.view((0, 0), (m, m)).into_owned();
    if k == m {
        return Ok(a);
    }
    let b = c.view((0, m), (m, k - m)).into_owned();
    let zz = c.view((m, m), (k - m, k - m)).into_owned();
    let chol = zz
        .cholesky()
        .filter(|ch| ch.l().diagonal().iter().all(|&v| v > 1e-7))
        .ok_or_else(|| CiTestError::Singular(names[m..].iter().map(|s| s.to_string()).collect()))?;
    Ok(a - &b * chol.solve(&b.transpose()))
}

fn require_rows(d: &Dataset, needed: usize) -> Result<(), CiTestError> {
    if d.row_count() < needed {
        return Err(CiTestError::InsufficientRows { rows: d.row_count(), needed });
    }
    Ok(())
}

fn check_degenerate(res: &DMatrix<f64>, i: usize, names: &[&str], m: usize) -> Result<(), CiTestError> {
    if res[(i, i)] <= 1e-10 {
        let mut set = vec![names[i].to_string()];
        set.extend(names[m..].iter().map(|s| s.to_string()));
        return Err(CiTestError::Singular(set));
    }
    Ok(())
}

/// Partial correlation of `x` and `y` given `z`.
pub fn partial_correlation(d: &Dataset, x: &str, y: &str, z: &[&str]) -> Result<f64, CiTestError> {
    let mut names = vec![x, y];
    names.extend_from_slice(z);
    let c = correlation(d, &names)?;
    let res = residual_block(&c, 2, &names)?;
    check_degenerate(&res, 0, &names, 2)?;
    check_degenerate(&res, 1, &names, 2)?;
    Ok(res[(0, 1)] / (res[(0, 0)] * res[(1, 1)]).sqrt())
}

/// Fisher-z test of `x _||_ y | z` on continuous columns.
pub fn fisher_z(d: &Dataset, x: &str, y: &str, z: &[&str]) -> Result<TestOutcome, CiTestError> {
    require_rows(d, z.len() + 4)?;
    if z.is_empty() {
        // A plain correlation needs no inversion, so identical columns give r = 1.
        let c = correlation(d, &[x, y])?;
        return Ok(fisher_z_from_r(c[(0, 1)], d.row_count(), 0));
    }
    let r = partial_correlation(d, x, y, z)?;
    Ok(fisher_z_from_r(r, d.row_count(), z.len()))
}

/// Nested-regression F test of `x _||_ w | z` for a multi-column `w`: does
/// adding `w` to a linear regression of `x` on `z` reduce the residual
/// variance? With one column it is the square of the partial-correlation
/// t statistic.
pub fn partial_f(d: &Dataset, x: &str, w: &[&str], z: &[&str]) -> Result<TestOutcome, CiTestError> {
    let q = w.len();
    let n = d.row_count();
    require_rows(d, z.len() + q + 2)?;
    let mut names = vec![x];
    names.extend_from_slice(w);
    names.extend_from_slice(z);
    let c = correlation(d, &names)?;
    let res = residual_block(&c, q + 1, &names)?;
    check_degenerate(&res, 0, &names, q + 1)?;
    let sxx = res[(0, 0)];
    let sxw = DVector::from_iterator(q, (1..=q).map(|j| res[(0, j)]));
    let sww = res.view((1, 1), (q, q)).into_owned();
    let chol = sww
        .cholesky()
        .filter(|ch| ch.l().diagonal().iter().all(|&v| v > 1e-7))
        .ok_or_else(|| CiTestError::Singular(w.iter().chain(z).map(|s| s.to_string()).collect()))?;
    let explained = sxw.dot(&chol.solve(&sxw));
    let rho2 = (explained / sxx).clamp(0.0, 1.0 - CORRELATION_EPS);
    let df2 = (n - z.len() - q - 1) as f64;
    let f = (rho2 / q as f64) / ((1.0 - rho2) / df2);
    let dist = FisherSnedecor::new(q as f64, df2).expect("positive degrees of freedom");
    Ok(TestOutcome::new(f, dist.sf(f)))
}

/// Counts keyed by (x code, joint y codes) within one stratum.
type Table = HashMap<(u32, Vec<u32>), f64>;

/// Stratified chi-square test of `x _||_ y | z` on categorical columns. `y`
/// may name several columns, which are treated as one joint variable.
pub fn chi_square(d: &Dataset, x: &str, y: &[&str], z: &[&str], min_expected: f64) -> Result<TestOutcome, CiTestError> {
    let xs = categorical(d, x)?;
    let ys = y.iter().map(|n| categorical(d, n)).collect::<Result<Vec<_>, _>>()?;
    let zs = z.iter().map(|n| categorical(d, n)).collect::<Result<Vec<_>, _>>()?;
    let key = |cols: &[&[u32]], row: usize| cols.iter().map(|c| c[row]).collect::<Vec<_>>();
    let mut strata: HashMap<Vec<u32>, Table> = HashMap::new();
    for (row, &xv) in xs.iter().enumerate() {
        *strata.entry(key(&zs, row)).or_default().entry((xv, key(&ys, row))).or_insert(0.0) += 1.0;
    }
    let (mut stat, mut df, mut sparse) = (0.0, 0.0, false);
    for cells in strata.values() {
        let mut rows: HashMap<u32, f64> = HashMap::new();
        let mut cols: HashMap<&Vec<u32>, f64> = HashMap::new();
        let mut total = 0.0;
        for ((a, b), &n) in cells {
            *rows.entry(*a).or_insert(0.0) += n;
            *cols.entry(b).or_insert(0.0) += n;
            total += n;
        }
        df += ((rows.len() - 1) * (cols.len() - 1)) as f64;
        for (a, ra) in &rows {
            for (b, cb) in &cols {
                let expected = ra * cb / total;
                let observed = cells.get(&(*a, (*b).clone())).copied().unwrap_or(0.0);
                stat += (observed - expected).powi(2) / expected;
                sparse |= expected < min_expected;
            }
        }
    }
    let p = if df > 0.0 { ChiSquared::new(df).expect("positive df").sf(stat) } else { 1.0 };
    let mut out = TestOutcome::new(stat, p);
    if sparse {
        out.warning = Some(format!("some expected counts are below {min_expected}"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn data(cols: Vec<(&str, Vec<f64>)>) -> Dataset {
        Dataset::from_columns(cols.into_iter().map(|(n, v)| (n.to_string(), Column::Continuous(v))).collect()).unwrap()
    }

    #[test]
    fn closed_form_statistic() {
        // 0.5 ln 3 * sqrt(97), and its two-sided normal tail.
        let t = fisher_z_from_r(0.5, 100, 0);
        let want = 0.5 * 3f64.ln() * 97f64.sqrt();
        assert!((t.statistic - want).abs() < 1e-12);
        assert!((t.statistic - 5.410).abs() < 1e-3);
        assert!(t.p_value > 5e-8 && t.p_value < 7e-8, "{}", t.p_value);
    }

    #[test]
    fn identical_columns() {
        let x: Vec<f64> = (0..100).map(|i| (f64::from(i) * 0.37).sin()).collect();
        let d = data(vec![("x", x.clone()), ("y", x)]);
        let t = fisher_z(&d, "x", "y", &[]).unwrap();
        assert!(t.p_value < 1e-12);
        assert!(t.statistic.is_finite());
    }

    #[test]
    fn partial_correlation_removes_common_cause() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 4000;
        let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let x: Vec<f64> = z.iter().map(|v| v + rng.sample::<f64, _>(StandardNormal)).collect();
        let y: Vec<f64> = z.iter().map(|v| 2.0 * v + rng.sample::<f64, _>(StandardNormal)).collect();
        let d = data(vec![("x", x), ("y", y), ("z", z)]);
        assert!(fisher_z(&d, "x", "y", &[]).unwrap().p_value < 1e-6);
        assert!(fisher_z(&d, "x", "y", &["z"]).unwrap().p_value > 0.001);
        // One-column F is the squared t statistic on the same data.
        let r = partial_correlation(&d, "x", "y", &["z"]).unwrap();
        let f = partial_f(&d, "x", &["y"], &["z"]).unwrap();
        let df2 = (n - 3) as f64;
        assert!((f.statistic - r * r / (1.0 - r * r) * df2).abs() < 1e-6 * f.statistic.max(1.0));
    }

    #[test]
    fn collinear_conditioning_is_named() {
        let a: Vec<f64> = (0..50).map(f64::from).collect();
        let b: Vec<f64> = a.iter().map(|v| 2.0 * v + 1.0).collect();
        let c: Vec<f64> = a.iter().map(|v| (v * 0.1).cos()).collect();
        let d = data(vec![("a", a), ("b", b), ("c", c.clone()), ("e", c.iter().map(|v| v * v).collect())]);
        assert_eq!(fisher_z(&d, "c", "e", &["a", "b"]), Err(CiTestError::Singular(vec!["a".into(), "b".into()])));
        let flat = data(vec![("a", vec![1.0; 10]), ("b", (0..10).map(f64::from).collect())]);
        assert_eq!(fisher_z(&flat, "a", "b", &[]), Err(CiTestError::Singular(vec!["a".into()])));
        assert!(matches!(
            fisher_z(&flat, "a", "b", &["a", "b", "a", "b", "a", "b", "a"]),
            Err(CiTestError::InsufficientRows { .. })
        ));
    }

    #[test]
    fn chi_square_detects_copies_and_xor() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 2000;
        let x: Vec<u32> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let z: Vec<u32> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let y: Vec<u32> = x.iter().zip(&z).map(|(a, b)| a ^ b).collect();
        let col = |v: &[u32]| Column::Categorical { codes: v.to_vec(), levels: vec!["0".into(), "1".into()] };
        let d = Dataset::from_columns(vec![
            ("x".into(), col(&x)),
            ("y".into(), col(&y)),
            ("z".into(), col(&z)),
            ("c".into(), col(&x)),
        ])
        .unwrap();
        assert!(chi_square(&d, "x", &["y"], &[], DEFAULT_MIN_EXPECTED).unwrap().p_value > 1e-3);
        assert!(chi_square(&d, "x", &["y"], &["z"], DEFAULT_MIN_EXPECTED).unwrap().p_value < 1e-10);
        let copy = chi_square(&d, "x", &["c"], &[], DEFAULT_MIN_EXPECTED).unwrap();
        assert!(copy.p_value < 1e-10 && copy.warning.is_none());
        assert!(matches!(fisher_z(&d, "x", "y", &[]), Err(CiTestError::NotContinuous(_))));
    }
}
