use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use sharp_embed::extremal::{self, Family, SharpnessRow};
use sharp_embed::green::{green_rearranged, BallGeometry};
use sharp_embed::norms::{exp_integral, lexp_norm, lq_norm, mazya_constant, mazya_constant_compact};
use sharp_embed::profile::{log_grid, Form, MonotoneProfile};
use sharp_embed::quadrature::TanhSinh;
use sharp_embed::radial::{check_pointwise_bound, rearrange_radial, solve_radial, RadialProfile};
use sharp_embed::target::{domination_chain, extended_domination, target_defect, truncated_kernel, DominationReport};

use crate::table::{num, Table};
use crate::{CliError, RunConfig};

/// Result of one subcommand.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    pub passed: bool,
    /// Human-readable findings, one per line.
    pub notes: Vec<String>,
}

impl Outcome {
    fn new(table: Table) -> Self {
        Self {
            table,
            passed: true,
            notes: vec![],
        }
    }

    fn require(&mut self, ok: bool, what: String) {
        if !ok {
            self.passed = false;
            self.notes.push(format!("FAIL {what}"));
        } else {
            self.notes.push(format!("ok   {what}"));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DataKind {
    Bump,
    Signed,
    Balanced,
}

impl DataKind {
    fn as_str(&self) -> &'static str {
        match self {
            DataKind::Bump => "bump",
            DataKind::Signed => "signed",
            DataKind::Balanced => "balanced",
        }
    }
}

/// One random radial datum: shells `(r_hi, value)`.
#[derive(Debug, Clone)]
pub struct RandomDatum {
    pub n: u32,
    pub kind: DataKind,
    pub index: usize,
    pub shells: Vec<(f64, f64)>,
}

/// Piecewise-constant data with 1–8 shells at uniform random radii and
/// values in `[-1, 1]`; the balanced variant lives in `B_{0.9R}` and is
/// corrected to zero mean.
pub fn random_data(cfg: &RunConfig) -> Vec<RandomDatum> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let r = cfg.radius;
    let mut out = vec![];
    for &n in &cfg.dims {
        let geom = BallGeometry::new(n, r).expect("validated radius");
        out.push(RandomDatum {
            n,
            kind: DataKind::Bump,
            index: 0,
            shells: vec![(cfg.delta * r, 1.0 / geom.volume_of(cfg.delta * r)), (r, 0.0)],
        });
        for kind in [DataKind::Signed, DataKind::Balanced] {
            for index in 0..cfg.samples {
                let (lo_k, outer) = match kind {
                    DataKind::Balanced => (2, 0.9 * r),
                    _ => (1, r),
                };
                let k = rng.gen_range(lo_k..=8usize);
                let mut radii: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..outer)).collect();
                radii.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
                radii.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * r);
                if radii[0] <= 1e-9 * r {
                    radii[0] = 1e-9 * r;
                }
                *radii.last_mut().expect("non-empty") = outer;
                let mut shells: Vec<(f64, f64)> = radii.iter().map(|&x| (x, rng.gen_range(-1.0..=1.0))).collect();
                if kind == DataKind::Balanced {
                    let mut lo = 0.0;
                    let mut vols = vec![];
                    for &(hi, _) in &shells {
                        vols.push(geom.volume_of(hi) - geom.volume_of(lo));
                        lo = hi;
                    }
                    let j = shells.len() - 1;
                    let rest: f64 = shells[..j].iter().zip(&vols).map(|(s, v)| s.1 * v).sum();
                    shells[j].1 = -rest / vols[j];
                    let m = shells.iter().map(|s| s.1.abs()).fold(0.0, f64::max);
                    if m > 0.0 {
                        shells.iter_mut().for_each(|s| s.1 /= m);
                    }
                    shells.push((r, 0.0));
                }
                out.push(RandomDatum { n, kind, index, shells });
            }
        }
    }
    out
}

/// `u^*(t) ≤ N^*(t) ‖f‖₁` for signed data and `u^* ≤ ½ N^* ‖f‖₁` for
/// zero-mean data compactly supported in the ball.
pub fn cmd_check_inequalities(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let data = random_data(cfg);
    let results: Vec<_> = data
        .par_iter()
        .map(|d| -> Result<_, CliError> {
            let geom = BallGeometry::new(d.n, cfg.radius)?;
            let f = RadialProfile::piecewise_constant(geom, &d.shells)?;
            let l1 = f.l1_norm()?;
            let v = solve_radial(&geom, &f)?;
            let factor = match d.kind {
                DataKind::Balanced => 0.5,
                _ => 1.0,
            } * cfg.kernel_scale;
            let grid = log_grid(cfg.t_min * geom.volume, geom.volume * (1.0 - 1e-9), cfg.t_points);
            let check = check_pointwise_bound(&v, l1, factor, &grid, cfg.tol)?;
            Ok((d, l1, check))
        })
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(&["n", "kind", "sample", "shells", "l1", "points", "violations", "worst_measure_ratio"]);
    let mut violations = 0;
    for (d, l1, c) in &results {
        violations += c.violations;
        table.push(vec![
            d.n.to_string(),
            d.kind.as_str().into(),
            d.index.to_string(),
            d.shells.len().to_string(),
            num(*l1),
            c.points.to_string(),
            c.violations.to_string(),
            num(c.worst_measure_ratio),
        ]);
    }
    let mut out = Outcome::new(table);
    out.require(
        violations == 0,
        format!("{} data checked, {violations} grid violations", results.len()),
    );
    Ok(out)
}

fn sharpness_table() -> Table {
    Table::new(&[
        "family", "n", "t", "delta", "epsilon", "lambda", "R", "l1", "ratio", "target", "gap", "res_tol",
    ])
}

fn push_row(t: &mut Table, r: &SharpnessRow<f64>) {
    t.push(vec![
        r.family.as_str().into(),
        r.n.to_string(),
        num(r.t),
        num(r.delta),
        num(r.epsilon),
        num(r.lambda),
        num(r.radius),
        num(r.l1),
        num(r.ratio),
        num(r.target),
        num(r.gap),
        num(r.res_tol),
    ]);
}

/// Sharpness sweeps of one family, or all three when `family` is `None`.
pub fn cmd_sweep_sharpness(cfg: &RunConfig, family: Option<Family>) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let wanted = |f: Family| family.is_none_or(|x| x == f);
    let mut rows: Vec<SharpnessRow<f64>> = vec![];
    let mut checks: Vec<(bool, String)> = vec![];
    let mut warnings = vec![];
    let r = cfg.radius;
    if wanted(Family::Bump) {
        for &n in &cfg.dims {
            let geom = BallGeometry::new(n, r)?;
            let delta = cfg.delta * r;
            let grid = log_grid(geom.volume_of(delta), geom.volume * (1.0 - 1e-9), cfg.t_points);
            let part = extremal::sweep_bump(&geom, delta, &grid)?;
            let gap = part.iter().map(|x| x.gap).fold(0.0, f64::max);
            checks.push((gap <= 1e-10, format!("bump n={n}: max gap {gap:.3e} ≤ 1e-10")));
            rows.extend(part);
        }
    }
    if wanted(Family::Balanced) {
        for &n in &cfg.dims {
            let geom = BallGeometry::new(n, r)?;
            let eps: Vec<f64> = cfg.epsilons.iter().map(|e| e * r).collect();
            let part = extremal::sweep_balanced(&geom, cfg.delta * r, cfg.t_fixed * geom.volume, &eps)?;
            let last = part
                .iter()
                .min_by(|a, b| a.epsilon.partial_cmp(&b.epsilon).expect("finite"))
                .expect("non-empty schedule");
            let below = part.iter().all(|x| x.ratio <= x.target * (1.0 + cfg.tol));
            checks.push((
                last.gap <= 1e-3 && below,
                format!("balanced n={n}: final gap {:.3e} ≤ 1e-3, ratios below 1/2", last.gap),
            ));
            rows.extend(part);
        }
    }
    if wanted(Family::Translated) {
        let jobs: Vec<(u32, f64)> = cfg
            .dims
            .iter()
            .filter(|&&n| n >= 3)
            .flat_map(|&n| cfg.radii.iter().map(move |&rr| (n, rr)))
            .collect();
        let part: Vec<_> = jobs
            .par_iter()
            .map(|&(n, rr)| extremal::translated_row(n, cfg.delta0, rr, cfg.sigma, cfg.cells_per_delta))
            .collect::<Result<_, _>>()?;
        for &n in cfg.dims.iter().filter(|&&n| n >= 3) {
            let mine: Vec<&SharpnessRow<f64>> = part.iter().filter(|(x, _)| x.n == n).map(|(x, _)| x).collect();
            if let Some(last) = mine.iter().max_by(|a, b| a.radius.partial_cmp(&b.radius).expect("finite")) {
                let below = mine.iter().all(|x| x.ratio <= x.target + x.res_tol + cfg.tol);
                checks.push((
                    last.gap <= 2e-2 && below,
                    format!("translated n={n}: final gap {:.3e} ≤ 2e-2 (grid tol {:.1e})", last.gap, last.res_tol),
                ));
            }
        }
        for (row, w) in part {
            if let Some(w) = w {
                warnings.push(format!("translated n={} R={:e}: {w}", row.n, row.radius));
            }
            rows.push(row);
        }
    }
    let mut report = extremal::SweepReport {
        suite: "sweep-sharpness".into(),
        config_hash: cfg.hash(),
        wall_time_secs: 0.0,
        rows,
        warnings,
    };
    report.sort_rows();
    let mut table = sharpness_table();
    for r in &report.rows {
        push_row(&mut table, r);
    }
    let mut out = Outcome::new(table);
    for (ok, what) in checks {
        out.require(ok, what);
    }
    out.notes.extend(report.warnings.iter().map(|w| format!("warn {w}")));
    Ok(out)
}

fn bump_star(geom: &BallGeometry<f64>, delta: f64) -> Result<MonotoneProfile<f64>, CliError> {
    Ok(rearrange_radial(&extremal::bump_potential(geom, delta)?)?)
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Exponential integrability in the plane along the bump and balanced
/// families, plus the logarithmic growth at the critical exponent.
pub fn cmd_brezis_merle(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let geom = BallGeometry::new(2, cfg.radius)?;
    let v = geom.volume;
    let four_pi = 4.0 * std::f64::consts::PI;
    let mut deltas = cfg.bm_deltas.clone();
    deltas.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let mut table = Table::new(&["family", "delta", "epsilon", "alpha_over_pi", "value", "bound", "ratio"]);
    let mut checks = vec![];
    let mut below = true;
    let mut crit = vec![];
    let mut last_half = None;
    for &d in &deltas {
        let u = bump_star(&geom, d * cfg.radius)?;
        let l1 = extremal::bump_data(&geom, d * cfg.radius)?.l1_norm()?;
        for &a in &cfg.alphas {
            let alpha = a * std::f64::consts::PI;
            let value = exp_integral(&u, alpha, l1)?.value;
            let bound = four_pi * v / (four_pi - alpha);
            below &= value <= bound * (1.0 + cfg.tol);
            if (a - 2.0).abs() < 1e-12 {
                last_half = Some(value);
            }
            table.push(vec!["bump".into(), num(d), num(0.0), num(a), num(value), num(bound), num(value / bound)]);
        }
        let value = exp_integral(&u, four_pi, l1)?.value;
        crit.push(((1.0 / d).ln(), value));
        table.push(vec!["bump".into(), num(d), num(0.0), num(4.0), num(value), "inf".into(), num(0.0)]);
    }
    for &d in &deltas {
        // thinner shells lose the potential to cancellation in the shell segment
        let eps = d.max(1e-4) * cfg.radius;
        if d * cfg.radius >= cfg.radius - 2.0 * eps {
            continue;
        }
        let data = extremal::balanced_data(&geom, d * cfg.radius, eps)?;
        let u = rearrange_radial(&solve_radial(&geom, &data)?)?;
        let l1 = data.l1_norm()?;
        for &a in &cfg.alphas {
            let a = 2.0 * a;
            let alpha = a * std::f64::consts::PI;
            let value = exp_integral(&u, alpha, l1)?.value;
            let bound = 2.0 * four_pi * v / (2.0 * four_pi - alpha);
            below &= value <= bound * (1.0 + cfg.tol);
            table.push(vec!["balanced".into(), num(d), num(eps / cfg.radius), num(a), num(value), num(bound), num(value / bound)]);
        }
    }
    let tail: Vec<(f64, f64)> = crit.iter().copied().filter(|p| p.0 >= (100.0f64).ln() - 1e-9).collect();
    let slope = if tail.len() >= 2 { fit_slope(&tail) } else { f64::NAN };
    table.push(vec![
        "bump_slope".into(),
        num(deltas.last().copied().unwrap_or(f64::NAN)),
        num(0.0),
        num(4.0),
        num(slope),
        num(2.0 * v),
        num(slope / (2.0 * v)),
    ]);
    if let Some(x) = last_half {
        checks.push((
            (x / (2.0 * v) - 1.0).abs() <= 1e-2,
            format!("α = 2π: integral/2V = {:.6} at the smallest δ", x / (2.0 * v)),
        ));
    }
    checks.push((
        (slope / (2.0 * v) - 1.0).abs() <= 5e-2,
        format!("α = 4π: slope/2V = {:.6}", slope / (2.0 * v)),
    ));
    checks.push((below, "no family exceeds its bound".into()));
    let mut out = Outcome::new(table);
    for (ok, what) in checks {
        out.require(ok, what);
    }
    Ok(out)
}

/// `‖N_V^*‖_q` by quadrature on the measure axis.
pub fn kernel_lq_by_quadrature(n: u32, q: f64, v: f64) -> Result<f64, CliError> {
    let f = |t: f64| green_rearranged(n, v, t).map(|x| x.powf(q)).unwrap_or(f64::NAN);
    let scale = mazya_constant(n, q, v)?.powf(q);
    let qd = TanhSinh::with_abs_tol(1e-16 * scale).integrate(f, 0.0, v)?;
    Ok(qd.value.powf(1.0 / q))
}

/// Γ-bracket constants against quadrature, plus the compactly supported
/// variant on the balanced family (no acceptance target).
pub fn cmd_lq_constants(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let mut table = Table::new(&["n", "q", "volume", "mazya", "quadrature", "lq_norm", "rel_diff", "status"]);
    let mut worst: f64 = 0.0;
    for &n in cfg.dims.iter().filter(|&&n| n >= 3) {
        let geom = BallGeometry::new(n, cfg.radius)?;
        let v = geom.volume;
        let qs = match n {
            3 => cfg.q3.clone(),
            4 => cfg.q4.clone(),
            _ => vec![1.0],
        };
        for &q in &qs {
            let m = mazya_constant(n, q, v)?;
            let quad = kernel_lq_by_quadrature(n, q, v)?;
            let closed = lq_norm(&MonotoneProfile::green(n, v)?, q)?.value;
            let rel = ((m - quad) / quad).abs().max(((m - closed) / closed).abs());
            worst = worst.max(rel);
            table.push(vec![n.to_string(), num(q), num(v), num(m), num(quad), num(closed), num(rel), "target".into()]);
        }
        for &q in &qs {
            let d = cfg.delta * cfg.radius;
            let data = extremal::balanced_data(&geom, d, d)?;
            let u = rearrange_radial(&solve_radial(&geom, &data)?)?;
            let value = lq_norm(&u, q)?.value / data.l1_norm()?;
            let bound = mazya_constant_compact(n, q, v)?;
            table.push(vec![
                n.to_string(),
                num(q),
                num(v),
                num(bound),
                "".into(),
                num(value),
                num(value / bound),
                "no-target".into(),
            ]);
        }
    }
    let mut out = Outcome::new(table);
    out.require(worst <= 1e-8, format!("Γ bracket vs quadrature: worst relative difference {worst:.3e} ≤ 1e-8"));
    Ok(out)
}

fn sqrt_kernel(n: u32, v: f64) -> Result<MonotoneProfile<f64>, CliError> {
    Ok(MonotoneProfile::single(
        Form::KernelPower {
            n,
            v,
            coef: 1.0,
            gamma: 0.5,
            offset: 0.0,
        },
        v,
    )?)
}

/// `(name, profile, expected membership)`.
pub type NamedProfile = (&'static str, MonotoneProfile<f64>, bool);

/// Named test profiles with their expected membership.
pub fn membership_profiles(n: u32, v: f64) -> Result<Vec<NamedProfile>, CliError> {
    let g = MonotoneProfile::green(n, v)?;
    Ok(vec![
        ("kernel", g.clone(), false),
        ("double_kernel", g.scaled(2.0), false),
        ("sqrt_kernel", sqrt_kernel(n, v)?, true),
        ("bounded", truncated_kernel(n, v, 2.0)?, true),
        ("two_step", MonotoneProfile::from_steps(&[(2.0, 0.01 * v), (1.0, 0.99 * v)])?, true),
    ])
}

fn membership_table() -> Table {
    Table::new(&[
        "section",
        "n",
        "profile",
        "param",
        "member",
        "tail_defect",
        "limit_defect",
        "lexp_norm",
        "level",
        "mass",
        "constant",
        "limsup",
        "density_violations",
        "chain_violations",
        "potential_ok",
    ])
}

fn blank(k: usize) -> Vec<String> {
    vec![String::new(); k]
}

/// Membership verdicts, the majorant domination chain and the truncated
/// kernels that show the target spaces lack the Fatou property.
pub fn cmd_target_membership(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let mut table = membership_table();
    let mut checks = vec![];
    let v = 1.0;
    let jobs: Vec<(u32, &'static str, MonotoneProfile<f64>, bool)> = cfg
        .dims
        .iter()
        .map(|&n| membership_profiles(n, v).map(|ps| ps.into_iter().map(move |(a, b, c)| (n, a, b, c))))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();
    type Row = (u32, &'static str, bool, sharp_embed::target::MembershipVerdict<f64>, DominationReport<f64>);
    let results: Vec<Row> = jobs
        .par_iter()
        .map(|(n, name, u, expected)| -> Result<Row, CliError> {
            let verdict = target_defect(u, *n, v, cfg.threshold)?;
            let report = if verdict.member {
                domination_chain(u, *n, None, cfg.majorant_points, cfg.tol)?
            } else {
                extended_domination(u, *n, None, cfg.majorant_points, cfg.tol)?
            };
            Ok((*n, *name, *expected, verdict, report))
        })
        .collect::<Result<_, _>>()?;
    for (n, name, expected, verdict, rep) in &results {
        checks.push((
            verdict.member == *expected,
            format!("n={n} {name}: member = {} (tail defect {:.3e})", verdict.member, verdict.tail_defect),
        ));
        let chain_v: usize = rep.chain.iter().map(|c| c.violations).sum();
        checks.push((
            rep.holds(),
            format!(
                "n={n} {name}: domination chain, {} + {chain_v} violations, C = {:.6e}",
                rep.density.violations, rep.constant
            ),
        ));
        table.push(vec![
            "membership".into(),
            n.to_string(),
            (*name).into(),
            "".into(),
            verdict.member.to_string(),
            num(verdict.tail_defect),
            num(verdict.limit_defect),
            "".into(),
            num(rep.level),
            num(rep.mass),
            num(rep.constant),
            num(rep.limsup),
            rep.density.violations.to_string(),
            chain_v.to_string(),
            rep.potential_ok.to_string(),
        ]);
    }
    // truncations of the planar kernel
    let n = 2;
    let g = MonotoneProfile::green(n, v)?;
    let cap = lexp_norm(&g)?.value;
    let mut sup: f64 = 0.0;
    let mut all_members = true;
    for m in 1..=cfg.truncations {
        let u = truncated_kernel(n, v, m as f64)?;
        let verdict = target_defect(&u, n, v, cfg.threshold)?;
        let norm = lexp_norm(&u)?.value;
        sup = sup.max(norm);
        all_members &= verdict.member;
        let mut row = vec![
            "fatou".into(),
            n.to_string(),
            "truncated_kernel".into(),
            m.to_string(),
            verdict.member.to_string(),
            num(verdict.tail_defect),
            num(verdict.limit_defect),
            num(norm),
        ];
        row.extend(blank(7));
        table.push(row);
    }
    let verdict = target_defect(&g, n, v, cfg.threshold)?;
    let mut row = vec![
        "fatou".into(),
        n.to_string(),
        "kernel".into(),
        "inf".into(),
        verdict.member.to_string(),
        num(verdict.tail_defect),
        num(verdict.limit_defect),
        num(cap),
    ];
    row.extend(blank(7));
    table.push(row);
    checks.push((
        all_members && sup <= cap * (1.0 + cfg.tol),
        format!("truncations are members with lexp norms ≤ {cap:.6e} (sup {sup:.6e})"),
    ));
    checks.push((
        !verdict.member && verdict.tail_defect >= 0.99,
        format!("untruncated kernel: member = {}, defect {:.6}", verdict.member, verdict.tail_defect),
    ));
    let mut out = Outcome::new(table);
    for (ok, what) in checks {
        out.require(ok, what);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_data_are_reproducible() {
        let cfg = RunConfig {
            samples: 5,
            ..RunConfig::default()
        };
        let a = random_data(&cfg);
        let b = random_data(&cfg);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.shells, y.shells);
        }
    }

    #[test]
    fn balanced_data_have_zero_mean() {
        let cfg = RunConfig {
            samples: 20,
            ..RunConfig::default()
        };
        for d in random_data(&cfg).iter().filter(|d| d.kind == DataKind::Balanced) {
            let geom = BallGeometry::new(d.n, cfg.radius).unwrap();
            let f = RadialProfile::piecewise_constant(geom, &d.shells).unwrap();
            let (p, m) = f.signed_mass_split().unwrap();
            assert!((p - m).abs() <= 1e-12 * (p + m));
            assert!(d.shells.iter().all(|s| s.1.abs() <= 1.0 + 1e-15));
        }
    }

    #[test]
    fn slope_of_a_line() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 3.0 * i as f64 + 1.0)).collect();
        assert!((fit_slope(&pts) - 3.0).abs() < 1e-12);
    }
}
