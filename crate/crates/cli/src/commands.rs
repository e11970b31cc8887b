use std::f64::consts::PI;

use crepant::cohomology::{self, FixedPointData, LambdaPair, Space};
use crepant::continuation::{self, PathSpec};
use crepant::mirror::gkz::{gkz_residual_x, gkz_residual_y, pf_residual_x, pf_residual_x0, pf_residual_y};
use crepant::mirror::{self, Chart, GkzOperator};
use crepant::quantum;
use crepant::series::TruncatedSeries;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::report::{Check, Outcome, Table};
use crate::CliError;

type Res = Result<Outcome, CliError>;

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value, CliError> {
    Ok(serde_json::to_value(v)?)
}

fn series_rows(label: &str, s: &TruncatedSeries, rows: &mut Vec<Vec<String>>) {
    for (e, c) in s.terms() {
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let exps: Vec<String> = e.iter().map(u32::to_string).collect();
        rows.push(vec![label.to_string(), exps.join(" "), c.re.to_string(), c.im.to_string()]);
    }
}

fn coefficient_table(file: &str, rows: Vec<Vec<String>>) -> Table {
    Table {
        file: file.into(),
        header: ["series", "exponents", "re", "im"].map(String::from).to_vec(),
        rows,
    }
}

pub fn iseries(cfg: &RunConfig) -> Res {
    let (n, d) = (cfg.n, cfg.degree_or(6));
    let z = cfg.z_order.unwrap_or(d + 2);
    let lambda = cfg.lambdas(1)[0];
    let x0 = Complex64::from(cfg.x0);
    let i = match cfg.side {
        Space::Orbifold => mirror::i_function_x(n, d, z, x0, lambda)?,
        Space::Resolution => mirror::i_function_y(n, d, z, x0, lambda)?,
    };
    let mut lead: f64 = 0.0;
    for (k, s) in i.rows[0].iter().enumerate() {
        let want = if k == 0 { 1.0 } else { 0.0 };
        let one = TruncatedSeries::constant(n - 1, d, Complex64::from(want));
        lead = lead.max(s.try_sub(&one)?.max_abs());
    }
    let mut rows = Vec::new();
    for (r, row) in i.rows.iter().enumerate() {
        for (k, s) in row.iter().enumerate() {
            series_rows(&format!("z^{} e_{k}", 1 - r as i64), s, &mut rows);
        }
    }
    Ok(Outcome {
        checks: vec![Check::at_most("leading_row", lead, 1e-14)],
        data: json!({ "i_function": to_value(&i)?, "prefactor": format!("exp({}/z)", cfg.x0) }),
        error_budget: None,
        tables: vec![coefficient_table("iseries.csv", rows)],
    })
}

pub fn mirror_map(cfg: &RunConfig) -> Res {
    let (n, d) = (cfg.n, cfg.degree_or(10));
    let f = mirror::flat_coords_x(n, d)?;
    let f_i = mirror::flat_coords_x_from_i(n, d)?;
    let s = mirror::s_series(n, d)?;
    let q = mirror::exp_flat(n, d)?;
    let mut agree: f64 = 0.0;
    for (a, b) in f.iter().zip(&f_i) {
        agree = agree.max(a.try_sub(b)?.max_abs());
    }
    let mut checks = vec![Check::at_most("gamma_ratio_vs_i_function", agree, 1e-12)];
    if n == 2 && d >= 3 {
        let c3 = f[0].coeff(&[3]).re;
        checks.push(Check::at_most("x3_coefficient", (c3 - 1.0 / 24.0).abs(), 1e-12));
        let rec = mirror::gkz_recursion_n2(d);
        checks.push(Check::at_most("gkz_recursion", f[0].try_sub(&rec)?.max_abs(), 1e-12));
    }
    let mut rows = Vec::new();
    for (k, v) in f.iter().enumerate() {
        series_rows(&format!("f_{}", k + 1), v, &mut rows);
    }
    for (k, v) in s.iter().enumerate() {
        series_rows(&format!("S_{}", k + 1), v, &mut rows);
    }
    Ok(Outcome {
        checks,
        data: json!({ "f": to_value(&f)?, "S": to_value(&s)?, "q": to_value(&q)? }),
        error_budget: None,
        tables: vec![coefficient_table("mirror_map.csv", rows)],
    })
}

pub fn gkz_check(cfg: &RunConfig) -> Res {
    let (n, d) = (cfg.n, cfg.degree_or(10));
    let tol = cfg.tolerances.gkz;
    let f = mirror::flat_coords_x(n, d)?;
    let g = mirror::mirror_map_y(n, d)?;
    let mut checks = Vec::new();
    let mut entries = Vec::new();
    let ops_x = GkzOperator::generators(n, Chart::X)?;
    let ops_y = GkzOperator::generators(n, Chart::Y)?;
    for (k, fk) in f.iter().enumerate() {
        let mut worst: f64 = 0.0;
        for (j, op) in ops_x.iter().enumerate() {
            let r = gkz_residual_x(op, fk)?.relative();
            entries.push(json!({ "function": format!("f_{}", k + 1), "generator": j + 1, "relative": r }));
            worst = worst.max(r);
        }
        checks.push(Check::at_most(format!("f_{}", k + 1), worst, tol));
    }
    for (k, gk) in g.iter().enumerate() {
        let mut worst: f64 = 0.0;
        for (j, op) in ops_y.iter().enumerate() {
            let r = gkz_residual_y(op, gk)?.relative();
            entries.push(json!({ "function": format!("g_{}", k + 1), "generator": j + 1, "relative": r }));
            worst = worst.max(r);
        }
        checks.push(Check::at_most(format!("g_{}", k + 1), worst, tol));
    }
    Ok(Outcome {
        checks,
        data: json!({ "residuals": entries }),
        ..Outcome::default()
    })
}

pub fn pf_check(cfg: &RunConfig) -> Res {
    let (n, d) = (cfg.n, cfg.degree_or(6));
    let z = cfg.z_order.unwrap_or(d + 2);
    let tol = cfg.tolerances.pf;
    let x0 = Complex64::from(cfg.x0);
    let lambdas = cfg.lambdas(cfg.samples);
    let per: Vec<(f64, f64, f64)> = lambdas
        .par_iter()
        .map(|&l| -> Result<_, CliError> {
            let ix = mirror::i_function_x(n, d, z, x0, l)?;
            let iy = mirror::i_function_y(n, d, z, x0, l)?;
            let mut rx: f64 = 0.0;
            for op in GkzOperator::generators(n, Chart::X)? {
                rx = rx.max(pf_residual_x(&ix, &op)?.relative());
            }
            let mut ry: f64 = 0.0;
            for op in GkzOperator::generators(n, Chart::Y)? {
                ry = ry.max(pf_residual_y(&iy, &op)?.relative());
            }
            let (res0, scale0) = pf_residual_x0(&ix)?;
            Ok((rx, ry, if scale0 == 0.0 { res0 } else { res0 / scale0 }))
        })
        .collect::<Result<_, _>>()?;
    let mut checks = Vec::new();
    for (s, (rx, ry, r0)) in per.iter().enumerate() {
        checks.push(Check::at_most(format!("I_X sample {s}"), *rx, tol));
        checks.push(Check::at_most(format!("I_Y sample {s}"), *ry, tol));
        checks.push(Check::at_most(format!("I_X unit sample {s}"), *r0, tol));
    }
    Ok(Outcome {
        checks,
        data: json!({ "lambda": to_value(&lambdas)?, "degree": d, "z_order": z }),
        ..Outcome::default()
    })
}

pub fn continue_roots(cfg: &RunConfig, record: bool) -> Res {
    let n = cfg.n;
    let path = PathSpec::new(n, cfg.steps);
    let labels = continuation::labeling_report(n, 1e-3)?;
    let mut checks = vec![
        Check::at_most("x_labels", labels.x_defect, cfg.tolerances.labeling),
        Check::at_most("y_labels", labels.y_relative, 1e-2),
    ];
    let track = match continuation::track(&path, record) {
        Ok(t) => t,
        Err(e) => {
            checks.push(Check::failed("track", e.to_string()));
            return Ok(Outcome {
                checks,
                data: json!({ "labels": to_value(&labels)? }),
                ..Outcome::default()
            });
        }
    };
    let moved = track.sigma.iter().enumerate().filter(|(i, s)| i != *s).count();
    checks.push(Check::at_most("sigma_moved_labels", moved as f64, 0.0));
    checks.push(
        Check::at_most("min_separation_floor", continuation::SEPARATION_FLOOR, track.min_separation())
            .note("value is the floor, tolerance the observed separation"),
    );
    let jump = track.leg1.max_arg_jump.max(track.leg2.max_arg_jump);
    checks.push(Check::at_most("max_arg_jump", jump, PI / 2.0));
    let residual = track.leg1.max_residual.max(track.leg2.max_residual);
    checks.push(Check::at_most("max_root_residual", residual, 1e-10));
    checks.push(Check::at_most("junction_mismatch", track.junction_mismatch, cfg.tolerances.junction));
    let mut tables = Vec::new();
    if record {
        let mut rows = Vec::new();
        for leg in [&track.leg1, &track.leg2] {
            for st in &leg.steps {
                for (i, (r, l)) in st.roots.iter().zip(&st.logs).enumerate() {
                    rows.push(
                        [st.leg.to_string(), st.param.to_string(), i.to_string(), r.re.to_string(), r.im.to_string(), l.re.to_string(), l.im.to_string()]
                            .to_vec(),
                    );
                }
            }
        }
        tables.push(Table {
            file: "trajectories.csv".into(),
            header: ["leg", "param", "root", "re", "im", "log_re", "log_im"].map(String::from).to_vec(),
            rows,
        });
    }
    Ok(Outcome {
        checks,
        data: json!({
            "labels": to_value(&labels)?,
            "sigma": track.sigma,
            "eps_start": track.eps_start,
            "eps_end": track.eps_end,
            "y_start": to_value(&track.y_start)?,
            "x_end": to_value(&track.x_end)?,
            "min_separation": track.min_separation(),
            "refinements": track.leg1.refinements + track.leg2.refinements,
            "closed_form_deviation": track.closed_form_deviation,
        }),
        error_budget: None,
        tables,
    })
}

pub fn verify_crc(cfg: &RunConfig) -> Res {
    let (n, d) = (cfg.n, cfg.degree_or(12));
    let tol = cfg.tolerances.prop_ac_for(n);
    let mut checks = Vec::new();
    let mut data = serde_json::Map::new();
    let mut budget = None;
    let mut counterclockwise = false;
    match continuation::verify_prop_ac(n, d, cfg.steps) {
        Ok(r) => {
            let moved = r.sigma.iter().enumerate().filter(|(i, s)| i != *s).count();
            checks.push(Check::at_most("sigma_moved_labels", moved as f64, 0.0));
            checks.push(Check::at_most("max_error", r.max_error, tol));
            let off = r.offsets.iter().map(|o| (o + 1.0).norm()).fold(0.0, f64::max);
            checks.push(Check::at_most("offset_defect", off, 1e-3).note("continued g_i − Σ L_ij f_j in units of 2π√−1/n, expected −1"));
            checks.push(Check::at_most("error_budget_total", r.error_budget.total(), tol));
            counterclockwise = r.mu0_turn > 0.0;
            budget = Some(to_value(&r.error_budget)?);
            data.insert("prescribed".into(), to_value(&r)?);
        }
        Err(e) => checks.push(Check::failed("prescribed_path", e.to_string())),
    }
    if counterclockwise {
        // the first leg winds μ_0 the other way round the origin; report the
        // clockwise homotopy class alongside
        let alt = PathSpec::clockwise(n, cfg.steps)
            .and_then(|p| continuation::verify_prop_ac_along(&p, d));
        match alt {
            Ok(r) => {
                data.insert("clockwise".into(), to_value(&r)?);
            }
            Err(e) => {
                data.insert("clockwise".into(), json!({ "error": e.to_string() }));
            }
        }
    }
    Ok(Outcome {
        checks,
        data: Value::Object(data),
        error_budget: budget,
        tables: Vec::new(),
    })
}

pub fn pairing(cfg: &RunConfig) -> Res {
    let n = cfg.n;
    let tol = cfg.tolerances.pairing;
    let lambdas = cfg.lambdas(cfg.samples.max(1));
    let reports = lambdas
        .par_iter()
        .enumerate()
        .map(|(s, &l)| -> Result<_, CliError> {
            let rep = cohomology::pairing_report(n, l)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(s as u64 + 1));
            let pres = cohomology::pairing_preservation(n, l, 100, &mut rng)?;
            let residue = FixedPointData::new(n, l)?.residue_defect();
            Ok((rep, pres, residue))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut checks = Vec::new();
    for (s, (rep, pres, residue)) in reports.iter().enumerate() {
        checks.push(Check::at_most(format!("cartan sample {s}"), rep.residuals.cartan, tol));
        checks.push(Check::at_most(format!("unit sample {s}"), rep.residuals.unit, tol));
        checks.push(Check::at_most(format!("unit_omega sample {s}"), rep.residuals.unit_omega, tol));
        checks.push(Check::at_most(format!("adjoint_closed_form sample {s}"), rep.residuals.adjoint_closed_form, tol));
        checks.push(Check::at_most(format!("preservation sample {s}"), *pres, tol));
        checks.push(Check::at_most(format!("residue sample {s}"), *residue, tol));
    }
    let cartan: Vec<Vec<f64>> = reports[0]
        .0
        .cartan_matrix
        .iter()
        .map(|r| r.iter().map(|v| (v.re * 1e9).round() / 1e9).collect())
        .collect();
    let all: Vec<_> = reports.iter().map(|r| &r.0).collect();
    Ok(Outcome {
        checks,
        data: json!({ "cartan_matrix": cartan, "reports": to_value(&all)? }),
        ..Outcome::default()
    })
}

fn lambda_model_samples(cfg: &RunConfig) -> Vec<LambdaPair> {
    cfg.lambdas(4.max(cfg.samples))
}

pub fn products(cfg: &RunConfig) -> Res {
    let (n, d, side) = (cfg.n, cfg.degree_or(4), cfg.side);
    let z = cfg.z_order.unwrap_or(3);
    let tol = cfg.tolerances.quantum;
    let lambda = cfg.lambdas(1)[0];
    let ex = quantum::structure_constants(side, n, lambda, d, z)?;
    let g = quantum::gram(side, n, lambda)?;
    let fr = quantum::frobenius_check(&ex.constants, &g)?;
    let st = quantum::extraction_stability(side, n, lambda, d, z)?;
    let model = quantum::lambda_model_check(side, n, d, &lambda_model_samples(cfg))?;
    let checks = vec![
        Check::at_most("unit", fr.unit, 1e-12),
        Check::at_most("commutativity", fr.commutativity, 0.0),
        Check::at_most("frobenius_symmetry", fr.symmetry, tol),
        Check::at_most("associativity", fr.associativity, tol),
        Check::at_most("qde_residual", ex.qde_residual, tol),
        Check::at_most("flatness", ex.flatness_defect, tol),
        Check::at_most("z_window_drift", st.drift, cfg.tolerances.stability),
        Check::at_most("lambda_model", model.validation_defect, tol),
        Check::at_most("age_grading", model.forbidden, 1e-12),
    ];
    Ok(Outcome {
        checks,
        data: json!({
            "structure_constants": to_value(&ex.constants)?,
            "frobenius": to_value(&fr)?,
            "stability": to_value(&st)?,
            "lambda_model": to_value(&model)?,
        }),
        ..Outcome::default()
    })
}

pub fn corollary_check(cfg: &RunConfig) -> Res {
    let (n, d) = (cfg.n, cfg.degree_or(8));
    let lambda = cfg.lambdas(1)[0];
    let r = quantum::corollary_check(n, lambda, d)?;
    let mut checks = Vec::new();
    match &r.inconclusive {
        Some(msg) => checks.push(Check::failed("product_match", format!("INCONCLUSIVE: {msg}"))),
        None => {
            checks.push(Check::at_most("product_match", r.product_error, cfg.tolerances.corollary));
            checks.push(Check::at_most("reconstruction_validation", r.reconstruction_defect, quantum::RECONSTRUCTION_TOL));
        }
    }
    checks.push(Check::at_most("pairing", r.pairing_error, cfg.tolerances.pairing));
    checks.push(Check::at_most("unit", r.unit_error, 1e-12));
    Ok(Outcome {
        checks,
        data: to_value(&r)?,
        ..Outcome::default()
    })
}
