//! Acceptance criteria 1-12, one line each. Exits nonzero if a gating
//! criterion fails; criterion 12 only reports.

use std::f64::consts::PI;
use std::process::ExitCode;

use plevel_core::coefficients::system_residual;
use plevel_core::numerics::{quad_tail, TailSpec};
use plevel_core::schwarzschild::{c_constants, flux_constant, model_profile, ModelFunctions};
use plevel_core::verify::{
    evaluate_q, mass_functional_fp, monotonicity_report, penrose_margin, Grids, ModelBundle,
};
use plevel_core::warped::{
    capacity_cp, family_euclidean, family_schwarzschild, level_flow, masses, radial_p_harmonic,
    w_inequality_residual, Family, FlowProfile, WarpProfile,
};
use plevel_core::{Result, Tolerances};

const P_GRID: [f64; 3] = [1.2, 1.5, 1.8];
const MASSES: [f64; 3] = [1.0, 2.0, 5.0];
const BUMPS: [f64; 2] = [0.05, 0.1];

const MODEL_CONST_REL: f64 = 1e-8;
const ANCHOR_REL: f64 = 1e-6;
const ANCHOR_PERTURBATION: f64 = 1e-6;
const CONSTANCY_REL: f64 = 1e-6;
const IDENTITY_REL: f64 = 1e-6;
const PERFECT_SQUARE_REL: f64 = 1e-6;
const INVARIANCE_REL: f64 = 1e-8;
const W_IDENTITY_REL: f64 = 1e-6;
const RESIDUAL_FLOOR: f64 = -1e-8;
const SLOPE_FLOOR: f64 = -1e-8;
const PENROSE_REL: f64 = 1e-6;
const FP_REL: f64 = 1e-5;
const FP_ABS: f64 = 1e-6;
const EUCLID_REL: f64 = 1e-8;
const EUCLID_ADM_ABS: f64 = 1e-8;

struct Ctx {
    tol: Tolerances,
    grids: Grids,
    bundles: Vec<ModelBundle>,
}

impl Ctx {
    fn bundle(&self, p: f64) -> &ModelBundle {
        self.bundles
            .iter()
            .find(|b| b.model.p == p)
            .expect("p in grid")
    }

    fn flow(&self, family: Family, p: f64) -> Result<FlowProfile> {
        let scale = match family {
            Family::Schwarzschild { mass } | Family::Bumped { mass, .. } => mass,
            Family::Euclidean { radius } => radius,
        };
        let w = WarpProfile::new(family, self.grids.s_max * scale, self.grids.warp_points)?;
        level_flow(&w, p, self.grids.flow_points)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn c1_model_constants(_: &Ctx) -> Result<(bool, String)> {
    let p = 1.5;
    let f = ModelFunctions::new(p)?;
    let m = model_profile(p, 1e6, 4096)?;
    let errs = [
        rel(flux_constant(p)?, 60.0),
        rel(f.du(1.0), -15.0 / 16.0),
        rel(m.kp, 4.0 * PI * 60f64.sqrt()),
        rel(f.point(1.0).w, PI * (15.0f64 / 16.0).powi(2)),
    ];
    let worst = errs.iter().copied().fold(0.0, f64::max);
    Ok((
        worst <= MODEL_CONST_REL,
        format!("max rel err {worst:.2e} (tol {MODEL_CONST_REL:e})"),
    ))
}

fn c2_frobenius_anchor(_: &Ctx) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let ps = [
        1.2,
        1.5 - ANCHOR_PERTURBATION,
        1.5,
        1.5 + ANCHOR_PERTURBATION,
        1.8,
    ];
    for p in ps {
        let c = c_constants(&model_profile(p, 1e6, 4096)?)?;
        worst = worst.max(rel(c.b1, -(3.0 - p).powi(2) / (p - 1.0)));
    }
    Ok((
        worst <= ANCHOR_REL,
        format!(
            "max rel err of b1 {worst:.2e} over {} p values (tol {ANCHOR_REL:e})",
            ps.len()
        ),
    ))
}

fn c3_constancy(ctx: &Ctx) -> Result<(bool, String)> {
    let (mut dec, mut gro): (f64, f64) = (0.0, 0.0);
    for p in P_GRID {
        let b = ctx.bundle(p);
        let flow = ctx.flow(Family::Schwarzschild { mass: 2.0 }, p)?;
        let qd = evaluate_q(&flow, &b.decaying, &b.model)?;
        let qg = evaluate_q(&flow, &b.growing, &b.model)?;
        let w0 = b.model.functions.point(1.0).w;
        dec = dec.max(qd.values.iter().fold(0.0, |a: f64, v| a.max(v.abs())) / w0);
        let q0 = qg.values[0];
        gro = gro.max(
            qg.values
                .iter()
                .fold(0.0, |a: f64, v| a.max((v - q0).abs()))
                / q0.abs(),
        );
    }
    Ok((
        dec <= CONSTANCY_REL && gro <= CONSTANCY_REL,
        format!(
            "max|Q_*|/W_s(0) {dec:.2e}, max|Q^*-Q^*(0)|/|Q^*(0)| {gro:.2e} (tol {CONSTANCY_REL:e})"
        ),
    ))
}

fn c4_horizon_identity(ctx: &Ctx) -> Result<(bool, String)> {
    let (mut worst, mut signs): (f64, bool) = (0.0, true);
    for p in P_GRID {
        let b = ctx.bundle(p);
        let q = 3.0 - p;
        let at0 = |c: &plevel_core::numerics::SampledCurve| c.values()[0];
        let (f, g, h) = (
            at0(&b.decaying.f_curve),
            at0(&b.decaying.g_curve),
            at0(&b.decaying.h_curve),
        );
        let lhs = -4.0 * PI * q * q * f / (g + 2.0 * q * h);
        worst = worst.max(rel(lhs, b.model.functions.point(1.0).w));
        let (gg, hg) = (at0(&b.growing.g_curve), at0(&b.growing.h_curve));
        signs &= f < 0.0 && g + 2.0 * q * h > 0.0 && gg + 2.0 * q * hg < 0.0;
    }
    Ok((
        worst <= IDENTITY_REL && signs,
        format!("max rel err {worst:.2e} (tol {IDENTITY_REL:e}), signs {signs}"),
    ))
}

fn c5_perfect_square(ctx: &Ctx) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for p in P_GRID {
        let b = ctx.bundle(p);
        for s in [&b.decaying, &b.growing] {
            worst = worst.max(system_residual(s, &b.model)?.perfect_square);
        }
    }
    Ok((
        worst <= PERFECT_SQUARE_REL,
        format!("max residual/|g| {worst:.2e} (tol {PERFECT_SQUARE_REL:e})"),
    ))
}

/// `C_p` of Schwarzschild(m) from the areal form `ds = dφ/√(1-2m/φ)`, with
/// `φ = 2m + x²` removing the endpoint singularity. Shares no code with the
/// isotropic model.
fn areal_capacity(p: f64, m: f64, tol: &Tolerances) -> Result<f64> {
    let kappa = 2.0 / (p - 1.0);
    let integrand = |x: f64| {
        let phi = 2.0 * m + x * x;
        2.0 * phi.powf(0.5 - kappa)
    };
    let tail = TailSpec {
        exponent: 2.0 * kappa - 1.0,
        cutoff: 1e3 * m.sqrt(),
    };
    let integral = quad_tail(integrand, 0.0, tail, tol)?;
    Ok(4.0 * PI * integral.powf(1.0 - p))
}

fn c6_coordinate_invariance(ctx: &Ctx) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for p in P_GRID {
        let warp = family_schwarzschild(2.0, ctx.grids.s_max * 2.0)?;
        let cp = capacity_cp(&radial_p_harmonic(&warp, p)?);
        let areal = areal_capacity(p, 2.0, &ctx.tol)?;
        worst = worst
            .max(rel(cp, ctx.bundle(p).model.kp))
            .max(rel(areal, ctx.bundle(p).model.kp));
    }
    Ok((
        worst <= INVARIANCE_REL,
        format!("max rel err vs isotropic K_p {worst:.2e} (tol {INVARIANCE_REL:e})"),
    ))
}

fn c7_w_identity(ctx: &Ctx) -> Result<(bool, String)> {
    let (mut gap, mut floor, mut schw): (f64, f64, f64) = (0.0, f64::INFINITY, 0.0);
    for p in P_GRID {
        let scale = 4.0 * PI * (3.0 - p).powi(2);
        for eps in BUMPS {
            let r = w_inequality_residual(&ctx.flow(Family::bumped(1.0, eps), p)?)?;
            gap = gap.max(r.identity_gap / scale);
            floor = floor.min(r.min_residual);
        }
        let r = w_inequality_residual(&ctx.flow(Family::Schwarzschild { mass: 2.0 }, p)?)?;
        schw = schw.max(
            r.residual
                .values()
                .iter()
                .fold(0.0, |a: f64, v| a.max(v.abs()))
                / scale,
        );
    }
    Ok((
        gap <= W_IDENTITY_REL && floor >= RESIDUAL_FLOOR && schw <= W_IDENTITY_REL,
        format!("identity gap {gap:.2e}, min residual {floor:.2e}, Schwarzschild |residual| {schw:.2e} (scaled tol {W_IDENTITY_REL:e})"),
    ))
}

fn c8_monotonicity(ctx: &Ctx) -> Result<(bool, String)> {
    let mut min_slope = f64::INFINITY;
    let mut flags_ok = true;
    let mut cells = 0;
    for p in P_GRID {
        let b = ctx.bundle(p);
        let fams = MASSES
            .iter()
            .map(|&m| Family::Schwarzschild { mass: m })
            .chain(BUMPS.iter().map(|&e| Family::bumped(1.0, e)));
        for fam in fams {
            let flow = ctx.flow(fam, p)?;
            let schw = matches!(fam, Family::Schwarzschild { .. });
            for c in [&b.decaying, &b.growing] {
                let m = monotonicity_report(&evaluate_q(&flow, c, &b.model)?, &ctx.tol);
                min_slope = min_slope.min(m.min_forward_slope);
                flags_ok &= m.equality == schw;
            }
            cells += 1;
        }
    }
    Ok((
        min_slope >= SLOPE_FLOOR && flags_ok,
        format!("min forward slope {min_slope:.2e} (floor {SLOPE_FLOOR:e}) over {cells} metrics, equality flags {flags_ok}"),
    ))
}

fn c9_penrose(ctx: &Ctx) -> Result<(bool, String)> {
    let (mut worst, mut min_margin): (f64, f64) = (0.0, f64::INFINITY);
    for p in P_GRID {
        let b = ctx.bundle(p);
        for m in MASSES {
            let flow = ctx.flow(Family::Schwarzschild { mass: m }, p)?;
            let root = 2.0 * (flow.cp / b.model.kp).powf(1.0 / (3.0 - p));
            worst = worst.max((m - root).abs() / m);
        }
        for eps in BUMPS {
            let flow = ctx.flow(Family::bumped(1.0, eps), p)?;
            min_margin = min_margin.min(penrose_margin(&flow, &b.model, &ctx.tol)?.margin);
        }
    }
    Ok((
        worst <= PENROSE_REL && min_margin > 0.0,
        format!("Schwarzschild rel gap {worst:.2e} (tol {PENROSE_REL:e}), min bumped margin {min_margin:.4e}"),
    ))
}

fn c10_mass_functional(ctx: &Ctx) -> Result<(bool, String)> {
    let (mut worst, mut excess): (f64, f64) = (0.0, f64::NEG_INFINITY);
    for p in P_GRID {
        for m in MASSES {
            let fp = mass_functional_fp(&ctx.flow(Family::Schwarzschild { mass: m }, p)?)?;
            worst = worst.max(rel(fp.limit, 8.0 * PI * m));
        }
        for eps in BUMPS {
            let fp = mass_functional_fp(&ctx.flow(Family::bumped(1.0, eps), p)?)?;
            excess = excess.max(fp.limit - fp.bound);
        }
    }
    Ok((
        worst <= FP_REL && excess <= FP_ABS,
        format!("Schwarzschild rel err {worst:.2e} (tol {FP_REL:e}), bumped max(lim F_p - 8pi adm) {excess:.2e} (tol {FP_ABS:e})"),
    ))
}

fn c11_euclidean(ctx: &Ctx) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let warp = family_euclidean(1.0, ctx.grids.s_max)?;
    for p in P_GRID {
        let cp = capacity_cp(&radial_p_harmonic(&warp, p)?);
        let exact = 4.0 * PI * ((3.0 - p) / (p - 1.0)).powf(p - 1.0);
        worst = worst.max(rel(cp, exact));
    }
    let adm = masses(&warp)?.adm;
    Ok((
        worst <= EUCLID_REL && adm.abs() <= EUCLID_ADM_ABS,
        format!(
            "C_p rel err {worst:.2e} (tol {EUCLID_REL:e}), adm {adm:.2e} (tol {EUCLID_ADM_ABS:e})"
        ),
    ))
}

fn c12_diagnostics(ctx: &Ctx) -> Result<(bool, String)> {
    let mut lines = Vec::new();
    let mut finite = true;
    for p in P_GRID {
        let b = ctx.bundle(p);
        let mut diags = b.diagnostics.clone();
        let flow = ctx.flow(Family::Schwarzschild { mass: 2.0 }, p)?;
        let qg = evaluate_q(&flow, &b.growing, &b.model)?;
        let lim = plevel_core::verify::q_limit(&qg, &flow, &b.growing)?.limit;
        diags.insert(
            "growing_limit_bound".into(),
            plevel_core::verify::limit_bound_diagnostic(lim, &flow, &b.model),
        );
        for (name, d) in &diags {
            finite &= d.measured.is_finite() && d.candidates.values().all(|v| v.is_finite());
            let cands: Vec<String> = d
                .candidates
                .iter()
                .map(|(k, v)| format!("{k}={v:.6}"))
                .collect();
            lines.push(format!(
                "    p={p} {name}: measured={:.6} {}",
                d.measured,
                cands.join(" ")
            ));
        }
    }
    let expected = 5 * P_GRID.len();
    Ok((
        finite && lines.len() == expected,
        format!("reported, non-gating\n{}", lines.join("\n")),
    ))
}

type Criterion = fn(&Ctx) -> Result<(bool, String)>;

fn main() -> ExitCode {
    let tol = Tolerances::default();
    let grids = Grids::default();
    let bundles = match P_GRID
        .iter()
        .map(|&p| ModelBundle::new(p, &grids, &tol))
        .collect::<Result<Vec<_>>>()
    {
        Ok(b) => b,
        Err(e) => {
            println!("setup failed: {e}");
            return ExitCode::FAILURE;
        }
    };
    let ctx = Ctx {
        tol,
        grids,
        bundles,
    };
    let criteria: [(&str, Criterion, bool); 12] = [
        ("model constants", c1_model_constants, true),
        ("series anchor b1", c2_frobenius_anchor, true),
        ("constancy on the model", c3_constancy, true),
        ("horizon identity and signs", c4_horizon_identity, true),
        ("perfect-square relation", c5_perfect_square, true),
        (
            "coordinate invariance of K_p",
            c6_coordinate_invariance,
            true,
        ),
        ("W-inequality residual identity", c7_w_identity, true),
        ("monotonicity and equality flags", c8_monotonicity, true),
        ("sharp p-Penrose inequality", c9_penrose, true),
        ("mass functional limit", c10_mass_functional, true),
        ("Euclidean oracle", c11_euclidean, true),
        ("diagnostics", c12_diagnostics, false),
    ];
    let mut failed = 0;
    for (i, (name, run, gating)) in criteria.iter().enumerate() {
        let (ok, detail) = run(&ctx).unwrap_or_else(|e| (false, format!("error: {e}")));
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {verdict}: {name}: {detail}", i + 1);
        if !ok && *gating {
            failed += 1;
        }
    }
    println!("acceptance: {} of 11 gating criteria passed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
