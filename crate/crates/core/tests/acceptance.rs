//! Acceptance run: one line per criterion. Exits nonzero if the set of failing criteria differs
//! from `EXPECTED_FAILURES`.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use orbitlab::heisenberg::BilinearForm;
use orbitlab::kirillov::{OrthoMode, UnipotentGroupSpec};
use orbitlab::mackey::{brute_force_census, mackey_census, Hei2Spec, MackeyError};
use orbitlab::orbits::DEFAULT_BUDGET;
use orbitlab::poly::{
    family_isaacs, isaacs_check, prime_powers_above, verify_reference_polynomials, CensusFamily, PolyError,
};
use orbitlab::roots::{abelian_ideal_check, Family, Root, RootSystemType, Subalgebra};
use orbitlab::{FieldCtx, MatrixFq};

/// The printed O_3 displays are not polynomial identities as printed.
const EXPECTED_FAILURES: &[usize] = &[6];

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn field(q: u64) -> FieldCtx {
    q.to_string().parse().expect("valid field size")
}

/// Standard symplectic form on the first `2⌊n/2⌋` coordinates.
fn padded_symplectic(n: usize) -> Vec<Vec<i64>> {
    let k = n / 2;
    let mut g = vec![vec![0; n]; n];
    for (i, row) in g.iter_mut().enumerate().take(k) {
        row[i + k] = 1;
    }
    g
}

fn identity_gram(n: usize) -> Vec<Vec<i64>> {
    (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect()
}

fn criterion_1() -> Check {
    let mut instances = 0;
    for q in [5u64, 7] {
        let ctx = field(q);
        for n in 1..=4 {
            let mut forms = vec![
                ("zero", BilinearForm::zero(&ctx, n)),
                ("identity", BilinearForm::identity(&ctx, n)),
                ("symplectic", BilinearForm::from_ints(&ctx, &padded_symplectic(n)).unwrap()),
            ];
            for seed in 0..6 {
                forms.push(("random", BilinearForm::random(&ctx, n, 1000 * q + 10 * n as u64 + seed)));
            }
            for (name, form) in forms {
                let start = Instant::now();
                let (brute, _) = form.enumerate_orbits_brute(DEFAULT_BUDGET).map_err(|e| e.to_string())?;
                let closed = form.classify_orbits_closed_form();
                ensure(brute == closed, || format!("q={q} n={n} {name}: {brute:?} != {closed:?}"))?;
                ensure(start.elapsed().as_secs() <= 60, || format!("q={q} n={n} {name} too slow"))?;
                instances += 1;
            }
        }
    }
    Ok(format!("{instances} forms, brute force = closed form row for row"))
}

fn criterion_2() -> Check {
    let ctx = field(5);
    let form = BilinearForm::from_ints(&ctx, &[vec![0, 1], vec![0, 0]]).unwrap();
    let g = UnipotentGroupSpec::from_heisenberg(&form).map_err(|e| e.to_string())?;
    let r = g.verify_orbit_method(DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    ensure(r.orbit_count == 29 && r.class_count == 29, || {
        format!("orbits {} classes {}", r.orbit_count, r.class_count)
    })?;
    ensure(r.sum_of_squares == 125 && r.group_order == 125, || format!("sum of squares {}", r.sum_of_squares))?;
    let o = &r.orthonormality;
    ensure(o.mode == OrthoMode::Exhaustive && o.characters_checked == 29, || format!("{o:?}"))?;
    ensure(o.pairs_checked == 29 * 30 / 2 && o.ok && o.failures.is_empty(), || format!("{o:?}"))?;
    ensure(r.passed, || "verification report failed".into())?;
    Ok("29 orbits = 29 classes, sum of squares 125, 435 inner products exact".into())
}

const HEI2_CASES: [(Family, usize, u64); 4] = [(Family::B, 2, 5), (Family::D, 2, 5), (Family::B, 2, 7), (Family::D, 2, 7)];

fn criterion_3() -> Check {
    let mut notes = Vec::new();
    for (f, n, q) in HEI2_CASES {
        let spec = Hei2Spec::new(f, n, &field(q)).unwrap();
        let census = mackey_census(&spec, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
        let brute = brute_force_census(&spec, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
        ensure(census.total == brute.class_count, || {
            format!("{f} n={n} q={q}: Mackey {} vs classes {}", census.total, brute.class_count)
        })?;
        ensure(census.sum_of_squares == spec.group_order(), || format!("{f} n={n} q={q}: sum of squares"))?;
        let per = brute.per_degree.ok_or("per-degree census over budget")?;
        let a: Vec<(u64, u64)> = per.iter().map(|d| (d.degree, d.count)).collect();
        let b: Vec<(u64, u64)> = census.computed_rows.iter().map(|r| (r.degree, r.count)).collect();
        ensure(a == b, || format!("{f} n={n} q={q}: {a:?} vs {b:?}"))?;
        notes.push(format!("{f}{} q={q}: {}", n + 1, census.total));
    }
    ensure(notes[0].ends_with(" 3745") && notes[1].ends_with(" 265"), || format!("{notes:?}"))?;
    Ok(notes.join(", "))
}

fn criterion_4() -> Check {
    let mut flagged = 0;
    for (f, n, q) in HEI2_CASES {
        let spec = Hei2Spec::new(f, n, &field(q)).unwrap();
        let c = mackey_census(&spec, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
        let k = spec.k() as u32;
        let m = q.pow(k - 2);
        let printed: Vec<(u64, u64)> = c.paper_rows.iter().map(|r| (r.degree, r.count)).collect();
        ensure(printed == vec![(1, m), (q, m * (m - 1) / (q - 1)), (m, (q - 1) * q)], || {
            format!("{f} q={q}: printed rows {printed:?}")
        })?;
        let top = c.computed_rows.last().ok_or("empty census")?;
        ensure(top.degree == m && top.count == (q - 1) * q, || format!("{f} q={q}: top row {top:?}"))?;
        let mut expected = Vec::new();
        for p in &c.paper_rows {
            let computed = c.computed_rows.iter().find(|r| r.degree == p.degree).map_or(0, |r| r.count);
            if computed != p.count {
                expected.push(p.degree);
            }
        }
        for r in &c.computed_rows {
            if !c.paper_rows.iter().any(|p| p.degree == r.degree) {
                expected.push(r.degree);
            }
        }
        expected.sort_unstable();
        let got: Vec<u64> = c.discrepancy_flags.iter().map(|d| d.degree).collect();
        ensure(got == expected, || format!("{f} q={q}: flags {got:?}, mismatched cells {expected:?}"))?;
        ensure(!got.contains(&m), || "top row flagged".into())?;
        flagged += got.len();
    }
    Ok(format!("top-degree rows agree; {flagged} mismatched cells flagged, none reconciled"))
}

fn drift_free(gram: &[Vec<i64>], qs: &[u64]) -> bool {
    let ranks: Vec<usize> = qs
        .iter()
        .map(|&q| BilinearForm::from_ints(&field(q), gram).unwrap().antisymmetric_rank())
        .collect();
    ranks.windows(2).all(|w| w[0] == w[1])
}

fn criterion_5() -> Check {
    let mut rows = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(49325);
    let mut skipped = 0;
    for n in 1..=4usize {
        let family = CensusFamily::GenHeisenberg { gram: vec![vec![0; n]; n] };
        let qs = prime_powers_above(3, family.degree_bound() + 2);
        let mut grams = vec![vec![vec![0; n]; n], identity_gram(n), padded_symplectic(n)];
        let mut random = 0;
        while random < 5 {
            let g: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-3..=3)).collect()).collect();
            if drift_free(&g, &qs) {
                grams.push(g);
                random += 1;
            } else {
                // The guard must reject it.
                let r = family_isaacs(&CensusFamily::GenHeisenberg { gram: g }, &qs, DEFAULT_BUDGET);
                ensure(matches!(r, Err(PolyError::RankDrift(_))), || "rank drift not detected".into())?;
                skipped += 1;
            }
        }
        for gram in grams {
            let family = CensusFamily::GenHeisenberg { gram };
            let r = family_isaacs(&family, &qs, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
            for row in &r.rows {
                ensure(row.passed && row.symbolic_match == Some(true), || {
                    format!("{} e={}: {} ({:?})", r.family, row.e, row.display_v, row.warnings)
                })?;
                rows += 1;
            }
        }
    }
    for (f, n) in [(Family::B, 2), (Family::D, 2)] {
        let family = CensusFamily::Hei2 { family: f, n };
        let qs = prime_powers_above(3, family.degree_bound() + 2);
        let r = family_isaacs(&family, &qs, 30_000_000).map_err(|e| e.to_string())?;
        ensure(r.passed, || format!("{}: {:?}", r.family, r.rows))?;
        for row in &r.rows {
            ensure(isaacs_check(&row.poly).pass, || format!("{} e={}", r.family, row.e))?;
        }
        rows += r.rows.len();
    }
    Ok(format!("{rows} rows nonnegative integral in v ({skipped} drifting Gram matrices rejected by the guard)"))
}

fn criterion_6() -> Check {
    let report = verify_reference_polynomials();
    let mut failures = Vec::new();
    for e in &report.entries {
        if !e.isaacs.pass {
            failures.push(format!("{} n={:?}: negative v-coefficient {:?}", e.name, e.n, e.isaacs.witness));
        }
        if e.identity_holds == Some(false) {
            let diff = e.difference.as_ref().map(|d| d.display(orbitlab::poly::Basis::Q)).unwrap_or_default();
            failures.push(format!("{} n={}: q-form - v-form = {diff}", e.name, e.n.unwrap_or_default()));
        }
    }
    if failures.is_empty() {
        Ok("identities hold for n = 7..12; F4 and E7 polynomials nonnegative".into())
    } else {
        let nonneg = report.entries.iter().all(|e| e.isaacs.pass);
        Err(format!(
            "{} identity checks fail (nonnegativity of all printed v-forms: {}); first: {}",
            failures.len(),
            if nonneg { "ok" } else { "FAILED" },
            failures[0]
        ))
    }
}

fn criterion_7() -> Check {
    let ctx = field(5);
    let mut scalars = Vec::new();
    for n in [3, 4] {
        let t = RootSystemType::new(Family::C, n).unwrap();
        let hei2 = t.subalgebra_basis(Subalgebra::Hei2, &ctx).map_err(|e| e.to_string())?;
        let first: Vec<_> = hei2.iter().filter(|v| v.root.col() == 1).cloned().collect();
        let check = abelian_ideal_check(&ctx, &first, &hei2).map_err(|e| e.to_string())?;
        ensure(!check.is_abelian, || format!("C{n}: first column abelian"))?;
        let (a, b, bracket) = check.witness.ok_or("no witness")?;
        ensure(a == Root::eps_minus(1, 2) && b == Root::eps_plus(1, 2), || format!("witness {a}, {b}"))?;
        let target = t.root_vector(Root::two_eps(1), &ctx).unwrap().matrix;
        let scalar = (0..ctx.q())
            .map(|c| ctx.element(c).unwrap())
            .find(|&c| !c.is_zero() && target.scalar_mul(c) == bracket);
        let scalar = scalar.ok_or_else(|| format!("C{n}: bracket not a nonzero multiple of e_2e1"))?;
        scalars.push(scalar.index());
        let spec = Hei2Spec::new(Family::C, n - 1, &ctx).unwrap();
        ensure(mackey_census(&spec, DEFAULT_BUDGET) == Err(MackeyError::NonAbelianIdeal), || {
            format!("C{n}: Mackey census not refused")
        })?;
    }
    Ok(format!("C3, C4: [e_(e1-e2), e_(e1+e2)] = c e_(2e1) with c = {scalars:?}; Mackey census refused"))
}

fn random_strict_upper(ctx: &FieldCtx, size: usize, rng: &mut ChaCha8Rng) -> MatrixFq {
    let mut m = MatrixFq::zeros(ctx, size, size);
    for i in 0..size {
        for j in i + 1..size {
            m.set(i, j, ctx.element(rng.gen_range(0..ctx.q())).unwrap());
        }
    }
    m
}

fn criterion_8() -> Check {
    let ctx = field(5);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut pairs = 0;
    for f in [Family::B, Family::C, Family::D] {
        let t = RootSystemType::new(f, 3).unwrap();
        let vs = t.root_vectors(&ctx);
        for x in &vs {
            ensure(t.in_classical_algebra(&x.matrix), || format!("{f}3: {} not in algebra", x.root))?;
            for y in &vs {
                let c = x.matrix.commutator(&y.matrix).unwrap();
                ensure(t.in_classical_algebra(&c), || format!("{f}3: [{}, {}] not in algebra", x.root, y.root))?;
                pairs += 1;
            }
        }
        for n in [3, 4] {
            RootSystemType::new(f, n)
                .unwrap()
                .subalgebra_basis(Subalgebra::Hei2, &ctx)
                .map_err(|e| format!("{f}{n}: hei2 not closed: {e}"))?;
        }
    }
    for (f, n) in [(Family::B, 2), (Family::D, 2), (Family::D, 3)] {
        let spec = Hei2Spec::new(f, n, &ctx).unwrap();
        let g = spec.build_groups().map_err(|e| e.to_string())?;
        ensure(spec.order_a() * spec.order_b() == g.full_group().group_order() as u64, || "orders".into())?;
        if spec.order_a() <= 100_000 {
            ensure(g.verify_trivial_intersection(DEFAULT_BUDGET).unwrap(), || format!("{f}{}: A ∩ B", n + 1))?;
        }
        let k = spec.k();
        for _ in 0..20 {
            let a: Vec<_> = (0..k).map(|_| ctx.element(rng.gen_range(0..5)).unwrap()).collect();
            let b: Vec<_> = (0..k - 2).map(|_| ctx.element(rng.gen_range(0..5)).unwrap()).collect();
            g.conj_action(&b, &a).map_err(|e| format!("{f}{}: conjugate left A: {e}", n + 1))?;
        }
    }
    let ctx7 = field(7);
    for size in 2..=6 {
        for _ in 0..20 {
            let x = random_strict_upper(&ctx7, size, &mut rng);
            let e = x.exp_nilpotent().unwrap();
            ensure(e.log_unipotent().unwrap() == x, || "log(exp x) != x".into())?;
            let u = MatrixFq::identity(&ctx7, size).add(&x).unwrap();
            ensure(u.log_unipotent().unwrap().exp_nilpotent().unwrap() == u, || "exp(log u) != u".into())?;
        }
    }
    let mut perturbations = 0;
    for q in [5u64, 7] {
        let ctx = field(q);
        for n in 1..=3 {
            for seed in 0..4 {
                let form = BilinearForm::random(&ctx, n, 77 * q + 7 * n as u64 + seed);
                let s = BilinearForm::random(&ctx, n, 991 + seed).gram().clone();
                let sym = s.add(&s.transpose()).unwrap();
                let pert = form.perturbed(&sym).unwrap();
                let (a, _) = form.enumerate_orbits_brute(DEFAULT_BUDGET).unwrap();
                let (b, _) = pert.enumerate_orbits_brute(DEFAULT_BUDGET).unwrap();
                ensure(a == b, || format!("q={q} n={n}: census changed under symmetric perturbation"))?;
                perturbations += 1;
            }
        }
    }
    Ok(format!(
        "{pairs} bracket pairs in so/sp, hei2 closed, semidirect axioms, exp/log, {perturbations} perturbations"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("gen-Heisenberg oracle equivalence", criterion_1),
        ("orbit method for H_beta, q = 5", criterion_2),
        ("Hei2 census vs brute force", criterion_3),
        ("printed table comparison", criterion_4),
        ("Isaacs positivity of computed rows", criterion_5),
        ("reference polynomials", criterion_6),
        ("type C obstruction", criterion_7),
        ("structural invariants", criterion_8),
    ];
    let mut results = BTreeMap::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = run();
        let secs = start.elapsed().as_secs_f64();
        match &r {
            Ok(msg) => println!("criterion {}: PASS  {name} ({secs:.1}s): {msg}", i + 1),
            Err(msg) => println!("criterion {}: FAIL  {name} ({secs:.1}s): {msg}", i + 1),
        }
        results.insert(i + 1, r.is_ok());
    }
    let failed: Vec<usize> = results.iter().filter(|(_, ok)| !**ok).map(|(i, _)| *i).collect();
    println!(
        "acceptance: {} passed, {} failed {:?}; expected failures {:?}",
        results.len() - failed.len(),
        failed.len(),
        failed,
        EXPECTED_FAILURES
    );
    if failed == EXPECTED_FAILURES {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
