//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use std::time::{Duration, Instant};

use common::{
    check_dot, fixture, fixture_names, lambda_violations, ledger_violations, lenient,
    oracle_params, witness_mismatches,
};
use morse_extend::diagram::export_dot;
use morse_extend::oracle::{brute_force_decide, random_germ, GeneratorParams};
use morse_extend::par::{self, Execution};
use morse_extend::search::{Mode, Witness};
use morse_extend::witness::{parse_witness, serialize_witness};
use morse_extend::{
    decide, enumerate_witnesses, parse_germ, serialize_germ, GermDiagram, KleinCondition,
    SurfaceClass,
};

type Outcome = Result<String, String>;

const ONE_SECOND: Duration = Duration::from_secs(1);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed())
}

/// Every accepting run of `germ` in `mode`.
fn all_witnesses(germ: &GermDiagram, mode: Mode) -> Vec<Witness> {
    enumerate_witnesses(germ, mode, usize::MAX, &lenient()).expect("search within budget")
}

fn path_germ(germs: &mut Vec<(String, Mode, GermDiagram)>) -> Outcome {
    let d = fixture("path4.germ");
    let (v, took) = timed(|| decide(&d, Mode::Klein, &Default::default()));
    let v = v.map_err(|e| e.to_string())?;
    ensure(v.condition() == Some(KleinCondition::Condition2), || {
        format!("verdict {v}")
    })?;
    let labels: Vec<SurfaceClass> = v
        .witness
        .as_ref()
        .unwrap()
        .diagram
        .edges
        .iter()
        .map(|e| e.cls)
        .collect();
    let want: Vec<SurfaceClass> = [(0, 0), (1, 1), (0, 0)]
        .into_iter()
        .map(|(g, o)| SurfaceClass::new(g, o).unwrap())
        .collect();
    ensure(labels == want, || format!("labels {labels:?}"))?;
    ensure(took < ONE_SECOND, || format!("took {took:?}"))?;
    germs.push(("path4".into(), Mode::Klein, d));
    Ok(format!("{v}, labels (0,0) (1,1) (0,0), {took:?}"))
}

fn sign_flips() -> Outcome {
    let mut names: Vec<String> = ["max", "mobius1", "mobius2", "min"]
        .iter()
        .map(|f| format!("path4_flip_{f}.germ"))
        .collect();
    names.extend((0..8).map(|i| format!("rigid8_flip_v{i:02}.germ")));
    let mut slowest = Duration::ZERO;
    for name in &names {
        let d = fixture(name);
        let (v, took) = timed(|| decide(&d, Mode::Klein, &lenient()));
        let v = v.map_err(|e| format!("{name}: {e}"))?;
        ensure(!v.extendable, || format!("{name}: {v}"))?;
        ensure(took < ONE_SECOND, || format!("{name}: took {took:?}"))?;
        let o = brute_force_decide(&d, Mode::Klein).map_err(|e| format!("{name}: {e}"))?;
        ensure(o.witness_count == 0, || {
            format!("{name}: oracle counts {}", o.witness_count)
        })?;
        slowest = slowest.max(took);
    }
    Ok(format!(
        "{} variants (4 of path4, 8 of rigid8) not extendable, oracle count 0, slowest {slowest:?}",
        names.len()
    ))
}

fn loop_pattern(germs: &mut Vec<(String, Mode, GermDiagram)>) -> Outcome {
    let d = fixture("cycle4.germ");
    let v = decide(&d, Mode::Klein, &Default::default()).map_err(|e| e.to_string())?;
    ensure(v.condition() == Some(KleinCondition::Condition1), || {
        format!("verdict {v}")
    })?;
    let w = v.witness.as_ref().unwrap();
    ensure(w.diagram.betti1() == 1, || {
        format!("betti1 {}", w.diagram.betti1())
    })?;
    ensure(
        w.diagram.edges.iter().all(|e| e.cls == SurfaceClass::DISC),
        || "non-disc label".into(),
    )?;
    germs.push(("cycle4".into(), Mode::Klein, d));
    Ok(format!(
        "{v}, betti1 1, all {} labels (0,0)",
        w.diagram.edges.len()
    ))
}

fn oracle_equivalence(germs: &mut Vec<(String, Mode, GermDiagram)>) -> Outcome {
    let t = Instant::now();
    let mut jobs = Vec::new();
    for mode in [Mode::General, Mode::Klein] {
        for seed in 0..500u64 {
            jobs.push((mode, seed));
        }
    }
    let results = par::map(Execution::Parallel, &jobs, |&(mode, seed)| {
        let d = random_germ(&oracle_params(mode, seed, 8)).map_err(|e| e.to_string())?;
        let v = decide(&d, mode, &lenient()).map_err(|e| e.to_string())?;
        let o = brute_force_decide(&d, mode).map_err(|e| e.to_string())?;
        Ok::<_, String>((
            d,
            (v.extendable, v.witness_count),
            (o.extendable, o.witness_count),
        ))
    });
    let mut mismatches = Vec::new();
    let mut positive = [0usize; 2];
    for (&(mode, seed), r) in jobs.iter().zip(results) {
        let (d, search, oracle) = r.map_err(|e| format!("{mode} seed {seed}: {e}"))?;
        if search != oracle {
            mismatches.push(format!(
                "{mode} seed {seed}: search {search:?} oracle {oracle:?}"
            ));
        }
        if search.0 {
            positive[usize::from(mode == Mode::Klein)] += 1;
            germs.push((format!("{mode} seed {seed}"), mode, d));
        }
    }
    let took = t.elapsed();
    ensure(mismatches.is_empty(), || mismatches.join("; "))?;
    ensure(took < Duration::from_secs(600), || format!("took {took:?}"))?;
    Ok(format!(
        "1000 germs, 0 mismatches, extendable {} general / {} klein, {took:?}",
        positive[0], positive[1]
    ))
}

fn ledger_invariants(
    germs: &[(String, Mode, GermDiagram)],
    runs: &mut Vec<(String, Mode, GermDiagram, Witness)>,
) -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    for (name, mode, d) in germs {
        for w in all_witnesses(d, *mode) {
            bad.extend(
                ledger_violations(d, &w.trace)
                    .into_iter()
                    .map(|b| format!("{name}: {b}")),
            );
            checked += 1;
            runs.push((name.clone(), *mode, d.clone(), w));
        }
    }
    ensure(bad.is_empty(), || {
        format!("{} violations: {}", bad.len(), bad.join("; "))
    })?;
    Ok(format!("{checked} accepting traces, 0 violations"))
}

fn witness_replay(runs: &[(String, Mode, GermDiagram, Witness)]) -> Outcome {
    let mut checked = runs.len();
    let mut bad = Vec::new();
    for (name, mode, d, w) in runs {
        bad.extend(
            witness_mismatches(d, *mode, w)
                .into_iter()
                .map(|b| format!("{name}: {b}")),
        );
        match parse_witness(d, &serialize_witness(d, *mode, w)) {
            Ok((m, back)) if m == *mode && back == *w => {}
            Ok(_) => bad.push(format!("{name}: witness file changed on reload")),
            Err(e) => bad.push(format!("{name}: witness file: {e}")),
        }
    }
    for name in fixture_names() {
        let d = fixture(&name);
        for mode in [Mode::General, Mode::Klein] {
            let Ok(v) = decide(&d, mode, &lenient()) else {
                continue;
            };
            if let Some(w) = &v.witness {
                bad.extend(
                    witness_mismatches(&d, mode, w)
                        .into_iter()
                        .map(|b| format!("{name}: {b}")),
                );
                checked += 1;
            }
        }
    }
    ensure(bad.is_empty(), || {
        format!("{} mismatches: {}", bad.len(), bad.join("; "))
    })?;
    Ok(format!("{checked} witnesses replayed, 0 mismatches"))
}

fn lambda_algebra() -> Outcome {
    let bad = lambda_violations(12);
    ensure(bad.is_empty(), || bad.join("; "))?;
    Ok(format!(
        "{} classes with g ≤ 12 checked exhaustively",
        SurfaceClass::all_up_to(12).count()
    ))
}

fn serialization() -> Outcome {
    for seed in 0..1000u64 {
        let d = random_germ(&GeneratorParams::new(seed, 2 + (seed % 11) as usize))
            .map_err(|e| e.to_string())?;
        let text = serialize_germ(&d);
        let back = parse_germ(&text).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(back == d, || {
            format!("seed {seed}: round trip changed the germ")
        })?;
    }
    let mut dots = 0;
    for name in fixture_names() {
        let d = fixture(&name);
        check_dot(&export_dot(&d)).map_err(|e| format!("{name}: {e}"))?;
        dots += 1;
        for mode in [Mode::General, Mode::Klein] {
            if let Ok(v) = decide(&d, mode, &lenient()) {
                if let Some(w) = v.witness {
                    check_dot(&export_dot(&w.diagram))
                        .map_err(|e| format!("{name} witness: {e}"))?;
                    dots += 1;
                }
            }
        }
    }
    Ok(format!(
        "1000 germs round-tripped, {dots} DOT documents well formed"
    ))
}

fn main() {
    let mut germs = Vec::new();
    let mut runs = Vec::new();
    let mut failed = 0;
    let mut report = |n: usize, title: &str, outcome: Outcome| match outcome {
        Ok(detail) => println!("PASS {n}. {title}: {detail}"),
        Err(why) => {
            failed += 1;
            println!("FAIL {n}. {title}: {why}");
        }
    };
    report(1, "path germ extendability", path_germ(&mut germs));
    report(2, "sign-flip rigidity", sign_flips());
    report(3, "loop pattern", loop_pattern(&mut germs));
    report(4, "oracle equivalence", oracle_equivalence(&mut germs));
    report(5, "ledger invariants", ledger_invariants(&germs, &mut runs));
    report(6, "witness replay", witness_replay(&runs));
    report(7, "label algebra round trips", lambda_algebra());
    report(8, "serialization", serialization());
    if failed > 0 {
        println!("{failed} of 8 criteria failed");
        std::process::exit(1);
    }
    println!("all 8 criteria passed");
}
