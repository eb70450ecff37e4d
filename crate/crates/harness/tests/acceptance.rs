//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::Rng;

use qsmpc_core::channel::AdversaryModel;
use qsmpc_core::mpsi::{run_mpsi, MpsiPublicParams, PartyInput, UDegree};
use qsmpc_core::ole::{run_ole, EdgeAdversaries, OleFunction, OleSessionConfig};
use qsmpc_core::qotp::{keygen, qotp_decrypt, qotp_encrypt};
use qsmpc_core::qubit::QubitState;
use qsmpc_core::ring::{Modulus, Polynomial};
use qsmpc_core::SeededRng;
use qsmpc_harness::experiments::{
    a2_uniformity, attack_curve, comm_audit, execute, hadamard_guess_rate, l_uniformity,
    run_scenario, MpsiSpec, OutputTarget,
};
use qsmpc_harness::fixture::replay_toy;
use qsmpc_harness::report::Body;
use qsmpc_harness::Scenario;

const SEED: u64 = 20_260_101;
const P31: u64 = 2_147_483_647;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    if let Some(limit) = limit {
        if took > limit {
            o.passed = false;
        }
        o.detail = format!("{} ({:.2?}, limit {:.0?})", o.detail, took, limit);
    } else {
        o.detail = format!("{} ({:.2?})", o.detail, took);
    }
    o
}

fn toy_fidelity() -> Outcome {
    let r = replay_toy();
    let Body::Replay {
        steps,
        first_divergence,
    } = &r.body
    else {
        return outcome(false, "unexpected report body");
    };
    let want = [
        ("S' = QOTP_KB(S)", "0 -1 0 -1 0 0"),
        ("S'' with decoys", "0 + -1 0 0 - -1 0 0 0"),
        ("d'g' = QOTP_KA(dg)", "1 0 1 0 1 0"),
        ("l = alpha - d", "2"),
        ("V(x) = f(x + l) + S(x)", "5 0"),
        ("output = V(d) - g", "3"),
    ];
    let pinned = want.iter().all(|(step, value)| {
        steps
            .iter()
            .any(|s| s.step == *step && s.actual == *value && s.matched)
    });
    outcome(
        r.passed && pinned,
        match first_divergence {
            None => format!("{} steps match, output 3", steps.len()),
            Some(s) => format!("diverged at {s}"),
        },
    )
}

fn ole_correctness() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for p in [2u64, 8, 101, 65521, P31] {
        let m = Modulus::new(p).unwrap();
        let mut rng = SeededRng::new(SEED).derive(&[p]);
        let (mut wrong, mut aborts) = (0, 0);
        for t in 0..1000u64 {
            let (a, b, x) = (
                rng.random_range(0..p),
                rng.random_range(0..p),
                rng.random_range(0..p),
            );
            let f = OleFunction::new(m.reduce(a), m.reduce(b)).unwrap();
            let cfg = OleSessionConfig::generate(m, 16, 0.0, SEED ^ (p << 20) ^ t);
            let tr = run_ole(&f, m.reduce(x), &cfg, &EdgeAdversaries::honest()).unwrap();
            let want = ((a as u128 * x as u128 + b as u128) % p as u128) as u64;
            match tr.output {
                Some(v) if v == want => {}
                Some(_) => wrong += 1,
                None => aborts += 1,
            }
        }
        ok &= wrong == 0 && aborts == 0;
        details.push(format!("p={p}: {wrong} wrong, {aborts} aborts"));
    }
    outcome(ok, details.join("; "))
}

fn qotp_identity() -> Outcome {
    let mut rng = SeededRng::new(SEED).derive(&[3]);
    let mut failures = 0;
    for _ in 0..1000 {
        let len = rng.random_range(1..=32);
        let msg: Vec<QubitState> = (0..len)
            .map(|_| QubitState::basis_state(rng.random()))
            .collect();
        let key = keygen(len, &mut rng).unwrap();
        let back = qotp_decrypt(&qotp_encrypt(&msg, &key).unwrap(), &key).unwrap();
        if back
            .iter()
            .zip(&msg)
            .any(|(a, b)| a.amp0() != b.amp0() || a.amp1() != b.amp1())
        {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!("{failures} of 1000 messages altered"),
    )
}

fn detection_law() -> Outcome {
    let mut ok = true;
    let mut details = Vec::new();
    for model in [
        AdversaryModel::InterceptResend,
        AdversaryModel::EntangleMeasure,
    ] {
        let r = attack_curve(model, &[1, 2, 4, 8, 16], 10_000, SEED).unwrap();
        let Body::AttackCurve { rows, .. } = &r.body else {
            unreachable!()
        };
        let rows_ok = rows.iter().all(|row| row.detection.within);
        let d16 = rows.iter().find(|row| row.delta == 16).unwrap();
        ok &= rows_ok && d16.detection.frequency >= 0.98;
        details.push(format!(
            "{model:?}: {}",
            rows.iter()
                .map(|row| format!("d={} {:.4}", row.delta, row.detection.frequency))
                .collect::<Vec<_>>()
                .join(", ")
        ));
    }
    outcome(ok, details.join("; "))
}

fn guess_rate() -> Outcome {
    let g = hadamard_guess_rate(AdversaryModel::EntangleMeasure, 10_000, SEED);
    outcome(
        g.within,
        format!("{:.4} in [{:.4}, {:.4}]", g.frequency, g.lower, g.upper),
    )
}

fn brute_force(sets: &[BTreeSet<u64>]) -> BTreeSet<u64> {
    sets[0]
        .iter()
        .copied()
        .filter(|x| sets.iter().all(|s| s.contains(x)))
        .collect()
}

fn random_instance(rng: &mut SeededRng, m: usize, n: usize, range: u64) -> Vec<BTreeSet<u64>> {
    (0..m)
        .map(|_| {
            let mut s = BTreeSet::new();
            while s.len() < n {
                s.insert(rng.random_range(0..range));
            }
            s
        })
        .collect()
}

fn inputs(sets: &[BTreeSet<u64>]) -> Vec<PartyInput> {
    sets.iter()
        .enumerate()
        .map(|(k, s)| PartyInput::new(k + 1, s.iter().copied()))
        .collect()
}

fn mpsi_oracle() -> Outcome {
    let modulus = Modulus::prime(P31).unwrap();
    let mut rng = SeededRng::new(SEED).derive(&[6]);
    let (mut mismatches, mut bad_counts, mut nonempty) = (0, 0, 0);
    for t in 0..200u64 {
        let m = rng.random_range(2..=5);
        let n = rng.random_range(1..=8);
        // A narrow range makes intersections common.
        let sets = random_instance(&mut rng, m, n, 2 * n as u64 + 2);
        let params = MpsiPublicParams::new(modulus, m, n).unwrap();
        let res = run_mpsi(
            &inputs(&sets),
            &params,
            &EdgeAdversaries::honest(),
            SEED + t,
        )
        .unwrap();
        let want = brute_force(&sets);
        nonempty += usize::from(!want.is_empty());
        mismatches += usize::from(res.intersection != want);
        bad_counts += usize::from(res.sessions != (m - 1) * (3 * n + 1));
    }
    outcome(
        mismatches == 0 && bad_counts == 0,
        format!(
            "200 instances ({nonempty} with non-empty intersection): {mismatches} mismatches, {bad_counts} wrong session counts"
        ),
    )
}

fn p_cap_identity() -> Outcome {
    let mut rng = SeededRng::new(SEED).derive(&[7]);
    let mut failures = 0;
    let mut runs = 0;
    for &p in &[11u64, 13, 31, 53, 101] {
        for _ in 0..10 {
            let max_n = ((p - 2) / 3).min(5) as usize;
            let n = rng.random_range(1..=max_n);
            let m = rng.random_range(2..=5);
            let sets = random_instance(&mut rng, m, n, p);
            let params = MpsiPublicParams::new(Modulus::prime(p).unwrap(), m, n).unwrap();
            let res = run_mpsi(
                &inputs(&sets),
                &params,
                &EdgeAdversaries::honest(),
                rng.random(),
            )
            .unwrap();
            let mk = &res.masks;
            let mut direct: Polynomial = mk[0].set_poly.mul(&mk[0].own_mask).unwrap();
            for j in 1..m {
                let term = mk[j]
                    .set_poly
                    .mul(&mk[j].own_mask)
                    .unwrap()
                    .mul(&mk[j - 1].link_mask)
                    .unwrap();
                direct = direct.add(&term).unwrap();
            }
            runs += 1;
            failures += usize::from(direct.coeffs() != res.p_cap.coeffs());
        }
    }
    outcome(
        failures == 0,
        format!("{failures} of {runs} instances differ"),
    )
}

fn comm_constants() -> Outcome {
    let r = comm_audit(&[257, 65537], 4, 3, 16, SEED).unwrap();
    let Body::CommAudit {
        ole,
        fit_width,
        fit_sessions,
        ..
    } = &r.body
    else {
        unreachable!()
    };
    let exact = ole
        .iter()
        .all(|row| row.payload_qubits == 7 * row.width as u64)
        && ole.iter().map(|row| row.payload_qubits).collect::<Vec<_>>() == [63, 119];
    outcome(
        r.passed && exact,
        format!(
            "payload {:?}; width fit residual {:.2e}, session fit residual {:.2e}",
            ole.iter()
                .map(|row| (row.modulus, row.payload_qubits))
                .collect::<Vec<_>>(),
            fit_width.max_relative_residual,
            fit_sessions.max_relative_residual
        ),
    )
}

fn privacy() -> Outcome {
    let l = l_uniformity(8, 4, 10_000, SEED).unwrap();
    let spec = MpsiSpec {
        modulus: Modulus::prime(11).unwrap(),
        sets: vec![vec![1], vec![1], vec![2]],
        points: None,
        u_degree: UDegree::Secure,
        delta: 16,
        threshold: 0.0,
        adversaries: EdgeAdversaries::honest(),
    };
    let a2 = a2_uniformity(&spec, 2_500, SEED).unwrap();
    outcome(
        l.passed && a2.passed,
        format!(
            "l at p=8: chi2={:.2} p={:.3}; A2 values at p=11: chi2={:.2} p={:.3} over {} samples",
            l.statistic, l.p_value, a2.statistic, a2.p_value, a2.samples
        ),
    )
}

fn determinism() -> Outcome {
    let mut same = Vec::new();
    same.push((
        "replay-toy",
        replay_toy().to_json() == replay_toy().to_json(),
    ));
    let curve = || {
        attack_curve(AdversaryModel::EntangleMeasure, &[1, 4, 16], 2_000, SEED)
            .unwrap()
            .to_json()
    };
    same.push(("attack-curve", curve() == curve()));
    let audit = || comm_audit(&[257, 65537], 3, 2, 16, SEED).unwrap().to_json();
    same.push(("comm-audit", audit() == audit()));

    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [
        (
            "ole",
            r#"{"protocol":"ole","modulus":65521,"trials":300,"seed":9,
                "adversaries":{"alice_bob":"intercept_resend"},"delta":3}"#,
        ),
        (
            "mpsi",
            r#"{"protocol":"mpsi","modulus":101,"sets":[[1,2,3],[2,3,4],[3,4,5]],"trials":20,"seed":9}"#,
        ),
    ] {
        let s = Scenario::from_json(text).unwrap();
        let files = |tag: &str| {
            let t = OutputTarget {
                report: dir.path().join(format!("{name}-{tag}.json")),
                transcript: dir.path().join(format!("{name}-{tag}.jsonl")),
            };
            run_scenario(&s, &t).unwrap();
            (
                std::fs::read(&t.report).unwrap(),
                std::fs::read(&t.transcript).unwrap(),
            )
        };
        same.push((
            name,
            files("a") == files("b") && execute(&s).unwrap() == execute(&s).unwrap(),
        ));
    }
    outcome(
        same.iter().all(|(_, s)| *s),
        same.iter()
            .map(|(n, s)| format!("{n}: {}", if *s { "identical" } else { "DIFFERS" }))
            .collect::<Vec<_>>()
            .join(", "),
    )
}

type Criterion = (&'static str, Option<Duration>, fn() -> Outcome);

fn main() {
    let criteria: Vec<Criterion> = vec![
        (
            "1 toy-example fidelity",
            Some(Duration::from_secs(1)),
            toy_fidelity,
        ),
        (
            "2 OLE correctness",
            Some(Duration::from_secs(30)),
            ole_correctness,
        ),
        ("3 QOTP identity", None, qotp_identity),
        (
            "4 detection law",
            Some(Duration::from_secs(120)),
            detection_law,
        ),
        ("5 entangle-measure guess rate", None, guess_rate),
        (
            "6 MPSI oracle equivalence",
            Some(Duration::from_secs(300)),
            mpsi_oracle,
        ),
        ("7 intersection-polynomial identity", None, p_cap_identity),
        ("8 communication constants", None, comm_constants),
        ("9 privacy smoke tests", None, privacy),
        ("10 determinism", None, determinism),
    ];
    let mut failed = 0;
    for (name, limit, run) in criteria {
        let o = timed(limit, run);
        println!(
            "{} criterion {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.passed);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
