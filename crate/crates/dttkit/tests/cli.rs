//! The command-line front end, driven in-process through `cli::run`.

use dttkit::cli::{fmt_sig17, parse_sizes, run, EXIT_FAILURE, EXIT_OK, EXIT_USAGE};
use dttkit::formula::Formula;
use dttkit::reference::{real_matrix, TransformId};

struct Outcome {
    code: i32,
    out: String,
    err: String,
}

fn dttkit(args: &str, stdin: &str) -> Outcome {
    let argv = std::iter::once("dttkit").chain(args.split_whitespace());
    let mut input = stdin.as_bytes();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut input, &mut out, &mut err);
    Outcome {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn numbers(s: &str) -> Vec<f64> {
    s.lines().map(|l| l.trim().parse().unwrap()).collect()
}

#[test]
fn verify_examples() {
    let r = dttkit("verify dct2 2..64 --strategy radix2-where-possible", "");
    assert_eq!(r.code, EXIT_OK, "{}{}", r.out, r.err);
    assert_eq!(r.out.lines().filter(|l| l.starts_with("pass")).count(), 63);

    let r = dttkit("verify dct3 5", "");
    assert_eq!(r.code, EXIT_OK);
    assert!(
        r.out.contains("(12, 6, 1)") && r.out.contains("base"),
        "{}",
        r.out
    );

    let r = dttkit("verify dct7 11 --strategy fact", "");
    assert_eq!(r.code, EXIT_OK);
    assert!(r.out.contains("fact-V"), "{}", r.out);

    let r = dttkit("verify dct3 8 --r 1/3 --seed 9", "");
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
}

#[test]
fn cost_examples() {
    let r = dttkit("cost dct3 2 4 8 16 32", "");
    assert_eq!(r.code, EXIT_OK);
    let totals: Vec<&str> = r
        .out
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().nth_back(2).unwrap())
        .collect();
    assert_eq!(totals, ["3", "13", "41", "113", "289"]);

    let r = dttkit("cost dct4 8 --csv", "");
    // The quoted trace may contain commas, so read the numeric tail backwards.
    let line = r.out.lines().nth(1).unwrap();
    assert!(line.starts_with("dct4,8,"), "{line}");
    let tail: Vec<&str> = line.rsplit(',').take(3).collect();
    assert_eq!(tail, ["+0", "56", "56"]);

    let r = dttkit("cost dct3 9 27 --csv", "");
    let closed: Vec<&str> = r
        .out
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').nth(1).unwrap())
        .collect();
    assert_eq!(closed, ["48", "246"]);
}

#[test]
fn apply_examples() {
    let r = dttkit("apply dct2 2", "1\n1\n");
    assert_eq!((r.code, numbers(&r.out)), (EXIT_OK, vec![2.0, 0.0]));
    let r = dttkit("apply dct1 2", "1\n0\n");
    assert_eq!(numbers(&r.out), vec![1.0, 1.0]);
    let r = dttkit("apply dst1 1", "1\n");
    assert_eq!(numbers(&r.out), vec![1.0]);

    let r = dttkit("apply dct2 2", "1\n");
    assert_eq!(r.code, EXIT_FAILURE);
    assert!(r.err.contains("needs 2"), "{}", r.err);
}

#[test]
fn apply_reads_a_file() {
    let path = std::env::temp_dir().join(format!("dttkit-cli-{}.txt", std::process::id()));
    std::fs::write(&path, "1\n2\n3\n4\n").unwrap();
    let r = dttkit(&format!("apply dct2 4 {}", path.display()), "");
    std::fs::remove_file(&path).unwrap();
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let m = real_matrix(&TransformId::dct(2, 4)).unwrap();
    let want = m * nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
    for (a, b) in numbers(&r.out).iter().zip(want.iter()) {
        assert!((a - b).abs() < 1e-13);
    }
}

#[test]
fn export_examples() {
    let r = dttkit("export dct2 4 --dense", "");
    assert_eq!(r.code, EXIT_OK);
    let m = real_matrix(&TransformId::dct(2, 4)).unwrap();
    let rows: Vec<Vec<f64>> = r
        .out
        .lines()
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            assert!((v - m[(i, j)]).abs() < 1e-15, "{v} vs {}", m[(i, j)]);
        }
    }

    let r = dttkit("export dct3 8 --plan", "");
    assert_eq!(r.code, EXIT_OK);
    assert!(
        r.out.contains("DCT-3_4(1/4)") && r.out.contains("DCT-3_4(3/4)"),
        "{}",
        r.out
    );
    assert!(r.out.lines().count() > 10);

    let r = dttkit("export dct2 4", "");
    assert_eq!(r.code, EXIT_USAGE);
}

#[test]
fn formula_round_trip_matches_direct_apply() {
    for (spec, n) in [
        ("dct2", 4usize),
        ("dct3", 9),
        ("dst7", 11),
        ("dct4:poly", 8),
        ("idct3", 6),
    ] {
        let exported = dttkit(&format!("export {spec} {n} --formula"), "");
        assert_eq!(exported.code, EXIT_OK, "{spec}: {}", exported.err);
        let f = Formula::<f64>::parse_sexpr(exported.out.trim()).unwrap();
        assert_eq!(f.to_sexpr(), exported.out.trim());

        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let stdin: String = x.iter().map(|v| format!("{}\n", fmt_sig17(*v))).collect();
        let direct = dttkit(&format!("apply {spec} {n}"), &stdin);
        assert_eq!(direct.code, EXIT_OK);
        let reparsed: Vec<f64> = stdin.lines().map(|l| l.parse().unwrap()).collect();
        let via_file: String = f
            .apply(&reparsed)
            .unwrap()
            .iter()
            .map(|v| format!("{}\n", fmt_sig17(*v)))
            .collect();
        assert_eq!(direct.out, via_file, "{spec} {n}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(dttkit("verify bogus 4", "").code, EXIT_USAGE);
    assert_eq!(dttkit("verify dct3 0", "").code, EXIT_USAGE);
    assert_eq!(
        dttkit("verify dct3 4 --strategy fastest", "").code,
        EXIT_USAGE
    );
    assert_eq!(dttkit("verify dct3 4 --r 3/2", "").code, EXIT_USAGE);
    assert_eq!(dttkit("verify dct2 4 --r 1/3", "").code, EXIT_USAGE);
    assert_eq!(dttkit("frobnicate", "").code, EXIT_USAGE);
    assert_eq!(dttkit("verify dct3 5000", "").code, EXIT_FAILURE);
    assert_eq!(dttkit("--help", "").code, EXIT_OK);
}

#[test]
fn size_lists() {
    let s = |v: &[&str]| parse_sizes(&v.iter().map(|s| s.to_string()).collect::<Vec<_>>());
    assert_eq!(s(&["2..4", "8"]).unwrap(), vec![2, 3, 4, 8]);
    assert_eq!(s(&["2,3", "5..=6"]).unwrap(), vec![2, 3, 5, 6]);
    assert!(s(&["4..2"]).is_err());
    assert!(s(&["x"]).is_err());
}

#[test]
fn seventeen_significant_digits() {
    assert_eq!(fmt_sig17(2.0), "2");
    assert_eq!(fmt_sig17(0.0), "0");
    let v = std::f64::consts::FRAC_1_SQRT_2;
    assert_eq!(fmt_sig17(v).parse::<f64>().unwrap(), v);
}
