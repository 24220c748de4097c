use std::path::PathBuf;
use std::process::{Command, Output};

fn cvxlsi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvxlsi")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value(text: &str, key: &str) -> f64 {
    let prefix = format!("{key} = ");
    text.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no {key} in\n{text}"))
        .parse()
        .unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("cvxlsi-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn gaussian_criterion_passes() {
    let o = cvxlsi(&["check-criterion", "family", "gaussian", "0", "1", "cost", "quadratic", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let s = stdout(&o);
    assert!(s.contains("verdict = pass"));
    assert!(value(&s, "b_best") > 0.1);
    assert!(s.contains("[table modulus]"));
}

#[test]
fn exponential_criterion_fails() {
    let o = cvxlsi(&["check-criterion", "family", "symmetric-exponential", "cost", "quadratic", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn chain_b_to_c() {
    let o = cvxlsi(&["chain", "b_to_c", "--b", "1", "--t0", "1", "--cost", "quadratic"]);
    assert_eq!(o.status.code(), Some(0));
    let c = value(&stdout(&o), "c");
    assert!((c - 210.0 * 3f64.sqrt()).abs() < 1e-9, "{c}");
}

#[test]
fn chain_c_to_a_uses_declared_scaling() {
    let o = cvxlsi(&["chain", "c_to_a", "--c", "4"]);
    assert!((value(&stdout(&o), "a") - 0.25).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(cvxlsi(&["check-criterion", "family", "cauchy"]).status.code(), Some(2));
    assert_eq!(cvxlsi(&["lsi-test", "family", "gaussian"]).status.code(), Some(2));
    assert_eq!(cvxlsi(&["concentration", "family", "gaussian"]).status.code(), Some(2));
    assert_eq!(cvxlsi(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(cvxlsi(&["check-criterion", "atom", "0", "0.5", "atom", "1", "0.4"]).status.code(), Some(2));
}

#[test]
fn divergence_exits_three() {
    // the exponential moment of order 2c·L is infinite for the continuous exponential measure
    let o = cvxlsi(&["lsi-test", "family", "symmetric-exponential", "--c", "2"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn config_file_and_negative_numbers() {
    let d = scratch("config");
    let cfg = d.join("m.txt");
    std::fs::write(&cfg, "# two atoms\natom -1 0.5\natom 1 0.5\ncost quadratic 1\n").unwrap();
    let o = cvxlsi(&["check-criterion", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    // two atoms at distance 2: the ratio at h → 0⁺ is θ⁻¹(1)/2
    assert!((value(&stdout(&o), "b_best") - 0.5).abs() < 1e-9);
}

#[test]
fn reports_are_reproducible() {
    let (a, b) = (scratch("rep-a"), scratch("rep-b"));
    for d in [&a, &b] {
        let o = cvxlsi(&[
            "concentration",
            "family",
            "gaussian",
            "--dim",
            "3",
            "--samples",
            "10000",
            "--seed",
            "5",
            "--out",
            d.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    let read = |d: &PathBuf, f: &str| std::fs::read(d.join(f)).unwrap();
    for f in ["two-sided-concentration.txt", "two-sided-concentration.tails-norm.csv"] {
        assert_eq!(read(&a, f), read(&b, f), "{f}");
    }
}

#[test]
fn weak_ot_prints_kernel_and_verification() {
    let o = cvxlsi(&["weak-ot", "atom", "0", "0.5", "atom", "1", "0.5", "--target", "atom", "0.5", "1", "--seed", "1"]);
    let s = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{s}");
    assert!((value(&s, "value") - 0.25).abs() < 1e-12);
    assert!(s.contains("[table kernel]"));
    assert!(s.contains("check = weak-transport-minus"));
}

#[test]
fn infconv_of_a_table() {
    let d = scratch("infconv");
    let t = d.join("f.csv");
    let mut text = String::from("x,f\n");
    for i in -100..=100 {
        let x = i as f64 / 10.0;
        text.push_str(&format!("{x},{}\n", x * x));
    }
    std::fs::write(&t, text).unwrap();
    let o = cvxlsi(&["infconv", "--table", t.to_str().unwrap(), "--t", "1", "--residual"]);
    let s = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{s}");
    // Q₁ of x² under the cost t² is x²/2
    assert!(s.contains("\n2,4,2\n"), "{s}");
    // the table is the piecewise-linear interpolant of x², so the residual is
    // the interpolation error spacing²/4
    assert!(value(&s, "residual_max") <= 0.1f64.powi(2) / 4.0 + 1e-6);
}

#[test]
fn inequality_sweeps() {
    let o = cvxlsi(&["lsi-test", "family", "gaussian", "0", "1", "--c", "1.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!((value(&stdout(&o), "ratio") - 8.0 / 9.0).abs() < 1e-3);
    let o = cvxlsi(&["lsi-test", "family", "gaussian", "0", "1", "--c", "1.3"]);
    assert_eq!(o.status.code(), Some(1));
    let o = cvxlsi(&["dual-ic", "family", "uniform", "0", "1", "cost", "thetaD", "1", "--mode", "two-sided"]);
    assert_eq!(o.status.code(), Some(0));
    let o = cvxlsi(&["poincare", "atom", "0", "0.5", "atom", "1", "0.5", "--a", "0.9"]);
    assert_eq!(o.status.code(), Some(0));
    let o = cvxlsi(&["poincare", "atom", "0", "0.5", "atom", "1", "0.5", "--a", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
}
