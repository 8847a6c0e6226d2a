use dcdistance::textprep::porter_stem;

fn check(path: &str) -> (usize, Vec<String>) {
    let data = std::fs::read_to_string(path).unwrap();
    let mut n = 0;
    let mut bad = Vec::new();
    for line in data.lines() {
        let (word, expected) = line.split_once('\t').unwrap();
        n += 1;
        let got = porter_stem(word);
        if got != expected {
            bad.push(format!("{word}: expected {expected}, got {got}"));
        }
    }
    (n, bad)
}

#[test]
fn agrees_with_reference_vocabulary() {
    let (n, bad) = check(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/data/porter_reference.tsv"
    ));
    assert!(n >= 1000);
    assert!(
        bad.is_empty(),
        "{} mismatches: {:?}",
        bad.len(),
        &bad[..bad.len().min(20)]
    );
}
