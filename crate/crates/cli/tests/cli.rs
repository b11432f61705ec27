use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tweetpulse")).args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_geonames(dir: &Path) {
    fs::create_dir_all(dir).unwrap();
    fs::write(dir.join("countryInfo.txt"), "#ISO\tISO3\tnum\tfips\tCountry\nFR\tFRA\t250\tFR\tFrance\n").unwrap();
    fs::write(dir.join("admin1CodesASCII.txt"), "FR.11\tÎle-de-France\tIle-de-France\t3012874\n").unwrap();
    fs::write(
        dir.join("cities15000.txt"),
        "1\tParis\tParis\t\t48.85\t2.35\tP\tPPLC\tFR\t\t11\t\t\t\t2138551\t\t42\tEurope/Paris\t2020-01-01\n",
    )
    .unwrap();
}

#[test]
fn missing_input_file_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["tag", "--tweets", p(&dir.path().join("nope.jsonl")), "--output", p(dir.path())]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    assert!(stderr(&out).contains("nope.jsonl"));
}

#[test]
fn missing_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["score", "--output", p(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("tweets"), "{}", stderr(&out));
}

#[test]
fn bad_config_and_arguments_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "sample_size = \"lots\"\n").unwrap();
    assert_eq!(run(&["run", "--config", p(&cfg)]).status.code(), Some(2));

    fs::write(&cfg, "no_such_key = 1\n").unwrap();
    assert_eq!(run(&["run", "--config", p(&cfg)]).status.code(), Some(2));

    assert_eq!(run(&["run", "--start", "2020-06-30", "--end", "2020-03-01"]).status.code(), Some(2));
    assert_eq!(run(&["run", "--start", "yesterday"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["run", "--config", p(&dir.path().join("absent.toml"))]).status.code(), Some(1));
}

#[test]
fn malformed_dump_exits_2_and_names_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let geo = dir.path().join("geo");
    write_geonames(&geo);
    fs::write(geo.join("cities15000.txt"), "1\tParis\n").unwrap();
    let out = run(&["build-lexicon", "--geonames-dir", p(&geo), "--output", p(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cities15000.txt"), "{}", stderr(&out));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let geo = dir.path().join("geo");
    write_geonames(&geo);
    let cfg = dir.path().join("c.toml");
    fs::write(
        &cfg,
        format!("geonames_dir = {:?}\noutput = {:?}\ncountries = [\"FR\"]\n", p(&geo), p(&dir.path().join("from-config"))),
    )
    .unwrap();
    let flag_out = dir.path().join("from-flag");
    let out = run(&["build-lexicon", "--config", p(&cfg), "--output", p(&flag_out)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(flag_out.join("lexicon.tsv").exists());
    assert!(!dir.path().join("from-config").exists());
    let summary = stderr(&out);
    assert!(summary.contains("3 entries"), "{summary}");
    assert!(summary.contains("country=1, admin1=1, city=1"), "{summary}");
    // Data goes to files only.
    assert!(out.stdout.is_empty());
}

#[test]
fn tag_writes_one_json_row_per_tweet() {
    let dir = tempfile::tempdir().unwrap();
    let geo = dir.path().join("geo");
    write_geonames(&geo);
    let tweets = dir.path().join("t.jsonl");
    fs::write(
        &tweets,
        concat!(
            r#"{"id":"a","created_at":"2020-03-24T10:00:00Z","text":"Covid in #Paris"}"#,
            "\n",
            r#"{"id":"b","created_at":"2020-03-24T10:00:00Z","text":"nothing here"}"#,
            "\n",
        ),
    )
    .unwrap();
    let out = run(&["tag", "--tweets", p(&tweets), "--geonames-dir", p(&geo), "--output", p(dir.path())]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows: Vec<serde_json::Value> = fs::read_to_string(dir.path().join("tags.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["countries"], serde_json::json!(["FR"]));
    assert_eq!(rows[0]["tags"][0]["original_span"], serde_json::json!({"start": 10, "end": 15}));
    assert_eq!(rows[1]["countries"], serde_json::json!([]));
}
