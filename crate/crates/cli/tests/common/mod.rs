//! Fixtures and process helpers shared by the CLI integration tests.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

/// Three annotated sentences; enough for every scheme to produce units.
pub const CONLLU: &str = "\
1\tyou\tyou\tPRON\t_\t_\t3\tnsubj\t_\t_
2\tare\tbe\tAUX\t_\t_\t3\tcop\t_\t_
3\tkind\tkind\tADJ\t_\t_\t0\troot\t_\t_

1\tyou\tyou\tPRON\t_\t_\t3\tnsubj\t_\t_
2\tare\tbe\tAUX\t_\t_\t3\tcop\t_\t_
3\tstupid\tstupid\tADJ\t_\t_\t0\troot\t_\t_

1\tdogs\tdog\tNOUN\t_\t_\t2\tnsubj\t_\t_
2\trun\trun\tVERB\t_\t_\t0\troot\t_\t_
3\tfast\tfast\tADV\t_\t_\t2\tadvmod\t_\t_
";

/// Ten raw-text documents, balanced so 2-fold CV is well posed.
pub const CSV: &str = "\
id,text,label
d1,you are kind,0
d2,you are stupid idiot,1
d3,dogs run fast,0
d4,what a moron idiot,1
d5,have a nice day,0
d6,total loser jerk,1
d7,the sun is bright,0
d8,you stupid fool,1
d9,water is wet,0
d10,ugly stupid creep,1
";

pub fn write(dir: &Path, name: &str, contents: &str) {
    fs::write(dir.join(name), contents).expect("write fixture");
}

/// Run the binary inside `dir` so relative manifest paths resolve there.
pub fn lingemb(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lingemb"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn lingemb")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// A manifest over the fixture corpus/dataset with fast settings.
pub fn base_config() -> String {
    r#"{
  "corpus": "corpus.conllu",
  "dataset": "data.csv",
  "out_dir": "out",
  "schemes": ["TOK"],
  "models": ["SVM"],
  "conditions": ["adhoc"],
  "folds": 2,
  "seed": 7,
  "train": {"d": 8, "epochs": 2, "min_count": 1, "subsample_t": 0}
}
"#
    .to_string()
}

pub fn setup(dir: &Path) {
    write(dir, "corpus.conllu", CONLLU);
    write(dir, "data.csv", CSV);
    write(dir, "cfg.json", &base_config());
}
