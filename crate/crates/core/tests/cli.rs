mod support;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use support::{fixture, wav};

const HEADER: &str = "[object]\nname = Mixed\ndate = 2001-06-15\nsource = Local\n";

fn dtd() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../assets/mlfd.dtd")
}

fn mlfd(args: &[&Path]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mlfd"))
        .args(args)
        .output()
        .unwrap()
}

fn integrate(dir: &Path, manifest: &str) -> (Output, PathBuf) {
    let m = dir.join("m.manifest");
    fs::write(&m, manifest).unwrap();
    let out = dir.join("out.xml");
    let o = mlfd(&[
        Path::new("integrate"),
        Path::new("--manifest"),
        &m,
        Path::new("--dtd"),
        &dtd(),
        Path::new("--out"),
        &out,
    ]);
    (o, out)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn mixed_object_integrates_validates_and_inspects() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::copy(fixture("scissors.bmp"), d.join("scissors.bmp")).unwrap();
    fs::write(d.join("notes.txt"), "two\nlines\n").unwrap();
    fs::write(
        d.join("people.csv"),
        "id,name,born\n1,Ann,1970-01-02\n2,,1981-03-04\n",
    )
    .unwrap();
    fs::write(d.join("tone.wav"), wav(8000, 1, 8, 16000)).unwrap();
    let manifest = format!(
        "{HEADER}\
         [subdocument]\nlocation = scissors.bmp\nkeywords = scissors\n\
         [subdocument]\nlocation = notes.txt\nlanguage = English\n\
         [subdocument]\nlocation = people.csv\nquery = SELECT * FROM people\n\
         [subdocument]\nlocation = tone.wav\n\
         [subdocument]\nlocation = intro.mp4\nkind = video\nduration = 12.5\nspeed = 25\n"
    );
    fs::write(d.join("intro.mp4"), b"\0\0\0\x18ftypmp42").unwrap();
    let (o, out) = integrate(d, &manifest);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(o.stderr.is_empty());

    let xml = fs::read_to_string(&out).unwrap();
    assert!(xml.starts_with("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!DOCTYPE COMPLEX_OBJECT SYSTEM \"mlfd.dtd\">\n"));
    assert!(xml.contains("<DURATION>2.000 s</DURATION>"));
    assert!(xml.contains("<SPEED>8000 Hz</SPEED>"));
    assert!(xml.contains("<VIDEO>intro.mp4</VIDEO>"));
    assert!(xml.contains("<VALUE></VALUE>"));
    assert!(xml.contains("<DOMAIN>date</DOMAIN>"));

    let v = mlfd(&[Path::new("validate"), Path::new("--dtd"), &dtd(), &out]);
    assert_eq!(v.status.code(), Some(0));
    assert!(v.stdout.is_empty() && v.stderr.is_empty());

    let i = mlfd(&[Path::new("inspect"), &out]);
    assert_eq!(i.status.code(), Some(0));
    let lines: Vec<String> = stdout(&i).lines().map(str::to_string).collect();
    assert_eq!(
        lines,
        [
            "scissors.bmp  Image  24694 Bytes  1 keywords  image",
            "notes.txt  Text  10 Bytes  0 keywords  plain-text",
            "people.csv  View  44 Bytes  0 keywords  relational-view",
            "tone.wav  Sound  16044 Bytes  0 keywords  sound",
            "intro.mp4  Video  12 Bytes  0 keywords  video",
        ]
    );
}

#[test]
fn inspect_tagged_text_document() {
    let dir = tempfile::tempdir().unwrap();
    let doc = dir.path().join("fig.xml");
    fs::write(
        &doc,
        "<?xml version=\"1.0\"?>\n<COMPLEX_OBJECT><OBJ_NAME>Reuters Press Release</OBJ_NAME>\
         <DATE>2001-05-15</DATE><SOURCE>Reuters</SOURCE><SUBDOCUMENT><DOC_NAME>SGMLdoc</DOC_NAME>\
         <TYPE>SGML</TYPE><SIZE>820 Bytes</SIZE><LOCATION>SGMLfile.sgml</LOCATION>\
         <LANGUAGE>English</LANGUAGE><KEYWORD>France</KEYWORD><KEYWORD>SNCF</KEYWORD>\
         <TEXT><NB_CHAR>790</NB_CHAR><NB_LINES>12</NB_LINES><TAGGED_TEXT>\
         <CONTENT><![CDATA[<REUTERS/>]]></CONTENT></TAGGED_TEXT></TEXT></SUBDOCUMENT></COMPLEX_OBJECT>\n",
    )
    .unwrap();
    let i = mlfd(&[Path::new("inspect"), &doc]);
    assert_eq!(i.status.code(), Some(0));
    assert_eq!(
        stdout(&i),
        "SGMLdoc  SGML  820 Bytes  2 keywords  tagged-text\n"
    );
}

#[test]
fn removed_doc_name_is_one_missing_child() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::copy(fixture("scissors.bmp"), d.join("scissors.bmp")).unwrap();
    let (o, out) = integrate(
        d,
        &format!("{HEADER}[subdocument]\nlocation = scissors.bmp\n"),
    );
    assert_eq!(o.status.code(), Some(0));
    let xml = fs::read_to_string(&out)
        .unwrap()
        .replace("    <DOC_NAME>scissors.bmp</DOC_NAME>\n", "");
    fs::write(&out, xml).unwrap();

    let v = mlfd(&[Path::new("validate"), Path::new("--dtd"), &dtd(), &out]);
    assert_eq!(v.status.code(), Some(4));
    let report = stdout(&v);
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines.len(), 1, "{report}");
    assert!(
        lines[0].starts_with("COMPLEX_OBJECT/SUBDOCUMENT[0]\tMissingChild\t"),
        "{report}"
    );
}

#[test]
fn missing_source_names_the_location() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = integrate(
        dir.path(),
        &format!("{HEADER}[subdocument]\nlocation = gone.txt\n"),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gone.txt"));
    assert!(!out.exists());
}

#[test]
fn usage_errors_exit_one() {
    let o = mlfd(&[Path::new("integrate")]);
    assert_eq!(o.status.code(), Some(1));
    let o = mlfd(&[Path::new("--help")]);
    assert_eq!(o.status.code(), Some(0));
}
