use std::path::PathBuf;

use beliefcheck::driver::verify_checked;
use beliefcheck::entail::is_empty_atom;
use beliefcheck::{check_source, normalize, DischargeResult, Goal, Options};

fn corpus() -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "swl"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&p).unwrap())
        })
        .collect()
}

/// (file, function, conjunct) triples whose removal must break verification,
/// and whether it did.
fn mutants() -> Vec<(String, String, String, bool)> {
    let opts = Options::default();
    let mut out = Vec::new();
    for (file, src) in corpus() {
        let program = check_source(&src).unwrap();
        let v = verify_checked(&file, &src, program.clone(), &opts);
        if !v.report.passed() {
            continue;
        }
        for (fi, f) in program.functions.iter().enumerate() {
            let mut used = Vec::new();
            let mut rooted_use = false;
            for (vc, r) in v.vcs.iter().zip(&v.results) {
                if vc.function != f.name {
                    continue;
                }
                if let DischargeResult::Proved { used: u, .. } = r {
                    used.extend(u.iter().cloned());
                    rooted_use |= matches!(vc.goal, Goal::PValue(_));
                }
            }
            for (ci, clause) in f.requires.iter().enumerate() {
                let consumed = if clause.formula == is_empty_atom() {
                    rooted_use
                } else {
                    used.contains(&normalize(&clause.formula))
                };
                if !consumed {
                    continue;
                }
                let mut mutant = program.clone();
                mutant.functions[fi].requires.remove(ci);
                let killed = !verify_checked(&file, &src, mutant, &opts).report.passed();
                out.push((file.clone(), f.name.clone(), clause.formula.to_string(), killed));
            }
        }
    }
    out
}

#[test]
fn removing_a_consumed_requirement_breaks_verification() {
    let all = mutants();
    assert!(all.len() >= 20, "only {} mutants", all.len());
    let survivors: Vec<_> = all.iter().filter(|m| !m.3).collect();
    assert!(survivors.is_empty(), "surviving mutants: {survivors:#?}");
}
