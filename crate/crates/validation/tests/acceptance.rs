//! Prints one verdict line per acceptance criterion and exits non-zero if
//! any criterion fails.

fn main() {
    let failed =
        epiconfound_validation::run_all(&mut std::io::stdout().lock()).expect("stdout is writable");
    if failed > 0 {
        std::process::exit(1);
    }
}
