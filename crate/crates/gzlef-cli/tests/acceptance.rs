use gzlef_cli::acceptance::{self, Scale};

fn main() {
    let seed = std::env::var("GZLEF_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0);
    let mut failed = 0;
    for id in 1..=8 {
        let c = acceptance::run_one(id, Scale::Full, seed);
        println!("{}", c.line());
        if !c.passed {
            failed += 1;
            println!("{}", serde_json::to_string_pretty(&c.detail).unwrap());
        }
    }
    if failed > 0 {
        println!("{} of 8 criteria failed", failed);
        std::process::exit(1);
    }
}
