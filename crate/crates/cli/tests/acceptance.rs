//! Acceptance run for the command-line round trip. Prints one line and exits
//! non-zero on failure.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

fn nullfiber(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_nullfiber"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn round_trip(dir: &Path) -> Result<String, String> {
    let spec = format!("{}/../core/fixtures/level_line.json", env!("CARGO_MANIFEST_DIR"));
    let first = dir.join("first.csv");
    let second = dir.join("second.csv");
    for out in [&first, &second] {
        nullfiber(&["trace", &spec, "-0.5,2", "--steps", "-100", "--h", "0.02", "--out", out.to_str().unwrap()])?;
    }
    let a = std::fs::read(&first).map_err(|e| e.to_string())?;
    let b = std::fs::read(&second).map_err(|e| e.to_string())?;
    if a != b {
        return Err("repeated traces differ".into());
    }

    let text = String::from_utf8(a).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let x = format!("{},{}", cells[1], cells[2]);
        let logged: f64 = cells[3].parse().map_err(|_| format!("bad output cell in {line}"))?;
        let eval: serde_json::Value =
            serde_json::from_slice(&nullfiber(&["eval", &spec, &x])?).map_err(|e| e.to_string())?;
        let replayed = eval["output"][0].as_f64().ok_or("eval without output")?;
        worst = worst.max((replayed - logged).abs());
        rows += 1;
    }
    if worst > 1e-10 {
        return Err(format!("max replay error {worst:.1e} over {rows} rows"));
    }
    Ok(format!("byte-identical reruns, max replay error {worst:.1e} over {rows} rows"))
}

fn main() {
    let dir = std::env::temp_dir().join(format!("nullfiber-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("scratch directory");
    let start = Instant::now();
    let outcome = round_trip(&dir);
    let elapsed = start.elapsed();
    let _ = std::fs::remove_dir_all(&dir);
    let (pass, detail) = match outcome {
        Ok(d) if elapsed < Duration::from_secs(5) => (true, d),
        Ok(d) => (false, format!("{d}; over budget of 5 s")),
        Err(d) => (false, d),
    };
    println!(
        "[{}] criterion 9 CLI round trip: {detail} ({:.3} s)",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    if !pass {
        std::process::exit(1);
    }
}
