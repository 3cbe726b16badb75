//! Run manifest: enough to re-run an artifact exactly.

use std::path::Path;

use crate::config::ScenarioConfig;
use crate::CliError;

/// FNV-1a over the canonical serialized config.
pub fn config_hash(canonical: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in canonical.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

pub fn write_manifest(
    dir: &Path,
    cfg: &ScenarioConfig,
    wall_time_s: f64,
    artifacts: &[String],
) -> Result<(), CliError> {
    let canonical = toml::to_string_pretty(cfg)
        .map_err(|e| CliError::Runtime(format!("manifest serialize: {e}")))?;
    let hash = config_hash(&canonical);
    let mut out = String::new();
    out.push_str(&format!(
        "version = \"{}\"\nconfig_hash = \"{hash:016x}\"\nmaster_seed = {}\nwall_time_s = {wall_time_s}\n",
        env!("CARGO_PKG_VERSION"),
        cfg.master_seed,
    ));
    out.push_str("artifacts = [");
    for (i, a) in artifacts.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&format!("\"{a}\""));
    }
    out.push_str("]\n\n[resolved_config]\n");
    // nest the resolved config one level down so the manifest stays one file
    for line in canonical.lines() {
        if let Some(rest) = line.strip_prefix('[') {
            out.push_str(&format!("[resolved_config.{rest}\n"));
        } else {
            out.push_str(line);
            out.push('\n');
        }
    }
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("manifest.toml"), out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = config_hash("kind = \"coverage\"");
        let b = config_hash("kind = \"coverage\"");
        let c = config_hash("kind = \"rate\"");
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
