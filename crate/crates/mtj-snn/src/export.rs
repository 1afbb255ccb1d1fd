//! Output-file helpers: config-hash stamping and float formatting.

use std::path::Path;

use crate::error::Result;

/// FNV-1a hash of the canonical config bytes; stamped into every output
/// file so results trace back to their inputs.
pub fn config_hash(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn hash_hex(h: u64) -> String {
    format!("{h:016x}")
}

/// Write a CSV payload with a leading `# config_hash=...` comment line.
pub fn write_csv_with_hash(path: &Path, hash: u64, csv: &str) -> Result<()> {
    let body = format!("# config_hash={}\n{}", hash_hex(hash), csv);
    std::fs::write(path, body)?;
    Ok(())
}

/// Attach the config hash to a JSON value and write it pretty-printed.
pub fn write_json_with_hash(path: &Path, hash: u64, value: serde_json::Value) -> Result<()> {
    let mut value = value;
    if let serde_json::Value::Object(map) = &mut value {
        map.insert("config_hash".to_string(), serde_json::json!(hash_hex(hash)));
    }
    std::fs::write(path, serde_json::to_string_pretty(&value)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = config_hash(b"device = \"10kbt\"");
        let b = config_hash(b"device = \"10kbt\"");
        let c = config_hash(b"device = \"20kbt\"");
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(hash_hex(a).len(), 16);
    }

    #[test]
    fn csv_gets_hash_comment() {
        let dir = std::env::temp_dir().join("mtj_snn_export_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("x.csv");
        write_csv_with_hash(&path, 0xabcd, "a,b\n1,2\n").unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# config_hash=000000000000abcd\na,b\n"));
        std::fs::remove_dir_all(&dir).ok();
    }
}
