use std::path::Path;

use ebt_core::io::config_schema;

/// The published schema must match the config types. Regenerate with
/// `EBT_BLESS_SCHEMA=1 cargo test -p ebt-core --test schema`.
#[test]
fn published_schema_is_current() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/problem-config.schema.json");
    let generated = config_schema();
    if std::env::var_os("EBT_BLESS_SCHEMA").is_some() {
        std::fs::write(&path, &generated).unwrap();
    }
    let published = std::fs::read_to_string(&path).unwrap();
    assert_eq!(published, generated, "schema is stale; regenerate it");
}
