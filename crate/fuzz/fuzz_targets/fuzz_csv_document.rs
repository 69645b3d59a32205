#![no_main]

use libfuzzer_sys::fuzz_target;

// The CSV reader consumes files on disk; arbitrary text must produce either
// a structurally consistent document or an error, never a panic.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(doc) = gossip_mean_cli::output::parse_csv_document(text) {
        for row in &doc.rows {
            assert_eq!(row.len(), doc.header.len());
        }
    }
});
