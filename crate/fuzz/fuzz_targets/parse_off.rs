#![no_main]

use libfuzzer_sys::fuzz_target;
use semisparse::io::{self, MeshFormat, ReadOptions};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    for triangulate in [false, true] {
        let Ok(raw) = io::parse_off(text, ReadOptions { triangulate }) else {
            continue;
        };
        if let Ok(mesh) = raw.build() {
            let written = io::format_mesh(&mesh, MeshFormat::Off);
            let again = io::parse_off(&written, ReadOptions::default())
                .expect("reparse of written OFF")
                .build()
                .expect("rebuild of written OFF");
            assert_eq!(again.positions(), mesh.positions());
            assert_eq!(again.faces(), mesh.faces());
        }
    }
});
