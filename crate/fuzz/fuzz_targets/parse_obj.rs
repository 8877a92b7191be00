#![no_main]

use libfuzzer_sys::fuzz_target;
use semisparse::io::{self, MeshFormat, ReadOptions};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    for triangulate in [false, true] {
        let Ok(raw) = io::parse_obj(text, ReadOptions { triangulate }) else {
            continue;
        };
        if let Ok(mesh) = raw.build() {
            // Whatever we accept must survive a write/read round trip.
            let written = io::format_mesh(&mesh, MeshFormat::Obj);
            let again = io::parse_obj(&written, ReadOptions::default())
                .expect("reparse of written OBJ")
                .build()
                .expect("rebuild of written OBJ");
            assert_eq!(again.positions(), mesh.positions());
            assert_eq!(again.faces(), mesh.faces());
        }
    }
});
