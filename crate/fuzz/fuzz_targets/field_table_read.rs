#![no_main]

use ball_geometry::FieldTable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(t) = FieldTable::read(data) else { return };
    assert_eq!(t.points.len(), t.values.len());
    assert_eq!(t.weights.len(), t.values.len());
    assert!(t.points.iter().all(|p| p.len() == t.dim));
    assert!(t.points.iter().flatten().chain(&t.weights).chain(&t.values).all(|x| x.is_finite()));

    let mut buf = Vec::new();
    t.write(&mut buf).expect("write to memory");
    let back = FieldTable::read(buf.as_slice()).expect("re-read of own output");
    assert_eq!(t, back);
});
