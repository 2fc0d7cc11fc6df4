#![no_main]
use aoi_core::analysis::{PropositionId, SweepModel};
use aoi_core::closed_form::ClosedFormId;
use aoi_core::model::ModelId;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    if let Ok(m) = s.parse::<ModelId>() {
        assert_eq!(m.name().parse::<ModelId>().unwrap(), m);
    }
    if let Ok(c) = s.parse::<ClosedFormId>() {
        assert_eq!(c.name().parse::<ClosedFormId>().unwrap(), c);
    }
    if let Ok(p) = s.parse::<PropositionId>() {
        assert_eq!(p.name().parse::<PropositionId>().unwrap(), p);
    }
    if let Ok(w) = s.parse::<SweepModel>() {
        assert_eq!(w.name().parse::<SweepModel>().unwrap(), w);
    }
});
