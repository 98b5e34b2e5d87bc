use super::synth::{Profile, SynthSpec};
use crate::error::CompressError;
use crate::provenance::Provenance;
use crate::sequence::TokenSequence;

/// Fraction of events that survive as at least one output token built only
/// from that event's positions.
pub fn event_retention(original: &TokenSequence, prov: &Provenance, spec: &SynthSpec) -> Result<f64, CompressError> {
    if !matches!(spec.profile, Profile::PiecewiseEvents(_)) {
        return Err(CompressError::SpecMismatch("spec has no events".into()));
    }
    if original.len() != spec.length || original.dim() != spec.dim {
        return Err(CompressError::SpecMismatch(format!(
            "sequence is {}x{}, spec is {}x{}",
            original.len(),
            original.dim(),
            spec.length,
            spec.dim
        )));
    }
    if prov.original_length != spec.length {
        return Err(CompressError::SpecMismatch(format!(
            "provenance covers {} tokens, spec has {}",
            prov.original_length, spec.length
        )));
    }
    let spans = spec.event_spans();
    let kept = spans
        .iter()
        .filter(|&&(a, b)| prov.groups.iter().any(|g| g.iter().all(|&p| p > a && p <= b)))
        .count();
    Ok(kept as f64 / spans.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::{KeepRatio, Method, Weighting};
    use crate::testkit::{generate, EventParams};

    fn setup() -> (SynthSpec, TokenSequence) {
        let spec = SynthSpec::events(
            30,
            3,
            4,
            EventParams {
                events: 3,
                mean_span: 6,
                noise: 0.05,
                separation: 1.0,
            },
        );
        let seq = generate(&spec).unwrap();
        (spec, seq)
    }

    #[test]
    fn identity_retains_everything() {
        let (spec, seq) = setup();
        let prov = Provenance::identity(Method::Ltbm, KeepRatio::FULL, None, Weighting::PaperLiteral, 30);
        assert_eq!(event_retention(&seq, &prov, &spec).unwrap(), 1.0);
    }

    #[test]
    fn single_mixed_group_retains_nothing() {
        let (spec, seq) = setup();
        let mut prov = Provenance::identity(
            Method::Ltbm,
            KeepRatio::new(0.01).unwrap(),
            None,
            Weighting::PaperLiteral,
            30,
        );
        prov.groups = vec![(1..=30).collect()];
        assert_eq!(event_retention(&seq, &prov, &spec).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_spec_rejected() {
        let (spec, seq) = setup();
        let prov = Provenance::identity(Method::Ltbm, KeepRatio::FULL, None, Weighting::PaperLiteral, 29);
        assert!(matches!(
            event_retention(&seq, &prov, &spec),
            Err(CompressError::SpecMismatch(_))
        ));
        let iid = SynthSpec::gaussian(30, 3, 4);
        let prov = Provenance::identity(Method::Ltbm, KeepRatio::FULL, None, Weighting::PaperLiteral, 30);
        assert!(event_retention(&seq, &prov, &iid).is_err());
    }
}
