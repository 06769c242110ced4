use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::session::{RatingRecord, RatingValue, StimulusRole, TestKind, TestSession};
use super::EvalError;

/// Rounds half away from zero to two decimals, the reporting precision of
/// listening-test results.
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StimulusMean {
    pub stimulus_id: String,
    pub utterance_id: String,
    pub mean: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MeanSummary {
    pub mean: f64,
    pub count: usize,
    pub listeners: usize,
    pub per_stimulus: Vec<StimulusMean>,
    /// Diagnostic only: mean after dropping the given fraction of ratings
    /// from each end.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trimmed_mean: Option<f64>,
}

/// Opinion-score statistics: the headline mean covers synthesized stimuli,
/// natural ones are reported separately as anchors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DmosSummary {
    #[serde(flatten)]
    pub synthesized: MeanSummary,
    pub anchors: Option<MeanSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreferenceSummary {
    #[serde(rename = "optionA%")]
    pub option_a_percent: f64,
    #[serde(rename = "optionB%")]
    pub option_b_percent: f64,
    #[serde(rename = "countA")]
    pub count_a: usize,
    #[serde(rename = "countB")]
    pub count_b: usize,
    pub total: usize,
    /// The option pair, when every stimulus shares the same one.
    pub labels: Option<[String; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum SessionResults {
    #[serde(rename = "DMOS")]
    Dmos(DmosSummary),
    SpeakerSimilarity(DmosSummary),
    NativityPreference(PreferenceSummary),
}

fn expect_kind(session: &TestSession, expected: TestKind) -> Result<(), EvalError> {
    if session.kind != expected {
        return Err(EvalError::WrongKind { session: session.id.clone(), expected, found: session.kind });
    }
    Ok(())
}

fn check_trim(trim: Option<f64>) -> Result<(), EvalError> {
    match trim {
        Some(f) if !(0.0..0.5).contains(&f) => Err(EvalError::InvalidConfig(format!("trim fraction {f} must lie in [0, 0.5)"))),
        _ => Ok(()),
    }
}

/// Integer sums keep the result independent of rating order.
fn mean_of(scores: &[i64]) -> f64 {
    scores.iter().sum::<i64>() as f64 / scores.len() as f64
}

fn summarise(session: &TestSession, ratings: &[RatingRecord], role: StimulusRole, trim: Option<f64>) -> Option<MeanSummary> {
    let mut per: BTreeMap<&str, Vec<i64>> = BTreeMap::new();
    let mut listeners = HashSet::new();
    let mut all = Vec::new();
    for r in ratings.iter().filter(|r| r.session_id == session.id) {
        let (Some(stimulus), RatingValue::Score(v)) = (session.stimulus(&r.stimulus_id), &r.value) else {
            continue;
        };
        if stimulus.role != role {
            continue;
        }
        per.entry(stimulus.id.as_str()).or_default().push(*v);
        listeners.insert(r.listener_id.as_str());
        all.push(*v);
    }
    if all.is_empty() {
        return None;
    }
    let per_stimulus = per
        .into_iter()
        .map(|(id, scores)| StimulusMean {
            stimulus_id: id.to_string(),
            utterance_id: session.stimulus(id).map(|s| s.utterance_id.clone()).unwrap_or_default(),
            mean: mean_of(&scores),
            count: scores.len(),
        })
        .collect();
    let trimmed_mean = trim.map(|f| {
        all.sort_unstable();
        let cut = (all.len() as f64 * f).floor() as usize;
        mean_of(&all[cut..all.len() - cut])
    });
    Some(MeanSummary { mean: mean_of(&all), count: all.len(), listeners: listeners.len(), per_stimulus, trimmed_mean })
}

pub(crate) fn score_summary(session: &TestSession, ratings: &[RatingRecord], trim: Option<f64>) -> Result<DmosSummary, EvalError> {
    check_trim(trim)?;
    let synthesized =
        summarise(session, ratings, StimulusRole::Synthesized, trim).ok_or_else(|| EvalError::NoRatings(session.id.clone()))?;
    let anchors = summarise(session, ratings, StimulusRole::Natural, trim);
    Ok(DmosSummary { synthesized, anchors })
}

/// Mean degradation opinion score over synthesized stimuli.
pub fn compute_dmos(session: &TestSession, ratings: &[RatingRecord], trim: Option<f64>) -> Result<DmosSummary, EvalError> {
    expect_kind(session, TestKind::Dmos)?;
    score_summary(session, ratings, trim)
}

/// Mean 1 to 5 similarity to the reference speaker over synthesized stimuli.
pub fn compute_similarity_score(
    session: &TestSession,
    ratings: &[RatingRecord],
    trim: Option<f64>,
) -> Result<DmosSummary, EvalError> {
    expect_kind(session, TestKind::SpeakerSimilarity)?;
    score_summary(session, ratings, trim)
}

/// Share of choices for the first and second option label of each stimulus.
pub fn compute_preference(session: &TestSession, ratings: &[RatingRecord]) -> Result<PreferenceSummary, EvalError> {
    expect_kind(session, TestKind::NativityPreference)?;
    let (mut a, mut b) = (0usize, 0usize);
    for r in ratings.iter().filter(|r| r.session_id == session.id) {
        let (Some(stimulus), RatingValue::Choice(c)) = (session.stimulus(&r.stimulus_id), &r.value) else {
            continue;
        };
        match stimulus.option_labels.as_deref() {
            Some([first, _]) if first == c => a += 1,
            Some([_, second]) if second == c => b += 1,
            _ => {}
        }
    }
    let total = a + b;
    if total == 0 {
        return Err(EvalError::NoRatings(session.id.clone()));
    }
    let pairs: Vec<&[String]> = session.rateable().filter_map(|s| s.option_labels.as_deref()).collect();
    let labels = match pairs.first() {
        Some([x, y]) if pairs.iter().all(|p| *p == pairs[0]) => Some([x.clone(), y.clone()]),
        _ => None,
    };
    Ok(PreferenceSummary {
        option_a_percent: round2(100.0 * a as f64 / total as f64),
        option_b_percent: round2(100.0 * b as f64 / total as f64),
        count_a: a,
        count_b: b,
        total,
        labels,
    })
}

/// Statistics appropriate to the session's kind.
pub fn compute_results(session: &TestSession, ratings: &[RatingRecord], trim: Option<f64>) -> Result<SessionResults, EvalError> {
    Ok(match session.kind {
        TestKind::Dmos => SessionResults::Dmos(compute_dmos(session, ratings, trim)?),
        TestKind::SpeakerSimilarity => SessionResults::SpeakerSimilarity(compute_similarity_score(session, ratings, trim)?),
        TestKind::NativityPreference => SessionResults::NativityPreference(compute_preference(session, ratings)?),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AggregateInput {
    pub mean: f64,
    pub ratings: usize,
    pub listeners: usize,
}

impl From<&MeanSummary> for AggregateInput {
    fn from(s: &MeanSummary) -> Self {
        AggregateInput { mean: s.mean, ratings: s.count, listeners: s.listeners }
    }
}

/// Cross-session summary under the three plausible weightings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Aggregate {
    /// Unweighted mean of the per-session means.
    pub macro_mean: f64,
    pub rating_weighted_mean: f64,
    pub listener_weighted_mean: f64,
    pub sessions: usize,
}

pub fn aggregate_means(inputs: &[AggregateInput]) -> Result<Aggregate, EvalError> {
    if inputs.is_empty() {
        return Err(EvalError::NoRatings("aggregate".into()));
    }
    let weighted = |w: &dyn Fn(&AggregateInput) -> usize| {
        let total: usize = inputs.iter().map(w).sum();
        if total == 0 {
            return f64::NAN;
        }
        inputs.iter().map(|i| i.mean * w(i) as f64).sum::<f64>() / total as f64
    };
    Ok(Aggregate {
        macro_mean: inputs.iter().map(|i| i.mean).sum::<f64>() / inputs.len() as f64,
        rating_weighted_mean: weighted(&|i| i.ratings),
        listener_weighted_mean: weighted(&|i| i.listeners),
        sessions: inputs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::session::Stimulus;
    use std::path::PathBuf;

    fn session(kind: TestKind) -> TestSession {
        let stim = |i: usize, role, labels: Option<Vec<String>>| Stimulus {
            id: format!("s-{i:03}"),
            utterance_id: format!("u{i}"),
            audio_path: PathBuf::new(),
            role,
            option_labels: labels,
        };
        let labels = (kind == TestKind::NativityPreference).then(|| vec!["Bengali".to_string(), "Hindi".to_string()]);
        TestSession {
            id: "s".into(),
            kind,
            stimuli: vec![stim(0, StimulusRole::Synthesized, labels.clone()), stim(1, StimulusRole::Natural, labels)],
            listener_count: 2,
        }
    }

    fn rating(listener: &str, stimulus: &str, value: RatingValue) -> RatingRecord {
        RatingRecord { session_id: "s".into(), listener_id: listener.into(), stimulus_id: stimulus.into(), value, timestamp: 0 }
    }

    #[test]
    fn all_fives() {
        let s = session(TestKind::Dmos);
        let r: Vec<_> = ["a", "b", "c"].iter().map(|l| rating(l, "s-000", RatingValue::Score(5))).collect();
        let d = compute_dmos(&s, &r, None).unwrap();
        assert_eq!(d.synthesized.mean, 5.0);
        assert_eq!(d.synthesized.listeners, 3);
        assert!(d.anchors.is_none());
    }

    #[test]
    fn natural_ratings_are_anchors_only() {
        let s = session(TestKind::Dmos);
        let r = vec![rating("a", "s-000", RatingValue::Score(2)), rating("a", "s-001", RatingValue::Score(5))];
        let d = compute_dmos(&s, &r, None).unwrap();
        assert_eq!(d.synthesized.mean, 2.0);
        assert_eq!(d.anchors.unwrap().mean, 5.0);
        assert!(matches!(compute_dmos(&s, &r[1..], None), Err(EvalError::NoRatings(_))));
    }

    #[test]
    fn trimmed_mean_drops_extremes() {
        let s = session(TestKind::Dmos);
        let r: Vec<_> =
            [1, 4, 4, 4, 5].iter().enumerate().map(|(i, v)| rating(&format!("l{i}"), "s-000", RatingValue::Score(*v))).collect();
        let d = compute_dmos(&s, &r, Some(0.2)).unwrap();
        assert_eq!(d.synthesized.trimmed_mean, Some(4.0));
        assert!(compute_dmos(&s, &r, Some(0.5)).is_err());
    }

    #[test]
    fn wrong_kind() {
        let s = session(TestKind::Dmos);
        assert!(matches!(compute_similarity_score(&s, &[], None), Err(EvalError::WrongKind { .. })));
        assert!(matches!(compute_preference(&s, &[]), Err(EvalError::WrongKind { .. })));
    }

    #[test]
    fn preference_zero_of_four() {
        let s = session(TestKind::NativityPreference);
        let r: Vec<_> = (0..4).map(|i| rating(&format!("l{i}"), "s-000", RatingValue::Choice("Hindi".into()))).collect();
        let p = compute_preference(&s, &r).unwrap();
        assert_eq!((p.option_a_percent, p.option_b_percent, p.total), (0.0, 100.0, 4));
        assert_eq!(p.labels, Some(["Bengali".to_string(), "Hindi".to_string()]));
        let json = serde_json::to_value(&p).unwrap();
        assert_eq!(json["optionA%"], 0.0);
    }

    #[test]
    fn aggregate_weightings() {
        let a = aggregate_means(&[
            AggregateInput { mean: 4.0, ratings: 10, listeners: 1 },
            AggregateInput { mean: 2.0, ratings: 30, listeners: 3 },
        ])
        .unwrap();
        assert_eq!(a.macro_mean, 3.0);
        assert_eq!(a.rating_weighted_mean, 2.5);
        assert_eq!(a.listener_weighted_mean, 2.5);
        assert!(aggregate_means(&[]).is_err());
    }

    #[test]
    fn results_are_tagged_by_kind() {
        let s = session(TestKind::Dmos);
        let r = vec![rating("a", "s-000", RatingValue::Score(4))];
        let v = serde_json::to_value(compute_results(&s, &r, None).unwrap()).unwrap();
        assert_eq!(v["kind"], "DMOS");
        assert_eq!(v["mean"], 4.0);
    }
}
