//! Self-esteem scoring fixtures.

use lexisupport_core::psychometrics::{
    is_reversed, maximal_pattern, score_answers, score_item, Agreement, Band, ScoringError,
};
use proptest::prelude::*;

use Agreement::{Agree, Disagree, StronglyAgree as SA, StronglyDisagree as SD};

/// Hand-built patterns; reversed items are 2, 5, 6, 8 and 9.
#[test]
fn banded_fixtures() {
    let cases: [([Agreement; 10], u8, Band); 6] = [
        (maximal_pattern(), 40, Band::High),
        // positives 4+4+4+4+3 = 19, reversed 3+2+2+2+2 = 11
        ([SA, Disagree, SA, SA, Agree, Agree, SA, Agree, Agree, Agree], 30, Band::High),
        ([SA, Agree, SA, Agree, Agree, Agree, SA, Agree, Agree, SA], 29, Band::Medium),
        ([Agree, Agree, Agree, Agree, Agree, Agree, Agree, Agree, Agree, Agree], 25, Band::Low),
        ([Agree, Agree, Agree, Agree, Agree, Agree, SA, Agree, Agree, Agree], 26, Band::Medium),
        ([SD, SA, SD, SD, SA, SA, SD, SA, SA, SD], 10, Band::Low),
    ];
    for (answers, total, band) in cases {
        // independent tally
        let mut tally = 0u8;
        for (i, a) in answers.iter().enumerate() {
            let base = match a {
                SA => 4,
                Agree => 3,
                Disagree => 2,
                SD => 1,
            };
            tally += if [2, 5, 6, 8, 9].contains(&(i + 1)) { 5 - base } else { base };
        }
        assert_eq!(tally, total, "{answers:?}");
        let s = score_answers(&answers).unwrap();
        assert_eq!((s.total, s.band), (total, band));
    }
    assert_eq!(score_answers(&maximal_pattern()).unwrap().to_string(), "40 High");
}

#[test]
fn mirror_identity() {
    for a in Agreement::ALL {
        assert_eq!(score_item(a, false) + score_item(a, true), 5);
    }
    assert_eq!(score_item(SA, false), 4);
    assert_eq!(score_item(SA, true), 1);
}

#[test]
fn bands_cover_the_range() {
    for total in 10..=40u8 {
        let band = Band::of(total);
        assert_eq!(band == Band::High, (30..=40).contains(&total));
        assert_eq!(band == Band::Medium, (26..=29).contains(&total));
        assert_eq!(band == Band::Low, total <= 25);
    }
}

#[test]
fn wrong_answer_count() {
    assert_eq!(score_answers(&[SA; 9]), Err(ScoringError::WrongAnswerCount(9)));
}

proptest! {
    #[test]
    fn permuting_positive_items_keeps_total(
        answers in prop::array::uniform10(prop::sample::select(Agreement::ALL.to_vec())),
        swaps in prop::collection::vec((0usize..5, 0usize..5), 0..10),
    ) {
        let positive: Vec<usize> = (1..=10).filter(|&i| !is_reversed(i)).map(|i| i - 1).collect();
        let mut shuffled = answers;
        for (a, b) in swaps {
            shuffled.swap(positive[a], positive[b]);
        }
        prop_assert_eq!(score_answers(&answers).unwrap().total, score_answers(&shuffled).unwrap().total);
        prop_assert!((10..=40).contains(&score_answers(&answers).unwrap().total));
    }
}
