use proptest::prelude::*;

use radix_sa::datagen::{gen, DatasetSpec, Family};
use radix_sa::lmer::LmerConfig;
use radix_sa::prob::{sa1, sa2};
use radix_sa::radixsa::{radixsa, RadixSaConfig};
use radix_sa::text::{ProbabilityModel, SuffixArray, Text};
use radix_sa::verify::{check_sa, oracle_sa};

fn all_agree(raw: &[u8], ell: Option<usize>) -> Result<(), TestCaseError> {
    let t = Text::ingest(raw).unwrap();
    let want = oracle_sa(&t).unwrap();
    let cfg = LmerConfig::for_text(&t, 1.0, ell).unwrap();
    prop_assert_eq!(&radixsa(&t, &RadixSaConfig::default()).unwrap().sa, &want);
    prop_assert_eq!(&sa1(&t, &cfg), &want);
    prop_assert_eq!(&sa2(&t, &cfg, &RadixSaConfig::default()).unwrap().sa, &want);
    prop_assert!(check_sa(&t, &want).is_ok());
    Ok(())
}

proptest! {
    #[test]
    fn builders_agree_on_random_bytes(raw in proptest::collection::vec(any::<u8>(), 1..300), ell in proptest::option::of(1usize..12)) {
        all_agree(&raw, ell)?;
    }

    #[test]
    fn builders_agree_on_small_alphabets(raw in proptest::collection::vec(b'a'..b'd', 1..300)) {
        all_agree(&raw, None)?;
    }

    #[test]
    fn builders_agree_on_generated(family in prop_oneof![Just(Family::Fibonacci), Just(Family::Unary), Just(Family::Debruijn)], n in 2usize..3000) {
        all_agree(&gen(&DatasetSpec::new(family, n)).unwrap(), None)?;
    }

    #[test]
    fn builders_agree_on_periodic(n in 1usize..3000, p in 1usize..30, sigma in 1usize..5, seed: u64) {
        all_agree(&gen(&DatasetSpec::periodic(n, p, sigma, seed)).unwrap(), None)?;
    }

    #[test]
    fn sa_files_round_trip(raw in proptest::collection::vec(b'a'..b'e', 1..200)) {
        let t = Text::ingest(&raw).unwrap();
        let sa = radixsa(&t, &RadixSaConfig::default()).unwrap().sa;
        let mut bin = Vec::new();
        sa.write_binary(&mut bin).unwrap();
        let mut txt = Vec::new();
        sa.write_text(&mut txt).unwrap();
        prop_assert_eq!(&SuffixArray::read(&bin[..]).unwrap(), &sa);
        prop_assert_eq!(&SuffixArray::read(&txt[..]).unwrap(), &sa);
    }
}

#[test]
fn skewed_model_rarely_falls_back() {
    let model = ProbabilityModel::parse_weights("0.7,0.3").unwrap();
    let mut fallbacks = 0;
    for seed in 0..40 {
        let mut spec = DatasetSpec::new(Family::Random, 4096);
        spec.weights = Some(vec![0.7, 0.3]);
        spec.seed = seed;
        let t = Text::ingest(&gen(&spec).unwrap()).unwrap();
        let cfg = LmerConfig::with_model(&t, model.clone(), 1.0, None).unwrap();
        assert_eq!(cfg.ell, 46);
        let out = sa2(&t, &cfg, &RadixSaConfig::default()).unwrap();
        assert_eq!(out.sa, oracle_sa(&t).unwrap());
        fallbacks += out.fell_back as u32;
    }
    assert!(fallbacks <= 1, "{fallbacks} of 40 fell back");
}

#[test]
fn short_prefix_falls_back_but_stays_correct() {
    let t = Text::ingest(&gen(&DatasetSpec::random(5000, 4, 8)).unwrap()).unwrap();
    let cfg = LmerConfig::for_text(&t, 1.0, Some(3)).unwrap();
    let out = sa2(&t, &cfg, &RadixSaConfig::default()).unwrap();
    assert!(out.fell_back);
    assert!(out.max_bucket_size > 1);
    assert_eq!(out.sa, oracle_sa(&t).unwrap());
    assert_eq!(sa1(&t, &cfg), out.sa);
}
