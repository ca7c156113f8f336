//! Structural invariants as reusable property checks.

use eacm::corpus::{multi_hot, Emotion, NUM_EMOTIONS, PAD, SOS};
use eacm::model::{Model, ModelConfig, ModelMode};
use eacm::numerics::{Graph, ParamStore, Tensor};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

pub type CaseResult = Result<(), TestCaseError>;

pub fn tiny(mode: ModelMode, hidden: usize, layers: usize) -> ModelConfig {
    ModelConfig {
        mode,
        vocab_size: 12,
        emb_dim: 4,
        hidden_dim: hidden,
        attn_dim: 3,
        emo_dim: 5,
        num_layers: layers,
        init_scale: 0.5,
    }
}

pub fn emotion() -> impl Strategy<Value = Emotion> {
    (0..NUM_EMOTIONS).prop_map(|i| Emotion::ALL[i])
}

/// A post with at least one real token; PAD may appear anywhere else.
pub fn post() -> impl Strategy<Value = Vec<u32>> {
    (prop::collection::vec(prop_oneof![Just(PAD), 4u32..12], 0..7), 4u32..12, 0usize..7).prop_map(
        |(mut v, real, at)| {
            let at = at.min(v.len());
            v.insert(at, real);
            v
        },
    )
}

pub fn finite_vec(len: usize, scale: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-scale..scale, len)
}

pub fn attention_case() -> impl Strategy<Value = (u64, Vec<u32>, Vec<f64>)> {
    (any::<u64>(), post(), finite_vec(NUM_EMOTIONS, 1.0))
}

/// Pooling weights of both selector branches and the decoder's attention
/// sum to 1 in 32-bit mode; padded positions get exactly 0.
pub fn attention_normalizes(seed: u64, post: &[u32], er: &[f64]) -> CaseResult {
    let model: Model<f32> = Model::new(tiny(ModelMode::Eacm, 4, 2), seed).unwrap();
    let sel = model.selector.predict(&model.params, post).unwrap();
    for w in [&sel.emotion_weights, &sel.semantic_weights] {
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-5);
        for (wi, &t) in w.iter().zip(post) {
            prop_assert!(*wi >= 0.0);
            if t == PAD {
                prop_assert_eq!(*wi, 0.0);
            }
        }
    }
    let gen = &model.generator;
    let mut g = Graph::inference(&model.params);
    let enc = gen.encode(&mut g, post).unwrap();
    let state = gen.initial_state(&mut g, &enc).unwrap();
    let er = g.input(Tensor::vector(er.iter().map(|&x| x as f32).collect()));
    let ve = gen.emotion_vector(&mut g, er).unwrap();
    let step = gen.decoder_step(&mut g, &state, SOS, Some(ve), &enc).unwrap();
    let a = g.value(step.attention).data();
    prop_assert!((a.iter().sum::<f32>() - 1.0).abs() < 1e-5);
    for (ai, &t) in a.iter().zip(post) {
        if t == PAD {
            prop_assert_eq!(*ai, 0.0);
        }
    }
    Ok(())
}

pub fn sigmoid_case() -> impl Strategy<Value = (u64, Vec<u32>, Vec<f64>)> {
    (any::<u64>(), post(), finite_vec(16, 15.0))
}

/// `ê_p`, `ê_r` and the fusion gate lie strictly inside (0, 1), as does the
/// sigmoid primitive on moderate inputs.
pub fn sigmoid_in_range(seed: u64, post: &[u32], xs: &[f64]) -> CaseResult {
    let model: Model<f32> = Model::new(tiny(ModelMode::Eacm, 4, 2), seed).unwrap();
    let sel = model.selector.predict(&model.params, post).unwrap();
    for v in sel.post_emotion.values().iter().chain(sel.response_emotion.values()) {
        prop_assert!(*v > 0.0 && *v < 1.0);
    }
    prop_assert!(sel.gate.iter().all(|&w| w > 0.0 && w < 1.0));
    let store = ParamStore::<f64>::new();
    let mut g = Graph::inference(&store);
    let x = g.input(Tensor::vector(xs.to_vec()));
    let s = g.sigmoid(x);
    prop_assert!(g.value(s).data().iter().all(|&v| v > 0.0 && v < 1.0));
    Ok(())
}

pub fn gate_case() -> impl Strategy<Value = (u64, Vec<f64>)> {
    (any::<u64>(), finite_vec(4, 3.0))
}

/// With `h̃_s = h̃_e = h` the fused state is `tanh(h)` whatever the gate.
pub fn gate_fixed_point(seed: u64, h: &[f64]) -> CaseResult {
    let model: Model<f64> = Model::new(tiny(ModelMode::Eacm, h.len(), 1), seed).unwrap();
    let mut g = Graph::inference(&model.params);
    let a = g.input(Tensor::vector(h.to_vec()));
    let b = g.input(Tensor::vector(h.to_vec()));
    let (fused, _) = model.selector.fuse(&mut g, a, b).unwrap();
    for (f, x) in g.value(fused).data().iter().zip(h) {
        prop_assert!((f - x.tanh()).abs() < 1e-12);
    }
    Ok(())
}

pub fn linearity_case() -> impl Strategy<Value = (u64, Vec<f64>, Vec<f64>, f64, f64)> {
    (
        any::<u64>(),
        finite_vec(NUM_EMOTIONS, 1.0),
        finite_vec(NUM_EMOTIONS, 1.0),
        -3.0f64..3.0,
        -3.0f64..3.0,
    )
}

/// `V(a x + b y) = a V(x) + b V(y)`.
pub fn emotion_vector_linear(seed: u64, x: &[f64], y: &[f64], a: f64, b: f64) -> CaseResult {
    let model: Model<f64> = Model::new(tiny(ModelMode::Eacm, 4, 1), seed).unwrap();
    let gen = &model.generator;
    let mut g = Graph::inference(&model.params);
    let mut embed = |v: Vec<f64>| {
        let v = g.input(Tensor::vector(v));
        let out = gen.emotion_vector(&mut g, v).unwrap();
        g.value(out).data().to_vec()
    };
    let mix: Vec<f64> = x.iter().zip(y).map(|(p, q)| a * p + b * q).collect();
    let lhs = embed(mix);
    let (vx, vy) = (embed(x.to_vec()), embed(y.to_vec()));
    for i in 0..lhs.len() {
        prop_assert!((lhs[i] - (a * vx[i] + b * vy[i])).abs() < 1e-12);
    }
    Ok(())
}

pub fn multi_hot_case() -> impl Strategy<Value = (Emotion, Emotion)> {
    (emotion(), emotion())
}

/// One or two bits; `Other` is set exactly when no real category is.
pub fn multi_hot_bits(p: Emotion, s: Emotion) -> CaseResult {
    let v = multi_hot(p, s);
    let bits = v.bits_set();
    prop_assert!((1..=2).contains(&bits));
    prop_assert!(v.values().iter().all(|&x| x == 0.0 || x == 1.0));
    let real = [p, s].iter().filter(|&&e| e != Emotion::Other).count();
    let expected = match (real, p == s) {
        (0, _) | (2, true) => 1,
        (n, _) => n,
    };
    prop_assert_eq!(bits, expected);
    prop_assert_eq!(v.get(Emotion::Other) == 1.0, real == 0);
    Ok(())
}

/// Runs every invariant above for `cases` random cases each.
pub fn run_all(cases: u32) -> Vec<(&'static str, Result<(), String>)> {
    fn run<S: Strategy>(cases: u32, s: S, f: impl Fn(S::Value) -> CaseResult) -> Result<(), String> {
        let mut runner = TestRunner::new(Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        });
        runner.run(&s, f).map_err(|e| e.to_string())
    }
    vec![
        (
            "attention weights sum to 1",
            run(cases, attention_case(), |(s, p, e)| attention_normalizes(s, &p, &e)),
        ),
        (
            "sigmoid outputs in (0,1)",
            run(cases, sigmoid_case(), |(s, p, x)| sigmoid_in_range(s, &p, &x)),
        ),
        ("gate fixed point", run(cases, gate_case(), |(s, h)| gate_fixed_point(s, &h))),
        (
            "emotion_vector linearity",
            run(cases, linearity_case(), |(s, x, y, a, b)| emotion_vector_linear(s, &x, &y, a, b)),
        ),
        ("multi_hot bit count", run(cases, multi_hot_case(), |(p, s)| multi_hot_bits(p, s))),
    ]
}
