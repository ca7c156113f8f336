//! Plain-loop reference implementations of the model's forward computations,
//! written independently of the graph so they can serve as oracles.

use eacm::corpus::{EOS, PAD, SOS};
use eacm::numerics::ParamStore;

pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

pub fn mat(store: &ParamStore<f64>, name: &str) -> Mat {
    let p = store.by_name(name).unwrap_or_else(|| panic!("missing {name}"));
    let shape = p.value.shape();
    let (rows, cols) = match shape {
        [r, c] => (*r, *c),
        [n] => (1, *n),
        _ => panic!("unexpected shape {shape:?}"),
    };
    Mat {
        rows,
        cols,
        data: p.value.data().to_vec(),
    }
}

pub fn vec_of(store: &ParamStore<f64>, name: &str) -> Vec<f64> {
    store.by_name(name).unwrap().value.data().to_vec()
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn gru_step(store: &ParamStore<f64>, prefix: &str, x: &[f64], h: &[f64]) -> Vec<f64> {
    let m = |n: &str| mat(store, &format!("{prefix}.{n}"));
    let b = |n: &str| vec_of(store, &format!("{prefix}.{n}"));
    let z: Vec<f64> = add(&add(&m("w_z").mul(x), &m("u_z").mul(h)), &b("b_z"))
        .into_iter()
        .map(sigmoid)
        .collect();
    let r: Vec<f64> = add(&add(&m("w_r").mul(x), &m("u_r").mul(h)), &b("b_r"))
        .into_iter()
        .map(sigmoid)
        .collect();
    let rh: Vec<f64> = r.iter().zip(h).map(|(a, b)| a * b).collect();
    let n: Vec<f64> = add(&add(&m("w_h").mul(x), &m("u_h").mul(&rh)), &b("b_h"))
        .into_iter()
        .map(f64::tanh)
        .collect();
    (0..h.len()).map(|i| (1.0 - z[i]) * h[i] + z[i] * n[i]).collect()
}

/// Top-layer states per position and final state per layer. Masked
/// positions leave all states unchanged.
pub fn gru_stack(
    store: &ParamStore<f64>,
    prefix: &str,
    layers: usize,
    hidden: usize,
    inputs: &[Vec<f64>],
    keep: &[bool],
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut states = vec![vec![0.0; hidden]; layers];
    let mut top = Vec::new();
    for (x, &k) in inputs.iter().zip(keep) {
        if k {
            let mut below = x.clone();
            for (l, s) in states.iter_mut().enumerate() {
                *s = gru_step(store, &format!("{prefix}.l{l}"), &below, s);
                below = s.clone();
            }
        }
        top.push(states[layers - 1].clone());
    }
    (top, states)
}

pub fn masked_softmax(scores: &[f64], keep: &[bool]) -> Vec<f64> {
    let max = scores
        .iter()
        .zip(keep)
        .filter(|(_, &k)| k)
        .map(|(s, _)| *s)
        .fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = scores
        .iter()
        .zip(keep)
        .map(|(s, &k)| if k { (s - max).exp() } else { 0.0 })
        .collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|x| x / z).collect()
}

pub fn weighted_sum(states: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; states[0].len()];
    for (s, w) in states.iter().zip(weights) {
        for (o, v) in out.iter_mut().zip(s) {
            *o += w * v;
        }
    }
    out
}

pub struct Dims {
    pub layers: usize,
    pub hidden: usize,
}

pub fn dims(store: &ParamStore<f64>) -> Dims {
    let layers = (0..)
        .take_while(|k| store.by_name(&format!("gen.enc.l{k}.b_z")).is_some())
        .count();
    Dims {
        layers,
        hidden: vec_of(store, "gen.enc.l0.b_z").len(),
    }
}

/// Pooled state and attention weights of one selector branch.
pub fn pooled(store: &ParamStore<f64>, table: &str, enc: &str, attn: &str, post: &[u32]) -> (Vec<f64>, Vec<f64>) {
    let d = dims(store);
    let emb = mat(store, table);
    let keep: Vec<bool> = post.iter().map(|&t| t != PAD).collect();
    let inputs: Vec<Vec<f64>> = post.iter().map(|&t| emb.row(t as usize).to_vec()).collect();
    let (top, _) = gru_stack(store, enc, d.layers, d.hidden, &inputs, &keep);
    let w = mat(store, &format!("{attn}.w"));
    let v = vec_of(store, &format!("{attn}.v"));
    let scores: Vec<f64> = top
        .iter()
        .map(|h| w.mul(h).iter().zip(&v).map(|(k, v)| k.tanh() * v).sum())
        .collect();
    let weights = masked_softmax(&scores, &keep);
    (weighted_sum(&top, &weights), weights)
}

pub struct SelectorRef {
    pub post_emotion: Vec<f64>,
    pub response_emotion: Vec<f64>,
    pub gate: Vec<f64>,
    pub emotion_weights: Vec<f64>,
    pub semantic_weights: Vec<f64>,
}

pub fn selector(store: &ParamStore<f64>, post: &[u32]) -> SelectorRef {
    let (he, emotion_weights) = pooled(store, "sel.sentiment_emb", "sel.emo_enc", "sel.emo_attn", post);
    let (hs, semantic_weights) = pooled(store, "sel.semantic_emb", "sel.sem_enc", "sel.sem_attn", post);
    let affine = |name: &str, x: &[f64]| add(&mat(store, &format!("{name}.w")).mul(x), &vec_of(store, &format!("{name}.b")));
    let post_emotion = affine("sel.post_head", &he).into_iter().map(sigmoid).collect();
    let both: Vec<f64> = hs.iter().chain(&he).copied().collect();
    let gate: Vec<f64> = affine("sel.fuse", &both).into_iter().map(sigmoid).collect();
    let fused: Vec<f64> = (0..gate.len())
        .map(|i| gate[i] * hs[i].tanh() + (1.0 - gate[i]) * he[i].tanh())
        .collect();
    let response_emotion = affine("sel.pred", &fused).into_iter().map(sigmoid).collect();
    SelectorRef {
        post_emotion,
        response_emotion,
        gate,
        emotion_weights,
        semantic_weights,
    }
}

/// Summed binary cross-entropy with the model's clamping.
pub fn bce(pred: &[f64], target: &[f64], literal: bool) -> f64 {
    let c = |p: f64| p.clamp(1e-7, 1.0 - 1e-7);
    pred.iter()
        .zip(target)
        .map(|(&p, &t)| {
            let pos = t * c(p).ln();
            let neg = if literal { 0.0 } else { (1.0 - t) * c(1.0 - p).ln() };
            -(pos + neg)
        })
        .sum()
}

/// Teacher-forced mean NLL of `target` (ending with EOS). `ve` is the
/// emotion vector `V_e`, already embedded.
pub fn seq2seq_loss(store: &ParamStore<f64>, post: &[u32], target: &[u32], ve: Option<&[f64]>) -> f64 {
    assert_eq!(target.last(), Some(&EOS));
    let d = dims(store);
    let keep: Vec<bool> = post.iter().map(|&t| t != PAD).collect();
    let enc_emb = mat(store, "gen.enc_emb");
    let inputs: Vec<Vec<f64>> = post.iter().map(|&t| enc_emb.row(t as usize).to_vec()).collect();
    let (top, finals) = gru_stack(store, "gen.enc", d.layers, d.hidden, &inputs, &keep);
    let w1 = mat(store, "gen.attn.w1");
    let w2 = mat(store, "gen.attn.w2");
    let v = vec_of(store, "gen.attn.v");
    let w4 = mat(store, "gen.combine.w4");
    let out_w = mat(store, "gen.out.w");
    let out_b = vec_of(store, "gen.out.b");
    let dec_emb = mat(store, "gen.dec_emb");
    let keys: Vec<Vec<f64>> = top.iter().map(|h| w1.mul(h)).collect();
    let bias = ve.map(|ve| mat(store, "gen.attn.w3").mul(ve));

    let combine = |s: &[f64], c: &[f64]| {
        let sc: Vec<f64> = s.iter().chain(c).copied().collect();
        w4.mul(&sc)
    };
    let mut layers = finals.clone();
    let mut combined = combine(&finals[d.layers - 1], &vec![0.0; d.hidden]);
    let mut prev = SOS;
    let mut nll = 0.0;
    for &gold in target {
        let mut below: Vec<f64> = dec_emb.row(prev as usize).to_vec();
        if let Some(ve) = ve {
            below.extend_from_slice(ve);
        }
        for (k, layer) in layers.iter_mut().enumerate() {
            let h = if k == d.layers - 1 { combined.clone() } else { layer.clone() };
            *layer = gru_step(store, &format!("gen.dec.l{k}"), &below, &h);
            below = layer.clone();
        }
        let mut query = w2.mul(&below);
        if let Some(b) = &bias {
            query = add(&query, b);
        }
        let scores: Vec<f64> = keys
            .iter()
            .map(|k| k.iter().zip(&query).zip(&v).map(|((a, b), v)| (a + b).tanh() * v).sum())
            .collect();
        let weights = masked_softmax(&scores, &keep);
        let context = weighted_sum(&top, &weights);
        combined = combine(&below, &context);
        let logits = add(&out_w.mul(&combined), &out_b);
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
        nll += lse - logits[gold as usize];
        prev = gold;
    }
    nll / target.len() as f64
}

pub fn emotion_vector(store: &ParamStore<f64>, er: &[f64]) -> Vec<f64> {
    mat(store, "gen.emo_emb").mul(er)
}
