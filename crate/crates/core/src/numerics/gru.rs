//! Gated recurrent unit built from graph primitives.
//!
//! ```text
//! z  = σ(W_z x + U_z h + b_z)
//! r  = σ(W_r x + U_r h + b_r)
//! h̃  = tanh(W_h x + U_h (r ⊙ h) + b_h)
//! h' = (1 - z) ⊙ h + z ⊙ h̃
//! ```

use rand::Rng;

use super::graph::{Graph, Var};
use super::params::{ParamId, ParamStore};
use super::tensor::{Scalar, Tensor};
use crate::error::Result;

#[derive(Clone, Debug)]
pub struct GruCell {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub w_z: ParamId,
    pub u_z: ParamId,
    pub b_z: ParamId,
    pub w_r: ParamId,
    pub u_r: ParamId,
    pub b_r: ParamId,
    pub w_h: ParamId,
    pub u_h: ParamId,
    pub b_h: ParamId,
}

/// A [`GruCell`] whose parameters have been placed on a graph.
#[derive(Clone, Copy, Debug)]
pub struct BoundGru {
    w_z: Var,
    u_z: Var,
    b_z: Var,
    w_r: Var,
    u_r: Var,
    b_r: Var,
    w_h: Var,
    u_h: Var,
    b_h: Var,
}

impl GruCell {
    pub fn register<T: Scalar, R: Rng>(
        store: &mut ParamStore<T>,
        prefix: &str,
        input_dim: usize,
        hidden_dim: usize,
        init_scale: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let (i, h) = (input_dim, hidden_dim);
        let mut reg = |name: &str, shape: &[usize]| {
            store.register_uniform(format!("{prefix}.{name}"), shape, init_scale, rng)
        };
        Ok(GruCell {
            input_dim,
            hidden_dim,
            w_z: reg("w_z", &[h, i])?,
            u_z: reg("u_z", &[h, h])?,
            b_z: reg("b_z", &[h])?,
            w_r: reg("w_r", &[h, i])?,
            u_r: reg("u_r", &[h, h])?,
            b_r: reg("b_r", &[h])?,
            w_h: reg("w_h", &[h, i])?,
            u_h: reg("u_h", &[h, h])?,
            b_h: reg("b_h", &[h])?,
        })
    }

    pub fn param_ids(&self) -> [ParamId; 9] {
        [
            self.w_z, self.u_z, self.b_z, self.w_r, self.u_r, self.b_r, self.w_h, self.u_h,
            self.b_h,
        ]
    }

    pub fn bind<T: Scalar>(&self, g: &mut Graph<'_, T>) -> BoundGru {
        BoundGru {
            w_z: g.param(self.w_z),
            u_z: g.param(self.u_z),
            b_z: g.param(self.b_z),
            w_r: g.param(self.w_r),
            u_r: g.param(self.u_r),
            b_r: g.param(self.b_r),
            w_h: g.param(self.w_h),
            u_h: g.param(self.u_h),
            b_h: g.param(self.b_h),
        }
    }
}

impl BoundGru {
    /// One recurrence step: returns the new hidden state.
    pub fn step<T: Scalar>(&self, g: &mut Graph<'_, T>, x: Var, h: Var) -> Result<Var> {
        let zx = g.affine(self.w_z, x, self.b_z)?;
        let zh = g.matvec(self.u_z, h)?;
        let z = g.add(zx, zh)?;
        let z = g.sigmoid(z);

        let rx = g.affine(self.w_r, x, self.b_r)?;
        let rh = g.matvec(self.u_r, h)?;
        let r = g.add(rx, rh)?;
        let r = g.sigmoid(r);

        let nx = g.affine(self.w_h, x, self.b_h)?;
        let rh = g.mul(r, h)?;
        let nh = g.matvec(self.u_h, rh)?;
        let n = g.add(nx, nh)?;
        let n = g.tanh(n);

        let delta = g.sub(n, h)?;
        let upd = g.mul(z, delta)?;
        g.add(h, upd)
    }
}

/// Stacked GRU layers; layer `k + 1` reads the states of layer `k`.
#[derive(Clone, Debug)]
pub struct GruStack {
    pub layers: Vec<GruCell>,
}

/// States produced by running a [`GruStack`] over a sequence.
#[derive(Clone, Debug)]
pub struct StackRun {
    /// Top-layer state at every position.
    pub top: Vec<Var>,
    /// Final state of each layer, bottom first.
    pub finals: Vec<Var>,
}

impl GruStack {
    pub fn register<T: Scalar, R: Rng>(
        store: &mut ParamStore<T>,
        prefix: &str,
        input_dim: usize,
        hidden_dim: usize,
        num_layers: usize,
        init_scale: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let layers = (0..num_layers)
            .map(|k| {
                let input = if k == 0 { input_dim } else { hidden_dim };
                GruCell::register(store, &format!("{prefix}.l{k}"), input, hidden_dim, init_scale, rng)
            })
            .collect::<Result<_>>()?;
        Ok(GruStack { layers })
    }

    pub fn hidden_dim(&self) -> usize {
        self.layers[0].hidden_dim
    }

    pub fn param_ids(&self) -> Vec<ParamId> {
        self.layers.iter().flat_map(|l| l.param_ids()).collect()
    }

    pub fn bind<T: Scalar>(&self, g: &mut Graph<'_, T>) -> Vec<BoundGru> {
        self.layers.iter().map(|l| l.bind(g)).collect()
    }

    /// Runs all layers over `inputs` from zero initial states. Positions with
    /// `keep[i] == false` leave every layer's state unchanged.
    pub fn run<T: Scalar>(
        &self,
        g: &mut Graph<'_, T>,
        inputs: &[Var],
        keep: Option<&[bool]>,
    ) -> Result<StackRun> {
        let bound = self.bind(g);
        let h = self.hidden_dim();
        let mut states: Vec<Var> = (0..bound.len())
            .map(|_| g.input(Tensor::zeros(&[h])))
            .collect();
        let mut top = Vec::with_capacity(inputs.len());
        for (t, &x) in inputs.iter().enumerate() {
            if keep.is_some_and(|k| !k[t]) {
                top.push(*states.last().expect("at least one layer"));
                continue;
            }
            let mut below = x;
            for (cell, state) in bound.iter().zip(states.iter_mut()) {
                *state = cell.step(g, below, *state)?;
                below = *state;
            }
            top.push(below);
        }
        Ok(StackRun {
            top,
            finals: states,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sigmoid(x: f64) -> f64 {
        1.0 / (1.0 + (-x).exp())
    }

    /// Loop-based reference written independently of the graph code.
    fn scalar_gru(store: &ParamStore<f64>, c: &GruCell, x: &[f64], h: &[f64]) -> Vec<f64> {
        let m = |id: ParamId, v: &[f64], i: usize| -> f64 {
            let w = store.value(id);
            (0..v.len()).map(|j| w.data()[i * v.len() + j] * v[j]).sum()
        };
        let b = |id: ParamId, i: usize| store.value(id).data()[i];
        let n = c.hidden_dim;
        let z: Vec<f64> = (0..n).map(|i| sigmoid(m(c.w_z, x, i) + m(c.u_z, h, i) + b(c.b_z, i))).collect();
        let r: Vec<f64> = (0..n).map(|i| sigmoid(m(c.w_r, x, i) + m(c.u_r, h, i) + b(c.b_r, i))).collect();
        let rh: Vec<f64> = (0..n).map(|i| r[i] * h[i]).collect();
        let cand: Vec<f64> = (0..n).map(|i| (m(c.w_h, x, i) + m(c.u_h, &rh, i) + b(c.b_h, i)).tanh()).collect();
        (0..n).map(|i| (1.0 - z[i]) * h[i] + z[i] * cand[i]).collect()
    }

    fn cell(scale: f64, seed: u64) -> (ParamStore<f64>, GruCell) {
        let mut store = ParamStore::new();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = GruCell::register(&mut store, "gru", 3, 4, scale, &mut rng).unwrap();
        if scale == 0.0 {
            store.iter_mut().for_each(|p| p.value.fill(0.0));
        }
        (store, c)
    }

    #[test]
    fn zero_params_halve_the_state() {
        let (store, c) = cell(0.0, 1);
        let mut g = Graph::new(&store);
        let b = c.bind(&mut g);
        let x = g.input(Tensor::vector(vec![0.3, -0.2, 0.9]));
        let h = g.input(Tensor::vector(vec![1.0, -2.0, 0.5, 0.0]));
        let out = b.step(&mut g, x, h).unwrap();
        assert_eq!(g.value(out).data(), &[0.5, -1.0, 0.25, 0.0]);

        let h0 = g.input(Tensor::zeros(&[4]));
        let out = b.step(&mut g, x, h0).unwrap();
        assert_eq!(g.value(out).data(), &[0.0; 4]);
    }

    #[test]
    fn matches_scalar_reference() {
        for seed in 0..5 {
            let (store, c) = cell(0.8, seed);
            let x = [0.4, -0.7, 1.1];
            let h = [0.2, -0.1, 0.5, -0.9];
            let expected = scalar_gru(&store, &c, &x, &h);
            let mut g = Graph::new(&store);
            let b = c.bind(&mut g);
            let xv = g.input(Tensor::vector(x.to_vec()));
            let hv = g.input(Tensor::vector(h.to_vec()));
            let out = b.step(&mut g, xv, hv).unwrap();
            for (a, e) in g.value(out).data().iter().zip(&expected) {
                assert!((a - e).abs() < 1e-6, "{a} vs {e}");
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let (store, c) = cell(0.1, 2);
        let mut g = Graph::new(&store);
        let b = c.bind(&mut g);
        let x = g.input(Tensor::zeros(&[5]));
        let h = g.input(Tensor::zeros(&[4]));
        assert!(b.step(&mut g, x, h).is_err());
    }
}
