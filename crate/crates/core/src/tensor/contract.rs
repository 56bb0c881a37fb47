use nalgebra::DMatrix;
use num_complex::Complex64;

use super::network::NetworkGraph;
use crate::error::{Error, Result};

/// Largest intermediate tensor, in entries.
pub const DEFAULT_BUDGET: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ContractionOrder {
    /// Smallest intermediate first, ties to the lowest node ids.
    #[default]
    Greedy,
    /// Fold nodes in id order.
    Sequential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContractConfig {
    pub order: ContractionOrder,
    pub budget: usize,
}

impl Default for ContractConfig {
    fn default() -> Self {
        Self {
            order: ContractionOrder::Greedy,
            budget: DEFAULT_BUDGET,
        }
    }
}

/// A contracted tensor over the free ends, row-major in free-end order.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub entries: Vec<Complex64>,
}

impl Tensor {
    /// The value of a tensor with no indices.
    pub fn scalar(&self) -> Option<Complex64> {
        self.shape.is_empty().then(|| self.entries[0])
    }
}

#[derive(Debug, Clone)]
struct Work {
    id: usize,
    legs: Vec<usize>,
    dims: Vec<usize>,
    data: Vec<Complex64>,
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Reorder axes so that new axis k is old axis `perm[k]`.
fn permute(dims: &[usize], data: &[Complex64], perm: &[usize]) -> Vec<Complex64> {
    if perm.iter().enumerate().all(|(i, &p)| i == p) {
        return data.to_vec();
    }
    let old = strides(dims);
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut out = Vec::with_capacity(data.len());
    let mut idx = vec![0usize; perm.len()];
    for _ in 0..data.len() {
        let off: usize = idx.iter().zip(perm).map(|(&i, &p)| i * old[p]).sum();
        out.push(data[off]);
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            if idx[k] < new_dims[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    out
}

impl Work {
    /// Sum over pairs of legs carrying the same label.
    fn self_trace(self) -> Work {
        let Some((i, j)) = (0..self.legs.len()).find_map(|i| {
            (i + 1..self.legs.len())
                .find(|&j| self.legs[j] == self.legs[i])
                .map(|j| (i, j))
        }) else {
            return self;
        };
        let d = self.dims[i];
        let rest: Vec<usize> = (0..self.legs.len()).filter(|&k| k != i && k != j).collect();
        let mut perm = rest.clone();
        perm.push(i);
        perm.push(j);
        let data = permute(&self.dims, &self.data, &perm);
        let m: usize = rest.iter().map(|&k| self.dims[k]).product();
        let out = (0..m)
            .map(|r| (0..d).map(|t| data[r * d * d + t * d + t]).sum())
            .collect();
        Work {
            id: self.id,
            legs: rest.iter().map(|&k| self.legs[k]).collect(),
            dims: rest.iter().map(|&k| self.dims[k]).collect(),
            data: out,
        }
        .self_trace()
    }

    fn shared(&self, other: &Work) -> Vec<usize> {
        self.legs.iter().copied().filter(|l| other.legs.contains(l)).collect()
    }

    fn result_size(&self, other: &Work) -> usize {
        let shared = self.shared(other);
        let a: usize = self
            .legs
            .iter()
            .zip(&self.dims)
            .filter(|(l, _)| !shared.contains(l))
            .map(|(_, d)| d)
            .product();
        let b: usize = other
            .legs
            .iter()
            .zip(&other.dims)
            .filter(|(l, _)| !shared.contains(l))
            .map(|(_, d)| d)
            .product();
        a.saturating_mul(b)
    }

    fn contract(&self, other: &Work) -> Work {
        let shared = self.shared(other);
        let pos = |w: &Work, l: usize| w.legs.iter().position(|&x| x == l).unwrap();
        let a_free: Vec<usize> = (0..self.legs.len()).filter(|&k| !shared.contains(&self.legs[k])).collect();
        let b_free: Vec<usize> = (0..other.legs.len()).filter(|&k| !shared.contains(&other.legs[k])).collect();
        let a_sh: Vec<usize> = shared.iter().map(|&l| pos(self, l)).collect();
        let b_sh: Vec<usize> = shared.iter().map(|&l| pos(other, l)).collect();

        let rows: usize = a_free.iter().map(|&k| self.dims[k]).product();
        let inner: usize = a_sh.iter().map(|&k| self.dims[k]).product();
        let cols: usize = b_free.iter().map(|&k| other.dims[k]).product();

        let a = permute(&self.dims, &self.data, &[a_free.clone(), a_sh].concat());
        let b = permute(&other.dims, &other.data, &[b_sh, b_free.clone()].concat());
        let am = DMatrix::from_row_slice(rows, inner, &a);
        let bm = DMatrix::from_row_slice(inner, cols, &b);
        let cm = am * bm;
        let data = (0..rows)
            .flat_map(|r| (0..cols).map(move |c| (r, c)))
            .map(|(r, c)| cm[(r, c)])
            .collect();

        Work {
            id: self.id.min(other.id),
            legs: a_free
                .iter()
                .map(|&k| self.legs[k])
                .chain(b_free.iter().map(|&k| other.legs[k]))
                .collect(),
            dims: a_free
                .iter()
                .map(|&k| self.dims[k])
                .chain(b_free.iter().map(|&k| other.dims[k]))
                .collect(),
            data,
        }
    }
}

pub fn contract(g: &NetworkGraph) -> Result<Tensor> {
    contract_with(g, &ContractConfig::default())
}

/// Contract the whole network. Edge `e` is label `e`; free end `k` is label
/// `edges + k`.
pub fn contract_with(g: &NetworkGraph, config: &ContractConfig) -> Result<Tensor> {
    let ne = g.edges().len();
    let mut label = std::collections::HashMap::new();
    for (e, &(a, b)) in g.edges().iter().enumerate() {
        label.insert(a, e);
        label.insert(b, e);
    }
    for (k, &p) in g.free_ends().iter().enumerate() {
        label.insert(p, ne + k);
    }
    let mut work: Vec<Work> = g
        .nodes()
        .iter()
        .enumerate()
        .map(|(id, n)| {
            Work {
                id,
                legs: (0..n.rank())
                    .map(|s| label[&super::network::Port::new(id, s)])
                    .collect(),
                dims: n.shape.clone(),
                data: n.entries.clone(),
            }
            .self_trace()
        })
        .collect();

    let check = |size: usize| -> Result<()> {
        if size > config.budget {
            return Err(Error::Budget(format!(
                "intermediate of {size} entries over budget {}",
                config.budget
            )));
        }
        Ok(())
    };

    while work.len() > 1 {
        let (i, j) = match config.order {
            ContractionOrder::Sequential => (0, 1),
            ContractionOrder::Greedy => {
                let mut best: Option<(bool, usize, usize, usize)> = None;
                for i in 0..work.len() {
                    for j in i + 1..work.len() {
                        let disjoint = work[i].shared(&work[j]).is_empty();
                        let key = (disjoint, work[i].result_size(&work[j]), i, j);
                        if best.is_none_or(|b| key < b) {
                            best = Some(key);
                        }
                    }
                }
                let (_, _, i, j) = best.unwrap();
                (i, j)
            }
        };
        check(work[i].result_size(&work[j]))?;
        let b = work.remove(j);
        work[i] = work[i].contract(&b);
    }

    let shape = g.output_shape();
    let Some(last) = work.pop() else {
        return Ok(Tensor {
            shape,
            entries: vec![Complex64::new(1.0, 0.0)],
        });
    };
    let perm: Vec<usize> = (0..g.free_ends().len())
        .map(|k| last.legs.iter().position(|&l| l == ne + k).unwrap())
        .collect();
    Ok(Tensor {
        entries: permute(&last.dims, &last.data, &perm),
        shape,
    })
}
