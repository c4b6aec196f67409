//! Maximum flow with exact rational capacities (Edmonds–Karp).

use std::collections::VecDeque;

use num_traits::{Signed, Zero};

use crate::term::Rational;

pub struct FlowNetwork {
    cap: Vec<Vec<Rational>>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            cap: vec![vec![Rational::zero(); nodes]; nodes],
        }
    }

    pub fn add_edge(&mut self, from: usize, to: usize, cap: Rational) {
        self.cap[from][to] += cap;
    }

    /// Value of a maximum flow from `s` to `t`.
    pub fn max_flow(mut self, s: usize, t: usize) -> Rational {
        let n = self.cap.len();
        let mut total = Rational::zero();
        loop {
            let mut prev = vec![usize::MAX; n];
            prev[s] = s;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for v in 0..n {
                    if prev[v] == usize::MAX && self.cap[u][v].is_positive() {
                        prev[v] = u;
                        queue.push_back(v);
                    }
                }
            }
            if prev[t] == usize::MAX {
                return total;
            }
            let mut bottleneck: Option<Rational> = None;
            let mut v = t;
            while v != s {
                let u = prev[v];
                let c = &self.cap[u][v];
                if bottleneck.as_ref().is_none_or(|b| c < b) {
                    bottleneck = Some(c.clone());
                }
                v = u;
            }
            let b = bottleneck.expect("path has an edge");
            let mut v = t;
            while v != s {
                let u = prev[v];
                self.cap[u][v] -= &b;
                self.cap[v][u] += &b;
                v = u;
            }
            total += b;
        }
    }
}
