//! Exact discrete optimal transport between two uniform empirical measures.
//!
//! [`solve_ot`] runs a primal network simplex on the complete bipartite
//! transportation graph. Masses are carried as integers on a grid of
//! `lcm(N_s, N_t)` units (each source supplies `lcm / N_s`, each target
//! demands `lcm / N_t`), so every basic solution is exact and the plan is
//! recovered by a single division at the end. [`oracle_ot`] enumerates the
//! same integer grid exhaustively and is only meant for tiny instances.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `lcm(N_s, N_t) * max(N_s, N_t)` the enumeration oracle accepts.
pub const ORACLE_LIMIT: usize = 64;

/// Nonnegative, finite `N_s x N_t` transport costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Array2<f64>", into = "Array2<f64>")]
pub struct CostMatrix(Array2<f64>);

impl CostMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (rows, cols) = values.dim();
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidCost(format!(
                "empty dimension ({rows} x {cols})"
            )));
        }
        for ((i, j), &c) in values.indexed_iter() {
            if !c.is_finite() {
                return Err(Error::InvalidCost(format!("entry ({i}, {j}) is {c}")));
            }
            if c < 0.0 {
                return Err(Error::InvalidCost(format!("entry ({i}, {j}) is negative ({c})")));
            }
        }
        Ok(CostMatrix(values))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::InvalidCost("ragged rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let values = Array2::from_shape_vec((n_rows, n_cols), flat)
            .map_err(|e| Error::InvalidCost(e.to_string()))?;
        Self::new(values)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }

    pub fn n_source(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_target(&self) -> usize {
        self.0.ncols()
    }

    /// `<plan, cost>`.
    pub fn objective(&self, plan: &Array2<f64>) -> f64 {
        self.0
            .iter()
            .zip(plan.iter())
            .map(|(c, p)| c * p)
            .sum()
    }
}

impl TryFrom<Array2<f64>> for CostMatrix {
    type Error = Error;

    fn try_from(values: Array2<f64>) -> Result<Self> {
        CostMatrix::new(values)
    }
}

impl From<CostMatrix> for Array2<f64> {
    fn from(cost: CostMatrix) -> Self {
        cost.0
    }
}

/// Coupling with uniform marginals `1/N_s` (rows) and `1/N_t` (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    pub values: Array2<f64>,
    pub objective: f64,
}

impl TransportPlan {
    pub fn n_source(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_target(&self) -> usize {
        self.values.ncols()
    }

    /// Largest deviation of any row or column sum from its uniform marginal.
    pub fn marginal_error(&self) -> f64 {
        let (m, n) = self.values.dim();
        let row_target = 1.0 / m as f64;
        let col_target = 1.0 / n as f64;
        let rows = self
            .values
            .rows()
            .into_iter()
            .map(|r| (r.sum() - row_target).abs());
        let cols = self
            .values
            .columns()
            .into_iter()
            .map(|c| (c.sum() - col_target).abs());
        rows.chain(cols).fold(0.0, f64::max)
    }
}

/// Dual certificate: `cost[i][j] - row[i] - col[j] >= 0`, with equality on
/// the support of the plan.
#[derive(Debug, Clone, PartialEq)]
pub struct Potentials {
    pub row: Vec<f64>,
    pub col: Vec<f64>,
}

impl Potentials {
    /// Dual objective `sum_i row_i / N_s + sum_j col_j / N_t`.
    pub fn dual_objective(&self) -> f64 {
        let m = self.row.len() as f64;
        let n = self.col.len() as f64;
        self.row.iter().sum::<f64>() / m + self.col.iter().sum::<f64>() / n
    }

    /// Most negative reduced cost over all pairs (0 if none is negative).
    pub fn max_violation(&self, cost: &CostMatrix) -> f64 {
        let mut worst: f64 = 0.0;
        for ((i, j), &c) in cost.values().indexed_iter() {
            worst = worst.max(self.row[i] + self.col[j] - c);
        }
        worst
    }
}

/// Exact optimal plan for `cost` under uniform marginals.
pub fn solve_ot(cost: &CostMatrix) -> TransportPlan {
    solve_ot_with_potentials(cost).0
}

/// Same as [`solve_ot`], also returning the optimal dual potentials.
pub fn solve_ot_with_potentials(cost: &CostMatrix) -> (TransportPlan, Potentials) {
    let (m, n) = cost.values().dim();
    let units = lcm(m, n);
    let scale = cost.values().iter().copied().fold(0.0, f64::max);
    let scale = if scale > 0.0 { scale } else { 1.0 };

    let mut simplex = NetworkSimplex::new(cost.values(), scale, (units / m) as i64, (units / n) as i64);
    simplex.run();

    let mut plan = Array2::zeros((m, n));
    for i in 0..m {
        for j in 0..n {
            let f = simplex.flow[i * n + j];
            if f != 0 {
                plan[(i, j)] = f as f64 / units as f64;
            }
        }
    }
    let objective = cost.objective(&plan);
    // reduced cost is c + pi[s] - pi[t]; rescale back to the caller's units
    let row = (0..m).map(|i| -simplex.pi[i] * scale).collect();
    let col = (0..n).map(|j| simplex.pi[m + j] * scale).collect();
    (
        TransportPlan {
            values: plan,
            objective,
        },
        Potentials { row, col },
    )
}

/// Exhaustive search over every integer flow on the `lcm(N_s, N_t)` grid.
pub fn oracle_ot(cost: &CostMatrix) -> Result<TransportPlan> {
    let (m, n) = cost.values().dim();
    let units = lcm(m, n);
    let side = m.max(n);
    if units * side > ORACLE_LIMIT {
        return Err(Error::OracleGuard {
            lcm: units,
            side,
            limit: ORACLE_LIMIT,
        });
    }
    let row_units = units / m;
    let col_units = units / n;

    struct Search<'a> {
        cost: &'a Array2<f64>,
        n: usize,
        row_units: usize,
        current: Vec<usize>,
        col_left: Vec<usize>,
        best: Option<(f64, Vec<usize>)>,
    }

    impl Search<'_> {
        fn visit(&mut self, cell: usize, row_left: usize, acc: f64) {
            let (m, n) = (self.cost.nrows(), self.n);
            let (i, j) = (cell / n, cell % n);
            if i == m {
                if self.best.as_ref().is_none_or(|(b, _)| acc < *b) {
                    self.best = Some((acc, self.current.clone()));
                }
                return;
            }
            // last cell of a row takes whatever is left
            let (lo, hi) = if j + 1 == n {
                (row_left, row_left)
            } else {
                (0, row_left.min(self.col_left[j]))
            };
            if lo > self.col_left[j] {
                return;
            }
            for f in lo..=hi {
                self.current[cell] = f;
                self.col_left[j] -= f;
                let next_left = if j + 1 == n { self.row_units } else { row_left - f };
                self.visit(cell + 1, next_left, acc + f as f64 * self.cost[(i, j)]);
                self.col_left[j] += f;
            }
            self.current[cell] = 0;
        }
    }

    let mut search = Search {
        cost: cost.values(),
        n,
        row_units,
        current: vec![0; m * n],
        col_left: vec![col_units; n],
        best: None,
    };
    search.visit(0, row_units, 0.0);
    let (_, flows) = search
        .best
        .expect("transport polytope on the lcm grid is never empty");
    let values = Array2::from_shape_fn((m, n), |(i, j)| flows[i * n + j] as f64 / units as f64);
    let objective = cost.objective(&values);
    Ok(TransportPlan { values, objective })
}

pub(crate) fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

const NONE: usize = usize::MAX;
const STATE_TREE: i8 = 0;
const STATE_LOWER: i8 = 1;
const DIR_UP: i64 = 1;
const DIR_DOWN: i64 = -1;
/// Floor for the pricing tolerance on scaled reduced costs.
const PIVOT_EPS: f64 = 1e-12;

/// Primal network simplex with a strongly feasible spanning tree stored as
/// parent / thread / successor-count arrays, and block-search pricing over
/// arcs in row-major `(source, target)` order. Arcs are uncapacitated.
struct NetworkSimplex {
    search_arc_num: usize,
    source: Vec<usize>,
    target: Vec<usize>,
    cost: Vec<f64>,
    flow: Vec<i64>,
    state: Vec<i8>,

    parent: Vec<usize>,
    pred: Vec<usize>,
    pred_dir: Vec<i64>,
    thread: Vec<usize>,
    rev_thread: Vec<usize>,
    succ_num: Vec<usize>,
    last_succ: Vec<usize>,
    pi: Vec<f64>,
    dirty_revs: Vec<usize>,

    block_size: usize,
    next_arc: usize,
    pivot_eps: f64,

    in_arc: usize,
    join: usize,
    u_in: usize,
    v_in: usize,
    u_out: usize,
    delta: i64,
}

impl NetworkSimplex {
    fn new(costs: &Array2<f64>, scale: f64, supply: i64, demand: i64) -> Self {
        let (m, n) = costs.dim();
        let node_num = m + n;
        let arc_num = m * n;
        let all_arc_num = arc_num + node_num;
        let root = node_num;

        let mut source = Vec::with_capacity(all_arc_num);
        let mut target = Vec::with_capacity(all_arc_num);
        let mut cost = Vec::with_capacity(all_arc_num);
        for i in 0..m {
            for j in 0..n {
                source.push(i);
                target.push(m + j);
                cost.push(costs[(i, j)] / scale);
            }
        }
        source.resize(all_arc_num, 0);
        target.resize(all_arc_num, 0);
        cost.resize(all_arc_num, 0.0);

        let mut ns = NetworkSimplex {

            search_arc_num: arc_num,
            source,
            target,
            cost,
            flow: vec![0; all_arc_num],
            state: vec![STATE_LOWER; all_arc_num],
            parent: vec![NONE; node_num + 1],
            pred: vec![NONE; node_num + 1],
            pred_dir: vec![0; node_num + 1],
            thread: vec![0; node_num + 1],
            rev_thread: vec![0; node_num + 1],
            succ_num: vec![0; node_num + 1],
            last_succ: vec![0; node_num + 1],
            pi: vec![0.0; node_num + 1],
            dirty_revs: Vec::new(),
            block_size: ((arc_num as f64).sqrt().ceil() as usize).max(10),
            next_arc: 0,
            pivot_eps: PIVOT_EPS,
            in_arc: 0,
            join: 0,
            u_in: 0,
            v_in: 0,
            u_out: 0,
            delta: 0,
        };

        // artificial cost dominates any path through real arcs (scaled costs <= 1)
        let art_cost = (1.0 + 1.0) * node_num as f64;
        // potentials can carry artificial offsets; keep the tolerance above
        // the cancellation error of c + pi_s - pi_t
        ns.pivot_eps = PIVOT_EPS.max(64.0 * f64::EPSILON * art_cost);

        ns.thread[root] = 0;
        ns.rev_thread[0] = root;
        ns.succ_num[root] = node_num + 1;
        ns.last_succ[root] = root - 1;
        ns.pi[root] = 0.0;

        for u in 0..node_num {
            let e = arc_num + u;
            ns.parent[u] = root;
            ns.pred[u] = e;
            ns.thread[u] = u + 1;
            ns.rev_thread[u + 1] = u;
            ns.succ_num[u] = 1;
            ns.last_succ[u] = u;
            ns.state[e] = STATE_TREE;
            if u < m {
                ns.pred_dir[u] = DIR_UP;
                ns.pi[u] = 0.0;
                ns.source[e] = u;
                ns.target[e] = root;
                ns.flow[e] = supply;
                ns.cost[e] = 0.0;
            } else {
                ns.pred_dir[u] = DIR_DOWN;
                ns.pi[u] = art_cost;
                ns.source[e] = root;
                ns.target[e] = u;
                ns.flow[e] = demand;
                ns.cost[e] = art_cost;
            }
        }
        ns
    }

    fn run(&mut self) {
        while self.find_entering_arc() {
            self.find_join_node();
            self.find_leaving_arc();
            self.change_flow();
            self.update_tree_structure();
            self.update_potential();
        }
        debug_assert!(
            (self.search_arc_num..self.flow.len()).all(|e| self.flow[e] == 0),
            "artificial arcs still carry flow"
        );
    }

    #[inline]
    fn reduced_cost(&self, e: usize) -> f64 {
        f64::from(self.state[e]) * (self.cost[e] + self.pi[self.source[e]] - self.pi[self.target[e]])
    }

    fn find_entering_arc(&mut self) -> bool {
        let mut min = -self.pivot_eps;
        let mut found = false;
        let mut cnt = self.block_size;
        let mut e = self.next_arc;
        for _ in 0..self.search_arc_num {
            let c = self.reduced_cost(e);
            if c < min {
                min = c;
                self.in_arc = e;
                found = true;
            }
            e += 1;
            if e == self.search_arc_num {
                e = 0;
            }
            cnt -= 1;
            if cnt == 0 {
                if found {
                    self.next_arc = e;
                    return true;
                }
                cnt = self.block_size;
            }
        }
        if found {
            self.next_arc = e;
        }
        found
    }

    fn find_join_node(&mut self) {
        let mut u = self.source[self.in_arc];
        let mut v = self.target[self.in_arc];
        while u != v {
            if self.succ_num[u] < self.succ_num[v] {
                u = self.parent[u];
            } else {
                v = self.parent[v];
            }
        }
        self.join = u;
    }

    fn find_leaving_arc(&mut self) {
        // entering arcs are always at their lower bound (uncapacitated)
        let first = self.source[self.in_arc];
        let second = self.target[self.in_arc];
        let mut delta = i64::MAX;
        let mut result = 0;

        let mut u = first;
        while u != self.join {
            let e = self.pred[u];
            if self.pred_dir[u] == DIR_UP && self.flow[e] < delta {
                delta = self.flow[e];
                self.u_out = u;
                result = 1;
            }
            u = self.parent[u];
        }
        let mut u = second;
        while u != self.join {
            let e = self.pred[u];
            if self.pred_dir[u] == DIR_DOWN && self.flow[e] <= delta {
                delta = self.flow[e];
                self.u_out = u;
                result = 2;
            }
            u = self.parent[u];
        }
        assert!(result != 0, "unbounded cycle in transportation problem");
        if result == 1 {
            self.u_in = first;
            self.v_in = second;
        } else {
            self.u_in = second;
            self.v_in = first;
        }
        self.delta = delta;
    }

    fn change_flow(&mut self) {
        let val = self.delta;
        if val > 0 {
            self.flow[self.in_arc] += val;
            let mut u = self.source[self.in_arc];
            while u != self.join {
                self.flow[self.pred[u]] -= self.pred_dir[u] * val;
                u = self.parent[u];
            }
            let mut u = self.target[self.in_arc];
            while u != self.join {
                self.flow[self.pred[u]] += self.pred_dir[u] * val;
                u = self.parent[u];
            }
        }
        self.state[self.in_arc] = STATE_TREE;
        let out = self.pred[self.u_out];
        debug_assert_eq!(self.flow[out], 0);
        self.state[out] = STATE_LOWER;
    }

    fn update_tree_structure(&mut self) {
        let (u_in, v_in, u_out, join, in_arc) =
            (self.u_in, self.v_in, self.u_out, self.join, self.in_arc);
        let old_rev_thread = self.rev_thread[u_out];
        let old_succ_num = self.succ_num[u_out];
        let old_last_succ = self.last_succ[u_out];
        let v_out = self.parent[u_out];

        if u_in == u_out {
            self.parent[u_in] = v_in;
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = if u_in == self.source[in_arc] { DIR_UP } else { DIR_DOWN };

            if self.thread[v_in] != u_out {
                let mut after = self.thread[old_last_succ];
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
                after = self.thread[v_in];
                self.thread[v_in] = u_out;
                self.rev_thread[u_out] = v_in;
                self.thread[old_last_succ] = after;
                self.rev_thread[after] = old_last_succ;
            }
        } else {
            let thread_continue = if old_rev_thread == v_in {
                self.thread[old_last_succ]
            } else {
                self.thread[v_in]
            };

            // re-hang the stem u_in .. u_out under v_in
            let mut stem = u_in;
            let mut par_stem = v_in;
            let mut last = self.last_succ[u_in];
            let mut after = self.thread[last];
            self.thread[v_in] = u_in;
            self.dirty_revs.clear();
            self.dirty_revs.push(v_in);
            while stem != u_out {
                let next_stem = self.parent[stem];
                self.thread[last] = next_stem;
                self.dirty_revs.push(last);

                let before = self.rev_thread[stem];
                self.thread[before] = after;
                self.rev_thread[after] = before;

                self.parent[stem] = par_stem;
                par_stem = stem;
                stem = next_stem;

                last = if self.last_succ[stem] == self.last_succ[par_stem] {
                    self.rev_thread[par_stem]
                } else {
                    self.last_succ[stem]
                };
                after = self.thread[last];
            }
            self.parent[u_out] = par_stem;
            self.thread[last] = thread_continue;
            self.rev_thread[thread_continue] = last;
            self.last_succ[u_out] = last;

            if old_rev_thread != v_in {
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
            }

            for k in 0..self.dirty_revs.len() {
                let u = self.dirty_revs[k];
                let t = self.thread[u];
                self.rev_thread[t] = u;
            }

            let mut tmp_sc = 0usize;
            let tmp_ls = self.last_succ[u_out];
            let mut u = u_out;
            while u != u_in {
                let p = self.parent[u];
                self.pred[u] = self.pred[p];
                self.pred_dir[u] = -self.pred_dir[p];
                // succ_num[p] > succ_num[u] before the swap; track the new
                // subtree sizes along the reversed stem
                tmp_sc = tmp_sc + self.succ_num[u] - self.succ_num[p];
                self.succ_num[u] = tmp_sc;
                self.last_succ[p] = tmp_ls;
                u = p;
            }
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = if u_in == self.source[in_arc] { DIR_UP } else { DIR_DOWN };
            self.succ_num[u_in] = old_succ_num;
        }

        let up_limit_out = if self.last_succ[join] == v_in { join } else { NONE };
        let last_succ_out = self.last_succ[u_out];
        let mut u = v_in;
        while u != NONE && self.last_succ[u] == v_in {
            self.last_succ[u] = last_succ_out;
            u = self.parent[u];
        }

        if join != old_rev_thread && v_in != old_rev_thread {
            let mut u = v_out;
            while u != up_limit_out && u != NONE && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = old_rev_thread;
                u = self.parent[u];
            }
        } else if last_succ_out != old_last_succ {
            let mut u = v_out;
            while u != up_limit_out && u != NONE && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = last_succ_out;
                u = self.parent[u];
            }
        }

        let mut u = v_in;
        while u != join {
            self.succ_num[u] += old_succ_num;
            u = self.parent[u];
        }
        let mut u = v_out;
        while u != join {
            self.succ_num[u] -= old_succ_num;
            u = self.parent[u];
        }
    }

    fn update_potential(&mut self) {
        let u_in = self.u_in;
        let sigma = self.pi[self.v_in] - self.pi[u_in] - self.pred_dir[u_in] as f64 * self.cost[self.in_arc];
        let end = self.thread[self.last_succ[u_in]];
        let mut u = u_in;
        while u != end {
            self.pi[u] += sigma;
            u = self.thread[u];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cost(rng: &mut ChaCha8Rng, m: usize, n: usize) -> CostMatrix {
        CostMatrix::new(Array2::from_shape_fn((m, n), |_| rng.gen_range(0.0..10.0))).unwrap()
    }

    #[test]
    fn single_cell_forced() {
        let cost = CostMatrix::new(array![[7.0]]).unwrap();
        let plan = solve_ot(&cost);
        assert_eq!(plan.values, array![[1.0]]);
        assert_eq!(plan.objective, 7.0);
        assert_eq!(oracle_ot(&cost).unwrap().objective, 7.0);
    }

    #[test]
    fn zero_cost_diagonal() {
        let cost = CostMatrix::new(array![[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let plan = solve_ot(&cost);
        assert_eq!(plan.values, array![[0.5, 0.0], [0.0, 0.5]]);
        assert_eq!(plan.objective, 0.0);
        assert_eq!(oracle_ot(&cost).unwrap().objective, 0.0);
    }

    #[test]
    fn rectangular_two_by_three_matches_oracle() {
        let cost = CostMatrix::new(array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).unwrap();
        let plan = solve_ot(&cost);
        let oracle = oracle_ot(&cost).unwrap();
        // every feasible plan has the same value here: rows and columns are additive
        assert_abs_diff_eq!(oracle.objective, 3.5, epsilon = 1e-12);
        assert_abs_diff_eq!(plan.objective, oracle.objective, epsilon = 1e-9);
        assert!(plan.marginal_error() < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(CostMatrix::new(array![[f64::NAN]]).is_err());
        assert!(CostMatrix::new(array![[f64::INFINITY, 1.0]]).is_err());
        assert!(CostMatrix::new(array![[-1.0]]).is_err());
        assert!(CostMatrix::new(Array2::zeros((0, 3))).is_err());
        assert!(CostMatrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn oracle_guard() {
        let cost = CostMatrix::new(Array2::ones((5, 7))).unwrap();
        assert!(matches!(oracle_ot(&cost), Err(Error::OracleGuard { .. })));
        let cost = CostMatrix::new(Array2::ones((3, 4))).unwrap();
        assert!(oracle_ot(&cost).is_ok());
    }

    #[test]
    fn seeded_three_by_four_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let cost = random_cost(&mut rng, 3, 4);
        let plan = solve_ot(&cost);
        let oracle = oracle_ot(&cost).unwrap();
        assert_abs_diff_eq!(plan.objective, oracle.objective, epsilon = 1e-9);
    }

    #[test]
    fn larger_instances_have_dual_certificates() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(m, n) in &[(40, 7), (13, 50), (100, 100), (300, 30)] {
            let cost = random_cost(&mut rng, m, n);
            let (plan, pot) = solve_ot_with_potentials(&cost);
            assert!(plan.marginal_error() < 1e-9, "{m}x{n}");
            assert!(pot.max_violation(&cost) < 1e-9, "{m}x{n}");
            assert_abs_diff_eq!(plan.objective, pot.dual_objective(), epsilon = 1e-9);
            for ((i, j), &p) in plan.values.indexed_iter() {
                if p > 0.0 {
                    let reduced = cost.values()[(i, j)] - pot.row[i] - pot.col[j];
                    assert!(reduced.abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn entries_bounded_by_smaller_marginal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cost = random_cost(&mut rng, 6, 9);
        let plan = solve_ot(&cost);
        let cap = (1.0f64 / 6.0).min(1.0 / 9.0);
        assert!(plan.values.iter().all(|&p| (0.0..=cap + 1e-15).contains(&p)));
    }

    #[test]
    fn deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cost = random_cost(&mut rng, 30, 20);
        assert_eq!(solve_ot(&cost), solve_ot(&cost));
    }

    #[test]
    fn all_zero_cost() {
        let cost = CostMatrix::new(Array2::zeros((4, 6))).unwrap();
        let plan = solve_ot(&cost);
        assert_eq!(plan.objective, 0.0);
        assert!(plan.marginal_error() < 1e-12);
    }
}
