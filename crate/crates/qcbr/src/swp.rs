//! Social Workers' Problem: instance model, QUBO construction over route
//! variables x_ij, Ising mapping, route decoding, partition class counting
//! and the exhaustive oracle used for labels and verification.
//!
//! Node indexing: without a depot the nodes are the patients 0..n; with a
//! depot the depot is node 0 and patients occupy nodes 1..=n. One binary
//! variable per ordered node pair (i ≠ j), row-major with the diagonal
//! skipped, so the variable count is n(n−1) without depot and (n+1)n with.

use crate::error::{QcbrError, Result};
use crate::vqe::IsingProblem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const SLOT_MINUTES: f64 = 30.0;
pub const WEEK_MINUTES: f64 = 7.0 * 24.0 * 60.0;
pub const DAY_MINUTES: f64 = 24.0 * 60.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Patient {
    pub x: f64,
    pub y: f64,
    /// Visit start, minutes from week start, on the 30-minute grid.
    pub tau_start: f64,
    pub tau_end: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleInstance {
    pub patients: Vec<Patient>,
    pub num_workers: usize,
    /// Time-window weight ε.
    pub epsilon: f64,
    /// Lagrange multiplier A; must exceed every edge weight.
    pub penalty_a: f64,
    pub include_depot: bool,
    pub depot: (f64, f64),
}

impl ScheduleInstance {
    pub fn num_patients(&self) -> usize {
        self.patients.len()
    }

    /// Total node count for the route-variable layout.
    pub fn num_nodes(&self) -> usize {
        self.num_patients() + usize::from(self.include_depot)
    }

    pub fn num_route_vars(&self) -> usize {
        let nn = self.num_nodes();
        nn * (nn - 1)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_patients();
        if n == 0 {
            return Err(QcbrError::invalid("instance has no patients"));
        }
        if self.num_workers < 1 || self.num_workers > n {
            return Err(QcbrError::Infeasible(format!(
                "{} workers for {n} patients",
                self.num_workers
            )));
        }
        if self.epsilon < 0.0 {
            return Err(QcbrError::invalid("epsilon must be >= 0"));
        }
        for p in &self.patients {
            for t in [p.tau_start, p.tau_end] {
                if (t / SLOT_MINUTES).fract().abs() > 1e-9 {
                    return Err(QcbrError::invalid("times must sit on the 30-minute grid"));
                }
            }
        }
        Ok(())
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (&self.patients[i], &self.patients[j]);
        ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
    }

    fn depot_distance(&self, i: usize) -> f64 {
        let p = &self.patients[i];
        ((p.x - self.depot.0).powi(2) + (p.y - self.depot.1).powi(2)).sqrt()
    }

    /// (d_min, d_max) over distinct patient pairs.
    pub fn distance_range(&self) -> (f64, f64) {
        let n = self.num_patients();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.distance(i, j);
                lo = lo.min(d);
                hi = hi.max(d);
            }
        }
        (lo, hi)
    }

    /// Edge weight g_ij = d_ij + ε(τ_i−τ_j)²/(d_max−d_min) between patients.
    pub fn edge_weight(&self, i: usize, j: usize) -> Result<f64> {
        if i == j || i >= self.num_patients() || j >= self.num_patients() {
            return Err(QcbrError::invalid("edge endpoints must be distinct patients"));
        }
        let d = self.distance(i, j);
        if self.epsilon == 0.0 {
            return Ok(d);
        }
        let (lo, hi) = self.distance_range();
        if hi - lo <= 0.0 {
            return Err(QcbrError::Degenerate(
                "d_max == d_min; time-window term divides by zero".into(),
            ));
        }
        let dt = self.patients[i].tau_start - self.patients[j].tau_start;
        Ok(d + self.epsilon * dt * dt / (hi - lo))
    }

    pub fn max_edge_weight(&self) -> Result<f64> {
        let n = self.num_patients();
        let mut hi = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    hi = hi.max(self.edge_weight(i, j)?);
                }
            }
        }
        Ok(hi)
    }

    /// Flat variable index of the ordered node pair (i, j).
    pub fn var_index(&self, i: usize, j: usize) -> usize {
        debug_assert_ne!(i, j);
        let nn = self.num_nodes();
        i * (nn - 1) + if j < i { j } else { j - 1 }
    }

    /// Inverse of `var_index`.
    pub fn var_pair(&self, index: usize) -> (usize, usize) {
        let nn = self.num_nodes();
        let i = index / (nn - 1);
        let r = index % (nn - 1);
        (i, if r < i { r } else { r + 1 })
    }

    /// Direct evaluation of the scheduling Hamiltonian on a route-variable
    /// assignment: edge costs plus A-weighted degree penalties (and the
    /// depot k-degree penalties when the depot is modeled).
    pub fn hamiltonian_energy(&self, bits: &[u8]) -> Result<f64> {
        self.validate()?;
        if bits.len() != self.num_route_vars() {
            return Err(QcbrError::invalid("bit length does not match variable count"));
        }
        let n = self.num_patients();
        let nn = self.num_nodes();
        let off = usize::from(self.include_depot); // patient p is node p + off
        let x = |i: usize, j: usize| bits[self.var_index(i, j)] as f64;
        let mut e = 0.0;

        for pi in 0..n {
            for pj in 0..n {
                if pi != pj {
                    e += self.edge_weight(pi, pj)? * x(pi + off, pj + off);
                }
            }
        }
        if self.include_depot {
            for pi in 0..n {
                let d = self.depot_distance(pi);
                e += d * x(0, pi + off) + d * x(pi + off, 0);
            }
        }
        let a = self.penalty_a;
        for pi in 0..n {
            let node = pi + off;
            let out: f64 = (0..nn).filter(|&j| j != node).map(|j| x(node, j)).sum();
            let inn: f64 = (0..nn).filter(|&j| j != node).map(|j| x(j, node)).sum();
            e += a * (1.0 - out).powi(2) + a * (1.0 - inn).powi(2);
        }
        if self.include_depot {
            let k = self.num_workers as f64;
            let out: f64 = (1..nn).map(|j| x(0, j)).sum();
            let inn: f64 = (1..nn).map(|j| x(j, 0)).sum();
            e += a * (k - out).powi(2) + a * (k - inn).powi(2);
        }
        Ok(e)
    }
}

/// Binary adjacency matrix over the instance's nodes, zero diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteMatrix {
    pub num_nodes: usize,
    /// Flat route-variable bits, same layout as `ScheduleInstance::var_index`.
    pub bits: Vec<u8>,
}

impl RouteMatrix {
    pub fn get(&self, i: usize, j: usize) -> u8 {
        if i == j {
            return 0;
        }
        let nn = self.num_nodes;
        self.bits[i * (nn - 1) + if j < i { j } else { j - 1 }]
    }
}

/// QUBO over the route variables: constant + Σ c_i x_i + Σ q_ij x_i x_j.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SwpQubo {
    pub num_vars: usize,
    pub linear: Vec<f64>,
    /// Upper-triangular pair coefficients (i < j).
    pub quadratic: BTreeMap<(usize, usize), f64>,
    pub constant: f64,
}

impl SwpQubo {
    pub fn energy(&self, bits: &[u8]) -> Result<f64> {
        if bits.len() != self.num_vars {
            return Err(QcbrError::invalid("bit length != num_vars"));
        }
        let mut e = self.constant;
        for (i, &c) in self.linear.iter().enumerate() {
            e += c * bits[i] as f64;
        }
        for (&(i, j), &q) in &self.quadratic {
            e += q * (bits[i] * bits[j]) as f64;
        }
        Ok(e)
    }

    fn add_linear(&mut self, i: usize, c: f64) {
        self.linear[i] += c;
    }

    fn add_quadratic(&mut self, i: usize, j: usize, q: f64) {
        debug_assert_ne!(i, j);
        let key = if i < j { (i, j) } else { (j, i) };
        *self.quadratic.entry(key).or_insert(0.0) += q;
    }

    /// Add A·(target − Σ vars)², expanded over binary variables.
    fn add_degree_penalty(&mut self, a: f64, target: f64, vars: &[usize]) {
        self.constant += a * target * target;
        for &v in vars {
            // x² = x for binary x.
            self.add_linear(v, a * (1.0 - 2.0 * target));
        }
        for (p, &u) in vars.iter().enumerate() {
            for &v in &vars[p + 1..] {
                self.add_quadratic(u, v, 2.0 * a);
            }
        }
    }
}

/// Expand the Hamiltonian into explicit QUBO coefficient maps.
pub fn build_qubo(instance: &ScheduleInstance) -> Result<SwpQubo> {
    instance.validate()?;
    let n = instance.num_patients();
    let nn = instance.num_nodes();
    let off = usize::from(instance.include_depot);
    let mut qubo = SwpQubo {
        num_vars: instance.num_route_vars(),
        linear: vec![0.0; instance.num_route_vars()],
        quadratic: BTreeMap::new(),
        constant: 0.0,
    };

    for pi in 0..n {
        for pj in 0..n {
            if pi != pj {
                let g = instance.edge_weight(pi, pj)?;
                qubo.add_linear(instance.var_index(pi + off, pj + off), g);
            }
        }
    }
    if instance.include_depot {
        for pi in 0..n {
            let d = instance.depot_distance(pi);
            qubo.add_linear(instance.var_index(0, pi + off), d);
            qubo.add_linear(instance.var_index(pi + off, 0), d);
        }
    }

    let a = instance.penalty_a;
    for pi in 0..n {
        let node = pi + off;
        let out: Vec<usize> = (0..nn)
            .filter(|&j| j != node)
            .map(|j| instance.var_index(node, j))
            .collect();
        let inn: Vec<usize> = (0..nn)
            .filter(|&j| j != node)
            .map(|j| instance.var_index(j, node))
            .collect();
        qubo.add_degree_penalty(a, 1.0, &out);
        qubo.add_degree_penalty(a, 1.0, &inn);
    }
    if instance.include_depot {
        let k = instance.num_workers as f64;
        let out: Vec<usize> = (1..nn).map(|j| instance.var_index(0, j)).collect();
        let inn: Vec<usize> = (1..nn).map(|j| instance.var_index(j, 0)).collect();
        qubo.add_degree_penalty(a, k, &out);
        qubo.add_degree_penalty(a, k, &inn);
    }
    Ok(qubo)
}

/// Substitute x = (1 − z)/2 to obtain the Ising form.
pub fn qubo_to_ising(qubo: &SwpQubo) -> IsingProblem {
    let n = qubo.num_vars;
    let mut h = vec![0.0; n];
    let mut offset = qubo.constant;
    let mut j_map: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (i, &c) in qubo.linear.iter().enumerate() {
        offset += c / 2.0;
        h[i] -= c / 2.0;
    }
    for (&(i, j), &q) in &qubo.quadratic {
        offset += q / 4.0;
        h[i] -= q / 4.0;
        h[j] -= q / 4.0;
        *j_map.entry((i, j)).or_insert(0.0) += q / 4.0;
    }
    IsingProblem {
        num_vars: n,
        h,
        couplings: j_map.into_iter().map(|((i, j), v)| (i, j, v)).collect(),
        offset,
    }
}

/// Diagnostic decoding of a route-variable assignment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RouteDecode {
    pub matrix: RouteMatrix,
    /// Patient groups (0-based patient indices), each ordered by tau_start.
    pub routes: Vec<Vec<usize>>,
    /// Patients whose out-degree (resp. in-degree) differs from 1.
    pub out_degree_violations: Vec<usize>,
    pub in_degree_violations: Vec<usize>,
    /// Number of patient-only directed cycles found.
    pub cycles: usize,
}

impl RouteDecode {
    pub fn has_violations(&self) -> bool {
        !self.out_degree_violations.is_empty()
            || !self.in_degree_violations.is_empty()
            || self.cycles > 0
    }

    /// True when the assignment is a clean cover by exactly `num_workers`
    /// directed paths: no branching, no cycles, every patient in one path.
    /// Path endpoints (degree 0 on one side) are fine here even though the
    /// degree diagnostics flag them.
    pub fn forms_path_cover(&self, num_workers: usize) -> bool {
        if self.routes.len() != num_workers || self.cycles > 0 {
            return false;
        }
        let nn = self.matrix.num_nodes;
        let off = nn - self.routes.iter().map(Vec::len).sum::<usize>();
        let branching = (0..nn - off).any(|p| {
            let out =
                (0..nn).filter(|&j| j != p + off && self.matrix.get(p + off, j) == 1).count();
            let inn =
                (0..nn).filter(|&j| j != p + off && self.matrix.get(j, p + off) == 1).count();
            out > 1 || inn > 1
        });
        !branching
    }

    /// Canonical partition (routes sorted by smallest member) when the
    /// groups cover all patients in exactly `m` routes.
    pub fn partition(&self, num_workers: usize) -> Option<Vec<Vec<usize>>> {
        if self.routes.len() != num_workers {
            return None;
        }
        let mut routes: Vec<Vec<usize>> = self
            .routes
            .iter()
            .map(|r| {
                let mut s = r.clone();
                s.sort_unstable();
                s
            })
            .collect();
        routes.sort();
        Some(routes)
    }
}

/// Reshape bits into the adjacency matrix and group patients into weakly
/// connected components of the patient subgraph; depot edges only delimit
/// routes. Constraint violations are reported, never fatal.
pub fn decode_routes(instance: &ScheduleInstance, bits: &[u8]) -> Result<RouteDecode> {
    if bits.len() != instance.num_route_vars() {
        return Err(QcbrError::invalid("bit length does not match variable count"));
    }
    let n = instance.num_patients();
    let nn = instance.num_nodes();
    let off = usize::from(instance.include_depot);
    let matrix = RouteMatrix { num_nodes: nn, bits: bits.to_vec() };

    let mut out_deg = vec![0usize; n];
    let mut in_deg = vec![0usize; n];
    for pi in 0..n {
        for j in 0..nn {
            if j != pi + off && matrix.get(pi + off, j) == 1 {
                out_deg[pi] += 1;
            }
            if j != pi + off && matrix.get(j, pi + off) == 1 {
                in_deg[pi] += 1;
            }
        }
    }

    // Union patients joined by a direct edge (either direction).
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for pi in 0..n {
        for pj in 0..n {
            if pi != pj && matrix.get(pi + off, pj + off) == 1 {
                let (a, b) = (find(&mut parent, pi), find(&mut parent, pj));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for pi in 0..n {
        let root = find(&mut parent, pi);
        groups.entry(root).or_default().push(pi);
    }
    let mut routes: Vec<Vec<usize>> = groups.into_values().collect();
    for r in routes.iter_mut() {
        r.sort_by(|&a, &b| {
            instance.patients[a]
                .tau_start
                .partial_cmp(&instance.patients[b].tau_start)
                .unwrap()
                .then(a.cmp(&b))
        });
    }
    routes.sort_by_key(|r| r.iter().copied().min().unwrap());

    // A directed patient cycle: walk successors until repetition.
    let mut cycles = 0usize;
    let mut seen = vec![false; n];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut trail = Vec::new();
        let mut cur = start;
        loop {
            if trail.contains(&cur) {
                cycles += 1;
                break;
            }
            trail.push(cur);
            let next = (0..n).find(|&pj| pj != cur && matrix.get(cur + off, pj + off) == 1);
            match next {
                Some(pj) if !seen[pj] => cur = pj,
                _ => break,
            }
        }
        for &t in &trail {
            seen[t] = true;
        }
    }

    Ok(RouteDecode {
        matrix,
        routes,
        out_degree_violations: (0..n).filter(|&i| out_deg[i] != 1).collect(),
        in_degree_violations: (0..n).filter(|&i| in_deg[i] != 1).collect(),
        cycles,
    })
}

/// Route-variable bits encoding a partition as tau-ordered paths (plus depot
/// legs when the depot is modeled).
pub fn partition_to_bits(instance: &ScheduleInstance, partition: &[Vec<usize>]) -> Vec<u8> {
    let off = usize::from(instance.include_depot);
    let mut bits = vec![0u8; instance.num_route_vars()];
    for route in partition {
        let mut ordered = route.clone();
        ordered.sort_by(|&a, &b| {
            instance.patients[a]
                .tau_start
                .partial_cmp(&instance.patients[b].tau_start)
                .unwrap()
                .then(a.cmp(&b))
        });
        for w in ordered.windows(2) {
            bits[instance.var_index(w[0] + off, w[1] + off)] = 1;
        }
        if instance.include_depot && !ordered.is_empty() {
            bits[instance.var_index(0, ordered[0] + off)] = 1;
            bits[instance.var_index(*ordered.last().unwrap() + off, 0)] = 1;
        }
    }
    bits
}

/// Exhaustive optimum over partitions of the patients into exactly m
/// non-empty unordered routes, visit order ascending by tau_start.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BruteForceSolution {
    /// Canonical partition: each route sorted, routes sorted by smallest member.
    pub partition: Vec<Vec<usize>>,
    pub cost: f64,
    pub class_label: usize,
    pub routes: RouteMatrix,
}

/// Cost of one partition under the tau-ordered visit rule.
pub fn partition_cost(instance: &ScheduleInstance, partition: &[Vec<usize>]) -> Result<f64> {
    let mut total = 0.0;
    for route in partition {
        let mut ordered = route.clone();
        ordered.sort_by(|&a, &b| {
            instance.patients[a]
                .tau_start
                .partial_cmp(&instance.patients[b].tau_start)
                .unwrap()
                .then(a.cmp(&b))
        });
        for w in ordered.windows(2) {
            total += instance.edge_weight(w[0], w[1])?;
        }
        if instance.include_depot && !ordered.is_empty() {
            total += instance.depot_distance(ordered[0]);
            total += instance.depot_distance(*ordered.last().unwrap());
        }
    }
    Ok(total)
}

/// All partitions of n items into exactly m non-empty blocks, in canonical
/// (restricted-growth) enumeration order.
pub fn enumerate_partitions(n: usize, m: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    fn rec(rgs: &mut Vec<usize>, pos: usize, max_used: usize, n: usize, m: usize, out: &mut Vec<Vec<Vec<usize>>>) {
        if pos == n {
            if max_used + 1 == m {
                let mut blocks = vec![Vec::new(); m];
                for (i, &b) in rgs.iter().enumerate() {
                    blocks[b].push(i);
                }
                out.push(blocks);
            }
            return;
        }
        for b in 0..=(max_used + 1).min(m - 1) {
            rgs[pos] = b;
            rec(rgs, pos + 1, max_used.max(b), n, m, out);
        }
    }
    if n == 0 || m == 0 || m > n {
        return out;
    }
    rec(&mut rgs, 1, 0, n, m, &mut out); // item 0 is always in block 0
    out
}

pub fn brute_force_solve(instance: &ScheduleInstance) -> Result<BruteForceSolution> {
    instance.validate()?;
    let n = instance.num_patients();
    let m = instance.num_workers;
    if n > 8 {
        return Err(QcbrError::Capacity("oracle bound is 8 patients".into()));
    }
    let partitions = enumerate_partitions(n, m);
    if partitions.is_empty() {
        return Err(QcbrError::Infeasible(format!("no partition of {n} patients into {m} routes")));
    }
    let mut best: Option<(usize, f64)> = None;
    for (idx, p) in partitions.iter().enumerate() {
        let cost = partition_cost(instance, p)?;
        if best.map_or(true, |(_, c)| cost < c) {
            best = Some((idx, cost));
        }
    }
    let (idx, cost) = best.unwrap();
    let partition = canonicalize_partition(&partitions[idx]);
    let bits = partition_to_bits(instance, &partition);
    Ok(BruteForceSolution {
        class_label: idx,
        cost,
        routes: RouteMatrix { num_nodes: instance.num_nodes(), bits },
        partition,
    })
}

/// Sort each route ascending and routes by smallest member.
pub fn canonicalize_partition(partition: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut p: Vec<Vec<usize>> = partition
        .iter()
        .map(|r| {
            let mut s = r.clone();
            s.sort_unstable();
            s
        })
        .collect();
    p.sort();
    p
}

/// Rank of a partition within the canonical enumeration of S(n, m) partitions.
pub fn class_label(n: usize, m: usize, partition: &[Vec<usize>]) -> Result<usize> {
    let canon = canonicalize_partition(partition);
    enumerate_partitions(n, m)
        .iter()
        .position(|p| canonicalize_partition(p) == canon)
        .ok_or_else(|| QcbrError::invalid("partition does not match (n, m)"))
}

/// Partitions of n labeled patients into m non-empty unlabeled routes
/// (Stirling number of the second kind); 0 when m > n.
pub fn num_solution_classes(n: usize, m: usize) -> u64 {
    if m == 0 || m > n {
        return 0;
    }
    let mut row = vec![0u64; m + 1];
    row[0] = 1; // S(0,0)
    for _ in 1..=n {
        for k in (1..=m).rev() {
            row[k] = k as u64 * row[k] + row[k - 1];
        }
        row[0] = 0;
    }
    row[m]
}

/// ceil(log2 of the class count), floored at one qubit.
pub fn classifier_qubits(n: usize, m: usize) -> usize {
    let classes = num_solution_classes(n, m).max(1);
    let mut q = 0usize;
    while (1u64 << q) < classes {
        q += 1;
    }
    q.max(1)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetParams {
    pub num_patients: usize,
    pub num_workers: usize,
    pub num_cases: usize,
    pub seed: u64,
    /// 0 = one wide daily band; 1 = narrow bands replicated across the week.
    pub overlap_degree: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseRecord {
    pub features: Vec<f64>,
    pub label: usize,
    pub instance: ScheduleInstance,
    pub oracle: BruteForceSolution,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dataset {
    pub params: DatasetParams,
    /// Patient coordinates, fixed for the whole dataset.
    pub coordinates: Vec<(f64, f64)>,
    pub cases: Vec<CaseRecord>,
}

impl Dataset {
    pub fn samples(&self) -> Vec<crate::vqc::LabeledSample> {
        self.cases
            .iter()
            .map(|c| crate::vqc::LabeledSample { features: c.features.clone(), label: c.label })
            .collect()
    }

    /// CSV of features and labels for external inspection.
    pub fn to_csv(&self) -> String {
        let n = self.params.num_patients;
        let mut header: Vec<String> = Vec::new();
        for i in 1..=n {
            header.push(format!("sT{i}"));
            header.push(format!("eT{i}"));
        }
        header.push("label".into());
        let mut out = header.join(",") + "\n";
        for c in &self.cases {
            let row: Vec<String> = c
                .features
                .iter()
                .map(|v| v.to_string())
                .chain(std::iter::once(c.label.to_string()))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn class_histogram(&self) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for c in &self.cases {
            *hist.entry(c.label).or_insert(0) += 1;
        }
        hist
    }
}

/// Raw 2n feature vector: per-patient (tau_start, tau_end) mapped into
/// [-1, 1] over the day.
pub fn instance_features(instance: &ScheduleInstance) -> Vec<f64> {
    instance
        .patients
        .iter()
        .flat_map(|p| [p.tau_start, p.tau_end])
        .map(|t| 2.0 * t / DAY_MINUTES - 1.0)
        .collect()
}

/// Generate a labeled benchmark dataset. Coordinates are drawn once per
/// dataset on a 10×10 km grid. Per case, each patient's start time lands on
/// the 30-minute grid inside a band around that patient's fixed base slot;
/// `overlap_degree` widens the bands until the per-patient regions — and
/// with them the solution classes — intersect. Visit durations vary
/// independently of the label.
pub fn generate_dataset(params: &DatasetParams) -> Result<Dataset> {
    let n = params.num_patients;
    let m = params.num_workers;
    if n == 0 || n > 8 {
        return Err(QcbrError::invalid("patient count must be 1..=8"));
    }
    if m < 1 || m > n {
        return Err(QcbrError::Infeasible(format!("{m} workers for {n} patients")));
    }
    if !(0.0..=1.0).contains(&params.overlap_degree) {
        return Err(QcbrError::invalid("overlap_degree must be in [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let coordinates: Vec<(f64, f64)> =
        (0..n).map(|_| (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0))).collect();

    // Visit bands live in 8:00-18:00; the whole schedule may slide a few
    // hours within the day, which changes no τ difference and therefore no
    // label — the repeated-schedule effect that overlapped datasets show.
    const DAY_SLOTS: std::ops::Range<i64> = 16..36;
    // Each patient keeps a narrow band around a fixed base slot; overlap_degree
    // loosens how tightly cases cluster by sliding whole schedules and by
    // widening the (label-irrelevant) visit-duration spread, so high-overlap
    // datasets have heavily intersecting windows across cases.
    let half_width = 3i64;
    let shift_slots = (params.overlap_degree * 8.0).round() as i64;
    let max_duration = 1 + (params.overlap_degree * 9.0).round() as i64;
    let base_slots: Vec<i64> =
        (0..n).map(|_| rng.gen_range(DAY_SLOTS.start..DAY_SLOTS.end)).collect();

    let mut cases = Vec::with_capacity(params.num_cases);
    for case_idx in 0..params.num_cases {
        let mut crng =
            ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(case_idx as u64 + 1)));
        let shift = crng.gen_range(-shift_slots..=shift_slots);
        let mut patients = Vec::with_capacity(n);
        for i in 0..n {
            let jitter = crng.gen_range(-half_width..=half_width);
            let slot = (base_slots[i].clamp(DAY_SLOTS.start, DAY_SLOTS.end - 1) + jitter + shift)
                .clamp(0, 47);
            let duration_slots = crng.gen_range(1..=max_duration).min(48 - slot);
            let start = slot as f64 * SLOT_MINUTES;
            patients.push(Patient {
                x: coordinates[i].0,
                y: coordinates[i].1,
                tau_start: start,
                tau_end: start + duration_slots as f64 * SLOT_MINUTES,
            });
        }
        let mut instance = ScheduleInstance {
            patients,
            num_workers: m,
            epsilon: params.epsilon,
            penalty_a: 0.0,
            include_depot: false,
            depot: (0.0, 0.0),
        };
        instance.penalty_a = 1.05 * instance.max_edge_weight()?.max(1.0);
        let oracle = brute_force_solve(&instance)?;
        let features = instance_features(&instance);
        cases.push(CaseRecord { features, label: oracle.class_label, instance, oracle });
    }
    Ok(Dataset { params: params.clone(), coordinates, cases })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn toy_instance(n: usize, m: usize, epsilon: f64, include_depot: bool) -> ScheduleInstance {
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64 * 31 + m as u64);
        let patients = (0..n)
            .map(|_| Patient {
                x: rng.gen_range(0.0..10.0),
                y: rng.gen_range(0.0..10.0),
                tau_start: 30.0 * rng.gen_range(16..36) as f64,
                tau_end: 30.0 * rng.gen_range(36..40) as f64,
            })
            .collect();
        let mut inst = ScheduleInstance {
            patients,
            num_workers: m,
            epsilon,
            penalty_a: 0.0,
            include_depot,
            depot: (5.0, 5.0),
        };
        inst.penalty_a = 1.05 * inst.max_edge_weight().unwrap().max(1.0);
        inst
    }

    #[test]
    fn edge_weight_reduces_to_distance() {
        let inst = toy_instance(3, 2, 0.0, false);
        let d = inst.distance(0, 1);
        assert_abs_diff_eq!(inst.edge_weight(0, 1).unwrap(), d, epsilon = 1e-12);

        let mut same_tau = toy_instance(3, 2, 2.5, false);
        let t = same_tau.patients[0].tau_start;
        same_tau.patients[1].tau_start = t;
        assert_abs_diff_eq!(same_tau.edge_weight(0, 1).unwrap(), same_tau.distance(0, 1), epsilon = 1e-12);
    }

    #[test]
    fn edge_weight_matches_direct_substitution() {
        let inst = toy_instance(4, 2, 1.0, false);
        let (lo, hi) = inst.distance_range();
        let dt = inst.patients[0].tau_start - inst.patients[2].tau_start;
        let expect = inst.distance(0, 2) + 1.0 * dt * dt / (hi - lo);
        assert_abs_diff_eq!(inst.edge_weight(0, 2).unwrap(), expect, epsilon = 1e-9);
    }

    #[test]
    fn degenerate_distances_error() {
        let mut inst = toy_instance(2, 1, 0.0, false);
        inst.epsilon = 1.0;
        inst.patients[1].x = inst.patients[0].x + 1.0;
        inst.patients[1].y = inst.patients[0].y;
        // single pair: d_max == d_min
        assert!(matches!(inst.edge_weight(0, 1), Err(QcbrError::Degenerate(_))));
        inst.epsilon = 0.0;
        assert!(inst.edge_weight(0, 1).is_ok());
    }

    #[test]
    fn all_zero_assignment_pays_two_a_per_patient() {
        let inst = toy_instance(3, 2, 0.0, false);
        let bits = vec![0u8; inst.num_route_vars()];
        let e = inst.hamiltonian_energy(&bits).unwrap();
        assert_abs_diff_eq!(e, inst.penalty_a * 3.0 * 2.0, epsilon = 1e-9);
    }

    #[test]
    fn qubo_matches_direct_hamiltonian_exhaustively() {
        for (n, depot) in [(3usize, false), (4, false), (2, true), (3, true)] {
            // a single patient pair has d_max == d_min, so drop the
            // time-window term there
            let eps = if n > 2 { 1.0 } else { 0.0 };
            let inst = toy_instance(n, n.min(2), eps, depot);
            let qubo = build_qubo(&inst).unwrap();
            let ising = qubo_to_ising(&qubo);
            for b in 0..(1usize << qubo.num_vars) {
                let bits: Vec<u8> =
                    (0..qubo.num_vars).map(|i| ((b >> i) & 1) as u8).collect();
                let direct = inst.hamiltonian_energy(&bits).unwrap();
                let q = qubo.energy(&bits).unwrap();
                let z = ising.energy(&bits).unwrap();
                assert_relative_eq!(direct, q, epsilon = 1e-9, max_relative = 1e-12);
                assert_relative_eq!(q, z, epsilon = 1e-9, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn qubo_to_ising_single_variable() {
        let qubo = SwpQubo {
            num_vars: 1,
            linear: vec![1.0],
            quadratic: BTreeMap::new(),
            constant: 0.0,
        };
        let ising = qubo_to_ising(&qubo);
        assert_abs_diff_eq!(ising.h[0], -0.5);
        assert_abs_diff_eq!(ising.offset, 0.5);

        let zero = SwpQubo { num_vars: 2, linear: vec![0.0; 2], quadratic: BTreeMap::new(), constant: 0.0 };
        let izero = qubo_to_ising(&zero);
        assert!(izero.h.iter().all(|&v| v == 0.0));
        assert!(izero.couplings.is_empty());
        assert_abs_diff_eq!(izero.offset, 0.0);
    }

    #[test]
    fn decode_all_zeros_flags_singletons() {
        let inst = toy_instance(3, 2, 0.0, false);
        let decode = decode_routes(&inst, &vec![0u8; 6]).unwrap();
        assert_eq!(decode.routes.len(), 3);
        assert_eq!(decode.out_degree_violations.len(), 3);
        assert_eq!(decode.cycles, 0);
    }

    #[test]
    fn decode_flags_two_cycle() {
        let inst = toy_instance(3, 2, 0.0, false);
        let mut bits = vec![0u8; 6];
        bits[inst.var_index(0, 1)] = 1;
        bits[inst.var_index(1, 0)] = 1;
        let decode = decode_routes(&inst, &bits).unwrap();
        assert!(decode.cycles >= 1);
    }

    #[test]
    fn oracle_roundtrip_decodes_cleanly() {
        let inst = toy_instance(3, 2, 1.0, false);
        let sol = brute_force_solve(&inst).unwrap();
        let decode = decode_routes(&inst, &sol.routes.bits).unwrap();
        let partition = decode.partition(2).expect("oracle must decode to 2 routes");
        assert_eq!(partition, sol.partition);
    }

    #[test]
    fn brute_force_examples() {
        // n=2, m=2: singletons, zero cost.
        let inst = toy_instance(2, 2, 0.0, false);
        let sol = brute_force_solve(&inst).unwrap();
        assert_abs_diff_eq!(sol.cost, 0.0);
        assert_eq!(sol.partition, vec![vec![0], vec![1]]);

        // n=3, m=1: forced tau order.
        let inst = toy_instance(3, 1, 0.0, false);
        let sol = brute_force_solve(&inst).unwrap();
        let mut order: Vec<usize> = vec![0, 1, 2];
        order.sort_by(|&a, &b| {
            inst.patients[a].tau_start.partial_cmp(&inst.patients[b].tau_start).unwrap().then(a.cmp(&b))
        });
        let expect = inst.edge_weight(order[0], order[1]).unwrap()
            + inst.edge_weight(order[1], order[2]).unwrap();
        assert_abs_diff_eq!(sol.cost, expect, epsilon = 1e-9);

        // infeasible
        let bad = toy_instance(2, 2, 0.0, false);
        let mut bad = bad;
        bad.num_workers = 3;
        assert!(brute_force_solve(&bad).is_err());
    }

    #[test]
    fn brute_force_is_minimum_over_all_partitions() {
        let inst = toy_instance(4, 2, 1.0, false);
        let sol = brute_force_solve(&inst).unwrap();
        let all = enumerate_partitions(4, 2);
        assert_eq!(all.len(), 7); // S(4,2)
        for p in &all {
            assert!(sol.cost <= partition_cost(&inst, p).unwrap() + 1e-12);
        }
    }

    /// Count surjections n -> m and divide by m!.
    fn surjection_classes(n: usize, m: usize) -> u64 {
        let mut count = 0u64;
        let total = (m as u64).pow(n as u32);
        for assignment in 0..total {
            let mut used = vec![false; m];
            let mut a = assignment;
            for _ in 0..n {
                used[(a % m as u64) as usize] = true;
                a /= m as u64;
            }
            if used.iter().all(|&u| u) {
                count += 1;
            }
        }
        let fact: u64 = (1..=m as u64).product();
        count / fact
    }

    #[test]
    fn class_count_matches_surjection_oracle() {
        assert_eq!(num_solution_classes(4, 1), 1);
        assert_eq!(num_solution_classes(4, 3), 6);
        assert_eq!(num_solution_classes(5, 4), 10);
        for n in 1..=7 {
            for m in 1..=n {
                assert_eq!(num_solution_classes(n, m), surjection_classes(n, m), "S({n},{m})");
            }
        }
        assert_eq!(num_solution_classes(3, 4), 0);
    }

    #[test]
    fn qubit_bookkeeping() {
        for (n, expect) in [(3usize, 6usize), (4, 12), (5, 20)] {
            let inst = toy_instance(n, 2, 0.0, false);
            assert_eq!(inst.num_route_vars(), expect);
        }
        assert_eq!(classifier_qubits(4, 3), 3);
        assert_eq!(classifier_qubits(4, 1), 1);
        assert_eq!(classifier_qubits(5, 1), 1);
    }

    #[test]
    fn class_label_examples() {
        assert_eq!(class_label(3, 3, &[vec![0], vec![1], vec![2]]).unwrap(), 0);
        let labels: Vec<usize> = enumerate_partitions(4, 3)
            .iter()
            .map(|p| class_label(4, 3, p).unwrap())
            .collect();
        assert_eq!(labels, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn dataset_generation_contract() {
        let params = DatasetParams {
            num_patients: 4,
            num_workers: 3,
            num_cases: 0,
            seed: 7,
            overlap_degree: 0.5,
            epsilon: 1.0,
        };
        assert!(generate_dataset(&params).unwrap().cases.is_empty());

        let params = DatasetParams { num_cases: 40, ..params };
        let d1 = generate_dataset(&params).unwrap();
        let d2 = generate_dataset(&params).unwrap();
        assert_eq!(d1.cases.len(), 40);
        for (a, b) in d1.cases.iter().zip(&d2.cases) {
            assert_eq!(a.features, b.features);
            assert_eq!(a.label, b.label);
        }
        assert!(d1.cases.iter().all(|c| c.label < 6));
        for c in &d1.cases {
            for p in &c.instance.patients {
                assert_abs_diff_eq!((p.tau_start / 30.0).fract(), 0.0);
            }
        }
    }
}
