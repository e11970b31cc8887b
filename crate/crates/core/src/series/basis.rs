use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Monomials `x^e` in `nvars` variables with total degree at most `cap`,
/// listed in graded-lex order: by total degree, then lexicographically
/// descending in the exponent vector, so `x1` precedes `x2`.
#[derive(Debug)]
pub struct MonomialBasis {
    nvars: usize,
    cap: usize,
    exps: Vec<Vec<u32>>,
    degree_start: Vec<usize>,
    index: HashMap<Vec<u32>, usize>,
    products: OnceLock<Vec<Vec<(u32, u32)>>>,
}

impl MonomialBasis {
    fn build(nvars: usize, cap: usize) -> Self {
        let mut exps = Vec::new();
        let mut degree_start = Vec::with_capacity(cap + 2);
        for d in 0..=cap {
            degree_start.push(exps.len());
            let mut cur = vec![0u32; nvars];
            push_homogeneous(&mut exps, &mut cur, 0, d as u32);
        }
        degree_start.push(exps.len());
        let index = exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        MonomialBasis {
            nvars,
            cap,
            exps,
            degree_start,
            index,
            products: OnceLock::new(),
        }
    }

    /// Returns the process-wide basis for `(nvars, cap)`, building it once.
    pub fn shared(nvars: usize, cap: usize) -> Arc<MonomialBasis> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<MonomialBasis>>>> =
            OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry((nvars, cap))
            .or_insert_with(|| Arc::new(MonomialBasis::build(nvars, cap)))
            .clone()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponents(&self, idx: usize) -> &[u32] {
        &self.exps[idx]
    }

    pub fn all_exponents(&self) -> &[Vec<u32>] {
        &self.exps
    }

    pub fn degree(&self, idx: usize) -> usize {
        self.exps[idx].iter().map(|&e| e as usize).sum()
    }

    /// Index range of the monomials of total degree `d`.
    pub fn degree_range(&self, d: usize) -> std::ops::Range<usize> {
        if d > self.cap {
            return self.exps.len()..self.exps.len();
        }
        self.degree_start[d]..self.degree_start[d + 1]
    }

    pub fn index_of(&self, exps: &[u32]) -> Option<usize> {
        self.index.get(exps).copied()
    }

    /// For each monomial `i`, the pairs `(j, k)` with `x^i x^j = x^k` inside the cap.
    pub(crate) fn products(&self) -> &[Vec<(u32, u32)>] {
        self.products.get_or_init(|| {
            let mut table = Vec::with_capacity(self.exps.len());
            let mut buf = vec![0u32; self.nvars];
            for (i, ei) in self.exps.iter().enumerate() {
                let di = self.degree(i);
                let end = self.degree_start[self.cap - di + 1];
                let mut row = Vec::with_capacity(end);
                for (j, ej) in self.exps[..end].iter().enumerate() {
                    for v in 0..self.nvars {
                        buf[v] = ei[v] + ej[v];
                    }
                    let k = self.index[&buf];
                    row.push((j as u32, k as u32));
                }
                table.push(row);
            }
            table
        })
    }
}

fn push_homogeneous(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, var: usize, remaining: u32) {
    if cur.is_empty() {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if var + 1 == cur.len() {
        cur[var] = remaining;
        out.push(cur.clone());
        cur[var] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        cur[var] = e;
        push_homogeneous(out, cur, var + 1, remaining - e);
    }
    cur[var] = 0;
}
