use rand::Rng;
use rand_distr::{Distribution, Gamma};

use super::{DataError, Dataset};

/// Assignment of dataset rows to clients.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    client_indices: Vec<Vec<usize>>,
    weights: Vec<f64>,
}

impl Partition {
    pub fn from_indices(client_indices: Vec<Vec<usize>>) -> Self {
        let total: usize = client_indices.iter().map(Vec::len).sum();
        let weights = client_indices.iter().map(|c| c.len() as f64 / total as f64).collect();
        Self { client_indices, weights }
    }

    pub fn client_count(&self) -> usize {
        self.client_indices.len()
    }

    pub fn client_indices(&self) -> &[Vec<usize>] {
        &self.client_indices
    }

    /// `p_n = |D_n| / sum |D_i|`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

fn symmetric_dirichlet<R: Rng + ?Sized>(n: usize, concentration: f64, rng: &mut R) -> Vec<f64> {
    let gamma = Gamma::new(concentration, 1.0).expect("positive concentration");
    let draws: Vec<f64> = (0..n).map(|_| gamma.sample(rng)).collect();
    let sum: f64 = draws.iter().sum();
    if sum > 0.0 && sum.is_finite() {
        draws.into_iter().map(|g| g / sum).collect()
    } else {
        // Every gamma draw underflowed; all mass goes to one client.
        let mut q = vec![0.0; n];
        q[rng.random_range(0..n)] = 1.0;
        q
    }
}

/// Splits `total` into integer shares proportional to `q` using the
/// largest-remainder method (ties to the lowest index).
fn largest_remainder(q: &[f64], total: usize) -> Vec<usize> {
    let exact: Vec<f64> = q.iter().map(|&p| p * total as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|&e| e.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let remainders: Vec<f64> = exact.iter().zip(&counts).map(|(&e, &c)| e - c as f64).collect();
    for i in crate::topk::top_k_ranked(&remainders, total.saturating_sub(assigned).min(q.len())) {
        counts[i] += 1;
    }
    counts
}

/// Label-skew partition: for each class, client proportions are drawn from a
/// symmetric Dirichlet with concentration `a` and the class's (shuffled)
/// rows are dealt out by largest-remainder rounding. Clients left empty
/// receive one row from the currently largest client. Index lists are sorted.
pub fn dirichlet_partition<R: Rng + ?Sized>(
    data: &Dataset,
    clients: usize,
    concentration: f64,
    rng: &mut R,
) -> Result<Partition, DataError> {
    if !(concentration > 0.0 && concentration.is_finite()) {
        return Err(DataError::InvalidParameter(format!("dirichlet concentration {concentration} must be positive")));
    }
    if clients == 0 {
        return Err(DataError::InvalidParameter("at least one client is required".into()));
    }
    if clients > data.len() {
        return Err(DataError::TooManyClients { clients, samples: data.len() });
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); data.classes()];
    for (i, &y) in data.labels().iter().enumerate() {
        by_class[y].push(i);
    }
    let mut assigned: Vec<Vec<usize>> = vec![Vec::new(); clients];
    for rows in by_class.iter_mut().filter(|r| !r.is_empty()) {
        rand::seq::SliceRandom::shuffle(rows.as_mut_slice(), rng);
        let q = symmetric_dirichlet(clients, concentration, rng);
        let mut start = 0;
        for (client, count) in largest_remainder(&q, rows.len()).into_iter().enumerate() {
            assigned[client].extend_from_slice(&rows[start..start + count]);
            start += count;
        }
    }
    for empty in 0..clients {
        if assigned[empty].is_empty() {
            let donor = (0..clients)
                .max_by(|&a, &b| assigned[a].len().cmp(&assigned[b].len()).then(b.cmp(&a)))
                .expect("at least one client");
            let moved = assigned[donor].pop().expect("donor holds at least two rows");
            assigned[empty].push(moved);
        }
    }
    for c in &mut assigned {
        c.sort_unstable();
    }
    Ok(Partition::from_indices(assigned))
}
