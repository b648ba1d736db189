//! Deterministic fork-join map. Indices are split into contiguous chunks
//! and results joined in order, so the worker count changes timing only,
//! never output.

pub fn par_map<T, F>(n: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = workers.max(1).min(n.max(1));
    let chunk = n.div_ceil(workers);
    let mut out = Vec::with_capacity(n);
    std::thread::scope(|s| {
        let mut handles = Vec::new();
        for w in 0..workers {
            let lo = w * chunk;
            let hi = ((w + 1) * chunk).min(n);
            if lo >= hi {
                break;
            }
            let f = &f;
            handles.push(s.spawn(move || (lo..hi).map(|i| f(i)).collect::<Vec<T>>()));
        }
        for h in handles {
            out.extend(h.join().expect("worker panicked"));
        }
    });
    out
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(|p| p.get())
        .unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::par_map;

    #[test]
    fn ordering_is_stable_across_worker_counts() {
        let want: Vec<usize> = (0..100).map(|i| i * i).collect();
        for workers in [1, 3, 7, 100, 1000] {
            assert_eq!(par_map(100, workers, |i| i * i), want);
        }
    }

    #[test]
    fn degenerate_sizes() {
        assert!(par_map(0, 4, |i| i).is_empty());
        assert_eq!(par_map(3, 16, |i| i), vec![0, 1, 2]);
    }
}
