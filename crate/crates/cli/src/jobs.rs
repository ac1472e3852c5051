//! Deterministic fork-join map: results come back in input order regardless
//! of worker count.

pub fn parallel_map<T, R, F>(items: &[T], jobs: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let jobs = jobs.max(1).min(items.len().max(1));
    if jobs == 1 || items.len() < 2 {
        return items.iter().map(&f).collect();
    }
    let mut indexed: Vec<(usize, R)> = Vec::with_capacity(items.len());
    std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(jobs);
        for w in 0..jobs {
            let f = &f;
            handles.push(scope.spawn(move || {
                let mut local = Vec::new();
                let mut i = w;
                while i < items.len() {
                    local.push((i, f(&items[i])));
                    i += jobs;
                }
                local
            }));
        }
        for h in handles {
            indexed.extend(h.join().expect("worker panicked"));
        }
    });
    indexed.sort_by_key(|(i, _)| *i);
    indexed.into_iter().map(|(_, r)| r).collect()
}

#[cfg(test)]
mod tests {
    use super::parallel_map;

    #[test]
    fn order_is_deterministic() {
        let items: Vec<u64> = (0..57).collect();
        let one = parallel_map(&items, 1, |x| x * x);
        let four = parallel_map(&items, 4, |x| x * x);
        assert_eq!(one, four);
    }
}
