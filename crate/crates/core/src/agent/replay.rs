use rand::Rng;

/// Fixed-capacity ring buffer with uniform sampling and FIFO eviction.
#[derive(Clone, Debug)]
pub struct ReplayBuffer<R> {
    capacity: usize,
    items: Vec<R>,
    next: usize,
}

impl<R> ReplayBuffer<R> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            items: Vec::with_capacity(capacity.min(1 << 16)),
            next: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, item: R) {
        if self.items.len() < self.capacity {
            self.items.push(item);
        } else {
            self.items[self.next] = item;
        }
        self.next = (self.next + 1) % self.capacity;
    }

    /// Index drawn uniformly over stored records.
    pub fn sample_index<G: Rng + ?Sized>(&self, rng: &mut G) -> usize {
        rng.random_range(0..self.items.len())
    }

    /// `n` records drawn uniformly with replacement.
    pub fn sample<'a, G: Rng + ?Sized>(&'a self, rng: &mut G, n: usize) -> Vec<&'a R> {
        if self.items.is_empty() {
            return Vec::new();
        }
        (0..n).map(|_| &self.items[self.sample_index(rng)]).collect()
    }

    pub fn get(&self, i: usize) -> Option<&R> {
        self.items.get(i)
    }

    pub fn iter(&self) -> impl Iterator<Item = &R> {
        self.items.iter()
    }
}
