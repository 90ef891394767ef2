use crate::model::{
    CostModel, Distance, Horizon, Instance, Location, Minutes, ModelError, Money, RegParams, Request, TimeWindow,
    TravelMatrix, Weekday,
};

/// Euclidean distance between two points scaled by `factor`, rounded to
/// whole kilometres.
pub fn euclidean_km(a: (f64, f64), b: (f64, f64), factor: f64) -> Distance {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    Distance::from_km((factor * (dx * dx + dy * dy).sqrt()).round() as i64)
}

struct PendingRequest {
    origin: usize,
    destination: usize,
    pickup: TimeWindow,
    deliveries: Vec<TimeWindow>,
    price: Option<Money>,
}

/// Programmatic construction of instances on a Euclidean plane (or from an
/// explicit distance matrix). Request ids are assigned 1, 2, ... in order.
pub struct InstanceBuilder {
    name: String,
    points: Vec<(f64, f64)>,
    factor: f64,
    distances: Option<Vec<Distance>>,
    requests: Vec<PendingRequest>,
    cost: CostModel,
    regs: RegParams,
    mu: Distance,
    horizon: Horizon,
}

impl InstanceBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        InstanceBuilder {
            name: name.into(),
            points: Vec::new(),
            factor: 1.0,
            distances: None,
            requests: Vec::new(),
            cost: CostModel::default(),
            regs: RegParams::default(),
            mu: Distance::ZERO,
            horizon: Horizon {
                origin_weekday: Weekday::Monday,
                days: 14,
            },
        }
    }

    /// Adds a location and returns its index.
    pub fn location(&mut self, x: f64, y: f64) -> usize {
        self.points.push((x, y));
        self.points.len() - 1
    }

    /// Adds a request with the price taken from the cost model's tiers.
    pub fn request(&mut self, origin: usize, destination: usize, pickup: TimeWindow, deliveries: Vec<TimeWindow>) -> usize {
        self.requests.push(PendingRequest {
            origin,
            destination,
            pickup,
            deliveries,
            price: None,
        });
        self.requests.len() - 1
    }

    /// Adds a request with an explicit spot-market price.
    pub fn priced_request(
        &mut self,
        origin: usize,
        destination: usize,
        pickup: TimeWindow,
        deliveries: Vec<TimeWindow>,
        price: Money,
    ) -> usize {
        self.requests.push(PendingRequest {
            origin,
            destination,
            pickup,
            deliveries,
            price: Some(price),
        });
        self.requests.len() - 1
    }

    pub fn factor(mut self, factor: f64) -> Self {
        self.factor = factor;
        self
    }

    /// Uses a full row-major distance matrix instead of Euclidean distances.
    pub fn distances(mut self, distances: Vec<Distance>) -> Self {
        self.distances = Some(distances);
        self
    }

    pub fn mu(mut self, mu: Distance) -> Self {
        self.mu = mu;
        self
    }

    pub fn regs(mut self, regs: RegParams) -> Self {
        self.regs = regs;
        self
    }

    pub fn cost(mut self, cost: CostModel) -> Self {
        self.cost = cost;
        self
    }

    pub fn horizon(mut self, origin_weekday: Weekday, days: u32) -> Self {
        self.horizon = Horizon { origin_weekday, days };
        self
    }

    pub fn build(self) -> Result<Instance, ModelError> {
        let n = self.points.len();
        let distance = match self.distances {
            Some(d) => d,
            None => {
                let mut d = Vec::with_capacity(n * n);
                for a in &self.points {
                    for b in &self.points {
                        d.push(euclidean_km(*a, *b, self.factor));
                    }
                }
                d
            }
        };
        let matrix = TravelMatrix::from_distances(n, distance, &self.regs)?;
        let locations = self
            .points
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| Location {
                id: i as u32,
                x: Some(x),
                y: Some(y),
                name: None,
            })
            .collect();
        let mut cost = self.cost;
        let requests = self
            .requests
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                let id = i as u32 + 1;
                if let Some(price) = p.price {
                    cost.explicit_sm_prices.insert(id, price);
                }
                let direct = matrix.distance(p.origin.min(n.saturating_sub(1)), p.destination.min(n.saturating_sub(1)));
                Request {
                    id,
                    origin: p.origin,
                    destination: p.destination,
                    pickup_window: p.pickup,
                    delivery_windows: p.deliveries,
                    sm_price: cost.sm_price(direct, id),
                }
            })
            .collect();
        Instance::new(self.name, locations, matrix, requests, cost, self.regs, self.mu, self.horizon)
    }
}

/// Daily windows `[day * 1440 + open, day * 1440 + close]` for `days`.
pub fn daily_windows(days: std::ops::Range<i64>, open: Minutes, close: Minutes) -> Vec<TimeWindow> {
    days.map(|d| TimeWindow::new(d * crate::model::DAY + open, d * crate::model::DAY + close))
        .collect()
}
