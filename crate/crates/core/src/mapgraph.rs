//! Border graphs of political maps.
//!
//! A dataset lists countries with centroids, unordered border pairs and
//! junction points where several countries meet. Queries cover monogamous,
//! friendly and tailed countries, attractive points (junctions of three or
//! more countries) and four-colouring.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

const EARTH_RADIUS_KM: f64 = 6371.0088;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("unknown country {0:?}")]
    UnknownCountry(String),
    #[error("asked for {wanted} attractive points, the map has {available}")]
    NotEnoughPoints { wanted: usize, available: usize },
    #[error("no colouring with 4 colours exists")]
    ColoringNotFound,
    #[error("invalid dataset: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("cannot read dataset: {0}")]
    Json(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Country {
    pub id: String,
    pub name: String,
    pub lat: f64,
    pub lon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Junction {
    pub lat: f64,
    pub lon: f64,
    pub incident: BTreeSet<String>,
}

impl Junction {
    pub fn is_attractive(&self) -> bool {
        self.incident.len() >= 3
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDataset {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub countries: Vec<Country>,
    pub borders: Vec<[String; 2]>,
    #[serde(default)]
    pub junctions: Vec<Junction>,
}

/// An immutable map. Obtained from [`MapDataset::new`], which validates, or
/// from [`MapDataset::unchecked`] for deliberately broken fixtures.
#[derive(Clone, Debug, PartialEq)]
pub struct MapDataset {
    countries: Vec<Country>,
    junctions: Vec<Junction>,
    adjacency: BTreeMap<String, BTreeSet<String>>,
}

pub fn border(a: &str, b: &str) -> [String; 2] {
    [a.to_string(), b.to_string()]
}

/// Every problem with `raw`, in a stable order.
pub fn validate(raw: &RawDataset) -> Vec<String> {
    let mut problems = Vec::new();
    let mut ids = BTreeSet::new();
    for c in &raw.countries {
        if !ids.insert(c.id.as_str()) {
            problems.push(format!("duplicate country id {:?}", c.id));
        }
        if !(-90.0..=90.0).contains(&c.lat) || !(-180.0..=180.0).contains(&c.lon) {
            problems.push(format!("{}: centroid ({}, {}) is off the globe", c.id, c.lat, c.lon));
        }
    }
    let mut pairs = BTreeSet::new();
    for [a, b] in &raw.borders {
        for end in [a, b] {
            if !ids.contains(end.as_str()) {
                problems.push(format!("border {a}-{b} names unknown country {end:?}"));
            }
        }
        if a == b {
            problems.push(format!("self border {a}-{b}"));
        }
        let key = if a <= b { (a, b) } else { (b, a) };
        if !pairs.insert(key) {
            problems.push(format!("border {a}-{b} listed twice"));
        }
    }
    for (i, j) in raw.junctions.iter().enumerate() {
        if j.incident.len() < 2 {
            problems.push(format!("junction {i} touches fewer than 2 countries"));
        }
        if !(-90.0..=90.0).contains(&j.lat) || !(-180.0..=180.0).contains(&j.lon) {
            problems.push(format!("junction {i} is off the globe"));
        }
        for c in &j.incident {
            if !ids.contains(c.as_str()) {
                problems.push(format!("junction {i} names unknown country {c:?}"));
            }
        }
        let inc: Vec<&String> = j.incident.iter().collect();
        for (x, a) in inc.iter().enumerate() {
            for b in &inc[x + 1..] {
                if !pairs.contains(&(*a, *b)) {
                    problems.push(format!("junction {i} joins {a} and {b}, which share no border"));
                }
            }
        }
    }
    problems
}

impl MapDataset {
    pub fn new(raw: RawDataset) -> Result<Self, MapError> {
        let problems = validate(&raw);
        if !problems.is_empty() {
            return Err(MapError::Invalid(problems));
        }
        Ok(Self::unchecked(raw))
    }

    /// Builds the graph without validation. Border endpoints that are not
    /// listed countries are still added as vertices.
    pub fn unchecked(raw: RawDataset) -> Self {
        let mut adjacency: BTreeMap<String, BTreeSet<String>> = raw
            .countries
            .iter()
            .map(|c| (c.id.clone(), BTreeSet::new()))
            .collect();
        for [a, b] in &raw.borders {
            if a != b {
                adjacency.entry(a.clone()).or_default().insert(b.clone());
                adjacency.entry(b.clone()).or_default().insert(a.clone());
            }
        }
        Self {
            countries: raw.countries,
            junctions: raw.junctions,
            adjacency,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, MapError> {
        let raw: RawDataset = serde_json::from_str(text).map_err(|e| MapError::Json(e.to_string()))?;
        Self::new(raw)
    }

    /// Graph-only map with dummy centroids and no junctions.
    pub fn from_edges(ids: &[&str], edges: &[(&str, &str)]) -> Result<Self, MapError> {
        Self::new(RawDataset {
            source: None,
            countries: ids
                .iter()
                .map(|id| Country {
                    id: id.to_string(),
                    name: id.to_string(),
                    lat: 0.0,
                    lon: 0.0,
                })
                .collect(),
            borders: edges.iter().map(|(a, b)| border(a, b)).collect(),
            junctions: Vec::new(),
        })
    }

    pub fn countries(&self) -> &[Country] {
        &self.countries
    }

    pub fn country(&self, id: &str) -> Result<&Country, MapError> {
        self.countries
            .iter()
            .find(|c| c.id == id)
            .ok_or_else(|| MapError::UnknownCountry(id.to_string()))
    }

    pub fn junctions(&self) -> &[Junction] {
        &self.junctions
    }

    pub fn neighbours(&self, id: &str) -> Result<&BTreeSet<String>, MapError> {
        self.adjacency
            .get(id)
            .ok_or_else(|| MapError::UnknownCountry(id.to_string()))
    }

    pub fn borders_each_other(&self, a: &str, b: &str) -> bool {
        self.adjacency.get(a).is_some_and(|n| n.contains(b))
    }

    pub fn border_count(&self) -> usize {
        self.adjacency.values().map(BTreeSet::len).sum::<usize>() / 2
    }

    fn ids(&self) -> impl Iterator<Item = &String> {
        self.adjacency.keys()
    }
}

/// The bundled frozen map of Europe.
pub fn europe() -> MapDataset {
    MapDataset::from_json(include_str!("../data/europe.json")).expect("bundled dataset is valid")
}

pub fn degree(ds: &MapDataset, c: &str) -> Result<usize, MapError> {
    Ok(ds.neighbours(c)?.len())
}

/// Countries with exactly one neighbour.
pub fn monogamous(ds: &MapDataset) -> BTreeSet<String> {
    ds.adjacency
        .iter()
        .filter(|(_, n)| n.len() == 1)
        .map(|(id, _)| id.clone())
        .collect()
}

/// Border pairs whose two ends are both monogamous, smaller id first.
pub fn happy_monogamous(ds: &MapDataset) -> BTreeSet<(String, String)> {
    let mono = monogamous(ds);
    mono.iter()
        .filter_map(|a| {
            let b = ds.adjacency[a].iter().next().expect("degree 1");
            (a < b && mono.contains(b)).then(|| (a.clone(), b.clone()))
        })
        .collect()
}

/// Junctions shared by three or more countries, with their list index.
pub fn attractive_points(ds: &MapDataset) -> Vec<(usize, &Junction)> {
    ds.junctions
        .iter()
        .enumerate()
        .filter(|(_, j)| j.is_attractive())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Theorem1Violation {
    pub country: String,
    pub junction: usize,
}

/// Every monogamous country lying on an attractive point.
pub fn check_theorem1(ds: &MapDataset) -> Vec<Theorem1Violation> {
    let mono = monogamous(ds);
    let mut out = Vec::new();
    for (i, j) in attractive_points(ds) {
        for c in &j.incident {
            if mono.contains(c) {
                out.push(Theorem1Violation {
                    country: c.clone(),
                    junction: i,
                });
            }
        }
    }
    out
}

/// Countries with at least two neighbours, all pairwise bordering; the value
/// is the number of neighbours.
pub fn friendly(ds: &MapDataset) -> BTreeMap<String, usize> {
    ds.adjacency
        .iter()
        .filter(|(_, n)| {
            n.len() >= 2
                && n.iter()
                    .all(|a| n.iter().all(|b| a == b || ds.borders_each_other(a, b)))
        })
        .map(|(id, n)| (id.clone(), n.len()))
        .collect()
}

pub fn max_friendly_rank(ds: &MapDataset) -> usize {
    friendly(ds).into_values().max().unwrap_or(0)
}

/// `(tailed, tailless)`: countries with an odd and an even number of
/// neighbours.
pub fn tailed_partition(ds: &MapDataset) -> (BTreeSet<String>, BTreeSet<String>) {
    let (odd, even): (Vec<_>, Vec<_>) = ds.adjacency.iter().partition(|(_, n)| n.len() % 2 == 1);
    (
        odd.into_iter().map(|(id, _)| id.clone()).collect(),
        even.into_iter().map(|(id, _)| id.clone()).collect(),
    )
}

/// Great-circle distance in kilometres.
pub fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankedPoint {
    pub junction: usize,
    pub distance_km: f64,
    pub lat: f64,
    pub lon: f64,
    pub incident: BTreeSet<String>,
}

/// The `k` attractive points closest to `c`'s centroid. Equal distances keep
/// junction list order.
pub fn nearest_attractive_points(ds: &MapDataset, c: &str, k: usize) -> Result<Vec<RankedPoint>, MapError> {
    let country = ds.country(c)?;
    let points = attractive_points(ds);
    if k > points.len() {
        return Err(MapError::NotEnoughPoints {
            wanted: k,
            available: points.len(),
        });
    }
    let mut ranked: Vec<RankedPoint> = points
        .into_iter()
        .map(|(i, j)| RankedPoint {
            junction: i,
            distance_km: haversine_km(country.lat, country.lon, j.lat, j.lon),
            lat: j.lat,
            lon: j.lon,
            incident: j.incident.clone(),
        })
        .collect();
    ranked.sort_by(|a, b| a.distance_km.total_cmp(&b.distance_km));
    ranked.truncate(k);
    Ok(ranked)
}

/// First-fit backtracking in id order. Colours are 1 to 4.
pub fn four_color(ds: &MapDataset) -> Result<BTreeMap<String, u8>, MapError> {
    let order: Vec<&String> = ds.ids().collect();
    let index: BTreeMap<&String, usize> = order.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let earlier: Vec<Vec<usize>> = order
        .iter()
        .enumerate()
        .map(|(i, id)| {
            ds.adjacency[*id]
                .iter()
                .map(|n| index[n])
                .filter(|&j| j < i)
                .collect()
        })
        .collect();
    let mut colour = vec![0u8; order.len()];
    let mut i = 0;
    while i < order.len() {
        let next = (colour[i] + 1..=4).find(|&c| earlier[i].iter().all(|&j| colour[j] != c));
        match next {
            Some(c) => {
                colour[i] = c;
                i += 1;
            }
            None => {
                colour[i] = 0;
                if i == 0 {
                    return Err(MapError::ColoringNotFound);
                }
                i -= 1;
            }
        }
    }
    Ok(order.into_iter().cloned().zip(colour).collect())
}
