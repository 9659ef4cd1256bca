//! Shared helpers for the integration tests: random small instances, random
//! geometries, encoding a geometry as a model assignment, and a loopback HTTP
//! server standing in for a remote solver.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use binpack::builder::RelativePosition;
use binpack::model::{
    admissible_orientations, effective_dims, orientation_set, Assignment, Axis, BinSpec, Instance,
    InstanceSpec, ItemSpec, Placement, PrioritySpec, QuadraticModel, Solution, VarKey,
};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(format!("{name}.bpp.txt"))
}

pub fn load_fixture(name: &str) -> Instance {
    binpack::io::read_instance_file(&fixture(name)).unwrap()
}

pub const FIXTURES: [&str; 10] = [
    "3dBPP_het_bins",
    "2dBPP_het_bins",
    "3dBPP_item_bins",
    "2dBPP_item_bins",
    "3dBPP_del_prior",
    "2dBPP_del_prior",
    "1dBPP_1",
    "1dBPP_2",
    "3dBPP_real_world_1",
    "3dBPP_real_world_2",
];

#[derive(Debug, Clone)]
pub struct RandomConfig {
    pub dims: Vec<u8>,
    pub max_items: usize,
    pub max_bins: usize,
    pub max_dim: u32,
    pub max_item_dim: u32,
    pub min_bin_dim: u32,
    /// Associations, priorities, incompatibilities, load bearing, capacities.
    pub features: bool,
}

impl RandomConfig {
    pub fn small() -> Self {
        Self {
            dims: vec![1, 2, 3],
            max_items: 4,
            max_bins: 3,
            max_dim: 6,
            max_item_dim: 6,
            min_bin_dim: 2,
            features: true,
        }
    }
}

fn composition(rng: &mut impl Rng, total: usize, parts: usize) -> Vec<u32> {
    let mut q = vec![1u32; parts];
    for _ in parts..total {
        q[rng.gen_range(0..parts)] += 1;
    }
    q
}

pub fn random_spec(rng: &mut impl Rng, cfg: &RandomConfig) -> InstanceSpec {
    let d = *cfg.dims.choose(rng).unwrap();
    let du = d as usize;
    let n = rng.gen_range(1..=cfg.max_bins);
    let m = rng.gen_range(1..=cfg.max_items);
    let c = rng.gen_range(1..=m);
    let bins = (0..n)
        .map(|_| BinSpec {
            dims: (0..du)
                .map(|_| rng.gen_range(cfg.min_bin_dim..=cfg.max_dim))
                .collect(),
            capacity: (cfg.features && rng.gen_bool(0.3)).then(|| rng.gen_range(1..=12)),
        })
        .collect();
    let items = composition(rng, m, c)
        .into_iter()
        .enumerate()
        .map(|(k, quantity)| ItemSpec {
            category: k as u32,
            quantity,
            dims: (0..du)
                .map(|_| rng.gen_range(1..=cfg.max_item_dim))
                .collect(),
            weight: rng.gen_range(0..=5),
        })
        .collect();
    let mut spec = InstanceSpec {
        dimensionality: d,
        bins,
        items,
        associations: BTreeMap::new(),
        priority: None,
        incompatible: Vec::new(),
        heavy: Vec::new(),
        center_of_mass: None,
        weights: None,
    };
    if !cfg.features {
        return spec;
    }
    if n > 1 && rng.gen_bool(0.4) {
        for k in 0..c as u32 {
            if rng.gen_bool(0.5) {
                let mut all: Vec<usize> = (0..n).collect();
                all.shuffle(rng);
                let mut chosen = all[..rng.gen_range(1..=n)].to_vec();
                chosen.sort_unstable();
                spec.associations.insert(k, chosen);
            }
        }
    }
    if c > 1 && rng.gen_bool(0.4) {
        let mut cats: Vec<u32> = (0..c as u32).collect();
        cats.shuffle(rng);
        cats.truncate(rng.gen_range(1..c));
        let axis = match d {
            1 => Axis::X,
            _ if n > 1 => Axis::Y,
            _ if rng.gen_bool(0.5) => Axis::X,
            _ => Axis::Y,
        };
        spec.priority = Some(PrioritySpec {
            categories: cats,
            axis: Some(axis),
        });
    }
    if c > 1 && rng.gen_bool(0.3) {
        let a = rng.gen_range(0..c as u32);
        let b = (a + rng.gen_range(1..c as u32)) % c as u32;
        spec.incompatible.push([a, b]);
    }
    if d == 3 && rng.gen_bool(0.4) {
        spec.heavy.push(rng.gen_range(0..c as u32));
    }
    spec
}

pub fn random_instance(rng: &mut impl Rng, cfg: &RandomConfig) -> Instance {
    loop {
        if let Ok(inst) = Instance::new(random_spec(rng, cfg)) {
            return inst;
        }
    }
}

/// A random packing on a half-integer grid. Items land in any bin, mostly
/// inside it; `outside` is the chance of a position one step beyond a wall.
pub fn random_geometry(rng: &mut impl Rng, inst: &Instance, outside: f64) -> Solution {
    let d = inst.dimensionality();
    let n = inst.bin_count();
    let mut placements = Vec::new();
    for it in inst.items() {
        let bin = rng.gen_range(0..n);
        let orientation = *admissible_orientations(it, d).choose(rng).unwrap();
        let extents = effective_dims(it, d, orientation).unwrap();
        let dims = inst.bins()[bin].dims;
        let mut position = [0.0; 3];
        let half = rng.gen_bool(0.5);
        for a in 0..d.count() {
            let room = dims[a] as i64 - extents[a] as i64;
            let (lo, hi) = if rng.gen_bool(outside) || room < 0 {
                (-1, dims[a] as i64)
            } else {
                (0, room)
            };
            let v = if half {
                rng.gen_range(2 * lo..=2 * hi) as f64 / 2.0
            } else {
                rng.gen_range(lo..=hi) as f64
            };
            position[a] = v;
        }
        placements.push(Placement {
            bin,
            orientation,
            position,
            extents,
        });
    }
    let mut used = vec![false; n];
    for p in &placements {
        used[p.bin] = true;
    }
    if rng.gen_bool(0.15) {
        let j = rng.gen_range(0..n);
        used[j] = false;
    }
    for u in used.iter_mut() {
        if rng.gen_bool(0.2) {
            *u = true;
        }
    }
    Solution::from_local(inst, placements, used)
}

fn holds(sol: &Solution, i: usize, k: usize, q: RelativePosition) -> bool {
    let a = q.axis().index();
    let (pi, pk) = (&sol.placements[i], &sol.placements[k]);
    if q.first_precedes() {
        pi.position[a] + pi.extents[a] as f64 <= pk.position[a]
    } else {
        pk.position[a] + pk.extents[a] as f64 <= pi.position[a]
    }
}

/// Encodes a geometry as model values. Relative position selectors take the
/// first admissible `q` realized by the geometry, falling back to the first
/// admissible one.
pub fn encode(model: &QuadraticModel, inst: &Instance, sol: &Solution) -> Assignment {
    let d = inst.dimensionality();
    let mut a = Assignment::new(model);
    let set = |a: &mut Assignment, key: VarKey, v: f64| {
        if let Some(id) = model.var(key) {
            a.set(id, v);
        }
    };
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    for (bin, &u) in sol.bins_used.iter().enumerate() {
        set(&mut a, VarKey::BinUsed { bin }, flag(u));
    }
    for (item, p) in sol.placements.iter().enumerate() {
        for bin in 0..inst.bin_count() {
            set(&mut a, VarKey::Assign { item, bin }, flag(p.bin == bin));
        }
        for k in orientation_set(&inst.items()[item], d) {
            set(
                &mut a,
                VarKey::Orient {
                    item,
                    orientation: k,
                },
                flag(k == p.orientation),
            );
        }
        for &axis in d.axes() {
            set(
                &mut a,
                VarKey::Position { axis, item },
                p.position[axis.index()],
            );
        }
    }
    let m = inst.item_count();
    for i in 0..m {
        for k in i + 1..m {
            let qs = RelativePosition::for_dimensionality(d);
            let key = |q: RelativePosition| VarKey::Relative {
                first: i,
                second: k,
                q: q.id(),
            };
            let fixed = |q| {
                model
                    .var(key(q))
                    .and_then(|id| model.fixed().get(&id).copied())
            };
            let allowed: Vec<RelativePosition> = qs
                .iter()
                .copied()
                .filter(|&q| fixed(q) != Some(false))
                .collect();
            let same_bin = sol.placements[i].bin == sol.placements[k].bin;
            let chosen = allowed
                .iter()
                .copied()
                .find(|&q| same_bin && holds(sol, i, k, q))
                .or_else(|| allowed.first().copied())
                .unwrap_or(qs[0]);
            for &q in qs {
                if fixed(q).is_none() {
                    set(&mut a, key(q), flag(q == chosen));
                }
            }
        }
    }
    a
}

pub struct Request {
    pub method: String,
    pub path: String,
    pub headers: Vec<(String, String)>,
    pub body: String,
}

pub struct MockServer {
    pub url: String,
    pub requests: Arc<Mutex<Vec<Request>>>,
}

/// Serves every connection on a loopback port with `respond`, which returns
/// a status code and a body.
pub fn mock_server<F>(mut respond: F) -> MockServer
where
    F: FnMut(&Request) -> (u16, String) + Send + 'static,
{
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let requests = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&requests);
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut line = String::new();
            if reader.read_line(&mut line).is_err() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let method = parts.next().unwrap_or_default().to_string();
            let path = parts.next().unwrap_or_default().to_string();
            let mut headers = Vec::new();
            let mut length = 0;
            loop {
                let mut h = String::new();
                if reader.read_line(&mut h).unwrap_or(0) == 0 || h == "\r\n" {
                    break;
                }
                if let Some((k, v)) = h.trim_end().split_once(':') {
                    let (k, v) = (k.trim().to_ascii_lowercase(), v.trim().to_string());
                    if k == "content-length" {
                        length = v.parse().unwrap_or(0);
                    }
                    headers.push((k, v));
                }
            }
            let mut body = vec![0; length];
            let _ = reader.read_exact(&mut body);
            let request = Request {
                method,
                path,
                headers,
                body: String::from_utf8_lossy(&body).into_owned(),
            };
            let (code, reply) = respond(&request);
            log.lock().unwrap().push(request);
            let _ = write!(
                stream,
                "HTTP/1.1 {code} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
                reply.len()
            );
        }
    });
    MockServer { url, requests }
}
