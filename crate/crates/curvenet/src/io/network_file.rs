use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::IoError;
use crate::geometry::{
    CurveEnd, DiscreteCurve, End, FixedEndpoint, Junction, Network, NetworkTopology,
};
use crate::Vec2;

pub const NETWORK_FORMAT_VERSION: u32 = 1;

pub type Metadata = BTreeMap<String, serde_json::Value>;

/// On-disk network representation. JSON with shortest-round-trip float
/// formatting, so samples survive load→save→load bitwise.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetworkFile {
    pub version: u32,
    pub curves: Vec<CurveRecord>,
    #[serde(default)]
    pub junctions: Vec<JunctionRecord>,
    #[serde(default)]
    pub endpoints: Vec<EndpointRecord>,
    #[serde(default)]
    pub metadata: Metadata,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurveRecord {
    pub id: String,
    /// Sampled points [x, y] on the uniform parameter grid.
    pub samples: Vec<[f64; 2]>,
    /// Closed curves wrap around; their ends carry no topology records.
    #[serde(default)]
    pub closed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EndRecord {
    pub curve: String,
    /// "start" or "finish".
    pub end: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JunctionRecord {
    pub ends: Vec<EndRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EndpointRecord {
    pub curve: String,
    pub end: String,
    pub position: [f64; 2],
}

fn end_from_str(s: &str, path: &str) -> Result<End, IoError> {
    match s {
        "start" => Ok(End::Start),
        "finish" => Ok(End::Finish),
        other => Err(IoError::Parse {
            path: path.to_string(),
            detail: format!("end must be \"start\" or \"finish\", got \"{other}\""),
        }),
    }
}

fn end_to_str(e: End) -> &'static str {
    match e {
        End::Start => "start",
        End::Finish => "finish",
    }
}

pub fn network_to_file(network: &Network, metadata: Metadata) -> NetworkFile {
    let curves = network
        .curves
        .iter()
        .map(|c| CurveRecord {
            id: c.id.clone(),
            samples: c.points.iter().map(|p| [p.x, p.y]).collect(),
            closed: c.closed,
        })
        .collect();
    let junctions = network
        .topology
        .junctions
        .iter()
        .map(|j| JunctionRecord {
            ends: j
                .ends
                .iter()
                .map(|e| EndRecord {
                    curve: network.curves[e.curve].id.clone(),
                    end: end_to_str(e.end).to_string(),
                })
                .collect(),
        })
        .collect();
    let endpoints = network
        .topology
        .endpoints
        .iter()
        .map(|p| EndpointRecord {
            curve: network.curves[p.at.curve].id.clone(),
            end: end_to_str(p.at.end).to_string(),
            position: [p.position.x, p.position.y],
        })
        .collect();
    NetworkFile {
        version: NETWORK_FORMAT_VERSION,
        curves,
        junctions,
        endpoints,
        metadata,
    }
}

pub fn network_from_file(file: &NetworkFile, path: &str) -> Result<Network, IoError> {
    if file.version != NETWORK_FORMAT_VERSION {
        return Err(IoError::Parse {
            path: path.to_string(),
            detail: format!(
                "unsupported version {} (supported: {NETWORK_FORMAT_VERSION})",
                file.version
            ),
        });
    }
    let mut curves = Vec::with_capacity(file.curves.len());
    let mut index = BTreeMap::new();
    for (i, rec) in file.curves.iter().enumerate() {
        if index.insert(rec.id.clone(), i).is_some() {
            return Err(IoError::Integrity {
                path: path.to_string(),
                detail: format!("duplicate curve id `{}`", rec.id),
            });
        }
        let points: Vec<Vec2> = rec.samples.iter().map(|p| Vec2::new(p[0], p[1])).collect();
        let curve = DiscreteCurve {
            id: rec.id.clone(),
            points,
            closed: rec.closed,
        };
        curve.validate()?;
        curves.push(curve);
    }
    let resolve = |er: &EndRecord| -> Result<CurveEnd, IoError> {
        let curve = *index.get(&er.curve).ok_or_else(|| IoError::Integrity {
            path: path.to_string(),
            detail: format!("reference to missing curve id `{}`", er.curve),
        })?;
        Ok(CurveEnd {
            curve,
            end: end_from_str(&er.end, path)?,
        })
    };
    let mut junctions = Vec::with_capacity(file.junctions.len());
    for j in &file.junctions {
        if j.ends.len() != 3 {
            return Err(IoError::Integrity {
                path: path.to_string(),
                detail: format!("junction has {} ends, expected 3", j.ends.len()),
            });
        }
        junctions.push(Junction {
            ends: [
                resolve(&j.ends[0])?,
                resolve(&j.ends[1])?,
                resolve(&j.ends[2])?,
            ],
        });
    }
    let mut endpoints = Vec::with_capacity(file.endpoints.len());
    for p in &file.endpoints {
        endpoints.push(FixedEndpoint {
            at: resolve(&EndRecord {
                curve: p.curve.clone(),
                end: p.end.clone(),
            })?,
            position: Vec2::new(p.position[0], p.position[1]),
        });
    }
    Ok(Network::new(
        curves,
        NetworkTopology {
            junctions,
            endpoints,
        },
    )?)
}

pub fn save_network(network: &Network, metadata: Metadata, path: &Path) -> Result<(), IoError> {
    let file = network_to_file(network, metadata);
    let text = serde_json::to_string_pretty(&file).map_err(|e| IoError::Parse {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    std::fs::write(path, text).map_err(|e| IoError::io(path, e))
}

pub fn load_network(path: &Path) -> Result<(Network, Metadata), IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    let file: NetworkFile = serde_json::from_str(&text).map_err(|e| IoError::Parse {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    let network = network_from_file(&file, &path.display().to_string())?;
    Ok((network, file.metadata))
}
