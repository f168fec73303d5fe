//! JSON document formats. Every rational is a string (`"3"`, `"5/4"`,
//! decimal literals accepted on input) and `"inf"` marks infinity where the
//! extended value domain applies, so values survive round trips bit-exactly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use katetov_core::apx::{ApproximateIsometry, JointEmbeddingWitness};
use katetov_core::extq::ExtQ;
use katetov_core::metric::FiniteMetricSpace;
use katetov_core::rat::{fmt_rat, parse_rat, Rat};
use katetov_core::structures::{FinStructure, PointedObject, Signature, Table};
use katetov_core::uhf::{AffinePiece, CubeAlgebra, DiagonalMorphism, PiecewiseAffineMap, TraceTag};

#[derive(Debug, Error)]
pub enum DocError {
    #[error("invalid rational `{0}`")]
    Rational(String),
    #[error("{0}")]
    Space(String),
    #[error("{0}")]
    Shape(String),
}

fn rat_from(s: &str) -> Result<Rat, DocError> {
    parse_rat(s).map_err(|e| DocError::Rational(e.0))
}

fn extq_from(s: &str) -> Result<ExtQ, DocError> {
    ExtQ::parse(s).map_err(|e| DocError::Rational(e.0))
}

/// Metric space: `{"points": ["a","b"], "dist": [["0","1"],["1","0"]]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceDoc {
    pub points: Vec<String>,
    pub dist: Vec<Vec<String>>,
}

impl SpaceDoc {
    pub fn from_space(s: &FiniteMetricSpace) -> Self {
        SpaceDoc {
            points: s.points().to_vec(),
            dist: s.dist_table().iter().map(|r| r.iter().map(fmt_rat).collect()).collect(),
        }
    }

    pub fn to_space(&self) -> Result<FiniteMetricSpace, DocError> {
        let dist = self
            .dist
            .iter()
            .map(|row| row.iter().map(|v| rat_from(v)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        FiniteMetricSpace::new(self.points.clone(), dist)
            .map_err(|e| DocError::Space(e.to_string()))
    }
}

/// Approximate isometry with its two spaces and the extended-rational table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ApxDoc {
    pub source: SpaceDoc,
    pub target: SpaceDoc,
    pub values: Vec<Vec<String>>,
}

impl ApxDoc {
    pub fn from_apx(phi: &ApproximateIsometry) -> Self {
        ApxDoc {
            source: SpaceDoc::from_space(phi.source()),
            target: SpaceDoc::from_space(phi.target()),
            values: phi
                .values()
                .iter()
                .map(|r| r.iter().map(|v| v.to_text()).collect())
                .collect(),
        }
    }

    pub fn to_apx(&self) -> Result<ApproximateIsometry, DocError> {
        let source = self.source.to_space()?;
        let target = self.target.to_space()?;
        let values = self
            .values
            .iter()
            .map(|row| row.iter().map(|v| extq_from(v)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        ApproximateIsometry::from_parts(source, target, values)
            .map_err(|e| DocError::Shape(e.to_string()))
    }
}

/// Joint embedding witness (ambient space plus the two point maps by name).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessDoc {
    pub ambient: SpaceDoc,
    pub iota: Vec<String>,
    pub eta: Vec<String>,
}

impl WitnessDoc {
    pub fn from_witness(w: &JointEmbeddingWitness) -> Self {
        let name = |i: &usize| w.ambient.points()[*i].clone();
        WitnessDoc {
            ambient: SpaceDoc::from_space(&w.ambient),
            iota: w.iota.iter().map(name).collect(),
            eta: w.eta.iter().map(name).collect(),
        }
    }
}

/// Symbol interpretation table in row-major order over point indices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymbolTableDoc {
    pub arity: usize,
    pub table: Vec<String>,
}

/// Structure document: the metric-space format extended with relation and
/// function tables (function values are point names).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StructureDoc {
    #[serde(flatten)]
    pub space: SpaceDoc,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub relations: BTreeMap<String, SymbolTableDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub functions: BTreeMap<String, SymbolTableDoc>,
}

impl StructureDoc {
    pub fn from_structure(s: &FinStructure) -> Self {
        let relations = s
            .relations
            .iter()
            .map(|(name, t)| {
                (
                    name.clone(),
                    SymbolTableDoc {
                        arity: t.arity,
                        table: t.entries.iter().map(fmt_rat).collect(),
                    },
                )
            })
            .collect();
        let functions = s
            .functions
            .iter()
            .map(|(name, t)| {
                (
                    name.clone(),
                    SymbolTableDoc {
                        arity: t.arity,
                        table: t.entries.iter().map(|&i| s.domain.points()[i].clone()).collect(),
                    },
                )
            })
            .collect();
        StructureDoc { space: SpaceDoc::from_space(&s.domain), relations, functions }
    }

    pub fn to_structure(&self) -> Result<FinStructure, DocError> {
        let domain = self.space.to_space()?;
        let mut signature = Signature::metric_only();
        let mut relations = BTreeMap::new();
        for (name, t) in &self.relations {
            signature = signature.with_relation(name, t.arity);
            let entries =
                t.table.iter().map(|v| rat_from(v)).collect::<Result<Vec<_>, _>>()?;
            relations.insert(name.clone(), Table { arity: t.arity, entries });
        }
        let mut functions = BTreeMap::new();
        for (name, t) in &self.functions {
            signature = signature.with_function(name, t.arity);
            let entries = t
                .table
                .iter()
                .map(|p| {
                    domain
                        .index_of(p)
                        .ok_or_else(|| DocError::Shape(format!("unknown point `{p}`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            functions.insert(name.clone(), Table { arity: t.arity, entries });
        }
        let s = FinStructure { signature, domain, relations, functions };
        s.check().map_err(|e| DocError::Shape(e.to_string()))?;
        Ok(s)
    }
}

/// A structure with an ordered generating tuple (point names).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointedDoc {
    #[serde(flatten)]
    pub structure: StructureDoc,
    pub tuple: Vec<String>,
}

impl PointedDoc {
    pub fn to_pointed(&self) -> Result<PointedObject, DocError> {
        let s = self.structure.to_structure()?;
        let tuple = self
            .tuple
            .iter()
            .map(|p| {
                s.domain
                    .index_of(p)
                    .ok_or_else(|| DocError::Shape(format!("unknown tuple point `{p}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        PointedObject::new(s, tuple).map_err(|e| DocError::Shape(e.to_string()))
    }
}

/// Cube algebra descriptor: `{"p": 1, "n": 2}` with optional trace data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlgebraDoc {
    pub p: u32,
    pub n: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<MapDoc>,
}

impl AlgebraDoc {
    pub fn from_algebra(a: &CubeAlgebra) -> Self {
        AlgebraDoc {
            p: a.p,
            n: a.n,
            trace: match &a.trace {
                TraceTag::Lebesgue => None,
                TraceTag::PushforwardBy(m) => Some(MapDoc::from_map(m)),
            },
        }
    }

    pub fn to_algebra(&self) -> Result<CubeAlgebra, DocError> {
        Ok(CubeAlgebra {
            p: self.p,
            n: self.n,
            trace: match &self.trace {
                None => TraceTag::Lebesgue,
                Some(m) => TraceTag::PushforwardBy(m.to_map()?),
            },
        })
    }
}

/// Piecewise-affine map: breakpoints plus per-piece affine coefficients
/// (`[slope, intercept]` per output coordinate, flattened).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapDoc {
    pub breaks: Vec<String>,
    pub affine: Vec<Vec<String>>,
}

impl MapDoc {
    pub fn from_map(m: &PiecewiseAffineMap) -> Self {
        let mut breaks = vec![fmt_rat(&m.pieces()[0].lo)];
        let mut affine = Vec::new();
        for p in m.pieces() {
            breaks.push(fmt_rat(&p.hi));
            let mut row = Vec::new();
            for (a, b) in &p.coeffs {
                row.push(fmt_rat(a));
                row.push(fmt_rat(b));
            }
            affine.push(row);
        }
        MapDoc { breaks, affine }
    }

    pub fn to_map(&self) -> Result<PiecewiseAffineMap, DocError> {
        if self.breaks.len() != self.affine.len() + 1 || self.affine.is_empty() {
            return Err(DocError::Shape("breaks must bound the affine pieces".into()));
        }
        let dim = self.affine[0].len() / 2;
        let mut pieces = Vec::new();
        for (k, row) in self.affine.iter().enumerate() {
            if row.len() != 2 * dim || dim == 0 {
                return Err(DocError::Shape("affine rows need slope/intercept pairs".into()));
            }
            let coeffs = row
                .chunks(2)
                .map(|c| Ok((rat_from(&c[0])?, rat_from(&c[1])?)))
                .collect::<Result<Vec<_>, DocError>>()?;
            pieces.push(AffinePiece {
                lo: rat_from(&self.breaks[k])?,
                hi: rat_from(&self.breaks[k + 1])?,
                coeffs,
            });
        }
        PiecewiseAffineMap::new(dim, pieces).map_err(|e| DocError::Shape(e.to_string()))
    }
}

/// Diagonal morphism document, the `uhf` wire format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MorphismDoc {
    pub source: AlgebraDoc,
    pub target: AlgebraDoc,
    pub maps: Vec<MapDoc>,
    pub perm: Vec<usize>,
}

impl MorphismDoc {
    pub fn from_morphism(m: &DiagonalMorphism) -> Self {
        MorphismDoc {
            source: AlgebraDoc::from_algebra(&m.source),
            target: AlgebraDoc::from_algebra(&m.target),
            maps: m.maps.iter().map(MapDoc::from_map).collect(),
            perm: m.perm.clone(),
        }
    }

    pub fn to_morphism(&self) -> Result<DiagonalMorphism, DocError> {
        let dm = DiagonalMorphism {
            source: self.source.to_algebra()?,
            target: self.target.to_algebra()?,
            maps: self.maps.iter().map(|m| m.to_map()).collect::<Result<Vec<_>, _>>()?,
            perm: self.perm.clone(),
        };
        dm.check().map_err(|e| DocError::Shape(e.to_string()))?;
        Ok(dm)
    }
}

/// One step of a chain transcript.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainStepDoc {
    pub anchors: Vec<String>,
    pub values: Vec<String>,
    pub slack: String,
    pub witness: String,
    pub grew: bool,
    pub verified: bool,
}

/// Chain transcript: category, seed, stage sizes, final stage, and the log.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainDoc {
    pub category: String,
    pub seed: u64,
    pub stage_sizes: Vec<usize>,
    pub top: SpaceDoc,
    pub steps: Vec<ChainStepDoc>,
}

impl ChainDoc {
    pub fn from_chain(chain: &katetov_core::engine::Chain) -> Self {
        ChainDoc {
            category: chain.category.clone(),
            seed: chain.seed,
            stage_sizes: chain.stages.iter().map(|s| s.len()).collect(),
            top: SpaceDoc::from_space(&chain.top().domain),
            steps: chain
                .log
                .iter()
                .map(|s| ChainStepDoc {
                    anchors: s.anchors.clone(),
                    values: s.values.iter().map(fmt_rat).collect(),
                    slack: fmt_rat(&s.slack),
                    witness: s.witness.clone(),
                    grew: s.grew,
                    verified: s.verified,
                })
                .collect(),
        }
    }
}

/// Back-and-forth transcript: one entry per refinement level plus the final
/// pinned map.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BafLevelDoc {
    pub level: usize,
    pub forth: bool,
    pub stage: usize,
    pub weight: String,
    pub new_pins: Vec<(String, String)>,
    pub domination_verified: bool,
    pub defects: BafDefectsDoc,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BafDefectsDoc {
    pub total: String,
    pub surj: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BafDoc {
    pub complete: bool,
    pub pins: Vec<(String, String)>,
    pub map_distortion: String,
    pub levels: Vec<BafLevelDoc>,
    pub final_psi: ApxDoc,
}

impl BafDoc {
    pub fn from_result(res: &katetov_core::engine::BafResult) -> Self {
        BafDoc {
            complete: res.complete,
            pins: res.pins.clone(),
            map_distortion: fmt_rat(&res.map_distortion),
            levels: res
                .levels
                .iter()
                .map(|l| BafLevelDoc {
                    level: l.level,
                    forth: l.forth,
                    stage: l.stage_index,
                    weight: fmt_rat(&l.weight),
                    new_pins: l.new_pins.clone(),
                    domination_verified: l.domination_verified,
                    defects: BafDefectsDoc {
                        total: l.totality_defect.to_text(),
                        surj: l.surjectivity_defect.to_text(),
                    },
                })
                .collect(),
            final_psi: ApxDoc::from_apx(&res.final_psi),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use katetov_core::apx::sampling::{random_apx, random_space};
    use katetov_core::uhf::subdivision_embedding;
    use rand::SeedableRng;

    #[test]
    fn space_and_apx_round_trip_exactly() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let x = random_space(&mut rng, 4, 16);
            let y = random_space(&mut rng, 4, 16);
            let phi = random_apx(&mut rng, &x, &y, 16);
            let doc = ApxDoc::from_apx(&phi);
            let text = serde_json::to_string(&doc).unwrap();
            let back: ApxDoc = serde_json::from_str(&text).unwrap();
            assert_eq!(back.to_apx().unwrap(), phi);
        }
    }

    #[test]
    fn morphism_round_trip_exactly() {
        let dm = subdivision_embedding(&CubeAlgebra::lebesgue(1, 2), 4).unwrap();
        let doc = MorphismDoc::from_morphism(&dm);
        let text = serde_json::to_string(&doc).unwrap();
        let back: MorphismDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_morphism().unwrap(), dm);
    }

    #[test]
    fn structure_doc_carries_symbols() {
        let space = SpaceDoc {
            points: vec!["a".into(), "b".into()],
            dist: vec![vec!["0".into(), "1".into()], vec!["1".into(), "0".into()]],
        };
        let doc = StructureDoc {
            space,
            relations: BTreeMap::from([(
                "R".to_string(),
                SymbolTableDoc { arity: 1, table: vec!["1".into(), "0".into()] },
            )]),
            functions: BTreeMap::from([(
                "f".to_string(),
                SymbolTableDoc { arity: 1, table: vec!["b".into(), "b".into()] },
            )]),
        };
        let s = doc.to_structure().unwrap();
        let back = StructureDoc::from_structure(&s);
        assert_eq!(back.to_structure().unwrap(), s);
    }

    #[test]
    fn malformed_rationals_are_rejected() {
        let doc = SpaceDoc {
            points: vec!["a".into()],
            dist: vec![vec!["zero".into()]],
        };
        assert!(doc.to_space().is_err());
    }
}
