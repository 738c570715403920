//! Problem files: a JSON document naming the space, an optional measure, and
//! named vectors, subspaces and cones. See `formats.md` at the repository root.
//!
//! Matrices are row-major arrays of rows; a generator matrix is `dim x m`, so
//! each generator is a column. Complex entries are `[re, im]` pairs; plain
//! numbers are real.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::marker::PhantomData;
use std::sync::Arc;

use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::cone::{ConvexCone, UnionCone};
use crate::error::{Error, Result};
use crate::holder::{LpVector, MeasureSpace};
use crate::space::{Field, Scalar, Space, Vector};
use crate::subspace::{orthonormalize, Subspace};

/// A number or an `[re, im]` pair.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn scalar(self) -> Scalar {
        match self {
            Entry::Real(r) => Scalar::new(r, 0.0),
            Entry::Complex([re, im]) => Scalar::new(re, im),
        }
    }
}

/// JSON object whose keys must be unique.
#[derive(Debug, Clone)]
struct Named<T>(Vec<(String, T)>);

impl<T> Default for Named<T> {
    fn default() -> Self {
        Named(Vec::new())
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Named<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V<T>(PhantomData<T>);
        impl<'de, T: Deserialize<'de>> Visitor<'de> for V<T> {
            type Value = Named<T>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object of named entries")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<Self::Value, A::Error> {
                let mut out: Vec<(String, T)> = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, T>()? {
                    if out.iter().any(|(name, _)| *name == k) {
                        return Err(de::Error::custom(format!("duplicate name `{k}`")));
                    }
                    out.push((k, v));
                }
                Ok(Named(out))
            }
        }
        d.deserialize_map(V(PhantomData))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpace {
    dim: usize,
    #[serde(default = "default_field")]
    field: Field,
    gram: Option<Vec<Vec<Entry>>>,
}

fn default_field() -> Field {
    Field::Real
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeasure {
    weights: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCone {
    parts: Vec<Vec<Vec<Entry>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    space: RawSpace,
    measure: Option<RawMeasure>,
    #[serde(default)]
    vectors: Named<Vec<Entry>>,
    #[serde(default)]
    subspaces: Named<Vec<Vec<Entry>>>,
    #[serde(default)]
    cones: Named<RawCone>,
}

/// A validated problem file.
#[derive(Debug, Clone)]
pub struct Problem {
    space: Arc<Space>,
    measure: Option<Arc<MeasureSpace>>,
    vectors: BTreeMap<String, Vector>,
    subspaces: BTreeMap<String, Subspace>,
    /// Cone generators as `dim`-vectors (columns of the input matrices).
    cones: BTreeMap<String, Vec<Vec<Vec<Scalar>>>>,
    digest: String,
}

fn columns(matrix: &[Vec<Entry>], dim: usize, what: &str) -> Result<Vec<Vec<Scalar>>> {
    if matrix.len() != dim {
        return Err(Error::parse(format!("{what}: expected {dim} rows, found {}", matrix.len())));
    }
    let m = matrix.first().map_or(0, Vec::len);
    if matrix.iter().any(|row| row.len() != m) {
        return Err(Error::parse(format!("{what}: rows have different lengths")));
    }
    Ok((0..m).map(|j| matrix.iter().map(|row| row[j].scalar()).collect()).collect())
}

fn check_finite(values: &[Scalar], what: &str) -> Result<()> {
    if values.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::parse(format!("{what}: non-finite entry")))
    }
}

impl Problem {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawProblem = serde_json::from_str(text).map_err(|e| Error::parse(e.to_string()))?;
        let dim = raw.space.dim;
        if dim == 0 {
            return Err(Error::parse("space.dim must be positive"));
        }
        let space = match &raw.space.gram {
            None => Space::euclidean(dim, raw.space.field)?,
            Some(rows) => {
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(Error::parse(format!("space.gram must be {dim} x {dim}")));
                }
                let flat: Vec<Scalar> = rows.iter().flatten().map(|e| e.scalar()).collect();
                check_finite(&flat, "space.gram")?;
                Space::with_gram(dim, raw.space.field, flat).map_err(|e| Error::parse(e.to_string()))?
            }
        };

        let measure = match raw.measure {
            None => None,
            Some(m) => {
                if raw.space.field == Field::Complex {
                    return Err(Error::parse("L^p data must be real: a measure requires field \"real\""));
                }
                if m.weights.len() != dim {
                    return Err(Error::parse(format!(
                        "measure has {} weights, space has dimension {dim}",
                        m.weights.len()
                    )));
                }
                Some(MeasureSpace::new(m.weights).map_err(|e| Error::parse(e.to_string()))?)
            }
        };

        let mut seen = BTreeSet::new();
        let mut claim = |name: &str| -> Result<()> {
            if seen.insert(name.to_string()) {
                Ok(())
            } else {
                Err(Error::parse(format!("name `{name}` is used more than once")))
            }
        };

        let mut vectors = BTreeMap::new();
        for (name, entries) in raw.vectors.0 {
            claim(&name)?;
            let coords: Vec<Scalar> = entries.iter().map(|e| e.scalar()).collect();
            check_finite(&coords, &format!("vector `{name}`"))?;
            let v = Vector::new(&space, coords).map_err(|e| Error::parse(format!("vector `{name}`: {e}")))?;
            vectors.insert(name, v);
        }

        let mut subspaces = BTreeMap::new();
        for (name, matrix) in raw.subspaces.0 {
            claim(&name)?;
            let what = format!("subspace `{name}`");
            let gens = columns(&matrix, dim, &what)?
                .into_iter()
                .map(|c| {
                    check_finite(&c, &what)?;
                    Vector::new(&space, c).map_err(|e| Error::parse(format!("{what}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            subspaces.insert(name, orthonormalize(&space, &gens)?);
        }

        let mut cones = BTreeMap::new();
        for (name, raw_cone) in raw.cones.0 {
            claim(&name)?;
            let what = format!("cone `{name}`");
            if raw_cone.parts.is_empty() {
                return Err(Error::parse(format!("{what}: no parts")));
            }
            let mut parts = Vec::new();
            for matrix in &raw_cone.parts {
                let gens = columns(matrix, dim, &what)?;
                if gens.is_empty() {
                    return Err(Error::parse(format!("{what}: part without generators")));
                }
                for g in &gens {
                    check_finite(g, &what)?;
                    if raw.space.field == Field::Real && g.iter().any(|z| z.im != 0.0) {
                        return Err(Error::parse(format!("{what}: complex entry in a real space")));
                    }
                }
                parts.push(gens);
            }
            cones.insert(name, parts);
        }

        let digest = format!("sha256:{}", hex::encode(Sha256::digest(text.as_bytes())));
        Ok(Problem { space, measure, vectors, subspaces, cones, digest })
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn measure(&self) -> Option<&Arc<MeasureSpace>> {
        self.measure.as_ref()
    }

    /// SHA-256 of the input text.
    pub fn digest(&self) -> &str {
        &self.digest
    }

    pub fn vector(&self, name: &str) -> Result<&Vector> {
        self.vectors.get(name).ok_or_else(|| Error::usage(format!("no vector named `{name}`")))
    }

    pub fn subspace(&self, name: &str) -> Result<&Subspace> {
        self.subspaces.get(name).ok_or_else(|| Error::usage(format!("no subspace named `{name}`")))
    }

    pub fn has_vector(&self, name: &str) -> bool {
        self.vectors.contains_key(name)
    }

    pub fn has_cone(&self, name: &str) -> bool {
        self.cones.contains_key(name)
    }

    /// Space in which cones are built: the problem space when real, else its
    /// real `2n`-dimensional embedding with inner product `Re (·, ·)`.
    pub fn cone_space(&self) -> Result<Arc<Space>> {
        match self.space.field() {
            Field::Real => Ok(Arc::clone(&self.space)),
            Field::Complex => real_embedding(&self.space),
        }
    }

    /// The named cone, embedded into [`Self::cone_space`] when complex.
    pub fn cone(&self, name: &str) -> Result<UnionCone> {
        let parts = self.cones.get(name).ok_or_else(|| Error::usage(format!("no cone named `{name}`")))?;
        let space = self.cone_space()?;
        let complex = self.space.field() == Field::Complex;
        let parts = parts
            .iter()
            .map(|gens| {
                let vecs = gens
                    .iter()
                    .map(|g| {
                        let coords: Vec<f64> = if complex {
                            g.iter().map(|z| z.re).chain(g.iter().map(|z| z.im)).collect()
                        } else {
                            g.iter().map(|z| z.re).collect()
                        };
                        Vector::from_real(&space, &coords)
                    })
                    .collect::<Result<Vec<_>>>()?;
                ConvexCone::new(&space, vecs)
            })
            .collect::<Result<Vec<_>>>()?;
        UnionCone::new(parts)
    }

    /// The named vector as an L^p function over the measure.
    pub fn lp_vector(&self, name: &str) -> Result<LpVector> {
        let measure = self.measure.as_ref().ok_or_else(|| Error::usage("problem file has no measure"))?;
        LpVector::new(measure, self.vector(name)?.real_coords())
    }
}

/// `z ↦ (Re z, Im z)` with Gram matrix `[[Re G, -Im G], [Im G, Re G]]`, so
/// that the real inner product of embeddings is `Re (x, y)`.
pub fn real_embedding(space: &Space) -> Result<Arc<Space>> {
    let n = space.dim();
    match space.gram() {
        None => Space::real(2 * n),
        Some(g) => {
            let m = 2 * n;
            let mut k = vec![Scalar::new(0.0, 0.0); m * m];
            for i in 0..n {
                for j in 0..n {
                    let z = g[i * n + j];
                    k[i * m + j] = Scalar::new(z.re, 0.0);
                    k[i * m + n + j] = Scalar::new(-z.im, 0.0);
                    k[(n + i) * m + j] = Scalar::new(z.im, 0.0);
                    k[(n + i) * m + n + j] = Scalar::new(z.re, 0.0);
                }
            }
            Space::with_gram(m, Field::Real, k)
        }
    }
}
