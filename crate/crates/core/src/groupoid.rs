//! Finite groups and groupoids, and the example generators built from them:
//! group algebras, groupoid convolution algebras, groupoid function algebras,
//! and the direct-sum / tensor combinators.

use ndarray::Array3;

use crate::algebra::AlgebraPresentation;
use crate::coalgebra::Comultiplication;
use crate::linalg::{cr, zeros, zvec, CMat, CVec};
use crate::{Result, WqgError};

/// Multiplication table of a finite group; `mul[i][j]` is the index of
/// `g_i · g_j`.
#[derive(Debug, Clone)]
pub struct GroupTable {
    pub labels: Vec<String>,
    pub mul: Vec<Vec<usize>>,
}

impl GroupTable {
    /// Cyclic group of order `n`, elements labelled by exponent.
    pub fn cyclic(n: usize) -> GroupTable {
        let labels = (0..n).map(|k| format!("g{k}")).collect();
        let mul = (0..n)
            .map(|i| (0..n).map(|j| (i + j) % n).collect())
            .collect();
        GroupTable { labels, mul }
    }

    /// Symmetric group S₃ as permutations of three letters.
    pub fn s3() -> GroupTable {
        let perms: Vec<[usize; 3]> = vec![
            [0, 1, 2],
            [1, 2, 0],
            [2, 0, 1],
            [0, 2, 1],
            [2, 1, 0],
            [1, 0, 2],
        ];
        let labels = perms
            .iter()
            .map(|p| format!("({}{}{})", p[0], p[1], p[2]))
            .collect();
        let compose = |a: &[usize; 3], b: &[usize; 3]| [a[b[0]], a[b[1]], a[b[2]]];
        let mul = perms
            .iter()
            .map(|a| {
                perms
                    .iter()
                    .map(|b| {
                        let ab = compose(a, b);
                        perms.iter().position(|p| *p == ab).unwrap()
                    })
                    .collect()
            })
            .collect();
        GroupTable { labels, mul }
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }

    fn identity(&self) -> Result<usize> {
        let n = self.order();
        (0..n)
            .find(|&e| (0..n).all(|i| self.mul[e][i] == i && self.mul[i][e] == i))
            .ok_or_else(|| WqgError::InvalidGroupTable("no identity element".into()))
    }

    fn inverse_of(&self, i: usize, e: usize) -> Result<usize> {
        let n = self.order();
        (0..n)
            .find(|&j| self.mul[i][j] == e && self.mul[j][i] == e)
            .ok_or_else(|| WqgError::InvalidGroupTable(format!("element {i} has no inverse")))
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.order();
        if self.mul.len() != n || self.mul.iter().any(|row| row.len() != n) {
            return Err(WqgError::InvalidGroupTable("table shape mismatch".into()));
        }
        if self
            .mul
            .iter()
            .flatten()
            .any(|&v| v >= n)
        {
            return Err(WqgError::InvalidGroupTable("index out of range".into()));
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.mul[self.mul[i][j]][k] != self.mul[i][self.mul[j][k]] {
                        return Err(WqgError::InvalidGroupTable(format!(
                            "associativity fails at ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        let e = self.identity()?;
        for i in 0..n {
            self.inverse_of(i, e)?;
        }
        Ok(())
    }
}

/// A finite groupoid: arrows with source/target units, a partial composition
/// defined exactly on matching pairs, and inversion.
#[derive(Debug, Clone)]
pub struct GroupoidPresentation {
    pub arrows: Vec<String>,
    /// Indices of the unit arrows.
    pub units: Vec<usize>,
    /// `source[g]` / `target[g]` are indices of unit arrows.
    pub source: Vec<usize>,
    pub target: Vec<usize>,
    /// `compose[g][h] = Some(gh)` iff `source(g) = target(h)`.
    pub compose: Vec<Vec<Option<usize>>>,
    pub inverse: Vec<usize>,
}

impl GroupoidPresentation {
    pub fn size(&self) -> usize {
        self.arrows.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.size();
        let bad = |m: &str| Err(WqgError::InvalidGroupoid(m.into()));
        if self.source.len() != n
            || self.target.len() != n
            || self.inverse.len() != n
            || self.compose.len() != n
            || self.compose.iter().any(|r| r.len() != n)
        {
            return bad("shape mismatch");
        }
        for &u in &self.units {
            if u >= n || self.source[u] != u || self.target[u] != u {
                return bad("unit arrow with wrong source/target");
            }
        }
        for g in 0..n {
            if !self.units.contains(&self.source[g]) || !self.units.contains(&self.target[g]) {
                return bad("source/target not a unit");
            }
            for h in 0..n {
                let defined = self.source[g] == self.target[h];
                match self.compose[g][h] {
                    Some(gh) => {
                        if !defined || gh >= n {
                            return bad("composition defined on non-matching pair");
                        }
                        if self.target[gh] != self.target[g] || self.source[gh] != self.source[h] {
                            return bad("composite has wrong source/target");
                        }
                    }
                    None => {
                        if defined {
                            return bad("composition missing on matching pair");
                        }
                    }
                }
            }
            // unit laws and inverses
            let (s, t) = (self.source[g], self.target[g]);
            if self.compose[g][s] != Some(g) || self.compose[t][g] != Some(g) {
                return bad("unit law fails");
            }
            let gi = self.inverse[g];
            if gi >= n || self.compose[g][gi] != Some(t) || self.compose[gi][g] != Some(s) {
                return bad("inverse law fails");
            }
        }
        // associativity where defined
        for g in 0..n {
            for h in 0..n {
                let Some(gh) = self.compose[g][h] else {
                    continue;
                };
                for k in 0..n {
                    let lhs = self.compose[gh][k];
                    let rhs = self.compose[h][k].and_then(|hk| self.compose[g][hk]);
                    if lhs != rhs {
                        return bad("associativity fails");
                    }
                }
            }
        }
        Ok(())
    }
}

/// The pair groupoid on `points` objects: arrows `(i,j)` from `j` to `i`,
/// `(i,j)·(j,k) = (i,k)`, units `(i,i)`.
pub fn pair_groupoid(points: usize) -> GroupoidPresentation {
    let n = points * points;
    let idx = |i: usize, j: usize| i * points + j;
    let arrows = (0..points)
        .flat_map(|i| (0..points).map(move |j| format!("({},{})", i + 1, j + 1)))
        .collect();
    let units = (0..points).map(|i| idx(i, i)).collect();
    let mut source = vec![0; n];
    let mut target = vec![0; n];
    let mut inverse = vec![0; n];
    let mut compose = vec![vec![None; n]; n];
    for i in 0..points {
        for j in 0..points {
            let g = idx(i, j);
            source[g] = idx(j, j);
            target[g] = idx(i, i);
            inverse[g] = idx(j, i);
            for k in 0..points {
                compose[g][idx(j, k)] = Some(idx(i, k));
            }
        }
    }
    GroupoidPresentation {
        arrows,
        units,
        source,
        target,
        compose,
        inverse,
    }
}

/// A finite group viewed as a one-object groupoid.
pub fn group_as_groupoid(table: &GroupTable) -> Result<GroupoidPresentation> {
    table.validate()?;
    let n = table.order();
    let e = (0..n)
        .find(|&e| (0..n).all(|i| table.mul[e][i] == i))
        .expect("validated");
    let compose = (0..n)
        .map(|i| (0..n).map(|j| Some(table.mul[i][j])).collect())
        .collect();
    let inverse = (0..n)
        .map(|i| (0..n).find(|&j| table.mul[i][j] == e).expect("validated"))
        .collect();
    Ok(GroupoidPresentation {
        arrows: table.labels.clone(),
        units: vec![e],
        source: vec![e; n],
        target: vec![e; n],
        compose,
        inverse,
    })
}

/// Disjoint union of two groupoids.
pub fn disjoint_union(
    a: &GroupoidPresentation,
    b: &GroupoidPresentation,
) -> GroupoidPresentation {
    let (na, nb) = (a.size(), b.size());
    let n = na + nb;
    let mut arrows = Vec::with_capacity(n);
    arrows.extend(a.arrows.iter().map(|l| format!("L{l}")));
    arrows.extend(b.arrows.iter().map(|l| format!("R{l}")));
    let mut units = a.units.clone();
    units.extend(b.units.iter().map(|&u| na + u));
    let mut source = a.source.clone();
    source.extend(b.source.iter().map(|&s| na + s));
    let mut target = a.target.clone();
    target.extend(b.target.iter().map(|&t| na + t));
    let mut inverse = a.inverse.clone();
    inverse.extend(b.inverse.iter().map(|&i| na + i));
    let mut compose = vec![vec![None; n]; n];
    for g in 0..na {
        for h in 0..na {
            compose[g][h] = a.compose[g][h];
        }
    }
    for g in 0..nb {
        for h in 0..nb {
            compose[na + g][na + h] = b.compose[g][h].map(|x| na + x);
        }
    }
    GroupoidPresentation {
        arrows,
        units,
        source,
        target,
        compose,
        inverse,
    }
}

/// Group algebra `ℂ[G]` with the group-like comultiplication
/// `Δ(λ_g) = λ_g ⊗ λ_g` and `λ_g^* = λ_{g^{-1}}`.
pub fn gen_group_algebra(
    table: &GroupTable,
) -> Result<(AlgebraPresentation, Comultiplication)> {
    table.validate()?;
    let g = group_as_groupoid(table)?;
    gen_groupoid_convolution(&g)
}

/// Groupoid convolution algebra: basis `e_g`, `e_g·e_h = e_{gh}` when
/// composable (else 0), `e_g^* = e_{g^{-1}}`, unit `Σ_{units} e_u`, and the
/// group-like comultiplication `Δ(e_g) = e_g ⊗ e_g`.
pub fn gen_groupoid_convolution(
    g: &GroupoidPresentation,
) -> Result<(AlgebraPresentation, Comultiplication)> {
    g.validate()?;
    let n = g.size();
    let mut mult = Array3::zeros((n, n, n));
    for i in 0..n {
        for j in 0..n {
            if let Some(k) = g.compose[i][j] {
                mult[(i, j, k)] = cr(1.0);
            }
        }
    }
    let mut star: CMat = zeros(n, n);
    for i in 0..n {
        star[(g.inverse[i], i)] = cr(1.0);
    }
    let mut unit: CVec = zvec(n);
    for &u in &g.units {
        unit[u] = cr(1.0);
    }
    let p = AlgebraPresentation::new(
        "groupoid-convolution",
        g.arrows.clone(),
        mult,
        star,
        unit,
    )?;
    let mut delta = zeros(n * n, n);
    for k in 0..n {
        delta[(k * n + k, k)] = cr(1.0);
    }
    let dl = Comultiplication::new(n, delta)?;
    Ok((p, dl))
}

/// Groupoid function algebra: pointwise product on indicator functions,
/// `Δ(δ_g) = Σ_{hk=g} δ_h ⊗ δ_k`, `δ_g^* = δ_g`, unit the constant 1.
pub fn gen_groupoid_function(
    g: &GroupoidPresentation,
) -> Result<(AlgebraPresentation, Comultiplication)> {
    g.validate()?;
    let n = g.size();
    let mut mult = Array3::zeros((n, n, n));
    for i in 0..n {
        mult[(i, i, i)] = cr(1.0);
    }
    let star = {
        let mut s = zeros(n, n);
        for i in 0..n {
            s[(i, i)] = cr(1.0);
        }
        s
    };
    let unit = CVec::from(vec![cr(1.0); n]);
    let labels = g.arrows.iter().map(|l| format!("d{l}")).collect();
    let p = AlgebraPresentation::new("groupoid-function", labels, mult, star, unit)?;
    let mut delta = zeros(n * n, n);
    for h in 0..n {
        for k in 0..n {
            if let Some(hk) = g.compose[h][k] {
                delta[(h * n + k, hk)] += cr(1.0);
            }
        }
    }
    let dl = Comultiplication::new(n, delta)?;
    Ok((p, dl))
}

/// Direct sum of presentations with blockwise comultiplication.
pub fn direct_sum_pair(
    (p1, d1): (&AlgebraPresentation, &Comultiplication),
    (p2, d2): (&AlgebraPresentation, &Comultiplication),
) -> Result<(AlgebraPresentation, Comultiplication)> {
    let p = p1.direct_sum(p2);
    let (n1, n2) = (p1.dim, p2.dim);
    let n = n1 + n2;
    let mut delta = zeros(n * n, n);
    for k in 0..n1 {
        let dk = d1.of_basis(k);
        for i in 0..n1 {
            for j in 0..n1 {
                delta[(i * n + j, k)] = dk[i * n1 + j];
            }
        }
    }
    for k in 0..n2 {
        let dk = d2.of_basis(k);
        for i in 0..n2 {
            for j in 0..n2 {
                delta[((n1 + i) * n + (n1 + j), n1 + k)] = dk[i * n2 + j];
            }
        }
    }
    let dl = Comultiplication::new(n, delta)?;
    Ok((p, dl))
}

/// Tensor product of presentations; the comultiplication interleaves legs:
/// `Δ(x⊗y) = (1⊗ς⊗1)(Δ₁x ⊗ Δ₂y)`.
pub fn tensor_pair(
    (p1, d1): (&AlgebraPresentation, &Comultiplication),
    (p2, d2): (&AlgebraPresentation, &Comultiplication),
) -> Result<(AlgebraPresentation, Comultiplication)> {
    let p = p1.tensor(p2);
    let (n1, n2) = (p1.dim, p2.dim);
    let n = n1 * n2;
    let mut delta = zeros(n * n, n);
    for k1 in 0..n1 {
        let dk1 = d1.of_basis(k1);
        for k2 in 0..n2 {
            let dk2 = d2.of_basis(k2);
            let k = k1 * n2 + k2;
            for a1 in 0..n1 {
                for b1 in 0..n1 {
                    let c1 = dk1[a1 * n1 + b1];
                    if c1 == cr(0.0) {
                        continue;
                    }
                    for a2 in 0..n2 {
                        for b2 in 0..n2 {
                            let c2 = dk2[a2 * n2 + b2];
                            if c2 == cr(0.0) {
                                continue;
                            }
                            let row = (a1 * n2 + a2) * n + (b1 * n2 + b2);
                            delta[(row, k)] += c1 * c2;
                        }
                    }
                }
            }
        }
    }
    let dl = Comultiplication::new(n, delta)?;
    Ok((p, dl))
}
