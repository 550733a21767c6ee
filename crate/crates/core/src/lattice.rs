//! Hypercubic lattices with free boundary conditions, bonds, plaquettes and
//! the enhanced temporal gauge.
//!
//! Coordinates run over 1..=L in each of the `d` directions; direction 0 is
//! time. Sites are ordered lexicographically with x^0 slowest, bonds by
//! (site, direction), plaquettes by (site, mu, nu) with mu < nu.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Free,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bond {
    pub site: usize,
    pub mu: usize,
}

/// Plaquette with its four bonds in the order of g_p = g1 g2 g3^-1 g4^-1:
/// <x, x+mu>, <x+mu, x+mu+nu>, <x+nu, x+nu+mu>, <x, x+nu>.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plaquette {
    pub site: usize,
    pub mu: usize,
    pub nu: usize,
    pub bonds: [usize; 4],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    d: usize,
    l: usize,
    bonds: Vec<Bond>,
    bond_lookup: Vec<Option<usize>>,
    plaquettes: Vec<Plaquette>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeCounts {
    pub sites: usize,
    pub bonds: usize,
    pub plaquettes: usize,
    pub retained_bonds: usize,
}

impl Lattice {
    pub fn new(d: usize, l: usize, boundary: Boundary) -> Result<Self> {
        if boundary == Boundary::Periodic {
            return Err(Error::Unsupported(
                "only free boundary conditions are implemented".into(),
            ));
        }
        if !(1..=4).contains(&d) {
            return Err(invalid(format!("dimension d must be in 1..=4, got {d}")));
        }
        if l < 2 {
            return Err(invalid(format!(
                "side length L must be at least 2, got {l}"
            )));
        }
        let n_sites = l
            .checked_pow(d as u32)
            .filter(|&n| n <= 1 << 24)
            .ok_or_else(|| invalid("lattice too large"))?;
        let mut lat = Self {
            d,
            l,
            bonds: Vec::new(),
            bond_lookup: vec![None; n_sites * d],
            plaquettes: Vec::new(),
        };
        for site in 0..n_sites {
            let x = lat.coords(site);
            for (mu, &xm) in x.iter().enumerate() {
                if xm < l {
                    lat.bond_lookup[site * d + mu] = Some(lat.bonds.len());
                    lat.bonds.push(Bond { site, mu });
                }
            }
        }
        for site in 0..n_sites {
            let x = lat.coords(site);
            for mu in 0..d {
                for nu in mu + 1..d {
                    if x[mu] < l && x[nu] < l {
                        let xm = lat.shift(site, mu);
                        let xn = lat.shift(site, nu);
                        let bonds = [
                            lat.bond_at(site, mu).expect("interior bond"),
                            lat.bond_at(xm, nu).expect("interior bond"),
                            lat.bond_at(xn, mu).expect("interior bond"),
                            lat.bond_at(site, nu).expect("interior bond"),
                        ];
                        lat.plaquettes.push(Plaquette {
                            site,
                            mu,
                            nu,
                            bonds,
                        });
                    }
                }
            }
        }
        Ok(lat)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn side(&self) -> usize {
        self.l
    }

    pub fn n_sites(&self) -> usize {
        self.l.pow(self.d as u32)
    }

    pub fn n_bonds(&self) -> usize {
        self.bonds.len()
    }

    pub fn n_plaquettes(&self) -> usize {
        self.plaquettes.len()
    }

    /// Number of bonds left after enhanced temporal gauge fixing, Lambda_r.
    pub fn n_retained(&self) -> usize {
        self.n_bonds() - (self.n_sites() - 1)
    }

    pub fn counts(&self) -> LatticeCounts {
        LatticeCounts {
            sites: self.n_sites(),
            bonds: self.n_bonds(),
            plaquettes: self.n_plaquettes(),
            retained_bonds: self.n_retained(),
        }
    }

    /// 1-based coordinates of a site.
    pub fn coords(&self, site: usize) -> Vec<usize> {
        let mut x = vec![0; self.d];
        let mut rest = site;
        for mu in (0..self.d).rev() {
            x[mu] = rest % self.l + 1;
            rest /= self.l;
        }
        x
    }

    pub fn site_index(&self, x: &[usize]) -> Result<usize> {
        if x.len() != self.d || x.iter().any(|&c| c == 0 || c > self.l) {
            return Err(invalid(format!("coordinates {x:?} outside the lattice")));
        }
        Ok(x.iter().fold(0, |acc, &c| acc * self.l + (c - 1)))
    }

    /// Neighbour x + e_mu; the caller guarantees x^mu < L.
    fn shift(&self, site: usize, mu: usize) -> usize {
        site + self.l.pow((self.d - 1 - mu) as u32)
    }

    pub fn bond_at(&self, site: usize, mu: usize) -> Option<usize> {
        self.bond_lookup.get(site * self.d + mu).copied().flatten()
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn plaquettes(&self) -> &[Plaquette] {
        &self.plaquettes
    }

    /// Endpoints (x, x + e_mu) of a bond.
    pub fn endpoints(&self, bond: usize) -> (usize, usize) {
        let b = self.bonds[bond];
        (b.site, self.shift(b.site, b.mu))
    }

    /// Plaquettes containing each bond.
    pub fn bond_plaquette_incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.n_bonds()];
        for (p, plaq) in self.plaquettes.iter().enumerate() {
            for &b in &plaq.bonds {
                inc[b].push(p);
            }
        }
        inc
    }

    /// Plaquettes spanned by two spatial directions.
    pub fn horizontal_plaquettes(&self) -> Vec<usize> {
        (0..self.n_plaquettes())
            .filter(|&p| self.plaquettes[p].mu >= 1)
            .collect()
    }
}

/// Partition of the bonds into the gauge-fixed tree and the retained bonds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaugeFixing {
    in_tree: Vec<bool>,
    retained: Vec<usize>,
}

impl GaugeFixing {
    /// Enhanced temporal gauge: b_mu(x) is gauged to 1 iff x^0 = ... = x^{mu-1} = 1
    /// (all temporal bonds, the x^0 = 1 slice of direction 1, and so on).
    pub fn enhanced_temporal(lattice: &Lattice) -> Self {
        let in_tree: Vec<bool> = lattice
            .bonds()
            .iter()
            .map(|b| {
                let x = lattice.coords(b.site);
                x[..b.mu].iter().all(|&c| c == 1)
            })
            .collect();
        let retained = (0..in_tree.len()).filter(|&b| !in_tree[b]).collect();
        Self { in_tree, retained }
    }

    pub fn is_tree_bond(&self, bond: usize) -> bool {
        self.in_tree[bond]
    }

    pub fn retained(&self) -> &[usize] {
        &self.retained
    }

    pub fn tree(&self) -> impl Iterator<Item = usize> + '_ {
        self.in_tree
            .iter()
            .enumerate()
            .filter(|(_, &t)| t)
            .map(|(b, _)| b)
    }

    /// Checks that the tree is a spanning tree and that every retained bond
    /// closes a cycle.
    pub fn validate(&self, lattice: &Lattice) -> Result<()> {
        let mut uf = UnionFind::new(lattice.n_sites());
        let mut tree_edges = 0;
        for b in self.tree() {
            let (x, y) = lattice.endpoints(b);
            if !uf.union(x, y) {
                return Err(invalid(format!("tree bond {b} closes a cycle")));
            }
            tree_edges += 1;
        }
        if tree_edges != lattice.n_sites() - 1 {
            return Err(invalid(format!(
                "tree has {tree_edges} bonds, expected {}",
                lattice.n_sites() - 1
            )));
        }
        for &b in &self.retained {
            let (x, y) = lattice.endpoints(b);
            if uf.find(x) != uf.find(y) {
                return Err(invalid(format!("retained bond {b} does not close a cycle")));
            }
        }
        Ok(())
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_small_lattices() {
        let c = Lattice::new(3, 2, Boundary::Free).unwrap().counts();
        assert_eq!(
            (c.sites, c.bonds, c.plaquettes, c.retained_bonds),
            (8, 12, 6, 5)
        );
        let c = Lattice::new(3, 3, Boundary::Free).unwrap().counts();
        assert_eq!((c.sites, c.bonds, c.plaquettes), (27, 54, 36));
        let c = Lattice::new(2, 3, Boundary::Free).unwrap().counts();
        assert_eq!((c.bonds, c.plaquettes, c.retained_bonds), (12, 4, 4));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            Lattice::new(2, 3, Boundary::Periodic),
            Err(Error::Unsupported(_))
        ));
        assert!(Lattice::new(5, 2, Boundary::Free).is_err());
        assert!(Lattice::new(2, 1, Boundary::Free).is_err());
    }

    #[test]
    fn coordinates_roundtrip() {
        let lat = Lattice::new(3, 3, Boundary::Free).unwrap();
        for s in 0..lat.n_sites() {
            assert_eq!(lat.site_index(&lat.coords(s)).unwrap(), s);
        }
        assert_eq!(lat.coords(0), vec![1, 1, 1]);
        assert_eq!(lat.coords(1), vec![1, 1, 2]);
    }

    #[test]
    fn temporal_gauge_small() {
        let lat = Lattice::new(2, 2, Boundary::Free).unwrap();
        let fix = GaugeFixing::enhanced_temporal(&lat);
        fix.validate(&lat).unwrap();
        assert_eq!(fix.retained().len(), 1);
        let b = lat.bonds()[fix.retained()[0]];
        assert_eq!((lat.coords(b.site), b.mu), (vec![2, 1], 1));
    }

    #[test]
    fn horizontal_plaquettes_by_plane() {
        let lat = Lattice::new(3, 2, Boundary::Free).unwrap();
        assert_eq!(lat.horizontal_plaquettes().len(), 2);
        let lat = Lattice::new(4, 2, Boundary::Free).unwrap();
        assert_eq!(
            (lat.horizontal_plaquettes().len(), lat.n_plaquettes()),
            (12, 24)
        );
    }
}
