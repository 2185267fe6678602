//! Super-cell geometry: tiers, branches, backhaul tree, paths and descendant sets.
//!
//! Base stations carry global indices. Index 0 is the central (gateway) BS.
//! Tier `n` occupies indices `1 + 3n(n-1) ..= 3n(n+1)`, walked counterclockwise
//! from branch 1, which lies along the +x axis. Each branch holds `n` stations
//! of tier `n`, stored contiguously.

use std::io::Write;

use crate::error::{invalid, Error, Result};

pub const GATEWAY: usize = 0;
pub const N_BRANCHES: usize = 6;

/// Number of base stations per branch of an `n_tiers`-tier super cell.
pub fn n_bs_per_branch(n_tiers: usize) -> Result<usize> {
    if n_tiers == 0 {
        return invalid("a super cell needs at least one tier");
    }
    Ok(n_tiers * (n_tiers + 1) / 2)
}

/// First global index of tier `tier` (tier >= 1).
pub fn tier_start(tier: usize) -> usize {
    1 + 3 * tier * (tier - 1)
}

/// Last global index of tier `tier` (inclusive).
pub fn tier_end(tier: usize) -> usize {
    3 * tier * (tier + 1)
}

/// Tier of a non-gateway global index.
pub fn tier_of(bs_index: usize) -> Result<usize> {
    if bs_index == GATEWAY {
        return Err(Error::UnknownBs(bs_index));
    }
    let mut n = 1;
    while tier_end(n) < bs_index {
        n += 1;
    }
    Ok(n)
}

/// Index of the tier-1 (bottleneck) link that carries traffic of `bs_index`.
pub fn bottleneck_index(bs_index: usize, tier: usize) -> Result<usize> {
    if tier == 0 || bs_index < tier_start(tier) || bs_index > tier_end(tier) {
        return Err(Error::NotInTier {
            index: bs_index,
            tier,
        });
    }
    Ok((bs_index - (3 * tier - 1) * (tier - 1)) / tier)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaseStation {
    pub index: usize,
    /// 0 for the gateway.
    pub tier: usize,
    /// Branch 1..=6, 0 for the gateway.
    pub branch: usize,
    pub position: [f64; 2],
    /// Parent in the backhaul tree; tier-1 stations hang off the gateway.
    pub parent: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct SuperCellTopology {
    n_tiers: usize,
    n_bs_per_branch: usize,
    cell_radius: f64,
    stations: Vec<BaseStation>,
    paths: Vec<Vec<usize>>,
    descendants: Vec<Vec<usize>>,
}

fn lattice_unit(side: usize, spacing: f64) -> [f64; 2] {
    let angle = (side % 6) as f64 * std::f64::consts::FRAC_PI_3;
    [spacing * angle.cos(), spacing * angle.sin()]
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Builds the full six-branch super cell.
///
/// The parent of a tier-`n` station is the nearest tier-`n-1` station of the
/// same branch. Stations in the middle of a branch arc are equidistant from two
/// inner candidates; the tie goes to the higher global index, which yields the
/// reference path `P_20 = {1, 8, 20}`.
pub fn build_super_cell(n_tiers: usize, cell_radius: f64) -> Result<SuperCellTopology> {
    let n_bs = n_bs_per_branch(n_tiers)?;
    if !(cell_radius.is_finite() && cell_radius > 0.0) {
        return invalid(format!("cell radius must be positive, got {cell_radius}"));
    }
    let spacing = 3f64.sqrt() * cell_radius;
    let total = tier_end(n_tiers) + 1;

    let mut stations = Vec::with_capacity(total);
    stations.push(BaseStation {
        index: GATEWAY,
        tier: 0,
        branch: 0,
        position: [0.0, 0.0],
        parent: None,
    });
    for tier in 1..=n_tiers {
        for branch in 1..=N_BRANCHES {
            let a = lattice_unit(branch - 1, spacing);
            let b = lattice_unit(branch, spacing);
            for slot in 0..tier {
                let (ca, cb) = ((tier - slot) as f64, slot as f64);
                let index = tier_start(tier) + (branch - 1) * tier + slot;
                debug_assert_eq!(index, stations.len());
                stations.push(BaseStation {
                    index,
                    tier,
                    branch,
                    position: [ca * a[0] + cb * b[0], ca * a[1] + cb * b[1]],
                    parent: None,
                });
            }
        }
    }

    let tol = 1e-9 * spacing * spacing;
    for idx in 1..total {
        let (tier, branch, pos) = {
            let s = &stations[idx];
            (s.tier, s.branch, s.position)
        };
        let parent = if tier == 1 {
            GATEWAY
        } else {
            let first = tier_start(tier - 1) + (branch - 1) * (tier - 1);
            let mut best = first;
            let mut best_d = f64::INFINITY;
            for cand in first..first + tier - 1 {
                let d = dist2(pos, stations[cand].position);
                if d < best_d - tol || (d <= best_d + tol && cand > best) {
                    best = cand;
                    best_d = d.min(best_d);
                }
            }
            best
        };
        stations[idx].parent = Some(parent);
    }

    let mut paths: Vec<Vec<usize>> = vec![Vec::new(); total];
    for idx in 1..total {
        let parent = stations[idx].parent.expect("non-gateway has a parent");
        let mut p = if parent == GATEWAY {
            Vec::with_capacity(1)
        } else {
            paths[parent].clone()
        };
        p.push(idx);
        paths[idx] = p;
    }

    let mut children: Vec<Vec<usize>> = vec![Vec::new(); total];
    for s in &stations[1..] {
        children[s.parent.unwrap()].push(s.index);
    }
    let mut descendants: Vec<Vec<usize>> = vec![Vec::new(); total];
    for idx in 1..total {
        let mut stack = vec![idx];
        let mut out = Vec::new();
        while let Some(j) = stack.pop() {
            out.push(j);
            stack.extend(children[j].iter().copied());
        }
        out.sort_unstable();
        descendants[idx] = out;
    }

    Ok(SuperCellTopology {
        n_tiers,
        n_bs_per_branch: n_bs,
        cell_radius,
        stations,
        paths,
        descendants,
    })
}

impl SuperCellTopology {
    pub fn n_tiers(&self) -> usize {
        self.n_tiers
    }

    pub fn n_bs_per_branch(&self) -> usize {
        self.n_bs_per_branch
    }

    pub fn cell_radius(&self) -> f64 {
        self.cell_radius
    }

    /// All stations including the gateway at position 0.
    pub fn stations(&self) -> &[BaseStation] {
        &self.stations
    }

    pub fn station(&self, bs_index: usize) -> Result<&BaseStation> {
        self.stations
            .get(bs_index)
            .ok_or(Error::UnknownBs(bs_index))
    }

    fn check(&self, bs_index: usize) -> Result<()> {
        if bs_index == GATEWAY || bs_index >= self.stations.len() {
            return Err(Error::UnknownBs(bs_index));
        }
        Ok(())
    }

    /// Backhaul links from the gateway to `bs_index`, tier-1 link first.
    pub fn path_to(&self, bs_index: usize) -> Result<&[usize]> {
        self.check(bs_index)?;
        Ok(&self.paths[bs_index])
    }

    /// Stations whose path uses link `link_index`, sorted ascending.
    pub fn descendants(&self, link_index: usize) -> Result<&[usize]> {
        self.check(link_index)?;
        Ok(&self.descendants[link_index])
    }

    /// The `N_BS` stations served by bottleneck link `branch` (1..=6).
    pub fn branch_members(&self, branch: usize) -> Result<&[usize]> {
        if !(1..=N_BRANCHES).contains(&branch) {
            return invalid(format!("branch must be in 1..=6, got {branch}"));
        }
        self.descendants(branch)
    }

    pub fn parent(&self, bs_index: usize) -> Result<usize> {
        self.check(bs_index)?;
        Ok(self.stations[bs_index].parent.unwrap())
    }

    pub fn tier(&self, bs_index: usize) -> Result<usize> {
        self.check(bs_index)?;
        Ok(self.stations[bs_index].tier)
    }

    pub fn total_stations(&self) -> usize {
        self.stations.len()
    }

    /// Writes `bs_index,tier,branch,x_m,y_m,parent_index` rows (gateway parent is empty).
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "bs_index,tier,branch,x_m,y_m,parent_index")?;
        for s in &self.stations {
            let parent = s.parent.map(|p| p.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{:.6},{:.6},{}",
                s.index, s.tier, s.branch, s.position[0], s.position[1], parent
            )?;
        }
        Ok(())
    }
}
