//! Finite positive measures on the unit circle.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;

use crate::angle::wrap_angle;

/// Phase separation below which two eigenvalues count as one atom.
pub const MERGE_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Atom {
    /// Angle in `[0, 2π)`.
    pub angle: f64,
    pub weight: f64,
}

impl Atom {
    pub fn point(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.angle)
    }
}

/// Weighted atoms sorted by angle, with the total mass carried exactly.
///
/// The stored total is the mass the measure was built to have (`1` for
/// counting and spectral measures); the atom weights sum to it up to
/// rounding.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AtomicCircleMeasure {
    atoms: Vec<Atom>,
    total_mass: f64,
}

/// An arc `[lo, hi]` of angles; `hi` may exceed `2π` for arcs through angle 0.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Arc {
    pub lo: f64,
    pub hi: f64,
}

impl Arc {
    pub const FULL: Arc = Arc { lo: 0.0, hi: TAU };

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_full(&self) -> bool {
        self.length() >= TAU
    }

    pub fn contains(&self, theta: f64) -> bool {
        if self.is_full() {
            return true;
        }
        let offset = wrap_angle(theta - self.lo);
        offset <= self.length()
    }
}

impl AtomicCircleMeasure {
    /// Builds a measure from `(angle, weight)` pairs; angles are wrapped to
    /// `[0, 2π)` and sorted. The total mass is the sum of the weights.
    pub fn from_atoms(atoms: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut atoms: Vec<Atom> = atoms
            .into_iter()
            .map(|(angle, weight)| Atom {
                angle: wrap_angle(angle),
                weight,
            })
            .collect();
        atoms.sort_by(|a, b| a.angle.total_cmp(&b.angle));
        let total_mass = atoms.iter().map(|a| a.weight).fold(0.0, |acc, w| acc + w);
        Self { atoms, total_mass }
    }

    /// Normalized eigenvalue counting measure of a `dim`-dimensional unitary
    /// matrix: atoms at the eigenvalue phases with weight `multiplicity / dim`.
    /// Phases closer than [`MERGE_THRESHOLD`] (cyclically) are merged.
    pub fn counting(eigenvalues: &[Complex64]) -> Self {
        let dim = eigenvalues.len();
        let mut phases: Vec<f64> = eigenvalues.iter().map(|z| wrap_angle(z.arg())).collect();
        phases.sort_by(|a, b| a.total_cmp(b));
        let mut groups: Vec<(f64, usize)> = Vec::with_capacity(dim);
        for p in phases {
            match groups.last_mut() {
                Some((angle, count)) if p - *angle < MERGE_THRESHOLD => *count += 1,
                _ => groups.push((p, 1)),
            }
        }
        if groups.len() > 1 {
            let first = groups[0].0;
            let last = groups[groups.len() - 1].0;
            if first + TAU - last < MERGE_THRESHOLD {
                let (_, count) = groups.pop().unwrap();
                groups[0].1 += count;
            }
        }
        let atoms = groups
            .into_iter()
            .map(|(angle, count)| Atom {
                angle,
                weight: count as f64 / dim as f64,
            })
            .collect();
        Self {
            atoms,
            total_mass: if dim == 0 { 0.0 } else { 1.0 },
        }
    }

    /// `count` equal atoms at `2πk/count + offset`, a discretization of
    /// normalized Lebesgue measure.
    pub fn uniform(count: usize, offset: f64) -> Self {
        let mut m = Self::from_atoms(
            (0..count).map(|k| (TAU * k as f64 / count as f64 + offset, 1.0 / count as f64)),
        );
        m.total_mass = 1.0;
        m
    }

    /// Equal-weight average of probability measures; total mass is the mean
    /// of the inputs' stored totals.
    pub fn pooled(measures: &[AtomicCircleMeasure]) -> Self {
        let k = measures.len() as f64;
        let mut m = Self::from_atoms(
            measures
                .iter()
                .flat_map(|m| m.atoms.iter().map(move |a| (a.angle, a.weight / k))),
        );
        m.total_mass = measures.iter().map(|m| m.total_mass).sum::<f64>() / k;
        m
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn weight_sum(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).fold(0.0, |acc, w| acc + w)
    }

    pub fn max_atom(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).fold(0.0, f64::max)
    }

    /// `2π / (number of atoms)`.
    pub fn mean_spacing(&self) -> f64 {
        TAU / self.atoms.len().max(1) as f64
    }

    /// `∫ τ^k dμ(τ)`.
    pub fn moment(&self, k: i32) -> Complex64 {
        self.atoms
            .iter()
            .map(|a| Complex64::from_polar(a.weight, k as f64 * a.angle))
            .fold(Complex64::new(0.0, 0.0), |acc, v| acc + v)
    }

    /// `μ([0, θ])` for `θ ∈ [0, 2π)`.
    pub fn cdf(&self, theta: f64) -> f64 {
        let idx = self.atoms.partition_point(|a| a.angle <= theta);
        self.atoms[..idx].iter().map(|a| a.weight).fold(0.0, |acc, w| acc + w)
    }

    /// Kolmogorov distance `sup_θ |F(θ) − G(θ)|` of the distribution
    /// functions anchored at angle 0.
    pub fn kolmogorov_distance(&self, other: &AtomicCircleMeasure) -> f64 {
        let mut events: Vec<(f64, f64)> = self
            .atoms
            .iter()
            .map(|a| (a.angle, a.weight))
            .chain(other.atoms.iter().map(|a| (a.angle, -a.weight)))
            .collect();
        events.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut diff = 0.0f64;
        let mut worst = 0.0f64;
        let mut i = 0;
        while i < events.len() {
            let angle = events[i].0;
            while i < events.len() && events[i].0 == angle {
                diff += events[i].1;
                i += 1;
            }
            worst = worst.max(diff.abs());
        }
        worst
    }

    /// Kolmogorov distance to normalized Lebesgue measure.
    pub fn kolmogorov_to_uniform(&self) -> f64 {
        let mut below = 0.0;
        let mut worst = 0.0f64;
        for a in &self.atoms {
            let u = a.angle / TAU;
            worst = worst.max((below - u).abs());
            below += a.weight;
            worst = worst.max((below - u).abs());
        }
        worst
    }

    /// Total weight of atoms lying in any of the arcs.
    pub fn mass_in_arcs(&self, arcs: &[Arc]) -> f64 {
        self.atoms
            .iter()
            .filter(|a| arcs.iter().any(|arc| arc.contains(a.angle)))
            .map(|a| a.weight)
            .fold(0.0, |acc, w| acc + w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn counting_merges_coincident_phases_across_zero() {
        let eig = [
            Complex64::from_polar(1.0, 1e-12),
            Complex64::from_polar(1.0, -1e-12),
            Complex64::from_polar(1.0, 2.0),
        ];
        let m = AtomicCircleMeasure::counting(&eig);
        assert_eq!(m.len(), 2);
        assert_eq!(m.total_mass(), 1.0);
        assert!((m.max_atom() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_is_close_to_lebesgue() {
        let m = AtomicCircleMeasure::uniform(1000, 0.0);
        assert!(m.kolmogorov_to_uniform() <= 1.0 / 1000.0 + 1e-12);
        assert!(m.moment(1).norm() < 1e-12);
    }

    #[test]
    fn kolmogorov_distance_of_shifted_point_masses() {
        let a = AtomicCircleMeasure::from_atoms(vec![(1.0, 0.5), (2.0, 0.5)]);
        let b = AtomicCircleMeasure::from_atoms(vec![(1.5, 0.5), (2.0, 0.5)]);
        assert!((a.kolmogorov_distance(&b) - 0.5).abs() < 1e-15);
        assert_eq!(a.kolmogorov_distance(&a), 0.0);
    }

    #[test]
    fn arcs_through_zero() {
        let arc = Arc { lo: 6.0, hi: 7.0 };
        assert!(arc.contains(0.5));
        assert!(arc.contains(6.1));
        assert!(!arc.contains(1.0));
        let m = AtomicCircleMeasure::from_atoms(vec![(0.5, 0.25), (3.0, 0.75)]);
        assert_eq!(m.mass_in_arcs(&[arc]), 0.25);
    }
}
