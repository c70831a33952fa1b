use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::{skin_depth, CableSpec, GeometryError};

/// Metallic body a filament belongs to. Phase indices are 0, 1, 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Group {
    Conductor(usize),
    Sheath(usize),
    Armor,
}

impl Group {
    /// Sheaths and armor, which are bonded together.
    pub fn is_screen(self) -> bool {
        !matches!(self, Group::Conductor(_))
    }
}

/// How the self impedance of an element is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SelfModel {
    /// Sub-conductor with uniform current: DC resistance (Ω/m) and geometric
    /// mean radius (m).
    Filament { resistance: f64, gmr: f64 },
    /// Whole round wire with frequency-dependent internal impedance.
    Rod { radius: f64, sigma: f64, mu_r: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Filament {
    pub x: f64,
    pub y: f64,
    pub group: Group,
    pub model: SelfModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
enum Outline {
    Disk { cx: f64, cy: f64, r: f64 },
    Annulus { cx: f64, cy: f64, r_in: f64, r_out: f64 },
}

/// Discretization controls of the filament model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MeshOptions {
    /// Scales the filament count; 2.0 roughly doubles it.
    pub density: f64,
    pub min_conductor_rings: usize,
    /// Inner conductor rings grow by this factor over the surface ring.
    pub ring_growth: f64,
    /// Target ratio of arc length to radial thickness of conductor sectors.
    pub sector_aspect: f64,
    pub sheath_arcs: usize,
    pub max_filaments: usize,
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self {
            density: 2.0,
            min_conductor_rings: 3,
            ring_growth: 1.5,
            sector_aspect: 2.0,
            sheath_arcs: 24,
            max_filaments: 640,
        }
    }
}

/// Filament discretization of a cable cross-section at one frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSection {
    pub filaments: Vec<Filament>,
    /// True when the count cap forced a coarser mesh than the skin depth asks for.
    pub budget_limited: bool,
    outlines: Vec<Outline>,
}

/// Angular position of phase `p`'s core: phase 0 on top, then counter-clockwise.
pub(crate) fn core_angle(p: usize) -> f64 {
    PI / 2.0 + p as f64 * 2.0 * PI / 3.0
}

/// Concentric rings `(r_in, r_out)` covering a disk of radius `a`, outermost
/// first. The surface ring is `t0` thick; inner rings grow geometrically up
/// to `t_cap`; the innermost element is a full disk.
fn ring_edges(a: f64, t0: f64, t_cap: f64, growth: f64) -> Vec<(f64, f64)> {
    let mut rings = Vec::new();
    let mut r_out = a;
    let mut t = t0.min(t_cap);
    loop {
        let r_in = r_out - t;
        if r_in < 0.5 * t {
            rings.push((0.0, r_out));
            return rings;
        }
        rings.push((r_in, r_out));
        r_out = r_in;
        t = (t * growth).min(t_cap);
    }
}

fn annular_sector_centroid(r_in: f64, r_out: f64, half_angle: f64) -> f64 {
    let radial = 2.0 / 3.0 * (r_out.powi(3) - r_in.powi(3)) / (r_out * r_out - r_in * r_in);
    radial * half_angle.sin() / half_angle
}

/// GMR of a rectangle `w × h` (Rosa's approximation).
fn rectangle_gmr(w: f64, h: f64) -> f64 {
    0.2235 * (w + h)
}

struct Counts {
    rings: Vec<(f64, f64)>,
    sectors: Vec<usize>,
    sheath_layers: usize,
    sheath_arcs: usize,
}

impl Counts {
    fn total(&self, n_armor: usize) -> usize {
        3 * (self.sectors.iter().sum::<usize>() + self.sheath_layers * self.sheath_arcs) + n_armor
    }
}

impl CrossSection {
    pub fn build(spec: &CableSpec, f: f64, opts: &MeshOptions) -> Result<Self, GeometryError> {
        spec.validate()?;
        let a = spec.conductor_radius();
        let (rs_in, rs_out) = spec.sheath_radii();
        let delta_c = skin_depth(spec.sigma_conductor, 1.0, f)?;
        let delta_s = skin_depth(spec.sigma_sheath, 1.0, f)?;
        let n_armor = spec.armor_wires as usize;
        let density = opts.density.max(1e-3).sqrt();

        let counts_at = |coarsen: f64| {
            let t_cap = a / opts.min_conductor_rings.max(1) as f64 / density * coarsen;
            let t0 = delta_c.min(a) / density * coarsen;
            let rings = ring_edges(a, t0, t_cap, opts.ring_growth.max(1.0));
            let sectors = rings
                .iter()
                .map(|&(r_in, r_out)| {
                    if r_in == 0.0 {
                        1
                    } else {
                        let t = r_out - r_in;
                        let mid = 0.5 * (r_in + r_out);
                        ((2.0 * PI * mid / (opts.sector_aspect * t)).ceil() as usize).max(6)
                    }
                })
                .collect();
            let sheath_layers =
                ((spec.sheath_thickness / delta_s * density / coarsen).ceil() as usize).max(1);
            let sheath_arcs = ((opts.sheath_arcs as f64 * density / coarsen).round() as usize).max(6);
            Counts {
                rings,
                sectors,
                sheath_layers,
                sheath_arcs,
            }
        };

        let mut coarsen = 1.0;
        let mut counts = counts_at(coarsen);
        let mut budget_limited = false;
        while counts.total(n_armor) > opts.max_filaments && coarsen < 64.0 {
            budget_limited = true;
            coarsen *= 1.1;
            counts = counts_at(coarsen);
        }

        // Sub-conductors carry the stranded section S_n spread over the
        // geometric disk of diameter d_c.
        let sigma_eff = spec.sigma_conductor * spec.conductor_section / (PI * a * a);
        let center_r = spec.core_center_radius();
        let mut filaments = Vec::with_capacity(counts.total(n_armor));
        let mut outlines = Vec::new();

        for p in 0..3 {
            let phi = core_angle(p);
            let (cx, cy) = (center_r * phi.cos(), center_r * phi.sin());
            outlines.push(Outline::Disk { cx, cy, r: a });
            outlines.push(Outline::Annulus {
                cx,
                cy,
                r_in: rs_in,
                r_out: rs_out,
            });

            for (&(r_in, r_out), &n) in counts.rings.iter().zip(&counts.sectors) {
                if n == 1 {
                    let area = PI * r_out * r_out;
                    filaments.push(Filament {
                        x: cx,
                        y: cy,
                        group: Group::Conductor(p),
                        model: SelfModel::Filament {
                            resistance: 1.0 / (sigma_eff * area),
                            gmr: r_out * (-0.25f64).exp(),
                        },
                    });
                    continue;
                }
                let span = 2.0 * PI / n as f64;
                let area = 0.5 * span * (r_out * r_out - r_in * r_in);
                let rc = annular_sector_centroid(r_in, r_out, span / 2.0);
                let gmr = rectangle_gmr(r_out - r_in, 0.5 * (r_in + r_out) * span);
                for j in 0..n {
                    let ang = phi + (j as f64 + 0.5) * span;
                    filaments.push(Filament {
                        x: cx + rc * ang.cos(),
                        y: cy + rc * ang.sin(),
                        group: Group::Conductor(p),
                        model: SelfModel::Filament {
                            resistance: 1.0 / (sigma_eff * area),
                            gmr,
                        },
                    });
                }
            }

            let layer_t = (rs_out - rs_in) / counts.sheath_layers as f64;
            let span = 2.0 * PI / counts.sheath_arcs as f64;
            for layer in 0..counts.sheath_layers {
                let r_in = rs_in + layer as f64 * layer_t;
                let r_out = r_in + layer_t;
                let area = 0.5 * span * (r_out * r_out - r_in * r_in);
                let rc = annular_sector_centroid(r_in, r_out, span / 2.0);
                let gmr = rectangle_gmr(layer_t, 0.5 * (r_in + r_out) * span);
                for j in 0..counts.sheath_arcs {
                    let ang = phi + (j as f64 + 0.5) * span;
                    filaments.push(Filament {
                        x: cx + rc * ang.cos(),
                        y: cy + rc * ang.sin(),
                        group: Group::Sheath(p),
                        model: SelfModel::Filament {
                            resistance: 1.0 / (spec.sigma_sheath * area),
                            gmr,
                        },
                    });
                }
            }
        }

        let ra = spec.armor_center_radius();
        let wire_r = spec.armor_wire_diameter / 2.0;
        let mu_r = spec.armor_mu.effective();
        for i in 0..n_armor {
            let ang = 2.0 * PI * i as f64 / n_armor as f64;
            let (x, y) = (ra * ang.cos(), ra * ang.sin());
            outlines.push(Outline::Disk { cx: x, cy: y, r: wire_r });
            filaments.push(Filament {
                x,
                y,
                group: Group::Armor,
                model: SelfModel::Rod {
                    radius: wire_r,
                    sigma: spec.sigma_armor,
                    mu_r,
                },
            });
        }

        Ok(Self {
            filaments,
            budget_limited,
            outlines,
        })
    }

    #[cfg(test)]
    pub(crate) fn from_filaments(filaments: Vec<Filament>) -> Self {
        Self {
            filaments,
            budget_limited: false,
            outlines: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.filaments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filaments.is_empty()
    }

    /// Whether `(x, y)` lies inside a metallic part.
    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        self.outlines.iter().any(|o| match *o {
            Outline::Disk { cx, cy, r } => (x - cx).hypot(y - cy) < r,
            Outline::Annulus { cx, cy, r_in, r_out } => {
                let d = (x - cx).hypot(y - cy);
                d > r_in && d < r_out
            }
        })
    }

    /// Total cross-section area per group, recovered from filament resistances.
    #[cfg(test)]
    pub(crate) fn conductance(&self, group: Group) -> f64 {
        self.filaments
            .iter()
            .filter(|fl| fl.group == group)
            .map(|fl| match fl.model {
                SelfModel::Filament { resistance, .. } => 1.0 / resistance,
                SelfModel::Rod { radius, sigma, .. } => sigma * PI * radius * radius,
            })
            .sum()
    }
}
