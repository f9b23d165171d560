/// Procedural ground texture: several octaves of bilinearly interpolated
/// lattice noise. Identical seeds give identical samples everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub seed: u64,
    /// Scales the texture around mid-grey; 0 gives a uniform plane.
    pub contrast: f64,
    octaves: Vec<Octave>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Octave {
    /// Lattice spacing in metres.
    cell: f64,
    weight: f64,
    offset: (f64, f64),
}

// Incommensurate spacings keep lattice lines of different octaves from lining
// up into a periodic pattern.
const CELLS: [(f64, f64); 5] = [
    (0.37, 0.34),
    (0.171, 0.25),
    (0.083, 0.19),
    (0.043, 0.14),
    (0.023, 0.08),
];

impl Scene {
    pub fn new(seed: u64) -> Self {
        Self::with_contrast(seed, 1.0)
    }

    pub fn with_contrast(seed: u64, contrast: f64) -> Self {
        let octaves = CELLS
            .iter()
            .enumerate()
            .map(|(i, &(cell, weight))| {
                let ox = unit(hash(seed, i as u64, 1 << 40, 7)) * cell;
                let oy = unit(hash(seed, i as u64, 1 << 41, 11)) * cell;
                Octave {
                    cell,
                    weight,
                    offset: (ox, oy),
                }
            })
            .collect();
        Self {
            seed,
            contrast,
            octaves,
        }
    }

    /// Intensity at ground coordinates `(x, y)` metres, nominally in [0, 255].
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let mut acc = 0.0;
        let mut total = 0.0;
        for (i, o) in self.octaves.iter().enumerate() {
            acc += o.weight
                * self.lattice(
                    i as u64,
                    (x + o.offset.0) / o.cell,
                    (y + o.offset.1) / o.cell,
                );
            total += o.weight;
        }
        // lattice values are in [-1, 1]; the sum of a few octaves rarely
        // exceeds half its bound
        128.0 + self.contrast * 220.0 * acc / total
    }

    fn lattice(&self, octave: u64, u: f64, v: f64) -> f64 {
        let (fu, fv) = (u.floor(), v.floor());
        let (tu, tv) = (u - fu, v - fv);
        let (i, j) = (fu as i64, fv as i64);
        let value =
            |di: i64, dj: i64| signed(hash(self.seed, octave, (i + di) as u64, (j + dj) as u64));
        let top = value(0, 0) * (1.0 - tu) + value(1, 0) * tu;
        let bottom = value(0, 1) * (1.0 - tu) + value(1, 1) * tu;
        top * (1.0 - tv) + bottom * tv
    }
}

fn hash(seed: u64, a: u64, b: u64, c: u64) -> u64 {
    let mut h = seed ^ 0x9E37_79B9_7F4A_7C15;
    for v in [a, b, c] {
        h ^= v
            .wrapping_add(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(h << 6)
            .wrapping_add(h >> 2);
        h = splitmix(h);
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn unit(h: u64) -> f64 {
    (h >> 11) as f64 / (1u64 << 53) as f64
}

fn signed(h: u64) -> f64 {
    2.0 * unit(h) - 1.0
}
